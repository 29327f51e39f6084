"""Exact and numeric tools for factorizing the Askey-Wilson operator."""

from .algebra import ChiPoly, Laurent, RatFun, chi_to_laurent, laurent_to_chi, parse_rat, q_shift, rf_eval
from .aw_operator import TEST_VECTOR, AWParams, QDiffOp, awp_reference, eigenvalue, make_H, make_L
from .chain import ChainData, GenericChain, chain_data, lowering, raising, rodrigues, t_chain_data
from .numeric import PrecisionCtx, phi_n, phi_rs, qpoch, qpoch_inf, u_solution, y_solution

__all__ = [
    "AWParams", "ChainData", "ChiPoly", "GenericChain", "Laurent", "PrecisionCtx", "QDiffOp", "RatFun",
    "TEST_VECTOR", "awp_reference", "chain_data", "chi_to_laurent", "eigenvalue", "laurent_to_chi",
    "lowering", "make_H", "make_L", "parse_rat", "phi_n", "phi_rs", "q_shift", "qpoch", "qpoch_inf",
    "raising", "rf_eval", "rodrigues", "t_chain_data", "u_solution", "y_solution",
]
