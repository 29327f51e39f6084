"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical identity fails,
2 when the input or configuration is invalid.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import re
import sys
from datetime import datetime, timezone
from fractions import Fraction

from .algebra import RatFun, chi_to_laurent, format_rat, parse_rat
from .aw_operator import (
    TEST_VECTOR,
    AWParams,
    apply,
    awp_reference,
    eigenvalue,
    make_H,
    make_L,
    random_params,
    t_eigenvalue,
)
from .chain import (
    GenericChain,
    Report,
    downward_sequence,
    lowering_chain,
    rodrigues,
    rodrigues_laurent,
    t_chain_data,
    verify_boundary,
    verify_downward_relations,
    verify_eq21,
    verify_eq22,
    verify_factorization,
    verify_generic_chain,
    verify_intertwining,
    verify_raising_relations,
    verify_upward_recurrence,
)
from .errors import AWError, DegenerateLevel, InitialConditionViolated, InvalidParams, ZeroDeformation
from .numeric import MIN_DEFORM_DIGITS, PrecisionCtx, admissible_alphas, convergence_study

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2

SUITES = (
    "factorization",
    "t-factorization",
    "boundary",
    "rodrigues",
    "eigen",
    "recurrence",
    "intertwining",
    "null-chain",
    "generic",
)

DEFAULT_RANGES = {
    "factorization": (-5, 10),
    "t-factorization": (0, 3),
    "rodrigues": (0, 8),
    "eigen": (0, 8),
    "recurrence": (1, 7),
    "intertwining": (0, 4),
    "generic": (-1, 5),
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _n_range(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected an inclusive range 'lo..hi', got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _rational(text: str) -> Fraction:
    try:
        return parse_rat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _rational_list(text: str) -> list[Fraction]:
    return [_rational(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    tv = TEST_VECTOR.as_strings()
    for name in ("q", "a", "b", "c", "d"):
        shared.add_argument(f"--{name}", default=tv[name], help=f"rational parameter {name} (default {tv[name]})")
    shared.add_argument("--n", type=int, help="single level")
    shared.add_argument("--n-range", type=_n_range, help="inclusive level range lo..hi")
    shared.add_argument("--t", type=_rational, help="deformation parameter (rational)")
    shared.add_argument("--precision", type=int, default=60, help="significant digits for numerics")
    shared.add_argument("--format", choices=("json", "csv", "table"), default="json")
    shared.add_argument("--out", help="write output to this path instead of stdout")
    shared.add_argument("--seed", type=int, default=0, help="seed for random parameter draws")
    shared.add_argument("--no-timestamp", action="store_true", help="omit the generated_at header")

    parser = argparse.ArgumentParser(prog="awfactor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("coeffs", parents=[shared], help="factorization coefficients per level")

    pv = sub.add_parser("verify", parents=[shared], help="run identity suites")
    pv.add_argument("--suite", choices=SUITES + ("all",), default="all")
    pv.add_argument("--steps", type=int, default=4, help="lowering steps for the null-chain suite")
    pv.add_argument("--chain-file", help="JSON chain file for the generic suite")
    pv.add_argument("--draws", type=int, default=0, help="extra seeded random parameter draws")

    pr = sub.add_parser("rodrigues", parents=[shared], help="raised polynomials vs the 4phi3 reference")
    pr.add_argument("--max-depth", type=int, default=16)

    pd = sub.add_parser("deform", parents=[shared], help="t -> 1 convergence study of Phi_n")
    pd.add_argument("--k-range", type=_n_range, default=(2, 5))
    pd.add_argument("--z", type=_rational_list, default=[Fraction(3, 2), Fraction(2), Fraction(5, 2)])
    pd.add_argument("--anchor", type=_rational, default=Fraction(2))
    pd.add_argument("--alpha", choices=("auto", "ab", "ac", "ad"), default="auto",
                    help="second solution used in y: q/(ab), q/(ac), q/(ad); auto picks the first pole-free one")
    pd.add_argument("--eig-exponent", type=int,
                    help="eigen-residual bound 10^-E * max(|Phi|,1); default digits - 15 - 2n")
    return parser


def _params(args) -> AWParams:
    return AWParams.from_strings(args.q, args.a, args.b, args.c, args.d)


def _levels(args, default: tuple[int, int]) -> tuple[int, int]:
    if args.n is not None and args.n_range is not None:
        raise ConfigError("use either --n or --n-range, not both")
    if args.n is not None:
        return args.n, args.n
    return args.n_range or default


# ---------------------------------------------------------------------------
# output


def _header(args) -> dict:
    return {} if args.no_timestamp else {"generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(args, payload: dict, columns: list[str], rows: list[dict], comments: list[str] = ()) -> str:
    if args.format == "json":
        return json.dumps({**_header(args), **payload}, indent=2) + "\n"
    lines = []
    stamp = _header(args)
    if stamp:
        lines.append(f"# generated_at={stamp['generated_at']}")
    lines.extend(f"# {c}" for c in comments)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k)) for k in columns})
        return "\n".join(lines + [buf.getvalue().rstrip("\n")]) + "\n"
    cells = [[_cell(r.get(k)) for k in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    lines.extend("  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells)
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


# ---------------------------------------------------------------------------
# commands


def cmd_coeffs(args) -> int:
    p = _params(args)
    lo, hi = _levels(args, (0, 5))
    t = args.t if args.t is not None else Fraction(1)
    if t == 0:
        raise ZeroDeformation("t must be nonzero")
    for n in range(lo, hi + 1):
        if t_eigenvalue(p, n, t) == t_eigenvalue(p, n + 1, t):
            raise DegenerateLevel(n)
    records = [t_chain_data(p, n, t).as_strings() for n in range(lo, hi + 1)]
    columns = ["n", "t", "Fm2", "Fm1", "F0", "F1", "F2", "bm1", "b0", "b1", "mu"]
    payload = {"command": "coeffs", "params": p.as_strings(), "records": records}
    _emit(args, _render(args, payload, columns, records))
    return EXIT_OK


def _chi_residual(diff) -> RatFun:
    return RatFun(chi_to_laurent(diff))


def _suite_report(suite: str, p: AWParams, args) -> Report:
    rep = Report()
    lo, hi = _levels(args, DEFAULT_RANGES.get(suite, (0, 0)))
    if suite == "factorization":
        for n in range(lo, hi + 1):
            rep.extend(verify_factorization(p, n))
    elif suite == "t-factorization":
        ts = [args.t] if args.t is not None else [Fraction(1, 2), Fraction(3, 2), Fraction(2)]
        for t in ts:
            for n in range(lo, hi + 1):
                rep.extend(verify_factorization(p, n, t))
    elif suite == "boundary":
        rep.extend(verify_boundary(p))
    elif suite == "rodrigues":
        p.validate(hi)
        for n in range(lo, hi + 1):
            r, ref = rodrigues(p, n), awp_reference(p, n)
            c = r.proportionality(ref)
            scale = c if c is not None else (r.leading / ref.leading if ref.leading else Fraction(0))
            rep.add("eq25", n, 1, _chi_residual(r - ref * scale) if c is not None else _nonzero_witness(r, ref, scale))
    elif suite == "eigen":
        p.validate(hi)
        L = make_L(p)
        seq = rodrigues_laurent(p, hi)
        for n in range(lo, hi + 1):
            P = RatFun(chi_to_laurent(awp_reference(p, n)))
            rep.add("eq9", n, 1, apply(L, P) - P * eigenvalue(p, n))
            rep.add("eq12", n, 1, apply(make_H(p, n), seq[n]))
    elif suite == "recurrence":
        p.validate(hi + 1)
        seq = rodrigues_laurent(p, hi + 1)
        for n in range(lo, hi + 1):
            rep.extend(verify_upward_recurrence(p, seq, n))
        for n in range(0, hi + 1):
            rep.extend(verify_raising_relations(p, seq, n))
            rep.extend(verify_eq21(p, n))
        rep.extend(verify_eq22(p))
        start = RatFun(chi_to_laurent(awp_reference(p, 3)))
        rep.extend(verify_downward_relations(p, downward_sequence(p, start, 3, 6)))
    elif suite == "intertwining":
        for n in range(lo, hi + 1):
            rep.extend(verify_intertwining(p, n))
    elif suite == "null-chain":
        for k, f in enumerate(lowering_chain(p, args.steps)):
            rep.add("eq30", -(k + 1), 1, f)
    elif suite == "generic":
        if args.chain_file:
            with open(args.chain_file, encoding="utf-8") as fh:
                chain = GenericChain.from_json(json.load(fh))
            if args.n_range is None and args.n is None and chain.levels is not None:
                lo, hi = chain.levels[0] + 1, chain.levels[1] - 1
        else:
            chain = GenericChain.from_params(p)
        rep.extend(verify_generic_chain(chain, (lo, hi)))
    else:
        raise ConfigError(f"unknown suite {suite}")
    return rep


def _nonzero_witness(r, ref, scale) -> RatFun:
    diff = r - ref * scale
    if diff.is_zero():
        # degree mismatch or zero polynomial: report the raised polynomial itself
        return RatFun(chi_to_laurent(r)) if not r.is_zero() else RatFun.coerce(1)
    return _chi_residual(diff)


def cmd_verify(args) -> int:
    base = _params(args)
    suites = SUITES if args.suite == "all" else (args.suite,)
    if args.suite == "all":
        suites = tuple(s for s in SUITES if s != "generic" or args.chain_file is None) + (
            ("generic",) if args.chain_file else ()
        )
    rng = random.Random(args.seed)
    param_sets = [base] + [random_params(rng) for _ in range(args.draws)]
    rows, failures, notes = [], [], []
    for idx, p in enumerate(param_sets):
        for suite in suites:
            if args.chain_file and suite == "generic" and idx > 0:
                continue
            try:
                rep = _suite_report(suite, p, args)
            except InitialConditionViolated as exc:
                failures.append({"suite": suite, "param_set": idx, "equation_id": "InitialConditionViolated",
                                 "message": str(exc)})
                continue
            for r in rep:
                rec = {"suite": suite, "param_set": idx, **r.to_json()}
                rows.append(rec)
                if not r.is_zero:
                    failures.append(rec)
            notes.extend(rep.notes)
    payload = {
        "command": "verify",
        "params": [p.as_strings() for p in param_sets],
        "suites": list(suites),
        "ok": not failures,
        "residual_count": len(rows),
        "failures": failures,
        "results": rows,
    }
    columns = ["suite", "param_set", "equation_id", "n", "t", "residual_is_zero"]
    table_rows = rows + [{"suite": f["suite"], "param_set": f["param_set"], "equation_id": f["equation_id"],
                          "residual_is_zero": False} for f in failures if "residual_is_zero" not in f]
    _emit(args, _render(args, payload, columns, table_rows, [f"ok={str(not failures).lower()}"]))
    for f in failures:
        print(f"FAILED {f['suite']} {f['equation_id']} n={f.get('n')}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_FAIL


def cmd_rodrigues(args) -> int:
    p = _params(args)
    lo, hi = _levels(args, (0, 8))
    if lo < 0:
        raise ConfigError("Rodrigues levels start at 0")
    if hi > args.max_depth:
        raise ConfigError(f"n = {hi} exceeds the depth cap {args.max_depth}")
    p.validate(hi)
    records, ok = [], True
    for n in range(lo, hi + 1):
        r, ref = rodrigues(p, n), awp_reference(p, n)
        c = r.proportionality(ref)
        ok = ok and c is not None
        records.append({
            "n": n,
            "rodrigues": r.to_json(),
            "reference": ref.to_json(),
            "c_tilde": None if c is None else format_rat(c),
            "proportional": c is not None,
        })
    payload = {"command": "rodrigues", "params": p.as_strings(), "ok": ok, "records": records}
    _emit(args, _render(args, payload, ["n", "c_tilde", "proportional", "rodrigues", "reference"], records))
    return EXIT_OK if ok else EXIT_FAIL


def _real(ctx, x, digits: int = 30) -> str:
    return ctx.mp.nstr(x, digits, min_fixed=-5, max_fixed=5)


def cmd_deform(args) -> int:
    p = _params(args)
    if args.precision < MIN_DEFORM_DIGITS:
        raise ConfigError(f"precision {args.precision} is below the floor of {MIN_DEFORM_DIGITS} digits")
    if abs(p.q) >= 1:
        raise ConfigError("the deformation study needs |q| < 1")
    lo, hi = _levels(args, (3, 3))
    if lo < 0:
        raise ConfigError("Phi_n is defined for n >= 0")
    p.validate(hi + 1)
    ctx = PrecisionCtx(args.precision)
    alpha = None
    if args.alpha != "auto":
        alpha = dict(zip(("ab", "ac", "ad"), admissible_alphas(p)[1:]))[args.alpha]
    ks = range(args.k_range[0], args.k_range[1] + 1)
    ts = None if args.t is None else [args.t]
    rows, failures = [], []
    for n in range(lo, hi + 1):
        study = convergence_study(p, n, ks, args.z, args.anchor, ctx, args.eig_exponent, ts, alpha)
        for r in study:
            rows.append({
                "n": r.n,
                "k": r.k,
                "t": format_rat(r.t),
                "z": format_rat(r.z),
                "phi_over_c": _real(ctx, r.phi_over_c),
                "p_exact": _real(ctx, r.p_exact),
                "abs_err": _real(ctx, r.abs_err, 10),
                "eig_residual": _real(ctx, r.eig_residual, 6),
                "eig_bound": _real(ctx, r.eig_bound, 6),
                "eig_ok": bool(r.eig_ok),
            })
            if not r.eig_ok:
                failures.append(f"eigen residual above bound at n={r.n} t={format_rat(r.t)} z={format_rat(r.z)}")
        if ts is None:
            for z in args.z:
                if z == args.anchor:
                    continue
                errs = [r.abs_err for r in study if r.z == z]
                if any(b >= a for a, b in zip(errs, errs[1:])):
                    failures.append(f"abs_err not strictly decreasing in k at n={n} z={format_rat(z)}")
    comments = [
        f"precision={args.precision} truncation_tol={format_rat(ctx.truncation_tol)}",
        f"anchor={format_rat(args.anchor)} alpha={args.alpha}",
    ]
    columns = ["n", "k", "t", "z", "phi_over_c", "p_exact", "abs_err", "eig_residual", "eig_bound", "eig_ok"]
    payload = {"command": "deform", "params": p.as_strings(), "precision": args.precision,
               "truncation_tol": format_rat(ctx.truncation_tol), "ok": not failures,
               "failures": failures, "rows": rows}
    _emit(args, _render(args, payload, columns, rows, comments))
    for f in failures:
        print(f"FAILED {f}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_FAIL


COMMANDS = {"coeffs": cmd_coeffs, "verify": cmd_verify, "rodrigues": cmd_rodrigues, "deform": cmd_deform}


VALUE_FLAGS = frozenset({
    "--q", "--a", "--b", "--c", "--d", "--n", "--n-range", "--t", "--k-range", "--z", "--anchor",
})


def _join_signed_values(argv: list[str]) -> list[str]:
    """Glue flags to values like ``-2..3`` or ``-1/2`` that argparse would read as options."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_signed_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidParams, DegenerateLevel, ZeroDeformation, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AWError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
