"""Command-line interface.

Subcommands: ``ed-degree`` (exact combinatorics), ``solve`` (singular
tuples as JSON), ``span`` (span/critical-space report), ``relations``
(determinantal relations), ``table`` (stabilization rows over a range of
last-factor sizes).  Heavy imports happen after argument parsing so the
``--threads`` cap can be applied before numpy loads its BLAS.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

THREADS_ENV = "TENSORSPAN_THREADS"


@dataclass
class RunConfig:
    """Parsed run options shared by the pipeline commands."""

    format_dims: tuple[int, ...] | None
    tensor_file: str | None
    seed: int
    tol_newton: float
    rank_floor: float | None
    rank_gap: float
    membership_tol: float
    stall_limit: int
    threads: int
    out: str | None
    figure: str | None
    assert_expected: bool


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse format {text!r}: expected n1,n2,...,nk")
    return dims


def _add_common(p: argparse.ArgumentParser, tensor_source: bool = True) -> None:
    if tensor_source:
        p.add_argument("--format", "-f", type=_parse_dims, default=None,
                       help="tensor format as n1,n2,...,nk (random tensor from the seed)")
        p.add_argument("--tensor-file", default=None,
                       help="JSON tensor file to analyze instead of a random tensor")
    p.add_argument("--seed", "-s", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--tol-newton", type=float, default=1e-10,
                   help="Newton/tracker residual tolerance (default 1e-10)")
    p.add_argument("--rank-gap", type=float, default=1e6,
                   help="minimum singular-value gap ratio for rank decisions (default 1e6)")
    p.add_argument("--membership-tol", type=float, default=1e-8,
                   help="relative residual below which membership is declared (default 1e-8)")
    p.add_argument("--stall-limit", type=int, default=10,
                   help="consecutive empty monodromy loops before giving up (default 10)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"BLAS thread cap (default ${THREADS_ENV} or 1)")
    p.add_argument("--out", default=None, help="output file path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensorspan",
        description="Singular tuples of complex tensors and the span of their rank-one tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ed = sub.add_parser("ed-degree", help="count of singular tuples and format classification")
    p_ed.add_argument("fmt", type=_parse_dims, metavar="FORMAT", help="format as n1,n2,...,nk")
    p_ed.add_argument("--json", action="store_true", help="emit JSON instead of text")

    p_solve = sub.add_parser("solve", help="compute all singular tuples of a tensor")
    _add_common(p_solve)

    p_span = sub.add_parser("span", help="span and critical-space report for a tensor")
    _add_common(p_span)
    p_span.add_argument("--figure", default=None,
                        help="write the span-matrix singular value profile as an image")
    p_span.add_argument("--assert-expected", action="store_true",
                        help="exit nonzero unless measured values match known expectations")

    p_rel = sub.add_parser("relations", help="determinantal relations among the singular tuples")
    _add_common(p_rel)
    p_rel.add_argument("--assert-expected", action="store_true",
                       help="exit nonzero unless relation counts match known expectations")

    p_table = sub.add_parser("table", help="span dimensions over a range of last-factor sizes")
    p_table.add_argument("--prefix", type=_parse_dims, required=True,
                         help="leading dimensions n1,...,n_{k-1}")
    p_table.add_argument("--n", required=True, metavar="A..B",
                         help="inclusive range of the last dimension, e.g. 3..5")
    _add_common(p_table, tensor_source=False)
    p_table.add_argument("--figure", default=None,
                         help="write the dimension-versus-n curve as an image")
    p_table.add_argument("--assert-expected", action="store_true",
                         help="exit nonzero unless measured dimensions match known expectations")
    return parser


def _apply_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads < 1:
        raise ValueError("--threads must be at least 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(threads))
    return threads


def _config_from(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        format_dims=getattr(args, "format", None),
        tensor_file=getattr(args, "tensor_file", None),
        seed=args.seed,
        tol_newton=args.tol_newton,
        rank_floor=None,
        rank_gap=args.rank_gap,
        membership_tol=args.membership_tol,
        stall_limit=args.stall_limit,
        threads=_apply_threads(args.threads),
        out=args.out,
        figure=getattr(args, "figure", None),
        assert_expected=getattr(args, "assert_expected", False),
    )


def _load_target(cfg: RunConfig):
    import numpy as np

    from .tensor import Format, load_tensor, random_tensor

    if (cfg.format_dims is None) == (cfg.tensor_file is None):
        raise SystemExit("error: exactly one of --format or --tensor-file is required")
    if cfg.tensor_file is not None:
        try:
            return load_tensor(cfg.tensor_file)
        except json.JSONDecodeError as exc:
            raise SystemExit(
                f"error: malformed tensor file {cfg.tensor_file}: "
                f"line {exc.lineno} column {exc.colno}: {exc.msg}"
            )
        except (OSError, ValueError) as exc:
            raise SystemExit(f"error: cannot load tensor file {cfg.tensor_file}: {exc}")
    fmt = Format(cfg.format_dims)
    return random_tensor(fmt, np.random.default_rng([cfg.seed, 0]))


def _solve(cfg: RunConfig, target):
    from .solver import solve_singular_tuples
    from .tracking import TrackerConfig

    tracker = TrackerConfig(newton_tol=cfg.tol_newton)
    return solve_singular_tuples(target, seed=cfg.seed, config=tracker,
                                 stall_limit=cfg.stall_limit)


def _write_or_print(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_ed_degree(args: argparse.Namespace) -> int:
    from .formats import classify, ed_degree
    from .tensor import Format

    fmt = Format(args.fmt)
    cls = classify(fmt)
    ed = ed_degree(fmt)
    if args.json:
        print(json.dumps({
            "format": list(fmt.dims),
            "ed": ed,
            "is_sub_boundary": cls.is_sub_boundary,
            "is_boundary": cls.is_boundary,
            "is_concise": cls.is_concise,
            "boundary_threshold": cls.boundary_threshold,
            "concise_threshold": cls.concise_threshold,
        }))
        return 0
    kind = "boundary" if cls.is_boundary else (
        "sub-boundary" if cls.is_sub_boundary else "non-sub-boundary")
    conc = "concise" if cls.is_concise else "non-concise"
    print(f"ed{fmt} = {ed}")
    print(f"classification: {kind}, {conc}")
    print(f"boundary value n_B = {cls.boundary_threshold}, concise bound D = {cls.concise_threshold}")
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    target = _load_target(cfg)
    sols = _solve(cfg, target)
    payload = sols.to_json_dict()
    _write_or_print(payload, cfg.out)
    if cfg.out:
        state = "complete" if sols.complete else "INCOMPLETE"
        print(f"format {target.fmt}: {len(sols)} of {sols.ed} tuples ({state}) -> {cfg.out}")
    if not sols.complete:
        print(f"warning: found {len(sols)} of {sols.ed} tuples", file=sys.stderr)
    return 0


def _span_pipeline(cfg: RunConfig):
    from .span import build_span_report, span_dimension

    target = _load_target(cfg)
    sols = _solve(cfg, target)
    report = build_span_report(target, sols, abs_floor=cfg.rank_floor, min_gap=cfg.rank_gap)
    rank_report, _ = span_dimension(sols, abs_floor=cfg.rank_floor, min_gap=cfg.rank_gap)
    return target, sols, report, rank_report


def _span_assertions(cfg: RunConfig, report) -> list[str]:
    from .formats import membership_is_guaranteed
    from .tensor import Format

    problems = []
    if not report.complete:
        problems.append(f"solution set incomplete: {report.span_matrix_rank} columns short of ed")
    if report.rank_ambiguous:
        problems.append("rank decision ambiguous: no clean singular value gap")
    if report.expected_span_dim is not None and \
            report.span_dim_projective != report.expected_span_dim:
        problems.append(
            f"span dimension {report.span_dim_projective} != expected {report.expected_span_dim}")
    if not report.critical_formula_agrees:
        problems.append("measured critical-space dimension disagrees with the formula")
    if membership_is_guaranteed(Format(report.fmt)) and \
            report.membership_residual >= cfg.membership_tol:
        problems.append(
            f"membership residual {report.membership_residual:.3e} "
            f"above tolerance {cfg.membership_tol:g}")
    return problems


def _cmd_span(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    target, sols, report, rank_report = _span_pipeline(cfg)
    expected = "?" if report.expected_span_dim is None else str(report.expected_span_dim)
    print(f"format {target.fmt}, seed {cfg.seed}: {len(sols)} of {sols.ed} tuples"
          + ("" if sols.complete else " (INCOMPLETE, values provisional)"))
    print(f"span matrix rank {report.span_matrix_rank} "
          f"(projective span dimension {report.span_dim_projective}, expected {expected})")
    print(f"critical space: projective dimension {report.critical_dim_projective} "
          f"(formula {'agrees' if report.critical_formula_agrees else 'DISAGREES'})")
    print(f"extra linear relations beyond the critical space: {report.extra_relations}")
    print(f"rank gap ratio {report.gap_ratio:.3e}; "
          f"membership residual {report.membership_residual:.3e}")
    if cfg.out:
        _write_or_print(report.to_json_dict(), cfg.out)
    if cfg.figure:
        from .figures import save_spectrum_figure

        save_spectrum_figure(rank_report.singular_values, rank_report.rank, cfg.figure,
                             title=f"span matrix spectrum, format {target.fmt}")
        print(f"figure -> {cfg.figure}")
    if cfg.assert_expected:
        problems = _span_assertions(cfg, report)
        for line in problems:
            print(f"ASSERT FAIL: {line}", file=sys.stderr)
        return 1 if problems else 0
    return 0


def _cmd_relations(args: argparse.Namespace) -> int:
    from .relations import enumerate_and_filter, extra_relation_rank, verify_T_satisfies
    from .span import critical_space_equations
    from .formats import expected_span_dim
    from .tensor import tensor_to_json_dict

    cfg = _config_from(args)
    target = _load_target(cfg)
    sols = _solve(cfg, target)
    critical = critical_space_equations(target)
    validated = enumerate_and_filter(target, sols, tol=cfg.membership_tol)
    extra = extra_relation_rank(validated, critical)
    worst = verify_T_satisfies(validated, target) if validated else 0.0

    from math import comb

    n_k = target.fmt.dims[-1]
    n_prefixes = target.fmt.size // n_k
    n_candidates = comb(n_prefixes, n_k - 2)
    print(f"format {target.fmt}: {n_candidates} candidate choices, "
          f"{len(validated)} validated relations")
    print(f"extra rank beyond the critical space: {extra}")
    print(f"max |form(T)| residual over validated relations: {worst:.3e}")
    if cfg.out:
        payload = {
            "format": list(target.fmt.dims),
            "seed": cfg.seed,
            "candidates": n_candidates,
            "validated": len(validated),
            "extra_rank": extra,
            "relations": [
                {"label": f.label, "coefficients": tensor_to_json_dict(f.coefficients)}
                for f in validated
            ],
        }
        _write_or_print(payload, cfg.out)
    if cfg.assert_expected:
        problems = []
        if not sols.complete:
            problems.append("solution set incomplete")
        exp_span = expected_span_dim(target.fmt)
        if exp_span is not None:
            from .formats import critical_space_dim

            exp_extra = (critical_space_dim(target.fmt) - 1) - exp_span
            if extra != exp_extra:
                problems.append(f"extra rank {extra} != expected {exp_extra}")
        if validated and worst >= cfg.membership_tol:
            problems.append(f"T does not satisfy its own relations: {worst:.3e}")
        for line in problems:
            print(f"ASSERT FAIL: {line}", file=sys.stderr)
        return 1 if problems else 0
    return 0


def _parse_n_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise SystemExit(f"error: cannot parse range {text!r}: expected A..B")
    if lo > hi:
        raise SystemExit(f"error: empty range {text!r}")
    return lo, hi


def _cmd_table(args: argparse.Namespace) -> int:
    import numpy as np

    from .formats import classify, ed_degree, expected_span_dim
    from .span import build_span_report
    from .tensor import Format, random_tensor

    cfg = _config_from(args)
    lo, hi = _parse_n_range(args.n)
    prefix = tuple(args.prefix)
    rows = []
    for n in range(lo, hi + 1):
        fmt = Format(prefix + (n,))
        target = random_tensor(fmt, np.random.default_rng([cfg.seed, 0]))
        sols = _solve(cfg, target)
        report = build_span_report(target, sols, abs_floor=cfg.rank_floor,
                                   min_gap=cfg.rank_gap)
        rows.append((n, fmt, report))

    print(f"{'n':>3}  {'format':<14} {'dim<Z_T>':>8}  {'critical':>8}  {'complete':>8}")
    for n, fmt, report in rows:
        print(f"{n:>3}  {str(fmt):<14} {report.span_dim_projective:>8}  "
              f"{report.critical_dim_projective:>8}  "
              f"{'yes' if report.complete else 'NO':>8}")

    n_b = classify(Format(prefix + (max(hi, 2),))).boundary_threshold
    dims = [r.span_dim_projective for _, _, r in rows]
    stable = dims[-1]
    first_idx = len(dims) - 1
    while first_idx > 0 and dims[first_idx - 1] == stable:
        first_idx -= 1
    delta = max(0, lo + first_idx - n_b)
    ed_stable = ed_degree(Format(prefix + (max(hi, n_b),)))
    header = f"{'format':<14} {'n_B':>4}  {'dim<Z_T>':>8}  {'delta':>5}  {'ed':>8}"
    fam = "(" + ",".join(map(str, prefix)) + ",n)"
    print()
    print(header)
    print(f"{fam:<14} {n_b:>4}  {stable:>8}  {delta:>5}  {ed_stable:>8}")

    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write("n,format,n_B,span_dim_projective,critical_dim_projective,"
                     "extra_relations,ed,complete,membership_residual\n")
            for n, fmt, report in rows:
                fh.write(",".join(map(str, [
                    n, '"' + str(fmt) + '"', n_b, report.span_dim_projective,
                    report.critical_dim_projective, report.extra_relations,
                    report.ed, report.complete, report.membership_residual,
                ])) + "\n")
        print(f"rows -> {cfg.out}")
    if cfg.figure:
        from .figures import save_table_figure

        save_table_figure([n for n, _, _ in rows], dims, n_b, cfg.figure,
                          title=f"span dimension, format {fam}")
        print(f"figure -> {cfg.figure}")
    if cfg.assert_expected:
        problems = []
        for n, fmt, report in rows:
            if not report.complete:
                problems.append(f"n={n}: solution set incomplete")
            expected = expected_span_dim(fmt)
            if expected is not None and report.span_dim_projective != expected:
                problems.append(
                    f"n={n}: span dimension {report.span_dim_projective} != expected {expected}")
            if not report.critical_formula_agrees:
                problems.append(f"n={n}: critical dimension disagrees with the formula")
        for line in problems:
            print(f"ASSERT FAIL: {line}", file=sys.stderr)
        return 1 if problems else 0
    return 0


_COMMANDS = {
    "ed-degree": _cmd_ed_degree,
    "solve": _cmd_solve,
    "span": _cmd_span,
    "relations": _cmd_relations,
    "table": _cmd_table,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SystemExit:
        raise
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
