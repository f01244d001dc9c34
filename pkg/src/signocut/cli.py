"""Command-line entry point.

Subcommands: ``solve`` an instance file under one cut setting, ``separate``
print the cuts available at a point, ``envelope`` evaluate a power-product
envelope, and ``bench`` run the four-setting comparison over a directory of
instances and print the shifted-geometric-mean table.  The environment
variable ``SIGNOCUT_SEED`` overrides ``--seed`` everywhere.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import envelope as env_mod
from . import instio, lp
from .dcc import Sense
from .freesets import Membership, build_free_set, membership
from .icuts import build_cut, select_violated_term
from .model import Box, lift
from .sbb import BranchAndBound, Mode, Settings


def _effective_seed(seed: int) -> int:
    raw = os.environ.get("SIGNOCUT_SEED")
    if raw is None:
        return seed
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"SIGNOCUT_SEED must be an integer, got {raw!r}")


def _csv_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok != ""])
    except ValueError as exc:
        raise SystemExit(f"bad numeric list {text!r}: {exc}")


def _settings(args, mode: Mode) -> Settings:
    return Settings(
        mode=mode,
        time_limit=args.time_limit,
        gap_tol=args.gap_tol,
        node_limit=args.node_limit,
        seed=_effective_seed(args.seed),
    )


def _add_solve_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--time-limit", type=float, default=60.0)
    parser.add_argument("--gap-tol", type=float, default=1e-4)
    parser.add_argument("--node-limit", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json-out", type=Path, default=None)


def cmd_solve(args) -> int:
    program = instio.read_instance(args.instance)
    report = BranchAndBound(program, _settings(args, Mode(args.mode))).solve()
    print(f"status          {report.status}")
    print(f"incumbent       {report.incumbent_value:.10g}")
    print(f"best bound      {report.best_bound:.10g}")
    print(f"relative gap    {report.rel_gap:.3e}")
    print(f"nodes           {report.node_count}")
    print(f"cuts            {report.cuts_added}")
    print(f"wall time       {report.wall_time:.2f} s")
    if args.json_out is not None:
        args.json_out.write_text(instio.solve_report_document(report.as_dict()))
    return 0 if report.status in ("optimal", "node_limit", "time_limit") else 1


def cmd_separate(args) -> int:
    program = instio.read_instance(args.instance)
    ext = lift(program)
    mode = Mode(args.mode)
    point = _csv_floats(args.point) if args.point else None
    if point is not None and point.size != ext.dim:
        raise SystemExit(f"--point needs {ext.dim} values (x then y)")
    driver = BranchAndBound(program, Settings(mode=mode, seed=_effective_seed(args.seed)))
    sol = lp.solve(driver.base_model)
    if sol.status is not lp.LpStatus.OPTIMAL:
        print(f"root LP is {sol.status.value}; nothing to separate")
        return 1
    vertex = sol.zbar
    if point is None:
        point = vertex
    picked = select_violated_term(ext, point, 1e-9)
    if picked is None:
        print("point satisfies every lifted term; no cut separated")
        return 0
    term, sense = picked
    print(f"most violated term {term} ({sense.value} side)")
    emitted = 0
    if mode.wants_oc:
        cut = driver._separate_oc(point, driver.forms[(term, sense)], driver.ext.zbounds)
        if cut is not None:
            _print_cut("outer-approximation cut at the given point", cut)
            emitted += 1
    if mode.wants_ic:
        # intersection cuts need a simplicial cone, which only exists at a
        # vertex of the relaxation: separate at the root LP optimum
        picked_v = select_violated_term(ext, vertex, 1e-9)
        if picked_v is None:
            print("root LP vertex is feasible; no intersection cut")
        else:
            tv, sv = picked_v
            cut = driver._separate_ic(sol, driver.forms[(tv, sv)])
            if cut is None:
                print("no intersection cut at the root vertex")
            else:
                _print_cut(f"intersection cut at the root LP vertex {vertex.round(6)}", cut)
                emitted += 1
    if mode is Mode.DISABLE:
        print("mode disable: separation turned off")
    return 0 if emitted or mode is Mode.DISABLE else 1


def _print_cut(label: str, cut) -> None:
    terms = " + ".join(
        f"{coef:.10g}*z{j}" for j, coef in enumerate(cut.coeffs) if coef != 0.0
    )
    print(f"{label}:")
    print(f"  {terms} <= {cut.rhs:.10g}   (violation {cut.violation_at_source:.3e})")


def cmd_envelope(args) -> int:
    beta = _csv_floats(args.beta)
    bounds = _csv_floats(args.box)
    at = _csv_floats(args.at)
    h = beta.size
    if bounds.size != 2 * h or at.size != h:
        raise SystemExit("--box needs 2*h values (lo1,hi1,...) and --at needs h values")
    box = Box(bounds[0::2], bounds[1::2])
    model = env_mod.make_envelope_model(beta, box)
    value, facet = env_mod.envelope_value(model, at)
    print(f"envelope value  {value:.12g}")
    print(f"facet slope     {', '.join(f'{a:.12g}' for a in facet.a)}")
    print(f"facet offset    {facet.b:.12g}")
    if h == 2:
        closed, _ = env_mod.bivariate_envelope_on_box(model, at)
        print(f"closed form     {closed:.12g}")
    return 0


def cmd_bench(args) -> int:
    paths = sorted(Path(args.dir).glob("*.sp"))
    if not paths:
        raise SystemExit(f"no *.sp instances under {args.dir}")
    modes = [Mode(tok) for tok in args.modes.split(",") if tok]
    results = []
    for mode in modes:
        rows = []
        for path in paths:
            program = instio.read_instance(path)
            report = BranchAndBound(program, _settings(args, mode)).solve()
            rows.append(
                {
                    "instance": path.name,
                    "status": report.status,
                    "incumbent": report.incumbent_value,
                    "node_count": report.node_count,
                    "wall_time": report.wall_time,
                    "rel_gap_pct": 100.0 * min(report.rel_gap, 1.0),
                    "root_bound_initial": report.root_bound_initial,
                    "root_bound_after_cuts": report.root_bound_after_cuts,
                    "cuts_added": report.cuts_added,
                }
            )
        results.append(instio.BenchResult(mode.value, rows))
    print(f"{'setting':<10}{'sgm nodes':>12}{'sgm time':>12}{'sgm gap%':>12}{'vs disable':>12}")
    base = None
    for res in results:
        nodes = res.sgm("node_count", instio.SGM_SHIFT_NODES)
        seconds = res.sgm("wall_time", instio.SGM_SHIFT_TIME)
        gap = res.sgm("rel_gap_pct", instio.SGM_SHIFT_GAP * 100.0)
        if res.mode == "disable":
            base = nodes
        ratio = nodes / base if base else float("nan")
        print(f"{res.mode:<10}{nodes:>12.1f}{seconds:>12.3f}{gap:>12.4f}{ratio:>12.3f}")
    if args.json_out is not None:
        args.json_out.write_text(instio.bench_document(results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signocut",
                                     description="signomial program cutting planes and solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance file")
    p_solve.add_argument("instance", type=Path)
    p_solve.add_argument("--mode", choices=[m.value for m in Mode], default="oic")
    _add_solve_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sep = sub.add_parser("separate", help="print cuts for a point")
    p_sep.add_argument("instance", type=Path)
    p_sep.add_argument("--point", type=str, default=None,
                       help="comma-separated z = (x, y); default: root LP optimum")
    p_sep.add_argument("--mode", choices=[m.value for m in Mode], default="oic")
    p_sep.add_argument("--seed", type=int, default=0)
    p_sep.set_defaults(func=cmd_separate)

    p_env = sub.add_parser("envelope", help="evaluate an envelope and its facet")
    p_env.add_argument("--beta", required=True, help="comma-separated exponents")
    p_env.add_argument("--box", required=True, help="comma-separated lo,hi per variable")
    p_env.add_argument("--at", required=True, help="comma-separated evaluation point")
    p_env.set_defaults(func=cmd_envelope)

    p_bench = sub.add_parser("bench", help="compare cut settings over a directory")
    p_bench.add_argument("--dir", required=True)
    p_bench.add_argument("--modes", default="disable,oc,ic,oic")
    _add_solve_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (instio.InstanceFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
