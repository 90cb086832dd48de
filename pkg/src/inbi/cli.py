"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, io, toy
from .auam import EmptySelectionError, SurfaceError
from .config import Config, dump_config, load_config
from .model import BuildingProblem, InfeasibleDecisionError
from .nbi import FrontierError
from .pipeline import Algorithm, StageError, run
from .problem import AnchorError, DegenerateBoundsError

log = logging.getLogger("inbi")

NUMERICAL_ERRORS = (
    StageError, FrontierError, AnchorError, DegenerateBoundsError, SurfaceError, EmptySelectionError,
    InfeasibleDecisionError, ArithmeticError, np.linalg.LinAlgError,
)
TOYS = {"bent-simplex": toy.bent_simplex, "planar": toy.seeded_planar}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps sub-command copies from overwriting values given before the sub-command.
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="inbi", description="INBI frontier toolkit", parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("frontier", parents=[common], help="compute and export one frontier")
    f.add_argument("--problem", choices=["building", *TOYS], default="building")
    f.add_argument("--case", default="standard", help="case id for the building problem")
    f.add_argument("--alg", choices=[a.value for a in Algorithm], default="inbi")
    f.add_argument("--scenario", help="scenario manifest (YAML) instead of a synthetic one")

    c = sub.add_parser("case", parents=[common], help="run one case with one algorithm")
    c.add_argument("--id", required=True, help="standard or 1..12")
    c.add_argument("--alg", choices=[a.value for a in Algorithm], default="inbi")
    c.add_argument("--scenario", help="scenario manifest (YAML) instead of a synthetic one")

    a = sub.add_parser("compare-all", parents=[common], help="all cases under all algorithms")
    a.add_argument("--scenario", help="scenario manifest (YAML) instead of a synthetic one")

    t = sub.add_parser("trr-exp", parents=[common], help="allocation deviation with and without TRR")
    t.add_argument("--n-seeds", type=int, default=1, help="consecutive seeds starting at --seed")

    s = sub.add_parser("smoothing", parents=[common], help="optimization degree against roster size")
    s.add_argument("--from", dest="start", type=int, default=10)
    s.add_argument("--to", dest="stop", type=int, default=80)
    s.add_argument("--step", type=int, default=10)
    s.add_argument("--case", default="standard")

    y = sub.add_parser("synth", parents=[common], help="write a synthetic scenario")
    y.add_argument("--symmetric", action="store_true")
    return p


def _config(args) -> Config:
    cfg = load_config(getattr(args, "config", None))
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _scenario(args):
    path = getattr(args, "scenario", None)
    return io.read_scenario(path) if path else None


def cmd_frontier(args, cfg: Config, out: Path) -> None:
    if args.problem == "building":
        case = harness.get_case(args.case)
        res = harness.run_case_full(case, args.alg, cfg, _scenario(args))
    else:
        make = TOYS[args.problem]
        problem = make(cfg.seed) if args.problem == "planar" else make()
        res = run(problem, args.alg, cfg)
    io.write_frontier(out / "frontier.csv", res.frontier, res.selected, res.compromise_index)
    if res.aws is not None:
        io.write_aws_report(out / "aws_report.csv", res.aws)
    if res.auam is not None:
        io.write_auam_trace(out / "auam_trace.csv", res.auam)
    m = res.metrics
    print(f"{res.algorithm.value}: {m['n_frontier']} frontier points ({m['n_nbi']} from NBI), "
          f"{m['n_selected']} selected, compromise f = {np.array2string(res.compromise.f, precision=6)}")
    print(f"nearest-neighbour CV: NBI {m['cv_nbi']:.4f}, selected {m['cv_selected']:.4f}")


def cmd_case(args, cfg: Config, out: Path) -> None:
    case = harness.get_case(args.id)
    row = harness.run_case(case, args.alg, cfg, _scenario(args))
    io.write_case_table(out / f"case_{case.case_id}_{row.algorithm}.csv", [row])
    print(io.format_case_table([row]), end="")


def cmd_compare_all(args, cfg: Config, out: Path) -> None:
    rows = harness.compare_all(cfg, scenario=_scenario(args))
    io.write_case_table(out / "compare_all.csv", rows)
    text = io.format_case_table(rows)
    (out / "compare_all.txt").write_text(text)
    print(text, end="")


def cmd_trr(args, cfg: Config, out: Path) -> None:
    if args.n_seeds < 1:
        raise UsageError("--n-seeds must be at least 1")
    summary = []
    for k in range(args.n_seeds):
        seed = cfg.seed + k
        rep = harness.trr_deviation_experiment(dataclasses.replace(cfg, seed=seed))
        io.write_deviation(out / f"trr_deviation_seed{seed}.csv", rep)
        summary.append((seed, rep.mean_off, rep.mean_on, rep.reduction_pct))
        print(f"seed {seed}: mean deviation off {rep.mean_off:.4f}%  on {rep.mean_on:.4f}%  "
              f"reduction {rep.reduction_pct:.1f}%")
    io.write_rows(out / "trr_summary.csv", ("seed", "mean_off_pct", "mean_on_pct", "reduction_pct"), summary)


def cmd_smoothing(args, cfg: Config, out: Path) -> None:
    if args.step < 1 or args.start < 4 or args.stop < args.start:
        raise UsageError("need --from >= 4, --to >= --from and --step >= 1")
    counts = range(args.start, args.stop + 1, args.step)
    rows = harness.smoothing_experiment(counts, cfg, args.case)
    io.write_smoothing(out / "smoothing.csv", rows)
    for r in rows:
        print(f"{r.n_buildings:>4} {r.algorithm:<5} degree {r.degree:8.3f}%")


def cmd_synth(args, cfg: Config, out: Path) -> None:
    spec = dataclasses.replace(cfg.synthesis, seed=cfg.seed, symmetric=args.symmetric or cfg.synthesis.symmetric)
    path = io.write_scenario(harness.synthesize_scenario(spec), out)
    print(f"wrote {path}")


COMMANDS = {
    "frontier": cmd_frontier, "case": cmd_case, "compare-all": cmd_compare_all,
    "trr-exp": cmd_trr, "smoothing": cmd_smoothing, "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        out = Path(getattr(args, "out", None) or "out")
        out.mkdir(parents=True, exist_ok=True)
        dump_config(cfg, out / "config.yaml")
        COMMANDS[args.command](args, cfg, out)
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
