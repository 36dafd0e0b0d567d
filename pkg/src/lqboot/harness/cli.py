"""Command line: ``lqboot simulate | plot | riccati``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
runtime failures.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..riccati import RiccatiError, solve_riccati, spectral_radius
from .config import ConfigError, load_config
from .csvio import CsvParseError, write_csv
from .experiment import ExperimentError, run_experiment
from .plots import render_plots

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def build_parser():
    parser = _Parser(prog="lqboot", description="Bootstrap-based adaptive LQ control simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run seeded replicates and write results.csv")
    sim.add_argument("--config", required=True, help="experiment config (YAML); bundled names allowed")
    sim.add_argument("--replicates", type=int, help="override the replicate count")
    sim.add_argument("--seed", type=int, help="override base_seed")
    sim.add_argument("--out", help="output directory (overrides output_dir)")

    plot = sub.add_parser("plot", help="render SVG charts from a results CSV")
    plot.add_argument("--in", dest="csv", required=True)
    plot.add_argument("--out", required=True)

    ric = sub.add_parser("riccati", help="print K, L and the closed-loop spectral radius for theta0")
    ric.add_argument("--config", required=True)
    return parser


def _fmt_matrix(M):
    return "\n".join("  " + " ".join(f"{v:7.2f}" for v in row) for row in M)


def cmd_riccati(args):
    cfg = load_config(args.config)
    model = cfg.model()
    sol = solve_riccati(model.theta0, model.costs)
    rho = spectral_radius(model.theta0 @ sol.M)
    print("K =")
    print(_fmt_matrix(sol.K))
    print("L =")
    print(_fmt_matrix(sol.L))
    print(f"rho = {rho:.2f}")
    return EXIT_OK


def cmd_simulate(args):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(replicates=args.replicates, base_seed=args.seed, output_dir=args.out)
    out = Path(cfg.output_dir)
    result = run_experiment(cfg)
    csv_path = out / "results.csv"
    write_csv(result, csv_path)
    meta = {
        "config": cfg.source,
        "replicates": cfg.replicates,
        "base_seed": cfg.base_seed,
        "horizon": cfg.horizon,
        "beta": cfg.beta,
        "bootstrap_source": cfg.bootstrap_source,
        "break_times": [t for t, _ in cfg.breaks],
        "seeds": [r.seed for r in result.replicates],
        "diverged": [{"replicate": r.index, "time": r.divergence_time} for r in result.diverged],
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    done = result.completed
    final = np.median([r.normalized_regret[-1] for r in done])
    print(f"wrote {csv_path} ({len(done)} replicates, {len(result.diverged)} diverged)")
    print(f"median normalized regret at n={cfg.horizon}: {final:.4g}")
    return EXIT_OK


def cmd_plot(args):
    paths = render_plots(args.csv, args.out)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "plot": cmd_plot, "riccati": cmd_riccati}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return exc.code or EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExperimentError, RiccatiError, CsvParseError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
