"""Command line: ``amortize run CONFIG`` and ``amortize compare CONFIG...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .experiment import (
    ConfigError,
    ExperimentConfig,
    compare,
    expand_grid,
    load_config,
    run,
    write_table,
)


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides", "any config key may be set on the command line")
    for name in ExperimentConfig.field_names():
        group.add_argument(f"--{name.replace('_', '-')}", dest=f"set_{name}", metavar="VALUE")


def _overrides(args: argparse.Namespace) -> dict:
    values = {}
    for name in ExperimentConfig.field_names():
        raw = getattr(args, f"set_{name}")
        if raw is not None:
            values[name] = yaml.safe_load(raw) if name not in ("label", "path", "output") else raw
    return values


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amortize",
        description="Amortized equity-of-attention reranking simulator.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write its metric CSVs")
    p_run.add_argument("config", help="flat YAML config file")
    _add_overrides(p_run)

    p_cmp = sub.add_parser("compare", help="merge the unfairness curves of several experiments")
    p_cmp.add_argument("configs", nargs="+", help="config files sharing dataset and attention model")
    p_cmp.add_argument("-o", "--out", required=True, help="path of the merged CSV")
    p_cmp.add_argument("--thetas", type=_floats, default=[], help="also run ILP at these thetas (from the first config)")
    p_cmp.add_argument("--baselines", action="store_true", help="also run Relevance and Objective (from the first config)")
    p_cmp.add_argument("-j", "--jobs", type=int, default=1, help="parallel experiments")
    _add_overrides(p_cmp)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        overrides = _overrides(args)
        if args.command == "run":
            result = run(load_config(args.config, overrides))
            s = result.summary()
            print(
                f"{s['label']}: {s['iterations']} iterations, final unfairness {s['final_unfairness']:.6g}, "
                f"quality [{s['min_quality']:.4f}, {s['max_quality']:.4f}], {s['total_runtime_s']:.2f}s"
            )
        else:
            configs = [load_config(path, overrides) for path in args.configs]
            configs += expand_grid(configs[0], args.thetas, args.baselines)
            header, rows = compare(configs, jobs=args.jobs)
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            write_table(args.out, header, rows)
            print(f"wrote {len(rows)} iterations x {len(header) - 1} curves to {args.out}")
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
