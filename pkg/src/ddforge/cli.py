"""Command line: ``ddforge run --config FILE`` and ``ddforge bench FAMILY ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import DD_CHOICES, FAMILIES, ConfigError, RunConfig, load_run_config, parse_sizes, run_experiment


def _dd_list(values: list[str]) -> list[str]:
    out: list[str] = []
    for v in values:
        for item in v.split(","):
            item = item.strip().lower()
            if item == "all":
                out.extend(DD_CHOICES)
            elif item and item != "none":
                out.append(item)
    return list(dict.fromkeys(out))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddforge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="override the output directory")

    bench = sub.add_parser("bench", help="run one benchmark family")
    bench.add_argument("family", choices=FAMILIES)
    bench.add_argument("--sizes", default="3..6", help="range a..b or comma list")
    bench.add_argument(
        "--dd",
        action="append",
        default=[],
        help="DD sequence, repeatable or comma separated: none, all, " + ", ".join(DD_CHOICES),
    )
    bench.add_argument("--pulse-efficient", nargs="?", const="on", default="off", choices=("on", "off"))
    bench.add_argument("--shots", type=int, default=8192)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--noise", default="profile-default", help="noise profile name")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", default="results")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = load_run_config(args.config)
            if args.out:
                cfg.out = args.out
        else:
            cfg = RunConfig(
                benchmark=args.family,
                sizes=parse_sizes(args.sizes),
                dd=_dd_list(args.dd),
                pulse_efficient=args.pulse_efficient == "on",
                noise_profile=args.noise,
                shots=args.shots,
                repeats=args.repeats,
                seed=args.seed,
                out=args.out,
                workers=args.workers,
            )
        result = run_experiment(cfg)
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"ddforge: error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(result.rows)} rows to {result.out_dir / 'results.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
