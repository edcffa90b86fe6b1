"""Command line entry point: ``gsslnoise {generate,run,report,verify}``.

Exit status is 0 on success, 1 on invalid usage or configuration and 2
when execution fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..datasets import DatasetError, GENERATORS, make_dataset, save_csv
from .config import load_config
from .grid import ConfigError, run_grid
from .report import aggregate, emit_report, read_records_csv, write_records_csv

log = logging.getLogger("gsslnoise")

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2
SUFFIX = {"csv": ".csv", "markdown": ".md", "svg": ".svg", "svg-plot": ".svg"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _parser():
    p = _Parser(prog="gsslnoise", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write synthetic datasets to CSV")
    g.add_argument("--datasets", default="g241c,g241n,digit1",
                   help=f"comma list from {sorted(GENERATORS)}")
    g.add_argument("--seed-root", type=int, default=0)
    g.add_argument("--n", type=int, default=1500)
    g.add_argument("--d", type=int, default=241)
    g.add_argument("--out-dir", type=Path, default=Path("."))

    r = sub.add_parser("run", help="run an experiment grid")
    r.add_argument("--config", type=Path, help="flat key = value config file")
    r.add_argument("--seeds", help="e.g. 0..19 or 0,3,7")
    r.add_argument("--datasets")
    r.add_argument("--label-fractions")
    r.add_argument("--noise-rates")
    r.add_argument("--algorithms", help="e.g. 'gfhf; lgc alpha=0.9; le p=0.2'")
    r.add_argument("--k")
    r.add_argument("--n")
    r.add_argument("--d")
    r.add_argument("--workers")
    r.add_argument("--seed-root")
    r.add_argument("--out-dir", type=Path, default=Path("."))
    r.add_argument("--format", choices=["csv", "markdown", "svg-plot"], action="append",
                   help="also emit an aggregate report (repeatable)")
    r.add_argument("--dry-run", action="store_true", help="print the cell count and exit")
    r.add_argument("--no-timing", action="store_true", help="write zero wall times")

    rep = sub.add_parser("report", help="aggregate a records file and render it")
    rep.add_argument("records", type=Path)
    rep.add_argument("--format", choices=["csv", "markdown", "svg-plot"], default="markdown")
    rep.add_argument("--out-dir", type=Path, default=Path("."))
    rep.add_argument("--output", type=Path, help="explicit output path")

    v = sub.add_parser("verify", help="run the invariant checks (and optionally pytest)")
    v.add_argument("--pytest", action="store_true", help="also run the test suite under tests/")
    v.add_argument("--seed-root", type=int, default=0)
    return p


def _cmd_generate(args):
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name in (s.strip() for s in args.datasets.split(",") if s.strip()):
        ds = make_dataset(name, args.seed_root, n=args.n, d=args.d)
        path = save_csv(ds, args.out_dir / f"{name}_seed{args.seed_root}.csv")
        print(f"wrote {path} ({ds.n} x {ds.d})")
    return EXIT_OK


def _cmd_run(args):
    overrides = {
        "seeds": args.seeds, "datasets": args.datasets, "label_fractions": args.label_fractions,
        "noise_rates": args.noise_rates, "algorithms": args.algorithms, "k": args.k,
        "n": args.n, "d": args.d, "workers": args.workers, "seed_root": args.seed_root,
    }
    config = load_config(args.config, overrides)
    print(f"cells: {config.cell_count}")
    if args.dry_run:
        return EXIT_OK
    step = max(1, config.cell_count // 20)

    def progress(done):
        if done % step == 0 or done == config.cell_count:
            log.info("%d/%d cells", done, config.cell_count)

    records = run_grid(config, progress=progress)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    out = args.out_dir / "records.csv"
    write_records_csv(records, out, timing=not args.no_timing)
    failed = sum(r.failed for r in records)
    print(f"wrote {out} ({len(records)} records, {failed} failed)")
    for fmt in args.format or ():
        path = emit_report(aggregate(records), fmt, args.out_dir / f"report{SUFFIX[fmt]}")
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_report(args):
    records = read_records_csv(args.records)
    rows = aggregate(records)
    path = args.output or args.out_dir / f"report{SUFFIX[args.format]}"
    path.parent.mkdir(parents=True, exist_ok=True)
    emit_report(rows, args.format, path)
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def _cmd_verify(args):
    from ..checks import run_checks

    ok = run_checks(seed=args.seed_root)
    if args.pytest:
        import pytest

        tests = Path(__file__).resolve().parents[3] / "tests"
        if not tests.is_dir():
            print(f"test suite not found at {tests}", file=sys.stderr)
            return EXIT_FAILURE
        ok = pytest.main([str(tests), "-q"]) == 0 and ok
    return EXIT_OK if ok else EXIT_FAILURE


COMMANDS = {"generate": _cmd_generate, "run": _cmd_run, "report": _cmd_report, "verify": _cmd_verify}


def cli(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main():
    sys.exit(cli())
