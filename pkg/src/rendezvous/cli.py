"""Command-line front end: ``rendezvous <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 check failure, 3 I/O error.
"""

import argparse
import dataclasses
import logging
import sys
from typing import Dict, List, Optional

import numpy as np

from rendezvous import analytic
from rendezvous.errors import InvalidInput, RendezvousError
from rendezvous.harness import (
    AXES,
    ExperimentConfig,
    apply_axis,
    check_rows,
    draw_sets,
    estimate_ettr,
    estimate_mttr,
    make_row,
    sweep,
    trial_rng,
    write_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3

# CLI dest -> ExperimentConfig field
_FIELD_FOR = {
    "algorithm": "algorithm", "strategy": "strategy", "setting": "setting",
    "scenario": "scenario", "trials": "trials", "max_slots": "max_slots",
    "seed": "master_seed", "t0": "T0", "p0": "p0", "prime": "P", "generator": "g",
    "fallback": "fallback", "workers": "workers", "batch": "batch",
    "channels": "N", "n": "n", "n1": "n1", "n2": "n2", "n12": "n12",
    "n_core": "n_core", "n_exclusive": "n_exclusive", "users": "K",
    "num_pus": "num_pus", "area_side": "area_side",
    "interference_range": "interference_range", "core_size": "core_size",
    "offset_range": "offset_range",
}
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--check", action="store_true",
                   help="fail (exit 2) when Monte Carlo disagrees with an oracle")
    g = p.add_argument_group("experiment")
    g.add_argument("--algorithm", choices=("random", "pi-random", "modulo", "lsh2", "rotation"))
    g.add_argument("--strategy", choices=("generic", "stick", "spreadout3", "hybrid"))
    g.add_argument("--setting", choices=("sync", "async"))
    g.add_argument("--scenario", choices=("two", "three", "cr"))
    g.add_argument("--trials", type=int)
    g.add_argument("--max-slots", type=int)
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--t0", type=int)
    g.add_argument("--p0", type=float)
    g.add_argument("--prime", type=int)
    g.add_argument("--generator", type=int)
    g.add_argument("--fallback", choices=("random", "current"))
    g.add_argument("--workers", type=int)
    g.add_argument("--batch", type=int, help="MTTR batch size")
    s = p.add_argument_group("scenario")
    s.add_argument("--channels", type=int, help="total channels N")
    s.add_argument("--n", type=int, help="set size for symmetric scenarios")
    s.add_argument("--n1", type=int)
    s.add_argument("--n2", type=int)
    s.add_argument("--n12", type=int)
    s.add_argument("--n-core", type=int)
    s.add_argument("--n-exclusive", type=int)
    s.add_argument("--users", type=int, help="number of SUs (cr scenario)")
    s.add_argument("--num-pus", type=int)
    s.add_argument("--area-side", type=float)
    s.add_argument("--interference-range", type=float)
    s.add_argument("--core-size", type=int)
    s.add_argument("--offset-range", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rendezvous", description="Channel hopping rendezvous experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("ettr", "Monte Carlo ETTR estimate"),
                        ("mttr", "Monte Carlo MTTR estimate (batch maxima)"),
                        ("analytic", "closed-form values only"),
                        ("scenario", "print one generated scenario")):
        _add_common(sub.add_parser(name, help=help_))
    for name, help_ in (("sweep", "one estimate per axis value"),
                        ("check", "sweep with oracle checks enforced")):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.add_argument("--axis", required=True, choices=AXES)
        p.add_argument("--values", required=True, help="comma-separated axis values")
    return parser


def _coerce(name: str, raw: str):
    if name in ("n1", "n2", "P", "g", "offset_range") and raw.strip().lower() in ("", "none"):
        return None
    kind = type(_FIELDS[name].default)
    if name in ("n1", "n2", "P", "g", "offset_range"):
        kind = int
    try:
        return kind(raw) if kind is not str else raw.strip()
    except ValueError:
        raise UsageError(f"bad value {raw!r} for {name}") from None


def read_config_file(path: str) -> Dict:
    """Flat ``key = value`` lines; keys are flag names (dashes or
    underscores) or config field names.  ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, raw = (x.strip() for x in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            name = _FIELD_FOR.get(key, key if key in _FIELDS else None)
            if name is None:
                if key in ("axis", "values"):
                    values[key] = raw
                    continue
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[name] = _coerce(name, raw)
    return values


def config_from_args(args) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for dest, name in _FIELD_FOR.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[name] = v
    values.pop("axis", None)
    values.pop("values", None)
    return ExperimentConfig(**values)


def _axis_values(raw: str, axis: str) -> List:
    parts = [p for p in raw.split(",") if p.strip()]
    if not parts:
        raise UsageError("--values is empty")
    try:
        return [float(p) if axis == "J" else int(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --values {raw!r}") from None


def _emit(rows, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)


def _scenario(cfg: ExperimentConfig, out: Optional[str]) -> None:
    sets = draw_sets(cfg, trial_rng(cfg.master_seed, 0))
    lines = [" ".join(str(c) for c in s) for s in sets]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "scenario":
            _scenario(cfg, args.out)
            return EXIT_OK
        if args.command in ("sweep", "check"):
            axis = args.axis
            rows = sweep(cfg, axis, _axis_values(args.values, axis))
        elif args.command == "analytic":
            rows = [make_row(cfg, None)]
        elif args.command == "mttr":
            rows = [make_row(cfg, estimate_mttr(cfg))]
        else:
            rows = [make_row(cfg, estimate_ettr(cfg))]
        _emit(rows, args.out)
        if args.check or args.command == "check":
            problems = check_rows(rows)
            for p in problems:
                print(f"check failed: {p}", file=sys.stderr)
            if problems:
                return EXIT_CHECK
        return EXIT_OK
    except (UsageError, InvalidInput) as e:
        print(f"rendezvous: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"rendezvous: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except RendezvousError as e:
        print(f"rendezvous: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
