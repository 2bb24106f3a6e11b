"""Command line entry point: ``spectral-clt <subcommand> --config PATH``.

Exit status is 0 when every verdict passes, 1 when at least one fails and 2
for configuration or usage errors.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import acceptance
from .config import apply_overrides, config_from_dict, decode_json, parse_process
from .exceptions import ConfigurationError
from .experiments import default_workers, run_experiment
from .rng import derive_seed
from .simulate import generate
from .spectral import spectral_model

EXPERIMENT_COMMANDS = {
    "clt": "fixed_freq_clt",
    "cross": "cross_freq",
    "annealed": "annealed",
    "periodogram": "periodogram_chi2",
    "invariance": "invariance_identity",
    "variance": "variance_convergence",
    "diag": "regularity_diag",
}
GENERATE_KEYS = {"process", "n", "master_seed", "replicate"}
SPECTRUM_KEYS = {"process", "grid", "master_seed"}
SUITE_KEYS = {"seeds", "min_passes"}

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="spectral-clt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    names = ["generate", "spectrum", *EXPERIMENT_COMMANDS, "suite"]
    for name in names:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "suite", help="JSON config file")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--override", action="append", default=[], metavar="K=V",
                       help="set a config field, dotted keys allowed (repeatable)")
        p.add_argument("--workers", type=int, help="parallel workers (env SPECTRAL_CLT_WORKERS)")
        p.add_argument("--seed", type=int, help="override master_seed")
    return parser


def _load(args):
    if args.config is None:
        obj = {}
    else:
        try:
            with open(args.config, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc.strerror}") from None
        obj = decode_json(raw)
    obj = apply_overrides(obj, args.override)
    if args.seed is not None:
        obj["master_seed"] = args.seed
    return obj


def _reject_unknown(obj, allowed):
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in config: {', '.join(unknown)}")


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(obj, args):
    _reject_unknown(obj, GENERATE_KEYS)
    if "process" not in obj:
        raise ConfigurationError("config is missing required key 'process'")
    spec = parse_process(obj["process"])
    seed = derive_seed(int(obj.get("master_seed", 1)), int(obj.get("replicate", 0)))
    path = generate(spec, int(obj.get("n", 4096)), seed)
    _emit(path.to_csv(), args.out)
    print(f"generated {len(path)} values (seed {seed})", file=sys.stderr)
    return EXIT_OK


def _cmd_spectrum(obj, args):
    _reject_unknown(obj, SPECTRUM_KEYS)
    if "process" not in obj:
        raise ConfigurationError("config is missing required key 'process'")
    model = spectral_model(parse_process(obj["process"]))
    if model is None:
        raise ConfigurationError("process has no closed-form spectral density")
    grid = int(obj.get("grid", 512))
    if grid < 1:
        raise ConfigurationError("grid must be positive")
    thetas = 2.0 * np.pi * np.arange(grid) / grid
    g = np.atleast_1d(model.g(thetas))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "g"])
    for t, v in zip(thetas.tolist(), g.tolist()):
        w.writerow([repr(t), repr(v)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_experiment(obj, args, workers):
    cfg = config_from_dict(obj, kind=EXPERIMENT_COMMANDS[args.command])
    report = run_experiment(cfg, workers=workers)
    _emit(report.to_json(), args.out)
    for name, v in report.verdicts.items():
        print(f"{'PASS' if v['passed'] else 'FAIL'} {name}: "
              f"{report.statistics[v['statistic']]:.6g} {v['op']} {v['threshold']:.6g}",
              file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_suite(obj, args, workers):
    obj = {k: v for k, v in obj.items() if k != "master_seed"}
    _reject_unknown(obj, SUITE_KEYS)
    seeds = tuple(int(s) for s in obj.get("seeds", acceptance.SEED_PANEL))
    if args.seed is not None:
        seeds = tuple(args.seed + k for k in range(len(seeds)))
    if not seeds:
        raise ConfigurationError("seeds must be a non-empty list")
    result = acceptance.run_suite(seeds, int(obj.get("min_passes", acceptance.MIN_PASSES)),
                                  workers=workers, log=lambda s: print(s, file=sys.stderr))
    _emit(json.dumps(result, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK if result["passed"] else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    workers = args.workers if args.workers is not None else default_workers()
    try:
        if workers < 1:
            raise ConfigurationError("--workers must be at least 1")
        obj = _load(args)
        if args.command == "generate":
            return _cmd_generate(obj, args)
        if args.command == "spectrum":
            return _cmd_spectrum(obj, args)
        if args.command == "suite":
            return _cmd_suite(obj, args, workers)
        return _cmd_experiment(obj, args, workers)
    except ConfigurationError as exc:
        print(f"spectral-clt: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
