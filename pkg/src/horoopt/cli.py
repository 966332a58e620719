"""Command-line entry point: ``horoopt {tyler,frechet} [options]``.

Options may also come from a flat ``key = value`` file given with
``--config``; keys are the long flag names (hyphens or underscores) and
command-line flags take precedence over the file. ``eta`` in a file is a
comma- or space-separated list.

Exit codes: 0 when every run succeeded, 1 when any run failed, 2 for an
invalid configuration.
"""

import argparse
import json
import logging
import sys

from . import _backend
from .harness import ConfigError, ExperimentConfig, run_experiment
from .spd import load_matrix

EXIT_OK, EXIT_RUN_FAILED, EXIT_BAD_CONFIG = 0, 1, 2

_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _parser():
    p = argparse.ArgumentParser(prog="horoopt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s ({_backend.NAME} kernels)")
    sub = p.add_subparsers(dest="kind", required=True, metavar="{tyler,frechet}")
    for kind, text in (("tyler", "online Tyler M-estimation on SPD(n)"),
                       ("frechet", "online Frechet mean on SPD(n)")):
        s = sub.add_parser(kind, help=text, description=text)
        s.add_argument("--config", help="flat key = value file; flags override it")
        s.add_argument("--n", type=int)
        s.add_argument("--T", type=int)
        s.add_argument("--eta", type=float, action="append",
                       help="step-size scale; repeat for a grid")
        s.add_argument("--schedule", choices=("const", "inv-sqrt", "inv-t"))
        s.add_argument("--mu", type=float, help="strong-convexity modulus for inv-t")
        s.add_argument("--seed", type=int)
        s.add_argument("--ball-center", metavar="FILE", help="matrix file for the ball center")
        s.add_argument("--ball-radius", type=float)
        s.add_argument("--tyler-mode", choices=("ball", "paper"))
        s.add_argument("--sigma", type=float, help="spread of the synthetic SPD samples")
        s.add_argument("--out", metavar="DIR")
        s.add_argument("--plot", action=argparse.BooleanOptionalAction, default=None)
        s.add_argument("--log-t", action=argparse.BooleanOptionalAction, default=None,
                       help="log-scaled t axis in the SVG")
        s.add_argument("--threads", type=int, help="parallel runs (default HOROOPT_THREADS)")
        s.add_argument("-q", "--quiet", action="store_true")
    return p


_KEYS = {"n": int, "T": int, "eta": None, "schedule": str, "mu": float, "seed": int,
         "ball_center": str, "ball_radius": float, "tyler_mode": str, "sigma": float,
         "out": str, "plot": "bool", "log_t": "bool", "threads": int}


def read_config_file(path):
    """Parse a flat ``key = value`` file into typed option values."""
    opts = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            kind = _KEYS[key]
            try:
                if key == "eta":
                    opts[key] = [float(v) for v in value.replace(",", " ").split()]
                elif kind == "bool":
                    opts[key] = _BOOL[value.lower()]
                else:
                    opts[key] = kind(value)
            except (ValueError, KeyError):
                raise ConfigError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return opts


def build_config(args):
    """Merge file and flag options into a validated :class:`ExperimentConfig`."""
    opts = read_config_file(args.config) if args.config else {}
    for key in _KEYS:
        value = getattr(args, key)
        if value is not None:
            opts[key] = value
    if "eta" in opts:
        opts["etas"] = tuple(opts.pop("eta"))
    if "ball_center" in opts:
        try:
            opts["ball_center"] = load_matrix(opts["ball_center"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read ball center: {exc}") from None
    return ExperimentConfig(kind=args.kind, **opts)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
    except (ConfigError, OSError) as exc:
        print(f"horoopt: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    records = run_experiment(cfg)
    failed = 0
    for rec in records:
        if rec.ok:
            s = rec.summary
            line = (f"eta={rec.eta:g} R_T={s['regret_T']:.6g} "
                    f"max|g|={s['max_grad_norm']:.6g} time={s['wall_time_s']:.2f}s")
        else:
            failed += 1
            line = f"eta={rec.eta:g} FAILED {rec.error}"
        if not args.quiet:
            print(line)
    if not args.quiet:
        info = records[0].summary.get("comparator", {})
        print("comparator:", json.dumps(info, sort_keys=True, default=float))
        if cfg.out:
            print(f"outputs written to {cfg.out}")
    return EXIT_RUN_FAILED if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
