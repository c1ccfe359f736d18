"""Command line entry point.

    dcm synth      --shape kite --k 4pi --out-dir runs/a
    dcm image      runs/a
    dcm verify
    dcm experiment ex1-kite --k 4pi
    dcm sweep      --param big_l --values 64,128,256

Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
numerical step fails.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, parse_config
from .errors import AccuracyError, DCMError, NumericalFailure, UsageError
from .experiments import PRESETS, config_text, noise_seed, run_pipeline, run_preset, sweep
from .forward import assemble
from .geometry import make_obstacle, receiver_array, sampling_grid, source_array
from .imaging import cross_correlation, dcm_indicator
from .passive import PassiveRecord, apply_noise, calibration, synth_record
from .specfun import WaveContext

log = logging.getLogger("dcm")

# flag name -> config key
CONFIG_FLAGS = {
    "shape": "shape", "k": "k", "big-l": "big_l", "big-j": "big_j", "xi": "xi", "delta": "delta",
    "seed": "seed", "grid-n": "grid_n", "r-b": "r_b", "r-sigma": "r_sigma", "bie-nodes": "bie_nodes",
    "eta": "eta", "out-dir": "out_dir",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key = value file; flags override its entries")
    for flag, key in CONFIG_FLAGS.items():
        p.add_argument(f"--{flag}", dest=key, default=None, metavar=key.upper())
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="any other config key, e.g. --set layer=double")


def _load_config(args) -> ExperimentConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
    overrides = {key: getattr(args, key) for key in CONFIG_FLAGS.values() if getattr(args, key) is not None}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        overrides[key] = val
    return parse_config(text, overrides)


def _cmd_synth(args) -> int:
    cfg = _load_config(args)
    ctx = WaveContext(cfg.k)
    rx = receiver_array(cfg.big_j, cfg.r_b)
    src = source_array(cfg.big_l, cfg.r_sigma, cfg.xi, cfg.seed)
    obstacle = make_obstacle(cfg.shape, cfg.bie_nodes)
    rec = synth_record(obstacle, ctx, src, rx, system=assemble(obstacle, ctx, eta=cfg.eta, layer=cfg.layer))
    rec = apply_noise(rec, cfg.delta, noise_seed(cfg))
    out = Path(cfg.out_dir)
    io.write_matrix_csv(rec.data, out / "record_re.csv", out / "record_im.csv")
    (out / "config.txt").write_text(config_text(cfg))
    print(f"wrote {rec.shape[0]}x{rec.shape[1]} record to {out}")
    return 0


def _cmd_image(args) -> int:
    run_dir = Path(args.run_dir)
    try:
        text = (run_dir / "config.txt").read_text()
    except OSError as exc:
        raise UsageError(f"{run_dir} has no readable config.txt ({exc.strerror})") from None
    cfg = parse_config(text)
    ctx = WaveContext(cfg.k)
    rx = receiver_array(cfg.big_j, cfg.r_b)
    src = source_array(cfg.big_l, cfg.r_sigma, cfg.xi, cfg.seed)
    data = io.read_matrix_csv(run_dir / "record_re.csv", run_dir / "record_im.csv")
    rec = PassiveRecord(data, rx, src, cfg.k, cfg.delta)
    C = cross_correlation(rec, calibration(rx, ctx))
    image = dcm_indicator(C, rx, ctx, sampling_grid(cfg.grid_bounds, cfg.grid_n, cfg.grid_n))
    io.write_matrix_csv(C.values, run_dir / "C_re.csv", run_dir / "C_im.csv")
    io.write_grid_csv(image, run_dir / "I_dcm.csv")
    io.write_grid_pgm(image, run_dir / "I_dcm.pgm")
    i, j = np.unravel_index(np.argmax(image.values), image.grid.shape)
    print(f"peak {image.values.max():.6g} at ({image.grid.xs[j]:.3f}, {image.grid.ys[i]:.3f})")
    return 0


def _cmd_verify(args) -> int:
    from . import verify

    checks = verify.run_all()
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok]
    if failed:
        raise AccuracyError(f"{len(failed)} verification check(s) failed")
    return 0


def _print_metrics(m):
    for key, val in sorted(m.deterministic_dict().items()):
        print(f"{key:>20s}: {val}")


def _cmd_experiment(args) -> int:
    base = _load_config(args)
    explicit = {key: getattr(args, key) for key in CONFIG_FLAGS.values() if getattr(args, key) is not None}
    out_dir = Path(base.out_dir) / args.preset
    res = run_preset(args.preset, explicit, out_dir=out_dir, base=base)
    _print_metrics(res.metrics)
    print(f"outputs in {res.out_dir}")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    res = run_pipeline(cfg, out_dir=cfg.out_dir)
    _print_metrics(res.metrics)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    values = [v for v in args.values.split(",") if v.strip()]
    if not values:
        raise UsageError("--values needs at least one entry")
    rows = sweep(cfg, args.param, values, out_dir=args.sweep_dir, workers=args.workers)
    for r in rows:
        print(f"{r['parameter']}={r['value']}: correlation_error={r['correlation_error']:.4g} "
              f"localization_error={r['localization_error']:.4g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dcm", description="Passive obstacle imaging from cross-correlated random-source data.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesise a (noisy) passive record")
    _add_config_flags(s)
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("image", help="correlate a stored record and compute the DCM image")
    s.add_argument("run_dir")
    s.set_defaults(func=_cmd_image)

    s = sub.add_parser("verify", help="run the oracle / invariant self-checks")
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("run", help="full pipeline for one configuration")
    _add_config_flags(s)
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("experiment", help="run a named preset")
    s.add_argument("preset", choices=sorted(PRESETS))
    _add_config_flags(s)
    s.set_defaults(func=_cmd_experiment)

    s = sub.add_parser("sweep", help="one run per parameter value")
    s.add_argument("--param", required=True, help="config key to vary, e.g. big_l, k, delta, xi")
    s.add_argument("--values", required=True, help="comma separated values; '4pi' style allowed")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--sweep-dir", default=None)
    _add_config_flags(s)
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"dcm: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, AccuracyError, DCMError, ArithmeticError) as exc:
        print(f"dcm: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"dcm: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
