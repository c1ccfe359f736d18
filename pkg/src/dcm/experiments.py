"""End-to-end runs: synthesis, noise, correlation, imaging, files and metrics."""

import csv
import io as _io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, derive_seed, parse_overrides
from .errors import UsageError
from .forward import active_scatter_matrix, assemble
from .geometry import Obstacle, make_obstacle, receiver_array, sampling_grid, source_array
from .imaging import (
    CorrelationMatrix, ImageGrid, correlation_error, cross_correlation, dcm_indicator, dcm_values,
    reference_correlation,
)
from .metrics import gap_midpoint, level_set_hits, level_set_near_curve, localization_error
from .passive import PassiveRecord, apply_noise, calibration, synth_record
from .specfun import WaveContext

log = logging.getLogger(__name__)

PRESETS = {
    "ex1-kite": dict(shape="kite"),
    "ex1-peanut": dict(shape="peanut"),
    "ex2-close": dict(shape="close-pair", k=4 * np.pi, delta=0.2),
    "ex2-multiscale": dict(shape="multiscale", k=8 * np.pi, delta=0.2),
}

SEED_POLICY = "per-run seed = sha256(master seed, parameter, value); noise seed = sha256(run seed, 'noise')"


@dataclass
class RunMetrics:
    correlation_error: float | None
    localization_error: float
    peak: float
    timings: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def deterministic_dict(self) -> dict:
        """Everything except wall-clock timings."""
        return {"correlation_error": self.correlation_error, "localization_error": self.localization_error,
                "peak": self.peak, **self.extras}


@dataclass
class RunResult:
    config: ExperimentConfig
    obstacle: Obstacle
    record: PassiveRecord
    C: CorrelationMatrix
    image: ImageGrid
    metrics: RunMetrics
    Ns: CorrelationMatrix | None = None
    image_ns: ImageGrid | None = None
    out_dir: Path | None = None


def noise_seed(cfg: ExperimentConfig) -> int:
    return derive_seed(cfg.seed, "noise")


def preset_config(name: str, overrides: dict | None = None, base: ExperimentConfig | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    values = dict(PRESETS[name])
    values.update(parse_overrides(overrides or {}))
    base = base or ExperimentConfig()
    return base.with_updates(**values)


def _shape_extras(cfg, obstacle, C, receivers, ctx, image) -> dict:
    extras = {}
    vmax = float(image.values.max())
    if cfg.shape == "close-pair":
        mid = gap_midpoint(obstacle)
        val = float(dcm_values(C, receivers, ctx, mid[None, :])[0])
        extras.update(gap_midpoint=[float(mid[0]), float(mid[1])], gap_ratio=val / vmax,
                      separated=bool(val < cfg.threshold * vmax))
    elif cfg.shape == "multiscale":
        pear, disk = obstacle.components
        extras.update(
            hits_small_disk=level_set_hits(image, cfg.threshold, (2.0, 3.0), 0.4),
            hits_pear_band=level_set_near_curve(image, cfg.threshold, Obstacle((pear,)), 0.5),
        )
    return extras


def run_pipeline(cfg: ExperimentConfig, out_dir=None, with_reference: bool = True,
                 write: bool = True) -> RunResult:
    """synth -> noise -> correlation -> indicator -> writers -> metrics."""
    timings = {}
    t0 = time.perf_counter()
    ctx = WaveContext(cfg.k)
    obstacle = make_obstacle(cfg.shape, cfg.bie_nodes)
    receivers = receiver_array(cfg.big_j, cfg.r_b)
    sources = source_array(cfg.big_l, cfg.r_sigma, cfg.xi, cfg.seed)
    grid = sampling_grid(cfg.grid_bounds, cfg.grid_n, cfg.grid_n)
    system = assemble(obstacle, ctx, eta=cfg.eta, layer=cfg.layer)
    timings["assemble"] = time.perf_counter() - t0

    t = time.perf_counter()
    record = synth_record(obstacle, ctx, sources, receivers, system=system)
    record = apply_noise(record, cfg.delta, noise_seed(cfg))
    timings["synth"] = time.perf_counter() - t

    t = time.perf_counter()
    C = cross_correlation(record, calibration(receivers, ctx))
    image = dcm_indicator(C, receivers, ctx, grid)
    timings["image"] = time.perf_counter() - t

    Ns = image_ns = None
    corr_err = None
    if with_reference:
        t = time.perf_counter()
        Ns = reference_correlation(active_scatter_matrix(obstacle, ctx, receivers, system=system), receivers, cfg.k)
        image_ns = dcm_indicator(Ns, receivers, ctx, grid)
        corr_err = correlation_error(C, Ns)
        timings["reference"] = time.perf_counter() - t

    metrics = RunMetrics(
        correlation_error=corr_err,
        localization_error=localization_error(image, obstacle, cfg.threshold),
        peak=float(image.values.max()),
        timings=timings,
        extras=_shape_extras(cfg, obstacle, C, receivers, ctx, image),
    )
    result = RunResult(cfg, obstacle, record, C, image, metrics, Ns, image_ns)
    if write:
        result.out_dir = write_run(result, out_dir)
    timings["total"] = time.perf_counter() - t0
    log.info("run %s k=%.4g L=%d J=%d done in %.2fs", cfg.shape, cfg.k, cfg.big_l, cfg.big_j, timings["total"])
    return result


def config_text(cfg: ExperimentConfig) -> str:
    lines = []
    for key, val in cfg.to_dict().items():
        if key == "out_dir":
            continue
        if isinstance(val, list):
            val = ",".join(io.fmt(v) for v in val)
        elif isinstance(val, float):
            val = io.fmt(val)
        elif val is None:
            val = "auto"
        lines.append(f"{key} = {val}\n")
    return "".join(lines)


def write_run(result: RunResult, out_dir=None) -> Path:
    cfg = result.config
    out = Path(out_dir) if out_dir is not None else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config_text(cfg))
    io.write_matrix_csv(result.record.data, out / "record_re.csv", out / "record_im.csv")
    io.write_real_csv(result.record.sources.points, out / "sources.csv")
    io.write_real_csv(result.record.receivers.points, out / "receivers.csv")
    io.write_matrix_csv(result.C.values, out / "C_re.csv", out / "C_im.csv")
    io.write_grid_csv(result.image, out / "I_dcm.csv")
    io.write_grid_pgm(result.image, out / "I_dcm.pgm")
    if result.Ns is not None:
        io.write_matrix_csv(result.Ns.values, out / "Ns_re.csv", out / "Ns_im.csv")
        io.write_grid_csv(result.image_ns, out / "I_ns.csv")
        io.write_grid_pgm(result.image_ns, out / "I_ns.pgm")
    (out / "metrics.json").write_text(json.dumps(result.metrics.deterministic_dict(), indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(json.dumps(result.metrics.timings, indent=2, sort_keys=True) + "\n")
    return out


def run_preset(name: str, overrides: dict | None = None, out_dir=None, base: ExperimentConfig | None = None,
               **kw) -> RunResult:
    cfg = preset_config(name, overrides, base)
    if out_dir is None:
        out_dir = Path(cfg.out_dir) / name
    return run_pipeline(cfg, out_dir=out_dir, **kw)


def _sweep_one(args):
    cfg, out_dir, with_reference = args
    res = run_pipeline(cfg, out_dir=out_dir, with_reference=with_reference)
    return res.metrics


def sweep(cfg: ExperimentConfig, parameter: str, values, out_dir=None, workers: int = 1,
          with_reference: bool = True) -> list[dict]:
    """One run per value with independent derived seeds; writes ``metrics.csv``."""
    key = parameter.replace("-", "_")
    if key not in cfg.to_dict() or key in ("out_dir", "seed"):
        raise UsageError(f"cannot sweep over {parameter!r}")
    root = Path(out_dir) if out_dir is not None else Path(cfg.out_dir) / f"sweep-{key}"
    jobs = []
    for v in values:
        val = parse_overrides({key: v})[key] if isinstance(v, str) else v
        run_cfg = cfg.with_updates(**{key: val, "seed": derive_seed(cfg.seed, key, val)})
        jobs.append((run_cfg, root / f"{key}={val:g}" if isinstance(val, float) else root / f"{key}={val}",
                     with_reference))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            metrics = list(ex.map(_sweep_one, jobs))
    else:
        metrics = [_sweep_one(j) for j in jobs]
    rows = []
    for (run_cfg, _, _), m in zip(jobs, metrics):
        rows.append({"parameter": key, "value": getattr(run_cfg, key), "seed": run_cfg.seed,
                     "correlation_error": m.correlation_error, "localization_error": m.localization_error,
                     "peak": m.peak})
    buf = _io.StringIO()
    buf.write(f"# sweep over {key}; master seed {cfg.seed}\n# seed policy: {SEED_POLICY}\n")
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: io.fmt(v) if isinstance(v, float) else v for k, v in r.items()})
    root.mkdir(parents=True, exist_ok=True)
    (root / "metrics.csv").write_text(buf.getvalue())
    return rows
