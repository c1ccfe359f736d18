"""Experiment configuration: ``key = value`` files with CLI overrides."""

import hashlib
import math
import os
from dataclasses import asdict, dataclass, fields, replace

from .errors import UsageError
from .geometry import SHAPES

OUT_DIR_ENV = "DCM_OUT_DIR"


def _default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, "dcm_runs")


@dataclass(frozen=True)
class ExperimentConfig:
    shape: str = "kite"
    k: float = 2 * math.pi
    big_l: int = 256
    big_j: int = 256
    xi: float = 0.4
    delta: float = 0.0
    seed: int = 0
    r_sigma: float = 100.0
    r_b: float = 5.0
    grid_bounds: tuple = (-5.0, 5.0, -5.0, 5.0)
    grid_n: int = 200
    bie_nodes: int = 512
    eta: float | None = None
    layer: str = "combined"
    threshold: float = 0.8
    out_dir: str = ""

    def __post_init__(self):
        if not self.out_dir:
            object.__setattr__(self, "out_dir", _default_out_dir())
        self.validate()

    def validate(self):
        checks = [
            ("shape", self.shape in SHAPES, f"must be one of {sorted(SHAPES)}"),
            ("k", math.isfinite(self.k) and self.k > 0, "must be positive"),
            ("big_l", self.big_l >= 2, "must be >= 2"),
            ("big_j", self.big_j >= 2, "must be >= 2"),
            ("xi", math.isfinite(self.xi) and self.xi >= 0, "must be >= 0"),
            ("delta", math.isfinite(self.delta) and self.delta >= 0, "must be >= 0"),
            ("seed", self.seed >= 0, "must be >= 0"),
            ("r_sigma", self.r_sigma > self.r_b, "must exceed r_b"),
            ("r_b", self.r_b > 0, "must be positive"),
            ("grid_bounds", len(self.grid_bounds) == 4 and self.grid_bounds[0] < self.grid_bounds[1]
             and self.grid_bounds[2] < self.grid_bounds[3], "needs xmin < xmax and ymin < ymax"),
            ("grid_n", self.grid_n >= 2, "must be >= 2"),
            ("bie_nodes", self.bie_nodes >= 32 and self.bie_nodes % 2 == 0, "must be even and >= 32"),
            ("eta", self.eta is None or self.eta != 0, "must be nonzero"),
            ("layer", self.layer in ("combined", "double"), "must be 'combined' or 'double'"),
            ("threshold", 0 < self.threshold < 1, "must lie in (0, 1)"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise UsageError(f"config key {key!r} {msg} (got {getattr(self, key)!r})")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid_bounds"] = list(self.grid_bounds)
        return d

    def with_updates(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def parse_number(text: str) -> float:
    """Float with optional pi multiplier: ``12.56``, ``4pi``, ``4*pi``, ``pi``."""
    s = text.strip().lower().replace(" ", "")
    if s.endswith("pi"):
        head = s[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(s)


def _coerce(key: str, raw: str):
    kind = FIELD_TYPES[key]
    try:
        if key == "grid_bounds":
            vals = tuple(parse_number(v) for v in raw.replace(";", ",").split(","))
            if len(vals) != 4:
                raise ValueError("expected four numbers")
            return vals
        if key == "eta":
            return None if raw.strip().lower() in ("", "none", "auto") else parse_number(raw)
        if kind in (int, "int"):
            val = parse_number(raw)
            if val != int(val):
                raise ValueError("expected an integer")
            return int(val)
        if kind in (float, "float"):
            return parse_number(raw)
        return raw.strip()
    except ValueError as exc:
        raise UsageError(f"config key {key!r}: cannot parse {raw!r} ({exc})") from None


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def parse_overrides(pairs: dict) -> dict:
    out = {}
    for key, raw in pairs.items():
        name = normalize_key(key)
        if name not in FIELD_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        out[name] = _coerce(name, raw) if isinstance(raw, str) else raw
    return out


def parse_config(text: str = "", overrides: dict | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines ('#' starts a comment); ``overrides`` win."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        pairs[key] = value
    values = parse_overrides(pairs)
    values.update(parse_overrides(overrides or {}))
    return ExperimentConfig(**values)


def derive_seed(master: int, *labels) -> int:
    """Stable 63-bit seed from a master seed and labels (SHA-256 based)."""
    h = hashlib.sha256(repr((int(master),) + tuple(str(x) for x in labels)).encode())
    return int.from_bytes(h.digest()[:8], "little") >> 1
