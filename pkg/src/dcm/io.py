"""Plain-text and PGM writers with a bit-exact format.

Grid CSV: header line ``nx,ny,xmin,xmax,ymin,ymax`` (the values), then ny rows
of nx values from y_max downward. Every number uses 17 significant digits;
lines end with LF. Complex matrices are written as two such files (real and
imaginary parts) without a header.
"""

from pathlib import Path

import numpy as np

from .geometry import SamplingGrid
from .imaging import ImageGrid


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write(path, text: str | bytes):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(text, bytes):
            path.write_bytes(text)
        else:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _rows(values: np.ndarray) -> str:
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in np.atleast_2d(values))


def write_grid_csv(image: ImageGrid, path):
    g = image.grid
    head = ",".join([str(g.nx), str(g.ny)] + [fmt(b) for b in g.bounds]) + "\n"
    _write(path, head + _rows(image.values))


def read_grid_csv(path, kind: str = "dcm") -> ImageGrid:
    lines = _read(path).splitlines()
    head = lines[0].split(",")
    nx, ny = int(head[0]), int(head[1])
    grid = SamplingGrid(tuple(float(v) for v in head[2:6]), nx, ny)
    values = np.array([[float(v) for v in line.split(",")] for line in lines[1:1 + ny]])
    return ImageGrid(grid, values, kind)


def pgm_bytes(values: np.ndarray) -> bytes:
    """8-bit grey levels round(255 (v - min)/(max - min)), halves rounded up."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        levels = np.floor(255.0 * (v - lo) / (hi - lo) + 0.5)
    else:
        levels = np.zeros(v.shape)
    h, w = v.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.clip(levels, 0, 255).astype(np.uint8).tobytes()


def write_grid_pgm(image: ImageGrid, path):
    _write(path, pgm_bytes(image.values))


def read_grid_pgm(path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    magic, dims, maxval, payload = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    w, h = map(int, dims.split())
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)


def write_real_csv(values, path):
    _write(path, _rows(np.asarray(values, dtype=float)))


def read_real_csv(path) -> np.ndarray:
    return np.array([[float(v) for v in line.split(",")] for line in _read(path).splitlines() if line])


def write_matrix_csv(matrix, path_re, path_im):
    m = np.asarray(matrix)
    write_real_csv(m.real, path_re)
    write_real_csv(m.imag, path_im)


def read_matrix_csv(path_re, path_im) -> np.ndarray:
    return read_real_csv(path_re) + 1j * read_real_csv(path_im)
