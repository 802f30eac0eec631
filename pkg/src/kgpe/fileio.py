"""Binary dump formats, series files, pseudocolor PPM output, run manifests.

All binary formats are little-endian and start with an ASCII magic tag:

    KGPE/FLD1   u32 n_points, f64 x_min, f64 dx, then n_points (re, im) f64
    KGPE/WIG1   u32 nx, u32 np, f64 x_min, dx, p_min, dp, row-major f64
    KGPE/ENS1   u32 n, then n (x, p) f64 pairs

Series files are comma-separated with a '#'-prefixed header line and full
round-trip (17 significant digit) float formatting.  Pseudocolor output is
binary PPM (P6) with a diverging gray map: zero at mid-gray, the largest
positive value black, the most negative white; the zero anchor and data
range go to a sidecar text file next to the image.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .grids import ComplexField, Grid1D
from .wigner import WignerGrid

FIELD_MAGIC = b"KGPE/FLD1"
WIGNER_MAGIC = b"KGPE/WIG1"
ENSEMBLE_MAGIC = b"KGPE/ENS1"


def write_field(path, f: ComplexField):
    if f.space != "x":
        raise DomainError("only position-space fields are dumped")
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(FIELD_MAGIC)
        fh.write(struct.pack("<Idd", g.n_points, g.x_min, g.dx))
        inter = np.empty(2 * g.n_points)
        inter[0::2] = f.values.real
        inter[1::2] = f.values.imag
        fh.write(inter.astype("<f8").tobytes())


def read_field(path) -> ComplexField:
    with open(path, "rb") as fh:
        magic = fh.read(len(FIELD_MAGIC))
        if magic != FIELD_MAGIC:
            raise DomainError(f"{path}: not a KGPE field dump")
        n, x_min, dx = struct.unpack("<Idd", fh.read(20))
        data = np.frombuffer(fh.read(16 * n), dtype="<f8")
    vals = data[0::2] + 1j * data[1::2]
    return ComplexField(Grid1D(n_points=n, x_min=x_min, dx=dx), vals)


def write_wigner(path, w: WignerGrid):
    nx, npts = w.values.shape
    with open(path, "wb") as fh:
        fh.write(WIGNER_MAGIC)
        fh.write(struct.pack("<IIdddd", nx, npts, float(w.x_grid[0]), w.dx,
                             float(w.p_grid[0]), w.dp))
        fh.write(np.ascontiguousarray(w.values, dtype="<f8").tobytes())


def read_wigner(path) -> WignerGrid:
    with open(path, "rb") as fh:
        magic = fh.read(len(WIGNER_MAGIC))
        if magic != WIGNER_MAGIC:
            raise DomainError(f"{path}: not a KGPE Wigner dump")
        nx, npts, x_min, dx, p_min, dp = struct.unpack("<IIdddd", fh.read(40))
        data = np.frombuffer(fh.read(8 * nx * npts), dtype="<f8")
    return WignerGrid(x_grid=x_min + dx * np.arange(nx),
                      p_grid=p_min + dp * np.arange(npts),
                      values=data.reshape(nx, npts).copy(), dx=dx, dp=dp)


def write_ensemble(path, x: np.ndarray, p: np.ndarray):
    if x.shape != p.shape or x.ndim != 1:
        raise DomainError("ensemble dump needs equal-length 1D x and p")
    with open(path, "wb") as fh:
        fh.write(ENSEMBLE_MAGIC)
        fh.write(struct.pack("<I", x.size))
        inter = np.empty(2 * x.size)
        inter[0::2] = x
        inter[1::2] = p
        fh.write(inter.astype("<f8").tobytes())


def read_ensemble(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "rb") as fh:
        magic = fh.read(len(ENSEMBLE_MAGIC))
        if magic != ENSEMBLE_MAGIC:
            raise DomainError(f"{path}: not a KGPE ensemble dump")
        (n,) = struct.unpack("<I", fh.read(4))
        data = np.frombuffer(fh.read(16 * n), dtype="<f8")
    return data[0::2].copy(), data[1::2].copy()


def write_series(path, header, rows):
    """Comma-separated records with a '#' header; 17 significant digits."""
    header = list(header)
    with open(path, "w") as fh:
        fh.write("# " + ",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise DomainError("row arity does not match header")
            fh.write(",".join(_format_cell(c) for c in row) + "\n")


def _format_cell(c):
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    if isinstance(c, (float, np.floating)):
        return format(float(c), ".17g")
    return str(c)


def read_series(path):
    """Parse a series file back into (header, rows of floats/strings)."""
    rows = []
    header = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is None:
                    header = [c.strip() for c in line[1:].split(",")]
                continue
            cells = []
            for cell in line.split(","):
                try:
                    cells.append(float(cell))
                except ValueError:
                    cells.append(cell)
            rows.append(cells)
    return header, rows


def diverging_gray(matrix: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Map a real matrix to 8-bit gray: zero -> 128, max -> 0, min -> 255."""
    if not np.all(np.isfinite(matrix)):
        raise DomainError("matrix contains non-finite entries")
    vmax = max(float(matrix.max()), 0.0)
    vmin = min(float(matrix.min()), 0.0)
    gray = np.full(matrix.shape, 128.0)
    if vmax > 0:
        pos = matrix > 0
        gray[pos] = 128.0 * (1.0 - matrix[pos] / vmax)
    if vmin < 0:
        neg = matrix < 0
        gray[neg] = 128.0 + 127.0 * (matrix[neg] / vmin)
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8), vmin, vmax


def emit_pseudocolor(matrix: np.ndarray, path, zero_sidecar: bool = True):
    """Write a P6 PPM of a W(x,p)-style matrix (x along width, p upward).

    The sidecar '<path>.zero.txt' records the zero anchor (always 0.0 for
    this map) and the data range so plots with different backgrounds can
    be compared.
    """
    try:
        gray, vmin, vmax = diverging_gray(np.asarray(matrix, dtype=float))
        image = gray.T[::-1]  # rows = descending p, columns = x
        h, wd = image.shape
        rgb = np.repeat(image[:, :, None], 3, axis=2)
        with open(path, "wb") as fh:
            fh.write(f"P6\n{wd} {h}\n255\n".encode())
            fh.write(rgb.tobytes())
        if zero_sidecar:
            with open(str(path) + ".zero.txt", "w") as fh:
                fh.write(f"zero_level,vmin,vmax\n0.0,{vmin:.17g},{vmax:.17g}\n")
    except OSError as exc:
        raise OSError(f"writing pseudocolor image {path}: {exc}") from exc


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Reproducibility record written atomically at the end of a run."""

    config: dict
    code_version: str
    started: float = field(default_factory=time.time)
    finished: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def add_output(self, path):
        self.outputs[os.path.basename(str(path))] = sha256_file(path)

    def write(self, directory):
        self.finished = time.time()
        payload = {
            "config": self.config,
            "code_version": self.code_version,
            "started": self.started,
            "finished": self.finished,
            "diagnostics": self.diagnostics,
            "outputs": self.outputs,
        }
        final = os.path.join(directory, "manifest.json")
        tmp = final + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, final)
        return final
