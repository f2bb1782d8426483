"""Uniform Cartesian grid, wavefunction container, and checkpoint files.

Grid nodes are offset half a cell from the center, so no node coincides
with the nucleus: the soft-core Coulomb value stays bounded at the
default regularization and the node set is symmetric under reflection
through the center.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["GridSpec", "Wavefunction", "write_checkpoint", "read_checkpoint"]

_MAGIC = b"OAMIONWF"
_VERSION = 1
_HEADER = struct.Struct("<8sI3I d 3d d Q")  # magic, version, n, h, center, t, step


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid: ``n`` points per axis at spacing ``h`` (au)."""

    n: tuple[int, int, int]
    h: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.n) != 3:
            raise ValueError("n must have three components")
        if any(c < 8 or c % 2 for c in self.n):
            raise ValueError("grid sizes must be even and >= 8")
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "n", tuple(int(c) for c in self.n))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @classmethod
    def cube(cls, n: int, h: float) -> "GridSpec":
        return cls((n, n, n), h)

    def axis(self, i: int) -> np.ndarray:
        """Node coordinates along axis i (half-cell offset from center)."""
        ni = self.n[i]
        return (np.arange(ni) - ni / 2 + 0.5) * self.h + self.center[i]

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.axis(0), self.axis(1), self.axis(2)

    def k_axis(self, i: int) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n[i], d=self.h)

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def box_lengths(self) -> tuple[float, float, float]:
        return tuple(ni * self.h for ni in self.n)

    def radius_sq(self) -> np.ndarray:
        """|r - center|^2 on the full grid."""
        x, y, z = self.axes()
        cx, cy, cz = self.center
        return (
            ((x - cx) ** 2)[:, None, None]
            + ((y - cy) ** 2)[None, :, None]
            + ((z - cz) ** 2)[None, None, :]
        )


@dataclass
class Wavefunction:
    """Complex amplitude field on a grid; ``energy`` set for relaxed states."""

    values: np.ndarray
    grid: GridSpec
    energy: float | None = None

    def __post_init__(self):
        if tuple(self.values.shape) != self.grid.n:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.n}"
            )

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2).real * self.grid.cell_volume)

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def normalize(self) -> "Wavefunction":
        self.values /= self.norm()
        return self

    def inner(self, other: "Wavefunction") -> complex:
        """<self | other> with the grid measure."""
        if self.grid != other.grid:
            raise ValueError("wavefunctions live on different grids")
        return complex(
            np.sum(np.conj(self.values) * other.values) * self.grid.cell_volume
        )

    def copy(self, dtype=None) -> "Wavefunction":
        vals = self.values.astype(dtype) if dtype is not None else self.values.copy()
        return Wavefunction(vals, self.grid, self.energy)


def write_checkpoint(path, wf: Wavefunction, t: float, step: int) -> None:
    """Binary state file: fixed little-endian header + raw complex128 array."""
    path = Path(path)
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        *wf.grid.n,
        wf.grid.h,
        *wf.grid.center,
        float(t),
        int(step),
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(wf.values, dtype="<c16").tobytes())


def read_checkpoint(path) -> tuple[Wavefunction, float, int]:
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError(f"{path}: truncated checkpoint header")
        magic, version, nx, ny, nz, h, cx, cy, cz, t, step = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint file (bad magic)")
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        grid = GridSpec((nx, ny, nz), h, (cx, cy, cz))
        count = nx * ny * nz
        data = np.frombuffer(f.read(16 * count), dtype="<c16")
        if data.size != count:
            raise ValueError(f"{path}: truncated checkpoint payload")
    wf = Wavefunction(data.reshape((nx, ny, nz)).copy(), grid)
    return wf, t, step
