"""Periodic grids, immutable complex fields, and spectral bookkeeping.

The physical domain is the periodic box [-L/2, L/2)^dim sampled on a
uniform grid with a power-of-two point count per axis, so every spectral
operation reduces to an FFT with frequencies 2*pi/L times the standard
DFT integer layout.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "GridSpec",
    "Field",
    "make_grid",
    "gradient",
    "boundary_mass_fraction",
    "spectral_tail_fraction",
    "write_snapshot",
    "read_snapshot",
]

# little-endian: format version, dim, points (int64) then box_length (float64)
_HEADER = struct.Struct("<qqqd")
_FORMAT_VERSION = 1


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L/2, L/2)^dim.

    Derived arrays (coordinates, frequencies, multipliers) are cached on
    first use; they are not dataclass fields, so equality and hashing see
    only (dim, points, box_length).
    """

    dim: int
    points: int
    box_length: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not isinstance(self.points, (int, np.integer)) or isinstance(self.points, bool):
            raise ValueError(f"points must be an integer, got {self.points!r}")
        if self.points < 8 or not _is_power_of_two(int(self.points)):
            raise ValueError(f"points must be a power of two >= 8, got {self.points}")
        if not (isinstance(self.box_length, (int, float, np.floating)) and np.isfinite(self.box_length) and self.box_length > 0):
            raise ValueError(f"box_length must be positive and finite, got {self.box_length!r}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "box_length", float(self.box_length))

    # -- scalar geometry ---------------------------------------------------

    @property
    def dx(self) -> float:
        return self.box_length / self.points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def num_cells(self) -> int:
        return self.points**self.dim

    # -- cached arrays -----------------------------------------------------

    def _cached(self, name: str, build: Callable[[], np.ndarray]) -> np.ndarray:
        try:
            return self.__dict__[name]
        except KeyError:
            arr = build()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
            return arr

    def axis_coords(self) -> np.ndarray:
        """Sample points of one axis: -L/2 + j*dx for j = 0..N-1."""
        return self._cached(
            "_axis_coords",
            lambda: -0.5 * self.box_length + self.dx * np.arange(self.points),
        )

    def axis_freqs(self) -> np.ndarray:
        """One axis of frequencies, standard DFT layout scaled by 2*pi/L."""
        return self._cached(
            "_axis_freqs",
            lambda: 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx),
        )

    def _broadcast(self, axis_values: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.dim
        shape[axis] = self.points
        return axis_values.reshape(shape)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        x = self.axis_coords()
        return tuple(self._broadcast(x, a) for a in range(self.dim))

    def freqs(self) -> tuple[np.ndarray, ...]:
        """Broadcastable frequency arrays, one per axis."""
        k = self.axis_freqs()
        return tuple(self._broadcast(k, a) for a in range(self.dim))

    def k_squared(self) -> np.ndarray:
        """|k|^2 on the full grid (Laplacian symbol up to sign)."""

        def build() -> np.ndarray:
            out = np.zeros(self.shape)
            for k in self.freqs():
                out = out + k**2
            return out

        return self._cached("_k_squared", build)

    def radius_squared(self) -> np.ndarray:
        """|x|^2 on the full grid."""

        def build() -> np.ndarray:
            out = np.zeros(self.shape)
            for x in self.coords():
                out = out + x**2
            return out

        return self._cached("_radius_squared", build)


def make_grid(dim: int, points: int, box_length: float) -> GridSpec:
    """Validated GridSpec constructor."""
    return GridSpec(dim, points, box_length)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex128 samples on a grid; the sample array is immutable.

    Construction copies and freezes the input and rejects non-finite
    entries, so any NaN produced by an evolution is caught at the first
    wrap into a Field.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[..., np.ndarray]) -> "Field":
        """Sample fn(x1, ..., xdim) on the grid."""
        vals = np.broadcast_to(np.asarray(fn(*grid.coords()), dtype=np.complex128), grid.shape)
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def spectrum(self) -> np.ndarray:
        """Unnormalized forward DFT of the samples."""
        return np.fft.fftn(self.values)

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def _check_same_grid(self, other: "Field") -> None:
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")


def gradient(field: Field) -> tuple[Field, ...]:
    """Spectral gradient, one component field per axis."""
    hat = field.spectrum()
    comps = []
    for k in field.grid.freqs():
        comps.append(Field(field.grid, np.fft.ifftn(1j * k * hat)))
    return tuple(comps)


def boundary_mass_fraction(field: Field) -> float:
    """Fraction of the L2 mass outside the centered half-box.

    The half-box is [-L/4, L/4]^dim; a field that genuinely lives inside
    the computational box keeps this far below any truncation tolerance,
    while wrap-around or non-decaying data pushes it toward order one.
    """
    density = field.values.real**2 + field.values.imag**2
    total = float(density.sum())
    if total == 0.0:
        return 0.0
    quarter = field.grid.box_length / 4.0
    inside = np.ones(field.grid.shape, dtype=bool)
    for x in field.grid.coords():
        inside = inside & (np.abs(x) <= quarter)
    return float(density[~inside].sum() / total)


def spectral_tail_fraction(field: Field) -> float:
    """Fraction of spectral energy carried by the outer third of frequencies.

    Flags under-resolution: a well-resolved field keeps essentially no
    energy at |k| above two thirds of the axis Nyquist frequency.
    """
    hat = field.spectrum()
    energy = hat.real**2 + hat.imag**2
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    cutoff = (2.0 / 3.0) * np.pi / field.grid.dx
    outer = np.zeros(field.grid.shape, dtype=bool)
    for k in field.grid.freqs():
        outer = outer | (np.abs(k) > cutoff)
    return float(energy[outer].sum() / total)


def write_snapshot(field: Field, path: str | Path) -> None:
    """Write a field as (version, dim, points, box_length) header plus
    C-order interleaved (re, im) float64 pairs, all little-endian."""
    grid = field.grid
    header = _HEADER.pack(_FORMAT_VERSION, grid.dim, grid.points, grid.box_length)
    payload = np.ascontiguousarray(field.values).astype("<c16").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path: str | Path) -> Field:
    """Inverse of write_snapshot; round-trips bit-exactly."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"snapshot too short for header: {len(raw)} bytes")
    version, dim, points, box_length = _HEADER.unpack_from(raw)
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported snapshot format version {version}")
    grid = GridSpec(int(dim), int(points), float(box_length))
    expected = _HEADER.size + 16 * grid.num_cells
    if len(raw) != expected:
        raise ValueError(f"snapshot size mismatch: expected {expected} bytes, got {len(raw)}")
    values = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(grid.shape)
    return Field(grid, values)
