"""Uniform periodic grids on the circle R/2piZ and the Fourier operators on them.

All spectral work uses the real FFT; wavenumbers are integers because the
domain length is 2*pi.
"""
from __future__ import annotations

import functools
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "derivative",
    "convolve",
    "mollify",
    "mollifier_table",
    "integrate",
    "parseval_check",
    "write_fields",
    "read_fields",
    "FIELD_MAGIC",
]

FIELD_MAGIC = b"SCHF"
_HEADER = struct.Struct("<4sII4x")


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` nodes x_j = j*h on [0, 2*pi)."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"n must be an integer, got {self.n!r}")
        if self.n % 2:
            raise ValueError(f"n must be even, got {self.n}")
        if self.n < 8:
            raise ValueError(f"n must be >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def nodes(self) -> np.ndarray:
        return _nodes(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Non-negative integer wavenumbers of the rfft layout, 0..n/2."""
        return _wavenumbers(self.n)

    @property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keeps modes with 3|k| < n."""
        return _dealias_mask(self.n)

    # array-level helpers used by the integrator; the Field-level API wraps these
    def rfft(self, f):
        return np.fft.rfft(f)

    def irfft(self, fh):
        return np.fft.irfft(fh, self.n)

    def diff(self, f: np.ndarray, order: int = 1) -> np.ndarray:
        return np.fft.irfft(_diff_symbol(self.n, order) * np.fft.rfft(f), self.n)

    def integrate(self, f: np.ndarray) -> float:
        return float(self.h * np.sum(f))

    def product(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Pointwise product computed on a 3/2-padded grid, then truncated.

        Exact (no aliasing) for band-limited inputs.
        """
        n = self.n
        m = 3 * n // 2
        fh = np.fft.rfft(f)
        gh = np.fft.rfft(g)
        fp = np.zeros(m // 2 + 1, dtype=complex)
        gp = np.zeros(m // 2 + 1, dtype=complex)
        fp[: n // 2] = fh[: n // 2]
        gp[: n // 2] = gh[: n // 2]
        # Nyquist mode of a real signal is split evenly between +-n/2
        fp[n // 2] = 0.5 * fh[n // 2]
        gp[n // 2] = 0.5 * gh[n // 2]
        prod = np.fft.irfft(fp, m) * np.fft.irfft(gp, m) * (m / n)
        ph = np.fft.rfft(prod)[: n // 2 + 1]
        ph[n // 2] = 2.0 * ph[n // 2].real
        return np.fft.irfft(ph, n)

    def check_same(self, other: "Grid") -> None:
        if self.n != other.n:
            raise ValueError(f"grid mismatch: n={self.n} vs n={other.n}")


@functools.lru_cache(maxsize=64)
def _nodes(n: int) -> np.ndarray:
    x = np.arange(n) * (2.0 * np.pi / n)
    x.setflags(write=False)
    return x


@functools.lru_cache(maxsize=64)
def _wavenumbers(n: int) -> np.ndarray:
    k = np.arange(n // 2 + 1, dtype=float)
    k.setflags(write=False)
    return k


@functools.lru_cache(maxsize=64)
def _dealias_mask(n: int) -> np.ndarray:
    k = _wavenumbers(n)
    mask = (3 * k < n).astype(float)
    mask.setflags(write=False)
    return mask


@functools.lru_cache(maxsize=256)
def _diff_symbol(n: int, order: int) -> np.ndarray:
    k = _wavenumbers(n)
    sym = (1j * k) ** order
    if order % 2 == 1:
        # the Nyquist mode has no odd-derivative partner in a real signal
        sym[-1] = 0.0
    sym.setflags(write=False)
    return sym


@dataclass(frozen=True, eq=False)
class Field:
    """A real function sampled on a :class:`Grid`.

    ``values`` is copied to a read-only float64 array on construction.
    Non-finite samples are rejected, since they signal a solver failure.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise FloatingPointError("field contains NaN or Inf")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, fn(grid.nodes))

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.grid.n

    def integral(self) -> float:
        return self.grid.integrate(self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def make_grid(n: int) -> Grid:
    """Build a uniform periodic grid with ``n`` nodes (even, at least 8)."""
    return Grid(n)


def derivative(f: Field, order: int = 1) -> Field:
    """Fourier-spectral derivative of order 1 or 2."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return Field(f.grid, f.grid.diff(f.values, order))


def convolve(f: Field, g: Field) -> Field:
    """Periodic convolution (f*g)(x_j) = h * sum_k f(x_k) g(x_j - x_k)."""
    f.grid.check_same(g.grid)
    grid = f.grid
    out = grid.h * np.fft.irfft(np.fft.rfft(f.values) * np.fft.rfft(g.values), grid.n)
    return Field(grid, out)


def _bump(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


@functools.lru_cache(maxsize=128)
def mollifier_table(n: int, delta: float) -> np.ndarray:
    """Periodised Friedrichs mollifier J_delta sampled on the n-point grid.

    Normalised so that h * sum(J) == 1 on the grid, hence convolution with it
    preserves means to round-off.
    """
    h = 2.0 * np.pi / n
    if delta < 2.0 * h:
        raise ValueError(f"mollifier under-resolved: delta={delta} < 2h={2.0 * h}")
    if delta >= np.pi:
        raise ValueError(f"delta must be < pi for the periodised bump, got {delta}")
    x = _nodes(n)
    wrapped = np.where(x > np.pi, x - 2.0 * np.pi, x)
    j = _bump(wrapped / delta)
    j /= h * j.sum()
    j.setflags(write=False)
    return j


def mollify(f: Field, delta: float) -> Field:
    """Convolve ``f`` with the periodised bump mollifier of radius ``delta``."""
    grid = f.grid
    j = mollifier_table(grid.n, float(delta))
    return Field(grid, grid.h * np.fft.irfft(np.fft.rfft(f.values) * np.fft.rfft(j), grid.n))


def integrate(f: Field) -> float:
    """Rectangle (= trapezoidal, periodic) rule."""
    return f.integral()


def parseval_check(f: Field) -> tuple[float, float]:
    """Return (physical, spectral) values of the squared L2 norm."""
    grid = f.grid
    phys = grid.h * float(np.sum(f.values**2))
    fh = np.fft.rfft(f.values)
    w = np.full(fh.shape, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    energy = 2.0 * np.pi / grid.n**2 * float(np.sum(w * np.abs(fh) ** 2))
    return phys, energy


def write_fields(path, fields, append: bool = False) -> None:
    """Write one or more arrays as consecutive binary Field records.

    Each record is a 16-byte header (magic ``SCHF``, u32 LE length, u32
    reserved = 0, four zero pad bytes) followed by the little-endian float64 samples.
    """
    mode = "ab" if append else "wb"
    with open(path, mode) as fh:
        for f in fields:
            arr = np.ascontiguousarray(np.asarray(f, dtype="<f8"))
            if arr.ndim != 1:
                raise ValueError("field records must be one-dimensional")
            fh.write(_HEADER.pack(FIELD_MAGIC, arr.size, 0))
            fh.write(arr.tobytes())


def read_fields(path) -> list[np.ndarray]:
    """Read every Field record from ``path``."""
    data = Path(path).read_bytes()
    out = []
    pos = 0
    while pos < len(data):
        if len(data) - pos < _HEADER.size:
            raise ValueError(f"truncated header at byte {pos}")
        magic, n, _ = _HEADER.unpack_from(data, pos)
        if magic != FIELD_MAGIC:
            raise ValueError(f"bad magic {magic!r} at byte {pos}")
        pos += _HEADER.size
        end = pos + 8 * n
        if end > len(data):
            raise ValueError(f"truncated record at byte {pos}")
        out.append(np.frombuffer(data[pos:end], dtype="<f8").astype(np.float64))
        pos = end
    return out
