"""Littlewood-Paley analysis on a periodic grid.

A :class:`GridFunction` samples a function on the torus ``[0, 2**L)`` per
axis at spacing ``2**-Kp``. Its Fourier coefficients live on the lattice
``xi = k / 2**L`` with ``f(x) = sum_k c_k exp(2 pi i k . x / 2**L)``.
Sample ``n`` sits at ``x = n * 2**-Kp`` and stands for the cell to its right,
so Riemann sums over dyadic boxes are exact for cell-aligned boxes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


def _pair(v) -> tuple[int, int]:
    if isinstance(v, (tuple, list)):
        a, b = v
        return int(a), int(b)
    return int(v), int(v)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on the periodic window.

    ``L`` and ``Kp`` may be given per axis; an int applies to both.
    """

    samples: np.ndarray
    L: tuple[int, int] = (0, 0)
    Kp: tuple[int, int] = (0, 0)

    def __post_init__(self):
        L, Kp = _pair(self.L), _pair(self.Kp)
        samples = np.array(self.samples)
        if not np.iscomplexobj(samples):
            samples = samples.astype(np.float64)
        shape = tuple(1 << (a + b) for a, b in zip(L, Kp))
        if samples.shape != shape:
            raise ValueError(f"samples must have shape {shape}, got {samples.shape}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "Kp", Kp)

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @property
    def spacing(self) -> tuple[float, float]:
        return math.ldexp(1.0, -self.Kp[0]), math.ldexp(1.0, -self.Kp[1])

    @property
    def window(self) -> tuple[float, float]:
        return math.ldexp(1.0, self.L[0]), math.ldexp(1.0, self.L[1])

    @property
    def cell_area(self) -> float:
        h1, h2 = self.spacing
        return h1 * h2

    @property
    def area(self) -> float:
        w1, w2 = self.window
        return w1 * w2

    def coords(self, axis: int) -> np.ndarray:
        return np.arange(self.shape[axis]) * self.spacing[axis]

    def frequencies(self, axis: int) -> np.ndarray:
        """Lattice frequencies ``k / 2**L`` in FFT order (Nyquist counts as negative)."""
        n = self.shape[axis]
        return np.fft.fftfreq(n, d=1.0 / n) / self.window[axis]

    def spectrum(self) -> np.ndarray:
        return np.fft.fft2(self.samples) / self.samples.size

    @classmethod
    def from_spectrum(cls, coeffs, L, Kp) -> GridFunction:
        coeffs = np.asarray(coeffs)
        return cls(np.fft.ifft2(coeffs) * coeffs.size, L, Kp)

    @classmethod
    def zeros(cls, L, Kp) -> GridFunction:
        L, Kp = _pair(L), _pair(Kp)
        return cls(np.zeros((1 << (L[0] + Kp[0]), 1 << (L[1] + Kp[1])), dtype=complex), L, Kp)

    @classmethod
    def tone(cls, k1: int, k2: int, L, Kp, amplitude: complex = 1.0) -> GridFunction:
        """``amplitude * exp(2 pi i (k1 x1 + k2 x2) / 2**L)``."""
        g = cls.zeros(L, Kp)
        x1 = g.coords(0)[:, None] / g.window[0]
        x2 = g.coords(1)[None, :] / g.window[1]
        return cls(amplitude * np.exp(2j * np.pi * (k1 * x1 + k2 * x2)), L, Kp)

    def same_grid(self, other: GridFunction) -> bool:
        return self.L == other.L and self.Kp == other.Kp

    def _check_grid(self, other):
        if not self.same_grid(other):
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        self._check_grid(other)
        return GridFunction(self.samples + other.samples, self.L, self.Kp)

    def __sub__(self, other):
        self._check_grid(other)
        return GridFunction(self.samples - other.samples, self.L, self.Kp)

    def __mul__(self, c):
        return GridFunction(self.samples * c, self.L, self.Kp)

    __rmul__ = __mul__

    def lq_norm(self, q: float = 2.0) -> float:
        if q < 1:
            raise ValueError("q must be >= 1")
        return float(np.sum(_ipow(np.abs(self.samples), q)) * self.cell_area) ** (1.0 / q)

    def l2_norm_spectral(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.spectrum()) ** 2)) * self.area)

    def inner(self, other: GridFunction) -> complex:
        """``integral f * conj(g)`` over the window."""
        self._check_grid(other)
        return complex(np.vdot(other.samples, self.samples) * self.cell_area)

    def inner_spectral(self, other: GridFunction) -> complex:
        self._check_grid(other)
        return complex(np.vdot(other.spectrum(), self.spectrum()) * self.area)

    def dilate(self, s: int) -> GridFunction:
        """``f(x / 2**s)`` on the dilated torus; the samples are unchanged."""
        return GridFunction(self.samples, (self.L[0] + s, self.L[1] + s),
                            (self.Kp[0] - s, self.Kp[1] - s))

    def to_bytes(self, space: str = "spatial") -> bytes:
        if space not in ("spatial", "spectral"):
            raise ValueError("space must be 'spatial' or 'spectral'")
        data = self.samples if space == "spatial" else self.spectrum()
        L = self.L[0] if self.L[0] == self.L[1] else list(self.L)
        Kp = self.Kp[0] if self.Kp[0] == self.Kp[1] else list(self.Kp)
        header = json.dumps({"L": L, "Kp": Kp, "layout": "row-major", "space": space})
        body = np.ascontiguousarray(data, dtype="<c16").tobytes()
        return header.encode() + b"\n" + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> GridFunction:
        head, _, body = blob.partition(b"\n")
        meta = json.loads(head)
        if meta.get("layout", "row-major") != "row-major":
            raise ValueError("only row-major layout is supported")
        L, Kp = _pair(meta["L"]), _pair(meta["Kp"])
        shape = (1 << (L[0] + Kp[0]), 1 << (L[1] + Kp[1]))
        data = np.frombuffer(body, dtype="<c16")
        if data.size != shape[0] * shape[1]:
            raise ValueError("payload size does not match header")
        data = data.reshape(shape)
        if meta.get("space", "spatial") == "spectral":
            return cls.from_spectrum(data, L, Kp)
        return cls(data.astype(np.complex128), L, Kp)


def _h(s):
    s = np.asarray(s, dtype=np.float64)
    pos = s > 0
    return np.where(pos, np.exp(-1.0 / np.where(pos, s, 1.0)), 0.0)


@dataclass(frozen=True)
class SpectralBump:
    """Smooth dyadic partition of unity on the positive half-line.

    ``eta`` is a smooth step, 1 on ``(-inf, 1]`` and 0 on ``[2, inf)``;
    ``psi(xi) = eta(xi) - eta(2 xi)`` telescopes to 1 over dyadic dilates and
    ``psi_tilde(xi) = eta(xi / 2) - eta(4 xi)`` equals 1 on ``supp psi``.
    """

    def eta(self, t):
        a, b = _h(2.0 - np.asarray(t, dtype=np.float64)), _h(np.asarray(t, dtype=np.float64) - 1.0)
        return a / (a + b)

    def psi(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return np.where(xi > 0, self.eta(xi) - self.eta(2.0 * xi), 0.0)

    def psi_tilde(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return np.where(xi > 0, self.eta(0.5 * xi) - self.eta(4.0 * xi), 0.0)

    def psi_j(self, j: int, xi, variant: str = "plain"):
        scaled = np.ldexp(np.asarray(xi, dtype=np.float64), -j)
        if variant == "plain":
            return self.psi(scaled)
        if variant == "tilde":
            return self.psi_tilde(scaled)
        raise ValueError(f"unknown bump variant {variant!r}")

    def kernel(self, L, Kp) -> GridFunction:
        """Periodized convolution kernel of the ``psi_tilde`` tensor multiplier."""
        g = GridFunction.zeros(L, Kp)
        m = np.outer(self.psi_tilde(g.frequencies(0)), self.psi_tilde(g.frequencies(1)))
        return GridFunction.from_spectrum(m / g.area, g.L, g.Kp)


BUMP = SpectralBump()


def build_bumps() -> SpectralBump:
    return BUMP


def block_range(f: GridFunction, axis: int) -> range:
    """Scales ``j`` whose bump meets the positive lattice frequencies on ``axis``."""
    return range(-f.L[axis], f.Kp[axis])


def _multiplier(f: GridFunction, axis: int, j: int, variant: str) -> np.ndarray:
    return BUMP.psi_j(j, f.frequencies(axis), variant)


def block_project(f: GridFunction, b: tuple[int, int], variant: str = "plain",
                  axis: int | str = "both") -> GridFunction:
    """Apply ``Delta_{i,j}`` (or the tilde version) by spectral multiplication.

    ``axis=1`` applies only the first-variable factor ``psi_i(xi1)``,
    ``axis=2`` only ``psi_j(xi2)``.
    """
    i, j = b
    F = np.fft.fft2(f.samples)
    if axis in ("both", 1):
        F = F * _multiplier(f, 0, i, variant)[:, None]
    if axis in ("both", 2):
        F = F * _multiplier(f, 1, j, variant)[None, :]
    if axis not in ("both", 1, 2):
        raise ValueError("axis must be 1, 2 or 'both'")
    return GridFunction(np.fft.ifft2(F), f.L, f.Kp)


def _blocks(f: GridFunction, variant: str = "plain"):
    """Yield ``(i, j, m1, m2)`` for blocks with nonzero multipliers."""
    rows = [(i, _multiplier(f, 0, i, variant)) for i in block_range(f, 0)]
    cols = [(j, _multiplier(f, 1, j, variant)) for j in block_range(f, 1)]
    rows = [(i, m) for i, m in rows if m.any()]
    cols = [(j, m) for j, m in cols if m.any()]
    for i, m1 in rows:
        for j, m2 in cols:
            yield i, j, m1, m2


def _axis_mass(F: np.ndarray) -> float:
    return float(np.abs(F[0, :]).sum() + np.abs(F[1:, 0]).sum())


def reproduce(f: GridFunction) -> tuple[GridFunction, float]:
    """Reassemble ``f`` as ``sum_{i,j} tilde-Delta_{i,j} Delta_{i,j} f``.

    Returns the reconstruction and its relative L2 error.
    """
    F = np.fft.fft2(f.samples)
    scale = np.abs(F).sum()
    if scale > 0 and _axis_mass(F) > 1e-12 * scale:
        raise ValueError("zero-frequency component uncovered")
    acc = np.zeros_like(F, dtype=complex)
    for i, j, m1, m2 in _blocks(f):
        t1 = BUMP.psi_j(i, f.frequencies(0), "tilde") * m1
        t2 = BUMP.psi_j(j, f.frequencies(1), "tilde") * m2
        acc += np.outer(t1, t2) * F
    rec = GridFunction(np.fft.ifft2(acc), f.L, f.Kp)
    norm = f.lq_norm(2)
    err = (rec - f).lq_norm(2)
    return rec, (err / norm if norm > 0 else err)


def _check_p(p):
    if p < 1:
        raise ValueError("p must be >= 1")


def _ipow(x: np.ndarray, p: float) -> np.ndarray:
    if p == 2:
        return x * x
    if p == 3:
        return x * x * x
    if p == 4:
        x2 = x * x
        return x2 * x2
    if p == 1.5:
        return x * np.sqrt(x)
    if abs(p - 4 / 3) < 1e-15:
        return x * np.cbrt(x)
    return x ** p


def square_function(f: GridFunction, p: float) -> GridFunction:
    """``(sum_{i,j} 2**(i+j) |Delta_{i,j} f|**p)**(1/p)`` pointwise."""
    _check_p(p)
    F = np.fft.fft2(f.samples)
    A = np.abs(F)
    # entries at FFT roundoff level relative to the peak feed no block
    live = A > 1e-15 * A.max() if A.size else A > 0
    rows_live, cols_live = live.any(axis=1), live.any(axis=0)
    # blocks whose multiplier misses the spectrum contribute exactly zero
    rows = [(i, m) for i in block_range(f, 0)
            if ((m := _multiplier(f, 0, i, "plain")) != 0)[rows_live].any()]
    cols = [(j, m) for j in block_range(f, 1)
            if ((m := _multiplier(f, 1, j, "plain")) != 0)[cols_live].any()]
    acc = np.zeros(f.shape)
    if not rows or not cols:
        return GridFunction(acc, f.L, f.Kp)
    M2 = np.array([m for _, m in cols])
    w2 = np.array([math.ldexp(1.0, j) for j, _ in cols])
    for i, m1 in rows:
        half = np.fft.ifft(m1[:, None] * F, axis=0)
        blocks = np.fft.ifft(half[None, :, :] * M2[:, None, :], axis=-1)
        mag = np.abs(blocks)
        power = _ipow(mag, p)
        acc += math.ldexp(1.0, i) * np.tensordot(w2, power, axes=1)
    return GridFunction(acc ** (1.0 / p), f.L, f.Kp)


def besov_norm(f: GridFunction, p: float) -> float:
    """``||S_p f||_{L^p}`` over the window."""
    return square_function(f, p).lq_norm(p)


def analytic_project(f: GridFunction) -> GridFunction:
    """Keep the spectrum on ``k1 >= 0, k2 >= 0`` (axes included)."""
    F = np.fft.fft2(f.samples)
    keep = np.outer(f.frequencies(0) >= 0, f.frequencies(1) >= 0)
    return GridFunction(np.fft.ifft2(F * keep), f.L, f.Kp)


def involution(f: GridFunction) -> GridFunction:
    """``f(-x)`` on the torus."""
    return GridFunction(np.roll(f.samples[::-1, ::-1], 1, axis=(0, 1)), f.L, f.Kp)


def region_mask(f: GridFunction, boxes) -> np.ndarray:
    """Samples whose point lies in the union of ``((lo1, hi1), (lo2, hi2))`` boxes."""
    x1, x2 = f.coords(0), f.coords(1)
    mask = np.zeros(f.shape, dtype=bool)
    for (lo1, hi1), (lo2, hi2) in boxes:
        m1 = (lo1 <= x1) & (x1 < hi1)
        m2 = (lo2 <= x2) & (x2 < hi2)
        mask |= np.outer(m1, m2)
    return mask


def local_norm(f: GridFunction, boxes, q: float) -> float:
    """L^q norm of ``f`` over a union of boxes clipped to the window."""
    if q < 1:
        raise ValueError("q must be >= 1")
    mask = region_mask(f, boxes)
    return float(np.sum(np.abs(f.samples[mask]) ** q) * f.cell_area) ** (1.0 / q)


def random_analytic(rng: np.random.Generator, L, Kp, band: tuple[int, int] | None = None) -> GridFunction:
    """Random function with spectrum on the open positive quadrant.

    ``band`` bounds the lattice indices ``1 <= k < band`` per axis (defaults
    to half the Nyquist index).
    """
    g = GridFunction.zeros(L, Kp)
    n1, n2 = g.shape
    b1, b2 = band if band is not None else (n1 // 4, n2 // 4)
    F = np.zeros((n1, n2), dtype=complex)
    F[1:b1, 1:b2] = rng.standard_normal((b1 - 1, b2 - 1)) + 1j * rng.standard_normal((b1 - 1, b2 - 1))
    return GridFunction.from_spectrum(F, g.L, g.Kp)
