"""Finite sections of small Hankel operators on the nonnegative lattice."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from hankellab import spectral
from hankellab.spectral import GridFunction


@dataclass(frozen=True, eq=False)
class AnalyticSymbol:
    """Coefficients ``phi_hat(kappa)`` for ``kappa`` in ``{0, ..., 2N-2}**2``.

    With ``zero_axis_excluded`` the coefficients with a zero component are
    forced to 0, so the Hankel and Besov sides see the same coefficients.
    """

    N: int
    coeffs: np.ndarray
    zero_axis_excluded: bool = True

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (2 * self.N - 1, 2 * self.N - 1):
            raise ValueError(f"coeffs must have shape {(2 * self.N - 1,) * 2}")
        if not np.isfinite(c).all():
            raise ValueError("coefficients must be finite")
        if self.zero_axis_excluded:
            c[0, :] = 0
            c[:, 0] = 0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __mul__(self, c):
        return AnalyticSymbol(self.N, self.coeffs * c, self.zero_axis_excluded)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, N: int, fn, zero_axis_excluded: bool = True) -> AnalyticSymbol:
        k = np.arange(2 * N - 1)
        return cls(N, fn(k[:, None], k[None, :]), zero_axis_excluded)

    def to_bytes(self) -> bytes:
        header = json.dumps({"N": self.N, "zero_axis_excluded": self.zero_axis_excluded})
        return header.encode() + b"\n" + np.ascontiguousarray(self.coeffs, dtype="<c16").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> AnalyticSymbol:
        head, _, body = blob.partition(b"\n")
        meta = json.loads(head)
        N = int(meta["N"])
        data = np.frombuffer(body, dtype="<c16")
        if data.size != (2 * N - 1) ** 2:
            raise ValueError("payload size does not match header")
        return cls(N, data.reshape(2 * N - 1, 2 * N - 1), bool(meta.get("zero_axis_excluded", True)))


def _bi_index(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major flattening of ``{0..N-1}**2``."""
    a, b = np.divmod(np.arange(N * N), N)
    return a, b


@dataclass(frozen=True, eq=False)
class HankelMatrix:
    symbol: AnalyticSymbol
    entries: np.ndarray

    @property
    def N(self) -> int:
        return self.symbol.N

    @cached_property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.entries, compute_uv=False)


def hankel_matrix(phi: AnalyticSymbol) -> HankelMatrix:
    """The ``N**2 x N**2`` matrix ``A[xi, lam] = phi_hat(xi + lam)``."""
    x1, x2 = _bi_index(phi.N)
    A = phi.coeffs[x1[:, None] + x1[None, :], x2[:, None] + x2[None, :]]
    A.setflags(write=False)
    return HankelMatrix(phi, A)


def schatten_norm(H: HankelMatrix, p: float) -> float:
    if p < 1 or not math.isfinite(p):
        raise ValueError("p must be finite and >= 1")
    s = H.singular_values
    if s.size == 0 or s[0] == 0:
        return 0.0
    # factor out the largest value so large p does not overflow
    return float(s[0] * np.sum((s / s[0]) ** p) ** (1.0 / p))


def anti_diagonal_weights(N: int) -> np.ndarray:
    """``w(kappa)``: number of pairs ``(xi, lam)`` with ``xi + lam = kappa``, as a 2-D array."""
    k = np.arange(2 * N - 1)
    w1 = np.minimum(k, N - 1) - np.maximum(0, k - N + 1) + 1
    return np.outer(w1, w1)


def frobenius_identity(phi: AnalyticSymbol) -> float:
    """``(sum w(kappa) |phi_hat(kappa)|**2)**(1/2)``, the S^2 norm by counting."""
    return math.sqrt(float(np.sum(anti_diagonal_weights(phi.N) * np.abs(phi.coeffs) ** 2)))


def operator_apply(H: HankelMatrix, fhat: np.ndarray, method: str = "matrix") -> np.ndarray:
    """``g_hat(xi) = sum_lam phi_hat(xi + lam) f_hat(lam)`` over ``{0..N-1}**2``.

    ``method="fft"`` evaluates the same sum as a zero-padded convolution of
    ``phi_hat`` with the reflected input.
    """
    N = H.N
    fhat = np.asarray(fhat)
    if fhat.shape != (N, N):
        raise ValueError(f"fhat must have shape {(N, N)}")
    if method == "matrix":
        return (H.entries @ fhat.reshape(-1)).reshape(N, N)
    if method == "fft":
        size = 4 * N
        reflected = fhat[::-1, ::-1]
        conv = np.fft.ifft2(np.fft.fft2(H.symbol.coeffs, (size, size))
                            * np.fft.fft2(reflected, (size, size)))
        out = conv[N - 1:2 * N - 1, N - 1:2 * N - 1]
        if not np.iscomplexobj(fhat) and not np.iscomplexobj(H.symbol.coeffs):
            out = out.real
        return out
    raise ValueError(f"unknown method {method!r}")


def default_resolution(N: int, L: int = 0) -> int:
    """Smallest ``Kp`` whose Nyquist index exceeds the largest lattice index ``2N - 2``."""
    Kp = 0
    while (1 << (L + Kp - 1) if L + Kp >= 1 else 0) <= 2 * N - 2:
        Kp += 1
    return Kp


def symbol_function(phi: AnalyticSymbol, L: int = 0, Kp: int | None = None) -> GridFunction:
    """``sum_kappa phi_hat(kappa) exp(2 pi i kappa . x / 2**L)`` on the ``(L, Kp)`` grid."""
    if Kp is None:
        Kp = default_resolution(phi.N, L)
    M = 1 << (L + Kp)
    if 2 * phi.N - 2 >= M // 2:
        raise ValueError("frequency range overflow: raise Kp")
    F = np.zeros((M, M), dtype=np.complex128)
    n = 2 * phi.N - 1
    F[:n, :n] = phi.coeffs
    return GridFunction.from_spectrum(F, L, Kp)


def besov_lattice_norm(phi: AnalyticSymbol, p: float, L: int = 0, Kp: int | None = None) -> float:
    """Besov norm of the symbol after embedding ``kappa -> xi = kappa / 2**L``."""
    if not phi.zero_axis_excluded:
        raise ValueError("axis frequencies must be excluded for the Besov bridge")
    return spectral.besov_norm(symbol_function(phi, L, Kp), p)


def equivalence_ratio(phi: AnalyticSymbol, p: float, L: int = 0, Kp: int | None = None) -> float:
    """``||H_phi||_{S^p} / ||phi||_B`` for a nonzero symbol."""
    if not np.any(phi.coeffs):
        raise ValueError("ratio undefined")
    return schatten_norm(hankel_matrix(phi), p) / besov_lattice_norm(phi, p, L, Kp)
