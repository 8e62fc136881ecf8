"""Annular decay of tilde-projected cancellative pieces, and the A_u sums.

Two routes compute the same local norm ``||tilde-Delta*_{i,j} a_R||_{L^q(E_{u,v}(R))}``:

* :func:`annular_decay_check` works on any :class:`GridFunction` with 2-D FFTs;
* :func:`separable_decay` exploits that the multiplier is a tensor product
  and that pieces are cellwise constant, so each axis gets its own 1-D torus
  and the 2-D L^q sum runs through the compiled low-rank kernel. This is what
  makes sweeps over wide scale ranges affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hankellab import kernels, spectral
from hankellab.atoms import AtomPiece, piece_pattern
from hankellab.dyadic import DyadicInterval, DyadicRectangle, annulus, product_annulus
from hankellab.spectral import BUMP, GridFunction


def _check_u(u):
    if u in (1, 2, 3) or u < 0:
        raise ValueError("excluded annulus index")


def decay_profile(i: int, I: DyadicInterval, u: int, M: float) -> tuple[float, float]:
    """``(min(1, 2**i |I|), (1 + 2**u 2**i |I|)**-M)``, with theta = 1 at u = 0."""
    _check_u(u)
    if M < 1:
        raise ValueError("M must be >= 1")
    scaled = math.ldexp(I.length, i)
    m = min(1.0, scaled)
    theta = 1.0 if u == 0 else (1.0 + math.ldexp(scaled, u)) ** (-M)
    return m, theta


def decay_bound(rect: DyadicRectangle, b: tuple[int, int], u: int, v: int, M: float) -> float:
    mi, tu = decay_profile(b[0], rect.first, u, M)
    mj, tv = decay_profile(b[1], rect.second, v, M)
    return mi * mj * tu * tv


def annular_decay_check(piece: AtomPiece | GridFunction, rect: DyadicRectangle, b: tuple[int, int],
                        u: int, v: int, q: float, M: float, validate: bool = True) -> float:
    """Ratio of the local norm of ``tilde-Delta*_{b} a_R`` on ``E_{u,v}(R)`` to the decay bound.

    The adjoint multiplier is the complex conjugate of ``psi_tilde``, which
    is real, so the tilde projector itself is applied.
    """
    _check_u(u)
    _check_u(v)
    values = piece.values if isinstance(piece, AtomPiece) else piece
    if validate:
        probe = AtomPiece(rect, values)
        if (np.abs(values.samples)[~probe.support_mask()] > 0).any():
            raise ValueError("invalid piece: support leaves 3R")
        if probe.cancellation_residual() > 1e-12:
            raise ValueError("invalid piece: cancellation fails")
    norm = values.lq_norm(q)
    if norm == 0:
        return 0.0
    out = spectral.block_project(values, b, "tilde")
    lhs = spectral.local_norm(out, product_annulus(rect, u, v), q)
    return lhs / (decay_bound(rect, b, u, v, M) * norm)


def a_u(I: DyadicInterval, u: int, p: float, M: float, floor: float = 1e-18) -> float:
    """``(sum_i [2**(-i/p) m_i(I) theta_u(i, I)]**q)**(1/q)`` by direct summation.

    The index runs over a window around ``-log2 |I|`` wide enough that the
    dropped tails are geometric and below ``floor``.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    _check_u(u)
    q = p / (p - 1.0)
    center = -I.n
    span_hi = int(math.ceil(64 * p)) + 64
    terms = []
    for i in range(center - 256, center + span_hi + 1):
        m, theta = decay_profile(i, I, u, M)
        t = (2.0 ** (-i / p) * m * theta) ** q
        if t >= floor:
            terms.append(t)
    return math.fsum(terms) ** (1.0 / q)


@dataclass(frozen=True)
class AxisFrame:
    """One periodic axis: torus length, sample spacing, and the piece side it carries."""

    window: float
    spacing: float
    side: DyadicInterval

    @property
    def size(self) -> int:
        n = self.window / self.spacing
        if n != int(n):
            raise ValueError("window must be a multiple of the spacing")
        return int(n)

    def coords(self) -> np.ndarray:
        return np.arange(self.size) * self.spacing

    def responses(self, block: int, cells: int) -> np.ndarray:
        """``tilde-Delta_block`` applied to each cell indicator of 3I; shape ``(cells, size)``."""
        return _responses(self, block, cells)

    def annulus_mask(self, u: int) -> np.ndarray:
        x = self.coords()
        mask = np.zeros(x.shape, dtype=bool)
        for lo, hi in annulus(self.side, u):
            mask |= (lo <= x) & (x < hi)
        return mask


@lru_cache(maxsize=128)
def _responses(frame: AxisFrame, block: int, cells: int) -> np.ndarray:
    x = frame.coords()
    width = 3 * frame.side.length / cells
    lo = frame.side.center - 1.5 * frame.side.length
    idx = np.floor((x - lo) / width)
    basis = (idx[None, :] == np.arange(cells)[:, None]).astype(np.float64)
    freqs = np.fft.fftfreq(frame.size, d=1.0 / frame.size) / frame.window
    mult = BUMP.psi_j(block, freqs, "tilde")
    out = np.fft.ifft(np.fft.fft(basis, axis=1) * mult[None, :], axis=1)
    out.setflags(write=False)
    return out


def separable_decay(coeffs: np.ndarray, frame1: AxisFrame, frame2: AxisFrame, b: tuple[int, int],
                    us, vs, q: float) -> dict[tuple[int, int], tuple[float, float]]:
    """Local norms on every requested annulus for a cellwise-constant piece.

    Returns ``{(u, v): (lhs, ||a_R||_q)}``.
    """
    n1, n2 = coeffs.shape
    U = frame1.responses(b[0], n1)
    V = frame2.responses(b[1], n2)
    left, sigma, right = np.linalg.svd(coeffs)
    keep = sigma > 1e-14 * (sigma[0] if sigma.size and sigma[0] > 0 else 1.0)
    A = left[:, keep] * sigma[keep]
    B = right[keep].T
    w1 = 3 * frame1.side.length / n1
    w2 = 3 * frame2.side.length / n2
    piece_norm = (float(np.sum(np.abs(coeffs) ** q)) * w1 * w2) ** (1.0 / q)
    UA = U.T @ A
    VB = V.T @ B
    out = {}
    for u in us:
        P = np.ascontiguousarray(UA[frame1.annulus_mask(u)])
        for v in vs:
            Q = np.ascontiguousarray(VB[frame2.annulus_mask(v)])
            if P.shape[1] == 0:
                lhs = 0.0
            else:
                if P.shape[1] == 1:
                    # a rank-one pattern factorizes exactly
                    power = float(np.sum(np.abs(P) ** q)) * float(np.sum(np.abs(Q) ** q))
                else:
                    power = kernels.lowrank_lq_power_sum(P, Q, q)
                lhs = (power * frame1.spacing * frame2.spacing) ** (1.0 / q)
            out[(u, v)] = (lhs, piece_norm)
    return out


def resolution_exponent(block: int, side_exp: int) -> int:
    """Cells per side (log2) that resolve ``psi_tilde`` of the block and the piece pattern."""
    return max(3, block + side_exp + 3)


def physical_frames(rect: DyadicRectangle, b: tuple[int, int], window_exp: int = 7):
    """Frames on a fixed absolute window ``2**window_exp`` with R near its center."""
    frames = []
    for side, blk in ((rect.first, b[0]), (rect.second, b[1])):
        c = resolution_exponent(blk, side.n)
        frames.append(AxisFrame(math.ldexp(1.0, window_exp), math.ldexp(side.length, -c), side))
    return tuple(frames)


def reduced_frames(b: tuple[int, int], window_exp: int = 7):
    """Unit-side frames; the window grows for low blocks so the kernel does not wrap."""
    frames = []
    for blk in b:
        c = resolution_exponent(blk, 0)
        w = max(window_exp, 5 - blk)
        side = DyadicInterval(1 << (w - 1), 0)
        frames.append(AxisFrame(math.ldexp(1.0, w), math.ldexp(1.0, -c), side))
    return tuple(frames)


def centered_rect(n1: int, n2: int, window_exp: int = 7) -> DyadicRectangle:
    """Dyadic rectangle with sides ``2**n1, 2**n2`` starting at the window center."""
    half = 1 << (window_exp - 1)
    return DyadicRectangle(DyadicInterval(half << -n1 if n1 <= 0 else half >> n1, n1),
                           DyadicInterval(half << -n2 if n2 <= 0 else half >> n2, n2))

