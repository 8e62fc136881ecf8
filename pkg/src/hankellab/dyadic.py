"""Dyadic intervals, rectangles and open sets on a finite grid.

Geometry lives in the window ``[0, 2**L)**2`` at base resolution ``2**-K``.
Mask arrays are indexed ``mask[i1, i2]`` with axis 0 the first coordinate
``x1`` and axis 1 the second coordinate ``x2``.

Direction conventions follow the maximal families: ``direction=2`` means the
second side ``J`` is maximal (the family M2) and the embeddedness constant
expands the first side ``I``; ``direction=1`` is the mirror image.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from hankellab import kernels


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The half-open interval ``[m 2**n, (m+1) 2**n)``."""

    m: int
    n: int

    @property
    def length(self) -> float:
        return math.ldexp(1.0, self.n)

    @property
    def start(self) -> float:
        return math.ldexp(self.m, self.n)

    @property
    def end(self) -> float:
        return math.ldexp(self.m + 1, self.n)

    @property
    def center(self) -> float:
        return math.ldexp(2 * self.m + 1, self.n - 1)

    def parent(self) -> DyadicInterval:
        return DyadicInterval(self.m // 2, self.n + 1)

    def children(self) -> tuple[DyadicInterval, DyadicInterval]:
        return DyadicInterval(2 * self.m, self.n - 1), DyadicInterval(2 * self.m + 1, self.n - 1)

    def contains(self, other: DyadicInterval) -> bool:
        if other.n > self.n:
            return False
        return other.m >> (self.n - other.n) == self.m

    def intersects(self, other: DyadicInterval) -> bool:
        return self.contains(other) or other.contains(self)

    def dilate(self, c: float) -> tuple[float, float]:
        """Concentric dilate ``cI`` as ``(lo, hi)``."""
        half = 0.5 * c * self.length
        return self.center - half, self.center + half

    def cells(self, K: int) -> slice:
        """Base-cell index range of the interval at resolution ``2**-K``."""
        if self.n + K < 0:
            raise ValueError(f"interval finer than base resolution 2^-{K}")
        w = 1 << (self.n + K)
        return slice(self.m * w, (self.m + 1) * w)

    @classmethod
    def containing(cls, x: float, n: int) -> DyadicInterval:
        return cls(math.floor(math.ldexp(x, -n)), n)


@dataclass(frozen=True, order=True)
class DyadicRectangle:
    first: DyadicInterval
    second: DyadicInterval

    @property
    def area(self) -> float:
        return self.first.length * self.second.length

    def contains_point(self, x1: float, x2: float) -> bool:
        return (self.first.start <= x1 < self.first.end
                and self.second.start <= x2 < self.second.end)

    def dilate(self, c1: float, c2: float | None = None):
        """Concentric dilate as ``((lo1, hi1), (lo2, hi2))``."""
        return self.first.dilate(c1), self.second.dilate(c1 if c2 is None else c2)

    def to_list(self) -> list[list[int]]:
        return [[self.first.m, self.first.n], [self.second.m, self.second.n]]

    @classmethod
    def from_list(cls, data) -> DyadicRectangle:
        (m1, n1), (m2, n2) = data
        return cls(DyadicInterval(int(m1), int(n1)), DyadicInterval(int(m2), int(n2)))


@dataclass(frozen=True)
class EmbeddedRectangle:
    rect: DyadicRectangle
    hat: DyadicInterval
    gamma: float
    direction: int


@dataclass(frozen=True, eq=False)
class GridOpenSet:
    """A union of base cells inside the window ``[0, 2**L)**2``."""

    L: int
    K: int
    mask: np.ndarray

    def __post_init__(self):
        if self.L < 0 or self.K < 0:
            raise ValueError("L and K must be nonnegative")
        side = 1 << (self.L + self.K)
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != (side, side):
            raise ValueError(f"mask must have shape {(side, side)}, got {mask.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def side(self) -> int:
        return self.mask.shape[0]

    @property
    def cell(self) -> float:
        return math.ldexp(1.0, -self.K)

    @property
    def window(self) -> float:
        return math.ldexp(1.0, self.L)

    @cached_property
    def measure(self) -> float:
        return int(self.mask.sum()) * math.ldexp(1.0, -2 * self.K)

    @cached_property
    def key(self) -> tuple[int, int, str]:
        return self.L, self.K, hashlib.sha1(np.packbits(self.mask).tobytes()).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, GridOpenSet):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"GridOpenSet(L={self.L}, K={self.K}, cells={int(self.mask.sum())})"

    def is_empty(self) -> bool:
        return not self.mask.any()

    @classmethod
    def empty(cls, L: int, K: int) -> GridOpenSet:
        side = 1 << (L + K)
        return cls(L, K, np.zeros((side, side), dtype=bool))

    @classmethod
    def from_boxes(cls, L: int, K: int, boxes) -> GridOpenSet:
        """Union of boxes ``((lo1, hi1), (lo2, hi2))`` in window coordinates.

        Box edges must sit on the base grid.
        """
        side = 1 << (L + K)
        mask = np.zeros((side, side), dtype=bool)
        for (lo1, hi1), (lo2, hi2) in boxes:
            idx = [math.ldexp(v, K) for v in (lo1, hi1, lo2, hi2)]
            if any(v != int(v) for v in idx):
                raise ValueError(f"box {((lo1, hi1), (lo2, hi2))} is not aligned to the base grid")
            a1, b1, a2, b2 = (min(max(int(v), 0), side) for v in idx)
            mask[a1:b1, a2:b2] = True
        return cls(L, K, mask)

    @classmethod
    def from_rects(cls, L: int, K: int, rects) -> GridOpenSet:
        return cls.from_boxes(L, K, [((r.first.start, r.first.end), (r.second.start, r.second.end))
                                     for r in rects])

    def contains(self, rect: DyadicRectangle) -> bool:
        if rect.first.n > self.L or rect.second.n > self.L:
            return False
        s1, s2 = rect.first.cells(self.K), rect.second.cells(self.K)
        if s1.start < 0 or s2.start < 0 or s1.stop > self.side or s2.stop > self.side:
            return False
        return bool(self.mask[s1, s2].all())

    def refine(self, extra: int = 1) -> GridOpenSet:
        """The same set described at base resolution ``2**-(K+extra)``."""
        f = 1 << extra
        return GridOpenSet(self.L, self.K + extra, np.repeat(np.repeat(self.mask, f, 0), f, 1))

    def transpose(self) -> GridOpenSet:
        return GridOpenSet(self.L, self.K, self.mask.T)

    def to_json(self) -> str:
        rows, cols = np.nonzero(self.mask)
        cells = [[int(r), int(c)] for r, c in zip(rows, cols)]
        return json.dumps({"L": self.L, "K": self.K, "cells": cells})

    @classmethod
    def from_json(cls, text: str) -> GridOpenSet:
        data = json.loads(text)
        L, K = int(data["L"]), int(data["K"])
        side = 1 << (L + K)
        mask = np.zeros((side, side), dtype=bool)
        cells = np.asarray(data["cells"], dtype=np.int64).reshape(-1, 2)
        if cells.size and (cells.min() < 0 or cells.max() >= side):
            raise ValueError("cell index outside the window")
        mask[cells[:, 0], cells[:, 1]] = True
        return cls(L, K, mask)


def _full_pyramid(mask: np.ndarray) -> list[list[np.ndarray]]:
    """``P[s][t][a, b]`` is True iff the block of 2**s by 2**t cells at (a, b) is full."""
    rows = [np.asarray(mask, dtype=bool)]
    while rows[-1].shape[0] > 1:
        r = rows[-1]
        rows.append(r[0::2] & r[1::2])
    pyramid = []
    for base in rows:
        cols = [base]
        while cols[-1].shape[1] > 1:
            c = cols[-1]
            cols.append(c[:, 0::2] & c[:, 1::2])
        pyramid.append(cols)
    return pyramid


@dataclass(frozen=True)
class RectFamily:
    """A maximal family as flat arrays.

    Scales are in base-cell units: side length is ``2**(scale - K)``.
    ``gamma_exp`` is ``log2`` of the embeddedness constant.
    """

    K: int
    direction: int
    scale1: np.ndarray
    pos1: np.ndarray
    scale2: np.ndarray
    pos2: np.ndarray
    gamma_exp: np.ndarray

    def __len__(self):
        return len(self.scale1)

    @property
    def len1(self) -> np.ndarray:
        return np.ldexp(1.0, self.scale1 - self.K)

    @property
    def len2(self) -> np.ndarray:
        return np.ldexp(1.0, self.scale2 - self.K)

    @property
    def area(self) -> np.ndarray:
        return self.len1 * self.len2

    @property
    def gamma(self) -> np.ndarray:
        return np.ldexp(1.0, self.gamma_exp)

    @property
    def center1(self) -> np.ndarray:
        return (self.pos1 + 0.5) * self.len1

    @property
    def center2(self) -> np.ndarray:
        return (self.pos2 + 0.5) * self.len2

    def rects(self) -> list[DyadicRectangle]:
        K = self.K
        return [DyadicRectangle(DyadicInterval(int(a), int(s) - K), DyadicInterval(int(b), int(t) - K))
                for s, a, t, b in zip(self.scale1, self.pos1, self.scale2, self.pos2)]


def _check_direction(direction):
    if direction not in (1, 2):
        raise ValueError(f"direction must be 1 or 2, got {direction!r}")


@lru_cache(maxsize=512)
def _enlarged(omega: GridOpenSet, method: str) -> GridOpenSet:
    if method == "dyadic":
        mask = kernels.dyadic_enlarge(omega.mask)
    elif method == "grid":
        mask = kernels.grid_enlarge(omega.mask)
    else:
        raise ValueError(f"unknown enlargement method {method!r}")
    return GridOpenSet(omega.L, omega.K, mask | omega.mask)


def enlarge(omega: GridOpenSet, method: str = "dyadic") -> GridOpenSet:
    """Level set ``{M chi_Omega > 1/2}`` of a strong maximal function.

    ``method="dyadic"`` takes the supremum over dyadic rectangles;
    ``method="grid"`` over every rectangle made of whole base cells, a
    slower stand-in for the full strong maximal function. Results are
    memoized per mask.
    """
    return _enlarged(omega, method)


def enlargement_constant(omega: GridOpenSet, method: str = "dyadic") -> float:
    """``|enlarge(omega)| / |omega|`` (1.0 for the empty set)."""
    if omega.is_empty():
        return 1.0
    return enlarge(omega, method).measure / omega.measure


@lru_cache(maxsize=512)
def _family(omega: GridOpenSet, direction: int, method: str = "dyadic") -> RectFamily:
    tilde = enlarge(omega, method)
    mask, tmask = omega.mask, tilde.mask
    if direction == 1:
        mask, tmask = mask.T, tmask.T
    P = _full_pyramid(mask)
    PT = _full_pyramid(tmask)
    top = omega.L + omega.K
    out = {k: [] for k in ("s", "a", "t", "b", "g")}
    for s in range(top + 1):
        for t in range(top + 1):
            full = P[s][t]
            if t < top:
                maximal = full & ~np.repeat(P[s][t + 1], 2, axis=1)
            else:
                maximal = full
            a, b = np.nonzero(maximal)
            if a.size == 0:
                continue
            g = np.zeros(a.size, dtype=np.int64)
            alive = np.ones(a.size, dtype=bool)
            for k in range(1, top - s + 1):
                alive &= PT[s + k][t][a >> k, b]
                if not alive.any():
                    break
                g += alive
            out["s"].append(np.full(a.size, s))
            out["t"].append(np.full(a.size, t))
            out["a"].append(a)
            out["b"].append(b)
            out["g"].append(g)
    arr = {k: (np.concatenate(v) if v else np.zeros(0, dtype=np.int64)) for k, v in out.items()}
    if direction == 2:
        return RectFamily(omega.K, 2, arr["s"], arr["a"], arr["t"], arr["b"], arr["g"])
    return RectFamily(omega.K, 1, arr["t"], arr["b"], arr["s"], arr["a"], arr["g"])


def maximal_family(omega: GridOpenSet, direction: int = 2) -> RectFamily:
    """Array form of :func:`maximal_rects`, with embeddedness exponents attached."""
    _check_direction(direction)
    return _family(omega, direction)


def maximal_rects(omega: GridOpenSet, direction: int = 2) -> set[DyadicRectangle]:
    """Dyadic rectangles inside ``omega`` that are maximal in the given direction.

    ``direction=2`` gives M2 (the second side cannot be doubled inside
    ``omega``); ``direction=1`` gives M1.
    """
    return set(maximal_family(omega, direction).rects())


def embed(rect: DyadicRectangle, omega: GridOpenSet, direction: int = 2,
          enlarged: GridOpenSet | None = None) -> EmbeddedRectangle:
    """Maximal dyadic expansion of ``rect`` inside the enlarged set.

    For ``direction=2`` the first side is expanded along its dyadic
    ancestors while ``hat x J`` stays inside the enlargement; the ancestors
    form a chain, so the maximal one is unique.
    """
    _check_direction(direction)
    if not omega.contains(rect):
        raise ValueError("not a member rectangle")
    tilde = enlarge(omega) if enlarged is None else enlarged
    if direction == 2:
        hat, fixed = rect.first, rect.second
        fits = lambda h: tilde.contains(DyadicRectangle(h, fixed))
    else:
        hat, fixed = rect.second, rect.first
        fits = lambda h: tilde.contains(DyadicRectangle(fixed, h))
    start = hat
    while hat.n < omega.L and fits(hat.parent()):
        hat = hat.parent()
    return EmbeddedRectangle(rect, hat, hat.length / start.length, direction)


def journe_sum(omega: GridOpenSet, delta: float, direction: int = 2) -> float:
    """Weighted packing sum ``sum gamma(R)**-delta |R|`` over a maximal family."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    fam = maximal_family(omega, direction)
    if len(fam) == 0:
        return 0.0
    return float(np.sum(np.ldexp(1.0, fam.scale1 + fam.scale2 - 2 * fam.K)
                        * np.exp2(-delta * fam.gamma_exp)))


def _check_beta(beta):
    if not 0 < beta < 1:
        raise ValueError("beta = delta*(p-1) must be < 1 (and positive)")


def geometric_sums(omega: GridOpenSet, points, u: int, v: int, beta: float) -> np.ndarray:
    """Batch form of :func:`geometric_sum` over an ``(n, 2)`` array of points."""
    _check_beta(beta)
    if u < 0 or v < 0:
        raise ValueError("dilation exponents must be nonnegative")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    fam = maximal_family(omega, 2)
    if len(fam) == 0:
        return np.zeros(pts.shape[0])
    half1 = np.ldexp(fam.len1, u - 1)
    half2 = np.ldexp(fam.len2, v - 1)
    c1, c2 = fam.center1, fam.center2
    weight = np.exp2(beta * fam.gamma_exp) * fam.area
    return kernels.box_stab_sums(pts[:, 0], pts[:, 1], c1 - half1, c1 + half1,
                                 c2 - half2, c2 + half2, weight)


def geometric_sum(omega: GridOpenSet, x, u: int, v: int, beta: float) -> float:
    """``sum gamma_1(R)**beta |R|`` over R = I x J in M2 with x in 2**u I x 2**v J."""
    return float(geometric_sums(omega, [x], u, v, beta)[0])


def slice_measure(tilde: GridOpenSet, y: float) -> float:
    """Length of the horizontal slice ``{x1 : (x1, y) in tilde}``."""
    j = math.floor(math.ldexp(y, tilde.K))
    if j < 0 or j >= tilde.side:
        return 0.0
    return int(tilde.mask[:, j].sum()) * tilde.cell


def slice_function(tilde: GridOpenSet) -> np.ndarray:
    """All slice lengths, one per base row in ``x2``."""
    return tilde.mask.sum(axis=0) * tilde.cell


def _maximal_intervals(line: np.ndarray) -> list[tuple[int, int]]:
    """Maximal dyadic cell blocks ``(scale, position)`` inside a boolean line."""
    levels = [np.asarray(line, dtype=bool)]
    while levels[-1].shape[0] > 1:
        r = levels[-1]
        levels.append(r[0::2] & r[1::2])
    found = []
    for s, lev in enumerate(levels):
        if s + 1 < len(levels):
            maximal = lev & ~np.repeat(levels[s + 1], 2)
        else:
            maximal = lev
        found.extend((s, int(a)) for a in np.nonzero(maximal)[0])
    return found


def f_j_measure(omega: GridOpenSet, J: DyadicInterval, enlarged: GridOpenSet | None = None) -> float:
    """Measure of the union of maximal dyadic ``hat`` with ``hat x J`` inside the enlargement."""
    tilde = enlarge(omega) if enlarged is None else enlarged
    cols = J.cells(omega.K)
    if cols.start < 0 or cols.stop > omega.side:
        raise ValueError("J must lie inside the window")
    line = tilde.mask[:, cols].all(axis=1)
    return sum(math.ldexp(1.0, s) for s, _ in _maximal_intervals(line)) * omega.cell


@dataclass(frozen=True)
class StepFunction:
    """Nonnegative step function on the base grid of ``[0, 2**L)``."""

    L: int
    K: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (1 << (self.L + self.K),):
            raise ValueError("values must have one entry per base cell")
        if (vals < 0).any():
            raise ValueError("step function must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def cell(self) -> float:
        return math.ldexp(1.0, -self.K)

    @property
    def l1_norm(self) -> float:
        return float(self.values.sum()) * self.cell


def counting_sum(g: StepFunction, x: float, lam: float) -> tuple[float, float]:
    """``(sum |J| inf_J g over dyadic J with x in lam J, 6 lam ||g||_1)``.

    Only intervals inside the window with positive infimum contribute; all
    others have infimum zero.
    """
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    total = kernels.counting_sum(g.values, g.cell, float(x), float(lam))
    return float(total), 6.0 * lam * g.l1_norm


def annulus(I: DyadicInterval, u: int) -> tuple[tuple[float, float], ...]:
    """Dyadic ring ``E_u(I)`` as a tuple of half-open intervals.

    ``E_0(I) = 8I``; for ``u >= 4`` it is ``2**u I`` minus ``2**(u-1) I``.
    """
    if u in (1, 2, 3):
        raise ValueError("excluded annulus index")
    if u < 0:
        raise ValueError("annulus index must be nonnegative")
    if u == 0:
        return (I.dilate(8),)
    lo_out, hi_out = I.dilate(2.0 ** u)
    lo_in, hi_in = I.dilate(2.0 ** (u - 1))
    return (lo_out, lo_in), (hi_in, hi_out)


def annulus_indices(u_max: int) -> list[int]:
    """Admissible annulus indices ``0, 4, 5, ..., u_max``."""
    return [0] + list(range(4, u_max + 1))


def product_annulus(rect: DyadicRectangle, u: int, v: int):
    """``E_u(I) x E_v(J)`` as a list of boxes."""
    return [(a, b) for a in annulus(rect.first, u) for b in annulus(rect.second, v)]
