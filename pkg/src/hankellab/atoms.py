"""Lq-normalized atoms adapted to open sets, and the pairing bounds they obey."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hankellab import dyadic, spectral
from hankellab.dyadic import DyadicRectangle, GridOpenSet
from hankellab.spectral import GridFunction

PIECE_CELLS = 6
DELTA_SWEEP = (0.25, 0.5, 1.0)


def piece_pattern(pattern: str, seed: int | None = None, cells: int = PIECE_CELLS) -> np.ndarray:
    """Coefficients of a piece on a ``cells x cells`` partition of 3R.

    ``"haar"`` is the tensor Haar function of R (cells covering R carry
    +-1); ``"random"`` is a seeded Gaussian field with row means and then
    column means removed, which makes both marginal sums vanish.
    """
    if cells % 6:
        raise ValueError("cells must be a multiple of 6 so R is a union of cells")
    if pattern == "haar":
        k = cells // 6
        h = np.zeros(cells)
        h[2 * k:3 * k] = 1.0
        h[3 * k:4 * k] = -1.0
        return np.outer(h, h)
    if pattern == "random":
        A = np.random.default_rng(seed).standard_normal((cells, cells))
        A = A - A.mean(axis=1, keepdims=True)
        return A - A.mean(axis=0, keepdims=True)
    raise ValueError(f"unknown piece pattern {pattern!r}")


def triple(rect: DyadicRectangle):
    """Concentric ``3R`` as ``((lo1, hi1), (lo2, hi2))``."""
    return rect.dilate(3)


def _axis_cells(coords, lo, width, cells, period):
    idx = np.floor(np.mod(coords - lo, period) / width).astype(np.int64)
    return np.where(idx < cells, idx, -1)


def paint(coeffs: np.ndarray, rect: DyadicRectangle, L, Kp) -> GridFunction:
    """Sample a cellwise-constant pattern on 3R onto a periodic grid."""
    g = GridFunction.zeros(L, Kp)
    n1, n2 = coeffs.shape
    out = np.zeros(g.shape)
    index = []
    for axis, side, n in ((0, rect.first, n1), (1, rect.second, n2)):
        width = 3 * side.length / n
        if width / g.spacing[axis] != int(width / g.spacing[axis]):
            raise ValueError("grid too coarse for the piece pattern")
        if 3 * side.length > g.window[axis]:
            raise ValueError("3R does not fit in the window")
        lo = side.center - 1.5 * side.length
        index.append(_axis_cells(g.coords(axis), lo, width, n, g.window[axis]))
    i1, i2 = index
    v1, v2 = i1 >= 0, i2 >= 0
    out[np.ix_(v1, v2)] = coeffs[np.ix_(i1[v1], i2[v2])]
    return GridFunction(out, g.L, g.Kp)


@dataclass(frozen=True)
class AtomPiece:
    rect: DyadicRectangle
    values: GridFunction
    direction: int = 2

    def lq_norm(self, q: float) -> float:
        return self.values.lq_norm(q)

    def support_mask(self) -> np.ndarray:
        return spectral.region_mask(self.values, _periodic_boxes(self.values, triple(self.rect)))

    def cancellation_residual(self) -> float:
        """Integrated marginal residuals relative to the L1 mass (0 for a zero piece)."""
        v = self.values.samples
        h1, h2 = self.values.spacing
        l1 = float(np.abs(v).sum()) * h1 * h2
        if l1 == 0:
            return 0.0
        rows = np.abs(v.sum(axis=0) * h1).sum() * h2
        cols = np.abs(v.sum(axis=1) * h2).sum() * h1
        return float(max(rows, cols) / l1)


def _periodic_boxes(g: GridFunction, box):
    """Split a box that may wrap around the torus into in-window boxes."""
    parts = []
    for axis, (lo, hi) in enumerate(box):
        w = g.window[axis]
        lo_m = lo % w
        hi_m = lo_m + (hi - lo)
        if hi - lo >= w:
            parts.append([(0.0, w)])
        elif hi_m <= w:
            parts.append([(lo_m, hi_m)])
        else:
            parts.append([(lo_m, w), (0.0, hi_m - w)])
    return [(a, b) for a in parts[0] for b in parts[1]]


def make_piece(rect: DyadicRectangle, pattern: str = "haar", seed: int | None = None, *,
               L: int, Kp: int, direction: int = 2, cells: int = PIECE_CELLS) -> AtomPiece:
    """A cancellative piece supported in 3R, sampled on the ``(L, Kp)`` grid."""
    return AtomPiece(rect, paint(piece_pattern(pattern, seed, cells), rect, L, Kp), direction)


@dataclass(frozen=True)
class Atom:
    omega: GridOpenSet
    pieces: tuple[AtomPiece, ...]
    q: float
    delta: float
    Kp: int
    scale: float = 1.0

    @property
    def grid(self) -> tuple[int, int]:
        return self.omega.L, self.Kp

    def function(self) -> GridFunction:
        total = GridFunction.zeros(*self.grid)
        for piece in self.pieces:
            total = total + piece.values
        return total * self.scale

    def scaled(self, c: float) -> Atom:
        return Atom(self.omega, self.pieces, self.q, self.delta, self.Kp, self.scale * c)


def _gamma_lookup(omega: GridOpenSet, direction: int) -> dict[DyadicRectangle, float]:
    fam = dyadic.maximal_family(omega, direction)
    return dict(zip(fam.rects(), fam.gamma.tolist()))


def weighted_piece_norm(atom_or_pieces, omega: GridOpenSet, q: float, delta: float,
                        scale: float = 1.0) -> float:
    """``(sum gamma(R)**-delta ||a_R||_q**q)**(1/q)`` over the pieces."""
    pieces = atom_or_pieces.pieces if isinstance(atom_or_pieces, Atom) else atom_or_pieces
    gammas = {d: _gamma_lookup(omega, d) for d in (1, 2)}
    total = 0.0
    for piece in pieces:
        gamma = gammas[piece.direction].get(piece.rect)
        if gamma is None:
            raise ValueError("piece not adapted")
        total += gamma ** (-delta) * (abs(scale) * piece.lq_norm(q)) ** q
    return total ** (1.0 / q)


def _norm_bound(omega: GridOpenSet, q: float) -> float:
    if omega.measure == 0:
        return math.inf
    return omega.measure ** (1.0 / q - 1.0)


def assemble_atom(omega: GridOpenSet, pieces, q: float, delta: float, Kp: int | None = None) -> Atom:
    """Rescale pieces so both the global and the weighted bound hold with constant 1."""
    if not 1 < q < 2:
        raise ValueError("q must lie in (1, 2)")
    if not delta > 0:
        raise ValueError("delta must be positive")
    pieces = tuple(pieces)
    if Kp is None:
        Kp = pieces[0].values.Kp[0] if pieces else omega.K + 1
    for piece in pieces:
        if piece.values.L != (omega.L, omega.L) or piece.values.Kp != (Kp, Kp):
            raise ValueError("pieces must be sampled on the atom grid")
        if not omega.contains(piece.rect) or piece.rect not in _gamma_lookup(omega, piece.direction):
            raise ValueError("piece not adapted")
    atom = Atom(omega, pieces, q, delta, Kp)
    weighted = weighted_piece_norm(pieces, omega, q, delta)
    glob = atom.function().lq_norm(q)
    worst = max(weighted, glob)
    if worst == 0:
        return atom
    return atom.scaled(_norm_bound(omega, q) / worst)


@dataclass
class AtomReport:
    support_ok: bool
    global_ok: bool
    weighted_ok: bool
    cancellation_ok: bool
    margins: dict = field(default_factory=dict)
    support_excess: float = 0.0

    @property
    def ok(self) -> bool:
        return self.support_ok and self.global_ok and self.weighted_ok and self.cancellation_ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "support_ok": self.support_ok, "global_ok": self.global_ok,
                "weighted_ok": self.weighted_ok, "cancellation_ok": self.cancellation_ok,
                "support_excess": self.support_excess,
                "margins": {k: (v if math.isfinite(v) else str(v)) for k, v in self.margins.items()}}


def _slack(bound: float, value: float) -> float:
    """Relative slack ``bound / value - 1``; infinite when value is zero."""
    if value == 0:
        return math.inf
    return bound / value - 1.0


def validate_atom(atom: Atom, rtol: float = 1e-12, cancel_tol: float = 1e-12) -> AtomReport:
    """Check every atom condition; failures are reported, never raised."""
    a = atom.function()
    bound = _norm_bound(atom.omega, atom.q)
    margins = {}

    allowed = np.zeros(a.shape, dtype=bool)
    for piece in atom.pieces:
        allowed |= piece.support_mask()
    nonzero = np.abs(a.samples) > 0
    support_ok = not bool((nonzero & ~allowed).any())
    # omega's base cells on the atom grid
    f = 1 << (atom.Kp - atom.omega.K)
    omega_fine = np.repeat(np.repeat(atom.omega.mask, f, 0), f, 1)
    support_excess = float((nonzero & ~omega_fine).sum()) * a.cell_area

    margins["global"] = _slack(bound, a.lq_norm(atom.q))
    global_ok = margins["global"] >= -rtol
    try:
        for d in sorted(set(DELTA_SWEEP) | {atom.delta}):
            margins[f"weighted[delta={d:g}]"] = _slack(
                bound, weighted_piece_norm(atom, atom.omega, atom.q, d, atom.scale))
        weighted_ok = margins[f"weighted[delta={atom.delta:g}]"] >= -rtol
    except ValueError:
        weighted_ok = False
    residual = max((p.cancellation_residual() for p in atom.pieces), default=0.0)
    margins["cancellation"] = residual
    cancellation_ok = residual <= cancel_tol
    return AtomReport(support_ok, global_ok, weighted_ok, cancellation_ok, margins, support_excess)


def pair(f: GridFunction, a: Atom | GridFunction) -> complex:
    """Window inner product ``integral f * conj(a)``."""
    g = a.function() if isinstance(a, Atom) else a
    return f.inner(g)


def pair_spectral(f: GridFunction, a: Atom | GridFunction) -> complex:
    g = a.function() if isinstance(a, Atom) else a
    return f.inner_spectral(g)


def _dual(p: float) -> float:
    if p <= 1:
        raise ValueError("p must exceed 1")
    return p / (p - 1.0)


def _annulus_indices(side: dyadic.DyadicInterval, window: float) -> list[int]:
    """Annulus indices until the inner dilate covers the whole window."""
    us = [0]
    u = 4
    while side.length * 2.0 ** (u - 1) < 2 * window:
        us.append(u)
        u += 1
    return us


def _clip(boxes, window):
    out = []
    for (lo1, hi1), (lo2, hi2) in boxes:
        a1, b1 = max(lo1, 0.0), min(hi1, window[0])
        a2, b2 = max(lo2, 0.0), min(hi2, window[1])
        if a1 < b1 and a2 < b2:
            out.append(((a1, b1), (a2, b2)))
    return out


def piece_bound_check(f: GridFunction, piece: AtomPiece, p: float,
                      S: GridFunction | None = None) -> tuple[float, float, float]:
    """``|<f, a_R>|`` against the annular right-hand side.

    ``S`` may carry a precomputed square function of ``f``.
    """
    q = _dual(p)
    lhs = abs(f.inner(piece.values))
    S = spectral.square_function(f, p) if S is None else S
    Sp = np.abs(S.samples) ** p
    rect = piece.rect
    total = 0.0
    for u in _annulus_indices(rect.first, f.window[0]):
        for v in _annulus_indices(rect.second, f.window[1]):
            boxes = _clip(dyadic.product_annulus(rect, u, v), f.window)
            if not boxes:
                continue
            mass = float(Sp[spectral.region_mask(S, boxes)].sum()) * S.cell_area
            total += 2.0 ** (-(u + v) / q) * mass ** (1.0 / p)
    rhs = rect.area ** (1.0 / p) * piece.lq_norm(q) * total
    return lhs, rhs, (lhs / rhs if rhs > 0 else 0.0)


def atom_bound_check(f: GridFunction, atom: Atom, p: float,
                     besov: float | None = None) -> tuple[float, float, float]:
    """``|<f, a>|`` against ``||f||_B``; the ratio witnesses the dual inequality."""
    q = _dual(p)
    if abs(q - atom.q) > 1e-12:
        raise ValueError("atom exponent q must be the dual of p")
    if not validate_atom(atom).ok:
        raise ValueError("invalid atom")
    lhs = abs(pair(f, atom))
    rhs = spectral.besov_norm(f, p) if besov is None else besov
    return lhs, rhs, (lhs / rhs if rhs > 0 else 0.0)


def save_atom(atom: Atom, path) -> None:
    """Write a JSON manifest next to the open set and per-piece binaries."""
    path = Path(path)
    stem = path.with_suffix("")
    omega_path = stem.parent / f"{stem.name}.omega.json"
    omega_path.write_text(atom.omega.to_json())
    pieces = []
    for k, piece in enumerate(atom.pieces):
        data_path = stem.parent / f"{stem.name}.piece{k:03d}.bin"
        data_path.write_bytes(piece.values.to_bytes())
        pieces.append({"rect": piece.rect.to_list(), "direction": piece.direction,
                       "data": data_path.name})
    manifest = {"omega": omega_path.name, "q": atom.q, "delta": atom.delta, "Kp": atom.Kp,
                "scale": atom.scale, "pieces": pieces}
    path.write_text(json.dumps(manifest, indent=2))


def load_atom(path) -> Atom:
    path = Path(path)
    meta = json.loads(path.read_text())
    base = path.parent
    omega = GridOpenSet.from_json((base / meta["omega"]).read_text())
    pieces = tuple(
        AtomPiece(DyadicRectangle.from_list(p["rect"]),
                  GridFunction.from_bytes((base / p["data"]).read_bytes()),
                  int(p.get("direction", 2)))
        for p in meta["pieces"])
    return Atom(omega, pieces, float(meta["q"]), float(meta["delta"]),
                int(meta.get("Kp", omega.K + 1)), float(meta.get("scale", 1.0)))
