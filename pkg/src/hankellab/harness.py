"""Seeded corpora, experiment suites and report emission."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from hankellab import atoms, decay, dyadic, hankel, spectral
from hankellab.dyadic import DyadicInterval, DyadicRectangle, GridOpenSet, StepFunction

SUITES = ("journe", "counting", "annular", "geometric", "pairing", "besov-schatten")

# stability tolerance for constants that are only known to exist
DRIFT_TOL = 0.25
SCALE_TOL = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    seed: int = 0
    trials: int = 10
    # geometry
    L: int = 2
    K: int = 4
    rect_count: tuple[int, int] = (1, 16)
    scale_range: tuple[int, int] = (-3, -1)
    families: tuple[str, ...] = ("rectangles", "staircase")
    refine: bool = True
    # spectral
    Kp: int | None = None
    M_sweep: tuple[float, ...] = (2.0, 4.0, 8.0)
    side_exps: tuple[int, ...] = (-3, -2, -1, 0)
    blocks: tuple[int, ...] = tuple(range(-2, 6))
    patterns: tuple[str, ...] = ("haar", "random")
    # analysis
    p_values: tuple[float, ...] = (3.0,)
    delta: float = 0.25
    deltas: tuple[float, ...] = (0.25, 0.5, 1.0)
    betas: tuple[float, ...] = (0.25, 0.5, 0.75)
    u_max: int = 6
    v_max: int = 6
    u_values: tuple[int, ...] | None = None
    v_values: tuple[int, ...] | None = None
    points: int = 20
    lambdas: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    # hankel
    N_values: tuple[int, ...] = (8, 16, 32)
    alpha: float = 1.0
    out: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for p in self.p_values:
            if not p > 1:
                raise ValueError("p must exceed 1")
            beta = self.delta * (p - 1)
            if not 0 < beta < 1:
                raise ValueError(f"config violates \"beta := delta(p-1) < 1\": "
                                 f"delta={self.delta}, p={p} gives beta={beta}")
        for beta in self.betas:
            if not 0 < beta < 1:
                raise ValueError(f"config violates \"beta := delta(p-1) < 1\": beta={beta}")
        for d in self.deltas:
            if not d > 0:
                raise ValueError("Journe deltas must be positive")
        lo, hi = self.rect_count
        if not 0 <= lo <= hi:
            raise ValueError("rect_count must be an increasing pair of nonnegative integers")
        s_lo, s_hi = self.scale_range
        if not -self.K <= s_lo <= s_hi < self.L:
            raise ValueError("scale_range must lie in [-K, L)")
        for u in self.us + self.vs:
            if u in (1, 2, 3) or u < 0:
                raise ValueError("excluded annulus index")

    @property
    def q_values(self) -> tuple[float, ...]:
        return tuple(p / (p - 1.0) for p in self.p_values)

    @property
    def us(self) -> tuple[int, ...]:
        return tuple(self.u_values) if self.u_values is not None else tuple(dyadic.annulus_indices(self.u_max))

    @property
    def vs(self) -> tuple[int, ...]:
        return tuple(self.v_values) if self.v_values is not None else tuple(dyadic.annulus_indices(self.v_max))

    @property
    def atom_Kp(self) -> int:
        return self.Kp if self.Kp is not None else self.K + 1

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(data) - set(names)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in data.items()}
        return cls(**kw)

    @classmethod
    def load(cls, path, **overrides) -> ExperimentConfig:
        data = json.loads(Path(path).read_text()) if path else {}
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(self).items()}

    @property
    def hash(self) -> str:
        """Digest of everything that affects results (output path and threads excluded)."""
        body = {k: v for k, v in self.to_dict().items() if k not in ("out", "threads")}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------- corpora

@dataclass(frozen=True)
class OpenSetParams:
    L: int = 2
    K: int = 4
    count: tuple[int, int] = (1, 16)
    scale_range: tuple[int, int] = (-3, -1)
    family: str = "rectangles"
    margin: float | None = None   # defaults to the largest side

    @property
    def margin_value(self) -> float:
        return math.ldexp(1.0, self.scale_range[1]) if self.margin is None else self.margin


def random_open_set(seed: int, params: OpenSetParams | dict | None = None, count: int | None = None) -> GridOpenSet:
    """Seeded union of rectangles inside the window minus a margin.

    ``"rectangles"`` draws dyadic rectangles with independent side scales;
    ``"staircase"`` draws nested corner-anchored boxes whose widths increase
    while their heights decrease. ``count`` overrides the seeded count.
    """
    if params is None:
        params = OpenSetParams()
    elif isinstance(params, dict):
        params = OpenSetParams(**{k: tuple(v) if isinstance(v, list) else v for k, v in params.items()})
    rng = np.random.default_rng(seed)
    if count is None:
        count = int(rng.integers(params.count[0], params.count[1] + 1))
    L, K = params.L, params.K
    W = math.ldexp(1.0, L)
    lo_edge, hi_edge = params.margin_value, W - params.margin_value
    s_lo, s_hi = params.scale_range
    boxes = []
    if params.family == "rectangles":
        for _ in range(count):
            n1, n2 = (int(v) for v in rng.integers(s_lo, s_hi + 1, size=2))
            ivs = []
            for n in (n1, n2):
                h = math.ldexp(1.0, n)
                m_lo, m_hi = math.ceil(lo_edge / h), math.floor(hi_edge / h) - 1
                if m_hi < m_lo:
                    raise ValueError("margin leaves no room for the rectangle")
                ivs.append(DyadicInterval(int(rng.integers(m_lo, m_hi + 1)), n))
            r = DyadicRectangle(*ivs)
            boxes.append(((r.first.start, r.first.end), (r.second.start, r.second.end)))
    elif params.family == "staircase":
        unit = math.ldexp(1.0, s_lo)
        steps = int(round(math.ldexp(2.0, s_hi) / unit))
        count = min(count, steps)
        if count:
            widths = np.sort(rng.choice(np.arange(1, steps + 1), count, replace=False))
            heights = np.sort(rng.choice(np.arange(1, steps + 1), count, replace=False))[::-1]
            span = steps * unit
            c = [unit * int(rng.integers(math.ceil(lo_edge / unit), math.floor((hi_edge - span) / unit) + 1))
                 for _ in range(2)]
            for w, h in zip(widths, heights):
                boxes.append(((c[0], c[0] + w * unit), (c[1], c[1] + h * unit)))
    else:
        raise ValueError(f"unknown open-set family {params.family!r}")
    return GridOpenSet.from_boxes(L, K, boxes)


def random_symbol(seed: int, N: int, alpha: float = 0.0, zero_axis_excluded: bool = True) -> hankel.AnalyticSymbol:
    """Complex Gaussian coefficients under the envelope ``|kappa|**-alpha`` (1 at the origin)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    rng = np.random.default_rng(seed)
    n = 2 * N - 1
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hankel.AnalyticSymbol(N, raw * symbol_envelope(N, alpha), zero_axis_excluded)


def symbol_envelope(N: int, alpha: float) -> np.ndarray:
    k = np.arange(2 * N - 1)
    r = np.hypot(k[:, None], k[None, :])
    r[0, 0] = 1.0
    return r ** (-alpha)


def random_step_function(rng: np.random.Generator, L: int, K: int) -> StepFunction:
    """Nonnegative step function with random support runs and heavy-tailed heights."""
    n = 1 << (L + K)
    on = rng.random(n) < rng.uniform(0.2, 0.9)
    heights = rng.exponential(1.0, n) ** rng.uniform(1, 3)
    return StepFunction(L, K, np.where(on, heights, 0.0))


# ---------------------------------------------------------------- suites

SCHEMAS = {
    "counting": ["trial", "seed", "lam", "x", "l1", "lhs", "rhs", "ratio", "pass"],
    "journe": ["trial", "seed", "family", "K", "delta", "rects", "measure", "lhs", "rhs", "ratio", "pass"],
    "geometric": ["trial", "seed", "family", "K", "beta", "u", "v", "lhs", "rhs", "ratio", "pass"],
    "annular": ["trial", "seed", "pattern", "n1", "n2", "i", "j", "u", "v", "M",
                "lhs", "rhs", "ratio", "ratio_reduced", "rel_diff", "resolved", "pass"],
    "pairing": ["trial", "seed", "p", "rects", "Kp", "kind", "pieces", "lhs", "rhs", "ratio", "pass"],
    "besov-schatten": ["trial", "seed", "N", "p", "lhs", "rhs", "ratio", "pass"],
}


def _open_params(cfg: ExperimentConfig, family: str, K: int | None = None) -> OpenSetParams:
    return OpenSetParams(cfg.L, cfg.K if K is None else K, cfg.rect_count, cfg.scale_range, family)


def _ks(cfg: ExperimentConfig):
    return (cfg.K, cfg.K + 1) if cfg.refine else (cfg.K,)


def _counting_trial(cfg, trial, seed):
    rng = np.random.default_rng(seed)
    g = random_step_function(rng, cfg.L, cfg.K)
    x = float(rng.uniform(0, math.ldexp(1.0, cfg.L)))
    rows = []
    for lam in cfg.lambdas:
        lhs, rhs = dyadic.counting_sum(g, x, lam)
        rows.append(dict(trial=trial, seed=seed, lam=lam, x=x, l1=g.l1_norm, lhs=lhs, rhs=rhs,
                         ratio=lhs / rhs if rhs > 0 else 0.0, pass_=lhs <= rhs))
    return rows


def _journe_trial(cfg, trial, seed):
    rows = []
    for family in cfg.families:
        for K in _ks(cfg):
            omega = random_open_set(seed, _open_params(cfg, family, K))
            n_rects = len(dyadic.maximal_family(omega, 2))
            for delta in cfg.deltas:
                lhs = dyadic.journe_sum(omega, delta)
                m = omega.measure
                ratio = lhs / m if m > 0 else 0.0
                rows.append(dict(trial=trial, seed=seed, family=family, K=K, delta=delta, rects=n_rects,
                                 measure=m, lhs=lhs, rhs=m, ratio=ratio, pass_=math.isfinite(ratio)))
    return rows


def _sample_points(rng, omega: GridOpenSet, n: int) -> np.ndarray:
    """Half the points inside omega, half uniform in the window."""
    W = omega.window
    inside = np.argwhere(omega.mask)
    k_in = n // 2 if inside.size else 0
    pts = []
    if k_in:
        cells = inside[rng.integers(0, len(inside), k_in)]
        pts.append((cells + rng.random((k_in, 2))) * omega.cell)
    pts.append(rng.random((n - k_in, 2)) * W)
    return np.concatenate(pts)


def _geometric_trial(cfg, trial, seed):
    rows = []
    for family in cfg.families:
        # points are drawn once per family so both resolutions see the same x
        base = random_open_set(seed, _open_params(cfg, family))
        pts = _sample_points(np.random.default_rng([seed, 1]), base, cfg.points)
        for K in _ks(cfg):
            omega = random_open_set(seed, _open_params(cfg, family, K))
            m = omega.measure
            for beta in cfg.betas:
                for u in cfg.us:
                    for v in cfg.vs:
                        lhs = float(dyadic.geometric_sums(omega, pts, u, v, beta).max())
                        rhs = math.ldexp(m, u + v)
                        ratio = lhs / rhs if rhs > 0 else 0.0
                        rows.append(dict(trial=trial, seed=seed, family=family, K=K, beta=beta, u=u, v=v,
                                         lhs=lhs, rhs=rhs, ratio=ratio, pass_=math.isfinite(ratio)))
    return rows


def _annular_trial(cfg, trial, seed):
    """Trial 0 runs the Haar pattern and every trial a random pattern."""
    patterns = [pat for pat in cfg.patterns if pat != "haar" or trial == 0]
    q = cfg.q_values[0]
    rows = []
    reduced_cache = {}
    for pattern in patterns:
        coeffs = atoms.piece_pattern(pattern, seed)
        for n1 in cfg.side_exps:
            for n2 in cfg.side_exps:
                rect = decay.centered_rect(n1, n2)
                for i in cfg.blocks:
                    for j in cfg.blocks:
                        phys = decay.separable_decay(coeffs, *decay.physical_frames(rect, (i, j)), (i, j),
                                                     cfg.us, cfg.vs, q)
                        key = (pattern, i + n1, j + n2)
                        if key not in reduced_cache:
                            f1, f2 = decay.reduced_frames((i + n1, j + n2))
                            reduced_cache[key] = (decay.separable_decay(coeffs, f1, f2, (i + n1, j + n2),
                                                                        cfg.us, cfg.vs, q), f1.side, f2.side)
                        red, s1, s2 = reduced_cache[key]
                        unit = DyadicRectangle(s1, s2)
                        for (u, v), (lhs, norm) in phys.items():
                            lhs_r, norm_r = red[(u, v)]
                            a, b = lhs / norm, lhs_r / norm_r
                            scale = max(a, b)
                            rel = abs(a - b) / scale if scale > 0 else 0.0
                            resolved = scale >= ANNULAR_FLOOR
                            for M in cfg.M_sweep:
                                bound = decay.decay_bound(rect, (i, j), u, v, M)
                                rb = decay.decay_bound(unit, (i + n1, j + n2), u, v, M)
                                ratio, ratio_r = a / bound, b / rb
                                ok = math.isfinite(ratio) and (rel <= SCALE_TOL or not resolved)
                                rows.append(dict(trial=trial, seed=seed, pattern=pattern, n1=n1, n2=n2, i=i, j=j,
                                                 u=u, v=v, M=M, lhs=a, rhs=bound, ratio=ratio,
                                                 ratio_reduced=ratio_r, rel_diff=rel, resolved=resolved,
                                                 pass_=ok))
    return rows


# normalized local norms below this are at the roundoff floor of the 1-D transforms
ANNULAR_FLOOR = 1e-26


def _pairing_atom(omega: GridOpenSet, rng, q: float, delta: float, Kp: int, max_pieces: int = 8):
    fam = sorted(dyadic.maximal_rects(omega, 2), key=lambda r: (r.first.n, r.first.m, r.second.n, r.second.m))
    # 3R must stay inside the window for the sampled piece to be exact
    W = omega.window
    fam = [r for r in fam if all(lo >= 0 and hi <= W for lo, hi in atoms.triple(r))]
    if not fam:
        return None
    pick = rng.choice(len(fam), size=min(max_pieces, len(fam)), replace=False)
    pieces = []
    for k in sorted(pick):
        pattern = "haar" if rng.random() < 0.5 else "random"
        pieces.append(atoms.make_piece(fam[k], pattern, int(rng.integers(2 ** 31)), L=omega.L, Kp=Kp))
    return atoms.assemble_atom(omega, pieces, q, delta, Kp)


def _band_limit(f: spectral.GridFunction, cutoff: float) -> spectral.GridFunction:
    """Analytic part of ``f`` with both frequencies in ``(0, cutoff]``."""
    F = f.spectrum()
    k1, k2 = f.frequencies(0), f.frequencies(1)
    keep = np.outer((k1 > 0) & (k1 <= cutoff), (k2 > 0) & (k2 <= cutoff))
    return spectral.GridFunction.from_spectrum(F * keep, f.L, f.Kp)


def _pairing_trial(cfg, trial, seed):
    rows = []
    rng = np.random.default_rng(seed)
    lo, hi = cfg.rect_count
    # rectangle counts sweep powers of two so complexity classes double
    classes = [c for c in (1, 2, 4, 8, 16, 32) if lo <= c <= hi] or [lo]
    count = classes[trial % len(classes)]
    omega = random_open_set(seed, _open_params(cfg, "rectangles"), count=count)
    cutoff = math.ldexp(1.0, cfg.K - 1)
    Kps = (cfg.atom_Kp, cfg.atom_Kp + 1) if cfg.refine else (cfg.atom_Kp,)
    for p, q in zip(cfg.p_values, cfg.q_values):
        atom_seed = int(rng.integers(2 ** 63))
        f_seed = int(rng.integers(2 ** 63))
        for Kp in Kps:
            atom = _pairing_atom(omega, np.random.default_rng(atom_seed), q, cfg.delta, Kp)
            if atom is None:
                continue
            a = atom.function()
            band = int(cutoff * a.window[0]) + 1
            random_f = spectral.random_analytic(np.random.default_rng(f_seed), cfg.L, Kp, (band, band))
            for kind, f in (("aligned", _band_limit(a, cutoff)), ("random", random_f)):
                lhs, rhs, ratio = atoms.atom_bound_check(f, atom, p)
                rows.append(dict(trial=trial, seed=seed, p=p, rects=count, Kp=Kp, kind=kind,
                                 pieces=len(atom.pieces), lhs=lhs, rhs=rhs, ratio=ratio,
                                 pass_=math.isfinite(ratio)))
    return rows


def _besov_trial(cfg, trial, seed):
    rows = []
    for N in cfg.N_values:
        phi = random_symbol(seed, N, cfg.alpha)
        H = hankel.hankel_matrix(phi)
        for p in cfg.p_values:
            lhs = hankel.schatten_norm(H, p)
            rhs = hankel.besov_lattice_norm(phi, p)
            ratio = lhs / rhs
            rows.append(dict(trial=trial, seed=seed, N=N, p=p, lhs=lhs, rhs=rhs, ratio=ratio,
                             pass_=bool(0 < ratio < math.inf)))
    return rows


_TRIALS = {
    "counting": _counting_trial,
    "journe": _journe_trial,
    "geometric": _geometric_trial,
    "annular": _annular_trial,
    "pairing": _pairing_trial,
    "besov-schatten": _besov_trial,
}


# ---------------------------------------------------------------- aggregation

def _drift(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(b - a) / max(abs(a), abs(b))


def _maxby(rows, keyfn):
    out = {}
    for r in rows:
        k = keyfn(r)
        out[k] = max(out.get(k, 0.0), r["ratio"])
    return out


def _refinement(rows, keyfn, level, levels):
    """Max ratio per key at each resolution level, and the drift between consecutive levels."""
    stats = {}
    best = _maxby(rows, lambda r: (keyfn(r), r[level]))
    for key in sorted({k for k, _ in best}, key=str):
        vals = [best.get((key, lv), 0.0) for lv in levels]
        drifts = [_drift(a, b) for a, b in zip(vals, vals[1:])]
        stats[str(key)] = {"max_ratio": vals, "drift": drifts, "stable": all(d < DRIFT_TOL for d in drifts)}
    return stats


def _aggregate(cfg: ExperimentConfig, rows) -> tuple[dict, int]:
    failures = sum(not r["pass_"] for r in rows)
    agg: dict = {}
    suite = cfg.suite
    if suite == "journe":
        agg["refinement"] = _refinement(rows, lambda r: (r["family"], r["delta"]), "K", _ks(cfg))
    elif suite == "geometric":
        agg["per_beta"] = _refinement(rows, lambda r: r["beta"], "K", _ks(cfg))
        agg["per_family_beta"] = _refinement(rows, lambda r: (r["family"], r["beta"]), "K", _ks(cfg))
    elif suite == "annular":
        agg["max_ratio_per_M"] = {str(M): v for (M,), v in
                                  sorted(_maxby(rows, lambda r: (r["M"],)).items())}
        resolved = [r for r in rows if r["resolved"]]
        agg["max_ratio_resolved"] = max((r["ratio"] for r in resolved), default=0.0)
        agg["max_rel_diff"] = max((r["rel_diff"] for r in resolved), default=0.0)
        agg["unresolved"] = len(rows) - len(resolved)
        agg["stable"] = agg["max_rel_diff"] <= SCALE_TOL
    elif suite == "pairing":
        Kps = (cfg.atom_Kp, cfg.atom_Kp + 1) if cfg.refine else (cfg.atom_Kp,)
        agg["refinement"] = _refinement(rows, lambda r: r["p"], "Kp", Kps)
        agg["complexity"] = _complexity(rows)
    elif suite == "besov-schatten":
        agg["spread"] = _spread(rows, cfg)
    elif suite == "counting":
        agg["violations"] = failures
    stability_failures = _count_unstable(agg)
    return agg, failures + stability_failures


def _complexity(rows):
    """Cumulative max ratio as the rectangle budget doubles, per p."""
    out = {}
    for p in sorted({r["p"] for r in rows}):
        sub = [r for r in rows if r["p"] == p]
        counts = sorted({r["rects"] for r in sub})
        cum, series = 0.0, []
        for c in counts:
            cum = max([cum] + [r["ratio"] for r in sub if r["rects"] == c])
            series.append(cum)
        drifts = [(b - a) / a if a > 0 else 0.0 for a, b in zip(series, series[1:])]
        out[str(p)] = {"rects": counts, "max_ratio": series, "growth": drifts,
                       "stable": all(d < DRIFT_TOL for d in drifts)}
    return out


def _spread(rows, cfg):
    out = {}
    for p in cfg.p_values:
        series = []
        for N in cfg.N_values:
            vals = [r["ratio"] for r in rows if r["p"] == p and r["N"] == N]
            series.append((N, min(vals), max(vals), max(vals) / min(vals)))
        growth = [(b[3] - a[3]) / a[3] for a, b in zip(series, series[1:])]
        out[str(p)] = {"N": [s[0] for s in series], "min": [s[1] for s in series],
                       "max": [s[2] for s in series], "spread": [s[3] for s in series],
                       "growth": growth, "stable": all(g < DRIFT_TOL for g in growth)}
    return out


def _count_unstable(obj) -> int:
    if isinstance(obj, dict):
        own = 1 if obj.get("stable") is False else 0
        return own + sum(_count_unstable(v) for v in obj.values() if isinstance(v, dict))
    return 0


# ---------------------------------------------------------------- driver

@dataclass
class Report:
    config: ExperimentConfig
    rows: list
    aggregates: dict
    failures: int
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    @property
    def max_ratio(self) -> float:
        vals = [r["ratio"] for r in self.rows if math.isfinite(r["ratio"])]
        return max(vals, default=0.0)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def csv_text(self) -> str:
        cols = SCHEMAS[self.config.suite]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([_fmt(r["pass_" if c == "pass" else c]) for c in cols])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"header": {"created": self.created},
                "suite": self.config.suite, "config-hash": self.config.hash,
                "max_ratio": self.max_ratio, "failures": self.failures,
                "aggregates": self.aggregates}

    def body_json(self) -> str:
        """The summary without its timestamp header; byte-identical across reruns."""
        s = self.summary()
        del s["header"]
        return json.dumps(s, indent=2, sort_keys=True, default=_json_default)

    def write(self, out) -> tuple[Path, Path]:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        stem = out.with_suffix("") if out.suffix in (".csv", ".json") else out
        csv_path = stem.with_suffix(".csv")
        json_path = stem.with_suffix(".json")
        csv_path.write_text(self.csv_text())
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True, default=_json_default) + "\n")
        return csv_path, json_path


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def run_suite(config: ExperimentConfig) -> Report:
    """Run every trial (in parallel when ``threads > 1``) and aggregate in trial order."""
    fn = _TRIALS[config.suite]
    tasks = [(config, t, trial_seed(config.seed, t)) for t in range(config.trials)]
    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            chunks = list(pool.map(lambda a: fn(*a), tasks))
    else:
        chunks = [fn(*a) for a in tasks]
    rows = [r for chunk in chunks for r in chunk]
    agg, failures = _aggregate(config, rows)
    return Report(config, rows, agg, failures)
