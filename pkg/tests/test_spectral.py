import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankellab import spectral
from hankellab.spectral import BUMP, GridFunction


def rand_fn(seed, L=1, Kp=3, analytic=False):
    rng = np.random.default_rng(seed)
    if analytic:
        return spectral.random_analytic(rng, L, Kp)
    shape = GridFunction.zeros(L, Kp).shape
    return GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), L, Kp)


# ------------------------------------------------------------------ grid functions

def test_roundtrip_and_parseval():
    f = rand_fn(0)
    back = GridFunction.from_spectrum(f.spectrum(), f.L, f.Kp)
    assert np.abs(back.samples - f.samples).max() <= 1e-12 * np.abs(f.samples).max()
    assert f.l2_norm_spectral() == pytest.approx(f.lq_norm(2), rel=1e-12)


@pytest.mark.parametrize("space", ["spatial", "spectral"])
def test_binary_roundtrip(space):
    f = rand_fn(1, L=(1, 2), Kp=(2, 1))
    blob = f.to_bytes(space)
    header = blob.split(b"\n", 1)[0].decode()
    assert '"layout": "row-major"' in header and f'"space": "{space}"' in header
    g = GridFunction.from_bytes(blob)
    assert g.same_grid(f)
    assert np.allclose(g.samples, f.samples, rtol=0, atol=1e-12)


def test_shape_checked():
    with pytest.raises(ValueError):
        GridFunction(np.zeros((4, 4)), 1, 2)
    with pytest.raises(ValueError):
        rand_fn(0) + rand_fn(0, Kp=2)


def test_inner_matches_spectral():
    f, g = rand_fn(2), rand_fn(3)
    assert f.inner(g) == pytest.approx(f.inner_spectral(g), rel=1e-12)


# ------------------------------------------------------------------ bumps

def test_bump_examples():
    assert BUMP.psi(1.0) == 1.0
    assert BUMP.psi(0.5) == 0.0 and BUMP.psi(2.0) == 0.0
    for xi in (0.7, 1.0, 3.3):
        total = sum(BUMP.psi(math.ldexp(xi, -j)) for j in range(-10, 11))
        assert abs(total - 1) <= 1e-12


def test_bump_supports():
    xi = np.linspace(0.01, 8, 4001)
    assert (BUMP.psi(xi)[(xi <= 0.5) | (xi >= 2)] == 0).all()
    assert (BUMP.psi_tilde(xi)[(xi <= 0.25) | (xi >= 4)] == 0).all()
    assert (BUMP.psi(xi) >= 0).all() and (BUMP.psi(xi) <= 1).all()


def test_psi_tilde_is_one_on_support_of_psi():
    xi = np.linspace(0.5, 2.0, 1000)
    assert np.abs(BUMP.psi_tilde(xi) - 1).max() <= 1e-12


def test_partition_of_unity_on_lattice():
    f = GridFunction.zeros(2, 6)
    xi = f.frequencies(0)
    pos = xi[xi > 0]
    total = sum(BUMP.psi_j(j, pos) for j in spectral.block_range(f, 0))
    assert np.abs(total - 1).max() <= 1e-12


def test_out_of_range_blocks_vanish():
    f = GridFunction.zeros(1, 3)
    xi = f.frequencies(0)
    for j in (-3, -2, 3, 4):
        assert not BUMP.psi_j(j, xi).any()


def test_kernel_spectrum():
    k = BUMP.kernel(1, 3)
    f = GridFunction.zeros(1, 3)
    m = np.outer(BUMP.psi_tilde(f.frequencies(0)), BUMP.psi_tilde(f.frequencies(1)))
    assert np.allclose(k.spectrum() * k.area, m, atol=1e-12)


# ------------------------------------------------------------------ projections

def tone(a, b, L=1, Kp=4):
    # frequency (2**a, 2**b) sits at lattice index 2**(a + L)
    return GridFunction.tone(2 ** (a + L), 2 ** (b + L), L, Kp)


def test_block_project_tone():
    f = tone(1, 0)
    assert np.allclose(spectral.block_project(f, (1, 0)).samples, f.samples, atol=1e-12)
    for b in [(0, 0), (2, 0), (1, 1), (1, -1)]:
        assert np.abs(spectral.block_project(f, b).samples).max() < 1e-12
    assert not spectral.block_project(GridFunction.zeros(1, 3), (0, 0)).samples.any()


def test_tilde_after_plain_is_plain():
    f = rand_fn(4, analytic=True)
    for b in [(0, 0), (-1, 1), (2, 1)]:
        plain = spectral.block_project(f, b)
        both = spectral.block_project(plain, b, "tilde")
        assert np.allclose(both.samples, plain.samples, atol=1e-12)


def test_single_axis_projection():
    f = rand_fn(5, analytic=True)
    step = spectral.block_project(spectral.block_project(f, (1, 0), axis=1), (0, 2), axis=2)
    assert np.allclose(step.samples, spectral.block_project(f, (1, 2)).samples, atol=1e-12)


def test_adjoint_equals_tilde():
    # real even multiplier: <T f, g> = <f, T g>
    f, g = rand_fn(6), rand_fn(7)
    b = (1, -1)
    lhs = spectral.block_project(f, b, "tilde").inner(g)
    rhs = f.inner(spectral.block_project(g, b, "tilde"))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_reproduce():
    assert spectral.reproduce(GridFunction.zeros(1, 3))[1] == 0
    f = tone(0, 1)
    rec, err = spectral.reproduce(f)
    assert err < 1e-14
    for seed in range(5):
        assert spectral.reproduce(rand_fn(seed, L=1, Kp=5, analytic=True))[1] <= 1e-8
    with pytest.raises(ValueError, match="zero-frequency component uncovered"):
        spectral.reproduce(GridFunction.tone(0, 3, 1, 3))


# ------------------------------------------------------------------ square function and Besov norm

@pytest.mark.parametrize("p", [1, 2, 3.5])
def test_tone_closed_forms(p):
    a, b, L = 1, -1, 1
    f = tone(a, b, L)
    S = spectral.square_function(f, p)
    assert np.allclose(S.samples, 2 ** ((a + b) / p), rtol=1e-12)
    assert spectral.besov_norm(f, p) == pytest.approx(2 ** ((a + b) / p) * 4 ** (L / p), rel=1e-12)


def test_square_function_homogeneity_and_errors():
    f = rand_fn(8, analytic=True)
    S1 = spectral.square_function(f, 3)
    S2 = spectral.square_function(f * (2 - 1j), 3)
    assert np.allclose(S2.samples, abs(2 - 1j) * S1.samples, rtol=1e-12)
    assert spectral.besov_norm(GridFunction.zeros(1, 3), 2) == 0
    with pytest.raises(ValueError):
        spectral.square_function(f, 0.5)


@pytest.mark.parametrize("p", [2, 3])
def test_besov_dilation_invariant(p):
    f = rand_fn(9, L=1, Kp=4, analytic=True)
    assert spectral.besov_norm(f.dilate(2), p) == pytest.approx(spectral.besov_norm(f, p), rel=1e-12)


# ------------------------------------------------------------------ analytic projection, involution

def test_analytic_projection():
    f = rand_fn(10)
    P = spectral.analytic_project
    assert np.allclose(P(P(f)).samples, P(f).samples, atol=1e-12)
    g = rand_fn(11)
    assert P(f).inner(g) == pytest.approx(f.inner(P(g)), rel=1e-12)
    a = rand_fn(12, analytic=True)
    assert np.allclose(P(a).samples, a.samples, atol=1e-12)


def test_analytic_projection_of_cosines():
    L, Kp = 1, 3
    z = GridFunction.zeros(L, Kp)
    x1 = z.coords(0)[:, None] / z.window[0]
    x2 = z.coords(1)[None, :] / z.window[1]
    f = GridFunction(np.cos(2 * np.pi * x1) * np.cos(2 * np.pi * x2), L, Kp)
    expected = 0.25 * np.exp(2j * np.pi * (x1 + x2))
    assert np.allclose(spectral.analytic_project(f).samples, expected, atol=1e-12)


def test_involution():
    f = rand_fn(13)
    J = spectral.involution
    assert np.array_equal(J(J(f)).samples, f.samples)
    t = GridFunction.tone(3, 1, 1, 2)
    assert np.allclose(J(t).samples, GridFunction.tone(-3, -1, 1, 2).samples, atol=1e-12)
    assert not J(GridFunction.zeros(1, 2)).samples.any()


# ------------------------------------------------------------------ local norms

def test_local_norm_examples():
    L, Kp = 3, 2
    # E_00(R) = 8I x 8J for R = [3.75, 4.25)**2, so 64|R| = 16
    R_boxes = [((2.0, 6.0), (2.0, 6.0))]
    ones = GridFunction(np.ones((32, 32)), L, Kp)
    for q in (1.5, 2):
        assert spectral.local_norm(ones, R_boxes, q) == pytest.approx((16.0) ** (1 / q))
        assert spectral.local_norm(ones, [((0, 8), (0, 8))], q) == pytest.approx(ones.lq_norm(q))
    assert spectral.local_norm(GridFunction.zeros(L, Kp), R_boxes, 2) == 0
    with pytest.raises(ValueError):
        spectral.local_norm(ones, R_boxes, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_analytic_has_open_quadrant_spectrum(seed):
    f = rand_fn(seed, analytic=True)
    F = f.spectrum()
    k1, k2 = f.frequencies(0), f.frequencies(1)
    off = ~np.outer(k1 > 0, k2 > 0)
    assert np.abs(F[off]).max() < 1e-12
