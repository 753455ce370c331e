import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from gprotor.ehrenfest import (BOUNDED, EXPONENTIAL, LINEAR, MomentState, build_generator,
                               char_poly_coeffs, classify_general_omega, classify_growth, expm,
                               expm_eig, propagate_moments, resonant_subspace)
from gprotor.errors import ConfigurationError, NoResonanceError
from gprotor.field import ProblemParams

RES = ProblemParams((1.0, 2.0), (0.0, 0.0, 1.5))


def test_generator_blocks():
    M = build_generator(RES)
    assert np.allclose(M, [[0, 1.5, 1, 0], [-1.5, 0, 0, 1], [-1, 0, 0, 1.5], [0, -4, -1.5, 0]])


def test_char_poly_matches_matrix():
    b, c, D = char_poly_coeffs(RES)
    assert (b, c, D) == (9.5, -2.1875, 99.0)
    assert np.allclose(np.poly(build_generator(RES)), [1, 0, b, 0, c], atol=1e-12)


def test_resonant_rate():
    gc = classify_growth(RES)
    assert gc.regime == EXPONENTIAL and gc.dim_H == 2
    assert abs(gc.rate - 0.4742754321) < 1e-9
    eig = np.linalg.eigvals(build_generator(RES)).real.max()
    assert abs(gc.rate - eig) < 1e-9


@pytest.mark.parametrize("omegas, W, regime", [
    ((1.0, 1.0), 0.0, BOUNDED), ((1.0, 1.0), 1.0, BOUNDED), ((1.0, 2.0), 1.0, LINEAR),
    ((1.0, 2.0), 2.0, LINEAR), ((1.0, 2.0), 0.5, BOUNDED), ((1.0, 2.0), 2.5, BOUNDED),
    ((2.0, 1.0), 1.5, EXPONENTIAL)])
def test_regimes(omegas, W, regime):
    assert classify_growth(ProblemParams(omegas, (0, 0, W))).regime == regime


def test_3d_axis_aligned_uses_plane():
    p = ProblemParams((3.0, 1.0, 2.0), (1.5, 0.0, 0.0))   # plane (x2, x3) with omegas (1, 2)
    gc = classify_growth(p)
    assert gc.regime == EXPONENTIAL and abs(gc.rate - classify_growth(RES).rate) < 1e-12
    assert gc.dim_H == 4


def _random_params(rng):
    w = rng.uniform(0.2, 3.0, 2)
    W = rng.uniform(0.0, 3.5)
    return ProblemParams(tuple(w), (0, 0, W))


def test_formula_and_eigensolve_agree(rng):
    for _ in range(200):
        p = _random_params(rng)
        a, b = classify_growth(p), classify_general_omega(p)
        assert a.regime == b.regime
        assert abs(a.rate - b.rate) <= 1e-9 * max(1.0, a.rate)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.0, 3.5))
def test_spectrum_symmetric(w1, w2, W):
    lam = np.linalg.eigvals(build_generator(ProblemParams((w1, w2), (0, 0, W))))
    for z in lam:
        assert np.abs(lam + z).min() < 1e-6 * max(1, abs(z))
        assert np.abs(lam - np.conj(z)).min() < 1e-6 * max(1, abs(z))
    _, _, D = char_poly_coeffs(ProblemParams((w1, w2), (0, 0, W)))
    if W > 1e-6 or abs(w1 - w2) > 1e-6:
        assert D > 0


def test_bounded_plateau(rng):
    p = ProblemParams((1.0, 2.0), (0, 0, 0.5))
    M = build_generator(p)
    norms = []
    for t in np.linspace(0, 100, 101):
        E = expm(t * M)
        norms.append(max(np.linalg.norm(E @ (x / np.linalg.norm(x)))
                         for x in rng.standard_normal((20, 4))))
    norms = np.array(norms)
    assert norms.max() < 20
    assert norms[50:].max() < 1.5 * norms[:51].max()


def test_expm_matches_scipy(rng):
    for scale in (1e-3, 1.0, 30.0):
        A = scale * rng.standard_normal((6, 6))
        ref = scipy.linalg.expm(A)
        assert np.allclose(expm(A), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())
    M = build_generator(RES)
    assert np.allclose(expm_eig(3.0 * M), expm(3.0 * M), rtol=1e-10)


def test_expm_defective_case():
    M = build_generator(ProblemParams((1.0, 2.0), (0, 0, 1.0)))
    assert np.allclose(expm(5.0 * M), scipy.linalg.expm(5.0 * M), rtol=1e-12, atol=1e-12)


def test_propagation_independent_of_interaction():
    Xi0 = np.array([0.5, 0.0, 0.1, -0.2])
    outs = [np.array([s.Xi for s in propagate_moments(Xi0, RES.replace(a=a, sigma=0.5), [0, 1, 7])])
            for a in (-0.1, 0.0, 1.0, 5.0)]
    assert all(np.array_equal(outs[0], o) for o in outs[1:])


def test_propagation_linear_and_states():
    Xi0 = np.array([0.5, 0.2, 0.0, 0.1])
    a = propagate_moments(Xi0, RES, [2.0])[0]
    b = propagate_moments(10 * Xi0, RES, [2.0])[0]
    assert np.allclose(b.Xi, 10 * a.Xi)
    s = MomentState(0.0, np.arange(4.0))
    assert np.array_equal(s.X, [0, 1]) and np.array_equal(s.P, [2, 3])
    with pytest.raises(ConfigurationError):
        propagate_moments(np.zeros(3), RES, [1.0])


def test_general_rotation_3d():
    p = ProblemParams((1.0, 2.0, 1.5), (0.3, 0.5, 1.2))
    gc = classify_general_omega(p)
    assert gc.beyond_axis_aligned and not gc.indeterminate
    lam = np.linalg.eigvals(build_generator(p))
    assert abs(gc.rate - max(0.0, lam.real.max())) < 1e-12
    with pytest.raises(ConfigurationError):
        classify_growth(p)


def test_general_omega_flags_defective_zero():
    gc = classify_general_omega(ProblemParams((1.0, 2.0, 3.0), (0.0, 0.0, 2.0)))
    assert gc.regime == LINEAR and gc.dim_H == 5


def test_exponential_subspace():
    rs = resonant_subspace(RES)
    M = build_generator(RES)
    lam = classify_growth(RES).rate
    assert rs.dim == 2
    (lp, rp), (lm, rm) = rs.growing_modes
    assert np.allclose(M @ rp, lam * rp) and np.allclose(M @ rm, -lam * rm)
    assert np.allclose(M.T @ lp, lam * lp) and abs(lp @ rp - 1) < 1e-12
    for v in rs.H_basis.T:
        assert rs.contains(v)
        norms = [np.linalg.norm(s.Xi) for s in propagate_moments(v, RES, np.linspace(0, 50, 51))]
        assert max(norms) < 10 * np.linalg.norm(v)
    assert not rs.contains(np.array([1.0, 0, 0, 0]))


def test_linear_subspace_chain():
    p = ProblemParams((1.0, 2.0), (0, 0, 1.0))
    rs = resonant_subspace(p)
    M = build_generator(p)
    assert rs.dim == 3
    assert np.allclose(M @ rs.defective_direction, 0, atol=1e-12)
    assert np.allclose(M @ rs.generalized_vector, rs.defective_direction, atol=1e-12)
    # data in H stays bounded; the generalized vector grows linearly
    for v in rs.H_basis.T:
        norms = [np.linalg.norm(s.Xi) for s in propagate_moments(v, p, np.linspace(0, 50, 51))]
        assert max(norms) < 10
    far = propagate_moments(rs.generalized_vector, p, [100.0])[0]
    assert np.linalg.norm(far.Xi) > 50


def test_bounded_has_no_subspace():
    with pytest.raises(NoResonanceError):
        resonant_subspace(ProblemParams((1.0, 1.0), (0, 0, 0.5)))


@pytest.mark.parametrize("W, T", [(1.0, 500.0), (1.5, 30.0)])
def test_position_and_momentum_grow_separately(W, T, rng):
    p = ProblemParams((1.0, 2.0), (0, 0, W))
    for _ in range(20):
        xi0 = rng.standard_normal(4)
        sign = max((1.0, -1.0), key=lambda s: np.linalg.norm(
            propagate_moments(xi0, p, [s * T])[0].Xi))
        mid, end = propagate_moments(xi0, p, [sign * T, 2 * sign * T])
        assert np.linalg.norm(end.X) > 1.5 * np.linalg.norm(mid.X)
        assert np.linalg.norm(end.P) > 1.5 * np.linalg.norm(mid.P)


def test_orthogonal_complement_is_not_the_nongrowing_set():
    # M is not normal: the complement of the real eigenvectors contains growing data
    rs = resonant_subspace(RES)
    leaks = [not rs.contains(v, tol=1e-8) for v in rs.complement_basis.T]
    assert any(leaks)
