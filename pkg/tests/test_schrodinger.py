"""Tridiagonal discretization, Sturm bisection, inverse iteration,
Richardson extrapolation."""
import math

import numpy as np
import pytest
from mpmath import mp

from isospec.dd import ExtendedReal
from isospec.potentials import HARMONIC, default_pair
from isospec.schrodinger import (
    EigenfunctionSamples,
    GridSpec,
    Spectrum,
    choose_domain,
    discretize,
    eigenfunction,
    eigenfunction_extrapolated,
    eigenvalue,
    eigenvalue_sequence,
    extrapolate_sequence,
    solve_extrapolated,
    spectrum,
    sturm_count,
)

mp.dps = 60


class ZeroPotential:
    """Free particle in the box; the discrete spectrum is known exactly."""

    def eval_arrays(self, xh, xl=None):
        z = np.zeros_like(xh)
        return z, z


def to_mp(x: ExtendedReal):
    return mp.mpf(x.hi) + mp.mpf(x.lo)


# ---------------------------------------------------------------------------
# grids and discretization

def test_grid_points_and_spacing():
    g = GridSpec(1.0, 3)
    assert g.spacing == 0.5
    assert np.allclose(g.points(), [-0.5, 0.0, 0.5])


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0.0, 10)
    with pytest.raises(ValueError):
        GridSpec(1.0, 0)


def test_refinement_shares_coarse_points_exactly():
    g = GridSpec(12.0, 2048)
    f = g.refined()
    assert f.n == 2 * g.n + 1
    assert f.spacing == g.spacing / 2  # exact float halving
    assert np.array_equal(g.points(), f.points()[1::2])


def test_single_point_discretization():
    # V = x^2, h = 1, L = 1, n = 1: one interior point at 0, entry 2h^2/dx^2
    T = discretize(HARMONIC, 1.0, GridSpec(1.0, 1))
    assert T.diag_hi[0] == 2.0 and T.diag_lo[0] == 0.0
    assert T.off_hi.shape == (0,)


def test_discretize_puts_potential_on_diagonal():
    g = GridSpec(2.0, 3)
    T = discretize(HARMONIC, 1.0, g)
    dx = g.spacing
    assert np.allclose(T.diag_hi, 2.0 / dx**2 + g.points() ** 2)
    assert np.allclose(T.off_hi, -1.0 / dx**2)


# ---------------------------------------------------------------------------
# Sturm counts and bisection

def test_sturm_count_monotone_and_edges():
    T = discretize(HARMONIC, 1.0, GridSpec(8.0, 101))
    glo, ghi = T.gershgorin()
    assert sturm_count(T, glo) == 0
    assert sturm_count(T, ghi) == 101
    counts = [sturm_count(T, lam) for lam in (0.5, 2.0, 4.0, 6.0, 8.0)]
    assert counts == [0, 1, 2, 3, 4]  # harmonic levels 1, 3, 5, 7 approx


def test_box_eigenvalues_match_discrete_closed_form():
    # FD Laplacian on n points: lambda_k = (4 h^2/dx^2) sin^2(k pi / (2(n+1)))
    n = 101
    g = GridSpec(1.0, n)
    T = discretize(ZeroPotential(), 1.0, g)
    dx = mp.mpf(g.spacing)
    for k in (1, 2, 51, 101):
        lam = eigenvalue(T, k - 1)
        exact = 4 / dx**2 * mp.sin(k * mp.pi / (2 * (n + 1))) ** 2
        assert abs((to_mp(lam) - exact) / exact) < 1e-28


def test_eigenvalue_rejects_bad_index():
    T = discretize(HARMONIC, 1.0, GridSpec(4.0, 11))
    with pytest.raises(ValueError):
        eigenvalue(T, 11)
    with pytest.raises(ValueError):
        eigenvalue(T, -1)


def test_wrong_bracket_hint_falls_back():
    T = discretize(HARMONIC, 1.0, GridSpec(8.0, 301))
    direct = eigenvalue(T, 2)
    hinted = eigenvalue(T, 2, bracket=(40.0, 41.0))  # excludes E_2 ~ 5
    assert float(abs(direct - hinted)) < 1e-27


def test_good_bracket_hint_agrees():
    T = discretize(HARMONIC, 1.0, GridSpec(8.0, 301))
    direct = eigenvalue(T, 2)
    hinted = eigenvalue(T, 2, bracket=(4.9, 5.1))
    assert float(abs(direct - hinted)) < 1e-27


# ---------------------------------------------------------------------------
# Richardson extrapolation

def test_extrapolation_of_pure_quadratic_sequence():
    vals = [ExtendedReal(2.0), ExtendedReal(1.25), ExtendedReal(1.0625)]
    lim, err = extrapolate_sequence(vals)
    assert float(lim - 1) == 0.0
    assert float(err) == 0.0


def test_extrapolation_kills_quartic_term_and_reports_it():
    # E(d) = 1 + d^2 + d^4 at d = 1, 1/2, 1/4
    vals = [ExtendedReal(3.0), ExtendedReal(1.3125), ExtendedReal(1.06640625)]
    lim, err = extrapolate_sequence(vals)
    assert float(lim - 1) == 0.0
    assert float(err) == 0.015625


def test_two_level_extrapolation():
    vals = [ExtendedReal(2.0), ExtendedReal(1.25)]
    lim, err = extrapolate_sequence(vals)
    assert float(lim - 1) == 0.0
    assert float(err) == 0.25


def test_continuum_box_spectrum():
    # L = pi/2 makes E_k = k^2 up to the float rounding of L
    g = GridSpec(math.pi / 2, 2048)
    for k in (1, 2, 5):
        E, err = solve_extrapolated(ZeroPotential(), 1.0, k - 1, g)
        assert abs(float(E) / k**2 - 1) < 1e-12
        assert float(err) >= 0


def test_harmonic_spectrum_to_high_accuracy():
    g = GridSpec(12.0, 2048)
    for j in (0, 3, 5):
        E, _ = solve_extrapolated(HARMONIC, 1.0, j, g)
        assert abs(float(E) / (2 * j + 1) - 1) < 1e-12
    E, _ = solve_extrapolated(HARMONIC, 0.5, 2, GridSpec(8.0, 2048))
    assert abs(float(E) / 2.5 - 1) < 1e-12


def test_eigenvalue_sequence_is_descending_toward_limit():
    g = GridSpec(12.0, 1024)
    seq = eigenvalue_sequence(HARMONIC, 1.0, 0, g)
    assert len(seq) == 3
    # FD eigenvalues approach from below for this potential; gaps shrink 4x
    d1 = float(seq[1] - seq[0])
    d2 = float(seq[2] - seq[1])
    assert d1 > 0 and d2 > 0
    assert abs(d1 / d2 - 4.0) < 0.1


def test_spectrum_ordering_and_validation():
    g = GridSpec(10.0, 512)
    spec = spectrum(HARMONIC, 1.0, 3, g)
    es = [float(e) for _, e, _ in spec.entries]
    assert es == sorted(es)
    assert spec.value(2) == spec.entries[2][1]
    with pytest.raises(ValueError):
        Spectrum(1.0, ((0, ExtendedReal(3.0), ExtendedReal(0)),
                       (1, ExtendedReal(1.0), ExtendedReal(0))))
    with pytest.raises(ValueError):
        Spectrum(1.0, ((0, ExtendedReal(1.0), ExtendedReal(-1e-30)),))


# ---------------------------------------------------------------------------
# eigenfunctions

@pytest.fixture(scope="module")
def harmonic_ground():
    g = GridSpec(12.0, 2048)
    T = discretize(HARMONIC, 1.0, g)
    e = eigenvalue(T, 0)
    return T, e, eigenfunction(T, e)


def test_eigenfunction_residual_within_target(harmonic_ground):
    _, _, psi = harmonic_ground
    assert psi.residual <= psi.residual_target
    assert psi.residual_target <= 1e-25


def test_eigenfunction_trapezoid_normalized(harmonic_ground):
    _, _, psi = harmonic_ground
    assert abs(float(psi.norm_l2_sq() - 1)) < 1e-20


def test_eigenfunction_sign_convention(harmonic_ground):
    _, _, psi = harmonic_ground
    assert psi.values_hi[int(np.argmax(np.abs(psi.values_hi)))] > 0


def test_ground_state_matches_gaussian(harmonic_ground):
    _, _, psi = harmonic_ground
    for x in (0.25, 1.0, 2.0):
        got = to_mp(psi.interp(x))
        closed = mp.pi ** mp.mpf(-0.25) * mp.exp(-mp.mpf(x) ** 2 / 2)
        assert abs((got - closed) / closed) < 5e-5  # raw grid, O(dx^2)


def test_ground_state_nearly_even(harmonic_ground):
    # grid symmetry is limited by (n+1)*dx != 2L in floats, not by the solver
    _, _, psi = harmonic_ground
    asym = (psi.values_hi - psi.values_hi[::-1]) + (psi.values_lo - psi.values_lo[::-1])
    assert float(np.max(np.abs(asym))) < 1e-12


def test_first_excited_nearly_odd():
    g = GridSpec(12.0, 2048)
    T = discretize(HARMONIC, 1.0, g)
    e = eigenvalue(T, 1)
    psi = eigenfunction(T, e)
    s = (psi.values_hi + psi.values_hi[::-1]) + (psi.values_lo + psi.values_lo[::-1])
    assert float(np.max(np.abs(s))) < 1e-12
    assert psi.values_hi[int(np.argmax(np.abs(psi.values_hi)))] > 0


def test_interp_extends_by_zero(harmonic_ground):
    _, _, psi = harmonic_ground
    assert float(psi.interp(12.5)) == 0.0
    assert float(psi.interp(-13.0)) == 0.0


def test_extrapolated_eigenfunction_samples():
    g = GridSpec(12.0, 2048)
    ef = eigenfunction_extrapolated(HARMONIC, 1.0, 0, g)
    assert len(ef.residuals) == 3
    assert abs(float(ef.eigenvalue - 1)) < 1e-15
    norm = mp.pi ** mp.mpf(-0.25)
    for idx in (700, 1024, 1400):  # |x| <= 4.5, the envelope window range
        x = mp.mpf(ef.xs[idx])
        closed = norm * mp.exp(-x * x / 2)
        got = mp.mpf(ef.values_hi[idx]) + mp.mpf(ef.values_lo[idx])
        assert abs((got - closed) / closed) < 1e-11
    # deep tail: relative accuracy fades with the signal but stays tiny in
    # absolute terms
    x = mp.mpf(ef.xs[400])
    closed = norm * mp.exp(-x * x / 2)
    got = mp.mpf(ef.values_hi[400]) + mp.mpf(ef.values_lo[400])
    assert abs(got - closed) < 1e-20
    # interpolation at the turning point, where curvature vanishes
    got = to_mp(ef.interp(1.0))
    closed = norm * mp.exp(mp.mpf(-0.5))
    assert abs((got - closed) / closed) < 1e-6


# ---------------------------------------------------------------------------
# domain choice

def test_choose_domain_examples():
    assert choose_domain(HARMONIC, 1.0, 0, 1e-30).half_width == 12.0
    assert choose_domain(HARMONIC, 0.25, 0, 1e-30).half_width == 6.0
    assert choose_domain(HARMONIC, 0.5, 0, 1e-30).half_width == 8.0
    assert choose_domain(HARMONIC, 1.0, 0, 1.0).half_width == 6.0


def test_choose_domain_for_bumped_pair():
    vm, vp = default_pair()
    # bumps only increase the action, so the harmonic choice still works
    assert choose_domain(vp, 1.0, 0, 1e-30).half_width == 12.0
    assert choose_domain(vm, 0.25, 0, 1e-30).half_width == 6.0


def test_choose_domain_unreachable_target():
    with pytest.raises(ValueError):
        choose_domain(HARMONIC, 1.0, 0, 1e-45)
