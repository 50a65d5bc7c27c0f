import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from timescale_sl import (
    Grid,
    Potential,
    ProblemSpec,
    SearchOptions,
    SpectralData,
    asymptotic_char,
    asymptotic_eigen_guess,
    asymptotic_phi,
    characteristic,
    closed_form_char_zero_potential,
    eigenfunction,
    eigenvalues,
    extract_data,
    make_domain,
    shoot,
    zero_problem,
)
from timescale_sl.errors import (
    IncompleteSpectrumError,
    NotAnEigenvalueError,
    NumericOverflowError,
    StructuralError,
    UnsupportedError,
)
from timescale_sl.forward import interior_ratio, step_cap

from conftest import ZERO_SPEC_EIGENVALUES, random_smooth_spec


def test_closed_form_matches_symbolic_delta():
    # compose the gap transfer symbolically and compare with the reduced trig form
    s = sp.symbols("s", positive=True)
    lam = s**2
    y1, p1 = sp.cos(s), -s * sp.sin(s)
    y2 = y1 + p1
    p2 = p1 - lam * y2
    delta = -s * sp.sin(s) * y2 + sp.cos(s) * p2
    reduced = -s * sp.sin(2 * s) - s**2 * sp.cos(2 * s) + s**3 / 2 * sp.sin(2 * s)
    assert sp.simplify(sp.expand_trig(delta - reduced)) == 0
    d = make_domain(1, 2, 3)
    for sv in (0.3, 1.7, 4.2, 11.0):
        assert closed_form_char_zero_potential(d, sv * sv) == pytest.approx(
            float(reduced.subs(s, sv)), rel=1e-13, abs=1e-13
        )


def test_closed_form_value_at_s_two():
    d = make_domain(1, 2, 3)
    assert closed_form_char_zero_potential(d, 4.0) == pytest.approx(2 * math.sin(4) - 4 * math.cos(4), rel=1e-15)
    assert closed_form_char_zero_potential(d, 4.0) == pytest.approx(1.1009694928385914, rel=1e-14)


def test_shoot_zero_potential_at_lambda_one(zero_spec):
    tr = shoot(zero_spec, 1.0)
    assert tr.phi_a1 == pytest.approx(math.cos(1.0), abs=1e-12)
    assert tr.dphi_a1 == pytest.approx(-math.sin(1.0), abs=1e-12)
    assert tr.phi_a2 == pytest.approx(math.cos(1.0) - math.sin(1.0), abs=1e-12)


def test_shoot_lambda_zero_is_constant(zero_spec):
    tr = shoot(zero_spec, 0.0, Grid.uniform(zero_spec.domain, 10))
    assert np.allclose(tr.y, 1.0, atol=1e-15)
    assert np.allclose(tr.dy, 0.0, atol=1e-15)


def test_matching_and_jump_conditions_hold():
    rng = np.random.default_rng(3)
    d = make_domain(0.7, 1.6, 2.9)
    for _ in range(4):
        spec = random_smooth_spec(rng, d)
        for lam in (-2.0, 3.0, 40.0):
            tr = shoot(spec, lam)
            scale = 1 + abs(tr.phi_a2) + abs(tr.dphi_a2)
            assert abs(tr.matching_residual()) <= 1e-12 * scale
            assert abs(tr.slope_jump_residual()) <= 1e-12 * scale


@pytest.mark.parametrize("lam", [0.25, 2.0, 30.0, 200.0])
def test_left_interval_against_trig(zero_spec, lam):
    d = make_domain(1, 2, 3)
    spec = ProblemSpec(d, Potential.zero(d), 0.4, 0.0)
    tr = shoot(spec, lam, Grid.uniform(d, 16))
    s = math.sqrt(lam)
    exact = np.cos(s * tr.t_left) + 0.4 / s * np.sin(s * tr.t_left)
    assert np.max(np.abs(tr.y_left - exact)) <= 1e-10


def test_negative_lambda_uses_hyperbolic(zero_spec):
    d = zero_spec.domain
    for lam in (-0.5, -3.0, -12.0):
        assert characteristic(zero_spec, lam) == pytest.approx(
            closed_form_char_zero_potential(d, lam), rel=1e-10
        )


def test_zero_spec_eigenvalues(zero_spec):
    ev = eigenvalues(zero_spec, len(ZERO_SPEC_EIGENVALUES)).eigenvalues
    assert ev[0] == pytest.approx(0.0, abs=1e-12)
    for got, want in zip(ev[1:], ZERO_SPEC_EIGENVALUES[1:]):
        assert abs(got - want) <= 1e-10 * (1 + want)


def test_eigenvalues_strictly_increasing_and_real():
    rng = np.random.default_rng(11)
    d = make_domain(1.0, 1.5, 2.0)
    for _ in range(3):
        ev = eigenvalues(random_smooth_spec(rng, d), 10).eigenvalues
        assert np.all(np.diff(ev) > 0)
        assert np.all(np.isfinite(ev))


def test_brackets_are_tight(zero_spec):
    ev = eigenvalues(zero_spec, 5)
    widths = ev.brackets[:, 1] - ev.brackets[:, 0]
    assert np.all(widths <= 1e-12 * (1 + np.abs(ev.eigenvalues)))
    assert np.all((ev.brackets[:, 0] <= ev.eigenvalues) & (ev.eigenvalues <= ev.brackets[:, 1]))


@pytest.mark.parametrize("c", [-1.0, 0.5, 2.0])
def test_constant_shift_moves_spectrum(c):
    d = make_domain(1, 2, 3)
    base = ProblemSpec(d, Potential.cosine(d, [0.0, 0.5], [0.3]), 0.2, -0.4)
    shifted = base.with_potential(base.q.shifted(c))
    e0 = eigenvalues(base, 6).eigenvalues
    e1 = eigenvalues(shifted, 6).eigenvalues
    # only the interval equation shifts; the gap transfer carries lambda - q(a1) too
    assert np.allclose(e1 - e0, c, atol=1e-9 * (1 + np.max(np.abs(e0))))


def test_interior_ratio_at_lambda_four(zero_spec):
    r, flag = interior_ratio(shoot(zero_spec, 4.0))
    assert not flag
    assert r == pytest.approx(-2 * math.tan(2.0), rel=1e-11)
    assert r == pytest.approx(4.370, abs=1e-3)


def test_extract_zero_spec_ratios(zero_spec):
    data = extract_data(zero_spec, 3)
    assert data.ratios[0] == pytest.approx(0.0, abs=1e-12)
    s = np.sqrt(data.eigenvalues[1:])
    assert np.allclose(data.ratios[1:], -s * np.tan(s), rtol=1e-10)
    assert not data.flags.any()


def test_degenerate_ratio_is_flagged():
    # phi(a1) = cos(s) vanishes at s = pi/2 when q = h = 0
    d = make_domain(1, 2, 3)
    spec = ProblemSpec(d, Potential.zero(d), 0.0, 0.0)
    r, flag = interior_ratio(shoot(spec, (math.pi / 2) ** 2))
    assert flag


def test_spectral_data_validation():
    with pytest.raises(StructuralError, match="strictly increasing"):
        SpectralData([1.0, 1.0], [0.0, 0.0], [False, False])
    with pytest.raises(StructuralError, match="equal-length"):
        SpectralData([1.0, 2.0], [0.0], [False, False])
    round_trip = SpectralData.from_dict(extract_data(zero_problem(), 3).to_dict())
    assert round_trip.count == 3


def test_asymptotic_values():
    d = make_domain(1, 2, 3)
    assert asymptotic_char(d, 4.0) == pytest.approx(4 * math.sin(4), rel=1e-14)
    assert asymptotic_char(d, 4.0) == pytest.approx(-3.0272, abs=1e-4)
    assert asymptotic_phi(d, 0.0, 4.0, 0.5) == pytest.approx(math.cos(1.0))
    assert asymptotic_phi(d, 0.0, 4.0, 2.5) == pytest.approx(4 * math.sin(2) * math.sin(1))
    assert asymptotic_eigen_guess(d, 1) == 0.0
    assert asymptotic_eigen_guess(d, 3) == pytest.approx(math.pi**2)
    assert asymptotic_eigen_guess(make_domain(2, 3, 5), 2) == pytest.approx((math.pi / 4) ** 2)


def test_asymptotic_errors():
    with pytest.raises(UnsupportedError):
        asymptotic_eigen_guess(make_domain(1, 2, 4), 3)
    with pytest.raises(StructuralError):
        asymptotic_char(make_domain(1, 2, 3), -1.0)


def test_asymptotic_char_tracks_delta():
    # relative error decays like lambda^{-1/2} where sin(2s) = 1, far from zeros
    d = make_domain(1, 2, 3)
    spec = ProblemSpec(d, Potential.cosine(d, [0.0, 0.4], [0.2]), 0.0, 0.0)
    for s in (math.pi / 4 + k * math.pi for k in (12, 25, 50)):
        lam = s * s
        rel = abs(characteristic(spec, lam) - asymptotic_char(d, lam)) / abs(asymptotic_char(d, lam))
        assert rel < 8.0 / s


def test_eigenfunction_checks_root(zero_spec):
    lam = eigenvalues(zero_spec, 3).eigenvalues[2]
    tr = eigenfunction(zero_spec, lam)
    assert abs(tr.dphi_l) < 1e-8 * (1 + abs(tr.phi_l))
    with pytest.raises(NotAnEigenvalueError):
        eigenfunction(zero_spec, 2.5)


def test_overflow_is_reported():
    d = make_domain(1, 2, 3)
    spec = ProblemSpec(d, Potential.zero(d), 0.0, 0.0)
    with pytest.raises(NumericOverflowError):
        characteristic(spec, -1e7)


def test_incomplete_spectrum(zero_spec):
    with pytest.raises(IncompleteSpectrumError, match="2 of 5"):
        eigenvalues(zero_spec, 5, SearchOptions(s_ceiling=1.5))


def test_step_cap_shrinks_with_lambda():
    assert step_cap(0.0) > step_cap(100.0) > step_cap(1e4)


@settings(max_examples=15, deadline=None)
@given(st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_characteristic_is_continuous_in_lambda(lam, h, H):
    d = make_domain(1, 2, 3)
    spec = ProblemSpec(d, Potential.cosine(d, [0.1, 0.3], [0.2, -0.1]), h, H)
    d0 = characteristic(spec, lam)
    d1 = characteristic(spec, lam + 1e-7)
    assert abs(d1 - d0) <= 1e-4 * (1 + abs(d0))


def test_delta_changes_sign_on_every_bracket():
    rng = np.random.default_rng(5)
    d = make_domain(1, 2, 3)
    spec = random_smooth_spec(rng, d)
    ev = eigenvalues(spec, 8)
    lo = characteristic(spec, ev.brackets[:, 0])
    hi = characteristic(spec, ev.brackets[:, 1])
    assert np.all((lo * hi <= 0))
