import numpy as np
import pytest

from timescale_sl import (
    FixedData,
    InverseConfig,
    Potential,
    ProblemSpec,
    SpectralData,
    extract_data,
    make_domain,
    reconstruct,
    residual,
    uniqueness_gap,
    zero_problem,
)
from timescale_sl.errors import StructuralError, UnsupportedError
from timescale_sl.inverse import jacobian, potential_from_coeffs


@pytest.fixture(scope="module")
def zero_target():
    return extract_data(zero_problem(), 6)


@pytest.fixture
def fixed():
    return FixedData(make_domain(1, 2, 3), 0.0, 0.0)


def test_residual_vanishes_at_truth(zero_target, fixed):
    r = residual(np.zeros(4), zero_target, fixed, n_left=2)
    assert r.shape == (12,)
    assert np.max(np.abs(r)) <= 1e-12


def test_constant_shift_residual(zero_target, fixed):
    # a common constant shifts every eigenvalue and leaves ratios unchanged
    r = residual([0.2, 0.0, 0.2, 0.0], zero_target, fixed, n_left=2)
    lam = zero_target.eigenvalues
    assert np.allclose(r[:6], 0.2 / (1 + np.abs(lam)), atol=1e-9)
    assert np.max(np.abs(r[6:])) <= 1e-9


def test_jacobian_constant_columns(zero_target, fixed):
    J = jacobian(np.zeros(4), zero_target, fixed, 1e-6, n_left=2)
    lam = zero_target.eigenvalues
    assert np.allclose(J[:6, 0] + J[:6, 2], 1 / (1 + np.abs(lam)), atol=1e-7)


def test_jacobian_step_independence(zero_target, fixed):
    # central differences: halving the step changes a column by O(step^2)
    c = np.array([0.1, -0.2, 0.05, 0.1])
    J1 = jacobian(c, zero_target, fixed, 1e-3, n_left=2)
    J2 = jacobian(c, zero_target, fixed, 5e-4, n_left=2)
    assert np.max(np.abs(J1 - J2)) <= 1e-5
    with pytest.raises(StructuralError):
        jacobian(c, zero_target, fixed, 0.0)


def test_zero_target_returns_zero(zero_target, fixed):
    rep = reconstruct(zero_target, fixed, InverseConfig(n_data=6, n_basis_left=2, n_basis_right=2))
    assert rep.converged
    assert rep.iterations == 0
    assert np.all(rep.coefficients == 0.0)


def test_small_recovery(fixed):
    d = fixed.domain
    truth = ProblemSpec(d, Potential.cosine(d, [0.3, 0.2], [0.1, 0.0]))
    target = extract_data(truth, 6)
    rep = reconstruct(target, fixed, InverseConfig(n_data=6, n_basis_left=2, n_basis_right=2))
    assert rep.converged, rep.reason
    assert np.max(np.abs(rep.coefficients - [0.3, 0.2, 0.1, 0.0])) <= 1e-5
    assert all(b <= a * (1 + 1e-12) for a, b in zip(rep.objective_history, rep.objective_history[1:]))
    out = rep.to_dict()
    assert out["coefficients"]["left"] == pytest.approx([0.3, 0.2], abs=1e-5)


def test_non_symmetric_domain_is_unsupported(zero_target):
    fixed = FixedData(make_domain(1, 2, 4))
    with pytest.raises(UnsupportedError):
        residual(np.zeros(4), zero_target, fixed)


def test_config_validation():
    with pytest.raises(StructuralError, match="n_data"):
        InverseConfig(n_data=5, n_basis_left=3, n_basis_right=3)
    with pytest.raises(StructuralError):
        InverseConfig(n_basis_left=0)
    with pytest.raises(StructuralError):
        InverseConfig(reg=-1.0)


def test_too_few_target_entries(zero_target, fixed):
    with pytest.raises(StructuralError, match="requested"):
        reconstruct(zero_target, fixed, InverseConfig(n_data=8, n_basis_left=2, n_basis_right=2))


def test_potential_from_coeffs_split():
    d = make_domain(1, 2, 3)
    q = potential_from_coeffs([1.0, 2.0, 3.0], d, 1)
    assert q.left.tolist() == [1.0] and q.right.tolist() == [2.0, 3.0]


def test_uniqueness_gap_properties(zero_target):
    other = extract_data(ProblemSpec(make_domain(1, 2, 3), Potential.constant(make_domain(1, 2, 3), 0.1)), 6)
    assert uniqueness_gap(zero_target, zero_target) == 0.0
    assert uniqueness_gap(zero_target, other) == uniqueness_gap(other, zero_target)
    assert uniqueness_gap(zero_target, other) > 0.0
    with pytest.raises(StructuralError):
        uniqueness_gap(zero_target, other.head(5))


def test_uniqueness_gap_skips_flagged():
    a = SpectralData([1.0, 2.0], [0.5, np.nan], [False, True])
    b = SpectralData([1.0, 2.0], [0.5, 7.0], [False, False])
    assert uniqueness_gap(a, b) == 0.0


def test_bump_is_detected():
    d = make_domain(1, 2, 3)
    t = np.linspace(0, 1, 201)
    bump = np.where(np.abs(t - 0.5) <= 0.2, 0.2, 0.0)
    spec = ProblemSpec(d, Potential(d, "grid", bump, np.zeros(2)))
    assert uniqueness_gap(extract_data(zero_problem(), 8), extract_data(spec, 8)) >= 1e-4
