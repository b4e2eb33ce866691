import numpy as np
import pytest
from scipy import integrate

from carshift.expcalc import ExpCombo, blaschke_residues, theta_apply


def quad_inner(f, g, upper=80.0):
    """Quadrature oracle for the L2 pairing, antilinear in the first slot."""
    re = integrate.quad(lambda x: (np.conj(f.evaluate(x)) * g.evaluate(x)).real, 0, upper, limit=400)[0]
    im = integrate.quad(lambda x: (np.conj(f.evaluate(x)) * g.evaluate(x)).imag, 0, upper, limit=400)[0]
    return re + 1j * im


def test_normalized_exponential_has_unit_norm():
    f = ExpCombo.normalized_exponential(-0.7 + 2.0j)
    assert f.norm() == pytest.approx(1.0)
    g = ExpCombo.normalized_exponential(3.0j, start=1.0, end=1.5)
    assert g.norm() == pytest.approx(1.0)


def test_inner_matches_quadrature():
    f = ExpCombo.exponential(-1.0, coeff=1.0) + ExpCombo.exponential(-2.0 + 0.5j, coeff=0.3j)
    g = ExpCombo.exponential(-0.5 - 1.0j, start=0.5, coeff=2.0)
    assert f.inner(g) == pytest.approx(quad_inner(f, g), abs=1e-10)


def test_window_and_shift_consistency():
    f = ExpCombo.normalized_exponential(-1.0)
    assert f.window(0.0, 2.0).norm_sq() + f.window(2.0).norm_sq() == pytest.approx(1.0)
    shifted = f.shift(1.5)
    assert shifted.norm() == pytest.approx(f.norm())
    x = 2.25
    assert shifted.evaluate(x) == pytest.approx(f.evaluate(x - 1.5))
    assert shifted.evaluate(1.0) == 0.0


def test_backshift_inverts_shift():
    f = ExpCombo.normalized_exponential(-1.0 + 1.0j)
    back = f.shift(0.75).backshift(0.75)
    assert (back - f).norm() <= 1e-12


def test_evaluate_respects_support():
    f = ExpCombo.exponential(-1.0, start=1.0, end=2.0)
    assert f.evaluate(0.5) == 0.0
    assert f.evaluate(2.5) == 0.0
    # terms are anchored at their start: value is exp(mu * (x - start))
    assert f.evaluate(1.5) == pytest.approx(np.exp(-0.5))


def test_infinite_tail_needs_decay():
    with pytest.raises(ValueError):
        ExpCombo.exponential(1.0j)  # no decay on an infinite interval


def test_blaschke_residues_single_factor():
    # one factor at -1: B(z) = (z-1)/(z+1) has residue -2 at the pole
    res = blaschke_residues([-1.0 + 0.0j])
    assert len(res) == 1
    assert res[0] == pytest.approx(-2.0)


def test_theta_is_isometric_on_the_calculus():
    lambdas = [-1.0 + 0.0j, -2.0 + 0.5j]
    f = ExpCombo.exponential(-0.8 + 0.3j, coeff=1.0) + ExpCombo.exponential(
        -1.5 - 1.0j, start=0.25, coeff=0.5j
    )
    out = theta_apply(lambdas, f)
    assert out.norm() == pytest.approx(f.norm(), abs=1e-10)
    # quadrature cross-check of the image norm
    assert np.sqrt(quad_inner(out, out).real) == pytest.approx(f.norm(), abs=1e-8)


def test_theta_range_annihilates_basis_exponentials():
    lambdas = [-1.0 + 0.0j, -2.0 + 0.5j]
    f = ExpCombo.normalized_exponential(-0.6 - 0.2j)
    out = theta_apply(lambdas, f)
    for lam in lambdas:
        e = ExpCombo.normalized_exponential(lam)
        assert abs(e.inner(out)) <= 1e-10


def test_theta_pole_collision_guard():
    with pytest.raises(ValueError, match="collides"):
        theta_apply([-1.0 + 0.0j], ExpCombo.exponential(-1.0))


def test_compress_merges_duplicate_terms():
    f = ExpCombo.exponential(-1.0, coeff=0.5) + ExpCombo.exponential(-1.0, coeff=0.5)
    g = f.compress()
    assert len(g.terms) == 1
    assert (g - ExpCombo.exponential(-1.0)).norm() <= 1e-14
