import math
from fractions import Fraction

import numpy as np
import pytest

from dunkl_lab import spectral as sp

# Electronic ground energy of H2+ at internuclear distance 2 bohr (charges 1, 1),
# a standard literature value used as an external check of the elliptic solver.
H2PLUS_R2 = -1.1026342144949


def test_richardson_synthetic():
    f = lambda h: 2.0 + 3 * h**2 + 5 * h**4
    vals = [f(0.1), f(0.05), f(0.025)]
    ext, order = sp.richardson(vals)
    assert abs(ext - 2.0) < 1e-13
    assert order == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("l,n_r", [(0, 0), (0, 1), (1, 0), (2, 1)])
def test_radial_hydrogen(l, n_r):
    res = sp.solve_radial(3, 1, l, n_r, n=400)
    assert res.eigenvalue == pytest.approx(sp.coulomb_energy(3, 1, l + n_r + 1), abs=1e-9)
    assert res.residual < 1e-6


def test_radial_higher_dimension_and_charge():
    assert sp.solve_radial(5, 1, 0, 0, n=400).eigenvalue == pytest.approx(-0.125, abs=1e-9)
    assert sp.solve_radial(3, 2, 0, 0, n=400).eigenvalue == pytest.approx(-2.0, abs=1e-8)
    with pytest.raises(sp.UnsupportedRegimeError):
        sp.solve_radial(3, -1, 0, 0)


def test_radial_oracle_and_order():
    res = sp.solve_radial(3, 1, 0, 1, n=400)
    prob = sp.radial_problem(3, 1, 0, res.grid["R"])
    oracle = sp.oracle_dense(prob, 2, n=200)
    assert oracle[0].eigenvalue == pytest.approx(-0.5, abs=1e-6)
    assert oracle[1].eigenvalue == pytest.approx(-0.125, abs=1e-6)
    assert sp.convergence_order(prob, 0) >= 1.8


@pytest.mark.parametrize("g", [0, 1, 2])
def test_angular_jacobi(g):
    fd = sp.solve_angular_jacobi(g, 3)
    sh = sp.solve_angular_jacobi(g, 3, method="shooting")
    for m in range(3):
        q = 3 * (m + g)
        assert fd[m].eigenvalue == pytest.approx(q * q, abs=1e-6)
        assert abs(fd[m].eigenvalue - sh[m].eigenvalue) < 1e-7
        assert fd[m].extras["q"] == pytest.approx(q, abs=1e-7)


def test_angular_jacobi_rejects_weak_coupling():
    with pytest.raises(sp.UnsupportedRegimeError):
        sp.solve_angular_jacobi(0.25)


def test_gegenbauer_oracle():
    prob = sp.gegenbauer_problem(2.0, "check")
    vals = [r.eigenvalue for r in sp.oracle_dense(prob, 3, n=200)]
    assert np.allclose(vals, [0.0, 3.0, 8.0], atol=1e-6)
    assert sp.convergence_order(prob, 1) >= 1.8


def test_azimuthal_channels():
    res = sp.solve_azimuthal(4, 6, 3)
    assert [r.eigenvalue for r in res] == pytest.approx([48.0, 63.0, 80.0], abs=1e-7)
    assert [r.extras["l"] for r in res] == pytest.approx([6.0, 7.0, 8.0], abs=1e-8)


def test_q_levels():
    assert sp.angular_q_levels(3, 1, 3) == [(Fraction(3), 1), (Fraction(6), 1), (Fraction(9), 1)]
    assert sp.angular_q_levels(2, Fraction(1, 2), 3) == [(Fraction(1, 2), 1)]
    levels = dict(sp.angular_q_levels(4, 0, 6))
    # q = 3 l3 + 4 l4: 0, 3, 4, 6, 7, 8 each once
    assert levels == {Fraction(v): 1 for v in (0, 3, 4, 6, 7, 8)}
    assert sp.q_multiplicities(4, 0, 12)[Fraction(12)] == 2


@pytest.mark.parametrize("g,q,n1,n2", [(0, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 2), (1, 3, 0, 0)])
def test_parabolic_constants(g, q, n1, n2):
    r = sp.solve_parabolic_pair(3, g, q, 1.0, 0.0, n1, n2)
    n = n1 + n2 + q + 1
    assert r.eigenvalue == pytest.approx(sp.coulomb_energy(3, 1, n), abs=1e-9)
    assert r.extras["lambda1"] == pytest.approx(sp.parabolic_lambda(3, 1, q, n1, n), abs=1e-8)
    assert r.extras["lambda2"] == pytest.approx(sp.parabolic_lambda(3, 1, q, n2, n), abs=1e-8)
    assert abs(r.extras["lambda1"] + r.extras["lambda2"] - 1.0) < 1e-10


def test_stark_closed_slopes():
    assert sp.stark_slope(3, 1, 2, 1, 0) == pytest.approx(3.0)
    assert sp.stark_slope(3, 1, 2, 0, 1) == pytest.approx(-3.0)
    assert sp.stark_slope(3, 1, 4, 0, 0) == 0.0


def test_stark_numeric_slope():
    d = sp.stark_slope_numeric(3, 0, 0, 1.0, 1, 0)
    assert d["slope"] == pytest.approx(3.0, rel=5e-3)
    assert d["slope_closed"] == pytest.approx(3.0)


def test_stark_regime_guards():
    with pytest.raises(sp.UnsupportedRegimeError):
        sp.solve_parabolic_pair(3, 0, 0, 1.0, -1e-5, 0, 0)
    with pytest.raises(sp.UnsupportedRegimeError):
        sp.solve_parabolic_pair(3, 0, 0, 1.0, 0.5, 0, 0)


def test_two_center_single_charge_limit():
    r = sp.solve_two_center(3, 0, 0, 1.0, 0.0, 0.5)
    assert r.eigenvalue == pytest.approx(-0.5, abs=1e-6)
    assert r.residual < 1e-8


def test_h2_plus():
    r = sp.solve_two_center(3, 0, 0, 1.0, 1.0, 1.0)
    assert r.eigenvalue == pytest.approx(H2PLUS_R2, abs=1e-9)


def test_two_center_united_atom_limit():
    Es = [sp.solve_two_center(3, 0, 0, 0.5, 0.5, a).eigenvalue for a in (0.02, 0.01)]
    E_united = sp.coulomb_energy(3, 1.0, 1)
    rate = math.log2(abs(Es[0] - E_united) / abs(Es[1] - E_united))
    assert rate == pytest.approx(2.0, abs=0.2)


def test_two_center_parity():
    E = sp.solve_two_center(3, 0, 0, 0.5, 0.5, 0.5).eigenvalue
    p0 = sp.eta_parity(3, 0, E, 0.5, 0.5, 0.5, 0)
    p1 = sp.eta_parity(3, 0, E, 0.5, 0.5, 0.5, 1)
    assert p0 == pytest.approx(1.0, abs=1e-10)
    assert p1 == pytest.approx(-1.0, abs=1e-10)


def test_two_center_regime_guards():
    with pytest.raises(sp.UnsupportedRegimeError):
        sp.solve_two_center(3, 0, 0, 0.5, 0.5, 0.0)
    with pytest.raises(sp.UnsupportedRegimeError):
        sp.solve_two_center(3, 0, 0, -0.5, 0.0, 0.5)


def test_degeneracy_counts():
    # symmetric sector of N = 3: q = 3 l3, and (n - q) radial/orbital splittings per q
    rows = sp.assemble_spectrum(3, 0, 1.0, 6)
    expected = [sum(n - q for q in range(0, n, 3)) for n in range(1, 7)]
    assert [r.degeneracy for r in rows] == expected
    assert all(r.degeneracy == r.parabolic_degeneracy for r in rows)


def test_degeneracy_changes_with_coupling():
    g0 = {r.n: r for r in sp.assemble_spectrum(3, 0, 1.0, 6)}
    g1 = {r.n: r for r in sp.assemble_spectrum(3, 1, 1.0, 6)}
    for n in g1:
        assert g1[n].energy == g0[n].energy
        assert g1[n].degeneracy == g1[n].parabolic_degeneracy
    assert any(g1[n].degeneracy != g0[n].degeneracy for n in g1)
