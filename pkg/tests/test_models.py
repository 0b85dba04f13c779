from fractions import Fraction

import pytest

from dunkl_lab.field import Scalar
from dunkl_lab.models import (
    CATALOG,
    Generators,
    ModelSpec,
    UnknownOperatorError,
    build_generator,
    build_hamiltonian,
    build_invariant_suite,
    catalog_manifest,
)
from dunkl_lab.operators import Operator, commutator

I = Scalar(0, 1)


def _n_args(name, N):
    arity = CATALOG[name].arity
    if name in ("L2k", "A_k"):
        return (1,)
    if name in ("L_jacobi", "S_jacobi"):
        return (1, 2)[:arity] if N >= 3 else (0, 1)[:arity]
    return tuple(range(1, arity + 1))


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec(0)
    spec = ModelSpec(3, g="1/2", gamma=Fraction(2))
    assert spec.g == Fraction(1, 2)
    assert spec.as_dict()["g"] == "1/2"


def test_angular_momentum_free_limit():
    G = Generators(ModelSpec(2, g=0))
    F = G.F
    p1 = Operator.partial(F, 0).scale(-I)
    p2 = Operator.partial(F, 1).scale(-I)
    expected = G.mult(F.x(0)) * p2 - G.mult(F.x(1)) * p1
    assert build_generator("L", ModelSpec(2, g=0), 1, 2).equals(expected)


def test_exchange_invariant():
    g = Fraction(3, 2)
    G = Generators(ModelSpec(3, g=g))
    swaps = G.exchange(0, 1) + G.exchange(0, 2) + G.exchange(1, 2)
    assert G.S().equals(swaps.scale(-g))
    # S vanishes without the Calogero term
    assert Generators(ModelSpec(3, g=0)).S().is_zero()


def test_runge_lenz_dual_forms():
    spec = ModelSpec(3, g=1, gamma=1)
    G = Generators(spec)
    for i in range(3):
        assert (G.A(i) - G.A_vec(i)).is_zero()
    assert (G.A1_scaled() - G.A1_scaled_vec()).is_zero()


def test_hamiltonian_relations():
    spec = ModelSpec(3, g=Fraction(1, 2), gamma=1, f=Fraction(1, 3))
    G = Generators(spec)
    diff = build_hamiltonian("stark", spec) - build_hamiltonian("coulomb", spec)
    assert diff.equals(G.mult(G.F.sum_x() * G.F.const(spec.f)))
    two = ModelSpec(3, g=Fraction(1, 2), gamma1=Fraction(1, 2), gamma2=Fraction(1, 3))
    coul = ModelSpec(3, g=Fraction(1, 2), gamma=Fraction(5, 6))
    assert build_hamiltonian("two_center", two).equals(build_hamiltonian("coulomb", coul))
    with pytest.raises(ValueError):
        build_hamiltonian("nope", spec)


def test_relative_calogero_restricts_to_calogero():
    spec = ModelSpec(2, g=Fraction(1, 3))
    H = build_hamiltonian("calogero_relative", spec).restrict_symmetric()
    assert not H.has_exchange_terms()
    assert commutator(H, Generators(spec).x0()).equals(Operator.zero(Generators(spec).F))


def test_invariant_suites():
    coul = dict(build_invariant_suite("coulomb", ModelSpec(3, g=1, gamma=1)))
    assert sum(k.startswith("L[") for k in coul) == 3
    assert sum(k.startswith("A[") for k in coul) == 3
    assert "L2k[1]" in coul and "A_k[1]" in coul
    stark = build_invariant_suite("stark", ModelSpec(2, g=1, gamma=1, f=Fraction(1, 3)))
    assert [k for k, _ in stark] == ["A_stark"]
    two = [k for k, _ in build_invariant_suite("two_center", ModelSpec(3, g=1, alpha=Fraction(2, 5), gamma1=1, gamma2=1))]
    assert any(k.startswith("L_perp") for k in two) and "A_two" in two


def test_zero_coupling_has_no_exchange_terms():
    spec = ModelSpec(3, g=0, gamma=1, f=Fraction(1, 3), alpha=Fraction(2, 5), gamma1=Fraction(1, 2), gamma2=Fraction(1, 3))
    G = Generators(spec)
    for name in CATALOG:
        if name in ("exchange",):
            continue
        op = G.build(name, *_n_args(name, 3))
        assert not op.has_exchange_terms(), name


def test_build_errors():
    spec = ModelSpec(2, g=1)
    with pytest.raises(UnknownOperatorError):
        build_generator("nonexistent", spec)
    with pytest.raises(IndexError):
        build_generator("L", spec, 1, 3)
    with pytest.raises(ValueError):
        build_generator("L", spec, 1)


def test_manifest_lists_catalog():
    doc = catalog_manifest({"k": "v"})
    names = {e["name"] for e in doc["operators"]}
    assert names == set(CATALOG)
    assert all(e["anchor"] and isinstance(e["arity"], int) for e in doc["operators"])
    assert doc["verified_forms"] == {"k": "v"}
