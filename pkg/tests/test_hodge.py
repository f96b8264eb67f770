import mpmath as mp
import pytest

from plectic import cxlinalg as cx
from plectic.errors import DegenerateInputError, InputError
from plectic.hodge import (
    Bidegree,
    PlecticHodgeStructure,
    check_morphism,
    elliptic_h1,
    hodge_filtration,
    is_effective_weight_one,
    orthogonality_check,
    plectic_jacobian,
    refine_to_classical,
    tensor,
    trivial_structure,
    validate,
)
from plectic.lattices import IntMatrix, Lattice
from plectic.tori import ComplexTorus, dual_torus, power_torus, tori_isomorphic

TAU1 = mp.mpc("0.3", "1.7")
TAU2 = mp.mpc("-0.2", "0.9")


def broken_symmetry():
    return PlecticHodgeStructure(1, Lattice.standard(2), {
        Bidegree((1,), (0,)): cx.mpm([[1], [TAU1]]),
        Bidegree((0,), (1,)): cx.mpm([[1], [TAU2]]),
    })


def test_validate_elliptic_passes():
    rep = validate(elliptic_h1(1, TAU1))
    assert rep.passed
    assert rep.span_defect < mp.mpf("1e-30")
    assert rep.conjugation_residual < mp.mpf("1e-30")


def test_validate_broken_symmetry_fails():
    rep = validate(broken_symmetry())
    assert not rep.passed
    assert rep.conjugation_residual > mp.mpf("0.1")


def test_validate_tensor_closure():
    t = tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2))
    assert validate(t).passed


def test_validate_dimension_mismatch_raises():
    with pytest.raises(InputError):
        validate(PlecticHodgeStructure(1, Lattice.standard(2), {
            Bidegree((1,), (0,)): cx.mpm([[1], [TAU1]]),
        }))


def test_refine_n1_identity():
    h = elliptic_h1(1, TAU1)
    cl = refine_to_classical(h)
    assert {pq: v.cols for pq, v in cl.sorted_pieces()} == {(1, 0): 1, (0, 1): 1}


def test_refine_kunneth_dims():
    t = tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2))
    cl = refine_to_classical(t)
    assert {pq: v.cols for pq, v in cl.sorted_pieces()} == {(2, 0): 1, (1, 1): 2, (0, 2): 1}


def test_refine_preserves_total_dimension():
    t = tensor(tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2)), elliptic_h1(1, TAU1))
    cl = refine_to_classical(t)
    assert sum(v.cols for v in cl.pieces.values()) == t.rank == 8


def test_effectivity():
    assert is_effective_weight_one(elliptic_h1(1, TAU1))
    bad = PlecticHodgeStructure(1, Lattice.standard(2), {
        Bidegree((2,), (-1,)): cx.mpm([[1], [TAU1]]),
        Bidegree((-1,), (2,)): cx.mpm([[1], [mp.conj(TAU1)]]),
    })
    assert not is_effective_weight_one(bad)
    t3 = tensor(tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2)), elliptic_h1(1, TAU1))
    assert is_effective_weight_one(t3)


def test_filtration_n1():
    h = elliptic_h1(1, TAU1)
    F = hodge_filtration(h, 1)
    assert cx.subspace_distance(F, h.pieces[Bidegree((1,), (0,))]) < mp.mpf("1e-30")


def test_filtration_tensor_formula():
    # F^{1_1}(H1 (x) H2) = F^1 H^1(T_1) (x) H^1(T_2, C)
    h1, h2 = elliptic_h1(1, TAU1), elliptic_h1(1, TAU2)
    t = tensor(h1, h2)
    F = hodge_filtration(t, 1)
    full2 = cx.hstack([h2.pieces[Bidegree((1,), (0,))], h2.pieces[Bidegree((0,), (1,))]])
    want = cx.kron(h1.pieces[Bidegree((1,), (0,))], full2)
    assert F.cols == t.rank // 2 == 2
    assert cx.subspace_distance(F, want) < mp.mpf("1e-30")


def test_filtration_enumeration_and_range():
    t = tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2))
    F = hodge_filtration(t, 2)
    parts = [t.pieces[Bidegree((1, 1), (0, 0))], t.pieces[Bidegree((0, 1), (1, 0))]]
    assert cx.subspace_distance(F, cx.hstack(parts)) < mp.mpf("1e-30")
    with pytest.raises(InputError):
        hodge_filtration(t, 3)


def test_filtration_half_rank_every_index():
    t3 = tensor(tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2)), elliptic_h1(1, TAU1))
    for j in (1, 2, 3):
        assert hodge_filtration(t3, j).cols == t3.rank // 2


def test_tensor_with_trivial():
    h = elliptic_h1(1, TAU1)
    t = tensor(h, trivial_structure(0))
    assert t.rank == 2 and t.n == 1
    assert {bd.key() for bd in t.pieces} == {((1,), (0,)), ((0,), (1,))}


def test_tensor_rank_four_pieces():
    t = tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2))
    assert t.rank == 4
    assert all(v.cols == 1 for v in t.pieces.values())
    assert is_effective_weight_one(t)


def test_tensor_associativity_dims():
    a, b, c = elliptic_h1(1, TAU1), elliptic_h1(1, TAU2), elliptic_h1(1, mp.mpc(0, 1))
    left = tensor(tensor(a, b), c)
    right = tensor(a, tensor(b, c))
    assert {k.key(): v.cols for k, v in left.sorted_pieces()} == \
        {k.key(): v.cols for k, v in right.sorted_pieces()}


def test_jacobian_n1_is_dual_torus():
    h = elliptic_h1(1, TAU1)
    J = plectic_jacobian(h, 1)
    E = ComplexTorus(1, cx.mpm([[1, TAU1]]))
    ok, _, _, resid = tori_isomorphic(J, dual_torus(E))
    assert ok and resid < mp.mpf("1e-30")


def test_jacobian_tensor_product_formula():
    t = tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2))
    J = plectic_jacobian(t, 1)
    E1 = ComplexTorus(1, cx.mpm([[1, TAU1]]))
    target = power_torus(dual_torus(E1), 2)
    ok, _, _, resid = tori_isomorphic(J, target)
    assert ok and resid < mp.mpf("1e-9")


def test_jacobian_dimension():
    t = tensor(elliptic_h1(1, TAU1), elliptic_h1(1, TAU2))
    for j in (1, 2):
        assert plectic_jacobian(t, j).g == t.rank // 2


def test_jacobian_degenerate_projection():
    hol = cx.mpm([[1], [TAU1]])
    h = PlecticHodgeStructure(1, Lattice.standard(2), {
        Bidegree((1,), (0,)): hol,
        Bidegree((0,), (1,)): hol,  # complement coincides with the filtration
    })
    with pytest.raises(DegenerateInputError):
        plectic_jacobian(h, 1)


def test_morphism_identity_scalar_swap():
    h = elliptic_h1(1, TAU1)
    assert check_morphism(IntMatrix.identity(2), h, h)
    assert check_morphism(IntMatrix.identity(2).scale(3), h, h)
    swap = IntMatrix.from_rows([[0, 1], [1, 0]])
    assert not check_morphism(swap, h, h)


def test_morphism_shape_mismatch():
    h = elliptic_h1(1, TAU1)
    t = tensor(h, h)
    with pytest.raises(InputError):
        check_morphism(IntMatrix.identity(2), h, t)


def test_morphism_composition_stability():
    h = elliptic_h1(1, TAU1)
    f = IntMatrix.identity(2).scale(2)
    g = IntMatrix.identity(2).scale(-3)
    assert check_morphism(f, h, h) and check_morphism(g, h, h)
    assert check_morphism(g @ f, h, h)


def test_orthogonality_elliptic_and_tensor():
    h = elliptic_h1(1, TAU1)
    symp = IntMatrix.from_rows([[0, 1], [-1, 0]])
    assert orthogonality_check(h, symp)
    t = tensor(h, elliptic_h1(1, TAU2))
    assert orthogonality_check(t, symp.kron(symp))


def test_orthogonality_random_pairing_fails():
    h = elliptic_h1(1, TAU1)
    assert not orthogonality_check(h, IntMatrix.from_rows([[1, 1], [0, 1]]))


def test_orthogonality_non_perfect_raises():
    h = elliptic_h1(1, TAU1)
    with pytest.raises(DegenerateInputError):
        orthogonality_check(h, IntMatrix.from_rows([[2, 0], [0, 1]]))
