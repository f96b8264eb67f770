import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plectic.errors import InputError
from plectic.lattices import (
    IntMatrix,
    Lattice,
    kernel_integer,
    lattice_membership,
    row_lattice_basis,
    saturation,
    smith_normal_form,
    solve_integer,
    torsion_free_quotient,
)


def snf_invariants_oracle(rows):
    """Invariant factors via gcds of k x k minors: d_k = D_k / D_{k-1},
    independent of any elimination strategy."""
    import itertools

    m = [list(r) for r in rows]
    R, C = len(m), len(m[0])
    out = []
    prev = 1
    for k in range(1, min(R, C) + 1):
        g = 0
        for ri in itertools.combinations(range(R), k):
            for ci in itertools.combinations(range(C), k):
                sub = IntMatrix.from_rows([[m[i][j] for j in ci] for i in ri])
                g = math.gcd(g, abs(sub.det()))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def check_snf(m):
    U, D, V = smith_normal_form(m)
    assert (U @ m @ V).entries == D.entries
    assert U.is_unimodular() and V.is_unimodular()
    diag = [D.entries[i][i] for i in range(min(m.rows, m.cols))]
    for i in range(len(diag) - 1):
        if diag[i] == 0:
            assert diag[i + 1] == 0
        else:
            assert diag[i + 1] % diag[i] == 0
    for i in range(D.rows):
        for j in range(D.cols):
            if i != j:
                assert D.entries[i][j] == 0
    return diag


def test_snf_identity():
    U, D, V = smith_normal_form(IntMatrix.identity(3))
    assert D.entries == IntMatrix.identity(3).entries
    assert U.entries == IntMatrix.identity(3).entries
    assert V.entries == IntMatrix.identity(3).entries


def test_snf_small_example():
    m = IntMatrix.from_rows([[2, 4], [6, 8]])
    diag = check_snf(m)
    assert diag == snf_invariants_oracle(m.entries) == [2, 4]


def test_snf_zero():
    m = IntMatrix.zeros(2, 2)
    U, D, V = smith_normal_form(m)
    assert D.is_zero()


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.integers(0, 2**30),
)
def test_snf_random(rows, cols, seed):
    rng = random.Random(seed)
    m = IntMatrix.from_rows(
        [[rng.randint(-10, 10) for _ in range(cols)] for _ in range(rows)]
    )
    diag = check_snf(m)
    assert [d for d in diag if d] == snf_invariants_oracle(m.entries)


def test_torsion_free_quotient_self():
    amb = Lattice.standard(2)
    assert torsion_free_quotient(amb, amb).rank == 0


def test_torsion_free_quotient_finite():
    amb = Lattice.standard(2)
    sub = Lattice.from_rows(2, [[2, 0], [0, 2]])
    assert torsion_free_quotient(sub, amb).rank == 0


def test_torsion_free_quotient_rank_one():
    amb = Lattice.standard(2)
    sub = Lattice.from_rows(2, [[2, 0]])
    q = torsion_free_quotient(sub, amb)
    assert q.rank == 1
    assert sorted(abs(x) for x in q.basis.entries[0]) == [0, 1]
    assert abs(q.basis.entries[0][1]) == 1


def test_torsion_free_quotient_containment_error():
    amb = Lattice.from_rows(2, [[2, 0], [0, 2]])
    sub = Lattice.from_rows(2, [[1, 0]])
    with pytest.raises(InputError):
        torsion_free_quotient(sub, amb)


def test_quotient_rank_matches_saturation():
    rng = random.Random(11)
    for _ in range(20):
        rows = [[rng.randint(-4, 4) for _ in range(4)] for _ in range(rng.randint(1, 3))]
        m = IntMatrix.from_rows(rows)
        if m.rank() != m.rows:
            continue
        sub = Lattice.from_rows(4, rows)
        q = torsion_free_quotient(sub, Lattice.standard(4))
        sat_rank = len(saturation(m))
        assert q.rank == 4 - sat_rank


def test_membership_zero_and_sum():
    L = Lattice.from_rows(3, [[1, 2, 0], [0, 1, 1], [0, 0, 3]])
    assert lattice_membership([0, 0, 0], L) == (0, 0, 0)
    v = [1, 3, 1]  # row0 + row1
    assert lattice_membership(v, L) == (1, 1, 0)


def test_membership_rejects_perturbation():
    L = Lattice.standard(2)
    tol = 1e-6
    assert lattice_membership([1 + 10 * tol, 0], L, tol=tol) is None
    assert lattice_membership([1 + 0.01 * tol, 0], L, tol=tol) == (1, 0)


def test_membership_rank_deficient():
    with pytest.raises(InputError):
        Lattice.from_rows(2, [[1, 0], [2, 0]])
    L = Lattice(2, IntMatrix.from_rows([[1, 0]]))
    # fine: rank-1 lattice in a rank-2 space
    assert lattice_membership([3, 0], L) == (3,)


@settings(max_examples=40, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
def test_membership_translation_invariance(a, b, c):
    L = Lattice.from_rows(3, [[1, 0, 2], [0, 3, 1]])
    base = [0.25, 0.0, 0.5]
    res = lattice_membership(base, L, tol=1e-9)
    shift = [a * 1 + b * 0, a * 0 + b * 3, a * 2 + b * 1]
    moved = [x + s for x, s in zip(base, shift)]
    res2 = lattice_membership(moved, L, tol=1e-9)
    if res is None:
        assert res2 is None
    else:
        assert res2 == (res[0] + a, res[1] + b)
    assert c is not None  # keep hypothesis happy about unused draws


def test_kernel_and_solve():
    A = IntMatrix.from_rows([[1, 2, 3]])
    ker = kernel_integer(A)
    assert len(ker) == 2
    for k in ker:
        assert sum(a * b for a, b in zip(A.entries[0], k)) == 0
    assert solve_integer(IntMatrix.from_rows([[2, 0], [0, 3]]), (4, 9)) == (2, 3)
    assert solve_integer(IntMatrix.from_rows([[2, 0], [0, 3]]), (3, 9)) is None


def test_row_basis_and_saturation():
    rows = row_lattice_basis(IntMatrix.from_rows([[2, 0], [0, 2], [1, 1]]))
    m = IntMatrix.from_rows(rows)
    assert m.rows == 2 and abs(m.det()) == 2
    assert saturation(IntMatrix.from_rows([[2, 0]])) == [(1, 0)]


def test_serialization_round_trip():
    m = IntMatrix.from_rows([[2**80, -1], [0, 7]])
    back = IntMatrix.from_json(m.to_json())
    assert back.entries == m.entries
    L = Lattice.from_rows(2, [[2**80, -1]])
    assert Lattice.from_json(L.to_json()).basis.entries == L.basis.entries
