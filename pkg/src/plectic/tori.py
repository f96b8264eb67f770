"""Complex tori via period matrices: duals, endomorphism lattices,
real-multiplication detection, and the algebraization pipeline that
normalizes an RM torus to the standard model C_Sigma / (O_L z + ideal).

Exact integer work (orders, module decompositions) runs over Z and Q;
period-matrix work runs at the configured mpmath precision.  Integer
kernels of real linear constraints are found with sympy's LLL and then
verified and saturated exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import sympy

from . import cxlinalg as cx
from .config import resolve_tolerance, working_precision
from .errors import DegenerateInputError, InputError, SearchExhaustedError
from .lattices import (
    IntMatrix,
    fraction_solve,
    kernel_integer,
    lattices_equal,
    row_lattice_basis,
    saturation,
    smith_normal_form,
    solve_integer,
)
from .numberfields import FieldOrder, FractionalIdealRep

__all__ = [
    "ComplexTorus",
    "RMStructure",
    "RMCertificate",
    "AlgebraizationResult",
    "dual_torus",
    "product_torus",
    "power_torus",
    "endomorphisms",
    "hom_lattice",
    "detect_rm",
    "construct_rm_torus",
    "enlarge_to_maximal",
    "steinitz_decompose",
    "algebraize_rm",
    "jacobian_is_abelian_certificate",
    "tori_isomorphic",
]


def _fr(x) -> mp.mpf:
    f = Fraction(x)
    return mp.mpf(f.numerator) / mp.mpf(f.denominator)


@dataclass(frozen=True)
class ComplexTorus:
    """V/Lambda presented by a g x 2g period matrix whose columns
    generate the lattice; optionally carries a real-multiplication
    witness."""

    g: int
    periods: mp.matrix
    rm: "RMStructure | None" = None

    def __post_init__(self):
        if self.periods.rows != self.g or self.periods.cols != 2 * self.g:
            raise InputError("period matrix must be g x 2g")
        if abs(mp.det(self.real_matrix())) == 0:
            raise DegenerateInputError("periods do not span a full lattice")

    def real_matrix(self) -> mp.matrix:
        """2g x 2g real matrix whose columns are the lattice generators."""
        return cx.real_imag_stack(self.periods)

    def complex_structure(self) -> mp.matrix:
        """Multiplication by i written on lattice coordinates."""
        g = self.g
        with working_precision():
            P = self.real_matrix()
            J0 = mp.matrix(2 * g, 2 * g)
            for k in range(g):
                J0[k, g + k] = mp.mpf(-1)
                J0[g + k, k] = mp.mpf(1)
            return P**-1 * J0 * P

    def multiplier(self, N: IntMatrix):
        """Complex matrix M with M * periods = periods * N, and the
        relative residual of that equation."""
        with working_precision():
            Pi = self.periods
            B = Pi * cx.mpm(N.entries)
            G = Pi * cx.ctranspose(Pi)
            M = B * cx.ctranspose(Pi) * (G**-1)
            resid = cx.frob(M * Pi - B) / max(mp.mpf(1), cx.frob(B))
            return M, resid

    def to_json(self) -> dict:
        from .serialize import complex_to_json

        return {
            "g": self.g,
            "periods": [[complex_to_json(self.periods[i, j]) for j in range(2 * self.g)]
                        for i in range(self.g)],
        }


@dataclass(frozen=True)
class RMStructure:
    """Action of an order's integral basis on the lattice of a torus."""

    field: FieldOrder
    action: tuple  # one IntMatrix per basis element; action[0] == identity

    def __post_init__(self):
        d = self.field.degree
        if len(self.action) != d:
            raise InputError("need one action matrix per basis element")
        n = self.action[0].rows
        if any(a.rows != n or a.cols != n for a in self.action):
            raise InputError("action matrices must be square of equal size")
        if self.action[0].entries != IntMatrix.identity(n).entries:
            raise InputError("action of 1 must be the identity")
        for a, b in itertools.combinations(self.action, 2):
            if (a @ b).entries != (b @ a).entries:
                raise InputError("action matrices do not commute")
        for i in range(d):
            for j in range(d):
                prod = self.action[i] @ self.action[j]
                want = IntMatrix.zeros(n, n)
                for k in range(d):
                    c = self.field.mult_table[i][j][k]
                    if c:
                        want = want + self.action[k].scale(c)
                if prod.entries != want.entries:
                    raise InputError("action does not satisfy the multiplication table")

    @property
    def lattice_rank(self) -> int:
        return self.action[0].rows


@dataclass(frozen=True)
class AlgebraizationResult:
    z: tuple  # one mpc per real embedding, all with positive imaginary part
    ideal: FractionalIdealRep
    iso: mp.matrix  # complex g x g carrying the input torus onto the model
    residual: mp.mpf
    model: ComplexTorus


@dataclass(frozen=True)
class RMCertificate:
    field: FieldOrder
    z: tuple
    ideal: FractionalIdealRep
    iso: mp.matrix
    residual: mp.mpf


# ----------------------------------------------------------------------
# basic constructions
# ----------------------------------------------------------------------


def dual_torus(t: ComplexTorus) -> ComplexTorus:
    """Dual torus: lattice of antilinear functionals integral against
    Im<.,.> on the original lattice."""
    g = t.g
    with working_precision():
        # solve Im(sum_i w_i conj(period_ij)) = delta_jk for each dual generator
        A = mp.matrix(2 * g, 2 * g)
        for j in range(2 * g):
            for i in range(g):
                p = t.periods[i, j]
                A[j, i] = -mp.im(p)          # coefficient of Re(w_i)
                A[j, g + i] = mp.re(p)       # coefficient of Im(w_i)
        dual = mp.matrix(g, 2 * g)
        for k in range(2 * g):
            rhs = mp.matrix(2 * g, 1)
            rhs[k, 0] = mp.mpf(1)
            sol = mp.lu_solve(A, rhs)
            for i in range(g):
                dual[i, k] = mp.mpc(sol[i, 0], sol[g + i, 0])
        return ComplexTorus(g, dual)


def product_torus(a: ComplexTorus, b: ComplexTorus) -> ComplexTorus:
    g = a.g + b.g
    out = mp.matrix(g, 2 * g)
    for i in range(a.g):
        for j in range(2 * a.g):
            out[i, j] = a.periods[i, j]
    for i in range(b.g):
        for j in range(2 * b.g):
            out[a.g + i, 2 * a.g + j] = b.periods[i, j]
    return ComplexTorus(g, out)


def power_torus(t: ComplexTorus, k: int) -> ComplexTorus:
    out = t
    for _ in range(k - 1):
        out = product_torus(out, t)
    return out


# ----------------------------------------------------------------------
# integer kernels of real constraints (LLL + exact verification)
# ----------------------------------------------------------------------


def _lll_rows(rows):
    dm = sympy.polys.matrices.DomainMatrix(
        [[sympy.ZZ(int(x)) for x in r] for r in rows], (len(rows), len(rows[0])), sympy.ZZ
    )
    return [[int(x) for x in r] for r in dm.lll().to_Matrix().tolist()]


def integer_kernel_real(L: mp.matrix):
    """Z-basis of the integer points of ker(L) for a real matrix L.

    Candidates come from LLL on a scaled embedding.  A genuine kernel
    vector of height h has residual at the precision floor 2^-p * h,
    while the Diophantine near-misses LLL also produces stall near
    2^-scale * h; keeping the scale well below the precision separates
    the two, and the accepted set is saturated exactly afterwards.
    """
    m, n = L.rows, L.cols
    with working_precision():
        ver_bits = mp.mp.prec - 40
        scale = mp.mpf(2) ** ((3 * ver_bits) // 4)
        floor = mp.mpf(2) ** (-ver_bits)
        rows = []
        for i in range(n):
            enc = [int(k == i) for k in range(n)]
            enc += [int(mp.nint(scale * L[j, i])) for j in range(m)]
            rows.append(enc)
        reduced = _lll_rows(rows)
        found = []
        for row in reduced:
            x = row[:n]
            if all(v == 0 for v in x):
                continue
            h = max(abs(v) for v in x)
            resid = max(abs(mp.fsum(L[j, i] * x[i] for i in range(n))) for j in range(m))
            if resid <= floor * max(1, h) * n:
                found.append(tuple(x))
    if not found:
        return []
    sat = saturation(IntMatrix.from_rows(found))
    # saturation bases from the Smith form can be badly skewed; reduce
    return [tuple(r) for r in _lll_rows(sat)]


def hom_lattice(src: ComplexTorus, dst: ComplexTorus):
    """Z-basis of Hom(src, dst) as integer matrices on lattice coordinates."""
    with working_precision():
        J1 = src.complex_structure()
        J2 = dst.complex_structure()
        r, c = 2 * dst.g, 2 * src.g
        # constraint U J1 - J2 U = 0, columns indexed by entries of U
        L = mp.matrix(r * c, r * c)
        for i in range(r):
            for j in range(c):
                col = i * c + j
                for jj in range(c):  # (U J1)[i, jj] gets U[i, j] * J1[j, jj]
                    L[i * c + jj, col] += J1[j, jj]
                for ii in range(r):  # (J2 U)[ii, j] gets J2[ii, i] * U[i, j]
                    L[ii * c + j, col] -= J2[ii, i]
        vecs = integer_kernel_real(L)
    out = []
    for v in vecs:
        out.append(IntMatrix(r, c, tuple(tuple(v[i * c + j] for j in range(c)) for i in range(r))))
    return out


def endomorphisms(t: ComplexTorus, height_bound: int, tol=None):
    """Z-basis of the lattice generated by integer endomorphism matrices
    with entries bounded by height_bound, paired with their complex
    multipliers."""
    if height_bound < 1:
        raise InputError("height_bound must be >= 1")
    basis = hom_lattice(t, t)
    if not basis:
        return []
    bounded = _bounded_lattice_elements(basis, height_bound)
    if not bounded:
        return []
    rows = row_lattice_basis(IntMatrix.from_rows([_vec(N) for N in bounded]))
    n = 2 * t.g
    out = []
    tol = resolve_tolerance(tol)
    for r in rows:
        N = _unvec(r, n, n)
        M, resid = t.multiplier(N)
        if resid > tol * 100:
            raise DegenerateInputError("endomorphism candidate failed verification")
        out.append((N, M))
    return out


def _vec(N: IntMatrix):
    return tuple(x for row in N.entries for x in row)


def _unvec(v, rows, cols) -> IntMatrix:
    return IntMatrix(rows, cols, tuple(tuple(v[i * cols + j] for j in range(cols))
                                       for i in range(rows)))


def _bounded_lattice_elements(basis, height_bound, coeff_bound=None):
    """Elements of the lattice spanned by `basis` whose entries stay
    within height_bound, from a bounded coefficient search."""
    rank = len(basis)
    if coeff_bound is None:
        coeff_bound = height_bound
    if rank > 6:
        # reduced bases at desk scale are short; fall back to filtering
        return [N for N in basis if max(abs(x) for r in N.entries for x in r) <= height_bound]
    out = []
    rng = range(-coeff_bound, coeff_bound + 1)
    for coeffs in itertools.product(rng, repeat=rank):
        if all(c == 0 for c in coeffs):
            continue
        if next((c for c in coeffs if c != 0), 1) < 0:
            continue  # skip global sign duplicates
        N = IntMatrix.zeros(basis[0].rows, basis[0].cols)
        for c, B in zip(coeffs, basis):
            if c:
                N = N + B.scale(c)
        if max(abs(x) for r in N.entries for x in r) <= height_bound:
            out.append(N)
    return out


# ----------------------------------------------------------------------
# real multiplication: detection
# ----------------------------------------------------------------------


def _min_poly(N: IntMatrix):
    """Exact minimal polynomial of an integer matrix as a sympy Poly."""
    x = sympy.Symbol("x")
    M = sympy.Matrix([list(r) for r in N.entries])
    cp = sympy.Poly(M.charpoly(x).as_expr(), x)
    factors = sympy.factor_list(cp)[1]
    factors = sorted(factors, key=lambda fe: (sympy.Poly(fe[0], x).degree(), str(fe[0])))
    candidates = []
    ranges = [range(1, e + 1) for _, e in factors]
    for exps in itertools.product(*ranges):
        p = sympy.Poly(1, x)
        for (f, _), e in zip(factors, exps):
            p = p * sympy.Poly(f, x) ** e
        candidates.append(p)
    candidates.sort(key=lambda p: p.degree())
    for p in candidates:
        if _poly_eval_matrix(p, N).is_zero():
            return p
    return cp  # unreachable: Cayley-Hamilton


def _poly_eval_matrix(p, N: IntMatrix) -> IntMatrix:
    coeffs = [int(c) for c in p.all_coeffs()]
    n = N.rows
    out = IntMatrix.zeros(n, n)
    for c in coeffs:  # Horner
        out = (out @ N) + IntMatrix.identity(n).scale(c)
    return out


def _is_scalar(N: IntMatrix) -> bool:
    n = N.rows
    c = N.entries[0][0]
    return N.entries == IntMatrix.identity(n).scale(c).entries


def detect_rm(t: ComplexTorus, height_bound: int = 10, field_hint: FieldOrder | None = None):
    """Search the endomorphism lattice for the action of a totally real
    field of degree g; returns an RMStructure or None.

    The returned order is theta^{-1}(End(T)), the full order realized on
    the lattice, so already-maximal actions are detected as maximal.  A
    non-generic torus can carry several real-multiplication fields; pass
    field_hint to select a specific one (matched on the fundamental
    discriminant, degree 2 only).
    """
    g = t.g
    if g == 1:
        return RMStructure(FieldOrder.rationals(), (IntMatrix.identity(2),))
    basis = hom_lattice(t, t)
    if not basis:
        return None
    for coeffs in _coeff_enumeration(len(basis), height_bound):
        N = IntMatrix.zeros(2 * g, 2 * g)
        for c, B in zip(coeffs, basis):
            if c:
                N = N + B.scale(c)
        if N.is_zero() or _is_scalar(N):
            continue
        p = _min_poly(N)
        if p.degree() != g or not p.is_irreducible:
            continue
        if len(p.real_roots()) != g:
            continue  # not totally real (CM directions are rejected here)
        if field_hint is not None and not _same_quadratic_field(p, field_hint):
            continue
        return _order_from_generator(N, basis, g)
    return None


def _same_quadratic_field(p, field: FieldOrder) -> bool:
    from .numberfields import _fundamental_part

    if field.degree != 2 or p.degree() != 2:
        raise InputError("field hints are supported for degree 2 only")
    c = [int(v) for v in p.all_coeffs()]
    return _fundamental_part(c[1] * c[1] - 4 * c[2]) == _fundamental_part(field.discriminant())


def _coeff_enumeration(rank, bound):
    if rank > 6:
        rank = 6
    for h in range(1, bound + 1):
        for coeffs in itertools.product(range(-h, h + 1), repeat=rank):
            if max((abs(c) for c in coeffs), default=0) != h:
                continue
            if next((c for c in coeffs if c != 0), 1) < 0:
                continue
            yield coeffs


def _order_from_generator(N: IntMatrix, endo_basis, g: int):
    """Full order End(T) intersect Q(N), presented on a basis {1, w, ...}."""
    n = N.rows
    powers = []
    P = IntMatrix.identity(n)
    for _ in range(g):
        powers.append(_vec(P))
        P = P @ N
    S = IntMatrix.from_rows(powers)
    comp = kernel_integer(S)  # null space of the row span of S
    K = IntMatrix.from_rows([_vec(B) for B in endo_basis])
    if comp:
        Nmat = IntMatrix.from_rows(comp)
        constr = Nmat @ K.transpose()
        cvecs = kernel_integer(constr)
    else:
        cvecs = [tuple(int(i == j) for j in range(K.rows)) for i in range(K.rows)]
    order_rows = [K.transpose().apply(c) for c in cvecs]
    order_rows = row_lattice_basis(IntMatrix.from_rows(order_rows))
    if len(order_rows) != g:
        raise DegenerateInputError("order lattice has unexpected rank")
    # normalize the basis so that the identity comes first
    ident = _vec(IntMatrix.identity(n))
    B = IntMatrix.from_rows(order_rows)
    c = solve_integer(B.transpose(), ident)
    if c is None:
        raise DegenerateInputError("identity not in the detected order")
    from .lattices import Lattice, torsion_free_quotient

    sub = Lattice.from_rows(g, [c])
    quot = torsion_free_quotient(sub, Lattice.standard(g))
    basis_vecs = [ident] + [B.transpose().apply(r) for r in quot.basis.entries]
    mats = [_unvec(v, n, n) for v in basis_vecs]
    # multiplication table over the normalized basis, exact
    Bt = IntMatrix.from_rows(basis_vecs).transpose()
    table = []
    for i in range(g):
        row = []
        for j in range(g):
            prod = _vec(mats[i] @ mats[j])
            sol = solve_integer(Bt, prod)
            if sol is None:
                raise DegenerateInputError("detected order is not closed under products")
            row.append(tuple(int(v) for v in sol))
        table.append(tuple(row))
    gen_poly = _min_poly(mats[1]) if g >= 2 else sympy.Poly([1, -1], sympy.Symbol("x"))
    coeffs = tuple(int(c) for c in gen_poly.all_coeffs())
    if g == 2:
        tt, nn = -coeffs[1], coeffs[2]
        field = FieldOrder.quadratic(tt, nn)
    else:
        field = FieldOrder(g, coeffs, tuple(table))
    return RMStructure(field, tuple(mats))


# ----------------------------------------------------------------------
# real multiplication: construction and normalization
# ----------------------------------------------------------------------


def construct_rm_torus(field: FieldOrder, z, ideal: FractionalIdealRep | None = None) -> ComplexTorus:
    """Torus C_Sigma / (O.z + ideal) over all real embeddings of the
    order, carrying the evident action."""
    d = field.degree
    if ideal is None:
        ideal = field.unit_ideal()
    if len(z) != d:
        raise InputError("z must have one component per real embedding")
    with working_precision():
        zz = [mp.mpmathify(c) for c in z]
        if any(mp.im(c) <= 0 for c in zz):
            raise InputError("every component of z must have positive imaginary part")
        emb = field.embeddings()
        periods = mp.matrix(d, 2 * d)
        for l in range(d):
            for k in range(d):
                periods[l, k] = field.element_embedding(_basis_unit(d, k), emb[l]) * zz[l]
            for i in range(d):
                periods[l, d + i] = field.element_embedding(ideal.basis[i], emb[l])
        action = []
        for k in range(d):
            Mk = field.mult_matrix(_basis_unit(d, k))
            Ck = _ideal_action(field, ideal, k)
            n = 2 * d
            rows = [[0] * n for _ in range(n)]
            for i in range(d):
                for j in range(d):
                    rows[i][j] = int(Fraction(Mk[i][j]))
                    rows[d + i][d + j] = Ck[i][j]
            action.append(IntMatrix.from_rows(rows))
        rm = RMStructure(field, tuple(action))
        return ComplexTorus(d, periods, rm=rm)


def _basis_unit(d, k):
    return tuple(Fraction(int(i == k)) for i in range(d))


def _ideal_action(field: FieldOrder, ideal: FractionalIdealRep, k: int):
    """Integer matrix of multiplication by basis element k on the ideal."""
    d = field.degree
    cols = []
    Bt = [[ideal.basis[j][i] for j in range(d)] for i in range(d)]
    for j in range(d):
        prod = field.mul_coords(_basis_unit(d, k), ideal.basis[j])
        sol = fraction_solve(Bt, prod)
        if any(s.denominator != 1 for s in sol):
            raise InputError("ideal is not closed under the order action")
        cols.append([int(s) for s in sol])
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def enlarge_to_maximal(t: ComplexTorus, rm: RMStructure):
    """Pass to the isogenous torus with action by the maximal order.

    Returns (torus, rm, inclusion) where inclusion expresses the old
    lattice basis in the new one; the new lattice L' satisfies
    L <= L' <= (1/n) L with n the index of the order.
    """
    field = rm.field
    if field.is_maximal:
        n = rm.lattice_rank
        return t, rm, IntMatrix.identity(n)
    if field.degree != 2:
        raise InputError("maximal orders beyond degree 2 are out of scope")
    t0, n0 = -field.min_poly[1], field.min_poly[2]
    disc = t0 * t0 - 4 * n0
    from .numberfields import _fundamental_part

    d0 = _fundamental_part(disc)
    f = _isqrt(disc // d0)
    if f * f * d0 != disc:
        raise InputError("failed to compute the maximal order (reducible min_poly?)")
    a = next(
        a for a in range(0, 2 * f * f + 1)
        if (t0 + 2 * a) % f == 0 and (a * a + a * t0 + n0) % (f * f) == 0
    )
    A = rm.action[1]
    n = A.rows
    shifted = A + IntMatrix.identity(n).scale(a)
    stacked = [list(r) for r in IntMatrix.identity(n).scale(f).entries]
    stacked += [list(r) for r in shifted.transpose().entries]  # columns generate the image
    H = row_lattice_basis(IntMatrix.from_rows(stacked))  # spans f * Lambda'
    Hm = IntMatrix.from_rows(H)
    with working_precision():
        T = cx.mpm([[_fr(Fraction(Hm.entries[j][i], f)) for j in range(n)] for i in range(n)])
        new_periods = t.periods * T
    # action of the maximal-order generator on the new basis, exact
    Hfrac = [[Fraction(Hm.entries[j][i], f) for j in range(n)] for i in range(n)]  # columns=gens
    gen_old = [[Fraction((A + IntMatrix.identity(n).scale(a)).entries[i][j], f)
                for j in range(n)] for i in range(n)]
    new_gen = _conjugate_rational(Hfrac, gen_old)
    if any(x.denominator != 1 for r in new_gen for x in r):
        raise DegenerateInputError("enlarged lattice is not stable under the maximal order")
    Agen = IntMatrix.from_rows([[int(x) for x in r] for r in new_gen])
    tmax = (t0 + 2 * a) // f
    nmax = (a * a + a * t0 + n0) // (f * f)
    field_max = FieldOrder.quadratic(tmax, nmax, is_maximal=True)
    rm_max = RMStructure(field_max, (IntMatrix.identity(n), Agen))
    inclusion_frac = _invert_rational(Hfrac)
    if any(x.denominator != 1 for r in inclusion_frac for x in r):
        raise DegenerateInputError("old lattice does not embed in the enlarged one")
    inclusion = IntMatrix.from_rows([[int(x) for x in r] for r in inclusion_frac])
    new_t = ComplexTorus(t.g, new_periods, rm=rm_max)
    return new_t, rm_max, inclusion


def _isqrt(n: int) -> int:
    import math

    return math.isqrt(n)


def _conjugate_rational(T, M):
    """T^{-1} M T for rational square matrices given as row lists."""
    n = len(T)
    Tinv = _invert_rational(T)
    MT = [[sum(M[i][k] * T[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return [[sum(Tinv[i][k] * MT[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _invert_rational(T):
    n = len(T)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        cols.append(fraction_solve(T, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def steinitz_decompose(rm: RMStructure):
    """Unimodular change of basis exhibiting the lattice as O_L + ideal.

    Returns (U, ideal): the columns of U list first a basis {w_k . v} of
    a free rank-one summand, then an equivariant lift of the quotient,
    which is realized as the fractional ideal."""
    field = rm.field
    d = field.degree
    if not field.is_maximal:
        raise InputError("steinitz decomposition requires a maximal order")
    n = rm.lattice_rank
    if n != 2 * d:
        raise InputError("lattice must have rank two over the order")
    v = _find_free_vector(rm)
    M1_rows = [rm.action[k].apply(v) for k in range(d)]
    U_, D_, V_ = smith_normal_form(IntMatrix.from_rows(M1_rows))
    if any(D_.entries[i][i] not in (0, 1) for i in range(min(D_.rows, D_.cols))):
        raise DegenerateInputError("free summand is not saturated")
    from .lattices import int_inverse_unimodular

    W = int_inverse_unimodular(V_)
    pi = IntMatrix.from_rows([list(r) for r in V_.transpose().entries[d:]])
    sec = IntMatrix.from_rows([[W.entries[d + j][i] for j in range(d)] for i in range(n)])
    B = [pi @ rm.action[k] @ sec for k in range(d)]
    # realize the quotient as a fractional ideal via q0 = first basis vector
    q0 = tuple(int(i == 0) for i in range(d))
    cols = [B[k].apply(q0) for k in range(d)]
    A = [[Fraction(cols[k][i]) for k in range(d)] for i in range(d)]
    xs = []
    for i in range(d):
        e = [Fraction(int(j == i)) for j in range(d)]
        xs.append(fraction_solve(A, e))
    ideal = FractionalIdealRep(field, tuple(tuple(x) for x in xs))
    S = _equivariant_section(rm, pi, B)
    cols_U = M1_rows + [tuple(S.entries[i][j] for i in range(n)) for j in range(d)]
    U = IntMatrix.from_rows(cols_U).transpose()
    if abs(U.det()) != 1:
        raise DegenerateInputError("steinitz change of basis is not unimodular")
    return U, ideal


def _find_free_vector(rm: RMStructure):
    """Lattice vector whose order-orbit is a saturated free summand."""
    d = rm.field.degree
    n = rm.lattice_rank
    for h in range(1, 4):
        for cand in itertools.product(range(-h, h + 1), repeat=n):
            if max((abs(c) for c in cand), default=0) != h:
                continue
            rows = [rm.action[k].apply(cand) for k in range(d)]
            M = IntMatrix.from_rows(rows)
            if M.rank() != d:
                continue
            if lattices_equal(saturation(M), list(M.entries)):
                return tuple(cand)
    raise SearchExhaustedError("no order-primitive lattice vector found")


def _equivariant_section(rm: RMStructure, pi: IntMatrix, B):
    """Integer section S with pi S = I and S B_k = A_k S for all k."""
    d = rm.field.degree
    n = rm.lattice_rank
    nunk = n * d
    rows = []
    rhs = []
    for i in range(d):  # pi S = I
        for j in range(d):
            row = [0] * nunk
            for l in range(n):
                row[l * d + j] += pi.entries[i][l]
            rows.append(row)
            rhs.append(int(i == j))
    for k in range(1, d):  # S B_k - A_k S = 0
        A = rm.action[k]
        for i in range(n):
            for j in range(d):
                row = [0] * nunk
                for l in range(d):
                    row[i * d + l] += B[k].entries[l][j]
                for l in range(n):
                    row[l * d + j] -= A.entries[i][l]
                rows.append(row)
                rhs.append(0)
    sol = solve_integer(IntMatrix.from_rows(rows), tuple(rhs))
    if sol is None:
        raise DegenerateInputError("no equivariant splitting over the order")
    return IntMatrix(n, d, tuple(tuple(sol[i * d + j] for j in range(d)) for i in range(n)))


def algebraize_rm(t: ComplexTorus, rm: RMStructure, sign_bound: int = 50, tol=None) -> AlgebraizationResult:
    """Normalize an RM torus to the standard model: eigen-split V over
    the real embeddings, read off the two Steinitz coordinates, and
    correct signs by a small field element so every modulus lands in the
    upper half plane."""
    tol = resolve_tolerance(tol)
    field = rm.field
    d = field.degree
    if rm.lattice_rank != 2 * t.g or t.g != d:
        raise InputError("torus dimension must equal the field degree")
    if not field.is_maximal:
        raise InputError("algebraization runs after enlarge_to_maximal")
    with working_precision():
        emb = field.embeddings()
        if d == 1:
            E = mp.eye(1)
        else:
            Mgen, resid = t.multiplier(rm.action[1])
            if resid > tol * 100:
                raise DegenerateInputError("order action is not holomorphic on this torus")
            cols = []
            for l in range(d):
                sig = emb[l][1]
                ns = cx.nullspace(Mgen - sig * mp.eye(d))
                if ns.cols != 1:
                    raise DegenerateInputError(
                        "action matrices are not simultaneously diagonalizable"
                    )
                cols.append(ns)
            E = cx.hstack(cols)
        U, ideal0 = steinitz_decompose(rm)
        Pi_eig = E**-1 * t.periods
        C = Pi_eig * cx.mpm(U.entries)
        lam = [C[l, 0] for l in range(d)]
        mu = []
        for l in range(d):
            vals = []
            for i in range(d):
                s = field.element_embedding(ideal0.basis[i], emb[l])
                vals.append(C[l, d + i] / s)
            spread = max(abs(a - b) for a in vals for b in vals)
            if spread > tol * 1000 * max(1, abs(vals[0])):
                raise DegenerateInputError("inconsistent module coordinates")
            mu.append(vals[0])
        tau = [lam[l] / mu[l] for l in range(d)]
        x = _sign_correction(field, emb, tau, sign_bound)
        z = tuple(field.element_embedding(x, emb[l]) * tau[l] for l in range(d))
        ideal = ideal0.scaled(x)
        iso = mp.diag([field.element_embedding(x, emb[l]) / mu[l] for l in range(d)]) * E**-1
        model = construct_rm_torus(field, z, ideal)
        resid = cx.frob(iso * t.periods * cx.mpm(U.entries) - model.periods)
        resid = resid / max(mp.mpf(1), cx.frob(model.periods))
    return AlgebraizationResult(z, ideal, iso, resid, model)


def _sign_correction(field: FieldOrder, emb, tau, bound: int):
    """Field element x with sigma(x) * Im(tau_sigma) > 0 at every
    embedding, enumerated by height; exists by density of the field in
    its archimedean algebra."""
    d = field.degree
    signs = [mp.sign(mp.im(c)) for c in tau]
    for h in range(1, bound + 1):
        for cand in itertools.product(range(-h, h + 1), repeat=d):
            if max((abs(c) for c in cand), default=0) != h:
                continue
            x = tuple(Fraction(c) for c in cand)
            vals = [field.element_embedding(x, emb[l]) for l in range(d)]
            if all(v * s > 0 for v, s in zip(vals, signs)):
                return x
    raise SearchExhaustedError("sign-correction search exhausted; raise the bound")


def jacobian_is_abelian_certificate(h, rm: RMStructure | None = None,
                                    height_bound: int = 10, tol=None) -> RMCertificate:
    """Algebraicity certificate for the Jacobian of an effective
    weight-one structure carrying real multiplication: the (z, ideal)
    normal form of the Jacobian torus.

    `h` must expose `.rank`, `.pieces` keyed by (p, q), and `.jacobian()`.
    """
    tol = resolve_tolerance(tol)
    keys = set(h.pieces.keys())
    if not keys <= {(1, 0), (0, 1)}:
        raise InputError("structure is not effective of weight one")
    torus = h.jacobian()
    if rm is None:
        rm = detect_rm(torus, height_bound, tol)
        if rm is None:
            raise DegenerateInputError("no real multiplication detected on the Jacobian")
    if 2 * rm.field.degree != h.rank:
        raise InputError("field degree must be half the lattice rank")
    for a in rm.action:
        for (p, q), basis in h.pieces.items():
            resid = cx.subspace_residual(cx.mpm(a.entries) * basis, basis)
            if resid > tol * 1000:
                raise InputError("supplied action does not preserve the Hodge pieces")
    t2, rm2, _ = enlarge_to_maximal(torus, rm)
    res = algebraize_rm(t2, rm2, tol=tol)
    return RMCertificate(rm2.field, res.z, res.ideal, res.iso, res.residual)


def tori_isomorphic(t1: ComplexTorus, t2: ComplexTorus, tol=None, coeff_bound: int = 4):
    """Search Hom(t1, t2) for a unimodular lattice map with a complex
    multiplier; returns (found, multiplier, lattice_map, residual)."""
    tol = resolve_tolerance(tol)
    if t1.g != t2.g:
        return False, None, None, mp.mpf("inf")
    homs = hom_lattice(t1, t2)
    if not homs:
        return False, None, None, mp.mpf("inf")
    rank = len(homs)
    best = (False, None, None, mp.mpf("inf"))
    if rank > 6:
        combos = homs + [a + b for a, b in itertools.combinations(homs, 2)]
    else:
        combos = []
        rng = range(-coeff_bound, coeff_bound + 1)
        for coeffs in itertools.product(rng, repeat=rank):
            if all(c == 0 for c in coeffs):
                continue
            if next((c for c in coeffs if c != 0), 1) < 0:
                continue
            N = IntMatrix.zeros(homs[0].rows, homs[0].cols)
            for c, B in zip(coeffs, homs):
                if c:
                    N = N + B.scale(c)
            combos.append(N)
    with working_precision():
        for U in combos:
            if abs(U.det()) != 1:
                continue
            B = t2.periods * cx.mpm(U.entries)
            G = t1.periods * cx.ctranspose(t1.periods)
            M = B * cx.ctranspose(t1.periods) * (G**-1)
            resid = cx.frob(M * t1.periods - B) / max(mp.mpf(1), cx.frob(B))
            if resid < tol:
                return True, M, U, resid
            if resid < best[3]:
                best = (False, M, U, resid)
    return best
