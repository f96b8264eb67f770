"""Exact integer-matrix and lattice algebra.

Everything here is exact: entries are Python ints or Fractions and no
routine rounds.  The one numeric entry point is
:func:`lattice_membership`, which takes an explicit tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .config import resolve_tolerance, working_precision
from .errors import DegenerateInputError, InputError

__all__ = [
    "IntMatrix",
    "Lattice",
    "smith_normal_form",
    "torsion_free_quotient",
    "lattice_membership",
    "kernel_integer",
    "row_lattice_basis",
    "saturation",
    "solve_integer",
    "fraction_solve",
]


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix, row-major, arbitrary-precision entries."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise InputError("inconsistent matrix dimensions")

    # -- construction -------------------------------------------------

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if not data:
            raise InputError("empty matrix needs explicit dimensions")
        return cls(len(data), len(data[0]), data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    # -- algebra -------------------------------------------------------

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise InputError("matrix product shape mismatch")
        ot = list(zip(*other.entries))
        data = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in ot) for row in self.entries
        )
        return IntMatrix(self.rows, other.cols, data)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InputError("matrix sum shape mismatch")
        return IntMatrix(
            self.rows,
            self.cols,
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)),
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + other.scale(-1)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(
            self.rows, self.cols, tuple(tuple(k * x for x in r) for r in self.entries)
        )

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)))

    def kron(self, other: "IntMatrix") -> "IntMatrix":
        data = []
        for r1 in self.entries:
            for r2 in other.entries:
                data.append(tuple(a * b for a in r1 for b in r2))
        return IntMatrix(self.rows * other.rows, self.cols * other.cols, tuple(data))

    def apply(self, vec):
        """Matrix times integer column vector."""
        if len(vec) != self.cols:
            raise InputError("vector length mismatch")
        return tuple(sum(a * x for a, x in zip(row, vec)) for row in self.entries)

    def det(self) -> int:
        """Exact determinant (fraction-free Bareiss elimination)."""
        if self.rows != self.cols:
            raise InputError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        m = [list(r) for r in self.entries]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def is_unimodular(self) -> bool:
        return self.rows == self.cols and abs(self.det()) == 1

    def rank(self) -> int:
        _, d, _ = smith_normal_form(self)
        return sum(1 for i in range(min(d.rows, d.cols)) if d.entries[i][i] != 0)

    def diagonal(self):
        return tuple(self.entries[i][i] for i in range(min(self.rows, self.cols)))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    # -- serialization (entries as decimal strings, exact) -------------

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [str(x) for r in self.entries for x in r],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "IntMatrix":
        try:
            rows, cols = int(obj["rows"]), int(obj["cols"])
            flat = [int(s) for s in obj["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad integer-matrix JSON: {exc}") from exc
        if len(flat) != rows * cols:
            raise InputError("integer-matrix JSON entry count mismatch")
        data = tuple(tuple(flat[i * cols : (i + 1) * cols]) for i in range(rows))
        return cls(rows, cols, data)


@dataclass(frozen=True)
class Lattice:
    """Full-rank-in-its-span sublattice of Z^ambient_rank, rows = generators."""

    ambient_rank: int
    basis: IntMatrix

    def __post_init__(self):
        if self.basis.cols != self.ambient_rank:
            raise InputError("lattice basis width must equal ambient rank")
        if self.basis.rows > 0 and self.basis.rank() != self.basis.rows:
            raise InputError("lattice basis rows must be independent over Q")

    @classmethod
    def standard(cls, n: int) -> "Lattice":
        return cls(n, IntMatrix.identity(n))

    @classmethod
    def from_rows(cls, ambient_rank: int, rows) -> "Lattice":
        if not rows:
            return cls(ambient_rank, IntMatrix(0, ambient_rank, ()))
        return cls(ambient_rank, IntMatrix.from_rows(rows))

    @property
    def rank(self) -> int:
        return self.basis.rows

    def to_json(self) -> dict:
        return {"ambient_rank": self.ambient_rank, "basis": self.basis.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Lattice":
        try:
            return cls(int(obj["ambient_rank"]), IntMatrix.from_json(obj["basis"]))
        except KeyError as exc:
            raise InputError(f"bad lattice JSON: missing {exc}") from exc


def smith_normal_form(m: IntMatrix):
    """Diagonalize over Z: returns (U, D, V) with U*m*V == D.

    U and V are unimodular and the diagonal of D is nonnegative with each
    entry dividing the next (zeros trail).
    """
    R, C = m.rows, m.cols
    a = [list(r) for r in m.entries]
    u = [[int(i == j) for j in range(R)] for i in range(R)]
    v = [[int(i == j) for j in range(C)] for i in range(C)]

    def row_sub(i, j, q):
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_sub(i, j, q):
        for r in range(R):
            a[r][i] -= q * a[r][j]
        for r in range(C):
            v[r][i] -= q * v[r][j]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for r in range(R):
            a[r][i], a[r][j] = a[r][j], a[r][i]
        for r in range(C):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    t = 0
    while t < min(R, C):
        piv = None
        best = None
        for i in range(t, R):
            for j in range(t, C):
                x = abs(a[i][j])
                if x and (best is None or x < best):
                    piv, best = (i, j), x
        if piv is None:
            break
        if piv[0] != t:
            row_swap(piv[0], t)
        if piv[1] != t:
            col_swap(piv[1], t)
        while True:
            dirty = False
            for i in range(R):
                if i != t and a[i][t]:
                    q = a[i][t] // a[t][t]
                    row_sub(i, t, q)
                    if a[i][t]:  # remainder is the new, smaller pivot
                        row_swap(i, t)
                        dirty = True
            for j in range(C):
                if j != t and a[t][j]:
                    q = a[t][j] // a[t][t]
                    col_sub(j, t, q)
                    if a[t][j]:
                        col_swap(j, t)
                        dirty = True
            if dirty:
                continue
            # divisibility chain: pivot must divide the remaining block
            pulled = False
            for i in range(t + 1, R):
                if any(a[i][j] % a[t][t] for j in range(t + 1, C)):
                    row_sub(t, i, -1)
                    pulled = True
                    break
            if not pulled:
                break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    U = IntMatrix(R, R, tuple(tuple(r) for r in u))
    D = IntMatrix(R, C, tuple(tuple(r) for r in a))
    V = IntMatrix(C, C, tuple(tuple(r) for r in v))
    return U, D, V


def fraction_solve(A, b):
    """Solve the square rational system A x = b exactly; raises if singular.

    A is a sequence of rows (ints or Fractions), b a sequence; returns a
    tuple of Fractions.
    """
    n = len(A)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(A, b)]
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            raise DegenerateInputError("singular rational system")
        m[k], m[piv] = m[piv], m[k]
        inv = 1 / m[k][k]
        m[k] = [x * inv for x in m[k]]
        for i in range(n):
            if i != k and m[i][k] != 0:
                f = m[i][k]
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return tuple(m[i][n] for i in range(n))


def fraction_inverse(A: IntMatrix):
    """Exact inverse of a nonsingular integer matrix, as Fraction rows."""
    n = A.rows
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        cols.append(fraction_solve(A.entries, e))
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def int_inverse_unimodular(A: IntMatrix) -> IntMatrix:
    inv = fraction_inverse(A)
    if any(x.denominator != 1 for r in inv for x in r):
        raise InputError("matrix is not unimodular")
    return IntMatrix.from_rows([[int(x) for x in r] for r in inv])


def kernel_integer(A: IntMatrix):
    """Z-basis of {x in Z^cols : A x = 0}; the result is saturated."""
    _, D, V = smith_normal_form(A)
    rank = sum(1 for i in range(min(D.rows, D.cols)) if D.entries[i][i] != 0)
    vt = V.transpose().entries  # row i of V^T = column i of V
    return [tuple(vt[i]) for i in range(rank, A.cols)]


def row_lattice_basis(A: IntMatrix):
    """Z-basis (list of rows) of the lattice generated by the rows of A."""
    U, D, V = smith_normal_form(A)
    W = int_inverse_unimodular(V)
    out = []
    for i in range(min(D.rows, D.cols)):
        d = D.entries[i][i]
        if d != 0:
            out.append(tuple(d * x for x in W.entries[i]))
    return out


def saturation(A: IntMatrix):
    """Z-basis of the saturation of the row lattice of A in Z^cols."""
    ker = kernel_integer(A)
    if not ker:
        return [tuple(r) for r in IntMatrix.identity(A.cols).entries]
    K = IntMatrix.from_rows(ker)
    return kernel_integer(K)


def solve_integer(A: IntMatrix, b):
    """One integer solution x of A x = b, or None if none exists."""
    U, D, V = smith_normal_form(A)
    ub = U.apply(tuple(int(x) for x in b))
    y = [0] * A.cols
    r = min(D.rows, D.cols)
    for i in range(A.rows):
        d = D.entries[i][i] if i < r else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d != 0:
                return None
            y[i] = ub[i] // d
    return V.apply(tuple(y))


def lattices_equal(a_rows, b_rows) -> bool:
    """Exact equality of the row lattices spanned by two generator lists."""
    if not a_rows and not b_rows:
        return True
    if not a_rows or not b_rows:
        return False
    A = IntMatrix.from_rows(a_rows)
    B = IntMatrix.from_rows(b_rows)
    return _contained(A, B) and _contained(B, A)


def _contained(A: IntMatrix, B: IntMatrix) -> bool:
    bt = B.transpose()
    return all(solve_integer(bt, row) is not None for row in A.entries)


def torsion_free_quotient(sub: Lattice, ambient: Lattice) -> Lattice:
    """Basis of (ambient/sub) modulo torsion, via the Smith form of the
    inclusion; representatives are returned in ambient coordinates."""
    if sub.ambient_rank != ambient.ambient_rank:
        raise InputError("sub and ambient lattices live in different spaces")
    at = ambient.basis.transpose()
    coords = []
    for row in sub.basis.entries:
        x = solve_integer(at, row)
        if x is None:
            raise InputError("sub lattice is not contained in the ambient lattice")
        coords.append(x)
    n = ambient.rank
    if not coords:
        return Lattice(ambient.ambient_rank, ambient.basis)
    X = IntMatrix.from_rows(coords)
    _, D, V = smith_normal_form(X)
    W = int_inverse_unimodular(V)
    r = min(D.rows, D.cols)
    free_idx = [i for i in range(n) if i >= r or D.entries[i][i] == 0]
    reps = []
    for i in free_idx:
        w = W.entries[i]
        reps.append(tuple(sum(w[k] * ambient.basis.entries[k][j] for k in range(n))
                          for j in range(ambient.ambient_rank)))
    return Lattice.from_rows(ambient.ambient_rank, reps)


def lattice_membership(v, L: Lattice, tol=None):
    """Integer coordinates c with ||v - c^T basis|| < tol, or None.

    v is a real vector of length L.ambient_rank; the least-squares system
    is solved exactly in the integer Gram matrix of the basis, so only the
    final residual is floating point.
    """
    tol = resolve_tolerance(tol)
    B = L.basis
    if B.rows == 0:
        raise DegenerateInputError("membership in a rank-0 lattice")
    if B.rank() != B.rows:
        raise DegenerateInputError("rank-deficient embedding")
    if len(v) != L.ambient_rank:
        raise InputError("vector length must equal the ambient rank")
    gram = (B @ B.transpose()).entries  # exact integer Gram
    with working_precision():
        vv = [mp.mpf(str(x)) if isinstance(x, (int, str)) else mp.mpmathify(x) for x in v]
        rhs = [sum(mp.mpmathify(B.entries[i][j]) * vv[j] for j in range(B.cols))
               for i in range(B.rows)]
        ginv = fraction_inverse(IntMatrix.from_rows(gram))
        coeffs = [sum(mp.mpf(ginv[i][j].numerator) / mp.mpf(ginv[i][j].denominator) * rhs[j]
                      for j in range(B.rows)) for i in range(B.rows)]
        c = [int(mp.nint(x)) for x in coeffs]
        acc = mp.mpf(0)
        for j in range(B.cols):
            approx = sum(c[i] * B.entries[i][j] for i in range(B.rows))
            acc += (vv[j] - approx) ** 2
        resid = mp.sqrt(acc)
        if resid < tol:
            return tuple(c)
    return None
