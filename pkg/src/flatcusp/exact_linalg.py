"""Exact rational linear algebra.

Every quantity is a :class:`fractions.Fraction`; nothing in this package ever
touches a float. Matrices and vectors are small, dense and immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

Rational = Fraction
Scalar = Union[int, Fraction]


class LinalgError(ValueError):
    pass


class DimensionError(LinalgError):
    pass


class SingularMatrixError(LinalgError):
    pass


def _q(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError(f"expected int or Fraction, got {type(x).__name__}")
    return Fraction(x)


class Vector:
    """Immutable vector of exact rationals."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[Scalar]):
        object.__setattr__(self, "entries", tuple(_q(x) for x in entries))

    def __setattr__(self, name, value):
        raise AttributeError("Vector is immutable")

    @classmethod
    def zeros(cls, n: int) -> "Vector":
        return cls([0] * n)

    @classmethod
    def unit(cls, n: int, i: int) -> "Vector":
        return cls(1 if k == i else 0 for k in range(n))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vector) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(("Vector", self.entries))

    def __repr__(self) -> str:
        return f"Vector([{', '.join(str(x) for x in self.entries)}])"

    def _check(self, other: "Vector") -> None:
        if self.dim != other.dim:
            raise DimensionError(f"vector dims {self.dim} and {other.dim} differ")

    def __add__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other: "Vector") -> "Vector":
        self._check(other)
        return Vector(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self) -> "Vector":
        return Vector(-a for a in self.entries)

    def __mul__(self, k: Scalar) -> "Vector":
        k = _q(k)
        return Vector(k * a for a in self.entries)

    __rmul__ = __mul__

    def dot(self, other: "Vector") -> Fraction:
        self._check(other)
        return sum((a * b for a, b in zip(self.entries, other.entries)), Fraction(0))

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.entries)

    def is_zero(self) -> bool:
        return not any(self.entries)


class Matrix:
    """Immutable dense matrix of exact rationals, stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: Iterable[Iterable[Scalar]]):
        grid = tuple(tuple(_q(x) for x in row) for row in rows)
        if not grid or not grid[0]:
            raise DimensionError("matrix must have at least one row and column")
        width = len(grid[0])
        if any(len(row) != width for row in grid):
            raise DimensionError("ragged matrix")
        object.__setattr__(self, "entries", grid)
        object.__setattr__(self, "rows", len(grid))
        object.__setattr__(self, "cols", width)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def diag(cls, values: Sequence[Scalar]) -> "Matrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns: Sequence[Vector]) -> "Matrix":
        return cls(zip(*(c.entries for c in columns)))

    @classmethod
    def block(cls, blocks: Sequence[Sequence["Matrix"]]) -> "Matrix":
        out = []
        for band in blocks:
            height = band[0].rows
            if any(b.rows != height for b in band):
                raise DimensionError("block rows disagree in height")
            for i in range(height):
                out.append([x for b in band for x in b.entries[i]])
        return cls(out)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> Vector:
        return Vector(self.entries[i])

    def col(self, j: int) -> Vector:
        return Vector(r[j] for r in self.entries)

    def submatrix(self, rows: Sequence[int] | range, cols: Sequence[int] | range) -> "Matrix":
        return Matrix([[self.entries[i][j] for j in cols] for i in rows])

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(("Matrix", self.entries))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.entries)
        return f"Matrix([{body}])"

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]

    @property
    def T(self) -> "Matrix":
        return Matrix(zip(*self.entries))

    transpose = T

    def _same_shape(self, other: "Matrix") -> None:
        if self.shape != other.shape:
            raise DimensionError(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix(
            [a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._same_shape(other)
        return Matrix(
            [a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)
        )

    def __neg__(self) -> "Matrix":
        return Matrix([-a for a in r] for r in self.entries)

    def __mul__(self, k: Scalar) -> "Matrix":
        k = _q(k)
        return Matrix([k * a for a in r] for r in self.entries)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Vector):
            if self.cols != other.dim:
                raise DimensionError(f"cannot apply {self.shape} matrix to dim {other.dim}")
            return Vector(
                sum((a * b for a, b in zip(r, other.entries)), Fraction(0))
                for r in self.entries
            )
        return mat_mul(self, other)

    def __pow__(self, k: int) -> "Matrix":
        if not self.is_square:
            raise DimensionError("power of non-square matrix")
        if k < 0:
            return mat_inverse(self) ** (-k)
        result = Matrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def inverse(self) -> "Matrix":
        return mat_inverse(self)

    def det(self) -> Fraction:
        return determinant(self)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self.entries for x in r)

    def is_symmetric(self) -> bool:
        return self.is_square and self == self.T

    def is_identity(self) -> bool:
        return self.is_square and self == Matrix.identity(self.rows)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    # clear denominators once and multiply in plain integers
    da, db = _den(a.entries), _den(b.entries)
    ai = [[int(x * da) for x in r] for r in a.entries]
    bt = [[int(x * db) for x in c] for c in zip(*b.entries)]
    scale = da * db
    return Matrix(
        [Fraction(sum(x * y for x, y in zip(r, c)), scale) for c in bt] for r in ai
    )


def _den(grid) -> int:
    return math.lcm(*(x.denominator for r in grid for x in r))


def _rref(grid: list[list[Fraction]], ncols: int) -> list[int]:
    """Row-reduce ``grid`` in place over its first ``ncols`` columns.

    Returns the pivot columns in order.
    """
    pivots = []
    r = 0
    nrows = len(grid)
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if grid[i][c] != 0), None)
        if pr is None:
            continue
        grid[r], grid[pr] = grid[pr], grid[r]
        inv = 1 / grid[r][c]
        grid[r] = [x * inv for x in grid[r]]
        for i in range(nrows):
            if i != r and grid[i][c] != 0:
                f = grid[i][c]
                grid[i] = [x - f * y for x, y in zip(grid[i], grid[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots


def rank(a: Matrix) -> int:
    return len(_rref(a.tolist(), a.cols))


def determinant(a: Matrix) -> Fraction:
    if not a.is_square:
        raise DimensionError("determinant of non-square matrix")
    g = a.tolist()
    n = a.rows
    det = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if g[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            g[c], g[pr] = g[pr], g[c]
            det = -det
        det *= g[c][c]
        for i in range(c + 1, n):
            if g[i][c] != 0:
                f = g[i][c] / g[c][c]
                g[i] = [x - f * y for x, y in zip(g[i], g[c])]
    return det


def mat_inverse(a: Matrix) -> Matrix:
    if not a.is_square:
        raise DimensionError("inverse of non-square matrix")
    n = a.rows
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a.entries)]
    pivots = _rref(aug, n)
    if len(pivots) < n:
        raise SingularMatrixError("matrix is singular")
    return Matrix(row[n:] for row in aug)


@dataclass(frozen=True)
class Solution:
    """General solution of ``a x = b``: ``particular + span(null_space)``.

    ``particular`` is ``None`` when the system is inconsistent.
    """

    particular: Vector | None
    null_space: tuple[Vector, ...]

    @property
    def consistent(self) -> bool:
        return self.particular is not None

    @property
    def unique(self) -> bool:
        return self.consistent and not self.null_space


def solve_linear(a: Matrix, b: Vector) -> Solution:
    """Solve ``a x = b`` exactly.

    The particular solution is read off the reduced row echelon form with all
    free variables set to zero, so it is canonical for a given ``a`` and ``b``.
    """
    if a.rows != b.dim:
        raise DimensionError(f"{a.rows} equations but right-hand side has dim {b.dim}")
    n = a.cols
    aug = [list(r) + [x] for r, x in zip(a.entries, b.entries)]
    pivots = _rref(aug, n)
    for row in aug[len(pivots):]:
        if row[n] != 0:
            return Solution(None, ())
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = aug[i][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -aug[i][f]
        basis.append(Vector(v))
    return Solution(Vector(x), tuple(basis))


def null_space(a: Matrix) -> tuple[Vector, ...]:
    return solve_linear(a, Vector.zeros(a.rows)).null_space


# -- quadratic forms ----------------------------------------------------------


class SymmetricForm:
    """A rational symmetric bilinear form, given by its Gram matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Matrix | Sequence[Sequence[Scalar]]):
        if not isinstance(matrix, Matrix):
            matrix = Matrix(matrix)
        if not matrix.is_symmetric():
            raise LinalgError("form matrix is not symmetric")
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("SymmetricForm is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.rows

    def __call__(self, x: Vector, y: Vector | None = None) -> Fraction:
        y = x if y is None else y
        return x.dot(self.matrix @ y)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymmetricForm) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(("SymmetricForm", self.matrix))

    def __repr__(self) -> str:
        return f"SymmetricForm({self.matrix!r})"

    def transform(self, p: Matrix) -> "SymmetricForm":
        """The congruent form ``p^T F p``."""
        return SymmetricForm(p.T @ self.matrix @ p)

    def direct_sum(self, other: "SymmetricForm") -> "SymmetricForm":
        return SymmetricForm(
            Matrix.block(
                [
                    [self.matrix, Matrix.zeros(self.dim, other.dim)],
                    [Matrix.zeros(other.dim, self.dim), other.matrix],
                ]
            )
        )

    def is_positive_definite(self) -> bool:
        return all(m > 0 for m in leading_minors(self.matrix))


def hyperbolic_plane(scale: Scalar = 1) -> SymmetricForm:
    """The form ``2*scale*XY``."""
    return SymmetricForm([[0, scale], [scale, 0]])


def leading_minors(a: Matrix) -> list[Fraction]:
    return [determinant(a.submatrix(range(k), range(k))) for k in range(1, a.rows + 1)]


@dataclass(frozen=True)
class Signature:
    positives: int
    negatives: int
    zeros: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.positives, self.negatives, self.zeros)

    def __iter__(self):
        return iter(self.as_tuple())


def congruence_diagonal(q: SymmetricForm) -> list[Fraction]:
    """Diagonal entries of a form congruent to ``q`` (symmetric elimination)."""
    g = q.matrix.tolist()
    n = len(g)

    def add_to(k: int, j: int) -> None:
        # row_k += row_j, then col_k += col_j
        g[k] = [x + y for x, y in zip(g[k], g[j])]
        for row in g:
            row[k] += row[j]

    def swap(k: int, j: int) -> None:
        g[k], g[j] = g[j], g[k]
        for row in g:
            row[k], row[j] = row[j], row[k]

    diag = []
    for k in range(n):
        if g[k][k] == 0:
            j = next((j for j in range(k + 1, n) if g[j][j] != 0), None)
            if j is not None:
                swap(k, j)
            else:
                # remaining diagonal is all zero, so the pivot becomes 2*g[k][j]
                j = next((j for j in range(k + 1, n) if g[k][j] != 0), None)
                if j is not None:
                    add_to(k, j)
        piv = g[k][k]
        diag.append(piv)
        if piv == 0:
            continue
        for i in range(k + 1, n):
            f = g[i][k] / piv
            if f:
                g[i] = [x - f * y for x, y in zip(g[i], g[k])]
                for row in g:
                    row[i] -= f * row[k]
    return diag


def signature(q: SymmetricForm) -> Signature:
    d = congruence_diagonal(q)
    return Signature(
        sum(1 for x in d if x > 0), sum(1 for x in d if x < 0), sum(1 for x in d if x == 0)
    )


# -- integer matrices ---------------------------------------------------------


def denominator_lcm(x: Matrix | Vector | Iterable[Scalar]) -> int:
    if isinstance(x, Matrix):
        values: Iterable[Fraction] = (v for r in x.entries for v in r)
    else:
        values = (_q(v) for v in x)
    return math.lcm(1, *(v.denominator for v in values))


def _require_integral(a: Matrix) -> None:
    if not a.is_integral():
        raise LinalgError("expected an integer matrix")


def smith_normal_form(a: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(U, S, V)`` with ``U a V = S`` in Smith normal form.

    ``U`` and ``V`` are unimodular and the diagonal of ``S`` is non-negative
    with each entry dividing the next.
    """
    from sympy import Matrix as SMatrix
    from sympy import ZZ
    from sympy.matrices.normalforms import smith_normal_decomp

    _require_integral(a)
    sm = SMatrix([[int(x) for x in r] for r in a.entries])
    s, u, v = smith_normal_decomp(sm, domain=ZZ)
    S = [[int(x) for x in s.row(i)] for i in range(s.rows)]
    U = [[int(x) for x in u.row(i)] for i in range(u.rows)]
    for i in range(min(a.rows, a.cols)):
        if S[i][i] < 0:
            S[i][i] = -S[i][i]
            U[i] = [-x for x in U[i]]
    V = [[int(x) for x in v.row(i)] for i in range(v.rows)]
    return Matrix(U), Matrix(S), Matrix(V)


def smith_diagonal(s: Matrix) -> list[int]:
    return [int(s[i, i]) for i in range(min(s.rows, s.cols))]


def lattice_intersection(b1: Matrix, b2: Matrix) -> Matrix:
    """Basis (as columns) of ``b1 Z^n  ∩  b2 Z^n`` for full-rank bases.

    Solves ``b2^{-1} b1 x ∈ Z^n`` for integral ``x`` through the Smith form of
    the cleared coefficient matrix.
    """
    m = mat_inverse(b2) @ b1
    d = denominator_lcm(m)
    n_int = m * d
    u, s, v = smith_normal_form(n_int)
    # U N V = S, x = V y: need s_i y_i ≡ 0 (mod d)
    scale = [d // math.gcd(d, int(si)) if si else 1 for si in smith_diagonal(s)]
    return b1 @ v @ Matrix.diag(scale)
