"""Exact linear algebra shared by every module.

Two layers:

* integer lattices — Smith normal form with unimodular transforms, Hermite
  form, saturation (Q-span intersected with Z^m) and subgroup membership;
* field elimination — Gaussian elimination over an exact field given by a
  small adapter.  The Novikov adapter pivots on minimal valuation and refuses
  to decide a rank when a candidate pivot is only known to vanish modulo a
  truncation weaker than the requested floor (UndecidableTruncationError),
  so ranks are never silently wrong.

Cochain complexes over a field get per-degree cohomology with representative
cocycles and an exact projection map onto cohomology coordinates.
"""

from __future__ import annotations

from fractions import Fraction

from .novikov import INFINITY, GaussianRational, NovikovSeries

__all__ = [
    "UndecidableTruncationError",
    "smith_normal_form",
    "hermite_normal_form",
    "integer_determinant",
    "saturation",
    "span_saturation_index",
    "subgroup_membership",
    "FractionField",
    "GaussianField",
    "NovikovField",
    "row_echelon",
    "matrix_rank",
    "solve",
    "column_space_basis",
    "nullspace_basis",
    "CochainComplexOverField",
    "CohomologySummary",
    "cohomology",
]


class UndecidableTruncationError(Exception):
    """A rank/pivot decision would depend on coefficients hidden beyond the
    guaranteed truncation of an entry."""


# ----------------------------------------------------------------------------
# integer lattice kernels
# ----------------------------------------------------------------------------


def _xgcd(a: int, b: int):
    x, nx, y, ny, g, ng = 1, 0, 0, 1, a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    return x, y, g


def _identity(n: int):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            v = ai[k]
            if v:
                bk = b[k]
                for j in range(cols):
                    oi[j] += v * bk[j]
    return out


def integer_determinant(m) -> int:
    """Fraction-free Bareiss determinant of a square integer matrix."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_normal_form(m):
    """Return (U, D, V) with U*m*V = D diagonal, d1 | d2 | ..., U, V unimodular."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = [row[:] for row in m]
    u = _identity(rows)
    v = _identity(cols)

    def row_op(i1, i2, a, b, c, e):
        # (row i1, row i2) <- (a*row i1 + b*row i2, c*row i1 + e*row i2)
        for mat in (d, u):
            r1, r2 = mat[i1], mat[i2]
            for j in range(len(r1)):
                r1[j], r2[j] = a * r1[j] + b * r2[j], c * r1[j] + e * r2[j]

    def col_op(j1, j2, a, b, c, e):
        for mat in (d, v):
            for row in mat:
                row[j1], row[j2] = a * row[j1] + b * row[j2], c * row[j1] + e * row[j2]

    t = 0
    while t < min(rows, cols):
        # move a nonzero entry to (t, t)
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j]:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        i, j = pivot
        if i != t:
            row_op(t, i, 0, 1, 1, 0)
        if j != t:
            col_op(t, j, 0, 1, 1, 0)
        while True:
            changed = False
            for i in range(t + 1, rows):
                if d[i][t]:
                    a, b = d[t][t], d[i][t]
                    if b % a == 0:
                        # pure clearing keeps the pivot row intact
                        row_op(t, i, 1, 0, -(b // a), 1)
                    else:
                        x, y, g = _xgcd(a, b)
                        row_op(t, i, x, y, -(b // g), a // g)
                    changed = True
            for j in range(t + 1, cols):
                if d[t][j]:
                    a, b = d[t][t], d[t][j]
                    if b % a == 0:
                        col_op(t, j, 1, 0, -(b // a), 1)
                    else:
                        x, y, g = _xgcd(a, b)
                        col_op(t, j, x, y, -(b // g), a // g)
                    changed = True
            if not changed:
                break
        t += 1

    # enforce the divisibility chain d1 | d2 | ...
    r = min(rows, cols)
    again = True
    while again:
        again = False
        for t in range(r - 1):
            a, b = d[t][t], d[t + 1][t + 1]
            if a and b % a == 0:
                continue
            if not a and not b:
                continue
            # expose b next to a, then fold gcd(a, b) back into position (t, t)
            row_op(t, t + 1, 1, 1, 0, 1)
            a, b = d[t][t], d[t][t + 1]
            x, y, g = _xgcd(a, b)
            col_op(t, t + 1, x, y, -(b // g), a // g)
            if d[t + 1][t]:
                q = d[t + 1][t] // d[t][t]
                row_op(t + 1, t, 1, -q, 0, 1)
            again = True

    def negate_row(t):
        for mat in (d, u):
            mat[t] = [-x for x in mat[t]]

    for t in range(r):
        if d[t][t] < 0:
            negate_row(t)
    return u, d, v


def hermite_normal_form(rows_in):
    """Row-style Hermite form of an integer matrix; returns the nonzero rows."""
    if not rows_in:
        return []
    cols = len(rows_in[0])
    pivot_row: dict[int, list[int]] = {}  # leading column -> basis row
    for vec0 in rows_in:
        vec = list(vec0)
        j = 0
        while j < cols:
            if not vec[j]:
                j += 1
                continue
            b = pivot_row.get(j)
            if b is None:
                pivot_row[j] = vec
                break
            if vec[j] % b[j] == 0:
                q = vec[j] // b[j]
                vec = [x - q * y for x, y in zip(vec, b)]
            else:
                x, y, g = _xgcd(b[j], vec[j])
                combined = [x * p + y * q for p, q in zip(b, vec)]
                vec = [
                    -(vec[j] // g) * p + (b[j] // g) * q for p, q in zip(b, vec)
                ]
                b[:] = combined
    basis = [pivot_row[j] for j in sorted(pivot_row)]
    # normalize pivot signs and reduce entries above each pivot
    for idx, b in enumerate(basis):
        j = next(k for k, x in enumerate(b) if x)
        if b[j] < 0:
            b[:] = [-x for x in b]
        for other in basis[:idx]:
            q = other[j] // b[j]
            if q:
                other[:] = [x - q * y for x, y in zip(other, b)]
    return basis


def saturation(gens, ambient_dim: int | None = None):
    """Basis of the saturation of the Z-span of ``gens`` inside Z^m.

    Computed as the Z-span of the first r rows of V^{-1} where U*A*V = D is
    the Smith form of the generator matrix: those rows are a primitive basis
    of the Q-row-space intersected with Z^m.
    """
    gens = [list(g) for g in gens]
    if not gens:
        if ambient_dim is None:
            return []
        return []
    m = len(gens[0])
    u, d, v = smith_normal_form(gens)
    r = sum(1 for t in range(min(len(gens), m)) if d[t][t])
    # rows of V^{-1}: invert the unimodular V by integer elimination
    vinv = _unimodular_inverse(v)
    sat = [vinv[t] for t in range(r)]
    return hermite_normal_form(sat)


def _unimodular_inverse(v):
    n = len(v)
    aug = [row[:] + ident_row[:] for row, ident_row in zip(v, _identity(n))]
    # fraction-free Gauss-Jordan works since det = +/-1
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        # make pivot +/-1 by xgcd-style clearing below and above
        for i in range(n):
            if i != col and aug[i][col]:
                a, b = aug[col][col], aug[i][col]
                x, y, g = _xgcd(a, b)
                row_c, row_i = aug[col], aug[i]
                for j in range(2 * n):
                    row_c[j], row_i[j] = (
                        x * row_c[j] + y * row_i[j],
                        -(b // g) * row_c[j] + (a // g) * row_i[j],
                    )
    for i in range(n):
        if aug[i][i] == -1:
            aug[i] = [-x for x in aug[i]]
        assert aug[i][i] == 1, "matrix was not unimodular"
    return [row[n:] for row in aug]


def span_saturation_index(gens):
    """Index of the Z-span inside its saturation (product of elementary divisors)."""
    gens = [list(g) for g in gens]
    if not gens:
        return 1
    _, d, _ = smith_normal_form(gens)
    idx = 1
    for t in range(min(len(gens), len(gens[0]))):
        if d[t][t]:
            idx *= abs(d[t][t])
    return idx


def subgroup_membership(vec, gens) -> bool:
    """Whether ``vec`` lies in the Z-span of ``gens``, via Smith form."""
    gens = [list(g) for g in gens]
    vec = list(vec)
    if not gens:
        return not any(vec)
    u, d, v = smith_normal_form(gens)
    # x * A = vec  <=>  y * D = vec * V with y = x * U^{-1}
    m = len(vec)
    w = [sum(vec[i] * v[i][j] for i in range(m)) for j in range(m)]
    r = min(len(gens), m)
    for j in range(m):
        dj = d[j][j] if j < r else 0
        if dj:
            if w[j] % dj:
                return False
        elif w[j]:
            return False
    return True


# ----------------------------------------------------------------------------
# field elimination
# ----------------------------------------------------------------------------


class FractionField:
    """Adapter for exact rational scalars."""

    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def is_zero(x) -> bool:
        return x == 0

    @staticmethod
    def pivot_key(x):
        return 0

    @staticmethod
    def inv(x):
        return Fraction(1) / x


class GaussianField:
    """Adapter for Q(i) scalars."""

    zero = GaussianRational(0)
    one = GaussianRational(1)

    @staticmethod
    def is_zero(x) -> bool:
        return not x

    @staticmethod
    def pivot_key(x):
        return 0

    @staticmethod
    def inv(x):
        return x.inverse()


class NovikovField:
    """Adapter for truncated Novikov scalars.

    ``floor`` is the truncation below which a stored-zero entry is not
    accepted as zero: deciding a rank against such an entry raises
    UndecidableTruncationError instead of guessing.
    """

    def __init__(self, floor=Fraction(0)):
        self.floor = floor
        self.zero = NovikovSeries.zero(INFINITY)
        self.one = NovikovSeries.one(INFINITY)

    def is_zero(self, x: NovikovSeries) -> bool:
        if x.terms:
            return False
        if x.trunc is INFINITY or x.trunc >= self.floor:
            return True
        raise UndecidableTruncationError(
            f"entry is zero only modulo q^{x.trunc}, below the decision floor "
            f"q^{self.floor}; raise the working truncation"
        )

    @staticmethod
    def pivot_key(x: NovikovSeries):
        return x.val()

    @staticmethod
    def inv(x: NovikovSeries):
        return x.invert()


def row_echelon(matrix, field):
    """Reduced row echelon form.

    Returns (rows, pivot_cols, transform) with transform * matrix = rows.
    Pivots are chosen by the adapter's pivot_key (minimal valuation for
    Novikov scalars), then by row order.
    """
    rows = [list(r) for r in matrix]
    n = len(rows)
    m = len(rows[0]) if n else 0
    transform = [
        [field.one if i == j else field.zero for j in range(n)] for i in range(n)
    ]
    pivots = []
    rank = 0
    for col in range(m):
        candidates = [
            (field.pivot_key(rows[i][col]), i)
            for i in range(rank, n)
            if not field.is_zero(rows[i][col])
        ]
        if not candidates:
            continue
        _, piv = min(candidates)
        rows[rank], rows[piv] = rows[piv], rows[rank]
        transform[rank], transform[piv] = transform[piv], transform[rank]
        inv = field.inv(rows[rank][col])
        rows[rank] = [inv * x for x in rows[rank]]
        transform[rank] = [inv * x for x in transform[rank]]
        for i in range(n):
            if i != rank and not field.is_zero(rows[i][col]):
                c = rows[i][col]
                rows[i] = [a - c * b for a, b in zip(rows[i], rows[rank])]
                transform[i] = [
                    a - c * b for a, b in zip(transform[i], transform[rank])
                ]
        pivots.append(col)
        rank += 1
    return rows, pivots, transform


def matrix_rank(matrix, field) -> int:
    if not matrix:
        return 0
    _, pivots, _ = row_echelon(matrix, field)
    return len(pivots)


def solve(matrix, rhs, field):
    """One exact solution of matrix * x = rhs, or None if inconsistent.

    Free variables are set to zero under the fixed left-to-right pivot order,
    which makes the returned solution deterministic.
    """
    n = len(matrix)
    if n == 0:
        return []
    m = len(matrix[0])
    aug = [list(row) + [r] for row, r in zip(matrix, rhs)]
    rows, pivots, _ = row_echelon(aug, field)
    for row in rows:
        if all(field.is_zero(x) for x in row[:m]) and not field.is_zero(row[m]):
            return None
    x = [field.zero] * m
    for k, col in enumerate(pivots):
        if col == m:
            return None
        x[col] = rows[k][m]
    return x

def column_space_basis(matrix, field):
    """Basis of the column space: the pivot columns of the matrix."""
    if not matrix or not matrix[0]:
        return []
    _, piv_cols, _ = row_echelon(matrix, field)
    return [[matrix[i][j] for i in range(len(matrix))] for j in piv_cols]


def nullspace_basis(matrix, field):
    """Basis of the right kernel, as a list of vectors."""
    if not matrix:
        return []
    m = len(matrix[0])
    rows, pivots, _ = row_echelon(matrix, field)
    free = [j for j in range(m) if j not in pivots]
    basis = []
    for f in free:
        vec = [field.zero] * m
        vec[f] = field.one
        for k, col in enumerate(pivots):
            vec[col] = field.zero - rows[k][f]
        basis.append(vec)
    return basis


# ----------------------------------------------------------------------------
# cochain complexes
# ----------------------------------------------------------------------------


class CochainComplexOverField:
    """Finite cochain complex: per-degree dimensions and differentials.

    ``differentials[k]`` is the matrix of d_k : C^k -> C^{k+1}, with
    shape (dim C^{k+1}) x (dim C^k), acting on column vectors.
    """

    def __init__(self, dims: dict, differentials: dict, field):
        self.dims = dict(dims)
        self.differentials = {k: [list(r) for r in m] for k, m in differentials.items()}
        self.field = field
        for k, mat in self.differentials.items():
            rows = len(mat)
            cols = len(mat[0]) if mat else 0
            if cols != self.dims.get(k, 0) or rows != self.dims.get(k + 1, 0):
                raise ValueError(f"differential at degree {k} has shape {rows}x{cols}")

    def degrees(self):
        return sorted(self.dims)

    def differential(self, k):
        mat = self.differentials.get(k)
        if mat is None:
            return [[self.field.zero] * self.dims.get(k, 0)
                    for _ in range(self.dims.get(k + 1, 0))]
        return mat

    def check_d_squared(self):
        """Every composite d_{k+1} d_k must vanish (within truncation)."""
        bad = []
        for k in self.degrees():
            a = self.differential(k)
            b = self.differential(k + 1)
            if not a or not b or not a[0]:
                continue
            for j in range(len(a[0])):
                col = [a[i][j] for i in range(len(a))]
                for i in range(len(b)):
                    s = self.field.zero
                    for t, x in enumerate(col):
                        s = s + b[i][t] * x
                    if not self.field.is_zero(s):
                        bad.append((k, i, j))
        return bad


class CohomologySummary:
    """Cohomology of one degree: dimension, representative cocycles, and the
    exact projection of a cocycle onto cohomology coordinates."""

    def __init__(self, degree, dim, representatives, image_basis, field):
        self.degree = degree
        self.dim = dim
        self.representatives = representatives
        self._image_basis = image_basis
        self._field = field

    def project(self, vec):
        """Coordinates of a cocycle's class in the representative basis."""
        cols = self._image_basis + self.representatives
        if not cols:
            if any(not self._field.is_zero(x) for x in vec):
                raise ValueError("vector is not a cocycle in this complex")
            return []
        matrix = [[col[i] for col in cols] for i in range(len(vec))]
        sol = solve(matrix, list(vec), self._field)
        if sol is None:
            raise ValueError("vector is not a cocycle in this complex")
        return sol[len(self._image_basis):]

    def class_is_zero(self, vec) -> bool:
        return all(self._field.is_zero(c) for c in self.project(vec))


def cohomology(complex_: CochainComplexOverField) -> dict:
    """Per-degree cohomology with representatives and projections."""
    bad = complex_.check_d_squared()
    if bad:
        raise ValueError(f"d*d != 0 at (degree, row, col) = {bad[0]}")
    field = complex_.field
    out = {}
    for k in complex_.degrees():
        dim_k = complex_.dims.get(k, 0)
        if dim_k == 0:
            out[k] = CohomologySummary(k, 0, [], [], field)
            continue
        d_k = complex_.differential(k)
        d_prev = complex_.differential(k - 1)
        kernel = nullspace_basis(d_k, field) if d_k and d_k[0] else None
        if kernel is None:
            kernel = [
                [field.one if i == j else field.zero for i in range(dim_k)]
                for j in range(dim_k)
            ]
        image = column_space_basis(d_prev, field) if d_prev and d_prev[0] else []
        # extend the image basis to the kernel: new pivots give representatives
        reps = []
        span = [list(v) for v in image]
        for z in kernel:
            trial = span + [list(z)]
            if matrix_rank(trial, field) > len(span):
                reps.append(list(z))
                span = trial
        out[k] = CohomologySummary(k, len(reps), reps, [list(v) for v in image], field)
    return out
