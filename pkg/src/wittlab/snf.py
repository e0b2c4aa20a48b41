"""Exact integer matrix normal forms for finitely presented abelian groups.

Everything works on plain Python ints (no overflow).  The Smith normal form
keeps both unimodular transforms so generator images stay computable; a
row-style Hermite reduction compresses large relation lists first, since
elementary integer row operations preserve the row lattice.
"""

from __future__ import annotations

from dataclasses import dataclass


def int_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def int_mat_mul(A, B):
    if not A or not B:
        return []
    n, k, m = len(A), len(B), len(B[0])
    Bt = list(zip(*B))
    return [[sum(A[i][t] * Bt[j][t] for t in range(k)) for j in range(m)] for i in range(n)]


def int_det(A):
    """Determinant by fraction-free (Bareiss) elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def int_inverse_unimodular(A):
    """Exact inverse of a matrix with determinant +-1."""
    n = len(A)
    M = [row[:] + ident_row for row, ident_row in zip(A, int_identity(n))]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        M[col], M[pivot] = M[pivot], M[col]
        # gcd-reduce the column to a single +-1 pivot
        for r in range(col + 1, n):
            while M[r][col] != 0:
                q = M[col][col] // M[r][col]
                M[col] = [a - q * b for a, b in zip(M[col], M[r])]
                M[col], M[r] = M[r], M[col]
        if abs(M[col][col]) != 1:
            raise ValueError("matrix is not unimodular")
        if M[col][col] < 0:
            M[col] = [-a for a in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def hnf_rows(rows, width):
    """Row-lattice basis in echelon form (elementary row operations only)."""
    work = [list(r) for r in rows if any(r)]
    basis = []
    col = 0
    while col < width and work:
        nonzero = [r for r in work if r[col] != 0]
        if not nonzero:
            col += 1
            continue
        while True:
            nonzero.sort(key=lambda r: abs(r[col]))
            pivot = nonzero[0]
            done = True
            for r in nonzero[1:]:
                q = r[col] // pivot[col]
                for j in range(col, width):
                    r[j] -= q * pivot[j]
                if r[col] != 0:
                    done = False
            nonzero = [pivot] + [r for r in nonzero[1:] if r[col] != 0]
            if done or len(nonzero) == 1:
                break
        if pivot[col] < 0:
            for j in range(col, width):
                pivot[j] = -pivot[j]
        basis.append(pivot)
        work = [r for r in work if r is not pivot and any(r)]
        for r in work:
            if r[col] != 0:
                q = r[col] // pivot[col]
                for j in range(col, width):
                    r[j] -= q * pivot[j]
        work = [r for r in work if any(r)]
        col += 1
    # reduce entries above each pivot for a canonical-ish echelon basis
    for i in reversed(range(len(basis))):
        pcol = next(j for j in range(width) if basis[i][j] != 0)
        for k in range(i):
            if basis[k][pcol] != 0:
                q = basis[k][pcol] // basis[i][pcol]
                for j in range(width):
                    basis[k][j] -= q * basis[i][j]
    return [tuple(r) for r in basis]


def solve_in_rowspace(basis, target):
    """Integer coefficients expressing target over echelon basis rows, or None."""
    t = list(target)
    coeffs = [0] * len(basis)
    width = len(t)
    for i, row in enumerate(basis):
        pcol = next((j for j in range(width) if row[j] != 0), None)
        if pcol is None:
            continue
        if t[pcol] % row[pcol] != 0:
            return None
        c = t[pcol] // row[pcol]
        coeffs[i] = c
        if c:
            for j in range(width):
                t[j] -= c * row[j]
    if any(t):
        return None
    return coeffs


@dataclass
class SmithNormalForm:
    diag: list          # nonzero invariant entries d_1 | d_2 | ...
    U: list             # unimodular, rows side
    V: list             # unimodular, columns side
    rows: int
    cols: int

    def verify(self, A):
        got = int_mat_mul(int_mat_mul(self.U, A), self.V)
        for i in range(self.rows):
            for j in range(self.cols):
                expected = self.diag[i] if i == j and i < len(self.diag) else 0
                if got[i][j] != expected:
                    return False
        if abs(int_det(self.U)) != 1 or abs(int_det(self.V)) != 1:
            return False
        for a, b in zip(self.diag, self.diag[1:]):
            if b % a != 0:
                return False
        return True


def smith_normal_form(rows, width) -> SmithNormalForm:
    """U * A * V = diag(d_1..d_r) with d_i | d_{i+1}, U and V unimodular."""
    A = [list(r) for r in rows]
    m = len(A)
    n = width
    for r in A:
        if len(r) != n:
            raise ValueError("ragged matrix")
    U = int_identity(m)
    V = int_identity(n)

    def row_op(i, j, q):  # row_i -= q * row_j
        A[i] = [a - q * b for a, b in zip(A[i], A[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col_i -= q * col_j
        for row in A:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def row_neg(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(m, n):
        # locate a pivot of least absolute value in the remaining block
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = A[i][j]
                if a and (best is None or abs(a) < best):
                    best = abs(a)
                    pivot = (i, j)
        if pivot is None:
            break
        row_swap(t, pivot[0])
        col_swap(t, pivot[1])
        while True:
            # clear the pivot column
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    row_op(i, t, q)
                    if A[i][t]:
                        row_swap(t, i)
                        dirty = True
            if dirty:
                continue
            # clear the pivot row
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    col_op(j, t, q)
                    if A[t][j]:
                        col_swap(t, j)
                        dirty = True
            if dirty:
                continue
            # enforce divisibility of the remaining block
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % A[t][t] != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_op(t, offender, -1)
        if A[t][t] < 0:
            row_neg(t)
        t += 1

    diag = [A[i][i] for i in range(min(m, n)) if A[i][i] != 0]
    return SmithNormalForm(diag, U, V, m, n)
