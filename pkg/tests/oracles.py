"""Independent reference implementations used only to freeze expected values.

Deliberately naive: the characteristic polynomial is computed by cofactor
expansion of det(zI - A) in a dense polynomial ring over R_m, with no shared
code paths with the package kernels.
"""

import itertools

from chevalab.field import TruncCtx


def poly_add(ctx: TruncCtx, a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = ctx.add(out[i], x)
    return out


def poly_mul(ctx: TruncCtx, a, b):
    out = [ctx.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = ctx.add(out[i + j], ctx.mul(x, y))
    return out


def poly_neg(ctx: TruncCtx, a):
    return [ctx.neg(x) for x in a]


def det_poly(ctx: TruncCtx, mat):
    """Determinant of a matrix of z-polynomials, by first-row cofactors."""
    n = len(mat)
    if n == 1:
        return mat[0][0]
    total = [ctx.zero]
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = poly_mul(ctx, mat[0][j], det_poly(ctx, minor))
        if j % 2:
            term = poly_neg(ctx, term)
        total = poly_add(ctx, total, term)
    return total


def charpoly_oracle(ctx: TruncCtx, entries):
    """(c_1, ..., c_n) of det(zI - A); entries is an n x n list of series."""
    n = len(entries)
    mat = []
    for i in range(n):
        row = []
        for j in range(n):
            # polynomial in z: constant -A[i][j], plus z on the diagonal
            p = [ctx.neg(entries[i][j])]
            if i == j:
                p.append(ctx.one)
            row.append(p)
        mat.append(row)
    d = det_poly(ctx, mat)
    d = d + [ctx.zero] * (n + 1 - len(d))
    assert d[n] == ctx.one
    return tuple(d[n - i] for i in range(1, n + 1))


def all_matrices(ctx: TruncCtx, n):
    ring = list(ctx.elements())
    for flat in itertools.product(ring, repeat=n * n):
        yield [[flat[i * n + j] for j in range(n)] for i in range(n)]


def fiber_counts_oracle(ctx: TruncCtx, n):
    """Exhaustive fiber table via the oracle characteristic polynomial."""
    table = {}
    for mat in all_matrices(ctx, n):
        key = charpoly_oracle(ctx, mat)
        table[key] = table.get(key, 0) + 1
    return table
