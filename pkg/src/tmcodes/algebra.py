"""GF(2^m) arithmetic and dense GF(2) linear algebra.

Field elements are plain ints in ``[0, 2**m)``: bit ``i`` is the coefficient of
``x**i`` (polynomial basis, little-endian), so the bit vector of a symbol is
just its binary expansion.  Binary matrices are ``numpy.uint8`` arrays holding
0/1 entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Lexicographically smallest primitive polynomial of each degree, as (m+1)-bit masks.
PRIMITIVE_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100000000101011,
    15: 0b1000000000000011,
    16: 0b10000000000101101,
}

MAX_DEGREE = 16


class SingularMatrixError(ValueError):
    pass


def poly_mulmod(a: int, b: int, poly: int, m: int) -> int:
    """Schoolbook carry-less product of ``a`` and ``b`` reduced modulo ``poly``."""
    prod = 0
    while b:
        if b & 1:
            prod ^= a
        a <<= 1
        b >>= 1
    for shift in range(prod.bit_length() - 1 - m, -1, -1):
        if (prod >> (shift + m)) & 1:
            prod ^= poly << shift
    return prod


@dataclass(frozen=True)
class FieldContext:
    """The field GF(2^m) with precomputed log/antilog tables."""

    m: int
    primitive_polynomial: int = 0
    exp: np.ndarray = field(init=False, repr=False, compare=False)
    log: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.m <= MAX_DEGREE:
            raise ValueError(f"extension degree must be in [1, {MAX_DEGREE}], got {self.m}")
        poly = self.primitive_polynomial or PRIMITIVE_POLYNOMIALS[self.m]
        if poly.bit_length() != self.m + 1:
            raise ValueError(f"polynomial {poly:#b} does not have degree {self.m}")
        object.__setattr__(self, "primitive_polynomial", poly)

        order = self.size - 1
        exp = np.zeros(2 * order + 1, dtype=np.int64)
        log = np.full(self.size, -1, dtype=np.int64)
        x = 1
        for i in range(order):
            if log[x] != -1:
                raise ValueError(f"polynomial {poly:#b} is not primitive")
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> self.m:
                x ^= poly
        if x != 1:
            raise ValueError(f"polynomial {poly:#b} is not primitive")
        # doubled table lets products index exp[log a + log b] without a modulo
        exp[order:2 * order] = exp[:order]
        exp[2 * order] = exp[0]
        exp.flags.writeable = False
        log.flags.writeable = False
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "log", log)

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def order(self) -> int:
        return self.size - 1

    def check(self, a: int) -> int:
        if not 0 <= a < self.size:
            raise ValueError(f"{a} is not an element of GF(2^{self.m})")
        return a

    # scalar arithmetic ---------------------------------------------------

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.exp[self.order - self.log[a]])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inverse(b))

    def power(self, a: int, k: int) -> int:
        if a == 0:
            return 0 if k > 0 else 1
        return int(self.exp[(self.log[a] * k) % self.order])

    def alpha_power(self, k: int) -> int:
        return int(self.exp[k % self.order])

    # vectorised arithmetic ----------------------------------------------

    def mul_array(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable integer arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        a, b = np.broadcast_arrays(a, b)
        out = np.zeros(a.shape, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        out[nz] = self.exp[self.log[a[nz]] + self.log[b[nz]]]
        return out

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product over GF(2^m)."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for k in range(A.shape[1]):
            out ^= self.mul_array(A[:, k:k + 1], B[k:k + 1, :])
        return out


@lru_cache(maxsize=None)
def gf(m: int) -> FieldContext:
    """Shared context for GF(2^m) with the canonical primitive polynomial."""
    return FieldContext(m)


def field_mul(ctx: FieldContext, a: int, b: int) -> int:
    return ctx.mul(ctx.check(a), ctx.check(b))


def field_inverse(ctx: FieldContext, a: int) -> int:
    return ctx.inverse(ctx.check(a))


# symbol <-> bits <-> matrix mappings ------------------------------------


def symbol_to_bits(ctx: FieldContext, a: int) -> np.ndarray:
    ctx.check(a)
    return np.array([(a >> i) & 1 for i in range(ctx.m)], dtype=np.uint8)


def bits_to_symbol(ctx: FieldContext, bits) -> int:
    bits = np.asarray(bits).ravel()
    if bits.size != ctx.m:
        raise ValueError(f"expected {ctx.m} bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def element_to_matrix(ctx: FieldContext, a: int) -> np.ndarray:
    """m x m binary matrix of multiplication by ``a``.

    Column j holds the bits of ``a * x**j``, so ``element_to_matrix(a) @ bits(y)``
    equals ``bits(a * y)`` over GF(2).
    """
    ctx.check(a)
    M = np.zeros((ctx.m, ctx.m), dtype=np.uint8)
    for j in range(ctx.m):
        M[:, j] = symbol_to_bits(ctx, ctx.mul(a, 1 << j))
    return M


def field_matrix_to_binary(ctx: FieldContext, A) -> np.ndarray:
    """Replace every entry of a matrix over GF(2^m) by its m x m binary block."""
    A = np.asarray(A, dtype=np.int64)
    r, c = A.shape
    m = ctx.m
    out = np.zeros((r * m, c * m), dtype=np.uint8)
    for i in range(r):
        for j in range(c):
            if A[i, j]:
                out[i * m:(i + 1) * m, j * m:(j + 1) * m] = element_to_matrix(ctx, int(A[i, j]))
    return out


def symbols_to_bits(ctx: FieldContext, S) -> np.ndarray:
    """C x n symbol matrix -> Cm x n bit matrix (row block i = bits of row i)."""
    S = np.asarray(S, dtype=np.int64)
    r, n = S.shape
    out = np.zeros((r * ctx.m, n), dtype=np.uint8)
    for j in range(ctx.m):
        out[j::ctx.m, :] = (S >> j) & 1
    return out


def bits_to_symbols(ctx: FieldContext, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    if X.shape[0] % ctx.m:
        raise ValueError(f"row count {X.shape[0]} is not a multiple of m={ctx.m}")
    out = np.zeros((X.shape[0] // ctx.m, X.shape[1]), dtype=np.int64)
    for j in range(ctx.m):
        out |= X[j::ctx.m, :] << j
    return out


def _field_rref(ctx: FieldContext, A: list[list[int]], ncols: int) -> list[int]:
    """Reduce ``A`` (list of rows) in place over the first ``ncols`` columns; returns pivot columns."""
    rows = len(A)
    rank = 0
    pivots = []
    for col in range(ncols):
        pivot = next((r for r in range(rank, rows) if A[r][col]), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        inv = ctx.inverse(A[rank][col])
        A[rank] = [ctx.mul(inv, v) for v in A[rank]]
        for r in range(rows):
            if r != rank and A[r][col]:
                f = A[r][col]
                A[r] = [v ^ ctx.mul(f, w) for v, w in zip(A[r], A[rank])]
        pivots.append(col)
        rank += 1
        if rank == rows:
            break
    return pivots


def field_matrix_rank(ctx: FieldContext, A) -> int:
    """Rank over GF(2^m) by Gaussian elimination."""
    A = [list(map(int, row)) for row in np.asarray(A, dtype=np.int64)]
    return len(_field_rref(ctx, A, len(A[0]) if A else 0))


def field_solve(ctx: FieldContext, A, b) -> np.ndarray | None:
    """One solution x of A x = b over GF(2^m) (free variables set to 0), or None."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    cols = A.shape[1]
    aug = [list(map(int, row)) + [int(v)] for row, v in zip(A, b)]
    pivots = _field_rref(ctx, aug, cols)
    if any(row[-1] and not any(row[:cols]) for row in aug):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = aug[r][-1]
    return x


# GF(2) matrices ---------------------------------------------------------


def as_bitmatrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    return (M.astype(np.int64) & 1).astype(np.uint8)


def identity(k: int) -> np.ndarray:
    return np.eye(k, dtype=np.uint8)


def bitmatrix_mul(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[-1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
    return ((A.astype(np.int64) @ B.astype(np.int64)) & 1).astype(np.uint8)


def _rows_to_ints(M: np.ndarray) -> list[int]:
    weights = [1 << j for j in range(M.shape[1])]
    return [sum(w for w, b in zip(weights, row) if b) for row in M.tolist()]


def _ints_to_rows(rows: list[int], cols: int) -> np.ndarray:
    return np.array([[(r >> j) & 1 for j in range(cols)] for r in rows], dtype=np.uint8).reshape(len(rows), cols)


def _eliminate(rows: list[int], cols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form on int-packed rows; returns (rows, pivot columns)."""
    rows = list(rows)
    pivots = []
    r = 0
    for col in range(cols):
        bit = 1 << col
        p = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def bitmatrix_rank(M) -> int:
    M = np.asarray(M)
    return len(_eliminate(_rows_to_ints(M), M.shape[1])[1])


def bitmatrix_invert(M) -> np.ndarray:
    M = np.asarray(M)
    k, c = M.shape
    if k != c:
        raise ValueError(f"cannot invert non-square {M.shape} matrix")
    aug = [r | (1 << (k + i)) for i, r in enumerate(_rows_to_ints(M))]
    rows, pivots = _eliminate(aug, k)
    if pivots != list(range(k)):
        raise SingularMatrixError("matrix is singular over GF(2)")
    return _ints_to_rows([r >> k for r in rows], k)


def bitmatrix_solve(A, y) -> np.ndarray | None:
    """Some x with A x = y over GF(2), or None when the system is inconsistent."""
    A = np.asarray(A)
    y = np.asarray(y).ravel()
    rows, cols = A.shape
    if y.size != rows:
        raise ValueError(f"right-hand side has length {y.size}, expected {rows}")
    aug = [r | (int(b) << cols) for r, b in zip(_rows_to_ints(A), y)]
    red, pivots = _eliminate(aug, cols)
    x = np.zeros(cols, dtype=np.uint8)
    for i, col in enumerate(pivots):
        x[col] = (red[i] >> cols) & 1
    if any(r >> cols & 1 for r in red[len(pivots):]):
        return None
    return x


# column packing ---------------------------------------------------------


def pack_columns(M) -> np.ndarray:
    """Each column as an int, row i at bit i."""
    M = np.asarray(M, dtype=np.int64)
    if M.shape[0] > 62:
        raise ValueError("columns longer than 62 bits cannot be packed")
    weights = np.left_shift(np.int64(1), np.arange(M.shape[0], dtype=np.int64))
    return (M * weights[:, None]).sum(axis=0)


def unpack_columns(cols, rows: int) -> np.ndarray:
    cols = np.asarray(cols, dtype=np.int64)
    return ((cols[None, :] >> np.arange(rows, dtype=np.int64)[:, None]) & 1).astype(np.uint8)


def pack_matrix(M) -> int:
    """Whole matrix as one int: column k occupies bits [k*rows, (k+1)*rows)."""
    M = np.asarray(M)
    rows = M.shape[0]
    return sum(int(c) << (rows * k) for k, c in enumerate(pack_columns(M)))


def unpack_matrix(value: int, rows: int, cols: int) -> np.ndarray:
    mask = (1 << rows) - 1
    return unpack_columns([(value >> (rows * k)) & mask for k in range(cols)], rows)


def popcount(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    return np.bitwise_count(x).astype(np.int64)
