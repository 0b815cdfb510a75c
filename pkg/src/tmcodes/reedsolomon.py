"""Reed-Solomon codes over GF(2^m) with errors-and-erasures decoding.

A message is the coefficient vector of a polynomial f of degree < K; the
codeword is (f(x_0), ..., f(x_{N-1})) at the points x_i = alpha^i.  Decoding
drops erased positions and runs Berlekamp-Welch on the rest, which corrects e
errors whenever 2e + s < N - K + 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import FieldContext, field_solve


class RSDecodeFailure(RuntimeError):
    pass


def poly_eval(ctx: FieldContext, coeffs, x: int) -> int:
    """Horner evaluation; ``coeffs[j]`` multiplies x**j."""
    acc = 0
    for c in reversed(list(coeffs)):
        acc = ctx.mul(acc, x) ^ int(c)
    return acc


def poly_divmod(ctx: FieldContext, num, den):
    """Quotient and remainder of polynomial division (low-order-first coefficient lists)."""
    num = [int(c) for c in num]
    den = [int(c) for c in den]
    while den and den[-1] == 0:
        den.pop()
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    lead_inv = ctx.inverse(den[-1])
    q = [0] * max(len(num) - len(den) + 1, 1)
    r = num[:]
    for shift in range(len(num) - len(den), -1, -1):
        coef = ctx.mul(r[shift + len(den) - 1], lead_inv)
        if coef:
            q[shift] = coef
            for j, dj in enumerate(den):
                r[shift + j] ^= ctx.mul(coef, dj)
    r = r[: len(den) - 1]
    return q, r


@dataclass(frozen=True)
class RSCode:
    ctx: FieldContext
    N: int
    K: int

    def __post_init__(self):
        if not 1 <= self.K <= self.N:
            raise ValueError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")
        if self.N > self.ctx.order:
            raise ValueError(f"length {self.N} exceeds the {self.ctx.order} nonzero points of GF(2^{self.ctx.m})")

    @property
    def d(self) -> int:
        return self.N - self.K + 1

    @property
    def points(self) -> np.ndarray:
        return np.array([self.ctx.alpha_power(i) for i in range(self.N)], dtype=np.int64)

    def encode(self, message) -> np.ndarray:
        message = np.asarray(message, dtype=np.int64)
        if message.shape != (self.K,):
            raise ValueError(f"message must have {self.K} symbols")
        for v in message:
            self.ctx.check(int(v))
        return np.array([poly_eval(self.ctx, message, int(x)) for x in self.points], dtype=np.int64)


def rs_decode_errors_erasures(rs: RSCode, received, erasures=None) -> np.ndarray:
    """Message symbols, or ``RSDecodeFailure``.

    ``erasures`` is a boolean mask (or index list) of erased positions.  The
    candidate is re-encoded and must agree with all but at most
    floor((N - s - K) / 2) unerased symbols.
    """
    ctx = rs.ctx
    received = np.asarray(received, dtype=np.int64)
    if received.shape != (rs.N,):
        raise ValueError(f"received word must have {rs.N} symbols")
    mask = np.zeros(rs.N, dtype=bool)
    if erasures is not None:
        erasures = np.asarray(erasures)
        if erasures.dtype == bool:
            mask |= erasures
        else:
            mask[erasures.astype(int)] = True
    keep = np.flatnonzero(~mask)
    if keep.size < rs.K:
        raise RSDecodeFailure(f"{mask.sum()} erasures leave fewer than K={rs.K} symbols")
    xs = rs.points[keep]
    ys = received[keep]
    e_max = (keep.size - rs.K) // 2

    # Berlekamp-Welch: Q(x_i) = y_i E(x_i), E monic of degree e_max, deg Q < e_max + K
    nq = e_max + rs.K
    A = np.zeros((keep.size, nq + e_max), dtype=np.int64)
    b = np.zeros(keep.size, dtype=np.int64)
    for row, (x, y) in enumerate(zip(xs, ys)):
        x, y = int(x), int(y)
        powers = [ctx.power(x, j) for j in range(nq + 1)]
        A[row, :nq] = powers[:nq]
        A[row, nq:] = [ctx.mul(y, powers[j]) for j in range(e_max)]
        b[row] = ctx.mul(y, powers[e_max])
    sol = field_solve(ctx, A, b)
    if sol is None:
        raise RSDecodeFailure("key equation has no solution")
    Q = list(sol[:nq])
    Epoly = list(sol[nq:]) + [1]
    f, rem = poly_divmod(ctx, Q, Epoly)
    if any(rem):
        raise RSDecodeFailure("error locator does not divide the interpolant")
    f = (f + [0] * rs.K)[: rs.K] if len(f) <= rs.K or not any(f[rs.K:]) else None
    if f is None:
        raise RSDecodeFailure("decoded polynomial has degree >= K")
    codeword = rs.encode(np.array(f, dtype=np.int64))
    if int(np.count_nonzero(codeword[keep] != ys)) > e_max:
        raise RSDecodeFailure("re-encoded word disagrees with too many symbols")
    return np.array(f, dtype=np.int64)
