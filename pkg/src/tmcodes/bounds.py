"""Rate bounds for the worst-case binary-error network channel.

Every rate function returns a ``BoundValue(rate, asserted)``: the rate is
clamped to [0, 1] and ``asserted`` is False where the underlying inequality is
only claimed on a narrower range of ``p`` (curves stay total for plotting).
Rates are normalised by ``C m n`` bits; ``n=None`` selects the asymptotic form.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

INV_ENTROPY_TOL = 1e-12
ZYABLOV_GRID_STEP = 1e-4
ZYABLOV_TOL = 1e-9
CSV_COLUMNS = ("p", "hamming", "plotkin", "elias_bassalygo", "gv_coherent", "gv_noncoherent",
               "zyablov", "bench1", "bench2")


class BoundValue(NamedTuple):
    rate: float
    asserted: bool


@dataclass(frozen=True)
class BoundParams:
    C: int
    E: int
    m: int
    p: float
    n: int | None = None

    def __post_init__(self):
        if not (1 <= self.C <= self.E):
            raise ValueError(f"need E >= C >= 1, got C={self.C}, E={self.E}")
        if self.m < 1:
            raise ValueError("m must be positive")
        if not (0 <= self.p < 0.5):
            raise ValueError(f"p must lie in [0, 1/2), got {self.p}")
        if self.n is not None and self.n < 1:
            raise ValueError("n must be positive (or None for asymptotic)")

    def with_p(self, p: float) -> "BoundParams":
        return BoundParams(self.C, self.E, self.m, p, self.n)


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


# entropy ------------------------------------------------------------------


def _entropy_scalar(x: float) -> float:
    if x == 0 or x == 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def entropy(x):
    """Binary entropy in bits; accepts scalars or arrays in [0, 1]."""
    if isinstance(x, (float, int)) and not isinstance(x, bool):
        if not 0 <= x <= 1:
            raise ValueError(f"entropy argument outside [0, 1]: {x}")
        return _entropy_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError(f"entropy argument outside [0, 1]: {x}")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -arr * np.log2(arr) - (1 - arr) * np.log2(1 - arr)
    h = np.where((arr == 0) | (arr == 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


def inv_entropy(y):
    """Inverse of ``entropy`` on [0, 1/2], by bisection to 1e-12 (vectorised)."""
    if isinstance(y, (float, int)) and not isinstance(y, bool):
        if not 0 <= y <= 1:
            raise ValueError(f"inv_entropy argument outside [0, 1]: {y}")
        if y == 0:
            return 0.0
        if y == 1:
            return 0.5
        lo, hi = 0.0, 0.5
        while hi - lo > INV_ENTROPY_TOL:
            mid = (lo + hi) / 2
            if _entropy_scalar(mid) < y:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2
    arr = np.asarray(y, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError(f"inv_entropy argument outside [0, 1]: {y}")
    lo = np.zeros_like(arr)
    hi = np.full_like(arr, 0.5)
    while np.max(hi - lo, initial=0.0) > INV_ENTROPY_TOL:
        mid = (lo + hi) / 2
        below = entropy(mid) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = (lo + hi) / 2
    x = np.where(arr == 0, 0.0, np.where(arr == 1, 0.5, x))
    return float(x) if x.ndim == 0 else x


def _log_correction(params: BoundParams) -> float:
    N = params.E * params.m * params.n
    return math.log2(N + 1) / (params.C * params.m * params.n)


# converse bounds -----------------------------------------------------------


def hamming_bound(params: BoundParams) -> BoundValue:
    C, E, m, p = params.C, params.E, params.m, params.p
    rate = 1 - E / C * entropy(p)
    if params.n is not None:
        rate += _log_correction(params)
    return BoundValue(_clamp(rate), p < C / (2 * E * m))


def plotkin_bound(params: BoundParams) -> BoundValue:
    C, E, p = params.C, params.E, params.p
    if E >= 2 * C:
        knee = (1 - C / E) * (C / E)
        rate = 1 - E * E / (C * E - C * C) * p if p <= knee else 0.0
    else:
        rate = 1 - 4 * p if p <= 0.25 else 0.0
    return BoundValue(_clamp(rate), True)


def elias_bassalygo_bound(params: BoundParams) -> BoundValue:
    C, E, m, p = params.C, params.E, params.m, params.p
    q = C / (2 * E * m)
    asserted = p < q * (1 - q)
    if p > 0.25:
        return BoundValue(0.0, False)
    radius = (1 - math.sqrt(1 - 4 * p)) / 2
    rate = 1 - E / C * entropy(radius)
    if params.n is not None:
        rate += _log_correction(params)
    return BoundValue(_clamp(rate), asserted)


def johnson_bound(d: int, e: int, C: int, E: int, m: int, n: int) -> int | None:
    """Most codewords of a distance-``d`` code inside a transform-metric ball of radius ``e``.

    Returns ``None`` when the radius is not below the Johnson radius.
    """
    if d < 1 or e < 0:
        raise ValueError("need d >= 1 and e >= 0")
    N = E * m * n
    if 2 * d > N:
        return None
    if e / N < (1 - math.sqrt(1 - 2 * d / N)) / 2:
        return d * N // 2
    return None


# achievability -------------------------------------------------------------


def gv_bound(params: BoundParams, coherent: bool = True) -> BoundValue:
    C, E, m, p, n = params.C, params.E, params.m, params.p, params.n
    if 2 * p > 0.5:
        return BoundValue(0.0, False)
    rate = 1 - E / C * entropy(2 * p)
    if n is not None:
        if coherent:
            rate -= math.log2(2 * p * E * m * n + 1) / (C * m * n)
        else:
            # non-coherent correction taken as printed: (log(2pEmn+1) + E) / n
            rate -= (math.log2(2 * p * E * m * n + 1) + E) / n
    return BoundValue(_clamp(rate), True)


def _zyablov_objective(r, p, ratio):
    return r * (1 - 2 * p / inv_entropy(ratio * (1 - r)))


def zyablov_bound(params: BoundParams) -> tuple[float, float]:
    """``(rate, argmax_r)`` of r (1 - 2p / H^-1((C/E)(1-r))) over 0 < r < 1 - (E/C) H(2p)."""
    C, E, p = params.C, params.E, params.p
    if p == 0:
        return 1.0, 1.0
    if 2 * p > 0.5:
        return 0.0, 0.0
    upper = 1 - E / C * entropy(2 * p)
    if upper <= 0:
        return 0.0, 0.0
    ratio = C / E
    grid = np.arange(ZYABLOV_GRID_STEP, upper, ZYABLOV_GRID_STEP)
    if grid.size == 0:
        grid = np.array([upper / 2])
    values = _zyablov_objective(grid, p, ratio)
    i = int(np.argmax(values))
    best_r, best = float(grid[i]), float(values[i])

    # golden-section refinement around the grid maximiser
    a = max(best_r - ZYABLOV_GRID_STEP, 0.0)
    b = min(best_r + ZYABLOV_GRID_STEP, upper)
    g = (math.sqrt(5) - 1) / 2
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = _zyablov_objective(x1, p, ratio), _zyablov_objective(x2, p, ratio)
    while b - a > ZYABLOV_TOL:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = _zyablov_objective(x2, p, ratio)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = _zyablov_objective(x1, p, ratio)
    r = (a + b) / 2
    f = _zyablov_objective(r, p, ratio)
    if f > best:
        best_r, best = r, f
    return _clamp(best), best_r


def benchmark_rates(params: BoundParams) -> tuple[float, float, int | None]:
    """Per-link-coding benchmarks, normalised to a rate in [0, 1].

    ``bench1 = 1 - H(4Cp)``; ``bench2 = max_k (C - 2k)(1 - H(4Cp/k)) / C`` over
    integers 1 <= k < C/2 (``argmax_k`` is None when that range is empty).
    """
    C, p = params.C, params.p

    def one_minus_h(x):
        return 1 - entropy(x) if x < 0.5 else 0.0

    bench1 = one_minus_h(4 * C * p)
    bench2, best_k = 0.0, None
    for k in range(1, (C + 1) // 2):
        v = (C - 2 * k) * one_minus_h(4 * C * p / k) / C
        if best_k is None or v > bench2:
            bench2, best_k = v, k
    return _clamp(bench1), _clamp(bench2), best_k


# Plotkin-type codebook size bounds ----------------------------------------


def plotkin_size_bound(d: int, C: int, E: int, m: int, n: int) -> float | None:
    """Size bound for a code with minimum transform distance ``d`` in the high-distance regime.

    ``E >= 2C``: needs d > 2(1 - C/E) C m n, bound d / (d - 2(1 - C/E) C m n).
    ``E < 2C``: needs d > E m n / 2, bound 2d / (2d - E m n).  ``None`` outside the regime.
    """
    if E >= 2 * C:
        slack = 2 * (E - C) * C * m * n / E
        return d / (d - slack) if d > slack else None
    if 2 * d > E * m * n:
        return 2 * d / (2 * d - E * m * n)
    return None


def punctured_plotkin_size_bound(d: int, C: int, E: int, m: int, n: int) -> float | None:
    """Size bound in the low-distance regime via fixing leading columns.

    The kept length n' is the largest integer for which the high-distance bound
    applies to each subcode; the result is (that bound at n') * 2^(C m (n - n')).
    """
    if d < 1:
        raise ValueError("d must be positive")
    if E >= 2 * C:
        if d > 2 * (E - C) * C * m * n / E:
            return None
        kept = (E * (d - 1)) // (2 * C * (E - C) * m)
    else:
        if 2 * d > E * m * n:
            return None
        kept = (2 * (d - 1)) // (E * m)
    kept = min(kept, n)
    inner = plotkin_size_bound(d, C, E, m, kept) if kept else 1.0
    return math.floor(inner) * 2.0 ** (C * m * (n - kept))


# sphere volumes ------------------------------------------------------------


class SphereVolume(NamedTuple):
    """log2 volume bounds; each flag says whether its bound is claimed at this radius.

    The lower bound counts weight-``radius`` patterns, which map injectively
    only while 2 * radius < C n.  The upper bound is the binomial-sum estimate,
    valid up to half the number of noise bits.
    """

    log2_lower: float
    log2_upper: float
    exact: int | None
    lower_valid: bool = True
    upper_valid: bool = True


def sphere_volume_bounds(radius: int, C: int, E: int, m: int, n: int, instance=None) -> SphereVolume:
    """log2 bounds on |{T_hat Z : wt(Z) <= radius}|, plus the exact count if an instance is given."""
    N = E * m * n
    if not 0 <= radius <= N:
        raise ValueError(f"radius must lie in [0, {N}]")
    h = entropy(radius / N)
    lower = N * h - math.log2(N + 1)
    upper = N * h + math.log2(radius + 1)
    exact = None
    if instance is not None:
        from .network import noise_image_ball

        if instance.C != C or instance.E != E or instance.m != m:
            raise ValueError("instance does not match (C, E, m)")
        exact = int(noise_image_ball(instance.T_hat, n, radius).size)
    return SphereVolume(lower, upper, exact, 2 * radius < C * n, 2 * radius <= N)


# sweeps --------------------------------------------------------------------


@dataclass
class BoundCurve:
    C: int
    E: int
    m: int
    n: int | None
    p: np.ndarray
    rates: dict
    asserted: dict
    zyablov_argmax: np.ndarray
    bench2_k: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self, header_lines=()) -> str:
        out = io.StringIO()
        for line in header_lines:
            out.write(f"# {line}\n")
        for key, value in self.metadata.items():
            out.write(f"# {key}={value}\n")
        out.write(",".join(CSV_COLUMNS) + "\n")
        for i, p in enumerate(self.p):
            row = [p] + [self.rates[c][i] for c in CSV_COLUMNS[1:]]
            out.write(",".join(f"{v:.9g}" for v in row) + "\n")
        return out.getvalue()


def sweep_bounds(C: int, E: int, m: int, p_grid, n: int | None = None) -> BoundCurve:
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.ndim != 1 or np.any(np.diff(p_grid) < 0):
        raise ValueError("p grid must be a non-decreasing 1-D sequence")
    rates = {c: np.zeros(p_grid.size) for c in CSV_COLUMNS[1:]}
    asserted = {c: np.ones(p_grid.size, dtype=bool) for c in CSV_COLUMNS[1:]}
    argmax = np.zeros(p_grid.size)
    ks = []
    for i, p in enumerate(p_grid):
        bp = BoundParams(C, E, m, float(p), n)
        for name, fn in (("hamming", hamming_bound), ("plotkin", plotkin_bound),
                         ("elias_bassalygo", elias_bassalygo_bound)):
            rates[name][i], asserted[name][i] = fn(bp)
        rates["gv_coherent"][i], asserted["gv_coherent"][i] = gv_bound(bp, coherent=True)
        rates["gv_noncoherent"][i], asserted["gv_noncoherent"][i] = gv_bound(bp, coherent=False)
        rates["zyablov"][i], argmax[i] = zyablov_bound(bp)
        rates["bench1"][i], rates["bench2"][i], k = benchmark_rates(bp)
        ks.append(k)
    metadata = {
        "C": C, "E": E, "m": m, "n": "asymptotic" if n is None else n,
        "rate_normalisation": "bits per C*m*n; benchmarks divided by C",
    }
    return BoundCurve(C, E, m, n, p_grid, rates, asserted, argmax, ks, metadata)
