"""Transform distance between binary matrices.

``d_B(M1, M2)`` sums, over columns, the least number of columns of ``B`` whose
XOR equals the column difference.  That per-column count is the coset-leader
(syndrome) weight of the difference w.r.t. ``B`` viewed as a parity-check
matrix, i.e. the graph distance from 0 in the Cayley graph of GF(2)^a generated
by the columns of ``B``.  We tabulate it for every syndrome with one BFS.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import pack_columns

MAX_SYNDROME_BITS = 24
UNREACHABLE = np.uint8(255)
# per-column sentinel for vectorised sums; far above any real distance
UNREACHABLE_DISTANCE = 1 << 40
INF = math.inf


@dataclass(frozen=True)
class CosetLeaderTable:
    B: np.ndarray
    weights: np.ndarray

    @property
    def a(self) -> int:
        return self.B.shape[0]

    @property
    def c(self) -> int:
        return self.B.shape[1]

    @property
    def spanning(self) -> bool:
        return not np.any(self.weights == UNREACHABLE)

    @property
    def covering_radius(self) -> int:
        reachable = self.weights[self.weights != UNREACHABLE]
        return int(reachable.max())

    def weight(self, syndrome: int) -> float:
        w = self.weights[syndrome]
        return INF if w == UNREACHABLE else int(w)

    def column_weights(self, syndromes) -> np.ndarray:
        """Coset weights of packed syndromes; unreachable ones map to ``UNREACHABLE_DISTANCE``."""
        w = self.weights[np.asarray(syndromes, dtype=np.int64)].astype(np.int64)
        w[w == UNREACHABLE] = UNREACHABLE_DISTANCE
        return w

    def weight_distribution(self) -> np.ndarray:
        """``h[w]`` = number of syndromes of coset weight ``w`` (reachable ones only)."""
        reachable = self.weights[self.weights != UNREACHABLE]
        return np.bincount(reachable, minlength=1).astype(np.int64)


def build_coset_table(B) -> CosetLeaderTable:
    B = np.asarray(B, dtype=np.uint8)
    a = B.shape[0]
    if a > MAX_SYNDROME_BITS:
        raise ValueError(f"a={a} rows exceeds the {MAX_SYNDROME_BITS}-bit table limit")
    gens = np.unique(pack_columns(B)) if B.shape[1] else np.zeros(0, dtype=np.int64)
    gens = gens[gens != 0]

    weights = np.full(1 << a, UNREACHABLE, dtype=np.uint8)
    weights[0] = 0
    frontier = np.zeros(1, dtype=np.int64)
    depth = 0
    while frontier.size:
        depth += 1
        layer = []
        for g in gens:
            cand = frontier ^ g
            cand = cand[weights[cand] == UNREACHABLE]
            weights[cand] = depth
            layer.append(cand)
        frontier = np.concatenate(layer) if layer else np.zeros(0, dtype=np.int64)
    B = B.copy()
    B.flags.writeable = False
    weights.flags.writeable = False
    return CosetLeaderTable(B, weights)


def transform_distance(table: CosetLeaderTable, M1, M2) -> float:
    """``d_B(M1, M2)``; ``math.inf`` when some column difference is outside span(B)."""
    M1 = np.asarray(M1)
    M2 = np.asarray(M2)
    if M1.shape != M2.shape:
        raise ValueError(f"shape mismatch {M1.shape} vs {M2.shape}")
    if M1.shape[0] != table.a:
        raise ValueError(f"matrices have {M1.shape[0]} rows, table expects {table.a}")
    w = table.weights[pack_columns(M1) ^ pack_columns(M2)]
    if np.any(w == UNREACHABLE):
        return INF
    return int(w.sum(dtype=np.int64))


def syndrome_distance(table: CosetLeaderTable, s1, s2) -> np.ndarray:
    """Vectorised distance between packed-column arrays along the last axis."""
    w = table.column_weights(np.bitwise_xor(s1, s2))
    return w.sum(axis=-1)


def ball_volume(table: CosetLeaderTable, n: int, radius: int) -> int:
    """Number of a x n matrices within transform distance ``radius`` of a fixed centre."""
    h = [int(v) for v in table.weight_distribution()]
    poly = [1]
    for _ in range(n):
        out = [0] * min(len(poly) + len(h) - 1, radius + 1)
        for i, x in enumerate(poly):
            if not x:
                continue
            for j, y in enumerate(h[: radius + 1 - i]):
                out[i + j] += x * y
        poly = out
    return sum(poly[: radius + 1])


@dataclass
class MetricAxiomReport:
    passed: bool
    samples: int
    violations: dict
    counterexample: tuple | None = None

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        bad = ", ".join(f"{k}={v}" for k, v in self.violations.items() if v) or "none"
        return f"metric axioms {status} on {self.samples} triples (violations: {bad})"


def check_metric_axioms(table: CosetLeaderTable, samples: int = 10_000, seed: int = 0,
                        n: int = 3) -> MetricAxiomReport:
    """Spot-check non-negativity, identity, symmetry and the triangle inequality.

    Columns are drawn from span(B) so every distance is finite.
    """
    rng = np.random.default_rng(seed)
    reachable = np.flatnonzero(table.weights != UNREACHABLE)
    M1, M2, M3 = (reachable[rng.integers(0, reachable.size, size=(samples, n))] for _ in range(3))
    # force some exact repeats so identity-of-indiscernibles is exercised both ways
    M2[: samples // 10] = M1[: samples // 10]

    d12 = syndrome_distance(table, M1, M2)
    d21 = syndrome_distance(table, M2, M1)
    d13 = syndrome_distance(table, M1, M3)
    d23 = syndrome_distance(table, M2, M3)
    equal = np.all(M1 == M2, axis=1)

    checks = {
        "nonnegativity": d12 < 0,
        "identity": (d12 == 0) != equal,
        "symmetry": d12 != d21,
        "triangle": d13 > d12 + d23,
    }
    violations = {k: int(v.sum()) for k, v in checks.items()}
    counterexample = None
    for name, bad in checks.items():
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            counterexample = (name, M1[i].tolist(), M2[i].tolist(), M3[i].tolist())
            break
    return MetricAxiomReport(not any(violations.values()), samples, violations, counterexample)
