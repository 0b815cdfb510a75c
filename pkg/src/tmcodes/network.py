"""Acyclic multigraph networks running random linear network coding.

A ``NetworkInstance`` holds the impulse response matrix ``T_hat`` (C x E over
GF(2^m): column e is what the sink sees when one unit is injected on edge e)
and the transfer matrix ``T``, the block of ``T_hat`` at the source's outgoing
edges.  Their binary forms define the channel ``Y = T X + T_hat Z``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np

from .algebra import (
    FieldContext,
    bitmatrix_invert,
    bitmatrix_mul,
    bitmatrix_rank,
    field_matrix_rank,
    field_matrix_to_binary,
    pack_columns,
)
from .metric import CosetLeaderTable, build_coset_table

MDS_SUBSET_CAP = 10**6
NOISE_ENUMERATION_CAP = 10**7
IMAGE_SPACE_BITS_CAP = 26


class TopologyError(ValueError):
    pass


class NoCertifiedCode(RuntimeError):
    """No random network code on this topology and field passed certification."""


class CapExceeded(RuntimeError):
    """A desk-scale enumeration limit would be exceeded."""


# topology ---------------------------------------------------------------


@dataclass(frozen=True)
class Topology:
    """DAG multigraph; ``edges`` is in global edge order (row blocks of Z)."""

    nodes: tuple
    edges: tuple
    source: str
    sink: str
    C: int

    @property
    def E(self) -> int:
        return len(self.edges)

    def in_edges(self, node) -> list[int]:
        return [i for i, (_, h) in enumerate(self.edges) if h == node]

    def out_edges(self, node) -> list[int]:
        return [i for i, (t, _) in enumerate(self.edges) if t == node]

    @property
    def source_edges(self) -> list[int]:
        return self.out_edges(self.source)

    @property
    def sink_edges(self) -> list[int]:
        return self.in_edges(self.sink)

    def to_text(self) -> str:
        lines = [f"source {self.source}", f"sink {self.sink}"]
        lines += [f"{t} {h}" for t, h in self.edges]
        return "\n".join(lines) + "\n"


def mincut(edges, source, sink) -> int:
    """Unit-capacity max-flow value; parallel edges add capacity."""
    g = nx.DiGraph()
    for t, h in edges:
        if g.has_edge(t, h):
            g[t][h]["capacity"] += 1
        else:
            g.add_edge(t, h, capacity=1)
    if source not in g or sink not in g:
        return 0
    return int(nx.maximum_flow_value(g, source, sink))


def _fresh_name(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def make_topology(edges, source, sink, repair: bool = False) -> Topology:
    """Validate a multigraph and fix its global edge order.

    Edges are ordered by the topological position of their tail, ties broken by
    input order.  With ``repair`` a super-source / super-sink joined by C
    parallel edges is added when the source out-degree or sink in-degree differs
    from the mincut C; otherwise that case is rejected.
    """
    edges = [(str(t), str(h)) for t, h in edges]
    source, sink = str(source), str(sink)
    if source == sink:
        raise TopologyError("source and sink must differ")
    if any(t == h for t, h in edges):
        raise TopologyError("self-loops are not allowed")

    C = mincut(edges, source, sink)
    if C < 1:
        raise TopologyError(f"sink {sink!r} is not reachable from source {source!r}")

    # every edge must lie on a source -> sink path
    g = nx.MultiDiGraph()
    g.add_edges_from(edges)
    if not nx.is_directed_acyclic_graph(g):
        raise TopologyError("graph contains a cycle")
    forward = nx.descendants(g, source) | {source}
    backward = nx.ancestors(g, sink) | {sink}
    stray = [(t, h) for t, h in edges if t not in forward or h not in backward]
    if stray:
        raise TopologyError(f"edges not on any source->sink path: {stray}")

    out_deg = sum(t == source for t, _ in edges)
    in_deg = sum(h == sink for _, h in edges)
    if out_deg != C or in_deg != C:
        if not repair:
            raise TopologyError(
                f"mincut is C={C} but source out-degree is {out_deg} and sink in-degree is {in_deg}; "
                "pass repair=True to add super-nodes")
        taken = {n for e in edges for n in e}
        if out_deg != C:
            new = _fresh_name(source + "*", taken)
            taken.add(new)
            edges = [(new, source)] * C + edges
            source = new
        if in_deg != C:
            new = _fresh_name(sink + "*", taken)
            edges = edges + [(sink, new)] * C
            sink = new

    first_seen = {}
    for t, h in edges:
        first_seen.setdefault(t, len(first_seen))
        first_seen.setdefault(h, len(first_seen))
    g = nx.MultiDiGraph()
    g.add_nodes_from(first_seen)
    g.add_edges_from(edges)
    order = list(nx.lexicographical_topological_sort(g, key=first_seen.__getitem__))
    pos = {v: i for i, v in enumerate(order)}
    ordered = [e for _, e in sorted(enumerate(edges), key=lambda ie: (pos[ie[1][0]], ie[0]))]
    return Topology(tuple(order), tuple(ordered), source, sink, C)


def parse_topology(text: str, repair: bool = False) -> Topology:
    """Parse the line format: ``source <node>``, ``sink <node>``, ``<tail> <head>``; ``#`` comments."""
    source = sink = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TopologyError(f"line {lineno}: expected two tokens, got {raw!r}")
        if parts[0] == "source":
            source = parts[1]
        elif parts[0] == "sink":
            sink = parts[1]
        else:
            edges.append((parts[0], parts[1]))
    if source is None or sink is None:
        raise TopologyError("topology needs both 'source' and 'sink' header lines")
    return make_topology(edges, source, sink, repair=repair)


def load_topology(path, repair: bool = False) -> Topology:
    return parse_topology(Path(path).read_text(), repair=repair)


# network code and instance --------------------------------------------


@dataclass(frozen=True)
class NetworkCode:
    """Local coefficients ``f[(e_in, e_out)]`` at every non-source node."""

    ctx: FieldContext
    coefficients: dict = field(hash=False)


def coefficient_slots(topology: Topology) -> list[tuple[int, int]]:
    slots = []
    for e, (tail, _) in enumerate(topology.edges):
        if tail == topology.source:
            continue
        slots.extend((e_in, e) for e_in in topology.in_edges(tail))
    return slots


def randomize_code(topology: Topology, ctx: FieldContext, seed) -> NetworkCode:
    """I.i.d. uniform coefficients from numpy's PCG64 generator seeded with ``seed``."""
    rng = np.random.default_rng(seed)
    slots = coefficient_slots(topology)
    values = rng.integers(0, ctx.size, size=len(slots))
    return NetworkCode(ctx, {s: int(v) for s, v in zip(slots, values)})


def constant_code(topology: Topology, ctx: FieldContext, value: int = 1) -> NetworkCode:
    return NetworkCode(ctx, {s: value for s in coefficient_slots(topology)})


@dataclass(eq=False)
class NetworkInstance:
    ctx: FieldContext
    T_hat_field: np.ndarray
    source_columns: tuple
    topology: Topology | None = None
    code: NetworkCode | None = None

    def __post_init__(self):
        self.T_hat_field = np.asarray(self.T_hat_field, dtype=np.int64)
        self.T_hat_field.flags.writeable = False
        self.source_columns = tuple(self.source_columns)
        if len(self.source_columns) != self.C:
            raise ValueError("need exactly C source columns")

    @property
    def C(self) -> int:
        return self.T_hat_field.shape[0]

    @property
    def E(self) -> int:
        return self.T_hat_field.shape[1]

    @property
    def m(self) -> int:
        return self.ctx.m

    @cached_property
    def T_field(self) -> np.ndarray:
        return self.T_hat_field[:, list(self.source_columns)]

    @cached_property
    def T_hat(self) -> np.ndarray:
        M = field_matrix_to_binary(self.ctx, self.T_hat_field)
        M.flags.writeable = False
        return M

    @cached_property
    def T(self) -> np.ndarray:
        m = self.m
        cols = [j for c in self.source_columns for j in range(c * m, (c + 1) * m)]
        M = self.T_hat[:, cols].copy()
        M.flags.writeable = False
        return M

    @cached_property
    def T_inv(self) -> np.ndarray:
        return bitmatrix_invert(self.T)

    @cached_property
    def table(self) -> CosetLeaderTable:
        return build_coset_table(self.T_hat)

    @cached_property
    def mds_certified(self) -> bool:
        return certify_mds(self)

    @property
    def transfer_invertible(self) -> bool:
        return bitmatrix_rank(self.T) == self.C * self.m

    @property
    def full_row_rank(self) -> bool:
        return bitmatrix_rank(self.T_hat) == self.C * self.m

    def transfer_map(self) -> np.ndarray:
        """Lookup table: packed column x -> packed column T x, for all 2^(Cm) inputs."""
        return _column_map(self.T)

    def inverse_transfer_map(self) -> np.ndarray:
        return _column_map(self.T_inv)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(f"m={self.m};poly={self.ctx.primitive_polynomial};src={self.source_columns};".encode())
        h.update(self.T_hat_field.astype("<i8").tobytes())
        return h.hexdigest()[:16]


def _column_map(M: np.ndarray) -> np.ndarray:
    a = M.shape[1]
    cols = pack_columns(M)
    out = np.zeros(1 << a, dtype=np.int64)
    for j, c in enumerate(cols):
        bit = 1 << j
        out[bit:2 * bit] = out[:bit] ^ c
    return out


def derive_transfer_matrices(topology: Topology, code: NetworkCode) -> NetworkInstance:
    """Global kernels by one pass in edge order; noise is injected on every edge."""
    ctx = code.ctx
    E = topology.E
    kernels = np.zeros((E, E), dtype=np.int64)
    for e, (tail, _) in enumerate(topology.edges):
        if tail != topology.source:
            for e_in in topology.in_edges(tail):
                if e_in >= e:
                    raise TopologyError("edge order is not topological")
                try:
                    f = code.coefficients[(e_in, e)]
                except KeyError:
                    raise KeyError(f"missing coefficient for edge pair {(e_in, e)}") from None
                ctx.check(f)
                kernels[e] ^= ctx.mul_array(f, kernels[e_in])
        kernels[e, e] ^= 1
    T_hat_field = kernels[topology.sink_edges]
    return NetworkInstance(ctx, T_hat_field, topology.source_edges, topology, code)


def instance_from_matrix(ctx: FieldContext, T_hat_field, source_columns=None) -> NetworkInstance:
    T_hat_field = np.asarray(T_hat_field, dtype=np.int64)
    if source_columns is None:
        source_columns = range(T_hat_field.shape[0])
    return NetworkInstance(ctx, T_hat_field, tuple(source_columns))


def certify_mds(instance: NetworkInstance) -> bool:
    """True iff every C x C submatrix of T_hat over GF(2^m) is invertible."""
    C, E = instance.C, instance.E
    if math.comb(E, C) > MDS_SUBSET_CAP:
        raise CapExceeded(f"C(E, C) = C({E}, {C}) exceeds {MDS_SUBSET_CAP}")
    A = instance.T_hat_field
    return all(field_matrix_rank(instance.ctx, A[:, list(cols)]) == C
               for cols in itertools.combinations(range(E), C))


def random_certified_instance(topology: Topology, ctx: FieldContext, seed, max_tries: int = 1000):
    """First MDS-certified instance among codes drawn with seeds ``seed, seed+1, ...``.

    Returns ``(instance, seed_used)``.
    """
    for k in range(max_tries):
        inst = derive_transfer_matrices(topology, randomize_code(topology, ctx, seed + k))
        if inst.transfer_invertible and inst.mds_certified:
            return inst, seed + k
    raise NoCertifiedCode(f"no certified code found in {max_tries} draws")


def enumerate_certified_matrices(ctx: FieldContext, C: int, E: int, cap: int = 1 << 20):
    """Every C x E matrix over GF(2^m) whose C x C submatrices are all invertible.

    The first C columns play the role of T.
    """
    total = ctx.size ** (C * E)
    if total > cap:
        raise CapExceeded(f"{total} candidate matrices exceeds {cap}")
    found = []
    nonzero = range(1, ctx.size)
    # every entry of an MDS matrix is nonzero (C = 1 columns) -- prune on that when C == 1
    values = nonzero if C == 1 else range(ctx.size)
    for entries in itertools.product(values, repeat=C * E):
        inst = instance_from_matrix(ctx, np.array(entries).reshape(C, E))
        if inst.mds_certified:
            found.append(inst)
    return found


# channel ----------------------------------------------------------------


def noise_budget(p: float, E: int, m: int, n: int) -> int:
    """floor(p E m n), tolerant of float round-off at exact integers."""
    return int(math.floor(p * E * m * n + 1e-9))


@dataclass(frozen=True)
class NoisePattern:
    Z: np.ndarray
    budget: int

    def __post_init__(self):
        if int(np.count_nonzero(self.Z)) > self.budget:
            raise ValueError(f"noise weight {np.count_nonzero(self.Z)} exceeds budget {self.budget}")

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.Z))


def transmit(instance: NetworkInstance, X, Z) -> np.ndarray:
    """Y = T X + T_hat Z over GF(2)."""
    if isinstance(Z, NoisePattern):
        Z = Z.Z
    X = np.asarray(X)
    Z = np.asarray(Z)
    Cm, Em = instance.C * instance.m, instance.E * instance.m
    if X.shape[0] != Cm or Z.shape[0] != Em or X.shape[1] != Z.shape[1]:
        raise ValueError(f"expected X {Cm}xn and Z {Em}xn, got {X.shape} and {Z.shape}")
    return bitmatrix_mul(instance.T, X) ^ bitmatrix_mul(instance.T_hat, Z)


def count_noise_patterns(budget: int, Em: int, n: int) -> int:
    N = Em * n
    return sum(math.comb(N, w) for w in range(min(budget, N) + 1))


def enumerate_noise_supports(budget: int, Em: int, n: int, cap: int = NOISE_ENUMERATION_CAP):
    """Flip positions (flat row-major indices) of every pattern of weight <= budget."""
    N = Em * n
    if budget > N:
        raise ValueError(f"budget {budget} exceeds the {N} available bits")
    total = count_noise_patterns(budget, Em, n)
    if total > cap:
        raise CapExceeded(f"{total} noise patterns exceeds cap {cap}")
    for w in range(budget + 1):
        yield from itertools.combinations(range(N), w)


def enumerate_noise(budget: int, Em: int, n: int, cap: int = NOISE_ENUMERATION_CAP):
    for support in enumerate_noise_supports(budget, Em, n, cap):
        Z = np.zeros(Em * n, dtype=np.uint8)
        Z[list(support)] = 1
        yield NoisePattern(Z.reshape(Em, n), budget)


def noise_image_ball(T_hat, n: int, radius: int) -> np.ndarray:
    """Sorted packed values of T_hat Z over all Em x n patterns Z with weight <= radius.

    A matrix packs as in ``algebra.pack_matrix``.  The set is grown one bit-flip
    at a time, so it is exactly the image of the weight-``radius`` noise ball.
    """
    T_hat = np.asarray(T_hat)
    a = T_hat.shape[0]
    bits = a * n
    if bits > IMAGE_SPACE_BITS_CAP:
        raise CapExceeded(f"image space of {bits} bits exceeds cap {IMAGE_SPACE_BITS_CAP}")
    cols = np.unique(pack_columns(T_hat))
    cols = cols[cols != 0]
    gens = np.array([int(c) << (a * k) for k in range(n) for c in cols], dtype=np.int64)
    seen = np.zeros(1 << bits, dtype=bool)
    seen[0] = True
    frontier = np.zeros(1, dtype=np.int64)
    for _ in range(radius):
        layer = []
        for g in gens:
            cand = frontier ^ g
            cand = cand[~seen[cand]]
            seen[cand] = True
            layer.append(cand)
        frontier = np.concatenate(layer) if layer else frontier[:0]
        if not frontier.size:
            break
    return np.flatnonzero(seen)


# adversaries ------------------------------------------------------------

NOISE_STRATEGIES = ("concentrated", "spread", "greedy")


def adversarial_noise(instance: NetworkInstance, codebook, strategy: str, seed, budget: int,
                      sent: int = 0, target: int | None = None, edge: int | None = None) -> NoisePattern:
    """Worst-case style noise of weight ``budget`` against codeword ``sent``.

    ``concentrated`` puts every flip on one edge, ``spread`` deals flips to edges
    round-robin, and ``greedy`` hill-climbs single flips that most shrink
    d(T X_target, Y) - d(T X_sent, Y) for a wrong codeword ``target`` (default: the
    transformed codeword nearest the sent one).
    """
    rng = np.random.default_rng(seed)
    m, E = instance.m, instance.E
    n = codebook.n
    Z = np.zeros((E * m, n), dtype=np.uint8)
    if strategy == "concentrated":
        e = int(rng.integers(E)) if edge is None else edge
        k = min(budget, m * n)
        flat = rng.choice(m * n, size=k, replace=False)
        Z[e * m + flat // n, flat % n] = 1
    elif strategy == "spread":
        edges = rng.permutation(E)
        free = {int(e): list(rng.permutation(m * n)) for e in edges}
        placed = 0
        while placed < min(budget, E * m * n):
            for e in edges:
                if placed == budget:
                    break
                if free[int(e)]:
                    pos = int(free[int(e)].pop())
                    Z[int(e) * m + pos // n, pos % n] = 1
                    placed += 1
    elif strategy == "greedy":
        Z = _greedy_confusion(instance, codebook, rng, budget, sent, target)
    else:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {NOISE_STRATEGIES}")
    return NoisePattern(Z, budget)


def _greedy_confusion(instance, codebook, rng, budget, sent, target):
    table = instance.table
    W = codebook.transformed_columns(instance)  # (M, n) packed T X_i
    if len(W) < 2:
        raise ValueError("greedy confusion needs at least two codewords")
    if target is None:
        d = table.column_weights(W ^ W[sent]).sum(axis=1)
        d[sent] = np.iinfo(np.int64).max
        target = int(np.argmin(d))
    Em, n = instance.E * instance.m, codebook.n
    hat_cols = pack_columns(instance.T_hat)
    y = W[sent].copy()
    Z = np.zeros((Em, n), dtype=np.uint8)
    for _ in range(budget):
        # candidate flip (r, k) changes column k of Y by hat_cols[r]
        new_cols = np.where(Z == 0, y[None, :] ^ hat_cols[:, None], y[None, :])
        to_target = table.column_weights(new_cols ^ W[target][None, :]) - table.column_weights(y ^ W[target])[None, :]
        to_sent = table.column_weights(new_cols ^ W[sent][None, :]) - table.column_weights(y ^ W[sent])[None, :]
        score = (to_target - to_sent).astype(float)
        score[Z == 1] = np.inf
        best = np.flatnonzero(score == score.min())
        r, k = divmod(int(rng.choice(best)), n)
        Z[r, k] = 1
        y[k] ^= hat_cols[r]
    return Z
