"""GV-type codebooks for the worst-case binary-error network channel.

Codewords are Cm x n bit matrices.  Internally a matrix is one packed integer
(column k at bits [k*Cm, (k+1)*Cm)), and a batch of matrices is an (M, n) array
of packed columns.

Greedy construction works in message space: the transform ball of radius 2t
around T X' is {T X' + T_hat Z : wt(Z) <= 2t}, so the matrices it excludes are
X' + T^-1 T_hat Z.  The offsets T^-1 T_hat Z are computed once per channel
(``exclusion_offsets``) and every pick clears X' ^ offsets from the set of
remaining candidates.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import (
    FieldContext,
    bitmatrix_rank,
    element_to_matrix,
    pack_columns,
    pack_matrix,
    unpack_matrix,
)
from .metric import UNREACHABLE_DISTANCE
from .network import (
    CapExceeded,
    NetworkInstance,
    enumerate_certified_matrices,
    instance_from_matrix,
    noise_budget,
    noise_image_ball,
)

GREEDY_SPACE_BITS_CAP = 22
LINEAR_MESSAGE_CAP = 10**6
FAMILY_ENUMERATION_CAP = 1 << 20
CODEBOOK_FORMAT = "tmcodes-codebook v1"


class AmbiguousDecoding(RuntimeError):
    """Two distinct codewords attain the minimum transform distance."""

    def __init__(self, candidates, distance):
        super().__init__(f"codewords {list(candidates)} tie at transform distance {distance}")
        self.candidates = list(candidates)
        self.distance = distance


class ConstructionFailed(RuntimeError):
    pass


# packing helpers ----------------------------------------------------------


def split_columns(values, rows: int, n: int) -> np.ndarray:
    """Packed matrices (shape (M,)) -> packed columns (shape (M, n))."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64) * rows
    return (values[:, None] >> shifts[None, :]) & ((1 << rows) - 1)


def join_columns(cols, rows: int) -> np.ndarray:
    cols = np.asarray(cols, dtype=np.int64)
    shifts = np.arange(cols.shape[-1], dtype=np.int64) * rows
    return np.bitwise_or.reduce(cols << shifts, axis=-1)


# codebook ----------------------------------------------------------------


@dataclass
class Codebook:
    codewords: np.ndarray  # (M, n) packed columns
    Cm: int
    n: int
    min_distance_certificate: int
    construction: str
    seed: int | None = None
    params: dict = field(default_factory=dict)
    family_hash: str = ""

    def __post_init__(self):
        self.codewords = np.asarray(self.codewords, dtype=np.int64).reshape(-1, self.n)
        self.codewords.flags.writeable = False

    def __len__(self) -> int:
        return len(self.codewords)

    @property
    def size(self) -> int:
        return len(self.codewords)

    def matrix(self, i: int) -> np.ndarray:
        return np.array([[(int(c) >> r) & 1 for c in self.codewords[i]] for r in range(self.Cm)],
                        dtype=np.uint8)

    def matrices(self) -> np.ndarray:
        rows = np.arange(self.Cm, dtype=np.int64)
        return ((self.codewords[:, None, :] >> rows[None, :, None]) & 1).astype(np.uint8)

    def packed(self) -> np.ndarray:
        return join_columns(self.codewords, self.Cm)

    def transformed_columns(self, instance: NetworkInstance) -> np.ndarray:
        """Packed columns of T X_i for every codeword."""
        return instance.transfer_map()[self.codewords]

    def index_of(self, X) -> int:
        cols = pack_columns(X)
        hits = np.flatnonzero(np.all(self.codewords == cols[None, :], axis=1))
        if not hits.size:
            raise KeyError("matrix is not a codeword")
        return int(hits[0])


def family_fingerprint(family) -> str:
    h = hashlib.sha256()
    for inst in family:
        h.update(inst.fingerprint().encode())
    return h.hexdigest()


# exclusion sets and the greedy loop ----------------------------------------


def exclusion_offsets(instance: NetworkInstance, n: int, radius: int) -> np.ndarray:
    """Packed X-space offsets T^-1 T_hat Z for all noise patterns of weight <= radius."""
    images = noise_image_ball(instance.T_hat, n, radius)
    cols = split_columns(images, instance.C * instance.m, n)
    return np.unique(join_columns(instance.inverse_transfer_map()[cols], instance.C * instance.m))


def _check_greedy_instance(instance: NetworkInstance, n: int):
    bits = instance.C * instance.m * n
    if bits > GREEDY_SPACE_BITS_CAP:
        raise CapExceeded(f"message space 2^{bits} exceeds 2^{GREEDY_SPACE_BITS_CAP}")
    if not instance.transfer_invertible:
        raise ValueError("transfer matrix T is not invertible over GF(2)")
    if not instance.mds_certified:
        raise ValueError("instance is not MDS-certified")


def _greedy(space_bits: int, offsets: np.ndarray, seed) -> np.ndarray:
    """Sphere-exclusion: repeatedly pick a uniform remaining point and clear its ball."""
    rng = np.random.default_rng(seed)
    available = np.ones(1 << space_bits, dtype=bool)
    order = rng.permutation(1 << space_bits)
    picked = []
    for x in order:
        if available[x]:
            picked.append(int(x))
            available[x ^ offsets] = False
    return np.array(picked, dtype=np.int64)


def gv_construct_coherent(instance: NetworkInstance, p: float, n: int, seed) -> Codebook:
    """Greedy GV codebook with minimum transform distance 2t+1, t = floor(pEmn)."""
    return gv_construct_noncoherent([instance], p, n, seed, construction="coherent-greedy")


def gv_construct_noncoherent(family, p: float, n: int, seed, construction: str = "noncoherent-greedy",
                             min_distance: int | None = None) -> Codebook:
    """Greedy construction clearing the union of the balls over every channel in ``family``.

    ``min_distance`` overrides the design distance 2t+1 (used for inner codes).
    """
    family = list(family)
    if not family:
        raise ValueError("empty channel family")
    first = family[0]
    C, E, m = first.C, first.E, first.m
    for inst in family:
        if (inst.C, inst.E, inst.m) != (C, E, m):
            raise ValueError("family members disagree on (C, E, m)")
        _check_greedy_instance(inst, n)
    budget = noise_budget(p, E, m, n)
    d = 2 * budget + 1 if min_distance is None else int(min_distance)
    offsets = np.unique(np.concatenate([exclusion_offsets(inst, n, d - 1) for inst in family]))
    picked = _greedy(C * m * n, offsets, seed)
    params = {"C": C, "E": E, "m": m, "n": n, "p": p, "budget": budget, "family_size": len(family)}
    return Codebook(split_columns(picked, C * m, n), C * m, n, d, construction, seed, params,
                    family_fingerprint(family))


def certified_family(ctx: FieldContext, C: int, E: int, sampling: int | None = None, seed=0,
                     cap: int = FAMILY_ENUMERATION_CAP):
    """All MDS-certified C x E channels over GF(2^m), or ``sampling`` random certified ones.

    Returns ``(family, exhaustive)``.  Sampling is only used when enumeration
    exceeds ``cap``; the distance guarantee then covers the sampled family only.
    """
    total = ctx.size ** (C * E)
    if total <= cap:
        return enumerate_certified_matrices(ctx, C, E, cap=cap), True
    if not sampling:
        raise CapExceeded(f"{total} channel matrices exceed cap {cap}; pass sampling=<count>")
    rng = np.random.default_rng(seed)
    family, seen = [], set()
    tries = 0
    while len(family) < sampling:
        tries += 1
        if tries > 1000 * sampling:
            raise RuntimeError("could not sample enough certified channels")
        A = rng.integers(0, ctx.size, size=(C, E))
        key = A.tobytes()
        if key in seen:
            continue
        inst = instance_from_matrix(ctx, A)
        if inst.mds_certified:
            seen.add(key)
            family.append(inst)
    return family, False


# certification and decoding -----------------------------------------------


def pairwise_min_distance(codebook: Codebook, instance: NetworkInstance) -> float:
    """Minimum over distinct codeword pairs of d_T_hat(T X_i, T X_j) (exhaustive)."""
    if len(codebook) < 2:
        return math.inf
    W = codebook.transformed_columns(instance)
    table = instance.table
    best = UNREACHABLE_DISTANCE
    for i in range(len(W) - 1):
        d = table.column_weights(W[i + 1:] ^ W[i]).sum(axis=1).min()
        best = min(best, int(d))
    return math.inf if best >= UNREACHABLE_DISTANCE else best


def certify_codebook(codebook: Codebook, family) -> float:
    """Smallest pairwise transform distance over every channel in ``family``."""
    if isinstance(family, NetworkInstance):
        family = [family]
    return min(pairwise_min_distance(codebook, inst) for inst in family)


def _as_family(instances):
    return [instances] if isinstance(instances, NetworkInstance) else list(instances)


def decode_distances(codebook: Codebook, instances, Y_cols) -> np.ndarray:
    """(K, M) matrix of min over channels of d_T_hat(T X_i, Y) for packed received batches (K, n)."""
    Y_cols = np.atleast_2d(np.asarray(Y_cols, dtype=np.int64))
    best = None
    for inst in _as_family(instances):
        W = codebook.transformed_columns(inst)
        d = inst.table.column_weights(Y_cols[:, None, :] ^ W[None, :, :]).sum(axis=2)
        best = d if best is None else np.minimum(best, d)
    return best


def md_decode_batch(codebook: Codebook, instances, Y_cols):
    """Vectorised minimum-distance decoding; returns (indices, distances, ambiguous)."""
    d = decode_distances(codebook, instances, Y_cols)
    idx = d.argmin(axis=1)
    dmin = d[np.arange(len(d)), idx]
    ties = (d == dmin[:, None]).sum(axis=1) > 1
    return idx, dmin, ties


def md_decode(codebook: Codebook, instances, Y, strict: bool = True) -> int:
    """Index of the codeword X minimising d_T_hat(T X, Y) (over every channel, if a family).

    A tie raises ``AmbiguousDecoding`` when ``strict``; otherwise the lowest index wins.
    """
    Y = np.asarray(Y)
    if Y.shape != (codebook.Cm, codebook.n):
        raise ValueError(f"received matrix must be {codebook.Cm}x{codebook.n}, got {Y.shape}")
    d = decode_distances(codebook, instances, pack_columns(Y)[None, :])[0]
    dmin = d.min()
    winners = np.flatnonzero(d == dmin)
    if winners.size > 1 and strict:
        raise AmbiguousDecoding(winners, int(dmin))
    return int(winners[0])


# random linear codes ------------------------------------------------------


@dataclass
class LinearCode:
    """Codewords [I M] G for M ranging over C x (k - C) matrices over GF(2^m).

    [I M] is expanded to its Cm x km binary form (each symbol an m x m block), so
    the code has 2^(C (k - C) m) codewords of size Cm x n.
    """

    G: np.ndarray
    k: int
    C: int
    ctx: FieldContext
    d: int
    seed: int | None = None
    attempts: int = 1
    verified: bool = False

    @property
    def m(self) -> int:
        return self.ctx.m

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @property
    def message_symbols(self) -> int:
        return self.C * (self.k - self.C)

    def message_matrix(self, M) -> np.ndarray:
        """Binary form of [I M]."""
        M = np.asarray(M, dtype=np.int64).reshape(self.C, self.k - self.C)
        m = self.m
        out = np.zeros((self.C * m, self.k * m), dtype=np.uint8)
        out[:, : self.C * m] = np.eye(self.C * m, dtype=np.uint8)
        for i in range(self.C):
            for j in range(self.k - self.C):
                if M[i, j]:
                    col = (self.C + j) * m
                    out[i * m:(i + 1) * m, col:col + m] = element_to_matrix(self.ctx, int(M[i, j]))
        return out

    def encode(self, M) -> np.ndarray:
        return (self.message_matrix(M).astype(np.int64) @ self.G % 2).astype(np.uint8)

    def packed_codewords(self) -> np.ndarray:
        """Packed codewords (as whole-matrix ints) indexed by the message bit vector.

        Message index bit ``(i*(k-C) + j)*m + b`` is bit b of symbol M[i, j].
        """
        return _linear_codewords(self.G, self.C, self.k, self.ctx)

    def codebook(self) -> Codebook:
        Cm = self.C * self.m
        return Codebook(split_columns(self.packed_codewords(), Cm, self.n), Cm, self.n, self.d,
                        "linear", self.seed, {"k": self.k})


def _linear_codewords(G, C, k, ctx):
    m = ctx.m
    n = G.shape[1]
    Cm = C * m
    bits = C * (k - C) * m
    if Cm * n > 62:
        raise CapExceeded("codewords wider than 62 bits cannot be packed")
    if (1 << bits) > LINEAR_MESSAGE_CAP:
        raise CapExceeded(f"2^{bits} messages exceeds cap {LINEAR_MESSAGE_CAP}")
    G = np.asarray(G, dtype=np.int64)
    base = pack_matrix(G[:Cm].astype(np.uint8))
    contributions = []
    for i in range(C):
        for j in range(k - C):
            for b in range(m):
                block = np.zeros((Cm, k * m), dtype=np.int64)
                block[i * m:(i + 1) * m, (C + j) * m:(C + j + 1) * m] = element_to_matrix(ctx, 1 << b)
                contributions.append(pack_matrix((block @ G % 2).astype(np.uint8)))
    out = np.zeros(1 << bits, dtype=np.int64)
    out[0] = base
    for t, c in enumerate(contributions):
        step = 1 << t
        out[step:2 * step] = out[:step] ^ c
    return out


def linear_gv_dimension(C: int, E: int, p: float, n: int, epsilon: float) -> int:
    from .bounds import entropy

    return math.ceil((1 - E / C * entropy(2 * p) - epsilon) * n - 1e-9) + C


def linear_distance_check(instance: NetworkInstance, G, k: int, d: int,
                          pairwise: bool = False) -> tuple[bool, float]:
    """Check d_T_hat(T [I M] G, 0) >= d for every nonzero M; returns (ok, smallest value).

    That check bounds each codeword's distance from zero, not the distance
    between two codewords, which is the weight of T [0 D] G for the nonzero
    difference D.  ``pairwise=True`` checks those differences instead, which
    certifies the codebook's minimum distance.
    """
    C, m = instance.C, instance.m
    G = np.asarray(G)
    n = G.shape[1]
    if pairwise:
        G = G.copy()
        G[:C * m] = 0
    words = _linear_codewords(G, C, k, instance.ctx)[1:]
    if not words.size:
        return True, math.inf
    cols = instance.transfer_map()[split_columns(words, C * m, n)]
    weights = instance.table.column_weights(cols).sum(axis=1)
    smallest = int(weights.min())
    return smallest >= d, (math.inf if smallest >= UNREACHABLE_DISTANCE else smallest)


def draw_generator(rng, km: int, n: int) -> np.ndarray:
    """Uniform km x n binary matrix of full row rank (rank-deficient draws are redrawn)."""
    if km > n:
        raise ValueError(f"km={km} exceeds n={n}; no injective generator exists")
    while True:
        G = rng.integers(0, 2, size=(km, n), dtype=np.uint8)
        if bitmatrix_rank(G) == km:
            return G


def linear_gv_construct(instance: NetworkInstance, p: float, n: int, epsilon: float, seed,
                        attempts: int = 100, k: int | None = None, pairwise: bool = False) -> LinearCode:
    """Draw random generators until one passes the distance check (at most ``attempts`` draws).

    ``pairwise`` selects the stricter difference check of :func:`linear_distance_check`.
    """
    C, E, m = instance.C, instance.E, instance.m
    if k is None:
        k = linear_gv_dimension(C, E, p, n, epsilon)
    if k <= C:
        raise ValueError(f"dimension k={k} leaves no message symbols (need k > C={C})")
    d = 2 * noise_budget(p, E, m, n) + 1
    rng = np.random.default_rng(seed)
    for attempt in range(1, attempts + 1):
        G = draw_generator(rng, k * m, n)
        ok, _ = linear_distance_check(instance, G, k, d, pairwise)
        if ok:
            return LinearCode(G, k, C, instance.ctx, d, seed, attempt, True)
    raise ConstructionFailed(f"no generator passed the distance check in {attempts} attempts")


# persistence -------------------------------------------------------------


def save_codebook(codebook: Codebook, path, extra: dict | None = None) -> None:
    width = math.ceil(codebook.Cm * codebook.n / 4)
    header = {
        "Cm": codebook.Cm, "n": codebook.n, "d": codebook.min_distance_certificate,
        "construction": codebook.construction, "seed": codebook.seed, "size": len(codebook),
        "family_hash": codebook.family_hash,
    }
    header.update({f"param.{k}": v for k, v in codebook.params.items()})
    header.update(extra or {})
    lines = [f"# {CODEBOOK_FORMAT}"] + [f"# {k}={v}" for k, v in header.items()]
    lines += [f"{int(v):0{width}x}" for v in codebook.packed()]
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return None if text == "None" else text


def load_codebook(path) -> tuple[Codebook, dict]:
    """Read a codebook file; returns the codebook and the full header dict."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != f"# {CODEBOOK_FORMAT}":
        raise ValueError(f"{path}: not a {CODEBOOK_FORMAT} file")
    header, values = {}, []
    for line in lines[1:]:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key] = _parse_value(value)
        elif line.strip():
            values.append(int(line, 16))
    Cm, n = header["Cm"], header["n"]
    if len(values) != header["size"]:
        raise ValueError(f"{path}: header says {header['size']} codewords, found {len(values)}")
    params = {k[6:]: v for k, v in header.items() if k.startswith("param.")}
    cols = split_columns(np.array(values, dtype=np.int64), Cm, n) if values else np.zeros((0, n))
    book = Codebook(cols, Cm, n, header["d"], header["construction"], header["seed"], params,
                    header.get("family_hash") or "")
    return book, header


def codeword_matrix(value: int, Cm: int, n: int) -> np.ndarray:
    return unpack_matrix(value, Cm, n)
