"""Concatenated codes: Reed-Solomon outer code, GV-type inner code per chunk.

The codeword is N_out chunks of width b placed side by side.  Chunk i carries
outer symbol c_i in GF(2^k_in) as inner codeword number c_i.  Message bits are
read k_in at a time, little-endian, into the K_out outer message symbols.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import gf, pack_columns
from .gvcodes import Codebook, decode_distances, gv_construct_noncoherent
from .network import NetworkInstance, transmit
from .reedsolomon import RSCode, RSDecodeFailure, rs_decode_errors_erasures

GMD_MODES = ("randomized", "sweep")


@dataclass
class ConcatCode:
    instance: NetworkInstance
    inner: Codebook
    rs: RSCode
    b: int
    d_in: int
    seed: int | None = None

    @property
    def k_in(self) -> int:
        return self.rs.ctx.m

    @property
    def N_out(self) -> int:
        return self.rs.N

    @property
    def K_out(self) -> int:
        return self.rs.K

    @property
    def d_out(self) -> int:
        return self.rs.d

    @property
    def n(self) -> int:
        return self.N_out * self.b

    @property
    def Cm(self) -> int:
        return self.instance.C * self.instance.m

    @property
    def message_bits(self) -> int:
        return self.K_out * self.k_in

    @property
    def rate(self) -> float:
        """Message bits per Cm n channel bits, i.e. R_in R_out."""
        return self.message_bits / (self.Cm * self.n)

    @property
    def inner_rate(self) -> float:
        return self.k_in / (self.Cm * self.b)

    @property
    def outer_rate(self) -> float:
        return self.K_out / self.N_out

    @property
    def correction_radius(self) -> float:
        """Transform-distance noise below which sweep GMD always succeeds: d_out d_in / 2."""
        return self.d_out * self.d_in / 2


def build_concat_code(instance: NetworkInstance, b: int, d_in: int, K_out: int, seed,
                      N_out: int | None = None) -> ConcatCode:
    """Greedy inner code of distance ``d_in`` and width ``b``; RS outer code over GF(2^k_in).

    k_in = floor(log2 |inner codebook|) and the first 2^k_in inner codewords are kept.
    ``N_out`` defaults to the largest length the outer field allows.
    """
    full = gv_construct_noncoherent([instance], 0.0, b, seed, construction="inner-greedy",
                                    min_distance=d_in)
    k_in = int(math.floor(math.log2(len(full))))
    if k_in < 1:
        raise ValueError("inner code has fewer than two codewords")
    inner = Codebook(full.codewords[: 1 << k_in], full.Cm, b, d_in, "inner-greedy", seed,
                     dict(full.params, k_in=k_in), full.family_hash)
    ctx = gf(k_in)
    if N_out is None:
        N_out = ctx.order
    return ConcatCode(instance, inner, RSCode(ctx, N_out, K_out), b, d_in, seed)


# encoding ---------------------------------------------------------------


def message_to_symbols(code: ConcatCode, message) -> np.ndarray:
    bits = np.asarray(message, dtype=np.int64).ravel()
    if bits.size != code.message_bits:
        raise ValueError(f"message must have {code.message_bits} bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("message entries must be bits")
    weights = 1 << np.arange(code.k_in, dtype=np.int64)
    return (bits.reshape(code.K_out, code.k_in) * weights).sum(axis=1)


def symbols_to_message(code: ConcatCode, symbols) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    return ((symbols[:, None] >> np.arange(code.k_in)) & 1).astype(np.uint8).ravel()


def outer_symbols(code: ConcatCode, message) -> np.ndarray:
    return code.rs.encode(message_to_symbols(code, message))


def concat_encode_columns(code: ConcatCode, message) -> np.ndarray:
    """Packed columns (length n) of the codeword."""
    return code.inner.codewords[outer_symbols(code, message)].ravel()


def concat_encode(code: ConcatCode, message) -> np.ndarray:
    cols = concat_encode_columns(code, message)
    return ((cols[None, :] >> np.arange(code.Cm)[:, None]) & 1).astype(np.uint8)


# decoding ---------------------------------------------------------------


@dataclass
class DecodeResult:
    message: np.ndarray | None
    success: bool
    erasures: int = 0
    outer_errors: int | None = None
    inner_symbols: np.ndarray | None = None
    inner_distances: np.ndarray | None = None
    candidates_tried: int = 1
    mode: str = "natural"
    erased: np.ndarray | None = None


def inner_decode(code: ConcatCode, Y) -> tuple[np.ndarray, np.ndarray]:
    """Per-chunk nearest inner codeword (lowest index on ties) and its transform distance."""
    cols = pack_columns(Y).reshape(code.N_out, code.b)
    d = decode_distances(code.inner, code.instance, cols)
    idx = d.argmin(axis=1)
    return idx.astype(np.int64), d[np.arange(code.N_out), idx]


def _count_errors(symbols, erased, truth):
    if truth is None:
        return None
    truth = np.asarray(truth)
    return int(np.count_nonzero((symbols != truth) & ~erased))


def _decode_outer(code, symbols, erased):
    try:
        return rs_decode_errors_erasures(code.rs, symbols, erased)
    except RSDecodeFailure:
        return None


def received_distance(code: ConcatCode, message, Y) -> int:
    """Total transform distance between T times the encoding of ``message`` and ``Y``."""
    W = code.instance.transfer_map()[concat_encode_columns(code, message)]
    return int(code.instance.table.column_weights(W ^ pack_columns(Y)).sum())


def natural_decode(code: ConcatCode, Y, true_symbols=None) -> DecodeResult:
    """Inner minimum-distance decoding per chunk, then errors-only outer decoding."""
    symbols, dist = inner_decode(code, Y)
    erased = np.zeros(code.N_out, dtype=bool)
    msg_syms = _decode_outer(code, symbols, erased)
    message = None if msg_syms is None else symbols_to_message(code, msg_syms)
    return DecodeResult(message, message is not None, 0, _count_errors(symbols, erased, true_symbols),
                        symbols, dist, 1, "natural", erased)


def gmd_decode(code: ConcatCode, Y, seed=None, mode: str = "randomized", true_symbols=None) -> DecodeResult:
    """Generalised minimum distance decoding.

    Each chunk gets reliability weight w_i = min(delta_i, d_in/2) from its inner
    decoding distance.  ``randomized`` erases chunk i with probability 2 w_i / d_in
    and decodes once.  ``sweep`` tries no erasures, then erasing every chunk with
    w_i >= v for each distinct positive v (largest first), and accepts the first
    candidate whose re-encoding is within d_out d_in / 2 of Y.
    """
    if mode not in GMD_MODES:
        raise ValueError(f"mode must be one of {GMD_MODES}")
    symbols, dist = inner_decode(code, Y)
    omega = np.minimum(dist.astype(float), code.d_in / 2)
    prob = 2 * omega / code.d_in
    assert np.all(prob <= 1.0)

    if mode == "randomized":
        rng = np.random.default_rng(seed)
        erased = rng.random(code.N_out) < prob
        msg_syms = _decode_outer(code, symbols, erased)
        message = None if msg_syms is None else symbols_to_message(code, msg_syms)
        return DecodeResult(message, message is not None, int(erased.sum()),
                            _count_errors(symbols, erased, true_symbols), symbols, dist, 1, mode, erased)

    candidates = [np.zeros(code.N_out, dtype=bool)]
    candidates += [omega >= v for v in sorted(set(omega[omega > 0].tolist()), reverse=True)]
    erased = candidates[0]
    for tried, erased in enumerate(candidates, 1):
        msg_syms = _decode_outer(code, symbols, erased)
        if msg_syms is None:
            continue
        message = symbols_to_message(code, msg_syms)
        if received_distance(code, message, Y) < code.correction_radius:
            return DecodeResult(message, True, int(erased.sum()),
                                _count_errors(symbols, erased, true_symbols), symbols, dist, tried, mode,
                                erased)
    return DecodeResult(None, False, int(erased.sum()), _count_errors(symbols, erased, true_symbols),
                        symbols, dist, len(candidates), mode, erased)


# experiments ------------------------------------------------------------


def chunked_noise(code: ConcatCode, weight: int, rng) -> np.ndarray:
    """Em x n noise of the given weight, split over a random number of random chunks.

    Piling several flips into a few chunks is what drives inner decoding errors.
    """
    Em, b = code.instance.E * code.instance.m, code.b
    Z = np.zeros((Em, code.n), dtype=np.uint8)
    if weight == 0:
        return Z
    chunks = rng.choice(code.N_out, size=int(rng.integers(1, min(weight, code.N_out) + 1)), replace=False)
    cuts = np.sort(rng.choice(np.arange(1, weight), size=len(chunks) - 1, replace=False)) if len(chunks) > 1 else []
    counts = np.diff(np.concatenate([[0], cuts, [weight]])).astype(int)
    for chunk, k in zip(chunks, counts):
        k = min(int(k), Em * b)
        flat = rng.choice(Em * b, size=k, replace=False)
        Z[flat // b, chunk * b + flat % b] = 1
    return Z


@dataclass
class TrialRecord:
    seed: int
    noise_weight: int
    mode: str
    erasures: int
    outer_errors: int | None
    success: bool

    def line(self) -> str:
        e = "" if self.outer_errors is None else self.outer_errors
        return f"{self.seed},{self.noise_weight},{self.mode},{self.erasures},{e},{int(self.success)}"


@dataclass
class ExperimentReport:
    records: list = field(default_factory=list)
    d_out: int = 0

    def add(self, record: TrialRecord):
        self.records.append(record)

    def by_mode(self, mode: str) -> list:
        return [r for r in self.records if r.mode == mode]

    def success_rate(self, mode: str) -> float:
        rs = self.by_mode(mode)
        return sum(r.success for r in rs) / len(rs) if rs else float("nan")

    def gmd_statistic(self, mode: str = "randomized") -> np.ndarray:
        """2e + s per trial."""
        return np.array([2 * r.outer_errors + r.erasures for r in self.by_mode(mode)], dtype=float)

    def mean_upper_confidence(self, mode: str = "randomized", z: float = 2.326) -> tuple[float, float]:
        """Sample mean of 2e + s and a one-sided upper confidence bound (normal approximation)."""
        x = self.gmd_statistic(mode)
        mean = float(x.mean())
        return mean, mean + z * float(x.std(ddof=1)) / math.sqrt(len(x))

    def to_text(self, header_lines=()) -> str:
        out = io.StringIO()
        for line in header_lines:
            out.write(f"# {line}\n")
        out.write("seed,noise_weight,mode,erasures,outer_errors,success\n")
        for r in self.records:
            out.write(r.line() + "\n")
        for mode in sorted({r.mode for r in self.records}):
            out.write(f"# summary mode={mode} trials={len(self.by_mode(mode))} "
                      f"success_rate={self.success_rate(mode):.6f}")
            if mode != "natural":
                mean, upper = self.mean_upper_confidence(mode) if len(self.by_mode(mode)) > 1 else (float("nan"),) * 2
                out.write(f" mean_2e_plus_s={mean:.6f} upper99={upper:.6f} d_out={self.d_out}")
            out.write("\n")
        return out.getvalue()


def gmd_experiment(code: ConcatCode, trials: int, seed: int, max_weight: int | None = None,
                   modes=("randomized", "sweep", "natural")) -> ExperimentReport:
    """Random messages with chunk-concentrated noise of weight ``max_weight``.

    ``max_weight`` defaults to the largest weight below d_out d_in / 2, the edge
    of the region where GMD decoding is guaranteed.  Trial t uses PRNG seed ``seed + t`` for the message, the noise and the
    randomized erasures; every mode sees the same received word.
    """
    if max_weight is None:
        max_weight = math.ceil(code.correction_radius) - 1
    report = ExperimentReport(d_out=code.d_out)
    for t in range(trials):
        trial_seed = seed + t
        rng = np.random.default_rng(trial_seed)
        message = rng.integers(0, 2, size=code.message_bits)
        X = concat_encode(code, message)
        Z = chunked_noise(code, max_weight, rng)
        Y = transmit(code.instance, X, Z)
        truth = outer_symbols(code, message)
        weight = int(Z.sum())
        for mode in modes:
            if mode == "natural":
                res = natural_decode(code, Y, truth)
            else:
                res = gmd_decode(code, Y, trial_seed, mode, truth)
            ok = res.success and np.array_equal(res.message, message)
            report.add(TrialRecord(trial_seed, weight, mode, res.erasures, res.outer_errors, ok))
    return report


def concat_codebook(code: ConcatCode) -> Codebook:
    """Every codeword of the concatenated code, for exhaustive distance checks."""
    total = 1 << code.message_bits
    if total > 1 << 16:
        raise ValueError("too many codewords to list")
    words = []
    for v in range(total):
        bits = (v >> np.arange(code.message_bits)) & 1
        words.append(concat_encode_columns(code, bits))
    return Codebook(np.array(words), code.Cm, code.n, code.d_out * code.d_in, "concatenated", code.seed)

