"""Command-line harness: ``tmcodes {bounds, construct, simulate, concat}``.

Parameters come from flags or from a ``--config`` file of ``key=value`` lines
(flags win).  Every output starts with ``#`` lines recording the toolkit
version and the resolved configuration, so identical configs give identical
files.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import gf, pack_columns
from .bounds import sweep_bounds
from .concat import build_concat_code, gmd_experiment
from .gvcodes import (
    AmbiguousDecoding,
    ConstructionFailed,
    certified_family,
    certify_codebook,
    gv_construct_coherent,
    gv_construct_noncoherent,
    linear_gv_construct,
    load_codebook,
    md_decode_batch,
    save_codebook,
)
from .network import (
    NOISE_STRATEGIES,
    CapExceeded,
    NoCertifiedCode,
    TopologyError,
    adversarial_noise,
    enumerate_noise_supports,
    load_topology,
    noise_budget,
    random_certified_instance,
    transmit,
)

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_CAP_EXCEEDED = 3
EXIT_GUARANTEE_VIOLATION = 4
EXIT_DECODE_FAILURE = 5

CERTIFY_MAX_CODEWORDS = 20_000


class ConfigError(ValueError):
    pass


class GuaranteeViolation(RuntimeError):
    pass


class DecodeFailure(RuntimeError):
    pass


# option tables: name -> (type, default, help) ------------------------------

COMMON = {
    "config": (str, None, "key=value file; flags override it"),
    "output": (str, None, "output path (default: stdout)"),
}

OPTIONS = {
    "bounds": {
        "C": (int, None, "mincut"),
        "E": (int, None, "number of edges"),
        "m": (int, None, "field extension degree"),
        "n": (int, None, "block length for finite-n bounds (omit for asymptotic)"),
        "p-min": (float, 0.0, "first grid point"),
        "p-max": (float, 0.25, "last grid point"),
        "steps": (int, 100, "number of grid points"),
        "classical": (bool, False, "shorthand for C=E=m=1"),
    },
    "construct": {
        "topology": (str, None, "topology file"),
        "m": (int, None, "field extension degree"),
        "n": (int, None, "block length"),
        "p": (float, None, "noise fraction; budget is floor(p E m n)"),
        "construction": (str, "coherent", "coherent | noncoherent | linear"),
        "seed": (int, 0, "construction seed"),
        "code-seed": (int, 0, "first seed tried for the random network code"),
        "epsilon": (float, 0.1, "rate slack for the linear construction"),
        "attempts": (int, 100, "generator draws for the linear construction"),
        "linear-check": (str, "pairwise", "linear acceptance test: pairwise (codeword differences) | zero (distance from zero only)"),
        "sampling": (int, None, "sample this many channels when the family is too large"),
    },
    "simulate": {
        "codebook": (str, None, "codebook file written by construct"),
        "topology": (str, None, "topology file (defaults to the one recorded in the codebook)"),
        "noise": (str, "exhaustive", "exhaustive | random | adversarial"),
        "strategy": (str, "greedy", "adversarial strategy: " + " | ".join(NOISE_STRATEGIES)),
        "trials": (int, 100, "trials for random/adversarial noise"),
        "seed": (int, 0, "noise seed"),
    },
    "concat": {
        "topology": (str, None, "topology file"),
        "m": (int, None, "field extension degree"),
        "b": (int, None, "inner block width"),
        "d-in": (int, None, "inner minimum transform distance"),
        "K-out": (int, None, "outer RS dimension"),
        "N-out": (int, None, "outer RS length (default: outer field order)"),
        "trials": (int, 1000, "number of trials"),
        "seed": (int, 0, "experiment seed"),
        "code-seed": (int, 0, "first seed tried for the random network code"),
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmcodes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tmcodes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in OPTIONS.items():
        sp = sub.add_parser(name)
        for key, (typ, _, help_) in {**COMMON, **options}.items():
            flag = f"--{key}"
            if typ is bool:
                sp.add_argument(flag, action="store_true", default=None, help=help_)
            else:
                sp.add_argument(flag, type=typ, default=None, help=help_)
    return parser


def read_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def _cast(typ, key, value):
    if typ is bool:
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    try:
        return typ(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {typ.__name__}") from None


def resolve(args) -> dict:
    """Merge flags over config-file values over defaults."""
    options = OPTIONS[args.command]
    config = read_config(args.config) if args.config else {}
    unknown = set(config) - set(options) - {"output"}
    if unknown:
        raise ConfigError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    cfg = {}
    for key, (typ, default, _) in {**options, "output": COMMON["output"]}.items():
        flag_value = getattr(args, key.replace("-", "_"))
        if flag_value is not None:
            cfg[key] = flag_value
        elif key in config:
            cfg[key] = _cast(typ, key, config[key])
        else:
            cfg[key] = default
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required parameter(s): " + ", ".join(f"--{k}" for k in missing))


def header_lines(command: str, cfg: dict) -> list[str]:
    lines = [f"tmcodes {__version__}", f"command={command}"]
    lines += [f"config.{k}={cfg[k]}" for k in sorted(cfg) if k != "output"]
    return lines


def _emit(cfg, text: str):
    if cfg.get("output"):
        Path(cfg["output"]).write_text(text)
    else:
        sys.stdout.write(text)


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _instance(cfg):
    topology = load_topology(cfg["topology"])
    inst, used = random_certified_instance(topology, gf(cfg["m"]), cfg["code-seed"])
    return topology, inst, used


# subcommands -----------------------------------------------------------------


def cmd_bounds(cfg) -> int:
    if cfg["classical"]:
        for key in ("C", "E", "m"):
            if cfg[key] not in (None, 1):
                raise ConfigError("--classical fixes C=E=m=1")
            cfg[key] = 1
    _require(cfg, "C", "E", "m")
    if cfg["steps"] < 1:
        raise ConfigError("--steps must be positive")
    if not 0 <= cfg["p-min"] <= cfg["p-max"] < 0.5:
        raise ConfigError("need 0 <= p-min <= p-max < 1/2")
    if not 1 <= cfg["C"] <= cfg["E"] or cfg["m"] < 1:
        raise ConfigError("need 1 <= C <= E and m >= 1")
    grid = np.linspace(cfg["p-min"], cfg["p-max"], cfg["steps"])
    curve = sweep_bounds(cfg["C"], cfg["E"], cfg["m"], grid, cfg["n"])
    _emit(cfg, curve.to_csv(header_lines("bounds", cfg)))
    return EXIT_OK


def cmd_construct(cfg) -> int:
    _require(cfg, "topology", "m", "n", "p", "output")
    kind = cfg["construction"]
    if kind not in ("coherent", "noncoherent", "linear"):
        raise ConfigError(f"unknown construction {kind!r}")
    topology, inst, used = _instance(cfg)
    ctx = gf(cfg["m"])
    family = [inst]
    exhaustive = True
    if kind == "coherent":
        book = gv_construct_coherent(inst, cfg["p"], cfg["n"], cfg["seed"])
    elif kind == "noncoherent":
        family, exhaustive = certified_family(ctx, inst.C, inst.E, cfg["sampling"], cfg["seed"])
        book = gv_construct_noncoherent(family, cfg["p"], cfg["n"], cfg["seed"])
    else:
        if cfg["linear-check"] not in ("pairwise", "zero"):
            raise ConfigError(f"unknown linear check {cfg['linear-check']!r}")
        code = linear_gv_construct(inst, cfg["p"], cfg["n"], cfg["epsilon"], cfg["seed"], cfg["attempts"],
                                   pairwise=cfg["linear-check"] == "pairwise")
        book = code.codebook()
        book.params.update({"C": inst.C, "E": inst.E, "m": inst.m, "n": cfg["n"], "p": cfg["p"],
                            "attempts_used": code.attempts})
    design = book.min_distance_certificate
    lines = header_lines("construct", cfg)
    lines.append(f"network_code_seed={used}")
    lines.append(f"family_size={len(family)} exhaustive_family={exhaustive}")
    lines.append(f"codebook_size={len(book)} design_distance={design}")
    status = EXIT_OK
    if len(book) <= CERTIFY_MAX_CODEWORDS:
        measured = certify_codebook(book, family)
        lines.append(f"certified_min_distance={measured}")
        if measured < design:
            lines.append("CERTIFICATION FAILED")
            status = EXIT_GUARANTEE_VIOLATION
    else:
        lines.append("certification skipped (codebook too large)")
    extra = {"topology": cfg["topology"], "topology_sha": _file_digest(cfg["topology"]),
             "network_code_seed": used, "family_exhaustive": exhaustive,
             "family_sampling": cfg["sampling"], "version": __version__}
    save_codebook(book, cfg["output"], extra)
    sys.stdout.write("".join(f"# {line}\n" for line in lines))
    return status


def cmd_simulate(cfg) -> int:
    _require(cfg, "codebook")
    book, header = load_codebook(cfg["codebook"])
    topo_path = cfg["topology"] or header.get("topology")
    if topo_path is None:
        raise ConfigError("no topology given and none recorded in the codebook")
    m = book.params.get("m")
    run_cfg = {"topology": topo_path, "m": m, "code-seed": header["network_code_seed"]}
    topology, inst, _ = _instance(run_cfg)
    family = [inst]
    if book.construction == "noncoherent-greedy":
        family, _ = certified_family(gf(m), inst.C, inst.E, header.get("family_sampling"), book.seed)
    budget = book.params["budget"] if "budget" in book.params else noise_budget(
        book.params["p"], inst.E, m, book.n)
    Em, n = inst.E * m, book.n
    rng = np.random.default_rng(cfg["seed"])
    W = book.transformed_columns(inst)
    hat = pack_columns(inst.T_hat)

    trials = failures = ambiguities = 0
    if cfg["noise"] == "exhaustive":
        supports = list(enumerate_noise_supports(budget, Em, n))
        noise = np.zeros((len(supports), n), dtype=np.int64)
        for i, sup in enumerate(supports):
            for flat in sup:
                noise[i, flat % n] ^= hat[flat // n]
        for j in range(len(book)):
            idx, _, ties = md_decode_batch(book, family, W[j][None, :] ^ noise)
            trials += len(noise)
            failures += int(np.count_nonzero((idx != j) & ~ties))
            ambiguities += int(np.count_nonzero(ties))
    elif cfg["noise"] in ("random", "adversarial"):
        for t in range(cfg["trials"]):
            j = int(rng.integers(len(book)))
            if cfg["noise"] == "random":
                Z = np.zeros(Em * n, dtype=np.uint8)
                Z[rng.choice(Em * n, size=budget, replace=False)] = 1
                Z = Z.reshape(Em, n)
            else:
                Z = adversarial_noise(inst, book, cfg["strategy"], int(rng.integers(2**63)), budget, sent=j).Z
            Y = transmit(inst, book.matrix(j), Z)
            idx, _, ties = md_decode_batch(book, family, pack_columns(Y)[None, :])
            trials += 1
            ambiguities += int(ties[0])
            failures += int(idx[0] != j and not ties[0])
    else:
        raise ConfigError(f"unknown noise mode {cfg['noise']!r}")

    lines = header_lines("simulate", cfg)
    lines += [f"budget={budget}", f"codebook_size={len(book)}", f"family_size={len(family)}"]
    text = "".join(f"# {line}\n" for line in lines)
    text += "trials,successes,failures,ambiguities\n"
    text += f"{trials},{trials - failures - ambiguities},{failures},{ambiguities}\n"
    _emit(cfg, text)
    if failures or ambiguities:
        if cfg["noise"] == "exhaustive":
            raise GuaranteeViolation(f"{failures} failures and {ambiguities} ambiguities within the decoding radius")
        raise DecodeFailure(f"{failures} failures and {ambiguities} ambiguities")
    return EXIT_OK


def cmd_concat(cfg) -> int:
    _require(cfg, "topology", "m", "b", "d-in", "K-out")
    _, inst, used = _instance(cfg)
    code = build_concat_code(inst, cfg["b"], cfg["d-in"], cfg["K-out"], cfg["code-seed"], cfg["N-out"])
    report = gmd_experiment(code, cfg["trials"], cfg["seed"])
    mean, upper = report.mean_upper_confidence("randomized") if cfg["trials"] > 1 else (math.nan,) * 2
    lines = header_lines("concat", cfg) + [
        f"network_code_seed={used}",
        f"inner_size={len(code.inner)} k_in={code.k_in} d_in={code.d_in}",
        f"outer N={code.N_out} K={code.K_out} d_out={code.d_out} rate={code.rate:.6f}",
    ]
    _emit(cfg, report.to_text(lines))
    if report.success_rate("sweep") < 1.0:
        raise DecodeFailure("sweep GMD failed on some received word")
    if not upper < code.d_out:
        raise GuaranteeViolation(f"mean(2e+s)={mean:.4f} (upper99 {upper:.4f}) is not below d_out={code.d_out}")
    return EXIT_OK


COMMANDS = {"bounds": cmd_bounds, "construct": cmd_construct, "simulate": cmd_simulate, "concat": cmd_concat}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, TopologyError, NoCertifiedCode, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"tmcodes: error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except CapExceeded as exc:
        print(f"tmcodes: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP_EXCEEDED
    except (GuaranteeViolation, ConstructionFailed) as exc:
        print(f"tmcodes: guarantee violated: {exc}", file=sys.stderr)
        return EXIT_GUARANTEE_VIOLATION
    except (DecodeFailure, AmbiguousDecoding) as exc:
        print(f"tmcodes: decode failure: {exc}", file=sys.stderr)
        return EXIT_DECODE_FAILURE


if __name__ == "__main__":
    sys.exit(main())
