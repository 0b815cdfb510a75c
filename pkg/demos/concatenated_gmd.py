"""Concatenated codes and generalized minimum distance decoding.

An inner greedy code protects short blocks, an outer Reed-Solomon code
protects the sequence of blocks.  Noise is packed into as few blocks as
possible, which is the hard case for naive decoding.
"""

from tmcodes.algebra import gf
from tmcodes.concat import build_concat_code, gmd_experiment
from tmcodes.network import make_topology, random_certified_instance

topology = make_topology([("s", "a"), ("s", "a"), ("a", "t"), ("a", "t")], "s", "t")
instance, _ = random_certified_instance(topology, gf(2), 0)
code = build_concat_code(instance, b=3, d_in=3, K_out=2, seed=0, N_out=6)
print(f"inner: {len(code.inner)} codewords -> {code.k_in} bits per block, d_in={code.d_in}")
print(f"outer: RS[{code.N_out}, {code.K_out}] over GF(2^{code.k_in}), d_out={code.d_out}")
print(f"overall rate {code.rate:.4f}, guaranteed radius below {code.correction_radius}")

report = gmd_experiment(code, 2000, seed=0)
for mode in ("natural", "randomized", "sweep"):
    print(f"{mode:>10}: success {report.success_rate(mode):.4f}")
mean, upper = report.mean_upper_confidence("randomized")
print(f"randomized erasures: mean(2e+s)={mean:.3f}, 99% upper {upper:.3f}, d_out={code.d_out}")
