"""Greedy codes that survive a worst-case noise budget.

Constructs coherent and non-coherent greedy codes on the relay network,
certifies their minimum distance, then lets an adversary try to confuse
the decoder.
"""

import numpy as np

from tmcodes.algebra import gf
from tmcodes.gvcodes import (
    certified_family,
    certify_codebook,
    gv_construct_coherent,
    gv_construct_noncoherent,
    linear_gv_construct,
    md_decode,
)
from tmcodes.network import adversarial_noise, make_topology, random_certified_instance, transmit

topology = make_topology([("s", "a"), ("s", "a"), ("a", "t"), ("a", "t")], "s", "t")
instance, _ = random_certified_instance(topology, gf(2), 0)
n, p = 3, 2 / 24  # budget floor(p E m n) = 2 flips

book = gv_construct_coherent(instance, p, n, seed=0)
print(f"coherent: {len(book)} codewords of 2^{instance.C * instance.m * n}, "
      f"design distance {book.min_distance_certificate}, measured {certify_codebook(book, instance)}")

rng = np.random.default_rng(0)
for strategy in ("concentrated", "spread", "greedy"):
    wins = 0
    for _ in range(50):
        j = int(rng.integers(len(book)))
        Z = adversarial_noise(instance, book, strategy, int(rng.integers(1 << 30)), budget=2, sent=j)
        wins += md_decode(book, instance, transmit(instance, book.matrix(j), Z), strict=False) != j
    print(f"  adversary '{strategy}': {wins}/50 decoding errors")

# without knowing the channel, the code has to work for every certified T_hat
family, exhaustive = certified_family(gf(2), 1, 2)
nc = gv_construct_noncoherent(family, 1 / 12, 3, seed=0)
print(f"non-coherent over {len(family)} channels (exhaustive={exhaustive}): "
      f"{len(nc)} codewords, worst-case distance {certify_codebook(nc, family)}")

linear = linear_gv_construct(instance, 1 / 96, 12, epsilon=0.3745, seed=0)
print(f"linear: k={linear.k}, accepted after {linear.attempts} draw(s), rate "
      f"{(linear.k - linear.C) / 12:.3f}")
