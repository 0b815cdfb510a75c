"""How bit flips inside the network look at the receiver.

Builds a random network code on a two-hop relay, shows the transfer
matrices, and compares the transform distance of a noisy reception with
the number of bits that were actually flipped.
"""

import numpy as np

from tmcodes.algebra import gf
from tmcodes.metric import transform_distance
from tmcodes.network import make_topology, random_certified_instance, transmit

topology = make_topology([("s", "a"), ("s", "a"), ("a", "t"), ("a", "t")], "s", "t")
instance, seed = random_certified_instance(topology, gf(2), 0)
print(f"relay network: C={instance.C} E={instance.E} m={instance.m}, code seed {seed}")
print("T (source to sink, binary form):")
print(instance.T)
print("T_hat (every edge to sink, binary form):")
print(instance.T_hat)

table = instance.table
print("coset-leader weights by syndrome:", table.weights.tolist())
print("covering radius:", table.covering_radius)

rng = np.random.default_rng(1)
n = 5
X = rng.integers(0, 2, size=(instance.C * instance.m, n), dtype=np.uint8)
clean = transmit(instance, X, np.zeros((instance.E * instance.m, n), dtype=np.uint8))
for flips in (1, 2, 4, 8):
    Z = np.zeros(instance.E * instance.m * n, dtype=np.uint8)
    Z[rng.choice(Z.size, size=flips, replace=False)] = 1
    Y = transmit(instance, X, Z.reshape(-1, n))
    print(f"{flips} random flips -> transform distance {transform_distance(table, clean, Y)}")

# the distance never exceeds the flips, and saturates at n times the covering radius
Z = np.ones((instance.E * instance.m, n), dtype=np.uint8)
Y = transmit(instance, X, Z)
print(f"all {Z.size} bits flipped -> transform distance {transform_distance(table, clean, Y)}")
