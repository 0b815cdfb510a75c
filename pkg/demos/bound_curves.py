"""Rate bounds as a function of the noise fraction p.

Prints a coarse table for two network settings and, if matplotlib is
installed, saves one figure per setting next to this script.
"""

from pathlib import Path

import numpy as np

from tmcodes.bounds import CSV_COLUMNS, inv_entropy, sweep_bounds

SETTINGS = [(4, 8, 2), (2, 9, 3)]

for C, E, m in SETTINGS:
    grid = np.linspace(0, 0.2, 201)
    curve = sweep_bounds(C, E, m, grid)
    print(f"\nC={C} E={E} m={m}; GV rate reaches 0 at p={inv_entropy(C / E) / 2:.5f}")
    print("  ".join(f"{c:>15}" for c in CSV_COLUMNS))
    for i in range(0, grid.size, 25):
        print("  ".join(f"{curve.rates[c][i] if c != 'p' else grid[i]:15.4f}" for c in CSV_COLUMNS))

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        continue
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in CSV_COLUMNS[1:]:
        ax.plot(grid, curve.rates[name], label=name)
    ax.set_xlabel("p")
    ax.set_ylabel("rate")
    ax.set_title(f"C={C}, E={E}, m={m}")
    ax.legend(fontsize=7)
    out = Path(__file__).with_name(f"bounds_C{C}_E{E}_m{m}.png")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    print("saved", out)
