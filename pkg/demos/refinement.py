"""Implicit solver against the exact Barenblatt profile (n=1, p=1.5, unit mass).

Halving dr and dt together should roughly halve the max-norm error.
"""
import numpy as np

from supercaloric import Medium, RadialGrid, SingularBarenblatt, normalize_mass, sample, solve, traces_from

medium = Medium(1, 1.5)
exact = SingularBarenblatt(medium, c=normalize_mass(medium))

prev = None
for J, K in [(40, 20), (80, 40), (160, 80), (320, 160)]:
    grid = RadialGrid.uniform(1, 0.0, 4.0, J)
    times = np.linspace(0.5, 1.0, K + 1)
    initial, outer, _ = traces_from(exact, grid, times)
    u = solve(medium, grid, times, initial, outer)
    err = np.max(np.abs(u.values - sample(exact, grid, times).values))
    order = "" if prev is None else f"  order {np.log2(prev / err):.3f}"
    print(f"J={J:4d} K={K:4d}  max error {err:.3e}{order}")
    prev = err
