"""Measured Harnack constants along the Barenblatt scaling orbit, and the pointwise rate."""
from supercaloric import (
    InfinitePointSource,
    Medium,
    SingularBarenblatt,
    constant_sweep,
    l1_harnack_probe,
    normalize_mass,
    pointwise_rate_detect,
    self_similar_probes,
)

m2 = Medium(2, 1.5)
sbb = SingularBarenblatt(m2, c=normalize_mass(m2))
rep = constant_sweep(sbb, self_similar_probes(m2, r=0.25, s=1.0, scales=5))
for r, c in zip(rep.scales, rep.admissible_c1):
    print(f"weak Harnack  r={r:5.2f}  c1={c:.6f}")

m1 = Medium(1, 1.5)
sbb1 = SingularBarenblatt(m1, c=normalize_mass(m1))
for L in (1, 4, 16):
    out = l1_harnack_probe(sbb1, 0.0, L, 0.5 * L, L)
    print(f"L1 Harnack    L={L:3d}  c={out['admissible_c']:.5f}")

rate = pointwise_rate_detect(InfinitePointSource(m2, zero_extended=True), 0.0, 1.0, t0=0.0)
print("point source rate at (0, 1):", rate.rate_estimate, rate.verdict.value, "(exact 0.75)")
print("Barenblatt rate at (0.3, 1):", pointwise_rate_detect(sbb, 0.3, 1.0).verdict.value)
