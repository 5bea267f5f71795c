"""Barenblatt class versus the complementary class on the two canonical examples.

Both sources are extended by zero to negative times (n=2, p=1.5).
"""
from supercaloric import (
    Cylinder,
    InfinitePointSource,
    Medium,
    SingularBarenblatt,
    classify,
    exponent_scan,
    exponent_table,
    normalize_mass,
)

medium = Medium(2, 1.5)
table = exponent_table(medium)
sbb = SingularBarenblatt(medium, zero_extended=True, c=normalize_mass(medium))
ips = InfinitePointSource(medium, zero_extended=True)

print("exponents:", {k: round(v, 6) for k, v in table.as_dict().items() if isinstance(v, float)})

unit = Cylinder(0.0, 1.0, 0.0, 1.0)
around = Cylinder(0.0, 1.0, -1.0, 1.0)
for label, src, cyl, sel, target in [
    ("point source, u", ips, unit, "value", table.s_critical),
    ("point source, |grad u|", ips, unit, "gradient", 0.5),
    ("Barenblatt, u", sbb, around, "value", table.q_barenblatt),
]:
    res = exponent_scan(src, cyl, sel, 0.1, 2.0)
    print(f"{label:24s} q* = {res.q_star:.4f}   (exact {target:.4f})")

for label, src in [("Barenblatt", sbb), ("point source", ips)]:
    rep = classify(src)
    print(f"{label:13s} -> {rep.verdict.value}  votes {rep.evidence['votes']}")
