"""
Which degrees can m products reach?
===================================

Each reduction switches off the last free entry of one row.  A structure
with r reductions has m^2 - r free parameters after normalization, so it can
only hit every polynomial of degree d if d + 1 <= m^2 - r.  This script
prints the resulting chart as text; the CSV behind it comes from
``polyscheme catalog``.
"""
from polyscheme.catalog import chart_data, max_admissible_degree

records = chart_data(7, 7, m_min=3)
for m in range(3, 8):
    print(f"m={m}")
    for r in range(8):
        row = [c for c in records if c.m == m and c.r == r]
        print(f"  r={r}: " + " ".join(f"{c.degree}{'' if c.admissible else '*'}" for c in row))
print("(* = more coefficients than free parameters)")

for m in range(3, 8):
    best, witnesses = max_admissible_degree(m)
    print(f"m={m}: highest admissible degree {best}, e.g. zeros at {witnesses[0].pattern.pattern_id or '(none)'} (r={witnesses[0].r})")
