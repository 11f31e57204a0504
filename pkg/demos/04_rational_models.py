"""
Rational models
===============

Free graded-commutative algebras, truncated above a degree cap.
"""

# %%
from deligne_lab import parse_cdga, sullivan_sphere, twisted_cohomology, verify_cs_homotopy, verify_gauge

for n in (2, 3, 4):
    A = sullivan_sphere(n)
    print(A.name, A.cohomology_dims(), "twisted by 0:", twisted_cohomology(A, "0"))

# %%
# a nonzero twist on the 3-sphere model kills everything rationally
for h in (1, 2, 7):
    print(f"d + {h}x:", twisted_cohomology(sullivan_sphere(3), f"{h}*x"))

# %%
F = parse_cdga("""
name: BH
generators: b:2, h:3
cap: 13
d(b) = h
""")
rep = verify_gauge(F, "h", "b")
print("e^b intertwines d_h with d:", rep.chain_map_ok, "| identities hold:", rep.passed)
cs = verify_cs_homotopy(F, "h")
print("CS(h) =", F.element_str(cs.cs), "| homotopy identity:", cs.passed)
