"""
Ordinary and differential cohomology of small spheres
=====================================================

Groups print as descriptors: Q^v + (Q/Z)^t + Z^l + finite factors.
"""

# %%
from deligne_lab import build_sphere, circle, cohomology, diff_cohomology, periodic_deligne_direct, periodic_deligne_split

for n in (1, 2, 3):
    K = circle(4) if n == 1 else build_sphere(n)
    print(K.name, [str(g) for g in cohomology(K)])

# %%
# one weight at a time; the vector parts count cochains on this triangulation
S2 = build_sphere(2)
for w in range(S2.dim + 2):
    print(f"weight {w}:", diff_cohomology(S2, w))

# %%
# the periodic groups two ways: one big complex, and a sum over weights
for par in ("ev", "odd"):
    direct, split = periodic_deligne_direct(S2, par), periodic_deligne_split(S2, par)
    print(par, direct, "| agrees with split:", direct == split)
