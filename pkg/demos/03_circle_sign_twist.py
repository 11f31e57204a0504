"""
A sign local system on a hexagon
================================
"""

# %%
from deligne_lab import SignCocycle, circle, twisted_sign_cohomology

H = circle(6)
flat = SignCocycle(H)
moebius = SignCocycle(H, {(0, 1): -1})
print("trivial signs:", [str(g) for g in twisted_sign_cohomology(H, flat)])
print("one flipped edge:", [str(g) for g in twisted_sign_cohomology(H, moebius)])

# %%
# flipping the signs around a vertex is a gauge change and changes nothing
gauged = moebius.gauge([-1, 1, 1, 1, 1, 1])
print("after gauge:", [str(g) for g in twisted_sign_cohomology(H, gauged)], "defect", moebius.defect())
