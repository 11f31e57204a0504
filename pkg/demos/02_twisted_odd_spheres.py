"""
Twisting an odd sphere
======================

A degree-3 twist h times the generator on S^3 leaves only Z/h, in odd degree.
"""

# %%
from deligne_lab import (
    Cochain,
    Twist,
    assemble_abutment,
    build_sphere,
    class_order,
    integral_ahss,
    module_action,
    page_table,
    top_generator,
    twisted_complex,
    twisted_periodic_cohomology,
)
from deligne_lab.twisted import _periodic_vector

S3 = build_sphere(3)
for h in (1, 2, 3, 5):
    ev, odd = twisted_periodic_cohomology(S3, Twist.integral(top_generator(S3, 3, h)))
    print(f"h={h}: ev {ev}, odd {odd}")

# %%
# the same answer from the spectral sequence, page by page
tw = Twist.integral(top_generator(S3, 3, 6))
E2, E4, report = integral_ahss(S3, tw)
print("\n".join(page_table(E2)))
print("\n".join(page_table(E4)))
print("odd abutment:", assemble_abutment(E4, "odd"))

# %%
# untwisted classes act; multiplying the torsion generator by 2 halves its order
C = twisted_complex(S3, tw)
g = {3: top_generator(S3, 3, 1)}
for k in (1, 2, 3):
    x = module_action(C, g, {0: Cochain.constant(S3, k)})
    print(f"{k} * g has order", class_order(C, 1, _periodic_vector(C, 1, x)))
