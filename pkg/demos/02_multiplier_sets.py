"""Multiplier sets and directional multipliers on the bundled degenerate
instance.

The constraint Jacobian at the base point has rank one, so the multiplier
set is the unbounded slab {(a, b, 1) : a <= -sqrt(b^2 + 1)} and different
critical directions select different argmax multipliers.

Run:  python demos/02_multiplier_sets.py
"""

import numpy as np

from socptilt import conelp, secondorder
from socptilt.instances import degenerate_quadratic

inst = degenerate_quadratic()
sl = inst.multiplier_slice()
print("multiplier slice: offset", sl.offset, " null-space dim", sl.dim)

ok, lam = conelp.feasibility(sl)
print("one multiplier:", np.round(lam, 6))

print("\ndirectional multipliers (argmax of the constraint curvature form):")
for v in ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
          [np.sqrt(2) / 2, -np.sqrt(2) / 2, 0.0]):
    res = secondorder.directional_multipliers(inst, v)
    print(f"  v = {np.round(v, 4)}  ->  lam = {np.round(res.argmax, 8)}  "
          f"value = {res.value:+.6f}")

print("\nan unbounded objective direction is detected, not guessed:")
res = conelp.maximize_linear(sl, np.array([-1.0, 0.0, 0.0]), seed=0)
print("  status:", res.status, " recession direction:",
      None if res.direction is None else np.round(res.direction, 6))

print("\nthe infimum function separates directions that share a multiplier:")
lam_t = secondorder.directional_multipliers(inst, [1, 0, 0]).argmax
for v in ([1.0, 0.0, 0.0], [2 / np.sqrt(5), -1 / np.sqrt(5), 0.0]):
    r = secondorder.rho(inst, [0, 1, 0], lam_t, v)
    print(f"  rho((0,1,0), lam, {np.round(v, 4)}) = {r.value:.6f}")
