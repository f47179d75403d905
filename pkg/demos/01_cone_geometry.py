"""Tour of the Lorentz-cone geometry primitives.

Run:  python demos/01_cone_geometry.py
"""

import numpy as np

from socptilt import cone

q_in = np.array([2.0, 1.0, 0.5])
q_out = np.array([0.5, 1.0, 1.0])
print("membership:")
print(f"  {q_in} in cone:  {cone.cone_contains(q_in)}")
print(f"  {q_out} in cone: {cone.cone_contains(q_out)}")
print(f"  classification of {q_out}: {cone.classify(q_out).value}")

print("\nprojection (and the obtuseness identity <p - Pp, Pp> = 0):")
for p in (q_out, np.array([-2.0, 1.0, 0.0]), np.array([0.0, 1.0, 0.0])):
    proj = cone.project_onto_cone(p)
    print(f"  P{np.round(p, 4)} = {np.round(proj, 6)}   "
          f"<p-Pp, Pp> = {float((p - proj) @ proj):.2e}")

print("\nthe reflection hat(q) = (-q0, q_r) maps the cone onto its polar:")
q = np.array([1.0, 0.6, 0.8])
print(f"  q = {q} in cone: {cone.cone_contains(q, 1e-12)}; "
      f"hat(q) in polar: {cone.dual_contains(cone.hat(q), 1e-12)}")

print("\ntangent and normal cones at a boundary point:")
q = np.array([1.0, 1.0, 0.0])
u_tan = np.array([0.0, 0.0, 1.0])
u_out = np.array([-1.0, 1.0, 0.0])
print(f"  residual of {u_tan}: {cone.tangent_cone_residual(q, u_tan):+.3f} "
      "(member iff <= 0)")
print(f"  residual of {u_out}: {cone.tangent_cone_residual(q, u_out):+.3f}")
nd = cone.normal_cone_description(q)
print(f"  normal cone kind: {nd.kind.value}, ray generator {nd.generator}")
