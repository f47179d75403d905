"""End-to-end verdicts on the bundled instances.

The out-of-kernel instance has the exact stability bound 1; the
negative-curvature variants fail the necessary conditions; the degenerate
instance is the interesting one: the single-multiplier simplified test is
useless there (its minimum is exactly 0 at one multiplier and negative at
others), and the quadruple strata reveal a genuine instability that a
naive tilt sweep cannot see.

Run:  python demos/03_verdicts.py
"""

import numpy as np

from socptilt import analyzer
from socptilt.instances import BUILDERS

for name in ("identity_cone", "negative_curvature", "trivial_stable",
             "inkernel_negative", "degenerate"):
    inst = BUILDERS[name]()
    v = analyzer.analyze(inst, budget=96)
    chi = {k: (None if not np.isfinite(c.value) else round(c.value, 6))
           for k, c in v.chi.items()}
    print(f"{name:20s} case={v.case:13s} verdict={v.verdict:16s} "
          f"bound={v.bound_estimate} chi={chi}")
    if v.simplified is not None and not v.simplified.passes:
        w = v.simplified.witnesses[0]
        print(f"{'':20s} simplified test fails: form {w['value']:+.3e} at "
              f"lam={np.round(w['lam'], 5)}, u={np.round(w['u'], 5)}")
    if v.witness is not None:
        print(f"{'':20s} violation witness ({v.witness['condition']}): "
              f"value {v.witness['value']:+.5f}")
