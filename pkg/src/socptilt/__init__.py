"""socptilt: tilt-stability verification for second-order cone programs.

Decides tilt stability of a stationary point from pointbased second-order
conditions, estimates the exact stability bound, and cross-checks the
verdict with an empirical tilted-minimization harness and sampling
falsifiers.
"""

__version__ = "0.1.0"

from . import cone, poly  # noqa: F401
from .analyzer import (AnalysisVerdict, analyze, chi1, chi2_chi3,  # noqa: F401
                       classify_case, in_kernel_verdict, out_kernel_check,
                       simplified_check, z_search)
from .harness import (empirical_tilt, mscq_falsify,  # noqa: F401
                      neighborhood_falsify, solve_tilted)
from .model import (ProblemInstance, Tolerances, load_instance,  # noqa: F401
                    parse_instance, save_instance)
from .secondorder import (critical_cone, curvature_H,  # noqa: F401
                          directional_multipliers, lambda0_set, lambda_bar,
                          rho, two_regular)
