"""Builders for the bundled benchmark instances.

All of them have g(x_base) = 0 and a stationary base point by
construction; coefficients are exact IEEE doubles.
"""

from __future__ import annotations

import numpy as np

from .model import parse_instance
from .poly import Polynomial, quadratic


def degenerate_quadratic(seed=1):
    """Three-variable instance with a rank-deficient constraint Jacobian.

    The multiplier set is the unbounded set {(a, b, 1) : a <= -sqrt(b^2+1)};
    the critical cone equals the kernel plane R^2 x {0}.  The instance is a
    stress test for the in-kernel machinery: the single-multiplier
    sufficient test fails at lam = (-4/sqrt(15), 1/sqrt(15), 1), and the
    quadruple strata carry a genuine negative-curvature certificate at
    v = +/-(-2, 1, 0)/sqrt(5).
    """
    s15 = np.sqrt(15.0)
    c = (7.0 - s15) / s15
    f = quadratic(3, Q=np.array([[1.5, c / 4, 0], [c / 4, c / 2, 0], [0, 0, 0]]),
                  lin=[0.0, 0.0, -1.0])
    g_axis = quadratic(3, Q=np.array([[1.0, 0.5, 0], [0.5, 1.0, 0], [0, 0, 0]]))
    g_r1 = quadratic(3, Q=np.array([[0.25, 0.25, 0], [0.25, 0.5, 0], [0, 0, 0]]))
    g_r2 = quadratic(3, Q=np.array([[0.5, 0.25, 0], [0.25, 0.5, 0], [0, 0, 0]]),
                     lin=[0.0, 0.0, 1.0])
    return parse_instance({
        "n": 3, "m": 2, "x_base": [0.0, 0.0, 0.0],
        "sigma": float(2.0 * np.sqrt(2.0) / np.sqrt(3.0)),
        "f": f.to_dict(),
        "g": [g_axis.to_dict(), g_r1.to_dict(), g_r2.to_dict()],
        "seed": seed,
    })


def identity_cone(f_Q=None, f_lin=(1.0, -1.0, 0.0), sigma=1.0, seed=2):
    """g = identity on R^3 (the constraint set is the cone itself); the
    default objective 1/2||x||^2 + (1,-1,0).x is tilt-stable with exact
    bound 1."""
    f_Q = np.eye(3) if f_Q is None else np.asarray(f_Q, dtype=float)
    f = quadratic(3, Q=f_Q, lin=list(f_lin))
    g = [quadratic(3, lin=list(e)) for e in np.eye(3)]
    return parse_instance({
        "n": 3, "m": 2, "x_base": [0.0, 0.0, 0.0], "sigma": float(sigma),
        "f": f.to_dict(), "g": [p.to_dict() for p in g], "seed": seed,
    })


def negative_curvature(seed=3):
    """Out-of-kernel instance failing the necessary condition:
    f = x1^2/2 - x2^2 + x1 - x2 over the cone."""
    return identity_cone(f_Q=np.diag([1.0, -2.0, 0.0]), seed=seed)


def inkernel_negative(seed=4):
    """In-kernel instance with negative objective curvature along the
    kernel plane (chi_1 < 0): the degenerate constraints with
    f = -x1^2 - x2^2/2 - x3."""
    base = degenerate_quadratic(seed=seed)
    f = quadratic(3, Q=np.diag([-2.0, -1.0, 0.0]), lin=[0.0, 0.0, -1.0])
    doc = base.to_dict()
    doc["f"] = f.to_dict()
    doc["seed"] = seed
    return parse_instance(doc)


def trivial_stable(seed=5):
    """Interior-polar gradient: the critical cone is {0}, every chi is
    vacuously +inf, and the stability bound degenerates to 0."""
    f = quadratic(3, Q=np.eye(3), lin=[1.0, -0.2, 0.0])
    g = [quadratic(3, lin=list(e)) for e in np.eye(3)]
    return parse_instance({
        "n": 3, "m": 2, "x_base": [0.0, 0.0, 0.0], "sigma": 1.0,
        "f": f.to_dict(), "g": [p.to_dict() for p in g], "seed": seed,
    })


def squared_infeasible(seed=6):
    """One-variable system g = (-x^2, 0): the constraint set is {0} while
    the cone distance shrinks quadratically, so no subregularity modulus
    works at 0."""
    f = quadratic(1, Q=[[2.0]])
    g_axis = Polynomial.from_terms([(-1.0, (2,))], 1)
    g_r = Polynomial.zero(1)
    return parse_instance({
        "n": 1, "m": 1, "x_base": [0.0], "sigma": 1.0,
        "f": f.to_dict(), "g": [g_axis.to_dict(), g_r.to_dict()],
        "seed": seed,
    })


BUILDERS = {
    "degenerate": degenerate_quadratic,
    "identity_cone": identity_cone,
    "negative_curvature": negative_curvature,
    "inkernel_negative": inkernel_negative,
    "trivial_stable": trivial_stable,
    "squared_infeasible": squared_infeasible,
}
