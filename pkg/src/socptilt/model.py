"""Problem instances: polynomial objective f, polynomial constraint map
g : R^n -> R^(1+m) required to satisfy g(x_base) = 0, a stationary base
point, and a declared metric-subregularity modulus sigma.

Instances are immutable after parsing; all base-point derivatives are
precomputed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import conelp
from .errors import SchemaError, ValidationError
from .poly import MAX_DEGREE_DEFAULT, Polynomial


@dataclass(frozen=True)
class Tolerances:
    tol_zero: float = 1e-9
    tol_cone: float = 1e-9
    tol_rank: float = 1e-8
    margin_strict: float = 1e-7
    feas: float = 1e-7       # feasibility band for empirical minimizers
    probe: float = 1e-7      # positivity threshold of the out-of-kernel probe

    @classmethod
    def from_dict(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        bad = set(doc) - known
        if bad:
            raise SchemaError(f"unknown tolerance keys: {sorted(bad)}")
        return cls(**{k: float(v) for k, v in doc.items()})

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class DerivativeBundle:
    """Value, gradient/Jacobian, and Hessian(s) of f or g at a point."""

    value: np.ndarray | float
    gradient: np.ndarray          # (n,) for f, (1+m, n) for g
    hessian: np.ndarray           # (n, n) for f, (1+m, n, n) for g


def eval_derivatives(p, x):
    """Exact derivatives of one polynomial or a sequence of them."""
    if isinstance(p, Polynomial):
        return DerivativeBundle(value=p.value(x), gradient=p.gradient(x),
                                hessian=p.hessian(x))
    vals = np.array([q.value(x) for q in p])
    jac = np.array([q.gradient(x) for q in p])
    hess = np.array([q.hessian(x) for q in p])
    return DerivativeBundle(value=vals, gradient=jac, hessian=hess)


def second_order_action(g_bundle: DerivativeBundle, v, u):
    """Vector with components v.Hess_i.u (the bilinear second-order action)."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    H = g_bundle.hessian
    if H.ndim == 2:
        return float(v @ H @ u)
    return np.einsum("ijk,j,k->i", H, v, u)


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    m: int
    f: Polynomial
    g: tuple                  # 1+m polynomials, index 0 is the axis component
    x_base: np.ndarray
    sigma: float
    tol: Tolerances = field(default_factory=Tolerances)
    seed: int = 0

    # cached base-point data, filled in __post_init__
    grad_f_base: np.ndarray = field(default=None, repr=False)
    hess_f_base: np.ndarray = field(default=None, repr=False)
    J_base: np.ndarray = field(default=None, repr=False)
    g_hess_base: np.ndarray = field(default=None, repr=False)
    runtime_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x_base", np.asarray(self.x_base, dtype=float))
        object.__setattr__(self, "grad_f_base", self.f.gradient(self.x_base))
        object.__setattr__(self, "hess_f_base", self.f.hessian(self.x_base))
        object.__setattr__(self, "J_base",
                           np.array([p.gradient(self.x_base) for p in self.g]))
        object.__setattr__(self, "g_hess_base",
                           np.array([p.hessian(self.x_base) for p in self.g]))

    # -- evaluation at arbitrary points ------------------------------------
    def f_value(self, x):
        return self.f.value(x)

    def g_value(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return np.array([p.value(x) for p in self.g])
        return np.stack([p.value(x) for p in self.g], axis=-1)

    def g_jacobian(self, x):
        return np.array([p.gradient(x) for p in self.g])

    def g_bundle(self, x):
        return eval_derivatives(self.g, x)

    def hess_lag(self, lam, x=None):
        """Hessian of f + <lam, g> at x (base point by default)."""
        lam = np.asarray(lam, dtype=float)
        if x is None:
            return self.hess_f_base + np.einsum("i,ijk->jk", lam, self.g_hess_base)
        H = self.f.hessian(x)
        for li, p in zip(lam, self.g):
            if li:
                H = H + li * p.hessian(x)
        return H

    def second_order_g(self, v, u, x=None):
        """Vector of v.Hess g_i.u at x (base point by default)."""
        H = self.g_hess_base if x is None else np.array([p.hessian(x) for p in self.g])
        return np.einsum("ijk,j,k->i", H, np.asarray(v, float), np.asarray(u, float))

    def multiplier_slice(self):
        """The affine part of the multiplier set at the base point (memoized
        so solver-side caches accumulate across calls)."""
        if "slice" not in self.runtime_cache:
            self.runtime_cache["slice"] = conelp.build_slice(
                self.J_base, -self.grad_f_base, tol_rank=self.tol.tol_rank)
        return self.runtime_cache["slice"]

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "x_base": [float(v) for v in self.x_base],
            "sigma": self.sigma,
            "f": self.f.to_dict(),
            "g": [p.to_dict() for p in self.g],
            "tolerances": self.tol.to_dict(),
            "seed": self.seed,
        }

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def sha256(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def validate_stationarity(inst: ProblemInstance):
    """True iff the multiplier set at the base point is nonempty; also
    returns one feasible multiplier."""
    sl = inst.multiplier_slice()
    ok, lam = conelp.feasibility(sl)
    return (ok, lam)


def _require(cond, msg):
    if not cond:
        raise SchemaError(msg)


def parse_instance(doc, max_degree=MAX_DEGREE_DEFAULT):
    """Parse and validate an instance document (dict or JSON text).

    Raises SchemaError for malformed documents and ValidationError when
    g(x_base) != 0, sigma <= 0, or the base point is not stationary.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not valid JSON: {e}") from e
    _require(isinstance(doc, dict), "instance document must be a JSON object")
    for key in ("n", "m", "x_base", "sigma", "f", "g"):
        _require(key in doc, f"missing required field '{key}'")
    n = doc["n"]
    m = doc["m"]
    _require(isinstance(n, int) and n >= 1, "'n' must be a positive integer")
    _require(isinstance(m, int) and m >= 1,
             "'m' must be an integer >= 1 (the radial part may not be empty)")
    x_base = np.asarray(doc["x_base"], dtype=float)
    _require(x_base.shape == (n,), f"'x_base' must have length n={n}")
    try:
        f = Polynomial.from_dict(doc["f"], n)
        _require(isinstance(doc["g"], list) and len(doc["g"]) == 1 + m,
                 f"'g' must list 1+m = {1 + m} polynomials (index 0 is the axis)")
        g = tuple(Polynomial.from_dict(gi, n) for gi in doc["g"])
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"malformed polynomial: {e}") from e
    for p in (f,) + g:
        _require(p.degree <= max_degree,
                 f"polynomial degree {p.degree} exceeds the cap {max_degree}")
    tol = Tolerances.from_dict(doc.get("tolerances", {}))
    seed = doc.get("seed", 0)
    _require(isinstance(seed, int), "'seed' must be an integer")
    sigma = float(doc["sigma"])

    inst = ProblemInstance(n=n, m=m, f=f, g=g, x_base=x_base, sigma=sigma,
                           tol=tol, seed=seed)
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    gx = inst.g_value(x_base)
    if np.linalg.norm(gx) > tol.tol_zero * (1.0 + np.linalg.norm(x_base)):
        raise ValidationError(
            f"g(x_base) = {gx.tolist()} is not zero; the analysis is set up "
            "at constraint value zero")
    ok, _ = validate_stationarity(inst)
    if not ok:
        raise ValidationError("x_base is not stationary: the multiplier set "
                              "is empty")
    return inst


def load_instance(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(inst: ProblemInstance, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(inst.to_dict(), indent=2, sort_keys=True))
        fh.write("\n")
