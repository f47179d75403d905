"""Exact geometry of the second-order (Lorentz) cone in R^(1+m).

A point q = (q0, q_r) with q0 scalar and q_r in R^m belongs to the cone
when ||q_r|| <= q0.  The polar/dual cone used throughout is
{lam : ||lam_r|| <= -lam0}, i.e. the image of the cone under the
reflection hat(q) = (-q0, q_r).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

TOL_ZERO = 1e-9
TOL_CONE = 1e-9


class PointClass(enum.Enum):
    ZERO = "zero"
    INTERIOR = "interior"
    BOUNDARY = "boundary"  # boundary, nonzero
    OUTSIDE = "outside"


def _split(q):
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size < 2:
        raise ValueError("cone points live in R^(1+m) with m >= 1")
    return q[0], q[1:]


def hat(q):
    """Reflection (q0, q_r) -> (-q0, q_r); an involution mapping the cone
    onto its polar."""
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[0] = -out[0]
    return out


def classify(q, tol_zero=TOL_ZERO, tol_cone=TOL_CONE):
    """Classify q as ZERO / INTERIOR / BOUNDARY / OUTSIDE.

    The vertex test ||q|| <= tol_zero runs first; the boundary band is
    tol_cone absolute plus tol_cone*||q|| relative, which makes the three
    nonzero cases mutually exclusive.
    """
    q0, qr = _split(q)
    nq = float(np.sqrt(q0 * q0 + qr @ qr))
    if nq <= tol_zero:
        return PointClass.ZERO
    band = tol_cone * (1.0 + nq)
    margin = q0 - float(np.linalg.norm(qr))
    if margin > band:
        return PointClass.INTERIOR
    if abs(margin) <= band:
        return PointClass.BOUNDARY
    return PointClass.OUTSIDE


def cone_contains(q, tol=0.0):
    """Membership in the cone: ||q_r|| - q0 <= tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    q0, qr = _split(q)
    return float(np.linalg.norm(qr)) - q0 <= tol


def dual_contains(lam, tol=0.0):
    """Membership in the polar cone: ||lam_r|| + lam0 <= tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    l0, lr = _split(lam)
    return float(np.linalg.norm(lr)) + l0 <= tol


def project_onto_cone(p):
    """Euclidean projection onto the cone.

    p itself if feasible; 0 if p lies in the polar cone; otherwise the
    boundary point ((p0+||p_r||)/2) * (1, p_r/||p_r||).
    """
    p = np.asarray(p, dtype=float)
    p0, pr = _split(p)
    npr = float(np.linalg.norm(pr))
    if npr - p0 <= 0.0:
        return p.copy()
    if npr + p0 <= 0.0:
        return np.zeros_like(p)
    alpha = 0.5 * (p0 + npr)
    out = np.empty_like(p)
    out[0] = alpha
    out[1:] = alpha * pr / npr
    return out


def project_onto_cone_batch(P):
    """Vectorized projection; P has shape (..., 1+m)."""
    P = np.asarray(P, dtype=float)
    p0 = P[..., 0]
    npr = np.linalg.norm(P[..., 1:], axis=-1)
    inside = npr - p0 <= 0.0
    polar = npr + p0 <= 0.0
    alpha = 0.5 * (p0 + npr)
    safe = np.where(npr > 0, npr, 1.0)
    out = np.empty_like(P)
    out[..., 0] = alpha
    out[..., 1:] = (alpha / safe)[..., None] * P[..., 1:]
    out = np.where(polar[..., None], 0.0, out)
    out = np.where(inside[..., None], P, out)
    return out


def tangent_cone_residual(q, u, tol_zero=TOL_ZERO, tol_cone=TOL_CONE):
    """Signed residual r with u in T(q) iff r <= 0, for q in the cone.

    q = 0:        r = ||u_r|| - u0        (tangent cone is the cone itself)
    q interior:   r = -inf                (tangent cone is everything)
    q boundary:   r = <q_r/||q_r||, u_r> - u0
    """
    cls = classify(q, tol_zero, tol_cone)
    if cls is PointClass.OUTSIDE:
        raise ValueError("tangent cone is only defined at cone points")
    u0, ur = _split(u)
    if cls is PointClass.ZERO:
        return float(np.linalg.norm(ur)) - u0
    if cls is PointClass.INTERIOR:
        return -np.inf
    _, qr = _split(q)
    return float(qr @ ur) / float(np.linalg.norm(qr)) - u0


class NormalKind(enum.Enum):
    FULL_DUAL = "full_dual"  # the whole polar cone (vertex)
    ZERO = "zero"            # {0} (interior point)
    RAY = "ray"              # {alpha * hat(q) : alpha >= 0} (boundary)


@dataclass(frozen=True)
class NormalConeDesc:
    kind: NormalKind
    generator: np.ndarray | None = None  # ray generator hat(q) when kind is RAY

    def contains(self, lam, tol=1e-10):
        lam = np.asarray(lam, dtype=float)
        if self.kind is NormalKind.FULL_DUAL:
            return dual_contains(lam, tol)
        if self.kind is NormalKind.ZERO:
            return float(np.linalg.norm(lam)) <= tol
        g = self.generator
        nl = float(np.linalg.norm(lam))
        if nl <= tol:
            return True
        alpha = float(lam @ g) / float(g @ g)
        return alpha >= -tol and float(np.linalg.norm(lam - alpha * g)) <= tol * (1.0 + nl)


def normal_cone_description(q, tol_zero=TOL_ZERO, tol_cone=TOL_CONE):
    """Structured description of the normal cone at a cone point q."""
    cls = classify(q, tol_zero, tol_cone)
    if cls is PointClass.OUTSIDE:
        raise ValueError("normal cone is only defined at cone points")
    if cls is PointClass.ZERO:
        return NormalConeDesc(NormalKind.FULL_DUAL)
    if cls is PointClass.INTERIOR:
        return NormalConeDesc(NormalKind.ZERO)
    return NormalConeDesc(NormalKind.RAY, generator=hat(q))


@dataclass(frozen=True)
class ConePoint:
    """Value wrapper for an element of R^(1+m) split as (q0, q_r)."""

    q0: float
    qr: tuple

    @classmethod
    def from_vec(cls, q):
        q = np.asarray(q, dtype=float)
        return cls(float(q[0]), tuple(float(v) for v in q[1:]))

    @property
    def vec(self):
        return np.concatenate(([self.q0], self.qr))

    def hat(self):
        return ConePoint(-self.q0, self.qr)

    def classify(self, tol_zero=TOL_ZERO, tol_cone=TOL_CONE):
        return classify(self.vec, tol_zero, tol_cone)
