"""Second-order variational objects at the base point: critical cone,
multiplier sets, curvature matrix, the constrained infimum function, the
out-of-kernel multiplier, and the 2-regularity test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cone, conelp
from .errors import DegenerateScaling, NumericalIndefiniteness, UnboundedMultiplierSet


def _null_basis(A, tol_rank=1e-8):
    """Orthonormal basis of ker A."""
    A = np.asarray(A, dtype=float)
    if A.size == 0 or np.all(A == 0.0):
        return np.eye(A.shape[1])
    U, s, Vt = np.linalg.svd(A)
    cutoff = tol_rank * (s[0] if s.size else 1.0)
    r = int(np.sum(s > cutoff))
    return Vt[r:].T


@dataclass(frozen=True)
class CriticalCone:
    """Critical cone at (x_base, -grad f).  'subspace' form carries an
    orthonormal basis; 'conic' form keeps the defining data."""

    kind: str                      # 'subspace' | 'conic'
    basis: np.ndarray | None       # orthonormal columns when kind == 'subspace'
    jacobian: np.ndarray
    grad_f: np.ndarray

    @property
    def dim(self):
        return 0 if self.basis is None else self.basis.shape[1]

    def contains(self, u, tol=1e-8):
        u = np.asarray(u, dtype=float)
        scale = 1.0 + float(np.linalg.norm(u))
        if abs(float(self.grad_f @ u)) > tol * scale:
            return False
        q = self.jacobian @ u
        if self.kind == "subspace":
            return float(np.linalg.norm(q)) <= tol * scale
        return cone.cone_contains(q, tol * scale)


def critical_cone(inst):
    """Structured critical-cone description; subspace form in the in-kernel
    regime (every critical direction annihilated by the Jacobian)."""
    out, _ = conelp.out_of_kernel_probe(inst)
    if out:
        return CriticalCone(kind="conic", basis=None,
                            jacobian=inst.J_base, grad_f=inst.grad_f_base)
    A = np.vstack([inst.J_base, inst.grad_f_base])
    return CriticalCone(kind="subspace", basis=_null_basis(A, inst.tol.tol_rank),
                        jacobian=inst.J_base, grad_f=inst.grad_f_base)


def lambda0_set(inst):
    """(slice, is_zero): the multiplier slice, or the singleton {0} marker
    when grad f vanishes at the base point."""
    if np.linalg.norm(inst.grad_f_base) <= inst.tol.tol_zero:
        return None, True
    return inst.multiplier_slice(), False


def directional_multipliers(inst, u, bound=None):
    """Argmax of <lam, Hess g (u,u)> over the multiplier slice.  The
    curvature term vanishes at the base point because g(x_base) = 0, so
    the objective is linear in lam."""
    u = np.asarray(u, dtype=float)
    sl = inst.multiplier_slice()
    d = inst.second_order_g(u, u)
    res = conelp.maximize_linear(sl, d, bound=bound, seed=inst.seed)
    if res.status != "optimal":
        raise UnboundedMultiplierSet(
            f"directional multiplier argmax does not exist (status {res.status})")
    return res


def curvature_from_parts(lam, g_at_x, J_at_x, tol_zero=1e-9, tol_cone=1e-9):
    """Curvature matrix (-lam0/g0) (Jr'Jr - J0'J0) on the boundary stratum;
    zero on the other strata."""
    cls = cone.classify(g_at_x, tol_zero, tol_cone)
    n = J_at_x.shape[1]
    if cls is not cone.PointClass.BOUNDARY:
        return np.zeros((n, n))
    g0 = float(g_at_x[0])
    if abs(g0) <= tol_zero:
        raise ValueError("boundary classification with vanishing axis "
                         "coordinate; the curvature quotient is undefined")
    J0 = J_at_x[0]
    Jr = J_at_x[1:]
    return (-float(lam[0]) / g0) * (Jr.T @ Jr - np.outer(J0, J0))


def curvature_H(inst, x, lam):
    """Curvature matrix of the constraint geometry at a feasible point x."""
    lam = np.asarray(lam, dtype=float)
    gx = inst.g_value(x)
    nd = cone.normal_cone_description(gx, inst.tol.tol_zero, inst.tol.tol_cone)
    if not nd.contains(lam, tol=1e-6 * (1 + np.linalg.norm(lam))):
        raise ValueError("lam is not in the normal cone at g(x)")
    return curvature_from_parts(lam, gx, inst.g_jacobian(x),
                                inst.tol.tol_zero, inst.tol.tol_cone)


@dataclass(frozen=True)
class RhoResult:
    value: float
    status: str                    # 'finite' | 'infeasible_infinite'
    z: np.ndarray | None


def rho(inst, u, lam, v, indef_tol=1e-7):
    """Constrained infimum of the boundary-curvature quadratic along kernel
    directions:

        inf_z  -lam0 ( ||Jr z + Sr||^2 - (J0 z + S0)^2 )
        s.t.   <lam, J z + S> = 0,       S := Hess g (v, u).

    Returns +inf when the constraint set is empty; otherwise the value is
    nonnegative and attained (the reduced quadratic is positive
    semidefinite for lam in the dual cone; small negative eigenvalues are
    clamped, large ones raise NumericalIndefiniteness).
    """
    lam = np.asarray(lam, dtype=float)
    J = inst.J_base
    S = inst.second_order_g(v, u)
    n = inst.n
    lam0 = float(lam[0])
    a = J.T @ lam                       # linear functional of the constraint
    b0 = float(lam @ S)
    scale = 1.0 + float(np.linalg.norm(lam)) * (1.0 + float(np.linalg.norm(S)))
    if np.linalg.norm(a) <= 1e-12 * scale:
        if abs(b0) > 1e-10 * scale:
            return RhoResult(value=np.inf, status="infeasible_infinite", z=None)
        z0 = np.zeros(n)
        W = np.eye(n)
    else:
        z0 = -a * (b0 / float(a @ a))
        W = _null_basis(a[None, :], 1e-12)

    if lam0 == 0.0 or abs(lam0) <= 1e-15 * scale:
        # objective has prefactor -lam0 = 0: identically zero on the set
        return RhoResult(value=0.0, status="finite", z=z0)

    D = np.diag(np.concatenate(([-1.0], np.ones(inst.m))))   # eta'D eta = ||eta_r||^2 - eta0^2
    M = (-lam0) * (J.T @ D @ J)
    q = (-lam0) * (J.T @ D @ S)
    d0 = (-lam0) * float(S @ D @ S)
    # objective(z) = z'Mz + 2 q'z + d0 restricted to z = z0 + W y
    B = W.T @ M @ W
    cvec = W.T @ (M @ z0 + q)
    dconst = float(z0 @ M @ z0 + 2.0 * q @ z0 + d0)
    w, V = np.linalg.eigh(0.5 * (B + B.T))
    wscale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    if w.size and w[0] < -indef_tol * wscale:
        raise NumericalIndefiniteness(
            f"reduced quadratic has eigenvalue {w[0]:.3e}; lam is not in the "
            "dual cone or the data is inconsistent")
    w_cl = np.where(w < 0.0, 0.0, w)
    # solve B y = -c by pseudoinverse on the clamped spectrum
    y = np.zeros(W.shape[1])
    resid_ortho = 0.0
    for i in range(len(w_cl)):
        ci = float(V[:, i] @ cvec)
        if w_cl[i] > 1e-14 * wscale:
            y -= (ci / w_cl[i]) * V[:, i]
        else:
            resid_ortho = max(resid_ortho, abs(ci))
    if resid_ortho > indef_tol * scale:
        raise NumericalIndefiniteness(
            "reduced quadratic is unbounded below along its kernel; lam is "
            "not in the dual cone or the data is inconsistent")
    z = z0 + W @ y
    value = float(y @ (0.5 * (B + B.T)) @ y + 2.0 * cvec @ y + dconst)
    return RhoResult(value=value, status="finite", z=z)


def rho_quadratic_form(inst, lam, v):
    """The infimum function as a quadratic form in u (for fixed lam, v with
    J^T lam != 0 the constraint is feasible for every u and the value is a
    positive-semidefinite quadratic form in u).  Returns (matrix, ok);
    ok=False when the form representation does not apply (J^T lam == 0
    with lam != 0: the value is +inf off a subspace)."""
    lam = np.asarray(lam, dtype=float)
    n = inst.n
    if np.linalg.norm(lam) <= 1e-14:
        return np.zeros((n, n)), True
    a = inst.J_base.T @ lam
    if np.linalg.norm(a) <= 1e-12 * (1.0 + np.linalg.norm(lam)):
        return None, False
    M = np.zeros((n, n))
    eye = np.eye(n)
    diag = np.array([rho(inst, eye[i], lam, v).value for i in range(n)])
    for i in range(n):
        M[i, i] = diag[i]
    for i in range(n):
        for j in range(i + 1, n):
            rij = rho(inst, eye[i] + eye[j], lam, v).value
            M[i, j] = M[j, i] = 0.5 * (rij - diag[i] - diag[j])
    return 0.5 * (M + M.T), True


def lambda_bar(inst, u_bar):
    """The unique candidate multiplier of the out-of-kernel regime:
    ||grad f|| / ||J' hat(J u_bar)||  *  hat(J u_bar)."""
    u_bar = np.asarray(u_bar, dtype=float)
    gf = inst.grad_f_base
    ghat_u = cone.hat(inst.J_base @ u_bar)
    denom = float(np.linalg.norm(inst.J_base.T @ ghat_u))
    nf = float(np.linalg.norm(gf))
    if nf <= inst.tol.tol_zero:
        return np.zeros(1 + inst.m)
    if denom <= inst.tol.tol_zero * (1.0 + nf):
        raise DegenerateScaling(
            "||J' hat(J u_bar)|| vanishes while grad f does not")
    lb = (nf / denom) * ghat_u
    # the multiplier always solves the affine system J' lam = -grad f, so
    # projecting onto the slice strips numerical noise from the probe
    sl = inst.multiplier_slice()
    if not sl.empty:
        proj = sl.project_affine(lb)
        if np.linalg.norm(proj - lb) <= 1e-5 * (1.0 + np.linalg.norm(lb)):
            lb = proj
    return lb


def two_regular(inst, v, tol_rank=None):
    """2-regularity of g at the base point in direction v: the stacked map
    (z, w) -> J z + Hess g(v, w) with w restricted to ker J is onto."""
    tol_rank = inst.tol.tol_rank if tol_rank is None else tol_rank
    v = np.asarray(v, dtype=float)
    J = inst.J_base
    Sv = np.einsum("ijk,j->ik", inst.g_hess_base, v)   # rows: (Hess g_i) v
    P = _null_basis(J, tol_rank)
    Mmat = np.hstack([J, Sv @ P]) if P.size else J
    s = np.linalg.svd(Mmat, compute_uv=False)
    cutoff = tol_rank * (s[0] if s.size and s[0] > 0 else 1.0)
    return int(np.sum(s > cutoff)) == J.shape[0]
