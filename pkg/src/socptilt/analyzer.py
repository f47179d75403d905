"""Pointbased tilt-stability analysis: case dispatch, the out-of-kernel
characterization, the in-kernel chi strata, the simplified test, and the
final verdict with an exact-bound estimate.

Verdict policy: TILT_STABLE only when every strict inequality holds with
margin > margin_strict, NOT_TILT_STABLE only on a certified violation of
a necessary condition by more than margin_strict, INCONCLUSIVE in the
band between (and whenever a search cannot be trusted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import conelp, secondorder
from .cone import dual_contains, project_onto_cone
from .covering import half_circle_angles, sphere_covering
from .errors import DegenerateScaling, UnboundedMultiplierSet

GRID_H = 0.05          # stratified sphere-grid resolution of the safety scan
DESK_DIM = 4           # exhaustive searches only up to this many parameters


# ---------------------------------------------------------------------------
# minimizing a quadratic form over the branch-decomposed sphere set
# ---------------------------------------------------------------------------

@dataclass
class BranchMin:
    value: float
    u: np.ndarray | None
    certified: bool = True
    dual_bound: float | None = None


def _angle_solutions(C, tol):
    """Unit solutions of u'Cu = 0 for a symmetric 2x2 C (angle closed form)."""
    A = 0.5 * (C[0, 0] - C[1, 1])
    B = C[0, 1]
    K = 0.5 * (C[0, 0] + C[1, 1])
    R = float(np.hypot(A, B))
    if R <= tol:
        if abs(K) <= tol:
            return "all"
        return []
    c = -K / R
    if c > 1.0 + 1e-12 or c < -1.0 - 1e-12:
        return []
    c = min(1.0, max(-1.0, c))
    base = np.arctan2(B, A)
    sols = []
    for s in (np.arccos(c), -np.arccos(c)):
        two_theta = base + s
        th = 0.5 * two_theta
        sols.append(np.array([np.cos(th), np.sin(th)]))
    return sols


def _mix_to_null(C, e1, e2):
    """Unit combination of e1, e2 with vanishing C-form, if one exists."""
    q1 = float(e1 @ C @ e1)
    q2 = float(e2 @ C @ e2)
    q12 = float(e1 @ C @ e2)
    disc = q12 * q12 - q1 * q2
    if disc < 0:
        return None
    if abs(q2) < 1e-15:
        if abs(q12) < 1e-15:
            return e2 if abs(q2) < abs(q1) else None
        tau = -q1 / (2.0 * q12)
        y = e1 + tau * e2
    else:
        tau = (-q12 + np.sqrt(disc)) / q2
        y = e1 + tau * e2
    return y / np.linalg.norm(y)


def _min_two_forms_on_sphere(M, C, ctol, seed=0, budget=200):
    """min u'Mu over {u : ||u|| = 1, u'Cu = 0} for symmetric M, C.

    Exact for dimensions <= 2; for >= 3 combines the concave dual bound
    max_t lambda_min(M + tC) (tight by convexity of the joint numerical
    range) with eigenvector recovery and SLSQP multi-start polish.
    """
    k = M.shape[0]
    if k == 0:
        return BranchMin(np.inf, None)
    wC = np.linalg.eigvalsh(C)
    if wC[0] > ctol or wC[-1] < -ctol:
        return BranchMin(np.inf, None)        # C definite: no unit null direction
    if abs(wC[0]) <= ctol and abs(wC[-1]) <= ctol:
        w, V = np.linalg.eigh(M)
        return BranchMin(float(w[0]), V[:, 0])
    if k == 1:
        return BranchMin(float(M[0, 0]), np.array([1.0]))
    if k == 2:
        sols = _angle_solutions(C, ctol)
        if sols == "all":
            w, V = np.linalg.eigh(M)
            return BranchMin(float(w[0]), V[:, 0])
        if not sols:
            return BranchMin(np.inf, None)
        vals = [(float(u @ M @ u), u) for u in sols]
        v, u = min(vals, key=lambda t: t[0])
        return BranchMin(v, u)

    def neg_phi(t):
        return -float(np.linalg.eigvalsh(M + t * C)[0])

    T = 1.0
    while T < 1e9 and (neg_phi(T) <= neg_phi(0.0) or neg_phi(-T) <= neg_phi(0.0)):
        T *= 4.0
    res = optimize.minimize_scalar(neg_phi, bounds=(-T, T), method="bounded",
                                   options={"xatol": 1e-12})
    t_star = float(res.x)
    dual = -float(res.fun)
    w, V = np.linalg.eigh(M + t_star * C)
    span = [V[:, i] for i in range(k) if w[i] <= w[0] + 1e-8 * (1 + abs(w[0]))]
    cand = None
    if len(span) == 1:
        if abs(float(span[0] @ C @ span[0])) <= 10 * ctol:
            cand = span[0]
    else:
        qs = [float(e @ C @ e) for e in span]
        i_pos = int(np.argmax(qs))
        i_neg = int(np.argmin(qs))
        if qs[i_pos] >= -ctol and qs[i_neg] <= ctol and i_pos != i_neg:
            cand = _mix_to_null(C, span[i_pos], span[i_neg])
        elif abs(qs[i_neg]) <= 10 * ctol:
            cand = span[i_neg]

    cons = [
        {"type": "eq", "fun": lambda y: y @ y - 1.0, "jac": lambda y: 2.0 * y},
        {"type": "eq", "fun": lambda y: y @ C @ y, "jac": lambda y: 2.0 * (C @ y)},
    ]
    best_val, best_u = np.inf, None
    seeds = ([cand] if cand is not None else []) + sphere_covering(k, budget, seed=seed)
    for y0 in seeds:
        res = optimize.minimize(lambda y: y @ M @ y, y0,
                                jac=lambda y: 2.0 * (M @ y),
                                method="SLSQP", constraints=cons,
                                options={"maxiter": 200, "ftol": 1e-14})
        y = res.x
        nrm = np.linalg.norm(y)
        if nrm < 1e-9:
            continue
        y = y / nrm
        if abs(float(y @ C @ y)) > 50 * ctol:
            continue
        v = float(y @ M @ y)
        if v < best_val:
            best_val, best_u = v, y
    certified = best_u is not None and best_val <= dual + 1e-6 * (1 + abs(dual))
    if best_u is None:
        return BranchMin(np.inf, None, certified=False, dual_bound=dual)
    return BranchMin(best_val, best_u, certified=certified, dual_bound=dual)


def minimize_form_on_branch_set(inst, M, lam, extra_basis=None, seed=0,
                                budget=200):
    """min u'Mu over the lam-dependent constraint set on the unit sphere:

        <lam, J u> = 0   and   lam0 (||Jr u||^2 - (J0 u)^2) = 0,

    optionally intersected with the span of extra_basis.  Returns the
    minimum, a witness in ambient coordinates, and a certification flag.
    """
    lam = np.asarray(lam, dtype=float)
    J = inst.J_base
    n = inst.n
    E = np.eye(n) if extra_basis is None else np.asarray(extra_basis, dtype=float)
    if E.size == 0 or E.shape[1] == 0:
        return BranchMin(np.inf, None)
    a = J.T @ lam
    aE = E.T @ a
    if np.linalg.norm(aE) > 1e-12 * (1.0 + np.linalg.norm(a)):
        W = secondorder._null_basis(aE[None, :], 1e-12)
        B = E @ W
    else:
        B = E
    if B.shape[1] == 0:
        return BranchMin(np.inf, None)
    Mr = B.T @ M @ B
    scale = 1.0 + float(np.linalg.norm(J)) ** 2
    if abs(float(lam[0])) <= 1e-12 * (1.0 + np.linalg.norm(lam)):
        w, V = np.linalg.eigh(0.5 * (Mr + Mr.T))
        return BranchMin(float(w[0]), B @ V[:, 0])
    C = J[1:].T @ J[1:] - np.outer(J[0], J[0])
    Cr = B.T @ C @ B
    out = _min_two_forms_on_sphere(0.5 * (Mr + Mr.T), 0.5 * (Cr + Cr.T),
                                   ctol=1e-10 * scale, seed=seed, budget=budget)
    if out.u is not None:
        out.u = B @ out.u
    return out


# ---------------------------------------------------------------------------
# verdict containers
# ---------------------------------------------------------------------------

TILT_STABLE = "TILT_STABLE"
NOT_TILT_STABLE = "NOT_TILT_STABLE"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class ChiEstimate:
    name: str
    value: float
    certificate: dict = field(default_factory=dict)
    attained: bool = True
    certified: bool = True
    note: str = ""


@dataclass
class SimplifiedResult:
    passes: bool
    threshold: float
    min_value: float
    witnesses: list = field(default_factory=list)


@dataclass
class AnalysisVerdict:
    case: str                                  # 'in_kernel' | 'out_of_kernel'
    verdict: str                               # TILT_STABLE / NOT_TILT_STABLE / INCONCLUSIVE
    bound_estimate: float | None = None
    chi: dict = field(default_factory=dict)    # name -> ChiEstimate
    simplified: SimplifiedResult | None = None
    two_regularity: str = "not_applicable"     # 'vacuous' | 'verified_sampled' | 'failed' | 'not_applicable'
    u_bar: np.ndarray | None = None
    lam_bar: np.ndarray | None = None
    witness: dict | None = None
    inconclusive_reasons: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# case dispatch and the out-of-kernel characterization
# ---------------------------------------------------------------------------

def classify_case(inst):
    out, u_bar = conelp.out_of_kernel_probe(inst)
    return ("out_of_kernel", u_bar) if out else ("in_kernel", None)


def out_kernel_check(inst, budget=200):
    """No-gap pointbased test of the out-of-kernel regime: sign of the
    minimum of the Lagrangian Hessian form over the branch set of the
    distinguished multiplier."""
    margin = inst.tol.margin_strict
    _, u_bar = conelp.out_of_kernel_probe(inst)
    lam_bar = secondorder.lambda_bar(inst, u_bar)
    M = inst.hess_lag(lam_bar)
    bm = minimize_form_on_branch_set(inst, M, lam_bar, seed=inst.seed,
                                     budget=budget)
    chi = ChiEstimate(name="out_kernel_min", value=bm.value,
                      certificate={} if bm.u is None else
                      {"u": bm.u, "lam": lam_bar},
                      certified=bm.certified)
    v = AnalysisVerdict(case="out_of_kernel", verdict=INCONCLUSIVE,
                        u_bar=u_bar, lam_bar=lam_bar,
                        chi={"out_kernel_min": chi})
    v.diagnostics["branch_min"] = bm.value
    if not np.isfinite(bm.value):
        v.verdict = TILT_STABLE
        v.bound_estimate = 0.0
        v.diagnostics["infimum_not_attained"] = True
        return v
    if bm.value > margin and bm.certified:
        v.verdict = TILT_STABLE
        v.bound_estimate = 1.0 / bm.value
    elif bm.value < -margin:
        v.verdict = NOT_TILT_STABLE
        v.witness = {"u": bm.u, "lam": lam_bar, "value": bm.value,
                     "condition": "necessary_out_of_kernel"}
    else:
        v.inconclusive_reasons.append(
            f"branch minimum {bm.value:.3e} inside the +/-{margin:.1e} band"
            if bm.certified else "branch minimum not certified")
    return v


# ---------------------------------------------------------------------------
# simplified sufficient test
# ---------------------------------------------------------------------------

def _critical_sphere_samples(inst, K, budget, seed):
    """Unit vectors of the critical cone; exact axis/diagonal directions of
    the ambient space are included so structured data is hit exactly."""
    n = inst.n
    pts = []
    if K.kind == "subspace":
        P = K.basis
        k = P.shape[1]
        if k == 0:
            return []
        for s in sphere_covering(k, budget, seed=seed):
            pts.append(P @ s)
        for e in sphere_covering(n, 4 * n * n, seed=seed + 1):
            p = P @ (P.T @ e)
            nn = np.linalg.norm(p)
            if nn > 1e-9:
                pts.append(p / nn)
    else:
        for e in sphere_covering(n, max(budget, 8 * n * n), seed=seed):
            # project onto the hyperplane orthogonal to grad f, then test
            h = inst.grad_f_base
            p = e - h * (float(h @ e) / float(h @ h)) if np.linalg.norm(h) > 0 else e
            nn = np.linalg.norm(p)
            if nn < 1e-9:
                continue
            p = p / nn
            if K.contains(p, tol=1e-7):
                pts.append(p)
        out, u_bar = conelp.out_of_kernel_probe(inst)
        if out:
            pts.append(u_bar / np.linalg.norm(u_bar))
    # dedupe antipodal/near duplicates
    uniq = []
    for p in pts:
        if not any(min(np.linalg.norm(p - q), np.linalg.norm(p + q)) < 1e-9
                   for q in uniq):
            uniq.append(p)
    return uniq


def simplified_check(inst, kappa=None, budget=200):
    """Single-multiplier sufficient test: collect directional multipliers
    over critical directions, then require the Lagrangian Hessian form to
    clear the threshold over each multiplier's branch set."""
    margin = inst.tol.margin_strict
    threshold = (1.0 / kappa) if kappa else 0.0
    K = secondorder.critical_cone(inst)
    vs = _critical_sphere_samples(inst, K, budget, inst.seed)
    if not vs:
        return SimplifiedResult(passes=True, threshold=threshold,
                                min_value=np.inf)
    lams = []
    for v in vs:
        try:
            res = secondorder.directional_multipliers(inst, v)
        except UnboundedMultiplierSet:
            continue
        lam = res.argmax
        key = tuple(np.round(lam, 9))
        if key not in {tuple(np.round(l0, 9)) for l0, _ in lams}:
            lams.append((lam, v))
    witnesses = []
    min_val = np.inf
    for lam, v in lams:
        M = inst.hess_lag(lam)
        bm = minimize_form_on_branch_set(inst, M, lam, seed=inst.seed,
                                         budget=budget)
        if bm.value < min_val:
            min_val = bm.value
        if bm.value <= threshold + margin:
            witnesses.append({"lam": lam, "u": bm.u, "value": bm.value,
                              "direction": v})
    witnesses.sort(key=lambda w: w["value"])
    return SimplifiedResult(passes=not witnesses, threshold=threshold,
                            min_value=min_val, witnesses=witnesses)


# ---------------------------------------------------------------------------
# chi_1
# ---------------------------------------------------------------------------

def chi1(inst, budget=200):
    """Infimum over unit critical directions of the Lagrangian Hessian form
    at the directional multiplier (the argmax value is shared across the
    argmax face, so the form value is well defined)."""
    K = secondorder.critical_cone(inst)
    if K.kind != "subspace":
        raise ValueError("chi estimates apply to the in-kernel case")
    P = K.basis
    k = 0 if P is None else P.shape[1]
    if k == 0:
        return ChiEstimate(name="chi1", value=np.inf, attained=False,
                           note="critical cone is trivial")
    sl = inst.multiplier_slice()
    Hf = inst.hess_f_base

    def phi(u):
        d = inst.second_order_g(u, u)
        res = conelp.maximize_linear(sl, d, seed=inst.seed)
        if res.status != "optimal":
            raise UnboundedMultiplierSet(
                "directional multiplier argmax does not exist on a critical "
                "direction")
        return float(u @ Hf @ u) + res.value, res.argmax

    best = (np.inf, None, None)
    if k == 1:
        u = P[:, 0]
        val, lam = phi(u)
        best = (val, u, lam)
    else:
        samples = [P @ s for s in sphere_covering(k, budget, seed=inst.seed)]
        samples += [p for p in _critical_sphere_samples(inst, K, 0, inst.seed + 3)]
        vals = []
        for u in samples:
            val, lam = phi(u)
            vals.append((val, u, lam))
            if val < best[0]:
                best = (val, u, lam)
        # local polish from the few best seeds (gradient of the max-value
        # envelope is the Lagrangian Hessian action at the argmax multiplier)
        vals.sort(key=lambda t: t[0])
        for val0, u0, lam0 in vals[:3]:
            u, val, lam = u0, val0, lam0
            step = 0.2
            for _ in range(80):
                g = 2.0 * (inst.hess_lag(lam) @ u)
                g = P @ (P.T @ g)
                g -= u * float(g @ u)
                if np.linalg.norm(g) < 1e-12:
                    break
                cand = u - step * g
                cand = P @ (P.T @ cand)
                cand /= np.linalg.norm(cand)
                vc, lc = phi(cand)
                if vc < val - 1e-15:
                    u, val, lam = cand, vc, lc
                else:
                    step *= 0.5
                    if step < 1e-10:
                        break
            if val < best[0]:
                best = (val, u, lam)
    val, u, lam = best
    return ChiEstimate(name="chi1", value=val,
                       certificate={"u": u, "lam": lam})


# ---------------------------------------------------------------------------
# quadruple families and chi_2 / chi_3
# ---------------------------------------------------------------------------

@dataclass
class ZFamily:
    stratum: str                 # 'zero' | 'interior' | 'boundary'
    v: np.ndarray
    w: np.ndarray | None
    q: np.ndarray | None
    lam: np.ndarray | None       # None for the zero stratum (lam free)
    alpha_free: bool = False
    residuals: dict = field(default_factory=dict)


@dataclass
class QuadrupleZ:
    u: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    w: np.ndarray
    q: np.ndarray
    residuals: dict = field(default_factory=dict)


def _range_basis(J, tol_rank):
    U, s, _ = np.linalg.svd(J)
    cutoff = tol_rank * (s[0] if s.size and s[0] > 0 else 1.0)
    r = int(np.sum(s > cutoff))
    return U[:, :r]


def _boundary_family(inst, v, sl):
    """Boundary-stratum multiplier for direction v: the directional argmax
    that additionally lies on the dual-cone boundary with its reflection
    reachable as J w + s_v (positive ray scale)."""
    s_v = 0.5 * inst.second_order_g(v, v)
    R = _range_basis(inst.J_base, inst.tol.tol_rank)
    b_perp = s_v - R @ (R.T @ s_v)
    d_v = inst.second_order_g(v, v)
    try:
        res = secondorder.directional_multipliers(inst, v)
    except UnboundedMultiplierSet:
        return None, "unbounded"
    lam = res.argmax
    nl = np.linalg.norm(lam)
    if nl <= 1e-12:
        return None, None
    scale = 1.0 + nl
    on_bd = abs(lam[0] + np.linalg.norm(lam[1:])) <= 1e-7 * scale
    if not on_bd:
        return None, None
    lam_hat = np.concatenate(([-lam[0]], lam[1:]))
    h_perp = lam_hat - R @ (R.T @ lam_hat)
    nb = np.linalg.norm(b_perp)
    if nb <= 1e-10 * (1.0 + np.linalg.norm(s_v)):
        # free ray scale: hat(lam) must lie in range J
        if np.linalg.norm(h_perp) > 1e-7 * scale:
            return None, None
        q = lam_hat.copy()
        w, *_ = np.linalg.lstsq(inst.J_base, q - s_v, rcond=None)
        fam = ZFamily(stratum="boundary", v=v, w=w, q=q, lam=lam,
                      alpha_free=True,
                      residuals={"match": 0.0,
                                 "lstsq": float(np.linalg.norm(
                                     inst.J_base @ w + s_v - q))})
        return fam, None
    alpha = float(h_perp @ b_perp) / float(nb * nb)
    mismatch = float(np.linalg.norm(h_perp - alpha * b_perp))
    if alpha <= 1e-12 or mismatch > 1e-7 * scale:
        return None, None
    q = lam_hat / alpha
    w, *_ = np.linalg.lstsq(inst.J_base, q - s_v, rcond=None)
    resid = float(np.linalg.norm(inst.J_base @ w + s_v - q))
    if resid > 1e-7 * (1.0 + np.linalg.norm(q)):
        return None, None
    fam = ZFamily(stratum="boundary", v=v, w=w, q=q, lam=lam,
                  residuals={"match": mismatch, "lstsq": resid})
    return fam, None


def _lambda_samples(inst, sl, budget, seed):
    """Deterministic sample of the multiplier slice inside the dual cone."""
    out = []
    ok, lam = conelp.feasibility(sl, want_interior=True)
    if not ok:
        return out
    out.append(lam)
    mn = conelp._min_norm_on_face(sl, np.zeros_like(lam), 0.0)  # min-norm in slice
    if mn is None:
        mn = lam
    if sl.contains(mn, 1e-7):
        out.append(mn)
    k = sl.dim
    rng = np.random.default_rng(seed)
    radius = 2.0 * (1.0 + np.linalg.norm(lam))
    n_extra = max(4, budget // 8)
    for _ in range(n_extra):
        xi = rng.uniform(-radius, radius, size=k)
        cand = sl.point(xi)
        if dual_contains(cand, 1e-12 * (1 + np.linalg.norm(cand))):
            out.append(cand)
        else:
            proj, okp = conelp.dykstra([sl.project_affine,
                                        conelp._project_dual_cone], cand)
            if okp:
                out.append(proj)
    uniq = []
    for p in out:
        if not any(np.linalg.norm(p - q) < 1e-8 * (1 + np.linalg.norm(p))
                   for q in uniq):
            uniq.append(p)
    return uniq


def z_search(inst, budget=200):
    """Enumerate candidate quadruple families by stratifying on the cone
    position of q = J w + (1/2) Hess g(v, v) over kernel directions v."""
    J = inst.J_base
    K = secondorder._null_basis(J, inst.tol.tol_rank)
    kv = K.shape[1]
    families = []
    if kv == 0:
        return families
    sl, lam_is_zero = secondorder.lambda0_set(inst)
    if kv == 1:
        vs = [K[:, 0]]
    elif kv == 2:
        vs = [K @ np.array([np.cos(t), np.sin(t)])
              for t in half_circle_angles(max(8, budget))]
        for e in sphere_covering(inst.n, 4 * inst.n * inst.n, seed=inst.seed):
            p = K @ (K.T @ e)
            nn = np.linalg.norm(p)
            if nn > 1e-9:
                vs.append(p / nn)
    else:
        vs = [K @ s for s in sphere_covering(kv, max(8, budget), seed=inst.seed)]
    seen = []
    uniq_vs = []
    for v in vs:
        if not any(min(np.linalg.norm(v - q), np.linalg.norm(v + q)) < 1e-10
                   for q in seen):
            seen.append(v)
            uniq_vs.append(v)

    for v in uniq_vs:
        s_v = 0.5 * inst.second_order_g(v, v)
        # zero stratum: q = 0 reachable iff -s_v lies in range J
        w, *_ = np.linalg.lstsq(J, -s_v, rcond=None)
        resid = float(np.linalg.norm(J @ w + s_v))
        if resid <= 1e-8 * (1.0 + np.linalg.norm(s_v)):
            families.append(ZFamily(stratum="zero", v=v, w=w,
                                    q=np.zeros(1 + inst.m),
                                    lam=None if not lam_is_zero else np.zeros(1 + inst.m),
                                    residuals={"lstsq": resid}))
        if lam_is_zero:
            # lam = 0 belongs to every normal cone: one reachable q in the
            # cone suffices, and any q != 0 feeds the quotient stratum
            q, okq = conelp.dykstra(
                [lambda y: s_v + J @ np.linalg.lstsq(J, y - s_v, rcond=None)[0],
                 project_onto_cone],
                s_v)
            if okq:
                wq, *_ = np.linalg.lstsq(J, q - s_v, rcond=None)
                families.append(ZFamily(
                    stratum="interior" if q[0] > np.linalg.norm(q[1:]) + 1e-12
                    else "boundary",
                    v=v, w=wq, q=q, lam=np.zeros(1 + inst.m),
                    residuals={"lstsq": float(np.linalg.norm(J @ wq + s_v - q))}))
            continue
        fam, _err = _boundary_family(inst, v, sl)
        if fam is not None:
            families.append(fam)
    return families


def quadruples_from_family(inst, fam: ZFamily, max_u=3, budget=100):
    """Concrete quadruples with recorded residuals for one family."""
    out = []
    lam = fam.lam if fam.lam is not None else None
    lams = [lam] if lam is not None else \
        _lambda_samples(inst, inst.multiplier_slice(), budget, inst.seed)[:3]
    for lm in lams:
        bm = minimize_form_on_branch_set(inst, inst.hess_lag(lm), lm,
                                         seed=inst.seed, budget=budget)
        if bm.u is None:
            continue
        u = bm.u
        J = inst.J_base
        res = {
            "orth": abs(float(lm @ (J @ u))),
            "branch": abs(float(lm[0]) * (np.linalg.norm(J[1:] @ u) ** 2
                                          - float(J[0] @ u) ** 2)),
            "kernel_v": float(np.linalg.norm(J @ fam.v)),
            **fam.residuals,
        }
        out.append(QuadrupleZ(u=u, lam=lm, v=fam.v, w=fam.w, q=fam.q,
                              residuals=res))
        if len(out) >= max_u:
            break
    return out


def _rank_collapse_vs(inst, budget):
    """Directions v where the infimum-function form degenerates beyond its
    generic kernel.  chi_2 candidates live exactly there, so the scan
    minimizes the (generic-kernel + 1)-th eigenvalue of the rho form over
    the v-sphere and keeps near-collapse minima."""
    J = inst.J_base
    K = secondorder._null_basis(J, inst.tol.tol_rank)
    kv = K.shape[1]
    if kv == 0:
        return []
    sl, lam_is_zero = secondorder.lambda0_set(inst)
    if lam_is_zero:
        return []

    def family_eigs(v):
        fam, _ = _boundary_family(inst, v, sl)
        if fam is None or fam.lam is None:
            return None
        Mv, ok = secondorder.rho_quadratic_form(inst, fam.lam, v)
        if not ok:
            return None
        return np.linalg.eigvalsh(Mv)

    if kv == 1:
        return []
    # establish the generic kernel dimension on a coarse probe
    probes = [K @ s for s in sphere_covering(kv, 16, seed=inst.seed + 7)]
    dims = []
    eig_scale = 1.0
    n_eigs = None
    for v in probes:
        w = family_eigs(v)
        if w is None:
            continue
        n_eigs = len(w)
        eig_scale = max(eig_scale, float(w[-1]))
        dims.append(int(np.sum(w <= 1e-9 * eig_scale)))
    if not dims or n_eigs is None:
        return []
    k_gen = int(np.median(dims))
    idx = min(k_gen, n_eigs - 1)

    def sentinel(theta_or_s):
        if kv == 2:
            v = K @ np.array([np.cos(theta_or_s), np.sin(theta_or_s)])
        else:
            v = K @ (theta_or_s / np.linalg.norm(theta_or_s))
        w = family_eigs(v)
        if w is None or idx >= len(w):
            return np.inf
        return float(w[idx])

    found = []
    if kv == 2:
        ths = half_circle_angles(max(64, budget))
        vals = np.array([sentinel(t) for t in ths])
        finite = np.isfinite(vals)
        for i in range(len(ths)):
            if not finite[i]:
                continue
            prev_i, next_i = (i - 1) % len(ths), (i + 1) % len(ths)
            if finite[prev_i] and finite[next_i] and \
                    vals[i] <= vals[prev_i] and vals[i] <= vals[next_i]:
                res = optimize.minimize_scalar(
                    sentinel, bounds=(ths[i] - np.pi / len(ths),
                                      ths[i] + np.pi / len(ths)),
                    method="bounded", options={"xatol": 1e-14})
                if res.fun <= 1e-9 * eig_scale:
                    found.append(K @ np.array([np.cos(res.x), np.sin(res.x)]))
    else:
        rng = np.random.default_rng(inst.seed + 11)
        for _ in range(max(8, budget // 16)):
            s0 = rng.standard_normal(kv)
            res = optimize.minimize(sentinel, s0, method="Nelder-Mead",
                                    options={"xatol": 1e-13, "fatol": 1e-16,
                                             "maxiter": 500})
            if res.fun <= 1e-9 * eig_scale:
                v = K @ (res.x / np.linalg.norm(res.x))
                found.append(v)
    uniq = []
    for v in found:
        if not any(min(np.linalg.norm(v - q), np.linalg.norm(v + q)) < 1e-7
                   for q in uniq):
            uniq.append(v)
    return uniq


def _kernel_basis_of_form(Mv, tol):
    w, V = np.linalg.eigh(Mv)
    scale = max(1.0, float(w[-1]))
    cols = [V[:, i] for i in range(len(w)) if w[i] <= tol * scale]
    if not cols:
        return None
    return np.column_stack(cols)


def chi2_chi3(inst, budget=200, families=None):
    """Estimates of the two quadruple-strata infima.  chi_2 restricts to
    directions with vanishing infimum function; chi_3 adds the curvature
    quotient over families with q != 0.  Estimates are certified from
    above by explicit quadruples; global coverage is the stratified scan
    plus the rank-collapse hunt."""
    Hf = inst.hess_f_base
    if families is None:
        families = z_search(inst, budget=budget)
    sl, lam_is_zero = secondorder.lambda0_set(inst)

    chi2 = ChiEstimate(name="chi2", value=np.inf, attained=False)
    chi3 = ChiEstimate(name="chi3", value=np.inf, attained=False)

    def consider_chi2(val, cert):
        if val < chi2.value:
            chi2.value = val
            chi2.certificate = cert
            chi2.attained = True

    def consider_chi3(val, cert, attained=True, note=""):
        if val < chi3.value:
            chi3.value = val
            chi3.certificate = cert
            chi3.attained = attained
            chi3.note = note

    def handle_family(fam: ZFamily):
        if fam.lam is not None and np.linalg.norm(fam.lam) <= 1e-14:
            # lam = 0: the infimum function vanishes identically and the
            # branch constraints are vacuous
            w, V = np.linalg.eigh(Hf)
            cert = {"u": V[:, 0], "lam": np.zeros(1 + inst.m), "v": fam.v,
                    "w": fam.w, "q": fam.q}
            consider_chi2(float(w[0]), cert)
            if fam.q is not None and np.linalg.norm(fam.q) > 1e-12:
                consider_chi3(float(w[0]), cert)
            return
        lams = [fam.lam] if fam.lam is not None else \
            _lambda_samples(inst, sl, budget, inst.seed)
        for lam in lams:
            M = inst.hess_lag(lam)
            Mv, ok = secondorder.rho_quadratic_form(inst, lam, fam.v)
            if not ok:
                continue
            ker = _kernel_basis_of_form(Mv, 1e-9)
            if ker is not None:
                bm = minimize_form_on_branch_set(inst, M, lam,
                                                 extra_basis=ker,
                                                 seed=inst.seed, budget=budget)
                if bm.u is not None:
                    consider_chi2(bm.value,
                                  {"u": bm.u, "lam": lam, "v": fam.v,
                                   "w": fam.w, "q": fam.q,
                                   "certified": bm.certified})
            if fam.stratum == "boundary" and fam.q is not None:
                if fam.alpha_free:
                    bm = minimize_form_on_branch_set(inst, M, lam,
                                                     seed=inst.seed,
                                                     budget=budget)
                    if bm.u is not None:
                        consider_chi3(bm.value,
                                      {"u": bm.u, "lam": lam, "v": fam.v,
                                       "w": fam.w, "q": fam.q},
                                      attained=False,
                                      note="free ray scale; curvature "
                                           "quotient infimized to zero")
                else:
                    q0 = float(fam.q[0])
                    if q0 > 1e-12:
                        T = M + Mv / q0
                        bm = minimize_form_on_branch_set(inst, T, lam,
                                                         seed=inst.seed,
                                                         budget=budget)
                        if bm.u is not None:
                            consider_chi3(bm.value,
                                          {"u": bm.u, "lam": lam, "v": fam.v,
                                           "w": fam.w, "q": fam.q})

    for fam in families:
        handle_family(fam)
    for v_star in _rank_collapse_vs(inst, budget):
        fam, _ = _boundary_family(inst, v_star, sl)
        if fam is not None:
            handle_family(fam)
    return chi2, chi3


# ---------------------------------------------------------------------------
# in-kernel verdict and the top-level analysis
# ---------------------------------------------------------------------------

def in_kernel_verdict(inst, budget=200):
    margin = inst.tol.margin_strict
    v = AnalysisVerdict(case="in_kernel", verdict=INCONCLUSIVE)
    try:
        c1 = chi1(inst, budget=budget)
    except UnboundedMultiplierSet as e:
        v.chi["chi1"] = ChiEstimate(name="chi1", value=-np.inf, attained=False,
                                    certified=False, note=str(e))
        v.inconclusive_reasons.append("directional multiplier argmax missing")
        return v
    families = z_search(inst, budget=budget)
    c2, c3 = chi2_chi3(inst, budget=budget, families=families)
    v.chi = {"chi1": c1, "chi2": c2, "chi3": c3}

    # 2-regularity hypothesis ranges over zero-stratum directions
    zero_vs = [fam.v for fam in families if fam.stratum == "zero"]
    if not zero_vs:
        v.two_regularity = "vacuous"
        hypothesis_ok = True
    else:
        oks = [secondorder.two_regular(inst, vv) for vv in zero_vs]
        v.two_regularity = "verified_sampled" if all(oks) else "failed"
        hypothesis_ok = all(oks)
        v.diagnostics["two_regularity_sampled_directions"] = len(zero_vs)

    kv = secondorder._null_basis(inst.J_base, inst.tol.tol_rank).shape[1]
    desk = (inst.n <= DESK_DIM and max(kv - 1, 0) <= 3)
    v.diagnostics["search_quality"] = "desk" if desk else "heuristic"

    vals = [c1.value, c2.value, c3.value]
    min_chi = float(np.min(vals))
    v.diagnostics["min_chi"] = min_chi

    certified_all = all(getattr(c, "certified", True) for c in (c1, c2, c3))
    if min_chi > margin and certified_all:
        v.verdict = TILT_STABLE
        if np.isfinite(min_chi):
            v.bound_estimate = 1.0 / min_chi
        else:
            v.bound_estimate = 0.0
            v.diagnostics["infimum_not_attained"] = True
        if not desk:
            v.diagnostics["verdict_quality"] = "heuristic"
        return v

    worst = min((c for c in (c1, c2, c3)), key=lambda c: c.value)
    if worst.value < -margin and hypothesis_ok and worst.certificate:
        v.verdict = NOT_TILT_STABLE
        v.witness = {**worst.certificate, "value": worst.value,
                     "condition": f"necessary_in_kernel_{worst.name}"}
        return v
    if worst.value < -margin and not hypothesis_ok:
        v.inconclusive_reasons.append(
            "necessary-condition certificate found but the 2-regularity "
            "hypothesis failed on a sampled direction")
    elif not certified_all:
        v.inconclusive_reasons.append("a stratum minimum is not certified")
    else:
        v.inconclusive_reasons.append(
            f"minimum chi value {min_chi:.3e} inside the +/-{margin:.1e} band")
    return v


def analyze(inst, budget=200, with_simplified=True):
    """Full pointbased analysis; returns an AnalysisVerdict."""
    case, u_bar = classify_case(inst)
    if case == "out_of_kernel":
        try:
            verdict = out_kernel_check(inst, budget=budget)
        except DegenerateScaling as e:
            verdict = AnalysisVerdict(case="out_of_kernel", verdict=INCONCLUSIVE,
                                      u_bar=u_bar,
                                      inconclusive_reasons=[str(e)])
    else:
        verdict = in_kernel_verdict(inst, budget=budget)
    if with_simplified:
        verdict.simplified = simplified_check(inst, budget=budget)
    return verdict
