"""Behavioral cross-checks: numerical tilted minimization, empirical tilt
modulus, a sampling falsifier for the neighborhood second-order condition,
and a falsifier for the declared subregularity modulus.

Everything here can only falsify; dense grids are honest only at desk
scale (n <= 4), above which the routines run in heuristic mode and say so.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conelp, secondorder
from .cone import (PointClass, classify, cone_contains, hat,
                   project_onto_cone, project_onto_cone_batch)
from .covering import sphere_covering

DESK_N = 4


def cone_distance(q):
    return float(np.linalg.norm(np.asarray(q, dtype=float) - project_onto_cone(q)))


def restore_feasibility(inst, x, max_iter=50, tol=None):
    """Gauss-Newton restoration onto the constraint set: correct x by
    least-squares steps on the cone violation of g(x).  Falls back to a
    pullback toward the (feasible) base point when the Jacobian step
    stalls.  Returns (x_restored, converged)."""
    tol = inst.tol.feas if tol is None else tol
    x = np.asarray(x, dtype=float).copy()
    for _ in range(max_iter):
        gx = inst.g_value(x)
        r = project_onto_cone(gx) - gx
        if np.linalg.norm(r) <= tol:
            return x, True
        J = inst.g_jacobian(x)
        d, *_ = np.linalg.lstsq(J, r, rcond=None)
        step = 1.0
        improved = False
        base = np.linalg.norm(r)
        for _ in range(12):
            xc = x + step * d
            gc = inst.g_value(xc)
            if np.linalg.norm(project_onto_cone(gc) - gc) < base * (1.0 - 0.1 * step):
                x = xc
                improved = True
                break
            step *= 0.5
        if not improved:
            x = x + 0.5 * (inst.x_base - x)
    gx = inst.g_value(x)
    return x, bool(np.linalg.norm(project_onto_cone(gx) - gx) <= tol)


def _feasible_seeds(inst, gamma, seed=0):
    """Deterministic feasible seed set inside the localization ball."""
    n = inst.n
    if n <= DESK_N:
        per_axis = {1: 41, 2: 15, 3: 9, 4: 5}[n]
        axes = [np.linspace(-gamma, gamma, per_axis) for _ in range(n)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        pts = inst.x_base + grid
    else:
        rng = np.random.default_rng(seed)
        pts = inst.x_base + gamma * rng.uniform(-1, 1, size=(600, n))
    G = inst.g_value(pts)
    viol = np.linalg.norm(G - project_onto_cone_batch(G), axis=-1)
    feas = pts[viol <= inst.tol.feas]
    out = [inst.x_base.copy()]
    for p in pts[np.argsort(viol)][:60]:
        q, ok = restore_feasibility(inst, p)
        if ok and np.linalg.norm(q - inst.x_base) <= gamma * (1 + 1e-9):
            out.append(q)
    if len(feas):
        keep = feas[np.linalg.norm(feas - inst.x_base, axis=1) <= gamma]
        out.extend(list(keep))
    return np.unique(np.round(np.array(out), 12), axis=0)


def solve_tilted(inst, v_star, gamma, seeds=None, max_iter=500, step_tol=1e-10):
    """Approximate global minimizer of f(x) - <v_star, x> over the
    constraint set intersected with the gamma-ball around the base point.

    Feasible-grid seeding followed by projected-gradient descent with
    Gauss-Newton feasibility restoration; terminates when the accepted
    step drops below step_tol.  Returns (x, info)."""
    v_star = np.asarray(v_star, dtype=float)
    if gamma <= 0:
        raise ValueError("gamma must be positive")

    def obj(x):
        return float(inst.f_value(x) - v_star @ x)

    def ball_clip(x):
        d = x - inst.x_base
        nd = np.linalg.norm(d)
        if nd > gamma:
            return inst.x_base + d * (gamma / nd)
        return x

    if seeds is None:
        seeds = _feasible_seeds(inst, gamma, seed=inst.seed)
    vals = np.array([inst.f_value(s) for s in seeds]) - seeds @ v_star
    order = np.argsort(vals)
    starts = [seeds[i] for i in order[:6]]

    best_x, best_v = None, np.inf
    degraded = False
    for x0 in starts:
        x = np.asarray(x0, dtype=float).copy()
        fx = obj(x)
        t = 1.0
        converged = False
        for _ in range(max_iter):
            g = inst.f.gradient(x) - v_star
            moved = False
            while t >= 1e-14:
                y = x - t * g
                y = ball_clip(y)
                y, okr = restore_feasibility(inst, y)
                y = ball_clip(y)
                if okr and obj(y) < fx - 1e-12 * (1 + abs(fx)):
                    stepn = np.linalg.norm(y - x)
                    x, fx = y, obj(y)
                    t = min(t * 1.5, 1e3)
                    moved = True
                    if stepn < step_tol:
                        converged = True
                    break
                t *= 0.5
            if not moved or converged:
                converged = converged or not moved
                break
        if not converged:
            degraded = True
        if fx < best_v:
            best_x, best_v = x, fx
    gx = inst.g_value(best_x)
    info = {
        "value": best_v,
        "feasibility": cone_distance(gx),
        "degraded": degraded,
    }
    return best_x, info


@dataclass
class TiltExperiment:
    gamma: float
    r_tilt: float
    tilts: list = field(default_factory=list)        # tilt vectors
    solutions: list = field(default_factory=list)    # matched minimizers
    modulus_estimate: float = 0.0
    kappa_theory: float | None = None
    unstable: bool = False
    degraded: bool = False

    def worst_pair(self):
        worst = (0.0, None)
        for i in range(len(self.tilts)):
            for j in range(i + 1, len(self.tilts)):
                dv = np.linalg.norm(self.tilts[i] - self.tilts[j])
                if dv < 1e-15:
                    continue
                r = np.linalg.norm(self.solutions[i] - self.solutions[j]) / dv
                if r > worst[0]:
                    worst = (r, (i, j))
        return worst


def _cross_pattern(n, r_tilt, grid_size):
    half = (grid_size - 1) // 2
    dirs = []
    eye = np.eye(n)
    for i in range(n):
        dirs.append(eye[i])
    for i in range(n):
        for j in range(i + 1, n):
            dirs.append((eye[i] + eye[j]) / np.sqrt(2.0))
            dirs.append((eye[i] - eye[j]) / np.sqrt(2.0))
    tilts = [np.zeros(n)]
    for d in dirs:
        for k in range(1, half + 1):
            for s in (1.0, -1.0):
                tilts.append(s * (k / half) * r_tilt * d)
    return tilts


def empirical_tilt(inst, gamma, r_tilt=1e-3, grid_size=11, kappa_theory=None,
                   witness=None):
    """Empirical tilt modulus over a cross-pattern tilt grid (axes and pair
    diagonals, grid_size points per line).  When a not-tilt-stable witness
    is supplied, additionally probes across the predicted tie tilts, where
    jump discontinuities of the argmin live."""
    seeds = _feasible_seeds(inst, gamma, seed=inst.seed)
    exp = TiltExperiment(gamma=gamma, r_tilt=r_tilt, kappa_theory=kappa_theory)
    for v in _cross_pattern(inst.n, r_tilt, grid_size):
        x, info = solve_tilted(inst, v, gamma, seeds=seeds)
        exp.degraded = exp.degraded or info["degraded"]
        exp.tilts.append(v)
        exp.solutions.append(x)
    if witness is not None:
        for v, x in probe_instability(inst, witness, gamma, seeds=seeds):
            exp.tilts.append(v)
            exp.solutions.append(x)
    exp.modulus_estimate = exp.worst_pair()[0]
    exp.unstable = exp.modulus_estimate > 1e3
    return exp


def probe_instability(inst, witness, gamma, seeds=None, t_rel=0.25):
    """Solutions bracketing an argmin jump predicted by a certificate.

    Builds the critical path x_t = x_base + t v + t^2 w, the matching tie
    tilt grad f(x_t) + Jg(x_t)' lam_t, and bisects a 1-parameter tilt
    family across the tie in the witness direction u."""
    u = np.asarray(witness.get("u"), dtype=float)
    if seeds is None:
        seeds = _feasible_seeds(inst, gamma, seed=inst.seed)
    out = []
    v = witness.get("v")
    w = witness.get("w")
    lam = witness.get("lam")
    q = witness.get("q")
    t = t_rel * gamma
    if v is not None and w is not None and q is not None and \
            np.linalg.norm(np.asarray(q)) > 1e-12:
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        lam = np.asarray(lam, dtype=float)
        q = np.asarray(q, dtype=float)
        alpha = np.linalg.norm(lam) / np.linalg.norm(q)
        x_t = inst.x_base + t * v + t * t * w
        x_t, _ = restore_feasibility(inst, x_t)
        g_t = inst.g_value(x_t)
        if np.linalg.norm(g_t) > 1e-14:
            lam_t = alpha * hat(g_t) / (t * t)
        else:
            lam_t = lam
        base_tilt = inst.f.gradient(x_t) + inst.g_jacobian(x_t).T @ lam_t
    else:
        base_tilt = np.zeros(inst.n)

    def minimize(vt):
        x, _ = solve_tilted(inst, vt, gamma, seeds=seeds)
        return x

    smax = max(1e-6, 0.05 * t)
    lo, hi = -smax, smax
    x_lo = minimize(base_tilt + lo * u)
    x_hi = minimize(base_tilt + hi * u)
    out.append((base_tilt + lo * u, x_lo))
    out.append((base_tilt + hi * u, x_hi))
    if np.linalg.norm(x_hi - x_lo) < 1e-6:
        return out
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        x_mid = minimize(base_tilt + mid * u)
        if np.linalg.norm(x_mid - x_lo) < np.linalg.norm(x_mid - x_hi):
            lo, x_lo = mid, x_mid
        else:
            hi, x_hi = mid, x_mid
        if hi - lo < 1e-14 * (1 + smax):
            break
    out.append((base_tilt + lo * u, x_lo))
    out.append((base_tilt + hi * u, x_hi))
    return out


# ---------------------------------------------------------------------------
# falsifiers
# ---------------------------------------------------------------------------

def _tangent_residual_parts(cls, gx, J, u):
    q = J @ u
    if cls is PointClass.ZERO:
        return float(np.linalg.norm(q[1:]) - q[0])
    if cls is PointClass.INTERIOR:
        return -np.inf
    gr = gx[1:]
    return float(gr @ q[1:]) / float(np.linalg.norm(gr)) - float(q[0])


def _tangent_residual_at(inst, x, u):
    gx = inst.g_value(x)
    J = inst.g_jacobian(x)
    cls = classify(gx, inst.tol.tol_zero, inst.tol.tol_cone)
    return _tangent_residual_parts(cls, gx, J, u)


def neighborhood_falsify(inst, kappa, eta, samples=10000, seed=None):
    """Search for a violation of the neighborhood second-order bound: a
    tuple (x, x*, u, lam) with x feasible near the base point, small x*,
    u a unit critical direction at (x, x* - grad f(x)), lam in the
    directional argmax capped by the sigma-ball, and curvature-augmented
    form value below 1/kappa.  Returns the first witness or None."""
    if kappa <= 0 or eta <= 0:
        raise ValueError("kappa and eta must be positive")
    seed = inst.seed if seed is None else seed
    rng = np.random.default_rng(seed + 101)
    target = 1.0 / kappa
    n = inst.n
    sigma = inst.sigma
    checked = 0
    vertex_budget = min(150, samples // 4 + 1)  # base-point stratum duplicates
    slice_cache = {}                            # the pointbased analysis
    lp_cache = {}
    i = 0
    while checked < samples and i < 20 * samples:
        i += 1
        mode = i % 4
        if mode == 0:
            if vertex_budget <= 0:
                continue
            x = inst.x_base.copy()
        else:
            radius = eta * (0.1 ** (mode - 1))
            x = inst.x_base + radius * rng.standard_normal(n)
            x, ok = restore_feasibility(inst, x)
            if not ok:
                continue
        gx = inst.g_value(x)
        Jx = inst.g_jacobian(x)
        cls = classify(gx, inst.tol.tol_zero, inst.tol.tol_cone)
        if cls is PointClass.BOUNDARY and abs(gx[0]) <= 10 * inst.tol.tol_zero:
            continue              # numerically vertex: curvature undefined
        grad_fx = inst.f.gradient(x)

        lam_candidates = []
        if cls is PointClass.INTERIOR:
            lam_candidates.append(np.zeros(1 + inst.m))
        elif cls is PointClass.BOUNDARY:
            gen = hat(gx)
            a_star = -float((Jx.T @ gen) @ grad_fx) / max(
                float(np.linalg.norm(Jx.T @ gen)) ** 2, 1e-300)
            for fac in (1.0, 0.5, 2.0):
                a = a_star * fac
                if a > 0:
                    lam_candidates.append(a * gen)
        else:  # vertex stratum
            sl = conelp.build_slice(Jx, -grad_fx, inst.tol.tol_rank)
            okf, lam0 = conelp.feasibility(sl)
            if okf:
                lam_candidates.append(lam0)
            lam_candidates.append(np.zeros(1 + inst.m))

        x_key = tuple(np.round(x, 13))
        for lam in lam_candidates:
            y = Jx.T @ lam                     # x* - grad f(x)
            x_star = grad_fx + y
            if np.linalg.norm(x_star) > eta:
                continue
            if np.linalg.norm(lam) > sigma * np.linalg.norm(y) + 1e-12:
                continue
            # sample unit critical directions at (x, y)
            if np.linalg.norm(y) > 1e-12:
                W = conelp._orth_complement(y, n)
            else:
                W = np.eye(n)
            if W.shape[1] == 0:
                continue
            if cls is PointClass.ZERO:
                key = (x_key, tuple(np.round(y, 14)))
                if key not in slice_cache:
                    slice_cache[key] = conelp.build_slice(Jx, y,
                                                          inst.tol.tol_rank)
                sl_x = slice_cache[key]
            else:
                sl_x = None
            hess_cache = {}
            for s in sphere_covering(W.shape[1], 16, seed=seed + i):
                u = W @ s
                if _tangent_residual_parts(cls, gx, Jx, u) > 1e-9:
                    continue
                checked += 1
                if cls is PointClass.ZERO:
                    vertex_budget -= 1
                lam_use, ok = _directional_argmax_at(inst, x, u, y, sigma, cls,
                                                     lam, sl_x=sl_x,
                                                     lp_cache=lp_cache)
                if not ok:
                    continue
                key = tuple(np.round(lam_use, 12))
                if key not in hess_cache:
                    Hmat = secondorder.curvature_from_parts(
                        lam_use, gx, Jx, inst.tol.tol_zero, inst.tol.tol_cone)
                    hess_cache[key] = inst.hess_lag(lam_use, x) + Hmat
                val = float(u @ hess_cache[key] @ u)
                if val < target:
                    return {"x": x, "x_star": x_star, "u": u, "lam": lam_use,
                            "value": val, "stratum": cls.value}
                if checked >= samples:
                    return None
    return None


def _directional_argmax_at(inst, x, u, y, sigma, cls, lam_seed, sl_x=None,
                           lp_cache=None):
    """The directional multiplier at a nearby point, capped by the
    sigma-ball.  Off-vertex strata have singleton multiplier sets; the
    vertex stratum requires the cone-LP solver."""
    if cls is PointClass.INTERIOR:
        return np.zeros(1 + inst.m), True
    if cls is PointClass.BOUNDARY:
        # the multiplier set is a single point of the normal ray
        if np.linalg.norm(lam_seed) <= sigma * np.linalg.norm(y) + 1e-12:
            return lam_seed, True
        return None, False
    d = inst.second_order_g(u, u, x)   # curvature term vanishes at the vertex
    sl = sl_x if sl_x is not None else conelp.build_slice(
        inst.g_jacobian(x), y, inst.tol.tol_rank)
    bound = sigma * np.linalg.norm(y)
    key = None
    if lp_cache is not None:
        key = (id(sl), tuple(np.round(d, 12)), round(bound, 12))
        if key in lp_cache:
            return lp_cache[key]
    capped = conelp.maximize_linear(sl, d, bound=bound, seed=inst.seed)
    out = (None, False)
    if capped.status == "optimal":
        if bound - np.linalg.norm(capped.argmax) > 1e-7 * (1.0 + bound):
            # cap not binding: the capped maximizer is the true argmax
            out = (capped.argmax, True)
        else:
            full = conelp.maximize_linear(sl, d, seed=inst.seed)
            if full.status == "optimal" and capped.value >= full.value - 1e-8:
                out = (capped.argmax, True)
    if lp_cache is not None:
        lp_cache[key] = out
    return out


def mscq_falsify(inst, samples=10000, seed=None, grid_per_axis=21):
    """Search for a certified violation of the declared subregularity
    modulus: a point x where even a dense feasible-point grid proves
    dist(x; constraint set) > sigma * dist(g(x); cone).  Restoration
    distances alone only upper-bound the left side, so they never certify
    by themselves."""
    seed = inst.seed if seed is None else seed
    rng = np.random.default_rng(seed + 202)
    n = inst.n
    if n > DESK_N:
        return None  # certification needs desk-scale grids
    sigma = inst.sigma
    for i in range(samples):
        radius = 0.3 * (0.1 ** (i % 3))
        x = inst.x_base + radius * rng.standard_normal(n)
        d_cone = cone_distance(inst.g_value(x))
        if d_cone <= 1e-12:
            continue
        xr, ok = restore_feasibility(inst, x)
        upper = np.linalg.norm(xr - x) if ok else np.inf
        if upper <= sigma * d_cone * 1.05:
            continue
        R = sigma * d_cone
        axes = [np.linspace(-R, R, grid_per_axis) for _ in range(n)]
        grid = x + np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        G = inst.g_value(grid)
        dists = np.linalg.norm(G - project_onto_cone_batch(G), axis=-1)
        h = 2.0 * R / (grid_per_axis - 1)
        Jnorms = [np.linalg.norm(inst.g_jacobian(p), 2)
                  for p in grid[:: max(1, len(grid) // 16)]]
        L = 2.0 * max(Jnorms + [1e-6])
        band = L * h * np.sqrt(n) / 2.0
        if np.all(dists > band):
            return {"x": x, "cone_dist": d_cone, "radius_certified": R,
                    "grid_h": h, "band": band,
                    "restoration_upper_bound": upper}
    return None
