"""Machine-readable analysis reports (schema_version 1).

Reports are deterministic given instance + seed; the "timing" block is the
only nondeterministic field and is excluded from byte-identity
comparisons.
"""

from __future__ import annotations

import json

import numpy as np

from . import __version__


def _vec(x):
    if x is None:
        return None
    return [float(v) for v in np.asarray(x, dtype=float).ravel()]


def _chi_block(chi):
    if chi is None:
        return None
    cert = {}
    for key in ("u", "lam", "v", "w", "q"):
        if key in chi.certificate and chi.certificate[key] is not None:
            cert[key] = _vec(chi.certificate[key])
    return {
        "value": None if not np.isfinite(chi.value) else float(chi.value),
        "infinite": not bool(np.isfinite(chi.value)),
        "attained": bool(chi.attained),
        "certified": bool(chi.certified),
        "note": chi.note,
        "certificate": cert,
    }


def _simplified_block(s):
    if s is None:
        return None
    return {
        "passes": bool(s.passes),
        "threshold": float(s.threshold),
        "min_value": None if not np.isfinite(s.min_value) else float(s.min_value),
        "witnesses": [
            {"lam": _vec(w["lam"]), "u": _vec(w["u"]),
             "value": float(w["value"]), "direction": _vec(w.get("direction"))}
            for w in s.witnesses[:8]
        ],
    }


def _experiment_block(exp):
    if exp is None:
        return None
    return {
        "gamma": float(exp.gamma),
        "r_tilt": float(exp.r_tilt),
        "n_tilts": len(exp.tilts),
        "modulus_estimate": float(exp.modulus_estimate),
        "kappa_theory": None if exp.kappa_theory is None else float(exp.kappa_theory),
        "unstable": bool(exp.unstable),
        "degraded": bool(exp.degraded),
    }


def build_report(inst, verdict=None, experiment=None, falsifier=None,
                 timing=None, seed=None):
    rep = {
        "schema_version": 1,
        "tool_version": __version__,
        "instance": {"sha256": inst.sha256(), "n": inst.n, "m": inst.m,
                     "sigma": inst.sigma},
        "seed": inst.seed if seed is None else seed,
        "timing": timing or {},
    }
    if verdict is not None:
        chi = {name: _chi_block(verdict.chi.get(name))
               for name in ("chi1", "chi2", "chi3") if name in verdict.chi}
        rep.update({
            "case": verdict.case,
            "verdict": verdict.verdict,
            "bound_estimate": None if verdict.bound_estimate is None
            else float(verdict.bound_estimate),
            "chi1": chi.get("chi1"),
            "chi2": chi.get("chi2"),
            "chi3": chi.get("chi3"),
            "out_kernel_min": _chi_block(verdict.chi.get("out_kernel_min")),
            "simplified_test": _simplified_block(verdict.simplified),
            "two_regularity": verdict.two_regularity,
            "u_bar": _vec(verdict.u_bar),
            "lambda_bar": _vec(verdict.lam_bar),
            "witness": None if verdict.witness is None else {
                k: (_vec(v) if isinstance(v, np.ndarray) else v)
                for k, v in verdict.witness.items()},
            "inconclusive_reasons": list(verdict.inconclusive_reasons),
            "diagnostics": {k: v for k, v in verdict.diagnostics.items()
                            if isinstance(v, (str, bool, int, float))},
        })
    if experiment is not None:
        rep["empirical"] = _experiment_block(experiment)
    if falsifier is not None:
        rep["falsifier"] = {
            k: (_vec(v) if isinstance(v, np.ndarray) else
                (float(v) if isinstance(v, (np.floating, float, int)) else v))
            for k, v in falsifier.items()}
    return rep


def canonical_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def strip_timing(report):
    out = dict(report)
    out.pop("timing", None)
    return out


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(report))


def load_report(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
