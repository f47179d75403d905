"""Deterministic sphere coverings used by the search loops.

Coverings are prefix-stable: asking for more points extends the list, so
search minima are monotone in the budget.  Standard axes and pair
diagonals come first so that structurally special directions are hit
exactly.
"""

from __future__ import annotations

import numpy as np


def _axes_and_diagonals(dim):
    pts = []
    eye = np.eye(dim)
    for i in range(dim):
        pts.append(eye[i])
        pts.append(-eye[i])
    for i in range(dim):
        for j in range(i + 1, dim):
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                pts.append((si * eye[i] + sj * eye[j]) / np.sqrt(2.0))
    return pts


def _circle(n):
    thetas = np.arange(n) * (2.0 * np.pi / n)
    return [np.array([np.cos(t), np.sin(t)]) for t in thetas]


def _fibonacci_sphere(n):
    out = []
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    for i in range(n):
        z = 1.0 - (2.0 * i + 1.0) / n
        r = np.sqrt(max(0.0, 1.0 - z * z))
        t = 2.0 * np.pi * i / golden
        out.append(np.array([np.cos(t) * r, np.sin(t) * r, z]))
    return out


def sphere_covering(dim, n, seed=0, include_axes=True):
    """n unit vectors in R^dim, deterministic given the seed."""
    if dim <= 0:
        return []
    if dim == 1:
        return [np.array([1.0]), np.array([-1.0])][: max(n, 1)]
    pts = _axes_and_diagonals(dim) if include_axes else []
    rest = max(0, n - len(pts))
    if rest > 0:
        if dim == 2:
            pts += _circle(rest)
        elif dim == 3:
            pts += _fibonacci_sphere(rest)
        else:
            rng = np.random.default_rng(seed)
            g = rng.standard_normal((rest, dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            pts += list(g)
    return pts[:n] if n < len(pts) else pts


def half_circle_angles(n):
    """Angles covering [0, pi); antipodal pairs identified."""
    return np.arange(n) * (np.pi / n)
