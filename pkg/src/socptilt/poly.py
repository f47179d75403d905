"""Sparse multivariate polynomials with exact differentiation.

The whole verification pipeline restricts problem data to polynomials so
that gradients, Hessians, and second-order actions carry no
differentiation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DEGREE_DEFAULT = 6


def _canonical(terms, n):
    merged = {}
    for coeff, exps in terms:
        e = tuple(int(v) for v in exps)
        if len(e) != n:
            raise ValueError(f"exponent vector length {len(e)} != dimension {n}")
        if any(v < 0 for v in e):
            raise ValueError("exponents must be nonnegative")
        c = float(coeff)
        if not np.isfinite(c):
            raise ValueError("coefficients must be finite")
        merged[e] = merged.get(e, 0.0) + c
    out = tuple(sorted((e, c) for e, c in merged.items() if c != 0.0))
    return tuple((c, e) for e, c in out)


@dataclass(frozen=True)
class Polynomial:
    """Immutable polynomial: a canonical list of (coefficient, exponents)."""

    n: int
    terms: tuple  # tuple of (coeff, exponent-tuple), canonical & merged

    @classmethod
    def from_terms(cls, terms, n):
        return cls(n=int(n), terms=_canonical(terms, int(n)))

    @classmethod
    def zero(cls, n):
        return cls(n=int(n), terms=())

    @classmethod
    def from_dict(cls, doc, n):
        terms = [(t["c"], t["e"]) for t in doc["terms"]]
        return cls.from_terms(terms, n)

    def to_dict(self):
        return {"terms": [{"c": c, "e": list(e)} for c, e in self.terms]}

    @property
    def degree(self):
        return max((sum(e) for _, e in self.terms), default=0)

    def _quad_parts(self):
        """(const, linear, hessian) cache for degree <= 2 polynomials; the
        evaluation fast path used throughout the numeric loops."""
        cached = self.__dict__.get("_qp")
        if cached is not None:
            return cached
        if self.degree > 2:
            qp = None
        else:
            c0 = 0.0
            lin = np.zeros(self.n)
            H = np.zeros((self.n, self.n))
            for c, e in self.terms:
                deg = sum(e)
                if deg == 0:
                    c0 += c
                elif deg == 1:
                    lin[e.index(1)] += c
                else:
                    i, j = [k for k, p in enumerate(e) for _ in range(p)]
                    if i == j:
                        H[i, i] += 2.0 * c
                    else:
                        H[i, j] += c
                        H[j, i] += c
            qp = (c0, lin, H)
        object.__setattr__(self, "_qp", qp)
        return qp

    def value(self, x):
        """Evaluate at a point (n,) or a batch (..., n)."""
        x = np.asarray(x, dtype=float)
        qp = self._quad_parts()
        if qp is not None:
            c0, lin, H = qp
            quad = 0.5 * np.einsum("...i,ij,...j->...", x, H, x)
            return c0 + x @ lin + quad
        batch = x.ndim > 1
        out = np.zeros(x.shape[:-1]) if batch else 0.0
        for c, e in self.terms:
            t = c
            for i, p in enumerate(e):
                if p:
                    t = t * x[..., i] ** p if batch else t * x[i] ** p
            out = out + t
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        qp = self._quad_parts()
        if qp is not None:
            _, lin, H = qp
            return lin + H @ x
        g = np.zeros(self.n)
        for c, e in self.terms:
            for i, p in enumerate(e):
                if p == 0:
                    continue
                t = c * p
                for j, pj in enumerate(e):
                    pw = pj - 1 if j == i else pj
                    if pw:
                        t *= x[j] ** pw
                g[i] += t
        return g

    def hessian(self, x):
        """Exact Hessian, built symmetric entry by entry."""
        x = np.asarray(x, dtype=float)
        qp = self._quad_parts()
        if qp is not None:
            return qp[2].copy()
        H = np.zeros((self.n, self.n))
        for c, e in self.terms:
            for i, pi in enumerate(e):
                if pi == 0:
                    continue
                for j in range(i, self.n):
                    pj = e[j]
                    if j == i:
                        if pi < 2:
                            continue
                        t = c * pi * (pi - 1)
                    else:
                        if pj == 0:
                            continue
                        t = c * pi * pj
                    for k, pk in enumerate(e):
                        pw = pk - (2 if (k == i and j == i) else (1 if k in (i, j) else 0))
                        if pw:
                            t *= x[k] ** pw
                    H[i, j] += t
                    if j != i:
                        H[j, i] = H[i, j]
        return 0.5 * (H + H.T)


def quadratic(n, Q=None, lin=None, const=0.0):
    """Polynomial 1/2 x'Qx + lin'x + const; convenience builder."""
    terms = []
    if const:
        terms.append((const, (0,) * n))
    if lin is not None:
        lin = np.asarray(lin, dtype=float)
        for i in range(n):
            if lin[i]:
                e = [0] * n
                e[i] = 1
                terms.append((lin[i], tuple(e)))
    if Q is not None:
        Q = np.asarray(Q, dtype=float)
        for i in range(n):
            for j in range(i, n):
                c = 0.5 * Q[i, j] if i == j else 0.5 * (Q[i, j] + Q[j, i])
                if c:
                    e = [0] * n
                    e[i] += 1
                    e[j] += 1
                    terms.append((c, tuple(e)))
    return Polynomial.from_terms(terms, n)
