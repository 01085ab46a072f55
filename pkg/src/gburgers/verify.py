"""Numerical verification harness: PDE residuals on grids, finite-difference
cross-checks of symbolic derivatives, and kernels of sampled linear systems."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
import sympy as sp

from .expr import DomainBox, differentiate, evaluate_array, jet_atoms, t, x

PDE_TOL = 1e-8
RANK_TOL = 1e-10
MAX_DENOMINATOR = 64
MAX_EXCLUDED = 0.2


class ExcessiveExclusion(RuntimeError):
    pass


@dataclass
class ResidualReport:
    max_abs: float
    mean_abs: float
    grid: str
    points: int
    excluded: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs < self.tolerance

    def to_dict(self) -> dict:
        return {"max_abs": self.max_abs, "mean_abs": self.mean_abs, "grid": self.grid,
                "points": self.points, "excluded": self.excluded,
                "tolerance": self.tolerance, "passed": self.passed}

    @classmethod
    def from_dict(cls, d: dict) -> "ResidualReport":
        return cls(d["max_abs"], d["mean_abs"], d["grid"], d["points"], d["excluded"], d["tolerance"])


def burgers_operator(f, sol) -> sp.Expr:
    """u_t + u*u_x + f*u_xx for a concrete u(t,x)."""
    sol = sp.sympify(sol)
    return (sp.diff(sol, t) + sol * sp.diff(sol, x) + sp.sympify(f) * sp.diff(sol, x, 2))


def grid_residual(expr, box: DomainBox, *, n: int = 20, tol: float = PDE_TOL,
                  params: Mapping | None = None) -> ResidualReport:
    """Evaluate an expression that should vanish on an n-by-n grid over (t, x)."""
    expr = sp.sympify(expr)
    if params:
        expr = expr.xreplace({sp.Symbol(k, real=True) if isinstance(k, str) else k: sp.Float(val)
                              for k, val in params.items()})
    pts = box.grid(n)
    total = n * n
    vals, bad, _ = evaluate_array(expr, pts)
    excluded = int(bad.sum()) + (total - len(bad))
    if excluded > MAX_EXCLUDED * total:
        raise ExcessiveExclusion(f"{excluded} of {total} grid points excluded")
    good = np.abs(vals[~bad])
    return ResidualReport(float(good.max()) if good.size else 0.0,
                          float(good.mean()) if good.size else 0.0,
                          f"{n}x{n} on {box.to_text()}", total, excluded, tol)


def pde_residual(f, sol, box: DomainBox | None = None, *, n: int = 20, tol: float = PDE_TOL,
                 params: Mapping | None = None) -> ResidualReport:
    """Grid check of u_t + u*u_x + f*u_xx = 0."""
    return grid_residual(burgers_operator(f, sol), box or DomainBox(), n=n, tol=tol, params=params)


# ---------------------------------------------------------------------------
# kernels


@dataclass
class NullspaceResult:
    vectors: list
    exact: bool
    residual: float
    singular_values: tuple = ()


def _rref(K: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    K = K.copy()
    rows, cols = K.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(K[r:, c])))
        if abs(K[piv, c]) < tol:
            continue
        K[[r, piv]] = K[[piv, r]]
        K[r] /= K[r, c]
        for i in range(rows):
            if i != r:
                K[i] -= K[i, c] * K[r]
        r += 1
    return K[:r]


def nullspace(A, *, rank_tol: float = RANK_TOL, max_denominator: int = MAX_DENOMINATOR,
              verify_tol: float = PDE_TOL) -> NullspaceResult:
    """Kernel of a sampled linear system, rounded to small rationals.

    The float kernel from the SVD is brought to reduced row-echelon form so
    that its entries are the small rationals one expects from exact data.
    Denominators up to ``max_denominator`` are tried first; larger ones are
    admitted only when they match the floats to 1e-11.  Any rounding must
    keep ``|A v|`` below ``verify_tol`` relative to the largest singular
    value."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if A.size == 0:
        return NullspaceResult([tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)], True, 0.0)
    _, s, vt = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rank_tol * smax)) if smax > 0 else 0
    kernel = vt[rank:]
    if kernel.shape[0] == 0:
        return NullspaceResult([], True, 0.0, tuple(s))
    echelon = _rref(kernel)
    scale = max(1.0, smax)
    # small denominators first; larger ones only if they reproduce the floats
    for cap in (max_denominator, 1000, 10**5, 10**7):
        if cap < max_denominator:
            continue
        rounded = [tuple(Fraction(val).limit_denominator(cap) for val in row) for row in echelon]
        R = np.array([[float(c) for c in row] for row in rounded])
        if cap > max_denominator and np.max(np.abs(R - echelon)) > 1e-11 * max(1.0, np.max(np.abs(R))):
            continue
        resid = float(np.max(np.linalg.norm(A @ R.T, axis=0))) / scale
        if resid < verify_tol:
            return NullspaceResult(rounded, True, resid, tuple(s))
    raw = float(np.max(np.linalg.norm(A @ echelon.T, axis=0))) / scale
    return NullspaceResult([tuple(row) for row in echelon], False, raw, tuple(s))


# ---------------------------------------------------------------------------
# finite differences


@dataclass
class FDReport:
    max_deviation: float
    points: int
    excluded: int


def fd_check(e, z: sp.Symbol, box: DomainBox | None = None, *, step: float = 1e-6,
             n: int = 100) -> FDReport:
    """Central differences against the symbolic derivative; the deviation is
    |FD - d| / (1 + |d|) maximised over quasi-random points."""
    e = sp.sympify(e)
    if jet_atoms(e):
        raise ValueError("finite differences need a concrete h; substitute one first")
    d = differentiate(e, z, canon=False)
    names = sorted({s.name for s in (e.free_symbols | d.free_symbols | {z})})
    box = (box or DomainBox()).extended(names)
    pts = box.sample(n, names)
    plus = dict(pts)
    minus = dict(pts)
    plus[z.name] = pts[z.name] + step
    minus[z.name] = pts[z.name] - step
    fp, bp, _ = evaluate_array(e, plus)
    fm, bm, _ = evaluate_array(e, minus)
    dv, bd, _ = evaluate_array(d, pts)
    bad = bp | bm | bd
    fd = (fp - fm) / (2 * step)
    dev = np.abs(fd - dv) / (1 + np.abs(dv))
    dev = dev[~bad]
    return FDReport(float(dev.max()) if dev.size else 0.0, len(bad), int(bad.sum()))


__all__ = [
    "ResidualReport", "pde_residual", "grid_residual", "burgers_operator", "nullspace",
    "NullspaceResult", "fd_check", "FDReport", "ExcessiveExclusion",
]
