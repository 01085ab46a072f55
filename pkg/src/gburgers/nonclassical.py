"""Reduction operators Q = tau d_t + xi d_x + eta d_u of u_t + u u_x + f u_xx = 0.

Regular operators are gauged to tau = 1, singular ones to tau = 0, xi = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import sympy as sp

from . import equiv
from .expr import (
    DomainBox, InconclusiveZeroTest, ZeroStatus, canonical, evaluate_array, freeze_jets, is_zero, parse, resolve_abs, t,
    theta, u, x,
)
from .lie import VectorField
from .verify import ResidualReport, grid_residual, pde_residual

UT, UX, UXX = sp.symbols("u_t u_x u_xx", real=True)
U_RANGE = (-1.5, 1.5)


class NotRegular(ValueError):
    pass


class DegenerateTriple(ValueError):
    pass


class OperatorFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ReductionOperator:
    tau: sp.Expr
    xi: sp.Expr
    eta: sp.Expr

    def __post_init__(self):
        for n in ("tau", "xi", "eta"):
            object.__setattr__(self, n, sp.sympify(getattr(self, n)))
        if self.tau == 0 and self.xi == 0:
            raise ValueError("tau and xi cannot both vanish")

    @classmethod
    def regular(cls, xi, eta) -> "ReductionOperator":
        return cls(sp.S.One, xi, eta)

    @classmethod
    def singular(cls, eta) -> "ReductionOperator":
        return cls(sp.S.Zero, sp.S.One, eta)

    @classmethod
    def from_field(cls, X: VectorField) -> "ReductionOperator":
        return cls(*X.components()).normalised()

    @property
    def is_regular(self) -> bool:
        return self.tau != 0

    def normalised(self) -> "ReductionOperator":
        """Divide by tau (regular) or by xi (singular)."""
        if self.tau != 0:
            k = self.tau
            return ReductionOperator(sp.S.One, canonical(self.xi / k), canonical(self.eta / k))
        return ReductionOperator(sp.S.Zero, sp.S.One, canonical(self.eta / self.xi))

    def xi_split(self) -> tuple[sp.Expr, sp.Expr]:
        """(xi^1, xi^0) with xi = xi^1 u + xi^0; raises if xi is not linear in u."""
        q = self.normalised()
        if sp.diff(q.xi, u, 2) != 0 and canonical(sp.diff(q.xi, u, 2)) != 0:
            raise NotRegular("xi is not linear in u")
        xi1 = canonical(sp.diff(q.xi, u))
        return xi1, canonical(q.xi - xi1 * u)

    def __str__(self) -> str:
        return f"({self.tau})*d_t + ({self.xi})*d_x + ({self.eta})*d_u"


# ---------------------------------------------------------------------------
# conditional invariance


def _D(e, var, jets):
    """Total derivative in t or x on expressions in (t, x, u, u_t, u_x, u_xx)."""
    ut, ux, uxx, utx = jets
    out = sp.diff(e, var) + (ut if var is t else ux) * sp.diff(e, u)
    if var is x:
        out += uxx * sp.diff(e, UX) + utx * sp.diff(e, UT)
    return out


def conditional_invariance_residual(f, Q: ReductionOperator) -> sp.Expr:
    """Second prolongation of Q applied to the equation, restricted to the
    equation and to the invariant surface condition; a rational function of
    (t, x, u, u_x)."""
    q = Q.normalised()
    if not q.is_regular:
        raise NotRegular("use check_singular for operators with tau = 0")
    f = sp.sympify(f)
    xi, eta = q.xi, q.eta
    utx = sp.Symbol("u_tx", real=True)
    jets = (UT, UX, UXX, utx)
    eta_x = _D(eta, x, jets) - UX * _D(xi, x, jets)
    eta_t = _D(eta, t, jets) - UX * _D(xi, t, jets)
    eta_xx = _D(eta_x, x, jets) - UXX * _D(xi, x, jets)
    expr = eta_t + eta * UX + u * eta_x + (sp.diff(f, t) + xi * sp.diff(f, x)) * UXX + f * eta_xx
    expr = expr.xreplace({UT: eta - xi * UX})
    expr = expr.xreplace({UXX: (xi * UX - u * UX - eta) / f})
    if expr.has(utx):
        raise OperatorFailure("mixed derivative survived the substitution")
    return expr


def ux_coefficients(expr: sp.Expr) -> list[sp.Expr]:
    num = sp.numer(sp.together(expr))
    return sp.Poly(sp.expand(num), UX).all_coeffs()


def check_conditional_invariance(f, Q: ReductionOperator, box: DomainBox | None = None) -> bool:
    """Whether Q is a reduction operator of the equation with coefficient f."""
    box = (box or DomainBox()).extended(["u"], default=U_RANGE)
    f = resolve_abs(parse(f) if isinstance(f, str) else sp.sympify(f), box)
    resid = conditional_invariance_residual(f, Q)
    try:
        coeffs = ux_coefficients(resid)
    except sp.PolynomialError:
        coeffs = [resid]
    for c in coeffs:
        status = is_zero(c, box)
        if status is ZeroStatus.INCONCLUSIVE:
            raise InconclusiveZeroTest(str(c)[:200])
        if not status.zero:
            return False
    return True


def regular_case(Q: ReductionOperator) -> sp.Expr:
    """xi^1 of a regular reduction operator; one of 1, -1/2, 0."""
    xi1, _ = Q.xi_split()
    if xi1 not in (sp.S.One, sp.Rational(-1, 2), sp.S.Zero):
        raise NotRegular(f"xi^1 = {xi1} is not admissible")
    return xi1


# ---------------------------------------------------------------------------
# xi^1 = 1


Q1 = ReductionOperator.regular(u, sp.S.Zero)


def q1_invariant_solutions(f, box: DomainBox | None = None) -> list[tuple[sp.Expr, ResidualReport | None]]:
    """The two families of Q^1-invariant solutions, each checked: a symbolic
    zero residual, plus a grid residual when f is concrete."""
    c, c1, c2 = sp.symbols("c c1 c2", real=True)
    fexpr = parse(f) if isinstance(f, str) else sp.sympify(f)
    box = box or DomainBox()
    out = []
    linear = (x + c1) / (t + c2), {c1: sp.Rational(1, 3), c2: sp.Rational(1, 2)}
    for fam, vals in ((c, {c: sp.Rational(3, 2)}), linear):
        resid = canonical(sp.diff(fam, t) + fam * sp.diff(fam, x) + fexpr * sp.diff(fam, x, 2))
        if resid != 0:
            raise OperatorFailure(f"family {fam} does not solve the equation")
        report = None if freeze_jets(fexpr)[1] else pde_residual(resolve_abs(fexpr, box), fam.xreplace(vals), box)
        out.append((fam, report))
    return out


# ---------------------------------------------------------------------------
# xi^1 = -1/2: the Burgers equation and triples of heat solutions


def _det(cols: Sequence[Sequence[sp.Expr]]) -> sp.Expr:
    return sp.Matrix([list(r) for r in zip(*cols)]).det()


@dataclass(frozen=True)
class HeatTriple:
    v: tuple

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(parse(vi) if isinstance(vi, str) else sp.sympify(vi) for vi in self.v))
        if len(self.v) != 3:
            raise ValueError("a triple needs three functions")

    @classmethod
    def from_text(cls, text: str) -> "HeatTriple":
        return cls(tuple(p.strip() for p in text.split(";")))

    def derivative(self, k: int) -> tuple:
        return tuple(sp.diff(vi, x, k) for vi in self.v)

    def wronskian(self) -> sp.Expr:
        return sp.simplify(_det([self.v, self.derivative(1), self.derivative(2)]))

    def wronskian_x(self) -> sp.Expr:
        return sp.simplify(_det([self.derivative(1), self.derivative(2), self.derivative(3)]))

    def validate(self, box: DomainBox | None = None) -> None:
        box = box or DomainBox()
        for vi in self.v:
            if not is_zero(sp.diff(vi, t) + sp.diff(vi, x, 2), box).zero:
                raise DegenerateTriple(f"{vi} does not solve v_t + v_xx = 0")
        W = self.wronskian()
        if W == 0:
            raise DegenerateTriple("the Wronskian vanishes identically")
        vals, bad, _ = evaluate_array(W, box.grid(20))
        if bad.any() or np.min(np.abs(vals)) < 1e-10:
            raise DegenerateTriple("the Wronskian vanishes on the domain")


@dataclass(frozen=True)
class WronskianCoefficients:
    xi0: sp.Expr
    eta1: sp.Expr
    eta0: sp.Expr


def wronskian_coefficients(triple: HeatTriple) -> WronskianCoefficients:
    W = triple.wronskian()
    v, v2, v3 = triple.v, triple.derivative(2), triple.derivative(3)
    xi0 = canonical(sp.diff(W, x) / W)
    eta1 = canonical(_det([v, v2, v3]) / W)
    eta0 = canonical(-2 * triple.wronskian_x() / W)
    return WronskianCoefficients(xi0, eta1, eta0)


def half_case_operator(f, xi0, eta1, eta0) -> ReductionOperator:
    """The regular operator with xi^1 = -1/2 built from (xi^0, eta^1, eta^0)
    for coefficient f; only a constant f can make it a reduction operator."""
    f = sp.sympify(f)
    xi1 = sp.Rational(-1, 2)
    xi = xi1 * u + xi0
    eta = (xi1 * (xi1 - 1) / (3 * f) * u**3 + (sp.diff(xi1, x) + xi1 * xi0 / f) * u**2 + eta1 * u + eta0)
    return ReductionOperator.regular(xi, eta)


def determining_residuals(c: WronskianCoefficients) -> tuple[sp.Expr, sp.Expr, sp.Expr]:
    """Left-hand sides of the determining system for f = 1."""
    xi0, e1, e0 = c.xi0, c.eta1, c.eta0
    X = sp.diff(xi0, x)
    return (
        sp.diff(xi0, t) + 2 * X * xi0 + sp.diff(xi0, x, 2) - 2 * sp.diff(e1, x),
        sp.diff(e1, t) + 2 * X * e1 + sp.diff(e1, x, 2) + sp.diff(e0, x),
        sp.diff(e0, t) + 2 * X * e0 + sp.diff(e0, x, 2),
    )


def wronskian_operator(triple: HeatTriple, box: DomainBox | None = None, *, tol: float = 1e-10):
    """Reduction operator of u_t + u u_x + u_xx = 0 from a heat triple.

    Returns (operator, coefficients, largest determining-system residual)."""
    box = box or DomainBox()
    triple.validate(box)
    c = wronskian_coefficients(triple)
    worst = 0.0
    for r in determining_residuals(c):
        if canonical(r) == 0:
            continue
        worst = max(worst, grid_residual(r, box, n=20, tol=tol).max_abs)
    if worst >= tol:
        raise OperatorFailure(f"determining system residual {worst:.2e}")
    return half_case_operator(1, c.xi0, c.eta1, c.eta0), c, worst


def hopf_cole_coefficients(solutions: Sequence) -> WronskianCoefficients:
    """Same coefficients from three solutions of the Burgers equation."""
    us = [sp.sympify(s) for s in solutions]
    e = [sp.S.One] * 3
    y = [2 * sp.diff(s, x) + s**2 for s in us]
    z = [4 * sp.diff(s, x, 2) + 6 * s * sp.diff(s, x) + s**3 for s in us]
    den = _det([e, us, y])
    return WronskianCoefficients(_det([e, us, z]) / (2 * den), _det([e, y, z]) / (4 * den),
                                 -_det([us, y, z]) / (4 * den))


def hopf_cole_agreement(triple: HeatTriple, box: DomainBox | None = None) -> float:
    """Largest difference between the heat-triple and Burgers-solution
    formulas for the coefficients, with u^i = 2 v^i_x / v^i."""
    box = box or DomainBox()
    a = wronskian_coefficients(triple)
    b = hopf_cole_coefficients([2 * sp.diff(v, x) / v for v in triple.v])
    pts = box.sample(64, ["t", "x"])
    worst = 0.0
    for p, q in ((a.xi0, b.xi0), (a.eta1, b.eta1), (a.eta0, b.eta0)):
        vp, bp, _ = evaluate_array(p, pts)
        vq, bq, _ = evaluate_array(q, pts)
        good = ~(bp | bq)
        worst = max(worst, float(np.max(np.abs(vp[good] - vq[good]) / (1 + np.abs(vp[good])))))
    return worst


def burgers_invariant_family(triple: HeatTriple, c: Sequence, box: DomainBox | None = None):
    """u = 2 (sum c_i v^i_x) / (sum c_i v^i) with its grid residual for f = 1."""
    box = box or DomainBox()
    num = sum((sp.sympify(ci) * sp.diff(vi, x) for ci, vi in zip(c, triple.v)), sp.S.Zero)
    den = sum((sp.sympify(ci) * vi for ci, vi in zip(c, triple.v)), sp.S.Zero)
    if den == 0:
        raise DegenerateTriple("the combination vanishes identically")
    sol = canonical(2 * num / den)
    return sol, pde_residual(1, sol, box)


# ---------------------------------------------------------------------------
# xi^1 = 0


def theta_operator(theta_expr, h_expr, box: DomainBox | None = None):
    """Coefficient f = -1/theta_x and operator d_t - (theta_t/theta_x) d_x for a
    solution theta of theta_t = theta_xx/theta_x + h(theta) theta_x."""
    box = box or DomainBox.of(t=(2.0, 3.0), x=(1.0, 2.0))
    th = parse(theta_expr) if isinstance(theta_expr, str) else sp.sympify(theta_expr)
    hh = parse(h_expr) if isinstance(h_expr, str) else sp.sympify(h_expr)
    hh = hh.xreplace({sp.Symbol("theta", real=True): theta})
    tx, tt = sp.diff(th, x), sp.diff(th, t)
    if canonical(tx) == 0 or is_zero(tx, box) is not ZeroStatus.PROVABLY_NONZERO:
        raise OperatorFailure("theta_x vanishes")
    gfde = tt - sp.diff(th, x, 2) / tx - hh.xreplace({theta: th}) * tx
    if not is_zero(gfde, box).zero:
        raise OperatorFailure("theta does not solve the potential fast diffusion equation")
    f = canonical(-1 / tx)
    xi = canonical(-tt / tx)
    first = sp.diff(f, t) + xi * sp.diff(f, x) - sp.diff(xi, x) * f
    second = sp.diff(xi, t) + xi * sp.diff(xi, x) + f * sp.diff(xi, x, 2)
    for eq in (first, second):
        if not is_zero(eq, box).zero:
            raise OperatorFailure("the pair (f, xi) violates the determining system")
    Q = ReductionOperator.regular(xi, sp.S.Zero)
    if not check_conditional_invariance(f, Q, box):
        raise OperatorFailure("constructed operator fails the conditional invariance criterion")
    return f, Q


def lie_family_operator(a: Sequence) -> ReductionOperator:
    """Q^a with xi^1 = 0 and xi^0_xx = 0."""
    a0, a1, a2, a3, a4, a5 = (sp.sympify(v) for v in a)
    den = a0 * t**2 + (a1 + a2) * t + a3
    if sp.expand(den) == 0:
        raise ValueError("(a0, a1 + a2, a3) must not vanish")
    return ReductionOperator.regular(((a0 * t + a1) * x + a4 * t + a5) / den,
                                     (-(a0 * t + a2) * u + a0 * x + a4) / den)


def lie_family_field(a: Sequence) -> VectorField:
    """The element of the six-dimensional algebra proportional to Q^a."""
    a0, a1, a2, a3, a4, a5 = a
    return VectorField((a3, a5, a1 + a2, a1, a4, a0))


# ---------------------------------------------------------------------------
# singular operators


def singular_residual(f, eta) -> sp.Expr:
    f = sp.sympify(f)
    e = parse(eta) if isinstance(eta, str) else sp.sympify(eta)
    d = sp.diff
    return (d(e, t) + u * d(e, x) + e**2 + d(f, x) * (d(e, x) + e * d(e, u))
            + f * (d(e, x, 2) + 2 * e * d(e, x, u) + e**2 * d(e, u, 2)))


def check_singular(f, eta, box: DomainBox | None = None) -> bool:
    box = (box or DomainBox()).extended(["u"], default=U_RANGE)
    f = resolve_abs(parse(f) if isinstance(f, str) else sp.sympify(f), box)
    return is_zero(singular_residual(f, eta), box).zero


# ---------------------------------------------------------------------------
# equivalence transformations acting on operators


def transform_operator(T: equiv.EquivTransform, Q: ReductionOperator) -> ReductionOperator:
    """Pushforward of Q by the point part of T, renormalised."""
    new = T.point_map()
    old = equiv.inverse(T).point_map()
    back = {t: old[0], x: old[1], u: old[2]}
    comps = []
    for c in new:
        img = Q.tau * sp.diff(c, t) + Q.xi * sp.diff(c, x) + Q.eta * sp.diff(c, u)
        comps.append(canonical(img.xreplace(back)))
    return ReductionOperator(*comps).normalised()


__all__ = [
    "ReductionOperator", "check_conditional_invariance", "conditional_invariance_residual", "regular_case",
    "Q1", "q1_invariant_solutions", "HeatTriple", "WronskianCoefficients", "wronskian_coefficients",
    "wronskian_operator", "half_case_operator", "determining_residuals", "hopf_cole_coefficients",
    "hopf_cole_agreement", "burgers_invariant_family", "theta_operator", "lie_family_operator",
    "lie_family_field", "check_singular", "singular_residual", "transform_operator", "NotRegular",
    "DegenerateTriple", "OperatorFailure",
]
