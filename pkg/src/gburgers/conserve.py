"""Conservation laws, the potential system and potential equation, and the
transformations acting on potential equations.

For f quadratic in x the equation has the one characteristic lambda(t) with
lambda_t = f_xx lambda; the potential v with v_x = lambda u satisfies

    v_t + v_x^2/(2 lambda) + f v_xx - f_x v_x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
import sympy as sp
from scipy.integrate import quad

from . import equiv
from .expr import DomainBox, canonical, evaluate_array, is_zero, parse, t, v, x
from .verify import ResidualReport, grid_residual

U = sp.Function("U")(t, x)
V = sp.Function("V")(t, x)
TH, XH = sp.symbols("t_hat x_hat", real=True)


class NotQuadratic(ValueError):
    pass


class SubclassMismatch(ValueError):
    """Constant and nonconstant coefficients are never related by a point map."""


def _expr(e) -> sp.Expr:
    return parse(e) if isinstance(e, str) else sp.sympify(e)


def burgers_lhs(f, sol) -> sp.Expr:
    f, sol = _expr(f), sp.sympify(sol)
    return sp.diff(sol, t) + sol * sp.diff(sol, x) + f * sp.diff(sol, x, 2)


def quadratic_coefficients(f) -> tuple[sp.Expr, sp.Expr, sp.Expr] | None:
    """(f2, f1, f0) with f = f2 x^2 + f1 x + f0, or None when f_xxx != 0."""
    f = _expr(f)
    third = canonical(sp.diff(f, x, 3))
    if third != 0 and not is_zero(third, DomainBox()).zero:
        return None
    f2 = canonical(sp.diff(f, x, 2) / 2)
    f1 = canonical(sp.diff(f, x).subs(x, 0))
    f0 = canonical(f.subs(x, 0))
    return f2, f1, f0


def antiderivative_t(e) -> sp.Expr:
    """A fixed antiderivative in t with zero constant; unevaluated if sympy cannot find one."""
    e = sp.sympify(e)
    if e == 0:
        return sp.S.Zero
    out = sp.integrate(e, t)
    if out.has(sp.Integral):
        s = sp.Dummy("s", real=True)
        return sp.Integral(e.xreplace({t: s}), (s, 0, t))
    return canonical(out)


def characteristic(f) -> sp.Expr | None:
    coeffs = quadratic_coefficients(f)
    if coeffs is None:
        return None
    return canonical(sp.exp(antiderivative_t(2 * coeffs[0])))


@dataclass(frozen=True)
class ConservationLaw:
    f: sp.Expr
    characteristic: sp.Expr

    @property
    def density(self) -> sp.Expr:
        return self.characteristic * U

    @property
    def flux(self) -> sp.Expr:
        f = self.f
        return self.characteristic * (U**2 / 2 + f * sp.diff(U, x) - sp.diff(f, x) * U)

    def identity_residual(self) -> sp.Expr:
        """D_t(density) + D_x(flux) - lambda L_f[u] in jet space; zero for a valid law."""
        lam = self.characteristic
        total = sp.diff(self.density, t) + sp.diff(self.flux, x) - lam * burgers_lhs(self.f, U)
        return sp.simplify(sp.expand(total))

    def characteristic_residual(self) -> sp.Expr:
        lam = self.characteristic
        return canonical(sp.diff(lam, t) - sp.diff(self.f, x, 2) * lam)


def conservation_laws(f) -> ConservationLaw | None:
    """The conservation law of u_t + u u_x + f u_xx = 0, None when f_xxx != 0."""
    f = _expr(f)
    lam = characteristic(f)
    if lam is None:
        return None
    law = ConservationLaw(f, lam)
    if law.identity_residual() != 0:
        raise ArithmeticError("conserved form failed to certify")
    return law


# ---------------------------------------------------------------------------
# potential system and equation


@dataclass(frozen=True)
class PotentialEquation:
    f: sp.Expr
    lam: sp.Expr

    @property
    def coefficients(self) -> tuple:
        c = quadratic_coefficients(self.f)
        if c is None:
            raise NotQuadratic(str(self.f))
        return c

    def lhs(self, pot) -> sp.Expr:
        pot, f, lam = sp.sympify(pot), self.f, self.lam
        vx = sp.diff(pot, x)
        return sp.diff(pot, t) + vx**2 / (2 * lam) + f * sp.diff(pot, x, 2) - sp.diff(f, x) * vx

    def residual(self, pot, box: DomainBox | None = None, **kw) -> ResidualReport:
        return grid_residual(self.lhs(pot), box or DomainBox(), **kw)

    def __str__(self) -> str:
        return f"v_t + v_x^2/(2*({self.lam})) + ({self.f})*v_xx - ({canonical(sp.diff(self.f, x))})*v_x = 0"


@dataclass(frozen=True)
class PotentialSystem:
    f: sp.Expr
    lam: sp.Expr

    def equations(self, sol, pot) -> tuple[sp.Expr, sp.Expr]:
        """Residuals of v_x = lambda u and v_t = -lambda(u^2/2 + f u_x - f_x u)."""
        f, lam = self.f, self.lam
        sol, pot = sp.sympify(sol), sp.sympify(pot)
        return (sp.diff(pot, x) - lam * sol,
                sp.diff(pot, t) + lam * (sol**2 / 2 + f * sp.diff(sol, x) - sp.diff(f, x) * sol))


def potential_system(f, lam=None) -> tuple[PotentialSystem, PotentialEquation]:
    """Potential system and equation, with the elimination of u certified."""
    f = _expr(f)
    if quadratic_coefficients(f) is None:
        raise NotQuadratic(str(f))
    lam = characteristic(f) if lam is None else _expr(lam)
    if canonical(sp.diff(lam, t) - sp.diff(f, x, 2) * lam) != 0:
        raise ValueError("lambda is not a characteristic for this f")
    system, eq = PotentialSystem(f, lam), PotentialEquation(f, lam)
    _, second = system.equations(sp.diff(V, x) / lam, V)
    if sp.simplify(second - eq.lhs(V)) != 0:
        raise ArithmeticError("eliminating u does not give the potential equation")
    compat = sp.diff(lam * U, t) + sp.diff(lam * (U**2 / 2 + f * sp.diff(U, x) - sp.diff(f, x) * U), x)
    if sp.simplify(sp.expand(compat - lam * burgers_lhs(f, U))) != 0:
        raise ArithmeticError("potential system is not compatible with the equation")
    return system, eq


def potential_from_solution(f, sol, lam=None) -> sp.Expr:
    """A potential v of a solution u, with integration constants set to zero."""
    f, sol = _expr(f), _expr(sol)
    lam = characteristic(f) if lam is None else _expr(lam)
    base = sp.integrate(lam * sol, x)
    rest = canonical(-lam * (sol**2 / 2 + f * sp.diff(sol, x) - sp.diff(f, x) * sol) - sp.diff(base, t))
    if canonical(sp.diff(rest, x)) != 0:
        raise ArithmeticError("u does not solve the equation; the potential system is incompatible")
    return canonical(base + antiderivative_t(rest))


# ---------------------------------------------------------------------------
# reduction of the potential class to v_t + v_x^2 + f v_xx = 0


@dataclass(frozen=True)
class PsiMap:
    f: sp.Expr
    lam: sp.Expr
    t_hat: sp.Expr
    x_hat: sp.Expr
    f_hat: sp.Expr  # 2 lambda f, in the original variables

    def f_hat_in_new_variables(self) -> sp.Expr | None:
        """f_hat written in (t_hat, x_hat) when t_hat(t) can be inverted."""
        sols = sp.solve(sp.Eq(self.t_hat, TH), t) if not self.t_hat.has(sp.Integral) else []
        if len(sols) != 1:
            return None
        told = sols[0]
        xold = (XH - (self.x_hat - self.lam * x)).xreplace({t: told}) / self.lam.xreplace({t: told})
        return canonical(self.f_hat.xreplace({t: told, x: xold}))


def psi_map(f, lam=None) -> PsiMap:
    """Point map t_hat = int(lambda)/2, x_hat = lambda x + int(f1 lambda), v_hat = v."""
    f = _expr(f)
    coeffs = quadratic_coefficients(f)
    if coeffs is None:
        raise NotQuadratic(str(f))
    lam = characteristic(f) if lam is None else _expr(lam)
    th = antiderivative_t(lam) / 2
    xh = lam * x + antiderivative_t(coeffs[1] * lam)
    m = PsiMap(f, lam, th, xh, canonical(2 * lam * f))
    # v(t, x) = W(t_hat, x_hat): the potential equation must become
    # (lambda/2)(W_th + W_xh^2 + f_hat W_xhxh) after the chain rule.
    W = sp.Function("W")
    pot = W(th, xh)
    lhs = PotentialEquation(f, lam).lhs(pot)
    a, b = sp.symbols("a_, b_")
    Wt, Wx, Wxx = (sp.Derivative(W(a, b), a), sp.Derivative(W(a, b), b), sp.Derivative(W(a, b), b, 2))
    target = (lam / 2) * (Wt + Wx**2 + m.f_hat * Wxx)
    diff = (lhs - target.subs({a: th, b: xh})).doit()
    if sp.simplify(diff) != 0:
        raise ArithmeticError("the map does not send the potential equation to the short form")
    if canonical(sp.diff(f, x, 3)) != 0:
        raise NotQuadratic("image coefficient is not quadratic")
    return m


# ---------------------------------------------------------------------------
# potential admissible transformations


@dataclass(frozen=True)
class PotentialTransform:
    """Point transformation between potential equations with nonconstant f."""

    f: sp.Expr
    lam: sp.Expr
    T: equiv.EquivTransform
    c0: sp.Expr
    sigma: sp.Expr
    f_new: sp.Expr  # kappa^2/Delta f, evaluated at the source point
    lam_new: sp.Expr
    v0_rate: sp.Expr  # derivative of V^0

    def coordinates(self) -> tuple[sp.Expr, sp.Expr]:
        tt, xx, _ = self.T.point_map()
        return tt, xx

    def v_shift(self) -> sp.Expr:
        """The part of v_tilde/c0 - v that depends on (t, x), except V^0."""
        a, b, g, d, k, m1, m0 = self.T.params
        den = g * t + d
        return -g * self.lam / (2 * den) * x**2 + (d * m1 - g * m0) / (k * den) * self.lam * x

    def v0(self, at: float) -> float:
        """V^0 at a time value, by quadrature from 0 (plus sigma)."""
        fn = sp.lambdify(t, self.v0_rate, "numpy")
        return float(quad(fn, 0.0, at)[0]) + float(self.sigma)

    def image_residual(self, pot) -> sp.Expr:
        """Target equation evaluated on the image of v, written in source variables."""
        pot = sp.sympify(pot)
        tt, xx = self.coordinates()
        new_v_t = self.c0 * (sp.diff(pot + self.v_shift(), t) + self.v0_rate)
        new_v_x = self.c0 * sp.diff(pot + self.v_shift(), x)
        xx_x, xx_t, tt_t = sp.diff(xx, x), sp.diff(xx, t), sp.diff(tt, t)
        d_new_x = new_v_x / xx_x
        d_new_t = (new_v_t - d_new_x * xx_t) / tt_t
        d_new_xx = sp.diff(d_new_x, x) / xx_x
        f_new_x = sp.diff(self.f_new, x) / xx_x
        return d_new_t + d_new_x**2 / (2 * self.lam_new) + self.f_new * d_new_xx - f_new_x * d_new_x

    def characteristic_residual(self) -> sp.Expr:
        tt, xx = self.coordinates()
        lhs = sp.diff(self.lam_new, t) / sp.diff(tt, t)
        rhs = sp.diff(self.f_new, x, 2) / sp.diff(xx, x) ** 2 * self.lam_new
        return sp.simplify(sp.together(lhs - rhs))


def potential_admissible(f, T: equiv.EquivTransform, *, lam=None, c0=1, sigma=0) -> PotentialTransform:
    """Admissible transformation of the potential class for nonconstant quadratic f."""
    f = _expr(f)
    coeffs = quadratic_coefficients(f)
    if coeffs is None:
        raise NotQuadratic(str(f))
    if canonical(sp.diff(f, t)) == 0 and canonical(sp.diff(f, x)) == 0:
        raise SubclassMismatch("constant f: use the generalized map for the constant subclass")
    lam = characteristic(f) if lam is None else _expr(lam)
    c0 = sp.sympify(c0)
    if c0 == 0:
        raise ValueError("c0 must be nonzero")
    a, b, g, d, k, m1, m0 = T.params
    Delta = T.determinant
    den = g * t + d
    _, f1, f0 = coeffs
    rate = c0 * ((d * m1 - g * m0) ** 2 / (2 * k**2 * den**2) + (d * m1 - g * m0) / (k * den) * f1
                 + g / den * f0) * lam
    return PotentialTransform(f, lam, T, c0, sp.sympify(sigma), canonical(k**2 / Delta * f),
                              canonical(c0 * Delta / k**2 * lam), canonical(rate / c0))


def check_potential_transform(P: PotentialTransform, potentials, box: DomainBox | None = None,
                              tol: float = 1e-6) -> float:
    """Largest image residual over sampled potentials; raises past tol."""
    box = box or DomainBox()
    vals, bad, _ = evaluate_array(P.T.gamma * t + P.T.delta, box.grid(20))
    if bad.any() or np.min(np.abs(vals)) < 1e-9:
        raise ValueError("gamma t + delta vanishes on the domain")
    worst = 0.0
    for pot in potentials:
        rep = grid_residual(P.image_residual(pot), box, tol=tol)
        worst = max(worst, rep.max_abs)
    if worst >= tol:
        raise ArithmeticError(f"image residual {worst:.2e}")
    return worst


# ---------------------------------------------------------------------------
# constant f: linearisation and the generalized group


def burgers_linearize(f, lam=1) -> tuple[sp.Expr, sp.Expr]:
    """Map v = 2 f lam ln w between the potential equation and w_t + f w_xx = 0.

    Returns (v in terms of w, the certified factor F with P[v] = F (w_t + f w_xx))."""
    f, lam = _expr(f), _expr(lam)
    if f.free_symbols & {t, x} or f == 0:
        raise SubclassMismatch("linearisation needs a nonzero constant f")
    W = sp.Function("W")(t, x)
    pot = 2 * f * lam * sp.log(W)
    lhs = PotentialEquation(f, lam).lhs(pot)
    factor = 2 * f * lam / W
    if sp.simplify(lhs - factor * (sp.diff(W, t) + f * sp.diff(W, x, 2))) != 0:
        raise ArithmeticError("linearisation identity failed")
    return pot, factor


def hopf_cole(f, heat_solution) -> sp.Expr:
    """u = 2 f w_x / w for a solution w of w_t + f w_xx = 0."""
    w = _expr(heat_solution)
    return canonical(2 * _expr(f) * sp.diff(w, x) / w)


def generalized_f1(f, T: equiv.EquivTransform, k=1) -> sp.Expr:
    a, b, g, d, kap, m1, m0 = T.params
    f = _expr(f)
    if g != 0:
        return k * sp.sqrt(sp.Abs(g * t + d)) * sp.exp(
            -(g * kap * x - m1 * d + m0 * g) ** 2 / (4 * f * kap**2 * g * (g * t + d)))
    return k * sp.exp((2 * kap * m1 * x + m1**2 * t) / (4 * kap**2 * f))


def generalized_image(f, T: equiv.EquivTransform, pot, *, k=1, heat_shift=0) -> sp.Expr:
    """Image of a potential under the generalized group of the constant subclass,
    in source variables; heat_shift must solve F_t + f F_xx = 0."""
    f = _expr(f)
    F1 = generalized_f1(f, T, k)
    return 2 * T.f_factor * f * sp.log(sp.Abs(F1 * (sp.exp(sp.sympify(pot) / (2 * f)) + _expr(heat_shift))))


def generalized_residual(f, T: equiv.EquivTransform, pot, *, k=1, heat_shift=0, lam_new=1) -> sp.Expr:
    """Target equation v_t + v_x^2/(2 lam) + f_new v_xx = 0 on the image, in source variables."""
    f = _expr(f)
    img = generalized_image(f, T, pot, k=k, heat_shift=heat_shift)
    tt, xx, _ = T.point_map()
    xx_x, xx_t, tt_t = sp.diff(xx, x), sp.diff(xx, t), sp.diff(tt, t)
    vx = sp.diff(img, x) / xx_x
    vt = (sp.diff(img, t) - vx * xx_t) / tt_t
    vxx = sp.diff(vx, x) / xx_x
    return vt + vx**2 / (2 * sp.sympify(lam_new)) + T.f_factor * f * vxx


# ---------------------------------------------------------------------------
# characteristics of the potential equation


def potential_char_check(f, psi, box: DomainBox | None = None) -> bool:
    """Whether psi(t, x) e^{v/(2f)} is a reduced characteristic, i.e. psi_t = f psi_xx."""
    f, psi = _expr(f), _expr(psi)
    if f.free_symbols & {t, x}:
        raise SubclassMismatch("characteristics of this shape need constant f")
    return is_zero(sp.diff(psi, t) - f * sp.diff(psi, x, 2), box or DomainBox()).zero


def characteristic_operator(f, lam, mu) -> sp.Expr:
    """Left side of the characteristic equation on solutions of the potential equation,
    as a function of (t, x, v, v_x, v_xx)."""
    f, lam, mu = _expr(f), _expr(lam), sp.sympify(mu)
    vx, vxx, vxt = sp.symbols("v_x v_xx v_xt", real=True)
    vt = -vx**2 / (2 * lam) - f * vxx + sp.diff(f, x) * vx
    # total derivatives on functions of (t, x, v, v_x)
    def Dt(e):
        return sp.diff(e, t) + vt * sp.diff(e, v) + vxt * sp.diff(e, vx)

    def Dx(e):
        vxxx = sp.Symbol("v_xxx", real=True)
        return sp.diff(e, x) + vx * sp.diff(e, v) + vxx * sp.diff(e, vx) + vxxx * sp.diff(e, vxx)

    out = -Dt(mu) + Dx(Dx(f * mu)) - Dx((vx / lam - sp.diff(f, x)) * mu)
    if out.has(vxt) or out.has(sp.Symbol("v_xxx", real=True)):
        raise ArithmeticError("higher jets survived")
    return out


def _exp_to_symbols(e: sp.Expr) -> sp.Expr:
    """Replace exp(c1 g1 + c2 g2 + ...) by Z_g1^c1 Z_g2^c2 ..., with one symbol per monomial g."""
    table: dict = {}

    def swap(node):
        out = sp.S.One
        for term in sp.Add.make_args(sp.expand(node.args[0])):
            c, g = term.as_coeff_Mul()
            if g not in table:
                table[g] = sp.Symbol(f"Z_{len(table)}", positive=True)
            out *= table[g] ** c
        return out

    return e.replace(lambda n: isinstance(n, sp.exp), swap)


def characteristic_dimension(f, lam=None, degree: int = 4) -> int:
    """Dimension of the characteristics spanned by t^a x^b v^c and t^a x^b e^{v/(2f)}
    with a + b + c <= degree; zero is expected for nonconstant f.

    Exact: the exponential is treated as an independent transcendental and
    the numerator is split into monomials in (t, x, v, v_x, v_xx)."""
    f = _expr(f)
    lam = characteristic(f) if lam is None else _expr(lam)
    grow = sp.exp(v / (2 * f))
    basis = [t**a * x**b * v**c for a, b, c in product(range(degree + 1), repeat=3) if a + b + c <= degree]
    basis += [t**a * x**b * grow for a, b in product(range(degree + 1), repeat=2) if a + b <= degree]
    coeffs = sp.symbols(f"k0:{len(basis)}")
    total = characteristic_operator(f, lam, sum(k * m for k, m in zip(coeffs, basis)))
    E = sp.Symbol("E_", positive=True)
    total = sp.expand(sp.powsimp(sp.expand(total))).subs(grow, E)
    num = sp.numer(sp.together(total))
    if num.has(sp.exp):
        num = sp.expand(num).replace(lambda e: isinstance(e, sp.exp) and e.args[0].has(v),
                                     lambda e: E * sp.exp(sp.expand(e.args[0] - v / (2 * f))))
    jets = sp.symbols("v_x v_xx", real=True)
    num = sp.numer(sp.together(_exp_to_symbols(sp.expand(num))))
    extra = sorted(num.free_symbols - {t, x, v, E, *jets, *coeffs}, key=str)
    poly = sp.Poly(sp.expand(num), t, x, v, E, *jets, *extra)
    rows = [sp.expand(c) for c in poly.coeffs()]
    M, _ = sp.linear_eq_to_matrix(rows, coeffs)
    return len(coeffs) - M.rank()


__all__ = [
    "ConservationLaw", "conservation_laws", "quadratic_coefficients", "characteristic", "antiderivative_t",
    "PotentialEquation", "PotentialSystem", "potential_system", "potential_from_solution", "PsiMap",
    "psi_map", "PotentialTransform", "potential_admissible", "check_potential_transform",
    "burgers_linearize", "hopf_cole", "generalized_image", "generalized_residual", "potential_char_check",
    "characteristic_operator", "characteristic_dimension", "NotQuadratic", "SubclassMismatch",
]
