"""Lie reductions with respect to one-dimensional subalgebras, the class of
reduced equations

    h(w) phi'' + phi phi' + alpha phi + beta w + gamma = 0,

its Lie symmetries, closed-form solutions and the induced/hidden split of
reduced symmetries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from .classify import CASES, invariance_algebra
from .expr import (
    DomainBox, ZeroStatus, evaluate, evaluate_array, freeze_jets, h, is_zero, omega, param, parse,
    resolve_abs, t, u, x,
)
from .lie import Subalgebra, VectorField, bracket_coords, parse_field
from .verify import ExcessiveExclusion, ResidualReport, pde_residual

# jet coordinates of the reduced unknown: phi, phi', phi'', phi'''
PHI = sp.symbols("phi phi_w phi_ww phi_www", real=True)
A = param("a")


class ReductionFailure(RuntimeError):
    pass


class NoReduction(ValueError):
    pass


# ---------------------------------------------------------------------------
# reduced equations


@dataclass(frozen=True)
class ReducedODE:
    """h(w) phi'' + phi phi' + alpha phi + beta w + gamma = 0."""

    h: sp.Expr
    alpha: sp.Expr = sp.S.Zero
    beta: sp.Expr = sp.S.Zero
    gamma: sp.Expr = sp.S.Zero

    def __post_init__(self):
        for name in ("h", "alpha", "beta", "gamma"):
            val = getattr(self, name)
            object.__setattr__(self, name, sp.nsimplify(val) if isinstance(val, float) else sp.sympify(val))

    def jet_form(self) -> sp.Expr:
        p0, p1, p2, _ = PHI
        return self.h * p2 + p0 * p1 + self.alpha * p0 + self.beta * omega + self.gamma

    def apply(self, phi) -> sp.Expr:
        """Left-hand side for a concrete phi(w)."""
        phi = sp.sympify(phi)
        return (self.h * sp.diff(phi, omega, 2) + phi * sp.diff(phi, omega)
                + self.alpha * phi + self.beta * omega + self.gamma)

    def second_derivative(self) -> sp.Expr:
        p0, p1, _, _ = PHI
        return -(p0 * p1 + self.alpha * p0 + self.beta * omega + self.gamma) / self.h

    def __str__(self) -> str:
        return f"({self.h})*phi'' + phi*phi' + ({self.alpha})*phi + ({self.beta})*w + ({self.gamma}) = 0"


@dataclass(frozen=True)
class Ansatz:
    """u = scale(t) * phi(w) + shift(t, x) with w = invariant(t, x).

    ``phi_shift`` is the change phi -> phi + phi_shift(w) that brings the
    reduced equation into the common class."""

    label: str
    basis: str
    scale: sp.Expr
    shift: sp.Expr
    invariant: sp.Expr
    phi_shift: sp.Expr = sp.S.Zero

    def u_of(self, phi) -> sp.Expr:
        """The ansatz with a concrete phi(w), as a function of (t, x)."""
        phi = sp.sympify(phi).xreplace({omega: self.invariant})
        return self.scale * phi + self.shift

    def u_of_class(self, phi_hat) -> sp.Expr:
        """Same, for a solution of the class form."""
        return self.u_of(sp.sympify(phi_hat) + self.phi_shift)

    def class_phi(self) -> sp.Expr:
        """phi of the class form as a function of (t, x, u)."""
        return (u - self.shift) / self.scale - self.phi_shift.xreplace({omega: self.invariant})


@dataclass(frozen=True)
class Reduction:
    ansatz: Ansatz
    reduced: sp.Expr            # reduced equation in (w, phi jets) as listed
    ode: ReducedODE | None      # class form, None for first-order reductions
    factor: sp.Expr             # L_f[ansatz] = factor * reduced
    f: sp.Expr


def _row(label, basis, scale, shift, inv, reduced, phi_shift="0", cls=None):
    return label, dict(basis=basis, scale=scale, shift=shift, inv=inv, reduced=reduced, phi_shift=phi_shift, cls=cls)


# label -> ansatz data; ``reduced`` uses phi, phi_w, phi_ww and h(w)
REDUCTIONS = dict([
    _row("1.0", "P^x", "1", "0", "t", "phi_w"),
    _row("1.1", "D^x", "x", "0", "t", "phi_w + phi^2"),
    _row("1.2", "P^t", "1", "0", "x", "h(w)*phi_ww + phi*phi_w", cls=(0, 0, 0)),
    _row("1.3", "P^t+G", "1", "t", "x-t^2/2", "h(w)*phi_ww + phi*phi_w + 1", cls=(0, 0, 1)),
    _row("1.4", "P^t+D^x", "exp(t)", "0", "exp(-t)*x", "h(w)*phi_ww + phi*phi_w - w*phi_w + phi",
         phi_shift="w", cls=(2, 1, 0)),
    _row("1.5", "D^t+P^x", "1/t", "0", "x-ln(abs(t))", "h(w)*phi_ww + phi*phi_w - phi_w - phi",
         phi_shift="1", cls=(-1, 0, -1)),
    _row("1.6", "D^t+a*D^x", "abs(t)^a/t", "0", "abs(t)^(-a)*x",
         "h(w)*phi_ww + phi*phi_w - a*w*phi_w + (a-1)*phi", phi_shift="a*w", cls=("2*a-1", "a*(a-1)", 0)),
    _row("1.7", "D^t+D^x+G", "1", "ln(abs(t))", "x/t-ln(abs(t))",
         "h(w)*phi_ww + phi*phi_w - (w+1)*phi_w + 1", phi_shift="w+1", cls=(1, 0, 1)),
    _row("1.8", "P^t+Pi+a*D^x", "exp(a*arctan(t))/sqrt(t^2+1)", "(t+a)/(t^2+1)*x",
         "exp(-a*arctan(t))/sqrt(t^2+1)*x", "h(w)*phi_ww + phi*phi_w + 2*a*phi + (a^2+1)*w",
         cls=("2*a", "a^2+1", 0)),
])

# equation forms for the two first-order rows
_FIRST_ORDER_F = {"1.0": "h(t)", "1.1": "x^2*h(t)"}


def _jet_parse(text: str) -> sp.Expr:
    e = parse(text.replace("phi_ww", "PHI2").replace("phi_w", "PHI1").replace("phi", "PHI0"))
    return e.xreplace({param("PHI0"): PHI[0], param("PHI1"): PHI[1], param("PHI2"): PHI[2],
                       param("w"): omega, sp.Symbol("w", real=True): omega})


def _subs_a(e: sp.Expr, a) -> sp.Expr:
    return e if a is None else e.xreplace({A: sp.sympify(a)})


def ansatz_for(label: str, a=None, box: DomainBox | None = None) -> Ansatz:
    row = REDUCTIONS[label]
    box = box or DomainBox()
    conv = lambda s: resolve_abs(_subs_a(parse(s), a), box)
    basis = row["basis"] if a is None else row["basis"].replace("a*", f"({a})*")
    return Ansatz(label, basis, conv(row["scale"]), conv(row["shift"]), conv(row["inv"]),
                  _subs_a(_jet_parse(row["phi_shift"]), a))


def table_f(label: str, a=None, box: DomainBox | None = None) -> sp.Expr:
    """Arbitrary element of the form matching the reduction row, with h(w) symbolic."""
    text = _FIRST_ORDER_F.get(label) or CASES[label].f
    return resolve_abs(_subs_a(parse(text), a), box or DomainBox())


def class_ode(label: str, hfun, a=None) -> ReducedODE:
    cls = REDUCTIONS[label]["cls"]
    if cls is None:
        raise NoReduction(f"{label} gives a first-order reduced equation")
    vals = [_subs_a(sp.sympify(c) if not isinstance(c, str) else parse(c), a) for c in cls]
    return ReducedODE(sp.sympify(hfun), *vals)


def total_derivative(e: sp.Expr, var: sp.Symbol, invariant: sp.Expr) -> sp.Expr:
    """Derivative in t or x of an expression in (t, x, phi jets), phi = phi(invariant)."""
    w_var = sp.diff(invariant, var)
    out = sp.diff(e, var)
    for k in range(len(PHI) - 1):
        out += PHI[k + 1] * w_var * sp.diff(e, PHI[k])
    return out


def lie_reduce(f=None, label: str = "1.2", a=None, box: DomainBox | None = None) -> Reduction:
    """Substitute the listed ansatz into u_t + u u_x + f u_xx and certify that
    the result is a nonvanishing multiple of the listed reduced equation.

    Without ``f`` the row's general form with arbitrary h is used."""
    if label not in REDUCTIONS:
        raise NoReduction(f"no one-dimensional reduction for {label}")
    box = box or DomainBox()
    ans = ansatz_for(label, a, box)
    fexpr = table_f(label, a, box) if f is None else resolve_abs(sp.sympify(f), box)
    inv = ans.invariant
    U = ans.scale * PHI[0] + ans.shift
    Ut = total_derivative(U, t, inv)
    Ux = total_derivative(U, x, inv)
    Uxx = total_derivative(Ux, x, inv)
    L = sp.expand(Ut + U * Ux + fexpr * Uxx)
    reduced = _subs_a(_jet_parse(REDUCTIONS[label]["reduced"]), a)
    hw = None
    if REDUCTIONS[label]["cls"] is not None:
        hw = h(omega) if f is None else _recover_h(fexpr, label, a, box)
        reduced = reduced.replace(h, sp.Lambda(omega, hw))
    R = reduced.xreplace({omega: inv})
    top = PHI[2] if reduced.has(PHI[2]) else PHI[1]
    coeff_R = sp.diff(R, top)
    factor = sp.simplify(sp.diff(L, top) / coeff_R)
    if factor.has(*PHI):
        raise ReductionFailure(f"{label}: leading coefficient ratio depends on phi")
    names = box.names + [p.name for p in PHI[:3]]
    check_box = box.extended(names, default=(-1.5, 1.5))
    status = is_zero(L - factor * R, check_box)
    if not status.zero:
        raise ReductionFailure(f"{label}: L_f[ansatz] is not proportional to the reduced equation ({status.value})")
    if is_zero(factor, box) is not ZeroStatus.PROVABLY_NONZERO:
        raise ReductionFailure(f"{label}: proportionality factor may vanish")
    ode = None
    if hw is not None:
        ode = class_ode(label, hw, a)
        shifted = reduced.xreplace({PHI[0]: PHI[0] + ans.phi_shift,
                                    PHI[1]: PHI[1] + sp.diff(ans.phi_shift, omega),
                                    PHI[2]: PHI[2] + sp.diff(ans.phi_shift, omega, 2)})
        if f is None and sp.expand(shifted - ode.jet_form()) != 0:
            raise ReductionFailure(f"{label}: variable change does not give the class form")
    return Reduction(ans, reduced, ode, factor, fexpr)


def _recover_h(fexpr: sp.Expr, label: str, a, box: DomainBox) -> sp.Expr:
    """h(w) for a concrete f of the row's form: divide f by the t-dependent
    prefactor and express x through the invariant."""
    template = table_f(label, a, box)
    probe = template.replace(h, sp.Lambda(omega, sp.S.One))
    ans = ansatz_for(label, a, box)
    xs = sp.solve(sp.Eq(ans.invariant, omega), x)
    if len(xs) != 1:
        raise ReductionFailure("invariant is not solvable for x")
    hw = sp.simplify((fexpr / probe).xreplace({x: xs[0]}))
    if hw.has(t):
        hw2 = sp.simplify(hw.subs(t, 1))
        if not is_zero(hw - hw2, box.extended(["omega"])).zero:
            raise ReductionFailure(f"f does not have the form of {label}")
        hw = hw2
    return hw


# ---------------------------------------------------------------------------
# symmetries of reduced equations


@dataclass(frozen=True)
class ReducedGenerator:
    """xi(w, phi) d_w + eta(w, phi) d_phi."""

    xi: sp.Expr
    eta: sp.Expr

    def __str__(self) -> str:
        return f"({sp.simplify(self.xi)})*d_w + ({sp.simplify(self.eta)})*d_phi"


@dataclass
class ReducedSymmetries:
    item: int | None
    generators: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)


def _const(e, box: DomainBox) -> bool:
    return is_zero(sp.diff(e, omega), box).zero


def _omega_box(box: DomainBox | None) -> DomainBox:
    return box or DomainBox.of(omega=(1.0, 2.0))


def _value(e, box: DomainBox):
    mid = {n: 0.5 * (lo + hi) for n, lo, hi in box.intervals}
    return sp.nsimplify(evaluate(e, mid), tolerance=1e-10, rational=True)


def reduced_symmetries(ode: ReducedODE, box: DomainBox | None = None) -> ReducedSymmetries:
    """Which of the six symmetric shapes the reduced equation has, with the
    matching generators.  Each generator is checked against the invariance
    criterion before it is returned."""
    box = _omega_box(box)
    hw = resolve_abs(ode.h, box)
    al, be, ga = ode.alpha, ode.beta, ode.gamma
    p0 = PHI[0]
    hp, hpp = sp.diff(hw, omega), sp.diff(hw, omega, 2)
    out = ReducedSymmetries(None)
    if be != 0:
        s = ga / be
        if is_zero((omega + s) * hp - 2 * hw, box).zero:
            out = ReducedSymmetries(1, [ReducedGenerator(omega + s, p0)], {"h0": _value(hw / (omega + s) ** 2, box)})
    elif ga != 0:
        if is_zero(hp, box).zero:
            out = ReducedSymmetries(2, [ReducedGenerator(sp.S.One, sp.S.Zero)], {"h0": _value(hw, box)})
        elif al == 0:
            mu = sp.simplify(3 * hw / (2 * hp) - omega)
            if _const(mu, box):
                mu = _value(mu, box)
                out = ReducedSymmetries(3, [ReducedGenerator(2 * (omega + mu), p0)], {"mu": mu})
    else:
        curv = sp.simplify(hpp + al)
        if is_zero(curv, box).zero:
            mu = _value(hp + al * omega, box)
            nu = _value(hw + al / 2 * omega**2 - mu * omega, box)
            H = -al / 2 * omega**2 + mu * omega + nu
            I = sp.integrate(1 / H, omega).replace(sp.log, lambda arg: sp.log(sp.Abs(arg)))
            I = resolve_abs(I, box)
            gens = [ReducedGenerator(H, -al * H),
                    ReducedGenerator(-H * I, p0 + al * H * I + al * omega - mu)]
            out = ReducedSymmetries(4, gens, {"mu": mu, "nu": nu})
        else:
            K0 = sp.simplify(sp.diff(1 / (hw * curv), omega) * hw)
            if is_zero(K0, box).zero:
                kap = _value(hw * curv, box)
                out = ReducedSymmetries(5, [ReducedGenerator(hw, kap - al * hw)], {"kappa": kap})
            else:
                K1 = 2 + (hp + al * omega) * K0
                mu = sp.simplify(-K1 / K0)
                if _const(mu, box):
                    mu = _value(mu, box)
                    lin = hp + al * omega + mu
                    kap = sp.simplify(hw * curv / lin**2)
                    if _const(kap, box):
                        xi = sp.simplify(lin / curv)
                        out = ReducedSymmetries(6, [ReducedGenerator(xi, p0 - al * xi + al * omega + mu)],
                                                {"mu": mu, "kappa": _value(kap, box)})
    for g in out.generators:
        r = invariance_residual(ode, g, box)
        if r > 1e-10:
            raise ReductionFailure(f"item {out.item} generator {g} fails the invariance criterion ({r:.2e})")
    return out


def invariance_criterion(ode: ReducedODE, gen: ReducedGenerator) -> sp.Expr:
    """Second prolongation of gen applied to the equation, restricted to it."""
    p0, p1, p2, _ = PHI
    xi = gen.xi.xreplace({PHI[0]: p0})
    eta = gen.eta

    def D(e):
        return sp.diff(e, omega) + p1 * sp.diff(e, p0) + p2 * sp.diff(e, p1)

    eta1 = D(eta) - p1 * D(xi)
    eta2 = D(eta1) - p2 * D(xi)
    hw = ode.h
    expr = (xi * sp.diff(hw, omega) * p2 + hw * eta2 + eta * p1 + p0 * eta1
            + ode.alpha * eta + ode.beta * xi)
    return expr.xreplace({p2: ode.second_derivative()})


def invariance_residual(ode: ReducedODE, gen: ReducedGenerator, box: DomainBox | None = None,
                        n: int = 64) -> float:
    """max |criterion| over sample points in (w, phi, phi'), scaled by the
    size of the individual terms."""
    box = _omega_box(box).extended(["omega", "phi", "phi_w"], default=(-1.5, 1.5))
    crit = resolve_abs(invariance_criterion(ode, gen), box)
    frozen, _ = freeze_jets(crit)
    pts = box.sample(n, sorted(s.name for s in frozen.free_symbols) or ["omega"])
    vals, bad, scale = evaluate_array(frozen, pts)
    good = ~bad
    if not good.any():
        return float("inf")
    return float(np.max(np.abs(vals[good]) / np.maximum(1.0, scale[good])))


def item5_first_integral(ode: ReducedODE, kappa) -> sp.Expr:
    """h'^2 - 2 kappa ln|h| + 2 alpha h, with h as the symbol h(w)."""
    hw, hp = h(omega), sp.diff(h(omega), omega)
    return hp**2 - 2 * kappa * sp.log(sp.Abs(hw)) + 2 * ode.alpha * hw


def item5_conservation(alpha, kappa, h_start, dh_start, span=(0.0, 1.0)) -> float:
    """Integrate h'' = kappa/h - alpha numerically and return the largest
    drift of the first integral along the trajectory."""
    alpha, kappa = float(alpha), float(kappa)

    def rhs(_, y):
        return [y[1], kappa / y[0] - alpha]

    sol = solve_ivp(rhs, span, [float(h_start), float(dh_start)], rtol=1e-12, atol=1e-12, dense_output=True)
    hh, dd = sol.y
    q = dd**2 - 2 * kappa * np.log(np.abs(hh)) + 2 * alpha * hh
    return float(np.max(np.abs(q - q[0])))


# ---------------------------------------------------------------------------
# integration of the widest case


@dataclass(frozen=True)
class ReducedSolution:
    phi: sp.Expr          # solution of the class form, function of w
    branch: str           # sign case of the integration constant
    variable: str         # form of the transformed independent variable
    constants: dict


def transformed_variable(alpha, mu, nu) -> tuple[str, sp.Expr]:
    al, mu, nu = (sp.nsimplify(v) for v in (alpha, mu, nu))
    if al == 0:
        if mu == 0:
            if nu == 0:
                raise ValueError("h vanishes identically")
            return "w/nu", omega / nu
        return "ln|w+nu/mu|/mu", sp.log(sp.Abs(omega + nu / mu)) / mu
    disc = mu**2 + 2 * al * nu
    if disc < 0:
        r = sp.sqrt(-disc)
        return "arctan", -2 / r * sp.atan((al * omega - mu) / r)
    if disc == 0:
        return "rational", 2 / (al * omega - mu)
    r = sp.sqrt(disc)
    return "log-ratio", sp.log(sp.Abs((al * omega - mu + r) / (al * omega - mu - r))) / r


def integrate_case4(alpha, mu, nu, *, c0=None, c1=sp.S.One, box: DomainBox | None = None,
                    verify: bool = True) -> list[ReducedSolution]:
    """Closed-form solutions of the reduced equation with
    h = -alpha/2 w^2 + mu w + nu and beta = gamma = 0.

    With ``c0`` given only that sign branch is returned; otherwise the
    representative values -1, 0 and 1 are used."""
    al, mu, nu = (sp.nsimplify(v) for v in (alpha, mu, nu))
    hw = -al / 2 * omega**2 + mu * omega + nu
    label, wt = transformed_variable(al, mu, nu)
    box = _omega_box(box)
    wt = resolve_abs(wt, box)
    base = -al * omega + mu
    values = [sp.nsimplify(c0)] if c0 is not None else [sp.Integer(-1), sp.S.Zero, sp.S.One]
    out = []
    for c in values:
        if c < 0:
            k = sp.sqrt(-c)
            forms = [("c0<0", -k * sp.tan(k / 2 * wt + c1))]
        elif c == 0:
            forms = [("c0=0", 2 / (wt + c1)), ("c0=0, zero branch", sp.S.Zero)]
        else:
            k = sp.sqrt(c)
            E = sp.exp(k * wt)
            forms = [("c0>0", k * (c1 * E - 1) / (c1 * E + 1)), ("c0>0, constant branch", k)]
        for branch, pt in forms:
            out.append(ReducedSolution(pt + base, branch, label, {"c0": c, "c1": c1}))
    if verify:
        ode = ReducedODE(hw, al, 0, 0)
        for s in out:
            r = _ode_residual(ode, s.phi, box)
            if r > 1e-8:
                raise ReductionFailure(f"{s.branch} with {label}: residual {r:.2e}")
    return out


def _ode_residual(ode: ReducedODE, phi, box: DomainBox) -> float:
    e = ode.apply(phi)
    pts = box.sample(64, ["omega"])
    vals, bad, _ = evaluate_array(e, pts)
    return float(np.max(np.abs(vals[~bad]))) if (~bad).any() else float("inf")


# ---------------------------------------------------------------------------
# catalogue of closed-form solutions


@dataclass
class CatalogueEntry:
    source: str
    u: sp.Expr
    f: sp.Expr
    box: DomainBox
    residual: ResidualReport | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.residual is not None and self.residual.passed


C0, C1, C2 = (param(n) for n in ("c0", "c1", "c2"))
COMMON_SOLUTIONS = (C0, (x + C1) / (t + C2))
_COMMON_VALUES = {C0: sp.Rational(3, 2), C1: sp.Rational(1, 3), C2: sp.Rational(1, 2)}


def _numeric_f(f, box: DomainBox):
    f = resolve_abs(sp.sympify(f), box)
    if freeze_jets(f)[1]:
        return None
    return f


def _sample_mid(box: DomainBox):
    return {n: 0.5 * (lo + hi) + 0.137 * (hi - lo) for n, lo, hi in box.intervals}


def _match_sqrt_family(f, box: DomainBox):
    """f = h0 |x - t^2/2 + mu|^(3/2): returns (h0, mu, eps) or None."""
    rho = sp.Abs(f) ** sp.Rational(2, 3)
    rho = resolve_abs(rho, box)
    try:
        slope = evaluate(sp.diff(rho, x), _sample_mid(box))
        if slope == 0:
            return None
        w = rho / slope
        mu = sp.nsimplify(evaluate(w - x + t**2 / 2, _sample_mid(box)), tolerance=1e-10, rational=True)
    except Exception:
        return None
    wexpr = x - t**2 / 2 + mu
    mid = _sample_mid(box)
    eps = 1 if evaluate(wexpr, mid) > 0 else -1
    h0 = sp.nsimplify(evaluate(f, mid) / abs(evaluate(wexpr, mid)) ** 1.5, tolerance=1e-10, rational=True)
    if h0 == 0 or not is_zero(f - h0 * (eps * wexpr) ** sp.Rational(3, 2), box).zero:
        return None
    return h0, mu, eps


def _match_stationary(f, box: DomainBox):
    """f = h0 exp(lam x) or f = h0 |x + lam|^p with p != 0."""
    if not is_zero(sp.diff(f, t), box).zero:
        return None
    mid = _sample_mid(box)
    g = sp.simplify(sp.diff(f, x) / f)
    if is_zero(sp.diff(g, x), box).zero:
        lam = sp.nsimplify(evaluate(g, mid), tolerance=1e-10, rational=True)
        if lam == 0:
            return None
        h0 = sp.nsimplify(evaluate(f * sp.exp(-lam * x), mid), tolerance=1e-10, rational=True)
        return ("exp", h0, lam) if is_zero(f - h0 * sp.exp(lam * x), box).zero else None
    r = sp.simplify(1 / g)
    if not is_zero(sp.diff(r, x, 2), box).zero:
        return None
    p = sp.nsimplify(1 / evaluate(sp.diff(r, x), mid), tolerance=1e-10, rational=True)
    lam = sp.nsimplify(evaluate(p * r - x, mid), tolerance=1e-10, rational=True)
    sgn = 1 if evaluate(x + lam, mid) > 0 else -1
    h0 = sp.nsimplify(evaluate(f, mid) / abs(evaluate(x + lam, mid)) ** float(p), tolerance=1e-10, rational=True)
    if not is_zero(f - h0 * (sgn * (x + lam)) ** p, box).zero:
        return None
    return ("power", h0, lam, p, sgn)


def solution_catalogue(f, box: DomainBox | None = None, *, verify: bool = True) -> list[CatalogueEntry]:
    """Closed-form solutions known for this f, each with its grid residual."""
    box = box or DomainBox()
    fexpr = parse(f) if isinstance(f, str) else sp.sympify(f)
    fnum = _numeric_f(fexpr, box)
    entries = [CatalogueEntry("common: constant", COMMON_SOLUTIONS[0].xreplace(_COMMON_VALUES), fexpr, box),
               CatalogueEntry("common: linear in x", COMMON_SOLUTIONS[1].xreplace(_COMMON_VALUES), fexpr, box)]
    if fnum is not None:
        m = _match_sqrt_family(fnum, box)
        if m is not None:
            h0, mu, eps = m
            disc = h0**2 - 32 * eps
            wexpr = eps * (x - t**2 / 2 + mu)
            if disc < 0:
                entries.append(CatalogueEntry("square-root family", sp.nan, fexpr, box,
                                              note=f"h0^2 - 32*eps = {disc} < 0, no real c"))
            else:
                for sgn in (1, -1):
                    c = (h0 + sgn * sp.sqrt(disc)) / (4 * eps)
                    entries.append(CatalogueEntry("square-root family", c * sp.sqrt(wexpr) + t, fexpr, box,
                                                  note=f"c = {sp.nsimplify(c)}"))
        s = _match_stationary(fnum, box)
        if s is not None and s[0] == "exp":
            _, h0, lam = s
            entries.append(CatalogueEntry("stationary: exponential", -lam * h0 * sp.exp(lam * x), fexpr, box))
        elif s is not None:
            _, h0, lam, p, sgn = s
            kap = 1 - 1 / p
            c = (1 - 2 * kap) / (1 - kap) * h0 * sgn if kap != 1 else sp.S.Zero
            # kappa = 1/2 gives c = 0, which only repeats the zero solution
            if c != 0:
                entries.append(CatalogueEntry("stationary: power", c * (sgn * (x + lam)) ** (kap * p), fexpr, box,
                                              note=f"kappa = {kap}"))
        entries += _subalgebra_solutions(fnum, box)
    if verify:
        for e in entries:
            if e.u is sp.nan:
                continue
            try:
                e.residual = pde_residual(e.f, e.u, e.box)
            except ExcessiveExclusion as err:
                e.note = (e.note + "; " if e.note else "") + str(err)
    return entries


def _subalgebra_solutions(f, box: DomainBox) -> list[CatalogueEntry]:
    out = [CatalogueEntry("two-dimensional subalgebra: u = 0", sp.S.Zero, f, box)]
    if is_zero(f - sp.exp(-x), box).zero:
        out.append(CatalogueEntry("g^{2.5}: u = exp(-x)", sp.exp(-x), f, box))
    s = _match_stationary(f, box)
    if s is not None and s[0] == "power" and s[1] == 1 and s[2] == 0 and s[3] != 2:
        a = 1 / (2 - s[3])
        sgn = s[4]
        out.append(CatalogueEntry(f"g^{{2.6}}_a, a = {a}: u = x|x|^(-1/a)/a",
                                  x * (sgn * x) ** (-1 / a) / a, f, box))
    kap = sp.simplify(f * t / x**2)
    if not kap.free_symbols and kap != 0:
        out.append(CatalogueEntry("g^{2.3}: u = x/t", x / t, f, box))
    return out


def case4_solutions(alpha, mu, nu, *, box: DomainBox | None = None) -> list[CatalogueEntry]:
    """Solutions of u_t + u u_x + f u_xx = 0 built from the widest reduced case:
    alpha = 0 through P^t (f = h(x)), alpha = 1 through D^t + D^x (f = t h(x/t))."""
    al = sp.nsimplify(alpha)
    hw = -al / 2 * omega**2 + sp.nsimplify(mu) * omega + sp.nsimplify(nu)
    if al == 0:
        label, a = "1.2", None
        box = box or DomainBox.of(t=(1.0, 2.0), x=(1.0, 2.0))
    elif al == 1:
        label, a = "1.6", 1
        box = box or DomainBox.of(t=(1.0, 2.0), x=(0.2, 1.0))
    else:
        raise NoReduction("only alpha = 0 and alpha = 1 come from reductions")
    ans = ansatz_for(label, a, box)
    fexpr = table_f(label, a, box).replace(h, sp.Lambda(omega, hw))
    lo, hi = _invariant_range(ans.invariant, box)
    wbox = DomainBox.of(omega=(lo, hi))
    out = []
    for c0, c1 in _regular_constants(al, mu, nu, wbox):
        for s in integrate_case4(al, mu, nu, c0=c0, c1=c1, box=wbox):
            e = CatalogueEntry(f"item 4, {s.variable}, {s.branch}", ans.u_of_class(s.phi), fexpr, box)
            e.residual = pde_residual(fexpr, e.u, box)
            out.append(e)
    return out


def _invariant_range(inv, box: DomainBox):
    pts = box.grid(20)
    vals, bad, _ = evaluate_array(inv, pts)
    return float(vals[~bad].min()), float(vals[~bad].max())


def _regular_constants(al, mu, nu, wbox: DomainBox) -> list[tuple]:
    """(c0, c1) for each sign branch such that the solution stays regular
    on the box: the tangent argument stays inside (-pi/2, pi/2) and
    w~ + c1 keeps away from zero."""
    _, wt = transformed_variable(al, mu, nu)
    vals, bad, _ = evaluate_array(resolve_abs(wt, wbox), wbox.sample(64, ["omega"]))
    lo, hi = float(np.min(vals[~bad])), float(np.max(vals[~bad]))
    k = sp.Integer(1) if hi - lo < 2 else 1 / sp.Integer(int(np.ceil(hi - lo)))
    centre = sp.nsimplify(round(-(lo + hi) / 4 * float(k), 2))
    shift = sp.Integer(int(np.ceil(-lo)) + 1)
    return [(-k**2, centre), (sp.S.Zero, shift), (k**2, sp.S.One)]


# ---------------------------------------------------------------------------
# induced and hidden symmetries


def _normaliser(s: Subalgebra, Q: VectorField) -> list[VectorField]:
    """Basis of the elements Y of s with [Y, Q] proportional to Q; the
    condition is linear once written as vanishing 2x2 minors."""
    if s.dim == 0:
        return []
    c = sp.symbols(f"k0:{s.dim}")
    Y = VectorField((0,) * 6)
    for ci, b in zip(c, s.basis):
        Y = Y + ci * b
    br = bracket_coords(Y, Q).coords
    eqs = [sp.expand(br[i] * Q.coords[j] - br[j] * Q.coords[i]) for i in range(6) for j in range(i + 1, 6)]
    M = sp.Matrix([[sp.diff(e, ci) for ci in c] for e in eqs if e != 0]) if any(eqs) else sp.zeros(0, s.dim)
    null = M.nullspace() if M.rows else [sp.Matrix([int(i == j) for j in range(s.dim)]) for i in range(s.dim)]
    out = []
    for vec in null:
        Yn = VectorField((0,) * 6)
        for ci, b in zip(vec, s.basis):
            Yn = Yn + ci * b
        out.append(Yn)
    return out


def pushdown(Y: VectorField, ans: Ansatz) -> ReducedGenerator | None:
    """The field induced by Y on (w, phi) of the class form, or None if it
    does not descend."""
    phi_expr = ans.class_phi()
    xi = Y.apply(ans.invariant)
    eta = Y.apply(phi_expr)
    xs = sp.solve(sp.Eq(ans.invariant, omega), x)
    if len(xs) != 1:
        raise ReductionFailure("ansatz is not invertible on the domain")
    back = {x: xs[0]}
    u_back = (ans.scale * (PHI[0] + ans.phi_shift) + ans.shift).xreplace(back)
    xi = sp.simplify(xi.xreplace({u: u_back}).xreplace(back))
    eta = sp.simplify(eta.xreplace({u: u_back}).xreplace(back))
    box = DomainBox.of(t=(1.0, 2.0), omega=(1.0, 2.0), phi=(-1.0, 1.0))
    for comp in (xi, eta):
        if comp.has(t) and not is_zero(sp.diff(comp, t), box).zero:
            return None
    return ReducedGenerator(sp.simplify(xi.subs(t, 1)), sp.simplify(eta.subs(t, 1)))


def induced_or_hidden(f, label: str, gen: ReducedGenerator, a=None,
                      box: DomainBox | None = None) -> str:
    box = box or DomainBox()
    fexpr = resolve_abs(parse(f) if isinstance(f, str) else sp.sympify(f), box)
    ans = ansatz_for(label, a, box)
    Q = parse_field(ans.basis)
    algebra = invariance_algebra(fexpr, box)
    induced = []
    for Y in _normaliser(algebra, Q):
        g = pushdown(Y, ans)
        if g is not None and not (sp.simplify(g.xi) == 0 and sp.simplify(g.eta) == 0):
            induced.append(g)
    return "induced" if _in_span(gen, induced) else "hidden"


def _in_span(gen: ReducedGenerator, fields: Sequence[ReducedGenerator]) -> bool:
    pts = DomainBox.of(omega=(1.1, 1.9), phi=(-0.8, 0.9)).sample(16, ["omega", "phi"])

    def column(g):
        xi, _, _ = evaluate_array(g.xi, pts)
        eta, _, _ = evaluate_array(g.eta, pts)
        return np.concatenate([xi, eta])

    if not fields:
        return np.allclose(column(gen), 0)
    M = np.column_stack([column(g) for g in fields])
    full = np.column_stack([M, column(gen)])
    tol = 1e-9 * max(1.0, np.abs(full).max())
    return np.linalg.matrix_rank(full, tol) == np.linalg.matrix_rank(M, tol)


__all__ = [
    "ReducedODE", "Ansatz", "Reduction", "REDUCTIONS", "lie_reduce", "ansatz_for", "table_f", "class_ode",
    "ReducedGenerator", "ReducedSymmetries", "reduced_symmetries", "invariance_criterion",
    "invariance_residual", "item5_first_integral", "item5_conservation", "integrate_case4",
    "transformed_variable", "ReducedSolution", "solution_catalogue", "CatalogueEntry", "case4_solutions",
    "induced_or_hidden", "pushdown", "COMMON_SOLUTIONS", "PHI", "NoReduction", "ReductionFailure",
]
