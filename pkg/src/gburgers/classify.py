"""Lie symmetry classification of u_t + u u_x + f u_xx = 0.

A field with components (tau, xi) from the six-dimensional algebra is a
symmetry of the equation with coefficient f exactly when

    tau f_t + xi f_x + (tau_t - 2 xi_x) f = 0.

``invariance_algebra`` solves this linear condition by sampling, rounding
and re-verification.  ``match_case`` then names the algebra by its
structure invariants and builds an equivalence transformation that brings
it to the listed normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import sympy as sp

from . import equiv
from .equiv import EquivTransform, adjoint, adjoint_algebra, compose_all, push_f
from .expr import (
    DomainBox, VARIABLES, ZeroStatus, evaluate, evaluate_array, freeze_jets, h, is_zero, omega,
    param, parse, resolve_abs, t, x,
)
from .lie import (
    BASIS, DT, DX, GAL, HALF, NILRADICAL, PI, PT, PX, RADICAL, Signature, Subalgebra, VectorField,
    bracket_coords, structure_invariants,
)
from .verify import nullspace

A, KAPPA, EPS = param("a"), param("kappa"), param("eps")


class UnverifiedKernel(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NoCaseMatches(ValueError):
    pass


class GaugeFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# solving the classifying condition


def _drop_delta(e):
    return e.replace(lambda a: isinstance(a, sp.DiracDelta), lambda a: sp.S.Zero) if e.has(sp.DiracDelta) else e


def classifying_coefficients(f) -> list[sp.Expr]:
    """The condition evaluated on each basis field; its kernel is the algebra."""
    f = sp.sympify(f)
    ft = _drop_delta(sp.diff(f, t))
    fx = _drop_delta(sp.diff(f, x))
    out = []
    for b in BASIS:
        tau, xi = b.tau, b.xi
        out.append(tau * ft + xi * fx + (sp.diff(tau, t) - 2 * sp.diff(xi, x)) * f)
    return out


def classifying_residual(f, X: VectorField) -> sp.Expr:
    return sum((c * e for c, e in zip(X.coords, classifying_coefficients(f))), sp.S.Zero)


def _prepare(f, box: DomainBox, params: Mapping | None):
    f = parse(f) if isinstance(f, str) else sp.sympify(f)
    if params:
        f = f.xreplace({param(k) if isinstance(k, str) else k: sp.nsimplify(val) for k, val in params.items()})
    return resolve_abs(f, box)


def invariance_algebra(f, box: DomainBox | None = None, *, params: Mapping | None = None,
                       points: Mapping | None = None, n_points: int | None = None) -> Subalgebra:
    """Maximal Lie invariance algebra inside the six-dimensional algebra.

    ``points`` may supply (t, x) samples directly, e.g. the image of a box
    under a transformation.  Applied h-atoms are sampled as independent
    values, so the result is the algebra for arbitrary h."""
    box = box or DomainBox()
    f = _prepare(f, box, params)
    coeffs = classifying_coefficients(f)
    frozen, mapping = freeze_jets(sp.Tuple(*coeffs))
    jets = sorted(s.name for s in mapping.values())
    extra = sorted({s.name for s in frozen.free_symbols} - {"t", "x"} - set(jets))
    if extra:
        raise ValueError(f"unassigned parameters {extra}; pass numeric values")
    n = n_points or max(24, 4 * 6) + 8 * len(jets)
    if points is None:
        pts = box.sample(n, ["t", "x", *jets])
    else:
        pts = {k: np.asarray(v, dtype=float) for k, v in points.items()}
        if jets:
            size = len(pts["t"])
            pts.update(DomainBox(()).extended(jets).sample(size, jets))
    cols, bad = [], None
    for c in frozen:
        vals, b, _ = evaluate_array(c, pts)
        cols.append(vals)
        bad = b if bad is None else bad | b
    M = np.column_stack(cols)[~bad]
    if M.shape[0] < 24:
        raise UnverifiedKernel("too few regular sample points", float("nan"))
    norms = np.max(np.abs(M), axis=1)
    M = M[norms > 0] / norms[norms > 0, None]
    if M.shape[0] == 0:
        return Subalgebra.span(BASIS)
    result = nullspace(M)
    if not result.exact:
        raise UnverifiedKernel("kernel did not round to small rationals", result.residual)
    fields = [VectorField(tuple(sp.Rational(c.numerator, c.denominator) for c in vec)) for vec in result.vectors]
    for X in fields:
        status = is_zero(classifying_residual(f, X), box)
        if not status.zero:
            raise UnverifiedKernel(f"candidate {X} fails re-verification ({status.value})", result.residual)
    out = Subalgebra.span(fields)
    if not out.is_closed():
        raise UnverifiedKernel(f"sampled kernel {out} is not closed under brackets", result.residual)
    return out


# ---------------------------------------------------------------------------
# the classification list


@dataclass(frozen=True)
class CaseSpec:
    label: str
    basis: tuple
    f: str
    omega: str | None
    constraints: str
    parameter: str | None
    sample: tuple
    box: DomainBox

    def basis_fields(self, a=None) -> list[VectorField]:
        from .lie import parse_field

        fields = []
        for text in self.basis:
            if a is not None:
                text = text.replace("a*", f"({a})*")
            fields.append(parse_field(text))
        return fields

    def span(self, a=None) -> Subalgebra:
        return Subalgebra.span(self.basis_fields(a))

    def f_expr(self, **values) -> sp.Expr:
        e = parse(self.f)
        subs = {}
        for k, val in values.items():
            if k == "h":
                continue
            subs[param(k)] = sp.nsimplify(val)
        e = e.xreplace(subs)
        if "h" in values:
            e = e.replace(h, sp.Lambda(omega, parse(values["h"]) if isinstance(values["h"], str) else values["h"]))
        return e

    def sample_f(self) -> sp.Expr:
        return self.f_expr(**dict(self.sample))

    @property
    def sample_a(self):
        return dict(self.sample).get("a")

    def display(self) -> str:
        return f"g^{{{self.label}}}" + ("_a" if self.parameter == "a" else "")


_H = "omega^3+2"
_BOX = DomainBox()

CASES: dict[str, CaseSpec] = {c.label: c for c in [
    CaseSpec("1.1", ("D^x",), "x^2*h(t)", "t", "((alpha*w^2+beta*w+gamma)*h)_w != 0", None,
             (("h", _H),), _BOX),
    CaseSpec("1.2", ("P^t",), "h(x)", "x", "(alpha*w+beta)*h_w != gamma*h", None, (("h", _H),), _BOX),
    CaseSpec("1.3", ("P^t+G",), "h(x-t^2/2)", "x-t^2/2", "(alpha*w+beta)*h_w != gamma*h", None,
             (("h", _H),), _BOX),
    CaseSpec("1.4", ("P^t+D^x",), "exp(2*t)*h(exp(-t)*x)", "exp(-t)*x", "h_w != 0, w*h_w != 2*h", None,
             (("h", _H),), _BOX),
    CaseSpec("1.5", ("D^t+P^x",), "h(x-ln(abs(t)))/t", "x-ln(abs(t))", "h_w != 0, h_w != -h", None,
             (("h", _H),), _BOX),
    CaseSpec("1.6", ("D^t+a*D^x",), "abs(t)^(2*a)/t*h(abs(t)^(-a)*x)", "abs(t)^(-a)*x",
             "h_w != 0; a*(w+alpha)*h_w != (2a-1)*h if (a-2)(a-1)alpha=0; (w+beta)*h_w != 2h if "
             "(a-1)a*beta=0; (a-1)(w+gamma)*h_w != (2a-1)h if a(a+1)gamma=0; a >= 1/2",
             "a", (("h", _H), ("a", 2)), _BOX),
    CaseSpec("1.7", ("D^t+D^x+G",), "t*h(x/t-ln(abs(t)))", "x/t-ln(abs(t))", "h_w != 0, h_w != -h", None,
             (("h", _H),), _BOX),
    CaseSpec("1.8", ("P^t+Pi+a*D^x",), "exp(2*a*arctan(t))*h(x*exp(-a*arctan(t))/sqrt(t^2+1))",
             "x*exp(-a*arctan(t))/sqrt(t^2+1)", "w*h_w != 2*h; a >= 0", "a",
             (("h", _H), ("a", 2)), _BOX),
    CaseSpec("2.1", ("P^x", "G"), "h(t)", "t", "(alpha*w^2+beta*w+gamma)*h_w != delta*h", None,
             (("h", _H),), _BOX),
    CaseSpec("2.2", ("D^x", "P^t"), "x^2", None, "", None, (), _BOX),
    CaseSpec("2.3", ("D^x", "D^t"), "kappa*x^2/t", None, "kappa != 0, kappa > 0 mod equivalence", "kappa",
             (("kappa", 1),), _BOX),
    CaseSpec("2.4", ("D^x", "P^t+Pi"), "kappa*x^2/(t^2+1)", None, "kappa != 0, kappa > 0 mod equivalence",
             "kappa", (("kappa", 1),), _BOX),
    CaseSpec("2.5", ("P^t", "D^t+P^x"), "exp(-x)", None, "", None, (), _BOX),
    CaseSpec("2.6", ("P^t", "D^t+a*D^x"), "abs(x)^(2-1/a)", None, "a != 0, 1/2", "a", (("a", 2),), _BOX),
    CaseSpec("2.7", ("P^t+G", "D^t+2*D^x"), "kappa*abs(x-t^2/2)^(3/2)", None,
             "kappa != 0, kappa > 0 mod equivalence", "kappa", (("kappa", 1),),
             DomainBox.of(t=(0.2, 1.0), x=(1.0, 2.0))),
    CaseSpec("3.1", ("P^x", "G", "P^t+1/2*D^x"), "eps*exp(t)", None, "eps = +-1", "eps", (("eps", 1),), _BOX),
    CaseSpec("3.2", ("P^x", "G", "D^t+a*D^x"), "eps*abs(t)^(2*a-1)", None, "a > 1/2, eps = +-1", "a",
             (("a", 2), ("eps", 1)), _BOX),
    CaseSpec("3.3", ("P^x", "G", "P^t+Pi+a*D^x"), "eps*exp(2*a*arctan(t))", None, "a > 0, eps = +-1", "a",
             (("a", 2), ("eps", 1)), _BOX),
    CaseSpec("5", ("P^x", "G", "P^t", "D^t+1/2*D^x", "Pi"), "1", None, "", None, (), _BOX),
]}

# The inversion t -> -1/t, x -> x/t maps D^t+P^x to a multiple of D^t+D^x-G
# and h(x-ln t)/t to t*h~(x/t-ln t), so the two rows describe one orbit.
ALIASES = {"1.5": ("1.7",)}


@dataclass
class ClassificationResult:
    algebra: Subalgebra
    case_label: str
    parameters: dict = field(default_factory=dict)
    gauge: EquivTransform | None = None
    normal_form: sp.Expr | None = None
    assumptions: list = field(default_factory=list)
    also_listed_as: tuple = ()

    @property
    def signature(self) -> Signature:
        return structure_invariants(self.algebra)

    def display_label(self) -> str:
        if self.case_label == "trivial":
            return "trivial"
        return f"g^{{{self.case_label}}}" + ("_a" if self.case_label in ("1.6", "1.8", "2.6", "3.2", "3.3") else "")


# ---------------------------------------------------------------------------
# normal forms


def _mat(X: VectorField) -> sp.Matrix:
    c0, c1, c2, c3, c4, c5 = X.coords
    return sp.Matrix([[c2, 0, c0], [c4, c3, c1], [-c5, 0, 0]])


def _tau_disc(X: VectorField) -> sp.Expr:
    c0, _, c2, _, _, c5 = X.coords
    return sp.simplify(c2**2 - 4 * c0 * c5)


def _tau_zero(X: VectorField) -> bool:
    c0, _, c2, _, _, c5 = X.coords
    return c0 == 0 and c2 == 0 and c5 == 0


def _centre_coeff(X: VectorField) -> sp.Expr:
    return sp.simplify(X.coords[3] - X.coords[2] / 2)


def _jordan3(X: VectorField) -> bool:
    """For a field whose matrix has a single eigenvalue: does the nilpotent
    part have a block of size three?"""
    N = _mat(X) - (X.coords[2] / 2) * sp.eye(3)
    return (N * N).applyfunc(sp.simplify) != sp.zeros(3, 3)


def _split_parameter(X: VectorField) -> sp.Expr:
    """For a field with two real roots of tau: the relative position of the
    x-eigenvalue, folded into [1/2, oo) by the root swap."""
    c2, c3 = X.coords[2], X.coords[3]
    s = sp.sqrt(_tau_disc(X))
    low = (c2 - s) / 2
    ap = sp.nsimplify(sp.simplify((c3 - low) / s))
    return sp.Max(ap, 1 - ap)


def _elliptic_parameter(X: VectorField) -> sp.Expr:
    omega_ = sp.sqrt(-_tau_disc(X)) / 2
    return sp.nsimplify(sp.simplify(sp.Abs(_centre_coeff(X)) / omega_))


def _diagonalisable_at(X: VectorField) -> bool:
    M = _mat(X) - X.coords[3] * sp.eye(3)
    return M.rank(simplify=True) == 1


def _outside(s: Subalgebra, sub: Subalgebra) -> list[VectorField]:
    return [b for b in s.basis if not sub.contains(b)]


def _intersection(s: Subalgebra, sub: Subalgebra) -> list[VectorField]:
    """Basis of s ∩ sub."""
    k, m = s.dim, sub.dim
    if k == 0 or m == 0:
        return []
    M = sp.Matrix([list(b.coords) for b in s.basis] + [[-v for v in c.coords] for c in sub.basis]).T
    null = M.nullspace()
    out = []
    for vec in null:
        X = VectorField((0,) * 6)
        for i in range(k):
            X = X + vec[i] * s.basis[i]
        out.append(X)
    return out


def identify(s: Subalgebra) -> tuple[str, sp.Expr | None]:
    """Case label and essential parameter ``a`` from the algebra alone."""
    sig = structure_invariants(s)
    dim = sig.dim
    if dim == 0:
        return "trivial", None
    if dim == 5 and sig == (5, 2, 2, 3, 0):
        return "5", None
    if dim == 1:
        Q = s.basis[0]
        if _tau_zero(Q):
            if Q.coords[3] != 0:
                return "1.1", None
            raise NoCaseMatches("a one-dimensional algebra inside the nilradical is never maximal")
        disc = _tau_disc(Q)
        if disc < 0:
            return "1.8", _elliptic_parameter(Q)
        if disc == 0:
            if _centre_coeff(Q) != 0:
                return "1.4", None
            return ("1.3" if _jordan3(Q) else "1.2"), None
        a = _split_parameter(Q)
        if a == 1 and not _diagonalisable_at(Q):
            return "1.5", None
        return "1.6", a
    if dim == 2:
        if sig == (2, 2, 2, 0, 0):
            return "2.1", None
        if sig[:3] == (2, 1, 0):
            Q = _outside(s, RADICAL)[0]
            disc = _tau_disc(Q)
            return ("2.2" if disc == 0 else "2.3" if disc > 0 else "2.4"), None
        if sig[:4] == (2, 0, 0, 2):
            Q1, Q2 = _borel_pair(s)
            a = sp.nsimplify(sp.simplify(Q2.coords[3] - (Q2.coords[2] - 1) / 2))
            if _jordan3(Q1):
                if a != 2:
                    raise NoCaseMatches("inconsistent two-dimensional algebra")
                return "2.7", None
            if a == 0:
                if _diagonalisable_at(Q2):
                    raise NoCaseMatches("<P^t, D^t> is never an invariance algebra")
                return "2.5", None
            if a == HALF:
                raise NoCaseMatches("algebra is not maximal (constant f)")
            return "2.6", a
    if dim == 3 and sig[:3] == (3, 2, 2):
        Q = _outside(s, NILRADICAL)[0]
        disc = _tau_disc(Q)
        if disc == 0:
            if _centre_coeff(Q) == 0:
                raise NoCaseMatches("algebra is not maximal (constant f)")
            return "3.1", None
        if disc > 0:
            return "3.2", _split_parameter(Q)
        return "3.3", _elliptic_parameter(Q)
    raise NoCaseMatches(f"no listed case has invariants {tuple(sig)}")


def _borel_pair(s: Subalgebra) -> tuple[VectorField, VectorField]:
    b0, b1 = s.basis
    Q1 = bracket_coords(b0, b1)
    Q2 = b1 if Subalgebra.span([Q1, b1]).dim == 2 else b0
    lam = _ratio(bracket_coords(Q1, Q2), Q1)
    return Q1, Q2 / lam


def _ratio(X: VectorField, Y: VectorField) -> sp.Expr:
    for a, b in zip(X.coords, Y.coords):
        if b != 0:
            return sp.simplify(a / b)
    raise ValueError("zero field")


# -- gauge construction -------------------------------------------------------


def _roots(X: VectorField):
    """Roots of tau on the projective line (None stands for infinity)."""
    c0, _, c2, _, _, c5 = X.coords
    if c5 != 0:
        disc = c2**2 - 4 * c0 * c5
        s = sp.sqrt(disc)
        return [sp.radsimp((-c2 + s) / (2 * c5)), sp.radsimp((-c2 - s) / (2 * c5))]
    if c2 != 0:
        return [sp.simplify(-c0 / c2), None]
    return [None, None]


def _to_infinity(r) -> EquivTransform:
    if r is None:
        return equiv.IDENTITY
    return EquivTransform(alpha=0, beta=-1, gamma=1, delta=-r)


def _zero_and_infinity(ra, rb) -> EquivTransform:
    """Moebius map sending ra to 0 and rb to infinity."""
    if rb is None:
        return equiv.time_translation(-ra)
    if ra is None:
        return EquivTransform(alpha=0, beta=-1, gamma=1, delta=-rb)
    return EquivTransform(alpha=1, beta=-ra, gamma=1, delta=-rb)


def _to_plus_minus_i(X: VectorField) -> EquivTransform:
    c0, _, c2, _, _, c5 = X.coords
    p = -c2 / (2 * c5)
    q = sp.sqrt(4 * c0 * c5 - c2**2) / (2 * abs(c5))
    return EquivTransform(alpha=1, beta=-p, gamma=0, delta=q)


def _remove_nil_part(keys: Sequence[VectorField]) -> EquivTransform:
    """Galilean boost and space shift cancelling the P^x, G parts of the key
    fields as far as possible."""
    m0, m1 = sp.symbols("m0 m1")
    eqs = []
    for K in keys:
        c0, c1, c2, c3, c4, c5 = K.coords
        eqs += [c0 * m1 - c3 * m0 + c1, (c2 - c3) * m1 - c5 * m0 + c4]
    eqs = [sp.expand(e) for e in eqs]
    eqs = [e for e in eqs if e.free_symbols]
    sol = sp.linsolve(eqs, [m0, m1]) if eqs else {(0, 0)}
    if not sol:
        raise GaugeFailure("radical part cannot be removed")
    vals = next(iter(sol))
    vals = [sp.S.Zero if v.free_symbols else v for v in (sp.sympify(val).subs({m0: 0, m1: 0}) for val in vals)]
    return compose_all(equiv.galilean_boost(vals[1]), equiv.space_translation(vals[0]))


def _apply(T: EquivTransform, X: VectorField) -> VectorField:
    return adjoint(T, X)


def _gauge(s: Subalgebra, label: str, a) -> EquivTransform:
    I = equiv.IDENTITY
    if label in ("trivial", "5", "2.1"):
        return I
    if label == "1.1":
        Q = s.basis[0] / s.basis[0].coords[3]
        return _remove_nil_part([Q])
    if label in ("1.2", "1.3", "1.4", "1.5", "1.6", "1.8"):
        Q = s.basis[0]
        if label == "1.8":
            M = _to_plus_minus_i(Q)
            Q1 = _apply(M, Q)
            Q1 = Q1 / Q1.coords[0]
        elif label in ("1.2", "1.3", "1.4"):
            M = _to_infinity(_roots(Q)[0])
            Q1 = _apply(M, Q)
            Q1 = Q1 / Q1.coords[0]
        else:
            target = 0 if label == "1.5" else a
            r = _roots(Q)
            for ra, rb in ((r[0], r[1]), (r[1], r[0])):
                M = _zero_and_infinity(ra, rb)
                Q1 = _apply(M, Q)
                Q1 = Q1 / Q1.coords[2]
                if sp.simplify(Q1.coords[3] - target) == 0:
                    break
            else:
                raise GaugeFailure("no root assignment gives the listed parameter")
        S = _remove_nil_part([Q1])
        Q2 = _apply(S, Q1)
        c = Q2.coords
        if label == "1.3":
            scale = equiv.space_scaling(1 / c[4])
        elif label == "1.4":
            scale = equiv.time_scaling(c[3])
        elif label == "1.5":
            scale = equiv.space_scaling(1 / c[1])
        elif label == "1.8":
            scale = equiv.time_reflection() if c[3] < 0 else I
        else:
            scale = I
        return compose_all(scale, S, M)
    if label in ("2.2", "2.3", "2.4"):
        Z = _intersection(s, RADICAL)[0]
        Q = _outside(s, RADICAL)[0]
        if label == "2.4":
            M = _to_plus_minus_i(Q)
        elif label == "2.2":
            M = _to_infinity(_roots(Q)[0])
        else:
            r = _roots(Q)
            M = _zero_and_infinity(r[0], r[1])
        Z1 = _apply(M, Z)
        return compose_all(_remove_nil_part([Z1 / Z1.coords[3]]), M)
    if label in ("2.5", "2.6", "2.7"):
        Q1, Q2 = _borel_pair(s)
        r1 = _roots(Q1)[0]
        r2 = [r for r in _roots(Q2) if not _same_root(r, r1)]
        r_other = r2[0] if r2 else _roots(Q2)[1]
        M = _zero_and_infinity(r_other, r1)
        P1 = _apply(M, Q1)
        P1 = P1 / P1.coords[0]
        P2 = _apply(M, Q2)
        P2 = P2 - P2.coords[0] * P1
        S = _remove_nil_part([P1, P2])
        P1, P2 = _apply(S, P1), _apply(S, P2)
        if label == "2.5":
            scale = equiv.space_scaling(1 / P2.coords[1])
        elif label == "2.7":
            scale = equiv.space_scaling(1 / P1.coords[4])
        else:
            scale = I
        return compose_all(scale, S, M)
    if label in ("3.1", "3.2", "3.3"):
        Q = _outside(s, NILRADICAL)[0]
        if label == "3.1":
            M = _to_infinity(_roots(Q)[0])
            Q1 = _apply(M, Q)
            Q1 = Q1 / Q1.coords[0]
            return compose_all(equiv.time_scaling(2 * Q1.coords[3]), M)
        if label == "3.3":
            M = _to_plus_minus_i(Q)
            Q1 = _apply(M, Q)
            Q1 = Q1 / Q1.coords[0]
            return compose_all(equiv.time_reflection(), M) if Q1.coords[3] < 0 else M
        r = _roots(Q)
        for ra, rb in ((r[0], r[1]), (r[1], r[0])):
            M = _zero_and_infinity(ra, rb)
            Q1 = _apply(M, Q)
            if sp.simplify(Q1.coords[3] / Q1.coords[2] - a) == 0:
                return M
        raise GaugeFailure("no root assignment gives the listed parameter")
    raise GaugeFailure(f"no gauge recipe for {label}")


def _same_root(r, s) -> bool:
    if r is None or s is None:
        return r is s
    return sp.simplify(r - s) == 0


def _shape(label: str, a) -> sp.Expr | None:
    shapes = {
        "2.3": x**2 / t, "2.4": x**2 / (t**2 + 1), "2.7": sp.Abs(x - t**2 / 2) ** sp.Rational(3, 2),
        "3.1": sp.exp(t), "5": sp.S.One,
    }
    if label == "3.2":
        return sp.Abs(t) ** (2 * a - 1)
    if label == "3.3":
        return sp.exp(2 * a * sp.atan(t))
    return shapes.get(label)


def _reference_point(T: EquivTransform, f, box: DomainBox):
    """A regular point of the original box and its image."""
    pts = box.sample(16, ["t", "x"])
    for i in range(len(pts["t"])):
        p = {"t": float(pts["t"][i]), "x": float(pts["x"][i])}
        try:
            image = [evaluate(c, p) for c in T.point_map()[:2]]
            fval = evaluate(f, p)
            return p, {"t": image[0], "x": image[1]}, fval
        except Exception:
            continue
    raise GaugeFailure("no regular reference point")


def match_case(f, algebra: Subalgebra | None = None, box: DomainBox | None = None, *,
               params: Mapping | None = None) -> ClassificationResult:
    box = box or DomainBox()
    fexpr = _prepare(f, box, params)
    if algebra is None:
        algebra = invariance_algebra(fexpr, box)
    label, a = identify(algebra)
    gauge = _gauge(algebra, label, a)
    target = CASES[label].span(a) if label in CASES else Subalgebra(())
    if adjoint_algebra(gauge, algebra) != target:
        raise GaugeFailure(f"gauge does not reach the listed form of {label}")
    out = ClassificationResult(algebra, label, gauge=gauge, also_listed_as=ALIASES.get(label, ()))
    if a is not None:
        out.parameters["a"] = a
    shape = _shape(label, a)
    if shape is not None and not freeze_jets(fexpr)[1]:
        _, image, fval = _reference_point(gauge, fexpr, box)
        ratio = float(gauge.f_factor) * fval / evaluate(shape, image)
        if label in ("2.3", "2.4", "2.7"):
            out.parameters["kappa"] = sp.nsimplify(abs(ratio), tolerance=1e-10, rational=True)
        elif label == "5":
            out.gauge = equiv.compose(equiv.time_scaling(sp.nsimplify(ratio, tolerance=1e-12, rational=True)), gauge) \
                if abs(ratio - 1) > 1e-12 else gauge
        else:
            out.parameters["eps"] = 1 if ratio > 0 else -1
            k = sp.nsimplify(abs(ratio), tolerance=1e-12, rational=True)
            if k != 1:
                out.gauge = equiv.compose(equiv.space_scaling(1 / sp.sqrt(k)), gauge)
    if label in CASES:
        spec = CASES[label]
        if spec.constraints:
            out.assumptions.append(f"{out.display_label()}: {spec.constraints}")
    if out.gauge is not None:
        out.normal_form = push_f(out.gauge, fexpr)
    return out


def classify(f, box: DomainBox | None = None, *, params: Mapping | None = None,
             points: Mapping | None = None) -> ClassificationResult:
    """Invariance algebra plus case; ``points`` overrides sampling of the box."""
    box = box or DomainBox()
    fexpr = _prepare(f, box, params)
    return match_case(fexpr, invariance_algebra(fexpr, box, points=points), box)


def kernel_check(panel: Sequence, box: DomainBox | None = None) -> Subalgebra:
    """Intersection of the invariance algebras of a panel of coefficients."""
    if not panel:
        raise ValueError("empty panel")
    common: Subalgebra | None = None
    for item in panel:
        f, b = item if isinstance(item, tuple) else (item, box)
        s = invariance_algebra(f, b or DomainBox())
        if common is None:
            common = s
        else:
            common = Subalgebra.span(_intersection(common, s))
    return common


KERNEL_PANEL = (
    "1", "exp(-x)", "x^2", "exp(t)", "x^2/t", "exp(t+x^2)", "abs(x)^(3/2)",
)


def case_label(f, box: DomainBox | None = None, **kw) -> str:
    return classify(f, box, **kw).case_label


__all__ = [
    "invariance_algebra", "match_case", "classify", "identify", "kernel_check", "case_label",
    "CASES", "ALIASES", "ClassificationResult", "CaseSpec", "NoCaseMatches", "GaugeFailure",
    "UnverifiedKernel", "classifying_coefficients", "classifying_residual", "KERNEL_PANEL",
    "VARIABLES", "ZeroStatus", "PT", "PX", "DT", "DX", "GAL", "PI", "HALF",
]
