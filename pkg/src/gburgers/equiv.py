"""Equivalence group of the class: point transformations

    t~ = (alpha t + beta)/(gamma t + delta),
    x~ = (kappa x + mu1 t + mu0)/(gamma t + delta),
    u~ = (kappa (gamma t + delta) u - kappa gamma x + mu1 delta - mu0 gamma)/Delta,
    f~ = kappa^2 f / Delta,            Delta = alpha delta - beta gamma,

with the seven constants defined up to a common nonzero factor.

A transformation acts projectively on (t, x, 1) through the 3x3 matrix
[[alpha, 0, beta], [mu1, kappa, mu0], [gamma, 0, delta]], and u transforms
as the slope dx/dt.  Composition is the matrix product and the adjoint
action on the algebra is conjugation of the matching matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd, lcm
from typing import Mapping

import sympy as sp

from .expr import DomainBox, canonical, evaluate_array, t, u, vanishes, x
from .lie import Subalgebra, VectorField

_NAMES = ("alpha", "beta", "gamma", "delta", "kappa", "mu1", "mu0")


class DegenerateTransform(ValueError):
    pass


def _normalise(vals: tuple) -> tuple:
    vals = tuple(sp.nsimplify(v) if isinstance(v, float) else sp.sympify(v) for v in vals)
    lead = next((v for v in vals[:5] if v != 0), None)
    if all(v.is_Rational for v in vals):
        den = reduce(lcm, (int(v.q) for v in vals), 1)
        ints = [int(v * den) for v in vals]
        g = reduce(gcd, (abs(i) for i in ints), 0) or 1
        vals = tuple(sp.Integer(i // g) for i in ints)
        lead = next(v for v in vals[:5] if v != 0)
        return tuple(-v for v in vals) if lead < 0 else vals
    if lead is not None and lead.is_number:
        return tuple(sp.radsimp(sp.nsimplify(v / lead)) if v.is_number else sp.simplify(v / lead)
                     for v in vals)
    return vals


@dataclass(frozen=True)
class EquivTransform:
    alpha: sp.Expr = sp.S.One
    beta: sp.Expr = sp.S.Zero
    gamma: sp.Expr = sp.S.Zero
    delta: sp.Expr = sp.S.One
    kappa: sp.Expr = sp.S.One
    mu1: sp.Expr = sp.S.Zero
    mu0: sp.Expr = sp.S.Zero

    def __post_init__(self):
        vals = _normalise(tuple(getattr(self, n) for n in _NAMES))
        for n, val in zip(_NAMES, vals):
            object.__setattr__(self, n, val)
        if sp.simplify(self.determinant) == 0:
            raise DegenerateTransform("alpha*delta - beta*gamma vanishes")
        if sp.simplify(self.kappa) == 0:
            raise DegenerateTransform("kappa vanishes")

    @property
    def params(self) -> tuple:
        return tuple(getattr(self, n) for n in _NAMES)

    @property
    def determinant(self) -> sp.Expr:
        return self.alpha * self.delta - self.beta * self.gamma

    @property
    def f_factor(self) -> sp.Expr:
        """kappa^2/Delta, invariant under the common rescaling."""
        return sp.simplify(self.kappa**2 / self.determinant)

    def matrix(self) -> sp.Matrix:
        a, b, g, d, k, m1, m0 = self.params
        return sp.Matrix([[a, 0, b], [m1, k, m0], [g, 0, d]])

    @classmethod
    def from_matrix(cls, M: sp.Matrix) -> "EquivTransform":
        M = M.applyfunc(sp.simplify)
        if M[0, 1] != 0 or M[2, 1] != 0:
            raise ValueError("matrix is not of the equivalence-group shape")
        return cls(M[0, 0], M[0, 2], M[2, 0], M[2, 2], M[1, 1], M[1, 0], M[1, 2])

    # -- point map ----------------------------------------------------------
    def point_map(self, tt=t, xx=x, uu=u) -> tuple[sp.Expr, sp.Expr, sp.Expr]:
        a, b, g, d, k, m1, m0 = self.params
        den = g * tt + d
        return ((a * tt + b) / den,
                (k * xx + m1 * tt + m0) / den,
                (k * den * uu - k * g * xx + m1 * d - m0 * g) / self.determinant)

    def to_dict(self) -> dict:
        return {n: str(getattr(self, n)) for n in _NAMES}

    @classmethod
    def from_dict(cls, d: Mapping) -> "EquivTransform":
        return cls(*(sp.sympify(d[n]) for n in _NAMES))

    def __str__(self) -> str:
        return "(" + ", ".join(f"{n}={getattr(self, n)}" for n in _NAMES) + ")"


IDENTITY = EquivTransform()


def compose(T1: EquivTransform, T2: EquivTransform) -> EquivTransform:
    """T1 after T2."""
    return EquivTransform.from_matrix(T1.matrix() * T2.matrix())


def inverse(T: EquivTransform) -> EquivTransform:
    return EquivTransform.from_matrix(T.matrix().adjugate())


def compose_all(*Ts: EquivTransform) -> EquivTransform:
    """Product T1 T2 ... Tn, so the last one is applied first."""
    return reduce(compose, Ts, IDENTITY)


# -- elementary families ------------------------------------------------------


def time_translation(beta) -> EquivTransform:
    return EquivTransform(beta=beta)


def space_translation(mu0) -> EquivTransform:
    return EquivTransform(mu0=mu0)


def time_scaling(alpha) -> EquivTransform:
    return EquivTransform(alpha=alpha)


def space_scaling(kappa) -> EquivTransform:
    return EquivTransform(kappa=kappa)


def galilean_boost(mu1) -> EquivTransform:
    return EquivTransform(mu1=mu1)


def projective(gamma) -> EquivTransform:
    return EquivTransform(gamma=gamma)


def time_reflection() -> EquivTransform:
    """(t, u, f) -> (-t, -u, -f)."""
    return EquivTransform(alpha=-1)


def space_reflection() -> EquivTransform:
    """(x, u) -> (-x, -u)."""
    return EquivTransform(kappa=-1)


ELEMENTARY = {
    "P^t": time_translation,
    "P^x": space_translation,
    "D^t": time_scaling,
    "D^x": space_scaling,
    "G": galilean_boost,
    "Pi": projective,
}


# -- actions --------------------------------------------------------------------


class SingularInversion(ValueError):
    pass


def push_f(T: EquivTransform, f) -> sp.Expr:
    """Image of the arbitrary element, written in the names (t, x)."""
    tt, xx, _ = inverse(T).point_map()
    out = T.f_factor * sp.sympify(f).xreplace({t: tt, x: xx})
    if out.has(sp.zoo, sp.nan):
        raise SingularInversion(str(T))
    return out


def _field_matrix(X: VectorField) -> sp.Matrix:
    c0, c1, c2, c3, c4, c5 = X.coords
    return sp.Matrix([[c2, 0, c0], [c4, c3, c1], [-c5, 0, 0]])


def _matrix_field(m: sp.Matrix) -> VectorField:
    d = m[2, 2]
    return VectorField(tuple(sp.simplify(c) for c in (
        m[0, 2], m[1, 2], m[0, 0] - d, m[1, 1] - d, m[1, 0], -m[2, 0])))


def adjoint(T: EquivTransform, X: VectorField) -> VectorField:
    """Pushforward of X by T, computed by matrix conjugation."""
    M = T.matrix()
    return _matrix_field(M * _field_matrix(X) * M.adjugate() / M.det())


def adjoint_algebra(T: EquivTransform, s: Subalgebra) -> Subalgebra:
    return Subalgebra.span([adjoint(T, b) for b in s.basis])


def pushforward(T: EquivTransform, X: VectorField) -> VectorField:
    """Pushforward of X computed directly on (t, x, u); slower twin of adjoint."""
    new = T.point_map()
    old = inverse(T).point_map()
    back = {t: old[0], x: old[1], u: old[2]}
    comps = [sp.simplify(X.apply(c).xreplace(back)) for c in new]
    return VectorField.from_components(*comps)


def admissible_check(f, T: EquivTransform, f_new, box: DomainBox | None = None) -> bool:
    """Whether T maps the equation with f to the one with f_new."""
    return vanishes(push_f(T, f) - sp.sympify(f_new), box)


def image_box(T: EquivTransform, box: DomainBox, n: int = 64) -> tuple[DomainBox, dict]:
    """Images of sample points of ``box`` under T and their bounding box.

    The image of a box is not a box, so sampling should use the returned
    points; the bounding box only serves as a fallback domain."""
    pts = box.sample(n, ["t", "x"])
    tt, xx, _ = T.point_map()
    vt, bad_t, _ = evaluate_array(tt, pts)
    vx, bad_x, _ = evaluate_array(xx, pts)
    if (bad_t | bad_x).any():
        raise SingularInversion("gamma t + delta vanishes on the box")
    return DomainBox.of(t=(vt.min(), vt.max()), x=(vx.min(), vx.max())), {"t": vt, "x": vx}


def transform_solution(T: EquivTransform, sol) -> sp.Expr:
    """Image of a solution u(t, x), written in the names (t, x)."""
    tt, xx, _ = inverse(T).point_map()
    _, _, uu = T.point_map(uu=sp.sympify(sol))
    return canonical(uu.xreplace({t: tt, x: xx}))


__all__ = [
    "EquivTransform", "IDENTITY", "compose", "compose_all", "inverse", "push_f", "adjoint",
    "adjoint_algebra", "pushforward", "admissible_check", "time_translation",
    "space_translation", "time_scaling", "space_scaling", "galilean_boost", "projective",
    "time_reflection", "space_reflection", "ELEMENTARY", "transform_solution", "image_box",
]
