"""The six-dimensional algebra spanned by P^t, P^x, D^t, D^x, G, Pi.

Elements are stored by their coordinates in that ordered basis.  The
realisation as vector fields on (t, x, u) is

    P^t = d_t,  P^x = d_x,  D^t = t d_t - u d_u,  D^x = x d_x + u d_u,
    G = t d_x + d_u,  Pi = t^2 d_t + t x d_x + (x - t u) d_u.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import sympy as sp

from .expr import t, u, x

BASIS_NAMES = ("P^t", "P^x", "D^t", "D^x", "G", "Pi")


def _num(c) -> sp.Expr:
    return sp.nsimplify(c) if isinstance(c, float) else sp.sympify(c)


class NotInAlgebra(ValueError):
    pass


@dataclass(frozen=True)
class VectorField:
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != 6:
            raise ValueError("a field needs exactly six coordinates")
        object.__setattr__(self, "coords", tuple(_num(c) for c in self.coords))

    # -- components --------------------------------------------------------
    @property
    def tau(self) -> sp.Expr:
        c0, _, c2, _, _, c5 = self.coords
        return c5 * t**2 + c2 * t + c0

    @property
    def xi(self) -> sp.Expr:
        _, c1, _, c3, c4, c5 = self.coords
        return (c5 * t + c3) * x + c4 * t + c1

    @property
    def eta(self) -> sp.Expr:
        _, _, c2, c3, c4, c5 = self.coords
        return (-c5 * t + c3 - c2) * u + c5 * x + c4

    def components(self) -> tuple[sp.Expr, sp.Expr, sp.Expr]:
        return self.tau, self.xi, self.eta

    @classmethod
    def from_components(cls, tau, xi, eta) -> "VectorField":
        """Inverse of ``components``; raises NotInAlgebra if (tau, xi, eta)
        is not the realisation of any element."""
        tau, xi, eta = (sp.expand(sp.sympify(c)) for c in (tau, xi, eta))
        c0 = tau.subs(t, 0)
        c2 = sp.diff(tau, t).subs(t, 0)
        c5 = sp.diff(tau, t, 2) / 2
        c1 = xi.subs({t: 0, x: 0})
        c3 = sp.diff(xi, x).subs(t, 0)
        c4 = sp.diff(xi, t).subs(x, 0)
        coords = (c0, c1, c2, c3, c4, c5)
        if any(sp.sympify(c).has(t, x, u) for c in coords):
            raise NotInAlgebra(f"({tau}, {xi}, {eta}) is not in the algebra")
        field = cls(coords)
        for a, b in zip(field.components(), (tau, xi, eta)):
            if sp.expand(a - b) != 0:
                raise NotInAlgebra(f"({tau}, {xi}, {eta}) is not in the algebra")
        return field

    def apply(self, e) -> sp.Expr:
        """Action as a derivation on functions of (t, x, u)."""
        e = sp.sympify(e)
        return self.tau * sp.diff(e, t) + self.xi * sp.diff(e, x) + self.eta * sp.diff(e, u)

    # -- linear structure --------------------------------------------------
    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "VectorField":
        return VectorField(tuple(-a for a in self.coords))

    def __mul__(self, k) -> "VectorField":
        k = _num(k)
        return VectorField(tuple(sp.expand(k * a) for a in self.coords))

    __rmul__ = __mul__

    def __truediv__(self, k) -> "VectorField":
        return self * (1 / _num(k))

    def is_zero(self) -> bool:
        return all(sp.simplify(c) == 0 for c in self.coords)

    def __str__(self) -> str:
        terms = []
        for c, name in zip(self.coords, BASIS_NAMES):
            c = sp.simplify(c)
            if c == 0:
                continue
            if c == 1:
                terms.append(name)
            elif c == -1:
                terms.append(f"-{name}")
            else:
                cs = str(c)
                terms.append(f"({cs})*{name}" if c.is_Add else f"{cs}*{name}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def _unit(i: int) -> VectorField:
    return VectorField(tuple(int(i == j) for j in range(6)))


PT, PX, DT, DX, GAL, PI = (_unit(i) for i in range(6))
BASIS = (PT, PX, DT, DX, GAL, PI)
HALF = sp.Rational(1, 2)


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Lie bracket computed from the vector-field components."""
    comps = [sp.expand(X.apply(b) - Y.apply(a)) for a, b in zip(X.components(), Y.components())]
    return VectorField.from_components(*comps)


def _structure_constants():
    return [[bracket(a, b).coords for b in BASIS] for a in BASIS]


STRUCTURE = _structure_constants()


def bracket_coords(X: VectorField, Y: VectorField) -> VectorField:
    """Same bracket, through the structure constants (fast path)."""
    out = [sp.S.Zero] * 6
    for i, a in enumerate(X.coords):
        if a == 0:
            continue
        for j, b in enumerate(Y.coords):
            if b == 0:
                continue
            for k, c in enumerate(STRUCTURE[i][j]):
                if c != 0:
                    out[k] += a * b * c
    return VectorField(tuple(sp.expand(c) for c in out))


# ---------------------------------------------------------------------------
# subalgebras


class Signature(NamedTuple):
    dim: int
    dim_radical: int
    dim_nilradical: int
    dim_levi_projection: int
    dim_centre_projection: int


def _matrix(fields: Iterable[VectorField]) -> sp.Matrix:
    rows = [list(f.coords) for f in fields]
    return sp.Matrix(rows) if rows else sp.zeros(0, 6)


def _rank(fields: Sequence[VectorField]) -> int:
    return _matrix(fields).rank() if fields else 0


class NotClosed(ValueError):
    pass


@dataclass(frozen=True)
class Subalgebra:
    """Span of fields, kept in reduced row-echelon form over the coordinates
    (pivot order P^t < P^x < D^t < D^x < G < Pi)."""

    basis: tuple

    @classmethod
    def span(cls, fields: Iterable[VectorField]) -> "Subalgebra":
        fields = [f if isinstance(f, VectorField) else VectorField(tuple(f)) for f in fields]
        if not fields:
            return cls(())
        rref, pivots = _matrix(fields).rref(simplify=True)
        rows = [VectorField(tuple(sp.simplify(c) for c in rref.row(i))) for i in range(len(pivots))]
        return cls(tuple(rows))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, X: VectorField) -> bool:
        return _rank(list(self.basis) + [X]) == self.dim

    def contains_all(self, other: "Subalgebra | Iterable[VectorField]") -> bool:
        fields = other.basis if isinstance(other, Subalgebra) else list(other)
        return _rank(list(self.basis) + list(fields)) == self.dim

    def is_closed(self) -> bool:
        return all(self.contains(bracket_coords(a, b))
                   for i, a in enumerate(self.basis) for b in self.basis[i + 1:])

    def intersection_dim(self, other: "Subalgebra") -> int:
        return self.dim + other.dim - _rank(list(self.basis) + list(other.basis))

    @cached_property
    def signature(self) -> Signature:
        return structure_invariants(self)

    def __str__(self) -> str:
        return "<" + ", ".join(str(b) for b in self.basis) + ">"


def levi_coordinates(X: VectorField) -> tuple:
    """Coordinates in the adapted basis (P^t, D^t+D^x/2, Pi | D^x | P^x, G)."""
    c0, c1, c2, c3, c4, c5 = X.coords
    return (c0, c2, c5), c3 - c2 / 2, (c1, c4)


RADICAL = Subalgebra.span([DX, PX, GAL])
NILRADICAL = Subalgebra.span([PX, GAL])
CENTRE_PART = Subalgebra.span([DX])
LEVI_FACTOR = Subalgebra.span([PT, DT + HALF * DX, PI])


def structure_invariants(s: Subalgebra) -> Signature:
    if not s.is_closed():
        raise NotClosed(str(s))
    levi = sp.Matrix([list(levi_coordinates(b)[0]) for b in s.basis]) if s.dim else sp.zeros(0, 3)
    centre = sp.Matrix([[levi_coordinates(b)[1]] for b in s.basis]) if s.dim else sp.zeros(0, 1)
    return Signature(
        s.dim,
        s.intersection_dim(RADICAL),
        s.intersection_dim(NILRADICAL),
        levi.rank() if s.dim else 0,
        centre.rank() if s.dim else 0,
    )


@dataclass
class LeviCheck:
    relation: str
    passed: bool


def check_levi() -> list[LeviCheck]:
    """Checks the decomposition into sl(2) factor, radical and nilradical."""
    S = DT + HALF * DX
    out = [
        LeviCheck("[P^t, D^t+D^x/2] = P^t", bracket(PT, S) == PT),
        LeviCheck("[D^t+D^x/2, Pi] = Pi", bracket(S, PI) == PI),
        LeviCheck("[P^t, Pi] = 2(D^t+D^x/2)", bracket(PT, PI) == 2 * S),
        LeviCheck("Levi factor closed", LEVI_FACTOR.is_closed()),
    ]
    rad_ideal = all(RADICAL.contains(bracket(a, b)) for a in BASIS for b in RADICAL.basis)
    nil_ideal = all(NILRADICAL.contains(bracket(a, b)) for a in BASIS for b in NILRADICAL.basis)
    derived = Subalgebra.span([bracket(a, b) for a in RADICAL.basis for b in RADICAL.basis])
    second = Subalgebra.span([bracket(a, b) for a in derived.basis for b in derived.basis])
    out += [
        LeviCheck("radical is an ideal", rad_ideal),
        LeviCheck("radical is solvable", second.dim == 0),
        LeviCheck("nilradical is an ideal", nil_ideal),
        LeviCheck("nilradical is abelian", bracket(PX, GAL).is_zero()),
        LeviCheck("[Levi factor, radical] in radical",
                  all(RADICAL.contains(bracket(a, b)) for a in LEVI_FACTOR.basis for b in RADICAL.basis)),
        LeviCheck("algebra = Levi factor + radical", _rank(list(LEVI_FACTOR.basis) + list(RADICAL.basis)) == 6),
    ]
    return out


def parse_field(text: str) -> VectorField:
    """Read a combination such as ``P^t + 1/2*D^x`` or ``D^t - 2*G``."""
    names = {"P^t": PT, "P^x": PX, "D^t": DT, "D^x": DX, "G": GAL, "Pi": PI}
    total = VectorField((0,) * 6)
    for raw in text.replace("-", "+-").split("+"):
        term = raw.strip()
        if not term:
            continue
        coeff, _, name = term.rpartition("*")
        name = name.strip()
        sign = -1 if name.startswith("-") else 1
        name = name.lstrip("-").strip()
        if coeff.strip() in ("", "-"):
            k = sp.Integer(-1 if coeff.strip() == "-" else 1)
        else:
            k = sp.sympify(coeff.strip().strip("()"))
        total = total + (sign * k) * names[name]
    return total
