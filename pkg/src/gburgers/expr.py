"""Expression kernel: parsing, printing, differentiation, substitution,
vectorised numerical evaluation and the tri-state zero test.

Expressions are plain sympy objects.  This module adds the pieces sympy does
not provide in the shape needed here: a small grammar with byte-offset
errors, a printer that round-trips through that grammar, uninterpreted
functions ``h, dh, ddh, ...`` that differentiate into each other, and a
numpy evaluator that reports domain violations instead of returning NaN.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np
import sympy as sp
from scipy import special
from scipy.stats import qmc
from sympy.printing.str import StrPrinter

DEFAULT_SEED = 0x5EED

t, x, u, v, w, omega, theta = sp.symbols("t x u v w omega theta", real=True)
VARIABLES = {s.name: s for s in (t, x, u, v, w, omega, theta)}

ZERO_TOL = 1e-9
NONZERO_TOL = 1e-6
POLE_TOL = 1e-12


def seed() -> int:
    """Sampling seed, overridable through the GBE_SEED environment variable."""
    raw = os.environ.get("GBE_SEED")
    return int(raw, 0) if raw else DEFAULT_SEED


def param(name: str) -> sp.Symbol:
    return sp.Symbol(name, real=True)


# ---------------------------------------------------------------------------
# uninterpreted functions


class JetFunction(sp.Function):
    """Unary function with no algebraic relations; its derivative is the next
    member of the same family (h -> dh -> ddh -> ...)."""

    order = 0
    base = "h"
    nargs = 1

    def fdiff(self, argindex=1):
        return jet_function(self.order + 1, self.base)(self.args[0])

    def _eval_is_real(self):
        return True


_JET_CACHE: dict[tuple[str, int], type] = {}


def jet_function(order: int = 0, base: str = "h") -> type:
    key = (base, order)
    if key not in _JET_CACHE:
        name = "d" * order + base
        _JET_CACHE[key] = type(name, (JetFunction,), {"order": order, "base": base})
    return _JET_CACHE[key]


h = jet_function(0)
dh = jet_function(1)
ddh = jet_function(2)


def jet_atoms(e: sp.Expr) -> set:
    return {a for a in sp.sympify(e).atoms(sp.Function) if isinstance(a, JetFunction)}


def freeze_jets(e: sp.Expr) -> tuple[sp.Expr, dict]:
    """Replace every applied h-family atom by a fresh real symbol.

    Used when an identity has to hold for arbitrary h, with h, h', ... treated
    as independent quantities."""
    atoms = sorted(jet_atoms(e), key=sp.default_sort_key)
    mapping = {a: sp.Symbol(f"_jet{i}", real=True) for i, a in enumerate(atoms)}
    return sp.sympify(e).xreplace(mapping), mapping


# ---------------------------------------------------------------------------
# parsing


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class UnknownFunctionError(ExprSyntaxError):
    pass


class MalformedPowerError(ExprSyntaxError):
    pass


_FUNCTIONS = {
    "exp": sp.exp,
    "ln": sp.log,
    "abs": sp.Abs,
    "sign": sp.sign,
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "arctan": sp.atan,
    "sqrt": sp.sqrt,
}
_JET_NAME = re.compile(r"^(d*)h$")
_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos == len(src):
            break
        m = _TOKEN.match(src, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", len(src[:pos].encode()))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), len(src[: m.start(kind)].encode())))
        pos = m.end()
    toks.append(_Tok("end", "", len(src.encode())))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        if self.tok.text != text:
            raise ExprSyntaxError(f"expected {text!r}", self.tok.offset)
        self.take()

    def parse(self) -> sp.Expr:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", self.tok.offset)
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return e

    def expr(self) -> sp.Expr:
        e = self.term()
        while self.tok.text in "+-" and self.tok.kind == "op":
            op = self.take().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> sp.Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self) -> sp.Expr:
        if self.tok.text in ("-", "+"):
            op = self.take().text
            operand = self.unary()
            return -operand if op == "-" else operand
        return self.factor()

    def factor(self) -> sp.Expr:
        b = self.base()
        if self.tok.text == "^":
            caret = self.take()
            if self.tok.kind == "end" or self.tok.text in ("*", "/", "^", ")", "+"):
                raise MalformedPowerError("malformed power", caret.offset)
            if self.tok.text == "-":
                self.take()
                exponent = -self.factor()
            else:
                exponent = self.factor()
            return b**exponent
        return b

    def base(self) -> sp.Expr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return sp.Rational(tok.text)
        if tok.kind == "name":
            self.take()
            if self.tok.text == "(":
                fn = self._function(tok)
                self.take()
                arg = self.expr()
                self.expect(")")
                return fn(arg)
            if tok.text in VARIABLES:
                return VARIABLES[tok.text]
            if tok.text == "pi":
                return sp.pi
            return param(tok.text)
        if tok.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "end":
            raise ExprSyntaxError("unexpected end of input", tok.offset)
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)

    @staticmethod
    def _function(tok: _Tok):
        if tok.text in _FUNCTIONS:
            return _FUNCTIONS[tok.text]
        m = _JET_NAME.match(tok.text)
        if m:
            return jet_function(len(m.group(1)))
        raise UnknownFunctionError(f"unknown function {tok.text!r}", tok.offset)


def parse(src: str) -> sp.Expr:
    """Parse the input grammar into a canonical expression."""
    return canonical(_Parser(src).parse())


# ---------------------------------------------------------------------------
# printing


class _GrammarPrinter(StrPrinter):
    def _print_log(self, e):
        return f"ln({self._print(e.args[0])})"

    def _print_Abs(self, e):
        return f"abs({self._print(e.args[0])})"

    def _print_atan(self, e):
        return f"arctan({self._print(e.args[0])})"

    def _print_Exp1(self, e):
        return "exp(1)"

    def _print_Pi(self, e):
        return "pi"

    def _print_Float(self, e):
        return repr(float(e))


def to_text(e: sp.Expr) -> str:
    return _GrammarPrinter().doprint(sp.sympify(e)).replace("**", "^")


# ---------------------------------------------------------------------------
# algebra


def canonical(e) -> sp.Expr:
    """Rational-function normal form (numerator/denominator expanded, common
    factors removed); transcendental atoms are treated as generators."""
    e = sp.sympify(e)
    if e.is_Number or e.is_Symbol:
        return e
    try:
        return sp.cancel(e)
    except sp.PolynomialError:
        return e


def _drop_delta(e: sp.Expr) -> sp.Expr:
    # sign(.) only ever wraps arguments that do not vanish on the domain
    if e.has(sp.DiracDelta):
        e = e.replace(lambda a: isinstance(a, sp.DiracDelta), lambda a: sp.S.Zero)
    return e


def differentiate(e, z: sp.Symbol, *, canon: bool = True) -> sp.Expr:
    d = _drop_delta(sp.diff(sp.sympify(e), z))
    return canonical(d) if canon else d


class CyclicBindingError(ValueError):
    pass


def substitute(e, bindings: Mapping, *, canon: bool = True) -> sp.Expr:
    """Simultaneous substitution.  A binding may refer to its own key (x -> x+1)
    but chains that loop through other keys are rejected."""
    keys = set(bindings)
    graph = {k: (sp.sympify(val).free_symbols & keys) - {k} for k, val in bindings.items()}
    state: dict = {}

    def visit(k):
        state[k] = 1
        for n in graph[k]:
            if state.get(n) == 1:
                raise CyclicBindingError(f"cyclic bindings through {k} and {n}")
            if n not in state:
                visit(n)
        state[k] = 2

    for k in graph:
        if k not in state:
            visit(k)
    out = sp.sympify(e).subs(dict(bindings), simultaneous=True)
    return canonical(out) if canon else out


# ---------------------------------------------------------------------------
# domains and sampling


@dataclass(frozen=True)
class DomainBox:
    """Closed intervals per variable plus hyperplanes to keep away from."""

    intervals: tuple = (("t", 1.0, 2.0), ("x", 1.0, 2.0))
    exclusions: tuple = ()
    margin_fraction: float = 1e-3

    def __post_init__(self):
        for name, lo, hi in self.intervals:
            if not lo < hi:
                raise ValueError(f"empty interval for {name}: [{lo}, {hi}]")

    @classmethod
    def of(cls, exclusions: Iterable = (), **ranges) -> "DomainBox":
        return cls(tuple((k, float(a), float(b)) for k, (a, b) in ranges.items()),
                   tuple(sp.sympify(e) for e in exclusions))

    @classmethod
    def from_text(cls, text: str) -> "DomainBox":
        """Parse ``t:1..2,x:1..2``."""
        items = []
        for part in text.split(","):
            name, _, rng = part.strip().partition(":")
            lo, sep, hi = rng.partition("..")
            if not sep:
                raise ValueError(f"bad domain item {part!r}; expected var:lo..hi")
            items.append((name.strip(), float(lo), float(hi)))
        return cls(tuple(items))

    def to_text(self) -> str:
        return ",".join(f"{n}:{lo:g}..{hi:g}" for n, lo, hi in self.intervals)

    @property
    def names(self) -> list[str]:
        return [n for n, _, _ in self.intervals]

    def interval(self, name: str) -> tuple[float, float]:
        for n, lo, hi in self.intervals:
            if n == name:
                return lo, hi
        raise KeyError(name)

    def orthant(self) -> dict[str, int]:
        """Sign of each variable that keeps a constant sign on the box."""
        out = {}
        for n, lo, hi in self.intervals:
            if lo > 0:
                out[n] = 1
            elif hi < 0:
                out[n] = -1
        return out

    def extended(self, names: Iterable[str], default=(0.3, 1.7)) -> "DomainBox":
        missing = [n for n in sorted(set(names)) if n not in self.names]
        if not missing:
            return self
        extra = tuple((n, *default) for n in missing)
        return DomainBox(self.intervals + extra, self.exclusions, self.margin_fraction)

    def _inner(self):
        for n, lo, hi in self.intervals:
            m = self.margin_fraction * (hi - lo)
            yield n, lo + m, hi - m

    def sample(self, n: int, names: Iterable[str] | None = None, rng_seed: int | None = None) -> dict[str, np.ndarray]:
        """Scrambled Halton points inside the box (margin applied)."""
        names = sorted(names if names is not None else self.names)
        box = self.extended(names)
        bounds = {k: (lo, hi) for k, lo, hi in box._inner()}
        if not names:
            return {}
        sampler = qmc.Halton(d=len(names), scramble=True, seed=seed() if rng_seed is None else rng_seed)
        pts = sampler.random(n)
        out = {k: bounds[k][0] + pts[:, i] * (bounds[k][1] - bounds[k][0]) for i, k in enumerate(names)}
        return self._filter(out)

    def grid(self, n: int = 20, names=("t", "x")) -> dict[str, np.ndarray]:
        bounds = {k: (lo, hi) for k, lo, hi in self._inner()}
        axes = [np.linspace(*bounds[k], n) for k in names]
        mesh = np.meshgrid(*axes, indexing="ij")
        return self._filter({k: m.ravel() for k, m in zip(names, mesh)})

    def _filter(self, pts: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        if not self.exclusions or not pts:
            return pts
        keep = np.ones(len(next(iter(pts.values()))), dtype=bool)
        widths = [hi - lo for _, lo, hi in self.intervals]
        tol = self.margin_fraction * min(widths)
        for ex in self.exclusions:
            vals, bad, _ = evaluate_array(ex, pts)
            keep &= ~bad & (np.abs(vals) > tol)
        return {k: a[keep] for k, a in pts.items()}


# ---------------------------------------------------------------------------
# numerical evaluation


class DomainViolation(ArithmeticError):
    pass


class UnboundSymbol(KeyError):
    pass


def _env(points: Mapping, params: Mapping | None):
    env = {}
    for k, val in list(points.items()) + list((params or {}).items()):
        sym = k if isinstance(k, sp.Symbol) else (VARIABLES.get(k) or param(k))
        env[sym] = np.asarray(val, dtype=float)
    return env


_GAUSS = np.polynomial.legendre.leggauss(40)


def quadrature(node: sp.Integral, ev) -> np.ndarray:
    """Definite integral with point-dependent limits by Gauss-Legendre nodes."""
    (s, lo, hi), = node.limits
    a, b = ev(lo), ev(hi)
    nodes, weights = _GAUSS
    pts = (a + b)[:, None] / 2 + (b - a)[:, None] / 2 * nodes[None, :]
    free = sorted(node.function.free_symbols - {s}, key=str)
    env = {s: pts.ravel()}
    for sym in free:
        env[sym] = np.repeat(ev(sym), len(nodes))
    vals, bad, _ = evaluate_array(node.function, env)
    vals = np.where(bad, np.nan, vals).reshape(pts.shape)
    return (b - a) / 2 * (vals @ weights)


_SPECIAL = {sp.erf: special.erf, sp.erfi: special.erfi, sp.Ei: special.expi}


def evaluate_array(e, points: Mapping, params: Mapping | None = None):
    """Evaluate at many points at once.

    Returns ``(values, bad, scale)``: ``bad`` flags points where a pole, a
    branch point or a non-finite value was met; ``scale`` is 1 plus the
    largest magnitude of any summand met along the way, which sets the
    yardstick for deciding whether a cancellation produced zero."""
    env = _env(points, params)
    size = max((a.size for a in env.values()), default=1)
    bad = np.zeros(size, dtype=bool)
    scale = np.ones(size)

    def ev(node):
        nonlocal bad, scale
        if node.is_Number or isinstance(node, sp.NumberSymbol):
            return np.full(size, float(node))
        if node.is_Symbol:
            if node not in env:
                raise UnboundSymbol(str(node))
            return np.broadcast_to(env[node], (size,)).astype(float)
        if isinstance(node, sp.Add):
            parts = [ev(a) for a in node.args]
            for p_ in parts:
                scale = np.maximum(scale, 1 + np.nan_to_num(np.abs(p_), nan=0.0, posinf=0.0))
            return np.sum(parts, axis=0)
        if isinstance(node, sp.Mul):
            out = np.ones(size)
            for a in node.args:
                out = out * ev(a)
            return out
        if isinstance(node, sp.Pow):
            b = ev(node.base)
            ex = node.exp
            if ex.is_Integer:
                k = int(ex)
                if k < 0:
                    bad |= np.abs(b) < POLE_TOL
                return b**k
            ev_ex = ev(ex)
            neg = np.asarray(ev_ex) < 0
            bad |= b < 0
            bad |= neg & (np.abs(b) < POLE_TOL)
            return np.power(np.where(b < 0, np.nan, b), ev_ex)
        if isinstance(node, sp.exp):
            return np.exp(ev(node.args[0]))
        if isinstance(node, sp.log):
            a = ev(node.args[0])
            bad |= a < POLE_TOL
            return np.log(np.where(a > 0, a, np.nan))
        if isinstance(node, sp.Abs):
            return np.abs(ev(node.args[0]))
        if isinstance(node, sp.sign):
            a = ev(node.args[0])
            bad |= np.abs(a) < POLE_TOL
            return np.sign(a)
        if isinstance(node, sp.sin):
            return np.sin(ev(node.args[0]))
        if isinstance(node, sp.cos):
            return np.cos(ev(node.args[0]))
        if isinstance(node, sp.tan):
            a = ev(node.args[0])
            bad |= np.abs(np.cos(a)) < POLE_TOL
            return np.tan(a)
        if isinstance(node, sp.cot):
            a = ev(node.args[0])
            bad |= np.abs(np.sin(a)) < POLE_TOL
            return 1 / np.tan(a)
        if isinstance(node, sp.atan):
            return np.arctan(ev(node.args[0]))
        if isinstance(node, (sp.sinh, sp.cosh, sp.tanh)):
            return getattr(np, type(node).__name__)(ev(node.args[0]))
        if isinstance(node, sp.coth):
            a = ev(node.args[0])
            bad |= np.abs(a) < POLE_TOL
            return 1 / np.tanh(a)
        if isinstance(node, sp.DiracDelta):
            return np.zeros(size)
        if isinstance(node, (sp.erf, sp.erfi, sp.Ei)):
            a = ev(node.args[0])
            if isinstance(node, sp.Ei):
                bad |= np.abs(a) < POLE_TOL
            return _SPECIAL[type(node)](a)
        if isinstance(node, sp.Integral) and len(node.limits) == 1 and len(node.limits[0]) == 3:
            return quadrature(node, ev)
        raise TypeError(f"cannot evaluate {type(node).__name__}: {node}")

    with np.errstate(all="ignore"):
        vals = np.asarray(ev(sp.sympify(e)), dtype=float)
        vals = np.broadcast_to(vals, (size,)).copy()
    bad |= ~np.isfinite(vals)
    return vals, bad, scale


def evaluate(e, point: Mapping, params: Mapping | None = None) -> float:
    """IEEE double value at one point; raises DomainViolation near poles and
    branch points."""
    vals, bad, _ = evaluate_array(e, {k: np.array([val]) for k, val in point.items()}, params)
    if bad[0]:
        raise DomainViolation(f"{to_text(e)} is singular at {dict(point)}")
    return float(vals[0])


# ---------------------------------------------------------------------------
# zero test


class ZeroStatus(Enum):
    PROVABLY_ZERO = "provably-zero"
    NUMERICALLY_ZERO = "numerically-zero"
    PROVABLY_NONZERO = "provably-nonzero"
    INCONCLUSIVE = "inconclusive"

    @property
    def zero(self) -> bool:
        return self in (ZeroStatus.PROVABLY_ZERO, ZeroStatus.NUMERICALLY_ZERO)


class InconclusiveZeroTest(ArithmeticError):
    pass


@dataclass
class ZeroLog:
    """Collects inconclusive outcomes so callers can report them."""

    inconclusive: list = field(default_factory=list)


ZERO_LOG = ZeroLog()

_SYMBOLIC_OPS_LIMIT = 400


def is_zero(e, box: DomainBox | None = None, params: Mapping | None = None, *,
            n_points: int = 64, symbolic: bool = True) -> ZeroStatus:
    e = sp.sympify(e)
    if e == 0:
        return ZeroStatus.PROVABLY_ZERO
    if symbolic and sp.count_ops(e) <= _SYMBOLIC_OPS_LIMIT and canonical(e) == 0:
        return ZeroStatus.PROVABLY_ZERO
    frozen, _ = freeze_jets(e)
    if params:
        frozen = frozen.xreplace({(param(k) if isinstance(k, str) else k): sp.Float(val)
                                  for k, val in params.items()})
    if not frozen.free_symbols:
        val = complex(sp.N(frozen))
        if not np.isfinite(val):
            return ZeroStatus.INCONCLUSIVE
        return ZeroStatus.NUMERICALLY_ZERO if abs(val) < ZERO_TOL else ZeroStatus.PROVABLY_NONZERO
    names = sorted(s.name for s in frozen.free_symbols)
    box = (box or DomainBox()).extended(names)
    pts = box.sample(n_points, names)
    vals, bad, scale = evaluate_array(frozen, pts) if names else evaluate_array(frozen, {"_": np.zeros(1)})
    good = ~bad
    if good.sum() < max(3, len(bad) // 2):
        ZERO_LOG.inconclusive.append(to_text(e)[:200])
        return ZeroStatus.INCONCLUSIVE
    vals, scale = np.abs(vals[good]), scale[good]
    if np.all(vals < ZERO_TOL * scale):
        return ZeroStatus.NUMERICALLY_ZERO
    if np.any(vals > NONZERO_TOL * scale):
        return ZeroStatus.PROVABLY_NONZERO
    ZERO_LOG.inconclusive.append(to_text(e)[:200])
    return ZeroStatus.INCONCLUSIVE


def vanishes(e, box: DomainBox | None = None, params: Mapping | None = None, **kw) -> bool:
    """Boolean form of is_zero; an inconclusive outcome raises."""
    status = is_zero(e, box, params, **kw)
    if status is ZeroStatus.INCONCLUSIVE:
        raise InconclusiveZeroTest(to_text(e)[:200])
    return status.zero


def resolve_abs(e, box: DomainBox) -> sp.Expr:
    """Rewrite abs(g) and sign(g) as ±g and ±1 when g keeps one sign on the box."""
    e = sp.sympify(e)
    targets = [a for a in e.atoms(sp.Abs, sp.sign)]
    if not targets:
        return e
    mapping = {}
    for a in targets:
        arg = a.args[0]
        frozen, _ = freeze_jets(arg)
        names = sorted(s.name for s in frozen.free_symbols)
        pts = box.extended(names).sample(64, names) if names else {"_": np.zeros(1)}
        vals, bad, _ = evaluate_array(frozen, pts)
        vals = vals[~bad]
        if vals.size and np.all(vals > 0):
            s = 1
        elif vals.size and np.all(vals < 0):
            s = -1
        else:
            continue
        mapping[a] = s * arg if isinstance(a, sp.Abs) else sp.Integer(s)
    out = e.xreplace(mapping)
    return resolve_abs(out, box) if out != e else out
