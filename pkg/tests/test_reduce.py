import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gburgers.expr import DomainBox, h, omega as w, parse, t, x
from gburgers.reduce import (PHI, REDUCTIONS, ReducedGenerator, ReducedODE, case4_solutions, induced_or_hidden,
                             integrate_case4, invariance_residual, item5_conservation, item5_first_integral,
                             lie_reduce, reduced_symmetries, solution_catalogue)

S = sp.Rational


def _burgers_max(u, f, box, n=40, seed=1):
    """Independent oracle: sympy derivatives, evaluated at random points."""
    lhs = sp.diff(u, t) + u * sp.diff(u, x) + f * sp.diff(u, x, 2)
    fn = sp.lambdify((t, x), lhs, "numpy")
    rng = np.random.default_rng(seed)
    (tl, th), (xl, xh) = box.interval("t"), box.interval("x")
    ts, xs = rng.uniform(tl, th, n), rng.uniform(xl, xh, n)
    return float(np.max(np.abs(np.broadcast_to(fn(ts, xs), ts.shape))))


CLASS_PARAMS = {
    "1.2": (0, 0, 0), "1.3": (0, 0, 1), "1.4": (2, 1, 0), "1.5": (-1, 0, -1),
    "1.6": (3, 2, 0), "1.7": (1, 0, 1), "1.8": (4, 5, 0),
}


@pytest.mark.parametrize("label", list(REDUCTIONS))
def test_listed_ansatz_reduces(label):
    a = 2 if label in ("1.6", "1.8") else None
    r = lie_reduce(None, label, a=a)
    if label in CLASS_PARAMS:
        al, be, ga = CLASS_PARAMS[label]
        assert (r.ode.h, r.ode.alpha, r.ode.beta, r.ode.gamma) == (h(w), al, be, ga)
    else:
        assert r.ode is None


def test_symbolic_parameter_row():
    a = sp.Symbol("a", real=True)
    r = lie_reduce(None, "1.6", a=a)
    assert sp.expand(r.ode.alpha - (2 * a - 1)) == 0
    assert sp.expand(r.ode.beta - a * (a - 1)) == 0


@pytest.mark.parametrize("a, agrees", [(1, True), (2, False)])
def test_uncorrected_power_row_only_holds_at_unit_exponent(a, agrees):
    # class parameters alpha = a, beta = a - 1 with the shift phi -> phi + w
    r = lie_reduce(None, "1.6", a=a)
    p0, p1, p2 = PHI[:3]
    shifted = r.reduced.xreplace({p0: p0 + w, p1: p1 + 1, p2: p2})
    listed = ReducedODE(h(w), a, a - 1, 0).jet_form()
    assert (sp.expand(shifted - listed) == 0) is agrees


def test_concrete_coefficient_reduction():
    r = lie_reduce(parse("x^2"), "1.2")
    assert r.ode == ReducedODE(w**2, 0, 0, 0)


@pytest.mark.parametrize("ode, item, constants", [
    (ReducedODE(2 * (w + 1)**2, 1, 1, 1), 1, {"h0": 2}),
    (ReducedODE(3, 1, 0, 1), 2, {"h0": 3}),
    (ReducedODE(2 * sp.Abs(w + 1)**S(3, 2), 0, 0, 1), 3, {"mu": 1}),
    (ReducedODE(-w**2 / 2 + w + 1, 1, 0, 0), 4, {"mu": 1, "nu": 1}),
    (ReducedODE(2, 1, 0, 0), 5, {"kappa": 2}),
    (ReducedODE(w**3, 0, 0, 0), 6, {"mu": 0, "kappa": S(2, 3)}),
    (ReducedODE(sp.exp(w), 0, 0, 0), 6, {"mu": 0, "kappa": 1}),
    (ReducedODE(w**4 + 1, 0, 0, 0), None, {}),
])
def test_reduced_symmetry_items(ode, item, constants):
    r = reduced_symmetries(ode)
    assert r.item == item
    assert r.constants == constants
    for g in r.generators:
        assert invariance_residual(ode, g) < 1e-10


def test_non_symmetry_has_large_residual():
    assert invariance_residual(ReducedODE(w**3, 0, 0, 0), ReducedGenerator(sp.S.One, sp.S.Zero)) > 1e-3


def test_item5_first_integral_is_conserved():
    assert item5_conservation(1, 2, 2.0, 0.3) < 1e-9
    expr = item5_first_integral(ReducedODE(2, 1, 0, 0), 2)
    d = sp.diff(expr, w)
    ddh = next(a for a in d.atoms(sp.Function) if a.func.__name__ == "ddh")
    d = d.xreplace({ddh: 2 / h(w) - 1}).xreplace({h(w): sp.Symbol("H", positive=True)})
    assert sp.simplify(d) == 0


@pytest.mark.parametrize("params", [(0, 0, 1), (0, 1, 1), (1, 0, -1), (1, 0, 0), (1, 1, 0)])
def test_widest_case_solutions(params):
    entries = case4_solutions(*params)
    assert len(entries) == 5
    for e in entries:
        assert e.passed
        assert e.residual.max_abs < 1e-10


def test_integrate_case4_branch_forms():
    sols = integrate_case4(0, 0, 1, c0=0)
    assert sp.simplify(sols[0].phi - 2 / (w + 1)) == 0
    assert sols[0].variable == "w/nu"


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([-1, 1, 2]), st.integers(-2, 2), st.integers(1, 3))
def test_widest_case_branches_solve_reduced_equation(al, mu, nu):
    if mu**2 + 2 * al * nu == 0 and al == 0:
        return
    ode = ReducedODE(-S(al, 2) * w**2 + mu * w + nu, al, 0, 0)
    box = DomainBox.of(omega=(0.05, 0.25))
    for s in integrate_case4(al, mu, nu, box=box, verify=False):
        fn = sp.lambdify(w, ode.apply(s.phi), "numpy")
        vals = np.asarray(fn(np.linspace(0.06, 0.24, 9)), dtype=complex)
        assert np.max(np.abs(vals)) < 1e-8


CATALOGUE = [
    ("exp(t+x^2)", None, 3),
    ("2*exp(3*x)", None, 4),
    ("6*abs(x-t^2/2)^(3/2)", DomainBox.of(t=(0.2, 1), x=(1, 2)), 5),
    ("abs(x-t^2/2)^(3/2)", DomainBox.of(t=(1.5, 2), x=(0.2, 1)), 5),
    ("abs(x)^(3/2)", None, 5),
    ("exp(-x)", None, 5),
    ("x^2/t", None, 4),
    ("2*abs(x+1)^3", None, 4),
]


@pytest.mark.parametrize("text, box, count", CATALOGUE)
def test_catalogue_solutions(text, box, count):
    box = box or DomainBox()
    entries = solution_catalogue(text, box)
    assert len(entries) == count
    for e in entries:
        assert e.passed and e.residual.max_abs < 1e-8
        assert _burgers_max(e.u, e.f, box) < 1e-8


def test_induced_and_hidden_symmetries():
    gens = reduced_symmetries(ReducedODE(w, 0, 0, 0)).generators
    assert [induced_or_hidden("x", "1.2", g) for g in gens] == ["induced", "hidden"]
    g, = reduced_symmetries(ReducedODE(3 * w**2, 2, 1, 0)).generators
    assert induced_or_hidden("3*x^2", "1.4", g) == "induced"
    box = DomainBox.of(t=(1, 2), x=(0.2, 1))
    gens = reduced_symmetries(ReducedODE(-(w + 1)**2 / 2, 1, 0, 0)).generators
    f = t * (-(x / t + 1)**2 / 2)
    assert [induced_or_hidden(f, "1.6", g, a=1, box=box) for g in gens] == ["hidden", "induced"]


def test_reduced_equation_examples():
    p0, p1, p2 = PHI[:3]
    r = lie_reduce(None, "1.2")
    assert sp.expand(r.reduced - (h(w) * p2 + p0 * p1)) == 0
    r = lie_reduce(None, "1.1")
    assert sp.expand(r.reduced - (p1 + p0**2)) == 0
    assert r.ansatz.u_of(PHI[0]) == x * PHI[0]
    a = sp.Symbol("a", real=True)
    r = lie_reduce(None, "1.8", a=a)
    assert sp.expand(r.reduced - (h(w) * p2 + p0 * p1 + 2 * a * p0 + (a**2 + 1) * w)) == 0


def test_widest_case_formula_examples():
    k = sp.Symbol("k", positive=True)
    c1 = sp.Symbol("c1")
    phi = integrate_case4(0, 0, 1, c0=k**2, c1=c1, verify=False)[0].phi
    assert sp.simplify(phi - k * (c1 * sp.exp(k * w) - 1) / (c1 * sp.exp(k * w) + 1)) == 0
    for al, mu, nu in [(1, 0, -1), (1, 1, 0), (0, 1, 1)]:
        zero = [s for s in integrate_case4(al, mu, nu, verify=False) if s.branch == "c0=0, zero branch"][0]
        assert sp.expand(zero.phi - (-al * w + mu)) == 0


def test_catalogue_formula_examples():
    entries = {e.source: e for e in solution_catalogue("2*exp(3*x)")}
    assert entries["stationary: exponential"].u == -6 * sp.exp(3 * x)
    box = DomainBox.of(t=(0.2, 1), x=(1, 2))
    roots = [e for e in solution_catalogue("6*abs(x-t^2/2)^(3/2)", box) if e.source == "square-root family"]
    # c = (h0 +- sqrt(h0^2 - 32)) / 4 with h0 = 6
    assert sorted(sp.nsimplify(e.note.split("= ")[1]) for e in roots) == [1, 2]


def test_first_three_shapes_are_induced():
    g, = reduced_symmetries(ReducedODE(3, 0, 0, 1)).generators
    assert induced_or_hidden("3", "1.3", g) == "induced"
    g, = reduced_symmetries(ReducedODE(2 * w**S(3, 2), 0, 0, 1)).generators
    box = DomainBox.of(t=(0.2, 1), x=(1, 2))
    assert induced_or_hidden("2*(x-t^2/2)^(3/2)", "1.3", g, box=box) == "induced"
