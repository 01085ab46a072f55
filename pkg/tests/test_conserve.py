import pytest
import sympy as sp

from gburgers import equiv
from gburgers.conserve import (SubclassMismatch, burgers_linearize, characteristic_dimension, check_potential_transform,
                               conservation_laws, generalized_residual, hopf_cole, potential_admissible,
                               potential_char_check, potential_from_solution, potential_system, psi_map)
from gburgers.expr import DomainBox, parse, t, x
from gburgers.verify import grid_residual, pde_residual


@pytest.mark.parametrize("text, lam", [("x^2", sp.exp(2 * t)), ("1", 1), ("t*x^2+x*sin(t)+1", sp.exp(t**2)),
                                       ("x^2/t", t**2)])
def test_characteristic_of_quadratic_coefficients(text, lam):
    law = conservation_laws(text)
    assert sp.simplify(law.characteristic - lam) == 0
    assert sp.simplify(law.identity_residual()) == 0
    assert sp.simplify(law.characteristic_residual()) == 0


def test_no_law_of_this_shape_for_nonquadratic_coefficient():
    assert conservation_laws("exp(x)") is None


def test_potential_equation():
    system, eq = potential_system("x^2")
    assert str(eq) == "v_t + v_x^2/(2*(exp(2*t))) + (x**2)*v_xx - (2*x)*v_x = 0"
    pot = potential_from_solution("x^2", "x/t")
    assert sp.simplify(pot - x**2 * sp.exp(2 * t) / (2 * t)) == 0
    assert sp.simplify(eq.lhs(pot)) == 0
    assert eq.residual(pot).passed


def test_potential_with_nonelementary_antiderivative():
    pot = potential_from_solution("t*x^2+x+1", "3/2")
    assert sp.simplify(pot - (3 * x * sp.exp(t**2) / 2 + 3 * sp.sqrt(sp.pi) * sp.erfi(t) / 16)) == 0


@pytest.mark.parametrize("text, t_hat, x_hat, f_hat", [
    ("1", t / 2, x, 2),
    ("x^2", sp.exp(2 * t) / 4, x * sp.exp(2 * t), 2 * x**2 * sp.exp(2 * t)),
])
def test_psi_map(text, t_hat, x_hat, f_hat):
    m = psi_map(text)
    for got, want in [(m.t_hat, t_hat), (m.x_hat, x_hat), (m.f_hat, f_hat)]:
        assert sp.simplify(got - want) == 0


def test_psi_map_coefficient_in_new_variables():
    e = psi_map("x^2").f_hat_in_new_variables()
    th, xh = sorted(e.free_symbols, key=str)
    assert sp.simplify(e - xh**2 / (2 * th)) == 0


TRANSFORMS = [equiv.IDENTITY, equiv.space_scaling(2), equiv.EquivTransform(2, 1, 1, 3, 2, 1, -1),
              equiv.EquivTransform(1, 0, 0, 1, 1, 2, 3)]


@pytest.mark.parametrize("text", ["x^2+1", "t*x^2+x+1"])
@pytest.mark.parametrize("T", TRANSFORMS, ids=str)
def test_potential_transformations_map_potentials(text, T):
    pots = [potential_from_solution(text, s) for s in ("x/t", "3/2", "(x+1/3)/(t+1/2)")]
    P = potential_admissible(text, T, c0=2)
    assert check_potential_transform(P, pots) < 1e-6
    assert P.characteristic_residual() == 0


def test_potential_transformations_need_nonconstant_coefficient():
    with pytest.raises(SubclassMismatch):
        potential_admissible("1", equiv.space_scaling(2))


@pytest.mark.parametrize("T", TRANSFORMS[::2] + TRANSFORMS[3:], ids=str)
def test_linearisable_generalised_map(T):
    pot = 2 * sp.log(1 + sp.exp(x - t))
    r = generalized_residual(1, T, pot, k=3, heat_shift="x^2-2*t", lam_new=1)
    assert grid_residual(r, DomainBox(), tol=1).max_abs < 1e-6


def test_generalised_map_with_wrong_target_fails():
    pot = 2 * sp.log(1 + sp.exp(x - t))
    r = generalized_residual(1, equiv.IDENTITY, pot, k=3, heat_shift="x^2-2*t", lam_new=2)
    assert grid_residual(r, DomainBox(), tol=1).max_abs > 1


@pytest.mark.parametrize("f", [1, -1])
def test_linearisation(f):
    pot, factor = burgers_linearize(f)
    W = sp.Function("W")(t, x)
    assert pot == 2 * f * sp.log(W)
    heat = sp.exp(x - f * t) + 1
    sol = hopf_cole(f, heat)
    assert pde_residual(f, sol).passed


@pytest.mark.parametrize("psi, ok", [("exp(x+t)", True), ("x^2+2*t", True), ("x^3", False)])
def test_characteristics_for_constant_coefficient(psi, ok):
    assert potential_char_check(1, psi) is ok


@pytest.mark.parametrize("text, dim", [("1", 5), ("x^2", 0), ("t", 0), ("x", 0)])
def test_characteristic_dimension(text, dim):
    # for the constant case the heat polynomials of degree at most 4 give the five
    assert characteristic_dimension(parse(text)) == dim


def test_potential_equation_examples():
    _, eq = potential_system("1")
    v = sp.Function("v")(t, x)
    assert sp.expand(eq.lhs(v) - (v.diff(t) + v.diff(x)**2 / 2 + v.diff(x, 2))) == 0
    system, _ = potential_system("x^2")
    sol = x / t
    pot = potential_from_solution("x^2", sol)
    assert all(sp.simplify(r) == 0 for r in system.equations(sol, pot))
    assert sp.simplify(sp.diff(pot, x) / system.lam - sol) == 0


def test_potential_transform_examples():
    f = parse("x^2+1")
    P = potential_admissible(f, equiv.IDENTITY)
    assert (P.f_new, P.lam_new, P.v_shift(), P.v0_rate) == (f, P.lam, 0, 0)
    P = potential_admissible(f, equiv.space_scaling(2))
    assert sp.expand(P.f_new - 4 * f) == 0


def test_linearisation_trivial_heat_solution():
    assert hopf_cole(1, sp.S(1)) == 0
    pot, _ = burgers_linearize(1)
    W = sp.Function("W")(t, x)
    assert pot.subs(W, 1) == 0
