import pytest
import sympy as sp

from gburgers import equiv
from gburgers.classify import classifying_residual
from gburgers.expr import DomainBox, parse, t, u, x
from gburgers.nonclassical import (Q1, DegenerateTriple, HeatTriple, NotRegular, OperatorFailure, ReductionOperator,
                                   burgers_invariant_family, check_conditional_invariance, check_singular,
                                   half_case_operator, hopf_cole_agreement, lie_family_field,
                                   lie_family_operator, q1_invariant_solutions, regular_case, theta_operator,
                                   transform_operator, wronskian_operator)

TRIPLES = ["1; x; x^2-2*t", "1; x; exp(x-t)", "1; x; x^3-6*t*x"]


@pytest.mark.parametrize("text", ["exp(t+x^2)", "1", "x^2", "exp(-x)", "t*x+sin(x)+2"])
def test_q1_is_conditional_symmetry_for_any_coefficient(text):
    assert check_conditional_invariance(parse(text), Q1)
    assert regular_case(Q1) == 1


def test_q1_invariant_solutions_solve_the_equation():
    for family, report in q1_invariant_solutions("exp(t+x^2)"):
        assert report.passed


def test_lie_symmetry_that_fails_for_constant_coefficient():
    assert not check_conditional_invariance(1, ReductionOperator.regular(x, 0))


def test_wronskian_operator_of_polynomial_triple():
    Q, c, worst = wronskian_operator(HeatTriple.from_text(TRIPLES[0]))
    assert (c.xi0, c.eta1, c.eta0) == (0, 0, 0)
    assert (Q.tau, sp.simplify(Q.xi + u / 2), sp.simplify(Q.eta - u**3 / 4)) == (1, 0, 0)
    assert worst < 1e-10
    assert check_conditional_invariance(1, Q)
    assert regular_case(Q) == -sp.Rational(1, 2)


@pytest.mark.parametrize("text", TRIPLES)
def test_wronskian_operators_agree_with_hopf_cole(text):
    tr = HeatTriple.from_text(text)
    Q, c, worst = wronskian_operator(tr)
    assert check_conditional_invariance(1, Q)
    assert hopf_cole_agreement(tr) < 1e-10
    _, report = burgers_invariant_family(tr, (20, 1, 1))
    assert report.passed


def test_exponential_triple_coefficients():
    _, c, _ = wronskian_operator(HeatTriple.from_text(TRIPLES[1]))
    assert (c.xi0, c.eta1, c.eta0) == (1, 0, 0)


def test_dependent_triple_is_rejected():
    with pytest.raises(DegenerateTriple):
        HeatTriple.from_text("1; x; 2*x+3").validate()


def test_half_case_needs_constant_coefficient():
    _, c, _ = wronskian_operator(HeatTriple.from_text(TRIPLES[0]))
    f = parse("exp(-x)")
    assert not check_conditional_invariance(f, half_case_operator(f, c.xi0, c.eta1, c.eta0))


def test_theta_operator_builds_coefficient():
    f, Q = theta_operator("x/(1-t)", "theta")
    assert sp.simplify(f - (t - 1)) == 0
    assert sp.simplify(Q.xi - x / (t - 1)) == 0 and Q.eta == 0
    assert check_conditional_invariance(f, Q, DomainBox.of(t=(2, 3), x=(1, 2)))


@pytest.mark.parametrize("a, symmetric", [((0, 1, -1, 1, 0, 0), True), ((0, 1, 0, 0, 0, 0), False)])
def test_lie_family_matches_classifying_equation(a, symmetric):
    f = parse("x^2")
    assert check_conditional_invariance(f, lie_family_operator(a)) is symmetric
    assert (sp.simplify(classifying_residual(f, lie_family_field(a))) == 0) is symmetric


@pytest.mark.parametrize("f, eta, ok", [("exp(x)", "u/x", True), ("1", "0", True), ("1", "2", False),
                                         ("1", "-u^2", False)])
def test_singular_operators(f, eta, ok):
    assert check_singular(f, eta) is ok


def test_singular_operator_is_not_regular():
    Q = ReductionOperator.singular(u / x)
    assert not Q.is_regular
    assert (Q.tau, Q.xi) == (0, 1)


def test_nonlinear_xi_is_rejected():
    with pytest.raises(NotRegular):
        ReductionOperator.regular(u**2, 0).xi_split()


def test_operators_transport_under_equivalence():
    T = equiv.EquivTransform(2, 1, 1, 3, 2, 1, -1)
    f = equiv.push_f(T, parse("exp(t+x^2)"))
    QT = transform_operator(T, Q1)
    assert (QT.tau, QT.xi, QT.eta) == (1, u, 0)
    assert check_conditional_invariance(f, QT, DomainBox.of(t=(0.55, 0.6), x=(0.6, 0.9)))
    Q, _, _ = wronskian_operator(HeatTriple.from_text(TRIPLES[0]))
    S = equiv.space_scaling(2)
    assert check_conditional_invariance(equiv.push_f(S, sp.S(1)), transform_operator(S, Q))


@pytest.mark.parametrize("text", ["x^2", "1"])
def test_q1_families_pass_for_concrete_coefficients(text):
    reports = [r for _, r in q1_invariant_solutions(parse(text))]
    assert len(reports) == 2 and all(r.passed for r in reports)


def test_q1_families_with_symbolic_coefficient():
    from gburgers.conserve import burgers_lhs
    f = parse("exp(t)*h(x*exp(-t))")
    for family, report in q1_invariant_solutions(f):
        assert report is None
        assert sp.simplify(burgers_lhs(f, family)) == 0


@pytest.mark.parametrize("field", ["Pi", "D^t+1/2*D^x", "P^t+G"])
def test_lie_symmetries_with_time_part_are_reduction_operators(field):
    from gburgers.lie import parse_field
    assert check_conditional_invariance(1, ReductionOperator.from_field(parse_field(field)))


def test_invariant_family_examples():
    tr = HeatTriple.from_text(TRIPLES[1])
    sol, report = burgers_invariant_family(tr, (1, 0, 1))
    assert sp.simplify(sol - 2 * sp.exp(x - t) / (1 + sp.exp(x - t))) == 0 and report.passed
    assert burgers_invariant_family(tr, (1, 0, 0))[0] == 0
    sol, report = burgers_invariant_family(tr, (0, 1, 0))
    assert sol == 2 / x and report.passed


def test_dependent_pair_in_triple_is_rejected():
    with pytest.raises(DegenerateTriple):
        wronskian_operator(HeatTriple.from_text("1; x; x"))


def test_theta_operator_edge_cases():
    f, Q = theta_operator("x", "0")
    assert f == -1 and (Q.xi, Q.eta) == (0, 0)
    with pytest.raises(OperatorFailure):
        theta_operator("t", "0")
