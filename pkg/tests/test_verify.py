from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gburgers.expr import DomainBox, t, x
from gburgers.verify import ExcessiveExclusion, fd_check, grid_residual, nullspace, pde_residual


def test_pde_residual_hopf_cole_kink():
    # u = 2 v_x / v with v = 1 + e^{x-t} solving v_t + v_xx = 0
    sol = 2 * sp.exp(x - t) / (1 + sp.exp(x - t))
    rep = pde_residual(1, sol)
    assert rep.passed and rep.points == 400


def test_pde_residual_detects_non_solution():
    rep = pde_residual(1, x**2)
    assert not rep.passed
    assert rep.max_abs > 1


def test_residual_report_roundtrip():
    rep = pde_residual(1, x / t)
    again = type(rep).from_dict(rep.to_dict())
    assert again == rep


def test_grid_excludes_singular_points():
    box = DomainBox.of(t=(1, 2), x=(-1, 1))
    with pytest.raises(ExcessiveExclusion):
        grid_residual(sp.log(x), box)


def test_nullspace_rounds_to_rationals():
    A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    res = nullspace(A)
    assert res.exact and len(res.vectors) == 2
    for vec in res.vectors:
        assert all(isinstance(c, Fraction) for c in vec)
        assert np.allclose(A @ np.array([float(c) for c in vec]), 0)


def test_nullspace_accepts_large_denominator_only_when_exact():
    # kernel (1, -471/196000)
    A = np.array([[471.0 / 196000.0, 1.0]])
    res = nullspace(A)
    assert res.exact
    assert res.vectors[0] == (Fraction(1), Fraction(-471, 196000))


def test_nullspace_full_rank():
    assert nullspace(np.eye(3)).vectors == []


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=6, max_size=6))
def test_nullspace_of_integer_rows(entries):
    A = np.array(entries, dtype=float).reshape(2, 3)
    res = nullspace(A)
    assert res.exact
    assert len(res.vectors) == 3 - np.linalg.matrix_rank(A)
    for vec in res.vectors:
        assert np.allclose(A @ np.array([float(c) for c in vec]), 0, atol=1e-9)


def test_fd_check_agrees_with_symbolic_derivative():
    rep = fd_check(sp.exp(t * x) * sp.sin(x), x)
    assert rep.max_deviation < 1e-6


def test_linear_family_solves_every_equation():
    for f in [sp.exp(t + x**2), x**2, sp.S(1), sp.sin(x) + 2]:
        assert pde_residual(f, x / t).passed


def test_non_solution_residual_value():
    from gburgers.verify import burgers_operator
    assert sp.expand(burgers_operator(1, x**2) - (2 * x**3 + 2)) == 0


def test_nullspace_edge_cases():
    assert nullspace(np.eye(6)).vectors == []
    assert len(nullspace(np.zeros((24, 6))).vectors) == 6


def test_kernel_of_sampled_classifying_matrix():
    from gburgers.classify import classifying_coefficients
    from gburgers.expr import evaluate_array
    pts = DomainBox().sample(30, ["t", "x"])
    cols = [np.broadcast_to(evaluate_array(c, pts)[0], (30,)) for c in classifying_coefficients(sp.S(1))]
    res = nullspace(np.column_stack(cols))
    assert res.exact and len(res.vectors) == 5


@pytest.mark.parametrize("e, bound", [(t**3, 1e-7), (sp.exp(2 * sp.atan(t)), 1e-5)])
def test_fd_check_bounds(e, bound):
    assert fd_check(e, t).max_deviation < bound
