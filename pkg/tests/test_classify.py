import random

import pytest
import sympy as sp

from gburgers import equiv
from gburgers.classify import (CASES, KERNEL_PANEL, classify, classifying_residual, identify, invariance_algebra,
                               kernel_check, match_case)
from gburgers.expr import parse, resolve_abs
from gburgers.lie import BASIS, Subalgebra

PT, PX, DT, DX, G, PI = BASIS


@pytest.mark.parametrize("label", list(CASES))
def test_listed_row_has_listed_algebra(label):
    spec = CASES[label]
    f = spec.sample_f()
    s = invariance_algebra(f, spec.box)
    assert s == spec.span(spec.sample_a)
    r = match_case(f, s, spec.box)
    expected = "1.5" if label == "1.7" else label
    assert r.case_label == expected
    for key, value in spec.sample:
        if key != "h":
            assert r.parameters.get(key) == sp.nsimplify(value)


def test_row_aliases_are_recorded():
    r = classify(CASES["1.7"].sample_f())
    assert r.case_label == "1.5"
    assert r.also_listed_as == ("1.7",)


@pytest.mark.parametrize("text, label, dim", [
    ("1", "5", 5),
    ("exp(-x)", "2.5", 2),
    ("x^2", "2.2", 2),
    ("exp(t+x^2)", "trivial", 0),
    ("x^2/t", "2.3", 2),
    ("exp(t)", "3.1", 3),
])
def test_classify_examples(text, label, dim):
    r = classify(parse(text))
    assert r.case_label == label
    assert r.algebra.dim == dim


def test_normal_form_is_gauge_image():
    r = classify(parse("3*x^2/t"))
    assert r.case_label == "2.3"
    assert r.parameters["kappa"] == 3
    assert sp.simplify(r.normal_form - equiv.push_f(r.gauge, parse("3*x^2/t"))) == 0


def test_constant_coefficient_gauged_to_unit():
    r = classify(parse("4"))
    assert sp.simplify(r.normal_form - 1) == 0


def test_algebra_fields_annihilate_classifying_equation():
    f = parse("x^2")
    for X in invariance_algebra(f).basis:
        assert sp.simplify(classifying_residual(f, X)) == 0


def test_kernel_is_galilei_translation_and_boost():
    assert kernel_check(list(KERNEL_PANEL)) == Subalgebra(())
    assert kernel_check(["1", "exp(t)", "t"]) == Subalgebra.span([PX, G])


def test_identify_returns_parameter():
    label, a = identify(Subalgebra.span([PT, DT + 2 * DX]))
    assert (label, a) == ("2.6", 2)


@pytest.mark.parametrize("label", ["1.2", "1.4", "2.3", "2.5", "3.2"])
def test_classification_is_equivariant(label):
    rng = random.Random(label)
    spec = CASES[label]
    f0 = resolve_abs(spec.sample_f(), spec.box)
    for _ in range(2):
        T = equiv.EquivTransform(alpha=rng.choice([1, 2, sp.Rational(1, 2)]),
                                 beta=sp.Rational(rng.randint(-4, 4), rng.randint(1, 4)),
                                 gamma=rng.choice([0, sp.Rational(1, 10), -sp.Rational(1, 10)]),
                                 kappa=rng.choice([1, -1, 2]), mu1=rng.randint(-2, 2), mu0=rng.randint(-2, 2))
        f1 = equiv.push_f(T, f0)
        box1, pts = equiv.image_box(T, spec.box)
        s1 = invariance_algebra(f1, box1, points=pts)
        assert s1 == equiv.adjoint_algebra(T, invariance_algebra(f0, spec.box))
        assert match_case(f1, s1, box1).case_label == label


def test_classification_examples():
    assert invariance_algebra(parse("1")) == Subalgebra.span([PX, G, PT, DT + DX / 2, PI])
    assert invariance_algebra(parse("exp(-x)")) == Subalgebra.span([PT, DT + PX])
    assert invariance_algebra(parse("x^2")) == Subalgebra.span([DX, PT])
    r = classify(parse("-exp(t)"))
    assert r.case_label == "3.1" and r.parameters["eps"] == -1
    assert r.algebra == Subalgebra.span([PX, G, PT + DX / 2])
    assert classify(parse("1")).gauge == equiv.IDENTITY


def test_kernel_panel_edge_cases():
    assert kernel_check(["1"]).dim == 5
    with pytest.raises(ValueError):
        kernel_check([])
