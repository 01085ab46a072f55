import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gburgers.expr import (
    DomainBox, DomainViolation, ExprSyntaxError, InconclusiveZeroTest, MalformedPowerError,
    UnknownFunctionError, ZeroStatus, canonical, evaluate, evaluate_array, h, is_zero, parse,
    differentiate, resolve_abs, seed, substitute, t, to_text, vanishes, x,
)


def test_parse_basic_forms():
    assert parse("x^2 + 2*t") == x**2 + 2 * t
    assert parse("exp(-x)") == sp.exp(-x)
    assert parse("ln(abs(t))") == sp.log(sp.Abs(t))
    assert parse("arctan(t)") == sp.atan(t)


def test_parse_applied_h_and_derivatives():
    e = parse("h(x - t^2/2)")
    assert e.func is h
    assert sp.diff(e, x).func.__name__ == "dh"


@pytest.mark.parametrize("bad", ["exp(", "x +* 2", "foo(x)", "x^^2", ""])
def test_parse_errors(bad):
    with pytest.raises(ExprSyntaxError):
        parse(bad)


def test_parse_error_kinds():
    with pytest.raises(UnknownFunctionError):
        parse("foo(x)")
    with pytest.raises(MalformedPowerError):
        parse("x^^2")


coeffs = st.integers(-5, 5)


@settings(max_examples=40, deadline=None)
@given(coeffs, coeffs, coeffs, st.integers(0, 3))
def test_text_roundtrip(a, b, c, k):
    e = canonical(a * x**k + b * t * x + c * sp.exp(t))
    assert canonical(parse(to_text(e)) - e) == 0


def test_is_zero_statuses():
    assert is_zero(sp.sin(x)**2 + sp.cos(x)**2 - 1) in (ZeroStatus.PROVABLY_ZERO, ZeroStatus.NUMERICALLY_ZERO)
    assert is_zero(x - t) is ZeroStatus.PROVABLY_NONZERO
    assert is_zero(sp.S(0)) is ZeroStatus.PROVABLY_ZERO
    assert is_zero(sp.pi - 3) is ZeroStatus.PROVABLY_NONZERO


def test_is_zero_with_jets():
    # h is sampled as an independent value, so h(x)*(x - x) vanishes but h(x) does not
    assert is_zero(h(x) * (x + 1) - h(x) * x - h(x)).zero
    assert not is_zero(h(x)).zero


def test_vanishes_raises_when_inconclusive():
    box = DomainBox.of(t=(1, 2), x=(1, 2))
    with pytest.raises(InconclusiveZeroTest):
        vanishes(sp.sqrt(-x - t), box)


def test_domain_box_text_roundtrip():
    box = DomainBox.from_text("t:0.5..2,x:-1..3")
    assert DomainBox.from_text(box.to_text()) == box
    with pytest.raises(ValueError):
        DomainBox.from_text("t=1..2")
    with pytest.raises(ValueError):
        DomainBox.from_text("t:2..1")


def test_sample_is_seeded(monkeypatch):
    box = DomainBox()
    a = box.sample(10)
    b = box.sample(10)
    assert np.array_equal(a["t"], b["t"])
    monkeypatch.setenv("GBE_SEED", "7")
    assert seed() == 7
    c = box.sample(10)
    assert not np.array_equal(a["t"], c["t"])


def test_sample_respects_exclusions():
    box = DomainBox.of(exclusions=[x - t], t=(0, 1), x=(0, 1))
    pts = box.sample(200)
    assert np.all(np.abs(pts["x"] - pts["t"]) > 0)


def test_evaluate_flags_poles_and_branches():
    vals, bad, _ = evaluate_array(1 / (x - 1), {"x": np.array([1.0, 2.0])})
    assert bad.tolist() == [True, False]
    with pytest.raises(DomainViolation):
        evaluate(sp.log(x), {"x": -1.0})
    assert evaluate(sp.erfi(x), {"x": 0.0}) == 0.0


def test_evaluate_integral_by_quadrature():
    s = sp.Symbol("s", real=True)
    e = sp.Integral(sp.exp(s**2), (s, 0, t))
    vals, bad, _ = evaluate_array(e, {"t": np.array([1.0])})
    assert not bad.any()
    assert abs(vals[0] - float(sp.sqrt(sp.pi) * sp.erfi(1) / 2)) < 1e-12


def test_resolve_abs_on_sign_definite_box():
    box = DomainBox.of(t=(1, 2), x=(1, 2))
    assert resolve_abs(sp.Abs(x - 3), box) == 3 - x
    mixed = DomainBox.of(t=(1, 2), x=(-1, 1))
    assert resolve_abs(sp.Abs(x), mixed).has(sp.Abs)


def test_worked_examples():
    assert parse("t^2 + t") == t**2 + t
    assert differentiate(t**2, t) == 2 * t
    assert canonical(differentiate(parse("x^2*h(t)"), x) - 2 * x * h(t)) == 0
    assert substitute(x**2, {x: sp.Symbol("k") * x}) == sp.Symbol("k")**2 * x**2
    assert evaluate(t**2, {"t": 2}) == 4
    c1, c2 = sp.symbols("c1 c2", real=True)
    assert evaluate((x + c1) / (t + c2), {"t": 1, "x": 1}, {c1: 0, c2: 0}) == 1
    g, d = sp.symbols("gamma delta", real=True)
    with pytest.raises(DomainViolation):
        evaluate(1 / (g * t + d), {"t": 0}, {g: 1, d: 0})
    assert is_zero(parse("sin(x)^2+cos(x)^2-1")) is ZeroStatus.NUMERICALLY_ZERO
    assert is_zero(x - x) is ZeroStatus.PROVABLY_ZERO


def test_classifying_residual_of_time_translation_is_nonzero():
    from gburgers.classify import classifying_residual
    from gburgers.lie import PT
    r = classifying_residual(parse("exp(t+x^2)"), PT)
    assert is_zero(r) is ZeroStatus.PROVABLY_NONZERO
    assert evaluate(r, {"t": 0, "x": 0}) == 1
