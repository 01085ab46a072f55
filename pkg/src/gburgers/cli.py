"""Command-line front end: ``gburgers classify|analyze|reduce|operators|conserve|verify-solution``.

Exit codes: 0 success, 1 unreadable input, 2 some zero test was inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Sequence

import sympy as sp

from . import classify as cls
from . import conserve, nonclassical, reduce
from .expr import ZERO_LOG, DomainBox, ExprSyntaxError, canonical, omega, parse, to_text
from .lie import parse_field
from .verify import ExcessiveExclusion, pde_residual

SCHEMA = 1


@dataclass
class AnalysisReport:
    f: str
    domain: str
    classification: dict | None = None
    reductions: list = field(default_factory=list)
    operators: list = field(default_factory=list)
    conservation: dict | None = None
    solutions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _text(e) -> str | None:
    if e is None:
        return None
    return to_text(e) if isinstance(e, sp.Basic) else str(e)


# ---------------------------------------------------------------------------
# report sections


def classification_section(f, box: DomainBox) -> tuple[dict, cls.ClassificationResult]:
    res = cls.classify(f, box)
    section = {
        "case": res.case_label,
        "display": res.display_label(),
        "dimension": res.algebra.dim,
        "basis": [str(b) for b in res.algebra.basis],
        "parameters": {k: _text(v) for k, v in res.parameters.items()},
        "gauge": res.gauge.to_dict() if res.gauge is not None else None,
        "normal_form": _text(res.normal_form),
        "also_listed_as": list(res.also_listed_as),
        "assumptions": list(res.assumptions),
    }
    return section, res


def _row_generator(label: str, a):
    text = reduce.REDUCTIONS[label]["basis"]
    if "a*" in text:
        if a is None:
            return None
        text = text.replace("a*", f"({a})*")
    return parse_field(text)


def reduction_section(res: cls.ClassificationResult, warnings: list) -> list:
    """Table-2 reductions of the normal form by generators lying in its listed algebra."""
    if res.case_label not in cls.CASES or res.normal_form is None:
        return []
    a = res.parameters.get("a")
    listed = cls.CASES[res.case_label].span(a)
    box = cls.CASES[res.case_label].box
    out = []
    for label in reduce.REDUCTIONS:
        gen = _row_generator(label, a)
        if gen is None or not listed.contains(gen):
            continue
        try:
            red = reduce.lie_reduce(res.normal_form, label, a, box)
        except Exception as exc:  # the row needs a form the normal form does not have
            warnings.append(f"reduction {label}: {exc}")
            continue
        out.append({
            "row": label,
            "generator": red.ansatz.basis,
            "ansatz": f"u = ({_text(red.ansatz.scale)})*phi(w) + {_text(red.ansatz.shift)}, "
                      f"w = {_text(red.ansatz.invariant)}",
            "reduced": f"{_text(red.reduced.xreplace({omega: sp.Symbol('w')}))} = 0",
            "factor": _text(red.factor),
            "class_form": None if red.ode is None else
            f"h={_text(red.ode.h.xreplace({omega: sp.Symbol('w')}))}, "
            f"alpha={_text(red.ode.alpha)}, beta={_text(red.ode.beta)}, "
            f"gamma={_text(red.ode.gamma)}",
        })
    return out


def solutions_section(f, box: DomainBox, warnings: list) -> list:
    out = []
    try:
        entries = reduce.solution_catalogue(f, box)
    except ExcessiveExclusion as exc:
        warnings.append(f"solution catalogue: {exc}")
        return out
    for e in entries:
        out.append({"source": e.source, "u": _text(e.u), "note": e.note,
                     "residual": e.residual.to_dict() if e.residual is not None else None})
    return out


def operator_section(f, box: DomainBox, heat_triple: str | None, res: cls.ClassificationResult | None) -> list:
    fexpr = parse(f) if isinstance(f, str) else sp.sympify(f)
    out = [{"kind": "xi1=1", "operator": str(nonclassical.Q1),
            "reduction_operator": nonclassical.check_conditional_invariance(fexpr, nonclassical.Q1, box)}]
    if res is not None:
        for b in res.algebra.basis:
            if b.tau == 0:
                continue
            Q = nonclassical.ReductionOperator.from_field(b)
            out.append({"kind": "Lie symmetry", "operator": str(Q), "field": str(b),
                        "reduction_operator": nonclassical.check_conditional_invariance(fexpr, Q, box)})
    constant = not (fexpr.free_symbols & {sp.Symbol("t", real=True), sp.Symbol("x", real=True)})
    if heat_triple is not None or constant:
        triple = nonclassical.HeatTriple.from_text(heat_triple or "1; x; x^2-2*t")
        Q, c, worst = nonclassical.wronskian_operator(triple, box)
        entry = {"kind": "xi1=-1/2 (heat triple)", "operator": str(Q),
                 "coefficients": {"xi0": _text(c.xi0), "eta1": _text(c.eta1), "eta0": _text(c.eta0)},
                 "determining_residual": worst, "for_f": "1"}
        if constant:
            entry["reduction_operator"] = nonclassical.check_conditional_invariance(
                1, Q, box) if canonical(fexpr - 1) == 0 else None
        out.append(entry)
    return out


def conservation_section(f) -> dict | None:
    law = conserve.conservation_laws(f)
    if law is None:
        return {"exists": False}
    _, eq = conserve.potential_system(law.f, law.characteristic)
    m = conserve.psi_map(law.f, law.characteristic)
    section = {
        "exists": True,
        "characteristic": _text(law.characteristic),
        "density": "lambda*u",
        "flux": "lambda*(u^2/2 + f*u_x - f_x*u)",
        "potential_equation": str(eq),
        "psi_map": {"t_hat": _text(m.t_hat), "x_hat": _text(m.x_hat), "f_hat": _text(m.f_hat)},
    }
    fexpr = law.f
    if not (fexpr.free_symbols & {sp.Symbol("t", real=True), sp.Symbol("x", real=True)}):
        conserve.burgers_linearize(fexpr)
        section["linearization"] = f"w = exp(v/(2*({_text(fexpr)}))), w_t + ({_text(fexpr)})*w_xx = 0"
    return section


# ---------------------------------------------------------------------------
# commands


def _emit(report: AnalysisReport, args) -> None:
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json())
    print(render(report))


def render(report: AnalysisReport) -> str:
    lines = [f"f = {report.f}    domain {report.domain}"]
    c = report.classification
    if c:
        params = ", ".join(f"{k}={v}" for k, v in c["parameters"].items())
        lines.append(f"case {c['display']}  dim {c['dimension']}  <{', '.join(c['basis'])}>"
                     + (f"  ({params})" if params else ""))
        if c["also_listed_as"]:
            lines.append(f"  also listed as {', '.join(c['also_listed_as'])}")
        if c["normal_form"]:
            lines.append(f"  normal form f~ = {c['normal_form']}")
        for a in c["assumptions"]:
            lines.append(f"  assumes {a}")
    for r in report.reductions:
        lines.append(f"{r['row']:>4} | {r['generator']:<14} | {r['ansatz']} | {r['reduced']}")
    for s in report.solutions:
        res = s["residual"]
        tag = "n/a" if res is None else ("PASS" if res["passed"] else "FAIL") + f" {res['max_abs']:.1e}"
        lines.append(f"  u = {s['u']}  [{s['source']}] {tag} {s['note']}".rstrip())
    for o in report.operators:
        lines.append(f"  {o['kind']}: {o['operator']}  reduction operator: {o.get('reduction_operator')}")
        if "coefficients" in o:
            co = o["coefficients"]
            lines.append(f"    (xi0, eta1, eta0) = ({co['xi0']}, {co['eta1']}, {co['eta0']})")
    if report.conservation is not None:
        cons = report.conservation
        if not cons["exists"]:
            lines.append("no conservation laws (f_xxx != 0)")
        else:
            lines.append(f"characteristic lambda = {cons['characteristic']}")
            lines.append(f"potential equation: {cons['potential_equation']}")
            if "linearization" in cons:
                lines.append(f"linearization: {cons['linearization']}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def _start(args) -> tuple[sp.Expr, DomainBox, AnalysisReport]:
    fexpr = parse(args.f)
    box = DomainBox.from_text(args.domain) if args.domain else DomainBox()
    return fexpr, box, AnalysisReport(to_text(canonical(fexpr)), box.to_text())


def _finish(report: AnalysisReport, start: int) -> None:
    report.warnings += [f"inconclusive zero test: {e}" for e in ZERO_LOG.inconclusive[start:]]


def cmd_classify(args) -> AnalysisReport:
    f, box, report = _start(args)
    report.classification, _ = classification_section(f, box)
    return report


def cmd_full(args) -> AnalysisReport:
    f, box, report = _start(args)
    every = getattr(args, "all", False)
    report.classification, res = classification_section(f, box)
    if every or args.reduce:
        report.reductions = reduction_section(res, report.warnings)
        report.solutions = solutions_section(f, box, report.warnings)
    if every or args.operators:
        report.operators = operator_section(f, box, getattr(args, "heat_triple", None), res)
    if every or args.conserve:
        report.conservation = conservation_section(f)
    return report


def cmd_reduce(args) -> AnalysisReport:
    f, box, report = _start(args)
    report.classification, res = classification_section(f, box)
    report.reductions = reduction_section(res, report.warnings)
    report.solutions = solutions_section(f, box, report.warnings)
    return report


def cmd_operators(args) -> AnalysisReport:
    f, box, report = _start(args)
    report.operators = operator_section(f, box, args.heat_triple, None)
    return report


def cmd_conserve(args) -> AnalysisReport:
    f, _, report = _start(args)
    report.conservation = conservation_section(f)
    return report


def cmd_verify_solution(args) -> AnalysisReport:
    f, box, report = _start(args)
    sol = parse(args.u)
    rep = pde_residual(f, sol, box)
    report.solutions = [{"source": "user", "u": to_text(sol), "note": "", "residual": rep.to_dict()}]
    if not rep.passed:
        report.warnings.append(f"residual {rep.max_abs:.3e} exceeds {rep.tolerance:g}")
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gburgers", description="Symmetry analysis of u_t + u u_x + f(t,x) u_xx = 0")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_):
        sp_.add_argument("--f", required=True, help="arbitrary element f(t,x), e.g. 'exp(-x)'")
        sp_.add_argument("--domain", help="sampling box, e.g. 't:1..2,x:1..2'")
        sp_.add_argument("--json", help="also write the report as JSON to this file")
        return sp_

    common(sub.add_parser("classify", help="Lie invariance algebra and case")).set_defaults(run=cmd_classify)
    full = common(sub.add_parser("analyze", help="classification plus optional sections"))
    for flag in ("--reduce", "--operators", "--conserve", "--all"):
        full.add_argument(flag, action="store_true")
    full.add_argument("--heat-triple", help="three heat-equation solutions separated by ';'")
    full.set_defaults(run=cmd_full)
    common(sub.add_parser("reduce", help="Lie reductions and closed-form solutions")).set_defaults(run=cmd_reduce)
    ops = common(sub.add_parser("operators", help="reduction operators"))
    ops.add_argument("--heat-triple", help="three heat-equation solutions separated by ';'")
    ops.set_defaults(run=cmd_operators)
    common(sub.add_parser("conserve", help="conservation law and potential equation")).set_defaults(run=cmd_conserve)
    ver = common(sub.add_parser("verify-solution", help="grid residual of a candidate solution"))
    ver.add_argument("--u", required=True)
    ver.set_defaults(run=cmd_verify_solution)
    return p


def _validate(args) -> None:
    parse(args.f)
    if args.domain:
        DomainBox.from_text(args.domain)
    if getattr(args, "u", None):
        parse(args.u)
    if getattr(args, "heat_triple", None):
        [parse(p) for p in args.heat_triple.split(";")]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
    except (ExprSyntaxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    start = len(ZERO_LOG.inconclusive)
    report = args.run(args)
    _finish(report, start)
    _emit(report, args)
    return 2 if len(ZERO_LOG.inconclusive) > start else 0


if __name__ == "__main__":
    sys.exit(main())
