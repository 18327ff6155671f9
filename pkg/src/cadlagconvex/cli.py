"""Batch verification front-end.

Subcommands: ``verify`` runs one theorem check on an instance file and emits
a machine-readable report, ``refine`` rewrites a file on a finer grid,
``model`` emits a bundled preset instance, ``report-diff`` compares two
reports modulo their timestamps.  Exit codes: 0 pass, 1 fail, 2 schema
error, 3 brute-force budget exceeded, 4 assumption failure under --strict.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional

from . import duality, generators, serialize
from .duality import (BudgetExceededError, Instance, assumption_report,
                      bruteforce_gap_bound, conj_bruteforce, conj_pointwise,
                      eval_Fhat, indicator_integrand, interchange_det,
                      interchange_stoch, make_instance, subdiff_check,
                      support_DS)
from .finmodels import currency_model, vector_pairing
from .plconvex import support_fn
from .polycone import cs_regularity_check
from .rationals import INF, NEG_INF, fmt, is_finite, rat
from .scenario import jensen_check
from .serialize import (InstanceDoc, SchemaError, conemap_from_json,
                        dump_instance, dump_report, load_instance,
                        reports_equal, vector_measure_from_json)
from .setmaps import michael_check, projection_selection

THEOREMS = ("involution", "recession-support", "interchange-det",
            "interchange-stoch", "conjugate", "subdiff", "support-ds",
            "jensen", "michael", "projection", "cs-regularity", "currency")

EXIT_PASS, EXIT_FAIL, EXIT_SCHEMA, EXIT_BUDGET, EXIT_ASSUMPTION = 0, 1, 2, 3, 4


def _instance_functions(inst: Instance):
    for fam in (inst.h, inst.htilde):
        for fns in fam.functions.values():
            yield from fns


def _check_involution(idoc: InstanceDoc, args) -> Dict:
    rng = random.Random(args.seed)
    fns = list(_instance_functions(idoc.instance))
    fns += [generators.rand_plconvex(rng) for _ in range(args.count)]
    failures = [i for i, fn in enumerate(fns) if fn.conjugate().conjugate() != fn]
    return {"lhs": len(fns), "rhs": len(fns) - len(failures),
            "gap": len(failures), "bound": 0,
            "assumptions": [], "pass": not failures,
            "details": {"failures": failures}}


def _check_recession_support(idoc: InstanceDoc, args) -> Dict:
    rng = random.Random(args.seed)
    fns = list(_instance_functions(idoc.instance))
    fns += [generators.rand_plconvex(rng) for _ in range(args.count)]
    failures = [i for i, fn in enumerate(fns)
                if support_fn(fn.conjugate().domain) != fn.recession()]
    return {"lhs": len(fns), "rhs": len(fns) - len(failures),
            "gap": len(failures), "bound": 0,
            "assumptions": [], "pass": not failures,
            "details": {"failures": failures}}


def _assumption_list(rep: Dict) -> List[Dict]:
    return [{"name": k, "ok": v} for k, v in rep["summary"].items() if k != "all_ok"]


def _check_interchange_det(idoc: InstanceDoc, args) -> Dict:
    rep = interchange_det(idoc.instance, side=args.side)
    assum = [{"name": k, "ok": bool(v)} for k, v in rep["assumptions"].items()
             if not k.endswith("slots")]
    gap = rep["gap"]
    return {"lhs": rep["lhs"], "rhs": rep["rhs"], "gap": gap, "bound": 0,
            "assumptions": assum, "pass": bool(rep["ok"]),
            "assumptions_ok": rep["assumptions_ok"],
            "details": {"vacuous": rep["vacuous"],
                        "michael_failing_slots": rep["assumptions"]["michael_failing_slots"]}}


def _check_interchange_stoch(idoc: InstanceDoc, args) -> Dict:
    rep = interchange_stoch(idoc.instance, form=args.form)
    witness = rep.get("witness")
    return {"lhs": rep["lhs"], "rhs": rep["rhs"],
            "gap": None if rep["vacuous"] else rep["lhs"] - rep["rhs"]
            if is_finite(rep["lhs"]) and is_finite(rep["rhs"]) else None,
            "bound": 0,
            "assumptions": [{"name": k, "ok": bool(v)}
                            for k, v in rep["assumptions"].items()],
            "assumptions_ok": rep["assumptions_ok"],
            "pass": bool(rep["ok"]),
            "details": {"form": rep["form"], "vacuous": rep["vacuous"],
                        "witness_found": witness is not None}}


def _default_B(inst: Instance, arg: Optional[str]) -> Fraction:
    if arg is not None:
        return rat(arg)
    return 2 * inst.magnitude_bound()


def _check_conjugate(idoc: InstanceDoc, args) -> Dict:
    inst = idoc.instance
    if not idoc.duals:
        raise SchemaError("conjugate check needs at least one dual pair")
    rep = assumption_report(inst)
    B = _default_B(inst, args.B)
    delta = rat(args.delta)
    entries, ok = [], True
    for k, d in enumerate(idoc.duals):
        pointwise = conj_pointwise(inst, d)
        brute = conj_bruteforce(inst, d, B, delta, budget=args.budget)
        bound = bruteforce_gap_bound(d, delta)
        if pointwise == INF or brute == NEG_INF:
            verified = False
            gap = None
        else:
            gap = pointwise - brute
            verified = 0 <= gap <= bound
        ok = ok and verified
        entries.append({"dual": k, "pointwise": pointwise, "bruteforce": brute,
                        "gap": gap, "bound": bound, "verified": verified})
    agg_gap = max((e["gap"] for e in entries if e["gap"] is not None),
                  default=Fraction(0))
    agg_bound = max((e["bound"] for e in entries), default=Fraction(0))
    return {"lhs": entries[0]["pointwise"], "rhs": entries[0]["bruteforce"],
            "gap": agg_gap, "bound": agg_bound,
            "assumptions": _assumption_list(rep),
            "assumptions_ok": rep["all_ok"],
            "pass": ok, "details": {"B": B, "delta": delta, "duals": entries}}


def _check_subdiff(idoc: InstanceDoc, args) -> Dict:
    inst = idoc.instance
    if not idoc.duals or not idoc.paths:
        raise SchemaError("subdiff check needs a path and a dual pair")
    entries, ok = [], True
    for pk, y in enumerate(idoc.paths):
        if eval_Fhat(inst, y) == INF:
            entries.append({"path": pk, "skipped": "infinite primal value"})
            continue
        for dk, d in enumerate(idoc.duals):
            rep = subdiff_check(inst, y, d)
            ok = ok and rep["equivalence_ok"]
            entries.append({"path": pk, "dual": dk,
                            "all_inclusions": rep["all_inclusions"],
                            "fenchel_gap": rep["fenchel_gap"],
                            "equivalence_ok": rep["equivalence_ok"]})
    rep0 = assumption_report(inst)
    return {"lhs": len(entries), "rhs": sum(1 for e in entries if e.get("equivalence_ok")),
            "gap": None, "bound": 0,
            "assumptions": _assumption_list(rep0), "assumptions_ok": rep0["all_ok"],
            "pass": ok, "details": {"pairs": entries}}


def _check_support_ds(idoc: InstanceDoc, args) -> Dict:
    inst = idoc.instance
    if not idoc.duals:
        raise SchemaError("support-ds check needs at least one dual pair")
    stripped = make_instance(inst.tree, inst.grid,
                             indicator_integrand(inst.S, "optional"),
                             inst.mu, inst.mutilde, None, inst.S, inst.Stilde)
    rep = assumption_report(stripped)
    B = _default_B(inst, args.B)
    delta = rat(args.delta)
    entries, ok = [], True
    for k, d in enumerate(idoc.duals):
        formula = support_DS(inst, d)
        brute = conj_bruteforce(stripped, d, B, delta, budget=args.budget)
        bound = bruteforce_gap_bound(d, delta)
        if formula in (INF, NEG_INF) or brute == NEG_INF:
            verified = formula == NEG_INF and brute == NEG_INF
            gap = None
        else:
            gap = formula - brute
            verified = 0 <= gap <= bound
        ok = ok and verified
        entries.append({"dual": k, "formula": formula, "bruteforce": brute,
                        "gap": gap, "bound": bound, "verified": verified})
    return {"lhs": entries[0]["formula"], "rhs": entries[0]["bruteforce"],
            "gap": max((e["gap"] for e in entries if e["gap"] is not None),
                       default=Fraction(0)),
            "bound": max((e["bound"] for e in entries), default=Fraction(0)),
            "assumptions": _assumption_list(rep), "assumptions_ok": rep["all_ok"],
            "pass": ok, "details": {"duals": entries}}


def _check_jensen(idoc: InstanceDoc, args) -> Dict:
    inst = idoc.instance
    if not idoc.paths:
        raise SchemaError("jensen check needs at least one path")
    entries, ok = [], True
    for k, w in enumerate(idoc.paths):
        rep = jensen_check(inst.h, inst.mu, w, projection="optional")
        ok = ok and rep["ok"]
        entries.append({"path": k, "lhs": rep["lhs"], "rhs": rep["rhs"],
                        "ok": rep["ok"]})
    return {"lhs": entries[0]["lhs"], "rhs": entries[0]["rhs"],
            "gap": None, "bound": 0, "assumptions": [],
            "pass": ok, "details": {"paths": entries}}


def _check_michael(idoc: InstanceDoc, args) -> Dict:
    inst = idoc.instance
    entries, ok = [], True
    for s in inst.tree.scenarios:
        rep = michael_check(inst.s_map(s))
        ok = ok and rep["matches_right_isc"]
        entries.append({"scenario": s,
                        "representation_holds": rep["representation_holds"],
                        "right_isc": rep["right_isc"],
                        "matches_right_isc": rep["matches_right_isc"],
                        "failing_slots": rep["failing_slots"]})
    return {"lhs": len(entries), "rhs": sum(1 for e in entries if e["matches_right_isc"]),
            "gap": None, "bound": 0, "assumptions": [], "pass": ok,
            "details": {"scenarios": entries}}


def _check_projection(idoc: InstanceDoc, args) -> Dict:
    inst = idoc.instance
    x = rat(args.x)
    entries, ok = [], True
    for s in inst.tree.scenarios:
        sm = inst.s_map(s)
        try:
            path = projection_selection(sm, x)
        except ValueError as exc:
            entries.append({"scenario": s, "error": str(exc)})
            ok = False
            continue
        sel_ok = sm.is_selection(path)
        dist_ok = all(abs(x - v) == sm.attainable_at(i).distance_to(x)
                      for i, v in enumerate(path.values))
        ok = ok and sel_ok and dist_ok
        entries.append({"scenario": s, "selection": sel_ok, "distance": dist_ok})
    return {"lhs": len(entries), "rhs": sum(1 for e in entries if "error" not in e),
            "gap": None, "bound": 0, "assumptions": [], "pass": ok,
            "details": {"x": x, "scenarios": entries}}


def _check_cs(idoc: InstanceDoc, args) -> Dict:
    model = idoc.model or {}
    if model.get("type") != "cs":
        raise SchemaError("cs-regularity check needs a model of type 'cs'")
    g_map = conemap_from_json(model["G"], idoc.instance.grid)
    gt_map = conemap_from_json(model["Gtilde"], idoc.instance.grid)
    rep = cs_regularity_check(g_map, gt_map)
    return {"lhs": None, "rhs": None, "gap": None, "bound": 0,
            "assumptions": [
                {"name": "efficient_friction",
                 "ok": all(rep["efficient_friction_G"]) and all(rep["efficient_friction_Gtilde"])},
                {"name": "right_regular", "ok": all(rep["right_regular"])},
                {"name": "left_regular", "ok": all(rep["left_regular"])},
            ],
            "pass": rep["pass"], "details": rep}


def _check_currency(idoc: InstanceDoc, args) -> Dict:
    model = idoc.model or {}
    if model.get("type") != "currency":
        raise SchemaError("currency check needs a model of type 'currency'")
    grid = idoc.instance.grid
    cones = conemap_from_json(model["solvency"], grid)
    try:
        cm = currency_model(cones)
    except ValueError as exc:
        return {"lhs": None, "rhs": None, "gap": None, "bound": 0,
                "assumptions": [{"name": "preconditions", "ok": False}],
                "pass": False, "details": {"error": str(exc)}}
    rng = random.Random(args.seed)
    entries, ok = [], True
    for k, dd in enumerate(model.get("duals", [])):
        u = vector_measure_from_json(dd["u"], grid)
        ut = vector_measure_from_json(dd["ut"], grid)
        mem = cm.is_member(u, ut)
        entry = {"dual": k, "member": mem["member"]}
        if mem["member"]:
            worst = max(vector_pairing(cm.sample_selection(rng), u, ut)
                        for _ in range(args.count or 100))
            entry["max_sampled_pairing"] = worst
            entry["polarity_ok"] = worst <= 0
            ok = ok and worst <= 0
        entries.append(entry)
    return {"lhs": len(entries), "rhs": sum(1 for e in entries if e["member"]),
            "gap": None, "bound": 0,
            "assumptions": [{"name": "preconditions", "ok": True}],
            "pass": ok, "details": {"report": cm.report, "duals": entries}}


_CHECKS = {
    "involution": _check_involution,
    "recession-support": _check_recession_support,
    "interchange-det": _check_interchange_det,
    "interchange-stoch": _check_interchange_stoch,
    "conjugate": _check_conjugate,
    "subdiff": _check_subdiff,
    "support-ds": _check_support_ds,
    "jensen": _check_jensen,
    "michael": _check_michael,
    "projection": _check_projection,
    "cs-regularity": _check_cs,
    "currency": _check_currency,
}


def cmd_verify(args) -> int:
    try:
        idoc = load_instance(args.file)
        report = _CHECKS[args.theorem](idoc, args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    report = {"theorem": args.theorem, **report, "timestamp": time.time()}
    text = dump_report(report, args.report)
    print(text, end="")
    if args.strict and not report.get("assumptions_ok", True):
        return EXIT_ASSUMPTION
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def _refine_model(model: Optional[dict], idoc: InstanceDoc, factor: int) -> Optional[dict]:
    if not model:
        return model
    inst = idoc.instance
    out = dict(model)
    kind = model.get("type")
    if kind in ("obstacle", "bidask"):
        for key in ("b", "a"):
            if key in model:
                sp = serialize.scalar_process_from_json(model[key], inst.tree, inst.grid)
                out[key] = serialize.scalar_process_to_json(sp.refine(factor))
        for key in ("ycheck", "ybar"):
            if key in model:
                path = serialize.path_from_json(model[key], inst.tree, inst.grid)
                out[key] = serialize.path_to_json(path.refine(factor))
    elif kind in ("currency", "cs"):
        for key in ("solvency", "G", "Gtilde"):
            if key in model:
                cm = serialize.conemap_from_json(model[key], inst.grid)
                out[key] = serialize.conemap_to_json(cm.refine(factor))
        if "duals" in model:
            refined = []
            for dd in model["duals"]:
                u = serialize.vector_measure_from_json(dd["u"], inst.grid)
                ut = serialize.vector_measure_from_json(dd["ut"], inst.grid)
                dim = len(u.atoms[0])
                zero = ["0"] * dim
                def stretch(vm):
                    atoms = []
                    for a in vm.atoms[:-1]:
                        atoms.append([fmt(x) for x in a])
                        atoms.extend([list(zero)] * (factor - 1))
                    atoms.append([fmt(x) for x in vm.atoms[-1]])
                    return atoms
                refined.append({"u": stretch(u), "ut": stretch(ut)})
            out["duals"] = refined
    return out


def cmd_refine(args) -> int:
    if args.factor < 2:
        print("refinement factor must be >= 2", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        idoc = load_instance(args.file)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    refined = InstanceDoc(
        idoc.instance.refine(args.factor),
        [d.refine(args.factor) for d in idoc.duals],
        [p.refine(args.factor) for p in idoc.paths],
        _refine_model(idoc.model, idoc, args.factor))
    dump_instance(refined, args.output)
    print(f"wrote {args.output}")
    return EXIT_PASS


def cmd_model(args) -> int:
    from .presets import build_preset
    try:
        idoc = build_preset(args.name)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SCHEMA
    dump_instance(idoc, args.output)
    print(f"wrote {args.output}")
    return EXIT_PASS


def cmd_report_diff(args) -> int:
    import json
    try:
        with open(args.a, encoding="utf-8") as fh:
            a = json.load(fh)
        with open(args.b, encoding="utf-8") as fh:
            b = json.load(fh)
    except (OSError, ValueError) as exc:
        print(f"cannot read reports: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if reports_equal(a, b):
        print("reports agree (timestamps ignored)")
        return EXIT_PASS
    print("reports differ")
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cadlag-convex",
                                description="exact duality checks for step-path instances")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run one theorem check on an instance file")
    v.add_argument("file")
    v.add_argument("--theorem", required=True, choices=THEOREMS)
    v.add_argument("--B", default=None, help="lattice radius (default from instance data)")
    v.add_argument("--delta", default="1/100", help="lattice step")
    v.add_argument("--report", default=None, help="write the report JSON here")
    v.add_argument("--strict", action="store_true",
                   help="exit 4 when assumption checks fail")
    v.add_argument("--count", type=int, default=100,
                   help="random cases for sampled checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--side", choices=("cadlag", "caglad"), default="cadlag")
    v.add_argument("--form", choices=("F", "Fhat"), default="Fhat")
    v.add_argument("--x", default="0", help="anchor point for projection checks")
    v.add_argument("--budget", type=int, default=None,
                   help=f"brute-force evaluation cap (env {duality.BUDGET_ENV_VAR})")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("refine", help="rewrite an instance on a finer grid")
    r.add_argument("file")
    r.add_argument("--factor", type=int, required=True)
    r.add_argument("-o", "--output", required=True)
    r.set_defaults(fn=cmd_refine)

    m = sub.add_parser("model", help="emit a bundled preset instance")
    m.add_argument("name")
    m.add_argument("-o", "--output", required=True)
    m.set_defaults(fn=cmd_model)

    d = sub.add_parser("report-diff", help="compare two reports modulo timestamp")
    d.add_argument("a")
    d.add_argument("b")
    d.set_defaults(fn=cmd_report_diff)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
