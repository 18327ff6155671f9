"""JSON instance files and verification reports.

All numerics are rational strings ('p/q', with 'inf'/'-inf' sentinels), so a
file round-trips exactly.  Malformed documents raise :class:`SchemaError`.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import List, Optional

from .duality import DualPair, Instance, make_instance
from .finmodels import ScalarProcess, VectorMeasure
from .plconvex import PLConvex, RInterval, pl
from .polycone import ConeMap, PolyCone
from .rationals import ext, fmt, rat
from .scenario import (RandomIntegrand, RandomMeasure, RandomPath,
                       RandomSetMap, ScenarioTree)
from .setmaps import SetMap
from .timegrid import GridMeasure, StepPath, TimeGrid


class SchemaError(ValueError):
    """The document does not match the instance file schema."""


def _need(doc: dict, key: str):
    if key not in doc:
        raise SchemaError(f"missing key {key!r}")
    return doc[key]


def _wrap(what: str):
    def deco(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except SchemaError:
                raise
            except (ValueError, TypeError, KeyError, AttributeError) as exc:
                raise SchemaError(f"bad {what}: {exc}") from exc
        return inner
    return deco


# -- scalars and intervals ----------------------------------------------------

def interval_to_json(iv: RInterval) -> List[str]:
    return [fmt(iv.lo), fmt(iv.hi)]


@_wrap("interval")
def interval_from_json(doc) -> RInterval:
    lo, hi = doc
    return RInterval(ext(lo), ext(hi))


# -- piecewise-linear functions ------------------------------------------------

def plconvex_to_json(fn: PLConvex) -> dict:
    return {
        "dom": [fmt(fn.dom_lo), fmt(fn.dom_hi)],
        "breakpoints": [fmt(b) for b in fn.breakpoints],
        "slopes": [fmt(s) for s in fn.slopes],
        "anchor": [fmt(fn.anchor_x), fmt(fn.anchor_val)],
    }


@_wrap("piecewise-linear function")
def plconvex_from_json(doc: dict) -> PLConvex:
    lo, hi = _need(doc, "dom")
    ax, av = _need(doc, "anchor")
    return pl(ext(lo), ext(hi),
              [rat(b) for b in _need(doc, "breakpoints")],
              [rat(s) for s in _need(doc, "slopes")],
              rat(ax), rat(av))


# -- grid-level objects ---------------------------------------------------------

def grid_to_json(grid: TimeGrid) -> List[str]:
    return [fmt(t) for t in grid.times]


@_wrap("grid")
def grid_from_json(doc) -> TimeGrid:
    return TimeGrid(tuple(rat(t) for t in doc))


def tree_to_json(tree: ScenarioTree) -> dict:
    return {
        "scenarios": list(tree.scenarios),
        "probs": {s: fmt(p) for s, p in zip(tree.scenarios, tree.probs)},
        "partitions": [[list(cell) for cell in part] for part in tree.partitions],
    }


@_wrap("tree")
def tree_from_json(doc: dict) -> ScenarioTree:
    probs_doc = _need(doc, "probs")
    scenarios = tuple(doc.get("scenarios") or sorted(probs_doc))
    probs = tuple(rat(probs_doc[s]) for s in scenarios)
    partitions = tuple(
        tuple(tuple(cell) for cell in part) for part in _need(doc, "partitions"))
    return ScenarioTree(scenarios, probs, partitions)


def measure_to_json(rm: RandomMeasure) -> dict:
    return {s: [fmt(a) for a in rm.measures[s].atoms] for s in rm.tree.scenarios}


@_wrap("measure")
def measure_from_json(doc: dict, tree: ScenarioTree, grid: TimeGrid) -> RandomMeasure:
    return RandomMeasure(tree, grid, {
        s: GridMeasure(grid, tuple(rat(a) for a in doc[s])) for s in tree.scenarios})


def path_to_json(rp: RandomPath) -> dict:
    return {s: [fmt(v) for v in rp.paths[s].values] for s in rp.tree.scenarios}


@_wrap("path")
def path_from_json(doc: dict, tree: ScenarioTree, grid: TimeGrid) -> RandomPath:
    return RandomPath(tree, grid, {
        s: StepPath(grid, tuple(rat(v) for v in doc[s])) for s in tree.scenarios})


def setmap_to_json(rsm: RandomSetMap) -> dict:
    return {
        s: {
            "point_vals": [interval_to_json(p) for p in sm.point_vals],
            "open_vals": [interval_to_json(c) for c in sm.open_vals],
        }
        for s, sm in rsm.maps.items()
    }


@_wrap("set-valued map")
def setmap_from_json(doc: dict, tree: ScenarioTree, grid: TimeGrid) -> RandomSetMap:
    maps = {}
    for s in tree.scenarios:
        entry = doc[s]
        maps[s] = SetMap(
            grid,
            tuple(interval_from_json(p) for p in _need(entry, "point_vals")),
            tuple(interval_from_json(c) for c in _need(entry, "open_vals")))
    return RandomSetMap(tree, grid, maps)


def integrand_to_json(ri: RandomIntegrand) -> dict:
    return {
        "flag": ri.flag,
        "functions": {
            s: [plconvex_to_json(fn) for fn in ri.functions[s]]
            for s in ri.tree.scenarios
        },
    }


@_wrap("integrand")
def integrand_from_json(doc: dict, tree: ScenarioTree, grid: TimeGrid) -> RandomIntegrand:
    fns = {
        s: tuple(plconvex_from_json(f) for f in _need(doc, "functions")[s])
        for s in tree.scenarios
    }
    return RandomIntegrand(tree, grid, fns, _need(doc, "flag"))


# -- cones ---------------------------------------------------------------------

def cone_to_json(k: PolyCone) -> dict:
    return {
        "dim": k.dim,
        "generators": [[fmt(x) for x in g] for g in k.generators],
        "halfspaces": [[fmt(x) for x in a] for a in k.halfspaces],
    }


@_wrap("cone")
def cone_from_json(doc: dict) -> PolyCone:
    dim = int(_need(doc, "dim"))
    gens = doc.get("generators")
    hs = doc.get("halfspaces")
    if gens is not None:
        cone = PolyCone(dim, generators=[[rat(x) for x in g] for g in gens])
        if hs:
            cone._halfspaces = PolyCone(dim, halfspaces=[[rat(x) for x in a] for a in hs])._halfspaces
        return cone
    if hs is None:
        raise SchemaError("cone needs generators or halfspaces")
    return PolyCone(dim, halfspaces=[[rat(x) for x in a] for a in hs])


def conemap_to_json(cm: ConeMap) -> dict:
    return {
        "point_cones": [cone_to_json(k) for k in cm.point_cones],
        "cell_cones": [cone_to_json(k) for k in cm.cell_cones],
    }


@_wrap("cone map")
def conemap_from_json(doc: dict, grid: TimeGrid) -> ConeMap:
    return ConeMap(grid,
                   tuple(cone_from_json(k) for k in _need(doc, "point_cones")),
                   tuple(cone_from_json(k) for k in _need(doc, "cell_cones")))


def scalar_process_to_json(sp: ScalarProcess) -> dict:
    return {
        "flag": sp.flag,
        "points": {s: [fmt(v) for v in sp.points[s]] for s in sp.tree.scenarios},
        "cells": {s: [fmt(v) for v in sp.cells[s]] for s in sp.tree.scenarios},
    }


@_wrap("scalar process")
def scalar_process_from_json(doc: dict, tree: ScenarioTree, grid: TimeGrid) -> ScalarProcess:
    return ScalarProcess(
        tree, grid,
        {s: tuple(rat(v) for v in _need(doc, "points")[s]) for s in tree.scenarios},
        {s: tuple(rat(v) for v in _need(doc, "cells")[s]) for s in tree.scenarios},
        _need(doc, "flag"))


def vector_measure_to_json(vm: VectorMeasure) -> List[List[str]]:
    return [[fmt(x) for x in a] for a in vm.atoms]


@_wrap("vector measure")
def vector_measure_from_json(doc, grid: TimeGrid) -> VectorMeasure:
    return VectorMeasure(grid, tuple(tuple(rat(x) for x in a) for a in doc))


# -- whole documents -------------------------------------------------------------

class InstanceDoc:
    """A parsed instance file: the instance plus its duals, paths and model."""

    def __init__(self, instance: Instance, duals: List[DualPair],
                 paths: List[RandomPath], model: Optional[dict]):
        self.instance = instance
        self.duals = duals
        self.paths = paths
        self.model = model


def instance_doc_from_json(doc: dict) -> InstanceDoc:
    if not isinstance(doc, dict):
        raise SchemaError("instance file must be a JSON object")
    grid = grid_from_json(_need(doc, "grid"))
    tree = tree_from_json(_need(doc, "tree"))
    try:
        h = integrand_from_json(_need(doc, "integrand_h"), tree, grid)
        mu = measure_from_json(_need(doc, "mu"), tree, grid)
        mutilde = (measure_from_json(doc["mutilde"], tree, grid)
                   if doc.get("mutilde") else None)
        htilde = (integrand_from_json(doc["integrand_htilde"], tree, grid)
                  if doc.get("integrand_htilde") else None)
        smap = (setmap_from_json(doc["setmap_S"], tree, grid)
                if doc.get("setmap_S") else None)
        stmap = (setmap_from_json(doc["setmap_Stilde"], tree, grid)
                 if doc.get("setmap_Stilde") else None)
        inst = make_instance(tree, grid, h, mu, mutilde, htilde, smap, stmap)
        duals = [
            DualPair(measure_from_json(_need(d, "u"), tree, grid),
                     measure_from_json(_need(d, "ut"), tree, grid))
            for d in doc.get("duals", [])
        ]
        paths = [path_from_json(p, tree, grid) for p in doc.get("paths", [])]
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    return InstanceDoc(inst, duals, paths, doc.get("model"))


def instance_doc_to_json(idoc: InstanceDoc) -> dict:
    inst = idoc.instance
    return {
        "grid": grid_to_json(inst.grid),
        "tree": tree_to_json(inst.tree),
        "integrand_h": integrand_to_json(inst.h),
        "integrand_htilde": integrand_to_json(inst.htilde),
        "mu": measure_to_json(inst.mu),
        "mutilde": measure_to_json(inst.mutilde),
        "setmap_S": setmap_to_json(inst.S),
        "setmap_Stilde": setmap_to_json(inst.Stilde),
        "duals": [{"u": measure_to_json(d.u), "ut": measure_to_json(d.ut)}
                  for d in idoc.duals],
        "paths": [path_to_json(p) for p in idoc.paths],
        "model": idoc.model,
    }


def load_instance(path: str) -> InstanceDoc:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read instance file: {exc}") from exc
    return instance_doc_from_json(doc)


def dump_instance(idoc: InstanceDoc, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_doc_to_json(idoc), fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- reports ---------------------------------------------------------------------

def jsonable(value):
    """Recursively convert report values to JSON-friendly data."""
    if isinstance(value, (Fraction, float)):
        return fmt(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return repr(value)


def dump_report(report: dict, path: Optional[str]) -> str:
    text = json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def reports_equal(a: dict, b: dict, ignore=("timestamp",)) -> bool:
    def strip(d):
        return {k: v for k, v in d.items() if k not in ignore}
    return json.dumps(jsonable(strip(a)), sort_keys=True) == \
        json.dumps(jsonable(strip(b)), sort_keys=True)
