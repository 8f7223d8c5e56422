"""JSON scenario files.

Matrices are row-major nested lists. Unknown keys are rejected. A minimal
file::

    {
      "agents": ["single_integrator", "single_integrator"],
      "topology": {"edges": [[0, 1]]},
      "references": [[0.0], [2.0]],
      "beta": 0.1,
      "horizon": 100
    }
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .costs import CostSet
from .graph import Topology
from .regulation import AgentDynamics
from .sim import AgentSpec, Reschedule, Scenario

_matrix = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}}
_vector = {"type": "array", "minItems": 1, "items": {"type": "number"}}
_vectors = {"type": "array", "items": _vector}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["agents", "topology", "references", "beta", "horizon"],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "agents": {
            "type": "array", "minItems": 1,
            "items": {"oneOf": [
                {"const": "single_integrator"},
                {"type": "object", "additionalProperties": False, "required": ["A", "B", "C"],
                 "properties": {"A": _matrix, "B": _matrix, "C": _matrix, "K": _matrix}},
            ]},
        },
        "topology": {
            "type": "object", "additionalProperties": False, "required": ["edges"],
            "properties": {
                "edges": {"type": "array", "items": {
                    "type": "array", "minItems": 2, "maxItems": 3,
                    "prefixItems": [{"type": "integer"}, {"type": "integer"}, {"type": "number"}],
                    "items": {"type": "number"}}},
            },
        },
        "references": _vectors,
        "beta": {"type": "number"},
        "horizon": {"type": "integer", "minimum": 1},
        "record_stride": {"type": "integer", "minimum": 1},
        "reschedules": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["round", "agent", "reference"],
            "properties": {"round": {"type": "integer", "minimum": 0},
                           "agent": {"type": "integer", "minimum": 0},
                           "reference": _vector}}},
        "initial_states": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "x": {"type": "array", "items": {"oneOf": [_vector, {"type": "null"}]}},
                "xi": _vectors,
                "lambda": _vectors,
                "random": {"type": "object", "additionalProperties": False,
                           "properties": {"scale": {"type": "number", "exclusiveMinimum": 0}}},
            },
        },
        "synthesis": {
            "type": "object", "additionalProperties": False,
            "properties": {"state_weight": {"type": "number", "exclusiveMinimum": 0},
                           "input_weight": {"type": "number", "exclusiveMinimum": 0}},
        },
    },
}


class ScenarioFormatError(ValueError):
    """The file is not valid JSON or does not match the scenario schema."""


def load_document(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno - 1 < len(text.splitlines()) else ""
        raise ScenarioFormatError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line.strip()}") from exc
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioFormatError(f"{path}: at {where}: {exc.message}") from exc
    return doc


def scenario_from_dict(doc: dict, seed: int | None = None, stride: int | None = None) -> Scenario:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioFormatError(f"at {where}: {exc.message}") from exc
    agents = []
    for a in doc["agents"]:
        if a == "single_integrator":
            agents.append(AgentSpec())
        else:
            try:
                dyn = AgentDynamics(a["A"], a["B"], a["C"])
            except ValueError as exc:
                raise ScenarioFormatError(f"agent {len(agents)}: {exc}") from exc
            k = np.array(a["K"], dtype=float) if "K" in a else None
            agents.append(AgentSpec(dyn, k))
    n = len(agents)
    try:
        topology = Topology(n, [tuple(e) for e in doc["topology"]["edges"]])
        costs = CostSet.from_references(doc["references"])
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc
    q = costs.dim

    init = doc.get("initial_states", {})
    x0 = xi0 = lam0 = None
    if "random" in init:
        if set(init) != {"random"}:
            raise ScenarioFormatError("initial_states.random cannot be combined with explicit states")
        scale = init["random"].get("scale", 10.0)
        rng = np.random.default_rng(seed)
        x0 = tuple(None if s.is_single_integrator else rng.uniform(-scale, scale, s.dynamics.n)
                   for s in agents)
        xi0 = rng.uniform(-scale, scale, (n, q))
        lam0 = rng.uniform(-scale, scale, (n, q))
        # zero column sums keep the multipliers on the saddle's invariant set
        lam0 -= lam0.mean(axis=0)
    else:
        if "x" in init:
            if len(init["x"]) != n:
                raise ScenarioFormatError(f"initial_states.x needs {n} entries")
            x0 = tuple(None if v is None else np.array(v, dtype=float) for v in init["x"])
            for i, s in enumerate(agents):
                if s.is_single_integrator and x0[i] is not None:
                    raise ScenarioFormatError(
                        f"agent {i} is a single integrator; give its start in initial_states.xi")
        for key in ("xi", "lambda"):
            if key in init:
                arr = np.array(init[key], dtype=float)
                if arr.shape != (n, q):
                    raise ScenarioFormatError(f"initial_states.{key} must be {n}x{q}, got {arr.shape}")
                if key == "xi":
                    xi0 = arr
                else:
                    lam0 = arr

    synth = doc.get("synthesis", {})
    return Scenario(
        topology=topology,
        costs=costs,
        agents=tuple(agents),
        beta=float(doc["beta"]),
        horizon=int(doc["horizon"]),
        record_stride=int(stride if stride is not None else doc.get("record_stride", 1)),
        reschedules=tuple(Reschedule(int(r["round"]), int(r["agent"]), tuple(map(float, r["reference"])))
                          for r in doc.get("reschedules", [])),
        x0=x0, xi0=xi0, lambda0=lam0,
        state_weight=float(synth.get("state_weight", 1.0)),
        input_weight=float(synth.get("input_weight", 1.0)),
        name=doc.get("name", "scenario"),
    )


def load_scenario(path, seed: int | None = None, stride: int | None = None) -> Scenario:
    doc = load_document(path)
    sc = scenario_from_dict(doc, seed=seed, stride=stride)
    if sc.name == "scenario":
        object.__setattr__(sc, "name", Path(path).stem)
    return sc


def shipped_scenario_path(name: str) -> Path:
    """Path of a scenario bundled with the package, e.g. ``"case_a"``."""
    from importlib.resources import files
    return Path(str(files("optcoord") / "scenarios" / f"{name}.json"))


SHIPPED = ("case_a", "case_b", "single_integrator_pair", "mixed")
