"""Scenario files: TOML in, fully resolved and validated inputs out.

Paths inside a scenario are relative to the scenario file.  Every section
is optional; omitted values fall back to the documented defaults (the
four-stage charger chain, 0.95 nominal / 0.88 degraded availability, an
attack window around hour 4380).  Unknown keys are rejected so typos do not
silently fall back to defaults.
"""
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attack_graph import DEFAULT_TARGET, AttackEdge, AttackNode, build_graph, default_av2g_chain
from .errors import CyberAdequacyError, ScenarioError
from .fleet import Fleet, GeneratorUnit, load_fleet, load_profile, synth_profile
from .montecarlo import LOLE_METHODS, CyberScenario, McConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_SECTIONS = {
    "label": None,
    "description": None,
    "fleet": {"path"},
    "load": {"path", "annual_peak", "base_fraction", "peak_hour"},
    "attack": {"target", "node", "edge"},
    "cyber": {"enabled", "delta", "window_start", "window_hours", "degraded_availability",
              "nominal_availability"},
    "copt": {"rounding"},
    "mc": {"replications", "seed", "lole_method"},
    "output": {"dir"},
}
_NODE_KEYS = {"id", "label", "prior"}
_EDGE_KEYS = {"parent", "child", "cond_prob"}

DEFAULT_REPLICATIONS = 1000
DEFAULT_SYNTH = {"annual_peak": 1600.0, "base_fraction": 0.6, "peak_hour": 4380}


@dataclass(frozen=True, eq=False)
class Scenario:
    """A resolved scenario; every field already validated."""

    label: str
    source: str
    fleet: Fleet
    load_spec: dict
    profile: object
    graph: object
    target: str
    cyber: CyberScenario
    rounding: float
    mc: McConfig
    lole_method: str
    output_dir: str

    def resolved(self):
        """JSON-ready description of every input that affects results."""
        return {
            "label": self.label,
            "fleet": [[u.id, u.capacity, u.forced_outage_rate, int(u.cyber_exposed)] for u in self.fleet],
            "load": self.load_spec,
            "attack": {
                "target": self.target,
                "nodes": [{"id": n.id, "label": n.label, "prior": n.prior} for n in self.graph.nodes],
                "edges": [{"parent": e.parent, "child": e.child, "cond_prob": e.cond_prob}
                          for e in self.graph.edges],
            },
            "cyber": {
                "enabled": self.cyber.active,
                "delta": self.cyber.delta,
                "window_start": self.cyber.window_start,
                "window_hours": self.cyber.window_hours,
                "degraded_availability": self.cyber.degraded_availability,
                "nominal_availability": self.cyber.nominal_availability,
            },
            "copt": {"rounding": self.rounding},
            "mc": {"replications": self.mc.replications, "seed": self.mc.seed,
                   "lole_method": self.lole_method},
        }

    @property
    def hash(self):
        return scenario_hash(self.resolved())

    def no_attack(self):
        """The same scenario's cyber settings with the attack switched off."""
        return CyberScenario.no_attack(delta=0.0, nominal_availability=self.cyber.nominal_availability)


def scenario_hash(resolved):
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def profile_digest(profile):
    return hashlib.sha256(np.ascontiguousarray(profile.hourly_load, dtype="<f8").tobytes()).hexdigest()


def _table(doc, name, path):
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ScenarioError(path, "must be a table", section=name)
    allowed = _SECTIONS[name]
    for key in value:
        if key not in allowed:
            raise ScenarioError(path, f"unknown key {key!r}", section=name, field=key)
    return value


def _number(path, section, key, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}", section=section, field=key)
    if kind is int and int(value) != value:
        raise ScenarioError(path, f"expected an integer, got {value!r}", section=section, field=key)
    return kind(value)


def _resolve_path(base, p):
    p = Path(p)
    return p if p.is_absolute() else (base / p)


def _build_graph(path, attack):
    raw_nodes = attack.get("node")
    raw_edges = attack.get("edge", [])
    if raw_nodes is None:
        if raw_edges:
            raise ScenarioError(path, "edges given without nodes", section="attack", field="edge")
        return default_av2g_chain()
    nodes, edges = [], []
    try:
        for i, n in enumerate(raw_nodes):
            extra = set(n) - _NODE_KEYS
            if extra:
                raise ScenarioError(path, f"unknown key(s) {sorted(extra)} in node #{i + 1}",
                                    section="attack.node", field=sorted(extra)[0])
            if "id" not in n:
                raise ScenarioError(path, f"node #{i + 1} has no id", section="attack.node", field="id")
            nodes.append(AttackNode(n["id"], n.get("label", ""), n.get("prior", 0.0)))
        for i, e in enumerate(raw_edges):
            extra = set(e) - _EDGE_KEYS
            missing = _EDGE_KEYS - set(e)
            if extra or missing:
                bad = sorted(extra or missing)
                raise ScenarioError(path, f"edge #{i + 1}: {'unknown' if extra else 'missing'} key(s) {bad}",
                                    section="attack.edge", field=bad[0])
            edges.append(AttackEdge(e["parent"], e["child"], e["cond_prob"]))
        return build_graph(nodes, edges)
    except ScenarioError:
        raise
    except CyberAdequacyError as exc:
        raise ScenarioError(path, str(exc), section="attack") from exc


def parse_scenario(path, overrides=None):
    """Read, resolve and validate a scenario file.

    :param overrides: optional dict with ``seed``, ``replications`` and/or
        ``out`` replacing the file's values
    :raises ScenarioError: any parse or validation failure, naming the file,
        section and field
    """
    path = Path(path)
    overrides = overrides or {}
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ScenarioError(path, "scenario file not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(path, f"invalid TOML: {exc}") from None
    except OSError as exc:
        raise ScenarioError(path, f"cannot read scenario: {exc}") from None

    for key in doc:
        if key not in _SECTIONS:
            raise ScenarioError(path, f"unknown section {key!r}", section=key)
    base = path.parent
    label = doc.get("label", path.stem)
    if not isinstance(label, str) or not label:
        raise ScenarioError(path, "label must be a nonempty string", field="label")

    # fleet
    fleet_sec = _table(doc, "fleet", path)
    if "path" not in fleet_sec:
        raise ScenarioError(path, "a fleet file is required", section="fleet", field="path")
    fleet_path = _resolve_path(base, fleet_sec["path"])
    if not fleet_path.is_file():
        raise ScenarioError(path, f"fleet file not found: {fleet_path}", section="fleet", field="path")
    try:
        fleet = load_fleet(fleet_path)
    except CyberAdequacyError as exc:
        raise ScenarioError(path, f"{fleet_path}: {exc}", section="fleet", field="path") from exc

    # load
    load_sec = _table(doc, "load", path)
    try:
        if "path" in load_sec:
            if set(load_sec) != {"path"}:
                raise ScenarioError(path, "give either a load file or synthetic parameters, not both",
                                    section="load")
            load_path = _resolve_path(base, load_sec["path"])
            if not load_path.is_file():
                raise ScenarioError(path, f"load file not found: {load_path}", section="load", field="path")
            profile = load_profile(load_path)
            load_spec = {"kind": "file", "sha256": profile_digest(profile)}
        else:
            params = dict(DEFAULT_SYNTH)
            for key in ("annual_peak", "base_fraction"):
                if key in load_sec:
                    params[key] = _number(path, "load", key, load_sec[key])
            if "peak_hour" in load_sec:
                params["peak_hour"] = _number(path, "load", "peak_hour", load_sec["peak_hour"], int)
            profile = synth_profile(**params)
            load_spec = {"kind": "synth", **params}
    except ScenarioError:
        raise
    except CyberAdequacyError as exc:
        raise ScenarioError(path, str(exc), section="load") from exc

    # attack graph
    attack = _table(doc, "attack", path)
    graph = _build_graph(path, attack)
    target = attack.get("target", DEFAULT_TARGET if "node" not in attack else graph.topological_order[-1])
    if target not in graph:
        raise ScenarioError(path, f"unknown target node {target!r}", section="attack", field="target")

    # cyber
    cyber_sec = _table(doc, "cyber", path)
    enabled = cyber_sec.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ScenarioError(path, "expected true or false", section="cyber", field="enabled")
    kwargs = {}
    for key in ("delta", "degraded_availability", "nominal_availability"):
        if key in cyber_sec:
            kwargs[key] = _number(path, "cyber", key, cyber_sec[key])
    for key in ("window_start", "window_hours"):
        if key in cyber_sec:
            kwargs[key] = _number(path, "cyber", key, cyber_sec[key], int)
    try:
        cyber = CyberScenario(active=enabled, **kwargs)
    except CyberAdequacyError as exc:
        raise ScenarioError(path, str(exc), section="cyber") from exc

    # copt
    copt_sec = _table(doc, "copt", path)
    rounding = _number(path, "copt", "rounding", copt_sec.get("rounding", 0.0))
    if rounding < 0:
        raise ScenarioError(path, "rounding must be >= 0 (0 = exact)", section="copt", field="rounding")

    # monte carlo
    mc_sec = _table(doc, "mc", path)
    replications = overrides.get("replications") or _number(
        path, "mc", "replications", mc_sec.get("replications", DEFAULT_REPLICATIONS), int)
    seed = overrides.get("seed")
    if seed is None:
        seed = _number(path, "mc", "seed", mc_sec.get("seed", 0), int)
    method = mc_sec.get("lole_method", "daily_peak")
    if method not in LOLE_METHODS:
        raise ScenarioError(path, f"must be one of {list(LOLE_METHODS)}", section="mc", field="lole_method")
    try:
        mc = McConfig(replications=replications, seed=seed)
    except CyberAdequacyError as exc:
        raise ScenarioError(path, str(exc), section="mc") from exc

    out_sec = _table(doc, "output", path)
    if overrides.get("out"):
        out = overrides["out"]
    elif "dir" in out_sec:
        out = _resolve_path(base, out_sec["dir"])
    else:
        out = os.path.join("out", label)

    return Scenario(
        label=label,
        source=str(path),
        fleet=fleet,
        load_spec=load_spec,
        profile=profile,
        graph=graph,
        target=target,
        cyber=cyber,
        rounding=rounding,
        mc=mc,
        lole_method=method,
        output_dir=str(out),
    )


def scenario_from_resolved(resolved, base_dir, output_dir=None):
    """Rebuild a :class:`Scenario` from the JSON embedded in a report bundle."""
    base_dir = Path(base_dir)
    fleet = Fleet(tuple(GeneratorUnit(uid, cap, q, bool(exp)) for uid, cap, q, exp in resolved["fleet"]))
    load_spec = dict(resolved["load"])
    if load_spec["kind"] == "synth":
        profile = synth_profile(load_spec["annual_peak"], load_spec["base_fraction"], load_spec["peak_hour"])
    else:
        profile = load_profile(base_dir / "load_profile.txt")
        if profile_digest(profile) != load_spec["sha256"]:
            raise ScenarioError(base_dir, "embedded load profile does not match its digest", section="load")
    att = resolved["attack"]
    graph = build_graph([AttackNode(n["id"], n["label"], n["prior"]) for n in att["nodes"]],
                        [AttackEdge(e["parent"], e["child"], e["cond_prob"]) for e in att["edges"]])
    cy = resolved["cyber"]
    cyber = CyberScenario(delta=cy["delta"], window_start=cy["window_start"], window_hours=cy["window_hours"],
                          degraded_availability=cy["degraded_availability"],
                          nominal_availability=cy["nominal_availability"], active=cy["enabled"])
    mc = resolved["mc"]
    return Scenario(
        label=resolved["label"],
        source=str(base_dir / "resolved_scenario.json"),
        fleet=fleet,
        load_spec=load_spec,
        profile=profile,
        graph=graph,
        target=att["target"],
        cyber=cyber,
        rounding=resolved["copt"]["rounding"],
        mc=McConfig(replications=mc["replications"], seed=mc["seed"]),
        lole_method=mc["lole_method"],
        output_dir=str(output_dir or base_dir),
    )
