"""Scenario files: one YAML or JSON document describing a simulation.

Example (schema version 1)::

    version: 1
    name: honest-demo
    population: {n_init: 100, c: 10, seed: 7}
    protocol: {s: 10, alpha: "1.3", n_min: 100, variant: client-centric}
    strategies:
      - {name: honest}
    trials: 1
    seed: 0
    engine: auto
    etas: [0.1, 0.2, 0.3]
    transcripts: 1

Outputs written by :func:`write_outputs`: report.json, x_hist.csv,
exceedance.csv, bytes.csv and transcript.jsonl.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml

from .._manifest import RunManifest, csv_text
from .._util import as_fraction, frac_text
from ..bounds import BoundParams
from ..protocol import ProtocolConfig, RoundTranscript, ServerBehavior, derive_seed
from .adversary import StrategyKind, make_strategy
from .harness import (
    BoundCheck,
    MonteCarloReport,
    PopulationSpec,
    compare_to_bound,
    run_campaign,
    run_round,
)

SCHEMA_VERSION = 1

_number = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^[0-9]+(\.[0-9]+)?(/[0-9]+)?$"}]}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["version", "population", "protocol"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "population": {
            "type": "object",
            "required": ["n_init"],
            "additionalProperties": False,
            "properties": {
                "n_init": {"type": "integer", "minimum": 1},
                "c": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "zipf_a": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "protocol": {
            "type": "object",
            "required": ["s", "alpha", "n_min"],
            "additionalProperties": False,
            "properties": {
                "s": {"type": "integer", "minimum": 1},
                "alpha": _number,
                "n_min": {"type": "integer", "minimum": 1},
                "timeout_l": {"type": "integer", "minimum": 0},
                "variant": {"enum": ["client-centric", "server-centric"]},
                "round": {"type": "integer", "minimum": 0},
            },
        },
        "strategies": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"enum": [k.value for k in StrategyKind]},
                    "params": {"type": "object"},
                },
            },
        },
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "engine": {"enum": ["auto", "fast", "protocol"]},
        "etas": {"type": "array", "items": _number},
        "transcripts": {"type": "integer", "minimum": 0},
    },
}


class ScenarioError(ValueError):
    """The scenario document is malformed or inconsistent."""


@dataclass
class Scenario:
    name: str
    population: PopulationSpec
    config: ProtocolConfig
    strategies: list[ServerBehavior]
    trials: int = 1
    seed: int = 0
    engine: str = "auto"
    etas: list = field(default_factory=lambda: [as_fraction("0.1"), as_fraction("0.2"), as_fraction("0.3")])
    transcripts: int = 1
    raw: dict = field(default_factory=dict)


def parse_scenario(doc: dict, seed_override: int | None = None) -> Scenario:
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{path}: {exc.message}") from None
    p, c = doc["population"], doc["protocol"]
    try:
        pop = PopulationSpec(p["n_init"], p.get("c", 0), p.get("seed", 0), p.get("zipf_a", 1.2))
        cfg = ProtocolConfig(
            s=c["s"],
            alpha=as_fraction(c["alpha"]),
            n_min=c["n_min"],
            timeout_l=c.get("timeout_l", 0),
            variant=c.get("variant", "client-centric"),
            round_r=c.get("round", 0),
        )
        strategies = [make_strategy(s["name"], **s.get("params", {})) for s in doc.get("strategies", [{"name": "honest"}])]
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from None
    names = [s.name for s in strategies]
    if len(set(names)) != len(names):
        raise ScenarioError("each strategy may appear once per scenario")
    return Scenario(
        name=doc.get("name", "scenario"),
        population=pop,
        config=cfg,
        strategies=strategies,
        trials=doc.get("trials", 1),
        seed=doc.get("seed", 0) if seed_override is None else seed_override,
        engine=doc.get("engine", "auto"),
        etas=[as_fraction(e) for e in doc.get("etas", ["0.1", "0.2", "0.3"])],
        transcripts=doc.get("transcripts", 1),
        raw=doc,
    )


def load_scenario(path: str | Path, seed_override: int | None = None) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping")
    return parse_scenario(doc, seed_override)


@dataclass
class ScenarioResult:
    scenario: Scenario
    reports: dict[str, MonteCarloReport]
    checks: dict[str, list[BoundCheck]]
    transcripts: list[RoundTranscript]

    @property
    def bounds_ok(self) -> bool:
        return all(chk.passed for rows in self.checks.values() for chk in rows)


def run_scenario(sc: Scenario) -> ScenarioResult:
    reports = run_campaign(sc.population, sc.config, sc.strategies, sc.trials, sc.seed, sc.engine)
    checks: dict[str, list[BoundCheck]] = {}
    try:
        params = BoundParams(n_min=sc.config.n_min, c=sc.population.c, s=sc.config.s, alpha=sc.config.alpha)
    except ValueError:
        params = None
    if params is not None and sc.etas:
        for name, rep in reports.items():
            checks[name] = compare_to_bound(rep, params, sc.etas)
    # replay the first trials in full to record transcripts; trial i uses the
    # same round index and seed as the campaign
    transcripts = []
    for i in range(min(sc.transcripts, sc.trials)):
        cfg = sc.config.for_round(sc.config.round_r + i)
        for strat in sc.strategies:
            transcripts.append(run_round(sc.population, cfg, strat, derive_seed(sc.seed, i)).transcript)
    return ScenarioResult(sc, reports, checks, transcripts)


OUTPUT_FILES = ("report.json", "x_hist.csv", "exceedance.csv", "bytes.csv", "transcript.jsonl")


def scenario_manifest(sc: Scenario, outputs=OUTPUT_FILES) -> RunManifest:
    return RunManifest("simulate", sc.raw, seed=sc.seed, outputs=list(outputs))


def write_outputs(result: ScenarioResult, out_dir: str | Path) -> list[Path]:
    sc = result.scenario
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = scenario_manifest(sc)
    report = {
        "manifest": man.to_dict(),
        "reports": {name: rep.summary() for name, rep in result.reports.items()},
        "bounds": {name: [c.row() for c in rows] for name, rows in result.checks.items()},
        "bounds_ok": result.bounds_ok,
    }
    paths = []

    def put(name, text):
        p = out / name
        p.write_text(text)
        paths.append(p)

    put("report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")

    rows = []
    for name, rep in result.reports.items():
        for x in sorted(rep.x_hist):
            rows.append([name, x, rep.x_hist[x], rep.x_hist[x] / rep.trials])
    put("x_hist.csv", csv_text(man, ["strategy", "x", "count", "frequency"], rows))

    rows = []
    for name, chks in result.checks.items():
        for c in chks:
            rows.append([name, frac_text(c.eta), c.threshold, c.exceed, c.empirical, c.bound, c.allowance, int(c.passed)])
    put(
        "exceedance.csv",
        csv_text(man, ["strategy", "eta", "k", "exceed_count", "empirical", "bound", "allowance", "pass"], rows),
    )

    rows = []
    for name, rep in result.reports.items():
        if rep.bytes is None:
            continue
        for r in rep.bytes.rows():
            rows.append([name, r["role"], r["stage"], r["total_bytes"], float(r["per_round"]), int(rep.bytes.modeled)])
    put("bytes.csv", csv_text(man, ["strategy", "role", "stage", "total_bytes", "per_round", "modeled"], rows))

    lines = [man.line()] + [tr.to_jsonl() for tr in result.transcripts]
    put("transcript.jsonl", "\n".join(lines) + "\n")
    return paths
