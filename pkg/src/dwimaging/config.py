"""Scenario files: YAML with a fixed schema. Unknown keys are rejected."""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .expansion import SpatialGrid, WavepacketFamily
from .hilbert import CoherentParams, TwoModeState, coherent_state, fock_state
from .imaging import ConfigurationError, RunConfig
from .trap import TrapParams, evolve_in_trap, ground_state

STATE_KEYS = {
    "fock": {"kind", "N", "k"},
    "coherent": {"kind", "N", "xi", "phi"},
    "ground": {"kind", "N", "trap", "evolve_time"},
}


@dataclass
class StateSpec:
    kind: str
    N: int
    k: int | None = None
    xi: float | None = None
    phi: float = 0.0
    trap: TrapParams | None = None
    evolve_time: float = 0.0

    def build(self) -> TwoModeState:
        if self.kind == "fock":
            return fock_state(self.N, self.k)
        if self.kind == "coherent":
            return coherent_state(self.N, CoherentParams(self.xi, self.phi))
        state = ground_state(self.N, self.trap)
        if self.evolve_time:
            state = evolve_in_trap(state, self.trap, self.evolve_time)
        return state

    def echo(self) -> dict:
        out = {"kind": self.kind, "N": self.N}
        if self.kind == "fock":
            out["k"] = self.k
        elif self.kind == "coherent":
            out.update(xi=self.xi, phi=self.phi)
        else:
            out["trap"] = _asdict(self.trap)
            out["evolve_time"] = self.evolve_time
        return out


@dataclass
class ScenarioConfig:
    state: StateSpec
    family: WavepacketFamily = field(default_factory=WavepacketFamily)
    grid: SpatialGrid = field(default_factory=SpatialGrid)
    t: float = 30.0
    run: RunConfig = field(default_factory=RunConfig)
    shot: CoherentParams | None = None
    quadrature: tuple[int, int] | None = None
    output: str | None = None

    def echo(self) -> dict:
        """Config as written to summary.json (output location excluded)."""
        run = {f.name: getattr(self.run, f.name) for f in fields(RunConfig)
               if f.name not in ("grid", "t")}
        run["sampler_resolution"] = list(run["sampler_resolution"])
        return {
            "state": self.state.echo(),
            "family": _asdict(self.family),
            "grid": _asdict(self.grid),
            "t": self.t,
            "run": run,
            "shot": None if self.shot is None else _asdict(self.shot),
            "quadrature": None if self.quadrature is None else list(self.quadrature),
        }


def _asdict(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


def _check_keys(section: str, given: dict, allowed) -> None:
    if not isinstance(given, dict):
        raise ConfigurationError(f"section {section!r} must be a mapping")
    extra = sorted(set(given) - set(allowed))
    if extra:
        raise ConfigurationError(f"unknown key(s) in {section!r}: {', '.join(map(str, extra))}")


def _build(cls, section: str, raw: dict, **extra):
    _check_keys(section, raw, [f.name for f in fields(cls) if f.init])
    try:
        return cls(**raw, **extra)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid {section!r}: {exc}") from exc


def _int(section: str, name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{section}.{name} must be an integer, got {value!r}")
    return value


def parse_state(raw: dict) -> StateSpec:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigurationError("state needs a 'kind' (fock, coherent or ground)")
    kind = raw["kind"]
    if kind not in STATE_KEYS:
        raise ConfigurationError(f"unknown state kind {kind!r}")
    _check_keys("state", raw, STATE_KEYS[kind])
    if "N" not in raw:
        raise ConfigurationError("state.N is required")
    N = _int("state", "N", raw["N"])
    if N < 0:
        raise ConfigurationError("state.N must be >= 0")
    if kind == "fock":
        k = _int("state", "k", raw.get("k"))
        if not 0 <= k <= N:
            raise ConfigurationError(f"state.k={k} outside 0..{N}")
        return StateSpec(kind, N, k=k)
    if kind == "coherent":
        try:
            CoherentParams(raw["xi"], raw.get("phi", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid coherent state: {exc}") from exc
        return StateSpec(kind, N, xi=float(raw["xi"]), phi=float(raw.get("phi", 0.0)))
    trap = _build(TrapParams, "state.trap", raw.get("trap", {}))
    return StateSpec(kind, N, trap=trap, evolve_time=float(raw.get("evolve_time", 0.0)))


TOP_KEYS = {"state", "family", "grid", "t", "run", "shot", "quadrature", "output"}
QUAD_KEYS = {"xi_order", "phi_order"}


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a mapping at top level")
    _check_keys("<top>", raw, TOP_KEYS)
    if "state" not in raw:
        raise ConfigurationError("config needs a 'state' section")
    state = parse_state(raw["state"])
    family = _build(WavepacketFamily, "family", raw.get("family", {}))
    grid = _build(SpatialGrid, "grid", raw.get("grid", {}))
    t = raw.get("t", 30.0)
    if isinstance(t, bool) or not isinstance(t, (int, float)) or t < 0:
        raise ConfigurationError(f"t must be a nonnegative number, got {t!r}")
    run_raw = dict(raw.get("run", {}))
    _check_keys("run", run_raw, {"n_shots", "master_seed", "keep_profiles", "sampler",
                                 "sampler_resolution", "noise_sigma"})
    if "sampler_resolution" in run_raw:
        res = run_raw["sampler_resolution"]
        if not (isinstance(res, (list, tuple)) and len(res) == 2):
            raise ConfigurationError("run.sampler_resolution must be [n_xi, n_phi]")
        run_raw["sampler_resolution"] = tuple(_int("run", "sampler_resolution", r) for r in res)
    for key in ("n_shots", "master_seed"):
        if key in run_raw:
            _int("run", key, run_raw[key])
    run = _build(RunConfig, "run", run_raw, grid=grid, t=float(t))
    shot = None
    if raw.get("shot") is not None:
        shot = _build(CoherentParams, "shot", raw["shot"])
    quad = None
    if raw.get("quadrature") is not None:
        q = raw["quadrature"]
        _check_keys("quadrature", q, QUAD_KEYS)
        if set(q) != QUAD_KEYS:
            raise ConfigurationError("quadrature needs both xi_order and phi_order")
        quad = (_int("quadrature", "xi_order", q["xi_order"]),
                _int("quadrature", "phi_order", q["phi_order"]))
        if min(quad) < 1:
            raise ConfigurationError("quadrature orders must be >= 1")
    output = raw.get("output")
    return ScenarioConfig(state, family, grid, float(t), run, shot, quad, output)


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    return parse_config(raw)
