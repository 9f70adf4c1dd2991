"""Run configuration: a TOML file with one section per parameter block.

Exactly one of [bare] / [effective] must be present; a [bare] block triggers
effective-parameter derivation through the perturbation engine before the
model is built. All frequencies are angular (rad/us); time is microseconds.

Example:

    scenario = "fig2_odd"          # preset; "custom" uses only this file

    [effective]
    chi1 = 4.04
    chi2 = 4.04

    [measurement]
    epsilon = 1.4                  # drive amplitude (rad/us)
    kappa = 2.0                    # resonator decay (rad/us)
    eta = 0.7                      # detector efficiency
    gamma = 0.02                   # base bit-flip rate; gamma_1 = 2 gamma

    [protocol]
    encoding = "odd"
    theta_u_frac = 0.1
    theta_l_frac = 0.9

    [sim]
    dt = 0.001
    t_final = 30.0
    seed = 1234
    record_stride = 20
    n_max = 12
    order = "second"

    [run]
    n_trajectories = 100
    output_dir = "out"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .models import (
    BareParams,
    EffectiveParams,
    Encoding,
    MeasurementParams,
    ModelError,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "serialize_config"]

SCENARIOS = (
    "fig1b_steady_states",
    "fig1c_flip_movie",
    "fig2_odd",
    "fig2_even",
    "appB_coherence",
    "appC_meter_qubit",
    "custom",
)


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    scenario: str = "custom"
    bare: Optional[dict] = None
    effective: Optional[dict] = None
    measurement: dict = field(default_factory=dict)
    protocol: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; choose one of {SCENARIOS}"
            )
        if (self.bare is None) == (self.effective is None):
            raise ConfigError(
                "exactly one of the [bare] and [effective] blocks must be present"
            )
        if int(self.run.get("n_trajectories", 1)) < 1:
            raise ConfigError("n_trajectories must be >= 1")
        return self

    # -- typed views -------------------------------------------------------

    def bare_params(self) -> Optional[BareParams]:
        if self.bare is None:
            return None
        try:
            return BareParams(**self.bare)
        except (TypeError, ModelError) as exc:
            raise ConfigError(f"[bare] block invalid: {exc}") from exc

    def effective_params(self) -> Optional[EffectiveParams]:
        if self.effective is None:
            return None
        try:
            return EffectiveParams(**self.effective)
        except (TypeError, ModelError) as exc:
            raise ConfigError(f"[effective] block invalid: {exc}") from exc

    def measurement_params(self) -> MeasurementParams:
        fields = dict(self.measurement)
        g1 = fields.pop("gamma1", None)
        g2 = fields.pop("gamma2", None)
        if g1 is not None or g2 is not None:
            fields["gamma_q"] = (float(g1 or 0.0), float(g2 or 0.0))
        try:
            return MeasurementParams(**fields)
        except (TypeError, ModelError) as exc:
            raise ConfigError(f"[measurement] block invalid: {exc}") from exc

    def encoding(self) -> Encoding:
        return Encoding(self.protocol.get("encoding", "odd"))

    def as_dict(self) -> dict:
        out: dict = {"scenario": self.scenario}
        for name in ("bare", "effective", "measurement", "protocol", "sim", "run"):
            block = getattr(self, name)
            if block:
                out[name] = dict(block)
        return out


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc
    known = {"scenario", "bare", "effective", "measurement", "protocol", "sim", "run"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config sections/keys: {sorted(unknown)}")
    cfg = RunConfig(
        scenario=data.get("scenario", "custom"),
        bare=data.get("bare"),
        effective=data.get("effective"),
        measurement=data.get("measurement", {}),
        protocol=data.get("protocol", {}),
        sim=data.get("sim", {}),
        run=data.get("run", {}),
    )
    return cfg.validate()


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize config value {v!r}")


def serialize_config(cfg: RunConfig) -> str:
    """Emit the canonical TOML form; parse(serialize(parse(x))) == parse(x)."""
    lines = [f"scenario = {_toml_value(cfg.scenario)}"]
    for name in ("bare", "effective", "measurement", "protocol", "sim", "run"):
        block = getattr(cfg, name)
        if not block:
            continue
        lines.append("")
        lines.append(f"[{name}]")
        for key, value in block.items():
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"
