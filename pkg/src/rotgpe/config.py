"""Flat key-value run configuration: parse, validate, serialize, fingerprint.

File format: one "section.key = value" per line, '#' comments, blank lines
ignored. Unknown keys are rejected by name. Serialization is canonical
(sorted keys), so parse -> serialize -> parse is the identity and the
fingerprint is stable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dc_field

from . import field as field_mod


class ConfigError(ValueError):
    pass


def _parse_bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes", "on"):
        return True
    if s.lower() in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_floats(s: str):
    return tuple(float(x) for x in s.replace(",", " ").split())


# key -> (parser, default)
_SCHEMA = {
    "run.scenario": (str, "default"),
    "run.model": (str, "gauged_u"),
    "run.seed": (int, 0),
    "run.outdir": (str, "out"),
    "run.dt": (float, 1e-3),
    "run.t_final": (float, 1.0),
    "run.snapshot_stride": (int, 50),
    "run.save_fields": (_parse_bool, False),
    "physics.epsilon": (float, 1.0),
    "physics.omega1": (float, 0.3),
    "physics.omega2": (float, 0.2),
    "physics.omegaz": (float, 0.4),
    "physics.coupling": (float, 1.0),
    "physics.sigma": (float, 1.0),
    "grid.n1": (int, 128),
    "grid.n2": (int, 128),
    "grid.box1": (float, 12.0),
    "grid.box2": (float, 12.0),
    "grid.n_hermite": (int, 32),
    "grid.nz_fourier": (int, 64),
    "grid.boxz": (float, 12.0),
    "averaging.n_theta": (int, 0),
    "converge.epsilons": (_parse_floats, (0.2, 0.1, 0.05, 0.025)),
    "converge.corrected_data": (_parse_bool, False),
    "converge.dt_limit": (float, 0.0),
    "converge.snapshot_dt": (float, 0.05),
    "converge.n_theta_limit": (int, 0),
}


@dataclass
class RunConfig:
    values: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        full = {k: d for k, (_, d) in _SCHEMA.items()}
        for k in self.values:
            if k not in _SCHEMA:
                raise ConfigError(f"unknown configuration key: {k!r}")
        full.update(self.values)
        self.values = full
        self.sim_params()   # surface SimParams validation errors early

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key: str, raw: str) -> None:
        if key not in _SCHEMA:
            raise ConfigError(f"unknown configuration key: {key!r}")
        parser = _SCHEMA[key][0]
        try:
            self.values[key] = parser(raw)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
        self.sim_params()

    def sim_params(self) -> field_mod.SimParams:
        v = self.values
        try:
            return field_mod.SimParams(
                epsilon=v["physics.epsilon"],
                omega=(v["physics.omega1"], v["physics.omega2"], v["physics.omegaz"]),
                coupling=v["physics.coupling"], sigma=v["physics.sigma"],
                dt=v["run.dt"], t_final=v["run.t_final"], model=v["run.model"],
                n1=v["grid.n1"], n2=v["grid.n2"],
                box1=v["grid.box1"], box2=v["grid.box2"],
                n_hermite=v["grid.n_hermite"], nz_fourier=v["grid.nz_fourier"],
                boxz=v["grid.boxz"], n_theta=v["averaging.n_theta"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def serialize(self) -> str:
        lines = []
        for k in sorted(self.values):
            v = self.values[k]
            if isinstance(v, tuple):
                v = " ".join(f"{x:g}" for x in v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown configuration key: {key!r}")
        parser = _SCHEMA[key][0]
        try:
            values[key] = parser(val)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(
                f"line {lineno}: bad value for {key!r}: {val!r} ({exc})") from exc
    return RunConfig(values)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
