"""INI run configuration for the ``simulate`` command.

Every section is optional; missing keys take the defaults listed in
:data:`SCHEMA`.  Unknown sections or keys are rejected, and all problems are
reported together.  :meth:`RunConfig.to_ini` writes the fully resolved
configuration, which reproduces the same run when read back.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Any, Callable

from . import synthesis as syn
from .simcore import (
    ContactEnvironment,
    DiscreteController,
    HybridSupervisor,
    PlantParams,
    Scenario,
    trapezoid_breakpoints,
)


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


def _opt_float(text: str) -> float | None:
    return None if text.strip().lower() in ("none", "") else float(text)


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _pairs(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        t, sep, val = item.partition(":")
        if not sep:
            raise ValueError(f"expected t:value, got {item!r}")
        out.append((float(t), float(val)))
    return tuple(out)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        v = text.strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v

    return parse


def _fmt(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(f"{t!r}:{v!r}" for t, v in value)
    return str(value)


_DEFAULT_REFERENCE = trapezoid_breakpoints()

SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "plant": {
        "K": (float, syn.NOMINAL_K),
        "tau": (float, syn.NOMINAL_TAU),
        "D": (float, 0.0),
        "electrical_tau": (_opt_float, None),
        "coulomb_friction": (_opt_float, None),
        "input_delay": (_opt_float, None),
    },
    "controller_stiff": {
        "kp": (float, syn.PAPER_KP),
        "ki": (float, syn.PAPER_KI),
        "kd": (float, syn.PAPER_KD),
        "derivative_filter_cutoff": (float, syn.DEFAULT_DERIVATIVE_CUTOFF),
    },
    "controller_soft": {
        "kind": (_choice("none", "viscous", "viscoelastic"), "viscous"),
        "omega_c": (float, syn.DEFAULT_OMEGA_C),
        "kp": (float, syn.PAPER_KP),
        "sat_limit": (float, syn.RESHAPE_THRESHOLD),
        "error_reference": (_choice("track", "zero"), "track"),
    },
    "supervisor": {
        "threshold": (float, syn.RESHAPE_THRESHOLD),
        "debounce": (int, 5),
        "handoff": (_choice("zero_state", "output_match"), "output_match"),
        "latch": (_bool, True),
        "release_level": (_opt_float, None),
        "release_ticks": (int, 10_000),
    },
    "environment": {
        "enabled": (_bool, False),
        "surface_x": (float, 0.007),
        "beta_e": (float, 2000.0),
        "alpha_e": (float, 20.0),
        "yield_force": (_opt_float, 2.0),
        "direction": (int, -1),
        "t_on": (float, 4.0),
        "t_off": (_opt_float, None),
    },
    "scenario": {
        "reference": (_pairs, _DEFAULT_REFERENCE),
        "duration": (float, 16.0),
        "control_rate": (float, 10_000.0),
        "plant_substeps": (int, 10),
        "disturbance": (_pairs, ()),
        "x0": (_opt_float, None),
        "travel_bound": (float, 0.015),
    },
    "noise": {
        "sigma": (float, 5e-6),
        "seed": (int, 0),
    },
    "output": {
        "directory": (str, "."),
        "trace": (str, "trace.csv"),
        "summary": (str, "summary.txt"),
        "config_echo": (str, "config_resolved.ini"),
    },
}


@dataclass
class RunConfig:
    values: dict[str, dict[str, Any]]

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()})

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError([str(exc)]) from None
        cfg = cls.defaults()
        problems = []
        for section in parser.sections():
            if section not in SCHEMA:
                problems.append(f"unknown section [{section}]")
                continue
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    problems.append(f"[{section}] unknown key {key!r}")
                    continue
                conv = SCHEMA[section][key][0]
                try:
                    cfg.values[section][key] = conv(raw)
                except ValueError as exc:
                    problems.append(f"[{section}] {key}: {exc}")
        if not problems:
            problems = cfg._semantic_problems()
        if problems:
            raise ConfigError(problems)
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def _semantic_problems(self) -> list[str]:
        problems = []
        for label, build in (
            ("plant", self.plant),
            ("controller_stiff", self.stiff_gains),
            ("supervisor", self.supervisor),
            ("scenario", self.scenario),
        ):
            try:
                build()
            except (ValueError, TypeError) as exc:
                problems.append(f"[{label}] {exc}")
        return problems

    def to_ini(self) -> str:
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                lines.append(f"{key} = {_fmt(self.values[section][key])}")
            lines.append("")
        return "\n".join(lines)

    # -- builders ----------------------------------------------------------
    def plant(self) -> PlantParams:
        return PlantParams(**self.values["plant"])

    def stiff_gains(self) -> syn.PidGains:
        return syn.PidGains(**self.values["controller_stiff"])

    def environment(self) -> ContactEnvironment | None:
        env = self.values["environment"]
        if not env["enabled"]:
            return None
        return ContactEnvironment(env["surface_x"], env["beta_e"], env["alpha_e"], env["yield_force"], env["direction"])

    def scenario(self) -> Scenario:
        s = self.values["scenario"]
        env = self.environment()
        window = None
        if env is not None:
            t_off = self.values["environment"]["t_off"]
            window = (self.values["environment"]["t_on"], math.inf if t_off is None else t_off)
        return Scenario(
            breakpoints=s["reference"],
            duration=s["duration"],
            control_rate=s["control_rate"],
            plant_substeps=s["plant_substeps"],
            noise_sigma=self.values["noise"]["sigma"],
            rng_seed=self.values["noise"]["seed"],
            environment=env,
            contact_window=window,
            disturbance=s["disturbance"],
            x0=s["x0"],
            travel_bound=s["travel_bound"],
        )

    def supervisor(self) -> HybridSupervisor | None:
        if self.values["controller_soft"]["kind"] == "none":
            return None
        sv = self.values["supervisor"]
        return HybridSupervisor(soft_kind=self.values["controller_soft"]["kind"], **sv)

    def controllers(self) -> tuple[DiscreteController, DiscreteController | None]:
        Ts = 1.0 / self.values["scenario"]["control_rate"]
        stiff = DiscreteController.from_pid(self.stiff_gains(), Ts)
        soft_cfg = self.values["controller_soft"]
        if soft_cfg["kind"] == "none":
            return stiff, None
        spec = syn.ReshapeSpec(
            omega_c=soft_cfg["omega_c"],
            kp=soft_cfg["kp"],
            sat_limit=soft_cfg["sat_limit"],
            error_reference=soft_cfg["error_reference"],
        )
        return stiff, DiscreteController.from_soft(syn.make_experimental_soft(soft_cfg["kind"], spec), Ts)
