"""Hybrid time-domain simulation of the stage in contact with a soft object.

The plant ``tau*x'' + x' = K*(u + F)`` is integrated with fixed-step RK4
between control ticks; controllers run as Tustin difference equations at the
control rate.  A threshold supervisor swaps the stiff controller for a soft
one once ``|u|`` stays above ``U`` for a number of consecutive ticks.

Forces are expressed in control units (volts at the actuator input), since
the disturbance enters the same channel as ``u``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ratfun import RationalTF, discretize_tustin, tf_to_state_space
from .synthesis import RESHAPE_THRESHOLD, NOMINAL_K, NOMINAL_TAU, PidGains, SoftController, make_pid


class SimulationError(ArithmeticError):
    """Non-finite state or control value during a run."""


class Mode(enum.IntEnum):
    STIFF = 0
    SOFT = 1


# ---------------------------------------------------------------------------
# configuration values


@dataclass(frozen=True)
class PlantParams:
    K: float = NOMINAL_K
    tau: float = NOMINAL_TAU
    D: float = 0.0
    electrical_tau: float | None = None
    coulomb_friction: float | None = None
    input_delay: float | None = None
    friction_velocity: float = 1e-5  # tanh smoothing of the Coulomb sign

    def __post_init__(self):
        if not (self.K > 0 and self.tau > 0):
            raise ValueError("plant gain and time constant must be positive")
        for name in ("electrical_tau", "coulomb_friction", "input_delay"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class PlantState:
    x: float = 0.0
    v: float = 0.0
    current: float = 0.0  # lagged input, only used with electrical_tau


@dataclass(frozen=True)
class ContactEnvironment:
    """Unilateral Kelvin-Voigt object occupying one side of ``surface_x``.

    ``direction = +1`` means the object fills ``x > surface_x`` (the tool
    penetrates while moving in +x); ``-1`` the opposite side.
    """

    surface_x: float
    beta_e: float
    alpha_e: float = 0.0
    yield_force: float | None = None
    direction: int = 1

    def __post_init__(self):
        if self.beta_e < 0 or self.alpha_e < 0:
            raise ValueError("contact stiffness and damping must be non-negative")
        if self.beta_e == 0 and self.alpha_e == 0:
            raise ValueError("contact needs stiffness or damping")
        if self.yield_force is not None and not self.yield_force > 0:
            raise ValueError("yield force must be positive")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")


@dataclass(frozen=True)
class Scenario:
    breakpoints: tuple[tuple[float, float], ...]
    duration: float
    control_rate: float = 10_000.0
    plant_substeps: int = 10
    noise_sigma: float = 5e-6
    rng_seed: int = 0
    environment: ContactEnvironment | None = None
    contact_window: tuple[float, float] | None = None
    # piecewise-constant matched disturbance, (t_start, F) steps
    disturbance: tuple[tuple[float, float], ...] = ()
    x0: float | None = None
    travel_bound: float = 0.015

    def __post_init__(self):
        bp = tuple((float(t), float(r)) for t, r in self.breakpoints)
        if not bp:
            raise ValueError("reference needs at least one breakpoint")
        if any(later[0] < earlier[0] for earlier, later in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be time-sorted")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "disturbance", tuple((float(t), float(f)) for t, f in self.disturbance))
        if not self.control_rate > 0:
            raise ValueError("control rate must be positive")
        if self.plant_substeps < 1:
            raise ValueError("plant_substeps must be at least 1")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.noise_sigma < 0:
            raise ValueError("noise sigma must be non-negative")

    @property
    def Ts(self) -> float:
        return 1.0 / self.control_rate

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration * self.control_rate))

    def reference(self, t):
        ts, rs = zip(*self.breakpoints)
        return np.interp(t, ts, rs)

    def disturbance_at(self, t: float) -> float:
        f = 0.0
        for t0, value in self.disturbance:
            if t >= t0:
                f = value
        return f

    def contact_active(self, t: float) -> bool:
        if self.environment is None:
            return False
        if self.contact_window is None:
            return True
        t_on, t_off = self.contact_window
        return t_on <= t < t_off


@dataclass(slots=True)
class TraceRecord:
    t: float
    r: float
    x_true: float
    x_meas: float
    u: float
    v_input: float
    F_env: float
    mode: Mode
    sat_active: bool


TRACE_FIELDS = ("t", "r", "x_true", "x_meas", "u", "v_input", "F_env", "mode", "sat_active")


# ---------------------------------------------------------------------------
# contact


def contact_force(env: ContactEnvironment, x: float, xdot: float, surface_x: float | None = None) -> float:
    """Force exerted by the object on the tool (never pulling).

    ``surface_x`` overrides ``env.surface_x`` once plastic flow has moved it.
    """
    surf = env.surface_x if surface_x is None else surface_x
    d = env.direction
    pen = d * (x - surf)
    if pen <= 0.0:
        return 0.0
    raw = env.beta_e * pen + env.alpha_e * d * xdot
    if raw <= 0.0:
        return 0.0
    if env.yield_force is not None and raw > env.yield_force:
        raw = env.yield_force
    return -d * raw


def yielded_surface(env: ContactEnvironment, x: float, surface_x: float) -> float:
    """Surface position after perfectly plastic flow at ``yield_force``."""
    if env.yield_force is None or env.beta_e == 0.0:
        return surface_x
    pen = env.direction * (x - surface_x)
    max_pen = env.yield_force / env.beta_e
    if pen > max_pen:
        return x - env.direction * max_pen
    return surface_x


def penetration(env: ContactEnvironment, x: float) -> float:
    """Depth past the original (undeformed) surface, zero when outside."""
    return max(0.0, env.direction * (x - env.surface_x))


# ---------------------------------------------------------------------------
# plant


def _rk4(p: PlantParams, x, v, cur, vin_net, F_ext, h, nsub, env, surf):
    """Advance ``nsub`` RK4 steps of length ``h``; returns (x, v, cur, surf)."""
    K, tau = p.K, p.tau
    tau_e = p.electrical_tau or 0.0
    fc = p.coulomb_friction or 0.0
    vs = p.friction_velocity
    if env is not None:
        dirn, beta, alpha, yld = env.direction, env.beta_e, env.alpha_e, env.yield_force

    def deriv(x, v, cur):
        drive = cur if tau_e else vin_net
        w = drive + F_ext
        if fc:
            w -= fc * math.tanh(v / vs)
        if env is not None:
            pen = dirn * (x - surf)
            if pen > 0.0:
                raw = beta * pen + alpha * dirn * v
                if raw > 0.0:
                    if yld is not None and raw > yld:
                        raw = yld
                    w -= dirn * raw
        dcur = (vin_net - cur) / tau_e if tau_e else 0.0
        return v, (K * w - v) / tau, dcur

    h2 = 0.5 * h
    for _ in range(nsub):
        k1x, k1v, k1c = deriv(x, v, cur)
        k2x, k2v, k2c = deriv(x + h2 * k1x, v + h2 * k1v, cur + h2 * k1c)
        k3x, k3v, k3c = deriv(x + h2 * k2x, v + h2 * k2v, cur + h2 * k2c)
        k4x, k4v, k4c = deriv(x + h * k3x, v + h * k3v, cur + h * k3c)
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        cur += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        if env is not None:
            surf = yielded_surface(env, x, surf)
    return x, v, cur, surf


def plant_step(
    p: PlantParams,
    state: PlantState,
    v_in: float,
    F_ext: float,
    dt: float,
    env: ContactEnvironment | None = None,
    surface_x: float | None = None,
    tick: int | None = None,
) -> PlantState:
    """One RK4 step of ``tau*x'' + x' = K*(v_in - D + F_ext)``.

    With ``env`` the contact force is re-evaluated inside the RK4 stages.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    surf = None if env is None else (env.surface_x if surface_x is None else surface_x)
    x, v, cur, _ = _rk4(p, state.x, state.v, state.current, v_in - p.D, F_ext, dt, 1, env, surf)
    if not (math.isfinite(x) and math.isfinite(v) and math.isfinite(cur)):
        where = f" at tick {tick}" if tick is not None else ""
        raise SimulationError(f"non-finite plant state{where}")
    return PlantState(x, v, cur)


# ---------------------------------------------------------------------------
# controllers


class DiscreteController:
    """Controller run as a Tustin difference equation at a fixed tick.

    The output is ``u = C(z)[w] + sat_U[kp*e]`` where ``w = r - x``
    (``feedback="error"``) or ``w = -x`` (``feedback="displacement"``, i.e. the
    reference is treated as zero).  The proportional branch is optional.
    """

    def __init__(
        self,
        tf: RationalTF,
        Ts: float,
        *,
        feedback: str = "error",
        kp: float | None = None,
        sat_limit: float | None = None,
        error_reference: str = "track",
    ):
        if feedback not in ("error", "displacement"):
            raise ValueError(f"unknown feedback mode {feedback!r}")
        if error_reference not in ("track", "zero"):
            raise ValueError(f"unknown error_reference {error_reference!r}")
        self.tf = tf
        self.Ts = Ts
        self.ss = discretize_tustin(tf_to_state_space(tf), Ts)
        self.feedback = feedback
        self.kp = kp
        self.sat_limit = sat_limit
        self.error_reference = error_reference
        self.n = self.ss.order
        self._A = self.ss.A.tolist()
        self._B = self.ss.B[:, 0].tolist()
        self._C = self.ss.C[0].tolist()
        self._D = float(self.ss.D[0, 0])
        self.state = [0.0] * self.n
        self.sat_active = False

    @classmethod
    def from_pid(cls, gains: PidGains, Ts: float) -> "DiscreteController":
        return cls(make_pid(gains), Ts)

    @classmethod
    def from_soft(cls, soft: SoftController, Ts: float) -> "DiscreteController":
        return cls(
            soft.displacement_tf,
            Ts,
            feedback="displacement",
            kp=soft.kp,
            sat_limit=soft.sat_limit,
            error_reference=soft.error_reference,
        )

    def reset(self) -> None:
        self.state = [0.0] * self.n
        self.sat_active = False

    def _signals(self, r: float, x: float) -> tuple[float, float]:
        w = (r - x) if self.feedback == "error" else -x
        if self.kp is None:
            return w, 0.0
        e = (r - x) if self.error_reference == "track" else -x
        p = self.kp * e
        if self.sat_limit is not None and abs(p) > self.sat_limit:
            return w, math.copysign(self.sat_limit, p)
        return w, p

    def output(self, r: float, x: float) -> float:
        """Output for this tick without advancing the state."""
        w, prop = self._signals(r, x)
        return sum(c * s for c, s in zip(self._C, self.state)) + self._D * w + prop

    def step(self, r: float, x: float) -> float:
        w, prop = self._signals(r, x)
        self.sat_active = self.kp is not None and self.sat_limit is not None and abs(prop) == self.sat_limit
        s = self.state
        u = sum(c * si for c, si in zip(self._C, s)) + self._D * w + prop
        self.state = [sum(a * sj for a, sj in zip(row, s)) + b * w for row, b in zip(self._A, self._B)]
        if not math.isfinite(u):
            raise SimulationError("non-finite controller output")
        return u

    def rest_state(self, r: float, x: float) -> list[float]:
        """State the controller would hold after a long run at constant input.

        Controllers with a pole at ``z = 1`` have no such state; their current
        state is returned instead.
        """
        if self.n == 0:
            return []
        w, _ = self._signals(r, x)
        M = np.eye(self.n) - self.ss.A
        if np.linalg.cond(M) > 1e12:
            return list(self.state)
        return np.linalg.solve(M, self.ss.B[:, 0] * w).tolist()

    def handoff(self, r: float, x: float, policy: str = "output_match", u_target: float | None = None) -> None:
        """Initialize the state before taking over the loop.

        ``zero_state`` starts the controller at rest for the current
        measurement (no memory of the previous controller).  ``output_match``
        adds the minimum-norm state correction so the first output equals
        ``u_target``.
        """
        if policy not in ("zero_state", "output_match"):
            raise ValueError(f"unknown handoff policy {policy!r}")
        self.state = self.rest_state(r, x)
        if policy == "zero_state" or u_target is None or self.n == 0:
            return
        c = np.asarray(self._C)
        cc = float(c @ c)
        if cc == 0.0:
            return
        gap = u_target - self.output(r, x)
        self.state = (np.asarray(self.state) + c * gap / cc).tolist()


def controller_step(ctrl: DiscreteController, r: float, x_meas: float) -> float:
    return ctrl.step(r, x_meas)


# ---------------------------------------------------------------------------
# supervisor


class HybridSupervisor:
    """Threshold/debounce/latch switching from the stiff to a soft controller.

    The switch fires on the ``debounce``-th consecutive tick with
    ``|u| > threshold``.  With ``latch=False`` the supervisor returns to STIFF
    after ``release_ticks`` consecutive ticks with ``|u| <= release_level``.
    """

    def __init__(
        self,
        threshold: float = RESHAPE_THRESHOLD,
        debounce: int = 5,
        soft_kind: str = "viscous",
        handoff: str = "output_match",
        latch: bool = True,
        release_level: float | None = None,
        release_ticks: int = 10_000,
    ):
        if not threshold > 0:
            raise ValueError("threshold must be positive")
        if debounce < 1:
            raise ValueError("debounce must be at least one tick")
        if handoff not in ("zero_state", "output_match"):
            raise ValueError(f"unknown handoff policy {handoff!r}")
        self.threshold = threshold
        self.debounce = int(debounce)
        self.soft_kind = soft_kind
        self.handoff = handoff
        self.latch = latch
        self.release_level = 0.5 * threshold if release_level is None else release_level
        self.release_ticks = int(release_ticks)
        self.reset()

    def reset(self) -> None:
        self.mode = Mode.STIFF
        self.latched = False
        self._count = 0

    def step(self, u: float) -> bool:
        """Feed one control value; returns True when the mode changed."""
        if self.mode is Mode.STIFF:
            self._count = self._count + 1 if abs(u) > self.threshold else 0
            if self._count >= self.debounce:
                self.mode = Mode.SOFT
                self.latched = self.latch
                self._count = 0
                return True
            return False
        if self.latched:
            return False
        self._count = self._count + 1 if abs(u) <= self.release_level else 0
        if self._count >= self.release_ticks:
            self.mode = Mode.STIFF
            self._count = 0
            return True
        return False


def supervisor_step(sup: HybridSupervisor, u: float) -> Mode:
    sup.step(u)
    return sup.mode


# ---------------------------------------------------------------------------
# scenario runner


@dataclass
class SimulationResult:
    records: list[TraceRecord]
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.records], dtype=float)

    def __len__(self) -> int:
        return len(self.records)


def run_scenario(
    scn: Scenario,
    stiff: DiscreteController,
    soft: DiscreteController | None = None,
    sup: HybridSupervisor | None = None,
    plant: PlantParams = PlantParams(),
) -> SimulationResult:
    """Closed-loop run, one :class:`TraceRecord` per control tick.

    Without ``soft``/``sup`` the stiff controller runs alone.  The run is
    deterministic for a fixed ``scn.rng_seed``.
    """
    Ts = scn.Ts
    for ctrl in (stiff, soft):
        if ctrl is not None and not math.isclose(ctrl.Ts, Ts, rel_tol=1e-12):
            raise ValueError(f"controller discretized at Ts = {ctrl.Ts}, scenario needs {Ts}")
    if (soft is None) != (sup is None):
        raise ValueError("soft controller and supervisor must be given together")
    stiff.reset()
    if soft is not None:
        soft.reset()
        sup.reset()

    n = scn.n_ticks
    h = Ts / scn.plant_substeps
    rng = np.random.default_rng(scn.rng_seed)
    noise = (rng.standard_normal(n) * scn.noise_sigma).tolist() if scn.noise_sigma > 0 else [0.0] * n
    times = [k * Ts for k in range(n)]
    refs = scn.reference(np.asarray(times)).tolist() if n else []
    delay = int(round((plant.input_delay or 0.0) * scn.control_rate))
    pending = [0.0] * delay

    env = scn.environment
    surf = env.surface_x if env is not None else None
    x = float(refs[0]) if (scn.x0 is None and n) else float(scn.x0 or 0.0)
    v = 0.0
    cur = 0.0
    active = stiff
    mode = Mode.STIFF
    switch_tick = None
    records: list[TraceRecord] = []
    travel_events = 0
    max_pen = 0.0

    for k in range(n):
        t = times[k]
        r = refs[k]
        x_meas = x + noise[k]
        in_contact = scn.contact_active(t)
        tick_env = env if in_contact else None
        F_env = contact_force(env, x, v, surf) if in_contact else 0.0

        u_probe = active.output(r, x_meas)
        if sup is not None and sup.step(u_probe):
            incoming = soft if sup.mode is Mode.SOFT else stiff
            incoming.handoff(r, x_meas, sup.handoff, u_target=u_probe)
            active = incoming
            mode = sup.mode
            if mode is Mode.SOFT and switch_tick is None:
                switch_tick = k
        try:
            u = active.step(r, x_meas)
        except SimulationError as exc:
            raise SimulationError(f"{exc} at tick {k}") from None
        sat = active.sat_active

        if delay:
            pending.append(u)
            u_applied = pending.pop(0)
        else:
            u_applied = u
        v_input = plant.D + u_applied
        F_dist = scn.disturbance_at(t)

        records.append(TraceRecord(t, r, x, x_meas, u, v_input, F_env, mode, sat))

        x, v, cur, new_surf = _rk4(plant, x, v, cur, u_applied, F_dist, h, scn.plant_substeps, tick_env, surf)
        if tick_env is not None:
            surf = new_surf
            max_pen = max(max_pen, penetration(env, x))
        if not (math.isfinite(x) and math.isfinite(v)):
            raise SimulationError(f"non-finite plant state at tick {k}")
        if abs(x) > scn.travel_bound:
            travel_events += 1

    result = SimulationResult(records)
    result.summary = _summarize(result, scn, switch_tick, travel_events, max_pen, x, surf)
    return result


def _summarize(result, scn, switch_tick, travel_events, max_pen, x_end, surf_end) -> dict:
    summary = {
        "ticks": len(result),
        "final_x": x_end if len(result) else (scn.x0 or 0.0),
        "switch_tick": -1 if switch_tick is None else switch_tick,
        "switch_time": math.nan if switch_tick is None else switch_tick * scn.Ts,
        "max_penetration": max_pen,
        "final_penetration": penetration(scn.environment, x_end) if scn.environment is not None else 0.0,
        "final_surface_x": math.nan if surf_end is None else surf_end,
        "travel_violations": travel_events,
    }
    if not len(result):
        summary.update(final_mean_u=math.nan, final_mean_abs_u=math.nan,
                       post_switch_mean_u=math.nan, post_switch_mean_abs_u=math.nan)
        return summary
    u = result.column("u")
    tail = u[-max(1, int(round(scn.control_rate))):]  # last second
    summary["final_mean_u"] = float(np.mean(tail))
    summary["final_mean_abs_u"] = float(np.mean(np.abs(tail)))
    if switch_tick is None:
        summary["post_switch_mean_u"] = math.nan
        summary["post_switch_mean_abs_u"] = math.nan
    else:
        post = u[switch_tick:]
        summary["post_switch_mean_u"] = float(np.mean(post))
        summary["post_switch_mean_abs_u"] = float(np.mean(np.abs(post)))
    return summary


# ---------------------------------------------------------------------------
# reference trapezoid and soft object


def trapezoid_breakpoints(
    low: float = 0.002,
    high: float = 0.010,
    t_rise: tuple[float, float] = (1.0, 3.0),
    t_fall: tuple[float, float] = (10.0, 12.0),
    duration: float = 16.0,
) -> tuple[tuple[float, float], ...]:
    """Out-and-back reference with equal slope magnitudes.

    A duration shorter than the profile keeps the profile unchanged; the run
    simply stops early.
    """
    bp = (
        (0.0, low),
        (t_rise[0], low),
        (t_rise[1], high),
        (t_fall[0], high),
        (t_fall[1], low),
    )
    if duration > t_fall[1]:
        bp += ((duration, low),)
    return bp


def grape_environment(
    surface_x: float = 0.007,
    beta_e: float = 2000.0,
    alpha_e: float = 20.0,
    yield_force: float | None = 2.0,
) -> ContactEnvironment:
    """Soft, penetrable object below the upper plateau of the trapezoid."""
    return ContactEnvironment(surface_x, beta_e, alpha_e, yield_force, direction=-1)


def paper_scenario(with_object: bool = True, **overrides) -> Scenario:
    """Trapezoidal run; the object is placed at t = 4 s, before the way back."""
    duration = overrides.pop("duration", 16.0)
    kw = dict(
        breakpoints=trapezoid_breakpoints(duration=duration),
        duration=duration,
        environment=grape_environment() if with_object else None,
        contact_window=(4.0, math.inf) if with_object else None,
    )
    kw.update(overrides)
    return Scenario(**kw)
