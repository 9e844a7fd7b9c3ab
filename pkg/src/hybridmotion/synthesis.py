"""Controller and impedance constructions for stiff and soft motion control.

Everything here is built from :class:`~hybridmotion.ratfun.RationalTF` values.
The stiff controller shapes the reference response as a critically damped
pole pair, the soft (impedance) controller shapes the disturbance
sensitivity as a dashpot ``1/(alpha*s)``.  The two experimental soft
controllers for the voice-coil stage are stored with their published
coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

from .ratfun import (
    ImproperError,
    Polynomial,
    RationalTF,
    cancel_stable,
    TransferFunctionError,
    format_tf,
    parse_tf,
    tf_feedback,
)

# identified voice-coil stage, x = K/(s(tau*s + 1)) v
NOMINAL_K = 0.0408
NOMINAL_TAU = 0.00668

# stiff PID gains of the experimental stage
PAPER_KP = 429.0
PAPER_KI = 4348.0
PAPER_KD = 2.67

RESHAPE_THRESHOLD = 1.3
DEFAULT_OMEGA_C = 2000.0
DEFAULT_DERIVATIVE_CUTOFF = 10.0 * DEFAULT_OMEGA_C

# displacement-feedback branch shared by both experimental soft controllers:
# (0.0486 s^2 + 10.78 s) / (0.0272 s + 4.08), before the omega_c low-pass
SOFT_BRANCH_NUM = (0.0, 10.78, 0.0486)
SOFT_BRANCH_DEN = (4.08, 0.0272)


def nominal_plant(K: float = NOMINAL_K, tau: float = NOMINAL_TAU) -> RationalTF:
    """Integrating first-order plant ``K/(s(tau*s + 1))``."""
    return RationalTF([K], [0.0, 1.0, tau])


@dataclass(frozen=True)
class EnvironmentImpedance:
    kind: Literal["dashpot", "kelvin_voigt"]
    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dashpot", "kelvin_voigt"):
            raise ValueError(f"unknown environment kind {self.kind!r}")
        if not self.alpha > 0:
            raise ValueError("viscosity alpha must be positive")
        if self.beta < 0:
            raise ValueError("stiffness beta must be non-negative")
        if self.kind == "dashpot" and self.beta != 0:
            raise ValueError("a dashpot has no stiffness term")


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    derivative_filter_cutoff: float = DEFAULT_DERIVATIVE_CUTOFF

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError("PID gains must be non-negative")
        if self.kp == self.ki == self.kd == 0:
            raise ValueError("at least one PID gain must be nonzero")
        if not self.derivative_filter_cutoff > 0:
            raise ValueError("derivative filter cutoff must be positive")


PAPER_PID = PidGains(PAPER_KP, PAPER_KI, PAPER_KD)


@dataclass(frozen=True)
class ReshapeSpec:
    """Parameters of a soft (reshaped) controller.

    ``bandwidth`` is the closed-loop bandwidth the low-pass cutoff should sit a
    decade above; it defaults to ``kp/kd`` of the stiff PID.  ``error_reference``
    selects how the proportional branch of the viscoelastic controller forms
    its error after switching: ``"track"`` uses ``r - x``, ``"zero"`` uses ``-x``.
    """

    alpha: float = 100.0
    omega_c: float = DEFAULT_OMEGA_C
    kp: float | None = None
    sat_limit: float | None = None
    bandwidth: float = PAPER_KP / PAPER_KD
    error_reference: Literal["track", "zero"] = "track"

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        if self.error_reference not in ("track", "zero"):
            raise ValueError(f"unknown error_reference {self.error_reference!r}")
        if self.omega_c < 10.0 * self.bandwidth:
            warnings.warn(
                f"omega_c = {self.omega_c:g} rad/s is less than ten times the "
                f"closed-loop bandwidth {self.bandwidth:g} rad/s",
                stacklevel=3,
            )


@dataclass(frozen=True)
class SoftController:
    """Description of a soft controller ``u = -C_x(s) x + sat_U[kp e]``.

    ``kp`` and ``sat_limit`` are ``None`` for the purely viscous kind.
    """

    kind: Literal["viscous", "viscoelastic"]
    displacement_tf: RationalTF
    kp: float | None = None
    sat_limit: float | None = None
    error_reference: Literal["track", "zero"] = "track"

    def proportional(self, e: float) -> float:
        if self.kp is None:
            return 0.0
        v = self.kp * e
        if self.sat_limit is None:
            return v
        return min(max(v, -self.sat_limit), self.sat_limit)

    def linear_equivalent(self) -> RationalTF:
        """Unsaturated error-feedback controller seen by the loop when ``r = 0``."""
        kp = self.kp or 0.0
        return self.displacement_tf + kp

    def to_text(self) -> str:
        lines = [format_tf(self.displacement_tf)]
        if self.kp is not None:
            lines.append(f"kp: {self.kp!r}")
        if self.sat_limit is not None:
            lines.append(f"sat: {self.sat_limit!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SoftController":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        tf = parse_tf(lines[0])
        extras = {}
        for ln in lines[1:]:
            key, _, value = ln.partition(":")
            if key.strip() not in ("kp", "sat"):
                raise TransferFunctionError(f"unknown controller annotation {ln!r}")
            extras[key.strip()] = float(value)
        kind = "viscoelastic" if "kp" in extras else "viscous"
        return cls(kind, tf, extras.get("kp"), extras.get("sat"))


def impedance_tf(env: EnvironmentImpedance) -> RationalTF:
    if env.kind == "dashpot":
        return RationalTF.constant(env.alpha)
    return RationalTF([env.beta, env.alpha], [0.0, 1.0])


def stiffness_from_impedance(Z: RationalTF) -> RationalTF:
    """Dynamic control stiffness ``Z(s) s``."""
    return (Z * RationalTF.s()).cancel_origin()


def static_stiffness(Z: RationalTF) -> float:
    """Low-frequency limit of ``Z(s) s``; ``inf`` if it does not exist."""
    return stiffness_from_impedance(Z).static_gain()


def target_sensitivity(env: EnvironmentImpedance) -> RationalTF:
    """Disturbance sensitivity that makes the loop behave like ``env``: ``1/(Z s)``."""
    return stiffness_from_impedance(impedance_tf(env)).inv()


def make_stiff_loopshape(G: RationalTF, omega0: float) -> RationalTF:
    """Controller giving ``H = omega0^2/(s^2 + 2 omega0 s + omega0^2)``.

    Works for any invertible plant of relative degree at most two.
    """
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    if G.relative_degree > 2:
        raise ImproperError(
            f"plant relative degree {G.relative_degree} > 2 gives an improper loop-shaping controller"
        )
    target_loop = RationalTF([omega0**2], [0.0, 2.0 * omega0, 1.0])
    C = (G.inv() * target_loop).cancel_origin()
    if not C.is_proper:
        raise ImproperError(f"loop-shaping controller is improper for plant relative degree {G.relative_degree}")
    return C


def lowpass(omega_c: float, order: int = 1) -> RationalTF:
    """``1/(s/omega_c + 1)^order``."""
    return RationalTF([1.0], [1.0, 1.0 / omega_c]) ** order


def make_viscous_impedance(G: RationalTF, alpha: float, omega_c: float) -> RationalTF:
    """Impedance controller ``(alpha s G - 1)/G`` in series with a low-pass.

    The filter order is the smallest that makes the result proper.  Pass
    ``omega_c = math.inf`` for the ideal (usually improper) controller.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if omega_c is None or not omega_c > 0:
        raise ValueError("omega_c must be given; the raw impedance controller is improper")
    raw = alpha * RationalTF.s() - G.inv()
    if math.isinf(omega_c):
        return raw
    order = max(0, -raw.relative_degree)
    return raw * lowpass(omega_c, order) if order else raw


def make_pid(g: PidGains) -> RationalTF:
    """``kp + ki/s + kd s/(s/omega_f + 1)``, terms with zero gain omitted."""
    C = RationalTF.constant(g.kp)
    if g.ki:
        C = C + RationalTF([g.ki], [0.0, 1.0])
    if g.kd:
        C = C + RationalTF([0.0, g.kd], [1.0, 1.0 / g.derivative_filter_cutoff])
    return C


def soft_branch(omega_c: float = DEFAULT_OMEGA_C) -> RationalTF:
    """Displacement feedback of the experimental soft controllers, with low-pass."""
    core = RationalTF(list(SOFT_BRANCH_NUM), list(SOFT_BRANCH_DEN))
    if math.isinf(omega_c):
        return core
    return core * lowpass(omega_c)


def make_experimental_soft(kind: Literal["viscous", "viscoelastic"], spec: ReshapeSpec) -> SoftController:
    branch = soft_branch(spec.omega_c)
    if kind == "viscous":
        return SoftController("viscous", branch, error_reference=spec.error_reference)
    if kind == "viscoelastic":
        if spec.sat_limit is None:
            raise ValueError("the viscoelastic controller needs a saturation limit")
        kp = PAPER_KP if spec.kp is None else spec.kp
        return SoftController("viscoelastic", branch, kp, spec.sat_limit, spec.error_reference)
    raise ValueError(f"unknown soft controller kind {kind!r}")


def _closed_loop(G: RationalTF, C: RationalTF, num: Polynomial) -> RationalTF:
    # characteristic polynomial dG dC + nG nC, without routing through G^-1
    char = G.den * C.den + G.num * C.num
    if char.is_zero:
        raise TransferFunctionError("1 + C G is identically zero")
    if num.is_zero:
        return RationalTF.constant(0.0)
    return RationalTF(*cancel_stable(num, char))


def sensitivity(G: RationalTF, C: RationalTF) -> RationalTF:
    """Disturbance-to-displacement map ``G/(1 + C G)``."""
    return _closed_loop(G, C, G.num * C.den)


def control_sensitivity(G: RationalTF, C: RationalTF) -> RationalTF:
    """Disturbance-to-control map ``C G/(1 + C G)``.

    Algebraically this is also the reference-to-output map of the loop.
    """
    return _closed_loop(G, C, G.num * C.num)


def critically_damped(omega0: float) -> RationalTF:
    return RationalTF([omega0**2], [omega0**2, 2.0 * omega0, 1.0])
