"""Rational transfer-function algebra for SISO loops.

Polynomials are stored in ascending powers (``coeffs[k]`` multiplies ``s**k``)
and every :class:`RationalTF` is kept with a monic denominator.  The same
objects are used for continuous (``s``) and discrete (``z``) functions; the
caller decides which variable is meant.

Interconnections (product, sum, feedback) only cancel pole/zero pairs that
coincide to ``1e-8`` relative distance *and* lie strictly in the open left
half plane.  Marginal or unstable common factors are kept so that hidden
modes stay visible in the result.  :meth:`RationalTF.cancel_origin` removes
common factors of ``s`` explicitly when the caller knows that is legitimate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_EPS = np.finfo(float).eps

# relative distance below which a stable pole and zero are treated as equal
CANCEL_RTOL = 1e-8
STABILITY_MARGIN = 1e-9
# a cancelled root must also be a root of both polynomials to this backward error
COMMON_ROOT_RESIDUAL = 1e-10


class TransferFunctionError(ValueError):
    """Invalid transfer-function construction or algebra."""


class ImproperError(TransferFunctionError):
    """A transfer function has more zeros than poles where that is not allowed."""


class PoleEvaluationError(TransferFunctionError):
    """Evaluation requested at (or numerically on) a pole."""


class RootFindingError(ArithmeticError):
    """Simultaneous iteration and the companion fallback both failed."""


class Polynomial:
    """Real polynomial with ascending coefficients, trailing zeros trimmed."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: float | Sequence[float] | np.ndarray):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("polynomial needs a non-empty 1-D coefficient list")
        if not np.all(np.isfinite(c)):
            raise ValueError(f"non-finite polynomial coefficients {c!r}")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1].copy() if nz.size else np.zeros(1)
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots: Iterable[complex], leading: float = 1.0) -> "Polynomial":
        """Monic (times ``leading``) polynomial with the given roots.

        Complex roots must come in conjugate pairs; each pair is expanded as a
        real quadratic so the result is exactly real.
        """
        roots = [complex(r) for r in roots]
        reals = [r.real for r in roots if r.imag == 0.0]
        upper = [r for r in roots if r.imag > 0.0]
        lower = [r for r in roots if r.imag < 0.0]
        if len(upper) != len(lower):
            raise ValueError("complex roots must come in conjugate pairs")
        c = np.array([float(leading)])
        for r in reals:
            c = np.convolve(c, [-r, 1.0])
        for r in upper:
            c = np.convolve(c, [abs(r) ** 2, -2.0 * r.real, 1.0])
        return cls(c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def leading(self) -> float:
        return float(self.coeffs[-1])

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0.0

    def origin_order(self) -> int:
        """Multiplicity of the root at zero (exact zero low-order coefficients)."""
        if self.is_zero:
            return 0
        return int(np.flatnonzero(self.coeffs)[0])

    def __call__(self, s):
        return np.polyval(self.coeffs[::-1], s)

    def __len__(self) -> int:
        return self.coeffs.size

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self), len(other))
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(self)] = self.coeffs
        b[: len(other)] = other.coeffs
        c = a + b
        # coefficients that cancelled down to rounding noise are exact zeros
        c[np.abs(c) <= 4.0 * _EPS * (np.abs(a) + np.abs(b))] = 0.0
        return Polynomial(c)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def shift_down(self, k: int) -> "Polynomial":
        """Divide by ``s**k``; the low ``k`` coefficients must be exact zeros."""
        if k == 0:
            return self
        if np.any(self.coeffs[:k] != 0.0):
            raise ValueError(f"{self!r} is not divisible by s^{k}")
        return Polynomial(self.coeffs[k:])

    def deflate(self, factor: "Polynomial") -> "Polynomial":
        """Quotient of division by ``factor``; the remainder is discarded.

        Exact roots at the origin are split off first so they survive
        untouched, and quotient coefficients that are pure cancellation noise
        are set to zero.
        """
        k = self.origin_order()
        c = self.coeffs[k:]
        f = factor.coeffs / factor.leading
        m = f.size - 1
        nq = c.size - m
        if nq <= 0:
            raise ValueError(f"cannot deflate {self!r} by {factor!r}")
        fwd = _divide(c[::-1], f[::-1])[::-1]
        if f[0] != 0.0:
            # backward division is the stable one for large roots; splice
            # where the two quotients agree best
            bwd = _divide(c, f) / f[0]
            gap = np.abs(fwd - bwd) / (np.abs(fwd) + np.abs(bwd) + np.finfo(float).tiny)
            split = int(np.argmin(gap))
            fwd = np.concatenate([bwd[:split], fwd[split:]])
        q = fwd / factor.leading
        return Polynomial(np.concatenate([np.zeros(k), q]))

    def roots(self, tol: float = 1e-9) -> np.ndarray:
        return poly_roots(self, tol)


def _divide(c: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Quotient of ``c / f`` by synthetic division from ``c[0]`` onward.

    Both arrays are ordered from the end where division starts.  Quotient
    entries at rounding-noise level are flushed to zero.
    """
    c = c.copy()
    f = f / f[0]
    m = f.size - 1
    nq = c.size - m
    mag = np.abs(c)
    q = np.zeros(nq)
    for i in range(nq):
        qi = c[i]
        if abs(qi) <= 8.0 * _EPS * mag[i]:
            qi = 0.0
        q[i] = qi
        c[i : i + m + 1] -= qi * f
        mag[i : i + m + 1] += np.abs(qi * f)
    return q


# ---------------------------------------------------------------------------
# root finding


def _horner_with_derivative(a: np.ndarray, z: np.ndarray):
    """Evaluate descending-coefficient polynomial and its derivative."""
    p = np.full_like(z, a[0])
    dp = np.zeros_like(z)
    for coef in a[1:]:
        dp = dp * z + p
        p = p * z + coef
    return p, dp


def _aberth(c: np.ndarray, max_iter: int) -> np.ndarray | None:
    a = c[::-1] / c[-1]
    n = a.size - 1
    if n == 1:
        return np.array([-a[1] + 0j])
    center = -a[1] / n
    shifted = np.abs(np.polyval(a, center)) ** (1.0 / n)
    radius = max(shifted, abs(a[-1]) ** (1.0 / n), 1e-3)
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4
    z = center + radius * np.exp(1j * angles)
    absa = np.abs(a)
    for _ in range(max_iter):
        p, dp = _horner_with_derivative(a, z)
        scale = np.polyval(absa, np.abs(z))
        at_noise = np.abs(p) <= 8.0 * _EPS * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(at_noise, 0.0, p / dp)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            repulsion = np.sum(1.0 / diff, axis=1)
            step = ratio / (1.0 - ratio * repulsion)
        if not np.all(np.isfinite(step)):
            return None
        z = z - step
        if np.all(at_noise | (np.abs(step) <= 4.0 * _EPS * np.abs(z))):
            return z
    return None


def _residual_ok(c: np.ndarray, roots: np.ndarray, tol: float) -> bool:
    desc = c[::-1]
    res = np.abs(np.polyval(desc, roots))
    scale = np.polyval(np.abs(desc), np.abs(roots))
    return bool(np.all(res <= tol * scale + np.finfo(float).tiny))


def _merge_multiple(c: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """Replace clusters that approximate a multiple root by the root itself.

    An m-fold root is only located to about ``eps**(1/m)``; it is a simple
    root of the (m-1)-th derivative, so Newton on that derivative from the
    cluster mean recovers it to rounding accuracy.  The merge is kept only if
    all derivatives below order m vanish there at rounding level.
    """
    P = np.polynomial.polynomial
    n = roots.size
    if n < 2:
        return roots
    scale = np.maximum(1.0, np.abs(roots))
    # single-linkage clusters with a loose radius
    label = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= 1e-3 * max(scale[i], scale[j]):
                label[label == label[j]] = label[i]
    out = roots.copy()
    for lab in np.unique(label):
        idx = np.flatnonzero(label == lab)
        m = idx.size
        if m < 2:
            continue
        center = complex(np.mean(roots[idx]))
        d = P.polyder(c, m - 1)
        dd = P.polyder(d)
        for _ in range(8):
            slope = P.polyval(center, dd)
            if slope == 0:
                break
            step = P.polyval(center, d) / slope
            center -= step
            if abs(step) <= _EPS * abs(center):
                break
        ok = True
        for j in range(m):
            dj = P.polyder(c, j) if j else c
            bound = 16.0 * (c.size + 1) * _EPS * P.polyval(abs(center), np.abs(dj))
            if abs(P.polyval(center, dj)) > bound:
                ok = False
                break
        if ok:
            out[idx] = center
    return out


def _tidy(roots: np.ndarray, tol: float) -> np.ndarray:
    roots = np.asarray(roots, dtype=complex).copy()
    mag = np.maximum(1.0, np.abs(roots))
    real = np.abs(roots.imag) <= tol * mag
    roots[real] = roots[real].real
    upper = [i for i in np.flatnonzero(~real) if roots[i].imag > 0]
    lower = [i for i in np.flatnonzero(~real) if roots[i].imag < 0]
    for i in upper:
        if not lower:
            break
        j = min(lower, key=lambda k: abs(roots[k] - np.conj(roots[i])))
        lower.remove(j)
        re = 0.5 * (roots[i].real + roots[j].real)
        im = 0.5 * (roots[i].imag - roots[j].imag)
        roots[i] = complex(re, im)
        roots[j] = complex(re, -im)
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def poly_roots(p: Polynomial | Sequence[float], tol: float = 1e-9, max_iter: int = 500) -> np.ndarray:
    """All roots of ``p`` with multiplicity.

    Aberth-Ehrlich simultaneous iteration is tried first; if it stalls or the
    backward residual ``|p(r)| <= tol * sum_k |c_k| |r|^k`` is not met, the
    eigenvalues of the companion matrix are used instead.  Roots whose
    imaginary part is below ``tol`` (relative) are returned as real and complex
    roots are returned as exact conjugate pairs, sorted by real part.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    if p.degree < 1:
        raise ValueError(f"roots need degree >= 1, got {p!r}")
    k = p.origin_order()
    c = p.coeffs[k:]
    found = [np.zeros(k, dtype=complex)]
    if c.size > 1:
        r = _aberth(c, max_iter)
        if r is None or not _residual_ok(c, r, tol):
            r = np.linalg.eigvals(np.polynomial.polynomial.polycompanion(c)).astype(complex)
            if not _residual_ok(c, r, tol):
                raise RootFindingError(f"no convergence for roots of {p!r}")
        found.append(_merge_multiple(c, r))
    return _tidy(np.concatenate(found), tol)


# ---------------------------------------------------------------------------
# transfer functions


class RationalTF:
    """Real-coefficient rational function ``num/den`` in canonical form.

    The denominator is scaled to be monic.  A zero function is stored as
    ``0/1``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1.0):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise TransferFunctionError("denominator is identically zero")
        if num.is_zero:
            den = Polynomial(1.0)
        lead = den.leading
        self.num = Polynomial(num.coeffs / lead)
        self.den = Polynomial(den.coeffs / lead)

    @classmethod
    def constant(cls, k: float) -> "RationalTF":
        return cls([k], [1.0])

    @classmethod
    def s(cls) -> "RationalTF":
        return cls([0.0, 1.0], [1.0])

    @classmethod
    def from_zpk(cls, zeros, poles, gain: float) -> "RationalTF":
        return cls(Polynomial.from_roots(zeros, gain), Polynomial.from_roots(poles))

    # -- queries -----------------------------------------------------------
    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    @property
    def is_proper(self) -> bool:
        return self.relative_degree >= 0

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def poles(self, tol: float = 1e-9) -> np.ndarray:
        if self.den.degree == 0:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.den, tol)

    def zeros(self, tol: float = 1e-9) -> np.ndarray:
        if self.num.degree == 0:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.num, tol)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=complex)
        d = self.den(s_arr)
        scale = np.polyval(np.abs(self.den.coeffs[::-1]), np.abs(s_arr))
        on_pole = np.abs(d) <= 4.0 * _EPS * scale
        if np.any(on_pole):
            bad = np.atleast_1d(s_arr)[np.atleast_1d(on_pole)][0]
            raise PoleEvaluationError(f"evaluation at a pole, s = {bad}")
        out = self.num(s_arr) / d
        return complex(out) if out.ndim == 0 else out

    def freqresp(self, omega, dt: float | None = None):
        """Response at ``s = j*omega`` (or ``z = exp(j*omega*dt)`` when ``dt`` is given)."""
        omega = np.asarray(omega, dtype=float)
        point = np.exp(1j * omega * dt) if dt else 1j * omega
        try:
            return self(point)
        except PoleEvaluationError:
            for w, pt in zip(np.atleast_1d(omega), np.atleast_1d(point)):
                try:
                    self(pt)
                except PoleEvaluationError:
                    raise PoleEvaluationError(f"evaluation at a pole, omega = {float(w)!r} rad/s") from None
            raise

    def static_gain(self) -> float:
        """Limit as ``s -> 0``; ``inf`` when a pole at the origin remains."""
        k = min(self.num.origin_order(), self.den.origin_order())
        num = self.num.shift_down(k) if not self.is_zero else self.num
        den = self.den.shift_down(k)
        if den.coeffs[0] == 0.0:
            return math.inf if num.coeffs[0] != 0.0 else math.nan
        return float(num.coeffs[0] / den.coeffs[0])

    def cancel_origin(self) -> "RationalTF":
        """Remove common factors of ``s`` from numerator and denominator."""
        if self.is_zero:
            return self
        k = min(self.num.origin_order(), self.den.origin_order())
        return RationalTF(self.num.shift_down(k), self.den.shift_down(k))

    def equivalent(self, other: "RationalTF", rtol: float = 1e-9) -> bool:
        """Cross-multiplied coefficient equality: ``n1*d2 == n2*d1``."""
        left = (self.num * other.den).coeffs
        right = (other.num * self.den).coeffs
        n = max(left.size, right.size)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: left.size] = left
        b[: right.size] = right
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), np.finfo(float).tiny)
        return bool(np.max(np.abs(a - b)) <= rtol * scale)

    # -- algebra -----------------------------------------------------------
    def __mul__(self, other) -> "RationalTF":
        return tf_multiply(self, _as_tf(other))

    __rmul__ = __mul__

    def __add__(self, other) -> "RationalTF":
        return tf_add(self, _as_tf(other))

    __radd__ = __add__

    def __neg__(self) -> "RationalTF":
        return RationalTF(-self.num, self.den)

    def __sub__(self, other) -> "RationalTF":
        return tf_add(self, -_as_tf(other))

    def __rsub__(self, other) -> "RationalTF":
        return tf_add(_as_tf(other), -self)

    def __truediv__(self, other) -> "RationalTF":
        return tf_multiply(self, tf_invert(_as_tf(other)))

    def __rtruediv__(self, other) -> "RationalTF":
        return tf_multiply(_as_tf(other), tf_invert(self))

    def __pow__(self, n: int) -> "RationalTF":
        if n < 0:
            return tf_invert(self) ** (-n)
        out = RationalTF.constant(1.0)
        for _ in range(n):
            out = tf_multiply(out, self)
        return out

    def inv(self) -> "RationalTF":
        return tf_invert(self)

    def __repr__(self) -> str:
        return f"RationalTF(num={self.num.coeffs.tolist()}, den={self.den.coeffs.tolist()})"

    def to_text(self) -> str:
        return format_tf(self)


def _as_tf(x) -> RationalTF:
    if isinstance(x, RationalTF):
        return x
    if isinstance(x, Polynomial):
        return RationalTF(x, [1.0])
    return RationalTF.constant(float(x))


def _backward_residual(poly: Polynomial, r: complex) -> float:
    scale = np.polyval(np.abs(poly.coeffs[::-1]), abs(r))
    return abs(poly(r)) / scale if scale else 0.0


def _best_common_root(num: Polynomial, den: Polynomial, candidates) -> complex:
    # a multiple root is only found to ~sqrt(eps); take the estimate that is
    # closest to a root of both polynomials
    return min(candidates, key=lambda c: max(_backward_residual(num, c), _backward_residual(den, c)))


def cancel_stable(num: Polynomial, den: Polynomial, rtol: float = CANCEL_RTOL) -> tuple[Polynomial, Polynomial]:
    """Remove common factors of ``num`` and ``den`` that are strictly stable.

    A pole and zero are merged when they lie within ``rtol`` relative distance
    and a common estimate is a root of both polynomials to rounding level.
    """
    if num.degree < 1 or den.degree < 1 or num.is_zero:
        return num, den
    try:
        zs = list(poly_roots(num))
        ps = list(poly_roots(den))
    except RootFindingError:
        return num, den
    for z in zs:
        if z.real >= -STABILITY_MARGIN or z.imag < 0:
            continue
        candidates = [p for p in ps if p.real < -STABILITY_MARGIN and p.imag >= 0]
        if not candidates:
            break
        p = min(candidates, key=lambda q: abs(q - z))
        if abs(p - z) > rtol * max(abs(p), abs(z)):
            continue
        if (z.imag > 0) != (p.imag > 0):
            continue  # one real, one complex: not a clean common factor
        r = _best_common_root(num, den, (z, p, 0.5 * (p + z)))
        if max(_backward_residual(num, r), _backward_residual(den, r)) > COMMON_ROOT_RESIDUAL:
            continue  # close, but not a root of both
        width = 2 if z.imag > 0 else 1
        if num.degree < width or den.degree < width:
            break
        ps.remove(p)
        if width == 2:
            ps.remove(min(ps, key=lambda q: abs(q - np.conj(p))))
            factor = Polynomial([abs(r) ** 2, -2.0 * r.real, 1.0])
        else:
            factor = Polynomial([-r.real, 1.0])
        num = num.deflate(factor)
        den = den.deflate(factor)
    return num, den


def tf_multiply(a: RationalTF, b: RationalTF) -> RationalTF:
    if a.is_zero or b.is_zero:
        return RationalTF.constant(0.0)
    num, den = cancel_stable(a.num * b.num, a.den * b.den)
    return RationalTF(num, den)


def tf_add(a: RationalTF, b: RationalTF) -> RationalTF:
    if a.den == b.den:
        return RationalTF(a.num + b.num, a.den)
    num, den = cancel_stable(a.num * b.den + b.num * a.den, a.den * b.den)
    return RationalTF(num, den)


def tf_invert(a: RationalTF) -> RationalTF:
    if a.is_zero:
        raise TransferFunctionError("cannot invert the zero transfer function")
    return RationalTF(a.den, a.num)


def tf_feedback(L: RationalTF) -> RationalTF:
    """Unity negative feedback closure ``L/(1+L)``."""
    if L.is_zero:
        return RationalTF.constant(0.0)
    char = L.den + L.num
    if char.is_zero:
        raise TransferFunctionError("1 + L is identically zero")
    num, den = cancel_stable(L.num, char)
    return RationalTF(num, den)


def tf_evaluate(tf: RationalTF, omega: float) -> complex:
    return tf.freqresp(omega)


def tf_is_stable(tf: RationalTF, discrete: bool = False, margin: float = STABILITY_MARGIN) -> bool:
    poles = tf.poles()
    if poles.size == 0:
        return True
    if discrete:
        return bool(np.all(np.abs(poles) < 1.0 - margin))
    return bool(np.all(poles.real < -margin))


# ---------------------------------------------------------------------------
# state space


@dataclass(frozen=True)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: float | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = 0 if A.size == 0 else A.shape[0]
        A = A.reshape(n, n)
        B = np.asarray(self.B, dtype=float).reshape(n, 1)
        C = np.asarray(self.C, dtype=float).reshape(1, n)
        D = np.asarray(self.D, dtype=float).reshape(1, 1)
        for name, m in zip("ABCD", (A, B, C, D)):
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.dt is not None and not self.dt > 0:
            raise ValueError("sample time must be positive")

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.dt is not None

    def freqresp(self, omega) -> np.ndarray:
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        pts = np.exp(1j * omega * self.dt) if self.is_discrete else 1j * omega
        n = self.order
        out = np.empty(pts.size, dtype=complex)
        for i, p in enumerate(pts):
            if n:
                M = p * np.eye(n) - self.A
                x = np.linalg.solve(M, self.B)
                # one refinement step; companion matrices lose digits otherwise
                x = x + np.linalg.solve(M, self.B - M @ x)
                out[i] = (self.C @ x)[0, 0] + self.D[0, 0]
            else:
                out[i] = self.D[0, 0]
        return out

    def dc_gain(self) -> float:
        """Gain at ``s = 0`` (continuous) or ``z = 1`` (discrete)."""
        n = self.order
        if n == 0:
            return float(self.D[0, 0])
        ref = np.zeros((n, n)) if not self.is_discrete else np.eye(n)
        x = np.linalg.solve(ref - self.A, self.B)
        return float((self.C @ x)[0, 0] + self.D[0, 0])


def _charpoly(A: np.ndarray) -> Polynomial:
    """Characteristic polynomial by Faddeev-LeVerrier, ascending order."""
    n = A.shape[0]
    c = np.zeros(n + 1)
    c[n] = 1.0
    M = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + c[n - k + 1] * I
        c[n - k] = -np.trace(A @ M) / k
    return Polynomial(c)


def ss_to_tf(ss: StateSpaceModel) -> RationalTF:
    """Transfer function of a SISO model via the determinant lemma."""
    if ss.order == 0:
        return RationalTF.constant(float(ss.D[0, 0]))
    den = _charpoly(ss.A)
    closed = _charpoly(ss.A - ss.B @ ss.C)
    num = closed - den + den * float(ss.D[0, 0])
    return RationalTF(num, den)


def tf_to_state_space(tf: RationalTF) -> StateSpaceModel:
    """Controllable canonical realization of a proper transfer function."""
    if not tf.is_proper:
        raise ImproperError(
            f"transfer function has relative degree {tf.relative_degree}; "
            "append a low-pass filter (s/omega_c + 1)^m to make it proper"
        )
    n = tf.den.degree
    a = tf.den.coeffs
    b = np.zeros(n + 1)
    b[: len(tf.num)] = tf.num.coeffs
    d = b[n]
    if n == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d]])
    A = np.zeros((n, n))
    A[np.arange(n - 1), np.arange(1, n)] = 1.0
    A[n - 1, :] = -a[:n]
    B = np.zeros((n, 1))
    B[n - 1, 0] = 1.0
    C = (b[:n] - d * a[:n]).reshape(1, n)
    return StateSpaceModel(A, B, C, [[d]])


def discretize_tustin(ss: StateSpaceModel, Ts: float) -> StateSpaceModel:
    """Bilinear (Tustin) transform without pre-warping."""
    if ss.is_discrete:
        raise ValueError("model is already discrete")
    if not Ts > 0:
        raise ValueError("sample time must be positive")
    n = ss.order
    if n == 0:
        return StateSpaceModel(ss.A, ss.B, ss.C, ss.D, dt=Ts)
    M = np.eye(n) - 0.5 * Ts * ss.A
    if np.linalg.cond(M) > 1.0 / _EPS:
        raise np.linalg.LinAlgError(f"I - (Ts/2)A is singular for Ts = {Ts!r}")
    Minv = np.linalg.inv(M)
    Ad = Minv @ (np.eye(n) + 0.5 * Ts * ss.A)
    Bd = Ts * (Minv @ ss.B)
    Cd = ss.C @ Minv
    Dd = ss.D + 0.5 * Ts * (ss.C @ Minv @ ss.B)
    return StateSpaceModel(Ad, Bd, Cd, Dd, dt=Ts)


# ---------------------------------------------------------------------------
# plain-text format:  "num: c0 c1 ... / den: d0 d1 ..."

_TF_PATTERN = re.compile(r"^\s*num:\s*(?P<num>[^/]*?)\s*/\s*den:\s*(?P<den>.*?)\s*$")


def format_tf(tf: RationalTF) -> str:
    num = " ".join(repr(float(c)) for c in tf.num.coeffs)
    den = " ".join(repr(float(c)) for c in tf.den.coeffs)
    return f"num: {num} / den: {den}"


def parse_tf(text: str) -> RationalTF:
    m = _TF_PATTERN.match(text)
    if not m:
        raise TransferFunctionError(f"cannot parse transfer function text {text!r}")
    try:
        num = [float(v) for v in m.group("num").split()]
        den = [float(v) for v in m.group("den").split()]
    except ValueError as exc:
        raise TransferFunctionError(f"bad coefficient in {text!r}: {exc}") from None
    if not num or not den:
        raise TransferFunctionError(f"empty coefficient list in {text!r}")
    return RationalTF(num, den)
