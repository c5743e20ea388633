"""Pure-state math for a driven two-level system.

Basis convention: the target state ``|e>`` is ``(1, 0)`` and the ground
state ``|g>`` is ``(0, 1)``. A pure state ``a|e> + b|g>`` keeps the full
complex pair; global phase is only removed where a caller asks for it
(:func:`gauge_fix`). Bloch coordinates use the polar angle ``gamma``
measured from the target pole (``gamma = 0`` is ``|e>``, ``gamma = pi``
is ``|g>``) and the relative phase ``phi = arg(b) - arg(a)`` reduced to
``[0, 2*pi)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

#: Normalisation drift accepted by constructors; evolution renormalises
#: defensively beyond it.
NORM_TOL = 1e-12

#: Below this amplitude magnitude a state counts as sitting on a pole.
POLE_TOL = 1e-15


class DegenerateStateError(ValueError):
    """The requested operation is undefined for this state."""


class FieldBoundError(ValueError):
    """A control field exceeds the configured strength bound."""


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude pair ``(a, b)`` on the basis ``{|e>, |g>}``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        n2 = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(n2 - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |a|^2 + |b|^2 = {n2!r}")

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "PureState":
        """Build a state from arbitrary amplitudes, rescaling to unit norm."""
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(a / n, b / n)


@dataclass(frozen=True)
class BlochAngles:
    """Polar angle ``gamma`` in [0, pi] and relative phase ``phi`` in [0, 2*pi).

    ``phi`` is reduced modulo ``2*pi`` on input; ``gamma`` outside its range
    is rejected.
    """

    gamma: float
    phi: float

    def __post_init__(self):
        g = float(self.gamma)
        if not 0.0 <= g <= math.pi:
            raise ValueError(f"gamma must lie in [0, pi], got {g!r}")
        p = float(self.phi) % TWO_PI
        if p >= TWO_PI:  # float modulo may round up to the period itself
            p = 0.0
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "phi", p)


@dataclass(frozen=True)
class SystemParams:
    """Level spacing ``omega`` (> 0) and field-strength bound ``s_max`` (>= 0)."""

    omega: float
    s_max: float

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "s_max", float(self.s_max))
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        if self.s_max < 0.0:
            raise ValueError(f"s_max must be non-negative, got {self.s_max!r}")

    @property
    def theta_max(self) -> float:
        """Mixing angle of the strongest field, ``arctan(2*s_max/omega)``."""
        return math.atan2(2.0 * self.s_max, self.omega)

    @property
    def eplus_max(self) -> float:
        """Positive eigenvalue at full strength, ``sqrt(omega^2/4 + s_max^2)``."""
        return math.hypot(0.5 * self.omega, self.s_max)


@dataclass(frozen=True)
class DressedFrame:
    """Per-field derived quantities: the field value, its mixing angle
    ``theta = arctan(2f/omega)`` and the positive eigenvalue
    ``eplus = sqrt(omega^2/4 + f^2)``."""

    f: float
    theta: float
    eplus: float

    @property
    def sin_theta(self) -> float:
        return self.f / self.eplus

    @property
    def cos_theta(self) -> float:
        # algebraic forms keep tan(theta) = 2f/omega exact
        return math.sqrt(self.eplus**2 - self.f**2) / self.eplus


def dressed(params: SystemParams, f: float) -> DressedFrame:
    """Derived quantities for a constant field ``f``; rejects ``|f| > s_max``."""
    f = float(f)
    if abs(f) > params.s_max * (1.0 + 1e-12):
        raise FieldBoundError(
            f"|f| = {abs(f)!r} exceeds the bound s_max = {params.s_max!r}"
        )
    return DressedFrame(f, math.atan2(2.0 * f, params.omega), math.hypot(0.5 * params.omega, f))


def from_bloch(angles: BlochAngles) -> PureState:
    """State ``cos(gamma/2)|e> + e^{i phi} sin(gamma/2)|g>``."""
    half = 0.5 * angles.gamma
    return PureState(math.cos(half), cmath.exp(1j * angles.phi) * math.sin(half))


def to_bloch(state: PureState) -> BlochAngles:
    """Inverse of :func:`from_bloch`; ``phi = 0`` by convention at the poles.

    Phase-invariant: only ``|a|`` and the relative phase enter.
    """
    mag_a = min(abs(state.a), 1.0)
    gamma = 2.0 * math.acos(mag_a)
    if abs(state.a) < POLE_TOL or abs(state.b) < POLE_TOL:
        return BlochAngles(gamma, 0.0)
    return BlochAngles(gamma, cmath.phase(state.b) - cmath.phase(state.a))


def fidelity(state: PureState) -> float:
    """Population of the target state, ``|a|^2``; clamped to [0, 1]."""
    return min(max(abs(state.a) ** 2, 0.0), 1.0)


def lyapunov(state: PureState) -> float:
    """Population outside the target state, ``|b|^2 = 1 - fidelity``."""
    return min(max(abs(state.b) ** 2, 0.0), 1.0)


def switching_function(state: PureState) -> float:
    """``Im(a * conj(b))``; its sign selects the bang field, its zeros mark switches.

    For a Bloch state this equals ``-sin(phi) * sin(gamma) / 2``. Invariant
    under global phase; flips sign under complex conjugation of the state.
    """
    return (state.a * state.b.conjugate()).imag


def gauge_fix(state: PureState) -> PureState:
    """Remove the global phase so that ``a`` is real and >= 0.

    If ``a`` vanishes, make ``b`` real and >= 0 instead. Leaves fidelity and
    the switching function unchanged.
    """
    if abs(state.a) >= POLE_TOL:
        phase = state.a.conjugate() / abs(state.a)
    elif abs(state.b) >= POLE_TOL:
        phase = state.b.conjugate() / abs(state.b)
    else:  # pragma: no cover - normalized states always have one amplitude
        return state
    return PureState(state.a * phase, state.b * phase)
