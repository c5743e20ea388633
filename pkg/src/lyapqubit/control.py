"""Bang-bang field selection and switching-time analysis.

The feedback law drives the ground-state population ``V = |b|^2`` downward:
``dV/dt = 2 f Im(a b*)``, so the field takes the sign that makes the product
non-positive. A constant-field segment lasts until ``Im(a b*)`` crosses
zero; along such a segment the switching function is a pure sinusoid

    Im(a b*)(tau) = P cos(2 E tau) + Q sin(2 E tau)

with ``P = Im(a b*)`` at the segment start and
``Q = (sin(theta)/2) (|a|^2 - |b|^2) - cos(theta) Re(a b*)``, which makes
the first zero available in closed form and exactly periodic with period
``pi`` in ``2 E tau``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from scipy.optimize import brentq

from .propagator import controlled_unitary, evolve, free_unitary
from .states import (
    BlochAngles,
    DegenerateStateError,
    PureState,
    SystemParams,
    dressed,
    fidelity,
    from_bloch,
    gauge_fix,
    switching_function,
    to_bloch,
)

#: Magnitudes of Im(a b*) below this count as "at a switching point".
EPS_SWITCH = 1e-12

#: Default free-evolution trigger tick, in units of 1/omega.
DEFAULT_DT_FREE_FACTOR = 1e-4

#: Default fidelity band for the at-target / antipodal classification.
DEFAULT_EPS_TARGET = 1e-9


class RegimeError(ValueError):
    """The state is outside the regime this operation handles."""


class InfeasibleError(ValueError):
    """No control of the requested form exists for these inputs."""


@dataclass(frozen=True)
class ControlDecision:
    """A bang value in ``{-s_max, 0, +s_max}`` chosen by the feedback law."""

    f: float


class Regime(enum.Enum):
    AT_TARGET = "at_target"
    SSC = "ssc"
    FSC = "fsc"
    ANTIPODAL = "antipodal"


def bang_bang_select(t_values: Sequence[float], s: float) -> list[float]:
    """Sign rule for a list of switching values: ``-s`` where positive, ``+s``
    where negative, ``0`` at zero. Guarantees ``sum(f_n T_n) = -s sum|T_n|``."""
    if s < 0.0:
        raise ValueError(f"bound must be non-negative, got {s!r}")
    out = []
    for t in t_values:
        if t > 0.0:
            out.append(-s)
        elif t < 0.0:
            out.append(s)
        else:
            out.append(0.0)
    return out


def select_field(state: PureState, params: SystemParams, eps: float = EPS_SWITCH) -> ControlDecision:
    """Feedback law for one state: ``+s_max`` when ``Im(a b*) < 0``, ``-s_max``
    when positive, ``0`` inside the ``eps`` band around zero."""
    sw = switching_function(state)
    if sw > eps:
        return ControlDecision(-params.s_max)
    if sw < -eps:
        return ControlDecision(params.s_max)
    return ControlDecision(0.0)


def _switch_coefficients(state: PureState, params: SystemParams, f: float):
    fr = dressed(params, f)
    ab = state.a * state.b.conjugate()
    p = ab.imag
    q = 0.5 * fr.sin_theta * (abs(state.a) ** 2 - abs(state.b) ** 2) - fr.cos_theta * ab.real
    return fr, p, q


def segment_duration(state: PureState, f: float, params: SystemParams) -> float:
    """Smallest ``tau > 0`` at which ``Im(a b*)`` vanishes under constant ``f``.

    The closed-form candidate comes from the half-period structure of the
    switching sinusoid; it is then confirmed (and refined when floating-point
    residue remains) by bracketed root finding on the switching function of
    the actually evolved state. The result always lies in
    ``(0, pi/(2 eplus)]``.
    """
    if f == 0.0:
        raise ValueError("a zero field never produces a switching event")
    if abs(state.a) < 1e-12 or abs(state.b) < 1e-12:
        raise DegenerateStateError("polar states have no switching geometry")
    fr, p, q = _switch_coefficients(state, params, f)
    r = math.hypot(p, q)
    if r < 1e-15:
        raise DegenerateStateError(
            "switching function vanishes identically (dressed eigenstate)"
        )
    alpha = (-math.atan2(p, q)) % math.pi
    if alpha <= 0.0:
        alpha = math.pi
    tau0 = alpha / (2.0 * fr.eplus)

    def g(tau: float) -> float:
        return switching_function(evolve(state, controlled_unitary(params, f, tau)))

    if abs(g(tau0)) <= 1e-13 * r:
        return tau0

    delta = max(1e-9 / fr.eplus, 1e-12 * tau0)
    for _ in range(40):
        lo = max(tau0 - delta, 0.25 * tau0)
        hi = tau0 + delta
        glo, ghi = g(lo), g(hi)
        if glo == 0.0:
            return lo
        if ghi == 0.0:
            return hi
        if glo * ghi < 0.0:
            return brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16)
        delta *= 4.0
    raise RuntimeError("failed to bracket the switching event")  # pragma: no cover


def classify_regime(
    state: PureState, params: SystemParams, eps_target: float = DEFAULT_EPS_TARGET
) -> Regime:
    """At-target / antipodal bands take precedence; otherwise the polar angle
    splits fast switching (``gamma <= theta_max``) from slow switching."""
    f = fidelity(state)
    if f >= 1.0 - eps_target:
        return Regime.AT_TARGET
    if f <= eps_target:
        return Regime.ANTIPODAL
    gamma = to_bloch(state).gamma
    if 0.0 < gamma <= params.theta_max:
        return Regime.FSC
    return Regime.SSC


def ssc_step(state: PureState, params: SystemParams, dt_free: float | None = None) -> PureState:
    """One slow-switching step: an infinitesimal free tick triggers the bang
    field, which then runs to its switching point (a half period).

    Requires a state in the xz plane (relative phase 0 or pi) with polar
    angle above ``theta_max``. Up to a correction that vanishes with the
    tick, the polar angle shrinks by ``2*theta_max`` (reflected about the
    pole when it would cross it) and the sign of ``b`` alternates. The
    result is gauge-fixed.
    """
    if dt_free is None:
        dt_free = DEFAULT_DT_FREE_FACTOR / params.omega
    if dt_free <= 0.0:
        raise ValueError(f"dt_free must be positive, got {dt_free!r}")
    bl = to_bloch(state)
    if bl.gamma <= params.theta_max:
        raise RegimeError(
            f"gamma = {bl.gamma!r} is inside the fast-switching regime "
            f"(theta_max = {params.theta_max!r}); switch policy instead"
        )
    if bl.gamma >= math.pi - 1e-12:
        raise DegenerateStateError("antipodal state: free evolution never triggers")
    phase_dist = min(bl.phi, abs(bl.phi - math.pi), abs(bl.phi - 2.0 * math.pi))
    if phase_dist > 1e-6:
        raise ValueError(f"state must lie in the xz plane, got phi = {bl.phi!r}")
    ticked = evolve(state, free_unitary(params, dt_free))
    decision = select_field(ticked, params)
    if decision.f == 0.0:
        raise DegenerateStateError("free tick failed to trigger a field")
    tau = segment_duration(ticked, decision.f, params)
    return gauge_fix(evolve(ticked, controlled_unitary(params, decision.f, tau)))


def exact_steering_strength(gamma0: float, omega: float, n: int) -> float:
    """Field strength for which ``n`` slow-switching steps land exactly on the
    target: ``(omega/2) tan(gamma0 / (2n))``."""
    if int(n) != n or n < 1:
        raise ValueError(f"step count must be a positive integer, got {n!r}")
    if not 0.0 < gamma0 < math.pi:
        raise ValueError(f"gamma0 must lie in (0, pi), got {gamma0!r}")
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    half = gamma0 / (2.0 * n)
    if half >= 0.5 * math.pi:
        raise InfeasibleError("required mixing angle reaches pi/2")
    return 0.5 * omega * math.tan(half)


def ssc_fidelity_bound(params: SystemParams) -> float:
    """Lower bound on the fidelity reached by slow switching alone:
    ``1/2 + 1/(2 sqrt(1 + (2 s_max/omega)^2))`` (equals ``cos^2(theta_max/2)``)."""
    return 0.5 + 0.5 / math.sqrt(1.0 + (2.0 * params.s_max / params.omega) ** 2)


def fsc_population_gain(gamma0: float, params: SystemParams, dt_free: float) -> float:
    """Target-population gain of one fast-switching chatter cycle, simulated
    literally: a free tick of ``dt_free`` followed by the triggered field run
    to its switching point. Exceeds 1 for ``0 < gamma0 < theta_max``; the
    excess scales as ``dt_free**2`` (see :func:`fsc_gain_coefficient`)."""
    theta = params.theta_max
    if not 0.0 < gamma0 < theta:
        raise RegimeError(
            f"gamma0 = {gamma0!r} outside the fast-switching regime (0, {theta!r})"
        )
    if dt_free < 0.0:
        raise ValueError(f"dt_free must be non-negative, got {dt_free!r}")
    if dt_free == 0.0:
        return 1.0
    start = from_bloch(BlochAngles(gamma0, 0.0))
    ticked = evolve(start, free_unitary(params, dt_free))
    decision = select_field(ticked, params)
    tau = segment_duration(ticked, decision.f, params)
    final = evolve(ticked, controlled_unitary(params, decision.f, tau))
    return fidelity(final) / fidelity(start)


def fsc_gain_coefficient(gamma0: float, params: SystemParams) -> float:
    """Exact second-order coefficient of the chatter-cycle gain: the gain is
    ``1 + A * dt_free**2 + O(dt_free**4)`` with

        A = omega^2 sin^2(gamma0/2) sin(theta) / sin(theta - gamma0)

    obtained by expanding the one-cycle map (tick, trigger, half-crossing)
    to second order in the tick. Singular at ``gamma0 = theta``."""
    theta = params.theta_max
    if not 0.0 < gamma0 < theta:
        raise RegimeError(
            f"gamma0 = {gamma0!r} outside the fast-switching regime (0, {theta!r})"
        )
    return (
        params.omega**2
        * math.sin(0.5 * gamma0) ** 2
        * math.sin(theta)
        / math.sin(theta - gamma0)
    )
