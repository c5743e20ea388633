"""Exact time-evolution operators for constant fields, plus an independent
fixed-step integrator used as a verification oracle.

For ``H = (omega/2) sz + f sx`` with mixing angle ``theta = arctan(2f/omega)``
and ``E = sqrt(omega^2/4 + f^2)`` the propagator ``exp(-iHt)`` is

    [[cos(Et) - i sin(Et) cos(theta),  -i sin(Et) sin(theta)],
     [-i sin(Et) sin(theta),           cos(Et) + i sin(Et) cos(theta)]]

which is symmetric (``u12 = u21``) and reduces to
``diag(e^{-i omega t/2}, e^{i omega t/2})`` for ``f = 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .states import NORM_TOL, PureState, SystemParams, dressed

#: Unitarity drift accepted when constructing a Unitary2.
UNITARY_TOL = 1e-12

#: Agreement required between successive step halvings in the oracle's
#: automatic step-size mode.
ORACLE_REFINE_TOL = 1e-10


@dataclass(frozen=True)
class Unitary2:
    """A 2x2 unitary stored as four complex entries."""

    u11: complex
    u12: complex
    u21: complex
    u22: complex

    def __post_init__(self):
        for name in ("u11", "u12", "u21", "u22"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        c1 = abs(self.u11) ** 2 + abs(self.u21) ** 2
        c2 = abs(self.u12) ** 2 + abs(self.u22) ** 2
        cross = self.u11.conjugate() * self.u12 + self.u21.conjugate() * self.u22
        if max(abs(c1 - 1.0), abs(c2 - 1.0), abs(cross)) > UNITARY_TOL:
            raise ValueError("entries do not form a unitary matrix")

    def adjoint(self) -> "Unitary2":
        return Unitary2(
            self.u11.conjugate(),
            self.u21.conjugate(),
            self.u12.conjugate(),
            self.u22.conjugate(),
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.u11, self.u12], [self.u21, self.u22]], dtype=np.complex128)

    @classmethod
    def from_array(cls, m) -> "Unitary2":
        m = np.asarray(m, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


IDENTITY = Unitary2(1.0, 0.0, 0.0, 1.0)


def controlled_unitary(params: SystemParams, f: float, t: float) -> Unitary2:
    """Propagator for a constant field ``f`` over duration ``t >= 0``.

    ``f`` must respect the strength bound; a signed field gives a signed
    mixing angle so one formula covers both bang values.
    """
    if t < 0.0:
        raise ValueError(f"duration must be non-negative, got {t!r}")
    fr = dressed(params, f)
    c = math.cos(fr.eplus * t)
    s = math.sin(fr.eplus * t)
    st, ct = fr.sin_theta, fr.cos_theta
    off = -1j * s * st
    return Unitary2(c - 1j * s * ct, off, off, c + 1j * s * ct)


def free_unitary(params: SystemParams, t: float) -> Unitary2:
    """Diagonal propagator ``diag(e^{-i omega t/2}, e^{i omega t/2})``."""
    if t < 0.0:
        raise ValueError(f"duration must be non-negative, got {t!r}")
    ph = cmath.exp(-0.5j * params.omega * t)
    return Unitary2(ph, 0.0, 0.0, ph.conjugate())


def evolve(state: PureState, u: Unitary2) -> PureState:
    """Apply ``u`` to ``state``; renormalizes defensively if drift exceeds
    the normalization tolerance. The global phase is kept."""
    a = u.u11 * state.a + u.u12 * state.b
    b = u.u21 * state.a + u.u22 * state.b
    n2 = abs(a) ** 2 + abs(b) ** 2
    if abs(n2 - 1.0) > NORM_TOL:
        inv = 1.0 / math.sqrt(n2)
        a *= inv
        b *= inv
    return PureState(a, b)


def default_oracle_step(params: SystemParams) -> float:
    """Default integrator step: 1e-4 of the free-evolution period."""
    return 1e-4 * (2.0 * math.pi / params.omega)


def _integrate_fixed(state: PureState, params: SystemParams, f: float, t: float, h: float) -> PureState:
    n_full = int(t / h)
    rem = t - n_full * h
    a, b = state.a, state.b
    if n_full:
        a, b = _kernels.rk4_steps(a, b, params.omega, f, n_full, h)
    if rem > 1e-15 * max(t, 1.0):
        a, b = _kernels.rk4_steps(a, b, params.omega, f, 1, rem)
    return PureState(a, b)


def oracle_integrate(
    state: PureState,
    params: SystemParams,
    f: float,
    t: float,
    h: float | None = None,
) -> PureState:
    """Brute-force fixed-step reference evolution, independent of the
    closed-form propagator.

    With an explicit ``h`` the integration runs at exactly that step
    (``0 < h <= t`` required). Without one, the step starts at
    :func:`default_oracle_step` and is halved until two successive
    refinements agree within ``ORACLE_REFINE_TOL`` per amplitude.
    """
    if t < 0.0:
        raise ValueError(f"duration must be non-negative, got {t!r}")
    if t == 0.0:
        return state
    if h is not None:
        if h <= 0.0:
            raise ValueError(f"step size must be positive, got {h!r}")
        if h > t * (1.0 + 1e-12):
            raise ValueError(f"step size {h!r} exceeds the duration {t!r}")
        return _integrate_fixed(state, params, f, t, h)
    step = min(default_oracle_step(params), t)
    prev = _integrate_fixed(state, params, f, t, step)
    for _ in range(8):
        step *= 0.5
        cur = _integrate_fixed(state, params, f, t, step)
        if max(abs(cur.a - prev.a), abs(cur.b - prev.b)) <= ORACLE_REFINE_TOL:
            return cur
        prev = cur
    return prev
