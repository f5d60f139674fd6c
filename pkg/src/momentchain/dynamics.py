"""Time evolution of moment vectors, dA/dt = M A, and per-component rate fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, MomentOverflowError
from .matrices import TridiagMatrix

OVERFLOW_LIMIT = 1e120


def coherent_moments(alpha1: complex, alpha2: complex, order: int) -> np.ndarray:
    """Moments of the product coherent state |alpha1, alpha2>: entry j = alpha1^(N-j) alpha2^j."""
    if int(order) != order or order < 1:
        raise ConfigError(f"order must be an integer >= 1, got {order}")
    j = np.arange(order + 1)
    return complex(alpha1) ** (order - j) * complex(alpha2) ** j


@dataclass
class Trajectory:
    """Moment vectors ``states[i]`` sampled at ``times[i]`` (units of 1/gamma)."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.ndim != 2 or self.states.shape[0] != self.times.size:
            raise ConfigError("states must be (len(times), n)")

    @property
    def order(self) -> int:
        return self.states.shape[1] - 1

    def rows(self):
        """(t, j, Re, Im) rows in time-major order."""
        for t, state in zip(self.times, self.states):
            for j, z in enumerate(state):
                yield float(t), j, float(z.real), float(z.imag)


def step_propagator(m, dt: float) -> np.ndarray:
    """exp(M dt) by scaling and squaring with a Pade approximant."""
    a = m.to_dense() if isinstance(m, TridiagMatrix) else np.asarray(m, dtype=complex)
    return expm(a * dt)


def propagate(m, a0, t_max: float, dt: float) -> Trajectory:
    """Sample A(t) = exp(M t) A0 at t = 0, dt, 2 dt, ... up to t_max.

    Raises MomentOverflowError once any moment exceeds 1e120 in magnitude,
    which happens quickly for growing modes in the broken phase.
    """
    if dt <= 0 or t_max < dt:
        raise ConfigError(f"need dt > 0 and t_max >= dt, got dt={dt}, t_max={t_max}")
    a0 = np.asarray(a0, dtype=complex)
    n = m.n if isinstance(m, TridiagMatrix) else np.asarray(m).shape[0]
    if a0.shape != (n,):
        raise ConfigError(f"initial vector has shape {a0.shape}, matrix is {n}x{n}")
    steps = int(round(t_max / dt))
    U = step_propagator(m, dt)
    states = np.empty((steps + 1, n), dtype=complex)
    states[0] = a0
    for i in range(1, steps + 1):
        states[i] = U @ states[i - 1]
        peak = np.abs(states[i]).max()
        if not peak <= OVERFLOW_LIMIT:
            raise MomentOverflowError(
                f"moment magnitude {peak:.3g} exceeds {OVERFLOW_LIMIT:g} at t={i * dt:.6g}; "
                "the linear model is only meaningful for shorter times"
            )
    return Trajectory(dt * np.arange(steps + 1), states)


@dataclass
class RateFit:
    """Complex log-slopes per component; ``excluded`` lists components that passed near zero."""

    rates: np.ndarray
    excluded: list[int] = field(default_factory=list)
    uniform: bool = False
    tolerance: float = 0.01

    def spread(self) -> float:
        """(max - min) of the fitted rates relative to their mean modulus, over fitted components."""
        r = self.rates[np.isfinite(self.rates)]
        if r.size == 0:
            return float("nan")
        scale = np.abs(r).mean()
        width = max(np.abs(a - b) for a in r for b in r)
        return float(width / scale) if scale > 0 else float(width)

    def to_json(self) -> dict:
        return {
            "rates": [[float(z.real), float(z.imag)] if np.isfinite(z) else [None, None] for z in self.rates],
            "uniform": bool(self.uniform),
            "tolerance": float(self.tolerance),
            "excluded": list(self.excluded),
        }


def fit_component_rates(traj: Trajectory, tolerance: float = 0.01, zero_floor: float = 1e-8) -> RateFit:
    """Least-squares fit of log A_j(t) = rate_j t + c_j for every component.

    The phase is unwrapped before fitting, so the imaginary part of a rate is
    an angular frequency.  Components whose modulus drops below
    ``zero_floor`` times their own maximum are excluded (rate NaN).  The fit
    is uniform when every fitted rate lies within ``tolerance`` of their
    mean, relative to its modulus.
    """
    t = traj.times
    if t.size < 10:
        raise ConfigError(f"need at least 10 samples to fit rates, got {t.size}")
    n = traj.states.shape[1]
    rates = np.full(n, np.nan + 0j)
    excluded = []
    design = np.vstack([t, np.ones_like(t)]).T
    for j in range(n):
        z = traj.states[:, j]
        mag = np.abs(z)
        if mag.max() == 0 or mag.min() <= zero_floor * mag.max():
            excluded.append(j)
            continue
        logs = np.log(mag) + 1j * np.unwrap(np.angle(z))
        coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
        rates[j] = coef[0]
    fitted = rates[np.isfinite(rates)]
    uniform = False
    if fitted.size:
        mean = fitted.mean()
        scale = abs(mean)
        dev = np.abs(fitted - mean).max()
        uniform = bool(dev <= tolerance * scale) if scale > 0 else bool(dev <= tolerance)
    return RateFit(rates, excluded, uniform, tolerance)
