"""Brute-force reference: the two-mode master equation in a truncated Fock space.

The density matrix lives on |n1> (x) |n2> with n1, n2 <= cutoff and is
integrated with fixed-step RK4.  Field moments extracted from it are compared
against propagation of the moment matrix, which pins down the band placement
and the sign of the local decay term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import coherent_moments, propagate
from .errors import ConfigError, CutoffError, NumericError
from .matrices import DimerParams, TridiagMatrix, build_moment_matrix

PASS_THRESHOLD = 1e-5
TRACE_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class FockConfig:
    cutoff: int = 10
    dt: float = 0.01
    t_max: float = 2.0

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ConfigError(f"cutoff must be an integer >= 2, got {self.cutoff}")
        if self.dt <= 0 or self.t_max < self.dt:
            raise ConfigError(f"need dt > 0 and t_max >= dt, got dt={self.dt}, t_max={self.t_max}")

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2


def _lowering(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def mode_operators(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated a1 = a (x) 1 and a2 = 1 (x) a."""
    a = _lowering(cutoff)
    eye = np.eye(cutoff + 1)
    return np.kron(a, eye), np.kron(eye, a)


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    amps = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * complex(alpha) ** n
    return amps / np.linalg.norm(amps)


def coherent_density_matrix(alpha1: complex, alpha2: complex, cfg: FockConfig) -> np.ndarray:
    """Projector on the normalized, truncated product coherent state."""
    for a in (alpha1, alpha2):
        r = abs(a)
        if r * r + 6 * r + 4 > cfg.cutoff:
            raise CutoffError(f"cutoff {cfg.cutoff} too small for |alpha| = {r:.3g} (need >= {r * r + 6 * r + 4:.3g})")
    psi = np.kron(_coherent_amplitudes(alpha1, cfg.cutoff), _coherent_amplitudes(alpha2, cfg.cutoff))
    return np.outer(psi, psi.conj())


class Lindbladian:
    """Right-hand side of the master equation for the symmetric decoherence matrix.

    d rho/dt = -i[H, rho] + sum_jk g_jk (2 a_j rho a_k^+ - a_k^+ a_j rho - rho a_k^+ a_j)
    with H = delta (n1 - n2), g_11 = g_22 = big_gamma and g_12 = g_21 = gamma.
    """

    def __init__(self, p: DimerParams, cutoff: int):
        if p.big_gamma < p.gamma:
            raise ConfigError(
                f"decoherence matrix is not positive semidefinite (big_gamma={p.big_gamma} < gamma={p.gamma})"
            )
        self.params = p
        a1, a2 = mode_operators(cutoff)
        ops = (a1, a2)
        rates = np.array([[p.big_gamma, p.gamma], [p.gamma, p.big_gamma]])
        H = p.delta * (a1.conj().T @ a1 - a2.conj().T @ a2)
        K = sum(rates[j, k] * ops[k].conj().T @ ops[j] for j in range(2) for k in range(2))
        self._G = -1j * H - K
        self._jumps = [(2 * rates[j, k], ops[j], ops[k].conj().T) for j in range(2) for k in range(2) if rates[j, k] != 0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = self._G @ rho + rho @ self._G.conj().T
        for w, left, right in self._jumps:
            out += w * (left @ rho @ right)
        return out

    def step(self, rho: np.ndarray, dt: float) -> np.ndarray:
        k1 = self(rho)
        k2 = self(rho + 0.5 * dt * k1)
        k3 = self(rho + 0.5 * dt * k2)
        k4 = self(rho + dt * k3)
        return rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def lindblad_step(rho: np.ndarray, p: DimerParams, dt: float, cutoff: int | None = None) -> np.ndarray:
    """One RK4 step of the master equation; aborts if the trace drifts by more than 1e-6."""
    rho = np.asarray(rho, dtype=complex)
    if cutoff is None:
        cutoff = int(round(math.sqrt(rho.shape[0]))) - 1
    if (cutoff + 1) ** 2 != rho.shape[0]:
        raise ConfigError(f"density matrix of size {rho.shape[0]} does not match cutoff {cutoff}")
    new = Lindbladian(p, cutoff).step(rho, dt)
    drift = abs(np.trace(new) - np.trace(rho))
    if drift > TRACE_DRIFT_LIMIT:
        raise NumericError(f"trace drift {drift:.3g} in one step exceeds {TRACE_DRIFT_LIMIT:g}")
    return new


def extract_moments(rho: np.ndarray, order: int, cutoff: int | None = None) -> np.ndarray:
    """Entry j = Tr[rho a1^(N-j) a2^j]."""
    rho = np.asarray(rho, dtype=complex)
    if cutoff is None:
        cutoff = int(round(math.sqrt(rho.shape[0]))) - 1
    if order > cutoff:
        raise CutoffError(f"moment order {order} exceeds the cutoff {cutoff}")
    a1, a2 = mode_operators(cutoff)
    pow1 = [np.eye(rho.shape[0], dtype=complex)]
    pow2 = [np.eye(rho.shape[0], dtype=complex)]
    for _ in range(order):
        pow1.append(pow1[-1] @ a1)
        pow2.append(pow2[-1] @ a2)
    # Tr[rho X] = sum(rho.T * X)
    return np.array([np.sum(rho.T * (pow1[order - j] @ pow2[j])) for j in range(order + 1)])


def leakage(rho: np.ndarray, cutoff: int) -> float:
    """Population in the two highest Fock levels of either mode."""
    pops = np.real(np.diag(rho)).reshape(cutoff + 1, cutoff + 1)
    top = slice(cutoff - 1, cutoff + 1)
    return float(max(pops[top, :].sum(), pops[:, top].sum()))


@dataclass
class OracleRun:
    times: np.ndarray
    moments: np.ndarray
    max_trace_drift: float
    max_hermiticity_error: float
    max_leakage: float


def run_oracle(p: DimerParams, alpha1: complex, alpha2: complex, order: int, cfg: FockConfig) -> OracleRun:
    """Integrate from the coherent state and record moments at every step."""
    rho = coherent_density_matrix(alpha1, alpha2, cfg)
    L = Lindbladian(p, cfg.cutoff)
    steps = int(round(cfg.t_max / cfg.dt))
    a1, a2 = mode_operators(cfg.cutoff)
    ops = [np.linalg.matrix_power(a1, order - j) @ np.linalg.matrix_power(a2, j) for j in range(order + 1)]
    opsT = np.array([op.T for op in ops])

    moments = np.empty((steps + 1, order + 1), dtype=complex)
    moments[0] = np.einsum("jab,ab->j", opsT, rho)
    drift = herm = 0.0
    leak = leakage(rho, cfg.cutoff)
    for i in range(1, steps + 1):
        new = L.step(rho, cfg.dt)
        step_drift = abs(np.trace(new) - np.trace(rho))
        if step_drift > TRACE_DRIFT_LIMIT:
            raise NumericError(f"trace drift {step_drift:.3g} at step {i}")
        rho = new
        drift = max(drift, abs(np.trace(rho) - 1.0))
        herm = max(herm, float(np.abs(rho - rho.conj().T).max()))
        leak = max(leak, leakage(rho, cfg.cutoff))
        moments[i] = np.einsum("jab,ab->j", opsT, rho)
    return OracleRun(cfg.dt * np.arange(steps + 1), moments, drift, herm, leak)


@dataclass
class OracleReport:
    max_rel_error: float
    per_time: list[float]
    cutoff: int
    leakage: float
    threshold: float = PASS_THRESHOLD
    frame: str = "lab"
    diagnosis: str = ""
    trace_drift: float = 0.0
    alternatives: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.threshold

    def to_json(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "per_time": list(self.per_time),
            "cutoff": self.cutoff,
            "leakage": self.leakage,
            "threshold": self.threshold,
            "frame": self.frame,
            "passed": self.passed,
            "trace_drift": self.trace_drift,
            "diagnosis": self.diagnosis,
            "alternatives": dict(self.alternatives),
        }


def _relative_errors(reference: np.ndarray, candidate: np.ndarray) -> np.ndarray:
    scale = np.abs(candidate).max(axis=1)
    scale[scale == 0] = 1.0
    return np.abs(reference - candidate).max(axis=1) / scale


def _matrix_moments(m: TridiagMatrix, a0, cfg: FockConfig) -> np.ndarray:
    return propagate(m, a0, cfg.t_max, cfg.dt).states


def differential_test(
    p: DimerParams,
    alpha1: complex,
    alpha2: complex,
    order: int,
    cfg: FockConfig,
    frame: str = "lab",
    matrix: TridiagMatrix | None = None,
) -> OracleReport:
    """Max relative moment error between the Fock oracle and the moment matrix.

    The error at each sample is max_j |A_oracle - A_matrix| / max_j |A_matrix|.
    In the "gauged" frame oracle moments are multiplied by exp(N big_gamma t)
    and compared with the big_gamma = 0 matrix.  ``matrix`` substitutes the
    matrix under test (used to check that a wrong convention is detected).
    On failure the report names whichever alternative convention fits best.
    """
    if not p.stable:
        raise ConfigError(f"oracle runs need big_gamma > gamma, got big_gamma={p.big_gamma}, gamma={p.gamma}")
    if frame not in ("lab", "gauged"):
        raise ConfigError(f"frame must be 'lab' or 'gauged', got {frame!r}")
    limit = 0.01 / max(abs(p.delta), p.gamma, p.big_gamma)
    if cfg.dt > limit * (1 + 1e-12):
        raise ConfigError(f"dt={cfg.dt} exceeds 0.01/max rate = {limit:.3g}")
    q = p.with_(order=order)
    run = run_oracle(q, alpha1, alpha2, order, cfg)
    reference = run.moments
    if frame == "gauged":
        reference = reference * np.exp(order * p.big_gamma * run.times)[:, None]
        q = q.with_(big_gamma=0.0)
    a0 = coherent_moments(alpha1, alpha2, order)

    base = build_moment_matrix(q)
    tested = base if matrix is None else matrix
    per_time = _relative_errors(reference, _matrix_moments(tested, a0, cfg))
    report = OracleReport(
        max_rel_error=float(per_time.max()),
        per_time=[float(x) for x in per_time],
        cutoff=cfg.cutoff,
        leakage=run.max_leakage,
        frame=frame,
        trace_drift=run.max_trace_drift,
    )
    if not report.passed:
        flipped = TridiagMatrix(base.diag + 2 * order * p.big_gamma if frame == "lab" else base.diag, base.sub, base.sup)
        candidates = {
            "convention as implemented": base,
            "bands transposed": base.transpose(),
            "local decay sign flipped": flipped,
            "bands transposed and decay sign flipped": flipped.transpose(),
        }
        for name, cand in candidates.items():
            report.alternatives[name] = float(_relative_errors(reference, _matrix_moments(cand, a0, cfg)).max())
        best = min(report.alternatives, key=report.alternatives.get)
        report.diagnosis = f"error {report.max_rel_error:.3g} above {report.threshold:g}; best matching convention: {best}"
    return report
