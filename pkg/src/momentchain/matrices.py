"""Evolution matrices of the field-moment chain and their symmetry operators.

Moment vectors are indexed by the power of the second mode,
``A[j] = <a1^(N-j) a2^j>``, and evolve as ``dA/dt = M A``.  Row ``j`` of
``M`` couples to column ``j-1`` with ``-j*gamma`` and to column ``j+1``
with ``-(N-j)*gamma``; this placement follows from the adjoint master
equation and is pinned down by the Fock-space oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class DimerParams:
    """Rates of the anti-PT dimer.

    Attributes:
        delta: detuning of the two modes.
        gamma: incoherent intermode coupling, >= 0.
        big_gamma: local decay rate of each mode, >= 0.
        order: moment order N (the chain has N+1 sites).
    """

    delta: float
    gamma: float
    big_gamma: float = 0.0
    order: int = 1

    def __post_init__(self):
        if not np.isfinite([self.delta, self.gamma, self.big_gamma]).all():
            raise ConfigError("dimer rates must be finite")
        if self.gamma < 0 or self.big_gamma < 0:
            raise ConfigError(f"gamma and big_gamma must be >= 0, got {self.gamma}, {self.big_gamma}")
        if int(self.order) != self.order or self.order < 1:
            raise ConfigError(f"order must be an integer >= 1, got {self.order}")

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def stable(self) -> bool:
        """Positive-definite decoherence matrix (Gamma > gamma)."""
        return self.big_gamma > self.gamma

    def with_(self, **changes) -> "DimerParams":
        values = dict(delta=self.delta, gamma=self.gamma, big_gamma=self.big_gamma, order=self.order)
        values.update(changes)
        return DimerParams(**values)


@dataclass(frozen=True)
class GeneralDimerParams:
    """Dimer without any imposed symmetry, first-order matrix [[i w1, k1], [k2, i w2]]."""

    omega1: float
    omega2: float
    kappa1: float
    kappa2: float
    order: int = 1

    def __post_init__(self):
        if not np.isfinite([self.omega1, self.omega2, self.kappa1, self.kappa2]).all():
            raise ConfigError("dimer rates must be finite")
        if int(self.order) != self.order or self.order < 1:
            raise ConfigError(f"order must be an integer >= 1, got {self.order}")

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def omega(self) -> float:
        """Half the splitting, (omega2 - omega1) / 2."""
        return 0.5 * (self.omega2 - self.omega1)

    @property
    def omega_mean(self) -> float:
        return 0.5 * (self.omega1 + self.omega2)


@dataclass
class TridiagMatrix:
    """Complex tridiagonal matrix stored by bands.

    ``sub[j]`` sits at (j+1, j) and ``sup[j]`` at (j, j+1).
    """

    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=complex)
        self.sub = np.asarray(self.sub, dtype=complex)
        self.sup = np.asarray(self.sup, dtype=complex)
        self.n = self.diag.size
        if self.n < 1 or self.sub.size != self.n - 1 or self.sup.size != self.n - 1:
            raise ConfigError(
                f"band sizes {self.diag.size}/{self.sub.size}/{self.sup.size} are not n/n-1/n-1"
            )
        if not (np.isfinite(self.diag).all() and np.isfinite(self.sub).all() and np.isfinite(self.sup).all()):
            raise ConfigError("tridiagonal entries must be finite")

    def to_dense(self) -> np.ndarray:
        out = np.diag(self.diag)
        if self.n > 1:
            out += np.diag(self.sub, -1) + np.diag(self.sup, 1)
        return out

    def transpose(self) -> "TridiagMatrix":
        return TridiagMatrix(self.diag.copy(), self.sup.copy(), self.sub.copy())

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        y = self.diag * x
        y[1:] += self.sub * x[:-1]
        y[:-1] += self.sup * x[1:]
        return y

    def max_abs(self) -> float:
        return float(max(np.abs(self.diag).max(), np.abs(self.sub).max(initial=0.0), np.abs(self.sup).max(initial=0.0)))

    @classmethod
    def from_dense(cls, a, tol: float = 0.0) -> "TridiagMatrix":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigError(f"expected a square matrix, got shape {a.shape}")
        off = a - np.triu(np.tril(a, 1), -1)
        if np.abs(off).max(initial=0.0) > tol:
            raise ConfigError("matrix is not tridiagonal")
        return cls(np.diag(a).copy(), np.diag(a, -1).copy(), np.diag(a, 1).copy())


def _as_dense(m) -> np.ndarray:
    if isinstance(m, TridiagMatrix):
        return m.to_dense()
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {a.shape}")
    return a


def build_moment_matrix(p: DimerParams) -> TridiagMatrix:
    """Evolution matrix of the order-N moments in the lab frame.

    Diagonal ``-i(N-2j)delta - N*big_gamma``, row j couples to j-1 with
    ``-j*gamma`` and to j+1 with ``-(N-j)*gamma``.
    """
    N = p.order
    j = np.arange(N + 1)
    diag = -1j * (N - 2 * j) * p.delta - N * p.big_gamma
    sub = -(j[1:]) * p.gamma  # row j, column j-1
    sup = -(N - j[:-1]) * p.gamma  # row j, column j+1
    return TridiagMatrix(diag, sub.astype(complex), sup.astype(complex))


def build_general_moment_matrix(p: GeneralDimerParams) -> TridiagMatrix:
    N = p.order
    j = np.arange(N + 1)
    diag = 1j * ((N - j) * p.omega1 + j * p.omega2)
    sub = j[1:] * p.kappa2
    sup = (N - j[:-1]) * p.kappa1
    return TridiagMatrix(diag, sub.astype(complex), sup.astype(complex))


def first_order_matrix(p: DimerParams) -> np.ndarray:
    """2x2 evolution matrix of (<a1>, <a2>), equal to -i times the effective Hamiltonian."""
    return build_moment_matrix(p.with_(order=1)).to_dense()


def build_parity(n: int) -> np.ndarray:
    if n < 1:
        raise ConfigError(f"size must be >= 1, got {n}")
    return np.fliplr(np.eye(n, dtype=complex))


def build_chiral(n: int) -> np.ndarray:
    """Chiral operator: entry (p, n-1-p) equals (-1)^(p+1) i, zero elsewhere."""
    if n < 2 or n % 2:
        raise ConfigError(f"chiral operator needs an even size, got {n}")
    chi = np.zeros((n, n), dtype=complex)
    p = np.arange(n)
    chi[p, n - 1 - p] = (-1.0) ** (p + 1) * 1j
    return chi


def check_pt_invariance(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff P conj(M) P equals M entrywise within tol."""
    a = _as_dense(m)
    P = build_parity(a.shape[0])
    return bool(np.abs(P @ a.conj() @ P - a).max() <= tol)


def check_chirality(m, tol: float = DEFAULT_TOL) -> bool:
    """True iff chi M chi^dagger = -M entrywise within tol (even sizes only)."""
    a = _as_dense(m)
    chi = build_chiral(a.shape[0])
    return bool(np.abs(chi @ a @ chi.conj().T + a).max() <= tol)


def _kron_sum(a: np.ndarray, N: int) -> np.ndarray:
    d = a.shape[0]
    out = np.zeros((d**N, d**N), dtype=complex)
    for slot in range(N):
        out += np.kron(np.kron(np.eye(d**slot), a), np.eye(d ** (N - slot - 1)))
    return out


def symmetric_embedding(N: int) -> np.ndarray:
    """2^N x (N+1) indicator matrix; column q marks index strings with q entries equal to mode 2."""
    E = np.zeros((2**N, N + 1))
    for idx, bits in enumerate(itertools.product((0, 1), repeat=N)):
        E[idx, sum(bits)] = 1.0
    return E


def kron_sum_construct(first_order, N: int) -> np.ndarray:
    """Order-N moment matrix from the first-order one via an N-fold Kronecker sum.

    The product state x (x) ... (x) x of first-order moments evolves under the
    Kronecker sum; restricting it to the symmetric subspace gives the moment
    matrix of ``<a1^(N-q) a2^q>``.
    """
    a = np.asarray(first_order, dtype=complex)
    if a.shape != (2, 2):
        raise ConfigError(f"first-order matrix must be 2x2, got {a.shape}")
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}")
    if N == 1:
        return a.copy()
    E = symmetric_embedding(N)
    left = np.linalg.pinv(E)
    return left @ _kron_sum(a, N) @ E
