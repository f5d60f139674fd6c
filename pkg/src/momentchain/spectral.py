"""Closed-form spectrum and right eigenvectors of the moment chain."""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import ConfigError
from .matrices import DimerParams, TridiagMatrix

EP_TOL = 1e-12
NEAR_EP = 1e-6


@dataclass
class EigenPair:
    """Eigenvalue ``energy`` with right eigenvector ``vector`` for quantum number ``k``.

    ``vector`` has unit 2-norm and its first largest-magnitude component is
    real and positive.  ``degeneracy`` is the number of coalesced
    eigenvalues (the chain size at the exceptional point, 1 elsewhere).
    """

    k: int
    energy: complex
    vector: np.ndarray
    degeneracy: int = 1
    ill_conditioned: bool = False


def principal_sqrt(z) -> complex:
    """Principal square root with a signed-zero imaginary part treated as +0."""
    z = complex(z)
    if z.imag == 0:
        z = complex(z.real, 0.0)
    return cmath.sqrt(z)


def _alpha(delta, gamma) -> complex:
    return principal_sqrt(complex(gamma) ** 2 - complex(delta) ** 2)


def fix_gauge(v) -> np.ndarray:
    """Unit-normalize and rotate the phase so the first dominant entry is real positive."""
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    v = v / norm
    mags = np.abs(v)
    ref = int(np.flatnonzero(mags >= (1 - 1e-9) * mags.max())[0])
    return v * (abs(v[ref]) / v[ref])


def chain_vector(order: int, k: int, delta, gamma) -> np.ndarray:
    """Unnormalized right eigenvector ``k`` of the chain with rates (delta, gamma).

    Closed form in s = alpha - i delta, t = alpha + i delta,
    alpha = sqrt(gamma^2 - delta^2), m = min(k, i), M = max(k, i):

        psi_k(i) = (-1)^m / (C(N, m) gamma^i) * (-t)^(i-m)
                   * sum_l C(N-M, l) C(M, m-l) (-s)^(m-l) t^l

    The prefactor is the product of the band factors
    b_l = -l (N+1-l) gamma collapsed into binomials, which avoids
    overflowing factorials at large N.  ``gamma`` may be any nonzero
    complex number.
    """
    N = int(order)
    if not 0 <= k <= N:
        raise ConfigError(f"k must lie in [0, {N}], got {k}")
    gamma = complex(gamma)
    if gamma == 0:
        raise ConfigError("gamma = 0 decouples the chain; no closed-form eigenvectors")
    alpha = _alpha(delta, gamma)
    s = alpha - 1j * delta
    t = alpha + 1j * delta

    i = np.arange(N + 1)
    m = np.minimum(k, i)
    M = np.maximum(k, i)
    ell = np.arange(N + 1)[None, :]
    mm = m[:, None]
    mask = ell <= mm
    expo = np.where(mask, mm - ell, 0)
    terms = comb(N - M[:, None], ell) * comb(M[:, None], expo) * (-s) ** expo * t ** np.where(mask, ell, 0)
    poly = np.where(mask, terms, 0).sum(axis=1)
    pref = (-1.0) ** m / comb(N, m) * (-t) ** (i - m) / gamma**i
    return pref * poly


def _near_ep(p: DimerParams) -> float:
    return abs(abs(p.delta) - p.gamma) / p.gamma


def eigenvalues(p: DimerParams) -> np.ndarray:
    """E_k = (N - 2k) sqrt(gamma^2 - delta^2) - N big_gamma, ordered by k."""
    N = p.order
    k = np.arange(N + 1)
    if p.gamma > 0 and _near_ep(p) <= EP_TOL:
        alpha = 0j
    else:
        alpha = _alpha(p.delta, p.gamma)
    return (N - 2 * k) * alpha - N * p.big_gamma + 0j


def is_at_ep(p: DimerParams, tol: float = EP_TOL) -> bool:
    return p.gamma > 0 and _near_ep(p) <= tol


def ep_eigenvector(p: DimerParams) -> EigenPair:
    """The single coalesced eigenvector at |delta| = gamma.

    Components go as (-i delta/gamma)^j, i.e. (-i)^j for delta = gamma with
    the band placement used here.
    """
    if not is_at_ep(p):
        raise ConfigError(f"not at the exceptional point: delta={p.delta}, gamma={p.gamma}")
    ratio = -1j * np.sign(p.delta)
    v = ratio ** np.arange(p.order + 1)
    return EigenPair(
        k=0,
        energy=complex(-p.order * p.big_gamma),
        vector=fix_gauge(v),
        degeneracy=p.size,
    )


def analytic_eigenvector(p: DimerParams, k: int) -> EigenPair:
    if p.gamma == 0:
        raise ConfigError("gamma = 0: band factors vanish, eigenvectors are not defined by the closed form")
    if is_at_ep(p):
        pair = ep_eigenvector(p)
        pair.k = k
        return pair
    v = chain_vector(p.order, k, p.delta, p.gamma)
    energy = (p.order - 2 * k) * _alpha(p.delta, p.gamma) - p.order * p.big_gamma
    return EigenPair(k=k, energy=complex(energy), vector=fix_gauge(v), ill_conditioned=_near_ep(p) < NEAR_EP)


def eigenpairs(p: DimerParams) -> list[EigenPair]:
    return [analytic_eigenvector(p, k) for k in range(p.size)]


def edge_modes(p: DimerParams) -> tuple[EigenPair, EigenPair]:
    """Modes k=0 and k=N, whose components are pure powers of one ratio.

    psi_0(j) = (-(alpha + i delta)/gamma)^j and psi_N(j) = ((alpha - i delta)/gamma)^j.
    Both ratios have unit modulus below the exceptional point; above it they
    are -i beta with real beta, beta > 1 for k=0 and beta < 1 for k=N.
    """
    if p.gamma <= 0:
        raise ConfigError("edge modes need gamma > 0")
    if is_at_ep(p):
        ep = ep_eigenvector(p)
        last = EigenPair(p.order, ep.energy, ep.vector.copy(), ep.degeneracy)
        return ep, last
    ratios = edge_ratios(p.delta, p.gamma)
    j = np.arange(p.size)
    energies = eigenvalues(p)
    return (
        EigenPair(0, complex(energies[0]), fix_gauge(ratios[0] ** j)),
        EigenPair(p.order, complex(energies[-1]), fix_gauge(ratios[1] ** j)),
    )


def edge_ratios(delta, gamma) -> tuple[complex, complex]:
    """Component ratios a2/a1 of the first-order eigenvectors for E = +alpha and E = -alpha."""
    alpha = _alpha(delta, gamma)
    return -(alpha + 1j * delta) / gamma, (alpha - 1j * delta) / gamma


def residual(m, pair: EigenPair) -> float:
    """||M psi - E psi||_2 / ||psi||_2."""
    a = m.to_dense() if isinstance(m, TridiagMatrix) else np.asarray(m)
    v = pair.vector
    return float(np.linalg.norm(a @ v - pair.energy * v) / np.linalg.norm(v))


def effective_hamiltonian(p: DimerParams) -> np.ndarray:
    """2x2 effective non-Hermitian Hamiltonian in the mode basis (a1, a2)."""
    return np.array(
        [
            [p.delta - 1j * p.big_gamma, -1j * p.gamma],
            [-1j * p.gamma, -p.delta - 1j * p.big_gamma],
        ]
    )


@dataclass(frozen=True)
class Z2Result:
    """Sign of the chain determinant; ``nu`` is None at the exceptional point or for a zero mode."""

    nu: int | None
    applicable: bool
    at_ep: bool


def z2_invariant(p: DimerParams) -> Z2Result:
    """nu = sgn det M for the gauged (big_gamma = 0) chain.

    The determinant is the product of the closed-form eigenvalues, accumulated
    as a phase so large chains do not overflow.  The sign is a topological
    invariant only for n = 2k with k odd; ``applicable`` reports that.
    """
    if p.big_gamma != 0:
        raise ConfigError("z2_invariant is defined for the gauged frame, big_gamma = 0")
    n = p.size
    applicable = n % 2 == 0 and (n // 2) % 2 == 1
    energies = eigenvalues(p)
    at_ep = is_at_ep(p)
    if at_ep or np.any(energies == 0):
        return Z2Result(None, applicable, at_ep)
    phase = 1.0 + 0j
    for e in energies:
        phase *= e / abs(e)
    # det of a PT-symmetric matrix is real
    nu = 1 if phase.real > 0 else -1
    return Z2Result(nu, applicable, False)


def charpoly(m) -> np.ndarray:
    """Characteristic polynomial coefficients (highest power first) via Faddeev-LeVerrier."""
    a = m.to_dense() if isinstance(m, TridiagMatrix) else np.asarray(m, dtype=complex)
    n = a.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        Mk = a @ Mk + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ Mk) / k)
    return np.array(coeffs)


def _check_indices(order: int, ks) -> list[int]:
    ks = list(range(order + 1)) if ks is None else [int(k) for k in ks]
    for k in ks:
        if not 0 <= k <= order:
            raise ConfigError(f"k={k} outside [0, {order}]")
    return ks


def spectrum_rows(p: DimerParams, ratios) -> list[tuple[float, int, float, float]]:
    """(delta/gamma, k, Re E, Im E) for each ratio on the grid."""
    rows = []
    for r in ratios:
        q = p.with_(delta=float(r) * p.gamma)
        for k, e in enumerate(eigenvalues(q)):
            rows.append((float(r), k, float(e.real), float(e.imag)))
    return rows


def mode_rows(p: DimerParams, ratios, ks=None) -> list[tuple[float, int, int, float, float, float]]:
    """(delta/gamma, k, site, Re psi, Im psi, |psi|^2) for the requested modes."""
    ks = _check_indices(p.order, ks)
    rows = []
    for r in ratios:
        q = p.with_(delta=float(r) * p.gamma)
        for k in ks:
            v = analytic_eigenvector(q, k).vector
            for site, z in enumerate(v):
                rows.append((float(r), k, site, float(z.real), float(z.imag), float(abs(z) ** 2)))
    return rows

