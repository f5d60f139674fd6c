"""Localization measures, skin-mode classification and the general-dimer phase diagram."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .matrices import DimerParams, GeneralDimerParams, TridiagMatrix, build_general_moment_matrix, build_moment_matrix
from .spectral import EigenPair, analytic_eigenvector, chain_vector, fix_gauge, principal_sqrt

EXTENDED = "extended"
LEFT_EDGE = "left_edge"
RIGHT_EDGE = "right_edge"
BULK_SITE = "bulk_site"
CENTER_DELOCALIZED = "center_delocalized"

_MIRROR = {LEFT_EDGE: RIGHT_EDGE, RIGHT_EDGE: LEFT_EDGE}


def ipr(vector) -> float:
    """Inverse participation ratio sum|psi|^4 / (sum|psi|^2)^2, between 1/n and 1."""
    p = np.abs(np.asarray(vector, dtype=complex)) ** 2
    total = p.sum()
    if total == 0 or not np.isfinite(total):
        raise ValueError("IPR of a zero or non-finite vector is undefined")
    p = p / total
    return float((p**2).sum())


def edge_window(n: int) -> int:
    return max(2, math.ceil(n / 10))


@dataclass(frozen=True)
class LocalizationReport:
    """Classification of one eigenmode.

    ``side`` is the sign of the centre-of-mass offset from the chain centre
    (-1 left, +1 right, 0 centred within tolerance); ``site`` is the
    localization site for ``bulk_site`` and the peak otherwise.
    """

    k: int | None
    ipr: float
    left_weight: float
    right_weight: float
    peak_site: int
    kind: str
    site: int
    side: int
    center_of_mass: float

    def mirrored(self, n: int) -> tuple[str, int, int]:
        return _MIRROR.get(self.kind, self.kind), n - 1 - self.site, -self.side


def classify_mode(
    vector,
    k: int | None = None,
    extended_factor: float = 2.0,
    edge_threshold: float = 0.8,
    bulk_threshold: float = 0.5,
    window: int | None = None,
    side_tol: float = 1e-9,
) -> LocalizationReport:
    """Assign one of extended / bulk_site / left_edge / right_edge / center_delocalized.

    Rules, first match wins: IPR below ``extended_factor/n`` is extended; more
    than ``edge_threshold`` of the weight in the outer ``window`` sites of one
    side (strictly more than the other side) is an edge mode; IPR above ``bulk_threshold`` with a peak away from
    both end sites is a bulk site; anything else is centre-delocalized.
    """
    v = np.asarray(vector, dtype=complex)
    n = v.size
    if n < 2:
        raise ConfigError("classification needs at least two sites")
    p = np.abs(v) ** 2
    p = p / p.sum()
    m = edge_window(n) if window is None else int(window)
    value = float((p**2).sum())
    left, right = float(p[:m].sum()), float(p[-m:].sum())
    peak = int(np.argmax(p))
    com = float(np.dot(np.arange(n), p))
    offset = com - (n - 1) / 2
    side = 0 if abs(offset) <= side_tol * n else (1 if offset > 0 else -1)

    if value < extended_factor / n:
        kind = EXTENDED
    elif right > edge_threshold and right - left > side_tol:
        kind = RIGHT_EDGE
    elif left > edge_threshold and left - right > side_tol:
        kind = LEFT_EDGE
    elif value > bulk_threshold and 0 < peak < n - 1:
        kind = BULK_SITE
    else:
        kind = CENTER_DELOCALIZED
    return LocalizationReport(k, value, left, right, peak, kind, peak, side, com)


def ipr_scan(p: DimerParams, ratios, ks=None) -> list[tuple[float, int, float]]:
    """Rows (delta/gamma, k, IPR) over an increasing grid of delta/gamma."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.ndim != 1 or ratios.size == 0 or np.any(np.diff(ratios) <= 0):
        raise ConfigError("delta/gamma grid must be non-empty and strictly increasing")
    ks = list(range(p.size)) if ks is None else [int(k) for k in ks]
    rows = []
    for r in ratios:
        q = p.with_(delta=float(r) * p.gamma)
        for k in ks:
            rows.append((float(r), k, ipr(analytic_eigenvector(q, k).vector)))
    return rows


@dataclass
class Similarity:
    """Diagonals of S1 (PT chain), S2 (general chain) and T = S2 S1^-1, normalized to max|T| = 1."""

    s1: np.ndarray
    s2: np.ndarray
    t: np.ndarray


def _band_gauge(m: TridiagMatrix) -> np.ndarray:
    if np.any(m.sub == 0) or np.any(m.sup == 0):
        raise ConfigError("vanishing off-diagonal band: similarity transform undefined")
    ratios = np.sqrt(m.sub / m.sup)
    return np.concatenate(([1.0 + 0j], np.cumprod(ratios)))


def similarity_transforms(m_pt: TridiagMatrix, l: TridiagMatrix) -> Similarity:
    """Diagonal gauges with S_jj = prod_k sqrt(X[k, k-1] / X[k-1, k]) and S_00 = 1."""
    if m_pt.n != l.n:
        raise ConfigError(f"size mismatch {m_pt.n} vs {l.n}")
    s1 = _band_gauge(m_pt)
    s2 = _band_gauge(l)
    t = s2 / s1
    return Similarity(s1, s2, t / np.abs(t).max())


@dataclass
class GeneralModes:
    """Right eigenmodes of the general chain plus the data that produced them."""

    pairs: list[EigenPair]
    transform: Similarity
    pt_delta: float
    pt_gamma: complex
    complex_coupling: bool
    on_exceptional_surface: bool


def general_eigenvalues(p: GeneralDimerParams) -> np.ndarray:
    """i N (w1+w2)/2 + (N-2k) sqrt(k1 k2 - w^2), ordered by k."""
    N = p.order
    alpha = principal_sqrt(complex(p.kappa1) * p.kappa2 - p.omega**2)
    return 1j * N * p.omega_mean + (N - 2 * np.arange(N + 1)) * alpha


def general_eigenmodes(p: GeneralDimerParams, ep_tol: float = 1e-12) -> GeneralModes:
    """Eigenmodes of the general moment matrix built from the PT chain.

    Gauge out the mean rate, map onto the PT chain with delta = w and
    gamma = sqrt(k1 k2), then apply the diagonal squeezer T = S2 S1^-1.
    """
    if p.kappa1 * p.kappa2 == 0:
        raise ConfigError("kappa1 * kappa2 must be nonzero")
    N = p.order
    delta = p.omega
    L = build_general_moment_matrix(p)
    # S1 only sees the band ratios k/(N-k+1), which do not depend on the PT rates
    pt = build_moment_matrix(DimerParams(delta=0.0, gamma=1.0, order=N))
    sim = similarity_transforms(pt, L)
    # T^-1 L T - i N w_mean is the PT chain with bands -g_pt: g_pt = +-sqrt(k1 k2)
    g_pt = complex(-p.kappa1 * sim.t[1] / sim.t[0])
    # snap onto the exact axis so the sqrt branch matches general_eigenvalues
    g_pt = complex(0.0, g_pt.imag) if p.kappa1 * p.kappa2 < 0 else complex(g_pt.real, 0.0)
    energies = general_eigenvalues(p)
    scale = max(abs(delta), abs(g_pt))
    at_ep = abs(g_pt**2 - delta**2) <= ep_tol * scale**2

    pairs = []
    for k in range(N + 1):
        if at_ep:
            base = (-1j * delta / g_pt) ** np.arange(N + 1)
        else:
            base = chain_vector(N, k, delta, g_pt)
        v = fix_gauge(sim.t * base)
        pairs.append(EigenPair(k, complex(energies[k]), v, degeneracy=N + 1 if at_ep else 1))
    return GeneralModes(pairs, sim, delta, g_pt, p.kappa1 * p.kappa2 < 0, bool(at_ep))


PHASES = ("I", "II", "III", "IV")
BOUNDARY = "boundary"


@dataclass(frozen=True)
class PhasePoint:
    kappa1: float
    kappa2: float
    omega1: float
    omega2: float
    phase: str
    on_exceptional_surface: bool


def on_exceptional_surface(p: GeneralDimerParams, tol: float = 1e-9) -> bool:
    scale = max(p.omega1**2, p.omega2**2, abs(p.kappa1 * p.kappa2), 1e-300)
    return abs((p.omega1 - p.omega2) ** 2 - 4 * p.kappa1 * p.kappa2) <= tol * scale


def phase_from_sides(sides) -> str:
    """Phase label from per-mode sides (+1 right, -1 left, 0 centred), ordered by k."""
    sides = list(sides)
    n = len(sides)
    right = sum(s == 1 for s in sides)
    left = sum(s == -1 for s in sides)
    if right == n:
        return "I"
    if left == n:
        return "II"
    if right > n / 2 and sides[-1] == -1:
        return "III"
    if left > n / 2 and sides[0] == 1:
        return "IV"
    return BOUNDARY


def phase_classify(p: GeneralDimerParams, tol: float = 1e-9) -> PhasePoint:
    """Localization phase of all right eigenmodes of the general chain.

    I: every mode on the right edge.  II: every mode on the left.
    III: a strict majority on the right with psi_N on the left.
    IV: a strict majority on the left with psi_0 on the right.
    Points within ``tol`` of kappa1 = kappa2 or |kappa1 + kappa2| = 2|w| are
    labelled ``boundary``.  Each mode's edge is the side of its centre of mass.
    """
    if p.omega == 0:
        raise ConfigError("phase classification needs omega1 != omega2")
    if p.kappa1 * p.kappa2 <= 0:
        raise ConfigError("phase classification covers kappa1 * kappa2 > 0 only")
    es = on_exceptional_surface(p, tol)
    scale = max(abs(p.kappa1), abs(p.kappa2), abs(p.omega))
    if abs(p.kappa1 - p.kappa2) <= tol * scale or abs(abs(p.kappa1 + p.kappa2) - 2 * abs(p.omega)) <= tol * scale:
        return PhasePoint(p.kappa1, p.kappa2, p.omega1, p.omega2, BOUNDARY, es)
    modes = general_eigenmodes(p)
    sides = [classify_mode(pair.vector, k=pair.k).side for pair in modes.pairs]
    return PhasePoint(p.kappa1, p.kappa2, p.omega1, p.omega2, phase_from_sides(sides), es)


def phase_diagram_scan(kappa1_grid, kappa2_grid, omega1: float, omega2: float, order: int, tol: float = 1e-9) -> list[PhasePoint]:
    """Row-major scan (kappa1 outer, kappa2 inner) over the kappa1 * kappa2 > 0 quadrant."""
    out = []
    for k1 in np.asarray(kappa1_grid, dtype=float):
        for k2 in np.asarray(kappa2_grid, dtype=float):
            p = GeneralDimerParams(omega1, omega2, float(k1), float(k2), order)
            out.append(phase_classify(p, tol))
    return out
