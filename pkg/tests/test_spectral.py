import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from momentchain.errors import ConfigError
from momentchain.matrices import DimerParams, build_moment_matrix
from momentchain.spectral import (
    analytic_eigenvector,
    chain_vector,
    charpoly,
    edge_modes,
    edge_ratios,
    effective_hamiltonian,
    eigenpairs,
    eigenvalues,
    ep_eigenvector,
    fix_gauge,
    is_at_ep,
    mode_rows,
    residual,
    spectrum_rows,
    z2_invariant,
)


def product_state_vector(order, k, delta, gamma):
    """Independent oracle: symmetrized product of first-order eigenvectors.

    A moment vector of order N built from k copies of the E=-alpha mode
    (ratio x) and N-k copies of the E=+alpha mode (ratio y) has component
    j equal to the average, over all ways to place j mode-2 slots, of the
    product of the chosen ratios.
    """
    y, x = edge_ratios(delta, gamma)
    j = np.arange(order + 1)
    out = np.zeros(order + 1, dtype=complex)
    for jj in j:
        for i in range(0, min(jj, order - k) + 1):
            if jj - i > k:
                continue
            # i mode-2 slots from the N-k "+alpha" factors, jj-i from the k "-alpha" factors
            out[jj] += math.comb(order - k, i) * math.comb(k, jj - i) * y**i * x ** (jj - i)
    return out / np.array([math.comb(order, jj) for jj in j])


def scaled_residual(p, pair):
    m = build_moment_matrix(p)
    return residual(m, pair) / (p.size * m.max_abs())


away_from_ep = st.tuples(st.floats(0.0, 4.0), st.floats(0.05, 3.0)).filter(lambda t: abs(abs(t[0]) - t[1]) / t[1] > 1e-3)


@settings(max_examples=80, deadline=None)
@given(away_from_ep, st.integers(1, 30))
def test_residual_property(dg, order):
    delta, gamma = dg
    p = DimerParams(delta, gamma, order=order)
    for pair in eigenpairs(p):
        assert scaled_residual(p, pair) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(away_from_ep, st.integers(1, 12), st.data())
def test_matches_product_state_oracle(dg, order, data):
    delta, gamma = dg
    k = data.draw(st.integers(0, order))
    ours = analytic_eigenvector(DimerParams(delta, gamma, order=order), k).vector
    ref = fix_gauge(product_state_vector(order, k, delta, gamma))
    assert np.abs(ours - ref).max() <= 1e-9


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("delta", [0.3, 1.7])
def test_eigenvalues_match_characteristic_polynomial(order, delta):
    p = DimerParams(delta, 1.0, 0.2, order=order)
    m = build_moment_matrix(p).to_dense()
    coeffs = charpoly(m)
    assert np.allclose(coeffs, np.poly(m), atol=1e-10)
    assert np.allclose(coeffs, charpoly(m.T), atol=1e-10)
    for e in eigenvalues(p):
        assert abs(np.polyval(coeffs, e)) <= 1e-9 * max(1.0, abs(e)) ** order


def test_known_spectrum_values():
    e = eigenvalues(DimerParams(0.0, 1.0, order=2))
    assert np.allclose(e, [2, 0, -2])
    e = eigenvalues(DimerParams(2.0, 1.0, order=1))
    assert np.allclose(e, [1j * math.sqrt(3), -1j * math.sqrt(3)])


def test_local_decay_shifts_spectrum():
    e0 = eigenvalues(DimerParams(0.4, 1.0, order=4))
    e1 = eigenvalues(DimerParams(0.4, 1.0, 0.3, order=4))
    assert np.allclose(e1, e0 - 1.2)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 5), st.floats(0.01, 5), st.integers(1, 40))
def test_spectral_chirality(delta, gamma, order):
    e = eigenvalues(DimerParams(delta, gamma, order=order))
    assert np.allclose(e, -e[::-1], atol=1e-12 * max(1.0, abs(e[0])))


@pytest.mark.parametrize("order", range(1, 12))
def test_zero_mode_parity(order):
    e = eigenvalues(DimerParams(0.3, 1.0, order=order))
    assert np.any(e == 0) == (order % 2 == 0)


@settings(max_examples=60, deadline=None)
@given(away_from_ep, st.integers(1, 30))
def test_real_or_imaginary_phases(dg, order):
    delta, gamma = dg
    e = eigenvalues(DimerParams(delta, gamma, order=order))
    scale = 1e-12 * abs(e[0])
    if delta < gamma:
        assert np.abs(e.imag).max() <= scale
    else:
        assert np.abs(e.real).max() <= scale
        # principal branch: k=0 has the largest growth rate
        assert e[0].imag >= 0


@settings(max_examples=40, deadline=None)
@given(away_from_ep, st.integers(1, 20))
def test_eigenvector_magnitude_symmetries(dg, order):
    delta, gamma = dg
    p = DimerParams(delta, gamma, order=order)
    pairs = eigenpairs(p)
    for k in range(p.size):
        a = np.abs(pairs[k].vector)
        b = np.abs(pairs[order - k].vector)[::-1]
        assert np.allclose(a, b, atol=1e-9)
        if delta < gamma:
            assert np.allclose(a, a[::-1], atol=1e-9)


@pytest.mark.parametrize("delta", [0.2, 0.9, 1.5, 6.0])
def test_odd_size_zero_mode_is_mirror_symmetric(delta):
    v = analytic_eigenvector(DimerParams(delta, 1.0, order=10), 5).vector
    assert np.allclose(np.abs(v), np.abs(v[::-1]), atol=1e-12)


def test_edge_mode_ratios_broken_phase():
    left, right = edge_ratios(2.0, 1.0)
    assert left == pytest.approx(-1j * (2 + math.sqrt(3)), abs=1e-12)
    assert right == pytest.approx(-1j * (2 - math.sqrt(3)), abs=1e-12)
    assert abs(right) == pytest.approx(0.2679491924311227, abs=1e-12)


def test_edge_modes_are_eigenvectors():
    p = DimerParams(2.0, 1.0, order=9)
    m = build_moment_matrix(p)
    for pair in edge_modes(p):
        assert residual(m, pair) <= 1e-10 * m.max_abs()
        assert np.allclose(pair.vector, analytic_eigenvector(p, pair.k).vector, atol=1e-12)


def test_exact_phase_edge_modes_unimodular():
    l, r = edge_ratios(0.5, 1.0)
    assert abs(l) == pytest.approx(1) and abs(r) == pytest.approx(1)


def test_ep_vector_and_degeneracy():
    p = DimerParams(1.0, 1.0, order=2)
    assert is_at_ep(p)
    pair = ep_eigenvector(p)
    assert np.allclose(pair.vector, np.array([1, -1j, -1]) / math.sqrt(3))
    assert pair.degeneracy == 3
    assert residual(build_moment_matrix(p), pair) <= 1e-14
    assert np.all(eigenvalues(p) == 0)
    assert analytic_eigenvector(p, 1).degeneracy == 3


def test_ep_requires_ep():
    with pytest.raises(ConfigError):
        ep_eigenvector(DimerParams(0.5, 1.0, order=2))


def test_near_ep_flag():
    pair = analytic_eigenvector(DimerParams(1 + 1e-8, 1.0, order=4), 0)
    assert pair.ill_conditioned
    assert not analytic_eigenvector(DimerParams(1.1, 1.0, order=4), 0).ill_conditioned


def test_gamma_zero_rejected():
    with pytest.raises(ConfigError):
        analytic_eigenvector(DimerParams(1.0, 0.0, order=3), 0)
    with pytest.raises(ConfigError):
        chain_vector(3, 4, 0.1, 1.0)


def test_large_order_has_no_overflow():
    p = DimerParams(0.5, 1.0, order=150)
    for k in (0, 75, 150):
        pair = analytic_eigenvector(p, k)
        assert np.isfinite(pair.vector).all()
        assert scaled_residual(p, pair) <= 1e-9


def test_gauge_convention():
    v = analytic_eigenvector(DimerParams(0.3, 1.0, order=6), 2).vector
    assert np.linalg.norm(v) == pytest.approx(1.0)
    ref = np.flatnonzero(np.abs(v) >= (1 - 1e-9) * np.abs(v).max())[0]
    assert v[ref].imag == 0 and v[ref].real > 0


@pytest.mark.parametrize("delta", [0.0, 0.3, 2.0, 7.5])
def test_heff_determinant(delta):
    det = np.linalg.det(effective_hamiltonian(DimerParams(delta, 1.3)))
    assert abs(det - (1.3**2 - delta**2)) <= 1e-14 * max(1.0, abs(1.3**2 - delta**2))


@pytest.mark.parametrize("size", [2, 6, 10])
def test_z2_invariant_applicable_sizes(size):
    below = z2_invariant(DimerParams(0.5, 1.0, order=size - 1))
    above = z2_invariant(DimerParams(2.0, 1.0, order=size - 1))
    assert below.applicable and above.applicable
    assert (below.nu, above.nu) == (-1, 1)


def test_z2_matches_numeric_determinant():
    for order in (1, 3, 5, 2, 4):
        for delta in (0.5, 2.0):
            m = build_moment_matrix(DimerParams(delta, 1.0, order=order)).to_dense()
            det = np.linalg.det(m)
            res = z2_invariant(DimerParams(delta, 1.0, order=order))
            if abs(det) > 1e-12:
                assert res.nu == int(np.sign(det.real))
            assert abs(det.imag) <= 1e-9 * max(1.0, abs(det))


def test_z2_edge_cases():
    assert z2_invariant(DimerParams(1.0, 1.0, order=1)).nu is None
    assert z2_invariant(DimerParams(0.5, 1.0, order=2)).nu is None  # zero mode
    assert not z2_invariant(DimerParams(0.5, 1.0, order=3)).applicable
    with pytest.raises(ConfigError):
        z2_invariant(DimerParams(0.5, 1.0, 0.1, order=1))


def test_table_rows():
    rows = spectrum_rows(DimerParams(0.0, 1.0, order=2), [0.0, 2.0])
    assert len(rows) == 6 and rows[0] == (0.0, 0, 2.0, 0.0)
    rows = mode_rows(DimerParams(0.0, 1.0, order=2), [0.5], ks=[0])
    assert len(rows) == 3
    assert sum(r[5] for r in rows) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        mode_rows(DimerParams(0.0, 1.0, order=2), [0.5], ks=[3])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.05, 3), st.integers(1, 10), st.data())
def test_complex_gamma_chain_vector(delta, gamma_abs, order, data):
    # with gamma = i g the chain remains exactly solvable
    assume(abs(gamma_abs - delta) > 1e-2)
    g = 1j * gamma_abs
    k = data.draw(st.integers(0, order))
    v = chain_vector(order, k, delta, g)
    N = order
    j = np.arange(N + 1)
    m = np.diag(-1j * (N - 2 * j) * delta) + np.diag(-(j[1:]) * g, -1) + np.diag(-(N - j[:-1]) * g, 1)
    alpha = np.sqrt(complex(g * g - delta * delta))
    e = (N - 2 * k) * alpha
    v = v / np.linalg.norm(v)
    assert np.linalg.norm(m @ v - e * v) <= 1e-8 * N * np.abs(m).max()
