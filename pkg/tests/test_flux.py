import numpy as np
from hypothesis import given, strategies as st

from cpcoedg.fluid import LinearEos, prim_to_cons, stress
from cpcoedg.flux import hll_combine, hll_flux, signal_speeds, source_term

from conftest import random_admissible

EOS = LinearEos(sigma2=1 / 3)


def _pairs(rng, n=10_000, s2=1 / 3):
    eos, _, _, a0, a1, _ = random_admissible(rng, n, s2)
    _, _, _, b0, b1, _ = random_admissible(rng, n, s2)
    A1, A2 = rng.uniform(0.05, 1, n), rng.uniform(0.05, 1, n)
    B = rng.uniform(0.1, 5, n)
    return eos, np.stack([a0, a1]), np.stack([b0, b1]), A1, A2, B


def test_consistency_static():
    U = np.array([1.0, 0.0])
    f, al, ar = hll_flux(U, U, 1.0, 1.0, 1.0, EOS)
    assert np.allclose(f, [0, 1 / 3], atol=1e-16)
    assert al < 0 < ar


def test_consistency_random(rng):
    eos, U, _, A, _, B = _pairs(rng, 500)
    f, _, _ = hll_flux(U, U, A, A, B, eos)
    _, T11 = stress(U[0], U[1], eos)
    assert np.allclose(f, np.sqrt(A * B) * np.stack([U[1], T11]), rtol=1e-12, atol=1e-300)


def test_symmetric_speeds_give_rusanov(rng):
    eos, Ul, Ur, _, _, _ = _pairs(rng, 100)
    Gl, Gr = rng.normal(size=(2, 2, 100))
    a = rng.uniform(0.1, 1, 100)
    f = hll_combine(Ul, Ur, Gl, Gr, -a, a)
    assert np.allclose(f, (Gl + Gr) / 2 - a / 2 * (Ur - Ul), rtol=1e-13, atol=1e-13)


def test_signal_speed_signs(rng):
    v = rng.uniform(-0.99, 0.99, (2, 1000))
    al, ar = signal_speeds(v[0], 0.5, 1.0, v[1], 0.5, 1.0)
    assert np.all(al <= 0) and np.all(ar >= 0)


def test_zero_speeds_return_left_flux():
    f = hll_combine(np.ones(2), np.ones(2), np.array([1.0, 2.0]), np.array([3.0, 4.0]), 0.0, 0.0)
    assert np.all(f == [1.0, 2.0])


def test_hll_positivity_corollary_10k(rng):
    for s2 in (0.01, 1 / 3, 0.8):
        eos, U1, U2, A1, A2, B = _pairs(rng, 10_000, s2)
        f, al, ar = hll_flux(U1, U2, A1, A2, B, eos)
        lam = 0.99 / np.maximum(-al, ar)
        for n1 in (1.0, -1.0):
            right = (U2[0] + lam * f[0]) + n1 * (U2[1] + lam * f[1])
            left = (U1[0] - lam * f[0]) + n1 * (U1[1] - lam * f[1])
            assert np.all(right > 0) and np.all(left > 0)


def _source_oracle(rho, v, A, B, r, kappa, s2):
    # independent transcription from primitives
    p = s2 * rho
    W2 = 1 / (1 - v * v)
    T00 = (rho + p) * W2 - p
    T01 = (rho + p) * W2 * v
    T11 = (rho + p) * W2 * v * v + p
    g = np.sqrt(A * B)
    return (
        -g * 2 * T01 / r,
        -g * (2 * T11 / r + (1 - A) * (T00 - T11) / (2 * A * r)
              + kappa * r * (T00 * T11 - T01**2) / A - 2 * p / r),
    )


@given(st.floats(1e-4, 10), st.floats(-0.95, 0.95), st.floats(0.05, 0.99),
       st.floats(0.1, 10), st.floats(2.5, 20))
def test_source_matches_transcription(rho, v, A, B, r):
    kappa = 8 * np.pi
    T00, T01, T11 = prim_to_cons(rho, v, EOS)
    S = source_term(T00, T01, T11, rho / 3, A, B, r, kappa)
    ref = _source_oracle(rho, v, A, B, r, kappa, 1 / 3)
    assert np.allclose(S, ref, rtol=1e-12, atol=1e-14)


def test_static_source_first_component():
    S = source_term(1.0, 0.0, 1 / 3, 1 / 3, 0.5, 2.0, 4.0, 8 * np.pi)
    assert S[0] == 0
