"""Finite cyclic-group model: covariance, smearing, channels, norm sweeps."""

import numpy as np
import pytest

from phaseopt.groupsim import (
    CyclicRep,
    FiniteCovariantObservable,
    FiniteMeasure,
    adjoint_channel_matrix,
    apply_channel,
    choi_matrix,
    convexity_check,
    covariantize,
    depolarizing_channel,
    is_channel,
    kraus_to_superop,
    make_covariant,
    mix,
    norm_bound_check,
    pre_norm_check,
    random_channel,
    smear_finite,
    unitary_channel,
)


def finite_canonical(n: int) -> FiniteCovariantObservable:
    rep = CyclicRep(n, tuple(range(n)))
    return make_covariant(rep, np.ones((n, n)) / n)


def random_observable(rng, n: int, d: int) -> FiniteCovariantObservable:
    rep = CyclicRep(n, tuple(int(w) for w in rng.integers(0, n, d)))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return make_covariant(rep, g @ g.conj().T + 0.1 * np.eye(d))


# --- representation -----------------------------------------------------------


def test_rep_is_a_homomorphism():
    rep = CyclicRep(6, (0, 1, 3, 5))
    for g in range(6):
        for h in range(6):
            lhs = rep.unitary(g) @ rep.unitary(h)
            rhs = rep.unitary((g + h) % 6)
            assert np.abs(lhs - rhs).max() < 1e-12
    assert np.abs(rep.unitary(0) - np.eye(4)).max() == 0.0


# --- observables ----------------------------------------------------------------


def test_make_covariant_trivial_seed():
    rep = CyclicRep(5, (0, 1, 2))
    obs = make_covariant(rep, np.eye(3) / 5)
    for x in range(5):
        assert np.abs(obs.effect(x) - np.eye(3) / 5).max() < 1e-12


def test_finite_canonical_has_unit_singleton_norm():
    obs = finite_canonical(6)
    for x in range(6):
        assert obs.norm([x]) == pytest.approx(1.0, abs=1e-10)


def test_make_covariant_rejects_singular_average():
    rep = CyclicRep(4, (0, 1))
    seed = np.diag([1.0, 0.0])
    with pytest.raises(ValueError):
        make_covariant(rep, seed)


def test_observable_covariance_and_additivity():
    rng = np.random.default_rng(1)
    for _ in range(3):
        obs = random_observable(rng, 7, 3)
        n = obs.rep.order
        total = obs.effect_set(range(n))
        assert np.abs(total - np.eye(3)).max() < 1e-10
        for g in range(n):
            u = obs.rep.unitary(g)
            for x in range(n):
                lhs = u @ obs.effect(x) @ u.conj().T
                assert np.abs(lhs - obs.effect((g + x) % n)).max() < 1e-12


def test_faithful_seed_gives_nonzero_effects():
    rng = np.random.default_rng(23)
    obs = random_observable(rng, 8, 3)
    for x in range(8):
        assert np.abs(obs.effect(x)).max() > 1e-12


# --- smearing -------------------------------------------------------------------


def test_smear_point_mass_translates():
    obs = finite_canonical(5)
    nu = FiniteMeasure.dirac(5, 2)
    sm = smear_finite(obs, nu)
    for x in range(5):
        assert np.abs(sm.effect(x) - obs.effect((x - 2) % 5)).max() < 1e-12


def test_smear_identity_point_mass():
    obs = finite_canonical(5)
    sm = smear_finite(obs, FiniteMeasure.dirac(5, 0))
    for x in range(5):
        assert np.abs(sm.effect(x) - obs.effect(x)).max() < 1e-14


def test_smear_uniform_trivializes():
    rng = np.random.default_rng(3)
    obs = random_observable(rng, 6, 3)
    sm = smear_finite(obs, FiniteMeasure.uniform(6))
    for x in range(6):
        assert np.abs(sm.effect(x) - np.eye(3) / 6).max() < 1e-12


def test_smear_composition_is_cyclic_convolution():
    rng = np.random.default_rng(5)
    obs = random_observable(rng, 6, 3)
    w1 = rng.random(6)
    nu = FiniteMeasure(tuple(w1 / w1.sum()))
    w2 = rng.random(6)
    mu = FiniteMeasure(tuple(w2 / w2.sum()))
    twice = smear_finite(smear_finite(obs, nu), mu)
    once = smear_finite(obs, nu.convolve(mu))
    for x in range(6):
        assert np.abs(twice.effect(x) - once.effect(x)).max() < 1e-12


def test_smear_covariance_preserved():
    rng = np.random.default_rng(7)
    obs = random_observable(rng, 6, 3)
    w = rng.random(6)
    sm = smear_finite(obs, FiniteMeasure(tuple(w / w.sum())))
    for g in range(6):
        u = obs.rep.unitary(g)
        for x in range(6):
            lhs = u @ sm.effect(x) @ u.conj().T
            assert np.abs(lhs - sm.effect((g + x) % 6)).max() < 1e-12


def test_norm_bound_dirac_and_two_point():
    obs = finite_canonical(6)
    lhs, rhs = norm_bound_check(obs, FiniteMeasure.dirac(6, 1), [1])
    assert rhs == pytest.approx(1.0)
    nu = FiniteMeasure((0.5, 0.5, 0, 0, 0, 0))
    lhs, rhs = norm_bound_check(obs, nu, [0])
    assert rhs == pytest.approx(0.5)
    assert lhs <= 0.5 + 1e-10
    lhs, rhs = norm_bound_check(obs, FiniteMeasure.uniform(6), [3])
    assert rhs == pytest.approx(1.0 / 6.0)


def test_norm_bound_strict_for_nondirac_on_singletons():
    rng = np.random.default_rng(11)
    obs = random_observable(rng, 8, 4)
    nu = FiniteMeasure((0.5, 0.5, 0, 0, 0, 0, 0, 0))
    for x in range(8):
        lhs, rhs = norm_bound_check(obs, nu, [x])
        assert rhs < 1.0 - 1e-9


# --- channels -------------------------------------------------------------------


def test_kraus_superop_application():
    rng = np.random.default_rng(2)
    k = [np.array([[1, 0], [0, 0]], dtype=complex), np.array([[0, 0], [0, 1]], dtype=complex)]
    sup = kraus_to_superop(k)
    rho = np.array([[0.5, 0.3], [0.3, 0.5]], dtype=complex)
    out = apply_channel(sup, rho)
    assert np.abs(out - np.diag([0.5, 0.5])).max() < 1e-14


def test_choi_of_identity_channel():
    sup = kraus_to_superop([np.eye(3)])
    choi = choi_matrix(sup)
    w = np.linalg.eigvalsh(choi)
    assert w[-1] == pytest.approx(3.0, abs=1e-12)
    assert np.abs(w[:-1]).max() < 1e-12
    assert is_channel(sup)


def test_is_channel_flags_non_tp_maps():
    bad = kraus_to_superop([0.5 * np.eye(2)])
    assert not is_channel(bad)


def test_random_channel_is_channel():
    rng = np.random.default_rng(13)
    for d in (2, 3):
        assert is_channel(random_channel(d, rng))


def test_adjoint_channel_duality():
    rng = np.random.default_rng(19)
    sup = random_channel(3, rng)
    adj = adjoint_channel_matrix(sup)
    rho = np.diag([0.2, 0.3, 0.5]).astype(complex)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = a + a.conj().T
    lhs = np.trace(apply_channel(sup, rho) @ a)
    rhs = np.trace(rho @ apply_channel(adj, a))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_covariantize_random_channel():
    rng = np.random.default_rng(29)
    rep = CyclicRep(5, (0, 1, 2))
    chan = random_channel(3, rng)
    cov = covariantize(rep, chan)
    assert is_channel(cov)
    for g in range(5):
        s = rep.state_action(g)
        assert np.abs(s @ cov - cov @ s).max() < 1e-10


def test_covariantize_fixes_covariant_channels():
    rep = CyclicRep(4, (0, 1, 2, 3))
    w = np.diag(np.exp(2j * np.pi * np.arange(4) / 7))
    chan = unitary_channel(w)  # diagonal unitary commutes with the action
    cov = covariantize(rep, chan)
    assert np.abs(cov - chan).max() < 1e-12


def test_covariantize_identity_is_identity():
    rep = CyclicRep(3, (0, 1, 2))
    ident = kraus_to_superop([np.eye(3)])
    assert np.abs(covariantize(rep, ident) - ident).max() < 1e-13


def test_covariantized_channel_maps_states_to_states():
    rng = np.random.default_rng(31)
    rep = CyclicRep(5, (0, 1, 4))
    cov = covariantize(rep, random_channel(3, rng))
    for _ in range(100):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = g @ g.conj().T
        rho /= rho.trace()
        out = apply_channel(cov, rho)
        assert abs(np.trace(out).real - 1.0) < 1e-12
        assert np.linalg.eigvalsh(out)[0] > -1e-10


def test_covariantize_rejects_non_channels():
    rep = CyclicRep(3, (0, 1, 2))
    with pytest.raises(ValueError):
        covariantize(rep, np.eye(9) * 0.5)


# --- mixing -----------------------------------------------------------------------


def test_mix_endpoints_and_self():
    rng = np.random.default_rng(37)
    e1 = random_observable(rng, 6, 3)
    rep = e1.rep
    g = rng.normal(size=(3, 3))
    e2 = make_covariant(rep, g @ g.T + 0.2 * np.eye(3))
    m0 = mix(e1, e2, 0.0)
    for x in range(6):
        assert np.abs(m0.effect(x) - e2.effect(x)).max() < 1e-12
    m_self = mix(e1, e1, 0.5)
    for x in range(6):
        assert np.abs(m_self.effect(x) - e1.effect(x)).max() < 1e-12


def test_mix_rejects_rep_mismatch():
    e1 = finite_canonical(4)
    e2 = finite_canonical(5)
    with pytest.raises(ValueError):
        mix(e1, e2, 0.5)


def test_convexity_check_exhaustive_n8():
    rng = np.random.default_rng(41)
    rep = CyclicRep(8, tuple(range(4)) + (1, 2, 3, 0)[:0])  # weights 0..3
    g1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    g2 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    e1 = make_covariant(rep, g1 @ g1.conj().T + 0.1 * np.eye(4))
    e2 = make_covariant(rep, g2 @ g2.conj().T + 0.1 * np.eye(4))
    report = convexity_check(e1, e2, 0.35)
    assert report["subsets"] == 2 ** 8 - 1
    assert report["worst_slack"] >= -1e-9


def test_convexity_saturation_inherited_on_canonical():
    obs = finite_canonical(6)
    report = convexity_check(obs, obs, 0.5)
    assert report["saturated"] > 0


# --- preprocessing ----------------------------------------------------------------


def test_pre_norm_identity_channel_equality():
    obs = finite_canonical(5)
    chan = kraus_to_superop([np.eye(5)])
    report = pre_norm_check(obs, obs, chan)
    assert report["norm_equal_everywhere"]


def test_pre_norm_unitary_equality():
    rng = np.random.default_rng(43)
    obs = random_observable(rng, 6, 3)
    w = np.diag(np.exp(2j * np.pi * rng.random(3)))
    chan = unitary_channel(w)
    pre = FiniteCovariantObservable(obs.rep, w.conj().T @ obs.seed @ w)
    report = pre_norm_check(obs, pre, chan)
    assert report["norm_equal_everywhere"]


def test_pre_norm_depolarizing_collapse():
    rng = np.random.default_rng(47)
    obs = random_observable(rng, 6, 3)
    chan = depolarizing_channel(3)
    seed = np.trace(obs.seed).real * np.eye(3) / 3
    pre = FiniteCovariantObservable(obs.rep, seed)
    report = pre_norm_check(obs, pre, chan)
    assert not report["norm_equal_everywhere"]
    expected = np.trace(obs.seed).real / 3
    assert pre.norm([0]) == pytest.approx(expected, abs=1e-12)


def test_pre_norm_rejects_wrong_pullback():
    obs = finite_canonical(4)
    chan = depolarizing_channel(4)
    with pytest.raises(ValueError):
        pre_norm_check(obs, obs, chan)
