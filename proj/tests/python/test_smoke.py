"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

try:
    import rckl as m
except ImportError:  # in-tree runs put the bare extension on PYTHONPATH
    import _rckl as m


def test_triplet_counting():
    assert m.total_triplet_count(3) == 3
    assert m.total_triplet_count(100) == 485100
    with pytest.raises(Exception):
        m.total_triplet_count(2)


def test_closure_and_conflicts():
    closure = m.transitive_closure(3, [(0, 1, 2), (2, 0, 1)])
    assert (1, 0, 2) in closure
    assert len(closure) == 3

    assert m.inferred_triplets(3, [(0, 1, 2), (2, 0, 1)]) == [(1, 0, 2)]

    conflicts = m.detect_conflicts(3, [(0, 1, 2), (0, 2, 1)])
    assert conflicts == [((0, 1, 2), (0, 2, 1))]
    assert m.detect_conflicts(4, [(1, 2, 3), (2, 1, 3)]) == []


def test_adversarial_order():
    order = m.adversarial_order(5, seed=3)
    assert len(order) == m.total_triplet_count(5)
    assert len(set(order)) == len(order)
    for i in range(1, len(order) + 1):
        assert m.inferred_triplets(5, order[:i]) == []


def test_kernel_operations():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((6, 3))
    k = m.linear_kernel(f)
    assert np.allclose(k, f @ f.T)
    assert m.numerical_rank(k, 1e-6) == 3

    d = m.kernel_distance(k, 0, 1)
    assert d == pytest.approx(np.sum((f[0] - f[1]) ** 2))

    sym = rng.standard_normal((5, 5))
    sym = 0.5 * (sym + sym.T)
    projected = m.project_psd(sym)
    assert np.linalg.eigvalsh(projected).min() >= -1e-8
    assert np.allclose(m.project_psd(projected), projected, atol=1e-10)

    combo = m.conic_combine([np.eye(3), 2 * np.eye(3)], np.array([0.5, 0.25]))
    assert np.allclose(combo, np.eye(3))

    normalized = m.unit_trace_normalize(2 * np.eye(4))
    assert np.trace(normalized) == pytest.approx(1.0)


def test_losses():
    identity = np.eye(3)
    assert m.ste_probability(identity, (0, 1, 2)) == pytest.approx(0.5)

    value, grad_k0, grad_mu = m.ste_loss(identity, [], np.zeros(0), [(0, 1, 2)])
    assert value == pytest.approx(math.log(2.0))
    assert grad_k0.shape == (3, 3)
    assert np.allclose(grad_k0, grad_k0.T)
    assert grad_mu.shape == (0,)

    value, _, _ = m.gnmds_loss(identity, [], np.zeros(0), [(0, 1, 2)])
    assert value == pytest.approx(1.0)

    assert m.active_triplets(identity, [(0, 1, 2)]) == [(0, 1, 2)]


def test_fit_and_evaluate():
    config = m.SolverConfig(mode=m.Mode.T, loss=m.LossKind.STE)
    state = m.fit(4, [(0, 1, 2)], [], config)
    assert state.converged
    assert m.error_rate([(0, 1, 2)], state.composed) == 0.0
    history = state.objective_history
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    again = m.fit(4, [(0, 1, 2)], [], config)
    assert np.array_equal(state.k0, again.k0)


def test_conflict_error():
    config = m.SolverConfig(mode=m.Mode.T)
    with pytest.raises(Exception) as err:
        m.fit(3, [(0, 1, 2), (0, 2, 1)], [], config)
    assert "conflict" in str(err.value).lower()


def test_synthetic_pieces():
    truth, bank, oracle = m.generate_synthetic(n=30, noise_sigma=0.1, seed=5)
    assert truth.shape == (30, 30)
    assert len(bank) == 6
    assert all(np.trace(k) == pytest.approx(1.0) for k in bank)
    assert m.numerical_rank(truth, 1e-6) <= 8

    rounds = m.make_rounds(oracle, 30, 4, seed=9)
    assert len(rounds) == 4
    flat = [t for r in rounds for t in r]
    assert len(set(flat)) == len(flat)
    for t in flat:
        assert m.satisfied(t, truth)

    answered = oracle.answer(0, 1, 2)
    assert answered is None or answered in [(0, 1, 2), (0, 2, 1)]
