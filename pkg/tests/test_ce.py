import numpy as np
import pytest

from sparsekit import (
    CEConfig,
    Dictionary,
    draw_samples,
    elite_update,
    exhaustive_oracle,
    gen_dictionary,
    gen_instance,
    run_ce,
    sparse_objective,
)
from sparsekit.rng import RngStream


# ----------------------------------------------------------- sparse_objective


def test_objective_true_mask_is_zero_cost():
    D = gen_dictionary(10, 20, seed=1)
    inst = gen_instance(D, 3, seed=2)
    mask = np.zeros(20, dtype=np.uint8)
    mask[inst.true_support] = 1
    assert sparse_objective(D, inst.signal, mask, lam=0.0) < 1e-9


def test_objective_empty_mask_is_signal_norm():
    D = gen_dictionary(6, 9, seed=1)
    x = RngStream(4).generator().standard_normal(6)
    cost = sparse_objective(D, x, np.zeros(9, dtype=np.uint8), lam=0.0)
    assert cost == pytest.approx(np.linalg.norm(x))


def test_objective_lambda_separates_saturated_masks():
    # both masks reconstruct exactly, so costs differ by lambda alone
    D = gen_dictionary(10, 20, seed=3)
    inst = gen_instance(D, 3, seed=4)
    mask = np.zeros(20, dtype=np.uint8)
    mask[inst.true_support] = 1
    bigger = mask.copy()
    extra = next(j for j in range(20) if not mask[j])
    bigger[extra] = 1
    lam = 0.01
    diff = sparse_objective(D, inst.signal, bigger, lam) - sparse_objective(D, inst.signal, mask, lam)
    assert diff == pytest.approx(lam, abs=1e-6)


def test_objective_oversized_mask_is_infeasible():
    D = gen_dictionary(4, 12, seed=5)
    mask = np.ones(12, dtype=np.uint8)
    assert sparse_objective(D, np.ones(4), mask) == np.inf


# --------------------------------------------------------------- draw_samples


def test_draw_all_ones_and_all_zeros():
    stream = RngStream(0).child(1)
    ones = draw_samples(np.ones(6), 5, stream)
    np.testing.assert_array_equal(ones, 1)
    zeros = draw_samples(np.zeros(6), 5, stream)
    np.testing.assert_array_equal(zeros, 0)


def test_draw_empirical_means_near_half():
    samples = draw_samples(np.full(8, 0.5), 10_000, RngStream(123))
    means = samples.mean(axis=0)
    np.testing.assert_allclose(means, 0.5, rtol=0, atol=0.02)


def test_draw_deterministic_per_sample_substreams():
    p = np.full(16, 0.3)
    stream = RngStream(9).child(2)
    first = draw_samples(p, 10, stream)
    second = draw_samples(p, 20, stream)
    # sample i depends only on (stream, i), not on the batch size
    np.testing.assert_array_equal(second[:10], first)


# --------------------------------------------------------------- elite_update


def _cfg(**kw):
    base = dict(k=2, population=10, elite_ratio=0.5, step_size=1.0)
    base.update(kw)
    return CEConfig(**base)


def test_elite_frequencies():
    masks = np.array([[1, 0, 1], [1, 1, 0]], dtype=np.uint8)
    costs = np.array([0.1, 0.2])
    p_new, gamma = elite_update(masks, costs, np.zeros(3), _cfg(elite_ratio=0.9))
    np.testing.assert_array_equal(p_new, [1.0, 0.5, 0.5])
    assert gamma == 0.2


def test_elite_smoothing_convex_combination():
    masks = np.array([[1, 0, 1], [1, 1, 0]], dtype=np.uint8)
    costs = np.array([0.1, 0.2])
    p = np.full(3, 0.5)
    p_new, _ = elite_update(masks, costs, p, _cfg(elite_ratio=0.9, step_size=0.1))
    np.testing.assert_allclose(p_new, [0.55, 0.5, 0.5], rtol=0, atol=1e-15)


def test_elite_recount_on_large_seeded_batch():
    gen = RngStream(77).generator()
    masks = (gen.random((500, 12)) < 0.4).astype(np.uint8)
    costs = gen.random(500)
    cfg = _cfg(elite_ratio=0.05, step_size=1.0)
    p_new, gamma = elite_update(masks, costs, np.zeros(12), cfg)
    # independent recount: full sort, threshold at rank 25, frequency per column
    assert gamma == sorted(costs)[24]
    elite = [masks[i] for i in range(500) if costs[i] <= gamma]
    assert len(elite) >= 25
    recount = np.sum(elite, axis=0) / len(elite)
    np.testing.assert_array_equal(p_new, recount)


def test_elite_single_sample_full_step_copies_mask():
    mask = np.array([[0, 1, 1, 0]], dtype=np.uint8)
    p_new, _ = elite_update(mask, np.array([3.0]), np.full(4, 0.7), _cfg())
    np.testing.assert_array_equal(p_new, mask[0])


def test_elite_fixed_point_at_full_step():
    gen = RngStream(5).generator()
    masks = (gen.random((40, 6)) < 0.5).astype(np.uint8)
    costs = gen.random(40)
    cfg = _cfg(elite_ratio=0.2, step_size=1.0)
    p1, gamma1 = elite_update(masks, costs, np.zeros(6), cfg)
    p2, gamma2 = elite_update(masks, costs, p1, cfg)
    np.testing.assert_array_equal(p1, p2)
    assert gamma1 == gamma2


def test_elite_update_keeps_probabilities_in_unit_interval():
    gen = RngStream(6).generator()
    for _ in range(20):
        masks = (gen.random((30, 5)) < gen.random(5)).astype(np.uint8)
        costs = gen.random(30)
        p = gen.random(5)
        p_new, _ = elite_update(masks, costs, p, _cfg(elite_ratio=0.3, step_size=0.6))
        assert np.all(p_new >= 0.0) and np.all(p_new <= 1.0)


def test_gamma_matches_full_sort_every_batch():
    gen = RngStream(8).generator()
    cfg = _cfg(elite_ratio=0.13, step_size=0.5)
    for _ in range(25):
        n = int(gen.integers(3, 60))
        masks = (gen.random((n, 4)) < 0.5).astype(np.uint8)
        costs = gen.random(n)
        _, gamma = elite_update(masks, costs, np.full(4, 0.5), cfg)
        rank = int(np.ceil(cfg.elite_ratio * n))
        assert gamma == sorted(costs)[rank - 1]


# --------------------------------------------------------------------- run_ce


def test_run_ce_recovers_oracle_support_small_instance():
    D = gen_dictionary(5, 6, seed=10)
    inst = gen_instance(D, 2, seed=11)
    oracle = exhaustive_oracle(D, inst.signal, 2)
    cfg = CEConfig(k=2, population=64, max_iters=30, lam=0.05)
    sol = run_ce(D, inst.signal, cfg, RngStream(12))
    assert set(sol.support.tolist()) == set(oracle.support.tolist())


def test_run_ce_degenerate_initial_distribution_converges_immediately():
    D = gen_dictionary(12, 24, seed=13)
    inst = gen_instance(D, 3, seed=14)
    p0 = np.zeros(24)
    p0[inst.true_support] = 1.0
    cfg = CEConfig(k=3, population=50, max_iters=40, initial_p=p0)
    sol = run_ce(D, inst.signal, cfg, RngStream(15))
    assert sol.iterations == 1
    assert sol.residual_norm < 1e-9
    assert set(sol.support.tolist()) == set(inst.true_support.tolist())


def test_run_ce_prunes_zero_coefficient_mask_columns():
    # force every sample to a strict superset of the true support: the extra
    # columns carry (numerically) zero coefficients and must not be reported
    D = gen_dictionary(12, 24, seed=16)
    inst = gen_instance(D, 3, seed=17)
    p0 = np.zeros(24)
    p0[inst.true_support] = 1.0
    extras = [j for j in range(24) if j not in set(inst.true_support.tolist())][:2]
    p0[extras] = 1.0
    cfg = CEConfig(k=3, population=20, max_iters=5, initial_p=p0)
    sol = run_ce(D, inst.signal, cfg, RngStream(18))
    assert set(sol.support.tolist()) == set(inst.true_support.tolist())
    assert sol.residual_norm < 1e-9


def test_run_ce_reference_defaults():
    cfg = CEConfig(k=8)
    assert cfg.population == 500
    assert cfg.elite_ratio == 0.05
    assert cfg.step_size == 0.1
    assert cfg.max_iters == 100
    assert cfg.effective_eps(np.ones(4)) == pytest.approx(0.1 / 8)
    np.testing.assert_allclose(cfg.initial_params(64), 8 / 64)


def test_run_ce_relative_eps_scales_with_signal():
    cfg = CEConfig(k=4, eps_relative=True)
    x = np.array([3.0, 4.0])
    assert cfg.effective_eps(x) == pytest.approx(0.1 / 4 * 5.0)


def test_run_ce_best_cost_nonincreasing():
    D = gen_dictionary(10, 30, seed=19)
    inst = gen_instance(D, 3, seed=20)
    seen = []
    hook = lambda event, **data: seen.append(data["best_cost"])
    cfg = CEConfig(k=3, population=40, max_iters=15, stop_eps=0.0)
    run_ce(D, inst.signal, cfg, RngStream(21), hook=hook)
    assert all(b <= a for a, b in zip(seen, seen[1:]))


def test_run_ce_no_bottom_up_transfers():
    D = gen_dictionary(8, 16, seed=22)
    inst = gen_instance(D, 2, seed=23)
    sol = run_ce(D, inst.signal, CEConfig(k=2, population=30, max_iters=10), RngStream(24))
    assert sol.bottom_up_transfers == 0


def test_ce_config_validation():
    with pytest.raises(ValueError):
        CEConfig(k=0)
    with pytest.raises(ValueError):
        CEConfig(k=2, elite_ratio=0.0)
    with pytest.raises(ValueError):
        CEConfig(k=2, step_size=1.5)
    with pytest.raises(ValueError):
        CEConfig(k=2, lam=-0.1)
    with pytest.raises(ValueError):
        CEConfig(k=2, initial_p=np.array([0.5, 1.2]))
