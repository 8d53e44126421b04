import math

import numpy as np
import pytest

from multihop_secrecy import NetworkConfig, SchemeKind
from multihop_secrecy.analytics import LN2, optimal_rates, rate_redundancy, scheme_constant, throughput
from multihop_secrecy.optimizer import brute_force_rates, optimize_hops, sign_changes


def grid_r_t_max(cfg, scheme, n):
    # throughput is negligible once K 2^R_t > 100; chosen without Lambert W
    r_e = rate_redundancy(cfg, n)
    k = scheme_constant(cfg, scheme, n)
    return max(r_e + 20.0, math.log2(100.0 / k) + 1.0)


def test_default_optima(defaults):
    assert optimize_hops(defaults, "oft", 20).n_star == 5
    assert optimize_hops(defaults, "noft", 20).n_star == 2


@pytest.mark.parametrize("scheme", ["oft", "noft"])
def test_profile_is_exhaustive(defaults, scheme):
    res = optimize_hops(defaults, scheme, 30)
    assert [n for n, _ in res.profile] == list(range(1, 31))
    assert res.throughput_star == max(u for _, u in res.profile)
    assert res.rates_star == optimal_rates(defaults, scheme, res.n_star)
    assert res.throughput_star == throughput(defaults, scheme, res.n_star, res.rates_star)


def test_profile_rises_then_falls(defaults):
    us = [u for _, u in optimize_hops(defaults, "oft", 20).profile]
    assert sign_changes(us) == 1 and int(np.argmax(us)) == 4
    us = [u for _, u in optimize_hops(defaults, "noft", 20).profile]
    assert sign_changes(us) == 1 and int(np.argmax(us)) == 1


def test_ties_go_to_fewer_hops():
    # with one allowed hop there is nothing to break, with L tiny every N
    # has nearly equal link budget but time cost grows with N
    cfg = NetworkConfig(L=1e-3, p=1e10)
    assert optimize_hops(cfg, "oft", 10).n_star == 1


def test_no_eavesdroppers_balances_distance_and_time():
    cfg = NetworkConfig(lambda_e=0.0, p=1e4, L=50.0)
    res = optimize_hops(cfg, "noft", 50)
    us = [u for _, u in res.profile]
    assert 1 < res.n_star < 50
    assert sign_changes(us) == 1


def test_rejects_bad_n_max(defaults):
    with pytest.raises(ValueError):
        optimize_hops(defaults, "oft", 0)


@pytest.mark.parametrize("scheme", ["oft", "noft"])
def test_grid_oracle_defaults(defaults, scheme):
    res = brute_force_rates(defaults, scheme, 5, 1e-4, grid_r_t_max(defaults, scheme, 5))
    assert abs(res.r_t_best - optimal_rates(defaults, scheme, 5).r_t) <= 1e-4
    assert sign_changes(res.values) == 1


def test_grid_oracle_contrived():
    cfg = NetworkConfig(L=1.0, alpha=2.0, p=2.0 * math.e, lambda_e=0.0)
    res = brute_force_rates(cfg, "oft", 1, 1e-5, 10.0)
    assert res.r_t_best == pytest.approx(1 / LN2, abs=1e-5)


def test_grid_rejects_short_range(defaults):
    with pytest.raises(ValueError):
        brute_force_rates(defaults, "oft", 5, 1e-4, rate_redundancy(defaults, 5) - 1)
    with pytest.raises(ValueError):
        brute_force_rates(defaults, "oft", 5, 0.0)


def test_random_configs_match_grid():
    rng = np.random.default_rng(2024)
    for _ in range(15):
        cfg = NetworkConfig(alpha=rng.uniform(2, 6), lambda_e=10 ** rng.uniform(-7, -3), p=10 ** rng.uniform(4, 12))
        n = int(rng.integers(1, 31))
        for scheme in SchemeKind:
            res = brute_force_rates(cfg, scheme, n, 1e-4, grid_r_t_max(cfg, scheme, n))
            assert abs(res.r_t_best - optimal_rates(cfg, scheme, n).r_t) <= 1e-4
            assert sign_changes(res.log_values) == 1


def test_grid_resolves_underflowing_objective():
    # optimum throughput near 1e-300, far below what a linear grid can rank
    cfg = NetworkConfig(alpha=5.58, lambda_e=7.2e-4, p=2.4e6)
    res = brute_force_rates(cfg, "noft", 21, 1e-5, grid_r_t_max(cfg, "noft", 21))
    assert abs(res.r_t_best - optimal_rates(cfg, "noft", 21).r_t) <= 1e-5
    assert sign_changes(res.log_values) == 1


def test_sign_changes_scale_free():
    bump = np.array([0.0, 1.0, 3.0, 2.0, 0.5, 0.0, 0.0])
    for scale in (1.0, 1e-20, 1e-200):
        assert sign_changes(bump * scale) == 1
    assert sign_changes([1.0, 2.0, 1.0, 2.0]) == 2
    assert sign_changes([]) == 0
