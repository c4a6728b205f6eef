from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frogcert.simulator import (
    ModelConfig,
    batch_summary,
    erasure_indices,
    estimate_hit_prob,
    estimate_phi_transitions,
    loop_erase,
    neighbors,
    outcomes_to_csv,
    phi_step_after_down,
    run_batch,
    run_coupled_batch,
    run_coupled_episode,
    run_episode,
    simulate_upsilon,
)
from frogcert.simulator import tree
from frogcert.simulator.rng import FrogStream, address_bytes


# -- tree ---------------------------------------------------------------------


def test_neighbors_by_depth():
    assert neighbors(()) == [(0,), (1,), (2,)]
    assert neighbors((1,)) == [(), (1, 0), (1, 1)]
    assert neighbors((1, 0)) == [(1,), (1, 0, 0), (1, 0, 1), (1, 0, 2)]


def test_address_validity_and_sibling():
    assert tree.is_valid((2, 1, 2))
    assert not tree.is_valid((0, 2))
    assert tree.sibling((2, 0)) == (2, 1)
    with pytest.raises(ValueError):
        tree.parent(())


# -- streams ----------------------------------------------------------------------


def test_streams_are_reproducible_and_distinct():
    a = [FrogStream(1, 2, b"\x00").uniform() for _ in range(1)]
    s1, s2 = FrogStream(1, 2, b"\x00"), FrogStream(1, 2, b"\x00")
    xs = [s1.uniform() for _ in range(20)]
    assert xs == [s2.uniform() for _ in range(20)]
    assert xs[0] == a[0]
    other = FrogStream(1, 2, b"\x01")
    assert [other.uniform() for _ in range(20)] != xs
    assert all(0 <= x < 1 for x in xs)


# -- walk estimators -------------------------------------------------------------


def test_hit_prob_small_run():
    cfg = ModelConfig(episodes=40_000, seed=3)
    for n, p in ((1, 4 / 9), (2, 3 / 8)):
        e = estimate_hit_prob(n, cfg)
        assert abs(e.estimate - p) <= 4 * e.stderr
        assert e.truncated == 0


def test_shallow_cap_biases_down():
    e = estimate_hit_prob(1, ModelConfig(depth_cap=2, episodes=40_000))
    assert e.estimate + 4 * e.stderr < 4 / 9


def test_hit_prob_independent_of_threads():
    a = estimate_hit_prob(1, ModelConfig(episodes=70_000, threads=1))
    b = estimate_hit_prob(1, ModelConfig(episodes=70_000, threads=3))
    assert a == b


def test_phi_first_steps():
    t = estimate_phi_transitions(ModelConfig(episodes=40_000), depths=(1, 2, 3))
    for n, p in ((1, 1 / 3), (2, 1 / 4), (3, 1 / 3)):
        assert abs(t.first_up[n] - p) <= 4 * t.first_up_se[n]
    for n, p in ((1, 1 / 2), (2, 1 / 3)):
        assert abs(t.up_after_up[n] - p) <= 4 * t.up_after_up_se[n]


def test_step_after_down_is_uniform():
    counts = phi_step_after_down((0,), walks=3000)
    assert "up" not in counts
    total = sum(counts.values())
    # depth-2 vertex: three children, each with probability 1/3
    for k in range(3):
        p = counts.get(k, 0) / total
        assert abs(p - 1 / 3) < 4 * (2 / 9 / total) ** 0.5


# -- loop erasure -----------------------------------------------------------------


def _random_path(seed, origin, steps):
    s = FrogStream(seed, 0, b"path")
    path = [origin]
    for _ in range(steps):
        nb = neighbors(path[-1])
        path.append(nb[s.below(len(nb))])
    return path


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(), (0,), (1, 1), (2, 0, 1)]), st.integers(0, 80))
def test_two_erasure_routes_agree(seed, origin, steps):
    path = _random_path(seed, origin, steps)
    idx = erasure_indices(path)
    via_indices = [path[t] for t, _ in idx]
    assert via_indices == loop_erase(path)
    # erased path is a self-avoiding walk along tree edges
    assert len(set(via_indices)) == len(via_indices)
    for u, v in zip(via_indices, via_indices[1:]):
        assert v in neighbors(u)
    for t, s in idx:
        assert path[t] == path[s] and t <= s


def test_root_start_never_halts():
    s = FrogStream(0, 0, address_bytes(()))
    path, halt, status = simulate_upsilon((), s, depth_cap=6, step_cap=500)
    assert halt is None and status == "killed"
    erased = loop_erase(path)
    # from the root the erased path is a ray: depth goes up by one each step
    assert [len(v) for v in erased] == list(range(len(erased)))


# -- episodes -----------------------------------------------------------------------


def test_nonbacktracking_paths_self_avoiding():
    cfg = ModelConfig(variant="nonbacktracking", depth_cap=40, step_cap=8)
    for i in range(5):
        out = run_episode(cfg, i, record_paths=True)
        for path in out.paths.values():
            body = path[:-1] if path[-1] == () and len(path) > 1 else path
            assert len(set(body)) == len(body)


def test_selfsimilar_quotas():
    cfg = ModelConfig(variant="selfsimilar", depth_cap=40, step_cap=10)
    for i in range(10):
        out = run_episode(cfg, i)
        for child, n in out.edge_traversals.items():
            assert n <= (1 if len(child) % 2 == 1 else 2)


def test_episode_determinism_and_tallies():
    cfg = ModelConfig(variant="selfsimilar", depth_cap=40, step_cap=8)
    a = run_episode(cfg, 4, tallies=True)
    b = run_episode(cfg, 4, tallies=True)
    assert a.root_hits == b.root_hits and a.transition_tallies == b.transition_tallies
    assert a.transition_tallies[0][0] == 0  # nothing moves up from the root


def test_truncation_flags():
    out = run_episode(ModelConfig(variant="original", depth_cap=2, step_cap=50), 0)
    assert out.truncated
    shallow = run_episode(ModelConfig(variant="nonbacktracking", depth_cap=40, step_cap=1), 0)
    assert shallow.truncated


def test_original_hits_grow_with_step_cap():
    totals = []
    for cap in (5, 10, 15):
        outs = run_batch(ModelConfig(variant="original", depth_cap=40, step_cap=cap, episodes=50))
        totals.append(sum(o.root_hits for o in outs))
    # regression values from the first validated run (seed 0)
    assert totals == [61, 125, 166]


def test_batch_thread_independent_and_csv():
    cfg1 = ModelConfig(variant="nonbacktracking", depth_cap=40, step_cap=6, episodes=30)
    cfg4 = ModelConfig(variant="nonbacktracking", depth_cap=40, step_cap=6, episodes=30, threads=4)
    a, b = run_batch(cfg1), run_batch(cfg4)
    assert outcomes_to_csv(a, "nonbacktracking") == outcomes_to_csv(b, "nonbacktracking")
    assert batch_summary(a, cfg1) == batch_summary(b, cfg1)
    assert outcomes_to_csv(a, "x").splitlines()[0] == "episode_index,variant,root_hits,truncated"


@pytest.mark.parametrize("cap", [3, 4])
def test_coupled_episodes(cap):
    cfg = ModelConfig(depth_cap=cap, episodes=300)
    for i in range(cfg.episodes):
        ep = run_coupled_episode(cfg, i)
        if ep.truncated:
            continue
        assert ep.subset_ok
        z, vp, v = ep.counts
        assert v <= vp <= z
        for origin, phi in ep.derived_paths.items():
            assert phi[0] == origin


def test_coupled_open_walks_are_excluded():
    cfg = ModelConfig(depth_cap=6, step_cap=3, episodes=50)
    res = run_coupled_batch(cfg)
    assert res["truncated"] > 0
    assert res["subset_violations"] == 0 and res["order_violations"] == 0


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(depth_cap=1)
    with pytest.raises(ValueError):
        ModelConfig(variant="lazy")
    with pytest.raises(ValueError):
        ModelConfig(step_cap=0)
