import numpy as np
import pytest
from hypothesis import given, strategies as st

from subgoal_tamp import search as search_mod
from subgoal_tamp.checker import check_solution
from subgoal_tamp.geometry import Vec2
from subgoal_tamp.motion import MotionParams, PlanningError
from subgoal_tamp.scene import Configuration
from subgoal_tamp.search import (
    Exhausted, SearchNode, SearchParams, Timeout, is_similar, reject, search, select_node, trace, try_goal,
)
from subgoal_tamp.subgoals import SamplingStarved, SubgoalParams

from conftest import bundled, make_scene

FINE = MotionParams().rrt_step / 8
RES = 0.25


def _cfg(*objects, agent=(0.0, 0.0)):
    return Configuration(Vec2(*agent), tuple(Vec2(*p) for p in objects))


# -- select_node -------------------------------------------------------------------


def test_select_prefers_higher_score():
    a, b = SearchNode(_cfg((1, 1)), score=12), SearchNode(_cfg((2, 2)), score=20)
    assert select_node([a, b], SearchParams()) is b


def test_select_none_when_all_expanded_twice():
    nodes = [SearchNode(_cfg((1, 1)), expansions=2), SearchNode(_cfg((2, 2)), expansions=2)]
    assert select_node(nodes, SearchParams()) is None
    assert select_node([], SearchParams()) is None


def test_select_fifo_without_prio():
    a, b = SearchNode(_cfg((1, 1)), score=0), SearchNode(_cfg((2, 2)), score=20)
    assert select_node([a, b], SearchParams(prio_enabled=False)) is a


def test_select_fresh_before_second_pass():
    once = SearchNode(_cfg((1, 1)), expansions=1, score=20)
    fresh = SearchNode(_cfg((2, 2)), score=0)
    assert select_node([once, fresh], SearchParams()) is fresh
    assert select_node([once, fresh], SearchParams(prio_enabled=False)) is fresh
    fresh.expansions = 1
    assert select_node([once, fresh], SearchParams()) is once


def test_select_ties_fifo():
    a, b = SearchNode(_cfg((1, 1)), score=5), SearchNode(_cfg((2, 2)), score=5)
    assert select_node([a, b], SearchParams()) is a


# -- similarity and rejection ---------------------------------------------------------


def test_is_similar_examples():
    c = _cfg((1.1, 2.1), (3.05, 0.3))
    assert is_similar(c, c, RES)
    assert not is_similar(c, _cfg((1.1 + 10 * RES, 2.1), (3.05, 0.3)), RES)
    # cell [1.0, 1.25): 1.01 -> 1.11 stays inside, 1.2 -> 1.3 straddles the boundary
    assert is_similar(_cfg((1.01, 2.1), (3.05, 0.3)), _cfg((1.01 + 0.4 * RES, 2.1), (3.05, 0.3)), RES)
    assert not is_similar(_cfg((1.2, 2.1), (3.05, 0.3)), _cfg((1.2 + 0.4 * RES, 2.1), (3.05, 0.3)), RES)
    # the agent is ignored
    assert is_similar(_cfg((1.1, 2.1), agent=(0, 0)), _cfg((1.1, 2.1), agent=(3, 3)), RES)


def test_reject_examples():
    p = SearchParams()
    c = _cfg((1.1, 1.1))
    assert not reject([], c, p)
    assert not reject([SearchNode(c)], c, p)
    assert reject([SearchNode(c), SearchNode(_cfg((1.12, 1.05)))], c, p)
    assert not reject([SearchNode(c), SearchNode(c)], c, SearchParams(reject_enabled=False))


def _insert(configs, params):
    nodes = []
    for c in configs:
        if not reject(nodes, c, params):
            nodes.append(SearchNode(c))
    return nodes


def test_max_similar_three_into_two():
    configs = [_cfg((1.05, 1.05), agent=(0, 0)), _cfg((1.1, 1.2), agent=(2, 0)), _cfg((1.2, 1.01), agent=(0, 2))]
    assert len(_insert(configs, SearchParams(max_similar=2))) == 2
    assert len(_insert(configs, SearchParams(max_similar=2, reject_enabled=False))) == 3


@given(st.lists(st.tuples(st.floats(0, 2), st.floats(0, 2), st.floats(0, 2), st.floats(0, 2)), max_size=40),
       st.integers(1, 4))
def test_reject_bounds_similar_groups(points, max_similar):
    params = SearchParams(max_similar=max_similar)
    nodes = _insert([_cfg((a, b), (c, d)) for a, b, c, d in points], params)
    for n in nodes:
        assert sum(is_similar(n.config, m.config, RES) for m in nodes) <= max_similar


# -- try_goal ----------------------------------------------------------------------------


def test_try_goal_already_inside(rng):
    scene, c = make_scene(objects=(("goal", 3.45, 3.45, 0.25),))
    plan = try_goal(scene, c, SearchParams(), rng)
    assert plan.segments == () and plan.start == plan.end == c


def test_try_goal_cube_free(rng):
    scene, c = bundled("Cube-Free")
    plan = try_goal(scene, c, SearchParams(), rng)
    o = scene.goal_object
    assert plan.pickplaces == 1
    assert scene.goal_region.contains_rect(scene.object_rect(o, plan.end.objects[o]))


def test_try_goal_fails_on_wall(rng):
    scene, c = bundled("Wall")
    with pytest.raises(PlanningError):
        try_goal(scene, c, SearchParams(), rng)


# -- search ----------------------------------------------------------------------------------


def test_search_corner_needs_no_subproblems():
    scene, c = bundled("Corner")
    sol = search(scene, c, rng=np.random.default_rng(0))
    assert len(sol.plans) == 1 and sol.stats.subproblems_attempted == 0
    assert check_solution(scene, c, sol.plans, FINE) == []


def test_search_wall_easy_regrasps():
    scene, c = bundled("Wall-Easy")
    sol = search(scene, c, rng=np.random.default_rng(0))
    assert len(sol.plans) >= 2 and sol.total_pickplaces >= 2
    assert check_solution(scene, c, sol.plans, FINE) == []
    for prev, nxt in zip(sol.plans[:-1], sol.plans[1:]):
        assert prev.end == nxt.start


def test_search_sealed_exhausts():
    ring = [(1.5, 1.5, 2.9, 1.7), (1.5, 2.7, 2.9, 2.9), (1.5, 1.7, 1.7, 2.7), (2.7, 1.7, 2.9, 2.7)]
    scene, c = make_scene(size=(5, 5), walls=ring, objects=(("goal", 2.2, 2.2, 0.25),), goal=(3.5, 3.5, 4.5, 4.5))
    with pytest.raises(Exhausted) as info:
        search(scene, c, rng=np.random.default_rng(0))
    assert info.value.stats.nodes_expanded == 2
    assert info.value.stats.subproblems_attempted == 0


def test_search_timeout():
    scene, c = bundled("Wall")
    with pytest.raises(Timeout):
        search(scene, c, SearchParams(wall_clock_budget=1e-6), rng=np.random.default_rng(0))


def test_baseline_is_one_goal_attempt():
    scene, c = bundled("Wall")
    with pytest.raises(Exhausted) as info:
        search(scene, c, SearchParams(propose_enabled=False), rng=np.random.default_rng(0))
    st_ = info.value.stats
    assert (st_.goal_attempts, st_.nodes_expanded, st_.subproblems_attempted) == (1, 1, 0)


def test_search_deterministic():
    scene, c = bundled("O-Room")
    a = search(scene, c, rng=np.random.default_rng(1))
    b = search(scene, c, rng=np.random.default_rng(1))
    assert a.plans == b.plans
    assert (a.stats.nodes_expanded, a.stats.subproblems_attempted) == (b.stats.nodes_expanded, b.stats.subproblems_attempted)


def test_expansion_discipline(monkeypatch):
    seen = []
    real = search_mod.select_node

    def spy(nodes, params):
        n = real(nodes, params)
        if n is not None:
            seen.append((n.expansions, any(m.expansions == 0 for m in nodes)))
        return n

    monkeypatch.setattr(search_mod, "select_node", spy)
    scene, c = bundled("Wall")
    try:
        search(scene, c, SearchParams(wall_clock_budget=30), rng=np.random.default_rng(2))
    except (Exhausted, Timeout):
        pass
    assert seen
    for expansions, fresh_exists in seen:
        assert expansions < 2
        # a once-expanded node is picked only when no fresh node is left
        assert expansions == 0 or not fresh_exists


def test_generator_error_leaves_trivial_subgoal(monkeypatch):
    def starved(*args, **kwargs):
        raise SamplingStarved("starved")

    monkeypatch.setattr(search_mod, "generate_candidates", starved)
    scene, c = bundled("Wall")
    with pytest.raises(Exhausted) as info:
        search(scene, c, SearchParams(max_similar=1), rng=np.random.default_rng(0))
    s = info.value.stats
    # one trivial subgoal per expansion of the (single, rejected-regrasp) root
    assert s.subproblems_attempted == s.nodes_expanded == 2


def test_trace_chains():
    scene, c = bundled("Cube-Free")
    rng = np.random.default_rng(0)
    p1 = try_goal(scene, c, SearchParams(), rng)
    root = SearchNode(c)
    mid = SearchNode(p1.end, root, p1)
    p2 = try_goal(scene, p1.end, SearchParams(), rng)
    sol = trace(mid, p2)
    assert sol.plans == (p1, p2)
    with pytest.raises(AssertionError):
        trace(SearchNode(c, root, p2), p1)


def test_search_params_validation():
    with pytest.raises(ValueError):
        SearchParams(wall_clock_budget=0)
    with pytest.raises(ValueError):
        SearchParams(similarity_resolution=0)
    with pytest.raises(ValueError):
        SearchParams(max_similar=0)


def test_btl_and_hum_variants_solve_wall():
    scene, c = bundled("Wall")
    for gen in ("btl", "hum"):
        params = SearchParams(subgoal_params=SubgoalParams(generator=gen, filter_enabled=gen != "hum"),
                              prio_enabled=gen != "hum")
        sol = search(scene, c, params, rng=np.random.default_rng(0))
        assert check_solution(scene, c, sol.plans, FINE) == []
