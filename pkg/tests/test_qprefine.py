"""QP construction, separation identity and the active-set solver."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from odflow.leaderlayout import FreeRect, MatrixEdge, compute_ordering, route_leaders
from odflow.qprefine import QpParams, build_qp, refine_plan, separation, solve_qp

from conftest import count_crossings, point_to_line_distance


def make_plan(anchors, ports, k=1.0):
    edge = MatrixEdge(tuple(ports))
    ids = [a[0] for a in anchors]
    ordering = compute_ordering(anchors, edge, k)
    return route_leaders(anchors, ordering, edge, k)


def grid_search(problem, stages=5, grid_n=17):
    """Refining exhaustive search over the free variables (<= 4 of them).

    Vectorized evaluation of the full grid per stage; the window shrinks
    around the incumbent so the final effective step is far below 1e-3 of
    the rect extent.
    """
    idx = np.flatnonzero(problem.free)
    assert idx.size <= 4
    lo = problem.lower[idx]
    hi = problem.upper[idx]
    center = problem.initial[idx].astype(float).copy()
    extent = (hi - lo).astype(float)
    best_obj, best_z = math.inf, None
    for _ in range(stages):
        axes = [
            np.linspace(
                max(lo[i], center[i] - extent[i] / 2),
                min(hi[i], center[i] + extent[i] / 2),
                grid_n,
            )
            for i in range(idx.size)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        zs = np.stack([m.ravel() for m in mesh], axis=1)  # (N, m)
        full = np.tile(problem.initial, (zs.shape[0], 1))
        full[:, idx] = zs
        pcentre = ((full - problem.initial) ** 2).sum(axis=1)
        psep = np.zeros(zs.shape[0])
        feasible = np.ones(zs.shape[0], dtype=bool)
        for p in problem.pairs:
            denom = math.sqrt(p.slope**2 + 1.0)
            ia, ib = 2 * p.index_a, 2 * p.index_b
            sep = (
                p.slope * full[:, ib] - full[:, ib + 1]
                - p.slope * full[:, ia] + full[:, ia + 1]
            ) / denom
            psep += (sep - problem.D) ** 2
            feasible &= sep >= p.eps - 1e-9
        obj = pcentre + problem.w * psep
        obj[~feasible] = math.inf
        j = int(np.argmin(obj))
        if obj[j] < best_obj:
            best_obj, best_z = float(obj[j]), zs[j].copy()
        if best_z is None:
            break
        center = best_z
        extent = extent * (4.0 / (grid_n - 1))
    return best_obj


class TestSeparation:
    def test_identical_sites(self):
        assert separation((3.0, 4.0), (3.0, 4.0), 1.0) == 0.0

    def test_hand_evaluated_example(self):
        # d = (1*1 - (-1) - 0 + 0)/sqrt(2) = sqrt(2)
        assert separation((0.0, 0.0), (1.0, -1.0), 1.0) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_translation_invariance_along_diagonal(self):
        k = 1.7
        a, b = (2.0, 5.0), (4.0, 1.0)
        d0 = separation(a, b, k)
        for t in (0.5, -3.0, 12.0):
            at = (a[0] + t, a[1] + t * k)
            bt = (b[0] + t, b[1] + t * k)
            assert separation(at, bt, k) == pytest.approx(d0, abs=1e-9)

    def test_matches_point_to_line_distance_oracle(self):
        rng = random.Random(21)
        for _ in range(1000):
            k = rng.choice([0.5, 1.0, 2.0, 3.3])
            a = (rng.uniform(-100, 100), rng.uniform(-100, 100))
            b = (rng.uniform(-100, 100), rng.uniform(-100, 100))
            d = separation(a, b, k)
            assert abs(abs(d) - point_to_line_distance(b, a, k)) < 1e-9
            # Sign: positive iff A's support line is above B's.
            ua = a[1] - k * a[0]
            ub = b[1] - k * b[0]
            if abs(ua - ub) > 1e-9:
                assert (d > 0) == (ua > ub)


class TestBuildQp:
    def test_single_site_no_psep(self):
        plan = make_plan([("a", (10.0, 50.0))], [(200.0, 50.0)])
        plan.free_rects["a"] = FreeRect(0.0, 60.0, 20.0, 40.0)
        problem = build_qp(plan, plan.free_rects, QpParams(map_width=200.0))
        assert problem.pairs == []
        sol = solve_qp(problem)
        assert sol.objective == pytest.approx(0.0, abs=1e-12)
        assert sol.sites["a"] == pytest.approx((10.0, 50.0))

    def test_w_zero_keeps_initial_sites(self):
        anchors = [("a", (10.0, 80.0)), ("b", (12.0, 60.0)), ("c", (8.0, 40.0))]
        plan = make_plan(anchors, [(200.0, 90.0), (200.0, 60.0), (200.0, 30.0)])
        for rid, site in anchors:
            plan.free_rects[rid] = FreeRect(site[0] - 5, site[1] + 5, site[0] + 5, site[1] - 5)
        problem = build_qp(plan, plan.free_rects, QpParams(w=0.0, map_width=200.0))
        sol = solve_qp(problem)
        assert sol.objective == pytest.approx(0.0, abs=1e-10)
        for rid, site in anchors:
            assert sol.sites[rid][0] == pytest.approx(site[0], abs=1e-8)
            assert sol.sites[rid][1] == pytest.approx(site[1], abs=1e-8)

    def test_d_defaults_to_max_initial_separation(self):
        anchors = [("a", (10.0, 80.0)), ("b", (30.0, 60.0)), ("c", (8.0, 40.0))]
        plan = make_plan(anchors, [(300.0, 90.0), (300.0, 60.0), (300.0, 30.0)])
        for rid, site in anchors:
            plan.free_rects[rid] = FreeRect(site[0] - 5, site[1] + 5, site[0] + 5, site[1] - 5)
        problem = build_qp(plan, plan.free_rects, QpParams(map_width=300.0))
        assert problem.D == pytest.approx(max(p.initial for p in problem.pairs))

    def test_separations_recomputed_from_solved_sites(self):
        anchors = [("a", (10.0, 80.0)), ("b", (14.0, 66.0)), ("c", (8.0, 40.0))]
        plan = make_plan(anchors, [(300.0, 90.0), (300.0, 60.0), (300.0, 30.0)])
        for rid, site in anchors:
            plan.free_rects[rid] = FreeRect(site[0] - 6, site[1] + 6, site[0] + 6, site[1] - 6)
        problem = build_qp(plan, plan.free_rects, QpParams(map_width=300.0))
        sol = solve_qp(problem)
        for pair, got in zip(problem.pairs, sol.separations):
            a = sol.sites[plan.ordering[pair.index_a]]
            b = sol.sites[plan.ordering[pair.index_b]]
            assert got == pytest.approx(separation(a, b, pair.slope), abs=1e-8)

    def test_collapsed_rects_fix_variables(self):
        anchors = [("a", (10.0, 80.0)), ("b", (12.0, 60.0))]
        plan = make_plan(anchors, [(200.0, 85.0), (200.0, 55.0)])
        plan.free_rects["a"] = FreeRect(10.0, 80.0, 10.0, 80.0, pruned=True)
        plan.free_rects["b"] = FreeRect(7.0, 65.0, 17.0, 55.0)
        problem = build_qp(plan, plan.free_rects, QpParams(map_width=200.0))
        assert not problem.free[0] and not problem.free[1]
        sol = solve_qp(problem)
        assert sol.sites["a"] == (10.0, 80.0)


class TestSolveQp:
    def test_squeezed_pair_separates(self):
        # Two nearly collinear up-leaders with room to move: PSep pushes apart.
        anchors = [("a", (10.0, 50.0)), ("b", (11.0, 48.0))]
        plan = make_plan(anchors, [(120.0, 80.0), (118.0, 60.0)])
        plan.free_rects["a"] = FreeRect(0.0, 60.0, 20.0, 40.0)
        plan.free_rects["b"] = FreeRect(1.0, 58.0, 21.0, 38.0)
        problem = build_qp(plan, plan.free_rects, QpParams(w=5.0, D=20.0, map_width=120.0))
        initial_obj = problem.objective(problem.initial)
        sol = solve_qp(problem)
        assert sol.converged
        assert sol.objective < initial_obj
        assert sol.separations[0] > problem.pairs[0].initial  # moved toward D

    def test_objective_never_above_initial(self):
        rng = random.Random(4)
        for trial in range(20):
            n = rng.randint(2, 9)
            anchors = [
                (f"s{i}", (rng.uniform(0, 120), rng.uniform(0, 200))) for i in range(n)
            ]
            ports = [(450.0, 210.0 - (i + 0.5) * 210.0 / n) for i in range(n)]
            plan = make_plan(anchors, ports)
            for leader in plan.leaders:
                x, y = leader.site
                r = rng.uniform(1.0, 15.0)
                plan.free_rects[leader.region_id] = FreeRect(x - r, y + r, x + r, y - r)
            problem = build_qp(plan, plan.free_rects, QpParams(w=rng.uniform(0.1, 5.0), map_width=450.0))
            z0 = problem.initial.copy()
            assert problem.feasible(z0), trial
            sol = solve_qp(problem)
            assert sol.objective <= problem.objective(z0) + 1e-9, trial
            z = np.array([v for rid in problem.site_ids for v in sol.sites[rid]])
            assert problem.feasible(z), trial

    def test_ordering_constraint_retained_when_binding(self):
        # Large D forces the pair against d_j >= eps without crossing.
        anchors = [("a", (10.0, 52.0)), ("b", (10.0, 48.0))]
        plan = make_plan(anchors, [(100.0, 70.0), (100.0, 30.0)])
        plan.free_rects["a"] = FreeRect(8.0, 54.0, 12.0, 50.0)
        plan.free_rects["b"] = FreeRect(8.0, 50.0, 12.0, 46.0)
        problem = build_qp(plan, plan.free_rects, QpParams(w=50.0, D=-10.0, map_width=100.0))
        sol = solve_qp(problem)
        for pair, d in zip(problem.pairs, sol.separations):
            assert d >= pair.eps - 1e-8
        refined, _ = refine_plan(plan, QpParams(w=50.0, D=-10.0, map_width=100.0))
        assert count_crossings([l.points for l in refined.leaders]) == 0

    def test_matches_grid_search_on_4var_instances(self):
        rng = random.Random(12)
        checked = 0
        while checked < 20:
            y_a = rng.uniform(55.0, 75.0)
            y_b = y_a - rng.uniform(4.0, 18.0)
            anchors = [("a", (rng.uniform(5, 25), y_a)), ("b", (rng.uniform(5, 25), y_b))]
            ports = [(140.0, 80.0), (140.0, 40.0)]
            try:
                plan = make_plan(anchors, ports)
            except Exception:
                continue
            for leader in plan.leaders:
                x, y = leader.site
                r = rng.uniform(2.0, 10.0)
                plan.free_rects[leader.region_id] = FreeRect(x - r, y + r, x + r, y - r)
            problem = build_qp(
                plan, plan.free_rects, QpParams(w=rng.uniform(0.2, 4.0), D=rng.uniform(5.0, 40.0), map_width=140.0)
            )
            if np.count_nonzero(problem.free) > 4:
                continue
            sol = solve_qp(problem)
            oracle = grid_search(problem)
            assert sol.objective <= oracle + 1e-2, (checked, sol.objective, oracle)
            checked += 1

    def test_deterministic(self):
        anchors = [("a", (10.0, 50.0)), ("b", (11.0, 48.0)), ("c", (30.0, 20.0))]
        plan = make_plan(anchors, [(120.0, 80.0), (118.0, 60.0), (116.0, 40.0)])
        for leader in plan.leaders:
            x, y = leader.site
            plan.free_rects[leader.region_id] = FreeRect(x - 5, y + 5, x + 5, y - 5)
        params = QpParams(w=2.0, map_width=120.0)
        s1 = solve_qp(build_qp(plan, plan.free_rects, params))
        s2 = solve_qp(build_qp(plan, plan.free_rects, params))
        assert s1.sites == s2.sites and s1.objective == s2.objective

    def test_debug_dump_roundtrip(self):
        import json

        anchors = [("a", (10.0, 50.0)), ("b", (11.0, 40.0))]
        plan = make_plan(anchors, [(100.0, 60.0), (100.0, 35.0)])
        for leader in plan.leaders:
            x, y = leader.site
            plan.free_rects[leader.region_id] = FreeRect(x - 3, y + 3, x + 3, y - 3)
        problem = build_qp(plan, plan.free_rects, QpParams(map_width=100.0))
        doc = json.loads(problem.debug_json())
        assert doc["siteIds"] == ["a", "b"]
        assert len(doc["initial"]) == 4


class TestConvexityInvariant:
    def test_objective_monotone_across_accepted_iterations(self):
        rng = random.Random(77)
        for trial in range(15):
            n = rng.randint(2, 10)
            anchors = [
                (f"s{i}", (rng.uniform(0, 120), rng.uniform(0, 200))) for i in range(n)
            ]
            ports = [(450.0, 210.0 - (i + 0.5) * 210.0 / n) for i in range(n)]
            plan = make_plan(anchors, ports)
            for leader in plan.leaders:
                x, y = leader.site
                r = rng.uniform(1.0, 12.0)
                plan.free_rects[leader.region_id] = FreeRect(x - r, y + r, x + r, y - r)
            problem = build_qp(plan, plan.free_rects, QpParams(w=rng.uniform(0.5, 4.0), map_width=450.0))
            sol = solve_qp(problem)
            hist = sol.objective_history
            assert len(hist) >= 1
            for a, b in zip(hist, hist[1:]):
                assert b <= a + 1e-9, (trial, hist)
