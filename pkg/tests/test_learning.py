import dataclasses

import numpy as np
import pytest

from crowdwise import (
    DiagnosticViolation,
    NoiseModel,
    RunConfig,
    br_step,
    diagnostics,
    pareto_segment,
    run,
    validate_network,
    zstar_membership,
)
from crowdwise.learning import fixed_point_residual, m_statistic

PAIR = [[0.5, 0.5], [0.5, 0.5]]


class TestRunConfig:
    @pytest.mark.parametrize("kwargs", [
        {"max_steps": 0}, {"tol_fp": 0.0}, {"tol_fp": -1.0}, {"record_every": 0}])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            RunConfig(seed=0, z0=np.zeros(2), **kwargs)


class TestBRStep:
    def test_symmetric_pair_is_fixed(self):
        net, noise = validate_network(PAIR), NoiseModel([1.0, 1.0])
        rng = np.random.default_rng(1)
        for _ in range(10):
            z, k = br_step(net, noise, np.zeros(2), rng)
            np.testing.assert_array_equal(z, [0, 0])
            assert k in (0, 1)

    def test_regular_profile_never_produces_one(self, ref_net, ref_noise):
        rng = np.random.default_rng(3)
        z = np.full(4, 0.5)
        for _ in range(200):
            z, _ = br_step(ref_net, ref_noise, z, rng)
            assert np.all(z < 1)

    def test_largest_variance_leaves_stubbornness(self, ref_net, ref_noise):
        # agent 2 has strictly largest variance and faces stubborn agent 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            z = np.array([1.0, 0.3, 1.0, 0.6])
            z_new, k = br_step(ref_net, ref_noise, z, rng)
            if k == 2:
                assert z_new[2] < 1
            np.testing.assert_array_equal(np.delete(z_new, k), np.delete(z, k))

    def test_activation_is_uniform(self, ref_net, ref_noise):
        rng = np.random.default_rng(0)
        z = pareto_segment(ref_net, ref_noise).profile(3.0)
        counts = np.bincount([br_step(ref_net, ref_noise, z, rng)[1] for _ in range(8000)],
                             minlength=4)
        # binomial 3-sigma band around 2000
        assert np.all(np.abs(counts - 2000) <= 3 * np.sqrt(8000 * 0.25 * 0.75))

    def test_draw_order(self, ref_net, ref_noise):
        z = np.array([1.0, 0.3, 1.0, 0.6])
        z_new, k = br_step(ref_net, ref_noise, z, np.random.default_rng(7))
        ref = np.random.default_rng(7)
        assert k == ref.integers(4)
        if k == 2:
            assert z_new[2] == ref.random()


class TestRun:
    def test_start_on_segment(self, ref_net, ref_noise):
        z0 = pareto_segment(ref_net, ref_noise).profile(12.5)
        summary, traj = run(ref_net, ref_noise, RunConfig(seed=0, z0=z0))
        assert summary.converged and summary.steps == 0 and summary.entry_time == 0
        assert summary.alpha_hat == pytest.approx(12.5, rel=1e-12)
        assert len(traj) == 1 and traj[0].active_agent is None

    @pytest.mark.parametrize("z0", [
        [0.5, 0.5, 0.5, 0.5], [0.99, 0.99, 0, 0.99], [0.9, 1, 0, 0.9], [1, 0.9, 0, 1]])
    def test_converges_into_segment(self, ref_net, ref_noise, z0):
        seg = pareto_segment(ref_net, ref_noise)
        for seed in range(5):
            summary, traj = run(ref_net, ref_noise, RunConfig(seed=seed, z0=np.array(z0)))
            assert summary.converged and summary.in_zstar
            assert summary.zstar_residual <= 1e-9
            assert 0 < summary.alpha_hat <= seg.alpha_star + 1e-9
            assert summary.apriori_bound_ok
            assert summary.fixed_point_residual <= 1e-12
            assert traj[-1].t == summary.steps
            diagnostics(ref_net, ref_noise, traj)

    def test_different_seeds_different_limits(self, ref_net, ref_noise):
        alphas = {run(ref_net, ref_noise, RunConfig(seed=s, z0=np.full(4, 0.5)))[0].alpha_hat
                  for s in range(6)}
        assert max(alphas) - min(alphas) > 0.1

    def test_reproducible(self, ref_net, ref_noise):
        cfg = RunConfig(seed=42, z0=np.array([1, 0.9, 0, 1.0]))
        a, ta = run(ref_net, ref_noise, cfg)
        b, tb = run(ref_net, ref_noise, cfg)
        assert a.as_dict() == b.as_dict()
        assert len(ta) == len(tb)
        for ra, rb in zip(ta, tb):
            assert (ra.t, ra.active_agent, ra.V, ra.M) == (rb.t, rb.active_agent, rb.V, rb.M)
            np.testing.assert_array_equal(ra.z, rb.z)

    def test_max_steps_reached(self, ref_net, ref_noise):
        summary, traj = run(ref_net, ref_noise,
                            RunConfig(seed=0, z0=np.full(4, 0.5), max_steps=1))
        assert not summary.converged and summary.steps == 1
        assert summary.alpha_hat is None and not summary.in_zstar
        assert [r.t for r in traj] == [0, 1]

    def test_record_stride(self, ref_net, ref_noise):
        cfg = RunConfig(seed=4, z0=np.full(4, 0.5), record_every=25)
        summary, traj = run(ref_net, ref_noise, cfg)
        ts = [r.t for r in traj]
        assert ts[0] == 0 and ts[-1] == summary.steps
        assert all(t % 25 == 0 for t in ts[1:-1])
        full, _ = run(ref_net, ref_noise, dataclasses.replace(cfg, record_every=1))
        np.testing.assert_array_equal(full.final_z, summary.final_z)

    def test_stubborn_records(self, ref_net, ref_noise):
        _, traj = run(ref_net, ref_noise, RunConfig(seed=0, z0=np.array([1, 1, 0, 1.0])))
        assert traj[0].V is None and traj[0].M == float("inf")
        assert traj[-1].V is not None and np.isfinite(traj[-1].M)


class TestDiagnostics:
    def _trajectory(self, ref_net, ref_noise, seed=2):
        return run(ref_net, ref_noise, RunConfig(seed=seed, z0=np.array([0.9, 1, 0, 0.9])))

    def test_constant_segment_trajectory(self, ref_net, ref_noise):
        z = pareto_segment(ref_net, ref_noise).profile(4.0)
        _, traj = run(ref_net, ref_noise, RunConfig(seed=0, z0=z))
        rep = diagnostics(ref_net, ref_noise, traj * 3)
        assert rep.entry_time == 0 and all(rep.checks.values())

    def test_entry_time_matches_summary(self, ref_net, ref_noise):
        summary, traj = self._trajectory(ref_net, ref_noise)
        rep = diagnostics(ref_net, ref_noise, traj)
        assert rep.entry_time == summary.entry_time
        assert rep.m_entry == pytest.approx(m_statistic(ref_net, ref_noise,
                                                        [r for r in traj if r.t == rep.entry_time][0].z))

    def test_corrupted_bound(self, ref_net, ref_noise):
        _, traj = self._trajectory(ref_net, ref_noise)
        i = len(traj) // 2 + 1
        z = np.array(traj[i].z)
        z[0] = 0.999999
        bad = traj[:i] + [dataclasses.replace(traj[i], z=z)] + traj[i + 1:]
        with pytest.raises(DiagnosticViolation) as exc:
            diagnostics(ref_net, ref_noise, bad)
        assert exc.value.check == "apriori_bound" and exc.value.step == traj[i].t

    def test_corrupted_restubborn(self, ref_net, ref_noise):
        _, traj = self._trajectory(ref_net, ref_noise)
        z = np.array(traj[-1].z)
        z[3] = 1.0
        bad = traj + [dataclasses.replace(traj[-1], t=traj[-1].t + 1, z=z)]
        with pytest.raises(DiagnosticViolation) as exc:
            diagnostics(ref_net, ref_noise, bad)
        assert exc.value.check == "no_restubborn"

    def test_corrupted_cost_increase(self, ref_net, ref_noise):
        # z = 0 respects the bound and lowers M, but leaves the segment so V rises
        z_far = np.zeros(4)
        z_near = pareto_segment(ref_net, ref_noise).profile(15.0)
        _, t1 = run(ref_net, ref_noise, RunConfig(seed=0, z0=z_near))
        rec = dataclasses.replace(t1[0], t=1, z=z_far)
        with pytest.raises(DiagnosticViolation) as exc:
            diagnostics(ref_net, ref_noise, [t1[0], rec])
        assert exc.value.check == "V_monotone"

    def test_empty(self, ref_net, ref_noise):
        with pytest.raises(ValueError):
            diagnostics(ref_net, ref_noise, [])


def test_fixed_point_residual(ref_net, ref_noise):
    assert fixed_point_residual(ref_net, ref_noise, [1, 0, 0, 0]) == float("inf")
    z = pareto_segment(ref_net, ref_noise).profile(20.0)
    assert fixed_point_residual(ref_net, ref_noise, z) <= 1e-14
    assert zstar_membership(ref_net, ref_noise, z)[0]
