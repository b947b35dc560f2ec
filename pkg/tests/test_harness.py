import hashlib
import math

import numpy as np
import pytest

import goalps.harness as harness
from goalps import MethodSpec
from goalps.estimators import AteEstimate
from goalps.exceptions import TooManyFailuresError
from goalps.harness import (
    OracleDiagnostics,
    ReplicationSummary,
    emit_results,
    oracle_diagnostics,
    run_replications,
)
from goalps.simgen import Scenario, paper_scenario


def tiny_scenario(seed=11, n=60):
    # 1 confounder, 1 outcome-only, 1 treatment-only, 3 spurious
    return Scenario(n=n, rho=0.0, q=1, p=6,
                    alpha_star=np.array([1.0, 0.0, 0.5, 0.0, 0.0, 0.0]),
                    beta_star=np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
                    beta_A=0.0, seed=seed)


def stub_estimate(ate, selected, method):
    return AteEstimate(ate=ate, method=method, selected=frozenset(selected),
                       lambda1=1.0, lambda2=0.0, ps=np.array([0.5]),
                       alpha_hat=np.zeros(1))


class TestAggregation:
    def test_constant_truth_estimates(self, monkeypatch):
        s = tiny_scenario()
        m = MethodSpec("GOAL")
        monkeypatch.setattr(
            harness, "fit_method",
            lambda d, meth, grid: stub_estimate(s.beta_A, [], meth))
        (summ,) = run_replications(s, [m], R=8)
        assert summ.bias == 0.0
        assert summ.se == 0.0
        assert summ.mse == 0.0
        assert summ.n_failed == 0

    def test_ones_versus_zero_truth(self, monkeypatch):
        s = tiny_scenario()
        monkeypatch.setattr(
            harness, "fit_method",
            lambda d, meth, grid: stub_estimate(1.0, [], meth))
        (summ,) = run_replications(s, [MethodSpec("GOAL")], R=3)
        assert summ.bias == pytest.approx(1.0)
        assert summ.se == pytest.approx(0.0)
        assert summ.mse == pytest.approx(1.0)

    def test_zero_two_hand_arithmetic(self, monkeypatch):
        s = tiny_scenario()
        ates = iter([0.0, 2.0])
        monkeypatch.setattr(
            harness, "fit_method",
            lambda d, meth, grid: stub_estimate(next(ates), [], meth))
        (summ,) = run_replications(s, [MethodSpec("GOAL")], R=2)
        assert summ.bias == pytest.approx(1.0)
        assert summ.se == pytest.approx(math.sqrt(2.0))
        assert summ.mse == pytest.approx(2.0)
        R = summ.n_replications
        assert summ.mse == pytest.approx(
            summ.bias ** 2 + summ.se ** 2 * (R - 1) / R, abs=1e-10)

    def test_identity_holds_on_real_run(self):
        s = tiny_scenario()
        summaries = run_replications(s, [MethodSpec("GOAL"), MethodSpec("LASSO")], R=6)
        for summ in summaries:
            R = summ.n_replications
            assert summ.mse == pytest.approx(
                summ.bias ** 2 + summ.se ** 2 * (R - 1) / R, abs=1e-10)

    def test_selection_proportions_counted(self, monkeypatch):
        s = tiny_scenario()
        seq = iter([{0}, {0, 1}, {0}, set()])
        monkeypatch.setattr(
            harness, "fit_method",
            lambda d, meth, grid: stub_estimate(0.0, next(seq), meth))
        (summ,) = run_replications(s, [MethodSpec("GOAL")], R=4)
        np.testing.assert_allclose(summ.selection_prop[:2], [0.75, 0.25])
        np.testing.assert_allclose(summ.selection_prop[2:], 0.0)

    def test_failures_counted_and_capped(self, monkeypatch):
        s = tiny_scenario()

        calls = {"k": 0}

        def flaky(d, meth, grid):
            calls["k"] += 1
            if calls["k"] % 10 == 0:
                raise harness.GoalpsError("boom")
            return stub_estimate(0.0, [], meth)

        monkeypatch.setattr(harness, "fit_method", flaky)
        (summ,) = run_replications(s, [MethodSpec("GOAL")], R=20)
        assert summ.n_failed == 2
        assert summ.n_replications == 18

        calls["k"] = 0

        def mostly_broken(d, meth, grid):
            calls["k"] += 1
            if calls["k"] % 3 == 0:
                raise harness.GoalpsError("boom")
            return stub_estimate(0.0, [], meth)

        monkeypatch.setattr(harness, "fit_method", mostly_broken)
        with pytest.raises(TooManyFailuresError):
            run_replications(s, [MethodSpec("GOAL")], R=21)

    def test_paired_design_same_dataset_per_method(self, monkeypatch):
        s = tiny_scenario()
        seen: list[str] = []

        def recorder(d, meth, grid):
            seen.append(hashlib.sha256(d.X.tobytes() + d.A.tobytes()
                                       + d.Y.tobytes()).hexdigest())
            return stub_estimate(0.0, [], meth)

        monkeypatch.setattr(harness, "fit_method", recorder)
        run_replications(s, [MethodSpec("GOAL"), MethodSpec("OAL")], R=3)
        digests = seen
        # per replication, consecutive method calls saw identical bytes
        assert digests[0] == digests[1]
        assert digests[2] == digests[3]
        assert digests[4] == digests[5]
        assert digests[0] != digests[2]

    def test_parallel_equals_serial(self):
        s = tiny_scenario()
        methods = [MethodSpec("GOAL"), MethodSpec("LASSO")]
        serial = run_replications(s, methods, R=6, workers=1)
        parallel = run_replications(s, methods, R=6, workers=4)
        for a, b in zip(serial, parallel):
            np.testing.assert_array_equal(a.ates, b.ates)
            np.testing.assert_array_equal(a.selection_prop, b.selection_prop)
            assert a.bias == b.bias and a.se == b.se and a.mse == b.mse

    def test_r_below_two_rejected(self):
        with pytest.raises(ValueError):
            run_replications(tiny_scenario(), [MethodSpec("GOAL")], R=1)


class TestOracleDiagnostics:
    def test_vacuous_zero_recovery_when_no_inactive(self):
        # every covariate is a confounder: the inactive set is empty
        s = Scenario(n=80, rho=0.0, q=1, p=3,
                     alpha_star=np.array([0.8, 0.7, 0.6]),
                     beta_star=np.array([1.0, 1.0, 1.0]),
                     beta_A=0.0, seed=3)
        diag = oracle_diagnostics(s, R=50, gamma=3.0)
        assert diag.zero_recovery_rate == 1.0
        assert diag.active_indices == (0, 1, 2)
        assert diag.z_mean.shape == (3,)
        assert np.all(diag.ref_var > 0)

    def test_requires_fifty_replications(self):
        with pytest.raises(ValueError):
            oracle_diagnostics(tiny_scenario(), R=10)

    def test_reference_variance_positive_definite_block(self):
        s = tiny_scenario()
        ref = harness.reference_information_diag(s, n_reference=5000)
        assert ref.shape == (len(s.active_set),)
        assert np.all(ref > 0)


class TestEmitResults:
    def run_small(self, tmp_path, seed=5):
        s = paper_scenario(n=100, rho=0.0, seed=seed)
        methods = [MethodSpec("GOAL"), MethodSpec("LASSO")]
        summaries = run_replications(s, methods, R=3)
        return emit_results(summaries, tmp_path / "out"), s

    def test_metrics_rows(self, tmp_path):
        paths, s = self.run_small(tmp_path)
        metrics = [p for p in paths if p.name == "metrics.csv"][0]
        lines = metrics.read_text().splitlines()
        assert lines[0].startswith("#")
        assert "rng=PCG64" in lines[0]
        assert lines[1] == "n,p,card_A,rho,method,bias,se,mse,n_failed"
        assert len(lines) == 2 + 2  # two methods, one scenario

    def test_selection_table_rows(self, tmp_path):
        paths, s = self.run_small(tmp_path)
        sel = [p for p in paths if p.suffix == ".csv" and "selection" in p.name][0]
        lines = sel.read_text().splitlines()
        assert lines[1] == "method,covariate_index,role,proportion"
        assert len(lines) == 2 + 2 * s.p

    def test_svg_written(self, tmp_path):
        paths, _ = self.run_small(tmp_path)
        svgs = [p for p in paths if p.suffix == ".svg"]
        assert len(svgs) == 1
        head = svgs[0].read_text()[:500]
        assert "<svg" in head

    def test_rerun_byte_identical(self, tmp_path):
        paths1, _ = self.run_small(tmp_path / "a")
        paths2, _ = self.run_small(tmp_path / "b")
        for p1, p2 in zip(sorted(paths1), sorted(paths2)):
            assert p1.name == p2.name
            assert p1.read_bytes() == p2.read_bytes()

    def test_aggregation_identity_from_file(self, tmp_path):
        paths, _ = self.run_small(tmp_path)
        metrics = [p for p in paths if p.name == "metrics.csv"][0]
        R = 3
        for line in metrics.read_text().splitlines()[2:]:
            parts = line.split(",")
            bias, se, mse, n_failed = (float(parts[5]), float(parts[6]),
                                       float(parts[7]), int(parts[8]))
            r_inc = R - n_failed
            assert mse == pytest.approx(bias ** 2 + se ** 2 * (r_inc - 1) / r_inc,
                                        abs=1e-10)
