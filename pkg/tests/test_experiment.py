import numpy as np
import pytest

from tvclust.experiment import (ExperimentConfig, METHODS, ablated,
                                method_defaults, median_vdn, metrics_rows,
                                quartiles, replicate_seed, run_experiment,
                                run_replicate)
from tvclust.phantom import PhantomSpec, generate_phantom


@pytest.fixture(scope="module")
def small_dataset():
    return generate_phantom(PhantomSpec(
        d1=8, d2=8, k_true=3, n_channels=20, noise_sigma=0.4,
        signature_overlap=0.2, seed=11))


class TestDefaults:
    def test_table_values_for_combined_methods(self):
        mul1 = method_defaults("ONMFTV_MUL1")
        assert (mul1["sigma1"], mul1["sigma2"], mul1["tau"]) == (0.5, 0.5, 5e-3)
        assert mul1["eps_tv"] == pytest.approx(np.sqrt(1e-5))
        assert mul1["i_max"] == 800 and mul1["init"] == "svd"
        mul2 = method_defaults("ONMFTV_MUL2")
        assert (mul2["sigma1"], mul2["tau"], mul2["i_max"]) == (1.0, 1e-3, 700)
        palm = method_defaults("ONMFTV_PALM")
        assert (palm["sigma1"], palm["sigma2"], palm["tau"]) == (0.1, 0.1, 0.1)
        assert palm["i_max"] == 400
        assert method_defaults("ONMFTV_IPALM")["i_max"] == 300
        spring = method_defaults("ONMFTV_SPRING")
        assert (spring["tau"], spring["s_r"], spring["i_max"]) == (1e-4, 40, 100)

    def test_table_values_for_separated_methods(self):
        km = method_defaults("KMEANS_TV")
        assert km["tau"] == 1.0 and km["init"] == "kmeanspp"
        assert km["prox_iters"] == 100
        choi = method_defaults("ONMF_TV_CHOI")
        assert choi["tau"] == 2e-2 and choi["i_max"] == 600 and choi["init"] == "svd"
        ding = method_defaults("ONMF_TV_DING")
        assert ding["tau"] == 2e-2 and ding["i_max"] == 800

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            method_defaults("ONMFTV_ALS")
        with pytest.raises(ValueError):
            ExperimentConfig(method="ONMFTV_ALS", k=2)


class TestSeeds:
    def test_replicate_seeds_distinct_and_stable(self):
        seeds = [replicate_seed(123, r) for r in range(1, 20)]
        assert len(set(seeds)) == len(seeds)
        assert seeds == [replicate_seed(123, r) for r in range(1, 20)]

    def test_different_master_seeds_decorrelate(self):
        assert replicate_seed(1, 1) != replicate_seed(2, 1)


class TestQuartiles:
    def test_matches_sort_based_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            vals = rng.uniform(size=int(rng.integers(1, 30)))
            got = quartiles(vals)
            v = np.sort(vals)

            def oracle(q):
                pos = q * (len(v) - 1)
                lo, hi = int(np.floor(pos)), int(np.ceil(pos))
                return v[lo] + (pos - lo) * (v[hi] - v[lo])

            assert got["median"] == pytest.approx(oracle(0.5))
            assert got["q1"] == pytest.approx(oracle(0.25))
            assert got["q3"] == pytest.approx(oracle(0.75))
            assert got["min"] == v[0] and got["max"] == v[-1]
            # cross-check against numpy's linear interpolation
            assert got["median"] == pytest.approx(np.percentile(vals, 50))
            assert got["q1"] == pytest.approx(np.percentile(vals, 25))
            assert got["q3"] == pytest.approx(np.percentile(vals, 75))


class TestRunExperiment:
    def test_noiseless_kmeans_scores_zero_vdn(self):
        dataset = generate_phantom(PhantomSpec(
            d1=6, d2=6, k_true=3, n_channels=15, noise_sigma=0.0,
            signature_overlap=0.1, seed=2))
        cfg = ExperimentConfig.for_method("KMEANS_TV", k=3, replicates=1,
                                          master_seed=5, tau=0.0)
        records = run_experiment(cfg, dataset)
        assert records[0].measures["VDn"] == 0.0

    def test_every_method_runs_on_a_small_phantom(self, small_dataset):
        for method in METHODS:
            overrides = {"i_max": 5}
            if method == "ONMFTV_SPRING":
                overrides["s_r"] = 4
            cfg = ExperimentConfig.for_method(method, k=3, replicates=1,
                                              master_seed=1, **overrides)
            rec = run_replicate(cfg, small_dataset, 1)
            assert rec.error is None, f"{method}: {rec.error}"
            assert rec.labels.shape == (64,)
            assert set(rec.measures) == {"E", "VI", "VD", "VDn", "VIn"}

    def test_outputs_and_determinism(self, small_dataset, tmp_path):
        cfg = ExperimentConfig.for_method("KMEANS_TV", k=3, replicates=3,
                                          master_seed=7, i_max=50)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        run_experiment(cfg, small_dataset, out_dir=out_a)
        run_experiment(cfg, small_dataset, out_dir=out_b)

        for name in [f"labels_r{r}.csv" for r in (1, 2, 3)] \
                + [f"map_r{r}.pgm" for r in (1, 2, 3)]:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

        def non_timing_summary(path):
            return [ln for ln in path.read_text().splitlines()
                    if ln.split(",")[1:2] != ["seconds"]]

        assert non_timing_summary(out_a / "summary.csv") \
            == non_timing_summary(out_b / "summary.csv")

        def strip_seconds(path):
            lines = path.read_text().splitlines()
            return [",".join(line.split(",")[:-1]) for line in lines]

        assert strip_seconds(out_a / "metrics.csv") \
            == strip_seconds(out_b / "metrics.csv")
        header = (out_a / "metrics.csv").read_text().splitlines()[0]
        assert header == "method,replicate,E,VI,VD,VDn,VIn,seconds"

    def test_summary_matches_recomputation(self, small_dataset, tmp_path):
        cfg = ExperimentConfig.for_method("KMEANS_TV", k=3, replicates=5,
                                          master_seed=3, i_max=50)
        records = run_experiment(cfg, small_dataset, out_dir=tmp_path)
        lines = (tmp_path / "summary.csv").read_text().splitlines()[1:]
        vdn_line = [ln for ln in lines if ln.split(",")[1] == "VDn"][0]
        med = float(vdn_line.split(",")[5])
        vals = sorted(r.measures["VDn"] for r in records)
        assert med == pytest.approx(vals[2])  # middle of five
        assert med == pytest.approx(median_vdn(records))

    def test_solver_failure_is_recorded_not_raised(self, small_dataset):
        cfg = ExperimentConfig.for_method("KMEANS_TV", k=100, replicates=2,
                                          master_seed=0)
        records = run_experiment(cfg, small_dataset)
        assert all(r.error is not None for r in records)
        assert all(r.measures is None for r in records)
        rows = metrics_rows(records)
        assert all("nan" in row for row in rows)

    def test_process_pool_matches_sequential(self, small_dataset):
        cfg = ExperimentConfig.for_method("KMEANS_TV", k=3, replicates=2,
                                          master_seed=9, i_max=50)
        seq = run_experiment(cfg, small_dataset, threads=1)
        par = run_experiment(cfg, small_dataset, threads=2)
        for a, b in zip(seq, par):
            assert np.array_equal(a.labels, b.labels)
            assert a.measures == b.measures

    def test_ablation_helper_zeroes_tau_only(self):
        cfg = ExperimentConfig.for_method("ONMFTV_PALM", k=4)
        off = ablated(cfg)
        assert off.tau == 0.0
        assert off.sigma1 == cfg.sigma1 and off.i_max == cfg.i_max


def test_default_parameters_run_under_a_minute_per_replicate():
    dataset = generate_phantom(PhantomSpec(
        d1=32, d2=32, k_true=4, n_channels=50, noise_sigma=1.0,
        signature_overlap=0.3, seed=21))
    import time
    for method in METHODS:
        cfg = ExperimentConfig.for_method(method, k=4, replicates=1,
                                          master_seed=1)
        start = time.perf_counter()
        rec = run_replicate(cfg, dataset, 1)
        elapsed = time.perf_counter() - start
        assert rec.error is None, f"{method}: {rec.error}"
        assert elapsed < 60.0, f"{method} took {elapsed:.1f}s"
