import dataclasses
import json

import numpy as np
import pytest

from gmi.bench.generators import (
    example1_models,
    make_confounded_generators,
    substream,
)
from gmi.bench.harness import (
    DEFAULT_GAMMA_GRID,
    BenchmarkConfig,
    MetricsReport,
    build_benchmark,
    gamma_sweep,
    report_json,
    report_table,
    run_benchmark,
    sweep_csv,
)
from gmi.errors import ValidationError
from gmi.identification import ScoringStrategy
from gmi.kernel import KernelParams

from oracles import otwo_sample_mmd_sq

SMALL = BenchmarkConfig(n_models=4, n_platform_prompts=12, n_eval_prompts=3,
                        n_seeds=2, image_dim=8, prompt_dim=4)


class TestSubstream:
    def test_same_tag_same_stream(self):
        a = substream(0, 20, 5).normal(size=4)
        b = substream(0, 20, 5).normal(size=4)
        assert np.array_equal(a, b)

    def test_different_tags_differ(self):
        a = substream(0, 20, 5).normal(size=4)
        b = substream(0, 20, 6).normal(size=4)
        c = substream(1, 20, 5).normal(size=4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestToyPair:
    def test_exact_means_at_zero(self):
        f1, f2 = example1_models()
        assert f1.mean_image(0.0).tolist() == [1.0, 0.0]
        assert f2.mean_image(0.0).tolist() == [0.0, 1.0]

    def test_swap_symmetry(self):
        f1, f2 = example1_models()
        for p in (-0.7, -0.25, 0.0, 0.3, 0.9):
            np.testing.assert_allclose(f2.mean_image(p), f1.mean_image(0.5 - p),
                                       atol=1e-12)

    def test_marginals_indistinguishable(self):
        """Under p ~ U(-1, 1) the two models draw from the same circle, so a
        direct two-sample MMD between large samples is tiny."""
        f1, f2 = example1_models(noise_sigma=0.0)
        rng = substream(123, 0)
        X = f1.sample(rng.uniform(-1, 1, 2000), rng)
        Y = f2.sample(rng.uniform(-1, 1, 2000), rng)
        assert otwo_sample_mmd_sq(X, Y, 0.02) <= 0.01

    def test_conditionals_differ_off_diagonal(self):
        f1, f2 = example1_models()
        gap = np.linalg.norm(f1.mean_image(0.6) - f2.mean_image(0.6))
        assert gap > 0.5

    def test_zero_noise_consumes_no_randomness(self):
        f1, _ = example1_models(noise_sigma=0.0)
        r1, r2 = np.random.default_rng(9), np.random.default_rng(9)
        f1.sample(np.array([0.1, 0.2]), r1)
        assert r1.uniform() == r2.uniform()

    def test_noise_is_seed_deterministic(self):
        f1, _ = example1_models(noise_sigma=0.1)
        p = np.array([0.3, -0.4])
        a = f1.sample(p, substream(7, 3))
        b = f1.sample(p, substream(7, 3))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, f1.mean_image(p))

    def test_prompt_embedding_shape_and_unit_norm(self):
        f1, _ = example1_models(prompt_dim=8)
        q = f1.prompt_embedding(np.array([0.0, 0.5, -0.5]))
        assert q.shape == (3, 8)
        # (cos, sin, 1) through an orthonormal basis keeps norm sqrt(2)
        np.testing.assert_allclose(np.linalg.norm(q, axis=1),
                                   np.sqrt(2.0), atol=1e-12)

    def test_prompt_dim_floor(self):
        with pytest.raises(ValidationError):
            example1_models(prompt_dim=2)


class TestConfoundedFleet:
    def test_shape_and_ids(self):
        gens = make_confounded_generators(n_models=6, image_dim=8, prompt_dim=4)
        assert [g.generator_id for g in gens] == [f"gen-{i:02d}" for i in range(6)]

    def test_pair_shares_geometry_with_swap(self):
        gens = make_confounded_generators(n_models=4, image_dim=8, prompt_dim=4)
        for a, b in ((gens[0], gens[1]), (gens[2], gens[3])):
            for p in (-0.6, 0.0, 0.45):
                np.testing.assert_allclose(b.mean_image(p),
                                           a.mean_image(0.5 - p), atol=1e-10)

    def test_pairs_are_far_apart(self):
        gens = make_confounded_generators(n_models=8, image_dim=16,
                                          prompt_dim=4, pair_radius=5.0)
        # center of pair j is the midpoint of the circle; sample it via means
        centers = [(g.mean_image(0.0) + g.mean_image(1.0)) / 2.0
                   for g in gens[::2]]
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                assert np.linalg.norm(centers[i] - centers[j]) >= 5.0

    @pytest.mark.parametrize("kwargs", [
        {"n_models": 3}, {"n_models": 0}, {"n_models": 20, "image_dim": 4},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValidationError):
            make_confounded_generators(**{"image_dim": 16, "prompt_dim": 4,
                                          **kwargs})


class TestBuildBenchmark:
    def test_counts(self):
        cfg = BenchmarkConfig(n_models=2, n_platform_prompts=10,
                              n_eval_prompts=3, n_seeds=1,
                              image_dim=4, prompt_dim=4)
        specs, tasks = build_benchmark(cfg)
        assert len(specs) == 2
        assert len(tasks) == 6 == cfg.n_tasks
        assert all(s.n == 10 for s in specs)

    def test_download_counts_distinct_descending(self):
        specs, _ = build_benchmark(SMALL)
        counts = [s.download_count for s in specs]
        assert counts == [40, 30, 20, 10]
        assert len(set(counts)) == len(counts)

    def test_metadata_records_pairing(self):
        specs, _ = build_benchmark(SMALL)
        assert [s.metadata["pair"] for s in specs] == [0, 0, 1, 1]
        assert [s.metadata["swapped"] for s in specs] == [False, True, False, True]

    def test_tasks_cover_every_model(self):
        specs, tasks = build_benchmark(SMALL)
        per_model = {s.model_id: 0 for s in specs}
        for t in tasks:
            per_model[t.true_model_id] += 1
        assert set(per_model.values()) == {SMALL.n_eval_prompts * SMALL.n_seeds}

    def test_bit_identical_across_builds(self):
        specs1, tasks1 = build_benchmark(SMALL)
        specs2, tasks2 = build_benchmark(SMALL)
        assert specs1 == specs2
        for a, b in zip(tasks1, tasks2):
            assert np.array_equal(a.query_image, b.query_image)
            assert np.array_equal(a.query_prompt, b.query_prompt)

    def test_master_seed_changes_fixture(self):
        specs1, _ = build_benchmark(SMALL)
        specs2, _ = build_benchmark(dataclasses.replace(SMALL, master_seed=1))
        assert not np.array_equal(specs1[0].images, specs2[0].images)

    @pytest.mark.parametrize("kwargs", [
        {"n_seeds": 0}, {"n_eval_prompts": 0}, {"noise_sigma": -0.1},
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValidationError):
            BenchmarkConfig(**kwargs)


@pytest.fixture(scope="module")
def fixture():
    return build_benchmark(SMALL)


class TestRunBenchmark:
    def test_download_baseline_exact(self, fixture):
        """Distinct download counts and a uniform true-model split give the
        requirement-blind baseline closed-form metrics: top-k = k/M and a
        tie-free mean rank of (M+1)/2, exactly in floating point."""
        specs, tasks = fixture
        rep = run_benchmark(specs, tasks, strategies=("download",))["download"]
        assert rep.top_k == (0.25, 0.5, 0.75, 1.0)
        assert rep.mean_rank == 2.5

    def test_topk_is_monotone_cdf(self, fixture):
        specs, tasks = fixture
        reports = run_benchmark(specs, tasks,
                                strategies=("download", "rkme-embed", "weighted"))
        for rep in reports.values():
            assert len(rep.top_k) == 4
            assert rep.top_k[-1] == 1.0
            for a, b in zip(rep.top_k, rep.top_k[1:]):
                assert b >= a
            assert 1.0 <= rep.mean_rank <= 4.0
            assert rep.n_tasks == len(tasks)

    def test_conditional_scores_beat_requirement_blind(self, fixture):
        specs, tasks = fixture
        reports = run_benchmark(specs, tasks,
                                strategies=("download", "weighted"))
        assert reports["weighted"].top_k_accuracy(1) > \
            reports["download"].top_k_accuracy(1)
        assert reports["weighted"].mean_rank < reports["download"].mean_rank

    def test_deterministic_reports(self, fixture):
        specs, tasks = fixture
        r1 = run_benchmark(specs, tasks, strategies=("weighted",))["weighted"]
        r2 = run_benchmark(specs, tasks, strategies=("weighted",))["weighted"]
        assert r1 == r2

    def test_strategy_objects_accepted(self, fixture):
        specs, tasks = fixture
        strat = ScoringStrategy("weighted", KernelParams(0.05))
        rep = run_benchmark(specs, tasks, strategies=(strat,))["weighted"]
        assert rep.gamma == 0.05

    def test_validations(self, fixture):
        specs, tasks = fixture
        with pytest.raises(ValidationError):
            run_benchmark([], tasks)
        with pytest.raises(ValidationError):
            run_benchmark(specs, [])
        with pytest.raises(ValidationError):
            run_benchmark(specs, tasks, strategies=("weighted", "weighted"))
        with pytest.raises(ValidationError):
            run_benchmark(specs[:2], tasks)  # tasks name absent models

    def test_report_accessors(self, fixture):
        specs, tasks = fixture
        rep = run_benchmark(specs, tasks, strategies=("download",))["download"]
        assert rep.top_k_accuracy(1) == rep.top_k[0]
        with pytest.raises(ValidationError):
            rep.top_k_accuracy(0)
        with pytest.raises(ValidationError):
            rep.top_k_accuracy(5)
        d = rep.as_dict()
        assert d["strategy"] == "download"
        assert d["top_k"] == list(rep.top_k)


class TestSweepAndReports:
    def test_default_grid_shape(self):
        assert len(DEFAULT_GAMMA_GRID) == 10
        assert list(DEFAULT_GAMMA_GRID) == sorted(DEFAULT_GAMMA_GRID)
        for g in (0.01, 0.02, 0.05):
            assert g in DEFAULT_GAMMA_GRID

    def test_sweep_matches_direct_run(self, fixture):
        specs, tasks = fixture
        sweep = gamma_sweep(specs, tasks, strategy="weighted", gammas=[0.02])
        direct = run_benchmark(specs, tasks, strategies=("weighted",),
                               gamma=0.02)["weighted"]
        assert sweep[0][0] == 0.02
        assert sweep[0][1] == direct

    def test_sweep_empty_gammas(self, fixture):
        specs, tasks = fixture
        with pytest.raises(ValidationError):
            gamma_sweep(specs, tasks, gammas=[])

    def test_report_table_lists_strategies(self, fixture):
        specs, tasks = fixture
        reports = run_benchmark(specs, tasks, strategies=("download", "weighted"))
        table = report_table(reports)
        assert "download" in table and "weighted" in table
        assert "top-1" in table and "mean-rank" in table

    def test_report_json_round_trips(self, fixture):
        specs, tasks = fixture
        reports = run_benchmark(specs, tasks, strategies=("weighted",))
        doc = json.loads(report_json(reports, extra={"note": "x"}))
        assert doc["note"] == "x"
        assert doc["reports"][0]["strategy"] == "weighted"
        assert doc["reports"][0]["n_tasks"] == len(tasks)

    def test_sweep_csv_shape(self, fixture):
        specs, tasks = fixture
        sweep = gamma_sweep(specs, tasks, strategy="weighted",
                            gammas=[0.01, 0.05])
        lines = sweep_csv(sweep).strip().split("\n")
        assert lines[0] == "gamma,top1,top2,top3,top4,mean_rank"
        assert len(lines) == 3
        assert lines[1].startswith("0.01,")
