import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mdsearch.harness import (
    ConfigError,
    ExperimentConfig,
    LearningCurve,
    compare_suite,
    emit_csv,
    emit_svg_plot,
    execute,
    format_float,
    parse_config,
    read_csv,
    run_experiment,
)

SVG = "{http://www.w3.org/2000/svg}"


class TestFormatFloat:
    @pytest.mark.parametrize("x, text", [(5.0, "5e0"), (0.0, "0e0"), (0.00125, "1.25e-3"), (-2.5e10, "-2.5e10")])
    def test_examples(self, x, text):
        assert format_float(x) == text

    def test_round_trips(self):
        for x in np.random.default_rng(0).normal(0, 1e6, 50):
            assert float(format_float(x)) == x


class TestLearningCurve:
    def test_stats(self):
        c = LearningCurve(np.array([[1.0, 2.0], [3.0, 6.0]]), (4, 7))
        np.testing.assert_array_equal(c.mean, [2.0, 4.0])
        np.testing.assert_array_equal(c.std, [1.0, 2.0])
        assert c.final == (4.0, 2.0) and c.n_updates == 2

    def test_seed_label_mismatch(self):
        with pytest.raises(ValueError):
            LearningCurve(np.zeros((2, 3)), (0,))


class TestCsv:
    def test_schema_instance(self, tmp_path):
        path = emit_csv(LearningCurve(np.array([[5.0]])), tmp_path / "c.csv")
        assert path.read_text() == "update,mean_cost,std_cost,seed_0\n0,5e0,0e0,5e0\n"

    def test_empty_raises(self, tmp_path):
        with pytest.raises(ValueError):
            emit_csv(LearningCurve(np.zeros((1, 0))), tmp_path / "c.csv")

    def test_columns_recompute(self, tmp_path):
        per_seed = np.random.default_rng(1).uniform(1, 100, (3, 6))
        path = emit_csv(LearningCurve(per_seed), tmp_path / "c.csv")
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        seeds = data[:, 3:]
        np.testing.assert_array_equal(data[:, 0], np.arange(6))
        np.testing.assert_allclose(data[:, 1], seeds.mean(axis=1), rtol=1e-15)
        np.testing.assert_allclose(data[:, 2], seeds.std(axis=1, ddof=0), rtol=1e-12)
        np.testing.assert_array_equal(read_csv(path).per_seed, per_seed)


class TestSvg:
    def _parse(self, path):
        return ET.parse(path).getroot()

    def test_single_flat_curve(self, tmp_path):
        root = self._parse(emit_svg_plot({"flat": LearningCurve(np.full((2, 5), 3.0))}, tmp_path / "a.svg"))
        (line,) = root.iter(f"{SVG}polyline")
        ys = {pt.split(",")[1] for pt in line.get("points").split()}
        assert len(ys) == 1

    def test_two_curves_two_legends(self, tmp_path):
        curves = {"G-MDS": LearningCurve(np.array([[10.0, 5.0, 1.0]])),
                  "A & B": LearningCurve(np.array([[100.0, 50.0, 2.0], [90.0, 40.0, 1.0]]))}
        root = self._parse(emit_svg_plot(curves, tmp_path / "b.svg", title="t<1>"))
        assert len(list(root.iter(f"{SVG}polyline"))) == 2
        assert len(list(root.iter(f"{SVG}polygon"))) == 2
        labels = [t.text for t in root.iter(f"{SVG}text")]
        assert "G-MDS" in labels and "A & B" in labels

    def test_mismatched_lengths(self, tmp_path):
        with pytest.raises(ValueError):
            emit_svg_plot({"a": LearningCurve(np.ones((1, 2))), "b": LearningCurve(np.ones((1, 3)))},
                          tmp_path / "c.svg")

    def test_nonempty_required(self, tmp_path):
        with pytest.raises(ValueError):
            emit_svg_plot({}, tmp_path / "d.svg")


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(task="arm", algorithm="PI2", updates=7, seeds=(1, 2), eta=2.5).resolved()
        assert parse_config(cfg.to_ini()).resolved() == cfg

    def test_defaults(self):
        cfg = ExperimentConfig().resolved()
        assert (cfg.updates, cfg.rollouts, cfg.n_basis, cfg.seeds) == (100, 10, 20, tuple(range(10)))
        assert cfg.temperature == cfg.eta
        arm = ExperimentConfig(task="arm").resolved()
        assert (arm.updates, arm.rollouts, arm.n_basis) == (1000, 10, 100)

    def test_errors_list_every_key(self):
        text = "[experiment]\nupdates = 0\nrollouts = 1\nbogus = 3\n[algorithm]\neta = -1\n"
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.keys == ["algorithm.eta", "experiment.bogus", "experiment.rollouts",
                                   "experiment.updates"]

    def test_unparseable_value(self):
        with pytest.raises(ConfigError) as info:
            parse_config("[experiment]\nupdates = many\n")
        assert info.value.keys == ["experiment.updates"]

    def test_task_algorithm_mismatch(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig(task="finite", algorithm="PI2").resolved()
        assert info.value.keys == ["experiment.algorithm"]

    def test_unknown_names(self):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig(task="maze", algorithm="CMA").resolved()
        assert info.value.keys == ["experiment.algorithm", "task.name"]


class TestRun:
    def test_minimal_run(self, tmp_path):
        cfg = ExperimentConfig(task="point", algorithm="GMDS", updates=1, rollouts=2, seeds=(0,))
        result = run_experiment(cfg, tmp_path)
        assert result.curve.per_seed.shape == (1, 1)
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["gmds_curve.csv", "gmds_curve.svg", "gmds_final_params.csv", "gmds_run_metadata.txt"]
        assert "algorithm = GMDS" in (tmp_path / "gmds_run_metadata.txt").read_text()

    @pytest.mark.parametrize("algo", ["GMDS", "GAMDS", "PI2"])
    def test_byte_identical_reruns(self, tmp_path, algo):
        cfg = ExperimentConfig(task="point", algorithm=algo, updates=3, rollouts=4, seeds=(0, 1))
        run_experiment(cfg, tmp_path / "a")
        from dataclasses import replace

        run_experiment(replace(cfg, workers=2), tmp_path / "b")
        for name in ("curve.csv", "final_params.csv"):
            f = f"{algo.lower()}_{name}"
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_finite_tasks(self):
        mds = execute(ExperimentConfig(task="finite", algorithm="MDS", updates=5, costs=(0.0, 1.0)))
        assert mds.curve.per_seed[0, 0] == 0.5
        assert np.all(np.diff(mds.curve.mean) < 0)
        amds = execute(ExperimentConfig(task="finite", algorithm="AMDS", updates=5, costs=(0.0, 1.0)))
        assert amds.final_params.shape == (1, 2)

    def test_sphere_task(self):
        res = execute(ExperimentConfig(task="sphere", algorithm="GAMDS", updates=30, rollouts=20))
        assert res.curve.mean[-1] < res.curve.mean[0]

    def test_compare_suite_table(self, tmp_path):
        runs, table = compare_suite("point", tmp_path, seeds=(0,), updates=2)
        assert list(runs) == ["G-AMDS", "G-MDS", "PI2"]
        lines = table.strip().splitlines()
        assert len(lines) == 4 and lines[1].startswith("G-AMDS")
        assert (tmp_path / "final_costs.txt").read_text() == table
        ET.parse(tmp_path / "comparison.svg")
        assert compare_suite("point", seeds=(0,), updates=2)[1] == table
