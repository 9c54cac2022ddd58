import os
from dataclasses import replace

import numpy as np
import pytest

from glowrl.configio import ConfigError, config_from_text, config_to_text, read_config, write_config
from glowrl.presets import PRESETS, get_preset, preset_catalog
from glowrl.runner import (
    CurveTable,
    ExperimentConfig,
    emit_csv,
    glow_tail_average,
    record_points,
    run_and_emit,
    run_ensemble,
)


def tiny_invasion(**kw):
    base = dict(name="tiny", kind="invasion", seed=11, agents=3, budget=60,
                record_every=20, alpha=1e-3, controls=2, metrics=("reward", "preward"))
    base.update(kw)
    return ExperimentConfig(**base)


class TestRecordPoints:
    def test_includes_first_and_last(self):
        xs = record_points(100, 30)
        assert xs[0] == 1 and xs[-1] == 100
        assert set([30, 60, 90]).issubset(set(xs.tolist()))

    def test_auto_spacing(self):
        xs = record_points(4000, 0)
        assert len(xs) <= 403 and xs[-1] == 4000


class TestRunEnsemble:
    def test_deterministic_rerun(self):
        c1 = run_ensemble(tiny_invasion())
        c2 = run_ensemble(tiny_invasion())
        for m in ("reward", "preward"):
            assert np.array_equal(c1.metrics[m][0], c2.metrics[m][0])
            assert np.array_equal(c1.metrics[m][1], c2.metrics[m][1])

    def test_worker_count_does_not_change_results(self):
        c1 = run_ensemble(tiny_invasion(workers=1))
        c2 = run_ensemble(tiny_invasion(workers=2))
        for m in ("reward", "preward"):
            assert np.array_equal(c1.metrics[m][0], c2.metrics[m][0])

    def test_cycle_ledger(self):
        curve = run_ensemble(tiny_invasion())
        assert curve.external_cycles == 3 * 60
        assert curve.internal_cycles == 0

    def test_fd_mode_counts_internal_cycles(self):
        cfg = tiny_invasion(agents=1, budget=10, gradient_mode="fd_expectation")
        curve = run_ensemble(cfg)
        assert curve.internal_cycles == 10 * (cfg.controls + 1)

    def test_grid_run_shapes(self):
        cfg = ExperimentConfig(name="g", kind="grid", seed=3, agents=2, budget=12,
                               metrics=("length",), alpha=0.1, eta=0.5, controls=8,
                               layer_scale=0.5, max_episode_steps=3000)
        curve = run_ensemble(cfg)
        assert curve.x_name == "episode"
        assert curve.xs.shape == (12,)
        assert curve.per_agent["length"].shape == (2, 12)
        assert (curve.per_agent["length"] >= 4).all()

    def test_invalid_configs_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(kind="maze")
        with pytest.raises(ValueError):
            ExperimentConfig(budget=0)
        with pytest.raises(ValueError):
            ExperimentConfig(kind="grid", metrics=("reward",))


class TestEmitCsv:
    def test_declared_schema_and_byte_identical_rerun(self, tmp_path):
        cfg = tiny_invasion(metrics=("reward", "preward"), out_dir=str(tmp_path / "a"))
        paths1 = run_and_emit(cfg)
        with open(paths1[0], "rb") as fh:
            first = fh.read()
        header = first.decode().splitlines()[0]
        assert header == "cycle,reward_mean,reward_sem,preward_mean,preward_sem"
        cfg2 = replace(cfg, out_dir=str(tmp_path / "b"))
        paths2 = run_and_emit(cfg2)
        with open(paths2[0], "rb") as fh:
            assert fh.read() == first

    def test_fig8_style_columns(self, tmp_path):
        curve = CurveTable(
            name="x", x_name="cycle", xs=np.array([1, 2]),
            metrics={
                "reward": (np.array([0.1, 0.2]), np.array([0.0, 0.0])),
                "fidelity": (np.array([0.5, 0.6]), np.array([0.01, 0.01])),
                "distance": (np.array([7.0, 6.0]), np.array([0.1, 0.1])),
            },
        )
        path = tmp_path / "c.csv"
        emit_csv(curve, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "cycle,reward_mean,reward_sem,fidelity_mean,fidelity_sem,distance_mean,distance_sem"
        assert len(lines) == 3

    def test_empty_records_give_header_only(self, tmp_path):
        curve = CurveTable(name="x", x_name="cycle", xs=np.array([], dtype=np.int64),
                           metrics={"reward": (np.array([]), np.array([]))})
        path = tmp_path / "empty.csv"
        emit_csv(curve, path)
        assert path.read_text() == "cycle,reward_mean,reward_sem\n"

    def test_shortest_roundtrip_floats(self, tmp_path):
        curve = CurveTable(name="x", x_name="cycle", xs=np.array([1]),
                           metrics={"reward": (np.array([0.1]), np.array([1 / 3]))})
        path = tmp_path / "f.csv"
        emit_csv(curve, path)
        row = path.read_text().splitlines()[1].split(",")
        assert float(row[1]) == 0.1 and row[1] == "0.1"
        assert float(row[2]) == 1 / 3

    def test_manifest_roundtrips_and_carries_ledger(self, tmp_path):
        cfg = tiny_invasion(out_dir=str(tmp_path))
        csv_path, manifest_path = run_and_emit(cfg)
        text = open(manifest_path).read()
        assert "[ledger]" in text and "external_cycles = 180" in text
        assert read_config(manifest_path) == cfg


class TestGlowTailAverage:
    def test_constant_lengths(self):
        assert glow_tail_average(np.full(800, 4.0)) == 4.0

    def test_arithmetic(self):
        assert glow_tail_average(np.arange(1, 1001.0)) == 750.5

    def test_too_few_episodes(self):
        with pytest.raises(ValueError):
            glow_tail_average(np.ones(400))


class TestPresetCatalog:
    def test_catalog_size(self):
        assert len(preset_catalog()) >= 12

    def test_caption_values_frozen(self):
        # hyperparameters pinned to the published captions
        fig5a = PRESETS["fig5a"]
        assert fig5a.base.alpha == 1e-3
        assert fig5a.base.reward_correct == 1.0 and fig5a.base.reward_wrong == -1.0
        assert fig5a.base.p_coh == 1.0 and fig5a.base.eta == 1.0
        assert [o["controls"] for _, o in fig5a.curves] == [1, 2, 3, 4, 8, 16]

        fig5b = PRESETS["fig5b"]
        assert fig5b.base.controls == 16 and fig5b.base.reversal_cycle == 4000
        assert [o["p_coh"] for _, o in fig5b.curves] == [0.0, 0.25, 0.5, 0.75, 1.0]

        fig5c = PRESETS["fig5c"]
        assert fig5c.base.controls == 32 and fig5c.base.hamiltonian_case == "II"

        for name in ("fig7a", "fig7b"):
            preset = PRESETS[name]
            assert preset.base.alpha == 1e-2
            assert preset.base.reward_wrong == -10.0
            assert [o["controls"] for _, o in preset.curves] == [1, 2, 3, 4, 8, 16, 32]
        assert PRESETS["fig7a"].base.reversal_cycle == 5000
        assert PRESETS["fig7b"].base.color_introduction_cycle == 5000

        fig8 = PRESETS["fig8"]
        assert fig8.base.controls == 16
        assert set(fig8.base.metrics) >= {"reward", "fidelity", "distance"}
        assert dict(fig8.curves)["fig8_multi_onb"]["basis_mode"] == "random_onb_per_cycle"

        fig9 = PRESETS["fig9"]
        assert fig9.base.controls == 64 and fig9.base.agents == 1
        assert fig9.base.hamiltonian_case == "I_schmidt"
        assert fig9.base.variant == "neverending_color"
        assert "hnorm" in fig9.base.metrics

        assert PRESETS["fig11a"].base.eta == 1.0
        assert PRESETS["fig11b"].base.eta == 0.01
        assert PRESETS["fig11c"].base.boundary_penalty == -10.0
        assert PRESETS["fig11d"].base.eta == 0.7
        assert PRESETS["fig11e"].base.eta == 0.5
        assert PRESETS["fig11f"].base.goal_reward == 0.0
        for name in ("fig11a", "fig11b", "fig11c", "fig11d", "fig11e", "fig11f"):
            assert PRESETS[name].base.alpha == 0.1
            assert PRESETS[name].base.budget == 10_000

        fig12 = PRESETS["fig12"]
        etas = sorted({o["eta"] for _, o in fig12.curves})
        assert etas == [0.3, 0.5, 0.7, 0.9, 1.0]
        assert fig12.tail_sweep

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            get_preset("fig99")


class TestConfigIo:
    def test_roundtrip(self):
        cfg = tiny_invasion(reversal_cycle=30, basis_mode="single_onb")
        assert config_from_text(config_to_text(cfg)) == cfg

    def test_grid_roundtrip(self):
        cfg = ExperimentConfig(name="g", kind="grid", metrics=("length",),
                               boundary_penalty=-10.0, controls=64,
                               layer_scale=0.3, random_start=True)
        assert config_from_text(config_to_text(cfg)) == cfg

    def test_unknown_key_fails_fast(self):
        text = config_to_text(tiny_invasion()) + "\n[run]\nbogus = 1\n"
        with pytest.raises(ConfigError):
            config_from_text(text)

    def test_unknown_section_fails_fast(self):
        with pytest.raises(ConfigError):
            config_from_text("[mystery]\nx = 1\n")

    def test_file_roundtrip(self, tmp_path):
        cfg = tiny_invasion()
        path = tmp_path / "run.cfg"
        write_config(cfg, path)
        assert read_config(path) == cfg


class TestTailSweep:
    def test_tail_sweep_emits_per_scheme_files(self, tmp_path):
        from glowrl.presets import Preset
        from glowrl.runner import run_tail_sweep

        base = ExperimentConfig(name="sweeptest", kind="grid", seed=5, agents=1,
                                budget=520, metrics=("length",), alpha=0.1,
                                controls=8, layer_scale=0.5,
                                max_episode_steps=5000, out_dir=str(tmp_path))
        preset = Preset(
            name="sweeptest", base=base,
            curves=(("sweeptest_goal_eta1", {"eta": 1.0, "boundary_penalty": None}),
                    ("sweeptest_penalty_eta1", {"eta": 1.0, "boundary_penalty": -10.0})),
            tail_sweep=True,
        )
        files = run_tail_sweep(preset, base)
        csvs = [f for f in files if f.endswith(".csv")]
        assert len(csvs) == 2
        for path in csvs:
            lines = open(path).read().splitlines()
            assert lines[0] == "eta,tail_mean,tail_sem"
            assert len(lines) == 2
            eta, mean, sem = lines[1].split(",")
            assert float(eta) == 1.0 and float(mean) > 4.0
        manifests = [f for f in files if f.endswith(".manifest.cfg")]
        assert len(manifests) == 2
