"""Config validation and synthetic-scene determinism/self-consistency."""

import json

import numpy as np
import pytest

from cubegen.config import (
    ConfigError,
    config_from_dict,
    default_config,
    paper_geometry_config,
    parse_config,
)
from cubegen import scene as sc
from cubegen.faces import FACES


class TestRunConfig:
    def test_minimal_round_trip(self, tmp_path):
        cfg = default_config(seed=3)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_json_dict()))
        assert parse_config(path) == cfg

    def test_divisibility_rejection_names_field(self):
        with pytest.raises(ConfigError, match="num_frames.*divisible"):
            default_config(num_frames=7)

    def test_threshold_rejection(self):
        with pytest.raises(ConfigError, match="frag_threshold"):
            default_config(frag_threshold=1.5)

    def test_width_must_be_4r(self):
        with pytest.raises(ConfigError, match="equirect_width"):
            default_config(equirect_width=300)

    def test_default_bandwidth_is_face_token_count(self):
        cfg = default_config()
        assert cfg.bandwidth == (64 // 8) ** 2

    def test_default_pad_is_r_over_16(self):
        assert default_config().pad == 4
        assert paper_geometry_config().pad == 60

    def test_pad_bounds(self):
        with pytest.raises(ConfigError, match="pad"):
            default_config(pad=40)

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            config_from_dict({"resolutionn": 64})

    def test_denoiser_name_checked(self):
        with pytest.raises(ConfigError, match="mode.denoiser"):
            default_config(mode={"denoiser": "magic"})

    def test_paper_protocol_anchor_range(self):
        with pytest.raises(ConfigError, match="anchors"):
            default_config(scene={"protocol": "paper", "anchors": 2})
        with pytest.raises(ConfigError, match="anchors"):
            default_config(scene={"protocol": "paper", "anchors": 6})
        cfg = default_config(scene={"protocol": "paper", "anchors": 4,
                                    "hfov_deg": 100.0, "vfov_deg": 80.0})
        assert cfg.scene.anchors == 4

    def test_paper_protocol_fov_range(self):
        with pytest.raises(ConfigError, match="hfov"):
            default_config(scene={"protocol": "paper", "anchors": 3,
                                  "hfov_deg": 150.0})
        # free protocol allows it
        cfg = default_config(scene={"protocol": "free", "anchors": 3,
                                    "hfov_deg": 150.0})
        assert cfg.scene.hfov_deg == 150.0

    def test_paper_geometry_preset(self):
        cfg = paper_geometry_config()
        assert cfg.resolution == 960 and cfg.equirect_width == 3840

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError, match="valid JSON"):
            parse_config(path)


class TestSyntheticScene:
    def test_seed_determinism(self):
        cfg = default_config(resolution=16, equirect_width=64, seed=5)
        t1, f1, p1 = sc.synth_scene(cfg)
        t2, f2, p2 = sc.synth_scene(cfg)
        for f in FACES:
            assert np.array_equal(t1.faces[f], t2.faces[f])
        for a, b in zip(f1, f2):
            assert np.array_equal(a.pixels, b.pixels)
        for a, b in zip(p1, p2):
            assert np.array_equal(a.rotation, b.rotation)

    def test_different_seeds_differ(self):
        cfg1 = default_config(resolution=16, equirect_width=64, seed=1)
        cfg2 = default_config(resolution=16, equirect_width=64, seed=2)
        t1, _, _ = sc.synth_scene(cfg1)
        t2, _, _ = sc.synth_scene(cfg2)
        assert not np.array_equal(t1.faces["F"], t2.faces["F"])

    def test_field_values_in_unit_interval(self, rng):
        scene = sc.SyntheticScene.random(channels=3, seed=9)
        d = rng.normal(size=(2000, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        for t in (0, 5, 50):
            v = scene.value(d, t)
            assert v.min() >= 0.0 and v.max() <= 1.0

    def test_reprojection_self_consistency(self):
        # rendered perspective frames re-projected onto the cubemap agree
        # with the ground truth wherever observed (bilinear error budget)
        cfg = default_config(resolution=32, equirect_width=128, seed=11)
        truth, frames, poses = sc.synth_scene(cfg)
        cond = sc.conditional_video(cfg.resolution, frames, poses)
        worst = 0.0
        for f in FACES:
            m = cond.masks[f].astype(bool)
            if m.any():
                err = np.abs(cond.faces[f] - truth.faces[f])[m].max()
                worst = max(worst, err)
        assert worst <= 0.02

    def test_masks_nontrivial(self):
        cfg = default_config(resolution=32, equirect_width=128, seed=11)
        truth, frames, poses = sc.synth_scene(cfg)
        cond = sc.conditional_video(cfg.resolution, frames, poses)
        total = sum(cond.masks[f].mean() for f in FACES)
        assert 0.0 < total < 6.0
