"""Deterministic synthetic scenes: a band-limited spherical field that spins
slowly over time, analytically evaluable at any direction and frame.  Serves
as the ground-truth oracle for end-to-end tests and CLI demos."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .faces import FACES
from .config import RunConfig
from .geometry import (
    CameraPose,
    CubemapVideo,
    PerspectiveFrame,
    equirect_pixel_to_direction,
    face_pixel_directions,
    project_perspective_to_cubemap,
    sample_trajectory,
)

__all__ = ["SyntheticScene", "synth_scene", "render_equirect_video"]

# Quadratic direction-polynomial basis, each term scaled to max 1 on the sphere.
_BASIS = (
    lambda x, y, z: x,
    lambda x, y, z: y,
    lambda x, y, z: z,
    lambda x, y, z: 2.0 * x * y,
    lambda x, y, z: 2.0 * y * z,
    lambda x, y, z: 2.0 * x * z,
    lambda x, y, z: x * x - y * y,
    lambda x, y, z: (3.0 * z * z - 1.0) / 2.0,
)


@dataclass(frozen=True)
class SyntheticScene:
    """value(d, t) = 0.5 + sum_i coeffs[c, i] * basis_i(spin(-t) d), in [0,1]."""

    coeffs: np.ndarray      # (channels, 8), sum of |coeffs| per channel <= 0.45
    spin_axis: np.ndarray   # unit 3-vector
    spin_per_frame: float   # radians

    @classmethod
    def random(cls, channels: int, seed: int, spin_per_frame: float = 0.05):
        rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
        raw = rng.uniform(-1.0, 1.0, size=(channels, len(_BASIS)))
        raw *= 0.45 / np.abs(raw).sum(axis=1, keepdims=True)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        return cls(coeffs=raw, spin_axis=axis, spin_per_frame=spin_per_frame)

    def value(self, directions: np.ndarray, frame: int) -> np.ndarray:
        """Evaluate the field at unit directions for one frame; (..., C)."""
        rot = Rotation.from_rotvec(-frame * self.spin_per_frame * self.spin_axis)
        d = directions @ rot.as_matrix().T
        x, y, z = d[..., 0], d[..., 1], d[..., 2]
        basis = np.stack([b(x, y, z) for b in _BASIS], axis=-1)
        return 0.5 + basis @ self.coeffs.T

    def cubemap_video(self, resolution: int, num_frames: int) -> CubemapVideo:
        faces, masks = {}, {}
        for f in FACES:
            dirs = face_pixel_directions(f, resolution)
            faces[f] = np.stack([self.value(dirs, t) for t in range(num_frames)])
            masks[f] = np.ones(faces[f].shape[:3], dtype=np.uint8)
        return CubemapVideo(faces=faces, masks=masks)

    def perspective_frame(self, pose: CameraPose, height: int, width: int,
                          frame: int) -> PerspectiveFrame:
        tan_h = np.tan(np.radians(pose.hfov_deg) / 2.0)
        tan_v = np.tan(np.radians(pose.vfov_deg) / 2.0)
        jj, ii = np.meshgrid(np.arange(width), np.arange(height), indexing="xy")
        cam = np.stack([
            (2.0 * (jj + 0.5) / width - 1.0) * tan_h,
            -(2.0 * (ii + 0.5) / height - 1.0) * tan_v,
            np.ones_like(jj, dtype=np.float64),
        ], axis=-1)
        cam /= np.linalg.norm(cam, axis=-1, keepdims=True)
        world = cam @ pose.rotation.T
        return PerspectiveFrame(pixels=self.value(world, frame))


def _trajectory_anchors(cfg: RunConfig, rng: np.random.Generator) -> list[CameraPose]:
    """Anchor poses with bounded per-segment rotation so slerp stays defined."""
    anchors = []
    rot = np.eye(3)
    for k in range(cfg.scene.anchors):
        if k:
            vec = rng.normal(size=3)
            vec *= rng.uniform(0.15, 0.6) / np.linalg.norm(vec)
            rot = rot @ Rotation.from_rotvec(vec).as_matrix()
        anchors.append(CameraPose(rot, cfg.scene.hfov_deg, cfg.scene.vfov_deg))
    return anchors


def synth_scene(cfg: RunConfig, seed: int | None = None):
    """Deterministic scene for a config: ground-truth cubemap video, the
    perspective input rendered along a smooth trajectory, and the poses."""
    seed = cfg.seed if seed is None else seed
    scene = SyntheticScene.random(cfg.channels, seed)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))
    poses = sample_trajectory(_trajectory_anchors(cfg, rng), cfg.num_frames)

    truth = scene.cubemap_video(cfg.resolution, cfg.num_frames)
    height = max(8, cfg.resolution // 2)
    width = max(8, cfg.resolution)
    frames = [scene.perspective_frame(pose, height, width, t)
              for t, pose in enumerate(poses)]
    return truth, frames, poses


def conditional_video(truth_resolution: int, frames, poses) -> CubemapVideo:
    """Project perspective frames into the masked conditional cubemap video."""
    faces = {f: [] for f in FACES}
    masks = {f: [] for f in FACES}
    for frame, pose in zip(frames, poses):
        cube = project_perspective_to_cubemap(frame, pose, truth_resolution)
        for f in FACES:
            faces[f].append(cube.faces[f])
            masks[f].append(cube.masks[f])
    return CubemapVideo(faces={f: np.stack(faces[f]) for f in FACES},
                        masks={f: np.stack(masks[f]) for f in FACES})


def render_equirect_video(scene: SyntheticScene, width: int,
                          num_frames: int) -> np.ndarray:
    """(N, W/2, W, C) analytic ground-truth equirect frames."""
    u, v = np.meshgrid(np.arange(width), np.arange(width // 2), indexing="xy")
    dirs = equirect_pixel_to_direction(u, v, width)
    return np.stack([scene.value(dirs, t) for t in range(num_frames)])
