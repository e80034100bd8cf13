"""Projections among perspective frames, equirectangular grids, and cubemaps.

All mappings use pixel-center sampling (offset 0.5).  Images are sampled
bilinearly; binary masks nearest-neighbor.  The equirectangular longitude
seam wraps, latitude clamps at the poles.  Frustum boundary pixels count as
observed.  See :mod:`cubegen.faces` for the frozen axis convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .faces import FACES, FACE_AXES

__all__ = [
    "CameraPose",
    "PerspectiveFrame",
    "EquirectGrid",
    "CubemapFrame",
    "CubemapVideo",
    "equirect_pixel_to_direction",
    "direction_to_equirect_pixel",
    "direction_to_face_coords",
    "face_coords_to_direction",
    "face_pixel_directions",
    "project_perspective_to_cubemap",
    "cubemap_to_equirect",
    "equirect_to_cubemap",
    "sample_trajectory",
    "equirect_pixel_solid_angles",
    "face_pixel_solid_angles",
    "frustum_solid_angle",
]

_UNIT_TOL = 1e-9
_ORTHO_TOL = 1e-7


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CameraPose:
    """Camera-to-world rotation plus a symmetric pinhole frustum.

    ``rotation`` maps camera coordinates (camera looks down +z, +y up,
    +x right) into world coordinates.  FoVs are full angles in degrees,
    strictly inside (0, 180).
    """

    rotation: np.ndarray
    hfov_deg: float
    vfov_deg: float

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64)
        if rot.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rot.shape}")
        if not np.allclose(rot.T @ rot, np.eye(3), atol=_ORTHO_TOL):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation determinant must be +1")
        for name, fov in (("hfov_deg", self.hfov_deg), ("vfov_deg", self.vfov_deg)):
            if not 0.0 < fov < 180.0:
                raise ValueError(f"{name} must lie in (0, 180), got {fov}")
        object.__setattr__(self, "rotation", rot)

    def to_json_dict(self) -> dict:
        return {
            "rotation": [float(v) for v in self.rotation.flat],
            "hfov_deg": float(self.hfov_deg),
            "vfov_deg": float(self.vfov_deg),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CameraPose":
        rot = np.asarray(obj["rotation"], dtype=np.float64).reshape(3, 3)
        return cls(rot, float(obj["hfov_deg"]), float(obj["vfov_deg"]))


@dataclass(frozen=True)
class PerspectiveFrame:
    """A single perspective image, pixels in [0, 1], shape (H, W, C)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"pixels must be (H, W, C) with H, W >= 1, got {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class EquirectGrid:
    """Equirectangular image, shape (W/2, W, C); height = width / 2 exactly."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3:
            raise ValueError(f"pixels must be (H, W, C), got {px.shape}")
        h, w = px.shape[:2]
        if w != 2 * h:
            raise ValueError(f"equirect height must equal width/2, got {h}x{w}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class CubemapFrame:
    """Six (R, R, C) face grids plus (R, R) binary observation masks."""

    faces: dict
    masks: dict

    def __post_init__(self):
        if set(self.faces) != set(FACES) or set(self.masks) != set(FACES):
            raise ValueError("all six faces F,R,B,L,U,D must be present")
        res = None
        for f in FACES:
            px = np.asarray(self.faces[f], dtype=np.float64)
            mk = np.asarray(self.masks[f])
            if px.ndim != 3 or px.shape[0] != px.shape[1]:
                raise ValueError(f"face {f} must be (R, R, C), got {px.shape}")
            if res is None:
                res = px.shape[0]
            if px.shape[0] != res or mk.shape != (res, res):
                raise ValueError("all faces/masks must share one resolution")
            if not np.isin(mk, (0, 1)).all():
                raise ValueError(f"mask of face {f} must be binary")
            self.faces[f] = px
            self.masks[f] = mk.astype(np.uint8)
        object.__setattr__(self, "resolution", res)

    resolution: int = field(init=False)

    @property
    def channels(self) -> int:
        return self.faces["F"].shape[2]


@dataclass(frozen=True)
class CubemapVideo:
    """Per-face (N, R, R, C) pixel videos plus (N, R, R) binary masks."""

    faces: dict
    masks: dict

    def __post_init__(self):
        if set(self.faces) != set(FACES) or set(self.masks) != set(FACES):
            raise ValueError("all six faces F,R,B,L,U,D must be present")
        shape = None
        for f in FACES:
            px = np.asarray(self.faces[f], dtype=np.float64)
            mk = np.asarray(self.masks[f])
            if px.ndim != 4 or px.shape[1] != px.shape[2]:
                raise ValueError(f"face {f} video must be (N, R, R, C), got {px.shape}")
            if shape is None:
                shape = px.shape[:3]
            if px.shape[:3] != shape or mk.shape != shape:
                raise ValueError("all face videos/masks must share (N, R, R)")
            if not np.isin(mk, (0, 1)).all():
                raise ValueError(f"mask video of face {f} must be binary")
            self.faces[f] = px
            self.masks[f] = mk.astype(np.uint8)

    @property
    def num_frames(self) -> int:
        return self.faces["F"].shape[0]

    @property
    def resolution(self) -> int:
        return self.faces["F"].shape[1]

    @property
    def channels(self) -> int:
        return self.faces["F"].shape[3]

    def frame(self, t: int) -> CubemapFrame:
        return CubemapFrame(
            faces={f: self.faces[f][t] for f in FACES},
            masks={f: self.masks[f][t] for f in FACES},
        )


# ---------------------------------------------------------------------------
# pixel <-> direction mappings
# ---------------------------------------------------------------------------

def equirect_pixel_to_direction(u, v, width: int) -> np.ndarray:
    """Unit direction of equirect pixel center (u=col, v=row); shape (..., 3).

    Longitude theta = (u+0.5)/W * 2*pi - pi, latitude = pi/2 - (v+0.5)/(W/2) * pi;
    theta = 0, lat = 0 looks down +z.
    """
    if width < 2 or width % 2:
        raise ValueError(f"width must be even and >= 2, got {width}")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    height = width // 2
    if np.any(u < 0) or np.any(u >= width) or np.any(v < 0) or np.any(v >= height):
        raise ValueError("pixel index out of range")
    theta = (u + 0.5) / width * (2.0 * np.pi) - np.pi
    lat = np.pi / 2.0 - (v + 0.5) / height * np.pi
    cl = np.cos(lat)
    return np.stack([cl * np.sin(theta), np.sin(lat), cl * np.cos(theta)], axis=-1)


def direction_to_equirect_pixel(d, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Fractional (u, v) equirect pixel coordinates of unit direction(s)."""
    d = _check_unit(d)
    theta = np.arctan2(d[..., 0], d[..., 2])
    lat = np.arcsin(np.clip(d[..., 1], -1.0, 1.0))
    u = (theta + np.pi) / (2.0 * np.pi) * width - 0.5
    v = (np.pi / 2.0 - lat) / np.pi * (width / 2.0) - 0.5
    return u, v


def _check_unit(d) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.shape[-1] != 3:
        raise ValueError("direction must have a trailing axis of size 3")
    norm2 = np.sum(d * d, axis=-1)
    if np.any(np.abs(norm2 - 1.0) > 2.0 * _UNIT_TOL):
        raise ValueError("direction is not unit-norm")
    return d


# Outward-normal dot products in canonical order; argmax tie-breaks F,R,B,L,U,D.
_NORMALS = np.asarray([FACE_AXES[f][0] for f in FACES])  # (6, 3)
_RIGHTS = np.asarray([FACE_AXES[f][1] for f in FACES])
_DOWNS = np.asarray([FACE_AXES[f][2] for f in FACES])


def direction_to_face_coords(d) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map unit direction(s) to (face index, x, y) with x, y in [0, 1].

    The face is the one whose outward normal has the largest (positive) dot
    product; ties resolve to the earliest face in canonical order.  Exactly
    on an edge the winning coordinate is 0.0 or 1.0.
    """
    d = _check_unit(d)
    dots = d @ _NORMALS.T  # (..., 6)
    face = np.argmax(dots, axis=-1)
    n_dot = np.take_along_axis(dots, face[..., None], axis=-1)[..., 0]
    a = np.sum(d * _RIGHTS[face], axis=-1) / n_dot
    b = np.sum(d * _DOWNS[face], axis=-1) / n_dot
    return face, (a + 1.0) / 2.0, (b + 1.0) / 2.0


def face_coords_to_direction(face, x, y) -> np.ndarray:
    """Inverse of :func:`direction_to_face_coords`; accepts face index or name."""
    if isinstance(face, str):
        face = FACES.index(face)
    face = np.asarray(face)
    a = 2.0 * np.asarray(x, dtype=np.float64) - 1.0
    b = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    v = _NORMALS[face] + a[..., None] * _RIGHTS[face] + b[..., None] * _DOWNS[face]
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def face_pixel_directions(face: str, resolution: int) -> np.ndarray:
    """(R, R, 3) unit directions of pixel centers of one cube face."""
    c = (np.arange(resolution) + 0.5) / resolution
    y, x = np.meshgrid(c, c, indexing="ij")
    return face_coords_to_direction(FACES.index(face), x, y)


# ---------------------------------------------------------------------------
# resampling helpers
# ---------------------------------------------------------------------------

def _bilinear(grid: np.ndarray, rows: np.ndarray, cols: np.ndarray,
              wrap_cols: bool = False) -> np.ndarray:
    """Bilinear sample of (H, W, C) at fractional (rows, cols); rows clamp."""
    h, w = grid.shape[:2]
    rows = np.clip(rows, 0.0, h - 1.0)
    r0 = np.floor(rows).astype(np.intp)
    r0 = np.minimum(r0, h - 2) if h > 1 else np.zeros_like(r0)
    r1 = np.minimum(r0 + 1, h - 1)
    fr = rows - r0

    if wrap_cols:
        cols = np.mod(cols, w)
        c0 = np.floor(cols).astype(np.intp)
        c1 = np.mod(c0 + 1, w)
        fc = cols - c0
        c0 = np.mod(c0, w)
    else:
        cols = np.clip(cols, 0.0, w - 1.0)
        c0 = np.floor(cols).astype(np.intp)
        c0 = np.minimum(c0, w - 2) if w > 1 else np.zeros_like(c0)
        c1 = np.minimum(c0 + 1, w - 1)
        fc = cols - c0

    fr = fr[..., None]
    fc = fc[..., None]
    top = grid[r0, c0] * (1.0 - fc) + grid[r0, c1] * fc
    bot = grid[r1, c0] * (1.0 - fc) + grid[r1, c1] * fc
    return top * (1.0 - fr) + bot * fr


def _nearest(grid: np.ndarray, rows: np.ndarray, cols: np.ndarray,
             wrap_cols: bool = False) -> np.ndarray:
    """Nearest-neighbor sample of (H, W) at fractional (rows, cols)."""
    h, w = grid.shape[:2]
    r = np.clip(np.rint(rows).astype(np.intp), 0, h - 1)
    c = np.rint(cols).astype(np.intp)
    c = np.mod(c, w) if wrap_cols else np.clip(c, 0, w - 1)
    return grid[r, c]


# ---------------------------------------------------------------------------
# projection operations
# ---------------------------------------------------------------------------

def project_perspective_to_cubemap(frame: PerspectiveFrame, pose: CameraPose,
                                   resolution: int) -> CubemapFrame:
    """Project one perspective frame onto a cubemap with observation masks.

    Each cube-face pixel direction is rotated into the camera frame; pixels
    inside the FoV frustum (boundary inclusive) bilinearly sample the frame
    and get mask 1, everything else is 0 with mask 0.
    """
    if resolution < 4:
        raise ValueError(f"face resolution must be >= 4, got {resolution}")
    tan_h = np.tan(np.radians(pose.hfov_deg) / 2.0)
    tan_v = np.tan(np.radians(pose.vfov_deg) / 2.0)
    h, w = frame.height, frame.width
    faces, masks = {}, {}
    for f in FACES:
        d_cam = face_pixel_directions(f, resolution) @ pose.rotation  # R^T d
        x, y, z = d_cam[..., 0], d_cam[..., 1], d_cam[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            px = np.where(z > 0, x / z, np.inf)
            py = np.where(z > 0, -y / z, np.inf)
        inside = (z > 0) & (np.abs(px) <= tan_h) & (np.abs(py) <= tan_v)
        cols = (px / tan_h + 1.0) / 2.0 * w - 0.5
        rows = (py / tan_v + 1.0) / 2.0 * h - 0.5
        cols = np.where(inside, cols, 0.0)
        rows = np.where(inside, rows, 0.0)
        sampled = _bilinear(frame.pixels, rows, cols)
        faces[f] = np.where(inside[..., None], sampled, 0.0)
        masks[f] = inside.astype(np.uint8)
    return CubemapFrame(faces=faces, masks=masks)


def cubemap_to_equirect(cube: CubemapFrame, width: int) -> EquirectGrid:
    """Resample a cubemap onto an equirectangular grid of the given width."""
    if width % 4:
        raise ValueError(f"equirect width must be a multiple of 4, got {width}")
    height = width // 2
    res = cube.resolution
    u, v = np.meshgrid(np.arange(width), np.arange(height), indexing="xy")
    dirs = equirect_pixel_to_direction(u, v, width)
    face, x, y = direction_to_face_coords(dirs)
    out = np.zeros((height, width, cube.channels), dtype=np.float64)
    for i, f in enumerate(FACES):
        sel = face == i
        if not sel.any():
            continue
        rows = y[sel] * res - 0.5
        cols = x[sel] * res - 0.5
        out[sel] = _bilinear(cube.faces[f], rows, cols)
    return EquirectGrid(pixels=out)


def equirect_to_cubemap(eq: EquirectGrid, resolution: int) -> CubemapFrame:
    """Resample an equirectangular grid onto a cubemap; masks are all ones."""
    if resolution < 1:
        raise ValueError("face resolution must be >= 1")
    w = eq.width
    faces, masks = {}, {}
    for f in FACES:
        dirs = face_pixel_directions(f, resolution)
        u, v = direction_to_equirect_pixel(dirs, w)
        faces[f] = _bilinear(eq.pixels, v, u, wrap_cols=True)
        masks[f] = np.ones((resolution, resolution), dtype=np.uint8)
    return CubemapFrame(faces=faces, masks=masks)


def resample_mask_to_equirect(cube: CubemapFrame, width: int) -> np.ndarray:
    """Nearest-neighbor transfer of the cubemap masks onto an equirect grid."""
    if width % 4:
        raise ValueError(f"equirect width must be a multiple of 4, got {width}")
    height = width // 2
    res = cube.resolution
    u, v = np.meshgrid(np.arange(width), np.arange(height), indexing="xy")
    dirs = equirect_pixel_to_direction(u, v, width)
    face, x, y = direction_to_face_coords(dirs)
    out = np.zeros((height, width), dtype=np.uint8)
    for i, f in enumerate(FACES):
        sel = face == i
        if sel.any():
            out[sel] = _nearest(cube.masks[f], y[sel] * res - 0.5, x[sel] * res - 0.5)
    return out


# ---------------------------------------------------------------------------
# camera trajectories
# ---------------------------------------------------------------------------

def sample_trajectory(anchors: list[CameraPose], n_frames: int) -> list[CameraPose]:
    """Interpolate anchor poses into ``n_frames`` poses.

    Rotations follow piecewise slerp sampled at uniform arc length over the
    whole path; FoVs interpolate linearly with the same parameter.  The first
    and last outputs equal the first and last anchors exactly.
    """
    if len(anchors) < 2:
        raise ValueError("need at least 2 anchors")
    if n_frames < 2:
        raise ValueError("need at least 2 frames")

    rots = [Rotation.from_matrix(a.rotation) for a in anchors]
    rel_vecs = []
    for ra, rb in zip(rots[:-1], rots[1:]):
        rel = ra.inv() * rb
        vec = rel.as_rotvec()
        ang = np.linalg.norm(vec)
        if ang > np.pi - 1e-9:
            raise ValueError("consecutive anchors are antipodal; slerp ill-defined")
        rel_vecs.append(vec)
    seg_len = np.array([np.linalg.norm(v) for v in rel_vecs])
    total = seg_len.sum()

    if total < 1e-12:
        # Rotations never move: parameterize uniformly by anchor index so
        # FoV interpolation still works.
        cum = np.arange(len(anchors), dtype=np.float64)
        total_param = cum[-1]
    else:
        cum = np.concatenate([[0.0], np.cumsum(seg_len)])
        total_param = total

    out = []
    for i in range(n_frames):
        if i == 0:
            out.append(anchors[0])
            continue
        if i == n_frames - 1:
            out.append(anchors[-1])
            continue
        s = total_param * i / (n_frames - 1)
        k = int(np.searchsorted(cum, s, side="right") - 1)
        k = min(k, len(anchors) - 2)
        span = cum[k + 1] - cum[k]
        t = (s - cum[k]) / span if span > 0 else 0.0
        rot = rots[k] * Rotation.from_rotvec(t * rel_vecs[k])
        hf = (1 - t) * anchors[k].hfov_deg + t * anchors[k + 1].hfov_deg
        vf = (1 - t) * anchors[k].vfov_deg + t * anchors[k + 1].vfov_deg
        out.append(CameraPose(rot.as_matrix(), hf, vf))
    return out


# ---------------------------------------------------------------------------
# solid-angle accounting (used by invariants and metrics)
# ---------------------------------------------------------------------------

def equirect_pixel_solid_angles(width: int) -> np.ndarray:
    """(H, W) midpoint-rule solid angle of each equirect pixel; sums to ~4*pi."""
    height = width // 2
    v = np.arange(height)
    lat = np.pi / 2.0 - (v + 0.5) / height * np.pi
    band = np.cos(lat) * (np.pi / height) * (2.0 * np.pi / width)
    return np.repeat(band[:, None], width, axis=1)


def face_pixel_solid_angles(resolution: int) -> np.ndarray:
    """(R, R) midpoint-rule solid angle of each cube-face pixel."""
    c = (np.arange(resolution) + 0.5) / resolution * 2.0 - 1.0
    b, a = np.meshgrid(c, c, indexing="ij")
    da = 2.0 / resolution
    return da * da / np.power(1.0 + a * a + b * b, 1.5)


def frustum_solid_angle(hfov_deg: float, vfov_deg: float) -> float:
    """Analytic solid angle of a symmetric rectangular frustum."""
    h = np.radians(hfov_deg)
    v = np.radians(vfov_deg)
    return float(4.0 * np.arcsin(np.sin(h / 2.0) * np.sin(v / 2.0)))
