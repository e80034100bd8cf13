"""Flattened-cross positional layout, topology-aligned padding, and blending.

The cross layout stacks U / F / D vertically (row offsets 0, R, 2R) and
places L, F, R, B horizontally (column offsets 0, R, 2R, 3R); U and D share
F's columns.  Every face edge has exactly one neighbor; strips copied across
an edge are pixel-exact dihedral (rotate/flip) rearrangements of the
neighbor's border band, so padding never resamples.

Strip arrays are stored in (depth, along) orientation: row k is the band at
distance k from the shared edge, columns run along the edge in the owning
face's traversal direction (columns for top/bottom edges, rows for
left/right).  The adjacency transform maps the neighbor's raw border slice
into this orientation; it is derived numerically from the face-axis tables
at import time rather than hand-written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .faces import FACES, face_axes
from .geometry import CubemapFrame

__all__ = [
    "EDGES",
    "EdgeAdjacency",
    "CubeLayout",
    "PaddedFace",
    "face_position_grid",
    "extract_strip",
    "pad_face",
    "blend_overlaps",
    "seam_metric",
    "corner_cycle_identity",
    "apply_transform",
    "inverse_transform_name",
]

EDGES = ("top", "bottom", "left", "right")

# The eight dihedral rearrangements of a 2D grid (leading two axes).
_TRANSFORMS = {
    "identity": lambda a: a,
    "rot90": lambda a: np.rot90(a, 1),
    "rot180": lambda a: np.rot90(a, 2),
    "rot270": lambda a: np.rot90(a, 3),
    "flip_h": lambda a: a[:, ::-1],
    "flip_v": lambda a: a[::-1, :],
    "transpose": lambda a: np.swapaxes(a, 0, 1),
    "anti_transpose": lambda a: np.swapaxes(a, 0, 1)[::-1, ::-1],
}

_INVERSE = {
    "identity": "identity",
    "rot90": "rot270",
    "rot180": "rot180",
    "rot270": "rot90",
    "flip_h": "flip_h",
    "flip_v": "flip_v",
    "transpose": "transpose",
    "anti_transpose": "anti_transpose",
}


def apply_transform(name: str, grid: np.ndarray) -> np.ndarray:
    """Apply a named dihedral rearrangement to the leading two axes."""
    return _TRANSFORMS[name](grid)


def inverse_transform_name(name: str) -> str:
    return _INVERSE[name]


@dataclass(frozen=True)
class EdgeAdjacency:
    """Directed edge record: crossing ``edge`` of ``face`` lands on
    ``neighbor_edge`` of ``neighbor``; ``transform`` maps the neighbor's raw
    border slice into (depth, along) strip orientation; ``flipped`` says the
    two traversal directions run antiparallel along the shared edge."""

    face: str
    edge: str
    neighbor: str
    neighbor_edge: str
    transform: str
    flipped: bool


def _edge_outward(face: str, edge: str) -> np.ndarray:
    n, r, d = face_axes(face)
    return {"top": -d, "bottom": d, "left": -r, "right": r}[edge]


def _edge_traversal(face: str, edge: str) -> np.ndarray:
    n, r, d = face_axes(face)
    return r if edge in ("top", "bottom") else d


def _face_with_normal(v: np.ndarray) -> str:
    for f in FACES:
        if np.array_equal(face_axes(f)[0], v):
            return f
    raise AssertionError(f"no face has normal {v}")


def _border_slice(grid: np.ndarray, edge: str, pad: int) -> np.ndarray:
    if edge == "top":
        return grid[:pad]
    if edge == "bottom":
        return grid[grid.shape[0] - pad:]
    if edge == "left":
        return grid[:, :pad]
    return grid[:, grid.shape[1] - pad:]


def _reference_strip(neighbor_grid: np.ndarray, neighbor_edge: str,
                     flipped: bool, pad: int) -> np.ndarray:
    """Scalar-indexed ground truth for the (depth, along) strip content."""
    res = neighbor_grid.shape[0]
    strip = np.empty((pad, res) + neighbor_grid.shape[2:], neighbor_grid.dtype)
    for k in range(pad):
        for j in range(res):
            m = res - 1 - j if flipped else j
            if neighbor_edge == "top":
                i2, j2 = k, m
            elif neighbor_edge == "bottom":
                i2, j2 = res - 1 - k, m
            elif neighbor_edge == "left":
                i2, j2 = m, k
            else:
                i2, j2 = m, res - 1 - k
            strip[k, j] = neighbor_grid[i2, j2]
    return strip


def _derive_adjacency() -> dict:
    table = {}
    probe = np.arange(36.0).reshape(6, 6)  # unique values force a unique match
    for f in FACES:
        for e in EDGES:
            g = _face_with_normal(_edge_outward(f, e))
            n_f = face_axes(f)[0]
            (e_back,) = [e2 for e2 in EDGES
                         if np.array_equal(_edge_outward(g, e2), n_f)]
            sigma = float(_edge_traversal(f, e) @ _edge_traversal(g, e_back))
            flipped = sigma < 0
            want = _reference_strip(probe, e_back, flipped, pad=2)
            raw = _border_slice(probe, e_back, pad=2)
            names = [name for name, op in _TRANSFORMS.items()
                     if op(raw).shape == want.shape and np.array_equal(op(raw), want)]
            assert len(names) == 1, (f, e, names)
            table[(f, e)] = EdgeAdjacency(face=f, edge=e, neighbor=g,
                                          neighbor_edge=e_back,
                                          transform=names[0], flipped=flipped)
    return table


_ADJACENCY = _derive_adjacency()


@dataclass(frozen=True)
class CubeLayout:
    """Flattened-cross face offsets plus the directed edge-adjacency table."""

    resolution: int
    offsets: dict
    adjacency: dict

    @classmethod
    def create(cls, resolution: int) -> "CubeLayout":
        if resolution < 1:
            raise ValueError("resolution must be >= 1")
        r = resolution
        offsets = {"U": (0, r), "F": (r, r), "D": (2 * r, r),
                   "L": (r, 0), "R": (r, 2 * r), "B": (r, 3 * r)}
        return cls(resolution=r, offsets=offsets, adjacency=dict(_ADJACENCY))

    def to_json_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "offsets": {f: list(self.offsets[f]) for f in FACES},
            "adjacency": [
                {"face": a.face, "edge": a.edge, "neighbor": a.neighbor,
                 "neighbor_edge": a.neighbor_edge, "transform": a.transform,
                 "flipped": a.flipped}
                for a in (self.adjacency[(f, e)] for f in FACES for e in EDGES)
            ],
        }


def face_position_grid(layout: CubeLayout, face: str) -> np.ndarray:
    """(R, R, 2) flattened-plane (row, col) coordinate of each face pixel."""
    r = layout.resolution
    ro, co = layout.offsets[face]
    rows, cols = np.meshgrid(np.arange(r) + ro, np.arange(r) + co, indexing="ij")
    return np.stack([rows, cols], axis=-1)


def extract_strip(face_grids: dict, face: str, edge: str, pad: int,
                  layout: CubeLayout) -> np.ndarray:
    """(pad, R, ...) strip for ``edge`` of ``face``: the neighbor's border
    band in (depth, along) orientation.  Pixel-exact copy, no resampling."""
    adj = layout.adjacency[(face, edge)]
    raw = _border_slice(face_grids[adj.neighbor], adj.neighbor_edge, pad)
    return apply_transform(adj.transform, raw).copy()


@dataclass(frozen=True)
class PaddedFace:
    """A face core with four neighbor strips and extrapolated positions.

    ``positions`` covers the assembled (R+2p) x (R+2p) grid; strip
    coordinates continue the core grid by exactly one step per band, so
    positions stay monotone across each edge.
    """

    face: str
    pad: int
    core: np.ndarray       # (R, R, C)
    strips: dict           # edge -> (p, R, C)
    positions: np.ndarray  # (R+2p, R+2p, 2)

    def as_array(self) -> np.ndarray:
        """Assemble core plus strips; corner blocks extend the nearer strip
        (ties go to the top/bottom strip) and are excluded from invariants."""
        r, p = self.core.shape[0], self.pad
        n = r + 2 * p
        out = np.zeros((n, n) + self.core.shape[2:], self.core.dtype)
        out[p:p + r, p:p + r] = self.core
        out[:p, p:p + r] = self.strips["top"][::-1]
        out[p + r:, p:p + r] = self.strips["bottom"]
        out[p:p + r, :p] = np.swapaxes(self.strips["left"], 0, 1)[:, ::-1]
        out[p:p + r, p + r:] = np.swapaxes(self.strips["right"], 0, 1)
        for rows, cols in (((0, p), (0, p)), ((0, p), (p + r, n)),
                           ((p + r, n), (0, p)), ((p + r, n), (p + r, n))):
            _fill_corner(out, rows, cols, p, r)
        return out

    @classmethod
    def from_array(cls, arr: np.ndarray, face: str, pad: int,
                   layout: CubeLayout) -> "PaddedFace":
        """Split an assembled padded array back into core + strips."""
        p = pad
        r = arr.shape[0] - 2 * p
        strips = {
            "top": arr[:p, p:p + r][::-1].copy(),
            "bottom": arr[p + r:, p:p + r].copy(),
            "left": np.swapaxes(arr[p:p + r, :p][:, ::-1], 0, 1).copy(),
            "right": np.swapaxes(arr[p:p + r, p + r:], 0, 1).copy(),
        }
        return cls(face=face, pad=p, core=arr[p:p + r, p:p + r].copy(),
                   strips=strips, positions=_padded_positions(layout, face, p))


def _fill_corner(out: np.ndarray, rows: tuple, cols: tuple, p: int, r: int):
    """Extend the nearer strip into a p x p corner block of the assembly;
    ties extend the top/bottom strip.  Corner content is ill-defined on a
    cube, so these blocks are excluded from every invariant."""
    r0, r1 = rows
    c0, c1 = cols
    near_col = p if c0 == 0 else p + r - 1  # nearest top/bottom-strip column
    near_row = p if r0 == 0 else p + r - 1  # nearest left/right-strip row
    for i in range(r0, r1):
        for j in range(c0, c1):
            gap_h = (p - j) if c0 == 0 else (j - (p + r) + 1)
            gap_v = (p - i) if r0 == 0 else (i - (p + r) + 1)
            if gap_h <= gap_v:  # top/bottom strip is nearer: extend its row
                out[i, j] = out[i, near_col]
            else:
                out[i, j] = out[near_row, j]


def _padded_positions(layout: CubeLayout, face: str, pad: int) -> np.ndarray:
    r = layout.resolution
    ro, co = layout.offsets[face]
    rows = np.arange(-pad, r + pad) + ro
    cols = np.arange(-pad, r + pad) + co
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return np.stack([rr, cc], axis=-1)


def pad_face(cubemap: CubemapFrame, face: str, pad: int,
             layout: CubeLayout) -> PaddedFace:
    """Pad ``face`` with transformed border strips from its four neighbors."""
    r = cubemap.resolution
    if not 1 <= pad <= r // 2:
        raise ValueError(f"pad width must lie in [1, R/2], got {pad} for R={r}")
    strips = {e: extract_strip(cubemap.faces, face, e, pad, layout) for e in EDGES}
    return PaddedFace(face=face, pad=pad, core=cubemap.faces[face].copy(),
                      strips=strips, positions=_padded_positions(layout, face, pad))


def blend_overlaps(generated: PaddedFace, cubemap: CubemapFrame, pad: int,
                   layout: CubeLayout) -> CubemapFrame:
    """Write a generated padded face back: core replaces the face wholesale,
    strips blend into each neighbor's border band with a linear ramp
    (weight 1 at the shared edge, falling to 1/p at depth p-1)."""
    if pad != generated.pad:
        raise ValueError("pad width does not match the generated face")
    faces = {f: cubemap.faces[f].copy() for f in FACES}
    faces[generated.face] = generated.core.copy()
    r = cubemap.resolution

    ramp = (1.0 - np.arange(pad) / pad)[:, None]  # (p, 1): depth 0 overwrites
    for e in EDGES:
        adj = layout.adjacency[(generated.face, e)]
        strip = generated.strips[e]
        w = np.broadcast_to(ramp, strip.shape[:2])
        if strip.ndim == 3:
            w = w[..., None]
        inv = inverse_transform_name(adj.transform)
        native_new = apply_transform(inv, strip * w)
        native_w = apply_transform(inv, np.broadcast_to(w, strip.shape))
        band = _border_slice(faces[adj.neighbor], adj.neighbor_edge, pad)
        blended = native_new + (1.0 - native_w) * band
        _assign_border(faces[adj.neighbor], adj.neighbor_edge, pad, blended)
    return CubemapFrame(faces=faces, masks={f: cubemap.masks[f].copy() for f in FACES})


def _assign_border(grid: np.ndarray, edge: str, pad: int, value: np.ndarray):
    if edge == "top":
        grid[:pad] = value
    elif edge == "bottom":
        grid[grid.shape[0] - pad:] = value
    elif edge == "left":
        grid[:, :pad] = value
    else:
        grid[:, grid.shape[1] - pad:] = value


def seam_metric(cubemap: CubemapFrame, layout: CubeLayout) -> float:
    """Mean absolute pixel difference across all 12 cube edges, pairing the
    border lines via the adjacency transforms."""
    total, count = 0.0, 0
    seen = set()
    for f in FACES:
        for e in EDGES:
            adj = layout.adjacency[(f, e)]
            key = frozenset({(f, e), (adj.neighbor, adj.neighbor_edge)})
            if key in seen:
                continue
            seen.add(key)
            # f's border line carried onto the neighbor's side of the edge,
            # paired against the neighbor's own border line
            carried = extract_strip(cubemap.faces, adj.neighbor,
                                    adj.neighbor_edge, 1, layout)[0]
            native = _own_border_line(cubemap.faces[adj.neighbor], adj.neighbor_edge)
            total += np.abs(carried - native).sum()
            count += carried.size
    return total / count


def _own_border_line(grid: np.ndarray, edge: str) -> np.ndarray:
    """A face's own border line in (along,) orientation for seam pairing."""
    if edge == "top":
        return grid[0]
    if edge == "bottom":
        return grid[grid.shape[0] - 1]
    if edge == "left":
        return grid[:, 0]
    return grid[:, grid.shape[1] - 1]


# ---------------------------------------------------------------------------
# corner consistency
# ---------------------------------------------------------------------------

def _corner_edges(ci: int, cj: int) -> tuple[str, str]:
    return ("top" if ci == 0 else "bottom", "left" if cj == 0 else "right")


def _cross_corner(face: str, ci: int, cj: int, edge: str,
                  layout: CubeLayout) -> tuple[str, int, int, str]:
    """Follow one edge crossing; returns (face', ci', cj', arrival edge)."""
    adj = layout.adjacency[(face, edge)]
    pos = cj if edge in ("top", "bottom") else ci  # 0 or 1 along traversal
    m = 1 - pos if adj.flipped else pos
    e2 = adj.neighbor_edge
    if e2 == "top":
        ci2, cj2 = 0, m
    elif e2 == "bottom":
        ci2, cj2 = 1, m
    elif e2 == "left":
        ci2, cj2 = m, 0
    else:
        ci2, cj2 = m, 1
    return adj.neighbor, ci2, cj2, e2


def corner_cycle_identity(layout: CubeLayout) -> bool:
    """Check 3-cycle consistency of the edge transforms at every cube corner.

    Crossing the three edges meeting at a corner (leaving each arrival face
    through its other corner edge) must return to the starting face and
    corner after exactly three crossings, in both directions.  This is the
    identity the flattened transforms can satisfy globally; a planar unfold
    around any cube corner necessarily carries a 90-degree angular defect, so
    pointwise corner consistency is the meaningful invariant.
    """
    for f in FACES:
        for ci in (0, 1):
            for cj in (0, 1):
                for first in _corner_edges(ci, cj):
                    face, a, b, edge = f, ci, cj, first
                    for _ in range(3):
                        face, a, b, arrived = _cross_corner(face, a, b, edge, layout)
                        e_h, e_v = _corner_edges(a, b)
                        edge = e_v if arrived == e_h else e_h
                    if (face, a, b) != (f, ci, cj):
                        return False
    return True
