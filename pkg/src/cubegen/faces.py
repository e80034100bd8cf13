"""Cube face identifiers, canonical ordering, and the frozen axis convention.

Coordinate frame: right-handed, +z = front, +y = up, +x = right.  Each face
carries an outward normal ``n``, a "+column" axis ``r`` (direction of
increasing image column) and a "+row" axis ``d`` (increasing image row).
The axes are chosen so that the horizontal ring L -> F -> R -> B is
content-continuous across shared vertical edges and U / D stack continuously
above / below F:

    face | outward n | +col r | +row d
    -----+-----------+--------+-------
      F  |    +z     |   +x   |  -y
      R  |    +x     |   -z   |  -y
      B  |    -z     |   -x   |  -y
      L  |    -x     |   +z   |  -y
      U  |    +y     |   +x   |  +z
      D  |    -y     |   +x   |  -z

A pixel (row i, col j) on face f at resolution R maps to the direction
``n + a*r + b*d`` (normalized) with a = 2*(j+0.5)/R - 1, b = 2*(i+0.5)/R - 1.
"""

from __future__ import annotations

import numpy as np

# Canonical order; also the deterministic tie-break priority everywhere.
FACES: tuple[str, ...] = ("F", "R", "B", "L", "U", "D")
FACE_INDEX: dict[str, int] = {f: i for i, f in enumerate(FACES)}

OPPOSITE: dict[str, str] = {"F": "B", "B": "F", "R": "L", "L": "R", "U": "D", "D": "U"}

FACE_AXES: dict[str, tuple[tuple[float, float, float], ...]] = {
    #      n (outward)      r (+col)          d (+row)
    "F": ((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.0, -1.0, 0.0)),
    "R": ((1.0, 0.0, 0.0), (0.0, 0.0, -1.0), (0.0, -1.0, 0.0)),
    "B": ((0.0, 0.0, -1.0), (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)),
    "L": ((-1.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, -1.0, 0.0)),
    "U": ((0.0, 1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    "D": ((0.0, -1.0, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, -1.0)),
}


def face_axes(face: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (n, r, d) unit axes of ``face`` as float64 arrays."""
    n, r, d = FACE_AXES[face]
    return np.asarray(n), np.asarray(r), np.asarray(d)


def adjacent_faces(face: str) -> tuple[str, ...]:
    """The four faces sharing an edge with ``face``, in canonical order."""
    if face not in FACE_INDEX:
        raise ValueError(f"unknown face {face!r}")
    return tuple(g for g in FACES if g != face and g != OPPOSITE[face])
