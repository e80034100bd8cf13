"""Portable pixmap/floatmap/graymap I/O and pose JSON serialization.

Formats: binary P6 (8-bit RGB), P5 (8-bit gray; masks use values {0, 255}),
and PFM ("PF" color / "Pf" gray, little-endian, bottom-to-top scanlines as
the format specifies).  All writers produce deterministic bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import CameraPose

__all__ = [
    "write_ppm", "read_ppm",
    "write_pgm", "read_pgm",
    "write_pfm", "read_pfm",
    "write_mask_pgm", "read_mask_pgm",
    "write_poses", "read_poses",
]


def write_ppm(path, pixels: np.ndarray) -> None:
    """8-bit binary P6 from float pixels in [0, 1], shape (H, W, 3)."""
    px = np.asarray(pixels)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ValueError(f"P6 needs (H, W, 3) pixels, got {px.shape}")
    data = np.clip(np.rint(px * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_ppm(path) -> np.ndarray:
    magic, (w, h), maxval, data = _read_netpbm(path)
    if magic != b"P6":
        raise ValueError(f"not a P6 file: {path}")
    img = np.frombuffer(data, dtype=np.uint8, count=w * h * 3).reshape(h, w, 3)
    return img.astype(np.float64) / maxval


def write_pgm(path, gray: np.ndarray) -> None:
    """8-bit binary P5 from float gray values in [0, 1], shape (H, W)."""
    g = np.asarray(gray)
    if g.ndim != 2:
        raise ValueError(f"P5 needs (H, W) pixels, got {g.shape}")
    data = np.clip(np.rint(g * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    magic, (w, h), maxval, data = _read_netpbm(path)
    if magic != b"P5":
        raise ValueError(f"not a P5 file: {path}")
    img = np.frombuffer(data, dtype=np.uint8, count=w * h).reshape(h, w)
    return img.astype(np.float64) / maxval


def write_mask_pgm(path, mask: np.ndarray) -> None:
    """Binary mask as P5 with values {0, 255}."""
    m = np.asarray(mask)
    if not np.isin(m, (0, 1)).all():
        raise ValueError("mask must be binary")
    write_pgm(path, m.astype(np.float64))


def read_mask_pgm(path) -> np.ndarray:
    return (read_pgm(path) >= 0.5).astype(np.uint8)


def _read_netpbm(path):
    raw = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":  # comment line
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    magic, w, h, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    return magic, (w, h), maxval, raw[pos:]


def write_pfm(path, pixels: np.ndarray) -> None:
    """Little-endian PFM; (H, W, 3) writes "PF", (H, W) or (H, W, 1) "Pf"."""
    px = np.asarray(pixels, dtype=np.float32)
    if px.ndim == 3 and px.shape[2] == 1:
        px = px[..., 0]
    if px.ndim == 2:
        magic = b"Pf"
    elif px.ndim == 3 and px.shape[2] == 3:
        magic = b"PF"
    else:
        raise ValueError(f"PFM needs 1 or 3 channels, got shape {px.shape}")
    h, w = px.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(px[::-1].astype("<f4").tobytes())  # bottom-to-top rows


def read_pfm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    magic, dims, scale, data = parts[0], parts[1], float(parts[2]), parts[3]
    w, h = (int(v) for v in dims.split())
    channels = 3 if magic == b"PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    img = np.frombuffer(data, dtype=dtype, count=w * h * channels)
    img = img.reshape(h, w, channels)[::-1]
    return img.astype(np.float64) * (abs(scale) if abs(scale) != 1.0 else 1.0)


def write_poses(path, poses: list) -> None:
    obj = [p.to_json_dict() for p in poses]
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_poses(path) -> list:
    obj = json.loads(Path(path).read_text())
    return [CameraPose.from_json_dict(p) for p in obj]
