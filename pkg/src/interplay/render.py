"""Grayscale heatmaps of appraisal and opinion matrices.

Every entry becomes a square block of ``cell`` pixels. Values map linearly
from [-v, v] to [0, 255] so lower values are darker and zero sits at mid
gray; ``v`` is shared by all frames of one matrix so they stay comparable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .core import Trajectory

DEFAULT_CELL = 32


def to_gray(a: np.ndarray, vmax: float) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if vmax <= 0:
        return np.full(a.shape, 128, dtype=np.uint8)
    scaled = (np.clip(a, -vmax, vmax) + vmax) / (2.0 * vmax)
    return np.rint(scaled * 255.0).astype(np.uint8)


def render_matrix(a: np.ndarray, vmax: float, cell: int = DEFAULT_CELL) -> Image.Image:
    g = to_gray(a, vmax)
    g = np.kron(g, np.ones((cell, cell), dtype=np.uint8))
    return Image.fromarray(g)


def filmstrip(images: Sequence[Image.Image], gap: int = 8) -> Image.Image:
    width = sum(im.width for im in images) + gap * (len(images) - 1)
    height = max(im.height for im in images)
    strip = Image.new("L", (width, height), color=255)
    x = 0
    for im in images:
        strip.paste(im, (x, 0))
        x += im.width + gap
    return strip


def select_frames(traj: Trajectory, frames: str = "0,1,mid,final") -> list[int]:
    """Resolve a comma list of step indices and the words ``mid``/``final``
    to recorded step indices (nearest recorded step, deduplicated)."""
    recorded = traj.steps
    last = recorded[-1]
    out: list[int] = []
    for tok in frames.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok == "final":
            t = last
        elif tok == "mid":
            t = last // 2
        else:
            t = int(tok)
        t = min(recorded, key=lambda r: (abs(r - t), r))
        if t not in out:
            out.append(t)
    return sorted(out)


def render_trajectory(
    traj: Trajectory,
    out_dir: Path,
    frames: str = "0,1,mid,final",
    cell: int = DEFAULT_CELL,
) -> list[Path]:
    """Write per-frame PNGs and a filmstrip for X and Y; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    steps = select_frames(traj, frames)
    written = []
    for name in ("X", "Y"):
        snaps = [traj.at(t) for t in steps]
        mats = [(s.t, getattr(s, name)) for s in snaps if getattr(s, name) is not None]
        if not mats:
            continue
        vmax = max(float(np.max(np.abs(a))) for _, a in mats)
        images = []
        for t, a in mats:
            im = render_matrix(a, vmax, cell)
            path = out_dir / f"{name}_t{t:04d}.png"
            im.save(path, format="PNG")
            written.append(path)
            images.append(im)
        path = out_dir / f"{name}_filmstrip.png"
        filmstrip(images, gap=max(1, cell // 4)).save(path, format="PNG")
        written.append(path)
    return written
