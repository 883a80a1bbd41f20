"""Synthetic low-light action clips with one generative program per class.

Each class pairs an appearance cue (bright object / muzzle flash / blob
adjacency) with a trajectory cue (fast departure / oscillation / drop /
random walk) so that a frame-only classifier and a motion-only classifier
make different mistakes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clips import ActionLabel, Clip, clip_from_array, load_clip

FPS = 30
MIN_FRAMES = 90   # 3 s
MAX_FRAMES = 120  # 4 s
BACKGROUND = 10.0
NOISE_SIGMA = 8.0


@dataclass
class _Scene:
    """Per-group appearance shared by all clips in the group."""

    actor_gray: float
    actor_tint: np.ndarray  # per-channel offsets around the gray level
    y_center: float


def _scene_for_group(seed: int, action: int, group: int, height: int) -> _Scene:
    rng = np.random.default_rng(np.random.SeedSequence([seed, action, group]))
    gray = rng.uniform(85.0, 120.0)
    tint = rng.uniform(-8.0, 8.0, size=3)
    y_center = height / 2 + rng.uniform(-height * 0.12, height * 0.12)
    return _Scene(actor_gray=gray, actor_tint=tint, y_center=y_center)


def _draw_box(img: np.ndarray, cx: float, cy: float, sw: int, sh: int, color) -> None:
    h, w, _ = img.shape
    x0 = int(round(cx - sw / 2.0))
    y0 = int(round(cy - sh / 2.0))
    x1, y1 = x0 + sw, y0 + sh
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, w), min(y1, h)
    if x0 < x1 and y0 < y1:
        img[y0:y1, x0:x1] = color


def _draw_tilted(img: np.ndarray, cx: float, cy: float, sw: int, sh: int,
                 slope: float, color) -> None:
    """Bar leaning sideways: each row is shifted by slope * (row - center)."""
    h, w, _ = img.shape
    y0 = int(round(cy - sh / 2.0))
    for dy in range(sh):
        y = y0 + dy
        if not 0 <= y < h:
            continue
        shift = slope * (dy - sh / 2.0)
        x0 = int(round(cx - sw / 2.0 + shift))
        x1 = min(x0 + sw, w)
        x0 = max(x0, 0)
        if x0 < x1:
            img[y, x0:x1] = color


def _reflect(value: float, lo: float, hi: float) -> float:
    # bounce a coordinate back into [lo, hi]
    while value < lo or value > hi:
        if value < lo:
            value = 2 * lo - value
        if value > hi:
            value = 2 * hi - value
    return value


def _actor_color(scene: _Scene) -> np.ndarray:
    return np.clip(scene.actor_gray + scene.actor_tint, 0, 255)

OBJECT_COLOR = np.array([205.0, 150.0, 55.0])   # warm carried-object blob
FLASH_COLOR = np.array([255.0, 240.0, 185.0])

ACTOR_W, ACTOR_H = 4, 12      # standing actor footprint in pixels
FALLEN_W, FALLEN_H = 13, 3
OBJECT_SIZE = 6
FLASH_SIZE = 8
ASSAULT_TILT = 0.55           # lean of fighting actors, px of x-shift per row


def _render_theft(rng, scene, n, w, h):
    """Two actors converge; one departs fast carrying a bright object."""
    y = scene.y_center + rng.uniform(-2, 2)
    victim_x = rng.uniform(w * 0.55, w * 0.72)
    thief_x = rng.uniform(7.0, w * 0.22)
    meet_t = int(n * rng.uniform(0.28, 0.36))
    dwell = 3
    depart_speed = rng.uniform(3.2, 4.0)
    depart_dir = rng.choice([-1.0, 1.0])
    approach = (victim_x - ACTOR_W - 2 - thief_x) / meet_t
    color = _actor_color(scene)

    positions = []
    tx = thief_x
    for t in range(n):
        if t < meet_t:
            tx += approach
        elif t < meet_t + dwell:
            tx += rng.normal(0, 0.2)
        else:
            tx += depart_speed * depart_dir
        tx = _reflect(tx, 3.0, w - 4.0)
        vy = y + rng.normal(0, 0.15)
        ty = y + rng.normal(0, 0.15)
        carried_by_thief = t >= meet_t + dwell
        positions.append((tx, ty, victim_x, vy, carried_by_thief))

    frames = np.empty((n, h, w, 3), dtype=np.float64)
    for t, (tx_, ty_, vx_, vy_, carried) in enumerate(positions):
        img = np.full((h, w, 3), BACKGROUND)
        _draw_box(img, vx_, vy_, ACTOR_W, ACTOR_H, color)
        _draw_box(img, tx_, ty_, ACTOR_W, ACTOR_H, color)
        ox, oy = (tx_ + 4.5, ty_ - 2.0) if carried else (vx_ + 4.5, vy_ - 2.0)
        _draw_box(img, ox, oy, OBJECT_SIZE, OBJECT_SIZE, OBJECT_COLOR)
        frames[t] = img
    return frames


def _render_assault(rng, scene, n, w, h):
    """Two actors close in, then stay in oscillatory contact."""
    y = scene.y_center + rng.uniform(-2, 2)
    contact_x = rng.uniform(w * 0.38, w * 0.62)
    gap = ACTOR_W + 0.5
    left_x = rng.uniform(8.0, contact_x - w * 0.2)
    right_x = rng.uniform(contact_x + w * 0.2, w - 8.0)
    approach_t = int(n * rng.uniform(0.2, 0.3))
    amp = rng.uniform(3.0, 4.0)
    period = rng.uniform(4.0, 6.0)
    phase = rng.uniform(0, 2 * np.pi)
    color = _actor_color(scene)

    frames = np.empty((n, h, w, 3), dtype=np.float64)
    for t in range(n):
        if t < approach_t:
            frac = t / approach_t
            lx = left_x + frac * (contact_x - gap / 2 - left_x)
            rx = right_x + frac * (contact_x + gap / 2 - right_x)
            tilt = frac * ASSAULT_TILT
        else:
            swing = amp * np.sin(2 * np.pi * (t - approach_t) / period + phase)
            lx = contact_x - gap / 2 + swing
            rx = contact_x + gap / 2 + swing
            tilt = ASSAULT_TILT
        img = np.full((h, w, 3), BACKGROUND)
        # fighters lean toward each other (orientation is the spatial cue)
        _draw_tilted(img, lx + rng.normal(0, 0.1), y + rng.normal(0, 0.15),
                     ACTOR_W, ACTOR_H, -tilt, color)
        _draw_tilted(img, rx + rng.normal(0, 0.1), y + rng.normal(0, 0.15),
                     ACTOR_W, ACTOR_H, tilt, color)
        frames[t] = img
    return frames


def _render_shooting(rng, scene, n, w, h):
    """Static aiming shooter, 2-frame muzzle flash, victim drops and stays down."""
    y = scene.y_center + rng.uniform(-2, 2)
    shooter_x = rng.uniform(8.0, w * 0.3)
    victim_x = rng.uniform(w * 0.6, w - 10.0)
    flash_t = int(rng.integers(n // 5, n // 4))
    drop_frames = 6
    color = _actor_color(scene)

    frames = np.empty((n, h, w, 3), dtype=np.float64)
    for t in range(n):
        img = np.full((h, w, 3), BACKGROUND)
        sx = shooter_x + rng.normal(0, 0.1)
        sy = y + rng.normal(0, 0.1)
        _draw_box(img, sx, sy, ACTOR_W, ACTOR_H, color)
        # extended aiming arm toward the victim
        _draw_box(img, sx + 4.5, sy - 2.0, 6, 2, color)
        if t <= flash_t:
            vw, vh = ACTOR_W, ACTOR_H
            vy = y
        elif t < flash_t + drop_frames:
            frac = (t - flash_t) / drop_frames
            vw = int(round(ACTOR_W + frac * (FALLEN_W - ACTOR_W)))
            vh = int(round(ACTOR_H + frac * (FALLEN_H - ACTOR_H)))
            vy = y + frac * ((ACTOR_H - FALLEN_H) / 2 + 12.0)
        else:
            vw, vh = FALLEN_W, FALLEN_H
            vy = y + (ACTOR_H - FALLEN_H) / 2 + 12.0
        _draw_box(img, victim_x + rng.normal(0, 0.05), vy, vw, vh, color)
        if flash_t <= t < flash_t + 2:
            _draw_box(img, sx + 6.0, sy - 2.0, FLASH_SIZE, FLASH_SIZE, FLASH_COLOR)
        frames[t] = img
    return frames


def _render_no_action(rng, scene, n, w, h):
    """A lone constant-speed wanderer.

    The walker never stalls: a still scene is a shooting cue, not a calm
    one. A single actor also keeps the scene's bright mass well below any
    of the two-actor interaction classes.
    """
    pos = np.array(
        [rng.uniform(10.0, w - 10.0), scene.y_center + rng.uniform(-3, 3)]
    )
    heading = rng.uniform(0, 2 * np.pi)
    speed = rng.uniform(0.5, 0.8)
    color = _actor_color(scene)

    frames = np.empty((n, h, w, 3), dtype=np.float64)
    for t in range(n):
        heading += rng.normal(0, 0.35)
        pos[0] += speed * np.cos(heading)
        pos[1] += speed * np.sin(heading) * 0.5
        pos[0] = _reflect(pos[0], 5.0, w - 6.0)
        pos[1] = _reflect(pos[1], 8.0, h - 9.0)
        img = np.full((h, w, 3), BACKGROUND)
        _draw_box(img, pos[0], pos[1], ACTOR_W, ACTOR_H, color)
        frames[t] = img
    return frames


_RENDERERS = {
    ActionLabel.THEFT: _render_theft,
    ActionLabel.ASSAULT: _render_assault,
    ActionLabel.SHOOTING: _render_shooting,
    ActionLabel.NO_ACTION: _render_no_action,
}


def render_clip(
    seed: int, action: ActionLabel, group: int, clip: int, width: int, height: int
) -> Clip:
    """Render one clip deterministically from its (seed, action, group, clip) key."""
    scene = _scene_for_group(seed, int(action), group, height)
    rng = np.random.default_rng(np.random.SeedSequence([seed, int(action), group, clip]))
    n = int(rng.integers(MIN_FRAMES, MAX_FRAMES + 1))
    frames = _RENDERERS[action](rng, scene, n, width, height)
    noise = rng.normal(0.0, NOISE_SIGMA, size=frames.shape)
    video = np.clip(frames + noise, 0, 255).astype(np.uint8)
    return clip_from_array(video, fps=FPS, label=action, group_id=group, clip_id=clip)


def generate_synthetic_dataset(
    seed: int,
    groups_per_action: int,
    clips_per_group: int,
    width: int = 64,
    height: int = 64,
    out_dir: str | Path = "dataset",
    n_actions: int = 4,
) -> Path:
    """Write a labeled clip tree ``<action>/g<group>_c<clip>.lclip`` plus sidecar.

    Deterministic: the same arguments always produce byte-identical files.
    """
    if n_actions != len(ActionLabel):
        raise ValueError(f"label set is fixed at {len(ActionLabel)} actions")
    if width < 32 or height < 32:
        raise ValueError("minimum supported resolution is 32x32")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for action in ActionLabel:
        action_dir = out / action.wire_name
        action_dir.mkdir(exist_ok=True)
        for group in range(groups_per_action):
            for clip_idx in range(clips_per_group):
                clip = render_clip(seed, action, group, clip_idx, width, height)
                from .clips import save_clip

                save_clip(clip, action_dir / f"g{group:02d}_c{clip_idx:02d}.lclip")
                count += 1
    sidecar = {
        "actions": [a.wire_name for a in ActionLabel],
        "clip_count": count,
        "clips_per_group": clips_per_group,
        "fps": FPS,
        "groups_per_action": groups_per_action,
        "height": height,
        "seed": seed,
        "width": width,
    }
    (out / "dataset.json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")
    return out


def dataset_manifest(root: str | Path) -> dict:
    return json.loads((Path(root) / "dataset.json").read_text())


def iter_dataset_paths(root: str | Path):
    """Yield (path, label) pairs in deterministic order."""
    root = Path(root)
    for action in ActionLabel:
        action_dir = root / action.wire_name
        if not action_dir.is_dir():
            continue
        for path in sorted(action_dir.glob("*.lclip")):
            yield path, action


def load_dataset(root: str | Path) -> list[Clip]:
    return [load_clip(path) for path, _ in iter_dataset_paths(root)]
