"""Synthetic scene generation: object grids and spirals with label maps.

The bundled presets mirror the classic benchmark layout: fifteen flat
colored objects in a 3 x 5 grid with exactly one high-contrast target
(second row, fourth column), at three difficulty levels distinguished
by how bright the distractors are, plus a two-armed spiral scene for
moving-attention runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class GridObject:
    color: RGB
    row: int
    col: int
    height: int
    width: int


@dataclass(frozen=True)
class SceneSpec:
    kind: str                       # "object-grid" | "spirals"
    canvas: tuple[int, int]
    background: RGB = (0, 0, 0)
    objects: tuple[GridObject, ...] = ()
    arm_colors: tuple[RGB, RGB] = ((255, 255, 0), (110, 110, 130))
    arm_width: int = 3
    turns: float = 2.75

    def __post_init__(self):
        n, m = self.canvas
        if n < 1 or m < 1:
            raise ValueError("canvas must be at least 1x1")
        for color in (self.background, *(o.color for o in self.objects), *self.arm_colors):
            if len(color) != 3 or any(not (0 <= c <= 255) for c in color):
                raise ValueError(f"invalid RGB color {color}")


def generate_object_grid(spec: SceneSpec):
    """Render flat-color objects on a flat background.

    Returns (image uint8 (N, M, 3), labels uint8 (N, M)); object i gets
    label i+1, background 0.  Overlapping or out-of-canvas objects are
    rejected.
    """
    if spec.kind != "object-grid":
        raise ValueError("spec.kind must be 'object-grid'")
    n, m = spec.canvas
    image = np.empty((n, m, 3), dtype=np.uint8)
    image[...] = np.asarray(spec.background, dtype=np.uint8)
    labels = np.zeros((n, m), dtype=np.uint8)
    for idx, obj in enumerate(spec.objects, start=1):
        r0, c0 = obj.row, obj.col
        r1, c1 = r0 + obj.height, c0 + obj.width
        if obj.height < 1 or obj.width < 1 or r0 < 0 or c0 < 0 or r1 > n or c1 > m:
            raise ValueError(f"object {idx} outside the canvas")
        if np.any(labels[r0:r1, c0:c1] != 0):
            raise ValueError(f"object {idx} overlaps another object")
        labels[r0:r1, c0:c1] = idx
        image[r0:r1, c0:c1] = np.asarray(obj.color, dtype=np.uint8)
    return image, labels


def generate_spirals(spec: SceneSpec):
    """Render two interleaved spiral arms of distinct labels.

    Arm pixels are painted along an Archimedean spiral with a round
    brush; the two arms are offset by half a turn and must not overlap.
    """
    if spec.kind != "spirals":
        raise ValueError("spec.kind must be 'spirals'")
    if spec.arm_width < 1:
        raise ValueError("arm width must be at least 1 pixel")
    n, m = spec.canvas
    image = np.empty((n, m, 3), dtype=np.uint8)
    image[...] = np.asarray(spec.background, dtype=np.uint8)
    labels = np.zeros((n, m), dtype=np.uint8)
    center = np.array([(n - 1) / 2.0, (m - 1) / 2.0])
    r_max = min(n, m) / 2.0 - 1.5
    pitch = 2.0 * (spec.arm_width + 2.0)      # radial gap per full turn
    r0 = spec.arm_width + 1.0
    theta_max = (r_max - r0) / pitch * 2.0 * np.pi
    theta_max = min(theta_max, 2.0 * np.pi * spec.turns)
    brush = spec.arm_width / 2.0
    rows, cols = np.mgrid[0:n, 0:m]
    for arm, (color, phase) in enumerate(zip(spec.arm_colors, (0.0, np.pi)), start=1):
        lab = arm
        for theta in np.arange(0.0, theta_max, 0.01):
            r = r0 + pitch * theta / (2.0 * np.pi)
            ci = center[0] + r * np.sin(theta + phase)
            cj = center[1] + r * np.cos(theta + phase)
            hit = (rows - ci) ** 2 + (cols - cj) ** 2 <= brush * brush
            clash = hit & (labels != 0) & (labels != lab)
            if np.any(clash):
                raise ValueError("spiral arms overlap; reduce width or turns")
            labels[hit] = lab
            image[hit] = np.asarray(color, dtype=np.uint8)
    return image, labels


def _fifteen_objects(distractor_colors, target_color: RGB):
    """3 x 5 grid of 12 x 12 objects on a 60 x 100 canvas, target at (1, 3)."""
    objects = []
    size = 12
    row_gap, col_gap = 6, 7
    top, left = 6, 6
    k = 0
    for i in range(3):
        for j in range(5):
            r = top + i * (size + row_gap)
            c = left + j * (size + col_gap)
            if (i, j) == (1, 3):
                color = target_color
            else:
                color = distractor_colors[k % len(distractor_colors)]
                k += 1
            objects.append(GridObject(color=color, row=r, col=c, height=size, width=size))
    return tuple(objects)


#: Label id of the designated target in every object-grid preset
#: (second row, fourth column of the 3 x 5 layout).
TARGET_LABEL = 9

_PRESET_BUILDERS = {}


def _preset(name):
    def register(fn):
        _PRESET_BUILDERS[name] = fn
        return fn
    return register


@_preset("high-contrast")
def _high_contrast() -> SceneSpec:
    return SceneSpec(
        kind="object-grid",
        canvas=(60, 100),
        background=(10, 10, 10),
        objects=_fifteen_objects([(0, 0, 230)], (255, 255, 0)),
    )


@_preset("medium-contrast")
def _medium_contrast() -> SceneSpec:
    return SceneSpec(
        kind="object-grid",
        canvas=(60, 100),
        background=(10, 10, 10),
        objects=_fifteen_objects([(90, 90, 235)], (255, 255, 0)),
    )


@_preset("low-contrast")
def _low_contrast() -> SceneSpec:
    return SceneSpec(
        kind="object-grid",
        canvas=(60, 100),
        background=(10, 10, 10),
        objects=_fifteen_objects(
            [(170, 120, 235), (120, 170, 235), (150, 150, 220)], (255, 255, 0)
        ),
    )


@_preset("spirals")
def _spirals() -> SceneSpec:
    return SceneSpec(
        kind="spirals",
        canvas=(64, 64),
        background=(50, 50, 50),
        arm_colors=((255, 255, 0), (120, 120, 120)),
    )


def preset_names() -> list[str]:
    return sorted(_PRESET_BUILDERS)


def scene_preset(name: str) -> SceneSpec:
    try:
        return _PRESET_BUILDERS[name]()
    except KeyError:
        raise ValueError(
            f"unknown scene preset {name!r}; available: {', '.join(preset_names())}"
        ) from None


def generate_scene(spec: SceneSpec):
    if spec.kind == "object-grid":
        return generate_object_grid(spec)
    if spec.kind == "spirals":
        return generate_spirals(spec)
    raise ValueError(f"unknown scene kind {spec.kind!r}")
