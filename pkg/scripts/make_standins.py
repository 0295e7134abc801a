#!/usr/bin/env python3
"""Regenerate the bundled stand-in photographs and their label maps.

Two procedurally textured scenes stand in for real photographs: a
bright flower over foliage (fixed-attention selection) and a sandy
animal on grass (moving-attention shift).  Textures are smooth seeded
noise so neighboring pixels stay color-similar (gates on within each
region) while the two regions contrast strongly.

Run from the repository root:  python3 scripts/make_standins.py
"""

import sys
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from phasesel.io import write_image_png, write_labels_png  # noqa: E402
from phasesel.saliency import SaliencyConfig, build_saliency_maps  # noqa: E402

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "phasesel" / "data"
SHAPE = (72, 96)


def smooth_noise(rng, shape, sigma=4.0):
    field = gaussian_filter(rng.standard_normal(shape), sigma, mode="reflect")
    return field / max(np.abs(field).max(), 1e-12)


def textured(base, noise, amplitude, tint):
    """Base color plus correlated luminance noise, per channel."""
    img = np.empty(noise.shape + (3,))
    for ch in range(3):
        img[..., ch] = base[ch] + amplitude * tint[ch] * noise
    return img


def make_dog():
    rng = np.random.default_rng(97)
    n, m = SHAPE
    rows, cols = np.mgrid[0:n, 0:m].astype(float)

    body = ((rows - 44) / 16.0) ** 2 + ((cols - 44) / 23.0) ** 2 <= 1.0
    head = ((rows - 30) / 9.5) ** 2 + ((cols - 63) / 8.5) ** 2 <= 1.0
    ear = ((rows - 22) / 5.0) ** 2 + ((cols - 68) / 3.0) ** 2 <= 1.0
    snout = ((rows - 33) / 4.5) ** 2 + ((cols - 72) / 6.0) ** 2 <= 1.0
    dog = body | head | ear | snout
    # bright chest patch: owns the image's contrast peak so the bulk of
    # the fur sits at a mid attention level
    patch = ((rows - 38) / 3.2) ** 2 + ((cols - 52) / 4.0) ** 2 <= 1.0

    grass_noise = smooth_noise(rng, SHAPE, sigma=3.0)
    dog_noise = smooth_noise(rng, SHAPE, sigma=4.0)
    image = textured((0.21, 0.36, 0.16), grass_noise, 0.065, (0.6, 1.0, 0.5))
    fur = textured((0.88, 0.76, 0.57), dog_noise, 0.045, (1.0, 0.9, 0.7))
    image[dog] = fur[dog]
    image[patch] = np.array([0.98, 0.97, 0.94]) + 0.02 * dog_noise[patch][..., None]
    image = np.clip(image, 0.0, 1.0)

    labels = np.ones(SHAPE, dtype=np.uint8)
    labels[dog | patch] = 2
    return (image * 255).round().astype(np.uint8), labels


def make_flower():
    rng = np.random.default_rng(31)
    n, m = SHAPE
    rows, cols = np.mgrid[0:n, 0:m].astype(float)

    petals = np.zeros(SHAPE, dtype=bool)
    cy, cx = 35.0, 47.0
    for angle in np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False):
        py = cy + 11.0 * np.sin(angle)
        px = cx + 13.0 * np.cos(angle)
        along = (rows - py) * np.sin(angle) + (cols - px) * np.cos(angle)
        across = (rows - py) * np.cos(angle) - (cols - px) * np.sin(angle)
        petals |= (along / 9.0) ** 2 + (across / 5.5) ** 2 <= 1.0
    core = ((rows - cy) / 8.0) ** 2 + ((cols - cx) / 8.0) ** 2 <= 1.0
    flower = petals | core

    leaf_noise = smooth_noise(rng, SHAPE, sigma=3.0)
    petal_noise = smooth_noise(rng, SHAPE, sigma=5.0)
    image = textured((0.12, 0.27, 0.10), leaf_noise, 0.05, (0.5, 1.0, 0.45))
    bloom = textured((0.93, 0.80, 0.22), petal_noise, 0.04, (0.8, 1.0, 0.9))
    image[flower] = bloom[flower]
    image[core] = np.clip(image[core] * np.array([1.0, 0.92, 0.55]), 0, 1)
    image = np.clip(image, 0.0, 1.0)

    labels = np.ones(SHAPE, dtype=np.uint8)
    labels[flower] = 2
    return (image * 255).round().astype(np.uint8), labels


def report(name, image, labels, sigma, delta_omega):
    maps, _ = build_saliency_maps(image, SaliencyConfig(sigma=sigma, delta_omega=delta_omega))
    for gid, gname in ((2, "subject"), (1, "surround")):
        c = maps.contrast[labels == gid]
        print(
            f"  {name} {gname}: n={c.size} "
            f"C~ q10/q50/q90 = {np.quantile(c, 0.1):.2f}/{np.median(c):.2f}/{np.quantile(c, 0.9):.2f}"
        )


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for name, builder, sigma, dom in (
        ("dog", make_dog, 0.1, 0.02),
        ("flower", make_flower, 0.5, 0.02),
    ):
        image, labels = builder()
        write_image_png(DATA_DIR / f"{name}.png", image)
        write_labels_png(DATA_DIR / f"{name}_labels.png", labels)
        print(f"wrote {name}.png / {name}_labels.png")
        report(name, image, labels, sigma, dom)


if __name__ == "__main__":
    main()
