"""Per-pixel saliency maps driving the oscillator lattice.

An image is reduced to four feature planes (intensity, red, green,
blue).  Each pixel's absolute contrast is its weighted mean deviation
from the image-wide feature means; a Gaussian of the gap between
contrast and the current attention level turns that into relative
contrast, which in turn sets the attractive/repulsive coupling
strengths and the natural frequency of every cell.  Positive coupling
is additionally gated off across color boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GateSet, NEIGHBOR_OFFSETS, in_bounds_mask, shift_plane

#: Feature plane order used throughout: intensity, red, green, blue.
FEATURE_NAMES = ("intensity", "red", "green", "blue")
DEFAULT_WEIGHTS = np.array([3.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class SaliencyConfig:
    sigma: float = 0.4
    delta_omega: float = 0.2
    k_plus_max: float = 0.05
    k_minus_max: float = 0.02
    color_gate_threshold: float = 0.1

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        for name in ("delta_omega", "k_plus_max", "k_minus_max",
                     "color_gate_threshold"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative")


@dataclass(frozen=True)
class FeatureStack:
    """Normalized feature planes with their weights and image-wide means."""

    planes: np.ndarray   # (4, N, M), values in [0, 1]
    weights: np.ndarray  # (4,)
    means: np.ndarray    # (4,)

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        means = np.asarray(self.means, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[0] != 4:
            raise ValueError("planes must have shape (4, N, M)")
        if planes.min() < 0 or planes.max() > 1:
            raise ValueError("feature values must lie in [0, 1]")
        if weights.shape != (4,) or np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("weights must be 4 nonnegative values with positive sum")
        if means.shape != (4,):
            raise ValueError("means must have 4 entries")
        if np.max(np.abs(means - planes.mean(axis=(1, 2)))) > 1e-12:
            raise ValueError("means do not match plane averages")
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1:]

    @property
    def rgb(self) -> np.ndarray:
        """Color planes only, shape (3, N, M)."""
        return self.planes[1:]


@dataclass(frozen=True)
class SaliencyMaps:
    """All per-pixel lattice parameters derived from one image.

    `contrast` is the scene-rescaled absolute contrast (maximum pixel
    at 1), so the attention peak always sits on the scene's strongest
    pixel regardless of how much raw contrast the image offers.
    """

    contrast: np.ndarray        # C, rescaled to [0, 1]
    relative: np.ndarray        # R in (0, 1]
    k_plus: np.ndarray
    k_minus: np.ndarray
    omega: np.ndarray
    raw_contrast: np.ndarray = None  # unscaled weighted deviation

    @property
    def shape(self) -> tuple[int, int]:
        return self.contrast.shape


def _normalize_channels(image: np.ndarray) -> np.ndarray:
    """Scale integer channels by their nominal maximum; pass floats through."""
    if np.issubdtype(image.dtype, np.integer):
        info = np.iinfo(image.dtype)
        return image.astype(np.float64) / float(info.max)
    out = np.asarray(image, dtype=np.float64)
    if out.size and (out.min() < 0 or out.max() > 1):
        raise ValueError("float images must be normalized to [0, 1]")
    return out


def extract_features(image: np.ndarray, weights=None) -> FeatureStack:
    """Build the I/R/G/B feature stack from an RGB image array.

    Intensity is the channel mean (R+G+B)/3.  8-bit images are divided
    by 255, 16-bit by 65535; float images must already lie in [0, 1].
    """
    image = np.asarray(image)
    if image.size == 0:
        raise ValueError("empty image")
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("image must have shape (N, M, 3)")
    norm = _normalize_channels(image)
    r, g, b = norm[..., 0], norm[..., 1], norm[..., 2]
    intensity = (r + g + b) / 3.0
    planes = np.stack([intensity, r, g, b])
    w = DEFAULT_WEIGHTS if weights is None else np.asarray(weights, dtype=np.float64)
    return FeatureStack(planes=planes, weights=w, means=planes.mean(axis=(1, 2)))


def absolute_contrast(features: FeatureStack) -> np.ndarray:
    """Weighted mean absolute deviation of each pixel from the plane means."""
    if features.weights.sum() <= 0:
        raise ValueError("total feature weight must be positive")
    dev = np.abs(features.planes - features.means[:, None, None])
    weighted = np.tensordot(features.weights, dev, axes=(0, 0))
    return weighted / features.weights.sum()


def rescale_contrast(contrast: np.ndarray) -> np.ndarray:
    """Rescale a contrast map so its maximum pixel sits at 1.

    A perfectly uniform image (zero contrast everywhere) is returned
    unchanged; downstream selection then reports no salient object.
    """
    peak = float(np.max(contrast))
    if peak <= 0:
        return np.zeros_like(contrast)
    return contrast / peak


def relative_contrast_fixed(contrast: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian of the gap between contrast and the top attention level 1."""
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    c = np.asarray(contrast, dtype=np.float64)
    return np.exp(-((1.0 - c) ** 2) / (2.0 * sigma * sigma))


def relative_contrast_moving(
    contrast: np.ndarray, sigma: float, t: float, t_end: float
) -> np.ndarray:
    """Gaussian of the gap between contrast and the level t/t_end.

    At t == t_end this coincides with `relative_contrast_fixed`
    bit-for-bit.
    """
    if not (sigma > 0):
        raise ValueError("sigma must be positive")
    if not (t_end > 0):
        raise ValueError("t_end must be positive")
    if not (0 <= t <= t_end):
        raise ValueError("t must lie in [0, t_end]")
    c = np.asarray(contrast, dtype=np.float64)
    level = t / t_end
    return np.exp(-((level - c) ** 2) / (2.0 * sigma * sigma))


def coupling_maps(relative: np.ndarray, k_plus_max: float, k_minus_max: float):
    """Attractive/repulsive strength maps sharing one relative-contrast map."""
    if k_plus_max < 0 or k_minus_max < 0:
        raise ValueError("coupling maxima must be nonnegative")
    r = np.asarray(relative, dtype=np.float64)
    return k_plus_max * r, k_minus_max * (1.0 - r)


def omega_map(contrast: np.ndarray, delta_omega: float) -> np.ndarray:
    """Natural frequencies spread over [1 - d/2, 1 + d/2] by contrast."""
    if delta_omega < 0:
        raise ValueError("delta_omega must be nonnegative")
    c = np.asarray(contrast, dtype=np.float64)
    return 1.0 - delta_omega / 2.0 + delta_omega * c


def similarity_gates(features, threshold: float) -> GateSet:
    """Gate on each 8-neighbor pair whose RGB distance is within `threshold`.

    Similarity is judged on the raw color planes; the result is
    symmetric by construction.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    rgb = features.rgb if isinstance(features, FeatureStack) else np.asarray(features, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[0] != 3:
        raise ValueError("expected color planes of shape (3, N, M)")
    shape = rgb.shape[1:]
    planes = np.zeros((len(NEIGHBOR_OFFSETS),) + shape, dtype=bool)
    for d, off in enumerate(NEIGHBOR_OFFSETS):
        inb = in_bounds_mask(shape, off)
        dist_sq = np.zeros(shape)
        for ch in range(3):
            dist_sq += (shift_plane(rgb[ch], off) - rgb[ch]) ** 2
        planes[d] = inb & (np.sqrt(dist_sq) <= threshold)
    return GateSet(planes)


def build_saliency_maps(image: np.ndarray, config: SaliencyConfig):
    """Full image-to-lattice parameter pipeline.

    Returns (SaliencyMaps, GateSet).  The raw weighted-deviation
    contrast is rescaled scene-wide before the Gaussian and frequency
    rules so that the most contrasted pixel defines the attention peak.
    """
    features = extract_features(image)
    raw = absolute_contrast(features)
    contrast = rescale_contrast(raw)
    relative = relative_contrast_fixed(contrast, config.sigma)
    k_plus, k_minus = coupling_maps(relative, config.k_plus_max, config.k_minus_max)
    omega = omega_map(contrast, config.delta_omega)
    gates = similarity_gates(features, config.color_gate_threshold)
    maps = SaliencyMaps(
        contrast=contrast,
        relative=relative,
        k_plus=k_plus,
        k_minus=k_minus,
        omega=omega,
        raw_contrast=raw,
    )
    return maps, gates


@dataclass(frozen=True)
class AttentionSchedule:
    """Per-step coupling maps for moving-attention (shift) runs.

    The attention level starts at the contrast ceiling and sweeps
    downward, so the scene's objects receive the focus in decreasing
    order of contrast; the level at time t is (t_end - t) / t_end.
    """

    contrast: np.ndarray
    config: SaliencyConfig
    t_end: float

    def __post_init__(self):
        if not (self.t_end > 0):
            raise ValueError("t_end must be positive")

    def relative(self, t: float) -> np.ndarray:
        return relative_contrast_moving(
            self.contrast, self.config.sigma, self.t_end - t, self.t_end
        )

    def __call__(self, t: float):
        return coupling_maps(
            self.relative(t), self.config.k_plus_max, self.config.k_minus_max
        )
