"""File formats: images, label maps, CSV time series, run manifests.

CSV layouts are versioned and shared between the harness, the tests
and the external figure renderer: column 1 is always `t`; remaining
columns are one per group (`s_g<k>`), one per sampled oscillator
(`x_r<i>_c<j>` / `phi_r<i>_c<j>`), or `x,y` for phase portraits.
Floats are written with shortest round-trip formatting so that equal
runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

CSV_LAYOUT_VERSION = 1

#: Image formats accepted for scene input / label maps.
_IMAGE_FORMATS = {"PNG", "PPM"}


class ImageIOError(RuntimeError):
    """Unreadable, corrupt, or unsupported image input."""


def load_image(path) -> np.ndarray:
    """Decode an RGB image (PNG or binary PPM) to a uint8 (N, M, 3) array."""
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"image file not found: {path}")
    try:
        with Image.open(path) as img:
            if img.format not in _IMAGE_FORMATS:
                raise ImageIOError(
                    f"unsupported image format {img.format!r} for {path}"
                )
            arr = np.asarray(img.convert("RGB"))
    except UnidentifiedImageError as err:
        raise ImageIOError(f"cannot decode {path}: {err}") from err
    except OSError as err:
        raise ImageIOError(f"corrupt image file {path}: {err}") from err
    if arr.size == 0:
        raise ImageIOError(f"empty image: {path}")
    return arr


def load_labels(path) -> np.ndarray:
    """Decode an 8-bit grayscale label map (PNG or PGM); value = group id."""
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"label file not found: {path}")
    try:
        with Image.open(path) as img:
            if img.format not in {"PNG", "PPM"}:
                raise ImageIOError(
                    f"unsupported label format {img.format!r} for {path}"
                )
            if img.mode not in {"L", "P", "I", "I;16"}:
                raise ImageIOError(
                    f"label map must be grayscale, got mode {img.mode!r}"
                )
            arr = np.asarray(img.convert("L"))
    except UnidentifiedImageError as err:
        raise ImageIOError(f"cannot decode {path}: {err}") from err
    except OSError as err:
        raise ImageIOError(f"corrupt label file {path}: {err}") from err
    return arr.astype(np.int64)


def write_image_png(path, image: np.ndarray) -> None:
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path, format="PNG")


def write_labels_png(path, labels: np.ndarray) -> None:
    arr = np.asarray(labels)
    if arr.min() < 0 or arr.max() > 255:
        raise ValueError("label ids must fit in 8 bits")
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path, format="PNG")


def write_mask_png(path, mask: np.ndarray) -> None:
    """Boolean mask as a black/white PNG (selected pixels white)."""
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(
        path, format="PNG"
    )


def _fmt(value: float) -> str:
    return repr(float(value))


def write_series_csv(path, times: np.ndarray, columns: dict[str, np.ndarray]) -> None:
    """Time-series CSV: header `t,<names...>`, one row per sample."""
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=np.float64) for name in names]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(["t"] + names) + "\n")
        for i, t in enumerate(times):
            row = [_fmt(t)] + [_fmt(a[i]) for a in arrays]
            fh.write(",".join(row) + "\n")


def write_std_csv(path, times, std_by_group: dict[int, np.ndarray]) -> None:
    columns = {f"s_g{gid}": std_by_group[gid] for gid in sorted(std_by_group)}
    write_series_csv(path, times, columns)


def oscillator_column(kind: str, row: int, col: int) -> str:
    return f"{kind}_r{row}_c{col}"


def write_cells_csv(path, times, values: np.ndarray, cells, kind: str) -> None:
    """Per-cell series CSV; `values` is (S, N, M), `cells` a list of (i, j)."""
    columns = {
        oscillator_column(kind, i, j): values[:, i, j] for i, j in cells
    }
    write_series_csv(path, times, columns)


def write_portrait_csv(path, times, x: np.ndarray, y: np.ndarray) -> None:
    write_series_csv(path, times, {"x": x, "y": y})


def read_series_csv(path):
    """Read a layout-version-1 CSV back into (names, times, columns)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("t"):
            raise ValueError(f"not a time-series CSV: {path}")
        names = header.split(",")[1:]
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise ValueError(f"CSV has no data rows: {path}")
    return names, data[:, 0], {n: data[:, k + 1] for k, n in enumerate(names)}


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_grid_csv(path, grid: np.ndarray) -> None:
    """Plain 2-D map dump: one CSV row per lattice row, no header."""
    grid = np.asarray(grid, dtype=np.float64)
    with open(path, "w", newline="\n") as fh:
        for row in grid:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
