"""8-neighborhood bookkeeping for the oscillator lattice.

A lattice cell (i, j) talks to up to eight neighbors under free-end
boundaries: border cells simply have fewer neighbors, there is no
wraparound.  Connection gates are stored per direction as boolean
planes so that both the per-cell coupling rule and the vectorized
integrator can share one representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

# Fixed direction order: (di, dj) offsets of the 8-neighborhood.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)

_OPPOSITE = {d: NEIGHBOR_OFFSETS.index((-di, -dj))
             for d, (di, dj) in enumerate(NEIGHBOR_OFFSETS)}


def in_bounds_mask(shape: tuple[int, int], offset: tuple[int, int]) -> np.ndarray:
    """Boolean plane: True where the neighbor at `offset` exists."""
    n, m = shape
    di, dj = offset
    mask = np.zeros((n, m), dtype=bool)
    rows = slice(max(0, -di), min(n, n - di))
    cols = slice(max(0, -dj), min(m, m - dj))
    mask[rows, cols] = True
    return mask


def neighbor_counts(shape: tuple[int, int]) -> np.ndarray:
    """Number of in-bounds 8-neighbors per cell (3 at corners, 8 inside)."""
    counts = np.zeros(shape, dtype=np.int64)
    for off in NEIGHBOR_OFFSETS:
        counts += in_bounds_mask(shape, off)
    return counts


@dataclass(frozen=True)
class GateSet:
    """Symmetric on/off gates for every ordered 8-neighbor pair.

    `planes[d, i, j]` is True when cell (i, j) is connected to its
    neighbor in direction ``NEIGHBOR_OFFSETS[d]``.  Off-grid directions
    are always False.
    """

    planes: np.ndarray  # (8, N, M) bool

    def __post_init__(self):
        p = self.planes
        if p.ndim != 3 or p.shape[0] != len(NEIGHBOR_OFFSETS):
            raise ValueError("gate planes must have shape (8, N, M)")
        if p.dtype != np.bool_:
            object.__setattr__(self, "planes", p.astype(bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.planes.shape[1:]

    @classmethod
    def all_on(cls, shape: tuple[int, int]) -> "GateSet":
        planes = np.stack([in_bounds_mask(shape, off) for off in NEIGHBOR_OFFSETS])
        return cls(planes)

    @classmethod
    def all_off(cls, shape: tuple[int, int]) -> "GateSet":
        return cls(np.zeros((len(NEIGHBOR_OFFSETS),) + tuple(shape), dtype=bool))

    def is_symmetric(self) -> bool:
        """gamma(i,j;p,q) == gamma(p,q;i,j) for every in-bounds pair."""
        for d, off in enumerate(NEIGHBOR_OFFSETS):
            fwd = self.planes[d]
            back = shift_plane(self.planes[_OPPOSITE[d]], off)
            if not np.array_equal(fwd & in_bounds_mask(self.shape, off), back):
                return False
        return True

    def count(self) -> int:
        """Number of ordered connected pairs."""
        return int(self.planes.sum())

    def to_adjacency(self) -> sparse.csr_matrix:
        """Sparse 0/1 adjacency over row-major flattened cells."""
        n, m = self.shape
        rows, cols = [], []
        for d, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
            src_i, src_j = np.nonzero(self.planes[d])
            rows.append(src_i * m + src_j)
            cols.append((src_i + di) * m + (src_j + dj))
        rows = np.concatenate(rows) if rows else np.array([], dtype=np.int64)
        cols = np.concatenate(cols) if cols else np.array([], dtype=np.int64)
        data = np.ones(rows.shape[0], dtype=np.float64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(n * m, n * m))


def shift_plane(plane: np.ndarray, offset: tuple[int, int]) -> np.ndarray:
    """Value of `plane` at the neighbor in direction `offset`, zero off-grid."""
    n, m = plane.shape
    di, dj = offset
    out = np.zeros_like(plane)
    dst_rows = slice(max(0, -di), min(n, n - di))
    dst_cols = slice(max(0, -dj), min(m, m - dj))
    src_rows = slice(max(0, di), min(n, n + di))
    src_cols = slice(max(0, dj), min(m, m + dj))
    out[dst_rows, dst_cols] = plane[src_rows, src_cols]
    return out


def full_adjacency(shape: tuple[int, int]) -> sparse.csr_matrix:
    """Adjacency of the complete in-bounds 8-neighborhood."""
    return GateSet.all_on(shape).to_adjacency()
