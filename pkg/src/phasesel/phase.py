"""Phase extraction and synchronization analysis of sampled trajectories.

The phase of a cell is the unwrapped four-quadrant angle of its (x, y)
pair; the amplitude is sqrt(x^2 + y^2).  Groups of cells are judged
synchronized when the standard deviation of their phases stops growing;
the label-free selector instead looks for the largest cluster of cells
whose phases move together over a trailing window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

#: Classifier defaults, frozen after the 50-oscillator chain calibration
#: pilot (k = 0.01 vs 0.05, seed 42): trailing-window slopes came out at
#: 0.0106 (unsynchronized) and 0.0020 (synchronized) rad per time unit,
#: so the threshold sits between them at slope_sync < eps < slope_unsync/5.
DEFAULT_WINDOW = 100.0
DEFAULT_SLOPE_TOL = 0.00205
DEFAULT_STD_BOUND = TWO_PI
DEFAULT_PHASE_BOUND = np.pi / 2


@dataclass(frozen=True)
class ClassifierConfig:
    window: float = DEFAULT_WINDOW
    slope_tol: float = DEFAULT_SLOPE_TOL
    std_bound: float = DEFAULT_STD_BOUND
    phase_bound: float = DEFAULT_PHASE_BOUND

    def __post_init__(self):
        if self.window <= 0 or self.slope_tol <= 0:
            raise ValueError("window and slope_tol must be positive")
        if self.std_bound <= 0 or self.phase_bound <= 0:
            raise ValueError("std_bound and phase_bound must be positive")


def unwrap_phase(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Continuous phase series from sampled (x, y), time on axis 0.

    The first sample anchors at the four-quadrant angle in (-pi, pi];
    every later sample gets the 2*pi multiple that minimizes the jump.
    Samples exactly at the origin have no angle and are rejected.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must have identical shapes")
    origin = (x == 0.0) & (y == 0.0)
    if np.any(origin):
        idx = np.argwhere(origin)[0]
        raise ValueError(f"phase undefined at origin sample (index {tuple(idx)})")
    return np.unwrap(np.arctan2(y, x), axis=0)


def wrap_phase(phi: np.ndarray) -> np.ndarray:
    """Map angles back into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(phi, dtype=np.float64), TWO_PI)


def amplitude(x, y) -> np.ndarray:
    """Oscillation amplitude sqrt(x^2 + y^2)."""
    return np.hypot(x, y)


@dataclass(frozen=True)
class PhaseTrace:
    """Unwrapped phases and amplitudes of every cell at every sample."""

    times: np.ndarray      # (S,)
    phi: np.ndarray        # (S, ...) unwrapped
    amplitude: np.ndarray  # (S, ...)

    @classmethod
    def from_trajectory(cls, times, x, y) -> "PhaseTrace":
        return cls(
            times=np.asarray(times, dtype=np.float64),
            phi=unwrap_phase(x, y),
            amplitude=amplitude(x, y),
        )

    def after(self, t0: float) -> "PhaseTrace":
        """Restrict to samples with t >= t0."""
        sel = self.times >= t0
        return PhaseTrace(self.times[sel], self.phi[sel], self.amplitude[sel])

    def cells(self) -> np.ndarray:
        """Phases flattened to (S, n_cells)."""
        return self.phi.reshape(self.phi.shape[0], -1)


@dataclass(frozen=True)
class GroupStats:
    """Per-group phase standard deviation over time."""

    times: np.ndarray
    std: dict[int, np.ndarray]           # group id -> (S,)
    skipped: tuple[int, ...] = ()        # empty groups encountered

    @property
    def groups(self) -> list[int]:
        return sorted(self.std)


@dataclass(frozen=True)
class SyncVerdict:
    synchronized: bool
    intervals: tuple[tuple[float, float], ...]
    final_slope: float


def group_phase_std(trace: PhaseTrace, labels: np.ndarray, groups=None) -> GroupStats:
    """Population standard deviation of member phases per labeled group.

    Labels are nonnegative integers over the lattice; 0 marks
    background/unlabeled cells and is not analyzed.  `groups` defaults
    to every nonzero label present; ids requested explicitly but absent
    from the map are recorded in `skipped` rather than raising.
    """
    labels = np.asarray(labels)
    phi = trace.cells()
    flat = labels.ravel()
    if flat.shape[0] != phi.shape[1]:
        raise ValueError("label map does not match trace shape")
    if groups is None:
        groups = [int(g) for g in np.unique(flat) if g != 0]
    std: dict[int, np.ndarray] = {}
    skipped = []
    for gid in groups:
        members = flat == gid
        if not members.any():
            skipped.append(int(gid))
            continue
        std[int(gid)] = phi[:, members].std(axis=1)
    return GroupStats(times=trace.times, std=std, skipped=tuple(skipped))


def rebase(trace: PhaseTrace) -> PhaseTrace:
    """Subtract each cell's first-sample phase.

    Removes the inherited spread of the random initial states so that
    statistics measure only drift accumulated after the series starts.
    """
    return PhaseTrace(trace.times, trace.phi - trace.phi[0], trace.amplitude)


def _rolling_slopes(times: np.ndarray, series: np.ndarray, window: float):
    """Least-squares slope of `series` over every trailing window.

    Returns (end_indices, slopes) for all window ends with a full
    window of data available.
    """
    n = times.shape[0]
    starts = np.searchsorted(times, times - window, side="left")
    ends = np.arange(n)
    valid = times - times[starts] >= window - 1e-9
    ends = ends[valid]
    if ends.size == 0:
        return ends, np.array([])
    # cumulative sums give O(1) per-window least-squares slopes
    t, s = times, series
    ct = np.concatenate([[0.0], np.cumsum(t)])
    cs = np.concatenate([[0.0], np.cumsum(s)])
    ctt = np.concatenate([[0.0], np.cumsum(t * t)])
    cts = np.concatenate([[0.0], np.cumsum(t * s)])
    a = starts[valid]
    m = ends - a + 1
    sum_t = ct[ends + 1] - ct[a]
    sum_s = cs[ends + 1] - cs[a]
    sum_tt = ctt[ends + 1] - ctt[a]
    sum_ts = cts[ends + 1] - cts[a]
    denom = sum_tt - sum_t * sum_t / m
    num = sum_ts - sum_t * sum_s / m
    slopes = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    return ends, slopes


def classify_sync(
    stats: GroupStats,
    window: float = DEFAULT_WINDOW,
    slope_tol: float = DEFAULT_SLOPE_TOL,
    std_bound: float = DEFAULT_STD_BOUND,
) -> dict[int, SyncVerdict]:
    """Synchronization verdict per group.

    A group counts as synchronized at a sample when the least-squares
    slope of its phase std over the trailing window stays below
    `slope_tol` and the std itself stays below `std_bound` throughout
    that window.  Contiguous synchronized samples form the reported
    intervals; the verdict flag reflects the final window.
    """
    times = stats.times
    if times.size < 2 or times[-1] - times[0] < window:
        raise ValueError("window longer than the available sample span")
    verdicts: dict[int, SyncVerdict] = {}
    for gid, s in stats.std.items():
        ends, slopes = _rolling_slopes(times, s, window)
        # running max of s over each trailing window
        starts = np.searchsorted(times, times[ends] - window, side="left")
        level_ok = np.array([
            s[a : e + 1].max() < std_bound for a, e in zip(starts, ends)
        ])
        ok = (slopes < slope_tol) & level_ok
        intervals = []
        i = 0
        while i < ok.size:
            if ok[i]:
                j = i
                while j + 1 < ok.size and ok[j + 1]:
                    j += 1
                intervals.append((float(times[ends[i]]), float(times[ends[j]])))
                i = j + 1
            else:
                i += 1
        verdicts[gid] = SyncVerdict(
            synchronized=bool(ok.size and ok[-1]),
            intervals=tuple(intervals),
            final_slope=float(slopes[-1]) if slopes.size else float("nan"),
        )
    return verdicts


def sync_intervals(verdicts: dict[int, SyncVerdict]):
    """Global attention sequence: (group, interval) ordered by start time."""
    sequence = []
    for gid, verdict in verdicts.items():
        for interval in verdict.intervals:
            sequence.append((gid, interval))
    sequence.sort(key=lambda item: (item[1][0], item[0]))
    return sequence


def salient_mask(
    trace: PhaseTrace,
    window: float = DEFAULT_WINDOW,
    phase_bound: float = DEFAULT_PHASE_BOUND,
    max_iter: int = 50,
):
    """Label-free selection: largest phase-coherent cluster of cells.

    Over the final `window` of the trace, each cell's phase is rebased
    at the window start; a cluster is a set of cells whose rebased
    phases stay within +-`phase_bound` of the cluster's running median
    throughout the window.  Candidate clusters are grown to a fixed
    point from every occupied phase-growth bin and the largest wins.

    Returns (mask, found): a boolean mask shaped like the lattice and a
    flag that is False when no cluster of at least 2 cells exists.
    """
    times = trace.times
    if times[-1] - times[0] < window:
        raise ValueError("trace shorter than the analysis window")
    shape = trace.phi.shape[1:]
    sel = times >= times[-1] - window - 1e-9
    pw = trace.cells()[sel]
    pw = pw - pw[0]  # common motion only: offsets relative to window start
    n_cells = pw.shape[1]

    growth = pw[-1]
    lo, hi = growth.min(), growth.max()
    span = max(hi - lo, 1e-9)
    n_bins = max(int(np.ceil(span / max(phase_bound, 1e-9))), 1)
    counts, edges = np.histogram(growth, bins=n_bins, range=(lo, lo + span))
    seed_order = np.argsort(counts, kind="stable")[::-1]

    best = np.zeros(n_cells, dtype=bool)
    for b in seed_order:
        if counts[b] == 0:
            continue
        cluster = (growth >= edges[b]) & (growth <= edges[b + 1])
        for _ in range(max_iter):
            ref = np.median(pw[:, cluster], axis=1)
            member = np.max(np.abs(pw - ref[:, None]), axis=0) <= phase_bound
            if not member.any():
                cluster = member
                break
            if np.array_equal(member, cluster):
                break
            cluster = member
        if cluster.sum() > best.sum():
            best = cluster
    found = bool(best.sum() >= 2)
    if not found:
        best = np.zeros(n_cells, dtype=bool)
    return best.reshape(shape), found
