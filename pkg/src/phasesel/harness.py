"""Experiment orchestration: chain, select, and shift runs with file outputs.

Every run writes its outputs plus a JSON manifest holding the fully
resolved configuration, the calibrated classifier thresholds, per-group
verdicts, and a hashed inventory of produced files; re-running from the
embedded configuration reproduces the CSV outputs byte for byte.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    ChainConfig,
    DivergenceError,
    IntegrationConfig,
    LatticeField,
    LatticeParams,
    draw_initial_states,
    integrate_chain,
    integrate_lattice,
)
from .io import (
    CSV_LAYOUT_VERSION,
    ImageIOError,
    file_sha256,
    load_image,
    load_labels,
    read_series_csv,
    write_cells_csv,
    write_grid_csv,
    write_image_png,
    write_labels_png,
    write_manifest,
    write_mask_png,
    write_portrait_csv,
    write_series_csv,
    write_std_csv,
)
from .phase import (
    ClassifierConfig,
    GroupStats,
    PhaseTrace,
    classify_sync,
    group_phase_std,
    rebase,
    salient_mask,
    sync_intervals,
)
from .saliency import AttentionSchedule, SaliencyConfig, build_saliency_maps
from .scenes import TARGET_LABEL, generate_scene, preset_names, scene_preset


class UsageError(ValueError):
    """Invalid configuration or command usage."""


_MODES = ("chain", "select", "shift")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    out_dir: str
    image: str | None = None
    labels: str | None = None
    preset: str | None = None
    saliency: SaliencyConfig = field(default_factory=SaliencyConfig)
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    chain_n: int = 50
    chain_ks: tuple[float, ...] = (0.01, 0.03, 0.05)
    omega_low: float = 0.98
    omega_high: float = 1.02
    samples_per_group: int = 20

    def __post_init__(self):
        if self.mode not in _MODES:
            raise UsageError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if not self.out_dir:
            raise UsageError("an output directory is required")
        if self.mode in ("select", "shift"):
            if self.image is None and self.preset is None:
                raise UsageError(f"{self.mode} mode needs --image or --preset")
            if self.preset is not None and self.preset not in preset_names():
                raise UsageError(
                    f"unknown preset {self.preset!r}; available: {', '.join(preset_names())}"
                )
            if self.image is not None and not Path(self.image).exists():
                raise UsageError(f"image file not found: {self.image}")
            if self.labels is not None and not Path(self.labels).exists():
                raise UsageError(f"label file not found: {self.labels}")
        if self.mode == "chain":
            if self.chain_n < 2:
                raise UsageError("chain needs at least 2 oscillators")
            if not self.chain_ks:
                raise UsageError("chain mode needs at least one coupling strength")
        if not (0.9 <= self.omega_low <= self.omega_high <= 1.1):
            raise UsageError("omega range must satisfy 0.9 <= low <= high <= 1.1")
        if self.samples_per_group < 1:
            raise UsageError("samples_per_group must be positive")

    # -- flat key/value form (config files, manifests) --------------------

    def to_flat(self) -> dict:
        flat = {
            "mode": self.mode,
            "out": self.out_dir,
            "image": self.image,
            "labels": self.labels,
            "preset": self.preset,
            "sigma": self.saliency.sigma,
            "delta_omega": self.saliency.delta_omega,
            "k_plus_max": self.saliency.k_plus_max,
            "k_minus_max": self.saliency.k_minus_max,
            "color_gate_threshold": self.saliency.color_gate_threshold,
            "dt": self.integration.dt,
            "t_end": self.integration.t_end,
            "sample_stride": self.integration.sample_stride,
            "seed": self.integration.seed,
            "burn_in": self.integration.burn_in,
            "window": self.classifier.window,
            "eps_slope": self.classifier.slope_tol,
            "s_max": self.classifier.std_bound,
            "phase_bound": self.classifier.phase_bound,
            "chain_n": self.chain_n,
            "chain_ks": list(self.chain_ks),
            "omega_low": self.omega_low,
            "omega_high": self.omega_high,
            "samples_per_group": self.samples_per_group,
        }
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "ExperimentConfig":
        known = {
            "mode", "out", "image", "labels", "preset", "sigma", "delta_omega",
            "k_plus_max", "k_minus_max", "color_gate_threshold", "dt", "t_end",
            "sample_stride", "seed", "burn_in", "window", "eps_slope", "s_max",
            "phase_bound", "chain_n", "chain_ks", "omega_low", "omega_high",
            "samples_per_group",
        }
        unknown = set(flat) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sal = SaliencyConfig(
            sigma=float(flat.get("sigma", SaliencyConfig.sigma)),
            delta_omega=float(flat.get("delta_omega", SaliencyConfig.delta_omega)),
            k_plus_max=float(flat.get("k_plus_max", SaliencyConfig.k_plus_max)),
            k_minus_max=float(flat.get("k_minus_max", SaliencyConfig.k_minus_max)),
            color_gate_threshold=float(
                flat.get("color_gate_threshold", SaliencyConfig.color_gate_threshold)
            ),
        )
        integ = IntegrationConfig(
            dt=float(flat.get("dt", IntegrationConfig.dt)),
            t_end=float(flat.get("t_end", IntegrationConfig.t_end)),
            sample_stride=int(flat.get("sample_stride", IntegrationConfig.sample_stride)),
            seed=int(flat.get("seed", IntegrationConfig.seed)),
            burn_in=float(flat.get("burn_in", IntegrationConfig.burn_in)),
        )
        clf = ClassifierConfig(
            window=float(flat.get("window", ClassifierConfig.window)),
            slope_tol=float(flat.get("eps_slope", ClassifierConfig.slope_tol)),
            std_bound=float(flat.get("s_max", ClassifierConfig.std_bound)),
            phase_bound=float(flat.get("phase_bound", ClassifierConfig.phase_bound)),
        )
        return cls(
            mode=flat.get("mode", "select"),
            out_dir=flat.get("out", "out"),
            image=flat.get("image"),
            labels=flat.get("labels"),
            preset=flat.get("preset"),
            saliency=sal,
            integration=integ,
            classifier=clf,
            chain_n=int(flat.get("chain_n", 50)),
            chain_ks=tuple(flat.get("chain_ks", (0.01, 0.03, 0.05))),
            omega_low=float(flat.get("omega_low", 0.98)),
            omega_high=float(flat.get("omega_high", 1.02)),
            samples_per_group=int(flat.get("samples_per_group", 20)),
        )


def _verdict_dict(verdict) -> dict:
    return {
        "synchronized": verdict.synchronized,
        "final_slope": verdict.final_slope,
        "intervals": [list(iv) for iv in verdict.intervals],
    }


def _inventory(out: Path, names) -> dict:
    inv = {}
    for name in sorted(names):
        p = out / name
        inv[name] = {"bytes": p.stat().st_size, "sha256": file_sha256(p)}
    return inv


def _base_manifest(config: ExperimentConfig) -> dict:
    return {
        "software_version": __version__,
        "csv_layout_version": CSV_LAYOUT_VERSION,
        "config": config.to_flat(),
        "thresholds": {
            "window": config.classifier.window,
            "eps_slope": config.classifier.slope_tol,
            "s_max": config.classifier.std_bound,
            "phase_bound": config.classifier.phase_bound,
        },
    }


def run_chain(config: ExperimentConfig) -> dict:
    """Chain transition runs: one integration per requested coupling k.

    Writes an s(t) CSV per k plus a combined CSV (column s_g<i> is the
    i-th k, ascending) and the manifest.  A diverging k is reported in
    the manifest without aborting the other runs.
    """
    t_start = time.monotonic()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    integ = config.integration
    rng = np.random.default_rng(integ.seed)
    omegas = rng.uniform(config.omega_low, config.omega_high, config.chain_n)
    initial = draw_initial_states(rng, config.chain_n)

    ks = sorted(config.chain_ks)
    files: list[str] = []
    results: dict = {}
    combined: dict[int, np.ndarray] = {}
    combined_times = None
    labels = np.ones(config.chain_n, dtype=np.int64)
    for idx, k in enumerate(ks, start=1):
        entry: dict = {"k": k}
        try:
            traj = integrate_chain(
                ChainConfig(config.chain_n, k, omegas), integ, initial
            )
        except DivergenceError as err:
            entry.update(diverged=True, diverged_at=err.time)
            results[f"k={k:g}"] = entry
            continue
        trace = rebase(
            PhaseTrace.from_trajectory(traj.times, traj.x, traj.y).after(integ.burn_in)
        )
        stats = group_phase_std(trace, labels)
        verdict = classify_sync(
            stats,
            window=config.classifier.window,
            slope_tol=config.classifier.slope_tol,
            std_bound=config.classifier.std_bound,
        )[1]
        s = stats.std[1]
        name = f"chain_std_k{k:g}.csv"
        write_std_csv(out / name, stats.times, {1: s})
        files.append(name)
        i100 = int(np.searchsorted(stats.times, 100.0))
        entry.update(
            diverged=False,
            verdict=_verdict_dict(verdict),
            s_at_100=float(s[i100]) if i100 < s.size else None,
            s_end=float(s[-1]),
            csv=name,
        )
        results[f"k={k:g}"] = entry
        combined[idx] = s
        combined_times = stats.times
    if combined:
        name = "chain_std_all.csv"
        write_std_csv(out / name, combined_times, combined)
        files.append(name)

    manifest = _base_manifest(config)
    manifest.update(
        mode="chain",
        omegas=[float(w) for w in omegas],
        runs=results,
        combined_columns={f"s_g{i}": k for i, k in enumerate(ks, start=1)},
        files=_inventory(out, files),
        duration_seconds=time.monotonic() - t_start,
    )
    write_manifest(out / "manifest.json", manifest)
    return manifest


def _resolve_scene(config: ExperimentConfig):
    """Scene pixels and labels from a preset or from image/label files."""
    if config.preset is not None:
        spec = scene_preset(config.preset)
        image, labels = generate_scene(spec)
        target = TARGET_LABEL if spec.kind == "object-grid" else None
        return image, labels, target
    image = load_image(config.image)
    labels = None
    if config.labels is not None:
        labels = load_labels(config.labels)
        if labels.shape != image.shape[:2]:
            raise ImageIOError(
                f"label shape {labels.shape} does not match image {image.shape[:2]}"
            )
    return image, labels, None


def _sample_cells(rng, labels: np.ndarray, per_group: int):
    """Deterministic per-group cell sample (paper-style raster rows)."""
    cells = []
    for gid in np.unique(labels):
        if gid == 0:
            continue
        members = np.argwhere(labels == gid)
        take = min(per_group, members.shape[0])
        chosen = members[rng.choice(members.shape[0], size=take, replace=False)]
        cells.extend((int(i), int(j)) for i, j in chosen)
    return cells


def _assert_preset_fidelity(raw_contrast, labels, target):
    tgt = labels == target
    if not tgt.any():
        raise RuntimeError("preset has no target pixels")
    if raw_contrast[tgt].max() <= raw_contrast[~tgt].max():
        raise RuntimeError(
            "preset fidelity violated: target does not hold the maximal contrast"
        )


def _run_lattice(config: ExperimentConfig, moving: bool) -> dict:
    t_start = time.monotonic()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    integ = config.integration
    clf = config.classifier

    image, labels, target = _resolve_scene(config)
    maps, gates = build_saliency_maps(image, config.saliency)
    if target is not None:
        _assert_preset_fidelity(maps.raw_contrast, labels, target)

    files: list[str] = []
    manifest = _base_manifest(config)
    manifest["mode"] = "shift" if moving else "select"
    if config.preset is not None:
        write_image_png(out / "scene.png", image)
        files.append("scene.png")
        if labels is not None:
            write_labels_png(out / "scene_labels.png", labels)
            files.append("scene_labels.png")

    if float(maps.raw_contrast.max()) <= 0.0:
        # perfectly uniform image: nothing can be selected
        write_mask_png(out / "salient_mask.png", np.zeros(maps.shape, dtype=bool))
        files.append("salient_mask.png")
        manifest.update(
            no_salient_object=True,
            files=_inventory(out, files),
            duration_seconds=time.monotonic() - t_start,
        )
        write_manifest(out / "manifest.json", manifest)
        return manifest

    rng = np.random.default_rng(integ.seed)
    field = LatticeField(draw_initial_states(rng, maps.shape))
    params = LatticeParams(
        omega=maps.omega, k_plus=maps.k_plus, k_minus=maps.k_minus, gates=gates
    )
    schedule = (
        AttentionSchedule(maps.contrast, config.saliency, integ.t_end)
        if moving
        else None
    )
    traj = integrate_lattice(field, params, integ, coupling_schedule=schedule)

    trace = PhaseTrace.from_trajectory(traj.times, traj.x, traj.y).after(integ.burn_in)
    rtrace = rebase(trace)

    verdicts = {}
    attention = []
    if labels is not None:
        stats = group_phase_std(rtrace, labels)
        raw_verdicts = classify_sync(
            stats, window=clf.window, slope_tol=clf.slope_tol, std_bound=clf.std_bound
        )
        verdicts = {gid: _verdict_dict(v) for gid, v in raw_verdicts.items()}
        attention = [
            {"group": gid, "start": iv[0], "stop": iv[1]}
            for gid, iv in sync_intervals(raw_verdicts)
        ]
        write_std_csv(out / "group_phase_std.csv", stats.times, stats.std)
        files.append("group_phase_std.csv")

        sample_cells = _sample_cells(rng, labels, config.samples_per_group)
        tsel = trace.times
        xsel = traj.x[traj.times >= integ.burn_in]
        write_cells_csv(out / "raster_x.csv", tsel, xsel, sample_cells, "x")
        files.append("raster_x.csv")
        write_cells_csv(out / "phase_growth.csv", tsel, trace.phi, sample_cells, "phi")
        files.append("phase_growth.csv")

    mask, found = salient_mask(
        trace, window=clf.window, phase_bound=clf.phase_bound
    )
    write_mask_png(out / "salient_mask.png", mask)
    files.append("salient_mask.png")

    # phase portraits: one salient cell, one background cell
    if target is not None and labels is not None:
        sal_cells = np.argwhere(labels == target)
    elif found:
        sal_cells = np.argwhere(mask)
    elif labels is not None:
        sal_cells = np.argwhere(labels > 0)
    else:
        sal_cells = np.argwhere(np.ones(maps.shape, dtype=bool))
    sal_cell = tuple(sal_cells[sal_cells.shape[0] // 2])
    bg_candidates = np.argwhere((labels == 0) if labels is not None else ~mask)
    if bg_candidates.size == 0:
        bg_candidates = np.argwhere(~mask) if (~mask).any() else sal_cells
    bg_cell = tuple(bg_candidates[bg_candidates.shape[0] // 2])
    post = traj.times >= integ.burn_in
    for name, (ci, cj) in (
        ("portrait_salient.csv", sal_cell),
        ("portrait_background.csv", bg_cell),
    ):
        write_portrait_csv(
            out / name, trace.times, traj.x[post, ci, cj], traj.y[post, ci, cj]
        )
        files.append(name)

    write_grid_csv(out / "contrast_map.csv", maps.contrast)
    files.append("contrast_map.csv")

    iou = None
    if target is not None and labels is not None:
        tgt = labels == target
        union = (mask | tgt).sum()
        iou = float((mask & tgt).sum() / union) if union else 0.0

    manifest.update(
        no_salient_object=not found,
        mask_pixels=int(mask.sum()),
        salient_cell=[int(sal_cell[0]), int(sal_cell[1])],
        background_cell=[int(bg_cell[0]), int(bg_cell[1])],
        verdicts={str(g): v for g, v in verdicts.items()},
        attention_sequence=attention,
        target_label=target,
        iou_target=iou,
        files=_inventory(out, files),
        duration_seconds=time.monotonic() - t_start,
    )
    write_manifest(out / "manifest.json", manifest)
    return manifest


def run_select(config: ExperimentConfig) -> dict:
    """Fixed-attention selection run (features -> maps -> lattice -> mask)."""
    return _run_lattice(config, moving=False)


def run_shift(config: ExperimentConfig) -> dict:
    """Moving-attention run; also reports the attention sequence."""
    if config.integration.t_end <= config.integration.burn_in:
        raise UsageError("t_end must exceed burn_in for shift runs")
    return _run_lattice(config, moving=True)


def analyze_run(out_dir, overrides: dict | None = None) -> dict:
    """Re-classify a finished run from its stored phase-std CSV.

    Reads manifest.json and group_phase_std.csv from `out_dir`, applies
    optionally overridden classifier thresholds, and writes
    analysis.json next to them.
    """
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise UsageError(f"no manifest.json in {out}")
    from .io import read_manifest

    manifest = read_manifest(manifest_path)
    std_path = out / "group_phase_std.csv"
    if not std_path.exists():
        raise UsageError(f"no group_phase_std.csv in {out}; nothing to analyze")
    names, times, columns = read_series_csv(std_path)
    std = {}
    for name in names:
        if not name.startswith("s_g"):
            raise UsageError(f"unexpected column {name!r} in {std_path}")
        std[int(name[3:])] = columns[name]
    stats = GroupStats(times=times, std=std)
    thr = dict(manifest.get("thresholds", {}))
    thr.update(overrides or {})
    verdicts = classify_sync(
        stats,
        window=float(thr.get("window", ClassifierConfig.window)),
        slope_tol=float(thr.get("eps_slope", ClassifierConfig.slope_tol)),
        std_bound=float(thr.get("s_max", ClassifierConfig.std_bound)),
    )
    analysis = {
        "thresholds": thr,
        "verdicts": {str(g): _verdict_dict(v) for g, v in verdicts.items()},
        "attention_sequence": [
            {"group": gid, "start": iv[0], "stop": iv[1]}
            for gid, iv in sync_intervals(verdicts)
        ],
    }
    write_manifest(out / "analysis.json", analysis)
    return analysis


def run_experiment(config: ExperimentConfig) -> dict:
    if config.mode == "chain":
        return run_chain(config)
    if config.mode == "select":
        return run_select(config)
    return run_shift(config)
