"""Scikit-learn style front end for the selection pipeline.

`SalientObjectSelector` wraps the image -> saliency maps -> lattice ->
phase analysis pipeline behind the familiar estimator API so it can sit
inside ordinary sklearn tooling (`get_params`/`set_params`/`clone`).
`fit` runs the simulation on one image; `predict` returns the boolean
salient-object mask.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .dynamics import (
    IntegrationConfig,
    LatticeField,
    LatticeParams,
    draw_initial_states,
    integrate_lattice,
)
from .phase import (
    PhaseTrace,
    classify_sync,
    group_phase_std,
    rebase,
    salient_mask,
)
from .saliency import AttentionSchedule, SaliencyConfig, build_saliency_maps


def check_image(X) -> np.ndarray:
    """Validate an RGB image array: (N, M, 3), uint8/uint16 or float in [0, 1]."""
    X = np.asarray(X)
    if X.ndim != 3 or X.shape[2] != 3:
        raise ValueError(f"expected an (N, M, 3) RGB image, got shape {X.shape}")
    if X.size == 0:
        raise ValueError("empty image")
    if not (np.issubdtype(X.dtype, np.integer) or np.issubdtype(X.dtype, np.floating)):
        raise ValueError(f"unsupported image dtype {X.dtype}")
    return X


class SalientObjectSelector(BaseEstimator):
    """Select the salient object of an image by phase synchronization.

    Parameters mirror the experiment configuration: the contrast
    Gaussian width `sigma`, frequency spread `delta_omega`, coupling
    ceilings, the color gate threshold, integration controls, and the
    synchronization classifier thresholds.  With `shift=True` the
    attention level sweeps downward across contrast levels instead of
    holding the top object.

    After `fit(X)` the instance exposes `mask_`, `found_`,
    `saliency_maps_`, `trace_` and (when labels are passed to `fit`)
    `verdicts_`.
    """

    def __init__(
        self,
        sigma=0.4,
        delta_omega=0.2,
        k_plus_max=0.05,
        k_minus_max=0.02,
        color_gate_threshold=0.1,
        dt=0.01,
        t_end=500.0,
        sample_stride=50,
        burn_in=50.0,
        seed=42,
        window=100.0,
        eps_slope=0.00205,
        s_max=2.0 * np.pi,
        phase_bound=np.pi / 4,
        shift=False,
    ):
        self.sigma = sigma
        self.delta_omega = delta_omega
        self.k_plus_max = k_plus_max
        self.k_minus_max = k_minus_max
        self.color_gate_threshold = color_gate_threshold
        self.dt = dt
        self.t_end = t_end
        self.sample_stride = sample_stride
        self.burn_in = burn_in
        self.seed = seed
        self.window = window
        self.eps_slope = eps_slope
        self.s_max = s_max
        self.phase_bound = phase_bound
        self.shift = shift

    def _configs(self):
        sal = SaliencyConfig(
            sigma=self.sigma,
            delta_omega=self.delta_omega,
            k_plus_max=self.k_plus_max,
            k_minus_max=self.k_minus_max,
            color_gate_threshold=self.color_gate_threshold,
        )
        integ = IntegrationConfig(
            dt=self.dt,
            t_end=self.t_end,
            sample_stride=self.sample_stride,
            seed=self.seed,
            burn_in=self.burn_in,
        )
        return sal, integ

    def fit(self, X, y=None):
        """Run the full pipeline on one RGB image.

        `y` may be an integer label map of the same height/width; when
        given, per-group synchronization verdicts are stored as
        `verdicts_`.
        """
        X = check_image(X)
        sal_cfg, integ = self._configs()
        maps, gates = build_saliency_maps(X, sal_cfg)
        self.saliency_maps_ = maps
        self.gates_ = gates
        if float(maps.raw_contrast.max()) <= 0.0:
            self.mask_ = np.zeros(maps.shape, dtype=bool)
            self.found_ = False
            self.trace_ = None
            self.verdicts_ = {}
            return self

        field = LatticeField(
            draw_initial_states(np.random.default_rng(integ.seed), maps.shape)
        )
        params = LatticeParams(
            omega=maps.omega, k_plus=maps.k_plus, k_minus=maps.k_minus, gates=gates
        )
        schedule = (
            AttentionSchedule(maps.contrast, sal_cfg, integ.t_end)
            if self.shift
            else None
        )
        traj = integrate_lattice(field, params, integ, coupling_schedule=schedule)
        trace = PhaseTrace.from_trajectory(traj.times, traj.x, traj.y).after(
            integ.burn_in
        )
        self.trace_ = trace
        self.mask_, self.found_ = salient_mask(
            trace, window=self.window, phase_bound=self.phase_bound
        )
        self.verdicts_ = {}
        if y is not None:
            labels = np.asarray(y)
            if labels.shape != maps.shape:
                raise ValueError(
                    f"label shape {labels.shape} does not match image {maps.shape}"
                )
            stats = group_phase_std(rebase(trace), labels)
            self.verdicts_ = classify_sync(
                stats,
                window=self.window,
                slope_tol=self.eps_slope,
                std_bound=self.s_max,
            )
        return self

    def predict(self, X):
        """Salient-object mask for `X` (runs the simulation)."""
        return self.fit(X).mask_

    def fit_predict(self, X, y=None):
        return self.fit(X, y).mask_
