"""Comparison baseline: the same windowed GP machinery on raw coordinates.

This model shares the window structure and kernel of the canonicalized
pipeline but regresses directly on absolute planar positions and their
increments, with no polar features, no normalization, and no scale or
rotation handling.  Its purpose is to exhibit the off-distribution failure
(predictions collapsing toward zero increments once the prompt leaves the
demonstrated coordinate range) that geometric canonicalization removes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .geometry import Trajectory
from .gp import GPRegressor
from .predictor import (Rollout, STOP_MAX_HORIZON, STOP_NUMERIC_FAILURE)

RECORD_DIM = 4  # x, y, dx, dy


def _records(p: np.ndarray) -> np.ndarray:
    """Per-sample records [x, y, dx, dy]; the first increment is zero."""
    recs = np.zeros((p.shape[0], RECORD_DIM))
    recs[:, :2] = p
    recs[1:, 2:] = p[1:] - p[:-1]
    return recs


def _window_rows(recs: np.ndarray, window: int) -> np.ndarray:
    n = recs.shape[0]
    rows = np.empty((n - window, window * RECORD_DIM))
    for i in range(n - window):
        rows[i] = recs[i:i + window].reshape(-1)
    return rows


class CartesianGPBaseline(BaseEstimator):
    """Windowed GP over raw coordinates, one head per axis increment."""

    def __init__(self, window=10, signal_variance=1.0, length_scale=1.0,
                 noise_variance=0.01):
        self.window = window
        self.signal_variance = signal_variance
        self.length_scale = length_scale
        self.noise_variance = noise_variance

    def fit(self, demo: Trajectory):
        p = demo.p
        if p.shape[0] < self.window + 2:
            raise ValueError(
                f"trace too short for window: need >= {self.window + 2} "
                f"samples, got {p.shape[0]}"
            )
        recs = _records(p)
        inputs = _window_rows(recs, self.window)
        targets = recs[self.window:, 2:]
        self.gp_x_ = GPRegressor(self.signal_variance, self.length_scale,
                                 self.noise_variance).fit(inputs, targets[:, 0])
        self.gp_y_ = GPRegressor(self.signal_variance, self.length_scale,
                                 self.noise_variance).fit(inputs, targets[:, 1])
        return self

    def _check_fitted(self):
        if not hasattr(self, "gp_x_"):
            raise NotFittedError("CartesianGPBaseline must be fitted first")

    def predict_step(self, window_rows: np.ndarray, return_std=False):
        """Predicted (dx, dy) for stacked window rows."""
        self._check_fitted()
        mx = self.gp_x_.predict(window_rows, return_std=return_std)
        my = self.gp_y_.predict(window_rows, return_std=return_std)
        if return_std:
            return (np.column_stack([mx[0], my[0]]),
                    np.column_stack([mx[1], my[1]]))
        return np.column_stack([mx, my])

    def teacher_forced(self, prompt: Trajectory, return_std: bool = False):
        """One-step predictions along a prompt, anchored at true samples.

        Returns positions aligned with ``prompt.p[window:]`` (plus per-step
        uncertainty norms when ``return_std`` is set).
        """
        self._check_fitted()
        if len(prompt) < self.window + 1:
            raise ValueError(
                f"prompt too short: need at least {self.window + 1} samples"
            )
        recs = _records(prompt.p)
        rows = _window_rows(recs, self.window)
        if return_std:
            steps, stds = self.predict_step(rows, return_std=True)
            preds = prompt.p[self.window - 1:-1] + steps
            return preds, np.linalg.norm(stds, axis=1)
        steps = self.predict_step(rows)
        return prompt.p[self.window - 1:-1] + steps

    def rollout(self, prompt: Trajectory, horizon: int) -> Rollout:
        """Recursive fixed-horizon continuation of a prompt (no stop trigger)."""
        self._check_fitted()
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        k = len(prompt) - 1
        if k + 1 < self.window:
            raise ValueError(
                f"prompt too short: need at least {self.window} samples"
            )
        recs = _records(prompt.p)
        window_rows = [recs[i] for i in range(k + 1 - self.window, k + 1)]
        pos = prompt.p[k].copy()
        positions, sigmas = [], []
        stop_reason = STOP_MAX_HORIZON
        h = k
        for _ in range(horizon):
            x_star = np.concatenate(window_rows)[None, :]
            mean, std = self.predict_step(x_star, return_std=True)
            step = mean[0]
            if not (np.all(np.isfinite(step)) and np.all(np.isfinite(std))):
                stop_reason = STOP_NUMERIC_FAILURE
                break
            pos = pos + step
            h += 1
            positions.append(pos.copy())
            sigmas.append(float(np.linalg.norm(std[0])))
            window_rows.pop(0)
            window_rows.append(np.concatenate([pos, step]))
        pos_arr = (np.array(positions) if positions else np.zeros((0, 2)))
        return Rollout(positions=pos_arr, uncertainties=np.array(sigmas),
                       stop_reason=stop_reason, l=h)
