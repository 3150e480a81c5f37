"""Prompt canonicalization and autoregressive trajectory completion.

A partial prompt is aligned to a learned demonstration by estimating a scale
ratio from radius checkpoints and a rotation offset from bearing differences.
Prediction then runs entirely in the demonstration's normalized feature
frame; Cartesian steps are mapped back through scale, rotation, and the
prompt origin.  Multi-step completion feeds predictions back into the window
and stops on an uncertainty/proximity trigger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (NormalizedTrace, PolarTrace, Trajectory,
                       denormalize_angle, normalize, rotation_matrix, to_polar,
                       wrap_angle)
from .gp import MultiOutputGP
from .windows import window_at

SCALE_MIN = 1e-3
SCALE_MAX = 1e3

STOP_TRIGGERED = "triggered"
STOP_MAX_HORIZON = "max_horizon"
STOP_NUMERIC_FAILURE = "numeric_failure"


@dataclass(frozen=True)
class CheckpointSet:
    """Radius/bearing landmarks of a demonstration at fixed sample indices.

    ``radii`` are in the demonstration's normalized radial domain; multiply
    by its reference radius to recover meters.
    """

    angles: np.ndarray
    radii: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        if not (len(self.angles) == len(self.radii) == len(self.times) >= 1):
            raise ValueError("checkpoint arrays must share a positive length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("checkpoint times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.shape[0]


def extract_checkpoints(trace: NormalizedTrace, polar: PolarTrace,
                        count: int) -> CheckpointSet:
    """Pick ``count`` checkpoints uniformly in time, excluding the endpoints.

    Checkpoints whose normalized radius falls below 1e-6 are unusable as
    ratio anchors and are dropped; dropping all of them is an error.
    """
    if count < 1:
        raise ValueError("checkpoint count must be positive")
    n = len(trace)
    if n < count + 1:
        raise ValueError(
            f"trace too short for checkpoints: need > {count} samples, got {n}"
        )
    idx = np.ceil(np.arange(1, count + 1) * n / (count + 1)).astype(int)
    radii = trace.xi[idx, 0]
    keep = radii >= 1e-6
    if not np.any(keep):
        raise ValueError("checkpoint too close to origin: no usable checkpoints")
    idx = idx[keep]
    return CheckpointSet(angles=polar.theta[idx].copy(),
                         radii=trace.xi[idx, 0].copy(),
                         times=idx)


def estimate_scale(prompt_polar: PolarTrace, checkpoints: CheckpointSet,
                   k: int, r_max: float) -> float:
    """Average prompt/demonstration radius ratio over reached checkpoints.

    ``k`` is the prompt's last sample index; a checkpoint is reached when its
    demonstration-clock time is <= k.  The result is clamped to
    [1e-3, 1e3] to keep downstream reconstruction finite.
    """
    reached = checkpoints.times <= k
    if not np.any(reached):
        raise ValueError("prompt too short for scale estimation: no checkpoint reached")
    times = checkpoints.times[reached]
    ref_meters = checkpoints.radii[reached] * r_max
    ratios = prompt_polar.r[times] / ref_meters
    return float(np.clip(np.mean(ratios), SCALE_MIN, SCALE_MAX))


def estimate_rotation(prompt_polar: PolarTrace, demo_polar: PolarTrace,
                      k: int) -> float:
    """Radius-weighted circular mean of prompt-vs-demonstration bearing offsets.

    Near-origin samples carry unreliable bearings and are down-weighted by
    their radius.  Returns 0 when every weight is negligible (rotation
    unobservable).
    """
    if k < 2:
        raise ValueError("need at least 2 prompt steps to estimate rotation")
    m = min(k, len(demo_polar) - 1)
    diffs = prompt_polar.theta[1:m + 1] - demo_polar.theta[1:m + 1]
    weights = prompt_polar.r[1:m + 1]
    if float(np.max(weights, initial=0.0)) < 1e-9:
        return 0.0
    s = float(np.sum(weights * np.sin(diffs)))
    c = float(np.sum(weights * np.cos(diffs)))
    return wrap_angle(math.atan2(s, c))


@dataclass(frozen=True)
class PromptContext:
    """A prompt aligned to one demonstration's normalized frame.

    ``features`` holds the prompt rotated by ``-rotation`` and scaled by
    ``1 / (scale * r_max)``; ``scale_fallback`` marks contexts where no
    checkpoint was reached and the scale defaulted to 1.
    """

    prompt: Trajectory
    scale: float
    rotation: float
    last_index: int
    features: NormalizedTrace
    scale_fallback: bool = False

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")


def _canonical_polar(prompt_polar: PolarTrace, rotation: float) -> PolarTrace:
    theta = wrap_angle(prompt_polar.theta - rotation)
    theta = np.asarray(theta, dtype=float)
    theta[0] = 0.0
    return PolarTrace(origin=prompt_polar.origin, r=prompt_polar.r, theta=theta)


def canonicalize_prompt(prompt: Trajectory, demo_polar: PolarTrace,
                        checkpoints: CheckpointSet, r_max: float,
                        window: int) -> PromptContext:
    """Estimate scale and rotation for a prompt and express it in demo frame."""
    k = len(prompt) - 1
    if k < window:
        raise ValueError(
            f"prompt too short: need at least {window + 1} samples, got {k + 1}"
        )
    prompt_polar = to_polar(prompt)
    rotation = (estimate_rotation(prompt_polar, demo_polar, k) if k >= 2 else 0.0)
    fallback = False
    try:
        scale = estimate_scale(prompt_polar, checkpoints, k, r_max)
    except ValueError:
        scale, fallback = 1.0, True
    features = normalize(_canonical_polar(prompt_polar, rotation),
                         r_max=scale * r_max)
    return PromptContext(prompt=prompt, scale=scale, rotation=rotation,
                         last_index=k, features=features,
                         scale_fallback=fallback)


def _unit_direction(xi_row, fallback_angle: float) -> tuple[float, np.ndarray]:
    """Bearing and unit vector of a feature row's angle embedding."""
    try:
        theta = denormalize_angle(xi_row[1], xi_row[2])
    except ValueError:
        theta = fallback_angle
    return theta, np.array([math.cos(theta), math.sin(theta)])


def one_step(models: MultiOutputGP, ctx: PromptContext, r_max: float,
             window: int) -> tuple[np.ndarray, np.ndarray]:
    """Predict the next feature vector and planar position after the prompt.

    The predicted increment is added to the last observed feature vector.
    The Cartesian update converts the current and predicted features to
    positions in the normalized frame, differences them, and maps the step
    through scale, rotation, and the true last prompt position.
    """
    trace = ctx.features
    k = ctx.last_index
    x_star = window_at(trace, k + 1, window)
    mu = models.predict(x_star)
    xi_hat = trace.xi[k] + mu
    theta_cur, dir_cur = _unit_direction(trace.xi[k], 0.0)
    _, dir_next = _unit_direction(xi_hat, theta_cur)
    dq = xi_hat[0] * dir_next - trace.xi[k, 0] * dir_cur
    step = ctx.scale * r_max * (rotation_matrix(ctx.rotation) @ dq)
    p_hat = ctx.prompt.p[k] + step
    if not np.all(np.isfinite(p_hat)):
        raise ValueError("numeric error: non-finite one-step prediction")
    return xi_hat, p_hat


@dataclass(frozen=True)
class Rollout:
    """A predicted continuation with per-step uncertainty norms.

    ``l`` is the final sample index on the shared demonstration clock;
    ``scale`` and ``rotation`` echo the prompt canonicalization for export.
    """

    positions: np.ndarray
    uncertainties: np.ndarray
    stop_reason: str
    l: int
    scale: float = 1.0
    rotation: float = 0.0

    def __len__(self) -> int:
        return self.positions.shape[0]


def default_sigma_threshold(models: MultiOutputGP) -> float:
    """Uncertainty trigger level: sqrt(3) times the observation noise std."""
    noise = models.estimators_[0].params_.noise_variance
    return math.sqrt(3.0) * math.sqrt(noise)


def rollout(models: MultiOutputGP, ctx: PromptContext, demo_end_offset,
            dist_tolerance: float, max_horizon: int, r_max: float,
            window: int, sigma_threshold: float | None = None) -> Rollout:
    """Recursively complete a prompt until the stop trigger fires.

    Parameters
    ----------
    demo_end_offset : (2,) array
        Demonstration endpoint relative to the demonstration origin (meters);
        it is mapped through scale, rotation, and the prompt origin to form
        the proximity target.
    dist_tolerance : float
        Proximity threshold on the distance to the mapped endpoint (meters).
    max_horizon : int
        Hard cap on predicted steps; 0 yields an empty rollout.
    sigma_threshold : float, optional
        Uncertainty trigger level; defaults to sqrt(3) * noise std.

    The trigger stops at the first step whose uncertainty norm is at or above
    ``sigma_threshold`` while the position is within ``dist_tolerance`` of
    the mapped endpoint.
    """
    if dist_tolerance <= 0:
        raise ValueError("dist_tolerance must be positive")
    if max_horizon < 0:
        raise ValueError("max_horizon must be non-negative")
    if sigma_threshold is None:
        sigma_threshold = default_sigma_threshold(models)

    trace = ctx.features
    k = ctx.last_index
    origin = ctx.prompt.p[0]
    rot = rotation_matrix(ctx.rotation)
    target = origin + ctx.scale * (rot @ np.asarray(demo_end_offset, dtype=float))

    window_rows = [trace.zeta[i].copy() for i in range(k + 1 - window, k + 1)]
    xi_cur = trace.xi[k].copy()
    theta_cur, dir_cur = _unit_direction(xi_cur, 0.0)
    q_cur = xi_cur[0] * dir_cur
    rel = ctx.prompt.p[k] - origin

    positions: list[np.ndarray] = []
    sigmas: list[float] = []
    stop_reason = STOP_MAX_HORIZON
    h = k
    for _ in range(max_horizon):
        x_star = np.concatenate(window_rows)
        mu, std = models.predict(x_star, return_std=True)
        xi_next = xi_cur + mu
        if not (np.all(np.isfinite(xi_next)) and np.all(np.isfinite(std))):
            stop_reason = STOP_NUMERIC_FAILURE
            break
        theta_next, dir_next = _unit_direction(xi_next, theta_cur)
        q_next = xi_next[0] * dir_next
        rel = rel + ctx.scale * r_max * (rot @ (q_next - q_cur))
        h += 1
        pos = origin + rel
        sigma_norm = float(np.linalg.norm(std))
        dist = float(np.linalg.norm(target - pos))
        positions.append(pos)
        sigmas.append(sigma_norm)
        window_rows.pop(0)
        window_rows.append(np.concatenate([xi_next, mu]))
        xi_cur, q_cur, theta_cur = xi_next, q_next, theta_next
        if sigma_norm >= sigma_threshold and dist <= dist_tolerance:
            stop_reason = STOP_TRIGGERED
            break

    pos_arr = (np.array(positions) if positions else np.zeros((0, 2)))
    return Rollout(positions=pos_arr,
                   uncertainties=np.array(sigmas),
                   stop_reason=stop_reason, l=h,
                   scale=ctx.scale, rotation=ctx.rotation)


def _causal_rotations(prompt_polar: PolarTrace, demo_polar: PolarTrace,
                      k: int) -> np.ndarray:
    """Rotation estimates phi[j] using prompt samples 0..j, for j = 0..k."""
    m = min(k, len(demo_polar) - 1)
    diffs = prompt_polar.theta[1:m + 1] - demo_polar.theta[1:m + 1]
    weights = prompt_polar.r[1:m + 1]
    s = np.concatenate([[0.0], np.cumsum(weights * np.sin(diffs))])
    c = np.concatenate([[0.0], np.cumsum(weights * np.cos(diffs))])
    wmax = np.concatenate([[0.0], np.maximum.accumulate(weights)])
    phis = np.zeros(k + 1)
    for j in range(1, k + 1):
        jj = min(j, m)
        if wmax[jj] >= 1e-9:
            phis[j] = wrap_angle(math.atan2(s[jj], c[jj]))
    return phis


def _causal_scales(prompt_polar: PolarTrace, checkpoints: CheckpointSet,
                   k: int, r_max: float) -> np.ndarray:
    """Scale estimates lam[j] from checkpoints reached by index j (else 1)."""
    lams = np.ones(k + 1)
    times = checkpoints.times
    ref = checkpoints.radii * r_max
    ratios = np.zeros(len(times))
    reached = times <= k
    ratios[reached] = prompt_polar.r[times[reached]] / ref[reached]
    count = 0
    total = 0.0
    for j in range(k + 1):
        while count < len(times) and times[count] <= j:
            total += ratios[count]
            count += 1
        if count > 0:
            lams[j] = np.clip(total / count, SCALE_MIN, SCALE_MAX)
    return lams


def teacher_forced_predictions(models: MultiOutputGP, prompt: Trajectory,
                               prompt_polar: PolarTrace, demo_polar: PolarTrace,
                               checkpoints: CheckpointSet, r_max: float,
                               window: int, return_std: bool = False):
    """One-step predictions along an observed prompt, anchored at true samples.

    Prediction j (for sample indices window..k) is conditioned on the true
    prompt prefix through sample j-1 only: scale and rotation are estimated
    causally from that prefix, so per-step errors form an exact prefix sum.
    Returns an array of predicted positions aligned with ``prompt.p[window:]``
    (plus per-step uncertainty norms when ``return_std`` is set).
    """
    k = len(prompt) - 1
    if k < window:
        raise ValueError(
            f"prompt too short: need at least {window + 1} samples, got {k + 1}"
        )
    phis = _causal_rotations(prompt_polar, demo_polar, k)
    lams = _causal_scales(prompt_polar, checkpoints, k, r_max)

    rows = []
    anchors = []  # (xi_prev, lam, phi) per prediction index
    for j in range(window, k + 1):
        lam, phi = lams[j - 1], phis[j - 1]
        # Features for samples lo..j-1 under this term's canonicalization;
        # the slice carries one extra leading sample for increments unless
        # the window starts at the zeroed first record.
        lo = max(0, j - window - 1)
        r_scaled = prompt_polar.r[lo:j] / (lam * r_max)
        theta = np.asarray(wrap_angle(prompt_polar.theta[lo:j] - phi),
                           dtype=float)
        if lo == 0:
            theta[0] = 0.0
        xi = np.column_stack([r_scaled,
                              (np.cos(theta) + 1.0) / 2.0,
                              (np.sin(theta) + 1.0) / 2.0])
        recs = np.zeros((window, 6))
        if j == window:
            recs[1:, :3] = xi[1:]
            recs[1:, 3:] = xi[1:] - xi[:-1]
        else:
            recs[:, :3] = xi[1:]
            recs[:, 3:] = xi[1:] - xi[:-1]
        rows.append(recs.reshape(-1))
        anchors.append((xi[-1], lam, phi))
    if return_std:
        means, stds = models.predict(np.asarray(rows), return_std=True)
        sigma_norms = np.linalg.norm(stds, axis=1)
    else:
        means = models.predict(np.asarray(rows))

    preds = np.zeros((k + 1 - window, 2))
    for i, j in enumerate(range(window, k + 1)):
        xi_prev, lam, phi = anchors[i]
        xi_hat = xi_prev + means[i]
        theta_prev, dir_prev = _unit_direction(xi_prev, 0.0)
        _, dir_next = _unit_direction(xi_hat, theta_prev)
        dq = xi_hat[0] * dir_next - xi_prev[0] * dir_prev
        step = lam * r_max * (rotation_matrix(phi) @ dq)
        preds[i] = prompt.p[j - 1] + step
    if return_std:
        return preds, sigma_norms
    return preds
