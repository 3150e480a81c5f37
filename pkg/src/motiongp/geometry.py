"""Planar trajectory geometry: origin-anchored polar features and their inverse.

A trajectory is re-expressed relative to its own first sample as a radius and
a bearing, the bearing is embedded on the unit circle to avoid the 2*pi seam,
and all features are scaled into [0, 1].  Because every quantity is relative
to the first sample, the representation is translation-free by construction;
rotation shifts only the bearings and scaling only the radii, which is what
the downstream canonicalization relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    wrapped = np.mod(theta, TWO_PI)
    wrapped = np.where(wrapped > math.pi, wrapped - TWO_PI, wrapped)
    return float(wrapped) if np.isscalar(theta) else wrapped


def rotation_matrix(phi: float) -> np.ndarray:
    """Counterclockwise 2x2 rotation matrix."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled planar path.

    Attributes
    ----------
    t : (N,) float array
        Sample times in seconds, strictly increasing, spacing uniform within
        1% of 1/sample_rate_hz.  Resampling ragged input is the caller's job
        (see :func:`resample`).
    p : (N, 2) float array
        Positions in meters.
    sample_rate_hz : float
        Nominal sampling rate.
    """

    t: np.ndarray
    p: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("positions must be an (N, 2) array")
        if t.ndim != 1 or t.shape[0] != p.shape[0]:
            raise ValueError("times and positions must have matching length")
        if t.shape[0] < 2:
            raise ValueError("insufficient trajectory: need at least 2 samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise ValueError("numeric error: non-finite trajectory data")
        rate = float(self.sample_rate_hz)
        if not (rate > 0 and math.isfinite(rate)):
            raise ValueError("sample_rate_hz must be a positive real")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("timestamps must be strictly increasing")
        nominal = 1.0 / rate
        if np.any(np.abs(dt - nominal) > 0.01 * nominal):
            raise ValueError(
                "sample spacing deviates more than 1% from the nominal rate; "
                "resample first"
            )
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "sample_rate_hz", rate)

    def __len__(self) -> int:
        return self.t.shape[0]

    @classmethod
    def from_positions(cls, p, sample_rate_hz: float) -> "Trajectory":
        """Build a trajectory from positions alone, timestamping at the rate."""
        p = np.asarray(p, dtype=float)
        t = np.arange(p.shape[0]) / float(sample_rate_hz)
        return cls(t=t, p=p, sample_rate_hz=sample_rate_hz)

    def translated(self, offset) -> "Trajectory":
        """Rigidly translate every position by ``offset``."""
        return Trajectory(self.t, self.p + np.asarray(offset, dtype=float),
                          self.sample_rate_hz)

    def rotated_about_start(self, phi: float) -> "Trajectory":
        """Rotate all positions by ``phi`` about the first sample."""
        rel = self.p - self.p[0]
        return Trajectory(self.t, self.p[0] + rel @ rotation_matrix(phi).T,
                          self.sample_rate_hz)

    def scaled_about_start(self, s: float) -> "Trajectory":
        """Scale all positions by ``s`` about the first sample."""
        if not s > 0:
            raise ValueError("scale factor must be positive")
        return Trajectory(self.t, self.p[0] + s * (self.p - self.p[0]),
                          self.sample_rate_hz)


def resample(t, p, sample_rate_hz: float) -> Trajectory:
    """Linearly resample timestamped points onto a uniform grid.

    Parameters
    ----------
    t : (N,) array of seconds, strictly increasing (raw event times).
    p : (N, 2) array of positions.
    sample_rate_hz : target rate; the grid spans [t[0], t[-1]].
    """
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    if t.ndim != 1 or p.ndim != 2 or p.shape != (t.shape[0], 2):
        raise ValueError("expected (N,) times and (N, 2) positions")
    if t.shape[0] < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("insufficient trajectory: need >= 2 strictly increasing times")
    n = int(math.floor((t[-1] - t[0]) * sample_rate_hz)) + 1
    if n < 2:
        raise ValueError("insufficient trajectory: span shorter than one sample period")
    grid = t[0] + np.arange(n) / float(sample_rate_hz)
    cols = [np.interp(grid, t, p[:, i]) for i in range(2)]
    return Trajectory(t=grid - t[0], p=np.column_stack(cols),
                      sample_rate_hz=sample_rate_hz)


@dataclass(frozen=True)
class PolarTrace:
    """Radius/bearing view of a trajectory, anchored at its first sample.

    ``r[0] == 0`` and ``theta[0] == 0`` by convention (the bearing of the
    anchor point is undefined; any constant works because the first feature
    record is zeroed downstream).  Later samples that coincide exactly with
    the anchor inherit the previous bearing.
    """

    origin: np.ndarray
    r: np.ndarray
    theta: np.ndarray

    def __len__(self) -> int:
        return self.r.shape[0]


def to_polar(traj: Trajectory) -> PolarTrace:
    """Express a trajectory as radius and bearing relative to its first sample."""
    rel = traj.p - traj.p[0]
    r = np.hypot(rel[:, 0], rel[:, 1])
    theta = np.arctan2(rel[:, 1], rel[:, 0])
    theta = wrap_angle(theta)
    theta[0] = 0.0
    # A sample that exactly revisits the anchor has no bearing; carry the
    # previous one so pauses stay representable.
    for k in np.flatnonzero(r[1:] == 0.0) + 1:
        theta[k] = theta[k - 1]
    return PolarTrace(origin=traj.p[0].copy(), r=r, theta=theta)


@dataclass(frozen=True)
class NormalizedTrace:
    """Unit-scaled feature view of a polar trace.

    Attributes
    ----------
    r_max : float
        Radius used as the scale divisor (the trace's own maximum, or an
        externally supplied reference scale).
    xi : (N, 3) array
        Per-step features (scaled radius, embedded cos, embedded sin), each
        component in [0, 1] when the trace stays within ``r_max``.
    dxi : (N, 3) array
        Per-step increments of ``xi``; ``dxi[0]`` is zero.
    zeta : (N, 6) array
        Concatenated [xi, dxi] records; ``zeta[0]`` is the zero vector by
        convention.
    """

    r_max: float
    xi: np.ndarray
    dxi: np.ndarray
    zeta: np.ndarray

    def __len__(self) -> int:
        return self.xi.shape[0]


def normalize(polar: PolarTrace, r_max: float | None = None) -> NormalizedTrace:
    """Scale a polar trace into unit-range features.

    The radius is divided by ``r_max`` (the trace's own maximum by default);
    the bearing is embedded as ((cos+1)/2, (sin+1)/2) so both components live
    in [0, 1].  Pass an explicit ``r_max`` to express a trace in another
    trace's scale (used when canonicalizing prompts against a demonstration).
    """
    if r_max is None:
        r_max = float(np.max(polar.r))
        if r_max <= 0.0:
            raise ValueError("degenerate trajectory: all samples at the origin")
    elif not r_max > 0.0:
        raise ValueError("r_max must be positive")
    r_scaled = polar.r / r_max
    cos_emb = (np.cos(polar.theta) + 1.0) / 2.0
    sin_emb = (np.sin(polar.theta) + 1.0) / 2.0
    xi = np.column_stack([r_scaled, cos_emb, sin_emb])
    dxi = np.zeros_like(xi)
    dxi[1:] = xi[1:] - xi[:-1]
    zeta = np.concatenate([xi, dxi], axis=1)
    zeta[0] = 0.0
    return NormalizedTrace(r_max=float(r_max), xi=xi, dxi=dxi, zeta=zeta)


def denormalize_angle(cos_hat: float, sin_hat: float) -> float:
    """Recover a bearing in (-pi, pi] from its unit-range embedding.

    Tolerates slightly off-circle inputs (regression outputs) because only
    the direction of (2c-1, 2s-1) matters.  Raises when both components sit
    exactly at the circle center, where no direction exists.
    """
    x = 2.0 * cos_hat - 1.0
    y = 2.0 * sin_hat - 1.0
    if x == 0.0 and y == 0.0:
        raise ValueError("angle undefined: embedding at the circle center")
    theta = math.atan2(y, x)
    if theta <= -math.pi:
        theta += TWO_PI
    return theta


def reconstruct_step(p_prev, step_length: float, step_angle: float) -> np.ndarray:
    """Advance a position by a polar step (length, direction)."""
    p_prev = np.asarray(p_prev, dtype=float)
    if not (np.all(np.isfinite(p_prev)) and math.isfinite(step_length)
            and math.isfinite(step_angle)):
        raise ValueError("numeric error: non-finite step inputs")
    return p_prev + step_length * np.array([math.cos(step_angle),
                                            math.sin(step_angle)])
