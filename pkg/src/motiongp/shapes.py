"""Synthetic demonstration corpus: named planar shape generators.

Every generator starts at the origin and is sized around a ~1 m drawing
scale.  Strokes are traced with a smooth speed profile that eases in and out
(like a human pen stroke, never fully stopping), which keeps several samples
inside any endpoint neighborhood.  Shapes are deterministic; prompt noise is
the evaluation harness's job.
"""

from __future__ import annotations

import numpy as np

from .geometry import Trajectory

# Stroke speed profile: moderate ease-in, deep ease-out.  The asymmetry
# matters twice over: the long slow tail keeps several samples near the
# stroke end (where the stop trigger needs them), while the brisker start
# keeps the end state distinguishable from the start state on closed shapes.
# Durations are short on purpose: a brisk stroke at 20 Hz yields the sparse
# window spacing the uncertainty trigger is calibrated for.
START_SPEED = 0.5
END_SPEED = 0.15
RAMP_IN_END = 0.2
RAMP_OUT_START = 0.55


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _eased(tau: np.ndarray) -> np.ndarray:
    """Map uniform time to shape parameter under the stroke speed profile."""
    ease_in = START_SPEED + (1.0 - START_SPEED) * _smoothstep(tau / RAMP_IN_END)
    ease_out = 1.0 - (1.0 - END_SPEED) * _smoothstep(
        (tau - RAMP_OUT_START) / (1.0 - RAMP_OUT_START))
    speed = ease_in * ease_out
    u = np.concatenate([[0.0], np.cumsum((speed[1:] + speed[:-1]) / 2.0)])
    return u / u[-1]


def _sampled(fn, duration: float, sample_rate_hz: float) -> Trajectory:
    n = int(round(duration * sample_rate_hz)) + 1
    u = _eased(np.linspace(0.0, 1.0, n))
    p = fn(u)
    return Trajectory.from_positions(p - p[0], sample_rate_hz)


def make_line(sample_rate_hz: float = 20.0) -> Trajectory:
    def fn(u):
        return np.column_stack([1.0 * u, 0.6 * u])
    return _sampled(fn, duration=2.5, sample_rate_hz=sample_rate_hz)


def make_circle(sample_rate_hz: float = 20.0) -> Trajectory:
    radius = 0.5

    def fn(u):
        ang = 2.0 * np.pi * u - np.pi / 2.0
        return radius * np.column_stack([np.cos(ang), np.sin(ang)])
    return _sampled(fn, duration=3.5, sample_rate_hz=sample_rate_hz)


def make_s_curve(sample_rate_hz: float = 20.0) -> Trajectory:
    def fn(u):
        x = 1.2 * u
        y = 0.35 * np.sin(2.0 * np.pi * u)
        return np.column_stack([x, y])
    return _sampled(fn, duration=3.0, sample_rate_hz=sample_rate_hz)


def make_figure_eight(sample_rate_hz: float = 20.0) -> Trajectory:
    # Starts at the right lobe's extreme so the self-intersection sits
    # mid-trace, away from the endpoint the stop trigger homes on.
    def fn(u):
        ang = 2.0 * np.pi * u + np.pi / 2.0
        return np.column_stack([0.6 * np.sin(ang),
                                0.45 * np.sin(ang) * np.cos(ang)])
    return _sampled(fn, duration=4.0, sample_rate_hz=sample_rate_hz)


def make_spiral(sample_rate_hz: float = 20.0) -> Trajectory:
    turns = 2.5

    def fn(u):
        ang = 2.0 * np.pi * turns * u
        r = 0.6 * u
        return np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    return _sampled(fn, duration=3.5, sample_rate_hz=sample_rate_hz)


SHAPES = {
    "line": make_line,
    "circle": make_circle,
    "s_curve": make_s_curve,
    "figure_eight": make_figure_eight,
    "spiral": make_spiral,
}


def make_demo(name: str, sample_rate_hz: float = 20.0) -> Trajectory:
    try:
        generator = SHAPES[name]
    except KeyError:
        raise ValueError(
            f"unknown shape {name!r}; available: {sorted(SHAPES)}"
        ) from None
    return generator(sample_rate_hz=sample_rate_hz)
