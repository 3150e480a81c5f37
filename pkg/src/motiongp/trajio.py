"""Newline-delimited JSON formats for trajectories and rollouts.

Floats are written with Python's shortest round-trip repr, so every value
representable in 64-bit floating point survives a write/read cycle
bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import Trajectory
from .predictor import Rollout


def write_trajectory(path, traj: Trajectory, label: str = "") -> None:
    """Write header line {sample_rate_hz, label} then one {t, x, y} per sample."""
    lines = [json.dumps({"sample_rate_hz": float(traj.sample_rate_hz),
                         "label": str(label)})]
    for t, (x, y) in zip(traj.t, traj.p):
        lines.append(json.dumps({"t": float(t), "x": float(x), "y": float(y)}))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory(path) -> tuple[Trajectory, str]:
    """Read the shared trajectory format; returns (trajectory, label)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError("parse error at record 0: empty trajectory file")
    try:
        header = json.loads(lines[0])
        rate = float(header["sample_rate_hz"])
        label = str(header.get("label", ""))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"parse error at record 0: bad header ({exc})") from exc
    ts, xs, ys = [], [], []
    for n, line in enumerate(lines[1:], start=1):
        try:
            rec = json.loads(line)
            ts.append(float(rec["t"]))
            xs.append(float(rec["x"]))
            ys.append(float(rec["y"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"parse error at record {n}: {exc}") from exc
    traj = Trajectory(t=np.array(ts), p=np.column_stack([xs, ys]),
                      sample_rate_hz=rate)
    return traj, label


def rollout_lines(roll: Rollout) -> list:
    """{h, x, y, sigma_norm} record lines plus the stop-metadata trailer."""
    steps = len(roll)
    start = roll.l - steps + 1
    lines = []
    for i in range(steps):
        lines.append(json.dumps({"h": int(start + i),
                                 "x": float(roll.positions[i, 0]),
                                 "y": float(roll.positions[i, 1]),
                                 "sigma_norm": float(roll.uncertainties[i])}))
    lines.append(json.dumps({"stop_reason": roll.stop_reason,
                             "l": int(roll.l),
                             "lambda": float(roll.scale),
                             "rotation": float(roll.rotation)}))
    return lines


def write_rollout(path, roll: Rollout) -> None:
    """Write the rollout export format (one JSON record per line)."""
    Path(path).write_text("\n".join(rollout_lines(roll)) + "\n")


def read_rollout(path) -> Rollout:
    """Read the rollout export format back into a :class:`Rollout`."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError("parse error at record 0: empty rollout file")
    try:
        trailer = json.loads(lines[-1])
        stop_reason = trailer["stop_reason"]
        final = int(trailer["l"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"parse error at trailer: {exc}") from exc
    hs, xs, ys, sig = [], [], [], []
    for n, line in enumerate(lines[:-1]):
        try:
            rec = json.loads(line)
            hs.append(int(rec["h"]))
            xs.append(float(rec["x"]))
            ys.append(float(rec["y"]))
            sig.append(float(rec["sigma_norm"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"parse error at record {n}: {exc}") from exc
    positions = (np.column_stack([xs, ys]) if xs else np.zeros((0, 2)))
    return Rollout(positions=positions, uncertainties=np.array(sig),
                   stop_reason=stop_reason, l=final,
                   scale=float(trailer.get("lambda", 1.0)),
                   rotation=float(trailer.get("rotation", 0.0)))
