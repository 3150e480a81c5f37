"""Sliding-window training pairs over normalized feature traces.

Each training input concatenates the ``w`` most recent 6-component feature
records; the target is the 3-component increment realized on the step
immediately after the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .geometry import NormalizedTrace

RECORD_DIM = 6
TARGET_DIM = 3


class AugmentedSample(NamedTuple):
    input: np.ndarray   # (6w,)
    target: np.ndarray  # (3,)


@dataclass(frozen=True)
class AugmentedDataset:
    """Windowed input/target pairs from one demonstration.

    ``inputs`` has shape (N - w, 6w); row i pairs the window ending at record
    w+i-1 with the increment realized at step w+i.
    """

    inputs: np.ndarray
    targets: np.ndarray
    window: int
    source_id: str = ""

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def __getitem__(self, i: int) -> AugmentedSample:
        return AugmentedSample(self.inputs[i], self.targets[i])


def window_at(trace: NormalizedTrace, k: int, window: int) -> np.ndarray:
    """Concatenate records k-w .. k-1 (oldest first) into one input row."""
    if window < 1:
        raise ValueError("window length must be positive")
    if k < window:
        raise ValueError(f"window underflow: k={k} < window={window}")
    if k > len(trace):
        raise ValueError(f"window end {k} beyond trace length {len(trace)}")
    return trace.zeta[k - window:k].reshape(-1)


def build_dataset(trace: NormalizedTrace, window: int,
                  source_id: str = "") -> AugmentedDataset:
    """Assemble all window/increment pairs of a trace.

    Requires at least ``window + 2`` records so that the dataset holds two or
    more pairs; shorter traces cannot anchor a prediction.
    """
    if window < 1:
        raise ValueError("window length must be positive")
    n = len(trace)
    if n < window + 2:
        raise ValueError(
            f"trace too short for window: need >= {window + 2} samples, got {n}"
        )
    # Row i of the view is zeta[i:i+window] flattened, i.e. the input for
    # target index window + i.
    views = sliding_window_view(trace.zeta, (window, RECORD_DIM))[:, 0]
    inputs = views[:n - window].reshape(n - window, window * RECORD_DIM).copy()
    targets = trace.dxi[window:].copy()
    return AugmentedDataset(inputs=inputs, targets=targets, window=window,
                            source_id=source_id)
