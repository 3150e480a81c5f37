"""One-shot planar motion skills with geometry-invariant GP completion."""

from .baseline import CartesianGPBaseline
from .geometry import (NormalizedTrace, PolarTrace, Trajectory,
                       denormalize_angle, normalize, reconstruct_step,
                       resample, to_polar)
from .gp import GPRegressor, KernelParams, MultiOutputGP, ard_kernel
from .predictor import (CheckpointSet, PromptContext, Rollout,
                        canonicalize_prompt, estimate_rotation, estimate_scale,
                        extract_checkpoints, one_step, rollout)
from .skills import (ClassificationResult, SkillConfig, SkillLibrary,
                     SkillModel, TrajectoryCompleter, learn_skill)
from .trajio import read_rollout, read_trajectory, write_rollout, write_trajectory
from .windows import AugmentedDataset, AugmentedSample, build_dataset, window_at

__version__ = "0.1.0"

__all__ = [
    "AugmentedDataset", "AugmentedSample", "CartesianGPBaseline",
    "CheckpointSet", "ClassificationResult", "GPRegressor", "KernelParams",
    "MultiOutputGP", "NormalizedTrace", "PolarTrace", "PromptContext",
    "Rollout", "SkillConfig", "SkillLibrary", "SkillModel",
    "Trajectory", "TrajectoryCompleter", "ard_kernel", "build_dataset",
    "canonicalize_prompt", "denormalize_angle", "estimate_rotation",
    "estimate_scale", "extract_checkpoints", "learn_skill", "normalize",
    "one_step", "read_rollout", "read_trajectory", "reconstruct_step",
    "resample", "rollout", "to_polar", "window_at", "write_rollout",
    "write_trajectory",
]
