"""Skill learning, classification, and the persistent skill library.

A skill is one demonstration together with the regression heads trained on
its windowed features and the checkpoints used for prompt scaling.  The
library stores skills, classifies prompts by teacher-forced prediction error,
and persists to a directory of demonstration files plus per-skill configs
(models are refit on load).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .geometry import NormalizedTrace, PolarTrace, Trajectory, normalize, to_polar
from .gp import KernelParams, MultiOutputGP
from .predictor import (CheckpointSet, PromptContext, Rollout,
                        canonicalize_prompt, extract_checkpoints, rollout,
                        teacher_forced_predictions)
from .trajio import read_trajectory, write_trajectory
from .windows import build_dataset

LIBRARY_VERSION = 1
AMBIGUITY_MARGIN_FRACTION = 0.10


@dataclass(frozen=True)
class SkillConfig:
    """Pipeline parameters for learning and completing one skill."""

    window: int = 10
    checkpoint_count: int = 8
    sample_rate_hz: float = 20.0
    kernel: KernelParams = field(default_factory=KernelParams)
    dist_tolerance_frac: float = 0.05
    max_horizon_factor: float = 3.0

    def as_dict(self) -> dict:
        return {"window": self.window,
                "checkpoint_count": self.checkpoint_count,
                "sample_rate_hz": self.sample_rate_hz,
                "kernel": self.kernel.as_dict(),
                "dist_tolerance_frac": self.dist_tolerance_frac,
                "max_horizon_factor": self.max_horizon_factor}

    @classmethod
    def from_dict(cls, d: dict) -> "SkillConfig":
        return cls(window=int(d["window"]),
                   checkpoint_count=int(d["checkpoint_count"]),
                   sample_rate_hz=float(d["sample_rate_hz"]),
                   kernel=KernelParams.from_dict(d["kernel"]),
                   dist_tolerance_frac=float(d["dist_tolerance_frac"]),
                   max_horizon_factor=float(d["max_horizon_factor"]))


@dataclass(frozen=True)
class SkillModel:
    """One learned skill: demonstration, trained heads, and checkpoints."""

    id: str
    demonstration: Trajectory
    models: MultiOutputGP
    checkpoints: CheckpointSet
    r_max: float
    window: int
    created_at: str
    config: SkillConfig
    polar: PolarTrace
    trace: NormalizedTrace

    @property
    def end_offset(self) -> np.ndarray:
        """Demonstration endpoint relative to its origin (meters)."""
        return self.demonstration.p[-1] - self.demonstration.p[0]

    def context_for(self, prompt: Trajectory) -> PromptContext:
        return canonicalize_prompt(prompt, self.polar, self.checkpoints,
                                   self.r_max, self.window)

    def complete(self, prompt: Trajectory,
                 dist_tolerance: float | None = None,
                 max_horizon: int | None = None,
                 sigma_threshold: float | None = None) -> Rollout:
        """Classify-free completion of a prompt with this skill's models."""
        ctx = self.context_for(prompt)
        if dist_tolerance is None:
            dist_tolerance = self.config.dist_tolerance_frac * ctx.scale * self.r_max
        if max_horizon is None:
            max_horizon = int(self.config.max_horizon_factor
                              * len(self.demonstration))
        return rollout(self.models, ctx, self.end_offset, dist_tolerance,
                       max_horizon, self.r_max, self.window,
                       sigma_threshold=sigma_threshold)


def learn_skill(demo: Trajectory, skill_id: str,
                config: SkillConfig | None = None) -> SkillModel:
    """Train one skill from a single demonstration."""
    config = config or SkillConfig()
    polar = to_polar(demo)
    trace = normalize(polar)
    dataset = build_dataset(trace, config.window, source_id=skill_id)
    models = MultiOutputGP(signal_variance=config.kernel.signal_variance,
                           length_scale=config.kernel.length_scales,
                           noise_variance=config.kernel.noise_variance)
    models.fit(dataset.inputs, dataset.targets)
    checkpoints = extract_checkpoints(trace, polar, config.checkpoint_count)
    return SkillModel(id=skill_id, demonstration=demo, models=models,
                      checkpoints=checkpoints, r_max=trace.r_max,
                      window=config.window,
                      created_at=datetime.now(timezone.utc).isoformat(),
                      config=config, polar=polar, trace=trace)


@dataclass(frozen=True)
class ClassificationResult:
    """Per-skill prompt errors and the selected skill.

    ``margin`` is the gap between the two best scores (infinite for a
    single-skill library); ``ambiguous`` flags margins under 10% of the best
    score, leaving the response policy to callers.
    """

    scores: dict
    selected: str
    margin: float
    ambiguous: bool
    scale: float
    rotation: float


def score_prompt(skill: SkillModel, prompt: Trajectory,
                 prompt_polar: PolarTrace | None = None) -> float:
    """Summed teacher-forced prediction error of a prompt under one skill."""
    if prompt_polar is None:
        prompt_polar = to_polar(prompt)
    preds = teacher_forced_predictions(skill.models, prompt, prompt_polar,
                                       skill.polar, skill.checkpoints,
                                       skill.r_max, skill.window)
    errors = np.linalg.norm(prompt.p[skill.window:] - preds, axis=1)
    return float(np.sum(errors))


class SkillLibrary:
    """Ordered collection of skills with classification and persistence."""

    def __init__(self, config: SkillConfig | None = None):
        self.config = config or SkillConfig()
        self._skills: dict[str, SkillModel] = {}

    def __len__(self) -> int:
        return len(self._skills)

    def __contains__(self, skill_id: str) -> bool:
        return skill_id in self._skills

    def ids(self) -> list[str]:
        return list(self._skills)

    def get(self, skill_id: str) -> SkillModel:
        return self._skills[skill_id]

    def learn(self, demo: Trajectory, skill_id: str,
              config: SkillConfig | None = None) -> SkillModel:
        if skill_id in self._skills:
            raise ValueError(f"id conflict: skill {skill_id!r} already exists")
        skill = learn_skill(demo, skill_id, config or self.config)
        self._skills[skill_id] = skill
        return skill

    def add(self, skill: SkillModel) -> None:
        if skill.id in self._skills:
            raise ValueError(f"id conflict: skill {skill.id!r} already exists")
        self._skills[skill.id] = skill

    def classify(self, prompt: Trajectory) -> ClassificationResult:
        """Select the skill whose teacher-forced replay tracks the prompt best.

        Deterministic: ties break toward the lexicographically smaller id.
        """
        if not self._skills:
            raise ValueError("library is empty")
        max_window = max(s.window for s in self._skills.values())
        if len(prompt) < max_window + 1:
            raise ValueError(
                "ambiguous prompt: insufficient length "
                f"(need >= {max_window + 1} samples, got {len(prompt)})"
            )
        prompt_polar = to_polar(prompt)
        scores = {sid: score_prompt(skill, prompt, prompt_polar)
                  for sid, skill in self._skills.items()}
        ranked = sorted(scores.items(), key=lambda item: (item[1], item[0]))
        selected = ranked[0][0]
        if len(ranked) == 1:
            margin = math.inf
            ambiguous = False
        else:
            margin = ranked[1][1] - ranked[0][1]
            ambiguous = margin < AMBIGUITY_MARGIN_FRACTION * ranked[0][1]
        ctx = self._skills[selected].context_for(prompt)
        return ClassificationResult(scores=scores, selected=selected,
                                    margin=margin, ambiguous=ambiguous,
                                    scale=ctx.scale, rotation=ctx.rotation)

    def save(self, path) -> None:
        """Write the library to a directory (demonstrations + configs)."""
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        entries = []
        for i, (sid, skill) in enumerate(self._skills.items()):
            stem = f"skill_{i:03d}"
            write_trajectory(root / f"{stem}.traj", skill.demonstration,
                             label=sid)
            meta = {"config": skill.config.as_dict(),
                    "created_at": skill.created_at}
            (root / f"{stem}.json").write_text(
                json.dumps(meta, sort_keys=True, indent=1) + "\n")
            entries.append({"id": sid, "traj": f"{stem}.traj",
                            "config": f"{stem}.json"})
        manifest = {"version": LIBRARY_VERSION, "skills": entries,
                    "config": self.config.as_dict()}
        (root / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "SkillLibrary":
        """Rebuild a library from disk, refitting every skill's models."""
        root = Path(path)
        manifest_path = root / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text())
        except FileNotFoundError:
            raise FileNotFoundError(f"no library manifest at {manifest_path}")
        except json.JSONDecodeError as exc:
            raise ValueError(f"parse error in manifest: {exc}") from exc
        if manifest.get("version") != LIBRARY_VERSION:
            raise ValueError(
                f"incompatible library version: {manifest.get('version')!r}"
            )
        library = cls(config=SkillConfig.from_dict(manifest["config"]))
        for entry in manifest["skills"]:
            demo, label = read_trajectory(root / entry["traj"])
            meta = json.loads((root / entry["config"]).read_text())
            config = SkillConfig.from_dict(meta["config"])
            skill = learn_skill(demo, entry["id"], config)
            library.add(replace(skill, created_at=meta["created_at"]))
        return library


class TrajectoryCompleter(BaseEstimator):
    """Single-skill estimator: fit one demonstration, complete prompts.

    Parameters mirror :class:`SkillConfig`; ``fit`` accepts an (N, 2) array
    of positions sampled at ``sample_rate_hz`` or a :class:`Trajectory`.
    ``predict`` returns the completion positions; ``complete`` exposes the
    full rollout record with uncertainties and the stop reason.
    """

    def __init__(self, window=10, checkpoint_count=8, sample_rate_hz=20.0,
                 signal_variance=1.0, length_scale=1.0, noise_variance=0.01,
                 dist_tolerance_frac=0.05, max_horizon_factor=3.0):
        self.window = window
        self.checkpoint_count = checkpoint_count
        self.sample_rate_hz = sample_rate_hz
        self.signal_variance = signal_variance
        self.length_scale = length_scale
        self.noise_variance = noise_variance
        self.dist_tolerance_frac = dist_tolerance_frac
        self.max_horizon_factor = max_horizon_factor

    def _config(self) -> SkillConfig:
        ls = self.length_scale
        if isinstance(ls, (list, np.ndarray)):
            ls = tuple(float(v) for v in ls)
        kernel = KernelParams(signal_variance=self.signal_variance,
                              length_scales=ls,
                              noise_variance=self.noise_variance)
        return SkillConfig(window=self.window,
                           checkpoint_count=self.checkpoint_count,
                           sample_rate_hz=self.sample_rate_hz,
                           kernel=kernel,
                           dist_tolerance_frac=self.dist_tolerance_frac,
                           max_horizon_factor=self.max_horizon_factor)

    def _as_trajectory(self, X) -> Trajectory:
        if isinstance(X, Trajectory):
            return X
        return Trajectory.from_positions(np.asarray(X, dtype=float),
                                         self.sample_rate_hz)

    def fit(self, X, y=None):
        self.skill_ = learn_skill(self._as_trajectory(X), "skill",
                                  self._config())
        return self

    def _check_fitted(self):
        if not hasattr(self, "skill_"):
            raise NotFittedError("TrajectoryCompleter must be fitted first")

    def complete(self, X, dist_tolerance=None, max_horizon=None,
                 sigma_threshold=None) -> Rollout:
        self._check_fitted()
        return self.skill_.complete(self._as_trajectory(X),
                                    dist_tolerance=dist_tolerance,
                                    max_horizon=max_horizon,
                                    sigma_threshold=sigma_threshold)

    def predict(self, X) -> np.ndarray:
        """Completion positions for a prompt, shape (H, 2)."""
        return self.complete(X).positions
