"""Experiment harness: corpus runs, geometric transforms, and error reports.

A run learns each corpus shape from its clean demonstration, transforms the
demonstration to produce a prompt source, truncates and optionally perturbs
the prompt, then scores the canonicalized predictor against the plain
Cartesian baseline.  The error metric sums position errors against the
transformed reference over every index where a prediction exists: one-step
teacher-forced predictions over the prompt span and recursive rollout
predictions after it.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baseline import CartesianGPBaseline
from .geometry import Trajectory, to_polar
from .predictor import Rollout, teacher_forced_predictions
from .shapes import SHAPES, make_demo
from .skills import SkillConfig, learn_skill
from .trajio import write_rollout


class SpecError(ValueError):
    """Invalid experiment specification (maps to CLI exit code 2)."""


NOISE_AUTO_FRACTION = 0.005
FORMATS = ("table", "plotdata")


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one harness run."""

    shapes: tuple = tuple(SHAPES)
    transform: dict | None = None
    prompt_fraction: float = 0.4
    noise_sigma: float | str = 0.0
    seed: int = 0
    config: SkillConfig = field(default_factory=SkillConfig)

    def __post_init__(self):
        if not self.shapes:
            raise SpecError("spec error: shapes must be non-empty")
        for name in self.shapes:
            if name not in SHAPES:
                raise SpecError(
                    f"spec error: unknown shape {name!r}; available: {sorted(SHAPES)}"
                )
        if not (0.0 < self.prompt_fraction <= 1.0):
            raise SpecError("spec error: prompt_fraction must be in (0, 1]")
        if isinstance(self.noise_sigma, str):
            if self.noise_sigma != "auto":
                raise SpecError(
                    "spec error: noise_sigma must be a number in meters or 'auto'"
                )
        elif self.noise_sigma < 0:
            raise SpecError("spec error: noise_sigma must be non-negative")
        _validate_transform(self.transform)

    def as_dict(self) -> dict:
        return {"shapes": list(self.shapes),
                "transform": self.transform,
                "prompt_fraction": self.prompt_fraction,
                "noise_sigma": self.noise_sigma,
                "seed": self.seed,
                "config": self.config.as_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        try:
            config = (SkillConfig.from_dict(d["config"]) if "config" in d
                      else SkillConfig())
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"spec error: bad config block ({exc})") from exc
        known = {"shapes", "transform", "prompt_fraction", "noise_sigma",
                 "seed", "config"}
        extra = set(d) - known
        if extra:
            raise SpecError(f"spec error: unknown fields {sorted(extra)}")
        return cls(shapes=tuple(d.get("shapes", tuple(SHAPES))),
                   transform=d.get("transform"),
                   prompt_fraction=float(d.get("prompt_fraction", 0.4)),
                   noise_sigma=d.get("noise_sigma", 0.0),
                   seed=int(d.get("seed", 0)),
                   config=config)


def _validate_transform(transform) -> None:
    if transform is None:
        return
    if not isinstance(transform, dict) or len(transform) != 1:
        raise SpecError(
            "spec error: transform must be one of "
            "{'translate': [x, y]}, {'rotate': radians}, "
            "{'scale': s}, {'compose': [...]}"
        )
    kind, value = next(iter(transform.items()))
    if kind == "translate":
        if (not isinstance(value, (list, tuple)) or len(value) != 2
                or not all(isinstance(v, (int, float)) for v in value)):
            raise SpecError("spec error: translate needs a 2-vector [x, y]")
    elif kind == "rotate":
        if not isinstance(value, (int, float)):
            raise SpecError("spec error: rotate needs an angle in radians")
    elif kind == "scale":
        if not isinstance(value, (int, float)) or value <= 0:
            raise SpecError("spec error: scale needs a positive real")
    elif kind == "compose":
        if not isinstance(value, (list, tuple)):
            raise SpecError("spec error: compose needs a list of transforms")
        for part in value:
            _validate_transform(part)
    else:
        raise SpecError(f"spec error: unknown transform kind {kind!r}")


def apply_transform(traj: Trajectory, transform: dict | None) -> Trajectory:
    """Apply a spec transform (rotation/scale act about the first sample)."""
    if transform is None:
        return traj
    kind, value = next(iter(transform.items()))
    if kind == "translate":
        return traj.translated(np.asarray(value, dtype=float))
    if kind == "rotate":
        return traj.rotated_about_start(float(value))
    if kind == "scale":
        return traj.scaled_about_start(float(value))
    out = traj
    for part in value:
        out = apply_transform(out, part)
    return out


@dataclass(frozen=True)
class CaseResult:
    """One shape under one transform: errors, traces, and canonicalization."""

    shape: str
    transform: dict | None
    n_samples: int
    prompt_end: int
    error_geo: float
    error_base: float
    replay_geo: float
    rollout_geo: float
    replay_base: float
    rollout_base: float
    stop_reason: str
    stop_index: int
    scale_est: float
    rotation_est: float
    geo_h: np.ndarray
    geo_positions: np.ndarray
    geo_sigmas: np.ndarray
    base_h: np.ndarray
    base_positions: np.ndarray
    base_sigmas: np.ndarray
    wall_seconds: float

    def trace_dict(self, which: str) -> dict:
        h = self.geo_h if which == "geo" else self.base_h
        pos = self.geo_positions if which == "geo" else self.base_positions
        sig = self.geo_sigmas if which == "geo" else self.base_sigmas
        return {"h": [int(v) for v in h],
                "positions": [[float(x), float(y)] for x, y in pos],
                "sigmas": [float(v) for v in sig]}


@dataclass(frozen=True)
class EvalReport:
    spec: ExperimentSpec
    cases: tuple

    def as_dict(self) -> dict:
        """Deterministic serialization; wall-clock timings are excluded."""
        out_cases = []
        for c in self.cases:
            out_cases.append({
                "shape": c.shape,
                "transform": c.transform,
                "n_samples": c.n_samples,
                "prompt_end": c.prompt_end,
                "error_geo": float(c.error_geo),
                "error_base": float(c.error_base),
                "replay_geo": float(c.replay_geo),
                "rollout_geo": float(c.rollout_geo),
                "replay_base": float(c.replay_base),
                "rollout_base": float(c.rollout_base),
                "stop_reason": c.stop_reason,
                "stop_index": c.stop_index,
                "scale_est": float(c.scale_est),
                "rotation_est": float(c.rotation_est),
                "geo_trace": c.trace_dict("geo"),
                "base_trace": c.trace_dict("base"),
            })
        return {"spec": self.spec.as_dict(), "cases": out_cases}


def _sum_errors(ref_positions, pred_positions) -> float:
    paired = min(len(ref_positions), len(pred_positions))
    if paired == 0:
        return 0.0
    diffs = ref_positions[:paired] - pred_positions[:paired]
    return float(np.sum(np.linalg.norm(diffs, axis=1)))


def run_case(spec: ExperimentSpec, shape: str, case_index: int) -> CaseResult:
    config = spec.config
    w = config.window
    start = time.perf_counter()
    demo = make_demo(shape, config.sample_rate_hz)
    skill = learn_skill(demo, shape, config)
    base_model = CartesianGPBaseline(
        window=w, signal_variance=config.kernel.signal_variance,
        length_scale=config.kernel.length_scales,
        noise_variance=config.kernel.noise_variance).fit(demo)

    ref = apply_transform(demo, spec.transform)
    n = len(ref)
    n_prompt = int(round(spec.prompt_fraction * n))
    if n_prompt < w + 2:
        raise SpecError(
            f"spec error: prompt_fraction {spec.prompt_fraction} leaves "
            f"{n_prompt} samples for shape {shape!r}; need >= {w + 2}"
        )
    n_prompt = min(n_prompt, n)

    if spec.noise_sigma == "auto":
        r_max_ref = float(np.max(np.linalg.norm(ref.p - ref.p[0], axis=1)))
        sigma = NOISE_AUTO_FRACTION * r_max_ref
    else:
        sigma = float(spec.noise_sigma)
    rng = np.random.default_rng([spec.seed, case_index])
    prompt_p = ref.p[:n_prompt].copy()
    if sigma > 0:
        prompt_p += rng.normal(0.0, sigma, prompt_p.shape)
    prompt = Trajectory(ref.t[:n_prompt], prompt_p, ref.sample_rate_hz)
    k = n_prompt - 1

    # Canonicalized predictor: teacher-forced over the prompt span, then
    # recursive rollout to the stop trigger.
    prompt_polar = to_polar(prompt)
    geo_replay, geo_replay_sig = teacher_forced_predictions(
        skill.models, prompt, prompt_polar, skill.polar, skill.checkpoints,
        skill.r_max, w, return_std=True)
    roll = skill.complete(prompt)
    replay_geo = _sum_errors(ref.p[w:k + 1], geo_replay)
    rollout_geo = _sum_errors(ref.p[k + 1:], roll.positions)

    # Baseline: same structure, fixed horizon (remaining reference length).
    base_replay, base_replay_sig = base_model.teacher_forced(
        prompt, return_std=True)
    base_roll = base_model.rollout(prompt, n - 1 - k)
    replay_base = _sum_errors(ref.p[w:k + 1], base_replay)
    rollout_base = _sum_errors(ref.p[k + 1:], base_roll.positions)

    geo_pos = np.concatenate([geo_replay, roll.positions]) \
        if len(roll) else geo_replay
    geo_sig = np.concatenate([geo_replay_sig, roll.uncertainties]) \
        if len(roll) else geo_replay_sig
    base_pos = np.concatenate([base_replay, base_roll.positions]) \
        if len(base_roll) else base_replay
    base_sig = np.concatenate([base_replay_sig, base_roll.uncertainties]) \
        if len(base_roll) else base_replay_sig

    return CaseResult(
        shape=shape, transform=spec.transform, n_samples=n, prompt_end=k,
        error_geo=replay_geo + rollout_geo,
        error_base=replay_base + rollout_base,
        replay_geo=replay_geo, rollout_geo=rollout_geo,
        replay_base=replay_base, rollout_base=rollout_base,
        stop_reason=roll.stop_reason, stop_index=roll.l,
        scale_est=roll.scale, rotation_est=roll.rotation,
        geo_h=np.arange(w, w + len(geo_pos)),
        geo_positions=geo_pos, geo_sigmas=geo_sig,
        base_h=np.arange(w, w + len(base_pos)),
        base_positions=base_pos, base_sigmas=base_sig,
        wall_seconds=time.perf_counter() - start)


def run_experiment(spec: ExperimentSpec) -> EvalReport:
    cases = tuple(run_case(spec, shape, i)
                  for i, shape in enumerate(spec.shapes))
    return EvalReport(spec=spec, cases=cases)


def _case_stem(index: int, case: CaseResult) -> str:
    return f"case{index:03d}_{case.shape}"


def emit_report(report: EvalReport, out_dir, fmt: str) -> list:
    """Write formatted artifacts; returns the created paths.

    ``table`` writes one TSV summary row per case; ``plotdata`` writes one
    trace file per case per method in the rollout export format (teacher-
    forced span followed by the rollout, indexed on the reference clock).
    """
    if fmt not in FORMATS:
        raise SpecError(
            f"spec error: unknown format {fmt!r}; choose from {FORMATS}"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "table":
        lines = ["shape\ttransform\terror_geo\terror_base\tstop_index"
                 "\tscale\trotation"]
        for c in report.cases:
            transform = (json.dumps(c.transform, sort_keys=True)
                         if c.transform else "identity")
            lines.append("\t".join([
                c.shape, transform, repr(c.error_geo), repr(c.error_base),
                str(c.stop_index), repr(c.scale_est), repr(c.rotation_est)]))
        path = out / "summary.tsv"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
        return written
    for i, c in enumerate(report.cases):
        for which in ("geo", "base"):
            pos = c.geo_positions if which == "geo" else c.base_positions
            sig = c.geo_sigmas if which == "geo" else c.base_sigmas
            h = c.geo_h if which == "geo" else c.base_h
            roll = Rollout(positions=np.asarray(pos),
                           uncertainties=np.asarray(sig),
                           stop_reason=(c.stop_reason if which == "geo"
                                        else "max_horizon"),
                           l=int(h[-1]) if len(h) else c.prompt_end,
                           scale=c.scale_est if which == "geo" else 1.0,
                           rotation=c.rotation_est if which == "geo" else 0.0)
            path = out / f"{_case_stem(i, c)}__{which}.ndjson"
            write_rollout(path, roll)
            written.append(path)
    return written


def save_results(report: EvalReport, out_dir) -> Path:
    """Write the deterministic results record consumed by ``report``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "results.json"
    path.write_text(json.dumps(report.as_dict(), sort_keys=True, indent=1)
                    + "\n")
    return path


def load_results(out_dir) -> dict:
    path = Path(out_dir) / "results.json"
    if not path.exists():
        raise FileNotFoundError(f"no results.json in {out_dir}; run first")
    return json.loads(path.read_text())


def report_from_results(results: dict) -> EvalReport:
    """Rehydrate an EvalReport from a results.json dict."""
    spec = ExperimentSpec.from_dict(results["spec"])
    cases = []
    for c in results["cases"]:
        geo = c["geo_trace"]
        base = c["base_trace"]
        cases.append(CaseResult(
            shape=c["shape"], transform=c["transform"],
            n_samples=c["n_samples"], prompt_end=c["prompt_end"],
            error_geo=c["error_geo"], error_base=c["error_base"],
            replay_geo=c["replay_geo"], rollout_geo=c["rollout_geo"],
            replay_base=c["replay_base"], rollout_base=c["rollout_base"],
            stop_reason=c["stop_reason"], stop_index=c["stop_index"],
            scale_est=c["scale_est"], rotation_est=c["rotation_est"],
            geo_h=np.asarray(geo["h"], dtype=int),
            geo_positions=np.asarray(geo["positions"], dtype=float).reshape(-1, 2),
            geo_sigmas=np.asarray(geo["sigmas"], dtype=float),
            base_h=np.asarray(base["h"], dtype=int),
            base_positions=np.asarray(base["positions"], dtype=float).reshape(-1, 2),
            base_sigmas=np.asarray(base["sigmas"], dtype=float),
            wall_seconds=0.0))
    return EvalReport(spec=spec, cases=tuple(cases))
