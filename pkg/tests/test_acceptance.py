"""Acceptance suite: one test per release criterion, at fixed tolerances.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
on success).  Tolerances are pinned here, not configurable.
"""

import math
import time

import numpy as np
import pytest

from motiongp.evaluate import (ExperimentSpec, emit_report, run_experiment,
                               save_results)
from motiongp.geometry import Trajectory
from motiongp.gp import GPRegressor, ard_kernel
from motiongp.predictor import default_sigma_threshold
from motiongp.shapes import SHAPES, make_demo
from motiongp.skills import SkillLibrary, learn_skill

PROMPT_FRACTION = 0.4
CLASSIFY_FRACTION = 0.3
NOISE_FRACTION = 0.005


def report(name: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def prefix(traj, count):
    return Trajectory(traj.t[:count], traj.p[:count], traj.sample_rate_hz)


def fraction_prefix(demo, fraction):
    return prefix(demo, int(fraction * len(demo)))


@pytest.fixture(scope="module")
def skills():
    return {name: learn_skill(make_demo(name), name) for name in SHAPES}


def completion_rmse(skill, roll):
    demo = skill.demonstration
    count = int(PROMPT_FRACTION * len(demo))
    remainder = demo.p[count:]
    paired = min(len(remainder), len(roll))
    if paired == 0:
        return math.inf
    diffs = roll.positions[:paired] - remainder[:paired]
    return float(np.sqrt(np.mean(np.sum(diffs ** 2, axis=1))))


def test_gp_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_mean, worst_var = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(2, 201))
        X = rng.uniform(-1.0, 1.0, (n, 60))
        y = rng.normal(0.0, 1.0, n)
        gp = GPRegressor().fit(X, y)
        x_star = rng.uniform(-1.5, 1.5, 60)
        mean, var = gp.predict(x_star, return_var=True)
        gram = ard_kernel(X, X, gp.params_)
        inv = np.linalg.inv(gram + 0.01 * np.eye(n))
        k_star = ard_kernel(np.atleast_2d(x_star), X, gp.params_)[0]
        worst_mean = max(worst_mean, abs(mean - k_star @ inv @ y))
        worst_var = max(worst_var,
                        abs(var - (1.0 - k_star @ inv @ k_star)))
    elapsed = time.perf_counter() - start
    report("GP oracle equivalence (100 problems, d=60, tol 1e-8, <30s)",
           worst_mean <= 1e-8 and worst_var <= 1e-8 and elapsed < 30.0,
           f"mean_err={worst_mean:.2e} var_err={worst_var:.2e} "
           f"elapsed={elapsed:.1f}s")


def test_exact_translation_invariance(skills):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for name, skill in skills.items():
        base_prompt = fraction_prefix(skill.demonstration, PROMPT_FRACTION)
        base = skill.complete(base_prompt)
        for _ in range(10):
            offset = rng.uniform(-10.0, 10.0, 2)
            moved = skill.complete(base_prompt.translated(offset))
            assert len(moved) == len(base), f"{name}: rollout length changed"
            err = np.max(np.linalg.norm(
                moved.positions - (base.positions + offset), axis=1))
            worst = max(worst, err)
    elapsed = time.perf_counter() - start
    report("Exact translation invariance (5 shapes x 10 offsets, 1e-9 m)",
           worst <= 1e-9 and elapsed < 60.0,
           f"worst={worst:.2e} m elapsed={elapsed:.1f}s")


def test_rotation_equivariance(skills):
    worst = 0.0
    for name, skill in skills.items():
        base_prompt = fraction_prefix(skill.demonstration, PROMPT_FRACTION)
        base = skill.complete(base_prompt)
        origin = skill.demonstration.p[0]
        for deg in (30.0, -30.0, 90.0, -90.0, 180.0):
            phi = math.radians(deg)
            rotated = skill.complete(base_prompt.rotated_about_start(phi))
            assert len(rotated) == len(base), f"{name}: length changed at {deg}"
            c, s = math.cos(phi), math.sin(phi)
            R = np.array([[c, -s], [s, c]])
            expected = origin + (base.positions - origin) @ R.T
            err = np.max(np.linalg.norm(rotated.positions - expected, axis=1))
            worst = max(worst, err / skill.r_max)
    report("Rotation equivariance (+-30/+-90/180 deg, 1e-6 r_max)",
           worst <= 1e-6, f"worst={worst:.2e} relative")


def test_scale_equivariance(skills):
    worst_pos, worst_lam = 0.0, 0.0
    for name, skill in skills.items():
        base_prompt = fraction_prefix(skill.demonstration, PROMPT_FRACTION)
        base = skill.complete(base_prompt)
        origin = skill.demonstration.p[0]
        for s in (0.5, 0.8, 1.5, 2.0):
            scaled = skill.complete(base_prompt.scaled_about_start(s))
            worst_lam = max(worst_lam, abs(scaled.scale - s))
            assert len(scaled) == len(base), f"{name}: length changed at {s}"
            expected = origin + s * (base.positions - origin)
            err = np.max(np.linalg.norm(scaled.positions - expected, axis=1))
            worst_pos = max(worst_pos, err / (s * skill.r_max))
    report("Scale equivariance (s in {0.5,0.8,1.5,2}, 1e-6)",
           worst_pos <= 1e-6 and worst_lam <= 1e-6,
           f"worst_pos={worst_pos:.2e} worst_lambda={worst_lam:.2e}")


def test_baseline_failure_reproduction(skills):
    worst_ratio = math.inf
    for name, skill in skills.items():
        demo = skill.demonstration
        bbox = demo.p.max(axis=0) - demo.p.min(axis=0)
        offset = 5.0 * np.linalg.norm(bbox)
        spec = ExperimentSpec(shapes=(name,), prompt_fraction=PROMPT_FRACTION,
                              transform={"translate": [offset, offset]},
                              noise_sigma=0.0, seed=11)
        case = run_experiment(spec).cases[0]
        ratio = case.error_base / max(case.error_geo, 1e-12)
        worst_ratio = min(worst_ratio, ratio)
    report("Baseline failure at >=5x bbox translation (>=10x error)",
           worst_ratio >= 10.0, f"min ratio={worst_ratio:.1f}x")


def test_in_distribution_completion(skills):
    worst_rel = 0.0
    all_triggered = True
    for name, skill in skills.items():
        roll = skill.complete(
            fraction_prefix(skill.demonstration, PROMPT_FRACTION))
        all_triggered &= roll.stop_reason == "triggered"
        worst_rel = max(worst_rel, completion_rmse(skill, roll) / skill.r_max)
    report("In-distribution completion (RMSE <= 5% r_max, triggered stop)",
           all_triggered and worst_rel <= 0.05,
           f"worst RMSE={100 * worst_rel:.2f}% all_triggered={all_triggered}")


def test_prompt_noise_robustness(skills):
    worst_rate = 1.0
    for name, skill in skills.items():
        demo = skill.demonstration
        count = int(PROMPT_FRACTION * len(demo))
        sigma = NOISE_FRACTION * skill.r_max
        good = 0
        for trial in range(50):
            rng = np.random.default_rng([trial, sum(map(ord, name))])
            noisy = demo.p[:count] + rng.normal(0.0, sigma, (count, 2))
            roll = skill.complete(
                Trajectory(demo.t[:count], noisy, demo.sample_rate_hz))
            if completion_rmse(skill, roll) <= 0.10 * skill.r_max:
                good += 1
        worst_rate = min(worst_rate, good / 50.0)
    report("Prompt-noise robustness (sigma=0.005 r_max, >=90% of 50 trials)",
           worst_rate >= 0.90, f"worst success rate={100 * worst_rate:.0f}%")


def test_skill_classification():
    start = time.perf_counter()
    names = ("circle", "s_curve", "spiral")
    library = SkillLibrary()
    for name in names:
        library.learn(make_demo(name), name)
    transforms = {
        "identity": lambda p, rng: p,
        "translate": lambda p, rng: p.translated(rng.uniform(-5.0, 5.0, 2)),
        "rotate45": lambda p, rng: p.rotated_about_start(math.radians(45.0)),
        "scale1.5": lambda p, rng: p.scaled_about_start(1.5),
    }
    total = correct = 0
    min_margin = math.inf
    for name in names:
        demo = make_demo(name)
        sigma = NOISE_FRACTION * library.get(name).r_max
        count = int(CLASSIFY_FRACTION * len(demo))
        for tname, tf in transforms.items():
            for trial in range(50):
                rng = np.random.default_rng(
                    [trial, sum(map(ord, name + tname))])
                p = tf(prefix(demo, count), rng)
                noisy = Trajectory(
                    p.t, p.p + rng.normal(0.0, sigma, p.p.shape),
                    p.sample_rate_hz)
                result = library.classify(noisy)
                total += 1
                if result.selected == name and result.margin > 0:
                    correct += 1
                    min_margin = min(min_margin, result.margin)
    elapsed = time.perf_counter() - start
    report("Skill classification (600 trials, 100% correct, margin>0, <2min)",
           correct == total and elapsed < 120.0,
           f"{correct}/{total} min_margin={min_margin:.4f} "
           f"elapsed={elapsed:.1f}s")


def test_event_trigger_sanity(skills):
    monotone = True
    capped = True
    grows = True
    for name, skill in skills.items():
        demo = skill.demonstration
        prompt = fraction_prefix(demo, PROMPT_FRACTION)
        stops = []
        for frac in (0.02, 0.05, 0.1, 0.2, 0.5):
            roll = skill.complete(prompt,
                                  dist_tolerance=frac * skill.r_max)
            stops.append(roll.l if roll.stop_reason == "triggered"
                         else math.inf)
            capped &= len(roll) <= int(skill.config.max_horizon_factor
                                       * len(demo))
        monotone &= all(a >= b for a, b in zip(stops, stops[1:]))
        horizon = 5 * len(demo)
        free_run = skill.complete(prompt, dist_tolerance=1e-12,
                                  max_horizon=horizon)
        capped &= len(free_run) <= horizon
        threshold = default_sigma_threshold(skill.models)
        grows &= bool(np.any(free_run.uncertainties >= threshold))
    report("Event-trigger sanity (monotone stop, capped, uncertainty grows)",
           monotone and capped and grows,
           f"monotone={monotone} capped={capped} grows={grows}")


def test_full_harness_determinism(tmp_path):
    spec = ExperimentSpec(shapes=tuple(SHAPES),
                          prompt_fraction=PROMPT_FRACTION,
                          noise_sigma="auto", seed=31)
    blobs = []
    for run_dir in ("one", "two"):
        out = tmp_path / run_dir
        rep = run_experiment(spec)
        save_results(rep, out)
        emit_report(rep, out, "table")
        emit_report(rep, out, "plotdata")
        files = sorted(p.name for p in out.iterdir())
        blobs.append({name: (out / name).read_bytes() for name in files})
    report("Full-harness determinism (byte-identical reports)",
           blobs[0] == blobs[1],
           f"{len(blobs[0])} artifacts compared")
