"""Exact Gaussian-process regression with an ARD squared-exponential kernel.

Hyperparameters are fixed by the caller (no marginal-likelihood optimization):
the feature pipeline already scales inputs into unit ranges, so unit length
scales are a sensible default.  Training factorizes the noisy Gram matrix
once; prediction reuses the Cholesky factor for both the posterior mean and
variance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

JITTER = 1e-8


@dataclass(frozen=True)
class KernelParams:
    """ARD squared-exponential hyperparameters.

    ``length_scales`` may be a scalar (broadcast over input dimensions) or a
    per-dimension sequence.  ``noise_variance`` is the observation noise added
    to the Gram diagonal.
    """

    signal_variance: float = 1.0
    length_scales: float | tuple = 1.0
    noise_variance: float = 0.01

    def __post_init__(self):
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if not self.noise_variance >= 0:
            raise ValueError("noise_variance must be non-negative")
        scales = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        if np.any(scales <= 0):
            raise ValueError("length_scales must be positive")
        if scales.ndim > 1:
            raise ValueError("length_scales must be scalar or 1-D")

    def scales_for_dim(self, d: int) -> np.ndarray:
        """Per-dimension length scales, broadcast to input dimension d."""
        scales = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        if scales.shape[0] == 1:
            return np.full(d, scales[0])
        if scales.shape[0] != d:
            raise ValueError(
                f"shape error: {scales.shape[0]} length scales for {d}-dim inputs"
            )
        return scales.copy()

    def as_dict(self) -> dict:
        scales = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        ls = float(scales[0]) if scales.shape[0] == 1 else [float(v) for v in scales]
        return {"signal_variance": float(self.signal_variance),
                "length_scales": ls,
                "noise_variance": float(self.noise_variance)}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelParams":
        ls = d["length_scales"]
        return cls(signal_variance=d["signal_variance"],
                   length_scales=tuple(ls) if isinstance(ls, (list, tuple)) else ls,
                   noise_variance=d["noise_variance"])


def ard_kernel(x, x2, params: KernelParams) -> np.ndarray:
    """Evaluate the kernel between two points or two stacks of points.

    Returns a scalar for 1-D inputs and an (n, m) matrix for 2-D inputs.
    """
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    scalar = x.ndim == 1 and x2.ndim == 1
    xa, xb = np.atleast_2d(x), np.atleast_2d(x2)
    if xa.shape[1] != xb.shape[1]:
        raise ValueError(f"shape error: {xa.shape[1]}-dim vs {xb.shape[1]}-dim inputs")
    scales = params.scales_for_dim(xa.shape[1])
    d2 = cdist(xa / scales, xb / scales, metric="sqeuclidean")
    k = params.signal_variance * np.exp(-0.5 * d2)
    return float(k[0, 0]) if scalar else k


class GPRegressor(BaseEstimator):
    """Exact GP regression with fixed ARD squared-exponential hyperparameters.

    Parameters
    ----------
    signal_variance : float
        Kernel amplitude (prior variance at zero distance).
    length_scale : float or sequence
        Length scale(s); a scalar is broadcast over input dimensions.
    noise_variance : float
        Observation noise variance added to the Gram diagonal.

    After ``fit``, the factor ``L_`` satisfies ``L_ @ L_.T == K + noise*I``
    (up to the one-shot jitter retry) and ``alpha_`` solves that system
    against the targets.
    """

    def __init__(self, signal_variance=1.0, length_scale=1.0, noise_variance=0.01):
        self.signal_variance = signal_variance
        self.length_scale = length_scale
        self.noise_variance = noise_variance

    def _params(self) -> KernelParams:
        ls = self.length_scale
        if isinstance(ls, np.ndarray):
            ls = tuple(float(v) for v in ls)
        elif isinstance(ls, (list, tuple)):
            ls = tuple(float(v) for v in ls)
        return KernelParams(signal_variance=self.signal_variance,
                            length_scales=ls,
                            noise_variance=self.noise_variance)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2:
            raise ValueError("shape error: X must be 2-D (n_samples, n_features)")
        if y.shape != (X.shape[0],):
            raise ValueError("shape error: y must be (n_samples,)")
        if X.shape[0] < 1:
            raise ValueError("need at least one training pair")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("numeric error: non-finite training data")
        params = self._params()
        gram = ard_kernel(X, X, params)
        noisy = gram + params.noise_variance * np.eye(X.shape[0])
        try:
            L = cholesky(noisy, lower=True)
        except np.linalg.LinAlgError:
            # Duplicate rows with zero noise make the Gram singular; one
            # jitter retry keeps stationary-prompt training usable.
            try:
                L = cholesky(noisy + JITTER * np.eye(X.shape[0]), lower=True)
            except np.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError(
                    "singular Gram matrix; increase noise variance"
                ) from exc
        self.X_ = X.copy()
        self.y_ = y.copy()
        self.params_ = params
        self.L_ = L
        self.alpha_ = cho_solve((L, True), y)
        self.variance_clamp_count_ = 0
        return self

    def _check_fitted(self):
        if not hasattr(self, "alpha_"):
            raise NotFittedError("GPRegressor must be fitted before predicting")

    def predict(self, X, return_std=False, return_var=False):
        """Posterior mean at X; optionally the std or variance too.

        Raw variances in (-1e-10, 0) are numerical noise: they are clamped to
        zero and counted on ``variance_clamp_count_``.
        """
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.X_.shape[1]:
            raise ValueError(
                f"shape error: expected {self.X_.shape[1]}-dim inputs, got {X.shape[1]}"
            )
        if not np.all(np.isfinite(X)):
            raise ValueError("numeric error: non-finite prediction inputs")
        k_star = ard_kernel(X, self.X_, self.params_)
        mean = k_star @ self.alpha_
        if not (return_std or return_var):
            return mean[0] if single else mean
        v = solve_triangular(self.L_, k_star.T, lower=True)
        var = self.params_.signal_variance - np.sum(v * v, axis=0)
        neg = var < 0.0
        if np.any(neg):
            self.variance_clamp_count_ += int(np.count_nonzero(neg))
            if np.any(var < -1e-10):
                warnings.warn("posterior variance fell below -1e-10; clamped",
                              RuntimeWarning, stacklevel=2)
            var = np.where(neg, 0.0, var)
        out = np.sqrt(var) if return_std else var
        if single:
            return mean[0], out[0]
        return mean, out


class MultiOutputGP(BaseEstimator):
    """Independent GP heads over shared inputs, one per target column."""

    def __init__(self, signal_variance=1.0, length_scale=1.0, noise_variance=0.01):
        self.signal_variance = signal_variance
        self.length_scale = length_scale
        self.noise_variance = noise_variance

    def fit(self, X, Y):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError("shape error: Y must be 2-D (n_samples, n_outputs)")
        self.estimators_ = []
        for j in range(Y.shape[1]):
            gp = GPRegressor(signal_variance=self.signal_variance,
                             length_scale=self.length_scale,
                             noise_variance=self.noise_variance)
            self.estimators_.append(gp.fit(X, Y[:, j]))
        return self

    def _check_fitted(self):
        if not hasattr(self, "estimators_"):
            raise NotFittedError("MultiOutputGP must be fitted before predicting")

    def predict(self, X, return_std=False):
        """Stacked posterior means (n, k); stds are per-head standard deviations."""
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        outs = [gp.predict(np.atleast_2d(X), return_std=return_std)
                for gp in self.estimators_]
        if return_std:
            mean = np.column_stack([m for m, _ in outs])
            std = np.column_stack([s for _, s in outs])
            return (mean[0], std[0]) if single else (mean, std)
        mean = np.column_stack(outs)
        return mean[0] if single else mean


RECORD_VERSION = 1


def gp_to_record(model: MultiOutputGP) -> dict:
    """Self-describing model record: hyperparameters plus training data.

    Factorizations are recomputed on load, so the record stays portable and
    exactly reproducible.
    """
    model._check_fitted()
    first = model.estimators_[0]
    return {
        "version": RECORD_VERSION,
        "params": first.params_.as_dict(),
        "inputs": first.X_.tolist(),
        "targets": [gp.y_.tolist() for gp in model.estimators_],
    }


def gp_from_record(record: dict) -> MultiOutputGP:
    if record.get("version") != RECORD_VERSION:
        raise ValueError(
            f"incompatible model record version: {record.get('version')!r}"
        )
    params = KernelParams.from_dict(record["params"])
    X = np.asarray(record["inputs"], dtype=float)
    Y = np.column_stack([np.asarray(y, dtype=float) for y in record["targets"]])
    model = MultiOutputGP(signal_variance=params.signal_variance,
                          length_scale=params.length_scales,
                          noise_variance=params.noise_variance)
    return model.fit(X, Y)
