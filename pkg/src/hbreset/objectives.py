"""Objective functions for the momentum-reset experiments.

Two concrete families: strongly convex quadratics with a controlled
spectrum, and full-batch logistic regression on synthetic data. Models
carry (mu, L) curvature metadata consumed by the rate certifiers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

Array = np.ndarray


@dataclass
class ObjectiveModel:
    """Evaluatable objective with gradient and curvature metadata.

    mu = 0 means the strong-convexity modulus is unknown or absent.
    minimizer/min_value are optional; when minimizer is given its
    gradient must vanish to within 1e-8 * max(1, ||q*||).
    """

    dim: int
    mu: float
    lipschitz: float
    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    minimizer: Optional[Array] = None
    min_value: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not (0.0 <= self.mu <= self.lipschitz):
            raise ValueError(f"need 0 <= mu <= L, got mu={self.mu}, L={self.lipschitz}")
        if self.minimizer is not None:
            self.minimizer = np.asarray(self.minimizer, dtype=float)
            gnorm = float(np.linalg.norm(self.gradient(self.minimizer)))
            bound = 1e-8 * max(1.0, float(np.linalg.norm(self.minimizer)))
            if gnorm > bound:
                raise ValueError(
                    f"gradient norm {gnorm:.3e} at claimed minimizer exceeds {bound:.3e}")

    def gap(self, q: Array) -> float:
        """phi(q) - phi*, or nan when the minimum is unknown."""
        if self.min_value is None:
            return float("nan")
        return float(self.value(q) - self.min_value)


@dataclass
class QuadraticSpec:
    """phi(q) = 1/2 q'Qq + b'q with Q symmetric positive definite."""

    Q: Array
    b: Array

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        n = self.b.shape[0]
        if self.Q.shape != (n, n):
            raise ValueError(f"Q shape {self.Q.shape} does not match b length {n}")
        scale = max(1.0, float(np.linalg.norm(self.Q)))
        if float(np.linalg.norm(self.Q - self.Q.T)) > 1e-12 * scale:
            raise ValueError("Q is not symmetric")

    @property
    def dim(self) -> int:
        return self.b.shape[0]


@dataclass
class LogisticSpec:
    """Full-batch logistic regression data: features theta (n x m), labels in {-1,+1}."""

    features: Array
    labels: Array

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be an n x m matrix")
        if self.labels.shape != (self.features.shape[1],):
            raise ValueError("labels length must equal the number of feature columns")
        if self.m < 1:
            raise ValueError("need at least one observation")
        if not np.all(np.abs(self.labels) == 1.0):
            raise ValueError("labels must be exactly +1 or -1")

    @property
    def dim(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]


def quad_eval_grad(spec: QuadraticSpec, q: Array) -> tuple[float, Array]:
    """Value 1/2 q'Qq + b'q and gradient Qq + b."""
    q = np.asarray(q, dtype=float)
    if q.shape != (spec.dim,):
        raise ValueError(f"point of dim {q.shape} does not match spec dim {spec.dim}")
    Qq = spec.Q @ q
    return 0.5 * float(q @ Qq) + float(spec.b @ q), Qq + spec.b


def quadratic_model(spec: QuadraticSpec) -> ObjectiveModel:
    """Wrap a quadratic spec as an ObjectiveModel with exact (mu, L) and minimizer."""
    eigs = np.linalg.eigvalsh(spec.Q)
    qstar = np.linalg.solve(spec.Q, -spec.b)
    value = lambda q: quad_eval_grad(spec, q)[0]
    grad = lambda q: quad_eval_grad(spec, q)[1]
    return ObjectiveModel(
        dim=spec.dim,
        mu=float(eigs[0]),
        lipschitz=float(eigs[-1]),
        value=value,
        gradient=grad,
        minimizer=qstar,
        min_value=float(value(qstar)),
    )


def gen_random_quadratic(n: int, L: float, seed: int) -> tuple[QuadraticSpec, ObjectiveModel]:
    """Random quadratic with eigenvalues of Q in [1, L] and extremes attained.

    Generate a standard-normal n x n matrix, take its SVD U S V', replace
    the singular values by [sqrt(L), uniform(1, sqrt(L))..., 1], and set
    Q = Qhat Qhat' with Qhat = U Shat V'. Then eig(Q) = Shat^2, so mu = 1
    and the Lipschitz constant is L. b is uniform on [-100, 100]^n.
    """
    if n < 2:
        raise ValueError("n >= 2 required: the recipe pins two singular values")
    if L < 1.0:
        raise ValueError("L >= 1 required")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, n))
    U, _, Vt = np.linalg.svd(raw)
    mid = np.sort(rng.uniform(1.0, np.sqrt(L), size=n - 2))[::-1]
    shat = np.concatenate(([np.sqrt(L)], mid, [1.0]))
    Qhat = U @ np.diag(shat) @ Vt
    Q = Qhat @ Qhat.T
    Q = 0.5 * (Q + Q.T)
    b = rng.uniform(-100.0, 100.0, size=n)
    spec = QuadraticSpec(Q=Q, b=b)
    model = quadratic_model(spec)
    return spec, model


def logistic_eval_grad(spec: LogisticSpec, q: Array) -> tuple[float, Array]:
    """Value sum_i log(1 + exp(-b_i theta_i'q)) and its gradient.

    Stable for |theta_i'q| up to 1e3 and beyond: log(1+exp(z)) is
    computed as max(z,0) + log1p(exp(-|z|)) via logaddexp.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (spec.dim,):
        raise ValueError(f"point of dim {q.shape} does not match spec dim {spec.dim}")
    z = -spec.labels * (spec.features.T @ q)
    value = float(np.logaddexp(0.0, z).sum())
    grad = -(spec.features @ (spec.labels * expit(z)))
    return value, grad


def logistic_lipschitz(spec: LogisticSpec) -> float:
    """Gradient Lipschitz estimate 1/4 * lambda_max(theta theta')."""
    gram = spec.features @ spec.features.T
    return 0.25 * float(np.linalg.eigvalsh(gram)[-1])


def logistic_model(spec: LogisticSpec, mu: float = 0.0) -> ObjectiveModel:
    """Wrap a logistic spec as an ObjectiveModel.

    mu defaults to 0 (unknown); the objective is convex but not strongly
    convex globally. No minimizer is attached here; experiment code pins
    one operationally via a long gradient-descent reference run.
    """
    value = lambda q: logistic_eval_grad(spec, q)[0]
    grad = lambda q: logistic_eval_grad(spec, q)[1]
    return ObjectiveModel(
        dim=spec.dim,
        mu=mu,
        lipschitz=logistic_lipschitz(spec),
        value=value,
        gradient=grad,
    )


def gen_logistic_dataset(n: int, m: int, seed: int) -> LogisticSpec:
    """Standard-normal features, labels uniform on {-1, +1}, deterministic per seed."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((n, m))
    labels = rng.integers(0, 2, size=m) * 2.0 - 1.0
    return LogisticSpec(features=theta, labels=labels)


def finite_diff_check(model: ObjectiveModel, q: Array, step: float) -> float:
    """Max relative error between the analytic gradient and central differences.

    Relative to max(1, ||grad||_inf) per coordinate.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    q = np.asarray(q, dtype=float)
    g = model.gradient(q)
    denom = max(1.0, float(np.max(np.abs(g))))
    worst = 0.0
    for i in range(model.dim):
        e = np.zeros(model.dim)
        e[i] = step
        hi = model.value(q + e)
        lo = model.value(q - e)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise FloatingPointError("non-finite objective value at probe point")
        fd = (hi - lo) / (2.0 * step)
        worst = max(worst, abs(fd - g[i]) / denom)
    return worst


# --- serialization -------------------------------------------------------

def quad_to_json(spec: QuadraticSpec) -> str:
    return json.dumps({"Q": spec.Q.tolist(), "b": spec.b.tolist()}, sort_keys=True)


def quad_from_json(text: str) -> QuadraticSpec:
    data = json.loads(text)
    return QuadraticSpec(Q=np.array(data["Q"], dtype=float), b=np.array(data["b"], dtype=float))


def logistic_to_json(spec: LogisticSpec) -> str:
    # theta stored column-major: a list of the m feature columns
    return json.dumps(
        {
            "theta": spec.features.T.tolist(),
            "labels": spec.labels.tolist(),
            "m": spec.m,
            "n": spec.dim,
        },
        sort_keys=True,
    )


def logistic_from_json(text: str) -> LogisticSpec:
    data = json.loads(text)
    theta = np.array(data["theta"], dtype=float).T
    if theta.shape != (data["n"], data["m"]):
        raise ValueError("theta shape does not match stored (n, m)")
    return LogisticSpec(features=theta, labels=np.array(data["labels"], dtype=float))
