"""Finite-dimensional setting for monotone operator equations B(u) = f.

The ambient space is R^n with the Euclidean inner product.  Vectors are 1-D
numpy arrays, operator derivatives are dense square matrices.  A
:class:`ProblemInstance` bundles the operator with its data vector and
whatever ground truth is available (analytic Jacobian, known minimal-norm
solution, derivative-norm bounds on a working ball), and this module holds
the numerical certificates for the standing assumptions: monotonicity of B
and control of the second-order Taylor remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "NumericalFailure",
    "ProblemInstance",
    "MonotonicityReport",
    "TaylorReport",
    "inner",
    "norm",
    "as_vector",
    "as_matrix",
    "apply_operator",
    "jacobian",
    "check_monotonicity",
    "taylor_remainder_check",
]


class NumericalFailure(RuntimeError):
    """A numerical procedure broke down (singular solve, stalled line
    search, step-size underflow, or an evaluator returning non-finite
    values)."""


def inner(u: np.ndarray, v: np.ndarray) -> float:
    """Euclidean inner product."""
    return float(np.dot(u, v))


def norm(u: np.ndarray) -> float:
    """Euclidean norm."""
    return float(np.linalg.norm(u))


def as_vector(x, dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally of fixed length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_matrix(m, dim: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square 2-D float array, optionally of fixed size."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has size {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ProblemInstance:
    """An operator equation B(u) = f on R^dim.

    Parameters
    ----------
    dim : int
        Space dimension.
    operator : callable
        Evaluator ``u -> B(u)``, mapping 1-D arrays to 1-D arrays.
    data : array
        Right-hand side f.
    jacobian : callable, optional
        Analytic derivative ``u -> B'(u)`` as a dense square matrix.  When
        absent, :func:`jacobian` falls back to central finite differences.
    known_solution : array, optional
        The minimal-norm solution of B(u) = f, when an oracle provides it.
    m1_bound, m2_bound : float, optional
        Upper bounds for the first and second derivative norms on the
        problem's working ball.  ``m2_bound`` gates the Taylor-remainder
        certificate and the residual-driven iteration schedule.
    is_linear, is_strictly_monotone : bool
        Structure flags used by the solution oracles.
    name : str
        Free-form label, echoed in reports.
    """

    dim: int
    operator: Callable[[np.ndarray], np.ndarray]
    data: np.ndarray
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    known_solution: Optional[np.ndarray] = None
    m1_bound: Optional[float] = None
    m2_bound: Optional[float] = None
    is_linear: bool = False
    is_strictly_monotone: bool = False
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        object.__setattr__(self, "data", as_vector(self.data, self.dim, "data"))
        if self.known_solution is not None:
            object.__setattr__(
                self,
                "known_solution",
                as_vector(self.known_solution, self.dim, "known_solution"),
            )
        for attr in ("m1_bound", "m2_bound"):
            val = getattr(self, attr)
            if val is not None and (not np.isfinite(val) or val < 0):
                raise ValueError(f"{attr} must be a finite nonnegative real")


def apply_operator(problem: ProblemInstance, u) -> np.ndarray:
    """Evaluate B(u), validating shapes and finiteness of the result."""
    u = as_vector(u, problem.dim, "u")
    out = np.asarray(problem.operator(u), dtype=float)
    if out.shape != (problem.dim,):
        raise ValueError(
            f"operator returned shape {out.shape}, expected ({problem.dim},)"
        )
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("operator returned non-finite values")
    return out


def jacobian(problem: ProblemInstance, u) -> np.ndarray:
    """Evaluate B'(u) as a dense matrix.

    Uses the problem's analytic Jacobian when supplied; otherwise central
    finite differences with per-column step ``sqrt(eps) * (1 + |u_j|)``.
    """
    u = as_vector(u, problem.dim, "u")
    if problem.jacobian is not None:
        mat = as_matrix(problem.jacobian(u), problem.dim, "jacobian")
        return mat
    n = problem.dim
    mat = np.empty((n, n))
    root_eps = np.sqrt(np.finfo(float).eps)
    for j in range(n):
        h = root_eps * (1.0 + abs(u[j]))
        up = u.copy()
        um = u.copy()
        up[j] += h
        um[j] -= h
        mat[:, j] = (apply_operator(problem, up) - apply_operator(problem, um)) / (2.0 * h)
    if not np.all(np.isfinite(mat)):
        raise NumericalFailure("finite-difference jacobian is non-finite")
    return mat


@dataclass(frozen=True)
class MonotonicityReport:
    min_pairing: float
    passed: bool
    trials: int


def _sample_ball(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    # uniform in the ball: uniform direction, radius scaled by U^(1/dim)
    x = rng.standard_normal(dim)
    r = np.linalg.norm(x)
    while r == 0.0:
        x = rng.standard_normal(dim)
        r = np.linalg.norm(x)
    return x / r * radius * rng.uniform() ** (1.0 / dim)


def check_monotonicity(
    problem: ProblemInstance, trials: int, seed: int, radius: float
) -> MonotonicityReport:
    """Sample pairs (u, v) in a ball and test <B(u) - B(v), u - v> >= 0.

    The tolerance per pair is ``1e-10 * (1 + |u - v|^2)``, absorbing the
    cancellation incurred when both operator values are large.  Returns the
    raw minimum pairing over all sampled pairs and whether every pair
    cleared its tolerance.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    min_pairing = np.inf
    passed = True
    for _ in range(trials):
        u = _sample_ball(rng, problem.dim, radius)
        v = _sample_ball(rng, problem.dim, radius)
        diff = u - v
        pairing = inner(apply_operator(problem, u) - apply_operator(problem, v), diff)
        tol = 1e-10 * (1.0 + inner(diff, diff))
        if pairing < min_pairing:
            min_pairing = pairing
        if pairing < -tol:
            passed = False
    return MonotonicityReport(min_pairing=float(min_pairing), passed=passed, trials=trials)


@dataclass(frozen=True)
class TaylorReport:
    remainder: float
    bound: float
    passed: bool


def taylor_remainder_check(problem: ProblemInstance, u, z) -> TaylorReport:
    """Certify |B(u+z) - B(u) - B'(u) z| <= 0.5 * m2_bound * |z|^2.

    Requires the problem to carry ``m2_bound``; the comparison allows a
    1e-8 relative slack on the bound side.
    """
    if problem.m2_bound is None:
        raise ValueError("taylor_remainder_check requires m2_bound on the problem")
    u = as_vector(u, problem.dim, "u")
    z = as_vector(z, problem.dim, "z")
    remainder = norm(
        apply_operator(problem, u + z)
        - apply_operator(problem, u)
        - jacobian(problem, u) @ z
    )
    bound = 0.5 * problem.m2_bound * inner(z, z)
    return TaylorReport(
        remainder=remainder, bound=bound, passed=remainder <= bound * (1.0 + 1e-8)
    )
