"""Damped regularized Newton iteration with per-step regularization.

One step is ``u_{n+1} = u_n - h_n (B'(u_n) + eps_n I)^{-1}
(B(u_n) + eps_n u_n - f)``.  With step sizes h_n in (0, 1] and a
regularization at or above twice the curvature constant times the gap to
the regularized root, the gap sequence ``g_n = |u_n - V_n|`` obeys the
contraction ``g_{n+1} <= (1 - 0.5 h_n) g_n + |V_{n+1} - V_n|``, which
:func:`verify_step_recursion` checks step by step against recorded roots.

Three schedules are provided.  The matched schedule ``eps_n = 2 c g_n``
is implicit (g_n depends on eps_n through the root) and needs a root
solve per step, so it is meant for verification at corpus scale; the
geometric schedule ``eps_n = max(eps_min, eps0 * q^n)`` is the practical
mode; a constant schedule completes the set for closed-form tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linsolve import reg_solve
from .problem import (
    NumericalFailure,
    ProblemInstance,
    apply_operator,
    as_vector,
    jacobian,
    norm,
)
from .regroot import RegRoot, solve_regularized

__all__ = [
    "StepRule",
    "Schedule",
    "IterationStep",
    "IterationHistory",
    "iterate_step",
    "run_iteration",
    "StepBoundRecord",
    "RecursionReport",
    "verify_step_recursion",
]

_MAX_FP_EVALS = 100
_FP_RTOL = 1e-10


def _check_h(h: float) -> float:
    h = float(h)
    if not (0.0 < h <= 1.0) or not np.isfinite(h):
        raise ValueError("step size h must lie in (0, 1]")
    return h


@dataclass(frozen=True)
class StepRule:
    """Step sizes h_n, either one constant or an explicit list.

    Constant rules are usually given through the contraction ratio p via
    ``constant_p``: h = 2 ln(p), and p in (1, sqrt(e)] keeps h in (0, 1].
    """

    h_constant: Optional[float] = None
    h_list: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if (self.h_constant is None) == (self.h_list is None):
            raise ValueError("exactly one of h_constant and h_list must be set")
        if self.h_constant is not None:
            _check_h(self.h_constant)
        else:
            if len(self.h_list) == 0:
                raise ValueError("explicit step list must be non-empty")
            for h in self.h_list:
                _check_h(h)

    @classmethod
    def constant_p(cls, p: float) -> "StepRule":
        if not (1.0 < p <= math.sqrt(math.e)):
            raise ValueError("contraction ratio p must lie in (1, sqrt(e)]")
        # p = sqrt(e) means h = 1 exactly; clamp the log round-trip
        return cls(h_constant=min(2.0 * math.log(p), 1.0))

    @classmethod
    def constant_h(cls, h: float) -> "StepRule":
        return cls(h_constant=float(h))

    @classmethod
    def explicit(cls, hs: Sequence[float]) -> "StepRule":
        return cls(h_list=tuple(float(h) for h in hs))

    def h_at(self, n: int) -> float:
        if self.h_constant is not None:
            return self.h_constant
        return self.h_list[n]

    @property
    def limit(self) -> Optional[int]:
        """Number of steps an explicit list can supply (None if unlimited)."""
        return None if self.h_list is None else len(self.h_list)


@dataclass(frozen=True)
class Schedule:
    """Rule for choosing eps_n at each step.

    ``constant`` holds one value.  ``geometric`` decays from eps0 by the
    ratio q each step, clamped from below by ``floor``.  ``matched``
    solves ``eps = 2 c g(eps)`` with ``g(eps) = |u_n - V_eps|`` and c
    half the problem's curvature bound; when that bound is zero (linear
    problems) the matched value degenerates to zero, so the floor must be
    positive and becomes the schedule.
    """

    kind: str
    epsilon: Optional[float] = None
    eps0: Optional[float] = None
    ratio: Optional[float] = None
    floor: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "geometric", "oracle"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not (self.floor >= 0.0) or not np.isfinite(self.floor):
            raise ValueError("floor must be a finite non-negative real")
        if self.kind == "constant":
            if self.epsilon is None or not (self.epsilon > 0) or not np.isfinite(self.epsilon):
                raise ValueError("constant schedule needs a positive finite epsilon")
        if self.kind == "geometric":
            if self.eps0 is None or not (self.eps0 > 0) or not np.isfinite(self.eps0):
                raise ValueError("geometric schedule needs a positive finite eps0")
            if self.ratio is None or not (0.0 < self.ratio < 1.0):
                raise ValueError("geometric schedule needs a ratio in (0, 1)")

    @classmethod
    def constant(cls, epsilon: float) -> "Schedule":
        return cls(kind="constant", epsilon=float(epsilon))

    @classmethod
    def geometric(cls, eps0: float, ratio: float, floor: float = 0.0) -> "Schedule":
        return cls(kind="geometric", eps0=float(eps0), ratio=float(ratio), floor=float(floor))

    @classmethod
    def oracle(cls, floor: float = 0.0) -> "Schedule":
        """The matched schedule eps_n = 2 c g_n; needs a root solve per step."""
        return cls(kind="oracle", floor=float(floor))


@dataclass(frozen=True)
class IterationStep:
    """Iterate n with the regularization chosen for it.

    ``h`` is the step size applied to move away from this iterate (None
    on the final row).  ``root``, ``gap`` and ``root_gap`` are populated
    when roots are tracked: gap is ``|u_n - V_n|`` and root_gap is
    ``|V_{n+1} - V_n|`` (None on the final row).
    """

    index: int
    u: np.ndarray
    epsilon: float
    h: Optional[float]
    residual: float
    root: Optional[np.ndarray] = None
    gap: Optional[float] = None
    root_gap: Optional[float] = None


@dataclass(frozen=True)
class IterationHistory:
    steps: list[IterationStep]
    converged: bool

    @property
    def final(self) -> np.ndarray:
        return self.steps[-1].u

    @property
    def gaps(self) -> Optional[np.ndarray]:
        if self.steps[0].gap is None:
            return None
        return np.array([s.gap for s in self.steps])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([s.residual for s in self.steps])


def iterate_step(
    problem: ProblemInstance,
    u_n: np.ndarray,
    eps_n: float,
    h_n: float,
    f_active=None,
) -> np.ndarray:
    """One damped regularized Newton step from u_n."""
    if not (eps_n > 0) or not np.isfinite(eps_n):
        raise ValueError("eps_n must be a positive finite real")
    _check_h(h_n)
    u_n = as_vector(u_n, problem.dim, "u_n")
    f = problem.data if f_active is None else as_vector(f_active, problem.dim, "f")
    res = apply_operator(problem, u_n) + eps_n * u_n - f
    return u_n - h_n * reg_solve(jacobian(problem, u_n), eps_n, res).solution


def _curvature_constant(problem: ProblemInstance) -> float:
    if problem.m2_bound is None:
        raise ValueError("matched schedule needs the problem's curvature bound")
    return 0.5 * problem.m2_bound


def _matched_epsilon(
    problem: ProblemInstance,
    u: np.ndarray,
    c: float,
    floor: float,
    warm_eps: Optional[float],
    warm_root: Optional[np.ndarray],
) -> RegRoot:
    """Resolve eps = max(2 c |u - V_eps|, floor) and return the root at it.

    The scalar map is iterated from a warm start with a bracketing
    bisection fallback, to relative tolerance 1e-10.  The returned
    :class:`RegRoot` carries the accepted epsilon.
    """
    if c == 0.0:
        if floor <= 0.0:
            raise ValueError(
                "matched schedule on a flat (zero-curvature) problem needs a "
                "positive floor"
            )
        return solve_regularized(problem, floor, init=warm_root)

    def gap_at(eps: float, init) -> tuple[float, RegRoot]:
        root = solve_regularized(problem, eps, init=init)
        return norm(u - root.v), root

    eps = warm_eps if warm_eps is not None else 1.0
    eps = max(eps, floor, 1e-300)
    lo = hi = None  # bracket: target > eps at lo, target < eps at hi
    init = warm_root
    for _ in range(_MAX_FP_EVALS):
        g, root = gap_at(eps, init)
        init = root.v
        target = max(2.0 * c * g, floor)
        if abs(target - eps) <= _FP_RTOL * eps:
            return root
        if target > eps:
            lo = eps
        else:
            hi = eps
        proposal = target
        if lo is not None and hi is not None:
            # the scalar map can hop across the fixed point indefinitely
            # (its slope is not a contraction), so once bracketed, bisect
            if (hi - lo) <= _FP_RTOL * hi:
                _, root = gap_at(0.5 * (lo + hi), init)
                return root
            proposal = 0.5 * (lo + hi)
        eps = proposal
    raise NumericalFailure(
        f"matched-regularization fixed point did not settle within "
        f"{_MAX_FP_EVALS} evaluations (last eps={eps:.6e})"
    )


def run_iteration(
    problem: ProblemInstance,
    schedule: Schedule,
    steps: StepRule,
    max_n: int,
    u0=None,
    f_active=None,
    stop_residual: Optional[float] = None,
    record_roots: bool = False,
) -> IterationHistory:
    """Run the iteration until the residual stops it or max_n is reached.

    The history records one row per visited iterate, schedule included,
    so gap sequences line up with the step bounds.  Roots are tracked
    automatically under the matched schedule and on request otherwise.
    The default stopping residual is ``1e-10 * (1 + |f|)``.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    if steps.limit is not None and steps.limit < max_n:
        raise ValueError(
            f"explicit step rule supplies {steps.limit} steps but max_n={max_n}"
        )
    f = problem.data if f_active is None else as_vector(f_active, problem.dim, "f")
    if stop_residual is None:
        stop_residual = 1e-10 * (1.0 + norm(f))
    track = record_roots or schedule.kind == "oracle"
    c = _curvature_constant(problem) if schedule.kind == "oracle" else None
    u = np.zeros(problem.dim) if u0 is None else as_vector(u0, problem.dim, "u0").copy()

    rows: list[dict] = []
    prev_eps: Optional[float] = None
    prev_root: Optional[np.ndarray] = None
    converged = False
    for n in range(max_n + 1):
        root: Optional[RegRoot] = None
        if schedule.kind == "oracle":
            root = _matched_epsilon(problem, u, c, schedule.floor, prev_eps, prev_root)
            eps_n = root.epsilon
        else:
            if schedule.kind == "constant":
                eps_n = schedule.epsilon
            else:
                eps_n = max(schedule.floor, schedule.eps0 * schedule.ratio**n)
            if track:
                root = solve_regularized(problem, eps_n, init=prev_root)
        res_vec = apply_operator(problem, u) + eps_n * u - f
        res_norm = norm(res_vec)
        rows.append(
            dict(
                index=n,
                u=u.copy(),
                epsilon=eps_n,
                h=None,
                residual=res_norm,
                root=None if root is None else root.v,
                gap=None if root is None else norm(u - root.v),
            )
        )
        if root is not None:
            prev_eps, prev_root = eps_n, root.v
        if res_norm <= stop_residual:
            converged = True
            break
        if n == max_n:
            break
        h_n = steps.h_at(n)
        rows[-1]["h"] = h_n
        u = u - h_n * reg_solve(jacobian(problem, u), eps_n, res_vec).solution

    out = []
    for i, row in enumerate(rows):
        root_gap = None
        if track and i + 1 < len(rows):
            root_gap = norm(rows[i + 1]["root"] - row["root"])
        out.append(IterationStep(root_gap=root_gap, **row))
    return IterationHistory(steps=out, converged=converged)


@dataclass(frozen=True)
class StepBoundRecord:
    """One step's contraction inequality, evaluated from recorded roots."""

    index: int
    gap_next: float
    bound: float
    epsilon: float
    curvature_threshold: float
    passed: bool


@dataclass(frozen=True)
class RecursionReport:
    records: list[StepBoundRecord]
    passed: bool


def verify_step_recursion(
    problem: ProblemInstance,
    history: IterationHistory,
    slack: float = 1e-8,
) -> RecursionReport:
    """Check the per-step gap contraction on a run with recorded roots.

    For each step n the inequality
    ``g_{n+1} <= (1 - 0.5 h_n) g_n + |V_{n+1} - V_n|`` must hold up to
    relative ``slack`` (plus a tiny absolute cushion for gaps at
    roundoff), and when the problem carries a positive curvature bound
    the schedule must satisfy ``eps_n >= 2 c g_n`` up to the same slack.
    """
    if len(history.steps) < 2:
        raise ValueError("recursion check needs at least one completed step")
    if history.steps[0].gap is None or history.steps[0].root_gap is None:
        raise ValueError("recursion check needs a run with recorded roots")
    c = 0.5 * problem.m2_bound if problem.m2_bound is not None else 0.0
    records: list[StepBoundRecord] = []
    all_ok = True
    for cur, nxt in zip(history.steps, history.steps[1:]):
        a_n = 0.5 * cur.h
        bound = (1.0 - a_n) * cur.gap + cur.root_gap
        threshold = 2.0 * c * cur.gap
        ok_bound = nxt.gap <= bound * (1.0 + slack) + 1e-13 * (1.0 + cur.gap)
        ok_sched = cur.epsilon >= threshold * (1.0 - slack)
        ok = ok_bound and ok_sched
        all_ok = all_ok and ok
        records.append(
            StepBoundRecord(
                index=cur.index,
                gap_next=nxt.gap,
                bound=bound,
                epsilon=cur.epsilon,
                curvature_threshold=threshold,
                passed=ok,
            )
        )
    return RecursionReport(records=records, passed=all_ok)
