"""Predictor-corrector continuation along a segment in tensor space.

The parameter path is ``U(t) = (1 - t) * gamma * U_from + t * U_to`` for
``t`` from 0 to 1.  The predictor is an explicit Euler step on the
Davidenko equation ``J dx = -dF/dt * dt``; the corrector is Newton at the
trial ``t``.  A step is accepted when the corrector reaches the Newton
tolerance within the configured number of iterations, otherwise the step
is halved and retried; two consecutive acceptances double the step up to
the cap.

Many paths along the same segment are tracked together: state is kept per
path and the linear algebra is batched, which is also the layout the
monodromy loops use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import lu_solve
from .system import SingularSystem, SystemPoint
from .tensor import CTensor

__all__ = ["TrackStatus", "TrackerConfig", "TrackResult", "track", "track_many", "newton_refine"]

_DIVERGE_NORM = 1e10


class TrackStatus(enum.Enum):
    SUCCESS = "success"
    STEP_UNDERFLOW = "step_underflow"
    MAX_STEPS_EXCEEDED = "max_steps_exceeded"
    SINGULAR_JACOBIAN = "singular_jacobian"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class TrackerConfig:
    newton_tol: float = 1e-10
    max_corrector_iters: int = 3
    initial_step: float = 0.1
    min_step: float = 1e-8
    max_step: float = 0.25
    step_expand: float = 2.0
    step_shrink: float = 0.5
    max_steps: int = 10000
    endpoint_refine_iters: int = 5

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step <= self.max_step):
            raise ValueError("need 0 < min_step <= initial_step <= max_step")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if not (0 < self.step_shrink < 1 < self.step_expand):
            raise ValueError("need 0 < step_shrink < 1 < step_expand")


@dataclass(frozen=True)
class TrackResult:
    status: TrackStatus
    endpoint: SystemPoint
    endpoint_residual: float
    steps_taken: int

    @property
    def success(self) -> bool:
        return self.status is TrackStatus.SUCCESS


def _solve_batch(jac: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched linear solve; per-path fallback isolates singular members."""
    try:
        delta = np.linalg.solve(jac, rhs[..., None])[..., 0]
        ok = np.isfinite(delta).all(axis=1)
    except np.linalg.LinAlgError:
        delta = np.zeros_like(rhs)
        ok = np.zeros(jac.shape[0], dtype=bool)
        for b in range(jac.shape[0]):
            try:
                d = np.linalg.solve(jac[b], rhs[b])
            except np.linalg.LinAlgError:
                continue
            if np.isfinite(d).all():
                delta[b] = d
                ok[b] = True
    return delta, ok


def _max_abs_rows(a: np.ndarray) -> np.ndarray:
    return np.max(np.abs(a), axis=1)


def _newton_batch(sys: SingularSystem, pts: np.ndarray, u_rows: np.ndarray,
                  tol: float, iters: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Newton at fixed parameters; returns (points, residual norms, converged)."""
    pts = pts.copy()
    res = sys.residual_batch(pts, u_rows)
    rnorm = _max_abs_rows(res)
    conv = rnorm < tol
    dead = np.zeros(pts.shape[0], dtype=bool)
    for _ in range(iters):
        todo = np.flatnonzero(~conv & ~dead)
        if todo.size == 0:
            break
        jac = sys.jacobian_batch(pts[todo], u_rows[todo])
        delta, ok = _solve_batch(jac, -res[todo])
        dead[todo[~ok]] = True
        good = todo[ok]
        pts[good] += delta[ok]
        res[good] = sys.residual_batch(pts[good], u_rows[good])
        rnorm[good] = _max_abs_rows(res[good])
        conv[good] = rnorm[good] < tol
    return pts, rnorm, conv


def _polish_batch(sys: SingularSystem, pts: np.ndarray, u_flat: np.ndarray,
                  iters: int) -> tuple[np.ndarray, np.ndarray]:
    """Extra Newton iterations that never worsen the reported residual."""
    u_rows = np.broadcast_to(u_flat, (pts.shape[0], u_flat.size))
    best = pts.copy()
    best_res = _max_abs_rows(sys.residual_batch(best, u_rows))
    cur = pts.copy()
    for _ in range(iters):
        res = sys.residual_batch(cur, u_rows)
        jac = sys.jacobian_batch(cur, u_rows)
        delta, ok = _solve_batch(jac, -res)
        if not ok.any():
            break
        cur[ok] += delta[ok]
        rnorm = _max_abs_rows(sys.residual_batch(cur, u_rows))
        improved = ok & (rnorm < best_res)
        best[improved] = cur[improved]
        best_res[improved] = rnorm[improved]
        if not improved.any():
            break
    return best, best_res


def track_many(sys: SingularSystem, starts: Sequence[np.ndarray] | np.ndarray,
               u_from: CTensor, u_to: CTensor, gamma: complex,
               cfg: TrackerConfig) -> list[TrackResult]:
    """Track a batch of start points along one parameter segment.

    Each start must solve the system at the effective ``t = 0`` parameter
    ``gamma * u_from`` (singular values scale linearly with the tensor, so
    callers rescale them by ``gamma`` before handing points in).
    """
    pts = np.array(starts, dtype=np.complex128)
    if pts.ndim != 2 or pts.shape[1] != sys.num_vars:
        raise ValueError(f"start array must be (batch, {sys.num_vars})")
    nb = pts.shape[0]
    a0 = complex(gamma) * u_from.vectorize()
    du = u_to.vectorize() - a0

    t = np.zeros(nb)
    h = np.full(nb, cfg.initial_step)
    streak = np.zeros(nb, dtype=np.int64)
    steps = np.zeros(nb, dtype=np.int64)
    status = np.full(nb, -1, dtype=np.int64)  # -1 while tracking
    final_res = np.full(nb, np.inf)

    code = {
        TrackStatus.SUCCESS: 0,
        TrackStatus.STEP_UNDERFLOW: 1,
        TrackStatus.MAX_STEPS_EXCEEDED: 2,
        TrackStatus.SINGULAR_JACOBIAN: 3,
        TrackStatus.DIVERGED: 4,
    }
    by_code = {v: k for k, v in code.items()}

    while True:
        act = np.flatnonzero(status < 0)
        if act.size == 0:
            break
        over = act[steps[act] >= cfg.max_steps]
        if over.size:
            status[over] = code[TrackStatus.MAX_STEPS_EXCEEDED]
            act = np.flatnonzero(status < 0)
            if act.size == 0:
                break

        t_new = np.minimum(t[act] + h[act], 1.0)
        dt = t_new - t[act]

        # Euler predictor on the Davidenko equation at the current point.
        u_here = a0[None, :] + t[act, None] * du[None, :]
        jac = sys.jacobian_batch(pts[act], u_here)
        tan = sys.tangent_batch(pts[act], du)
        delta, ok = _solve_batch(jac, -tan * dt[:, None])
        if not ok.all():
            status[act[~ok]] = code[TrackStatus.SINGULAR_JACOBIAN]
            act = act[ok]
            if act.size == 0:
                continue
            t_new, dt, delta = t_new[ok], dt[ok], delta[ok]

        trial = pts[act] + delta
        u_trial = a0[None, :] + t_new[:, None] * du[None, :]
        trial, rnorm, conv = _newton_batch(
            sys, trial, u_trial, cfg.newton_tol, cfg.max_corrector_iters)

        diverged = conv & (_max_abs_rows(trial) > _DIVERGE_NORM)
        status[act[diverged]] = code[TrackStatus.DIVERGED]
        accepted = conv & ~diverged
        steps[act] += 1

        acc = act[accepted]
        pts[acc] = trial[accepted]
        t[acc] = t_new[accepted]
        streak[acc] += 1
        grow = acc[streak[acc] >= 2]
        h[grow] = np.minimum(h[grow] * cfg.step_expand, cfg.max_step)
        streak[grow] = 0

        rej = act[~accepted & ~diverged]
        h[rej] *= cfg.step_shrink
        streak[rej] = 0
        under = rej[h[rej] < cfg.min_step]
        status[under] = code[TrackStatus.STEP_UNDERFLOW]

        done = acc[t[acc] >= 1.0]
        if done.size:
            polished, pres = _polish_batch(
                sys, pts[done], u_to.vectorize(), cfg.endpoint_refine_iters)
            pts[done] = polished
            final_res[done] = pres
            good = pres < cfg.newton_tol
            status[done[good]] = code[TrackStatus.SUCCESS]
            status[done[~good]] = code[TrackStatus.DIVERGED]

    results = []
    for b in range(nb):
        results.append(TrackResult(
            status=by_code[int(status[b])],
            endpoint=sys.unpack(pts[b]),
            endpoint_residual=float(final_res[b]) if np.isfinite(final_res[b]) else float("inf"),
            steps_taken=int(steps[b]),
        ))
    return results


def track(sys: SingularSystem, start: SystemPoint, u_from: CTensor, u_to: CTensor,
          gamma: complex, cfg: TrackerConfig | None = None) -> TrackResult:
    """Track a single start point; see :func:`track_many`."""
    cfg = cfg or TrackerConfig()
    return track_many(sys, sys.pack(start)[None, :], u_from, u_to, gamma, cfg)[0]


def newton_refine(sys: SingularSystem, p: SystemPoint, u: CTensor,
                  tol: float = 1e-12, iters: int = 10) -> tuple[SystemPoint, float]:
    """Newton iteration at fixed parameters, reporting the final residual.

    Raises :class:`SingularMatrixError` when the Jacobian pivot check
    fails; otherwise always returns the last iterate, converged or not.
    """
    vec = sys.pack(p)
    u_flat = u.vectorize()
    res = sys.residual_batch(vec[None, :], u_flat)[0]
    rnorm = float(np.max(np.abs(res)))
    for _ in range(iters):
        if rnorm < tol:
            break
        jac = sys.jacobian_batch(vec[None, :], u_flat)[0]
        vec = vec + lu_solve(jac, -res)
        res = sys.residual_batch(vec[None, :], u_flat)[0]
        rnorm = float(np.max(np.abs(res)))
    return sys.unpack(vec), rnorm
