"""Monodromy collection of all singular tuples of a tensor.

One seeded start pair is tracked to the target tensor, then the known
solutions are carried around triangle loops through pairs of fresh random
tensors until the count predicted by the format is reached or the loops
stall.  Triangle loops with fresh randomness per loop give good coverage
of the permutation action; each segment carries its own random unit
``gamma`` so straight-line paths miss the discriminant with probability
one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .formats import classify, ed_degree
from .system import SingularSystem, SystemPoint, start_pair
from .tensor import CTensor, Format, _rng, random_tensor, rank_one
from .tracking import TrackerConfig, track_many

__all__ = [
    "SingularTuple",
    "SolutionSet",
    "SolveError",
    "solve_singular_tuples",
    "check_specialization",
]

logger = logging.getLogger(__name__)

DEDUP_TOL = 1e-6
LAMBDA_AGREEMENT_TOL = 1e-8


class SolveError(RuntimeError):
    """Raised when no path from the start system reaches the target."""


@dataclass(frozen=True)
class SingularTuple:
    """One chart-normalized singular tuple with its singular values.

    ``x`` holds the k chart vectors (leading coordinate exactly 1), ``lam``
    the k singular values, ``residual`` the max-norm system residual, and
    ``rank_one`` the cached tensorization of the tuple.
    """

    x: tuple[np.ndarray, ...]
    lam: np.ndarray
    residual: float
    rank_one: CTensor

    @classmethod
    def from_point(cls, point: SystemPoint, residual: float) -> "SingularTuple":
        xs = []
        for v in point.x:
            v = np.array(v)
            v[0] = 1.0
            v.setflags(write=False)
            xs.append(v)
        products = point.lam * np.array([v @ v for v in xs])
        scale = float(np.max(np.abs(products)))
        spread = float(np.max(np.abs(products - products[0])))
        if scale > 0 and spread > LAMBDA_AGREEMENT_TOL * scale:
            raise ValueError(
                f"singular values disagree: relative spread {spread / scale:.3e}"
            )
        return cls(tuple(xs), point.lam, float(residual), rank_one(xs))

    def as_point(self) -> SystemPoint:
        return SystemPoint(self.x, self.lam)

    def invariant_products(self) -> np.ndarray:
        """The chart-invariant values ``lam_i * (x_i . x_i)`` (all equal)."""
        return self.lam * np.array([v @ v for v in self.x])


@dataclass
class SolutionSet:
    """Deduplicated singular tuples of one tensor, with provenance."""

    fmt: Format
    ed: int
    seed: int
    tuples: list[SingularTuple] = field(default_factory=list)
    loops_run: int = 0
    complete: bool = False
    path_failures: int = 0
    rejected_tuples: int = 0

    def __len__(self) -> int:
        return len(self.tuples)

    def _chart_rows(self) -> np.ndarray:
        return np.array([np.concatenate(t.x) for t in self.tuples])

    def dedup_insert(self, point: SystemPoint, residual: float) -> bool:
        """Insert a refined candidate unless it repeats a known tuple.

        Distinctness is max-norm distance >= 1e-6 between the concatenated
        chart vectors; chart coordinates are the sharper test, two distinct
        tuples only get nearby tensorizations in degenerate situations.
        """
        cand = np.concatenate(point.x)
        if self.tuples:
            dist = np.min(np.max(np.abs(self._chart_rows() - cand[None, :]), axis=1))
            if dist < DEDUP_TOL:
                return False
        try:
            tup = SingularTuple.from_point(point, residual)
        except ValueError as exc:
            logger.warning("rejecting candidate tuple: %s", exc)
            self.rejected_tuples += 1
            return False
        self.tuples.append(tup)
        return True

    def to_json_dict(self) -> dict:
        return {
            "format": list(self.fmt.dims),
            "seed": self.seed,
            "ed": self.ed,
            "complete": self.complete,
            "loops_run": self.loops_run,
            "path_failures": self.path_failures,
            "tuples": [
                {
                    "x_re": [v.real.tolist() for v in t.x],
                    "x_im": [v.imag.tolist() for v in t.x],
                    "lambda_re": t.lam.real.tolist(),
                    "lambda_im": t.lam.imag.tolist(),
                    "residual": t.residual,
                }
                for t in self.tuples
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SolutionSet":
        fmt = Format(d["format"])
        out = cls(fmt=fmt, ed=int(d["ed"]), seed=int(d["seed"]),
                  loops_run=int(d.get("loops_run", 0)),
                  complete=bool(d["complete"]),
                  path_failures=int(d.get("path_failures", 0)))
        for rec in d["tuples"]:
            xs = tuple(
                np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
                for re, im in zip(rec["x_re"], rec["x_im"])
            )
            lam = np.asarray(rec["lambda_re"], dtype=float) + 1j * np.asarray(
                rec["lambda_im"], dtype=float)
            out.tuples.append(SingularTuple.from_point(SystemPoint(xs, lam), rec["residual"]))
        return out


def _unit_gamma(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def _scale_lambdas(sys: SingularSystem, pts: np.ndarray, gamma: complex) -> np.ndarray:
    out = pts.copy()
    out[:, sys.lam_offset:] *= gamma
    return out


def _track_segment(sys: SingularSystem, pts: np.ndarray, u_from: CTensor,
                   u_to: CTensor, rng: np.random.Generator,
                   cfg: TrackerConfig) -> tuple[np.ndarray, int]:
    """Track points (solutions at u_from) to u_to; drops failed paths."""
    gamma = _unit_gamma(rng)
    results = track_many(sys, _scale_lambdas(sys, pts, gamma), u_from, u_to, gamma, cfg)
    good = [sys.pack(r.endpoint) for r in results if r.success]
    failures = len(results) - len(good)
    if not good:
        return np.zeros((0, sys.num_vars), dtype=np.complex128), failures
    return np.array(good), failures


def solve_singular_tuples(u: CTensor, seed: int = 0,
                          config: TrackerConfig | None = None,
                          stall_limit: int = 10,
                          start_attempts: int = 5) -> SolutionSet:
    """Collect the singular tuples of ``u`` by continuation and monodromy.

    Builds the seeded start pair, tracks it to ``u``, then runs triangle
    monodromy loops through fresh random tensors until the generic count
    for the format is reached or ``stall_limit`` consecutive loops add
    nothing.  An incomplete set is returned with ``complete=False`` and a
    logged warning, not raised; only a dead start path raises
    :class:`SolveError`.
    """
    cfg = config or TrackerConfig()
    fmt = u.fmt
    sys = SingularSystem(fmt)
    ed = ed_degree(fmt)
    rng = _rng(seed)
    sols = SolutionSet(fmt=fmt, ed=ed, seed=seed)

    first = None
    for _ in range(start_attempts):
        u0, p0 = start_pair(fmt, rng)
        gamma = _unit_gamma(rng)
        start_vec = _scale_lambdas(sys, sys.pack(p0)[None, :], gamma)
        result = track_many(sys, start_vec, u0, u, gamma, cfg)[0]
        if result.success:
            first = result
            break
        sols.path_failures += 1
        logger.warning("start path failed with status %s; retrying", result.status.value)
    if first is None:
        raise SolveError(
            f"start path failed {start_attempts} times for format {fmt}; "
            "the target tensor may be degenerate"
        )
    sols.dedup_insert(first.endpoint, first.endpoint_residual)

    stall = 0
    while len(sols) < ed and stall < stall_limit:
        sols.loops_run += 1
        u1 = random_tensor(fmt, rng)
        u2 = random_tensor(fmt, rng)
        pts = np.array([sys.pack(t.as_point()) for t in sols.tuples])
        for leg_from, leg_to in ((u, u1), (u1, u2), (u2, u)):
            if pts.shape[0] == 0:
                break
            pts, failures = _track_segment(sys, pts, leg_from, leg_to, rng, cfg)
            sols.path_failures += failures
        inserted = 0
        if pts.shape[0]:
            u_rows = np.broadcast_to(u.vectorize(), (pts.shape[0], fmt.size))
            res = np.max(np.abs(sys.residual_batch(pts, u_rows)), axis=1)
            for vec, r in zip(pts, res):
                if r < cfg.newton_tol and sols.dedup_insert(sys.unpack(vec), float(r)):
                    inserted += 1
                    if len(sols) == ed:
                        break
        stall = 0 if inserted else stall + 1

    sols.complete = len(sols) == ed
    if not sols.complete:
        logger.warning(
            "monodromy stalled at %d of %d tuples for format %s (seed %d)",
            len(sols), ed, fmt, seed,
        )
    return sols


def _last_factor_support(u: CTensor) -> int:
    """1 + the largest last-factor index carrying a nonzero entry."""
    flags = np.any(u.array != 0, axis=tuple(range(u.fmt.k - 1)))
    nz = np.flatnonzero(flags)
    return int(nz[-1]) + 1 if nz.size else 0


def check_specialization(u: CTensor, seed: int = 0,
                         config: TrackerConfig | None = None,
                         sols: SolutionSet | None = None,
                         leak_tol: float = 1e-8) -> bool:
    """Check that a zero-padded tensor keeps its tuples in the small factor.

    ``u`` must be a tensor supported on the first ``N`` coordinates of its
    last factor with ``N`` at least the boundary value for the prefix; its
    singular tuples then stay supported there.  Returns True when every
    solved tuple leaks less than ``leak_tol`` (relative) outside the
    support.  A tensor with full last-factor support passes vacuously.
    """
    n = _last_factor_support(u)
    if n == u.fmt.dims[-1]:
        return True
    n_b = classify(u.fmt).boundary_threshold
    if n < n_b:
        raise ValueError(
            f"last-factor support {n} is below the boundary value {n_b}; "
            "the specialization statement does not apply"
        )
    if sols is None:
        sols = solve_singular_tuples(u, seed=seed, config=config)
    for t in sols.tuples:
        xk = t.x[-1]
        if np.max(np.abs(xk[n:])) >= leak_tol * np.linalg.norm(xk):
            return False
    return True
