"""Design optimization: simulated annealing over link lengths and the
through-origin regression that estimates the pulley ratio.

The annealer starts at the midpoints of the length bounds, proposes Gaussian
steps clipped to the box, applies Metropolis acceptance and cools
geometrically.  The objective for real runs is the cumulative wrench-space
quality over a grasp pool, re-simulated per candidate.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .closure import ClosureConfig, Outcome, close_grasp
from .geometry import GripperDesign, Pose2
from .quality import FrictionModel, grasp_quality

DEFAULT_BOUNDS = ((25.0, 35.0), (45.0, 75.0), (25.0, 45.0))
VALID_OUTCOMES = (Outcome.ENVELOPE, Outcome.FINGERTIP)


@dataclass(frozen=True)
class SAConfig:
    """Annealing schedule and proposal distribution.

    ``t0=None`` picks the initial temperature as 0.1 * |objective(seed)|
    (floored at 1e-6); ``sigma=None`` uses 5 percent of each variable range.
    """

    iterations: int = 200
    t0: float | None = None
    cooling: float = 0.97
    sigma: np.ndarray | None = None
    seed: int = 0
    bounds: tuple = DEFAULT_BOUNDS

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.cooling < 1.0:
            raise ValueError("cooling must be in (0, 1)")
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if any(lo >= hi for lo, hi in b):
            raise ValueError("each bound must satisfy lo < hi")
        object.__setattr__(self, "bounds", b)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.ndim == 0:
                s = np.full(len(b), float(s))
            if s.shape != (len(b),) or np.any(s < 0.0):
                raise ValueError("sigma must be non-negative, one per variable")
            object.__setattr__(self, "sigma", s)
        if self.t0 is not None and self.t0 < 0.0:
            raise ValueError("t0 must be >= 0")

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def proposal_sigma(self) -> np.ndarray:
        if self.sigma is not None:
            return self.sigma
        return 0.05 * (self.hi - self.lo)


@dataclass
class TraceRow:
    iteration: int
    candidate: np.ndarray
    value: float
    accepted: bool
    temperature: float
    rejected_nonfinite: bool = False


@dataclass
class OptimizationTrace:
    rows: list = field(default_factory=list)
    best_x: np.ndarray | None = None
    best_value: float = -math.inf

    def best_history(self) -> np.ndarray:
        best = -math.inf
        out = []
        for r in self.rows:
            if math.isfinite(r.value) and r.value > best:
                best = r.value
            out.append(best)
        return np.asarray(out)


def propose(x, cfg: SAConfig, rng: np.random.Generator) -> np.ndarray:
    """Gaussian step around x, clipped to the bounds; seeded and reproducible."""
    xa = np.asarray(x, dtype=float)
    step = rng.normal(0.0, 1.0, size=xa.shape) * cfg.proposal_sigma()
    return np.clip(xa + step, cfg.lo, cfg.hi)


def sa_optimize(objective, cfg: SAConfig) -> OptimizationTrace:
    """Maximize ``objective`` over the bounded box with simulated annealing.

    Starts from the bound midpoints; accepts improvements always and
    worsenings with probability exp(dQ / T); T shrinks by ``cooling`` each
    iteration.  Non-finite objective values reject the candidate.  Row 0 of
    the trace is the seed evaluation, rows 1..iterations the proposals.
    """
    rng = np.random.default_rng(cfg.seed)
    x = cfg.midpoint.copy()
    value = float(objective(x))
    if not math.isfinite(value):
        value = -math.inf
    t = cfg.t0 if cfg.t0 is not None else max(0.1 * abs(value), 1e-6)
    if not math.isfinite(t):
        t = 1e-6

    trace = OptimizationTrace()
    trace.rows.append(TraceRow(0, x.copy(), value, True, t))
    trace.best_x = x.copy()
    trace.best_value = value

    for it in range(1, cfg.iterations + 1):
        cand = propose(x, cfg, rng)
        cval = float(objective(cand))
        nonfinite = not math.isfinite(cval)
        if nonfinite:
            accepted = False
        else:
            dq = cval - value
            if dq >= 0.0:
                accepted = True
            elif t > 0.0:
                accepted = bool(rng.uniform() < math.exp(dq / t))
            else:
                accepted = False
        if accepted:
            x = cand
            value = cval
        if not nonfinite and cval > trace.best_value:
            trace.best_value = cval
            trace.best_x = cand.copy()
        trace.rows.append(TraceRow(it, cand.copy(), cval, accepted, t,
                                   rejected_nonfinite=nonfinite))
        t *= cfg.cooling
    return trace


def _worker_count() -> int:
    raw = os.environ.get("TENDONGRIP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _evaluate_entry(args):
    design, obj, palm_pose, closure_cfg, m = args
    res = close_grasp(design, obj, palm_pose, closure_cfg)
    if res.outcome not in VALID_OUTCOMES:
        return 0.0
    origin = (res.object_pose.x, res.object_pose.y, 0.0)
    qr = grasp_quality(res.contacts, FrictionModel(mu=obj.mu, m=m), origin)
    return qr.volume if qr.force_closure else 0.0


def cumulative_quality(design: GripperDesign, pool,
                       closure_cfg: ClosureConfig | None = None) -> float:
    """Sum of hull volumes over the pool's valid grasps for a candidate design.

    Every pool entry (object, palm pose) is re-simulated with ``design``;
    entries whose closure is not an envelope or fingertip grasp, or that fail
    force closure, contribute zero.  Entries are summed in stored order so
    the result is deterministic, with or without worker processes.
    """
    if len(pool.records) == 0:
        raise ValueError("grasp pool is empty")
    if closure_cfg is None:
        closure_cfg = dataclasses.replace(pool.closure_config,
                                          record_trajectory=False)
    cfg = closure_cfg
    objects = {o.obj_id: o for o in pool.objects}
    tasks = [(design, objects[r.object_id], Pose2(*r.palm_pose), cfg,
              pool.friction_sides) for r in pool.records]
    workers = _worker_count()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            values = list(ex.map(_evaluate_entry, tasks, chunksize=8))
    else:
        values = [_evaluate_entry(t) for t in tasks]
    total = 0.0
    for v in values:
        total += v
    return total


@dataclass(frozen=True)
class RatioSamples:
    """(proximal, distal) joint displacement pairs pooled over closures."""

    proximal: np.ndarray
    distal: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.proximal, dtype=float).reshape(-1)
        d = np.asarray(self.distal, dtype=float).reshape(-1)
        if p.shape != d.shape:
            raise ValueError("proximal/distal sample lengths differ")
        if np.any(p < 0.0) or np.any(d < 0.0):
            raise ValueError("joint displacements must be >= 0")
        object.__setattr__(self, "proximal", p)
        object.__setattr__(self, "distal", d)

    def __len__(self) -> int:
        return int(self.proximal.shape[0])


def fit_pulley_ratio(samples: RatioSamples) -> float:
    """Least-squares slope through the origin of distal vs proximal motion.

    rho = sum(dp * dd) / sum(dp^2), read as the proximal-to-distal pulley
    radius ratio that reproduces the observed displacement coupling.
    """
    if len(samples) < 2:
        raise ValueError("at least two samples are required")
    p = samples.proximal
    d = samples.distal
    denom = float(np.dot(p, p))
    if denom <= 0.0:
        raise ValueError("all proximal displacements are zero")
    return float(np.dot(p, d)) / denom


def harvest_ratio_samples(pool) -> RatioSamples:
    """Pull per-finger displacement pairs out of every pool record."""
    prox = []
    dist = []
    for rec in pool.records:
        for fp, fd in rec.displacement:
            prox.append(fp)
            dist.append(fd)
    return RatioSamples(proximal=np.asarray(prox), distal=np.asarray(dist))
