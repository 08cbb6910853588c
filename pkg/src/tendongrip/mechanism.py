"""Tendon transmission laws for an n-joint underactuated finger.

Three coupling variants are supported:

* ``RIGID_COUPLED``   - non-stretchable bifurcated tendons; joints close with a
  fixed displacement ratio and a stopped joint freezes everything downstream.
* ``SPRING_LOADED``   - a linear spring in the link-side branch lets downstream
  joints keep advancing (by the spring elongation term) after a stop.
* ``MOVABLE_PULLEY``  - each bifurcation is a movable pulley; a stopped joint
  makes its idle pulley rotate, doubling the displacement routed downstream.

Joint indexing follows the transmission chain: joint 1 is the first
bifurcation after the actuator, so the branch force there is f/2, at joint 2
it is f/4, and so on.  All operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class MechanismMode(str, Enum):
    RIGID_COUPLED = "rigid_coupled"
    SPRING_LOADED = "spring_loaded"
    MOVABLE_PULLEY = "movable_pulley"


def _as_float_array(values, name: str, n: int | None = None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class TendonNetwork:
    """Per-finger tendon routing: pulley radii (mm) and coupling mode.

    ``k_tendon`` (N/mm) is the linear constant of the stretchable branch
    springs and is required only for SPRING_LOADED networks.
    """

    r1: np.ndarray
    r2: np.ndarray
    mode: MechanismMode
    k_tendon: np.ndarray | None = None

    def __post_init__(self):
        r1 = _as_float_array(self.r1, "r1")
        r2 = _as_float_array(self.r2, "r2", r1.shape[0])
        object.__setattr__(self, "r1", r1)
        object.__setattr__(self, "r2", r2)
        object.__setattr__(self, "mode", MechanismMode(self.mode))
        if np.any(r1 <= 0.0):
            raise ValueError("all r1 radii must be positive")
        if np.any(r2 < 0.0):
            raise ValueError("r2 radii must be non-negative")
        if self.mode is MechanismMode.MOVABLE_PULLEY and np.any(r2 != 0.0):
            raise ValueError("movable-pulley networks require r2 = 0 "
                             "(decoupled torque-force relation)")
        if self.mode is MechanismMode.SPRING_LOADED:
            if self.k_tendon is None:
                raise ValueError("spring-loaded networks require k_tendon")
            k = _as_float_array(self.k_tendon, "k_tendon", r1.shape[0])
            if np.any(k <= 0.0):
                raise ValueError("k_tendon must be positive")
            object.__setattr__(self, "k_tendon", k)
        elif self.k_tendon is not None:
            object.__setattr__(
                self, "k_tendon",
                _as_float_array(self.k_tendon, "k_tendon", r1.shape[0]))

    @property
    def joint_count(self) -> int:
        return int(self.r1.shape[0])


@dataclass(frozen=True)
class JointState:
    """Joint angles (rad) plus which joints are stopped (contact or limit)."""

    q: np.ndarray
    stopped: np.ndarray

    def __post_init__(self):
        q = _as_float_array(self.q, "q")
        stopped = np.atleast_1d(np.asarray(self.stopped, dtype=bool))
        if stopped.shape != q.shape:
            raise ValueError("q and stopped must have matching lengths")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "stopped", stopped)

    @classmethod
    def initial(cls, n: int) -> "JointState":
        return cls(q=np.zeros(n), stopped=np.zeros(n, dtype=bool))


@dataclass(frozen=True)
class PullIncrement:
    """Actuator-side tendon displacement (mm) and force (N); tendons pull only."""

    dl: float
    f: float = 0.0

    def __post_init__(self):
        if self.dl < 0.0:
            raise ValueError("tendon displacement dl must be >= 0")
        if self.f < 0.0:
            raise ValueError("actuator force f must be >= 0")


def joint_increments(net: TendonNetwork, state: JointState,
                     pull: PullIncrement,
                     q_max: np.ndarray | None = None):
    """Distribute one actuator pull over the joints.

    Returns ``(dq, new_state)``.  ``dq`` is the per-joint rotation (rad) for
    this increment; ``new_state`` has the advanced angles, with joints that hit
    ``q_max`` clamped and marked stopped for subsequent increments.

    The stopped pattern in ``state`` governs the routing:

    * rigid: ``dq_1 = dl/r1_1``, ``dq_{j+1} = (r1_j - r2_j)/r1_{j+1} * dq_j``;
      a stopped joint zeroes everything at and after it.
    * spring-loaded: same coupling plus the elongation term
      ``(f/2^j / k_j) / r1_{j+1}``, which still advances downstream joints
      when joint j is stopped.
    * movable pulley: every free joint gets ``d/r1_j`` where ``d`` starts at
      ``dl`` and doubles across each stopped pulley.
    """
    n = net.joint_count
    if state.q.shape[0] != n:
        raise ValueError("state and network joint counts differ")
    if pull.dl < 0.0:
        raise ValueError("tendon displacement dl must be >= 0")

    r1 = net.r1
    r2 = net.r2
    stopped = state.stopped
    dq = np.zeros(n)

    if net.mode is MechanismMode.RIGID_COUPLED:
        for j in range(n):
            if stopped[j]:
                break
            if j == 0:
                dq[0] = pull.dl / r1[0]
            else:
                dq[j] = (r1[j - 1] - r2[j - 1]) / r1[j] * dq[j - 1]
    elif net.mode is MechanismMode.SPRING_LOADED:
        k = net.k_tendon
        for j in range(n):
            if stopped[j]:
                dq[j] = 0.0
            elif j == 0:
                dq[0] = pull.dl / r1[0]
            else:
                elong = (pull.f / 2.0 ** j) / k[j - 1]
                dq[j] = elong / r1[j] + (r1[j - 1] - r2[j - 1]) / r1[j] * dq[j - 1]
    else:  # MOVABLE_PULLEY
        d = pull.dl
        for j in range(n):
            if stopped[j]:
                d = 2.0 * d
            else:
                dq[j] = d / r1[j]

    new_stopped = stopped.copy()
    if q_max is not None:
        qm = _as_float_array(q_max, "q_max", n)
        for j in range(n):
            cap = qm[j] - state.q[j]
            if cap < 0.0:
                cap = 0.0
            if dq[j] >= cap:
                dq[j] = cap
                new_stopped[j] = True

    return dq, JointState(q=state.q + dq, stopped=new_stopped)


def tendon_forces(net: TendonNetwork, f: float, j: int):
    """Branch forces (f_j^1, f_j^2) at the j-th bifurcation, j in 1..n.

    The actuation force is halved at every bifurcation: f_j^1 = f_j^2 = f/2^j.
    """
    if f < 0.0:
        raise ValueError("actuator force must be >= 0")
    if not 1 <= j <= net.joint_count:
        raise IndexError(f"joint index {j} out of range 1..{net.joint_count}")
    fj = f / 2.0 ** j
    return fj, fj


def joint_torques(net: TendonNetwork, f: float) -> np.ndarray:
    """Per-joint actuation torque (N*mm): tau_j = r1_j f_j^1 + r2_j f_j^2.

    With r2 = 0 (movable pulley) this reduces to tau_j = r1_j f / 2^j.
    """
    if f < 0.0:
        raise ValueError("actuator force must be >= 0")
    n = net.joint_count
    tau = np.zeros(n)
    for j in range(n):
        fj = f / 2.0 ** (j + 1)
        tau[j] = net.r1[j] * fj + net.r2[j] * fj
    return tau


def spring_torques(design, q) -> np.ndarray:
    """Restoring torque (N*mm) of the spiral joint springs at angles q.

    Linear torsional model with zero preload: tau_s = -k_spiral * q.
    ``design`` is anything exposing a per-joint ``k_spiral`` array.
    """
    k = _as_float_array(design.k_spiral, "k_spiral")
    qa = _as_float_array(q, "q", k.shape[0])
    return -k * qa
