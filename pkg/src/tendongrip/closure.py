"""Quasi-static grasp-closing simulation.

One actuator per finger feeds tendon pull in small increments; the
transmission mode decides how joints share it.  Links that touch the object
(or hit their limit) stop; light objects are translated along the net
contact force each step.  The loop is displacement-driven and fully
deterministic, so identical inputs give identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import engine
from .geometry import (Capsule, ContactPoint, GripperDesign, MassClass,
                       ObjectInstance, Pose2, contact_query,
                       finger_self_collision, forward_kinematics, _shape_args,
                       LINK_DISTAL, LINK_PROXIMAL)
from .mechanism import MechanismMode, joint_torques


class Outcome(str, Enum):
    ENVELOPE = "envelope"
    FINGERTIP = "fingertip"
    EJECTED = "ejected"
    COLLISION = "collision"
    NO_CONTACT = "no_contact"


_MODE_CODE = {
    MechanismMode.RIGID_COUPLED: engine.MODE_RIGID,
    MechanismMode.SPRING_LOADED: engine.MODE_SPRING,
    MechanismMode.MOVABLE_PULLEY: engine.MODE_MOVABLE,
}


@dataclass(frozen=True)
class ClosureConfig:
    """Stepping, force and termination parameters of the closing loop.

    ``release_tol`` adds hysteresis: a contact is made within ``contact_tol``
    but only released once the gap exceeds ``release_tol``, which keeps
    single-step object pushes from flickering contacts on and off.
    """

    dl_step: float = 0.05          # mm of tendon per step
    max_steps: int = 20000
    f_act: float = 10.0            # N
    ejection_radius: float = 150.0  # mm from the palm center
    balance_tol: float = 0.01      # N
    push_gain: float = 0.5         # mm per N of unbalanced force
    push_cap: float = 2.0          # mm per step
    contact_tol: float = 1e-3      # mm
    release_tol: float = 0.5       # mm
    loss_event_limit: int = 3
    record_trajectory: bool = True

    def __post_init__(self):
        if self.dl_step <= 0.0:
            raise ValueError("dl_step must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.f_act < 0.0:
            raise ValueError("f_act must be >= 0")
        if self.push_gain < 0.0 or self.push_cap <= 0.0:
            raise ValueError("push parameters must be positive")
        if self.release_tol < self.contact_tol:
            raise ValueError("release_tol must be >= contact_tol")
        if self.loss_event_limit < 1:
            raise ValueError("loss_event_limit must be >= 1")


@dataclass(frozen=True)
class ClosureResult:
    """Outcome of one simulated grasp, everything in the palm frame."""

    outcome: Outcome
    contacts: list
    knuckle_contacts: list
    q_final: np.ndarray
    object_pose: Pose2
    displacement: np.ndarray   # (2, 2): per finger (d_proximal, d_distal) rad
    steps: int
    loss_events: int
    trajectory: np.ndarray | None = None

    @property
    def contact_count(self) -> int:
        return len(self.contacts)


def object_update(pose: Pose2, net_force, cfg: ClosureConfig,
                  mass_class: MassClass = MassClass.LIGHT) -> Pose2:
    """Translate an object along the net contact force, no rotation.

    The step is ``push_gain * |F|`` capped at ``push_cap``; forces at or
    below ``balance_tol`` leave the pose unchanged, and fixed objects never
    move.
    """
    if mass_class is MassClass.FIXED:
        return pose
    fx, fy = float(net_force[0]), float(net_force[1])
    fn = math.sqrt(fx * fx + fy * fy)
    if fn <= cfg.balance_tol:
        return pose
    dx = cfg.push_gain * fx
    dy = cfg.push_gain * fy
    dn = math.sqrt(dx * dx + dy * dy)
    if dn > cfg.push_cap:
        dx *= cfg.push_cap / dn
        dy *= cfg.push_cap / dn
    return Pose2(pose.x + dx, pose.y + dy, pose.theta)


def contact_forces(design: GripperDesign, q, contacts, f_act: float):
    """Normal force magnitude (N) for each contact, quasi-static balance.

    Per finger the two-unknown torque balance is solved: joint torque minus
    the spiral-spring torque equals the contact moment.  At most one contact
    per link participates (the deepest); extras and contacts with a
    degenerate moment arm contribute zero.
    """
    import warnings

    qa = np.asarray(q, dtype=float).reshape(4)
    tau = joint_torques(design.net, f_act)
    forces = np.zeros(len(contacts))

    for f in (0, 1):
        _, _, kx, ky, jx, jy, _, _ = engine.fk_finger(
            design.knuckle_len, design.proximal_len, design.distal_len,
            design.palm_width, float(qa[f * 2]), float(qa[f * 2 + 1]), f)
        rot = 1.0 if f == 1 else -1.0
        best = {LINK_PROXIMAL: None, LINK_DISTAL: None}
        for idx, c in enumerate(contacts):
            if c.finger_id != f or c.link_id not in best:
                continue
            cur = best[c.link_id]
            if cur is None or c.penetration_depth > contacts[cur].penetration_depth:
                best[c.link_id] = idx
        ip = best[LINK_PROXIMAL]
        idd = best[LINK_DISTAL]

        def unpack(i):
            c = contacts[i]
            return (float(c.point[0]), float(c.point[1]),
                    float(c.normal[0]), float(c.normal[1]))

        ppx = ppy = pnx = pny = 0.0
        dpx = dpy = dnx = dny = 0.0
        if ip is not None:
            ppx, ppy, pnx, pny = unpack(ip)
        if idd is not None:
            dpx, dpy, dnx, dny = unpack(idd)
        np_, nd_ = engine.finger_contact_forces(
            ip is not None, ppx, ppy, pnx, pny,
            idd is not None, dpx, dpy, dnx, dny,
            kx, ky, jx, jy, rot,
            float(tau[0]), float(tau[1]),
            design.k_spiral[0], design.k_spiral[1],
            float(qa[f * 2]), float(qa[f * 2 + 1]))
        if idd is not None:
            arm = rot * ((dpx - jx) * dny - (dpy - jy) * dnx)
            if abs(arm) <= 1e-9:
                warnings.warn("contact through distal joint axis dropped")
            forces[idd] = nd_
        if ip is not None:
            arm = rot * ((ppx - kx) * pny - (ppy - ky) * pnx)
            if abs(arm) <= 1e-9:
                warnings.warn("contact through proximal joint axis dropped")
            forces[ip] = np_
    return forces


def _initial_contacts(design: GripperDesign, obj_palm: ObjectInstance,
                      tol: float):
    found = []
    caps = forward_kinematics(design, np.zeros(4))
    for i, cap in enumerate(caps):
        c = contact_query(cap, obj_palm, tol=tol,
                          finger_id=i // 3, link_id=i % 3)
        if c is not None:
            found.append(c)
    return found


def initial_configuration_free(design: GripperDesign, obj: ObjectInstance,
                               palm_pose: Pose2,
                               tol: float = 1e-3) -> bool:
    """True when the fully open gripper neither touches the object nor itself."""
    obj_palm = _to_palm_frame(obj, palm_pose)
    if _initial_contacts(design, obj_palm, tol):
        return False
    return not finger_self_collision(design, np.zeros(4))


def _to_palm_frame(obj: ObjectInstance, palm_pose: Pose2) -> ObjectInstance:
    rel = palm_pose.inverse().compose(obj.pose)
    return ObjectInstance(obj_id=obj.obj_id, shape=obj.shape, pose=rel,
                          mu=obj.mu, mass_class=obj.mass_class)


def close_grasp(design: GripperDesign, obj: ObjectInstance,
                palm_pose: Pose2, cfg: ClosureConfig) -> ClosureResult:
    """Simulate one grasp closing and classify the outcome.

    Outcomes: ``COLLISION`` when the open configuration already overlaps the
    object (or itself); ``EJECTED`` when a light object escapes past the
    ejection radius, loses all contact repeatedly, or ends contactless after
    touching; ``ENVELOPE`` when all four moving links hold contact;
    ``FINGERTIP`` when only distal links do; ``NO_CONTACT`` otherwise
    (including stalls with a partial contact pattern, see the format notes).
    """
    if not all(math.isfinite(v) for v in
               (palm_pose.x, palm_pose.y, palm_pose.theta,
                obj.pose.x, obj.pose.y, obj.pose.theta)):
        raise ValueError("non-finite pose")
    if cfg.ejection_radius <= design.reach:
        raise ValueError("ejection_radius must exceed the open gripper reach")

    obj_palm = _to_palm_frame(obj, palm_pose)

    initial = _initial_contacts(design, obj_palm, cfg.contact_tol)
    if initial or finger_self_collision(design, np.zeros(4)):
        return ClosureResult(
            outcome=Outcome.COLLISION,
            contacts=[c for c in initial if c.link_id != 0],
            knuckle_contacts=[c for c in initial if c.link_id == 0],
            q_final=np.zeros(4), object_pose=obj_palm.pose,
            displacement=np.zeros((2, 2)), steps=0, loss_events=0,
            trajectory=np.zeros((0, 7)) if cfg.record_trajectory else None)

    kind, circ_r, flat = _shape_args(obj_palm.shape)
    net = design.net
    ktp, ktd = 1.0, 1.0
    if net.mode is MechanismMode.SPRING_LOADED:
        ktp, ktd = float(net.k_tendon[0]), float(net.k_tendon[1])

    (reason, steps, qf, ox, oy, had_contact, loss_events,
     raw_contacts, raw_knuckles, traj) = engine.run_closure(
        _MODE_CODE[net.mode],
        float(net.r1[0]), float(net.r1[1]),
        float(net.r2[0]), float(net.r2[1]), ktp, ktd,
        design.knuckle_len, design.proximal_len, design.distal_len,
        design.link_radius, design.palm_width,
        design.q_max[0], design.q_max[1],
        design.k_spiral[0], design.k_spiral[1],
        kind, circ_r, flat,
        obj_palm.pose.x, obj_palm.pose.y, obj_palm.pose.theta,
        1 if obj.mass_class is MassClass.LIGHT else 0,
        cfg.dl_step, cfg.max_steps, cfg.f_act,
        cfg.ejection_radius, cfg.balance_tol,
        cfg.push_gain, cfg.push_cap, cfg.contact_tol, cfg.release_tol,
        cfg.loss_event_limit, 1 if cfg.record_trajectory else 0)

    def embed(rec):
        f, link, px, py, nx, ny, depth = rec
        return ContactPoint(point=(px, py, 0.0), normal=(nx, ny, 0.0),
                            finger_id=f, link_id=link,
                            penetration_depth=depth)

    contacts = [embed(r) for r in raw_contacts]
    knuckles = [embed(r) for r in raw_knuckles]

    prox = sum(1 for c in contacts if c.link_id == LINK_PROXIMAL)
    dist = sum(1 for c in contacts if c.link_id == LINK_DISTAL)
    if reason in (engine.TERM_EJECT_RADIUS, engine.TERM_EJECT_LOSS):
        outcome = Outcome.EJECTED
    elif not contacts:
        outcome = Outcome.EJECTED if had_contact else Outcome.NO_CONTACT
    elif prox == 2 and dist == 2:
        outcome = Outcome.ENVELOPE
    elif prox == 0 and dist >= 1:
        outcome = Outcome.FINGERTIP
    else:
        outcome = Outcome.NO_CONTACT

    q_final = np.asarray(qf, dtype=float)
    disp = np.array([[q_final[0], q_final[1]], [q_final[2], q_final[3]]])
    traj_arr = None
    if cfg.record_trajectory:
        traj_arr = (np.asarray(traj, dtype=float)
                    if traj else np.zeros((0, 7)))

    return ClosureResult(outcome=outcome, contacts=contacts,
                         knuckle_contacts=knuckles, q_final=q_final,
                         object_pose=Pose2(ox, oy, obj_palm.pose.theta),
                         displacement=disp, steps=steps,
                         loss_events=loss_events, trajectory=traj_arr)
