"""Planar gripper kinematics and contact queries.

The world is 2D: the palm center sits at the origin, the fingers close
toward +y, finger 0 at -x and finger 1 at +x.  Links are capsules (segment
plus radius).  Contact points are embedded at z = 0 so the wrench-space
quality metric can stay fully six-dimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import engine
from .mechanism import MechanismMode, TendonNetwork

CONTACT_TOL = 1e-3  # mm

LINK_KNUCKLE = 0
LINK_PROXIMAL = 1
LINK_DISTAL = 2


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")

    def bounding_radius(self) -> float:
        return self.radius


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon, counter-clockwise vertices, local frame."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs an (n, 2) array with n >= 3")
        area2 = 0.0
        n = v.shape[0]
        for i in range(n):
            j = (i + 1) % n
            k = (i + 2) % n
            cross = ((v[j, 0] - v[i, 0]) * (v[k, 1] - v[j, 1])
                     - (v[j, 1] - v[i, 1]) * (v[k, 0] - v[j, 0]))
            if cross < -1e-9:
                raise ValueError("polygon must be convex and counter-clockwise")
            area2 += v[i, 0] * v[j, 1] - v[j, 0] * v[i, 1]
        if area2 <= 1e-9:
            raise ValueError("polygon area is degenerate")
        object.__setattr__(self, "vertices", v)

    def bounding_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))


Shape2D = Circle | ConvexPolygon


class MassClass(str, Enum):
    LIGHT = "light"
    FIXED = "fixed"


@dataclass(frozen=True)
class Pose2:
    """Planar pose: translation (mm) and rotation (rad)."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def transform(self, px: float, py: float):
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return c * px - s * py + self.x, s * px + c * py + self.y

    def inverse(self) -> "Pose2":
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        return Pose2(-(c * self.x + s * self.y),
                     -(-s * self.x + c * self.y), -self.theta)

    def compose(self, other: "Pose2") -> "Pose2":
        x, y = self.transform(other.x, other.y)
        return Pose2(x, y, self.theta + other.theta)


@dataclass(frozen=True)
class ObjectInstance:
    obj_id: str
    shape: Shape2D
    pose: Pose2 = field(default_factory=Pose2)
    mu: float = 0.5
    mass_class: MassClass = MassClass.FIXED

    def __post_init__(self):
        if self.mu < 0.0:
            raise ValueError("friction coefficient must be >= 0")
        object.__setattr__(self, "mass_class", MassClass(self.mass_class))


@dataclass(frozen=True)
class ContactPoint:
    """Contact embedded at z = 0; normal points from the link into the object."""

    point: np.ndarray
    normal: np.ndarray
    finger_id: int
    link_id: int
    penetration_depth: float

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float).reshape(3)
        n = np.asarray(self.normal, dtype=float).reshape(3)
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", n)


def _default_network() -> TendonNetwork:
    return TendonNetwork(r1=(6.75, 5.0), r2=(0.0, 0.0),
                         mode=MechanismMode.MOVABLE_PULLEY)


@dataclass(frozen=True)
class GripperDesign:
    """Link lengths (mm), capsule radius, palm geometry and joint parameters.

    Each finger has two actuated joints (proximal, distal) driven by one
    tendon network; ``q_max`` and ``k_spiral`` are per joint.
    """

    knuckle_len: float = 30.0
    proximal_len: float = 60.0
    distal_len: float = 35.0
    link_radius: float = 6.0
    palm_width: float = 80.0
    q_max: tuple = (1.92, 1.92)
    net: TendonNetwork = field(default_factory=_default_network)
    k_spiral: tuple = (5.0, 5.0)

    def __post_init__(self):
        for name in ("knuckle_len", "proximal_len", "distal_len",
                     "link_radius", "palm_width"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        qm = tuple(float(v) for v in np.atleast_1d(self.q_max))
        if len(qm) == 1:
            qm = (qm[0], qm[0])
        if len(qm) != 2 or not all(0.0 < v < math.pi for v in qm):
            raise ValueError("q_max must hold two values in (0, pi)")
        object.__setattr__(self, "q_max", qm)
        ks = tuple(float(v) for v in np.atleast_1d(self.k_spiral))
        if len(ks) == 1:
            ks = (ks[0], ks[0])
        if len(ks) != 2 or any(v < 0.0 for v in ks):
            raise ValueError("k_spiral must hold two non-negative values")
        object.__setattr__(self, "k_spiral", ks)
        if self.net.joint_count != 2:
            raise ValueError("two joints per finger are required")

    @property
    def reach(self) -> float:
        return self.knuckle_len + self.proximal_len + self.distal_len

    def with_lengths(self, knuckle: float, proximal: float,
                     distal: float) -> "GripperDesign":
        return GripperDesign(knuckle_len=float(knuckle),
                             proximal_len=float(proximal),
                             distal_len=float(distal),
                             link_radius=self.link_radius,
                             palm_width=self.palm_width,
                             q_max=self.q_max, net=self.net,
                             k_spiral=self.k_spiral)


@dataclass(frozen=True)
class Capsule:
    p0: np.ndarray
    p1: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float).reshape(2))
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float).reshape(2))


def forward_kinematics(design: GripperDesign, q) -> list[Capsule]:
    """Six link capsules for joint angles q = (f0 prox, f0 dist, f1 prox, f1 dist).

    Order: finger 0 knuckle, proximal, distal, then finger 1 likewise.
    Knuckles are fixed, angled 90 degrees from the palm.
    """
    qa = np.asarray(q, dtype=float).reshape(4)
    for i in range(4):
        if not (-1e-12 <= qa[i] <= design.q_max[i % 2] + 1e-9):
            raise ValueError(f"joint angle q[{i}]={qa[i]} outside [0, q_max]")
    caps = []
    for f in (0, 1):
        bx, by, kx, ky, jx, jy, tx, ty = engine.fk_finger(
            design.knuckle_len, design.proximal_len, design.distal_len,
            design.palm_width, float(qa[f * 2]), float(qa[f * 2 + 1]), f)
        caps.append(Capsule((bx, by), (kx, ky), design.link_radius))
        caps.append(Capsule((kx, ky), (jx, jy), design.link_radius))
        caps.append(Capsule((jx, jy), (tx, ty), design.link_radius))
    return caps


def _shape_args(shape: Shape2D):
    if isinstance(shape, Circle):
        return engine.SHAPE_CIRCLE, shape.radius, np.zeros(0)
    flat = np.ascontiguousarray(shape.vertices.reshape(-1), dtype=float)
    return engine.SHAPE_POLYGON, 0.0, flat


def contact_query(capsule: Capsule, obj: ObjectInstance,
                  tol: float = CONTACT_TOL,
                  finger_id: int = -1, link_id: int = -1):
    """Deepest contact between a link capsule and an object, or None.

    A contact is reported when the capsule surface is within ``tol`` of the
    shape boundary.  The normal points from the link into the object.
    """
    kind, circ_r, flat = _shape_args(obj.shape)
    sep, px, py, nx, ny = engine.capsule_shape_contact(
        float(capsule.p0[0]), float(capsule.p0[1]),
        float(capsule.p1[0]), float(capsule.p1[1]),
        kind, circ_r, flat, obj.pose.x, obj.pose.y, obj.pose.theta)
    surf = sep - capsule.radius
    if surf > tol:
        return None
    depth = max(-surf, 0.0)
    return ContactPoint(point=(px, py, 0.0), normal=(nx, ny, 0.0),
                        finger_id=finger_id, link_id=link_id,
                        penetration_depth=depth)


def finger_self_collision(design: GripperDesign, q) -> bool:
    """True when any capsule of finger 0 intersects any capsule of finger 1."""
    caps = forward_kinematics(design, q)
    limit = (2.0 * design.link_radius) ** 2
    for a in caps[:3]:
        for b in caps[3:]:
            d2 = engine.seg_seg_closest(
                float(a.p0[0]), float(a.p0[1]), float(a.p1[0]), float(a.p1[1]),
                float(b.p0[0]), float(b.p0[1]), float(b.p1[0]), float(b.p1[1]))[0]
            if d2 <= limit:
                return True
    return False
