"""Grasp wrench-space quality.

Each friction cone is discretized as an m-sided pyramid of unit vectors at
half-angle arctan(mu) around the contact normal.  Every pyramid edge yields
a 6D wrench (force, scaled torque about the object centroid); the convex
hull of all wrenches is the grasp wrench space and its 6D volume is the
quality value, valid only when the origin lies strictly inside the hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

FC_MARGIN = 1e-9


@dataclass(frozen=True)
class FrictionModel:
    """Coulomb friction coefficient and pyramid side count (default 8)."""

    mu: float = 0.5
    m: int = 8

    def __post_init__(self):
        if self.mu < 0.0:
            raise ValueError("mu must be >= 0")
        if self.m < 3:
            raise ValueError("pyramid needs at least 3 sides")

    @property
    def half_angle(self) -> float:
        return math.atan(self.mu)


@dataclass(frozen=True)
class QualityResult:
    """Hull volume (0 unless force closure holds) and the closure flag."""

    volume: float
    force_closure: bool
    wrench_count: int
    degenerate: bool = False


def friction_pyramid(normal, fm: FrictionModel) -> np.ndarray:
    """m unit vectors at angle arctan(mu) from the normal, equal azimuths.

    With mu = 0 the pyramid degenerates to m copies of the normal.
    """
    n = np.asarray(normal, dtype=float).reshape(3)
    nn = np.linalg.norm(n)
    if nn < 1e-12:
        raise ValueError("zero contact normal")
    if abs(nn - 1.0) > 1e-9:
        raise ValueError("contact normal must be a unit vector")
    n = n / nn
    ref = np.array([0.0, 0.0, 1.0]) if abs(n[2]) <= 0.9 else np.array([1.0, 0.0, 0.0])
    t1 = np.cross(n, ref)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    alpha = fm.half_angle
    ca, sa = math.cos(alpha), math.sin(alpha)
    phis = 2.0 * np.pi * np.arange(fm.m) / fm.m
    return (ca * n[None, :]
            + sa * (np.cos(phis)[:, None] * t1[None, :]
                    + np.sin(phis)[:, None] * t2[None, :]))


def contact_wrenches(contact, fm: FrictionModel, torque_origin,
                     lam: float) -> np.ndarray:
    """m wrenches (f, lam * (d x f)) for one contact, d = point - origin."""
    if lam <= 0.0:
        raise ValueError("torque scale lam must be positive")
    origin = np.asarray(torque_origin, dtype=float).reshape(3)
    d = np.asarray(contact.point, dtype=float).reshape(3) - origin
    forces = friction_pyramid(contact.normal, fm)
    torques = lam * np.cross(np.broadcast_to(d, forces.shape), forces)
    return np.hstack([forces, torques])


def torque_scale(contacts, torque_origin) -> float:
    """Scale lam = 1 / max |d_i| so unit cone forces keep |tau| <= |f|."""
    origin = np.asarray(torque_origin, dtype=float).reshape(3)
    dmax = 0.0
    for c in contacts:
        d = np.linalg.norm(np.asarray(c.point, dtype=float).reshape(3) - origin)
        if d > dmax:
            dmax = d
    return 1.0 / dmax if dmax > 0.0 else 1.0


@dataclass(frozen=True)
class WrenchSet:
    """Union of the per-contact wrench sets plus its convex hull (if any)."""

    wrenches: np.ndarray
    lam: float
    hull: object | None
    degenerate: bool


def grasp_wrench_hull(contacts, fm: FrictionModel, torque_origin,
                      lam: float | None = None) -> WrenchSet:
    """All n*m contact wrenches and their 6D convex hull.

    Point sets that do not span six dimensions are flagged degenerate and
    carry no hull.
    """
    if not contacts:
        raise ValueError("at least one contact is required")
    if lam is None:
        lam = torque_scale(contacts, torque_origin)
    w = np.vstack([contact_wrenches(c, fm, torque_origin, lam)
                   for c in contacts])
    hull = None
    degenerate = True
    if w.shape[0] >= 7:
        try:
            hull = ConvexHull(w)
            degenerate = False
        except QhullError:
            hull = None
    return WrenchSet(wrenches=w, lam=lam, hull=hull, degenerate=degenerate)


def hull_volume(wrenches) -> float:
    """6D Lebesgue volume of the convex hull; 0 for degenerate sets."""
    w = np.asarray(wrenches, dtype=float)
    if w.ndim != 2 or w.shape[1] != 6 or w.shape[0] < 7:
        return 0.0
    try:
        return float(ConvexHull(w).volume)
    except QhullError:
        return 0.0


def force_closure(wrenches) -> bool:
    """True when the wrench-space origin is strictly inside the hull.

    Strict interiority is read off the hull facets: every facet plane must
    clear the origin by at least FC_MARGIN.
    """
    w = np.asarray(wrenches, dtype=float)
    if w.ndim != 2 or w.shape[1] != 6 or w.shape[0] < 7:
        return False
    try:
        hull = ConvexHull(w)
    except QhullError:
        return False
    # facet equations n.x + b <= 0 hold inside; at the origin the value is b
    return bool(np.max(hull.equations[:, -1]) <= -FC_MARGIN)


def grasp_quality(contacts, fm: FrictionModel, torque_origin,
                  lam: float | None = None) -> QualityResult:
    """Full pipeline: pyramids, wrenches, hull volume gated by force closure."""
    if not contacts:
        return QualityResult(volume=0.0, force_closure=False,
                             wrench_count=0, degenerate=True)
    ws = grasp_wrench_hull(contacts, fm, torque_origin, lam=lam)
    if ws.degenerate or ws.hull is None:
        return QualityResult(volume=0.0, force_closure=False,
                             wrench_count=ws.wrenches.shape[0],
                             degenerate=True)
    fc = bool(np.max(ws.hull.equations[:, -1]) <= -FC_MARGIN)
    vol = float(ws.hull.volume) if fc else 0.0
    return QualityResult(volume=vol, force_closure=fc,
                         wrench_count=ws.wrenches.shape[0], degenerate=False)
