"""Synthetic object sets, palm-pose sampling and grasp-pool persistence.

Stands in for an external object database and grasp planner: objects are
seeded samples from a few convex shape families, palm poses sit on a jittered
ring around each object, and the pool stores one record per (object, pose)
closure together with its quality.  All files are JSON/CSV with a
format_version field; serialization is deterministic so identical seeds give
byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .closure import ClosureConfig, ClosureResult, Outcome, close_grasp, \
    initial_configuration_free
from .geometry import (Circle, ConvexPolygon, GripperDesign, MassClass,
                       ObjectInstance, Pose2, Shape2D)
from .mechanism import MechanismMode, TendonNetwork
from .quality import FrictionModel, grasp_quality

log = logging.getLogger("tendongrip.pool")

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ObjectSetSpec:
    """Counts, size ranges (mm) and friction range of the synthetic families.

    The default set has 18 objects: 6 discs, 6 rectangles and 6 regular
    polygons spanning sizes the default gripper can and cannot envelope.
    Bottles (two-circle unions taken to their convex hull) are available but
    off by default.
    """

    n_discs: int = 6
    disc_radius_range: tuple = (15.0, 35.0)
    n_rects: int = 6
    rect_side_range: tuple = (30.0, 70.0)
    n_polys: int = 6
    poly_sides_range: tuple = (5, 8)
    poly_radius_range: tuple = (15.0, 35.0)
    n_bottles: int = 0
    bottle_body_range: tuple = (15.0, 25.0)
    bottle_neck_range: tuple = (6.0, 12.0)
    bottle_offset_range: tuple = (20.0, 35.0)
    mu_range: tuple = (0.3, 0.8)
    seed: int = 0

    def __post_init__(self):
        for name in ("n_discs", "n_rects", "n_polys", "n_bottles"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("disc_radius_range", "rect_side_range",
                     "poly_radius_range", "bottle_body_range",
                     "bottle_neck_range", "bottle_offset_range"):
            lo, hi = getattr(self, name)
            if lo <= 0.0 or hi < lo:
                raise ValueError(f"{name} must be positive with lo <= hi")
        lo, hi = self.mu_range
        if lo < 0.0 or hi < lo:
            raise ValueError("mu_range must be non-negative with lo <= hi")
        lo, hi = self.poly_sides_range
        if lo < 3 or hi < lo:
            raise ValueError("poly_sides_range must start at >= 3")


def _bottle_polygon(body_r: float, neck_r: float, offset: float,
                    samples: int = 24) -> ConvexPolygon:
    # convex hull of the two circles via support points, centroid re-centered
    pts = []
    for k in range(samples):
        ang = 2.0 * math.pi * k / samples
        ux, uy = math.cos(ang), math.sin(ang)
        body = (body_r * ux, body_r * uy)
        neck = (neck_r * ux, neck_r * uy + offset)
        pts.append(body if (body[0] * ux + body[1] * uy) >=
                   (neck[0] * ux + neck[1] * uy) else neck)
    uniq = []
    for p in pts:
        if not uniq or (abs(p[0] - uniq[-1][0]) > 1e-9
                        or abs(p[1] - uniq[-1][1]) > 1e-9):
            uniq.append(p)
    v = np.asarray(uniq)
    # polygon centroid
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return ConvexPolygon(v - np.array([cx, cy]))


def gen_objects(spec: ObjectSetSpec) -> list[ObjectInstance]:
    """Seeded object set in canonical pose (centroid at the origin).

    Mass classes alternate light/fixed through the set so both closure code
    paths appear in every pool; bottles are always light.
    """
    rng = np.random.default_rng(spec.seed)
    objects: list[ObjectInstance] = []

    def mu():
        return float(rng.uniform(*spec.mu_range))

    def mass(i):
        return MassClass.LIGHT if i % 2 == 0 else MassClass.FIXED

    idx = 0
    for i in range(spec.n_discs):
        r = float(rng.uniform(*spec.disc_radius_range))
        objects.append(ObjectInstance(obj_id=f"disc_{i:02d}", shape=Circle(r),
                                      mu=mu(), mass_class=mass(idx)))
        idx += 1
    for i in range(spec.n_rects):
        w = float(rng.uniform(*spec.rect_side_range))
        h = float(rng.uniform(*spec.rect_side_range))
        verts = np.array([[w / 2, -h / 2], [w / 2, h / 2],
                          [-w / 2, h / 2], [-w / 2, -h / 2]])
        objects.append(ObjectInstance(obj_id=f"rect_{i:02d}",
                                      shape=ConvexPolygon(verts),
                                      mu=mu(), mass_class=mass(idx)))
        idx += 1
    for i in range(spec.n_polys):
        sides = int(rng.integers(spec.poly_sides_range[0],
                                 spec.poly_sides_range[1] + 1))
        r = float(rng.uniform(*spec.poly_radius_range))
        ang = 2.0 * np.pi * np.arange(sides) / sides
        verts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
        objects.append(ObjectInstance(obj_id=f"poly_{i:02d}",
                                      shape=ConvexPolygon(verts),
                                      mu=mu(), mass_class=mass(idx)))
        idx += 1
    for i in range(spec.n_bottles):
        body = float(rng.uniform(*spec.bottle_body_range))
        neck = float(rng.uniform(*spec.bottle_neck_range))
        off = float(rng.uniform(*spec.bottle_offset_range))
        objects.append(ObjectInstance(obj_id=f"bottle_{i:02d}",
                                      shape=_bottle_polygon(body, neck, off),
                                      mu=mu(), mass_class=MassClass.LIGHT))
        idx += 1
    return objects


class PoseSamplingError(RuntimeError):
    pass


def sample_poses(design: GripperDesign, obj: ObjectInstance, n: int,
                 seed: int = 0, angle_jitter: float = 0.25,
                 offset_jitter: float = 0.45,
                 max_tries: int = 100) -> list[Pose2]:
    """n palm poses on a ring around the object centroid.

    The base standoff equals the open-finger reach with the approach axis
    through the centroid; jitter shortens the standoff by up to
    ``offset_jitter`` of the reach and perturbs the ring angle.  Poses that
    collide at the open configuration are rejected and resampled.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    reach = design.reach
    cx, cy = obj.pose.x, obj.pose.y
    poses = []
    for i in range(n):
        base = 2.0 * math.pi * i / n
        ok = False
        for _ in range(max_tries):
            phi = base + angle_jitter * float(rng.uniform(-1.0, 1.0))
            standoff = reach * (1.0 + offset_jitter
                                * float(rng.uniform(-1.0, 0.0)))
            px = cx + standoff * math.cos(phi)
            py = cy + standoff * math.sin(phi)
            ux, uy = cx - px, cy - py
            theta = math.atan2(uy, ux) - math.pi / 2.0
            pose = Pose2(px, py, theta)
            if initial_configuration_free(design, obj, pose):
                poses.append(pose)
                ok = True
                break
        if not ok:
            raise PoseSamplingError(
                f"no collision-free pose for {obj.obj_id} (slot {i})")
    return poses


@dataclass(frozen=True)
class GraspRecord:
    """One (object, palm pose) closure plus its quality summary."""

    object_id: str
    palm_pose: tuple
    outcome: Outcome
    contacts: tuple           # (finger, link, px, py, nx, ny, depth)
    knuckle_contacts: tuple
    q_final: tuple
    object_pose_final: tuple  # palm frame
    displacement: tuple       # ((dp, dd) per finger)
    steps: int
    loss_events: int
    volume: float
    force_closure: bool
    wrench_count: int


@dataclass(frozen=True)
class GraspPool:
    """Persisted grasp dataset: records plus everything needed to rebuild it."""

    design: GripperDesign
    objects: tuple
    records: tuple
    poses_per_object: int
    pose_seed: int
    closure_config: ClosureConfig
    friction_sides: int
    design_id: str
    format_version: int = FORMAT_VERSION

    def __len__(self) -> int:
        return len(self.records)


def _contacts_tuple(contacts) -> tuple:
    return tuple((c.finger_id, c.link_id, float(c.point[0]),
                  float(c.point[1]), float(c.normal[0]), float(c.normal[1]),
                  float(c.penetration_depth)) for c in contacts)


def design_id(design: GripperDesign) -> str:
    import hashlib
    doc = json.dumps(design_to_dict(design), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:12]


def record_from_result(obj: ObjectInstance, palm_pose: Pose2,
                       res: ClosureResult, m: int) -> GraspRecord:
    origin = (res.object_pose.x, res.object_pose.y, 0.0)
    qr = grasp_quality(res.contacts, FrictionModel(mu=obj.mu, m=m), origin)
    return GraspRecord(
        object_id=obj.obj_id,
        palm_pose=(palm_pose.x, palm_pose.y, palm_pose.theta),
        outcome=res.outcome,
        contacts=_contacts_tuple(res.contacts),
        knuckle_contacts=_contacts_tuple(res.knuckle_contacts),
        q_final=tuple(float(v) for v in res.q_final),
        object_pose_final=(res.object_pose.x, res.object_pose.y,
                           res.object_pose.theta),
        displacement=tuple((float(a), float(b)) for a, b in res.displacement),
        steps=res.steps, loss_events=res.loss_events,
        volume=qr.volume, force_closure=qr.force_closure,
        wrench_count=qr.wrench_count)


def build_pool(design: GripperDesign, objects, poses_per_object: int,
               closure_cfg: ClosureConfig | None = None,
               pose_seed: int = 0, friction_sides: int = 8) -> GraspPool:
    """Close on every (object, sampled pose) pair and collect the records.

    Record order is object-major, pose-minor.  Pose-sampling failures are
    logged and skipped, so the pool may end up slightly smaller than
    objects * poses_per_object.
    """
    if not objects:
        raise ValueError("object set is empty")
    cfg = closure_cfg or ClosureConfig(record_trajectory=False)
    if cfg.record_trajectory:
        cfg = dataclasses.replace(cfg, record_trajectory=False)
    records = []
    for oi, obj in enumerate(objects):
        try:
            poses = sample_poses(design, obj, poses_per_object,
                                 seed=np.random.SeedSequence(
                                     [pose_seed, oi]).generate_state(1)[0])
        except PoseSamplingError as exc:
            log.warning("skipping %s: %s", obj.obj_id, exc)
            continue
        for pose in poses:
            res = close_grasp(design, obj, pose, cfg)
            records.append(record_from_result(obj, pose, res, friction_sides))
    return GraspPool(design=design, objects=tuple(objects),
                     records=tuple(records),
                     poses_per_object=poses_per_object, pose_seed=pose_seed,
                     closure_config=cfg, friction_sides=friction_sides,
                     design_id=design_id(design))


# ---------------------------------------------------------------------------
# serialization


def shape_to_dict(shape: Shape2D) -> dict:
    if isinstance(shape, Circle):
        return {"kind": "circle", "radius": shape.radius}
    return {"kind": "polygon",
            "vertices": [[float(x), float(y)] for x, y in shape.vertices]}


def shape_from_dict(doc: dict) -> Shape2D:
    if doc["kind"] == "circle":
        return Circle(doc["radius"])
    if doc["kind"] == "polygon":
        return ConvexPolygon(np.asarray(doc["vertices"], dtype=float))
    raise ValueError(f"unknown shape kind {doc['kind']!r}")


def object_to_dict(obj: ObjectInstance) -> dict:
    return {"id": obj.obj_id, "shape": shape_to_dict(obj.shape),
            "pose": [obj.pose.x, obj.pose.y, obj.pose.theta],
            "mu": obj.mu, "mass_class": obj.mass_class.value}


def object_from_dict(doc: dict) -> ObjectInstance:
    pose = doc.get("pose", [0.0, 0.0, 0.0])
    return ObjectInstance(obj_id=doc["id"], shape=shape_from_dict(doc["shape"]),
                          pose=Pose2(*pose), mu=doc["mu"],
                          mass_class=MassClass(doc["mass_class"]))


def design_to_dict(design: GripperDesign) -> dict:
    net = design.net
    doc = {
        "knuckle_len": design.knuckle_len,
        "proximal_len": design.proximal_len,
        "distal_len": design.distal_len,
        "link_radius": design.link_radius,
        "palm_width": design.palm_width,
        "q_max": list(design.q_max),
        "k_spiral": list(design.k_spiral),
        "net": {
            "mode": net.mode.value,
            "r1": [float(v) for v in net.r1],
            "r2": [float(v) for v in net.r2],
        },
    }
    if net.k_tendon is not None:
        doc["net"]["k_tendon"] = [float(v) for v in net.k_tendon]
    return doc


def design_from_dict(doc: dict) -> GripperDesign:
    netdoc = doc["net"]
    net = TendonNetwork(r1=netdoc["r1"], r2=netdoc["r2"],
                        mode=MechanismMode(netdoc["mode"]),
                        k_tendon=netdoc.get("k_tendon"))
    return GripperDesign(knuckle_len=doc["knuckle_len"],
                         proximal_len=doc["proximal_len"],
                         distal_len=doc["distal_len"],
                         link_radius=doc["link_radius"],
                         palm_width=doc["palm_width"],
                         q_max=tuple(doc["q_max"]), net=net,
                         k_spiral=tuple(doc["k_spiral"]))


def closure_config_to_dict(cfg: ClosureConfig) -> dict:
    return {f.name: getattr(cfg, f.name)
            for f in dataclasses.fields(cfg)}


def closure_config_from_dict(doc: dict) -> ClosureConfig:
    names = {f.name for f in dataclasses.fields(ClosureConfig)}
    return ClosureConfig(**{k: v for k, v in doc.items() if k in names})


def record_to_dict(rec: GraspRecord) -> dict:
    return {
        "object_id": rec.object_id,
        "palm_pose": list(rec.palm_pose),
        "outcome": rec.outcome.value,
        "contacts": [list(c) for c in rec.contacts],
        "knuckle_contacts": [list(c) for c in rec.knuckle_contacts],
        "q_final": list(rec.q_final),
        "object_pose_final": list(rec.object_pose_final),
        "displacement": [list(d) for d in rec.displacement],
        "steps": rec.steps,
        "loss_events": rec.loss_events,
        "volume": rec.volume,
        "force_closure": rec.force_closure,
        "wrench_count": rec.wrench_count,
    }


def record_from_dict(doc: dict) -> GraspRecord:
    return GraspRecord(
        object_id=doc["object_id"],
        palm_pose=tuple(doc["palm_pose"]),
        outcome=Outcome(doc["outcome"]),
        contacts=tuple(tuple(c) for c in doc["contacts"]),
        knuckle_contacts=tuple(tuple(c) for c in doc["knuckle_contacts"]),
        q_final=tuple(doc["q_final"]),
        object_pose_final=tuple(doc["object_pose_final"]),
        displacement=tuple(tuple(d) for d in doc["displacement"]),
        steps=doc["steps"], loss_events=doc["loss_events"],
        volume=doc["volume"], force_closure=doc["force_closure"],
        wrench_count=doc["wrench_count"])


def pool_to_dict(pool: GraspPool) -> dict:
    return {
        "format_version": pool.format_version,
        "design_id": pool.design_id,
        "design": design_to_dict(pool.design),
        "poses_per_object": pool.poses_per_object,
        "pose_seed": pool.pose_seed,
        "friction_sides": pool.friction_sides,
        "closure_config": closure_config_to_dict(pool.closure_config),
        "objects": [object_to_dict(o) for o in pool.objects],
        "records": [record_to_dict(r) for r in pool.records],
    }


def pool_from_dict(doc: dict) -> GraspPool:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError("unsupported pool format_version")
    return GraspPool(
        design=design_from_dict(doc["design"]),
        objects=tuple(object_from_dict(o) for o in doc["objects"]),
        records=tuple(record_from_dict(r) for r in doc["records"]),
        poses_per_object=doc["poses_per_object"],
        pose_seed=doc["pose_seed"],
        closure_config=closure_config_from_dict(doc["closure_config"]),
        friction_sides=doc["friction_sides"],
        design_id=doc["design_id"],
        format_version=doc["format_version"])


def write_json_atomic(path: str, doc: dict) -> None:
    """Serialize with stable layout and swap into place atomically."""
    text = json.dumps(doc, indent=2)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_objects(path: str, objects, seed: int | None = None) -> None:
    doc = {"format_version": FORMAT_VERSION,
           "objects": [object_to_dict(o) for o in objects]}
    if seed is not None:
        doc["seed"] = seed
    write_json_atomic(path, doc)


def load_objects(path: str) -> list[ObjectInstance]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError("unsupported objects format_version")
    return [object_from_dict(o) for o in doc["objects"]]


def save_pool(path: str, pool: GraspPool) -> None:
    write_json_atomic(path, pool_to_dict(pool))


def load_pool(path: str) -> GraspPool:
    with open(path) as fh:
        return pool_from_dict(json.load(fh))


def save_design(path: str, design: GripperDesign) -> None:
    doc = {"format_version": FORMAT_VERSION, "design": design_to_dict(design)}
    write_json_atomic(path, doc)


def load_design(path: str) -> GripperDesign:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError("unsupported design format_version")
    return design_from_dict(doc["design"])
