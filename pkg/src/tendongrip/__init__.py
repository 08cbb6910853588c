"""tendongrip: design workbench for tendon-driven two-finger grippers."""

from .closure import ClosureConfig, ClosureResult, Outcome, close_grasp, \
    contact_forces, object_update
from .engine import BACKEND
from .geometry import (Circle, ContactPoint, ConvexPolygon, GripperDesign,
                       MassClass, ObjectInstance, Pose2, contact_query,
                       finger_self_collision, forward_kinematics)
from .mechanism import (JointState, MechanismMode, PullIncrement,
                        TendonNetwork, joint_increments, joint_torques,
                        spring_torques, tendon_forces)
from .optimize import (OptimizationTrace, RatioSamples, SAConfig,
                       cumulative_quality, fit_pulley_ratio,
                       harvest_ratio_samples, propose, sa_optimize)
from .pool import (GraspPool, GraspRecord, ObjectSetSpec, build_pool,
                   gen_objects, load_pool, sample_poses, save_pool)
from .quality import (FrictionModel, QualityResult, WrenchSet,
                      contact_wrenches, force_closure, friction_pyramid,
                      grasp_quality, grasp_wrench_hull, hull_volume)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ClosureConfig", "ClosureResult", "Outcome", "close_grasp",
    "contact_forces", "object_update", "Circle", "ContactPoint",
    "ConvexPolygon", "GripperDesign", "MassClass", "ObjectInstance", "Pose2",
    "contact_query", "finger_self_collision", "forward_kinematics",
    "JointState", "MechanismMode", "PullIncrement", "TendonNetwork",
    "joint_increments", "joint_torques", "spring_torques", "tendon_forces",
    "OptimizationTrace", "RatioSamples", "SAConfig", "cumulative_quality",
    "fit_pulley_ratio", "harvest_ratio_samples", "propose", "sa_optimize",
    "GraspPool", "GraspRecord", "ObjectSetSpec", "build_pool", "gen_objects",
    "load_pool", "sample_poses", "save_pool", "FrictionModel",
    "QualityResult", "WrenchSet", "contact_wrenches", "force_closure",
    "friction_pyramid", "grasp_quality", "grasp_wrench_hull", "hull_volume",
]
