"""Procedural arrangement of the virtual suturing scene.

World frame: +z up, pad top surface in the z = 0 plane. The canonical
arrangement is the "about to enter" posture: a half-circle needle held in the
instrument jaws, grasp point two thirds of the arc from the tip, tip hovering
above the pad with its tangent vertical (90 degree entry). Randomization
perturbs every object pose around that arrangement and optionally releases
the needle (free placement) so occlusion and separation cases both occur.

Object local frames:

* needle: circle of ``circle_radius`` in the local xy-plane (normal +z), arc
  spanning polar angles [-half_angle, +half_angle]; the TIP is the
  +half_angle endpoint
* instrument: jaw tip at the origin, longitudinal axis +z pointing from the
  tip toward the handle; two jaw capsules open about local x
* pad: box centred at the origin in xy with its top face at z = 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.transform import Rotation

from .rigid import RigidTransform, rotation_between
from .sdf import sd_capsule, sd_round_box, sd_torus_arc
from .seeding import POSE_STREAM, derive_rng

CLASS_BACKGROUND = 0
CLASS_NEEDLE = 1
CLASS_INSTRUMENT = 2


class PlacementError(RuntimeError):
    """Raised when rejection sampling cannot place objects clear of the pad."""


@dataclass(frozen=True)
class NeedleSpec:
    circle_radius: float = 8.0
    wire_radius: float = 0.4
    arc_fraction: float = 0.5

    def __post_init__(self):
        if not self.circle_radius > self.wire_radius > 0:
            raise ValueError("need circle_radius > wire_radius > 0")
        if not 0 < self.arc_fraction <= 1:
            raise ValueError("arc_fraction must be in (0, 1]")

    @property
    def half_angle(self) -> float:
        return self.arc_fraction * math.pi

    @property
    def arc_span(self) -> float:
        return 2.0 * self.half_angle

    @property
    def arc_length(self) -> float:
        return self.circle_radius * self.arc_span


@dataclass(frozen=True)
class InstrumentSpec:
    shaft_radius: float = 2.5
    shaft_length: float = 80.0
    jaw_length: float = 12.0
    jaw_opening_angle: float = 10.0  # degrees between the two jaws

    def __post_init__(self):
        if min(self.shaft_radius, self.shaft_length, self.jaw_length) <= 0:
            raise ValueError("instrument lengths must be positive")
        if not 0 <= self.jaw_opening_angle <= 45:
            raise ValueError("jaw_opening_angle must be in [0, 45] degrees")

    @property
    def jaw_radius(self) -> float:
        # slender jaws; scaled from the shaft so a single knob controls girth
        return 0.4 * self.shaft_radius


@dataclass(frozen=True)
class PadSpec:
    extent_x: float = 120.0
    extent_y: float = 90.0
    thickness: float = 12.0
    # wound endpoints on the top surface, pad-local coordinates (z = 0)
    wound_line: tuple = ((0.0, -25.0, 0.0), (0.0, 25.0, 0.0))
    corner_radius: float = 2.0

    def __post_init__(self):
        if min(self.extent_x, self.extent_y, self.thickness) <= 0:
            raise ValueError("pad extents must be positive")
        for p in self.wound_line:
            if abs(p[2]) > 1e-9:
                raise ValueError("wound_line endpoints must lie on the top surface (z = 0)")

    @property
    def half_extents(self) -> np.ndarray:
        return np.array([self.extent_x / 2, self.extent_y / 2, self.thickness / 2])


@dataclass(frozen=True)
class PoseRange:
    """Independent uniform intervals for Euler angles (deg) and translation (mm)."""

    euler_deg: tuple = ((0.0, 0.0),) * 3
    trans_mm: tuple = ((0.0, 0.0),) * 3

    def __post_init__(self):
        for lo, hi in (*self.euler_deg, *self.trans_mm):
            if hi < lo:
                raise ValueError("interval upper bound below lower bound")

    def sample(self, rng: np.random.Generator):
        euler = [rng.uniform(lo, hi) if hi > lo else lo for lo, hi in self.euler_deg]
        trans = [rng.uniform(lo, hi) if hi > lo else lo for lo, hi in self.trans_mm]
        return euler, trans


def _sym(euler: float, trans: tuple) -> PoseRange:
    e = (-euler, euler)
    return PoseRange(euler_deg=(e, e, e), trans_mm=tuple((-t, t) for t in trans))


@dataclass(frozen=True)
class RandomizationConfig:
    needle: PoseRange = field(default_factory=lambda: _sym(25.0, (10.0, 8.0, 5.0)))
    instrument: PoseRange = field(default_factory=lambda: _sym(15.0, (10.0, 10.0, 8.0)))
    camera: PoseRange = field(default_factory=lambda: _sym(6.0, (15.0, 15.0, 12.0)))
    pad: PoseRange = field(default_factory=PoseRange)
    light_azimuth_deg: tuple = (0.0, 360.0)
    light_elevation_deg: tuple = (35.0, 75.0)
    noise_sigma: float = 0.02
    grasp_probability: float = 0.7
    grasp_fraction_range: tuple = (0.55, 0.80)
    grasp_angle_deg_range: tuple = (90.0, 120.0)
    grasp_tilt_deg_range: tuple = (0.0, 25.0)
    grasp_roll_deg_range: tuple = (-180.0, 180.0)
    max_place_retries: int = 64

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0 <= self.grasp_probability <= 1:
            raise ValueError("grasp_probability must be in [0, 1]")
        for lo, hi in (
            self.light_azimuth_deg,
            self.light_elevation_deg,
            self.grasp_fraction_range,
            self.grasp_angle_deg_range,
            self.grasp_tilt_deg_range,
            self.grasp_roll_deg_range,
        ):
            if hi < lo:
                raise ValueError("interval upper bound below lower bound")


@dataclass(frozen=True)
class GraspParams:
    """Ground-truth parameters of the grasped placement (recorded per frame)."""

    arc_fraction: float       # arc distance from the needle TIP, / total arc
    tangent_angle_deg: float  # angle between holder axis and arc tangent at grasp
    plane_tilt_deg: float     # holder-axis angle out of the needle plane
    roll_deg: float


@dataclass(frozen=True)
class ScenePose:
    needle: RigidTransform
    instrument: RigidTransform
    pad: RigidTransform
    camera: RigidTransform  # camera-to-world
    grasped: bool
    grasp: GraspParams | None
    seed: int


# canonical arrangement -----------------------------------------------------

CANONICAL_GRASP = GraspParams(
    arc_fraction=2.0 / 3.0, tangent_angle_deg=105.0, plane_tilt_deg=15.0, roll_deg=0.0
)

# needle local axes mapped to world: x->+z (up), y->+x, z->+y; the circle
# plane is then the vertical xz-plane and the tip tangent points straight down
_NEEDLE_CANONICAL_ROT = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])


def canonical_needle_pose() -> RigidTransform:
    return RigidTransform.from_matrix(_NEEDLE_CANONICAL_ROT, (-4.0, 0.0, 12.0))


def canonical_camera_pose() -> RigidTransform:
    return RigidTransform.look_at(eye=(0.0, -110.0, 85.0), target=(0.0, 0.0, 8.0))


def canonical_free_instrument_pose() -> RigidTransform:
    rot = rotation_between((0.0, 0.0, 1.0), (0.45, 0.25, 0.85))
    return RigidTransform.from_rotation(rot, (20.0, 12.0, 30.0))


# needle arc helpers --------------------------------------------------------

def needle_arc_points(pose: RigidTransform, spec: NeedleSpec, thetas) -> np.ndarray:
    """World points on the needle centreline at the given polar angles."""
    thetas = np.asarray(thetas, dtype=float)
    local = spec.circle_radius * np.stack(
        [np.cos(thetas), np.sin(thetas), np.zeros_like(thetas)], axis=-1
    )
    return pose.apply(local)


def needle_arc_tangent(pose: RigidTransform, spec: NeedleSpec, theta: float) -> np.ndarray:
    """World unit tangent at polar angle theta, oriented toward increasing theta
    (i.e. toward the tip)."""
    return pose.rotate(np.array([-math.sin(theta), math.cos(theta), 0.0]))


def needle_circle_center(pose: RigidTransform) -> np.ndarray:
    return pose.trans.copy()


def needle_circle_normal(pose: RigidTransform) -> np.ndarray:
    return pose.rotate(np.array([0.0, 0.0, 1.0]))


def needle_tip(pose: RigidTransform, spec: NeedleSpec) -> np.ndarray:
    return needle_arc_points(pose, spec, spec.half_angle)


def grasp_theta(spec: NeedleSpec, arc_fraction: float) -> float:
    """Polar angle of the point a given arc fraction from the TIP."""
    return spec.half_angle - arc_fraction * spec.arc_span


def grasped_instrument_pose(
    needle_pose: RigidTransform, spec: NeedleSpec, grasp: GraspParams
) -> RigidTransform:
    """Pose the instrument so its jaw tip sits on the needle arc.

    The holder axis lies at ``tangent_angle_deg`` from the arc tangent within
    the needle plane, tilted out of the plane by ``plane_tilt_deg``, then
    rolled about itself. Of the two in-plane candidates the more upward one
    (world +z) is chosen so the handle leaves the pad.
    """
    theta = grasp_theta(spec, grasp.arc_fraction)
    point = needle_arc_points(needle_pose, spec, theta)
    tangent = needle_arc_tangent(needle_pose, spec, theta)
    radial = needle_pose.rotate(np.array([math.cos(theta), math.sin(theta), 0.0]))
    normal = needle_circle_normal(needle_pose)

    alpha = math.radians(grasp.tangent_angle_deg)
    cand = [math.cos(alpha) * tangent + math.sin(alpha) * s * radial for s in (1.0, -1.0)]
    in_plane = max(cand, key=lambda a: a[2])
    beta = math.radians(grasp.plane_tilt_deg)
    axis = math.cos(beta) * in_plane + math.sin(beta) * normal
    axis /= np.linalg.norm(axis)

    rot = Rotation.from_rotvec(math.radians(grasp.roll_deg) * axis) * rotation_between(
        (0.0, 0.0, 1.0), axis
    )
    return RigidTransform.from_rotation(rot, point)


def instrument_axis_dir(pose: RigidTransform) -> np.ndarray:
    """World direction of the longitudinal axis, tip toward handle."""
    return pose.rotate(np.array([0.0, 0.0, 1.0]))


def instrument_tip(pose: RigidTransform) -> np.ndarray:
    return pose.trans.copy()


# scene signed-distance field ------------------------------------------------

class SceneField:
    """Per-class signed distances of the posed scene, evaluated in world frame."""

    def __init__(self, poses: ScenePose, needle: NeedleSpec, instrument: InstrumentSpec, pad: PadSpec):
        self.poses = poses
        self.needle = needle
        self.instrument = instrument
        self.pad = pad
        self._inv = {
            "needle": poses.needle.inverse(),
            "instrument": poses.instrument.inverse(),
            "pad": poses.pad.inverse(),
        }
        o = instrument.jaw_opening_angle / 2.0
        self._jaw_dirs = [
            Rotation.from_euler("x", s * o, degrees=True).apply([0.0, 0.0, 1.0])
            for s in (1.0, -1.0)
        ]

    def needle_distance(self, pts: np.ndarray) -> np.ndarray:
        p = self._inv["needle"].apply(pts)
        return sd_torus_arc(p, self.needle.circle_radius, self.needle.wire_radius, self.needle.half_angle)

    def instrument_distance(self, pts: np.ndarray) -> np.ndarray:
        p = self._inv["instrument"].apply(pts)
        spec = self.instrument
        d = sd_capsule(
            p,
            (0.0, 0.0, spec.jaw_length),
            (0.0, 0.0, spec.jaw_length + spec.shaft_length),
            spec.shaft_radius,
        )
        for jd in self._jaw_dirs:
            d = np.minimum(d, sd_capsule(p, (0.0, 0.0, 0.0), spec.jaw_length * jd, spec.jaw_radius))
        return d

    def pad_distance(self, pts: np.ndarray) -> np.ndarray:
        p = self._inv["pad"].apply(pts) + np.array([0.0, 0.0, self.pad.thickness / 2])
        return sd_round_box(p, self.pad.half_extents, self.pad.corner_radius)

    def class_distances(self, pts: np.ndarray) -> np.ndarray:
        """Distances stacked by class id: (..., 3) for {pad, needle, instrument}."""
        return np.stack(
            [self.pad_distance(pts), self.needle_distance(pts), self.instrument_distance(pts)],
            axis=-1,
        )

    def sdf(self, pts: np.ndarray):
        """Scene distance and the class of the nearest surface."""
        dists = self.class_distances(pts)
        cls = np.argmin(dists, axis=-1).astype(np.uint8)
        return np.take_along_axis(dists, cls[..., None].astype(int), axis=-1)[..., 0], cls

    def wound_distance(self, pts: np.ndarray) -> np.ndarray:
        """Distance from world points to the wound segment on the pad surface."""
        p = self._inv["pad"].apply(pts)
        a, b = (np.asarray(e, dtype=float) for e in self.pad.wound_line)
        return sd_capsule(p, a, b, 0.0)


# pose sampling --------------------------------------------------------------

def _clearance_points(poses: ScenePose, needle: NeedleSpec, instrument: InstrumentSpec) -> np.ndarray:
    """Centreline samples of needle and instrument used for pad-interior checks."""
    thetas = np.linspace(-needle.half_angle, needle.half_angle, 48)
    pts = [needle_arc_points(poses.needle, needle, thetas)]
    o = instrument.jaw_opening_angle / 2.0
    locals_ = [np.array([0.0, 0.0, 0.0])]
    for s in (1.0, -1.0):
        jd = Rotation.from_euler("x", s * o, degrees=True).apply([0.0, 0.0, 1.0])
        locals_ += [0.5 * instrument.jaw_length * jd, instrument.jaw_length * jd]
    z = np.array([0.0, 0.0, 1.0])
    for f in (0.0, 0.25, 0.5, 0.75, 1.0):
        locals_.append((instrument.jaw_length + f * instrument.shaft_length) * z)
    pts.append(poses.instrument.apply(np.stack(locals_)))
    return np.concatenate(pts, axis=0)


def build_scene(
    needle: NeedleSpec,
    instrument: InstrumentSpec,
    pad: PadSpec,
    rand: RandomizationConfig,
    seed: int,
) -> ScenePose:
    """Sample object and camera poses around the canonical arrangement.

    Deterministic in ``seed``. Candidate placements whose needle or instrument
    centreline enters the pad interior are rejected and resampled, up to
    ``rand.max_place_retries`` times; exhaustion raises PlacementError.
    """
    rng = derive_rng(seed, POSE_STREAM)
    for _ in range(rand.max_place_retries):
        pad_e, pad_t = rand.pad.sample(rng)
        pad_pose = RigidTransform.identity().perturbed(pad_e, pad_t)

        ndl_e, ndl_t = rand.needle.sample(rng)
        needle_pose = canonical_needle_pose().perturbed(ndl_e, ndl_t)

        grasped = bool(rng.uniform() < rand.grasp_probability)
        if grasped:
            lo_hi = (
                rand.grasp_fraction_range,
                rand.grasp_angle_deg_range,
                rand.grasp_tilt_deg_range,
                rand.grasp_roll_deg_range,
            )
            g, a, b, r = (rng.uniform(lo, hi) if hi > lo else lo for lo, hi in lo_hi)
            grasp = GraspParams(g, a, b, r)
            instrument_pose = grasped_instrument_pose(needle_pose, needle, grasp)
        else:
            grasp = None
            ins_e, ins_t = rand.instrument.sample(rng)
            instrument_pose = canonical_free_instrument_pose().perturbed(ins_e, ins_t)

        cam_e, cam_t = rand.camera.sample(rng)
        camera_pose = canonical_camera_pose().perturbed(cam_e, cam_t)

        poses = ScenePose(
            needle=needle_pose,
            instrument=instrument_pose,
            pad=pad_pose,
            camera=camera_pose,
            grasped=grasped,
            grasp=grasp,
            seed=int(seed),
        )
        field_ = SceneField(poses, needle, instrument, pad)
        if field_.pad_distance(_clearance_points(poses, needle, instrument)).min() >= 0.0:
            return poses
    raise PlacementError(
        f"no pad-clear placement found in {rand.max_place_retries} tries (seed {seed})"
    )
