"""suturesight: synthetic training data, joint segmentation + depth
estimation, and quantitative suturing geometry for monocular laparoscopic
training scenes."""

from .camera import CameraModel, backproject_pixels, pixel_ray_dirs, project_points
from .corpus import AugmentationConfig, SplitLeakageError, build_training_corpus, ingest_real_dir
from .evaluate import EvalResult, MetricsReport, evaluate
from .generate import SceneGenConfig, default_camera, generate_dataset, render_frame
from .geomfit import AxisFit, CircleFit3D, PlaneFit, RansacConfig, fit_axis, fit_circle_3d, fit_pad_plane
from .losses import LossConfig, TrainPhase, cross_entropy, depth_mse, loss_total, seg_to_onehot
from .manifest import DatasetManifest, SampleRecord
from .metrics import dice, mae_depth
from .overlay import render_overlay
from .pipeline import FrameAnalysis, GeometryConfig, analyze_frame, run_geometry, run_inference
from .pointcloud import LabeledPointCloud, backproject
from .render import RenderSample, render
from .rigid import RigidTransform
from .scene import (
    CLASS_BACKGROUND,
    CLASS_INSTRUMENT,
    CLASS_NEEDLE,
    GraspParams,
    InstrumentSpec,
    NeedleSpec,
    PadSpec,
    PlacementError,
    PoseRange,
    RandomizationConfig,
    SceneField,
    ScenePose,
    build_scene,
)
from .suturemetrics import RecommendedBands, SutureMetrics, compute_suture_metrics
from .training import OptimizerConfig, finetune_seg, train_joint
from .transforms import (
    LoadedSample,
    center_crop_to_multiple,
    load_sample,
    random_crop_width,
    resize_to_height,
    sample_from_render,
)
from .unet import DualHeadUNet, ModelConfig, Prediction, predict
from .checkpoint import load_checkpoint, save_checkpoint

__version__ = "0.1.0"
