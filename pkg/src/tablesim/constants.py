"""Shipped defaults for the whole pipeline.

Values here are the single source the CLI ``stats`` command and module
defaults read from, so tweaking one place reconfigures everything.
"""

# Joint loss: total = main + LAMBDA * discriminator.
LAMBDA_DEFAULT = 0.01

# Per-scene training point budget after pre-voxelization.
POINT_BUDGET_DEFAULT = 80_000

# Pre-voxelization grid size for point sampling (meters).
GRID_VOXEL_DEFAULT = 0.004

# Uniform-floor mixing weight for dynamic (score-weighted) sampling.
ALPHA_DEFAULT = 0.8

# Simulated scan: camera poses rendered per scene and frames fused.
POSE_BUDGET_DEFAULT = 75
FUSED_FRAMES_TARGET = 26

# Camera model (Kinect-class 640x480).
INTRINSICS_DEFAULT = dict(fx=585.0, fy=585.0, cx=319.5, cy=239.5, width=640, height=480)

# Depth noise model: sigma(z) = SIGMA0 + SIGMA1 * z^2, quantized to QUANT,
# readings beyond ZMAX dropped.
NOISE_SIGMA0_DEFAULT = 0.001
NOISE_SIGMA1_DEFAULT = 0.002
NOISE_QUANT_DEFAULT = 0.001
DEPTH_ZMAX_DEFAULT = 5.0

# TSDF reconstruction grid.
TSDF_VOXEL_DEFAULT = 0.005
TSDF_TRUNC_FACTOR = 4.0
TSDF_PAD_FACTOR = 4.0  # volume bounds = scene AABB padded by this many truncations

# Pose sampling envelope around the table.
POSE_ELEVATION_DEG = (20.0, 60.0)
POSE_DISTANCE_FACTORS = (0.6, 1.6)  # times table BEV diagonal
POSE_LOOKAT_JITTER = 0.05

# Placement machinery.
SUPPORT_GRID_DEFAULT = 0.002        # support-height sampling grid (meters)
PLACE_MAX_ATTEMPTS = 50             # rejection-sampling cap per object
PACK_TOLERANCE_CROWD = 0.001        # crowd overlap slab tolerance (meters)

# Scene variants: object count ranges and room crop.
VARIANT_COUNT_RANGES = {
    "vanilla": (3, 8),
    "crowd": (10, 16),
    "whole_room": (3, 8),
}
CROP_RADIUS_FACTOR = 1.5  # times table BEV diagonal, for vanilla/crowd crops

# Detection metric.
MAP_IOU_THRESHOLD = 0.25


def defaults_summary() -> dict:
    """All shipped defaults as one JSON-friendly mapping."""
    return {
        "lambda": LAMBDA_DEFAULT,
        "point_budget": POINT_BUDGET_DEFAULT,
        "grid_voxel_m": GRID_VOXEL_DEFAULT,
        "alpha": ALPHA_DEFAULT,
        "pose_budget": POSE_BUDGET_DEFAULT,
        "fused_frames_target": FUSED_FRAMES_TARGET,
        "intrinsics": dict(INTRINSICS_DEFAULT),
        "noise_sigma0_m": NOISE_SIGMA0_DEFAULT,
        "noise_sigma1_m_per_m2": NOISE_SIGMA1_DEFAULT,
        "noise_quant_m": NOISE_QUANT_DEFAULT,
        "depth_zmax_m": DEPTH_ZMAX_DEFAULT,
        "tsdf_voxel_m": TSDF_VOXEL_DEFAULT,
        "tsdf_trunc_factor": TSDF_TRUNC_FACTOR,
        "support_grid_m": SUPPORT_GRID_DEFAULT,
        "place_max_attempts": PLACE_MAX_ATTEMPTS,
        "pack_tolerance_crowd_m": PACK_TOLERANCE_CROWD,
        "variant_count_ranges": {k: list(v) for k, v in VARIANT_COUNT_RANGES.items()},
        "crop_radius_factor": CROP_RADIUS_FACTOR,
        "map_iou_threshold": MAP_IOU_THRESHOLD,
    }
