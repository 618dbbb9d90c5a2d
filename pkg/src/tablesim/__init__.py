"""tablesim: desk-scale tabletop scene composition, simulated depth scanning,
TSDF reconstruction, automatic annotation, and tabletop-aware sampling.
"""

from .annotate import (
    DatasetSample,
    LabeledCloud,
    assemble_variant,
    label_points,
    load_boxes,
    load_labeled_cloud,
    save_boxes,
    save_labeled_cloud,
    split_dataset,
)
from .catalog import (
    AssetCatalog,
    CatalogObject,
    CatalogTable,
    candidate_categories,
    load_catalog,
    save_catalog,
    validate_catalog,
)
from .fusion import ReconstructionParams, TsdfVolume, reconstruct_scene
from .geometry import (
    BBox3D,
    RigidPlacementTransform,
    TriMesh,
    aabb_of,
    apply_transform,
    iou_3d,
    merge_meshes,
    point_in_obb,
    points_in_obb,
)
from .meshio import load_mesh, save_mesh
from .metrics import map_at, miou
from .placement import (
    MaterializedScene,
    Placement,
    SceneConfig,
    calibrate_height,
    check_collision,
    contact_gap,
    materialize,
    place,
    procedural_place,
    revalidate_config,
)
from .sampling import (
    LossTerms,
    ScoreField,
    density_report,
    discriminator_bce,
    discriminator_mse,
    dynamic_sample,
    fps,
    grid_sample,
    joint_loss,
    random_sample,
    soft_gt,
)
from .scansim import (
    DEFAULT_INTRINSICS,
    CameraIntrinsics,
    CameraPose,
    DepthFrame,
    add_sensor_noise,
    render_depth,
    sample_poses,
)
from .synthetic import build_demo_catalog

__version__ = "0.1.0"
