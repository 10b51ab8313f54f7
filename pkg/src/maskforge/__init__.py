"""maskforge: boundary-aware mask refinement toolkit.

Exact and kernel-approximated boundary regions of binary masks, the
multi-stage coarse-to-fine refinement composition, boundary-quality
evaluation metrics, and an RLE/scene-file serialization layer with a CLI.
"""

__version__ = "0.1.0"

from .boundary import (
    BoundaryKernel,
    BoundaryMethod,
    BoundaryParams,
    boundary_agreement,
    boundary_approx,
    boundary_exact,
    boundary_region,
    contour,
    make_kernel,
)
from .masks import (
    BBox,
    ShapeMismatchError,
    binarize,
    crop_resize_gt,
    mask_iou,
    upsample2x_bilinear,
    upsample2x_binary,
)
from .metrics import (
    EvalReport,
    MatchedPair,
    RegionAccuracies,
    boundary_f1,
    evaluate_corpus,
    match_instances,
    region_accuracies,
)
from .refine import (
    LossWeights,
    StageState,
    aggregate_losses,
    compose_stage,
    oracle_stage_predictor,
    region_bce_loss,
    run_pipeline,
    training_region,
)
from .rle import RleError, RleMask, rle_decode, rle_encode
from .scenes import (
    Instance,
    Scene,
    SceneFormatError,
    load_scene,
    save_scene,
    synth_corpus,
    tight_bbox,
    write_pbm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
