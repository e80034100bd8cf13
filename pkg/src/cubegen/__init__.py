"""Cubemap-based spatio-temporal autoregressive 360-degree video machinery.

Submodules map one-to-one onto the processing stages:

- :mod:`cubegen.geometry`   projections among perspective / equirect / cubemap
- :mod:`cubegen.planner`    temporal windows and coverage-guided face order
- :mod:`cubegen.context`    history pool and [hist; curr; fut] assembly
- :mod:`cubegen.attention`  banded context mask, dense/sparse paths, FLOPs
- :mod:`cubegen.continuity` flattened-cross positions, padding, blending
- :mod:`cubegen.pipeline`   flow-matching loss/sampler and the generation loop
- :mod:`cubegen.scene`      analytic synthetic scenes for oracles and demos
- :mod:`cubegen.cli`        the ``cubegen`` command-line tool
"""

from .faces import FACES, adjacent_faces
from .geometry import (
    CameraPose,
    CubemapFrame,
    CubemapVideo,
    EquirectGrid,
    PerspectiveFrame,
    cubemap_to_equirect,
    equirect_to_cubemap,
    project_perspective_to_cubemap,
    sample_trajectory,
)
from .planner import (
    CoverageTable,
    FrameCoverage,
    GenerationPlan,
    PlanStep,
    WindowPartition,
    frame_coverage,
    partition_windows,
    plan_order,
    window_coverage,
)
from .context import (
    ContextBundle,
    ContextPool,
    FragmentSpec,
    assemble_context,
    pool_push,
    select_future_fragments,
    short_horizon_coverage,
)
from .attention import (
    AttentionInputs,
    BandedMaskSpec,
    TokenLayout,
    attention_flops,
    build_context_mask,
    dense_masked_attention,
    sparse_context_attention,
)
from .continuity import (
    CubeLayout,
    PaddedFace,
    blend_overlaps,
    corner_cycle_identity,
    face_position_grid,
    pad_face,
    seam_metric,
)
from .pipeline import (
    ConditioningTag,
    SamplerConfig,
    euler_sample,
    flow_matching_loss,
    generate_all,
    generate_step,
    oracle_denoiser,
    sample_path,
)
from .config import RunConfig, parse_config
from .scene import SyntheticScene, synth_scene

__version__ = "0.1.0"
