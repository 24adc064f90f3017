"""Named explicit networks."""

from ..functions import Function1D, named_function
from .basic import build_abs_sum, build_clip
from .interpolation import (
    Grid1D,
    build_componentwise,
    build_grid_loclip,
    build_interpolation,
    build_loclip_1d,
    componentwise_lipschitz,
)
from .maxima import build_max, build_running_max, max2_net
from .pipeline import (
    Componentwise,
    PipelinePlan,
    PipelineSpec,
    RunningMax,
    RunningProduct,
    build_pipeline,
    parse_pipeline,
    pipeline_oracle,
    pipeline_out_dim,
    plan_pipeline,
)
from .products import (
    build_pairwise_prod,
    build_prod,
    build_prod2,
    build_prod_pow2,
    build_running_prod,
    build_running_prod_clipped,
    build_square,
    build_square01,
    ceil_log2,
    prod_tree_tolerances,
    square01_length,
)
