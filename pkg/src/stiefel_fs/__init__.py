"""Feature ranking from orthogonality-constrained least squares.

Pipeline: standardize -> centre -> minimize ||W^T A - B||_F^2 on the Stiefel
manifold for a grid of direction weights -> keep the run with the smallest
descent-curve area -> score each feature by the polygon area of its row of
|W| -> evaluate the ranking by backward elimination.
"""

__version__ = "0.1.0"

from .data import Dataset, OneHotLabels, SplitIndices, load_csv, one_hot, split, standardize
from .errors import (
    ConfigError,
    DataError,
    DataIOError,
    DimensionError,
    NumericalError,
    StiefelFSError,
)
from .evaluation import (
    EvalConfig,
    EvalCurve,
    backward_eliminate,
    default_schedule,
    knn_predict,
    train_linear,
)
from .objective import (
    CenteredProblem,
    build_problem,
    gradient,
    objective_value,
    recover_bias,
)
from .optimizer import (
    DescentTrace,
    SearchConfig,
    SimplexWeights,
    bb_step,
    hybrid_direction,
    init_stiefel,
    minimize,
    retract,
    tangent_step,
)
from .scoring import (
    FeaturePolygon,
    FeatureRanking,
    QuadrantWeights,
    build_polygon,
    polygon_area,
    quadrant_process,
    rank_features,
)
from .search import SimplexGrid, SweepResult, build_grid, curve_area, sweep
