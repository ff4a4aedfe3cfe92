"""Monte Carlo laboratory for covering paths of lattice random walks.

Library layout:

- ``lattice``: exact Z^d geometry (points, nearest-neighbor paths, sets)
- ``sparse``: the sparse transient diagonal subset, its counting function,
  integrals/tail sums, and the counterexample set
- ``walk``: streaming simple random walk and trajectory transforms
- ``kernels``: numba Monte Carlo cores
- ``estimate``: reproducible parallel estimators and serialization
- ``cli``: the ``coverwalk`` experiment runner
"""

from .lattice import (
    NNPath,
    Point,
    PointSet,
    axis_path,
    diagonal_points,
    l1_norm,
    point_set,
    staircase_path,
    validate_nn_path,
)
from .sparse import (
    AnnularSlice,
    SparseDiagonal,
    annular_slices,
    c_n,
    counterexample_set,
    forced_prefix_enumeration,
    integral_log_power,
    lemma_lower_bound,
    log_power_sum,
    n_k,
    sparse_points,
    tail_sum_after,
    tail_sum_before,
)
from .walk import (
    WalkStream,
    child_seed,
    cover_completion,
    difference_walk,
    first_return_time,
    hit_time,
    sample_trajectory,
    z_walk,
)
from .estimate import (
    Estimate,
    SeriesEstimate,
    capacity_estimate,
    cover_series,
    diagonal_return_probability,
    estimate_cover,
    estimate_escape,
    estimate_return,
    interval_cover_z,
    polya_baseline,
    return_profile,
    wiener_partial_sum,
    wilson_interval,
)

__version__ = "0.1.0"
