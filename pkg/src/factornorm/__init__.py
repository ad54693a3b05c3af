"""Certificate-producing algorithms around the gamma_2 factorization norm:
norm brackets, monochromatic rectangles, discrepancy sparsification, spectral
MaxCut rounding and inverse-MaxCut clique extraction."""

from .core import Budget, BooleanMatrix, Factorization, Graph, SubmatrixSelection, make_rng, resolve_budget
from .discrepancy import (
    DensityStats,
    DiscrepancyEstimate,
    density_stats,
    disc_exact_small,
    disc_lower_rounding,
    half_density_submatrix,
    sparsify,
    witness_value,
)
from .errors import (
    ContractError,
    FactornormError,
    FormatError,
    InvariantViolation,
    LimitError,
    NumericalError,
    PartialResultError,
)
from .gamma2 import (
    Gamma2Bracket,
    gamma2_bracket,
    gamma2_lower_dual,
    gamma2_lower_normalized_trace,
    gamma2_psd_exact,
    gamma2_upper_als,
    gamma2_upper_rank,
)
from .generators import (
    ConstructionParams,
    PointLineParams,
    gen_point_line,
    gen_random_boolean,
    gen_structured,
    gen_tight_example,
    tight_example,
)
from .graphs import (
    c4_lower_certificate,
    degeneracy_order,
    gamma2_upper_from_degeneracy,
    is_c4_free,
    regularize_degrees,
    smallest_eigenvalue_clique,
    turan_clique,
    zarankiewicz_allones,
)
from .maxcut import (
    CutReport,
    edwards_bound,
    graph_energy,
    hyperplane_round_surplus,
    inverse_maxcut_clique,
    maxcut_exact,
    maxcut_local_search,
    spectral_embedding,
    surplus_compose,
)
from .rectangle import (
    brilliant_scan,
    constant_submatrix_integer,
    find_all_zeros_rectangle,
    find_mono_rectangle,
    gamma2_decrement_step,
    project_step,
    trace_to_gamma_submatrix,
)
from .report import RunReport

__version__ = "0.1.0"
