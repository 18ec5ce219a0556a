"""Order structure of finite-dimensional spaces with polyhedral cones.

Disjointness is decided by LP, bands come from the functional-representation
cover, and the semigroup results are checked on matrix exponentials.
"""

from .cover import LatticeCover, canonicalize, certify_order_density, embed
from .norms import NormSpec, regular_norm, rho_extension, rho_meet
from .operators import (
    LinOp,
    Verdict,
    center_bound_check,
    inverse_local_check,
    is_band_preserving,
    is_bipositive,
    is_disjointness_preserving,
    is_local,
    is_positive,
    locality_algebra_check,
    positive_off_diagonal_pair,
)
from .optim import LinearProgram, LPOutcome, LPStatus, cone_member, solve_lp
from .semigroups import (
    ScanReport,
    Semigroup,
    YosidaParams,
    cor_positive_resolvents,
    expm,
    resolvent,
    thm_bounded_local,
    thm_generator_local,
    thm_local_resolvents,
    yosida,
)
from .spaces import (
    Band,
    OrderedSpace,
    Tri,
    band,
    disjoint_complement,
    enumerate_bands,
    is_disjoint,
    is_disjoint_oracle,
    load_space,
    make_space,
)

__version__ = "0.1.0"
