# -*- coding: utf-8 -*-
#
# __init__.py
#
# This file is part of pylethargy.
#
# pylethargy is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# pylethargy is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with pylethargy.  If not, see <https://www.gnu.org/licenses/>.

# these basic "constants" are declared here before imports because
# other modules we import require them, so we're avoiding circular
# importing errors
__version__ = (0, 1)
VERSION = ".".join(map(str, __version__))
APPNAME = __name__

from pylethargy.core import (
    DATA_DIR,
    DEFAULT_SEED,
    Family,
    Flag,
    Method,
    NormSpec,
    SolverConfig,
    TailKind,
    TailModel,
    TargetSequence,
    as_vector,
)
from pylethargy.distance import distance, distance_oracle, distance_profile
from pylethargy.frechet import (
    BANACH,
    RayConfig,
    check_al_condition,
    corollary_transforms,
    deviation,
    deviation_inf,
    product_witness,
    verify_frechet_bounds,
)
from pylethargy.lethargy import (
    KonyaginConfig,
    check_condition_strict,
    check_condition_weak,
    ratio_report,
    synthesize_exact,
    synthesize_konyagin,
    verify_bounds,
)
from pylethargy.log import setup_logger
from pylethargy.operators import (
    OperatorSpec,
    approximation_numbers,
    approximation_numbers_oracle,
    bernstein_pair_diagonal,
    eigenvalues,
    hmr_operator,
    koenig_limit_check,
    kolmogorov_diameters,
    marcus_chain_check,
    operator_norm,
    to_bound_check,
)
from pylethargy.spaces import (
    SubspaceChain,
    chain_coordinates,
    chain_polynomials,
    chain_random,
    interleave_chain,
    validate_chain,
)
from pylethargy.utils import (
    BaseLethargyError,
    ChainError,
    DimensionError,
    DivergentTailError,
    ExpectationError,
    HypothesisViolationError,
    InfeasibleAtBudgetError,
    InterleaveError,
    InterleaveFailure,
    NonPositiveError,
    NormError,
    OperatorError,
    SequenceError,
    SolverError,
    type_check,
)
