"""cantorqc: random Cantor sets, explicit quasiconformal maps between their
complements, and the analytic classifiers of the accompanying paper."""

__version__ = "0.1.0"

from .errors import (CantorQCError, DecompositionError, DegenerateMapError, GeometryError,  # noqa: E402
                     InvalidSequenceError, MapDomainError, NoLowerBoundError)
from .sequences import (GapSequence, effective_delta, parse_sequence, q_at,  # noqa: E402
                        sequence_distance)
from .construction import (CantorLevels, build_levels, check_gap_bound, gap_length,  # noqa: E402
                           interval_length)
from .pants import (NormalizedPants, PantsDecomposition, ScaledPants, build_decomposition,  # noqa: E402
                    normalize_pants, scale_pants)
from .maps import (AnnulusMap, PantsMap, PiecewiseQCMap, annulus_map_eval, build_global_map,  # noqa: E402
                   build_pants_map, measure_dilatation)
from .ledger import (DilatationLedger, asymptotic_conformality, build_ledger, c_delta,  # noqa: E402
                     geometric_example_budget, geometric_growth_fit, step5_bound, step6_bound)
from .analysis import (astala_bound, box_dimension, capacity_classify,  # noqa: E402
                       dimension_equality_check)
from .obstructions import annulus_core_length, find_obstruction, wolpert_threshold  # noqa: E402
from .julia import (classify_quadratic, fatou_exhaustion_census, hyperbolicity_certificate,  # noqa: E402
                    plan_matching)
