"""Edge-differentially-private synthetic graph publication via community structure."""

from .community import (
    ConfigError,
    Partition,
    UndefinedModularityError,
    WeightedSuperGraph,
    build_weighted_supergraph,
    community_adjust,
    community_initialize,
    louvain,
    modularity,
    random_partition,
)
from .config import SynthesisConfig, load_config
from .dp import (
    BudgetViolationError,
    InvalidBudgetError,
    PhaseBudget,
    PrivacyBudget,
    PrivacyLedger,
    accountant_check,
    em_select,
    laplace_perturb,
    norm_sub,
)
from .extraction import ExtractedInfo, extract, perturb
from .graph import Graph, ParseError, parse_edge_list, read_edge_list, write_edge_list
from .im import SpreadEstimate, degree_discount, ic_spread
from .kernels import BACKEND
from .metrics import MetricsReport, evaluate, nmi
from .reconstruction import reconstruct_inter, reconstruct_intra, synthesize
from .tmf import tmf_synthesize

__version__ = "0.1.0"
