"""
bgwlab

Exact laws, samplers and verification suites for Galton-Watson trees
conditioned jointly on their size and on their number of leaves or of
internal nodes.
"""

import logging

__version__ = "0.3.0"

from .exceptions import (  # noqa: E402
    BgwLabError,
    BoundExceeded,
    ConfigError,
    DegenerateSupport,
    EmptyConditioning,
    GaveUp,
    InadmissibleK,
    InfeasibleProfile,
    InvalidPath,
    NoInternalNode,
    NonDivisible,
    ShapeMismatch,
    SpecParseError,
)
from .models import (  # noqa: E402
    CondensationStats,
    EmpiricalBatch,
    IntSeqDist,
    Overflow,
    SamplerReport,
    ScaledRational,
    TreeDist,
)
from .offspring import (  # noqa: E402
    Finite,
    Geometric,
    Mode,
    OffspringWeights,
    PolyExp,
    PowerLaw,
    StableTail,
    parse_offspring,
)
from .rng import RngStream  # noqa: E402
from .trees import (  # noqa: E402
    CoreLeafDecomp,
    LeafAncestorDecomp,
    LukasiewiczPath,
    PlaneTree,
    TreeFilter,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    # Trees
    "PlaneTree",
    "LukasiewiczPath",
    "LeafAncestorDecomp",
    "CoreLeafDecomp",
    "TreeFilter",
    # Offspring families
    "OffspringWeights",
    "Finite",
    "Geometric",
    "PolyExp",
    "StableTail",
    "PowerLaw",
    "Mode",
    "parse_offspring",
    # Results
    "ScaledRational",
    "TreeDist",
    "IntSeqDist",
    "SamplerReport",
    "Overflow",
    "CondensationStats",
    "EmpiricalBatch",
    "RngStream",
    # Exceptions
    "BgwLabError",
    "InvalidPath",
    "ShapeMismatch",
    "NoInternalNode",
    "BoundExceeded",
    "InfeasibleProfile",
    "EmptyConditioning",
    "InadmissibleK",
    "NonDivisible",
    "GaveUp",
    "DegenerateSupport",
    "SpecParseError",
    "ConfigError",
]
