"""Tools for proving optimal depths of sorting networks.

Networks and output sets live in :mod:`depthgate.network` and
:mod:`depthgate.bits`; second-layer candidates in :mod:`depthgate.layers`;
the propositional encoding in :mod:`depthgate.encoder`; solving and model
checking in :mod:`depthgate.sat`; the exhaustive oracle in
:mod:`depthgate.oracle`; campaigns and tables in :mod:`depthgate.campaign`.
"""

from .network import (
    Network,
    Permutation,
    apply_permutation,
    boolean_evaluate,
    compose,
    evaluate,
    format_network,
    is_generalized_sorting,
    is_sorting,
    outputs,
    parse_network,
    reflect,
    untangle,
)

__version__ = "0.1.0"

__all__ = [
    "Network",
    "Permutation",
    "apply_permutation",
    "boolean_evaluate",
    "compose",
    "evaluate",
    "format_network",
    "is_generalized_sorting",
    "is_sorting",
    "outputs",
    "parse_network",
    "reflect",
    "untangle",
]
