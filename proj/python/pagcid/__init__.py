"""Causal identification from partial ancestral graphs under selection bias.

Graphs, models, estimands and kernels are exchanged in the same text formats
as the ``pagc`` command-line tool.
"""

from ._core import (
    GraphError,
    canonical_isadmg,
    d_separated,
    effect,
    eval_estimand,
    fci_from_graph,
    fci_from_scm,
    find_hedge,
    graph_of,
    hedge_witness,
    id_separated,
    kernels_agree,
    mag_of,
    manipulate,
    marginalize_latents,
    normalize,
    normalize_scm,
    scidp,
    sidp,
    to_dot,
    validate,
)

__all__ = [
    "GraphError",
    "canonical_isadmg",
    "d_separated",
    "effect",
    "eval_estimand",
    "fci_from_graph",
    "fci_from_scm",
    "find_hedge",
    "graph_of",
    "hedge_witness",
    "id_separated",
    "kernels_agree",
    "mag_of",
    "manipulate",
    "marginalize_latents",
    "normalize",
    "normalize_scm",
    "scidp",
    "sidp",
    "to_dot",
    "validate",
]
