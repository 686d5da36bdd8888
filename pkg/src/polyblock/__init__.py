"""Polynomial block methods with imaginary nodes."""

from .builder import (
    BlockMatrices,
    Endpoint,
    EndpointKind,
    Family,
    Implicitness,
    MethodSpec,
    Strategy,
    active_index_sets,
    build_method,
    exactness_degree,
    expansion_plan,
    make_spec,
    verify_conjugate_structure,
)
from .nodes import NodeFamily, NodeSet, Ordering, chi, conjugate_pairing, generate_nodes

__version__ = "0.1.0"
