"""Patient journey knowledge graphs: ontology, extraction, validation, metrics."""
from .errors import *  # noqa: F401,F403
from .graph import Edge, Node, PropertyGraph, Subgraph, union_graphs
from .ontology import OntologySchema, load_default_schema, load_schema, required_counts

__version__ = "0.1.0"

__all__ = [
    "Edge",
    "Node",
    "OntologySchema",
    "PropertyGraph",
    "Subgraph",
    "load_default_schema",
    "load_schema",
    "required_counts",
    "union_graphs",
]
