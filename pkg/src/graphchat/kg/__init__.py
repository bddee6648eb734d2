"""Knowledge graph construction: extraction, merging, clustering, reports."""

from .extraction import RawEntity, RawRelationship, extract_elements, parse_records
from .graph import Entity, EntityGraph, Relationship, merge_elements
from .leiden import (
    CommunityAssignment,
    LeidenResult,
    WeightedGraph,
    check_nesting,
    leiden_partition,
    modularity,
)
from .reports import CommunityReport, summarize_communities

__all__ = [
    "RawEntity",
    "RawRelationship",
    "extract_elements",
    "parse_records",
    "Entity",
    "EntityGraph",
    "Relationship",
    "merge_elements",
    "CommunityAssignment",
    "LeidenResult",
    "WeightedGraph",
    "check_nesting",
    "leiden_partition",
    "modularity",
    "CommunityReport",
    "summarize_communities",
]
