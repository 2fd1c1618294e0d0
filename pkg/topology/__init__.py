"""
AS-level topologies: relationships, metadata, prefixes and synthetic generation.
"""

from topology.as_graph import (
    Asn,
    AsGraph,
    Link,
    Relationship,
    canonical_link,
    customer_cone,
    is_valley_free,
    valley_free_with,
    validate_asn,
)
from topology.metadata import AsMetadata, Metadata, parse_metadata, write_metadata
from topology.prefixes import Prefix, allocate_prefixes, first_subprefix, is_subprefix, parse_prefix
from topology.relationships import parse_irr_links, parse_relationships, write_irr_links, write_relationships
from topology.synthetic import (
    TopologyParams,
    generate_irr_links,
    generate_synthetic_metadata,
    generate_synthetic_topology,
)

__all__ = [
    'Asn',
    'AsGraph',
    'AsMetadata',
    'Link',
    'Metadata',
    'Prefix',
    'Relationship',
    'TopologyParams',
    'allocate_prefixes',
    'canonical_link',
    'customer_cone',
    'first_subprefix',
    'generate_irr_links',
    'generate_synthetic_metadata',
    'generate_synthetic_topology',
    'is_subprefix',
    'is_valley_free',
    'parse_metadata',
    'parse_irr_links',
    'parse_prefix',
    'parse_relationships',
    'valley_free_with',
    'validate_asn',
    'write_irr_links',
    'write_metadata',
    'write_relationships',
]
