"""
CAIDA serial-1 AS relationship files (provider-customer and peer subset).

Format is as1|as2|rel, where -1 means as1 is the provider of as2 and 0
means a peering. Lines starting with '#' are comments, except '# node <asn>'
which declares an AS without relationships.
"""

import logging
import re
from typing import Dict, Iterable, Set, Union

from exceptions import ParseError, RelationshipConflictError
from topology.as_graph import AsGraph, Link, Relationship, canonical_link, validate_asn

logger = logging.getLogger(__name__)

_relationship_regexp = re.compile(r'^(\d+)\|(\d+)\|(-?\d+)(\|.*)?$')
_relationship_valid = {Relationship.PROVIDER_TO_CUSTOMER.value, Relationship.PEER_TO_PEER.value}
_node_regexp = re.compile(r'^# node (\d+)$')


def _lines(text: Union[str, Iterable[str]]) -> Iterable[str]:
    if isinstance(text, str):
        return text.splitlines()
    return text


def parse_relationships(text: Union[str, Iterable[str]]) -> AsGraph:
    """
    Parse an AS relationship file into a graph.

    Args:
        text (str or iterable): File contents or a line stream

    Returns:
        AsGraph: Parsed topology

    Raises:
        ParseError: If a line is malformed or uses an unsupported code
        RelationshipConflictError: If a pair is declared twice differently
    """
    nodes = set()
    edges: Dict[Link, Relationship] = {}
    declared: Dict[Link, tuple] = {}

    for line_number, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        node = _node_regexp.match(line)
        if node is not None:
            try:
                nodes.add(validate_asn(int(node.group(1))))
            except ValueError as e:
                raise ParseError(str(e), line_number) from e
            continue
        if not line or line.startswith('#'):
            continue
        m = _relationship_regexp.match(line)
        if m is None:
            raise ParseError(f"malformed relationship line: {line!r}", line_number)
        try:
            as1 = validate_asn(int(m.group(1)))
            as2 = validate_asn(int(m.group(2)))
        except ValueError as e:
            raise ParseError(str(e), line_number) from e
        rel = int(m.group(3))
        if rel not in _relationship_valid:
            raise ParseError(f"unsupported relationship code {rel}", line_number)
        if as1 == as2:
            raise ParseError(f"self-loop on AS{as1}", line_number)

        key = canonical_link(as1, as2)
        # A provider link is identified by its provider, a peering by the pair alone.
        signature = (rel, as1 if rel == -1 else None)
        previous = declared.get(key)
        if previous is not None:
            if previous != signature:
                raise RelationshipConflictError(key, line_number)
            continue
        declared[key] = signature
        nodes.update((as1, as2))
        edges[(as1, as2) if rel == -1 else key] = Relationship(rel)

    graph = AsGraph(nodes, edges)
    logger.debug("parsed %d ASes and %d relationships", len(graph), len(edges))
    return graph


def write_relationships(graph: AsGraph) -> str:
    """Serialise a graph back to the relationship file format."""
    lines = ["# as1|as2|rel (-1: as1 provider of as2, 0: peers)"]
    lines.extend(f"{a}|{b}|{rel}" for a, b, rel in graph.edge_list())
    # Isolated ASes have no relationship line.
    connected = {asn for a, b, _ in graph.edge_list() for asn in (a, b)}
    lines.extend(f"# node {asn}" for asn in sorted(graph.nodes - connected))
    return "\n".join(lines) + "\n"


_irr_regexp = re.compile(r'^(\d+)\|(\d+)$')


def parse_irr_links(text: Union[str, Iterable[str]]) -> Set[Link]:
    """
    Links registered in the IRR, one as1|as2 pair per line.

    Raises:
        ParseError: On malformed lines or self-loops
    """
    links = set()
    for line_number, raw in enumerate(_lines(text), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        m = _irr_regexp.match(line)
        if m is None:
            raise ParseError(f"expected as1|as2, got '{line}'", line_number)
        a, b = int(m.group(1)), int(m.group(2))
        if a == b:
            raise ParseError(f"self-loop on AS{a}", line_number)
        links.add(canonical_link(a, b))
    return links


def write_irr_links(links: Iterable[Link]) -> str:
    lines = ["# as1|as2 links registered in the IRR"]
    lines.extend(f"{a}|{b}" for a, b in sorted(canonical_link(*link) for link in links))
    return "\n".join(lines) + "\n"
