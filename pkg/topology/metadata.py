"""
PeeringDB-lite AS metadata: country, IXP and facility memberships.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional

from exceptions import ParseError
from topology.as_graph import Asn, validate_asn

logger = logging.getLogger(__name__)

UNKNOWN_COUNTRY = None

Metadata = Dict[Asn, "AsMetadata"]


@dataclass(frozen=True)
class AsMetadata:
    """Infrastructure and geography of one AS."""

    asn: Asn
    country: Optional[str] = UNKNOWN_COUNTRY
    ixps: FrozenSet[int] = field(default_factory=frozenset)
    facilities: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.country is not None:
            object.__setattr__(self, 'country', self.country.upper())

    def to_dict(self) -> Dict:
        entry = {'ixps': sorted(self.ixps), 'facilities': sorted(self.facilities)}
        if self.country is not None:
            entry['country'] = self.country
        return entry


def _int_set(value, what: str, asn: str) -> FrozenSet[int]:
    if value is None:
        return frozenset()
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ParseError(f"AS{asn}: '{what}' must be an array of integers")
    return frozenset(value)


def parse_metadata(text: str) -> Metadata:
    """
    Parse a PeeringDB-lite JSON document.

    Args:
        text (str): JSON object mapping ASN strings to
            {country, ixps, facilities}

    Returns:
        dict: ASN -> AsMetadata; unknown fields are ignored, a missing
        country is unknown and missing arrays are empty

    Raises:
        ParseError: If the document is not valid JSON of the expected shape
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid metadata document: {e.msg}", e.lineno) from e
    if not isinstance(document, dict):
        raise ParseError("metadata document must be a JSON object")

    metadata: Metadata = {}
    for key, entry in document.items():
        try:
            asn = validate_asn(int(key))
        except ValueError as e:
            raise ParseError(f"invalid ASN key {key!r}") from e
        if not isinstance(entry, dict):
            raise ParseError(f"AS{key}: entry must be an object")
        country = entry.get('country')
        if country is not None and (not isinstance(country, str) or len(country) != 2):
            raise ParseError(f"AS{key}: country must be a 2-letter code")
        metadata[asn] = AsMetadata(
            asn=asn,
            country=country,
            ixps=_int_set(entry.get('ixps'), 'ixps', key),
            facilities=_int_set(entry.get('facilities'), 'facilities', key),
        )
    return metadata


def write_metadata(metadata: Mapping[Asn, AsMetadata]) -> str:
    """Serialise metadata to the PeeringDB-lite format."""
    document = {str(asn): metadata[asn].to_dict() for asn in sorted(metadata)}
    return json.dumps(document, indent=1, sort_keys=True)
