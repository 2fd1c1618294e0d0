"""
IPv4 prefix helpers.
"""

from ipaddress import IPv4Address, IPv4Network
from typing import Dict, Iterable, Optional, Sequence

from exceptions import NoSubprefixError, ParseError

Prefix = IPv4Network


def parse_prefix(text: str) -> Prefix:
    """
    Parse 'a.b.c.d/len' with host bits required to be zero.

    Raises:
        ParseError: If the text is not a valid IPv4 prefix
    """
    try:
        return IPv4Network(text.strip(), strict=True)
    except ValueError as e:
        raise ParseError(f"invalid prefix {text!r}: {e}") from e


def is_subprefix(inner: Prefix, outer: Prefix) -> bool:
    """True if inner is equal to or more specific than outer."""
    return inner.subnet_of(outer)


def first_subprefix(prefix: Prefix) -> Prefix:
    """
    First half of a prefix (one bit longer).

    Raises:
        NoSubprefixError: If the prefix is a /32
    """
    if prefix.prefixlen >= 32:
        raise NoSubprefixError(f"{prefix} has no sub-prefix")
    return next(prefix.subnets(prefixlen_diff=1))


def allocate_prefixes(asns: Iterable[int], base: str = '16.0.0.0', length: int = 20) -> Dict[int, Prefix]:
    """One consecutive prefix per AS in ascending ASN order."""
    start = int(IPv4Address(base))
    step = 1 << (32 - length)
    allocation = {}
    for index, asn in enumerate(sorted(asns)):
        address = start + index * step
        if address + step - 1 > 0xFFFFFFFF:
            raise ParseError(f"prefix space exhausted after {index} ASes")
        allocation[asn] = IPv4Network((address, length))
    return allocation


def longest_match(prefixes: Sequence[Prefix], target: Prefix) -> Optional[Prefix]:
    """Most specific prefix covering target, if any."""
    covering = [p for p in prefixes if target.subnet_of(p)]
    if not covering:
        return None
    return max(covering, key=lambda p: p.prefixlen)
