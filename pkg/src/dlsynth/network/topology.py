"""Topology and protocol-suite descriptions plus the line-oriented file format.

Topology files are UTF-8, one directive per line, ``#`` starts a comment::

    router <name>
    link <r1> <r2>
    network <net> attached <router>
    external <net> announced <r1> [<r2> ...]
    pin bgp-pref <router> <net> <int>
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from ..datalog import DatalogError

PROTOCOLS = ("bgp", "ospf", "static")


class NetworkError(DatalogError):
    pass


@dataclass(frozen=True)
class Topology:
    routers: tuple[str, ...]
    links: frozenset  # of frozenset({r1, r2})
    internal: Mapping[str, str]  # network -> attached router
    external: Mapping[str, tuple[str, ...]]  # network -> announcing routers
    pins: Mapping[tuple[str, str], int] = field(default_factory=dict)
    # (network, router) -> pinned BGP local preference

    def __post_init__(self) -> None:
        names = set(self.routers)
        if len(self.routers) != len(names):
            raise NetworkError("duplicate router names")
        if not self.routers:
            raise NetworkError("topology declares no routers")
        for pair in self.links:
            ends = tuple(pair)
            if len(ends) != 2:
                raise NetworkError(f"link must join two distinct routers: {sorted(pair)}")
            for r in ends:
                if r not in names:
                    raise NetworkError(f"link endpoint {r} is not a declared router")
        nets = set(self.internal) | set(self.external)
        if set(self.internal) & set(self.external):
            raise NetworkError("a network cannot be both internal and external")
        if nets & names:
            raise NetworkError("network names must not collide with router names")
        for net, r in self.internal.items():
            if r not in names:
                raise NetworkError(f"network {net} attached at unknown router {r}")
        for net, announcers in self.external.items():
            if not announcers:
                raise NetworkError(f"external network {net} has no announcing routers")
            if len(set(announcers)) != len(announcers):
                raise NetworkError(f"external network {net} repeats an announcer")
            for r in announcers:
                if r not in names:
                    raise NetworkError(f"{net} announced by unknown router {r}")
        for (net, r), pref in self.pins.items():
            if r not in self.external.get(net, ()):
                raise NetworkError(
                    f"pin bgp-pref {r} {net}: {r} does not announce {net}")
            if pref < 1:
                raise NetworkError(f"pin bgp-pref {r} {net}: preference must be >= 1")

    @property
    def networks(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.internal) | set(self.external)))

    def neighbors(self, router: str) -> tuple[str, ...]:
        return tuple(sorted(other for pair in self.links if router in pair
                            for other in pair if other != router))

    def has_link(self, r1: str, r2: str) -> bool:
        return frozenset({r1, r2}) in self.links

    def directed_links(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted((a, b) for pair in self.links
                            for a in pair for b in pair if a != b))

    def component(self, start: str) -> frozenset:
        seen, stack = {start}, [start]
        while stack:
            for nxt in self.neighbors(stack.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)


@dataclass(frozen=True)
class ProtocolSuite:
    enabled: frozenset

    def __post_init__(self) -> None:
        bad = set(self.enabled) - set(PROTOCOLS)
        if bad:
            raise NetworkError(f"unknown protocols: {sorted(bad)}")
        if not self.enabled:
            raise NetworkError("no protocols enabled")
        if "bgp" in self.enabled and "ospf" not in self.enabled:
            raise NetworkError("bgp requires ospf (its tie-break uses IGP costs)")

    @classmethod
    def of(cls, *names: str) -> "ProtocolSuite":
        return cls(frozenset(names))

    @property
    def ordered(self) -> tuple[str, ...]:
        return tuple(p for p in PROTOCOLS if p in self.enabled)


def parse_topology(text: str) -> Topology:
    routers: list[str] = []
    links = set()
    internal: dict[str, str] = {}
    external: dict[str, tuple[str, ...]] = {}
    pins: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "router" and len(words) == 2:
                routers.append(words[1])
            elif words[0] == "link" and len(words) == 3:
                if words[1] == words[2]:
                    raise NetworkError(f"line {lineno}: self-link at {words[1]}")
                links.add(frozenset(words[1:3]))
            elif words[0] == "network" and len(words) == 4 and words[2] == "attached":
                if words[1] in internal:
                    raise NetworkError(f"line {lineno}: network {words[1]} redeclared")
                internal[words[1]] = words[3]
            elif words[0] == "external" and len(words) >= 4 and words[2] == "announced":
                if words[1] in external:
                    raise NetworkError(f"line {lineno}: network {words[1]} redeclared")
                external[words[1]] = tuple(words[3:])
            elif words[:2] == ["pin", "bgp-pref"] and len(words) == 5:
                pins[(words[3], words[2])] = int(words[4])
            else:
                raise NetworkError(f"line {lineno}: cannot parse {line!r}")
        except ValueError:
            raise NetworkError(f"line {lineno}: cannot parse {line!r}") from None
    try:
        return Topology(tuple(routers), frozenset(links), internal, external, pins)
    except NetworkError as exc:
        raise NetworkError(f"invalid topology: {exc}") from None
