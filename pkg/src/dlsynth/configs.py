"""Rendering synthesized inputs as per-router configuration stanzas.

The synthesized input is a set of ground atoms over the configuration
predicates; `derive_configs` groups them per router and `render_cisco_like`
prints a deterministic, loosely Cisco-flavoured text for each router.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .datalog import Atom, format_atoms
from .network.topology import NetworkError, Topology


@dataclass(frozen=True)
class RouterConfig:
    router: str
    ospf_costs: Mapping[str, int] = field(default_factory=dict)  # neighbor -> w
    static_routes: Mapping[str, str] = field(default_factory=dict)  # net -> nh
    bgp_prefs: Mapping[str, int] = field(default_factory=dict)  # net -> pref
    admin_distances: Mapping[str, int] = field(default_factory=dict)  # proto -> ad


def derive_configs(inp: Iterable[Atom], topology: Topology) -> dict:
    """Group configuration atoms per router; every router gets an entry.

    Raises on atoms naming unknown routers and on conflicting duplicates
    (two values for the same knob)."""
    routers = set(topology.routers)

    def check(r, atom: Atom) -> str:
        if r not in routers:
            raise NetworkError(f"{atom}: unknown router {r}")
        return r

    def put(table: dict, key, value, atom: Atom) -> None:
        if key in table and table[key] != value:
            raise NetworkError(f"{atom}: conflicts with earlier value {table[key]}")
        table[key] = value

    ospf = {r: {} for r in routers}
    static = {r: {} for r in routers}
    prefs = {r: {} for r in routers}
    ads = {r: {} for r in routers}
    for atom in sorted(inp, key=str):
        vals = [t.value for t in atom.args]
        if atom.pred == "SetOSPFEdgeCost":
            src, dst, w = vals
            check(src, atom), check(dst, atom)
            put(ospf[src], dst, w, atom)
        elif atom.pred == "SetStatic":
            net, router, nh = vals
            check(router, atom), check(nh, atom)
            put(static[router], net, nh, atom)
        elif atom.pred == "SetBGPLocalPref":
            net, router, pref = vals
            check(router, atom)
            put(prefs[router], net, pref, atom)
        elif atom.pred == "SetAD":
            proto, router, ad = vals
            check(router, atom)
            put(ads[router], proto, ad, atom)
        else:
            raise NetworkError(f"{atom}: not a configuration predicate")
    return {r: RouterConfig(r, ospf_costs=ospf[r], static_routes=static[r],
                            bgp_prefs=prefs[r], admin_distances=ads[r])
            for r in sorted(routers)}


def render_cisco_like(config: RouterConfig) -> str:
    lines = [f"hostname {config.router}", "!"]
    for proto in sorted(config.admin_distances):
        lines.append(f"distance {proto} {config.admin_distances[proto]}")
    if config.admin_distances:
        lines.append("!")
    if config.ospf_costs:
        lines.append("router ospf 1")
        for nbr in sorted(config.ospf_costs):
            lines.append(f" interface to-{nbr}")
            lines.append(f"  ip ospf cost {config.ospf_costs[nbr]}")
        lines.append("!")
    for net in sorted(config.static_routes):
        lines.append(f"ip route {net} via {config.static_routes[net]}")
    if config.static_routes:
        lines.append("!")
    if config.bgp_prefs:
        lines.append("router bgp 65000")
        for net in sorted(config.bgp_prefs):
            lines.append(f" network {net} local-preference {config.bgp_prefs[net]}")
        lines.append("!")
    return "\n".join(lines) + "\n"


def write_configs(inp: Iterable[Atom], topology: Topology, outdir) -> list:
    """Write <outdir>/<router>.cfg for every router plus input.atoms with the
    raw synthesized input; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for router, config in derive_configs(inp, topology).items():
        path = outdir / f"{router}.cfg"
        path.write_text(render_cisco_like(config), encoding="utf-8")
        written.append(path)
    atoms_path = outdir / "input.atoms"
    atoms_path.write_text(format_atoms(inp), encoding="utf-8")
    written.append(atoms_path)
    return written
