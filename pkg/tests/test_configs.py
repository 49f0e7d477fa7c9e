"""Tests for config derivation and rendering."""
import pytest

from dlsynth.configs import derive_configs, render_cisco_like, write_configs
from dlsynth.datalog import ground_atom, parse_atoms
from dlsynth.network import NetworkError, parse_topology

TOPO = parse_topology("""
router A
router B
router C
router D
link A B
link B C
link C D
link A C
link A D
link B D
network N1 attached D
external Ext announced B C
""")

FIG1D = [
    ground_atom("SetOSPFEdgeCost", "A", "B", 10),
    ground_atom("SetOSPFEdgeCost", "A", "C", 5),
    ground_atom("SetOSPFEdgeCost", "A", "D", 5),
    ground_atom("SetStatic", "N1", "A", "B"),
    ground_atom("SetAD", "ospf", "A", 1),
    ground_atom("SetBGPLocalPref", "Ext", "B", 2),
]


class TestDerive:
    def test_overview_router(self):
        configs = derive_configs(FIG1D, TOPO)
        a = configs["A"]
        assert a.ospf_costs == {"B": 10, "C": 5, "D": 5}
        assert a.static_routes == {"N1": "B"}
        assert a.admin_distances == {"ospf": 1}
        assert configs["B"].bgp_prefs == {"Ext": 2}

    def test_total_over_routers(self):
        configs = derive_configs([], TOPO)
        assert set(configs) == {"A", "B", "C", "D"}
        assert all(not c.ospf_costs and not c.static_routes
                   for c in configs.values())

    def test_round_trip(self):
        configs = derive_configs(FIG1D, TOPO)
        back = set()
        for r, c in configs.items():
            back |= {ground_atom("SetOSPFEdgeCost", r, nh, w)
                     for nh, w in c.ospf_costs.items()}
            back |= {ground_atom("SetStatic", net, r, nh)
                     for net, nh in c.static_routes.items()}
            back |= {ground_atom("SetAD", p, r, ad)
                     for p, ad in c.admin_distances.items()}
            back |= {ground_atom("SetBGPLocalPref", net, r, pref)
                     for net, pref in c.bgp_prefs.items()}
        assert back == set(FIG1D)

    def test_unknown_router(self):
        with pytest.raises(NetworkError):
            derive_configs([ground_atom("SetAD", "ospf", "Z", 1)], TOPO)

    def test_conflicting_duplicates(self):
        with pytest.raises(NetworkError):
            derive_configs([ground_atom("SetOSPFEdgeCost", "A", "B", 1),
                            ground_atom("SetOSPFEdgeCost", "A", "B", 2)], TOPO)

    def test_non_config_predicate(self):
        with pytest.raises(NetworkError):
            derive_configs([ground_atom("Fwd", "N1", "A", "B")], TOPO)


class TestRender:
    def test_contains_ospf_cost_line(self):
        text = render_cisco_like(derive_configs(FIG1D, TOPO)["A"])
        assert "ip ospf cost 10" in text
        assert "ip route N1 via B" in text

    def test_empty_config_header_only(self):
        text = render_cisco_like(derive_configs([], TOPO)["C"])
        assert text.splitlines()[0] == "hostname C"
        assert "ospf" not in text and "ip route" not in text

    def test_deterministic_and_one_line_diff(self):
        changed = [a for a in FIG1D
                   if a != ground_atom("SetOSPFEdgeCost", "A", "B", 10)]
        changed.append(ground_atom("SetOSPFEdgeCost", "A", "B", 11))
        base = render_cisco_like(derive_configs(FIG1D, TOPO)["A"])
        again = render_cisco_like(derive_configs(list(reversed(FIG1D)), TOPO)["A"])
        other = render_cisco_like(derive_configs(changed, TOPO)["A"])
        assert base == again  # order independent
        diff = [pair for pair in zip(base.splitlines(), other.splitlines())
                if pair[0] != pair[1]]
        assert len(diff) == 1
        assert diff[0][1] == "  ip ospf cost 11"


class TestWrite:
    def test_layout(self, tmp_path):
        written = write_configs(FIG1D, TOPO, tmp_path / "out")
        names = sorted(p.name for p in written)
        assert names == ["A.cfg", "B.cfg", "C.cfg", "D.cfg", "input.atoms"]
        atoms = parse_atoms((tmp_path / "out" / "input.atoms").read_text())
        assert atoms == frozenset(FIG1D)
