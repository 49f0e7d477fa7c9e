"""Network-wide router configuration synthesis on top of the core engine."""
from .direct import AUX_PREDICATES, DirectModel, build_direct_model
from .model import (
    FIXED_PREDICATES,
    FREE_PREDICATES,
    NetworkProgram,
    build_network_program,
    check_strata,
    config_wf_constraints,
    directly_connected_constraints,
    network_domain_constraints,
    partial_evaluate,
)
from .topology import (
    PROTOCOLS,
    NetworkError,
    ProtocolSuite,
    Topology,
    parse_topology,
)

__all__ = [
    "AUX_PREDICATES",
    "DirectModel",
    "FIXED_PREDICATES",
    "FREE_PREDICATES",
    "NetworkError",
    "NetworkProgram",
    "PROTOCOLS",
    "ProtocolSuite",
    "Topology",
    "build_direct_model",
    "build_network_program",
    "check_strata",
    "config_wf_constraints",
    "directly_connected_constraints",
    "network_domain_constraints",
    "parse_topology",
    "partial_evaluate",
]
