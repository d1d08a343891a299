"""Hamilton cycle packing in random graphs with minimum-degree constraints.

Samplers for G(n, m) conditioned on minimum degree, k-cores along the random
graph process, matching peeling, Posa-rotation path closure and a packing
pipeline that emits checkable certificates.
"""

from hamcore.graph_core import CoreResult, Graph, MultiGraph, ProcessState, k_core, process_stream, tau_k
from hamcore.matching import Matching, TwoMatching, max_matching, max_two_matching
from hamcore.packer import PackerConfig, PackingCertificate, pack, pack_process
from hamcore.verify import validate_certificate

__version__ = "0.1.0"

__all__ = [
    "CoreResult",
    "Graph",
    "Matching",
    "MultiGraph",
    "PackerConfig",
    "PackingCertificate",
    "ProcessState",
    "TwoMatching",
    "k_core",
    "max_matching",
    "max_two_matching",
    "pack",
    "pack_process",
    "process_stream",
    "tau_k",
    "validate_certificate",
]
