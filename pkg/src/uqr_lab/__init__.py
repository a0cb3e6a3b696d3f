"""uqr-lab: a numerical laboratory for uniformly quasiregular dynamics.

Model manifolds and self-map families, balanced measures via preimage
trees, Bowen-Dinaburg entropy from separated chain packings, the
measure-theoretic Jacobian route to the entropy lower bound, chain-graph
Hausdorff geometry, and cross-checking theorem audits -- all seeded and
reproducible.
"""

from .geometry import (SPHERE2, Manifold, Point, ProductPoint, dist,
                       product_dist, sample_uniform, sup_dist, torus)
from .dynamics import (IterateMap, ShearedEndo, SpherePowerMap, ToralEndo,
                       chain_point, identity_map, iterate_distortion)
from .measures import (EmpiricalMeasure, balanced_iterate,
                       balancedness_residual, box_mass, integrate, pullback,
                       pushforward_eval)
from .entropy_top import (BaseSource, EntropyEstimate, audit_theorem_3_1,
                          h_eps_estimate, lodn_estimate, lov_estimate,
                          pack_separated, topological_entropy_estimate)
from .entropy_measure import (PartitionSpec, entropy_lower_bound_report,
                              ks_entropy_estimate, mt_jacobian)
from .graph_geometry import (AhlforsScan, ahlfors_scan, chain_volume,
                             check_pointwise_bound, local_volume, n_jacobian)
from .audits import (audit_main_theorem, audit_theorem_7_1, bihari_check,
                     generate_bihari_instance)
from .reporting import AuditReport

__version__ = "0.1.0"

__all__ = [
    "Manifold", "Point", "ProductPoint", "torus", "SPHERE2",
    "dist", "sup_dist", "product_dist", "sample_uniform",
    "ToralEndo", "SpherePowerMap", "ShearedEndo", "IterateMap",
    "identity_map", "chain_point", "iterate_distortion",
    "EmpiricalMeasure", "pushforward_eval", "pullback", "balanced_iterate",
    "integrate", "box_mass", "balancedness_residual",
    "BaseSource", "EntropyEstimate", "pack_separated", "h_eps_estimate",
    "topological_entropy_estimate", "lov_estimate", "lodn_estimate",
    "audit_theorem_3_1",
    "PartitionSpec", "mt_jacobian", "entropy_lower_bound_report",
    "ks_entropy_estimate",
    "n_jacobian", "chain_volume", "local_volume", "AhlforsScan",
    "ahlfors_scan", "check_pointwise_bound",
    "bihari_check", "generate_bihari_instance", "audit_theorem_7_1",
    "audit_main_theorem", "AuditReport",
    "__version__",
]
