"""Droplet geometry in 2D random-cluster (FK) percolation.

Samples FK configurations on finite boxes, extracts exterior open dual
circuits, measures their roughness against Wulff shapes, coarse-grains
hull boundaries into skeletons, and runs bottleneck surgery with its
deterministic identities.
"""

from .bottleneck import (Bottleneck, BottleneckParams, DescendantTree,
                         canonical_path, clean_from_any, descend,
                         find_bottlenecks, hull_size_check,
                         primary_bottleneck, surgery, surgery_on_circuit)
from .circuits import (Circuit, dual_clusters, exterior_circuit_around,
                       innermost_circuit_surrounding, large_exterior_circuits,
                       segment)
from .geometry import (HullData, RoughnessReport, alr, convex_hull, delta_A,
                       hausdorff, mlr, roughness_report)
from .lattice import (Bond, BoxRegion, DualBond, DualSite, Site, bonds_in,
                      boundary_ops, dual_of, primal_of)
from .sampler import (BondConfig, ChainState, ModelParams, cluster_count,
                      dual_config, dual_point, exact_distribution,
                      fk_log_weight, heat_bath_sweep, sample_conditioned,
                      self_dual_point)
from .skeleton import (HullSkeleton, PreSkeleton, SkeletonAudit, audit,
                       hull_skeleton, pre_skeleton, refine)
from .tau_wulff import (TauNorm, WulffShape, estimate_tau, tau_length,
                        wulff_shape)

__version__ = "0.1.0"
