"""bmlab: a desk-scale laboratory for Brownian-map geometry.

Samplers for excursion-driven metric spaces and random quadrangulations,
stable branching-process machinery, a free-field grid metric, and geodesic
analytics (bundles, network signatures, star censuses, covering slopes,
confluence tables) over any of them.
"""

__version__ = "0.1.0"

from .csbp import (CsbpPath, LevyPath, MergePPP, csbp_excursion_lifetime_cdf,
                   extinction_prob, lamperti_csbp_to_levy,
                   lamperti_levy_to_csbp, merge_depth, sample_csbp,
                   sample_levy, sample_merge_ppp, u_t)
from .gaussian import (BrownianSnakeSample, sample_bridge, sample_excursion,
                       sample_snake_labels)
from .geodesics import (GeodesicBundle, GeodesicPath, StarReport,
                        classify_network, coalescence_point,
                        enumerate_geodesics, extract_geodesic,
                        frame_box_dimension, geodesic_dag, hausdorff_distance,
                        star_census, strong_confluence_statistic)
from .gff import (DEFAULT_GAMMA, GffField, gff_geodesic_bundle, path_length,
                  sample_dgff)
from .paths import GridPath
from .planar_map import (FilledBall, LabeledPlaneTree, Quadrangulation,
                         bfs_metric, boundary_length_process,
                         calibrate_scaling, cvs_construct, filled_ball,
                         sample_labeled_tree)
from .rng import RngStream
from .snake_map import (DiscreteBrownianMap, d_circ, quotient_metric,
                        resample_marked_points)
from .spaces import DenseSpace, GraphSpace, space_from_field, space_from_quad
from .stable import sample_stable_increment
