"""Graphon workbench: homomorphism densities of labeled, colored and quantum
graphs, graphon constructors, CR-graphons, forcing checks and W-random graphs."""

from types import ModuleType as _ModuleType

from .graphs import (A1, BLUE, C4, K2, K3, P3, RED, Graph, GraphError, Partition, QuantumGraph,
                     are_isomorphic, canonicalize, complete, complete_bipartite, cycle, path)
from .algebra import (color_expand, contract, power_unlabel, product, razborov, unlabel,
                      unlabel_square_free)
from .graphon import (Graphon, GraphonError, affine, complement, const, discretize, dsum, from_graph,
                      half, levelset, oprod, pprod, step, tensor)
from .density import (DensityEstimate, density, finite_rank_density, moments, t_exact_step, t_mc,
                      tk_eval, tk_is_zero, variational_check)
from .adjoints import OperatorDescriptor, adjoint_map
from .spectral import eigendecompose, spectral_solve
from .cr import (WeightedCRTree, binary_graphon, cf_sequence, degree_from_path, lexpower_graphon,
                 make_binary, make_cf, regular_weights, truncate)
from .forcing import (VerificationReport, adjoint_identity_check, find_2labeled_dependency, stokes_check,
                      verify_family)
from .wrandom import SampledGraph, convergence_experiment, degree_report, sample_graph
from .expr import parse_graphon
from .graphio import load_graphs, parse_graphs

__version__ = "0.1.0"

__all__ = [name for name, obj in list(globals().items())
           if not name.startswith("_") and not isinstance(obj, _ModuleType)]
