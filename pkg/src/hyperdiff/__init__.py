"""Diffusion processes on directed hypergraphs with stationary vertices."""
from .core import (CutReport, DirectedHypergraph, Edge, HypergraphError, brute_force_phi_H,
                   expansion, hypergraph_from_dict, inner_product_omega, load_hypergraph,
                   norm_omega)
from .diffusion import IntegratorConfig, TrajectoryRecord, run, step
from .operator import (DerivativeTower, FlowAssignment, derivative_tower, diffusion_operator,
                       first_derivative, flow_assignment, induced_partition)
from .quadratic import (OrderedPartition, discrepancy_ratio, edge_discrepancies, grad_Q_sigma,
                        quadratic_form)
from .spectral import SpectralResult, cheeger_verify, estimate_gamma2, sweep_cut
from .sssl import LabelProblem, SolveReport, verify_gradient_mixture, verify_subgradient

__version__ = "0.1.0"
