"""Spectral theory of the Klein-Gordon operator on a star of half-lines.

The package builds generalized eigenfunctions, the resolvent kernel, the
spectral weights and projections, a Fourier-type transform pair and the
resulting time evolution, together with a finite-difference model used as an
independent oracle.
"""
from .errors import *  # noqa: F401,F403
from .network import (AnalyticFunction, GridFunction, NetworkFunction, NetworkPoint, StarNetwork,
                      TransmissionDefects, apply_A, check_transmission, inner_product_H, norm_H,
                      validate_network)
from .kernel import (EigenfunctionSpec, KernelEnvelope, bound_M, bound_N_gamma, conv_sqrt,
                     decay_rate, eigen_branch, eigenfunction, eval_F, kernel_sign, ode_residual,
                     s_coeff, wronskian_w, xi, xi_all)
from .resolvent import (AbsorptionReport, KernelQuery, apply_resolvent, check_limiting_absorption,
                        kernel_K, kernel_values)
from .measure import (KAPPA, WeightMatrix, WeightSystemReport, case_label, im_kernel_case,
                      im_kernel_direct, projection_E, sampling_matrices, sigma, sigma_all,
                      verify_weight_systems, weights_diagonal, weights_matrix)
from .transform import (SobolevReport, SpectralFunction, SpectralGrid, apply_function_of_A,
                        auto_grid, choose_lambda_max, inner_sigma, norm_sigma, sobolev_membership,
                        spectral_grid, transform_V, transform_Z)
from .evolution import (KleinGordonFlow, TunnelFit, WaveState, energy, evolve,
                        tunnel_decay_profile)
from .fdoracle import (DiscreteStarOperator, assemble, oracle_evolve, oracle_resolvent,
                       oracle_spectral_density)
from .quadrature import QuadResult, QuadratureSpec, integrate
from . import functions

__version__ = "0.1.0"
