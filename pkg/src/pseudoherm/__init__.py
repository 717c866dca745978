"""Krein-kind analysis of pseudo-Hermitian matrices.

Classify eigenvalues of ``H`` with ``G H = H^H G`` by the sign structure of
``G`` on their root subspaces, predict where real spectra can break, and map
stable regions over model parameters.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .intertwiner import (IntertwinerBasis, intertwiner_basis, is_pseudo_hermitian,
                          select_invertible, sylvester_operator, verify_intertwiner)
from .krein import (Cluster, EigenCluster, Kind, SpectralClassification, boundary_probe,
                    chern_zero, classify_kind, classify_spectrum, cluster_eigenvalues,
                    construct_breaking_perturbation, kgl_protected, multiplicities,
                    root_subspace_basis, symmetry_stability_check)
from .dynamics import Trajectory, evolve, propagator, pseudo_unitarity_residual
