"""Damped waves on flat tori with polyhedral damping.

Subpackages and modules:

* ``scene_geometry``   exact scenes: tori, polyhedra, point classification
* ``geodesic_control`` geodesic enumeration and the control-condition checks
* ``lattice_reduction`` orthonormal changes of variables straightening a closed geodesic
* ``infinity_flow``    the flow zeta . d_z on the sphere at infinity
* ``spectral_lab``     pseudospectral wave / Helmholtz experiments and estimate probes
* ``cli``              command-line entry point
"""

__version__ = "0.1.0"
