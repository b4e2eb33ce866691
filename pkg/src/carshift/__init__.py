"""Numerical workbench for quasifree CAR dynamics.

Subpackages cover dense operator helpers (opalg), a Jordan-Wigner Fock
simulator (fock), quasifree states and their doubled GNS representation
(quasifree), finite-dimensional Tomita-Takesaki data (modular),
Hilbert-Schmidt criteria for Bogoliubov endomorphisms (bogoliubov), and the
Hardy-space / shift-semigroup machinery with unitary dilations (hardyshift).
"""

from . import opalg, fock, quasifree, modular, bogoliubov, hardyshift

__all__ = ["opalg", "fock", "quasifree", "modular", "bogoliubov", "hardyshift"]
__version__ = "0.1.0"
