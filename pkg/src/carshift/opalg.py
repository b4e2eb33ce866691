"""Dense complex operator helpers: norms, polar decompositions, antilinear maps.

Inner products are antilinear in the first argument throughout the package
(``inner(u, v) == np.vdot(u, v)``).
"""

import numpy as np

# Default tolerances used across the package.
ALG_TOL = 1e-10    # algebraic identities (products, adjoints, projections)
CAR_TOL = 1e-12    # canonical anticommutation relations
SPEC_TOL = 1e-8    # spectral quantities (eigenvalues, polar factors)


def as_operator(a):
    """Validate and return a square complex matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def inner(u, v):
    """Inner product, antilinear in the first argument."""
    return np.vdot(u, v)


def hs_norm(a):
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(np.asarray(a)))


def operator_norm(a):
    """Operator (spectral) norm, i.e. the largest singular value."""
    return float(np.linalg.norm(np.asarray(a), ord=2))


def adjoint(a):
    return np.conj(np.asarray(a)).T


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def polar_decompose(a):
    """Polar decomposition ``a = u @ p`` with ``u`` unitary, ``p >= 0``.

    Uses the SVD; for singular ``a`` the unitary factor is the canonical one
    obtained from the singular vectors.
    """
    a = as_operator(a)
    w, s, vh = np.linalg.svd(a)
    u = w @ vh
    p = adjoint(vh) @ np.diag(s).astype(complex) @ vh
    return u, p


class AntilinearOperator:
    """Antilinear map ``v -> matrix @ conj(v)`` on a finite-dimensional space."""

    def __init__(self, matrix):
        self.matrix = as_operator(matrix)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def conjugation(cls, dim):
        """Entrywise complex conjugation in the standard basis."""
        return cls(np.eye(dim))

    def __call__(self, v):
        return self.matrix @ np.conj(v)

    def adjoint(self):
        """Antilinear adjoint: ``inner(u, T v) == inner(v, T.adjoint() u)``."""
        return AntilinearOperator(self.matrix.T)

    def compose(self, other):
        """Composition ``self o other``.

        Antilinear after antilinear is linear (returns an ndarray); antilinear
        after linear stays antilinear.
        """
        if isinstance(other, AntilinearOperator):
            return self.matrix @ np.conj(other.matrix)
        return AntilinearOperator(self.matrix @ np.conj(as_operator(other)))

    def precompose_linear(self, lin):
        """Composition ``lin o self`` (linear after antilinear)."""
        return AntilinearOperator(as_operator(lin) @ self.matrix)

    def squared(self):
        """The linear map ``self o self``."""
        return self.compose(self)

    def is_antiunitary(self, tol=ALG_TOL):
        m = self.matrix
        return np.linalg.norm(adjoint(m) @ m - np.eye(self.dim)) <= tol * self.dim


def polar_antilinear(t, rank_tol=1e-10):
    """Polar decomposition ``t = j o delta^{1/2}`` of an antilinear map.

    Returns ``(j, delta)`` where ``j`` is an antiunitary
    :class:`AntilinearOperator` and ``delta`` is positive semidefinite with
    ``t(v) = j(delta^{1/2} @ v)``.  Eigenvalues of ``delta`` below
    ``rank_tol * max(eig)`` are treated as zero (pseudo-inverted away).
    """
    if not isinstance(t, AntilinearOperator):
        raise TypeError("polar_antilinear expects an AntilinearOperator")
    m = t.matrix
    mc = np.conj(m)
    delta = adjoint(mc) @ mc          # = (t* t) as a linear matrix
    delta = 0.5 * (delta + adjoint(delta))
    w, vecs = np.linalg.eigh(delta)
    w = np.clip(w, 0.0, None)
    cutoff = rank_tol * max(w.max(), 1e-300)
    inv_sqrt = np.where(w > cutoff, 1.0 / np.sqrt(np.where(w > cutoff, w, 1.0)), 0.0)
    delta_inv_sqrt = (vecs * inv_sqrt) @ adjoint(vecs)
    # j = t o delta^{-1/2}: matrix is m @ conj(delta^{-1/2}).
    j = AntilinearOperator(m @ np.conj(delta_inv_sqrt))
    return j, delta


def psd_sqrt(a, clip=True):
    """Square root of a Hermitian positive semidefinite matrix via eigh."""
    a = as_operator(a)
    w, vecs = np.linalg.eigh(0.5 * (a + adjoint(a)))
    if clip:
        w = np.clip(w, 0.0, None)
    elif w.min() < 0:
        raise ValueError(f"matrix not positive semidefinite (min eig {w.min():.3e})")
    return (vecs * np.sqrt(w)) @ adjoint(vecs)
