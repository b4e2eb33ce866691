"""Quasifree states on the CAR algebra and their doubled GNS representation.

A gauge-invariant quasifree state is given by a real symmetric covariance
``R`` with spectrum in the open interval (0, 1).  Expectations of normal
ordered monomials reduce to determinants of ``(f_i, R g_j)`` Gram matrices.

The GNS representation acts on a doubled Fock space ``F(K) (x) F(K)``:

    pi(a(f (+) g)) = a((1-R)^{1/2} f - R^{1/2} g) (x) Gamma
                     + 1 (x) a*(J(R^{1/2} f + (1-R)^{1/2} g))

with ``J`` entrywise conjugation and ``Gamma`` the parity grading.  The
creation operator in the second summand and the sign of the second-component
embedding are fixed so that the vacuum two-point function reproduces the
purification projection ``P = [[R, S], [S, 1-R]]``, ``S = (R(1-R))^{1/2}``.
"""

import numpy as np

from . import fock
from .opalg import adjoint, as_operator, inner, psd_sqrt


def tensor(first, second):
    """Kronecker product with the *first* factor on the low bits.

    With this ordering ``tensor(a_i, I)`` equals the Jordan-Wigner ``a_i`` of
    the combined ``2n``-mode space for ``i < n``: first-factor modes occupy
    indices ``0..n-1`` and second-factor modes ``n..2n-1``.
    """
    return np.kron(np.asarray(second), np.asarray(first))


class CovarianceState:
    """Covariance operator of a gauge-invariant quasifree state.

    ``R`` must be real symmetric with ``0 < spec(R) < 1`` (equivalently
    ``ker R = ker(1-R) = 0``).
    """

    def __init__(self, r):
        r = as_operator(r)
        if np.max(np.abs(r.imag)) > 0:
            raise ValueError("covariance must be real-entried")
        r = r.real
        if np.max(np.abs(r - r.T)) > 1e-12 * max(1.0, np.max(np.abs(r))):
            raise ValueError("covariance must be symmetric")
        w = np.linalg.eigvalsh(r)
        if w.min() <= 0.0 or w.max() >= 1.0:
            raise ValueError(
                "ker R = ker(1-R) = 0 violated: spectrum of R must lie in (0,1), "
                f"got [{w.min():.3e}, {w.max():.3e}]"
            )
        self.r = r
        self.dim = r.shape[0]
        self.eigenvalues = w

    @classmethod
    def isotropic(cls, nu, dim):
        """The nu-state covariance ``R = nu * I``."""
        return cls(float(nu) * np.eye(dim))

    @property
    def sqrt_r(self):
        return psd_sqrt(self.r)

    @property
    def sqrt_one_minus_r(self):
        return psd_sqrt(np.eye(self.dim) - self.r)

    def __repr__(self):
        return f"CovarianceState(dim={self.dim})"


def quasifree_expectation(state, fs, gs):
    """Expectation of ``a*(f_m) ... a*(f_1) a(g_1) ... a(g_n)``.

    Vanishes unless ``m == n``; otherwise equals the determinant of the
    matrix with entries ``(f_i, R g_j)`` (inner product antilinear in the
    first slot).  For complex arguments this formula is tied to real-linear
    data; see the two-point tests, which use real vectors.
    """
    fs = [np.asarray(f, dtype=complex) for f in fs]
    gs = [np.asarray(g, dtype=complex) for g in gs]
    if len(fs) != len(gs):
        return 0.0 + 0.0j
    if not fs:
        return 1.0 + 0.0j
    m = len(fs)
    mat = np.empty((m, m), dtype=complex)
    for i, f in enumerate(fs):
        for j, g in enumerate(gs):
            mat[i, j] = inner(f, state.r @ g)
    return complex(np.linalg.det(mat))


class DoubledRepresentation:
    """GNS representation of the CAR algebra over ``K (+) K`` on ``F(K) (x) F(K)``."""

    def __init__(self, state):
        if state.dim > fock.MAX_MODES // 2:
            raise ValueError(
                f"doubled representation needs 2*{state.dim} <= {fock.MAX_MODES} modes"
            )
        self.state = state
        self.n = state.dim
        self.factor = fock.build_space(self.n)
        self.dim = self.factor.dim ** 2
        self._a = state.sqrt_one_minus_r
        self._b = state.sqrt_r
        self._gamma = fock.parity(self.factor)
        self._eye = np.eye(self.factor.dim, dtype=complex)
        self.vacuum = tensor(fock.vacuum(self.factor), fock.vacuum(self.factor))
        self.gamma_gamma = tensor(self._gamma, self._gamma)

    def field(self, f, g=None):
        """The annihilation image ``pi(a(f (+) g))`` (``g`` defaults to 0)."""
        f = np.zeros(self.n) if f is None else np.asarray(f, dtype=complex)
        g = np.zeros(self.n) if g is None else np.asarray(g, dtype=complex)
        u = self._a @ f - self._b @ g
        w = np.conj(self._b @ f + self._a @ g)
        return tensor(fock.annihilator(self.factor, u), self._gamma) + tensor(
            self._eye, fock.creator(self.factor, w)
        )

    def field_star(self, f, g=None):
        """The creation image ``pi(a*(f (+) g))``."""
        return adjoint(self.field(f, g))

    def vacuum_expectation(self, ops):
        """``<vac, ops[0] ... ops[-1] vac>`` applied right to left."""
        v = self.vacuum
        for op in reversed(list(ops)):
            v = op @ v
        return inner(self.vacuum, v)

    def state_value(self, ops):
        return self.vacuum_expectation(ops)


def gns_representation(state):
    """GNS triple data of the quasifree state (single-argument field form)."""
    return DoubledRepresentation(state)


def doubled_representation(state):
    """The representation of the CAR algebra over the doubled space ``K (+) K``."""
    return DoubledRepresentation(state)


def purification_projection(state):
    """The projection ``P = [[R, S], [S, 1-R]]`` with ``S = (R(1-R))^{1/2}``."""
    r = state.r
    s = psd_sqrt(r @ (np.eye(state.dim) - r))
    top = np.hstack([r, s])
    bot = np.hstack([s, np.eye(state.dim) - r])
    return np.vstack([top, bot]).astype(complex)
