"""Jordan-Wigner realization of the CAR algebra on a finite fermionic Fock space.

Basis states of ``FockSpace(n)`` are indexed by bitmasks ``0 .. 2^n - 1``;
mode ``i`` is occupied in basis state ``b`` iff bit ``i`` of ``b`` is set.
The sign string of mode ``i`` counts occupied modes with index below ``i``,
so ``a_i |b> = (-1)^{popcount(b & (2^i - 1))} |b ^ (1 << i)>`` when occupied.

Annihilators are antilinear in their vector argument:
``annihilator(space, f) = sum_i conj(f_i) a_i``.
"""

import math

import numpy as np

MAX_MODES = 12


class FockSpace:
    """Fermionic Fock space over C^modes, dimension ``2**modes``."""

    def __init__(self, modes):
        if not 0 <= modes <= MAX_MODES:
            raise ValueError(f"modes must be in [0, {MAX_MODES}], got {modes}")
        self.modes = modes
        self.dim = 1 << modes
        self._mode_ops = {}

    def occupation(self, index):
        """Tuple of occupied mode indices of a basis state."""
        return tuple(i for i in range(self.modes) if index >> i & 1)

    def __repr__(self):
        return f"FockSpace(modes={self.modes})"


def build_space(modes):
    return FockSpace(modes)


def vacuum(space):
    v = np.zeros(space.dim, dtype=complex)
    v[0] = 1.0
    return v


def mode_annihilator(space, i):
    """The matrix of ``a_i = a(e_i)`` (cached per space)."""
    if not 0 <= i < space.modes:
        raise ValueError(f"mode index {i} out of range for {space!r}")
    op = space._mode_ops.get(i)
    if op is None:
        op = np.zeros((space.dim, space.dim), dtype=complex)
        lower = (1 << i) - 1
        for b in range(space.dim):
            if b >> i & 1:
                sign = -1.0 if (b & lower).bit_count() & 1 else 1.0
                op[b ^ (1 << i), b] = sign
        space._mode_ops[i] = op
    return op


def annihilator(space, f):
    """``a(f) = sum_i conj(f_i) a_i``, antilinear in ``f``."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.modes,):
        raise ValueError(f"expected vector of length {space.modes}, got {f.shape}")
    op = np.zeros((space.dim, space.dim), dtype=complex)
    for i in range(space.modes):
        if f[i] != 0:
            op += np.conj(f[i]) * mode_annihilator(space, i)
    return op


def creator(space, f):
    """``a*(f) = a(f)^dagger``, linear in ``f``."""
    return np.conj(annihilator(space, f)).T


def parity(space):
    """The grading unitary: ``(-1)^N`` on the number basis."""
    signs = np.array([-1.0 if b.bit_count() & 1 else 1.0 for b in range(space.dim)])
    return np.diag(signs).astype(complex)


def wedge_vector(space, vectors):
    """``f_1 ^ ... ^ f_k`` realized as ``a*(f_1) ... a*(f_k) vacuum``."""
    v = vacuum(space)
    for f in reversed(list(vectors)):
        v = creator(space, f) @ v
    return v


def second_quantized(space, v):
    """Multiplicative second quantization of a one-particle matrix.

    For unitary ``v`` this is the unitary sending
    ``f_1 ^ ... ^ f_k -> (v f_1) ^ ... ^ (v f_k)``.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (space.modes, space.modes):
        raise ValueError(f"expected {space.modes}x{space.modes} matrix, got {v.shape}")
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for b in range(space.dim):
        out[:, b] = wedge_vector(space, [v[:, i] for i in space.occupation(b)])
    return out


def number_operator(space):
    return np.diag([float(b.bit_count()) for b in range(space.dim)]).astype(complex)


def norm_identity_residual(space, f):
    """``| ||a(f)|| - ||f|| |`` -- the C*-norm identity for the CAR algebra."""
    from .opalg import operator_norm

    val = operator_norm(annihilator(space, f))
    return abs(val - float(np.linalg.norm(f)))
