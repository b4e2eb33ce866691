"""Shift semigroup on the half-line, Blaschke products, and unitary dilations.

The one-parameter shift ``(S_t f)(x) = f(x - t)`` acts on L2(0, inf).  For a
family of exponents ``l_k`` with ``Re l_k < 0``, bounded imaginary parts and
summable real parts, the normalized exponentials ``f_k`` span a subspace K1 on
which the adjoint shift acts diagonally; successive orthogonalization of the
``f_k`` produces an orthonormal family ``g_k`` and an isometry ``V_t`` that is
diagonal (pure phases) on K1 and agrees with ``S_t`` on the complement K0.

All defect norms are evaluated in closed form through :mod:`carshift.expcalc`.
Grid discretizations identify the doubled space K (+) K with cell functions on
a circle of circumference ``2 * horizon``; the shift dilation is then an exact
permutation and the flow dilation an exact unitary built from a rotation on a
small subspace, so unitarity holds to rounding error at any resolution.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import expcalc
from .expcalc import ExpCombo, theta_apply as _theta_terms
from .opalg import hs_norm, operator_norm


# ---------------------------------------------------------------------------
# exponent families and condition (1)


@dataclass
class ExponentialFamily:
    """Exponents ``l_k`` subject to: ``Re l_k < 0``, ``|Im l_k| < radius``,
    ``sum |Re l_k| < inf`` (finite family), pairwise distinct."""

    lambdas: list
    radius: float = 0.0

    def __post_init__(self):
        self.lambdas = [complex(l) for l in self.lambdas]
        if self.radius <= 0.0:
            self.radius = 2.0 * max((abs(l.imag) for l in self.lambdas), default=0.0) + 1.0
        report = validate_condition1(self.lambdas, self.radius)
        if not report["ok"]:
            raise ValueError(f"condition (1) violated: {report['failures']}")

    @property
    def size(self):
        return len(self.lambdas)

    @property
    def s_value(self):
        """``s = sum |Re l_k|`` -- the total decay rate."""
        return float(-sum(l.real for l in self.lambdas))


def validate_condition1(lambdas, radius):
    """Checks of the admissibility condition for an exponent family."""
    lambdas = [complex(l) for l in lambdas]
    failures = []
    for k, l in enumerate(lambdas):
        if l.real >= 0:
            failures.append(f"Re lambda_{k} >= 0")
        if abs(l.imag) >= radius:
            failures.append(f"|Im lambda_{k}| >= radius")
    for i in range(len(lambdas)):
        for j in range(i + 1, len(lambdas)):
            if abs(lambdas[i] - lambdas[j]) < 1e-12:
                failures.append(f"lambda_{i} == lambda_{j}")
    return {
        "ok": not failures,
        "failures": failures,
        "abs_re_sum": float(-sum(l.real for l in lambdas)),
    }


# ---------------------------------------------------------------------------
# Blaschke product


def blaschke_eval(family, z):
    """``B(z) = prod_k (z + conj(l_k)) / (z - l_k)``; inner for the right half-plane."""
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for l in family.lambdas:
        denom = z - l
        if np.any(np.abs(denom) < 1e-12):
            raise ValueError("evaluation point collides with a Blaschke pole")
        out = out * (z + np.conj(l)) / denom
    return out if out.shape else complex(out)


def blaschke_asymptotics(family, radii=None, samples=360):
    """Bound constants and the ``1/z`` coefficient of ``B``.

    Returns ``c1`` (bound for ``|B|`` outside radius ``c2``) and ``c3`` with
    ``B(z) = 1 - c3/z + o(1/z)``; ``c3`` is fit from samples on the real axis
    and should equal ``2 * s_value``.
    """
    max_abs = max((abs(l) for l in family.lambdas), default=0.0)
    c2 = 2.0 * max_abs + 1.0
    angles = np.exp(2j * np.pi * np.arange(samples) / samples)
    c1 = float(np.max(np.abs(blaschke_eval(family, c2 * angles)))) if family.size else 1.0
    if radii is None:
        radii = [c2 * (2.0 ** j) for j in range(4, 10)]
    radii = np.asarray(sorted(radii), dtype=float)
    vals = radii * (1.0 - blaschke_eval(family, radii.astype(complex)))
    # c3 + a/r fit: intercept at 1/r -> 0
    coeffs = np.polyfit(1.0 / radii, np.asarray(vals).real, 1)
    c3 = float(coeffs[1])
    return {"c1": c1, "c2": c2, "c3": c3, "two_s": 2.0 * family.s_value}


def theta_apply(family, combo):
    """Apply ``Theta = F^{-1} B F`` to an exponential combination (exact)."""
    return _theta_terms(family.lambdas, combo)


# ---------------------------------------------------------------------------
# orthogonalized exponential basis and the isometry V_t


def normalized_exponential(lam):
    lam = complex(lam)
    return ExpCombo.exponential(lam, coeff=np.sqrt(-2.0 * lam.real))


def gram_exponentials(family):
    """Gram matrix ``(f_m, f_n) = -c_m c_n / (conj(l_m) + l_n)`` (unit diagonal)."""
    lam = np.asarray(family.lambdas, dtype=complex)
    c = np.sqrt(-2.0 * lam.real)
    denom = lam.conjugate()[:, None] + lam[None, :]
    return -np.outer(c, c) / denom


@dataclass
class ExponentialBasis:
    family: ExponentialFamily
    gram: np.ndarray
    coeff: np.ndarray            # upper triangular: g_n = sum_m coeff[m, n] f_m
    g_combos: list = field(default_factory=list)

    @property
    def size(self):
        return self.family.size


def orthogonalize(family, cond_limit=1e12):
    """Successive orthogonalization of the normalized exponentials.

    The coefficient matrix is upper triangular with positive diagonal
    (Cholesky of the Gram matrix); degenerate families are rejected.
    """
    g = gram_exponentials(family)
    if family.size and np.linalg.cond(g) > cond_limit:
        raise ValueError("exponential family too ill-conditioned to orthogonalize")
    low = np.linalg.cholesky(g)
    coeff = solve_triangular(low, np.eye(family.size), lower=True).conj().T
    fs = [normalized_exponential(l) for l in family.lambdas]
    combos = []
    for n in range(family.size):
        combo = ExpCombo()
        for m in range(n + 1):
            combo = combo + fs[m].scaled(coeff[m, n])
        combos.append(combo)
    return ExponentialBasis(family, g, coeff, combos)


def backward_shift_matrix(basis, t):
    """Matrix of ``S_t*`` on span{g_n}: upper triangular, diagonal ``exp(l_n t)``."""
    d = np.diag(np.exp(np.asarray(basis.family.lambdas) * t))
    return solve_triangular(basis.coeff, d @ basis.coeff, lower=False)


@dataclass
class FlowData:
    """The isometry ``V_t``: phases on span{g_n}, equal to ``S_t`` elsewhere."""

    basis: ExponentialBasis
    t: float
    phases: np.ndarray

    def apply_combo(self, u):
        """Apply ``V_t`` to an exponential combination (exact)."""
        shifted = u
        out = ExpCombo()
        for phase, g in zip(self.phases, self.basis.g_combos):
            c = g.inner(u)
            shifted = shifted - g.scaled(c)
            out = out + g.scaled(phase * c)
        return out + shifted.shift(self.t)


def build_vt(basis, t):
    lam = np.asarray(basis.family.lambdas)
    return FlowData(basis, float(t), np.exp(1j * lam.imag * t))


def defect_hs_norm(basis, t):
    """``||V_t - S_t||_2`` in closed form.

    The defect vanishes on K0 and on each ``g_n`` contributes
    ``2 - 2 Re[exp(-i Im(l_n) t) exp(conj(l_n) t)]``.
    """
    lam = np.asarray(basis.family.lambdas)
    terms = 2.0 - 2.0 * np.exp(lam.real * t) * np.cos(2.0 * lam.imag * t)
    return float(np.sqrt(max(np.sum(terms), 0.0)))


def defect_increment_hs(basis, t, delta):
    """``||(V_{t+d} - S_{t+d}) - (V_t - S_t)||_2`` in closed form."""
    total = 0.0
    for lam in basis.family.lambdas:
        p = np.exp(1j * lam.imag * (t + delta)) - np.exp(1j * lam.imag * t)
        b = 2.0 - 2.0 * (np.exp(lam * delta)).real
        cross = np.conj(p) * (np.exp(np.conj(lam) * (t + delta)) - np.exp(np.conj(lam) * t))
        total += abs(p) ** 2 + b - 2.0 * cross.real
    return float(np.sqrt(max(total, 0.0)))


def estimate_inequalities(basis, t):
    """Exact left sides of the two defect estimates at time ``t``.

    Per basis vector: ``||(P_{[t,inf)} V_t S_t* - P_{[t,inf)}) S_t g_n||^2``
    and ``||P_{[0,t]} V_t S_t* S_t g_n||^2 = ||P_{[0,t]} g_n||^2``.  Their sum
    over ``n`` is O(t).
    """
    vt = build_vt(basis, t)
    lhs_far, lhs_near = [], []
    for phase, g in zip(vt.phases, basis.g_combos):
        moved = g.scaled(phase).window(t) - g.shift(t)
        lhs_far.append(moved.norm_sq())
        lhs_near.append(g.window(0.0, t).norm_sq())
    return {
        "per_mode_far": lhs_far,
        "per_mode_near": lhs_near,
        "sum": float(np.sum(lhs_far) + np.sum(lhs_near)),
    }


def fit_power(xs, ys):
    """Least-squares exponent of ``y ~ C x^p`` on a log-log scale."""
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# window defects of the Blaschke multiplier


def window_exponent(k, delta):
    """``mu_{k,delta} = -1/(2|k|) + 2 pi i k / delta`` (``mu_0 = -1/2``)."""
    if k == 0:
        return complex(-0.5)
    return complex(-0.5 / abs(k), 2.0 * np.pi * k / delta)


def prop2_defect(family, t, delta, k_max):
    """Hilbert-Schmidt estimate for the window defect of ``Theta``.

    Bounds ``P_w Theta P_w - P_w`` on ``w = [t, t+delta]`` by
    ``(Theta - 1)P_w``, evaluated on the normalized window exponentials
    ``f_{k,delta}``, ``|k| <= k_max`` (the projected defect is dominated by
    this and decays at least as fast).  Returns the partial sum, a ``1/k^2``
    tail estimate and the per-``k`` contributions.
    """
    contributions = {}
    total = 0.0
    for k in range(-k_max, k_max + 1):
        mu = window_exponent(k, delta)
        f = ExpCombo.normalized_exponential(mu, start=t, end=t + delta)
        defect = theta_apply(family, f) - f
        val = defect.norm_sq()
        contributions[k] = val
        total += val
    ks = np.array([k for k in contributions if abs(k) >= max(2, k_max // 2)])
    if len(ks):
        amp = np.median([contributions[k] * k * k for k in ks])
        tail = 2.0 * amp / max(k_max, 1)
    else:
        tail = 0.0
    return {
        "value": float(np.sqrt(total)),
        "sum_sq": float(total),
        "tail_estimate_sq": float(tail),
        "per_k": contributions,
    }


def laplace_pairing(family, mu, start=0.0, end=np.inf):
    """``(f, Theta f)`` for the normalized exponential of rate ``mu``.

    The exact value is ``B(-conj(mu)) * ||f||^2``: the Blaschke factor is
    evaluated at the right-half-plane reflection of the exponent (where
    ``|B| <= 1``, consistent with ``Theta`` being a contraction pairing).
    """
    f = ExpCombo.normalized_exponential(mu, start=start, end=end)
    pairing = f.inner(theta_apply(family, f))
    reference = blaschke_eval(family, -np.conj(mu))
    return complex(pairing), complex(reference)


# ---------------------------------------------------------------------------
# Wold decomposition and norm continuity


def wold_decompose(v, tol=1e-10, max_iter=None):
    """Iterated-range Wold decomposition of a (partial) isometry.

    Returns the projection onto the unitary part ``K0 = cap_n V^n K``, the
    completely non-unitary complement and the deficiency ``dim ker V*``.
    Accepts partial isometries (``V* V`` a projection), e.g. truncated shifts.
    """
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    vv = v.conj().T @ v
    if operator_norm(vv @ vv - vv) > tol * n:
        raise ValueError("input is not a partial isometry at the given tolerance")
    basis = np.eye(n, dtype=complex)
    max_iter = max_iter or 4 * n + 8
    prev_proj = basis @ basis.conj().T
    for _ in range(max_iter):
        a = v @ basis
        if a.size == 0:
            prev_proj = np.zeros((n, n), dtype=complex)
            break
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        keep = s > tol * max(s[0], 1.0) if len(s) else []
        basis = u[:, keep]
        proj = basis @ basis.conj().T
        if operator_norm(proj - prev_proj) <= tol:
            prev_proj = proj
            break
        prev_proj = proj
    p_unitary = prev_proj
    sing = np.linalg.svd(v, compute_uv=False)
    deficiency = int(np.sum(sing < 0.5))
    restricted = p_unitary @ v @ p_unitary
    unit_resid = operator_norm(
        restricted.conj().T @ restricted - p_unitary
    )
    return {
        "p_unitary": p_unitary,
        "p_cnu": np.eye(n) - p_unitary,
        "deficiency": deficiency,
        "unitary_residual": float(unit_resid),
    }


def condition_n_check(u_path, t_grid, atol=1e-10):
    """Operator-norm continuity of a unitary path on a grid.

    Compares the modulus of continuity at the grid spacing with the modulus
    at doubled spacing; a genuinely norm-continuous path contracts by about
    one half, while a discontinuous (unbounded-generator) path saturates.
    """
    t_grid = list(t_grid)
    mats = [np.asarray(u_path(t), dtype=complex) for t in t_grid]
    fine = [operator_norm(mats[i + 1] - mats[i]) for i in range(len(mats) - 1)]
    coarse = [operator_norm(mats[i + 2] - mats[i]) for i in range(len(mats) - 2)]
    max_fine = max(fine) if fine else 0.0
    max_coarse = max(coarse) if coarse else 0.0
    steps = [t_grid[i + 1] - t_grid[i] for i in range(len(t_grid) - 1)]
    lipschitz = max(
        (d / s for d, s in zip(fine, steps) if s > 0), default=0.0
    )
    ok = max_fine <= atol or (coarse and max_fine <= 0.75 * max_coarse + atol)
    return {
        "pass": bool(ok),
        "moduli": fine,
        "moduli_coarse": coarse,
        "lipschitz_estimate": float(lipschitz),
    }


# ---------------------------------------------------------------------------
# circle-grid discretization and unitary dilations


class DilationOperator:
    """Unitary on the doubled grid space: permutation times ``I + X Y*``.

    The permutation realizes the translation ``S'_t`` on the circle
    ``[-T, T)``; the low-rank rotation carries the flow correction.  Stored in
    factored form so norms are exact and cheap at any resolution.
    """

    def __init__(self, perm, x, y, k_dim):
        self.perm = np.asarray(perm)
        self.dim = len(self.perm)
        self.x = np.asarray(x, dtype=complex).reshape(self.dim, -1)
        self.y = np.asarray(y, dtype=complex).reshape(self.dim, -1)
        self.k_dim = k_dim

    def matvec(self, v):
        w = v + self.x @ (self.y.conj().T @ v)
        out = np.empty_like(w)
        out[self.perm] = w
        return out

    def to_dense(self, max_dim=6000):
        if self.dim > max_dim:
            raise ValueError(f"dense form refused above dimension {max_dim}")
        m = np.eye(self.dim, dtype=complex) + self.x @ self.y.conj().T
        return self._permute_vec_block(m)

    def unitarity_residual(self):
        """Operator norm of ``U*U - 1`` (exact, via the low-rank factors)."""
        if self.x.shape[1] == 0:
            return 0.0
        gram = self.x.conj().T @ self.x
        a = np.hstack([self.y, self.x, self.y @ gram])
        b = np.hstack([self.x, self.y, self.y])
        _, ra = np.linalg.qr(a)
        _, rb = np.linalg.qr(b)
        return float(operator_norm(ra @ rb.conj().T))

    def hs_distance_from_permutation(self):
        """``||U - S'||_2`` -- Hilbert-Schmidt norm of the low-rank part."""
        if self.x.shape[1] == 0:
            return 0.0
        g1 = self.x.conj().T @ self.x
        g2 = self.y.conj().T @ self.y
        return float(np.sqrt(max(np.trace(g1 @ g2).real, 0.0)))

    def offspace_deviation(self):
        """Operator norm of ``(S' U* - 1)`` restricted to the second summand."""
        if self.x.shape[1] == 0:
            return 0.0
        f1 = self._permute_vec_block(self.y)
        f2 = self._permute_vec_block(self.x)
        _, r1 = np.linalg.qr(f1)
        small = r1 @ f2[self.k_dim:, :].conj().T
        return float(operator_norm(small))

    def _permute_vec_block(self, block):
        out = np.empty_like(block)
        out[self.perm, :] = block
        return out

    def compression(self):
        """Dense compression to the first summand (cells of ``[0, T)``)."""
        k = self.k_dim
        dense = self.to_dense()
        return dense[:k, :k]


class GridModel:
    """Cell discretization of ``L2(0, T)`` and its doubled circle space."""

    def __init__(self, basis, horizon, step):
        self.basis = basis
        self.horizon = float(horizon)
        self.step = float(step)
        self.n = round(self.horizon / self.step)
        if abs(self.n * self.step - self.horizon) > 1e-9:
            raise ValueError("horizon must be an integer number of cells")
        cols = [self.cell_coefficients(g) for g in basis.g_combos]
        if cols:
            mat = np.stack(cols, axis=1)
            q, r = np.linalg.qr(mat)
            signs = np.sign(np.diag(r).real)
            signs[signs == 0] = 1.0
            self.ghat = q * signs
        else:
            self.ghat = np.zeros((self.n, 0), dtype=complex)

    def steps_of(self, t):
        m = round(t / self.step)
        if abs(m * self.step - t) > 1e-9:
            raise ValueError("t must be a multiple of the grid step")
        return m

    def cell_coefficients(self, combo):
        """Exact L2 cell averages of an exponential combination (times 1/sqrt(h))."""
        h = self.step
        vec = np.zeros(self.n, dtype=complex)
        for c, mu, s, e in combo.terms:
            lo_cell = max(int(np.floor(max(s, 0.0) / h)), 0)
            hi_cell = min(int(np.ceil(min(e, self.horizon) / h)), self.n)
            for j in range(lo_cell, hi_cell):
                lo = max(j * h, s)
                hi = min((j + 1) * h, e)
                if hi <= lo:
                    continue
                if abs(mu) < 1e-14:
                    vec[j] += c * (hi - lo)
                else:
                    vec[j] += c * (np.exp(mu * (hi - s)) - np.exp(mu * (lo - s))) / mu
        return vec / np.sqrt(h)

    # -- operators on the single grid space K ------------------------------

    def shift_matrix(self, t):
        m = self.steps_of(t)
        out = np.zeros((self.n, self.n), dtype=complex)
        for j in range(self.n - m):
            out[j + m, j] = 1.0
        return out

    def flow_lowrank(self, t):
        """Factors of the direct grid ``V_t = S_t + X Y*`` on K."""
        m = self.steps_of(t)
        lam = np.asarray(self.basis.family.lambdas)
        phases = np.exp(1j * lam.imag * t)
        shifted = np.zeros_like(self.ghat)
        if m < self.n:
            shifted[m:, :] = self.ghat[: self.n - m, :]
        x = self.ghat * phases[None, :] - shifted
        return x, self.ghat.copy()

    def flow_matrix(self, t):
        x, y = self.flow_lowrank(t)
        return self.shift_matrix(t) + x @ y.conj().T

    # -- circle dilations ---------------------------------------------------

    def _circle_perm(self, m):
        n = self.n
        raw = np.arange(2 * n)
        phys = np.where(raw < n, raw + n, raw - n)
        phys2 = (phys + m) % (2 * n)
        return np.where(phys2 >= n, phys2 - n, phys2 + n)

    def shift_dilation(self, t):
        """The exact unitary dilation of ``S_t``: translation on the circle."""
        m = self.steps_of(t)
        empty = np.zeros((2 * self.n, 0), dtype=complex)
        return DilationOperator(self._circle_perm(m), empty, empty, self.n)

    def flow_dilation(self, t, rank_tol=1e-10):
        """An exact unitary dilation of the grid ``V_t``.

        ``V' = S' R`` where ``R`` rotates each ``ghat_n`` onto
        ``phase_n * S'* ghat_n`` and acts as the minimal unitary completion on
        the remaining directions of their joint span.  The compression of
        ``V'`` to the first summand is exactly the grid ``V_t``.
        """
        m = self.steps_of(t)
        perm = self._circle_perm(m)
        inv = np.argsort(perm)
        n2 = 2 * self.n
        nlam = self.ghat.shape[1]
        b = np.zeros((n2, nlam), dtype=complex)
        b[: self.n, :] = self.ghat
        lam = np.asarray(self.basis.family.lambdas)
        phases = np.exp(1j * lam.imag * t)
        c = b[perm, :] * phases[None, :]        # S'^* then phase
        if nlam == 0:
            return self.shift_dilation(t)
        joint = np.hstack([b, c])
        uq, sq, _ = np.linalg.svd(joint, full_matrices=False)
        q = uq[:, sq > rank_tol * sq[0]]
        d1 = _complement_basis(q, b, rank_tol)
        d2 = _complement_basis(q, c, rank_tol)
        r = min(d1.shape[1], d2.shape[1])
        d1, d2 = d1[:, :r], d2[:, :r]
        if r:
            uw, _, vwh = np.linalg.svd(d2.conj().T @ d1)
            w = uw @ vwh
            x = np.hstack([c, d2 @ w, -q])
            y = np.hstack([b, d1, q])
        else:
            x = np.hstack([c, -q])
            y = np.hstack([b, q])
        return DilationOperator(perm, x, y, self.n)

    def compression_residual(self, t):
        """Frobenius distance between the dilation compression and the grid V_t."""
        dil = self.flow_dilation(t)
        sx = dil._permute_vec_block(dil.x)[: self.n, :]
        yk = dil.y[: self.n, :]
        xd, yd = self.flow_lowrank(t)
        u = np.hstack([sx, -xd])
        v = np.hstack([yk, yd])
        g1 = u.conj().T @ u
        g2 = v.conj().T @ v
        return float(np.sqrt(max(np.trace(g1 @ g2).real, 0.0)))


def _complement_basis(q, cols, rank_tol):
    """Orthonormal basis of ``span(q) (-) span(cols)``."""
    z = q - cols @ (cols.conj().T @ q)
    uz, sz, _ = np.linalg.svd(z, full_matrices=False)
    if len(sz) == 0 or sz[0] == 0:
        return uz[:, :0]
    return uz[:, sz > max(rank_tol * sz[0], 1e-13)]


def unitary_dilation(model, which, t):
    """Unitary dilation on the doubled grid space (``which in {shift, flow}``)."""
    if which == "shift":
        return model.shift_dilation(t)
    if which == "flow":
        return model.flow_dilation(t)
    raise ValueError(f"unknown dilation kind {which!r}")
