"""Bogoliubov liftings and Hilbert-Schmidt convergence criteria.

An isometry ``V`` on the one-particle space commuting with the covariance
lifts to an endomorphism of the CAR algebra; for unitary ``V`` the lifting is
implemented on the doubled Fock space by second quantization of ``V`` on the
first factor and of ``conj(V)`` on the second.

The criteria below all reduce to Hilbert-Schmidt norms of the form
``||R^{1/2}(1-R)^{1/2} X||_2`` evaluated along truncation sizes, with a fixed
verdict policy:

* ``converges`` -- the values stabilize (increments vanish numerically) or the
  log-log fit of the increments has exponent below -0.5;
* ``diverges``  -- otherwise, if the log-log fit of the values has
  nonnegative exponent;
* ``inconclusive`` -- anything else.
"""

from dataclasses import dataclass, field

import numpy as np

from . import fock
from .opalg import adjoint, hs_norm, operator_norm, psd_sqrt
from .quasifree import CovarianceState, tensor

_STAB_TOL = 1e-12


@dataclass
class CriterionReport:
    sizes: list
    values: list
    verdict: str
    increment_exponent: float | None = None
    value_exponent: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "sizes": list(self.sizes),
            "values": [float(v) for v in self.values],
            "verdict": self.verdict,
            "increment_exponent": self.increment_exponent,
            "value_exponent": self.value_exponent,
            **self.extra,
        }


def _loglog_slope(xs, ys):
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    if len(xs) < 2:
        return None
    return float(np.polyfit(xs, ys, 1)[0])


def fit_verdict(sizes, values):
    """Apply the convergence verdict policy to values along truncation sizes."""
    sizes = [float(s) for s in sizes]
    values = [float(v) for v in values]
    if len(sizes) != len(values) or len(sizes) < 2:
        raise ValueError("need at least two truncation sizes")
    scale = max(max(values), 1.0)
    if max(values) <= _STAB_TOL:
        return "converges", None, None
    incs = [abs(values[k + 1] - values[k]) for k in range(len(values) - 1)]
    # rounding noise of repeated dense HS norms sits well above 1e-12
    if max(incs) <= 1e-9 * scale:
        return "converges", None, _loglog_slope(sizes, np.maximum(values, 1e-300))
    pos = [(s, d) for s, d in zip(sizes[1:], incs) if d > _STAB_TOL * scale]
    val_slope = _loglog_slope(sizes, np.maximum(values, 1e-300))
    if len(pos) < 2:
        # increments mostly below the noise floor: the tail has stabilized
        return "converges", None, val_slope
    inc_slope = _loglog_slope([s for s, _ in pos], [d for _, d in pos])
    if inc_slope is not None and inc_slope < -0.5:
        return "converges", inc_slope, val_slope
    if val_slope is not None and val_slope >= -1e-9:
        return "diverges", inc_slope, val_slope
    return "inconclusive", inc_slope, val_slope


def _covariance_matrix(r, size):
    """Accept a float (isotropic nu) or a callable size -> matrix."""
    if callable(r):
        return np.asarray(r(size), dtype=float)
    return float(r) * np.eye(size)


def weighted_hs_norm(r_matrix, x):
    """``||R^{1/2}(1-R)^{1/2} X||_2`` for a covariance matrix and operator X."""
    r_matrix = np.asarray(r_matrix, dtype=float)
    weight = psd_sqrt(r_matrix @ (np.eye(r_matrix.shape[0]) - r_matrix))
    return hs_norm(weight @ np.asarray(x, dtype=complex))


def _check_unitary(v, tol=1e-8, label="V"):
    v = np.asarray(v, dtype=complex)
    if operator_norm(adjoint(v) @ v - np.eye(v.shape[0])) > tol:
        raise ValueError(f"{label} is not an isometry at tolerance {tol:g}")
    return v


def innerness_norm(r, w, sizes):
    """Innerness criterion: ``||R^{1/2}(1-R)^{1/2}(W - 1)||_2`` trend.

    ``r`` and ``w`` are either constants (float nu / fixed matrix rule) or
    callables ``size -> matrix``.  Returns a :class:`CriterionReport` whose
    verdict states whether the lifting is asymptotically inner (converges).
    """
    values = []
    for n in sizes:
        rn = _covariance_matrix(r, n)
        wn = np.asarray(w(n) if callable(w) else w, dtype=complex)
        values.append(weighted_hs_norm(rn, wn - np.eye(n)))
    verdict, inc_e, val_e = fit_verdict(sizes, values)
    return CriterionReport(list(sizes), values, verdict, inc_e, val_e)


def extension_criterion(r_prime, v_prime, w_prime, sizes):
    """Extension criterion on the enlarged space:
    ``||R'^{1/2}(1-R')^{1/2}(V' - W')||_2`` trend over truncations."""
    values = []
    for n in sizes:
        rn = _covariance_matrix(r_prime, n)
        vn = np.asarray(v_prime(n), dtype=complex)
        wn = np.asarray(w_prime(n), dtype=complex)
        values.append(weighted_hs_norm(rn, vn - wn))
    verdict, inc_e, val_e = fit_verdict(sizes, values)
    return CriterionReport(list(sizes), values, verdict, inc_e, val_e)


def araki_commutator(p_matrix, v_prime, w_prime):
    """``||diag(V', W') P' - P' diag(V', W')||_2`` for the purification projection."""
    p = np.asarray(p_matrix, dtype=complex)
    n = p.shape[0] // 2
    d = np.zeros_like(p)
    d[:n, :n] = np.asarray(v_prime, dtype=complex)
    d[n:, n:] = np.asarray(w_prime, dtype=complex)
    return hs_norm(d @ p - p @ d)


def araki_criterion(r_prime, v_prime, w_prime, sizes):
    """Truncation trend of the purification commutator norm (cross-check of
    :func:`extension_criterion`)."""
    from .quasifree import purification_projection

    values = []
    for n in sizes:
        state = CovarianceState(_covariance_matrix(r_prime, n))
        p = purification_projection(state)
        values.append(araki_commutator(p, v_prime(n), w_prime(n)))
    verdict, inc_e, val_e = fit_verdict(sizes, values)
    return CriterionReport(list(sizes), values, verdict, inc_e, val_e)


def conjugacy_criterion(r, u_path, v_path, t_grid, sizes):
    """Conjugacy criterion: for each ``t`` the truncation trend of
    ``||R^{1/2}(1-R)^{1/2}(U_t - V_t)||_2``.

    ``u_path`` and ``v_path`` are callables ``(t, size) -> unitary``.
    Returns an overall verdict (worst case over the grid) plus per-t reports.
    """
    per_t = {}
    order = {"converges": 0, "inconclusive": 1, "diverges": 2}
    worst = "converges"
    for t in t_grid:
        values = []
        for n in sizes:
            rn = _covariance_matrix(r, n)
            ut = _check_unitary(u_path(t, n), label=f"U_{t}")
            vt = _check_unitary(v_path(t, n), label=f"V_{t}")
            values.append(weighted_hs_norm(rn, ut - vt))
        verdict, inc_e, val_e = fit_verdict(sizes, values)
        per_t[float(t)] = CriterionReport(list(sizes), values, verdict, inc_e, val_e)
        if order[verdict] > order[worst]:
            worst = verdict
    return worst, per_t


class Lifting:
    """A Bogoliubov endomorphism of the represented CAR algebra."""

    def __init__(self, rep, v):
        self.rep = rep
        self.v = v
        self.unitary = (
            operator_norm(self.v @ adjoint(self.v) - np.eye(rep.n)) <= 1e-10
        )

    def image_field(self, f, g=None):
        """``alpha(pi(a(f (+) g))) = pi(a(Vf (+) Vg))``."""
        f = None if f is None else self.v @ np.asarray(f, dtype=complex)
        g = None if g is None else self.v @ np.asarray(g, dtype=complex)
        return self.rep.field(f, g)

    def implementer(self):
        """Second-quantized unitary implementing the lifting on the doubled space."""
        if not self.unitary:
            raise ValueError("implementer only available for unitary V")
        first = fock.second_quantized(self.rep.factor, self.v)
        second = fock.second_quantized(self.rep.factor, np.conj(self.v))
        return tensor(first, second)


def lift(rep, v, tol=1e-10):
    """Validate ``V`` (isometry commuting with the covariance) and lift it."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (rep.n, rep.n):
        raise ValueError(f"V must be {rep.n}x{rep.n}")
    _check_unitary(v, tol=tol)
    comm = operator_norm(v @ rep.state.r - rep.state.r @ v)
    if comm > tol:
        raise ValueError(f"[V, R] != 0 at tolerance {tol:g} (norm {comm:.3e})")
    return Lifting(rep, v)


def approximation_check(u_dil, v_dil, k_dim, t_grid, tol=1e-10, hs_bound=None):
    """Check the two approximation conditions for unitary dilations.

    ``u_dil``/``v_dil``: callables ``t -> unitary`` (dense matrices on the
    doubled grid space); ``k_dim``: dimension of the embedded subspace ``K``
    (first block of coordinates).  For each ``t`` reports the Hilbert-Schmidt
    norm of ``U'_t - V'_t`` and the operator-norm deviation of ``U'_t V'_t*``
    from the identity on ``K' (-) K``.  Passes when all deviations are below
    ``tol`` and the HS values stay bounded (below ``hs_bound`` when given).
    """
    rows = []
    ok = True
    for t in t_grid:
        ut = np.asarray(u_dil(t), dtype=complex)
        vt = np.asarray(v_dil(t), dtype=complex)
        hs = hs_norm(ut - vt)
        prod = ut @ adjoint(vt)
        block = prod[k_dim:, k_dim:] - np.eye(prod.shape[0] - k_dim)
        mixed = prod[:k_dim, k_dim:]
        dev = max(operator_norm(block), operator_norm(mixed))
        rows.append({"t": float(t), "hs_norm": hs, "offspace_deviation": dev})
        if dev > tol:
            ok = False
        if hs_bound is not None and hs > hs_bound:
            ok = False
    return {"pass": ok, "rows": rows, "tol": tol}
