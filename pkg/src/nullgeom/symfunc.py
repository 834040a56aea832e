"""Mixed symmetric-function algebra for pairs of second fundamental forms.

Given a metric ``sigma`` and two symmetric bilinear forms ``chi``, ``chibar``
on a d-dimensional space, the mixed mean curvature of bidegree (r, s) is the
coefficient

    det(sigma + y chi + yb chibar) / det(sigma)
        = sum_{r,s} binom(r+s, r) y^r yb^s P_{r,s}

which interpolates between the elementary symmetric functions of either form
(P_{r,0} and P_{0,s}) and their complete polarization.  This module computes
P_{r,s}, its gradients with respect to chi and chibar, the polarized
elementary symmetric functions of several matrices, and the cone
memberships / inequalities (Newton-MacLaurin, Garding) that control their
signs.

All entry points accept stacked inputs with shape (..., d, d) and broadcast
over the leading axes.  The supported range is 1 <= d <= 6, which covers
ambient dimensions up to 7.
"""

import math
from itertools import combinations

import numpy as np

__all__ = [
    "DMAX",
    "elem_sym",
    "elem_sym_excl",
    "mixed_mean_curvature",
    "mixed_mean_curvature_gradient",
    "MixedCurvatureTable",
    "polarized_elem_sym",
    "in_garding_cone",
    "sample_garding_cone",
    "contraction_identity_check",
    "newton_maclaurin_check",
    "garding_check",
    "ratio_lower_bound_check",
]

DMAX = 6


# ---------------------------------------------------------------------------
# elementary symmetric functions
# ---------------------------------------------------------------------------

def elem_sym(lam, k):
    """k-th elementary symmetric function of the last axis of ``lam``.

    Uses the stable generating-function recursion (coefficients of
    prod_i (1 + t lam_i)); exact for k = 0 and k > d.
    """
    lam = np.asarray(lam, dtype=float)
    d = lam.shape[-1]
    if k < 0 or k > d:
        return np.zeros(lam.shape[:-1]) if lam.ndim > 1 else 0.0
    coef = np.zeros(lam.shape[:-1] + (d + 1,))
    coef[..., 0] = 1.0
    for i in range(d):
        li = lam[..., i:i + 1]
        coef[..., 1:] = coef[..., 1:] + li * coef[..., :-1]
    out = coef[..., k]
    return float(out) if lam.ndim == 1 else out


def elem_sym_excl(lam, k, i):
    """e_k of ``lam`` with the i-th variable removed."""
    lam = np.asarray(lam, dtype=float)
    return elem_sym(np.delete(lam, i, axis=-1), k)


# ---------------------------------------------------------------------------
# bivariate determinant expansion
# ---------------------------------------------------------------------------

def _det_poly(G, A, B):
    """Coefficient array of det(G + y A + yb B) in (y, yb).

    G, A, B: (..., d, d).  Returns (..., d+1, d+1) with entry [r, s] the
    coefficient of y^r yb^s.  Laplace expansion along rows with a subset
    dynamic program over column sets; every minor determinant of the matrix
    of linear polynomials is built exactly once.
    """
    d = G.shape[-1]
    batch = np.broadcast_shapes(G.shape[:-2], A.shape[:-2], B.shape[:-2])
    level = {0: np.ones(batch + (1, 1))}
    for k in range(1, d + 1):
        nxt = {}
        for cols in combinations(range(d), k):
            acc = np.zeros(batch + (k + 1, k + 1))
            for pos, j in enumerate(cols):
                sub = level[_mask(cols) ^ (1 << j)]
                sign = -1.0 if (k - 1 + pos) % 2 else 1.0
                g = sign * G[..., k - 1, j, None, None]
                a = sign * A[..., k - 1, j, None, None]
                b = sign * B[..., k - 1, j, None, None]
                acc[..., :k, :k] += g * sub
                acc[..., 1:, :k] += a * sub
                acc[..., :k, 1:] += b * sub
            nxt[_mask(cols)] = acc
        level = nxt
    return level[(1 << d) - 1]


def _mask(cols):
    m = 0
    for j in cols:
        m |= 1 << j
    return m


def _adj_poly(G, A, B):
    """Coefficient arrays of adj(G + y A + yb B) for symmetric G, A, B.

    Returns (..., d, d, d, d) indexed [a, b, r, s]; the adjugate of a
    symmetric pencil is symmetric in (a, b), so only one triangle is
    computed.
    """
    d = G.shape[-1]
    batch = np.broadcast_shapes(G.shape[:-2], A.shape[:-2], B.shape[:-2])
    out = np.zeros(batch + (d, d, d, d))
    if d == 1:
        out[..., 0, 0, 0, 0] = 1.0
        return out
    rows = np.arange(d)
    for i in range(d):
        for j in range(i, d):
            keep_r = rows != j
            keep_c = rows != i
            minor = _det_poly(G[..., keep_r, :][..., :, keep_c],
                              A[..., keep_r, :][..., :, keep_c],
                              B[..., keep_r, :][..., :, keep_c])
            sign = -1.0 if (i + j) % 2 else 1.0
            out[..., i, j, :, :] = sign * minor
            if i != j:
                out[..., j, i, :, :] = out[..., i, j, :, :]
    return out


def _whiten(sigma, chi, chibar):
    """Map (sigma, chi, chibar) to an orthonormal frame via the symmetric
    inverse square root of sigma; returns (Si, A, B)."""
    w, U = np.linalg.eigh(sigma)
    if np.any(w <= 0):
        raise ValueError("metric must be positive definite")
    Si = (U / np.sqrt(w)[..., None, :]) @ np.swapaxes(U, -1, -2)
    A = Si @ chi @ Si
    B = Si @ chibar @ Si
    # symmetrize away the eigh round-off
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    return Si, A, B


def _check_args(sigma, chi, chibar, r=0, s=0):
    sigma = np.asarray(sigma, dtype=float)
    chi = np.asarray(chi, dtype=float)
    chibar = np.asarray(chibar, dtype=float)
    d = sigma.shape[-1]
    if d < 1 or d > DMAX:
        raise ValueError(f"side dimension {d} outside supported range 1..{DMAX}")
    if r < 0 or s < 0 or r + s > d:
        raise ValueError(f"bidegree ({r}, {s}) invalid for dimension {d}")
    return sigma, chi, chibar, d


def _coef_norm(r, s):
    return math.factorial(r) * math.factorial(s) / math.factorial(r + s)


def mixed_mean_curvature(sigma, chi, chibar, r, s):
    """Mixed mean curvature P_{r,s} of the pair (chi, chibar) w.r.t. sigma.

    Normalized so that P_{0,0} = 1, P_{1,0} = tr_sigma chi and, for two
    second fundamental forms in an orthonormal frame, P_{r,s} equals the
    polarized elementary symmetric function with r copies of chi and s of
    chibar.
    """
    sigma, chi, chibar, d = _check_args(sigma, chi, chibar, r, s)
    _, A, B = _whiten(sigma, chi, chibar)
    coeffs = _det_poly(np.broadcast_to(np.eye(d), A.shape), A, B)
    out = _coef_norm(r, s) * coeffs[..., r, s]
    return float(out) if out.ndim == 0 else out


def mixed_mean_curvature_gradient(sigma, chi, chibar, r, s):
    """Gradients (T, Tbar) of P_{r,s} with respect to chi and chibar.

    The convention is dP = T^{ab} dchi_{ab} summed over all d^2 entries of a
    symmetric perturbation.  T vanishes identically when r = 0 (and Tbar
    when s = 0).
    """
    sigma, chi, chibar, d = _check_args(sigma, chi, chibar, r, s)
    Si, A, B = _whiten(sigma, chi, chibar)
    adj = _adj_poly(np.broadcast_to(np.eye(d), A.shape), A, B)
    c = _coef_norm(r, s)

    def back(coeff_slice):
        return Si @ coeff_slice @ Si

    zero = np.zeros(A.shape)
    T = back(c * adj[..., :, :, r - 1, s]) if r >= 1 else zero
    Tbar = back(c * adj[..., :, :, r, s - 1]) if s >= 1 else zero
    return T, Tbar


class MixedCurvatureTable:
    """All mixed mean curvatures of a batch of (sigma, chi, chibar) triples.

    Shares one determinant expansion (and, lazily, one adjugate expansion)
    across every bidegree, which is the economical layout when many P_{r,s}
    of the same data are needed, e.g. integrand tables over a surface mesh.
    """

    def __init__(self, sigma, chi, chibar):
        sigma, chi, chibar, d = _check_args(sigma, chi, chibar)
        self.dim = d
        self._Si, self._A, self._B = _whiten(sigma, chi, chibar)
        eye = np.broadcast_to(np.eye(d), self._A.shape)
        self._coeffs = _det_poly(eye, self._A, self._B)
        self._adj = None

    def P(self, r, s):
        if r < 0 or s < 0 or r + s > self.dim:
            raise ValueError(f"bidegree ({r}, {s}) invalid for dimension {self.dim}")
        out = _coef_norm(r, s) * self._coeffs[..., r, s]
        return float(out) if out.ndim == 0 else out

    def gradients(self, r, s):
        if r < 0 or s < 0 or r + s > self.dim:
            raise ValueError(f"bidegree ({r}, {s}) invalid for dimension {self.dim}")
        if self._adj is None:
            eye = np.broadcast_to(np.eye(self.dim), self._A.shape)
            self._adj = _adj_poly(eye, self._A, self._B)
        c = _coef_norm(r, s)
        zero = np.zeros(self._A.shape)
        T = self._Si @ (c * self._adj[..., :, :, r - 1, s]) @ self._Si if r >= 1 else zero
        Tbar = self._Si @ (c * self._adj[..., :, :, r, s - 1]) @ self._Si if s >= 1 else zero
        return T, Tbar


# ---------------------------------------------------------------------------
# polarized elementary symmetric functions
# ---------------------------------------------------------------------------

def polarized_elem_sym(Ws):
    """Complete polarization sigma_(k)(W^1, ..., W^k) of e_k.

    Symmetric and multilinear in its k arguments, normalized so that
    sigma_(k)(W, ..., W) = e_k(eigenvalues of W).  Evaluated by polarizing
    e_k over the 2^k subset sums, which keeps everything in terms of plain
    symmetric eigenvalue problems.
    """
    Ws = [np.asarray(W, dtype=float) for W in Ws]
    k = len(Ws)
    d = Ws[0].shape[-1]
    if k < 1 or k > d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    if d > DMAX:
        raise ValueError(f"side dimension {d} outside supported range 1..{DMAX}")
    total = 0.0
    for m in range(1, 1 << k):
        S = sum(Ws[i] for i in range(k) if m >> i & 1)
        sign = -1.0 if (k - bin(m).count("1")) % 2 else 1.0
        total = total + sign * elem_sym(np.linalg.eigvalsh(S), k)
    out = np.asarray(total) / math.factorial(k)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------

def in_garding_cone(W, k, tol=1e-12):
    """Whether the symmetric matrix W lies in the open cone where
    e_1, ..., e_k of its eigenvalues are all positive.

    Positivity is measured relative to powers of the spectral radius, so the
    verdict is scale-invariant; the zero matrix is excluded.
    """
    W = np.asarray(W, dtype=float)
    lam = np.linalg.eigvalsh(W)
    nrm = np.max(np.abs(lam), axis=-1)
    ok = nrm > 0
    for j in range(1, k + 1):
        ok = ok & (elem_sym(lam, j) > tol * nrm**j)
    return bool(ok) if np.ndim(ok) == 0 else ok


def sample_garding_cone(rng, d, k, scale=1.0):
    """Draw a random symmetric d x d matrix from the e_1..e_k > 0 cone.

    A raw Gaussian symmetric matrix is shifted along the identity until it
    just enters the cone, then pushed in by a random extra margin.  For
    k < d this produces genuinely indefinite members, not just positive
    definite ones.
    """
    A = rng.normal(size=(d, d)) * scale
    A = 0.5 * (A + A.T)
    lam = np.linalg.eigvalsh(A)
    lo = -lam.max() - 1.0          # negative definite: outside
    hi = -lam.min() + 1.0          # positive definite: inside
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if in_garding_cone(A + mid * np.eye(d), k):
            hi = mid
        else:
            lo = mid
    margin = rng.uniform(0.05, 1.0) * (0.1 + 0.5 * (lam.max() - lam.min()))
    W = A + (hi + margin) * np.eye(d)
    if not in_garding_cone(W, k):          # pathological draw; push to safety
        W = A + (-lam.min() + margin + 1.0) * np.eye(d)
    return W


# ---------------------------------------------------------------------------
# identities and inequalities
# ---------------------------------------------------------------------------

def contraction_identity_check(sigma, chi, chibar, r, s):
    """Residuals of the three trace identities satisfied by the gradients.

    With n = d + 1:
        sigma_{ab} T^{ab}   = r (n - (r+s)) / (r+s) * P_{r-1,s}
        chi_{ab} T^{ab}     = r P_{r,s}
        chibar_{ab} Tbar^{ab} = s P_{r,s}
    """
    sigma, chi, chibar, d = _check_args(sigma, chi, chibar, r, s)
    n = d + 1
    table = MixedCurvatureTable(sigma, chi, chibar)
    P = table.P(r, s)
    T, Tbar = table.gradients(r, s)
    tr_sigma = np.sum(sigma * T, axis=(-2, -1))
    tr_chi = np.sum(chi * T, axis=(-2, -1))
    tr_chibar = np.sum(chibar * Tbar, axis=(-2, -1))
    if r >= 1:
        trace_target = r * (n - (r + s)) / (r + s) * table.P(r - 1, s)
    else:
        trace_target = np.zeros_like(tr_sigma)
    res = {
        "trace_residual": tr_sigma - trace_target,
        "chi_residual": tr_chi - r * P,
        "chibar_residual": tr_chibar - s * P,
        "scale": (np.abs(tr_sigma) + np.abs(trace_target)
                  + np.abs(tr_chi) + np.abs(tr_chibar) + (r + s) * np.abs(P)),
    }
    if np.ndim(res["scale"]) == 0:
        res = {key: float(val) for key, val in res.items()}
    return res


def newton_maclaurin_check(chi, chibar, r, s):
    """Newton-MacLaurin inequality for the mixed mean curvatures.

    P_{r-1,s}^2 >= c * P_{r,s} P_{r-2,s} with
    c = (r+s)/(r+s-1) * (n-(r+s)+1)/(n-(r+s)), valid when both forms lie in
    the e_1..e_{r+s-1} > 0 cone; equality exactly on multiples of the
    identity.  Works in an orthonormal frame (sigma = identity).
    """
    chi = np.asarray(chi, dtype=float)
    chibar = np.asarray(chibar, dtype=float)
    d = chi.shape[-1]
    if r < 2:
        raise ValueError("need r >= 2 so that all three bidegrees exist")
    _check_args(np.eye(d), chi, chibar, r, s)
    n = d + 1
    k = r + s
    eye = np.eye(d)
    table = MixedCurvatureTable(eye, chi, chibar)
    c = k / (k - 1) * (n - k + 1) / (n - k)
    lhs = np.asarray(table.P(r - 1, s))**2
    rhs = c * np.asarray(table.P(r, s)) * np.asarray(table.P(r - 2, s))
    cone_ok = np.asarray(in_garding_cone(chi, k - 1)) & np.asarray(in_garding_cone(chibar, k - 1))
    out = {
        "lhs": lhs,
        "rhs": rhs,
        "gap": lhs - rhs,
        "constant": c,
        "scale": np.abs(lhs) + np.abs(rhs),
        "cone_ok": cone_ok,
    }
    if lhs.ndim == 0:
        out = {kk: (float(v) if kk not in ("cone_ok",) else bool(v)) for kk, v in out.items()}
    return out


def garding_check(Ws):
    """Garding's inequality for the polarized elementary symmetric function.

    sigma_(k)(W1, W2, R)^2 >= sigma_(k)(W1, W1, R) sigma_(k)(W2, W2, R)
    where R = (W3, ..., Wk); valid when every argument lies in the
    e_1..e_k > 0 cone or its negative, with equality iff W1 and W2 are
    multiples of each other.
    """
    Ws = [np.asarray(W, dtype=float) for W in Ws]
    k = len(Ws)
    if k < 2:
        raise ValueError("need at least two arguments")
    rest = Ws[2:]
    mixed = polarized_elem_sym(Ws)
    s11 = polarized_elem_sym([Ws[0], Ws[0]] + rest)
    s22 = polarized_elem_sym([Ws[1], Ws[1]] + rest)
    lhs = np.asarray(mixed)**2
    rhs = np.asarray(s11) * np.asarray(s22)
    cone_ok = True
    for W in Ws:
        cone_ok = cone_ok & (np.asarray(in_garding_cone(W, k))
                             | np.asarray(in_garding_cone(-W, k)))
    out = {
        "lhs": lhs,
        "rhs": rhs,
        "gap": lhs - rhs,
        "scale": np.abs(lhs) + np.abs(rhs),
        "cone_ok": cone_ok,
    }
    if lhs.ndim == 0:
        out = {kk: (float(v) if kk not in ("cone_ok",) else bool(v)) for kk, v in out.items()}
    return out


def ratio_lower_bound_check(chi, chibar, r, s, cone_variant="both-positive"):
    """Sufficient condition for a lower bound on P_{r-1,s} / P_{r,s}.

    If the angle-type condition

        chibar_{ab} (Tbar_{0,s})^{bc} chi_c^a / (P_{0,s} P_{1,0}) >= s/(n-1)

    holds, then P_{r-1,s}/P_{r,s} >= (r+s)/(n-(r+s)) * (n-1)/tr chi, with
    equality exactly when chi is a multiple of the identity.  Both sides are
    homogeneous of degree zero in chibar, so the admissible cone may be
    taken either as both forms positive (``both-positive``) or as chi
    positive and -chibar positive (``chibar-negative``).
    """
    if cone_variant not in ("both-positive", "chibar-negative"):
        raise ValueError(f"unknown cone_variant {cone_variant!r}")
    chi = np.asarray(chi, dtype=float)
    chibar = np.asarray(chibar, dtype=float)
    d = chi.shape[-1]
    if r < 1 or s < 1:
        raise ValueError("need r >= 1 and s >= 1")
    _check_args(np.eye(d), chi, chibar, r, s)
    n = d + 1
    k = r + s
    eye = np.eye(d)
    table = MixedCurvatureTable(eye, chi, chibar)
    _, Tbar0s = mixed_mean_curvature_gradient(eye, chi, chibar, 0, s)
    P0s = np.asarray(table.P(0, s))
    P10 = np.asarray(table.P(1, 0))
    hyp = np.einsum("...ab,...bc,...ca->...", chibar, Tbar0s, chi) / (P0s * P10)
    Prs = np.asarray(table.P(r, s))
    lhs = np.asarray(table.P(r - 1, s)) / Prs
    rhs = k / (n - k) * (n - 1) / P10
    if cone_variant == "both-positive":
        cone_ok = np.asarray(in_garding_cone(chi, k)) & np.asarray(in_garding_cone(chibar, k))
    else:
        cone_ok = np.asarray(in_garding_cone(chi, k)) & np.asarray(in_garding_cone(-chibar, k))
    out = {
        "hypothesis_value": hyp,
        "hypothesis_margin": hyp - s / (n - 1),
        "conclusion_lhs": lhs,
        "conclusion_rhs": rhs,
        "conclusion_gap": lhs - rhs,
        "cone_ok": cone_ok,
    }
    if np.ndim(hyp) == 0:
        out = {kk: (float(v) if kk not in ("cone_ok",) else bool(v)) for kk, v in out.items()}
    return out
