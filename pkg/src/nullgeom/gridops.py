"""Finite-difference calculus on the Gauss-Legendre x uniform sphere grid.

The grid excludes both poles (nodes are Gauss-Legendre in cos(theta) and
uniform periodic in phi), so theta-derivatives near the boundary rows use
ghost rows obtained from the smooth extension across the poles: the point
(-theta, phi) is the point (theta, phi + pi).  A scalar field on the sphere
therefore extends evenly, while components carrying an odd number of theta
indices (sigma_{theta phi}, zeta_theta, ...) flip sign; callers state the
parity.  Phi-derivatives are spectral.
"""

import numpy as np
from scipy import sparse

__all__ = ["fornberg_weights", "MeshCalculus", "brioschi_curvature"]


def fornberg_weights(z, xs, m):
    """Weights for the 0..m-th derivatives at z from arbitrary nodes xs.

    Returns an array c of shape (len(xs), m+1): sum_i c[i, k] f(xs[i])
    approximates f^(k)(z).
    """
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = xs[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - z
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 = c2 * c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


class MeshCalculus:
    """Derivative operators bound to one (theta, phi) resolution.

    theta: strictly increasing nodes in (0, pi); phi: uniform on [0, 2 pi).
    n_phi must be even so the antipodal phi shift lands on a grid column.
    """

    def __init__(self, theta, phi, stencil=7):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if stencil % 2 != 1:
            raise ValueError("stencil size must be odd")
        if len(phi) % 2 != 0:
            raise ValueError("n_phi must be even for the pole identification")
        self.theta = theta
        self.phi = phi
        self.n_theta = len(theta)
        self.n_phi = len(phi)
        self.stencil = min(stencil, self.n_theta)  # degenerate tiny grids
        g = self.stencil // 2
        self.ghost = g
        self.shift = self.n_phi // 2
        ext = np.concatenate([-theta[:g][::-1], theta, 2.0 * np.pi - theta[-1:-g - 1:-1]])
        self.theta_ext = ext
        K = self.stencil
        n = self.n_theta
        self.window = np.clip(np.arange(n) + g - K // 2, 0, n + 2 * g - K)
        w1 = np.empty((n, K))
        w2 = np.empty((n, K))
        for i in range(n):
            c = fornberg_weights(theta[i], ext[self.window[i]:self.window[i] + K], 2)
            w1[i] = c[:, 1]
            w2[i] = c[:, 2]
        self.w1 = w1
        self.w2 = w2
        self.gather = self.window[:, None] + np.arange(K)[None, :]
        k = np.fft.rfftfreq(self.n_phi, d=1.0 / self.n_phi)
        self.ik = 1j * k
        if self.n_phi % 2 == 0:
            self.ik = self.ik.copy()
            self.ik[-1] = 0.0            # Nyquist mode has no odd derivative
        self.mk2 = -(k**2)

    # -- theta -------------------------------------------------------------
    def extend(self, f, parity=1):
        """Add ghost rows across both poles; parity = (-1)^(# theta indices)."""
        f = np.asarray(f, dtype=float)
        g = self.ghost
        ext = np.empty((self.n_theta + 2 * g,) + f.shape[1:])
        ext[g:g + self.n_theta] = f
        for k in range(g):
            ext[g - 1 - k] = parity * np.roll(f[k], -self.shift, axis=0)
            ext[g + self.n_theta + k] = parity * np.roll(f[-1 - k], -self.shift, axis=0)
        return ext

    def _theta_apply(self, w, f, parity):
        ext = self.extend(f, parity=parity)
        gathered = ext[self.gather]            # (n_theta, K, n_phi, ...)
        return np.einsum("ik,ik...->i...", w, gathered)

    def dtheta(self, f, parity=1):
        return self._theta_apply(self.w1, f, parity)

    def d2theta(self, f, parity=1):
        return self._theta_apply(self.w2, f, parity)

    # -- phi ---------------------------------------------------------------
    def _phi_mult(self, f, mult):
        f = np.asarray(f, dtype=float)
        F = np.fft.rfft(f, axis=1)
        shape = (1, len(mult)) + (1,) * (f.ndim - 2)
        return np.fft.irfft(F * mult.reshape(shape), n=self.n_phi, axis=1)

    def dphi(self, f):
        return self._phi_mult(f, self.ik)

    def d2phi(self, f):
        return self._phi_mult(f, self.mk2.astype(complex))

    def grad(self, f, parity=1):
        """Coordinate gradient (d_theta f, d_phi f) stacked in a last axis."""
        return np.stack([self.dtheta(f, parity=parity), self.dphi(f)], axis=-1)

    # -- sparse gradient (for least-squares potential fits) ----------------
    def gradient_matrix(self):
        """Sparse (2 N, N) matrix sending node values of an even scalar to
        (d_theta, d_phi) stacked node values; phi block is the spectral
        differentiation matrix."""
        n, m = self.n_theta, self.n_phi
        N = n * m
        g = self.ghost
        K = self.stencil
        # theta block: map extended row indices back to grid rows, with the
        # antipodal phi shift for ghost rows
        e = self.gather                                     # (n, K)
        src = np.where(e < g, g - 1 - e,
                       np.where(e >= n + g, 2 * n - 1 + g - e, e - g))
        shifted = (e < g) | (e >= n + g)
        j = np.arange(m)
        jj = np.where(shifted[:, :, None],
                      (j[None, None, :] + self.shift) % m, j[None, None, :])
        rows_t = np.broadcast_to((np.arange(n) * m)[:, None, None] + j[None, None, :],
                                 (n, K, m)).ravel()
        cols_t = (src[:, :, None] * m + jj).ravel()
        vals_t = np.broadcast_to(self.w1[:, :, None], (n, K, m)).ravel()
        # spectral phi derivative for even m:
        # (D f)_j = sum_{d != 0} -w_d f_{j+d},  w_d = (-1)^d/2 cot(d pi/m)
        d = np.arange(1, m)
        wd = -0.5 * (-1.0) ** d / np.tan(d * np.pi / m)
        rows_p = (N + (np.arange(n) * m)[:, None, None]
                  + j[None, :, None] + 0 * d[None, None, :]).ravel()
        cols_p = ((np.arange(n) * m)[:, None, None]
                  + (j[None, :, None] + d[None, None, :]) % m).ravel()
        vals_p = np.broadcast_to(wd[None, None, :], (n, m, m - 1)).ravel()
        A = sparse.coo_matrix(
            (np.concatenate([vals_t, vals_p]),
             (np.concatenate([rows_t, rows_p]), np.concatenate([cols_t, cols_p]))),
            shape=(2 * N, N))
        return A.tocsr()


def brioschi_curvature(calc, sigma):
    """Gaussian curvature of a metric sigma[..., 2, 2] on the (theta, phi)
    grid via the Brioschi formula; returns per-node K (scalar curvature is
    2 K)."""
    E = sigma[..., 0, 0]
    F = sigma[..., 0, 1]
    G = sigma[..., 1, 1]
    Eu = calc.dtheta(E, parity=1)
    Ev = calc.dphi(E)
    Gu = calc.dtheta(G, parity=1)
    Gv = calc.dphi(G)
    Fu = calc.dtheta(F, parity=-1)
    Fv = calc.dphi(F)
    Evv = calc.d2phi(E)
    Guu = calc.d2theta(G, parity=1)
    Fuv = calc.dphi(calc.dtheta(F, parity=-1))
    det = E * G - F**2

    zeros = np.zeros_like(E)
    M1 = np.stack([
        np.stack([-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev], axis=-1),
        np.stack([Fv - 0.5 * Gu, E, F], axis=-1),
        np.stack([0.5 * Gv, F, G], axis=-1),
    ], axis=-2)
    M2 = np.stack([
        np.stack([zeros, 0.5 * Ev, 0.5 * Gu], axis=-1),
        np.stack([0.5 * Ev, E, F], axis=-1),
        np.stack([0.5 * Gu, F, G], axis=-1),
    ], axis=-2)
    return (np.linalg.det(M1) - np.linalg.det(M2)) / det**2
