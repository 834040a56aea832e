"""Integration of node fields over surface meshes.

The rule is the product of Gauss-Legendre in cos(theta) with the trapezoid
(equal-weight) rule in phi.  Since mesh area elements are computed in the
(theta, phi) parametrization, each node weight carries a 1/sin(theta) factor
so that w * sqrt(det sigma) is the Gauss-Legendre-in-cos(theta) integrand;
the combination sqrt(det sigma)/sin(theta) is smooth across the poles for
any smooth immersed sphere.
"""

import numpy as np

__all__ = ["QuadratureRule", "integrate"]


class QuadratureRule:
    """Node weights for an n_theta x n_phi sphere grid.

    ``theta`` are the Gauss-Legendre nodes mapped by arccos (increasing),
    ``weights`` the per-node quadrature weights including the 1/sin(theta)
    factor and the phi spacing.  Exact for integrands whose
    sqrt(det sigma)-weighted values are polynomials of degree < 2 n_theta in
    cos(theta) times trigonometric polynomials of degree < n_phi in phi.
    """

    def __init__(self, n_theta, n_phi):
        if n_theta < 4 or n_phi < 4:
            raise ValueError("resolution too small")
        if n_phi % 2 != 0:
            raise ValueError("n_phi must be even")
        x, w = np.polynomial.legendre.leggauss(n_theta)
        # increasing theta = decreasing cos(theta)
        self.cos_theta = x[::-1].copy()
        self.gl_weights = w[::-1].copy()
        self.theta = np.arccos(self.cos_theta)
        self.n_theta = n_theta
        self.n_phi = n_phi
        self.phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        dphi = 2.0 * np.pi / n_phi
        self.weights = (self.gl_weights / np.sin(self.theta))[:, None] \
            * (dphi * np.ones(n_phi))[None, :]
        self.estimated_order = 2 * n_theta

    @property
    def resolution(self):
        return (self.n_theta, self.n_phi)


def integrate(mesh, field):
    """Integral of a per-node field against the mesh area measure.

    ``field`` has shape (n_theta, n_phi) or (n_theta, n_phi, k...) for
    component-wise integration.  Summation uses numpy's pairwise reduction,
    which is deterministic for a fixed shape.
    """
    field = np.asarray(field, dtype=float)
    if not np.all(np.isfinite(field)):
        bad = np.argwhere(~np.isfinite(field))[0]
        raise ValueError(f"non-finite field value at node {tuple(bad)}")
    w = mesh.quad_weights * mesh.area_element
    extra = (1,) * (field.ndim - 2)
    return np.sum(w.reshape(w.shape + extra) * field, axis=(0, 1))
