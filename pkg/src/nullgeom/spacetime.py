"""Static spherically symmetric spacetimes and their conformal Killing-Yano forms.

Charts
------
The workhorse chart uses Cartesian spatial coordinates (t, x^1, ..., x^n) on the
(n+1)-dimensional ambient manifold, with

    g_tt = -f^2(r),   g_ij = delta_ij + (1/f^2 - 1) xhat_i xhat_j,   r = |x|.

Every component is smooth wherever r > 0, so ambient tensors can be sampled at
arbitrary angles without pole trouble; conversions to the polar labels
(t, r, theta, phi) are provided for reporting.  An ingoing null chart
(v, r, theta, phi) and a warped-product chart are included for the
conformal Killing-Yano existence checks.

Index conventions
-----------------
Riemann components are stored as

    R[mu, nu, sig, rho] = < R(e_mu, e_nu) e_rho , e_sig >,
    R(X, Y) = D_X D_Y - D_Y D_X - D_[X,Y],

so R(X, Y, X, Y) is the unnormalized sectional curvature of span(X, Y) and a
constant-curvature space reads R = c (g_{mu sig} g_{nu rho} - g_{mu rho}
g_{nu sig}).  Ricci is Ric_{nu rho} = g^{mu sig} R_{mu nu sig rho} (positive
for round spheres).  Two-form derivatives are stored as dQ[mu, a, b] =
partial_mu Q_ab, and covariant ones as (DQ)[mu, a, b] = (D_mu Q)_{ab}.
"""

import math
from itertools import permutations

import numpy as np

__all__ = [
    "StaticSpacetime",
    "EddingtonFinkelsteinChart",
    "AffineWarpedChart",
    "cky_residual",
    "twistor_residual",
    "form_covariant_deriv",
    "form_divergence",
    "hodge_dual_two_form",
    "fd_form_deriv",
    "killing_residual",
    "spherical_from_cartesian",
    "cartesian_from_spherical",
]

_FD_COEFF = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_FD_OFFSET = np.array([-2.0, -1.0, 1.0, 2.0])


def _eps4():
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        sign = 1.0
        p = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


_EPS4 = _eps4()


class _ChartBase:
    """Shared machinery for any chart exposing metric / metric_deriv."""

    dim = None

    # -- to be supplied by subclasses -------------------------------------
    def metric(self, x):
        raise NotImplementedError

    def metric_deriv(self, x):
        """dg[..., mu, a, b] = partial_mu g_ab."""
        raise NotImplementedError

    def fd_step(self, x):
        x = np.asarray(x, dtype=float)
        return 1e-4 * np.ones(x.shape[:-1])

    # -- generic geometry --------------------------------------------------
    def metric_inverse(self, x):
        return np.linalg.inv(self.metric(x))

    def christoffel(self, x):
        """Gamma[..., a, b, c] = Gamma^a_{bc}."""
        dg = self.metric_deriv(x)
        ginv = self.metric_inverse(x)
        # 1/2 g^{ad} (d_b g_dc + d_c g_bd - d_d g_bc)
        return 0.5 * (np.einsum("...ad,...bdc->...abc", ginv, dg)
                      + np.einsum("...ad,...cbd->...abc", ginv, dg)
                      - np.einsum("...ad,...dbc->...abc", ginv, dg))

    def christoffel_deriv(self, x):
        """dGamma[..., mu, a, b, c] = partial_mu Gamma^a_{bc}, 4th-order FD."""
        x = np.asarray(x, dtype=float)
        D = self.dim
        h = self.fd_step(x)
        out = np.empty(x.shape[:-1] + (D, D, D, D))
        for mu in range(D):
            acc = 0.0
            for c, o in zip(_FD_COEFF, _FD_OFFSET):
                xs = x.copy()
                xs[..., mu] = xs[..., mu] + o * h
                acc = acc + c * self.christoffel(xs)
            out[..., mu, :, :, :] = acc / h[..., None, None, None]
        return out

    def riemann(self, x):
        """Lowered curvature R[..., mu, nu, sig, rho]; see module docstring."""
        g = self.metric(x)
        gam = self.christoffel(x)
        dgam = self.christoffel_deriv(x)
        rup = (np.einsum("...mlnr->...lrmn", dgam)
               - np.einsum("...nlmr->...lrmn", dgam)
               + np.einsum("...lmk,...knr->...lrmn", gam, gam)
               - np.einsum("...lnk,...kmr->...lrmn", gam, gam))
        return np.einsum("...sl,...lrmn->...mnsr", g, rup)

    def ricci(self, x):
        return np.einsum("...ms,...mnsr->...nr", self.metric_inverse(x), self.riemann(x))

    def scalar_curvature(self, x):
        return np.einsum("...nr,...nr->...", self.metric_inverse(x), self.ricci(x))

    # -- built-in two-form -------------------------------------------------
    def cky(self, x):
        raise NotImplementedError

    def cky_deriv(self, x):
        raise NotImplementedError


# ---------------------------------------------------------------------------
# static family
# ---------------------------------------------------------------------------

class StaticSpacetime(_ChartBase):
    """Static warped-product spacetime -f^2 dt^2 + f^-2 dr^2 + r^2 g_{sphere}
    in the Cartesian spatial chart.

    Use the named constructors; ``custom`` takes callables for f^2 and its
    first two radial derivatives.
    """

    def __init__(self, f2, f2p, f2pp, n=3, name="custom-f", params=None,
                 r_min=1e-6, r_max=np.inf, curvature_constant=None):
        self.f2 = f2
        self.f2p = f2p
        self.f2pp = f2pp
        self.n = n
        self.dim = n + 1
        self.name = name
        self.params = dict(params or {})
        self.r_min = r_min
        self.r_max = r_max
        # constant-curvature families record R = c (g o g); None = no closed form
        self.curvature_constant = curvature_constant

    # ---- constructors ----
    @classmethod
    def minkowski(cls, n=3):
        one = lambda r: np.ones_like(np.asarray(r, dtype=float))
        zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))
        return cls(one, zero, zero, n=n, name="minkowski", params={},
                   r_min=1e-8, curvature_constant=0.0)

    @classmethod
    def desitter(cls, kappa=0.1, n=3):
        if kappa <= 0:
            raise ValueError("desitter expects kappa > 0")
        return cls._constant_curvature(kappa, n, "desitter")

    @classmethod
    def antidesitter(cls, kappa=-0.1, n=3):
        if kappa >= 0:
            raise ValueError("antidesitter expects kappa < 0")
        return cls._constant_curvature(kappa, n, "antidesitter")

    @classmethod
    def _constant_curvature(cls, kappa, n, name):
        f2 = lambda r: 1.0 + kappa * np.asarray(r, dtype=float) ** 2
        f2p = lambda r: 2.0 * kappa * np.asarray(r, dtype=float)
        f2pp = lambda r: 2.0 * kappa * np.ones_like(np.asarray(r, dtype=float))
        r_max = (1.0 - 1e-6) / math.sqrt(-kappa) if kappa < 0 else np.inf
        return cls(f2, f2p, f2pp, n=n, name=name, params={"kappa": kappa},
                   r_min=1e-8, r_max=r_max, curvature_constant=-kappa)

    @classmethod
    def schwarzschild(cls, mass=1.0, n=3):
        if mass < 0:
            raise ValueError("mass must be nonnegative")
        if n < 3:
            raise ValueError("schwarzschild needs n >= 3")
        if mass == 0:
            return cls.minkowski(n=n)
        p = n - 2

        def f2(r):
            r = np.asarray(r, dtype=float)
            return 1.0 - 2.0 * mass / r**p

        def f2p(r):
            r = np.asarray(r, dtype=float)
            return 2.0 * p * mass / r**(p + 1)

        def f2pp(r):
            r = np.asarray(r, dtype=float)
            return -2.0 * p * (p + 1) * mass / r**(p + 2)

        r_h = (2.0 * mass) ** (1.0 / p)
        return cls(f2, f2p, f2pp, n=n, name="schwarzschild",
                   params={"mass": mass}, r_min=r_h * (1.0 + 1e-6))

    @classmethod
    def custom(cls, f2, f2p, f2pp, n=3, r_min=1e-6, r_max=np.inf, params=None):
        return cls(f2, f2p, f2pp, n=n, name="custom-f", params=params,
                   r_min=r_min, r_max=r_max)

    @property
    def horizon_radius(self):
        if self.name == "schwarzschild":
            return (2.0 * self.params["mass"]) ** (1.0 / (self.n - 2))
        return 0.0

    # ---- chart basics ----
    def radius(self, x):
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x[..., 1:], axis=-1)

    def warp(self, r):
        return np.sqrt(self.f2(r))

    def check_domain(self, x):
        r = self.radius(x)
        if np.any(r < self.r_min) or np.any(r > self.r_max):
            raise ValueError(
                f"{self.name}: radius outside domain [{self.r_min:.6g}, {self.r_max:.6g}]"
            )
        return r

    def _unit(self, x):
        x = np.asarray(x, dtype=float)
        r = self.radius(x)
        return r, x[..., 1:] / r[..., None]

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        r, xh = self._unit(x)
        f2 = self.f2(r)
        g = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        g[..., 0, 0] = -f2
        g[..., 1:, 1:] = (np.eye(self.n)
                          + (1.0 / f2 - 1.0)[..., None, None]
                          * xh[..., :, None] * xh[..., None, :])
        return g

    def metric_inverse(self, x):
        x = np.asarray(x, dtype=float)
        r, xh = self._unit(x)
        f2 = self.f2(r)
        gi = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        gi[..., 0, 0] = -1.0 / f2
        gi[..., 1:, 1:] = (np.eye(self.n)
                           + (f2 - 1.0)[..., None, None]
                           * xh[..., :, None] * xh[..., None, :])
        return gi

    def metric_deriv(self, x):
        x = np.asarray(x, dtype=float)
        r, xh = self._unit(x)
        f2 = self.f2(r)
        f2p = self.f2p(r)
        n = self.n
        dg = np.zeros(x.shape[:-1] + (self.dim, self.dim, self.dim))
        # d_k xhat_i = (delta_ki - xhat_k xhat_i) / r
        dxh = (np.eye(n) - xh[..., :, None] * xh[..., None, :]) / r[..., None, None]
        c = 1.0 / f2 - 1.0
        cp = -f2p / f2**2
        dg[..., 1:, 0, 0] = -f2p[..., None] * xh
        dg[..., 1:, 1:, 1:] = (
            cp[..., None, None, None] * xh[..., :, None, None]
            * xh[..., None, :, None] * xh[..., None, None, :]
            + c[..., None, None, None]
            * (dxh[..., :, :, None] * xh[..., None, None, :]
               + xh[..., None, :, None] * dxh[..., :, None, :])
        )
        return dg

    def fd_step(self, x):
        return 1e-4 * np.maximum(1.0, self.radius(x))

    # ---- built-in conformal Killing-Yano two-form Q = r dr wedge dt ----
    def cky(self, x):
        x = np.asarray(x, dtype=float)
        Q = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        Q[..., 1:, 0] = x[..., 1:]
        Q[..., 0, 1:] = -x[..., 1:]
        return Q

    def cky_deriv(self, x):
        x = np.asarray(x, dtype=float)
        dQ = np.zeros(x.shape[:-1] + (self.dim, self.dim, self.dim))
        eye = np.eye(self.n)
        dQ[..., 1:, 1:, 0] = eye
        dQ[..., 1:, 0, 1:] = -eye
        return dQ

    def cky_squared(self, x):
        """(Q^2)_{ab} = Q_a^c Q_cb."""
        Q = self.cky(x)
        gi = self.metric_inverse(x)
        return np.einsum("...ac,...cd,...db->...ab", Q, gi, Q)

    # ---- curvature ----
    def riemann_closed(self, x):
        """Closed-form curvature for the built-in families.

        Constant-curvature families use R = c (g o g) with c = -kappa; the
        Schwarzschild family uses the Q-based expression whose frame
        components reproduce the exact values listed in
        ``schwarzschild_frame_table``.  Raises for custom warp functions.
        """
        x = np.asarray(x, dtype=float)
        g = self.metric(x)
        if self.name == "schwarzschild":
            m = self.params["mass"]
            n = self.n
            r = self.radius(x)
            Q = self.cky(x)
            Q2 = self.cky_squared(x)
            gog = (np.einsum("...ac,...bd->...abcd", g, g)
                   - np.einsum("...ad,...bc->...abcd", g, g))
            bQ = (2.0 / 3.0 * np.einsum("...ab,...cd->...abcd", Q, Q)
                  - 1.0 / 3.0 * np.einsum("...ac,...db->...abcd", Q, Q)
                  - 1.0 / 3.0 * np.einsum("...ad,...bc->...abcd", Q, Q))
            goq2 = (np.einsum("...ac,...bd->...abcd", g, Q2)
                    - np.einsum("...ad,...bc->...abcd", g, Q2)
                    + np.einsum("...bd,...ac->...abcd", g, Q2)
                    - np.einsum("...bc,...ad->...abcd", g, Q2))
            rn = r**n
            rn2 = r**(n + 2)
            return (2.0 * m / rn)[..., None, None, None, None] * gog \
                - (n * (n - 1) * m / rn2)[..., None, None, None, None] * bQ \
                - (n * m / rn2)[..., None, None, None, None] * goq2
        if self.curvature_constant is None:
            raise ValueError(f"no closed-form curvature for family {self.name!r}")
        c = self.curvature_constant
        return c * (np.einsum("...ac,...bd->...abcd", g, g)
                    - np.einsum("...ad,...bc->...abcd", g, g))

    def ricci(self, x, method="auto"):
        """Ricci tensor; closed form when the family provides one."""
        if method == "numeric" or (method == "auto" and self.curvature_constant is None
                                   and self.name != "schwarzschild"):
            return super().ricci(x)
        R = self.riemann_closed(x)
        return np.einsum("...ms,...mnsr->...nr", self.metric_inverse(x), R)

    def null_convergence(self, x, v):
        """Ric(L, L) for the null vector L = (1/f) d_t + v, with v a unit
        vector tangent to the constant-t slice (spatial components)."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        r = self.radius(x)
        L = np.zeros(x.shape[:-1] + (self.dim,))
        L[..., 0] = 1.0 / self.warp(r)
        L[..., 1:] = v
        ric = self.ricci(x)
        return np.einsum("...ab,...a,...b->...", ric, L, L)

    # ---- sampling and frames ----
    def default_radial_range(self):
        lo = max(self.r_min * 1.01, 0.25)
        if self.name == "schwarzschild":
            lo = max(self.r_min * 1.05, 1.25 * self.horizon_radius)
        hi = min(self.r_max * 0.95, max(4.0 * lo, 5.0))
        return lo, hi

    def sample_points(self, rng, count, r_range=None, t_range=(-1.0, 1.0)):
        lo, hi = r_range if r_range is not None else self.default_radial_range()
        r = rng.uniform(lo, hi, size=count)
        d = rng.normal(size=(count, self.n))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        x = np.empty((count, self.dim))
        x[:, 0] = rng.uniform(t_range[0], t_range[1], size=count)
        x[:, 1:] = r[:, None] * d
        return x

    def orthonormal_frame(self, x):
        """Orthonormal frame adapted to the sphere through x.

        Returns (tangent, radial, timelike): the n-1 unit vectors tangent to
        the coordinate sphere, the outward unit spacelike radial vector
        f d_r, and the future unit timelike vector (1/f) d_t.
        """
        x = np.asarray(x, dtype=float)
        r, xh = self._unit(x)
        f = self.warp(r)
        n = self.n
        # Householder reflection sending e_n to xhat; its other columns span
        # the tangent space of the sphere
        w = xh.copy()
        w[..., -1] -= 1.0
        wnorm2 = np.sum(w * w, axis=-1)
        safe = wnorm2 > 1e-24
        wn = np.where(safe[..., None], w, 0.0)
        H = np.broadcast_to(np.eye(n), xh.shape[:-1] + (n, n)).copy()
        H -= 2.0 * wn[..., :, None] * wn[..., None, :] \
            / np.where(safe, wnorm2, 1.0)[..., None, None]
        tangent = np.zeros(x.shape[:-1] + (n - 1, self.dim))
        tangent[..., :, 1:] = np.swapaxes(H[..., :, :n - 1], -1, -2)
        radial = np.zeros(x.shape[:-1] + (self.dim,))
        radial[..., 1:] = f[..., None] * xh
        timelike = np.zeros(x.shape[:-1] + (self.dim,))
        timelike[..., 0] = 1.0 / f
        return tangent, radial, timelike

    def schwarzschild_frame_table(self, r):
        """Exact frame components of the Schwarzschild curvature and of Q.

        Keys: curvature values R(E_t, E_r, E_t, E_r), R(E_t, E_i, E_t, E_j)
        (coefficient of delta_ij), R(E_r, E_i, E_r, E_j), R(E_i, E_j, E_k, E_l)
        (coefficient of delta_ik delta_jl - delta_il delta_jk), plus
        Q(E_r, E_t) and the squares (Q^2)(E_t, E_t), (Q^2)(E_r, E_r).
        """
        if self.name != "schwarzschild":
            raise ValueError("frame table is specific to the schwarzschild family")
        m = self.params["mass"]
        n = self.n
        r = np.asarray(r, dtype=float)
        return {
            "tr_tr": -m * (n - 1) * (n - 2) / r**n,
            "ti_tj": m * (n - 2) / r**n,
            "ri_rj": -m * (n - 2) / r**n,
            "ij_kl": 2.0 * m / r**n,
            "Q_rt": r,
            "Q2_tt": -r**2,
            "Q2_rr": r**2,
        }


# ---------------------------------------------------------------------------
# ingoing null chart
# ---------------------------------------------------------------------------

class EddingtonFinkelsteinChart(_ChartBase):
    """Chart (v, r, theta, phi) with metric -f^2 dv^2 + 2 dv dr + r^2 g_{S^2};
    carries the two-form r dr wedge dv.  For n = 3 only; keep theta away from
    the poles."""

    dim = 4

    def __init__(self, f2, f2p, name="ef"):
        self.f2 = f2
        self.f2p = f2p
        self.name = name

    @classmethod
    def schwarzschild(cls, mass=1.0):
        return cls(lambda r: 1.0 - 2.0 * mass / np.asarray(r, dtype=float),
                   lambda r: 2.0 * mass / np.asarray(r, dtype=float) ** 2,
                   name="ef-schwarzschild")

    @classmethod
    def from_static(cls, provider):
        if provider.n != 3:
            raise ValueError("null chart provided for n = 3 only")
        return cls(provider.f2, provider.f2p, name=f"ef-{provider.name}")

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        r = x[..., 1]
        th = x[..., 2]
        g = np.zeros(x.shape[:-1] + (4, 4))
        g[..., 0, 0] = -self.f2(r)
        g[..., 0, 1] = g[..., 1, 0] = 1.0
        g[..., 2, 2] = r**2
        g[..., 3, 3] = r**2 * np.sin(th)**2
        return g

    def metric_deriv(self, x):
        x = np.asarray(x, dtype=float)
        r = x[..., 1]
        th = x[..., 2]
        dg = np.zeros(x.shape[:-1] + (4, 4, 4))
        dg[..., 1, 0, 0] = -self.f2p(r)
        dg[..., 1, 2, 2] = 2.0 * r
        dg[..., 1, 3, 3] = 2.0 * r * np.sin(th)**2
        dg[..., 2, 3, 3] = 2.0 * r**2 * np.sin(th) * np.cos(th)
        return dg

    def fd_step(self, x):
        x = np.asarray(x, dtype=float)
        return 1e-4 * np.maximum(1.0, x[..., 1])

    def cky(self, x):
        x = np.asarray(x, dtype=float)
        r = x[..., 1]
        Q = np.zeros(x.shape[:-1] + (4, 4))
        Q[..., 1, 0] = r
        Q[..., 0, 1] = -r
        return Q

    def cky_deriv(self, x):
        x = np.asarray(x, dtype=float)
        dQ = np.zeros(x.shape[:-1] + (4, 4, 4))
        dQ[..., 1, 1, 0] = 1.0
        dQ[..., 1, 0, 1] = -1.0
        return dQ

    def sample_points(self, rng, count, r_range=(2.5, 20.0), v_range=(-1.0, 1.0)):
        x = np.empty((count, 4))
        x[:, 0] = rng.uniform(*v_range, size=count)
        x[:, 1] = rng.uniform(*r_range, size=count)
        x[:, 2] = rng.uniform(0.4, math.pi - 0.4, size=count)
        x[:, 3] = rng.uniform(0.0, 2.0 * math.pi, size=count)
        return x


# ---------------------------------------------------------------------------
# warped-product chart (existence theorem toy)
# ---------------------------------------------------------------------------

class AffineWarpedChart(_ChartBase):
    """Warped product R^2(y) delta(x) + delta(y) on fiber x and base y, with
    an affine warp R(y) = w . y + c.

    Carries the fiber-volume form R^{fiber_dim + 1} dx^1 wedge ... as its
    two-form (fiber_dim must be 2 for the form machinery); its Hodge dual is
    R dy^1 wedge dy^2 when the base is 2-dimensional as well.
    """

    def __init__(self, fiber_dim=2, base_dim=2, w=(1.0, 0.0), c=0.0):
        self.nf = fiber_dim
        self.nb = base_dim
        self.dim = fiber_dim + base_dim
        self.w = np.asarray(w, dtype=float)
        self.c = c
        if self.w.shape != (base_dim,):
            raise ValueError("warp gradient must have base dimension")

    def warp(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., self.nf:] @ self.w + self.c

    def metric(self, x):
        x = np.asarray(x, dtype=float)
        R = self.warp(x)
        g = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        g[..., :self.nf, :self.nf] = R[..., None, None]**2 * np.eye(self.nf)
        g[..., self.nf:, self.nf:] = np.eye(self.nb)
        return g

    def metric_deriv(self, x):
        x = np.asarray(x, dtype=float)
        R = self.warp(x)
        dg = np.zeros(x.shape[:-1] + (self.dim, self.dim, self.dim))
        for k in range(self.nb):
            dg[..., self.nf + k, :self.nf, :self.nf] = \
                (2.0 * R * self.w[k])[..., None, None] * np.eye(self.nf)
        return dg

    def cky(self, x, power=None):
        if self.nf != 2:
            raise ValueError("two-form machinery needs a 2-dimensional fiber")
        x = np.asarray(x, dtype=float)
        R = self.warp(x)
        p = self.nf + 1 if power is None else power
        Q = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        Q[..., 0, 1] = R**p
        Q[..., 1, 0] = -R**p
        return Q

    def cky_deriv(self, x, power=None):
        x = np.asarray(x, dtype=float)
        R = self.warp(x)
        p = self.nf + 1 if power is None else power
        dQ = np.zeros(x.shape[:-1] + (self.dim, self.dim, self.dim))
        for k in range(self.nb):
            dQ[..., self.nf + k, 0, 1] = p * R**(p - 1) * self.w[k]
            dQ[..., self.nf + k, 1, 0] = -p * R**(p - 1) * self.w[k]
        return dQ

    def dual_form(self, x):
        """Analytic R dy^1 wedge dy^2 (base must be 2-dimensional)."""
        if self.nb != 2:
            raise ValueError("dual form stated for a 2-dimensional base")
        x = np.asarray(x, dtype=float)
        R = self.warp(x)
        Q = np.zeros(x.shape[:-1] + (self.dim, self.dim))
        Q[..., 2, 3] = R
        Q[..., 3, 2] = -R
        return Q

    def dual_form_deriv(self, x):
        x = np.asarray(x, dtype=float)
        dQ = np.zeros(x.shape[:-1] + (self.dim, self.dim, self.dim))
        for k in range(self.nb):
            dQ[..., self.nf + k, 2, 3] = self.w[k]
            dQ[..., self.nf + k, 3, 2] = -self.w[k]
        return dQ

    def sample_points(self, rng, count):
        x = rng.uniform(-1.0, 1.0, size=(count, self.dim))
        # keep the warp factor positive and away from zero
        x[:, self.nf] = rng.uniform(0.6, 2.0, size=count)
        return x


# ---------------------------------------------------------------------------
# two-form operations
# ---------------------------------------------------------------------------

def form_covariant_deriv(chart, x, form=None, form_deriv=None):
    """(D_mu Q)_{ab} for the chart's two-form (or a supplied one)."""
    Q = chart.cky(x) if form is None else form(x)
    dQ = (chart.cky_deriv(x) if form is None else
          (form_deriv(x) if form_deriv is not None else fd_form_deriv(chart, x, form)))
    gam = chart.christoffel(x)
    return (dQ - np.einsum("...lma,...lb->...mab", gam, Q)
            - np.einsum("...lmb,...al->...mab", gam, Q))


def form_divergence(chart, x, DQ=None, **kw):
    """xi with xi_b = D_a Q^a_b; returns (xi_down, xi_up)."""
    if DQ is None:
        DQ = form_covariant_deriv(chart, x, **kw)
    gi = chart.metric_inverse(x)
    xi_down = np.einsum("...am,...amb->...b", gi, DQ)
    return xi_down, np.einsum("...ab,...b->...a", gi, xi_down)


def cky_residual(chart, x, form=None, form_deriv=None):
    """Pointwise defect of the conformal Killing-Yano equation for a two-form.

    Checks (D_X Q)(Y,Z) + (D_Y Q)(X,Z) against the pure-trace right side
    (2/n) ( <X,Y> xi(Z) - 1/2 <X,Z> xi(Y) - 1/2 <Y,Z> xi(X) ) with n + 1 the
    ambient dimension and xi the covariant divergence of Q.  Returns a dict
    of per-point arrays: ``residual`` (max norm), ``scale`` and ``rel``.
    """
    g = chart.metric(x)
    DQ = form_covariant_deriv(chart, x, form=form, form_deriv=form_deriv)
    xi_down, _ = form_divergence(chart, x, DQ=DQ)
    nn = chart.dim - 1
    sym = DQ + np.swapaxes(DQ, -3, -2)
    rhs = (2.0 / nn) * (np.einsum("...mn,...r->...mnr", g, xi_down)
                        - 0.5 * np.einsum("...mr,...n->...mnr", g, xi_down)
                        - 0.5 * np.einsum("...nr,...m->...mnr", g, xi_down))
    res = sym - rhs
    residual = np.max(np.abs(res), axis=(-3, -2, -1))
    # scale from the unsymmetrized derivative so that exact Killing-Yano
    # forms (where sym itself cancels to round-off) still report rel ~ 0
    scale = np.maximum(2.0 * np.max(np.abs(DQ), axis=(-3, -2, -1))
                       + np.max(np.abs(rhs), axis=(-3, -2, -1)), 1e-30)
    return {"residual": residual, "scale": scale, "rel": residual / scale}


def twistor_residual(chart, x, form=None, form_deriv=None):
    """Pointwise defect of the twistor equation for a two-form,

        D_X Q - 1/(p+1) X .| dQ + 1/(D-p+1) X^flat wedge (delta Q),

    with p = 2, D the chart dimension and delta Q = -xi.  Returns per-point
    ``residual``, ``scale`` and ``rel`` as for ``cky_residual``.
    """
    g = chart.metric(x)
    DQ = form_covariant_deriv(chart, x, form=form, form_deriv=form_deriv)
    xi_down, _ = form_divergence(chart, x, DQ=DQ)
    d3 = DQ + np.einsum("...nrm->...mnr", DQ) + np.einsum("...rmn->...mnr", DQ)
    trace = (np.einsum("...mn,...r->...mnr", g, xi_down)
             - np.einsum("...mr,...n->...mnr", g, xi_down))
    res = DQ - d3 / 3.0 - trace / (chart.dim - 1)
    residual = np.max(np.abs(res), axis=(-3, -2, -1))
    scale = np.maximum(np.max(np.abs(DQ), axis=(-3, -2, -1))
                       + np.max(np.abs(d3), axis=(-3, -2, -1)) / 3.0
                       + np.max(np.abs(trace), axis=(-3, -2, -1)) / (chart.dim - 1),
                       1e-30)
    return {"residual": residual, "scale": scale, "rel": residual / scale}


def hodge_dual_two_form(chart, x, Q=None):
    """Hodge dual of a two-form in a 4-dimensional chart."""
    if chart.dim != 4:
        raise ValueError("dual implemented for 4-dimensional charts")
    if Q is None:
        Q = chart.cky(x)
    g = chart.metric(x)
    gi = np.linalg.inv(g)
    det = np.abs(np.linalg.det(g))
    Qup = np.einsum("...ma,...nb,...ab->...mn", gi, gi, Q)
    return 0.5 * np.sqrt(det)[..., None, None] * np.einsum("abmn,...mn->...ab", _EPS4, Qup)


def fd_form_deriv(chart, x, form, step=None):
    """dQ[..., mu, a, b] = partial_mu Q_ab by 4th-order central differences."""
    x = np.asarray(x, dtype=float)
    D = chart.dim
    h = chart.fd_step(x) if step is None else step * np.ones(x.shape[:-1])
    out = np.empty(x.shape[:-1] + (D, D, D))
    for mu in range(D):
        acc = 0.0
        for c, o in zip(_FD_COEFF, _FD_OFFSET):
            xs = x.copy()
            xs[..., mu] = xs[..., mu] + o * h
            acc = acc + c * form(xs)
        out[..., mu, :, :] = acc / h[..., None, None]
    return out


def killing_residual(chart, x, xi_up):
    """(Lie_xi g)_{ab} for a constant-component vector field xi."""
    dg = chart.metric_deriv(x)
    xi_up = np.broadcast_to(np.asarray(xi_up, dtype=float),
                            np.asarray(x, dtype=float).shape)
    return np.einsum("...c,...cab->...ab", xi_up, dg)


# ---------------------------------------------------------------------------
# polar labels (n = 3)
# ---------------------------------------------------------------------------

def spherical_from_cartesian(x):
    """(t, x, y, z) -> (t, r, theta, phi) labels for the n = 3 chart."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise ValueError("polar labels provided for n = 3 points")
    r = np.linalg.norm(x[..., 1:], axis=-1)
    theta = np.arccos(np.clip(x[..., 3] / r, -1.0, 1.0))
    phi = np.mod(np.arctan2(x[..., 2], x[..., 1]), 2.0 * math.pi)
    return np.stack([x[..., 0], r, theta, phi], axis=-1)


def cartesian_from_spherical(p):
    """(t, r, theta, phi) -> (t, x, y, z)."""
    p = np.asarray(p, dtype=float)
    t, r, th, ph = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    st = np.sin(th)
    return np.stack([t, r * st * np.cos(ph), r * st * np.sin(ph), r * np.cos(th)],
                    axis=-1)
