"""Discretized spacelike 2-surfaces in 4-dimensional static spacetimes.

A surface is given by an immersion of the round sphere, sampled on the
Gauss-Legendre x uniform grid.  Ambient positions and all frame fields are
kept in the Cartesian-spatial chart of the provider (every component is then
a plain scalar on the sphere and crosses the poles with even parity); the
polar labels (t, r, Theta, Phi) appear only at the interfaces: immersion
definitions, CSV files.

Conventions: the null pair satisfies <L, Lbar> = -2 with L outgoing (along
+e_n) and Lbar incoming; chi_ab = <D_a L, d_b>, chibar_ab = <D_a Lbar, d_b>,
zeta_a = 1/2 <D_a L, Lbar>, and the mean curvature vector decomposes as
H = -1/2 <H,Lbar> L - 1/2 <H,L> Lbar.  e_n is oriented so that
Q(L, Lbar) > 0 on round spheres (outward).
"""

import csv
import math

import numpy as np
from scipy.sparse.linalg import lsmr

from . import quadrature
from .gridops import MeshCalculus, brioschi_curvature
from .spacetime import cartesian_from_spherical

__all__ = [
    "NotSpacelikeError", "GaugeError",
    "real_sph_harm", "HarmonicProfile",
    "Immersion", "family_catalog", "FAMILY_NAMES",
    "SurfaceMesh", "build_surface",
    "NullFrameField", "null_frame", "mean_curvature_gauge_report",
    "surface_christoffel", "covariant_deriv_oneform", "covariant_deriv_twotensor",
    "exterior_deriv_oneform", "scalar_curvature",
    "write_node_csv", "immersion_from_csv",
]


class NotSpacelikeError(ValueError):
    pass


class GaugeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# real spherical harmonics with analytic derivatives
# ---------------------------------------------------------------------------

def _assoc_legendre(l, m, ct, st):
    """P_l^m(cos theta) and d/dtheta P_l^m for m >= 0 (Condon-Shortley)."""
    # seed P_m^m = (-1)^m (2m-1)!! sin^m
    pmm = np.ones_like(ct)
    fact = 1.0
    for _ in range(m):
        pmm = pmm * (-fact) * st
        fact += 2.0
    if l == m:
        plm, plm1 = pmm, np.zeros_like(ct)
    else:
        pm1 = ct * (2 * m + 1) * pmm
        if l == m + 1:
            plm, plm1 = pm1, pmm
        else:
            pa, pb = pmm, pm1
            for ll in range(m + 2, l + 1):
                pc = ((2 * ll - 1) * ct * pb - (ll + m - 1) * pa) / (ll - m)
                pa, pb = pb, pc
            plm, plm1 = pb, pa
    # (1 - x^2) dP/dx = -l x P_l^m + (l + m) P_{l-1}^m ;  d/dtheta = -sin * d/dx
    dplm = (l * ct * plm - (l + m) * plm1) / st
    return plm, dplm


def real_sph_harm(l, m, theta, phi, deriv=False):
    """Real spherical harmonic Y_{lm}; with deriv=True returns
    (Y, dY/dtheta, dY/dphi).  Unit L2 norm on the sphere."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if not (0 <= abs(m) <= l):
        raise ValueError("need |m| <= l")
    am = abs(m)
    ct, st = np.cos(theta), np.sin(theta)
    plm, dplm = _assoc_legendre(l, am, ct, st)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi)
                     * math.factorial(l - am) / math.factorial(l + am))
    if m > 0:
        azi, dazi = np.cos(am * phi), -am * np.sin(am * phi)
        norm *= math.sqrt(2.0)
    elif m < 0:
        azi, dazi = np.sin(am * phi), am * np.cos(am * phi)
        norm *= math.sqrt(2.0)
    else:
        azi, dazi = np.ones_like(phi), np.zeros_like(phi)
    Y = norm * plm * azi
    if not deriv:
        return Y
    return Y, norm * dplm * azi, norm * plm * dazi


class HarmonicProfile:
    """rho(theta, phi) = base * (1 + sum eps Y_{lm}); value and gradient."""

    def __init__(self, base, harmonics=()):
        self.base = float(base)
        self.harmonics = [(int(l), int(m), float(e)) for l, m, e in harmonics]

    def __call__(self, theta, phi):
        val = np.ones_like(np.asarray(theta, dtype=float))
        dth = np.zeros_like(val)
        dph = np.zeros_like(val)
        for l, m, e in self.harmonics:
            Y, dY, dYp = real_sph_harm(l, m, theta, phi, deriv=True)
            val = val + e * Y
            dth = dth + e * dY
            dph = dph + e * dYp
        return self.base * val, self.base * dth, self.base * dph


# ---------------------------------------------------------------------------
# immersions
# ---------------------------------------------------------------------------

def _unit_dirs(theta, phi):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    n = np.stack([st * cp, st * sp, ct], axis=-1)
    dn_dth = np.stack([ct * cp, ct * sp, -st], axis=-1)
    dn_dph = np.stack([-st * sp, st * cp, np.zeros_like(theta)], axis=-1)
    return n, dn_dth, dn_dph


class Immersion:
    """Base immersion: subclasses supply spatial(theta, phi) -> (S, dS_th,
    dS_ph) and time(theta, phi) -> (t, dt_th, dt_ph)."""

    name = "immersion"
    params = {}

    def spatial(self, theta, phi):
        raise NotImplementedError

    def time(self, theta, phi):
        z = np.zeros_like(np.asarray(theta, dtype=float))
        return z, z, z

    def cartesian(self, theta, phi):
        S, _, _ = self.spatial(theta, phi)
        t, _, _ = self.time(theta, phi)
        return np.concatenate([t[..., None], S], axis=-1)

    def cartesian_deriv(self, theta, phi):
        S, dSth, dSph = self.spatial(theta, phi)
        t, dtth, dtph = self.time(theta, phi)
        dth = np.concatenate([dtth[..., None], dSth], axis=-1)
        dph = np.concatenate([dtph[..., None], dSph], axis=-1)
        return np.stack([dth, dph], axis=-2)

    def polar(self, theta, phi):
        """(t, r, Theta, Phi) chart labels of the image point."""
        X = self.cartesian(theta, phi)
        r = np.linalg.norm(X[..., 1:], axis=-1)
        Th = np.arccos(np.clip(X[..., 3] / r, -1.0, 1.0))
        Ph = np.mod(np.arctan2(X[..., 2], X[..., 1]), 2.0 * math.pi)
        return np.stack([X[..., 0], r, Th, Ph], axis=-1)


class RadialGraph(Immersion):
    """S = rho(theta, phi) nhat with a time profile t(theta, phi)."""

    def __init__(self, rho_profile, time_of_rho=None, name="radial-graph", params=None):
        self.rho_profile = rho_profile
        self.time_of_rho = time_of_rho  # (t, dt/drho) as callables pair or None
        self.name = name
        self.params = dict(params or {})

    def spatial(self, theta, phi):
        rho, drth, drph = self.rho_profile(theta, phi)
        n, dnth, dnph = _unit_dirs(theta, phi)
        S = rho[..., None] * n
        dSth = drth[..., None] * n + rho[..., None] * dnth
        dSph = drph[..., None] * n + rho[..., None] * dnph
        return S, dSth, dSph

    def time(self, theta, phi):
        if self.time_of_rho is None:
            return super().time(theta, phi)
        tfun, dtfun = self.time_of_rho
        rho, drth, drph = self.rho_profile(theta, phi)
        t = tfun(rho)
        dt = dtfun(rho)
        return t, dt * drth, dt * drph


class TiltedSphere(Immersion):
    """Round spatial sphere with t = t0 + beta * rho0 * cos(theta)."""

    def __init__(self, rho0, beta, t0=0.0):
        self.rho0, self.beta, self.t0 = float(rho0), float(beta), float(t0)
        self.name = "boosted-sphere"
        self.params = {"rho0": rho0, "beta": beta, "t0": t0}

    def spatial(self, theta, phi):
        n, dnth, dnph = _unit_dirs(theta, phi)
        r = self.rho0
        return r * n, r * dnth, r * dnph

    def time(self, theta, phi):
        th = np.asarray(theta, dtype=float)
        c = self.beta * self.rho0
        return (self.t0 + c * np.cos(th), -c * np.sin(th),
                np.zeros_like(np.asarray(phi, dtype=float)))


class Ellipsoid(Immersion):
    def __init__(self, a, b, c, t0=0.0):
        self.axes = (float(a), float(b), float(c))
        self.t0 = float(t0)
        self.name = "ellipsoid"
        self.params = {"a": a, "b": b, "c": c, "t0": t0}

    def spatial(self, theta, phi):
        n, dnth, dnph = _unit_dirs(theta, phi)
        ax = np.array(self.axes)
        return ax * n, ax * dnth, ax * dnph

    def time(self, theta, phi):
        t = np.full_like(np.asarray(theta, dtype=float), self.t0)
        z = np.zeros_like(t)
        return t, z, z


class TabulatedImmersion(Immersion):
    """Immersion given by per-node polar labels on a known grid; tangents
    fall back to mesh finite differences (cartesian_deriv returns None)."""

    def __init__(self, n_theta, n_phi, polar_table, name="tabulated"):
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        self.table = np.asarray(polar_table, dtype=float)  # (n_theta, n_phi, 4)
        self.name = name
        self.params = {"n_theta": n_theta, "n_phi": n_phi}

    def cartesian(self, theta, phi):
        if np.shape(theta) != (self.n_theta, self.n_phi):
            raise ValueError(
                f"tabulated immersion is bound to a {self.n_theta}x{self.n_phi} grid")
        return cartesian_from_spherical(self.table)

    def cartesian_deriv(self, theta, phi):
        return None


FAMILY_NAMES = ("sphere", "slice-graph", "ellipsoid", "boosted-sphere",
                "cone-section", "tortoise-cone")


def family_catalog(name, params):
    """Analytic immersion families.

    sphere:         t0, r0
    slice-graph:    t0, r0, harmonics=[(l, m, eps), ...]
    ellipsoid:      t0, a, b, c
    boosted-sphere: t0, rho0, beta (spacelike for |beta| < 1)
    cone-section:   c0, w0, harmonics, branch in {incoming, outgoing};
                    incoming is t = c0 - w on the Minkowski light cone
                    t + r = c0, outgoing is t = c0 + w on t - r = c0
    tortoise-cone:  mass, c0, w0, harmonics; ingoing Schwarzschild cone
                    t = c0 - rstar(w) with rstar = r + 2m log(r/2m - 1)
    """
    p = dict(params)
    if name == "sphere":
        prof = HarmonicProfile(p["r0"])
        t0 = float(p.get("t0", 0.0))
        return RadialGraph(prof, (lambda r: np.full_like(r, t0),
                                  lambda r: np.zeros_like(r)),
                           name="sphere", params=p)
    if name == "slice-graph":
        prof = HarmonicProfile(p["r0"], p.get("harmonics", ()))
        t0 = float(p.get("t0", 0.0))
        return RadialGraph(prof, (lambda r: np.full_like(r, t0),
                                  lambda r: np.zeros_like(r)),
                           name="slice-graph", params=p)
    if name == "ellipsoid":
        return Ellipsoid(p["a"], p["b"], p["c"], p.get("t0", 0.0))
    if name == "boosted-sphere":
        return TiltedSphere(p["rho0"], p["beta"], p.get("t0", 0.0))
    if name == "cone-section":
        prof = HarmonicProfile(p["w0"], p.get("harmonics", ()))
        c0 = float(p.get("c0", 0.0))
        branch = p.get("branch", "incoming")
        if branch == "incoming":
            pair = (lambda r: c0 - r, lambda r: -np.ones_like(r))
        elif branch == "outgoing":
            pair = (lambda r: c0 + r, lambda r: np.ones_like(r))
        else:
            raise ValueError("branch must be 'incoming' or 'outgoing'")
        return RadialGraph(prof, pair, name="cone-section", params=p)
    if name == "tortoise-cone":
        m = float(p["mass"])
        prof = HarmonicProfile(p["w0"], p.get("harmonics", ()))
        c0 = float(p.get("c0", 0.0))

        def tfun(r):
            return c0 - (r + 2.0 * m * np.log(r / (2.0 * m) - 1.0))

        def dtfun(r):
            return -r / (r - 2.0 * m)

        return RadialGraph(prof, (tfun, dtfun), name="tortoise-cone", params=p)
    raise ValueError(f"unknown surface family {name!r}; known: {FAMILY_NAMES}")


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

class SurfaceMesh:
    """Sampled immersion with tangents, induced metric and quadrature."""

    def __init__(self, provider, immersion, rule, calc, X, T):
        self.provider = provider
        self.immersion = immersion
        self.rule = rule
        self.calc = calc
        self.n_theta, self.n_phi = rule.resolution
        self.theta, self.phi = rule.theta, rule.phi
        self.X = X                      # (n_theta, n_phi, 4) Cartesian chart
        self.T = T                      # (n_theta, n_phi, 2, 4)
        g = provider.metric(X)
        self.g = g
        self.sigma = np.einsum("...am,...bn,...mn->...ab", T, T, g)
        det = (self.sigma[..., 0, 0] * self.sigma[..., 1, 1]
               - self.sigma[..., 0, 1] ** 2)
        bad = (det <= 0) | (self.sigma[..., 0, 0] <= 0)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise NotSpacelikeError(
                f"induced metric not positive definite at node "
                f"(theta_index={i}, phi_index={j})")
        self.det_sigma = det
        self.sigma_inv = np.empty_like(self.sigma)
        self.sigma_inv[..., 0, 0] = self.sigma[..., 1, 1] / det
        self.sigma_inv[..., 1, 1] = self.sigma[..., 0, 0] / det
        self.sigma_inv[..., 0, 1] = -self.sigma[..., 0, 1] / det
        self.sigma_inv[..., 1, 0] = -self.sigma[..., 1, 0] / det
        self.area_element = np.sqrt(det)
        self.quad_weights = rule.weights

    @property
    def resolution(self):
        return (self.n_theta, self.n_phi)

    def integrate(self, field):
        return quadrature.integrate(self, field)

    @property
    def area(self):
        return self.integrate(np.ones((self.n_theta, self.n_phi)))

    def polar_table(self):
        from .spacetime import spherical_from_cartesian
        return spherical_from_cartesian(self.X)


def build_surface(provider, immersion, resolution=(64, 128)):
    """Sample an immersion on the Gauss-Legendre x uniform grid.

    Tangents come from the immersion's analytic derivatives when available,
    otherwise from the mesh finite-difference scheme (6th-order in theta,
    spectral in phi).
    """
    n_theta, n_phi = resolution
    rule = quadrature.QuadratureRule(n_theta, n_phi)
    calc = MeshCalculus(rule.theta, rule.phi)
    TH, PH = np.meshgrid(rule.theta, rule.phi, indexing="ij")
    X = immersion.cartesian(TH, PH)
    T = immersion.cartesian_deriv(TH, PH)
    if T is None:
        dth = calc.dtheta(X, parity=1)
        dph = calc.dphi(X)
        T = np.stack([dth, dph], axis=-2)
    if hasattr(provider, "check_domain"):
        provider.check_domain(X)
    return SurfaceMesh(provider, immersion, rule, calc, X, T)


# ---------------------------------------------------------------------------
# intrinsic calculus
# ---------------------------------------------------------------------------

_TENSOR2_PARITY = np.array([[1.0, -1.0], [-1.0, 1.0]])


def _grad_scalar(calc, f):
    return np.stack([calc.dtheta(f, parity=1), calc.dphi(f)], axis=-1)


def _deriv_oneform(calc, w):
    """dw[..., c, a] = partial_c w_a with pole parity per component."""
    out = np.empty(w.shape[:-1] + (2, 2))
    for a, par in ((0, -1), (1, 1)):
        out[..., 0, a] = calc.dtheta(w[..., a], parity=par)
        out[..., 1, a] = calc.dphi(w[..., a])
    return out


def _deriv_twotensor(calc, S):
    """dS[..., c, a, b] = partial_c S_ab with pole parity per component."""
    out = np.empty(S.shape[:-2] + (2, 2, 2))
    for a in range(2):
        for b in range(2):
            par = _TENSOR2_PARITY[a, b]
            out[..., 0, a, b] = calc.dtheta(S[..., a, b], parity=par)
            out[..., 1, a, b] = calc.dphi(S[..., a, b])
    return out


def surface_christoffel(mesh):
    """Christoffel symbols of the induced metric, gam[..., c, a, b]."""
    ds = _deriv_twotensor(mesh.calc, mesh.sigma)
    return 0.5 * (np.einsum("...cd,...adb->...cab", mesh.sigma_inv, ds)
                  + np.einsum("...cd,...bad->...cab", mesh.sigma_inv, ds)
                  - np.einsum("...cd,...dab->...cab", mesh.sigma_inv, ds))


def covariant_deriv_oneform(mesh, w, gam=None):
    if gam is None:
        gam = surface_christoffel(mesh)
    dw = _deriv_oneform(mesh.calc, w)
    return dw - np.einsum("...dca,...d->...ca", gam, w)


def covariant_deriv_twotensor(mesh, S, gam=None):
    """(nabla_c S)_{ab} for a surface 2-tensor."""
    if gam is None:
        gam = surface_christoffel(mesh)
    dS = _deriv_twotensor(mesh.calc, S)
    return (dS - np.einsum("...dca,...db->...cab", gam, S)
            - np.einsum("...dcb,...ad->...cab", gam, S))


def exterior_deriv_oneform(mesh, w):
    """(dw)_{ab} = partial_a w_b - partial_b w_a."""
    dw = _deriv_oneform(mesh.calc, w)
    return dw - np.swapaxes(dw, -1, -2)


def scalar_curvature(mesh):
    """Intrinsic scalar curvature (twice the Gauss curvature)."""
    return 2.0 * brioschi_curvature(mesh.calc, mesh.sigma)


# ---------------------------------------------------------------------------
# null frames
# ---------------------------------------------------------------------------

class NullFrameField:
    """Per-node null frame data; see module docstring for conventions."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def _ambient_dir_deriv(mesh, V, gam_amb):
    """(D_a V)^mu for an ambient vector field V along the surface."""
    dth = mesh.calc.dtheta(V, parity=1)
    dph = mesh.calc.dphi(V)
    dV = np.stack([dth, dph], axis=-2)            # (..., a, mu)
    return dV + np.einsum("...mnl,...an,...l->...am", gam_amb, mesh.T, V)


def _mean_curvature_vector(mesh, gam_amb, gam_surf):
    dTth = mesh.calc.dtheta(mesh.T[..., 0, :], parity=-1)
    dTph = mesh.calc.dphi(mesh.T[..., 1, :])
    dTmix = mesh.calc.dphi(mesh.T[..., 0, :])     # d_phi of the theta tangent
    # second derivative matrix d_a T_b, using symmetry of mixed partials
    dT = np.empty(mesh.X.shape[:-1] + (2, 2, 4))
    dT[..., 0, 0, :] = dTth
    dT[..., 0, 1, :] = dTmix
    dT[..., 1, 0, :] = dTmix
    dT[..., 1, 1, :] = dTph
    DT = dT + np.einsum("...mnl,...an,...bl->...abm", gam_amb, mesh.T, mesh.T)
    H = np.einsum("...ab,...abm->...m", mesh.sigma_inv, DT) \
        - np.einsum("...ab,...cab,...cm->...m", mesh.sigma_inv, gam_surf, mesh.T)
    # the analytic mean curvature vector is normal; the tangential part of
    # the discrete expression is discretization noise, so drop it (its size
    # is reported by the caller as a diagnostic)
    h_dot_T = np.einsum("...mn,...m,...an->...a", mesh.g, H, mesh.T)
    tang = np.einsum("...ab,...b,...am->...m", mesh.sigma_inv, h_dot_T, mesh.T)
    return H - tang, np.max(np.abs(h_dot_T))


def _slice_normals(mesh):
    """Orthonormal normal pair: e4 future timelike aligned with the normal
    part of d_t, e3 spacelike oriented outward (positive against the
    conformal position field f r d_r)."""
    g = mesh.g
    T = mesh.T
    et = np.zeros(mesh.X.shape)
    et[..., 0] = 1.0
    t_dot_T = np.einsum("...mn,...m,...an->...a", g, et, T)
    v = et - np.einsum("...ab,...b,...am->...m", mesh.sigma_inv, t_dot_T, T)
    v2 = np.einsum("...mn,...m,...n->...", g, v, v)
    if np.any(v2 >= 0):
        i, j = np.argwhere(v2 >= 0)[0]
        raise GaugeError(f"normal projection of d_t not timelike at node ({i}, {j})")
    e4 = v / np.sqrt(-v2)[..., None]
    e4 *= np.sign(e4[..., :1])                    # future-directed

    r = np.linalg.norm(mesh.X[..., 1:], axis=-1)
    u = np.zeros(mesh.X.shape)
    u[..., 1:] = mesh.X[..., 1:] / r[..., None]
    u_dot_T = np.einsum("...mn,...m,...an->...a", g, u, T)
    u = u - np.einsum("...ab,...b,...am->...m", mesh.sigma_inv, u_dot_T, T)
    u = u + np.einsum("...mn,...m,...n->...", g, u, e4)[..., None] * e4
    u2 = np.einsum("...mn,...m,...n->...", g, u, u)
    if np.any(u2 <= 1e-16):
        i, j = np.argwhere(u2 <= 1e-16)[0]
        raise GaugeError(f"degenerate radial direction at node ({i}, {j})")
    e3 = u / np.sqrt(u2)[..., None]
    # Orient e3 with the chart: sign of det[e4, T_theta, T_phi, e3] in
    # ambient coordinates.  On a standard outward-oriented sphere chart this
    # is positive, and unlike a pointwise radial test it stays continuous on
    # surfaces with overhangs, where the outward normal can have a negative
    # radial component.
    M = np.stack([e4, T[..., 0, :], T[..., 1, :], e3], axis=-1)
    sgn = np.sign(np.linalg.det(M))
    e3 = e3 * sgn[..., None]
    return e3, e4


def _frame_from_normals(mesh, e3, e4, gam_amb, gam_surf):
    g = mesh.g
    L = e4 + e3
    Lb = e4 - e3
    DL = _ambient_dir_deriv(mesh, L, gam_amb)
    DLb = _ambient_dir_deriv(mesh, Lb, gam_amb)
    chi_raw = np.einsum("...mn,...am,...bn->...ab", g, DL, mesh.T)
    chibar_raw = np.einsum("...mn,...am,...bn->...ab", g, DLb, mesh.T)
    chi = 0.5 * (chi_raw + np.swapaxes(chi_raw, -1, -2))
    chibar = 0.5 * (chibar_raw + np.swapaxes(chibar_raw, -1, -2))
    asym = max(np.max(np.abs(chi_raw - chi)), np.max(np.abs(chibar_raw - chibar)))
    zeta = 0.5 * np.einsum("...mn,...am,...n->...a", g, DL, Lb)
    H, h_tang = _mean_curvature_vector(mesh, gam_amb, gam_surf)
    Q = mesh.provider.cky(mesh.X)
    et = np.zeros(mesh.X.shape)
    et[..., 0] = 1.0
    return NullFrameField(
        mesh=mesh, L=L, Lbar=Lb, e3=e3, e4=e4,
        chi=chi, chibar=chibar, zeta=zeta, H=H,
        symmetry_defect=asym, H_tangential_defect=h_tang,
        H_dot_L=np.einsum("...mn,...m,...n->...", g, H, L),
        H_dot_Lbar=np.einsum("...mn,...m,...n->...", g, H, Lb),
        Q_L_Lbar=np.einsum("...mn,...m,...n->...", Q, L, Lb),
        Q_ab=np.einsum("...mn,...am,...bn->...ab", Q, mesh.T, mesh.T),
        Q_L_a=np.einsum("...mn,...m,...an->...a", Q, L, mesh.T),
        Q_Lbar_a=np.einsum("...mn,...m,...an->...a", Q, Lb, mesh.T),
        dt_L=np.einsum("...mn,...m,...n->...", g, et, L),
        dt_Lbar=np.einsum("...mn,...m,...n->...", g, et, Lb),
        gauge="slice", cone_residual=None,
    )


def _rescale_frame(frame, a, zeta_new):
    """Apply L -> a L, Lbar -> Lbar / a using exact transformation laws."""
    al = a[..., None]
    return NullFrameField(
        mesh=frame.mesh,
        L=frame.L * al, Lbar=frame.Lbar / al,
        e3=None, e4=None,
        chi=frame.chi * a[..., None, None],
        chibar=frame.chibar / a[..., None, None],
        zeta=zeta_new,
        H=frame.H,
        symmetry_defect=frame.symmetry_defect,
        H_tangential_defect=frame.H_tangential_defect,
        H_dot_L=frame.H_dot_L * a,
        H_dot_Lbar=frame.H_dot_Lbar / a,
        Q_L_Lbar=frame.Q_L_Lbar,
        Q_ab=frame.Q_ab,
        Q_L_a=frame.Q_L_a * a[..., None],
        Q_Lbar_a=frame.Q_Lbar_a / a[..., None],
        dt_L=frame.dt_L * a,
        dt_Lbar=frame.dt_Lbar / a,
        gauge="cone", cone_residual=None,
    )


def null_frame(mesh, gauge="slice"):
    """Null frame field on a mesh.

    slice: e4 along the normal projection of d_t.
    mean-curvature: e3 = -H/|H|, e4 = J/|H| (H must be spacelike).
    cone: slice frame rescaled by L -> a L, Lbar -> Lbar/a with d log a the
    least-squares potential of zeta, making the perpendicular derivative of
    Lbar vanish where zeta is exact; the remaining torsion is reported as
    ``cone_residual``.
    """
    gam_amb = mesh.provider.christoffel(mesh.X)
    gam_surf = surface_christoffel(mesh)
    e3, e4 = _slice_normals(mesh)
    frame = _frame_from_normals(mesh, e3, e4, gam_amb, gam_surf)
    if gauge == "slice":
        return frame
    if gauge == "mean-curvature":
        g = mesh.g
        H = frame.H
        al = np.einsum("...mn,...m,...n->...", g, H, e3)
        be = -np.einsum("...mn,...m,...n->...", g, H, e4)
        h2 = al**2 - be**2
        if np.any(h2 <= 0):
            i, j = np.argwhere(h2 <= 0)[0]
            raise GaugeError(
                f"mean curvature vector not spacelike at node ({i}, {j})")
        Hn = np.sqrt(h2)
        e3H = -(al[..., None] * e3 + be[..., None] * e4) / Hn[..., None]
        # J = sign(al) (be e3 + al e4) is the future rotation of H in the
        # normal bundle; |al| > |be| everywhere, so sign(al) is global
        Jsign = np.sign(np.mean(al))
        if np.any(np.sign(al) != Jsign):
            i, j = np.argwhere(np.sign(al) != Jsign)[0]
            raise GaugeError(f"mean curvature direction flips at node ({i}, {j})")
        e4H = Jsign * (be[..., None] * e3 + al[..., None] * e4) / Hn[..., None]
        out = _frame_from_normals(mesh, e3H, e4H, gam_amb, gam_surf)
        out.gauge = "mean-curvature"
        out.H_norm = Hn
        return out
    if gauge == "cone":
        A = mesh.calc.gradient_matrix()
        b = np.concatenate([frame.zeta[..., 0].ravel(), frame.zeta[..., 1].ravel()])
        sol = lsmr(A, b, atol=1e-13, btol=1e-13, maxiter=20000)
        loga = sol[0].reshape(mesh.n_theta, mesh.n_phi)
        dloga = _grad_scalar(mesh.calc, loga)
        zeta_new = frame.zeta - dloga
        out = _rescale_frame(frame, np.exp(loga), zeta_new)
        out.cone_residual = float(np.max(np.abs(zeta_new)))
        out.log_scaling = loga
        return out
    raise ValueError("gauge must be one of: slice, mean-curvature, cone")


def mean_curvature_gauge_report(mesh, frame=None):
    """|H|, the gauge one-form alpha_H(V) = <D_V e_n^H, e_{n+1}^H>, and the
    residuals of alpha_H -+ d log |H| (both sign hypotheses)."""
    if frame is None or frame.gauge != "mean-curvature":
        frame = null_frame(mesh, gauge="mean-curvature")
    gam_amb = mesh.provider.christoffel(mesh.X)
    De3 = _ambient_dir_deriv(mesh, frame.e3, gam_amb)
    alpha = np.einsum("...mn,...am,...n->...a", mesh.g, De3, frame.e4)
    dlogH = _grad_scalar(mesh.calc, np.log(frame.H_norm))
    return {
        "H_norm": frame.H_norm,
        "alpha": alpha,
        "residual_minus": float(np.max(np.abs(alpha - dlogH))),
        "residual_plus": float(np.max(np.abs(alpha + dlogH))),
        "alpha_norm": float(np.max(np.abs(alpha))),
    }


# ---------------------------------------------------------------------------
# CSV node tables
# ---------------------------------------------------------------------------

def write_node_csv(mesh, path, fields=None):
    """Node table with columns theta_index, phi_index, t, r, Theta, Phi and
    any extra per-node fields."""
    table = mesh.polar_table()
    fields = fields or {}
    names = list(fields)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["theta_index", "phi_index", "t", "r", "Theta", "Phi"] + names)
        for i in range(mesh.n_theta):
            for j in range(mesh.n_phi):
                row = [i, j] + [f"{v:.17g}" for v in table[i, j]]
                row += [f"{np.asarray(fields[k])[i, j]:.17g}" for k in names]
                wr.writerow(row)


def immersion_from_csv(path):
    """Read a node table written in the documented layout back into a
    tabulated immersion (resolution inferred from the index columns)."""
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        want = ["theta_index", "phi_index", "t", "r", "Theta", "Phi"]
        if header[:6] != want:
            raise ValueError(f"CSV header must start with {want}")
        rows = [r for r in rd if r]
    idx = np.array([[int(r[0]), int(r[1])] for r in rows])
    vals = np.array([[float(v) for v in r[2:6]] for r in rows])
    n_theta = idx[:, 0].max() + 1
    n_phi = idx[:, 1].max() + 1
    if len(rows) != n_theta * n_phi:
        raise ValueError("CSV node table is not a complete grid")
    table = np.empty((n_theta, n_phi, 4))
    table[idx[:, 0], idx[:, 1]] = vals
    return TabulatedImmersion(n_theta, n_phi, table)
