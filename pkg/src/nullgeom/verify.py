"""Integral identities and inequalities for closed spacelike two-surfaces.

Each operation evaluates one integral identity (or inequality) on a
SurfaceMesh with an attached null frame, using the mesh quadrature, and
returns an :class:`IdentityReport`: the named integrals on each side, their
residual, a scale for relative comparison, and a deterministic verdict.
Inequality reports also carry an equality flag so rigidity statements can be
probed numerically.

Conventions follow the surface module: ``<L, Lbar> = -2``,
``chi_ab = <D_a L, d_b>``, ``zeta_a = (1/2)<D_a L, Lbar>``, and the mean
curvature vector satisfies ``<H, L> = -tr chi`` and ``<H, Lbar> = -tr chibar``
with traces taken against sigma.  All ambient curvature contractions use the
closed-form Riemann tensor of the spacetime provider; nothing here
differentiates the metric numerically.
"""

import numpy as np

from . import surface as sf
from .spacetime import form_divergence
from .symfunc import MixedCurvatureTable, elem_sym_excl


TORSION_TOL = 1e-8
_EPS = 1e-300


class PreconditionError(ValueError):
    """A nodewise hypothesis of an identity fails on the supplied surface."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = [] if nodes is None else [tuple(n) for n in nodes]


def default_tolerance(resolution):
    """Default relative tolerance for a report at the given grid resolution.

    Matches the measured discretization error of the frame builder on
    analytic families: 1e-5 at 64x128 and below, 1e-7 from 128x256 up.
    """
    return 1e-7 if resolution[0] >= 128 else 1e-5


class IdentityReport:
    """Outcome of evaluating one integral identity or inequality.

    ``residual`` is the sum of the left-side terms minus the sum of the
    right-side terms; for inequalities the right side is folded into the
    left so that ``residual`` is the slack (nonnegative when the inequality
    holds).  ``scale`` is the sum of the absolute term values and
    ``rel_residual = |residual| / max(scale, eps)``.  The verdict is a pure
    function of these numbers and the tolerance.
    """

    def __init__(self, identity, kind, lhs_terms, rhs_terms, tolerance,
                 resolution, surface, spacetime, warnings=(), extras=None,
                 applicable=True, scale=None):
        self.identity = identity
        self.kind = kind
        self.lhs_terms = dict(lhs_terms)
        self.rhs_terms = dict(rhs_terms)
        self.residual = (sum(self.lhs_terms.values())
                         - sum(self.rhs_terms.values()))
        if scale is None:
            scale = (sum(abs(v) for v in self.lhs_terms.values())
                     + sum(abs(v) for v in self.rhs_terms.values()))
        self.scale = scale
        self.rel_residual = abs(self.residual) / max(self.scale, _EPS)
        self.tolerance = tolerance
        self.resolution = tuple(resolution)
        self.surface = surface
        self.spacetime = spacetime
        self.warnings = list(warnings)
        self.extras = dict(extras or {})
        if not applicable:
            self.verdict = "not-applicable"
        elif kind == "inequality":
            slack_floor = -tolerance * max(self.scale, _EPS)
            self.verdict = "pass" if self.residual >= slack_floor else "fail"
            self.extras.setdefault(
                "equality", bool(abs(self.residual)
                                 <= tolerance * max(self.scale, _EPS)))
        else:
            self.verdict = "pass" if self.rel_residual <= tolerance else "fail"

    @property
    def value(self):
        """Alias for the residual; reads better for inequality reports."""
        return self.residual

    def as_dict(self):
        return {
            "identity": self.identity,
            "kind": self.kind,
            "lhs_terms": {k: float(v) for k, v in self.lhs_terms.items()},
            "rhs_terms": {k: float(v) for k, v in self.rhs_terms.items()},
            "residual": float(self.residual),
            "scale": float(self.scale),
            "rel_residual": float(self.rel_residual),
            "tolerance": float(self.tolerance),
            "verdict": self.verdict,
            "resolution": list(self.resolution),
            "surface": self.surface,
            "spacetime": self.spacetime,
            "warnings": list(self.warnings),
            "extras": {k: (float(v) if isinstance(v, (int, float, np.floating))
                           and not isinstance(v, bool) else v)
                       for k, v in self.extras.items()},
        }

    def __repr__(self):
        return (f"IdentityReport({self.identity!r}, {self.verdict}, "
                f"residual={self.residual:.3e}, rel={self.rel_residual:.3e})")


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _provenance(mesh):
    surface = type(mesh.immersion).__name__
    spacetime = getattr(mesh.provider, "name", type(mesh.provider).__name__)
    return surface, spacetime


def _torsion_warnings(frame):
    zmax = float(np.max(np.abs(frame.zeta)))
    if zmax > TORSION_TOL:
        return [f"torsion-free hypothesis violated: max |zeta| = {zmax:.3e}"], zmax
    return [], zmax

def _raise_nodewise(condition, what):
    """condition: boolean array, True where the hypothesis FAILS."""
    if np.any(condition):
        nodes = np.argwhere(condition)
        head = ", ".join(f"({i}, {j})" for i, j in nodes[:5])
        more = "" if len(nodes) <= 5 else f" and {len(nodes) - 5} more"
        raise PreconditionError(f"{what} at nodes {head}{more}", nodes=nodes)


def _in_slice(mesh):
    t = mesh.X[..., 0]
    return float(np.ptp(t)) <= 1e-9 * (1.0 + float(np.max(np.abs(t))))


def _sigma_norm(mesh, S):
    """Pointwise norm of a two-tensor with both indices lowered."""
    si = mesh.sigma_inv
    return np.sqrt(np.abs(
        np.einsum("...ac,...bd,...ab,...cd->...", si, si, S, S)))


def _curvature_radius(mesh):
    return float(np.sqrt(mesh.area / (4.0 * np.pi)))


# ---------------------------------------------------------------------------
# first Minkowski identity (k = 1)
# ---------------------------------------------------------------------------

def minkowski_k1(mesh, frame, tolerance=None):
    """First-order integral identity for an arbitrary null normal Lbar.

    Pairs the divergence xi of the conformal Killing-Yano two-form, the mean
    curvature vector and the torsion against Lbar:

        (n-1)/n int <xi, Lbar>  +  int Q(H, Lbar)
                                +  int zeta^a Q(d_a, Lbar)  =  0.

    Holds for any closed spacelike surface and any scaling of the null
    frame; in a static ambient with xi = -n d_t the first term becomes
    -(n-1) int <d_t, Lbar>.
    """
    provider = mesh.provider
    n = provider.n
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance

    xi_down, _ = form_divergence(provider, mesh.X)
    xi_lbar = np.einsum("...m,...m->...", xi_down, frame.Lbar)
    t1 = (n - 1.0) / n * mesh.integrate(xi_lbar)

    Q = provider.cky(mesh.X)
    t2 = mesh.integrate(np.einsum("...mn,...m,...n->...", Q, frame.H, frame.Lbar))

    zup = np.einsum("...ab,...b->...a", mesh.sigma_inv, frame.zeta)
    # Q(d_a, Lbar) = -Q(Lbar, d_a), already tabulated on the frame
    t3 = mesh.integrate(-np.einsum("...a,...a->...", zup, frame.Q_Lbar_a))

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        "minkowski-k1", "identity",
        {"xi pairing": t1, "mean curvature pairing": t2, "torsion pairing": t3},
        {}, tol, mesh.resolution, surface, spacetime,
        extras={"max_torsion": float(np.max(np.abs(frame.zeta)))})


# ---------------------------------------------------------------------------
# higher-order mixed identities (constant-curvature ambient)
# ---------------------------------------------------------------------------

_RS_VARIANTS = ("L-direct", "Lbar-direct", "L-cross", "Lbar-cross")


def minkowski_rs(mesh, frame, r, s, variant="L-direct", tolerance=None):
    """Mixed higher-order integral identities in a constant-curvature ambient.

    The four variants pair a mixed curvature integral P_{r,s} against either
    <L, d_t> or <Lbar, d_t>.  The "direct" pair keeps the (r, s) index on
    the position term; the "cross" pair shifts one index to the opposite
    slot:

        L-direct   :  2 int P_{r-1,s} <L, d_t>    + c int P_{r,s}     Q(L,Lbar) = 0
        Lbar-direct:  2 int P_{r,s-1} <Lbar, d_t> - c int P_{r,s}     Q(L,Lbar) = 0
        L-cross    :  2 int P_{r-1,s} <Lbar, d_t> - c int P_{r-1,s+1} Q(L,Lbar) = 0
        Lbar-cross :  2 int P_{r,s-1} <L, d_t>    + c int P_{r+1,s-1} Q(L,Lbar) = 0

    with c = (r+s)/(n-(r+s)).  Requires 1 <= r+s <= n-1 and a torsion-free
    frame; torsion above threshold is reported as a warning and the identity
    is evaluated anyway, so hypothesis necessity can be probed.
    """
    provider = mesh.provider
    n = provider.n
    if provider.curvature_constant is None:
        raise PreconditionError(
            f"constant-curvature ambient required, got {provider.name!r}")
    variant = str(variant)
    if variant not in _RS_VARIANTS:
        raise ValueError(f"variant must be one of {_RS_VARIANTS}")
    r, s = int(r), int(s)
    if not 1 <= r + s <= n - 1:
        raise ValueError(f"need 1 <= r+s <= {n - 1}, got ({r}, {s})")
    if variant in ("L-direct", "L-cross") and r < 1:
        raise ValueError(f"variant {variant} needs r >= 1")
    if variant in ("Lbar-direct", "Lbar-cross") and s < 1:
        raise ValueError(f"variant {variant} needs s >= 1")

    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance
    warnings, zmax = _torsion_warnings(frame)

    table = MixedCurvatureTable(mesh.sigma, frame.chi, frame.chibar)
    c = (r + s) / (n - (r + s))
    Q = frame.Q_L_Lbar
    if variant == "L-direct":
        t1 = 2.0 * mesh.integrate(table.P(r - 1, s) * frame.dt_L)
        t2 = c * mesh.integrate(table.P(r, s) * Q)
    elif variant == "Lbar-direct":
        t1 = 2.0 * mesh.integrate(table.P(r, s - 1) * frame.dt_Lbar)
        t2 = -c * mesh.integrate(table.P(r, s) * Q)
    elif variant == "L-cross":
        t1 = 2.0 * mesh.integrate(table.P(r - 1, s) * frame.dt_Lbar)
        t2 = -c * mesh.integrate(table.P(r - 1, s + 1) * Q)
    else:  # Lbar-cross
        t1 = 2.0 * mesh.integrate(table.P(r, s - 1) * frame.dt_L)
        t2 = c * mesh.integrate(table.P(r + 1, s - 1) * Q)

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        f"minkowski-rs-{variant}", "identity",
        {"time pairing": t1, "position pairing": t2}, {},
        tol, mesh.resolution, surface, spacetime, warnings=warnings,
        extras={"r": r, "s": s, "max_torsion": zmax})


def hypersurface_minkowski(mesh, frame, k, tolerance=None):
    """Classical Minkowski formula for a surface inside a static time slice.

    For a hypersurface of the slice with second fundamental form h (equal to
    chi of the slice-gauge null frame) the mixed identities collapse to

        (n-k) int f sigma_{k-1}(h)  =  k int sigma_k(h) <X, nu>

    where f is the static warp factor and <X, nu> = Q(L, Lbar)/2 is the
    support function of the conformal position field.  Returns the residual
    of the two sides.
    """
    provider = mesh.provider
    n = provider.n
    if not _in_slice(mesh):
        raise PreconditionError("surface is not contained in a time slice")
    k = int(k)
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= {n - 1}")
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance
    warnings, zmax = _torsion_warnings(frame)

    table = MixedCurvatureTable(mesh.sigma, frame.chi, frame.chibar)
    f = provider.warp(provider.radius(mesh.X))
    support = 0.5 * frame.Q_L_Lbar
    t1 = (n - k) * mesh.integrate(f * table.P(k - 1, 0))
    t2 = k * mesh.integrate(table.P(k, 0) * support)

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        "hypersurface-minkowski", "identity",
        {"warp pairing": t1}, {"support pairing": t2},
        tol, mesh.resolution, surface, spacetime, warnings=warnings,
        extras={"k": k, "max_torsion": zmax})


# ---------------------------------------------------------------------------
# Heintze-Karcher inequalities
# ---------------------------------------------------------------------------

def heintze_karcher(mesh, frame, direction="future-incoming", tolerance=None):
    """Null Heintze-Karcher inequality for a closed spacelike surface.

    future-incoming (requires <H, Lbar> > 0 at every node):

        -(n-1) int <d_t, Lbar> / <H, Lbar>  -  1/2 int Q(L, Lbar)  >=  0

    past-incoming (requires <H, L> < 0 at every node):

         (n-1) int <d_t, L> / <H, L>       -  1/2 int Q(L, Lbar)  >=  0

    The value is invariant under rescaling L -> aL, Lbar -> Lbar/a.  The
    equality flag detects surfaces lying in a shear-free null hypersurface
    (incoming for the future case, outgoing for the past case).
    """
    n = mesh.provider.n
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance
    if direction == "future-incoming":
        denom = frame.H_dot_Lbar
        _raise_nodewise(denom <= 0.0, "<H, Lbar> not positive")
        t1 = -(n - 1.0) * mesh.integrate(frame.dt_Lbar / denom)
    elif direction == "past-incoming":
        denom = frame.H_dot_L
        _raise_nodewise(denom >= 0.0, "<H, L> not negative")
        t1 = (n - 1.0) * mesh.integrate(frame.dt_L / denom)
    else:
        raise ValueError(
            "direction must be 'future-incoming' or 'past-incoming'")
    t2 = -0.5 * mesh.integrate(frame.Q_L_Lbar)

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        f"heintze-karcher-{direction}", "inequality",
        {"inverse mean curvature integral": t1, "position integral": t2}, {},
        tol, mesh.resolution, surface, spacetime,
        extras={"direction": direction})


def brendle_slice_hk(mesh, tolerance=None):
    """Warped-product Heintze-Karcher inequality for a surface in a t-slice.

    For a mean-convex surface inside a static time slice,

        (n-1) int f / H  >=  int <X, nu>,

    with H = tr chi the slice mean curvature, f the warp factor and
    <X, nu> = Q(L, Lbar)/2.  Equality holds exactly for umbilical surfaces,
    which the report flags through the sup norm of chi - (tr chi / 2) sigma.
    """
    if not _in_slice(mesh):
        raise PreconditionError("surface is not contained in a time slice")
    provider = mesh.provider
    n = provider.n
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance
    frame = sf.null_frame(mesh, gauge="slice")

    trchi = np.einsum("...ab,...ab->...", mesh.sigma_inv, frame.chi)
    _raise_nodewise(trchi <= 0.0, "slice mean curvature not positive")
    f = provider.warp(provider.radius(mesh.X))
    t1 = (n - 1.0) * mesh.integrate(f / trchi)
    t2 = -0.5 * mesh.integrate(frame.Q_L_Lbar)

    tracefree = frame.chi - 0.5 * trchi[..., None, None] * mesh.sigma
    umbilic_defect = float(np.max(_sigma_norm(mesh, tracefree)))
    umbilic_scale = float(np.max(_sigma_norm(mesh, frame.chi)))

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        "slice-heintze-karcher", "inequality",
        {"warp over mean curvature": t1, "support integral": t2}, {},
        tol, mesh.resolution, surface, spacetime,
        extras={"umbilic_defect": umbilic_defect,
                "umbilical": bool(umbilic_defect
                                  <= 1e-4 * max(umbilic_scale, _EPS))})


# ---------------------------------------------------------------------------
# mass identity and flux invariant (spherically symmetric black hole ambient)
# ---------------------------------------------------------------------------

def _require_schwarzschild(provider):
    if provider.name not in ("schwarzschild", "minkowski") or provider.n != 3:
        raise PreconditionError(
            f"needs the n = 3 black-hole ambient (or its massless limit), "
            f"got {provider.name!r} with n = {provider.n}")
    return float(provider.params.get("mass", 0.0))


def mass_identity(mesh, frame, tolerance=None):
    """Mass-weighted integral identity on surfaces in the black-hole ambient.

        2 int <H, L> <Lbar, d_t>  =  -16 pi m
            + int (R + 1/4 Rbar(L,Lbar,L,Lbar)) Q(L,Lbar)
            + int (1/2 Rbar(b,c,Lbar,L) - 2 (d zeta)_bc) Q^{bc}

    with R the intrinsic scalar curvature of the surface and all ambient
    curvature contractions taken against the closed-form Riemann tensor.
    On spheres of symmetry both sides equal 16 pi r0 - 32 pi m.
    """
    provider = mesh.provider
    m = _require_schwarzschild(provider)
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance

    lhs = 2.0 * mesh.integrate(frame.H_dot_L * frame.dt_Lbar)

    R4 = provider.riemann_closed(mesh.X)
    R_llll = np.einsum("...mnsr,...m,...n,...s,...r->...",
                       R4, frame.L, frame.Lbar, frame.L, frame.Lbar)
    R_ab = np.einsum("...mnsr,...bm,...cn,...s,...r->...bc",
                     R4, mesh.T, mesh.T, frame.Lbar, frame.L)
    Rsig = sf.scalar_curvature(mesh)
    t_scalar = mesh.integrate((Rsig + 0.25 * R_llll) * frame.Q_L_Lbar)

    dz = sf.exterior_deriv_oneform(mesh, frame.zeta)
    A = 0.5 * R_ab - 2.0 * dz
    si = mesh.sigma_inv
    t_twist = mesh.integrate(
        np.einsum("...bc,...bd,...ce,...de->...", A, si, si, frame.Q_ab))

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        "mass-identity", "identity",
        {"mean curvature flux": lhs},
        {"mass term": -16.0 * np.pi * m,
         "scalar curvature pairing": t_scalar,
         "twist pairing": t_twist},
        tol, mesh.resolution, surface, spacetime,
        extras={"mass": m})


def flux_invariant(mesh, frame):
    """int Q^{ab} Rbar_{ab Lbar L} dmu over the surface.

    A homology invariant of the black-hole ambient: every closed surface
    enclosing the horizon gives -32 pi m, independent of shape and frame.
    """
    provider = mesh.provider
    _require_schwarzschild(provider)
    R4 = provider.riemann_closed(mesh.X)
    Rmn = np.einsum("...mnsr,...s,...r->...mn", R4, frame.Lbar, frame.L)
    Q = provider.cky(mesh.X)
    gi = provider.metric_inverse(mesh.X)
    Qup = np.einsum("...am,...bn,...mn->...ab", gi, gi, Q)
    return float(mesh.integrate(np.einsum("...ab,...ab->...", Qup, Rmn)))


# ---------------------------------------------------------------------------
# divergence structure of the curvature gradient tensors
# ---------------------------------------------------------------------------

def _lowered_divergence(mesh, T_up, gam):
    """Covariant divergence div^a = nabla_b T^{ab} and its term-size scale."""
    T_low = np.einsum("...ac,...bd,...cd->...ab", mesh.sigma, mesh.sigma, T_up)
    nab = sf.covariant_deriv_twotensor(mesh, T_low, gam=gam)
    si = mesh.sigma_inv
    div = np.einsum("...ad,...be,...edb->...a", si, si, nab)
    absmag = np.einsum("...ad,...be,...edb->...a",
                       np.abs(si), np.abs(si), np.abs(nab))
    return div, absmag


def divergence_check(mesh, frame, r, s, tolerance=None):
    """Divergence of the mixed-curvature gradient tensors T_{r,s}.

    Constant-curvature ambient: both gradient tensors are divergence free
    for a torsion-free frame, so the report's terms are the sup sigma-norms
    of nabla_b T^{ab} and nabla_b Tbar^{ab}, which must vanish to
    discretization order.

    Black-hole ambient: for (r, 0) with r >= 2 the divergence is no longer
    zero but pairs against Q(L, d_a) in closed form,

        (nabla_b T^{ab}) Q(L, d_a)
            = n m (n-r) / rho^{n+2} * sum_a sigma_{r-2}(chi|a) (Q^2)_{La} Q_{La}

    evaluated in the principal frame of chi, with rho the Euclidean radius
    of the node.  The r = 2 case also has the frame-free form
    -1/2 n(n-2) m / rho^{n+2} Q(L,Lbar) sum_a Q_{La}^2,
    which the report carries as a cross-check.  (0, s) mirrors with chibar
    and Lbar.
    """
    provider = mesh.provider
    n = provider.n
    r, s = int(r), int(s)
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance
    warnings, zmax = _torsion_warnings(frame)
    table = MixedCurvatureTable(mesh.sigma, frame.chi, frame.chibar)
    gam = sf.surface_christoffel(mesh)
    surface, spacetime = _provenance(mesh)

    if provider.curvature_constant is not None:
        if not 1 <= r + s <= n - 1:
            raise ValueError(f"need 1 <= r+s <= {n - 1}, got ({r}, {s})")
        T_up, Tbar_up = table.gradients(r, s)
        rad = _curvature_radius(mesh)
        vals, scales = {}, 0.0
        for name, tensor in (("chi side", T_up), ("chibar side", Tbar_up)):
            div, absmag = _lowered_divergence(mesh, tensor, gam)
            norm = np.sqrt(np.abs(
                np.einsum("...ab,...a,...b->...", mesh.sigma, div, div)))
            vals[f"sup divergence ({name})"] = float(np.max(norm))
            scales = max(scales, float(np.max(_sigma_norm(
                mesh, np.einsum("...ac,...bd,...cd->...ab",
                                mesh.sigma, mesh.sigma, tensor)))) / rad)
        report = IdentityReport(
            f"divergence-free-{r}{s}", "identity", vals, {},
            tol, mesh.resolution, surface, spacetime, warnings=warnings,
            extras={"r": r, "s": s, "max_torsion": zmax})
        # the terms are sup norms, not signed integrals: rescale against the
        # size of the tensor field itself rather than against themselves
        report.scale = max(scales, _EPS)
        report.rel_residual = abs(report.residual) / report.scale
        report.verdict = "pass" if report.rel_residual <= tol else "fail"
        return report

    _require_schwarzschild(provider)
    if s == 0 and r >= 2:
        Q_n_a, k, side = frame.Q_L_a, r, "chi"
        T_up, _ = table.gradients(r, 0)
    elif r == 0 and s >= 2:
        Q_n_a, k, side = frame.Q_Lbar_a, s, "chibar"
        _, T_up = table.gradients(0, s)
    else:
        raise ValueError(
            "closed-form divergence needs (r, 0) with r >= 2 or (0, s) "
            f"with s >= 2, got ({r}, {s})")
    if k > n - 1:
        raise ValueError(f"bidegree ({r}, {s}) invalid for n = {n}")

    div, absmag = _lowered_divergence(mesh, T_up, gam)
    numeric = np.einsum("...a,...a->...", div, Q_n_a)
    closed, _gate = _pairing_density(mesh, frame, k, side)

    extras = {"r": r, "s": s, "max_torsion": zmax,
              "node_residual": float(np.max(np.abs(numeric - closed))),
              "node_scale": float(np.max(np.abs(numeric))
                                  + np.max(np.abs(closed))
                                  + np.max(absmag * np.abs(Q_n_a)).item())}
    if k == 2:
        m = provider.params.get("mass", 0.0)
        rho = provider.radius(mesh.X)
        qll = frame.Q_L_Lbar if s == 0 else -frame.Q_L_Lbar
        qq = np.einsum("...ab,...a,...b->...", mesh.sigma_inv, Q_n_a, Q_n_a)
        shortcut = -0.5 * n * (n - 2) * m / rho ** (n + 2) * qll * qq
        extras["shortcut_defect"] = float(np.max(np.abs(closed - shortcut)))

    report = IdentityReport(
        f"divergence-closed-{r}{s}", "identity",
        {"numeric pairing": float(mesh.integrate(numeric))},
        {"closed form": float(mesh.integrate(closed))},
        tol, mesh.resolution, surface, spacetime, warnings=warnings,
        extras=extras)
    # on spheres of symmetry both sides vanish identically; compare against
    # the structural size of the pairing so the verdict stays meaningful
    T_low = np.einsum("...ac,...bd,...cd->...ab", mesh.sigma, mesh.sigma, T_up)
    floor = (mesh.area * float(np.max(_sigma_norm(mesh, T_low)))
             / _curvature_radius(mesh)
             * float(np.max(np.abs(provider.cky(mesh.X)))))
    report.scale = max(report.scale, floor)
    report.rel_residual = abs(report.residual) / max(report.scale, _EPS)
    report.verdict = "pass" if report.rel_residual <= tol else "fail"
    extras["node_scale"] = max(extras["node_scale"], floor / max(mesh.area, 1.0))
    return report


def _principal_frame(mesh, second):
    """Eigenvalues of sigma^{-1} S and the corresponding orthonormal tangent
    vectors, as ambient vectors E[..., i, mu]."""
    w, V = np.linalg.eigh(mesh.sigma)
    root_inv = np.einsum("...ak,...k,...bk->...ab", V, 1.0 / np.sqrt(w), V)
    A = np.einsum("...ac,...cd,...db->...ab", root_inv, second, root_inv)
    lam, U = np.linalg.eigh(0.5 * (A + np.swapaxes(A, -1, -2)))
    basis = np.einsum("...ab,...bi->...ai", root_inv, U)   # coords of E_i
    E = np.einsum("...ai,...am->...im", basis, mesh.T)
    return lam, E


def _pairing_density(mesh, frame, k, side):
    """Closed-form divergence pairing density for T_{k,0} (side "chi") or
    T_{0,k} (side "chibar") in the black-hole ambient, together with a sign
    record: the density must be non-positive for the corresponding integral
    inequality to point the stated way.
    """
    provider = mesh.provider
    n = provider.n
    m = provider.params.get("mass", 0.0)
    if side == "chi":
        null, second = frame.L, frame.chi
    else:
        null, second = frame.Lbar, frame.chibar
    lam, E = _principal_frame(mesh, second)
    Q = provider.cky(mesh.X)
    Q2 = provider.cky_squared(mesh.X)
    Qn_i = np.einsum("...mn,...m,...in->...i", Q, null, E)
    Q2n_i = np.einsum("...mn,...m,...in->...i", Q2, null, E)
    rho = provider.radius(mesh.X)
    pref = n * m * (n - k) / rho ** (n + 2)
    excl = np.stack([elem_sym_excl(lam, k - 2, i)
                     for i in range(n - 1)], axis=-1)
    dens = pref * np.einsum("...i,...i,...i->...", excl, Q2n_i, Qn_i)
    # tolerance anchored to the ambient field magnitudes so nodes where the
    # pairing degenerates to roundoff (spheres of symmetry) still pass
    tiny = 1e-10 * (float(np.max(pref))
                    * float(np.max(np.abs(Q2))) * float(np.max(np.abs(Q)))
                    * max(float(np.max(np.abs(excl))), 1.0) + _EPS)
    bad = dens > tiny
    record = {"ok": bool(not np.any(bad)),
              "bad_nodes": int(np.count_nonzero(bad)),
              "max_density": float(np.max(dens))}
    return dens, record


# ---------------------------------------------------------------------------
# black-hole ambient inequalities
# ---------------------------------------------------------------------------

def _eigenvalues(mesh, second):
    w, V = np.linalg.eigh(mesh.sigma)
    root_inv = np.einsum("...ak,...k,...bk->...ab", V, 1.0 / np.sqrt(w), V)
    A = np.einsum("...ac,...cd,...db->...ab", root_inv, second, root_inv)
    return np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2)))


def check_hypotheses(mesh, frame):
    """Nodewise hypothesis record for the black-hole ambient inequalities.

    Returns a dict with three entries:

      ``star_shaped``     Q(L, Lbar) >= 0 everywhere;
      ``chi_convex``      chi positive definite and (Q^2)(L, v) Q(L, v) <= 0
                          on a tangent basis;
      ``chibar_concave``  -chibar positive definite and
                          (Q^2)(Lbar, v) Q(Lbar, v) >= 0 on a tangent basis.

    Each entry holds a bool and the number of offending nodes.
    """
    provider = mesh.provider
    Q2 = provider.cky_squared(mesh.X)
    tiny = 1e-10 * max(float(np.max(np.abs(frame.Q_L_Lbar))), 1.0)

    rec = {}
    bad = frame.Q_L_Lbar < -tiny
    rec["star_shaped"] = {"ok": bool(not np.any(bad)),
                          "bad_nodes": int(np.count_nonzero(bad))}

    q2_L_a = np.einsum("...mn,...m,...an->...a", Q2, frame.L, mesh.T)
    prod = q2_L_a * frame.Q_L_a
    lam = _eigenvalues(mesh, frame.chi)
    bad = (lam[..., 0] <= 0.0) | np.any(prod > tiny, axis=-1)
    rec["chi_convex"] = {"ok": bool(not np.any(bad)),
                         "bad_nodes": int(np.count_nonzero(bad))}

    q2_Lb_a = np.einsum("...mn,...m,...an->...a", Q2, frame.Lbar, mesh.T)
    prodb = q2_Lb_a * frame.Q_Lbar_a
    lamb = _eigenvalues(mesh, -frame.chibar)
    bad = (lamb[..., 0] <= 0.0) | np.any(prodb < -tiny, axis=-1)
    rec["chibar_concave"] = {"ok": bool(not np.any(bad)),
                             "bad_nodes": int(np.count_nonzero(bad))}
    return rec


def schwarzschild_inequalities(mesh, frame, k, mode="chi", tolerance=None):
    """Higher-order Minkowski-type inequalities in the black-hole ambient.

    mode "chi" (k copies of the outgoing second form):

        int P_{k-1,0} <L, d_t>  +  k/(2(n-k)) int P_{k,0} Q(L,Lbar)  >=  0

    mode "chibar" (k copies of the incoming one):

        int P_{0,k-1} <Lbar, d_t>  -  k/(2(n-k)) int P_{0,k} Q(L,Lbar) >= 0

    Either combination equals minus the integral of the closed-form
    divergence pairing of the matching gradient tensor, so the stated
    direction holds exactly when that pairing density is non-positive.  The
    density sign is checked nodewise (order 1 is an identity and always
    applies), and the verdict is downgraded to "not-applicable" when it
    points the wrong way; the value is still reported.  The convexity
    record from ``check_hypotheses`` is attached for reference.  Note the
    two sides are not symmetric: the pairing picks up a sign from the
    antisymmetry of the two-form, so on strictly star-shaped surfaces the
    chi-side density is non-positive but the chibar-side density is
    non-negative, and the chibar mode is typically only controlled at
    equality (spheres of symmetry, or a massless ambient).
    """
    provider = mesh.provider
    n = provider.n
    _require_schwarzschild(provider)
    mode = str(mode).strip()
    if mode not in ("chi", "chibar"):
        raise ValueError("mode must be 'chi' or 'chibar'")
    k = int(k)
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= order <= {n - 1}")
    tol = default_tolerance(mesh.resolution) if tolerance is None else tolerance
    warnings, zmax = _torsion_warnings(frame)

    hyp = check_hypotheses(mesh, frame)
    side = mode
    if mode == "chi":
        printed = hyp["star_shaped"]["ok"] or hyp["chi_convex"]["ok"]
    else:
        printed = hyp["star_shaped"]["ok"] or hyp["chibar_concave"]["ok"]
    if k >= 2:
        _, gate = _pairing_density(mesh, frame, k, side)
    else:
        gate = {"ok": True, "bad_nodes": 0, "max_density": 0.0}
    applicable = gate["ok"]
    if not printed:
        warnings = warnings + ["no convexity hypothesis holds"]
    if printed and not gate["ok"]:
        warnings = warnings + [
            f"divergence pairing is positive on {gate['bad_nodes']} nodes; "
            "the inequality direction is not controlled on this surface"]

    table = MixedCurvatureTable(mesh.sigma, frame.chi, frame.chibar)
    Q = frame.Q_L_Lbar
    if mode == "chi":
        t1 = mesh.integrate(table.P(k - 1, 0) * frame.dt_L)
        t2 = k / (2.0 * (n - k)) * mesh.integrate(table.P(k, 0) * Q)
    else:
        t1 = mesh.integrate(table.P(0, k - 1) * frame.dt_Lbar)
        t2 = -k / (2.0 * (n - k)) * mesh.integrate(table.P(0, k) * Q)

    surface, spacetime = _provenance(mesh)
    return IdentityReport(
        f"bh-minkowski-{mode}", "inequality",
        {"time pairing": t1, "position pairing": t2}, {},
        tol, mesh.resolution, surface, spacetime, warnings=warnings,
        extras={"order": k, "mode": mode, "max_torsion": zmax,
                "hypotheses": hyp, "pairing_gate": gate},
        applicable=applicable)
