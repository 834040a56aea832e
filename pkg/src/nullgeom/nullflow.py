"""Affine null flow of a closed spacelike surface and a monotone functional.

Every node of the surface is pushed along the affinely parametrized null
geodesic starting at the future-incoming null normal Lbar, so the extension
satisfies D_Lbar Lbar = 0 and the rotation term of the focusing equation
vanishes identically.  After each step the mesh and its null frame are
rebuilt from the moved nodes; only the velocity field is transported, and
the surface's own frame is used for everything that is invariant under
rescaling the rays.  The functional

    F  =  (n-1)/n int <xi, Lbar> / <H, Lbar> dmu  -  1/2 int Q(L, Lbar) dmu

with xi = -n d_t the divergence of the two-form, depends only on the
surface and the ray class of Lbar.  It vanishes on spheres of symmetry and
is non-increasing along the flow in any vacuum or constant-curvature
ambient.  The flow is run with unit speed along the transported velocity
(the affine normalization); monotonicity does not depend on that choice,
but the endpoint of the flow does, so no attempt is made to land on a
particular slice.
"""

import csv

import numpy as np

from . import surface as sf
from .verify import PreconditionError


CAUSTIC_FRACTION = 1e-3
NULL_CONSTRAINT_TOL = 1e-10


def f_functional(mesh, frame):
    """Value of F on one surface.  Requires <H, Lbar> > 0 at every node.

    Invariant under L -> aL, Lbar -> Lbar/a: both the ratio in the first
    integral and Q(L, Lbar) are unchanged.
    """
    n = mesh.provider.n
    denom = frame.H_dot_Lbar
    if np.any(denom <= 0.0):
        nodes = np.argwhere(denom <= 0.0)
        head = ", ".join(f"({i}, {j})" for i, j in nodes[:5])
        raise PreconditionError(
            f"<H, Lbar> not positive at nodes {head}"
            + ("" if len(nodes) <= 5 else f" and {len(nodes) - 5} more"),
            nodes=nodes)
    xi_lbar = -n * frame.dt_Lbar
    t1 = (n - 1.0) / n * mesh.integrate(xi_lbar / denom)
    t2 = -0.5 * mesh.integrate(frame.Q_L_Lbar)
    return float(t1 + t2)


class FlowState:
    """Snapshot of the flow at one value of the affine parameter.

    Carries the rebuilt mesh and frame, the transported velocity field
    (node velocities of the null geodesics), the per-node scale relating
    the velocity to the rebuilt frame's Lbar, and the integrals entering F.
    """

    def __init__(self, step, s, mesh, frame, velocity, scale,
                 constraint_defect=0.0, alignment_defect=0.0):
        self.step = step
        self.s = float(s)
        self.mesh = mesh
        self.frame = frame
        self.velocity = velocity
        self.scale = scale
        self.constraint_defect = float(constraint_defect)
        self.alignment_defect = float(alignment_defect)

        n = mesh.provider.n
        denom = frame.H_dot_Lbar
        self.min_H_dot_Lbar = float(np.min(denom))
        xi_lbar = -n * frame.dt_Lbar
        self.int_ratio = float(mesh.integrate(xi_lbar / denom)) \
            if self.min_H_dot_Lbar > 0.0 else np.nan
        self.int_Q = float(mesh.integrate(frame.Q_L_Lbar))
        self.F = ((n - 1.0) / n * self.int_ratio - 0.5 * self.int_Q
                  if self.min_H_dot_Lbar > 0.0 else np.nan)
        # int <xi, V> with the transported velocity; the rate identities are
        # stated for the affine scaling, not the rebuilt frame's
        self.int_xi_V = float(mesh.integrate(-n * scale * frame.dt_Lbar))
        self.area = float(mesh.area)

    def __repr__(self):
        return (f"FlowState(step={self.step}, s={self.s:.4f}, "
                f"F={self.F:.6e}, min<H,Lbar>={self.min_H_dot_Lbar:.4f})")


class FlowTrace(list):
    """Sequence of FlowState with a termination reason and a CSV emitter."""

    termination = "completed"

    def csv_rows(self):
        rows = [("s", "F", "min_H_dot_Lbar", "area")]
        rows += [(st.s, st.F, st.min_H_dot_Lbar, st.area) for st in self]
        return rows

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.csv_rows())


def initial_state(mesh, frame=None):
    """Wrap a surface as the starting state; velocity = the frame's Lbar.

    With no explicit frame the surface is first re-sampled through its
    polar table, so that every state of the trace -- including this one --
    uses the same discrete representation.  Mixing the immersion's analytic
    tangents with finite-difference second derivatives leaves a small
    systematic bias in integrated quantities that the consistent chain
    cancels (on a round sphere the F floor drops by three orders of
    magnitude).  Pass a frame to flow the mesh exactly as given, e.g. for
    a cone-gauge start.
    """
    if frame is None:
        mesh = _rebuild_mesh(mesh, mesh.X)
        frame = sf.null_frame(mesh, gauge="slice")
    state = FlowState(0, 0.0, mesh, frame, np.array(frame.Lbar),
                      np.ones(frame.Lbar.shape[:-1]))
    if state.min_H_dot_Lbar <= 0.0:
        raise PreconditionError(
            f"<H, Lbar> not positive (min {state.min_H_dot_Lbar:.3e})")
    return state


def _geodesic_rk4(provider, X, V, ds):
    def acc(x, v):
        gam = provider.christoffel(x)
        return -np.einsum("...abc,...b,...c->...a", gam, v, v)

    k1x, k1v = V, acc(X, V)
    k2x, k2v = V + 0.5 * ds * k1v, acc(X + 0.5 * ds * k1x, V + 0.5 * ds * k1v)
    k3x, k3v = V + 0.5 * ds * k2v, acc(X + 0.5 * ds * k2x, V + 0.5 * ds * k2v)
    k4x, k4v = V + ds * k3v, acc(X + ds * k3x, V + ds * k3v)
    Xn = X + ds / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    Vn = V + ds / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return Xn, Vn


def _null_project(provider, X, V):
    """Return V + lam d_t with <V', V'> = 0, choosing the small root."""
    g = provider.metric(X)
    vv = np.einsum("...mn,...m,...n->...", g, V, V)
    vt = np.einsum("...mn,...m,...n->...", g, V,
                   np.broadcast_to(np.eye(g.shape[-1])[0], V.shape))
    gtt = g[..., 0, 0]
    # gtt lam^2 + 2 vt lam + vv = 0; stable small root
    disc = np.sqrt(np.maximum(vt ** 2 - gtt * vv, 0.0))
    lam = -vv / (vt + np.sign(vt) * disc)
    out = np.array(V)
    out[..., 0] += lam
    return out, float(np.max(np.abs(vv)))


def _rebuild_mesh(mesh, Xn):
    """New SurfaceMesh through the moved nodes, same parameter grid."""
    p = Xn[..., 1:]
    rho = np.linalg.norm(p, axis=-1)
    TH = np.arccos(np.clip(p[..., 2] / rho, -1.0, 1.0))
    PH = np.arctan2(p[..., 1], p[..., 0])
    PH0 = np.ones(mesh.n_theta)[:, None] * mesh.phi[None, :]
    PH = PH + 2.0 * np.pi * np.round((PH0 - PH) / (2.0 * np.pi))
    table = np.stack([Xn[..., 0], rho, TH, PH], axis=-1)
    imm = sf.TabulatedImmersion(mesh.n_theta, mesh.n_phi, table)
    return sf.build_surface(mesh.provider, imm, mesh.resolution)


def evolve(state, ds=None, n_steps=20):
    """Flow n_steps of size ds; returns the trace including the start state.

    Each step integrates the node geodesics with one fourth-order
    Runge-Kutta update of (position, velocity), projects the velocity back
    onto the null cone along d_t, rebuilds the mesh and frame, and records
    the integrals.  Stops early with termination "caustic-guard" when
    min <H, Lbar> falls under CAUSTIC_FRACTION times its starting value
    (or changes sign); a node leaving the provider domain raises the
    provider's domain error.
    """
    provider = state.mesh.provider
    if ds is None:
        ds = 0.01 * float(np.min(provider.radius(state.mesh.X)))
    guard = CAUSTIC_FRACTION * state.min_H_dot_Lbar

    trace = FlowTrace([state])
    X = np.array(state.mesh.X)
    V = np.array(state.velocity)
    for step in range(1, int(n_steps) + 1):
        X, V = _geodesic_rk4(provider, X, V, ds)
        provider.check_domain(X)
        V, _pre = _null_project(provider, X, V)
        mesh = _rebuild_mesh(state.mesh, X)
        frame = sf.null_frame(mesh, gauge="slice")
        g = mesh.g
        scale = -0.5 * np.einsum("...mn,...m,...n->...", g, V, frame.L)
        align = float(np.max(np.linalg.norm(
            V - scale[..., None] * frame.Lbar, axis=-1)))
        vv = np.einsum("...mn,...m,...n->...", g, V, V)
        new = FlowState(step, state.s + step * ds, mesh, frame, V, scale,
                        constraint_defect=float(np.max(np.abs(vv))),
                        alignment_defect=align)
        trace.append(new)
        if (new.min_H_dot_Lbar <= 0.0) or (new.min_H_dot_Lbar < guard):
            trace.termination = "caustic-guard"
            break
    return trace


def _interior_rate(series, ds):
    """Fourth-order centered d/ds of a sampled series; valid at index
    2..len-3."""
    f = np.asarray(series)
    return (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * ds)


def raychaudhuri_residual(trace, ds=None):
    """Nodewise focusing-equation residual along the trace.

        d/ds <H, V>  =  |chibar_V|^2  +  Ric(V, V)

    with V the transported velocity (so the rotation term is absent by
    construction) and chibar_V the velocity-scaled second form.  The rate
    is estimated with the fourth-order stencil, so the residual decays
    like ds^4 down to the grid floor of the frame builder.  Returns the
    sup residual over interior steps, with the size of the shear term as
    the scale.
    """
    if len(trace) < 5:
        raise ValueError("need at least five states for the rate stencil")
    if ds is None:
        ds = trace[1].s - trace[0].s
    h_dot_V = np.stack([st.scale * st.frame.H_dot_Lbar for st in trace])
    rate = _interior_rate(h_dot_V, ds)

    rhs = []
    for st in trace[2:len(trace) - 2]:
        mesh, frame = st.mesh, st.frame
        si = mesh.sigma_inv
        shear2 = np.einsum("...ac,...bd,...ab,...cd->...",
                           si, si, frame.chibar, frame.chibar)
        ric = mesh.provider.ricci(mesh.X)
        ric_VV = np.einsum("...nr,...n,...r->...",
                           ric, st.velocity, st.velocity)
        rhs.append(st.scale ** 2 * shear2 + ric_VV)
    rhs = np.stack(rhs)
    residual = rate - rhs
    return {"residual": float(np.max(np.abs(residual))),
            "scale": float(np.max(np.abs(rhs)))}


def evolution_identity_residuals(trace, ds=None):
    """Rates of the two integrals making up F, checked independently.

    The area-form pairing evolves exactly:

        d/ds int Q(L, Lbar) dmu  =  -2 int <xi, V> dmu,

    while the ratio integral is one-sidedly controlled:

        d/ds int <xi, Lbar>/<H, Lbar> dmu  <=  -n/(n-1) int <xi, V> dmu.

    Returns the worst absolute residual of the first (relative to its
    scale) and the worst slack violation of the second (negative means the
    bound failed by that amount), both over interior steps.
    """
    if len(trace) < 5:
        raise ValueError("need at least five states for the rate stencil")
    if ds is None:
        ds = trace[1].s - trace[0].s
    n = trace[0].mesh.provider.n
    q_rate = _interior_rate([st.int_Q for st in trace], ds)
    ratio_rate = _interior_rate([st.int_ratio for st in trace], ds)
    xi_V = np.array([st.int_xi_V for st in trace[2:len(trace) - 2]])

    q_residual = q_rate - (-2.0 * xi_V)
    q_scale = np.max(np.abs(q_rate)) + 2.0 * np.max(np.abs(xi_V))
    bound = -n / (n - 1.0) * xi_V
    slack = bound - ratio_rate           # >= 0 when the inequality holds
    return {"q_rate_residual": float(np.max(np.abs(q_residual))),
            "q_rate_scale": float(q_scale),
            "ratio_rate_slack": float(np.min(slack)),
            "ratio_rate_scale": float(np.max(np.abs(bound)))}
