"""Configuration-driven runner for the identity and flow suites.

A run configuration is a YAML file holding one or more scenarios; each
scenario picks a spacetime, a surface family, a frame gauge, a list of
grid resolutions and a list of identities, and is executed independently
(scenarios run concurrently, capped by the NULLGEOM_THREADS environment
variable).  Every scenario writes its own directory with a report.json
(array of identity reports, schema_version 1, each stamped with the
sha256 hash of the scenario block), one CSV per identity with the
residuals per resolution, flow traces for the null-flow identity, and
native SVG plots.  ``convergence`` additionally fits the decay order of
each identity's relative residual against the theta resolution.

Exit codes: 0 all verdicts pass, 2 some identity failed its tolerance
(or a fitted order missed its declared order by more than 0.5), 1 on
usage or configuration errors.
"""

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import re
import sys
from importlib import resources

import jsonschema
import numpy as np
import yaml

from . import nullflow as nfl
from . import spacetime as st
from . import surface as sf
from . import verify as vf
from .verify import PreconditionError

SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _bundled():
    return resources.files("nullgeom") / "scenarios"


def load_schema():
    with (_bundled() / "config_schema.json").open() as fh:
        return json.load(fh)


def resolve_config_path(arg):
    """A filesystem path, or the stem of a bundled scenario file."""
    if os.path.exists(arg):
        return arg
    cand = _bundled() / f"{arg}.yaml"
    if cand.is_file():
        return cand
    raise ConfigError(f"no such config file or bundled scenario: {arg!r}")


def load_config(path):
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}")
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config rejected at {where}: {e.message}")
    for scn in cfg["scenarios"]:
        for entry in scn["identities"]:
            name = entry if isinstance(entry, str) else entry["name"]
            if name not in IDENTITIES:
                raise ConfigError(
                    f"unknown identity {name!r}; known: "
                    + ", ".join(sorted(IDENTITIES)))
    names = [s["name"] for s in cfg["scenarios"]]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique")
    return cfg


def scenario_hash(scn):
    blob = json.dumps(scn, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_provider(block):
    fam = block["family"]
    n = int(block.get("n", 3))
    if fam == "minkowski":
        return st.StaticSpacetime.minkowski(n=n)
    if fam == "desitter":
        return st.StaticSpacetime.desitter(kappa=float(block.get("kappa", 0.1)), n=n)
    if fam == "anti-desitter":
        return st.StaticSpacetime.antidesitter(
            kappa=float(block.get("kappa", -0.1)), n=n)
    if fam == "schwarzschild":
        return st.StaticSpacetime.schwarzschild(
            mass=float(block.get("mass", 1.0)), n=n)
    if "f2" not in block:
        raise ConfigError("custom-f spacetime needs an f2 expression")
    return _custom_provider(block, n)


def _custom_provider(block, n):
    import sympy
    r = sympy.symbols("r", positive=True)
    try:
        expr = sympy.sympify(block["f2"], locals={"r": r})
    except (sympy.SympifyError, TypeError, SyntaxError) as e:
        raise ConfigError(f"cannot parse f2 expression: {e}")
    extra = expr.free_symbols - {r}
    if extra:
        raise ConfigError("f2 may only use the symbol r, got "
                          + ", ".join(sorted(map(str, extra))))
    lams = [sympy.lambdify(r, sympy.diff(expr, r, k), "numpy")
            for k in range(3)]

    def vectorized(fn):
        return lambda rr: (np.ones_like(np.asarray(rr, dtype=float))
                           * fn(np.asarray(rr, dtype=float)))

    kw = {k: float(block[k]) for k in ("r_min", "r_max") if k in block}
    return st.StaticSpacetime.custom(*map(vectorized, lams), n=n,
                                     params={"f2": block["f2"]}, **kw)


def build_surface_mesh(provider, block, res, seed):
    fam = block["family"]
    if fam == "csv":
        if "csv" not in block:
            raise ConfigError("surface family 'csv' needs a csv path")
        try:
            table = np.loadtxt(block["csv"], delimiter=",")
        except OSError as e:
            raise ConfigError(f"cannot read surface csv: {e}")
        if table.shape != (res[0] * res[1], 4):
            raise ConfigError(
                f"surface csv has shape {table.shape}, expected "
                f"({res[0] * res[1]}, 4) rows of t, rho, Theta, Phi for "
                f"resolution {res[0]}x{res[1]}")
        imm = sf.TabulatedImmersion(res[0], res[1],
                                    table.reshape(res[0], res[1], 4))
    elif fam == "random-graph":
        pars = dict(block.get("params", {}))
        rng = np.random.default_rng(seed)
        modes = int(pars.get("modes", 4))
        eps = float(pars.get("eps", 0.1))
        harmonics = []
        for _ in range(modes):
            l = int(rng.integers(2, 5))
            m = int(rng.integers(0, l + 1))
            harmonics.append((l, m, eps / modes * float(rng.uniform(0.3, 1.0))))
        imm = sf.family_catalog("slice-graph", {
            "t0": float(pars.get("t0", 0.0)),
            "r0": float(pars.get("r0", 8.0)),
            "harmonics": harmonics})
    else:
        imm = sf.family_catalog(fam, dict(block.get("params", {})))
    return sf.build_surface(provider, imm, tuple(res))


# ---------------------------------------------------------------------------
# identity registry
# ---------------------------------------------------------------------------

def _run_k1(mesh, frame, params, tol):
    return vf.minkowski_k1(mesh, frame, tolerance=tol), {}


def _run_rs(mesh, frame, params, tol):
    return vf.minkowski_rs(mesh, frame, int(params.get("r", 1)),
                           int(params.get("s", 1)),
                           variant=str(params.get("variant", "L-direct")),
                           tolerance=tol), {}


def _run_hypersurface(mesh, frame, params, tol):
    return vf.hypersurface_minkowski(mesh, frame, int(params.get("k", 1)),
                                     tolerance=tol), {}


def _run_hk(mesh, frame, params, tol):
    return vf.heintze_karcher(
        mesh, frame, direction=str(params.get("direction", "future-incoming")),
        tolerance=tol), {}


def _run_brendle(mesh, frame, params, tol):
    return vf.brendle_slice_hk(mesh, tolerance=tol), {}


def _run_mass_identity(mesh, frame, params, tol):
    return vf.mass_identity(mesh, frame, tolerance=tol), {}


def _run_flux(mesh, frame, params, tol):
    value = vf.flux_invariant(mesh, frame)
    m = mesh.provider.params["mass"]
    surface, spacetime = vf._provenance(mesh)
    rep = vf.IdentityReport(
        "mass-flux", "identity",
        {"flux integral": value}, {"mass charge": -32.0 * math.pi * m},
        tol, mesh.resolution, surface, spacetime)
    return rep, {}


def _run_divergence(mesh, frame, params, tol):
    return vf.divergence_check(mesh, frame, int(params.get("r", 2)),
                               int(params.get("s", 0)), tolerance=tol), {}


def _run_bh_minkowski(mesh, frame, params, tol):
    return vf.schwarzschild_inequalities(
        mesh, frame, int(params.get("k", 2)),
        mode=str(params.get("mode", "chi")), tolerance=tol), {}


def _run_null_flow(mesh, frame, params, tol):
    steps = int(params.get("steps", 20))
    ds = params.get("ds")
    state = nfl.initial_state(mesh)
    trace = nfl.evolve(state, ds=None if ds is None else float(ds),
                       n_steps=steps)
    Fs = np.array([s.F for s in trace])
    drops = -np.diff(Fs)
    n = mesh.provider.n
    # the monotonicity floor is relative to the size of the terms making up
    # F, not to F itself (which cancels to zero on round spheres)
    f_scale = float(max((n - 1.0) / n * abs(s.int_ratio) + 0.5 * abs(s.int_Q)
                        for s in trace))
    surface, spacetime = vf._provenance(mesh)
    rep = vf.IdentityReport(
        "null-flow-monotonicity", "inequality",
        {"smallest step decrease of F": float(np.min(drops))}, {},
        tol, mesh.resolution, surface, spacetime, scale=f_scale,
        extras={"F_initial": float(Fs[0]), "F_final": float(Fs[-1]),
                "steps_taken": len(trace) - 1,
                "termination": trace.termination,
                "min_H_dot_Lbar": float(trace[-1].min_H_dot_Lbar)})
    rows = ["s,F,min_H_dot_Lbar,area"]
    rows += [f"{s.s!r},{s.F!r},{s.min_H_dot_Lbar!r},{s.area!r}" for s in trace]
    files = {f"null-flow-trace-{mesh.n_theta}x{mesh.n_phi}.csv":
             "\n".join(rows) + "\n"}
    rep.flow_series = ([s.s for s in trace], [s.F for s in trace])
    return rep, files


def _run_quadrature(mesh, frame, params, tol):
    # exactness probe on the unit sphere: int exp(a sin(theta) cos(phi)) dA
    # over S^2 equals 4 pi sinh(a)/a; the rule is spectral in both angles,
    # so the residual decays faster than any power of the resolution until
    # the rounding floor.  Larger a pushes the spectrum out and makes the
    # decay visible on coarse-to-fine ladders.
    a = float(params.get("amplitude", 1.0))
    res = mesh.resolution
    unit = sf.build_surface(st.StaticSpacetime.minkowski(n=3),
                            sf.family_catalog("sphere", {"t0": 0.0, "r0": 1.0}),
                            res)
    TH = unit.theta[:, None] * np.ones(res[1])[None, :]
    PH = np.ones(res[0])[:, None] * unit.phi[None, :]
    value = float(unit.integrate(np.exp(a * np.sin(TH) * np.cos(PH))))
    exact = 4.0 * math.pi * (math.sinh(a) / a if a else 1.0)
    rep = vf.IdentityReport(
        "quadrature-exactness", "identity",
        {"numeric integral": value}, {"closed form": exact},
        tol, res, "sphere", "minkowski")
    return rep, {}


IDENTITIES = {
    "minkowski-k1": _run_k1,
    "minkowski-rs": _run_rs,
    "hypersurface": _run_hypersurface,
    "heintze-karcher": _run_hk,
    "slice-heintze-karcher": _run_brendle,
    "mass-identity": _run_mass_identity,
    "mass-flux": _run_flux,
    "divergence": _run_divergence,
    "bh-minkowski": _run_bh_minkowski,
    "null-flow": _run_null_flow,
    "quadrature": _run_quadrature,
}


class _Entry:
    __slots__ = ("name", "params", "tolerance", "declared", "slug")

    def __init__(self, raw):
        if isinstance(raw, str):
            raw = {"name": raw}
        self.name = raw["name"]
        self.params = dict(raw.get("params", {}))
        self.tolerance = raw.get("tolerance")
        self.declared = raw.get("declared_order")
        bits = [self.name] + [f"{k}{v}" for k, v in sorted(self.params.items())]
        self.slug = re.sub(r"[^A-Za-z0-9._-]", "", "-".join(map(str, bits)))


# ---------------------------------------------------------------------------
# SVG plots
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f")


def _linear_ticks(lo, hi, want=5):
    span = (hi - lo) or 1.0
    step = 10.0 ** math.floor(math.log10(span / want))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= want:
            step *= mult
            break
    v = math.ceil(lo / step) * step
    out = []
    while v <= hi + 1e-9 * span:
        out.append(round(v, 12))
        v += step
    return out


def svg_plot(curves, title, xlabel, ylabel, logx=False, logy=False):
    """Minimal line plot; curves is a list of (label, xs, ys)."""
    W, H = 640, 440
    L, R, T, B = 80, 24, 44, 58

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    pts = [(tx(x), ty(y)) for _, xs, ys in curves for x, y in zip(xs, ys)
           if (not logx or x > 0) and (not logy or y > 0)]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="monospace" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="20" text-anchor="middle" '
           f'font-size="14">{title}</text>']
    if pts:
        x0 = min(p[0] for p in pts)
        x1 = max(p[0] for p in pts)
        y0 = min(p[1] for p in pts)
        y1 = max(p[1] for p in pts)
        if x1 - x0 < 1e-12:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5

        def px(x):
            return L + (x - x0) / (x1 - x0) * (W - L - R)

        def py(y):
            return H - B - (y - y0) / (y1 - y0) * (H - T - B)

        out.append(f'<rect x="{L}" y="{T}" width="{W - L - R}" '
                   f'height="{H - T - B}" fill="none" stroke="black"/>')
        xticks = (range(math.ceil(x0), math.floor(x1) + 1) if logx
                  else _linear_ticks(x0, x1))
        yticks = (range(math.ceil(y0), math.floor(y1) + 1) if logy
                  else _linear_ticks(y0, y1))
        for v in xticks:
            x = px(v)
            lab = f"1e{v}" if logx else f"{v:g}"
            out.append(f'<line x1="{x:.1f}" y1="{H - B}" x2="{x:.1f}" '
                       f'y2="{H - B + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.1f}" y="{H - B + 18}" '
                       f'text-anchor="middle">{lab}</text>')
        for v in yticks:
            y = py(v)
            lab = f"1e{v}" if logy else f"{v:g}"
            out.append(f'<line x1="{L - 5}" y1="{y:.1f}" x2="{L}" '
                       f'y2="{y:.1f}" stroke="black"/>')
            out.append(f'<text x="{L - 8}" y="{y + 4:.1f}" '
                       f'text-anchor="end">{lab}</text>')
        for i, (label, xs, ys) in enumerate(curves):
            keep = [(px(tx(x)), py(ty(y))) for x, y in zip(xs, ys)
                    if (not logx or x > 0) and (not logy or y > 0)]
            if not keep:
                continue
            color = _PALETTE[i % len(_PALETTE)]
            path = " ".join(f"{x:.1f},{y:.1f}" for x, y in keep)
            out.append(f'<polyline points="{path}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            for x, y in keep:
                out.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="2.5" '
                           f'fill="{color}"/>')
            out.append(f'<text x="{W - R - 6}" y="{T + 16 + 14 * i}" '
                       f'text-anchor="end" fill="{color}">{label}</text>')
    out.append(f'<text x="{(L + W - R) / 2}" y="{H - 12}" '
               f'text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{(T + H - B) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(T + H - B) / 2})">{ylabel}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _write_atomic(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def execute_scenario(scn, out_root, tol_scale=1.0, seed_override=None,
                     convergence=False):
    """Run one scenario; returns (report dicts, errors, n_fail)."""
    name = scn["name"]
    out_dir = os.path.join(out_root, name)
    os.makedirs(out_dir, exist_ok=True)
    seed = int(scn.get("seed", 0) if seed_override is None else seed_override)
    shash = scenario_hash(scn)
    plots = bool(scn.get("plots", True))
    entries = [_Entry(e) for e in scn["identities"]]

    provider = build_provider(scn["spacetime"])
    results = []       # (entry, resolution, IdentityReport)
    errors = []
    files = {}
    for res in scn["resolutions"]:
        res = tuple(int(v) for v in res)
        try:
            mesh = build_surface_mesh(provider, scn["surface"], res, seed)
            frame = sf.null_frame(mesh, gauge=scn.get("gauge", "slice"))
        except (ValueError, KeyError) as e:
            errors.append(f"{name} at {res[0]}x{res[1]}: surface build failed: {e}")
            continue
        for ent in entries:
            tol = (ent.tolerance if ent.tolerance is not None
                   else vf.default_tolerance(res)) * tol_scale
            try:
                rep, extra = IDENTITIES[ent.name](mesh, frame, ent.params, tol)
            except PreconditionError as e:
                errors.append(f"{name}/{ent.slug} at {res[0]}x{res[1]}: {e}")
                continue
            except (ValueError, KeyError) as e:
                errors.append(f"{name}/{ent.slug} at {res[0]}x{res[1]}: {e}")
                continue
            results.append((ent, res, rep))
            files.update(extra)

    body = []
    for ent, res, rep in results:
        d = rep.as_dict()
        d["schema_version"] = SCHEMA_VERSION
        d["scenario"] = name
        d["config_hash"] = shash
        d["seed"] = seed
        d["identity_slug"] = ent.slug
        body.append(d)

    n_fail = sum(1 for d in body if d["verdict"] == "fail")

    if convergence:
        order_rows = []
        for ent in entries:
            mine = [(res, rep) for e, res, rep in results if e is ent]
            pts = [(res[0], rep.rel_residual) for res, rep in mine
                   if rep.rel_residual > 0]
            order = None
            if len(pts) >= 2:
                xs = np.log([p[0] for p in pts])
                ys = np.log([p[1] for p in pts])
                order = -float(np.polyfit(xs, ys, 1)[0])
            verdict = None
            if order is not None and ent.declared is not None:
                verdict = ("pass" if order >= ent.declared - 0.5 else "fail")
                if verdict == "fail":
                    n_fail += 1
            body.append({
                "kind": "convergence-order", "identity": ent.slug,
                "order": order, "declared_order": ent.declared,
                "verdict": verdict, "schema_version": SCHEMA_VERSION,
                "scenario": name, "config_hash": shash, "seed": seed,
                "resolutions": [list(res) for res, _ in mine],
                "rel_residuals": [rep.rel_residual for _, rep in mine]})
            order_rows.append((ent.slug, order, ent.declared, verdict))
        rows = ["identity,order,declared_order,verdict"]
        rows += [f"{s},{'' if o is None else repr(o)},"
                 f"{'' if d is None else d},{v or ''}"
                 for s, o, d, v in order_rows]
        files["convergence.csv"] = "\n".join(rows) + "\n"

    for ent in entries:
        mine = [(res, rep) for e, res, rep in results if e is ent]
        if not mine:
            continue
        rows = ["n_theta,n_phi,residual,scale,rel_residual,tolerance,verdict"]
        rows += [f"{res[0]},{res[1]},{rep.residual!r},{rep.scale!r},"
                 f"{rep.rel_residual!r},{rep.tolerance!r},{rep.verdict}"
                 for res, rep in mine]
        files[f"{ent.slug}.csv"] = "\n".join(rows) + "\n"

    if plots:
        curves = []
        for ent in entries:
            mine = [(res, rep) for e, res, rep in results if e is ent]
            pts = [(res[0], rep.rel_residual) for res, rep in mine
                   if rep.rel_residual > 0]
            if len(pts) >= 2:
                curves.append((ent.slug, [p[0] for p in pts],
                               [p[1] for p in pts]))
        if curves:
            files["residuals.svg"] = svg_plot(
                curves, f"{name}: residual decay", "n_theta",
                "relative residual", logx=True, logy=True)
        flow = [(f"{res[0]}x{res[1]}", rep.flow_series)
                for e, res, rep in results if hasattr(rep, "flow_series")]
        if flow:
            files["flow.svg"] = svg_plot(
                [(lab, s, F) for lab, (s, F) in flow],
                f"{name}: functional along the flow", "affine parameter s", "F")

    _write_atomic(os.path.join(out_dir, "report.json"),
                  json.dumps(body, indent=2, sort_keys=True) + "\n")
    for fname, text in sorted(files.items()):
        _write_atomic(os.path.join(out_dir, fname), text)
    return body, errors, n_fail


def _run_config(cfg, out_root, tol_scale, seed_override, convergence):
    scenarios = cfg["scenarios"]
    env = os.environ.get("NULLGEOM_THREADS", "")
    workers = int(env) if env.isdigit() and int(env) > 0 else min(4, len(scenarios))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(execute_scenario, scn, out_root, tol_scale,
                               seed_override, convergence)
                   for scn in scenarios]
        outcomes = []
        for scn, fut in zip(scenarios, futures):
            try:
                outcomes.append((scn, *fut.result()))
            except ConfigError as e:
                outcomes.append((scn, [], [str(e)], 0))

    total_fail = 0
    any_error = False
    for scn, body, errors, n_fail in outcomes:
        verdicts = [d["verdict"] for d in body if d["verdict"] is not None]
        counts = {v: verdicts.count(v) for v in
                  ("pass", "fail", "not-applicable")}
        line = (f"{scn['name']}: {counts['pass']} pass, {counts['fail']} fail, "
                f"{counts['not-applicable']} not-applicable")
        if errors:
            line += f", {len(errors)} errors"
        print(line)
        for d in body:
            for w in d.get("warnings", []):
                print(f"  warning [{d.get('identity_slug', d['identity'])}"
                      f"@{d['resolution'][0]}x{d['resolution'][1]}]: {w}")
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        total_fail += n_fail
        any_error = any_error or bool(errors)
    if any_error:
        return 1
    return 2 if total_fail else 0


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_list_scenarios():
    for item in sorted(_bundled().iterdir(), key=lambda p: p.name):
        if not item.name.endswith(".yaml"):
            continue
        with item.open() as fh:
            cfg = yaml.safe_load(fh)
        print(f"{item.name[:-5]}: {cfg.get('description', '')}")
        for scn in cfg.get("scenarios", []):
            idents = ", ".join(
                e if isinstance(e, str) else e["name"]
                for e in scn.get("identities", []))
            print(f"  {scn['name']} [{idents}]")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(prog="nullgeom",
                     description="identity and null-flow suite runner")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    for cmd, doc in (("run", "evaluate the identity list of each scenario"),
                     ("convergence",
                      "evaluate across resolutions and fit decay orders")):
        p = sub.add_parser(cmd, help=doc)
        p.add_argument("config",
                       help="config file path or bundled scenario name")
        p.add_argument("--out", default=None,
                       help="output directory (default: config 'out' or 'runs')")
        p.add_argument("--seed", type=int, default=None,
                       help="override every scenario seed")
        p.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply all tolerances")
    sub.add_parser("list-scenarios", help="list bundled scenario files")
    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "list-scenarios":
        return cmd_list_scenarios()
    try:
        cfg = load_config(resolve_config_path(args.config))
        out_root = args.out or cfg.get("out", "runs")
        return _run_config(cfg, out_root, args.tol_scale, args.seed,
                           convergence=(args.command == "convergence"))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
