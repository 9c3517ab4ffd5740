"""Configuration, manufactured problems, parameter sweeps, and conformance.

The harness turns a flat `key = value` config into solver runs, measures
errors against exact handles or high-degree references (with a Richardson
estimate of the reference's own error), evaluates the matching closed-form
bound for every run, and writes versioned CSV that the fit/plot stages and
the CLI consume.
"""

from __future__ import annotations

import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction

import numpy as np

from . import bounds as bd
from . import grid as gr
from . import harmonics as sh
from . import hybrid as hy
from . import transport as tr


class ConfigError(ValueError):
    """Raised for malformed or contradictory run configuration."""


_SOLVERS = ("pn", "hybrid", "uncollided", "diffusion")

_RUN_KEYS = (
    "problem", "solver", "N", "dt", "eps", "sigma_t", "sigma_a", "T",
    "s", "band", "n_ref", "seed", "out_csv", "plot_axis",
)
_SWEEP_KEYS = ("N", "dt", "eps", "sigma")

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass
class RunSpec:
    """One resolved run configuration: problem selection, solver, scalar
    parameters, and optional sweep axes."""

    problem: str
    solver: str = "pn"
    N: int = 5
    dt: str | None = None
    eps: float = 1.0
    sigma_t: float = 1.0
    sigma_a: float = 0.0
    T: str = "1"
    s: int | None = None
    band: int = 16
    n_ref: int | None = None
    seed: int = 0
    out_csv: str = ""
    plot_axis: str = ""
    sweep_N: tuple = ()
    sweep_dt: tuple = ()
    sweep_eps: tuple = ()
    sweep_sigma: tuple = ()

    def csv_name(self) -> str:
        return self.out_csv or f"{self.problem}-{self.solver}-sweep.csv"


@dataclass
class SweepRow:
    problem: str
    solver: str
    N: int
    dt: float
    eps: float
    sigma_t: float
    sigma_a: float
    T: float
    error: float
    oracle_uncertainty: float
    bound: float
    branch: str
    walltime_s: float

    def __post_init__(self):
        if self.error < 0.0:
            raise ValueError("error must be nonnegative")
        if self.bound < 0.0:
            raise ValueError("bound must be nonnegative")

    @property
    def flagged(self) -> bool:
        """Oracle hygiene: the reference's own Richardson estimate must stay
        under 10% of the measured error for the row to be trusted."""
        return self.oracle_uncertainty > 0.1 * self.error


CSV_COLUMNS = (
    "schema", "problem", "solver", "N", "dt", "eps", "sigma_t", "sigma_a",
    "T", "error", "oracle_uncertainty", "bound", "branch", "walltime_s",
)


def _check_number(text: str, line_no: int, key: str) -> str:
    if not _NUMBER_RE.match(text):
        raise ConfigError(
            f"line {line_no}: value for '{key}' must be a decimal or "
            f"scientific numeral, got {text!r}"
        )
    return text


def _parse_lines(lines):
    """Yield (line_no, section, key, value) tuples from config text lines."""
    section = ""
    for no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {no}: unterminated section header {line!r}")
            section = line[1:-1].strip()
            if section not in ("run", "sweep"):
                raise ConfigError(f"line {no}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not section:
            raise ConfigError(f"line {no}: key {key!r} appears before any [section]")
        yield no, section, key, value


def parse_config(path) -> RunSpec:
    """Read a config file into a RunSpec, applying defaults and validating
    every key, numeral, and the interval-schedule constraint."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    return parse_config_text(lines)


def parse_config_text(lines) -> RunSpec:
    run: dict = {}
    sweep: dict = {}
    for no, section, key, value in _parse_lines(lines):
        if section == "run":
            if key not in _RUN_KEYS:
                raise ConfigError(f"line {no}: unknown key '{key}' in [run]")
            run[key] = (no, value)
        else:
            if key not in _SWEEP_KEYS:
                raise ConfigError(f"line {no}: unknown key '{key}' in [sweep]")
            sweep[key] = (no, value)
    if "problem" not in run:
        raise ConfigError("config must set 'problem' in [run]")

    rs = RunSpec(problem=run.pop("problem")[1])
    if rs.problem not in PROBLEMS:
        raise ConfigError(
            f"unknown problem {rs.problem!r}; known: {', '.join(sorted(PROBLEMS))}"
        )

    def take_str(key, default):
        return run.pop(key)[1] if key in run else default

    def take_int(key, default):
        if key not in run:
            return default
        no, v = run.pop(key)
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"line {no}: value for '{key}' must be an integer, got {v!r}")

    def take_float(key, default):
        if key not in run:
            return default
        no, v = run.pop(key)
        _check_number(v, no, key)
        return float(v)

    def take_time(key, default):
        if key not in run:
            return default
        no, v = run.pop(key)
        _check_number(v, no, key)
        return v

    rs.solver = take_str("solver", rs.solver)
    if rs.solver not in _SOLVERS:
        raise ConfigError(f"unknown solver {rs.solver!r}; known: {', '.join(_SOLVERS)}")
    rs.N = take_int("N", rs.N)
    rs.dt = take_time("dt", None)
    rs.eps = take_float("eps", rs.eps)
    rs.sigma_t = take_float("sigma_t", rs.sigma_t)
    rs.sigma_a = take_float("sigma_a", rs.sigma_a)
    rs.T = take_time("T", rs.T)
    rs.s = take_int("s", None)
    rs.band = take_int("band", rs.band)
    rs.n_ref = take_int("n_ref", None)
    rs.seed = take_int("seed", rs.seed)
    rs.out_csv = take_str("out_csv", "")
    rs.plot_axis = take_str("plot_axis", "")

    if rs.N < 0:
        raise ConfigError(f"N must be nonnegative, got {rs.N}")
    if rs.eps <= 0:
        raise ConfigError(f"eps must be positive, got {rs.eps}")

    def split_list(key, conv):
        if key not in sweep:
            return ()
        no, v = sweep.pop(key)
        items = [p.strip() for p in v.split(",") if p.strip()]
        if not items:
            raise ConfigError(f"line {no}: empty sweep list for '{key}'")
        out = []
        for p in items:
            try:
                out.append(conv(p, no, key))
            except ConfigError:
                raise
            except ValueError:
                raise ConfigError(f"line {no}: bad sweep value {p!r} for '{key}'")
        return tuple(out)

    rs.sweep_N = split_list("N", lambda p, no, key: int(p))
    rs.sweep_dt = split_list("dt", lambda p, no, key: _check_number(p, no, key))
    rs.sweep_eps = split_list("eps", lambda p, no, key: float(_check_number(p, no, key)))
    rs.sweep_sigma = split_list("sigma", lambda p, no, key: float(_check_number(p, no, key)))

    Tf = Fraction(rs.T)
    if Tf <= 0:
        raise ConfigError(f"T must be positive, got {rs.T}")
    for dt in (rs.dt,) + rs.sweep_dt:
        if dt is None:
            continue
        dtf = Fraction(dt)
        if dtf <= 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        if (Tf / dtf).denominator != 1:
            raise ConfigError(f"M*dt != T: dt={dt} does not divide T={rs.T}")
    return rs


def emit_config(rs: RunSpec) -> str:
    """Canonical text form; parse(emit(parse(x))) == parse(x)."""
    lines = ["[run]"]
    lines.append(f"problem = {rs.problem}")
    lines.append(f"solver = {rs.solver}")
    lines.append(f"N = {rs.N}")
    if rs.dt is not None:
        lines.append(f"dt = {rs.dt}")
    lines.append(f"eps = {rs.eps!r}")
    lines.append(f"sigma_t = {rs.sigma_t!r}")
    lines.append(f"sigma_a = {rs.sigma_a!r}")
    lines.append(f"T = {rs.T}")
    if rs.s is not None:
        lines.append(f"s = {rs.s}")
    lines.append(f"band = {rs.band}")
    if rs.n_ref is not None:
        lines.append(f"n_ref = {rs.n_ref}")
    lines.append(f"seed = {rs.seed}")
    if rs.out_csv:
        lines.append(f"out_csv = {rs.out_csv}")
    if rs.plot_axis:
        lines.append(f"plot_axis = {rs.plot_axis}")
    axes = [
        ("N", rs.sweep_N), ("dt", rs.sweep_dt),
        ("eps", rs.sweep_eps), ("sigma", rs.sweep_sigma),
    ]
    if any(v for _, v in axes):
        lines.append("")
        lines.append("[sweep]")
        for key, vals in axes:
            if vals:
                lines.append(f"{key} = " + ", ".join(
                    str(v) if isinstance(v, (int, str)) else repr(v) for v in vals
                ))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Manufactured problems


@dataclass(frozen=True)
class Manufactured:
    spec: tr.ProblemSpec
    exact: str      # "", "decay", or "characteristics"
    default_s: int  # regularity order used for bounds when the run sets none


def _cosine_spatial():
    return {(1, 0, 0): 0.5, (-1, 0, 0): 0.5}


def _build_iso_smooth(eps, sigma_t, sigma_a, T, dt, s, band):
    g = [gr.isotropic_term(_cosine_spatial())]
    return Manufactured(
        tr.problem("iso-smooth", eps, sigma_t, g, sigma_a=sigma_a, T=T, dt=dt),
        exact="", default_s=2,
    )


def _build_aniso_decay(eps, sigma_t, sigma_a, T, dt, s, band):
    g = [gr.term({(0, 0, 0): 1.0}, (0.0, 0.0, 1.0, 0.0))]
    return Manufactured(
        tr.problem("aniso-decay", eps, sigma_t, g, sigma_a=sigma_a, T=T, dt=dt),
        exact="decay", default_s=2,
    )


def _build_streaming(eps, sigma_t, sigma_a, T, dt, s, band):
    g = [
        gr.isotropic_term(_cosine_spatial()),
        gr.term(_cosine_spatial(), (0.0, 0.0, 0.5, 0.0)),
    ]
    return Manufactured(
        tr.problem("streaming", eps, 0.0, g, sigma_a=0.0, T=T, dt=dt),
        exact="characteristics", default_s=2,
    )


def _build_sobolev(eps, sigma_t, sigma_a, T, dt, s, band):
    s_eff = 2 if s is None else int(s)
    if s_eff < 1:
        raise ConfigError(f"sobolev-s needs s >= 1, got {s_eff}")
    amps = [0.0] * sh.n_moments(band)
    for l in range(band + 1):
        amps[sh.ordinal(l, 0)] = (l + 0.5) ** (-(s_eff + 1))
    g = [gr.term(_cosine_spatial(), tuple(amps))]
    return Manufactured(
        tr.problem(f"sobolev-{s_eff}", eps, sigma_t, g, sigma_a=sigma_a, T=T, dt=dt),
        exact="", default_s=s_eff,
    )


def _build_diffusion_check(eps, sigma_t, sigma_a, T, dt, s, band):
    g = [gr.isotropic_term(_cosine_spatial())]
    return Manufactured(
        tr.problem("diffusion-check", eps, sigma_t, g, sigma_a=sigma_a, T=T, dt=dt),
        exact="", default_s=2,
    )


PROBLEMS = {
    "iso-smooth": _build_iso_smooth,
    "aniso-decay": _build_aniso_decay,
    "streaming": _build_streaming,
    "sobolev-s": _build_sobolev,
    "diffusion-check": _build_diffusion_check,
}


def manufactured(name, eps=1.0, sigma_t=1.0, sigma_a=0.0, T="1", dt=None,
                 s=None, band=16) -> Manufactured:
    """Instantiate a registry problem with the given physical parameters."""
    try:
        build = PROBLEMS[name]
    except KeyError:
        raise ConfigError(
            f"unknown problem {name!r}; known: {', '.join(sorted(PROBLEMS))}"
        ) from None
    return build(eps, sigma_t, sigma_a, T, dt, s, band)


def decay_solution(spec: tr.ProblemSpec, grid, N: int, t: float) -> gr.MomentField:
    """Exact solution for spatially constant data: the mean moment sees only
    absorption, every higher moment decays at sigma/eps^2 + sigma_a."""
    L = max(N, gr.angular_band(spec.g), 1)
    f = gr.moment_field(grid, L, spec.g).truncate(max(N, 1))
    coeffs = np.array(f.coeffs, copy=True)
    coeffs[..., 0] *= math.exp(-spec.sigma_a * t)
    rate = spec.sigma_t / spec.eps**2 + spec.sigma_a
    coeffs[..., 1:] *= math.exp(-rate * t)
    out = gr.MomentField(grid, max(N, 1), coeffs)
    return out.truncate(N) if N < out.N else out


# ---------------------------------------------------------------------------
# Error measurement


def _pad_coeffs(f: gr.MomentField, N: int) -> np.ndarray:
    out = np.zeros(f.grid.shape + (sh.n_moments(N),), dtype=complex)
    out[..., : sh.n_moments(f.N)] = f.coeffs
    return out


def moment_distance(a: gr.MomentField, b: gr.MomentField) -> float:
    """L^2 distance between moment fields of possibly different degrees."""
    N = max(a.N, b.N)
    diff = _pad_coeffs(a, N) - _pad_coeffs(b, N)
    return gr.l2_norm(gr.MomentField(a.grid, N, diff))


def reference_degree(N: int, override=None) -> int:
    """Degree of the self-convergence reference: comfortably above N so the
    truncation tail of the reference is negligible against the error at N."""
    return int(override) if override is not None else 2 * N + 6


def measurement_quadrature(spec: tr.ProblemSpec, degree: int, dt_run: float):
    """Quadrature able to project streaming phase content up to the horizon
    where scattering has damped it below noticeability."""
    grid = tr.default_grid(spec)
    kmax = math.sqrt(float(np.max(grid.k_norm2())))
    if spec.sigma_t > 0.0:
        horizon = min(dt_run, 30.0 * spec.eps**2 / spec.sigma_t)
    else:
        horizon = dt_run
    margin = math.ceil(kmax * horizon / spec.eps) + 8
    return sh.build_sphere_quadrature(degree + margin)


@dataclass
class SingleResult:
    """Everything one parameter point produces, before CSV flattening."""
    error: float
    oracle_uncertainty: float
    bound: float
    branch: str
    report: bd.BoundReport | None = None


def _evaluate_bound(spec, solver, s_eff, N, dt_run, grid):
    if solver not in ("pn", "hybrid"):
        return 0.0, "none", None
    family = solver
    if N < s_eff - 1:
        return 0.0, "none", None
    bi = bd.bound_inputs(spec, s_eff, N, dt=dt_run, grid=grid, family=family)
    if spec.sigma_a > 0.0:
        rep = bd.absorbing_bounds(bi, family)
    elif family == "pn":
        rep = bd.pn_error_bound(bi)
    else:
        rep = bd.hybrid_error_bound(bi)
    labeled = [t for t in rep.terms if t.branch]
    branch = max(labeled, key=lambda t: t.value).branch if labeled else ""
    return rep.total, branch or "flat", rep


def run_single(mf: Manufactured, solver: str, N: int, dt=None, n_ref=None,
               s=None) -> SingleResult:
    """Solve one parameter point and measure its error against the best
    available oracle; evaluate the matching bound with C = 1."""
    spec = mf.spec
    grid = tr.default_grid(spec)
    T = spec.t_final
    dt_run = float(tr._as_fraction(dt)) if dt is not None else float(spec.dt)
    s_eff = mf.default_s if s is None else int(s)

    if solver == "diffusion":
        f = tr.solve_pn(spec, N, grid=grid).final
        err = tr.flux_error(f, tr.solve_diffusion(spec, T, grid))
        return SingleResult(err, 0.0, 0.0, "none")

    if solver == "pn":
        f = tr.solve_pn(spec, N, grid=grid).final
        if mf.exact == "decay":
            err = moment_distance(f, decay_solution(spec, grid, N, T))
            unc = 0.0
        elif mf.exact == "characteristics":
            quad = measurement_quadrature(spec, N, T)
            exact = tr.characteristics_solution(spec, quad, T, grid)
            err = gr.l2_norm(gr.evaluate_field(f, quad) - exact)
            unc = 0.0
        else:
            n1 = reference_degree(N, n_ref)
            ref1 = tr.solve_pn(spec, n1, grid=grid).final
            ref2 = tr.solve_pn(spec, n1 + 4, grid=grid).final
            err = moment_distance(f, ref1)
            unc = moment_distance(ref1, ref2)
        bound, branch, rep = _evaluate_bound(spec, solver, s_eff, N, dt_run, grid)
        return SingleResult(err, unc, bound, branch, rep)

    if solver in ("hybrid", "uncollided"):
        if mf.exact in ("decay", "characteristics"):
            quad = measurement_quadrature(spec, N + 1, dt_run)
        else:
            n1 = reference_degree(N, n_ref)
            quad = measurement_quadrature(spec, max(N + 1, n1), dt_run)
        if solver == "hybrid":
            res = hy.run_hybrid(spec, N, dt=dt_run, grid=grid, quad=quad)
            total = res.total
        else:
            state = gr.nodal_field(grid, quad, spec.g)
            total = tr.solve_uncollided(state, 0.0, T, spec.eps, spec.sigma_t,
                                        spec.sigma_a, q_terms=spec.q)
        if mf.exact == "characteristics":
            exact = tr.characteristics_solution(spec, quad, T, grid)
            err = gr.l2_norm(total - exact)
            unc = 0.0
        elif mf.exact == "decay":
            err = gr.nodal_error_norm(total, decay_solution(spec, grid, N, T))
            unc = 0.0
        else:
            n1 = reference_degree(N, n_ref)
            ref1 = tr.solve_pn(spec, n1, grid=grid).final
            ref2 = tr.solve_pn(spec, n1 + 4, grid=grid).final
            err = gr.nodal_error_norm(total, ref1)
            unc = moment_distance(ref1, ref2)
        if solver == "hybrid":
            bound, branch, rep = _evaluate_bound(spec, solver, s_eff, N, dt_run, grid)
        else:
            bound, branch, rep = 0.0, "none", None
        return SingleResult(err, unc, bound, branch, rep)

    raise ConfigError(f"unknown solver {solver!r}")


def sweep_points(rs: RunSpec):
    """The ordered parameter tuples (N, dt, eps, sigma_t) of a sweep."""
    if not (rs.sweep_N or rs.sweep_dt or rs.sweep_eps or rs.sweep_sigma):
        raise ConfigError("sweep requires at least one non-empty axis in [sweep]")
    Ns = rs.sweep_N or (rs.N,)
    dts = rs.sweep_dt or ((rs.dt,) if rs.dt is not None else (rs.T,))
    epss = rs.sweep_eps or (rs.eps,)
    sigmas = rs.sweep_sigma or (rs.sigma_t,)
    return [
        (N, dt, eps, sigma)
        for N in Ns for dt in dts for eps in epss for sigma in sigmas
    ]


def run_sweep(rs: RunSpec, jobs: int = 1) -> list[SweepRow]:
    """Run every point of the sweep grid; rows come back in grid order
    regardless of scheduling, so output depends only on the RunSpec."""
    points = sweep_points(rs)

    def work(point):
        N, dt, eps, sigma = point
        t0 = time.perf_counter()
        mf = manufactured(rs.problem, eps=eps, sigma_t=sigma, sigma_a=rs.sigma_a,
                          T=rs.T, dt=dt, s=rs.s, band=rs.band)
        out = run_single(mf, rs.solver, N, dt=dt, n_ref=rs.n_ref, s=rs.s)
        wall = time.perf_counter() - t0
        return SweepRow(
            problem=rs.problem, solver=rs.solver, N=N,
            dt=float(tr._as_fraction(dt)), eps=eps,
            sigma_t=float(mf.spec.sigma_t), sigma_a=rs.sigma_a,
            T=float(Fraction(rs.T)), error=out.error,
            oracle_uncertainty=out.oracle_uncertainty,
            bound=out.bound, branch=out.branch, walltime_s=wall,
        )

    if jobs <= 1:
        return [work(p) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, points))


# ---------------------------------------------------------------------------
# CSV


def _fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    return f"{x:.17g}"


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join([
                "1", r.problem, r.solver, _fmt(r.N), _fmt(r.dt), _fmt(r.eps),
                _fmt(r.sigma_t), _fmt(r.sigma_a), _fmt(r.T), _fmt(r.error),
                _fmt(r.oracle_uncertainty), _fmt(r.bound), r.branch,
                _fmt(r.walltime_s),
            ]) + "\n")


def read_csv(path) -> list[SweepRow]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected CSV columns {header}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"{path}: malformed row {ln!r}")
        if parts[0] != "1":
            raise ValueError(f"{path}: unsupported schema version {parts[0]!r}")
        rows.append(SweepRow(
            problem=parts[1], solver=parts[2], N=int(parts[3]),
            dt=float(parts[4]), eps=float(parts[5]), sigma_t=float(parts[6]),
            sigma_a=float(parts[7]), T=float(parts[8]), error=float(parts[9]),
            oracle_uncertainty=float(parts[10]), bound=float(parts[11]),
            branch=parts[12], walltime_s=float(parts[13]),
        ))
    return rows


# ---------------------------------------------------------------------------
# Conformance


_AXES = ("N", "dt", "eps", "sigma")


def _axis_value(row: SweepRow, axis: str) -> float:
    if axis == "N":
        return float(row.N + 1)
    if axis == "dt":
        return row.dt
    if axis == "eps":
        return row.eps
    if axis == "sigma":
        return row.sigma_t
    raise ValueError(f"unknown axis {axis!r}")


def _other_key(row: SweepRow, axis: str):
    vals = {a: _axis_value(row, a) for a in _AXES if a != axis}
    return (row.problem, row.solver, row.sigma_a, row.T,
            tuple(sorted(vals.items())))


@dataclass
class ConformanceReport:
    fits: dict = dc_field(default_factory=dict)       # (problem, solver) -> C
    slopes: dict = dc_field(default_factory=dict)     # (problem, solver, axis) -> slope
    violations: list = dc_field(default_factory=list)
    flagged: list = dc_field(default_factory=list)    # row indices
    notes: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.fits):
            lines.append(f"fit C[{key[0]}/{key[1]}] = {self.fits[key]:.6e}")
        for key in sorted(self.slopes):
            lines.append(
                f"slope[{key[0]}/{key[1]}] vs {key[2]} = {self.slopes[key]:+.3f}"
            )
        for n in self.notes:
            lines.append(f"note: {n}")
        for v in self.violations:
            lines.append(f"VIOLATION: {v}")
        if self.flagged:
            lines.append(f"flagged rows (excluded): {self.flagged}")
        lines.append("verdict: " + ("conformant" if self.ok else "NOT conformant"))
        return "\n".join(lines)


def fit_and_check(rows, tol: float = 1e-8) -> ConformanceReport:
    """Fit one constant per (problem, solver) pair as C = max(error/bound),
    measure log-log slopes along every varying axis, and collect violations:
    a zero bound facing an error above tol, or usage of flagged rows."""
    rows = list(rows)
    if len(rows) < 3:
        raise ValueError(f"conformance needs at least 3 rows, got {len(rows)}")
    rep = ConformanceReport()
    rep.flagged = [i for i, r in enumerate(rows) if r.flagged]
    usable = [r for i, r in enumerate(rows) if i not in set(rep.flagged)]

    ratios: dict = {}
    for r in usable:
        if r.branch == "none":
            continue
        if r.bound == 0.0:
            if r.error > tol:
                rep.violations.append(
                    f"{r.problem}/{r.solver} N={r.N} dt={r.dt:g}: bound is 0 "
                    f"but error {r.error:.3e} exceeds {tol:g}"
                )
            continue
        key = (r.problem, r.solver)
        ratios.setdefault(key, []).append(r.error / r.bound)
    for key, vals in ratios.items():
        rep.fits[key] = max(vals)

    for axis in _AXES:
        groups: dict = {}
        for r in usable:
            groups.setdefault(_other_key(r, axis), []).append(r)
        slopes_here: dict = {}
        for members in groups.values():
            pts = sorted(
                {( _axis_value(r, axis), r.error) for r in members if r.error > 0.0}
            )
            xs = sorted({p[0] for p in pts})
            if len(xs) < 3:
                continue
            lx = np.log([p[0] for p in pts])
            ly = np.log([p[1] for p in pts])
            slope = float(np.polyfit(lx, ly, 1)[0])
            key = (members[0].problem, members[0].solver, axis)
            slopes_here.setdefault(key, []).append(slope)
            ordered = sorted(members, key=lambda r: _axis_value(r, axis))
            if axis == "N":
                for a, b in zip(ordered, ordered[1:]):
                    if b.error > a.error * 1.05:
                        rep.notes.append(
                            f"{a.problem}/{a.solver}: error not monotone in N "
                            f"between N={a.N} and N={b.N}"
                        )
        for key, vals in slopes_here.items():
            rep.slopes[key] = float(np.mean(vals))
    return rep


# ---------------------------------------------------------------------------
# Plot emission


def emit_plot(rows, axis: str, svg_path=None, txt_path=None):
    """Log-log plot of error vs one sweep axis with the bound overlaid,
    plus a plain-text table; both byte-deterministic functions of the rows."""
    from . import svgplot

    rows = list(rows)
    if not rows:
        raise ValueError("cannot plot an empty CSV")
    if axis not in _AXES:
        raise ValueError(f"unknown plot axis {axis!r}; choose one of {_AXES}")
    pts = sorted((_axis_value(r, axis), r.error) for r in rows)
    if len({p[0] for p in pts}) < 2:
        raise ValueError(f"axis {axis!r} does not vary across the rows")
    series = [("error", pts, "markers")]
    bnd = sorted(
        (_axis_value(r, axis), r.bound)
        for r in rows if r.branch != "none" and r.bound > 0.0
    )
    if bnd:
        series.append(("bound", bnd, "dashed"))
    label = {"N": "N+1", "dt": "dt", "eps": "eps", "sigma": "sigma_t"}[axis]
    title = f"{rows[0].problem} / {rows[0].solver}"
    svg = svgplot.log_log_plot(series, title=title, xlabel=label, ylabel="L2 error")

    widths = (14, 24, 24, 14)
    header = ("%-*s %-*s %-*s %-*s" % (
        widths[0], label, widths[1], "error", widths[2], "bound", widths[3], "branch",
    )).rstrip()
    body = [header]
    for r in sorted(rows, key=lambda r: _axis_value(r, axis)):
        body.append(("%-*s %-*s %-*s %-*s" % (
            widths[0], _fmt(_axis_value(r, axis)), widths[1], _fmt(r.error),
            widths[2], _fmt(r.bound), widths[3], r.branch,
        )).rstrip())
    txt = "\n".join(body) + "\n"

    if svg_path is not None:
        with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    if txt_path is not None:
        with open(txt_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(txt)
    return svg, txt
