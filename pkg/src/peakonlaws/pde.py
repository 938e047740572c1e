"""Periodic pseudospectral method-of-lines solver for
m_t = -f(u,ux)*m - (g(u,ux)*m)_x with u recovered from m by Helmholtz
inversion u_hat = m_hat/(1+k^2).

m is the evolved variable (the inversion is smoothing and unconditionally
stable), products are dealiased with the 2/3 rule, time stepping is
classical RK4 at fixed step.  Wave breaking is detected, not resolved:
the run stops when sup|u_x| crosses the configured threshold.  Equations
singular at u = 0 (probed automatically) get a floor on min|u|.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .conslaw import EquationSpec
from .twave import solitary_profile

__all__ = [
    "Grid",
    "GridState",
    "SimConfig",
    "ConservedSeries",
    "SimResult",
    "BoundsReport",
    "helmholtz_u",
    "eval_on_grid",
    "rhs",
    "step_rk4",
    "run",
    "initial_data",
    "check_apriori_bounds",
    "write_series_csv",
    "write_snapshots_csv",
    "read_config",
]

STATUS_COMPLETED = "completed"
STATUS_WAVE_BREAKING = "wave-breaking detected"
STATUS_SINGULAR = "singularity guard triggered"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L) with rfft wavenumbers."""

    length: float
    n: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("domain length must be positive")
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError("node count must be a power of two, at least 16")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    @property
    def dealias_mask(self) -> np.ndarray:
        # 2/3 rule: keep modes with index <= n/3
        return (np.arange(self.n // 2 + 1) <= self.n // 3).astype(float)

    def integral(self, vals: np.ndarray) -> float:
        # trapezoid rule on a periodic grid = dx * sum (spectrally exact
        # for trigonometric polynomials below Nyquist)
        return float(self.dx * np.sum(vals))


def helmholtz_u(grid: Grid, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """u and u_x from m via u_hat = m_hat/(1+k^2) and spectral derivative."""
    mh = np.fft.rfft(m)
    uh = mh / (1.0 + grid.k**2)
    u = np.fft.irfft(uh, n=grid.n)
    ux = np.fft.irfft(1j * grid.k * uh, n=grid.n)
    return u, ux


def ddx(grid: Grid, vals: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    vh = np.fft.rfft(vals)
    if mask is not None:
        vh = vh * mask
    return np.fft.irfft(1j * grid.k * vh, n=grid.n)


def _filtered(grid: Grid, vals: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    if mask is None:
        return vals
    return np.fft.irfft(np.fft.rfft(vals) * mask, n=grid.n)


@dataclass(frozen=True)
class GridState:
    t: float
    m: np.ndarray
    u: np.ndarray
    ux: np.ndarray

    @staticmethod
    def from_m(grid: Grid, m: np.ndarray, t: float = 0.0) -> "GridState":
        u, ux = helmholtz_u(grid, m)
        return GridState(t, m, u, ux)


def eval_on_grid(e: ex.Expr, env: dict) -> np.ndarray:
    """Vectorized evaluation of an Expr over numpy arrays."""
    if isinstance(e, ex.Const):
        return np.asarray(e.value)
    if isinstance(e, ex.Param):
        return np.asarray(env[e.name])
    if isinstance(e, ex.Var):
        return np.asarray(env[e.v.name])
    if isinstance(e, ex.Add):
        out = eval_on_grid(e.terms[0], env)
        for t in e.terms[1:]:
            out = out + eval_on_grid(t, env)
        return out
    if isinstance(e, ex.Mul):
        out = eval_on_grid(e.factors[0], env)
        for f in e.factors[1:]:
            out = out * eval_on_grid(f, env)
        return out
    if isinstance(e, ex.Pow):
        base = eval_on_grid(e.base, env)
        with np.errstate(divide="ignore", invalid="ignore"):
            if e.exp.denominator == 1:
                return base ** float(e.exp)
            return np.power(base, float(e.exp))
    if isinstance(e, ex.Fn):
        arg = eval_on_grid(e.arg, env)
        ufunc = {
            "exp": np.exp, "ln": np.log, "sqrt": np.sqrt,
            "sin": np.sin, "cos": np.cos, "arctanh": np.arctanh,
        }[e.name]
        with np.errstate(divide="ignore", invalid="ignore"):
            return ufunc(arg)
    raise ex.ExprError(f"cannot evaluate {type(e).__name__} on a grid")


class SingularHit(RuntimeError):
    """f or g evaluated non-finite (or below the u-floor) at grid nodes."""

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


def _is_singular_at_zero(eq: EquationSpec) -> bool:
    """Probe whether f or g blows up as u -> 0 (poles of the singular families)."""
    for probe_u in (1e-8, -1e-8):
        for e in (eq.bound_f, eq.bound_g):
            v = ex.evaluate(e, {"u": probe_u, "ux": 0.37})
            if not math.isfinite(v) or abs(v) > 1e12:
                return True
    return False


@dataclass(frozen=True)
class SimConfig:
    """One simulation: grid, step, equation, initial data, outputs.

    initial: {"kind": "gaussian" | "cosine_offset" | "mollified_peakon" |
    "solitary_wave", "params": {...}}.  min_u_floor applies only when the
    equation is singular at u = 0 (auto-probed); blowup_threshold stops
    the run on sup|u_x| (wave breaking).
    """

    length: float
    n: int
    dt: float
    t_final: float
    equation: EquationSpec
    initial: dict
    dealias: bool = True
    series_dt: float | None = None
    energy_mu: float = 2.0
    energy_nu: float = 0.0
    blowup_threshold: float = 1e3
    min_u_floor: float = 1e-3
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ValueError("dt and t_final must be positive")

    @property
    def grid(self) -> Grid:
        return Grid(self.length, self.n)


def read_config(source: str | dict) -> SimConfig:
    """Build a SimConfig from a JSON document (path contents or dict)."""
    cfg = json.loads(source) if isinstance(source, str) else dict(source)
    try:
        eq_raw = cfg["equation"]
        eq = EquationSpec.from_strings(
            eq_raw["f"], eq_raw["g"], eq_raw.get("params", {})
        )
        out = cfg.get("output", {})
        return SimConfig(
            length=float(cfg["L"]),
            n=int(cfg["N"]),
            dt=float(cfg["dt"]),
            t_final=float(cfg["t_final"]),
            equation=eq,
            initial=dict(cfg["initial"]),
            dealias=bool(cfg.get("dealias", True)),
            series_dt=cfg.get("series_dt"),
            energy_mu=float(cfg.get("energy_mu", 2.0)),
            energy_nu=float(cfg.get("energy_nu", 0.0)),
            blowup_threshold=float(cfg.get("blowup_threshold", 1e3)),
            min_u_floor=float(cfg.get("min_u_floor", 1e-3)),
            snapshot_times=tuple(out.get("snapshot_times", ())),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise ValueError(f"invalid simulation config: {err}") from err


# ---------------------------------------------------------------------------
# initial data


def initial_data(config: SimConfig) -> np.ndarray:
    """Nodal m(0) from the configured u(0); u -> m is spectral (1+k^2)."""
    grid = config.grid
    x = grid.x
    kind = config.initial.get("kind")
    p = config.initial.get("params", {})
    L = grid.length
    if kind == "gaussian":
        a = float(p.get("amplitude", 1.0))
        x0 = float(p.get("center", L / 2.0))
        w = float(p.get("width", 1.0))
        u0 = a * np.exp(-(((x - x0) / w) ** 2))
    elif kind == "cosine_offset":
        c0 = float(p.get("offset", 2.0))
        a = float(p.get("amplitude", 0.5))
        mode = int(p.get("mode", 1))
        u0 = c0 + a * np.cos(2.0 * np.pi * mode * x / L)
    elif kind == "mollified_peakon":
        a = float(p.get("amplitude", 1.0))
        x0 = float(p.get("center", L / 2.0))
        width_dx = float(p.get("mollify_width_dx", 3.0))
        # periodized peakon, then Gaussian mollification as a spectral filter
        u0 = np.zeros_like(x)
        for j in (-1, 0, 1):
            u0 += a * np.exp(-np.abs(x - x0 - j * L))
        sigma = width_dx * grid.dx
        u0 = np.fft.irfft(np.fft.rfft(u0) * np.exp(-0.5 * (grid.k * sigma) ** 2), n=grid.n)
    elif kind == "solitary_wave":
        b = float(p["b"])
        c = float(p["c"])
        x0 = float(p.get("center", L / 2.0))
        xi = np.mod(x - x0 + L / 2.0, L) - L / 2.0
        # periodize by summing profile images until they fall below 1e-12
        # of the peak; a plain wrap would leave a derivative kink at the
        # box edge whose radiation pollutes the transport
        u0 = solitary_profile(b, c, xi).U
        peak = float(np.max(u0))
        for j in range(1, 64):
            left = solitary_profile(b, c, np.abs(xi + j * L)).U
            right = solitary_profile(b, c, np.abs(xi - j * L)).U
            u0 = u0 + left + right
            if max(np.max(left), np.max(right)) < 1e-12 * peak:
                break
    else:
        raise ValueError(f"unknown initial-data kind {kind!r}")
    uh = np.fft.rfft(u0)
    return np.fft.irfft((1.0 + grid.k**2) * uh, n=grid.n)


# ---------------------------------------------------------------------------
# right-hand side and stepping


@dataclass
class _Workspace:
    grid: Grid
    eq: EquationSpec
    mask: np.ndarray | None
    guard_floor: float  # 0 disables the min-|u| guard

    def rhs(self, m: np.ndarray) -> np.ndarray:
        grid = self.grid
        u, ux = helmholtz_u(grid, m)
        if self.guard_floor > 0.0 and np.min(np.abs(u)) < self.guard_floor:
            j = int(np.argmin(np.abs(u)))
            raise SingularHit(
                f"|u| fell below the floor {self.guard_floor:g}", float(grid.x[j])
            )
        env = {"u": u, "ux": ux, "x": grid.x}
        fv = eval_on_grid(self.eq.bound_f, env)
        gv = eval_on_grid(self.eq.bound_g, env)
        if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(gv))):
            bad = np.flatnonzero(~(np.isfinite(fv) & np.isfinite(gv)))
            raise SingularHit("f or g is non-finite on the grid", float(grid.x[bad[0]]))
        return -_filtered(grid, fv * m, self.mask) - ddx(grid, gv * m, self.mask)


def rhs(grid: Grid, state: GridState, eq: EquationSpec, dealias: bool = True) -> np.ndarray:
    """Nodal m_t = -f*m - D_x(g*m), spectral D_x, dealiased products."""
    ws = _Workspace(grid, eq, grid.dealias_mask if dealias else None, 0.0)
    return ws.rhs(state.m)


def _rk4(m: np.ndarray, dt: float, f) -> np.ndarray:
    k1 = f(m)
    k2 = f(m + 0.5 * dt * k1)
    k3 = f(m + 0.5 * dt * k2)
    k4 = f(m + dt * k3)
    return m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(
    grid: Grid, state: GridState, eq: EquationSpec, dt: float,
    dealias: bool = True, blowup_threshold: float = 1e3,
) -> GridState:
    """One classical RK4 step; raises SingularHit past the gradient threshold."""
    gmax = float(np.max(np.abs(eval_on_grid(eq.bound_g, {"u": state.u, "ux": state.ux, "x": grid.x}))))
    if dt * gmax * grid.n / grid.length > 1.0:
        warnings.warn("CFL sanity exceeded: dt*max|g|*N/L > 1", RuntimeWarning, stacklevel=2)
    ws = _Workspace(grid, eq, grid.dealias_mask if dealias else None, 0.0)
    new = GridState.from_m(grid, _rk4(state.m, dt, ws.rhs), state.t + dt)
    if float(np.max(np.abs(new.ux))) > blowup_threshold:
        raise SingularHit("wave-breaking detected: sup|u_x| crossed the threshold")
    return new


# ---------------------------------------------------------------------------
# series, run loop


@dataclass
class ConservedSeries:
    """Time series of the monitored integrals on the periodic grid."""

    t: list = field(default_factory=list)
    M: list = field(default_factory=list)
    H1sq: list = field(default_factory=list)
    L2msq: list = field(default_factory=list)
    E: list = field(default_factory=list)
    sup_u: list = field(default_factory=list)
    sup_ux: list = field(default_factory=list)
    min_u: list = field(default_factory=list)

    def record(self, grid: Grid, state: GridState, mu: float, nu: float):
        u, ux, m = state.u, state.ux, state.m
        uxx = u - m
        self.t.append(state.t)
        self.M.append(grid.integral(m))
        self.H1sq.append(grid.integral(ux * ux + u * u))
        self.L2msq.append(grid.integral(m * m))
        self.E.append(grid.integral(uxx * uxx + mu * ux * ux + (mu - 1.0) * u * u + 2.0 * nu * u))
        self.sup_u.append(float(np.max(np.abs(u))))
        self.sup_ux.append(float(np.max(np.abs(ux))))
        self.min_u.append(float(np.min(u)))

    def arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in
                ("t", "M", "H1sq", "L2msq", "E", "sup_u", "sup_ux", "min_u")}

    @staticmethod
    def relative_drift(values) -> float:
        values = np.asarray(values)
        scale = max(abs(values[0]), 1e-300)
        return float(np.max(np.abs(values - values[0])) / scale)


@dataclass
class SimResult:
    status: str
    message: str
    series: ConservedSeries
    snapshots: list  # (t, u, m) triples
    final: GridState


def run(config: SimConfig, eq: EquationSpec | None = None) -> SimResult:
    """Integrate to t_final, recording the series every series_dt.

    Terminates early with a wave-breaking or singularity status (partial
    series retained).  The min-|u| guard is armed only for equations that
    probe singular at u = 0.
    """
    eq = eq or config.equation
    grid = config.grid
    m = initial_data(config)
    state = GridState.from_m(grid, m)
    guard = config.min_u_floor if _is_singular_at_zero(eq) else 0.0
    ws = _Workspace(grid, eq, grid.dealias_mask if config.dealias else None, guard)

    gmax = float(np.max(np.abs(eval_on_grid(eq.bound_g, {"u": state.u, "ux": state.ux, "x": grid.x}))))
    if config.dt * gmax * grid.n / grid.length > 1.0:
        warnings.warn("CFL sanity exceeded: dt*max|g|*N/L > 1", RuntimeWarning, stacklevel=2)

    n_steps = int(round(config.t_final / config.dt))
    series_every = 1
    if config.series_dt is not None:
        series_every = max(1, int(round(config.series_dt / config.dt)))

    snapshot_steps = {}
    for ts in config.snapshot_times:
        snapshot_steps.setdefault(min(n_steps, max(0, int(round(ts / config.dt)))), ts)

    series = ConservedSeries()
    series.record(grid, state, config.energy_mu, config.energy_nu)
    snapshots = []
    if 0 in snapshot_steps:
        snapshots.append((state.t, state.u.copy(), state.m.copy()))

    status, message = STATUS_COMPLETED, ""
    for step in range(1, n_steps + 1):
        try:
            m = _rk4(state.m, config.dt, ws.rhs)
        except SingularHit as hit:
            status, message = STATUS_SINGULAR, str(hit)
            break
        if not np.all(np.isfinite(m)):
            status, message = STATUS_SINGULAR, "non-finite nodal value"
            break
        state = GridState.from_m(grid, m, step * config.dt)
        if float(np.max(np.abs(state.ux))) > config.blowup_threshold:
            status, message = STATUS_WAVE_BREAKING, (
                f"sup|u_x| = {float(np.max(np.abs(state.ux))):.3e} at t = {state.t:.6g}"
            )
            series.record(grid, state, config.energy_mu, config.energy_nu)
            break
        if step % series_every == 0 or step == n_steps:
            series.record(grid, state, config.energy_mu, config.energy_nu)
        if step in snapshot_steps:
            snapshots.append((state.t, state.u.copy(), state.m.copy()))
    return SimResult(status, message, series, snapshots, state)


# ---------------------------------------------------------------------------
# a priori bounds


@dataclass(frozen=True)
class BoundsReport:
    status: str  # "holds" | "violated" | "not applicable" | "degenerate (zero data)"
    sup_u_margin: float | None = None
    sup_ux_margin: float | None = None
    norm_margin: float | None = None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "sup_u_margin": self.sup_u_margin,
            "sup_ux_margin": self.sup_ux_margin,
            "norm_margin": self.norm_margin,
        }


def check_apriori_bounds(series: ConservedSeries, l2m_conserved: bool = True) -> BoundsReport:
    """Amplitude/gradient bounds from conservation of the m-L2 norm.

    At every sample time: sup|u| < (1/sqrt2)*||u0||_H1 < ||m0||_L2 and
    sup|u_x| < ||m0||_L2.  Violations are reported, not raised: they
    falsify either the scheme or the claimed family membership.
    """
    if not l2m_conserved:
        return BoundsReport("not applicable")
    if not series.t or series.H1sq[0] == 0.0:
        return BoundsReport("degenerate (zero data)")
    h1_0 = math.sqrt(series.H1sq[0])
    l2m_0 = math.sqrt(series.L2msq[0])
    sup_u = max(series.sup_u)
    sup_ux = max(series.sup_ux)
    margins = (
        h1_0 / math.sqrt(2.0) - sup_u,
        l2m_0 - sup_ux,
        l2m_0 - h1_0 / math.sqrt(2.0),
    )
    status = "holds" if all(m > 0.0 for m in margins) else "violated"
    return BoundsReport(status, margins[0], margins[1], margins[2])


# ---------------------------------------------------------------------------
# csv output (17 significant digits: round-trip exact doubles)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_series_csv(path: str, series: ConservedSeries):
    arrays = series.arrays()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "M", "H1sq", "L2msq", "E", "sup_u", "sup_ux", "min_u"])
        for i in range(len(arrays["t"])):
            w.writerow([_fmt(arrays[k][i]) for k in
                        ("t", "M", "H1sq", "L2msq", "E", "sup_u", "sup_ux", "min_u")])


def write_snapshots_csv(path: str, grid: Grid, snapshots: list):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "u", "m"])
        for t, u, m in snapshots:
            for j in range(grid.n):
                w.writerow([_fmt(t), _fmt(grid.x[j]), _fmt(u[j]), _fmt(m[j])])
