import json
import warnings

import numpy as np
import pytest

from peakonlaws.conslaw import EquationSpec
from peakonlaws.pde import (
    STATUS_COMPLETED,
    STATUS_SINGULAR,
    STATUS_WAVE_BREAKING,
    ConservedSeries,
    Grid,
    GridState,
    SimConfig,
    check_apriori_bounds,
    helmholtz_u,
    initial_data,
    read_config,
    rhs,
    run,
    step_rk4,
    write_series_csv,
)

CH = EquationSpec.from_strings("ux", "u")
SINGULAR = EquationSpec.from_strings("ux/u^3", "1/u^2")


def _gaussian_cfg(**kw):
    base = dict(
        length=40.0, n=256, dt=1e-3, t_final=1.0, equation=CH,
        initial={"kind": "gaussian", "params": {}}, series_dt=0.1,
    )
    base.update(kw)
    return SimConfig(**base)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(40.0, 100)  # not a power of two
    with pytest.raises(ValueError):
        Grid(40.0, 8)  # too small
    with pytest.raises(ValueError):
        Grid(-1.0, 64)


def test_helmholtz_inversion_exact_below_nyquist():
    rng = np.random.default_rng(3)
    grid = Grid(40.0, 256)
    coef = np.zeros(129, complex)
    coef[:40] = rng.normal(size=40) + 1j * rng.normal(size=40)
    u_true = np.fft.irfft(coef, n=256)
    m = np.fft.irfft((1.0 + grid.k**2) * coef, n=256)
    u, ux = helmholtz_u(grid, m)
    ref = np.max(np.abs(u_true))
    assert np.max(np.abs(u - u_true)) / ref < 1e-12
    ux_true = np.fft.irfft(1j * grid.k * coef, n=256)
    assert np.max(np.abs(ux - ux_true)) / ref < 1e-12


def test_state_consistency_residual():
    grid = Grid(40.0, 256)
    m = initial_data(_gaussian_cfg())
    st = GridState.from_m(grid, m)
    # u - u_xx - m vanishes to spectral accuracy
    uxx = np.fft.irfft(-grid.k**2 * np.fft.rfft(st.u), n=grid.n)
    resid = np.max(np.abs(st.u - uxx - st.m)) / np.max(np.abs(st.m))
    assert resid < 1e-10


def test_rhs_zero_and_constant_states():
    grid = Grid(40.0, 256)
    st0 = GridState.from_m(grid, np.zeros(256))
    assert np.max(np.abs(rhs(grid, st0, CH))) == 0.0
    # constant state: all x-derivatives vanish, rhs = -f(c0, 0)*c0
    novikov = EquationSpec.from_strings("u*ux", "u^2")
    stc = GridState.from_m(grid, np.full(256, 0.7))
    assert np.max(np.abs(rhs(grid, stc, novikov))) < 1e-14


def test_rhs_matches_finite_difference_oracle():
    grid = Grid(40.0, 4096)
    u0 = np.cos(2.0 * np.pi * grid.x / grid.length)
    m0 = np.fft.irfft((1.0 + grid.k**2) * np.fft.rfft(u0), n=grid.n)
    st = GridState.from_m(grid, m0)
    r_spec = rhs(grid, st, CH)

    def ddx4(v):
        return (-np.roll(v, -2) + 8 * np.roll(v, -1) - 8 * np.roll(v, 1) + np.roll(v, 2)) / (12 * grid.dx)

    r_fd = -st.ux * st.m - ddx4(st.u * st.m)
    assert np.max(np.abs(r_spec - r_fd)) / np.max(np.abs(r_fd)) < 1e-6


def test_step_rk4_fixed_point_and_reversal():
    grid = Grid(40.0, 256)
    zero = GridState.from_m(grid, np.zeros(256))
    assert np.max(np.abs(step_rk4(grid, zero, CH, 1e-3).m)) == 0.0

    st = GridState.from_m(grid, initial_data(_gaussian_cfg()))
    fwd = step_rk4(grid, st, CH, 1e-3)
    back = step_rk4(grid, fwd, CH, -1e-3)
    rel = np.max(np.abs(back.m - st.m)) / np.max(np.abs(st.m))
    assert rel < 1e-10


def test_step_richardson_ratio_is_fourth_order():
    # over a fixed window h, the 1-vs-2 and 2-vs-4 substep differences
    # shrink by the global order: ratio 16 +- 20%
    grid = Grid(40.0, 256)
    st = GridState.from_m(grid, initial_data(_gaussian_cfg()))
    h = 0.02

    def advance(state, steps):
        dt = h / steps
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for _ in range(steps):
                state = step_rk4(grid, state, CH, dt)
        return state.m

    d1 = np.max(np.abs(advance(st, 1) - advance(st, 2)))
    d2 = np.max(np.abs(advance(st, 2) - advance(st, 4)))
    assert d1 / d2 == pytest.approx(16.0, rel=0.2)


def test_cfl_warning():
    grid = Grid(40.0, 256)
    st = GridState.from_m(grid, initial_data(_gaussian_cfg()))
    with pytest.warns(RuntimeWarning):
        step_rk4(grid, st, CH, 1.0)


def test_run_wave_breaking_status():
    cfg = _gaussian_cfg(t_final=5.0, blowup_threshold=1.0)
    res = run(cfg)
    assert res.status == STATUS_WAVE_BREAKING
    assert res.series.t[-1] < 5.0  # partial series retained
    assert "sup|u_x|" in res.message


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_run_singularity_guard():
    # u0 touches the floor for an equation singular at u = 0
    cfg = SimConfig(
        length=40.0, n=256, dt=1e-3, t_final=1.0, equation=SINGULAR,
        initial={"kind": "cosine_offset", "params": {"offset": 0.0005, "amplitude": 0.5}},
        min_u_floor=1e-3,
    )
    res = run(cfg)
    assert res.status == STATUS_SINGULAR


def test_guard_not_armed_for_regular_equations():
    # CH evaluates fine at u = 0; gaussian tails below the floor must not abort
    cfg = _gaussian_cfg(t_final=0.05)
    res = run(cfg)
    assert res.status == STATUS_COMPLETED


def test_initial_data_kinds():
    for kind, params in (
        ("gaussian", {"amplitude": 0.5, "width": 2.0}),
        ("cosine_offset", {"offset": 2.0, "amplitude": 0.5}),
        ("mollified_peakon", {"amplitude": 1.0}),
        ("solitary_wave", {"b": 0.5, "c": 1.0}),
    ):
        cfg = SimConfig(
            length=40.0, n=256, dt=1e-3, t_final=1.0,
            equation=CH, initial={"kind": kind, "params": params},
        )
        m = initial_data(cfg)
        assert np.all(np.isfinite(m))
    with pytest.raises(ValueError):
        initial_data(_gaussian_cfg(initial={"kind": "sawtooth", "params": {}}))


def test_series_and_energy_identity():
    # E(mu=2, nu=0) equals the L2 norm of m on the periodic grid
    cfg = _gaussian_cfg(t_final=0.2)
    res = run(cfg)
    s = res.series.arrays()
    assert np.allclose(s["E"], s["L2msq"], rtol=1e-12)


def test_dp_conserves_momentum_not_h1():
    # Degasperis-Procesi keeps the momentum flat while the H1 integral moves
    dp = EquationSpec.from_strings("2*ux", "u")
    cfg = SimConfig(40.0, 512, 1e-3, 2.0, dp,
                    {"kind": "gaussian", "params": {}}, series_dt=0.25)
    res = run(cfg)
    assert ConservedSeries.relative_drift(res.series.M) <= 1e-8
    assert ConservedSeries.relative_drift(res.series.H1sq) >= 1e-3


def test_apriori_bounds_reports():
    assert check_apriori_bounds(ConservedSeries(), l2m_conserved=False).status == "not applicable"
    empty = ConservedSeries()
    assert check_apriori_bounds(empty).status == "degenerate (zero data)"

    cfg = SimConfig(
        length=40.0, n=256, dt=1e-3, t_final=0.5, equation=SINGULAR,
        initial={"kind": "cosine_offset", "params": {"offset": 2.0, "amplitude": 0.5}},
        series_dt=0.1,
    )
    res = run(cfg)
    rep = check_apriori_bounds(res.series)
    assert rep.status == "holds"
    assert rep.sup_u_margin > 0 and rep.sup_ux_margin > 0 and rep.norm_margin > 0


def test_series_csv_round_trip(tmp_path):
    cfg = _gaussian_cfg(t_final=0.05, series_dt=0.01)
    res = run(cfg)
    path = tmp_path / "series.csv"
    write_series_csv(path, res.series)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "t,M,H1sq,L2msq,E,sup_u,sup_ux,min_u"
    back = [float(v) for v in rows[1].split(",")]
    assert back[1] == res.series.M[0]  # 17 digits round-trip exactly


def test_read_config_validation(tmp_path):
    doc = {
        "L": 40.0, "N": 256, "dt": 1e-3, "t_final": 0.1,
        "equation": {"f": "ux", "g": "u"},
        "initial": {"kind": "gaussian", "params": {}},
    }
    cfg = read_config(json.dumps(doc))
    assert cfg.n == 256
    with pytest.raises(ValueError):
        read_config(json.dumps({"L": 40.0}))
    bad = dict(doc, equation={"f": "0", "g": "0"})
    with pytest.raises(ValueError):
        read_config(json.dumps(bad))
