use machclock::clocks::{dwell_time_estimate, temperature_estimate};
use machclock::dynamics::{
    bloch, clock_bound, evolve, qubit_distance_rate, statistical_distance_rate, two_level_closed_form,
    two_level_steady_x3,
};
use machclock::models::{build_two_level_thermal, qubit_temperature};
use machclock::quantum::{sigma_x, sigma_y, sigma_z};
use machclock::{DensityMatrix, HilbertSpace, Operator, C64};

use super::{pow10_floor, time_grid, whole_steps, Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

fn state_from_bloch(x: [f64; 3]) -> machclock::Result<DensityMatrix> {
    let id = Operator::identity(&HilbertSpace::qubit());
    let m = (id.matrix()
        + sigma_x().matrix() * C64::new(x[0], 0.0)
        + sigma_y().matrix() * C64::new(x[1], 0.0)
        + sigma_z().matrix() * C64::new(x[2], 0.0))
        * C64::new(0.5, 0.0);
    DensityMatrix::new(HilbertSpace::qubit(), m)
}

/// Thermalising qubit: deterministic Bloch vector against the closed form,
/// its statistical-distance rate and the resulting clock bound.
pub(super) fn run(params: &mut Params, _run: &RunSettings) -> Result<Outcome, CliError> {
    let gamma = params.checked("model.gamma", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let nbar = params.checked("model.nbar", 1.0, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let eps = params.checked("model.eps", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let x0 = [
        params.get("model.x1_0", 0.0)?,
        params.get("model.x2_0", 0.0)?,
        params.get("model.x3_0", 0.8)?,
    ];
    if x0.iter().map(|v| v * v).sum::<f64>() > 1.0 {
        return Err(params.error("model.x3_0", "initial Bloch vector is longer than 1").into());
    }
    let big = gamma * (2.0 * nbar + 1.0);
    let dt0 = pow10_floor(1e-3 / big);
    let grid = time_grid(params, whole_steps(5.0 / big, dt0), dt0, 10)?;
    params.finish()?;

    let model = build_two_level_thermal(gamma, nbar)?;
    let rho0 = state_from_bloch(x0)?;
    let res = evolve(&model, &rho0, &grid)?;

    let x3_inf = two_level_steady_x3(nbar);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 11];
    let (mut max_err, mut max_rate_err) = (0.0f64, 0.0f64);
    for (t, rho) in res.times.iter().zip(&res.states) {
        let x = bloch(rho)?;
        let exact = two_level_closed_form(x0, gamma, nbar, *t);
        let dx = [-0.5 * big * exact[0], -0.5 * big * exact[1], -big * (exact[2] - x3_inf)];
        for k in 0..3 {
            max_err = max_err.max((x[k] - exact[k]).abs());
        }
        let rate = statistical_distance_rate(rho, &model.apply(rho)?)?;
        let rate_exact = qubit_distance_rate(exact, dx);
        if rate_exact > 1e-12 {
            max_rate_err = max_rate_err.max((rate / rate_exact - 1.0).abs());
        }
        let row = [
            *t,
            x[0],
            x[1],
            x[2],
            exact[0],
            exact[1],
            exact[2],
            rate,
            rate_exact,
            clock_bound(rate)?,
            rho.trace() - 1.0,
        ];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    let names = [
        "t", "x1", "x2", "x3", "x1_exact", "x2_exact", "x3_exact", "ds_dt", "ds_dt_exact", "delta_t_bound",
        "trace_drift",
    ];
    let mut out = Outcome {
        series: Table::from_columns(names.iter().map(|n| n.to_string()).zip(cols).collect()),
        ..Default::default()
    };
    out.checks.push(Check::at_most("bloch_closed_form_max_abs", max_err, 1e-8));
    out.checks.push(Check::at_most("distance_rate_max_rel", max_rate_err, 1e-6));
    out.checks.push(Check::at_most("trace_drift", res.diagnostics.max_trace_drift, 1e-10));

    out.estimate("Gamma", big);
    out.estimate("x3_inf", x3_inf);
    out.estimate("dwell_time", dwell_time_estimate(gamma, nbar)?);
    let x_final = bloch(res.final_state())?;
    if let Ok(temp) = qubit_temperature(x_final[2], eps) {
        out.estimate("temperature_final", temp);
    }
    if nbar > 0.0 {
        let bath = qubit_temperature(x3_inf, eps)?;
        out.estimate("temperature_bath", bath);
        // the dwell-time thermometer inverted at the bath's own dwell time
        let tau = 1.0 / (gamma * nbar);
        out.estimate("temperature_from_dwell_high_t", temperature_estimate(tau, eps, gamma)?);
    }
    out.estimate("diagnostics", res.diagnostics);

    let s = &out.series;
    let col = |n: &str| s.column(n).unwrap_or_default();
    out.plots.push(Plot::new(
        "bloch",
        "Bloch components",
        "x",
        col("t"),
        vec![("x1", col("x1")), ("x3", col("x3")), ("x3 exact", col("x3_exact"))],
    ));
    out.plots.push(Plot::new(
        "distance_rate",
        "statistical distance rate",
        "ds/dt",
        col("t"),
        vec![("numeric", col("ds_dt")), ("closed form", col("ds_dt_exact"))],
    ));
    Ok(out)
}
