//! Hydrostatic limit solver.
//!
//! The `ε → 0` system on the strip:
//!
//! ```text
//! ∂t u + u∂x u + v∂y u − ∂yy u + ∂x p = 0
//! ∂y p = 0,   v(x, y) = −∫₀ʸ ∂x u,   ∂x ∫₀¹ u dy = 0,   u = 0 at y ∈ {0, 1}
//! ```
//!
//! The pressure is a diagnostic: `∂y p = 0` makes it a function of `x`
//! alone, fixed by the solvability condition `∫₀¹ ∂t u dy = 0`:
//!
//! ```text
//! ∂x p = ∂y u|_{y=1} − ∂y u|_{y=0} − ∂x ∫₀¹ u² dy.
//! ```
//!
//! Time stepping matches the anisotropic solver: AB2 on
//! `−(u∂xu + v∂yu) − ∂xp` (Euler on the first step), Crank-Nicolson on
//! `∂yy` with Dirichlet rows. The discrete update does not preserve the
//! column constraint `∫₀¹ û(k, ·) dy = 0` exactly, so each step removes the
//! residual column mean along a fixed wall-compatible profile and records
//! how much was removed (expected `O(dt·dy²)`).

use rustfft::num_complex::Complex64;

use crate::ans::{advect, cn_solve, smallness_gate, viscous_apply, BandParams, CFL_LIMIT};
use crate::dyadic::{apply_analytic_weight, DyadicPartition};
use crate::grid::{
    ddx, ddy, dealias, dirichlet_dissipation, forward_transform, inverse_transform, l2_norm,
    l2_norm_sq, vertical_velocity_from_u, Grid, PhysicalField, SpectralField,
};
use crate::norms::{besov_norm, BlockNorms, NormSeries, TimeLp};
use crate::tracker::{theta_rate, Band, RadiusSample, RadiusState, Rates};
use crate::{Error, Result};

const COMPAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct HydroConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    /// Tolerance on `|v̂(k, 1)|` when reconstructing the vertical velocity.
    pub compat_tol: f64,
    /// Test hook: pure Crank-Nicolson heat update, no advection, pressure,
    /// or column-mean maintenance.
    pub linear_only: bool,
}

impl HydroConfig {
    pub fn new(grid: Grid, dt: f64, t_end: f64) -> HydroConfig {
        HydroConfig { grid, dt, t_end, compat_tol: COMPAT_TOL, linear_only: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Invalid(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.compat_tol > 0.0) {
            return Err(Error::Invalid("compat_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HydroStepDiag {
    /// Time after the step.
    pub t: f64,
    /// `|½Δ‖u‖² + dt‖∂y ū‖²|` at the CN midpoint.
    pub energy_residual: f64,
    /// Largest column mean `|∫₀¹ û(k, ·) dy|` removed after the update.
    pub compat_residual: f64,
}

#[derive(Debug, Clone)]
pub struct HydroState {
    pub grid: Grid,
    pub t: f64,
    pub u: SpectralField,
    /// Hydrostatic pressure of the current `u`, stored as a `y`-constant
    /// profile so `∂y p = 0` holds identically.
    pub p: SpectralField,
    pub steps: usize,
    prev_tendency: Option<SpectralField>,
}

impl HydroState {
    pub fn energy(&self) -> f64 {
        0.5 * l2_norm_sq(&self.u)
    }

    /// Vertical velocity reconstructed from the divergence constraint.
    pub fn vertical_velocity(&self, tol: f64) -> Result<SpectralField> {
        vertical_velocity_from_u(&self.u, tol)
    }
}

fn check_walls(u: &SpectralField) -> Result<()> {
    let g = u.grid;
    let scale = u.max_coeff_norm().max(1.0);
    for row in 0..g.nx {
        for col in [0, g.ny - 1] {
            if u.coeffs[[row, col]].norm() > 1e-10 * scale {
                return Err(Error::Invalid(format!(
                    "hydrostatic data must vanish at the walls; row {row} has |{:.3e}|",
                    u.coeffs[[row, col]].norm()
                )));
            }
        }
    }
    Ok(())
}

/// Removes the column mean of every oscillating mode along a fixed
/// wall-compatible profile `sin(πy)/∫sin(πy)`; returns the largest mean
/// removed.
fn remove_column_means(u: &mut SpectralField) -> f64 {
    let g = u.grid;
    let profile: Vec<f64> = (0..g.ny).map(|j| (std::f64::consts::PI * g.y(j)).sin()).collect();
    let profile_mass: f64 =
        (0..g.ny).map(|j| profile[j] * g.trap_weight(j)).sum();
    let mut worst: f64 = 0.0;
    for row in 0..g.nx {
        if g.wavenumber(row) == 0 {
            continue;
        }
        let mut mean = Complex64::new(0.0, 0.0);
        for j in 0..g.ny {
            mean += u.coeffs[[row, j]] * g.trap_weight(j);
        }
        worst = worst.max(mean.norm());
        let scale = mean / profile_mass;
        for j in 0..g.ny {
            u.coeffs[[row, j]] -= scale * profile[j];
        }
    }
    worst
}

/// Validates and normalizes initial data: Dirichlet walls, dealiasing, the
/// column-mean constraint (enforced exactly after a projection pass).
pub fn initial_data_hydro(u0: &SpectralField, compat_tol: f64) -> Result<HydroState> {
    check_walls(u0)?;
    let mut u = dealias(u0);
    // Rejects data whose column means exceed the tolerance before cleanup.
    vertical_velocity_from_u(&u, compat_tol)?;
    remove_column_means(&mut u);
    let p = pressure_solve_hydro(&u)?;
    Ok(HydroState { grid: u.grid, t: 0.0, u, p, steps: 0, prev_tendency: None })
}

/// Hook-mode data: walls and dealiasing only. The linear update touches no
/// pressure and maintains no column constraint, so none is imposed.
fn linear_initial_data(u0: &SpectralField) -> Result<HydroState> {
    check_walls(u0)?;
    let u = dealias(u0);
    let p = SpectralField::zeros(u.grid);
    Ok(HydroState { grid: u.grid, t: 0.0, u, p, steps: 0, prev_tendency: None })
}

/// Hydrostatic pressure of `u`: per oscillating mode,
/// `p̂(k) = ĝ(k)/(ik)` with
/// `ĝ(k) = [∂yû]₀¹(k) − ik·∫₀¹ (u²)^(k, y) dy`,
/// wall slopes by one-sided 3-point stencils, the square dealiased, the
/// integral by the trapezoid rule. Zero gauge for the mean mode.
pub fn pressure_solve_hydro(u: &SpectralField) -> Result<SpectralField> {
    let g = u.grid;
    let n = g.ny;
    let dy = g.dy();
    let up = inverse_transform(u)?;
    let mut sq = PhysicalField::zeros(g);
    for i in 0..g.nx {
        for j in 0..n {
            sq.values[[i, j]] = up.values[[i, j]] * up.values[[i, j]];
        }
    }
    let sq_hat = dealias(&forward_transform(&sq));
    let mut p = SpectralField::zeros(g);
    p.real_parity = u.real_parity;
    for row in 0..g.nx {
        let k = g.wavenumber(row);
        if k == 0 || row == g.nx / 2 {
            continue;
        }
        let bottom = (-3.0 * u.coeffs[[row, 0]] + 4.0 * u.coeffs[[row, 1]]
            - u.coeffs[[row, 2]])
            / (2.0 * dy);
        let top = (3.0 * u.coeffs[[row, n - 1]] - 4.0 * u.coeffs[[row, n - 2]]
            + u.coeffs[[row, n - 3]])
            / (2.0 * dy);
        let mut integral = Complex64::new(0.0, 0.0);
        for j in 0..n {
            integral += sq_hat.coeffs[[row, j]] * g.trap_weight(j);
        }
        let ikx = Complex64::new(0.0, g.kx(row));
        let ghat = top - bottom - ikx * integral;
        let val = ghat / ikx;
        for j in 0..n {
            p.coeffs[[row, j]] = val;
        }
    }
    Ok(p)
}

/// One AB2/CN step of the hydrostatic system.
pub fn step_hydro(state: &HydroState, cfg: &HydroConfig) -> Result<(HydroState, HydroStepDiag)> {
    if !state.u.is_finite() {
        return Err(Error::Instability {
            t: state.t,
            detail: format!(
                "non-finite hydrostatic coefficients (max |û| = {:.3e})",
                state.u.max_coeff_norm()
            ),
        });
    }
    let g = state.grid;
    let dt = cfg.dt;
    let e_old = state.energy();

    let mut rhs = state.u.clone();
    let mut new_prev = None;
    let mut p = SpectralField::zeros(g);
    if !cfg.linear_only {
        let v = state.vertical_velocity(cfg.compat_tol)?;
        p = pressure_solve_hydro(&state.u)?;
        let up = inverse_transform(&state.u)?;
        let vp = inverse_transform(&v)?;
        let mut tendency = advect(&up, &vp, &state.u)?;
        let px = ddx(&p);
        for row in 0..g.nx {
            for j in 0..g.ny {
                tendency.coeffs[[row, j]] -= px.coeffs[[row, j]];
            }
        }
        let ab2 = match &state.prev_tendency {
            Some(prev) => {
                let mut a = tendency.clone();
                for row in 0..g.nx {
                    for j in 0..g.ny {
                        a.coeffs[[row, j]] =
                            1.5 * tendency.coeffs[[row, j]] - 0.5 * prev.coeffs[[row, j]];
                    }
                }
                a
            }
            None => tendency.clone(),
        };
        for row in 0..g.nx {
            for j in 0..g.ny {
                rhs.coeffs[[row, j]] += dt * ab2.coeffs[[row, j]];
            }
        }
        new_prev = Some(tendency);
    }
    let lu = viscous_apply(&state.u, 0.0);
    for row in 0..g.nx {
        for j in 0..g.ny {
            rhs.coeffs[[row, j]] += 0.5 * dt * lu.coeffs[[row, j]];
        }
    }
    let u_star = cn_solve(&rhs, dt, 0.0);

    let mut ubar = u_star.clone();
    for row in 0..g.nx {
        for j in 0..g.ny {
            ubar.coeffs[[row, j]] = 0.5 * (ubar.coeffs[[row, j]] + state.u.coeffs[[row, j]]);
        }
    }
    let dissipation = dirichlet_dissipation(&ubar);

    let mut u = u_star;
    let mut compat_residual = 0.0;
    if !cfg.linear_only {
        compat_residual = remove_column_means(&mut u);
    }
    if !u.is_finite() {
        return Err(Error::Instability {
            t: state.t + dt,
            detail: "non-finite hydrostatic coefficients after step".into(),
        });
    }
    let e_new = 0.5 * l2_norm_sq(&u);
    let next = HydroState {
        grid: g,
        t: state.t + dt,
        u,
        p,
        steps: state.steps + 1,
        prev_tendency: new_prev,
    };
    let diag = HydroStepDiag {
        t: next.t,
        energy_residual: (e_new - e_old + dt * dissipation).abs(),
        compat_residual,
    };
    Ok((next, diag))
}

/// Discrete tendency `∂t u = ∂yy u − u∂xu − v∂yu − ∂xp` of the current
/// state, wall rows zero (the walls are pinned, so their true rate is zero).
pub fn reconstructed_rate(state: &HydroState, compat_tol: f64) -> Result<SpectralField> {
    let g = state.grid;
    let v = state.vertical_velocity(compat_tol)?;
    let p = pressure_solve_hydro(&state.u)?;
    let up = inverse_transform(&state.u)?;
    let vp = inverse_transform(&v)?;
    let mut rate = advect(&up, &vp, &state.u)?;
    let lap = viscous_apply(&state.u, 0.0);
    let px = ddx(&p);
    for row in 0..g.nx {
        for j in 0..g.ny {
            rate.coeffs[[row, j]] += lap.coeffs[[row, j]] - px.coeffs[[row, j]];
        }
    }
    rate.zero_walls();
    Ok(rate)
}

/// Chemin-Lerner bound satisfied by the Φ-weighted reconstructed rate:
/// `‖e^{κt}∂t u_Φ‖_{L̃²_T(B^{3/2})} ≤ 10·(‖e^{a|Dx|}∂y u0‖_{B^{3/2}} +
/// ‖e^{a|Dx|}u0‖_{B^{5/2}})`.
pub fn dt_u_norm_monitor(series: &NormSeries, kappa: f64) -> f64 {
    let w: Vec<f64> = series.times().iter().map(|t| (2.0 * kappa * t).exp()).collect();
    series.weighted_mixed_norm(1.5, TimeLp::Two, Some(&w))
}

pub struct HydroRunSummary {
    pub state: HydroState,
    pub tracker: RadiusState,
    /// Block norms of `u` at sample times (decay diagnostics).
    pub series: NormSeries,
    /// Block norms of the Φ-weighted `u`.
    pub weighted_series: NormSeries,
    /// Block norms of the Φ-weighted reconstructed rate `∂t u`.
    pub rate_weighted_series: NormSeries,
    /// `(t, ‖u‖_{L²})` at sample times.
    pub l2_series: Vec<(f64, f64)>,
    /// Tracker snapshots at the sample times.
    pub radius_samples: Vec<RadiusSample>,
    pub diags: Vec<HydroStepDiag>,
    /// `‖e^{a|Dx|}u0‖_{B^{1/2}}` (smallness-gate value).
    pub data_weighted_norm: f64,
    /// Ceiling for `dt_u_norm_monitor` derived from the initial data.
    pub rate_monitor_bound: f64,
    pub max_compat_residual: f64,
}

/// Runs the hydrostatic solver to `t_end`, recording block norms every
/// `sample_every` steps (plus first and last), advancing the Φ tracker each
/// step.
pub fn run_hydro(
    cfg: &HydroConfig,
    u0: &SpectralField,
    band: BandParams,
    sample_every: usize,
    mut on_sample: impl FnMut(usize, &HydroState) -> Result<()>,
) -> Result<HydroRunSummary> {
    cfg.validate()?;
    let part = DyadicPartition::new(cfg.grid);
    let gate_norm = smallness_gate(&part, u0, band.a)?;
    // The hook integrates the bare heat update, so it needs neither the
    // column constraint (which would erase the lowest Dirichlet mode) nor
    // the advective CFL gate.
    let mut state = if cfg.linear_only {
        linear_initial_data(u0)?
    } else {
        initial_data_hydro(u0, cfg.compat_tol)?
    };
    if !cfg.linear_only {
        let cfl = hydro_cfl(&state, cfg)?;
        if cfl > CFL_LIMIT {
            return Err(Error::Invalid(format!(
                "advective CFL estimate {cfl:.3} exceeds {CFL_LIMIT}; reduce dt"
            )));
        }
    }
    let mut tracker =
        RadiusState::new(band.a, band.lambda, band.mu, cfg.grid.poincare_constant())?;
    tracker.seed_rates(hydro_rates(&part, &state, &tracker)?)?;

    let w_dyu0 = apply_analytic_weight(&ddy(&state.u, 1), band.a)?;
    let w_u0 = apply_analytic_weight(&state.u, band.a)?;
    let bound = 10.0 * (besov_norm(&part, &w_dyu0, 1.5) + besov_norm(&part, &w_u0, 2.5));

    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let every = sample_every.max(1);
    let mut summary = HydroRunSummary {
        tracker: tracker.clone(),
        series: NormSeries::new(),
        weighted_series: NormSeries::new(),
        rate_weighted_series: NormSeries::new(),
        l2_series: Vec::new(),
        radius_samples: Vec::new(),
        diags: Vec::with_capacity(n_steps),
        data_weighted_norm: gate_norm,
        rate_monitor_bound: bound,
        max_compat_residual: 0.0,
        state: state.clone(),
    };
    record_hydro_sample(&part, &state, &tracker, cfg, &mut summary)?;
    on_sample(0, &state)?;
    for step in 1..=n_steps {
        let (next, diag) = step_hydro(&state, cfg)?;
        state = next;
        let rates = hydro_rates(&part, &state, &tracker)?;
        tracker.advance(rates, cfg.dt)?;
        summary.max_compat_residual = summary.max_compat_residual.max(diag.compat_residual);
        summary.diags.push(diag);
        if step % every == 0 || step == n_steps {
            record_hydro_sample(&part, &state, &tracker, cfg, &mut summary)?;
            on_sample(step, &state)?;
        }
    }
    summary.state = state;
    summary.tracker = tracker;
    Ok(summary)
}

fn hydro_cfl(state: &HydroState, cfg: &HydroConfig) -> Result<f64> {
    let up = inverse_transform(&state.u)?;
    let vp = inverse_transform(&state.vertical_velocity(cfg.compat_tol)?)?;
    let umax = up.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let vmax = vp.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let g = state.grid;
    Ok(cfg.dt * (umax * g.nx as f64 / g.lx + vmax / g.dy()))
}

fn hydro_rates(p: &DyadicPartition, state: &HydroState, rs: &RadiusState) -> Result<Rates> {
    let theta = theta_rate(p, &state.u, rs)?;
    Ok(Rates { eta: 0.0, theta, zeta: theta })
}

fn record_hydro_sample(
    part: &DyadicPartition,
    state: &HydroState,
    tracker: &RadiusState,
    cfg: &HydroConfig,
    summary: &mut HydroRunSummary,
) -> Result<()> {
    let bn = BlockNorms::of_field(part, &state.u);
    summary.series.push(state.t, &bn)?;
    summary.l2_series.push((state.t, l2_norm(&state.u)));
    summary.radius_samples.push(RadiusSample::of(tracker, &state.u));
    let wu = tracker.weighted(&state.u, Band::Phi)?;
    summary.weighted_series.push(state.t, &BlockNorms::of_field(part, &wu))?;
    if !cfg.linear_only {
        let rate = reconstructed_rate(state, cfg.compat_tol)?;
        let wrate = tracker.weighted(&rate, Band::Phi)?;
        summary
            .rate_weighted_series
            .push(state.t, &BlockNorms::of_field(part, &wrate))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos_sin_data(g: Grid, delta: f64, k0: f64) -> SpectralField {
        forward_transform(&PhysicalField::from_fn(g, |x, y| {
            delta * (k0 * x).cos() * (2.0 * PI * y).sin()
        }))
    }

    #[test]
    fn pressure_matches_the_symbolic_formula() {
        // u = sin(x)sin(πy): the wall slopes contribute −2π sin x, the
        // column of u² contributes −½ sin 2x, so p = 2π cos x + ¼ cos 2x.
        let err_at = |ny: usize| -> f64 {
            let g = Grid::unit_period(16, ny).unwrap();
            let u = forward_transform(&PhysicalField::from_fn(g, |x, y| {
                x.sin() * (PI * y).sin()
            }));
            let p = pressure_solve_hydro(&u).unwrap();
            let pp = inverse_transform(&p).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..g.nx {
                let expect = 2.0 * PI * g.x(i).cos() + 0.25 * (2.0 * g.x(i)).cos();
                // p is y-constant; check the bottom row.
                worst = worst.max((pp.values[[i, 0]] - expect).abs());
            }
            worst
        };
        // The one-sided wall slopes dominate the error: for sin(πy) each
        // contributes dy²·π³/3, so the sharp constant is 2π³/3 ≈ 20.7.
        let e1 = err_at(33);
        let e2 = err_at(65);
        let dy2 = (1.0 / 32.0_f64).powi(2);
        assert!(e1 < 30.0 * dy2, "error {e1} at ny = 33");
        let ratio = e1 / e2;
        assert!(ratio > 2.5 && ratio < 6.0, "refinement ratio {ratio}");
    }

    #[test]
    fn pressure_of_x_independent_flow_is_zero() {
        let g = Grid::unit_period(16, 33).unwrap();
        let u = forward_transform(&PhysicalField::from_fn(g, |_, y| (PI * y).sin()));
        let p = pressure_solve_hydro(&u).unwrap();
        assert_eq!(p.max_coeff_norm(), 0.0);
    }

    #[test]
    fn pressure_has_no_vertical_variation() {
        // Bitwise, not just small: every y-column of p̂ repeats column 0.
        let g = Grid::unit_period(16, 33).unwrap();
        let s = initial_data_hydro(&cos_sin_data(g, 0.5, 1.0), 1e-8).unwrap();
        let p = pressure_solve_hydro(&s.u).unwrap();
        for row in 0..g.nx {
            for j in 1..g.ny {
                assert_eq!(p.coeffs[[row, j]], p.coeffs[[row, 0]], "row {row}, j {j}");
            }
        }
    }

    #[test]
    fn initial_data_enforces_the_column_constraint() {
        let g = Grid::unit_period(16, 33).unwrap();
        let s = initial_data_hydro(&cos_sin_data(g, 1e-2, 1.0), 1e-8).unwrap();
        // Column means of oscillating modes vanish to roundoff, so the
        // reconstructed v satisfies v(·, 1) = 0 far below the tolerance.
        let v = s.vertical_velocity(1e-13).unwrap();
        for row in 0..g.nx {
            assert!(v.coeffs[[row, g.ny - 1]].norm() < 1e-13);
        }
        let bad = forward_transform(&PhysicalField::from_fn(g, |x, y| {
            x.cos() * y * (1.0 - y)
        }));
        assert!(matches!(
            initial_data_hydro(&bad, 1e-8),
            Err(Error::CompatibilityViolation { .. })
        ));
    }

    #[test]
    fn linear_hook_decays_at_the_discrete_heat_rate() {
        let g = Grid::unit_period(16, 33).unwrap();
        let dt = 2e-3;
        let mut cfg = HydroConfig::new(g, dt, 1.0);
        cfg.linear_only = true;
        let u0 = forward_transform(&PhysicalField::from_fn(g, |x, y| {
            1e-2 * x.cos() * (PI * y).sin()
        }));
        let mut state = HydroState {
            grid: g,
            t: 0.0,
            u: u0,
            p: SpectralField::zeros(g),
            steps: 0,
            prev_tendency: None,
        };
        let dy = g.dy();
        let mu = (2.0 - 2.0 * (PI * dy).cos()) / (dy * dy);
        let factor = (1.0 - 0.5 * dt * mu) / (1.0 + 0.5 * dt * mu);
        for _ in 0..5 {
            let before = l2_norm(&state.u);
            let (next, _) = step_hydro(&state, &cfg).unwrap();
            state = next;
            let ratio = l2_norm(&state.u) / before;
            assert!((ratio - factor).abs() < 1e-12, "ratio {ratio} vs {factor}");
        }
    }

    #[test]
    fn small_data_steps_satisfy_the_energy_identity() {
        let g = Grid::unit_period(16, 33).unwrap();
        let dt = 1e-3;
        let cfg = HydroConfig::new(g, dt, 1.0);
        let mut state = initial_data_hydro(&cos_sin_data(g, 1e-2, 1.0), 1e-8).unwrap();
        let budget = 10.0 * dt * dt * dt;
        for _ in 0..50 {
            let (next, diag) = step_hydro(&state, &cfg).unwrap();
            state = next;
            assert!(
                diag.energy_residual <= budget,
                "residual {} at t = {}",
                diag.energy_residual,
                diag.t
            );
            // The drift the re-projection removes stays O(dt·dy²).
            assert!(diag.compat_residual < 10.0 * dt * g.dy() * g.dy());
        }
    }

    #[test]
    fn decay_rate_tracks_the_lowest_vertical_mode() {
        let g = Grid::unit_period(16, 33).unwrap();
        let cfg = HydroConfig::new(g, 2e-3, 1.0);
        let u0 = cos_sin_data(g, 1e-2, 1.0);
        let summary = run_hydro(&cfg, &u0, BandParams::default(), 5, |_, _| Ok(())).unwrap();
        let rate = crate::harness::fit_decay(&summary.series, 0.5, (0.5, 1.0)).unwrap();
        // sin(2πy) couples to modes decaying at ≥ π²; demand half of that
        // with slack.
        assert!(rate >= PI * PI / 2.0 - 0.5, "rate {rate}");
        assert!(summary.tracker.alive());
    }

    #[test]
    fn rate_monitor_stays_under_its_data_bound() {
        let g = Grid::unit_period(16, 33).unwrap();
        let cfg = HydroConfig::new(g, 2e-3, 0.5);
        let u0 = cos_sin_data(g, 1e-2, 1.0);
        let summary = run_hydro(&cfg, &u0, BandParams::default(), 5, |_, _| Ok(())).unwrap();
        let got = dt_u_norm_monitor(&summary.rate_weighted_series, g.poincare_constant());
        assert!(
            got <= summary.rate_monitor_bound,
            "monitor {got} vs bound {}",
            summary.rate_monitor_bound
        );
        assert!(got > 0.0);
    }
}
