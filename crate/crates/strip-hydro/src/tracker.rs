//! Analyticity-band bookkeeping.
//!
//! Three nondecreasing accumulators eat into an initial band of horizontal
//! analyticity `a`:
//!
//! * `η` grows with the dissipation norms of the anisotropic solution and
//!   defines the weight radius `a - λη`;
//! * `θ` does the same for the hydrostatic solution, radius `a - λθ`;
//! * `ζ = η + θ` drives the comparison weight, radius `a - μζ` with `μ ≥ λ`.
//!
//! A band is *alive* while its accumulator stays below threshold (`η < a/λ`
//! etc.). For small data the accumulators converge and all bands survive to
//! any horizon; the monitors here verify that online, and `apriori_monitor`
//! checks the global exponentially-weighted bounds after a run.

use crate::dyadic::{apply_analytic_weight, DyadicPartition};
use crate::grid::{ddx, ddy, SpectralField};
use crate::norms::{besov_norm, NormSeries, TimeLp};
use crate::{Error, Result};

/// Accepted slack, as a multiplicative constant, in the post-run ratio checks.
pub const MONITOR_BOUND: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// Anisotropic weight, radius `a - λη`.
    Psi,
    /// Hydrostatic weight, radius `a - λθ`.
    Phi,
    /// Comparison weight, radius `a - μζ`.
    Theta,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Psi => "psi",
            Band::Phi => "phi",
            Band::Theta => "theta",
        }
    }
}

/// One sample of the three band-consumption rates.
#[derive(Debug, Clone, Copy)]
pub struct Rates {
    pub eta: f64,
    pub theta: f64,
    pub zeta: f64,
}

impl Rates {
    pub const ZERO: Rates = Rates { eta: 0.0, theta: 0.0, zeta: 0.0 };
}

/// Current band state plus the previous rate sample for trapezoid updates.
#[derive(Debug, Clone)]
pub struct RadiusState {
    pub a: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Poincaré constant of the vertical grid; sets the decay weight `e^{κt}`.
    pub kappa: f64,
    pub t: f64,
    pub eta: f64,
    pub theta: f64,
    pub zeta: f64,
    prev: Option<Rates>,
}

impl RadiusState {
    pub fn new(a: f64, lambda: f64, mu: f64, kappa: f64) -> Result<RadiusState> {
        if !(a > 0.0) {
            return Err(Error::Invalid(format!("band width a must be > 0, got {a}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::Invalid(format!("lambda must be > 0, got {lambda}")));
        }
        if !(mu >= lambda) {
            return Err(Error::Invalid(format!("mu must be >= lambda, got mu = {mu} < {lambda}")));
        }
        Ok(RadiusState {
            a,
            lambda,
            mu,
            kappa,
            t: 0.0,
            eta: 0.0,
            theta: 0.0,
            zeta: 0.0,
            prev: None,
        })
    }

    pub fn radius(&self, band: Band) -> f64 {
        match band {
            Band::Psi => self.a - self.lambda * self.eta,
            Band::Phi => self.a - self.lambda * self.theta,
            Band::Theta => self.a - self.mu * self.zeta,
        }
    }

    pub fn band_alive(&self, band: Band) -> bool {
        self.radius(band) > 0.0
    }

    pub fn alive(&self) -> bool {
        [Band::Psi, Band::Phi, Band::Theta].iter().all(|&b| self.band_alive(b))
    }

    /// Distance of the accumulator below the halfway bootstrap level
    /// `a/(2λ)` (`a/(2μ)` for ζ); negative means the margin is spent.
    pub fn bootstrap_margin(&self, band: Band) -> f64 {
        match band {
            Band::Psi => 0.5 * self.a / self.lambda - self.eta,
            Band::Phi => 0.5 * self.a / self.lambda - self.theta,
            Band::Theta => 0.5 * self.a / self.mu - self.zeta,
        }
    }

    fn require_alive(&self, band: Band) -> Result<()> {
        if self.band_alive(band) {
            Ok(())
        } else {
            Err(Error::BandCollapsed { t: self.t, which: band.name() })
        }
    }

    /// Records the rate sample at the current time without advancing; call
    /// once at `t = 0` so the first trapezoid panel has both endpoints.
    pub fn seed_rates(&mut self, r: Rates) -> Result<()> {
        validate_rates(&r)?;
        self.prev = Some(r);
        Ok(())
    }

    /// Advances the accumulators over one step of length `dt` given the rate
    /// sample at the *new* time: trapezoid against the stored previous
    /// sample, or explicit Euler when unseeded. Exact for constant rates.
    pub fn advance(&mut self, r: Rates, dt: f64) -> Result<()> {
        validate_rates(&r)?;
        if !(dt > 0.0) {
            return Err(Error::Invalid(format!("tracker step needs dt > 0, got {dt}")));
        }
        let (de, dth, dz) = match self.prev {
            Some(p) => (
                0.5 * dt * (p.eta + r.eta),
                0.5 * dt * (p.theta + r.theta),
                0.5 * dt * (p.zeta + r.zeta),
            ),
            None => (dt * r.eta, dt * r.theta, dt * r.zeta),
        };
        self.eta += de;
        self.theta += dth;
        self.zeta += dz;
        self.t += dt;
        self.prev = Some(r);
        Ok(())
    }

    /// Applies the band's current weight `e^{(a - ...)|ξ|}` to a field.
    /// A zero radius is the identity; a negative one means the band is gone.
    pub fn weighted(&self, f: &SpectralField, band: Band) -> Result<SpectralField> {
        let r = self.radius(band);
        if r < 0.0 {
            return Err(Error::BandCollapsed { t: self.t, which: band.name() });
        }
        apply_analytic_weight(f, r)
    }
}

fn validate_rates(r: &Rates) -> Result<()> {
    for (name, v) in [("eta", r.eta), ("theta", r.theta), ("zeta", r.zeta)] {
        if !(v >= 0.0) {
            return Err(Error::Invalid(format!("{name} rate must be >= 0, got {v}")));
        }
    }
    Ok(())
}

/// `η̇ = ε‖∂x u_Ψ‖_{B^{1/2}} + ‖∂y u_Ψ‖_{B^{1/2}}` evaluated on the
/// anisotropic horizontal velocity with the current Ψ radius.
pub fn eta_rate(p: &DyadicPartition, u: &SpectralField, eps: f64, rs: &RadiusState) -> Result<f64> {
    rs.require_alive(Band::Psi)?;
    let w = rs.weighted(u, Band::Psi)?;
    Ok(eps * besov_norm(p, &ddx(&w), 0.5) + besov_norm(p, &ddy(&w, 1), 0.5))
}

/// `θ̇ = ‖∂y u_Φ‖_{B^{1/2}}` on the hydrostatic horizontal velocity.
pub fn theta_rate(p: &DyadicPartition, u: &SpectralField, rs: &RadiusState) -> Result<f64> {
    rs.require_alive(Band::Phi)?;
    let w = rs.weighted(u, Band::Phi)?;
    Ok(besov_norm(p, &ddy(&w, 1), 0.5))
}

/// The ζ integrand is by definition the sum of the other two, each taken
/// with its own weight.
pub fn sample_rates(
    p: &DyadicPartition,
    u_ans: &SpectralField,
    eps: f64,
    u_hydro: &SpectralField,
    rs: &RadiusState,
) -> Result<Rates> {
    rs.require_alive(Band::Theta)?;
    let eta = eta_rate(p, u_ans, eps, rs)?;
    let theta = theta_rate(p, u_hydro, rs)?;
    Ok(Rates { eta, theta, zeta: eta + theta })
}

/// Tracker snapshot at a recorded sample time, plus a least-squares radius
/// estimate of the solution's own spectrum (zero when the spectrum is too
/// narrow to fit).
#[derive(Debug, Clone, Copy)]
pub struct RadiusSample {
    pub t: f64,
    pub eta: f64,
    pub theta: f64,
    pub zeta: f64,
    pub radius_estimate: f64,
}

impl RadiusSample {
    pub fn of(rs: &RadiusState, u: &SpectralField) -> RadiusSample {
        RadiusSample {
            t: rs.t,
            eta: rs.eta,
            theta: rs.theta,
            zeta: rs.zeta,
            radius_estimate: crate::dyadic::estimate_radius(u).unwrap_or(0.0),
        }
    }
}

/// Post-run check of the exponentially-weighted solution bounds.
#[derive(Debug, Clone)]
pub struct AprioriReport {
    /// `sup_t e^{κt} ‖(u_Ψ, εv_Ψ)‖_{B^{1/2}}`.
    pub sup_b_half: f64,
    /// `‖e^{κt} ∂y(u_Ψ, εv_Ψ)‖` in per-block time-L².
    pub dy_l2_b_half: f64,
    /// `ε² ‖e^{κt} (u_Ψ, εv_Ψ)‖` in per-block time-L² at regularity 3/2.
    pub eps2_l2_b_three_half: f64,
    pub data_norm: f64,
    /// The three norms above divided by `data_norm`.
    pub ratios: [f64; 3],
    pub bound: f64,
    pub eta_final: f64,
    /// Bootstrap level `a/(2λ)` that `η` must stay under.
    pub eta_ceiling: f64,
    pub ok: bool,
}

/// Evaluates the weighted a priori bounds from recorded block-norm series:
/// `weighted` samples the pair `(u_Ψ, εv_Ψ)`, `dy_weighted` its `∂y`.
/// All three norms should stay within `MONITOR_BOUND` times the data norm,
/// and `η` within half its band budget.
pub fn apriori_monitor(
    weighted: &NormSeries,
    dy_weighted: &NormSeries,
    eps: f64,
    rs: &RadiusState,
    data_norm: f64,
) -> AprioriReport {
    let sup_w: Vec<f64> = weighted.times().iter().map(|t| (rs.kappa * t).exp()).collect();
    let sq_w: Vec<f64> = weighted.times().iter().map(|t| (2.0 * rs.kappa * t).exp()).collect();
    let sq_dy: Vec<f64> = dy_weighted.times().iter().map(|t| (2.0 * rs.kappa * t).exp()).collect();
    let sup_b_half = weighted.weighted_mixed_norm(0.5, TimeLp::Sup, Some(&sup_w));
    let dy_l2_b_half = dy_weighted.weighted_mixed_norm(0.5, TimeLp::Two, Some(&sq_dy));
    let eps2_l2_b_three_half =
        eps * eps * weighted.weighted_mixed_norm(1.5, TimeLp::Two, Some(&sq_w));
    let ratio = |x: f64| if x == 0.0 { 0.0 } else { x / data_norm };
    let ratios = [ratio(sup_b_half), ratio(dy_l2_b_half), ratio(eps2_l2_b_three_half)];
    let eta_ceiling = 0.5 * rs.a / rs.lambda;
    let ok = ratios.iter().all(|r| r.is_finite() && *r <= MONITOR_BOUND)
        && rs.eta <= eta_ceiling;
    AprioriReport {
        sup_b_half,
        dy_l2_b_half,
        eps2_l2_b_three_half,
        data_norm,
        ratios,
        bound: MONITOR_BOUND,
        eta_final: rs.eta,
        eta_ceiling,
        ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward_transform, Grid, PhysicalField};
    use crate::norms::BlockNorms;

    fn state(a: f64, lambda: f64) -> RadiusState {
        RadiusState::new(a, lambda, 4.0 * lambda, 1.0).unwrap()
    }

    #[test]
    fn construction_validates_parameters() {
        assert!(RadiusState::new(0.0, 4.0, 16.0, 1.0).is_err());
        assert!(RadiusState::new(0.5, -1.0, 16.0, 1.0).is_err());
        assert!(RadiusState::new(0.5, 4.0, 2.0, 1.0).is_err()); // mu < lambda
    }

    #[test]
    fn constant_rates_integrate_exactly() {
        let mut rs = state(0.5, 4.0);
        let r = Rates { eta: 0.01, theta: 0.02, zeta: 0.03 };
        rs.seed_rates(r).unwrap();
        for _ in 0..200 {
            rs.advance(r, 5e-3).unwrap();
        }
        assert!((rs.t - 1.0).abs() < 1e-12);
        assert!((rs.eta - 0.01).abs() < 1e-12);
        assert!((rs.theta - 0.02).abs() < 1e-12);
        assert!((rs.zeta - 0.03).abs() < 1e-12);
        // Zero rates leave everything unchanged.
        let before = (rs.eta, rs.theta, rs.zeta);
        rs.advance(Rates::ZERO, 1.0).unwrap();
        // Trapezoid against the previous nonzero sample contributes half a panel;
        // zero from a freshly seeded zero sample contributes nothing.
        rs.seed_rates(Rates::ZERO).unwrap();
        rs.advance(Rates::ZERO, 1.0).unwrap();
        assert!(rs.eta >= before.0 && rs.theta >= before.1 && rs.zeta >= before.2);
    }

    #[test]
    fn decaying_rate_is_second_order_accurate() {
        // η(1) for rate e^{-t} is 1 - e^{-1}; trapezoid should hit it to O(dt²).
        let exact = 1.0 - (-1.0_f64).exp();
        let mut errs = Vec::new();
        for &n in &[50usize, 100] {
            let dt = 1.0 / n as f64;
            let mut rs = state(0.5, 0.1); // wide band so it never dies
            rs.seed_rates(Rates { eta: 1.0, theta: 0.0, zeta: 1.0 }).unwrap();
            for i in 1..=n {
                let r = (-(i as f64) * dt).exp();
                rs.advance(Rates { eta: r, theta: 0.0, zeta: r }, dt).unwrap();
            }
            errs.push((rs.eta - exact).abs());
        }
        assert!(errs[0] < 1e-4);
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn rejects_negative_rates_and_steps() {
        let mut rs = state(0.5, 4.0);
        assert!(rs.advance(Rates { eta: -1.0, theta: 0.0, zeta: 0.0 }, 0.1).is_err());
        assert!(rs.advance(Rates::ZERO, 0.0).is_err());
    }

    #[test]
    fn bands_die_at_their_thresholds() {
        let mut rs = state(0.4, 4.0);
        assert!(rs.alive());
        rs.eta = 0.1; // exactly a/λ: radius 0, band no longer alive
        assert!(!rs.band_alive(Band::Psi));
        assert!(rs.band_alive(Band::Phi));
        // Weighting at radius exactly 0 is still defined (identity)...
        let g = Grid::unit_period(16, 3).unwrap();
        let f = forward_transform(&PhysicalField::from_fn(g, |x, _| x.cos()));
        let w = rs.weighted(&f, Band::Psi).unwrap();
        assert!((w.coeffs[[1, 0]] - f.coeffs[[1, 0]]).norm() < 1e-15);
        // ...but rate evaluation refuses a dead band.
        let p = DyadicPartition::new(g);
        assert!(matches!(
            eta_rate(&p, &f, 0.1, &rs),
            Err(Error::BandCollapsed { which: "psi", .. })
        ));
        // Doubling λ halves the threshold.
        let rs2 = state(0.4, 8.0);
        assert_eq!(rs2.a / rs2.lambda, 0.05);
    }

    #[test]
    fn comparison_weight_is_dominated_when_it_should_be() {
        let mut rs = state(0.5, 4.0);
        rs.eta = 0.01;
        rs.theta = 0.02;
        rs.zeta = rs.eta + rs.theta; // μζ = 0.48 ≥ λ·max(η, θ) = 0.08
        let r_theta = rs.radius(Band::Theta);
        assert!(r_theta <= rs.radius(Band::Psi).min(rs.radius(Band::Phi)));
        let g = Grid::unit_period(16, 3).unwrap();
        let f = forward_transform(&PhysicalField::from_fn(g, |x, _| x.cos() + (3.0 * x).sin()));
        let wt = rs.weighted(&f, Band::Theta).unwrap();
        let wp = rs.weighted(&f, Band::Psi).unwrap();
        for row in 0..g.nx {
            for col in 0..g.ny {
                assert!(wt.coeffs[[row, col]].norm() <= wp.coeffs[[row, col]].norm() + 1e-15);
            }
        }
    }

    #[test]
    fn eta_rate_matches_a_direct_dyadic_sum() {
        let g = Grid::unit_period(16, 33).unwrap();
        let p = DyadicPartition::new(g);
        let delta = 0.01;
        let u = forward_transform(&PhysicalField::from_fn(g, |x, y| {
            delta * x.cos() * (2.0 * std::f64::consts::PI * y).sin()
        }));
        let mut rs = state(0.3, 4.0);
        rs.eta = 0.025; // radius 0.2
        let eps = 0.1;
        let got = eta_rate(&p, &u, eps, &rs).unwrap();

        // Independent assembly: weight coefficients by hand, differentiate by
        // symbol/stencil, sum 2^{j/2} block norms with raw loops.
        let radius = 0.3 - 4.0 * 0.025;
        let mut expect = 0.0;
        for (deriv, scale) in [("x", eps), ("y", 1.0)] {
            let mut total = 0.0;
            for j in p.jmin..=p.jmax {
                let mut b2 = 0.0;
                for row in 0..g.nx {
                    let k = g.wavenumber(row);
                    if k == 0 || row == g.nx / 2 {
                        continue;
                    }
                    let w = p.phi_at(j, row) * (radius * g.kx(row).abs()).exp();
                    if w == 0.0 {
                        continue;
                    }
                    for col in 0..g.ny {
                        let c = u.coeffs[[row, col]];
                        let d = if deriv == "x" {
                            c.norm() * g.kx(row).abs()
                        } else {
                            // same one-sided/centered stencil as the library
                            let h = g.dy();
                            let cc = |cc: usize| u.coeffs[[row, cc]];
                            let v = if col == 0 {
                                (-3.0 * cc(0) + 4.0 * cc(1) - cc(2)) / (2.0 * h)
                            } else if col == g.ny - 1 {
                                (3.0 * cc(col) - 4.0 * cc(col - 1) + cc(col - 2)) / (2.0 * h)
                            } else {
                                (cc(col + 1) - cc(col - 1)) / (2.0 * h)
                            };
                            v.norm()
                        };
                        b2 += (w * d).powi(2) * g.trap_weight(col);
                    }
                }
                total += ((j as f64) * 0.5).exp2() * b2.sqrt();
            }
            expect += scale * total;
        }
        assert!(
            (got - expect).abs() < 1e-10 * expect.max(1.0),
            "got {got}, expected {expect}"
        );
        // ε → 0 leaves only the ∂y part, which is exactly the θ-rate formula
        // evaluated at the same weight radius.
        let smaller = eta_rate(&p, &u, 0.0, &rs).unwrap();
        assert!(smaller < got);
        let mut rs_phi = state(0.3, 4.0);
        rs_phi.theta = 0.025; // Φ radius matches the Ψ radius above
        let th = theta_rate(&p, &u, &rs_phi).unwrap();
        assert!((smaller - th).abs() < 1e-12 * th.max(1.0));
    }

    #[test]
    fn rate_scales_linearly_with_amplitude() {
        let g = Grid::unit_period(16, 17).unwrap();
        let p = DyadicPartition::new(g);
        let rs = state(0.3, 4.0);
        let u1 = forward_transform(&PhysicalField::from_fn(g, |x, y| {
            0.01 * x.cos() * (std::f64::consts::PI * y).sin()
        }));
        let u3 = forward_transform(&PhysicalField::from_fn(g, |x, y| {
            0.03 * x.cos() * (std::f64::consts::PI * y).sin()
        }));
        let r1 = theta_rate(&p, &u1, &rs).unwrap();
        let r3 = theta_rate(&p, &u3, &rs).unwrap();
        assert!((r3 - 3.0 * r1).abs() < 1e-12 * r3.max(1.0));
    }

    #[test]
    fn monitor_reports_zero_for_zero_data() {
        let g = Grid::unit_period(16, 5).unwrap();
        let p = DyadicPartition::new(g);
        let z = SpectralField::zeros(g);
        let mut series = NormSeries::new();
        let mut dys = NormSeries::new();
        for i in 0..=10 {
            let t = i as f64 * 0.1;
            series.push(t, &BlockNorms::of_field(&p, &z)).unwrap();
            dys.push(t, &BlockNorms::of_field(&p, &z)).unwrap();
        }
        let rs = state(0.5, 4.0);
        let rep = apriori_monitor(&series, &dys, 0.1, &rs, 0.0);
        assert_eq!(rep.ratios, [0.0, 0.0, 0.0]);
        assert!(rep.ok);
    }

    #[test]
    fn monitor_flags_spent_bootstrap_margin() {
        let g = Grid::unit_period(16, 3).unwrap();
        let p = DyadicPartition::new(g);
        let f = forward_transform(&PhysicalField::from_fn(g, |x, _| 0.01 * x.cos()));
        let mut series = NormSeries::new();
        let mut dys = NormSeries::new();
        for i in 0..=4 {
            let t = i as f64 * 0.25;
            series.push(t, &BlockNorms::of_field(&p, &f)).unwrap();
            dys.push(t, &BlockNorms::of_field(&p, &f)).unwrap();
        }
        let mut rs = state(0.5, 4.0);
        rs.eta = 0.9 * rs.a / rs.lambda; // past a/(2λ) but still alive
        let rep = apriori_monitor(&series, &dys, 0.1, &rs, 1.0);
        assert!(!rep.ok);
        assert!(rep.eta_final > rep.eta_ceiling);
    }
}
