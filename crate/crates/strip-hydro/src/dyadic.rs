//! Dyadic (Littlewood-Paley) decomposition of the horizontal spectrum.
//!
//! A smooth bump `φ` supported in the ring `{3/4 ≤ |τ| ≤ 8/3}` and a low
//! cutoff `χ` supported in `{|τ| ≤ 4/3}` tile the frequency line:
//!
//! ```text
//! χ(τ) + Σ_{j ≥ 0} φ(2⁻ʲ τ) = 1        (τ ≠ 0 covered by the sum alone)
//! ```
//!
//! Block `j` of a field is the multiplier `φ(2⁻ʲ |ξ|)` acting on the partial
//! Fourier transform, with `|ξ| = |k| 2π/lx`. The construction is the usual
//! telescoping one, `φ(τ) = χ(τ/2) - χ(τ)`, with `χ` a mollified step that
//! transitions on `[6/5, 4/3]`; every block value downstream (Besov norms,
//! Bernstein ratios, radius fits) inherits these exact support constants.

use crate::grid::{Grid, SpectralField};
use crate::{Error, Result};

/// Upper edge of the `χ` transition; `χ = 0` beyond it.
pub const CHI_UPPER: f64 = 4.0 / 3.0;
/// Lower edge of the `χ` transition; `χ = 1` below it.
pub const CHI_LOWER: f64 = 6.0 / 5.0;
/// Ring bounds that contain `supp φ`; Bernstein ratios must land inside.
pub const RING_LOWER: f64 = 3.0 / 4.0;
pub const RING_UPPER: f64 = 8.0 / 3.0;
/// `exp` argument ceiling for analytic weights.
pub const WEIGHT_EXPONENT_GUARD: f64 = 700.0;

const RADIUS_MIN_BLOCKS: usize = 4;
const RADIUS_RELATIVE_FLOOR: f64 = 1e-14;

/// `exp(-1/s)` continued by zero: the standard C^∞ mollifier kernel.
fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
fn smooth_step(s: f64) -> f64 {
    let b = bump(s);
    if b == 0.0 {
        return 0.0;
    }
    b / (b + bump(1.0 - s))
}

/// Low-frequency cutoff: 1 on `|τ| ≤ 6/5`, 0 on `|τ| ≥ 4/3`, smooth between.
pub fn chi(tau: f64) -> f64 {
    let a = tau.abs();
    if a <= CHI_LOWER {
        1.0
    } else if a >= CHI_UPPER {
        0.0
    } else {
        smooth_step((CHI_UPPER - a) / (CHI_UPPER - CHI_LOWER))
    }
}

/// Ring bump `φ(τ) = χ(τ/2) - χ(τ)`; supported in `{6/5 ≤ |τ| ≤ 8/3}`.
pub fn phi(tau: f64) -> f64 {
    chi(tau / 2.0) - chi(tau)
}

/// Tabulated partition for one grid: the multiplier values `φ(2⁻ʲ |ξ_k|)`
/// for every block `j` and coefficient row `k`.
///
/// The block range is chosen so that every nonzero grid wavenumber is fully
/// covered: `S_jmin + Σ_{jmin ≤ j ≤ jmax} Δ_j = Id` exactly.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    pub grid: Grid,
    pub jmin: i32,
    pub jmax: i32,
    /// `phi_tab[(j - jmin)][row]`.
    phi_tab: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(grid: Grid) -> DyadicPartition {
        let tau_min = grid.kx(1).abs();
        let tau_max = grid.kx(grid.nx / 2).abs();
        let jmin = (tau_min / RING_UPPER).log2().floor() as i32;
        let jmax = (tau_max / CHI_LOWER).log2().ceil() as i32;
        let mut phi_tab = Vec::with_capacity((jmax - jmin + 1) as usize);
        for j in jmin..=jmax {
            let scale = (-j as f64).exp2();
            let row: Vec<f64> = (0..grid.nx)
                .map(|r| phi(scale * grid.kx(r).abs()))
                .collect();
            phi_tab.push(row);
        }
        DyadicPartition { grid, jmin, jmax, phi_tab }
    }

    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        self.jmin..=self.jmax
    }

    pub fn n_blocks(&self) -> usize {
        (self.jmax - self.jmin + 1) as usize
    }

    #[inline]
    pub fn phi_at(&self, j: i32, row: usize) -> f64 {
        self.phi_tab[(j - self.jmin) as usize][row]
    }

    /// `χ(2⁻ʲ |ξ|)` for coefficient row `row`.
    pub fn chi_at(&self, j: i32, row: usize) -> f64 {
        chi((-j as f64).exp2() * self.grid.kx(row).abs())
    }

    /// Nominal center wavenumber of block `j` used as the radius-fit abscissa.
    pub fn block_center(&self, j: i32) -> f64 {
        (j as f64).exp2() * std::f64::consts::TAU / self.grid.lx
    }

    /// `L²` norm of block `j` of `f` (Plancherel in `x`, trapezoid in `y`).
    pub fn block_l2(&self, f: &SpectralField, j: i32) -> f64 {
        let g = self.grid;
        let mut acc = 0.0;
        for row in 0..g.nx {
            let w = self.phi_at(j, row);
            if w == 0.0 {
                continue;
            }
            let w2 = w * w;
            for col in 0..g.ny {
                acc += w2 * f.coeffs[[row, col]].norm_sqr() * g.trap_weight(col);
            }
        }
        acc.sqrt()
    }
}

/// `Δ_j f`: multiply row `k` of the coefficients by `φ(2⁻ʲ |ξ_k|)`.
pub fn dyadic_block(p: &DyadicPartition, f: &SpectralField, j: i32) -> SpectralField {
    let g = f.grid;
    let mut out = f.clone();
    for row in 0..g.nx {
        let w = p.phi_at(j, row);
        for col in 0..g.ny {
            out.coeffs[[row, col]] = f.coeffs[[row, col]] * w;
        }
    }
    out
}

/// `S_j f`: low-pass by `χ(2⁻ʲ |ξ|)`; `S_jmin` plus all blocks reassembles `f`.
pub fn low_block(p: &DyadicPartition, f: &SpectralField, j: i32) -> SpectralField {
    let g = f.grid;
    let mut out = f.clone();
    for row in 0..g.nx {
        let w = p.chi_at(j, row);
        for col in 0..g.ny {
            out.coeffs[[row, col]] = f.coeffs[[row, col]] * w;
        }
    }
    out
}

/// Result of a Bernstein ring check on one block.
#[derive(Debug, Clone, Copy)]
pub struct BernsteinCheck {
    /// `‖∂x Δ_j f‖ / (2ʲ (2π/lx) ‖Δ_j f‖)`.
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BernsteinCheck {
    pub fn ok(&self) -> bool {
        self.ratio >= self.lower && self.ratio <= self.upper
    }
}

/// Verifies the two-sided Bernstein bound on block `j`: since the block's
/// spectrum lives in the ring, differentiating in `x` scales its norm by a
/// factor trapped between the ring edges.
pub fn bernstein_check(
    p: &DyadicPartition,
    f: &SpectralField,
    j: i32,
) -> Result<BernsteinCheck> {
    let g = f.grid;
    let mut num = 0.0;
    let mut den = 0.0;
    for row in 0..g.nx {
        let w = p.phi_at(j, row);
        if w == 0.0 {
            continue;
        }
        // ddx zeroes the Nyquist row; a populated Nyquist coefficient would
        // bias the ratio low, but dealiased fields never carry one.
        let kx2 = if row == g.nx / 2 { 0.0 } else { g.kx(row).powi(2) };
        let w2 = w * w;
        for col in 0..g.ny {
            let m = w2 * f.coeffs[[row, col]].norm_sqr() * g.trap_weight(col);
            den += m;
            num += kx2 * m;
        }
    }
    if den == 0.0 {
        return Err(Error::Invalid(format!("dyadic block {j} is empty")));
    }
    let scale = (j as f64).exp2() * std::f64::consts::TAU / g.lx;
    Ok(BernsteinCheck {
        ratio: (num / den).sqrt() / scale,
        lower: RING_LOWER,
        upper: RING_UPPER,
    })
}

/// Multiplies `û(k, ·)` by `exp(r |k| 2π/lx)`: transfers a horizontal
/// analyticity radius `r` onto the field. Guarded against `exp` overflow at
/// the largest grid wavenumber.
pub fn apply_analytic_weight(f: &SpectralField, r: f64) -> Result<SpectralField> {
    if !(r >= 0.0) {
        return Err(Error::Invalid(format!("analytic weight radius must be >= 0, got {r}")));
    }
    let g = f.grid;
    let max_exp = r * g.kx(g.nx / 2).abs();
    if max_exp > WEIGHT_EXPONENT_GUARD {
        return Err(Error::WeightOverflow { exponent: max_exp });
    }
    let mut out = f.clone();
    for row in 0..g.nx {
        let w = (r * g.kx(row).abs()).exp();
        for col in 0..g.ny {
            out.coeffs[[row, col]] = f.coeffs[[row, col]] * w;
        }
    }
    Ok(out)
}

/// Least-squares estimate of the exponential decay rate of the spectrum:
/// the slope of `log ‖Δ_j f‖` against the block centers `2ʲ (2π/lx)`,
/// negated and clamped at zero. Blocks below `1e-14` relative mass are
/// discarded; at least four must survive.
pub fn estimate_radius(f: &SpectralField) -> Result<f64> {
    let p = DyadicPartition::new(f.grid);
    let norms: Vec<(f64, f64)> = p
        .blocks()
        .map(|j| (p.block_center(j), p.block_l2(f, j)))
        .collect();
    let top = norms.iter().fold(0.0_f64, |m, &(_, b)| m.max(b));
    let pts: Vec<(f64, f64)> = norms
        .into_iter()
        .filter(|&(_, b)| b > RADIUS_RELATIVE_FLOOR * top)
        .map(|(x, b)| (x, b.ln()))
        .collect();
    if pts.len() < RADIUS_MIN_BLOCKS {
        return Err(Error::InsufficientSpectralContent {
            nonzero_blocks: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok((-sxy / sxx).max(0.0))
}

/// Convenience: a field whose spectrum is a pure `y`-independent exponential
/// `e^{-r |k|}`; handy for calibrating the radius fit.
#[cfg(test)]
fn exponential_spectrum(grid: Grid, r: f64) -> SpectralField {
    use rustfft::num_complex::Complex64;
    SpectralField::from_modes(grid, true, |k, _| {
        Complex64::new((-r * k.abs() as f64).exp(), 0.0) * if k == 0 { 0.0 } else { 1.0 }
    })
}
