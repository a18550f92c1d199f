//! Strip geometry and the mixed Fourier / finite-difference calculus.
//!
//! Fields live on `[0, lx) × [0, 1]` with `nx` equispaced collocation points
//! in the periodic direction and `ny` nodes in `y` (spacing `dy = 1/(ny-1)`).
//! A [`SpectralField`] stores one complex `y`-profile per integer wavenumber
//! `k ∈ {-nx/2+1, …, nx/2}`; `x`-derivatives are exact multiplier operations,
//! `y`-derivatives are second-order stencils, and `y`-integrals are composite
//! trapezoid sums. The vertical velocity of an incompressible strip flow is
//! recovered from `v(x, y) = -∫_0^y ∂x u dy'`.

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

use crate::{Error, Result};

/// Tolerance for the conjugate-symmetry (real parity) invariant.
pub const PARITY_TOL: f64 = 1e-12;
/// Largest imaginary residue tolerated when transforming back to physical space.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Discretization of the periodic strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64) -> Result<Grid> {
        if nx == 0 || nx % 2 != 0 {
            return Err(Error::Invalid(format!("nx must be even and positive, got {nx}")));
        }
        if ny < 3 {
            return Err(Error::Invalid(format!("ny must be at least 3, got {ny}")));
        }
        if !(lx > 0.0) || !lx.is_finite() {
            return Err(Error::Invalid(format!("lx must be positive, got {lx}")));
        }
        Ok(Grid { nx, ny, lx })
    }

    /// Grid with the default period `lx = 2π`.
    pub fn unit_period(nx: usize, ny: usize) -> Result<Grid> {
        Grid::new(nx, ny, std::f64::consts::TAU)
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        1.0 / (self.ny - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.lx * i as f64 / self.nx as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    /// Integer wavenumber of coefficient row `row`, ordered
    /// `0, 1, …, nx/2, -nx/2+1, …, -1`.
    #[inline]
    pub fn wavenumber(&self, row: usize) -> i64 {
        if row <= self.nx / 2 {
            row as i64
        } else {
            row as i64 - self.nx as i64
        }
    }

    /// Physical wavenumber `k · 2π/lx` of coefficient row `row`.
    #[inline]
    pub fn kx(&self, row: usize) -> f64 {
        self.wavenumber(row) as f64 * std::f64::consts::TAU / self.lx
    }

    /// Row index holding wavenumber `k`.
    #[inline]
    pub fn row_of(&self, k: i64) -> usize {
        if k >= 0 {
            k as usize
        } else {
            (k + self.nx as i64) as usize
        }
    }

    /// Largest integer wavenumber kept by the 2/3 dealiasing rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.nx / 3) as i64
    }

    /// Composite-trapezoid weight of node `j` (includes the `dy` factor).
    #[inline]
    pub fn trap_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny - 1 {
            0.5 * self.dy()
        } else {
            self.dy()
        }
    }

    /// Sharp constant `𝔎` in the discrete Poincaré inequality
    /// `𝔎 ‖f‖² ≤ ½ ‖∂y f‖²` for fields vanishing at both walls, where the
    /// right-hand side is the staggered difference energy of
    /// [`dirichlet_dissipation`]. Equals half the smallest eigenvalue of the
    /// second-difference Dirichlet matrix, `(1 - cos(π dy))/dy²`, which
    /// increases to `π²/2` under refinement.
    pub fn poincare_constant(&self) -> f64 {
        let dy = self.dy();
        (1.0 - (std::f64::consts::PI * dy).cos()) / (dy * dy)
    }
}

/// Real collocation values, `values[[i, j]] = f(x_i, y_j)`.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    pub grid: Grid,
    pub values: Array2<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        PhysicalField {
            grid,
            values: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = PhysicalField::zeros(grid);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                out.values[[i, j]] = f(grid.x(i), grid.y(j));
            }
        }
        out
    }

    /// `L²(S)` norm with the measure `(1/lx) dx dy` (matches the spectral side
    /// of Parseval, see [`l2_norm`]).
    pub fn l2_norm(&self) -> f64 {
        let g = self.grid;
        let mut acc = 0.0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                acc += self.values[[i, j]].powi(2) * g.trap_weight(j);
            }
        }
        (acc / g.nx as f64).sqrt()
    }
}

/// Partial Fourier transform in `x`: one complex `y`-profile per wavenumber.
///
/// `real_parity` records that the field represents real data, i.e.
/// `û(-k) = conj(û(k))` within [`PARITY_TOL`]; the transform of a
/// [`PhysicalField`] sets it, and the multiplier/stencil operations here
/// preserve it.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: Grid,
    /// Shape `(nx, ny)`; row = wavenumber (see [`Grid::wavenumber`]), column = `y` node.
    pub coeffs: Array2<Complex64>,
    pub real_parity: bool,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: Array2::zeros((grid.nx, grid.ny)),
            real_parity: true,
        }
    }

    /// Builds a field from a closure on (integer wavenumber, y); the caller
    /// is responsible for conjugate symmetry if `real_parity` is claimed.
    pub fn from_modes(grid: Grid, real_parity: bool, f: impl Fn(i64, f64) -> Complex64) -> Self {
        let mut out = SpectralField::zeros(grid);
        for row in 0..grid.nx {
            let k = grid.wavenumber(row);
            for j in 0..grid.ny {
                out.coeffs[[row, j]] = f(k, grid.y(j));
            }
        }
        out.real_parity = real_parity;
        out
    }

    /// Largest violation of `û(-k) = conj(û(k))` over all conjugate pairs.
    /// The Nyquist row pairs with itself, so its imaginary part counts.
    pub fn parity_defect(&self) -> f64 {
        let nx = self.grid.nx;
        let mut worst: f64 = 0.0;
        for j in 0..self.grid.ny {
            worst = worst.max(self.coeffs[[0, j]].im.abs());
            worst = worst.max(self.coeffs[[nx / 2, j]].im.abs());
            for k in 1..nx / 2 {
                let d = self.coeffs[[nx - k, j]] - self.coeffs[[k, j]].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Wall values set to zero on every mode (Dirichlet rows are enforced,
    /// not approximated).
    pub fn zero_walls(&mut self) {
        let last = self.grid.ny - 1;
        for row in 0..self.grid.nx {
            self.coeffs[[row, 0]] = Complex64::new(0.0, 0.0);
            self.coeffs[[row, last]] = Complex64::new(0.0, 0.0);
        }
    }
}

/// DFT in `x` at every `y` level, normalized so coefficients are Fourier
/// coefficients: `f(x, y) = Σ_k û(k, y) exp(i k 2π x / lx)`.
pub fn forward_transform(f: &PhysicalField) -> SpectralField {
    let g = f.grid;
    let fft = plan(g.nx, false);
    let mut out = SpectralField::zeros(g);
    let mut buf = vec![Complex64::new(0.0, 0.0); g.nx];
    let scale = 1.0 / g.nx as f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            buf[i] = Complex64::new(f.values[[i, j]], 0.0);
        }
        fft.process(&mut buf);
        for row in 0..g.nx {
            out.coeffs[[row, j]] = buf[row] * scale;
        }
    }
    out.real_parity = true;
    out
}

/// Inverse of [`forward_transform`]. Requires the parity flag and checks that
/// the reconstruction is real to within [`IMAG_RESIDUE_TOL`] (relative to the
/// field scale, with an absolute floor of one).
pub fn inverse_transform(f: &SpectralField) -> Result<PhysicalField> {
    if !f.real_parity {
        return Err(Error::ParityMissing("inverse_transform"));
    }
    let g = f.grid;
    let fft = plan(g.nx, true);
    let mut out = PhysicalField::zeros(g);
    let mut buf = vec![Complex64::new(0.0, 0.0); g.nx];
    let mut max_im: f64 = 0.0;
    let mut max_re: f64 = 0.0;
    for j in 0..g.ny {
        for row in 0..g.nx {
            buf[row] = f.coeffs[[row, j]];
        }
        fft.process(&mut buf);
        for i in 0..g.nx {
            max_im = max_im.max(buf[i].im.abs());
            max_re = max_re.max(buf[i].re.abs());
            out.values[[i, j]] = buf[i].re;
        }
    }
    if max_im > IMAG_RESIDUE_TOL * max_re.max(1.0) {
        return Err(Error::ImaginaryResidue {
            max_imag: max_im,
            tol: IMAG_RESIDUE_TOL,
        });
    }
    Ok(out)
}

/// Spectral `∂x`: multiply row `k` by `i k 2π/lx`. The self-conjugate Nyquist
/// row is zeroed — the multiplier would break real parity there, and
/// dealiasing empties that row in any solver field anyway.
pub fn ddx(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    let mut out = f.clone();
    for row in 0..g.nx {
        let m = if row == g.nx / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, g.kx(row))
        };
        for j in 0..g.ny {
            out.coeffs[[row, j]] = f.coeffs[[row, j]] * m;
        }
    }
    out
}

/// Finite-difference `y`-derivative of order `order ∈ {1, 2}` applied to each
/// mode profile: second-order centered stencils inside, one-sided
/// second-order stencils at the walls.
pub fn ddy(f: &SpectralField, order: usize) -> SpectralField {
    assert!(order == 1 || order == 2, "ddy order must be 1 or 2");
    let g = f.grid;
    let n = g.ny;
    let h = g.dy();
    let mut out = f.clone();
    for row in 0..g.nx {
        let c = f.coeffs.row(row);
        let mut d = out.coeffs.row_mut(row);
        if order == 1 {
            d[0] = (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * h);
            for j in 1..n - 1 {
                d[j] = (c[j + 1] - c[j - 1]) / (2.0 * h);
            }
            d[n - 1] = (3.0 * c[n - 1] - 4.0 * c[n - 2] + c[n - 3]) / (2.0 * h);
        } else {
            let h2 = h * h;
            if n >= 4 {
                d[0] = (2.0 * c[0] - 5.0 * c[1] + 4.0 * c[2] - c[3]) / h2;
                d[n - 1] = (2.0 * c[n - 1] - 5.0 * c[n - 2] + 4.0 * c[n - 3] - c[n - 4]) / h2;
            } else {
                // ny = 3: only the centered stencil is available; it is still
                // exact on quadratics.
                d[0] = (c[0] - 2.0 * c[1] + c[2]) / h2;
                d[n - 1] = (c[n - 3] - 2.0 * c[n - 2] + c[n - 1]) / h2;
            }
            for j in 1..n - 1 {
                d[j] = (c[j - 1] - 2.0 * c[j] + c[j + 1]) / h2;
            }
        }
    }
    out
}

/// Upper limit for [`integrate_y`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralUpper {
    /// Cumulative integral `∫_0^y`, a profile in `y`.
    Y,
    /// Full integral `∫_0^1`, constant in `y`.
    One,
}

/// Composite-trapezoid antiderivative in `y` of each mode profile.
pub fn integrate_y(f: &SpectralField, upper: IntegralUpper) -> SpectralField {
    let g = f.grid;
    let h = g.dy();
    let mut out = f.clone();
    for row in 0..g.nx {
        let c = f.coeffs.row(row);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut cum = vec![acc; g.ny];
        for j in 1..g.ny {
            acc += (c[j - 1] + c[j]) * (0.5 * h);
            cum[j] = acc;
        }
        let mut d = out.coeffs.row_mut(row);
        match upper {
            IntegralUpper::Y => {
                for j in 0..g.ny {
                    d[j] = cum[j];
                }
            }
            IntegralUpper::One => {
                for j in 0..g.ny {
                    d[j] = acc;
                }
            }
        }
    }
    out
}

/// Vertical velocity `v = -∫_0^y ∂x u dy'` of an incompressible strip flow.
///
/// `v(·, 0) = 0` holds exactly by construction. Closure at the top wall is
/// the compatibility condition `∂x ∫_0^1 u dy = 0`; any mode with
/// `|v̂(k, 1)| > tol` is reported as a violation.
pub fn vertical_velocity_from_u(u: &SpectralField, tol: f64) -> Result<SpectralField> {
    let g = u.grid;
    let mut v = integrate_y(&ddx(u), IntegralUpper::Y);
    for row in 0..g.nx {
        for j in 0..g.ny {
            v.coeffs[[row, j]] = -v.coeffs[[row, j]];
        }
    }
    let top = g.ny - 1;
    for row in 0..g.nx {
        let residual = v.coeffs[[row, top]].norm();
        if residual > tol {
            return Err(Error::CompatibilityViolation {
                k: g.wavenumber(row),
                residual,
                tol,
            });
        }
    }
    Ok(v)
}

/// Collocation divergence `∂x u + ∂y v` (first-order `ddy` stencils).
pub fn divergence(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let mut d = ddx(u);
    let dv = ddy(v, 1);
    d.coeffs += &dv.coeffs;
    d
}

/// Zero every mode with `|k| > nx/3` (and the Nyquist row): the 2/3 rule, so
/// that quadratic products formed in physical space alias to nothing.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let g = f.grid;
    let cut = g.dealias_cutoff();
    let mut out = f.clone();
    for row in 0..g.nx {
        let k = g.wavenumber(row);
        if k.abs() > cut || row == g.nx / 2 {
            for j in 0..g.ny {
                out.coeffs[[row, j]] = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// `L²(S)` norm via Parseval: `sqrt(Σ_k ∫_0^1 |û(k, y)|² dy)` with the
/// trapezoid rule in `y`. Matches [`PhysicalField::l2_norm`] to rounding.
pub fn l2_norm(f: &SpectralField) -> f64 {
    l2_norm_sq(f).sqrt()
}

pub fn l2_norm_sq(f: &SpectralField) -> f64 {
    let g = f.grid;
    let mut acc = 0.0;
    for row in 0..g.nx {
        for j in 0..g.ny {
            acc += f.coeffs[[row, j]].norm_sqr() * g.trap_weight(j);
        }
    }
    acc
}

/// Real `L²` inner product `Re Σ_k ∫ û v̂* dy`.
pub fn l2_inner(f: &SpectralField, v: &SpectralField) -> f64 {
    let g = f.grid;
    let mut acc = 0.0;
    for row in 0..g.nx {
        for j in 0..g.ny {
            acc += (f.coeffs[[row, j]] * v.coeffs[[row, j]].conj()).re * g.trap_weight(j);
        }
    }
    acc
}

/// Staggered difference energy `Σ_k Σ_j |û(k, j+1) - û(k, j)|² / dy`: the
/// quadratic form of the second-difference Dirichlet matrix, i.e. the
/// discrete `‖∂y f‖²` that makes the Poincaré constant of
/// [`Grid::poincare_constant`] sharp and the Crank-Nicolson energy balance
/// exact.
pub fn dirichlet_dissipation(f: &SpectralField) -> f64 {
    let g = f.grid;
    let h = g.dy();
    let mut acc = 0.0;
    for row in 0..g.nx {
        for j in 0..g.ny - 1 {
            acc += (f.coeffs[[row, j + 1]] - f.coeffs[[row, j]]).norm_sqr() / h;
        }
    }
    acc
}

/// Spectral `‖∂x f‖²` (exact multiplier form, Nyquist excluded as in [`ddx`]).
pub fn ddx_norm_sq(f: &SpectralField) -> f64 {
    let g = f.grid;
    let mut acc = 0.0;
    for row in 0..g.nx {
        if row == g.nx / 2 {
            continue;
        }
        let kx2 = g.kx(row).powi(2);
        for j in 0..g.ny {
            acc += kx2 * f.coeffs[[row, j]].norm_sqr() * g.trap_weight(j);
        }
    }
    acc
}
