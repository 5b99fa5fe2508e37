//! Periodic Fourier collocation on `[-ℓ, ℓ)`.
//!
//! The periodic box stands in for the real line. Wavenumbers follow the
//! `exp(-2πi x ξ)` transform convention, so `ξ_k = k / (2ℓ)` and the
//! derivative has symbol `2πiξ`.
//!
//! Besides the complex FFT layout, fields can be expanded in an orthonormal
//! *real* Fourier basis. Dense operators are assembled in that basis; see
//! [`SpectralGrid::to_coefficients`] for the index layout.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct SpectralGrid {
    n: usize,
    half_length: f64,
    spacing: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("half_length", &self.half_length)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

/// Builds a grid of `n` points on `[-half_length, half_length)`.
pub fn make_grid(n: usize, half_length: f64) -> Result<Arc<SpectralGrid>> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("n = {n} must be even")));
    }
    if n < 8 {
        return Err(Error::InvalidGrid(format!("n = {n} must be at least 8")));
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "half_length = {half_length} must be positive"
        )));
    }
    let period = 2.0 * half_length;
    let wavenumbers = (0..n)
        .map(|k| signed_index(k, n) as f64 / period)
        .collect();
    let mut planner = FftPlanner::new();
    Ok(Arc::new(SpectralGrid {
        n,
        half_length,
        spacing: period / n as f64,
        wavenumbers,
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }))
}

/// FFT-layout index to signed frequency index in `[-n/2, n/2)`.
fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl SpectralGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `ξ_k` in FFT layout: `0, 1/(2ℓ), …, (n/2-1)/(2ℓ), -(n/2)/(2ℓ), …, -1/(2ℓ)`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Index of the collocation point `x = 0`.
    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    /// Index of the Nyquist mode in FFT layout.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        debug_assert_eq!(spectrum.len(), self.n);
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.n as f64;
        spectrum.iter().map(|z| z.re * scale).collect()
    }

    /// Number of real Fourier modes `k` with `1 ≤ k < n/2` (each carries a
    /// cosine and a sine).
    pub fn paired_modes(&self) -> usize {
        self.n / 2 - 1
    }

    /// Angular wavenumber `2πk/(2ℓ)` of paired mode `k`.
    pub fn angular_wavenumber(&self, k: usize) -> f64 {
        PI * k as f64 / self.half_length
    }

    /// Expands samples in the orthonormal real Fourier basis.
    ///
    /// Layout: index `0` is the constant mode, indices `2k-1` and `2k` hold the
    /// cosine and sine of mode `k` for `1 ≤ k < n/2`, and index `n-1` holds the
    /// Nyquist mode. Coefficients are scaled so that the Euclidean dot product
    /// of two coefficient vectors equals the grid inner product of the fields.
    pub fn to_coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let spec = self.forward(values);
        let h = self.spacing.sqrt();
        let a0 = h / (n as f64).sqrt();
        let ak = h * (2.0 / n as f64).sqrt();
        let mut out = vec![0.0; n];
        out[0] = a0 * spec[0].re;
        for k in 1..n / 2 {
            out[2 * k - 1] = ak * spec[k].re;
            out[2 * k] = -ak * spec[k].im;
        }
        out[n - 1] = a0 * spec[n / 2].re;
        out
    }

    /// Inverse of [`SpectralGrid::to_coefficients`].
    pub fn from_coefficients(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(coeffs.len(), n);
        let h = self.spacing.sqrt();
        // Undo the forward scaling: f_j = (1/n) Σ F_m e^{2πimj/n}.
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        let a0 = (n as f64).sqrt() / h;
        let ak = (n as f64 / 2.0).sqrt() / h;
        spec[0] = Complex64::new(coeffs[0] * a0, 0.0);
        for k in 1..n / 2 {
            let z = Complex64::new(coeffs[2 * k - 1] * ak, -coeffs[2 * k] * ak);
            spec[k] = z;
            spec[n - k] = z.conj();
        }
        spec[n / 2] = Complex64::new(coeffs[n - 1] * a0, 0.0);
        self.inverse_real(spec)
    }

    /// Real-basis index of the cosine of paired mode `k`.
    pub fn cos_index(k: usize) -> usize {
        2 * k - 1
    }

    /// Real-basis index of the sine of paired mode `k`.
    pub fn sin_index(k: usize) -> usize {
        2 * k
    }
}

/// Samples of a real function on a grid.
#[derive(Debug, Clone)]
pub struct RealField {
    grid: Arc<SpectralGrid>,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::param(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.point(j))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Arc<SpectralGrid>, value: f64) -> Self {
        let values = vec![value; grid.n()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(1/2ℓ) ∫ f`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    /// Coefficients in the orthonormal real Fourier basis.
    pub fn coefficients(&self) -> Vec<f64> {
        self.grid.to_coefficients(&self.values)
    }

    pub fn from_coefficients(grid: Arc<SpectralGrid>, coeffs: &[f64]) -> Self {
        let values = grid.from_coefficients(coeffs);
        Self { grid, values }
    }

    /// Evaluates the trigonometric interpolant at arbitrary points.
    pub fn interpolate(&self, xs: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let spec = self.grid.forward(&self.values);
        let x0 = -self.grid.half_length();
        let scale = 1.0 / n as f64;
        xs.iter()
            .map(|&x| {
                let theta = 2.0 * PI * (x - x0) / (2.0 * self.grid.half_length());
                let step = Complex64::from_polar(1.0, theta);
                let mut phase = step;
                let mut acc = spec[0].re;
                for z in &spec[1..n / 2] {
                    acc += 2.0 * (z * phase).re;
                    phase *= step;
                }
                // Nyquist mode split symmetrically so the interpolant stays real.
                acc += spec[n / 2].re * phase.re;
                acc * scale
            })
            .collect()
    }
}

/// `⟨f, g⟩ = h Σ f_j g_j` (trapezoidal rule on the periodic grid).
pub fn inner_product(f: &RealField, g: &RealField) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    Ok(f.grid.spacing() * f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Real, even symbol.
    SelfAdjoint,
    /// Purely imaginary, odd symbol.
    SkewAdjoint,
}

/// A Fourier multiplier `f̂(ξ) ↦ m(ξ) f̂(ξ)`.
///
/// Skew-adjoint symbols vanish on the Nyquist mode so that real fields map
/// to real fields.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: Arc<SpectralGrid>,
    symbol: Vec<Complex64>,
    name: String,
    symmetry: Symmetry,
    mean_zero_only: bool,
}

impl Multiplier {
    fn real(grid: &Arc<SpectralGrid>, name: String, f: impl Fn(f64) -> f64) -> Self {
        let symbol = grid
            .wavenumbers()
            .iter()
            .map(|&xi| Complex64::new(f(xi), 0.0))
            .collect();
        Self {
            grid: grid.clone(),
            symbol,
            name,
            symmetry: Symmetry::SelfAdjoint,
            mean_zero_only: false,
        }
    }

    /// Symbol `i·g(ξ)` with `g` odd; zero on the Nyquist mode.
    fn imaginary(grid: &Arc<SpectralGrid>, name: String, g: impl Fn(f64) -> f64) -> Self {
        let nyq = grid.nyquist_index();
        let symbol = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(k, &xi)| {
                if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, g(xi))
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            symbol,
            name,
            symmetry: Symmetry::SkewAdjoint,
            mean_zero_only: false,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Real parts of the symbol; meaningful for self-adjoint multipliers.
    pub fn real_symbol(&self) -> Vec<f64> {
        self.symbol.iter().map(|z| z.re).collect()
    }

    /// Symbol value on paired real mode `k` (`1 ≤ k < n/2`).
    pub fn mode_value(&self, k: usize) -> Complex64 {
        self.symbol[k]
    }

    pub fn apply(&self, f: &RealField) -> Result<RealField> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if self.mean_zero_only {
            let tol = MEAN_TOL * f.norm();
            let mean = f.mean();
            if mean.abs() > tol {
                return Err(Error::NonIntegrable { mean, tol });
            }
        }
        let mut spec = self.grid.forward(f.values());
        for (z, m) in spec.iter_mut().zip(&self.symbol) {
            *z *= m;
        }
        Ok(RealField {
            grid: self.grid.clone(),
            values: self.grid.inverse_real(spec),
        })
    }

    /// The multiplier `self ∘ other`.
    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let symbol: Vec<Complex64> = self.symbol.iter().zip(&other.symbol).map(|(a, b)| a * b).collect();
        let symmetry = if self.symmetry == other.symmetry {
            Symmetry::SelfAdjoint
        } else {
            Symmetry::SkewAdjoint
        };
        Ok(Multiplier {
            grid: self.grid.clone(),
            symbol,
            name: format!("{}∘{}", self.name, other.name),
            symmetry,
            mean_zero_only: self.mean_zero_only || other.mean_zero_only,
        })
    }

    /// Dense matrix in the real Fourier basis.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.grid.n();
        let mut m = vec![vec![0.0; n]; n];
        match self.symmetry {
            Symmetry::SelfAdjoint => {
                m[0][0] = self.symbol[0].re;
                for k in 1..n / 2 {
                    let v = self.symbol[k].re;
                    m[2 * k - 1][2 * k - 1] = v;
                    m[2 * k][2 * k] = v;
                }
                m[n - 1][n - 1] = self.symbol[n / 2].re;
            }
            Symmetry::SkewAdjoint => {
                // i·g maps cos_k ↦ -g sin_k and sin_k ↦ g cos_k.
                for k in 1..n / 2 {
                    let g = self.symbol[k].im;
                    let (c, s) = (2 * k - 1, 2 * k);
                    m[s][c] = -g;
                    m[c][s] = g;
                }
            }
        }
        m
    }
}

/// Mean guard for multipliers undefined on constants, relative to `‖f‖`.
pub const MEAN_TOL: f64 = 1e-10;

/// `|∂_x|^s`, symbol `(2π|ξ|)^s`.
pub fn fractional_derivative_multiplier(grid: &Arc<SpectralGrid>, s: f64) -> Result<Multiplier> {
    if !(s >= 0.0) {
        return Err(Error::param(format!("derivative order s = {s} must be nonnegative")));
    }
    Ok(Multiplier::real(grid, format!("|d|^{s}"), |xi| {
        if s == 0.0 {
            1.0
        } else {
            (2.0 * PI * xi.abs()).powf(s)
        }
    }))
}

/// `|∂_x|^{-a}` for `a > 0`, zero on the constant mode.
pub fn inverse_fractional_multiplier(grid: &Arc<SpectralGrid>, a: f64) -> Result<Multiplier> {
    if !(a > 0.0) {
        return Err(Error::param(format!("inverse order a = {a} must be positive")));
    }
    let mut m = Multiplier::real(grid, format!("|d|^-{a}"), |xi| {
        if xi == 0.0 {
            0.0
        } else {
            (2.0 * PI * xi.abs()).powf(-a)
        }
    });
    m.mean_zero_only = true;
    Ok(m)
}

/// `∂_x`, symbol `2πiξ`.
pub fn derivative_multiplier(grid: &Arc<SpectralGrid>) -> Multiplier {
    Multiplier::imaginary(grid, "d".into(), |xi| 2.0 * PI * xi)
}

/// Classical Hilbert transform, symbol `-i sign(ξ)`; maps `cos ↦ sin`.
pub fn hilbert_multiplier(grid: &Arc<SpectralGrid>) -> Multiplier {
    Multiplier::imaginary(grid, "H".into(), |xi| -sign(xi))
}

/// `J = ∂_x |∂_x|^{-1}`, symbol `i sign(ξ)`. Equals minus the Hilbert transform.
pub fn hamiltonian_j_multiplier(grid: &Arc<SpectralGrid>) -> Multiplier {
    Multiplier::imaginary(grid, "J".into(), sign)
}

/// `∂_x^{-1}`, symbol `1/(2πiξ)`, defined on mean-zero fields.
pub fn antiderivative_multiplier(grid: &Arc<SpectralGrid>) -> Multiplier {
    let mut m = Multiplier::imaginary(grid, "d^-1".into(), |xi| {
        if xi == 0.0 {
            0.0
        } else {
            // 1/(2πiξ) = -i/(2πξ)
            -1.0 / (2.0 * PI * xi)
        }
    });
    m.mean_zero_only = true;
    m
}

/// `(-∂_x² + ε²)^{1/4}`, symbol `(4π²ξ² + ε²)^{1/4}`.
pub fn regularized_quarter_root_multiplier(grid: &Arc<SpectralGrid>, eps: f64) -> Result<Multiplier> {
    if !(eps >= 0.0) {
        return Err(Error::param(format!("eps = {eps} must be nonnegative")));
    }
    Ok(Multiplier::real(grid, format!("(-d^2+{eps}^2)^1/4"), |xi| {
        (4.0 * PI * PI * xi * xi + eps * eps).powf(0.25)
    }))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Relative defects of the basic multiplier identities on one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityDefects {
    /// `‖∂f − J|∂|f‖ / ‖∂f‖`.
    pub hilbert_factorization: f64,
    /// `‖J²f + f‖ / ‖f‖`, on the mean-zero, Nyquist-free part of `f`.
    pub j_squared: f64,
    /// `|⟨∂⁻¹f, f⟩| / (‖∂⁻¹f‖ ‖f‖)`, on the mean-zero part.
    pub skew: f64,
    /// `|Σ f̂² − ‖f‖²| / ‖f‖²` in the orthonormal basis.
    pub parseval: f64,
}

impl IdentityDefects {
    pub fn worst(&self) -> f64 {
        self.hilbert_factorization.max(self.j_squared).max(self.skew).max(self.parseval)
    }
}

pub fn identity_defects(f: &RealField) -> Result<IdentityDefects> {
    let grid = f.grid();
    let d = derivative_multiplier(grid);
    let j = hamiltonian_j_multiplier(grid);
    let df = d.apply(f)?;
    let jd = j.apply(&fractional_derivative_multiplier(grid, 1.0)?.apply(f)?)?;
    let hilbert_factorization = df.zip_with(&jd, |a, b| a - b)?.norm() / df.norm().max(f64::MIN_POSITIVE);

    let mut coeffs = f.coefficients();
    coeffs[0] = 0.0;
    let mean_zero = RealField::from_coefficients(grid.clone(), &coeffs);
    let nyq = coeffs.len() - 1;
    coeffs[nyq] = 0.0;
    let core = RealField::from_coefficients(grid.clone(), &coeffs);
    let jj = j.apply(&j.apply(&core)?)?;
    let j_squared = jj.zip_with(&core, |a, b| a + b)?.norm() / core.norm().max(f64::MIN_POSITIVE);

    let anti = antiderivative_multiplier(grid).apply(&mean_zero)?;
    let skew = inner_product(&anti, &mean_zero)?.abs() / (anti.norm() * mean_zero.norm()).max(f64::MIN_POSITIVE);

    let energy: f64 = f.coefficients().iter().map(|c| c * c).sum();
    let norm_sq = f.norm().powi(2);
    let parseval = (energy - norm_sq).abs() / norm_sq.max(f64::MIN_POSITIVE);
    Ok(IdentityDefects {
        hilbert_factorization,
        j_squared,
        skew,
        parseval,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn small_grid_layout() {
        let g = make_grid(8, 4.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        let expected = [0.0, 0.125, 0.25, 0.375, -0.5, -0.375, -0.25, -0.125];
        assert_eq!(g.wavenumbers(), &expected);
        assert_eq!(g.wavenumbers().iter().filter(|&&x| x == 0.0).count(), 1);
        assert_eq!(g.point(0), -4.0);
        assert_eq!(g.point(g.center_index()), 0.0);
    }

    #[test]
    fn spacing_arithmetic() {
        let g = make_grid(1024, 200.0).unwrap();
        assert_eq!(g.spacing(), 0.390625);
        assert_eq!(g.spacing() * g.n() as f64, 400.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(7, 4.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(6, 4.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(8, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(8, -1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn order_zero_is_identity() {
        let g = make_grid(64, 10.0).unwrap();
        let m = fractional_derivative_multiplier(&g, 0.0).unwrap();
        assert!(m.symbol().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        assert!(fractional_derivative_multiplier(&g, -0.5).is_err());
    }

    #[test]
    fn second_derivative_eigenfunction() {
        let g = make_grid(128, 10.0).unwrap();
        let k0 = 3.0;
        let w = 2.0 * PI * k0 / 20.0;
        let f = RealField::from_fn(g.clone(), |x| (w * x).sin());
        let out = fractional_derivative_multiplier(&g, 2.0).unwrap().apply(&f).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - w * w * b).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_split_of_abs_derivative() {
        let g = make_grid(512, 40.0).unwrap();
        let f = RealField::from_fn(g.clone(), sech);
        let d1 = fractional_derivative_multiplier(&g, 1.0).unwrap().apply(&f).unwrap();
        let dh = fractional_derivative_multiplier(&g, 0.5).unwrap().apply(&f).unwrap();
        let lhs = inner_product(&d1, &f).unwrap();
        let rhs = inner_product(&dh, &dh).unwrap();
        assert!(lhs > 0.0);
        assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }

    #[test]
    fn hilbert_on_single_mode() {
        let g = make_grid(64, 8.0).unwrap();
        let xi0 = 5.0 / 16.0;
        let f = RealField::from_fn(g.clone(), |x| (2.0 * PI * xi0 * x).cos());
        let out = hilbert_multiplier(&g).apply(&f).unwrap();
        for (j, v) in out.values().iter().enumerate() {
            assert!((v - (2.0 * PI * xi0 * g.point(j)).sin()).abs() < 1e-12);
        }
        let c = RealField::constant(g.clone(), 3.0);
        assert!(hilbert_multiplier(&g).apply(&c).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn antiderivative_rejects_constants() {
        let g = make_grid(64, 8.0).unwrap();
        let c = RealField::constant(g.clone(), 1.0);
        assert!(matches!(
            antiderivative_multiplier(&g).apply(&c),
            Err(Error::NonIntegrable { .. })
        ));
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let g = make_grid(256, 20.0).unwrap();
        let f = RealField::from_fn(g.clone(), |x| -2.0 * x * (-x * x).exp());
        let back = derivative_multiplier(&g)
            .apply(&antiderivative_multiplier(&g).apply(&f).unwrap())
            .unwrap();
        let err = back.zip_with(&f, |a, b| a - b).unwrap().norm();
        assert!(err <= 1e-12 * f.norm(), "{err:e} {:e}", f.mean());
        let skew = inner_product(&antiderivative_multiplier(&g).apply(&f).unwrap(), &f).unwrap();
        assert!(skew.abs() <= 1e-12 * f.norm().powi(2));
    }

    #[test]
    fn quarter_root_symbol() {
        let g = make_grid(64, 8.0).unwrap();
        let r0 = regularized_quarter_root_multiplier(&g, 0.0).unwrap();
        let half = fractional_derivative_multiplier(&g, 0.5).unwrap();
        for (a, b) in r0.symbol().iter().zip(half.symbol()) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
        let r1 = regularized_quarter_root_multiplier(&g, 1.0).unwrap();
        assert_eq!(r1.symbol()[0].re, 1.0);
        for eps in [0.0, 0.1, 1.0, 3.0] {
            let r = regularized_quarter_root_multiplier(&g, eps).unwrap();
            let mut pairs: Vec<(f64, f64)> = g
                .wavenumbers()
                .iter()
                .zip(r.symbol())
                .map(|(xi, z)| (xi.abs(), z.re))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            assert!(pairs.windows(2).all(|w| w[1].1 >= w[0].1));
        }
    }

    #[test]
    fn domain_measure() {
        let g = make_grid(8, 4.0).unwrap();
        let one = RealField::constant(g.clone(), 1.0);
        assert_eq!(inner_product(&one, &one).unwrap(), 8.0);
        let other = make_grid(16, 4.0).unwrap();
        let f = RealField::constant(other, 1.0);
        assert!(matches!(inner_product(&one, &f), Err(Error::GridMismatch)));
    }

    #[test]
    fn coefficient_round_trip_and_isometry() {
        let g = make_grid(32, 5.0).unwrap();
        let f = RealField::from_fn(g.clone(), |x| (x * 0.7).sin() + 0.3 * (-x * x).exp() + 0.1);
        let u = RealField::from_fn(g.clone(), |x| (x * 1.3).cos() * (-0.1 * x * x).exp());
        let cf = f.coefficients();
        let back = RealField::from_coefficients(g.clone(), &cf);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let dot: f64 = cf.iter().zip(u.coefficients()).map(|(a, b)| a * b).sum();
        assert!((dot - inner_product(&f, &u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dense_multiplier_matches_apply() {
        let g = make_grid(16, 3.0).unwrap();
        let f = RealField::from_fn(g.clone(), |x| (-x * x).exp() * (1.0 + x));
        for m in [
            derivative_multiplier(&g),
            hilbert_multiplier(&g),
            fractional_derivative_multiplier(&g, 1.3).unwrap(),
        ] {
            let dense = m.to_dense();
            let c = f.coefficients();
            let mc: Vec<f64> = dense
                .iter()
                .map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum())
                .collect();
            let expected = m.apply(&f).unwrap().coefficients();
            for (a, b) in mc.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "{}: {a} vs {b}", m.name());
            }
        }
    }

    #[test]
    fn interpolation_reproduces_band_limited() {
        let g = make_grid(64, 10.0).unwrap();
        let w = PI * 3.0 / 10.0;
        let f = RealField::from_fn(g.clone(), |x| (w * x).cos() + 0.5 * (2.0 * w * x).sin());
        let xs = [0.123, -7.7, 9.99, 3.5];
        for (x, v) in xs.iter().zip(f.interpolate(&xs)) {
            let exact = (w * x).cos() + 0.5 * (2.0 * w * x).sin();
            assert!((v - exact).abs() < 1e-12);
        }
    }
}
