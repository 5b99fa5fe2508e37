//! Self-adjoint linearized operators as dense matrices.
//!
//! An operator is a real even Fourier multiplier plus a pointwise potential.
//! Assembly happens in the orthonormal real Fourier basis of
//! [`SpectralGrid::to_coefficients`], where the multiplier is diagonal and the
//! potential is a Toeplitz-plus-Hankel block read off the FFT of `V`.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fractional_derivative_multiplier, regularized_quarter_root_multiplier, RealField, SpectralGrid};
use crate::waves::{Model, WaveProfile};

/// Dense real matrix in the real Fourier basis.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub label: String,
    mat: Mat<f64>,
    grid: Option<Arc<SpectralGrid>>,
    layout: Layout,
}

/// Which real-basis coordinates index the rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// No Fourier interpretation.
    Plain,
    /// All `n` basis functions.
    Full,
    /// Basis indices `1..n-1`: `cos_1, sin_1, …`, no constant or Nyquist mode.
    Restricted,
}

impl Layout {
    /// Whether row `i` belongs to an even basis function, for Fourier layouts.
    pub fn is_even(self, i: usize, order: usize) -> Option<bool> {
        match self {
            Layout::Plain => None,
            Layout::Full => Some(i == 0 || i == order - 1 || i % 2 == 1),
            Layout::Restricted => Some(i.is_multiple_of(2)),
        }
    }
}

impl DenseMatrix {
    pub fn from_mat(label: impl Into<String>, mat: Mat<f64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::param(format!("matrix is {}x{}, not square", mat.nrows(), mat.ncols())));
        }
        for j in 0..mat.ncols() {
            for i in 0..mat.nrows() {
                if !mat[(i, j)].is_finite() {
                    return Err(Error::param(format!("non-finite entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            mat,
            grid: None,
            layout: Layout::Plain,
        })
    }

    /// Attaches the grid whose real Fourier basis indexes the rows.
    pub fn with_grid(mut self, grid: Arc<SpectralGrid>) -> Result<Self> {
        if grid.n() != self.order() {
            return Err(Error::GridMismatch);
        }
        self.grid = Some(grid);
        self.layout = Layout::Full;
        Ok(self)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Compression onto the mean-zero subspace, basis indices `1..n-1`.
    pub fn restricted(&self) -> Result<Self> {
        if self.layout != Layout::Full {
            return Err(Error::param("restriction needs a matrix in the full Fourier layout"));
        }
        let n = self.order();
        let mut out = self.submatrix(1..n - 1, format!("{} (mean-zero)", self.label));
        out.layout = Layout::Restricted;
        Ok(out)
    }

    /// Largest entry coupling even and odd basis functions, relative to `‖A‖_max`.
    /// `None` for a plain layout.
    pub fn parity_coupling(&self) -> Option<f64> {
        let n = self.order();
        let parity: Vec<bool> = (0..n).map(|i| self.layout.is_even(i, n)).collect::<Option<_>>()?;
        let mut worst = 0.0f64;
        for j in 0..n {
            let col = self.mat.col(j);
            for i in 0..n {
                if parity[i] != parity[j] {
                    worst = worst.max(col[i].abs());
                }
            }
        }
        let scale = self.max_abs();
        Some(if scale == 0.0 { 0.0 } else { worst / scale })
    }

    pub fn grid(&self) -> Option<&Arc<SpectralGrid>> {
        self.grid.as_ref()
    }

    pub fn identity(label: impl Into<String>, order: usize) -> Self {
        Self {
            label: label.into(),
            mat: Mat::identity(order, order),
            grid: None,
            layout: Layout::Plain,
        }
    }

    pub fn from_diagonal(label: impl Into<String>, diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            label: label.into(),
            mat: Mat::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }),
            grid: None,
            layout: Layout::Plain,
        }
    }

    pub fn order(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn mat(&self) -> &Mat<f64> {
        &self.mat
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.order() {
            for i in 0..self.order() {
                m = m.max(self.mat[(i, j)].abs());
            }
        }
        m
    }

    /// Largest absolute row sum, an upper bound for `‖A‖₂`.
    pub fn norm_estimate(&self) -> f64 {
        let n = self.order();
        let mut sums = vec![0.0f64; n];
        for j in 0..n {
            let col = self.mat.col(j);
            for i in 0..n {
                sums[i] += col[i].abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `‖A − Aᵀ‖_max / ‖A‖_max`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.order();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)]).abs());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let a = &self.mat;
        Self {
            label: self.label.clone(),
            mat: Mat::from_fn(self.order(), self.order(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)])),
            grid: self.grid.clone(),
            layout: self.layout,
        }
    }

    /// `D A D` for diagonal `D`.
    pub fn conjugate_diagonal(&self, d: &[f64], label: impl Into<String>) -> Self {
        let a = &self.mat;
        Self {
            label: label.into(),
            mat: Mat::from_fn(self.order(), self.order(), |i, j| d[i] * a[(i, j)] * d[j]),
            grid: self.grid.clone(),
            layout: self.layout,
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order();
        let mut out = vec![0.0; n];
        for (j, &vj) in v.iter().enumerate().take(n) {
            if vj == 0.0 {
                continue;
            }
            let col = self.mat.col(j);
            for i in 0..n {
                out[i] += col[i] * vj;
            }
        }
        out
    }

    /// Principal submatrix on the index range `range`.
    pub fn submatrix(&self, range: std::ops::Range<usize>, label: impl Into<String>) -> Self {
        let off = range.start;
        let m = range.len();
        Self {
            label: label.into(),
            mat: self.mat.as_ref().submatrix(off, off, m, m).to_owned(),
            grid: None,
            layout: Layout::Plain,
        }
    }

    /// Row-major entries.
    pub fn row_major(&self) -> Vec<f64> {
        let n = self.order();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.mat[(i, j)]);
            }
        }
        out
    }
}

/// `multiplier + potential`, both real.
#[derive(Debug, Clone)]
pub struct LinOperator {
    grid: Arc<SpectralGrid>,
    /// Constant-coefficient part in FFT layout.
    pub multiplier_symbol: Vec<f64>,
    /// Pointwise part on the collocation points.
    pub potential: Vec<f64>,
    pub label: String,
    /// Dispersion order `s` of the multiplier.
    pub order: f64,
    pub warnings: Vec<String>,
}

impl LinOperator {
    pub fn new(
        grid: Arc<SpectralGrid>,
        multiplier_symbol: Vec<f64>,
        potential: Vec<f64>,
        label: impl Into<String>,
        order: f64,
    ) -> Result<Self> {
        let n = grid.n();
        if multiplier_symbol.len() != n || potential.len() != n {
            return Err(Error::param("operator parts must have one entry per grid point"));
        }
        if multiplier_symbol.iter().chain(&potential).any(|v| !v.is_finite()) {
            return Err(Error::param("operator parts must be finite"));
        }
        Ok(Self {
            grid,
            multiplier_symbol,
            potential,
            label: label.into(),
            order,
            warnings: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn apply(&self, f: &RealField) -> Result<RealField> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut spec = self.grid.forward(f.values());
        for (z, m) in spec.iter_mut().zip(&self.multiplier_symbol) {
            *z *= *m;
        }
        let mut out = self.grid.inverse_real(spec);
        for ((o, v), u) in out.iter_mut().zip(&self.potential).zip(f.values()) {
            *o += v * u;
        }
        RealField::new(self.grid.clone(), out)
    }

    /// Multiplier values per real-basis index.
    pub fn diagonal_symbol(&self) -> Vec<f64> {
        basis_symbol(&self.grid, &self.multiplier_symbol)
    }

    /// Dense matrix in the real Fourier basis.
    pub fn assemble(&self) -> DenseMatrix {
        let n = self.grid.n();
        let mut mat = potential_gram(&self.grid, &self.potential);
        for (i, m) in self.diagonal_symbol().into_iter().enumerate() {
            mat[(i, i)] += m;
        }
        debug_assert_eq!(mat.nrows(), n);
        DenseMatrix {
            label: self.label.clone(),
            mat,
            grid: Some(self.grid.clone()),
            layout: Layout::Full,
        }
    }

    /// Smallest multiplier value, the floor of the constant-coefficient spectrum.
    pub fn multiplier_floor(&self) -> f64 {
        self.multiplier_symbol.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Maps an even real symbol in FFT layout onto real-basis indices.
pub fn basis_symbol(grid: &SpectralGrid, symbol: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let mut out = vec![0.0; n];
    out[0] = symbol[0];
    for k in 1..n / 2 {
        // Even symbols: average the ±k entries to absorb round-off.
        let v = 0.5 * (symbol[k] + symbol[n - k]);
        out[2 * k - 1] = v;
        out[2 * k] = v;
    }
    out[n - 1] = symbol[n / 2];
    out
}

/// Exponential components `(m, α)` of real-basis function `b`, so that the
/// sampled basis function is `Σ α e^{2πimj/n}`.
fn basis_components(b: usize, n: usize) -> [(usize, Complex64); 2] {
    let zero = (0, Complex64::new(0.0, 0.0));
    let unit = 1.0 / (n as f64).sqrt();
    let half = 0.5 * (2.0 / n as f64).sqrt();
    if b == 0 {
        [(0, Complex64::new(unit, 0.0)), zero]
    } else if b == n - 1 {
        [(n / 2, Complex64::new(unit, 0.0)), zero]
    } else {
        let k = b.div_ceil(2);
        if b % 2 == 1 {
            [(k, Complex64::new(half, 0.0)), (n - k, Complex64::new(half, 0.0))]
        } else {
            // sin = (e^{iθ} − e^{−iθ}) / 2i
            [(k, Complex64::new(0.0, -half)), (n - k, Complex64::new(0.0, half))]
        }
    }
}

/// `Σ_j V_j φ_a(j) φ_b(j)` for all basis pairs, from one FFT of `V`.
pub(crate) fn potential_gram(grid: &SpectralGrid, potential: &[f64]) -> Mat<f64> {
    let n = grid.n();
    let v_hat = grid.forward(potential);
    let comps: Vec<[(usize, Complex64); 2]> = (0..n).map(|b| basis_components(b, n)).collect();
    let mut mat = Mat::<f64>::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(ma, ca) in &comps[a] {
                if ca.re == 0.0 && ca.im == 0.0 {
                    continue;
                }
                for &(mb, cb) in &comps[b] {
                    if cb.re == 0.0 && cb.im == 0.0 {
                        continue;
                    }
                    // Σ_j V_j e^{2πi q j/n} = V̂_{-q}
                    let q = (2 * n - (ma + mb) % n) % n;
                    acc += ca * cb * v_hat[q];
                }
            }
            mat[(a, b)] = acc.re;
            mat[(b, a)] = acc.re;
        }
    }
    mat
}

fn power_of(values: &[f64], p: f64) -> Vec<f64> {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        let k = p as i32;
        return values.iter().map(|v| v.powi(k)).collect();
    }
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-14 * peak;
    values.iter().map(|&v| v.max(floor).powf(p)).collect()
}

/// `L_c = |∂|^s + c − (p+1) U_c^p`.
pub fn kdv_linearization(u: &WaveProfile) -> Result<LinOperator> {
    match u.model {
        Model::Fkdv => {}
        Model::Normalized if u.c == 1.0 => {}
        other => {
            return Err(Error::ModelMismatch {
                expected: Model::Fkdv.to_string(),
                found: other.to_string(),
            })
        }
    }
    let grid = u.grid().clone();
    let symbol = fractional_derivative_multiplier(&grid, u.s)?
        .real_symbol()
        .into_iter()
        .map(|m| m + u.c)
        .collect();
    let potential = power_of(u.values(), u.p).into_iter().map(|v| -(u.p + 1.0) * v).collect();
    LinOperator::new(
        grid,
        symbol,
        potential,
        format!("kdv s={} p={} c={}", u.s, u.p, u.c),
        u.s,
    )
}

/// `L₀ = c|∂|^s + (c − 1) − (p+1) U_c^p`.
pub fn bbm_linearization(u: &WaveProfile) -> Result<LinOperator> {
    if u.model != Model::Fbbm {
        return Err(Error::ModelMismatch {
            expected: Model::Fbbm.to_string(),
            found: u.model.to_string(),
        });
    }
    if !(u.c > 1.0) {
        return Err(Error::param(format!("BBM linearization needs c > 1, got {}", u.c)));
    }
    let grid = u.grid().clone();
    let c = u.c;
    let symbol = fractional_derivative_multiplier(&grid, u.s)?
        .real_symbol()
        .into_iter()
        .map(|m| c * m + c - 1.0)
        .collect();
    let potential = power_of(u.values(), u.p).into_iter().map(|v| -(u.p + 1.0) * v).collect();
    LinOperator::new(
        grid,
        symbol,
        potential,
        format!("bbm s={} p={} c={}", u.s, u.p, c),
        u.s,
    )
}

/// `L = −∂² + c − V`.
pub fn schrodinger_operator(v: &RealField, c: f64) -> Result<LinOperator> {
    if !(c > 0.0) {
        return Err(Error::param(format!("c = {c} must be positive")));
    }
    let grid = v.grid().clone();
    let symbol = grid
        .wavenumbers()
        .iter()
        .map(|xi| (2.0 * PI * xi).powi(2) + c)
        .collect();
    let potential = v.values().iter().map(|x| -x).collect();
    let mut op = LinOperator::new(grid.clone(), symbol, potential, format!("schrodinger c={c}"), 2.0)?;
    let vmax = v.sup_norm();
    let cut = 0.95 * grid.half_length();
    let edge = v
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.point(*j).abs() >= cut)
        .fold(0.0f64, |m, (_, x)| m.max(x.abs()));
    if edge > 1e-6 * vmax {
        op.warnings
            .push(format!("slowly decaying potential: boundary value {edge:e} vs max {vmax:e}"));
    }
    Ok(op)
}

/// `R A R` with `R = (−∂² + ε²)^{1/4}`; `ε = 0` gives `|∂|^{1/2} L |∂|^{1/2}`.
pub fn sandwich(l: &LinOperator, eps: f64) -> Result<DenseMatrix> {
    let r = regularized_quarter_root_multiplier(l.grid(), eps)?;
    let d = basis_symbol(l.grid(), &r.real_symbol());
    Ok(l.assemble()
        .conjugate_diagonal(&d, format!("sandwich({}, eps={eps})", l.label)))
}

/// `B L₀ B` with `B = (I + |∂|^s)^{−1/2}`.
pub fn bbm_symmetrize(l0: &LinOperator) -> Result<DenseMatrix> {
    let m = fractional_derivative_multiplier(l0.grid(), l0.order)?;
    let b: Vec<f64> = m.real_symbol().iter().map(|v| 1.0 / (1.0 + v).sqrt()).collect();
    let d = basis_symbol(l0.grid(), &b);
    Ok(l0
        .assemble()
        .conjugate_diagonal(&d, format!("symmetrized({})", l0.label)))
}

/// Multiplier `(I + |∂|^s)^{1/2}` values per real-basis index.
pub fn bbm_half_weight(grid: &Arc<SpectralGrid>, s: f64) -> Result<Vec<f64>> {
    let m = fractional_derivative_multiplier(grid, s)?;
    let w: Vec<f64> = m.real_symbol().iter().map(|v| (1.0 + v).sqrt()).collect();
    Ok(basis_symbol(grid, &w))
}
