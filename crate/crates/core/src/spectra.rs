//! Eigenvalue computations: negative counts, kernels, the constrained
//! quantity, the spectrum of `∂ₓA` and its Krein-signature classification.
//!
//! The Hamiltonian problems live on the mean-zero subspace: real-basis indices
//! `1..n-1`, with the constant and Nyquist modes removed. There `∂ₓ` pairs
//! `cos_k` with `sin_k` and is invertible.

use std::fmt;
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{antiderivative_multiplier, RealField, SpectralGrid};
use crate::operators::{bbm_half_weight, DenseMatrix, Layout, LinOperator};
use crate::waves::{bbm_momentum, half_derivative_energy, WaveProfile};

/// Relative asymmetry accepted by the symmetric eigensolver.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// `zero_tol = ZERO_REL·‖A‖₂`.
pub const ZERO_REL: f64 = 1e-8;
/// `re_tol = im_tol = EIG_REL·max|λ|`.
pub const EIG_REL: f64 = 1e-6;
/// `sig_tol = SIG_REL·‖A‖`.
pub const SIG_REL: f64 = 1e-8;
/// Fredholm compatibility limit relative to `‖w‖`.
pub const FREDHOLM_REL: f64 = 1e-6;
/// Default relative threshold of [`generalized_kernel_dim`].
pub const GEN_KERNEL_REL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub label: String,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub zero_tol: f64,
    pub negative_count: usize,
    pub kernel_dim: usize,
    /// Real-basis coefficient vectors spanning the numerical kernel.
    pub kernel_vectors: Vec<Vec<f64>>,
}

impl SpectralReport {
    /// Kernel vectors as grid functions; needs a matrix assembled on `grid`.
    pub fn kernel_fields(&self, grid: &Arc<SpectralGrid>) -> Result<Vec<RealField>> {
        let scale = 1.0 / grid.spacing().sqrt();
        self.kernel_vectors
            .iter()
            .map(|v| {
                if v.len() != grid.n() {
                    return Err(Error::GridMismatch);
                }
                let vals = grid.from_coefficients(v).into_iter().map(|x| x * scale).collect();
                RealField::new(grid.clone(), vals)
            })
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

fn block_matrix(a: &DenseMatrix, idx: &[usize]) -> Mat<f64> {
    let m = idx.len();
    Mat::from_fn(m, m, |i, j| 0.5 * (a.get(idx[i], idx[j]) + a.get(idx[j], idx[i])))
}

fn block_values(a: &DenseMatrix, idx: &[usize]) -> Result<Vec<f64>> {
    block_matrix(a, idx)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

fn block_eigen(a: &DenseMatrix, idx: &[usize]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = idx.len();
    let evd = block_matrix(a, idx)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(((0..m).map(|i| evd.S()[i]).collect(), evd.U().to_owned()))
}

/// Index sets of the Fourier parity blocks, or one block when `A` couples
/// even and odd modes.
fn parity_blocks(a: &DenseMatrix) -> Result<Vec<Vec<usize>>> {
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = a.order();
    Ok(match a.parity_coupling() {
        Some(c) if c <= PARITY_TOL => {
            let layout = a.layout();
            let (even, odd): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| layout.is_even(i, n).unwrap_or(true));
            vec![even, odd].into_iter().filter(|b| !b.is_empty()).collect()
        }
        _ => vec![(0..n).collect()],
    })
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, l| m.max(l.abs()))
}

/// All eigenvalues of a symmetric matrix with negative and kernel counts.
/// `zero_tol` defaults to `1e-8·‖A‖₂`.
pub fn symmetric_spectrum(a: &DenseMatrix, zero_tol: Option<f64>) -> Result<SpectralReport> {
    let n = a.order();
    let blocks = parity_blocks(a)?;
    let values: Vec<Vec<f64>> = blocks.iter().map(|b| block_values(a, b)).collect::<Result<_>>()?;
    let all: Vec<f64> = values.iter().flatten().copied().collect();
    let zero_tol = zero_tol.unwrap_or(ZERO_REL * max_abs(&all));
    let mut kernel_vectors = Vec::new();
    for (idx, vals) in blocks.iter().zip(&values) {
        if vals.iter().any(|l| l.abs() <= zero_tol) {
            let (vals, vecs) = block_eigen(a, idx)?;
            for (k, l) in vals.iter().enumerate() {
                if l.abs() <= zero_tol {
                    let mut v = vec![0.0; n];
                    for (r, &i) in idx.iter().enumerate() {
                        v[i] = vecs[(r, k)];
                    }
                    kernel_vectors.push(v);
                }
            }
        }
    }
    let mut eigenvalues = all;
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectralReport {
        label: a.label.clone(),
        negative_count: eigenvalues.iter().filter(|&&l| l < -zero_tol).count(),
        kernel_dim: eigenvalues.iter().filter(|l| l.abs() <= zero_tol).count(),
        eigenvalues,
        zero_tol,
        kernel_vectors,
    })
}

/// Real-basis indices of the mean-zero subspace.
pub fn restricted_range(n: usize) -> std::ops::Range<usize> {
    1..n - 1
}

/// `⟨A⁻¹w, w⟩` with the pseudo-inverse taken off the numerical kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstrainedQuantity {
    pub value: f64,
    /// Largest `|⟨w, k⟩|/‖w‖` over unit kernel vectors `k`.
    pub kernel_overlap: f64,
    pub kernel_dim: usize,
    pub negative_count: usize,
    /// Smallest retained `|λ|` over `zero_tol`; small means a near-singular solve.
    pub conditioning: f64,
    pub near_singular: bool,
}

/// Constrained quantity for a symmetric matrix and vector in the same basis.
pub fn constrained_quantity_dense(a: &DenseMatrix, w: &[f64], zero_tol: Option<f64>) -> Result<ConstrainedQuantity> {
    if w.len() != a.order() {
        return Err(Error::param("vector length does not match the matrix order"));
    }
    let blocks = parity_blocks(a)?;
    let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if wnorm == 0.0 {
        return Err(Error::param("constraint vector vanishes"));
    }
    // Blocks that `w` does not touch contribute eigenvalues only.
    let mut parts = Vec::with_capacity(blocks.len());
    for idx in &blocks {
        if idx.iter().all(|&i| w[i] == 0.0) {
            parts.push((block_values(a, idx)?, None));
        } else {
            let (vals, vecs) = block_eigen(a, idx)?;
            parts.push((vals, Some(vecs)));
        }
    }
    let all: Vec<f64> = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
    let tol = zero_tol.unwrap_or(ZERO_REL * max_abs(&all));
    let mut value = 0.0;
    let mut overlap = 0.0f64;
    let mut kernel_dim = 0;
    let mut smallest = f64::INFINITY;
    for (idx, (vals, vecs)) in blocks.iter().zip(&parts) {
        for (k, &l) in vals.iter().enumerate() {
            let proj: f64 = match vecs {
                Some(q) => idx.iter().enumerate().map(|(r, &i)| q[(r, k)] * w[i]).sum(),
                None => 0.0,
            };
            if l.abs() <= tol {
                kernel_dim += 1;
                overlap = overlap.max(proj.abs() / wnorm);
            } else {
                value += proj * proj / l;
                smallest = smallest.min(l.abs());
            }
        }
    }
    if overlap > FREDHOLM_REL {
        return Err(Error::Fredholm {
            overlap,
            limit: FREDHOLM_REL,
        });
    }
    let conditioning = smallest / tol;
    Ok(ConstrainedQuantity {
        value,
        kernel_overlap: overlap,
        kernel_dim,
        negative_count: all.iter().filter(|&&l| l < -tol).count(),
        conditioning,
        near_singular: conditioning < 1e2,
    })
}

fn restrict(v: &[f64]) -> Vec<f64> {
    v[restricted_range(v.len())].to_vec()
}

/// `⟨L⁻¹∂ₓ⁻¹ψ₀, ∂ₓ⁻¹ψ₀⟩` on the mean-zero subspace.
pub fn constrained_quantity(l: &LinOperator, psi0: &RealField) -> Result<ConstrainedQuantity> {
    let w = antiderivative_multiplier(l.grid()).apply(psi0)?;
    let n = l.grid().n();
    debug_assert_eq!(w.values().len(), n);
    let a = l.assemble().restricted()?;
    constrained_quantity_dense(&a, &restrict(&w.coefficients()), None)
}

/// The same quantity through `R L R`, `R = (−∂² + ε²)^{1/4}`, with the
/// constraint vector `R ∂ₓ⁻¹ψ₀`.
pub fn constrained_quantity_sandwich(l: &LinOperator, psi0: &RealField, eps: f64) -> Result<ConstrainedQuantity> {
    let grid = l.grid();
    let r = crate::grid::regularized_quarter_root_multiplier(grid, eps)?;
    let rb = crate::operators::basis_symbol(grid, &r.real_symbol());
    let w = antiderivative_multiplier(grid).apply(psi0)?.coefficients();
    let rw: Vec<f64> = w.iter().zip(&rb).map(|(x, r)| x * r).collect();
    let a = crate::operators::sandwich(l, eps)?.restricted()?;
    constrained_quantity_dense(&a, &restrict(&rw), None)
}

/// BBM constrained quantity `⟨(BL₀B)⁻¹B⁻¹U, B⁻¹U⟩ = ⟨L₀⁻¹(I+M)U, (I+M)U⟩`.
pub fn constrained_quantity_bbm(l0: &LinOperator, u: &WaveProfile) -> Result<ConstrainedQuantity> {
    let grid = l0.grid();
    let weight = bbm_half_weight(grid, l0.order)?;
    let coeffs = u.field.coefficients();
    let w: Vec<f64> = coeffs.iter().zip(&weight).map(|(x, b)| x * b).collect();
    let a = crate::operators::bbm_symmetrize(l0)?.restricted()?;
    constrained_quantity_dense(&a, &restrict(&w), None)
}

/// `(2/p − 1/s)·c^{2/p − 1/s − 1}·⟨Q,Q⟩`, the slope of `c ↦ ⟨U_c,U_c⟩`.
pub fn slope_analytic(s: f64, p: f64, c: f64, q_norm_sq: f64) -> Result<f64> {
    if !(s > 0.0 && p > 0.0 && c > 0.0 && q_norm_sq > 0.0) {
        return Err(Error::param("slope_analytic needs positive inputs"));
    }
    let e = 2.0 / p - 1.0 / s;
    Ok(e * c.powf(e - 1.0) * q_norm_sq)
}

/// `∂_c⟨(I+M)U_c, U_c⟩` for the BBM family `U_c = (c−1)^{1/p} Q(((c−1)/c)^{1/s}x)`:
/// `(c−1)^{2/p−1/s−1} c^{1/s−2} [c(2c/p − 1/s)A + (c−1)(2c/p + 1 − 1/s)B]`
/// with `A = ⟨Q,Q⟩`, `B = ‖|∂|^{s/2}Q‖²`.
pub fn bbm_slope_closed_form(s: f64, p: f64, c: f64, a: f64, b: f64) -> f64 {
    let pref = (c - 1.0).powf(2.0 / p - 1.0 / s - 1.0) * c.powf(1.0 / s - 2.0);
    pref * (c * (2.0 * c / p - 1.0 / s) * a + (c - 1.0) * (2.0 * c / p + 1.0 - 1.0 / s) * b)
}

/// `[(4−p)sc + 2(s−1)p]A + [2sc + (s−1)p]B`, the sign test as printed in the
/// literature. Kept for comparison only.
pub fn bbm_bracket_literature(s: f64, p: f64, c: f64, a: f64, b: f64) -> f64 {
    ((4.0 - p) * s * c + 2.0 * (s - 1.0) * p) * a + (2.0 * s * c + (s - 1.0) * p) * b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BbmSlope {
    pub finite_difference: f64,
    pub closed_form: f64,
    pub literature_bracket: f64,
    pub relative_mismatch: f64,
    pub warnings: Vec<String>,
}

/// Centered difference of `⟨(I+M)U_c, U_c⟩` next to the closed form.
pub fn bbm_slope<F>(family: F, q: &WaveProfile, c: f64, dc: f64) -> Result<BbmSlope>
where
    F: Fn(f64) -> Result<WaveProfile>,
{
    if !(dc > 0.0) || !(c - dc > 1.0) {
        return Err(Error::param(format!("need dc > 0 and c − dc > 1, got c = {c}, dc = {dc}")));
    }
    let hi = bbm_momentum(&family(c + dc)?)?;
    let lo = bbm_momentum(&family(c - dc)?)?;
    let fd = (hi - lo) / (2.0 * dc);
    let a = q.norm_sq();
    let b = half_derivative_energy(q)?;
    let closed = bbm_slope_closed_form(q.s, q.p, c, a, b);
    let mismatch = (fd - closed).abs() / closed.abs().max(f64::MIN_POSITIVE);
    let mut warnings = Vec::new();
    if mismatch > 0.05 {
        warnings.push(format!(
            "finite-difference slope {fd:e} and closed form {closed:e} differ by {:.1}%",
            100.0 * mismatch
        ));
    }
    Ok(BbmSlope {
        finite_difference: fd,
        closed_form: closed,
        literature_bracket: bbm_bracket_literature(q.s, q.p, c, a, b),
        relative_mismatch: mismatch,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HamiltonianKind {
    /// `∂ₓ A`, with `A` the assembled `L`.
    Kdv,
    /// `∂ₓ A`, with `A = B L₀ B`.
    Bbm,
    /// `J A`, with `J = ∂ₓ|∂ₓ|⁻¹` and `A` a sandwiched operator.
    Sandwiched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EigenMethod {
    /// Dense eigensolve of the restricted `D A`, order `n − 2`.
    Full,
    /// For even potentials: eigenvalues `μ = λ²` of `D_cs A_ss D_sc A_cc`, order `n/2 − 1`.
    ParityReduced,
}

/// Eigenvalues of the restricted Hamiltonian problem plus what the signature
/// classification needs.
#[derive(Debug, Clone)]
pub struct HamiltonianSpectrum {
    pub kind: HamiltonianKind,
    pub method: EigenMethod,
    pub eigenvalues: Vec<Complex64>,
    /// `max|λ|`.
    pub scale: f64,
    /// `‖A‖` estimate of the symmetric factor.
    pub form_scale: f64,
    vectors: Mat<Complex64>,
    /// For each eigenvalue, its column in `vectors`.
    column: Vec<usize>,
    /// Symmetric factor of the form: `A_r` (full) or `A_cc` (reduced).
    form: Mat<f64>,
    /// Skew weights `d_k` on the pair `(cos_k, sin_k)`.
    weights: Vec<f64>,
}

fn skew_weights(grid: &SpectralGrid, kind: HamiltonianKind) -> Vec<f64> {
    (1..grid.n() / 2)
        .map(|k| match kind {
            HamiltonianKind::Sandwiched => 1.0,
            _ => grid.angular_wavenumber(k),
        })
        .collect()
}

/// Parity coupling at or below which the reduced path is used.
pub const PARITY_TOL: f64 = 1e-12;

/// Spectrum of the restricted `D·A`, picking the parity-reduced path when `A`
/// does not couple cosines to sines.
pub fn hamiltonian_spectrum(a: &DenseMatrix, kind: HamiltonianKind) -> Result<HamiltonianSpectrum> {
    let method = if a.parity_coupling().is_some_and(|c| c <= PARITY_TOL) {
        EigenMethod::ParityReduced
    } else {
        EigenMethod::Full
    };
    hamiltonian_spectrum_with(a, kind, method)
}

pub fn hamiltonian_spectrum_with(a: &DenseMatrix, kind: HamiltonianKind, method: EigenMethod) -> Result<HamiltonianSpectrum> {
    let grid = a
        .grid()
        .ok_or_else(|| Error::param("Hamiltonian spectrum needs a matrix assembled on a grid"))?
        .clone();
    if a.layout() != Layout::Full {
        return Err(Error::param("Hamiltonian spectrum needs the full Fourier layout"));
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let a = a.symmetrized();
    let d = skew_weights(&grid, kind);
    let form_scale = a.norm_estimate();
    match method {
        EigenMethod::Full => full_spectrum(&a, kind, d, form_scale),
        EigenMethod::ParityReduced => reduced_spectrum(&a, kind, d, form_scale),
    }
}

fn complex_eigen(m: &Mat<f64>) -> Result<(Vec<Complex64>, Mat<Complex64>)> {
    let evd = m.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals = (0..m.nrows()).map(|i| evd.S()[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

fn full_spectrum(a: &DenseMatrix, kind: HamiltonianKind, d: Vec<f64>, form_scale: f64) -> Result<HamiltonianSpectrum> {
    let n = a.order();
    let r = n - 2;
    let ar = Mat::from_fn(r, r, |i, j| a.get(i + 1, j + 1));
    // Local index 2(k−1) is cos_k, 2(k−1)+1 is sin_k; ∂ cos_k = −ω sin_k, ∂ sin_k = ω cos_k.
    let da = Mat::from_fn(r, r, |i, j| {
        let k = i / 2;
        if i % 2 == 0 {
            d[k] * ar[(i + 1, j)]
        } else {
            -d[k] * ar[(i - 1, j)]
        }
    });
    let (vals, vecs) = complex_eigen(&da)?;
    let scale = vals.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    Ok(HamiltonianSpectrum {
        kind,
        method: EigenMethod::Full,
        column: (0..vals.len()).collect(),
        eigenvalues: vals,
        scale,
        form_scale,
        vectors: vecs,
        form: ar,
        weights: d,
    })
}

fn reduced_spectrum(a: &DenseMatrix, kind: HamiltonianKind, d: Vec<f64>, form_scale: f64) -> Result<HamiltonianSpectrum> {
    let m = a.order() / 2 - 1;
    let acc = Mat::from_fn(m, m, |i, j| a.get(2 * i + 1, 2 * j + 1));
    // K = W A_ss W, M = −K A_cc.
    let k = Mat::from_fn(m, m, |i, j| d[i] * a.get(2 * i + 2, 2 * j + 2) * d[j]);
    let mm = -(&k * &acc);
    let (mu, vecs) = complex_eigen(&mm)?;
    let mut eigenvalues = Vec::with_capacity(2 * m);
    let mut column = Vec::with_capacity(2 * m);
    for (i, z) in mu.iter().enumerate() {
        let mut l = z.sqrt();
        if l.re < 0.0 || (l.re == 0.0 && l.im < 0.0) {
            l = -l;
        }
        eigenvalues.push(l);
        eigenvalues.push(-l);
        column.push(i);
        column.push(i);
    }
    let scale = eigenvalues.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    Ok(HamiltonianSpectrum {
        kind,
        method: EigenMethod::ParityReduced,
        eigenvalues,
        scale,
        form_scale,
        vectors: vecs,
        column,
        form: acc,
        weights: d,
    })
}

impl HamiltonianSpectrum {
    /// Largest distance from `−λ̄` and `λ̄` to the spectrum, relative to `max|λ|`.
    pub fn quadruple_defect(&self) -> f64 {
        let eig = &self.eigenvalues;
        let nearest = |z: Complex64| eig.iter().fold(f64::INFINITY, |m, w| m.min((w - z).norm()));
        let worst = eig
            .iter()
            .map(|z| nearest(z.conj()).max(nearest(-z.conj())))
            .fold(0.0, f64::max);
        if self.scale == 0.0 {
            0.0
        } else {
            worst / self.scale
        }
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re))
    }

    fn sandwich_vector(&self, idx: usize) -> Vec<Complex64> {
        let col = self.vectors.col(self.column[idx]);
        col.iter().copied().collect()
    }

    fn form_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = self.form.nrows();
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for (j, &vj) in v.iter().enumerate().take(m) {
            let col = self.form.col(j);
            for i in 0..m {
                out[i] += vj * col[i];
            }
        }
        out
    }

    fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    }

    /// Squared norm of the full eigenvector behind eigenvalue `idx`.
    fn full_norm_sq(&self, idx: usize) -> f64 {
        let v = self.sandwich_vector(idx);
        let base: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        match self.method {
            EigenMethod::Full => base,
            EigenMethod::ParityReduced => {
                // v_s = D_sc A_cc v_c / λ with D_sc = −W.
                let av = self.form_apply(&v);
                let ds: f64 = av.iter().zip(&self.weights).map(|(z, w)| (z * w).norm_sqr()).sum();
                let l = self.eigenvalues[idx].norm_sqr();
                if l == 0.0 {
                    base
                } else {
                    base + ds / l
                }
            }
        }
    }

    /// Hermitian form `⟨A v_j, v_k⟩` of the full eigenvectors, unnormalized.
    fn form_entry(&self, j: usize, k: usize) -> Complex64 {
        let vj = self.sandwich_vector(j);
        let vk = self.sandwich_vector(k);
        let base = Self::dot(&vj, &self.form_apply(&vk));
        match self.method {
            EigenMethod::Full => base,
            EigenMethod::ParityReduced => {
                let lj = self.eigenvalues[j];
                let lk = self.eigenvalues[k];
                base * (Complex64::new(1.0, 0.0) - lk / lj.conj())
            }
        }
    }

    /// Krein form of a single eigenvector normalized to unit length.
    pub fn form_value(&self, idx: usize) -> f64 {
        self.form_entry(idx, idx).re / self.full_norm_sq(idx)
    }

    /// Eigenvector of `idx` as full restricted coordinates (cos_1, sin_1, …).
    pub fn eigenvector(&self, idx: usize) -> Vec<Complex64> {
        let v = self.sandwich_vector(idx);
        match self.method {
            EigenMethod::Full => v,
            EigenMethod::ParityReduced => {
                let av = self.form_apply(&v);
                let l = self.eigenvalues[idx];
                let mut out = Vec::with_capacity(2 * v.len());
                for k in 0..v.len() {
                    out.push(v[k]);
                    out.push(-self.weights[k] * av[k] / l);
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EigenClass {
    RealPos,
    RealNeg,
    Complex,
    ImagPosSig,
    ImagNegSig,
    Zero,
    Indet,
}

impl fmt::Display for EigenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EigenClass::RealPos => "REAL_POS",
            EigenClass::RealNeg => "REAL_NEG",
            EigenClass::Complex => "COMPLEX",
            EigenClass::ImagPosSig => "IMAG_POS_SIG",
            EigenClass::ImagNegSig => "IMAG_NEG_SIG",
            EigenClass::Zero => "ZERO",
            EigenClass::Indet => "INDET",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KreinTolerances {
    pub re_tol: f64,
    pub im_tol: f64,
    pub sig_tol: f64,
}

impl KreinTolerances {
    pub fn for_spectrum(h: &HamiltonianSpectrum) -> Self {
        Self {
            re_tol: EIG_REL * h.scale,
            im_tol: EIG_REL * h.scale,
            sig_tol: SIG_REL * h.form_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifiedEigenvalue {
    pub re: f64,
    pub im: f64,
    pub class: EigenClass,
    pub krein_form_value: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KreinClassification {
    pub k_r: usize,
    pub k_c: usize,
    pub k_i_minus: usize,
    /// Imaginary eigenvalues whose form eigenvalue lies within `sig_tol` of 0.
    pub indeterminate: Vec<(Complex64, f64)>,
    pub re_tol: f64,
    pub im_tol: f64,
    pub sig_tol: f64,
    pub zero_count: usize,
    pub eigenvalues: Vec<ClassifiedEigenvalue>,
}

impl KreinClassification {
    pub fn k_ham(&self) -> usize {
        self.k_r + self.k_c + self.k_i_minus
    }
}

fn hermitian_inertia(f: &Mat<Complex64>) -> Result<Vec<f64>> {
    let n = f.nrows();
    let h = Mat::from_fn(n, n, |i, j| 0.5 * (f[(i, j)] + f[(j, i)].conj()));
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Counts `k_r`, `k_c`, `k_i⁻` of a Hamiltonian spectrum.
pub fn classify_krein(h: &HamiltonianSpectrum, tols: KreinTolerances) -> Result<KreinClassification> {
    let KreinTolerances { re_tol, im_tol, sig_tol } = tols;
    let eig = &h.eigenvalues;
    let mut classes: Vec<(EigenClass, Option<f64>)> = vec![(EigenClass::Zero, None); eig.len()];
    let (mut k_r, mut k_c, mut zero_count) = (0, 0, 0);
    let mut upper = Vec::new();
    for (i, z) in eig.iter().enumerate() {
        let class = if z.re.abs() <= re_tol {
            if z.im.abs() <= im_tol {
                zero_count += 1;
                EigenClass::Zero
            } else {
                if z.im > 0.0 {
                    upper.push(i);
                }
                // Provisional; settled by the cluster forms below.
                EigenClass::ImagPosSig
            }
        } else if z.im.abs() <= im_tol {
            if z.re > 0.0 {
                k_r += 1;
                EigenClass::RealPos
            } else {
                EigenClass::RealNeg
            }
        } else {
            if z.re > 0.0 {
                k_c += 1;
            }
            EigenClass::Complex
        };
        classes[i] = (class, None);
    }

    // Cluster imaginary eigenvalues in the upper half plane by Im λ.
    upper.sort_by(|&a, &b| eig[a].im.total_cmp(&eig[b].im).then(a.cmp(&b)));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &upper {
        match clusters.last_mut() {
            Some(c) if eig[i].im - eig[*c.last().unwrap()].im <= im_tol => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let mut k_i_minus = 0;
    let mut indeterminate = Vec::new();
    for cluster in &clusters {
        let m = cluster.len();
        let norms: Vec<f64> = cluster.iter().map(|&i| h.full_norm_sq(i).sqrt()).collect();
        let f = Mat::from_fn(m, m, |a, b| h.form_entry(cluster[a], cluster[b]) / (norms[a] * norms[b]));
        let values = hermitian_inertia(&f)?;
        let neg = values.iter().filter(|&&v| v < -sig_tol).count();
        let near: Vec<f64> = values.iter().copied().filter(|v| v.abs() <= sig_tol).collect();
        k_i_minus += 2 * neg;
        for (slot, &i) in cluster.iter().enumerate() {
            let fv = f[(slot, slot)].re;
            let class = if m == 1 && fv.abs() <= sig_tol {
                EigenClass::Indet
            } else if m == 1 && fv < 0.0 {
                EigenClass::ImagNegSig
            } else if m == 1 {
                EigenClass::ImagPosSig
            } else if !near.is_empty() {
                EigenClass::Indet
            } else if neg > 0 && neg == m {
                EigenClass::ImagNegSig
            } else if neg == 0 {
                EigenClass::ImagPosSig
            } else {
                // Mixed cluster: assign by the diagonal entry.
                if fv < 0.0 {
                    EigenClass::ImagNegSig
                } else {
                    EigenClass::ImagPosSig
                }
            };
            classes[i] = (class, Some(fv));
            if class == EigenClass::Indet {
                indeterminate.push((eig[i], fv));
            }
        }
    }
    // Mirror the upper-half classes onto their conjugate partners.
    for (i, z) in eig.iter().enumerate() {
        if classes[i].0 == EigenClass::ImagPosSig && classes[i].1.is_none() && z.im < 0.0 {
            let partner = upper
                .iter()
                .copied()
                .min_by(|&a, &b| (eig[a] - z.conj()).norm().total_cmp(&(eig[b] - z.conj()).norm()));
            if let Some(j) = partner {
                classes[i] = classes[j];
            }
        }
    }
    let eigenvalues = eig
        .iter()
        .zip(&classes)
        .map(|(z, (class, form))| ClassifiedEigenvalue {
            re: z.re,
            im: z.im,
            class: *class,
            krein_form_value: *form,
        })
        .collect();
    Ok(KreinClassification {
        k_r,
        k_c,
        k_i_minus,
        indeterminate,
        re_tol,
        im_tol,
        sig_tol,
        zero_count,
        eigenvalues,
    })
}

/// Count of eigenvalues of the restricted `∂ₓA(L)` with `|λ| ≤ tol·max|λ|`.
pub fn generalized_kernel_dim(l: &LinOperator, tol: f64) -> Result<usize> {
    let h = hamiltonian_spectrum(&l.assemble(), HamiltonianKind::Kdv)?;
    Ok(h.eigenvalues.iter().filter(|z| z.norm() <= tol * h.scale).count())
}
