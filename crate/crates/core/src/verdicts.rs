//! Stability verdicts: the index formula evaluated through the slope of the
//! wave family, cross-checked against the directly computed Krein counts.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::grid::{
    derivative_multiplier, fractional_derivative_multiplier, identity_defects, inner_product,
    inverse_fractional_multiplier, make_grid, RealField, SpectralGrid,
};
use crate::operators::{
    bbm_linearization, bbm_symmetrize, kdv_linearization, sandwich, schrodinger_operator, DenseMatrix,
};
use crate::spectra::{
    bbm_slope, classify_krein, constrained_quantity, constrained_quantity_bbm, constrained_quantity_sandwich,
    generalized_kernel_dim, hamiltonian_spectrum, hamiltonian_spectrum_with, slope_analytic, symmetric_spectrum,
    EigenMethod, HamiltonianKind, HamiltonianSpectrum, KreinClassification, KreinTolerances, GEN_KERNEL_REL,
};
use crate::waves::{
    bbm_momentum, bo_profile, p_max, scaled_wave, solve_ground_state, Model, SolverOptions, WaveProfile,
    BO_NORM_SQ,
};

/// Relative width of the band in which the slope counts as zero.
pub const DEGENERACY_REL: f64 = 1e-3;

/// Grid and solver settings for one verdict. `n` and `half_length` describe
/// the grid of the normalized profile Q; the wave at speed `c` lives on its
/// image under the scaling, with the same `n` (see [`scaled_wave`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub n: usize,
    pub half_length: f64,
    #[serde(default)]
    pub solver_tol: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub method: Option<EigenMethod>,
    /// BBM difference step as a fraction of `c − 1`.
    #[serde(default = "default_dc_rel")]
    pub bbm_dc_rel: f64,
}

fn default_dc_rel() -> f64 {
    1e-2
}

impl Numerics {
    /// Defaults that resolve the ground-state core for dispersion order `s`.
    /// Lower orders have sharper cores and slower tails.
    pub fn for_order(s: f64) -> Self {
        let (n, half_length) = if s >= 1.9 {
            (512, 40.0)
        } else if s >= 1.2 {
            (2048, 100.0)
        } else if s >= 0.9 {
            (2048, 40.0)
        } else if s >= 0.7 {
            (4096, 40.0)
        } else {
            (4096, 20.0)
        };
        Self {
            n,
            half_length,
            solver_tol: None,
            max_iters: None,
            method: None,
            bbm_dc_rel: default_dc_rel(),
        }
    }

    /// [`Numerics::for_order`], refined for fBBM at `s ≈ 2`. The BBM
    /// Hamiltonian is bounded, so its eigenvalue tolerances are small and the
    /// zero pair must be resolved more tightly than for fKdV.
    pub fn for_model(model: Model, s: f64) -> Self {
        let mut n = Self::for_order(s);
        if model == Model::Fbbm && s >= 1.9 {
            n.n *= 2;
        }
        n
    }

    pub fn grid(&self) -> Result<Arc<SpectralGrid>> {
        make_grid(self.n, self.half_length)
    }

    pub fn solver(&self, s: f64) -> SolverOptions {
        let mut opts = SolverOptions::for_order(s);
        if let Some(tol) = self.solver_tol {
            opts.tol = tol;
        }
        if let Some(iters) = self.max_iters {
            opts.max_iters = iters;
        }
        opts
    }

    fn hamiltonian(&self, a: &DenseMatrix, kind: HamiltonianKind) -> Result<HamiltonianSpectrum> {
        match self.method {
            Some(m) => hamiltonian_spectrum_with(a, kind, m),
            None => hamiltonian_spectrum(a, kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Stable,
    Unstable,
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "STABLE",
            Verdict::Unstable => "UNSTABLE",
            Verdict::Degenerate => "DEGENERATE",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KreinIndexResult {
    pub s: f64,
    pub p: f64,
    pub c: f64,
    pub model: Model,
    #[serde(rename = "n_L")]
    pub n_l: usize,
    /// Constrained quantity on the mean-zero subspace.
    pub d: f64,
    pub slope: f64,
    #[serde(rename = "K_formula")]
    pub k_formula: i64,
    pub k_r: usize,
    pub k_c: usize,
    pub k_i_minus: usize,
    #[serde(rename = "K_direct")]
    pub k_direct: usize,
    pub verdict: Verdict,
    pub n: usize,
    pub half_length: f64,
    pub max_real_part: f64,
    pub indeterminate: usize,
    /// The wave touches the box edge or a signature was indeterminate.
    pub accuracy_warning: bool,
    pub diagnostics: Vec<String>,
}

impl KreinIndexResult {
    pub fn summary_line(&self) -> String {
        format!("K_Ham={} verdict={}", self.k_formula, self.verdict)
    }
}

fn check_order(s: f64, p: f64) -> Result<()> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::param(format!("s = {s} must lie in (0, 2]")));
    }
    let pm = p_max(s);
    if !(p > 0.0 && p < pm) {
        return Err(Error::OutsideExistenceWindow { s, p, p_max: pm });
    }
    Ok(())
}

struct Pieces<'a> {
    u: &'a WaveProfile,
    n_l: usize,
    d: f64,
    slope: f64,
    band: f64,
    hamiltonian: HamiltonianSpectrum,
    krein: KreinClassification,
    diagnostics: Vec<String>,
}

fn assemble_result(model: Model, grid: &SpectralGrid, pieces: Pieces<'_>) -> Result<KreinIndexResult> {
    let Pieces {
        u,
        n_l,
        d,
        slope,
        band,
        hamiltonian,
        krein,
        mut diagnostics,
    } = pieces;
    let degenerate = slope.abs() <= band;
    let k_formula = n_l as i64 - i64::from(slope > 0.0);
    let k_direct = krein.k_ham();
    let verdict = if degenerate {
        diagnostics.push(format!(
            "|slope| = {:e} within the degeneracy band {band:e}; the index formula does not apply",
            slope.abs()
        ));
        Verdict::Degenerate
    } else if k_formula == 0 {
        Verdict::Stable
    } else if k_formula % 2 != 0 || krein.k_r + krein.k_c > 0 {
        Verdict::Unstable
    } else {
        diagnostics.push(format!(
            "even index {k_formula} carried by negative-signature imaginary eigenvalues; no direct instability"
        ));
        Verdict::Stable
    };
    if !degenerate && (d < 0.0) != (slope > 0.0) {
        diagnostics.push(format!(
            "sign of the mean-zero constrained quantity d = {d:e} disagrees with -slope/2 = {:e}; the box is too short",
            -slope / 2.0
        ));
    }
    if !degenerate && k_formula.rem_euclid(2) == 1 && krein.k_r == 0 {
        diagnostics.push("odd index without a real positive eigenvalue".into());
    }
    if !krein.indeterminate.is_empty() {
        diagnostics.push(format!("{} imaginary eigenvalues of indeterminate signature", krein.indeterminate.len()));
    }
    let qd = hamiltonian.quadruple_defect();
    if qd > 1e-6 {
        diagnostics.push(format!("quadruple symmetry defect {qd:e}"));
    }
    diagnostics.extend(u.warnings.iter().cloned());
    if u.truncated() {
        diagnostics.push(format!("wave truncated: boundary value {:e}", u.boundary_value));
    }
    let result = KreinIndexResult {
        s: u.s,
        p: u.p,
        c: u.c,
        model,
        n_l,
        d,
        slope,
        k_formula,
        k_r: krein.k_r,
        k_c: krein.k_c,
        k_i_minus: krein.k_i_minus,
        k_direct,
        verdict,
        n: grid.n(),
        half_length: grid.half_length(),
        max_real_part: hamiltonian.max_real_part(),
        indeterminate: krein.indeterminate.len(),
        accuracy_warning: u.truncated() || !krein.indeterminate.is_empty(),
        diagnostics,
    };
    if !degenerate && k_formula != k_direct as i64 {
        return Err(Error::IndexMismatch(Box::new(result)));
    }
    Ok(result)
}

fn require_kernel(kernel_dim: usize, grid: &SpectralGrid) -> Result<()> {
    if kernel_dim == 0 {
        return Err(Error::Unresolved(format!(
            "the linearization has no numerical kernel on n = {}, half_length = {}; the translation mode is lost, refine the grid",
            grid.n(),
            grid.half_length()
        )));
    }
    Ok(())
}

/// Full fKdV pipeline: ground state, scaling, linearization, counts,
/// Hamiltonian spectrum and classification.
pub fn kdv_verdict(s: f64, p: f64, c: f64, numerics: &Numerics) -> Result<KreinIndexResult> {
    check_order(s, p)?;
    if !(c > 0.0) {
        return Err(Error::param(format!("c = {c} must be positive")));
    }
    let grid = numerics.grid()?;
    let opts = numerics.solver(s);
    let q = solve_ground_state(s, p, &grid, &opts).stage("solve")?;
    let u = scaled_wave(&q, Model::Fkdv, c).stage("scale")?;
    let grid = u.grid().clone();
    let l = kdv_linearization(&u).stage("linearize")?;
    let a = l.assemble();
    let counts = symmetric_spectrum(&a, None).stage("counts")?;
    require_kernel(counts.kernel_dim, &grid)?;
    let du = derivative_multiplier(&grid).apply(&u.field)?;
    let cq = constrained_quantity(&l, &du).stage("constrained quantity")?;
    let hamiltonian = numerics.hamiltonian(&a, HamiltonianKind::Kdv).stage("hamiltonian")?;
    let krein = classify_krein(&hamiltonian, KreinTolerances::for_spectrum(&hamiltonian)).stage("classify")?;
    let slope = slope_analytic(s, p, c, q.norm_sq())?;

    let mut diagnostics = Vec::new();
    let h = 1e-3 * c;
    let up = scaled_wave(&q, Model::Fkdv, c + h).stage("slope")?.norm_sq();
    let dn = scaled_wave(&q, Model::Fkdv, c - h).stage("slope")?.norm_sq();
    let fd = (up - dn) / (2.0 * h);
    let band = DEGENERACY_REL * u.norm_sq() / c;
    if slope.abs() > band && (fd > 0.0) != (slope > 0.0) {
        diagnostics.push(format!("finite-difference slope {fd:e} disagrees in sign with {slope:e}"));
    }
    if cq.near_singular {
        diagnostics.push("near-singular constrained solve".into());
    }
    assemble_result(
        Model::Fkdv,
        &grid,
        Pieces {
            u: &u,
            n_l: counts.negative_count,
            d: cq.value,
            slope,
            band,
            hamiltonian,
            krein,
            diagnostics,
        },
    )
}

/// fBBM pipeline through the symmetrized operator `B L₀ B`.
pub fn bbm_verdict(s: f64, p: f64, c: f64, numerics: &Numerics) -> Result<KreinIndexResult> {
    check_order(s, p)?;
    if !(c > 1.0) {
        return Err(Error::param(format!("BBM waves need c > 1, got {c}")));
    }
    let grid = numerics.grid()?;
    let opts = numerics.solver(s);
    let q = solve_ground_state(s, p, &grid, &opts).stage("solve")?;
    let u = scaled_wave(&q, Model::Fbbm, c).stage("scale")?;
    let grid = u.grid().clone();
    let l0 = bbm_linearization(&u).stage("linearize")?;
    let counts = symmetric_spectrum(&l0.assemble(), None).stage("counts")?;
    require_kernel(counts.kernel_dim, &grid)?;
    let sym = bbm_symmetrize(&l0).stage("symmetrize")?;
    let sym_counts = symmetric_spectrum(&sym, None).stage("counts")?;
    if sym_counts.negative_count != counts.negative_count {
        return Err(Error::Inconsistent(format!(
            "n(B L0 B) = {} differs from n(L0) = {}",
            sym_counts.negative_count, counts.negative_count
        )));
    }
    let cq = constrained_quantity_bbm(&l0, &u).stage("constrained quantity")?;
    let hamiltonian = numerics.hamiltonian(&sym, HamiltonianKind::Bbm).stage("hamiltonian")?;
    let krein = classify_krein(&hamiltonian, KreinTolerances::for_spectrum(&hamiltonian)).stage("classify")?;

    let dc = numerics.bbm_dc_rel * (c - 1.0);
    let bs = bbm_slope(|cc| scaled_wave(&q, Model::Fbbm, cc), &q, c, dc).stage("slope")?;
    let slope = bs.finite_difference;
    let band = DEGENERACY_REL * bbm_momentum(&u)? / c;
    let mut diagnostics = bs.warnings.clone();
    if slope.abs() > band {
        if (bs.closed_form > 0.0) != (slope > 0.0) {
            return Err(Error::Inconsistent(format!(
                "closed-form slope {:e} and finite-difference slope {slope:e} disagree in sign",
                bs.closed_form
            )));
        }
        if (bs.literature_bracket > 0.0) != (slope > 0.0) {
            diagnostics.push(format!(
                "literature bracket {:e} disagrees in sign with the slope {slope:e}",
                bs.literature_bracket
            ));
        }
    }
    diagnostics.push(format!(
        "closed-form slope {:e}, literature bracket {:e}",
        bs.closed_form, bs.literature_bracket
    ));
    if cq.near_singular {
        diagnostics.push("near-singular constrained solve".into());
    }
    assemble_result(
        Model::Fbbm,
        &grid,
        Pieces {
            u: &u,
            n_l: counts.negative_count,
            d: cq.value,
            slope,
            band,
            hamiltonian,
            krein,
            diagnostics,
        },
    )
}

/// Dispatches on the model.
pub fn verdict(model: Model, s: f64, p: f64, c: f64, numerics: &Numerics) -> Result<KreinIndexResult> {
    match model {
        Model::Fkdv | Model::Normalized => kdv_verdict(s, p, c, numerics),
        Model::Fbbm => bbm_verdict(s, p, c, numerics),
        Model::BenjaminOno => kdv_verdict(1.0, 1.0, c, numerics),
    }
}

/// The matrix whose Hamiltonian spectrum decides the verdict: `L` for
/// fKdV, `B L₀ B` for fBBM.
pub fn stability_matrix(model: Model, s: f64, p: f64, c: f64, numerics: &Numerics) -> Result<(DenseMatrix, HamiltonianKind)> {
    check_order(s, p)?;
    let grid = numerics.grid()?;
    let opts = numerics.solver(s);
    let q = solve_ground_state(s, p, &grid, &opts).stage("solve")?;
    match model {
        Model::Fbbm => {
            if !(c > 1.0) {
                return Err(Error::param(format!("BBM waves need c > 1, got {c}")));
            }
            let u = scaled_wave(&q, Model::Fbbm, c).stage("scale")?;
            let sym = bbm_symmetrize(&bbm_linearization(&u)?)?;
            Ok((sym, HamiltonianKind::Bbm))
        }
        _ => {
            if !(c > 0.0) {
                return Err(Error::param(format!("c = {c} must be positive")));
            }
            let u = scaled_wave(&q, Model::Fkdv, c).stage("scale")?;
            Ok((kdv_linearization(&u)?.assemble(), HamiltonianKind::Kdv))
        }
    }
}

/// Hamiltonian spectrum of `a` with every eigenvalue classified.
pub fn classified_spectrum(a: &DenseMatrix, kind: HamiltonianKind, numerics: &Numerics) -> Result<KreinClassification> {
    let h = numerics.hamiltonian(a, kind).stage("hamiltonian")?;
    classify_krein(&h, KreinTolerances::for_spectrum(&h)).stage("classify")
}

/// `−∂² + c − 2 sech²x`, the reference Schrödinger operator.
pub fn schrodinger_sech2(grid: &Arc<SpectralGrid>, c: f64) -> Result<crate::operators::LinOperator> {
    let v = RealField::from_fn(grid.clone(), |x| 2.0 / x.cosh().powi(2));
    schrodinger_operator(&v, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Axis {
    P,
    C,
    S,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub start: f64,
    pub end: f64,
    /// Number of points, endpoints included.
    pub steps: usize,
    pub s: f64,
    pub p: f64,
    pub c: f64,
    pub model: Model,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            k => (0..k)
                .map(|i| {
                    let t = i as f64 / (k - 1) as f64;
                    // Round to 12 digits so 3.5 + 0.1·k prints as written.
                    let v = self.start + t * (self.end - self.start);
                    (v * 1e12).round() / 1e12
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s: f64,
    pub p: f64,
    pub c: f64,
    pub model: Model,
    pub result: std::result::Result<KreinIndexResult, String>,
    /// The error, if any, was a formula/direct-count disagreement.
    #[serde(default)]
    pub theory_failure: bool,
}

impl SweepPoint {
    pub fn verdict(&self) -> Option<Verdict> {
        self.result.as_ref().ok().map(|r| r.verdict)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    /// Axis intervals across which the verdict changes, degenerate and failed points skipped.
    pub flips: Vec<(f64, f64)>,
}

impl SweepReport {
    pub fn bracket_lines(&self) -> Vec<String> {
        if self.flips.is_empty() {
            return vec!["no flip".to_string()];
        }
        self.flips.iter().map(|(a, b)| format!("flip in ({a}, {b})")).collect()
    }
}

fn axis_value(spec: &SweepSpec, pt: &SweepPoint) -> f64 {
    match spec.axis {
        Axis::P => pt.p,
        Axis::C => pt.c,
        Axis::S => pt.s,
    }
}

/// Verdicts along one parameter axis. Failed points are recorded and the
/// sweep continues. `numerics = None` picks [`Numerics::for_model`] per point.
pub fn sweep(spec: &SweepSpec, numerics: Option<&Numerics>) -> SweepReport {
    let mut points = Vec::new();
    for v in spec.values() {
        let (mut s, mut p, mut c) = (spec.s, spec.p, spec.c);
        match spec.axis {
            Axis::P => p = v,
            Axis::C => c = v,
            Axis::S => s = v,
        }
        let num = numerics.cloned().unwrap_or_else(|| Numerics::for_model(spec.model, s));
        let result = verdict(spec.model, s, p, c, &num);
        let theory_failure = result.as_ref().err().is_some_and(Error::is_theory_failure);
        points.push(SweepPoint {
            s,
            p,
            c,
            model: spec.model,
            result: result.map_err(|e| e.to_string()),
            theory_failure,
        });
    }
    let mut flips = Vec::new();
    let mut last: Option<(f64, Verdict)> = None;
    for pt in &points {
        let Some(v) = pt.verdict() else { continue };
        if v == Verdict::Degenerate {
            continue;
        }
        let x = axis_value(spec, pt);
        if let Some((px, pv)) = last {
            if pv != v {
                flips.push((px, x));
            }
        }
        last = Some((x, v));
    }
    SweepReport {
        spec: spec.clone(),
        points,
        flips,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfCheckReport {
    pub case: String,
    pub entries: Vec<CheckEntry>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    fn push(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.entries.push(CheckEntry {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

pub const SELF_CHECK_CASES: [&str; 3] = ["gkdv-p2", "schrodinger-sech2", "bo"];
pub const SANDWICH_EPS: [f64; 4] = [0.0, 1e-3, 1e-2, 1e-1];

/// Packaged theory-consistency assertions for a named case.
pub fn self_check(case: &str) -> Result<SelfCheckReport> {
    let mut report = SelfCheckReport {
        case: case.to_string(),
        entries: Vec::new(),
    };
    match case {
        "gkdv-p2" => check_gkdv(&mut report)?,
        "schrodinger-sech2" => check_schrodinger(&mut report)?,
        "bo" => check_bo(&mut report)?,
        other => {
            return Err(Error::param(format!(
                "unknown self-check case {other:?}; known: {}",
                SELF_CHECK_CASES.join(", ")
            )))
        }
    }
    Ok(report)
}

fn sandwich_counts(l: &crate::operators::LinOperator) -> Result<Vec<usize>> {
    SANDWICH_EPS
        .iter()
        .map(|&eps| Ok(symmetric_spectrum(&sandwich(l, eps)?, None)?.negative_count))
        .collect()
}

fn random_mean_zero(grid: &Arc<SpectralGrid>, seed: u64) -> Result<RealField> {
    // Deterministic band-limited field from a small LCG.
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let modes: Vec<(f64, f64)> = (0..24).map(|_| (next(), next())).collect();
    let f = RealField::from_fn(grid.clone(), |x| {
        modes
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = grid.angular_wavenumber(k + 1);
                a * (w * x).cos() + b * (w * x).sin()
            })
            .sum()
    });
    Ok(f.without_mean())
}

fn check_gkdv(report: &mut SelfCheckReport) -> Result<()> {
    let numerics = Numerics {
        n: 512,
        half_length: 40.0,
        ..Numerics::for_order(2.0)
    };
    let grid = numerics.grid()?;
    let opts = numerics.solver(2.0);
    let q = solve_ground_state(2.0, 2.0, &grid, &opts)?;
    let l = kdv_linearization(&q)?;
    let a = l.assemble();
    let n_l = symmetric_spectrum(&a, None)?.negative_count;
    report.push("n(L) = 1", Ok((n_l == 1, format!("n(L) = {n_l}"))));
    report.push(
        "n(L) = n(L◇) = n(L◇_ε)",
        sandwich_counts(&l).map(|c| (c.iter().all(|&k| k == n_l), format!("eps {SANDWICH_EPS:?} -> {c:?}"))),
    );
    let gk = generalized_kernel_dim(&l, GEN_KERNEL_REL)?;
    report.push("generalized kernel dim = 2", Ok((gk == 2, format!("dim = {gk}"))));

    // Sandwich equivalence: ∂ₓA(L) against J·A(L◇).
    report.push("sandwich eigenvalue equivalence", sandwich_equivalence(&l, &a));

    // ε-limit of the constrained quantity.
    let du = derivative_multiplier(&grid).apply(&q.field)?;
    let d0 = constrained_quantity(&l, &du)?.value;
    let mut values = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3, 0.0] {
        values.push(constrained_quantity_sandwich(&l, &du, eps)?.value);
    }
    let spread = values.iter().map(|v| (v - d0).abs()).fold(0.0, f64::max);
    let signs = values.iter().all(|v| (*v < 0.0) == (d0 < 0.0));
    report.push(
        "eps-limit of the constrained quantity",
        Ok((signs && spread <= 1e-8 * d0.abs(), format!("d = {d0:e}, eps values {values:?}"))),
    );
    let slope = slope_analytic(2.0, 2.0, 1.0, q.norm_sq())?;
    report.push(
        "d = -slope/2",
        Ok((
            (d0 + slope / 2.0).abs() <= 1e-4 * d0.abs(),
            format!("d = {d0:e}, -slope/2 = {:e}", -slope / 2.0),
        )),
    );
    report.push("multiplier identities", multiplier_identities(&grid));
    Ok(())
}

/// Nonzero eigenvalues of `∂ₓA(L)` and `J A(L◇)` agree.
fn sandwich_equivalence(l: &crate::operators::LinOperator, a: &DenseMatrix) -> Result<(bool, String)> {
    let direct = hamiltonian_spectrum_with(a, HamiltonianKind::Kdv, EigenMethod::Full)?;
    let sw = hamiltonian_spectrum_with(&sandwich(l, 0.0)?, HamiltonianKind::Sandwiched, EigenMethod::Full)?;
    let cut = 1e-3 * direct.scale;
    let key = |h: &HamiltonianSpectrum| {
        let mut v: Vec<_> = h.eigenvalues.iter().copied().filter(|z| z.norm() > cut).collect();
        v.sort_by(|x, y| x.im.total_cmp(&y.im).then(x.re.total_cmp(&y.re)));
        v
    };
    let (x, y) = (key(&direct), key(&sw));
    if x.len() != y.len() {
        return Ok((false, format!("{} vs {} eigenvalues above the cut", x.len(), y.len())));
    }
    let worst = x
        .iter()
        .zip(&y)
        .map(|(p, q)| (p - q).norm() / p.norm())
        .fold(0.0, f64::max);
    Ok((worst <= 1e-6, format!("max relative difference {worst:e} over {} eigenvalues", x.len())))
}

fn multiplier_identities(grid: &Arc<SpectralGrid>) -> Result<(bool, String)> {
    let f = random_mean_zero(grid, 7)?;
    let defects = identity_defects(&f)?;
    let half = inverse_fractional_multiplier(grid, 0.5)?.apply(&fractional_derivative_multiplier(grid, 0.5)?.apply(&f)?)?;
    let half_err = half.zip_with(&f, |a, b| a - b)?.norm() / f.norm();
    Ok((
        defects.worst().max(half_err) <= 1e-10,
        format!(
            "∂=J|∂| {:e}, J²=-I {:e}, skew {:e}, Parseval {:e}, |∂|^-½|∂|^½ {half_err:e}",
            defects.hilbert_factorization, defects.j_squared, defects.skew, defects.parseval
        ),
    ))
}

fn check_schrodinger(report: &mut SelfCheckReport) -> Result<()> {
    let grid = make_grid(512, 20.0)?;
    let c = 0.5;
    let l = schrodinger_sech2(&grid, c)?;
    let rep = symmetric_spectrum(&l.assemble(), None)?;
    let lowest = rep.eigenvalues[0];
    report.push(
        "ground state of -∂² - 2sech² at -1",
        Ok(((lowest - (-1.0 + c)).abs() <= 1e-8, format!("lowest eigenvalue {lowest} (expected {})", c - 1.0))),
    );
    report.push("n(L) = 1", Ok((rep.negative_count == 1, format!("n(L) = {}", rep.negative_count))));
    report.push(
        "n(L) = n(L◇) = n(L◇_ε)",
        sandwich_counts(&l).map(|k| (k.iter().all(|&x| x == 1), format!("eps {SANDWICH_EPS:?} -> {k:?}"))),
    );
    let free = schrodinger_operator(&RealField::constant(grid.clone(), 0.0), c)?;
    let free_rep = symmetric_spectrum(&free.assemble(), None)?;
    report.push(
        "V = 0 gives n(L) = 0 and spectrum ≥ c",
        Ok((
            free_rep.negative_count == 0 && free_rep.eigenvalues[0] >= c * (1.0 - 1e-12),
            format!("n = {}, min = {}", free_rep.negative_count, free_rep.eigenvalues[0]),
        )),
    );
    let mut floors = Vec::new();
    let mut ok = true;
    for eps in [1e-3, 1e-2, 1e-1] {
        let m = symmetric_spectrum(&sandwich(&free, eps)?, None)?.eigenvalues[0];
        ok &= m >= c * eps * (1.0 - 1e-6);
        floors.push(m);
    }
    report.push("sandwich floor ≥ κ²ε", Ok((ok, format!("minima {floors:?} for eps 1e-3, 1e-2, 1e-1"))));
    report.push("multiplier identities", multiplier_identities(&grid));
    Ok(())
}

fn check_bo(report: &mut SelfCheckReport) -> Result<()> {
    let big = make_grid(4096, 400.0)?;
    let u = bo_profile(&big, 1.0)?;
    let rel = (u.norm_sq() - BO_NORM_SQ).abs() / BO_NORM_SQ;
    report.push(
        "⟨U_1,U_1⟩ = 8π",
        Ok((rel <= 1e-2, format!("{} vs {BO_NORM_SQ} ({:.2e} relative)", u.norm_sq(), rel))),
    );
    let slope = (bo_profile(&big, 1.001)?.norm_sq() - bo_profile(&big, 0.999)?.norm_sq()) / 0.002;
    report.push(
        "∂_c⟨U_c,U_c⟩ = 8π",
        Ok(((slope - 8.0 * PI).abs() <= 1e-2 * 8.0 * PI, format!("slope {slope}"))),
    );
    let numerics = Numerics::for_order(1.0);
    let grid = numerics.grid()?;
    let q = solve_ground_state(1.0, 1.0, &grid, &numerics.solver(1.0))?;
    let l = kdv_linearization(&q)?;
    let gk = generalized_kernel_dim(&l, GEN_KERNEL_REL)?;
    report.push("generalized kernel dim = 2", Ok((gk == 2, format!("dim = {gk}"))));
    let n_l = symmetric_spectrum(&l.assemble(), None)?.negative_count;
    report.push(
        "n(L) = n(L◇) = n(L◇_ε)",
        sandwich_counts(&l).map(|k| (k.iter().all(|&x| x == n_l), format!("n(L) = {n_l}, eps {SANDWICH_EPS:?} -> {k:?}"))),
    );
    let du = derivative_multiplier(&grid).apply(&q.field)?;
    let d = constrained_quantity(&l, &du)?.value;
    // For s = p = 1 the mass ∫U_c is c-independent, so d = -slope/2 = -π exactly.
    report.push("d = -π", Ok(((d + PI).abs() <= 1e-4 * PI, format!("d = {d}"))));
    let ip = inner_product(&q.field, &q.field)?;
    report.push(
        "wave is the Lorentzian 2/(1+x²)",
        Ok(((ip - 2.0 * PI).abs() <= 1e-2 * 2.0 * PI, format!("⟨Q,Q⟩ = {ip}"))),
    );
    Ok(())
}
