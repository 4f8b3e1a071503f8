//! Classical and quantum Fisher information, Cramér–Rao bounds, the
//! agnosticity certificate and a seeded Monte Carlo check of the binary MLE.
//!
//! Derivatives are central differences with step [`NumericalConfig::fd_step`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qlinalg::{hermitian_eig, symmetric_eig, Axis, Complex, STRUCT_TOL};
use crate::qstate::{DensityMatrix, Ket, OutcomeDistribution, Param, ParamVector};

pub type Matrix3 = [[f64; 3]; 3];

/// Tolerance for symmetry/PSD checks on information matrices, relative to
/// `max(1, largest |entry|)`.
pub const INFO_MATRIX_TOL: f64 = 1e-8;
/// Relative singular-value cutoff of the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericalConfig {
    pub fd_step: f64,
    pub prob_floor: f64,
}

impl NumericalConfig {
    pub fn new(fd_step: f64, prob_floor: f64) -> Result<Self> {
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::OutOfRange {
                name: "fd_step",
                value: fd_step,
                range: "(0, inf)",
            });
        }
        if !(prob_floor > 0.0 && prob_floor.is_finite()) {
            return Err(Error::OutOfRange {
                name: "prob_floor",
                value: prob_floor,
                range: "(0, inf)",
            });
        }
        Ok(Self {
            fd_step,
            prob_floor,
        })
    }
}

impl Default for NumericalConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            prob_floor: 1e-12,
        }
    }
}

fn matrix_scale(m: &Matrix3) -> f64 {
    m.iter().flatten().fold(1.0_f64, |a, b| a.max(b.abs()))
}

fn check_info_matrix(m: &Matrix3) -> Result<()> {
    let tol = INFO_MATRIX_TOL * matrix_scale(m);
    let mut deviation: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            deviation = deviation.max((m[i][j] - m[j][i]).abs());
        }
    }
    if deviation > tol {
        return Err(Error::NotSymmetric { deviation });
    }
    let (vals, _) = symmetric_eig(&symmetrized(m))?;
    if vals[0] < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: vals[0],
        });
    }
    Ok(())
}

fn symmetrized(m: &Matrix3) -> Matrix3 {
    let mut out = *m;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    out
}

/// Classical Fisher matrix over `(τ, θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherMatrix {
    entries: Matrix3,
    eval_point: ParamVector,
}

impl FisherMatrix {
    pub fn new(entries: Matrix3, eval_point: ParamVector) -> Result<Self> {
        check_info_matrix(&entries)?;
        Ok(Self {
            entries,
            eval_point,
        })
    }

    pub fn entries(&self) -> &Matrix3 {
        &self.entries
    }

    pub fn eval_point(&self) -> ParamVector {
        self.eval_point
    }

    pub fn get(&self, i: Param, j: Param) -> f64 {
        self.entries[i.index()][j.index()]
    }
}

/// Quantum Fisher matrix over `(τ, θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiMatrix {
    entries: Matrix3,
    eval_point: ParamVector,
}

impl QfiMatrix {
    pub fn new(entries: Matrix3, eval_point: ParamVector) -> Result<Self> {
        check_info_matrix(&entries)?;
        Ok(Self {
            entries,
            eval_point,
        })
    }

    pub fn entries(&self) -> &Matrix3 {
        &self.entries
    }

    pub fn eval_point(&self) -> ParamVector {
        self.eval_point
    }

    pub fn get(&self, i: Param, j: Param) -> f64 {
        self.entries[i.index()][j.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightMatrix(Matrix3);

impl WeightMatrix {
    pub fn new(m: Matrix3) -> Result<Self> {
        check_info_matrix(&m)?;
        Ok(Self(m))
    }

    /// `diag(1, 0, 0)`: only the rotation angle counts.
    pub fn tau_only() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    }

    pub fn identity() -> Self {
        Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn entries(&self) -> &Matrix3 {
        &self.0
    }
}

fn central_difference(
    minus: &OutcomeDistribution,
    plus: &OutcomeDistribution,
    h: f64,
) -> Result<Vec<f64>> {
    if minus.len() != plus.len() {
        return Err(Error::Invalid(format!(
            "outcome count changed across the stencil ({} vs {})",
            minus.len(),
            plus.len()
        )));
    }
    Ok(minus
        .entries()
        .iter()
        .zip(plus.entries())
        .map(|((_, a), (_, b))| (b - a) / (2.0 * h))
        .collect())
}

/// Accumulates `Σ_m (∂_i p_m)(∂_j p_m) / p_m` for `K` parameters. Outcomes
/// with a vanishing probability are skipped when every slope is below
/// `√ε`, and reported as degenerate otherwise.
fn fisher_sum<const K: usize>(
    center: &OutcomeDistribution,
    slopes: &[Vec<f64>; K],
    cfg: &NumericalConfig,
) -> Result<[[f64; K]; K]> {
    let mut out = [[0.0; K]; K];
    let slope_floor = cfg.prob_floor.sqrt();
    for (m, (label, p)) in center.entries().iter().enumerate() {
        let dp: [f64; K] = std::array::from_fn(|i| slopes[i][m]);
        if *p < cfg.prob_floor {
            let worst = dp.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            if worst < slope_floor {
                continue;
            }
            return Err(Error::DegeneratePoint {
                label: label.clone(),
                probability: *p,
                slope: worst,
            });
        }
        for i in 0..K {
            for j in 0..K {
                out[i][j] += dp[i] * dp[j] / p;
            }
        }
    }
    Ok(out)
}

/// `F(τ) = Σ_m (∂_τ p_m)² / p_m` at `tau0`.
pub fn classical_fi_scalar<F>(dist_fn: F, tau0: f64, cfg: &NumericalConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<OutcomeDistribution>,
{
    let h = cfg.fd_step;
    let center = dist_fn(tau0)?;
    let slope = central_difference(&dist_fn(tau0 - h)?, &dist_fn(tau0 + h)?, h)?;
    if slope.len() != center.len() {
        return Err(Error::Invalid("outcome count changed across the stencil".into()));
    }
    Ok(fisher_sum::<1>(&center, &[slope], cfg)?[0][0])
}

/// Full classical Fisher matrix over `(τ, θ, φ)` at `lambda0`.
pub fn classical_fi_matrix<F>(
    dist_fn: F,
    lambda0: &ParamVector,
    cfg: &NumericalConfig,
) -> Result<FisherMatrix>
where
    F: Fn(&ParamVector) -> Result<OutcomeDistribution>,
{
    let h = cfg.fd_step;
    let center = dist_fn(lambda0)?;
    let mut slopes: [Vec<f64>; 3] = Default::default();
    for p in Param::ALL {
        let d = central_difference(
            &dist_fn(&lambda0.shifted(p, -h))?,
            &dist_fn(&lambda0.shifted(p, h))?,
            h,
        )?;
        if d.len() != center.len() {
            return Err(Error::Invalid("outcome count changed across the stencil".into()));
        }
        slopes[p.index()] = d;
    }
    let entries = symmetrized(&fisher_sum::<3>(&center, &slopes, cfg)?);
    FisherMatrix::new(entries, *lambda0)
}

/// Multiplies `psi` by the phase that makes `⟨reference|psi⟩` real and positive.
fn align_phase(psi: &Ket, reference: &Ket) -> Vec<Complex> {
    let overlap = reference.inner(psi);
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        Complex::new(1.0, 0.0)
    };
    psi.amplitudes().iter().map(|z| z * phase).collect()
}

fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Pure-state QFI matrix
/// `F_ij = 4 Re(⟨∂_iψ|∂_jψ⟩ − ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩)`, with every stencil state
/// phase-aligned to the centre state before differencing.
pub fn qfi_pure<F>(state_fn: F, lambda0: &ParamVector, cfg: &NumericalConfig) -> Result<QfiMatrix>
where
    F: Fn(&ParamVector) -> Result<Ket>,
{
    let h = cfg.fd_step;
    let checked = |lam: &ParamVector| -> Result<Ket> {
        let psi = state_fn(lam)?;
        Ket::new(psi.amplitudes().to_vec())
    };
    let psi0 = checked(lambda0)?;
    let mut grads: Vec<Vec<Complex>> = Vec::with_capacity(3);
    for p in Param::ALL {
        let plus = align_phase(&checked(&lambda0.shifted(p, h))?, &psi0);
        let minus = align_phase(&checked(&lambda0.shifted(p, -h))?, &psi0);
        if plus.len() != psi0.dim() || minus.len() != psi0.dim() {
            return Err(Error::Invalid("state dimension changed across the stencil".into()));
        }
        grads.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    let psi = psi0.amplitudes();
    let mut entries = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let v = dot(&grads[i], &grads[j]) - dot(&grads[i], psi) * dot(psi, &grads[j]);
            entries[i][j] = 4.0 * v.re;
        }
    }
    QfiMatrix::new(symmetrized(&entries), *lambda0)
}

/// Mixed-state QFI for one parameter through the symmetric logarithmic
/// derivative `∂ρ = (Lρ + ρL)/2`. In the eigenbasis of `ρ(λ0)`,
/// `F = Σ_ij 2|(∂ρ)_ij|² / (λ_i + λ_j)` over pairs with `λ_i + λ_j ≥ ε`.
pub fn qfi_sld<F>(
    rho_fn: F,
    lambda0: &ParamVector,
    param: Param,
    cfg: &NumericalConfig,
) -> Result<f64>
where
    F: Fn(&ParamVector) -> Result<DensityMatrix>,
{
    let h = cfg.fd_step;
    let rho = rho_fn(lambda0)?;
    let plus = rho_fn(&lambda0.shifted(param, h))?;
    let minus = rho_fn(&lambda0.shifted(param, -h))?;
    let drho = plus
        .matrix()
        .try_sub(minus.matrix())?
        .scale(Complex::new(1.0 / (2.0 * h), 0.0));
    let eig = hermitian_eig(rho.matrix(), STRUCT_TOL)?;
    let v = &eig.eigenvectors;
    let d = v.adjoint().matmul(&drho)?.matmul(v)?;
    let n = rho.dim();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = eig.eigenvalues[i] + eig.eigenvalues[j];
            if s < cfg.prob_floor {
                continue;
            }
            f += 2.0 * d.get(i, j).norm_sqr() / s;
        }
    }
    Ok(f)
}

/// `4ΔH` for `H = σ̂·n̂/2`, i.e. `1 − ⟨σ̂·n̂⟩²`.
pub fn generator_variance_bound(psi: &Ket, axis: &Axis) -> Result<f64> {
    let h = axis.pauli_projection().scale(Complex::new(0.5, 0.0));
    let mean = psi.expectation(&h)?.re;
    let mean_sq = psi.expectation(&h.matmul(&h)?)?.re;
    Ok((4.0 * (mean_sq - mean * mean)).clamp(0.0, 1.0))
}

/// Moore–Penrose pseudoinverse of a symmetric 3×3 matrix through its
/// eigendecomposition; eigenvalues below `PINV_CUTOFF · max|λ|` are dropped.
pub fn pseudo_inverse(m: &Matrix3) -> Result<Matrix3> {
    let (vals, vecs) = symmetric_eig(&symmetrized(m))?;
    let largest = vals.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let cutoff = PINV_CUTOFF * largest;
    let mut out = [[0.0; 3]; 3];
    for k in 0..3 {
        if vals[k].abs() <= cutoff || vals[k] == 0.0 {
            continue;
        }
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += vecs[i][k] * vecs[j][k] / vals[k];
            }
        }
    }
    Ok(out)
}

/// `(1/N) Tr(W F⁺)`.
pub fn weighted_cr_bound(f: &FisherMatrix, w: &WeightMatrix, trials: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::OutOfRange {
            name: "N",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    check_info_matrix(w.entries())?;
    let pinv = pseudo_inverse(f.entries())?;
    let mut tr = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            tr += w.entries()[i][j] * pinv[j][i];
        }
    }
    Ok(tr / trials as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Agnostic,
    NotAgnostic,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Agnostic => "agnostic",
            Verdict::NotAgnostic => "not-agnostic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub f_tau_tau: f64,
    pub f_tau_theta: f64,
    pub f_tau_phi: f64,
    /// Human-readable reasons for a `NotAgnostic` verdict.
    pub violations: Vec<String>,
}

impl Certificate {
    pub fn max_offdiag(&self) -> f64 {
        self.f_tau_theta.abs().max(self.f_tau_phi.abs())
    }
}

/// `τ` decouples from the axis when `|F_τθ|, |F_τφ| < tol` and `F_ττ > 0`.
pub fn agnosticity_certificate(f: &FisherMatrix, tol: f64) -> Certificate {
    let f_tau_tau = f.get(Param::Tau, Param::Tau);
    let f_tau_theta = f.get(Param::Tau, Param::Theta);
    let f_tau_phi = f.get(Param::Tau, Param::Phi);
    let mut violations = Vec::new();
    if f_tau_theta.abs() >= tol {
        violations.push(format!("|F_tau_theta| = {:e} >= {tol:e}", f_tau_theta.abs()));
    }
    if f_tau_phi.abs() >= tol {
        violations.push(format!("|F_tau_phi| = {:e} >= {tol:e}", f_tau_phi.abs()));
    }
    if f_tau_tau <= 0.0 {
        violations.push(format!("F_tau_tau = {f_tau_tau:e} is not positive"));
    }
    Certificate {
        verdict: if violations.is_empty() {
            Verdict::Agnostic
        } else {
            Verdict::NotAgnostic
        },
        f_tau_tau,
        f_tau_theta,
        f_tau_phi,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Inversion of the empirical cosine for `P± = (1 ± v cos τ)/2`.
    MleBinary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    /// Outcomes drawn per batch.
    pub trials: u64,
    pub batches: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl McConfig {
    pub fn new(trials: u64, batches: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::OutOfRange {
                name: "trials",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if batches == 0 {
            return Err(Error::OutOfRange {
                name: "batches",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        Ok(Self {
            trials,
            batches,
            seed,
            estimator: Estimator::MleBinary,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    /// One estimate per batch, in batch order.
    pub estimates: Vec<f64>,
    /// Unbiased sample variance of `estimates` (0 for a single batch).
    pub sample_variance: f64,
    /// `1 / (N F(τ_true))`.
    pub cr_bound: f64,
    pub ratio: f64,
    /// Batches whose empirical cosine fell outside `[-1, 1]` and were clamped.
    pub saturated: usize,
}

/// SplitMix64 finalizer (Steele, Lea & Flood constants).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of batch `index`: `splitmix64(seed ⊕ splitmix64(index))`. Each batch
/// draws from its own ChaCha8 stream seeded with this value.
pub fn batch_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Repeated binary maximum-likelihood estimation of `τ`.
///
/// `dist_fn` must be a two-outcome family `P± = (1 ± v cos τ)/2`; the
/// visibility `v` is read off `dist_fn(0)`. Each batch draws the `+1` count
/// `n₊ ~ Binomial(N, P₊(τ_true))` and estimates
/// `τ̂ = arccos((n₊ − n₋)/(N v))`, clamping to `{0, π}` when the argument
/// leaves `[-1, 1]`.
pub fn mle_monte_carlo<F>(
    dist_fn: F,
    tau_true: f64,
    mc: &McConfig,
    numerics: &NumericalConfig,
) -> Result<EstimationResult>
where
    F: Fn(f64) -> Result<OutcomeDistribution> + Sync,
{
    let d0 = dist_fn(0.0)?;
    let dt = dist_fn(tau_true)?;
    if d0.len() != 2 || dt.len() != 2 {
        return Err(Error::Invalid("binary MLE needs a two-outcome distribution".into()));
    }
    let visibility = d0.probabilities()[0] - d0.probabilities()[1];
    if visibility <= 0.0 {
        return Err(Error::Invalid(format!(
            "distribution has no visibility at tau = 0 (v = {visibility})"
        )));
    }
    let p_plus = dt.probabilities()[0];
    let binomial = Binomial::new(mc.trials, p_plus)
        .map_err(|e| Error::Invalid(format!("binomial sampler: {e}")))?;
    let n = mc.trials as f64;

    let draws: Vec<(f64, bool)> = (0..mc.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(mc.seed, b as u64));
            let plus = binomial.sample(&mut rng) as f64;
            let cosine = (2.0 * plus - n) / (n * visibility);
            let saturated = !(-1.0..=1.0).contains(&cosine);
            (cosine.clamp(-1.0, 1.0).acos(), saturated)
        })
        .collect();

    let estimates: Vec<f64> = draws.iter().map(|(e, _)| *e).collect();
    let saturated = draws.iter().filter(|(_, s)| *s).count();
    let sample_variance = sample_variance(&estimates);
    let fi = classical_fi_scalar(&dist_fn, tau_true, numerics)?;
    let cr_bound = 1.0 / (n * fi);
    Ok(EstimationResult {
        estimates,
        sample_variance,
        cr_bound,
        ratio: sample_variance / cr_bound,
        saturated,
    })
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean squared error as the trace of the estimator covariance.
pub fn mse_of(cov: &Matrix3) -> f64 {
    cov[0][0] + cov[1][1] + cov[2][2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{
        ccs_ancilla_distribution, ccs_joint_distribution, ccs_joint_ket, ccs_joint_state,
        hindsight_distribution, single_qubit_state, CcsConfig, HindsightConfig, SingleQubitConfig,
    };
    use crate::qstate::{depolarize, AncillaPreparation, MeasurementSetting, NoiseStrength};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_3, PI};

    fn two_outcome(p: f64) -> Result<OutcomeDistribution> {
        OutcomeDistribution::new(vec![("+1".into(), p), ("-1".into(), 1.0 - p)])
    }

    /// Bures-fidelity oracle for a qubit family: `8(1 − √F(ρ(τ−δ/2), ρ(τ+δ/2)))/δ²`
    /// with the qubit fidelity `F = Tr(ρσ) + 2√(det ρ det σ)`.
    fn fidelity_qfi(rho: impl Fn(f64) -> DensityMatrix, tau: f64, delta: f64) -> f64 {
        let a = rho(tau - delta / 2.0);
        let b = rho(tau + delta / 2.0);
        let det = |m: &DensityMatrix| {
            let m = m.matrix();
            (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re
        };
        let overlap = (a.matrix() * b.matrix()).trace().re;
        let fid = overlap + 2.0 * (det(&a).max(0.0) * det(&b).max(0.0)).sqrt();
        8.0 * (1.0 - fid.sqrt()) / (delta * delta)
    }

    #[test]
    fn constant_distribution_has_no_information() {
        let f = classical_fi_scalar(|_| two_outcome(0.3), 1.0, &NumericalConfig::default()).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn ccs_fi_is_one_at_quarter_turn() {
        let cfg = CcsConfig::standard();
        let lam = ParamVector::new(FRAC_PI_4, 1.2, 0.4);
        let f = classical_fi_scalar(
            |t| ccs_ancilla_distribution(&cfg, &ParamVector { tau: t, ..lam }),
            FRAC_PI_4,
            &NumericalConfig::default(),
        )
        .unwrap();
        assert!((f - 1.0).abs() < 1e-8);
    }

    #[test]
    fn noisy_ccs_fi() {
        let cfg = CcsConfig::standard().with_noise(0.95).unwrap();
        let lam = ParamVector::new(FRAC_PI_2, 0.3, 2.0);
        let f = classical_fi_scalar(
            |t| ccs_ancilla_distribution(&cfg, &ParamVector { tau: t, ..lam }),
            FRAC_PI_2,
            &NumericalConfig::default(),
        )
        .unwrap();
        assert!((f - 0.9025).abs() < 1e-8);
    }

    #[test]
    fn degenerate_point_detection() {
        let cfg = NumericalConfig::default();
        // p = sin²(τ/2) at τ = 0: p and dp both vanish → skipped
        let f = classical_fi_scalar(|t| two_outcome((t / 2.0).cos().powi(2)), 0.0, &cfg).unwrap();
        assert!(f.abs() < 1e-6);
        // p = (1 − τ)/2 clipped at τ = 1: p = 0 with slope −½ → error
        let err = classical_fi_scalar(|t| two_outcome(((1.0 + t) / 2.0).min(1.0)), 1.0, &cfg);
        assert!(matches!(err, Err(Error::DegeneratePoint { .. })));
    }

    #[test]
    fn fi_matrix_of_maximally_mixed_probe() {
        let cfg = CcsConfig::standard().with_probe(DensityMatrix::maximally_mixed(2).unwrap());
        let lam = ParamVector::new(1.0, 0.7, 2.0);
        let f = classical_fi_matrix(|l| ccs_joint_distribution(&cfg, l), &lam, &NumericalConfig::default())
            .unwrap();
        let expected = [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((f.entries()[i][j] - expected[i][j]).abs() < 1e-8);
            }
        }
        assert_eq!(agnosticity_certificate(&f, 1e-6).verdict, Verdict::Agnostic);
    }

    #[test]
    fn hindsight_matrix_is_not_block_diagonal() {
        let cfg = HindsightConfig::standard();
        let lam = ParamVector::new(FRAC_PI_4, FRAC_PI_3, PI / 5.0);
        let f = classical_fi_matrix(|l| hindsight_distribution(&cfg, l), &lam, &NumericalConfig::default())
            .unwrap();
        let cert = agnosticity_certificate(&f, 1e-6);
        assert_eq!(cert.verdict, Verdict::NotAgnostic);
        assert!(cert.max_offdiag() > 1e-3);
        assert!(!cert.violations.is_empty());
    }

    #[test]
    fn qfi_pure_single_qubit() {
        let cfg = NumericalConfig::default();
        let plus = SingleQubitConfig {
            beta: FRAC_PI_2,
            measurement: MeasurementSetting::y(),
        };
        let q = qfi_pure(|l| single_qubit_state(&plus, l), &ParamVector::new(0.3, 0.0, 0.0), &cfg).unwrap();
        assert!((q.get(Param::Tau, Param::Tau) - 1.0).abs() < 1e-8);
        let zero = SingleQubitConfig {
            beta: 0.0,
            measurement: MeasurementSetting::y(),
        };
        let q = qfi_pure(|l| single_qubit_state(&zero, l), &ParamVector::new(0.3, 0.0, 0.0), &cfg).unwrap();
        assert!(q.get(Param::Tau, Param::Tau).abs() < 1e-8);
        assert!(matches!(
            Ket::new(vec![Complex::new(2.0, 0.0), Complex::new(0.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn qfi_pure_with_arbitrary_gauge() {
        // A λ-dependent global phase must not change the QFI.
        let cfg = NumericalConfig::default();
        let sq = SingleQubitConfig {
            beta: 1.0,
            measurement: MeasurementSetting::z(),
        };
        let lam = ParamVector::new(0.8, 1.1, 0.5);
        let plain = qfi_pure(|l| single_qubit_state(&sq, l), &lam, &cfg).unwrap();
        let gauged = qfi_pure(
            |l| {
                let psi = single_qubit_state(&sq, l)?;
                let phase = Complex::from_polar(1.0, 3.0 * l.tau + 5.0 * l.theta - 2.0 * l.phi);
                Ket::new(psi.amplitudes().iter().map(|z| z * phase).collect())
            },
            &lam,
            &cfg,
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((plain.entries()[i][j] - gauged.entries()[i][j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn sld_qfi_cases() {
        let cfg = NumericalConfig::default();
        let mixed = qfi_sld(
            |_| DensityMatrix::maximally_mixed(2),
            &ParamVector::new(0.5, 0.0, 0.0),
            Param::Tau,
            &cfg,
        )
        .unwrap();
        assert_eq!(mixed, 0.0);

        let f = 0.95;
        let noisy_plus = depolarize(&Ket::plus().density(), NoiseStrength::new(f).unwrap()).unwrap();
        let family = |tau: f64| noisy_plus.evolve(&ParamVector::new(tau, 0.0, 0.0).unitary()).unwrap();
        let q = qfi_sld(|l| Ok(family(l.tau)), &ParamVector::new(0.7, 0.0, 0.0), Param::Tau, &cfg)
            .unwrap();
        assert!((q - 0.9025).abs() < 1e-8);
        assert!((fidelity_qfi(family, 0.7, 1e-4) - 0.9025).abs() < 1e-5);
    }

    #[test]
    fn sld_matches_pure_formula() {
        let cfg = NumericalConfig::default();
        let prep = AncillaPreparation::new(0.5).unwrap();
        let probe = Ket::zero();
        let lam = ParamVector::new(1.1, 0.9, 2.3);
        let pure = qfi_pure(|l| ccs_joint_ket(&probe, &prep, l), &lam, &cfg).unwrap();
        let ccs = CcsConfig::standard().with_alpha(0.5).unwrap();
        for p in Param::ALL {
            let sld = qfi_sld(|l| ccs_joint_state(&ccs, l), &lam, p, &cfg).unwrap();
            assert!((sld - pure.get(p, p)).abs() < 1e-6, "{p:?}: {sld} vs {}", pure.get(p, p));
        }
    }

    #[test]
    fn generator_variance_values() {
        assert!((generator_variance_bound(&Ket::plus(), &Axis::z()).unwrap() - 1.0).abs() < 1e-15);
        assert!(generator_variance_bound(&Ket::zero(), &Axis::z()).unwrap().abs() < 1e-15);
        for theta in [0.2, 1.0, 2.5] {
            let v = generator_variance_bound(&Ket::zero(), &Axis::new(theta, 1.3).unwrap()).unwrap();
            assert!((v - theta.sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_bound_cases() {
        let origin = ParamVector::new(0.0, 0.0, 0.0);
        let f = FisherMatrix::new([[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]], origin).unwrap();
        assert!((weighted_cr_bound(&f, &WeightMatrix::tau_only(), 1).unwrap() - 1.0).abs() < 1e-15);
        let id = FisherMatrix::new(*WeightMatrix::identity().entries(), origin).unwrap();
        assert!((weighted_cr_bound(&id, &WeightMatrix::identity(), 10).unwrap() - 0.3).abs() < 1e-15);
        assert!(WeightMatrix::new([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0; 3]]).is_err());
        assert!(weighted_cr_bound(&f, &WeightMatrix::tau_only(), 0).is_err());
    }

    #[test]
    fn weighted_bound_ignores_singular_axis_block() {
        let lam = ParamVector::new(FRAC_PI_4, FRAC_PI_3, PI / 5.0);
        let f = FisherMatrix::new(crate::protocols::reference::fisher_matrix_xy(&lam), lam).unwrap();
        let b = weighted_cr_bound(&f, &WeightMatrix::tau_only(), 1).unwrap();
        assert!((b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn certificate_on_diagonal_matrix() {
        let f = FisherMatrix::new([[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]], ParamVector::new(0.0, 0.0, 0.0))
            .unwrap();
        let c = agnosticity_certificate(&f, 1e-6);
        assert_eq!(c.verdict, Verdict::Agnostic);
        assert!(c.violations.is_empty());
        let zero = FisherMatrix::new([[0.0; 3]; 3], ParamVector::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(agnosticity_certificate(&zero, 1e-6).verdict, Verdict::NotAgnostic);
    }

    #[test]
    fn fisher_matrix_rejects_asymmetric_input() {
        let origin = ParamVector::new(0.0, 0.0, 0.0);
        assert!(matches!(
            FisherMatrix::new([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], origin),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            FisherMatrix::new([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]], origin),
            Err(Error::NotPsd { .. })
        ));
    }

    fn ccs_binary(f: f64) -> impl Fn(f64) -> Result<OutcomeDistribution> + Sync {
        let cfg = CcsConfig::standard().with_noise(f).unwrap();
        move |t| ccs_ancilla_distribution(&cfg, &ParamVector::new(t, 0.9, 0.4))
    }

    #[test]
    fn mc_single_trial_is_degenerate() {
        let mc = McConfig::new(1, 64, 5).unwrap();
        let r = mle_monte_carlo(ccs_binary(1.0), 1.0, &mc, &NumericalConfig::default()).unwrap();
        for e in &r.estimates {
            assert!(*e == 0.0 || (*e - PI).abs() < 1e-15, "{e}");
        }
    }

    #[test]
    fn mc_is_deterministic() {
        let mc = McConfig::new(1000, 32, 99).unwrap();
        let a = mle_monte_carlo(ccs_binary(0.95), 1.2, &mc, &NumericalConfig::default()).unwrap();
        let b = mle_monte_carlo(ccs_binary(0.95), 1.2, &mc, &NumericalConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = mle_monte_carlo(
            ccs_binary(0.95),
            1.2,
            &McConfig::new(1000, 32, 100).unwrap(),
            &NumericalConfig::default(),
        )
        .unwrap();
        assert_ne!(a.estimates, c.estimates);
    }

    #[test]
    fn mc_noisy_cr_bound() {
        let mc = McConfig::new(100_000, 8, 1).unwrap();
        let r = mle_monte_carlo(ccs_binary(0.95), FRAC_PI_2, &mc, &NumericalConfig::default()).unwrap();
        assert!((r.cr_bound - 1.0 / (1e5 * 0.9025)).abs() < 1e-12);
    }

    #[test]
    fn mse_is_trace() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(mse_of(&id), 3.0);
        let d = [[0.1, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.3]];
        assert!((mse_of(&d) - 0.6).abs() < 1e-15);
        let mc = McConfig::new(10_000, 50, 3).unwrap();
        let r = mle_monte_carlo(ccs_binary(1.0), 1.0, &mc, &NumericalConfig::default()).unwrap();
        let mut cov = [[0.0; 3]; 3];
        cov[0][0] = r.sample_variance;
        assert_eq!(mse_of(&cov), r.sample_variance);
    }

    #[test]
    fn mc_config_validation() {
        assert!(McConfig::new(0, 1, 0).is_err());
        assert!(McConfig::new(1, 0, 0).is_err());
        assert!(NumericalConfig::new(0.0, 1e-12).is_err());
        assert!(NumericalConfig::new(1e-5, -1.0).is_err());
    }

    #[test]
    fn batch_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| batch_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        // fixed reference value of the SplitMix64 finalizer
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
