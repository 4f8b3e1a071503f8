//! The three sensing protocols as maps `λ ↦ outcome distribution`, plus closed
//! forms used to cross-check the simulations.
//!
//! Conventions: joint states are `ancilla ⊗ probe`; joint outcome labels are
//! `"<ancilla>,<probe>"` with each part `+1` or `-1`.

use crate::error::{Error, Result};
use crate::qlinalg::{kron, Axis, Complex, ComplexMatrix, UNITARY_TOL};
use crate::qstate::{
    depolarize, measure, projective_povm, singlet, AncillaPreparation, DensityMatrix, Ket,
    MeasurementSetting, NoiseStrength, OutcomeDistribution, ParamVector,
};

/// Single probe qubit with Bloch vector `sin β x̂ + cos β ẑ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleQubitConfig {
    pub beta: f64,
    pub measurement: MeasurementSetting,
}

impl SingleQubitConfig {
    pub fn probe(&self) -> Ket {
        Ket::along(&Axis::from_angles(self.beta, 0.0))
    }
}

pub fn single_qubit_state(cfg: &SingleQubitConfig, lambda: &ParamVector) -> Result<Ket> {
    cfg.probe().evolve(&lambda.unitary())
}

pub fn single_qubit_distribution(
    cfg: &SingleQubitConfig,
    lambda: &ParamVector,
) -> Result<OutcomeDistribution> {
    let psi = single_qubit_state(cfg, lambda)?;
    measure(&psi.density(), &projective_povm(&cfg.measurement))
}

/// `L = |0⟩⟨0| ⊗ U + |1⟩⟨1| ⊗ U†`.
pub fn controlled_evolution(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    if !u.is_unitary(UNITARY_TOL) {
        let id = ComplexMatrix::identity(2)?;
        return Err(Error::NotUnitary {
            deviation: u.matmul(&u.adjoint())?.max_abs_diff(&id),
        });
    }
    let p0 = ComplexMatrix::diag(&[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)])?;
    let p1 = ComplexMatrix::diag(&[Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)])?;
    kron(&p0, u)?.try_add(&kron(&p1, &u.adjoint())?)
}

/// Coherently controlled superposition of `U` and `U†`.
#[derive(Clone, Debug)]
pub struct CcsConfig {
    pub probe: DensityMatrix,
    pub preparation: AncillaPreparation,
    /// Depolarization applied to the ancilla right before the controlled unitary.
    pub ancilla_noise: NoiseStrength,
    pub ancilla_measurement: MeasurementSetting,
    /// `None` observes the ancilla only.
    pub probe_measurement: Option<MeasurementSetting>,
}

impl CcsConfig {
    /// Probe `|0⟩`, ancilla `|+⟩`, no noise, ancilla measured along X and probe along Y.
    pub fn standard() -> Self {
        Self {
            probe: Ket::zero().density(),
            preparation: AncillaPreparation::balanced(),
            ancilla_noise: NoiseStrength::noiseless(),
            ancilla_measurement: MeasurementSetting::x(),
            probe_measurement: Some(MeasurementSetting::y()),
        }
    }

    pub fn with_probe(mut self, probe: DensityMatrix) -> Self {
        self.probe = probe;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.preparation = AncillaPreparation::new(alpha)?;
        Ok(self)
    }

    pub fn with_noise(mut self, f: f64) -> Result<Self> {
        self.ancilla_noise = NoiseStrength::new(f)?;
        Ok(self)
    }

    pub fn with_probe_measurement(mut self, m: Option<MeasurementSetting>) -> Self {
        self.probe_measurement = m;
        self
    }

    /// Density matrix of the (possibly depolarized) ancilla before the interaction.
    pub fn ancilla_state(&self) -> Result<DensityMatrix> {
        depolarize(&self.preparation.ket().density(), self.ancilla_noise)
    }

    /// Coherence the ancilla carries into the interaction, `f·sin 2α`.
    pub fn effective_coherence(&self) -> f64 {
        self.ancilla_noise.value() * self.preparation.coherence()
    }
}

/// `L (ρ_anc ⊗ ρ_P) L†`.
pub fn ccs_joint_state(cfg: &CcsConfig, lambda: &ParamVector) -> Result<DensityMatrix> {
    let rho0 = cfg.ancilla_state()?.tensor(&cfg.probe)?;
    let l = controlled_evolution(&lambda.unitary())?;
    rho0.evolve(&l)
}

/// Pure joint state `cos α |0⟩⊗U|ψ⟩ + sin α |1⟩⊗U†|ψ⟩` (noiseless ancilla).
pub fn ccs_joint_ket(
    probe: &Ket,
    preparation: &AncillaPreparation,
    lambda: &ParamVector,
) -> Result<Ket> {
    let l = controlled_evolution(&lambda.unitary())?;
    preparation.ket().tensor(probe).evolve(&l)
}

pub fn ccs_ancilla_distribution(
    cfg: &CcsConfig,
    lambda: &ParamVector,
) -> Result<OutcomeDistribution> {
    let joint = ccs_joint_state(cfg, lambda)?;
    let ancilla = joint.partial_trace(crate::qlinalg::Subsystem::First)?;
    measure(&ancilla, &projective_povm(&cfg.ancilla_measurement))
}

/// Four outcomes in the order `(+1,+1), (+1,-1), (-1,+1), (-1,-1)` (ancilla, probe).
pub fn ccs_joint_distribution(
    cfg: &CcsConfig,
    lambda: &ParamVector,
) -> Result<OutcomeDistribution> {
    let probe_m = cfg
        .probe_measurement
        .ok_or_else(|| Error::Invalid("joint CCS distribution needs a probe measurement".into()))?;
    let povm = projective_povm(&cfg.ancilla_measurement).tensor(&projective_povm(&probe_m))?;
    measure(&ccs_joint_state(cfg, lambda)?, &povm)
}

/// Joint distribution when a probe measurement is configured, otherwise the
/// ancilla marginal.
pub fn ccs_distribution(cfg: &CcsConfig, lambda: &ParamVector) -> Result<OutcomeDistribution> {
    match cfg.probe_measurement {
        Some(_) => ccs_joint_distribution(cfg, lambda),
        None => ccs_ancilla_distribution(cfg, lambda),
    }
}

/// Entanglement-assisted hindsight protocol: a singlet, `U` on the probe,
/// then `M′` on the ancilla and `M` on the probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HindsightConfig {
    pub singlet_axis: Axis,
    pub ancilla_measurement: MeasurementSetting,
    pub probe_measurement: MeasurementSetting,
}

impl HindsightConfig {
    /// `M′ = X`, `M = Y`, singlet written in the Z basis.
    pub fn standard() -> Self {
        Self {
            singlet_axis: Axis::z(),
            ancilla_measurement: MeasurementSetting::x(),
            probe_measurement: MeasurementSetting::y(),
        }
    }
}

pub fn hindsight_joint_ket(cfg: &HindsightConfig, lambda: &ParamVector) -> Result<Ket> {
    let op = kron(&ComplexMatrix::identity(2)?, &lambda.unitary())?;
    singlet(&cfg.singlet_axis).evolve(&op)
}

pub fn hindsight_joint_state(cfg: &HindsightConfig, lambda: &ParamVector) -> Result<DensityMatrix> {
    Ok(hindsight_joint_ket(cfg, lambda)?.density())
}

pub fn hindsight_distribution(
    cfg: &HindsightConfig,
    lambda: &ParamVector,
) -> Result<OutcomeDistribution> {
    let povm = projective_povm(&cfg.ancilla_measurement)
        .tensor(&projective_povm(&cfg.probe_measurement))?;
    measure(&hindsight_joint_state(cfg, lambda)?, &povm)
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "[0, 1]",
        })
    }
}

/// Fisher information about `τ` from the ancilla of a CCS run whose control
/// carries coherence `c` (`c = f` for a depolarized `|+⟩`, `c = sin 2α` for a
/// pure preparation): `c² sin²τ / (1 − c² cos²τ)`.
///
/// At `c = 1`, `sin τ = 0` one outcome has zero probability and the `sin²τ`
/// factor is taken to win, giving `0` like the finite-difference estimate.
pub fn analytic_fi_ccs(c: f64, tau: f64) -> Result<f64> {
    check_unit_interval("f", c)?;
    let (s, co) = tau.sin_cos();
    let c2 = c * c;
    // 1 − c² cos² τ written as sin² τ + (1 − c²) cos² τ to avoid cancellation
    let den = s * s + (1.0 - c2) * co * co;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(c2 * s * s / den)
}

/// Fisher information of the noisy entanglement-based protocol, evaluated as
/// `−(1−4f)² sin²τ / [((4f−1)cos τ + 2f − 5)((4f−1)cos τ + 2f + 1)]`.
pub fn analytic_fi_ent(f: f64, tau: f64) -> Result<f64> {
    check_unit_interval("f", f)?;
    let (s, c) = tau.sin_cos();
    let a = 4.0 * f - 1.0;
    let den = (a * c + 2.0 * f - 5.0) * (a * c + 2.0 * f + 1.0);
    if den.abs() < 1e-14 {
        return Err(Error::ZeroDenominator { value: den });
    }
    Ok(-(1.0 - 4.0 * f).powi(2) * s * s / den)
}

/// Closed forms for the standard CCS setting (probe `|0⟩`, ancilla `|+⟩`,
/// X on the ancilla, Y on the probe).
pub mod reference {
    use crate::qstate::ParamVector;

    /// Joint probabilities with the row labels as they are commonly printed:
    /// `[(+1,+1), (+1,-1), (-1,+1), (-1,-1)]`.
    pub fn printed_joint_probabilities(lambda: &ParamVector) -> [f64; 4] {
        let c2 = (lambda.tau / 2.0).cos().powi(2);
        let s2 = (lambda.tau / 2.0).sin().powi(2);
        let g = (2.0 * lambda.theta).sin() * lambda.phi.sin();
        [c2 / 2.0, s2 / 2.0 * (1.0 + g), c2 / 2.0, s2 / 2.0 * (1.0 - g)]
    }

    /// The same four values with the `(+1,-1)` and `(-1,+1)` rows exchanged,
    /// which is the assignment the Born rule produces.
    pub fn swapped_joint_probabilities(lambda: &ParamVector) -> [f64; 4] {
        let p = printed_joint_probabilities(lambda);
        [p[0], p[2], p[1], p[3]]
    }

    /// Closed-form Fisher matrix over `(τ, θ, φ)` for the standard setting.
    pub fn fisher_matrix_xy(lambda: &ParamVector) -> [[f64; 3]; 3] {
        let (tau, theta, phi) = (lambda.tau, lambda.theta, lambda.phi);
        let s2 = (tau / 2.0).sin().powi(2);
        let den = -1.0 + (2.0 * theta).sin().powi(2) * phi.sin().powi(2);
        let tt = -(4.0 * (2.0 * theta).cos().powi(2) * s2 * phi.sin().powi(2)) / den;
        let tp = -((4.0 * theta).sin() * s2 * (2.0 * phi).sin()) / (2.0 * den);
        let pp = -((2.0 * theta).sin().powi(2) * s2 * phi.cos().powi(2)) / den;
        [[1.0, 0.0, 0.0], [0.0, tt, tp], [0.0, tp, pp]]
    }

    /// Candidate closed forms for the `ττ` QFI of the pure joint state with
    /// probe `|0⟩` and preparation `α`, as `(C² + (1−C²) sin²2θ, C² + (1−C²) sin²θ)`.
    pub fn joint_qfi_candidates(alpha: f64, theta: f64) -> (f64, f64) {
        let c2 = (2.0 * alpha).sin().powi(2);
        (
            c2 + (1.0 - c2) * (2.0 * theta).sin().powi(2),
            c2 + (1.0 - c2) * theta.sin().powi(2),
        )
    }
}
