//! States, measurements, the depolarizing channel and l1 coherence.
//!
//! Joint two-qubit objects are always ordered `ancilla ⊗ probe`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use crate::error::{Error, Result};
use crate::qlinalg::{
    self, identity2, kron, rotation_unitary, Axis, Complex, ComplexMatrix, STRUCT_TOL,
    UNITARY_TOL,
};

/// Probabilities in `[-CLAMP_TOL, 0)` are rounding dust and clamp to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Index into a [`ParamVector`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    Tau,
    Theta,
    Phi,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Tau, Param::Theta, Param::Phi];

    pub fn index(self) -> usize {
        match self {
            Param::Tau => 0,
            Param::Theta => 1,
            Param::Phi => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::Tau => "tau",
            Param::Theta => "theta",
            Param::Phi => "phi",
        }
    }
}

/// `(τ, θ, φ)`: rotation angle and the polar angles of the rotation axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamVector {
    pub tau: f64,
    pub theta: f64,
    pub phi: f64,
}

impl ParamVector {
    pub const fn new(tau: f64, theta: f64, phi: f64) -> Self {
        Self { tau, theta, phi }
    }

    pub fn axis(&self) -> Axis {
        Axis::from_angles(self.theta, self.phi)
    }

    pub fn unitary(&self) -> ComplexMatrix {
        rotation_unitary(self.tau, &self.axis())
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Tau => self.tau,
            Param::Theta => self.theta,
            Param::Phi => self.phi,
        }
    }

    pub fn shifted(&self, p: Param, delta: f64) -> Self {
        let mut out = *self;
        match p {
            Param::Tau => out.tau += delta,
            Param::Theta => out.theta += delta,
            Param::Phi => out.phi += delta,
        }
        out
    }

    /// Maps to the canonical domain `τ ∈ (−2π, 2π]`, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`
    /// without changing the unitary.
    pub fn canonical(&self) -> Self {
        let mut theta = self.theta.rem_euclid(TAU);
        let mut phi = self.phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        let phi = phi.rem_euclid(TAU);
        // U has period 4π in τ
        let mut tau = self.tau.rem_euclid(2.0 * TAU);
        if tau > TAU {
            tau -= 2.0 * TAU;
        }
        Self { tau, theta, phi }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > -TAU && self.tau <= TAU) {
            return Err(Error::OutOfRange {
                name: "tau",
                value: self.tau,
                range: "(-2pi, 2pi]",
            });
        }
        Axis::new(self.theta, self.phi).map(|_| ())
    }
}

/// Normalized state vector (qubit or two-qubit).
#[derive(Clone, Debug, PartialEq)]
pub struct Ket(Vec<Complex>);

impl Ket {
    pub fn new(amplitudes: Vec<Complex>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes))
    }

    pub fn normalized(amplitudes: Vec<Complex>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(amplitudes.into_iter().map(|z| z / norm).collect()))
    }

    pub fn zero() -> Self {
        Self(vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)])
    }

    pub fn one() -> Self {
        Self(vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)])
    }

    pub fn plus() -> Self {
        Self::along(&Axis::x())
    }

    /// The `+1` eigenstate of `σ̂·n̂`: `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn along(axis: &Axis) -> Self {
        let (s, c) = (axis.theta / 2.0).sin_cos();
        Self(vec![
            Complex::new(c, 0.0),
            Complex::from_polar(s, axis.phi),
        ])
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Complex {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Ket> {
        Ok(Ket(u.apply(&self.0)?))
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.0 {
            for b in &other.0 {
                out.push(a * b);
            }
        }
        Ket(out)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(ComplexMatrix::outer(&self.0).expect("ket dimension is 2 or 4"))
    }

    /// Expectation value `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<Complex> {
        let av = op.apply(&self.0)?;
        Ok(self.0.iter().zip(&av).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tol(m, STRUCT_TOL)
    }

    pub fn with_tol(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let deviation = m.max_abs_diff(&m.adjoint());
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = m.trace();
        if !m.trace_is(1.0, tol) {
            return Err(Error::BadTrace {
                expected: 1.0,
                found: tr.re,
            });
        }
        let eig = qlinalg::hermitian_eig(&m, tol)?;
        if eig.eigenvalues[0] < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.eigenvalues[0],
            });
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let id = ComplexMatrix::identity(dim)?;
        Ok(Self(id.scale(Complex::new(1.0 / dim as f64, 0.0))))
    }

    /// Qubit state with Bloch vector `r`, `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + UNITARY_TOL {
            return Err(Error::OutOfRange {
                name: "|bloch vector|",
                value: norm,
                range: "[0, 1]",
            });
        }
        let m = ComplexMatrix::from_rows([
            [Complex::new((1.0 + r[2]) / 2.0, 0.0), Complex::new(r[0] / 2.0, -r[1] / 2.0)],
            [Complex::new(r[0] / 2.0, r[1] / 2.0), Complex::new((1.0 - r[2]) / 2.0, 0.0)],
        ])?;
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(Self(self.0.conjugate_by(u)?))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(Self(kron(&self.0, &other.0)?))
    }

    pub fn partial_trace(&self, keep: qlinalg::Subsystem) -> Result<Self> {
        Ok(Self(qlinalg::partial_trace(&self.0, keep)?))
    }
}

/// Pure ancilla preparation `cos(α)|0⟩ + sin(α)|1⟩`, `α ∈ [0, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AncillaPreparation {
    alpha: f64,
}

impl AncillaPreparation {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "[0, pi/2]",
            });
        }
        Ok(Self { alpha })
    }

    /// `α = π/4`, i.e. the ancilla starts in `|+⟩`.
    pub fn balanced() -> Self {
        Self {
            alpha: std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ket(&self) -> Ket {
        let (s, c) = self.alpha.sin_cos();
        Ket(vec![Complex::new(c, 0.0), Complex::new(s, 0.0)])
    }

    /// l1 coherence of the prepared state, `sin 2α`.
    pub fn coherence(&self) -> f64 {
        (2.0 * self.alpha).sin()
    }
}

/// Projective qubit measurement along a Bloch direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementSetting {
    pub axis: Axis,
}

impl MeasurementSetting {
    pub const fn new(axis: Axis) -> Self {
        Self { axis }
    }

    pub const fn x() -> Self {
        Self::new(Axis::x())
    }

    pub const fn y() -> Self {
        Self::new(Axis::y())
    }

    pub const fn z() -> Self {
        Self::new(Axis::z())
    }
}

#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<(String, ComplexMatrix)>,
}

impl Povm {
    /// Checks that every effect is PSD and that they resolve the identity.
    pub fn new(effects: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        let dim = effects
            .first()
            .map(|(_, e)| e.dim())
            .ok_or_else(|| Error::Invalid("POVM needs at least one effect".into()))?;
        let mut sum = ComplexMatrix::zeros(dim)?;
        for (_, e) in &effects {
            if !e.is_psd(STRUCT_TOL) {
                let min = qlinalg::hermitian_eig(e, STRUCT_TOL)
                    .map(|d| d.eigenvalues[0])
                    .unwrap_or(f64::NAN);
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
            sum = sum.try_add(e)?;
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim)?);
        if deviation > STRUCT_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[(String, ComplexMatrix)] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].1.dim()
    }

    /// Product measurement with labels `"a,b"`; `self` acts on the first factor.
    pub fn tensor(&self, other: &Povm) -> Result<Povm> {
        let mut effects = Vec::with_capacity(self.effects.len() * other.effects.len());
        for (la, ea) in &self.effects {
            for (lb, eb) in &other.effects {
                effects.push((format!("{la},{lb}"), kron(ea, eb)?));
            }
        }
        Ok(Povm { effects })
    }
}

/// Effects `(𝟙 ± σ̂·n̂)/2`, labelled `+1` and `-1`.
pub fn projective_povm(setting: &MeasurementSetting) -> Povm {
    let id = identity2();
    let sn = setting.axis.pauli_projection();
    let half = Complex::new(0.5, 0.0);
    Povm {
        effects: vec![
            ("+1".to_string(), (&id + &sn).scale(half)),
            ("-1".to_string(), (&id - &sn).scale(half)),
        ],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    entries: Vec<(String, f64)>,
}

impl OutcomeDistribution {
    /// Clamps rounding dust below zero and checks normalization.
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(entries.len());
        for (label, p) in entries {
            if !p.is_finite() || p < -CLAMP_TOL {
                return Err(Error::NegativeProbability { label, value: p });
            }
            if p > 1.0 + CLAMP_TOL {
                return Err(Error::OutOfRange {
                    name: "probability",
                    value: p,
                    range: "[0, 1]",
                });
            }
            out.push((label, p.clamp(0.0, 1.0)));
        }
        let sum: f64 = out.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > STRUCT_TOL {
            return Err(Error::Unnormalized { sum });
        }
        Ok(Self { entries: out })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, p)| *p).collect()
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, p)| *p)
    }

    /// Marginal over one component of comma-joined joint labels, keeping the
    /// first-seen order of labels.
    pub fn marginal(&self, component: usize) -> Result<OutcomeDistribution> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for (label, p) in &self.entries {
            let part = label.split(',').nth(component).ok_or_else(|| {
                Error::Invalid(format!("label {label:?} has no component {component}"))
            })?;
            match out.iter_mut().find(|(l, _)| l == part) {
                Some((_, q)) => *q += p,
                None => out.push((part.to_string(), *p)),
            }
        }
        OutcomeDistribution::new(out)
    }
}

/// Born rule `p(m) = Tr(E_m ρ)`.
pub fn measure(rho: &DensityMatrix, povm: &Povm) -> Result<OutcomeDistribution> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            found: rho.dim(),
        });
    }
    let entries = povm
        .effects
        .iter()
        .map(|(label, e)| Ok((label.clone(), e.matmul(rho.matrix())?.trace().re)))
        .collect::<Result<Vec<_>>>()?;
    OutcomeDistribution::new(entries)
}

/// White-noise strength; `f = 1` is noiseless, `f = 0` fully depolarizing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseStrength(f64);

impl NoiseStrength {
    pub fn new(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::OutOfRange {
                name: "f",
                value: f,
                range: "[0, 1]",
            });
        }
        Ok(Self(f))
    }

    pub const fn noiseless() -> Self {
        Self(1.0)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for NoiseStrength {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// `f·ρ + (1 − f)·𝟙/2` on a qubit.
pub fn depolarize(rho: &DensityMatrix, f: NoiseStrength) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let f = f.value();
    let mixed = identity2().scale(Complex::new((1.0 - f) / 2.0, 0.0));
    Ok(DensityMatrix(
        rho.matrix().scale(Complex::new(f, 0.0)).try_add(&mixed)?,
    ))
}

/// `C(ρ) = 2|ρ₀₁|` for a qubit.
pub fn l1_coherence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(2.0 * rho.matrix().get(0, 1).norm())
}

/// `(|0⟩|1⟩ − |1⟩|0⟩)/√2`-type singlet written in the `|l⟩, |l̄⟩` basis of
/// `axis`, ordered ancilla ⊗ probe: `(|l̄⟩_A|l⟩_P − |l⟩_A|l̄⟩_P)/√2`.
pub fn singlet(axis: &Axis) -> Ket {
    let l = Ket::along(axis);
    let lbar = Ket::along(&axis.opposite());
    let a = lbar.tensor(&l);
    let b = l.tensor(&lbar);
    Ket(a
        .0
        .iter()
        .zip(&b.0)
        .map(|(x, y)| (x - y) * FRAC_1_SQRT_2)
        .collect())
}
