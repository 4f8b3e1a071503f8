//! Dense complex linear algebra for one- and two-qubit operators.
//!
//! Matrices are stored row-major and copied by value. Only dimensions 2 and 4
//! are accepted by [`ComplexMatrix`]; the Jacobi eigensolver underneath also
//! serves the 3×3 real symmetric Fisher matrices through [`symmetric_eig`].

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Default tolerance for structural predicates (Hermiticity, PSD, trace).
pub const STRUCT_TOL: f64 = 1e-10;
/// Default tolerance for unitarity and normalization checks.
pub const UNITARY_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius norm at which the Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[Complex; N]; N]) -> Result<Self> {
        Self::new(N, rows.into_iter().flatten().collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![ZERO; dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        Ok(m)
    }

    pub fn diag(entries: &[Complex]) -> Result<Self> {
        let mut m = Self::zeros(entries.len())?;
        for (i, &d) in entries.iter().enumerate() {
            m.set(i, i, d);
        }
        Ok(m)
    }

    /// `|v⟩⟨v|` for a vector of length 2 or 4.
    pub fn outer(v: &[Complex]) -> Result<Self> {
        let dim = v.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex) {
        self.data[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        Ok(mul_raw(self.dim, &self.data, &rhs.data).into_matrix(self.dim))
    }

    pub fn apply(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        match (self.matmul(&self.adjoint()), Self::identity(self.dim)) {
            (Ok(p), Ok(id)) => p.approx_eq(&id, tol),
            _ => false,
        }
    }

    /// Hermitian with smallest eigenvalue at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match hermitian_eig(self, tol) {
            Ok(eig) => eig.eigenvalues[0] >= -tol,
            Err(_) => false,
        }
    }

    pub fn trace_is(&self, x: f64, tol: f64) -> bool {
        (self.trace() - x).norm() <= tol
    }

    fn same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        Ok(())
    }

    fn zip_with(&self, rhs: &Self, op: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        self.same_dim(rhs)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// Operator impls panic on dimension mismatch; use the `try_*` / `matmul`
// methods where the shapes are not known statically.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix dimensions must agree")
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

struct Raw(Vec<Complex>);

impl Raw {
    fn into_matrix(self, dim: usize) -> ComplexMatrix {
        ComplexMatrix { dim, data: self.0 }
    }
}

fn mul_raw(n: usize, a: &[Complex], b: &[Complex]) -> Raw {
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    Raw(out)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]]).unwrap()
}

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2).unwrap()
}

/// Kronecker product of two qubit operators: `(a⊗b)[2i+k][2j+l] = a[i][j]·b[k][l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4)?;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.set(2 * i + k, 2 * j + l, a.get(i, j) * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Tensor factor retained by [`partial_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub fn partial_trace(m: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if m.dim != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: m.dim,
        });
    }
    let mut out = ComplexMatrix::zeros(2)?;
    for a in 0..2 {
        for b in 0..2 {
            let v: Complex = (0..2)
                .map(|k| match keep {
                    Subsystem::First => m.get(2 * a + k, 2 * b + k),
                    Subsystem::Second => m.get(2 * k + a, 2 * k + b),
                })
                .sum();
            out.set(a, b, v);
        }
    }
    Ok(out)
}

/// Rotation axis in spherical polar angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub theta: f64,
    pub phi: f64,
}

impl Axis {
    /// Validated constructor: `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        use std::f64::consts::{PI, TAU};
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, pi]",
            });
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                range: "[0, 2pi)",
            });
        }
        Ok(Self { theta, phi })
    }

    /// Axis through raw angles with no domain check. The unit vector is
    /// well defined for any real angles, which finite differences rely on.
    pub const fn from_angles(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub const fn x() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub const fn y() -> Self {
        Self::from_angles(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    pub const fn z() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    /// The antipodal axis, kept inside the canonical domain.
    pub fn opposite(&self) -> Self {
        use std::f64::consts::{PI, TAU};
        Self::from_angles(PI - self.theta, (self.phi + PI).rem_euclid(TAU))
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// `σ̂·n̂`.
    pub fn pauli_projection(&self) -> ComplexMatrix {
        let [nx, ny, nz] = self.unit_vector();
        ComplexMatrix::from_rows([
            [Complex::new(nz, 0.0), Complex::new(nx, -ny)],
            [Complex::new(nx, ny), Complex::new(-nz, 0.0)],
        ])
        .unwrap()
    }
}

/// `U = exp(-i τ σ̂·n̂ / 2) = cos(τ/2) 𝟙 − i sin(τ/2) σ̂·n̂`, from the closed form.
pub fn rotation_unitary(tau: f64, axis: &Axis) -> ComplexMatrix {
    let (s, c) = (tau / 2.0).sin_cos();
    let [nx, ny, nz] = axis.unit_vector();
    // −i s (σ·n) = −i s [[nz, nx − i ny], [nx + i ny, −nz]]
    ComplexMatrix::from_rows([
        [Complex::new(c, -s * nz), Complex::new(-s * ny, -s * nx)],
        [Complex::new(s * ny, -s * nx), Complex::new(c, s * nz)],
    ])
    .unwrap()
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, i: usize) -> Vec<Complex> {
        let n = self.eigenvectors.dim();
        (0..n).map(|r| self.eigenvectors.get(r, i)).collect()
    }

    /// `Σ λ_i v_i v_i†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvectors.dim();
        let mut out = ComplexMatrix::zeros(n).unwrap();
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvector(i);
            let p = ComplexMatrix::outer(&v).unwrap().scale(Complex::new(lam, 0.0));
            out = &out + &p;
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    let deviation = m.max_abs_diff(&m.adjoint());
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let (values, vectors) = jacobi_hermitian(m.dim, &m.data)?;
    Ok(EigenDecomposition {
        eigenvalues: values,
        eigenvectors: ComplexMatrix::new(m.dim, vectors)?,
    })
}

/// Eigendecomposition of a real symmetric `N×N` matrix (used for Fisher
/// matrices). Returns ascending eigenvalues and eigenvectors as columns.
pub fn symmetric_eig<const N: usize>(m: &[[f64; N]; N]) -> Result<([f64; N], [[f64; N]; N])> {
    let mut deviation: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            deviation = deviation.max((m[i][j] - m[j][i]).abs());
        }
    }
    let scale = m.iter().flatten().fold(1.0_f64, |a, b| a.max(b.abs()));
    if deviation > STRUCT_TOL * scale {
        return Err(Error::NotSymmetric { deviation });
    }
    let data: Vec<Complex> = m.iter().flatten().map(|&x| Complex::new(x, 0.0)).collect();
    let (values, vectors) = jacobi_hermitian(N, &data)?;
    let mut vals = [0.0; N];
    let mut vecs = [[0.0; N]; N];
    for i in 0..N {
        vals[i] = values[i];
        for j in 0..N {
            vecs[i][j] = vectors[i * N + j].re;
        }
    }
    Ok((vals, vecs))
}

fn off_diagonal_norm(n: usize, a: &[Complex]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on an `n×n` Hermitian matrix given row-major. Each rotation
/// first removes the phase of `a_pq` with `diag(1, e^{-iφ})`, then applies the
/// real symmetric Jacobi rotation to the resulting `[[a_pp, |a_pq|], [|a_pq|, a_qq]]`.
fn jacobi_hermitian(n: usize, input: &[Complex]) -> Result<(Vec<f64>, Vec<Complex>)> {
    let mut a = input.to_vec();
    // hermitize so rounding in the input cannot stall convergence
    for i in 0..n {
        a[i * n + i] = Complex::new(a[i * n + i].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
    }
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let threshold = JACOBI_TOL * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(n, &a);
        if off < threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag < f64::MIN_POSITIVE.sqrt() {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let zeta = (aqq - app) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V = D·R on (p, q), D = diag(1, e^{−iφ}), R = [[c, s], [−s, c]]
                let vpp = Complex::new(c, 0.0);
                let vpq = Complex::new(s, 0.0);
                let vqp = -phase.conj() * s;
                let vqq = phase.conj() * c;
                // a <- a · V
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = arp * vpp + arq * vqp;
                    a[r * n + q] = arp * vpq + arq * vqq;
                }
                // a <- V† · a
                for col in 0..n {
                    let apc = a[p * n + col];
                    let aqc = a[q * n + col];
                    a[p * n + col] = vpp.conj() * apc + vqp.conj() * aqc;
                    a[q * n + col] = vpq.conj() * apc + vqq.conj() * aqc;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = vrp * vpp + vrq * vqp;
                    v[r * n + q] = vrp * vpq + vrq * vqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![ZERO; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok((values, vectors))
}
