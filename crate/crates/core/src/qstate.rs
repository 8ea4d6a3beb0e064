//! Dense state vectors and operators over labelled tensor-product spaces.
//!
//! Basis order is lexicographic in subsystem order: the first subsystem is
//! the most significant digit of the flat index. For qubits, index 0 is the
//! "up" state and index 1 the "down" state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result, ALGEBRAIC_TOL};

pub type Amplitude = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }

    pub fn qubit(label: impl Into<String>) -> Self {
        Self::new(label, 2)
    }
}

/// Spin value along a measurement direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    /// `+1` for up, `-1` for down.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

fn strides(dims: &[Subsystem]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        out[k] = out[k + 1] * dims[k + 1].dim;
    }
    out
}

fn total_dim(dims: &[Subsystem]) -> usize {
    dims.iter().map(|s| s.dim).product()
}

fn check_labels(dims: &[Subsystem]) -> Result<()> {
    for (i, s) in dims.iter().enumerate() {
        if s.dim == 0 {
            return Err(Error::WrongDimension {
                label: s.label.clone(),
                dim: 0,
                expected: 1,
            });
        }
        if dims[..i].iter().any(|o| o.label == s.label) {
            return Err(Error::LabelCollision(s.label.clone()));
        }
    }
    Ok(())
}

fn position(dims: &[Subsystem], label: &str) -> Result<usize> {
    dims.iter()
        .position(|s| s.label == label)
        .ok_or_else(|| Error::UnknownSubsystem(label.to_string()))
}

/// Pure state of a finite composite system.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<Subsystem>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes. Normalization is not enforced here;
    /// use [`StateVector::is_normalized`] or [`StateVector::normalized`].
    pub fn new(dims: Vec<Subsystem>, amps: Vec<Complex64>) -> Result<Self> {
        check_labels(&dims)?;
        let expected = total_dim(&dims);
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dims, amps })
    }

    pub fn basis(label: impl Into<String>, dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self {
            dims: vec![Subsystem::new(label, dim)],
            amps,
        }
    }

    pub fn up(label: impl Into<String>) -> Self {
        Self::basis(label, 2, 0)
    }

    pub fn down(label: impl Into<String>) -> Self {
        Self::basis(label, 2, 1)
    }

    /// Single qubit `up·|↑⟩ + down·|↓⟩`, normalized.
    pub fn qubit(label: impl Into<String>, up: Complex64, down: Complex64) -> Result<Self> {
        Self::new(vec![Subsystem::qubit(label)], vec![up, down])?.normalized()
    }

    /// `(|↑↓⟩ − |↓↑⟩)/√2`.
    pub fn singlet(first: impl Into<String>, second: impl Into<String>) -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            dims: vec![Subsystem::qubit(first), Subsystem::qubit(second)],
            amps: vec![ZERO, h, -h, ZERO],
        }
    }

    /// `(|↑↓⟩ + |↓↑⟩)/√2`, the m = 0 member of the triplet.
    pub fn triplet_zero(first: impl Into<String>, second: impl Into<String>) -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            dims: vec![Subsystem::qubit(first), Subsystem::qubit(second)],
            amps: vec![ZERO, h, h, ZERO],
        }
    }

    pub fn dims(&self) -> &[Subsystem] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        position(&self.dims, label)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(self)
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Flat index of a multi-index given in subsystem order.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&d, s)| acc * s.dim + d)
    }

    /// Multi-index (subsystem order) of a flat index.
    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, s) in self.dims.iter().enumerate().rev() {
            out[k] = flat % s.dim;
            flat /= s.dim;
        }
        out
    }

    pub fn amplitude_at(&self, digits: &[usize]) -> Complex64 {
        self.amps[self.flat_index(digits)]
    }

    /// Kronecker product; labels must be disjoint.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        if let Some(s) = other
            .dims
            .iter()
            .find(|s| self.dims.iter().any(|o| o.label == s.label))
        {
            return Err(Error::LabelCollision(s.label.clone()));
        }
        let mut dims = self.dims.clone();
        dims.extend(other.dims.iter().cloned());
        let amps = self
            .amps
            .iter()
            .flat_map(|&u| other.amps.iter().map(move |&v| u * v))
            .collect();
        Ok(StateVector { dims, amps })
    }

    /// Applies a `d×d` row-major matrix to one subsystem.
    pub fn apply_local(&self, label: &str, matrix: &[Complex64]) -> Result<StateVector> {
        let k = self.position(label)?;
        let d = self.dims[k].dim;
        if matrix.len() != d * d {
            return Err(Error::LengthMismatch {
                expected: d * d,
                got: matrix.len(),
            });
        }
        let stride = strides(&self.dims)[k];
        let mut out = vec![ZERO; self.amps.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let digit = (i / stride) % d;
            let base = i - digit * stride;
            *slot = (0..d)
                .map(|j| matrix[digit * d + j] * self.amps[base + j * stride])
                .sum();
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            amps: out,
        })
    }

    pub fn apply(&self, op: &Operator) -> Result<StateVector> {
        if op.dims != self.dims {
            return Err(Error::DimsMismatch);
        }
        let n = self.amps.len();
        let amps = (0..n)
            .map(|r| {
                op.matrix[r * n..(r + 1) * n]
                    .iter()
                    .zip(&self.amps)
                    .map(|(m, a)| m * a)
                    .sum()
            })
            .collect();
        Ok(StateVector {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean norm of `self − other`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// Dense square operator over a labelled joint space (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<Subsystem>,
    matrix: Vec<Complex64>,
    unitary: bool,
}

impl Operator {
    pub fn new(dims: Vec<Subsystem>, matrix: Vec<Complex64>, unitary: bool) -> Result<Self> {
        check_labels(&dims)?;
        let n = total_dim(&dims);
        if matrix.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: matrix.len(),
            });
        }
        Ok(Self {
            dims,
            matrix,
            unitary,
        })
    }

    pub fn identity(dims: Vec<Subsystem>) -> Result<Self> {
        check_labels(&dims)?;
        let n = total_dim(&dims);
        let mut matrix = vec![ZERO; n * n];
        for i in 0..n {
            matrix[i * n + i] = ONE;
        }
        Ok(Self {
            dims,
            matrix,
            unitary: true,
        })
    }

    /// Embeds `local` (acting on `targets`, in the given order) into the full
    /// space, acting as identity on every other subsystem.
    pub fn embed(
        dims: Vec<Subsystem>,
        targets: &[&str],
        local: &[Complex64],
        unitary: bool,
    ) -> Result<Self> {
        check_labels(&dims)?;
        let pos: Vec<usize> = targets
            .iter()
            .map(|t| position(&dims, t))
            .collect::<Result<_>>()?;
        let local_dim: usize = pos.iter().map(|&p| dims[p].dim).product();
        if local.len() != local_dim * local_dim {
            return Err(Error::LengthMismatch {
                expected: local_dim * local_dim,
                got: local.len(),
            });
        }
        let n = total_dim(&dims);
        let st = strides(&dims);
        let digit = |i: usize, p: usize| (i / st[p]) % dims[p].dim;
        let local_index = |i: usize| pos.iter().fold(0, |acc, &p| acc * dims[p].dim + digit(i, p));
        let rest = |i: usize| i - pos.iter().map(|&p| digit(i, p) * st[p]).sum::<usize>();

        let mut matrix = vec![ZERO; n * n];
        for r in 0..n {
            let (lr, rr) = (local_index(r), rest(r));
            for c in 0..n {
                if rest(c) == rr {
                    matrix[r * n + c] = local[lr * local_dim + local_index(c)];
                }
            }
        }
        Ok(Self {
            dims,
            matrix,
            unitary,
        })
    }

    pub fn dims(&self) -> &[Subsystem] {
        &self.dims
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn flagged_unitary(&self) -> bool {
        self.unitary
    }

    fn side(&self) -> usize {
        total_dim(&self.dims)
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.side();
        let mut matrix = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                matrix[c * n + r] = self.matrix[r * n + c].conj();
            }
        }
        Operator {
            dims: self.dims.clone(),
            matrix,
            unitary: self.unitary,
        }
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.dims != rhs.dims {
            return Err(Error::DimsMismatch);
        }
        let n = self.side();
        let mut matrix = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.matrix[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    matrix[r * n + c] += a * rhs.matrix[k * n + c];
                }
            }
        }
        Ok(Operator {
            dims: self.dims.clone(),
            matrix,
            unitary: self.unitary && rhs.unitary,
        })
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.side();
        let prod = self
            .adjoint()
            .compose(self)
            .expect("adjoint shares dims");
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((prod.matrix[r * n + c] - target).norm());
            }
        }
        worst
    }
}

/// Column vectors of the rotated spin basis, `[up_θ, down_θ]`, each as
/// `(⟨↑|·⟩, ⟨↓|·⟩)`. Real rotation about y with half-angle parametrization.
pub fn rotated_basis(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c, s], [-s, c]]
}

/// `|↑_θ⟩ = cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩`, `|↓_θ⟩ = −sin(θ/2)|↑⟩ + cos(θ/2)|↓⟩`.
pub fn spin_basis(theta: f64) -> (StateVector, StateVector) {
    let [u, d] = rotated_basis(theta);
    let ket = |v: [f64; 2]| StateVector {
        dims: vec![Subsystem::qubit("spin")],
        amps: vec![Complex64::new(v[0], 0.0), Complex64::new(v[1], 0.0)],
    };
    (ket(u), ket(d))
}

/// 2×2 projector onto the rotated eigenstate `spin` at angle `theta`.
pub fn spin_projector(theta: f64, spin: Spin) -> [Complex64; 4] {
    let v = rotated_basis(theta)[spin.index()];
    [
        Complex64::new(v[0] * v[0], 0.0),
        Complex64::new(v[0] * v[1], 0.0),
        Complex64::new(v[1] * v[0], 0.0),
        Complex64::new(v[1] * v[1], 0.0),
    ]
}

/// Measurement interaction coupling a spin to a two-state apparatus:
/// `|↑_θ⟩|ready⟩ ↦ |↑_θ⟩|↑⟩`, `|↓_θ⟩|ready⟩ ↦ |↓_θ⟩|↓⟩`, where the ready
/// state is the apparatus "up" indicator. The apparatus-"down" sector is
/// completed as a controlled flip in the rotated basis.
pub fn measurement_unitary(
    dims: &[Subsystem],
    theta: f64,
    system: &str,
    apparatus: &str,
) -> Result<Operator> {
    for label in [system, apparatus] {
        let s = &dims[position(dims, label)?];
        if s.dim != 2 {
            return Err(Error::WrongDimension {
                label: label.to_string(),
                dim: s.dim,
                expected: 2,
            });
        }
    }
    if system == apparatus {
        return Err(Error::LabelCollision(system.to_string()));
    }
    let basis = rotated_basis(theta);
    // local index = 2 * spin_digit + apparatus_digit
    // U = Σ_k |k_θ⟩⟨k_θ| ⊗ X^k
    let mut local = [ZERO; 16];
    for (k, v) in basis.iter().enumerate() {
        for (s_out, s_in) in (0..2).flat_map(|i| (0..2).map(move |j| (i, j))) {
            let p = v[s_out] * v[s_in];
            for app_in in 0..2 {
                let app_out = app_in ^ k;
                local[(2 * s_out + app_out) * 4 + 2 * s_in + app_in] += Complex64::new(p, 0.0);
            }
        }
    }
    Operator::embed(dims.to_vec(), &[system, apparatus], &local, true)
}

/// A rotated-spin outcome on one subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOutcome {
    pub subsystem: String,
    pub spin: Spin,
    pub angle: f64,
}

impl SpinOutcome {
    pub fn new(subsystem: impl Into<String>, spin: Spin, angle: f64) -> Self {
        Self {
            subsystem: subsystem.into(),
            spin,
            angle,
        }
    }
}

/// Born probability of two rotated-spin outcomes: the squared norm of the
/// doubly projected state.
pub fn born_joint(state: &StateVector, a: &SpinOutcome, b: &SpinOutcome) -> Result<f64> {
    state.require_normalized()?;
    if !a.angle.is_finite() || !b.angle.is_finite() {
        return Err(Error::NonFinite);
    }
    let projected = state
        .apply_local(&a.subsystem, &spin_projector(a.angle, a.spin))?
        .apply_local(&b.subsystem, &spin_projector(b.angle, b.spin))?;
    Ok(projected.norm_sqr().clamp(0.0, 1.0))
}
