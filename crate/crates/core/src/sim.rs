//! Exact statevector simulation.
//!
//! The state of an `n`-qubit register is a complex vector of length `2^n`.
//! Qubit `k` corresponds to bit `k` of the basis index (qubit 0 is the least
//! significant bit). Single-qubit gates are applied with stride updates over
//! amplitude pairs, so each gate costs `O(2^n)`.

use num_complex::Complex64;

use crate::circuit::{CircuitTemplate, GateSpec, ParameterVector, RotationAxis};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Practical qubit cap for allocating a dense statevector.
pub const MAX_STATE_QUBITS: usize = 24;

/// Qubit cap for materializing a circuit as a dense unitary.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Normalization tolerance for quantum states.
pub const NORM_TOL: f64 = 1e-10;

/// Unit-norm complex amplitude vector over `2^n` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero_state(n_qubits: usize) -> Self {
        assert!(
            n_qubits >= 1 && n_qubits <= MAX_STATE_QUBITS,
            "n_qubits must be in 1..={MAX_STATE_QUBITS}"
        );
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Wrap an amplitude vector. The length must be a power of two and the
    /// norm must be within [`NORM_TOL`] of one.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidSize {
                what: "amplitude count",
                value: dim,
            });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() >= NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Global-phase-insensitive overlap `|<self|other>|`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm()
    }

    /// Apply a single gate in place.
    pub fn apply_gate(&mut self, gate: &GateSpec, params: &ParameterVector) -> Result<()> {
        apply_gate_amps(&mut self.amps, self.n_qubits, gate, params)
    }
}

/// The 2x2 matrix of `exp(-i theta V)` for a Pauli generator `V`.
///
/// Full-Pauli angle convention: the rotation period in `theta` is `pi`
/// up to global phase, and `exp(-i (pi/2) X) = -iX`.
pub fn rotation_matrix(axis: RotationAxis, theta: f64) -> [Complex64; 4] {
    let (c, s) = (theta.cos(), theta.sin());
    match axis {
        RotationAxis::X => [
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
        RotationAxis::Y => [
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
        RotationAxis::Z => [
            Complex64::new(c, -s),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(c, s),
        ],
    }
}

/// Apply a gate to a raw amplitude buffer of `2^n_qubits` entries.
pub fn apply_gate_amps(
    amps: &mut [Complex64],
    n_qubits: usize,
    gate: &GateSpec,
    params: &ParameterVector,
) -> Result<()> {
    debug_assert_eq!(amps.len(), 1 << n_qubits);
    match gate {
        GateSpec::Rotation { axis, target, slot } => {
            check_qubit(*target, n_qubits)?;
            let theta = params.get(*slot)?;
            apply_single_qubit(amps, *target, &rotation_matrix(*axis, theta));
        }
        GateSpec::ControlledZ { control, target } => {
            check_qubit(*control, n_qubits)?;
            check_qubit(*target, n_qubits)?;
            apply_cz(amps, *control, *target);
        }
        GateSpec::FixedSingleQubit { matrix, target } => {
            check_qubit(*target, n_qubits)?;
            apply_single_qubit(amps, *target, matrix);
        }
    }
    Ok(())
}

/// Un-apply a gate (apply its inverse) to a raw amplitude buffer.
pub fn unapply_gate_amps(
    amps: &mut [Complex64],
    n_qubits: usize,
    gate: &GateSpec,
    params: &ParameterVector,
) -> Result<()> {
    match gate {
        GateSpec::Rotation { axis, target, slot } => {
            check_qubit(*target, n_qubits)?;
            let theta = params.get(*slot)?;
            apply_single_qubit(amps, *target, &rotation_matrix(*axis, -theta));
            Ok(())
        }
        GateSpec::ControlledZ { .. } => apply_gate_amps(amps, n_qubits, gate, params),
        GateSpec::FixedSingleQubit { matrix, target } => {
            check_qubit(*target, n_qubits)?;
            let inverse = [
                matrix[0].conj(),
                matrix[2].conj(),
                matrix[1].conj(),
                matrix[3].conj(),
            ];
            apply_single_qubit(amps, *target, &inverse);
            Ok(())
        }
    }
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::QubitOutOfRange {
            qubit: q,
            n_qubits: n,
        });
    }
    Ok(())
}

pub(crate) fn apply_single_qubit(amps: &mut [Complex64], target: usize, m: &[Complex64; 4]) {
    let step = 1usize << target;
    let mut base = 0;
    while base < amps.len() {
        for i in base..base + step {
            let j = i + step;
            let a = amps[i];
            let b = amps[j];
            amps[i] = m[0] * a + m[1] * b;
            amps[j] = m[2] * a + m[3] * b;
        }
        base += 2 * step;
    }
}

pub(crate) fn apply_cz(amps: &mut [Complex64], control: usize, target: usize) {
    let mask = (1usize << control) | (1usize << target);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

/// `<bra| V |ket>` for a single-qubit Pauli `V` on `target`.
pub(crate) fn pauli_bilinear(
    bra: &[Complex64],
    axis: RotationAxis,
    target: usize,
    ket: &[Complex64],
) -> Complex64 {
    let step = 1usize << target;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut base = 0;
    while base < bra.len() {
        for i in base..base + step {
            let j = i + step;
            match axis {
                RotationAxis::X => {
                    acc += bra[i].conj() * ket[j] + bra[j].conj() * ket[i];
                }
                RotationAxis::Y => {
                    let im = Complex64::new(0.0, 1.0);
                    acc += bra[i].conj() * (-im * ket[j]) + bra[j].conj() * (im * ket[i]);
                }
                RotationAxis::Z => {
                    acc += bra[i].conj() * ket[i] - bra[j].conj() * ket[j];
                }
            }
        }
        base += 2 * step;
    }
    acc
}

/// Run a full template on an input state.
pub fn run_circuit(
    template: &CircuitTemplate,
    params: &ParameterVector,
    input: &StateVector,
) -> Result<StateVector> {
    if input.n_qubits() != template.n_qubits() {
        return Err(Error::ShapeMismatch {
            expected: (1 << template.n_qubits(), 1),
            found: (input.dim(), 1),
        });
    }
    if params.len() != template.n_params() {
        return Err(Error::ParameterCount {
            expected: template.n_params(),
            found: params.len(),
        });
    }
    let mut state = input.clone();
    for gate in template.gates() {
        apply_gate_amps(&mut state.amps, state.n_qubits, gate, params)?;
    }
    Ok(state)
}

/// Materialize the full `2^n x 2^n` unitary of a template by running each
/// basis state through the gate list. Dense cross-check oracle; capped at
/// [`MAX_DENSE_QUBITS`] qubits.
pub fn circuit_unitary_dense(
    template: &CircuitTemplate,
    params: &ParameterVector,
) -> Result<ComplexMatrix> {
    let n = template.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SystemTooLarge {
            n_qubits: n,
            max: MAX_DENSE_QUBITS,
        });
    }
    if params.len() != template.n_params() {
        return Err(Error::ParameterCount {
            expected: template.n_params(),
            found: params.len(),
        });
    }
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.fill(Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        for gate in template.gates() {
            apply_gate_amps(&mut col, n, gate, params)?;
        }
        for i in 0..dim {
            out[(i, j)] = col[i];
        }
    }
    Ok(out)
}
