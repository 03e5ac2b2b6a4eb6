//! Pauli-string observables and expectation values.
//!
//! An observable is a real-weighted sum of Pauli strings, Hermitian by
//! construction. Expectation values are evaluated term by term with one
//! `O(2^n)` pass per term, so a Hamiltonian with `O(n)` terms never needs a
//! dense matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::sim::StateVector;

/// Single-qubit Pauli operator (identity is implicit: qubits absent from a
/// string carry `I`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn name(self) -> &'static str {
        match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }
}

/// The dense 2x2 matrix of a Pauli operator.
pub fn pauli_matrix(p: Pauli) -> ComplexMatrix {
    let c = Complex64::new;
    let entries = match p {
        Pauli::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Pauli::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        Pauli::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
    };
    ComplexMatrix::from_vec(2, 2, entries).expect("2x2")
}

/// Dense `2^n x 2^n` matrix of a single Pauli acting on one qubit.
pub fn single_pauli_dense(n_qubits: usize, qubit: usize, p: Pauli) -> Result<ComplexMatrix> {
    if qubit >= n_qubits {
        return Err(Error::QubitOutOfRange {
            qubit,
            n_qubits,
        });
    }
    // Qubit 0 is the least significant bit, i.e. the rightmost kron factor.
    let mut m = ComplexMatrix::identity(1);
    for k in (0..n_qubits).rev() {
        let factor = if k == qubit {
            pauli_matrix(p)
        } else {
            ComplexMatrix::identity(2)
        };
        m = kron(&m, &factor)?;
    }
    Ok(m)
}

/// Tensor product of Pauli operators on distinct qubits. The empty string is
/// the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    /// Sorted by qubit, one entry per qubit.
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(mut ops: Vec<(usize, Pauli)>) -> Result<Self> {
        ops.sort_by_key(|(q, _)| *q);
        for pair in ops.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicatePauliQubit { qubit: pair[0].0 });
            }
        }
        Ok(Self { ops })
    }

    pub fn identity() -> Self {
        Self { ops: Vec::new() }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self {
            ops: vec![(qubit, p)],
        }
    }

    pub fn two(q0: usize, p0: Pauli, q1: usize, p1: Pauli) -> Result<Self> {
        Self::new(vec![(q0, p0), (q1, p1)])
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.last().map(|(q, _)| *q)
    }

    /// Bit masks used by the kernel: (flip, phase-sign mask, #Y factors).
    fn masks(&self) -> (usize, usize, usize) {
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut n_y = 0usize;
        for &(q, p) in &self.ops {
            match p {
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    sign |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => sign |= 1 << q,
            }
        }
        (flip, sign, n_y)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (i, (q, p)) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.name(), q)?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Self {
        Self { terms }
    }

    pub fn empty() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            terms: vec![(coefficient, PauliString::identity())],
        }
    }

    /// `Z` on a single qubit.
    pub fn z(qubit: usize) -> Self {
        Self {
            terms: vec![(1.0, PauliString::single(qubit, Pauli::Z))],
        }
    }

    /// The two-qubit `Z Z` correlator.
    pub fn zz(q0: usize, q1: usize) -> Result<Self> {
        Ok(Self {
            terms: vec![(1.0, PauliString::two(q0, Pauli::Z, q1, Pauli::Z)?)],
        })
    }

    pub fn add_term(&mut self, coefficient: f64, string: PauliString) {
        self.terms.push((coefficient, string));
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.terms.iter().filter_map(|(_, s)| s.max_qubit()).max()
    }

    fn check_fits(&self, n_qubits: usize) -> Result<()> {
        if let Some(q) = self.max_qubit() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Write `H |psi>` into `out` (an unnormalized vector in general).
    pub fn apply_to_amps(
        &self,
        input: &[Complex64],
        out: &mut [Complex64],
        n_qubits: usize,
    ) -> Result<()> {
        debug_assert_eq!(input.len(), 1 << n_qubits);
        debug_assert_eq!(out.len(), input.len());
        self.check_fits(n_qubits)?;
        out.fill(Complex64::new(0.0, 0.0));
        for (coeff, string) in &self.terms {
            let (flip, sign, n_y) = string.masks();
            let y_phase = i_power(n_y) * coeff;
            for (i, amp) in input.iter().enumerate() {
                let s = if (i & sign).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out[i ^ flip] += y_phase * s * amp;
            }
        }
        Ok(())
    }

    /// Dense matrix of the observable, for exact-diagonalization oracles.
    pub fn to_dense(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        if n_qubits > crate::linalg::DIM_CAP.trailing_zeros() as usize {
            return Err(Error::SystemTooLarge {
                n_qubits,
                max: crate::linalg::DIM_CAP.trailing_zeros() as usize,
            });
        }
        self.check_fits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut out = ComplexMatrix::zeros(dim, dim);
        let mut col_in = vec![Complex64::new(0.0, 0.0); dim];
        let mut col_out = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col_in.fill(Complex64::new(0.0, 0.0));
            col_in[j] = Complex64::new(1.0, 0.0);
            self.apply_to_amps(&col_in, &mut col_out, n_qubits)?;
            for i in 0..dim {
                out[(i, j)] = col_out[i];
            }
        }
        Ok(out)
    }
}

fn i_power(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `<psi| H |psi>` for a normalized state.
///
/// Evaluated term by term; the imaginary residue of the accumulation is
/// discarded (it is below 1e-12 for Hermitian input by construction).
pub fn expectation(state: &StateVector, obs: &Observable) -> Result<f64> {
    obs.check_fits(state.n_qubits())?;
    let amps = state.amplitudes();
    let mut total = Complex64::new(0.0, 0.0);
    for (coeff, string) in &obs.terms {
        let (flip, sign, n_y) = string.masks();
        let y_phase = i_power(n_y);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, amp) in amps.iter().enumerate() {
            let s = if (i & sign).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            acc += amps[i ^ flip].conj() * (y_phase * s * amp);
        }
        total += acc * coeff;
    }
    debug_assert!(
        total.im.abs() < 1e-12,
        "imaginary residue {} in expectation",
        total.im
    );
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis_state(n: usize, index: usize) -> StateVector {
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[index] = c(1.0, 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let raw: Vec<Complex64> = (0..1usize << n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn zz_on_computational_basis() {
        let zz = Observable::zz(0, 1).unwrap();
        assert_eq!(expectation(&basis_state(2, 0b00), &zz).unwrap(), 1.0);
        assert_eq!(expectation(&basis_state(2, 0b01), &zz).unwrap(), -1.0);
        assert_eq!(expectation(&basis_state(2, 0b10), &zz).unwrap(), -1.0);
        assert_eq!(expectation(&basis_state(2, 0b11), &zz).unwrap(), 1.0);
    }

    #[test]
    fn zz_on_bell_state() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![
            c(inv, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(inv, 0.0),
        ])
        .unwrap();
        let zz = Observable::zz(0, 1).unwrap();
        assert!((expectation(&bell, &zz).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn y_expectation_on_its_eigenstate() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let plus_y = StateVector::from_amplitudes(vec![c(inv, 0.0), c(0.0, inv)]).unwrap();
        let y = Observable::new(vec![(1.0, PauliString::single(0, Pauli::Y))]);
        assert!((expectation(&plus_y, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_term_contributes_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_state(3, &mut rng);
        let obs = Observable::identity(2.5);
        assert!((expectation(&s, &obs).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_linear_in_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = random_state(3, &mut rng);
        let a = Observable::new(vec![(0.7, PauliString::single(1, Pauli::X))]);
        let b = Observable::new(vec![(
            -1.3,
            PauliString::two(0, Pauli::Y, 2, Pauli::Z).unwrap(),
        )]);
        let mut sum = a.clone();
        for (coeff, s_) in b.terms() {
            sum.add_term(*coeff, s_.clone());
        }
        let lhs = expectation(&s, &sum).unwrap();
        let rhs = expectation(&s, &a).unwrap() + expectation(&s, &b).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn expectation_invariant_under_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_state(2, &mut rng);
        let phase = c(0.0, 1.23).exp();
        let rotated = StateVector::from_amplitudes(
            s.amplitudes().iter().map(|a| a * phase).collect(),
        )
        .unwrap();
        let obs = Observable::new(vec![
            (0.5, PauliString::single(0, Pauli::X)),
            (1.5, PauliString::two(0, Pauli::Z, 1, Pauli::Z).unwrap()),
        ]);
        let a = expectation(&s, &obs).unwrap();
        let b = expectation(&rotated, &obs).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn expectation_within_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let obs = Observable::new(vec![
            (1.0, PauliString::two(0, Pauli::X, 1, Pauli::X).unwrap()),
            (0.5, PauliString::single(0, Pauli::Z)),
            (-0.25, PauliString::identity()),
        ]);
        let dense = obs.to_dense(2).unwrap();
        let (vals, _) = hermitian_eig(&dense).unwrap();
        for _ in 0..20 {
            let s = random_state(2, &mut rng);
            let e = expectation(&s, &obs).unwrap();
            assert!(e >= vals[0] - 1e-12 && e <= vals[1] + 1e-12 || e <= *vals.last().unwrap() + 1e-12);
            assert!(e >= vals[0] - 1e-12);
        }
    }

    #[test]
    fn observable_qubit_out_of_range() {
        let obs = Observable::z(5);
        let s = basis_state(2, 0);
        assert!(matches!(
            expectation(&s, &obs),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn duplicate_qubit_rejected() {
        assert!(matches!(
            PauliString::new(vec![(0, Pauli::X), (0, Pauli::Z)]),
            Err(Error::DuplicatePauliQubit { .. })
        ));
    }

    #[test]
    fn dense_matches_kron_construction() {
        let obs = Observable::new(vec![(
            1.0,
            PauliString::two(0, Pauli::Z, 1, Pauli::Z).unwrap(),
        )]);
        let dense = obs.to_dense(2).unwrap();
        let z0 = single_pauli_dense(2, 0, Pauli::Z).unwrap();
        let z1 = single_pauli_dense(2, 1, Pauli::Z).unwrap();
        let expected = z0.mul(&z1).unwrap();
        assert!(dense.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn single_pauli_dense_placement() {
        // X on qubit 1 of two: flips the high bit, e0 -> e2.
        let x1 = single_pauli_dense(2, 1, Pauli::X).unwrap();
        assert_eq!(x1[(2, 0)], c(1.0, 0.0));
        assert_eq!(x1[(0, 2)], c(1.0, 0.0));
        assert_eq!(x1[(1, 3)], c(1.0, 0.0));
    }

    #[test]
    fn apply_to_amps_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let obs = Observable::new(vec![
            (0.8, PauliString::two(0, Pauli::Y, 2, Pauli::X).unwrap()),
            (-0.3, PauliString::single(1, Pauli::Z)),
        ]);
        let s = random_state(3, &mut rng);
        let mut out = vec![c(0.0, 0.0); 8];
        obs.apply_to_amps(s.amplitudes(), &mut out, 3).unwrap();

        let dense = obs.to_dense(3).unwrap();
        let via = dense
            .matvec(&crate::linalg::ComplexVector::new(s.amplitudes().to_vec()))
            .unwrap();
        let dev: f64 = out
            .iter()
            .zip(via.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }
}
