//! Gradient engines for expectation-value objectives.
//!
//! Three mutually validating routes to `dE/d theta_k`:
//!
//! * [`grad_parameter_shift`] — for rotation generators with `V^2 = I` under
//!   the `exp(-i theta V)` convention, the derivative equals
//!   `E(theta + pi/4) - E(theta - pi/4)` exactly. The shift is `pi/4` with
//!   unit scale; the more common `pi/2` shift belongs to the half-angle
//!   convention and silently produces wrong gradients here.
//! * [`grad_adjoint_all`] — all partials in one reverse sweep over the gate
//!   list, `O(#gates)` gate applications and three state buffers total.
//! * [`grad_finite_diff`] — central differences, the independent oracle.
//!
//! [`grad_direction_dense`] evaluates the directional form
//! `i <psi0| [U^dag H U, M] |psi0>` for a Hermitian direction `M` on dense
//! operators, which the other engines are checked against.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use crate::circuit::{CircuitTemplate, GateSpec, ParameterVector};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, HERMITIAN_TOL};
use crate::observable::{expectation, Observable};
use crate::sim::{pauli_bilinear, run_circuit, unapply_gate_amps, StateVector};

/// Default central-difference step: balances truncation against round-off
/// at double precision.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Which engine produced a gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMethod {
    Adjoint,
    Shift,
    FiniteDiff,
}

/// A full gradient vector, one entry per parameter slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientResult {
    pub values: Vec<f64>,
    pub method: GradMethod,
}

/// Exact derivative of the expectation with respect to one rotation slot,
/// from two shifted circuit evaluations.
pub fn grad_parameter_shift(
    template: &CircuitTemplate,
    params: &ParameterVector,
    input: &StateVector,
    obs: &Observable,
    slot: usize,
) -> Result<f64> {
    template.rotation_for_slot(slot)?;
    let theta = params.get(slot)?;
    let mut shifted = params.clone();

    shifted.set(slot, theta + FRAC_PI_4);
    let plus = expectation(&run_circuit(template, &shifted, input)?, obs)?;
    shifted.set(slot, theta - FRAC_PI_4);
    let minus = expectation(&run_circuit(template, &shifted, input)?, obs)?;
    Ok(plus - minus)
}

/// Central-difference derivative with step `h`.
pub fn grad_finite_diff(
    template: &CircuitTemplate,
    params: &ParameterVector,
    input: &StateVector,
    obs: &Observable,
    slot: usize,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidStep { step });
    }
    let theta = params.get(slot)?;
    let mut shifted = params.clone();

    shifted.set(slot, theta + step);
    let plus = expectation(&run_circuit(template, &shifted, input)?, obs)?;
    shifted.set(slot, theta - step);
    let minus = expectation(&run_circuit(template, &shifted, input)?, obs)?;
    Ok((plus - minus) / (2.0 * step))
}

/// All partial derivatives in a single reverse sweep.
///
/// Keeps a forward state `psi` and a costate `lambda = H psi` positioned
/// just after the gate under consideration; the partial for a rotation with
/// generator `V` is `2 Im <lambda| V |psi>`. Gates are un-applied rather
/// than cached, so memory stays at three `2^n` buffers regardless of depth.
pub fn grad_adjoint_all(
    template: &CircuitTemplate,
    params: &ParameterVector,
    input: &StateVector,
    obs: &Observable,
) -> Result<GradientResult> {
    let (_, values) = adjoint_value_and_grad(template, params, input, obs)?;
    Ok(GradientResult {
        values,
        method: GradMethod::Adjoint,
    })
}

/// Adjoint sweep returning both the expectation value and all partials; the
/// value is `Re <psi|lambda>` from the buffers the sweep needs anyway, so a
/// training step costs one forward pass plus the reverse sweep.
pub fn adjoint_value_and_grad(
    template: &CircuitTemplate,
    params: &ParameterVector,
    input: &StateVector,
    obs: &Observable,
) -> Result<(f64, Vec<f64>)> {
    let n = template.n_qubits();
    if input.n_qubits() != n {
        return Err(Error::ShapeMismatch {
            expected: (1 << n, 1),
            found: (input.dim(), 1),
        });
    }
    let forward = run_circuit(template, params, input)?;
    let mut psi = forward.amplitudes().to_vec();
    let mut lambda = vec![Complex64::new(0.0, 0.0); psi.len()];
    obs.apply_to_amps(&psi, &mut lambda, n)?;
    let value = psi
        .iter()
        .zip(&lambda)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .re;

    let mut values = vec![0.0; template.n_params()];
    for gate in template.gates().iter().rev() {
        if let GateSpec::Rotation { axis, target, slot } = gate {
            let overlap = pauli_bilinear(&lambda, *axis, *target, &psi);
            values[*slot] = 2.0 * overlap.im;
        }
        unapply_gate_amps(&mut psi, n, gate, params)?;
        unapply_gate_amps(&mut lambda, n, gate, params)?;
    }
    Ok((value, values))
}

/// Directional derivative `i <psi0| [U^dag H U, M] |psi0>` on dense
/// operators, for a Hermitian direction `M` in the tangent space at `U`
/// (tangent vectors written as `Z = i U M`).
pub fn grad_direction_dense(
    u: &ComplexMatrix,
    direction: &ComplexMatrix,
    obs: &ComplexMatrix,
    psi0: &ComplexVector,
) -> Result<f64> {
    let n = u.rows();
    if !u.is_square() || direction.rows() != n || direction.cols() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            found: (direction.rows(), direction.cols()),
        });
    }
    if obs.rows() != n || obs.cols() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            found: (obs.rows(), obs.cols()),
        });
    }
    if psi0.dim() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, 1),
            found: (psi0.dim(), 1),
        });
    }
    let dev = direction.hermitian_deviation();
    if dev >= HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let x = u.matvec(psi0)?;
    let y = u.matvec(&direction.matvec(psi0)?)?;
    let hx = obs.matvec(&x)?;
    let hy = obs.matvec(&y)?;
    let z = x.inner(&hy);
    let w = y.inner(&hx);
    let g = Complex64::new(0.0, 1.0) * (z - w);
    debug_assert!(g.im.abs() < 1e-12, "imaginary residue {}", g.im);
    Ok(g.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::RotationAxis;
    use crate::observable::{single_pauli_dense, Pauli, PauliString};
    use crate::sim::{apply_gate_amps, circuit_unitary_dense};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn rot(axis: RotationAxis, target: usize, slot: usize) -> GateSpec {
        GateSpec::Rotation { axis, target, slot }
    }

    fn single_x_template() -> CircuitTemplate {
        CircuitTemplate::new(1, vec![rot(RotationAxis::X, 0, 0)]).unwrap()
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let raw: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    fn random_template(n: usize, depth: usize, rng: &mut ChaCha8Rng) -> CircuitTemplate {
        let axes = [RotationAxis::X, RotationAxis::Y, RotationAxis::Z];
        let mut gates = Vec::new();
        let mut slot = 0;
        for _ in 0..depth {
            for q in 0..n {
                gates.push(rot(axes[rng.gen_range(0..3)], q, slot));
                slot += 1;
            }
            for q in 0..n - 1 {
                gates.push(GateSpec::ControlledZ {
                    control: q,
                    target: q + 1,
                });
            }
        }
        CircuitTemplate::new(n, gates).unwrap()
    }

    fn random_observable(n: usize, rng: &mut ChaCha8Rng) -> Observable {
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
        let mut obs = Observable::empty();
        for _ in 0..3 {
            let q0 = rng.gen_range(0..n);
            let mut q1 = rng.gen_range(0..n);
            while q1 == q0 && n > 1 {
                q1 = rng.gen_range(0..n);
            }
            let coeff = rng.gen_range(-1.0..1.0);
            if n == 1 {
                obs.add_term(coeff, PauliString::single(0, paulis[rng.gen_range(0..3)]));
            } else {
                obs.add_term(
                    coeff,
                    PauliString::two(
                        q0,
                        paulis[rng.gen_range(0..3)],
                        q1,
                        paulis[rng.gen_range(0..3)],
                    )
                    .unwrap(),
                );
            }
        }
        obs
    }

    #[test]
    fn shift_rule_stationary_at_zero() {
        let t = single_x_template();
        let g = grad_parameter_shift(
            &t,
            &ParameterVector::new(vec![0.0]),
            &StateVector::zero_state(1),
            &Observable::z(0),
            0,
        )
        .unwrap();
        assert!(g.abs() < 1e-15);
    }

    #[test]
    fn shift_rule_matches_hand_value() {
        // E(theta) = cos(2 theta) for exp(-i theta X) on |0> with H = Z,
        // so dE/dtheta at pi/8 is -2 sin(pi/4) = -sqrt(2).
        let t = single_x_template();
        let params = ParameterVector::new(vec![std::f64::consts::FRAC_PI_8]);
        let input = StateVector::zero_state(1);
        let obs = Observable::z(0);

        let shift = grad_parameter_shift(&t, &params, &input, &obs, 0).unwrap();
        assert!((shift + std::f64::consts::SQRT_2).abs() < 1e-12);

        let adjoint = grad_adjoint_all(&t, &params, &input, &obs).unwrap();
        assert!((adjoint.values[0] + std::f64::consts::SQRT_2).abs() < 1e-12);

        let fd = grad_finite_diff(&t, &params, &input, &obs, 0, DEFAULT_FD_STEP).unwrap();
        assert!((fd + std::f64::consts::SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn identity_observable_has_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let t = random_template(3, 2, &mut rng);
        let params = crate::ansatz::random_params(t.n_params(), &mut rng);
        let input = random_state(3, &mut rng);
        let obs = Observable::identity(1.0);
        for slot in 0..t.n_params() {
            let g = grad_parameter_shift(&t, &params, &input, &obs, slot).unwrap();
            assert!(g.abs() < 1e-12);
        }
        let all = grad_adjoint_all(&t, &params, &input, &obs).unwrap();
        assert!(all.values.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn adjoint_matches_shift_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..10 {
            let n = rng.gen_range(2..=4);
            let depth = rng.gen_range(1..=5);
            let t = random_template(n, depth, &mut rng);
            let params = crate::ansatz::random_params(t.n_params(), &mut rng);
            let input = random_state(n, &mut rng);
            let obs = random_observable(n, &mut rng);

            let adjoint = grad_adjoint_all(&t, &params, &input, &obs).unwrap();
            for slot in 0..t.n_params() {
                let shift = grad_parameter_shift(&t, &params, &input, &obs, slot).unwrap();
                assert!(
                    (adjoint.values[slot] - shift).abs() < 1e-10,
                    "slot {slot}: adjoint {} vs shift {}",
                    adjoint.values[slot],
                    shift
                );
            }
        }
    }

    #[test]
    fn commuting_generators_give_zero_gradient_vector() {
        // all-Z circuit with H = Z0: everything is diagonal, E is constant
        let t = CircuitTemplate::new(
            2,
            vec![
                rot(RotationAxis::Z, 0, 0),
                rot(RotationAxis::Z, 1, 1),
                GateSpec::ControlledZ {
                    control: 0,
                    target: 1,
                },
                rot(RotationAxis::Z, 0, 2),
                rot(RotationAxis::Z, 1, 3),
            ],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let params = crate::ansatz::random_params(4, &mut rng);
        let input = random_state(2, &mut rng);
        let all = grad_adjoint_all(&t, &params, &input, &Observable::z(0)).unwrap();
        assert!(all.values.iter().all(|g| g.abs() < 1e-13));
    }

    #[test]
    fn empty_circuit_gives_empty_gradient() {
        let t = CircuitTemplate::new(2, vec![]).unwrap();
        let all = grad_adjoint_all(
            &t,
            &ParameterVector::zeros(0),
            &StateVector::zero_state(2),
            &Observable::z(0),
        )
        .unwrap();
        assert!(all.values.is_empty());
    }

    #[test]
    fn finite_diff_zero_for_constant_objective() {
        let t = CircuitTemplate::new(1, vec![rot(RotationAxis::Z, 0, 0)]).unwrap();
        let g = grad_finite_diff(
            &t,
            &ParameterVector::new(vec![0.37]),
            &StateVector::zero_state(1),
            &Observable::z(0),
            0,
            DEFAULT_FD_STEP,
        )
        .unwrap();
        assert!(g.abs() < 1e-9);
    }

    #[test]
    fn finite_diff_rejects_bad_step() {
        let t = single_x_template();
        let err = grad_finite_diff(
            &t,
            &ParameterVector::zeros(1),
            &StateVector::zero_state(1),
            &Observable::z(0),
            0,
            0.0,
        );
        assert!(matches!(err, Err(Error::InvalidStep { .. })));
    }

    #[test]
    fn x_only_circuit_gradient_is_odd_in_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let t = CircuitTemplate::new(
            2,
            vec![
                rot(RotationAxis::X, 0, 0),
                rot(RotationAxis::X, 1, 1),
                GateSpec::ControlledZ {
                    control: 0,
                    target: 1,
                },
                rot(RotationAxis::X, 0, 2),
            ],
        )
        .unwrap();
        let values: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let params = ParameterVector::new(values.clone());
        let flipped = ParameterVector::new(values.iter().map(|v| -v).collect());
        let input = StateVector::zero_state(2);
        let obs = Observable::z(0);

        let g = grad_adjoint_all(&t, &params, &input, &obs).unwrap();
        let g_flipped = grad_adjoint_all(&t, &flipped, &input, &obs).unwrap();
        for (a, b) in g.values.iter().zip(&g_flipped.values) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_rejects_out_of_range_slot() {
        let t = single_x_template();
        let err = grad_parameter_shift(
            &t,
            &ParameterVector::zeros(1),
            &StateVector::zero_state(1),
            &Observable::z(0),
            5,
        );
        assert!(matches!(err, Err(Error::MissingSlot { .. })));
    }

    #[test]
    fn direction_dense_zero_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let n = 4;
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let h = g.add(&g.dagger()).unwrap().scale(Complex64::new(0.5, 0.0));
        let u = crate::linalg::qr_unitary_factor(&g).unwrap();
        let psi0 = ComplexVector::basis(n, 0);

        // direction commuting with the conjugated observable
        let uhu = u.dagger().mul(&h).unwrap().mul(&u).unwrap();
        let m_commuting = uhu.mul(&uhu).unwrap();
        let val = grad_direction_dense(&u, &m_commuting, &h, &psi0).unwrap();
        assert!(val.abs() < 1e-10);

        // identity observable commutes with everything
        let val2 = grad_direction_dense(&u, &h, &ComplexMatrix::identity(n), &psi0).unwrap();
        assert!(val2.abs() < 1e-12);
    }

    #[test]
    fn direction_dense_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let g = ComplexMatrix::from_fn(2, 2, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let err = grad_direction_dense(
            &ComplexMatrix::identity(2),
            &g,
            &ComplexMatrix::identity(2),
            &ComplexVector::basis(2, 0),
        );
        assert!(matches!(err, Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn adjoint_matches_dense_commutator_form() {
        // dE/dtheta_k = i <psi| [U^dag H U, M_k] |psi> with
        // M_k = -(P^dag V P) for P the product of gates before the rotation.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let n = 3;
        let dim = 1usize << n;
        let t = random_template(n, 3, &mut rng);
        let params = crate::ansatz::random_params(t.n_params(), &mut rng);
        let input = random_state(n, &mut rng);
        let obs = random_observable(n, &mut rng);

        let adjoint = grad_adjoint_all(&t, &params, &input, &obs).unwrap();
        let u_full = circuit_unitary_dense(&t, &params).unwrap();
        let h_dense = obs.to_dense(n).unwrap();
        let psi_in = ComplexVector::new(input.amplitudes().to_vec());

        // prefix columns, extended gate by gate
        let mut cols: Vec<Vec<Complex64>> = (0..dim)
            .map(|j| {
                let mut c = vec![Complex64::new(0.0, 0.0); dim];
                c[j] = Complex64::new(1.0, 0.0);
                c
            })
            .collect();
        for gate in t.gates() {
            if let GateSpec::Rotation { axis, target, slot } = gate {
                let prefix = ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
                let v = single_pauli_dense(
                    n,
                    *target,
                    match axis {
                        RotationAxis::X => Pauli::X,
                        RotationAxis::Y => Pauli::Y,
                        RotationAxis::Z => Pauli::Z,
                    },
                )
                .unwrap();
                let m = prefix
                    .dagger()
                    .mul(&v)
                    .unwrap()
                    .mul(&prefix)
                    .unwrap()
                    .scale(Complex64::new(-1.0, 0.0));
                let dense_grad = grad_direction_dense(&u_full, &m, &h_dense, &psi_in).unwrap();
                assert!(
                    (dense_grad - adjoint.values[*slot]).abs() < 1e-9,
                    "slot {slot}: dense {dense_grad} vs adjoint {}",
                    adjoint.values[*slot]
                );
            }
            for col in cols.iter_mut() {
                apply_gate_amps(col, n, gate, &params).unwrap();
            }
        }
    }
}
