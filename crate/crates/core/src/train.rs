//! Training loops: Adam, the Heisenberg-model VQE, and the binary
//! circuit classifier.
//!
//! The classifier follows the affine readout
//! `P(even | psi) = ( <psi| U^dag ZZ U |psi> + 1 ) / 2` with a binary
//! cross-entropy loss, trained one randomly drawn example per update. The
//! VQE minimizes `<psi| H |psi>` with full gradients. Both use bias-corrected
//! Adam; only the learning rate is treated as an experiment knob, the betas
//! and epsilon stay at their usual defaults.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{CircuitTemplate, ParameterVector};
use crate::data::EncodedExample;
use crate::error::{Error, Result};
use crate::grad::adjoint_value_and_grad;
use crate::linalg::hermitian_eig;
use crate::observable::{expectation, Observable, Pauli, PauliString};
use crate::sim::{run_circuit, StateVector};

/// Learning rate used throughout the experiments.
pub const DEFAULT_LEARNING_RATE: f64 = 0.001;

/// Probability clip for the cross-entropy loss.
pub const PROB_CLIP: f64 = 1e-12;

/// Bias-corrected Adam state.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self {
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected update, in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != self.first_moment.len() {
            return Err(Error::ParameterCount {
                expected: self.first_moment.len(),
                found: params.len().min(grads.len()),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                context: "gradient",
            });
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.first_moment[i] = self.beta1 * self.first_moment[i] + (1.0 - self.beta1) * g;
            self.second_moment[i] =
                self.beta2 * self.second_moment[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.first_moment[i] / bias1;
            let v_hat = self.second_moment[i] / bias2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

/// Heisenberg chain with a Z field: couplings `J`, field `h`, optionally
/// periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeProblem {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field: f64,
    pub periodic: bool,
}

impl VqeProblem {
    /// The ring at the `J = h = 1` point.
    pub fn heisenberg_ring(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            coupling: 1.0,
            field: 1.0,
            periodic: true,
        }
    }
}

/// `H = J sum_(i,j) (X_i X_j + Y_i Y_j + Z_i Z_j) + h sum_i Z_i` over the
/// chain edges; `3 |E| + n` terms.
pub fn heisenberg_hamiltonian(problem: &VqeProblem) -> Result<Observable> {
    let n = problem.n_qubits;
    if n < 2 || (problem.periodic && n < 3) {
        return Err(Error::InvalidSize {
            what: "n_qubits",
            value: n,
        });
    }
    let edges: Vec<(usize, usize)> = if problem.periodic {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    } else {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    };
    let mut obs = Observable::empty();
    for &(i, j) in &edges {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            obs.add_term(problem.coupling, PauliString::two(i, p, j, p)?);
        }
    }
    for i in 0..n {
        obs.add_term(problem.field, PauliString::single(i, Pauli::Z));
    }
    Ok(obs)
}

/// Qubit cap for the dense exact-diagonalization oracle.
pub const MAX_EXACT_QUBITS: usize = 12;

/// Minimum eigenvalue of the dense observable matrix.
pub fn exact_ground_energy(obs: &Observable, n_qubits: usize) -> Result<f64> {
    if n_qubits > MAX_EXACT_QUBITS {
        return Err(Error::SystemTooLarge {
            n_qubits,
            max: MAX_EXACT_QUBITS,
        });
    }
    let dense = obs.to_dense(n_qubits)?;
    let (vals, _) = hermitian_eig(&dense)?;
    Ok(vals[0])
}

/// Classifier readout: probability of the "even" class.
pub fn qnn_predict(
    template: &CircuitTemplate,
    params: &ParameterVector,
    encoded: &StateVector,
    obs: &Observable,
) -> Result<f64> {
    let out = run_circuit(template, params, encoded)?;
    let e = expectation(&out, obs)?;
    Ok((0.5 * (e + 1.0)).clamp(0.0, 1.0))
}

/// Binary cross-entropy with probability clipping.
pub fn cross_entropy(prob_even: f64, label: u8) -> f64 {
    let p = prob_even.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// One recorded training step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub iteration: usize,
    /// Loss (classifier) or energy (VQE).
    pub objective: f64,
    /// Training-set accuracy, present at the configured cadence.
    pub accuracy: Option<f64>,
    /// Per-parameter gradient of the objective, present at snapshot cadence.
    pub grad_snapshot: Option<Vec<f64>>,
}

/// Knobs for the training loops.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Record the full gradient every this many iterations (0 = never).
    pub snapshot_every: usize,
    /// Evaluate training-set accuracy every this many iterations (0 = never;
    /// the final iteration is always evaluated). Classifier only.
    pub accuracy_every: usize,
    /// Stop when the energy improved by less than `tolerance` over this many
    /// iterations (0 = no early stop). VQE only.
    pub window: usize,
    pub tolerance: f64,
}

impl TrainConfig {
    pub fn classifier(seed: u64) -> Self {
        Self {
            iterations: 2000,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed,
            snapshot_every: 10,
            accuracy_every: 10,
            window: 0,
            tolerance: 0.0,
        }
    }

    pub fn vqe(seed: u64) -> Self {
        Self {
            iterations: 5000,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed,
            snapshot_every: 10,
            accuracy_every: 0,
            window: 100,
            tolerance: 1e-6,
        }
    }
}

/// Fraction of examples the classifier currently labels correctly
/// (prediction is "even" when `P(even) >= 1/2`).
pub fn dataset_accuracy(
    template: &CircuitTemplate,
    params: &ParameterVector,
    dataset: &[EncodedExample],
    obs: &Observable,
) -> Result<f64> {
    let mut correct = 0usize;
    for example in dataset {
        let p = qnn_predict(template, params, &example.state, obs)?;
        let predicted = u8::from(p >= 0.5);
        if predicted == example.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

fn zero_frozen(grads: &mut [f64], frozen: usize) {
    for g in grads.iter_mut().take(frozen) {
        *g = 0.0;
    }
}

/// Stochastic classifier training: one uniformly drawn example per update.
///
/// The loss gradient is chained through the readout,
/// `dL/dtheta = dL/dp * 1/2 * d<ZZ>/dtheta`, with the expectation gradient
/// from the adjoint engine. The `ZZ` observable sits on qubits 0 and 1.
pub fn qnn_train(
    template: &CircuitTemplate,
    params0: &ParameterVector,
    dataset: &[EncodedExample],
    config: &TrainConfig,
) -> Result<Vec<TrainRecord>> {
    if dataset.is_empty() {
        return Err(Error::InvalidSize {
            what: "dataset size",
            value: 0,
        });
    }
    if params0.len() != template.n_params() {
        return Err(Error::ParameterCount {
            expected: template.n_params(),
            found: params0.len(),
        });
    }
    let obs = Observable::zz(0, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = params0.clone();
    let mut adam = AdamState::new(params.len(), config.learning_rate);
    let mut records = Vec::with_capacity(config.iterations);

    for iteration in 0..config.iterations {
        let example = &dataset[rng.gen_range(0..dataset.len())];

        let (e, expectation_grad) =
            adjoint_value_and_grad(template, &params, &example.state, &obs)?;
        let p = (0.5 * (e + 1.0)).clamp(0.0, 1.0);
        let loss = cross_entropy(p, example.label);
        if !loss.is_finite() {
            return Err(Error::NonFinite { context: "loss" });
        }

        let p_clipped = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        let dl_dp = (p_clipped - f64::from(example.label)) / (p_clipped * (1.0 - p_clipped));
        let chain = 0.5 * dl_dp;
        let mut grads: Vec<f64> = expectation_grad.iter().map(|g| g * chain).collect();
        zero_frozen(&mut grads, template.frozen_prefix());

        let snapshot = config.snapshot_every != 0 && iteration % config.snapshot_every == 0;
        let grad_snapshot = snapshot.then(|| grads.clone());

        adam.step(params.values_mut(), &grads)?;

        let last = iteration + 1 == config.iterations;
        let measure_accuracy =
            last || (config.accuracy_every != 0 && iteration % config.accuracy_every == 0);
        let accuracy = if measure_accuracy {
            Some(dataset_accuracy(template, &params, dataset, &obs)?)
        } else {
            None
        };

        records.push(TrainRecord {
            iteration,
            objective: loss,
            accuracy,
            grad_snapshot,
        });
    }
    Ok(records)
}

/// Full-gradient VQE training on a Pauli-sum observable.
///
/// Gradients for frozen slots (the fixed entangler prefix) are zeroed, so
/// those parameters never move. Stops at the iteration cap or when the
/// energy improvement over `config.window` iterations drops below
/// `config.tolerance`.
pub fn vqe_train(
    template: &CircuitTemplate,
    params0: &ParameterVector,
    obs: &Observable,
    config: &TrainConfig,
) -> Result<Vec<TrainRecord>> {
    if params0.len() != template.n_params() {
        return Err(Error::ParameterCount {
            expected: template.n_params(),
            found: params0.len(),
        });
    }
    let input = StateVector::zero_state(template.n_qubits());
    let mut params = params0.clone();
    let mut adam = AdamState::new(params.len(), config.learning_rate);
    let mut records: Vec<TrainRecord> = Vec::new();

    for iteration in 0..config.iterations {
        let (energy, mut grads) = adjoint_value_and_grad(template, &params, &input, obs)?;
        if !energy.is_finite() {
            return Err(Error::NonFinite { context: "energy" });
        }
        zero_frozen(&mut grads, template.frozen_prefix());

        let snapshot = config.snapshot_every != 0 && iteration % config.snapshot_every == 0;
        records.push(TrainRecord {
            iteration,
            objective: energy,
            accuracy: None,
            grad_snapshot: snapshot.then(|| grads.clone()),
        });

        if config.window != 0 && iteration >= config.window {
            let previous = records[iteration - config.window].objective;
            if previous - energy < config.tolerance {
                break;
            }
        }

        adam.step(params.values_mut(), &grads)?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_identity_block, IdentityBlockPlan};
    use crate::circuit::{GateSpec, RotationAxis};
    use num_complex::Complex64;

    #[test]
    fn heisenberg_term_counts() {
        let ring = heisenberg_hamiltonian(&VqeProblem::heisenberg_ring(7)).unwrap();
        assert_eq!(ring.n_terms(), 3 * 7 + 7);

        let open = heisenberg_hamiltonian(&VqeProblem {
            n_qubits: 3,
            coupling: 1.0,
            field: 1.0,
            periodic: false,
        })
        .unwrap();
        assert_eq!(open.n_terms(), 3 * 2 + 3);
    }

    #[test]
    fn heisenberg_rejects_short_rings() {
        assert!(heisenberg_hamiltonian(&VqeProblem {
            n_qubits: 2,
            coupling: 1.0,
            field: 1.0,
            periodic: true,
        })
        .is_err());
    }

    #[test]
    fn field_only_ground_energy() {
        let problem = VqeProblem {
            n_qubits: 4,
            coupling: 0.0,
            field: 1.0,
            periodic: true,
        };
        let obs = heisenberg_hamiltonian(&problem).unwrap();
        let e0 = exact_ground_energy(&obs, 4).unwrap();
        assert!((e0 + 4.0).abs() < 1e-10);
    }

    #[test]
    fn heisenberg_ring_3_ground_energy() {
        // frozen from an independent dense diagonalization
        let obs = heisenberg_hamiltonian(&VqeProblem::heisenberg_ring(3)).unwrap();
        let e0 = exact_ground_energy(&obs, 3).unwrap();
        assert!((e0 + 4.0).abs() < 1e-9);
    }

    #[test]
    fn exact_ground_energy_small_cases() {
        assert!((exact_ground_energy(&Observable::z(0), 1).unwrap() + 1.0).abs() < 1e-12);

        let mut obs = Observable::zz(0, 1).unwrap();
        obs.add_term(1.0, PauliString::single(0, Pauli::Z));
        // diagonal values over (q1 q0): 2, -2, 0, 0
        assert!((exact_ground_energy(&obs, 2).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_ground_energy_cap() {
        assert!(matches!(
            exact_ground_energy(&Observable::z(0), 13),
            Err(Error::SystemTooLarge { .. })
        ));
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters() {
        let mut adam = AdamState::new(3, 0.01);
        let mut params = vec![0.5, -0.2, 1.0];
        adam.step(&mut params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(params, vec![0.5, -0.2, 1.0]);
    }

    #[test]
    fn adam_first_step_magnitude() {
        // bias correction makes the first update lr * g / (|g| + eps)
        let mut adam = AdamState::new(1, DEFAULT_LEARNING_RATE);
        let mut params = vec![0.0];
        adam.step(&mut params, &[1.0]).unwrap();
        let expected = -0.001 * (1.0 / (1.0 + 1e-8));
        assert!((params[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn adam_constant_gradient_step_approaches_lr() {
        let mut adam = AdamState::new(1, DEFAULT_LEARNING_RATE);
        let mut params = vec![0.0];
        let mut previous = 0.0;
        let mut last_step = 0.0;
        for _ in 0..2000 {
            adam.step(&mut params, &[0.3]).unwrap();
            last_step = (params[0] - previous).abs();
            previous = params[0];
        }
        assert!((last_step - DEFAULT_LEARNING_RATE).abs() < 0.01 * DEFAULT_LEARNING_RATE);
    }

    #[test]
    fn adam_rejects_bad_input() {
        let mut adam = AdamState::new(2, 0.001);
        let mut params = vec![0.0, 0.0];
        assert!(adam.step(&mut params, &[1.0]).is_err());
        assert!(adam.step(&mut params, &[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn cross_entropy_values() {
        assert!(cross_entropy(1.0, 1) < 1e-11);
        assert!((cross_entropy(0.5, 1) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((cross_entropy(0.5, 0) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(cross_entropy(0.0, 1).is_finite());
        assert!(cross_entropy(1.0, 0).is_finite());
        for &(p, y) in &[(0.1, 0u8), (0.9, 1), (0.3, 1), (0.999, 0)] {
            assert!(cross_entropy(p, y) >= 0.0);
        }
    }

    #[test]
    fn predict_endpoints() {
        let template = CircuitTemplate::new(2, vec![]).unwrap();
        let params = ParameterVector::zeros(0);
        let obs = Observable::zz(0, 1).unwrap();

        let plus = StateVector::zero_state(2); // <ZZ> = +1
        assert_eq!(qnn_predict(&template, &params, &plus, &obs).unwrap(), 1.0);

        let minus = StateVector::from_amplitudes(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap(); // <ZZ> = -1
        assert_eq!(qnn_predict(&template, &params, &minus, &obs).unwrap(), 0.0);

        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let balanced = StateVector::from_amplitudes(vec![
            Complex64::new(inv, 0.0),
            Complex64::new(inv, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap(); // <ZZ> = 0
        assert!((qnn_predict(&template, &params, &balanced, &obs).unwrap() - 0.5).abs() < 1e-12);
    }

    fn basis_example(n: usize, index: usize, label: u8) -> EncodedExample {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        EncodedExample {
            state: StateVector::from_amplitudes(amps).unwrap(),
            label,
        }
    }

    #[test]
    fn classifier_learns_separable_toy_set() {
        // basis-state encodings where ZZ separates the classes exactly
        let dataset = vec![
            basis_example(2, 0b00, 1),
            basis_example(2, 0b11, 1),
            basis_example(2, 0b01, 0),
            basis_example(2, 0b10, 0),
        ];
        let (template, params) =
            build_identity_block(2, &IdentityBlockPlan::new(1, 2, 3)).unwrap();
        let mut config = TrainConfig::classifier(7);
        config.iterations = 500;
        config.accuracy_every = 50;
        let records = qnn_train(&template, &params, &dataset, &config).unwrap();
        let final_accuracy = records.last().unwrap().accuracy.unwrap();
        assert_eq!(final_accuracy, 1.0);
    }

    #[test]
    fn classifier_training_is_deterministic() {
        let dataset = vec![
            basis_example(2, 0b00, 1),
            basis_example(2, 0b01, 0),
        ];
        let (template, params) =
            build_identity_block(2, &IdentityBlockPlan::new(1, 1, 5)).unwrap();
        let mut config = TrainConfig::classifier(11);
        config.iterations = 50;
        let a = qnn_train(&template, &params, &dataset, &config).unwrap();
        let b = qnn_train(&template, &params, &dataset, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn classifier_identity_init_has_nonzero_first_gradient() {
        let dataset = vec![
            basis_example(3, 0b000, 1),
            basis_example(3, 0b101, 0),
            basis_example(3, 0b011, 0),
        ];
        let (template, params) =
            build_identity_block(3, &IdentityBlockPlan::new(1, 3, 19)).unwrap();
        let mut config = TrainConfig::classifier(2);
        config.iterations = 1;
        config.snapshot_every = 1;
        let records = qnn_train(&template, &params, &dataset, &config).unwrap();
        let snapshot = records[0].grad_snapshot.as_ref().unwrap();
        assert!(snapshot.iter().any(|g| g.abs() > 1e-6));
    }

    #[test]
    fn vqe_reaches_product_ground_state() {
        // J = 0, h = 1: the ground state is |1...1> with energy -n
        let n = 3;
        let problem = VqeProblem {
            n_qubits: n,
            coupling: 0.0,
            field: 1.0,
            periodic: true,
        };
        let obs = heisenberg_hamiltonian(&problem).unwrap();
        let gates = (0..n)
            .map(|q| GateSpec::Rotation {
                axis: RotationAxis::X,
                target: q,
                slot: q,
            })
            .collect();
        let template = CircuitTemplate::new(n, gates).unwrap();
        let params0 = ParameterVector::new(vec![0.3; n]);

        let mut config = TrainConfig::vqe(0);
        config.iterations = 3000;
        config.window = 0;
        let records = vqe_train(&template, &params0, &obs, &config).unwrap();
        let final_energy = records.last().unwrap().objective;
        assert!(
            (final_energy + n as f64).abs() < 1e-3,
            "final energy {final_energy}"
        );

        let e0 = exact_ground_energy(&obs, n).unwrap();
        for record in &records {
            assert!(record.objective >= e0 - 1e-9);
        }
    }

    #[test]
    fn vqe_early_stop_honors_window() {
        // constant observable: zero gradient, energy never improves
        let template = CircuitTemplate::new(
            2,
            vec![GateSpec::Rotation {
                axis: RotationAxis::X,
                target: 0,
                slot: 0,
            }],
        )
        .unwrap();
        let obs = Observable::identity(1.0);
        let mut config = TrainConfig::vqe(0);
        config.iterations = 5000;
        config.window = 50;
        let records = vqe_train(&template, &ParameterVector::zeros(1), &obs, &config).unwrap();
        assert_eq!(records.len(), 51);
    }

    #[test]
    fn vqe_frozen_prefix_never_moves() {
        let n = 3;
        let (entangler, e_params) = crate::ansatz::build_entangler(n, 1, 2).unwrap();
        let (blocks, b_params) =
            build_identity_block(n, &IdentityBlockPlan::new(1, 1, 3)).unwrap();
        let template = CircuitTemplate::compose(&entangler, &blocks).unwrap();
        let mut values = e_params.values().to_vec();
        values.extend_from_slice(b_params.values());

        let obs = heisenberg_hamiltonian(&VqeProblem::heisenberg_ring(n)).unwrap();
        let mut config = TrainConfig::vqe(0);
        config.iterations = 40;
        config.window = 0;
        config.snapshot_every = 1;
        let records = vqe_train(
            &template,
            &ParameterVector::new(values.clone()),
            &obs,
            &config,
        )
        .unwrap();
        for record in &records {
            let snapshot = record.grad_snapshot.as_ref().unwrap();
            assert!(snapshot[..entangler.n_params()].iter().all(|g| *g == 0.0));
        }
    }
}
