//! Circuit families used in the experiments.
//!
//! Three builders share one layer structure (a rotation on every qubit about
//! a randomly chosen axis, then a ladder of nearest-neighbor controlled-Z
//! gates on the open chain):
//!
//! * [`build_random_ansatz`] stacks `depth` such layers.
//! * [`build_identity_block`] stacks mirrored block pairs so the whole
//!   circuit evaluates to the identity at its initial parameters: each block
//!   is `L` layers followed by the same `L` layers reversed gate-by-gate,
//!   with the reversed rotations initialized to the negated angles. The
//!   second-half slots are independent trainable parameters after that.
//! * [`build_entangler`] is the same stack with its angles drawn and frozen,
//!   used as a fixed entangling prefix.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::circuit::{BlockHalf, CircuitTemplate, GateSpec, ParameterVector, RotationAxis, SlotRole};
use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Recipe for an identity-block initialized circuit: `blocks` blocks of
/// `2 * half_depth` layers each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityBlockPlan {
    pub blocks: usize,
    pub half_depth: usize,
    pub seed: u64,
}

impl IdentityBlockPlan {
    pub fn new(blocks: usize, half_depth: usize, seed: u64) -> Self {
        Self {
            blocks,
            half_depth,
            seed,
        }
    }

    /// Total layer count, `2 * half_depth * blocks`.
    pub fn total_layers(&self) -> usize {
        2 * self.half_depth * self.blocks
    }

    fn validate(&self) -> Result<()> {
        if self.blocks == 0 {
            return Err(Error::InvalidSize {
                what: "blocks",
                value: 0,
            });
        }
        if self.half_depth == 0 {
            return Err(Error::InvalidSize {
                what: "half_depth",
                value: 0,
            });
        }
        Ok(())
    }
}

fn random_axis(rng: &mut ChaCha8Rng) -> RotationAxis {
    match rng.gen_range(0..3u8) {
        0 => RotationAxis::X,
        1 => RotationAxis::Y,
        _ => RotationAxis::Z,
    }
}

/// Angles drawn uniformly from `[0, 2*pi)`.
pub fn random_params(n: usize, rng: &mut impl Rng) -> ParameterVector {
    ParameterVector::new((0..n).map(|_| rng.gen_range(0.0..TAU)).collect())
}

fn check_sizes(n_qubits: usize, depth: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(Error::InvalidSize {
            what: "n_qubits",
            value: n_qubits,
        });
    }
    if depth == 0 {
        return Err(Error::InvalidSize {
            what: "depth",
            value: 0,
        });
    }
    Ok(())
}

fn push_layer(gates: &mut Vec<GateSpec>, n_qubits: usize, slot: &mut usize, rng: &mut ChaCha8Rng) {
    for q in 0..n_qubits {
        gates.push(GateSpec::Rotation {
            axis: random_axis(rng),
            target: q,
            slot: *slot,
        });
        *slot += 1;
    }
    for q in 0..n_qubits - 1 {
        gates.push(GateSpec::ControlledZ {
            control: q,
            target: q + 1,
        });
    }
}

/// Hardware-efficient ansatz with random rotation axes, `n_qubits * depth`
/// parameter slots. Deterministic for a given seed.
pub fn build_random_ansatz(n_qubits: usize, depth: usize, seed: u64) -> Result<CircuitTemplate> {
    check_sizes(n_qubits, depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    let mut slot = 0;
    for _ in 0..depth {
        push_layer(&mut gates, n_qubits, &mut slot, &mut rng);
    }
    CircuitTemplate::new(n_qubits, gates)
}

/// Identity-block circuit and its initial parameters.
///
/// Every block contributes `half_depth` random layers followed by their
/// gate-by-gate mirror with fresh slots; the mirrored rotations start at the
/// negated angles, so each block (and hence the whole circuit) acts as the
/// identity at the returned parameter vector.
pub fn build_identity_block(
    n_qubits: usize,
    plan: &IdentityBlockPlan,
) -> Result<(CircuitTemplate, ParameterVector)> {
    check_sizes(n_qubits, 1)?;
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut gates: Vec<GateSpec> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut roles: Vec<SlotRole> = Vec::new();
    let mut slot = 0;

    for block in 0..plan.blocks {
        let half_start = gates.len();
        for layer in 0..plan.half_depth {
            let slot_start = slot;
            push_layer(&mut gates, n_qubits, &mut slot, &mut rng);
            for _ in slot_start..slot {
                values.push(rng.gen_range(0.0..TAU));
                roles.push(SlotRole::Block {
                    block,
                    half: BlockHalf::First,
                    layer,
                });
            }
        }
        let first_half: Vec<GateSpec> = gates[half_start..].to_vec();
        for gate in first_half.iter().rev() {
            match gate {
                GateSpec::Rotation {
                    axis,
                    target,
                    slot: mirrored,
                } => {
                    gates.push(GateSpec::Rotation {
                        axis: *axis,
                        target: *target,
                        slot,
                    });
                    values.push(-values[*mirrored]);
                    let layer = match roles[*mirrored] {
                        SlotRole::Block { layer, .. } => layer,
                        SlotRole::Entangler => unreachable!("first half has no entangler slots"),
                    };
                    roles.push(SlotRole::Block {
                        block,
                        half: BlockHalf::Second,
                        layer,
                    });
                    slot += 1;
                }
                GateSpec::ControlledZ { control, target } => {
                    gates.push(GateSpec::ControlledZ {
                        control: *control,
                        target: *target,
                    });
                }
                GateSpec::FixedSingleQubit { .. } => {
                    unreachable!("blocks contain no fixed gates")
                }
            }
        }
    }

    let mut template = CircuitTemplate::new(n_qubits, gates)?;
    template.set_block_map(roles)?;
    Ok((template, ParameterVector::new(values)))
}

/// Concatenation of a parameter half with its reversed, negated copy: the
/// init layout of one block, since the adjoint of `exp(-i theta V)` is the
/// same rotation at `-theta`.
pub fn mirror_params(theta_half: &[f64]) -> Vec<f64> {
    let mut out = theta_half.to_vec();
    out.extend(theta_half.iter().rev().map(|t| -t));
    out
}

/// Fixed entangling circuit: the random-ansatz structure with its angles
/// drawn once and frozen (the template comes back fully frozen).
pub fn build_entangler(
    n_qubits: usize,
    depth: usize,
    seed: u64,
) -> Result<(CircuitTemplate, ParameterVector)> {
    let mut template = build_random_ansatz(n_qubits, depth, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15));
    let params = random_params(template.n_params(), &mut rng);
    template.set_frozen_prefix(template.n_params())?;
    Ok((template, params))
}

/// Principal square root of the Hadamard gate,
/// `sqrt(H) = ((1+i) I + (1-i) H) / 2`, row-major.
pub fn sqrt_h_matrix() -> [Complex64; 4] {
    let p = Complex64::new(0.5, 0.5);
    let m = Complex64::new(0.5, -0.5) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [p + m, m, m, p - m]
}

/// The product state `sqrt(H)^(x n) |0...0>`.
pub fn input_sqrt_h(n_qubits: usize) -> StateVector {
    let mut state = StateVector::zero_state(n_qubits);
    let params = ParameterVector::zeros(0);
    let matrix = sqrt_h_matrix();
    for q in 0..n_qubits {
        state
            .apply_gate(&GateSpec::FixedSingleQubit { matrix, target: q }, &params)
            .expect("target in range");
    }
    state
}
