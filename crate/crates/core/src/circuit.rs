//! Circuit templates: gate sequences with parameter slots.
//!
//! A template is a flat, ordered gate list. Gates are applied to the state
//! in list order. Rotation gates reference parameter slots; each slot is
//! referenced by exactly one rotation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Rotation generator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

impl RotationAxis {
    pub fn name(self) -> &'static str {
        match self {
            RotationAxis::X => "X",
            RotationAxis::Y => "Y",
            RotationAxis::Z => "Z",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "X" => Some(RotationAxis::X),
            "Y" => Some(RotationAxis::Y),
            "Z" => Some(RotationAxis::Z),
            _ => None,
        }
    }
}

/// One gate in a template.
///
/// Rotations use the full-Pauli convention `U(theta) = exp(-i theta V)`,
/// with `V` the Pauli matrix on the target qubit (no half-angle factor).
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Rotation {
        axis: RotationAxis,
        target: usize,
        slot: usize,
    },
    ControlledZ {
        control: usize,
        target: usize,
    },
    FixedSingleQubit {
        /// Row-major 2x2 unitary.
        matrix: [Complex64; 4],
        target: usize,
    },
}

/// Which half of an identity block a slot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockHalf {
    First,
    Second,
}

/// Role of a parameter slot inside a structured circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRole {
    /// Slot belongs to a fixed entangling prefix and is never trained.
    Entangler,
    /// Slot belongs to an identity block. Indices are zero-based.
    Block {
        block: usize,
        half: BlockHalf,
        layer: usize,
    },
}

/// Real parameter vector, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, slot: usize) -> Result<f64> {
        self.values
            .get(slot)
            .copied()
            .ok_or(Error::MissingSlot {
                slot,
                n_params: self.values.len(),
            })
    }

    pub fn set(&mut self, slot: usize, value: f64) {
        self.values[slot] = value;
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// Ordered gate sequence with parameter slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTemplate {
    n_qubits: usize,
    gates: Vec<GateSpec>,
    n_params: usize,
    /// Slots `0..frozen_prefix` are fixed at their initial values and never
    /// updated by a trainer.
    frozen_prefix: usize,
    block_map: Option<Vec<SlotRole>>,
}

impl CircuitTemplate {
    /// Validate and build a template. Slots referenced by rotations must be
    /// exactly `0..n` with each slot used once.
    pub fn new(n_qubits: usize, gates: Vec<GateSpec>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidSize {
                what: "n_qubits",
                value: 0,
            });
        }
        let mut slots = Vec::new();
        for gate in &gates {
            match gate {
                GateSpec::Rotation { target, slot, .. } => {
                    Self::check_qubit(*target, n_qubits)?;
                    slots.push(*slot);
                }
                GateSpec::ControlledZ { control, target } => {
                    Self::check_qubit(*control, n_qubits)?;
                    Self::check_qubit(*target, n_qubits)?;
                    if control == target {
                        return Err(Error::ControlEqualsTarget { qubit: *control });
                    }
                }
                GateSpec::FixedSingleQubit { target, .. } => {
                    Self::check_qubit(*target, n_qubits)?;
                }
            }
        }
        let n_params = slots.len();
        let mut seen = vec![false; n_params];
        for slot in slots {
            if slot >= n_params || seen[slot] {
                return Err(Error::SlotCoverage);
            }
            seen[slot] = true;
        }
        Ok(Self {
            n_qubits,
            gates,
            n_params,
            frozen_prefix: 0,
            block_map: None,
        })
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

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Number of leading slots that are fixed (non-trainable).
    pub fn frozen_prefix(&self) -> usize {
        self.frozen_prefix
    }

    pub fn set_frozen_prefix(&mut self, n: usize) -> Result<()> {
        if n > self.n_params {
            return Err(Error::MissingSlot {
                slot: n,
                n_params: self.n_params,
            });
        }
        self.frozen_prefix = n;
        Ok(())
    }

    pub fn is_trainable_slot(&self, slot: usize) -> bool {
        slot >= self.frozen_prefix
    }

    pub fn block_map(&self) -> Option<&[SlotRole]> {
        self.block_map.as_deref()
    }

    pub fn set_block_map(&mut self, map: Vec<SlotRole>) -> Result<()> {
        if map.len() != self.n_params {
            return Err(Error::ParameterCount {
                expected: self.n_params,
                found: map.len(),
            });
        }
        self.block_map = Some(map);
        Ok(())
    }

    /// Axis and target of the rotation bound to `slot`.
    pub fn rotation_for_slot(&self, slot: usize) -> Result<(RotationAxis, usize)> {
        for gate in &self.gates {
            if let GateSpec::Rotation {
                axis,
                target,
                slot: s,
            } = gate
            {
                if *s == slot {
                    return Ok((*axis, *target));
                }
            }
        }
        if slot >= self.n_params {
            Err(Error::MissingSlot {
                slot,
                n_params: self.n_params,
            })
        } else {
            Err(Error::SlotNotRotation { slot })
        }
    }

    /// Concatenate two templates: `first` is applied to the state before
    /// `second`. Slots of `second` are shifted by `first.n_params`.
    ///
    /// Frozen slots must remain a prefix of the result, so `first` has to be
    /// either fully frozen or frozen-free with a frozen-free `second`.
    pub fn compose(first: &CircuitTemplate, second: &CircuitTemplate) -> Result<CircuitTemplate> {
        if first.n_qubits != second.n_qubits {
            return Err(Error::Compose {
                reason: "qubit counts differ",
            });
        }
        let fully_frozen_first = first.frozen_prefix == first.n_params;
        if !fully_frozen_first && first.frozen_prefix != 0 {
            return Err(Error::Compose {
                reason: "first template is partially frozen",
            });
        }
        if !fully_frozen_first && second.frozen_prefix != 0 {
            return Err(Error::Compose {
                reason: "frozen slots would not form a prefix",
            });
        }
        let shift = first.n_params;
        let mut gates = first.gates.clone();
        gates.extend(second.gates.iter().map(|g| match g {
            GateSpec::Rotation { axis, target, slot } => GateSpec::Rotation {
                axis: *axis,
                target: *target,
                slot: slot + shift,
            },
            other => other.clone(),
        }));
        let block_map = match (&first.block_map, &second.block_map) {
            (Some(a), Some(b)) => Some(a.iter().chain(b.iter()).copied().collect()),
            (None, Some(b)) if fully_frozen_first => Some(
                std::iter::repeat(SlotRole::Entangler)
                    .take(first.n_params)
                    .chain(b.iter().copied())
                    .collect(),
            ),
            _ => None,
        };
        Ok(CircuitTemplate {
            n_qubits: first.n_qubits,
            gates,
            n_params: first.n_params + second.n_params,
            frozen_prefix: if fully_frozen_first {
                first.n_params + second.frozen_prefix
            } else {
                0
            },
            block_map,
        })
    }

    /// Serialize to the line-based text format:
    ///
    /// ```text
    /// QUBITS 2 PARAMS 2
    /// ROT X 0 0
    /// ROT Y 1 1
    /// CZ 0 1
    /// ```
    ///
    /// Fixed single-qubit gates are emitted as `FIXED target` followed by
    /// eight floats (row-major 2x2, re/im interleaved). Block structure and
    /// frozen-slot markers are not part of the format.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {} PARAMS {}\n", self.n_qubits, self.n_params);
        for gate in &self.gates {
            match gate {
                GateSpec::Rotation { axis, target, slot } => {
                    out.push_str(&format!("ROT {} {} {}\n", axis.name(), target, slot));
                }
                GateSpec::ControlledZ { control, target } => {
                    out.push_str(&format!("CZ {} {}\n", control, target));
                }
                GateSpec::FixedSingleQubit { matrix, target } => {
                    out.push_str(&format!("FIXED {}", target));
                    for entry in matrix {
                        out.push_str(&format!(" {:.17e} {:.17e}", entry.re, entry.im));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (line_no, header) = lines.next().ok_or(Error::TemplateParse {
            line: 0,
            message: "empty input".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "QUBITS" || parts[2] != "PARAMS" {
            return Err(Error::TemplateParse {
                line: line_no + 1,
                message: "expected header `QUBITS n PARAMS p`".into(),
            });
        }
        let n_qubits: usize = parse_field(parts[1], line_no)?;
        let n_params: usize = parse_field(parts[3], line_no)?;

        let mut gates = Vec::new();
        for (line_no, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let gate = match parts.as_slice() {
                ["ROT", axis, target, slot] => GateSpec::Rotation {
                    axis: RotationAxis::from_name(axis).ok_or(Error::TemplateParse {
                        line: line_no + 1,
                        message: format!("unknown axis `{axis}`"),
                    })?,
                    target: parse_field(target, line_no)?,
                    slot: parse_field(slot, line_no)?,
                },
                ["CZ", control, target] => GateSpec::ControlledZ {
                    control: parse_field(control, line_no)?,
                    target: parse_field(target, line_no)?,
                },
                ["FIXED", target, rest @ ..] if rest.len() == 8 => {
                    let mut vals = [0.0f64; 8];
                    for (v, s) in vals.iter_mut().zip(rest) {
                        *v = s.parse().map_err(|_| Error::TemplateParse {
                            line: line_no + 1,
                            message: format!("bad float `{s}`"),
                        })?;
                    }
                    GateSpec::FixedSingleQubit {
                        matrix: [
                            Complex64::new(vals[0], vals[1]),
                            Complex64::new(vals[2], vals[3]),
                            Complex64::new(vals[4], vals[5]),
                            Complex64::new(vals[6], vals[7]),
                        ],
                        target: parse_field(target, line_no)?,
                    }
                }
                _ => {
                    return Err(Error::TemplateParse {
                        line: line_no + 1,
                        message: format!("unrecognized line `{line}`"),
                    })
                }
            };
            gates.push(gate);
        }
        let template = Self::new(n_qubits, gates)?;
        if template.n_params != n_params {
            return Err(Error::ParameterCount {
                expected: n_params,
                found: template.n_params,
            });
        }
        Ok(template)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line_no: usize) -> Result<T> {
    s.parse().map_err(|_| Error::TemplateParse {
        line: line_no + 1,
        message: format!("bad field `{s}`"),
    })
}
