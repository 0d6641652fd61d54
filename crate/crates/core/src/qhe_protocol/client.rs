use rand::Rng;
use serde::Serialize;

use super::cipher::{decrypt_blocks, encrypt, Ciphertext, Decryption};
use super::key::{keygen, PermutationKey};
use super::message::{ClassicalMessage, OpString, PhysicalOp};
use crate::css_code::{decode_logical_z_readout, decode_syndrome, format_bits, CssCode, Syndrome};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::state_sim::PureState;

/// What a block of measurement bits is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    TGate,
    /// Bit-flip syndrome, checked against `h_z`.
    SyndromeX,
    /// Phase-flip syndrome, checked against `h_x`.
    SyndromeZ,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub ops: OpString,
    /// Logical readout for `TGate`; unused (0) for syndromes.
    pub logical_bit: u8,
    /// Syndrome of the extracted code bits.
    pub syndrome: Vec<u8>,
    /// Per code qubit: whether the correction acts there.
    pub correction: Vec<u8>,
}

/// Turns raw measurement bits on `2mn` positions into the next instruction.
///
/// Only the code positions selected by the key carry information. For a
/// T-gate readout the logical bit decides between identity and S on the code
/// positions, while every padding position gets an independent uniform I/S.
/// For syndromes the decoded Pauli is broadcast over whole groups.
pub fn client_interpret_and_correct<R: Rng + ?Sized>(
    key: &PermutationKey,
    code: &CssCode,
    bits: &[u8],
    purpose: Purpose,
    rng: &mut R,
) -> Result<Interpretation> {
    let group = key.group_size();
    let total = group * key.n();
    if bits.len() != total || key.n() != code.n() {
        return Err(Error::protocol(format!(
            "readout has {} bits, expected {total} for n = {}",
            bits.len(),
            code.n()
        )));
    }
    let code_bits: Vec<u8> = (0..key.n()).map(|g| bits[key.code_position(g)]).collect();
    match purpose {
        Purpose::TGate => {
            let (logical_bit, _) = decode_logical_z_readout(code, &code_bits)?;
            let syndrome = code.h_z().mul_vec(&code_bits)?;
            let ops = (0..total)
                .map(|pos| {
                    let (g, s) = (pos / group, pos % group);
                    if s == key.slots()[g] {
                        if logical_bit == 1 {
                            PhysicalOp::S
                        } else {
                            PhysicalOp::I
                        }
                    } else if rng.gen::<bool>() {
                        PhysicalOp::S
                    } else {
                        PhysicalOp::I
                    }
                })
                .collect();
            Ok(Interpretation {
                ops: OpString(ops),
                logical_bit,
                syndrome,
                correction: vec![u8::from(logical_bit == 1); code.n()],
            })
        }
        Purpose::SyndromeX | Purpose::SyndromeZ => {
            let (h, letter) = match purpose {
                Purpose::SyndromeX => (code.h_z(), PhysicalOp::X),
                _ => (code.h_x(), PhysicalOp::Z),
            };
            let syndrome = h.mul_vec(&code_bits)?;
            let correction = if purpose == Purpose::SyndromeX {
                let s = Syndrome {
                    x_bits: syndrome.clone(),
                    z_bits: vec![0; code.h_x().rows()],
                };
                decode_syndrome(code, &s)?.x_support()
            } else {
                let s = Syndrome {
                    x_bits: vec![0; code.h_z().rows()],
                    z_bits: syndrome.clone(),
                };
                decode_syndrome(code, &s)?.z_support()
            };
            let ops = (0..total)
                .map(|pos| if correction[pos / group] == 1 { letter } else { PhysicalOp::I })
                .collect();
            Ok(Interpretation {
                ops: OpString(ops),
                logical_bit: 0,
                syndrome,
                correction,
            })
        }
    }
}

/// One interactive decision the client made, for the evaluation transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum BranchEvent {
    TGate {
        block_id: u64,
        outcome: u8,
    },
    Syndrome {
        block_id: u64,
        x_syndrome: String,
        z_syndrome: String,
        x_correction: String,
        z_correction: String,
    },
}

/// Key holder. Prepares encrypted blocks, answers the server's reports and
/// decrypts the returned outputs.
pub struct Client {
    code: CssCode,
    key: PermutationKey,
    rng: SimRng,
    next_block_id: u64,
    outputs: Option<Ciphertext>,
    log: Vec<BranchEvent>,
}

impl Client {
    /// Draws a fresh key with group parameter `m`.
    pub fn new(code: CssCode, m: usize, mut rng: SimRng) -> Result<Self> {
        let key = keygen(m, code.n(), &mut rng)?;
        Client::with_key(code, key, rng)
    }

    pub fn with_key(code: CssCode, key: PermutationKey, rng: SimRng) -> Result<Self> {
        if key.n() != code.n() {
            return Err(Error::contract("key length does not match the code"));
        }
        Ok(Client {
            code,
            key,
            rng,
            next_block_id: 0,
            outputs: None,
            log: Vec::new(),
        })
    }

    pub fn key(&self) -> &PermutationKey {
        &self.key
    }

    pub fn code(&self) -> &CssCode {
        &self.code
    }

    pub fn branch_log(&self) -> &[BranchEvent] {
        &self.log
    }

    pub fn outputs(&self) -> Option<&Ciphertext> {
        self.outputs.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.outputs.is_some()
    }

    pub fn encrypt_state(&mut self, state: &PureState) -> Result<Ciphertext> {
        let id = self.next_block_id;
        self.next_block_id += 1;
        encrypt(&self.key, &self.code, state, id)
    }

    /// One ciphertext per input, block ids in input order.
    pub fn encrypt_inputs(&mut self, inputs: &[PureState]) -> Result<Vec<Ciphertext>> {
        inputs.iter().map(|s| self.encrypt_state(s)).collect()
    }

    /// Magic blocks, then logical-zero blocks, then logical-plus blocks.
    pub fn prepare_ancillas(&mut self, r: usize, zeros: usize, pluses: usize) -> Result<Vec<Ciphertext>> {
        let states = std::iter::repeat_n(PureState::magic(), r)
            .chain(std::iter::repeat_n(PureState::zero(), zeros))
            .chain(std::iter::repeat_n(PureState::plus(), pluses));
        states.map(|s| self.encrypt_state(&s)).collect()
    }

    pub fn decrypt_outputs(&self) -> Result<Decryption> {
        let outputs = self
            .outputs
            .as_ref()
            .ok_or_else(|| Error::contract("no outputs received yet"))?;
        let ids: Vec<u64> = outputs.blocks.iter().map(|b| b.block_id).collect();
        decrypt_blocks(&self.key, &self.code, outputs, &ids)
    }

    /// Reacts to one server message; returns the replies in order.
    pub fn handle(&mut self, msg: ClassicalMessage) -> Result<Vec<ClassicalMessage>> {
        match msg {
            ClassicalMessage::TGateCount {
                r,
                zero_count,
                plus_count,
            } => {
                let ciphertexts = self.prepare_ancillas(r, zero_count, plus_count)?;
                Ok(vec![ClassicalMessage::QuantumTransfer { ciphertexts }])
            }
            ClassicalMessage::MeasurementReport { block_id, bits } => {
                let it = client_interpret_and_correct(&self.key, &self.code, &bits.0, Purpose::TGate, &mut self.rng)?;
                self.log.push(BranchEvent::TGate {
                    block_id,
                    outcome: it.logical_bit,
                });
                Ok(vec![ClassicalMessage::CorrectionInstruction { block_id, ops: it.ops }])
            }
            ClassicalMessage::SyndromeReport {
                block_id,
                x_bits,
                z_bits,
            } => {
                let x = client_interpret_and_correct(&self.key, &self.code, &x_bits.0, Purpose::SyndromeX, &mut self.rng)?;
                let z = client_interpret_and_correct(&self.key, &self.code, &z_bits.0, Purpose::SyndromeZ, &mut self.rng)?;
                self.log.push(BranchEvent::Syndrome {
                    block_id,
                    x_syndrome: format_bits(&x.syndrome),
                    z_syndrome: format_bits(&z.syndrome),
                    x_correction: format_bits(&x.correction),
                    z_correction: format_bits(&z.correction),
                });
                Ok(vec![
                    ClassicalMessage::CorrectionInstruction { block_id, ops: x.ops },
                    ClassicalMessage::CorrectionInstruction { block_id, ops: z.ops },
                ])
            }
            ClassicalMessage::QuantumTransfer { mut ciphertexts } => {
                if ciphertexts.len() != 1 {
                    return Err(Error::protocol("expected a single output register"));
                }
                self.outputs = ciphertexts.pop();
                Ok(vec![ClassicalMessage::Ack])
            }
            other @ (ClassicalMessage::CorrectionInstruction { .. } | ClassicalMessage::Ack) => Err(Error::protocol(
                format!("client does not accept {}", other.kind()),
            )),
        }
    }
}
