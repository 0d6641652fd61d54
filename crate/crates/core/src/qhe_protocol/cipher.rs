use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::LogicalGateKind;
use super::key::PermutationKey;
use crate::css_code::CssCode;
use crate::error::{Error, Result};
use crate::state_sim::{DensityMatrix, GateKind, GateOp, PureState, QuantumRegister, Slot};

/// Upper bound constant `c` in `swap_count <= c·(r+1)·n·m` for decryption.
pub const DECRYPT_SWAP_CONSTANT: usize = 2;

/// Physical positions of one encrypted logical qubit, group-major:
/// `positions[g * group_size + s]` is slot `s` of group `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherBlock {
    pub block_id: u64,
    pub group_size: usize,
    pub group_count: usize,
    pub positions: Vec<usize>,
}

impl CipherBlock {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, group: usize, slot: usize) -> usize {
        self.positions[group * self.group_size + slot]
    }
}

/// A register holding one or more encrypted blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ciphertext {
    pub register: QuantumRegister,
    pub blocks: Vec<CipherBlock>,
}

impl Ciphertext {
    pub fn empty() -> Self {
        Ciphertext {
            register: QuantumRegister::empty(),
            blocks: Vec::new(),
        }
    }

    /// Tensors `other` into this ciphertext, shifting its block positions.
    pub fn append(&mut self, other: &Ciphertext) -> Vec<u64> {
        let offset = self.register.append(&other.register);
        other
            .blocks
            .iter()
            .map(|b| {
                self.blocks.push(CipherBlock {
                    positions: b.positions.iter().map(|p| p + offset).collect(),
                    ..b.clone()
                });
                b.block_id
            })
            .collect()
    }

    pub fn block(&self, block_id: u64) -> Result<&CipherBlock> {
        self.blocks
            .iter()
            .find(|b| b.block_id == block_id)
            .ok_or_else(|| Error::contract(format!("no block with id {block_id}")))
    }

    /// Keeps only the listed blocks, in the given order.
    pub fn select(&self, block_ids: &[u64]) -> Result<Ciphertext> {
        let blocks = block_ids
            .iter()
            .map(|&id| self.block(id).cloned())
            .collect::<Result<Vec<_>>>()?;
        Ok(Ciphertext {
            register: self.register.clone(),
            blocks,
        })
    }
}

/// Encodes a single-qubit message and hides each code qubit among `2m − 1`
/// maximally mixed qubits at the slot the key assigns.
pub fn encrypt(key: &PermutationKey, code: &CssCode, message: &PureState, block_id: u64) -> Result<Ciphertext> {
    if code.k() != 1 {
        return Err(Error::Unsupported(
            "codes with k > 1 need a nontrivial inner permutation".into(),
        ));
    }
    if message.num_qubits() != 1 {
        return Err(Error::contract("messages are single qubits"));
    }
    if key.n() != code.n() {
        return Err(Error::contract(format!(
            "key covers {} groups, code has n = {}",
            key.n(),
            code.n()
        )));
    }
    let n = code.n();
    let padded = if n == 1 {
        message.clone()
    } else {
        message.tensor(&PureState::basis(n - 1, 0))
    };
    let mut encoded = QuantumRegister::from_pure(&padded);
    let mut rng = crate::rng::seeded(0);
    for g in code.encoding_circuit() {
        encoded.apply_gate(g, &mut rng)?;
    }
    let encoded = PureState::from_amplitudes(encoded.amplitudes().to_vec())?;

    let group = key.group_size();
    let mut label = 0u64;
    let layout = (0..n * group)
        .map(|pos| {
            let (g, s) = (pos / group, pos % group);
            if s == key.slots()[g] {
                Slot::Dense(g)
            } else {
                label += 1;
                Slot::Mms(label - 1)
            }
        })
        .collect();
    let register = QuantumRegister::init(&[encoded], n * group - n, layout)?;
    Ok(Ciphertext {
        register,
        blocks: vec![CipherBlock {
            block_id,
            group_size: group,
            group_count: n,
            positions: (0..n * group).collect(),
        }],
    })
}

#[derive(Clone, Debug)]
pub struct Decryption {
    /// Joint state of the decrypted logical qubits; block `i` is qubit `i`.
    pub state: DensityMatrix,
    pub swap_count: usize,
}

/// Decrypts one block.
pub fn decrypt(key: &PermutationKey, code: &CssCode, ct: &Ciphertext, block_id: u64) -> Result<Decryption> {
    decrypt_blocks(key, code, ct, &[block_id])
}

/// Decrypts several blocks of one register jointly.
///
/// Each code qubit is moved to slot 0 of its group by adjacent swaps (counted),
/// the encoder is undone on those positions and every other position is traced
/// out.
pub fn decrypt_blocks(key: &PermutationKey, code: &CssCode, ct: &Ciphertext, block_ids: &[u64]) -> Result<Decryption> {
    let mut register = ct.register.clone();
    let mut rng = crate::rng::seeded(0);
    let mut swap_count = 0;
    let mut message_positions = Vec::with_capacity(block_ids.len());
    for &id in block_ids {
        let block = ct.block(id)?;
        check_layout(key, block, &register)?;
        for g in 0..block.group_count {
            for s in (1..=key.slots()[g]).rev() {
                register.apply_gate(&GateOp::swap(block.position(g, s), block.position(g, s - 1)), &mut rng)?;
                swap_count += 1;
            }
        }
        for gate in code.encoding_circuit().iter().rev() {
            register.apply_gate(&gate.inverse().remap(|q| block.position(q, 0)), &mut rng)?;
        }
        message_positions.push(block.position(0, 0));
    }
    Ok(Decryption {
        state: register.densify(&message_positions)?,
        swap_count,
    })
}

/// Code positions must hold data and every other position must be symbolic.
fn check_layout(key: &PermutationKey, block: &CipherBlock, register: &QuantumRegister) -> Result<()> {
    if block.group_size != key.group_size() || block.group_count != key.n() {
        return Err(Error::protocol(format!(
            "block {} shape {}x{} does not match key {}x{}",
            block.block_id,
            block.group_count,
            block.group_size,
            key.n(),
            key.group_size()
        )));
    }
    for g in 0..block.group_count {
        for s in 0..block.group_size {
            let slot = register.slot(block.position(g, s))?;
            let is_code = s == key.slots()[g];
            let ok = match slot {
                Slot::Dense(_) => is_code,
                Slot::Mms(_) => !is_code,
                Slot::Measured(_) | Slot::Consumed => false,
            };
            if !ok {
                return Err(Error::protocol(format!(
                    "key does not match block {} at group {g}",
                    block.block_id
                )));
            }
        }
    }
    Ok(())
}

/// Applies a transversal logical gate: the same physical gate on every
/// position of the block(s). `S` uses the code's logical-S phase gate. `CNOT`
/// pairs position `j` of the first block (control) with position `j` of the
/// second, which only acts logically when both share one key.
pub fn apply_transversal<R: Rng + ?Sized>(
    ct: &mut Ciphertext,
    code: &CssCode,
    gate: LogicalGateKind,
    block_ids: &[u64],
    rng: &mut R,
) -> Result<()> {
    let single = |kind: GateKind, ct: &mut Ciphertext, rng: &mut R| -> Result<()> {
        let [id] = block_ids else {
            return Err(Error::contract(format!("{gate:?} acts on exactly one block")));
        };
        let positions = ct.block(*id)?.positions.clone();
        for p in positions {
            ct.register.apply_gate(&GateOp::single(kind, p), rng)?;
        }
        Ok(())
    };
    match gate {
        LogicalGateKind::X => single(GateKind::X, ct, rng),
        LogicalGateKind::Z => single(GateKind::Z, ct, rng),
        LogicalGateKind::H => single(GateKind::H, ct, rng),
        LogicalGateKind::S => single(code.logical_s_gate(), ct, rng),
        LogicalGateKind::T => Err(Error::contract("T is not transversal; use a teleportation round")),
        LogicalGateKind::Cnot => {
            let [a, b] = block_ids else {
                return Err(Error::contract("CNOT acts on exactly two blocks"));
            };
            let (ca, cb) = (ct.block(*a)?.clone(), ct.block(*b)?.clone());
            if ca.len() != cb.len() {
                return Err(Error::protocol("CNOT blocks differ in size"));
            }
            for (&pa, &pb) in ca.positions.iter().zip(&cb.positions) {
                let data_a = matches!(ct.register.slot(pa)?, Slot::Dense(_));
                let data_b = matches!(ct.register.slot(pb)?, Slot::Dense(_));
                if data_a != data_b {
                    return Err(Error::protocol(
                        "CNOT pairs a code qubit with padding; blocks use different keys",
                    ));
                }
            }
            for (&pa, &pb) in ca.positions.iter().zip(&cb.positions) {
                ct.register.apply_gate(&GateOp::cnot(pa, pb), rng)?;
            }
            Ok(())
        }
    }
}
