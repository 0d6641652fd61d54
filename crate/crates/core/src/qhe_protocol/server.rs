use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::channel::Channel;
use super::cipher::{apply_transversal, Ciphertext};
use super::circuit::{LogicalCircuit, LogicalGateKind};
use super::message::{BitString, ClassicalMessage, OpString, PhysicalOp};
use crate::css_code::{CssCode, Pauli};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::state_sim::{GateKind, GateOp};

/// When the server runs syndrome extraction and how much noise it simulates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerConfig {
    /// One extraction round per data block right after the inputs arrive.
    pub correct_after_transmission: bool,
    /// Additionally run a round on every data block after every `k` gates.
    pub syndrome_interval: Option<usize>,
    /// Depolarizing probability applied to every input position on arrival.
    pub transmission_noise: f64,
    /// Depolarizing probability applied to every touched position after each
    /// transversal gate.
    pub gate_noise: f64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            correct_after_transmission: true,
            syndrome_interval: None,
            transmission_noise: 0.0,
            gate_noise: 0.0,
        }
    }
}

impl ServerConfig {
    /// Syndrome rounds each wire will go through for a circuit of `gates` gates.
    pub fn rounds_per_wire(&self, gates: usize) -> usize {
        usize::from(self.correct_after_transmission) + self.syndrome_interval.filter(|&k| k > 0).map_or(0, |k| gates / k)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvaluationSummary {
    pub t_count: usize,
    pub transversal_gates: usize,
    pub syndrome_rounds: usize,
}

/// Untrusted evaluator. Holds ciphertexts, never the key.
pub struct Server {
    code: CssCode,
    config: ServerConfig,
    memory: Ciphertext,
    data: Vec<u64>,
    pool: HashMap<u64, Ciphertext>,
    magic: VecDeque<u64>,
    zeros: VecDeque<u64>,
    pluses: VecDeque<u64>,
    rng: SimRng,
    noise_rng: SimRng,
    noise_log: Vec<(usize, Pauli)>,
}

impl Server {
    pub fn new(code: CssCode, config: ServerConfig, rng: SimRng, noise_rng: SimRng) -> Self {
        Server {
            code,
            config,
            memory: Ciphertext::empty(),
            data: Vec::new(),
            pool: HashMap::new(),
            magic: VecDeque::new(),
            zeros: VecDeque::new(),
            pluses: VecDeque::new(),
            rng,
            noise_rng,
            noise_log: Vec::new(),
        }
    }

    pub fn memory(&self) -> &Ciphertext {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut Ciphertext {
        &mut self.memory
    }

    pub fn data_blocks(&self) -> &[u64] {
        &self.data
    }

    /// Non-identity Paulis sampled by the noise model, with their positions.
    pub fn noise_log(&self) -> &[(usize, Pauli)] {
        &self.noise_log
    }

    /// Adds data blocks to working memory; returns their ids in order.
    pub fn load_data(&mut self, ciphertexts: &[Ciphertext]) -> Vec<u64> {
        let mut ids = Vec::new();
        for ct in ciphertexts {
            ids.extend(self.memory.append(ct));
        }
        self.data.extend(&ids);
        ids
    }

    /// Stocks ancilla pools. Blocks stay outside working memory until used.
    pub fn stock_ancillas(&mut self, magic: Vec<Ciphertext>, zeros: Vec<Ciphertext>, pluses: Vec<Ciphertext>) -> Result<()> {
        for (list, queue) in [(magic, &mut self.magic), (zeros, &mut self.zeros), (pluses, &mut self.pluses)] {
            for ct in list {
                let [block] = ct.blocks.as_slice() else {
                    return Err(Error::protocol("each ancilla register must hold one block"));
                };
                queue.push_back(block.block_id);
                self.pool.insert(block.block_id, ct);
            }
        }
        Ok(())
    }

    fn take_ancilla(&mut self, kind: Ancilla) -> Result<u64> {
        let queue = match kind {
            Ancilla::Magic => &mut self.magic,
            Ancilla::Zero => &mut self.zeros,
            Ancilla::Plus => &mut self.pluses,
        };
        let id = queue
            .pop_front()
            .ok_or_else(|| Error::contract(format!("{kind:?} ancilla pool exhausted")))?;
        let ct = self.pool.remove(&id).expect("queued ancilla is pooled");
        self.memory.append(&ct);
        Ok(id)
    }

    /// Measures every position of a block and drops the block from memory.
    fn measure_block(&mut self, id: u64) -> Result<Vec<u8>> {
        let positions = self.memory.block(id)?.positions.clone();
        let bits = self.memory.register.measure_z_all(&positions, &mut self.rng)?;
        self.memory.blocks.retain(|b| b.block_id != id);
        Ok(bits)
    }

    /// Depolarizes every position of the listed blocks.
    pub fn depolarize_blocks(&mut self, ids: &[u64], p: f64) -> Result<()> {
        if p == 0.0 {
            return Ok(());
        }
        for &id in ids {
            for pos in self.memory.block(id)?.positions.clone() {
                let pauli = self.memory.register.apply_depolarizing(pos, p, &mut self.noise_rng)?;
                if pauli != Pauli::I {
                    self.noise_log.push((pos, pauli));
                }
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: LogicalGateKind, ids: &[u64]) -> Result<()> {
        apply_transversal(&mut self.memory, &self.code, gate, ids, &mut self.rng)?;
        self.depolarize_blocks(ids, self.config.gate_noise)
    }

    /// Applies a client instruction positionwise on a data block.
    fn apply_instruction(&mut self, id: u64, ops: &OpString, allowed: &[PhysicalOp]) -> Result<()> {
        let positions = self.memory.block(id)?.positions.clone();
        if ops.len() != positions.len() {
            return Err(Error::protocol(format!(
                "instruction has {} ops for {} positions",
                ops.len(),
                positions.len()
            )));
        }
        for (&pos, &op) in positions.iter().zip(&ops.0) {
            if !allowed.contains(&op) {
                return Err(Error::protocol(format!("op {} not allowed here", op.as_char())));
            }
            let kind = match op {
                PhysicalOp::I => continue,
                PhysicalOp::S => self.code.logical_s_gate(),
                PhysicalOp::X => GateKind::X,
                PhysicalOp::Z => GateKind::Z,
            };
            self.memory.register.apply_gate(&GateOp::single(kind, pos), &mut self.rng)?;
        }
        Ok(())
    }

    fn expect_instruction<C: Channel + ?Sized>(&mut self, channel: &mut C, id: u64) -> Result<OpString> {
        match channel.recv()? {
            ClassicalMessage::CorrectionInstruction { block_id, ops } if block_id == id => Ok(ops),
            ClassicalMessage::CorrectionInstruction { block_id, .. } => Err(Error::protocol(format!(
                "instruction for block {block_id}, expected {id}"
            ))),
            other => Err(Error::protocol(format!(
                "expected correction_instruction, got {}",
                other.kind()
            ))),
        }
    }

    /// Teleports a T gate onto `data` using the next magic block.
    pub fn t_gate_round<C: Channel + ?Sized>(&mut self, data: u64, channel: &mut C) -> Result<()> {
        let magic = self.take_ancilla(Ancilla::Magic)?;
        apply_transversal(&mut self.memory, &self.code, LogicalGateKind::Cnot, &[data, magic], &mut self.rng)?;
        let bits = self.measure_block(magic)?;
        channel.send(ClassicalMessage::MeasurementReport {
            block_id: data,
            bits: BitString(bits),
        })?;
        let ops = self.expect_instruction(channel, data)?;
        self.apply_instruction(data, &ops, &[PhysicalOp::I, PhysicalOp::S])
    }

    /// Extracts both syndromes of `data` with one logical-plus and one
    /// logical-zero block, then applies the client's X and Z corrections.
    pub fn syndrome_extraction_round<C: Channel + ?Sized>(&mut self, data: u64, channel: &mut C) -> Result<()> {
        let plus = self.take_ancilla(Ancilla::Plus)?;
        apply_transversal(&mut self.memory, &self.code, LogicalGateKind::Cnot, &[data, plus], &mut self.rng)?;
        let x_bits = self.measure_block(plus)?;

        let zero = self.take_ancilla(Ancilla::Zero)?;
        apply_transversal(&mut self.memory, &self.code, LogicalGateKind::Cnot, &[zero, data], &mut self.rng)?;
        apply_transversal(&mut self.memory, &self.code, LogicalGateKind::H, &[zero], &mut self.rng)?;
        let z_bits = self.measure_block(zero)?;

        channel.send(ClassicalMessage::SyndromeReport {
            block_id: data,
            x_bits: BitString(x_bits),
            z_bits: BitString(z_bits),
        })?;
        let x_ops = self.expect_instruction(channel, data)?;
        self.apply_instruction(data, &x_ops, &[PhysicalOp::I, PhysicalOp::X])?;
        let z_ops = self.expect_instruction(channel, data)?;
        self.apply_instruction(data, &z_ops, &[PhysicalOp::I, PhysicalOp::Z])
    }

    /// Runs a whole session from the server side: receive inputs, announce
    /// ancilla needs, execute the circuit, return the outputs.
    pub fn evaluate<C: Channel + ?Sized>(&mut self, circuit: &LogicalCircuit, channel: &mut C) -> Result<EvaluationSummary> {
        let inputs = expect_transfer(channel)?;
        let data = self.load_data(&inputs);
        if data.len() != circuit.num_wires {
            return Err(Error::contract(format!(
                "circuit has {} wires, received {} inputs",
                circuit.num_wires,
                data.len()
            )));
        }
        self.depolarize_blocks(&data, self.config.transmission_noise)?;

        let r = circuit.t_count();
        let rounds = self.config.rounds_per_wire(circuit.gates.len()) * data.len();
        channel.send(ClassicalMessage::TGateCount {
            r,
            zero_count: rounds,
            plus_count: rounds,
        })?;
        let mut ancillas = expect_transfer(channel)?;
        if ancillas.len() != r + 2 * rounds {
            return Err(Error::protocol(format!(
                "expected {} ancilla registers, received {}",
                r + 2 * rounds,
                ancillas.len()
            )));
        }
        let pluses = ancillas.split_off(r + rounds);
        let zeros = ancillas.split_off(r);
        self.stock_ancillas(ancillas, zeros, pluses)?;

        let mut summary = EvaluationSummary {
            t_count: r,
            ..Default::default()
        };
        if self.config.correct_after_transmission {
            for &id in &data {
                self.syndrome_extraction_round(id, channel)?;
                summary.syndrome_rounds += 1;
            }
        }
        for (i, gate) in circuit.gates.iter().enumerate() {
            let ids: Vec<u64> = gate.wires.iter().map(|&w| data[w]).collect();
            if gate.gate == LogicalGateKind::T {
                self.t_gate_round(ids[0], channel)?;
            } else {
                self.apply_gate(gate.gate, &ids)?;
                summary.transversal_gates += 1;
            }
            if let Some(k) = self.config.syndrome_interval.filter(|&k| k > 0) {
                if (i + 1) % k == 0 {
                    for &id in &data {
                        self.syndrome_extraction_round(id, channel)?;
                        summary.syndrome_rounds += 1;
                    }
                }
            }
        }

        channel.send(ClassicalMessage::QuantumTransfer {
            ciphertexts: vec![self.memory.select(&data)?],
        })?;
        match channel.recv()? {
            ClassicalMessage::Ack => Ok(summary),
            other => Err(Error::protocol(format!("expected ack, got {}", other.kind()))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Ancilla {
    Magic,
    Zero,
    Plus,
}

fn expect_transfer<C: Channel + ?Sized>(channel: &mut C) -> Result<Vec<Ciphertext>> {
    match channel.recv()? {
        ClassicalMessage::QuantumTransfer { ciphertexts } => Ok(ciphertexts),
        other => Err(Error::protocol(format!("expected quantum_transfer, got {}", other.kind()))),
    }
}
