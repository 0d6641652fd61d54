//! Quantum-state backend.
//!
//! A [`QuantumRegister`] keeps a dense state vector for the qubits that carry
//! data and represents every maximally mixed qubit symbolically. A symbolic
//! slot stores no amplitudes: `U (I/2) U† = I/2` for every unitary, so
//! single-qubit gates on it are no-ops. When a two-qubit gate couples a dense
//! qubit with a symbolic one, the symbolic slot is promoted to a dense qubit
//! in a uniformly sampled basis state, which is exact in expectation
//! (trajectory semantics).
//!
//! Ordering is little-endian: dense qubit `q` is bit `q` of the amplitude
//! index.

mod density;
mod gate;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use density::DensityMatrix;
pub use gate::{GateKind, GateOp};

use crate::css_code::{Pauli, PauliString};
use crate::error::{Error, Result};

/// Default cap on the number of positions [`QuantumRegister::densify`] accepts.
pub const DENSIFY_LIMIT: usize = 10;

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state on one or more qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 || !amplitudes.len().is_power_of_two() {
            return Err(Error::contract(format!(
                "state vector length {} is not a power of two >= 2",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::contract(format!("state is not normalized (norm² = {norm})")));
        }
        Ok(PureState { amplitudes })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn zero() -> Self {
        PureState::basis(1, 0)
    }

    pub fn one() -> Self {
        PureState::basis(1, 1)
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        }
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        }
    }

    /// `(|0⟩ + e^{iφ}|1⟩)/√2`.
    pub fn equator(phi: f64) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState {
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::from_polar(h, phi)],
        }
    }

    /// The magic state `T|+⟩`.
    pub fn magic() -> Self {
        PureState::equator(std::f64::consts::FRAC_PI_4)
    }

    /// Haar-random state from normalized complex Gaussians.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        let mut amplitudes: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        PureState { amplitudes }
    }

    /// Parses a single-qubit label: `0`, `1`, `+`, `-`, `+i`, `-i`, `T` (magic).
    pub fn from_label(label: &str) -> Result<Self> {
        use std::f64::consts::FRAC_PI_2;
        match label.trim() {
            "0" => Ok(PureState::zero()),
            "1" => Ok(PureState::one()),
            "+" => Ok(PureState::plus()),
            "-" => Ok(PureState::minus()),
            "+i" => Ok(PureState::equator(FRAC_PI_2)),
            "-i" => Ok(PureState::equator(-FRAC_PI_2)),
            "T" | "magic" => Ok(PureState::magic()),
            other => Err(Error::malformed(format!("unknown state label {other:?}"))),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for b in &other.amplitudes {
            for a in &self.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { amplitudes }
    }
}

impl TryFrom<Vec<Complex64>> for PureState {
    type Error = Error;

    fn try_from(v: Vec<Complex64>) -> Result<Self> {
        PureState::from_amplitudes(v)
    }
}

impl From<PureState> for Vec<Complex64> {
    fn from(s: PureState) -> Self {
        s.amplitudes
    }
}

/// What a physical position currently holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// Dense qubit with the given amplitude-bit index.
    Dense(usize),
    /// Symbolic maximally mixed qubit with a unique label.
    Mms(u64),
    /// A dense qubit after Z measurement; it stays in the recorded basis state.
    Measured(u8),
    /// An MMS slot that has been measured and removed.
    Consumed,
}

/// Register of physical positions backed by dense amplitudes plus symbolic
/// maximally mixed slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumRegister {
    num_dense: usize,
    amplitudes: Vec<Complex64>,
    layout: Vec<Slot>,
    next_label: u64,
}

impl Default for QuantumRegister {
    fn default() -> Self {
        QuantumRegister::empty()
    }
}

impl QuantumRegister {
    /// Zero positions, amplitude vector `[1]`.
    pub fn empty() -> Self {
        QuantumRegister {
            num_dense: 0,
            amplitudes: vec![Complex64::new(1.0, 0.0)],
            layout: Vec::new(),
            next_label: 0,
        }
    }

    /// Builds a register from dense blocks and `mms_count` symbolic slots.
    ///
    /// Blocks are tensored in order, the first on the lowest dense indices.
    /// `layout[pos]` must name every dense index `0..total` and every MMS
    /// label `0..mms_count` exactly once.
    pub fn init(dense_blocks: &[PureState], mms_count: usize, layout: Vec<Slot>) -> Result<Self> {
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        let mut num_dense = 0;
        for block in dense_blocks {
            let norm: f64 = block.amplitudes.iter().map(Complex64::norm_sqr).sum();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::contract("input state is not normalized"));
            }
            amplitudes = PureState { amplitudes }.tensor_raw(block);
            num_dense += block.num_qubits();
        }
        let mut dense_seen = vec![false; num_dense];
        let mut mms_seen = vec![false; mms_count];
        for (pos, slot) in layout.iter().enumerate() {
            let fresh = match *slot {
                Slot::Dense(q) if q < num_dense => !std::mem::replace(&mut dense_seen[q], true),
                Slot::Mms(l) if (l as usize) < mms_count => {
                    !std::mem::replace(&mut mms_seen[l as usize], true)
                }
                _ => false,
            };
            if !fresh {
                return Err(Error::contract(format!("layout entry {pos} ({slot:?}) is invalid or repeated")));
            }
        }
        if dense_seen.iter().chain(&mms_seen).any(|&s| !s) {
            return Err(Error::contract("layout does not cover every dense qubit and MMS slot"));
        }
        Ok(QuantumRegister {
            num_dense,
            amplitudes,
            layout,
            next_label: mms_count as u64,
        })
    }

    /// A register whose positions are exactly the qubits of `state`.
    pub fn from_pure(state: &PureState) -> Self {
        let n = state.num_qubits();
        QuantumRegister {
            num_dense: n,
            amplitudes: state.amplitudes.clone(),
            layout: (0..n).map(Slot::Dense).collect(),
            next_label: 0,
        }
    }

    pub fn num_positions(&self) -> usize {
        self.layout.len()
    }

    pub fn num_dense(&self) -> usize {
        self.num_dense
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &[Slot] {
        &self.layout
    }

    pub fn slot(&self, position: usize) -> Result<Slot> {
        self.layout
            .get(position)
            .copied()
            .ok_or_else(|| Error::contract(format!("position {position} out of range")))
    }

    pub fn mms_count(&self) -> usize {
        self.layout.iter().filter(|s| matches!(s, Slot::Mms(_))).count()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Tensors `other` onto this register and returns the position offset of
    /// its first position.
    pub fn append(&mut self, other: &QuantumRegister) -> usize {
        let offset = self.layout.len();
        let shift = self.num_dense;
        let label_base = self.next_label;
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for b in &other.amplitudes {
            for a in &self.amplitudes {
                amplitudes.push(a * b);
            }
        }
        self.amplitudes = amplitudes;
        self.num_dense += other.num_dense;
        self.layout.extend(other.layout.iter().map(|&s| match s {
            Slot::Dense(q) => Slot::Dense(q + shift),
            Slot::Mms(l) => Slot::Mms(l + label_base),
            other => other,
        }));
        self.next_label += other.next_label;
        offset
    }

    /// Adds `count` fresh MMS positions; returns the first new position.
    pub fn push_mms(&mut self, count: usize) -> usize {
        let offset = self.layout.len();
        for _ in 0..count {
            self.layout.push(Slot::Mms(self.next_label));
            self.next_label += 1;
        }
        offset
    }

    pub fn apply_gate<R: Rng + ?Sized>(&mut self, gate: &GateOp, rng: &mut R) -> Result<()> {
        gate.check()?;
        for &t in &gate.targets {
            match self.slot(t)? {
                Slot::Consumed => {
                    return Err(Error::contract(format!("position {t} has been consumed")))
                }
                Slot::Measured(b) => self.densify_slot(t, b),
                _ => {}
            }
        }
        match gate.kind {
            GateKind::Swap => {
                self.layout.swap(gate.targets[0], gate.targets[1]);
            }
            GateKind::Cnot => {
                let (c, t) = (gate.targets[0], gate.targets[1]);
                let both_mms = matches!(self.layout[c], Slot::Mms(_))
                    && matches!(self.layout[t], Slot::Mms(_));
                if both_mms {
                    return Ok(());
                }
                for &pos in &[c, t] {
                    if let Slot::Mms(_) = self.layout[pos] {
                        let b = rng.gen_range(0..2u8);
                        self.densify_slot(pos, b);
                    }
                }
                let (Slot::Dense(qc), Slot::Dense(qt)) = (self.layout[c], self.layout[t]) else {
                    unreachable!("both CNOT operands are dense after promotion")
                };
                self.cnot_dense(qc, qt);
            }
            kind => {
                if let Slot::Dense(q) = self.layout[gate.targets[0]] {
                    let m = kind.matrix().expect("single-qubit gate");
                    self.apply_1q_dense(q, &m);
                }
            }
        }
        Ok(())
    }

    pub fn apply_pauli<R: Rng + ?Sized>(&mut self, position: usize, p: Pauli, rng: &mut R) -> Result<()> {
        match GateKind::from_pauli(p) {
            Some(kind) => self.apply_gate(&GateOp::single(kind, position), rng),
            None => self.slot(position).map(|_| ()),
        }
    }

    /// Samples one Kraus branch of the depolarizing channel
    /// `ρ ↦ (1−p)ρ + (p/3)(XρX + YρY + ZρZ)` and applies it.
    ///
    /// MMS positions record the sample without changing the state.
    pub fn apply_depolarizing<R: Rng + ?Sized>(&mut self, position: usize, p: f64, rng: &mut R) -> Result<Pauli> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::contract(format!("depolarizing probability {p} outside [0, 1]")));
        }
        self.slot(position)?;
        let u: f64 = rng.gen();
        let sampled = if u < p {
            Pauli::NON_IDENTITY[rng.gen_range(0..3)]
        } else {
            Pauli::I
        };
        self.apply_pauli(position, sampled, rng)?;
        Ok(sampled)
    }

    /// Projective Z measurement of one position.
    ///
    /// A dense qubit collapses and is factored out of the amplitude vector; its
    /// slot becomes [`Slot::Measured`] and re-measuring returns the same bit.
    /// An MMS slot yields a fair coin and is consumed.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, position: usize, rng: &mut R) -> Result<u8> {
        match self.slot(position)? {
            Slot::Measured(b) => Ok(b),
            Slot::Consumed => Err(Error::contract(format!("position {position} already consumed"))),
            Slot::Mms(_) => {
                self.layout[position] = Slot::Consumed;
                Ok(rng.gen_range(0..2))
            }
            Slot::Dense(q) => {
                let mask = 1usize << q;
                let p1: f64 = self
                    .amplitudes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i & mask != 0)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                let bit = u8::from(rng.gen::<f64>() < p1);
                let p = if bit == 1 { p1 } else { 1.0 - p1 };
                self.remove_dense(q, bit, 1.0 / p.sqrt());
                self.layout[position] = Slot::Measured(bit);
                Ok(bit)
            }
        }
    }

    /// Measures every listed position in Z; bits are returned in request order.
    pub fn measure_z_all<R: Rng + ?Sized>(&mut self, positions: &[usize], rng: &mut R) -> Result<Vec<u8>> {
        positions.iter().map(|&p| self.measure_z(p, rng)).collect()
    }

    /// Expectation of a Pauli string acting on `positions`.
    pub fn pauli_expectation(&self, positions: &[usize], pauli: &PauliString) -> Result<f64> {
        if positions.len() != pauli.len() {
            return Err(Error::contract("Pauli length does not match position count"));
        }
        let mut psi = self.amplitudes.clone();
        let mut factor = 1.0;
        for (&pos, &op) in positions.iter().zip(pauli.ops()) {
            if op == Pauli::I {
                continue;
            }
            match self.slot(pos)? {
                Slot::Dense(q) => {
                    let kind = GateKind::from_pauli(op).expect("non-identity");
                    apply_1q(&mut psi, q, &kind.matrix().expect("single-qubit"));
                }
                Slot::Mms(_) => return Ok(0.0),
                Slot::Measured(b) => match op {
                    Pauli::Z => factor *= if b == 1 { -1.0 } else { 1.0 },
                    _ => return Ok(0.0),
                },
                Slot::Consumed => return Err(Error::contract(format!("position {pos} consumed"))),
            }
        }
        let phase = Complex64::i().powu(pauli.phase().exponent() as u32);
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&psi)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok((phase * overlap).re * factor)
    }

    /// Exact density matrix of `positions` (in that order) with all other
    /// positions traced out, limited to [`DENSIFY_LIMIT`] positions.
    pub fn densify(&self, positions: &[usize]) -> Result<DensityMatrix> {
        self.densify_with_limit(positions, DENSIFY_LIMIT)
    }

    pub fn densify_with_limit(&self, positions: &[usize], limit: usize) -> Result<DensityMatrix> {
        if positions.len() > limit {
            return Err(Error::SizeLimit {
                requested: positions.len(),
                limit,
            });
        }
        let mut dense = Vec::new();
        for (out, &pos) in positions.iter().enumerate() {
            if positions[..out].contains(&pos) {
                return Err(Error::contract(format!("position {pos} listed twice")));
            }
            match self.slot(pos)? {
                Slot::Dense(q) => dense.push((out, q)),
                Slot::Consumed => return Err(Error::contract(format!("position {pos} consumed"))),
                _ => {}
            }
        }
        let reduced = self.reduced_dense(&dense.iter().map(|&(_, q)| q).collect::<Vec<_>>());
        let s = positions.len();
        let dim = 1usize << s;
        let gather = |i: usize| -> usize {
            dense
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &(out, _))| acc | (((i >> out) & 1) << k))
        };
        let m = nalgebra::DMatrix::from_fn(dim, dim, |row, col| {
            let mut factor = 1.0;
            for (out, &pos) in positions.iter().enumerate() {
                let (rb, cb) = ((row >> out) & 1, (col >> out) & 1);
                match self.layout[pos] {
                    Slot::Mms(_) => {
                        if rb != cb {
                            return Complex64::new(0.0, 0.0);
                        }
                        factor *= 0.5;
                    }
                    Slot::Measured(b)
                        if (rb != b as usize || cb != b as usize) => {
                            return Complex64::new(0.0, 0.0);
                        }
                    _ => {}
                }
            }
            reduced[gather(row) * (1 << dense.len()) + gather(col)] * factor
        });
        DensityMatrix::from_matrix(m)
    }

    /// Row-major reduced density matrix of the listed dense qubits.
    fn reduced_dense(&self, qubits: &[usize]) -> Vec<Complex64> {
        let d = 1usize << qubits.len();
        let sel_mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        let scatter: Vec<usize> = (0..d)
            .map(|a| {
                qubits
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (k, &q)| acc | (((a >> k) & 1) << q))
            })
            .collect();
        let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let rest = i & !sel_mask;
            let a = qubits
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &q)| acc | (((i >> q) & 1) << k));
            for (a2, &sc) in scatter.iter().enumerate() {
                rho[a * d + a2] += amp * self.amplitudes[rest | sc].conj();
            }
        }
        rho
    }

    /// Turns a symbolic or measured slot into a dense qubit in basis state `bit`.
    fn densify_slot(&mut self, position: usize, bit: u8) {
        let q = self.num_dense;
        let half = self.amplitudes.len();
        self.amplitudes.resize(2 * half, Complex64::new(0.0, 0.0));
        if bit == 1 {
            let (low, high) = self.amplitudes.split_at_mut(half);
            high.swap_with_slice(low);
        }
        self.num_dense += 1;
        self.layout[position] = Slot::Dense(q);
    }

    /// Drops dense qubit `q`, keeping the `bit` branch scaled by `scale`.
    fn remove_dense(&mut self, q: usize, bit: u8, scale: f64) {
        let low_mask = (1usize << q) - 1;
        let new_len = self.amplitudes.len() / 2;
        let amplitudes = (0..new_len)
            .map(|i| {
                let old = ((i & !low_mask) << 1) | ((bit as usize) << q) | (i & low_mask);
                self.amplitudes[old] * scale
            })
            .collect();
        self.amplitudes = amplitudes;
        self.num_dense -= 1;
        for slot in &mut self.layout {
            if let Slot::Dense(j) = slot {
                if *j > q {
                    *j -= 1;
                }
            }
        }
    }

    fn apply_1q_dense(&mut self, q: usize, m: &[Complex64; 4]) {
        apply_1q(&mut self.amplitudes, q, m);
    }

    fn cnot_dense(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }
}

impl PureState {
    fn tensor_raw(&self, other: &PureState) -> Vec<Complex64> {
        self.tensor(other).amplitudes
    }
}

fn apply_1q(psi: &mut [Complex64], q: usize, m: &[Complex64; 4]) {
    let mask = 1usize << q;
    let diagonal = m[1] == Complex64::new(0.0, 0.0) && m[2] == Complex64::new(0.0, 0.0);
    for i in 0..psi.len() {
        if i & mask != 0 {
            continue;
        }
        let j = i | mask;
        if diagonal {
            psi[i] *= m[0];
            psi[j] *= m[3];
        } else {
            let (a, b) = (psi[i], psi[j]);
            psi[i] = m[0] * a + m[1] * b;
            psi[j] = m[2] * a + m[3] * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sigma(p: f64, trials: usize) -> f64 {
        (p * (1.0 - p) / trials as f64).sqrt()
    }

    #[test]
    fn init_examples() {
        let reg = QuantumRegister::init(&[PureState::zero()], 0, vec![Slot::Dense(0)]).unwrap();
        assert_eq!(reg.amplitudes(), &[c(1.0), c(0.0)]);

        let reg = QuantumRegister::init(&[PureState::zero()], 1, vec![Slot::Dense(0), Slot::Mms(0)]).unwrap();
        assert_eq!(reg.amplitudes(), &[c(1.0), c(0.0)]);
        assert_eq!(reg.mms_count(), 1);

        // |+⟩ on dense qubit 0, |1⟩ on dense qubit 1: amplitude indices 2 and 3.
        let layout = vec![Slot::Dense(0), Slot::Mms(0), Slot::Dense(1), Slot::Mms(1)];
        let reg = QuantumRegister::init(&[PureState::plus(), PureState::one()], 2, layout).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_eq!(reg.amplitudes(), &[c(0.0), c(0.0), c(h), c(h)]);
    }

    #[test]
    fn init_rejects_bad_inputs() {
        let bad = PureState {
            amplitudes: vec![c(1.0), c(1.0)],
        };
        assert!(QuantumRegister::init(&[bad], 0, vec![Slot::Dense(0)]).is_err());
        assert!(PureState::from_amplitudes(vec![c(1.0), c(1.0)]).is_err());
        // layout missing the MMS slot
        assert!(QuantumRegister::init(&[PureState::zero()], 1, vec![Slot::Dense(0)]).is_err());
        // repeated dense index
        assert!(QuantumRegister::init(&[PureState::zero()], 0, vec![Slot::Dense(0), Slot::Dense(0)]).is_err());
    }

    #[test]
    fn single_qubit_gate_on_mms_is_identity() {
        let mut rng = seeded(1);
        let mut reg = QuantumRegister::init(&[PureState::plus()], 1, vec![Slot::Dense(0), Slot::Mms(0)]).unwrap();
        let before = reg.clone();
        for kind in [GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::S, GateKind::T] {
            reg.apply_gate(&GateOp::single(kind, 1), &mut rng).unwrap();
        }
        assert_eq!(reg, before);
    }

    #[test]
    fn hadamard_on_zero() {
        let mut rng = seeded(1);
        let mut reg = QuantumRegister::from_pure(&PureState::zero());
        reg.apply_gate(&GateOp::single(GateKind::H, 0), &mut rng).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((reg.amplitudes()[0] - c(h)).norm() < 1e-15);
        assert!((reg.amplitudes()[1] - c(h)).norm() < 1e-15);
    }

    #[test]
    fn gate_errors() {
        let mut rng = seeded(1);
        let mut reg = QuantumRegister::from_pure(&PureState::zero());
        assert!(reg.apply_gate(&GateOp::single(GateKind::X, 3), &mut rng).is_err());
        assert!(reg.apply_gate(&GateOp { kind: GateKind::Cnot, targets: vec![0, 0] }, &mut rng).is_err());
        assert!(reg.apply_gate(&GateOp { kind: GateKind::H, targets: vec![0, 1] }, &mut rng).is_err());
    }

    #[test]
    fn cnot_into_mms_keeps_target_maximally_mixed() {
        // Average the densified target over both sampled promotions.
        let mut branches = Vec::new();
        for seed in 0..64 {
            let mut rng = seeded(seed);
            let mut reg = QuantumRegister::init(&[PureState::one()], 1, vec![Slot::Dense(0), Slot::Mms(0)]).unwrap();
            reg.apply_gate(&GateOp::cnot(0, 1), &mut rng).unwrap();
            branches.push((reg.layout()[1], reg.densify(&[1]).unwrap()));
        }
        let zero = branches.iter().find(|(_, d)| d.entry(0, 0).re > 0.5).unwrap().1.clone();
        let one = branches.iter().find(|(_, d)| d.entry(1, 1).re > 0.5).unwrap().1.clone();
        let avg = DensityMatrix::mixture(&[zero, one]).unwrap();
        assert!(avg.trace_distance(&DensityMatrix::maximally_mixed(1)).unwrap() < 1e-12);
    }

    #[test]
    fn swap_relabels_without_sampling() {
        let mut rng = seeded(3);
        let mut reg = QuantumRegister::init(&[PureState::one()], 1, vec![Slot::Dense(0), Slot::Mms(0)]).unwrap();
        reg.apply_gate(&GateOp::swap(0, 1), &mut rng).unwrap();
        assert_eq!(reg.layout(), &[Slot::Mms(0), Slot::Dense(0)]);
        assert_eq!(reg.num_dense(), 1);
    }

    #[test]
    fn depolarizing_p_zero_never_acts() {
        let mut rng = seeded(5);
        let mut reg = QuantumRegister::from_pure(&PureState::plus());
        for _ in 0..1000 {
            assert_eq!(reg.apply_depolarizing(0, 0.0, &mut rng).unwrap(), Pauli::I);
        }
        assert!(reg.apply_depolarizing(0, 1.5, &mut rng).is_err());
        assert!(reg.apply_depolarizing(0, -0.1, &mut rng).is_err());
    }

    #[test]
    fn depolarizing_p_one_is_uniform_over_xyz() {
        let trials = 300_000;
        let mut rng = seeded(11);
        let mut reg = QuantumRegister::init(&[], 1, vec![Slot::Mms(0)]).unwrap();
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let p = reg.apply_depolarizing(0, 1.0, &mut rng).unwrap();
            counts[p as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        let s = sigma(1.0 / 3.0, trials);
        for &k in &counts[1..] {
            assert!((k as f64 / trials as f64 - 1.0 / 3.0).abs() < 3.0 * s, "{counts:?}");
        }
    }

    #[test]
    fn depolarizing_identity_frequency() {
        let trials = 100_000;
        let mut rng = seeded(12);
        let mut reg = QuantumRegister::from_pure(&PureState::zero());
        let ident = (0..trials)
            .filter(|_| reg.apply_depolarizing(0, 0.3, &mut rng).unwrap() == Pauli::I)
            .count();
        assert!((ident as f64 / trials as f64 - 0.7).abs() < 3.0 * sigma(0.7, trials));
    }

    #[test]
    fn measurement_examples() {
        let mut rng = seeded(7);
        let mut reg = QuantumRegister::from_pure(&PureState::zero());
        assert_eq!(reg.measure_z(0, &mut rng).unwrap(), 0);

        let trials = 100_000;
        let ones: usize = (0..trials)
            .map(|_| {
                let mut reg = QuantumRegister::init(&[], 1, vec![Slot::Mms(0)]).unwrap();
                let b = reg.measure_z(0, &mut rng).unwrap() as usize;
                assert!(reg.measure_z(0, &mut rng).is_err());
                b
            })
            .sum();
        assert!((ones as f64 / trials as f64 - 0.5).abs() < 3.0 * sigma(0.5, trials));

        for _ in 0..20 {
            let mut reg = QuantumRegister::from_pure(&PureState::plus());
            let first = reg.measure_z(0, &mut rng).unwrap();
            assert_eq!(reg.measure_z(0, &mut rng).unwrap(), first);
            assert_eq!(reg.num_dense(), 0);
        }
    }

    #[test]
    fn measurement_order_matches_request() {
        let mut rng = seeded(9);
        let state = PureState::basis(3, 0b110);
        let mut reg = QuantumRegister::from_pure(&state);
        assert_eq!(reg.measure_z_all(&[2, 0, 1], &mut rng).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn born_rule_marginals_on_random_states() {
        let trials = 20_000;
        let mut rng = seeded(21);
        for _ in 0..3 {
            let state = PureState::random(3, &mut rng);
            let probs: Vec<f64> = state.amplitudes().iter().map(Complex64::norm_sqr).collect();
            let mut counts = [0usize; 8];
            for _ in 0..trials {
                let mut reg = QuantumRegister::from_pure(&state);
                let bits = reg.measure_z_all(&[0, 1, 2], &mut rng).unwrap();
                counts[bits[0] as usize | (bits[1] as usize) << 1 | (bits[2] as usize) << 2] += 1;
            }
            for (k, &p) in probs.iter().enumerate() {
                let f = counts[k] as f64 / trials as f64;
                assert!((f - p).abs() <= 3.0 * sigma(p, trials) + 1e-12, "outcome {k}: {f} vs {p}");
            }
        }
    }

    #[test]
    fn densify_examples() {
        let reg = QuantumRegister::init(&[], 1, vec![Slot::Mms(0)]).unwrap();
        let rho = reg.densify(&[0]).unwrap();
        assert_eq!(rho, DensityMatrix::maximally_mixed(1));

        // |0⟩ at position 1 (high), MMS at position 0: diag(½, ½, 0, 0)
        let reg = QuantumRegister::init(&[PureState::zero()], 1, vec![Slot::Mms(0), Slot::Dense(0)]).unwrap();
        let rho = reg.densify(&[0, 1]).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| rho.entry(i, i).re).collect();
        assert_eq!(diag, vec![0.5, 0.5, 0.0, 0.0]);

        let big = QuantumRegister::init(&[], 11, (0..11).map(Slot::Mms).collect()).unwrap();
        assert!(matches!(
            big.densify(&(0..11).collect::<Vec<_>>()),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn partial_trace_of_bell_pair() {
        let mut rng = seeded(2);
        let mut reg = QuantumRegister::from_pure(&PureState::basis(2, 0));
        reg.apply_gate(&GateOp::single(GateKind::H, 0), &mut rng).unwrap();
        reg.apply_gate(&GateOp::cnot(0, 1), &mut rng).unwrap();
        let rho = reg.densify(&[1]).unwrap();
        assert!(rho.trace_distance(&DensityMatrix::maximally_mixed(1)).unwrap() < 1e-12);
    }

    #[test]
    fn append_tensors_registers() {
        let mut a = QuantumRegister::init(&[PureState::one()], 1, vec![Slot::Mms(0), Slot::Dense(0)]).unwrap();
        let b = QuantumRegister::init(&[PureState::plus()], 1, vec![Slot::Dense(0), Slot::Mms(0)]).unwrap();
        let offset = a.append(&b);
        assert_eq!(offset, 2);
        assert_eq!(a.layout(), &[Slot::Mms(0), Slot::Dense(0), Slot::Dense(1), Slot::Mms(1)]);
        let rho = a.densify(&[1, 2]).unwrap();
        let want = PureState::one().tensor(&PureState::plus());
        assert!((rho.fidelity_with_pure(&want).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn register_json_uses_re_im_pairs() {
        let reg = QuantumRegister::init(&[PureState::one()], 1, vec![Slot::Dense(0), Slot::Mms(0)]).unwrap();
        let json = serde_json::to_value(&reg).unwrap();
        assert_eq!(json["amplitudes"], serde_json::json!([[0.0, 0.0], [1.0, 0.0]]));
        let back: QuantumRegister = serde_json::from_value(json).unwrap();
        assert_eq!(back, reg);
    }
}
