//! Helpers shared by the integration and acceptance tests. The circuit oracle
//! here multiplies plain 2x2 / 4x4 matrices on a state vector and shares no
//! code with the library simulator.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use qhe_core::css_code::{steane_code, CssCode, Pauli};
use qhe_core::qhe_protocol::{
    decrypt, encrypt, Client, LogicalCircuit, LogicalGate, LogicalGateKind, Loopback, PermutationKey, PhysicalOp,
    Server, ServerConfig, ClassicalMessage,
};
use qhe_core::rng::{seeded, stream};
use qhe_core::state_sim::{DensityMatrix, PureState};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_matrix(kind: LogicalGateKind) -> [[Complex64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match kind {
        LogicalGateKind::X => [[z, o], [o, z]],
        LogicalGateKind::Z => [[o, z], [z, -o]],
        LogicalGateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        LogicalGateKind::S => [[o, z], [z, c(0.0, 1.0)]],
        LogicalGateKind::T => [[o, z], [z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        LogicalGateKind::Cnot => unreachable!(),
    }
}

/// Plain state-vector simulation; wire `w` is bit `w` of the index.
pub fn oracle_run(circuit: &LogicalCircuit, inputs: &[PureState]) -> Vec<Complex64> {
    let mut state = vec![c(1.0, 0.0)];
    for (w, input) in inputs.iter().enumerate() {
        let a = input.amplitudes();
        let mut next = vec![c(0.0, 0.0); state.len() * 2];
        for (i, s) in state.iter().enumerate() {
            next[i] = s * a[0];
            next[i | (1 << w)] = s * a[1];
        }
        state = next;
    }
    for g in &circuit.gates {
        if g.gate == LogicalGateKind::Cnot {
            let (ctl, tgt) = (g.wires[0], g.wires[1]);
            for i in 0..state.len() {
                if i >> ctl & 1 == 1 && i >> tgt & 1 == 0 {
                    state.swap(i, i | (1 << tgt));
                }
            }
        } else {
            let m = single_matrix(g.gate);
            let w = g.wires[0];
            for i in 0..state.len() {
                if i >> w & 1 == 0 {
                    let j = i | (1 << w);
                    let (a0, a1) = (state[i], state[j]);
                    state[i] = m[0][0] * a0 + m[0][1] * a1;
                    state[j] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
    }
    state
}

/// `⟨v|ρ|v⟩`.
pub fn fidelity_with_vector(rho: &DensityMatrix, v: &[Complex64]) -> f64 {
    assert_eq!(rho.dim(), v.len());
    let mut f = c(0.0, 0.0);
    for i in 0..v.len() {
        for j in 0..v.len() {
            f += v[i].conj() * rho.entry(i, j) * v[j];
        }
    }
    f.re
}

pub fn random_circuit<R: Rng>(rng: &mut R, max_wires: usize, max_gates: usize, max_t: usize) -> LogicalCircuit {
    let wires = rng.gen_range(1..=max_wires);
    let len = rng.gen_range(1..=max_gates);
    let mut t_left = max_t;
    let mut gates = Vec::new();
    for _ in 0..len {
        let choices: &[LogicalGateKind] = &[
            LogicalGateKind::X,
            LogicalGateKind::Z,
            LogicalGateKind::H,
            LogicalGateKind::S,
            LogicalGateKind::T,
            LogicalGateKind::Cnot,
        ];
        let mut kind = choices[rng.gen_range(0..choices.len())];
        if (kind == LogicalGateKind::Cnot && wires < 2) || (kind == LogicalGateKind::T && t_left == 0) {
            kind = LogicalGateKind::H;
        }
        if kind == LogicalGateKind::T {
            t_left -= 1;
        }
        let w = if kind == LogicalGateKind::Cnot {
            let a = rng.gen_range(0..2);
            vec![a, 1 - a]
        } else {
            vec![rng.gen_range(0..wires)]
        };
        gates.push(LogicalGate { gate: kind, wires: w });
    }
    LogicalCircuit::new(wires, gates).unwrap()
}

/// Fresh client/server pair over a loopback channel with the client's data
/// block already loaded on the server.
pub struct Bench {
    pub channel: Loopback,
    pub server: Server,
    pub key: PermutationKey,
    pub code: CssCode,
    pub data: u64,
}

impl Bench {
    pub fn new(code: CssCode, key: PermutationKey, message: &PureState, seed: u64) -> Bench {
        let mut client = Client::with_key(code.clone(), key.clone(), stream(seed, 1)).unwrap();
        let ct = client.encrypt_inputs(std::slice::from_ref(message)).unwrap();
        let mut server = Server::new(code.clone(), ServerConfig::default(), stream(seed, 2), stream(seed, 3));
        let data = server.load_data(&ct)[0];
        Bench {
            channel: Loopback::new(client),
            server,
            key,
            code,
            data,
        }
    }

    pub fn stock(&mut self, magic: usize, rounds: usize) {
        let mut a = self.channel.client_mut().prepare_ancillas(magic, rounds, rounds).unwrap();
        let pluses = a.split_off(magic + rounds);
        let zeros = a.split_off(magic);
        self.server.stock_ancillas(a, zeros, pluses).unwrap();
    }

    pub fn decrypt(&self) -> DensityMatrix {
        decrypt(&self.key, &self.code, self.server.memory(), self.data).unwrap().state
    }
}

/// Injects `pauli` at block position `position`, runs one syndrome round and
/// returns the decrypted fidelity with `message`.
pub fn corrected_fidelity(key: &PermutationKey, message: &PureState, position: usize, pauli: Pauli, seed: u64) -> f64 {
    corrected_fidelity_multi(key, message, &[(position, pauli)], seed)
}

/// Like [`corrected_fidelity`] with several injected Paulis.
pub fn corrected_fidelity_multi(key: &PermutationKey, message: &PureState, errors: &[(usize, Pauli)], seed: u64) -> f64 {
    let mut bench = Bench::new(steane_code(), key.clone(), message, seed);
    bench.stock(0, 1);
    for &(position, pauli) in errors {
        let pos = bench.server.memory().block(bench.data).unwrap().positions[position];
        bench
            .server
            .memory_mut()
            .register
            .apply_pauli(pos, pauli, &mut seeded(seed))
            .unwrap();
    }
    bench.server.syndrome_extraction_round(bench.data, &mut bench.channel).unwrap();
    bench.decrypt().fidelity_with_pure(message).unwrap()
}

/// Every (position, Pauli) single-error case on a Steane block with group
/// parameter `m`; returns (cases, worst fidelity).
pub fn all_single_error_cases(m: usize, seed: u64) -> (usize, f64) {
    let mut rng = seeded(seed);
    let key = qhe_core::qhe_protocol::keygen(m, 7, &mut rng).unwrap();
    let message = PureState::random(1, &mut rng);
    let mut worst = 1.0f64;
    let mut cases = 0;
    for position in 0..7 * 2 * m {
        for (i, pauli) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            let f = corrected_fidelity(&key, &message, position, pauli, seed + (position * 3 + i) as u64);
            worst = worst.min(f);
            cases += 1;
        }
    }
    (cases, worst)
}

/// Contingency table of padding-position correction letters by logical
/// outcome: `table[outcome][0]` counts `I`, `table[outcome][1]` counts `S`.
pub struct PrivacyStats {
    pub table: [[u64; 2]; 2],
    pub rounds: usize,
    /// Every instruction had length `2mn` and used only `I`/`S`.
    pub shapes_ok: bool,
}

pub fn t_round_privacy(code: CssCode, m: usize, rounds: usize, seed: u64) -> PrivacyStats {
    let mut rng = seeded(seed);
    let key = qhe_core::qhe_protocol::keygen(m, code.n(), &mut rng).unwrap();
    let mut bench = Bench::new(code, key.clone(), &PureState::plus(), seed);
    let mut table = [[0u64; 2]; 2];
    let mut shapes_ok = true;
    let total = key.group_size() * key.n();
    for _ in 0..rounds {
        bench.stock(1, 0);
        bench.server.t_gate_round(bench.data, &mut bench.channel).unwrap();
        let outcome = match bench.channel.client().branch_log().last() {
            Some(qhe_core::qhe_protocol::BranchEvent::TGate { outcome, .. }) => *outcome as usize,
            other => panic!("unexpected log entry {other:?}"),
        };
        let Some(ClassicalMessage::CorrectionInstruction { ops, .. }) = bench.channel.received.last() else {
            panic!("no instruction recorded");
        };
        shapes_ok &= ops.len() == total && ops.0.iter().all(|op| matches!(op, PhysicalOp::I | PhysicalOp::S));
        for (pos, op) in ops.0.iter().enumerate() {
            let g = pos / key.group_size();
            if pos != key.code_position(g) {
                table[outcome][usize::from(*op == PhysicalOp::S)] += 1;
            }
        }
    }
    PrivacyStats {
        table,
        rounds,
        shapes_ok,
    }
}

/// Pearson chi-squared statistic of a 2x2 contingency table.
pub fn chi_squared_2x2(t: &[[u64; 2]; 2]) -> f64 {
    let n: f64 = t.iter().flatten().sum::<u64>() as f64;
    let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    let mut chi = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] as f64 * cols[j] as f64 / n;
            if expected > 0.0 {
                chi += (t[i][j] as f64 - expected).powi(2) / expected;
            }
        }
    }
    chi
}

/// Runs `circuit` under encryption for each seed and returns the worst
/// fidelity against the oracle plus the T outcomes observed.
pub fn homomorphism_check(circuit: &LogicalCircuit, inputs: &[PureState], seeds: std::ops::Range<u64>) -> (f64, [usize; 2]) {
    use qhe_core::qhe_protocol::{run_inproc, BranchEvent, CodeChoice, SessionConfig};
    let want = oracle_run(circuit, inputs);
    let mut worst = 1.0f64;
    let mut outcomes = [0usize; 2];
    for seed in seeds {
        let config = SessionConfig::new(1, CodeChoice::Steane, seed);
        let (out, _) = run_inproc(&config, circuit, inputs).unwrap();
        for e in &out.branch_log {
            if let BranchEvent::TGate { outcome, .. } = e {
                outcomes[*outcome as usize] += 1;
            }
        }
        worst = worst.min(fidelity_with_vector(&out.decryption.state, &want));
    }
    (worst, outcomes)
}

pub fn encrypt_then_decrypt(message: &PureState, m: usize, seed: u64) -> f64 {
    let code = steane_code();
    let key = qhe_core::qhe_protocol::keygen(m, 7, &mut seeded(seed)).unwrap();
    let ct = encrypt(&key, &code, message, 0).unwrap();
    decrypt(&key, &code, &ct, 0).unwrap().state.fidelity_with_pure(message).unwrap()
}
