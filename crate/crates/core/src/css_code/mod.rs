//! Classical machinery for self-dual, doubly even CSS codes: construction,
//! validation, syndromes, lookup decoding and logical readout.

mod gf2;
mod pauli;

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use gf2::{dot, format_bits, parse_bits, weight, xor, BinaryMatrix};
pub use pauli::{Pauli, Phase, PauliString};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::state_sim::{GateKind, GateOp, PureState, QuantumRegister};

/// Hamming(7,4) parity checks, qubits 1..7 left to right.
pub const HAMMING_ROWS: [&str; 3] = ["1110100", "1101010", "1011001"];

/// Serialized form of a code.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct CssCodeJson {
    n: usize,
    k: usize,
    d: usize,
    h_x: BinaryMatrix,
    h_z: BinaryMatrix,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
    encoding_circuit: Vec<GateOp>,
}

/// An `[[n, k, d]]` CSS code.
///
/// Logical input qubit `j` enters the encoding circuit on qubit `j`; qubits
/// `k..n` start in `|0⟩`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CssCodeJson", into = "CssCodeJson")]
pub struct CssCode {
    n: usize,
    k: usize,
    d: usize,
    h_x: BinaryMatrix,
    h_z: BinaryMatrix,
    logical_x: Vec<PauliString>,
    logical_z: Vec<PauliString>,
    encoding_circuit: Vec<GateOp>,
    decoders: OnceLock<(LookupDecoder, LookupDecoder)>,
}

impl PartialEq for CssCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.k == other.k
            && self.d == other.d
            && self.h_x == other.h_x
            && self.h_z == other.h_z
            && self.logical_x == other.logical_x
            && self.logical_z == other.logical_z
            && self.encoding_circuit == other.encoding_circuit
    }
}

impl TryFrom<CssCodeJson> for CssCode {
    type Error = Error;

    fn try_from(j: CssCodeJson) -> Result<Self> {
        CssCode::new(
            j.n,
            j.k,
            j.d,
            j.h_x,
            j.h_z,
            j.logical_x,
            j.logical_z,
            j.encoding_circuit,
        )
    }
}

impl From<CssCode> for CssCodeJson {
    fn from(c: CssCode) -> Self {
        CssCodeJson {
            n: c.n,
            k: c.k,
            d: c.d,
            h_x: c.h_x,
            h_z: c.h_z,
            logical_x: c.logical_x,
            logical_z: c.logical_z,
            encoding_circuit: c.encoding_circuit,
        }
    }
}

/// Syndrome of a Pauli error: `x_bits` from the Z checks (detects X errors),
/// `z_bits` from the X checks (detects Z errors).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    pub x_bits: Vec<u8>,
    pub z_bits: Vec<u8>,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.x_bits.iter().chain(&self.z_bits).all(|&b| b == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CssCheck {
    CssCommutation,
    SelfDuality,
    DoublyEven,
    LogicalOperators,
    EncodingCircuit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub check: CssCheck,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn passed(&self, check: CssCheck) -> bool {
        self.outcomes.iter().any(|o| o.check == check && o.passed)
    }

    pub fn failures(&self) -> Vec<CssCheck> {
        self.outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.check)
            .collect()
    }
}

impl CssCode {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        k: usize,
        d: usize,
        h_x: BinaryMatrix,
        h_z: BinaryMatrix,
        logical_x: Vec<PauliString>,
        logical_z: Vec<PauliString>,
        encoding_circuit: Vec<GateOp>,
    ) -> Result<Self> {
        let h_x = h_x.with_cols_if_empty(n);
        let h_z = h_z.with_cols_if_empty(n);
        if k == 0 || k > n {
            return Err(Error::contract(format!("invalid code parameters n={n}, k={k}")));
        }
        if h_x.cols() != n || h_z.cols() != n {
            return Err(Error::contract("check matrices must have n columns"));
        }
        if logical_x.len() != k || logical_z.len() != k {
            return Err(Error::contract("need k logical X and k logical Z operators"));
        }
        if logical_x.iter().chain(&logical_z).any(|p| p.len() != n) {
            return Err(Error::contract("logical operators must have length n"));
        }
        for g in &encoding_circuit {
            g.check()?;
            if g.targets.iter().any(|&t| t >= n) {
                return Err(Error::contract("encoding circuit target out of range"));
            }
        }
        Ok(CssCode {
            n,
            k,
            d,
            h_x,
            h_z,
            logical_x,
            logical_z,
            encoding_circuit,
            decoders: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Correctable weight `⌊(d−1)/2⌋`.
    pub fn t(&self) -> usize {
        self.d.saturating_sub(1) / 2
    }

    pub fn h_x(&self) -> &BinaryMatrix {
        &self.h_x
    }

    pub fn h_z(&self) -> &BinaryMatrix {
        &self.h_z
    }

    pub fn logical_x(&self) -> &[PauliString] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliString] {
        &self.logical_z
    }

    pub fn encoding_circuit(&self) -> &[GateOp] {
        &self.encoding_circuit
    }

    /// Physical single-qubit phase gate whose transversal application is the
    /// logical `S`.
    ///
    /// On a doubly even code `S^⊗n` multiplies `|1̄⟩` by `i^{|x̄|}`, so the gate
    /// is `S` when the logical X weight is 1 mod 4 and `Sdg` when it is 3 mod 4.
    pub fn logical_s_gate(&self) -> GateKind {
        match weight(&self.logical_x[0].x_support()) % 4 {
            3 => GateKind::Sdg,
            _ => GateKind::S,
        }
    }

    /// Stabilizer generators as Pauli strings: X-type rows first, then Z-type.
    pub fn stabilizer_generators(&self) -> Vec<PauliString> {
        let xs = (0..self.h_x.rows()).map(|r| PauliString::from_support(self.h_x.row(r), Pauli::X));
        let zs = (0..self.h_z.rows()).map(|r| PauliString::from_support(self.h_z.row(r), Pauli::Z));
        xs.chain(zs).collect()
    }

    /// Whether `p` (ignoring phase) lies in the stabilizer group.
    pub fn is_stabilizer(&self, p: &PauliString) -> bool {
        p.len() == self.n
            && self.h_x.row_space_contains(&p.x_support())
            && self.h_z.row_space_contains(&p.z_support())
    }

    /// Whether `p` commutes with every stabilizer but is not one, i.e. acts as
    /// a nontrivial logical operator.
    pub fn is_logical_error(&self, p: &PauliString) -> bool {
        self.stabilizer_generators().iter().all(|s| s.commutes_with(p)) && !self.is_stabilizer(p)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_css_properties(self)
    }

    fn decoders(&self) -> &(LookupDecoder, LookupDecoder) {
        self.decoders
            .get_or_init(|| (LookupDecoder::new(&self.h_z), LookupDecoder::new(&self.h_x)))
    }
}

/// The `[[7,1,3]]` Steane code with `h_x = h_z` = Hamming(7,4) checks.
///
/// The encoding circuit takes the message on qubit 0 (qubit 1 in 1-indexed
/// notation). It copies the message onto the logical-X representative
/// `1100001`, puts pivots 2, 4, 5 in `|+⟩` and fans each pivot out along a
/// stabilizer generator whose pivot pattern is one-hot (`1011001`,
/// `0101101`, `1101010`).
pub fn steane_code() -> CssCode {
    let h = BinaryMatrix::from_strs(&HAMMING_ROWS).expect("fixed matrix");
    let all_x = PauliString::from_ops(vec![Pauli::X; 7]);
    let all_z = PauliString::from_ops(vec![Pauli::Z; 7]);
    let mut circuit = vec![GateOp::cnot(0, 1), GateOp::cnot(0, 6)];
    circuit.extend([2, 4, 5].map(|q| GateOp::single(GateKind::H, q)));
    for (pivot, targets) in [(2, [0, 3, 6]), (4, [1, 3, 6]), (5, [0, 1, 3])] {
        circuit.extend(targets.map(|t| GateOp::cnot(pivot, t)));
    }
    CssCode::new(7, 1, 3, h.clone(), h, vec![all_x], vec![all_z], circuit).expect("fixed code")
}

/// Degenerate `[[1,1,1]]` code with no checks and an empty encoder.
pub fn identity_code() -> CssCode {
    CssCode::new(
        1,
        1,
        1,
        BinaryMatrix::zeros(0, 1),
        BinaryMatrix::zeros(0, 1),
        vec!["X".parse().expect("literal")],
        vec!["Z".parse().expect("literal")],
        Vec::new(),
    )
    .expect("fixed code")
}

/// Runs every structural check and reports each outcome; never fails.
pub fn validate_css_properties(code: &CssCode) -> ValidationReport {
    let mut outcomes = Vec::new();
    let mut push = |check, passed: bool, detail: String| {
        outcomes.push(CheckOutcome {
            check,
            passed,
            detail,
        })
    };

    let product = code.h_x.mul_transpose(&code.h_z);
    let commute = product.as_ref().map(BinaryMatrix::is_zero).unwrap_or(false);
    push(
        CssCheck::CssCommutation,
        commute,
        if commute {
            "h_x · h_zᵀ = 0".into()
        } else {
            format!("h_x · h_zᵀ = {product:?}")
        },
    );

    let self_dual = code.h_x.same_row_space(&code.h_z);
    push(
        CssCheck::SelfDuality,
        self_dual,
        format!(
            "rank h_x = {}, rank h_z = {}",
            code.h_x.rank(),
            code.h_z.rank()
        ),
    );

    let bad_rows: Vec<usize> = (0..code.h_x.rows())
        .filter(|&r| !code.h_x.row_weight(r).is_multiple_of(4))
        .collect();
    push(
        CssCheck::DoublyEven,
        bad_rows.is_empty(),
        format!("rows with weight not divisible by 4: {bad_rows:?}"),
    );

    let stabilizers = code.stabilizer_generators();
    let mut logical_problems = Vec::new();
    for i in 0..code.k {
        for j in 0..code.k {
            let commute = code.logical_x[i].commutes_with(&code.logical_z[j]);
            if commute == (i == j) {
                logical_problems.push(format!("X̄{i}/Z̄{j}"));
            }
        }
        for (name, op) in [("X̄", &code.logical_x[i]), ("Z̄", &code.logical_z[i])] {
            if !stabilizers.iter().all(|s| s.commutes_with(op)) {
                logical_problems.push(format!("{name}{i} anticommutes with a stabilizer"));
            }
        }
    }
    push(
        CssCheck::LogicalOperators,
        logical_problems.is_empty(),
        logical_problems.join("; "),
    );

    let (ok, detail) = check_encoder(code, &stabilizers);
    push(CssCheck::EncodingCircuit, ok, detail);

    ValidationReport { outcomes }
}

/// Encodes `|0⟩^⊗n` and checks every generator has expectation +1.
fn check_encoder(code: &CssCode, stabilizers: &[PauliString]) -> (bool, String) {
    if code.n > 20 {
        return (false, "encoder check limited to n <= 20".into());
    }
    let mut reg = QuantumRegister::from_pure(&PureState::basis(code.n, 0));
    let mut rng = seeded(0);
    for g in &code.encoding_circuit {
        if let Err(e) = reg.apply_gate(g, &mut rng) {
            return (false, e.to_string());
        }
    }
    let positions: Vec<usize> = (0..code.n).collect();
    let failing: Vec<String> = stabilizers
        .iter()
        .filter(|s| {
            reg.pauli_expectation(&positions, s)
                .map(|e| (e - 1.0).abs() > 1e-9)
                .unwrap_or(true)
        })
        .map(|s| s.to_string())
        .collect();
    (failing.is_empty(), format!("generators without +1 expectation: {failing:?}"))
}

pub fn syndrome_of(code: &CssCode, error: &PauliString) -> Result<Syndrome> {
    if error.len() != code.n {
        return Err(Error::contract(format!(
            "error has length {}, code has n = {}",
            error.len(),
            code.n
        )));
    }
    Ok(Syndrome {
        x_bits: code.h_z.mul_vec(&error.x_support())?,
        z_bits: code.h_x.mul_vec(&error.z_support())?,
    })
}

/// Minimum-weight correction with the given syndrome. X and Z parts are decoded
/// independently; a qubit needing both receives `Y`.
pub fn decode_syndrome(code: &CssCode, s: &Syndrome) -> Result<PauliString> {
    if s.x_bits.len() != code.h_z.rows() || s.z_bits.len() != code.h_x.rows() {
        return Err(Error::contract("syndrome dimensions do not match the code"));
    }
    let (x_dec, z_dec) = code.decoders();
    let x = x_dec.decode(&s.x_bits).unwrap_or_else(|| vec![0; code.n]);
    let z = z_dec.decode(&s.z_bits).unwrap_or_else(|| vec![0; code.n]);
    Ok(PauliString::from_xz(&x, &z))
}

/// Interprets a Z-basis readout of a code block.
///
/// Bits are corrected to the nearest word of the classical code `ker h_z`, then
/// the logical bit is the parity of the corrected word on the support of
/// logical Z. The flag reports whether the raw bits had a nonzero syndrome.
pub fn decode_logical_z_readout(code: &CssCode, bits: &[u8]) -> Result<(u8, bool)> {
    if bits.len() != code.n {
        return Err(Error::contract(format!(
            "readout has {} bits, code has n = {}",
            bits.len(),
            code.n
        )));
    }
    let syndrome = code.h_z.mul_vec(bits)?;
    let detected = syndrome.contains(&1);
    let flip = code.decoders().0.decode(&syndrome).unwrap_or_else(|| vec![0; code.n]);
    let corrected = xor(bits, &flip);
    Ok((dot(&corrected, &code.logical_z[0].z_support()), detected))
}

/// Syndrome → minimum-weight error pattern for one parity-check matrix.
#[derive(Clone, Debug)]
struct LookupDecoder {
    table: HashMap<Vec<u8>, Vec<u8>>,
}

/// Cap on enumerated error patterns for codes without a complete table.
const LOOKUP_BUDGET: usize = 1 << 20;

impl LookupDecoder {
    /// Enumerates error patterns by increasing weight until every reachable
    /// syndrome has a representative.
    fn new(h: &BinaryMatrix) -> Self {
        let n = h.cols();
        let target = 1usize << h.rank().min(usize::BITS as usize - 1);
        let mut table = HashMap::new();
        table.insert(vec![0; h.rows()], vec![0; n]);
        let mut visited = 1;
        'weights: for w in 1..=n {
            let mut support: Vec<usize> = (0..w).collect();
            loop {
                let mut e = vec![0u8; n];
                for &i in &support {
                    e[i] = 1;
                }
                let s = h.mul_vec(&e).expect("matching length");
                table.entry(s).or_insert(e);
                visited += 1;
                if table.len() >= target || visited >= LOOKUP_BUDGET {
                    break 'weights;
                }
                if !next_combination(&mut support, n) {
                    break;
                }
            }
        }
        LookupDecoder { table }
    }

    fn decode(&self, syndrome: &[u8]) -> Option<Vec<u8>> {
        self.table.get(syndrome).cloned()
    }
}

/// Advances a sorted index combination in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
