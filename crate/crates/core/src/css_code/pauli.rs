use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli operator without phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Symplectic `(x, z)` bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `self * other = i^k * p`; returns `(k, p)`.
    pub fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Global phase `i^k`, `k` in `0..4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    fn symbol(self) -> &'static str {
        ["+", "+i", "-", "-i"][self.0 as usize]
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "+1" | "1" | "+" => Ok(Phase::ONE),
            "+i" | "i" => Ok(Phase::I),
            "-1" | "-" => Ok(Phase::MINUS_ONE),
            "-i" => Ok(Phase::MINUS_I),
            other => Err(serde::de::Error::custom(format!("invalid phase {other:?}"))),
        }
    }
}

/// An n-qubit Pauli operator with an exact phase in {±1, ±i}.
///
/// Serialized as a string such as `"+XIZ"` or `"-iYY"`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(len: usize) -> Self {
        PauliString {
            phase: Phase::ONE,
            ops: vec![Pauli::I; len],
        }
    }

    pub fn new(phase: Phase, ops: Vec<Pauli>) -> Self {
        PauliString { phase, ops }
    }

    pub fn from_ops(ops: Vec<Pauli>) -> Self {
        PauliString::new(Phase::ONE, ops)
    }

    /// `op` on qubit `index` (0-indexed), identity elsewhere.
    pub fn single(len: usize, index: usize, op: Pauli) -> Self {
        let mut p = PauliString::identity(len);
        p.ops[index] = op;
        p
    }

    /// `op` on every qubit whose support bit is set.
    pub fn from_support(support: &[u8], op: Pauli) -> Self {
        PauliString::from_ops(
            support
                .iter()
                .map(|&b| if b & 1 == 1 { op } else { Pauli::I })
                .collect(),
        )
    }

    /// Combines independent X and Z supports; overlapping positions become Y.
    ///
    /// The phase is +1, i.e. the result is the Hermitian Pauli on each qubit,
    /// not the product `X(x) Z(z)`.
    pub fn from_xz(x: &[u8], z: &[u8]) -> Self {
        debug_assert_eq!(x.len(), z.len());
        PauliString::from_ops(
            x.iter()
                .zip(z)
                .map(|(&a, &b)| Pauli::from_bits(a & 1 == 1, b & 1 == 1))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn get(&self, index: usize) -> Pauli {
        self.ops[index]
    }

    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|p| !p.is_identity()).count()
    }

    pub fn x_support(&self) -> Vec<u8> {
        self.ops.iter().map(|p| p.bits().0 as u8).collect()
    }

    pub fn z_support(&self) -> Vec<u8> {
        self.ops.iter().map(|p| p.bits().1 as u8).collect()
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Operator product `self * other` with the phase tracked exactly.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::contract(format!(
                "Pauli length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let mut phase = self.phase.mul(other.phase);
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (k, p) = a.product(b);
                phase = phase.mul(Phase::from_exponent(k));
                p
            })
            .collect();
        Ok(PauliString { phase, ops })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .ops
            .iter()
            .zip(&other.ops)
            .filter(|(a, b)| !a.is_identity() && !b.is_identity() && a != b)
            .count();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.symbol())?;
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        let ops = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::malformed(format!("bad Pauli {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { phase, ops })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
