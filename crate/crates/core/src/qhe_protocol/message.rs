use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cipher::Ciphertext;
use crate::css_code::{format_bits, parse_bits};
use crate::error::{Error, Result};

/// Bits on the wire as a `'0'/'1'` string.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString(pub Vec<u8>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_bits(&self.0))
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_bits(&s).map(BitString).map_err(serde::de::Error::custom)
    }
}

/// Per-position correction letter. `S` means the code's logical-S phase gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhysicalOp {
    I,
    S,
    X,
    Z,
}

impl PhysicalOp {
    pub fn as_char(self) -> char {
        match self {
            PhysicalOp::I => 'I',
            PhysicalOp::S => 'S',
            PhysicalOp::X => 'X',
            PhysicalOp::Z => 'Z',
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpString(pub Vec<PhysicalOp>);

impl OpString {
    pub fn identity(len: usize) -> Self {
        OpString(vec![PhysicalOp::I; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for OpString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|op| write!(f, "{}", op.as_char()))
    }
}

impl FromStr for OpString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(PhysicalOp::I),
                'S' => Ok(PhysicalOp::S),
                'X' => Ok(PhysicalOp::X),
                'Z' => Ok(PhysicalOp::Z),
                other => Err(Error::malformed(format!("op string contains {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(OpString)
    }
}

impl Serialize for OpString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OpString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything exchanged between client and server.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassicalMessage {
    TGateCount {
        r: usize,
        zero_count: usize,
        plus_count: usize,
    },
    MeasurementReport {
        block_id: u64,
        bits: BitString,
    },
    CorrectionInstruction {
        block_id: u64,
        ops: OpString,
    },
    SyndromeReport {
        block_id: u64,
        x_bits: BitString,
        z_bits: BitString,
    },
    Ack,
    /// Encrypted registers in transit: inputs, ancillas, or outputs.
    QuantumTransfer {
        ciphertexts: Vec<Ciphertext>,
    },
}

impl ClassicalMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassicalMessage::TGateCount { .. } => "t_gate_count",
            ClassicalMessage::MeasurementReport { .. } => "measurement_report",
            ClassicalMessage::CorrectionInstruction { .. } => "correction_instruction",
            ClassicalMessage::SyndromeReport { .. } => "syndrome_report",
            ClassicalMessage::Ack => "ack",
            ClassicalMessage::QuantumTransfer { .. } => "quantum_transfer",
        }
    }

    /// One JSON line, without the trailing newline.
    pub fn to_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line.trim_end()).map_err(|e| Error::malformed(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format_field_names() {
        let msg = ClassicalMessage::MeasurementReport {
            block_id: 4,
            bits: BitString(vec![0, 1, 1]),
        };
        assert_eq!(msg.to_line().unwrap(), r#"{"type":"measurement_report","block_id":4,"bits":"011"}"#);
        let msg = ClassicalMessage::CorrectionInstruction {
            block_id: 0,
            ops: "ISXZ".parse().unwrap(),
        };
        assert_eq!(msg.to_line().unwrap(), r#"{"type":"correction_instruction","block_id":0,"ops":"ISXZ"}"#);
        assert_eq!(ClassicalMessage::Ack.to_line().unwrap(), r#"{"type":"ack"}"#);
        let count = ClassicalMessage::TGateCount {
            r: 2,
            zero_count: 1,
            plus_count: 1,
        };
        assert_eq!(count.to_line().unwrap(), r#"{"type":"t_gate_count","r":2,"zero_count":1,"plus_count":1}"#);
    }

    #[test]
    fn round_trips() {
        let msgs = [
            ClassicalMessage::SyndromeReport {
                block_id: 9,
                x_bits: BitString(vec![1, 0]),
                z_bits: BitString(vec![0, 0]),
            },
            ClassicalMessage::QuantumTransfer {
                ciphertexts: vec![Ciphertext::empty()],
            },
        ];
        for m in msgs {
            assert_eq!(ClassicalMessage::from_line(&m.to_line().unwrap()).unwrap(), m);
        }
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            r#"{"type":"nope"}"#,
            r#"{"type":"measurement_report","block_id":0,"bits":"012"}"#,
            r#"{"type":"correction_instruction","block_id":0,"ops":"IY"}"#,
            "not json",
        ] {
            assert!(matches!(ClassicalMessage::from_line(bad), Err(Error::Malformed(_))), "{bad}");
        }
    }
}
