use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicalGateKind {
    X,
    Z,
    H,
    S,
    T,
    #[serde(rename = "CNOT")]
    Cnot,
}

impl LogicalGateKind {
    pub fn arity(self) -> usize {
        match self {
            LogicalGateKind::Cnot => 2,
            _ => 1,
        }
    }
}

impl FromStr for LogicalGateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "X" => Ok(LogicalGateKind::X),
            "Z" => Ok(LogicalGateKind::Z),
            "H" => Ok(LogicalGateKind::H),
            "S" => Ok(LogicalGateKind::S),
            "T" => Ok(LogicalGateKind::T),
            "CNOT" | "CX" => Ok(LogicalGateKind::Cnot),
            other => Err(Error::malformed(format!("unknown logical gate {other:?}"))),
        }
    }
}

impl fmt::Display for LogicalGateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogicalGateKind::X => "X",
            LogicalGateKind::Z => "Z",
            LogicalGateKind::H => "H",
            LogicalGateKind::S => "S",
            LogicalGateKind::T => "T",
            LogicalGateKind::Cnot => "CNOT",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalGate {
    pub gate: LogicalGateKind,
    /// For CNOT, `wires[0]` is the control.
    pub wires: Vec<usize>,
}

/// A sequence of logical gates on `num_wires` encrypted qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub num_wires: usize,
    pub gates: Vec<LogicalGate>,
}

impl LogicalCircuit {
    pub fn new(num_wires: usize, gates: Vec<LogicalGate>) -> Result<Self> {
        if num_wires == 0 {
            return Err(Error::contract("circuit needs at least one wire"));
        }
        for (i, g) in gates.iter().enumerate() {
            if g.wires.len() != g.gate.arity() {
                return Err(Error::contract(format!(
                    "gate {i} ({}) has {} wires",
                    g.gate,
                    g.wires.len()
                )));
            }
            if let Some(&w) = g.wires.iter().find(|&&w| w >= num_wires) {
                return Err(Error::contract(format!("gate {i} uses wire {w} of {num_wires}")));
            }
            if g.gate == LogicalGateKind::Cnot && g.wires[0] == g.wires[1] {
                return Err(Error::contract(format!("gate {i}: CNOT control equals target")));
            }
        }
        Ok(LogicalCircuit { num_wires, gates })
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.gate == LogicalGateKind::T).count()
    }

    /// Parses the text format: an optional `wires N` line, then one gate per
    /// line (`H 0`, `CNOT 0 1`). `#` starts a comment. Without a `wires` line
    /// the wire count is one more than the largest wire used.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or_default();
            let rest: Vec<&str> = words.collect();
            let bad = |msg: String| Error::malformed(format!("line {}: {msg}", lineno + 1));
            if head.eq_ignore_ascii_case("wires") {
                let [n] = rest.as_slice() else {
                    return Err(bad("expected `wires N`".into()));
                };
                declared = Some(n.parse::<usize>().map_err(|e| bad(e.to_string()))?);
                continue;
            }
            let gate: LogicalGateKind = head.parse().map_err(|e: Error| bad(e.to_string()))?;
            let wires = rest
                .iter()
                .map(|w| w.parse::<usize>().map_err(|e| bad(format!("wire {w:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            gates.push(LogicalGate { gate, wires });
        }
        let used = gates.iter().flat_map(|g| g.wires.iter().map(|w| w + 1)).max().unwrap_or(1);
        LogicalCircuit::new(declared.unwrap_or(used), gates)
    }
}

impl fmt::Display for LogicalCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wires {}", self.num_wires)?;
        for g in &self.gates {
            write!(f, "{}", g.gate)?;
            for w in &g.wires {
                write!(f, " {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let c = LogicalCircuit::parse("# bell\nH 0\nCNOT 0 1\n\nt 1  # trailing\n").unwrap();
        assert_eq!(c.num_wires, 2);
        assert_eq!(c.gates.len(), 3);
        assert_eq!(c.t_count(), 1);
        assert_eq!(LogicalCircuit::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn declared_wires() {
        let c = LogicalCircuit::parse("wires 3\nX 0").unwrap();
        assert_eq!(c.num_wires, 3);
        assert!(LogicalCircuit::parse("wires 1\nX 1").is_err());
    }

    #[test]
    fn rejects_bad_gates() {
        assert!(matches!(LogicalCircuit::parse("Q 0"), Err(Error::Malformed(_))));
        assert!(LogicalCircuit::parse("CNOT 0").is_err());
        assert!(LogicalCircuit::parse("CNOT 1 1").is_err());
        assert!(LogicalCircuit::parse("H x").is_err());
    }
}
