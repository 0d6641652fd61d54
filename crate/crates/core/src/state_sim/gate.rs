use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::css_code::Pauli;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "SWAP")]
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn inverse(self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            other => other,
        }
    }

    pub fn from_pauli(p: Pauli) -> Option<GateKind> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(GateKind::X),
            Pauli::Y => Some(GateKind::Y),
            Pauli::Z => Some(GateKind::Z),
        }
    }

    /// 2x2 unitary, row-major, for single-qubit kinds.
    pub fn matrix(self) -> Option<[Complex64; 4]> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        let h = c(FRAC_1_SQRT_2, 0.0);
        let t = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        Some(match self {
            GateKind::X => [o, l, l, o],
            GateKind::Y => [o, c(0.0, -1.0), c(0.0, 1.0), o],
            GateKind::Z => [l, o, o, -l],
            GateKind::H => [h, h, h, -h],
            GateKind::S => [l, o, o, c(0.0, 1.0)],
            GateKind::Sdg => [l, o, o, c(0.0, -1.0)],
            GateKind::T => [l, o, o, t],
            GateKind::Tdg => [l, o, o, t.conj()],
            GateKind::Cnot | GateKind::Swap => return None,
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
        };
        f.write_str(s)
    }
}

/// A gate on physical positions. For CNOT, `targets[0]` is the control.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOp {
    #[serde(rename = "gate")]
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        let op = GateOp { kind, targets };
        op.check()?;
        Ok(op)
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        GateOp {
            kind,
            targets: vec![target],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::Cnot,
            targets: vec![control, target],
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        GateOp {
            kind: GateKind::Swap,
            targets: vec![a, b],
        }
    }

    pub fn inverse(&self) -> GateOp {
        GateOp {
            kind: self.kind.inverse(),
            targets: self.targets.clone(),
        }
    }

    /// Same gate with every target mapped through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> GateOp {
        GateOp {
            kind: self.kind,
            targets: self.targets.iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::contract(format!(
                "{} takes {} target(s), got {}",
                self.kind,
                self.kind.arity(),
                self.targets.len()
            )));
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::contract(format!("{} targets must be distinct", self.kind)));
        }
        Ok(())
    }
}
