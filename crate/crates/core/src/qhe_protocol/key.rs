use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Secret permutation key: code qubit `i` sits at `slots[i]` inside group `i`
/// of `2m` physical positions. Equivalent to a one-hot `κ_i` of length `2m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationKey {
    m: usize,
    slots: Vec<usize>,
}

impl PermutationKey {
    pub fn new(m: usize, slots: Vec<usize>) -> Result<Self> {
        if m == 0 || slots.is_empty() {
            return Err(Error::contract("key needs m >= 1 and n >= 1"));
        }
        if let Some(&bad) = slots.iter().find(|&&s| s >= 2 * m) {
            return Err(Error::contract(format!("slot {bad} outside group of size {}", 2 * m)));
        }
        Ok(PermutationKey { m, slots })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn group_size(&self) -> usize {
        2 * self.m
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// Position of code qubit `group` within a block laid out group-major.
    pub fn code_position(&self, group: usize) -> usize {
        group * self.group_size() + self.slots[group]
    }

    /// One-hot `κ_i` bit strings.
    pub fn one_hot(&self) -> Vec<Vec<u8>> {
        self.slots
            .iter()
            .map(|&s| (0..self.group_size()).map(|j| u8::from(j == s)).collect())
            .collect()
    }

    /// `(2m)^n`, or `None` on overflow.
    pub fn key_space_size(&self) -> Option<u128> {
        key_space_size(self.m, self.n())
    }

    /// Every key for `(m, n)`, in lexicographic order of slots.
    pub fn enumerate(m: usize, n: usize) -> Result<Vec<PermutationKey>> {
        let count = key_space_size(m, n)
            .filter(|&c| c <= 1 << 24)
            .ok_or_else(|| Error::contract(format!("key space for m={m}, n={n} too large to enumerate")))?;
        let g = 2 * m;
        Ok((0..count as usize)
            .map(|mut idx| {
                let slots = (0..n)
                    .map(|_| {
                        let s = idx % g;
                        idx /= g;
                        s
                    })
                    .collect();
                PermutationKey { m, slots }
            })
            .collect())
    }
}

pub fn key_space_size(m: usize, n: usize) -> Option<u128> {
    (2 * m as u128).checked_pow(u32::try_from(n).ok()?)
}

/// Draws every slot independently and uniformly from `0..2m`.
pub fn keygen<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<PermutationKey> {
    if m == 0 || n == 0 {
        return Err(Error::contract("keygen needs m >= 1 and n >= 1"));
    }
    let slots = (0..n).map(|_| rng.gen_range(0..2 * m)).collect();
    PermutationKey::new(m, slots)
}
