use std::collections::HashMap;

use serde::Serialize;

/// Two-mode occupation states with `n₁ + n₂ ≤ cutoff`, ordered by total
/// occupation and then by `n₁`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FockBasis {
    cutoff: u64,
    states: Vec<(u64, u64)>,
    #[serde(skip)]
    index: HashMap<(u64, u64), usize>,
}

impl FockBasis {
    pub fn new(cutoff: u64) -> Self {
        let mut states = Vec::with_capacity(((cutoff + 1) * (cutoff + 2) / 2) as usize);
        for total in 0..=cutoff {
            for n1 in 0..=total {
                states.push((n1, total - n1));
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        FockBasis { cutoff, states, index }
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> (u64, u64) {
        self.states[i]
    }

    pub fn states(&self) -> &[(u64, u64)] {
        &self.states
    }

    pub fn index_of(&self, n1: u64, n2: u64) -> Option<usize> {
        self.index.get(&(n1, n2)).copied()
    }

    pub fn total(&self, i: usize) -> u64 {
        let (a, b) = self.states[i];
        a + b
    }

    /// States two or more steps below the cutoff, where products of two
    /// ladder operators are represented without truncation error.
    pub fn is_interior(&self, i: usize) -> bool {
        self.total(i) + 2 <= self.cutoff
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(|&i| self.is_interior(i))
    }

    /// Indices of the states with `n₁ + n₂ = total`, in increasing `n₁`.
    pub fn shell(&self, total: u64) -> std::ops::Range<usize> {
        let start = (total * (total + 1) / 2) as usize;
        start..start + total as usize + 1
    }
}
