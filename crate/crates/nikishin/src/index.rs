//! Multi-indices `n = (n₁, …, n_r)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    parts: Vec<usize>,
}

impl MultiIndex {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::SizeMismatch("multi-index needs at least one component".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0
    }

    /// Parity profile; zero components count as even.
    pub fn parity(&self) -> Parity {
        if self.parts.iter().all(|n| n % 2 == 1) {
            Parity::Odd
        } else if self.parts.iter().all(|n| n % 2 == 0) {
            Parity::Even
        } else {
            Parity::Mixed
        }
    }

    pub fn same_parity(&self) -> bool {
        self.parity() != Parity::Mixed
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] >= w[1])
    }

    /// `n_j ≥ max{n_{j+1}, …, n_r} − 1` for every j.
    pub fn satisfies_nikishin_condition(&self) -> bool {
        (0..self.parts.len()).all(|j| {
            let later = self.parts[j + 1..].iter().copied().max().unwrap_or(0);
            self.parts[j] + 1 >= later
        })
    }

    /// Same components in reverse order.
    pub fn reversed(&self) -> Self {
        Self { parts: self.parts.iter().rev().copied().collect() }
    }

    /// All nonzero indices with r components and total at most `max_total`,
    /// in lexicographic order.
    pub fn all_up_to(r: usize, max_total: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur = vec![0; r];
        fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if pos == cur.len() {
                if cur.iter().any(|&n| n > 0) {
                    out.push(MultiIndex { parts: cur.clone() });
                }
                return;
            }
            for v in 0..=left {
                cur[pos] = v;
                rec(pos + 1, left - v, cur, out);
            }
            cur[pos] = 0;
        }
        if r > 0 {
            rec(0, max_total, &mut cur, &mut out);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", s.join("|"))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Accepts `1|2|3` or `1,2,3`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(['|', ','])
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::SizeMismatch(format!("bad index component {p:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}
