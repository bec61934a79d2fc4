//! Decision and search procedures for COSET WEIGHT and SUBSPACE WEIGHT.

mod exhaustive;
mod prange;

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use crate::gf2::{BitMatrix, BitVector};
use crate::reductions::SdInstance;

pub use exhaustive::{
    enumerate_coset_solutions, solve_coset_exhaustive, solve_exhaustive, solve_subspace_exhaustive,
    ExhaustiveConfig,
};
pub use prange::{prange_candidates, solve_prange, PrangeConfig};

/// A word `y`, given by its sorted support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution {
    support: Vec<usize>,
}

impl Solution {
    pub fn new(mut support: Vec<usize>) -> Self {
        support.sort_unstable();
        support.dedup();
        Solution { support }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn verifies(&self, inst: &SdInstance) -> bool {
        inst.accepts(&self.support)
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.support {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// Result of a solver run. `Absent` is a certificate of non-existence and is
/// only produced by complete enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Found(Solution),
    Absent,
    Exhausted,
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutcome::Found(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for SolveOutcome {
    /// Solution file format: the support on one line, or `UNSAT` /
    /// `EXHAUSTED`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveOutcome::Found(s) => writeln!(f, "{s}"),
            SolveOutcome::Absent => writeln!(f, "UNSAT"),
            SolveOutcome::Exhausted => writeln!(f, "EXHAUSTED"),
        }
    }
}

impl FromStr for SolveOutcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let line = lines.next().unwrap_or("").trim();
        if lines.any(|l| !l.trim().is_empty()) {
            return Err("solution file has more than one line".into());
        }
        match line {
            "UNSAT" => Ok(SolveOutcome::Absent),
            "EXHAUSTED" => Ok(SolveOutcome::Exhausted),
            _ => {
                let support = line
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<usize>()
                            .map_err(|_| format!("bad index {tok:?}"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let sol = Solution::new(support.clone());
                if sol.support() != support {
                    return Err("indices must be sorted and distinct".into());
                }
                Ok(SolveOutcome::Found(sol))
            }
        }
    }
}

/// How an enumeration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationEnd {
    Complete,
    Stopped,
    BudgetHit,
}

/// Visits every support of size `k` for `k` in `weights`, in increasing size
/// then lexicographic order, together with its syndrome. At most `budget`
/// supports are visited. Returns the number visited and how the walk ended.
pub fn enumerate_supports<F>(
    h: &BitMatrix,
    weights: std::ops::RangeInclusive<usize>,
    budget: u64,
    mut visit: F,
) -> (u64, EnumerationEnd)
where
    F: FnMut(&[usize], &BitVector) -> ControlFlow<()>,
{
    let n = h.n();
    let mut checked = 0u64;
    let (lo, hi) = (*weights.start(), (*weights.end()).min(n));
    for k in lo..=hi {
        // partial[d] is the sum of the first d chosen rows
        let mut partial = vec![BitVector::zeros(h.r()); k + 1];
        let mut idx: Vec<usize> = (0..k).collect();
        for d in 0..k {
            let mut next = partial[d].clone();
            next.xor_assign(h.row(idx[d]));
            partial[d + 1] = next;
        }
        loop {
            if checked == budget {
                return (checked, EnumerationEnd::BudgetHit);
            }
            checked += 1;
            if visit(&idx, &partial[k]).is_break() {
                return (checked, EnumerationEnd::Stopped);
            }
            let Some(j) = (0..k).rev().find(|&j| idx[j] < n - k + j) else {
                break;
            };
            idx[j] += 1;
            for l in j + 1..k {
                idx[l] = idx[l - 1] + 1;
            }
            for d in j..k {
                let (head, tail) = partial.split_at_mut(d + 1);
                tail[0].clone_from(&head[d]);
                tail[0].xor_assign(h.row(idx[d]));
            }
        }
    }
    (checked, EnumerationEnd::Complete)
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solution_file_round_trip() {
        for text in ["0 3 4\n", "\n", "UNSAT\n", "EXHAUSTED\n"] {
            let o: SolveOutcome = text.parse().unwrap();
            assert_eq!(o.to_string(), text);
        }
        assert_eq!(
            "".parse::<SolveOutcome>().unwrap(),
            SolveOutcome::Found(Solution::new(vec![]))
        );
        assert!("3 0".parse::<SolveOutcome>().is_err());
        assert!("1 1".parse::<SolveOutcome>().is_err());
        assert!("x".parse::<SolveOutcome>().is_err());
    }

    #[test]
    fn support_enumeration_order_and_sums() {
        let h: BitMatrix = "4 3\n100\n010\n001\n111\n".parse().unwrap();
        let mut seen = Vec::new();
        let (checked, end) = enumerate_supports(&h, 0..=2, u64::MAX, |s, sum| {
            assert_eq!(*sum, h.syndrome(s).unwrap());
            seen.push(s.to_vec());
            ControlFlow::Continue(())
        });
        assert_eq!(end, EnumerationEnd::Complete);
        assert_eq!(checked, 1 + 4 + 6);
        assert_eq!(seen[0], Vec::<usize>::new());
        assert_eq!(seen[1..5], [vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(seen[5], vec![0, 1]);
        assert_eq!(seen[10], vec![2, 3]);

        let (checked, end) = enumerate_supports(&h, 1..=4, 3, |_, _| ControlFlow::Continue(()));
        assert_eq!((checked, end), (3, EnumerationEnd::BudgetHit));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(64, 4), 635_376);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10_000, 5_000), u128::MAX);
    }
}
