use std::ops::ControlFlow;

use super::{binomial, enumerate_supports, EnumerationEnd, Solution, SolveOutcome};
use crate::reductions::{CosetInstance, SdInstance, SubspaceInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveConfig {
    /// Maximum number of supports (or nullspace words) examined.
    pub budget: u64,
    /// Largest nullspace dimension enumerated in full.
    pub nullspace_dim_cap: usize,
}

impl Default for ExhaustiveConfig {
    fn default() -> Self {
        ExhaustiveConfig {
            budget: 100_000_000,
            nullspace_dim_cap: 24,
        }
    }
}

/// Visits every solution of `inst` in increasing weight then lexicographic
/// order. Weight 0 is only considered when the syndrome is zero.
pub fn enumerate_coset_solutions<F>(
    inst: &CosetInstance,
    budget: u64,
    mut visit: F,
) -> (u64, EnumerationEnd)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let lo = usize::from(!inst.syndrome().is_zero());
    let target = inst.syndrome();
    enumerate_supports(inst.h(), lo..=inst.w(), budget, |support, sum| {
        if sum == target {
            visit(support)
        } else {
            ControlFlow::Continue(())
        }
    })
}

pub fn solve_coset_exhaustive(inst: &CosetInstance, cfg: &ExhaustiveConfig) -> SolveOutcome {
    let mut found = None;
    let (_, end) = enumerate_coset_solutions(inst, cfg.budget, |support| {
        found = Some(Solution::new(support.to_vec()));
        ControlFlow::Break(())
    });
    match (end, found) {
        (_, Some(sol)) => SolveOutcome::Found(sol),
        (EnumerationEnd::BudgetHit, None) => SolveOutcome::Exhausted,
        _ => SolveOutcome::Absent,
    }
}

/// Returns the lexicographically smallest weight-`w` codeword, scanning
/// either the whole nullspace or all weight-`w` supports, whichever is
/// smaller.
pub fn solve_subspace_exhaustive(inst: &SubspaceInstance, cfg: &ExhaustiveConfig) -> SolveOutcome {
    let (h, w) = (inst.h(), inst.w());
    if w > h.n() {
        return SolveOutcome::Absent;
    }
    let dim = h.nullspace_dim();
    let cap = cfg.nullspace_dim_cap.min(62);
    if dim <= cap {
        let words = 1u128 << dim;
        if words <= binomial(h.n(), w) && words <= u128::from(cfg.budget) {
            let mut best: Option<Vec<usize>> = None;
            h.for_each_nullspace_word(cap, |word| {
                if word.weight() == w {
                    let s = word.support();
                    if best.as_ref().is_none_or(|b| s < *b) {
                        best = Some(s);
                    }
                }
                true
            })
            .expect("dimension within cap");
            return best.map_or(SolveOutcome::Absent, |s| {
                SolveOutcome::Found(Solution::new(s))
            });
        }
    }
    let mut found = None;
    let (_, end) = enumerate_supports(h, w..=w, cfg.budget, |support, sum| {
        if sum.is_zero() {
            found = Some(Solution::new(support.to_vec()));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match (end, found) {
        (_, Some(sol)) => SolveOutcome::Found(sol),
        (EnumerationEnd::BudgetHit, None) => SolveOutcome::Exhausted,
        _ => SolveOutcome::Absent,
    }
}

pub fn solve_exhaustive(inst: &SdInstance, cfg: &ExhaustiveConfig) -> SolveOutcome {
    let out = match inst {
        SdInstance::Coset(c) => solve_coset_exhaustive(c, cfg),
        SdInstance::Subspace(s) => solve_subspace_exhaustive(s, cfg),
    };
    if let SolveOutcome::Found(sol) = &out {
        assert!(
            sol.verifies(inst),
            "exhaustive solver produced a non-solution"
        );
    }
    out
}
