//! Lifting SD solutions back to matchings, and empirical soundness checks of
//! the reductions on small instances.

use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::gf2::Gf2Error;
use crate::reductions::{
    reduce, ReductionError, ReductionKind, ReductionRecord, ReductionRequest, SdInstance,
};
use crate::solvers::{
    binomial, enumerate_coset_solutions, enumerate_supports, prange_candidates, solve_exhaustive,
    solve_prange, EnumerationEnd, ExhaustiveConfig, PrangeConfig, Solution, SolveOutcome,
};
use crate::tdm::{Matching, TdmError, TdmInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("solution does not fit the record: {0}")]
    Shape(String),
    #[error("expected a {expected} record, got {found}")]
    WrongKind {
        expected: ReductionKind,
        found: ReductionKind,
    },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Tdm(#[from] TdmError),
}

/// Maps the triple rows of `sol` back to source triples. Returns `None` when
/// they do not form a matching of the original instance.
pub fn lift_solution(
    rec: &ReductionRecord,
    sol: &Solution,
) -> Result<Option<Matching>, VerifyError> {
    if let Some(&i) = sol.support().iter().find(|&&i| i >= rec.n) {
        return Err(VerifyError::Shape(format!("row {i} beyond n = {}", rec.n)));
    }
    let triples = sol
        .support()
        .iter()
        .filter(|i| rec.triple_rows.contains(i))
        .map(|i| i - rec.triple_rows.start)
        .collect();
    Ok(Matching::new(&rec.source, triples)?)
}

/// The reduced-instance solution a matching maps to.
pub fn embed_matching(rec: &ReductionRecord, m: &Matching) -> Solution {
    let rows = m.indices().iter().map(|i| rec.triple_rows.start + i);
    match rec.kind {
        ReductionKind::Coset | ReductionKind::Gpsd | ReductionKind::GenericPsd => {
            Solution::new(rows.collect())
        }
        ReductionKind::Bmvt => {
            // the selected top rows sum to all ones on A and on their own
            // segments; the identity rows cancel exactly those columns
            let t3 = 3 * rec.source.t();
            let base = rec.identity_rows.start;
            let mut support: Vec<usize> = rows.collect();
            support.extend((0..t3).map(|j| base + j));
            for &i in m.indices() {
                support.extend((t3 * (i + 1)..t3 * (i + 2)).map(|j| base + j));
            }
            Solution::new(support)
        }
        ReductionKind::Compact | ReductionKind::Gpsw | ReductionKind::GenericPsw => {
            let mut support: Vec<usize> = rows.collect();
            support.extend(rec.nu_row);
            support.extend(rec.parity_row);
            Solution::new(support)
        }
    }
}

fn lifts(rec: &ReductionRecord, support: &[usize]) -> bool {
    matches!(
        lift_solution(rec, &Solution::new(support.to_vec())),
        Ok(Some(_))
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sound,
    Unsound,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Kind-specific search for known spurious patterns.
    Probe,
    FullNullspace,
    ExhaustiveWeight,
    Sampled,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sound => "sound",
            Verdict::Unsound => "unsound",
            Verdict::Unknown => "unknown",
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Probe => "probe",
            Method::FullNullspace => "full-nullspace",
            Method::ExhaustiveWeight => "exhaustive-weight",
            Method::Sampled => "sampled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessReport {
    pub verdict: Verdict,
    pub method: Method,
    /// Candidate solutions examined by `method`.
    pub checked: u64,
    /// A verifying solution that does not lift; present iff unsound.
    pub witness: Option<Solution>,
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict {}", self.verdict)?;
        writeln!(f, "method {}", self.method)?;
        writeln!(f, "checked {}", self.checked)?;
        match &self.witness {
            Some(w) if w.weight() > 0 => writeln!(f, "witness {w}"),
            Some(_) => writeln!(f, "witness"),
            None => writeln!(f, "witness -"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoundnessConfig {
    /// Maximum supports examined by exhaustive enumeration and by probes.
    pub budget: u64,
    pub nullspace_dim_cap: usize,
    /// Prange iterations for the sampled fallback.
    pub samples: u64,
    pub seed: u64,
    pub probes: bool,
}

impl Default for SoundnessConfig {
    fn default() -> Self {
        SoundnessConfig {
            budget: 10_000_000,
            nullspace_dim_cap: 20,
            samples: 100_000,
            seed: 0,
            probes: true,
        }
    }
}

/// Searches for solutions of `inst` that do not lift through `rec`.
///
/// Order: kind-specific probes, then the cheapest complete enumeration that
/// fits the budget, then Prange sampling (which can only report unknown).
pub fn check_soundness(
    inst: &SdInstance,
    rec: &ReductionRecord,
    cfg: &SoundnessConfig,
) -> Result<SoundnessReport, VerifyError> {
    if inst.h().n() != rec.n || inst.h().r() != rec.r || inst.w() != rec.w {
        return Err(VerifyError::Shape(format!(
            "instance is {}x{} with w = {}, record says {}x{} with w = {}",
            inst.h().n(),
            inst.h().r(),
            inst.w(),
            rec.n,
            rec.r,
            rec.w
        )));
    }
    let unsound = |method, checked, witness: Vec<usize>| SoundnessReport {
        verdict: Verdict::Unsound,
        method,
        checked,
        witness: Some(Solution::new(witness)),
    };
    if cfg.probes {
        if let Some((checked, witness)) = probe(inst, rec, cfg) {
            return Ok(unsound(Method::Probe, checked, witness));
        }
    }
    let h = inst.h();
    let dim = h.nullspace_dim();
    let cap = cfg.nullspace_dim_cap.min(62);
    let fits_nullspace = dim <= cap && (1u64 << dim) <= cfg.budget;
    let mut witness = None;
    let mut scan = |support: &[usize]| {
        if lifts(rec, support) {
            ControlFlow::Continue(())
        } else {
            witness = Some(support.to_vec());
            ControlFlow::Break(())
        }
    };
    let (method, checked, end) = match inst {
        SdInstance::Coset(c) => {
            let lo = usize::from(!c.syndrome().is_zero());
            let total: u128 = (lo..=c.w().min(h.n())).map(|k| binomial(h.n(), k)).sum();
            if total <= u128::from(cfg.budget) {
                let (checked, end) = enumerate_coset_solutions(c, cfg.budget, &mut scan);
                (Method::ExhaustiveWeight, checked, end)
            } else if fits_nullspace {
                let mut end = EnumerationEnd::Complete;
                if let Some(x0) = h.solve_left(c.syndrome()) {
                    let basis = h.left_nullspace_basis();
                    for mask in 0u64..1 << dim {
                        let mut x = x0.clone();
                        for (i, b) in basis.iter().enumerate() {
                            if mask >> i & 1 == 1 {
                                x.xor_assign(b);
                            }
                        }
                        if x.weight() <= c.w() && scan(&x.support()).is_break() {
                            end = EnumerationEnd::Stopped;
                            break;
                        }
                    }
                }
                (Method::FullNullspace, 1u64 << dim, end)
            } else {
                sampled(inst, cfg, &mut scan)
            }
        }
        SdInstance::Subspace(s) => {
            if fits_nullspace {
                let mut end = EnumerationEnd::Complete;
                h.for_each_nullspace_word(cap, |word| {
                    if word.weight() == s.w() && scan(&word.support()).is_break() {
                        end = EnumerationEnd::Stopped;
                        return false;
                    }
                    true
                })?;
                (Method::FullNullspace, 1u64 << dim, end)
            } else if binomial(h.n(), s.w()) <= u128::from(cfg.budget) {
                let (checked, end) =
                    enumerate_supports(h, s.w()..=s.w(), cfg.budget, |sup, sum| {
                        if sum.is_zero() {
                            scan(sup)
                        } else {
                            ControlFlow::Continue(())
                        }
                    });
                (Method::ExhaustiveWeight, checked, end)
            } else {
                sampled(inst, cfg, &mut scan)
            }
        }
    };
    Ok(match (witness, end) {
        (Some(w), _) => unsound(method, checked, w),
        (None, EnumerationEnd::Complete) if method != Method::Sampled => SoundnessReport {
            verdict: Verdict::Sound,
            method,
            checked,
            witness: None,
        },
        (None, _) => SoundnessReport {
            verdict: Verdict::Unknown,
            method,
            checked,
            witness: None,
        },
    })
}

fn sampled<F>(
    inst: &SdInstance,
    cfg: &SoundnessConfig,
    scan: &mut F,
) -> (Method, u64, EnumerationEnd)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let checked = prange_candidates(inst, cfg.seed, cfg.samples, scan);
    (Method::Sampled, checked, EnumerationEnd::BudgetHit)
}

/// Known spurious patterns. Returns the number of candidates examined and a
/// non-lifting solution, if one is found.
fn probe(
    inst: &SdInstance,
    rec: &ReductionRecord,
    cfg: &SoundnessConfig,
) -> Option<(u64, Vec<usize>)> {
    match rec.kind {
        ReductionKind::Gpsw | ReductionKind::GenericPsw => probe_padding(inst, rec, cfg),
        ReductionKind::Bmvt => probe_bmvt(inst, rec, cfg),
        _ => None,
    }
}

/// Zero-sum combinations of padding rows, alone (exactly `w` of them) or
/// completed by a low-weight codeword of the unpadded rows.
fn probe_padding(
    inst: &SdInstance,
    rec: &ReductionRecord,
    cfg: &SoundnessConfig,
) -> Option<(u64, Vec<usize>)> {
    let (h, w) = (inst.h(), inst.w());
    let pad = rec.padding_rows.clone();
    if pad.is_empty() {
        return None;
    }
    let block = h.select_rows(pad.clone());
    let mut checked = 0;
    {
        let mut found = None;
        let (c, _) = enumerate_supports(&block, w..=w, cfg.budget, |sup, sum| {
            if sum.is_zero() {
                found = Some(sup.iter().map(|i| pad.start + i).collect::<Vec<_>>());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        checked += c;
        if let Some(f) = found.filter(|f| inst.accepts(f) && !lifts(rec, f)) {
            return Some((checked, f));
        }
    }
    let dim = block.nullspace_dim();
    if dim == 0 || dim > cfg.nullspace_dim_cap.min(62) || (1u64 << dim) > cfg.budget {
        return None;
    }
    let base_rows: Vec<usize> = (0..h.n()).filter(|i| !pad.contains(i)).collect();
    let mut completions: HashMap<usize, Option<Vec<usize>>> = HashMap::new();
    let mut found = None;
    block
        .for_each_nullspace_word(dim, |word| {
            let k = word.weight();
            if k == 0 || k > w {
                return true;
            }
            checked += 1;
            let rest = completions
                .entry(w - k)
                .or_insert_with(|| base_codeword(inst, &base_rows, w - k, cfg.budget));
            if let Some(rest) = rest {
                let mut support: Vec<usize> = word.iter_ones().map(|i| pad.start + i).collect();
                support.extend(rest.iter().copied());
                support.sort_unstable();
                if inst.accepts(&support) && !lifts(rec, &support) {
                    found = Some(support);
                    return false;
                }
            }
            true
        })
        .expect("dimension within cap");
    found.map(|f| (checked, f))
}

/// A zero-sum set of exactly `j` rows drawn from `rows`: disjoint duplicate
/// pairs for even `j`, otherwise a bounded exhaustive search.
fn base_codeword(inst: &SdInstance, rows: &[usize], j: usize, budget: u64) -> Option<Vec<usize>> {
    if j == 0 {
        return Some(Vec::new());
    }
    let h = inst.h();
    if j.is_multiple_of(2) {
        let mut first: HashMap<_, usize> = HashMap::new();
        let mut pairs = Vec::new();
        for &i in rows {
            match first.remove(h.row(i)) {
                Some(p) => pairs.extend([p, i]),
                None => {
                    first.insert(h.row(i), i);
                }
            }
            if pairs.len() == j {
                return Some(pairs);
            }
        }
    }
    if binomial(rows.len(), j) > u128::from(budget) {
        return None;
    }
    let sub =
        crate::gf2::BitMatrix::from_rows(h.r(), rows.iter().map(|&i| h.row(i).clone()).collect())
            .expect("rows of h");
    let mut found = None;
    enumerate_supports(&sub, j..=j, budget, |sup, sum| {
        if sum.is_zero() {
            found = Some(sup.iter().map(|&i| rows[i]).collect());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

/// Near-miss top-row counts: each set of `α` top rows extends to exactly one
/// codeword (the identity rows cancel its sum), spurious when its weight is
/// `w` but `α ≠ t`.
fn probe_bmvt(
    inst: &SdInstance,
    rec: &ReductionRecord,
    cfg: &SoundnessConfig,
) -> Option<(u64, Vec<usize>)> {
    let t = rec.source.t();
    let top = inst.h().select_rows(rec.triple_rows.clone());
    let mut checked = 0;
    for alpha in [t.saturating_sub(1), t + 1] {
        if alpha == 0 {
            continue;
        }
        let mut found = None;
        let (c, _) = enumerate_supports(&top, alpha..=alpha, cfg.budget, |sup, sum| {
            if sup.len() + sum.weight() == inst.w() {
                let mut support: Vec<usize> =
                    sup.iter().map(|i| rec.triple_rows.start + i).collect();
                support.extend(sum.iter_ones().map(|j| rec.identity_rows.start + j));
                found = Some(support);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        checked += c;
        if let Some(f) = found.filter(|f| inst.accepts(f) && !lifts(rec, f)) {
            return Some((checked, f));
        }
    }
    None
}

/// Result of checking the bottom-block counting bound on every nonzero
/// codeword of a bmvt gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingReport {
    pub words: u64,
    pub first_violation: Option<Solution>,
}

impl CountingReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// For every nonzero codeword with `α` top rows, the number of bottom rows
/// lies in `[3αt, 3αt + 3α]`.
pub fn check_counting_bound(
    inst: &SdInstance,
    rec: &ReductionRecord,
    max_dim: usize,
) -> Result<CountingReport, VerifyError> {
    if rec.kind != ReductionKind::Bmvt {
        return Err(VerifyError::WrongKind {
            expected: ReductionKind::Bmvt,
            found: rec.kind,
        });
    }
    let t = rec.source.t();
    let mut words = 0;
    let mut first_violation = None;
    inst.h().for_each_nullspace_word(max_dim, |word| {
        if word.is_zero() {
            return true;
        }
        words += 1;
        let alpha = rec.triple_rows.clone().filter(|&i| word.get(i)).count();
        let bottom = rec.identity_rows.clone().filter(|&i| word.get(i)).count();
        if bottom < 3 * alpha * t || bottom > 3 * alpha * t + 3 * alpha {
            first_violation = Some(Solution::new(word.support()));
            return false;
        }
        true
    })?;
    Ok(CountingReport {
        words,
        first_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Exhaustive(ExhaustiveConfig),
    Prange(PrangeConfig),
}

impl SolverChoice {
    pub fn solve(&self, inst: &SdInstance) -> SolveOutcome {
        match self {
            SolverChoice::Exhaustive(cfg) => solve_exhaustive(inst, cfg),
            SolverChoice::Prange(cfg) => match solve_prange(inst, cfg) {
                Some(sol) => SolveOutcome::Found(sol),
                None => SolveOutcome::Exhausted,
            },
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, SolverChoice::Exhaustive(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundtripVerdict {
    /// A solution was found and lifts to a matching.
    Solved,
    /// The complete solver found nothing and neither did the 3DM solver.
    AgreeUnsolvable,
    /// No solution found within budget.
    Unknown,
    /// A verifying solution did not lift.
    LiftFailed,
    /// The complete solver reported absence but the 3DM instance is
    /// solvable.
    Disagree,
}

impl fmt::Display for RoundtripVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundtripVerdict::Solved => "solved",
            RoundtripVerdict::AgreeUnsolvable => "agree-unsolvable",
            RoundtripVerdict::Unknown => "unknown",
            RoundtripVerdict::LiftFailed => "lift-failed",
            RoundtripVerdict::Disagree => "disagree",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundtripReport {
    pub verdict: RoundtripVerdict,
    pub outcome: SolveOutcome,
    pub matching: Option<Matching>,
    /// Solvability according to the 3DM solver; only computed for complete
    /// SD solvers.
    pub tdm_solvable: Option<bool>,
}

/// Reduce, solve, lift, and (for complete solvers) compare with the 3DM
/// solver.
pub fn verify_roundtrip(
    inst: &TdmInstance,
    req: &ReductionRequest,
    solver: &SolverChoice,
) -> Result<RoundtripReport, ReductionError> {
    let red = reduce(inst, req)?;
    let outcome = solver.solve(&red.instance);
    let tdm_solvable = solver.is_complete().then(|| inst.solve().is_some());
    let (verdict, matching) = match &outcome {
        SolveOutcome::Found(sol) => match lift_solution(&red.record, sol) {
            Ok(Some(m)) => (RoundtripVerdict::Solved, Some(m)),
            _ => (RoundtripVerdict::LiftFailed, None),
        },
        SolveOutcome::Absent if tdm_solvable == Some(false) => {
            (RoundtripVerdict::AgreeUnsolvable, None)
        }
        SolveOutcome::Absent => (RoundtripVerdict::Disagree, None),
        SolveOutcome::Exhausted => (RoundtripVerdict::Unknown, None),
    };
    Ok(RoundtripReport {
        verdict,
        outcome,
        matching,
        tdm_solvable,
    })
}
