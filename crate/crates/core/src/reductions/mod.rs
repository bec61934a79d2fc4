//! Matrix constructions reducing 3DM to syndrome decoding problems.
//!
//! Every construction returns the reduced instance together with a
//! [`ReductionRecord`] describing which rows of `H` correspond to triples and
//! which rows were added by the gadget, so that solutions can be lifted back.

pub mod expr;
mod generic;
mod instance;
mod record;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector};
use crate::tdm::TdmInstance;

pub use expr::ExprError;
pub use generic::{
    check_proposition_conditions, reduce_generic_psd, reduce_generic_psw, BoundCheck,
    ConstraintSpec, PointCheck, Proposition, PropositionReport,
};
pub use instance::{CosetInstance, SdInstance, SubspaceInstance};
pub use record::{PaddingStrategy, RecordError, ReductionKind, ReductionRecord};

/// Default ceiling on `m` when searching for Goppa proportions.
pub const DEFAULT_MAX_M: u32 = 20;
/// Default ceiling on the row count of generically padded instances.
pub const DEFAULT_MAX_N: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("{kind} reduction is inapplicable: {reason}")]
    Inapplicable { kind: ReductionKind, reason: String },
    #[error("no m <= {max_m} gives Goppa proportions for this instance")]
    NoFeasibleM { max_m: u32 },
    #[error("condition {bound} violated: {detail}")]
    ConditionViolated { bound: String, detail: String },
    #[error("{quantity} = {value} is not an integer")]
    NotInteger { quantity: String, value: String },
    #[error("{quantity} = {value} exceeds the configured limit {limit}")]
    BudgetExceeded {
        quantity: String,
        value: String,
        limit: u64,
    },
    #[error("constraint expression: {0}")]
    Expr(#[from] ExprError),
    #[error("{0} reduction needs a constraint spec")]
    MissingConstraint(ReductionKind),
}

/// A reduced instance with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub instance: SdInstance,
    pub record: ReductionRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddingOptions {
    pub strategy: PaddingStrategy,
    pub seed: u64,
}

impl Default for PaddingOptions {
    fn default() -> Self {
        PaddingOptions {
            strategy: PaddingStrategy::ZeroRows,
            seed: 0,
        }
    }
}

/// Everything needed to run any of the reductions.
#[derive(Debug, Clone)]
pub struct ReductionRequest {
    pub kind: ReductionKind,
    pub padding: PaddingOptions,
    pub max_m: u32,
    pub constraint: Option<ConstraintSpec>,
    pub max_n: u64,
}

impl ReductionRequest {
    pub fn new(kind: ReductionKind) -> Self {
        ReductionRequest {
            kind,
            padding: PaddingOptions::default(),
            max_m: DEFAULT_MAX_M,
            constraint: None,
            max_n: DEFAULT_MAX_N,
        }
    }

    pub fn with_padding(mut self, strategy: PaddingStrategy, seed: u64) -> Self {
        self.padding = PaddingOptions { strategy, seed };
        self
    }

    pub fn with_constraint(mut self, spec: ConstraintSpec) -> Self {
        self.constraint = Some(spec);
        self
    }
}

/// Runs the reduction selected by `req.kind`.
pub fn reduce(inst: &TdmInstance, req: &ReductionRequest) -> Result<Reduction, ReductionError> {
    fn pack<I: Into<SdInstance>>((i, record): (I, ReductionRecord)) -> Reduction {
        Reduction {
            instance: i.into(),
            record,
        }
    }
    let spec = || {
        req.constraint
            .as_ref()
            .ok_or(ReductionError::MissingConstraint(req.kind))
    };
    Ok(match req.kind {
        ReductionKind::Coset => pack(reduce_coset(inst)),
        ReductionKind::Bmvt => pack(reduce_subspace_bmvt(inst)?),
        ReductionKind::Compact => pack(reduce_subspace_compact(inst)?),
        ReductionKind::Gpsd => pack(reduce_gpsd(inst)?),
        ReductionKind::Gpsw => pack(reduce_gpsw(inst, req.padding, req.max_m)?),
        ReductionKind::GenericPsd => pack(reduce_generic_psd(inst, spec()?, req.max_n)?),
        ReductionKind::GenericPsw => {
            pack(reduce_generic_psw(inst, spec()?, req.padding, req.max_n)?)
        }
    })
}

/// The `u × 3t` incidence matrix: row `i` has ones at columns `a - 1`,
/// `t + b - 1` and `2t + c - 1` for triple `(a, b, c)`.
pub fn incidence_matrix(inst: &TdmInstance) -> BitMatrix {
    let t = inst.t();
    let rows = inst
        .triples()
        .iter()
        .map(|&[a, b, c]| BitVector::from_support(3 * t, &[a - 1, t + b - 1, 2 * t + c - 1]))
        .collect();
    BitMatrix::from_rows(3 * t, rows).expect("rows have length 3t")
}

fn base_record(
    kind: ReductionKind,
    inst: &TdmInstance,
    h: &BitMatrix,
    w: usize,
) -> ReductionRecord {
    ReductionRecord {
        kind,
        source: inst.clone(),
        n: h.n(),
        r: h.r(),
        w,
        m: None,
        n_pad: 0,
        r_pad: 0,
        k: h.n().checked_sub(h.r()),
        triple_rows: 0..inst.u(),
        nu_row: None,
        parity_row: None,
        identity_rows: 0..0,
        padding_rows: 0..0,
        padding: None,
        padding_seed: None,
    }
}

/// `H = A`, `S = 1^{3t}`, `w = t`.
pub fn reduce_coset(inst: &TdmInstance) -> (CosetInstance, ReductionRecord) {
    let a = incidence_matrix(inst);
    let t = inst.t();
    let rec = base_record(ReductionKind::Coset, inst, &a, t);
    let coset = CosetInstance::new(a, BitVector::ones(3 * t), t).expect("syndrome length 3t");
    (coset, rec)
}

/// The original SUBSPACE WEIGHT gadget.
///
/// Top block: row `i` is `A_i` followed by `u` segments of width `3t`, of
/// which only segment `i` is all ones. Bottom block: the identity of size
/// `3t(u + 1)`. Target weight `3t² + 4t`.
pub fn reduce_subspace_bmvt(
    inst: &TdmInstance,
) -> Result<(SubspaceInstance, ReductionRecord), ReductionError> {
    let (t, u) = (inst.t(), inst.u());
    if t == 0 {
        return Err(ReductionError::Inapplicable {
            kind: ReductionKind::Bmvt,
            reason: "needs t >= 1".into(),
        });
    }
    let width = 3 * t * (u + 1);
    let a = incidence_matrix(inst);
    let mut segments = BitMatrix::zeros(u, 3 * t * u);
    for i in 0..u {
        for j in 3 * t * i..3 * t * (i + 1) {
            segments.set(i, j, true);
        }
    }
    let top = a.hstack(&segments).expect("same row count");
    let h = top.vstack(&BitMatrix::identity(width)).expect("same width");
    let w = 3 * t * t + 4 * t;
    let mut rec = base_record(ReductionKind::Bmvt, inst, &h, w);
    rec.identity_rows = u..h.n();
    let sub = SubspaceInstance::new(h, w).expect("w >= 1");
    Ok((sub, rec))
}

/// Compact gadget with its layout, before any Goppa padding.
struct Compact {
    h: BitMatrix,
    w: usize,
    nu_row: Option<usize>,
    parity_row: usize,
}

fn compact_gadget(inst: &TdmInstance) -> Compact {
    let odd = inst.t() % 2 == 1;
    let ext = if odd {
        inst.with_forced_element()
    } else {
        inst.clone()
    };
    let a = incidence_matrix(&ext);
    let ones_col = BitMatrix::from_rows(1, vec![BitVector::ones(1); ext.u()]).expect("width 1");
    let parity = BitMatrix::ones_row(a.r())
        .hstack(&BitMatrix::zeros(1, 1))
        .expect("one row");
    let h = a
        .hstack(&ones_col)
        .and_then(|top| top.vstack(&parity))
        .expect("dimensions agree");
    Compact {
        h,
        w: ext.t() + 1,
        nu_row: odd.then_some(inst.u()),
        parity_row: ext.u(),
    }
}

/// Compact SUBSPACE WEIGHT gadget: `[A | 1]` over `[1…1 | 0]`, target weight
/// `t + 1`. For odd `t` the instance is first extended with the forced triple
/// `(t+1, t+1, t+1)`, giving `(u + 2) × (3t + 4)` and weight `t + 2`.
pub fn reduce_subspace_compact(
    inst: &TdmInstance,
) -> Result<(SubspaceInstance, ReductionRecord), ReductionError> {
    if inst.t() == 0 {
        return Err(ReductionError::Inapplicable {
            kind: ReductionKind::Compact,
            reason: "needs t >= 1".into(),
        });
    }
    let c = compact_gadget(inst);
    let mut rec = base_record(ReductionKind::Compact, inst, &c.h, c.w);
    rec.nu_row = c.nu_row;
    rec.parity_row = Some(c.parity_row);
    let sub = SubspaceInstance::new(c.h, c.w).expect("w >= 1");
    Ok((sub, rec))
}

/// Embeds `base` in the top-left of an `n × r` matrix. The fresh rows are
/// zero except, for [`PaddingStrategy::RandomFresh`], uniform bits in the
/// fresh columns.
pub(crate) fn pad_matrix(
    base: &BitMatrix,
    n: usize,
    r: usize,
    padding: PaddingOptions,
) -> BitMatrix {
    debug_assert!(n >= base.n() && r >= base.r());
    let fresh_cols = r - base.r();
    let mut rows: Vec<BitVector> = base
        .rows()
        .iter()
        .map(|row| row.concat(&BitVector::zeros(fresh_cols)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(padding.seed);
    for _ in base.n()..n {
        let mut row = BitVector::zeros(r);
        if padding.strategy == PaddingStrategy::RandomFresh {
            for j in base.r()..r {
                if rng.gen::<bool>() {
                    row.set(j, true);
                }
            }
        }
        rows.push(row);
    }
    BitMatrix::from_rows(r, rows).expect("rows have length r")
}

/// `⌈log2 x⌉` for `x >= 1`.
pub(crate) fn ceil_log2(x: usize) -> u32 {
    x.next_power_of_two().trailing_zeros()
}

/// Goppa-parameterized syndrome decoding: `A` padded with zeros to
/// `2^m × tm`, `m = ⌈log2 u⌉`, syndrome `3t` ones then zeros, `w = t`.
pub fn reduce_gpsd(inst: &TdmInstance) -> Result<(CosetInstance, ReductionRecord), ReductionError> {
    let (t, u) = (inst.t(), inst.u());
    if u < 8 {
        return Err(ReductionError::Inapplicable {
            kind: ReductionKind::Gpsd,
            reason: format!("needs u >= 8 (got u = {u})"),
        });
    }
    let m = ceil_log2(u);
    let n = 1usize << m;
    let r = t * m as usize;
    let h = pad_matrix(&incidence_matrix(inst), n, r, PaddingOptions::default());
    let syndrome = BitVector::ones(3 * t).concat(&BitVector::zeros(r - 3 * t));
    let mut rec = base_record(ReductionKind::Gpsd, inst, &h, t);
    rec.m = Some(m);
    rec.n_pad = n - u;
    rec.r_pad = r - 3 * t;
    rec.padding_rows = u..n;
    let coset = CosetInstance::new(h, syndrome, t).expect("syndrome length r");
    Ok((coset, rec))
}

/// Goppa-parameterized subspace weight: the compact gadget padded to
/// `2^m × r` with `r = (w - 1)m / 2`, so that `w = 2r/m + 1` exactly.
///
/// `m` is the smallest value with `2^m` at least the gadget's row count and
/// `r` at least its column count.
pub fn reduce_gpsw(
    inst: &TdmInstance,
    padding: PaddingOptions,
    max_m: u32,
) -> Result<(SubspaceInstance, ReductionRecord), ReductionError> {
    if inst.t() < 2 {
        return Err(ReductionError::Inapplicable {
            kind: ReductionKind::Gpsw,
            reason: format!("needs t >= 2 (got t = {})", inst.t()),
        });
    }
    let base = compact_gadget(inst);
    let (n_base, r_base, w) = (base.h.n(), base.h.r(), base.w);
    let m = (1..=max_m.min(usize::BITS - 2))
        .find(|&m| {
            let r2 = (w - 1) * m as usize;
            (1usize << m) >= n_base && r2.is_multiple_of(2) && r2 / 2 >= r_base
        })
        .ok_or(ReductionError::NoFeasibleM { max_m })?;
    let n = 1usize << m;
    let r = (w - 1) * m as usize / 2;
    let h = pad_matrix(&base.h, n, r, padding);
    let mut rec = base_record(ReductionKind::Gpsw, inst, &h, w);
    rec.m = Some(m);
    rec.n_pad = n - n_base;
    rec.r_pad = r - r_base;
    rec.nu_row = base.nu_row;
    rec.parity_row = Some(base.parity_row);
    rec.padding_rows = n_base..n;
    rec.padding = Some(padding.strategy);
    rec.padding_seed = Some(padding.seed);
    let sub = SubspaceInstance::new(h, w).expect("w >= 1");
    Ok((sub, rec))
}

/// The compact gadget padded to `n × r`; shared by the generic PSW
/// reduction.
pub fn padded_compact(
    inst: &TdmInstance,
    kind: ReductionKind,
    n: usize,
    r: usize,
    padding: PaddingOptions,
) -> (SubspaceInstance, ReductionRecord) {
    let base = compact_gadget(inst);
    let (n_base, r_base, w) = (base.h.n(), base.h.r(), base.w);
    let h = pad_matrix(&base.h, n, r, padding);
    let mut rec = base_record(kind, inst, &h, w);
    rec.n_pad = n - n_base;
    rec.r_pad = r - r_base;
    rec.nu_row = base.nu_row;
    rec.parity_row = Some(base.parity_row);
    rec.padding_rows = n_base..n;
    rec.padding = Some(padding.strategy);
    rec.padding_seed = Some(padding.seed);
    (SubspaceInstance::new(h, w).expect("w >= 1"), rec)
}

/// Row and column counts of the compact gadget for `inst`.
pub(crate) fn compact_dims(inst: &TdmInstance) -> (usize, usize, usize) {
    let odd = inst.t() % 2 == 1;
    let (t, u) = if odd {
        (inst.t() + 1, inst.u() + 1)
    } else {
        (inst.t(), inst.u())
    };
    (u + 1, 3 * t + 1, t + 1)
}
