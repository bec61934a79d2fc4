//! Parameterized SD / SW reductions for a user-supplied length constraint
//! `n = f(r, w)`, and a sampled checker for the sufficient conditions on
//! `g`, `P`, `Q` and `λ` under which the reduction applies.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::expr::{as_integer, Env, Expr, ExprError, Var};
use super::{
    compact_dims, incidence_matrix, pad_matrix, padded_compact, CosetInstance, PaddingOptions,
    ReductionError, ReductionKind, ReductionRecord, SubspaceInstance,
};
use crate::gf2::BitVector;
use crate::tdm::TdmInstance;

/// A parsed expression that remembers its source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    text: String,
    expr: Expr,
}

impl Constraint {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        Ok(Constraint {
            text: text.trim().to_string(),
            expr: Expr::parse(text)?,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Length constraint `f(r, w)` plus the redundancy choice `g(t, u)` (and
/// `g'` for odd `t` in the subspace variant), threshold `λ` and optional
/// polynomial bounds `P(t, u)`, `Q(t, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub f: Constraint,
    pub g: Constraint,
    pub g_odd: Option<Constraint>,
    pub lambda: u64,
    pub p: Option<Constraint>,
    pub q: Option<Constraint>,
}

impl ConstraintSpec {
    pub fn parse(
        f: &str,
        g: &str,
        g_odd: Option<&str>,
        lambda: u64,
        p: Option<&str>,
        q: Option<&str>,
    ) -> Result<Self, ExprError> {
        Ok(ConstraintSpec {
            f: Constraint::parse(f)?,
            g: Constraint::parse(g)?,
            g_odd: g_odd.map(Constraint::parse).transpose()?,
            lambda,
            p: p.map(Constraint::parse).transpose()?,
            q: q.map(Constraint::parse).transpose()?,
        })
    }

    pub const PRESETS: [&'static str; 3] = ["goppa", "goppa-psw", "half-length"];

    /// Named constraint families:
    ///
    /// * `goppa`: `f = 2^(r/w)`, `g = t⌈log2 u⌉`, `λ = 8`, `P = tu`, `Q = 2u`.
    /// * `goppa-psw`: the subspace-weight Goppa proportions
    ///   `f = 2^(2r/(w-1))`, with `g`, `g'` picking the same `m` as the
    ///   dedicated GPSW reduction.
    /// * `half-length`: `f = 2w`, `g = 3t`, `λ = 0`; fails whenever `u > 2t`.
    pub fn preset(name: &str) -> Option<Self> {
        let spec = match name {
            "goppa" => Self::parse(
                "2^(r/w)",
                "t*ceil(log2(u))",
                None,
                8,
                Some("t*u"),
                Some("2*u"),
            ),
            "goppa-psw" => Self::parse(
                "2^(2*r/(w-1))",
                "t*max(ceil(log2(u+1)), 7)/2",
                Some("(t+1)*max(ceil(log2(u+2)), 7)/2"),
                8,
                Some("t*u"),
                Some("max(2*u+4, 128)"),
            ),
            "half-length" => Self::parse("2*w", "3*t", None, 0, None, None),
            _ => return None,
        };
        Some(spec.expect("preset expressions parse"))
    }

    fn g_for(&self, t: usize) -> &Constraint {
        if t % 2 == 1 {
            self.g_odd.as_ref().unwrap_or(&self.g)
        } else {
            &self.g
        }
    }
}

fn q(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

fn env_tu(t: usize, u: usize) -> Env {
    Env::new()
        .with_int(Var::T, t as u64)
        .with_int(Var::U, u as u64)
}

fn env_rw(r: &BigRational, w: usize) -> Env {
    Env::new()
        .with(Var::R, r.clone())
        .with_int(Var::W, w as u64)
}

fn integer(value: &BigRational, quantity: &str) -> Result<BigInt, ReductionError> {
    as_integer(value).ok_or_else(|| ReductionError::NotInteger {
        quantity: quantity.to_string(),
        value: value.to_string(),
    })
}

fn violated(bound: &str, detail: String) -> ReductionError {
    ReductionError::ConditionViolated {
        bound: bound.to_string(),
        detail,
    }
}

fn within_budget(value: &BigInt, quantity: &str, limit: u64) -> Result<usize, ReductionError> {
    value
        .to_u64()
        .filter(|&v| v <= limit)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| ReductionError::BudgetExceeded {
            quantity: quantity.to_string(),
            value: value.to_string(),
            limit,
        })
}

/// Evaluated `(r, n)` for an instance, after checking every applicable
/// bound.
struct Dims {
    r: usize,
    n: usize,
}

struct Bounds<'a> {
    g: &'a Constraint,
    g_name: &'a str,
    min_r: usize,
    min_r_name: String,
    min_n: usize,
    min_n_name: String,
    w: usize,
}

fn evaluate_dims(
    inst: &TdmInstance,
    spec: &ConstraintSpec,
    b: Bounds<'_>,
    max_n: u64,
) -> Result<Dims, ReductionError> {
    let (t, u) = (inst.t(), inst.u());
    if (u as u64) <= spec.lambda {
        return Err(violated(
            "u > lambda",
            format!("u = {u}, lambda = {}", spec.lambda),
        ));
    }
    let tu = env_tu(t, u);
    let r_val = b.g.expr().eval(&tu)?;
    let r_int = integer(&r_val, &format!("r = {}(t,u)", b.g_name))?;
    if r_int < BigInt::from(b.min_r) {
        return Err(violated(
            &b.min_r_name,
            format!("{}(t,u) = {r_int} < {}", b.g_name, b.min_r),
        ));
    }
    if let Some(p) = &spec.p {
        let p_val = p.expr().eval(&tu)?;
        if r_val > p_val {
            return Err(violated(
                &format!("{}(t,u) <= P(t,u)", b.g_name),
                format!("{r_int} > {p_val}"),
            ));
        }
    }
    let n_val = spec.f.expr().eval(&env_rw(&r_val, b.w))?;
    let n_int = integer(&n_val, "n = f(r,w)")?;
    if n_int < BigInt::from(b.min_n) {
        return Err(violated(
            &b.min_n_name,
            format!("n = f({r_int}, {}) = {n_int} < {}", b.w, b.min_n),
        ));
    }
    if let Some(qc) = &spec.q {
        let q_val = qc.expr().eval(&tu)?;
        if n_val > q_val {
            return Err(violated("f(r,w) <= Q(t,u)", format!("{n_int} > {q_val}")));
        }
    }
    let n = within_budget(&n_int, "n", max_n)?;
    let r = within_budget(&r_int, "r", max_n)?;
    Ok(Dims { r, n })
}

/// PSD for the constraint `n = f(r, w)`: `A` zero-padded to `n × r` with
/// `r = g(t, u)` and `n = f(r, t)`, syndrome `3t` ones then zeros, `w = t`.
pub fn reduce_generic_psd(
    inst: &TdmInstance,
    spec: &ConstraintSpec,
    max_n: u64,
) -> Result<(CosetInstance, ReductionRecord), ReductionError> {
    let (t, u) = (inst.t(), inst.u());
    let dims = evaluate_dims(
        inst,
        spec,
        Bounds {
            g: &spec.g,
            g_name: "g",
            min_r: 3 * t,
            min_r_name: "3t <= g(t,u)".into(),
            min_n: u,
            min_n_name: "u <= f(g(t,u),t)".into(),
            w: t,
        },
        max_n,
    )?;
    let h = pad_matrix(
        &incidence_matrix(inst),
        dims.n,
        dims.r,
        PaddingOptions::default(),
    );
    let syndrome = BitVector::ones(3 * t).concat(&BitVector::zeros(dims.r - 3 * t));
    let rec = ReductionRecord {
        kind: ReductionKind::GenericPsd,
        source: inst.clone(),
        n: dims.n,
        r: dims.r,
        w: t,
        m: None,
        n_pad: dims.n - u,
        r_pad: dims.r - 3 * t,
        k: dims.n.checked_sub(dims.r),
        triple_rows: 0..u,
        nu_row: None,
        parity_row: None,
        identity_rows: 0..0,
        padding_rows: u..dims.n,
        padding: None,
        padding_seed: None,
    };
    let coset = CosetInstance::new(h, syndrome, t).expect("syndrome length r");
    Ok((coset, rec))
}

/// PSW for the constraint `n = f(r, w)`: the compact gadget padded to
/// `n × r`, with `r = g(t, u)` (`g'` for odd `t`) and `n = f(r, w)` at the
/// gadget's target weight.
pub fn reduce_generic_psw(
    inst: &TdmInstance,
    spec: &ConstraintSpec,
    padding: PaddingOptions,
    max_n: u64,
) -> Result<(SubspaceInstance, ReductionRecord), ReductionError> {
    let t = inst.t();
    if t == 0 {
        return Err(ReductionError::Inapplicable {
            kind: ReductionKind::GenericPsw,
            reason: "needs t >= 1".into(),
        });
    }
    let (n_base, r_base, w) = compact_dims(inst);
    let odd = t % 2 == 1;
    let g_name = if odd { "g'" } else { "g" };
    let extra_rows = if odd { "u+2" } else { "u+1" };
    let dims = evaluate_dims(
        inst,
        spec,
        Bounds {
            g: spec.g_for(t),
            g_name,
            min_r: r_base,
            min_r_name: format!("{r_base} <= {g_name}(t,u) (gadget width)"),
            min_n: n_base,
            min_n_name: format!("{extra_rows} <= f({g_name}(t,u),w)"),
            w,
        },
        max_n,
    )?;
    Ok(padded_compact(
        inst,
        ReductionKind::GenericPsw,
        dims.n,
        dims.r,
        padding,
    ))
}

/// Which set of sufficient conditions to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposition {
    /// Syndrome decoding: `3t <= g <= P`, `u <= f(g, t) <= Q`.
    Psd,
    /// Subspace weight: `3t+1 <= g <= P`, `u+1 <= f(g, t+1) <= Q` for even
    /// `t`; `3t+2 <= g' <= P`, `u+2 <= f(g', t+2) <= Q` for odd `t`.
    Psw,
}

/// One inequality `lhs <= rhs` at one grid point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointCheck {
    pub t: u64,
    pub u: u64,
    pub bounds: Vec<BoundCheck>,
}

impl PointCheck {
    pub fn passes(&self) -> bool {
        self.bounds.iter().all(BoundCheck::holds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionReport {
    pub proposition: Proposition,
    pub points: Vec<PointCheck>,
    /// Grid points at or below the threshold, not evaluated.
    pub skipped: usize,
}

impl PropositionReport {
    pub fn all_pass(&self) -> bool {
        self.points.iter().all(PointCheck::passes)
    }

    /// No point above the threshold was sampled; a pass is then vacuous.
    pub fn vacuous(&self) -> bool {
        self.points.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| !p.passes()).count()
    }

    pub fn first_counterexample(&self) -> Option<(&PointCheck, &BoundCheck)> {
        self.points
            .iter()
            .find_map(|p| p.bounds.iter().find(|b| !b.holds()).map(|b| (p, b)))
    }
}

impl fmt::Display for PropositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if !self.all_pass() {
            "fail"
        } else if self.vacuous() {
            "vacuous-pass"
        } else {
            "pass"
        };
        writeln!(f, "verdict {verdict}")?;
        writeln!(f, "points {}", self.points.len())?;
        writeln!(f, "skipped {}", self.skipped)?;
        writeln!(f, "failures {}", self.failures())?;
        match self.first_counterexample() {
            Some((p, b)) => writeln!(
                f,
                "counterexample t={} u={} {}: {} > {}",
                p.t, p.u, b.name, b.lhs, b.rhs
            ),
            None => writeln!(f, "counterexample none"),
        }
    }
}

/// Evaluates the sufficient conditions at every grid point with
/// `t > λ` and `u > λ`.
pub fn check_proposition_conditions(
    spec: &ConstraintSpec,
    t_range: RangeInclusive<u64>,
    u_range: RangeInclusive<u64>,
    proposition: Proposition,
) -> Result<PropositionReport, ExprError> {
    let mut points = Vec::new();
    let mut skipped = 0;
    for t in t_range {
        for u in u_range.clone() {
            if t <= spec.lambda || u <= spec.lambda {
                skipped += 1;
                continue;
            }
            points.push(check_point(spec, t, u, proposition)?);
        }
    }
    Ok(PropositionReport {
        proposition,
        points,
        skipped,
    })
}

fn check_point(
    spec: &ConstraintSpec,
    t: u64,
    u: u64,
    proposition: Proposition,
) -> Result<PointCheck, ExprError> {
    let tu = Env::new().with_int(Var::T, t).with_int(Var::U, u);
    let odd = t % 2 == 1;
    let (g, g_name, r_shift, n_shift, w) = match proposition {
        Proposition::Psd => (&spec.g, "g", 0, 0, t),
        Proposition::Psw if odd => (spec.g_for(t as usize), "g'", 2, 2, t + 2),
        Proposition::Psw => (&spec.g, "g", 1, 1, t + 1),
    };
    let g_val = g.expr().eval(&tu)?;
    let f_val = spec
        .f
        .expr()
        .eval(&Env::new().with(Var::R, g_val.clone()).with_int(Var::W, w))?;
    let w_name = match proposition {
        Proposition::Psd => "t",
        Proposition::Psw if odd => "t+2",
        Proposition::Psw => "t+1",
    };
    let shift = |k: u64| {
        if k == 0 {
            String::new()
        } else {
            format!("+{k}")
        }
    };
    let f_name = format!("f({g_name}(t,u),{w_name})");
    let mut bounds = vec![BoundCheck {
        name: format!("3t{} <= {g_name}(t,u)", shift(r_shift)),
        lhs: q(3 * t + r_shift),
        rhs: g_val.clone(),
    }];
    if let Some(p) = &spec.p {
        bounds.push(BoundCheck {
            name: format!("{g_name}(t,u) <= P(t,u)"),
            lhs: g_val.clone(),
            rhs: p.expr().eval(&tu)?,
        });
    }
    bounds.push(BoundCheck {
        name: format!("u{} <= {f_name}", shift(n_shift)),
        lhs: q(u + n_shift),
        rhs: f_val.clone(),
    });
    if let Some(qc) = &spec.q {
        bounds.push(BoundCheck {
            name: format!("{f_name} <= Q(t,u)"),
            lhs: f_val,
            rhs: qc.expr().eval(&tu)?,
        });
    }
    Ok(PointCheck { t, u, bounds })
}
