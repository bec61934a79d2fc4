use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

use crate::tdm::{TdmError, TdmInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    Coset,
    Bmvt,
    Compact,
    Gpsd,
    Gpsw,
    GenericPsd,
    GenericPsw,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 7] = [
        ReductionKind::Coset,
        ReductionKind::Bmvt,
        ReductionKind::Compact,
        ReductionKind::Gpsd,
        ReductionKind::Gpsw,
        ReductionKind::GenericPsd,
        ReductionKind::GenericPsw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReductionKind::Coset => "coset",
            ReductionKind::Bmvt => "bmvt",
            ReductionKind::Compact => "compact",
            ReductionKind::Gpsd => "gpsd",
            ReductionKind::Gpsw => "gpsw",
            ReductionKind::GenericPsd => "generic-psd",
            ReductionKind::GenericPsw => "generic-psw",
        }
    }

    /// Whether the reduced instance is a COSET WEIGHT instance.
    pub fn is_coset(self) -> bool {
        matches!(
            self,
            ReductionKind::Coset | ReductionKind::Gpsd | ReductionKind::GenericPsd
        )
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReductionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown reduction kind {s:?}"))
    }
}

/// How the rows added to reach a prescribed length are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PaddingStrategy {
    /// All-zero padding rows.
    ZeroRows,
    /// Uniform random bits in the freshly added columns, zero elsewhere.
    RandomFresh,
}

impl PaddingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            PaddingStrategy::ZeroRows => "zero-rows",
            PaddingStrategy::RandomFresh => "random-fresh",
        }
    }
}

impl fmt::Display for PaddingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PaddingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero-rows" => Ok(PaddingStrategy::ZeroRows),
            "random-fresh" => Ok(PaddingStrategy::RandomFresh),
            other => Err(format!("unknown padding strategy {other:?}")),
        }
    }
}

/// Provenance of a reduced instance: what was built, from which 3DM
/// instance, and which rows of `H` play which role.
///
/// `source` is always the original instance; when the odd-`t` compact gadget
/// adds the forced triple, its row is recorded in `nu_row`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionRecord {
    pub kind: ReductionKind,
    pub source: TdmInstance,
    pub n: usize,
    pub r: usize,
    pub w: usize,
    pub m: Option<u32>,
    /// Rows added to reach the prescribed length (n').
    pub n_pad: usize,
    /// Columns added to reach the prescribed redundancy (r').
    pub r_pad: usize,
    /// Code dimension `n - r`, when non-negative.
    pub k: Option<usize>,
    pub triple_rows: Range<usize>,
    pub nu_row: Option<usize>,
    pub parity_row: Option<usize>,
    pub identity_rows: Range<usize>,
    pub padding_rows: Range<usize>,
    pub padding: Option<PaddingStrategy>,
    pub padding_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("record line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("record source: {0}")]
    Source(#[from] TdmError),
    #[error("inconsistent record: {0}")]
    Inconsistent(String),
}

impl ReductionRecord {
    /// Checks that the row roles are disjoint and cover `[0, n)`.
    pub fn validate(&self) -> Result<(), RecordError> {
        let mut owner = vec![None::<&str>; self.n];
        let mut claim = |range: Range<usize>, role: &'static str| -> Result<(), RecordError> {
            for i in range {
                let slot = owner.get_mut(i).ok_or_else(|| {
                    RecordError::Inconsistent(format!("{role} row {i} beyond n = {}", self.n))
                })?;
                if let Some(prev) = slot {
                    return Err(RecordError::Inconsistent(format!(
                        "row {i} claimed by both {prev} and {role}"
                    )));
                }
                *slot = Some(role);
            }
            Ok(())
        };
        claim(self.triple_rows.clone(), "triple")?;
        if let Some(i) = self.nu_row {
            claim(i..i + 1, "nu")?;
        }
        if let Some(i) = self.parity_row {
            claim(i..i + 1, "parity")?;
        }
        claim(self.identity_rows.clone(), "identity")?;
        claim(self.padding_rows.clone(), "padding")?;
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(RecordError::Inconsistent(format!("row {i} has no role")));
        }
        if self.triple_rows.len() != self.source.u() {
            return Err(RecordError::Inconsistent(format!(
                "{} triple rows for {} triples",
                self.triple_rows.len(),
                self.source.u()
            )));
        }
        Ok(())
    }
}

fn fmt_opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn fmt_range(r: &Range<usize>) -> String {
    if r.is_empty() {
        "-".to_string()
    } else {
        format!("{}..{}", r.start, r.end)
    }
}

const KEYS: [&str; 16] = [
    "kind",
    "n",
    "r",
    "w",
    "m",
    "n_pad",
    "r_pad",
    "k",
    "triple_rows",
    "nu_row",
    "parity_row",
    "identity_rows",
    "padding_rows",
    "padding",
    "padding_seed",
    "source",
];

impl fmt::Display for ReductionRecord {
    /// One `key value` line per field in fixed order, `-` for absent values,
    /// then `source` followed by the source instance in `.3dm` format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind {}", self.kind)?;
        writeln!(f, "n {}", self.n)?;
        writeln!(f, "r {}", self.r)?;
        writeln!(f, "w {}", self.w)?;
        writeln!(f, "m {}", fmt_opt(&self.m))?;
        writeln!(f, "n_pad {}", self.n_pad)?;
        writeln!(f, "r_pad {}", self.r_pad)?;
        writeln!(f, "k {}", fmt_opt(&self.k))?;
        writeln!(f, "triple_rows {}", fmt_range(&self.triple_rows))?;
        writeln!(f, "nu_row {}", fmt_opt(&self.nu_row))?;
        writeln!(f, "parity_row {}", fmt_opt(&self.parity_row))?;
        writeln!(f, "identity_rows {}", fmt_range(&self.identity_rows))?;
        writeln!(f, "padding_rows {}", fmt_range(&self.padding_rows))?;
        writeln!(f, "padding {}", fmt_opt(&self.padding))?;
        writeln!(f, "padding_seed {}", fmt_opt(&self.padding_seed))?;
        writeln!(f, "source")?;
        write!(f, "{}", self.source)
    }
}

impl FromStr for ReductionRecord {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let mut values: Vec<&str> = Vec::with_capacity(KEYS.len());
        for (i, key) in KEYS.iter().enumerate() {
            let line_no = i + 1;
            let line = lines.next().ok_or(RecordError::Parse {
                line: line_no,
                msg: format!("missing {key:?}"),
            })?;
            let (k, v) = line.trim().split_once(' ').unwrap_or((line.trim(), ""));
            if k != *key {
                return Err(RecordError::Parse {
                    line: line_no,
                    msg: format!("expected key {key:?}, found {k:?}"),
                });
            }
            values.push(v.trim());
        }
        let err = |i: usize, msg: String| RecordError::Parse { line: i + 1, msg };
        let num = |i: usize| -> Result<usize, RecordError> {
            values[i]
                .parse()
                .map_err(|_| err(i, format!("bad number {:?}", values[i])))
        };
        let opt = |i: usize| -> Result<Option<usize>, RecordError> {
            if values[i] == "-" {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let range = |i: usize| -> Result<Range<usize>, RecordError> {
            if values[i] == "-" {
                return Ok(0..0);
            }
            let (a, b) = values[i]
                .split_once("..")
                .ok_or_else(|| err(i, format!("bad range {:?}", values[i])))?;
            let a = a
                .parse()
                .map_err(|_| err(i, format!("bad range {:?}", values[i])))?;
            let b = b
                .parse()
                .map_err(|_| err(i, format!("bad range {:?}", values[i])))?;
            Ok(a..b)
        };
        let kind = values[0].parse().map_err(|e| err(0, e))?;
        let m = opt(4)?.map(|m| m as u32);
        let padding = match values[13] {
            "-" => None,
            v => Some(v.parse().map_err(|e| err(13, e))?),
        };
        let padding_seed = match values[14] {
            "-" => None,
            v => Some(v.parse().map_err(|_| err(14, format!("bad seed {v:?}")))?),
        };
        let source = TdmInstance::parse_lines(&mut lines, KEYS.len() + 1)?;
        let rec = ReductionRecord {
            kind,
            source,
            n: num(1)?,
            r: num(2)?,
            w: num(3)?,
            m,
            n_pad: num(5)?,
            r_pad: num(6)?,
            k: opt(7)?,
            triple_rows: range(8)?,
            nu_row: opt(9)?,
            parity_row: opt(10)?,
            identity_rows: range(11)?,
            padding_rows: range(12)?,
            padding,
            padding_seed,
        };
        rec.validate()?;
        Ok(rec)
    }
}
