//! Three-dimensional matching instances, generators and an exact solver.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A triple `(a, b, c)` with 1-based coordinates.
pub type Triple = [usize; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdmError {
    #[error("triple index {index} out of range for instance with {u} triples")]
    IndexOutOfRange { index: usize, u: usize },
    #[error("triple {index} has coordinate {value} outside 1..={t}")]
    CoordinateOutOfRange {
        index: usize,
        value: usize,
        t: usize,
    },
    #[error("planted instance needs u >= t (got t = {t}, u = {u})")]
    TooFewTriples { t: usize, u: usize },
    #[error("cannot generate triples over an empty ground set")]
    EmptyGroundSet,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A 3DM instance: ground set `{1..t}` and an ordered list of triples.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TdmInstance {
    t: usize,
    triples: Vec<Triple>,
}

impl TdmInstance {
    pub fn new(t: usize, triples: Vec<Triple>) -> Result<Self, TdmError> {
        for (index, triple) in triples.iter().enumerate() {
            if let Some(&value) = triple.iter().find(|&&v| v == 0 || v > t) {
                return Err(TdmError::CoordinateOutOfRange { index, value, t });
            }
        }
        Ok(TdmInstance { t, triples })
    }

    /// The worked example with `t = 3` and triples `U1..U5`.
    pub fn worked_example() -> Self {
        TdmInstance::new(
            3,
            vec![[1, 2, 2], [2, 2, 3], [1, 3, 2], [2, 1, 3], [3, 3, 1]],
        )
        .expect("static instance is valid")
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn u(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// Copy of the instance without triple `index`.
    pub fn without(&self, index: usize) -> TdmInstance {
        let mut triples = self.triples.clone();
        triples.remove(index);
        TdmInstance { t: self.t, triples }
    }

    /// Extends the ground set with `ν = t + 1` and appends `(ν, ν, ν)` as the
    /// last triple. Matchings of the result are exactly the matchings of
    /// `self` plus the new triple.
    pub fn with_forced_element(&self) -> TdmInstance {
        let nu = self.t + 1;
        let mut triples = self.triples.clone();
        triples.push([nu, nu, nu]);
        TdmInstance { t: nu, triples }
    }

    /// Pairs `(i, j)`, `i < j`, of identical triples. Duplicates are legal
    /// input; this is a lint only.
    pub fn duplicate_triples(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.u()).collect();
        order.sort_by_key(|&i| (self.triples[i], i));
        let mut pairs = Vec::new();
        for run in order.chunk_by(|&x, &y| self.triples[x] == self.triples[y]) {
            for (a, &x) in run.iter().enumerate() {
                for &y in &run[a + 1..] {
                    pairs.push((x, y));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }

    /// True iff `selection` has exactly `t` triples that pairwise disagree in
    /// every coordinate.
    pub fn is_matching(&self, selection: &[usize]) -> Result<bool, TdmError> {
        if let Some(&index) = selection.iter().find(|&&i| i >= self.u()) {
            return Err(TdmError::IndexOutOfRange { index, u: self.u() });
        }
        if selection.len() != self.t {
            return Ok(false);
        }
        let mut seen = vec![[false; 3]; self.t + 1];
        for &i in selection {
            for (k, &v) in self.triples[i].iter().enumerate() {
                if seen[v][k] {
                    return Ok(false);
                }
                seen[v][k] = true;
            }
        }
        Ok(true)
    }

    /// Exact backtracking search for a perfect matching.
    ///
    /// Items are the `3t` (coordinate, value) pairs. At each node the
    /// uncovered item with the fewest still-usable triples is branched on
    /// (ties to the lowest item), trying its triples in index order.
    pub fn solve(&self) -> Option<Matching> {
        let t = self.t;
        let item = |k: usize, v: usize| k * t + (v - 1);
        let mut by_item: Vec<Vec<usize>> = vec![Vec::new(); 3 * t];
        for (i, tr) in self.triples.iter().enumerate() {
            for (k, &v) in tr.iter().enumerate() {
                by_item[item(k, v)].push(i);
            }
        }
        let items_of = |i: usize| -> [usize; 3] {
            let tr = self.triples[i];
            [item(0, tr[0]), item(1, tr[1]), item(2, tr[2])]
        };

        struct Search<'a> {
            covered: Vec<bool>,
            chosen: Vec<usize>,
            by_item: &'a [Vec<usize>],
        }

        fn usable(covered: &[bool], its: [usize; 3]) -> bool {
            its.iter().all(|&x| !covered[x])
        }

        fn go(s: &mut Search<'_>, items_of: &dyn Fn(usize) -> [usize; 3]) -> bool {
            let mut best: Option<(usize, usize)> = None;
            for (it, cands) in s.by_item.iter().enumerate() {
                if s.covered[it] {
                    continue;
                }
                let count = cands
                    .iter()
                    .filter(|&&i| usable(&s.covered, items_of(i)))
                    .count();
                if best.is_none_or(|(_, c)| count < c) {
                    best = Some((it, count));
                    if count == 0 {
                        break;
                    }
                }
            }
            let Some((it, count)) = best else {
                return true;
            };
            if count == 0 {
                return false;
            }
            let by_item = s.by_item;
            for &i in &by_item[it] {
                let its = items_of(i);
                if !usable(&s.covered, its) {
                    continue;
                }
                for &x in &its {
                    s.covered[x] = true;
                }
                s.chosen.push(i);
                if go(s, items_of) {
                    return true;
                }
                s.chosen.pop();
                for &x in &its {
                    s.covered[x] = false;
                }
            }
            false
        }

        let mut search = Search {
            covered: vec![false; 3 * t],
            chosen: Vec::with_capacity(t),
            by_item: &by_item,
        };
        if go(&mut search, &items_of) {
            let mut indices = search.chosen;
            indices.sort_unstable();
            Some(Matching { indices })
        } else {
            None
        }
    }

    /// A hidden perfect matching `(i, π(i), σ(i))` plus `u - t` uniform
    /// triples, shuffled.
    pub fn gen_planted(t: usize, u: usize, seed: u64) -> Result<Self, TdmError> {
        if u < t {
            return Err(TdmError::TooFewTriples { t, u });
        }
        if t == 0 {
            return Ok(TdmInstance { t, triples: vec![] });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut second: Vec<usize> = (1..=t).collect();
        let mut third: Vec<usize> = (1..=t).collect();
        second.shuffle(&mut rng);
        third.shuffle(&mut rng);
        let mut triples: Vec<Triple> = (0..t).map(|i| [i + 1, second[i], third[i]]).collect();
        for _ in t..u {
            triples.push(random_triple(&mut rng, t));
        }
        triples.shuffle(&mut rng);
        Ok(TdmInstance { t, triples })
    }

    /// `u` independent uniform triples.
    pub fn gen_random(t: usize, u: usize, seed: u64) -> Result<Self, TdmError> {
        if t == 0 && u > 0 {
            return Err(TdmError::EmptyGroundSet);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = (0..u).map(|_| random_triple(&mut rng, t)).collect();
        Ok(TdmInstance { t, triples })
    }
}

fn random_triple<R: Rng>(rng: &mut R, t: usize) -> Triple {
    [
        rng.gen_range(1..=t),
        rng.gen_range(1..=t),
        rng.gen_range(1..=t),
    ]
}

/// Text format: `t u` on the first line, then one `a b c` line per triple.
impl fmt::Display for TdmInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.t, self.u())?;
        for [a, b, c] in &self.triples {
            writeln!(f, "{a} {b} {c}")?;
        }
        Ok(())
    }
}

impl TdmInstance {
    /// Parses the `.3dm` format from the front of `lines`; `first_line` is
    /// the 1-based line number of the header.
    pub fn parse_lines<'a, I>(lines: &mut I, first_line: usize) -> Result<Self, TdmError>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines.next().ok_or(TdmError::Parse {
            line: first_line,
            msg: "missing 't u' header".into(),
        })?;
        let head = parse_ints(header, first_line)?;
        let [t, u] = head[..] else {
            return Err(TdmError::Parse {
                line: first_line,
                msg: "header must be 't u'".into(),
            });
        };
        let mut triples = Vec::with_capacity(u);
        for i in 0..u {
            let line_no = first_line + 1 + i;
            let line = lines.next().ok_or(TdmError::Parse {
                line: line_no,
                msg: format!("expected {u} triples, found {i}"),
            })?;
            let vals = parse_ints(line, line_no)?;
            let [a, b, c] = vals[..] else {
                return Err(TdmError::Parse {
                    line: line_no,
                    msg: "triple line must have three integers".into(),
                });
            };
            triples.push([a, b, c]);
        }
        TdmInstance::new(t, triples)
    }
}

fn parse_ints(line: &str, line_no: usize) -> Result<Vec<usize>, TdmError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| TdmError::Parse {
                line: line_no,
                msg: format!("not a non-negative integer: {tok:?}"),
            })
        })
        .collect()
}

impl FromStr for TdmInstance {
    type Err = TdmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let inst = Self::parse_lines(&mut lines, 1)?;
        if lines.next().is_some() {
            return Err(TdmError::Parse {
                line: inst.u() + 2,
                msg: "more triples than announced in the header".into(),
            });
        }
        Ok(inst)
    }
}

/// A perfect matching, as sorted 0-based triple indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    indices: Vec<usize>,
}

impl Matching {
    /// Validates `indices` against `inst`.
    pub fn new(inst: &TdmInstance, mut indices: Vec<usize>) -> Result<Option<Self>, TdmError> {
        indices.sort_unstable();
        indices.dedup();
        Ok(inst.is_matching(&indices)?.then_some(Matching { indices }))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// 1-based labels, as used in human-facing output.
    pub fn labels(&self) -> String {
        self.indices
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}
