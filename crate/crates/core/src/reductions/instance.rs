//! COSET WEIGHT and SUBSPACE WEIGHT instances and their file format.
//!
//! An instance file is the matrix text format followed by an optional
//! `S <bits>` line (coset instances only), a `w <int>` line and a
//! `mode coset|subspace` line.

use std::fmt;
use std::str::FromStr;

use crate::gf2::{BitMatrix, BitVector, Gf2Error};

/// Is there a word `y` with `weight(y) <= w` and `yH = S`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetInstance {
    h: BitMatrix,
    syndrome: BitVector,
    w: usize,
}

impl CosetInstance {
    pub fn new(h: BitMatrix, syndrome: BitVector, w: usize) -> Result<Self, Gf2Error> {
        if syndrome.len() != h.r() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "syndrome has length {} but H has {} columns",
                syndrome.len(),
                h.r()
            )));
        }
        Ok(CosetInstance { h, syndrome, w })
    }

    pub fn h(&self) -> &BitMatrix {
        &self.h
    }

    pub fn syndrome(&self) -> &BitVector {
        &self.syndrome
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn accepts(&self, support: &[usize]) -> bool {
        support.len() <= self.w && self.h.syndrome(support).is_ok_and(|s| s == self.syndrome)
    }
}

/// Is there a nonzero word `y` with `weight(y) = w` exactly and `yH = 0`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceInstance {
    h: BitMatrix,
    w: usize,
}

impl SubspaceInstance {
    pub fn new(h: BitMatrix, w: usize) -> Result<Self, Gf2Error> {
        if w == 0 {
            return Err(Gf2Error::DimensionMismatch(
                "subspace target weight must be at least 1".into(),
            ));
        }
        Ok(SubspaceInstance { h, w })
    }

    pub fn h(&self) -> &BitMatrix {
        &self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn accepts(&self, support: &[usize]) -> bool {
        support.len() == self.w && self.h.syndrome(support).is_ok_and(|s| s.is_zero())
    }
}

/// Either kind of syndrome decoding instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SdInstance {
    Coset(CosetInstance),
    Subspace(SubspaceInstance),
}

impl SdInstance {
    pub fn h(&self) -> &BitMatrix {
        match self {
            SdInstance::Coset(c) => c.h(),
            SdInstance::Subspace(s) => s.h(),
        }
    }

    pub fn w(&self) -> usize {
        match self {
            SdInstance::Coset(c) => c.w(),
            SdInstance::Subspace(s) => s.w(),
        }
    }

    /// Target syndrome; zero for subspace instances.
    pub fn target(&self) -> BitVector {
        match self {
            SdInstance::Coset(c) => c.syndrome().clone(),
            SdInstance::Subspace(s) => BitVector::zeros(s.h().r()),
        }
    }

    /// Whether `support` (sorted, distinct) is a solution.
    pub fn accepts(&self, support: &[usize]) -> bool {
        match self {
            SdInstance::Coset(c) => c.accepts(support),
            SdInstance::Subspace(s) => s.accepts(support),
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            SdInstance::Coset(_) => "coset",
            SdInstance::Subspace(_) => "subspace",
        }
    }
}

impl From<CosetInstance> for SdInstance {
    fn from(c: CosetInstance) -> Self {
        SdInstance::Coset(c)
    }
}

impl From<SubspaceInstance> for SdInstance {
    fn from(s: SubspaceInstance) -> Self {
        SdInstance::Subspace(s)
    }
}

impl fmt::Display for SdInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.h())?;
        if let SdInstance::Coset(c) = self {
            if c.syndrome().is_empty() {
                writeln!(f, "S")?;
            } else {
                writeln!(f, "S {}", c.syndrome())?;
            }
        }
        writeln!(f, "w {}", self.w())?;
        writeln!(f, "mode {}", self.mode())
    }
}

impl FromStr for SdInstance {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let h = BitMatrix::parse_lines(&mut lines, 1)?;
        let mut line_no = h.n() + 1;
        let mut syndrome = None;
        let mut w = None;
        let mut mode = None;
        for line in lines {
            line_no += 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let bad = |msg: String| Gf2Error::Parse { line: line_no, msg };
            match key {
                "S" => {
                    let v: BitVector = rest.parse().map_err(|e| bad(format!("{e}")))?;
                    syndrome = Some(v);
                }
                "w" => {
                    w = Some(
                        rest.trim()
                            .parse::<usize>()
                            .map_err(|_| bad(format!("bad weight {rest:?}")))?,
                    );
                }
                "mode" => mode = Some(rest.trim().to_string()),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        let missing = |what: &str| Gf2Error::Parse {
            line: line_no,
            msg: format!("missing {what} line"),
        };
        let w = w.ok_or_else(|| missing("w"))?;
        match mode.as_deref() {
            Some("coset") => {
                let s = syndrome.ok_or_else(|| missing("S"))?;
                Ok(CosetInstance::new(h, s, w)?.into())
            }
            Some("subspace") => {
                if syndrome.is_some() {
                    return Err(Gf2Error::Parse {
                        line: line_no,
                        msg: "subspace instances carry no syndrome".into(),
                    });
                }
                Ok(SubspaceInstance::new(h, w)?.into())
            }
            Some(other) => Err(Gf2Error::Parse {
                line: line_no,
                msg: format!("unknown mode {other:?}"),
            }),
            None => Err(missing("mode")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_format_round_trip() {
        let h: BitMatrix = "2 3\n110\n011\n".parse().unwrap();
        let coset: SdInstance = CosetInstance::new(h.clone(), "101".parse().unwrap(), 2)
            .unwrap()
            .into();
        let text = coset.to_string();
        assert_eq!(text, "2 3\n110\n011\nS 101\nw 2\nmode coset\n");
        assert_eq!(text.parse::<SdInstance>().unwrap(), coset);

        let sub: SdInstance = SubspaceInstance::new(h, 2).unwrap().into();
        assert_eq!(sub.to_string().parse::<SdInstance>().unwrap(), sub);

        let empty: SdInstance = CosetInstance::new(BitMatrix::zeros(0, 0), BitVector::zeros(0), 0)
            .unwrap()
            .into();
        assert_eq!(empty.to_string(), "0 0\nS\nw 0\nmode coset\n");
        assert_eq!(empty.to_string().parse::<SdInstance>().unwrap(), empty);
    }

    #[test]
    fn rejects_malformed() {
        assert!("1 2\n11\nw 1\n".parse::<SdInstance>().is_err());
        assert!("1 2\n11\nS 1\nw 1\nmode coset\n"
            .parse::<SdInstance>()
            .is_err());
        assert!("1 2\n11\nw 0\nmode subspace\n"
            .parse::<SdInstance>()
            .is_err());
        assert!("1 2\n11\nS 11\nw 1\nmode subspace\n"
            .parse::<SdInstance>()
            .is_err());
        assert!("1 2\n11\nw 1\nmode other\n".parse::<SdInstance>().is_err());
    }

    #[test]
    fn acceptance_rules() {
        let h: BitMatrix = "3 2\n10\n01\n11\n".parse().unwrap();
        let coset = CosetInstance::new(h.clone(), "11".parse().unwrap(), 1).unwrap();
        assert!(coset.accepts(&[2]));
        assert!(!coset.accepts(&[0, 1]));
        let sub = SubspaceInstance::new(h, 3).unwrap();
        assert!(sub.accepts(&[0, 1, 2]));
        assert!(!sub.accepts(&[0, 1]));
    }
}
