use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Solution;
use crate::gf2::BitVector;
use crate::reductions::SdInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrangeConfig {
    pub iterations: u64,
    pub seed: u64,
}

impl Default for PrangeConfig {
    fn default() -> Self {
        PrangeConfig {
            iterations: 10_000,
            seed: 0,
        }
    }
}

/// Iterations per parallel work unit. Results depend only on the iteration
/// index, never on how chunks are scheduled.
const CHUNK: u64 = 64;

fn iteration_rng(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// Bit-vector operations needed by the elimination, so that small matrices
/// can run on single machine words.
trait Word: Clone {
    fn zero(len: usize) -> Self;
    fn unit(len: usize, i: usize) -> Self;
    fn first_one(&self) -> Option<usize>;
    fn bit(&self, i: usize) -> bool;
    fn set_bit(&mut self, i: usize);
    fn and(&self, other: &Self) -> Self;
    fn pop_lowest(&mut self) -> Option<usize>;
    fn xor_with(&mut self, other: &Self);
    fn count(&self) -> usize;
    fn ones(&self) -> Vec<usize>;
}

impl Word for BitVector {
    fn zero(len: usize) -> Self {
        BitVector::zeros(len)
    }
    fn unit(len: usize, i: usize) -> Self {
        BitVector::from_support(len, &[i])
    }
    fn first_one(&self) -> Option<usize> {
        BitVector::first_one(self)
    }
    fn bit(&self, i: usize) -> bool {
        self.get(i)
    }
    fn set_bit(&mut self, i: usize) {
        self.set(i, true)
    }
    fn and(&self, other: &Self) -> Self {
        BitVector::from_bits((0..self.len()).map(|i| self.get(i) && other.get(i)))
    }
    fn pop_lowest(&mut self) -> Option<usize> {
        let i = BitVector::first_one(self)?;
        self.set(i, false);
        Some(i)
    }
    fn xor_with(&mut self, other: &Self) {
        self.xor_assign(other)
    }
    fn count(&self) -> usize {
        self.weight()
    }
    fn ones(&self) -> Vec<usize> {
        self.support()
    }
}

impl Word for u128 {
    fn zero(_: usize) -> Self {
        0
    }
    fn unit(_: usize, i: usize) -> Self {
        1 << i
    }
    fn first_one(&self) -> Option<usize> {
        (*self != 0).then(|| self.trailing_zeros() as usize)
    }
    fn bit(&self, i: usize) -> bool {
        self >> i & 1 == 1
    }
    fn set_bit(&mut self, i: usize) {
        *self |= 1 << i
    }
    fn and(&self, other: &Self) -> Self {
        self & other
    }
    fn pop_lowest(&mut self) -> Option<usize> {
        let i = self.first_one()?;
        *self &= *self - 1;
        Some(i)
    }
    fn xor_with(&mut self, other: &Self) {
        *self ^= other
    }
    fn count(&self) -> usize {
        self.count_ones() as usize
    }
    fn ones(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.count());
        let mut x = *self;
        while let Some(i) = x.pop_lowest() {
            v.push(i);
        }
        v
    }
}

fn to_u128(v: &BitVector) -> u128 {
    v.iter_ones().fold(0, |acc, j| acc | 1 << j)
}

/// Reduced row echelon basis, indexed by pivot column. Tags index positions
/// in the information set.
struct Basis<W> {
    by_pivot: Vec<Option<(W, W)>>,
    pivots: W,
    rank: usize,
    tag_len: usize,
}

impl<W: Word> Basis<W> {
    fn new(cols: usize, tag_len: usize) -> Self {
        Basis {
            by_pivot: vec![None; cols],
            pivots: W::zero(cols),
            rank: 0,
            tag_len,
        }
    }

    // Basis rows vanish at every other pivot, so one pass over the pivot
    // bits of `row` suffices.
    fn reduce(&self, row: &mut W, tag: &mut W) {
        let mut hits = row.and(&self.pivots);
        while let Some(p) = hits.pop_lowest() {
            let (b, bt) = self.by_pivot[p].as_ref().expect("pivot present");
            row.xor_with(b);
            tag.xor_with(bt);
        }
    }

    /// Bit `rank` of the returned dependency tag stands for the inserted row.
    fn insert(&mut self, mut row: W) -> Option<W> {
        let mut tag = W::unit(self.tag_len, self.rank);
        self.reduce(&mut row, &mut tag);
        let q = match row.first_one() {
            Some(q) => q,
            None => return Some(tag),
        };
        for (b, bt) in self.by_pivot.iter_mut().flatten() {
            if b.bit(q) {
                b.xor_with(&row);
                bt.xor_with(&tag);
            }
        }
        self.by_pivot[q] = Some((row, tag));
        self.pivots.set_bit(q);
        self.rank += 1;
        None
    }
}

/// One Prange iteration: shuffle the rows, build an information set by
/// elimination in that order, and emit every word it yields that meets the
/// weight rule.
fn run_iteration<W: Word, F>(
    inst: &SdInstance,
    rows: &[W],
    target: Option<&W>,
    rank: usize,
    seed: u64,
    iteration: u64,
    emit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(Vec<usize>) -> ControlFlow<()>,
{
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut iteration_rng(seed, iteration));
    let mut basis = Basis::new(inst.h().r(), inst.h().r() + 1);
    let mut info: Vec<usize> = Vec::with_capacity(rank);
    let to_support = |tag: &W, info: &[usize], current: Option<usize>| {
        let mut s: Vec<usize> = tag
            .ones()
            .into_iter()
            .map(|j| info.get(j).copied().or(current).expect("tag bit in range"))
            .collect();
        s.sort_unstable();
        s
    };
    let w = inst.w();
    match target {
        Some(target) => {
            for &i in &order {
                if info.len() == rank {
                    break;
                }
                if basis.insert(rows[i].clone()).is_none() {
                    info.push(i);
                }
            }
            let mut row = target.clone();
            let mut tag = W::zero(basis.tag_len);
            basis.reduce(&mut row, &mut tag);
            if row.first_one().is_none() && tag.count() <= w {
                return emit(to_support(&tag, &info, None));
            }
        }
        None => {
            for &i in &order {
                match basis.insert(rows[i].clone()) {
                    None => info.push(i),
                    Some(dep) if dep.count() == w => emit(to_support(&dep, &info, Some(i)))?,
                    Some(_) => {}
                }
            }
        }
    }
    ControlFlow::Continue(())
}

/// Rows and target in whichever representation fits, with a runner for one
/// iteration.
enum Prepared {
    Small(Vec<u128>, Option<u128>),
    Wide(Vec<BitVector>, Option<BitVector>),
}

impl Prepared {
    fn new(inst: &SdInstance) -> Self {
        let h = inst.h();
        let target = match inst {
            SdInstance::Coset(c) => Some(c.syndrome()),
            SdInstance::Subspace(_) => None,
        };
        if h.r() < 128 {
            Prepared::Small(h.rows().iter().map(to_u128).collect(), target.map(to_u128))
        } else {
            Prepared::Wide(h.rows().to_vec(), target.cloned())
        }
    }

    fn run<F>(
        &self,
        inst: &SdInstance,
        rank: usize,
        seed: u64,
        it: u64,
        emit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(Vec<usize>) -> ControlFlow<()>,
    {
        match self {
            Prepared::Small(rows, t) => run_iteration(inst, rows, t.as_ref(), rank, seed, it, emit),
            Prepared::Wide(rows, t) => run_iteration(inst, rows, t.as_ref(), rank, seed, it, emit),
        }
    }
}

/// Prange information-set decoding. Returns the solution found by the
/// lowest-numbered successful iteration, so the output is a function of
/// `(inst, cfg)` alone. Absence is never certified.
pub fn solve_prange(inst: &SdInstance, cfg: &PrangeConfig) -> Option<Solution> {
    let h = inst.h();
    if let SdInstance::Coset(c) = inst {
        h.solve_left(c.syndrome())?;
    }
    let rank = h.rank();
    let prepared = Prepared::new(inst);
    let chunks = cfg.iterations.div_ceil(CHUNK);
    (0..chunks).into_par_iter().find_map_first(|chunk| {
        let end = ((chunk + 1) * CHUNK).min(cfg.iterations);
        (chunk * CHUNK..end).find_map(|it| {
            let mut found = None;
            let _ = prepared.run(inst, rank, cfg.seed, it, &mut |support| {
                if inst.accepts(&support) {
                    found = Some(Solution::new(support));
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            found
        })
    })
}

/// Streams every verifying candidate produced by `iterations` Prange
/// iterations, in iteration order. Returns the number of candidates visited.
pub fn prange_candidates<F>(inst: &SdInstance, seed: u64, iterations: u64, mut visit: F) -> u64
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let h = inst.h();
    if let SdInstance::Coset(c) = inst {
        if h.solve_left(c.syndrome()).is_none() {
            return 0;
        }
    }
    let rank = h.rank();
    let prepared = Prepared::new(inst);
    let mut visited = 0;
    for it in 0..iterations {
        let flow = prepared.run(inst, rank, seed, it, &mut |support| {
            if !inst.accepts(&support) {
                return ControlFlow::Continue(());
            }
            visited += 1;
            visit(&support)
        });
        if flow.is_break() {
            break;
        }
    }
    visited
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;
    use crate::reductions::{
        reduce_coset, reduce_gpsd, reduce_subspace_compact, CosetInstance, SubspaceInstance,
    };
    use crate::solvers::{solve_coset_exhaustive, ExhaustiveConfig, SolveOutcome};
    use crate::tdm::TdmInstance;
    use rand::Rng;

    #[test]
    fn worked_instance() {
        let (c, _) = reduce_coset(&TdmInstance::worked_example());
        let sol = solve_prange(
            &c.into(),
            &PrangeConfig {
                iterations: 1000,
                seed: 0,
            },
        )
        .unwrap();
        assert_eq!(sol.support(), [0, 3, 4]);
    }

    #[test]
    fn planted_gpsd_t4_u64() {
        let inst = TdmInstance::gen_planted(4, 64, 11).unwrap();
        let (g, _) = reduce_gpsd(&inst).unwrap();
        let g: SdInstance = g.into();
        let sol = solve_prange(
            &g,
            &PrangeConfig {
                iterations: 10_000,
                seed: 1,
            },
        )
        .unwrap();
        assert!(sol.verifies(&g) && sol.weight() <= 4);
    }

    #[test]
    fn subspace_compact() {
        let (c, _) = reduce_subspace_compact(&TdmInstance::worked_example()).unwrap();
        let sol = solve_prange(&c.into(), &PrangeConfig::default()).unwrap();
        assert_eq!(sol.support(), [0, 3, 4, 5, 6]);
    }

    #[test]
    fn deterministic_and_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut unsolvable = 0;
        let mut seed = 0;
        while unsolvable < 100 {
            seed += 1;
            let n = rng.gen_range(4..=16);
            let r = rng.gen_range(2..=8);
            let rows = (0..n)
                .map(|_| BitVector::from_bits((0..r).map(|_| rng.gen_bool(0.5))))
                .collect();
            let h = BitMatrix::from_rows(r, rows).unwrap();
            let s = BitVector::from_bits((0..r).map(|_| rng.gen_bool(0.5)));
            let c = CosetInstance::new(h, s, rng.gen_range(1..=3)).unwrap();
            let exact = solve_coset_exhaustive(&c, &ExhaustiveConfig::default());
            let sd: SdInstance = c.into();
            let cfg = PrangeConfig {
                iterations: 200,
                seed,
            };
            let a = solve_prange(&sd, &cfg);
            assert_eq!(a, solve_prange(&sd, &cfg));
            match exact {
                SolveOutcome::Absent => {
                    unsolvable += 1;
                    assert_eq!(a, None);
                }
                _ => assert!(a.is_none_or(|s| s.verifies(&sd))),
            }
        }
    }

    #[test]
    fn candidates_are_solutions() {
        let (c, _) = reduce_subspace_compact(&TdmInstance::gen_planted(4, 12, 3).unwrap()).unwrap();
        let sd: SdInstance = c.into();
        let mut seen = 0;
        let visited = prange_candidates(&sd, 0, 50, |s| {
            assert!(sd.accepts(s));
            seen += 1;
            ControlFlow::Continue(())
        });
        assert!(visited > 0);
        assert_eq!(visited, seen);
        let id: SdInstance = SubspaceInstance::new(BitMatrix::identity(4), 1)
            .unwrap()
            .into();
        assert_eq!(
            prange_candidates(&id, 0, 10, |_| ControlFlow::Continue(())),
            0
        );
    }
}
