//! Set algebra on M2(F_q): sumsets, product sets, representation functions,
//! energies, and the solution counters `I` and `J`.
//!
//! Everything is computed from frequency tables of length `q^4`; quantities
//! that are sums over products of two tables go through an additive
//! convolution (naive for q <= 4, exact character transform above).

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fourier;
use crate::gf::Order;
use crate::mat2::{Mat2, MatRing};

/// Sumset or product set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bitmap(Vec<u64>);

impl Bitmap {
    fn new(n: usize) -> Bitmap {
        Bitmap(vec![0; n.div_ceil(64)])
    }

    #[inline]
    fn get(&self, i: u32) -> bool {
        self.0[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i`, returning whether it was previously clear.
    #[inline]
    fn insert(&mut self, i: u32) -> bool {
        let w = &mut self.0[(i / 64) as usize];
        let mask = 1u64 << (i % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A deduplicated set of matrices with O(1) membership.
#[derive(Clone)]
pub struct MatSet {
    ring: MatRing,
    members: Vec<u32>,
    bitmap: Bitmap,
}

impl fmt::Debug for MatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatSet(q={}, |S|={})", self.ring.q(), self.members.len())
    }
}

impl PartialEq for MatSet {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.members == other.members
    }
}

impl Eq for MatSet {}

impl MatSet {
    pub fn from_indices<I: IntoIterator<Item = u32>>(ring: &MatRing, indices: I) -> MatSet {
        let mut bitmap = Bitmap::new(ring.size() as usize);
        let mut members: Vec<u32> = indices
            .into_iter()
            .filter(|&i| {
                assert!(i < ring.size(), "matrix index {i} out of range");
                bitmap.insert(i)
            })
            .collect();
        members.sort_unstable();
        MatSet { ring: ring.clone(), members, bitmap }
    }

    fn from_bitmap(ring: &MatRing, bitmap: Bitmap) -> MatSet {
        let members = (0..ring.size()).filter(|&i| bitmap.get(i)).collect();
        MatSet { ring: ring.clone(), members, bitmap }
    }

    pub fn from_mats<'a, I: IntoIterator<Item = &'a Mat2>>(ring: &MatRing, mats: I) -> MatSet {
        Self::from_indices(ring, mats.into_iter().map(|m| ring.index(m)))
    }

    pub fn empty(ring: &MatRing) -> MatSet {
        Self::from_indices(ring, std::iter::empty())
    }

    /// All of M2(F_q).
    pub fn full(ring: &MatRing) -> MatSet {
        Self::from_indices(ring, 0..ring.size())
    }

    pub fn gl2(ring: &MatRing) -> MatSet {
        Self::from_indices(ring, ring.gl2_indices())
    }

    pub fn ring(&self) -> &MatRing {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member indices, ascending.
    pub fn indices(&self) -> &[u32] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = Mat2> + '_ {
        self.members.iter().map(|&i| self.ring.mat(i))
    }

    #[inline]
    pub fn contains_idx(&self, i: u32) -> bool {
        self.bitmap.get(i)
    }

    pub fn contains(&self, m: &Mat2) -> bool {
        self.contains_idx(self.ring.index(m))
    }

    /// Number of set bits in the membership bitmap; always equals `len()`.
    pub fn bitmap_count(&self) -> usize {
        self.bitmap.count()
    }

    pub fn is_subset(&self, other: &MatSet) -> bool {
        self.members.iter().all(|&i| other.contains_idx(i))
    }

    pub fn is_invertible_set(&self) -> bool {
        self.members.iter().all(|&i| self.ring.is_invertible_idx(i))
    }

    pub fn difference(&self, other: &MatSet) -> MatSet {
        Self::from_indices(&self.ring, self.members.iter().copied().filter(|&i| !other.contains_idx(i)))
    }

    pub fn union(&self, other: &MatSet) -> MatSet {
        Self::from_indices(&self.ring, self.members.iter().chain(&other.members).copied())
    }

    /// `-A`.
    pub fn negated(&self) -> MatSet {
        Self::from_indices(&self.ring, self.members.iter().map(|&i| self.ring.neg_idx(i)))
    }

    /// `A^{-1}`; fails if any member is singular.
    pub fn inverses(&self) -> Result<MatSet> {
        let inv: Vec<u32> = self
            .iter()
            .map(|m| self.ring.inverse(&m).map(|x| self.ring.index(&x)))
            .collect::<Result<_>>()
            .map_err(|_| Error::NotInvertibleSet)?;
        Ok(Self::from_indices(&self.ring, inv))
    }

    /// `gA = {g a}`.
    pub fn left_translate(&self, g: &Mat2) -> MatSet {
        let gi = self.ring.index(g);
        Self::from_indices(&self.ring, self.members.iter().map(|&a| self.ring.mul_idx(gi, a)))
    }

    /// Indicator function as a frequency table.
    pub fn indicator(&self) -> FreqTable {
        let mut counts = vec![0u64; self.ring.size() as usize];
        for &i in &self.members {
            counts[i as usize] = 1;
        }
        FreqTable { counts }
    }

    /// Writes the set-file format: a `q=<p>^<k>` header, then one matrix per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let f = self.ring.field();
        writeln!(w, "q={}^{}", f.p(), f.k())?;
        for m in self.iter() {
            writeln!(w, "{m}")?;
        }
        Ok(())
    }

    /// Reads the set-file format. Uses the default modulus for the declared order.
    pub fn read_from<R: BufRead>(r: R) -> Result<MatSet> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty set file".into()))??;
        let order: Order = header
            .trim()
            .strip_prefix("q=")
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?
            .parse()?;
        let ring = MatRing::new(&order.field()?);
        Self::read_body(&ring, lines)
    }

    /// Reads a set file into an existing ring; the header must match its order.
    pub fn read_into<R: BufRead>(ring: &MatRing, r: R) -> Result<MatSet> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty set file".into()))??;
        let order: Order = header
            .trim()
            .strip_prefix("q=")
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?
            .parse()?;
        if order.q() != ring.q() {
            return Err(Error::FieldMismatch);
        }
        Self::read_body(ring, lines)
    }

    fn read_body<I: Iterator<Item = std::io::Result<String>>>(ring: &MatRing, lines: I) -> Result<MatSet> {
        let mut idx = Vec::new();
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            idx.push(ring.index(&ring.parse(t)?));
        }
        Ok(Self::from_indices(ring, idx))
    }
}

/// A representation function: `counts[lambda]` for every matrix index `lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqTable {
    pub counts: Vec<u64>,
}

impl FreqTable {
    pub fn get(&self, lambda: u32) -> u64 {
        self.counts[lambda as usize]
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    pub fn second_moment(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128 * c as u128).sum()
    }

    pub fn support_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn support(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as u32, c))
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Two-column export `lambda_index,count`, support only.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda_index,count")?;
        for (i, c) in self.support() {
            writeln!(w, "{i},{c}")?;
        }
        Ok(())
    }
}

fn same_ring(sets: &[&MatSet]) -> Result<MatRing> {
    let ring = sets[0].ring.clone();
    if sets.iter().any(|s| s.ring != ring) {
        return Err(Error::FieldMismatch);
    }
    Ok(ring)
}

#[inline]
fn apply(ring: &MatRing, op: Op, a: u32, b: u32) -> u32 {
    match op {
        Op::Add => ring.add_idx(a, b),
        Op::Mul => ring.mul_idx(a, b),
    }
}

fn combine(a: &MatSet, b: &MatSet, op: Op) -> Result<MatSet> {
    let ring = same_ring(&[a, b])?;
    let mut bitmap = Bitmap::new(ring.size() as usize);
    for &x in &a.members {
        for &y in &b.members {
            bitmap.insert(apply(&ring, op, x, y));
        }
    }
    Ok(MatSet::from_bitmap(&ring, bitmap))
}

/// `A + B`.
pub fn set_sum(a: &MatSet, b: &MatSet) -> Result<MatSet> {
    combine(a, b, Op::Add)
}

/// `AB = {ab}`, order-sensitive.
pub fn set_prod(a: &MatSet, b: &MatSet) -> Result<MatSet> {
    combine(a, b, Op::Mul)
}

/// `r(lambda) = |{(a, b) in A x B : a op b = lambda}|`.
pub fn rep_function(a: &MatSet, b: &MatSet, op: Op) -> Result<FreqTable> {
    let ring = same_ring(&[a, b])?;
    let mut counts = vec![0u64; ring.size() as usize];
    for &x in &a.members {
        for &y in &b.members {
            counts[apply(&ring, op, x, y) as usize] += 1;
        }
    }
    Ok(FreqTable { counts })
}

/// `E(A, B) = sum_lambda r(lambda)^2`.
pub fn energy(a: &MatSet, b: &MatSet, op: Op) -> Result<u128> {
    Ok(rep_function(a, b, op)?.second_moment())
}

pub fn additive_energy(a: &MatSet) -> u128 {
    energy(a, a, Op::Add).expect("same ring")
}

pub fn multiplicative_energy(a: &MatSet) -> u128 {
    energy(a, a, Op::Mul).expect("same ring")
}

/// Largest q for which additive convolution is done pairwise over supports.
const NAIVE_CONVOLUTION_MAX_Q: u32 = 4;

/// `(f ⊞ g)(lambda) = sum_{x + y = lambda} f(x) g(y)` over `(M2(F_q), +)`.
pub fn convolve(ring: &MatRing, f: &FreqTable, g: &FreqTable) -> Vec<u128> {
    let n = ring.size() as usize;
    if ring.q() <= NAIVE_CONVOLUTION_MAX_Q {
        let mut out = vec![0u128; n];
        let gs: Vec<(u32, u64)> = g.support().collect();
        for (x, fx) in f.support() {
            for &(y, gy) in &gs {
                out[ring.add_idx(x, y) as usize] += fx as u128 * gy as u128;
            }
        }
        out
    } else {
        let fld = ring.field();
        fourier::convolve(&f.counts, &g.counts, fld.p(), 4 * fld.k())
    }
}

/// Number of sextuples in `A x B x C x D x E x F` with `ab + ef = c + d`.
pub fn count_i(a: &MatSet, b: &MatSet, c: &MatSet, d: &MatSet, e: &MatSet, f: &MatSet) -> Result<u128> {
    let ring = same_ring(&[a, b, c, d, e, f])?;
    if [a, b, c, d, e, f].iter().any(|s| s.is_empty()) {
        return Ok(0);
    }
    let lhs = convolve(&ring, &rep_function(a, b, Op::Mul)?, &rep_function(e, f, Op::Mul)?);
    let rhs = convolve(&ring, &c.indicator(), &d.indicator());
    Ok(lhs.iter().zip(&rhs).map(|(x, y)| x * y).sum())
}

/// Number of quadruples in `A x B x C x D` with `a + b = cd`.
pub fn count_j(a: &MatSet, b: &MatSet, c: &MatSet, d: &MatSet) -> Result<u128> {
    let ring = same_ring(&[a, b, c, d])?;
    if [a, b, c, d].iter().any(|s| s.is_empty()) {
        return Ok(0);
    }
    let sums = convolve(&ring, &a.indicator(), &b.indicator());
    let prods = rep_function(c, d, Op::Mul)?;
    Ok(sums.iter().zip(&prods.counts).map(|(&s, &r)| s * r as u128).sum())
}

/// `t(lambda) = |{(a, b, c) : ab + c = lambda}|`.
pub fn rep_ab_plus_c(a: &MatSet, b: &MatSet, c: &MatSet) -> Result<FreqTable> {
    let ring = same_ring(&[a, b, c])?;
    let conv = convolve(&ring, &rep_function(a, b, Op::Mul)?, &c.indicator());
    Ok(FreqTable { counts: conv.into_iter().map(|v| u64::try_from(v).expect("t(lambda) <= q^12")).collect() })
}

/// `u(lambda) = |{(a, b, c) : (a + b)c = lambda}|`.
pub fn rep_a_plus_b_times_c(a: &MatSet, b: &MatSet, c: &MatSet) -> Result<FreqTable> {
    let ring = same_ring(&[a, b, c])?;
    let sums = rep_function(a, b, Op::Add)?;
    let mut counts = vec![0u64; ring.size() as usize];
    for (s, m) in sums.support() {
        for &z in c.indices() {
            counts[ring.mul_idx(s, z) as usize] += m;
        }
    }
    Ok(FreqTable { counts })
}
