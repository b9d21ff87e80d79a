//! The sum-product digraph on `V = M2(F_q)^3`.
//!
//! Edge `(a, e, c) -> (b, f, d)` iff `ab + ef = c + d` (left variant) or
//! `ba + ef = c + d` (right variant). Vertices are packed as
//! `(ia * q^4 + ie) * q^4 + ic`, a base-p number with `12k` digits, so vertex
//! differences are digit-wise and the Gram operator is a Cayley operator on
//! `(Z/p)^{12k}`.
//!
//! The Gram entry `|N+(u, v)|` depends only on `v - u`: it counts `(x, y)` with
//! `a' x + e' y = c'` (left) or `x a' + e' y = c'` (right), which is
//! `q^{8 - dim(image)}` when `c'` is in the image of that F_q-linear map and 0
//! otherwise. [`DigraphOracle::gram_weight`] computes exactly that, with no case
//! analysis; [`DigraphOracle::classify_pair`] is the case analysis, and the two
//! are checked against each other and against brute force.
//!
//! The digraph is not normal in general: common in-neighbours solve
//! `x a' + y e' = c'` (left variant), a row-space condition on the stacked
//! `(a'; e')` rather than a column-space condition on `(a' e')`. The reported
//! `mu` is therefore the second singular value, `sqrt` of the largest Gram
//! eigenvalue off the all-ones vector; it bounds every nontrivial eigenvalue
//! modulus and is the quantity the mixing inequality actually needs.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::gf::Fe;
use crate::mat2::{Block2x4, CompatibilityTag, Mat2, MatRing};
use crate::setalg::{count_i, MatSet};

/// Largest q for which the exact spectrum is computed (q^12 <= 16.7M).
pub const SPECTRUM_MAX_Q: u32 = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `ab + ef = c + d`
    #[default]
    Left,
    /// `ba + ef = c + d`
    Right,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "left" => Ok(Variant::Left),
            "right" => Ok(Variant::Right),
            _ => Err(Error::Parse(format!("unknown variant {s:?} (expected left|right)"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Left => "left",
            Variant::Right => "right",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

/// A vertex `(a, e, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub a: Mat2,
    pub e: Mat2,
    pub c: Mat2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairTag {
    Diagonal,
    /// `a' = e' = 0`, `c' != 0`: the base equation reads `0 = c'`.
    Rank0Mismatch,
    Case21,
    Case22a,
    Case22b,
    Case23,
    Case3,
    /// Right-variant pairs; the count comes from the image dimension.
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairClass {
    pub tag: PairTag,
    pub predicted_common_out: u64,
}

/// Implicit sum-product digraph.
#[derive(Clone, Debug)]
pub struct DigraphOracle {
    ring: MatRing,
    variant: Variant,
    q4: u64,
}

impl DigraphOracle {
    pub fn new(ring: &MatRing, variant: Variant) -> DigraphOracle {
        DigraphOracle { ring: ring.clone(), variant, q4: ring.size() as u64 }
    }

    pub fn ring(&self) -> &MatRing {
        &self.ring
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn q(&self) -> u32 {
        self.ring.q()
    }

    /// Number of vertices, `q^12`.
    pub fn n(&self) -> u64 {
        self.q4 * self.q4 * self.q4
    }

    /// Degree, `q^8`.
    pub fn d(&self) -> u64 {
        self.q4 * self.q4
    }

    #[inline]
    pub fn pack(&self, a: u32, e: u32, c: u32) -> u64 {
        (a as u64 * self.q4 + e as u64) * self.q4 + c as u64
    }

    #[inline]
    pub fn unpack(&self, v: u64) -> (u32, u32, u32) {
        let c = (v % self.q4) as u32;
        let rest = v / self.q4;
        ((rest / self.q4) as u32, (rest % self.q4) as u32, c)
    }

    pub fn vertex(&self, v: u64) -> Vertex {
        let (a, e, c) = self.unpack(v);
        Vertex { a: self.ring.mat(a), e: self.ring.mat(e), c: self.ring.mat(c) }
    }

    pub fn index_of(&self, v: &Vertex) -> u64 {
        self.pack(self.ring.index(&v.a), self.ring.index(&v.e), self.ring.index(&v.c))
    }

    /// `v - u`, coordinate-wise.
    pub fn difference(&self, v: u64, u: u64) -> u64 {
        let (va, ve, vc) = self.unpack(v);
        let (ua, ue, uc) = self.unpack(u);
        let r = &self.ring;
        self.pack(r.sub_idx(va, ua), r.sub_idx(ve, ue), r.sub_idx(vc, uc))
    }

    /// The first product of the edge equation: `ab` or `ba`.
    #[inline]
    fn lead(&self, a: u32, b: u32) -> u32 {
        match self.variant {
            Variant::Left => self.ring.mul_idx(a, b),
            Variant::Right => self.ring.mul_idx(b, a),
        }
    }

    #[inline]
    pub fn has_edge(&self, u: u64, v: u64) -> bool {
        let (a, e, c) = self.unpack(u);
        let (b, f, d) = self.unpack(v);
        let r = &self.ring;
        r.add_idx(self.lead(a, b), r.mul_idx(e, f)) == r.add_idx(c, d)
    }

    /// The `q^8` out-neighbours `(b, f, ab + ef - c)`.
    pub fn out_neighbors(&self, v: u64) -> impl Iterator<Item = u64> + '_ {
        let (a, e, c) = self.unpack(v);
        let q4 = self.q4 as u32;
        (0..q4).flat_map(move |b| {
            (0..q4).map(move |f| {
                let r = &self.ring;
                let d = r.sub_idx(r.add_idx(self.lead(a, b), r.mul_idx(e, f)), c);
                self.pack(b, f, d)
            })
        })
    }

    /// The `q^8` in-neighbours `(a, e, ab + ef - d)` of `(b, f, d)`.
    pub fn in_neighbors(&self, v: u64) -> impl Iterator<Item = u64> + '_ {
        let (b, f, d) = self.unpack(v);
        let q4 = self.q4 as u32;
        (0..q4).flat_map(move |a| {
            (0..q4).map(move |e| {
                let r = &self.ring;
                let c = r.sub_idx(r.add_idx(self.lead(a, b), r.mul_idx(e, f)), d);
                self.pack(a, e, c)
            })
        })
    }

    pub fn common_neighbors_bruteforce(&self, u: u64, v: u64, dir: Direction) -> u64 {
        match dir {
            Direction::Out => self.out_neighbors(u).filter(|&w| self.has_edge(v, w)).count() as u64,
            Direction::In => self.in_neighbors(u).filter(|&w| self.has_edge(w, v)).count() as u64,
        }
    }

    /// Case analysis of the common out-neighbourhood of `u` and `v`.
    ///
    /// For the right variant the rank-based cases do not apply; the pair is
    /// tagged `Generic` and the count is taken from [`Self::gram_weight`].
    pub fn classify_pair(&self, u: u64, v: u64) -> PairClass {
        let q = self.q() as u64;
        if u == v {
            return PairClass { tag: PairTag::Diagonal, predicted_common_out: q.pow(8) };
        }
        if self.variant == Variant::Right {
            return PairClass { tag: PairTag::Generic, predicted_common_out: self.gram_weight(self.difference(v, u)) };
        }
        let (ua, ue, uc) = self.unpack(u);
        let (va, ve, vc) = self.unpack(v);
        let r = &self.ring;
        let abar = r.mat(r.sub_idx(ua, va));
        let ebar = r.mat(r.sub_idx(ue, ve));
        let cbar = r.mat(r.sub_idx(uc, vc));
        let t = Block2x4 { left: abar, right: ebar };
        let (tag, count) = match r.rank2x4(&t) {
            0 => (PairTag::Rank0Mismatch, 0),
            1 => match r.rank(&cbar) {
                2 => (PairTag::Case21, 0),
                0 => (PairTag::Case23, q.pow(6)),
                _ => match r.proportionality_class(&t, &cbar).expect("rank checked") {
                    CompatibilityTag::SameFactor => (PairTag::Case22a, q.pow(6)),
                    CompatibilityTag::Incompatible => (PairTag::Case22b, 0),
                },
            },
            _ => (PairTag::Case3, q.pow(4)),
        };
        PairClass { tag, predicted_common_out: count }
    }

    /// Gram entries implied by the printed decomposition
    /// `(q^8 - q^4) I + q^4 J - q^4 E21 + (q^6 - q^4) E22a - q^4 E22b + (q^6 - q^4) E23`.
    /// Rank0Mismatch pairs fall under no `E` term and so receive `q^4` here.
    pub fn printed_decomposition_value(&self, tag: PairTag) -> Option<u64> {
        let q = self.q() as u64;
        Some(match tag {
            PairTag::Diagonal => q.pow(8),
            PairTag::Case21 | PairTag::Case22b => 0,
            PairTag::Case22a | PairTag::Case23 => q.pow(6),
            PairTag::Case3 | PairTag::Rank0Mismatch => q.pow(4),
            PairTag::Generic => return None,
        })
    }

    /// Generators of the image of `(x, y) -> a x + e y` (left) or `x a + e y` (right).
    fn image_generators(&self, a: u32, e: u32) -> [u32; 8] {
        let r = &self.ring;
        let unit = |i: usize| {
            let mut m = Mat2::ZERO;
            m.0[i] = Fe::ONE;
            r.index(&m)
        };
        let mut out = [0u32; 8];
        for i in 0..4 {
            let x = unit(i);
            out[i] = self.lead(a, x);
            out[4 + i] = r.mul_idx(e, x);
        }
        out
    }

    /// Basis of the image, by elimination on the 4-vectors of entries.
    fn image_basis(&self, a: u32, e: u32) -> Vec<Mat2> {
        let f = self.ring.field();
        let mut basis: Vec<(usize, Mat2)> = Vec::new();
        for g in self.image_generators(a, e) {
            let mut v = self.ring.mat(g);
            for (piv, b) in &basis {
                if !v.0[*piv].is_zero() {
                    let s = v.0[*piv];
                    v = self.ring.sub(&v, &self.ring.scale(s, b));
                }
            }
            if let Some(piv) = v.0.iter().position(|x| !x.is_zero()) {
                let inv = f.inv(v.0[piv]).expect("nonzero pivot");
                let v = self.ring.scale(inv, &v);
                for (_, b) in basis.iter_mut() {
                    if !b.0[piv].is_zero() {
                        let s = b.0[piv];
                        *b = self.ring.sub(b, &self.ring.scale(s, &v));
                    }
                }
                basis.push((piv, v));
            }
        }
        basis.into_iter().map(|(_, b)| b).collect()
    }

    fn span(&self, basis: &[Mat2]) -> Vec<u32> {
        let r = &self.ring;
        let mut out = vec![r.index(&Mat2::ZERO)];
        for b in basis {
            let multiples: Vec<u32> = r.field().elements().skip(1).map(|s| r.index(&r.scale(s, b))).collect();
            let cur = out.len();
            for &m in &multiples {
                for i in 0..cur {
                    out.push(r.add_idx(out[i], m));
                }
            }
        }
        out
    }

    /// `|N+(u, u + delta)|`, from the dimension of the image of the linear map.
    pub fn gram_weight(&self, delta: u64) -> u64 {
        let (a, e, c) = self.unpack(delta);
        let basis = self.image_basis(a, e);
        if self.span(&basis).contains(&c) {
            (self.q() as u64).pow(8 - basis.len() as u32)
        } else {
            0
        }
    }

    /// The full Gram weight table over all `q^12` differences.
    pub fn gram_weights(&self) -> Vec<u64> {
        let q = self.q() as u64;
        let mut w = vec![0u64; self.n() as usize];
        for a in 0..self.q4 as u32 {
            for e in 0..self.q4 as u32 {
                let basis = self.image_basis(a, e);
                let val = q.pow(8 - basis.len() as u32);
                let base = self.pack(a, e, 0);
                for c in self.span(&basis) {
                    w[(base + c as u64) as usize] = val;
                }
            }
        }
        w
    }

    /// Exact Gram spectrum by the character transform of [`Self::gram_weights`].
    pub fn second_eigenvalue(&self) -> Result<SpectralResult> {
        let q = self.q();
        if q > SPECTRUM_MAX_Q {
            return Err(Error::OrderTooLargeForSpectrum(q));
        }
        let f = self.ring.field();
        let dims = 12 * f.k();
        let spectrum = fourier::cayley_spectrum(&self.gram_weights(), f.p(), dims)?;
        let trivial = spectrum[0];
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        for &ev in &spectrum[1..] {
            *counts.entry(ev).or_default() += 1;
        }
        if let Some((&neg, _)) = counts.iter().next().filter(|(&ev, _)| ev < 0) {
            return Err(Error::InvalidInput(format!("Gram operator has negative eigenvalue {neg}")));
        }
        let mu_sq = counts.keys().next_back().copied().unwrap_or(0);
        let mu = (mu_sq as f64).sqrt();
        let mut summary: Vec<(i64, u64)> = counts.into_iter().collect();
        summary.reverse();
        Ok(SpectralResult {
            q,
            variant: self.variant,
            mu,
            mu_squared: mu_sq,
            constant_c: mu / (q as f64).powf(6.5),
            trivial_eigenvalue: trivial,
            nontrivial_spectrum: summary,
            method: format!("character transform over (Z/{})^{dims}, exact mod {}", f.p(), fourier::PRIMES[0]),
        })
    }

    /// `size` distinct vertices, uniformly.
    pub fn random_vertices<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Result<Vec<u64>> {
        let n = self.n() as usize;
        if size > n {
            return Err(Error::SizeTooLarge { requested: size, available: n });
        }
        let mut v: Vec<u64> = index::sample(rng, n, size).into_iter().map(|i| i as u64).collect();
        v.sort_unstable();
        Ok(v)
    }

    /// Exact `e(B, C)` and the mixing-lemma comparison with the given `mu`.
    pub fn mixing_deviation(&self, b: &[u64], c: &[u64], mu: f64) -> Result<MixingReport> {
        if b.is_empty() || c.is_empty() {
            return Err(Error::EmptySet);
        }
        let b = dedup(b);
        let c = dedup(c);
        let edges = b.iter().map(|&u| c.iter().filter(|&&v| self.has_edge(u, v)).count() as u64).sum();
        Ok(MixingReport::new(edges, b.len() as u64, c.len() as u64, self.d(), self.n(), mu))
    }

    /// `I(A, ..., F)` against `|A|...|F| / q^4` with error term `mu * sqrt(prod)`,
    /// via the embedding `U = A x E x C`, `W = B x F x D`.
    pub fn count_i_spectral_check(&self, sets: [&MatSet; 6], mu: f64) -> Result<Prop31Report> {
        if self.variant != Variant::Left {
            return Err(Error::InvalidInput("the I count lives on the left-product digraph".into()));
        }
        if sets.iter().any(|s| *s.ring() != self.ring) {
            return Err(Error::FieldMismatch);
        }
        let [a, b, c, d, e, f] = sets;
        let i = count_i(a, b, c, d, e, f)?;
        let product: u128 = sets.iter().map(|s| s.len() as u128).product();
        let main = product as f64 / (self.q() as f64).powi(4);
        let deviation = (i as f64 - main).abs();
        let bound = mu * (product as f64).sqrt();
        Ok(Prop31Report { i, product, main_term: main, deviation, bound, holds: deviation <= bound })
    }
}

fn dedup(v: &[u64]) -> Vec<u64> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub q: u32,
    pub variant: Variant,
    /// Second singular value of the adjacency matrix.
    pub mu: f64,
    pub mu_squared: i64,
    /// `mu / q^6.5`
    pub constant_c: f64,
    pub trivial_eigenvalue: i64,
    /// Distinct Gram eigenvalues off the trivial character with multiplicities, descending.
    pub nontrivial_spectrum: Vec<(i64, u64)>,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub e_bc: u64,
    pub b_size: u64,
    pub c_size: u64,
    pub expected: f64,
    pub deviation: f64,
    pub bound: f64,
    pub holds: bool,
}

impl MixingReport {
    fn new(e_bc: u64, nb: u64, nc: u64, d: u64, n: u64, mu: f64) -> MixingReport {
        // d/n * |B||C| exactly as a rational, then rounded once
        let expected = (d as u128 * nb as u128 * nc as u128) as f64 / n as f64;
        let deviation = (e_bc as f64 - expected).abs();
        let bound = mu * ((nb * nc) as f64).sqrt();
        MixingReport { e_bc, b_size: nb, c_size: nc, expected, deviation, bound, holds: deviation <= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop31Report {
    pub i: u128,
    pub product: u128,
    pub main_term: f64,
    pub deviation: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn write_vertex_set<W: Write>(vertices: &[u64], mut w: W) -> Result<()> {
    for v in vertices {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn read_vertex_set<R: BufRead>(oracle: &DigraphOracle, r: R) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: u64 = t.parse().map_err(|_| Error::Parse(format!("bad vertex index {t:?}")))?;
        if v >= oracle.n() {
            return Err(Error::Parse(format!("vertex index {v} out of range")));
        }
        out.push(v);
    }
    Ok(out)
}

/// Explicit adjacency and Gram matrices for q = 2, used to cross-check the transform.
pub mod dense {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::DigraphOracle;
    use crate::error::{Error, Result};

    pub const MAX_ITERATIONS: usize = 10_000;
    pub const RESIDUAL_TOL: f64 = 1e-10;

    /// Row-major `n x n` Gram matrix `M M^T`.
    pub struct DenseGram {
        pub n: usize,
        pub entries: Vec<u32>,
    }

    #[derive(Clone, Debug)]
    pub struct PowerIteration {
        pub eigenvalue: f64,
        pub iterations: usize,
        pub residual: f64,
    }

    impl DenseGram {
        pub fn assemble(oracle: &DigraphOracle) -> Result<DenseGram> {
            if oracle.q() != 2 {
                return Err(Error::OrderTooLargeForSpectrum(oracle.q()));
            }
            let n = oracle.n() as usize;
            let words = n / 64;
            let mut adj = vec![0u64; n * words];
            for u in 0..n {
                for w in oracle.out_neighbors(u as u64) {
                    adj[u * words + w as usize / 64] |= 1 << (w % 64);
                }
            }
            let mut entries = vec![0u32; n * n];
            for u in 0..n {
                let ru = &adj[u * words..(u + 1) * words];
                for v in u..n {
                    let rv = &adj[v * words..(v + 1) * words];
                    let c: u32 = ru.iter().zip(rv).map(|(x, y)| (x & y).count_ones()).sum();
                    entries[u * n + v] = c;
                    entries[v * n + u] = c;
                }
            }
            Ok(DenseGram { n, entries })
        }

        pub fn get(&self, u: usize, v: usize) -> u32 {
            self.entries[u * self.n + v]
        }

        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for (u, out) in y.iter_mut().enumerate() {
                let row = &self.entries[u * self.n..(u + 1) * self.n];
                *out = row.iter().zip(x).map(|(&g, &xi)| g as f64 * xi).sum();
            }
        }

        /// Largest eigenvalue on the complement of the all-ones vector, by power
        /// iteration with that vector projected out at every step.
        pub fn deflated_power_iteration(&self, seed: u64) -> PowerIteration {
            let n = self.n;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut y = vec![0.0; n];
            let project = |v: &mut [f64]| {
                let mean = v.iter().sum::<f64>() / n as f64;
                v.iter_mut().for_each(|e| *e -= mean);
            };
            let normalize = |v: &mut [f64]| {
                let norm = v.iter().map(|e| e * e).sum::<f64>().sqrt();
                v.iter_mut().for_each(|e| *e /= norm);
            };
            project(&mut x);
            normalize(&mut x);
            let mut lambda = 0.0;
            let mut residual = f64::INFINITY;
            let mut it = 0;
            while it < MAX_ITERATIONS {
                it += 1;
                self.apply(&x, &mut y);
                project(&mut y);
                lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
                residual = x.iter().zip(&y).map(|(a, b)| (b - lambda * a).powi(2)).sum::<f64>().sqrt() / lambda.abs().max(1.0);
                if residual < RESIDUAL_TOL {
                    break;
                }
                std::mem::swap(&mut x, &mut y);
                normalize(&mut x);
            }
            PowerIteration { eigenvalue: lambda, iterations: it, residual }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn oracle(q: u32, variant: Variant) -> DigraphOracle {
        let f = crate::gf::FieldSpec::of_order(q).unwrap();
        DigraphOracle::new(&MatRing::new(&f), variant)
    }

    #[test]
    fn packing_round_trip() {
        let o = oracle(3, Variant::Left);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let v = rng.gen_range(0..o.n());
            assert_eq!(o.index_of(&o.vertex(v)), v);
            let (a, e, c) = o.unpack(v);
            assert_eq!(o.pack(a, e, c), v);
        }
    }

    #[test]
    fn zero_vertex_neighbours_have_d_zero() {
        let o = oracle(2, Variant::Left);
        let nb: Vec<u64> = o.out_neighbors(0).collect();
        assert_eq!(nb.len(), 256);
        assert!(nb.iter().all(|&w| o.unpack(w).2 == 0));
    }

    #[test]
    fn neighbours_are_edges_and_distinct() {
        for variant in [Variant::Left, Variant::Right] {
            let o = oracle(3, variant);
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            for _ in 0..5 {
                let v = rng.gen_range(0..o.n());
                let out = dedup(&o.out_neighbors(v).collect::<Vec<_>>());
                let inn = dedup(&o.in_neighbors(v).collect::<Vec<_>>());
                assert_eq!(out.len(), 6561);
                assert_eq!(inn.len(), 6561);
                assert!(out.iter().all(|&w| o.has_edge(v, w)));
                assert!(inn.iter().all(|&w| o.has_edge(w, v)));
            }
        }
    }

    #[test]
    fn case_tags_on_crafted_pairs() {
        let o = oracle(3, Variant::Left);
        let r = o.ring().clone();
        let i = r.index(&Mat2::IDENTITY);
        let e11 = r.index(&Mat2::new(1, 0, 0, 0));
        let e12 = r.index(&Mat2::new(0, 1, 0, 0));
        let rank1 = r.index(&Mat2::new(1, 1, 2, 2)); // rows (1,1), 2*(1,1)
        let same = r.index(&Mat2::new(1, 0, 2, 0));
        let other = r.index(&Mat2::new(1, 0, 1, 0));
        let cases = [
            (o.pack(i, 0, 5), PairTag::Diagonal, 6561),
            (o.pack(0, 0, 5), PairTag::Rank0Mismatch, 0),
            (o.pack(e11, 0, i), PairTag::Case21, 0),
            (o.pack(rank1, 0, same), PairTag::Case22a, 729),
            (o.pack(rank1, 0, other), PairTag::Case22b, 0),
            (o.pack(e11, e12, 0), PairTag::Case23, 729),
            (o.pack(i, 0, e12), PairTag::Case3, 81),
        ];
        let u = o.pack(3, 17, 5);
        for (delta, tag, count) in cases {
            // classify_pair works with u - v; v = u - delta
            let v = if tag == PairTag::Diagonal { u } else { o.difference(u, delta) };
            let class = o.classify_pair(u, v);
            assert_eq!(class.tag, tag);
            assert_eq!(class.predicted_common_out, count, "{tag:?}");
            assert_eq!(o.common_neighbors_bruteforce(u, v, Direction::Out), count, "{tag:?}");
        }
    }

    #[test]
    fn gram_weight_agrees_with_case_analysis() {
        for q in [2, 3] {
            let o = oracle(q, Variant::Left);
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
            for _ in 0..2000 {
                let (u, v) = (rng.gen_range(0..o.n()), rng.gen_range(0..o.n()));
                assert_eq!(o.classify_pair(u, v).predicted_common_out, o.gram_weight(o.difference(v, u)));
            }
        }
    }

    #[test]
    fn gram_weight_special_deltas() {
        let o = oracle(2, Variant::Left);
        assert_eq!(o.gram_weight(0), 256);
        assert_eq!(o.gram_weight(o.pack(0, 0, 3)), 0);
        let i = o.ring().index(&Mat2::IDENTITY);
        assert_eq!(o.gram_weight(o.pack(i, 0, 9)), 16);
    }

    #[test]
    fn gram_weight_table_matches_pointwise() {
        for variant in [Variant::Left, Variant::Right] {
            let o = oracle(2, variant);
            let table = o.gram_weights();
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for _ in 0..500 {
                let delta = rng.gen_range(0..o.n());
                assert_eq!(table[delta as usize], o.gram_weight(delta));
            }
            // every row of the Gram operator sums to d^2
            assert_eq!(table.iter().sum::<u64>(), 1 << 16);
        }
    }

    #[test]
    fn right_variant_weight_matches_bruteforce() {
        let o = oracle(3, Variant::Right);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (u, v) = (rng.gen_range(0..o.n()), rng.gen_range(0..o.n()));
            assert_eq!(o.classify_pair(u, v).predicted_common_out, o.common_neighbors_bruteforce(u, v, Direction::Out));
        }
    }

    #[test]
    fn not_normal() {
        // a' = E11, e' = E12, c' = 0: out system has rank 1, in system rank 2
        let o = oracle(2, Variant::Left);
        let r = o.ring();
        let u = o.pack(r.index(&Mat2::new(1, 0, 0, 0)), r.index(&Mat2::new(0, 1, 0, 0)), 0);
        assert_eq!(o.common_neighbors_bruteforce(u, 0, Direction::Out), 64);
        assert_eq!(o.common_neighbors_bruteforce(u, 0, Direction::In), 16);
    }

    #[test]
    fn spectrum_q2() {
        let o = oracle(2, Variant::Left);
        let s = o.second_eigenvalue().unwrap();
        assert_eq!(s.trivial_eigenvalue, 1 << 16);
        assert!(s.mu_squared as f64 <= 4.0 * 2f64.powi(13));
        let total: u64 = s.nontrivial_spectrum.iter().map(|&(_, m)| m).sum();
        assert_eq!(total, 4095);
    }

    #[test]
    fn spectrum_refuses_large_q() {
        assert_eq!(oracle(5, Variant::Left).second_eigenvalue().unwrap_err(), Error::OrderTooLargeForSpectrum(5));
    }

    #[test]
    fn dense_gram_matches_weights_and_transform() {
        let o = oracle(2, Variant::Left);
        let g = dense::DenseGram::assemble(&o).unwrap();
        let w = o.gram_weights();
        for u in (0..4096u64).step_by(37) {
            for v in 0..4096u64 {
                assert_eq!(g.get(u as usize, v as usize) as u64, w[o.difference(v, u) as usize]);
            }
        }
        let pi = g.deflated_power_iteration(7);
        let s = o.second_eigenvalue().unwrap();
        assert!((pi.eigenvalue - s.mu_squared as f64).abs() <= 1e-6 * s.mu_squared as f64, "{pi:?} vs {s:?}");
    }

    #[test]
    fn mixing_trivial_cases() {
        let o = oracle(2, Variant::Left);
        let all: Vec<u64> = (0..o.n()).collect();
        let mu = o.second_eigenvalue().unwrap().mu;
        let rep = o.mixing_deviation(&all[..64], &all, mu).unwrap();
        assert_eq!(rep.e_bc, 64 * 256);
        assert_eq!(rep.deviation, 0.0);
        let v = 1234;
        let nb: Vec<u64> = o.out_neighbors(v).collect();
        let rep = o.mixing_deviation(&[v], &nb, mu).unwrap();
        assert_eq!(rep.e_bc, 256);
        assert!((rep.deviation - 256.0 * (1.0 - 1.0 / 16.0)).abs() < 1e-9);
        assert!(rep.holds);
        assert_eq!(o.mixing_deviation(&[], &nb, mu).unwrap_err(), Error::EmptySet);
    }

    #[test]
    fn prop31_full_sets() {
        let f = make_field(2, 1, None).unwrap();
        let r = MatRing::new(&f);
        let o = DigraphOracle::new(&r, Variant::Left);
        let full = MatSet::full(&r);
        let rep = o.count_i_spectral_check([&full; 6], 64.0).unwrap();
        assert_eq!(rep.i, 1 << 20);
        assert_eq!(rep.deviation, 0.0);
        let empty = MatSet::empty(&r);
        let rep = o.count_i_spectral_check([&full, &full, &empty, &full, &full, &full], 64.0).unwrap();
        assert_eq!(rep.i, 0);
        assert!(rep.holds);
    }

    #[test]
    fn vertex_file_round_trip() {
        let o = oracle(2, Variant::Left);
        let vs = vec![0, 17, 4095];
        let mut buf = Vec::new();
        write_vertex_set(&vs, &mut buf).unwrap();
        assert_eq!(read_vertex_set(&o, buf.as_slice()).unwrap(), vs);
        assert!(read_vertex_set(&o, "4096\n".as_bytes()).is_err());
    }
}
