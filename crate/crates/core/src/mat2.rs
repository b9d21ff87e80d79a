//! The ring M2(F_q).
//!
//! A matrix has a canonical index `((m11*q + m12)*q + m21)*q + m22` in
//! `[0, q^4)`. Because field elements are themselves base-p digit strings,
//! this index is a base-p number with 4k digits and matrix addition is
//! digit-wise addition mod p. The counting kernels work on indices; [`MatRing`]
//! provides O(1) index arithmetic (dense tables for q <= 5).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};

/// Largest q for which full `q^4 x q^4` operation tables are built.
const DENSE_TABLE_MAX_Q: u32 = 5;

/// A 2x2 matrix, entries row-major: `[m11, m12, m21, m22]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2(pub [Fe; 4]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([Fe::ZERO; 4]);
    pub const IDENTITY: Mat2 = Mat2([Fe::ONE, Fe::ZERO, Fe::ZERO, Fe::ONE]);

    pub fn new(m11: u8, m12: u8, m21: u8, m22: u8) -> Mat2 {
        Mat2([Fe(m11), Fe(m12), Fe(m21), Fe(m22)])
    }

    #[inline]
    pub fn row(&self, i: usize) -> [Fe; 2] {
        [self.0[2 * i], self.0[2 * i + 1]]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Mat2 {
        let [a, b, c, d] = self.0;
        Mat2([a, c, b, d])
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "{a},{b},{c},{d}")
    }
}

/// The 2x4 block matrix `t = (left right)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block2x4 {
    pub left: Mat2,
    pub right: Mat2,
}

impl Block2x4 {
    pub fn row(&self, i: usize) -> [Fe; 4] {
        let [a, b] = self.left.row(i);
        let [c, d] = self.right.row(i);
        [a, b, c, d]
    }
}

/// How the rows of `c` relate to a rank-1 block `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompatibilityTag {
    /// `c`'s rows satisfy the same proportionality as `t`'s (includes `c = 0`).
    SameFactor,
    Incompatible,
}

struct RingData {
    field: FieldSpec,
    q: u32,
    size: u32,
    entries: Vec<[u8; 4]>,
    dense_add: Option<Vec<u32>>,
    dense_mul: Option<Vec<u32>>,
    neg: Vec<u32>,
    det: Vec<u8>,
}

/// Arithmetic on M2(F_q). Cheap to clone.
#[derive(Clone)]
pub struct MatRing(Arc<RingData>);

impl fmt::Debug for MatRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatRing(M2(F_{}))", self.0.q)
    }
}

impl PartialEq for MatRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.field == other.0.field
    }
}

impl Eq for MatRing {}

/// Row rank of a 2-row matrix given as two row vectors: zero, proportional, or independent.
fn rank_two_rows<const N: usize>(f: &FieldSpec, r0: &[Fe; N], r1: &[Fe; N]) -> u8 {
    let z0 = r0.iter().all(|e| e.is_zero());
    let z1 = r1.iter().all(|e| e.is_zero());
    match (z0, z1) {
        (true, true) => 0,
        (false, true) | (true, false) => 1,
        (false, false) => {
            if proportional_factor(f, r0, r1).is_some() {
                1
            } else {
                2
            }
        }
    }
}

/// For a nonzero `anchor`, returns `alpha` with `other = alpha * anchor` if one exists.
fn proportional_factor<const N: usize>(f: &FieldSpec, anchor: &[Fe; N], other: &[Fe; N]) -> Option<Fe> {
    let j = anchor.iter().position(|e| !e.is_zero())?;
    let alpha = f.mul(other[j], f.inv(anchor[j]).ok()?);
    anchor.iter().zip(other).all(|(&a, &o)| f.mul(alpha, a) == o).then_some(alpha)
}

impl MatRing {
    pub fn new(field: &FieldSpec) -> MatRing {
        let q = field.q();
        let size = q.pow(4);
        let entries: Vec<[u8; 4]> = (0..size)
            .map(|mut i| {
                let mut e = [0u8; 4];
                for slot in e.iter_mut().rev() {
                    *slot = (i % q) as u8;
                    i /= q;
                }
                e
            })
            .collect();

        let enc = |e: [u8; 4]| e.iter().fold(0u32, |acc, &x| acc * q + x as u32);
        let fadd = |a: u8, b: u8| field.add(Fe(a), Fe(b)).0;
        let fmul = |a: u8, b: u8| field.mul(Fe(a), Fe(b)).0;
        let mul_entries = |x: [u8; 4], y: [u8; 4]| {
            [
                fadd(fmul(x[0], y[0]), fmul(x[1], y[2])),
                fadd(fmul(x[0], y[1]), fmul(x[1], y[3])),
                fadd(fmul(x[2], y[0]), fmul(x[3], y[2])),
                fadd(fmul(x[2], y[1]), fmul(x[3], y[3])),
            ]
        };

        let neg: Vec<u32> = entries.iter().map(|e| enc(e.map(|x| field.neg(Fe(x)).0))).collect();
        let det: Vec<u8> = entries
            .iter()
            .map(|e| field.sub(field.mul(Fe(e[0]), Fe(e[3])), field.mul(Fe(e[1]), Fe(e[2]))).0)
            .collect();

        let (dense_add, dense_mul) = if q <= DENSE_TABLE_MAX_Q {
            let n = size as usize;
            let mut add = vec![0u32; n * n];
            let mut mul = vec![0u32; n * n];
            for (i, x) in entries.iter().enumerate() {
                for (j, y) in entries.iter().enumerate() {
                    add[i * n + j] = enc([fadd(x[0], y[0]), fadd(x[1], y[1]), fadd(x[2], y[2]), fadd(x[3], y[3])]);
                    mul[i * n + j] = enc(mul_entries(*x, *y));
                }
            }
            (Some(add), Some(mul))
        } else {
            (None, None)
        };

        MatRing(Arc::new(RingData { field: field.clone(), q, size, entries, dense_add, dense_mul, neg, det }))
    }

    pub fn field(&self) -> &FieldSpec {
        &self.0.field
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// `q^4`, the number of matrices.
    #[inline]
    pub fn size(&self) -> u32 {
        self.0.size
    }

    #[inline]
    pub fn index(&self, m: &Mat2) -> u32 {
        let q = self.0.q;
        m.0.iter().fold(0u32, |acc, x| acc * q + x.value())
    }

    #[inline]
    pub fn mat(&self, idx: u32) -> Mat2 {
        Mat2(self.0.entries[idx as usize].map(Fe))
    }

    pub fn elements(&self) -> impl Iterator<Item = Mat2> + '_ {
        (0..self.0.size).map(|i| self.mat(i))
    }

    /// Indices of GL2(F_q), ascending.
    pub fn gl2_indices(&self) -> Vec<u32> {
        (0..self.0.size).filter(|&i| self.0.det[i as usize] != 0).collect()
    }

    /// Validates raw entries against the field.
    pub fn checked(&self, entries: [u32; 4]) -> Result<Mat2> {
        let f = &self.0.field;
        Ok(Mat2([f.element(entries[0])?, f.element(entries[1])?, f.element(entries[2])?, f.element(entries[3])?]))
    }

    pub fn parse(&self, line: &str) -> Result<Mat2> {
        let vals: Vec<u32> = line
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad matrix line {line:?}"))))
            .collect::<Result<_>>()?;
        let arr: [u32; 4] = vals.try_into().map_err(|_| Error::Parse(format!("expected 4 entries in {line:?}")))?;
        self.checked(arr)
    }

    // ----- index arithmetic -----

    #[inline]
    pub fn add_idx(&self, a: u32, b: u32) -> u32 {
        match &self.0.dense_add {
            Some(t) => t[(a * self.0.size + b) as usize],
            None => self.index(&self.add(&self.mat(a), &self.mat(b))),
        }
    }

    #[inline]
    pub fn neg_idx(&self, a: u32) -> u32 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub_idx(&self, a: u32, b: u32) -> u32 {
        self.add_idx(a, self.neg_idx(b))
    }

    #[inline]
    pub fn mul_idx(&self, a: u32, b: u32) -> u32 {
        match &self.0.dense_mul {
            Some(t) => t[(a as u64 * self.0.size as u64 + b as u64) as usize],
            None => self.index(&self.mul(&self.mat(a), &self.mat(b))),
        }
    }

    #[inline]
    pub fn det_idx(&self, a: u32) -> Fe {
        Fe(self.0.det[a as usize])
    }

    #[inline]
    pub fn is_invertible_idx(&self, a: u32) -> bool {
        self.0.det[a as usize] != 0
    }

    // ----- value arithmetic -----

    pub fn add(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        let f = &self.0.field;
        Mat2([0, 1, 2, 3].map(|i| f.add(a.0[i], b.0[i])))
    }

    pub fn neg(&self, a: &Mat2) -> Mat2 {
        let f = &self.0.field;
        Mat2(a.0.map(|x| f.neg(x)))
    }

    pub fn sub(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, s: Fe, a: &Mat2) -> Mat2 {
        let f = &self.0.field;
        Mat2(a.0.map(|x| f.mul(s, x)))
    }

    pub fn mul(&self, a: &Mat2, b: &Mat2) -> Mat2 {
        let f = &self.0.field;
        let [a11, a12, a21, a22] = a.0;
        let [b11, b12, b21, b22] = b.0;
        let dot = |x: Fe, y: Fe, z: Fe, w: Fe| f.add(f.mul(x, y), f.mul(z, w));
        Mat2([
            dot(a11, b11, a12, b21),
            dot(a11, b12, a12, b22),
            dot(a21, b11, a22, b21),
            dot(a21, b12, a22, b22),
        ])
    }

    pub fn det(&self, m: &Mat2) -> Fe {
        let f = &self.0.field;
        let [a, b, c, d] = m.0;
        f.sub(f.mul(a, d), f.mul(b, c))
    }

    pub fn is_invertible(&self, m: &Mat2) -> bool {
        !self.det(m).is_zero()
    }

    pub fn inverse(&self, m: &Mat2) -> Result<Mat2> {
        let f = &self.0.field;
        let d = self.det(m);
        let dinv = f.inv(d).map_err(|_| Error::Singular)?;
        let [a, b, c, e] = m.0;
        Ok(self.scale(dinv, &Mat2([e, f.neg(b), f.neg(c), a])))
    }

    pub fn rank(&self, m: &Mat2) -> u8 {
        rank_two_rows(&self.0.field, &m.row(0), &m.row(1))
    }

    /// Row rank of the 2x4 block by direct case analysis.
    pub fn rank2x4(&self, t: &Block2x4) -> u8 {
        rank_two_rows(&self.0.field, &t.row(0), &t.row(1))
    }

    /// For rank-1 `t`, anchors on its lowest-index nonzero row `i`, writes the
    /// other row as `alpha * row_i`, and reports whether `c` obeys the same
    /// relation between its rows.
    pub fn proportionality_class(&self, t: &Block2x4, c: &Mat2) -> Result<CompatibilityTag> {
        let r = self.rank2x4(t);
        if r != 1 {
            return Err(Error::RankMismatch(r));
        }
        let f = &self.0.field;
        let anchor = if t.row(0).iter().any(|e| !e.is_zero()) { 0 } else { 1 };
        let other = 1 - anchor;
        let alpha = proportional_factor(f, &t.row(anchor), &t.row(other)).expect("rank-1 rows are proportional");
        let [c0, c1] = c.row(anchor);
        let compatible = c.row(other) == [f.mul(alpha, c0), f.mul(alpha, c1)];
        Ok(if compatible { CompatibilityTag::SameFactor } else { CompatibilityTag::Incompatible })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u32, k: u32) -> MatRing {
        MatRing::new(&make_field(p, k, None).unwrap())
    }

    fn small_rings() -> Vec<MatRing> {
        [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)].iter().map(|&(p, k)| ring(p, k)).collect()
    }

    /// Row reduction over F_q on an arbitrary 2 x n matrix, independent of the case analysis.
    fn rank_by_elimination(f: &FieldSpec, rows: [Vec<Fe>; 2]) -> u8 {
        let mut rows = rows;
        let n = rows[0].len();
        let mut rank = 0usize;
        for col in 0..n {
            let Some(piv) = (rank..2).find(|&r| !rows[r][col].is_zero()) else { continue };
            rows.swap(rank, piv);
            let inv = f.inv(rows[rank][col]).unwrap();
            for r in 0..2 {
                if r != rank && !rows[r][col].is_zero() {
                    let factor = f.mul(rows[r][col], inv);
                    for j in 0..n {
                        let v = f.mul(factor, rows[rank][j]);
                        rows[r][j] = f.sub(rows[r][j], v);
                    }
                }
            }
            rank += 1;
            if rank == 2 {
                break;
            }
        }
        rank as u8
    }

    #[test]
    fn det_examples() {
        for r in small_rings() {
            assert_eq!(r.det(&Mat2::IDENTITY), Fe::ONE);
        }
        assert_eq!(ring(3, 1).det(&Mat2::new(1, 2, 0, 1)), Fe::ONE);
        assert_eq!(ring(2, 1).det(&Mat2::new(1, 1, 1, 1)), Fe::ZERO);
    }

    #[test]
    fn inverse_examples() {
        let r2 = ring(2, 1);
        assert_eq!(r2.inverse(&Mat2::IDENTITY).unwrap(), Mat2::IDENTITY);
        assert_eq!(r2.inverse(&Mat2::new(1, 1, 0, 1)).unwrap(), Mat2::new(1, 1, 0, 1));
        let r5 = ring(5, 1);
        assert_eq!(r5.inverse(&Mat2::new(2, 0, 0, 3)).unwrap(), Mat2::new(3, 0, 0, 2));
        assert_eq!(r2.inverse(&Mat2::new(1, 1, 1, 1)), Err(Error::Singular));
    }

    #[test]
    fn rank2x4_examples() {
        let r = ring(2, 1);
        let zero = Block2x4 { left: Mat2::ZERO, right: Mat2::ZERO };
        assert_eq!(r.rank2x4(&zero), 0);
        let id = Block2x4 { left: Mat2::IDENTITY, right: Mat2::ZERO };
        assert_eq!(r.rank2x4(&id), 2);
        let one = Block2x4 { left: Mat2::new(1, 1, 0, 0), right: Mat2::new(1, 0, 0, 0) };
        assert_eq!(r.rank2x4(&one), 1);
    }

    #[test]
    fn rank2x4_matches_elimination_exhaustively_small() {
        for r in [ring(2, 1), ring(3, 1)] {
            let f = r.field().clone();
            for a in r.elements() {
                for e in r.elements() {
                    let t = Block2x4 { left: a, right: e };
                    let rows = [t.row(0).to_vec(), t.row(1).to_vec()];
                    assert_eq!(r.rank2x4(&t), rank_by_elimination(&f, rows));
                }
            }
        }
    }

    #[test]
    fn proportionality_examples() {
        let r = ring(5, 1);
        let f = r.field().clone();
        // t rows (x, 2x), x = (1, 3, 0, 4)
        let t = Block2x4 { left: Mat2::new(1, 3, 2, 1), right: Mat2::new(0, 4, 0, 3) };
        assert_eq!(r.rank2x4(&t), 1);
        // c rows (s, 2s)
        let c_same = Mat2::new(4, 1, 3, 2);
        assert_eq!(r.proportionality_class(&t, &c_same).unwrap(), CompatibilityTag::SameFactor);
        // c rows (s, 3s)
        let c_diff = Mat2::new(4, 1, f.mul(Fe(3), Fe(4)).0, 3);
        assert_eq!(r.proportionality_class(&t, &c_diff).unwrap(), CompatibilityTag::Incompatible);
        assert_eq!(r.proportionality_class(&t, &Mat2::ZERO).unwrap(), CompatibilityTag::SameFactor);

        // anchor on the second row when the first is zero
        let t2 = Block2x4 { left: Mat2::new(0, 0, 1, 1), right: Mat2::ZERO };
        assert_eq!(r.proportionality_class(&t2, &Mat2::new(0, 0, 2, 3)).unwrap(), CompatibilityTag::SameFactor);
        assert_eq!(r.proportionality_class(&t2, &Mat2::new(1, 0, 2, 3)).unwrap(), CompatibilityTag::Incompatible);

        let id = Block2x4 { left: Mat2::IDENTITY, right: Mat2::ZERO };
        assert_eq!(r.proportionality_class(&id, &Mat2::ZERO), Err(Error::RankMismatch(2)));
    }

    #[test]
    fn gl2_order_exhaustive() {
        for r in small_rings().into_iter().filter(|r| r.q() <= 5) {
            let q = r.q() as usize;
            assert_eq!(r.gl2_indices().len(), (q * q - 1) * (q * q - q));
        }
    }

    #[test]
    fn index_round_trip_exhaustive() {
        for r in small_rings().into_iter().filter(|r| r.q() <= 5) {
            for i in 0..r.size() {
                assert_eq!(r.index(&r.mat(i)), i);
            }
        }
        let r = ring(3, 1);
        assert_eq!(r.index(&Mat2::new(1, 2, 0, 1)), 27 + 2 * 9 + 1);
    }

    #[test]
    fn det_multiplicative_and_inverse_antihomomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in small_rings() {
            let n = r.size();
            let exhaustive = r.q() <= 3;
            let pairs: Vec<(u32, u32)> = if exhaustive {
                (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
            } else {
                (0..10_000).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
            };
            let f = r.field().clone();
            for (a, b) in pairs {
                let (ma, mb) = (r.mat(a), r.mat(b));
                let ab = r.mul(&ma, &mb);
                assert_eq!(r.det(&ab), f.mul(r.det(&ma), r.det(&mb)));
                if r.is_invertible(&ma) && r.is_invertible(&mb) {
                    let lhs = r.inverse(&ab).unwrap();
                    let rhs = r.mul(&r.inverse(&mb).unwrap(), &r.inverse(&ma).unwrap());
                    assert_eq!(lhs, rhs);
                    assert_eq!(r.mul(&ma, &r.inverse(&ma).unwrap()), Mat2::IDENTITY);
                }
            }
        }
    }

    #[test]
    fn gl2_f2_inverse_pairs_exhaustive() {
        let r = ring(2, 1);
        let gl = r.gl2_indices();
        assert_eq!(gl.len() * gl.len(), 36);
        for &a in &gl {
            for &b in &gl {
                let (ma, mb) = (r.mat(a), r.mat(b));
                let lhs = r.inverse(&r.mul(&ma, &mb)).unwrap();
                let rhs = r.mul(&r.inverse(&mb).unwrap(), &r.inverse(&ma).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn index_ops_agree_with_value_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // q = 7 exercises the table-free path, q <= 5 the dense tables
        for r in small_rings() {
            let n = r.size();
            for _ in 0..2000 {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (ma, mb) = (r.mat(a), r.mat(b));
                assert_eq!(r.mul_idx(a, b), r.index(&r.mul(&ma, &mb)));
                assert_eq!(r.add_idx(a, b), r.index(&r.add(&ma, &mb)));
                assert_eq!(r.sub_idx(a, b), r.index(&r.sub(&ma, &mb)));
                assert_eq!(r.det_idx(a), r.det(&ma));
            }
        }
    }

    #[test]
    fn text_format() {
        let r = ring(3, 1);
        let m = r.parse("1, 2,0,1").unwrap();
        assert_eq!(m, Mat2::new(1, 2, 0, 1));
        assert_eq!(m.to_string(), "1,2,0,1");
        assert!(r.parse("1,2,3").is_err());
        assert!(r.parse("1,2,0,3").is_err());
    }
}
