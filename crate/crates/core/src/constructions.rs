//! The extremal and structured sets, plus seeded random sets.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf::{Fe, FieldSpec};
use crate::mat2::MatRing;
use crate::setalg::MatSet;

fn all_indices(ring: &MatRing) -> impl Iterator<Item = u32> + '_ {
    0..ring.size()
}

/// Lower-triangular matrices (`m12 = 0`), `q^3` of them.
pub fn lower_triangular(ring: &MatRing) -> MatSet {
    MatSet::from_indices(ring, all_indices(ring).filter(|&i| ring.mat(i).0[1].is_zero()))
}

/// Matrices whose `(1,2)` entry lies in `x`.
pub fn entry12_in(ring: &MatRing, x: &[Fe]) -> MatSet {
    MatSet::from_indices(ring, all_indices(ring).filter(|&i| x.contains(&ring.mat(i).0[1])))
}

/// `A = B` lower triangular, `C = {c : c12 in X}`; then `AB + C = C`.
pub fn sharpness_ab_plus_c(ring: &MatRing, x: &[Fe]) -> Result<(MatSet, MatSet, MatSet)> {
    if x.is_empty() {
        return Err(Error::EmptyX);
    }
    let q = ring.q();
    if let Some(bad) = x.iter().find(|e| e.value() >= q) {
        return Err(Error::BadParameters(format!("{bad} is not an element of F_{q}")));
    }
    let a = lower_triangular(ring);
    Ok((a.clone(), a, entry12_in(ring, x)))
}

/// The F_p-span of `1, x, ..., x^{k-2}`: elements with zero top coefficient.
pub fn hyperplane(field: &FieldSpec) -> Vec<Fe> {
    let top = field.q() / field.p();
    field.elements().filter(|e| e.value() < top).collect()
}

/// `A = B = {x1, x2 in V}`, `C = {c2, c4 in F_p}` with `V` a hyperplane of
/// F_{p^k} over F_p; then `(A + B) C = {y2 in V}`.
pub fn sharpness_a_plus_b_c(ring: &MatRing) -> Result<(MatSet, MatSet, MatSet)> {
    let f = ring.field();
    if f.k() < 2 {
        return Err(Error::BadParameters(format!("need an extension field, got k = {}", f.k())));
    }
    let v = hyperplane(f);
    let in_v = |e: Fe| v.contains(&e);
    let in_fp = |e: Fe| e.value() < f.p();
    let a = MatSet::from_indices(
        ring,
        all_indices(ring).filter(|&i| {
            let m = ring.mat(i).0;
            in_v(m[0]) && in_v(m[1])
        }),
    );
    let c = MatSet::from_indices(
        ring,
        all_indices(ring).filter(|&i| {
            let m = ring.mat(i).0;
            in_fp(m[1]) && in_fp(m[3])
        }),
    );
    Ok((a.clone(), a, c))
}

/// `{M in GL2 : det M in G}` for a multiplicative subgroup `G`.
pub fn det_subgroup_set(ring: &MatRing, g: &[Fe]) -> Result<MatSet> {
    let f = ring.field();
    if g.is_empty() {
        return Err(Error::NotSubgroup("empty".into()));
    }
    if g.iter().any(|e| e.is_zero() || e.value() >= f.q()) {
        return Err(Error::NotSubgroup("elements must be nonzero field elements".into()));
    }
    // a finite nonempty subset closed under multiplication is a subgroup
    for &x in g {
        for &y in g {
            if !g.contains(&f.mul(x, y)) {
                return Err(Error::NotSubgroup(format!("{x} * {y} = {} escapes", f.mul(x, y))));
            }
        }
    }
    Ok(MatSet::from_indices(ring, all_indices(ring).filter(|&i| g.contains(&ring.det_idx(i)))))
}

/// The unique subgroup of `F_q^*` of the given order.
pub fn subgroup_of_order(field: &FieldSpec, order: u32) -> Result<Vec<Fe>> {
    let n = field.q() - 1;
    if order == 0 || n % order != 0 {
        return Err(Error::NotSubgroup(format!("{order} does not divide {n}")));
    }
    let mut g: Vec<Fe> = field.elements().filter(|&x| !x.is_zero() && field.pow(x, order) == Fe::ONE).collect();
    g.sort();
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Universe {
    M2,
    Gl2,
}

/// Uniform sample without replacement, deterministic in `seed`.
pub fn random_subset(ring: &MatRing, universe: Universe, size: usize, seed: u64) -> Result<MatSet> {
    let pool: Vec<u32> = match universe {
        Universe::M2 => all_indices(ring).collect(),
        Universe::Gl2 => ring.gl2_indices(),
    };
    if size > pool.len() {
        return Err(Error::SizeTooLarge { requested: size, available: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(MatSet::from_indices(ring, index::sample(&mut rng, pool.len(), size).into_iter().map(|i| pool[i])))
}

/// A named set source, e.g. `lower-triangular`, `x23-restricted:0,1`,
/// `det-subgroup:2`, `random-gl2:24:7`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstructionSpec {
    LowerTriangular,
    /// `(1,2)` entry restricted to the listed field elements.
    X23Restricted(Vec<u32>),
    /// `x1, x2` in the hyperplane `V`.
    SubspaceAB,
    /// `c2, c4` in the prime field.
    SubfieldC,
    /// Determinant in the subgroup of the given order.
    DetSubgroup(u32),
    RandomGL2 { size: usize, seed: u64 },
    RandomM2 { size: usize, seed: u64 },
    Full,
    Gl2,
}

impl ConstructionSpec {
    pub fn build(&self, ring: &MatRing) -> Result<MatSet> {
        let f = ring.field();
        let elems = |vals: &[u32]| vals.iter().map(|&v| f.element(v)).collect::<Result<Vec<_>>>();
        match self {
            ConstructionSpec::LowerTriangular => Ok(lower_triangular(ring)),
            ConstructionSpec::X23Restricted(x) => Ok(sharpness_ab_plus_c(ring, &elems(x)?)?.2),
            ConstructionSpec::SubspaceAB => Ok(sharpness_a_plus_b_c(ring)?.0),
            ConstructionSpec::SubfieldC => Ok(sharpness_a_plus_b_c(ring)?.2),
            ConstructionSpec::DetSubgroup(order) => det_subgroup_set(ring, &subgroup_of_order(f, *order)?),
            ConstructionSpec::RandomGL2 { size, seed } => random_subset(ring, Universe::Gl2, *size, *seed),
            ConstructionSpec::RandomM2 { size, seed } => random_subset(ring, Universe::M2, *size, *seed),
            ConstructionSpec::Full => Ok(MatSet::full(ring)),
            ConstructionSpec::Gl2 => Ok(MatSet::gl2(ring)),
        }
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} {s:?}")))
}

impl FromStr for ConstructionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<ConstructionSpec> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let arity = |n: usize| {
            if rest.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("{kind} takes {n} parameter(s), got {}", rest.len())))
            }
        };
        let spec = match kind {
            "lower-triangular" => ConstructionSpec::LowerTriangular,
            "x23-restricted" => {
                arity(1)?;
                ConstructionSpec::X23Restricted(rest[0].split(',').map(|v| parse_num(v, "element")).collect::<Result<_>>()?)
            }
            "subspace-ab" => ConstructionSpec::SubspaceAB,
            "subfield-c" => ConstructionSpec::SubfieldC,
            "det-subgroup" => {
                arity(1)?;
                ConstructionSpec::DetSubgroup(parse_num(rest[0], "subgroup order")?)
            }
            "random-gl2" | "random-m2" => {
                arity(2)?;
                let (size, seed) = (parse_num(rest[0], "size")?, parse_num(rest[1], "seed")?);
                if kind == "random-gl2" {
                    ConstructionSpec::RandomGL2 { size, seed }
                } else {
                    ConstructionSpec::RandomM2 { size, seed }
                }
            }
            "full" => ConstructionSpec::Full,
            "gl2" => ConstructionSpec::Gl2,
            _ => return Err(Error::Parse(format!("unknown construction {kind:?}"))),
        };
        if !matches!(spec, ConstructionSpec::X23Restricted(_) | ConstructionSpec::DetSubgroup(_) | ConstructionSpec::RandomGL2 { .. } | ConstructionSpec::RandomM2 { .. }) {
            arity(0)?;
        }
        Ok(spec)
    }
}

impl fmt::Display for ConstructionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionSpec::LowerTriangular => write!(f, "lower-triangular"),
            ConstructionSpec::X23Restricted(x) => {
                let vals: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                write!(f, "x23-restricted:{}", vals.join(","))
            }
            ConstructionSpec::SubspaceAB => write!(f, "subspace-ab"),
            ConstructionSpec::SubfieldC => write!(f, "subfield-c"),
            ConstructionSpec::DetSubgroup(o) => write!(f, "det-subgroup:{o}"),
            ConstructionSpec::RandomGL2 { size, seed } => write!(f, "random-gl2:{size}:{seed}"),
            ConstructionSpec::RandomM2 { size, seed } => write!(f, "random-m2:{size}:{seed}"),
            ConstructionSpec::Full => write!(f, "full"),
            ConstructionSpec::Gl2 => write!(f, "gl2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::{rep_ab_plus_c, set_prod, set_sum};

    fn ring(q: u32) -> MatRing {
        MatRing::new(&FieldSpec::of_order(q).unwrap())
    }

    fn ab_plus_c(a: &MatSet, b: &MatSet, c: &MatSet) -> MatSet {
        set_sum(&set_prod(a, b).unwrap(), c).unwrap()
    }

    #[test]
    fn ab_plus_c_q4() {
        let r = ring(4);
        let x = [Fe(0), Fe(1)];
        let (a, b, c) = sharpness_ab_plus_c(&r, &x).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (64, 64, 128));
        let s = ab_plus_c(&a, &b, &c);
        assert_eq!(s.len(), 128);
        assert_eq!(s, c);
        // t(lambda) is supported on C
        assert_eq!(rep_ab_plus_c(&a, &b, &c).unwrap().support_size(), 128);
        assert!(set_prod(&a, &b).unwrap().is_subset(&a));
        assert!(s.iter().all(|m| x.contains(&m.0[1])));
    }

    #[test]
    fn ab_plus_c_extremes() {
        let r = ring(3);
        let all: Vec<Fe> = r.field().elements().collect();
        let (a, b, c) = sharpness_ab_plus_c(&r, &all).unwrap();
        assert_eq!(ab_plus_c(&a, &b, &c).len(), 81);
        let (a, b, c) = sharpness_ab_plus_c(&r, &[Fe(2)]).unwrap();
        assert_eq!(c.len(), 27);
        assert_eq!(ab_plus_c(&a, &b, &c).len(), 27);
        assert_eq!(sharpness_ab_plus_c(&r, &[]).unwrap_err(), Error::EmptyX);
    }

    #[test]
    fn closed_form_sizes() {
        for q in [2u32, 3, 4, 5, 7, 8, 9] {
            let r = ring(q);
            assert_eq!(lower_triangular(&r).len() as u32, q.pow(3));
            for m in 1..=q {
                let x: Vec<Fe> = (0..m).map(|v| Fe(v as u8)).collect();
                assert_eq!(entry12_in(&r, &x).len() as u32, q.pow(3) * m);
            }
        }
    }

    #[test]
    fn a_plus_b_c_sizes() {
        for (p, k) in [(2u32, 2u32), (3, 2)] {
            let r = ring(p.pow(k));
            let q = p.pow(k);
            let (a, b, c) = sharpness_a_plus_b_c(&r).unwrap();
            let v = hyperplane(r.field());
            assert_eq!(v.len() as u32, p.pow(k - 1));
            assert_eq!(a.len() as u32, q * q * p.pow(2 * (k - 1)));
            assert_eq!(c.len() as u32, q * q * p * p);
            let s = set_prod(&set_sum(&a, &b).unwrap(), &c).unwrap();
            assert_eq!(s.len() as u32, p.pow(4 * k - 1));
            assert_eq!(set_sum(&a, &b).unwrap(), a);
            if (p, k) == (2, 2) {
                assert_eq!(a.len() * b.len() * c.len(), 262144);
                assert_eq!(s.len(), 128);
            }
        }
    }

    #[test]
    fn hyperplane_is_closed() {
        for q in [4u32, 8, 9, 16, 25, 27] {
            let f = FieldSpec::of_order(q).unwrap();
            let v = hyperplane(&f);
            for &x in &v {
                for &y in &v {
                    assert!(v.contains(&f.add(x, y)));
                }
                for s in f.prime_subfield() {
                    assert!(v.contains(&f.mul(s, x)));
                }
            }
        }
        assert!(sharpness_a_plus_b_c(&ring(5)).is_err());
    }

    #[test]
    fn det_subgroups() {
        let r = ring(5);
        let a = det_subgroup_set(&r, &[Fe(1), Fe(4)]).unwrap();
        assert_eq!(a.len(), 240);
        assert_eq!(set_prod(&a, &a).unwrap(), a);
        assert_eq!(a.inverses().unwrap(), a);
        assert!(matches!(det_subgroup_set(&r, &[Fe(1), Fe(2)]), Err(Error::NotSubgroup(_))));
        for q in [2u32, 3, 4, 5] {
            let r = ring(q);
            let f = r.field().clone();
            let sl = det_subgroup_set(&r, &[Fe::ONE]).unwrap();
            assert_eq!(sl.len() as u32, q * q * q - q);
            let all: Vec<Fe> = f.elements().skip(1).collect();
            assert_eq!(det_subgroup_set(&r, &all).unwrap(), MatSet::gl2(&r));
            for order in (1..q).filter(|o| (q - 1) % o == 0) {
                let g = subgroup_of_order(&f, order).unwrap();
                assert_eq!(g.len() as u32, order);
                let a = det_subgroup_set(&r, &g).unwrap();
                assert_eq!(a.len() as u32, order * (q * q * q - q));
                assert_eq!(set_prod(&a, &a).unwrap(), a);
                assert_eq!(a.inverses().unwrap(), a);
            }
        }
    }

    #[test]
    fn random_subsets() {
        let r = ring(3);
        let a = random_subset(&r, Universe::Gl2, 30, 9).unwrap();
        assert_eq!(a.len(), 30);
        assert!(a.is_invertible_set());
        assert_eq!(a, random_subset(&r, Universe::Gl2, 30, 9).unwrap());
        assert_ne!(a, random_subset(&r, Universe::Gl2, 30, 10).unwrap());
        assert_eq!(random_subset(&r, Universe::Gl2, 48, 1).unwrap(), MatSet::gl2(&r));
        assert_eq!(random_subset(&r, Universe::M2, 81, 1).unwrap(), MatSet::full(&r));
        assert_eq!(random_subset(&r, Universe::Gl2, 49, 1).unwrap_err(), Error::SizeTooLarge { requested: 49, available: 48 });
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["lower-triangular", "x23-restricted:0,1", "subspace-ab", "subfield-c", "det-subgroup:2", "random-gl2:24:7", "random-m2:5:0", "full", "gl2"] {
            let spec: ConstructionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("random-gl2:3".parse::<ConstructionSpec>().is_err());
        assert!("full:1".parse::<ConstructionSpec>().is_err());
        assert!("nope".parse::<ConstructionSpec>().is_err());
        let r = ring(5);
        assert_eq!("det-subgroup:2".parse::<ConstructionSpec>().unwrap().build(&r).unwrap().len(), 240);
    }
}
