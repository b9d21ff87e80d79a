//! Finite fields F_q with q = p^k <= 27.
//!
//! An element is stored as an integer in `[0, q)` whose base-p digits are the
//! coefficients of its polynomial-basis representation (digit i multiplies
//! x^i). Addition is therefore digit-wise mod p, which lets the additive group
//! of any structure built from these elements be indexed as `(Z/p)^n`.
//! All arithmetic goes through tables built once per field.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 27;

/// A field element, encoded as its integer value in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u8);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    p: u32,
    k: u32,
    q: u32,
    /// Coefficients c_0..c_k of the defining polynomial, c_k = 1.
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// The finite field F_{p^k}. Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct FieldSpec(Arc<Tables>);

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.0.p)
            .field("k", &self.0.k)
            .field("modulus", &self.0.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldSpec {}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `m` over F_p (coefficients low to high).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// All monic polynomials of the given degree, ordered by their base-p value
/// with the constant term least significant.
fn monic_polys(p: u32, degree: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = p.pow(degree);
    (0..count).map(move |mut v| {
        let mut coeffs = Vec::with_capacity(degree as usize + 1);
        for _ in 0..degree {
            coeffs.push(v % p);
            v /= p;
        }
        coeffs.push(1);
        coeffs
    })
}

/// Exhaustive irreducibility test: no monic factor of degree 1..=deg/2.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = (m.len() - 1) as u32;
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|f| poly_rem(m, &f, p).iter().any(|&c| c != 0)))
}

fn to_digits(mut v: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = vec![0; k as usize];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

fn from_digits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Builds F_{p^k}. When `modulus` is omitted and k > 1, the smallest monic
/// irreducible polynomial (ordered by base-p value, constant term least
/// significant) is found by exhaustive search. A supplied modulus is always
/// verified; it is ignored for prime fields.
pub fn make_field(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<FieldSpec> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Err(Error::DegreeMismatch { expected: 1, got: vec![] });
    }
    let q = p.checked_pow(k).filter(|&q| q <= MAX_ORDER).ok_or(Error::OrderTooLarge { p, k })?;

    let modulus: Vec<u32> = if k == 1 {
        vec![0, 1]
    } else if let Some(m) = modulus {
        if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&c| c >= p) {
            return Err(Error::DegreeMismatch { expected: k, got: m.to_vec() });
        }
        if !is_irreducible(m, p) {
            return Err(Error::ReducibleModulus(m.to_vec()));
        }
        m.to_vec()
    } else {
        monic_polys(p, k)
            .find(|m| is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists")
    };

    let qs = q as usize;
    let mut add = vec![0u8; qs * qs];
    let mut mul = vec![0u8; qs * qs];
    for a in 0..q {
        let da = to_digits(a, p, k);
        for b in 0..q {
            let db = to_digits(b, p, k);
            let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            add[(a * q + b) as usize] = from_digits(&sum, p) as u8;

            let mut prod = vec![0u32; 2 * k as usize - 1];
            for (i, x) in da.iter().enumerate() {
                for (j, y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let red = if k == 1 { vec![prod[0] % p] } else { poly_rem(&prod, &modulus, p) };
            let mut red = red;
            red.resize(k as usize, 0);
            mul[(a * q + b) as usize] = from_digits(&red, p) as u8;
        }
    }
    let mut neg = vec![0u8; qs];
    let mut inv = vec![0u8; qs];
    for a in 0..qs {
        neg[a] = (0..qs).find(|&b| add[a * qs + b] == 0).unwrap() as u8;
        if a != 0 {
            inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u8;
        }
    }

    Ok(FieldSpec(Arc::new(Tables { p, k, q, modulus, add, mul, neg, inv })))
}

impl FieldSpec {
    /// Field of order `q`, which must be a prime power, with the default modulus.
    pub fn of_order(q: u32) -> Result<FieldSpec> {
        let (p, k) = prime_power(q)?;
        make_field(p, k, None)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.0.k
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.0.q as u8).map(Fe)
    }

    /// Decodes a raw value, rejecting anything outside `[0, q)`.
    pub fn element(&self, v: u32) -> Result<Fe> {
        if v < self.0.q {
            Ok(Fe(v as u8))
        } else {
            Err(Error::InvalidInput(format!("{v} is not an element of F_{}", self.0.q)))
        }
    }

    /// The polynomial-basis coefficients of `x`, constant term first.
    pub fn coefficients(&self, x: Fe) -> Vec<u32> {
        to_digits(x.value(), self.0.p, self.0.k)
    }

    pub fn from_coefficients(&self, c: &[u32]) -> Result<Fe> {
        if c.len() != self.0.k as usize || c.iter().any(|&d| d >= self.0.p) {
            return Err(Error::InvalidInput(format!("bad coefficient vector {c:?}")));
        }
        Ok(Fe(from_digits(c, self.0.p) as u8))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.0.add[a.0 as usize * self.0.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.0.mul[a.0 as usize * self.0.q as usize + b.0 as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            Err(Error::ZeroInverse)
        } else {
            Ok(Fe(self.0.inv[a.0 as usize]))
        }
    }

    pub fn pow(&self, a: Fe, mut e: u32) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Elements of the prime subfield F_p: exactly those with only a constant coefficient.
    pub fn prime_subfield(&self) -> Vec<Fe> {
        (0..self.0.p as u8).map(Fe).collect()
    }
}

/// Splits `q` into `(p, k)` with `q = p^k`.
pub fn prime_power(q: u32) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("{q} is not a prime power")));
    }
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let (mut rest, mut k) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidInput(format!("{q} is not a prime power")));
    }
    Ok((p, k))
}

/// Order specification as written on the command line and in set-file
/// headers: either `q` or `p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Order {
    pub p: u32,
    pub k: u32,
}

impl Order {
    pub fn q(&self) -> u32 {
        self.p.pow(self.k)
    }

    pub fn field(&self) -> Result<FieldSpec> {
        make_field(self.p, self.k, None)
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Order> {
        let s = s.trim();
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad field order {s:?}")));
        match s.split_once('^') {
            Some((p, k)) => {
                let (p, k) = (parse(p)?, parse(k)?);
                if !is_prime(p) {
                    return Err(Error::NotPrime(p));
                }
                Ok(Order { p, k })
            }
            None => {
                let (p, k) = prime_power(parse(s)?)?;
                Ok(Order { p, k })
            }
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.p, self.k)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDescriptor {
    p: u32,
    k: u32,
    modulus: Vec<u32>,
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldDescriptor { p: self.p(), k: self.k(), modulus: self.modulus().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = FieldDescriptor::deserialize(d)?;
        let m = (desc.k > 1).then_some(desc.modulus.as_slice());
        make_field(desc.p, desc.k, m).map_err(serde::de::Error::custom)
    }
}
