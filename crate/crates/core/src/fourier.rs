//! Exact character transforms over the elementary abelian group `(Z/p)^n`.
//!
//! The characters of `(Z/p)^n` take values in the p-th roots of unity. Working
//! in a prime field F_P with `p | P - 1`, a p-th root of unity exists and the
//! transform `f^(xi) = sum_x f(x) w^<xi, x>` is an exact ring homomorphism
//! image of the complex one. Integer results are recovered by lifting from
//! one prime (when the magnitude is known to be below P/2) or from two primes
//! by CRT.
//!
//! Arrays are indexed by the base-p number whose digits are the group
//! coordinates, which is exactly how matrix and vertex indices are laid out.

use crate::error::{Error, Result};

/// Primes `P = m * 223092870 + 1 < 2^62`; `223092870 = 2*3*5*...*23`, so every
/// characteristic up to 23 divides `P - 1`.
pub const PRIMES: [u64; 2] = [4_611_686_017_552_403_791, 4_611_686_016_883_125_181];

const PRIMORIAL_23: u64 = 223_092_870;

#[inline]
fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// A primitive p-th root of unity modulo `prime`.
pub fn root_of_unity(p: u32, prime: u64) -> u64 {
    let p = p as u64;
    assert_eq!((prime - 1) % p, 0, "p must divide P - 1");
    (2..)
        .map(|g| pow_mod(g, (prime - 1) / p, prime))
        .find(|&w| w != 1)
        .expect("F_P* is cyclic")
}

/// In-place transform `f(xi) <- sum_x f(x) w^<xi,x>` modulo `prime`, with `w`
/// a primitive p-th root of unity (its inverse when `inverse` is set; no 1/N
/// scaling is applied).
pub fn transform_in_place(data: &mut [u64], p: u32, dims: u32, prime: u64, inverse: bool) {
    let n = (p as usize).pow(dims);
    assert_eq!(data.len(), n, "length must be p^dims");
    let mut w = root_of_unity(p, prime);
    if inverse {
        w = pow_mod(w, p as u64 - 1, prime);
    }
    let pu = p as usize;
    if pu == 2 {
        let mut stride = 1;
        while stride < n {
            for block in (0..n).step_by(2 * stride) {
                for i in block..block + stride {
                    let (a, b) = (data[i], data[i + stride]);
                    data[i] = add_mod(a, b, prime);
                    data[i + stride] = sub_mod(a, b, prime);
                }
            }
            stride *= 2;
        }
        return;
    }
    let powers: Vec<u64> = (0..pu as u64).map(|e| pow_mod(w, e, prime)).collect();
    let mut x = vec![0u64; pu];
    let mut stride = 1;
    while stride < n {
        for block in (0..n).step_by(pu * stride) {
            for i in block..block + stride {
                for (t, slot) in x.iter_mut().enumerate() {
                    *slot = data[i + t * stride];
                }
                for k in 0..pu {
                    let mut acc = 0u64;
                    for (t, &xt) in x.iter().enumerate() {
                        acc = add_mod(acc, mul_mod(xt, powers[(t * k) % pu], prime), prime);
                    }
                    data[i + k * stride] = acc;
                }
            }
        }
        stride *= pu;
    }
}

fn crt(r1: u64, r2: u64) -> u128 {
    let [p1, p2] = PRIMES;
    let p1_inv = pow_mod(p1 % p2, p2 - 2, p2);
    let t = mul_mod(sub_mod(r2, r1 % p2, p2), p1_inv, p2);
    r1 as u128 + p1 as u128 * t as u128
}

/// Exact cyclic convolution `h(z) = sum_{x+y=z} f(x) g(y)` on `(Z/p)^dims`.
///
/// Requires `(sum f) * (sum g) < P1 * P2`, which bounds every output.
pub fn convolve(f: &[u64], g: &[u64], p: u32, dims: u32) -> Vec<u128> {
    let n = (p as usize).pow(dims);
    assert!(f.len() == n && g.len() == n);
    let mass = f.iter().map(|&v| v as u128).sum::<u128>().checked_mul(g.iter().map(|&v| v as u128).sum::<u128>());
    let limit = PRIMES[0] as u128 * PRIMES[1] as u128;
    assert!(mass.is_some_and(|m| m < limit), "convolution mass exceeds the CRT range");

    let residues: Vec<Vec<u64>> = PRIMES
        .iter()
        .map(|&prime| {
            let mut a: Vec<u64> = f.iter().map(|&v| v % prime).collect();
            let mut b: Vec<u64> = g.iter().map(|&v| v % prime).collect();
            transform_in_place(&mut a, p, dims, prime, false);
            transform_in_place(&mut b, p, dims, prime, false);
            for (x, y) in a.iter_mut().zip(&b) {
                *x = mul_mod(*x, *y, prime);
            }
            transform_in_place(&mut a, p, dims, prime, true);
            let n_inv = pow_mod(n as u64 % prime, prime - 2, prime);
            a.iter_mut().for_each(|x| *x = mul_mod(*x, n_inv, prime));
            a
        })
        .collect();
    residues[0].iter().zip(&residues[1]).map(|(&r1, &r2)| crt(r1, r2)).collect()
}

/// Multiplies every coordinate of the index `x` by `a` mod p.
fn scale_index(mut x: usize, a: usize, p: usize, dims: u32) -> usize {
    let mut out = 0;
    let mut place = 1;
    for _ in 0..dims {
        out += ((x % p) * a % p) * place;
        x /= p;
        place *= p;
    }
    out
}

/// Full spectrum of the Cayley operator `(Tf)(u) = sum_v w(v - u) f(v)` on
/// `(Z/p)^dims`: entry `xi` is the eigenvalue on the character `xi`.
///
/// The weight must be invariant under scaling by every nonzero `a` in F_p;
/// then each eigenvalue is fixed by the Galois group of Q(zeta_p) and hence a
/// rational integer, so its residue mod P determines it. An error is returned
/// if invariance fails or if `sum |w|` is not below P/2.
pub fn cayley_spectrum(weights: &[u64], p: u32, dims: u32) -> Result<Vec<i64>> {
    let n = (p as usize).pow(dims);
    if weights.len() != n {
        return Err(Error::InvalidInput(format!("weight table has {} entries, expected {n}", weights.len())));
    }
    let prime = PRIMES[0];
    let mass: u128 = weights.iter().map(|&v| v as u128).sum();
    if mass >= (prime / 2) as u128 {
        return Err(Error::InvalidInput("weight mass exceeds the exact-lift range".into()));
    }
    for a in 2..p as usize {
        if let Some(x) = (0..n).find(|&x| weights[scale_index(x, a, p as usize, dims)] != weights[x]) {
            return Err(Error::InvalidInput(format!("weight not invariant under scaling by {a} at index {x}")));
        }
    }
    let mut data = weights.to_vec();
    transform_in_place(&mut data, p, dims, prime, false);
    Ok(data.into_iter().map(|v| if v > prime / 2 { -((prime - v) as i64) } else { v as i64 }).collect())
}

/// Sanity data for the prime table: `(prime, is_prime, primorial divides P-1)`.
pub fn prime_table_checks() -> Vec<(u64, bool, bool)> {
    PRIMES.iter().map(|&p| (p, is_prime_u64(p), (p - 1) % PRIMORIAL_23 == 0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn digits(mut x: usize, p: usize, dims: u32) -> Vec<usize> {
        (0..dims)
            .map(|_| {
                let d = x % p;
                x /= p;
                d
            })
            .collect()
    }

    fn add_index(x: usize, y: usize, p: usize, dims: u32) -> usize {
        let (dx, dy) = (digits(x, p, dims), digits(y, p, dims));
        dx.iter().zip(&dy).rev().fold(0, |acc, (a, b)| acc * p + (a + b) % p)
    }

    #[test]
    fn primes_are_valid() {
        for (p, prime, divisible) in prime_table_checks() {
            assert!(prime, "{p}");
            assert!(divisible, "{p}");
        }
        assert!(!is_prime_u64(PRIMES[0] - 2));
        assert!(PRIMES[0] < 1 << 62 && PRIMES[1] < 1 << 62);
    }

    #[test]
    fn roots_have_exact_order() {
        for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23] {
            for &prime in &PRIMES {
                let w = root_of_unity(p, prime);
                assert_ne!(w, 1);
                assert_eq!(pow_mod(w, p as u64, prime), 1);
            }
        }
    }

    #[test]
    fn convolution_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(p, dims) in &[(2u32, 4u32), (3, 3), (5, 2), (7, 1), (2, 8)] {
            let n = (p as usize).pow(dims);
            let f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
            let g: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
            let mut naive = vec![0u128; n];
            for x in 0..n {
                for y in 0..n {
                    naive[add_index(x, y, p as usize, dims)] += f[x] as u128 * g[y] as u128;
                }
            }
            assert_eq!(convolve(&f, &g, p, dims), naive, "p={p} dims={dims}");
        }
    }

    #[test]
    fn convolution_large_values_need_crt() {
        // outputs beyond a single 62-bit prime
        let big = 1u64 << 40;
        let f = vec![big, big, 0, big];
        let g = vec![big, 0, big, big];
        let h = convolve(&f, &g, 2, 2);
        let sq = (big as u128) * (big as u128);
        // h(z) = sum over x xor y = z, by hand: [2, 2, 2, 3] * big^2
        assert_eq!(h, vec![2 * sq, 2 * sq, 2 * sq, 3 * sq]);
        assert!(h[3] > PRIMES[0] as u128);
    }

    #[test]
    fn spectrum_of_cycle_cayley_graph() {
        // Z/5 with connection set {+1, -1}: eigenvalues 2cos(2 pi k/5), not integers,
        // and the weight is not scaling-invariant, so it must be refused.
        let w = vec![0, 1, 0, 0, 1];
        assert!(cayley_spectrum(&w, 5, 1).is_err());
        // Z/3: {+1,-1} is invariant: eigenvalues 2, -1, -1
        assert_eq!(cayley_spectrum(&[0, 1, 1], 3, 1).unwrap(), vec![2, -1, -1]);
        // hypercube Q3: eigenvalues 3 - 2 wt(xi)
        let mut w = vec![0u64; 8];
        for b in 0..3 {
            w[1 << b] = 1;
        }
        let spec = cayley_spectrum(&w, 2, 3).unwrap();
        for (xi, &ev) in spec.iter().enumerate() {
            assert_eq!(ev, 3 - 2 * (xi as u32).count_ones() as i64);
        }
    }

    #[test]
    fn spectrum_matches_dense_eigen_sum_on_z3_squared() {
        // Complete graph minus loops on (Z/3)^2: eigenvalues 8 (trivial) and -1
        let mut w = vec![1u64; 9];
        w[0] = 0;
        let spec = cayley_spectrum(&w, 3, 2).unwrap();
        assert_eq!(spec[0], 8);
        assert!(spec[1..].iter().all(|&v| v == -1));
    }
}
