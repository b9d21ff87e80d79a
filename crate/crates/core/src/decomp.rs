//! Dyadic pigeonholing, the energy pigeonhole, the low-additive-energy subset,
//! and the low-energy decomposition `A = B ⊔ C`.
//!
//! Every asymptotic inequality from the analysis is evaluated with constant 1
//! and logged as a `measured / bound` ratio; only definitional facts (level
//! membership, representation lower bounds, partition, halting condition) are
//! checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setalg::{additive_energy, multiplicative_energy, rep_function, MatSet, Op};

/// A dyadic level `D = {x : tau <= f(x) < 2 tau}` carrying a large share of `sum f w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicLevelResult {
    /// Positions in the input domain.
    pub members: Vec<usize>,
    pub tau: f64,
    pub contribution: f64,
    /// `K = sum f w`
    pub k: f64,
    /// `W = sum w`
    pub w: f64,
    /// `M = max f`
    pub m: f64,
    /// Whether the level grid was re-anchored at `max(K / 2W, 1)`.
    pub anchored: bool,
}

impl DyadicLevelResult {
    pub fn lower_tau(&self) -> f64 {
        self.k / (2.0 * self.w)
    }

    pub fn contribution_floor(&self) -> f64 {
        self.k / (2.0 + 2.0 * self.m.log2())
    }
}

fn best_level(f: &[f64], w: &[f64], base: f64, top: f64, min_level: f64) -> Option<(f64, f64)> {
    // levels [base 2^j, base 2^{j+1}) for base 2^j in [min_level, top]
    let mut best: Option<(f64, f64)> = None;
    let mut tau = base;
    while tau <= top {
        if tau >= min_level {
            let c: f64 = f.iter().zip(w).filter(|(&x, _)| tau <= x && x < 2.0 * tau).map(|(x, y)| x * y).sum();
            if best.map_or(true, |(_, bc)| c > bc) {
                best = Some((tau, c));
            }
        }
        tau *= 2.0;
    }
    best
}

/// Picks the power-of-two level `[2^j, 2^{j+1})` with the largest `sum f w`
/// (ties to the lower level) among levels with `2^j >= K / 2W`.
///
/// If that level falls short of `K / (2 + 2 log2 M)` the grid is re-anchored at
/// `T = max(K / 2W, 1)` with levels `[T 2^j, T 2^{j+1})`; the standard counting
/// argument then guarantees the bound. Requires `f` in `{0} ∪ [1, ∞)` and `w > 0`.
pub fn dyadic_pigeonhole(f: &[f64], w: &[f64]) -> Result<DyadicLevelResult> {
    if f.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if f.len() != w.len() {
        return Err(Error::InvalidInput("f and w have different lengths".into()));
    }
    if let Some(x) = f.iter().find(|&&x| !(x == 0.0 || x >= 1.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(format!("f value {x} not in {{0}} ∪ [1, ∞)")));
    }
    if let Some(x) = w.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(format!("weight {x} is not positive")));
    }
    let k: f64 = f.iter().zip(w).map(|(x, y)| x * y).sum();
    if k == 0.0 {
        return Err(Error::ZeroMass);
    }
    let total_w: f64 = w.iter().sum();
    let m = f.iter().cloned().fold(0.0, f64::max);
    let lower = k / (2.0 * total_w);
    let floor = k / (2.0 + 2.0 * m.log2());

    let mut anchored = false;
    let mut pick = best_level(f, w, 1.0, m, lower).filter(|&(_, c)| c >= floor);
    if pick.is_none() {
        anchored = true;
        let t = lower.max(1.0);
        pick = best_level(f, w, t, m, t);
    }
    let (tau, contribution) = pick.ok_or(Error::ZeroMass)?;
    let members = (0..f.len()).filter(|&i| tau <= f[i] && f[i] < 2.0 * tau).collect();
    Ok(DyadicLevelResult { members, tau, contribution, k, w: total_w, m, anchored })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `r_{D X^{-1}}(x) >= kappa` on `X_*`.
    DXinv,
    /// `r_{X^{-1} D}(x) >= kappa` on `X_*`.
    XinvD,
}

/// Measured/bound ratios for the displays of the energy pigeonhole, constant 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeRatios {
    /// `|D| / (E / (tau^2 log|X|))`, expected bounded below.
    pub d_lower: f64,
    /// `|D| / (log^6 |X_*|^4 / E)`, expected bounded above.
    pub d_upper: f64,
    /// `|X_*|^2 / (E / (|X| log^{7/2}))`, expected bounded below.
    pub x_star_sq: f64,
    /// `kappa / (|D| tau / (|X_*| log^2))`, expected bounded below.
    pub kappa: f64,
    /// `|X_*| / (kappa log^{-1/2})`; the second branch proceeds regardless of its value.
    pub branch_size: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeCertificate {
    pub x_star: Vec<u32>,
    pub d: Vec<u32>,
    pub tau: f64,
    pub kappa: f64,
    pub branch: Branch,
    pub kappa1: f64,
    pub v_size: usize,
    pub e_times: u128,
    pub ratios: PigeonholeRatios,
}

fn require_gl2(x: &MatSet) -> Result<()> {
    if !x.is_invertible_set() {
        return Err(Error::NotInvertibleSet);
    }
    if x.len() < 2 {
        return Err(Error::TooSmall(format!("need |X| >= 2, got {}", x.len())));
    }
    Ok(())
}

/// Finds `D ⊂ XX`, `tau`, `X_* ⊂ X`, `kappa` and a branch.
pub fn energy_pigeonhole(x: &MatSet) -> Result<PigeonholeCertificate> {
    require_gl2(x)?;
    let ring = x.ring();
    let n = x.len() as f64;
    let log = n.ln();
    let r = rep_function(x, x, Op::Mul)?;
    let e = r.second_moment();

    let support: Vec<(u32, u64)> = r.support().collect();
    let f: Vec<f64> = support.iter().map(|&(_, c)| c as f64).collect();
    let level = dyadic_pigeonhole(&f, &f)?;
    let tau = level.tau;
    let d: Vec<u32> = level.members.iter().map(|&i| support[i].0).collect();
    let d_set = MatSet::from_indices(ring, d.iter().copied());

    // |A_x| = #{y : xy in D}
    let members = x.indices();
    let fiber_a: Vec<f64> = members
        .iter()
        .map(|&xi| members.iter().filter(|&&y| d_set.contains_idx(ring.mul_idx(xi, y))).count() as f64)
        .collect();
    let ones = vec![1.0; members.len()];
    let lv = dyadic_pigeonhole(&fiber_a, &ones)?;
    let kappa1 = lv.tau;
    let v: Vec<u32> = lv.members.iter().map(|&i| members[i]).collect();

    let (x_star, kappa, branch) = if v.len() as f64 >= kappa1 / log.sqrt() {
        (v.clone(), kappa1, Branch::DXinv)
    } else {
        // |B_y| = #{x in V : xy in D}
        let fiber_b: Vec<f64> = members
            .iter()
            .map(|&y| v.iter().filter(|&&xi| d_set.contains_idx(ring.mul_idx(xi, y))).count() as f64)
            .collect();
        let lu = dyadic_pigeonhole(&fiber_b, &ones)?;
        (lu.members.iter().map(|&i| members[i]).collect(), lu.tau, Branch::XinvD)
    };

    let ef = e as f64;
    let (ds, xs) = (d.len() as f64, x_star.len() as f64);
    let ratios = PigeonholeRatios {
        d_lower: ds / (ef / (tau * tau * log)),
        d_upper: ds / (log.powi(6) * xs.powi(4) / ef),
        x_star_sq: xs * xs / (ef / (n * log.powf(3.5))),
        kappa: kappa / (ds * tau / (xs * log * log)),
        branch_size: xs / (kappa / log.sqrt()),
    };
    let cert = PigeonholeCertificate { x_star, d, tau, kappa, branch, kappa1, v_size: v.len(), e_times: e, ratios };
    verify_certificate(x, &cert).map_err(|msg| Error::InvalidInput(format!("certificate failed: {msg}")))?;
    Ok(cert)
}

/// Definitional recheck by direct counting, independent of the frequency tables.
pub fn verify_certificate(x: &MatSet, cert: &PigeonholeCertificate) -> std::result::Result<(), String> {
    let ring = x.ring();
    let members = x.indices();
    let n = members.len() as f64;
    let e = multiplicative_energy(x);
    if e != cert.e_times {
        return Err(format!("energy {} recorded as {}", e, cert.e_times));
    }
    if !(e as f64 / (2.0 * n * n) <= cert.tau && cert.tau <= n) {
        return Err(format!("tau {} outside [E/(2|X|^2), |X|]", cert.tau));
    }
    for &lam in &cert.d {
        let r = members.iter().flat_map(|&a| members.iter().map(move |&b| (a, b))).filter(|&(a, b)| ring.mul_idx(a, b) == lam).count() as f64;
        if r == 0.0 {
            return Err(format!("D element {lam} not in XX"));
        }
        if !(cert.tau <= r && r < 2.0 * cert.tau) {
            return Err(format!("r_XX({lam}) = {r} outside [tau, 2 tau)"));
        }
    }
    let inverses: Vec<u32> = members.iter().map(|&y| ring.index(&ring.inverse(&ring.mat(y)).expect("GL2"))).collect();
    for &xs in &cert.x_star {
        if !x.contains_idx(xs) {
            return Err(format!("X_* element {xs} not in X"));
        }
        let r = match cert.branch {
            Branch::DXinv => cert.d.iter().flat_map(|&d| inverses.iter().map(move |&yi| (d, yi))).filter(|&(d, yi)| ring.mul_idx(d, yi) == xs).count(),
            Branch::XinvD => inverses.iter().flat_map(|&xi| cert.d.iter().map(move |&d| (xi, d))).filter(|&(xi, d)| ring.mul_idx(xi, d) == xs).count(),
        } as f64;
        if r < cert.kappa {
            return Err(format!("representation {r} of {xs} below kappa {}", cert.kappa));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowEnergySubset {
    pub certificate: PigeonholeCertificate,
    pub e_plus: u128,
    /// `E^{1/2} / (|X|^{1/2} log^{7/4})`
    pub size_bound: f64,
    /// The two terms of the energy bound, constant 1.
    pub e_plus_terms: [f64; 2],
    /// `E_+(X_*) / (term1 + term2)`
    pub e_plus_ratio: f64,
}

impl LowEnergySubset {
    pub fn x_star(&self) -> &[u32] {
        &self.certificate.x_star
    }
}

/// The `X_*` of [`energy_pigeonhole`] with its measured additive energy.
pub fn low_energy_subset(x: &MatSet) -> Result<LowEnergySubset> {
    let cert = energy_pigeonhole(x)?;
    let ring = x.ring();
    let star = MatSet::from_indices(ring, cert.x_star.iter().copied());
    let e_plus = additive_energy(&star);
    let q = ring.q() as f64;
    let n = x.len() as f64;
    let log = n.ln();
    let e = cert.e_times as f64;
    let xs = star.len() as f64;
    let t1 = xs.powi(4) * n.powi(6) * log * log / (q.powi(4) * e * e);
    let t2 = q.powf(6.5) * xs.powi(3) * n * log.powi(5) / e;
    Ok(LowEnergySubset {
        size_bound: e.sqrt() / (n.sqrt() * log.powf(1.75)),
        e_plus_terms: [t1, t2],
        e_plus_ratio: e_plus as f64 / (t1 + t2),
        e_plus,
        certificate: cert,
    })
}

/// `M(|A|)`: the minimum of the two terms (natural log), clamped to `[1, |A|]`.
pub fn param_m(size_a: usize, q: u32) -> Result<f64> {
    if size_a < 2 {
        return Err(Error::TooSmall(format!("need |A| >= 2, got {size_a}")));
    }
    let (a, q) = (size_a as f64, q as f64);
    let log = a.ln();
    let t1 = q.powf(4.0 / 3.0) / (a.cbrt() * log.powf(2.0 / 3.0));
    let t2 = a.powf(0.8) / (q.powf(2.6) * log.powf(2.7));
    Ok(t1.min(t2).clamp(1.0, a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub i: usize,
    pub s_size: usize,
    pub e_times_s: u128,
    pub tau: f64,
    pub kappa: f64,
    pub branch: Branch,
    pub d_size: usize,
    pub x_star_size: usize,
    pub v: Vec<u32>,
    pub e_plus_v: u128,
    pub e_plus_ratio: f64,
    pub certificate: PigeonholeCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTrace {
    pub iterations: Vec<IterationRecord>,
    pub b: Vec<u32>,
    pub c: Vec<u32>,
    pub a_size: usize,
    pub m_used: f64,
    pub e_plus_b: u128,
    pub e_times_b: u128,
    pub e_plus_c: u128,
    pub e_times_c: u128,
    /// `max{E_x(B), E_+(C)} M / |A|^3`: the pairing the halting rule and energy
    /// subadditivity actually control.
    pub ratio_halting_pairing: f64,
    /// `max{E_+(B), E_x(C)} M / |A|^3`: the pairing as the theorem is stated.
    pub ratio_stated_pairing: f64,
}

impl DecompositionTrace {
    pub fn threshold(&self) -> f64 {
        (self.a_size as f64).powi(3) / self.m_used
    }
}

fn halts(e: u128, a_cubed: u128, m: f64) -> bool {
    e as f64 * m <= a_cubed as f64
}

/// Peels low-additive-energy subsets off `A` until the rest has
/// `E_x(S) <= |A|^3 / M`.
pub fn bw_decompose(a: &MatSet, m: Option<f64>) -> Result<DecompositionTrace> {
    require_gl2(a)?;
    let ring = a.ring();
    let n = a.len();
    let m = match m {
        Some(m) if !(1.0..=n as f64).contains(&m) => {
            return Err(Error::InvalidInput(format!("M = {m} outside [1, |A|]")));
        }
        Some(m) => m,
        None => param_m(n, ring.q())?,
    };
    let a_cubed = (n as u128).pow(3);
    let mut s = a.clone();
    let mut c = MatSet::empty(ring);
    let mut iterations = Vec::new();
    loop {
        let e = multiplicative_energy(&s);
        if halts(e, a_cubed, m) {
            break;
        }
        let i = iterations.len() + 1;
        let low = low_energy_subset(&s)?;
        if low.x_star().is_empty() {
            return Err(Error::InternalStall(i));
        }
        let v = MatSet::from_indices(ring, low.x_star().iter().copied());
        iterations.push(IterationRecord {
            i,
            s_size: s.len(),
            e_times_s: e,
            tau: low.certificate.tau,
            kappa: low.certificate.kappa,
            branch: low.certificate.branch,
            d_size: low.certificate.d.len(),
            x_star_size: v.len(),
            v: v.indices().to_vec(),
            e_plus_v: low.e_plus,
            e_plus_ratio: low.e_plus_ratio,
            certificate: low.certificate,
        });
        s = s.difference(&v);
        c = c.union(&v);
    }
    let (epb, etb) = (additive_energy(&s), multiplicative_energy(&s));
    let (epc, etc) = (additive_energy(&c), multiplicative_energy(&c));
    let scale = m / a_cubed as f64;
    Ok(DecompositionTrace {
        iterations,
        b: s.indices().to_vec(),
        c: c.indices().to_vec(),
        a_size: n,
        m_used: m,
        e_plus_b: epb,
        e_times_b: etb,
        e_plus_c: epc,
        e_times_c: etc,
        ratio_halting_pairing: etb.max(epc) as f64 * scale,
        ratio_stated_pairing: epb.max(etc) as f64 * scale,
    })
}
