//! The experiment catalog.
//!
//! Each entry measures exact quantities and evaluates bound expressions with
//! constant 1. Pass flags are attached only to inequalities that hold exactly
//! for every instance (Cauchy-Schwarz steps, the mixing inequality with the
//! computed spectral constant, definitional certificates, closed-form sizes);
//! asymptotic conclusions appear only as ratios.

use std::collections::BTreeMap;

use matsp_core::constructions::{self, Universe};
use matsp_core::decomp::{self, verify_certificate};
use matsp_core::digraph::{dense, DigraphOracle, Direction, SPECTRUM_MAX_Q};
use matsp_core::setalg::{self, count_i, count_j, energy, set_prod, set_sum, MatSet, Op};
use matsp_core::{Fe, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Ctx;
use crate::report::{Trial, Value};
use crate::CliError;

pub struct Run {
    pub trials: Vec<Trial>,
    pub parameters: BTreeMap<String, Value>,
    pub seeds: Vec<u64>,
}

impl Run {
    fn new(trials: Vec<Trial>) -> Run {
        Run { trials, parameters: BTreeMap::new(), seeds: Vec::new() }
    }

    fn param(mut self, k: &str, v: impl Into<Value>) -> Run {
        self.parameters.insert(k.to_string(), v.into());
        self
    }
}

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    pub run: fn(&Ctx) -> Result<Run, CliError>,
}

pub const CATALOG: &[Entry] = &[
    Entry { name: "energy_bound_thm22", summary: "E+(A,B) against |A|^2|BC|^2/q^4 + q^6.5 |A||BC|/|C|", run: energy_bound },
    Entry { name: "srb_cor23", summary: "max{|A+A|, |AA|} against the sum-product lower bounds", run: srb },
    Entry { name: "expander_thm24", summary: "|AB+C| and |(A+B)C| against min{q^4, |A||B||C|/q^6.5}", run: expander },
    Entry { name: "j_count_thm25", summary: "solutions of a + b = cd against the main term and upper bound", run: j_count },
    Entry { name: "decompose_thm21", summary: "low-energy decomposition A = B ⊔ C with certificates", run: decompose },
    Entry { name: "spectrum", summary: "exact Gram spectrum of the sum-product digraph", run: spectrum },
    Entry { name: "mixing", summary: "expander mixing inequality on random vertex sets", run: mixing },
    Entry { name: "prop31", summary: "I(A,...,F) against |A|...|F|/q^4 with the computed spectral constant", run: prop31 },
    Entry { name: "normality", summary: "common out- vs in-neighbourhood sizes on random pairs", run: normality },
    Entry { name: "pair_classes", summary: "case-analysis prediction vs brute-force common neighbours", run: pair_classes },
    Entry { name: "sharpness_ab_plus_c", summary: "lower-triangular construction with |AB+C| = |C|", run: sharpness_ab_plus_c },
    Entry { name: "sharpness_a_plus_b_c", summary: "hyperplane construction with small |(A+B)C|", run: sharpness_a_plus_b_c },
    Entry { name: "sharpness_det_subgroup", summary: "determinant-subgroup set with AA = A", run: sharpness_det_subgroup },
];

pub fn lookup(name: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.name == name)
}

fn core(e: matsp_core::Error) -> CliError {
    CliError::Core(e.to_string())
}

fn mu_for(ctx: &Ctx, variant: Variant) -> Result<Option<f64>, CliError> {
    if ctx.q() > SPECTRUM_MAX_Q {
        return Ok(None);
    }
    Ok(Some(DigraphOracle::new(&ctx.ring, variant).second_eigenvalue().map_err(core)?.mu))
}

fn require_mu(ctx: &Ctx, variant: Variant) -> Result<f64, CliError> {
    mu_for(ctx, variant)?.ok_or_else(|| CliError::FieldUnsupported(format!("the spectral constant needs q <= {SPECTRUM_MAX_Q}")))
}

fn default_size(ctx: &Ctx, fallback: usize) -> usize {
    ctx.size.unwrap_or(fallback)
}

/// `random:<size>` capped at the universe size.
fn random_source(ctx: &Ctx, size: usize, universe: Universe) -> String {
    let q = ctx.q() as usize;
    let cap = match universe {
        Universe::M2 => q.pow(4),
        Universe::Gl2 => (q * q - 1) * (q * q - q),
    };
    format!("random:{}", size.min(cap))
}

fn require_gl2(s: &MatSet, role: char) -> Result<(), CliError> {
    if s.is_invertible_set() {
        Ok(())
    } else {
        Err(CliError::ConfigInvalid(format!("set {role} must lie in GL2")))
    }
}

fn sizes(sets: &[&MatSet]) -> f64 {
    sets.iter().map(|s| s.len() as f64).product()
}

fn energy_bound(ctx: &Ctx) -> Result<Run, CliError> {
    let q = ctx.q() as f64;
    let size = default_size(ctx, ctx.q().pow(3) as usize);
    let random = random_source(ctx, size, Universe::M2);
    let mu = mu_for(ctx, Variant::Left)?;
    let cite = "energy_bound_thm22";
    let mut trials = Vec::new();
    for t in 0..ctx.trials_or(1) {
        let a = ctx.set(0, t, Universe::M2, &random)?;
        let b = ctx.set(1, t, Universe::M2, &random)?;
        let c = ctx.set(2, t, Universe::Gl2, &random_source(ctx, size, Universe::Gl2))?;
        require_gl2(&c, 'c')?;
        let mut tr = Trial::default();
        let e = energy(&a, &b, Op::Add).map_err(core)?;
        let bc = set_prod(&b, &c).map_err(core)?;
        let inv_c = c.inverses().map_err(core)?;
        // |C|^2 E+(A,B) <= #{a + s c = a' + s' c' : s in BC, c in C^-1}
        let n = count_i(&bc, &inv_c, &a, &a.negated(), &bc.negated(), &inv_c).map_err(core)?;
        let sum_ab = set_sum(&a, &b).map_err(core)?;
        tr.set("size_a", a.len());
        tr.set("size_b", b.len());
        tr.set("size_c", c.len());
        tr.set("size_bc", bc.len());
        tr.set("size_a_plus_b", sum_ab.len());
        tr.set("e_plus_ab", e);
        tr.set("lifted_count", n);
        let (na, nbc, nc) = (a.len() as f64, bc.len() as f64, c.len() as f64);
        let bound = na * na * nbc * nbc / q.powi(4) + q.powf(6.5) * na * nbc / nc;
        tr.bound("e_plus_ab", bound, cite);
        tr.ratio("e_plus_ab", e as f64 / bound);
        tr.flag("lift", e * (c.len() as u128).pow(2) <= n);
        tr.flag("cauchy_schwarz", e * sum_ab.len() as u128 >= (a.len() as u128 * b.len() as u128).pow(2));
        if let Some(mu) = mu {
            let prod = (na * nbc * nc).powi(2);
            let main = prod / q.powi(4);
            let dev = (n as f64 - main).abs();
            tr.set("mu", mu);
            tr.bound("lifted_count_deviation", mu * prod.sqrt(), cite);
            tr.ratio("lifted_count_deviation", dev / (mu * prod.sqrt()));
            tr.flag("lifted_count_mixing", dev <= mu * prod.sqrt());
            let exact = (main + mu * prod.sqrt()) / (nc * nc);
            tr.bound("e_plus_ab_with_mu", exact, cite);
            tr.flag("e_plus_ab_with_mu", e as f64 <= exact);
        }
        trials.push(tr);
    }
    Ok(Run::new(trials).param("size", size))
}

fn srb(ctx: &Ctx) -> Result<Run, CliError> {
    let q = ctx.q() as f64;
    let size = default_size(ctx, ctx.q().pow(3) as usize);
    let cite = "srb_cor23";
    let mut trials = Vec::new();
    for t in 0..ctx.trials_or(1) {
        let a = ctx.set(0, t, Universe::M2, &random_source(ctx, size, Universe::M2))?;
        let n = a.len() as f64;
        let mut tr = Trial::default();
        let sum = set_sum(&a, &a).map_err(core)?;
        let prod = set_prod(&a, &a).map_err(core)?;
        let (ep, em) = (setalg::additive_energy(&a), setalg::multiplicative_energy(&a));
        let best = sum.len().max(prod.len()) as f64;
        tr.set("size_a", a.len());
        tr.set("size_a_plus_a", sum.len());
        tr.set("size_aa", prod.len());
        tr.set("e_plus", ep);
        tr.set("e_times", em);
        let new = (n * n / q.powf(3.25)).min(q.powf(4.0 / 3.0) * n.powf(2.0 / 3.0));
        let prior = (n * n / q.powf(3.5)).min(q * q * n.sqrt());
        tr.bound("max_sum_product", new, cite);
        tr.bound("max_sum_product_prior", prior, cite);
        tr.ratio("max_sum_product", best / new);
        tr.ratio("max_sum_product_prior", best / prior);
        if a.len() >= 2 && a.is_invertible_set() {
            let m = decomp::param_m(a.len(), ctx.q()).map_err(core)?;
            tr.bound("max_sum_product_decomposition", n * m, cite);
            tr.ratio("max_sum_product_decomposition", best / (n * m));
        }
        if prod.len() <= a.len() {
            tr.ratio("sumset_over_q4", sum.len() as f64 / q.powi(4));
        }
        let n4 = (a.len() as u128).pow(4);
        tr.flag("cauchy_schwarz_add", ep * sum.len() as u128 >= n4);
        tr.flag("cauchy_schwarz_mul", em * prod.len() as u128 >= n4);
        trials.push(tr);
    }
    Ok(Run::new(trials).param("size", size))
}

fn expander(ctx: &Ctx) -> Result<Run, CliError> {
    let q = ctx.q() as f64;
    let size = default_size(ctx, ctx.q().pow(3) as usize);
    let random = random_source(ctx, size, Universe::M2);
    let (mu_l, mu_r) = (mu_for(ctx, Variant::Left)?, mu_for(ctx, Variant::Right)?);
    let cite = "expander_thm24";
    let mut trials = Vec::new();
    for t in 0..ctx.trials_or(1) {
        let a = ctx.set(0, t, Universe::M2, &random)?;
        let b = ctx.set(1, t, Universe::M2, &random)?;
        let c = ctx.set(2, t, Universe::Gl2, &random_source(ctx, size, Universe::Gl2))?;
        let mut tr = Trial::default();
        let p = sizes(&[&a, &b, &c]);
        let p_int = a.len() as u128 * b.len() as u128 * c.len() as u128;
        let bound = q.powi(4).min(p / q.powf(6.5));
        tr.set("size_a", a.len());
        tr.set("size_b", b.len());
        tr.set("size_c", c.len());

        let tl = setalg::rep_ab_plus_c(&a, &b, &c).map_err(core)?;
        let s1 = tl.support_size();
        let e1 = tl.second_moment();
        tr.set("size_ab_plus_c", s1);
        tr.set("t_second_moment", e1);
        tr.bound("size_ab_plus_c", bound, cite);
        tr.ratio("size_ab_plus_c", s1 as f64 / bound);
        tr.flag("cauchy_schwarz_ab_plus_c", s1 as u128 * e1 >= p_int * p_int);
        let via_i = count_i(&a, &b, &c.negated(), &c, &a.negated(), &b).map_err(core)?;
        tr.flag("second_moment_is_i_count", via_i == e1);
        if let Some(mu) = mu_l {
            let dev = (e1 as f64 - p * p / q.powi(4)).abs();
            tr.ratio("t_second_moment_deviation", dev / (mu * p));
            tr.flag("t_second_moment_mixing", dev <= mu * p);
        }
        if c.is_invertible_set() {
            let u = setalg::rep_a_plus_b_times_c(&a, &b, &c).map_err(core)?;
            let (s2, e2) = (u.support_size(), u.second_moment());
            tr.set("size_a_plus_b_times_c", s2);
            tr.set("u_second_moment", e2);
            tr.bound("size_a_plus_b_times_c", bound, cite);
            tr.ratio("size_a_plus_b_times_c", s2 as f64 / bound);
            tr.flag("cauchy_schwarz_a_plus_b_times_c", s2 as u128 * e2 >= p_int * p_int);
            if let Some(mu) = mu_r {
                // e(U, W) in the right-product digraph, |U| = |W| = |A||B||C|
                let dev = (e2 as f64 - p * p / q.powi(4)).abs();
                tr.ratio("u_second_moment_deviation", dev / (mu * p));
                tr.flag("u_second_moment_mixing", dev <= mu * p);
            }
        }
        trials.push(tr);
    }
    Ok(Run::new(trials).param("size", size))
}

fn j_count(ctx: &Ctx) -> Result<Run, CliError> {
    let q = ctx.q() as f64;
    let size = default_size(ctx, ctx.q().pow(3) as usize);
    let random = random_source(ctx, size, Universe::M2);
    let mu = mu_for(ctx, Variant::Left)?;
    let cite = "j_count_thm25";
    let mut trials = Vec::new();
    for t in 0..ctx.trials_or(1) {
        let [a, b, c, d] = [0, 1, 2, 3].map(|r| ctx.set(r, t, Universe::M2, &random));
        let (a, b, c, d) = (a?, b?, c?, d?);
        let mut tr = Trial::default();
        let j = count_j(&a, &b, &c, &d).map_err(core)?;
        let p = sizes(&[&a, &b, &c, &d]);
        let main = p / q.powi(4);
        let (na, nb, nc, nd) = (a.len() as f64, b.len() as f64, c.len() as f64, d.len() as f64);
        let upper = na * nb.sqrt() * nc * nd / (q * q) + q.powf(3.25) * p.sqrt();
        let compare = q.powf(3.5) * p.sqrt();
        tr.set("size_a", a.len());
        tr.set("size_b", b.len());
        tr.set("size_c", c.len());
        tr.set("size_d", d.len());
        tr.set("j", j);
        tr.set("main_term", main);
        tr.set("deviation", (j as f64 - main).abs());
        tr.bound("j_upper", upper, cite);
        tr.bound("deviation_prior", compare, cite);
        tr.ratio("j_upper", j as f64 / upper);
        tr.ratio("j_over_main", if main > 0.0 { j as f64 / main } else { f64::NAN });
        tr.ratio("deviation_prior", (j as f64 - main).abs() / compare);
        // J^2 <= |B| #{cd - a = c'd' - a'}
        let n = count_i(&c, &d, &a, &a.negated(), &c.negated(), &d).map_err(core)?;
        tr.set("lifted_count", n);
        tr.flag("cauchy_schwarz", j * j <= b.len() as u128 * n);
        if let Some(mu) = mu {
            let pl = (na * nc * nd).powi(2);
            let dev = (n as f64 - pl / q.powi(4)).abs();
            tr.flag("lifted_count_mixing", dev <= mu * pl.sqrt());
        }
        trials.push(tr);
    }
    Ok(Run::new(trials).param("size", size))
}

fn decompose(ctx: &Ctx) -> Result<Run, CliError> {
    let size = default_size(ctx, 24);
    let cite = "decompose_thm21";
    let mut trials = Vec::new();
    for t in 0..ctx.trials_or(1) {
        let a = ctx.set(0, t, Universe::Gl2, &random_source(ctx, size, Universe::Gl2))?;
        let trace = decomp::bw_decompose(&a, ctx.m).map_err(core)?;
        let ring = a.ring();
        let b = MatSet::from_indices(ring, trace.b.iter().copied());
        let c = MatSet::from_indices(ring, trace.c.iter().copied());
        let mut tr = Trial::default();
        tr.set("size_a", a.len());
        tr.set("size_b", b.len());
        tr.set("size_c", c.len());
        tr.set("iterations", trace.iterations.len());
        tr.set("m_used", trace.m_used);
        tr.set("e_plus_b", trace.e_plus_b);
        tr.set("e_times_b", trace.e_times_b);
        tr.set("e_plus_c", trace.e_plus_c);
        tr.set("e_times_c", trace.e_times_c);
        tr.bound("energy_threshold", trace.threshold(), cite);
        tr.ratio("halting_pairing", trace.ratio_halting_pairing);
        tr.ratio("stated_pairing", trace.ratio_stated_pairing);
        let mut s = a.clone();
        let mut certified = true;
        let mut extracted = MatSet::empty(ring);
        for it in &trace.iterations {
            certified &= it.s_size == s.len() && verify_certificate(&s, &it.certificate).is_ok();
            let v = MatSet::from_indices(ring, it.v.iter().copied());
            certified &= !v.is_empty() && v.is_subset(&s);
            s = s.difference(&v);
            extracted = extracted.union(&v);
        }
        if let Some(min) = trace.iterations.iter().map(|it| it.e_plus_ratio).reduce(f64::max) {
            tr.ratio("extracted_energy_max", min);
        }
        tr.flag("partition", b.len() + c.len() == a.len() && b.union(&c) == a && extracted == c && s == b);
        tr.flag("halting", trace.e_times_b as f64 * trace.m_used <= (a.len() as f64).powi(3));
        tr.flag("certificates", certified);
        tr.flag("terminates", trace.iterations.len() <= a.len());
        trials.push(tr);
    }
    Ok(Run::new(trials).param("size", size))
}

fn spectrum(ctx: &Ctx) -> Result<Run, CliError> {
    let o = DigraphOracle::new(&ctx.ring, ctx.variant);
    let s = o.second_eigenvalue().map_err(core)?;
    let q = ctx.q() as i64;
    let mut tr = Trial::default();
    tr.set("mu", s.mu);
    tr.set("mu_squared", s.mu_squared);
    tr.set("constant_c", s.constant_c);
    tr.set("trivial_eigenvalue", s.trivial_eigenvalue);
    tr.set("method", s.method.clone());
    for (ev, mult) in &s.nontrivial_spectrum {
        tr.set(&format!("multiplicity.{ev}"), *mult);
    }
    tr.bound("mu_squared", 4.0 * (q as f64).powi(13), "spectrum");
    tr.ratio("mu_squared", s.mu_squared as f64 / (4.0 * (q as f64).powi(13)));
    tr.flag("trivial_eigenvalue", s.trivial_eigenvalue == q.pow(16));
    tr.flag("mu_squared_budget", s.mu_squared as f64 <= 4.0 * (q as f64).powi(13));
    if ctx.q() == 2 {
        let g = dense::DenseGram::assemble(&o).map_err(core)?;
        let pi = g.deflated_power_iteration(ctx.seed);
        tr.set("power_iteration_eigenvalue", pi.eigenvalue);
        tr.set("power_iteration_steps", pi.iterations);
        let rel = (pi.eigenvalue - s.mu_squared as f64).abs() / s.mu_squared as f64;
        tr.flag("power_iteration_agrees", rel <= 1e-6);
    }
    Ok(Run::new(vec![tr]).param("variant", ctx.variant.to_string()))
}

fn mixing(ctx: &Ctx) -> Result<Run, CliError> {
    let o = DigraphOracle::new(&ctx.ring, ctx.variant);
    let mu = require_mu(ctx, ctx.variant)?;
    let size = default_size(ctx, 500);
    let mut trials = Vec::new();
    let mut seeds = Vec::new();
    for t in 0..ctx.trials_or(10) {
        let seed = ctx.derived_seed(0, t);
        seeds.push(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = o.random_vertices(&mut rng, size).map_err(core)?;
        let c = o.random_vertices(&mut rng, size).map_err(core)?;
        let rep = o.mixing_deviation(&b, &c, mu).map_err(core)?;
        let mut tr = Trial::default();
        tr.set("e_bc", rep.e_bc);
        tr.set("expected", rep.expected);
        tr.set("deviation", rep.deviation);
        tr.bound("deviation", rep.bound, "mixing");
        tr.ratio("deviation", rep.deviation / rep.bound);
        tr.flag("mixing", rep.holds);
        trials.push(tr);
    }
    let mut run = Run::new(trials).param("size", size).param("mu", mu).param("variant", ctx.variant.to_string());
    run.seeds = seeds;
    Ok(run)
}

fn prop31(ctx: &Ctx) -> Result<Run, CliError> {
    let o = DigraphOracle::new(&ctx.ring, Variant::Left);
    let mu = require_mu(ctx, Variant::Left)?;
    let size = default_size(ctx, 40);
    let random = random_source(ctx, size, Universe::M2);
    let mut trials = Vec::new();
    for t in 0..ctx.trials_or(1) {
        let sets: Vec<MatSet> = (0..6).map(|r| ctx.set(r, t, Universe::M2, &random)).collect::<Result<_, _>>()?;
        let refs = [&sets[0], &sets[1], &sets[2], &sets[3], &sets[4], &sets[5]];
        let rep = o.count_i_spectral_check(refs, mu).map_err(core)?;
        let mut tr = Trial::default();
        tr.set("i", rep.i);
        tr.set("product", rep.product);
        tr.set("main_term", rep.main_term);
        tr.set("deviation", rep.deviation);
        tr.bound("deviation", rep.bound, "prop31");
        tr.ratio("deviation", if rep.bound > 0.0 { rep.deviation / rep.bound } else { 0.0 });
        tr.flag("prop31", rep.holds);
        trials.push(tr);
    }
    Ok(Run::new(trials).param("size", size).param("mu", mu))
}

fn random_pairs(ctx: &Ctx, o: &DigraphOracle, count: usize) -> Vec<(u64, u64)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.derived_seed(0, 0));
    (0..count).map(|_| (rng.gen_range(0..o.n()), rng.gen_range(0..o.n()))).collect()
}

fn normality(ctx: &Ctx) -> Result<Run, CliError> {
    let o = DigraphOracle::new(&ctx.ring, ctx.variant);
    let pairs = ctx.trials_or(1000);
    let mut tr = Trial::default();
    let mut mismatches = 0usize;
    for (u, v) in random_pairs(ctx, &o, pairs) {
        let out = o.common_neighbors_bruteforce(u, v, Direction::Out);
        let inn = o.common_neighbors_bruteforce(u, v, Direction::In);
        if out != inn {
            if mismatches == 0 {
                tr.set("first_mismatch", format!("u={u} v={v} out={out} in={inn}"));
            }
            mismatches += 1;
        }
    }
    tr.set("pairs", pairs);
    tr.set("mismatches", mismatches);
    tr.flag("normal", mismatches == 0);
    Ok(Run::new(vec![tr]).param("variant", ctx.variant.to_string()))
}

fn pair_classes(ctx: &Ctx) -> Result<Run, CliError> {
    let o = DigraphOracle::new(&ctx.ring, ctx.variant);
    let pairs = ctx.trials_or(1000);
    let mut tr = Trial::default();
    let mut mismatches = 0usize;
    let mut tags: BTreeMap<String, usize> = BTreeMap::new();
    for (u, v) in random_pairs(ctx, &o, pairs) {
        let class = o.classify_pair(u, v);
        *tags.entry(format!("{:?}", class.tag)).or_default() += 1;
        let brute = o.common_neighbors_bruteforce(u, v, Direction::Out);
        if brute != class.predicted_common_out {
            if mismatches == 0 {
                tr.set("first_mismatch", format!("u={u} v={v} tag={:?} predicted={} brute={brute}", class.tag, class.predicted_common_out));
            }
            mismatches += 1;
        }
    }
    for (tag, n) in tags {
        tr.set(&format!("tag.{tag}"), n);
    }
    tr.set("pairs", pairs);
    tr.set("mismatches", mismatches);
    tr.flag("prediction_matches", mismatches == 0);
    Ok(Run::new(vec![tr]).param("variant", ctx.variant.to_string()))
}

fn sharpness_ab_plus_c(ctx: &Ctx) -> Result<Run, CliError> {
    let q = ctx.q();
    let x_vals = ctx.x.clone().unwrap_or_else(|| vec![0, 1]);
    let x: Vec<Fe> = x_vals.iter().map(|&v| ctx.ring.field().element(v)).collect::<Result<_, _>>().map_err(core)?;
    let (a, b, c) = constructions::sharpness_ab_plus_c(&ctx.ring, &x).map_err(core)?;
    let s = set_sum(&set_prod(&a, &b).map_err(core)?, &c).map_err(core)?;
    let mut dedup = x.clone();
    dedup.sort();
    dedup.dedup();
    let mut tr = Trial::default();
    tr.set("size_a", a.len());
    tr.set("size_b", b.len());
    tr.set("size_c", c.len());
    tr.set("size_ab_plus_c", s.len());
    tr.set("predicted_size_ab_plus_c", q.pow(3) as usize * dedup.len());
    tr.set("product_of_sizes", (a.len() * b.len() * c.len()) as u128);
    tr.flag("sizes", a.len() as u32 == q.pow(3) && c.len() == q.pow(3) as usize * dedup.len());
    tr.flag("ab_plus_c_equals_c", s == c);
    let bound = (q.pow(4) as f64).min(sizes(&[&a, &b, &c]) / (q as f64).powf(6.5));
    tr.bound("size_ab_plus_c", bound, "sharpness_ab_plus_c");
    tr.ratio("size_ab_plus_c", s.len() as f64 / bound);
    Ok(Run::new(vec![tr]).param("x", x_vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
}

fn sharpness_a_plus_b_c(ctx: &Ctx) -> Result<Run, CliError> {
    let (p, k) = (ctx.order.p, ctx.order.k);
    let (a, b, c) = constructions::sharpness_a_plus_b_c(&ctx.ring).map_err(core)?;
    let s = set_prod(&set_sum(&a, &b).map_err(core)?, &c).map_err(core)?;
    let product = (a.len() * b.len() * c.len()) as u128;
    let mut tr = Trial::default();
    tr.set("size_a", a.len());
    tr.set("size_b", b.len());
    tr.set("size_c", c.len());
    tr.set("product_of_sizes", product);
    tr.set("size_a_plus_b_times_c", s.len());
    tr.set("predicted_size", (p as u128).pow(4 * k - 1));
    tr.set("predicted_product", (p as u128).pow(10 * k - 2));
    tr.flag("size_a_plus_b_times_c", s.len() as u128 == (p as u128).pow(4 * k - 1));
    tr.flag("product_of_sizes", product == (p as u128).pow(10 * k - 2));
    tr.flag("a_plus_b_equals_a", set_sum(&a, &b).map_err(core)? == a);
    Ok(Run::new(vec![tr]))
}

fn sharpness_det_subgroup(ctx: &Ctx) -> Result<Run, CliError> {
    let q = ctx.q();
    let order = ctx.g.unwrap_or(if (q - 1) % 2 == 0 { 2 } else { 1 });
    let g = constructions::subgroup_of_order(ctx.ring.field(), order).map_err(core)?;
    let a = constructions::det_subgroup_set(&ctx.ring, &g).map_err(core)?;
    let aa = set_prod(&a, &a).map_err(core)?;
    let mut tr = Trial::default();
    tr.set("size_g", g.len());
    tr.set("size_a", a.len());
    tr.set("size_aa", aa.len());
    tr.set("size_a_plus_a", set_sum(&a, &a).map_err(core)?.len());
    tr.set("predicted_size_a", order * (q * q * q - q));
    tr.flag("size_a", a.len() as u32 == order * (q * q * q - q));
    tr.flag("aa_equals_a", aa == a);
    tr.flag("closed_under_inverse", a.inverses().map_err(core)? == a);
    Ok(Run::new(vec![tr]).param("g", order))
}
