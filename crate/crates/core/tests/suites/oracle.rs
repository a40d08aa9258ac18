//! Every statistic checked against a naive, separately written
//! implementation on random small samples.

use super::common::Check;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sic_core::stats::{
    ci95, cohens_d, icc, mann_whitney, power_sample_size, ttest, EffectMode, IccVariant, MwMethod, Sided, TestMode,
    EXACT_MAX_N,
};

const SAMPLES: usize = 1000;
const STAT_TOL: f64 = 1e-9;
const P_TOL: f64 = 1e-6;

// naive building blocks

fn naive_mean(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in xs {
        s += x;
    }
    s / xs.len() as f64
}

/// Sample variance from pairwise squared differences.
fn naive_var(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += (xs[i] - xs[j]).powi(2);
        }
    }
    s / (n * (n - 1)) as f64
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Upper tail of Student t by integrating cos^(v-1) after t = sqrt(v) tan(theta).
fn oracle_t_sf(t: f64, df: f64) -> f64 {
    let f = |th: f64| th.cos().powf(df - 1.0);
    let total = simpson(f, 0.0, std::f64::consts::FRAC_PI_2, 20_000);
    let theta = (t.abs() / df.sqrt()).atan();
    let inner = simpson(f, 0.0, theta, 20_000) / total;
    let upper = 0.5 - inner / 2.0;
    if t >= 0.0 {
        upper
    } else {
        1.0 - upper
    }
}

fn oracle_normal_cdf(z: f64) -> f64 {
    let half = simpson(|x| (-x * x / 2.0).exp(), 0.0, z.abs(), 20_000) / (2.0 * std::f64::consts::PI).sqrt();
    if z >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

fn sample(rng: &mut ChaCha8Rng, n: usize, discrete: bool) -> Vec<f64> {
    (0..n)
        .map(|_| if discrete { rng.random_range(0..6) as f64 } else { rng.random_range(-3.0..3.0) })
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

// t-tests and effect sizes

pub fn ttests_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..SAMPLES {
        let na = rng.random_range(4..12);
        let nb = if case % 3 == 0 { na } else { rng.random_range(4..12) };
        let a = sample(&mut rng, na, false);
        let b = sample(&mut rng, nb, false);
        let (ma, mb, va, vb) = (naive_mean(&a), naive_mean(&b), naive_var(&a), naive_var(&b));
        let (fa, fb) = (na as f64, nb as f64);

        let df = fa + fb - 2.0;
        let sp2 = ((fa - 1.0) * va + (fb - 1.0) * vb) / df;
        let t = (ma - mb) / (sp2 * (1.0 / fa + 1.0 / fb)).sqrt();
        let got = ttest(&a, &b, TestMode::Unpaired, Sided::Two).unwrap();
        assert!(close(got.t, t, STAT_TOL), "case {case}: pooled t {} vs {t}", got.t);
        assert_eq!(got.df, df);
        assert!((got.p - 2.0 * oracle_t_sf(t.abs(), df)).abs() < P_TOL, "case {case}: pooled p");
        let one = ttest(&a, &b, TestMode::Unpaired, Sided::One).unwrap();
        assert!((one.p - oracle_t_sf(t, df)).abs() < P_TOL, "case {case}: one-sided p");

        let (qa, qb) = (va / fa, vb / fb);
        let wdf = (qa + qb).powi(2) / (qa * qa / (fa - 1.0) + qb * qb / (fb - 1.0));
        let wt = (ma - mb) / (qa + qb).sqrt();
        let got = ttest(&a, &b, TestMode::Welch, Sided::Two).unwrap();
        assert!(close(got.t, wt, STAT_TOL) && close(got.df, wdf, STAT_TOL), "case {case}: welch");
        assert!((got.p - 2.0 * oracle_t_sf(wt.abs(), wdf)).abs() < P_TOL, "case {case}: welch p");

        let d = cohens_d(&a, &b, EffectMode::IndependentPooled).unwrap();
        assert!(close(d, (ma - mb) / sp2.sqrt(), STAT_TOL), "case {case}: pooled d");

        if na == nb {
            let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let (md, vd) = (naive_mean(&diffs), naive_var(&diffs));
            let pt = md / (vd / fa).sqrt();
            let got = ttest(&a, &b, TestMode::Paired, Sided::Two).unwrap();
            assert!(close(got.t, pt, STAT_TOL), "case {case}: paired t");
            assert!((got.p - 2.0 * oracle_t_sf(pt.abs(), fa - 1.0)).abs() < P_TOL, "case {case}: paired p");
            let d = cohens_d(&a, &b, EffectMode::PairedDiffs).unwrap();
            assert!(close(d, md / vd.sqrt(), STAT_TOL), "case {case}: paired d");
        }
    }
}

pub fn ci_boundaries_sit_at_five_percent() {
    // a one-sample test of the mean against either end of the interval has p = 0.05
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..SAMPLES {
        let n = rng.random_range(4..15);
        let xs = sample(&mut rng, n, false);
        let ci = ci95(&xs).unwrap();
        let (m, v) = (naive_mean(&xs), naive_var(&xs));
        let se = (v / n as f64).sqrt();
        assert!(close((ci.lo + ci.hi) / 2.0, m, STAT_TOL), "case {case}: centre");
        let t = (m - ci.lo) / se;
        let p = 2.0 * oracle_t_sf(t, n as f64 - 1.0);
        assert!((p - 0.05).abs() < P_TOL, "case {case}: p at bound {p}");
    }
}

pub fn symmetry_and_scale_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..SAMPLES {
        let (na, nb) = (rng.random_range(4..10), rng.random_range(4..10));
        let a = sample(&mut rng, na, case % 2 == 0);
        let b = sample(&mut rng, nb, case % 2 == 0);
        let Ok(ab) = ttest(&a, &b, TestMode::Unpaired, Sided::Two) else { continue };
        let ba = ttest(&b, &a, TestMode::Unpaired, Sided::Two).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert!((ab.p - ba.p).abs() < 1e-12);

        let u_ab = mann_whitney(&a, &b).unwrap();
        let u_ba = mann_whitney(&b, &a).unwrap();
        assert!((u_ab.u + u_ba.u - (a.len() * b.len()) as f64).abs() < 1e-12, "case {case}: U symmetry");
        assert!((u_ab.p - u_ba.p).abs() < 1e-12, "case {case}: U p symmetry");

        if let Ok(d) = cohens_d(&a, &b, EffectMode::IndependentPooled) {
            let c = rng.random_range(0.1..50.0);
            let sa: Vec<f64> = a.iter().map(|x| x * c).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * c).collect();
            let ds = cohens_d(&sa, &sb, EffectMode::IndependentPooled).unwrap();
            assert!(close(ds, d, 1e-9), "case {case}: scale");
        }
    }
}

// Mann-Whitney

fn pairwise_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided p from enumerating every way to pick the first group's positions.
fn enumerated_p(a: &[f64], b: &[f64]) -> f64 {
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = all.len();
    let m = a.len();
    let observed = pairwise_u(a, b);
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let (mut ga, mut gb) = (Vec::new(), Vec::new());
        for (i, &x) in all.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ga.push(x)
            } else {
                gb.push(x)
            }
        }
        let u = pairwise_u(&ga, &gb);
        total += 1;
        if u <= observed + 1e-9 {
            le += 1;
        }
        if u >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

fn normal_p(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let mut counts: std::collections::HashMap<u64, f64> = Default::default();
    for x in a.iter().chain(b) {
        *counts.entry(x.to_bits()).or_default() += 1.0;
    }
    let ties: f64 = counts.values().map(|t| t * t * t - t).sum();
    let var = na * nb / 12.0 * (n + 1.0 - ties / (n * (n - 1.0)));
    if var == 0.0 {
        return 1.0;
    }
    let u = pairwise_u(a, b);
    let z = ((u - na * nb / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * (1.0 - oracle_normal_cdf(z))).min(1.0)
}

pub fn mann_whitney_exact_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for case in 0..SAMPLES {
        let na = rng.random_range(1..=EXACT_MAX_N.min(6));
        let nb = rng.random_range(1..=EXACT_MAX_N.min(6));
        let a = sample(&mut rng, na, case % 2 == 0);
        let b = sample(&mut rng, nb, case % 2 == 0);
        let got = mann_whitney(&a, &b).unwrap();
        assert_eq!(got.method, MwMethod::Exact);
        assert!((got.u - pairwise_u(&a, &b)).abs() < STAT_TOL, "case {case}: U");
        let want = enumerated_p(&a, &b);
        assert!((got.p - want).abs() < P_TOL, "case {case}: p {} vs {want}", got.p);
    }
}

pub fn mann_whitney_normal_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for case in 0..SAMPLES {
        let na = rng.random_range(EXACT_MAX_N + 1..20);
        let nb = rng.random_range(2..20);
        let a = sample(&mut rng, na, case % 2 == 0);
        let b = sample(&mut rng, nb, case % 2 == 0);
        let got = mann_whitney(&a, &b).unwrap();
        assert_eq!(got.method, MwMethod::Normal);
        assert!((got.u - pairwise_u(&a, &b)).abs() < STAT_TOL, "case {case}: U");
        let want = normal_p(&a, &b);
        assert!((got.p - want).abs() < P_TOL, "case {case}: p {} vs {want}", got.p);
    }
}

// ICC

fn naive_icc(m: &[Vec<f64>]) -> [f64; 4] {
    let n = m.len() as f64;
    let k = m[0].len() as f64;
    let all: Vec<f64> = m.iter().flatten().copied().collect();
    let g = naive_mean(&all);
    let sst: f64 = all.iter().map(|x| (x - g).powi(2)).sum();
    let ssr: f64 = m.iter().map(|r| k * (naive_mean(r) - g).powi(2)).sum();
    let ssc: f64 = (0..m[0].len())
        .map(|j| {
            let col: Vec<f64> = m.iter().map(|r| r[j]).collect();
            n * (naive_mean(&col) - g).powi(2)
        })
        .sum();
    let sse = sst - ssr - ssc;
    let msr = ssr / (n - 1.0);
    let msc = ssc / (k - 1.0);
    let mse = sse / ((n - 1.0) * (k - 1.0));
    [
        (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / n),
        (msr - mse) / (msr + (msc - mse) / n),
        (msr - mse) / (msr + (k - 1.0) * mse),
        (msr - mse) / msr,
    ]
}

pub fn icc_matches_naive_anova() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut checked = 0;
    for case in 0..SAMPLES {
        let n = rng.random_range(3..12);
        let k = rng.random_range(2..6);
        let shared = case % 2 == 0;
        let m: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let t: f64 = rng.random_range(0.0..10.0);
                (0..k).map(|_| if shared { t + rng.random_range(-2.0..2.0) } else { rng.random_range(0.0..10.0) }).collect()
            })
            .collect();
        let r = icc(&m).unwrap();
        let want = naive_icc(&m);
        for (v, w) in IccVariant::ALL.iter().zip(want) {
            let e = r.get(*v);
            assert!((e.value - w).abs() < STAT_TOL, "case {case}: {v:?} {} vs {w}", e.value);
            assert!((0.0..=1.0).contains(&e.p));
            if !v.is_average() {
                assert!(e.value <= 1.0 + 1e-12, "case {case}: {v:?} above 1");
            }
        }
        // ICC3 is bounded below by -1/(k-1). The absolute-agreement ICC2 has
        // no such floor: discordant matrices with few targets push it below -1,
        // so its lower bound is only asserted when targets differ more than
        // the residual noise.
        let kf = k as f64;
        assert!(r.get(IccVariant::Icc3).value >= -1.0 / (kf - 1.0) - 1e-12, "case {case}: ICC3 floor");
        if r.mean_squares.msr >= r.mean_squares.mse {
            assert!(r.get(IccVariant::Icc2).value >= -1.0, "case {case}: ICC2 floor");
        }
        for (single, avg) in [(IccVariant::Icc2, IccVariant::Icc2k), (IccVariant::Icc3, IccVariant::Icc3k)] {
            let (s, a) = (r.get(single).value, r.get(avg).value);
            if s > 0.0 {
                assert!(a >= s - 1e-12, "case {case}: average below single");
            }
        }
        checked += 1;
    }
    assert_eq!(checked, SAMPLES);
}

pub fn icc_hand_matrix() {
    // 4 targets x 2 raters; by hand: grand 5, SSR = 2*(1+9+1+9) = 40,
    // column means 4.75 and 5.25 so SSC = 4*(0.0625*2) = 0.5, SST = 46, SSE = 5.5
    let m = vec![vec![5.0, 7.0], vec![1.0, 3.0], vec![4.0, 4.0], vec![9.0, 7.0]];
    let r = icc(&m).unwrap();
    let (msr, msc, mse) = (40.0 / 3.0, 0.5, 5.5 / 3.0);
    assert!((r.mean_squares.msr - msr).abs() < 1e-12);
    assert!((r.mean_squares.msc - msc).abs() < 1e-12);
    assert!((r.mean_squares.mse - mse).abs() < 1e-12);
    let icc3 = (msr - mse) / (msr + mse);
    assert!((r.get(IccVariant::Icc3).value - icc3).abs() < 1e-12);
}

pub fn icc2_has_no_minus_one_floor() {
    // two raters disagreeing in opposite directions on four targets
    let m = vec![vec![5.7, 6.4], vec![1.0, 9.5], vec![8.5, 3.2], vec![6.7, 0.5]];
    let r = icc(&m).unwrap();
    let icc2 = r.get(IccVariant::Icc2).value;
    assert!(icc2 < -1.0, "{icc2}");
    assert!((icc2 - naive_icc(&m)[0]).abs() < STAT_TOL);
    assert!(r.get(IccVariant::Icc3).value >= -1.0);
}

// sample size

pub fn power_formula_and_simulation() {
    // normal quantiles for 0.975, 0.95 and 0.80 written out
    let (z975, z95, z80) = (1.959963984540054, 1.6448536269514722, 0.8416212335729143);
    let formula = |d: f64, za: f64| (2.0 * (za + z80) * (za + z80) / (d * d)).ceil().max(2.0) as u32;
    for d in [0.2, 0.35, 0.5, 0.82, 1.0, 1.5, 4.0] {
        assert_eq!(power_sample_size(d, 0.05, 0.8, Sided::Two).unwrap(), formula(d, z975), "d {d}");
        assert_eq!(power_sample_size(d, 0.05, 0.8, Sided::One).unwrap(), formula(d, z95), "d {d}");
    }
    assert_eq!(power_sample_size(0.82, 0.05, 0.8, Sided::Two).unwrap(), 24);
    assert_eq!(power_sample_size(0.5, 0.05, 0.8, Sided::Two).unwrap(), 63);

    // simulated two-sided t-test power at the planned size lands near 80%
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    use rand_distr::Distribution;
    let n = 24;
    let sims = 4000;
    let mut hits = 0;
    for _ in 0..sims {
        let a: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng) + 0.82).collect();
        let b: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        if ttest(&a, &b, TestMode::Unpaired, Sided::Two).unwrap().p < 0.05 {
            hits += 1;
        }
    }
    let power = hits as f64 / sims as f64;
    assert!((0.75..0.86).contains(&power), "simulated power {power}");
}

#[allow(dead_code)]
pub const CHECKS: &[Check] = &[
    ("ttests_match_oracle", ttests_match_oracle),
    ("ci_boundaries_sit_at_five_percent", ci_boundaries_sit_at_five_percent),
    ("symmetry_and_scale_invariance", symmetry_and_scale_invariance),
    ("mann_whitney_exact_matches_enumeration", mann_whitney_exact_matches_enumeration),
    ("mann_whitney_normal_matches_formula", mann_whitney_normal_matches_formula),
    ("icc_matches_naive_anova", icc_matches_naive_anova),
    ("icc_hand_matrix", icc_hand_matrix),
    ("icc2_has_no_minus_one_floor", icc2_has_no_minus_one_floor),
    ("power_formula_and_simulation", power_formula_and_simulation),
];
