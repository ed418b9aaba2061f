//! End-to-end acceptance criteria. Each test prints one `ACn PASS|FAIL` line
//! to stderr (bypassing output capture) with the measured values.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::{LazyLock, OnceLock};
use std::time::Instant;

use pwaff_core::catalog::{self, FixtureMap, EXAMPLE3_IDENTITY_PIECE};
use pwaff_core::entropyest::{estimate, EntropyReport, EstimateConfig};
use pwaff_core::exactgeom::{rat, RMat};
use pwaff_core::pwamap::{
    growth_sequences, iterate_partition, iterate_partition_with, multiplicity_at, Partition, PwaMap, DEFAULT_CELL_CAP,
};
use pwaff_core::rates::{
    entropy_upper_bound, lambda_rates, rho_sampled, rho_sampled_with_cocycle, rho_two_point_slope,
    spectral_radius_is_one_2x2, word_lambda_plus_bound, SampleConfig,
};
use pwaff_core::skew::fibred_bounds;
use pwaff_core::verify::plan_for;

const CAP: usize = DEFAULT_CELL_CAP;

fn ln2() -> f64 {
    2f64.ln()
}

fn line(id: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{id:<4} {verdict}  {detail}");
}

/// Catalog fixtures given by a map (skew products over a map are flattened).
fn map_fixtures() -> Vec<(&'static str, PwaMap)> {
    catalog::fixture_names()
        .into_iter()
        .filter_map(|n| {
            let fx = catalog::fixture(n).unwrap();
            match &fx.map {
                FixtureMap::Map(f) => Some((n, f.clone())),
                FixtureMap::Skew(sp) => sp.flatten().ok().map(|f| (n, f)),
            }
        })
        .collect()
}

type Cache = BTreeMap<String, OnceLock<EntropyReport>>;

static FIXTURE_REPORTS: LazyLock<Cache> = LazyLock::new(|| {
    map_fixtures()
        .into_iter()
        .map(|(n, _)| (n.to_string(), OnceLock::new()))
        .collect()
});

fn fixture_map(name: &str) -> PwaMap {
    catalog::fixture(name).unwrap().pwamap().unwrap()
}

/// Estimator report for a catalog map under its verification plan, computed once.
fn fixture_report(name: &str) -> &'static EntropyReport {
    FIXTURE_REPORTS[name].get_or_init(|| estimate(&fixture_map(name), &plan_for(name).estimate).unwrap())
}

const RANDOM_MAPS: u64 = 20;

fn random_dim(seed: u64) -> usize {
    1 + (seed % 3) as usize
}

fn random_config(d: usize) -> EstimateConfig {
    let rates_n = if d == 3 { 4 } else { 6 };
    let eps_ladder = if d == 3 {
        vec![0.25, 0.125]
    } else {
        EstimateConfig::default().eps_ladder
    };
    EstimateConfig {
        eps_ladder,
        n_max: 8,
        grid_per_axis: [0, 4096, 128, 32][d],
        samples: 5000,
        rates_n,
        mult_n: rates_n,
        ..EstimateConfig::default()
    }
}

static RANDOM_REPORTS: LazyLock<Vec<OnceLock<EntropyReport>>> =
    LazyLock::new(|| (0..RANDOM_MAPS).map(|_| OnceLock::new()).collect());

fn random_report(seed: u64) -> &'static EntropyReport {
    RANDOM_REPORTS[seed as usize].get_or_init(|| {
        let d = random_dim(seed);
        estimate(&catalog::random_map(d, seed).unwrap(), &random_config(d)).unwrap()
    })
}

fn fmt_interval(v: [f64; 2]) -> String {
    format!("[{:.4}, {:.4}]", v[0], v[1])
}

#[test]
fn ac01_example1_apex_multiplicity() {
    let t = Instant::now();
    let f = catalog::example1_map();
    let apex = catalog::example1_apex();
    let mut mults = Vec::new();
    iterate_partition_with(&f, 10, CAP, |p| {
        mults.push(multiplicity_at(p, &apex));
        Ok(())
    })
    .unwrap();
    let secs = t.elapsed().as_secs_f64();
    let exact = mults.iter().enumerate().all(|(k, &m)| m == 1 << (k + 1));
    let pass = exact && secs < 60.0;
    line(
        "AC1",
        pass,
        &format!("mult(Z^n, apex) for n=1..10: {mults:?}; {secs:.1}s"),
    );
    assert!(pass);
}

#[test]
fn ac02_example1_rates() {
    let f = catalog::example1_map();
    let plan = plan_for("example1");
    let r = fixture_report("example1");
    let mult = r.growth.mult_slope();
    let word_n = plan.word_n.unwrap();
    let lp_words = word_lambda_plus_bound(&f.linear_parts(), word_n, CAP).unwrap();
    let lp = r.rates.lambda_plus.min(lp_words);

    let n = plan.estimate.rates_n;
    let long = rho_sampled(&f, &iterate_partition(&f, n, CAP).unwrap(), 1, plan.rho).unwrap();
    let short = rho_sampled(&f, &iterate_partition(&f, n / 2, CAP).unwrap(), 1, plan.rho).unwrap();
    let rho = rho_two_point_slope(&short, &long);

    let checks = [
        (mult - ln2()).abs() <= 0.05,
        lp <= 0.02,
        (rho - ln2()).abs() <= 0.05,
        r.headline <= 0.1,
    ];
    let pass = checks.iter().all(|&c| c);
    line(
        "AC2",
        pass,
        &format!(
            "mult slope(n={n}) {mult:.4}; lambda+ cells(n={n}) {:.4}, all words(n={word_n}) {lp_words:.4}; \
             rho1 slope(n={}..{n}) {rho:.4}; direct slope {:.4} (eps {:?}); checks {checks:?}",
            r.rates.lambda_plus,
            n / 2,
            r.headline,
            r.headline_eps
        ),
    );
    assert!(pass);
}

#[test]
fn ac03_example2() {
    let r = fixture_report("example2");
    let rung = r.ladder.iter().find(|l| l.eps == 0.25).expect("eps 1/4 on the ladder");
    let sep = rung.separated.two_point;
    let width = r.verdict[1] - r.verdict[0];
    let checks = [
        sep >= ln2() - 0.05,
        r.bound.bound <= ln2() + 0.1,
        r.verdict[0] <= ln2() && ln2() <= r.verdict[1],
        width <= 0.15,
    ];
    let pass = checks.iter().all(|&c| c);
    line(
        "AC3",
        pass,
        &format!(
            "separated slope(eps 1/4, n<={}) {sep:.4}; bound {:.4}; verdict {} width {width:.4}; checks {checks:?}",
            rung.separated.n_eff,
            r.bound.bound,
            fmt_interval(r.verdict)
        ),
    );
    assert!(pass);
}

/// Linear part composed along `word[from..]`.
fn tail_product(f: &PwaMap, word: &[usize], from: usize) -> RMat {
    word[from..].iter().fold(RMat::identity(f.dim()), |m, &k| {
        f.pieces()[k].map.linear.mul(&m).unwrap()
    })
}

#[test]
fn ac04_example3() {
    let f = catalog::example3_map();
    let r = fixture_report("example3");
    let mult = r.growth.mult_slope();
    let n = r.rates.n;

    // once a word enters the identity piece it stays there; the cocycle from that time on is checked exactly
    let p: Partition = iterate_partition(&f, n, CAP).unwrap();
    let mut entered = 0;
    let mut spectral_ok = true;
    for c in &p.cells {
        if let Some(t) = c.word.iter().position(|&k| k == EXAMPLE3_IDENTITY_PIECE) {
            entered += 1;
            spectral_ok &= c.word[t..].iter().all(|&k| k == EXAMPLE3_IDENTITY_PIECE);
            spectral_ok &= spectral_radius_is_one_2x2(&tail_product(&f, &c.word, t));
        }
    }
    let contains = r.verdict[0] <= ln2() && ln2() <= r.verdict[1];
    let checks = [(mult - ln2()).abs() <= 0.05, entered > 0 && spectral_ok, contains];
    let pass = checks.iter().all(|&c| c);
    line(
        "AC4",
        pass,
        &format!(
            "mult slope(n={n}) {mult:.4}; {entered} of {} cells of Z^{n} entered the identity piece, \
             spectral radius one after entry: {spectral_ok}; verdict {}; checks {checks:?}",
            p.len(),
            fmt_interval(r.verdict)
        ),
    );
    assert!(pass);
}

#[test]
fn ac05_cat_map() {
    let h = catalog::cat_map_entropy();
    let r = fixture_report("catmap");
    let width = r.verdict[1] - r.verdict[0];
    let contains = r.verdict[0] <= h && h <= r.verdict[1];
    let mults: Vec<u64> = r
        .growth
        .mult
        .entries
        .iter()
        .filter(|e| e.n <= 8)
        .map(|e| e.value)
        .collect();
    let mult_ok = mults.iter().all(|&m| m <= 16);
    let lmax = r.rates.lambda_max;
    let checks = [contains && width <= 0.15, mult_ok, (lmax - h).abs() <= 1e-9];
    let pass = checks.iter().all(|&c| c);
    line(
        "AC5",
        pass,
        &format!(
            "verdict {} width {width:.4} (target {h:.4}); mult(Z^n) n=1..8 {mults:?}; lambda_max {lmax:.10}; \
             mult slope to n={} {:.4}; checks {checks:?}",
            fmt_interval(r.verdict),
            r.growth.mult.entries.last().unwrap().n,
            r.growth.mult_slope()
        ),
    );
    // mult(Z^n) = 2n + 1 exceeds 16 at n = 8; the sector-count oracle confirms
    // the exact values, so only the attainable parts are asserted here
    assert!(
        checks[0] && checks[2],
        "attainable parts of the cat map criterion failed"
    );
    assert!(
        mults.iter().enumerate().all(|(k, &m)| m == 2 * (k as u64 + 1) + 1),
        "cat map multiplicities left the 2n+1 pattern: {mults:?}"
    );
}

struct Inequalities {
    failures: Vec<String>,
    worst_entropy_gap: f64,
    worst_mult_gap: f64,
}

fn check_inequalities(pop: &[(String, &EntropyReport)]) -> Inequalities {
    let mut out = Inequalities {
        failures: Vec::new(),
        worst_entropy_gap: f64::NEG_INFINITY,
        worst_mult_gap: f64::NEG_INFINITY,
    };
    for (name, r) in pop {
        let mult = r.growth.mult_slope();
        let entropy_gap = r.headline - (r.rates.lambda_plus + mult);
        let rho_sum: f64 = if r.rates.rho_bound.is_empty() && r.rates.lambda_min.is_finite() {
            0.0
        } else if r.rates.lambda_min.is_finite() {
            r.rates.rho_bound.iter().sum()
        } else {
            f64::INFINITY
        };
        let mult_gap = mult - rho_sum;
        if !(entropy_gap <= 0.1) {
            out.failures.push(format!(
                "{name}: direct {:.4} vs bound gap {entropy_gap:.4}",
                r.headline
            ));
        }
        if !(mult_gap <= 0.1) {
            out.failures
                .push(format!("{name}: mult slope {mult:.4} vs rho sum {rho_sum:.4}"));
        }
        out.worst_entropy_gap = out.worst_entropy_gap.max(entropy_gap);
        out.worst_mult_gap = out.worst_mult_gap.max(mult_gap);
    }
    out
}

#[test]
fn ac06_finite_n_inequalities() {
    let mut pop: Vec<(String, &EntropyReport)> = map_fixtures()
        .into_iter()
        .map(|(n, _)| (n.to_string(), fixture_report(n)))
        .collect();
    let fixtures = pop.len();
    for seed in 0..RANDOM_MAPS {
        pop.push((
            format!("random d={} seed={seed}", random_dim(seed)),
            random_report(seed),
        ));
    }
    let ineq = check_inequalities(&pop);
    let pass = ineq.failures.is_empty();
    line(
        "AC6",
        pass,
        &format!(
            "{fixtures} catalog maps + {RANDOM_MAPS} random maps; max(direct - lambda+ - mult) {:.4}; \
             max(mult - sum rho bounds) {:.4}; failures {:?}",
            ineq.worst_entropy_gap, ineq.worst_mult_gap, ineq.failures
        ),
    );
    assert!(pass);
}

/// Multiplies each piece's linear part by its own nonzero scalar.
fn scaled_cocycle(f: &PwaMap) -> Vec<RMat> {
    let scalars = [rat(3, 1), rat(-2, 7), rat(5, 3), rat(-1, 1)];
    f.linear_parts()
        .iter()
        .enumerate()
        .map(|(k, m)| m.scale(&scalars[k % scalars.len()]))
        .collect()
}

#[test]
fn ac07_angular_rates_below_bounds() {
    let mut pop: Vec<(String, PwaMap, usize)> = map_fixtures()
        .into_iter()
        .map(|(n, f)| (n.to_string(), f, plan_for(n).estimate.rates_n))
        .collect();
    for seed in 0..RANDOM_MAPS {
        let d = random_dim(seed);
        pop.push((
            format!("random d={d} seed={seed}"),
            catalog::random_map(d, seed).unwrap(),
            random_config(d).rates_n,
        ));
    }
    let cfg = SampleConfig::default();
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    let mut invariant = true;
    for (name, f, n) in &pop {
        let d = f.dim();
        if d < 2 {
            continue;
        }
        let p = iterate_partition(f, *n, CAP).unwrap();
        let rates = lambda_rates(&p).unwrap();
        let scaled = scaled_cocycle(f);
        for i in 1..d {
            let s = rho_sampled(f, &p, i, cfg).unwrap();
            let b = rates.rho_bound[i - 1];
            checked += 1;
            worst = worst.max(s.value - b);
            if !(s.value <= b + 0.05) {
                failures.push(format!("{name} i={i}: sampled {:.4} bound {b:.4}", s.value));
            }
            let t = rho_sampled_with_cocycle(f, &scaled, &p, i, cfg).unwrap();
            if s.value.to_bits() != t.value.to_bits() || s.best != t.best {
                invariant = false;
                failures.push(format!("{name} i={i}: scaled cocycle gives {} vs {}", t.value, s.value));
            }
        }
    }
    let pass = failures.is_empty();
    line(
        "AC7",
        pass,
        &format!(
            "{checked} (map, i) pairs; max(sampled - bound) {worst:.4}; bitwise scaling invariance {invariant}; \
             failures {failures:?}"
        ),
    );
    assert!(pass);
}

#[test]
fn ac08_conformal_toys() {
    let conformal = [
        "identity",
        "quarter-turn",
        "rotation-contraction",
        "conformal-two-piece",
    ];
    let non_expanding = [
        "identity",
        "quarter-turn",
        "rotation-contraction",
        "conformal-two-piece",
        "half-contraction",
        "interval-exchange",
    ];
    let cfg = SampleConfig::default();
    let mut details = Vec::new();
    let mut pass = true;
    for name in conformal {
        let f = fixture_map(name);
        let p = iterate_partition(&f, plan_for(name).estimate.rates_n, CAP).unwrap();
        let rho = (1..f.dim())
            .map(|i| rho_sampled(&f, &p, i, cfg).unwrap().value)
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= rho <= 1e-9;
        details.push(format!("{name} rho {rho:.2e}"));
    }
    for name in non_expanding {
        let f = fixture_map(name);
        let n = plan_for(name).estimate.rates_n;
        let g = growth_sequences(&f, n, CAP).unwrap();
        let rates = lambda_rates(&iterate_partition(&f, n, CAP).unwrap()).unwrap();
        let b = entropy_upper_bound(&rates, f.dim(), g.mult_slope()).bound;
        pass &= b <= 0.02;
        details.push(format!("{name} bound {b:.4}"));
    }
    line("AC8", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn ac09_full_shift_skews() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, symbols) in [
        ("shift2-conformal", 2usize),
        ("shift3-conformal", 3),
        ("shift5-conformal", 5),
    ] {
        let sp = catalog::shift_conformal_skew(symbols).unwrap();
        let plan = plan_for(name);
        let b = fibred_bounds(&sp, plan.estimate.rates_n, plan.fibre_m, &plan.estimate).unwrap();
        let h = (symbols as f64).ln();
        let ok = (b.lower - h).abs() <= 1e-9 && (b.upper - h).abs() <= 1e-9;
        pass &= ok;
        details.push(format!("N={symbols} [{:.12}, {:.12}] vs {h:.12}", b.lower, b.upper));
    }
    line("AC9", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn ac10_power_property() {
    let f = catalog::doubling_map();
    let f2 = f.power(2, CAP).unwrap();
    let cfg = plan_for("doubling").estimate;
    let cfg2 = EstimateConfig {
        n_max: cfg.n_max / 2,
        rates_n: cfg.rates_n / 2,
        mult_n: cfg.rates_n / 2,
        ..cfg.clone()
    };
    let s1 = estimate(&f, &cfg).unwrap().headline;
    let s2 = estimate(&f2, &cfg2).unwrap().headline;
    let rel = (s2 - 2.0 * s1).abs() / (2.0 * s1);
    let pass = rel <= 0.1;
    line(
        "AC10",
        pass,
        &format!("slope(f) {s1:.4}; slope(f^2) {s2:.4}; |slope(f^2) - 2 slope(f)| / (2 slope(f)) = {rel:.4}"),
    );
    assert!(pass);
}

#[test]
fn ac11_oracle_word_sets() {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, f) in map_fixtures() {
        let g = match f.dim() {
            1 => 512,
            2 => 64,
            _ => 16,
        };
        match common::check_words(name, &f, 8, g) {
            Ok(words) => details.push(format!("{name} {words}")),
            Err(e) => {
                pass = false;
                details.push(e);
            }
        }
    }
    line(
        "AC11",
        pass,
        &format!("words of Z^8 equal oracle words: {}", details.join(", ")),
    );
    assert!(pass);
}
