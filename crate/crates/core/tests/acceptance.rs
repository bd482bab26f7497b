//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints one line, pass or fail, with its runtime.

mod common;

use std::f64::consts::E;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use dp_bounds::inference::{
    marginal_likelihood, posterior_bounds, posterior_bounds_for, power_bound, power_bounds_two_sided,
    rr_marginal_bounds, support_given_prior, testing_distance, DataModel, EnvelopeScanner,
};
use dp_bounds::measures::{density_ratio_metric, density_ratio_metric_wrt, mult_distance};
use dp_bounds::mechanisms::{
    dp_statement_i, dp_statement_ii, dp_statement_iii, dp_statement_iv, group_privacy_check, min_epsilon,
    LaplaceMechanism, RandomizedResponse,
};
use dp_bounds::oracles::{
    exact_np_power, exact_posterior, laplace_np_power, np_test, posterior_density, PrivateCount,
    QuadratureGrid, Rule,
};
use dp_bounds::pufferfish::{
    dp_correspondence_instantiation, posterior_semantics, puff_statement_i, puff_statement_ii,
    puff_statement_iii, puff_statement_iv, pufferfish_power_bounds, pufferfish_satisfied,
    sample_product_priors, MechanismTable, Partition, PufferfishInstantiation,
};
use dp_bounds::{DataUniverse, Dataset, Distance, FiniteMeasure, Mechanism, Outcome};
use rand::Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn laplace_count(eps: f64) -> Mechanism {
    Mechanism::Laplace(LaplaceMechanism::count(eps).unwrap())
}

fn rr(eps: f64) -> Mechanism {
    Mechanism::RandomizedResponse(RandomizedResponse::new(eps).unwrap())
}

fn uniform_model(u: &DataUniverse) -> DataModel {
    let list = u.datasets().unwrap().to_vec();
    let w = vec![1.0 / list.len() as f64; list.len()];
    DataModel::new(vec!["θ".into()], vec![FiniteMeasure::probability(list, w).unwrap()]).unwrap()
}

fn criterion_1() -> String {
    for n in 1..=10 {
        let u = DataUniverse::binary(n);
        for eps in [0.1, 0.5, 1.0, 2.0] {
            let m = laplace_count(eps);
            let got = min_epsilon(&m, &u).unwrap();
            assert!(close(got, eps, 1e-12), "n={n} eps={eps}: min epsilon {got}");
        }
    }
    // one unit step of the count at eps = 0.1
    let eps = 0.1;
    let u = DataUniverse::binary(1);
    let (x, y) = (Dataset::vector([0]), Dataset::vector([1]));
    let m = laplace_count(eps);
    let px = |t: f64| m.density(&u, &x, Outcome::Real(t)).unwrap();
    let py = |t: f64| m.density(&u, &y, Outcome::Real(t)).unwrap();
    assert!(close(px(0.0), 0.05, 1e-12), "peak {}", px(0.0));
    assert!(close(py(1.0), 0.05, 1e-12));
    for k in 0..=200 {
        let z = -50.0 + k as f64 * 0.25;
        if z <= 0.0 {
            assert!(close(px(z), E.powf(eps) * py(z), 1e-12), "z={z}");
        }
        if z >= 1.0 {
            assert!(close(px(z), E.powf(-eps) * py(z), 1e-12), "z={z}");
        }
        let r = (px(z) / py(z)).ln();
        assert!(r.abs() <= eps + 1e-12);
    }
    assert!(close(px(0.0) / py(0.0) * 0.05, 0.05 * eps.exp(), 1e-12));
    "min epsilon = eps for n <= 10; peak 0.05, ratio band e^{±0.1}".into()
}

fn criterion_2() -> String {
    let mut pairs = 0;
    for n in 1..=6 {
        let u = DataUniverse::binary(n);
        let list = u.datasets().unwrap();
        let dist = u.distance_matrix().unwrap();
        for eps in [0.5, 1.0, 2.0] {
            let m = rr(eps);
            assert!(dp_statement_ii(&m, &u, eps).unwrap(), "statement II fails at n={n} eps={eps}");
            assert!(!dp_statement_ii(&m, &u, eps * 0.999).unwrap());
            let table = m.distribution_table(&u).unwrap();
            let mut worst_unit: f64 = 0.0;
            for i in 0..list.len() {
                for j in 0..list.len() {
                    let d = dist[i][j].finite().unwrap();
                    let dm = mult_distance(&table[i], &table[j]).unwrap();
                    assert!(close(dm, d as f64 * eps, 1e-12), "n={n} d={d}: {dm}");
                    if d == 1 {
                        worst_unit = worst_unit.max(dm);
                        pairs += 1;
                    }
                }
            }
            assert!(close(worst_unit, eps, 1e-12));
            let g = group_privacy_check(&m, &u, eps).unwrap();
            assert!(g.satisfied && close(g.worst_ratio, eps, 1e-12), "{g:?}");
        }
    }
    format!("{pairs} unit pairs at d_Mult = eps; group distance = δ·eps on every pair")
}

fn criterion_3() -> String {
    let u = DataUniverse::binary(10);
    let model = uniform_model(&u);
    let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
    let env = |eps: f64| {
        let m = laplace_count(eps);
        let mut scan = EnvelopeScanner::new(&u, &m, eps);
        grid.iter()
            .map(|&t| scan.envelope(Outcome::Real(t), &model, 0, None).unwrap())
            .collect::<Vec<_>>()
    };
    let (tight, loose) = (env(0.1), env(0.25));
    for (k, &t) in grid.iter().enumerate() {
        // closed forms: d* = 10 for every anchor, locations 0..=10
        let frac = (t - t.round()).abs();
        let lower = 0.05 * (-1.0 - 0.1 * frac).exp();
        let upper = 0.05 * (1.0 - 0.1 * t.max(10.0 - t)).exp();
        assert!(close(tight[k].lower, lower, 1e-9), "t={t}: {}", tight[k].lower);
        assert!(close(tight[k].upper, upper, 1e-9), "t={t}: {}", tight[k].upper);
        if frac < 1e-9 {
            assert!(close(tight[k].lower, 0.05 * E.powi(-1), 1e-9));
        }
        assert!(loose[k].lower <= tight[k].lower && loose[k].upper >= tight[k].upper, "t={t}");
        let p = marginal_likelihood(Outcome::Real(t), 0, &model, &laplace_count(0.1), &u).unwrap();
        assert!(tight[k].contains(p));
    }
    assert!(close(tight[50].upper, 0.05 * 0.5f64.exp(), 1e-9));
    format!(
        "lower {:.6} on integer t in [0,10], upper {:.6} at t = 5; eps = 0.25 looser",
        tight[0].lower, tight[50].upper
    )
}

fn criterion_4() -> String {
    let mut checked = 0;
    for n in 1..=6 {
        let u = DataUniverse::binary(n);
        let m = rr(1.0);
        let table = MechanismTable::new(&m, &u).unwrap();
        let b = rr_marginal_bounds(1.0, n);
        assert!(close(b.lower, (E + 1.0).powi(-(n as i32)), 1e-15));
        assert!(close(b.upper, E.powi(n as i32) / (E + 1.0).powi(n as i32), 1e-15));
        for theta in sample_product_priors(&u, 200, 40 + n as u64).unwrap() {
            let law = table.privatised(&theta).unwrap();
            for &p in law.as_discrete().unwrap().weights() {
                assert!(b.contains(p), "n={n}: {p} outside [{}, {}]", b.lower, b.upper);
                checked += 1;
            }
        }
        // point masses reach both ends: t = x gives the upper, t = complement the lower
        let x = Dataset::vector(vec![0; n]);
        let dx = m.distribution(&u, &x).unwrap();
        assert!(close(dx.weight(0), b.upper, 1e-12));
        assert!(close(dx.weight(dx.len() - 1), b.lower, 1e-12));
    }
    format!("{checked} exact marginals inside the bounds; endpoints attained")
}

fn criterion_5() -> String {
    let r = laplace_np_power(5.0, 5.0, 0.05).unwrap();
    assert!(close(r.power, 0.05 * E, 1e-9), "{}", r.power);
    assert!(close(r.power, power_bound(0.05, 0.2, Distance::Finite(5)).unwrap(), 1e-9));

    let mut g = rng(5);
    let mut n_checked = 0;
    let mut max_gap = f64::NEG_INFINITY;
    while n_checked < 300 {
        let u = random_universe(&mut g, 64);
        let eps = g.random_range(0.05..2.0);
        let k = g.random_range(2..=6);
        let m = random_dp_mechanism(&u, eps, k, &mut g);
        let model = random_model(&u, 2, &mut g);
        let alpha = *[0.01, 0.05, 0.1, 0.25, 0.5].get(g.random_range(0..5)).unwrap();
        let d2 = testing_distance(&model, 0, 1, &u).unwrap();
        let power = exact_np_power(&m, 0, 1, &model, &u, alpha).unwrap().power;
        let bound = power_bound(alpha, eps, d2).unwrap();
        assert!(power <= bound + 1e-9, "power {power} > bound {bound}");
        let env = power_bounds_two_sided(alpha, eps, d2).unwrap();
        assert!(power >= env.lower - 1e-9 && power <= env.upper + 1e-9, "{power} outside {env:?}");
        max_gap = max_gap.max(power - bound);
        n_checked += 1;
    }
    format!("Laplace NP power {:.6}; 300 random tests, max power - bound = {max_gap:.3e}", r.power)
}

fn criterion_6() -> String {
    let mut g = rng(6);
    let mut checked = 0;
    for _ in 0..300 {
        let u = random_universe(&mut g, 256);
        let eps = g.random_range(0.05..2.0);
        let k = g.random_range(2..=6);
        let m = random_dp_mechanism(&u, eps, k, &mut g);
        let n_theta = g.random_range(1..=20);
        let model = random_model(&u, n_theta, &mut g);
        let prior = random_prior(&model, &mut g);
        for t in (0..k).map(Outcome::Discrete) {
            if support_given_prior(t, &prior, &model, &m, &u).unwrap().is_empty() {
                continue;
            }
            let post = exact_posterior(&prior, &model, &m, &u, t).unwrap();
            let bounds = posterior_bounds_for(t, &prior, &model, &m, &u, eps).unwrap();
            for (i, b) in bounds.iter().enumerate() {
                assert!(b.contains(post.weight(i)), "{} outside {b:?}", post.weight(i));
                checked += 1;
            }
        }
    }
    // Θ = [0, 1] uniform; θ = 1 puts all mass on (1..1), every other θ on (0..0)
    for n in [1usize, 3, 5] {
        let eps = 0.5;
        let u = DataUniverse::binary(n);
        let m = laplace_count(eps);
        let (zeros, ones) = (Dataset::vector(vec![0; n]), Dataset::vector(vec![1; n]));
        let grid = QuadratureGrid::new(0.0, 1.0, 1000, Rule::Midpoint).unwrap();
        for t in [n as f64 + 0.5, n as f64 + 3.0] {
            let lik = |th: f64| {
                let x = if th == 1.0 { &ones } else { &zeros };
                m.density(&u, x, Outcome::Real(t)).unwrap()
            };
            let post = posterior_density(|_| 1.0, lik, &grid, &[1.0]).unwrap()[0];
            let b = posterior_bounds(1.0, eps, Distance::Finite(n as u64));
            assert!(close(post, (eps * n as f64).exp(), 1e-9), "n={n} t={t}: {post}");
            assert!(close(post, b.upper, 1e-9));
        }
    }
    format!("{checked} posterior masses inside π e^{{±ε d**}}; construction attains the upper bound")
}

fn criterion_7() -> String {
    let pc = PrivateCount::default();
    let grid = QuadratureGrid::with_step(0.0, 30.0, 0.01, Rule::Trapezoid).unwrap();
    let fine = QuadratureGrid::with_step(0.0, 30.0, 0.005, Rule::Trapezoid).unwrap();
    let x_max = pc.truncation(30.0);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let t = pc.sample(2023, k).unwrap();
        let post = pc.posterior(t, &grid).unwrap();
        let b = |th: f64| posterior_bounds(pc.prior_density(th), 1.0, Distance::Finite(1));
        for (&th, &p) in grid.points().iter().zip(&post) {
            let bb = b(th);
            assert!(p >= bb.lower - 1e-4 && p <= bb.upper + 1e-4, "t={t} θ={th}: {p} vs {bb:?}");
            worst = worst.max(bb.lower - p).max(p - bb.upper);
        }
        // the coarse normaliser against a finer grid
        let un = |th: f64| pc.prior_density(th) * pc.likelihood(th, t, x_max);
        let z_coarse = grid.integrate_fn(un);
        let z_fine = fine.integrate_fn(un);
        assert!(close(z_fine / z_coarse, 1.0, 1e-6), "t={t}: {}", z_fine / z_coarse);
        assert!(close(grid.integrate(&post), 1.0, 1e-12));
    }
    format!("10 posteriors within Gamma(3,1)·e^{{±1}} (worst excess {worst:.2e}); normalised within 1e-6")
}

fn criterion_8() -> String {
    let mut g = rng(8);
    for _ in 0..1000 {
        let k = g.random_range(2..=8);
        let o: Vec<usize> = (0..k).collect();
        let mu = FiniteMeasure::probability(o.clone(), random_simplex(k, 0.0, &mut g)).unwrap();
        let nu = FiniteMeasure::probability(o, random_simplex(k, 0.0, &mut g)).unwrap();
        let dm = mult_distance(&mu, &nu).unwrap();
        let delta = density_ratio_metric(&mu, &nu).unwrap();
        assert!(delta <= 2.0 * dm + 1e-12, "{delta} > 2·{dm}");
        if dm > 0.0 {
            assert!(dm < delta, "{dm} !< {delta}");
        }
        let tau = random_tau(k, &mut g);
        let alt = density_ratio_metric_wrt(&mu, &nu, &tau).unwrap();
        assert!(close(delta, alt, 1e-12), "{delta} vs {alt}");
    }
    "1000 pairs: d_Mult < δ <= 2 d_Mult; δ independent of the dominating measure".into()
}

fn criterion_9() -> String {
    let mut lines = Vec::new();
    for n in 1..=4 {
        let u = DataUniverse::binary(n);
        let m = rr(1.0);
        let attackers = sample_product_priors(&u, 1000, 900 + n as u64).unwrap();
        let inst = dp_correspondence_instantiation(&u, attackers, 1.0).unwrap();
        let r = pufferfish_satisfied(&inst, &m, &u).unwrap();
        assert!(r.satisfied && r.max_distance <= 1.0 + 1e-12, "{r:?}");
        let sem = posterior_semantics(&inst, &Partition::by_record(&u, 0).unwrap(), &m, &u).unwrap();
        assert_eq!(sem.odds_violations, 0, "{sem:?}");
        assert_eq!(sem.drn_violations, 0, "{sem:?}");

        let table = MechanismTable::new(&m, &u).unwrap();
        let bound = pufferfish_power_bounds(0.05, 1.0, Distance::Finite(1)).unwrap();
        let mut max_power: f64 = 0.0;
        for theta in &inst.attackers {
            for pair in &inst.pairs {
                let (Ok(a), Ok(b)) = (
                    dp_bounds::pufferfish::condition(theta, &pair.first),
                    dp_bounds::pufferfish::condition(theta, &pair.second),
                ) else {
                    continue;
                };
                let p0 = table.privatised(&a).unwrap();
                let p1 = table.privatised(&b).unwrap();
                let power = np_test(
                    p0.as_discrete().unwrap().weights(),
                    p1.as_discrete().unwrap().weights(),
                    0.05,
                )
                .unwrap()
                .power;
                assert!(power <= 0.05 * E + 1e-12 && bound.contains(power), "power {power}");
                max_power = max_power.max(power);
            }
        }
        let bad = pufferfish_satisfied(&inst, &rr(1.5), &u).unwrap();
        let w = bad.witness.expect("RR(1.5) must violate the budget of 1");
        assert!(w.distance > 1.0);
        let id = pufferfish_satisfied(&inst, &Mechanism::Identity, &u).unwrap();
        assert!(!id.satisfied && id.witness.is_some());
        lines.push(format!(
            "n={n}: max d_Mult {:.4}, max |ln odds| {:.4}, max δ {:.4}, max power {:.4}",
            r.max_distance, sem.max_log_odds_ratio, sem.max_drn, max_power
        ));
    }
    lines.join("; ")
}

fn criterion_10() -> String {
    let mut g = rng(10);
    let (mut acc, mut rej) = (0, 0);
    for _ in 0..200 {
        let u = random_universe(&mut g, 32);
        let k = g.random_range(2..=5);
        let m = if g.random_bool(0.5) {
            random_dp_mechanism(&u, g.random_range(0.1..2.0), k, &mut g)
        } else {
            random_table(&u, k, &mut g)
        };
        let me = min_epsilon(&m, &u).unwrap();
        let eps = if me.is_finite() { me * g.random_range(0.7..1.3) } else { g.random_range(0.1..3.0) };
        let tau = random_tau(k, &mut g);
        let s = [
            dp_statement_i(&m, &u, eps).unwrap(),
            dp_statement_ii(&m, &u, eps).unwrap(),
            dp_statement_iii(&m, &u, eps).unwrap(),
            dp_statement_iv(&m, &u, eps, &tau).unwrap(),
        ];
        assert!(s.iter().all(|&v| v == s[0]), "DP statements disagree: {s:?} (eps {eps}, min {me})");
        if s[0] { acc += 1 } else { rej += 1 }
    }
    assert!(acc > 0 && rej > 0);
    let (mut pacc, mut prej) = (0, 0);
    for _ in 0..200 {
        let u = DataUniverse::binary(g.random_range(1..=3));
        let k = g.random_range(2..=5);
        let m = random_table(&u, k, &mut g);
        let attackers = (0..g.random_range(1..=3)).map(|_| random_attacker(&u, &mut g)).collect();
        let n_pairs = g.random_range(1..=4);
        let pairs = random_pairs(&u, n_pairs, &mut g);
        let probe = PufferfishInstantiation::new(attackers, pairs, f64::INFINITY).unwrap();
        let worst = pufferfish_satisfied(&probe, &m, &u).unwrap().max_distance;
        let eps = if worst.is_finite() && worst > 0.0 {
            worst * g.random_range(0.7..1.3)
        } else {
            g.random_range(0.1..2.0)
        };
        let inst = PufferfishInstantiation { epsilon: eps, ..probe };
        let tau = random_tau(k, &mut g);
        let s = [
            puff_statement_i(&inst, &m, &u).unwrap(),
            puff_statement_ii(&inst, &m, &u).unwrap(),
            puff_statement_iii(&inst, &m, &u).unwrap(),
            puff_statement_iv(&inst, &m, &u, &tau).unwrap(),
        ];
        assert!(s.iter().all(|&v| v == s[0]), "Pufferfish statements disagree: {s:?}");
        assert_eq!(s[0], pufferfish_satisfied(&inst, &m, &u).unwrap().satisfied);
        if s[0] { pacc += 1 } else { prej += 1 }
    }
    assert!(pacc > 0 && prej > 0);
    format!("DP: {acc} accept / {rej} reject; Pufferfish: {pacc} accept / {prej} reject; all agree")
}

fn main() {
    let criteria: [(&str, fn() -> String, Duration); 10] = [
        ("1 Laplace eps-DP", criterion_1, Duration::from_secs(1)),
        ("2 randomized response eps-DP", criterion_2, Duration::from_secs(5)),
        ("3 binary-sum envelope", criterion_3, Duration::from_secs(1)),
        ("4 randomized response marginal bounds", criterion_4, Duration::from_secs(10)),
        ("5 power bound", criterion_5, Duration::from_secs(30)),
        ("6 posterior bound", criterion_6, Duration::from_secs(60)),
        ("7 private count posteriors", criterion_7, Duration::from_secs(60)),
        ("8 metric relations", criterion_8, Duration::from_secs(5)),
        ("9 Pufferfish semantics", criterion_9, Duration::from_secs(120)),
        ("10 statement equivalence", criterion_10, Duration::from_secs(60)),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f, limit) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let took = start.elapsed();
        match outcome {
            Ok(summary) if took <= limit => {
                println!("PASS criterion {name} ({:.2}s): {summary}", took.as_secs_f64());
            }
            Ok(summary) => {
                failed += 1;
                println!(
                    "FAIL criterion {name} ({:.2}s, limit {}s): {summary}",
                    took.as_secs_f64(),
                    limit.as_secs()
                );
            }
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL criterion {name} ({:.2}s): {msg}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
