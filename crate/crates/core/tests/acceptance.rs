//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//! Run with `cargo test -p mpcc-dlt --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{exhaustive_n_min, lp_makespan_for, random_platform};
use mpcc_dlt::constellation::scale_bandwidth;
use mpcc_dlt::harness::experiments::{rt_bandwidth_rows, rt_load_rows, rt_seqfrac_rows, scale_rows, SweepRow};
use mpcc_dlt::harness::{run, ExperimentConfig, ExperimentKind};
use mpcc_dlt::mpcc::{
    allocate, root_share_threshold, solve_case1, solve_case2, Child, DivisibilitySpec, NormalizedPlatform, Regime,
};
use mpcc_dlt::sizing::{effective_contribution, n_min, DeadlineQuery, MinCooperators};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::MIN, f64::max);
    let min = xs.iter().copied().fold(f64::MAX, f64::min);
    (max - min) / max
}

fn closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut worst_sum, mut worst_spread) = (0.0f64, 0.0f64);
    let mut case1 = true;
    for _ in 0..1000 {
        let n = rng.random_range(0..=13);
        let p = random_platform(&mut rng, n);
        let beta = rng.random_range(0.0..=0.5);
        let limit = root_share_threshold(&p, &DivisibilitySpec::new(0.0, beta).unwrap()).min(1.0);
        let f = rng.random_range(0.0..=limit);
        let spec = DivisibilitySpec::new(f, beta).unwrap();
        let a = allocate(&p, &spec).unwrap();
        case1 &= a.regime == Regime::Case1;
        worst_sum = worst_sum.max((a.distributed_total() - (1.0 - f)).abs());
        worst_spread = worst_spread.max(spread(&a.finish_times(&p, &spec)));
    }
    let elapsed = start.elapsed();
    outcome(
        case1 && worst_sum <= 1e-12 && worst_spread <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max |sum-(1-f)| {worst_sum:.2e}, max finish spread {worst_spread:.2e}, {elapsed:.2?}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut worst, mut regimes) = (0.0f64, [0usize; 2]);
    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(1..=3);
        let p = random_platform(&mut rng, n);
        let beta = rng.random_range(0.0..=0.5);
        let f = rng.random_range(0.0..=1.0);
        let a = allocate(&p, &DivisibilitySpec::new(f, beta).unwrap()).unwrap();
        regimes[(a.regime == Regime::Case2) as usize] += 1;
        worst = worst.max(rel(a.t_star, lp_makespan_for(&p, f, beta)));
        done += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && regimes.iter().all(|&c| c > 0) && elapsed < Duration::from_secs(30),
        format!(
            "max rel error {worst:.2e} over {} Case1 / {} Case2, {elapsed:.2?}",
            regimes[0], regimes[1]
        ),
    )
}

fn regime_boundary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut platforms = vec![NormalizedPlatform::from_pairs(1.0, &[(2.0, 1.0), (2.0, 1.0)]).unwrap()];
    let mut betas = vec![1.0];
    for _ in 0..200 {
        let n = rng.random_range(1..=13);
        platforms.push(random_platform(&mut rng, n));
        betas.push(rng.random_range(0.0..=0.5));
    }
    let (mut nonzero, mut worst) = (0, 0.0f64);
    for (p, &beta) in platforms.iter().zip(&betas) {
        let f = root_share_threshold(p, &DivisibilitySpec::new(0.0, beta).unwrap());
        let spec = DivisibilitySpec::new(f, beta).unwrap();
        let c1 = solve_case1(p, &spec).unwrap();
        let c2 = solve_case2(p, &spec).unwrap();
        nonzero += usize::from(c1.alpha0 != 0.0);
        worst = worst.max(rel(c1.t_star, c2.t_star));
    }
    outcome(
        nonzero == 0 && worst <= 1e-12,
        format!(
            "{} instances, alpha_0 != 0 in {nonzero}, max t* disagreement {worst:.2e}",
            platforms.len()
        ),
    )
}

fn case2_hand_instance() -> Outcome {
    let p = NormalizedPlatform::from_pairs(1.0, &[(1.0, 0.0)]).unwrap();
    let a = allocate(&p, &DivisibilitySpec::new(0.9, 0.0).unwrap()).unwrap();
    // 1 - 0.9 is the nearest double to 0.1 reachable from f = 0.9
    let pass = a.regime == Regime::Case2
        && a.alpha0 == 0.0
        && a.alphas == [1.0 - 0.9]
        && (a.alphas[0] - 0.1).abs() <= 1e-15
        && a.t_star == 0.9;
    outcome(
        pass,
        format!("alpha = ({}, {:?}), t* = {:?}", a.alpha0, a.alphas, a.t_star),
    )
}

fn sizing_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut nonpositive = (0, 0);
    for _ in 0..500 {
        let n = rng.random_range(0..=12);
        let p = random_platform(&mut rng, n);
        let beta = rng.random_range(0.0..=0.5);
        let t_req = p.w0() * rng.random_range(0.02..1.5);
        let report = n_min(&DeadlineQuery::new(t_req, p, beta).unwrap());
        let oracle = exhaustive_n_min(&report.contributions, report.delta);
        let got = match report.n_min {
            MinCooperators::Count(k) => Some(k),
            MinCooperators::Infeasible => None,
        };
        mismatches += usize::from(got != oracle);
        if report.delta <= 0.0 {
            nonpositive.0 += 1;
            nonpositive.1 += usize::from(got == Some(0));
        }
    }

    // deadline of 0.6 w0, checked through the sizing CSV
    let config = ExperimentConfig::parse(
        "experiment = sizing\nplatform = sampled\nt_req_factor = 0.6\noutput = sizing.csv\n",
        "sizing",
    )
    .unwrap();
    let tables = run(&config).unwrap();
    let csv = tables[0].1.render();
    let rows: Vec<(usize, bool)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].parse().unwrap(), cells[3] == "1")
        })
        .collect();
    let platform = mpcc_dlt::harness::PlatformModel::resolve(&config.platform)
        .unwrap()
        .for_ci(config.ci)
        .unwrap();
    let expected = n_min(&DeadlineQuery::new(0.6 * platform.w0(), platform, config.beta).unwrap()).n_min;
    let flip_ok = match expected {
        MinCooperators::Count(k) => rows.iter().all(|&(n, feasible)| feasible == (n >= k)),
        MinCooperators::Infeasible => false,
    };
    outcome(
        mismatches == 0 && nonpositive.0 == nonpositive.1 && nonpositive.0 > 0 && flip_ok,
        format!(
            "500 queries, {mismatches} mismatches; delta<=0 -> 0 in {}/{}; CSV flips at n_min = {expected}: {flip_ok}",
            nonpositive.1, nonpositive.0
        ),
    )
}

fn linearity() -> Outcome {
    let config = ExperimentConfig::parse(
        "experiment = scale\nload_multipliers = 1, 2, 4, 8\noutput = scale.csv\n",
        "scale",
    )
    .unwrap();
    let rows = scale_rows(&config).unwrap();
    let mut exact = true;
    for class in rows.chunks(4) {
        for (c, r) in [2.0, 4.0, 8.0].iter().zip(&class[1..]) {
            exact &= r.load == c * class[0].load && r.makespan == c * class[0].makespan;
            // exact collinearity with the origin
            exact &= r.makespan * class[0].load == class[0].makespan * r.load;
        }
    }
    // least-squares through-origin residual of the CSV column, per class
    let csv = run(&config).unwrap()[0].1.render();
    let mut worst = 0.0f64;
    let mut classes: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for line in csv.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let point = (c[1].parse::<f64>().unwrap(), c[3].parse::<f64>().unwrap());
        match classes.iter_mut().find(|(n, _)| n == c[0]) {
            Some((_, pts)) => pts.push(point),
            None => classes.push((c[0].to_string(), vec![point])),
        }
    }
    for (_, pts) in &classes {
        let k = pts.iter().map(|(l, m)| l * m).sum::<f64>() / pts.iter().map(|(l, _)| l * l).sum::<f64>();
        for (l, m) in pts {
            worst = worst.max((m - k * l).abs() / m);
        }
    }
    outcome(
        exact && worst <= 5e-6,
        format!("f64 rows exactly proportional: {exact}; CSV fit residual {worst:.1e} (6-digit output)"),
    )
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = [0usize; 3];
    for _ in 0..1000 {
        let n = rng.random_range(0..=12);
        let p = random_platform(&mut rng, n);
        let beta = rng.random_range(0.0..=0.5);
        let spec = DivisibilitySpec::new(0.0, beta).unwrap();
        let mut bigger = p.clone();
        bigger.push_child(Child::new(rng.random_range(0.02..0.08), rng.random_range(0.01..0.06)).unwrap());
        if allocate(&bigger, &spec).unwrap().t_star >= allocate(&p, &spec).unwrap().t_star {
            violations[0] += 1;
        }
    }
    for _ in 0..1000 {
        let (w, z) = (rng.random_range(0.02..0.08), rng.random_range(0.01..0.06));
        let b1 = rng.random_range(0.0..0.5);
        let b2 = rng.random_range(b1..=1.0);
        if b2 > b1 && effective_contribution(w, z, b2).unwrap() >= effective_contribution(w, z, b1).unwrap() {
            violations[1] += 1;
        }
    }
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let p = random_platform(&mut rng, n);
        let spec = DivisibilitySpec::new(0.0, rng.random_range(0.0..=0.5)).unwrap();
        let factor = rng.random_range(1.0..8.0f64).max(1.0 + 1e-9);
        let faster = scale_bandwidth(&p, factor).unwrap();
        if allocate(&faster, &spec).unwrap().t_star >= allocate(&p, &spec).unwrap().t_star {
            violations[2] += 1;
        }
    }
    outcome(
        violations == [0, 0, 0],
        format!(
            "violations: add child {}, beta {}, bandwidth {}",
            violations[0], violations[1], violations[2]
        ),
    )
}

fn rt_config(kind: ExperimentKind) -> ExperimentConfig {
    // defaults: 12 neighbors, w in [0.02, 0.08], z in [0.01, 0.06], slack 0.5,
    // 20 seeds, 10,000 arrivals per run
    ExperimentConfig::parse(&format!("experiment = {kind}\noutput = {kind}.csv\n"), kind.as_str()).unwrap()
}

fn curve<'a>(rows: &'a [SweepRow], class: &str) -> Vec<&'a SweepRow> {
    rows.iter().filter(|r| r.class == class).collect()
}

fn means(rows: &[&SweepRow]) -> String {
    rows.iter()
        .map(|r| format!("{:.4}", r.mean_blocking))
        .collect::<Vec<_>>()
        .join(" ")
}

fn rt_load() -> Outcome {
    let start = Instant::now();
    let config = rt_config(ExperimentKind::RtLoad);
    let rows = rt_load_rows(&config, &mut None).unwrap();
    let elapsed = start.elapsed();
    let mut pass = config.seeds.len() >= 20 && config.arrivals >= 10_000 && elapsed < Duration::from_secs(300);
    let mut detail = Vec::new();
    for class in ["A", "B", "C", "D"] {
        let c = curve(&rows, class);
        let (lo, hi) = (c[0], c[c.len() - 1]);
        let separated = hi.mean_blocking - hi.ci95 > lo.mean_blocking + lo.ci95;
        let monotone = c.windows(2).all(|w| w[1].mean_blocking >= w[0].mean_blocking);
        pass &= separated && monotone && c.len() == 3;
        detail.push(format!("{class}: {}", means(&c)));
    }
    outcome(pass, format!("{}; {elapsed:.1?}", detail.join(", ")))
}

fn rt_seqfrac() -> Outcome {
    let rows = rt_seqfrac_rows(&rt_config(ExperimentKind::RtSeqfrac), &mut None).unwrap();
    let (a, d) = (curve(&rows, "A"), curve(&rows, "D"));
    let monotone = |c: &[&SweepRow]| c.windows(2).all(|w| w[1].mean_blocking >= w[0].mean_blocking);
    let d_above = a.iter().zip(&d).all(|(a, d)| d.mean_blocking >= a.mean_blocking);
    let identical = a.iter().zip(&d).all(|(a, d)| a.mean_blocking == d.mean_blocking);
    outcome(
        a.len() == 7 && monotone(&a) && monotone(&d) && d_above,
        format!(
            "A: {}; D: {}{}",
            means(&a),
            means(&d),
            if identical { " (D == A at every f)" } else { "" }
        ),
    )
}

fn rt_bandwidth() -> Outcome {
    let rows = rt_bandwidth_rows(&rt_config(ExperimentKind::RtBandwidth), &mut None).unwrap();
    let (b, c) = (curve(&rows, "B"), curve(&rows, "C"));
    let nonincreasing = |c: &[&SweepRow]| c.windows(2).all(|w| w[1].mean_blocking <= w[0].mean_blocking);
    let drop = |c: &[&SweepRow]| c[0].mean_blocking - c[c.len() - 1].mean_blocking;
    let flat = drop(&b) == 0.0 && drop(&c) == 0.0;
    outcome(
        b.len() == 4 && nonincreasing(&b) && nonincreasing(&c) && drop(&c) >= drop(&b),
        format!(
            "B: {} (drop {:.4}); C: {} (drop {:.4}){}",
            means(&b),
            drop(&b),
            means(&c),
            drop(&c),
            if flat { " (both curves flat)" } else { "" }
        ),
    )
}

fn determinism() -> Outcome {
    let small = "seeds = 1..=4\narrivals = 2000\n";
    let mut differing = Vec::new();
    for kind in ExperimentKind::ALL {
        let extra = if kind.is_real_time() { small } else { "" };
        let text = format!("experiment = {kind}\n{extra}output = {kind}.csv\n");
        let config = ExperimentConfig::parse(&text, kind.as_str()).unwrap();
        let render = || {
            run(&config)
                .unwrap()
                .iter()
                .map(|(_, t)| t.render())
                .collect::<Vec<_>>()
        };
        if render() != render() {
            differing.push(kind.as_str());
        }
    }
    outcome(
        differing.is_empty(),
        format!("6 experiments run twice, differing: {differing:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 11] = [
        ("closed-form conservation and equal finish", closed_form),
        ("equivalence with LP oracle", oracle_equivalence),
        ("regime boundary", regime_boundary),
        ("root-saturated hand instance", case2_hand_instance),
        ("minimum cooperators", sizing_correctness),
        ("makespan linear in task size", linearity),
        ("monotonicity suite", monotonicity),
        ("blocking rises with offered load", rt_load),
        ("blocking against sequential fraction", rt_seqfrac),
        ("blocking against ISL bandwidth", rt_bandwidth),
        ("byte-identical reruns", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
