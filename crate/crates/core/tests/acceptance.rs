//! Acceptance criteria, each printed as one PASS/FAIL line. Exits non-zero when any fails.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use cwr_core::density::{closed_form_histogram, monte_carlo_histogram};
use cwr_core::experiments::{
    estimate, run_sweep, ConvergenceReport, ExperimentConfig, Generator, GridPolicy, PointSource,
};
use cwr_core::field::{epsilon_mask, GridSpec};
use cwr_core::geometry::{clip_voronoi, PointSet, Polygon};
use cwr_core::spectrum::RadialBand;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    Outcome {
        pass: parts.iter().all(|p| p.pass),
        detail: parts
            .iter()
            .map(|p| format!("[{}] {}", if p.pass { "ok" } else { "x" }, p.detail))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn points(generator: Generator, seed: u64) -> PointSet {
    generator.generate(&Polygon::unit_square(), seed).unwrap()
}

fn sweep(
    generator: Generator,
    seed: u64,
    taus: &[f64],
    bins: usize,
    origin: f64,
) -> ConvergenceReport {
    run_sweep(&ExperimentConfig {
        points: PointSource::generated(generator, seed),
        taus: taus.to_vec(),
        bins,
        bin_origin: origin,
        epsilon: 0.05,
        delta: 0.1,
        grid: GridPolicy::SamplingRule { oversample: 4.0 },
        pad_factor: 2,
        mc_samples: 10_000,
        ..ExperimentConfig::default()
    })
    .unwrap()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

/// Total spectral mass is 1 for every generated configuration at 512^2, pad 2.
fn ac1() -> Outcome {
    let grid = GridSpec::covering(&Polygon::unit_square(), 512).unwrap();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for k in [1, 2, 8] {
        for seed in 1..=5 {
            let ps = points(Generator::Uniform(k), seed);
            let diagram = clip_voronoi(&ps).unwrap();
            let est = estimate(&ps, &diagram, &grid, 0.05, 0.02, 2, false).unwrap();
            worst = worst.max((est.spectrum.total_mass() - 1.0).abs());
            cases += 1;
        }
    }
    check(
        worst <= 1e-9,
        format!("{cases} cases, max |mass - 1| = {worst:.2e} (tol 1e-9)"),
    )
}

/// Closed form sums to 1 and matches 10^6-sample Monte Carlo within L1 0.01 at B = 32.
fn ac2() -> Outcome {
    let configs = [
        ("single-center", Generator::SingleCenter, 0),
        ("two-sites", Generator::TwoSites, 0),
        ("uniform-5/3", Generator::Uniform(5), 3),
        ("uniform-8/7", Generator::Uniform(8), 7),
    ];
    let parts = configs
        .iter()
        .map(|&(name, g, seed)| {
            let ps = points(g, seed);
            let cf = closed_form_histogram(&clip_voronoi(&ps).unwrap(), 32, 0.0).unwrap();
            let mc = monte_carlo_histogram(&ps, 1_000_000, 32, 0.0, 1).unwrap();
            let l1 = cf.l1_distance(&mc).unwrap();
            let sum_err = (cf.total() - 1.0).abs();
            check(
                l1 <= 0.01 && sum_err <= 1e-6,
                format!("{name}: L1 = {l1:.4}, |sum - 1| = {sum_err:.1e}"),
            )
        })
        .collect();
    all(parts)
}

/// Off-circle probes decay across tau and end below a third of their first value.
fn ac3() -> Outcome {
    let ps = points(Generator::SingleCenter, 0);
    let diagram = clip_voronoi(&ps).unwrap();
    let grid = GridSpec::covering(ps.domain(), 1024).unwrap();
    let taus = [0.1, 0.05, 0.02];
    let mut probes = [Vec::new(), Vec::new()];
    for &tau in &taus {
        let est = estimate(&ps, &diagram, &grid, 0.05, tau, 2, false).unwrap();
        for (k, r) in [0.5, 1.5].into_iter().enumerate() {
            probes[k].push(est.spectrum.probe_magnitude(r, 0.0).unwrap());
        }
    }
    let parts = [0.5, 1.5]
        .iter()
        .zip(&probes)
        .map(|(r, p)| {
            let ratio = p[2] / p[0];
            check(
                strictly_decreasing(p) && ratio < 1.0 / 3.0,
                format!(
                    "r={r}: |F| = {}, final/initial = {ratio:.3} (need < 0.333)",
                    fmt(p)
                ),
            )
        })
        .collect();
    all(parts)
}

/// Annulus mass increases over the schedule and reaches 0.9 at tau = 0.02.
fn ac4(reports: &[(&str, ConvergenceReport)]) -> Outcome {
    let parts = reports
        .iter()
        .flat_map(|(name, rep)| {
            let ann: Vec<f64> = rep.rows.iter().map(|r| r.annulus_mass).collect();
            let off = rep.rows.last().unwrap().off_annulus_mass;
            let last = *ann.last().unwrap();
            [
                check(
                    ann.windows(2).all(|w| w[1] > w[0]),
                    format!("{name}: annulus mass increasing {}", fmt(&ann)),
                ),
                check(
                    last >= 0.9,
                    format!("{name}: annulus mass at tau=0.02 = {last:.4} (need >= 0.9)"),
                ),
                check(
                    off <= 0.1,
                    format!("{name}: off-annulus mass = {off:.4} (need <= 0.1)"),
                ),
            ]
        })
        .collect();
    all(parts)
}

/// B = 32 annulus histogram approaches the closed form over tau halvings.
fn ac5(halvings: &[(&str, ConvergenceReport)], quarters: &ConvergenceReport) -> Outcome {
    let mut parts: Vec<Outcome> = halvings
        .iter()
        .flat_map(|(name, rep)| {
            let l1: Vec<f64> = rep.rows.iter().map(|r| r.l1_closed).collect();
            let drops = l1.windows(2).filter(|w| w[1] < w[0]).count();
            let last = *l1.last().unwrap();
            [
                check(
                    drops >= 2,
                    format!("{name}: L1 {} drops in {drops}/3 halvings", fmt(&l1)),
                ),
                check(
                    last <= 0.1,
                    format!("{name}: L1 at tau=0.02 = {last:.4} (need <= 0.1)"),
                ),
            ]
        })
        .collect();
    let q = quarters.rows.last().unwrap().spectral.masses().to_vec();
    parts.push(check(
        q.iter().all(|m| (m - 0.25).abs() <= 0.02),
        format!("single B=4 quarters {} (need 0.25 +- 0.02)", fmt(&q)),
    ));
    all(parts)
}

/// Integrating over every radius changes each bin by less than 0.02.
fn ac6(halvings: &[(&str, ConvergenceReport)], quarters: &ConvergenceReport) -> Outcome {
    let max_diff = |rep: &ConvergenceReport| {
        let row = rep.rows.last().unwrap();
        row.spectral
            .masses()
            .iter()
            .zip(row.spectral_full.masses())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
    };
    let mut parts: Vec<Outcome> = halvings
        .iter()
        .map(|(name, rep)| {
            let d = max_diff(rep);
            check(
                d < 0.02,
                format!("{name} B=32: max bin change {d:.4} (need < 0.02)"),
            )
        })
        .collect();
    let d = max_diff(quarters);
    parts.push(check(
        d < 0.02,
        format!("single B=4: max bin change {d:.4} (need < 0.02)"),
    ));
    all(parts)
}

/// Discrete mask area over domain area is 1 - 2 eps within 0.01 at 512^2, error halving at 1024^2.
fn ac7() -> Outcome {
    let mut parts = Vec::new();
    for (name, g, seed) in [
        ("single", Generator::SingleCenter, 0),
        ("uniform-8/7", Generator::Uniform(8), 7),
    ] {
        let ps = points(g, seed);
        let diagram = clip_voronoi(&ps).unwrap();
        let area = ps.domain().area();
        for eps in [0.05, 0.1, 0.25] {
            let err = |pixels: usize| {
                let grid = GridSpec::covering(ps.domain(), pixels).unwrap();
                let mask = epsilon_mask(&grid, &ps, &diagram, eps).unwrap();
                (mask.area / area - (1.0 - 2.0 * eps)).abs()
            };
            let (e512, e1024) = (err(512), err(1024));
            parts.push(check(
                e512 <= 0.01,
                format!("{name} eps={eps}: |err| at 512 = {e512:.2e}"),
            ));
            parts.push(check(
                e1024 == 0.0 || e1024 <= 0.5 * e512,
                if e512 == 0.0 {
                    format!("{name} eps={eps}: |err| at 1024 = {e1024:.2e}")
                } else {
                    format!("{name} eps={eps}: 1024/512 error ratio {:.2}", e1024 / e512)
                },
            ));
        }
    }
    all(parts)
}

/// Single-thread estimate time against pixel count has log-log slope in [0.9, 1.3].
fn ac8() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let ps = points(Generator::Uniform(8), 7);
    let diagram = clip_voronoi(&ps).unwrap();
    let sizes = [256usize, 512, 1024];
    let times: Vec<f64> = pool.install(|| {
        sizes
            .iter()
            .map(|&n| {
                let grid = GridSpec::covering(ps.domain(), n).unwrap();
                (0..5)
                    .map(|_| {
                        let start = Instant::now();
                        let est = estimate(&ps, &diagram, &grid, 0.05, 0.02, 2, false).unwrap();
                        est.spectrum
                            .orientation_histogram(RadialBand::Annulus { delta: 0.1 }, 32, 0.0)
                            .unwrap();
                        start.elapsed().as_secs_f64()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    });
    let xs: Vec<f64> = sizes.iter().map(|&n| ((n * n) as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    check(
        (0.9..=1.3).contains(&slope),
        format!("times {} s, slope {slope:.3} (need 0.9..1.3)", fmt(&times)),
    )
}

/// Repeated sweeps write byte-identical files, with 1 and 4 worker threads.
fn ac9() -> Outcome {
    let config = ExperimentConfig {
        points: PointSource::generated(Generator::Uniform(8), 7),
        taus: vec![0.1, 0.05, 0.02],
        ..ExperimentConfig::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = pool.install(|| run_sweep(&config).unwrap().write(dir.path()).unwrap());
        files
            .into_iter()
            .filter(|f| f.ends_with(".csv"))
            .map(|f| {
                let bytes = std::fs::read(dir.path().join(&f)).unwrap();
                (f, bytes)
            })
            .collect::<Vec<_>>()
    };
    let a = run(4);
    let b = run(4);
    let c = run(1);
    check(
        a == b && a == c,
        format!(
            "{} CSV files compared across two 4-thread runs and one 1-thread run",
            a.len()
        ),
    )
}

fn main() {
    let mut outcomes: Vec<(&str, &str, Outcome)> = Vec::new();
    let mut record = |id: &'static str, name: &'static str, o: Outcome| {
        println!(
            "{id} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        outcomes.push((id, name, o));
    };

    record("AC1", "spectral normalization", ac1());
    record("AC2", "closed form vs Monte Carlo", ac2());
    record("AC3", "off-circle probes decay", ac3());

    let schedule = [0.1, 0.05, 0.02];
    let concentration = [
        (
            "single",
            sweep(Generator::SingleCenter, 0, &schedule, 32, 0.0),
        ),
        (
            "uniform-8/7",
            sweep(Generator::Uniform(8), 7, &schedule, 32, 0.0),
        ),
    ];
    record("AC4", "annulus concentration", ac4(&concentration));

    let halving = [0.16, 0.08, 0.04, 0.02];
    let halvings = [
        (
            "single",
            sweep(Generator::SingleCenter, 0, &halving, 32, 0.0),
        ),
        (
            "uniform-8/7",
            sweep(Generator::Uniform(8), 7, &halving, 32, 0.0),
        ),
    ];
    let quarters = sweep(Generator::SingleCenter, 0, &[0.02], 4, -FRAC_PI_4);
    record(
        "AC5",
        "spectral histogram vs closed form",
        ac5(&halvings, &quarters),
    );
    record("AC6", "full-radial vs annulus", ac6(&halvings, &quarters));
    record("AC7", "epsilon mask area", ac7());
    record("AC8", "estimate complexity", ac8());
    record("AC9", "determinism", ac9());

    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.2.pass).map(|o| o.0).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        outcomes.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
