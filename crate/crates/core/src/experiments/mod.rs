//! Tau sweeps comparing the spectral estimate against the closed form and the
//! Monte-Carlo oracle.

mod config;
mod generators;
pub mod svg;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, GridPolicy, PointSource};
pub use generators::Generator;

use crate::density::{
    closed_form_histogram, monte_carlo_histogram, OrientationHistogram, CSV_HEADER,
};
use crate::error::{Error, Result};
use crate::field::{build_cwr, epsilon_mask, sample_distance, GridSpec, SupportMask};
use crate::geometry::{clip_voronoi, PointSet, VoronoiDiagram};
use crate::spectrum::{power_spectrum, RadialBand, Spectrum};

pub const REPORT_CSV_HEADER: &str =
    "tau,h,annulus_mass,off_annulus_mass,l1_closed,sup_closed,probe_r0.5,probe_r1.5,runtime_s";

/// Probe radii recorded per row, both at angle 0.
pub const PROBE_RADII: [f64; 2] = [0.5, 1.5];

/// Everything one spectral estimate produces.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub grid: GridSpec,
    pub mask: SupportMask,
    pub spectrum: Spectrum,
}

/// Grid, distance field, mask, wave field and spectrum for one `tau`. Errors carry `tau`.
pub fn estimate(
    points: &PointSet,
    diagram: &VoronoiDiagram,
    grid: &GridSpec,
    epsilon: f64,
    tau: f64,
    pad_factor: usize,
    force: bool,
) -> Result<Estimate> {
    let run = || -> Result<Estimate> {
        let field = sample_distance(grid, points);
        let mask = epsilon_mask(grid, points, diagram, epsilon)?;
        let wave = build_cwr(&field, &mask, tau, force)?;
        let mut spectrum = power_spectrum(&wave, &mask, pad_factor)?;
        spectrum.epsilon = epsilon;
        Ok(Estimate {
            grid: *grid,
            mask,
            spectrum,
        })
    };
    run().map_err(|e| e.at_tau(tau))
}

/// `sum_b |a_b - b_b|`.
pub fn l1_distance(a: &OrientationHistogram, b: &OrientationHistogram) -> Result<f64> {
    a.l1_distance(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Least-squares slope of `ln(error)` against `ln(tau)`.
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Fits `ln(err) = exponent * ln(tau) + intercept` over `(tau, err)` pairs.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 rows to fit a decay, got {}",
            points.len()
        )));
    }
    if let Some(&(t, e)) = points
        .iter()
        .find(|(t, e)| !(t.is_finite() && e.is_finite() && *t > 0.0 && *e > 0.0))
    {
        return Err(Error::InsufficientData(format!(
            "decay fit needs positive finite values, got tau={t}, error={e}"
        )));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|(t, e)| (t.ln(), e.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all tau values are equal".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - exponent * p.0 - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        exponent,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub support_area: f64,
    pub annulus_mass: f64,
    pub off_annulus_mass: f64,
    /// L1 distance between the annulus histogram and the closed form.
    pub l1_closed: f64,
    pub sup_closed: f64,
    /// `|F|` at radius 0.5 and 1.5, angle 0; `None` when outside the lattice.
    pub probes: [Option<f64>; 2],
    pub runtime_s: Option<f64>,
    pub spectral: OrientationHistogram,
    /// Histogram with every radius included.
    pub spectral_full: OrientationHistogram,
    pub l1_full: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub points: PointSet,
    pub closed_form: OrientationHistogram,
    pub monte_carlo: OrientationHistogram,
    /// L1 distance between the closed form and the Monte-Carlo oracle.
    pub l1_closed_vs_mc: f64,
    pub rows: Vec<SweepRow>,
    /// Descriptive fit of `l1_closed` against `tau`; absent when it cannot be fitted.
    pub decay: Option<DecayFit>,
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let points = config.points.resolve()?;
    config.check_sampling(points.domain())?;
    let diagram = clip_voronoi(&points)?;
    let closed_form = closed_form_histogram(&diagram, config.bins, config.bin_origin)?;
    let monte_carlo = monte_carlo_histogram(
        &points,
        config.mc_samples,
        config.bins,
        config.bin_origin,
        config.mc_seed,
    )?;
    let l1_closed_vs_mc = closed_form.l1_distance(&monte_carlo)?;

    let mut rows = Vec::with_capacity(config.taus.len());
    for &tau in &config.taus {
        let start = Instant::now();
        let row =
            sweep_row(config, &points, &diagram, &closed_form, tau).map_err(|e| e.at_tau(tau))?;
        let elapsed = start.elapsed().as_secs_f64();
        rows.push(SweepRow {
            runtime_s: config.record_runtime.then_some(elapsed),
            ..row
        });
    }
    let fit_points: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau, r.l1_closed)).collect();
    let decay = fit_decay(&fit_points).ok();
    Ok(ConvergenceReport {
        config: config.clone(),
        points,
        closed_form,
        monte_carlo,
        l1_closed_vs_mc,
        rows,
        decay,
    })
}

fn sweep_row(
    config: &ExperimentConfig,
    points: &PointSet,
    diagram: &VoronoiDiagram,
    closed_form: &OrientationHistogram,
    tau: f64,
) -> Result<SweepRow> {
    let grid = config.grid.grid_for(points.domain(), tau)?;
    let est = estimate(
        points,
        diagram,
        &grid,
        config.epsilon,
        tau,
        config.pad_factor,
        config.force,
    )?;
    let spectrum = &est.spectrum;
    let band = RadialBand::Annulus {
        delta: config.delta,
    };
    let spectral = spectrum.orientation_histogram(band, config.bins, config.bin_origin)?;
    let spectral_full =
        spectrum.orientation_histogram(RadialBand::AllRadii, config.bins, config.bin_origin)?;
    let annulus_mass = spectral.total();
    let total = spectrum.total_mass();
    let probes = PROBE_RADII.map(|r| spectrum.probe_magnitude(r, 0.0).ok());
    Ok(SweepRow {
        tau,
        h: grid.h,
        nx: grid.nx,
        ny: grid.ny,
        support_area: est.mask.area,
        annulus_mass,
        off_annulus_mass: total - annulus_mass,
        l1_closed: spectral.l1_distance(closed_form)?,
        sup_closed: spectral.sup_distance(closed_form)?,
        probes,
        runtime_s: None,
        l1_full: spectral_full.l1_distance(closed_form)?,
        spectral,
        spectral_full,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.tau,
                r.h,
                r.annulus_mass,
                r.off_annulus_mass,
                r.l1_closed,
                r.sup_closed,
                opt(r.probes[0]),
                opt(r.probes[1]),
                opt(r.runtime_s)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes the report CSV/JSON, every histogram as CSV and the SVG plots into `dir`.
    /// Returns the written file names in order.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<(String, String)> = vec![
            ("report.csv".into(), self.to_csv()),
            ("report.json".into(), self.to_json()?),
            ("closed_form.csv".into(), self.closed_form.to_csv()),
            ("monte_carlo.csv".into(), self.monte_carlo.to_csv()),
        ];
        for r in &self.rows {
            files.push((format!("spectral_tau{}.csv", r.tau), r.spectral.to_csv()));
            files.push((
                format!("spectral_full_tau{}.csv", r.tau),
                r.spectral_full.to_csv(),
            ));
        }
        files.extend(self.plots());
        for (name, body) in &files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(files.into_iter().map(|(n, _)| n).collect())
    }

    fn plots(&self) -> Vec<(String, String)> {
        use svg::{line_plot, Axes, Series};
        let l1 = line_plot(
            "L1 distance to closed form",
            "tau",
            "L1",
            Axes {
                log_x: true,
                log_y: true,
            },
            &[
                Series {
                    label: "annulus",
                    points: self.rows.iter().map(|r| (r.tau, r.l1_closed)).collect(),
                },
                Series {
                    label: "all radii",
                    points: self.rows.iter().map(|r| (r.tau, r.l1_full)).collect(),
                },
            ],
        );
        let annulus = line_plot(
            "Annulus mass",
            "tau",
            "mass",
            Axes {
                log_x: true,
                log_y: false,
            },
            &[Series {
                label: "annulus",
                points: self.rows.iter().map(|r| (r.tau, r.annulus_mass)).collect(),
            }],
        );
        let mut out = vec![
            ("l1_vs_tau.svg".to_string(), l1),
            ("annulus_mass_vs_tau.svg".to_string(), annulus),
        ];
        if let Some(last) = self.rows.last() {
            let centers = |h: &OrientationHistogram| -> Vec<(f64, f64)> {
                let density = 1.0 / h.bin_width();
                (0..h.bin_count())
                    .map(|b| {
                        let (lo, hi) = h.bin_edges(b);
                        (0.5 * (lo + hi), h.masses()[b] * density)
                    })
                    .collect()
            };
            let title = format!("Orientation density at tau = {}", last.tau);
            out.push((
                "histograms.svg".to_string(),
                line_plot(
                    &title,
                    "angle",
                    "mass / bin width",
                    Axes::default(),
                    &[
                        Series {
                            label: "spectral",
                            points: centers(&last.spectral),
                        },
                        Series {
                            label: "closed form",
                            points: centers(&self.closed_form),
                        },
                        Series {
                            label: "Monte Carlo",
                            points: centers(&self.monte_carlo),
                        },
                    ],
                ),
            ));
        }
        out
    }
}

/// Header shared by every histogram CSV file.
pub fn histogram_csv_header() -> &'static str {
    CSV_HEADER
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Source;
    use proptest::prelude::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            points: PointSource::generated(Generator::Uniform(3), 2),
            taus: vec![0.16, 0.08, 0.04],
            mc_samples: 20_000,
            bins: 8,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn decay_of_exact_power_laws() {
        let taus: [f64; 4] = [0.1, 0.05, 0.02, 0.01];
        let linear: Vec<_> = taus.iter().map(|&t| (t, t)).collect();
        let root: Vec<_> = taus.iter().map(|&t| (t, 3.0 * t.sqrt())).collect();
        let a = fit_decay(&linear).unwrap();
        let b = fit_decay(&root).unwrap();
        assert!((a.exponent - 1.0).abs() < 1e-9);
        assert!((b.exponent - 0.5).abs() < 1e-9);
        assert!((b.intercept - 3f64.ln()).abs() < 1e-9);
        assert!(a.residual < 1e-12);
    }

    #[test]
    fn decay_needs_three_positive_rows() {
        assert!(matches!(
            fit_decay(&[(0.1, 0.1), (0.05, 0.05)]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            fit_decay(&[(0.1, 0.1), (0.05, 0.0), (0.02, 0.01)]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn l1_examples() {
        let mut unit = vec![0.0; 6];
        unit[0] = 1.0;
        let a = OrientationHistogram::new(0.0, unit.clone(), Source::ClosedForm).unwrap();
        unit.swap(0, 1);
        let b = OrientationHistogram::new(0.0, unit, Source::Spectral).unwrap();
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(l1_distance(&a, &b).unwrap(), 2.0);
        let c = OrientationHistogram::new(0.0, vec![0.5; 2], Source::Spectral).unwrap();
        assert!(matches!(l1_distance(&a, &c), Err(Error::BinMismatch(_))));
    }

    #[test]
    fn sweep_rows_account_for_all_mass() {
        let report = run_sweep(&small_config()).unwrap();
        assert_eq!(report.rows.len(), 3);
        for r in &report.rows {
            assert!(
                (r.annulus_mass + r.off_annulus_mass - 1.0).abs() < 1e-9,
                "{r:?}"
            );
            assert!((r.spectral_full.total() - 1.0).abs() < 1e-9);
            assert!(r.runtime_s.is_none());
            assert!(r.h <= crate::field::max_spacing(r.tau) * (1.0 + 1e-12));
        }
        assert!(report.rows.windows(2).all(|w| w[0].tau > w[1].tau));
    }

    #[test]
    fn oracle_triangle_inequality() {
        let report = run_sweep(&small_config()).unwrap();
        for r in &report.rows {
            let to_mc = l1_distance(&r.spectral, &report.monte_carlo).unwrap();
            assert!(to_mc <= r.l1_closed + report.l1_closed_vs_mc + 1e-12);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let config = small_config();
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn csv_layout() {
        let report = run_sweep(&small_config()).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(REPORT_CSV_HEADER));
        for line in lines {
            assert_eq!(line.split(',').count(), 9);
            assert!(
                line.ends_with(','),
                "runtime column should be blank: {line}"
            );
        }
    }

    #[test]
    fn timings_fill_runtime_column() {
        let config = ExperimentConfig {
            record_runtime: true,
            taus: vec![0.1],
            ..small_config()
        };
        let report = run_sweep(&config).unwrap();
        assert!(report.rows[0].runtime_s.unwrap() > 0.0);
    }

    #[test]
    fn errors_name_the_offending_tau() {
        let config = ExperimentConfig {
            taus: vec![0.1, 0.05],
            epsilon: 0.4999,
            points: PointSource::generated(Generator::SingleCenter, 0),
            ..small_config()
        };
        match run_sweep(&config) {
            Err(Error::AtTau { tau, source }) => {
                assert_eq!(tau, 0.1);
                assert_eq!(source.kind(), "EmptySupport");
            }
            other => panic!("expected an annotated error, got {other:?}"),
        }
    }

    #[test]
    fn writes_all_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_sweep(&small_config()).unwrap();
        let files = report.write(dir.path()).unwrap();
        for f in &files {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        assert!(files.contains(&"histograms.svg".to_string()));
        let cf = std::fs::read_to_string(dir.path().join("closed_form.csv")).unwrap();
        assert_eq!(cf.lines().next(), Some(histogram_csv_header()));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(json["config"]["bins"], 8);
        assert_eq!(json["rows"].as_array().unwrap().len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fit_recovers_any_power_law(p in 0.1f64..3.0, c in 0.01f64..10.0) {
            let rows: Vec<_> = [0.2, 0.1, 0.05, 0.025]
                .iter()
                .map(|&t: &f64| (t, c * t.powf(p)))
                .collect();
            let fit = fit_decay(&rows).unwrap();
            prop_assert!((fit.exponent - p).abs() < 1e-9);
        }
    }
}
