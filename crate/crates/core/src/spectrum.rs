//! Normalized power spectrum of the wave field and its polar accumulations.
//!
//! The transform kernel is `exp(-i(ux + vy)/tau)`, so the frequency coordinate `u` is
//! `tau` times the ordinary angular frequency. On a padded lattice of `N` pixels of size
//! `h`, DFT index `k` therefore sits at `u = 2 pi tau k / (N h)`. Transform values are
//! scaled by `h^2 / (2 pi tau sqrt(L_eps))` with `L_eps = h^2 * support count`, which
//! makes `sum(power) du dv` equal 1 by the discrete Parseval identity.
//!
//! Polar integrals `int int P r dr domega` are evaluated by summing `power * du * dv` over
//! lattice cells whose centers fall in the polar region; `du dv` is the Cartesian form of
//! the polar area element, so no resampling is involved.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::density::{bin_index, OrientationHistogram, Source};
use crate::error::{Error, Result};
use crate::field::{write_dump, SupportMask, WaveField};
use crate::geometry::normalize_angle;

/// Annulus half-width used to vet the representable frequency range.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Radial extent of a polar accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialBand {
    /// `1 - delta <= r <= 1 + delta`.
    Annulus { delta: f64 },
    /// Every radius, the whole lattice.
    AllRadii,
}

impl RadialBand {
    fn contains(self, r: f64) -> bool {
        match self {
            RadialBand::Annulus { delta } => (1.0 - delta..=1.0 + delta).contains(&r),
            RadialBand::AllRadii => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `power[[a, b]]` is the normalized power at `(u_axis[a], v_axis[b])`.
    pub power: Array2<f64>,
    pub u_axis: Vec<f64>,
    pub v_axis: Vec<f64>,
    pub du: f64,
    pub dv: f64,
    pub tau: f64,
    pub epsilon: f64,
    /// Largest representable radius along the axes, `pi tau / h`.
    pub max_radius: f64,
}

/// Centered signed frequency indices `-n/2 .. n - n/2`, in ascending order.
fn signed_index(a: usize, n: usize) -> isize {
    a as isize - (n / 2) as isize
}

fn fft_axis1_par(data: &mut Array2<Complex64>, planner: &mut FftPlanner<f64>) {
    let n = data.ncols();
    let fft = planner.plan_fft_forward(n);
    let scratch_len = fft.get_inplace_scratch_len();
    data.axis_iter_mut(Axis(0)).into_par_iter().for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, mut row| {
            let slice = row.as_slice_mut().expect("rows are contiguous");
            fft.process_with_scratch(slice, scratch);
        },
    );
}

/// Unnormalized forward 2D DFT, rows then columns.
fn fft2(data: &mut Array2<Complex64>) {
    let mut planner = FftPlanner::new();
    fft_axis1_par(data, &mut planner);
    let mut transposed = data.t().as_standard_layout().into_owned();
    fft_axis1_par(&mut transposed, &mut planner);
    Zip::from(data)
        .and(transposed.t())
        .par_for_each(|d, &t| *d = t);
}

/// Normalized power spectrum of the zero-padded wave field.
pub fn power_spectrum(wave: &WaveField, mask: &SupportMask, pad_factor: usize) -> Result<Spectrum> {
    if pad_factor == 0 {
        return Err(Error::InvalidParameter(
            "pad factor must be at least 1".into(),
        ));
    }
    if wave.grid != mask.grid {
        return Err(Error::InvalidParameter(
            "wave field and mask are sampled on different grids".into(),
        ));
    }
    let grid = wave.grid;
    let tau = wave.tau;
    let h = grid.h;
    let max_radius = PI * tau / h;
    if max_radius < 1.0 + DEFAULT_DELTA {
        return Err(Error::FrequencyRangeTooSmall {
            max_radius,
            required: 1.0 + DEFAULT_DELTA,
        });
    }

    let n0 = grid.nx * pad_factor;
    let n1 = grid.ny * pad_factor;
    let mut data = Array2::<Complex64>::zeros((n0, n1));
    data.slice_mut(ndarray::s![..grid.nx, ..grid.ny])
        .assign(&wave.values);
    fft2(&mut data);

    let scale = h * h / (2.0 * PI * tau * mask.area.sqrt());
    let scale2 = scale * scale;
    let mut power = Array2::<f64>::zeros((n0, n1));
    Zip::indexed(&mut power).par_for_each(|(a, b), p| {
        let src_a = (a + n0 - n0 / 2) % n0;
        let src_b = (b + n1 - n1 / 2) % n1;
        *p = data[[src_a, src_b]].norm_sqr() * scale2;
    });

    let du = 2.0 * PI * tau / (n0 as f64 * h);
    let dv = 2.0 * PI * tau / (n1 as f64 * h);
    let u_axis = (0..n0).map(|a| signed_index(a, n0) as f64 * du).collect();
    let v_axis = (0..n1).map(|b| signed_index(b, n1) as f64 * dv).collect();
    Ok(Spectrum {
        power,
        u_axis,
        v_axis,
        du,
        dv,
        tau,
        epsilon: mask.epsilon,
        max_radius,
    })
}

fn in_sector(omega: f64, start: f64, width: f64) -> bool {
    width >= TAU || normalize_angle(omega - start) < width
}

fn check_sector(width: f64, delta: f64) -> Result<()> {
    if !(width > 0.0 && width <= TAU) {
        return Err(Error::InvalidParameter(format!(
            "sector width must lie in (0, 2pi], got {width}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "annulus half-width must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

impl Spectrum {
    pub fn cell_measure(&self) -> f64 {
        self.du * self.dv
    }

    /// Sums `power * du * dv` over cells accepted by `keep(r, omega)`, returning the mass
    /// and the number of accepted cells. Rows reduce in parallel, then combine in row
    /// order, so the result does not depend on the thread count.
    fn accumulate<F>(&self, keep: F) -> (f64, usize)
    where
        F: Fn(f64, f64) -> bool + Sync,
    {
        let rows: Vec<(f64, usize)> = self
            .power
            .axis_iter(Axis(0))
            .into_par_iter()
            .enumerate()
            .map(|(a, row)| {
                let u = self.u_axis[a];
                let mut sum = 0.0;
                let mut count = 0;
                for (b, &p) in row.iter().enumerate() {
                    let v = self.v_axis[b];
                    if keep(u.hypot(v), normalize_angle(v.atan2(u))) {
                        sum += p;
                        count += 1;
                    }
                }
                (sum, count)
            })
            .collect();
        let (sum, count) = rows
            .into_iter()
            .fold((0.0, 0), |(s, c), (rs, rc)| (s + rs, c + rc));
        (sum * self.cell_measure(), count)
    }

    /// `sum(power) du dv`; equals 1 for spectra from [`power_spectrum`].
    pub fn total_mass(&self) -> f64 {
        self.accumulate(|_, _| true).0
    }

    fn check_annulus(&self, delta: f64) -> Result<()> {
        if 1.0 + delta > self.max_radius {
            return Err(Error::FrequencyRangeTooSmall {
                max_radius: self.max_radius,
                required: 1.0 + delta,
            });
        }
        Ok(())
    }

    /// Mass in `{1 - delta <= r <= 1 + delta, omega in [start, start + width)}`.
    pub fn sector_annulus_mass(&self, start: f64, width: f64, delta: f64) -> Result<f64> {
        check_sector(width, delta)?;
        self.check_annulus(delta)?;
        let band = RadialBand::Annulus { delta };
        let (mass, count) =
            self.accumulate(|r, omega| band.contains(r) && in_sector(omega, start, width));
        if count == 0 {
            return Err(Error::EmptyAnnulus {
                delta,
                du: self.du,
                dv: self.dv,
            });
        }
        Ok(mass)
    }

    /// Mass of the sector inside `r < 1 - delta` or beyond `r > 1 + delta`.
    pub fn off_annulus_mass(&self, start: f64, width: f64, delta: f64) -> Result<f64> {
        check_sector(width, delta)?;
        let band = RadialBand::Annulus { delta };
        Ok(self
            .accumulate(|r, omega| !band.contains(r) && in_sector(omega, start, width))
            .0)
    }

    /// `|F|` at polar frequency `(radius, angle)`, bilinearly interpolated from the
    /// lattice values of `sqrt(power)`.
    pub fn probe_magnitude(&self, radius: f64, angle: f64) -> Result<f64> {
        let u = radius * angle.cos();
        let v = radius * angle.sin();
        let n0 = self.u_axis.len();
        let n1 = self.v_axis.len();
        let fa = u / self.du + (n0 / 2) as f64;
        let fb = v / self.dv + (n1 / 2) as f64;
        let out = || Error::OutOfRange { radius, angle };
        if !(fa >= 0.0 && fb >= 0.0) || !radius.is_finite() {
            return Err(out());
        }
        let a0 = fa.floor() as usize;
        let b0 = fb.floor() as usize;
        if a0 + 1 >= n0 || b0 + 1 >= n1 {
            return Err(out());
        }
        let ta = fa - a0 as f64;
        let tb = fb - b0 as f64;
        let m = |a: usize, b: usize| self.power[[a, b]].sqrt();
        Ok((1.0 - ta) * (1.0 - tb) * m(a0, b0)
            + ta * (1.0 - tb) * m(a0 + 1, b0)
            + (1.0 - ta) * tb * m(a0, b0 + 1)
            + ta * tb * m(a0 + 1, b0 + 1))
    }

    /// Spectral orientation histogram: bin `b` holds the mass of the band within the bin's
    /// angular sector. Bins that no lattice cell reaches hold zero; only a band with no
    /// cell at all is an error.
    pub fn orientation_histogram(
        &self,
        band: RadialBand,
        bins: usize,
        origin: f64,
    ) -> Result<OrientationHistogram> {
        if bins == 0 {
            return Err(Error::InvalidParameter(
                "bin count must be at least 1".into(),
            ));
        }
        if let RadialBand::Annulus { delta } = band {
            check_sector(TAU, delta)?;
            self.check_annulus(delta)?;
        }
        let rows: Vec<(Vec<f64>, usize)> = self
            .power
            .axis_iter(Axis(0))
            .into_par_iter()
            .enumerate()
            .map(|(a, row)| {
                let u = self.u_axis[a];
                let mut acc = vec![0.0; bins];
                let mut count = 0;
                for (b, &p) in row.iter().enumerate() {
                    let v = self.v_axis[b];
                    if band.contains(u.hypot(v)) {
                        acc[bin_index(v.atan2(u), origin, bins)] += p;
                        count += 1;
                    }
                }
                (acc, count)
            })
            .collect();
        let mut masses = vec![0.0; bins];
        let mut count = 0;
        for (acc, c) in rows {
            count += c;
            for (m, x) in masses.iter_mut().zip(acc) {
                *m += x;
            }
        }
        if count == 0 {
            let delta = match band {
                RadialBand::Annulus { delta } => delta,
                RadialBand::AllRadii => f64::INFINITY,
            };
            return Err(Error::EmptyAnnulus {
                delta,
                du: self.du,
                dv: self.dv,
            });
        }
        let measure = self.cell_measure();
        masses.iter_mut().for_each(|m| *m *= measure);
        OrientationHistogram::new(origin, masses, Source::Spectral)
    }

    /// Row-major dump of the power array with its frequency-axis metadata.
    pub fn dump(&self, stem: &Path) -> Result<()> {
        let values: Vec<f64> = self.power.iter().copied().collect();
        let sidecar = serde_json::json!({
            "nu": self.u_axis.len(),
            "nv": self.v_axis.len(),
            "du": self.du,
            "dv": self.dv,
            "u0": self.u_axis[0],
            "v0": self.v_axis[0],
            "tau": self.tau,
            "epsilon": self.epsilon,
        });
        write_dump(stem, &values, &sidecar)
    }
}
