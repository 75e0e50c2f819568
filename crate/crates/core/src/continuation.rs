//! Analytic continuation of the polariton Green's function below the real
//! axis, pole search and pole trajectories.

use std::f64::consts::PI;

use errorfunctions::ComplexErrorFunctions;
use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bath::{BathSpectrum, C64};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::response::{Channels, PolaritonGreen};

/// Gaussian smoothing of a sampled density on a uniform grid, mixed with a
/// uniform floor carrying the fraction `floor` of the total weight.
pub fn smooth_spectral(grid: &[f64], rho: &[f64], eta: f64, floor: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("smoothing width must be > 0, got {eta}")));
    }
    if grid.len() != rho.len() || grid.len() < 2 {
        return Err(Error::InvalidParameter("grid and density lengths differ".into()));
    }
    if rho.iter().any(|&r| r < 0.0) {
        return Err(Error::InvalidParameter("density must be non-negative".into()));
    }
    let n = grid.len();
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let reach = ((8.0 * eta / h).ceil() as usize).max(1);
    let kernel: Vec<f64> = (0..=reach)
        .map(|i| (-0.5 * (i as f64 * h / eta).powi(2)).exp())
        .collect();
    let mut out = vec![0.0; n];
    for (j, &r) in rho.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let lo = j.saturating_sub(reach);
        let hi = (j + reach).min(n - 1);
        let norm: f64 = (lo..=hi).map(|i| kernel[i.abs_diff(j)]).sum();
        for i in lo..=hi {
            out[i] += r * kernel[i.abs_diff(j)] / norm;
        }
    }
    let total: f64 = rho.iter().sum();
    let uniform = total / n as f64;
    for v in &mut out {
        *v = (1.0 - floor) * *v + floor * uniform;
    }
    Ok(out)
}

/// A complex-analytic self-energy below the real axis.
pub trait SelfEnergySource: Sync {
    fn sigma(&self, z: C64) -> Result<C64>;
}

/// The self-energy of the bath with every line additionally convolved with a
/// Gaussian of width `eta`, plus a uniform weak floor. `eta = 0` gives the
/// finite meromorphic sum.
#[derive(Debug, Clone)]
pub struct SmoothedSelfEnergy {
    pub lines: Vec<(C64, f64)>,
    pub eta: f64,
    pub floor: C64,
}

impl SmoothedSelfEnergy {
    /// `window` is the length of real axis over which the floor weight is spread.
    pub fn new(bath: &BathSpectrum, channels: Channels, eta: f64, floor_weight: f64, window: f64) -> Result<Self> {
        if !(eta >= 0.0) || !(floor_weight >= 0.0) || !(window > 0.0) {
            return Err(Error::InvalidParameter("invalid smoothing settings".into()));
        }
        if bath.epsilon <= 0.0 && eta == 0.0 {
            return Err(Error::InvalidParameter(
                "continuation needs epsilon > 0 or a positive smoothing width".into(),
            ));
        }
        let mut lines = Vec::new();
        for m in &bath.modes {
            let n = bath.atom_number;
            if channels.beliaev {
                let c = m.weight * m.g_beliaev.norm_sqr() * m.norm_beliaev.powi(2) / n;
                if c > 0.0 {
                    lines.push((bath.beliaev_pole(m), c));
                }
            }
            if channels.landau {
                let c = m.weight * m.g_landau.norm_sqr() * m.norm_landau.powi(2) / n;
                if c > 0.0 {
                    lines.push((bath.landau_pole(m), c));
                }
            }
        }
        let total: f64 = lines.iter().map(|l| l.1).sum();
        Ok(SmoothedSelfEnergy {
            lines,
            eta,
            floor: C64::new(0.0, -PI * floor_weight * total / window),
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.lines.iter().map(|l| l.1).sum()
    }

    /// Frequency span of the line centres.
    pub fn span(&self) -> (f64, f64) {
        self.lines.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l.0.re), hi.max(l.0.re))
        })
    }

    fn kernel(&self, zeta: C64) -> C64 {
        if self.eta == 0.0 {
            return 1.0 / zeta;
        }
        let s = std::f64::consts::SQRT_2 * self.eta;
        C64::new(0.0, -PI.sqrt() / s) * (zeta / s).w()
    }

    /// `Σ_l c_l E[(p_l + ξ - centre)^k]` for `k < count`, with `ξ` Gaussian.
    pub fn moments(&self, centre: f64, count: usize) -> Vec<C64> {
        let mut gauss = vec![0.0; count];
        for (k, g) in gauss.iter_mut().enumerate() {
            *g = if k % 2 == 1 {
                0.0
            } else {
                (1..k).step_by(2).map(|j| j as f64).product::<f64>() * self.eta.powi(k as i32)
            };
        }
        let mut out = vec![C64::new(0.0, 0.0); count];
        for &(p, c) in &self.lines {
            let a = p - centre;
            for (n, o) in out.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                let mut binom = 1.0;
                for k in 0..=n {
                    if gauss[k] != 0.0 {
                        acc += binom * a.powi((n - k) as i32) * gauss[k];
                    }
                    binom = binom * (n - k) as f64 / (k + 1) as f64;
                }
                *o += c * acc;
            }
        }
        out
    }
}

impl SelfEnergySource for SmoothedSelfEnergy {
    fn sigma(&self, z: C64) -> Result<C64> {
        let mut s = self.floor;
        for &(p, c) in &self.lines {
            let zeta = z - p;
            if self.eta == 0.0 && zeta.norm() == 0.0 {
                return Err(Error::PoleCollision { omega: z.re });
            }
            s += c * self.kernel(zeta);
        }
        Ok(s)
    }
}

/// Rational function with prescribed high-frequency moments and poles at
/// depth `depth`, subtracted before the Fourier march.
#[derive(Debug, Clone)]
pub struct Tail {
    pub centre: f64,
    pub poles: Vec<C64>,
    pub amplitudes: Vec<C64>,
}

impl Tail {
    pub fn fit(moments: &[C64], centre: f64, spread: f64, depth: f64) -> Result<Tail> {
        let k = moments.len();
        let poles: Vec<C64> = (0..k)
            .map(|j| C64::new(spread * (PI * (j as f64 + 0.5) / k as f64).cos(), -depth))
            .collect();
        let a = DMatrix::from_fn(k, k, |n, j| poles[j].powi(n as i32));
        let b = DVector::from_column_slice(moments);
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidParameter("tail moment system is singular".into()))?;
        Ok(Tail {
            centre,
            poles: poles.iter().map(|p| p + centre).collect(),
            amplitudes: x.iter().copied().collect(),
        })
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.amplitudes)
            .map(|(p, a)| a / (z - p))
            .sum()
    }
}

pub const TAIL_MOMENTS: usize = 8;
const FILTER_FLOOR: f64 = 1e-14;
const NOISE_MARGIN: f64 = 10.0;
const HIGH_BAND: f64 = 0.8;
const RESOLUTION_LIMIT: f64 = 1e-9;
const GROWTH_LIMIT: f64 = 1e3;
const TRUNCATION_LIMIT: f64 = 1e-5;

/// Downward continuation of a self-energy sampled on the real axis. The
/// sampled function minus its tail is expanded in Fourier modes on a periodic
/// window; depth `nu` multiplies mode `k` by `exp(k nu)`. Modes below the
/// round-off floor are filtered.
#[derive(Debug, Clone)]
pub struct FourierContinuation {
    pub x0: f64,
    pub step: f64,
    pub tail: Tail,
    pub coefficients: Vec<C64>,
    pub nu_max: f64,
    peak: f64,
    threshold: f64,
    samples: Vec<C64>,
}

impl FourierContinuation {
    /// `samples[j]` is `Σ(x0 + j step)` on the real axis.
    pub fn from_samples(samples: &[C64], x0: f64, step: f64, tail: Tail, nu_max: f64) -> Result<Self> {
        let n = samples.len();
        let mut buf: Vec<C64> = samples
            .iter()
            .enumerate()
            .map(|(j, s)| s - tail.eval(C64::new(x0 + j as f64 * step, 0.0)))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let kmax = PI / step;
        let wavenumber = |m: usize| {
            let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
            2.0 * PI * signed / (n as f64 * step)
        };
        let peak = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let noise = (0..n)
            .filter(|&m| wavenumber(m).abs() > HIGH_BAND * kmax)
            .map(|m| buf[m].norm())
            .fold(0.0, f64::max);
        if noise > RESOLUTION_LIMIT * peak {
            return Err(Error::ContinuationUnstable {
                row: 0,
                growth: noise / peak,
            });
        }
        let threshold = (FILTER_FLOOR * peak).max(NOISE_MARGIN * noise);
        for c in &mut buf {
            if c.norm() < threshold {
                *c = C64::new(0.0, 0.0);
            }
            *c /= n as f64;
        }
        let fc = FourierContinuation {
            x0,
            step,
            tail,
            coefficients: buf,
            nu_max,
            peak: peak / n as f64,
            threshold: threshold / n as f64,
            samples: samples.to_vec(),
        };
        fc.check_depth(nu_max, 0)?;
        Ok(fc)
    }

    /// Samples `source` on a window that extends `[lo, hi]` by `margin` on each side.
    pub fn from_source<S: SelfEnergySource>(
        source: &S,
        tail: Tail,
        lo: f64,
        step: f64,
        count: usize,
        margin: f64,
        nu_max: f64,
        exec: Execution,
    ) -> Result<Self> {
        let pad = (margin / step).ceil() as usize;
        let n = count + 2 * pad;
        let x0 = lo - pad as f64 * step;
        let xs: Vec<f64> = (0..n).map(|j| x0 + j as f64 * step).collect();
        let samples = exec::try_map(exec, &xs, |&x| source.sigma(C64::new(x, 0.0)))?;
        Self::from_samples(&samples, x0, step, tail, nu_max)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn wavenumber(&self, m: usize) -> f64 {
        let n = self.len();
        let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
        2.0 * PI * signed / (n as f64 * self.step)
    }

    /// Fails if the surviving modes grow beyond the limit at depth `nu`, or
    /// if the filtered modes could contribute more than the truncation limit.
    pub fn check_depth(&self, nu: f64, row: usize) -> Result<()> {
        if self.peak == 0.0 {
            return Ok(());
        }
        let mut top = 0.0f64;
        let mut cut = 0.0f64;
        for (m, c) in self.coefficients.iter().enumerate() {
            if c.norm() != 0.0 {
                let k = self.wavenumber(m);
                top = top.max(c.norm() * (k * nu).exp());
                cut = cut.max(k);
            }
        }
        let dk = 2.0 * PI / (self.len() as f64 * self.step);
        let growth = top / self.peak;
        let truncation = self.threshold * ((cut + dk) * nu).exp() / self.peak;
        if !growth.is_finite() || growth > GROWTH_LIMIT {
            return Err(Error::ContinuationUnstable { row, growth });
        }
        if !truncation.is_finite() || truncation > TRUNCATION_LIMIT {
            return Err(Error::ContinuationUnstable { row, growth: truncation });
        }
        Ok(())
    }

    /// Continued values on the sampling points of the window at depth `nu`.
    pub fn row(&self, nu: f64) -> Vec<C64> {
        if nu == 0.0 {
            return self.samples.clone();
        }
        let n = self.len();
        let mut buf: Vec<C64> = (0..n)
            .map(|m| self.coefficients[m] * (self.wavenumber(m) * nu).exp())
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.iter()
            .enumerate()
            .map(|(j, v)| v + self.tail.eval(C64::new(self.x0 + j as f64 * self.step, -nu)))
            .collect()
    }
}

impl SelfEnergySource for FourierContinuation {
    fn sigma(&self, z: C64) -> Result<C64> {
        let nu = -z.im;
        if nu < -1e-12 || nu > self.nu_max * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "depth {nu} outside the continued strip [0, {}]",
                self.nu_max
            )));
        }
        let dx = z.re - self.x0;
        let mut s = C64::new(0.0, 0.0);
        for (m, c) in self.coefficients.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let k = self.wavenumber(m);
            s += c * C64::from_polar((k * nu).exp(), k * dx);
        }
        Ok(s + self.tail.eval(z))
    }
}

/// `G(z) = 1 / (z - ω_s - Σ(z))` over any self-energy source.
pub struct DressedGreen<'a, S: SelfEnergySource> {
    pub omega_s: f64,
    pub source: &'a S,
}

impl<S: SelfEnergySource> DressedGreen<'_, S> {
    pub fn reciprocal(&self, z: C64) -> Result<C64> {
        Ok(z - self.omega_s - self.source.sigma(z)?)
    }

    pub fn green(&self, z: C64) -> Result<C64> {
        let d = self.reciprocal(z)?;
        if d.norm() == 0.0 {
            return Err(Error::OnGridPole { omega: z.re });
        }
        Ok(1.0 / d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Backend {
    #[serde(rename = "cauchy-riemann")]
    CauchyRiemann,
    #[default]
    #[serde(rename = "meromorphic")]
    Meromorphic,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cauchy-riemann" | "cr" => Ok(Backend::CauchyRiemann),
            "meromorphic" | "direct" => Ok(Backend::Meromorphic),
            other => Err(Error::Config(format!("unknown continuation backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    /// Depth of the continued strip in units of the line width `ε`.
    pub depth: f64,
    /// Deepest pole seed for the direct evaluator, in units of `ε`.
    pub search_depth: f64,
    pub nu_points: usize,
    /// Gaussian smoothing width in units of the ω step.
    pub smoothing_steps: f64,
    pub floor_weight: f64,
    pub margin: f64,
    pub backend: Backend,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            omega_min: 0.0,
            omega_max: 3.0,
            omega_points: 2048,
            depth: 0.9,
            search_depth: 3.0,
            nu_points: 256,
            smoothing_steps: 3.0,
            floor_weight: 1e-8,
            margin: 50.0,
            backend: Backend::Meromorphic,
        }
    }
}

impl ContinuationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max > self.omega_min) || self.omega_points < 8 || self.nu_points < 2 {
            return Err(Error::InvalidParameter("continuation grid is degenerate".into()));
        }
        if !(self.depth > 0.0) || !(self.search_depth > 0.0) || !(self.smoothing_steps >= 0.0) || !(self.margin >= 0.0) {
            return Err(Error::InvalidParameter("continuation settings must be positive".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.omega_points - 1) as f64
    }

    pub fn eta(&self) -> f64 {
        self.smoothing_steps * self.step()
    }

    pub fn nu_max(&self, epsilon: f64) -> f64 {
        self.depth * epsilon
    }

    pub fn smoothed(&self, bath: &BathSpectrum, channels: Channels) -> Result<SmoothedSelfEnergy> {
        let window = self.omega_max - self.omega_min + 2.0 * self.margin;
        SmoothedSelfEnergy::new(bath, channels, self.eta(), self.floor_weight, window)
    }

    /// The marching backend for `smoothed`.
    pub fn march(&self, smoothed: &SmoothedSelfEnergy, epsilon: f64, exec: Execution) -> Result<FourierContinuation> {
        let (lo, hi) = smoothed.span();
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        let centre = 0.5 * (lo + hi);
        let spread = (0.5 * (hi - lo)).max(0.5);
        let tail = Tail::fit(&smoothed.moments(centre, TAIL_MOMENTS), centre, spread, 1.0)?;
        FourierContinuation::from_source(
            smoothed,
            tail,
            self.omega_min,
            self.step(),
            self.omega_points,
            self.margin,
            self.nu_max(epsilon),
            exec,
        )
    }
}

/// `G` sampled on `z = ω - iν`, rows indexed by `ν`.
#[derive(Debug, Clone)]
pub struct ComplexGrid {
    pub omega: Vec<f64>,
    pub nu: Vec<f64>,
    pub values: Vec<Vec<C64>>,
}

impl ComplexGrid {
    pub fn z(&self, row: usize, col: usize) -> C64 {
        C64::new(self.omega[col], -self.nu[row])
    }

    /// Largest `|∂G/∂ν + i ∂G/∂ω| / |∂G/∂ω|` by central differences over
    /// interior points farther than `radius` from every point in `exclude`.
    pub fn cauchy_riemann_residual(&self, exclude: &[C64], radius: f64) -> f64 {
        let (nr, nc) = (self.nu.len(), self.omega.len());
        if nr < 3 || nc < 3 {
            return 0.0;
        }
        let hw = self.omega[1] - self.omega[0];
        let hn = self.nu[1] - self.nu[0];
        let mut worst = 0.0f64;
        for i in 1..nr - 1 {
            for j in 1..nc - 1 {
                let z = self.z(i, j);
                if exclude.iter().any(|p| (p - z).norm() < radius) {
                    continue;
                }
                let dw = (self.values[i][j + 1] - self.values[i][j - 1]) / (2.0 * hw);
                let dn = (self.values[i + 1][j] - self.values[i - 1][j]) / (2.0 * hn);
                let r = (dn + C64::new(0.0, 1.0) * dw).norm() / dw.norm().max(1e-300);
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Samples `G` of the dressed mode on the settings grid with the chosen backend.
pub fn continue_green(
    omega_s: f64,
    bath: &BathSpectrum,
    channels: Channels,
    settings: &ContinuationSettings,
    exec: Execution,
) -> Result<ComplexGrid> {
    settings.validate()?;
    let smoothed = settings.smoothed(bath, channels)?;
    let nu_max = settings.nu_max(bath.epsilon);
    let nu: Vec<f64> = (0..settings.nu_points)
        .map(|i| nu_max * i as f64 / (settings.nu_points - 1) as f64)
        .collect();
    let omega: Vec<f64> = (0..settings.omega_points)
        .map(|j| settings.omega_min + j as f64 * settings.step())
        .collect();
    let values = match settings.backend {
        Backend::Meromorphic => {
            let g = DressedGreen {
                omega_s,
                source: &smoothed,
            };
            exec::try_map(exec, &nu, |&v| {
                omega.iter().map(|&w| g.green(C64::new(w, -v))).collect::<Result<Vec<_>>>()
            })?
        }
        Backend::CauchyRiemann => {
            let fc = settings.march(&smoothed, bath.epsilon, exec)?;
            let offset = ((settings.omega_min - fc.x0) / fc.step).round() as usize;
            let mut rows = Vec::with_capacity(nu.len());
            for (i, &v) in nu.iter().enumerate() {
                fc.check_depth(v, i)?;
                let sig = fc.row(v);
                let row = (0..omega.len())
                    .map(|j| {
                        let z = C64::new(omega[j], -v);
                        let d = z - omega_s - sig[offset + j];
                        if d.norm() == 0.0 {
                            Err(Error::OnGridPole { omega: omega[j] })
                        } else {
                            Ok(1.0 / d)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            rows
        }
    };
    Ok(ComplexGrid { omega, nu, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleLabel {
    Polariton,
    Bath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub z: C64,
    pub residue: C64,
    pub label: PoleLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub y: f64,
    pub poles: Vec<Pole>,
    /// Seeds whose Newton iteration did not converge.
    pub failed_seeds: Vec<C64>,
}

pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const NEWTON_ITERATIONS: usize = 50;

/// Newton iteration on `1/G` with a central-difference derivative of step `h`.
pub fn newton_on_reciprocal<F: Fn(C64) -> Result<C64>>(f: &F, seed: C64, h: f64) -> Result<C64> {
    let mut z = seed;
    for _ in 0..NEWTON_ITERATIONS {
        let v = f(z)?;
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d.norm() == 0.0 {
            break;
        }
        let mut step = v / d;
        if step.norm() > 0.05 {
            step *= 0.05 / step.norm();
        }
        z -= step;
        if step.norm() < NEWTON_TOLERANCE {
            return Ok(z);
        }
    }
    Err(Error::PoleSearch { seed })
}

/// `(1/2πi) ∮ G dz` on a circle of radius `r` around `z0`.
pub fn contour_residue<F: Fn(C64) -> Result<C64>>(green: &F, z0: C64, r: f64, points: usize) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..points {
        let e = C64::from_polar(1.0, 2.0 * PI * i as f64 / points as f64);
        acc += green(z0 + r * e)? * r * e;
    }
    Ok(acc / points as f64)
}

/// Newton search from `seeds`; converged poles are deduplicated, kept only in
/// the open lower half-plane and sorted by `|Im z|`.
pub fn find_poles<S: SelfEnergySource>(g: &DressedGreen<S>, seeds: &[C64], h: f64, y: f64) -> PoleSet {
    let recip = |z: C64| g.reciprocal(z);
    let green = |z: C64| g.green(z);
    let mut poles: Vec<Pole> = Vec::new();
    let mut failed = Vec::new();
    for &seed in seeds {
        match newton_on_reciprocal(&recip, seed, h) {
            Ok(z) if z.im < 0.0 => {
                if poles.iter().any(|p| (p.z - z).norm() < 1e-7) {
                    continue;
                }
                let r = (0.25 * (-z.im)).min(1e-4).max(1e-9);
                match contour_residue(&green, z, r, 64) {
                    Ok(residue) => poles.push(Pole {
                        z,
                        residue,
                        label: PoleLabel::Bath,
                    }),
                    Err(_) => failed.push(seed),
                }
            }
            _ => failed.push(seed),
        }
    }
    if let Some(best) = poles
        .iter_mut()
        .max_by(|a, b| a.residue.norm().total_cmp(&b.residue.norm()))
    {
        best.label = PoleLabel::Polariton;
    }
    poles.sort_by(|a, b| a.z.im.abs().total_cmp(&b.z.im.abs()));
    PoleSet {
        y,
        poles,
        failed_seeds: failed,
    }
}

/// Peaks of a sampled density, strongest first, as `(ω, half width at half maximum)`.
pub fn spectral_peaks(grid: &[f64], rho: &[f64], max: usize) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for i in 1..rho.len().saturating_sub(1) {
        if rho[i] > rho[i - 1] && rho[i] >= rho[i + 1] {
            let half = 0.5 * rho[i];
            let mut l = i;
            while l > 0 && rho[l] > half {
                l -= 1;
            }
            let mut r = i;
            while r + 1 < rho.len() && rho[r] > half {
                r += 1;
            }
            peaks.push((rho[i], grid[i], 0.5 * (grid[r] - grid[l])));
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    peaks.into_iter().take(max).map(|p| (p.1, p.2)).collect()
}

/// Poles of the dressed mode seeded from the spectral peaks on the settings grid.
pub fn locate_poles(
    omega_s: f64,
    bath: &BathSpectrum,
    settings: &ContinuationSettings,
    y: f64,
    exec: Execution,
) -> Result<PoleSet> {
    settings.validate()?;
    let channels = Channels::BELIAEV;
    let smoothed = settings.smoothed(bath, channels)?;
    let grid: Vec<f64> = (0..settings.omega_points)
        .map(|j| settings.omega_min + j as f64 * settings.step())
        .collect();
    let direct = DressedGreen {
        omega_s,
        source: &smoothed,
    };
    let rho: Vec<f64> = exec::try_map(exec, &grid, |&w| Ok::<_, Error>(-2.0 * direct.green(C64::new(w, 0.0))?.im))?;
    let nu_max = match settings.backend {
        Backend::Meromorphic => settings.search_depth * bath.epsilon,
        Backend::CauchyRiemann => settings.nu_max(bath.epsilon),
    };
    let mut seeds = Vec::new();
    for (w, hw) in spectral_peaks(&grid, &rho, 6) {
        for depth in [hw.max(settings.step()), 0.3 * nu_max, 0.6 * nu_max, 0.9 * nu_max] {
            seeds.push(C64::new(w, -depth.min(0.9 * nu_max)));
        }
    }
    let bm = PolaritonGreen::new(omega_s, bath).with_channels(channels);
    let mut bm_pole = C64::new(omega_s, 0.0) + bm.self_energy(C64::new(omega_s, 0.0))?;
    bm_pole.im = bm_pole.im.max(-0.9 * nu_max);
    seeds.push(bm_pole);
    let h = settings.step() / 10.0;
    Ok(match settings.backend {
        Backend::Meromorphic => find_poles(&direct, &seeds, h, y),
        Backend::CauchyRiemann => {
            let fc = settings.march(&smoothed, bath.epsilon, exec)?;
            find_poles(&DressedGreen { omega_s, source: &fc }, &seeds, h, y)
        }
    })
}

/// Two trajectories `(y/y_crit, z1, z2)` matched by minimal displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    pub ratio: Vec<f64>,
    pub first: Vec<Option<C64>>,
    pub second: Vec<Option<C64>>,
    /// Indices where both assignments were equally close.
    pub ties: Vec<usize>,
}

/// Links the two leading poles of every set into trajectories.
pub fn link_trajectories(ratios: &[f64], sets: &[PoleSet]) -> Trajectories {
    let mut first = Vec::with_capacity(sets.len());
    let mut second = Vec::with_capacity(sets.len());
    let mut ties = Vec::new();
    let mut prev: (Option<C64>, Option<C64>) = (None, None);
    let dist = |u: Option<C64>, v: Option<C64>| match (u, v) {
        (Some(u), Some(v)) => (u - v).norm(),
        _ => f64::INFINITY,
    };
    for (i, set) in sets.iter().enumerate() {
        let a = set.poles.first().map(|p| p.z);
        let b = set.poles.get(1).map(|p| p.z);
        let (mut x, mut y) = match (a, b) {
            (Some(a), Some(b)) if a.re <= b.re => (Some(a), Some(b)),
            (Some(a), Some(b)) => (Some(b), Some(a)),
            other => other,
        };
        if prev.0.is_some() || prev.1.is_some() {
            let keep = dist(x, prev.0).min(1e300) + dist(y, prev.1).min(1e300);
            let swap = dist(y, prev.0).min(1e300) + dist(x, prev.1).min(1e300);
            if x.is_some() && y.is_some() && (keep - swap).abs() < 1e-12 * keep.max(1.0) {
                ties.push(i);
            }
            let single = x.is_some() != y.is_some();
            let lone_to_second = single && dist(x.or(y), prev.1) < dist(x.or(y), prev.0);
            if (single && lone_to_second) || (!single && swap < keep) {
                std::mem::swap(&mut x, &mut y);
            }
            if single && !lone_to_second && x.is_none() {
                std::mem::swap(&mut x, &mut y);
            }
        }
        prev = (x.or(prev.0), y.or(prev.1));
        first.push(x);
        second.push(y);
    }
    Trajectories {
        ratio: ratios.to_vec(),
        first,
        second,
        ties,
    }
}

/// Poles with at least this residue count as relevant.
pub const RELEVANT_RESIDUE: f64 = 1e-3;

/// The two relevant poles closest to the real axis.
pub fn relevant_pair(set: &PoleSet) -> PoleSet {
    PoleSet {
        y: set.y,
        poles: set
            .poles
            .iter()
            .filter(|p| p.residue.norm() >= RELEVANT_RESIDUE)
            .take(2)
            .copied()
            .collect(),
        failed_seeds: set.failed_seeds.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSweep {
    pub sets: Vec<PoleSet>,
    pub born_markov_rate: Vec<f64>,
    pub omega_s: Vec<f64>,
    pub trajectories: Trajectories,
}

/// Pole pairs at every `y / y_crit` in `ratios`, linked into two trajectories.
pub fn pole_sweep(
    p: &crate::model::ThermoParams,
    ratios: &[f64],
    settings: &ContinuationSettings,
    dos: crate::bath::DosMode,
    exec: Execution,
) -> Result<PoleSweep> {
    let y_crit = crate::model::critical_coupling(p)?;
    let rows = exec::try_map(exec, ratios, |&r| {
        let sys = crate::pipeline::assemble(p, r * y_crit, dos, Execution::Sequential)?;
        let set = locate_poles(sys.omega_s(), &sys.bath, settings, r * y_crit, Execution::Sequential)?;
        let rate = sys.born_markov()?.rate_beliaev;
        Ok::<_, Error>((set, rate, sys.omega_s(), sys.bath))
    })?;
    // Reseed every point from the poles found at its neighbours.
    let idx: Vec<usize> = (0..rows.len()).collect();
    let sets = exec::try_map(exec, &idx, |&i| {
        let (set, _, omega_s, bath) = &rows[i];
        let mut seeds = Vec::new();
        for j in [i.wrapping_sub(1), i + 1] {
            if let Some(row) = rows.get(j) {
                seeds.extend(relevant_pair(&row.0).poles.iter().map(|p| p.z));
            }
        }
        let smoothed = settings.smoothed(bath, Channels::BELIAEV)?;
        let extra = match settings.backend {
            Backend::Meromorphic => find_poles(&DressedGreen { omega_s: *omega_s, source: &smoothed }, &seeds, settings.step() / 10.0, set.y),
            Backend::CauchyRiemann => {
                let fc = settings.march(&smoothed, bath.epsilon, Execution::Sequential)?;
                find_poles(&DressedGreen { omega_s: *omega_s, source: &fc }, &seeds, settings.step() / 10.0, set.y)
            }
        };
        Ok::<_, Error>(relevant_pair(&merge(set, &extra)))
    })?;
    let trajectories = link_trajectories(ratios, &sets);
    Ok(PoleSweep {
        born_markov_rate: rows.iter().map(|r| r.1).collect(),
        omega_s: rows.iter().map(|r| r.2).collect(),
        sets,
        trajectories,
    })
}

fn merge(a: &PoleSet, b: &PoleSet) -> PoleSet {
    let mut poles = a.poles.clone();
    for p in &b.poles {
        if !poles.iter().any(|q| (q.z - p.z).norm() < 1e-7) {
            poles.push(*p);
        }
    }
    for p in &mut poles {
        p.label = PoleLabel::Bath;
    }
    if let Some(best) = poles.iter_mut().max_by(|x, y| x.residue.norm().total_cmp(&y.residue.norm())) {
        best.label = PoleLabel::Polariton;
    }
    poles.sort_by(|x, y| x.z.im.abs().total_cmp(&y.z.im.abs()));
    PoleSet {
        y: a.y,
        poles,
        failed_seeds: a.failed_seeds.clone(),
    }
}

impl Trajectories {
    /// Index and size of the smallest `|Re z1 - Re z2|` over points where both exist.
    pub fn closest_approach(&self) -> Option<(usize, f64)> {
        self.first
            .iter()
            .zip(&self.second)
            .enumerate()
            .filter_map(|(i, (a, b))| Some((i, (a.as_ref()?.re - b.as_ref()?.re).abs())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathMode;

    fn toy(lines: &[(f64, f64)], eps: f64) -> BathSpectrum {
        let modes = lines
            .iter()
            .map(|&(w, g)| BathMode {
                q: 0.1,
                omega1: 0.4 * w,
                omega2: 0.6 * w,
                n1: 0.0,
                n2: 0.0,
                norm_landau: 0.0,
                norm_beliaev: 1.0,
                g_landau: C64::new(0.0, 0.0),
                g_beliaev: C64::new(g, 0.0),
                weight: 1.0,
            })
            .collect();
        BathSpectrum {
            modes,
            epsilon: eps,
            temperature: 0.0,
            atom_number: 1.0,
        }
    }

    fn band(n: usize, g: f64, eps: f64) -> BathSpectrum {
        let lines: Vec<_> = (0..n)
            .map(|i| (0.7 + 0.5 * (i as f64 / n as f64).powi(2), g))
            .collect();
        toy(&lines, eps)
    }

    #[test]
    fn smoothing_preserves_weight_and_shape() {
        let h = 1e-3;
        let grid: Vec<f64> = (0..6001).map(|i| -3.0 + i as f64 * h).collect();
        let gamma = 0.02;
        let rho: Vec<f64> = grid.iter().map(|&w| 2.0 * gamma / (w * w + gamma * gamma)).collect();
        let out = smooth_spectral(&grid, &rho, h, 1e-8).unwrap();
        let (a, b): (f64, f64) = (rho.iter().sum(), out.iter().sum());
        assert!((a - b).abs() / a < 1e-6);
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        let dev = rho.iter().zip(&out).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dev / peak < 1e-2);
        assert!(smooth_spectral(&grid, &rho, 0.0, 0.0).is_err());
    }

    #[test]
    fn smoothing_bounds_edge_slope() {
        let h = 1e-3;
        let grid: Vec<f64> = (0..2001).map(|i| i as f64 * h).collect();
        let rho: Vec<f64> = grid.iter().map(|&w| if w > 1.0 { 1.0 } else { 0.0 }).collect();
        let eta = 5.0 * h;
        let out = smooth_spectral(&grid, &rho, eta, 0.0).unwrap();
        let slope = out[100..1900].windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max);
        assert!(slope <= 1.05 / (eta * (2.0 * PI).sqrt()));
    }

    #[test]
    fn smoothed_lines_match_numerical_convolution() {
        let bath = band(30, 0.05, 0.01);
        let h = 5e-4;
        let eta = 0.004;
        let s = SmoothedSelfEnergy::new(&bath, Channels::BELIAEV, eta, 0.0, 1.0).unwrap();
        let raw = SmoothedSelfEnergy::new(&bath, Channels::BELIAEV, 0.0, 0.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..8001).map(|i| -1.0 + i as f64 * h).collect();
        let rho: Vec<f64> = grid
            .iter()
            .map(|&w| -2.0 * raw.sigma(C64::new(w, 0.0)).unwrap().im)
            .collect();
        let conv = smooth_spectral(&grid, &rho, eta, 0.0).unwrap();
        for i in (2000..5000).step_by(97) {
            let exact = -2.0 * s.sigma(C64::new(grid[i], 0.0)).unwrap().im;
            assert!((exact - conv[i]).abs() < 1e-3 * exact.abs().max(1e-2), "{} {}", exact, conv[i]);
        }
    }

    #[test]
    fn free_lorentzian_pole_and_residue() {
        struct Constant(f64);
        impl SelfEnergySource for Constant {
            fn sigma(&self, _z: C64) -> Result<C64> {
                Ok(C64::new(0.0, -self.0))
            }
        }
        let src = Constant(0.003);
        let g = DressedGreen {
            omega_s: 0.8,
            source: &src,
        };
        let set = find_poles(&g, &[C64::new(0.79, -0.01)], 1e-4, 0.0);
        assert_eq!(set.poles.len(), 1);
        let p = set.poles[0];
        assert!((p.z - C64::new(0.8, -0.003)).norm() < 1e-10);
        assert!((p.residue - 1.0).norm() < 1e-10);
        assert_eq!(p.label, PoleLabel::Polariton);
    }

    #[test]
    fn moments_match_meromorphic_lines() {
        let bath = band(10, 0.2, 0.02);
        let s = SmoothedSelfEnergy::new(&bath, Channels::BELIAEV, 0.0, 0.0, 1.0).unwrap();
        let m = s.moments(0.9, 4);
        let z = C64::new(300.0, 0.0);
        let series: C64 = m.iter().enumerate().map(|(k, mk)| mk / (z - 0.9).powi(k as i32 + 1)).sum();
        assert!((series - s.sigma(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn tail_reproduces_moments() {
        let bath = band(10, 0.2, 0.02);
        let s = SmoothedSelfEnergy::new(&bath, Channels::BELIAEV, 0.003, 0.0, 1.0).unwrap();
        let m = s.moments(0.95, TAIL_MOMENTS);
        let t = Tail::fit(&m, 0.95, 0.3, 1.0).unwrap();
        for w in [60.0, -80.0] {
            let z = C64::new(w, 0.0);
            let r = (t.eval(z) - s.sigma(z).unwrap()).norm();
            assert!(r < 1e-13, "{r}");
        }
    }

    fn settings() -> ContinuationSettings {
        ContinuationSettings {
            omega_min: 0.0,
            omega_max: 2.0,
            omega_points: 1024,
            nu_points: 16,
            margin: 30.0,
            backend: Backend::CauchyRiemann,
            ..Default::default()
        }
    }

    #[test]
    fn single_line_continuation_matches_exact() {
        let bath = toy(&[(1.1, 0.1)], 0.02);
        let st = settings();
        let cr = continue_green(1.0, &bath, Channels::BELIAEV, &st, Execution::Parallel).unwrap();
        let direct = continue_green(
            1.0,
            &bath,
            Channels::BELIAEV,
            &ContinuationSettings {
                backend: Backend::Meromorphic,
                ..st
            },
            Execution::Parallel,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for (r, row) in cr.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let e = direct.values[r][c];
                worst = worst.max((v - e).norm() / e.norm().max(1.0));
            }
        }
        assert!(worst < 1e-4, "{worst}");
        for (a, b) in cr.values[0].iter().zip(&direct.values[0]) {
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn poles_agree_between_backends() {
        let bath = band(200, 0.02, 0.02);
        let st = settings();
        let a = locate_poles(0.9, &bath, &st, 0.0, Execution::Parallel).unwrap();
        let b = locate_poles(
            0.9,
            &bath,
            &ContinuationSettings {
                backend: Backend::Meromorphic,
                ..st
            },
            0.0,
            Execution::Parallel,
        )
        .unwrap();
        assert!(!a.poles.is_empty());
        for p in &a.poles {
            assert!(p.z.im < 0.0);
            let q = b.poles.iter().min_by(|x, y| (x.z - p.z).norm().total_cmp(&(y.z - p.z).norm())).unwrap();
            assert!((p.z - q.z).norm() < 1e-6, "{} vs {}", p.z, q.z);
        }
    }

    #[test]
    fn weak_coupling_approaches_born_markov() {
        let mut errs = Vec::new();
        for scale in [1.0, 0.5f64] {
            let bath = band(200, 0.005, 0.02).with_coupling_scale(scale.sqrt());
            let st = ContinuationSettings {
                backend: Backend::Meromorphic,
                smoothing_steps: 0.0,
                ..settings()
            };
            let set = locate_poles(1.3, &bath, &st, 0.0, Execution::Sequential).unwrap();
            let pol = set.poles.iter().find(|p| p.label == PoleLabel::Polariton).unwrap();
            let g = PolaritonGreen::new(1.3, &bath).with_channels(Channels::BELIAEV);
            let bm = C64::new(1.3, 0.0) + g.self_energy(C64::new(1.3, 0.0)).unwrap();
            errs.push((pol.z - bm).norm());
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.5 && ratio < 4.5, "{errs:?}");
    }

    #[test]
    fn unstable_depth_is_detected() {
        let bath = toy(&[(1.1, 0.1)], 0.02);
        let st = ContinuationSettings {
            depth: 3.0,
            smoothing_steps: 0.0,
            ..settings()
        };
        assert!(matches!(
            continue_green(1.0, &bath, Channels::BELIAEV, &st, Execution::Sequential),
            Err(Error::ContinuationUnstable { .. })
        ));
    }

    #[test]
    fn trajectories_follow_nearest_neighbour() {
        let mk = |a: C64, b: C64| PoleSet {
            y: 0.0,
            poles: vec![
                Pole { z: a, residue: C64::new(1.0, 0.0), label: PoleLabel::Polariton },
                Pole { z: b, residue: C64::new(0.1, 0.0), label: PoleLabel::Bath },
            ],
            failed_seeds: vec![],
        };
        let sets = vec![
            mk(C64::new(0.5, -0.001), C64::new(0.7, -0.01)),
            mk(C64::new(0.6, -0.002), C64::new(0.66, -0.009)),
            mk(C64::new(0.64, -0.004), C64::new(0.62, -0.007)),
        ];
        let t = link_trajectories(&[0.1, 0.2, 0.3], &sets);
        assert_eq!(t.first[2], Some(C64::new(0.62, -0.007)));
        assert_eq!(t.second[2], Some(C64::new(0.64, -0.004)));
    }
}
