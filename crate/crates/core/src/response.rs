//! Self-energies, Born-Markov rates and the polariton Green's function.

use serde::{Deserialize, Serialize};

use crate::bath::{BathMode, BathSpectrum, C64};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Landau,
    Beliaev,
}

/// Which channels enter the Green's function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channels {
    pub landau: bool,
    pub beliaev: bool,
}

impl Channels {
    pub const ALL: Channels = Channels {
        landau: true,
        beliaev: true,
    };
    pub const BELIAEV: Channels = Channels {
        landau: false,
        beliaev: true,
    };
}

impl Default for Channels {
    fn default() -> Self {
        Channels::ALL
    }
}

fn term(bath: &BathSpectrum, m: &BathMode, channel: Channel) -> (C64, f64) {
    let (g, norm, pole) = match channel {
        Channel::Landau => (m.g_landau, m.norm_landau, bath.landau_pole(m)),
        Channel::Beliaev => (m.g_beliaev, m.norm_beliaev, bath.beliaev_pole(m)),
    };
    (pole, m.weight * g.norm_sqr() * norm * norm / bath.atom_number)
}

fn check_collision(bath: &BathSpectrum, z: C64, pole: C64) -> Result<()> {
    if bath.epsilon == 0.0 && (z - pole).norm() <= 1e-13 * pole.norm().max(1.0) {
        return Err(Error::PoleCollision { omega: z.re });
    }
    Ok(())
}

/// Per-q summands of the channel self-energy at `z`.
pub fn self_energy_terms(channel: Channel, z: C64, bath: &BathSpectrum) -> Result<Vec<C64>> {
    bath.modes
        .iter()
        .map(|m| {
            let (pole, c) = term(bath, m, channel);
            if c == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            check_collision(bath, z, pole)?;
            Ok(c / (z - pole))
        })
        .collect()
}

pub fn self_energy(channel: Channel, z: C64, bath: &BathSpectrum) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for m in &bath.modes {
        let (pole, c) = term(bath, m, channel);
        if c == 0.0 {
            continue;
        }
        check_collision(bath, z, pole)?;
        s += c / (z - pole);
    }
    Ok(s)
}

/// dΣ/dz.
pub fn self_energy_derivative(channel: Channel, z: C64, bath: &BathSpectrum) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for m in &bath.modes {
        let (pole, c) = term(bath, m, channel);
        if c == 0.0 {
            continue;
        }
        check_collision(bath, z, pole)?;
        let d = z - pole;
        s -= c / (d * d);
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyEval {
    pub omega: C64,
    pub landau: C64,
    pub beliaev: C64,
}

impl SelfEnergyEval {
    pub fn total(&self) -> C64 {
        self.landau + self.beliaev
    }
}

pub fn evaluate_self_energy(z: C64, bath: &BathSpectrum) -> Result<SelfEnergyEval> {
    Ok(SelfEnergyEval {
        omega: z,
        landau: self_energy(Channel::Landau, z, bath)?,
        beliaev: self_energy(Channel::Beliaev, z, bath)?,
    })
}

/// Shifts and rates from the self-energy at the bare frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BornMarkov {
    pub omega_s: f64,
    pub shift_landau: f64,
    pub rate_landau: f64,
    pub shift_beliaev: f64,
    pub rate_beliaev: f64,
    pub pole: C64,
}

pub fn born_markov(omega_s: f64, bath: &BathSpectrum) -> Result<BornMarkov> {
    let s = evaluate_self_energy(C64::new(omega_s, 0.0), bath)?;
    Ok(BornMarkov {
        omega_s,
        shift_landau: s.landau.re,
        rate_landau: 0.0 - s.landau.im,
        shift_beliaev: s.beliaev.re,
        rate_beliaev: 0.0 - s.beliaev.im,
        pole: omega_s + s.total(),
    })
}

/// `G(z) = 1 / (z - ω_s - Σ(z))` for a bare soft mode dressed by the bath.
#[derive(Debug, Clone, Copy)]
pub struct PolaritonGreen<'a> {
    pub omega_s: f64,
    pub bath: &'a BathSpectrum,
    pub channels: Channels,
}

impl<'a> PolaritonGreen<'a> {
    pub fn new(omega_s: f64, bath: &'a BathSpectrum) -> Self {
        PolaritonGreen {
            omega_s,
            bath,
            channels: Channels::ALL,
        }
    }

    pub fn with_channels(mut self, channels: Channels) -> Self {
        self.channels = channels;
        self
    }

    pub fn self_energy(&self, z: C64) -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        if self.channels.landau {
            s += self_energy(Channel::Landau, z, self.bath)?;
        }
        if self.channels.beliaev {
            s += self_energy(Channel::Beliaev, z, self.bath)?;
        }
        Ok(s)
    }

    pub fn denominator(&self, z: C64) -> Result<C64> {
        Ok(z - self.omega_s - self.self_energy(z)?)
    }

    pub fn denominator_derivative(&self, z: C64) -> Result<C64> {
        let mut d = C64::new(1.0, 0.0);
        if self.channels.landau {
            d -= self_energy_derivative(Channel::Landau, z, self.bath)?;
        }
        if self.channels.beliaev {
            d -= self_energy_derivative(Channel::Beliaev, z, self.bath)?;
        }
        Ok(d)
    }

    pub fn green(&self, z: C64) -> Result<C64> {
        let d = self.denominator(z)?;
        if d.norm() == 0.0 {
            return Err(Error::OnGridPole { omega: z.re });
        }
        Ok(1.0 / d)
    }

    pub fn spectral(&self, omega: f64) -> Result<f64> {
        Ok(-2.0 * self.green(C64::new(omega, 0.0))?.im)
    }

    /// Smallest and largest bath frequency in the active channels, together
    /// with the bare frequency.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = self.omega_s;
        let mut hi = self.omega_s;
        for m in &self.bath.modes {
            if self.channels.beliaev {
                lo = lo.min(m.beliaev_frequency());
                hi = hi.max(m.beliaev_frequency());
            }
            if self.channels.landau && m.landau_active() {
                lo = lo.min(m.landau_frequency());
                hi = hi.max(m.landau_frequency());
            }
        }
        (lo, hi)
    }

    /// Newton iteration on the denominator from `seed`.
    pub fn newton_pole(&self, seed: C64) -> Result<C64> {
        let mut z = seed;
        for _ in 0..100 {
            let d = self.denominator(z)?;
            let step = d / self.denominator_derivative(z)?;
            let step = if step.norm() > 0.5 { step * (0.5 / step.norm()) } else { step };
            z -= step;
            if !z.re.is_finite() || !z.im.is_finite() {
                break;
            }
            if step.norm() < 1e-13 * z.norm().max(1.0) {
                return Ok(z);
            }
        }
        Err(Error::PoleSearch { seed })
    }
}

pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Default real-axis grid for spectral plots.
pub fn default_grid(epsilon: f64) -> Vec<f64> {
    let step = if epsilon > 0.0 { (epsilon / 5.0).min(1e-3) } else { 1e-3 };
    uniform_grid(-1.0, 4.0, step)
}

pub fn spectral_function(g: &PolaritonGreen, grid: &[f64], exec: Execution) -> Result<Vec<f64>> {
    if g.bath.epsilon <= 0.0 {
        return Err(Error::InvalidParameter(
            "spectral function on the real axis needs epsilon > 0".into(),
        ));
    }
    exec::try_map(exec, grid, |&w| g.spectral(w))
}

/// Trapezoidal `∫ρ dω/2π`.
pub fn trapezoid_weight(grid: &[f64], rho: &[f64]) -> f64 {
    grid.windows(2)
        .zip(rho.windows(2))
        .map(|(w, r)| 0.5 * (w[1] - w[0]) * (r[0] + r[1]))
        .sum::<f64>()
        / (2.0 * std::f64::consts::PI)
}

fn simpson<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Spectral weight captured on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumRule {
    pub weight: f64,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

/// `∫ρ dω/2π` over the support widened by `margin` on each side, from a
/// uniform base grid of spacing `step` refined adaptively. Narrow dressed
/// poles are located first and inserted as breakpoints.
pub fn spectral_weight(g: &PolaritonGreen, margin: f64, step: f64, exec: Execution) -> Result<SumRule> {
    if !(step > 0.0) || !(margin >= 0.0) {
        return Err(Error::InvalidParameter("sum rule needs step > 0 and margin >= 0".into()));
    }
    let (s_lo, s_hi) = g.support();
    let lo = s_lo - margin;
    let hi = s_hi + margin;
    let mut nodes = uniform_grid(lo, hi, step);
    let seed = C64::new(g.omega_s, 0.0) + g.self_energy(C64::new(g.omega_s, 0.0))?;
    if let Ok(z) = g.newton_pole(seed) {
        if z.re > lo && z.re < hi {
            nodes.push(z.re);
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let f = |w: f64| g.spectral(w);
    let values = exec::try_map(exec, &nodes, |&w| f(w))?;
    let intervals: Vec<usize> = (0..nodes.len() - 1).collect();
    let tol = 1e-7 / intervals.len() as f64;
    let parts = exec::try_map(exec, &intervals, |&i| {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        let fm = f(0.5 * (a + b))?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson(&f, a, b, fa, fm, fb, whole, tol, 40)
    })?;
    Ok(SumRule {
        weight: parts.iter().sum::<f64>() / (2.0 * std::f64::consts::PI),
        lo,
        hi,
        step,
    })
}

/// Fails with [`Error::SumRuleDeficit`] when the captured weight is off by more than `tol`.
pub fn check_sum_rule(rule: &SumRule, tol: f64) -> Result<()> {
    if (rule.weight - 1.0).abs() > tol {
        return Err(Error::SumRuleDeficit { captured: rule.weight });
    }
    Ok(())
}

/// Principal-value reconstruction of `Re G` from sampled `ρ` on a uniform grid.
pub fn kramers_kronig(grid: &[f64], rho: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let (a, b) = (grid[0], grid[n - 1]);
    let h = (b - a) / (n - 1) as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..n)
        .map(|i| {
            let w = grid[i];
            if i == 0 || i == n - 1 {
                return f64::NAN;
            }
            let slope = (rho[i + 1] - rho[i - 1]) / (2.0 * h);
            let mut acc = 0.0;
            for j in 0..n {
                let v = if j == i {
                    -slope
                } else {
                    (rho[j] - rho[i]) / (w - grid[j])
                };
                let c = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                acc += c * v;
            }
            acc *= h;
            (acc + rho[i] * ((w - a) / (b - w)).ln()) / two_pi
        })
        .collect()
}
