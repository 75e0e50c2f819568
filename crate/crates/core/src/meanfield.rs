//! Steady states of the coupled photon and condensate amplitudes.
//!
//! The gauge is fixed so that every amplitude is real with `beta > 0`; above
//! threshold the `gamma > 0` member of the Z2 pair is returned.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{critical_coupling, ThermoParams};

pub const TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;
/// Relative width of the excluded window around `y_crit`.
pub const CRITICAL_WINDOW: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanField {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub y: f64,
}

impl MeanField {
    pub fn normal(p: &ThermoParams, y: f64) -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            gamma: 0.0,
            mu: p.g_tilde,
            y,
        }
    }

    pub fn is_normal(&self) -> bool {
        self.alpha == 0.0 && self.gamma == 0.0
    }

    /// The Z2 partner `(-alpha, beta, -gamma)`.
    pub fn mirrored(&self) -> Self {
        Self {
            alpha: -self.alpha,
            gamma: -self.gamma,
            ..*self
        }
    }

    fn unknowns(&self) -> Vector4<f64> {
        Vector4::new(self.alpha, self.beta, self.gamma, self.mu)
    }

    fn from_unknowns(x: &Vector4<f64>, y: f64) -> Self {
        Self {
            alpha: x[0],
            beta: x[1],
            gamma: x[2],
            mu: x[3],
            y,
        }
    }
}

/// Stationary equations plus normalization, in the order photon, homogeneous,
/// cosine, norm.
pub fn residuals(p: &ThermoParams, mf: &MeanField) -> [f64; 4] {
    let MeanField {
        alpha: a,
        beta: b,
        gamma: c,
        mu,
        y,
    } = *mf;
    let (u, g, det) = (p.u, p.g_tilde, p.detuning);
    [
        -det * a + y * b * c + u * (2.0 * b * b + 3.0 * c * c) * a,
        -mu * b + y * a * c + 2.0 * u * a * a * b + g * (b * b * b + 3.0 * b * c * c),
        (1.0 - mu) * c + y * a * b + 3.0 * u * a * a * c + g * (1.5 * c * c * c + 3.0 * b * b * c),
        b * b + c * c - 1.0,
    ]
}

pub fn residual_norm(p: &ThermoParams, mf: &MeanField) -> f64 {
    residuals(p, mf).iter().fold(0.0, |m, r| m.max(r.abs()))
}

fn jacobian(p: &ThermoParams, mf: &MeanField) -> Matrix4<f64> {
    let MeanField {
        alpha: a,
        beta: b,
        gamma: c,
        mu,
        y,
    } = *mf;
    let (u, g, det) = (p.u, p.g_tilde, p.detuning);
    Matrix4::new(
        -det + u * (2.0 * b * b + 3.0 * c * c),
        y * c + 4.0 * u * b * a,
        y * b + 6.0 * u * c * a,
        0.0,
        y * c + 4.0 * u * a * b,
        -mu + 2.0 * u * a * a + g * (3.0 * b * b + 3.0 * c * c),
        y * a + 6.0 * g * b * c,
        -b,
        y * b + 6.0 * u * a * c,
        y * a + 6.0 * g * b * c,
        (1.0 - mu) + 3.0 * u * a * a + g * (4.5 * c * c + 3.0 * b * b),
        -c,
        0.0,
        2.0 * b,
        2.0 * c,
        0.0,
    )
}

pub fn solve_normal_phase(p: &ThermoParams) -> Result<MeanField> {
    p.validate()?;
    let y_crit = critical_coupling(p)?;
    if p.y >= y_crit {
        return Err(Error::AboveThreshold { y: p.y, y_crit });
    }
    Ok(MeanField::normal(p, p.y))
}

fn check_window(y: f64, y_crit: f64) -> Result<()> {
    if (y - y_crit).abs() <= 1e-14 * y_crit {
        return Err(Error::SingularJacobian { y });
    }
    if (y - y_crit).abs() < CRITICAL_WINDOW * y_crit {
        return Err(Error::NearCritical { y, y_crit });
    }
    Ok(())
}

/// Newton solve of the stationary equations at pump `y`, started from `seed`.
pub fn solve_steady_state(p: &ThermoParams, y: f64, seed: &MeanField) -> Result<MeanField> {
    p.validate()?;
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("pump must be non-negative, got {y}")));
    }
    let y_crit = critical_coupling(p)?;
    check_window(y, y_crit)?;

    if y < y_crit {
        // The only root with beta > 0 below threshold.
        return Ok(MeanField::normal(p, y));
    }

    let mut start = MeanField { y, ..*seed };
    if start.gamma.abs() < 1e-8 || start.alpha.abs() < 1e-12 {
        start = reduced_seed(p, y)?;
    }
    let found = match newton(p, y, &start) {
        Ok(mf) if mf.gamma.abs() > 1e-10 && mf.beta.abs() > 1e-6 => Ok(mf),
        _ => newton(p, y, &reduced_seed(p, y)?),
    }?;
    Ok(canonical(found))
}

fn canonical(mut mf: MeanField) -> MeanField {
    if mf.beta < 0.0 {
        mf.alpha = -mf.alpha;
        mf.beta = -mf.beta;
        mf.gamma = -mf.gamma;
    }
    if mf.gamma < 0.0 {
        mf = mf.mirrored();
    }
    mf
}

fn newton(p: &ThermoParams, y: f64, seed: &MeanField) -> Result<MeanField> {
    let mut mf = MeanField { y, ..*seed };
    let mut res = residual_norm(p, &mf);
    for it in 0..MAX_ITERATIONS {
        if res < TOLERANCE {
            return Ok(mf);
        }
        let r = Vector4::from(residuals(p, &mf));
        let step = jacobian(p, &mf)
            .lu()
            .solve(&(-r))
            .ok_or(Error::SingularJacobian { y })?;
        let x0 = mf.unknowns();
        let mut lambda = 1.0;
        loop {
            let trial = MeanField::from_unknowns(&(x0 + step * lambda), y);
            let tr = residual_norm(p, &trial);
            if tr < res || lambda < 1e-4 {
                mf = trial;
                res = tr;
                break;
            }
            lambda *= 0.5;
        }
        if !res.is_finite() {
            return Err(Error::NonConvergence {
                y,
                iterations: it + 1,
                residual: res,
            });
        }
    }
    if res < TOLERANCE {
        Ok(mf)
    } else {
        Err(Error::NonConvergence {
            y,
            iterations: MAX_ITERATIONS,
            residual: res,
        })
    }
}

/// Eliminates `alpha` and `mu` for `beta = cos t, gamma = sin t` and returns
/// the cosine-mode residual as a function of `t` alone.
fn reduced(p: &ThermoParams, y: f64, t: f64) -> (f64, MeanField) {
    let (b, c) = (t.cos(), t.sin());
    let (u, g) = (p.u, p.g_tilde);
    let photon = -p.detuning + u * (2.0 * b * b + 3.0 * c * c);
    let a_over_b = -y * c / photon;
    let a = a_over_b * b;
    let mu = y * c * a_over_b + 2.0 * u * a * a + g * (b * b + 3.0 * c * c);
    let mf = MeanField {
        alpha: a,
        beta: b,
        gamma: c,
        mu,
        y,
    };
    (residuals(p, &mf)[2], mf)
}

fn reduced_seed(p: &ThermoParams, y: f64) -> Result<MeanField> {
    let samples = 400;
    let upper = std::f64::consts::FRAC_PI_2;
    let mut lo = 1e-9;
    let (mut f_lo, _) = reduced(p, y, lo);
    for i in 1..=samples {
        let hi = upper * i as f64 / samples as f64;
        let (f_hi, _) = reduced(p, y, hi);
        if f_lo < 0.0 && f_hi >= 0.0 {
            let mut hi = hi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (f_mid, _) = reduced(p, y, mid);
                if f_mid < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            return Ok(reduced(p, y, 0.5 * (lo + hi)).1);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::NonConvergence {
        y,
        iterations: samples,
        residual: f64::NAN,
    })
}

/// Natural-parameter continuation along an ascending pump grid.
pub fn sweep_mean_field(p: &ThermoParams, y_grid: &[f64]) -> Result<Vec<MeanField>> {
    if y_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("pump grid must be ascending".into()));
    }
    let mut out = Vec::with_capacity(y_grid.len());
    let mut seed = MeanField::normal(p, 0.0);
    for &y in y_grid {
        let mf = solve_steady_state(p, y, &seed)?;
        seed = mf;
        out.push(mf);
    }
    Ok(out)
}

/// Convenience wrapper that picks the right branch for `p.y`.
pub fn solve(p: &ThermoParams) -> Result<MeanField> {
    let y_crit = critical_coupling(p)?;
    if p.y < y_crit {
        check_window(p.y, y_crit)?;
        solve_normal_phase(p)
    } else {
        solve_steady_state(p, p.y, &MeanField::normal(p, p.y))
    }
}
