//! Model constants and unit conventions.
//!
//! Every frequency is measured in units of the recoil frequency `w_R = k^2/2m`,
//! every length in units of `1/k`, and `hbar = k_B = 1`. In these units the
//! free-particle dispersion is `q^2` and the kinetic c-s coupling is `2q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recoil frequency; the unit of every frequency in the crate.
pub const RECOIL: f64 = 1.0;

/// Raw microscopic constants of the cavity + condensate Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroParams {
    /// Pump-cavity detuning, must be negative.
    pub detuning: f64,
    /// Dispersive shift of the cavity resonance per atom.
    pub single_atom_shift: f64,
    /// Contact collision strength (frequency times length).
    pub collision_strength: f64,
    /// Effective pump amplitude.
    pub pump_amplitude: f64,
    pub atom_number: f64,
    /// kL/2pi; must be a positive integer.
    pub mode_count: f64,
    /// k times the transverse condensate width.
    pub kw: f64,
    pub temperature: f64,
    /// Sum of the two phonon damping rates.
    pub phonon_damping: f64,
}

impl MicroParams {
    pub fn box_length(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mode_count
    }
}

impl Default for MicroParams {
    fn default() -> Self {
        let thermo = ThermoParams::default();
        let length = 2.0 * std::f64::consts::PI * f64::from(thermo.mode_count);
        Self {
            detuning: thermo.detuning,
            single_atom_shift: 4.0 * thermo.u / thermo.atom_number,
            collision_strength: thermo.g_tilde * length / thermo.atom_number,
            pump_amplitude: thermo.y / (2.0 * thermo.atom_number).sqrt(),
            atom_number: thermo.atom_number,
            mode_count: f64::from(thermo.mode_count),
            kw: thermo.kw,
            temperature: thermo.temperature,
            phonon_damping: thermo.epsilon,
        }
    }
}

/// Thermodynamic-limit couplings plus the bookkeeping needed for finite sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    /// Pump strength `sqrt(2 N) eta`.
    pub y: f64,
    /// Dispersive coupling `N U0 / 4`.
    pub u: f64,
    /// Collisional coupling `(N/L) g`.
    pub g_tilde: f64,
    pub detuning: f64,
    pub temperature: f64,
    /// Phenomenological phonon-pair damping.
    pub epsilon: f64,
    pub atom_number: f64,
    /// Number of Bloch quasi-momenta, kL/2pi.
    pub mode_count: u32,
    pub kw: f64,
}

impl Default for ThermoParams {
    fn default() -> Self {
        Self {
            y: 0.0,
            u: 0.0,
            g_tilde: 0.1,
            detuning: -1000.0,
            temperature: 0.0,
            epsilon: 0.01,
            atom_number: 1.0e4,
            mode_count: 1001,
            kw: 2.0 * std::f64::consts::PI * std::f64::consts::SQRT_2,
        }
    }
}

impl ThermoParams {
    /// Checks the invariants shared by every constructor.
    pub fn validate(&self) -> Result<()> {
        if !(self.detuning < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "detuning must be negative, got {}",
                self.detuning
            )));
        }
        if !(self.atom_number >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "atom number must be >= 1, got {}",
                self.atom_number
            )));
        }
        if self.mode_count == 0 {
            return Err(Error::InvalidParameter("mode count must be positive".into()));
        }
        for (name, v) in [
            ("y", self.y),
            ("g_tilde", self.g_tilde),
            ("temperature", self.temperature),
            ("epsilon", self.epsilon),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.u.is_finite() || !self.kw.is_finite() {
            return Err(Error::InvalidParameter("u and kw must be finite".into()));
        }
        Ok(())
    }

    pub fn box_length(&self) -> f64 {
        2.0 * std::f64::consts::PI * f64::from(self.mode_count)
    }

    pub fn with_pump(mut self, y: f64) -> Self {
        self.y = y;
        self
    }

    /// Sets the pump to `ratio * y_crit`.
    pub fn with_pump_ratio(self, ratio: f64) -> Result<Self> {
        let yc = critical_coupling(&self)?;
        Ok(self.with_pump(ratio * yc))
    }

    /// Grows the box and the atom number by the same factor, keeping the
    /// density and therefore every thermodynamic coupling fixed.
    pub fn scaled_system(mut self, factor: u32) -> Self {
        self.mode_count *= factor;
        self.atom_number *= f64::from(factor);
        self
    }
}

/// Converts microscopic constants into thermodynamic-limit couplings.
pub fn derive_thermo_params(raw: &MicroParams) -> Result<ThermoParams> {
    if !(raw.detuning < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "detuning must be negative, got {}",
            raw.detuning
        )));
    }
    if !(raw.mode_count >= 1.0) || raw.mode_count.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "kL/2pi must be a positive integer, got {}",
            raw.mode_count
        )));
    }
    if raw.mode_count > f64::from(u32::MAX) {
        return Err(Error::InvalidParameter("kL/2pi too large".into()));
    }
    let n = raw.atom_number;
    let p = ThermoParams {
        y: (2.0 * n).sqrt() * raw.pump_amplitude,
        u: n * raw.single_atom_shift / 4.0,
        g_tilde: n / raw.box_length() * raw.collision_strength,
        detuning: raw.detuning,
        temperature: raw.temperature,
        epsilon: raw.phonon_damping,
        atom_number: n,
        mode_count: raw.mode_count as u32,
        kw: raw.kw,
    };
    p.validate()?;
    Ok(p)
}

/// Self-organization threshold `sqrt(-detuning + 2u) * sqrt(w_R + 2 g_tilde)`.
pub fn critical_coupling(p: &ThermoParams) -> Result<f64> {
    let photon = -p.detuning + 2.0 * p.u;
    if !(photon > 0.0) {
        return Err(Error::UnstablePhotonSector(photon));
    }
    let atomic = RECOIL + 2.0 * p.g_tilde;
    if !(atomic > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "w_R + 2 g_tilde must be positive, got {atomic}"
        )));
    }
    Ok(photon.sqrt() * atomic.sqrt())
}
