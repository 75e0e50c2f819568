//! End-to-end assembly of the dressed soft mode at one pump strength.

use serde::{Deserialize, Serialize};

use crate::bath::{build_bath_spectrum, BathSpectrum, DosMode};
use crate::bogoliubov::{momentum_grid, phonon_bands, soft_mode, BandTable, Fluctuations, SoftMode};
use crate::coupling::{landau_beliaev_couplings, vertex_coefficients, CouplingTable, InteractionTensors};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::meanfield::{solve_steady_state, MeanField};
use crate::model::{critical_coupling, ThermoParams};
use crate::response::{born_markov, BornMarkov, PolaritonGreen};

#[derive(Debug, Clone)]
pub struct System {
    pub params: ThermoParams,
    pub mean_field: MeanField,
    pub soft: SoftMode,
    pub bands: BandTable,
    pub couplings: CouplingTable,
    pub bath: BathSpectrum,
}

impl System {
    pub fn omega_s(&self) -> f64 {
        self.soft.frequency
    }

    pub fn green(&self) -> PolaritonGreen<'_> {
        PolaritonGreen::new(self.omega_s(), &self.bath)
    }

    pub fn born_markov(&self) -> Result<BornMarkov> {
        born_markov(self.omega_s(), &self.bath)
    }
}

/// Builds the bath seen by the soft mode at pump `y`.
pub fn assemble(p: &ThermoParams, y: f64, dos: DosMode, exec: Execution) -> Result<System> {
    p.validate()?;
    let mf = solve_steady_state(p, y, &MeanField::normal(p, y))?;
    let fl = Fluctuations::new(p, &mf);
    let soft = soft_mode(p, &mf)?;
    let grid = momentum_grid(p.mode_count);
    let bands = phonon_bands(&fl, &grid, exec)?;
    let tensors = InteractionTensors::from_expansion(&fl.expansion);
    let n = grid.len();
    let idx: Vec<usize> = (0..n).collect();
    let vertices = exec::map(exec, &idx, |&i| {
        vertex_coefficients(&tensors, &soft.modes, &bands.modes[i], &bands.modes[n - 1 - i], grid[i])
    });
    let couplings = landau_beliaev_couplings(&vertices, soft.index)?;
    let bath = build_bath_spectrum(&bands, &couplings, p.temperature, p.epsilon, p.atom_number, dos, p.kw)?;
    Ok(System {
        params: *p,
        mean_field: mf,
        soft,
        bands,
        couplings,
        bath,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingPoint {
    pub y: f64,
    pub ratio: f64,
    pub omega_s: f64,
    pub result: BornMarkov,
}

/// Born-Markov shifts and rates at each `y / y_crit` in `ratios`.
pub fn damping_sweep(p: &ThermoParams, ratios: &[f64], dos: DosMode, exec: Execution) -> Result<Vec<DampingPoint>> {
    let y_crit = critical_coupling(p)?;
    exec::try_map(exec, ratios, |&r| {
        let sys = assemble(p, r * y_crit, dos, Execution::Sequential)?;
        Ok(DampingPoint {
            y: r * y_crit,
            ratio: r,
            omega_s: sys.omega_s(),
            result: sys.born_markov()?,
        })
    })
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
