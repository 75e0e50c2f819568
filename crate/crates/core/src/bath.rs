//! Bosonized phonon-pair bath.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::BandTable;
use crate::coupling::CouplingTable;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Density-of-modes weighting of the momentum sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DosMode {
    #[serde(rename = "1d")]
    OneD,
    #[default]
    #[serde(rename = "3d")]
    ThreeD,
}

impl std::str::FromStr for DosMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1d" => Ok(DosMode::OneD),
            "3d" => Ok(DosMode::ThreeD),
            other => Err(Error::Config(format!("unknown dos mode `{other}` (expected 1d or 3d)"))),
        }
    }
}

impl std::fmt::Display for DosMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DosMode::OneD => "1d",
            DosMode::ThreeD => "3d",
        })
    }
}

/// Summand weight at momentum `q` (units of `k`) for a condensate of width
/// `kw / k`.
pub fn dos_weight(mode: DosMode, q: f64, kw: f64) -> f64 {
    match mode {
        DosMode::OneD => 1.0,
        DosMode::ThreeD => (q * kw).powi(2) / (2.0 * std::f64::consts::PI),
    }
}

/// Bose-Einstein occupation.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "occupation requires a positive frequency, got {omega}"
        )));
    }
    if !(temperature >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// One composite Landau/Beliaev pair at momentum `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub q: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub n1: f64,
    pub n2: f64,
    pub norm_landau: f64,
    pub norm_beliaev: f64,
    pub g_landau: C64,
    pub g_beliaev: C64,
    pub weight: f64,
}

impl BathMode {
    pub fn landau_frequency(&self) -> f64 {
        self.omega2 - self.omega1
    }

    pub fn beliaev_frequency(&self) -> f64 {
        self.omega1 + self.omega2
    }

    pub fn landau_active(&self) -> bool {
        self.norm_landau > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpectrum {
    pub modes: Vec<BathMode>,
    pub epsilon: f64,
    pub temperature: f64,
    pub atom_number: f64,
}

impl BathSpectrum {
    pub fn landau_pole(&self, m: &BathMode) -> C64 {
        C64::new(m.landau_frequency(), -self.epsilon)
    }

    pub fn beliaev_pole(&self, m: &BathMode) -> C64 {
        C64::new(m.beliaev_frequency(), -self.epsilon)
    }

    /// Multiplies every coupling by `s`.
    pub fn with_coupling_scale(&self, s: f64) -> Self {
        let mut b = self.clone();
        for m in &mut b.modes {
            m.g_landau *= s;
            m.g_beliaev *= s;
        }
        b
    }
}

/// Assembles the bath from band structure and coupling tables on the same grid.
pub fn build_bath_spectrum(
    bands: &BandTable,
    couplings: &CouplingTable,
    temperature: f64,
    epsilon: f64,
    atom_number: f64,
    dos: DosMode,
    kw: f64,
) -> Result<BathSpectrum> {
    if bands.q.len() != couplings.q.len() {
        return Err(Error::InvalidParameter("band and coupling grids differ".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut modes = Vec::with_capacity(bands.q.len());
    for (i, &q) in bands.q.iter().enumerate() {
        let omega1 = bands.frequency(0, i);
        let omega2 = bands.frequency(1, i);
        let n1 = thermal_occupation(omega1, temperature)?;
        let n2 = thermal_occupation(omega2, temperature)?;
        let landau_sq = n1 - n2;
        if landau_sq < 0.0 {
            return Err(Error::NegativeRadicand { q, value: landau_sq });
        }
        modes.push(BathMode {
            q,
            omega1,
            omega2,
            n1,
            n2,
            norm_landau: landau_sq.sqrt(),
            norm_beliaev: (n1 + n2 + 1.0).sqrt(),
            g_landau: couplings.landau[i],
            g_beliaev: couplings.beliaev[i],
            weight: dos_weight(dos, q, kw),
        });
    }
    Ok(BathSpectrum {
        modes,
        epsilon,
        temperature,
        atom_number,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{ModeSet, Sector};
    use proptest::prelude::*;

    #[test]
    fn occupation_examples() {
        assert_eq!(thermal_occupation(0.7, 0.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((thermal_occupation(0.3, 0.3).unwrap() - 1.0 / (e - 1.0)).abs() < 1e-14);
        assert!((thermal_occupation(0.3, 0.3).unwrap() - 0.58198).abs() < 1e-5);
        let t = 2.0;
        let n = thermal_occupation(1e-3 * t, t).unwrap();
        assert!((n - 1e3).abs() / 1e3 < 1e-3);
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
    }

    fn table(q: &[f64], w: &[(f64, f64)]) -> (BandTable, CouplingTable) {
        let modes = q
            .iter()
            .zip(w)
            .map(|(&q, &(a, b))| ModeSet {
                sector: Sector::Phonon { q },
                frequencies: vec![a, b, 2.0],
                right: vec![Default::default(); 3],
                left: vec![Default::default(); 3],
                zero_modes: 0,
            })
            .collect();
        let c = CouplingTable {
            q: q.to_vec(),
            landau: vec![C64::new(0.1, 0.2); q.len()],
            beliaev: vec![C64::new(0.3, -0.1); q.len()],
        };
        (BandTable { q: q.to_vec(), modes }, c)
    }

    #[test]
    fn zero_temperature_normalizations() {
        let (b, c) = table(&[-0.2, 0.2, 0.49], &[(0.04, 0.64), (0.04, 0.64), (0.2401, 0.2601)]);
        let bath = build_bath_spectrum(&b, &c, 0.0, 0.01, 1e4, DosMode::ThreeD, 1.0).unwrap();
        for m in &bath.modes {
            assert_eq!(m.norm_landau, 0.0);
            assert_eq!(m.norm_beliaev, 1.0);
            assert!(!m.landau_active());
            assert_eq!(bath.beliaev_pole(m).im, -0.01);
            assert_eq!(bath.landau_pole(m).im, -0.01);
        }
        assert!((bath.modes[2].beliaev_frequency() - 0.5002).abs() < 1e-12);
    }

    #[test]
    fn mislabelled_bands_are_reported() {
        let (b, c) = table(&[0.1], &[(0.5, 0.2)]);
        assert!(matches!(
            build_bath_spectrum(&b, &c, 0.1, 0.01, 1e4, DosMode::OneD, 1.0),
            Err(Error::NegativeRadicand { .. })
        ));
    }

    #[test]
    fn dos_weights() {
        assert_eq!(dos_weight(DosMode::OneD, 0.3, 5.0), 1.0);
        let kw = 2.0 * std::f64::consts::PI * 2f64.sqrt();
        let expected = (0.25f64 * kw).powi(2) / (2.0 * std::f64::consts::PI);
        assert!((dos_weight(DosMode::ThreeD, 0.25, kw) - expected).abs() < 1e-14);
        assert_eq!("3D".parse::<DosMode>().unwrap(), DosMode::ThreeD);
        assert!("2d".parse::<DosMode>().is_err());
    }

    proptest! {
        #[test]
        fn occupation_monotone(w1 in 0.01f64..5.0, dw in 1e-4f64..5.0, t in 1e-3f64..2.0) {
            let a = thermal_occupation(w1, t).unwrap();
            let b = thermal_occupation(w1 + dw, t).unwrap();
            prop_assert!(b < a || a == 0.0);
        }

        #[test]
        fn normalizations_match_commutator_algebra(w1 in 0.01f64..2.0, dw in 1e-3f64..2.0, t in 0.0f64..1.0) {
            let (b, c) = table(&[0.1], &[(w1, w1 + dw)]);
            let bath = build_bath_spectrum(&b, &c, t, 0.01, 1e4, DosMode::OneD, 1.0).unwrap();
            let m = bath.modes[0];
            prop_assert!((m.norm_landau.powi(2) - (m.n1 - m.n2)).abs() < 1e-12 * (1.0 + m.n1));
            prop_assert!((m.norm_beliaev.powi(2) - (m.n1 + m.n2 + 1.0)).abs() < 1e-12 * (1.0 + m.n1));
            prop_assert!(m.norm_beliaev >= 1.0);
            prop_assert!(m.landau_frequency() > 0.0);
        }
    }
}
