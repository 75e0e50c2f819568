//! Run configuration: `name = value` files with `#` comments.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bath::DosMode;
use crate::continuation::{Backend, ContinuationSettings};
use crate::error::{Error, Result};
use crate::model::{derive_thermo_params, MicroParams, ThermoParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Meanfield,
    Bands,
    Softmode,
    #[default]
    DampingSweep,
    TemperatureSweep,
    Spectral,
    Poles,
    Verify,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Meanfield,
        Command::Bands,
        Command::Softmode,
        Command::DampingSweep,
        Command::TemperatureSweep,
        Command::Spectral,
        Command::Poles,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Meanfield => "meanfield",
            Command::Bands => "bands",
            Command::Softmode => "softmode",
            Command::DampingSweep => "damping-sweep",
            Command::TemperatureSweep => "temperature-sweep",
            Command::Spectral => "spectral",
            Command::Poles => "poles",
            Command::Verify => "verify",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Which parameter block defines the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterSet {
    #[default]
    Thermo,
    Micro,
}

impl std::str::FromStr for ParameterSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thermo" => Ok(ParameterSet::Thermo),
            "micro" => Ok(ParameterSet::Micro),
            other => Err(Error::Config(format!("unknown parameter set `{other}`"))),
        }
    }
}

/// Evenly spaced `y / y_crit` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl RatioGrid {
    pub fn values(&self) -> Vec<f64> {
        crate::pipeline::linspace(self.min, self.max, self.points)
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.min >= 0.0) || !(self.max >= self.min) || self.points == 0 {
            return Err(Error::Config(format!(
                "{name} grid needs 0 <= min <= max and points > 0"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: ParameterSet,
    pub thermo: ThermoParams,
    pub micro: MicroParams,
    /// Pump ratio for single-point commands.
    pub ratio: f64,
    pub sweep: RatioGrid,
    pub softmode: RatioGrid,
    pub spectral: RatioGrid,
    pub poles: RatioGrid,
    pub dos_mode: DosMode,
    pub epsilons: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub continuation: ContinuationSettings,
    pub dump_grid: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker count; 0 uses every core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::default(),
            parameters: ParameterSet::default(),
            thermo: ThermoParams::default(),
            micro: MicroParams::default(),
            ratio: 0.629,
            sweep: RatioGrid { min: 0.3, max: 1.6, points: 200 },
            softmode: RatioGrid { min: 0.0, max: 0.999, points: 100 },
            spectral: RatioGrid { min: 0.3, max: 0.95, points: 27 },
            poles: RatioGrid { min: 0.3, max: 0.95, points: 40 },
            dos_mode: DosMode::default(),
            epsilons: vec![0.03, 0.01, 0.003, 0.001],
            temperatures: vec![0.0, 0.025, 0.05, 0.075, 0.1],
            continuation: ContinuationSettings::default(),
            dump_grid: false,
            output_dir: PathBuf::from("output"),
            seed: 0,
            threads: 0,
        }
    }
}

/// Every recognised key, in the order they are documented.
pub const KEYS: &[&str] = &[
    "command",
    "parameters",
    "y",
    "u",
    "g_tilde",
    "detuning",
    "temperature",
    "epsilon",
    "atom_number",
    "mode_count",
    "kw",
    "micro_detuning",
    "micro_single_atom_shift",
    "micro_collision_strength",
    "micro_pump_amplitude",
    "micro_atom_number",
    "micro_mode_count",
    "micro_kw",
    "micro_temperature",
    "micro_phonon_damping",
    "ratio",
    "ratio_min",
    "ratio_max",
    "ratio_points",
    "softmode_min",
    "softmode_max",
    "softmode_points",
    "spectral_min",
    "spectral_max",
    "spectral_points",
    "poles_min",
    "poles_max",
    "poles_points",
    "dos_mode",
    "epsilons",
    "temperatures",
    "omega_min",
    "omega_max",
    "omega_points",
    "depth",
    "search_depth",
    "nu_points",
    "smoothing_steps",
    "floor_weight",
    "margin",
    "backend",
    "dump_grid",
    "output_dir",
    "seed",
    "threads",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let th = &mut self.thermo;
        let mi = &mut self.micro;
        let cs = &mut self.continuation;
        match key.trim() {
            "command" => self.command = v.parse()?,
            "parameters" => self.parameters = v.parse()?,
            "y" => th.y = num(key, v)?,
            "u" => th.u = num(key, v)?,
            "g_tilde" => th.g_tilde = num(key, v)?,
            "detuning" => th.detuning = num(key, v)?,
            "temperature" => th.temperature = num(key, v)?,
            "epsilon" => th.epsilon = num(key, v)?,
            "atom_number" => th.atom_number = num(key, v)?,
            "mode_count" => th.mode_count = num(key, v)?,
            "kw" => th.kw = num(key, v)?,
            "micro_detuning" => mi.detuning = num(key, v)?,
            "micro_single_atom_shift" => mi.single_atom_shift = num(key, v)?,
            "micro_collision_strength" => mi.collision_strength = num(key, v)?,
            "micro_pump_amplitude" => mi.pump_amplitude = num(key, v)?,
            "micro_atom_number" => mi.atom_number = num(key, v)?,
            "micro_mode_count" => mi.mode_count = num(key, v)?,
            "micro_kw" => mi.kw = num(key, v)?,
            "micro_temperature" => mi.temperature = num(key, v)?,
            "micro_phonon_damping" => mi.phonon_damping = num(key, v)?,
            "ratio" => self.ratio = num(key, v)?,
            "ratio_min" => self.sweep.min = num(key, v)?,
            "ratio_max" => self.sweep.max = num(key, v)?,
            "ratio_points" => self.sweep.points = num(key, v)?,
            "softmode_min" => self.softmode.min = num(key, v)?,
            "softmode_max" => self.softmode.max = num(key, v)?,
            "softmode_points" => self.softmode.points = num(key, v)?,
            "spectral_min" => self.spectral.min = num(key, v)?,
            "spectral_max" => self.spectral.max = num(key, v)?,
            "spectral_points" => self.spectral.points = num(key, v)?,
            "poles_min" => self.poles.min = num(key, v)?,
            "poles_max" => self.poles.max = num(key, v)?,
            "poles_points" => self.poles.points = num(key, v)?,
            "dos_mode" => self.dos_mode = v.parse()?,
            "epsilons" => self.epsilons = list(key, v)?,
            "temperatures" => self.temperatures = list(key, v)?,
            "omega_min" => cs.omega_min = num(key, v)?,
            "omega_max" => cs.omega_max = num(key, v)?,
            "omega_points" => cs.omega_points = num(key, v)?,
            "depth" => cs.depth = num(key, v)?,
            "search_depth" => cs.search_depth = num(key, v)?,
            "nu_points" => cs.nu_points = num(key, v)?,
            "smoothing_steps" => cs.smoothing_steps = num(key, v)?,
            "floor_weight" => cs.floor_weight = num(key, v)?,
            "margin" => cs.margin = num(key, v)?,
            "backend" => cs.backend = v.parse::<Backend>()?,
            "dump_grid" => self.dump_grid = num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "seed" => self.seed = num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        self.set(k, v)
    }

    /// Reads assignments from `text` on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `name = value`", n + 1)))?;
            self.set(k, v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// The thermodynamic parameters selected by `parameters`.
    pub fn params(&self) -> Result<ThermoParams> {
        let p = match self.parameters {
            ParameterSet::Thermo => self.thermo,
            ParameterSet::Micro => derive_thermo_params(&self.micro)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.continuation.validate()?;
        self.sweep.validate("ratio")?;
        self.softmode.validate("softmode")?;
        self.spectral.validate("spectral")?;
        self.poles.validate("poles")?;
        if !(self.ratio >= 0.0) {
            return Err(Error::Config(format!("ratio must be non-negative, got {}", self.ratio)));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("epsilons must be a non-empty list of positive values".into()));
        }
        if self.temperatures.is_empty() || self.temperatures.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::Config("temperatures must be a non-empty list of non-negative values".into()));
        }
        Ok(())
    }

    /// JSON echo of the resolved configuration.
    pub fn header(&self, version: &str) -> Result<String> {
        let value = serde_json::json!({
            "version": version,
            "config": self,
            "resolved": self.params()?,
        });
        Ok(serde_json::to_string(&value).expect("configuration serializes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params().unwrap(), ThermoParams::default());
        c.validate().unwrap();
    }

    #[test]
    fn assignments_and_comments() {
        let c = RunConfig::parse(
            "command = poles # trailing\nepsilon = 0.003\nepsilons = 0.1, 0.2\ndos_mode = 1d\nbackend = cr\n",
        )
        .unwrap();
        assert_eq!(c.command, Command::Poles);
        assert_eq!(c.thermo.epsilon, 0.003);
        assert_eq!(c.epsilons, vec![0.1, 0.2]);
        assert_eq!(c.dos_mode, DosMode::OneD);
        assert_eq!(c.continuation.backend, Backend::CauchyRiemann);
    }

    #[test]
    fn unknown_keys_fail() {
        let e = RunConfig::parse("epsilon = 0.01\nfoo = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(RunConfig::parse("epsilon 0.01").is_err());
        assert!(RunConfig::parse("mode_count = -3").is_err());
        assert!(RunConfig::default().set_pair("nope=1").is_err());
    }

    #[test]
    fn every_key_is_accepted() {
        let c = RunConfig::default();
        for k in KEYS {
            let sample = match *k {
                "command" => "verify",
                "parameters" => "thermo",
                "dos_mode" => "3d",
                "backend" => "meromorphic",
                "dump_grid" => "true",
                "output_dir" => "out",
                "epsilons" | "temperatures" => "0.01",
                "mode_count" | "omega_points" | "nu_points" | "seed" | "threads" | "ratio_points"
                | "softmode_points" | "spectral_points" | "poles_points" => "64",
                _ => "0.5",
            };
            c.clone().set(k, sample).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
    }

    #[test]
    fn micro_block_defaults_match() {
        let mut c = RunConfig::default();
        c.set("parameters", "micro").unwrap();
        let p = c.params().unwrap();
        let d = ThermoParams::default();
        assert!((p.g_tilde - d.g_tilde).abs() < 1e-12);
        assert_eq!(p.mode_count, d.mode_count);
        assert_eq!(p.u, 0.0);
    }

    #[test]
    fn header_echoes_everything() {
        let h = RunConfig::default().header("1.2.3").unwrap();
        let v: serde_json::Value = serde_json::from_str(&h).unwrap();
        assert_eq!(v["version"], "1.2.3");
        assert_eq!(v["config"]["command"], "damping-sweep");
        assert_eq!(v["config"]["epsilons"].as_array().unwrap().len(), 4);
        assert_eq!(v["resolved"]["mode_count"], 1001);
    }
}
