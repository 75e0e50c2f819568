pub mod bath;
pub mod bogoliubov;
pub mod checks;
pub mod config;
pub mod continuation;
pub mod coupling;
pub mod error;
pub mod exec;
pub mod fock;
pub mod hamiltonian;
pub mod meanfield;
pub mod model;
pub mod pipeline;
pub mod response;

pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
pub use meanfield::MeanField;
pub use model::{critical_coupling, derive_thermo_params, MicroParams, ThermoParams};
