use std::path::PathBuf;

use polariton_core::bath::build_bath_spectrum;
use polariton_core::bogoliubov::{momentum_grid, phonon_bands, soft_mode, Fluctuations};
use polariton_core::checks::{self, Check};
use polariton_core::config::{Command, RunConfig};
use polariton_core::continuation::{continue_green, pole_sweep, spectral_peaks};
use polariton_core::exec;
use polariton_core::meanfield::{residual_norm, solve_steady_state, sweep_mean_field};
use polariton_core::pipeline::assemble;
use polariton_core::response::{born_markov, spectral_function};
use polariton_core::{critical_coupling, Error, Execution, MeanField, Result, ThermoParams};
use serde_json::json;

use crate::output::{columns, ensure_dir, Csv, Jsonl};

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(&cfg.output_dir)?;
    let threads = (cfg.threads > 0).then_some(cfg.threads);
    let ex = if cfg.threads == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    exec::with_threads(threads, || {
        let p = cfg.params()?;
        let mut checks = Vec::new();
        let files = match cfg.command {
            Command::Meanfield => vec![meanfield(cfg, &p)?],
            Command::Bands => vec![bands(cfg, &p, ex)?],
            Command::Softmode => vec![softmode(cfg, &p, ex)?],
            Command::DampingSweep => vec![damping_sweep(cfg, &p, ex)?],
            Command::TemperatureSweep => vec![temperature_sweep(cfg, &p, ex)?],
            Command::Spectral => spectral(cfg, &p, ex)?,
            Command::Poles => poles(cfg, &p, ex)?,
            Command::Verify => {
                checks = checks::run_all(&p, &cfg.continuation, cfg.dos_mode, cfg.seed);
                vec![verify_table(cfg, &checks)?]
            }
        };
        Ok(Outcome { files, checks })
    })
}

fn meanfield(cfg: &RunConfig, p: &ThermoParams) -> Result<PathBuf> {
    let yc = critical_coupling(p)?;
    let ratios = cfg.sweep.values();
    let ys: Vec<f64> = ratios.iter().map(|r| r * yc).collect();
    let mfs = sweep_mean_field(p, &ys)?;
    let mut csv = Csv::create(cfg, "meanfield.csv", &columns(&["ratio", "y", "alpha", "beta", "gamma", "mu", "residual"]))?;
    for (r, mf) in ratios.iter().zip(&mfs) {
        csv.row(&[*r, mf.y, mf.alpha, mf.beta, mf.gamma, mf.mu, residual_norm(p, mf)])?;
    }
    csv.finish()
}

fn bands(cfg: &RunConfig, p: &ThermoParams, ex: Execution) -> Result<PathBuf> {
    let y = cfg.ratio * critical_coupling(p)?;
    let mf = solve_steady_state(p, y, &MeanField::normal(p, y))?;
    let table = phonon_bands(&Fluctuations::new(p, &mf), &momentum_grid(p.mode_count), ex)?;
    let mut csv = Csv::create(cfg, "bands.csv", &columns(&["q", "omega_1", "omega_2", "omega_3"]))?;
    for (q, set) in table.q.iter().zip(&table.modes) {
        let mut row = vec![*q];
        row.extend(&set.frequencies);
        csv.row(&row)?;
    }
    csv.finish()
}

fn softmode(cfg: &RunConfig, p: &ThermoParams, ex: Execution) -> Result<PathBuf> {
    let yc = critical_coupling(p)?;
    let ratios = cfg.softmode.values();
    let freqs = exec::try_map(ex, &ratios, |&r| {
        let y = r * yc;
        let mf = solve_steady_state(p, y, &MeanField::normal(p, y))?;
        Ok::<_, Error>(soft_mode(p, &mf)?.frequency)
    })?;
    let mut csv = Csv::create(cfg, "softmode.csv", &columns(&["ratio", "y", "omega_s"]))?;
    for (r, w) in ratios.iter().zip(freqs) {
        csv.row(&[*r, r * yc, w])?;
    }
    csv.finish()
}

fn damping_sweep(cfg: &RunConfig, p: &ThermoParams, ex: Execution) -> Result<PathBuf> {
    let yc = critical_coupling(p)?;
    let ratios = cfg.sweep.values();
    let rows = exec::try_map(ex, &ratios, |&r| {
        let mut sys = assemble(p, r * yc, cfg.dos_mode, Execution::Sequential)?;
        let mut row = vec![r, r * yc, sys.omega_s()];
        for &e in &cfg.epsilons {
            sys.bath.epsilon = e;
            let bm = born_markov(sys.omega_s(), &sys.bath)?;
            row.push(bm.rate_beliaev);
        }
        Ok::<_, Error>(row)
    })?;
    let mut names = columns(&["ratio", "y", "omega_s"]);
    names.extend(cfg.epsilons.iter().map(|e| format!("gamma_b_eps_{e}")));
    let mut csv = Csv::create(cfg, "damping_sweep.csv", &names)?;
    for row in rows {
        csv.row(&row)?;
    }
    csv.finish()
}

fn temperature_sweep(cfg: &RunConfig, p: &ThermoParams, ex: Execution) -> Result<PathBuf> {
    let yc = critical_coupling(p)?;
    let ratios = cfg.sweep.values();
    let rows = exec::try_map(ex, &ratios, |&r| {
        let sys = assemble(p, r * yc, cfg.dos_mode, Execution::Sequential)?;
        let mut row = vec![r, r * yc, sys.omega_s()];
        for &t in &cfg.temperatures {
            let bath = build_bath_spectrum(&sys.bands, &sys.couplings, t, p.epsilon, p.atom_number, cfg.dos_mode, p.kw)?;
            let bm = born_markov(sys.omega_s(), &bath)?;
            row.push(bm.rate_landau);
            row.push(bm.rate_beliaev);
        }
        Ok::<_, Error>(row)
    })?;
    let mut names = columns(&["ratio", "y", "omega_s"]);
    for t in &cfg.temperatures {
        names.push(format!("gamma_l_t_{t}"));
        names.push(format!("gamma_b_t_{t}"));
    }
    let mut csv = Csv::create(cfg, "temperature_sweep.csv", &names)?;
    for row in rows {
        csv.row(&row)?;
    }
    csv.finish()
}

fn omega_grid(cfg: &RunConfig) -> Vec<f64> {
    let s = &cfg.continuation;
    (0..s.omega_points).map(|j| s.omega_min + j as f64 * s.step()).collect()
}

fn spectral(cfg: &RunConfig, p: &ThermoParams, ex: Execution) -> Result<Vec<PathBuf>> {
    let yc = critical_coupling(p)?;
    let ratios = cfg.spectral.values();
    let grid = omega_grid(cfg);
    let rhos = exec::try_map(ex, &ratios, |&r| {
        let sys = assemble(p, r * yc, cfg.dos_mode, Execution::Sequential)?;
        spectral_function(&sys.green(), &grid, Execution::Sequential)
    })?;
    let mut csv = Csv::create(cfg, "spectral.csv", &columns(&["ratio", "omega", "rho"]))?;
    let mut peaks = Csv::create(cfg, "spectral_peaks.csv", &columns(&["ratio", "peak_1", "peak_2"]))?;
    for (r, rho) in ratios.iter().zip(&rhos) {
        for (w, v) in grid.iter().zip(rho) {
            csv.row(&[*r, *w, *v])?;
        }
        let mut found: Vec<f64> = spectral_peaks(&grid, rho, 2).into_iter().map(|p| p.0).collect();
        found.sort_by(f64::total_cmp);
        found.resize(2, f64::NAN);
        peaks.row(&[*r, found[0], found[1]])?;
    }
    Ok(vec![csv.finish()?, peaks.finish()?])
}

fn poles(cfg: &RunConfig, p: &ThermoParams, ex: Execution) -> Result<Vec<PathBuf>> {
    let ratios = cfg.poles.values();
    let sweep = pole_sweep(p, &ratios, &cfg.continuation, cfg.dos_mode, ex)?;
    let tr = &sweep.trajectories;
    let mut csv = Csv::create(
        cfg,
        "poles.csv",
        &columns(&["ratio", "re_z1", "im_z1", "re_z2", "im_z2", "omega_s", "gamma_b_born_markov"]),
    )?;
    let nan = num_complex_nan();
    for i in 0..ratios.len() {
        let a = tr.first[i].unwrap_or(nan);
        let b = tr.second[i].unwrap_or(nan);
        csv.row(&[ratios[i], a.re, a.im, b.re, b.im, sweep.omega_s[i], sweep.born_markov_rate[i]])?;
    }
    let mut files = vec![csv.finish()?];
    if cfg.dump_grid {
        let yc = critical_coupling(p)?;
        let mut dump = Jsonl::create(cfg, "poles_grid.jsonl")?;
        for (r, set) in ratios.iter().zip(&sweep.sets) {
            let sys = assemble(p, r * yc, cfg.dos_mode, ex)?;
            let g = continue_green(
                sys.omega_s(),
                &sys.bath,
                polariton_core::response::Channels::BELIAEV,
                &cfg.continuation,
                ex,
            )?;
            let re: Vec<Vec<f64>> = g.values.iter().map(|row| row.iter().map(|z| z.re).collect()).collect();
            let im: Vec<Vec<f64>> = g.values.iter().map(|row| row.iter().map(|z| z.im).collect()).collect();
            dump.line(&json!({
                "ratio": r,
                "poles": set,
                "omega": g.omega,
                "nu": g.nu,
                "re": re,
                "im": im,
            }))?;
        }
        files.push(dump.finish()?);
    }
    Ok(files)
}

fn num_complex_nan() -> polariton_core::bath::C64 {
    polariton_core::bath::C64::new(f64::NAN, f64::NAN)
}

fn verify_table(cfg: &RunConfig, checks: &[Check]) -> Result<PathBuf> {
    let path = cfg.output_dir.join("verify.csv");
    let mut text = format!("# {}\nname,value,tolerance,passed\n", cfg.header(crate::output::VERSION)?);
    for c in checks {
        text.push_str(&format!("{},{},{},{}\n", c.name, c.value, c.tolerance, c.passed));
    }
    std::fs::write(&path, text)?;
    Ok(path)
}
