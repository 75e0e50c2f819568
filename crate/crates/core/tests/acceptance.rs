//! Acceptance criteria, one pass/fail line each.

use std::time::{Duration, Instant};

use polariton_core::bath::DosMode;
use polariton_core::bogoliubov::soft_mode;
use polariton_core::checks;
use polariton_core::continuation::{pole_sweep, spectral_peaks, ContinuationSettings};
use polariton_core::meanfield::{solve_steady_state, MeanField};
use polariton_core::pipeline::{assemble, damping_sweep, linspace, DampingPoint};
use polariton_core::response::{born_markov, spectral_function};
use polariton_core::{critical_coupling, Execution, ThermoParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(t: Duration, limit: f64) -> bool {
    t.as_secs_f64() < limit
}

fn symmetry_suite() -> Outcome {
    let t = Instant::now();
    let c = checks::symmetry_suite(20241014, 50);
    let dt = t.elapsed();
    outcome(c.passed && within(dt, 10.0), format!("max residual {:.2e} in {dt:.1?}", c.value))
}

fn appendix_identities() -> Outcome {
    let t = Instant::now();
    let ratios: Vec<f64> = linspace(0.05, 1.6, 20).into_iter().filter(|r| (r - 1.0).abs() > 1e-3).collect();
    let r = checks::vertex_identities(&ThermoParams::default(), &ratios);
    let dt = t.elapsed();
    match r {
        Ok(v) => outcome(v < 1e-10 && within(dt, 30.0), format!("max residual {v:.2e} over {} pumps in {dt:.1?}", ratios.len())),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn fock_oracle() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (p, r, q) in checks::fock_sets() {
        match checks::fock_deviation(&p, r, q) {
            Ok(d) => worst = worst.max(d),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let dt = t.elapsed();
    outcome(worst < 1e-10 && within(dt, 120.0), format!("max deviation {worst:.2e} in {dt:.1?}"))
}

fn zero_temperature() -> Outcome {
    let ratios = [0.3, 0.629, 0.8, 0.95, 1.2, 1.5];
    match checks::zero_temperature_landau(&ThermoParams::default(), &ratios, DosMode::ThreeD) {
        Ok(v) => outcome(v == 0.0, format!("largest Landau norm/rate {v:e}")),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn sum_rule() -> Outcome {
    let p = ThermoParams::default();
    let mut worst = 0.0f64;
    for r in [0.3, 0.629, 0.95] {
        match checks::sum_rule_error(&p, r, DosMode::ThreeD) {
            Ok(e) => worst = worst.max(e),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(worst < 1e-2, format!("max |weight - 1| = {worst:.2e}"))
}

fn continuation_oracle() -> Outcome {
    let p = ThermoParams::default();
    match checks::continuation_mismatch(&p, 0.629, &ContinuationSettings::default(), DosMode::ThreeD, 2) {
        Ok(e) => outcome(e < 1e-4, format!("max |G_cr - G_direct| = {e:.2e}")),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn soft_mode_curve() -> Outcome {
    let p = ThermoParams::default();
    let t = Instant::now();
    let yc = critical_coupling(&p).unwrap();
    let ratios = linspace(0.0, 1.0 - 1e-5, 100);
    let mut w = Vec::new();
    for &r in &ratios {
        let y = r * yc;
        let mf = match solve_steady_state(&p, y, &MeanField::normal(&p, y)) {
            Ok(m) => m,
            Err(e) => return outcome(false, e.to_string()),
        };
        match soft_mode(&p, &mf) {
            Ok(s) => w.push(s.frequency),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let dt = t.elapsed();
    let analytic = (1.0f64 + 2.0 * p.g_tilde).sqrt();
    let monotone = w.windows(2).all(|x| x[1] < x[0]);
    let start = (w[0] - analytic).abs();
    let end = *w.last().unwrap();
    outcome(
        monotone && start < 1e-3 && end < 1e-2 && within(dt, 60.0),
        format!("w(0) - analytic = {start:.1e}, w(0.99999 y_crit) = {end:.2e}, monotone {monotone}, {dt:.1?}"),
    )
}

/// Peak location, height and interpolated full width at half maximum.
fn peak_shape(x: &[f64], v: &[f64]) -> (f64, f64, f64) {
    let (i, &h) = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let half = 0.5 * h;
    let mut l = i;
    while l > 0 && v[l - 1] > half {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < v.len() && v[r + 1] > half {
        r += 1;
    }
    let cross = |a: usize, b: usize| x[a] + (half - v[a]) * (x[b] - x[a]) / (v[b] - v[a]);
    let left = if l > 0 { cross(l - 1, l) } else { x[0] };
    let right = if r + 1 < v.len() { cross(r, r + 1) } else { x[v.len() - 1] };
    (x[i], h, right - left)
}

fn beliaev_curve() -> Outcome {
    let ratios = linspace(0.3, 1.6, 200);
    let t = Instant::now();
    let mut shapes = Vec::new();
    let mut second = Vec::new();
    for eps in [0.03, 0.01, 0.003, 0.001] {
        let p = ThermoParams { epsilon: eps, ..ThermoParams::default() };
        let pts = match damping_sweep(&p, &ratios, DosMode::ThreeD, Execution::Sequential) {
            Ok(v) => v,
            Err(e) => return outcome(false, e.to_string()),
        };
        let (below, above): (Vec<&DampingPoint>, Vec<&DampingPoint>) = pts.iter().partition(|d| d.ratio < 1.0);
        let x: Vec<f64> = below.iter().map(|d| d.ratio).collect();
        let g: Vec<f64> = below.iter().map(|d| d.result.rate_beliaev).collect();
        shapes.push(peak_shape(&x, &g));
        // an interior local maximum above threshold
        let ga: Vec<f64> = above.iter().map(|d| d.result.rate_beliaev).collect();
        let bump = (1..ga.len().saturating_sub(1)).filter(|&i| ga[i] > ga[i - 1] && ga[i] >= ga[i + 1] && ga[i] > 0.0).count();
        second.push(bump > 0);
    }
    let dt = t.elapsed();
    let located = shapes.iter().all(|s| (s.0 - 0.80).abs() <= 0.05);
    let sharpens = shapes.windows(2).all(|s| s[1].1 > s[0].1 && s[1].2 <= s[0].2);
    let structure = second.iter().all(|b| *b);
    let desc: Vec<String> = shapes.iter().map(|s| format!("({:.3}, {:.3e}, {:.4})", s.0, s.1, s.2)).collect();
    outcome(
        located && sharpens && structure && within(dt, 600.0),
        format!("(peak, height, fwhm) per eps {} ; second structure {structure}; {dt:.1?}", desc.join(" ")),
    )
}

fn temperature_ordering() -> Outcome {
    let temps = linspace(0.0, 0.1, 11);
    let p = ThermoParams::default();
    let yc = critical_coupling(&p).unwrap();
    let mut monotone = true;
    // first (T, y/y_crit) where the Landau rate exceeds the Beliaev rate
    let mut violation: Option<(f64, f64)> = None;
    for r in linspace(0.3, 1.6, 50) {
        let sys = match assemble(&p, r * yc, DosMode::ThreeD, Execution::Parallel) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
        let mut prev = 0.0;
        for &t in &temps {
            let bath = polariton_core::bath::build_bath_spectrum(&sys.bands, &sys.couplings, t, p.epsilon, p.atom_number, DosMode::ThreeD, p.kw).unwrap();
            let bm = born_markov(sys.omega_s(), &bath).unwrap();
            if bm.rate_beliaev < bm.rate_landau && violation.is_none_or(|v| t < v.0) {
                violation = Some((t, r));
            }
            monotone &= if t > 0.0 { bm.rate_landau > prev } else { bm.rate_landau == 0.0 };
            prev = bm.rate_landau;
        }
    }
    let detail = match violation {
        None => format!("gamma_B >= gamma_L everywhere for T <= 0.1, gamma_L increasing in T {monotone}"),
        Some((t, r)) => format!("gamma_L > gamma_B from T = {t:.2} (first at y/y_crit = {r:.3}), gamma_L increasing in T {monotone}"),
    };
    outcome(violation.is_none() && monotone, detail)
}

fn spectral_crossing() -> Outcome {
    let p = ThermoParams::default();
    let yc = critical_coupling(&p).unwrap();
    let grid = linspace(0.0, 3.0, 3001);
    let ratios = linspace(0.3, 0.95, 27);
    let mut map = Vec::new();
    for &r in &ratios {
        let sys = assemble(&p, r * yc, DosMode::ThreeD, Execution::Parallel).unwrap();
        let rho = spectral_function(&sys.green(), &grid, Execution::Parallel).unwrap();
        let mut peaks: Vec<f64> = spectral_peaks(&grid, &rho, 2).into_iter().map(|x| x.0).collect();
        peaks.sort_by(f64::total_cmp);
        map.push((r, sys.omega_s(), peaks));
    }
    let two = map.iter().all(|m| m.2.len() == 2);
    if !two {
        return outcome(false, "fewer than two peaks somewhere in the scan".into());
    }
    let (first, last) = (&map[0], &map[map.len() - 1]);
    // the polariton-like peak moves from the upper to the lower branch
    let swap = (first.2[1] - first.1).abs() < 0.02 && (last.2[0] - last.1).abs() < 0.02;
    let (at, gap) = map
        .iter()
        .map(|m| (m.0, m.2[1] - m.2[0]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    outcome(
        swap && gap > 0.0 && (at - 0.8).abs() <= 0.1,
        format!("minimum peak gap {gap:.4} at y/y_crit = {at:.3}, branch exchange {swap}"),
    )
}

fn pole_trajectories() -> Outcome {
    let p = ThermoParams::default();
    let ratios = linspace(0.3, 0.95, 40);
    let sweep = match pole_sweep(&p, &ratios, &ContinuationSettings::default(), DosMode::ThreeD, Execution::Parallel) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let tr = &sweep.trajectories;
    let Some((i, gap)) = tr.closest_approach() else {
        return outcome(false, "no point with two poles".into());
    };
    let (a, b) = (tr.first[i].unwrap(), tr.second[i].unwrap());
    let narrow = a.im.abs().min(b.im.abs());
    let factor = sweep.born_markov_rate[i] / narrow;
    outcome(
        gap > 0.0 && (3.0..=30.0).contains(&factor),
        format!("min Re gap {gap:.4} at y/y_crit = {:.3}; gamma_BM / |Im z| = {factor:.1}", ratios[i]),
    )
}

fn density_scaling() -> Outcome {
    let p = ThermoParams::default();
    let ratios = linspace(0.7, 0.9, 41);
    let peak = |q: &ThermoParams| -> polariton_core::Result<f64> {
        let pts = damping_sweep(q, &ratios, DosMode::ThreeD, Execution::Parallel)?;
        Ok(pts.iter().map(|d| d.result.rate_beliaev).fold(0.0, f64::max))
    };
    let (a, b) = match (peak(&p), peak(&p.scaled_system(2))) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let change = (b - a).abs() / a;
    // rates scale linearly with the squared coupling
    let sys = assemble(&p, 0.629 * critical_coupling(&p).unwrap(), DosMode::ThreeD, Execution::Parallel).unwrap();
    let base = born_markov(sys.omega_s(), &sys.bath).unwrap().rate_beliaev;
    let linear = [0.5, 2.0, 3.0].iter().all(|&s| {
        let scaled = born_markov(sys.omega_s(), &sys.bath.with_coupling_scale(f64::sqrt(s))).unwrap().rate_beliaev;
        ((scaled - s * base) / (s * base)).abs() < 1e-12
    });
    outcome(
        change < 1e-2 && linear,
        format!("peak gamma_B {a:.5e} -> {b:.5e} ({:.3}%), linear in coupling^2 {linear}", 100.0 * change),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("symmetry suite", symmetry_suite),
        ("commutator identities", appendix_identities),
        ("fock-space oracle", fock_oracle),
        ("zero-temperature landau", zero_temperature),
        ("spectral sum rule", sum_rule),
        ("continuation oracle", continuation_oracle),
        ("soft-mode curve", soft_mode_curve),
        ("beliaev rate family", beliaev_curve),
        ("temperature ordering", temperature_ordering),
        ("spectral avoided crossing", spectral_crossing),
        ("pole trajectories", pole_trajectories),
        ("density scaling", density_scaling),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let o = f();
        println!("criterion {:>2} {:<26} {}  {}", n + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        // ACCEPTANCE_STRICT=1 turns failures into a non-zero exit
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
