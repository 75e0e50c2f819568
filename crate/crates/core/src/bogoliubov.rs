//! Linear fluctuation matrices and their symplectic diagonalization.

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::hamiltonian::{self, Expansion};
use crate::meanfield::{self, MeanField};
use crate::model::{critical_coupling, ThermoParams};

pub type C64 = Complex64;
pub type CVec6 = Vector6<C64>;
pub type CMat6 = Matrix6<C64>;

/// Polariton frequencies below this magnitude belong to the condensate
/// phase mode.
pub const ZERO_MODE_THRESHOLD: f64 = 1e-4;
pub const OVERLAP_THRESHOLD: f64 = 0.5;

const REAL_TOLERANCE: f64 = 1e-8;
const CLUSTER_TOLERANCE: f64 = 1e-8;

pub fn gamma_matrix() -> CMat6 {
    let mut g = CMat6::zeros();
    for i in 0..3 {
        g[(2 * i, 2 * i + 1)] = C64::new(1.0, 0.0);
        g[(2 * i + 1, 2 * i)] = C64::new(1.0, 0.0);
    }
    g
}

pub fn omega_matrix() -> CMat6 {
    let mut o = CMat6::zeros();
    for i in 0..6 {
        o[(i, i)] = C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    o
}

/// `(Gamma v)_i = v_{i^1}`.
pub fn gamma_apply(v: &CVec6) -> CVec6 {
    CVec6::from_fn(|i, _| v[i ^ 1])
}

pub fn omega_apply(v: &CVec6) -> CVec6 {
    CVec6::from_fn(|i, _| if i % 2 == 0 { v[i] } else { -v[i] })
}

/// `a^dagger Omega b`.
pub fn omega_inner(a: &CVec6, b: &CVec6) -> C64 {
    (0..6).fold(C64::new(0.0, 0.0), |acc, i| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc + a[i].conj() * b[i] * s
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sector {
    Polariton,
    Phonon { q: f64 },
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::Polariton => write!(f, "polariton"),
            Sector::Phonon { q } => write!(f, "phonon q={q}"),
        }
    }
}

/// Positive-frequency normal modes of one fluctuation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub sector: Sector,
    pub frequencies: Vec<f64>,
    pub right: Vec<CVec6>,
    pub left: Vec<CVec6>,
    /// Number of eigenvalues set aside as zero modes.
    pub zero_modes: usize,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Negative-frequency partner `Gamma r*` of mode `i`.
    pub fn partner(&self, i: usize) -> CVec6 {
        gamma_apply(&self.right[i].conjugate())
    }

    pub fn permuted(&self, order: &[usize]) -> ModeSet {
        ModeSet {
            sector: self.sector,
            frequencies: order.iter().map(|&i| self.frequencies[i]).collect(),
            right: order.iter().map(|&i| self.right[i]).collect(),
            left: order.iter().map(|&i| self.left[i]).collect(),
            zero_modes: self.zero_modes,
        }
    }
}

/// Mean-field-dependent part of the linear problem, shared by every `q`.
#[derive(Debug, Clone)]
pub struct Fluctuations {
    pub mean_field: MeanField,
    pub expansion: Expansion,
}

impl Fluctuations {
    pub fn new(p: &ThermoParams, mf: &MeanField) -> Self {
        Self {
            mean_field: *mf,
            expansion: hamiltonian::expand(p, mf),
        }
    }

    pub fn polariton_matrix(&self) -> CMat6 {
        self.expansion.f
    }

    pub fn phonon_matrix(&self, q: f64) -> Result<CMat6> {
        if q == 0.0 || !q.is_finite() || q.abs() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "phonon momentum must lie in (-k/2, k/2) without 0, got {q}"
            )));
        }
        Ok(self.expansion.g_static + hamiltonian::kinetic_block(q))
    }
}

pub fn build_polariton_matrix(p: &ThermoParams, mf: &MeanField) -> CMat6 {
    Fluctuations::new(p, mf).polariton_matrix()
}

pub fn build_phonon_matrix(p: &ThermoParams, mf: &MeanField, q: f64) -> Result<CMat6> {
    Fluctuations::new(p, mf).phonon_matrix(q)
}

fn max_abs(m: &CMat6) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// `max |Gamma M Gamma + partner*|` and `max |Omega M Omega - M^dagger|`.
pub fn symmetry_residuals(m: &CMat6, partner: &CMat6) -> (f64, f64) {
    let g = gamma_matrix();
    let o = omega_matrix();
    (
        max_abs(&(g * m * g + partner.conjugate())),
        max_abs(&(o * m * o - m.adjoint())),
    )
}

/// Symplectic eigen-decomposition of a Gamma/Omega-symmetric matrix.
pub fn diagonalize(m: &CMat6, sector: Sector) -> Result<ModeSet> {
    let scale = max_abs(m).max(1.0);
    let eig = m
        .clone_owned()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::DefectiveSpectrum {
            sector: sector.to_string(),
            detail: "Schur decomposition failed".into(),
        })?;
    let mut values: Vec<C64> = eig.iter().copied().collect();
    values.sort_by(|a, b| a.re.total_cmp(&b.re));

    // only the polariton sector carries the condensate phase mode
    let threshold = match sector {
        Sector::Polariton => ZERO_MODE_THRESHOLD,
        Sector::Phonon { .. } => 0.0,
    };
    let zero_modes = values.iter().filter(|z| z.norm() < threshold).count();
    let finite: Vec<C64> = values
        .iter()
        .copied()
        .filter(|z| z.norm() >= threshold)
        .collect();
    let max_imag = finite.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    if finite
        .iter()
        .any(|z| z.im.abs() > REAL_TOLERANCE * z.norm().max(1.0))
    {
        return Err(Error::NonRealSpectrum {
            sector: sector.to_string(),
            max_imag,
        });
    }
    if zero_modes % 2 != 0 {
        return Err(Error::DefectiveSpectrum {
            sector: sector.to_string(),
            detail: format!("odd number of zero modes ({zero_modes})"),
        });
    }
    let positive: Vec<f64> = finite.iter().filter(|z| z.re > 0.0).map(|z| z.re).collect();
    let negative = finite.iter().filter(|z| z.re < 0.0).count();
    if positive.len() != negative {
        return Err(Error::DefectiveSpectrum {
            sector: sector.to_string(),
            detail: "eigenvalues are not paired".into(),
        });
    }

    // group degenerate eigenvalues
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for w in positive {
        match clusters.last_mut() {
            Some(cl) if (w - cl[0]).abs() <= CLUSTER_TOLERANCE * w.max(1.0) => cl.push(w),
            _ => clusters.push(vec![w]),
        }
    }

    let mut frequencies = Vec::new();
    let mut right = Vec::new();
    for cl in clusters {
        let w0 = cl.iter().sum::<f64>() / cl.len() as f64;
        let vecs = null_space(m, w0, cl.len());
        let vecs = omega_orthonormalize(vecs, &sector)?;
        for r in vecs {
            let r = fix_phase(r);
            let mr = m * r;
            let w = omega_inner(&r, &mr).re;
            let resid = (mr - r * C64::new(w, 0.0)).norm();
            if resid > 1e-8 * scale {
                return Err(Error::DefectiveSpectrum {
                    sector: sector.to_string(),
                    detail: format!("eigenvector residual {resid:e} at w = {w}"),
                });
            }
            frequencies.push(w);
            right.push(r);
        }
    }
    let mut order: Vec<usize> = (0..frequencies.len()).collect();
    order.sort_by(|&a, &b| frequencies[a].total_cmp(&frequencies[b]));
    let left = right.iter().map(omega_apply).collect::<Vec<_>>();
    Ok(ModeSet {
        sector,
        frequencies,
        right,
        left,
        zero_modes,
    }
    .permuted(&order))
}

fn null_space(m: &CMat6, w: f64, k: usize) -> Vec<CVec6> {
    let shifted = m - CMat6::identity() * C64::new(w, 0.0);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut idx: Vec<usize> = (0..6).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    idx.iter()
        .take(k)
        .map(|&i| v_t.row(i).adjoint())
        .collect()
}

fn omega_orthonormalize(vecs: Vec<CVec6>, sector: &Sector) -> Result<Vec<CVec6>> {
    let mut out: Vec<CVec6> = Vec::with_capacity(vecs.len());
    for mut v in vecs {
        for u in &out {
            let proj = omega_inner(u, &v);
            v -= u * proj;
        }
        let n = omega_inner(&v, &v).re;
        if !(n > 1e-12 * v.norm_squared()) {
            return Err(Error::DefectiveSpectrum {
                sector: sector.to_string(),
                detail: format!("positive-frequency mode with non-positive norm {n:e}"),
            });
        }
        out.push(v / C64::new(n.sqrt(), 0.0));
    }
    Ok(out)
}

/// Rotates `v` so that its largest-magnitude component is real and positive.
fn fix_phase(v: CVec6) -> CVec6 {
    let mut best = 0;
    for i in 1..6 {
        if v[i].norm() > v[best].norm() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let ph = v[best] / v[best].norm();
    v * ph.conj()
}

/// Ordered Bloch momenta `n / M` for `n = 1 .. (M-1)/2` (positive half).
pub fn positive_momenta(mode_count: u32) -> Vec<f64> {
    let m = f64::from(mode_count);
    (1..=(mode_count.saturating_sub(1) / 2))
        .map(|n| f64::from(n) / m)
        .collect()
}

/// The full phonon grid `q_n = n / M`, `n = -(M-1)/2 .. (M-1)/2`, `n != 0`,
/// in ascending order.
pub fn momentum_grid(mode_count: u32) -> Vec<f64> {
    let pos = positive_momenta(mode_count);
    pos.iter().rev().map(|q| -q).chain(pos.iter().copied()).collect()
}

/// Per-q mode sets with consistent band labels.
#[derive(Debug, Clone)]
pub struct BandTable {
    pub q: Vec<f64>,
    pub modes: Vec<ModeSet>,
}

impl BandTable {
    pub fn frequency(&self, band: usize, iq: usize) -> f64 {
        self.modes[iq].frequencies[band]
    }
}

fn best_assignment(prev: &ModeSet, next: &ModeSet) -> (Vec<usize>, f64) {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best = (vec![0, 1, 2], -1.0, -1.0);
    for perm in PERMS {
        let ov: Vec<f64> = (0..3)
            .map(|b| omega_inner(&prev.right[b], &next.right[perm[b]]).norm())
            .collect();
        let total: f64 = ov.iter().sum();
        let worst = ov.iter().copied().fold(f64::INFINITY, f64::min);
        if total > best.2 + 1e-12 {
            best = (perm.to_vec(), worst, total);
        }
    }
    (best.0, best.1)
}

/// Diagonalizes `G(q)` on `q_grid` and labels the bands by overlap
/// continuity, starting from energy order at the smallest `|q|` of each
/// half of the grid.
pub fn phonon_bands(fl: &Fluctuations, q_grid: &[f64], exec: Execution) -> Result<BandTable> {
    let raw = exec::try_map(exec, q_grid, |&q| {
        diagonalize(&fl.phonon_matrix(q)?, Sector::Phonon { q })
    })?;
    for set in &raw {
        if set.len() != 3 {
            return Err(Error::DefectiveSpectrum {
                sector: set.sector.to_string(),
                detail: format!("{} positive modes instead of 3", set.len()),
            });
        }
    }
    let mut modes: Vec<Option<ModeSet>> = raw.into_iter().map(Some).collect();
    let mut out: Vec<Option<ModeSet>> = vec![None; q_grid.len()];
    for positive_half in [true, false] {
        let mut idx: Vec<usize> = (0..q_grid.len())
            .filter(|&i| (q_grid[i] > 0.0) == positive_half)
            .collect();
        idx.sort_by(|&a, &b| q_grid[a].abs().total_cmp(&q_grid[b].abs()));
        let mut prev: Option<ModeSet> = None;
        for i in idx {
            let set = modes[i].take().unwrap();
            let labelled = match &prev {
                None => set,
                Some(pr) => {
                    let (perm, worst) = best_assignment(pr, &set);
                    if worst < OVERLAP_THRESHOLD {
                        return Err(Error::AmbiguousMode {
                            context: format!("phonon bands at q = {}", q_grid[i]),
                            best_overlap: worst,
                        });
                    }
                    set.permuted(&perm)
                }
            };
            prev = Some(labelled.clone());
            out[i] = Some(labelled);
        }
    }
    Ok(BandTable {
        q: q_grid.to_vec(),
        modes: out.into_iter().map(Option::unwrap).collect(),
    })
}

/// The soft polariton: index into the polariton [`ModeSet`] plus its frequency.
#[derive(Debug, Clone)]
pub struct SoftMode {
    pub frequency: f64,
    pub index: usize,
    pub modes: ModeSet,
}

impl SoftMode {
    pub fn right(&self) -> CVec6 {
        self.modes.right[self.index]
    }
    pub fn left(&self) -> CVec6 {
        self.modes.left[self.index]
    }
}

const SOFT_TRACK_STEPS: usize = 24;

fn polariton_modes(p: &ThermoParams, y: f64, seed: &MeanField) -> Result<(MeanField, ModeSet)> {
    let mf = meanfield::solve_steady_state(p, y, seed)?;
    let set = diagonalize(&build_polariton_matrix(p, &mf), Sector::Polariton)?;
    Ok((mf, set))
}

/// Identifies the soft mode at `mf` by following the polariton branch that
/// is lowest close to threshold (on the same side as `mf.y`) out to `mf.y`.
pub fn soft_mode(p: &ThermoParams, mf: &MeanField) -> Result<SoftMode> {
    let y_crit = critical_coupling(p)?;
    let target = diagonalize(&build_polariton_matrix(p, mf), Sector::Polariton)?;
    if target.is_empty() {
        return Err(Error::AmbiguousMode {
            context: format!("no finite polariton mode at y = {}", mf.y),
            best_overlap: 0.0,
        });
    }
    let start_y = if mf.y < y_crit { 0.99 * y_crit } else { 1.01 * y_crit };
    let (mut seed, mut set) = polariton_modes(p, start_y, &MeanField::normal(p, 0.0))?;
    let mut index = 0;
    for step in 1..=SOFT_TRACK_STEPS {
        let t = step as f64 / SOFT_TRACK_STEPS as f64;
        let y = start_y + (mf.y - start_y) * t;
        let next = if step == SOFT_TRACK_STEPS {
            target.clone()
        } else {
            let (s, n) = polariton_modes(p, y, &seed)?;
            seed = s;
            n
        };
        let reference = set.right[index];
        let (best, overlap) = next
            .right
            .iter()
            .enumerate()
            .map(|(i, r)| (i, omega_inner(&reference, r).norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if overlap < OVERLAP_THRESHOLD {
            return Err(Error::AmbiguousMode {
                context: format!("soft mode tracking at y = {y}"),
                best_overlap: overlap,
            });
        }
        index = best;
        set = next;
    }
    Ok(SoftMode {
        frequency: set.frequencies[index],
        index,
        modes: set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::solve_steady_state;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn free() -> ThermoParams {
        ThermoParams {
            g_tilde: 0.0,
            ..ThermoParams::default()
        }
    }

    #[test]
    fn free_polariton_spectrum() {
        let p = free();
        let mf = MeanField::normal(&p, 0.0);
        let set = diagonalize(&build_polariton_matrix(&p, &mf), Sector::Polariton).unwrap();
        assert_eq!(set.zero_modes, 2);
        assert_eq!(set.len(), 2);
        assert!((set.frequencies[0] - 1.0).abs() < 1e-12);
        assert!((set.frequencies[1] - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn collisional_c0_frequency() {
        let p = ThermoParams::default();
        let mf = MeanField::normal(&p, 0.0);
        let set = diagonalize(&build_polariton_matrix(&p, &mf), Sector::Polariton).unwrap();
        assert!((set.frequencies[0] - 1.2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn free_phonon_dispersion() {
        let p = free();
        let fl = Fluctuations::new(&p, &MeanField::normal(&p, 0.0));
        let set = diagonalize(&fl.phonon_matrix(0.3).unwrap(), Sector::Phonon { q: 0.3 }).unwrap();
        for (w, e) in set.frequencies.iter().zip([0.09, 0.49, 1.69]) {
            assert!((w - e).abs() < 1e-12, "{w} vs {e}");
        }
        // canonical unit vectors for the b band
        assert!((set.right[0][0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bogoliubov_dispersion_small_q() {
        let p = ThermoParams::default();
        let fl = Fluctuations::new(&p, &MeanField::normal(&p, 0.0));
        for q in [0.001, 0.01, 0.05] {
            let set = diagonalize(&fl.phonon_matrix(q).unwrap(), Sector::Phonon { q }).unwrap();
            let e = q * q;
            let exact = (e * (e + 2.0 * p.g_tilde)).sqrt();
            assert!((set.frequencies[0] - exact).abs() < 1e-10 * exact.max(1e-3));
        }
    }

    #[test]
    fn symmetric_in_momentum() {
        let p = ThermoParams::default();
        let mf = solve_steady_state(&p, 1.3 * critical_coupling(&p).unwrap(), &MeanField::normal(&p, 0.0)).unwrap();
        let fl = Fluctuations::new(&p, &mf);
        for q in [0.07, 0.23, 0.41] {
            let a = diagonalize(&fl.phonon_matrix(q).unwrap(), Sector::Phonon { q }).unwrap();
            let b = diagonalize(&fl.phonon_matrix(-q).unwrap(), Sector::Phonon { q: -q }).unwrap();
            for (x, y) in a.frequencies.iter().zip(&b.frequencies) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_zero_momentum() {
        let p = ThermoParams::default();
        assert!(build_phonon_matrix(&p, &MeanField::normal(&p, 0.0), 0.0).is_err());
    }

    #[test]
    fn band_edges() {
        let p = free();
        let fl = Fluctuations::new(&p, &MeanField::normal(&p, 0.0));
        let grid = momentum_grid(1001);
        let bands = phonon_bands(&fl, &grid, Execution::Sequential).unwrap();
        let last = grid.len() - 1;
        let edge = grid[last];
        assert!((bands.frequency(0, last) - edge * edge).abs() < 1e-12);
        assert!((bands.frequency(1, last) - (1.0 - edge).powi(2)).abs() < 1e-12);
        assert!((bands.frequency(1, last) - 0.25).abs() < 2e-3);
        assert!((bands.frequency(0, last) - 0.25).abs() < 2e-3);

        let p = ThermoParams::default();
        let fl = Fluctuations::new(&p, &MeanField::normal(&p, 0.0));
        let bands = phonon_bands(&fl, &grid, Execution::Parallel).unwrap();
        let w1 = bands.frequency(0, last);
        assert!(w1 > 0.25 && w1 < 0.4, "{w1}");
        // middle and upper bands meet near q = 0 at the y = 0 polariton frequency
        let mid = grid.len() / 2;
        let gap = bands.frequency(2, mid) - bands.frequency(1, mid);
        assert!(gap < 0.01);
        let touch = 0.5 * (bands.frequency(2, mid) + bands.frequency(1, mid));
        assert!((touch - 1.2f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn soft_mode_at_zero_pump() {
        let p = ThermoParams::default();
        let s = soft_mode(&p, &MeanField::normal(&p, 0.0)).unwrap();
        assert!((s.frequency - 1.2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn soft_mode_softens_at_threshold() {
        let p = ThermoParams::default();
        let yc = critical_coupling(&p).unwrap();
        let mut last = f64::INFINITY;
        for r in [0.2, 0.5, 0.8, 0.95, 0.999] {
            let mf = MeanField::normal(&p, r * yc);
            let s = soft_mode(&p, &mf).unwrap();
            assert!(s.frequency < last);
            last = s.frequency;
        }
        assert!(last < 0.06);
        let mf = solve_steady_state(&p, 1.001 * yc, &MeanField::normal(&p, 0.0)).unwrap();
        assert!(soft_mode(&p, &mf).unwrap().frequency < 0.1);
    }

    fn random_hermitian<R: Rng>(rng: &mut R) -> CMat6 {
        let mut k = CMat6::zeros();
        for i in 0..6 {
            for j in i..6 {
                let z = if i == j {
                    C64::new(rng.random_range(-0.3..0.3), 0.0)
                } else {
                    C64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
                };
                k[(i, j)] = z;
                k[(j, i)] = z.conj();
            }
        }
        // enforce Gamma K Gamma = K*
        let g = gamma_matrix();
        (k + g * k.conjugate() * g) * C64::new(0.5, 0.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn recovers_planted_spectrum(seed in 0u64..u64::MAX, w1 in 0.05f64..3.0, w2 in 0.05f64..3.0, w3 in 0.05f64..3.0) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let k = random_hermitian(&mut rng);
            let o = omega_matrix();
            // T = exp(i Omega K) is Omega-unitary and commutes with the Gamma structure
            let t = (o * k * C64::new(0.0, 1.0)).exp();
            let tinv = t.try_inverse().unwrap();
            let mut d = CMat6::zeros();
            for (i, w) in [w1, w2, w3].into_iter().enumerate() {
                d[(2 * i, 2 * i)] = C64::new(w, 0.0);
                d[(2 * i + 1, 2 * i + 1)] = C64::new(-w, 0.0);
            }
            let m = tinv * d * t;
            let (rg, ro) = symmetry_residuals(&m, &m);
            prop_assert!(rg < 1e-10 && ro < 1e-10);
            let mut planted = vec![w1, w2, w3];
            planted.sort_by(f64::total_cmp);
            prop_assume!(planted[1] - planted[0] > 1e-3 && planted[2] - planted[1] > 1e-3);
            let set = diagonalize(&m, Sector::Polariton).unwrap();
            prop_assert_eq!(set.len(), 3);
            for (a, b) in set.frequencies.iter().zip(&planted) {
                prop_assert!((a - b).abs() < 1e-8);
            }
            for i in 0..3 {
                for j in 0..3 {
                    let n = omega_inner(&set.right[i], &set.right[j]);
                    let e = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((n - C64::new(e, 0.0)).norm() < 1e-10);
                    let rc = set.left[i].dotc(&set.right[j]);
                    prop_assert!((rc - C64::new(e, 0.0)).norm() < 1e-10);
                    let cross = omega_inner(&set.right[i], &set.partner(j));
                    prop_assert!(cross.norm() < 1e-10);
                }
            }
        }
    }
}
