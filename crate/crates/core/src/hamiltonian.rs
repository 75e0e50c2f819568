//! Normal-ordered operator algebra for the three-band Hamiltonian.
//!
//! The grand-canonical Hamiltonian is built as a normal-ordered polynomial in
//! the photon and Bloch-mode operators, restricted to the quasi-momenta
//! `{-q, 0, +q}`. Heisenberg equations are obtained by formal differentiation,
//! the condensate is displaced by c-numbers, and the result is sorted by the
//! number of fluctuation operators. Amplitudes are scaled by `sqrt(N_c)` so
//! that every coefficient is a thermodynamic-limit quantity.

use std::collections::BTreeMap;

use nalgebra::Matrix6;
use num_complex::Complex64;

use crate::meanfield::MeanField;
use crate::model::ThermoParams;

pub type C64 = Complex64;

/// Third-rank coupling tensor indexed `[row][first][second]`.
pub type Tensor3 = [[[C64; 6]; 6]; 6];

pub fn zero_tensor() -> Tensor3 {
    [[[C64::new(0.0, 0.0); 6]; 6]; 6]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    A,
    B,
    C,
    S,
}

/// A single bosonic mode: the photon, or a band at momentum index
/// `-1, 0, +1` (in units of `q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub band: Band,
    pub k: i8,
}

impl Mode {
    pub const fn new(band: Band, k: i8) -> Self {
        Self { band, k }
    }
    pub const PHOTON: Mode = Mode::new(Band::A, 0);
}

/// Creation (`dagger`) or annihilation operator. Creators sort first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Op {
    pub creator: std::cmp::Reverse<bool>,
    pub mode: Mode,
}

impl Op {
    pub fn ann(mode: Mode) -> Self {
        Self {
            creator: std::cmp::Reverse(false),
            mode,
        }
    }
    pub fn cre(mode: Mode) -> Self {
        Self {
            creator: std::cmp::Reverse(true),
            mode,
        }
    }
    pub fn is_creator(&self) -> bool {
        self.creator.0
    }
    pub fn adjoint(&self) -> Self {
        Self {
            creator: std::cmp::Reverse(!self.creator.0),
            mode: self.mode,
        }
    }
}

/// Normal-ordered polynomial. Monomials are stored sorted, which is a valid
/// reordering as long as no annihilator precedes a creator of the same mode
/// in the input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    pub terms: BTreeMap<Vec<Op>, C64>,
}

impl Poly {
    pub fn add(&mut self, coeff: C64, ops: &[Op]) {
        if coeff == C64::new(0.0, 0.0) {
            return;
        }
        let mut key = ops.to_vec();
        key.sort();
        *self.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += coeff;
    }

    pub fn add_real(&mut self, coeff: f64, ops: &[Op]) {
        self.add(C64::new(coeff, 0.0), ops);
    }

    pub fn extend(&mut self, other: &Poly) {
        for (k, v) in &other.terms {
            *self.terms.entry(k.clone()).or_insert(C64::new(0.0, 0.0)) += v;
        }
    }

    /// Formal derivative with respect to one operator symbol.
    pub fn derivative(&self, by: Op) -> Poly {
        let mut out = Poly::default();
        for (mono, &c) in &self.terms {
            let count = mono.iter().filter(|&&o| o == by).count();
            if count == 0 {
                continue;
            }
            let pos = mono.iter().position(|&o| o == by).unwrap();
            let mut rest = mono.clone();
            rest.remove(pos);
            out.add(c * count as f64, &rest);
        }
        out
    }

    /// `[op, K]` for a normal-ordered `K`.
    pub fn commutator_with(&self, op: Op) -> Poly {
        if op.is_creator() {
            let mut d = self.derivative(op.adjoint());
            for v in d.terms.values_mut() {
                *v = -*v;
            }
            d
        } else {
            self.derivative(op.adjoint())
        }
    }

    /// Replaces every operator of a displaced mode by `value + fluctuation`.
    pub fn displace(&self, shift: &dyn Fn(Mode) -> Option<C64>) -> Poly {
        let mut out = Poly::default();
        for (mono, &c) in &self.terms {
            let mut partial: Vec<(C64, Vec<Op>)> = vec![(c, Vec::new())];
            for &o in mono {
                match shift(o.mode) {
                    Some(v) => {
                        let v = if o.is_creator() { v.conj() } else { v };
                        let mut next = Vec::with_capacity(partial.len() * 2);
                        for (pc, pm) in partial {
                            let mut keep = pm.clone();
                            keep.push(o);
                            next.push((pc, keep));
                            if v != C64::new(0.0, 0.0) {
                                next.push((pc * v, pm));
                            }
                        }
                        partial = next;
                    }
                    None => {
                        for (_, pm) in partial.iter_mut() {
                            pm.push(o);
                        }
                    }
                }
            }
            for (pc, pm) in partial {
                out.add(pc, &pm);
            }
        }
        out
    }

    pub fn degree(&self, d: usize) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.len() == d)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn coefficient(&self, ops: &[Op]) -> C64 {
        let mut key = ops.to_vec();
        key.sort();
        self.terms.get(&key).copied().unwrap_or(C64::new(0.0, 0.0))
    }
}

fn b(k: i8) -> Mode {
    Mode::new(Band::B, k)
}
fn c(k: i8) -> Mode {
    Mode::new(Band::C, k)
}
fn s(k: i8) -> Mode {
    Mode::new(Band::S, k)
}

const MOMENTA: [i8; 3] = [-1, 0, 1];

/// Every momentum-independent part of the grand-canonical Hamiltonian.
pub fn interaction_hamiltonian(p: &ThermoParams, mu: f64, y: f64) -> Poly {
    let mut h = Poly::default();
    let a = Mode::PHOTON;
    h.add_real(-p.detuning, &[Op::cre(a), Op::ann(a)]);
    for k in MOMENTA {
        for m in [b(k), c(k), s(k)] {
            h.add_real(-mu, &[Op::cre(m), Op::ann(m)]);
        }
        for photon in [Op::cre(a), Op::ann(a)] {
            h.add_real(0.5 * y, &[photon, Op::cre(b(k)), Op::ann(c(k))]);
            h.add_real(0.5 * y, &[photon, Op::cre(c(k)), Op::ann(b(k))]);
        }
        for (m, w) in [(b(k), 2.0), (c(k), 3.0), (s(k), 1.0)] {
            h.add_real(p.u * w, &[Op::cre(a), Op::ann(a), Op::cre(m), Op::ann(m)]);
        }
    }
    add_collisions(&mut h, 0.5 * p.g_tilde);
    h
}

fn add_collisions(h: &mut Poly, pre: f64) {
    type Pair = fn(i8) -> Mode;
    // (weight, outgoing pair, incoming pair)
    let channels: [(f64, Pair, Pair, Pair, Pair); 12] = [
        (1.0, b, b, b, b),
        (1.5, c, c, c, c),
        (1.5, s, s, s, s),
        (1.0, b, b, c, c),
        (1.0, c, c, b, b),
        (1.0, b, b, s, s),
        (1.0, s, s, b, b),
        (0.5, c, c, s, s),
        (0.5, s, s, c, c),
        (4.0, b, c, b, c),
        (4.0, b, s, b, s),
        (2.0, c, s, c, s),
    ];
    for (w, m1, m2, m3, m4) in channels {
        for q1 in MOMENTA {
            for q2 in MOMENTA {
                for q3 in MOMENTA {
                    for q4 in MOMENTA {
                        if q1 + q2 != q3 + q4 {
                            continue;
                        }
                        h.add_real(
                            pre * w,
                            &[
                                Op::cre(m1(q1)),
                                Op::cre(m2(q2)),
                                Op::ann(m3(q3)),
                                Op::ann(m4(q4)),
                            ],
                        );
                    }
                }
            }
        }
    }
}

/// Kinetic energy of the three bands at quasi-momenta `{-q, 0, q}`, with
/// `q` in units of `k`.
pub fn kinetic_hamiltonian(q: f64) -> Poly {
    let mut h = Poly::default();
    for k in MOMENTA {
        let qk = f64::from(k) * q;
        let e = qk * qk;
        h.add_real(e, &[Op::cre(b(k)), Op::ann(b(k))]);
        h.add_real(1.0 + e, &[Op::cre(c(k)), Op::ann(c(k))]);
        h.add_real(1.0 + e, &[Op::cre(s(k)), Op::ann(s(k))]);
        h.add(C64::new(0.0, 2.0 * qk), &[Op::cre(s(k)), Op::ann(c(k))]);
        h.add(C64::new(0.0, -2.0 * qk), &[Op::cre(c(k)), Op::ann(s(k))]);
    }
    h
}

/// Polariton fluctuation vector `(a, a+, b0, b0+, c0, c0+)`.
pub fn polariton_basis() -> [Op; 6] {
    let a = Mode::PHOTON;
    [
        Op::ann(a),
        Op::cre(a),
        Op::ann(b(0)),
        Op::cre(b(0)),
        Op::ann(c(0)),
        Op::cre(c(0)),
    ]
}

/// Phonon fluctuation vector `(b_q, b_-q+, c_q, c_-q+, s_q, s_-q+)` with
/// `sign = +1` for `q` and `-1` for `-q`.
pub fn phonon_basis(sign: i8) -> [Op; 6] {
    [
        Op::ann(b(sign)),
        Op::cre(b(-sign)),
        Op::ann(c(sign)),
        Op::cre(c(-sign)),
        Op::ann(s(sign)),
        Op::cre(s(-sign)),
    ]
}

/// Condensate displacement for the given mean field.
pub fn condensate_shift(mf: &MeanField) -> impl Fn(Mode) -> Option<C64> {
    let (al, be, ga) = (mf.alpha, mf.beta, mf.gamma);
    move |m: Mode| match (m.band, m.k) {
        (Band::A, _) => Some(C64::new(al, 0.0)),
        (Band::B, 0) => Some(C64::new(be, 0.0)),
        (Band::C, 0) => Some(C64::new(ga, 0.0)),
        _ => None,
    }
}

/// Heisenberg right-hand side `[op, K]` after displacement.
pub fn equation(h: &Poly, op: Op, mf: &MeanField) -> Poly {
    h.commutator_with(op).displace(&condensate_shift(mf))
}

/// Coefficients of the expanded equations of motion that do not depend on
/// the phonon momentum.
#[derive(Debug, Clone)]
pub struct Expansion {
    /// Zeroth-order right-hand sides for `a, b0, c0`.
    pub stationary: [C64; 3],
    pub f: Matrix6<C64>,
    /// Phonon matrix without the kinetic contribution.
    pub g_static: Matrix6<C64>,
    pub v: Tensor3,
    pub w: Tensor3,
}

fn is_phonon(o: &Op) -> bool {
    o.mode.k != 0
}

fn linear_matrix(h: &Poly, rows: &[Op; 6], cols: &[Op; 6], mf: &MeanField) -> Matrix6<C64> {
    let mut m = Matrix6::zeros();
    for (i, &r) in rows.iter().enumerate() {
        let eq = equation(h, r, mf).degree(1);
        for (j, &col) in cols.iter().enumerate() {
            m[(i, j)] = eq.coefficient(&[col]);
        }
    }
    m
}

pub fn expand(p: &ThermoParams, mf: &MeanField) -> Expansion {
    let h = interaction_hamiltonian(p, mf.mu, mf.y);
    let mut h0 = h.clone();
    h0.extend(&kinetic_hamiltonian(0.0));
    let pol = polariton_basis();
    let ph = phonon_basis(1);

    let mut stationary = [C64::new(0.0, 0.0); 3];
    for (slot, idx) in [0usize, 2, 4].into_iter().enumerate() {
        stationary[slot] = equation(&h0, pol[idx], mf).coefficient(&[]);
    }

    let f = linear_matrix(&h0, &pol, &pol, mf);
    let g_static = linear_matrix(&h, &ph, &ph, mf);

    let mut v = zero_tensor();
    let ph_minus = phonon_basis(-1);
    for (mu, &row) in pol.iter().enumerate() {
        let eq = equation(&h, row, mf).degree(2);
        for (mono, &coeff) in &eq.terms {
            if !mono.iter().all(is_phonon) {
                continue;
            }
            let mut reps = Vec::new();
            for basis in [&ph, &ph_minus] {
                for al in 0..6 {
                    for be in 0..6 {
                        let mut pair = vec![basis[al].adjoint(), basis[be]];
                        pair.sort();
                        if pair == *mono {
                            reps.push((al, be));
                        }
                    }
                }
            }
            assert!(!reps.is_empty(), "unrepresentable phonon bilinear {mono:?}");
            let share = coeff / reps.len() as f64;
            for (al, be) in reps {
                v[mu][al][be] = share;
            }
        }
    }

    let mut w = zero_tensor();
    for (mu, &row) in ph.iter().enumerate() {
        let eq = equation(&h, row, mf).degree(2);
        for (al, &pa) in pol.iter().enumerate() {
            for (be, &pb) in ph.iter().enumerate() {
                w[mu][al][be] = eq.coefficient(&[pa, pb]);
            }
        }
    }

    Expansion {
        stationary,
        f,
        g_static,
        v,
        w,
    }
}

/// Kinetic part of the phonon matrix at momentum `q` (units of `k`).
pub fn kinetic_block(q: f64) -> Matrix6<C64> {
    let h = kinetic_hamiltonian(q);
    let ph = phonon_basis(1);
    let mut m = Matrix6::zeros();
    for (i, &r) in ph.iter().enumerate() {
        let eq = h.commutator_with(r);
        for (j, &col) in ph.iter().enumerate() {
            m[(i, j)] = eq.coefficient(&[col]);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{residuals, solve_steady_state};
    use crate::model::critical_coupling;

    #[test]
    fn stationary_terms_are_the_mean_field_equations() {
        let p = ThermoParams { u: 7.0, ..ThermoParams::default() };
        let yc = critical_coupling(&p).unwrap();
        let mf = solve_steady_state(&p, 1.3 * yc, &MeanField::normal(&p, 0.0)).unwrap();
        let off = MeanField { alpha: mf.alpha * 1.1, gamma: mf.gamma * 0.9, mu: 0.3, ..mf };
        let e = expand(&p, &off);
        let r = residuals(&p, &off);
        for i in 0..3 {
            assert!((e.stationary[i].re - r[i]).abs() < 1e-12, "{i}");
            assert!(e.stationary[i].im.abs() < 1e-15);
        }
    }

    #[test]
    fn free_commutators() {
        let mut h = Poly::default();
        let a = Mode::PHOTON;
        h.add_real(2.0, &[Op::cre(a), Op::cre(a), Op::ann(a), Op::ann(a)]);
        let eq = h.commutator_with(Op::ann(a));
        assert_eq!(eq.coefficient(&[Op::cre(a), Op::ann(a), Op::ann(a)]), C64::new(4.0, 0.0));
        let eq = h.commutator_with(Op::cre(a));
        assert_eq!(eq.coefficient(&[Op::cre(a), Op::cre(a), Op::ann(a)]), C64::new(-4.0, 0.0));
    }

    #[test]
    fn displacement_expands_binomially() {
        let mut h = Poly::default();
        let a = Mode::PHOTON;
        h.add_real(1.0, &[Op::cre(a), Op::ann(a)]);
        let shifted = h.displace(&|m| (m == a).then(|| C64::new(2.0, 1.0)));
        assert_eq!(shifted.coefficient(&[]), C64::new(5.0, 0.0));
        assert_eq!(shifted.coefficient(&[Op::ann(a)]), C64::new(2.0, -1.0));
        assert_eq!(shifted.coefficient(&[Op::cre(a)]), C64::new(2.0, 1.0));
    }

    #[test]
    fn interactions_vanish_without_couplings() {
        let p = ThermoParams { g_tilde: 0.0, u: 0.0, ..ThermoParams::default() };
        let e = expand(&p, &MeanField::normal(&p, 0.0));
        assert!(e.v.iter().flatten().flatten().all(|z| z.norm() == 0.0));
        assert!(e.w.iter().flatten().flatten().all(|z| z.norm() == 0.0));
    }
}
