//! Truncated Fock-space reference for the expansion coefficients.
//!
//! The Hamiltonian is assembled as explicit operator strings acting on
//! occupation-number states of the photon, `b0, c0` and one `+-q` triplet
//! of phonon modes, with occupations capped at [`CUTOFF`]. Coefficients of
//! the Heisenberg equations are read off as matrix elements of `[o, K]`
//! between states with at most two quanta, for which the truncation is exact.

use std::collections::BTreeMap;

use nalgebra::Matrix6;
use num_complex::Complex64;

use crate::hamiltonian::{zero_tensor, Tensor3};
use crate::meanfield::MeanField;
use crate::model::ThermoParams;

type C64 = Complex64;

pub const CUTOFF: u8 = 2;
const MODES: usize = 9;

type State = [u8; MODES];
type Ket = BTreeMap<State, C64>;

// mode slots
const A: usize = 0;
const B0: usize = 1;
const C0: usize = 2;
fn bk(k: i8) -> usize {
    if k > 0 { 3 } else { 4 }
}
fn ck(k: i8) -> usize {
    if k > 0 { 5 } else { 6 }
}
fn sk(k: i8) -> usize {
    if k > 0 { 7 } else { 8 }
}

#[derive(Clone, Copy, Debug)]
struct Factor {
    mode: usize,
    dagger: bool,
    shift: C64,
}

#[derive(Clone, Debug)]
struct Term {
    coeff: C64,
    factors: Vec<Factor>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn ladder(ket: &Ket, mode: usize, dagger: bool) -> Ket {
    let mut out = Ket::new();
    for (st, &amp) in ket {
        let n = st[mode];
        let mut next = *st;
        let factor = if dagger {
            if n + 1 > CUTOFF {
                continue;
            }
            next[mode] = n + 1;
            f64::from(n + 1).sqrt()
        } else {
            if n == 0 {
                continue;
            }
            next[mode] = n - 1;
            f64::from(n).sqrt()
        };
        *out.entry(next).or_insert(zero()) += amp * factor;
    }
    out
}

fn axpy(acc: &mut Ket, s: C64, x: &Ket) {
    for (st, &v) in x {
        *acc.entry(*st).or_insert(zero()) += s * v;
    }
}

struct Builder {
    terms: Vec<Term>,
    shifts: [C64; MODES],
    present: [bool; MODES],
}

/// Symbolic field operator: `None` marks the omitted `s0` mode.
#[derive(Clone, Copy)]
struct Field(Option<usize>);

impl Builder {
    fn push(&mut self, coeff: f64, ops: &[(Field, bool)]) {
        self.push_c(C64::new(coeff, 0.0), ops);
    }

    fn push_c(&mut self, coeff: C64, ops: &[(Field, bool)]) {
        let mut factors = Vec::with_capacity(ops.len());
        for &(Field(m), dagger) in ops {
            let Some(m) = m else { return };
            if !self.present[m] {
                return;
            }
            let s = if dagger { self.shifts[m].conj() } else { self.shifts[m] };
            factors.push(Factor { mode: m, dagger, shift: s });
        }
        self.terms.push(Term { coeff, factors });
    }
}

fn b(k: i8) -> Field {
    Field(Some(if k == 0 { B0 } else { bk(k) }))
}
fn c(k: i8) -> Field {
    Field(Some(if k == 0 { C0 } else { ck(k) }))
}
fn s(k: i8) -> Field {
    Field(if k == 0 { None } else { Some(sk(k)) })
}

/// Shifted grand-canonical Hamiltonian on the truncated space.
pub struct FockHamiltonian {
    terms: Vec<Term>,
}

impl FockHamiltonian {
    pub fn new(p: &ThermoParams, mf: &MeanField, q: f64) -> Self {
        let mut shifts = [zero(); MODES];
        shifts[A] = C64::new(mf.alpha, 0.0);
        shifts[B0] = C64::new(mf.beta, 0.0);
        shifts[C0] = C64::new(mf.gamma, 0.0);
        let mut h = Builder {
            terms: Vec::new(),
            shifts,
            present: [true; MODES],
        };
        let a = Field(Some(A));
        let (cr, an) = (true, false);
        let ks = [-1i8, 0, 1];

        h.push(-p.detuning, &[(a, cr), (a, an)]);
        for k in ks {
            let qk = f64::from(k) * q;
            let e = qk * qk;
            h.push(e - mf.mu, &[(b(k), cr), (b(k), an)]);
            h.push(1.0 + e - mf.mu, &[(c(k), cr), (c(k), an)]);
            h.push(1.0 + e - mf.mu, &[(s(k), cr), (s(k), an)]);
            h.push_c(C64::new(0.0, 2.0 * qk), &[(s(k), cr), (c(k), an)]);
            h.push_c(C64::new(0.0, -2.0 * qk), &[(c(k), cr), (s(k), an)]);
            for ph in [cr, an] {
                h.push(0.5 * mf.y, &[(a, ph), (b(k), cr), (c(k), an)]);
                h.push(0.5 * mf.y, &[(a, ph), (c(k), cr), (b(k), an)]);
            }
            h.push(2.0 * p.u, &[(a, cr), (a, an), (b(k), cr), (b(k), an)]);
            h.push(3.0 * p.u, &[(a, cr), (a, an), (c(k), cr), (c(k), an)]);
            h.push(p.u, &[(a, cr), (a, an), (s(k), cr), (s(k), an)]);
        }
        let g = 0.5 * p.g_tilde;
        type F = fn(i8) -> Field;
        let channels: [(f64, F, F, F, F); 12] = [
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
        for (w, f1, f2, f3, f4) in channels {
            for q1 in ks {
                for q2 in ks {
                    for q3 in ks {
                        for q4 in ks {
                            if q1 + q2 == q3 + q4 {
                                h.push(
                                    g * w,
                                    &[(f1(q1), cr), (f2(q2), cr), (f3(q3), an), (f4(q4), an)],
                                );
                            }
                        }
                    }
                }
            }
        }
        Self { terms: h.terms }
    }

    fn apply(&self, ket: &Ket) -> Ket {
        let mut out = Ket::new();
        for t in &self.terms {
            let mut cur = ket.clone();
            for f in t.factors.iter().rev() {
                let mut next = ladder(&cur, f.mode, f.dagger);
                if f.shift != zero() {
                    axpy(&mut next, f.shift, &cur);
                }
                cur = next;
                if cur.is_empty() {
                    break;
                }
            }
            axpy(&mut out, t.coeff, &cur);
        }
        out
    }

    /// `<f| [o, K] |i>` for a bare fluctuation operator `o`.
    fn commutator_element(&self, o: (usize, bool), f: &State, i: &State) -> C64 {
        let mut ket = Ket::new();
        ket.insert(*i, C64::new(1.0, 0.0));
        let ok = ladder(&self.apply(&ket), o.0, o.1);
        let ko = self.apply(&ladder(&ket, o.0, o.1));
        ok.get(f).copied().unwrap_or(zero()) - ko.get(f).copied().unwrap_or(zero())
    }
}

fn vacuum() -> State {
    [0; MODES]
}

fn excite(modes: &[usize]) -> State {
    let mut s = vacuum();
    for &m in modes {
        s[m] += 1;
    }
    s
}

/// Coefficient of the normal-ordered monomial `ops` (degree 1 or 2) in `[o, K]`.
fn monomial(h: &FockHamiltonian, o: (usize, bool), ops: &[(usize, bool)]) -> C64 {
    let cre: Vec<usize> = ops.iter().filter(|x| x.1).map(|x| x.0).collect();
    let ann: Vec<usize> = ops.iter().filter(|x| !x.1).map(|x| x.0).collect();
    let norm = |m: &Vec<usize>| if m.len() == 2 && m[0] == m[1] { 2f64.sqrt() } else { 1.0 };
    let mut val = h.commutator_element(o, &excite(&cre), &excite(&ann)) / (norm(&cre) * norm(&ann));
    if cre.len() == 1 && ann.len() == 1 && cre[0] == ann[0] {
        val -= h.commutator_element(o, &vacuum(), &vacuum());
    }
    val
}

fn polariton_ops() -> [(usize, bool); 6] {
    [(A, false), (A, true), (B0, false), (B0, true), (C0, false), (C0, true)]
}

fn phonon_ops(sign: i8) -> [(usize, bool); 6] {
    [
        (bk(sign), false),
        (bk(-sign), true),
        (ck(sign), false),
        (ck(-sign), true),
        (sk(sign), false),
        (sk(-sign), true),
    ]
}

fn adjoint(o: (usize, bool)) -> (usize, bool) {
    (o.0, !o.1)
}

fn same_pair(x: [(usize, bool); 2], y: [(usize, bool); 2]) -> bool {
    (x[0] == y[0] && x[1] == y[1]) || (x[0] == y[1] && x[1] == y[0])
}

/// Reference coefficients read from the truncated Fock space.
#[derive(Debug, Clone)]
pub struct OracleCoefficients {
    pub f: Matrix6<C64>,
    pub g: Matrix6<C64>,
    pub v: Tensor3,
    pub w: Tensor3,
}

pub fn oracle_coefficients(p: &ThermoParams, mf: &MeanField, q: f64) -> OracleCoefficients {
    let h = FockHamiltonian::new(p, mf, q);
    let pol = polariton_ops();
    let ph = phonon_ops(1);
    let phm = phonon_ops(-1);

    let mut f = Matrix6::zeros();
    let mut g = Matrix6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            f[(i, j)] = monomial(&h, pol[i], &[pol[j]]);
            g[(i, j)] = monomial(&h, ph[i], &[ph[j]]);
        }
    }

    let mut v = zero_tensor();
    for (mu, &row) in pol.iter().enumerate() {
        for al in 0..6 {
            for be in 0..6 {
                let pair = [adjoint(ph[al]), ph[be]];
                let mut reps = 0;
                for basis in [&ph, &phm] {
                    for x in 0..6 {
                        for y in 0..6 {
                            if same_pair([adjoint(basis[x]), basis[y]], pair) {
                                reps += 1;
                            }
                        }
                    }
                }
                v[mu][al][be] = monomial(&h, row, &pair) / f64::from(reps);
            }
        }
    }

    let mut w = zero_tensor();
    for (mu, &row) in ph.iter().enumerate() {
        for al in 0..6 {
            for be in 0..6 {
                w[mu][al][be] = monomial(&h, row, &[pol[al], ph[be]]);
            }
        }
    }
    OracleCoefficients { f, g, v, w }
}

impl OracleCoefficients {
    /// Largest deviation from a set of analytically expanded coefficients.
    pub fn max_deviation(&self, f: &Matrix6<C64>, g: &Matrix6<C64>, v: &Tensor3, w: &Tensor3) -> f64 {
        let m = |a: &Matrix6<C64>, b: &Matrix6<C64>| {
            a.iter().zip(b.iter()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
        };
        let t = |a: &Tensor3, b: &Tensor3| {
            a.iter()
                .flatten()
                .flatten()
                .zip(b.iter().flatten().flatten())
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
        };
        m(&self.f, f).max(m(&self.g, g)).max(t(&self.v, v)).max(t(&self.w, w))
    }
}
