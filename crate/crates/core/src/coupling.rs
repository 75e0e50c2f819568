//! Second-order polariton-phonon tensors and quasiparticle vertices.

use num_complex::Complex64;

use crate::bogoliubov::{gamma_apply, omega_apply, CVec6, ModeSet};
use crate::error::{Error, Result};
use crate::hamiltonian::{Expansion, Tensor3};

pub type C64 = Complex64;

/// `V[mu][alpha][beta]` multiplies `w+_alpha(q) w_beta(q)` in the polariton
/// row `mu`; `W[mu][alpha][beta]` multiplies `v_alpha w_beta(q)` in the phonon
/// row `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTensors {
    pub v: Tensor3,
    pub w: Tensor3,
}

impl InteractionTensors {
    pub fn from_expansion(e: &Expansion) -> Self {
        Self { v: e.v, w: e.w }
    }

    pub fn is_zero(&self) -> bool {
        self.v
            .iter()
            .chain(self.w.iter())
            .flatten()
            .flatten()
            .all(|z| z.norm() == 0.0)
    }

    /// Max entry of the V-W commutator-consistency relation.
    pub fn connection_residual(&self) -> f64 {
        let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst = 0.0f64;
        for mu in 0..6 {
            for be in 0..6 {
                for nu in 0..6 {
                    let r = -self.v[mu][nu][be] * sign(nu)
                        + self.v[mu][be ^ 1][nu ^ 1] * sign(nu ^ 1)
                        + self.w[nu][mu ^ 1][be] * sign(mu);
                    worst = worst.max(r.norm());
                }
            }
        }
        worst
    }

    /// Max residuals of the three particle-hole reflection identities.
    pub fn reflection_residuals(&self) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for mu in 0..6 {
            for a in 0..6 {
                for b in 0..6 {
                    let r0 = self.v[mu][a][b] + self.v[mu ^ 1][b][a].conj();
                    let r1 = self.v[mu][b][a] - self.v[mu][a ^ 1][b ^ 1];
                    let r2 = self.w[mu][a][b] + self.w[mu ^ 1][a ^ 1][b ^ 1].conj();
                    out[0] = out[0].max(r0.norm());
                    out[1] = out[1].max(r1.norm());
                    out[2] = out[2].max(r2.norm());
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        for z in t.v.iter_mut().chain(t.w.iter_mut()).flatten().flatten() {
            *z *= s;
        }
        t
    }
}

fn contract(l: &CVec6, t: &Tensor3, x: &CVec6, y: &CVec6) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for al in 0..6 {
        if l[al] == C64::new(0.0, 0.0) {
            continue;
        }
        let mut inner = C64::new(0.0, 0.0);
        for be in 0..6 {
            for ga in 0..6 {
                inner += t[al][be][ga] * x[be] * y[ga];
            }
        }
        acc += l[al].conj() * inner;
    }
    acc
}

/// `X[first][second][third]` with dimensions given by the vertex kind.
pub type Block = Vec<Vec<Vec<C64>>>;

fn block(n0: usize, n1: usize, n2: usize) -> Block {
    vec![vec![vec![C64::new(0.0, 0.0); n2]; n1]; n0]
}

/// Quasiparticle vertices at one momentum. `o, m, n` are indexed
/// `[polariton][phonon][phonon]`; `a, b, c, d` are indexed
/// `[phonon][polariton][phonon]`.
#[derive(Debug, Clone)]
pub struct VertexSet {
    pub q: f64,
    pub o: Block,
    pub m: Block,
    pub n: Block,
    pub a: Block,
    pub b: Block,
    pub c: Block,
    pub d: Block,
}

/// Contracts the tensors with the normal modes at `q` and `-q`.
pub fn vertex_coefficients(
    t: &InteractionTensors,
    polaritons: &ModeSet,
    phonons_q: &ModeSet,
    phonons_mq: &ModeSet,
    q: f64,
) -> VertexSet {
    let np = polaritons.len();
    let nb = phonons_q.len();
    let cq = &phonons_q.right;
    let cmq = &phonons_mq.right;
    let dq: Vec<CVec6> = cq.iter().map(omega_apply).collect();
    let mut o = block(np, nb, nb);
    let mut m = block(np, nb, nb);
    let mut n = block(np, nb, nb);
    for mu in 0..np {
        let l = &polaritons.left[mu];
        for nu in 0..nb {
            for rho in 0..nb {
                o[mu][nu][rho] = contract(l, &t.v, &cq[nu].conjugate(), &cq[rho])
                    + contract(l, &t.v, &gamma_apply(&cq[rho]), &gamma_apply(&cq[nu].conjugate()));
                m[mu][nu][rho] =
                    contract(l, &t.v, &cq[nu].conjugate(), &gamma_apply(&cmq[rho].conjugate())) * 2.0;
                n[mu][nu][rho] = contract(l, &t.v, &gamma_apply(&cmq[nu]), &cq[rho]) * 2.0;
            }
        }
    }
    let mut a = block(nb, np, nb);
    let mut b = block(nb, np, nb);
    let mut c = block(nb, np, nb);
    let mut d = block(nb, np, nb);
    for mu in 0..nb {
        for nu in 0..np {
            let r = &polaritons.right[nu];
            let rbar = gamma_apply(&r.conjugate());
            for rho in 0..nb {
                let cbar = gamma_apply(&cmq[rho].conjugate());
                a[mu][nu][rho] = contract(&dq[mu], &t.w, r, &cq[rho]);
                b[mu][nu][rho] = contract(&dq[mu], &t.w, r, &cbar);
                c[mu][nu][rho] = contract(&dq[mu], &t.w, &rbar, &cq[rho]);
                d[mu][nu][rho] = contract(&dq[mu], &t.w, &rbar, &cbar);
            }
        }
    }
    VertexSet { q, o, m, n, a, b, c, d }
}

impl VertexSet {
    pub fn polariton_count(&self) -> usize {
        self.o.len()
    }

    /// Max deviation between the phonon-equation vertices and the
    /// corresponding polariton-equation vertices.
    pub fn reciprocity_residual(&self) -> f64 {
        let nb = self.a.len();
        let np = self.polariton_count();
        let mut worst = 0.0f64;
        for mu in 0..nb {
            for nu in 0..np {
                for rho in 0..nb {
                    let ra = self.a[mu][nu][rho] - self.o[nu][rho][mu].conj();
                    let rb = self.b[mu][nu][rho] - self.n[nu][rho][mu].conj();
                    let rc = self.c[mu][nu][rho] - self.o[nu][mu][rho];
                    let rd = self.d[mu][nu][rho] - self.m[nu][mu][rho];
                    worst = worst.max(ra.norm()).max(rb.norm()).max(rc.norm()).max(rd.norm());
                }
            }
        }
        worst
    }

    /// Landau coupling between the lowest and middle band.
    pub fn landau(&self, soft: usize) -> C64 {
        self.o[soft][0][1]
    }

    /// Beliaev coupling for the pair (band 1 at q, band 2 at -q).
    pub fn beliaev(&self, soft: usize) -> C64 {
        self.n[soft][1][0] * 0.5
    }
}

/// Per-q coupling table for one soft mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    pub q: Vec<f64>,
    pub landau: Vec<C64>,
    pub beliaev: Vec<C64>,
}

pub fn landau_beliaev_couplings(vertices: &[VertexSet], soft: usize) -> Result<CouplingTable> {
    if vertices.iter().any(|v| soft >= v.polariton_count()) {
        return Err(Error::InvalidParameter(format!("soft-mode index {soft} out of range")));
    }
    Ok(CouplingTable {
        q: vertices.iter().map(|v| v.q).collect(),
        landau: vertices.iter().map(|v| v.landau(soft)).collect(),
        beliaev: vertices.iter().map(|v| v.beliaev(soft)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{diagonalize, Fluctuations, Sector};
    use crate::meanfield::{solve_steady_state, MeanField};
    use crate::model::{critical_coupling, ThermoParams};

    fn setup(p: &ThermoParams, ratio: f64) -> (Fluctuations, InteractionTensors) {
        let yc = critical_coupling(p).unwrap();
        let mf = solve_steady_state(p, ratio * yc, &MeanField::normal(p, 0.0)).unwrap();
        let fl = Fluctuations::new(p, &mf);
        let t = InteractionTensors::from_expansion(&fl.expansion);
        (fl, t)
    }

    fn vertices_at(fl: &Fluctuations, t: &InteractionTensors, q: f64) -> VertexSet {
        let pol = diagonalize(&fl.polariton_matrix(), Sector::Polariton).unwrap();
        let a = diagonalize(&fl.phonon_matrix(q).unwrap(), Sector::Phonon { q }).unwrap();
        let b = diagonalize(&fl.phonon_matrix(-q).unwrap(), Sector::Phonon { q: -q }).unwrap();
        vertex_coefficients(t, &pol, &a, &b, q)
    }

    #[test]
    fn zero_without_interactions() {
        let p = ThermoParams { g_tilde: 0.0, ..ThermoParams::default() };
        let fl = Fluctuations::new(&p, &MeanField::normal(&p, 0.0));
        let t = InteractionTensors::from_expansion(&fl.expansion);
        assert!(t.is_zero());
        let vs = vertices_at(&fl, &t, 0.2);
        assert!(vs.o.iter().flatten().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn tensor_identities_across_phases() {
        let p = ThermoParams { u: 3.0, ..ThermoParams::default() };
        for ratio in [0.3, 0.8, 1.2, 1.5] {
            let (_, t) = setup(&p, ratio);
            assert!(t.connection_residual() < 1e-10, "{ratio}: {}", t.connection_residual());
            for r in t.reflection_residuals() {
                assert!(r < 1e-12, "{ratio}: {r}");
            }
        }
    }

    #[test]
    fn vertex_reciprocity() {
        let p = ThermoParams::default();
        for ratio in [0.5, 1.3] {
            let (fl, t) = setup(&p, ratio);
            for q in [0.013, 0.2, 0.37] {
                let vs = vertices_at(&fl, &t, q);
                assert!(vs.reciprocity_residual() < 1e-10, "{}", vs.reciprocity_residual());
            }
        }
    }

    #[test]
    fn beliaev_pair_symmetry() {
        let p = ThermoParams::default();
        let (fl, t) = setup(&p, 0.7);
        for q in [0.05, 0.3] {
            let plus = vertices_at(&fl, &t, q);
            let minus = vertices_at(&fl, &t, -q);
            for s in 0..plus.polariton_count() {
                let a = plus.n[s][1][0];
                let b = minus.n[s][0][1];
                assert!((a.norm() - b.norm()).abs() < 1e-10);
                let a = plus.m[s][1][0];
                let b = minus.m[s][0][1];
                assert!((a.norm() - b.norm()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn collisional_channels_scale_with_density() {
        let base = ThermoParams { u: 2.0, ..ThermoParams::default() };
        let mf = solve_steady_state(&base, 20.0, &MeanField::normal(&base, 0.0)).unwrap();
        let t1 = InteractionTensors::from_expansion(&crate::hamiltonian::expand(
            &ThermoParams { detuning: -1.0, ..base },
            &MeanField { y: 0.0, ..mf },
        ));
        let doubled = ThermoParams { u: 4.0, g_tilde: 0.2, detuning: -1.0, ..base };
        let t2 = InteractionTensors::from_expansion(&crate::hamiltonian::expand(
            &doubled,
            &MeanField { y: 0.0, ..mf },
        ));
        let diff = t2
            .v
            .iter()
            .flatten()
            .flatten()
            .zip(t1.scaled(2.0).v.iter().flatten().flatten())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(diff < 1e-14);
    }
}
