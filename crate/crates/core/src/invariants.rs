//! Numerical invariants: Tjurina number with stabilization detection,
//! the isolated-complete-intersection test, determinacy bounds, the
//! modality order screen, codimension sampling over complete transversals,
//! and the semiuniversal deformation data.

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::germ::{Germ, Weights};
use crate::poly::{Mono, Poly};
use crate::tangent::{m_tangent_inclusion, tangent_image, tjurina_module, TjurinaVariant};
use crate::window::{Subspace, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default cap on the jet level scanned when deciding whether a quotient
/// stabilizes.
pub const DEFAULT_CAP: u32 = 50;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tau {
    Finite(usize),
    /// No stabilization observed up to the cap.
    Infinite { cap: u32 },
}

impl Tau {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Tau::Finite(t) => Some(*t),
            Tau::Infinite { .. } => None,
        }
    }
}

fn top_slice_covered(s: &Subspace, deg: u32) -> bool {
    s.window
        .cols_where(|_, m| m.deg() == deg)
        .iter()
        .all(|&c| s.is_pivot(c))
}

fn quotient_dim(f: &Germ, variant: TjurinaVariant, cap: u32) -> Tau {
    if f.comps.iter().any(|c| c.is_zero()) {
        return Tau::Infinite { cap };
    }
    let start = f.ord().unwrap_or(0) + 2;
    let mut k = start.min(cap);
    loop {
        let s = tjurina_module(f, k, variant);
        if top_slice_covered(&s, k) {
            return Tau::Finite(s.codim());
        }
        if k >= cap {
            return Tau::Infinite { cap };
        }
        k = (k + 4).min(cap);
    }
}

/// Tjurina number: dim of R^m / (<f> R^m + <df>), with the Nakayama stopping
/// rule at the first level whose full slice is covered.
pub fn tjurina_capped(f: &Germ, cap: u32) -> Tau {
    quotient_dim(f, TjurinaVariant::Full, cap)
}

pub fn tjurina(f: &Germ) -> Tau {
    tjurina_capped(f, DEFAULT_CAP)
}

/// Dimension of the ideal quotient R / <f_1, ..., f_m> (zero-dimensionality of
/// the fiber; finiteness certifies the regular-sequence condition for n = m).
pub fn fiber_colength_capped(f: &Germ, cap: u32) -> Tau {
    if f.comps.iter().any(|c| c.is_zero()) {
        return Tau::Infinite { cap };
    }
    let field = f.field().clone();
    let n = f.n();
    let start = f.ord().unwrap_or(0) + 2;
    let mut k = start.min(cap);
    loop {
        let window = Window::degree(&field, n, 1, 0, k);
        let mut s = Subspace::new(window);
        for fi in &f.comps {
            let o = fi.ord().unwrap_or(0);
            if o > k {
                continue;
            }
            for d in 0..=(k - o) {
                for e0 in 0..=d {
                    let mono = Mono(vec![e0, d - e0]);
                    let mult = Poly::monomial(&field, n, mono, field.one());
                    let g = Germ { comps: vec![fi.mul_trunc(&mult, Some(k))] };
                    s.insert_germ(&g);
                }
            }
        }
        if top_slice_covered(&s, k) {
            return Tau::Finite(s.codim());
        }
        if k >= cap {
            return Tau::Infinite { cap };
        }
        k = (k + 4).min(cap);
    }
}

/// Isolated complete intersection test: finite Tjurina number together with a
/// finite fiber colength (regular sequence at desk scale).
pub fn is_icis(f: &Germ) -> bool {
    if f.comps.iter().any(|c| c.is_zero()) {
        return false;
    }
    if f.comps.iter().any(|c| !c.field.is_zero(&c.constant_term())) {
        return false;
    }
    matches!(fiber_colength_capped(f, DEFAULT_CAP), Tau::Finite(_))
        && matches!(tjurina(f), Tau::Finite(_))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminacyReport {
    /// 2 tau - ord + 2
    pub via_tau: usize,
    /// 2 k - ord + 2 for the least k passing the inclusion test
    pub via_inclusion: Option<usize>,
    pub chosen: usize,
    pub witness_k: Option<u32>,
}

/// Determinacy bound via the maximal-ideal inclusion search and the Tjurina
/// fallback; `chosen` is the smaller of the two.
pub fn determinacy(f: &Germ) -> Result<DeterminacyReport> {
    let tau = match tjurina(f) {
        Tau::Finite(t) => t,
        Tau::Infinite { cap } => {
            return Err(Error::NotIcis(format!(
                "Tjurina number did not stabilize below jet level {cap}"
            )))
        }
    };
    let ord = f.ord().unwrap_or(0) as usize;
    let via_tau = 2 * tau + 2 - ord;
    let mut via_inclusion = None;
    let mut witness_k = None;
    let start = ord.saturating_sub(1) as u32;
    for k in start..=(tau as u32 + 1) {
        if m_tangent_inclusion(f, k) {
            via_inclusion = Some(2 * k as usize + 2 - ord);
            witness_k = Some(k);
            break;
        }
    }
    let chosen = via_inclusion.map(|v| v.min(via_tau)).unwrap_or(via_tau);
    Ok(DeterminacyReport { via_tau, via_inclusion, chosen, witness_k })
}

/// The order screen for unimodality: n * C(n-1+l, l) - (2 n^2 - 1) <= 1.
pub fn unimodal_order_screen(n: u32, l: u32) -> bool {
    let binom = |top: u64, k: u64| -> u64 {
        let mut r: u64 = 1;
        for i in 0..k {
            r = r * (top - i) / (i + 1);
        }
        r
    };
    let dim = n as u64 * binom((n - 1 + l) as u64, l as u64);
    dim as i64 - (2 * (n as i64) * (n as i64) - 1) <= 1
}

/// codim of the tangent image intersected with P_{k,l} inside P_{k,l}.
pub fn cod_in_window(f: &Germ, k: u32, l: u32) -> usize {
    let s = tangent_image(f, l);
    let cols = s.window.cols_where(|_, m| m.deg() > k && m.deg() <= l);
    let inter = cols.len() - s.intersection_dim(&cols);
    let _ = inter;
    cols.len() - (cols.len() - s.intersection_dim(&cols))
}

/// Complete transversal directions of `f_jet` inside P_{k,l} (no weighted
/// precondition checks; callers wanting certified transversals go through
/// the reduction module).
pub fn raw_transversal(f: &Germ, k: u32, l: u32) -> Vec<(usize, Mono)> {
    let s = tangent_image(f, l);
    let cols = s.window.cols_where(|_, m| m.deg() > k && m.deg() <= l);
    s.complement_in_cols(&cols)
}

pub struct Cod0Estimate {
    pub min_cod: usize,
    pub samples: usize,
    pub certified_weights: bool,
    pub transversal_dim: usize,
}

/// Sampled estimate of cod_0: minimum over random transversal points a of
/// cod(f + a) measured in P_{k,l}. An upper bound for the generic value and a
/// lower bound for the modality at each sampled point. One extra batch runs
/// over a quadratic extension.
pub fn cod0_estimate(
    f_jet: &Germ,
    k: u32,
    l: u32,
    samples: usize,
    seed: u64,
    supplied_weights: Option<Weights>,
) -> Result<Cod0Estimate> {
    let field = f_jet.field().clone();
    let weights = supplied_weights.or_else(|| crate::germ::discover_weights(f_jet));
    let certified = match &weights {
        None => false,
        Some(w) => f_jet.is_weighted_homogeneous(w) && w.transversal_condition(k),
    };
    let trans = raw_transversal(f_jet, k, l);
    if trans.is_empty() {
        return Ok(Cod0Estimate {
            min_cod: 0,
            samples: 0,
            certified_weights: certified,
            transversal_dim: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_cod = usize::MAX;
    let mut count = 0usize;
    let ext = if field.characteristic() > 0 {
        Some(FieldSpec::make(field.characteristic(), field.extension_degree() * 2)?)
    } else {
        None
    };
    for i in 0..samples {
        // final quarter of the samples runs over the quadratic extension
        let use_ext = ext.is_some() && i + samples / 4 >= samples;
        let (fl, g0) = if use_ext {
            let e = ext.clone().unwrap();
            (e.clone(), f_jet.map_field(&e))
        } else {
            (field.clone(), f_jet.clone())
        };
        let mut g = g0;
        for (j, mono) in &trans {
            let c = if fl.characteristic() > 0 {
                fl.element_from_index(rng.gen_range(0..fl.order()))
            } else {
                fl.from_int(rng.gen_range(-20i64..=20))
            };
            g.comps[*j] =
                g.comps[*j].add(&Poly::monomial(&fl, g.comps[*j].n, mono.clone(), c));
        }
        let cod = cod_in_window(&g, k, l);
        min_cod = min_cod.min(cod);
        count += 1;
    }
    Ok(Cod0Estimate {
        min_cod,
        samples: count,
        certified_weights: certified,
        transversal_dim: trans.len(),
    })
}

/// Basis of the canonical complement of the sec-variant module at its
/// stabilized window: representatives of R^m / (<f> R^m + m <df>).
pub fn tsec_basis(f: &Germ) -> Result<Vec<(usize, Mono)>> {
    if !is_icis(f) {
        return Err(Error::NotIcis("T^1 basis requires an ICIS".into()));
    }
    let mut k = f.ord().unwrap_or(0) + 2;
    loop {
        let s = tjurina_module(f, k, TjurinaVariant::Sec);
        if top_slice_covered(&s, k) {
            return Ok(s.complement_basis());
        }
        if k >= DEFAULT_CAP {
            return Err(Error::CapExceeded {
                cap: DEFAULT_CAP as usize,
                msg: "sec-variant module did not stabilize".into(),
            });
        }
        k += 4;
    }
}

pub struct SemiuniversalFamily {
    pub base: Germ,
    pub basis: Vec<(usize, Mono)>,
    pub parameter_names: Vec<String>,
}

/// The family f + sum t_i g_i over the T^1 basis.
pub fn semiuniversal_family(f: &Germ) -> Result<SemiuniversalFamily> {
    let basis = tsec_basis(f)?;
    let parameter_names = (1..=basis.len()).map(|i| format!("t{i}")).collect();
    Ok(SemiuniversalFamily { base: f.clone(), basis, parameter_names })
}

impl SemiuniversalFamily {
    /// Specialize the parameters to field values.
    pub fn at(&self, values: &[crate::field::Elt]) -> Germ {
        assert_eq!(values.len(), self.basis.len());
        let field = self.base.field().clone();
        let mut g = self.base.clone();
        for ((j, mono), v) in self.basis.iter().zip(values) {
            g.comps[*j] =
                g.comps[*j].add(&Poly::monomial(&field, g.comps[*j].n, mono.clone(), v.clone()));
        }
        g
    }

    /// Basis directions of degree >= 2: the ones producing genuine singular
    /// germs at the origin when switched on (constant and linear directions
    /// translate the fiber or smooth it out).
    pub fn germ_directions(&self) -> Vec<usize> {
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, (_, m))| m.deg() >= 2)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, FieldSpec};

    fn f7() -> Field {
        FieldSpec::make(7, 1).unwrap()
    }

    fn g(field: &Field, e1: &str, e2: &str) -> Germ {
        Germ::from_exprs(field, &[e1, e2]).unwrap()
    }

    #[test]
    fn tjurina_examples() {
        let f = f7();
        assert_eq!(tjurina(&g(&f, "x^2", "y^3")), Tau::Finite(7));
        assert!(matches!(tjurina(&g(&f, "x^3", "0")), Tau::Infinite { .. }));
        let t = tjurina(&g(&f, "x^2+y^4", "y^5+2*x*y^3"));
        assert!(t.finite().is_some());
        // cross-check at a second window size: recompute with a larger cap
        let t2 = tjurina_capped(&g(&f, "x^2+y^4", "y^5+2*x*y^3"), 30);
        assert_eq!(t, t2);
    }

    #[test]
    fn icis_examples() {
        let f = f7();
        assert!(is_icis(&g(&f, "x*y", "x^2+y^3")));
        assert!(!is_icis(&g(&f, "x^2", "x^2")));
        assert!(is_icis(&g(&f, "x^2", "y^3")));
        assert!(!is_icis(&g(&f, "x^2", "x*y^2")));
    }

    #[test]
    fn determinacy_examples() {
        let f = f7();
        let r = determinacy(&g(&f, "x^3", "y^3+x^2*y")).unwrap();
        assert_eq!(r.via_inclusion, Some(3));
        assert_eq!(r.chosen, 3);
        let r2 = determinacy(&g(&f, "x^2", "y^3")).unwrap();
        assert_eq!(r2.via_tau, 2 * 7 - 2 + 2);
        // random nonzero lambda: (x^3+x^2y, y^3+l x^2y) is 3-determined
        for l in 1..4 {
            let germ = g(&f, "x^3+x^2*y", &format!("y^3+{l}*x^2*y"));
            let r = determinacy(&germ).unwrap();
            assert_eq!(r.chosen, 3, "lambda = {l}");
        }
    }

    #[test]
    fn order_screen_grid() {
        // direct evaluation over the full grid
        for n in [2u32, 3] {
            for l in 2..=6u32 {
                let expect = matches!((n, l), (2, 2) | (2, 3) | (3, 2));
                assert_eq!(unimodal_order_screen(n, l), expect, "n={n} l={l}");
            }
        }
    }

    #[test]
    fn cod_window_obstruction() {
        // (x^2 + a y^5, y^6 + a x y^3 + b x y^4): cod in P_{4,6} at least 2
        let f = f7();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = rng.gen_range(0..7);
            let b = rng.gen_range(0..7);
            for alpha in [0, 1] {
                let germ = g(
                    &f,
                    &format!("x^2+{alpha}*y^5"),
                    &format!("y^6+{a}*x*y^3+{b}*x*y^4"),
                );
                assert!(cod_in_window(&germ, 4, 6) >= 2, "a={a} b={b} alpha={alpha}");
            }
        }
    }

    #[test]
    fn cod0_estimate_runs() {
        let f = f7();
        let base = g(&f, "x^2", "0");
        let est = cod0_estimate(&base, 4, 6, 12, 0, None).unwrap();
        assert!(est.min_cod >= 2);
        // full tangent image leaves an empty transversal
        let full = g(&f, "x*y", "x^2+y^2");
        let est2 = cod0_estimate(&full, 4, 6, 4, 0, None).unwrap();
        assert_eq!(est2.min_cod, 0);
    }

    #[test]
    fn tsec_dimension_matches_codim() {
        let f = f7();
        let germ = g(&f, "x^2+y^4", "y^5+2*x*y^3");
        let basis = tsec_basis(&germ).unwrap();
        // stabilized window: compare to the tangent image complement dimension
        let s = tjurina_module(&germ, 14, TjurinaVariant::Sec);
        assert_eq!(basis.len(), s.codim());
        // sec module contains the full module's denominators: dim >= tau
        let tau = tjurina(&germ).finite().unwrap();
        assert!(basis.len() >= tau);
    }

    #[test]
    fn semiuniversal_specialization() {
        let f = f7();
        let germ = g(&f, "x^2", "y^3");
        let fam = semiuniversal_family(&germ).unwrap();
        let dirs = fam.germ_directions();
        assert!(!dirs.is_empty());
        let mut vals: Vec<_> = vec![f.zero(); fam.basis.len()];
        for (step, &i) in dirs.iter().enumerate() {
            vals[i] = f.from_int(step as i64 % 3);
        }
        let inst = fam.at(&vals);
        assert!(inst.ord().unwrap_or(0) >= 2);
        assert!(is_icis(&inst));
    }
}
