//! Tangent images and Tjurina-type modules as windowed subspaces: the
//! computable submodule <f> R^m + m <df> standing in for the contact orbit
//! tangent space, its weighted refinement, and the maximal-ideal inclusion
//! used by the determinacy bound.

use crate::field::Field;
use crate::germ::{Germ, Weights};
use crate::poly::{Mono, Poly};
use crate::window::{Subspace, Window};

/// Which derivative multiples enter the module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TjurinaVariant {
    /// <f> R^m + <df/dx_1, ..., df/dx_n>  (the Tjurina quotient denominator)
    Full,
    /// <f> R^m + m <df>  (equals the tangent image by construction)
    Sec,
}

fn partials(f: &Germ) -> Vec<Germ> {
    let n = f.n();
    (0..n)
        .map(|l| Germ { comps: f.comps.iter().map(|c| c.derivative(l)).collect() })
        .collect()
}

fn all_monos_up_to(n: usize, lo: u32, hi: u32) -> Vec<Mono> {
    let mut out = vec![];
    for d in lo..=hi {
        if n == 2 {
            for e0 in 0..=d {
                out.push(Mono(vec![e0, d - e0]));
            }
        } else {
            out.push(Mono(vec![d]));
        }
    }
    out
}

fn unit_germ(field: &Field, n: usize, m: usize, j: usize, p: &Poly) -> Germ {
    let mut g = Germ::zero(field, n, m);
    g.comps[j] = p.clone();
    g
}

/// Span of x^alpha f_i e_j (|alpha| >= alpha_f) and x^alpha df/dx_l
/// (|alpha| >= alpha_d), truncated to degree k.
fn module_span(f: &Germ, k: u32, alpha_f: u32, alpha_d: u32) -> Subspace {
    let field = f.field().clone();
    let (n, m) = (f.n(), f.m());
    let window = Window::degree(&field, n, m, 0, k);
    let mut s = Subspace::new(window);
    for fi in &f.comps {
        let o = match fi.ord() {
            None => continue,
            Some(o) => o,
        };
        if o > k {
            continue;
        }
        for mono in all_monos_up_to(n, alpha_f, k - o) {
            let mult = Poly::monomial(&field, n, mono, field.one());
            let prod = fi.mul_trunc(&mult, Some(k));
            for j in 0..m {
                s.insert_germ(&unit_germ(&field, n, m, j, &prod));
            }
        }
    }
    for d in partials(f) {
        let o = match d.ord() {
            None => continue,
            Some(o) => o,
        };
        if o + alpha_d > k {
            continue;
        }
        for mono in all_monos_up_to(n, alpha_d, k - o) {
            let mult = Poly::monomial(&field, n, mono.clone(), field.one());
            let g = Germ {
                comps: d.comps.iter().map(|c| c.mul_trunc(&mult, Some(k))).collect(),
            };
            s.insert_germ(&g);
        }
    }
    s
}

/// Tangent image at jet level k over the window [0, k].
pub fn tangent_image(f: &Germ, k: u32) -> Subspace {
    module_span(f, k, 0, 1)
}

/// Tjurina-type module truncated at degree k.
pub fn tjurina_module(f: &Germ, k: u32, variant: TjurinaVariant) -> Subspace {
    match variant {
        TjurinaVariant::Full => module_span(f, k, 0, 0),
        TjurinaVariant::Sec => module_span(f, k, 0, 1),
    }
}

/// True when every degree-(k+2) monomial-vector lies in m * T(f) truncated at
/// k+2; promoted to the full-ring inclusion by the complete-local Nakayama rule.
pub fn m_tangent_inclusion(f: &Germ, k: u32) -> bool {
    let top = k + 2;
    let s = module_span(f, top, 1, 2);
    let window = &s.window;
    window
        .cols_where(|_, mono| mono.deg() == top)
        .iter()
        .all(|&c| s.is_pivot(c))
}

/// Weighted tangent image of F^r K . f over the weighted window [r, s]:
/// generators x^alpha f_i e_j with v(x^alpha) + v(f_i) >= r + d_j and
/// x^alpha df/dx_l with v(x^alpha) >= r + a_l.
pub fn weighted_tangent_image(f: &Germ, w: &Weights, r: i64, s: i64) -> Subspace {
    let field = f.field().clone();
    let (n, m) = (f.n(), f.m());
    assert_eq!(n, 2);
    let window = Window::weighted(&field, n, m, w.clone(), r, s);
    let mut sub = Subspace::new(window);
    let slice = |g: &Germ| g.weighted_slice(w, r, s);

    // ideal part
    for fi in &f.comps {
        let vfi = match fi.weighted_ord(&w.a) {
            None => continue,
            Some(v) => v,
        };
        for j in 0..m {
            // v(x^alpha) >= r + d_j - v(f_i), and keep alpha small enough to land in the window
            let lo = (r + w.d[j] - vfi).max(0);
            let hi = s + w.d[j] - vfi;
            if hi < lo {
                continue;
            }
            let b0 = (hi / w.a[0]) as u32;
            let b1 = (hi / w.a[1]) as u32;
            for e0 in 0..=b0 {
                for e1 in 0..=b1 {
                    let mono = Mono(vec![e0, e1]);
                    let v = mono.weighted_deg(&w.a);
                    if v < lo || v > hi {
                        continue;
                    }
                    let mult = Poly::monomial(&field, n, mono, field.one());
                    let prod = fi.mul(&mult);
                    sub.insert_germ(&slice(&unit_germ(&field, n, m, j, &prod)));
                }
            }
        }
    }
    // derivative part
    for (l, d) in partials(f).into_iter().enumerate() {
        // base level of the derivative vector
        let base = d
            .comps
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.weighted_ord(&w.a).map(|v| v - w.d[j]))
            .min();
        let base = match base {
            None => continue,
            Some(b) => b,
        };
        let lo = r + w.a[l];
        let hi = s - base;
        if hi < lo {
            continue;
        }
        let b0 = (hi.max(0) / w.a[0]) as u32;
        let b1 = (hi.max(0) / w.a[1]) as u32;
        for e0 in 0..=b0 {
            for e1 in 0..=b1 {
                let mono = Mono(vec![e0, e1]);
                let v = mono.weighted_deg(&w.a);
                if v < lo || v > hi {
                    continue;
                }
                let mult = Poly::monomial(&field, n, mono.clone(), field.one());
                let g = Germ { comps: d.comps.iter().map(|c| c.mul(&mult)).collect() };
                sub.insert_germ(&slice(&g));
            }
        }
    }
    sub
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn f7() -> Field {
        FieldSpec::make(7, 1).unwrap()
    }

    fn g(field: &Field, e1: &str, e2: &str) -> Germ {
        Germ::from_exprs(field, &[e1, e2]).unwrap()
    }

    #[test]
    fn tangent_image_membership_examples() {
        let f = f7();
        // contains (0, y^4) and (y^4, 0) for (x^3, y^3 + x^2 y)
        let a = g(&f, "x^3", "y^3+x^2*y");
        let s = tangent_image(&a, 4);
        assert!(s.contains_germ(&g(&f, "0", "y^4")).unwrap());
        assert!(s.contains_germ(&g(&f, "y^4", "0")).unwrap());
        // (y^4, 0) stays outside for (x^3, x y^2)
        let b = g(&f, "x^3", "x*y^2");
        let sb = tangent_image(&b, 4);
        assert!(!sb.contains_germ(&g(&f, "y^4", "0")).unwrap());
        // zero germ spans nothing
        let z = Germ::zero(&f, 2, 2);
        assert_eq!(tangent_image(&z, 3).rank(), 0);
    }

    #[test]
    fn sec_variant_equals_tangent_image() {
        let f = f7();
        let a = g(&f, "x^2", "y^3");
        let s1 = tangent_image(&a, 6);
        let s2 = tjurina_module(&a, 6, TjurinaVariant::Sec);
        assert_eq!(s1.rank(), s2.rank());
        for row in s1.rows() {
            assert!(s2.reduce(row.clone()).is_zero());
        }
    }

    #[test]
    fn full_tjurina_quotient_x2_y3() {
        // oracle: component ideals <x, y^3> and <x^2, y^2>; residues {1,y,y^2} and {1,x,y,xy}
        let f = f7();
        let a = g(&f, "x^2", "y^3");
        let s = tjurina_module(&a, 6, TjurinaVariant::Full);
        assert_eq!(s.codim(), 7);
    }

    #[test]
    fn inclusion_for_three_determined_jets() {
        let f = f7();
        assert!(m_tangent_inclusion(&g(&f, "x^3", "y^3+x^2*y"), 2));
        assert!(m_tangent_inclusion(&g(&f, "x^3", "y^3"), 2));
        assert!(!m_tangent_inclusion(&g(&f, "x^3", "0"), 2));
        assert!(!m_tangent_inclusion(&g(&f, "x^3", "0"), 5));
    }

    #[test]
    fn weighted_image_dichotomy() {
        let f = f7();
        let w = Weights::new(vec![2, 1], vec![4, 5]);
        // lambda = 2: lambda^2 = 4 != -1: contains (0, x y^4)
        let good = g(&f, "x^2+y^4", "y^5+2*x*y^3");
        let s = weighted_tangent_image(&good, &w, 1, 8);
        assert!(s.contains_germ(&g(&f, "0", "x*y^4")).unwrap());
        assert_eq!(s.codim(), 0);
        // over F_13, lambda = 5: lambda^2 = -1: (0, x y^4) escapes
        let f13 = FieldSpec::make(13, 1).unwrap();
        let bad = g(&f13, "x^2+y^4", "y^5+5*x*y^3");
        let mut s13 = weighted_tangent_image(&bad, &w, 1, 8);
        assert!(!s13.contains_germ(&g(&f13, "0", "x*y^4")).unwrap());
        // {(0, x y^t) : t > 3} is a complement basis within the window:
        // none lies in the image and together they fill it up
        let codim = s13.codim();
        let mut added = 0;
        for t in 4..=20u32 {
            let v = g(&f13, "0", &format!("x*y^{t}"));
            if w.level(1, &Mono(vec![1, t])) > 8 {
                continue;
            }
            assert!(!s13.contains_germ(&v).unwrap());
            assert!(s13.insert_germ(&v));
            added += 1;
        }
        assert_eq!(added, codim);
        assert_eq!(s13.codim(), 0);
    }

    #[test]
    fn weighted_matches_unweighted_on_trivial_weights() {
        let f = f7();
        let a = g(&f, "x^2+y^3", "x*y");
        let w = Weights::new(vec![1, 1], vec![0, 0]);
        let s_weighted = weighted_tangent_image(&a, &w, 1, 5);
        let s_plain = tangent_image(&a, 5);
        // weighted window [1,5] = degrees 1..5; compare ranks of the slice
        let cols: Vec<u32> = s_plain
            .window
            .cols_where(|_, m| m.deg() >= 1 && m.deg() <= 5);
        let inter = cols.len() - s_plain.intersection_dim(&cols);
        let _ = inter;
        // both must agree on membership of sample vectors
        for probe in [g(&f, "0", "x*y^2"), g(&f, "y^4", "0"), g(&f, "x^2*y", "x^3")] {
            let in_w = s_weighted.contains_germ(&probe).unwrap();
            let in_p = s_plain.contains_germ(&probe).unwrap();
            assert_eq!(in_w, in_p, "membership disagreement for {}", probe.display());
        }
    }
}
