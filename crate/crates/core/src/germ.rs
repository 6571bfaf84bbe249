//! Map germs (f_1, ..., f_m), weight systems with component shifts, and the
//! contact-group transforms (U, phi) acting by f -> U * (f o phi).

use crate::error::{Error, Result};
use crate::field::{Elt, Field};
use crate::poly::{Mono, Poly};

/// Variable weights `a` and component shifts `d`. A monomial x^alpha in
/// component j sits at level v_a(x^alpha) - d_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub a: Vec<i64>,
    pub d: Vec<i64>,
}

impl Weights {
    pub fn new(a: Vec<i64>, d: Vec<i64>) -> Self {
        assert!(a.iter().all(|&w| w >= 1), "variable weights must be positive");
        Weights { a, d }
    }

    pub fn level(&self, comp: usize, m: &Mono) -> i64 {
        m.weighted_deg(&self.a) - self.d[comp]
    }

    /// The jet-level bound used by the transversal theorem: either
    /// max(d) < (k+1) min(a) or min(d) > (k+1) max(a).
    pub fn transversal_condition(&self, k: u32) -> bool {
        let maxd = *self.d.iter().max().unwrap();
        let mind = *self.d.iter().min().unwrap();
        let maxa = *self.a.iter().max().unwrap();
        let mina = *self.a.iter().min().unwrap();
        maxd < (k as i64 + 1) * mina || mind > (k as i64 + 1) * maxa
    }
}

/// An m-tuple of polynomials vanishing at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Germ {
    pub comps: Vec<Poly>,
}

impl Germ {
    pub fn new(comps: Vec<Poly>) -> Self {
        debug_assert!(comps
            .iter()
            .all(|p| p.field.is_zero(&p.constant_term())));
        Germ { comps }
    }

    pub fn from_exprs(field: &Field, exprs: &[&str]) -> Result<Self> {
        let comps = exprs
            .iter()
            .map(|e| crate::poly::parse_xy(e, field))
            .collect::<Result<Vec<_>>>()?;
        Ok(Germ::new(comps))
    }

    pub fn field(&self) -> &Field {
        &self.comps[0].field
    }

    pub fn n(&self) -> usize {
        self.comps[0].n
    }

    pub fn m(&self) -> usize {
        self.comps.len()
    }

    pub fn zero(field: &Field, n: usize, m: usize) -> Self {
        Germ { comps: vec![Poly::zero(field, n); m] }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// min over components of the total-degree order; None when f = 0.
    pub fn ord(&self) -> Option<u32> {
        self.comps.iter().filter_map(|c| c.ord()).min()
    }

    /// Vector order: min over components j of (v_a(f_j) - d_j); None when zero.
    pub fn weighted_ord(&self, w: &Weights) -> Option<i64> {
        self.comps
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c.weighted_ord(&w.a).map(|v| v - w.d[j]))
            .min()
    }

    /// Per component, the terms of minimal shifted weighted degree (the common
    /// vector order). Components entirely above the vector order come out zero.
    pub fn weighted_initial(&self, w: &Weights) -> Germ {
        match self.weighted_ord(w) {
            None => self.clone(),
            Some(r) => Germ {
                comps: self
                    .comps
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c.weighted_slice(&w.a, r + w.d[j], r + w.d[j]))
                    .collect(),
            },
        }
    }

    /// Keep per-component terms with level in [lo, hi].
    pub fn weighted_slice(&self, w: &Weights, lo: i64, hi: i64) -> Germ {
        Germ {
            comps: self
                .comps
                .iter()
                .enumerate()
                .map(|(j, c)| c.weighted_slice(&w.a, lo + w.d[j], hi + w.d[j]))
                .collect(),
        }
    }

    pub fn truncate_deg(&self, cap: u32) -> Germ {
        Germ { comps: self.comps.iter().map(|c| c.truncate_deg(cap)).collect() }
    }

    pub fn add(&self, other: &Germ) -> Germ {
        Germ {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Germ) -> Germ {
        Germ {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn map_field(&self, to: &Field) -> Germ {
        Germ { comps: self.comps.iter().map(|c| c.map_field(to)).collect() }
    }

    /// True when all terms sit at one weighted level per component.
    pub fn is_weighted_homogeneous(&self, w: &Weights) -> bool {
        &self.weighted_initial(w) == self
    }

    pub fn display(&self) -> String {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

/// Try to find positive variable weights making every component weighted
/// homogeneous; shifts are set to the attained component degrees. Two
/// variables only.
pub fn discover_weights(f: &Germ) -> Option<Weights> {
    assert_eq!(f.n(), 2);
    // constraints: a . (e - e') = 0 for exponent pairs within a component
    let mut dir: Option<(i64, i64)> = None;
    for c in &f.comps {
        let monos: Vec<&Mono> = c.terms.keys().collect();
        for w in monos.windows(2) {
            let dx = w[1].0[0] as i64 - w[0].0[0] as i64;
            let dy = w[1].0[1] as i64 - w[0].0[1] as i64;
            if dx == 0 && dy == 0 {
                continue;
            }
            // need a1*dx + a2*dy = 0 -> direction (a1, a2) ~ (dy, -dx)
            let cand = (dy.abs(), dx.abs());
            if dx == 0 || dy == 0 || (dx > 0) == (dy > 0) {
                // same-sign difference: only solvable by non-positive weights
                if dx != 0 && dy != 0 {
                    return None;
                }
                if dx == 0 && dy != 0 {
                    return None;
                }
                if dy == 0 && dx != 0 {
                    return None;
                }
            }
            let g = num_integer::gcd(cand.0, cand.1);
            let cand = (cand.0 / g, cand.1 / g);
            match dir {
                None => dir = Some(cand),
                Some(d) if d == cand => {}
                Some(_) => return None,
            }
        }
    }
    let (a1, a2) = dir.unwrap_or((1, 1));
    if a1 <= 0 || a2 <= 0 {
        return None;
    }
    let a = vec![a1, a2];
    let d: Vec<i64> = f
        .comps
        .iter()
        .map(|c| c.weighted_ord(&a).unwrap_or(0))
        .collect();
    Some(Weights::new(a, d))
}

/// A contact-group element: invertible matrix U over the local ring and an
/// automorphism phi, stored to a truncation order.
#[derive(Clone, Debug)]
pub struct Transform {
    pub u: Vec<Vec<Poly>>,
    pub phi: Vec<Poly>,
    pub trunc: u32,
}

impl Transform {
    pub fn identity(field: &Field, n: usize, m: usize, trunc: u32) -> Self {
        let u = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            Poly::one(field, n)
                        } else {
                            Poly::zero(field, n)
                        }
                    })
                    .collect()
            })
            .collect();
        let phi = (0..n).map(|i| Poly::var(field, n, i)).collect();
        Transform { u, phi, trunc }
    }

    pub fn field(&self) -> &Field {
        &self.phi[0].field
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn m(&self) -> usize {
        self.u.len()
    }

    /// Diagonal matrix rows with an identity substitution.
    pub fn row_units(field: &Field, n: usize, units: Vec<Poly>, trunc: u32) -> Self {
        let m = units.len();
        let mut t = Transform::identity(field, n, m, trunc);
        for (i, u) in units.into_iter().enumerate() {
            t.u[i][i] = u;
        }
        t
    }

    /// Pure coordinate change with identity matrix.
    pub fn automorphism(field: &Field, phi: Vec<Poly>, m: usize, trunc: u32) -> Self {
        let n = phi.len();
        let mut t = Transform::identity(field, n, m, trunc);
        let _ = n;
        t.phi = phi;
        t
    }

    /// Row operation: component `to` += mult * component `from`.
    pub fn row_op(field: &Field, n: usize, m: usize, to: usize, from: usize, mult: Poly, trunc: u32) -> Self {
        assert_ne!(to, from);
        let mut t = Transform::identity(field, n, m, trunc);
        t.u[to][from] = mult;
        t
    }

    /// Swap two components.
    pub fn comp_swap(field: &Field, n: usize, m: usize, i: usize, j: usize, trunc: u32) -> Self {
        let mut t = Transform::identity(field, n, m, trunc);
        let zero = Poly::zero(field, n);
        let one = Poly::one(field, n);
        t.u[i][i] = zero.clone();
        t.u[j][j] = zero;
        t.u[i][j] = one.clone();
        t.u[j][i] = one;
        t
    }

    fn det_const(&self) -> Elt {
        // determinant of U(0)
        let f = self.field();
        let m = self.m();
        let mut mat: Vec<Vec<Elt>> = (0..m)
            .map(|i| (0..m).map(|j| self.u[i][j].constant_term()).collect())
            .collect();
        let mut det = f.one();
        for col in 0..m {
            let piv = (col..m).find(|&r| !f.is_zero(&mat[r][col]));
            let piv = match piv {
                None => return f.zero(),
                Some(p) => p,
            };
            if piv != col {
                mat.swap(piv, col);
                det = f.neg(&det);
            }
            det = f.mul(&det, &mat[col][col]);
            let inv = f.inv(&mat[col][col]).unwrap();
            for r in col + 1..m {
                if f.is_zero(&mat[r][col]) {
                    continue;
                }
                let c = f.mul(&mat[r][col], &inv);
                for cc in col..m {
                    let t = f.mul(&c, &mat[col][cc]);
                    mat[r][cc] = f.sub(&mat[r][cc], &t);
                }
            }
        }
        det
    }

    fn linear_part_det(&self) -> Elt {
        let f = self.field();
        let n = self.n();
        let lin: Vec<Vec<Elt>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.phi[i].coeff(&Mono::var(n, j)))
                    .collect()
            })
            .collect();
        match n {
            1 => lin[0][0].clone(),
            2 => f.sub(&f.mul(&lin[0][0], &lin[1][1]), &f.mul(&lin[0][1], &lin[1][0])),
            _ => panic!("determinant for n > 2 not needed"),
        }
    }

    /// Check the group-membership invariants.
    pub fn validate(&self) -> Result<()> {
        let f = self.field();
        if f.is_zero(&self.det_const()) {
            return Err(Error::InvalidTransform("U(0) is singular".into()));
        }
        for c in &self.phi {
            if !f.is_zero(&c.constant_term()) {
                return Err(Error::InvalidTransform(
                    "substitution does not preserve the origin".into(),
                ));
            }
        }
        if f.is_zero(&self.linear_part_det()) {
            return Err(Error::InvalidTransform(
                "linear part of the substitution is singular".into(),
            ));
        }
        Ok(())
    }

    /// Apply to a germ: U * (f o phi), truncated at `cap`.
    pub fn apply(&self, germ: &Germ, cap: u32) -> Result<Germ> {
        if self.trunc < cap {
            return Err(Error::InvalidTransform(format!(
                "transform stored to order {} applied at order {cap}",
                self.trunc
            )));
        }
        self.validate()?;
        let m = self.m();
        let composed: Vec<Poly> = germ
            .comps
            .iter()
            .map(|c| c.substitute(&self.phi, Some(cap)))
            .collect();
        let f = self.field();
        let n = self.n();
        let mut out = vec![Poly::zero(f, n); m];
        for i in 0..m {
            for j in 0..m {
                if self.u[i][j].is_zero() {
                    continue;
                }
                out[i] = out[i].add(&self.u[i][j].mul_trunc(&composed[j], Some(cap)));
            }
        }
        Ok(Germ { comps: out })
    }

    /// Composition: applying `self` after `earlier` equals applying the result.
    pub fn after(&self, earlier: &Transform) -> Transform {
        let cap = self.trunc.min(earlier.trunc);
        let m = self.m();
        let f = self.field();
        let n = self.n();
        // combined phi = earlier.phi o self.phi  (f o earlier_phi) o self_phi
        let phi: Vec<Poly> = earlier
            .phi
            .iter()
            .map(|p| p.substitute(&self.phi, Some(cap)))
            .collect();
        // combined U = self.U * (earlier.U o self.phi)
        let eu: Vec<Vec<Poly>> = earlier
            .u
            .iter()
            .map(|row| row.iter().map(|e| e.substitute(&self.phi, Some(cap))).collect())
            .collect();
        let mut u = vec![vec![Poly::zero(f, n); m]; m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if self.u[i][k].is_zero() || eu[k][j].is_zero() {
                        continue;
                    }
                    u[i][j] = u[i][j].add(&self.u[i][k].mul_trunc(&eu[k][j], Some(cap)));
                }
            }
        }
        Transform { u, phi, trunc: cap }
    }

    pub fn map_field(&self, to: &Field) -> Transform {
        Transform {
            u: self
                .u
                .iter()
                .map(|row| row.iter().map(|e| e.map_field(to)).collect())
                .collect(),
            phi: self.phi.iter().map(|p| p.map_field(to)).collect(),
            trunc: self.trunc,
        }
    }

    /// Largest level r >= 0 at which the transform sits in the weighted
    /// filtration of the contact group: each phi_i - x_i has weighted order
    /// >= a_i + r and each U_{ji} - delta_{ji} has order >= d_j - d_i + r.
    /// `query_cap` bounds the reported level for transforms fixing everything.
    pub fn filtration_level(&self, w: &Weights, query_cap: i64) -> Result<i64> {
        let f = self.field();
        let n = self.n();
        let mut level = query_cap;
        for i in 0..n {
            let diff = self.phi[i].sub(&Poly::var(f, n, i));
            if let Some(v) = diff.weighted_ord(&w.a) {
                level = level.min(v - w.a[i]);
            }
        }
        for j in 0..self.m() {
            for i in 0..self.m() {
                let mut diff = self.u[j][i].clone();
                if i == j {
                    diff = diff.sub(&Poly::one(f, n));
                }
                if let Some(v) = diff.weighted_ord(&w.a) {
                    level = level.min(v - (w.d[j] - w.d[i]));
                }
            }
        }
        if level < 0 {
            return Err(Error::InvalidTransform(
                "transform lies outside the weighted filtration at level 0".into(),
            ));
        }
        Ok(level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::poly::parse_xy;

    fn f7() -> Field {
        FieldSpec::make(7, 1).unwrap()
    }

    fn g(field: &Field, e1: &str, e2: &str) -> Germ {
        Germ::from_exprs(field, &[e1, e2]).unwrap()
    }

    #[test]
    fn ord_examples() {
        let f = f7();
        assert_eq!(g(&f, "x^2+y^4", "y^5+x*y^3").ord(), Some(2));
        assert_eq!(g(&f, "x^3", "x^2*y").ord(), Some(3));
        assert_eq!(g(&f, "0", "y^7").ord(), Some(7));
        assert_eq!(Germ::zero(&f, 2, 2).ord(), None);
    }

    #[test]
    fn weighted_vector_order() {
        let f = f7();
        let w = Weights::new(vec![2, 1], vec![4, 5]);
        // v_a(x^2+y^4) = 4 -> level 0; v_a(y^{5}+2xy^{3}) with q=3: y^5 -> 5, xy^3 -> 5
        let q3 = g(&f, "x^2+y^4", "y^5+2*x*y^3");
        assert_eq!(q3.weighted_ord(&w), Some(0));
        let w2 = Weights::new(vec![2, 1], vec![4, 5]);
        let tail = g(&f, "0", "x*y^4");
        assert_eq!(tail.weighted_ord(&w2), Some(1));
    }

    #[test]
    fn weighted_initial_examples() {
        let f = f7();
        let w = Weights::new(vec![2, 1], vec![4, 5]);
        let germ = g(&f, "x^2+y^4+y^5", "y^5+2*x*y^3+x*y^4");
        let init = germ.weighted_initial(&w);
        assert_eq!(init, g(&f, "x^2+y^4", "y^5+2*x*y^3"));
        assert!(init.is_weighted_homogeneous(&w));

        let w2 = Weights::new(vec![3, 2], vec![9, 8]);
        let germ2 = g(&f, "x^3+x*y^3", "x^2*y+y^4+y^6");
        assert_eq!(germ2.weighted_initial(&w2), g(&f, "x^3+x*y^3", "x^2*y+y^4"));
    }

    #[test]
    fn transversal_condition_examples() {
        // a=(1,1), d=(3,3), k=2: both branches fail
        assert!(!Weights::new(vec![1, 1], vec![3, 3]).transversal_condition(2));
        assert!(Weights::new(vec![1, 1], vec![0, 0]).transversal_condition(5));
        assert!(Weights::new(vec![2, 1], vec![9, 9]).transversal_condition(3));
    }

    #[test]
    fn apply_identity() {
        let f = f7();
        let germ = g(&f, "x^2+y^4", "y^5+2*x*y^3");
        let id = Transform::identity(&f, 2, 2, 10);
        assert_eq!(id.apply(&germ, 10).unwrap(), germ);
    }

    #[test]
    fn apply_row_operation() {
        let f = f7();
        // U = [[1,0],[-y^2,1]] on (x^2, y^5): second comp -> y^5 - y^2 x^2
        let germ = g(&f, "x^2", "y^5");
        let t = Transform::row_op(&f, 2, 2, 1, 0, parse_xy("-y^2", &f).unwrap(), 10);
        let r = t.apply(&germ, 10).unwrap();
        assert_eq!(r, g(&f, "x^2", "y^5-x^2*y^2"));
    }

    #[test]
    fn invalid_transforms_rejected() {
        let f = f7();
        let mut t = Transform::identity(&f, 2, 2, 10);
        t.u[0][0] = Poly::zero(&f, 2);
        assert!(t.validate().is_err());
        let mut t2 = Transform::identity(&f, 2, 2, 10);
        t2.phi[0] = Poly::one(&f, 2);
        assert!(t2.validate().is_err());
        let mut t3 = Transform::identity(&f, 2, 2, 10);
        t3.phi[0] = Poly::var(&f, 2, 1); // x -> y, y -> y: singular linear part
        assert!(t3.validate().is_err());
    }

    #[test]
    fn composition_matches_sequential_application() {
        use rand::{Rng, SeedableRng};
        let f = f7();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cap = 8;
        for _ in 0..20 {
            let rnd_poly = |rng: &mut rand_chacha::ChaCha8Rng, min_deg: u32| {
                let mut p = Poly::zero(&f, 2);
                for _ in 0..4 {
                    let e1 = rng.gen_range(0..3u32);
                    let e2 = rng.gen_range(0..3u32);
                    if e1 + e2 < min_deg {
                        continue;
                    }
                    let c = rng.gen_range(0..7i64);
                    p = p.add(&Poly::monomial(&f, 2, Mono(vec![e1, e2]), f.from_int(c)));
                }
                p
            };
            let mk_transform = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut t = Transform::identity(&f, 2, 2, cap);
                // unipotent-ish perturbations keep it valid
                t.u[0][1] = rnd_poly(rng, 0);
                t.u[1][0] = rnd_poly(rng, 1);
                t.phi[0] = Poly::var(&f, 2, 0).add(&rnd_poly(rng, 2));
                t.phi[1] = Poly::var(&f, 2, 1).add(&rnd_poly(rng, 2));
                t
            };
            let t1 = mk_transform(&mut rng);
            let t2 = mk_transform(&mut rng);
            let germ = g(&f, "x^2+y^3", "x*y+y^4");
            let seq = t1.apply(&t2.apply(&germ, cap).unwrap(), cap).unwrap();
            let combined = t1.after(&t2).apply(&germ, cap).unwrap();
            assert_eq!(seq.truncate_deg(cap), combined.truncate_deg(cap));
        }
    }

    #[test]
    fn filtration_level_examples() {
        let f = f7();
        let w = Weights::new(vec![2, 1], vec![4, 5]);
        let id = Transform::identity(&f, 2, 2, 10);
        assert_eq!(id.filtration_level(&w, 99).unwrap(), 99);
        // swap x <-> y: x-slot receives y (weight 1 < 2): outside level 0
        let mut sw = Transform::identity(&f, 2, 2, 10);
        sw.phi[0] = Poly::var(&f, 2, 1);
        sw.phi[1] = Poly::var(&f, 2, 0);
        assert!(sw.filtration_level(&w, 99).is_err());
        // phi = (x - y^4, y): deviation weight 4 = a_1 + 2 -> level 2
        let mut t = Transform::identity(&f, 2, 2, 10);
        t.phi[0] = parse_xy("x - y^4", &f).unwrap();
        assert_eq!(t.filtration_level(&w, 99).unwrap(), 2);
    }

    #[test]
    fn discover_weights_examples() {
        let f = f7();
        let germ = g(&f, "x^2+y^4", "y^5+2*x*y^3");
        let w = discover_weights(&germ).unwrap();
        assert_eq!(w.a, vec![2, 1]);
        assert_eq!(w.d, vec![4, 5]);
        let inhom = g(&f, "x^2+y^4+y^5", "y^5");
        assert!(discover_weights(&inhom).is_none());
        let hom = g(&f, "x^3", "x^2*y");
        let wh = discover_weights(&hom).unwrap();
        assert!(hom.is_weighted_homogeneous(&wh));
    }
}
