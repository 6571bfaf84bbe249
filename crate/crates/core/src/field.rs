//! Exact field arithmetic: prime fields F_p, finite extensions F_{p^k} built on
//! demand with a deterministic modulus, and the rationals as a characteristic-0
//! cross-check mode. No floating point anywhere.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Handle to an immutable field description. Cheap to clone.
pub type Field = Arc<FieldSpec>;

/// A field: F_{p^k} for prime p (k >= 1), or Q when `p == 0`.
///
/// The modulus for k > 1 is the lexicographically least monic irreducible of
/// degree k over F_p (least integer encoding sum c_i p^i of the non-leading
/// coefficients), so every run constructs the same tower.
#[derive(Debug, PartialEq, Eq)]
pub struct FieldSpec {
    p: u64,
    k: usize,
    /// Monic modulus coefficients c_0..c_k (c_k = 1); empty when k == 1 or p == 0.
    modulus: Vec<u64>,
}

/// An element of some field. The owning `FieldSpec` is passed to operations
/// rather than stored, so elements stay light inside polynomials.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Elt {
    Fp(u64),
    Ext(Vec<u64>),
    Rat(BigRational),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    r
}

fn invm(a: u64, p: u64) -> u64 {
    // p prime, a != 0
    powm(a, p - 2, p)
}

// ---------------------------------------------------------------------------
// dense univariate polynomials over F_p, used for modulus construction and
// extension arithmetic
// ---------------------------------------------------------------------------

fn ptrim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] = addm(r[i + j], mulm(ai, bj, p), p);
        }
    }
    ptrim(&mut r);
    r
}

fn prem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    // remainder of a by monic-normalizable m
    let mut r = a.to_vec();
    ptrim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = invm(m[dm], p);
    while r.len() > dm {
        let c = mulm(*r.last().unwrap(), lead_inv, p);
        let shift = r.len() - 1 - dm;
        for i in 0..=dm {
            r[shift + i] = subm(r[shift + i], mulm(c, m[i], p), p);
        }
        ptrim(&mut r);
    }
    r
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    ptrim(&mut a);
    ptrim(&mut b);
    while !b.is_empty() {
        let r = prem(&a, &b, p);
        a = b;
        b = r;
    }
    if let Some(&l) = a.last() {
        let li = invm(l, p);
        for c in a.iter_mut() {
            *c = mulm(*c, li, p);
        }
    }
    a
}

fn ppowmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut b = prem(base, m, p);
    let mut r = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            r = prem(&pmul(&r, &b, p), m, p);
        }
        b = prem(&pmul(&b, &b, p), m, p);
        e >>= 1;
    }
    r
}

/// x^(p^j) mod m, by iterating the Frobenius power.
fn frobenius_power(m: &[u64], p: u64, j: usize) -> Vec<u64> {
    let mut r = vec![0, 1]; // x
    for _ in 0..j {
        r = ppowmod(&r, p, m, p);
    }
    r
}

fn poly_is_irreducible(m: &[u64], p: u64) -> bool {
    // Rabin test: x^(p^k) == x mod m, and gcd(x^(p^(k/q)) - x, m) = 1 for prime q | k.
    let k = m.len() - 1;
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    let mut fr = frobenius_power(m, p, k);
    // fr - x
    if fr.len() < 2 {
        fr.resize(2, 0);
    }
    fr[1] = subm(fr[1], 1, p);
    ptrim(&mut fr);
    if !fr.is_empty() {
        return false;
    }
    let mut q = 2usize;
    let mut kk = k;
    let mut prime_divs = vec![];
    while q * q <= kk {
        if kk % q == 0 {
            prime_divs.push(q);
            while kk % q == 0 {
                kk /= q;
            }
        }
        q += 1;
    }
    if kk > 1 {
        prime_divs.push(kk);
    }
    for q in prime_divs {
        let mut g = frobenius_power(m, p, k / q);
        if g.len() < 2 {
            g.resize(2, 0);
        }
        g[1] = subm(g[1], 1, p);
        ptrim(&mut g);
        let gc = pgcd(&g, m, p);
        if gc.len() != 1 {
            return false;
        }
    }
    true
}

fn least_irreducible(p: u64, k: usize) -> Vec<u64> {
    // monic x^k + sum c_i x^i, scanning encodings sum c_i p^i upward
    let mut enc: u64 = 0;
    loop {
        let mut m = Vec::with_capacity(k + 1);
        let mut e = enc;
        for _ in 0..k {
            m.push(e % p);
            e /= p;
        }
        if e > 0 {
            panic!("no irreducible of degree {k} over F_{p} found");
        }
        m.push(1);
        if poly_is_irreducible(&m, p) {
            return m;
        }
        enc += 1;
    }
}

// cache of embedding roots: (p, sub_k, super_k) -> repr of the canonical root
// of the sub-modulus inside F_{p^super_k}
static EMBED_CACHE: OnceLock<Mutex<HashMap<(u64, usize, usize), Vec<u64>>>> = OnceLock::new();

impl FieldSpec {
    pub fn rationals() -> Field {
        Arc::new(FieldSpec { p: 0, k: 1, modulus: vec![] })
    }

    /// Build F_{p^k} (or Q when p = 0, requiring k = 1).
    pub fn make(p: u64, k: usize) -> Result<Field> {
        assert!(k >= 1, "extension degree must be positive");
        if p == 0 {
            if k != 1 {
                return Err(Error::RationalExtension(k));
            }
            return Ok(Self::rationals());
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let modulus = if k == 1 { vec![] } else { least_irreducible(p, k) };
        Ok(Arc::new(FieldSpec { p, k, modulus }))
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn extension_degree(&self) -> usize {
        self.k
    }

    pub fn is_rational(&self) -> bool {
        self.p == 0
    }

    /// Modulus coefficients c_0..c_k for k > 1 extensions.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Field order p^k as u64; panics for rationals or overflow.
    pub fn order(&self) -> u64 {
        assert!(self.p > 0);
        let mut q: u64 = 1;
        for _ in 0..self.k {
            q = q.checked_mul(self.p).expect("field order overflow");
        }
        q
    }

    pub fn zero(&self) -> Elt {
        match (self.p, self.k) {
            (0, _) => Elt::Rat(BigRational::zero()),
            (_, 1) => Elt::Fp(0),
            (_, k) => Elt::Ext(vec![0; k]),
        }
    }

    pub fn one(&self) -> Elt {
        match (self.p, self.k) {
            (0, _) => Elt::Rat(BigRational::one()),
            (_, 1) => Elt::Fp(1),
            (_, k) => {
                let mut v = vec![0; k];
                v[0] = 1;
                Elt::Ext(v)
            }
        }
    }

    pub fn from_int(&self, n: i64) -> Elt {
        match (self.p, self.k) {
            (0, _) => Elt::Rat(BigRational::from(BigInt::from(n))),
            (p, 1) => Elt::Fp(n.rem_euclid(p as i64) as u64),
            (p, k) => {
                let mut v = vec![0; k];
                v[0] = n.rem_euclid(p as i64) as u64;
                Elt::Ext(v)
            }
        }
    }

    pub fn is_zero(&self, a: &Elt) -> bool {
        match a {
            Elt::Fp(x) => *x == 0,
            Elt::Ext(v) => v.iter().all(|&c| c == 0),
            Elt::Rat(r) => r.is_zero(),
        }
    }

    pub fn add(&self, a: &Elt, b: &Elt) -> Elt {
        match (a, b) {
            (Elt::Fp(x), Elt::Fp(y)) => Elt::Fp(addm(*x, *y, self.p)),
            (Elt::Ext(x), Elt::Ext(y)) => {
                Elt::Ext(x.iter().zip(y).map(|(&u, &v)| addm(u, v, self.p)).collect())
            }
            (Elt::Rat(x), Elt::Rat(y)) => Elt::Rat(x + y),
            _ => panic!("mismatched element kinds"),
        }
    }

    pub fn sub(&self, a: &Elt, b: &Elt) -> Elt {
        match (a, b) {
            (Elt::Fp(x), Elt::Fp(y)) => Elt::Fp(subm(*x, *y, self.p)),
            (Elt::Ext(x), Elt::Ext(y)) => {
                Elt::Ext(x.iter().zip(y).map(|(&u, &v)| subm(u, v, self.p)).collect())
            }
            (Elt::Rat(x), Elt::Rat(y)) => Elt::Rat(x - y),
            _ => panic!("mismatched element kinds"),
        }
    }

    pub fn neg(&self, a: &Elt) -> Elt {
        match a {
            Elt::Fp(x) => Elt::Fp(if *x == 0 { 0 } else { self.p - x }),
            Elt::Ext(v) => {
                Elt::Ext(v.iter().map(|&c| if c == 0 { 0 } else { self.p - c }).collect())
            }
            Elt::Rat(r) => Elt::Rat(-r),
        }
    }

    pub fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        match (a, b) {
            (Elt::Fp(x), Elt::Fp(y)) => Elt::Fp(mulm(*x, *y, self.p)),
            (Elt::Ext(x), Elt::Ext(y)) => {
                let prod = pmul(x, y, self.p);
                let mut r = prem(&prod, &self.modulus, self.p);
                r.resize(self.k, 0);
                Elt::Ext(r)
            }
            (Elt::Rat(x), Elt::Rat(y)) => Elt::Rat(x * y),
            _ => panic!("mismatched element kinds"),
        }
    }

    pub fn inv(&self, a: &Elt) -> Result<Elt> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(match a {
            Elt::Fp(x) => Elt::Fp(invm(*x, self.p)),
            Elt::Ext(_) => {
                // a^(q-2)
                self.pow(a, self.order() - 2)
            }
            Elt::Rat(r) => Elt::Rat(r.recip()),
        })
    }

    pub fn div(&self, a: &Elt, b: &Elt) -> Result<Elt> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Elt, mut e: u64) -> Elt {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    pub fn pow_i(&self, a: &Elt, e: i64) -> Result<Elt> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            Ok(self.pow(&self.inv(a)?, (-e) as u64))
        }
    }

    /// Frobenius x -> x^p (identity on rationals).
    pub fn frobenius(&self, a: &Elt) -> Elt {
        if self.p == 0 {
            a.clone()
        } else {
            self.pow(a, self.p)
        }
    }

    /// Inverse of Frobenius: the unique p-th root.
    pub fn frobenius_inv(&self, a: &Elt) -> Elt {
        if self.p == 0 {
            return a.clone();
        }
        // x -> x^(p^(k-1)) inverts x -> x^p on F_{p^k}
        let mut r = a.clone();
        for _ in 0..self.k - 1 {
            r = self.pow(&r, self.p);
        }
        r
    }

    /// Deterministic total encoding used for root tie-breaks: lexicographic on
    /// the coefficient vector, low coefficient most significant.
    pub fn encode(&self, a: &Elt) -> Vec<u64> {
        match a {
            Elt::Fp(x) => vec![*x],
            Elt::Ext(v) => v.clone(),
            Elt::Rat(_) => panic!("no canonical encoding for rationals"),
        }
    }

    /// Enumerate all field elements in encoding order (finite fields only).
    pub fn elements(&self) -> impl Iterator<Item = Elt> + '_ {
        assert!(self.p > 0);
        let q = self.order();
        (0..q).map(move |mut n| {
            if self.k == 1 {
                Elt::Fp(n)
            } else {
                let mut v = Vec::with_capacity(self.k);
                for _ in 0..self.k {
                    v.push(n % self.p);
                    n /= self.p;
                }
                Elt::Ext(v)
            }
        })
    }

    /// The element with the given encoding index (inverse of `elements` order).
    pub fn element_from_index(&self, mut n: u64) -> Elt {
        assert!(self.p > 0);
        if self.k == 1 {
            Elt::Fp(n % self.p)
        } else {
            let mut v = Vec::with_capacity(self.k);
            for _ in 0..self.k {
                v.push(n % self.p);
                n /= self.p;
            }
            Elt::Ext(v)
        }
    }

    pub fn format_elt(&self, a: &Elt) -> String {
        match a {
            Elt::Fp(x) => format!("{x}"),
            Elt::Ext(v) => {
                let mut parts = vec![];
                for (i, &c) in v.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let m = match i {
                        0 => format!("{c}"),
                        1 => {
                            if c == 1 {
                                "g".into()
                            } else {
                                format!("{c}*g")
                            }
                        }
                        _ => {
                            if c == 1 {
                                format!("g^{i}")
                            } else {
                                format!("{c}*g^{i}")
                            }
                        }
                    };
                    parts.push(m);
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join("+")
                }
            }
            Elt::Rat(r) => format!("{r}"),
        }
    }
}

/// True when `sub` embeds canonically into `sup` (same characteristic and the
/// degree divides).
pub fn embeds(sub: &Field, sup: &Field) -> bool {
    if sub.p == 0 || sup.p == 0 {
        return sub.p == sup.p;
    }
    sub.p == sup.p && sup.k % sub.k == 0
}

/// Map an element of `sub` into `sup` through the canonical (least-root) embedding.
pub fn embed(sub: &Field, sup: &Field, a: &Elt) -> Elt {
    assert!(embeds(sub, sup), "no canonical embedding");
    if sub.p == 0 || sub.k == sup.k {
        return a.clone();
    }
    if sub.k == 1 {
        // prime field: constants map to constants
        let x = match a {
            Elt::Fp(x) => *x,
            _ => unreachable!(),
        };
        let mut v = vec![0; sup.k];
        v[0] = x;
        return if sup.k == 1 { Elt::Fp(x) } else { Elt::Ext(v) };
    }
    let cache = EMBED_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (sub.p, sub.k, sup.k);
    let root_repr = {
        let guard = cache.lock().unwrap();
        guard.get(&key).cloned()
    };
    let root_repr = match root_repr {
        Some(r) => r,
        None => {
            // least root of sub.modulus inside sup
            let coeffs: Vec<Elt> = sub.modulus.iter().map(|&c| sup.from_int(c as i64)).collect();
            let roots = roots_in_field(sup, &coeffs);
            let mut reprs: Vec<Vec<u64>> =
                roots.iter().map(|(r, _)| sup.encode(r)).collect();
            reprs.sort();
            let least = reprs.into_iter().next().expect("modulus must split in the overfield");
            cache.lock().unwrap().insert(key, least.clone());
            least
        }
    };
    let root = if sup.k == 1 { Elt::Fp(root_repr[0]) } else { Elt::Ext(root_repr) };
    // evaluate a's repr polynomial at the root
    let coeffs = match a {
        Elt::Ext(v) => v.clone(),
        Elt::Fp(x) => vec![*x],
        _ => unreachable!(),
    };
    let mut acc = sup.zero();
    for &c in coeffs.iter().rev() {
        acc = sup.mul(&acc, &root);
        acc = sup.add(&acc, &sup.from_int(c as i64));
    }
    acc
}

/// Least common overfield of two specs with the same characteristic.
pub fn common_field(a: &Field, b: &Field) -> Result<Field> {
    if a.p != b.p {
        return Err(Error::DimensionMismatch(format!(
            "characteristics {} and {} differ",
            a.p, b.p
        )));
    }
    if a.k == b.k {
        return Ok(a.clone());
    }
    let l = num_integer::lcm(a.k, b.k);
    FieldSpec::make(a.p, l)
}

// ---------------------------------------------------------------------------
// univariate polynomials with Elt coefficients (root extraction machinery)
// ---------------------------------------------------------------------------

fn utrim(f: &Field, v: &mut Vec<Elt>) {
    while v.last().map(|c| f.is_zero(c)).unwrap_or(false) {
        v.pop();
    }
}

fn uadd(f: &Field, a: &[Elt], b: &[Elt]) -> Vec<Elt> {
    let n = a.len().max(b.len());
    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        r.push(f.add(&x, &y));
    }
    utrim(f, &mut r);
    r
}

fn umul(f: &Field, a: &[Elt], b: &[Elt]) -> Vec<Elt> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![f.zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if f.is_zero(ai) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = f.mul(ai, bj);
            r[i + j] = f.add(&r[i + j], &t);
        }
    }
    utrim(f, &mut r);
    r
}

fn urem(f: &Field, a: &[Elt], m: &[Elt]) -> Vec<Elt> {
    let mut r = a.to_vec();
    utrim(f, &mut r);
    let dm = m.len() - 1;
    let li = f.inv(&m[dm]).expect("nonzero leading coefficient");
    while r.len() > dm {
        let c = f.mul(r.last().unwrap(), &li);
        let shift = r.len() - 1 - dm;
        for i in 0..=dm {
            let t = f.mul(&c, &m[i]);
            r[shift + i] = f.sub(&r[shift + i], &t);
        }
        utrim(f, &mut r);
    }
    r
}

fn udivexact(f: &Field, a: &[Elt], m: &[Elt]) -> Vec<Elt> {
    // quotient of a by m assuming exact division
    let mut r = a.to_vec();
    utrim(f, &mut r);
    let dm = m.len() - 1;
    let li = f.inv(&m[dm]).expect("nonzero leading coefficient");
    let mut q = vec![f.zero(); r.len().saturating_sub(dm)];
    while r.len() > dm {
        let c = f.mul(r.last().unwrap(), &li);
        let shift = r.len() - 1 - dm;
        q[shift] = c.clone();
        for i in 0..=dm {
            let t = f.mul(&c, &m[i]);
            r[shift + i] = f.sub(&r[shift + i], &t);
        }
        utrim(f, &mut r);
    }
    q
}

fn ugcd(f: &Field, a: &[Elt], b: &[Elt]) -> Vec<Elt> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    utrim(f, &mut a);
    utrim(f, &mut b);
    while !b.is_empty() {
        let r = urem(f, &a, &b);
        a = b;
        b = r;
    }
    if let Some(l) = a.last().cloned() {
        let li = f.inv(&l).unwrap();
        for c in a.iter_mut() {
            *c = f.mul(c, &li);
        }
    }
    a
}

fn uderiv(f: &Field, a: &[Elt]) -> Vec<Elt> {
    let mut r = vec![];
    for (i, c) in a.iter().enumerate().skip(1) {
        r.push(f.mul(c, &f.from_int(i as i64)));
    }
    utrim(f, &mut r);
    r
}

fn ueval(f: &Field, a: &[Elt], x: &Elt) -> Elt {
    let mut acc = f.zero();
    for c in a.iter().rev() {
        acc = f.mul(&acc, x);
        acc = f.add(&acc, c);
    }
    acc
}

fn upowmod_big(f: &Field, base: &[Elt], p: u64, times: usize, m: &[Elt]) -> Vec<Elt> {
    // base^(p^times) mod m via iterated p-th powers
    let mut r = urem(f, base, m);
    for _ in 0..times {
        let mut acc = vec![f.one()];
        let mut b = r.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = urem(f, &umul(f, &acc, &b), m);
            }
            b = urem(f, &umul(f, &b, &b), m);
            e >>= 1;
        }
        r = acc;
    }
    r
}

/// All roots of `poly` (coefficients over `f`) lying inside `f` itself, with
/// multiplicities. Finite fields only.
pub fn roots_in_field(f: &Field, poly: &[Elt]) -> Vec<(Elt, usize)> {
    assert!(f.p > 0);
    let mut a = poly.to_vec();
    utrim(f, &mut a);
    assert!(!a.is_empty(), "zero polynomial");
    if a.len() == 1 {
        return vec![];
    }
    // candidate roots from the squarefree linear part; multiplicities by division
    let sqfree = radical(f, &a);
    let lin = linear_part(f, &sqfree);
    let mut out = vec![];
    for r in all_linear_roots(f, &lin) {
        // multiplicity in the original
        let mut mult = 0;
        let lin_factor = vec![f.neg(&r), f.one()];
        let mut cur = a.clone();
        loop {
            if f.is_zero(&ueval(f, &cur, &r)) && cur.len() > 1 {
                cur = udivexact(f, &cur, &lin_factor);
                mult += 1;
            } else {
                break;
            }
        }
        debug_assert!(mult >= 1);
        out.push((r, mult));
    }
    out.sort_by_key(|(r, _)| f.encode(r));
    out
}

fn pth_root_poly(f: &Field, a: &[Elt]) -> Vec<Elt> {
    // inverse of g -> g(x^p) with Frobenius-inverted coefficients
    let p = f.p as usize;
    let mut g = vec![];
    for (i, c) in a.iter().enumerate() {
        if !f.is_zero(c) {
            debug_assert!(i % p == 0);
            while g.len() < i / p {
                g.push(f.zero());
            }
            g.push(f.frobenius_inv(c));
        }
    }
    g
}

fn monic(f: &Field, a: &[Elt]) -> Vec<Elt> {
    let mut m = a.to_vec();
    utrim(f, &mut m);
    if let Some(l) = m.last().cloned() {
        let li = f.inv(&l).unwrap();
        for c in m.iter_mut() {
            *c = f.mul(c, &li);
        }
    }
    m
}

/// Monic product of the distinct irreducible factors, correct in char p even
/// when multiplicities are divisible by p.
fn radical(f: &Field, a: &[Elt]) -> Vec<Elt> {
    let a = monic(f, a);
    if a.len() <= 1 {
        return vec![f.one()];
    }
    let d = uderiv(f, &a);
    if d.is_empty() {
        return radical(f, &pth_root_poly(f, &a));
    }
    let g = ugcd(f, &a, &d);
    if g.len() == 1 {
        return a;
    }
    let w = udivexact(f, &a, &g);
    let r2 = radical(f, &g);
    // lcm(w, r2)
    let common = ugcd(f, &w, &r2);
    monic(f, &umul(f, &w, &udivexact(f, &r2, &common)))
}

fn linear_part(f: &Field, sqfree: &[Elt]) -> Vec<Elt> {
    // gcd(sqfree, x^q - x): product of the linear factors
    if sqfree.len() <= 1 {
        return sqfree.to_vec();
    }
    let x = vec![f.zero(), f.one()];
    let xq = upowmod_big(f, &x, f.p, f.k, sqfree);
    let diff = uadd(f, &xq, &[f.zero(), f.neg(&f.one())]);
    if diff.is_empty() {
        return sqfree.to_vec();
    }
    ugcd(f, sqfree, &diff)
}

fn all_linear_roots(f: &Field, lin: &[Elt]) -> Vec<Elt> {
    // lin is a product of distinct linear factors; split deterministically
    let mut out = vec![];
    let mut stack = vec![lin.to_vec()];
    while let Some(g) = stack.pop() {
        if g.len() <= 1 {
            continue;
        }
        if g.len() == 2 {
            // monic x + c -> root -c
            let li = f.inv(&g[1]).unwrap();
            out.push(f.neg(&f.mul(&g[0], &li)));
            continue;
        }
        // deterministic split sweep
        let q = f.order();
        let mut split = None;
        if f.p == 2 {
            // trace splitting: T(cx) = sum of (cx)^(2^i) over i < k
            let levels = f.k;
            'sweep2: for idx in 1..q {
                let c = f.element_from_index(idx);
                // t = sum (c x)^(2^i) mod g
                let mut term = urem(f, &[f.zero(), c.clone()], &g);
                let mut t = term.clone();
                for _ in 1..levels {
                    term = urem(f, &umul(f, &term, &term), &g);
                    t = uadd(f, &t, &term);
                }
                if t.len() >= 1 {
                    let d = ugcd(f, &t, &g);
                    if d.len() > 1 && d.len() < g.len() {
                        split = Some(d);
                        break 'sweep2;
                    }
                }
            }
        } else {
            let e = (q - 1) / 2;
            'sweep: for idx in 0..q {
                let c = f.element_from_index(idx);
                // h = (x + c)^e - 1 mod g
                let base = vec![c.clone(), f.one()];
                let mut acc = vec![f.one()];
                let mut b = urem(f, &base, &g);
                let mut ee = e;
                while ee > 0 {
                    if ee & 1 == 1 {
                        acc = urem(f, &umul(f, &acc, &b), &g);
                    }
                    b = urem(f, &umul(f, &b, &b), &g);
                    ee >>= 1;
                }
                let h = uadd(f, &acc, &[f.neg(&f.one())]);
                if !h.is_empty() {
                    let d = ugcd(f, &h, &g);
                    if d.len() > 1 && d.len() < g.len() {
                        split = Some(d);
                        break 'sweep;
                    }
                }
            }
        }
        let d = split.expect("splitting sweep must find a factor");
        let e = udivexact(f, &g, &d);
        stack.push(d);
        stack.push(e);
    }
    out
}

/// Degrees of the irreducible factors of the squarefree part (distinct-degree
/// factorization); used to size splitting fields.
fn factor_degrees(f: &Field, a: &[Elt]) -> Vec<usize> {
    let mut s = radical(f, a);
    let mut out = vec![];
    let mut i = 1usize;
    let x = vec![f.zero(), f.one()];
    let mut h = x.clone();
    while s.len() > 2 {
        if 2 * i > s.len() - 1 {
            // what remains is a single irreducible factor
            out.push(s.len() - 1);
            return out;
        }
        h = upowmod_big(f, &h, f.p, f.k, &s);
        let diff = uadd(f, &h, &[f.zero(), f.neg(&f.one())]);
        let g = if diff.is_empty() { s.clone() } else { ugcd(f, &s, &diff) };
        if g.len() > 1 {
            for _ in 0..(g.len() - 1) / i {
                out.push(i);
            }
            s = udivexact(f, &s, &g);
            if s.len() > 1 {
                h = urem(f, &h, &s);
            }
        }
        i += 1;
    }
    if s.len() == 2 {
        out.push(1);
    }
    out
}

/// All roots of `poly` with multiplicity, in the smallest extension of `f`
/// that splits it. Returns the roots together with the (possibly extended)
/// field; the input field embeds into it.
pub fn splitting_roots(
    f: &Field,
    poly: &[Elt],
    allow_extension: bool,
) -> Result<(Vec<(Elt, usize)>, Field)> {
    let mut a = poly.to_vec();
    utrim(f, &mut a);
    assert!(!a.is_empty(), "zero polynomial");
    if f.p == 0 {
        return rational_roots(f, &a, allow_extension);
    }
    let degs = factor_degrees(f, &a);
    let mut m = 1usize;
    for d in degs {
        m = num_integer::lcm(m, d);
    }
    if m == 1 {
        return Ok((roots_in_field(f, &a), f.clone()));
    }
    if !allow_extension {
        return Err(Error::ExtensionRequired { degree: m });
    }
    let big = FieldSpec::make(f.p, f.k * m)?;
    let lifted: Vec<Elt> = a.iter().map(|c| embed(f, &big, c)).collect();
    Ok((roots_in_field(&big, &lifted), big))
}

fn rational_roots(
    f: &Field,
    a: &[Elt],
    _allow_extension: bool,
) -> Result<(Vec<(Elt, usize)>, Field)> {
    // rational root search on the primitive integer model, multiplicities by division
    let coeffs: Vec<BigRational> = a
        .iter()
        .map(|c| match c {
            Elt::Rat(r) => r.clone(),
            _ => unreachable!(),
        })
        .collect();
    // clear denominators
    let mut den = BigInt::one();
    for c in &coeffs {
        den = num_integer::lcm(den.clone(), c.denom().clone());
    }
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * BigRational::from(den.clone())).to_integer()).collect();
    let lead = ints.last().unwrap().clone();
    let mut tail_idx = 0;
    while ints[tail_idx].is_zero() {
        tail_idx += 1;
    }
    let tail = ints[tail_idx].clone();
    let mut roots: Vec<(Elt, usize)> = vec![];
    if tail_idx > 0 {
        roots.push((f.zero(), tail_idx));
    }
    let divisors = |n: &BigInt| -> Vec<BigInt> {
        let n = n.abs();
        let mut out = vec![];
        let mut d = BigInt::one();
        // factor small; exact but naive, adequate for desk-scale cross checks
        while &d * &d <= n {
            if (&n % &d).is_zero() {
                out.push(d.clone());
                out.push(&n / &d);
            }
            d += 1;
        }
        out.sort();
        out.dedup();
        out
    };
    let mut cur = a.to_vec();
    for pnum in divisors(&tail) {
        for pden in divisors(&lead) {
            for sign in [1i64, -1] {
                let cand = BigRational::new(pnum.clone() * BigInt::from(sign), pden.clone());
                let e = Elt::Rat(cand.clone());
                if f.is_zero(&ueval(f, &cur, &e)) {
                    let mut mult = 0;
                    let lin = vec![f.neg(&e), f.one()];
                    while cur.len() > 1 && f.is_zero(&ueval(f, &cur, &e)) {
                        cur = udivexact(f, &cur, &lin);
                        mult += 1;
                    }
                    if mult > 0 {
                        roots.push((e, mult));
                    }
                }
            }
        }
    }
    let split = cur.len() <= 1 || roots.iter().map(|(_, m)| m).sum::<usize>() + 1 == a.len();
    if !split {
        return Err(Error::ExtensionRequired { degree: cur.len() - 1 });
    }
    Ok((roots, f.clone()))
}

/// n-th root of a nonzero element; extends the field if necessary. Ties break
/// to the lexicographically least representation.
pub fn nth_root(f: &Field, a: &Elt, n: u64) -> Result<(Elt, Field)> {
    assert!(n >= 1);
    if f.is_zero(a) {
        return Err(Error::NoRoot("nth_root of zero".into()));
    }
    if f.p == 0 {
        // exact rational n-th root or error
        let r = match a {
            Elt::Rat(r) => r,
            _ => unreachable!(),
        };
        let num = r.numer().clone();
        let den = r.denom().clone();
        let root_int = |x: &BigInt| -> Option<BigInt> {
            if x.is_negative() && n % 2 == 0 {
                return None;
            }
            let mag = x.abs();
            let r = mag.nth_root(n as u32);
            if num_traits::pow(r.clone(), n as usize) == mag {
                Some(if x.is_negative() { -r } else { r })
            } else {
                None
            }
        };
        match (root_int(&num), root_int(&den)) {
            (Some(a), Some(b)) => Ok((Elt::Rat(BigRational::new(a, b)), f.clone())),
            _ => Err(Error::NoRoot(format!("{} has no exact rational {n}-th root", f.format_elt(a)))),
        }
    } else {
        // strip p-part of n via inverse Frobenius, then solve the coprime part
        let p = f.p;
        let mut n1 = n;
        let mut a1 = a.clone();
        while n1 % p == 0 {
            n1 /= p;
            a1 = f.frobenius_inv(&a1);
        }
        if n1 == 1 {
            return Ok((a1, f.clone()));
        }
        // try successive extensions until x^n1 = a1 becomes solvable
        for m in 1..=12usize {
            // stay within u64 field orders
            if (f.k * m) as u32 * (64 - p.leading_zeros()) >= 63 {
                break;
            }
            let big = if m == 1 { f.clone() } else { FieldSpec::make(f.p, f.k * m)? };
            let b = if m == 1 { a1.clone() } else { embed(f, &big, &a1) };
            let q = big.order();
            let d = num_integer::gcd(n1, q - 1);
            if f.is_zero(&f.sub(&big.pow(&b, (q - 1) / d), &big.one())) {
                // solvable: poly x^n1 - b splits enough to have a root here
                let mut poly = vec![big.neg(&b)];
                for _ in 0..n1 {
                    poly.push(big.zero());
                }
                let idx = poly.len() - 1;
                poly[idx] = big.one();
                let roots = roots_in_field(&big, &poly);
                let least = roots
                    .into_iter()
                    .map(|(r, _)| r)
                    .min_by_key(|r| big.encode(r))
                    .ok_or_else(|| Error::NoRoot("solvability check passed but no root found".into()))?;
                return Ok((least, big));
            }
        }
        Err(Error::NoRoot(format!("no {n}-th root within degree-24 extensions")))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 0 {
            write!(w, "Q")
        } else if self.k == 1 {
            write!(w, "F_{}", self.p)
        } else {
            write!(w, "F_{}^{}", self.p, self.k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_prime() {
        assert!(matches!(FieldSpec::make(4, 1), Err(Error::NotPrime(4))));
        assert!(matches!(FieldSpec::make(0, 2), Err(Error::RationalExtension(2))));
    }

    #[test]
    fn f7_basic_ops() {
        let f = FieldSpec::make(7, 1).unwrap();
        let three = f.from_int(3);
        let five = f.from_int(5);
        assert_eq!(f.mul(&three, &five), f.one());
        assert!(matches!(f.inv(&f.zero()), Err(Error::DivisionByZero)));
    }

    #[test]
    fn f13_pow() {
        let f = FieldSpec::make(13, 1).unwrap();
        assert_eq!(f.pow(&f.from_int(5), 2), f.from_int(12));
    }

    #[test]
    fn deterministic_modulus_f169() {
        let f = FieldSpec::make(13, 2).unwrap();
        // enumeration oracle: x^2+1 splits (5^2 = -1), x^2+2 has no root
        assert_eq!(f.modulus(), &[2, 0, 1]);
    }

    #[test]
    fn field_axioms_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for spec in [(7u64, 1usize), (5, 2), (2, 3), (13, 1)] {
            let f = FieldSpec::make(spec.0, spec.1).unwrap();
            let q = f.order();
            for _ in 0..1000 {
                let a = f.element_from_index(rng.gen_range(0..q));
                let b = f.element_from_index(rng.gen_range(0..q));
                let c = f.element_from_index(rng.gen_range(0..q));
                let ab_c = f.mul(&f.mul(&a, &b), &c);
                let a_bc = f.mul(&a, &f.mul(&b, &c));
                assert_eq!(ab_c, a_bc);
                let dist = f.mul(&a, &f.add(&b, &c));
                let dist2 = f.add(&f.mul(&a, &b), &f.mul(&a, &c));
                assert_eq!(dist, dist2);
                if !f.is_zero(&a) {
                    assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
                }
            }
        }
    }

    #[test]
    fn roots_cubic_f7() {
        // x^3 - 1 over F_7: roots 1, 2, 4
        let f = FieldSpec::make(7, 1).unwrap();
        let poly = vec![f.from_int(-1), f.zero(), f.zero(), f.one()];
        let (roots, fld) = splitting_roots(&f, &poly, true).unwrap();
        assert_eq!(fld.extension_degree(), 1);
        let vals: Vec<u64> = roots
            .iter()
            .map(|(r, m)| {
                assert_eq!(*m, 1);
                match r {
                    Elt::Fp(v) => *v,
                    _ => unreachable!(),
                }
            })
            .collect();
        assert_eq!(vals, vec![1, 2, 4]);
    }

    #[test]
    fn roots_quadratic_f13() {
        // x^2 + 1 over F_13: {5, 8}
        let f = FieldSpec::make(13, 1).unwrap();
        let poly = vec![f.one(), f.zero(), f.one()];
        let (roots, _) = splitting_roots(&f, &poly, true).unwrap();
        let vals: Vec<u64> = roots
            .iter()
            .map(|(r, _)| match r {
                Elt::Fp(v) => *v,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(vals, vec![5, 8]);
    }

    #[test]
    fn extension_required_f7() {
        // x^2 + 1 over F_7: -1 is a non-residue (7 = 3 mod 4)
        let f = FieldSpec::make(7, 1).unwrap();
        let poly = vec![f.one(), f.zero(), f.one()];
        match splitting_roots(&f, &poly, false) {
            Err(Error::ExtensionRequired { degree }) => assert_eq!(degree, 2),
            other => panic!("expected extension-required, got {other:?}"),
        }
        let (roots, fld) = splitting_roots(&f, &poly, true).unwrap();
        assert_eq!(fld.extension_degree(), 2);
        assert_eq!(roots.len(), 2);
        // verify by multiplying back
        for (r, _) in &roots {
            let sq = fld.mul(r, r);
            assert_eq!(fld.add(&sq, &fld.one()), fld.zero());
        }
    }

    #[test]
    fn nth_root_examples() {
        let f = FieldSpec::make(7, 1).unwrap();
        let (r, fld) = nth_root(&f, &f.one(), 5).unwrap();
        assert_eq!(fld.extension_degree(), 1);
        assert_eq!(r, f.one());
        // sqrt(2) in F_7: 3^2 = 2, 4^2 = 2; least is 3
        let (r, _) = nth_root(&f, &f.from_int(2), 2).unwrap();
        assert_eq!(r, f.from_int(3));
        // cube root of 3 needs an extension (cubes in F_7 are {1, 6})
        let (r, fld) = nth_root(&f, &f.from_int(3), 3).unwrap();
        assert!(fld.extension_degree() > 1);
        let cube = fld.mul(&r, &fld.mul(&r, &r));
        assert_eq!(cube, embed(&f, &fld, &f.from_int(3)));
    }

    #[test]
    fn nth_root_p_part() {
        // in char 5, x^5 is Frobenius: unique 5th roots exist
        let f = FieldSpec::make(5, 2).unwrap();
        for idx in 1..25 {
            let a = f.element_from_index(idx);
            let (r, fld) = nth_root(&f, &a, 5).unwrap();
            assert_eq!(fld.extension_degree(), 2);
            assert_eq!(fld.pow(&r, 5), a);
        }
    }

    #[test]
    fn embedding_consistency() {
        let f = FieldSpec::make(5, 1).unwrap();
        let big = FieldSpec::make(5, 2).unwrap();
        for i in 0..5u64 {
            for j in 0..5u64 {
                let a = f.from_int(i as i64);
                let b = f.from_int(j as i64);
                let lhs = embed(&f, &big, &f.mul(&a, &b));
                let rhs = big.mul(&embed(&f, &big, &a), &embed(&f, &big, &b));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn roots_multiply_back() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in [3u64, 7, 13] {
            let f = FieldSpec::make(p, 1).unwrap();
            for _ in 0..30 {
                let deg = rng.gen_range(2..6);
                let mut poly: Vec<Elt> =
                    (0..deg).map(|_| f.from_int(rng.gen_range(0..p as i64))).collect();
                poly.push(f.one());
                let (roots, fld) = splitting_roots(&f, &poly, true).unwrap();
                // product of (x - r)^m divides the lifted polynomial exactly
                let lifted: Vec<Elt> = poly.iter().map(|c| embed(&f, &fld, c)).collect();
                let mut rem = lifted.clone();
                for (r, m) in &roots {
                    let lin = vec![fld.neg(r), fld.one()];
                    for _ in 0..*m {
                        assert!(fld.is_zero(&ueval(&fld, &rem, r)));
                        rem = udivexact(&fld, &rem, &lin);
                    }
                }
                // remaining cofactor has no roots in fld
                assert!(roots_in_field(&fld, &rem).is_empty());
            }
        }
    }

    #[test]
    fn rational_mode() {
        let f = FieldSpec::rationals();
        let a = f.from_int(3);
        let b = f.from_int(4);
        let q = f.div(&a, &b).unwrap();
        assert_eq!(f.mul(&q, &b), a);
        // roots of (x-1)(2x+3) = 2x^2 + x - 3
        let poly = vec![f.from_int(-3), f.from_int(1), f.from_int(2)];
        let (roots, _) = splitting_roots(&f, &poly, true).unwrap();
        assert_eq!(roots.len(), 2);
    }
}
