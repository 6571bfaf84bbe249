//! Finite-dimensional slices of jet spaces and exact echelon linear algebra
//! over them. A window enumerates monomial-vectors (component, monomial) in
//! canonical order; subspaces are kept in reduced echelon form so complements
//! and membership are deterministic.

use crate::error::{Error, Result};
use crate::field::{Elt, Field};
use crate::germ::{Germ, Weights};
use crate::poly::Mono;
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub enum WindowKind {
    /// Total degrees in [lo, hi].
    Degree { lo: u32, hi: u32 },
    /// Weighted levels in [lo, hi] for the given weight system.
    Weighted { w: Weights, lo: i64, hi: i64 },
}

#[derive(Clone, Debug)]
pub struct Window {
    pub n: usize,
    pub m: usize,
    pub field: Field,
    pub kind: WindowKind,
    pub basis: Vec<(usize, Mono)>,
    index: HashMap<(usize, Mono), u32>,
}

fn monos_of_deg(n: usize, d: u32) -> Vec<Mono> {
    // ascending grevlex within the degree
    let mut out = vec![];
    if n == 1 {
        return vec![Mono(vec![d])];
    }
    assert_eq!(n, 2, "windows implemented for n <= 2");
    for e0 in 0..=d {
        out.push(Mono(vec![e0, d - e0]));
    }
    out.sort();
    out
}

impl Window {
    pub fn degree(field: &Field, n: usize, m: usize, lo: u32, hi: u32) -> Window {
        let mut basis = vec![];
        for d in lo..=hi {
            for mono in monos_of_deg(n, d) {
                for j in 0..m {
                    basis.push((j, mono.clone()));
                }
            }
        }
        Self::finish(field, n, m, WindowKind::Degree { lo, hi }, basis)
    }

    pub fn weighted(field: &Field, n: usize, m: usize, w: Weights, lo: i64, hi: i64) -> Window {
        assert_eq!(n, 2, "windows implemented for n <= 2");
        let mut entries: Vec<(i64, usize, Mono)> = vec![];
        for j in 0..m {
            let b0 = ((hi + w.d[j]).max(0) / w.a[0]) as u32;
            let b1 = ((hi + w.d[j]).max(0) / w.a[1]) as u32;
            for e0 in 0..=b0 {
                for e1 in 0..=b1 {
                    let mono = Mono(vec![e0, e1]);
                    let lvl = w.level(j, &mono);
                    if lvl >= lo && lvl <= hi {
                        entries.push((lvl, j, mono));
                    }
                }
            }
        }
        entries.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| a.2.deg().cmp(&b.2.deg()))
                .then_with(|| a.2.cmp(&b.2))
                .then_with(|| a.1.cmp(&b.1))
        });
        let basis = entries.into_iter().map(|(_, j, m)| (j, m)).collect();
        Self::finish(field, n, m, WindowKind::Weighted { w, lo, hi }, basis)
    }

    fn finish(field: &Field, n: usize, m: usize, kind: WindowKind, basis: Vec<(usize, Mono)>) -> Window {
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i as u32))
            .collect();
        Window { n, m, field: field.clone(), kind, basis, index }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn col(&self, comp: usize, mono: &Mono) -> Option<u32> {
        self.index.get(&(comp, mono.clone())).copied()
    }

    /// Columns whose entry satisfies a predicate (used for sub-windows).
    pub fn cols_where(&self, pred: impl Fn(usize, &Mono) -> bool) -> Vec<u32> {
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, (j, m))| pred(*j, m))
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Sparse row of a germ restricted to the window (outside terms dropped).
    pub fn project(&self, g: &Germ) -> SparseVec {
        let mut entries = vec![];
        for (j, comp) in g.comps.iter().enumerate() {
            for (mono, c) in &comp.terms {
                if let Some(col) = self.col(j, mono) {
                    entries.push((col, c.clone()));
                }
            }
        }
        entries.sort_by_key(|e| e.0);
        SparseVec(entries)
    }

    /// Sparse row of a germ; error if any term falls outside the window.
    pub fn project_strict(&self, g: &Germ) -> Result<SparseVec> {
        for (j, comp) in g.comps.iter().enumerate() {
            for mono in comp.terms.keys() {
                if self.col(j, mono).is_none() {
                    return Err(Error::DimensionMismatch(format!(
                        "term {} in component {} lies outside the window",
                        mono.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
                        j + 1
                    )));
                }
            }
        }
        Ok(self.project(g))
    }

    pub fn germ_of(&self, v: &SparseVec) -> Germ {
        let mut g = Germ::zero(&self.field, self.n, self.m);
        for (col, c) in &v.0 {
            let (j, mono) = &self.basis[*col as usize];
            g.comps[*j] = g.comps[*j].add(&crate::poly::Poly::monomial(
                &self.field,
                self.n,
                mono.clone(),
                c.clone(),
            ));
        }
        g
    }

    pub fn unit_vec(&self, comp: usize, mono: &Mono) -> Option<SparseVec> {
        self.col(comp, mono)
            .map(|c| SparseVec(vec![(c, self.field.one())]))
    }
}

/// Sorted sparse vector over window columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec(pub Vec<(u32, Elt)>);

impl SparseVec {
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lead(&self) -> Option<u32> {
        self.0.first().map(|e| e.0)
    }

    /// self - c * other
    fn axpy(&self, f: &Field, c: &Elt, other: &SparseVec) -> SparseVec {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some((ca, va)), Some((cb, vb))) => {
                    if ca < cb {
                        out.push((*ca, va.clone()));
                        i += 1;
                    } else if cb < ca {
                        out.push((*cb, f.neg(&f.mul(c, vb))));
                        j += 1;
                    } else {
                        let v = f.sub(va, &f.mul(c, vb));
                        if !f.is_zero(&v) {
                            out.push((*ca, v));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                (Some((ca, va)), None) => {
                    out.push((*ca, va.clone()));
                    i += 1;
                }
                (None, Some((cb, vb))) => {
                    out.push((*cb, f.neg(&f.mul(c, vb))));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SparseVec(out)
    }

    fn scale(&self, f: &Field, c: &Elt) -> SparseVec {
        SparseVec(self.0.iter().map(|(col, v)| (*col, f.mul(v, c))).collect())
    }
}

/// A subspace of a window in reduced echelon form: rows have distinct pivot
/// columns with coefficient one, and every row is reduced against the others.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub window: Window,
    rows: Vec<SparseVec>,
    pivot_of_col: HashMap<u32, usize>,
}

impl Subspace {
    pub fn new(window: Window) -> Self {
        Subspace { window, rows: vec![], pivot_of_col: HashMap::new() }
    }

    pub fn span(window: Window, vectors: &[Germ]) -> Subspace {
        let mut s = Subspace::new(window);
        for v in vectors {
            let row = s.window.project(v);
            s.insert(row);
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn codim(&self) -> usize {
        self.window.dim() - self.rank()
    }

    pub fn is_pivot(&self, col: u32) -> bool {
        self.pivot_of_col.contains_key(&col)
    }

    /// Reduce a vector against the subspace; the residue has no pivot columns.
    pub fn reduce(&self, v: SparseVec) -> SparseVec {
        let f = &self.window.field;
        let mut cur = v;
        loop {
            let mut acted = false;
            // find first entry on a pivot column
            let mut target = None;
            for (idx, (col, _)) in cur.0.iter().enumerate() {
                if let Some(&r) = self.pivot_of_col.get(col) {
                    target = Some((idx, r));
                    break;
                }
            }
            if let Some((idx, r)) = target {
                let c = cur.0[idx].1.clone();
                cur = cur.axpy(f, &c, &self.rows[r]);
                acted = true;
            }
            if !acted {
                return cur;
            }
        }
    }

    /// Insert a vector; returns true when the rank grows.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let f = self.window.field.clone();
        let red = self.reduce(v);
        if red.is_zero() {
            return false;
        }
        let lead_col = red.lead().unwrap();
        let lead_val = red.0[0].1.clone();
        let inv = f.inv(&lead_val).expect("nonzero lead");
        let norm = red.scale(&f, &inv);
        // back-eliminate the new pivot from existing rows
        for row in self.rows.iter_mut() {
            if let Some(pos) = row.0.iter().position(|(c, _)| *c == lead_col) {
                let c = row.0[pos].1.clone();
                *row = row.axpy(&f, &c, &norm);
            }
        }
        self.rows.push(norm);
        self.pivot_of_col.insert(lead_col, self.rows.len() - 1);
        true
    }

    pub fn insert_germ(&mut self, g: &Germ) -> bool {
        let row = self.window.project(g);
        self.insert(row)
    }

    pub fn contains_germ(&self, g: &Germ) -> Result<bool> {
        let row = self.window.project_strict(g)?;
        Ok(self.reduce(row).is_zero())
    }

    /// Non-pivot monomial-vectors, in canonical window order.
    pub fn complement_basis(&self) -> Vec<(usize, Mono)> {
        (0..self.window.dim() as u32)
            .filter(|c| !self.pivot_of_col.contains_key(c))
            .map(|c| self.window.basis[c as usize].clone())
            .collect()
    }

    /// Express a member vector over the inserted echelon rows is not tracked;
    /// this returns the residue decomposition v = (v - res) + res instead.
    pub fn split(&self, v: SparseVec) -> (SparseVec, SparseVec) {
        let f = &self.window.field;
        let res = self.reduce(v.clone());
        let inside = v.axpy(f, &f.one(), &res);
        (inside, res)
    }

    /// Dimension of the intersection with the coordinate subspace spanned by
    /// `cols`: dim(sub) = |cols| - rank of the reduced images.
    pub fn intersection_dim(&self, cols: &[u32]) -> usize {
        let f = self.window.field.clone();
        // residues of the unit vectors span the image in window/S
        let mut probe = Subspace::new(self.window.clone());
        let mut indep = 0usize;
        for &c in cols {
            let unit = SparseVec(vec![(c, f.one())]);
            let res = self.reduce(unit);
            if probe.insert(res) {
                indep += 1;
            }
        }
        cols.len() - indep
    }

    /// Canonical complement basis of (self  intersect  span(cols)) inside
    /// span(cols): greedy selection of monomial-vectors whose residues mod the
    /// subspace are independent.
    pub fn complement_in_cols(&self, cols: &[u32]) -> Vec<(usize, Mono)> {
        self.complement_in_cols_preferring(cols, |_, _| 0)
    }

    /// Greedy complement with a caller-supplied priority: lower rank first,
    /// ties broken by canonical column order. Used to land residues on the
    /// monomial slots a normal-form template designates.
    pub fn complement_in_cols_preferring(
        &self,
        cols: &[u32],
        priority: impl Fn(usize, &Mono) -> u32,
    ) -> Vec<(usize, Mono)> {
        let f = self.window.field.clone();
        let mut order: Vec<u32> = cols.to_vec();
        order.sort_by_key(|&c| {
            let (j, m) = &self.window.basis[c as usize];
            (priority(*j, m), c)
        });
        let mut probe = Subspace::new(self.window.clone());
        let mut out = vec![];
        for &c in &order {
            let unit = SparseVec(vec![(c, f.one())]);
            let res = self.reduce(unit);
            if probe.insert(res) {
                out.push(self.window.basis[c as usize].clone());
            }
        }
        out.sort_by(|a, b| {
            self.window
                .col(a.0, &a.1)
                .unwrap()
                .cmp(&self.window.col(b.0, &b.1).unwrap())
        });
        out
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }
}
