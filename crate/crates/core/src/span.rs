//! Incremental row space of rational vectors, kept in reduced row echelon form.

use crate::rational::Rational;

#[derive(Clone, Debug, Default)]
pub(crate) struct Span {
    dim: usize,
    /// (pivot column, row with a 1 at the pivot and 0 at every other pivot)
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Span {
    pub fn new(dim: usize) -> Self {
        Span { dim, rows: Vec::new() }
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    fn residual(&self, v: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(v.len(), self.dim);
        let mut r = v.to_vec();
        for (p, row) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = r[*p].clone();
            for (a, b) in r.iter_mut().zip(row) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.is_full() || self.residual(v).iter().all(Rational::is_zero)
    }

    /// Adds `v`; returns whether the rank grew.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        if self.is_full() {
            return false;
        }
        let mut r = self.residual(v);
        let Some(p) = r.iter().position(|a| !a.is_zero()) else {
            return false;
        };
        let inv = r[p].recip();
        for a in r.iter_mut() {
            *a *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (a, b) in row.iter_mut().zip(&r) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        self.rows.push((p, r));
        true
    }
}
