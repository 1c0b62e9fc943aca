//! Linear differential operators with polynomial coefficients,
//! `L = Σ_k q_k(x) ∂^k`, kept symbolically so compositions such as
//! `Λ^m ∂̸^n̲` can be expanded into rectangular derivatives.

use std::collections::BTreeMap;

use crate::domain::grid::ReferenceGrid;
use crate::domain::poly::{Exponent, FieldRep, ANGULAR_PAIRS};
use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator<T> {
    terms: BTreeMap<Exponent, FieldRep<T>>,
}

impl<T: Ring> DiffOperator<T> {
    pub fn identity() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert([0, 0, 0], FieldRep::constant(0, T::one()));
        Self { terms }
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, FieldRep<T>> {
        &self.terms
    }

    /// Highest derivative order present.
    pub fn order(&self) -> usize {
        self.terms.keys().map(|k| k.iter().sum()).max().unwrap_or(0)
    }

    fn push(&mut self, k: Exponent, q: FieldRep<T>) {
        match self.terms.get_mut(&k) {
            Some(existing) => *existing = &*existing + &q,
            None => {
                self.terms.insert(k, q);
            }
        }
    }

    /// `(Σ_i c_i ∂_i) ∘ self` for first-order `c` given per axis.
    fn left_compose_first_order(&self, c: &[FieldRep<T>; 3]) -> Result<Self> {
        let mut out = Self { terms: BTreeMap::new() };
        for (k, q) in &self.terms {
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                // c_i ∂_i (q ∂^k F) = c_i (∂_i q) ∂^k F + c_i q ∂^{k+e_i} F
                out.push(*k, ci.mul_field(&q.partial(i)?));
                let mut k2 = *k;
                k2[i] += 1;
                out.push(k2, ci.mul_field(q));
            }
        }
        out.terms.retain(|_, q| !q.is_zero());
        Ok(out)
    }

    /// `Λ ∘ self`.
    pub fn then_radial(&self) -> Result<Self> {
        let c = [
            FieldRep::coordinate(1, 0),
            FieldRep::coordinate(1, 1),
            FieldRep::coordinate(1, 2),
        ];
        self.left_compose_first_order(&c)
    }

    /// `∂̸_ij ∘ self`.
    pub fn then_angular(&self, i: usize, j: usize) -> Result<Self> {
        if i == j || i > 2 || j > 2 {
            return Err(Error::Argument(format!("invalid angular pair ({i}, {j})")));
        }
        let mut c = [FieldRep::zero(1), FieldRep::zero(1), FieldRep::zero(1)];
        c[j] = FieldRep::coordinate(1, i);
        c[i] = -&FieldRep::coordinate(1, j);
        self.left_compose_first_order(&c)
    }

    /// Symbolic `Λ^m ∂̸₁₂^{n₁} ∂̸₁₃^{n₂} ∂̸₂₃^{n₃}`.
    pub fn mixed(m: usize, n: [usize; 3]) -> Result<Self> {
        let mut op = Self::identity();
        for (slot, &(i, j)) in ANGULAR_PAIRS.iter().enumerate().rev() {
            for _ in 0..n[slot] {
                op = op.then_angular(i, j)?;
            }
        }
        for _ in 0..m {
            op = op.then_radial()?;
        }
        Ok(op)
    }

    /// `Σ_k q_k ∂^k F`; output degree grows by the coefficient degrees.
    pub fn apply(&self, f: &FieldRep<T>) -> Result<FieldRep<T>> {
        let mut acc = FieldRep::zero(f.degree());
        for (k, q) in &self.terms {
            let mut g = f.clone();
            for (axis, &times) in k.iter().enumerate() {
                for _ in 0..times {
                    g = g.partial(axis)?;
                }
            }
            acc = &acc + &q.mul_field(&g);
        }
        Ok(acc)
    }
}

/// `max over nodes with r ≥ r_min of |∂_iF − Σ_j (x_j/r²)∂̸_{ji}F − (x_i/r²)ΛF|`.
pub fn decompose_rect<T: Scalar>(f: &FieldRep<T>, i: usize, grid: &ReferenceGrid<T>, r_min: T) -> Result<T> {
    if r_min <= T::zero() {
        return Err(Error::Argument(
            "decomposition is degenerate at the origin; r_min must be positive".into(),
        ));
    }
    if i > 2 {
        return Err(Error::Argument(format!("axis {i} out of range")));
    }
    let di = grid.eval(&f.partial(i)?);
    let lam = grid.eval(&f.radial());
    let mut ang: Vec<(usize, Vec<T>)> = Vec::new();
    for j in (0..3).filter(|&j| j != i) {
        ang.push((j, grid.eval(&f.angular(j, i)?)));
    }
    let mut worst = T::zero();
    for (n, x) in grid.nodes.iter().enumerate() {
        let r = grid.radii[n];
        if r < r_min {
            continue;
        }
        let r2 = r * r;
        let mut rhs = x[i] * lam[n] / r2;
        for (j, vals) in &ang {
            rhs += x[*j] * vals[n] / r2;
        }
        worst = worst.max((di[n] - rhs).abs());
    }
    Ok(worst)
}
