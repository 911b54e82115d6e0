//! Schur and skew Schur functions at the specializations `q^{−ν−ρ}`.
//!
//! The variables `q^{−ν_i+i−1/2}` are `u^{−2ν_i+2i−1}`: finitely many
//! exceptional ones (`i ≤ ℓ(ν)`) followed by the geometric tail
//! `u^{2i−1}`, `i > ℓ(ν)`. Complete and elementary symmetric functions of
//! the tail have closed forms (q-binomial theorem); skew Schur functions
//! come from Jacobi–Trudi determinants of those.

use std::collections::HashMap;

use crate::partitions::Partition;
use crate::ring::{with_window, Grading, Mono, USeries};

/// The variable list `(u^{head_1}, …, u^{head_L}, u^{2L+1}, u^{2L+3}, …)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpecVars {
    pub head: Vec<i64>,
    pub tail_start: usize,
}

impl SpecVars {
    /// `q^{−ρ}`.
    pub fn principal() -> Self {
        Self { head: Vec::new(), tail_start: 0 }
    }

    /// `q^{−ν−ρ}`.
    pub fn shifted(nu: &Partition) -> Self {
        let head = (1..=nu.len()).map(|i| 2 * i as i64 - 1 - 2 * nu.part(i) as i64).collect();
        Self { head, tail_start: nu.len() }
    }

    /// Smallest u-exponent among the variables.
    pub fn min_exponent(&self) -> i64 {
        self.head.iter().copied().chain(std::iter::once(2 * self.tail_start as i64 + 1)).min().unwrap()
    }

    /// The first `n` variables as u-exponents.
    pub fn first(&self, n: usize) -> Vec<i64> {
        (1..=n).map(|i| if i <= self.tail_start { self.head[i - 1] } else { 2 * i as i64 - 1 }).collect()
    }
}

/// Polynomial-in-u coefficients of `∏_head (1 ∓ u^{a} t)^{∓1}` up to `t^k`.
fn head_series(head: &[i64], k: usize, elementary: bool, g: Grading) -> Vec<USeries> {
    let mut out: Vec<USeries> =
        (0..=k).map(|j| if j == 0 { USeries::one(g) } else { USeries::zero(g, crate::ring::EXACT) }).collect();
    for &a in head {
        if elementary {
            // multiply by (1 + u^a t)
            for j in (1..=k).rev() {
                out[j] = out[j].add(&out[j - 1].shift_u(a));
            }
        } else {
            // multiply by 1/(1 − u^a t): c_j += u^a c_{j−1}, ascending
            for j in 1..=k {
                let add = out[j - 1].shift_u(a);
                out[j] = out[j].add(&add);
            }
        }
    }
    out
}

/// `h_m` (or `e_m`) of the tail `u^{2L+1}, u^{2L+3}, …`.
fn tail_term(m: usize, l: usize, elementary: bool, g: Grading, trunc: i64) -> USeries {
    let m64 = m as i64;
    let lead = m64 * (2 * l as i64 + 1) + if elementary { m64 * (m64 - 1) } else { 0 };
    if lead > trunc {
        return USeries::zero(g, trunc);
    }
    let mut s = USeries::monomial(g, Mono::ONE, 1, lead);
    for j in 1..=m64 {
        let inv = USeries::geom_inverse(g, 1, Mono::ONE, 2 * j, trunc - lead).expect("positive u-power");
        s = s.mul(&inv);
    }
    s.truncate(trunc)
}

fn symmetric_eval(k: i64, v: &SpecVars, elementary: bool, g: Grading, trunc: i64) -> USeries {
    if k < 0 {
        return USeries::zero(g, crate::ring::EXACT);
    }
    if k == 0 {
        return USeries::one(g);
    }
    let k = k as usize;
    let min_head = v.head.iter().copied().min().unwrap_or(0).min(0);
    let inner = trunc - k as i64 * min_head;
    let head = head_series(&v.head, k, elementary, g);
    let mut acc = USeries::zero(g, crate::ring::EXACT);
    for (j, hj) in head.iter().enumerate() {
        if hj.is_zero() {
            continue;
        }
        acc = acc.add(&hj.mul(&tail_term(k - j, v.tail_start, elementary, g, inner)));
    }
    acc.truncate(trunc)
}

/// Complete homogeneous symmetric function `h_k` at `v`.
pub fn h_eval(k: i64, v: &SpecVars, g: Grading, trunc: i64) -> USeries {
    symmetric_eval(k, v, false, g, trunc)
}

/// Elementary symmetric function `e_k` at `v`.
pub fn e_eval(k: i64, v: &SpecVars, g: Grading, trunc: i64) -> USeries {
    symmetric_eval(k, v, true, g, trunc)
}

/// Determinant by Laplace expansion along rows, memoised on used columns.
fn determinant(m: &[Vec<USeries>], g: Grading) -> USeries {
    let n = m.len();
    let mut memo: HashMap<u32, USeries> = HashMap::new();
    fn rec(m: &[Vec<USeries>], mask: u32, memo: &mut HashMap<u32, USeries>, g: Grading) -> USeries {
        let row = mask.count_ones() as usize;
        if row == m.len() {
            return USeries::one(g);
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let mut acc = USeries::zero(g, crate::ring::EXACT);
        let mut sign_pos = 0;
        for c in 0..m.len() {
            if mask & (1 << c) != 0 {
                continue;
            }
            let entry = &m[row][c];
            if !entry.is_zero() || !entry.is_exact() {
                let minor = rec(m, mask | (1 << c), memo, g);
                let term = entry.mul(&minor);
                acc = if sign_pos % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            sign_pos += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    if n == 0 {
        return USeries::one(g);
    }
    rec(m, 0, &mut memo, g)
}

/// Evaluates many skew Schur functions at one specialization, sharing the
/// `h_k`/`e_k` values.
pub struct SchurEvaluator {
    vars: SpecVars,
    grading: Grading,
    trunc: i64,
    h: Vec<USeries>,
    e: Vec<USeries>,
}

impl SchurEvaluator {
    pub fn new(vars: SpecVars, grading: Grading, trunc: i64) -> Self {
        Self { vars, grading, trunc, h: Vec::new(), e: Vec::new() }
    }

    pub fn vars(&self) -> &SpecVars {
        &self.vars
    }

    fn entry(&mut self, k: i64, elementary: bool) -> USeries {
        if k < 0 {
            return USeries::zero(self.grading, crate::ring::EXACT);
        }
        let table = if elementary { &mut self.e } else { &mut self.h };
        while table.len() <= k as usize {
            let j = table.len() as i64;
            table.push(symmetric_eval(j, &self.vars, elementary, self.grading, self.trunc));
        }
        table[k as usize].clone()
    }

    fn raw(&mut self, lambda: &Partition, mu: &Partition) -> USeries {
        let g = self.grading;
        if !lambda.contains(mu) {
            return USeries::zero(g, crate::ring::EXACT);
        }
        if lambda == mu {
            return USeries::one(g);
        }
        // Use whichever determinant is smaller.
        let (a, b, elementary) = if lambda.len() > lambda.part(1) {
            (lambda.conjugate(), mu.conjugate(), true)
        } else {
            (lambda.clone(), mu.clone(), false)
        };
        let n = a.len();
        let mut m = Vec::with_capacity(n);
        for i in 1..=n {
            let mut row = Vec::with_capacity(n);
            for j in 1..=n {
                let k = a.part(i) as i64 - b.part(j) as i64 - i as i64 + j as i64;
                row.push(self.entry(k, elementary));
            }
            m.push(row);
        }
        determinant(&m, g)
    }

    /// `s_{λ/μ}` known through `u^{trunc}` of the target window.
    pub fn skew(&mut self, lambda: &Partition, mu: &Partition, trunc: i64) -> USeries {
        loop {
            let r = self.raw(lambda, mu);
            if r.trunc() >= trunc {
                return r.truncate(trunc);
            }
            // Raise the working window and rebuild the tables.
            self.trunc += (trunc - r.trunc()).max(1);
            self.h.clear();
            self.e.clear();
        }
    }
}

/// `s_{λ/μ}(v)` through `u^{trunc}`.
pub fn skew_schur_spec(lambda: &Partition, mu: &Partition, v: &SpecVars, g: Grading, trunc: i64) -> USeries {
    SchurEvaluator::new(v.clone(), g, trunc).skew(lambda, mu, trunc)
}

/// `s_λ(q^{−ρ})` through `u^{trunc}`.
pub fn principal_schur(lambda: &Partition, g: Grading, trunc: i64) -> USeries {
    skew_schur_spec(lambda, &Partition::empty(), &SpecVars::principal(), g, trunc)
}

/// `h_k` with a fixed window, retrying if the head shift ate into it.
pub fn h_eval_window(k: i64, v: &SpecVars, g: Grading, trunc: i64) -> USeries {
    with_window(trunc, |t| Ok(h_eval(k, v, g, t))).expect("h_k window")
}
