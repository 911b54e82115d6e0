//! The topological vertex, edge weights and framing numbers.

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::ring::{with_window, Grading, Mono, USeries, Var};
use crate::schur::{SchurEvaluator, SpecVars};

/// `C_{λμν} = u^{κ(μ)} s_{ᵗν}(q^{−ρ}) Σ_η s_{ᵗλ/η}(q^{−ν−ρ}) s_{μ/η}(q^{−ᵗν−ρ})`
/// through `u^{trunc}`; exactly 1 when all three are empty.
pub fn topological_vertex(lambda: &Partition, mu: &Partition, nu: &Partition, g: Grading, trunc: i64) -> USeries {
    if lambda.is_empty() && mu.is_empty() && nu.is_empty() {
        return USeries::one(g);
    }
    let tl = lambda.conjugate();
    let tn = nu.conjugate();
    let kappa = mu.kappa();
    with_window(trunc, |t| {
        let inner = t - kappa;
        let mut ev_nu = SchurEvaluator::new(SpecVars::shifted(nu), g, inner);
        let mut ev_tnu = SchurEvaluator::new(SpecVars::shifted(&tn), g, inner);
        let mut sum = USeries::zero(g, crate::ring::EXACT);
        for eta in tl.subpartitions() {
            if !mu.contains(&eta) {
                continue;
            }
            let a = ev_nu.skew(&tl, &eta, inner);
            let b = ev_tnu.skew(mu, &eta, inner);
            sum = sum.add(&a.mul(&b));
        }
        let s = SchurEvaluator::new(SpecVars::principal(), g, inner).skew(&tn, &Partition::empty(), inner);
        Ok(sum.mul(&s).shift_u(kappa))
    })
    .expect("vertex window")
}

/// An internal line of a toric diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeData {
    pub kahler: Var,
    pub framing: i64,
    pub label: String,
}

/// `(−Q)^{|λ|} (−1)^{n|λ|} u^{−nκ(λ)}`.
pub fn edge_weight(e: &EdgeData, lambda: &Partition, g: Grading) -> USeries {
    let size = lambda.size() as i64;
    let sign = if (size * (1 + e.framing)).rem_euclid(2) == 0 { 1 } else { -1 };
    USeries::monomial(g, Mono::var(e.kahler).pow(size), sign, -e.framing * lambda.kappa())
}

fn wedge(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Framing number `v′∧v` of the internal edge joining vertices with legs
/// `(u, v, w)` and `(u′, v′, w′)`, where `u = −v − w`, `u′ = −v′ − w′` and
/// the edge requires `u + u′ = 0`.
pub fn framing_number(v: [i64; 2], w: [i64; 2], vp: [i64; 2], wp: [i64; 2]) -> Result<i64> {
    let u = [-v[0] - w[0], -v[1] - w[1]];
    let up = [-vp[0] - wp[0], -vp[1] - wp[1]];
    if u[0] + up[0] != 0 || u[1] + up[1] != 0 {
        return Err(Error::InvalidArgument(format!("internal legs {u:?} and {up:?} are not opposite")));
    }
    let n = wedge(vp, v);
    let m = wedge(wp, w);
    if n != m {
        return Err(Error::InvalidArgument(format!("v'∧v = {n} differs from w'∧w = {m}")));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    fn g() -> Grading {
        Grading::total(0)
    }

    #[test]
    fn small_vertex_values() {
        let e = Partition::empty();
        let t = 12;
        assert!(topological_vertex(&e, &e, &e, g(), t).eq_within(&USeries::one(g())));
        let one = p(&[1]);
        let s1 = crate::schur::principal_schur(&one, g(), t);
        assert!(topological_vertex(&e, &e, &one, g(), t).eq_within(&s1));
        let direct = s1.mul(&s1).add(&USeries::one(g())).truncate(t);
        assert!(topological_vertex(&one, &one, &e, g(), t).eq_within(&direct));
    }

    #[test]
    fn one_leg_reduction() {
        let t = 14;
        let e = Partition::empty();
        for a in enumerate_partitions(5) {
            let c = topological_vertex(&a.conjugate(), &e, &e, g(), t);
            assert!(c.eq_within(&crate::schur::principal_schur(&a, g(), t)), "α={a}");
        }
    }

    #[test]
    fn edge_weight_examples() {
        let g = Grading::total(4);
        let e = EdgeData { kahler: Var::Q3, framing: 0, label: "a3".into() };
        assert!(edge_weight(&e, &Partition::empty(), g).eq_within(&USeries::one(g)));
        let q3sq = USeries::monomial(g, Mono::pow_of(Var::Q3, 2), 1, 0);
        assert!(edge_weight(&e, &p(&[2]), g).eq_within(&q3sq));
        let f = EdgeData { kahler: Var::P3, framing: 1, label: "a3".into() };
        let want = USeries::monomial(g, Mono::pow_of(Var::P3, 2), 1, -2);
        assert!(edge_weight(&f, &p(&[2]), g).eq_within(&want));
    }

    #[test]
    fn framing_rejects_bad_configurations() {
        assert!(framing_number([1, 0], [0, 1], [1, 0], [0, 1]).is_err());
        assert!(framing_number([0, -1], [1, 1], [0, 1], [-1, -1]).is_ok());
    }
}
