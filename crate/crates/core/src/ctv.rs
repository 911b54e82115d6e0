//! Open string amplitudes of the closed topological vertex and of its flop:
//! brute-force gluing over the third internal line, the closed fermionic
//! formulas, and the relation between the two geometries.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{evaluate_word, EvalOptions, Report, Token};
use crate::partitions::{enumerate_partitions, Partition};
use crate::products::pair_product;
use crate::ring::{with_window, Grading, Mono, USeries, Var, EXACT};
use crate::schur::principal_schur;
use crate::strip::{double_p1, double_p1_flop, StripSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Bruteforce,
    Closed,
}

/// A computed amplitude together with the cutoffs it was computed at.
#[derive(Clone, Debug)]
pub struct AmplitudeResult {
    pub value: USeries,
    pub route: Route,
    pub qdeg: i32,
    pub trunc: i64,
    /// Exponents of u known exactly: `window.0 ..= window.1`.
    pub window: (i64, i64),
}

impl AmplitudeResult {
    fn new(value: USeries, route: Route, trunc: i64) -> Self {
        let window = (value.lo().min(0), value.trunc().min(trunc));
        Self { qdeg: value.grading().qdeg, value, route, trunc, window }
    }

    /// Compares two routes on the intersection of their windows.
    pub fn agree(&self, other: &AmplitudeResult) -> std::result::Result<i64, crate::ring::Mismatch> {
        let t = self.window.1.min(other.window.1);
        self.value.truncate(t).agree(&other.value.truncate(t))
    }
}

fn size_cap(g: &Grading, v: Var) -> Result<usize> {
    let w = g.weight_of(v);
    if w <= 0 {
        return Err(Error::InvalidArgument(format!("{} must carry positive weight for the α₃ sum", v.name())));
    }
    Ok((g.qdeg.max(0) / w) as usize)
}

/// Sums `term(α₃)` over `|α₃| ≤ cap` in parallel, adding in enumeration order.
fn alpha3_sum<F>(cap: usize, g: Grading, term: F) -> Result<USeries>
where
    F: Fn(&Partition) -> Result<USeries> + Sync,
{
    let terms: Vec<USeries> = enumerate_partitions(cap).par_iter().map(&term).collect::<Result<_>>()?;
    Ok(terms.iter().fold(USeries::zero(g, EXACT), |acc, t| acc.add(t)))
}

/// `Z^{ctv}_{β₁β₂} = Σ_{α₃} Z_{β₁β₂|α₃} (−Q₃)^{|α₃|} s_{α₃}(q^{−ρ})`, the sum
/// cut at the largest `|α₃|` the Q₃-weight admits.
pub fn ctv_bruteforce(b1: &Partition, b2: &Partition, g: Grading, trunc: i64) -> Result<AmplitudeResult> {
    let cap = size_cap(&g, Var::Q3)?;
    let v = with_window(trunc, |t| {
        alpha3_sum(cap, g, |a3| {
            let n = a3.size() as i64;
            let c = if n % 2 == 1 { -1 } else { 1 };
            let z = double_p1(b1, b2, a3, g, t)?;
            Ok(z.mul(&principal_schur(a3, g, t)).scale(Mono::pow_of(Var::Q3, n as i16), c, 0))
        })
    })?;
    Ok(AmplitudeResult::new(v, Route::Bruteforce, trunc))
}

/// The strip whose fermionic word is the main part `Y_{β₁β₂}`.
pub fn y_strip_spec(b1: &Partition, b2: &Partition) -> StripSpec {
    StripSpec::new(
        vec![1, -1, 1, -1],
        vec![Partition::empty(); 4],
        vec![Mono::var(Var::Q1), Mono::var(Var::Q3), Mono::var(Var::Q2)],
    )
    .expect("valid strip")
    .with_ends(b1.clone(), b2.conjugate())
}

/// `⟨ᵗβ₁|Γ₋Γ₊(−Q₁)^{L₀}Γ′₋Γ′₊(−Q₃)^{L₀}Γ₋Γ₊(−Q₂)^{L₀}Γ′₋Γ′₊|ᵗβ₂⟩`.
pub fn y_amplitude(b1: &Partition, b2: &Partition, g: Grading, trunc: i64) -> Result<USeries> {
    let mut w = Vec::new();
    w.extend(Token::gamma_pair(false));
    w.push(Token::diag_q(-1, Mono::var(Var::Q1)));
    w.extend(Token::gamma_pair(true));
    w.push(Token::diag_q(-1, Mono::var(Var::Q3)));
    w.extend(Token::gamma_pair(false));
    w.push(Token::diag_q(-1, Mono::var(Var::Q2)));
    w.extend(Token::gamma_pair(true));
    evaluate_word(&w, &b1.conjugate(), &b2.conjugate(), g, trunc, &EvalOptions::default())
}

/// `∏_{i,j}(1 − M q^{−β₁ᵢ−ᵗβ₂ⱼ+i+j−1})^{−1}`.
fn diagonal_factor(m: Mono, b1: &Partition, b2: &Partition, g: Grading, t: i64) -> Result<USeries> {
    pair_product(g, 1, m, b1, &b2.conjugate(), -1, t)
}

/// `u^{κ(β₂)} ∏(1 − Q₁Q₂q^{⋯})^{−1} · Y_{β₁β₂}`.
pub fn ctv_closed(b1: &Partition, b2: &Partition, g: Grading, trunc: i64) -> Result<AmplitudeResult> {
    let k = b2.kappa();
    let v = with_window(trunc, |t| {
        let inner = t - k;
        let p = diagonal_factor(Mono::of(&[Var::Q1, Var::Q2]), b1, b2, g, inner)?;
        Ok(p.mul(&y_amplitude(b1, b2, g, inner)?).shift_u(k))
    })?;
    Ok(AmplitudeResult::new(v, Route::Closed, trunc))
}

/// The word between the two-leg vertex operators before the `q^{±K/2}`
/// insertions are cancelled.
pub fn ctv_intermediate_word(b1: &Partition, b2: &Partition) -> Vec<Token> {
    let mut w =
        vec![Token::gamma_plus(true, b1.clone()), Token::diag_q(-1, Mono::var(Var::Q1)), Token::DiagK { c2: -1 }];
    w.extend(Token::gamma_pair(true));
    w.push(Token::diag_q(-1, Mono::var(Var::Q3)));
    w.extend(Token::gamma_pair(false));
    w.push(Token::DiagK { c2: 1 });
    w.push(Token::diag_q(-1, Mono::var(Var::Q2)));
    w.push(Token::gamma_minus(false, b2.conjugate()));
    w
}

/// `s_{ᵗβ₁}s_{ᵗβ₂} ∏(1 − Q₁Q₂q^{⋯})^{−1} ⟨0|⋯|0⟩` with the explicit
/// `q^{−K/2}`, `q^{K/2}` tokens.
pub fn ctv_intermediate(b1: &Partition, b2: &Partition, g: Grading, trunc: i64) -> Result<USeries> {
    let w = ctv_intermediate_word(b1, b2);
    let e = Partition::empty();
    with_window(trunc, |t| {
        let s = principal_schur(&b1.conjugate(), g, t).mul(&principal_schur(&b2.conjugate(), g, t));
        let p = diagonal_factor(Mono::of(&[Var::Q1, Var::Q2]), b1, b2, g, t)?;
        let v = evaluate_word(&w, &e, &e, g, t, &EvalOptions::default())?;
        Ok(s.mul(&p).mul(&v))
    })
}

/// `Ẑ^{ctv}_{β₁β₂} = Σ_{α₃} Ẑ_{β₁β₂|α₃} (−P₃)^{|α₃|}(−1)^{|α₃|} q^{−κ(α₃)/2} s_{α₃}(q^{−ρ})`.
pub fn flop_bruteforce(b1: &Partition, b2: &Partition, g: Grading, trunc: i64) -> Result<AmplitudeResult> {
    let cap = size_cap(&g, Var::P3)?;
    let v = with_window(trunc, |t| {
        alpha3_sum(cap, g, |a3| {
            let k = a3.kappa();
            let inner = t + k;
            let z = double_p1_flop(b1, b2, a3, g, inner)?;
            let s = principal_schur(a3, g, inner);
            Ok(z.mul(&s).scale(Mono::pow_of(Var::P3, a3.size() as i16), 1, -k))
        })
    })?;
    Ok(AmplitudeResult::new(v, Route::Bruteforce, trunc))
}

/// The strip whose fermionic word is the main part of the flop amplitude;
/// its end factor supplies `u^{κ(β₁)}`.
pub fn flop_strip_spec(b1: &Partition, b2: &Partition) -> StripSpec {
    StripSpec::new(
        vec![-1, 1, 1, -1],
        vec![Partition::empty(); 4],
        vec![Mono::var(Var::P1), Mono::var(Var::P3), Mono::of(&[Var::P1, Var::P2])],
    )
    .expect("valid strip")
    .with_ends(b1.clone(), b2.conjugate())
}

fn flop_word() -> Vec<Token> {
    let mut w = Vec::new();
    w.extend(Token::gamma_pair(true));
    w.push(Token::diag_q(-1, Mono::var(Var::P1)));
    w.extend(Token::gamma_pair(false));
    w.push(Token::diag_q(1, Mono::var(Var::P3)));
    w.extend(Token::gamma_pair(false));
    w.push(Token::diag_q(-1, Mono::of(&[Var::P1, Var::P2])));
    w.extend(Token::gamma_pair(true));
    w
}

/// `u^{κ(β₁)+κ(β₂)} ∏(1 − P₂q^{⋯})^{−1} ⟨ᵗβ₁|Γ′₋Γ′₊(−P₁)^{L₀}Γ₋Γ₊P₃^{L₀}Γ₋Γ₊(−P₁P₂)^{L₀}Γ′₋Γ′₊|ᵗβ₂⟩`.
pub fn flop_closed(b1: &Partition, b2: &Partition, g: Grading, trunc: i64) -> Result<AmplitudeResult> {
    let k = b1.kappa() + b2.kappa();
    let w = flop_word();
    let v = with_window(trunc, |t| {
        let inner = t - k;
        let p = diagonal_factor(Mono::var(Var::P2), b1, b2, g, inner)?;
        let y = evaluate_word(&w, &b1.conjugate(), &b2.conjugate(), g, inner, &EvalOptions::default())?;
        Ok(p.mul(&y).shift_u(k))
    })?;
    Ok(AmplitudeResult::new(v, Route::Closed, trunc))
}

/// Grading for the flop relation: `P₁` and its image `Q₁ = P₁^{−1}` carry
/// weight zero, so the parameter matching preserves degrees.
pub fn flop_match_gradings(qdeg: u32) -> (Grading, Grading) {
    (Grading::total(qdeg).with_weight(Var::Q1, 0), Grading::total(qdeg).with_weight(Var::P1, 0))
}

/// `Q₁ = P₁^{−1}`, `Q₂ = P₁P₂`, `Q₃ = P₁P₃`.
pub fn flop_substitution() -> [(Var, Mono); 3] {
    [
        (Var::Q1, Mono::pow_of(Var::P1, -1)),
        (Var::Q2, Mono::of(&[Var::P1, Var::P2])),
        (Var::Q3, Mono::of(&[Var::P1, Var::P3])),
    ]
}

/// Right side of the flop relation: the closed-vertex amplitude after the
/// parameter matching, times `u^{κ(β₁)}(−P₁)^{|β₁|}∏(1−P₁q^{i+j−1})(1−P₁^{−1}q^{i+j−1})^{−1}`.
pub fn flop_from_ctv(b1: &Partition, b2: &Partition, qdeg: u32, trunc: i64) -> Result<USeries> {
    let (gq, gp) = flop_match_gradings(qdeg);
    let e = Partition::empty();
    let k = b1.kappa();
    let n = b1.size() as i64;
    with_window(trunc, |t| {
        let inner = t - k;
        let z = ctv_bruteforce(b1, b2, gq, inner)?.value.substitute(&flop_substitution(), gp);
        let num = pair_product(gp, 1, Mono::var(Var::P1), &e, &e, 1, inner)?;
        let den = pair_product(gp, 1, Mono::pow_of(Var::P1, -1), &e, &e, -1, inner)?;
        let c = if n % 2 == 1 { -1 } else { 1 };
        Ok(num.mul(&den).mul(&z).scale(Mono::pow_of(Var::P1, n as i16), c, k))
    })
}

/// Checks `Ẑ^{ctv}` against the matched closed-vertex amplitude.
pub fn flop_match(b1: &Partition, b2: &Partition, qdeg: u32, trunc: i64) -> Result<Report> {
    let (_, gp) = flop_match_gradings(qdeg);
    let lhs = flop_bruteforce(b1, b2, gp, trunc)?.value;
    let rhs = flop_from_ctv(b1, b2, qdeg, trunc)?;
    let mut r = Report::default();
    r.push(format!("flop-match β₁={b1} β₂={b2}"), &lhs, &rhs);
    Ok(r)
}

/// The word obtained by cutting the flop geometry along its middle line;
/// it carries a bare `q^{−K/2}`.
pub fn middle_cut_word(b1: &Partition, b2: &Partition) -> Vec<Token> {
    let mut w = Vec::new();
    w.extend(Token::gamma_pair(true));
    w.push(Token::diag_q(1, Mono::var(Var::P3)));
    w.extend(Token::gamma_pair(true));
    w.push(Token::DiagK { c2: -1 });
    w.push(Token::diag_q(-1, Mono::var(Var::P1)));
    w.push(Token::gamma_minus(true, b1.conjugate()));
    w.push(Token::gamma_plus(true, b1.clone()));
    w.push(Token::diag_q(1, Mono::var(Var::P2)));
    w.push(Token::gamma_minus(true, b2.conjugate()));
    w.push(Token::gamma_plus(true, b2.clone()));
    w
}

/// `s_{ᵗβ₁}s_{ᵗβ₂}⟨0|⋯|0⟩` for [`middle_cut_word`].
pub fn middle_cut_amplitude(
    b1: &Partition,
    b2: &Partition,
    g: Grading,
    trunc: i64,
    opts: &EvalOptions,
) -> Result<USeries> {
    let w = middle_cut_word(b1, b2);
    let e = Partition::empty();
    with_window(trunc, |t| {
        let s = principal_schur(&b1.conjugate(), g, t).mul(&principal_schur(&b2.conjugate(), g, t));
        Ok(s.mul(&evaluate_word(&w, &e, &e, g, t, opts)?))
    })
}

/// Outcome of the middle-line cut: the refusal without a size cap, and the
/// comparison with the closed flop formula at total degree ≤ `qdeg` when
/// intermediate sizes are capped at `qdeg`.
pub struct MiddleCutOutcome {
    pub refusal: Result<USeries>,
    pub capped: Report,
}

pub fn middle_cut_check(b1: &Partition, b2: &Partition, qdeg: u32, trunc: i64) -> Result<MiddleCutOutcome> {
    let (_, gp) = flop_match_gradings(qdeg);
    let refusal = middle_cut_amplitude(b1, b2, gp, trunc, &EvalOptions::default());
    let opts = EvalOptions { max_intermediate: Some(qdeg as usize) };
    let total = Grading::total(qdeg);
    let capped = middle_cut_amplitude(b1, b2, gp, trunc, &opts)?.regrade(total);
    let closed = flop_closed(b1, b2, total, trunc)?.value;
    let mut r = Report::default();
    r.push(format!("middle-line cut β₁={b1} β₂={b2}"), &capped, &closed);
    Ok(MiddleCutOutcome { refusal, capped: r })
}

/// Identities checked over a grid of boundary partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Identity {
    /// Brute-force gluing equals the closed formula for `Z^{ctv}`.
    Gluing,
    /// Brute-force gluing equals the closed formula for `Ẑ^{ctv}`.
    FlopGluing,
    FlopMatch,
}

impl Identity {
    pub fn check(self, b1: &Partition, b2: &Partition, qdeg: u32, trunc: i64) -> Result<Report> {
        let g = Grading::total(qdeg);
        let mut r = Report::default();
        match self {
            Identity::Gluing => {
                let a = ctv_bruteforce(b1, b2, g, trunc)?;
                let b = ctv_closed(b1, b2, g, trunc)?;
                r.push(format!("gluing β₁={b1} β₂={b2}"), &a.value, &b.value);
            }
            Identity::FlopGluing => {
                let a = flop_bruteforce(b1, b2, g, trunc)?;
                let b = flop_closed(b1, b2, g, trunc)?;
                r.push(format!("flop gluing β₁={b1} β₂={b2}"), &a.value, &b.value);
            }
            Identity::FlopMatch => r = flop_match(b1, b2, qdeg, trunc)?,
        }
        Ok(r)
    }
}

/// All pairs with `|β₁|, |β₂| ≤ max_size`.
pub fn square_grid(max_size: usize) -> Vec<(Partition, Partition)> {
    let ps = enumerate_partitions(max_size);
    ps.iter().flat_map(|a| ps.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

/// Five pairs involving a partition of size three.
pub fn size3_spot_pairs() -> Vec<(Partition, Partition)> {
    let p = |v: &[usize]| Partition::from_slice(v);
    vec![
        (p(&[3]), Partition::empty()),
        (Partition::empty(), p(&[1, 1, 1])),
        (p(&[2, 1]), p(&[1])),
        (p(&[1]), p(&[2, 1])),
        (p(&[1, 1, 1]), p(&[2])),
    ]
}

/// Checks `id` on every pair in parallel; the report keeps the input order.
pub fn verify_grid(id: Identity, pairs: &[(Partition, Partition)], qdeg: u32, trunc: i64) -> Result<Report> {
    let reports: Vec<Report> = pairs.par_iter().map(|(a, b)| id.check(a, b, qdeg, trunc)).collect::<Result<_>>()?;
    Ok(reports.into_iter().fold(Report::default(), |mut acc, r| {
        acc.extend(r);
        acc
    }))
}
