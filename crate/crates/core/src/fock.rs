//! Charge-0 free fermions: Maya diagrams, normal-ordered bilinears, the
//! quantum-torus generators and evaluation of operator words between
//! partition states.
//!
//! Mode convention: `ψ_a` creates mode `−a`, `ψ*_b` annihilates mode `b`,
//! and `|λ⟩` occupies the modes `{λ_i − i + 1}`. The vacuum fills every
//! mode `n ≤ 0`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, Partition};
use crate::products::pair_product;
use crate::ring::{with_window, Grading, Mismatch, Mono, USeries, EXACT};
use crate::schur::{SchurEvaluator, SpecVars};

/// Occupation pattern relative to the vacuum: `added` holds occupied modes
/// `n > 0`, `removed` holds empty modes `n ≤ 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MayaState {
    pub added: BTreeSet<i64>,
    pub removed: BTreeSet<i64>,
}

impl MayaState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn from_partition(lambda: &Partition) -> Self {
        let mut s = Self::vacuum();
        // modes λ_i − i + 1 for i ≤ ℓ replace the vacuum modes −i + 1
        let n = lambda.len();
        for m in lambda.maya_head(n) {
            if m > 0 {
                s.added.insert(m);
            }
        }
        let occupied: BTreeSet<i64> = lambda.maya_head(n).into_iter().collect();
        for i in 1..=n as i64 {
            if !occupied.contains(&(1 - i)) {
                s.removed.insert(1 - i);
            }
        }
        s
    }

    pub fn charge(&self) -> i64 {
        self.added.len() as i64 - self.removed.len() as i64
    }

    pub fn is_occupied(&self, n: i64) -> bool {
        if n > 0 {
            self.added.contains(&n)
        } else {
            !self.removed.contains(&n)
        }
    }

    fn set(&mut self, n: i64, occupied: bool) {
        match (n > 0, occupied) {
            (true, true) => {
                self.added.insert(n);
            }
            (true, false) => {
                self.added.remove(&n);
            }
            (false, true) => {
                self.removed.remove(&n);
            }
            (false, false) => {
                self.removed.insert(n);
            }
        }
    }

    /// Number of occupied modes strictly above `n`.
    pub fn count_above(&self, n: i64) -> usize {
        let pos = self.added.range(n + 1..).count();
        let sea = if n < 0 { (n + 1..=0).filter(|m| !self.removed.contains(m)).count() } else { 0 };
        pos + sea
    }

    /// Number of occupied modes strictly between `a` and `b`.
    pub fn count_between(&self, a: i64, b: i64) -> usize {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        (lo + 1..hi).filter(|&m| self.is_occupied(m)).count()
    }

    /// The partition of a charge-0 state.
    pub fn to_partition(&self) -> Option<Partition> {
        if self.charge() != 0 {
            return None;
        }
        let depth = self.removed.iter().next().map(|&r| 1 - r).unwrap_or(0).max(self.added.len() as i64);
        let mut occ: Vec<i64> = self.added.iter().rev().copied().collect();
        occ.extend((1 - depth..=0).rev().filter(|m| !self.removed.contains(m)));
        let parts = occ.iter().enumerate().map(|(i, &m)| (m + i as i64) as usize).collect();
        Partition::new(parts).ok()
    }
}

/// `ψ_a` on a state: creates mode `−a`.
pub fn psi(a: i64, s: &MayaState) -> Option<(i64, MayaState)> {
    let mode = -a;
    if s.is_occupied(mode) {
        return None;
    }
    let sign = if s.count_above(mode).is_multiple_of(2) { 1 } else { -1 };
    let mut t = s.clone();
    t.set(mode, true);
    Some((sign, t))
}

/// `ψ*_b` on a state: annihilates mode `b`.
pub fn psi_star(b: i64, s: &MayaState) -> Option<(i64, MayaState)> {
    if !s.is_occupied(b) {
        return None;
    }
    let sign = if s.count_above(b).is_multiple_of(2) { 1 } else { -1 };
    let mut t = s.clone();
    t.set(b, false);
    Some((sign, t))
}

/// `:ψ_a ψ*_b:` on a basis state. A zero sign means the state is
/// annihilated; in the diagonal case `a = −b` the returned sign is the
/// normal-ordered occupation `occ(b) − [b ≤ 0]`.
pub fn bilinear_apply(a: i64, b: i64, s: &MayaState) -> (i64, MayaState) {
    if a == -b {
        let v = s.is_occupied(b) as i64 - (b <= 0) as i64;
        return (v, s.clone());
    }
    let to = -a;
    if !s.is_occupied(b) || s.is_occupied(to) {
        return (0, s.clone());
    }
    let sign = if s.count_between(b, to).is_multiple_of(2) { 1 } else { -1 };
    let mut t = s.clone();
    t.set(b, false);
    t.set(to, true);
    (sign, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagOp {
    J0,
    L0,
    W0,
    K,
}

/// Eigenvalue of a diagonal zero-mode on `|λ⟩`, summed from the
/// normal-ordered occupations over the finite window where they can be
/// nonzero.
pub fn diagonal_eigenvalue(op: DiagOp, lambda: &Partition) -> i64 {
    let s = MayaState::from_partition(lambda);
    let w = (lambda.len() + lambda.part(1) + 2) as i64;
    let mut acc4 = 0i64; // four times the eigenvalue, so K stays integral
    for n in -w..=w {
        let (occ, _) = bilinear_apply(-n, n, &s);
        let weight = match op {
            DiagOp::J0 => 4,
            DiagOp::L0 => 4 * n,
            DiagOp::W0 => 4 * n * n,
            DiagOp::K => (2 * n - 1) * (2 * n - 1),
        };
        acc4 += occ * weight;
    }
    acc4 / 4
}

/// `J_m|λ⟩ = Σ_n :ψ_{−n}ψ*_{n+m}:|λ⟩` as a list of (sign, partition).
pub fn j_apply(m: i64, lambda: &Partition) -> Vec<(i64, Partition)> {
    shift_terms(m, lambda).into_iter().map(|(_, sign, p)| (sign, p)).collect()
}

/// Nonzero terms of `Σ_n :ψ_{m−n}ψ*_n:` (mode `n` moves to `n − m`), as
/// `(n, sign, result)`. Requires `m ≠ 0`.
fn shift_terms(m: i64, lambda: &Partition) -> Vec<(i64, i64, Partition)> {
    assert!(m != 0);
    let s = MayaState::from_partition(lambda);
    let lo = s.removed.iter().next().copied().unwrap_or(1).min(1) - m.abs() - 1;
    let hi = s.added.iter().next_back().copied().unwrap_or(0).max(0) + m.abs() + 1;
    let mut out = Vec::new();
    for n in lo..=hi {
        let (sign, t) = bilinear_apply(m - n, n, &s);
        if sign != 0 {
            out.push((n, sign, t.to_partition().expect("charge preserved")));
        }
    }
    out
}

/// `V^{(k)}_m|λ⟩ = u^{−km} Σ_n u^{2kn} :ψ_{m−n}ψ*_n:|λ⟩` as a finite list of
/// exact coefficients and partitions.
pub fn v_apply(k: i64, m: i64, lambda: &Partition, g: Grading) -> Vec<(USeries, Partition)> {
    if m == 0 {
        let s = MayaState::from_partition(lambda);
        let mut c = USeries::zero(g, EXACT);
        for &n in &s.added {
            c = c.add(&USeries::monomial(g, Mono::ONE, 1, 2 * k * n));
        }
        for &n in &s.removed {
            c = c.sub(&USeries::monomial(g, Mono::ONE, 1, 2 * k * n));
        }
        return vec![(c, lambda.clone())];
    }
    shift_terms(m, lambda)
        .into_iter()
        .map(|(n, sign, p)| (USeries::monomial(g, Mono::ONE, sign, 2 * k * n - k * m), p))
        .collect()
}

/// `Σ_{i≥1} q^{−k(λ_i−i+1)}` through `u^{trunc}` (for `k > 0`).
pub fn content_sum(k: i64, lambda: &Partition, g: Grading, trunc: i64) -> USeries {
    let l = lambda.len() as i64;
    let mut s = USeries::zero(g, EXACT);
    for i in 1..=l {
        s = s.add(&USeries::monomial(g, Mono::ONE, 1, -2 * k * (lambda.part(i as usize) as i64 - i + 1)));
    }
    let tail = USeries::geom_inverse(g, 1, Mono::ONE, 2 * k, trunc).unwrap().shift_u(2 * k * l);
    s.add(&tail).truncate(trunc)
}

fn q_frac(g: Grading, k: i64, num: i64, trunc: i64) -> USeries {
    // q^{num}/(1 − q^k) in u
    USeries::geom_inverse(g, 1, Mono::ONE, 2 * k, trunc).unwrap().shift_u(2 * num).truncate(trunc)
}

/// Both sides of the two eigenvalue formulas for `V^{(∓k)}_0`:
/// `[(lhs₋, rhs₋), (lhs₊, rhs₊)]`.
pub fn zero_mode_sides(k: i64, lambda: &Partition, g: Grading, trunc: i64) -> [(USeries, USeries); 2] {
    let ev = |kk: i64| v_apply(kk, 0, lambda, g).remove(0).0;
    let lhs_minus = ev(-k).add(&q_frac(g, k, 0, trunc)).truncate(trunc);
    let rhs_minus = content_sum(k, lambda, g, trunc);
    let lhs_plus = ev(k).sub(&q_frac(g, k, k, trunc)).truncate(trunc);
    let rhs_plus = content_sum(k, &lambda.conjugate(), g, trunc + 2 * k).shift_u(2 * k).neg().truncate(trunc);
    [(lhs_minus, rhs_minus), (lhs_plus, rhs_plus)]
}

/// `⟨λ|Γ_−(x)|μ⟩` (or the primed version); `Γ_+` elements follow by
/// swapping the arguments.
pub fn gamma_matrix_element(
    lambda: &Partition,
    mu: &Partition,
    primed: bool,
    vars: &SpecVars,
    g: Grading,
    trunc: i64,
) -> USeries {
    let mut ev = SchurEvaluator::new(vars.clone(), g, trunc);
    if primed {
        ev.skew(&lambda.conjugate(), &mu.conjugate(), trunc)
    } else {
        ev.skew(lambda, mu, trunc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VKind {
    /// `exp(−Σ_{i,k} (M q^{−β_i+i})^k/k · (V^{(−k)}_0 + 1/(1−q^k)))`.
    Minus,
    /// `exp(Σ_{j,k} (M q^{−β_j+j−1})^k/k · (V^{(k)}_0 − q^k/(1−q^k)))`.
    Plus,
}

fn default_sign() -> i64 {
    1
}

/// One factor of an operator word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Token {
    /// `Γ_−(c·M·q^{−ν−ρ})`, primed for `Γ′_−`.
    GammaMinus {
        #[serde(default)]
        primed: bool,
        #[serde(default)]
        shift: Partition,
        #[serde(default)]
        scale: Mono,
        #[serde(default = "default_sign")]
        sign: i64,
    },
    /// `Γ_+(c·M·q^{−ν−ρ})`, primed for `Γ′_+`.
    GammaPlus {
        #[serde(default)]
        primed: bool,
        #[serde(default)]
        shift: Partition,
        #[serde(default)]
        scale: Mono,
        #[serde(default = "default_sign")]
        sign: i64,
    },
    /// `(sign·M)^{L_0}`.
    DiagQ {
        mono: Mono,
        #[serde(default = "default_sign")]
        sign: i64,
    },
    /// `q^{c2·K/2}`, i.e. `u^{c2·κ}`.
    DiagK { c2: i64 },
    /// Exponential of zero-mode quantum-torus generators, diagonal on `|α⟩`.
    Vexp { kind: VKind, mono: Mono, shift: Partition },
}

impl Token {
    pub fn gamma_minus(primed: bool, shift: Partition) -> Self {
        Token::GammaMinus { primed, shift, scale: Mono::ONE, sign: 1 }
    }

    pub fn gamma_plus(primed: bool, shift: Partition) -> Self {
        Token::GammaPlus { primed, shift, scale: Mono::ONE, sign: 1 }
    }

    /// `Γ^σ_−(q^{−ρ})Γ^σ_+(q^{−ρ})` pair, primed for `σ = −1`.
    pub fn gamma_pair(primed: bool) -> [Self; 2] {
        [Self::gamma_minus(primed, Partition::empty()), Self::gamma_plus(primed, Partition::empty())]
    }

    pub fn diag_q(sign: i64, mono: Mono) -> Self {
        Token::DiagQ { mono, sign }
    }
}

/// Caller-supplied escape hatch for sums no grading bounds.
#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    /// Cap on intermediate partition sizes where no certificate exists.
    /// The caller takes responsibility for the resulting window.
    pub max_intermediate: Option<usize>,
}

/// Upper bounds on the partition size at each gap of the word (gap 0 is
/// the bra, gap `n` the ket); `None` means unbounded.
fn gap_bounds(word: &[Token], bra: &Partition, ket: &Partition, g: &Grading) -> Vec<Option<usize>> {
    let n = word.len();
    let mut b: Vec<Option<usize>> = vec![None; n + 1];
    b[0] = Some(bra.size());
    b[n] = Some(ket.size());
    let min = |a: Option<usize>, c: Option<usize>| match (a, c) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    };
    for (k, t) in word.iter().enumerate() {
        if let Token::DiagQ { mono, .. } = t {
            let w = g.weight(mono);
            if w > 0 {
                let cap = Some((g.qdeg.max(0) as i64 / w) as usize);
                b[k] = min(b[k], cap);
                b[k + 1] = min(b[k + 1], cap);
            }
        }
    }
    loop {
        let before = b.clone();
        for (k, t) in word.iter().enumerate() {
            match t {
                Token::GammaMinus { .. } => b[k + 1] = min(b[k + 1], b[k]),
                Token::GammaPlus { .. } => b[k] = min(b[k], b[k + 1]),
                _ => {
                    let m = min(b[k], b[k + 1]);
                    b[k] = m;
                    b[k + 1] = m;
                }
            }
        }
        // Γ scaled by a graded monomial changes the size by at most qdeg/w.
        for (k, t) in word.iter().enumerate() {
            if let Token::GammaMinus { scale, .. } | Token::GammaPlus { scale, .. } = t {
                let w = g.weight(scale);
                if w > 0 {
                    let step = (g.qdeg.max(0) as i64 / w) as usize;
                    b[k] = min(b[k], b[k + 1].map(|x| x + step));
                    b[k + 1] = min(b[k + 1], b[k].map(|x| x + step));
                }
            }
        }
        if b == before {
            return b;
        }
    }
}

/// Whether every factor of the word has nonnegative u-order and each Γ
/// box costs at least one power of u, so sizes are bounded by the window.
fn u_certificate(word: &[Token]) -> std::result::Result<(), String> {
    for t in word {
        match t {
            Token::GammaMinus { shift, .. } | Token::GammaPlus { shift, .. } => {
                if SpecVars::shifted(shift).min_exponent() < 1 {
                    return Err("a Γ with shifted variables can lower the u-order".into());
                }
            }
            Token::DiagK { .. } => return Err("the word contains the operator q^{±K/2}".into()),
            Token::Vexp { .. } => return Err("a V-exponential can lower the u-order".into()),
            Token::DiagQ { .. } => {}
        }
    }
    Ok(())
}

struct GammaCache {
    evaluators: HashMap<SpecVars, SchurEvaluator>,
    skews: HashMap<(SpecVars, Partition, Partition), USeries>,
    grading: Grading,
    trunc: i64,
}

impl GammaCache {
    fn skew(&mut self, vars: &SpecVars, lambda: &Partition, mu: &Partition) -> USeries {
        let key = (vars.clone(), lambda.clone(), mu.clone());
        if let Some(v) = self.skews.get(&key) {
            return v.clone();
        }
        let (g, t) = (self.grading, self.trunc);
        let ev = self.evaluators.entry(vars.clone()).or_insert_with(|| SchurEvaluator::new(vars.clone(), g, t));
        let v = ev.skew(lambda, mu, t);
        self.skews.insert(key, v.clone());
        v
    }
}

fn vexp_eigenvalue(
    kind: VKind,
    mono: Mono,
    shift: &Partition,
    alpha: &Partition,
    g: Grading,
    t: i64,
) -> Result<USeries> {
    match kind {
        VKind::Minus => pair_product(g, 1, mono, shift, alpha, 1, t),
        VKind::Plus => pair_product(g, 1, mono, &alpha.conjugate(), shift, 1, t),
    }
}

fn evaluate_raw(
    word: &[Token],
    bra: &Partition,
    ket: &Partition,
    g: Grading,
    t: i64,
    bounds: &[usize],
) -> Result<USeries> {
    let n = word.len();
    let max_bound = bounds.iter().copied().max().unwrap_or(0);
    let universe = enumerate_partitions(max_bound);
    let mut cache = GammaCache { evaluators: HashMap::new(), skews: HashMap::new(), grading: g, trunc: t };
    let mut vec: BTreeMap<Partition, USeries> = BTreeMap::new();
    if ket.size() <= bounds[n] {
        vec.insert(ket.clone(), USeries::one(g).truncate(t));
    }
    for k in (0..n).rev() {
        let bound = bounds[k];
        let mut next: BTreeMap<Partition, USeries> = BTreeMap::new();
        match &word[k] {
            Token::DiagQ { mono, sign } => {
                for (lam, s) in vec {
                    if lam.size() <= bound {
                        let e = lam.size() as i64;
                        let c = if *sign < 0 && e % 2 == 1 { -1 } else { 1 };
                        next.insert(lam, s.scale(mono.pow(e), c, 0));
                    }
                }
            }
            Token::DiagK { c2 } => {
                for (lam, s) in vec {
                    if lam.size() <= bound {
                        let kap = lam.kappa();
                        next.insert(lam, s.shift_u(c2 * kap));
                    }
                }
            }
            Token::Vexp { kind, mono, shift } => {
                for (lam, s) in vec {
                    if lam.size() <= bound {
                        let ev = vexp_eigenvalue(*kind, *mono, shift, &lam, g, t)?;
                        next.insert(lam, s.mul(&ev));
                    }
                }
            }
            Token::GammaMinus { primed, shift, scale, sign } | Token::GammaPlus { primed, shift, scale, sign } => {
                let minus = matches!(word[k], Token::GammaMinus { .. });
                let vars = SpecVars::shifted(shift);
                for (mu, s) in &vec {
                    let candidates: Vec<&Partition> = if minus {
                        universe.iter().filter(|l| l.size() >= mu.size() && l.contains(mu)).collect()
                    } else {
                        universe.iter().filter(|l| l.size() <= mu.size() && mu.contains(l)).collect()
                    };
                    for lam in candidates {
                        if lam.size() > bound {
                            continue;
                        }
                        let (big, small) = if minus { (lam, mu) } else { (mu, lam) };
                        let el = if *primed {
                            cache.skew(&vars, &big.conjugate(), &small.conjugate())
                        } else {
                            cache.skew(&vars, big, small)
                        };
                        let d = (big.size() - small.size()) as i64;
                        let c = if *sign < 0 && d % 2 == 1 { -1 } else { 1 };
                        let term = el.scale(scale.pow(d), c, 0).mul(s);
                        match next.get_mut(lam) {
                            Some(acc) => *acc = acc.add(&term),
                            None => {
                                next.insert(lam.clone(), term);
                            }
                        }
                    }
                }
            }
        }
        next.retain(|_, s| !(s.is_zero() && s.is_exact()));
        vec = next;
    }
    Ok(vec.remove(bra).unwrap_or_else(|| USeries::zero(g, EXACT)))
}

/// `⟨bra| w_1 w_2 ⋯ w_n |ket⟩` through `u^{trunc}`, summing over
/// intermediate partitions.
///
/// Each intermediate sum must be bounded either by the Q-grading (a graded
/// `(M)^{L_0}` pins the size) or by a u-order argument; otherwise the
/// evaluation is refused with [`Error::Uncertifiable`] unless
/// `opts.max_intermediate` supplies a cap.
pub fn evaluate_word(
    word: &[Token],
    bra: &Partition,
    ket: &Partition,
    g: Grading,
    trunc: i64,
    opts: &EvalOptions,
) -> Result<USeries> {
    let raw = gap_bounds(word, bra, ket, &g);
    let certified_min = raw.iter().flatten().copied().min().unwrap_or(0);
    let open: Vec<usize> = raw.iter().enumerate().filter(|(_, b)| b.is_none()).map(|(i, _)| i).collect();
    let mut use_u_bound = false;
    if let Some(&gap) = open.first() {
        match (u_certificate(word), opts.max_intermediate) {
            (Ok(()), _) => use_u_bound = true,
            (Err(_), Some(_)) => {}
            (Err(reason), None) => return Err(Error::Uncertifiable { gap, reason }),
        }
    }
    with_window(trunc, |t| {
        let cap = if use_u_bound { certified_min + t.max(0) as usize } else { opts.max_intermediate.unwrap_or(0) };
        // Re-tighten with the cap in place so neighbouring gaps inherit it.
        let mut capped = raw.clone();
        for b in capped.iter_mut() {
            if b.is_none() {
                *b = Some(cap);
            }
        }
        let bounds: Vec<usize> = capped.into_iter().map(|b| b.unwrap()).collect();
        let r = evaluate_raw(word, bra, ket, g, t, &bounds)?;
        Ok(if use_u_bound { r.truncate(t) } else { r })
    })
}

/// The vertex as a two-operator matrix element:
/// `u^{κ(μ)} s_{ᵗν}(q^{−ρ}) ⟨ᵗλ|Γ_−(q^{−ν−ρ})Γ_+(q^{−ᵗν−ρ})|μ⟩`, or with
/// `primed` the form `⟨λ|Γ′_−(q^{−ν−ρ})Γ′_+(q^{−ᵗν−ρ})|ᵗμ⟩`.
pub fn vertex_fermionic(
    lambda: &Partition,
    mu: &Partition,
    nu: &Partition,
    primed: bool,
    g: Grading,
    trunc: i64,
) -> Result<USeries> {
    let tn = nu.conjugate();
    let word = [Token::gamma_minus(primed, nu.clone()), Token::gamma_plus(primed, tn.clone())];
    let (bra, ket) = if primed { (lambda.clone(), mu.conjugate()) } else { (lambda.conjugate(), mu.clone()) };
    let k = mu.kappa();
    with_window(trunc, |t| {
        let inner = t - k;
        let s = SchurEvaluator::new(SpecVars::principal(), g, inner).skew(&tn, &Partition::empty(), inner);
        let v = evaluate_word(&word, &bra, &ket, g, inner, &EvalOptions::default())?;
        Ok(s.mul(&v).shift_u(k))
    })
}

/// Outcome of a family of coefficient checks.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<(String, std::result::Result<i64, Mismatch>)>,
}

impl Report {
    pub fn push(&mut self, name: impl Into<String>, lhs: &USeries, rhs: &USeries) {
        self.checks.push((name.into(), lhs.agree(rhs)));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, r)| r.is_ok())
    }

    pub fn first_failure(&self) -> Option<(&str, &Mismatch)> {
        self.checks.iter().find_map(|(n, r)| r.as_ref().err().map(|m| (n.as_str(), m)))
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

fn gg_element(primed: bool, lambda: &Partition, mu: &Partition, g: Grading, trunc: i64) -> USeries {
    let [a, b] = Token::gamma_pair(primed);
    evaluate_word(&[a, b], lambda, mu, g, trunc, &EvalOptions::default()).expect("Γ−Γ+ sums are finite")
}

/// `⟨λ|op|μ⟩` for a finite-combination operator given by its action.
fn finite_element(terms: &[(USeries, Partition)], lambda: &Partition, g: Grading) -> USeries {
    terms.iter().filter(|(_, p)| p == lambda).fold(USeries::zero(g, EXACT), |acc, (c, _)| acc.add(c))
}

/// Checks the three shift-symmetry identities between `⟨λ|` and `|μ⟩`.
pub fn verify_shift_symmetry(k: i64, lambda: &Partition, mu: &Partition, g: Grading, trunc: i64) -> Report {
    let mut rep = Report::default();
    let inner = trunc + 2 * k * (lambda.part(1) + mu.part(1) + lambda.len() + mu.len() + 2) as i64;
    // Γ′−Γ′+ (V^{(−k)}_0 + 1/(1−q^k)) = V^{(−k)}_k Γ′−Γ′+
    let lhs = gg_element(true, lambda, mu, g, inner).mul(&content_sum(k, mu, g, inner)).truncate(trunc);
    let mut rhs = USeries::zero(g, EXACT);
    for nu in crate::partitions::partitions_of(lambda.size() + k as usize) {
        let c = finite_element(&v_apply(-k, k, &nu, g), lambda, g);
        if !c.is_zero() {
            rhs = rhs.add(&c.mul(&gg_element(true, &nu, mu, g, inner)));
        }
    }
    rep.push(format!("shift Γ′ k={k} <{lambda}|..|{mu}>"), &lhs, &rhs.truncate(trunc));
    // (V^{(k)}_0 − q^k/(1−q^k)) Γ−Γ+ = Γ−Γ+ (−1)^k V^{(k)}_{−k}
    let e = content_sum(k, &lambda.conjugate(), g, inner).shift_u(2 * k).neg();
    let lhs = e.mul(&gg_element(false, lambda, mu, g, inner)).truncate(trunc);
    let mut rhs = USeries::zero(g, EXACT);
    for (c, nu) in v_apply(k, -k, mu, g) {
        rhs = rhs.add(&c.mul(&gg_element(false, lambda, &nu, g, inner)));
    }
    if k % 2 == 1 {
        rhs = rhs.neg();
    }
    rep.push(format!("shift Γ k={k} <{lambda}|..|{mu}>"), &lhs, &rhs.truncate(trunc));
    // The V^{(±k)}_{∓k} relation on both orderings of the pair, as finite combinations
    for (a, b) in [(lambda, mu), (mu, lambda)] {
        for (kk, m, shift) in [(-k, k, -k), (k, -k, k)] {
            let lhs = finite_element(&v_apply(kk, m, b, g), a, g);
            let j: i64 = j_apply(m, b).iter().filter(|(_, p)| p == a).map(|(s, _)| s).sum();
            let rhs = USeries::monomial(g, Mono::ONE, j, shift + a.kappa() - b.kappa());
            rep.push(format!("shift V^({kk})_{m} <{a}|..|{b}>"), &lhs, &rhs);
        }
    }
    rep
}

/// Checks the operator-state relations for `λ` against every `⟨μ|` with
/// `|μ| ≤ max_mu`.
pub fn verify_operator_state(lambda: &Partition, max_mu: usize, g: Grading, trunc: i64) -> Report {
    let mut rep = Report::default();
    let tl = lambda.conjugate();
    let shift = 2 * (lambda.part(1) + tl.part(1)) as i64 * max_mu.max(1) as i64 + 4 * max_mu as i64 * max_mu as i64;
    let inner = trunc + shift;
    let sch =
        |l: &Partition, v: &SpecVars| SchurEvaluator::new(v.clone(), g, inner).skew(l, &Partition::empty(), inner);
    let rho = SpecVars::principal();
    let s_tl = sch(&tl, &rho);
    let s_l = sch(lambda, &rho);
    for mu in enumerate_partitions(max_mu) {
        let tm = mu.conjugate();
        // s_{ᵗλ} ⟨μ|Γ′−(q^{−λ−ρ})|0⟩ = ⟨μ|q^{K/2}Γ−Γ+|ᵗλ⟩
        let lhs = s_tl.mul(&sch(&tm, &SpecVars::shifted(lambda)));
        let rhs = gg_element(false, &mu, &tl, g, inner).shift_u(mu.kappa());
        rep.push(format!("state Γ′− λ={lambda} μ={mu}"), &lhs.truncate(trunc), &rhs.truncate(trunc));
        // s_{ᵗλ} ⟨μ|Γ−(q^{−ᵗλ−ρ})|0⟩ = u^{κ(λ)} ⟨μ|q^{−K/2}Γ′−Γ′+|ᵗλ⟩
        let s_mu_tl = sch(&mu, &SpecVars::shifted(&tl));
        let lhs = s_tl.mul(&s_mu_tl);
        let gp = gg_element(true, &mu, &tl, g, inner);
        let rhs = gp.shift_u(lambda.kappa() - mu.kappa());
        rep.push(format!("state Γ− twisted λ={lambda} μ={mu}"), &lhs.truncate(trunc), &rhs.truncate(trunc));
        // s_λ ⟨μ|Γ−(q^{−ᵗλ−ρ})|0⟩ = ⟨μ|q^{−K/2}Γ′−Γ′+|ᵗλ⟩
        let lhs = s_l.mul(&s_mu_tl);
        let rhs = gp.shift_u(-mu.kappa());
        rep.push(format!("state Γ− λ={lambda} μ={mu}"), &lhs.truncate(trunc), &rhs.truncate(trunc));
        // s_λ(q^{−ρ}) s_μ(q^{−λ−ρ}) = ⟨μ|q^{−K/2}Γ′−Γ′+q^{−K/2}|λ⟩
        let lhs = s_l.mul(&sch(&mu, &SpecVars::shifted(lambda)));
        let rhs = gg_element(true, &mu, lambda, g, inner).shift_u(-mu.kappa() - lambda.kappa());
        rep.push(format!("state scalar λ={lambda} μ={mu}"), &lhs.truncate(trunc), &rhs.truncate(trunc));
        let swapped = sch(&mu, &rho).mul(&sch(lambda, &SpecVars::shifted(&mu)));
        rep.push(format!("2leg symmetry λ={lambda} μ={mu}"), &lhs.truncate(trunc), &swapped.truncate(trunc));
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    fn g0() -> Grading {
        Grading::total(0)
    }

    #[test]
    fn maya_round_trip() {
        for l in enumerate_partitions(6) {
            let s = MayaState::from_partition(&l);
            assert_eq!(s.charge(), 0);
            assert_eq!(s.to_partition(), Some(l.clone()));
            for (i, m) in l.maya_head(l.len() + 2).into_iter().enumerate() {
                assert!(s.is_occupied(m), "λ={l} i={i}");
            }
        }
    }

    #[test]
    fn normal_ordering_and_sign_convention() {
        let vac = MayaState::vacuum();
        assert_eq!(bilinear_apply(0, 0, &vac).0, 0);
        let j = j_apply(-1, &Partition::empty());
        assert_eq!(j, vec![(1, p(&[1]))]);
        let v = v_apply(0, -1, &Partition::empty(), g0());
        assert_eq!(v.len(), 1);
        assert!(v[0].0.eq_within(&USeries::one(g0())));
        assert_eq!(v[0].1, p(&[1]));
    }

    #[test]
    fn diagonal_eigenvalues() {
        assert_eq!(diagonal_eigenvalue(DiagOp::K, &Partition::empty()), 0);
        assert_eq!(diagonal_eigenvalue(DiagOp::W0, &p(&[2])), 4);
        for l in enumerate_partitions(5) {
            let j0 = diagonal_eigenvalue(DiagOp::J0, &l);
            let l0 = diagonal_eigenvalue(DiagOp::L0, &l);
            let w0 = diagonal_eigenvalue(DiagOp::W0, &l);
            let k = diagonal_eigenvalue(DiagOp::K, &l);
            assert_eq!(j0, 0);
            assert_eq!(l0, l.size() as i64);
            assert_eq!(w0, l.kappa() + l.size() as i64);
            assert_eq!(k, l.kappa());
            assert_eq!(4 * k, 4 * w0 - 4 * l0 + j0);
        }
    }

    #[test]
    fn l0_through_bilinears() {
        for l in enumerate_partitions(4) {
            let s = MayaState::from_partition(&l);
            let total: i64 = (-10..=10).map(|n| n * bilinear_apply(-n, n, &s).0).sum();
            assert_eq!(total, l.size() as i64);
        }
    }

    #[test]
    fn zero_mode_eigenvalues_small_cases() {
        let t = 14;
        for k in 1..=2 {
            let sides = zero_mode_sides(k, &p(&[1]), g0(), t);
            for (a, b) in sides.iter() {
                assert_eq!(a.agree(b), Ok(t));
            }
            let sides = zero_mode_sides(k, &Partition::empty(), g0(), t);
            assert_eq!(sides[1].0.agree(&sides[1].1), Ok(t));
        }
    }

    #[test]
    fn gamma_elements() {
        let g = g0();
        let rho = SpecVars::principal();
        let l = p(&[2, 1]);
        assert!(gamma_matrix_element(&l, &l, false, &rho, g, 10).eq_within(&USeries::one(g)));
        let s1 = crate::schur::principal_schur(&p(&[1]), g, 10);
        assert!(gamma_matrix_element(&p(&[1]), &Partition::empty(), false, &rho, g, 10).eq_within(&s1));
        assert!(gamma_matrix_element(&Partition::empty(), &p(&[1]), true, &rho, g, 10).is_zero());
    }

    #[test]
    fn empty_word_is_orthonormal() {
        let g = g0();
        for l in enumerate_partitions(3) {
            for m in enumerate_partitions(3) {
                let v = evaluate_word(&[], &l, &m, g, 8, &EvalOptions::default()).unwrap();
                assert_eq!(v.eq_within(&USeries::one(g)), l == m);
                assert_eq!(v.is_zero(), l != m);
            }
        }
    }

    #[test]
    fn gamma_pair_is_a_finite_sum() {
        let g = g0();
        let t = 12;
        let rho = SpecVars::principal();
        for l in enumerate_partitions(3) {
            for m in enumerate_partitions(3) {
                let got = gg_element(false, &l, &m, g, t);
                let mut want = USeries::zero(g, EXACT);
                for nu in l.subpartitions() {
                    if m.contains(&nu) {
                        let a = gamma_matrix_element(&l, &nu, false, &rho, g, t);
                        let b = gamma_matrix_element(&m, &nu, false, &rho, g, t);
                        want = want.add(&a.mul(&b));
                    }
                }
                assert_eq!(got.agree(&want.truncate(t)), Ok(t));
            }
        }
    }

    #[test]
    fn uncertifiable_words_are_refused() {
        let g = Grading::total(2).with_weight(crate::ring::Var::P1, 0);
        let p1 = Mono::var(crate::ring::Var::P1);
        let mut w = Vec::new();
        w.extend(Token::gamma_pair(true));
        w.push(Token::diag_q(-1, p1));
        w.push(Token::DiagK { c2: -1 });
        w.extend(Token::gamma_pair(false));
        let e = Partition::empty();
        let r = evaluate_word(&w, &e, &e, g, 6, &EvalOptions::default());
        assert!(matches!(r, Err(Error::Uncertifiable { .. })), "{r:?}");
        let capped = evaluate_word(&w, &e, &e, g, 6, &EvalOptions { max_intermediate: Some(3) });
        assert!(capped.is_ok());
    }

    #[test]
    fn shift_symmetry_examples() {
        let g = g0();
        for (k, l, m) in [(1, p(&[]), p(&[])), (1, p(&[1]), p(&[2])), (2, p(&[1]), p(&[1]))] {
            let rep = verify_shift_symmetry(k, &l, &m, g, 10);
            assert!(rep.passed(), "{:?}", rep.first_failure());
        }
    }

    #[test]
    fn operator_state_examples() {
        let g = g0();
        for l in [p(&[]), p(&[1]), p(&[2, 1])] {
            let rep = verify_operator_state(&l, 2, g, 8);
            assert!(rep.passed(), "λ={l}: {:?}", rep.first_failure());
        }
    }

    #[test]
    fn word_json_round_trip() {
        let json = r#"[{"op":"gamma_minus","primed":false,"shift":[1]},
                       {"op":"diag_q","mono":{"Q1":1},"sign":-1},
                       {"op":"diag_k","c2":-1},
                       {"op":"vexp","kind":"minus","mono":{"Q1":1},"shift":[2]}]"#;
        let w: Vec<Token> = serde_json::from_str(json).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w[0], Token::gamma_minus(false, p(&[1])));
        let back: Vec<Token> = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    fn arb_state() -> impl Strategy<Value = MayaState> {
        (prop::collection::btree_set(1i64..6, 0..4), prop::collection::btree_set(-5i64..=0, 0..4))
            .prop_map(|(added, removed)| MayaState { added, removed })
    }

    fn apply_seq(ops: &[(bool, i64)], s: &MayaState) -> Option<(i64, MayaState)> {
        // Rightmost operator acts first.
        let mut cur = (1, s.clone());
        for &(is_psi, idx) in ops.iter().rev() {
            let r = if is_psi { psi(idx, &cur.1) } else { psi_star(idx, &cur.1) }?;
            cur = (cur.0 * r.0, r.1);
        }
        Some(cur)
    }

    proptest! {
        #[test]
        fn canonical_anticommutation(s in arb_state(), m in -6i64..6, n in -6i64..6) {
            // ψ_m ψ*_n + ψ*_n ψ_m = δ_{m+n,0}
            let a = apply_seq(&[(true, m), (false, n)], &s);
            let b = apply_seq(&[(false, n), (true, m)], &s);
            let mut sum: BTreeMap<MayaState, i64> = BTreeMap::new();
            for (c, st) in a.into_iter().chain(b) {
                *sum.entry(st).or_default() += c;
            }
            sum.retain(|_, c| *c != 0);
            if m + n == 0 {
                prop_assert_eq!(sum.len(), 1);
                prop_assert_eq!(sum.get(&s).copied(), Some(1));
            } else {
                prop_assert!(sum.is_empty());
            }
            // ψ_m ψ_n + ψ_n ψ_m = 0
            let a = apply_seq(&[(true, m), (true, n)], &s);
            let b = apply_seq(&[(true, n), (true, m)], &s);
            let mut sum: BTreeMap<MayaState, i64> = BTreeMap::new();
            for (c, st) in a.into_iter().chain(b) {
                *sum.entry(st).or_default() += c;
            }
            sum.retain(|_, c| *c != 0);
            prop_assert!(sum.is_empty());
        }

        #[test]
        fn bilinear_is_composition(s in arb_state(), a in -6i64..6, b in -6i64..6) {
            prop_assume!(a != -b);
            let (sign, t) = bilinear_apply(a, b, &s);
            match apply_seq(&[(true, a), (false, b)], &s) {
                Some((c, st)) => {
                    prop_assert_eq!(sign, c);
                    prop_assert_eq!(t, st);
                }
                None => prop_assert_eq!(sign, 0),
            }
        }
    }
}
