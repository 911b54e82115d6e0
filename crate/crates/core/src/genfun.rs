//! Generating functions of one-leg amplitudes of the closed vertex and the
//! q-difference operators that annihilate them.
//!
//! `D` below is the shift `q^{x∂x}`: `D x^k = q^k x^k = u^{2k} x^k`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::ctv::{ctv_closed, y_amplitude};
use crate::error::Result;
use crate::fock::Report;
use crate::partitions::Partition;
use crate::ring::{with_window, CoeffPoly, Grading, Mismatch, Mono, USeries, Var, EXACT};

/// `Σ_k c_k x^k` with `c_k` series in u and the Kähler parameters.
#[derive(Clone, Debug)]
pub struct XSeries {
    pub coeffs: Vec<USeries>,
}

impl XSeries {
    pub fn xdeg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Splits a series containing x into its x-coefficients.
    pub fn from_useries(s: &USeries, xdeg: usize, g: Grading) -> Self {
        Self { coeffs: (0..=xdeg).map(|k| s.x_coefficient(k as i64).regrade(g)).collect() }
    }

    pub fn truncate(&self, t: i64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.truncate(t)).collect() }
    }

    /// Lowest truncation among the coefficients.
    pub fn window(&self) -> i64 {
        self.coeffs.iter().map(|c| c.trunc()).min().unwrap_or(EXACT)
    }

    /// First x-power and coefficient where the two disagree.
    pub fn agree(&self, other: &XSeries) -> std::result::Result<i64, (usize, Mismatch)> {
        let mut w = EXACT;
        for (k, (a, b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            w = w.min(a.agree(b).map_err(|m| (k, m))?);
        }
        Ok(w)
    }

    /// Appends one check per x-power to `r`.
    pub fn push_checks(&self, other: &XSeries, name: &str, r: &mut Report) {
        for (k, (a, b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            r.push(format!("{name} x^{k}"), a, b);
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.coeffs.iter().map(|c| c.to_json()).collect())
    }
}

/// Grading used for operator coefficients: wide enough that no product of
/// coefficients is ever cut.
pub fn operator_grading() -> Grading {
    Grading::total(1000)
}

/// Finite sum `Σ c_{a,s}(u, Q) x^a D^s`, kept sorted by `(a, s)` with
/// zero coefficients removed.
#[derive(Clone, Debug, Default)]
pub struct QDiffOp {
    terms: BTreeMap<(u32, i64), USeries>,
}

impl PartialEq for QDiffOp {
    fn eq(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|((ka, a), (kb, b))| ka == kb && a.eq_within(b))
    }
}

impl QDiffOp {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c·M·u^e·x^a·D^s`.
    pub fn term(xpow: u32, shift: i64, mono: Mono, c: i64, upow: i64) -> Self {
        let mut op = Self::zero();
        op.add_coeff(xpow, shift, USeries::monomial(operator_grading(), mono, c, upow));
        op
    }

    pub fn one() -> Self {
        Self::term(0, 0, Mono::ONE, 1, 0)
    }

    /// `D^s`.
    pub fn shift(s: i64) -> Self {
        Self::term(0, s, Mono::ONE, 1, 0)
    }

    fn add_coeff(&mut self, xpow: u32, shift: i64, c: USeries) {
        let key = (xpow, shift);
        let sum = match self.terms.remove(&key) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    /// Terms as `(x-power, shift, coefficient)` in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, i64, &USeries)> {
        self.terms.iter().map(|((a, s), c)| (*a, *s, c))
    }

    pub fn add(&self, other: &QDiffOp) -> QDiffOp {
        let mut out = self.clone();
        for ((a, s), c) in &other.terms {
            out.add_coeff(*a, *s, c.clone());
        }
        out
    }

    pub fn neg(&self) -> QDiffOp {
        Self { terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    pub fn sub(&self, other: &QDiffOp) -> QDiffOp {
        self.add(&other.neg())
    }

    /// `self ∘ other`, using `D^s x^b = u^{2sb} x^b D^s`.
    pub fn compose(&self, other: &QDiffOp) -> QDiffOp {
        let mut out = QDiffOp::zero();
        for ((a, s), c) in &self.terms {
            for ((b, t), d) in &other.terms {
                out.add_coeff(a + b, s + t, c.mul(d).shift_u(2 * s * *b as i64));
            }
        }
        out
    }

    /// Applies the operator to `f`; x-powers beyond `f`'s degree are dropped.
    pub fn apply(&self, f: &XSeries) -> XSeries {
        let n = f.coeffs.len();
        let g = f.coeffs.first().map(|c| c.grading()).unwrap_or_else(|| Grading::total(0));
        let mut out: Vec<USeries> = vec![USeries::zero(g, EXACT); n];
        for ((a, s), c) in &self.terms {
            for (k, fk) in f.coeffs.iter().enumerate() {
                let j = k + *a as usize;
                if j >= n {
                    break;
                }
                let term = c.regrade(g).mul(fk).shift_u(2 * s * k as i64);
                out[j] = out[j].add(&term);
            }
        }
        XSeries { coeffs: out }
    }

    /// `u → 1`, `D → y`: exponent pairs `(x, y)` with their coefficients.
    pub fn classical_limit(&self) -> BTreeMap<(i64, i64), CoeffPoly> {
        let mut out: BTreeMap<(i64, i64), CoeffPoly> = BTreeMap::new();
        for ((a, s), c) in &self.terms {
            let v = c.at_u_one();
            let e = out.entry((*a as i64, *s)).or_insert_with(CoeffPoly::zero);
            e.add_assign(&v);
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Readable form such as `1 - Q1*Q2*u^-2*D + ...`.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, s), c)| {
                let mut f = format!("[{c}]");
                if *a > 0 {
                    f.push_str(&format!("*x^{a}"));
                }
                if *s != 0 {
                    f.push_str(&format!("*D^{s}"));
                }
                f
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

fn q(v: &[Var]) -> Mono {
    Mono::of(v)
}

fn c12() -> Mono {
    q(&[Var::Q1, Var::Q2])
}

/// `(1 + M_1 + …)·u^e·x^a·D^s` for a list of monomials.
fn sum_term(xpow: u32, shift: i64, monos: &[Mono], c: i64, upow: i64) -> QDiffOp {
    monos.iter().fold(QDiffOp::zero(), |acc, m| acc.add(&QDiffOp::term(xpow, shift, *m, c, upow)))
}

/// `1 − c·M·u^e·D^s`.
fn one_minus_shift(m: Mono, upow: i64, s: i64) -> QDiffOp {
    QDiffOp::one().sub(&QDiffOp::term(0, s, m, 1, upow))
}

/// The four operators of the generating functions.
#[derive(Clone, Debug)]
pub struct Operators {
    pub h: QDiffOp,
    pub k: QDiffOp,
    pub h_tilde: QDiffOp,
    pub k_tilde: QDiffOp,
}

/// `K = (1 − Q₁Q₂q^{−1}D)(1 − D) − (1+Q₁Q₃)q^{1/2}x + Q₁(1+Q₂Q₃)q^{1/2}xD + Q₁Q₃qx²`.
pub fn k_operator() -> QDiffOp {
    let one = Mono::ONE;
    one_minus_shift(c12(), -2, 1)
        .compose(&one_minus_shift(one, 0, 1))
        .sub(&sum_term(1, 0, &[one, q(&[Var::Q1, Var::Q3])], 1, 1))
        .add(&sum_term(1, 1, &[q(&[Var::Q1]), q(&[Var::Q1, Var::Q2, Var::Q3])], 1, 1))
        .add(&QDiffOp::term(2, 0, q(&[Var::Q1, Var::Q3]), 1, 2))
}

/// `K̃` with half-integer power `q^{h/2}` on the x-terms and `q^h` on `x²`.
/// `h = −1` annihilates `Ψ̃`; the variant with `h = +1` is kept for
/// comparison.
pub fn k_tilde_operator_with(h: i64) -> QDiffOp {
    let one = Mono::ONE;
    one_minus_shift(c12(), 2, -1)
        .compose(&one_minus_shift(one, 0, -1))
        .add(&sum_term(1, 0, &[one, q(&[Var::Q1, Var::Q3])], 1, h))
        .sub(&sum_term(1, -1, &[q(&[Var::Q1]), q(&[Var::Q1, Var::Q2, Var::Q3])], 1, h))
        .add(&QDiffOp::term(2, 0, q(&[Var::Q1, Var::Q3]), 1, 2 * h))
}

pub fn k_tilde_operator() -> QDiffOp {
    k_tilde_operator_with(-1)
}

/// `H` written out term by term as the difference of the two sides of the
/// equation for `Ψ`.
pub fn h_operator() -> QDiffOp {
    let a = one_minus_shift(c12(), -4, 1);
    let b = one_minus_shift(c12(), -2, 1);
    let ab = a.compose(&b);
    let d = QDiffOp::shift(1);
    let q13 = [Mono::ONE, q(&[Var::Q1, Var::Q3])];
    let q1 = [q(&[Var::Q1]), q(&[Var::Q1, Var::Q2, Var::Q3])];
    let rhs = ab.sub(&sum_term(1, 0, &q13, 1, 1).compose(&b)).add(&QDiffOp::term(2, 0, q(&[Var::Q1, Var::Q3]), 1, 2));
    let lhs = ab.sub(&sum_term(1, 0, &q1, 1, 1).compose(&b)).add(&QDiffOp::term(
        2,
        0,
        Mono::of(&[Var::Q1, Var::Q1, Var::Q2, Var::Q3]),
        1,
        2,
    ));
    rhs.sub(&lhs.compose(&d))
}

/// `H̃` term by term, with the same half-power convention as
/// [`k_tilde_operator_with`].
pub fn h_tilde_operator_with(h: i64) -> QDiffOp {
    let a = one_minus_shift(c12(), 4, -1);
    let b = one_minus_shift(c12(), 2, -1);
    let ab = a.compose(&b);
    let d = QDiffOp::shift(-1);
    let q13 = [Mono::ONE, q(&[Var::Q1, Var::Q3])];
    let q1 = [q(&[Var::Q1]), q(&[Var::Q1, Var::Q2, Var::Q3])];
    let rhs =
        ab.add(&sum_term(1, 0, &q13, 1, h).compose(&b)).add(&QDiffOp::term(2, 0, q(&[Var::Q1, Var::Q3]), 1, 2 * h));
    let lhs = ab.add(&sum_term(1, 0, &q1, 1, h).compose(&b)).add(&QDiffOp::term(
        2,
        0,
        Mono::of(&[Var::Q1, Var::Q1, Var::Q2, Var::Q3]),
        1,
        2 * h,
    ));
    rhs.sub(&lhs.compose(&d))
}

pub fn h_tilde_operator() -> QDiffOp {
    h_tilde_operator_with(-1)
}

pub fn build_operators() -> Operators {
    Operators { h: h_operator(), k: k_operator(), h_tilde: h_tilde_operator(), k_tilde: k_tilde_operator() }
}

/// `(1 − Q₁Q₂q^{−2}D)∘K` and `(1 − Q₁Q₂q²D^{−1})∘K̃`.
pub fn factorized_operators() -> (QDiffOp, QDiffOp) {
    (one_minus_shift(c12(), -4, 1).compose(&k_operator()), one_minus_shift(c12(), 4, -1).compose(&k_tilde_operator()))
}

/// The two-factor forms: `R − L∘D` with
/// `R = (1 − Q₁Q₂q^{−2}D − q^{1/2}x)(1 − Q₁Q₂q^{−1}D − Q₁Q₃q^{1/2}x)` and
/// `L = (1 − Q₁Q₂q^{−2}D − Q₁q^{1/2}x)(1 − Q₁Q₂q^{−1}D − Q₁Q₂Q₃q^{1/2}x)`,
/// and the tilde analogue.
pub fn two_factor_operators() -> (QDiffOp, QDiffOp) {
    let q1 = q(&[Var::Q1]);
    let q13 = q(&[Var::Q1, Var::Q3]);
    let q123 = q(&[Var::Q1, Var::Q2, Var::Q3]);
    let f = |s: i64, up: i64, m: Mono, sign: i64, half: i64| {
        one_minus_shift(c12(), up, s).add(&QDiffOp::term(1, 0, m, -sign, half))
    };
    let r = f(1, -4, Mono::ONE, 1, 1).compose(&f(1, -2, q13, 1, 1));
    let l = f(1, -4, q1, 1, 1).compose(&f(1, -2, q123, 1, 1));
    let plain = r.sub(&l.compose(&QDiffOp::shift(1)));
    let rt = f(-1, 4, Mono::ONE, -1, -1).compose(&f(-1, 2, q13, -1, -1));
    let lt = f(-1, 4, q1, -1, -1).compose(&f(-1, 2, q123, -1, -1));
    let tilde = rt.sub(&lt.compose(&QDiffOp::shift(-1)));
    (plain, tilde)
}

/// Operators annihilating `Φ` and `Φ̃`:
/// `(1 − Q₁q^{1/2}x)(1 − Q₁Q₂Q₃q^{1/2}x)D − (1 − q^{1/2}x)(1 − Q₁Q₃q^{1/2}x)` and
/// `(1 + Q₁q^{−1/2}x)(1 + Q₁Q₂Q₃q^{−1/2}x)D^{−1} − (1 + q^{−1/2}x)(1 + Q₁Q₃q^{−1/2}x)`.
pub fn phi_operators() -> (QDiffOp, QDiffOp) {
    let lin = |m: Mono, c: i64, half: i64| QDiffOp::one().add(&QDiffOp::term(1, 0, m, c, half));
    let q1 = q(&[Var::Q1]);
    let q13 = q(&[Var::Q1, Var::Q3]);
    let q123 = q(&[Var::Q1, Var::Q2, Var::Q3]);
    let plain = lin(q1, -1, 1)
        .compose(&lin(q123, -1, 1))
        .compose(&QDiffOp::shift(1))
        .sub(&lin(Mono::ONE, -1, 1).compose(&lin(q13, -1, 1)));
    let tilde = lin(q1, 1, -1)
        .compose(&lin(q123, 1, -1))
        .compose(&QDiffOp::shift(-1))
        .sub(&lin(Mono::ONE, 1, -1).compose(&lin(q13, 1, -1)));
    (plain, tilde)
}

pub fn apply_qdiff(op: &QDiffOp, f: &XSeries) -> XSeries {
    op.apply(f)
}

/// `∏_{i≥1} (1 + sign·M q^{i−1/2} x)^{power}` in the x-graded ring.
fn dilog_factor(gx: Grading, m: Mono, sign: i64, power: i64, t: i64) -> Result<USeries> {
    let mx = m * Mono::var(Var::X);
    let mut acc = USeries::one(gx).truncate(t);
    let mut i = 1;
    while 2 * i - 1 <= t {
        let f = if power > 0 {
            USeries::one_minus(gx, -sign, mx, 2 * i - 1)
        } else {
            USeries::geom_inverse(gx, -sign, mx, 2 * i - 1, t)?
        };
        acc = acc.mul(&f);
        i += 1;
    }
    Ok(acc)
}

fn phi_product(sign: i64, xdeg: usize, g: Grading, trunc: i64) -> Result<XSeries> {
    let gx = g.with_xdeg(xdeg as u32);
    let s = with_window(trunc, |t| {
        let mut acc = dilog_factor(gx, q(&[Var::Q1]), -sign, sign, t)?;
        acc = acc.mul(&dilog_factor(gx, q(&[Var::Q1, Var::Q2, Var::Q3]), -sign, sign, t)?);
        acc = acc.mul(&dilog_factor(gx, Mono::ONE, -sign, -sign, t)?);
        acc = acc.mul(&dilog_factor(gx, q(&[Var::Q1, Var::Q3]), -sign, -sign, t)?);
        Ok(acc)
    })?;
    Ok(XSeries::from_useries(&s, xdeg, g))
}

/// `Φ(x) = ∏_{i≥1} (1 − Q₁q^{i−1/2}x)(1 − Q₁Q₂Q₃q^{i−1/2}x) / ((1 − q^{i−1/2}x)(1 − Q₁Q₃q^{i−1/2}x))`.
pub fn phi_series(xdeg: usize, g: Grading, trunc: i64) -> Result<XSeries> {
    phi_product(1, xdeg, g, trunc)
}

/// `Φ̃(x) = 1/Φ(−x)`.
pub fn phi_tilde_series(xdeg: usize, g: Grading, trunc: i64) -> Result<XSeries> {
    phi_product(-1, xdeg, g, trunc)
}

/// Which one-leg family a generating function runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    /// `β₁ = (1^k)`.
    Column,
    /// `β₁ = (k)`.
    Row,
}

impl Leg {
    pub fn partition(self, k: usize) -> Partition {
        match self {
            Leg::Column => Partition::column(k),
            Leg::Row => Partition::row(k),
        }
    }
}

fn normalized<F>(xdeg: usize, trunc: i64, f: F) -> Result<XSeries>
where
    F: Fn(usize, i64) -> Result<USeries> + Sync,
{
    let coeffs = with_window_x(trunc, |t| {
        let z0 = f(0, t)?;
        let inv = z0.inverse(t)?;
        let raw: Vec<USeries> = (0..=xdeg).into_par_iter().map(|k| f(k, t)).collect::<Result<_>>()?;
        Ok(raw.iter().map(|z| z.mul(&inv)).collect())
    })?;
    Ok(XSeries { coeffs })
}

/// Raises the working window until every coefficient is known through
/// `u^target`.
fn with_window_x<F>(target: i64, mut f: F) -> Result<Vec<USeries>>
where
    F: FnMut(i64) -> Result<Vec<USeries>>,
{
    let mut t = target;
    loop {
        let r = f(t)?;
        let got = r.iter().map(|c| c.trunc()).min().unwrap_or(EXACT);
        if got >= target || t > target + 64 {
            return Ok(r.into_iter().map(|c| c.truncate(target)).collect());
        }
        t += (target - got).max(1);
    }
}

/// `Σ_k Y_{β(k)∅} x^k / Y_{∅∅}`: `Φ` for columns, `Φ̃` for rows.
pub fn phi_ratio_series(leg: Leg, xdeg: usize, g: Grading, trunc: i64) -> Result<XSeries> {
    let e = Partition::empty();
    normalized(xdeg, trunc, |k, t| y_amplitude(&leg.partition(k), &e, g, t))
}

/// `Σ_k Z^{ctv}_{β(k)∅} x^k / Z^{ctv}_{∅∅}`: `Ψ` for columns, `Ψ̃` for rows.
pub fn psi_series(leg: Leg, xdeg: usize, g: Grading, trunc: i64) -> Result<XSeries> {
    let e = Partition::empty();
    normalized(xdeg, trunc, |k, t| Ok(ctv_closed(&leg.partition(k), &e, g, t)?.value))
}

/// `Σ_k Z^{ctv}_{∅β(k)} x^k / Z^{ctv}_{∅∅}`, the second-leg family.
pub fn psi_second_leg_series(leg: Leg, xdeg: usize, g: Grading, trunc: i64) -> Result<XSeries> {
    let e = Partition::empty();
    normalized(xdeg, trunc, |k, t| Ok(ctv_closed(&e, &leg.partition(k), g, t)?.value))
}

/// `a_k = b_k ∏_{i≤k}(1 − Q₁Q₂q^{i−1})^{−1}` (columns) or
/// `ã_k = b̃_k ∏_{i≤k}(1 − Q₁Q₂q^{1−i})^{−1}` (rows).
pub fn psi_from_phi(leg: Leg, phi: &XSeries) -> Result<XSeries> {
    let mut coeffs = Vec::with_capacity(phi.coeffs.len());
    for (k, b) in phi.coeffs.iter().enumerate() {
        let g = b.grading();
        let mut acc = b.clone();
        for i in 1..=k as i64 {
            let e = match leg {
                Leg::Column => 2 * (i - 1),
                Leg::Row => 2 * (1 - i),
            };
            acc = acc.mul(&USeries::geom_inverse(g, 1, c12(), e, b.trunc() - e.min(0))?);
        }
        coeffs.push(acc);
    }
    Ok(XSeries { coeffs })
}

fn coeff(s: &XSeries, k: i64) -> USeries {
    if k < 0 || k as usize >= s.coeffs.len() {
        USeries::zero(s.coeffs[0].grading(), EXACT)
    } else {
        s.coeffs[k as usize].clone()
    }
}

/// The recursions for `b_k` and `a_k`, for `k = 0..=kmax`.
pub fn verify_recursions(phi: &XSeries, psi: &XSeries, kmax: usize) -> Report {
    let mut r = Report::default();
    let g = phi.coeffs[0].grading();
    let c = c12();
    let q1 = q(&[Var::Q1]);
    let q13 = q(&[Var::Q1, Var::Q3]);
    let q123 = q(&[Var::Q1, Var::Q2, Var::Q3]);
    let q1123 = Mono::of(&[Var::Q1, Var::Q1, Var::Q2, Var::Q3]);
    for k in 0..=kmax.min(phi.xdeg()) as i64 {
        let (b0, b1, b2) = (coeff(phi, k), coeff(phi, k - 1), coeff(phi, k - 2));
        let lhs = b0.shift_u(2 * k).sub(&b1.scale(q1, 1, 2 * k - 1)).sub(&b1.scale(q123, 1, 2 * k - 1)).add(&b2.scale(
            q1123,
            1,
            2 * k - 2,
        ));
        let rhs = b0.sub(&b1.shift_u(1)).sub(&b1.scale(q13, 1, 1)).add(&b2.scale(q13, 1, 2));
        r.push(format!("b-recursion k={k}"), &lhs, &rhs);

        let (a0, a1, a2) = (coeff(psi, k), coeff(psi, k - 1), coeff(psi, k - 2));
        let f2 = USeries::one_minus(g, 1, c, 2 * (k - 2));
        let f1 = USeries::one_minus(g, 1, c, 2 * (k - 1));
        let lhs = f2
            .mul(&f1)
            .mul(&a0)
            .shift_u(2 * k)
            .sub(&f2.mul(&a1).scale(q1, 1, 2 * k - 1))
            .sub(&f2.mul(&a1).scale(q123, 1, 2 * k - 1))
            .add(&a2.scale(q1123, 1, 2 * k - 2));
        let rhs = f2
            .mul(&f1)
            .mul(&a0)
            .sub(&f2.mul(&a1).shift_u(1))
            .sub(&f2.mul(&a1).scale(q13, 1, 1))
            .add(&a2.scale(q13, 1, 2));
        r.push(format!("a-recursion k={k}"), &lhs, &rhs);
    }
    r
}

/// Pushes one zero-residual check per x-power of `op·f`.
pub fn push_residual(op: &QDiffOp, f: &XSeries, name: &str, r: &mut Report) {
    let res = op.apply(f);
    for (k, c) in res.coeffs.iter().enumerate() {
        r.push(format!("{name} x^{k}"), c, &USeries::zero(c.grading(), EXACT));
    }
}

/// Extra u-window needed so that applying operators with shifts up to
/// `|s| ≤ 2` to degree-`xdeg` series still leaves `trunc` certified.
pub fn shift_margin(xdeg: usize) -> i64 {
    4 * xdeg as i64 + 4
}

/// Convex hull of lattice points, counterclockwise from the
/// lexicographically smallest, without collinear points.
pub fn newton_polygon(points: &[(i64, i64)]) -> Vec<[i64; 2]> {
    let mut p: Vec<(i64, i64)> = points.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return p.into_iter().map(|(a, b)| [a, b]).collect();
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in p.iter().chain(p.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    hull.pop();
    hull.into_iter().map(|(a, b)| [a, b]).collect()
}

/// Coefficients of a classical curve keyed by `(x-power, y-power)`.
pub type Curve = BTreeMap<(i64, i64), CoeffPoly>;

/// `K_cl(x, y)` and `K̃_cl(x, y^{−1})` as maps from `(x-power, y-power)`;
/// for `K̃` the second exponent counts powers of `y^{−1}`.
pub fn classical_curves() -> (Curve, Curve) {
    let k = k_operator().classical_limit();
    let kt = k_tilde_operator().classical_limit().into_iter().map(|((a, s), c)| ((a, -s), c)).collect();
    (k, kt)
}
