//! Exact coefficient arithmetic.
//!
//! [`CoeffPoly`] is a Laurent polynomial in the Kähler parameters
//! `Q1..Q3`, `P1..P3` and the spectral variable `x` over big integers.
//! [`USeries`] is a truncated Laurent series in `u = q^{1/2}` with
//! `CoeffPoly` coefficients. Half-integer powers of `q` therefore become
//! integer powers of `u`.
//!
//! Two gradings bound the size of every computation: the u-degree
//! truncation (`trunc`: coefficients of `u^e` with `e > trunc` are unknown)
//! and a weighted Q-degree cutoff carried by [`Grading`] (monomials above
//! the cutoff are identically zero in the quotient ring being computed in).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Truncation value of an exact (finite) series.
pub const EXACT: i64 = 1 << 60;

/// Truncations this far out only arise from shifting an exact series.
fn clamp(t: i64) -> i64 {
    if t >= EXACT / 2 {
        EXACT
    } else {
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Q1,
    Q2,
    Q3,
    P1,
    P2,
    P3,
    X,
}

pub const ALL_VARS: [Var; 7] = [Var::Q1, Var::Q2, Var::Q3, Var::P1, Var::P2, Var::P3, Var::X];

impl Var {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Q1 => "Q1",
            Var::Q2 => "Q2",
            Var::Q3 => "Q3",
            Var::P1 => "P1",
            Var::P2 => "P2",
            Var::P3 => "P3",
            Var::X => "x",
        }
    }

    pub fn parse(s: &str) -> Result<Var> {
        ALL_VARS
            .iter()
            .copied()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown variable {s:?}")))
    }
}

/// Laurent monomial: exponent vector over [`ALL_VARS`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono(pub [i16; 7]);

impl Mono {
    pub const ONE: Mono = Mono([0; 7]);

    pub fn var(v: Var) -> Mono {
        Mono::pow_of(v, 1)
    }

    pub fn pow_of(v: Var, e: i16) -> Mono {
        let mut m = [0; 7];
        m[v.index()] = e;
        Mono(m)
    }

    /// Product of the listed variables, e.g. `Mono::of(&[Q1, Q2])`.
    pub fn of(vars: &[Var]) -> Mono {
        vars.iter().fold(Mono::ONE, |m, &v| m * Mono::var(v))
    }

    pub fn exp(&self, v: Var) -> i16 {
        self.0[v.index()]
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; 7]
    }

    pub fn pow(&self, k: i64) -> Mono {
        let mut m = self.0;
        for e in m.iter_mut() {
            *e = (*e as i64 * k) as i16;
        }
        Mono(m)
    }

    pub fn inv(&self) -> Mono {
        self.pow(-1)
    }

    pub fn parse_map(map: &BTreeMap<String, i64>) -> Result<Mono> {
        let mut m = Mono::ONE;
        for (k, &e) in map {
            m = m * Mono::pow_of(Var::parse(k)?, e as i16);
        }
        Ok(m)
    }

    /// Parses a product such as `"Q1*Q2^2"` (or `"1"`).
    pub fn parse(s: &str) -> Result<Mono> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Mono::ONE);
        }
        let mut m = Mono::ONE;
        for factor in s.split('*') {
            let (name, e) = match factor.split_once('^') {
                Some((n, e)) => (n, e.trim().parse::<i16>().map_err(|e| Error::Parse(e.to_string()))?),
                None => (factor, 1),
            };
            m = m * Mono::pow_of(Var::parse(name)?, e);
        }
        Ok(m)
    }

    pub fn to_map(&self) -> BTreeMap<String, i64> {
        ALL_VARS.iter().filter(|v| self.exp(**v) != 0).map(|v| (v.name().to_string(), self.exp(*v) as i64)).collect()
    }
}

impl serde::Serialize for Mono {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Mono {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, i64>::deserialize(d)?;
        Mono::parse_map(&map).map_err(serde::de::Error::custom)
    }
}

impl std::ops::Mul for Mono {
    type Output = Mono;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Mono) -> Mono {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Mono(m)
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = ALL_VARS
            .iter()
            .filter(|v| self.exp(**v) != 0)
            .map(|v| match self.exp(*v) {
                1 => v.name().to_string(),
                e => format!("{}^{}", v.name(), e),
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Weighted Q-degree cutoff plus an x-degree cutoff.
///
/// A monomial survives iff `Σ weights[i]·e_i ≤ qdeg` over `Q1..P3` and
/// `e_x ≤ xdeg`. Weights must keep every monomial that occurs in a
/// computation at nonnegative weighted degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grading {
    pub weights: [i32; 6],
    pub qdeg: i32,
    pub xdeg: i32,
}

impl Grading {
    /// Total degree in all six Kähler parameters, no x.
    pub fn total(qdeg: u32) -> Self {
        Self { weights: [1; 6], qdeg: qdeg as i32, xdeg: 0 }
    }

    pub fn with_xdeg(mut self, xdeg: u32) -> Self {
        self.xdeg = xdeg as i32;
        self
    }

    /// Replaces the weight of one Kähler parameter.
    pub fn with_weight(mut self, v: Var, w: i32) -> Self {
        assert!(v != Var::X, "x is graded by xdeg");
        self.weights[v.index()] = w;
        self
    }

    pub fn weight(&self, m: &Mono) -> i64 {
        (0..6).map(|i| self.weights[i] as i64 * m.0[i] as i64).sum()
    }

    pub fn weight_of(&self, v: Var) -> i32 {
        self.weights[v.index()]
    }

    pub fn admits(&self, m: &Mono) -> bool {
        self.weight(m) <= self.qdeg as i64 && (m.exp(Var::X) as i32) <= self.xdeg
    }

    /// Whether powers of `m` eventually leave the grading.
    pub fn is_nilpotent(&self, m: &Mono) -> bool {
        self.weight(m) > 0 || m.exp(Var::X) > 0
    }
}

/// Exact Laurent polynomial over big integers; no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoeffPoly {
    terms: BTreeMap<Mono, BigInt>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Mono::ONE, 1)
    }

    pub fn monomial(m: Mono, c: i64) -> Self {
        let mut p = Self::zero();
        if c != 0 {
            p.terms.insert(m, BigInt::from(c));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Mono::ONE).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Mono, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add_assign(&mut self, other: &CoeffPoly) {
        for (m, c) in &other.terms {
            self.add_term(*m, c);
        }
    }

    pub fn sub_assign(&mut self, other: &CoeffPoly) {
        for (m, c) in &other.terms {
            self.add_term(*m, &-c);
        }
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    /// Accumulates `a·b` into `self`, dropping monomials the grading rejects.
    pub fn add_product(&mut self, a: &CoeffPoly, b: &CoeffPoly, g: &Grading) {
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let m = *ma * *mb;
                if g.admits(&m) {
                    self.add_term(m, &(ca * cb));
                }
            }
        }
    }

    pub fn mul(&self, other: &CoeffPoly, g: &Grading) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        out.add_product(self, other, g);
        out
    }

    /// Multiplies by `c·m`, dropping rejected monomials.
    pub fn scale(&self, m: Mono, c: i64, g: &Grading) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        for (mm, cc) in &self.terms {
            let nm = *mm * m;
            if g.admits(&nm) {
                out.add_term(nm, &(cc * c));
            }
        }
        out
    }

    pub fn filtered(&self, g: &Grading) -> CoeffPoly {
        Self { terms: self.terms.iter().filter(|(m, _)| g.admits(m)).map(|(m, c)| (*m, c.clone())).collect() }
    }

    /// Replaces each listed variable by a Laurent monomial.
    pub fn substitute(&self, rules: &[(Var, Mono)], g: &Grading) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        for (m, c) in &self.terms {
            let mut nm = *m;
            for (v, img) in rules {
                let e = m.exp(*v);
                if e != 0 {
                    nm.0[v.index()] -= e;
                    nm = nm * img.pow(e as i64);
                }
            }
            if g.admits(&nm) {
                out.add_term(nm, c);
            }
        }
        out
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

/// First coefficient where two series disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub u: i64,
    pub mono: String,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coefficient of u^{} {}: {} vs {}", self.u, self.mono, self.left, self.right)
    }
}

/// Truncated Laurent series in `u` with [`CoeffPoly`] coefficients.
///
/// Coefficients of `u^e` are stored for `lo ≤ e ≤ lo + coeffs.len() − 1`;
/// all exponents below `lo` are zero and exponents above `trunc` are unknown.
#[derive(Clone, Debug)]
pub struct USeries {
    lo: i64,
    coeffs: Vec<CoeffPoly>,
    trunc: i64,
    grading: Grading,
}

impl USeries {
    pub fn zero(grading: Grading, trunc: i64) -> Self {
        Self { lo: 0, coeffs: Vec::new(), trunc: clamp(trunc), grading }
    }

    pub fn one(grading: Grading) -> Self {
        Self::monomial(grading, Mono::ONE, 1, 0)
    }

    /// Exact single term `c·m·u^e` (zero if the grading rejects `m`).
    pub fn monomial(grading: Grading, m: Mono, c: i64, e: i64) -> Self {
        let mut s = Self::zero(grading, EXACT);
        if c != 0 && grading.admits(&m) {
            s.lo = e;
            s.coeffs.push(CoeffPoly::monomial(m, c));
        }
        s
    }

    /// Exact `1 − c·m·u^e`.
    pub fn one_minus(grading: Grading, c: i64, m: Mono, e: i64) -> Self {
        Self::one(grading).sub(&Self::monomial(grading, m, c, e))
    }

    /// Builds a series from `(u-exponent, monomial, coefficient)` terms.
    pub fn from_terms(grading: Grading, terms: &[(i64, Mono, i64)], trunc: i64) -> Self {
        let mut s = Self::zero(grading, trunc);
        for &(e, m, c) in terms {
            s.add_term(e, m, &BigInt::from(c));
        }
        s
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc >= EXACT
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent that can be nonzero; `trunc + 1` for a zero series.
    pub fn lo(&self) -> i64 {
        if self.coeffs.is_empty() {
            clamp(self.trunc + 1)
        } else {
            self.lo
        }
    }

    /// Highest stored exponent (meaningless for the zero series).
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, e: i64) -> Option<&CoeffPoly> {
        if e < self.lo || e > self.hi() {
            None
        } else {
            Some(&self.coeffs[(e - self.lo) as usize])
        }
    }

    /// Coefficient of `u^e` (zero when absent).
    pub fn coeff_owned(&self, e: i64) -> CoeffPoly {
        self.coeff(e).cloned().unwrap_or_default()
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &CoeffPoly)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (self.lo + i as i64, c))
    }

    fn slot(&mut self, e: i64) -> &mut CoeffPoly {
        if self.coeffs.is_empty() {
            self.lo = e;
            self.coeffs.push(CoeffPoly::zero());
        } else if e < self.lo {
            let extra = (self.lo - e) as usize;
            let mut v = vec![CoeffPoly::zero(); extra];
            v.append(&mut self.coeffs);
            self.coeffs = v;
            self.lo = e;
        } else if e > self.hi() {
            let need = (e - self.lo) as usize + 1;
            self.coeffs.resize(need, CoeffPoly::zero());
        }
        &mut self.coeffs[(e - self.lo) as usize]
    }

    pub fn add_term(&mut self, e: i64, m: Mono, c: &BigInt) {
        if e > self.trunc || !self.grading.admits(&m) || c.is_zero() {
            return;
        }
        self.slot(e).add_term(m, c);
        self.normalize();
    }

    fn add_poly_at(&mut self, e: i64, p: &CoeffPoly) {
        if e > self.trunc || p.is_zero() {
            return;
        }
        self.slot(e).add_assign(p);
    }

    fn normalize(&mut self) {
        let hi_keep = self.trunc;
        if !self.coeffs.is_empty() && self.hi() > hi_keep {
            let keep = (hi_keep - self.lo + 1).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.lo = 0;
        }
    }

    fn check_grading(&self, other: &USeries) {
        assert!(
            self.grading.weights == other.grading.weights && self.grading.xdeg == other.grading.xdeg,
            "mixing series of different gradings: {:?} vs {:?}",
            self.grading,
            other.grading
        );
    }

    fn combined_grading(&self, other: &USeries) -> Grading {
        self.check_grading(other);
        let mut g = self.grading;
        g.qdeg = g.qdeg.min(other.grading.qdeg);
        g
    }

    /// Lowers the truncation to `t` (never raises it).
    pub fn truncate(&self, t: i64) -> USeries {
        let mut s = self.clone();
        s.trunc = s.trunc.min(t);
        s.normalize();
        s
    }

    /// Reinterprets the series in a coarser grading (dropping monomials).
    pub fn regrade(&self, g: Grading) -> USeries {
        let mut out = USeries::zero(g, self.trunc);
        for (e, c) in self.iter() {
            out.add_poly_at(e, &c.filtered(&g));
        }
        out.normalize();
        out
    }

    pub fn add(&self, other: &USeries) -> USeries {
        let g = self.combined_grading(other);
        let mut out = USeries::zero(g, self.trunc.min(other.trunc));
        for (e, c) in self.iter().chain(other.iter()) {
            out.add_poly_at(e, &c.filtered(&g));
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> USeries {
        let mut s = self.clone();
        for c in s.coeffs.iter_mut() {
            *c = c.neg();
        }
        s
    }

    pub fn sub(&self, other: &USeries) -> USeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &USeries) -> USeries {
        let g = self.combined_grading(other);
        let trunc = clamp((self.lo() + other.trunc).min(other.lo() + self.trunc));
        let mut out = USeries::zero(g, trunc);
        if self.is_zero() || other.is_zero() {
            return out;
        }
        let lo = self.lo + other.lo;
        let hi = (self.hi() + other.hi()).min(trunc);
        if hi < lo {
            return out;
        }
        let mut acc = vec![CoeffPoly::zero(); (hi - lo + 1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let idx = i + j;
                if idx >= acc.len() {
                    break;
                }
                if !b.is_zero() {
                    acc[idx].add_product(a, b, &g);
                }
            }
        }
        out.lo = lo;
        out.coeffs = acc;
        out.normalize();
        out
    }

    /// Multiplies by `c·m·u^e`.
    pub fn scale(&self, m: Mono, c: i64, e: i64) -> USeries {
        let mut out = USeries::zero(self.grading, clamp(self.trunc + e));
        for (k, p) in self.iter() {
            out.add_poly_at(k + e, &p.scale(m, c, &self.grading));
        }
        out.normalize();
        out
    }

    pub fn shift_u(&self, e: i64) -> USeries {
        self.scale(Mono::ONE, 1, e)
    }

    pub fn pow(&self, n: u32) -> USeries {
        let mut acc = USeries::one(self.grading);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// `Σ_{k≥0} (c·m·u^a)^k`, the inverse of `1 − c·m·u^a`.
    ///
    /// Requires `a > 0` or a monomial that is nilpotent in the grading. The
    /// result is exact when the grading terminates the sum before `trunc`.
    pub fn geom_inverse(grading: Grading, c: i64, m: Mono, a: i64, trunc: i64) -> Result<USeries> {
        let nilpotent = grading.is_nilpotent(&m);
        if a <= 0 && !nilpotent {
            return Err(Error::NotInvertible(format!("1 - ({c})*{m}*u^{a}")));
        }
        let mut out = USeries::zero(grading, EXACT);
        let mut k: i64 = 0;
        loop {
            let mk = m.pow(k);
            if nilpotent && !grading.admits(&mk) {
                break;
            }
            if a > 0 && a * k > trunc {
                out.trunc = clamp(trunc);
                break;
            }
            let sign = if c < 0 && k % 2 == 1 { -1 } else { 1 };
            let cabs = c.abs().pow(k as u32);
            if grading.admits(&mk) {
                out.add_term(a * k, mk, &BigInt::from(sign * cabs));
            }
            k += 1;
        }
        out.normalize();
        Ok(out)
    }

    /// Multiplicative inverse of a series whose `u^0` coefficient is `1 − g`
    /// with `g` nilpotent in the grading and which has nothing below `u^0`.
    pub fn inverse(&self, trunc: i64) -> Result<USeries> {
        if self.lo() < 0 {
            return Err(Error::NotInvertible("series has negative u-powers".into()));
        }
        let c0 = self.coeff_owned(0);
        let g = self.grading;
        let mut nil = CoeffPoly::one();
        nil.sub_assign(&c0);
        if nil.terms().any(|(m, _)| !g.is_nilpotent(m)) {
            return Err(Error::NotInvertible(format!("leading coefficient {c0} is not 1 + nilpotent")));
        }
        // h0 = Σ nil^n
        let mut h0 = CoeffPoly::one();
        let mut power = CoeffPoly::one();
        loop {
            power = power.mul(&nil, &g);
            if power.is_zero() {
                break;
            }
            h0.add_assign(&power);
        }
        let t = self.trunc.min(trunc);
        if t < 0 {
            return Ok(USeries::zero(g, t));
        }
        let mut h: Vec<CoeffPoly> = vec![h0.clone()];
        for n in 1..=t {
            let mut acc = CoeffPoly::zero();
            for i in 1..=n {
                let fi = self.coeff(i);
                if let Some(fi) = fi {
                    if !fi.is_zero() {
                        acc.add_product(fi, &h[(n - i) as usize], &g);
                    }
                }
            }
            h.push(acc.mul(&h0, &g).neg());
        }
        let mut out = USeries { lo: 0, coeffs: h, trunc: t, grading: g };
        out.normalize();
        Ok(out)
    }

    /// Applies a monomial substitution to every coefficient, landing in
    /// grading `target`.
    pub fn substitute(&self, rules: &[(Var, Mono)], target: Grading) -> USeries {
        let mut out = USeries::zero(target, self.trunc);
        for (e, c) in self.iter() {
            out.add_poly_at(e, &c.substitute(rules, &target));
        }
        out.normalize();
        out
    }

    /// Coefficient of `x^k` as a series without x.
    pub fn x_coefficient(&self, k: i64) -> USeries {
        let mut out = USeries::zero(self.grading, self.trunc);
        let strip = Mono::pow_of(Var::X, -(k as i16));
        for (e, c) in self.iter() {
            for (m, v) in c.terms() {
                if m.exp(Var::X) as i64 == k {
                    out.add_term(e, *m * strip, v);
                }
            }
        }
        out
    }

    /// Sum of all u-coefficients, the `u → 1` limit of an exact series.
    pub fn at_u_one(&self) -> CoeffPoly {
        assert!(self.is_exact(), "u → 1 needs an exact series");
        let mut out = CoeffPoly::zero();
        for (_, c) in self.iter() {
            out.add_assign(c);
        }
        out
    }

    /// Compares two series on their common window. Returns the window
    /// (highest compared exponent) or the first mismatching coefficient.
    pub fn agree(&self, other: &USeries) -> std::result::Result<i64, Mismatch> {
        let t = self.trunc.min(other.trunc);
        let lo = self.lo().min(other.lo());
        let hi = if t >= EXACT { self.hi().max(other.hi()) } else { t };
        for e in lo..=hi {
            let a = self.coeff_owned(e);
            let b = other.coeff_owned(e);
            if a != b {
                let mut d = a.clone();
                d.sub_assign(&b);
                let (m, _) = d.terms().next().expect("nonzero difference");
                return Err(Mismatch {
                    u: e,
                    mono: m.to_string(),
                    left: a.coeff(m).to_string(),
                    right: b.coeff(m).to_string(),
                });
            }
        }
        Ok(t)
    }

    pub fn eq_within(&self, other: &USeries) -> bool {
        self.agree(other).is_ok()
    }

    /// Canonical JSON: terms ordered by u then monomial.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .iter()
            .flat_map(|(e, c)| {
                c.terms()
                    .map(move |(m, v)| json!({"u": e, "mono": m.to_map(), "coeff": v.to_string()}))
                    .collect::<Vec<_>>()
            })
            .collect();
        let trunc = if self.is_exact() { Value::Null } else { json!(self.trunc) };
        json!({"trunc": trunc, "terms": terms})
    }
}

impl fmt::Display for USeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*u^{e}")?;
        }
        if first {
            write!(f, "0")?;
        }
        if !self.is_exact() {
            write!(f, " + O(u^{})", self.trunc + 1)?;
        }
        Ok(())
    }
}

/// Runs `f` with an internal truncation raised until the result is known
/// through `u^target`, then trims it to exactly `target`.
///
/// Computations whose factors carry negative u-powers lose window in
/// multiplication; the deficit is fixed by the data, so a couple of
/// retries suffice.
pub fn with_window<F>(target: i64, mut f: F) -> Result<USeries>
where
    F: FnMut(i64) -> Result<USeries>,
{
    let mut t = target;
    for _ in 0..8 {
        let r = f(t)?;
        if r.trunc() >= target {
            return Ok(r.truncate(target));
        }
        t += (target - r.trunc()).max(1);
    }
    let r = f(t)?;
    Err(Error::WindowTooSmall { got: r.trunc(), want: target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g3() -> Grading {
        Grading::total(3)
    }

    fn u(e: i64) -> USeries {
        USeries::monomial(g3(), Mono::ONE, 1, e)
    }

    #[test]
    fn identity_and_powers() {
        let s = USeries::from_terms(g3(), &[(1, Mono::var(Var::Q1), 2), (3, Mono::ONE, -1)], 10);
        assert!(USeries::one(g3()).mul(&s).eq_within(&s));
        assert!(u(1).mul(&u(1)).eq_within(&u(2)));
    }

    #[test]
    fn telescoping_geometric() {
        let t = 12;
        let mut sum = USeries::zero(g3(), t);
        for k in 0..=t {
            sum = sum.add(&u(k));
        }
        let sum = sum.truncate(t);
        let prod = USeries::one_minus(g3(), 1, Mono::ONE, 1).mul(&sum);
        assert_eq!(prod.trunc(), t);
        assert!(prod.eq_within(&USeries::one(g3())));
    }

    #[test]
    fn geom_inverse_examples() {
        let g = g3();
        let s = USeries::geom_inverse(g, 1, Mono::ONE, 1, 8).unwrap();
        assert_eq!(s.trunc(), 8);
        for e in 0..=8 {
            assert!(s.coeff_owned(e).is_one());
        }
        let q12 = Mono::of(&[Var::Q1, Var::Q2]);
        let s = USeries::geom_inverse(g, 1, q12, 0, 8).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.coeff_owned(0).len(), 2); // 1 + Q1Q2 (Q1^2Q2^2 exceeds degree 3)
        let back = s.mul(&USeries::one_minus(g, 1, q12, 0));
        assert!(back.eq_within(&USeries::one(g)));
        let s = USeries::geom_inverse(g, 1, Mono::var(Var::Q1), 2, 10).unwrap();
        let back = s.mul(&USeries::one_minus(g, 1, Mono::var(Var::Q1), 2));
        assert!(back.eq_within(&USeries::one(g)));
        assert!(USeries::geom_inverse(Grading::total(3).with_weight(Var::P1, 0), 1, Mono::var(Var::P1), 0, 5).is_err());
        assert!(USeries::geom_inverse(g, 1, Mono::ONE, 0, 5).is_err());
    }

    #[test]
    fn substitution_examples() {
        let g = g3();
        let p1 = Mono::var(Var::P1);
        let s = USeries::monomial(g, p1, 1, 1);
        let r = s.substitute(&[(Var::P1, Mono::pow_of(Var::Q1, -1))], g);
        assert!(r.eq_within(&USeries::monomial(g, Mono::pow_of(Var::Q1, -1), 1, 1)));
        let rules = [
            (Var::P1, Mono::pow_of(Var::Q1, -1)),
            (Var::P2, Mono::of(&[Var::Q1, Var::Q2])),
            (Var::P3, Mono::of(&[Var::Q1, Var::Q3])),
        ];
        let s = USeries::monomial(g, Mono::of(&[Var::P1, Var::P2]), 1, 0);
        assert!(s.substitute(&rules, g).eq_within(&USeries::monomial(g, Mono::var(Var::Q2), 1, 0)));
        assert!(s.substitute(&[], g).eq_within(&s));
    }

    #[test]
    fn inverse_recovers_one() {
        let g = g3();
        let f = USeries::one_minus(g, 1, Mono::var(Var::Q1), 0)
            .mul(&USeries::one_minus(g, -1, Mono::ONE, 1))
            .mul(&USeries::one_minus(g, 1, Mono::var(Var::Q2), 3));
        let h = f.inverse(12).unwrap();
        assert!(h.mul(&f).eq_within(&USeries::one(g)));
        assert!(u(-1).add(&u(0)).inverse(5).is_err());
    }

    #[test]
    fn truncation_propagates_through_negative_powers() {
        let a = u(-2).add(&u(0));
        let b = USeries::geom_inverse(g3(), 1, Mono::ONE, 1, 10).unwrap();
        assert_eq!(a.mul(&b).trunc(), 8);
    }

    #[test]
    fn json_is_canonical() {
        let s = USeries::from_terms(g3(), &[(2, Mono::var(Var::Q2), 3), (1, Mono::var(Var::Q1), -1)], 4);
        let v = s.to_json();
        assert_eq!(v["terms"][0]["u"], 1);
        assert_eq!(v["terms"][0]["coeff"], "-1");
        assert_eq!(v["trunc"], 4);
    }

    fn arb_series() -> impl Strategy<Value = USeries> {
        prop::collection::vec((-2i64..6, 0i16..3, 0i16..2, -3i64..4), 0..6).prop_map(|terms| {
            let t: Vec<(i64, Mono, i64)> = terms
                .into_iter()
                .map(|(e, a, b, c)| (e, Mono::pow_of(Var::Q1, a) * Mono::pow_of(Var::Q3, b), c))
                .collect();
            USeries::from_terms(Grading::total(3), &t, 9)
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert!(a.mul(&b).eq_within(&b.mul(&a)));
            prop_assert!(a.mul(&b).mul(&c).eq_within(&a.mul(&b.mul(&c))));
            prop_assert!(a.mul(&b.add(&c)).eq_within(&a.mul(&b).add(&a.mul(&c))));
            prop_assert!(a.add(&b).eq_within(&b.add(&a)));
        }

        #[test]
        fn geom_inverse_multiplies_back(qa in 0i16..3, qb in 0i16..2, a in 0i64..4, sign in prop::bool::ANY) {
            let g = Grading::total(3);
            let m = Mono::pow_of(Var::Q1, qa) * Mono::pow_of(Var::Q2, qb);
            let c = if sign { 1 } else { -1 };
            match USeries::geom_inverse(g, c, m, a, 14) {
                Ok(inv) => {
                    let back = inv.mul(&USeries::one_minus(g, c, m, a));
                    prop_assert!(back.eq_within(&USeries::one(g)));
                }
                Err(_) => prop_assert!(a == 0 && qa == 0 && qb == 0),
            }
        }

        #[test]
        fn truncate_then_multiply(a in arb_series(), b in arb_series(), t in 0i64..8) {
            let full = a.mul(&b).truncate(t);
            let early = a.truncate(t + 2).mul(&b.truncate(t + 2)).truncate(t);
            // the early product may know less, never something different
            prop_assert!(full.eq_within(&early));
        }
    }
}
