//! Infinite products `∏_{i,j≥1} (1 − c·M q^{i+j−1−a_i−b_j})^{±1}` indexed by
//! two partitions, the building block of every closed amplitude formula.

use crate::error::Result;
use crate::partitions::Partition;
use crate::ring::{with_window, Grading, Mono, USeries};

/// Multiplies `acc` by `(1 − c·m·u^e)^power` at working window `t`.
fn mul_factor(acc: USeries, g: Grading, c: i64, m: Mono, e: i64, power: i64, t: i64) -> Result<USeries> {
    if power == 0 {
        return Ok(acc);
    }
    let base = if power > 0 {
        USeries::one_minus(g, c, m, e)
    } else {
        // Window of the inverse only needs to reach t above the lowest
        // power that survives in acc.
        USeries::geom_inverse(g, c, m, e, t - acc.lo().min(0))?
    };
    Ok(acc.mul(&base.pow(power.unsigned_abs() as u32)))
}

/// `∏_{s ≥ s0} (1 − c·m·q^{s})^{power·(s − shift)}`; `shift = None` means
/// multiplicity one. Factors whose u-power exceeds the working window are
/// dropped, which the window bookkeeping of `acc` accounts for.
#[allow(clippy::too_many_arguments)]
fn mul_tail(
    mut acc: USeries,
    g: Grading,
    c: i64,
    m: Mono,
    s0: i64,
    shift: Option<i64>,
    power: i64,
    t: i64,
) -> Result<USeries> {
    acc = acc.truncate(t);
    let mut s = s0;
    loop {
        if 2 * s > t - acc.lo().min(0) && s > 0 {
            break;
        }
        let mult = match shift {
            Some(sh) => s - sh,
            None => 1,
        };
        acc = mul_factor(acc, g, c, m, 2 * s, power * mult, t)?;
        s += 1;
    }
    Ok(acc)
}

fn raw(g: Grading, c: i64, m: Mono, a: &Partition, b: &Partition, power: i64, t: i64) -> Result<USeries> {
    let la = a.len() as i64;
    let lb = b.len() as i64;
    let mut acc = USeries::one(g).truncate(t);
    // finite block
    for i in 1..=la {
        for j in 1..=lb {
            let s = i + j - 1 - a.part(i as usize) as i64 - b.part(j as usize) as i64;
            acc = mul_factor(acc, g, c, m, 2 * s, power, t)?;
        }
    }
    // rows i ≤ ℓ(a), columns beyond ℓ(b)
    for i in 1..=la {
        acc = mul_tail(acc, g, c, m, i - a.part(i as usize) as i64 + lb, None, power, t)?;
    }
    for j in 1..=lb {
        acc = mul_tail(acc, g, c, m, j - b.part(j as usize) as i64 + la, None, power, t)?;
    }
    // generic quadrant: exponent s occurs s − ℓ(a) − ℓ(b) times
    acc = mul_tail(acc, g, c, m, la + lb + 1, Some(la + lb), power, t)?;
    Ok(acc)
}

/// `∏_{i,j≥1} (1 − c·m·q^{i+j−1−a_i−b_j})^{power}` known through `u^{trunc}`.
///
/// Fails when a factor with non-positive q-power has to be inverted and
/// `m` is not nilpotent in the grading.
pub fn pair_product(
    g: Grading,
    c: i64,
    m: Mono,
    a: &Partition,
    b: &Partition,
    power: i64,
    trunc: i64,
) -> Result<USeries> {
    if !g.admits(&m) && g.is_nilpotent(&m) {
        return Ok(USeries::one(g));
    }
    with_window(trunc, |t| raw(g, c, m, a, b, power, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;
    use crate::ring::Var;

    /// Direct product over i, j ≤ n.
    #[allow(clippy::too_many_arguments)]
    fn direct(g: Grading, c: i64, m: Mono, a: &Partition, b: &Partition, power: i64, n: i64, t: i64) -> USeries {
        let mut acc = USeries::one(g);
        for i in 1..=n {
            for j in 1..=n {
                let s = i + j - 1 - a.part(i as usize) as i64 - b.part(j as usize) as i64;
                let f = if power > 0 {
                    USeries::one_minus(g, c, m, 2 * s)
                } else {
                    USeries::geom_inverse(g, c, m, 2 * s, t + 40).unwrap()
                };
                acc = acc.mul(&f.pow(power.unsigned_abs() as u32)).truncate(t + 40);
            }
        }
        acc.truncate(t)
    }

    #[test]
    fn matches_direct_double_product() {
        let g = Grading::total(2);
        let q1 = Mono::var(Var::Q1);
        let t = 12;
        for a in enumerate_partitions(2) {
            for b in enumerate_partitions(2) {
                for &power in &[1, -1] {
                    for &c in &[1, -1] {
                        let got = pair_product(g, c, q1, &a, &b, power, t).unwrap();
                        let want = direct(g, c, q1, &a, &b, power, t / 2 + 8, t);
                        assert_eq!(got.agree(&want), Ok(t), "a={a} b={b} power={power} c={c}");
                    }
                }
            }
        }
    }

    #[test]
    fn empty_partitions_give_conifold_factor() {
        let g = Grading::total(3);
        let q1 = Mono::var(Var::Q1);
        let e = Partition::empty();
        let got = pair_product(g, 1, q1, &e, &e, -1, 6).unwrap();
        // 1/∏(1 − Q1 q^{i+j−1}): Q1 coefficient is Σ_{s≥1} s u^{2s}
        let c1: Vec<i64> = (0..=6).map(|k| got.coeff_owned(k).coeff(&q1).try_into().unwrap()).collect();
        assert_eq!(c1, vec![0, 0, 1, 0, 2, 0, 3]);
    }

    #[test]
    fn non_nilpotent_negative_power_is_rejected() {
        let g = Grading::total(2).with_weight(Var::P1, 0);
        let p1 = Mono::var(Var::P1);
        let a = Partition::from_slice(&[2]);
        assert!(pair_product(g, 1, p1, &a, &Partition::empty(), -1, 8).is_err());
        assert!(pair_product(g, 1, p1, &a, &Partition::empty(), 1, 8).is_ok());
    }
}
