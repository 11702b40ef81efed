//! Distribution and moments of the dividend process `d_j`.
//!
//! The moment functions accept any [`GrowthDistribution`]: with i.i.d.
//! growth they depend on the law only through `m = 1 + E[g]` and
//! `M2 = E[(1 + g)^2]`.
//!
//! The probability functions need exactly two outcomes. The larger rate is
//! the up-move `g1` and the smaller the down-move `g2`, regardless of input
//! order. `s` counts up-moves in the first `j` periods; `r` is the same
//! count over `p >= j` periods.
//! The conditional law of `r` given `s` is binomial on the remaining
//! `p - j` periods and is zero outside the band `s <= r <= s + p - j`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::growth::GrowthDistribution;

/// Default largest period accepted by [`enumerate_joint_table`].
pub const DEFAULT_ENUMERATION_CAP: u32 = 20;

/// Two-outcome view of a growth distribution, up-move first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialGrowth {
    pub g1: f64,
    pub q1: f64,
    pub g2: f64,
    pub q2: f64,
}

impl BinomialGrowth {
    pub fn from_distribution(g: &GrowthDistribution) -> Result<Self> {
        match g.outcomes() {
            [a, b] => {
                let (up, down) = if a.rate >= b.rate { (a, b) } else { (b, a) };
                Ok(BinomialGrowth {
                    g1: up.rate,
                    q1: up.probability,
                    g2: down.rate,
                    q2: down.probability,
                })
            }
            other => Err(ModelError::NotTwoOutcome {
                outcomes: other.len(),
            }),
        }
    }

    fn mean_factor(&self) -> f64 {
        (1.0 + self.g1) * self.q1 + (1.0 + self.g2) * self.q2
    }
}

/// `C(n, k)` by the multiplicative recurrence. Exact for small arguments
/// and finite for `n` up to about 1029.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| {
        let (num, den) = (f64::from(n - k + i), f64::from(i));
        // multiply first while that is exact, divide first near overflow
        if acc < 1e300 {
            acc * num / den
        } else {
            acc * (num / den)
        }
    })
}

fn check_up_moves(period: u32, up_moves: u32) -> Result<()> {
    if up_moves > period {
        return Err(ModelError::IndexOutOfRange { period, up_moves });
    }
    Ok(())
}

fn check_order(j: u32, p: u32) -> Result<()> {
    if j > p {
        return Err(ModelError::BadIndexOrder { j, p });
    }
    Ok(())
}

fn powi(base: f64, exp: u32) -> f64 {
    // exponents here are bounded well below i32::MAX
    base.powi(exp as i32)
}

/// Dividend level after `s` draws of `g1` and `j - s` draws of `g2`.
pub fn dividend_value(d0: f64, g: &GrowthDistribution, j: u32, s: u32) -> Result<f64> {
    let b = BinomialGrowth::from_distribution(g)?;
    check_up_moves(j, s)?;
    Ok(d0 * powi(1.0 + b.g1, s) * powi(1.0 + b.g2, j - s))
}

/// `P[s up-moves in j periods] = C(j, s) q1^s q2^(j-s)`.
pub fn marginal_probability(g: &GrowthDistribution, j: u32, s: u32) -> Result<f64> {
    let b = BinomialGrowth::from_distribution(g)?;
    check_up_moves(j, s)?;
    Ok(binomial(j, s) * powi(b.q1, s) * powi(b.q2, j - s))
}

/// `P[r up-moves by p | s up-moves by j]` for `j <= p`.
pub fn conditional_probability(
    g: &GrowthDistribution,
    j: u32,
    s: u32,
    p: u32,
    r: u32,
) -> Result<f64> {
    let b = BinomialGrowth::from_distribution(g)?;
    check_order(j, p)?;
    check_up_moves(j, s)?;
    check_up_moves(p, r)?;
    let window = p - j;
    if r < s || r > s + window {
        return Ok(0.0);
    }
    let extra = r - s;
    Ok(binomial(window, extra) * powi(b.q1, extra) * powi(b.q2, window - extra))
}

/// Joint probability of `s` up-moves by `j` and `r` by `p`, as the product
/// of the marginal at `j` and the conditional law.
pub fn joint_probability(
    g: &GrowthDistribution,
    j: u32,
    s: u32,
    p: u32,
    r: u32,
) -> Result<f64> {
    let conditional = conditional_probability(g, j, s, p, r)?;
    if conditional == 0.0 {
        return Ok(0.0);
    }
    Ok(marginal_probability(g, j, s)? * conditional)
}

/// `E[d_j] = d0 (1 + E[g])^j`.
pub fn expected_dividend(d0: f64, g: &GrowthDistribution, j: u32) -> f64 {
    d0 * powi(g.mean_factor(), j)
}

/// `E[d_j d_p] = d0^2 (1 + E[g])^(p-j) E[(1 + g)^2]^j` for `j <= p`.
pub fn dividend_cross_moment(d0: f64, g: &GrowthDistribution, j: u32, p: u32) -> Result<f64> {
    check_order(j, p)?;
    Ok(d0 * d0 * powi(g.mean_factor(), p - j) * powi(g.second_moment_factor(), j))
}

/// `Var(d_j) = d0^2 (E[(1 + g)^2]^j - (1 + E[g])^(2j))`.
///
/// Evaluated as `d0^2 m^(2j) ((1 + Var[g]/m^2)^j - 1)` through `ln_1p` and
/// `exp_m1`, which avoids the cancellation in the difference of powers and
/// is exactly zero for a deterministic growth rate.
pub fn dividend_variance(d0: f64, g: &GrowthDistribution, j: u32) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let m = g.mean_factor();
    let relative = g.variance() / (m * m);
    let excess = (f64::from(j) * relative.ln_1p()).exp_m1();
    d0 * d0 * powi(m, 2 * j) * excess
}

/// `cov(d_j, d_p) = (1 + E[g])^(p-j) Var(d_j)` for `j <= p`.
pub fn dividend_covariance(d0: f64, g: &GrowthDistribution, j: u32, p: u32) -> Result<f64> {
    check_order(j, p)?;
    Ok(powi(g.mean_factor(), p - j) * dividend_variance(d0, g, j))
}

/// Both sides of the inner-sum identity
///
/// ```text
/// sum_{r=s}^{s+p-j} (1+g1)^r (1+g2)^(p-r) C(p-j, r-s) q1^(r-s) q2^(p-j-(r-s))
///   = (1+g1)^s (1+g2)^(j-s) (1 + E[g])^(p-j)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMomentSum {
    pub direct: f64,
    pub closed: f64,
}

pub fn conditional_moment_sum(
    g: &GrowthDistribution,
    j: u32,
    s: u32,
    p: u32,
) -> Result<ConditionalMomentSum> {
    let b = BinomialGrowth::from_distribution(g)?;
    check_order(j, p)?;
    check_up_moves(j, s)?;
    let window = p - j;
    let direct = (s..=s + window)
        .map(|r| {
            let extra = r - s;
            powi(1.0 + b.g1, r)
                * powi(1.0 + b.g2, p - r)
                * binomial(window, extra)
                * powi(b.q1, extra)
                * powi(b.q2, window - extra)
        })
        .sum();
    let closed = powi(1.0 + b.g1, s) * powi(1.0 + b.g2, j - s) * powi(b.mean_factor(), window);
    Ok(ConditionalMomentSum { direct, closed })
}

/// One cell of a [`JointDividendTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointEntry {
    /// Up-moves by period `j`.
    pub s: u32,
    /// Up-moves by period `p`.
    pub r: u32,
    pub probability: f64,
    pub dividend_j: f64,
    pub dividend_p: f64,
}

/// Exact joint law of `(d_j, d_p)` over every `(s, r)` pair, including the
/// structurally zero cells outside the support band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDividendTable {
    pub j: u32,
    pub p: u32,
    /// Row-major in `s`, then `r`.
    pub entries: Vec<JointEntry>,
}

/// Builds the joint table by counting paths: `C(j, s) C(p - j, r - s)`
/// orderings reach `(s, r)`, each with probability `q1^r q2^(p - r)`.
pub fn enumerate_joint_table(
    d0: f64,
    g: &GrowthDistribution,
    j: u32,
    p: u32,
    cap: u32,
) -> Result<JointDividendTable> {
    let b = BinomialGrowth::from_distribution(g)?;
    check_order(j, p)?;
    if p > cap {
        return Err(ModelError::HorizonTooLargeForEnumeration { p, cap });
    }
    let window = p - j;
    let mut entries = Vec::with_capacity(((j + 1) * (p + 1)) as usize);
    for s in 0..=j {
        let dividend_j = d0 * powi(1.0 + b.g1, s) * powi(1.0 + b.g2, j - s);
        for r in 0..=p {
            let probability = if r >= s && r - s <= window {
                let paths = binomial(j, s) * binomial(window, r - s);
                paths * powi(b.q1, r) * powi(b.q2, p - r)
            } else {
                0.0
            };
            entries.push(JointEntry {
                s,
                r,
                probability,
                dividend_j,
                dividend_p: d0 * powi(1.0 + b.g1, r) * powi(1.0 + b.g2, p - r),
            });
        }
    }
    Ok(JointDividendTable { j, p, entries })
}

impl JointDividendTable {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// Marginal law of `s`, indexed by `s`.
    pub fn marginal_j(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.j as usize + 1];
        for e in &self.entries {
            out[e.s as usize] += e.probability;
        }
        out
    }

    /// Marginal law of `r`, indexed by `r`.
    pub fn marginal_p(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p as usize + 1];
        for e in &self.entries {
            out[e.r as usize] += e.probability;
        }
        out
    }

    /// True iff exactly the cells with `s <= r <= s + p - j` carry mass.
    pub fn respects_support_band(&self) -> bool {
        let window = self.p - self.j;
        self.entries.iter().all(|e| {
            let inside = e.r >= e.s && e.r - e.s <= window;
            inside == (e.probability > 0.0)
        })
    }

    pub fn mean_j(&self) -> f64 {
        self.entries.iter().map(|e| e.probability * e.dividend_j).sum()
    }

    pub fn mean_p(&self) -> f64 {
        self.entries.iter().map(|e| e.probability * e.dividend_p).sum()
    }

    pub fn cross_moment(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.probability * e.dividend_j * e.dividend_p)
            .sum()
    }

    pub fn variance_j(&self) -> f64 {
        let mean = self.mean_j();
        self.entries
            .iter()
            .map(|e| e.probability * (e.dividend_j - mean).powi(2))
            .sum()
    }

    pub fn covariance(&self) -> f64 {
        let (mj, mp) = (self.mean_j(), self.mean_p());
        self.entries
            .iter()
            .map(|e| e.probability * (e.dividend_j - mj) * (e.dividend_p - mp))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> GrowthDistribution {
        GrowthDistribution::validate([(-0.02, 0.5), (0.04, 0.5)]).unwrap()
    }

    fn g2() -> GrowthDistribution {
        GrowthDistribution::validate([(-0.08, 0.5), (0.10, 0.5)]).unwrap()
    }

    fn q03() -> GrowthDistribution {
        GrowthDistribution::validate([(0.05, 0.3), (-0.01, 0.7)]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(30, 15), 155_117_520.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert!(binomial(1029, 514).is_finite());
    }

    #[test]
    fn dividend_values() {
        assert!((dividend_value(2.0, &g2(), 1, 1).unwrap() - 2.2).abs() < 1e-15);
        assert_eq!(dividend_value(3.5, &g1(), 0, 0).unwrap(), 3.5);
        assert!((dividend_value(2.0, &g1(), 2, 1).unwrap() - 2.0384).abs() < 1e-15);
        assert!(matches!(
            dividend_value(2.0, &g1(), 2, 3),
            Err(ModelError::IndexOutOfRange { .. })
        ));
        let three = GrowthDistribution::validate([(0.0, 0.2), (0.01, 0.3), (0.02, 0.5)]).unwrap();
        assert!(matches!(
            dividend_value(2.0, &three, 1, 0),
            Err(ModelError::NotTwoOutcome { outcomes: 3 })
        ));
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(marginal_probability(&g1(), 2, 1).unwrap(), 0.5);
        assert_eq!(marginal_probability(&g1(), 0, 0).unwrap(), 1.0);
        assert!((marginal_probability(&q03(), 3, 2).unwrap() - 0.189).abs() < 1e-15);
    }

    #[test]
    fn conditional_examples() {
        assert_eq!(conditional_probability(&q03(), 2, 1, 3, 0).unwrap(), 0.0);
        assert_eq!(conditional_probability(&g1(), 1, 1, 2, 2).unwrap(), 0.5);
        assert!((conditional_probability(&q03(), 1, 0, 4, 2).unwrap() - 0.189).abs() < 1e-15);
        assert!(matches!(
            conditional_probability(&g1(), 3, 1, 2, 1),
            Err(ModelError::BadIndexOrder { j: 3, p: 2 })
        ));
    }

    #[test]
    fn joint_examples() {
        assert_eq!(joint_probability(&g1(), 1, 1, 2, 2).unwrap(), 0.25);
        assert_eq!(joint_probability(&g1(), 1, 0, 2, 2).unwrap(), 0.0);
        let total: f64 = (0..=3)
            .flat_map(|s| (0..=5).map(move |r| (s, r)))
            .map(|(s, r)| joint_probability(&q03(), 3, s, 5, r).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginals_normalize() {
        for g in [g1(), q03()] {
            for j in 0..=30 {
                let total: f64 = (0..=j).map(|s| marginal_probability(&g, j, s).unwrap()).sum();
                assert!((total - 1.0).abs() < 1e-12, "j = {j}: {total}");
            }
        }
    }

    #[test]
    fn tower_consistency_and_support_band() {
        let g = q03();
        for p in 0..=12 {
            for j in 0..=p {
                for s in 0..=j {
                    let over_r: f64 = (0..=p).map(|r| joint_probability(&g, j, s, p, r).unwrap()).sum();
                    let marginal = marginal_probability(&g, j, s).unwrap();
                    assert!((over_r - marginal).abs() < 1e-12);
                }
                for r in 0..=p {
                    let over_s: f64 = (0..=j).map(|s| joint_probability(&g, j, s, p, r).unwrap()).sum();
                    let marginal = marginal_probability(&g, p, r).unwrap();
                    assert!((over_s - marginal).abs() < 1e-12);
                    for s in 0..=j {
                        let positive = joint_probability(&g, j, s, p, r).unwrap() > 0.0;
                        assert_eq!(positive, s <= r && r <= s + p - j);
                    }
                }
            }
        }
    }

    #[test]
    fn expected_dividend_examples() {
        assert_eq!(expected_dividend(2.0, &g1(), 0), 2.0);
        assert!((expected_dividend(2.0, &g1(), 1) - (1.96 + 2.08) / 2.0).abs() < 1e-15);
        // enumerate the 2^10 paths by up-count
        let b = BinomialGrowth::from_distribution(&g2()).unwrap();
        let enumerated: f64 = (0..=10)
            .map(|s| {
                binomial(10, s) * 0.5f64.powi(10) * 2.0 * (1.0 + b.g1).powi(s as i32)
                    * (1.0 + b.g2).powi(10 - s as i32)
            })
            .sum();
        let closed = expected_dividend(2.0, &g2(), 10);
        assert!(rel(closed, 2.0 * 1.01f64.powi(10)) < 1e-14);
        assert!(rel(closed, enumerated) < 1e-14);
    }

    #[test]
    fn cross_moment_examples() {
        assert!(rel(dividend_cross_moment(2.0, &g1(), 1, 1).unwrap(), 4.084) < 1e-14);
        for p in 0..6 {
            let cm = dividend_cross_moment(2.0, &g2(), 0, p).unwrap();
            assert!(rel(cm, 2.0 * expected_dividend(2.0, &g2(), p)) < 1e-14);
        }
        let table = enumerate_joint_table(2.0, &g2(), 2, 5, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(rel(dividend_cross_moment(2.0, &g2(), 2, 5).unwrap(), table.cross_moment()) < 1e-12);
        assert!(dividend_cross_moment(2.0, &g2(), 5, 2).is_err());
    }

    #[test]
    fn variance_examples() {
        // outcomes 1.84 and 2.2 with probability 1/2 each
        let var = ((1.84 - 2.02f64).powi(2) + (2.2 - 2.02f64).powi(2)) / 2.0;
        assert!(rel(dividend_variance(2.0, &g2(), 1), var) < 1e-12);
        assert!(rel(dividend_variance(2.0, &g2(), 1), 0.0324) < 1e-12);
        assert_eq!(dividend_variance(2.0, &g2(), 0), 0.0);
        let flat = GrowthDistribution::degenerate(0.01).unwrap();
        assert_eq!(dividend_variance(2.0, &flat, 7), 0.0);
    }

    #[test]
    fn variance_matches_difference_of_powers() {
        let g = g2();
        for j in 1..40 {
            let naive = 4.0
                * (g.second_moment_factor().powi(j as i32) - g.mean_factor().powi(2 * j as i32));
            assert!(rel(dividend_variance(2.0, &g, j), naive) < 1e-10);
        }
    }

    #[test]
    fn covariance_examples() {
        for j in 0..5 {
            assert_eq!(
                dividend_covariance(2.0, &g1(), j, j).unwrap(),
                dividend_variance(2.0, &g1(), j)
            );
        }
        let cov = dividend_covariance(2.0, &g1(), 1, 3).unwrap();
        assert!(rel(cov, 1.01f64.powi(2) * dividend_variance(2.0, &g1(), 1)) < 1e-14);
        let table = enumerate_joint_table(2.0, &g1(), 1, 3, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(rel(cov, table.covariance()) < 1e-10);

        let early = dividend_covariance(2.0, &g2(), 2, 3).unwrap();
        let late = dividend_covariance(2.0, &g2(), 3, 4).unwrap();
        assert!((early - late).abs() > 1e-12);
    }

    #[test]
    fn joint_table_examples() {
        let t = enumerate_joint_table(2.0, &g1(), 1, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(t.entries.len(), 6);
        assert_eq!(t.entries.iter().filter(|e| e.probability == 0.0).count(), 2);
        assert!((t.total_probability() - 1.0).abs() < 1e-12);
        assert!(t.respects_support_band());

        let t = enumerate_joint_table(3.0, &g1(), 0, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].probability, 1.0);

        let t = enumerate_joint_table(2.0, &g2(), 3, 6, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(rel(t.cross_moment(), dividend_cross_moment(2.0, &g2(), 3, 6).unwrap()) < 1e-12);

        assert!(matches!(
            enumerate_joint_table(2.0, &g1(), 3, 21, DEFAULT_ENUMERATION_CAP),
            Err(ModelError::HorizonTooLargeForEnumeration { p: 21, cap: 20 })
        ));
        assert!(enumerate_joint_table(2.0, &g1(), 100, 300, 300).is_ok());
    }

    #[test]
    fn conditional_moment_sum_examples() {
        let c = conditional_moment_sum(&g1(), 2, 1, 2).unwrap();
        assert!(rel(c.direct, 0.98 * 1.04) < 1e-15);
        assert!(rel(c.closed, 0.98 * 1.04) < 1e-15);
        let c = conditional_moment_sum(&g2(), 1, 0, 4).unwrap();
        assert!(rel(c.direct, c.closed) < 1e-12);
        let c = conditional_moment_sum(&g1(), 3, 3, 7).unwrap();
        assert!(rel(c.direct, c.closed) < 1e-12);
    }
}
