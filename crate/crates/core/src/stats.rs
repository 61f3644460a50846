//! Mann-Whitney U test, percent agreement and descriptive aggregates.

use std::io::Read;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// How the two-sided p-value is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PMethod {
    /// Normal approximation with tie-corrected variance.
    Asymptotic,
    /// Exact null distribution of U; only valid without ties.
    Exact,
    /// Exact when both samples have at most [`EXACT_MAX_N`] values and
    /// there are no ties, asymptotic otherwise.
    Auto,
}

pub const EXACT_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UTestOptions {
    pub continuity: bool,
    pub method: PMethod,
}

impl Default for UTestOptions {
    fn default() -> Self {
        Self {
            continuity: true,
            method: PMethod::Asymptotic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UTestResult {
    /// U of the first sample: pairs (a, b) with a > b, ties counting one half.
    pub u1: f64,
    pub u2: f64,
    /// Normal score of `u1`, after continuity correction when applied.
    pub z: f64,
    pub p_two_sided: f64,
    pub n1: usize,
    pub n2: usize,
    /// Number of distinct values shared by more than one observation.
    pub tie_groups: usize,
    pub continuity_applied: bool,
    /// Method actually used for `p_two_sided`.
    pub method: PMethod,
}

struct Ranking {
    rank_sum_first: f64,
    tie_term: f64,
    tie_groups: usize,
}

fn rank(x: &[f64], y: &[f64]) -> Ranking {
    let mut pooled: Vec<(f64, bool)> = x
        .iter()
        .map(|&v| (v, true))
        .chain(y.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_first = 0.0;
    let mut tie_term = 0.0;
    let mut tie_groups = 0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        // ranks i+1 ..= j share their average
        let mid = (i + 1 + j) as f64 / 2.0;
        rank_sum_first += mid * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        if j - i > 1 {
            tie_groups += 1;
            tie_term += t * t * t - t;
        }
        i = j;
    }
    Ranking {
        rank_sum_first,
        tie_term,
        tie_groups,
    }
}

/// Two-sided Mann-Whitney U test with the normal approximation.
///
/// Tied values receive average ranks and the variance carries the usual tie
/// correction. `continuity` shifts |U1 - mean| towards zero by one half.
pub fn mann_whitney_u(x: &[f64], y: &[f64], continuity: bool) -> Result<UTestResult> {
    mann_whitney_u_with(
        x,
        y,
        UTestOptions {
            continuity,
            method: PMethod::Asymptotic,
        },
    )
}

pub fn mann_whitney_u_with(x: &[f64], y: &[f64], opts: UTestOptions) -> Result<UTestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidConfig("sample contains NaN".into()));
    }
    let (n1, n2) = (x.len(), y.len());
    let (f1, f2) = (n1 as f64, n2 as f64);
    let r = rank(x, y);
    let u1 = r.rank_sum_first - f1 * (f1 + 1.0) / 2.0;
    let u2 = f1 * f2 - u1;

    let n = f1 + f2;
    let mean = f1 * f2 / 2.0;
    let var = f1 * f2 / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)).max(1.0));
    let sd = var.max(0.0).sqrt();
    let mut diff = u1 - mean;
    if opts.continuity {
        diff = diff.signum() * (diff.abs() - 0.5).max(0.0);
    }
    let z = if sd > 0.0 { diff / sd } else { 0.0 };

    let method = match opts.method {
        PMethod::Auto if n1 <= EXACT_MAX_N && n2 <= EXACT_MAX_N && r.tie_groups == 0 => {
            PMethod::Exact
        }
        PMethod::Auto => PMethod::Asymptotic,
        PMethod::Exact if r.tie_groups > 0 => {
            return Err(Error::InvalidConfig(
                "exact p-value requires samples without ties".into(),
            ))
        }
        m => m,
    };
    let p_two_sided = match method {
        PMethod::Exact => exact_p_two_sided(u1, n1, n2),
        _ => {
            let normal = Normal::standard();
            (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0)
        }
    };
    Ok(UTestResult {
        u1,
        u2,
        z,
        p_two_sided,
        n1,
        n2,
        tie_groups: r.tie_groups,
        continuity_applied: opts.continuity && method == PMethod::Asymptotic,
        method,
    })
}

/// Null distribution of U for sample sizes (m, n): entry u holds the number
/// of rank arrangements giving U = u.
fn u_distribution(m: usize, n: usize) -> Vec<f64> {
    // counts[j] holds the distribution for (i, j) while sweeping i upwards
    let max_u = m * n;
    let mut prev: Vec<Vec<f64>> = (0..=n)
        .map(|_| {
            let mut v = vec![0.0; max_u + 1];
            v[0] = 1.0;
            v
        })
        .collect();
    for _i in 1..=m {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max_u + 1]; n + 1];
        cur[0][0] = 1.0;
        for j in 1..=n {
            for u in 0..=max_u {
                // largest observation from the first sample beats all j of the second
                let from_first = if u >= j { prev[j][u - j] } else { 0.0 };
                cur[j][u] = from_first + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev.swap_remove(n)
}

fn exact_p_two_sided(u1: f64, n1: usize, n2: usize) -> f64 {
    let dist = u_distribution(n1, n2);
    let total: f64 = dist.iter().sum();
    let u = u1.round() as usize;
    let lower: f64 = dist[..=u].iter().sum::<f64>() / total;
    let upper: f64 = dist[u..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Raters in rows, samples in columns, 1 for a true-positive answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementTable {
    pub raters: Vec<String>,
    pub samples: Vec<String>,
    pub cells: Vec<Vec<u8>>,
}

impl AgreementTable {
    pub fn new(raters: Vec<String>, samples: Vec<String>, cells: Vec<Vec<u8>>) -> Result<Self> {
        if cells.is_empty() || samples.is_empty() {
            return Err(Error::EmptyTable);
        }
        if raters.len() != cells.len() {
            return Err(Error::DimensionMismatch {
                expected: cells.len(),
                found: raters.len(),
            });
        }
        for row in &cells {
            if row.len() != samples.len() {
                return Err(Error::DimensionMismatch {
                    expected: samples.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|&c| c > 1) {
                return Err(Error::InvalidConfig(
                    "agreement cells must be 0 or 1".into(),
                ));
            }
        }
        Ok(Self {
            raters,
            samples,
            cells,
        })
    }

    /// Reads a CSV whose header is `rater,<sample>...` and whose rows hold
    /// a rater id followed by 0/1 cells.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?;
        let samples: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut raters = Vec::new();
        let mut cells = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                reason: e.to_string(),
            })?;
            raters.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|c| match c {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Parse {
                        line,
                        reason: format!("expected 0 or 1, found {other:?}"),
                    }),
                })
                .collect::<Result<Vec<u8>>>()?;
            cells.push(row);
        }
        Self::new(raters, samples, cells)
    }

    pub fn percent(&self) -> Vec<f64> {
        percent_agreement(&self.cells).expect("validated on construction")
    }
}

/// Percentage of ones in each column.
pub fn percent_agreement(table: &[Vec<u8>]) -> Result<Vec<f64>> {
    let Some(first) = table.first() else {
        return Err(Error::EmptyTable);
    };
    if first.is_empty() {
        return Err(Error::EmptyTable);
    }
    let cols = first.len();
    let mut ones = vec![0usize; cols];
    for row in table {
        if row.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: row.len(),
            });
        }
        for (acc, &c) in ones.iter_mut().zip(row) {
            if c > 1 {
                return Err(Error::InvalidConfig(
                    "agreement cells must be 0 or 1".into(),
                ));
            }
            *acc += c as usize;
        }
    }
    let n = table.len() as f64;
    Ok(ones.into_iter().map(|k| 100.0 * k as f64 / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Description {
    pub n: usize,
    pub sum: f64,
    pub mean: f64,
    pub median: f64,
    #[serde(skip)]
    sorted: Vec<f64>,
}

impl Description {
    /// Number of entries exactly equal to `value`.
    pub fn count_of(&self, value: f64) -> usize {
        self.sorted.iter().filter(|&&v| v == value).count()
    }
}

/// Compensated (Neumaier) sum.
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn describe(scores: &[f64]) -> Result<Description> {
    if scores.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n.is_multiple_of(2) {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    } else {
        sorted[n / 2]
    };
    let sum = exact_sum(scores);
    Ok(Description {
        n,
        sum,
        mean: sum / n as f64,
        median,
        sorted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn separated_samples() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], true).unwrap();
        assert_eq!((r.u1, r.u2), (0.0, 4.0));
        assert_eq!(r.tie_groups, 0);
    }

    #[test]
    fn identical_samples() {
        let x = [0.5, 0.9, 0.9, 1.0];
        let r = mann_whitney_u(&x, &x, true).unwrap();
        assert_eq!(r.u1, 8.0);
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);

        let flat = [1.0; 5];
        let r = mann_whitney_u(&flat, &flat, false).unwrap();
        assert_eq!(r.u1, 12.5);
        assert_eq!(r.p_two_sided, 1.0);
        assert_eq!(r.tie_groups, 1);
    }

    #[test]
    fn empty_sample() {
        assert!(matches!(
            mann_whitney_u(&[], &[1.0], true),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn exact_distribution_small() {
        // m = n = 2: U in {0,1,2,2,3,4} over the 6 arrangements
        assert_eq!(u_distribution(2, 2), [1.0, 1.0, 2.0, 1.0, 1.0]);
        assert_eq!(u_distribution(1, 3), [1.0, 1.0, 1.0, 1.0]);
        let r = mann_whitney_u_with(
            &[1.0, 2.0],
            &[3.0, 4.0],
            UTestOptions {
                continuity: false,
                method: PMethod::Auto,
            },
        )
        .unwrap();
        assert_eq!(r.method, PMethod::Exact);
        assert!((r.p_two_sided - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exact_rejects_ties() {
        let opts = UTestOptions {
            continuity: false,
            method: PMethod::Exact,
        };
        assert!(mann_whitney_u_with(&[1.0, 2.0], &[2.0, 3.0], opts).is_err());
    }

    #[test]
    fn agreement() {
        let rock = [1, 0, 1, 1, 0, 1, 1, 0, 0, 0];
        let table: Vec<Vec<u8>> = rock.iter().map(|&v| vec![v, 1]).collect();
        assert_eq!(percent_agreement(&table).unwrap(), [50.0, 100.0]);
        assert!(matches!(percent_agreement(&[]), Err(Error::EmptyTable)));
        assert!(percent_agreement(&[vec![2]]).is_err());
    }

    #[test]
    fn agreement_csv() {
        let text = "rater,a,b\n1,1,0\n2,1,1\n";
        let t = AgreementTable::from_csv(text.as_bytes()).unwrap();
        assert_eq!(t.samples, ["a", "b"]);
        assert_eq!(t.percent(), [100.0, 50.0]);
        assert!(matches!(
            AgreementTable::from_csv("rater,a\n1,x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn descriptives() {
        let d = describe(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((d.mean, d.median, d.sum), (1.0, 1.0, 3.0));
        assert_eq!(d.count_of(1.0), 3);
        let d = describe(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(d.median, 2.5);
        assert!(matches!(describe(&[]), Err(Error::EmptySample)));
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        // coarse grid so ties are common
        prop::collection::vec((0u8..20).prop_map(|v| v as f64 / 4.0), 1..30)
    }

    proptest! {
        #[test]
        fn u_statistics_partition_pairs(x in sample(), y in sample()) {
            let r = mann_whitney_u(&x, &y, true).unwrap();
            prop_assert_eq!(r.u1 + r.u2, (x.len() * y.len()) as f64);
            prop_assert!((0.0..=1.0).contains(&r.p_two_sided));
        }

        #[test]
        fn swap_symmetry(x in sample(), y in sample(), cc: bool) {
            let a = mann_whitney_u(&x, &y, cc).unwrap();
            let b = mann_whitney_u(&y, &x, cc).unwrap();
            prop_assert_eq!(a.u1, b.u2);
            prop_assert!((a.p_two_sided - b.p_two_sided).abs() < 1e-12);
        }

        #[test]
        fn agreement_ignores_row_order(rows in prop::collection::vec(prop::collection::vec(0u8..2, 4), 1..12)) {
            let mut rev = rows.clone();
            rev.reverse();
            prop_assert_eq!(percent_agreement(&rows).unwrap(), percent_agreement(&rev).unwrap());
        }
    }
}
