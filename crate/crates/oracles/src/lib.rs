//! Reference computations for the test suites.
//!
//! Everything here is written from the textbook formulas, on plain dense
//! inputs, without touching the production code paths: naive Bayes in exact
//! rational arithmetic, TF-IDF and the hinge objective as direct loops, and
//! classification metrics as exact ratios of counts. [`checks`] runs the
//! production code against these references.

pub mod checks;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `ln` of a positive big integer, accurate to a few ulps.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.is_positive(), "ln of non-positive integer");
    let bits = n.bits();
    let shift = bits.saturating_sub(60);
    let top = (n >> shift).to_f64().expect("60-bit integer fits f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln` of a positive rational.
pub fn ln_rational(r: &BigRational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Multinomial naive Bayes with additive smoothing, every probability kept
/// as an exact fraction.
#[derive(Debug, Clone)]
pub struct ExactMnb {
    pub prior: [BigRational; 2],
    /// `cond[c][t] = (N_tc + α) / (N_c + α·V)`.
    pub cond: [Vec<BigRational>; 2],
}

impl ExactMnb {
    /// `counts[d][t]` is the count of term `t` in document `d`; labels are 0/1.
    pub fn fit(counts: &[Vec<u32>], labels: &[u8], alpha: &BigRational) -> Self {
        assert_eq!(counts.len(), labels.len());
        let v = counts.first().map_or(0, Vec::len);
        let n = counts.len() as i64;
        let mut prior = [BigRational::zero(), BigRational::zero()];
        let mut cond = [Vec::new(), Vec::new()];
        for c in 0..2u8 {
            let docs: Vec<&Vec<u32>> = counts.iter().zip(labels).filter(|(_, &l)| l == c).map(|(d, _)| d).collect();
            prior[c as usize] = rational(docs.len() as i64, n);
            let per_term: Vec<i64> = (0..v).map(|t| docs.iter().map(|d| d[t] as i64).sum()).collect();
            let class_total: i64 = per_term.iter().sum();
            let den = BigRational::from_integer(class_total.into()) + alpha * BigRational::from_integer((v as i64).into());
            cond[c as usize] = per_term
                .iter()
                .map(|&ntc| (BigRational::from_integer(ntc.into()) + alpha) / &den)
                .collect();
        }
        ExactMnb { prior, cond }
    }

    /// Unreduced `(numerator, denominator)` of `P(c) · Π_t P(t|c)^{x_t}`.
    pub fn joint_parts(&self, x: &[u32]) -> [(BigInt, BigInt); 2] {
        [0, 1].map(|c| {
            let mut num = self.prior[c].numer().clone();
            let mut den = self.prior[c].denom().clone();
            for (t, &k) in x.iter().enumerate() {
                for _ in 0..k {
                    num *= self.cond[c][t].numer();
                    den *= self.cond[c][t].denom();
                }
            }
            (num, den)
        })
    }

    /// `P(c) · Π_t P(t|c)^{x_t}` for both classes.
    pub fn joint(&self, x: &[u32]) -> [BigRational; 2] {
        self.joint_parts(x).map(|(n, d)| BigRational::new(n, d))
    }

    pub fn log_joint(&self, x: &[u32]) -> [f64; 2] {
        self.joint_parts(x).map(|(n, d)| ln_bigint(&n) - ln_bigint(&d))
    }

    /// 1 iff the bullying joint is strictly larger; exact ties go to 0.
    pub fn predict(&self, x: &[u32]) -> u8 {
        let [(n0, d0), (n1, d1)] = self.joint_parts(x);
        u8::from(n1 * d0 > n0 * d1)
    }
}

/// Smoothed IDF `ln((1+n)/(1+df)) + 1` and the L2-normalized TF-IDF rows.
pub fn tfidf_reference(counts: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = counts.len() as f64;
    let v = counts.first().map_or(0, Vec::len);
    let mut idf = vec![0.0; v];
    for (t, w) in idf.iter_mut().enumerate() {
        let df = counts.iter().filter(|row| row[t] > 0.0).count() as f64;
        *w = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
    }
    let rows = counts
        .iter()
        .map(|row| {
            let raw: Vec<f64> = row.iter().zip(&idf).map(|(c, w)| c * w).collect();
            let mut sq = 0.0;
            for x in &raw {
                sq += x * x;
            }
            let norm = sq.sqrt();
            if norm == 0.0 {
                raw
            } else {
                raw.iter().map(|x| x / norm).collect()
            }
        })
        .collect();
    (idf, rows)
}

/// `(λ/2)‖w‖² + (1/n) Σ max(0, 1 − y(w·x + b))` with labels 0/1 mapped to ∓1.
pub fn hinge_objective(w: &[f64], b: f64, lambda: f64, x: &[Vec<f64>], y: &[u8]) -> f64 {
    let mut reg = 0.0;
    for wi in w {
        reg += wi * wi;
    }
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let s = if label == 1 { 1.0 } else { -1.0 };
        let mut f = b;
        for (wi, xi) in w.iter().zip(row) {
            f += wi * xi;
        }
        loss += (1.0 - s * f).max(0.0);
    }
    0.5 * lambda * reg + loss / x.len() as f64
}

/// Binary classification metrics as exact fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMetrics {
    pub accuracy: BigRational,
    pub error_rate: BigRational,
    pub precision: [BigRational; 2],
    pub recall: [BigRational; 2],
    pub f1: [BigRational; 2],
    pub support: [u64; 2],
    pub weighted_f1: BigRational,
}

fn safe_div(num: u64, den: u64) -> BigRational {
    if den == 0 {
        BigRational::zero()
    } else {
        rational(num as i64, den as i64)
    }
}

pub fn exact_metrics(y_true: &[u8], y_pred: &[u8]) -> ExactMetrics {
    assert_eq!(y_true.len(), y_pred.len());
    assert!(!y_true.is_empty());
    let total = y_true.len() as u64;
    let count = |t: u8, p: u8| y_true.iter().zip(y_pred).filter(|(&a, &b)| a == t && b == p).count() as u64;
    let cells = [[count(0, 0), count(0, 1)], [count(1, 0), count(1, 1)]];
    let correct = cells[0][0] + cells[1][1];
    let precision = [0, 1].map(|c| safe_div(cells[c][c], cells[0][c] + cells[1][c]));
    let recall = [0, 1].map(|c| safe_div(cells[c][c], cells[c][0] + cells[c][1]));
    let f1 = [0, 1].map(|c| {
        let sum = &precision[c] + &recall[c];
        if sum.is_zero() {
            BigRational::zero()
        } else {
            rational(2, 1) * &precision[c] * &recall[c] / sum
        }
    });
    let support = [cells[0][0] + cells[0][1], cells[1][0] + cells[1][1]];
    let weighted_f1 = (0..2)
        .map(|c| &f1[c] * rational(support[c] as i64, 1))
        .fold(BigRational::zero(), |a, b| a + b)
        / rational(total as i64, 1);
    ExactMetrics {
        accuracy: rational(correct as i64, total as i64),
        error_rate: BigRational::one() - rational(correct as i64, total as i64),
        precision,
        recall,
        f1,
        support,
        weighted_f1,
    }
}

/// Nearest double to an exact fraction.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}
