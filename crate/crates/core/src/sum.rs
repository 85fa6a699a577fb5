//! Fixed-order accumulation shared by the operator and the analyses.

/// Above this length sums switch to Neumaier compensation.
pub(crate) const COMPENSATION_THRESHOLD: usize = 1 << 12;

/// Left-to-right sum; compensated when the input has more than
/// [`COMPENSATION_THRESHOLD`] terms.
pub(crate) fn ordered_sum<I>(terms: I, len: usize) -> f64
where
    I: IntoIterator<Item = f64>,
{
    if len <= COMPENSATION_THRESHOLD {
        return terms.into_iter().fold(0.0, |acc, t| acc + t);
    }
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}
