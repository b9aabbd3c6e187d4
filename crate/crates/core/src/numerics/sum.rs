/// Pairwise (tree) summation in a fixed order.
///
/// The split points depend only on the slice length, so identical input
/// order gives a bit-identical result no matter how the values were produced.
pub fn stable_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    stable_sum(&values[..mid]) + stable_sum(&values[mid..])
}

/// Kahan-compensated running sum.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
