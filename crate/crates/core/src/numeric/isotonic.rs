//! Pool-adjacent-violators isotonic regression.

use alloc::vec::Vec;

/// Weighted least-squares projection of `y` onto non-decreasing sequences.
pub fn isotonic_increasing(y: &[f64], w: Option<&[f64]>) -> Vec<f64> {
    // Blocks as (weighted mean, total weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        let wi = w.map_or(1.0, |w| w[i]);
        blocks.push((v, wi, 1));
        while blocks.len() >= 2 {
            let n = blocks.len();
            if blocks[n - 2].0 <= blocks[n - 1].0 {
                break;
            }
            let (m2, w2, l2) = blocks.pop().unwrap();
            let (m1, w1, l1) = blocks.pop().unwrap();
            let wt = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / wt, wt, l1 + l2));
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, _, len) in blocks {
        out.extend(core::iter::repeat_n(m, len));
    }
    out
}

pub fn isotonic_decreasing(y: &[f64], w: Option<&[f64]>) -> Vec<f64> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    isotonic_increasing(&neg, w).into_iter().map(|v| -v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_a_single_violation() {
        let fit = isotonic_increasing(&[1.0, 3.0, 2.0, 4.0], None);
        assert_eq!(fit, alloc::vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn monotone_input_is_fixed_point() {
        let y = [0.0, 0.5, 0.5, 2.0];
        assert_eq!(isotonic_increasing(&y, None), y.to_vec());
        let d = [3.0, 1.0, -1.0];
        assert_eq!(isotonic_decreasing(&d, None), d.to_vec());
    }

    #[test]
    fn respects_weights() {
        let fit = isotonic_increasing(&[2.0, 0.0], Some(&[3.0, 1.0]));
        assert!((fit[0] - 1.5).abs() < 1e-15 && (fit[1] - 1.5).abs() < 1e-15);
    }
}
