use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    /// `n x c`: attention-weighted values.
    pub output: Matrix,
    /// `n x m`: row-stochastic attention map.
    pub attention: Matrix,
}

/// `softmax(scale * Q K^T) V` with a max-subtracted row softmax.
///
/// `scale = None` uses `1 / sqrt(d)`; pass `Some(1.0)` for the unscaled form.
pub fn cross_attention(q: &Matrix, k: &Matrix, v: &Matrix, scale: Option<f64>) -> Result<AttentionOutput> {
    if q.cols() != k.cols() {
        return Err(Error::shape(format!(
            "query dim {} vs key dim {}",
            q.cols(),
            k.cols()
        )));
    }
    if k.rows() != v.rows() {
        return Err(Error::shape(format!(
            "{} keys vs {} values",
            k.rows(),
            v.rows()
        )));
    }
    if k.rows() == 0 {
        return Err(Error::shape("attention needs at least one key".to_string()));
    }
    let scale = scale.unwrap_or_else(|| 1.0 / (q.cols().max(1) as f64).sqrt());
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidValue(format!("scale must be positive, got {scale}")));
    }
    let logits = q.matmul(&k.transpose())?;
    let m = k.rows();
    let mut a = Vec::with_capacity(q.rows() * m);
    for r in 0..q.rows() {
        let row = logits.row(r);
        let max = row.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        let exps: Vec<f64> = row.iter().map(|&l| (scale * (l - max)).exp()).collect();
        let sum = ordered_sum(exps.clone());
        a.extend(exps.iter().map(|e| e / sum));
    }
    let attention = Matrix::new(q.rows(), m, a)?;
    let mut out = Vec::with_capacity(q.rows() * v.cols());
    for r in 0..q.rows() {
        let weights = attention.row(r);
        for c in 0..v.cols() {
            out.push(ordered_sum((0..m).map(|j| weights[j] * v.get(j, c)).collect()));
        }
    }
    let output = Matrix::new(q.rows(), v.cols(), out)?;
    Ok(AttentionOutput { output, attention })
}

/// Sums in ascending order so the result does not depend on key order.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Sums the attention columns selected by `keep` and lays the per-query
/// totals out as an `h x w` map (queries in row-major spatial order).
pub fn attention_map(a: &Matrix, keep: impl Fn(usize) -> bool, h: usize, w: usize) -> Result<Matrix> {
    if a.rows() != h * w {
        return Err(Error::shape(format!(
            "{} queries cannot form a {h}x{w} map",
            a.rows()
        )));
    }
    let cols: Vec<usize> = (0..a.cols()).filter(|&c| keep(c)).collect();
    Ok(Matrix::from_fn(h, w, |r, c| {
        let row = a.row(r * w + c);
        cols.iter().map(|&j| row[j]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_key_softmax() {
        let out = cross_attention(&m(&[&[1.0, 0.0]]), &m(&[&[1.0, 0.0], &[0.0, 1.0]]), &m(&[&[1.0, 0.0], &[0.0, 1.0]]), Some(1.0))
            .unwrap();
        // e / (e + 1) and 1 / (e + 1)
        let p = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((out.attention.get(0, 0) - p).abs() < 1e-12);
        assert!((out.attention.get(0, 1) - (1.0 - p)).abs() < 1e-12);
        assert!((out.output.get(0, 0) - 0.7311).abs() < 1e-4);
        assert!((out.output.get(0, 1) - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn single_key_copies_value() {
        let q = m(&[&[3.0, -1.0], &[0.5, 2.0]]);
        let out = cross_attention(&q, &m(&[&[1.0, 1.0]]), &m(&[&[4.0, 5.0, 6.0]]), None).unwrap();
        for r in 0..2 {
            assert_eq!(out.attention.row(r), &[1.0]);
            assert_eq!(out.output.row(r), &[4.0, 5.0, 6.0]);
        }
    }

    #[test]
    fn identical_keys_average_values() {
        let k = m(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let v = m(&[&[0.0], &[3.0], &[6.0]]);
        let out = cross_attention(&m(&[&[7.0, -2.0]]), &k, &v, None).unwrap();
        assert!(out.attention.row(0).iter().all(|&a| (a - 1.0 / 3.0).abs() < 1e-12));
        assert!((out.output.get(0, 0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let out = cross_attention(&m(&[&[1000.0]]), &m(&[&[1000.0], &[-1000.0]]), &m(&[&[1.0], &[0.0]]), Some(1.0)).unwrap();
        assert_eq!(out.attention.row(0), &[1.0, 0.0]);
    }

    #[test]
    fn shape_errors() {
        let q = m(&[&[1.0, 0.0]]);
        assert!(matches!(cross_attention(&q, &m(&[&[1.0]]), &m(&[&[1.0]]), None), Err(Error::ShapeMismatch(_))));
        assert!(matches!(
            cross_attention(&q, &m(&[&[1.0, 0.0]]), &m(&[&[1.0], &[2.0]]), None),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(cross_attention(&q, &m(&[&[1.0, 0.0]]), &m(&[&[1.0]]), Some(0.0)).is_err());
    }

    #[test]
    fn key_permutation_is_exact() {
        let q = m(&[&[0.3, -1.2], &[2.0, 0.1]]);
        let k = m(&[&[0.1, 0.2], &[-0.7, 1.1], &[0.9, 0.4]]);
        let v = m(&[&[1.0, 0.1], &[0.3, 0.7], &[0.2, 0.2]]);
        let perm = [2, 0, 1];
        let pk = Matrix::from_fn(3, 2, |r, c| k.get(perm[r], c));
        let pv = Matrix::from_fn(3, 2, |r, c| v.get(perm[r], c));
        let a = cross_attention(&q, &k, &v, None).unwrap();
        let b = cross_attention(&q, &pk, &pv, None).unwrap();
        assert_eq!(a.output, b.output);
        for r in 0..2 {
            for j in 0..3 {
                assert_eq!(b.attention.get(r, j), a.attention.get(r, perm[j]));
            }
        }
    }

    #[test]
    fn attention_map_sums_selected_columns() {
        let a = m(&[&[0.5, 0.25, 0.25], &[0.1, 0.1, 0.8]]);
        let map = attention_map(&a, |c| c != 0, 1, 2).unwrap();
        assert_eq!(map.data(), &[0.5, 0.9]);
        assert!(attention_map(&a, |_| true, 2, 2).is_err());
    }
}
