use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Off-diagonal tolerance for the 9x9 Jacobi solve, relative to the matrix norm.
const JACOBI_TOL: f64 = 1e-12;
/// Second-smallest eigenvalue of the normal matrix, relative to the largest,
/// below which the design matrix is treated as rank-deficient.
const RANK_TOL: f64 = 1e-10;

/// Projective transform `p' ~ H p`, stored row-major.
///
/// Normalized so that `H[2][2] = 1` whenever that entry is non-zero, otherwise
/// to unit Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub const IDENTITY: Homography = Homography {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Validates (finite, invertible) and normalizes a matrix.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("homography has non-finite entries".into()));
        }
        let h = Homography { m: normalize(m) };
        if h.is_singular() {
            return Err(Error::SingularTransform);
        }
        Ok(h)
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Homography {
            m: [[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]],
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_row_major(v: [f64; 9]) -> Result<Self> {
        Self::from_matrix([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.m)
    }

    fn is_singular(&self) -> bool {
        let norm = frobenius(&self.m);
        norm == 0.0 || self.determinant().abs() <= 1e-12 * norm.powi(3)
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    pub fn apply(&self, p: Point) -> Option<Point> {
        let m = &self.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        if w.abs() < 1e-300 || !w.is_finite() {
            return None;
        }
        let x = (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w;
        let y = (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w;
        (x.is_finite() && y.is_finite()).then_some(Point { x, y })
    }

    pub fn inverse(&self) -> Result<Homography> {
        if self.is_singular() {
            return Err(Error::SingularTransform);
        }
        let m = &self.m;
        let d = self.determinant();
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let inv = [
            [cof(1, 2, 1, 2) / d, -cof(0, 2, 1, 2) / d, cof(0, 1, 1, 2) / d],
            [-cof(1, 2, 0, 2) / d, cof(0, 2, 0, 2) / d, -cof(0, 1, 0, 2) / d],
            [cof(1, 2, 0, 1) / d, -cof(0, 2, 0, 1) / d, cof(0, 1, 0, 1) / d],
        ];
        Ok(Homography { m: normalize(inv) })
    }

    /// `self` after `first`: maps `p` to `self(first(p))`.
    pub fn compose(&self, first: &Homography) -> Result<Homography> {
        Homography::from_matrix(mul3(&self.m, &first.m))
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn frobenius(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn mul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn normalize(mut m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let norm = frobenius(&m);
    if norm == 0.0 {
        return m;
    }
    let s = if m[2][2].abs() > 1e-12 * norm {
        m[2][2]
    } else {
        norm
    };
    for v in m.iter_mut().flatten() {
        *v /= s;
    }
    m
}

/// Similarity taking the points to zero mean and RMS distance sqrt(2).
/// Returns the transformed points and the 3x3 transform.
fn hartley_normalize(pts: &[Point]) -> Result<(Vec<Point>, [[f64; 3]; 3])> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let ms = pts
        .iter()
        .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
        .sum::<f64>()
        / n;
    if !(ms > 0.0) || !ms.is_finite() {
        return Err(Error::DegenerateConfiguration("all points coincide".into()));
    }
    let s = (2.0 / ms).sqrt();
    let out = pts
        .iter()
        .map(|p| Point::new(s * (p.x - cx), s * (p.y - cy)))
        .collect();
    Ok((out, [[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]]))
}

fn inverse_similarity(t: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let s = t[0][0];
    [
        [1.0 / s, 0.0, -t[0][2] / s],
        [0.0, 1.0 / s, -t[1][2] / s],
        [0.0, 0.0, 1.0],
    ]
}

/// Least-squares homography mapping `src` onto `dst` by normalized DLT.
///
/// Both point sets are normalized to zero mean and RMS radius sqrt(2). The
/// algebraic solution is the eigenvector of the smallest eigenvalue of
/// `A^T A`, where `A` is the `2N x 9` design matrix, and is then mapped back
/// through the normalizing transforms.
pub fn estimate_homography(src: &[Point], dst: &[Point]) -> Result<Homography> {
    if src.len() != dst.len() {
        return Err(Error::shape(format!(
            "{} source points vs {} destination points",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 4 {
        return Err(Error::InsufficientPoints { found: src.len() });
    }
    if src.iter().chain(dst).any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::InvalidValue("non-finite point coordinate".into()));
    }
    let (src_n, t_src) = hartley_normalize(src)?;
    let (dst_n, t_dst) = hartley_normalize(dst)?;

    let mut ata = [[0.0f64; 9]; 9];
    for (p, q) in src_n.iter().zip(&dst_n) {
        let (x, y, u, v) = (p.x, p.y, q.x, q.y);
        let r1 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r2 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for i in 0..9 {
            for j in i..9 {
                ata[i][j] += r1[i] * r1[j] + r2[i] * r2[j];
            }
        }
    }
    for i in 0..9 {
        for j in 0..i {
            ata[i][j] = ata[j][i];
        }
    }

    let (vals, vecs) = symmetric_eigen(ata, JACOBI_TOL);
    let largest = vals[8].abs().max(f64::MIN_POSITIVE);
    if vals[1].abs() <= RANK_TOL * largest {
        return Err(Error::DegenerateConfiguration(
            "design matrix has rank below 8 (collinear or repeated points)".into(),
        ));
    }
    let h: [[f64; 3]; 3] = std::array::from_fn(|r| std::array::from_fn(|c| vecs[3 * r + c][0]));
    let m = mul3(&mul3(&inverse_similarity(&t_dst), &h), &t_src);
    Homography::from_matrix(m).map_err(|_| {
        Error::DegenerateConfiguration("estimated transform is singular".into())
    })
}

/// Root-mean-square distance between `H(src_i)` and `dst_i`.
pub fn reprojection_rmse(h: &Homography, src: &[Point], dst: &[Point]) -> f64 {
    let sq: f64 = src
        .iter()
        .zip(dst)
        .map(|(p, q)| match h.apply(*p) {
            Some(r) => (r.x - q.x).powi(2) + (r.y - q.y).powi(2),
            None => f64::INFINITY,
        })
        .sum();
    (sq / src.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&p| p.into()).collect()
    }

    fn max_rel_diff(a: &Homography, b: &[[f64; 3]; 3]) -> f64 {
        // compare up to scale after bringing b to the same normalization
        let b = normalize(*b);
        let scale = frobenius(&b);
        a.matrix()
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| (x - y).abs() / scale)
            .fold(0.0, f64::max)
    }

    const SQUARE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

    #[test]
    fn identity_from_fixed_points() {
        let p = pts(&SQUARE);
        let h = estimate_homography(&p, &p).unwrap();
        let m = h.matrix();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((m[i][j] - e).abs() <= 1e-9, "{m:?}");
            }
        }
    }

    #[test]
    fn recovers_affine_ground_truth() {
        let gt = [[2.0, 0.0, 1.0], [0.0, 1.0, 2.0], [0.0, 0.0, 1.0]];
        let dst = pts(&[(1.0, 2.0), (3.0, 2.0), (1.0, 3.0), (3.0, 3.0)]);
        // forward-apply oracle agrees with the listed destinations
        let gt_h = Homography::from_matrix(gt).unwrap();
        for (s, d) in pts(&SQUARE).iter().zip(&dst) {
            let r = gt_h.apply(*s).unwrap();
            assert_eq!((r.x, r.y), (d.x, d.y));
        }
        let h = estimate_homography(&pts(&SQUARE), &dst).unwrap();
        assert!(max_rel_diff(&h, &gt) <= 1e-9);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let p = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
        let q = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert!(matches!(
            estimate_homography(&p, &q),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn three_collinear_of_four_is_degenerate() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)]);
        let q = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.5), (0.0, 1.0)]);
        assert!(matches!(
            estimate_homography(&p, &q),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn too_few_points() {
        let p = pts(&SQUARE[..3]);
        assert!(matches!(
            estimate_homography(&p, &p),
            Err(Error::InsufficientPoints { found: 3 })
        ));
    }

    #[test]
    fn inverse_roundtrip() {
        let h = Homography::from_matrix([[1.2, 0.1, 3.0], [-0.2, 0.9, 1.0], [0.001, 0.002, 1.0]]).unwrap();
        let hi = h.inverse().unwrap();
        let p = Point::new(12.0, -7.0);
        let q = hi.apply(h.apply(p).unwrap()).unwrap();
        assert!((q.x - p.x).abs() < 1e-9 && (q.y - p.y).abs() < 1e-9);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(matches!(
            Homography::from_matrix([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]),
            Err(Error::SingularTransform)
        ));
    }

    #[test]
    fn zero_corner_uses_frobenius_normalization() {
        let h = Homography::from_matrix([[0.0, 2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        // rank 2 matrix is singular
        assert!(h.is_err());
        let h = Homography::from_matrix([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!((frobenius(&h.matrix()) - 1.0).abs() < 1e-12);
    }

    fn arb_h() -> impl Strategy<Value = [[f64; 3]; 3]> {
        (
            0.5f64..2.0,
            -0.3f64..0.3,
            -20.0f64..20.0,
            -0.3f64..0.3,
            0.5f64..2.0,
            -20.0f64..20.0,
            -1e-3f64..1e-3,
            -1e-3f64..1e-3,
        )
            .prop_map(|(a, b, c, d, e, f, g, h)| [[a, b, c], [d, e, f], [g, h, 1.0]])
    }

    proptest! {
        #[test]
        fn similarity_invariance(
            m in arb_h(),
            angle in -3.1f64..3.1,
            scale in 0.2f64..5.0,
            tx in -100.0f64..100.0,
            ty in -100.0f64..100.0,
        ) {
            let gt = Homography::from_matrix(m).unwrap();
            let src = pts(&[(10.0, 12.0), (90.0, 15.0), (95.0, 110.0), (8.0, 105.0),
                            (50.0, 60.0), (30.0, 80.0)]);
            let dst: Vec<Point> = src.iter().map(|p| gt.apply(*p).unwrap()).collect();
            let (c, s) = (scale * angle.cos(), scale * angle.sin());
            let sim = [[c, -s, tx], [s, c, ty], [0.0, 0.0, 1.0]];
            let simh = Homography::from_matrix(sim).unwrap();
            let src2: Vec<Point> = src.iter().map(|p| simh.apply(*p).unwrap()).collect();
            let dst2: Vec<Point> = dst.iter().map(|p| simh.apply(*p).unwrap()).collect();

            let h = estimate_homography(&src, &dst).unwrap();
            let h2 = estimate_homography(&src2, &dst2).unwrap();
            // h2 ~ S h S^-1
            let expected = mul3(&mul3(&sim, &h.matrix()), &simh.inverse().unwrap().matrix());
            prop_assert!(max_rel_diff(&h2, &expected) <= 1e-6);
        }
    }
}
