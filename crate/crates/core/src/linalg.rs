//! Minimal fixed-size linear algebra for 1- and 2-dimensional tangent spaces.
//!
//! Everything is stored in 2-slot arrays; the active dimension is passed
//! explicitly where it matters (norms, inverses, determinants). Circle data
//! keeps the second slot at exactly zero.

/// 2x2 matrix, row-major. For dimension 1 only `a[0][0]` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: [[f64; 2]; 2],
}

impl Mat2 {
    pub const fn new(a: [[f64; 2]; 2]) -> Self {
        Mat2 { a }
    }

    pub fn identity() -> Self {
        Mat2::new([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn zero() -> Self {
        Mat2::new([[0.0, 0.0], [0.0, 0.0]])
    }

    pub fn from_int(m: [[i64; 2]; 2]) -> Self {
        Mat2::new([
            [m[0][0] as f64, m[0][1] as f64],
            [m[1][0] as f64, m[1][1] as f64],
        ])
    }

    /// Columns as vectors.
    pub fn from_columns(c0: [f64; 2], c1: [f64; 2]) -> Self {
        Mat2::new([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn det(&self, dim: usize) -> f64 {
        match dim {
            1 => self.a[0][0],
            _ => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
        }
    }

    pub fn inverse(&self, dim: usize) -> Option<Mat2> {
        match dim {
            1 => {
                let d = self.a[0][0];
                if d == 0.0 || !d.is_finite() {
                    return None;
                }
                let mut m = Mat2::identity();
                m.a[0][0] = 1.0 / d;
                Some(m)
            }
            _ => {
                let d = self.det(2);
                if d == 0.0 || !d.is_finite() {
                    return None;
                }
                Some(Mat2::new([
                    [self.a[1][1] / d, -self.a[0][1] / d],
                    [-self.a[1][0] / d, self.a[0][0] / d],
                ]))
            }
        }
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] * v[0] + self.a[0][1] * v[1],
            self.a[1][0] * v[0] + self.a[1][1] * v[1],
        ]
    }

    pub fn mul_mat(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] = self.a[i][0] * other.a[0][j] + self.a[i][1] * other.a[1][j];
            }
        }
        out
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] = self.a[i][j] + other.a[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] *= s;
            }
        }
        out
    }

    /// Spectral norm (largest singular value), closed form.
    pub fn op_norm(&self, dim: usize) -> f64 {
        match dim {
            1 => self.a[0][0].abs(),
            _ => {
                let [[a, b], [c, d]] = self.a;
                let p = a * a + b * b + c * c + d * d;
                let q = (a * d - b * c).abs();
                // sigma_max^2 = (p + sqrt(p^2 - 4 q^2)) / 2
                let disc = (p * p - 4.0 * q * q).max(0.0);
                (0.5 * (p + disc.sqrt())).sqrt()
            }
        }
    }

    /// Eigenvalues of a 2x2 matrix with real spectrum, ordered |mu0| >= |mu1|.
    /// Returns None when the discriminant is negative.
    pub fn real_eigenvalues(&self) -> Option<(f64, f64)> {
        let tr = self.a[0][0] + self.a[1][1];
        let det = self.det(2);
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let (m0, m1) = ((tr + s) / 2.0, (tr - s) / 2.0);
        if m0.abs() >= m1.abs() {
            Some((m0, m1))
        } else {
            Some((m1, m0))
        }
    }

    /// Unit eigenvector for eigenvalue `mu`, picking the better conditioned
    /// of the two kernel expressions of (A - mu I).
    pub fn eigenvector(&self, mu: f64) -> Option<[f64; 2]> {
        let [[a, b], [c, d]] = self.a;
        let v1 = [b, mu - a];
        let v2 = [mu - d, c];
        let n1 = (v1[0] * v1[0] + v1[1] * v1[1]).sqrt();
        let n2 = (v2[0] * v2[0] + v2[1] * v2[1]).sqrt();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if n < 1e-14 {
            return None;
        }
        Some([v[0] / n, v[1] / n])
    }
}

pub fn vec_add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn vec_sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn vec_scale(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}

pub fn vec_norm(a: [f64; 2]) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

pub fn vec_norm_inf(a: [f64; 2]) -> f64 {
    a[0].abs().max(a[1].abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_roundtrip() {
        let m = Mat2::new([[2.0, 1.0], [1.0, 1.0]]);
        let inv = m.inverse(2).unwrap();
        let id = m.mul_mat(&inv);
        assert_relative_eq!(id.a[0][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(id.a[0][1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(id.a[1][0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(id.a[1][1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cat_map_eigenvalues() {
        let m = Mat2::new([[2.0, 1.0], [1.0, 1.0]]);
        let (mu, nu) = m.real_eigenvalues().unwrap();
        assert_relative_eq!(mu, (3.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(nu, (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn op_norm_matches_eigen_for_symmetric() {
        let m = Mat2::new([[2.0, 1.0], [1.0, 1.0]]);
        let (mu, _) = m.real_eigenvalues().unwrap();
        assert_relative_eq!(m.op_norm(2), mu, epsilon = 1e-12);
    }

    #[test]
    fn op_norm_dim1() {
        let mut m = Mat2::identity();
        m.a[0][0] = -3.5;
        assert_eq!(m.op_norm(1), 3.5);
    }
}
