//! Small dense symmetric matrix algebra.
//!
//! Matrices are stored as the packed upper triangle, so symmetry is exact by
//! construction. Eigendecomposition uses cyclic Jacobi rotations, which is
//! simple and accurate for the small dimensions (d <= 16 or so) that appear
//! here. Matrix powers +-1/2 and the inverse are formed in the eigenbasis.

use crate::error::{Error, Result};

/// Symmetric matrix in packed upper-triangular storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    dim: usize,
    upper: Vec<f64>,
}

#[inline]
fn pidx(dim: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    r * dim - r * (r + 1) / 2 + c
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        SymMat { dim, upper: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = SymMat::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Build from an entry function; only the upper triangle is evaluated.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMat::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[pidx(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.upper[pidx(self.dim, i, j)] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.upper[pidx(self.dim, i, j)] += v;
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.upper {
            *v *= s;
        }
    }

    pub fn frob_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                acc += v * v;
            }
        }
        acc.sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Sum of |entries|, over the full matrix.
    pub fn abs_sum(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.get(i, j).abs();
            }
        }
        acc
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.upper.iter().fold(0.0, |a: f64, &v| a.max(v.abs()))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                y[i] += self.get(i, j) * x[j];
            }
        }
        y
    }

    /// x' S x
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Symmetric product S * T, symmetrized entry-wise to absorb roundoff.
    pub fn sym_product(&self, other: &SymMat) -> SymMat {
        let d = self.dim;
        SymMat::from_fn(d, |i, j| {
            let a: f64 = (0..d).map(|k| self.get(i, k) * other.get(k, j)).sum();
            let b: f64 = (0..d).map(|k| self.get(j, k) * other.get(k, i)).sum();
            0.5 * (a + b)
        })
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    fn eig_floor(&self) -> f64 {
        1e-12 * self.frob_norm().max(1.0)
    }

    /// Rebuild as V diag(f(lambda)) V' from an eigendecomposition.
    fn from_eigen_map(eig: &Eigen, f: impl Fn(f64) -> f64) -> SymMat {
        let d = eig.values.len();
        SymMat::from_fn(d, |i, j| {
            (0..d)
                .map(|k| f(eig.values[k]) * eig.vector(k)[i] * eig.vector(k)[j])
                .sum()
        })
    }

    /// Symmetric positive-definite square root.
    pub fn spd_sqrt(&self) -> Result<SymMat> {
        let eig = eigendecompose_symmetric(self)?;
        self.require_pd(&eig)?;
        Ok(SymMat::from_eigen_map(&eig, |l| l.sqrt()))
    }

    /// Symmetric positive-definite inverse square root.
    pub fn spd_invsqrt(&self) -> Result<SymMat> {
        let eig = eigendecompose_symmetric(self)?;
        self.require_pd(&eig)?;
        Ok(SymMat::from_eigen_map(&eig, |l| 1.0 / l.sqrt()))
    }

    /// Inverse of a symmetric positive-definite matrix.
    pub fn spd_inverse(&self) -> Result<SymMat> {
        let eig = eigendecompose_symmetric(self)?;
        self.require_pd(&eig)?;
        Ok(SymMat::from_eigen_map(&eig, |l| 1.0 / l))
    }

    fn require_pd(&self, eig: &Eigen) -> Result<()> {
        let floor = self.eig_floor();
        if let Some(&min) = eig.values.first() {
            if min <= floor {
                return Err(Error::NotPd(format!(
                    "smallest eigenvalue {min:.3e} <= floor {floor:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// Eigendecomposition of a symmetric matrix: S = V diag(values) V'.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Eigenvalues sorted ascending.
    pub values: Vec<f64>,
    /// Eigenvectors, column-major; column k pairs with values[k].
    pub vectors: Vec<f64>,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        let d = self.values.len();
        &self.vectors[k * d..(k + 1) * d]
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are returned ascending; each eigenvector's first component of
/// magnitude above 1e-300 is made positive, so outputs are deterministic.
pub fn eigendecompose_symmetric(s: &SymMat) -> Result<Eigen> {
    let d = s.dim();
    let mut a = s.to_dense();
    let mut v = vec![vec![0.0; d]; d];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if d > 1 {
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a[i][j].abs();
                }
            }
            if off == 0.0 {
                converged = true;
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let scale = (a[p][p].abs() + a[q][q].abs()).max(1.0);
                    if apq.abs() < 1e-300 * scale {
                        a[p][q] = 0.0;
                        a[q][p] = 0.0;
                        continue;
                    }
                    // rotation annihilating a[p][q]
                    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = t * c;

                    for k in 0..d {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - sn * akq;
                        a[k][q] = sn * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - sn * aqk;
                        a[q][k] = sn * apk + c * aqk;
                    }
                    a[p][q] = 0.0;
                    a[q][p] = 0.0;
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - sn * vq;
                        row[q] = sn * vp + c * vq;
                    }
                }
            }
            // convergence test on the post-sweep off-diagonal mass
            let mut off_after = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off_after += a[i][j].abs();
                }
            }
            if off_after <= 1e-14 * s.frob_norm().max(1e-300) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::EigenNoConvergence { sweeps: JACOBI_MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());

    let mut values = Vec::with_capacity(d);
    let mut vectors = vec![0.0; d * d];
    for (k, &col) in order.iter().enumerate() {
        values.push(a[col][col]);
        let mut sign = 1.0;
        for row in v.iter() {
            let x = row[col];
            if x.abs() > 1e-300 {
                sign = x.signum();
                break;
            }
        }
        for (i, row) in v.iter().enumerate() {
            vectors[k * d + i] = sign * row[col];
        }
    }
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_spd(d: usize, rng: &mut Rng) -> SymMat {
        // A'A + d * I is comfortably positive definite
        let a: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.normal()).collect())
            .collect();
        SymMat::from_fn(d, |i, j| {
            let mut acc: f64 = (0..d).map(|k| a[k][i] * a[k][j]).sum();
            if i == j {
                acc += d as f64;
            }
            acc
        })
    }

    #[test]
    fn identity_roots() {
        for d in 1..=5 {
            let id = SymMat::identity(d);
            let r = id.spd_sqrt().unwrap();
            let ri = id.spd_invsqrt().unwrap();
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((r.get(i, j) - expect).abs() < 1e-14);
                    assert!((ri.get(i, j) - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn textbook_two_by_two() {
        let mut s = SymMat::zeros(2);
        s.set(0, 0, 2.0);
        s.set(0, 1, 1.0);
        s.set(1, 1, 2.0);
        let eig = eigendecompose_symmetric(&s).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-13);
        assert!((eig.values[1] - 3.0).abs() < 1e-13);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vector(0);
        let v1 = eig.vector(1);
        assert!((v0[0] - inv_sqrt2).abs() < 1e-13 && (v0[1] + inv_sqrt2).abs() < 1e-13);
        assert!((v1[0] - inv_sqrt2).abs() < 1e-13 && (v1[1] - inv_sqrt2).abs() < 1e-13);
    }

    #[test]
    fn diagonal_eigen_is_sorted_axes() {
        let s = SymMat::diag(&[5.0, 2.0]);
        let eig = eigendecompose_symmetric(&s).unwrap();
        assert_eq!(eig.values, vec![2.0, 5.0]);
        assert_eq!(eig.vector(0), &[0.0, 1.0]);
        assert_eq!(eig.vector(1), &[1.0, 0.0]);
    }

    #[test]
    fn normal_fisher_invsqrt_is_diagonal_closed_form() {
        // Fisher diag(1/s2, 1/(2 s2^2)) at s2 = 1 has inverse root diag(1, sqrt 2)
        let s = SymMat::diag(&[1.0, 0.5]);
        let r = s.spd_invsqrt().unwrap();
        assert!((r.get(0, 0) - 1.0).abs() < 1e-14);
        assert!((r.get(1, 1) - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!(r.get(0, 1).abs() < 1e-14);
    }

    #[test]
    fn design_invsqrt_diagonal() {
        // diag(n, sum (x_i - xbar)^2) -> diag(1/sqrt n, 1/sqrt SS)
        let n = 4.0;
        let ss = 20.0;
        let s = SymMat::diag(&[n, ss]);
        let r = s.spd_invsqrt().unwrap();
        assert!((r.get(0, 0) - 1.0 / n.sqrt()).abs() < 1e-14);
        assert!((r.get(1, 1) - 1.0 / ss.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_property() {
        let mut rng = Rng::new(11);
        for d in 2..=5 {
            let s = random_spd(d, &mut rng);
            let eig = eigendecompose_symmetric(&s).unwrap();
            let norm = s.frob_norm();
            // S = V diag(l) V'
            for i in 0..d {
                for j in 0..d {
                    let rec: f64 = (0..d)
                        .map(|k| eig.values[k] * eig.vector(k)[i] * eig.vector(k)[j])
                        .sum();
                    assert!((rec - s.get(i, j)).abs() < 1e-11 * norm);
                }
            }
            // V'V = I
            for p in 0..d {
                for q in 0..d {
                    let dot: f64 = (0..d).map(|k| eig.vector(p)[k] * eig.vector(q)[k]).sum();
                    let expect = if p == q { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn sqrt_and_invsqrt_properties() {
        let mut rng = Rng::new(17);
        for d in 2..=8 {
            let s = random_spd(d, &mut rng);
            let r = s.spd_sqrt().unwrap();
            let ri = s.spd_invsqrt().unwrap();
            let norm = s.frob_norm();

            // R R = S
            let rr = r.sym_product(&r);
            let mut err = 0.0;
            for i in 0..d {
                for j in 0..d {
                    err += (rr.get(i, j) - s.get(i, j)).powi(2);
                }
            }
            assert!(err.sqrt() <= 1e-10 * norm);

            // Ri Ri S = I
            let riri = ri.sym_product(&ri);
            let prod = riri.sym_product(&s);
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((prod.get(i, j) - expect).abs() < 1e-9 * d as f64);
                }
            }

            // sqrt commutes with S (shared eigenbasis)
            let rs = r.sym_product(&s);
            let sr = s.sym_product(&r);
            for i in 0..d {
                for j in 0..d {
                    assert!((rs.get(i, j) - sr.get(i, j)).abs() < 1e-9 * norm);
                }
            }

            // invsqrt equals inverse of sqrt
            let rinv = r.spd_inverse().unwrap();
            for i in 0..d {
                for j in 0..d {
                    assert!((rinv.get(i, j) - ri.get(i, j)).abs() < 1e-9 * d as f64);
                }
            }
        }
    }

    #[test]
    fn not_pd_is_rejected() {
        let s = SymMat::diag(&[1.0, 0.0]);
        assert!(matches!(s.spd_sqrt(), Err(Error::NotPd(_))));
        let s = SymMat::diag(&[1.0, -2.0]);
        assert!(matches!(s.spd_invsqrt(), Err(Error::NotPd(_))));
    }
}
