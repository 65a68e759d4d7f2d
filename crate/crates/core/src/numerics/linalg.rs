//! Small dense symmetric matrices: cyclic Jacobi eigendecomposition and the
//! Moore–Penrose pseudo-inverse built on it. Sized for m ≤ 10.

use super::NumericsError;

const MAX_SWEEPS: usize = 100;
const ASYMMETRY_TOL: f64 = 1e-12;

/// Dense symmetric matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Checks symmetry to a relative tolerance of 1e-12, then stores (A + Aᵀ)/2.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if data.len() != dim * dim {
            return Err(NumericsError::Shape {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let scale = data
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut out = data;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (out[i * dim + j], out[j * dim + i]);
                if (a - b).abs() > ASYMMETRY_TOL * scale {
                    return Err(NumericsError::NotSymmetric { row: i, col: j });
                }
                let mean = 0.5 * (a + b);
                out[i * dim + j] = mean;
                out[j * dim + i] = mean;
            }
        }
        Ok(SymMatrix { dim, data: out })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        m
    }

    /// Build from a packed upper triangle (row by row, including the diagonal).
    pub fn from_upper(dim: usize, upper: &[f64]) -> Self {
        debug_assert_eq!(upper.len(), dim * (dim + 1) / 2);
        let mut m = Self::zeros(dim);
        let mut idx = 0;
        for i in 0..dim {
            for j in i..dim {
                m.data[i * dim + j] = upper[idx];
                m.data[j * dim + i] = upper[idx];
                idx += 1;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Row-major rows, for serialization.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        SymMatrix { dim: k, data }
    }

    pub fn matmul(&self, other: &SymMatrix) -> Vec<f64> {
        matmul(&self.data, &other.data, self.dim)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data.chunks(self.dim).map(|row| dot(row, v)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.data, self.dim)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Product of two row-major square matrices.
pub fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    out
}

pub fn norm_inf(a: &[f64], m: usize) -> f64 {
    a.chunks(m)
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    /// Descending.
    pub values: Vec<f64>,
    /// Row-major m×m; column `i` is the eigenvector for `values[i]`.
    pub vectors: Vec<f64>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        let m = self.dim();
        (0..m).map(|r| self.vectors[r * m + i]).collect()
    }

    /// V diag(f(λ)) Vᵀ.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m * m];
        for k in 0..m {
            let s = f(self.values[k]);
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                let vik = self.vectors[i * m + k] * s;
                for j in 0..m {
                    out[i * m + j] += vik * self.vectors[j * m + k];
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn eigen_sym(a: &SymMatrix) -> Result<EigenDecomp, NumericsError> {
    let m = a.dim();
    if m == 0 {
        return Err(NumericsError::Shape { expected: 1, found: 0 });
    }
    let mut w = a.data.clone();
    let mut v = SymMatrix::identity(m).data;
    let frob2: f64 = w.iter().map(|x| x * x).sum();

    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                off += w[p * m + q] * w[p * m + q];
            }
        }
        if off == 0.0 || off <= 1e-6 * (f64::EPSILON * f64::EPSILON) * frob2 {
            converged = true;
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = w[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * m + p];
                let aqq = w[q * m + q];
                // Off-diagonal below the diagonals' resolution: drop it.
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[p * m + q] = 0.0;
                    w[q * m + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = w[k * m + p];
                    let akq = w[k * m + q];
                    w[k * m + p] = c * akp - s * akq;
                    w[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = w[p * m + k];
                    let aqk = w[q * m + k];
                    w[p * m + k] = c * apk - s * aqk;
                    w[q * m + k] = s * apk + c * aqk;
                }
                w[p * m + q] = 0.0;
                w[q * m + p] = 0.0;
                for k in 0..m {
                    let vkp = v[k * m + p];
                    let vkq = v[k * m + q];
                    v[k * m + p] = c * vkp - s * vkq;
                    v[k * m + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| w[j * m + j].total_cmp(&w[i * m + i]));
    let values = order.iter().map(|&i| w[i * m + i]).collect();
    let mut vectors = vec![0.0; m * m];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..m {
            vectors[r * m + new_col] = v[r * m + old_col];
        }
    }
    Ok(EigenDecomp { values, vectors })
}

/// Cutoff below which an eigenvalue counts as zero: m · ε · max |λ|.
pub fn rank_tolerance(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    values.len() as f64 * f64::EPSILON * max
}

fn retained(values: &[f64]) -> impl Fn(f64) -> bool {
    let tol = rank_tolerance(values);
    move |l: f64| l.abs() > tol && l != 0.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub matrix: SymMatrix,
    pub rank: usize,
}

/// Moore–Penrose inverse of a symmetric matrix.
pub fn pseudo_inverse(a: &SymMatrix) -> Result<PseudoInverse, NumericsError> {
    let eig = eigen_sym(a)?;
    let keep = retained(&eig.values);
    let rank = eig.values.iter().filter(|&&l| keep(l)).count();
    let data = eig.reconstruct_with(|l| if keep(l) { 1.0 / l } else { 0.0 });
    let matrix = SymMatrix::new(a.dim(), data)?;
    Ok(PseudoInverse { matrix, rank })
}

/// vᵀ A⁻ v and rank(A), without materializing A⁻.
pub fn pinv_quadratic_form(a: &SymMatrix, v: &[f64]) -> Result<(f64, usize), NumericsError> {
    if a.dim() == 1 {
        let d = a.get(0, 0);
        return Ok(if d != 0.0 { (v[0] * v[0] / d, 1) } else { (0.0, 0) });
    }
    let eig = eigen_sym(a)?;
    let keep = retained(&eig.values);
    let m = a.dim();
    let mut total = 0.0;
    let mut rank = 0;
    for k in 0..m {
        let l = eig.values[k];
        if !keep(l) {
            continue;
        }
        rank += 1;
        let proj: f64 = (0..m).map(|i| eig.vectors[i * m + k] * v[i]).sum();
        total += proj * proj / l;
    }
    Ok((total, rank))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(matches!(
            SymMatrix::new(2, vec![1.0, 2.0, 2.5, 1.0]),
            Err(NumericsError::NotSymmetric { .. })
        ));
        let m = SymMatrix::new(2, vec![1.0, 2.0, 2.0 + 1e-14, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn identity_eigenvalues() {
        let e = eigen_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diag_eigenvalues() {
        let e = eigen_sym(&SymMatrix::from_diag(&[2.0, 0.0])).unwrap();
        assert_eq!(e.values, vec![2.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let e = eigen_sym(&SymMatrix::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap()).unwrap();
        assert!(close(e.values[0], 3.0, 1e-14));
        assert!(close(e.values[1], 1.0, 1e-14));
        let v0 = e.vector(0);
        assert!(close(v0[0].abs(), std::f64::consts::FRAC_1_SQRT_2, 1e-14));
        assert!(close(v0[0], v0[1], 1e-14));
    }

    #[test]
    fn pinv_examples() {
        let p = pseudo_inverse(&SymMatrix::identity(3)).unwrap();
        assert_eq!(p.rank, 3);
        assert!(p
            .matrix
            .as_slice()
            .iter()
            .zip(SymMatrix::identity(3).as_slice())
            .all(|(a, b)| close(*a, *b, 1e-15)));

        let p = pseudo_inverse(&SymMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(p.rank, 1);
        for v in p.matrix.as_slice() {
            assert!(close(*v, 0.25, 1e-15), "{v}");
        }

        let p = pseudo_inverse(&SymMatrix::from_diag(&[4.0, 0.0])).unwrap();
        assert_eq!(p.rank, 1);
        assert_eq!(p.matrix.as_slice(), &[0.25, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_matrix() {
        let p = pseudo_inverse(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(p.rank, 0);
        assert!(p.matrix.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(
            pinv_quadratic_form(&SymMatrix::zeros(2), &[1.0, 2.0]).unwrap(),
            (0.0, 0)
        );
    }

    #[test]
    fn quadratic_form_matches_explicit() {
        let a = SymMatrix::new(3, vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]).unwrap();
        let v = [1.0, -2.0, 0.5];
        let p = pseudo_inverse(&a).unwrap();
        let explicit = dot(&v, &p.matrix.mul_vec(&v));
        let (q, rank) = pinv_quadratic_form(&a, &v).unwrap();
        assert_eq!(rank, 3);
        assert!(close(q, explicit, 1e-13));
    }

    #[test]
    fn indefinite_symmetric_inverts_negative_eigenvalues() {
        let a = SymMatrix::from_diag(&[2.0, -4.0, 0.0]);
        let p = pseudo_inverse(&a).unwrap();
        assert_eq!(p.rank, 2);
        assert!(close(p.matrix.get(1, 1), -0.25, 1e-15));
    }
}
