//! One-sided Jacobi SVD and everything derived from it: numeric rank,
//! pseudoinverse, orthogonal projectors and orthonormal complements.
//!
//! Jacobi sweeps visit column pairs in a fixed cyclic order, so the factors
//! are a deterministic function of the input bits.

use super::matrix::{dot, norm2, DenseMatrix};
use super::policy::TolerancePolicy;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(σ) Vᵀ` with `k = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors<T> {
    pub left_vectors: DenseMatrix<T>,
    pub singular_values: Vec<T>,
    pub right_vectors: DenseMatrix<T>,
}

impl<T: Real> SvdFactors<T> {
    pub fn nrows(&self) -> usize {
        self.left_vectors.rows()
    }

    pub fn ncols(&self) -> usize {
        self.right_vectors.rows()
    }

    /// Numeric rank under `policy`'s relative cutoff for this shape.
    pub fn rank(&self, policy: &TolerancePolicy<T>) -> usize {
        numeric_rank(&self.singular_values, policy.rank_cutoff(self.nrows(), self.ncols()))
    }

    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let mut us = self.left_vectors.clone();
        for j in 0..us.cols() {
            for i in 0..us.rows() {
                us[(i, j)] = us[(i, j)] * self.singular_values[j];
            }
        }
        us.matmul(&self.right_vectors.transpose())
    }

    /// First `r` left singular vectors: an orthonormal basis of `R(A)`.
    pub fn range_basis(&self, r: usize) -> DenseMatrix<T> {
        self.left_vectors.select_columns(&(0..r).collect::<Vec<_>>())
    }

    /// First `r` right singular vectors: an orthonormal basis of `R(Aᵀ) = N(A)⊥`.
    pub fn rowspace_basis(&self, r: usize) -> DenseMatrix<T> {
        self.right_vectors.select_columns(&(0..r).collect::<Vec<_>>())
    }

    /// `V_r diag(1/σ) U_rᵀ` using the leading `r` triples.
    pub fn pinv_with_rank(&self, r: usize) -> DenseMatrix<T> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = DenseMatrix::zeros(n, m);
        for k in 0..r {
            let inv = T::one() / self.singular_values[k];
            for i in 0..n {
                let vik = self.right_vectors[(i, k)] * inv;
                if vik == T::zero() {
                    continue;
                }
                for j in 0..m {
                    out[(i, j)] = out[(i, j)] + vik * self.left_vectors[(j, k)];
                }
            }
        }
        out
    }
}

/// Number of singular values strictly above `rel_tol · σ₁`.
///
/// Expects `s` sorted nonincreasing; the zero matrix has rank 0.
pub fn numeric_rank<T: Real>(s: &[T], rel_tol: T) -> usize {
    match s.first() {
        None => 0,
        Some(&s1) => {
            let cut = rel_tol * s1;
            s.iter().take_while(|&&x| x > cut).count()
        }
    }
}

pub fn svd<T: Real>(a: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let (m, n) = a.shape();
    if m >= n {
        let (u, s, v) = jacobi_tall(a)?;
        Ok(SvdFactors {
            left_vectors: u,
            singular_values: s,
            right_vectors: v,
        })
    } else {
        let (u, s, v) = jacobi_tall(&a.transpose())?;
        Ok(SvdFactors {
            left_vectors: v,
            singular_values: s,
            right_vectors: u,
        })
    }
}

/// One-sided Jacobi on a matrix with `m >= n`.
fn jacobi_tall<T: Real>(a: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<T>, DenseMatrix<T>)> {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<T>> = a.columns();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon() * T::from_count(m.max(1));
    // Columns this small are numerically zero and are left alone.
    let floor = T::epsilon() * T::epsilon() * a.frobenius_norm();

    let mut converged = n < 2;
    let mut off_norm = T::zero();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        off_norm = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                // Square roots taken separately so tiny columns do not
                // underflow the product.
                let (na, nb) = (alpha.sqrt(), beta.sqrt());
                if na.min(nb) <= floor || gamma.abs() <= tol * na * nb {
                    continue;
                }
                off_norm = off_norm.max(gamma.abs() / (na * nb));
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNonConvergence {
            sweeps: MAX_SWEEPS,
            off_norm: off_norm.to_f64().unwrap_or(f64::NAN),
        });
    }

    let sigma: Vec<T> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));

    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut zero_slots = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if sigma[j] > T::min_positive_value() {
            u_cols.push(w[j].iter().map(|&x| x / sigma[j]).collect());
        } else {
            u_cols.push(vec![T::zero(); m]);
            zero_slots.push(k);
        }
    }
    // Columns for vanishing singular values are completed with unit vectors
    // orthogonal to the ones already fixed.
    for k in zero_slots {
        let others: Vec<Vec<T>> = u_cols
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != k && norm2(c) > T::zero())
            .map(|(_, c)| c.clone())
            .collect();
        u_cols[k] = next_orthogonal_unit(&others, m);
    }

    let u = DenseMatrix::from_columns(m, &u_cols)?;
    let s: Vec<T> = order.iter().map(|&j| sigma[j]).collect();
    let v_sorted: Vec<Vec<T>> = order.iter().map(|&j| v[j].clone()).collect();
    let v = DenseMatrix::from_columns(n, &v_sorted)?;
    Ok((u, s, v))
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// First standard basis vector (in index order) whose component orthogonal
/// to `basis` is substantial, orthogonalised twice and normalised.
fn next_orthogonal_unit<T: Real>(basis: &[Vec<T>], dim: usize) -> Vec<T> {
    let mut best: Option<(T, Vec<T>)> = None;
    for i in 0..dim {
        let mut e = vec![T::zero(); dim];
        e[i] = T::one();
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &e);
                for (x, &y) in e.iter_mut().zip(b) {
                    *x = *x - c * y;
                }
            }
        }
        let nrm = norm2(&e);
        if nrm > T::lit(0.5) {
            return e.into_iter().map(|x| x / nrm).collect();
        }
        if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
            best = Some((nrm, e));
        }
    }
    let (nrm, e) = best.expect("dimension is positive");
    e.into_iter().map(|x| x / nrm).collect()
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// (orthonormal) columns of `q` in `R^dim`.
pub fn orthogonal_complement<T: Real>(q: &DenseMatrix<T>) -> DenseMatrix<T> {
    let dim = q.rows();
    let mut basis: Vec<Vec<T>> = q.columns();
    let mut extra = Vec::new();
    while basis.len() < dim {
        let e = next_orthogonal_unit(&basis, dim);
        basis.push(e.clone());
        extra.push(e);
    }
    DenseMatrix::from_columns(dim, &extra).expect("finite basis vectors")
}

/// Moore-Penrose pseudoinverse obtained by inverting the retained singular
/// values. The zero matrix maps to the zero matrix of transposed shape.
pub fn pinv<T: Real>(a: &DenseMatrix<T>, policy: &TolerancePolicy<T>) -> Result<DenseMatrix<T>> {
    let f = svd(a)?;
    let r = f.rank(policy);
    Ok(f.pinv_with_rank(r))
}

/// Orthogonal projector onto `R(A)`, equal to `A A†`.
pub fn projector_range<T: Real>(a: &DenseMatrix<T>, policy: &TolerancePolicy<T>) -> Result<DenseMatrix<T>> {
    let f = svd(a)?;
    let ur = f.range_basis(f.rank(policy));
    Ok(ur.matmul(&ur.transpose()))
}

/// Orthogonal projector onto `R(Aᵀ) = N(A)⊥`, equal to `A† A`. At finite
/// scale this is also the projector onto the carrier of `A`.
pub fn projector_rowspace<T: Real>(a: &DenseMatrix<T>, policy: &TolerancePolicy<T>) -> Result<DenseMatrix<T>> {
    let f = svd(a)?;
    let vr = f.rowspace_basis(f.rank(policy));
    Ok(vr.matmul(&vr.transpose()))
}

/// Orthonormal basis of `N(A)`.
pub fn null_space_basis<T: Real>(a: &DenseMatrix<T>, policy: &TolerancePolicy<T>) -> Result<DenseMatrix<T>> {
    let f = svd(a)?;
    Ok(orthogonal_complement(&f.rowspace_basis(f.rank(policy))))
}

/// Frobenius norms of the four Penrose residuals
/// `AXA − A`, `XAX − X`, `(AX)ᵀ − AX`, `(XA)ᵀ − XA`.
pub fn penrose_residuals<T: Real>(a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> [T; 4] {
    let ax = a.matmul(x);
    let xa = x.matmul(a);
    [
        ax.matmul(a).sub(a).frobenius_norm(),
        xa.matmul(x).sub(x).frobenius_norm(),
        ax.transpose().sub(&ax).frobenius_norm(),
        xa.transpose().sub(&xa).frobenius_norm(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    fn close(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && a.sub(b).max_abs() <= tol
    }

    #[test]
    fn diagonal_svd_is_trivial() {
        let a = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let f = svd(&a).unwrap();
        assert_eq!(f.singular_values, vec![3.0, 2.0, 1.0]);
        assert!(close(&f.left_vectors, &DenseMatrix::identity(3), 0.0));
        assert!(close(&f.right_vectors, &DenseMatrix::identity(3), 0.0));
    }

    #[test]
    fn zero_matrix() {
        let z = DenseMatrix::<f64>::zeros(2, 2);
        let f = svd(&z).unwrap();
        assert_eq!(f.singular_values, vec![0.0, 0.0]);
        assert_eq!(f.rank(&pol()), 0);
        // U still orthonormal after completion.
        let utu = f.left_vectors.transpose().matmul(&f.left_vectors);
        assert!(close(&utu, &DenseMatrix::identity(2), 1e-15));
        assert_eq!(
            pinv(&DenseMatrix::<f64>::zeros(2, 3), &pol()).unwrap(),
            DenseMatrix::zeros(3, 2)
        );
        assert_eq!(projector_range(&z, &pol()).unwrap(), DenseMatrix::zeros(2, 2));
        assert_eq!(projector_rowspace(&z, &pol()).unwrap(), DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn all_ones_two_by_two() {
        // AᵀA = [[2,2],[2,2]] has eigenvalues 4 and 0, so σ = (2, 0).
        let a = DenseMatrix::from_rows(&[[1.0_f64, 1.0], [1.0, 1.0]]).unwrap();
        let f = svd(&a).unwrap();
        assert!((f.singular_values[0] - 2.0).abs() < 1e-15);
        assert!(f.singular_values[1].abs() < 1e-15);
        assert_eq!(f.rank(&pol()), 1);
        let p = pinv(&a, &pol()).unwrap();
        assert!(close(&p, &a.scale(0.25), 1e-15));
        for r in penrose_residuals(&a, &p) {
            assert!(r < 1e-15);
        }
        let pr = projector_range(&a, &pol()).unwrap();
        assert!(close(&pr, &a.scale(0.5), 1e-15));
    }

    #[test]
    fn rank_cutoff_examples() {
        assert_eq!(numeric_rank(&[3.0, 2.0, 1.0], 1e-12), 3);
        assert_eq!(numeric_rank(&[1.0, 1e-16], 1e-12), 1);
        assert_eq!(numeric_rank(&[2.0, 0.0], 1e-12), 1);
        assert_eq!(numeric_rank::<f64>(&[0.0, 0.0], 1e-12), 0);
        assert_eq!(numeric_rank::<f64>(&[], 1e-12), 0);
    }

    #[test]
    fn pinv_of_diag_inverts_entries() {
        let p = pinv(&DenseMatrix::from_diag(&[1.0, 2.0, 3.0]), &pol()).unwrap();
        assert!(close(&p, &DenseMatrix::from_diag(&[1.0, 0.5, 1.0 / 3.0]), 1e-16));
    }

    #[test]
    fn projectors_of_identity_and_rank_one() {
        let i3 = DenseMatrix::<f64>::identity(3);
        assert!(close(&projector_range(&i3, &pol()).unwrap(), &i3, 0.0));
        assert!(close(&projector_rowspace(&i3, &pol()).unwrap(), &i3, 0.0));
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(close(
            &projector_range(&a, &pol()).unwrap(),
            &DenseMatrix::from_diag(&[1.0, 0.0]),
            0.0
        ));
    }

    #[test]
    fn wide_matrix_and_complement() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]).unwrap();
        let f = svd(&a).unwrap();
        assert_eq!(f.left_vectors.shape(), (2, 2));
        assert_eq!(f.right_vectors.shape(), (3, 2));
        assert!(close(&f.reconstruct(), &a, 1e-13));
        let nb = null_space_basis(&a, &pol()).unwrap();
        assert_eq!(nb.shape(), (3, 2));
        assert!(a.matmul(&nb).max_abs() < 1e-13);
        let g = nb.transpose().matmul(&nb);
        assert!(close(&g, &DenseMatrix::identity(2), 1e-14));
    }

    #[test]
    fn rejects_nonfinite() {
        let mut a = DenseMatrix::<f64>::zeros(2, 2);
        a[(0, 1)] = f64::INFINITY;
        assert_eq!(svd(&a), Err(Error::NonFinite));
    }

    #[test]
    fn single_precision_works() {
        let a = DenseMatrix::<f32>::from_rows(&[[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let p = pinv(&a, &TolerancePolicy::default()).unwrap();
        assert_eq!(p.to_rows(), vec![vec![0.5, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    }
}
