//! Lawson–Hanson active-set nonnegative least squares.
//!
//! Entering and leaving indices are chosen by strict comparison in index
//! order, so ties always go to the lowest index and the returned
//! coefficients are reproducible.

use super::matrix::{norm2, sub_vec, DenseMatrix};
use super::policy::TolerancePolicy;
use super::svd::svd;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution<T> {
    pub coeffs: Vec<T>,
    /// `‖G·coeffs − x‖₂`
    pub residual: T,
    pub iterations: usize,
}

/// Minimises `‖G c − x‖₂` over `c ≥ 0`.
pub fn nnls<T: Real>(g: &DenseMatrix<T>, x: &[T], policy: &TolerancePolicy<T>) -> Result<NnlsSolution<T>> {
    let (m, n) = g.shape();
    if x.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "nnls: target has {} entries, generators live in R^{m}",
            x.len()
        )));
    }
    if !g.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mut coef = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let mut excluded = vec![false; n];
    let max_iter = 30 * (n + 1);
    let wtol = T::epsilon()
        * T::lit(100.0)
        * T::from_count(m.max(n).max(1))
        * g.frobenius_norm().max(T::one())
        * norm2(x).max(T::one());

    let mut iterations = 0;
    'outer: loop {
        let r = sub_vec(x, &g.matvec(&coef));
        let w = g.tr_matvec(&r);

        let mut enter: Option<usize> = None;
        for j in 0..n {
            if passive[j] || excluded[j] || w[j] <= wtol {
                continue;
            }
            if enter.is_none_or(|e| w[j] > w[e]) {
                enter = Some(j);
            }
        }
        let Some(t) = enter else { break };
        passive[t] = true;

        let mut first = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::NnlsIterationCap {
                    iterations: max_iter,
                    best_residual: norm2(&sub_vec(&g.matvec(&coef), x)).to_f64().unwrap_or(f64::NAN),
                    best_coeffs: coef.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
                });
            }
            let z = passive_solve(g, x, &passive, policy)?;
            if first && z[t] <= T::zero() {
                // The entering column cannot improve the fit on its own
                // (numerically dependent); leave it out until the iterate moves.
                passive[t] = false;
                excluded[t] = true;
                continue 'outer;
            }
            first = false;

            if (0..n).filter(|&j| passive[j]).all(|j| z[j] > T::zero()) {
                coef = z;
                excluded.iter_mut().for_each(|e| *e = false);
                break;
            }

            let mut alpha = T::infinity();
            let mut leave = None;
            for j in (0..n).filter(|&j| passive[j] && z[j] <= T::zero()) {
                let a = coef[j] / (coef[j] - z[j]);
                if a < alpha {
                    alpha = a;
                    leave = Some(j);
                }
            }
            for j in 0..n {
                if passive[j] {
                    coef[j] = coef[j] + alpha * (z[j] - coef[j]);
                }
            }
            let tiny = T::epsilon() * T::lit(10.0);
            for j in 0..n {
                if passive[j] && (Some(j) == leave || coef[j] <= tiny) {
                    passive[j] = false;
                    coef[j] = T::zero();
                }
            }
            excluded.iter_mut().for_each(|e| *e = false);
        }
    }

    let residual = norm2(&sub_vec(&g.matvec(&coef), x));
    Ok(NnlsSolution {
        coeffs: coef,
        residual,
        iterations,
    })
}

/// Unconstrained least squares on the passive columns; other entries zero.
fn passive_solve<T: Real>(
    g: &DenseMatrix<T>,
    x: &[T],
    passive: &[bool],
    policy: &TolerancePolicy<T>,
) -> Result<Vec<T>> {
    let idx: Vec<usize> = (0..g.cols()).filter(|&j| passive[j]).collect();
    let sub = g.select_columns(&idx);
    let f = svd(&sub)?;
    let sol = f.pinv_with_rank(f.rank(policy)).matvec(x);
    let mut z = vec![T::zero(); g.cols()];
    for (k, &j) in idx.iter().enumerate() {
        z[j] = sol[k];
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    #[test]
    fn identity_generators() {
        let g = DenseMatrix::identity(2);
        let s = nnls(&g, &[1.0, 2.0], &pol()).unwrap();
        assert_eq!(s.coeffs, vec![1.0, 2.0]);
        assert_eq!(s.residual, 0.0);

        let s = nnls(&g, &[-1.0, 0.0], &pol()).unwrap();
        assert_eq!(s.coeffs, vec![0.0, 0.0]);
        assert_eq!(s.residual, 1.0);
    }

    #[test]
    fn two_generator_exact_fit() {
        // Generators (1,0) and (1,1) as columns: (2,1) = 1·(1,0) + 1·(1,1).
        let g = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        let s = nnls(&g, &[2.0, 1.0], &pol()).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-14 && (s.coeffs[1] - 1.0).abs() < 1e-14);
        assert!(s.residual < 1e-14);
    }

    #[test]
    fn empty_generator_set() {
        let g = DenseMatrix::<f64>::zeros(2, 0);
        let s = nnls(&g, &[3.0, 4.0], &pol()).unwrap();
        assert!(s.coeffs.is_empty());
        assert_eq!(s.residual, 5.0);
    }

    #[test]
    fn duplicate_columns_tie_to_lowest_index() {
        let g = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        let s = nnls(&g, &[2.0, 0.0], &pol()).unwrap();
        assert_eq!(s.coeffs, vec![2.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let g = DenseMatrix::<f64>::identity(2);
        assert!(matches!(nnls(&g, &[1.0], &pol()), Err(Error::DimensionMismatch(_))));
    }
}
