//! Double description: extreme rays (and the lineality space) of a
//! polyhedral cone `{x : Hx ≥ 0}`, optionally intersected with a subspace.
//!
//! Constraints are first expressed in subspace coordinates, the lineality
//! space is split off with an SVD, and the pointed remainder is enumerated
//! with the incremental DD method using the combinatorial adjacency test.
//! A remainder with exactly as many (irredundant) constraints as its
//! dimension is simplicial and is inverted directly.

use crate::error::{Error, Result};
use crate::numlin::{dot, norm2, normalized, orthogonal_complement, svd, DenseMatrix, TolerancePolicy};
use crate::scalar::Real;

/// Largest subspace dimension on which the general (non-simplicial)
/// enumeration is attempted.
pub const DD_DIM_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DdOutput<T> {
    /// Unit extreme rays of the pointed part, one per column.
    pub rays: DenseMatrix<T>,
    /// Orthonormal basis of the lineality space, one per column.
    pub lineality: DenseMatrix<T>,
}

impl<T: Real> DdOutput<T> {
    pub fn has_lineality(&self) -> bool {
        self.lineality.cols() > 0
    }

    /// Rays followed by `+b, −b` for every lineality basis vector `b`: a
    /// generating set of the whole cone.
    pub fn generators(&self) -> DenseMatrix<T> {
        let dim = self.rays.rows();
        let mut cols = self.rays.columns();
        for b in self.lineality.columns() {
            let neg = b.iter().map(|&v| -v).collect();
            cols.push(b);
            cols.push(neg);
        }
        DenseMatrix::from_columns(dim, &cols).expect("finite generators")
    }
}

/// Enumerates `{x : Hx ≥ 0}` (rows of `h` are inward normals), restricted to
/// the span of the orthonormal columns of `subspace` when given.
pub fn double_description<T: Real>(
    h: &DenseMatrix<T>,
    subspace: Option<&DenseMatrix<T>>,
    policy: &TolerancePolicy<T>,
) -> Result<DdOutput<T>> {
    let d = h.cols();
    let basis = match subspace {
        Some(b) => {
            if b.rows() != d {
                return Err(Error::DimensionMismatch(format!(
                    "subspace basis lives in R^{}, constraints in R^{d}",
                    b.rows()
                )));
            }
            b.clone()
        }
        None => DenseMatrix::identity(d),
    };
    let r = basis.cols();
    let ztol = policy.membership_tol;

    // Constraints in subspace coordinates, unit rows, no zero or duplicate rows.
    let projected = h.matmul(&basis);
    let mut rows: Vec<Vec<T>> = Vec::new();
    for i in 0..projected.rows() {
        let Some(a) = normalized(projected.row(i)) else {
            continue;
        };
        if norm2(projected.row(i)) <= ztol * norm2(h.row(i)).max(T::one()) {
            continue;
        }
        if rows.iter().any(|b| norm2(&crate::numlin::sub_vec(&a, b)) <= ztol) {
            continue;
        }
        rows.push(a);
    }

    let empty = |dim: usize| DenseMatrix::zeros(dim, 0);
    if r == 0 {
        return Ok(DdOutput {
            rays: empty(d),
            lineality: empty(d),
        });
    }
    if rows.is_empty() {
        return Ok(DdOutput {
            rays: empty(d),
            lineality: basis,
        });
    }

    let a0 = DenseMatrix::from_rows(&rows)?;
    let f = svd(&a0)?;
    let p = f.rank(policy);
    let row_basis = f.rowspace_basis(p);
    let null_basis = orthogonal_complement(&row_basis);
    let lineality = basis.matmul(&null_basis);
    if p == 0 {
        return Ok(DdOutput {
            rays: empty(d),
            lineality,
        });
    }

    // Pointed part in the p-dimensional row-space coordinates.
    let reduced = a0.matmul(&row_basis);
    let cons: Vec<Vec<T>> = (0..reduced.rows())
        .map(|i| normalized(reduced.row(i)).expect("rows of full-rank reduction are nonzero"))
        .collect();

    let rays_z = if cons.len() == p {
        simplicial_rays(&cons, policy)?
    } else {
        if r > DD_DIM_CAP {
            return Err(Error::DimensionCap {
                dim: r,
                cap: DD_DIM_CAP,
            });
        }
        incremental_dd(&cons, p, ztol)?
    };

    let lift = basis.matmul(&row_basis);
    let ray_cols: Vec<Vec<T>> = rays_z.iter().filter_map(|z| normalized(&lift.matvec(z))).collect();
    Ok(DdOutput {
        rays: DenseMatrix::from_columns(d, &ray_cols)?,
        lineality,
    })
}

/// Rays of `{z : Az ≥ 0}` for square invertible `A`: the columns of `A⁻¹`.
fn simplicial_rays<T: Real>(cons: &[Vec<T>], policy: &TolerancePolicy<T>) -> Result<Vec<Vec<T>>> {
    let a = DenseMatrix::from_rows(cons)?;
    let f = svd(&a)?;
    let inv = f.pinv_with_rank(f.rank(policy));
    Ok(inv
        .columns()
        .into_iter()
        .map(|c| normalized(&c).expect("inverse has no zero column"))
        .collect())
}

struct Ray<T> {
    z: Vec<T>,
    /// Indices into `cons` of the processed constraints tight at this ray.
    zeros: Vec<bool>,
}

fn incremental_dd<T: Real>(cons: &[Vec<T>], p: usize, ztol: T) -> Result<Vec<Vec<T>>> {
    let k = cons.len();

    // Greedy, lowest index first: p rows that are well independent.
    let indep_tol = T::epsilon().sqrt();
    let mut chosen: Vec<usize> = Vec::with_capacity(p);
    let mut ortho: Vec<Vec<T>> = Vec::with_capacity(p);
    for (i, a) in cons.iter().enumerate() {
        if chosen.len() == p {
            break;
        }
        let mut v = a.clone();
        for _ in 0..2 {
            for q in &ortho {
                let c = dot(q, &v);
                for (x, &y) in v.iter_mut().zip(q) {
                    *x = *x - c * y;
                }
            }
        }
        if norm2(&v) > indep_tol {
            chosen.push(i);
            ortho.push(normalized(&v).expect("nonzero"));
        }
    }
    if chosen.len() < p {
        return Err(Error::UnsupportedConversion(
            "could not select an independent initial constraint set".into(),
        ));
    }

    let init = DenseMatrix::from_rows(&chosen.iter().map(|&i| cons[i].clone()).collect::<Vec<_>>())?;
    let f = svd(&init)?;
    let inv = f.pinv_with_rank(p);
    let mut rays: Vec<Ray<T>> = (0..p)
        .map(|j| {
            let z = normalized(&inv.column(j)).expect("inverse column nonzero");
            let mut zeros = vec![false; k];
            for (jj, &row) in chosen.iter().enumerate() {
                zeros[row] = jj != j;
            }
            Ray { z, zeros }
        })
        .collect();

    for (row, a) in cons.iter().enumerate() {
        if chosen.contains(&row) {
            continue;
        }
        let vals: Vec<T> = rays.iter().map(|ray| dot(a, &ray.z)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > ztol).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -ztol).collect();

        let mut next: Vec<Ray<T>> = Vec::new();
        for &i in &pos {
            next.push(Ray {
                z: rays[i].z.clone(),
                zeros: rays[i].zeros.clone(),
            });
        }
        for i in 0..rays.len() {
            if vals[i].abs() <= ztol {
                let mut zeros = rays[i].zeros.clone();
                zeros[row] = true;
                next.push(Ray {
                    z: rays[i].z.clone(),
                    zeros,
                });
            }
        }
        for &i in &pos {
            for &j in &neg {
                let common: Vec<bool> = rays[i]
                    .zeros
                    .iter()
                    .zip(&rays[j].zeros)
                    .map(|(&x, &y)| x && y)
                    .collect();
                let count = common.iter().filter(|&&c| c).count();
                if count + 2 < p {
                    continue;
                }
                let blocked = (0..rays.len())
                    .any(|l| l != i && l != j && common.iter().zip(&rays[l].zeros).all(|(&c, &zl)| !c || zl));
                if blocked {
                    continue;
                }
                let (vp, vn) = (vals[i], -vals[j]);
                let z: Vec<T> = rays[j]
                    .z
                    .iter()
                    .zip(&rays[i].z)
                    .map(|(&zn, &zp)| vp * zn + vn * zp)
                    .collect();
                let Some(z) = normalized(&z) else { continue };
                let mut zeros = common;
                zeros[row] = true;
                next.push(Ray { z, zeros });
            }
        }
        rays = next;
    }

    // Drop numerically repeated rays, keeping the first occurrence.
    let mut out: Vec<Vec<T>> = Vec::with_capacity(rays.len());
    for ray in rays {
        if !out.iter().any(|z| norm2(&crate::numlin::sub_vec(z, &ray.z)) <= ztol) {
            out.push(ray.z);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    fn has_col(m: &DenseMatrix<f64>, v: &[f64]) -> bool {
        m.columns()
            .iter()
            .any(|c| c.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-12))
    }

    #[test]
    fn orthant() {
        let out = double_description(&DenseMatrix::identity(2), None, &pol()).unwrap();
        assert_eq!(out.rays.cols(), 2);
        assert!(has_col(&out.rays, &[1.0, 0.0]) && has_col(&out.rays, &[0.0, 1.0]));
        assert!(!out.has_lineality());
    }

    #[test]
    fn two_constraints_in_plane() {
        // x ≥ 0 and x + y ≥ 0: boundary rays (0,1) and (1,−1)/√2.
        let h = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let out = double_description(&h, None, &pol()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(out.rays.cols(), 2);
        assert!(has_col(&out.rays, &[0.0, 1.0]));
        assert!(has_col(&out.rays, &[s, -s]));
    }

    #[test]
    fn halfspace_has_lineality() {
        let h = DenseMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let out = double_description(&h, None, &pol()).unwrap();
        assert!(out.has_lineality());
        assert_eq!(out.lineality.cols(), 1);
        assert!((out.lineality[(1, 0)].abs() - 1.0).abs() < 1e-15);
        assert_eq!(out.rays.cols(), 1);
        assert!(has_col(&out.rays, &[1.0, 0.0]));
        assert_eq!(out.generators().cols(), 3);
    }

    #[test]
    fn pointed_to_origin() {
        let h = DenseMatrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let out = double_description(&h, None, &pol()).unwrap();
        assert_eq!(out.rays.cols(), 0);
        assert!(!out.has_lineality());
    }

    #[test]
    fn square_pyramid_needs_general_path() {
        // Four facets through the apex of a square pyramid in R^3.
        let h =
            DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, -1.0, 1.0]]).unwrap();
        let out = double_description(&h, None, &pol()).unwrap();
        assert_eq!(out.rays.cols(), 4);
        let c = 1.0 / 3f64.sqrt();
        for v in [[c, c, c], [c, -c, c], [-c, c, c], [-c, -c, c]] {
            assert!(has_col(&out.rays, &v), "{v:?} missing in {:?}", out.rays);
        }
    }

    #[test]
    fn restriction_to_subspace() {
        // Orthant in R^3 intersected with the plane z = 0.
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let out = double_description(&DenseMatrix::identity(3), Some(&b), &pol()).unwrap();
        assert_eq!(out.rays.cols(), 2);
        assert!(has_col(&out.rays, &[1.0, 0.0, 0.0]) && has_col(&out.rays, &[0.0, 1.0, 0.0]));
    }

    #[test]
    fn cap_applies_to_general_path_only() {
        let n = DD_DIM_CAP + 2;
        let simplicial = double_description(&DenseMatrix::<f64>::identity(n), None, &pol()).unwrap();
        assert_eq!(simplicial.rays.cols(), n);

        let mut rows = DenseMatrix::<f64>::identity(n).to_rows();
        rows.push(vec![1.0; n]);
        let h = DenseMatrix::from_rows(&rows).unwrap();
        assert_eq!(
            double_description(&h, None, &pol()),
            Err(Error::DimensionCap {
                dim: n,
                cap: DD_DIM_CAP
            })
        );
    }
}
