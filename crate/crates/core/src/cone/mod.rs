//! Closed convex polyhedral cones: representations, duals, membership with
//! certificates, acuteness, linear images, and generator/inequality
//! conversion through double description.

mod dd;

pub use dd::{double_description, DdOutput, DD_DIM_CAP};

use crate::error::{Error, Result};
use crate::numlin::{dot, nnls, norm2, normalized, sub_vec, svd, DenseMatrix, TolerancePolicy};
use crate::operator::MatrixOperator;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum ConeRep<T> {
    /// The nonnegative orthant.
    Orthant,
    /// Columns of a square invertible matrix generate the cone.
    Simplicial(DenseMatrix<T>),
    /// Unit columns generate the cone; zero columns mean the cone `{0}`.
    Generated(DenseMatrix<T>),
    /// `{x : Hx ≥ 0}` with unit inward normals as rows.
    Inequality(DenseMatrix<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCone<T> {
    dim: usize,
    rep: ConeRep<T>,
}

/// Outcome of a membership test.
///
/// `slack` is the signed membership margin divided by `max(1, ‖x‖)`: the
/// smallest coordinate or constraint value for orthants and inequality
/// cones, minus the projection distance for generated cones.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipCertificate<T> {
    pub inside: bool,
    /// Nonnegative coefficients with `x ≈ G·coeffs`, when inside and a
    /// generator matrix is available.
    pub coeffs: Option<Vec<T>>,
    /// Unit `s` with `⟨s, x⟩ < 0 ≤ ⟨s, k⟩` for all `k ∈ K`, when outside.
    pub separator: Option<Vec<T>>,
    pub slack: T,
}

fn unit_columns<T: Real>(g: &DenseMatrix<T>, what: &str) -> Result<DenseMatrix<T>> {
    let cols = g
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            // Already-unit columns are kept bit-for-bit.
            if (norm2(c) - T::one()).abs() <= T::lit(4.0) * T::epsilon() {
                return Ok(c.clone());
            }
            normalized(c).ok_or_else(|| Error::InvalidCone(format!("{what} column {j} is zero")))
        })
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_columns(g.rows(), &cols)
}

impl<T: Real> ConvexCone<T> {
    pub fn orthant(dim: usize) -> Self {
        Self {
            dim,
            rep: ConeRep::Orthant,
        }
    }

    /// The cone `{0}` in `R^dim`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            rep: ConeRep::Generated(DenseMatrix::zeros(dim, 0)),
        }
    }

    pub fn simplicial(g: DenseMatrix<T>, policy: &TolerancePolicy<T>) -> Result<Self> {
        let (m, n) = g.shape();
        if m != n {
            return Err(Error::InvalidCone(format!(
                "simplicial generator matrix must be square, got {m}x{n}"
            )));
        }
        let f = svd(&g)?;
        if f.rank(policy) != n {
            return Err(Error::InvalidCone(format!(
                "simplicial generators are linearly dependent (rank {} < {n})",
                f.rank(policy)
            )));
        }
        Ok(Self {
            dim: n,
            rep: ConeRep::Simplicial(g),
        })
    }

    /// Cone generated by the columns of `g`, normalised to unit length.
    pub fn generated(g: DenseMatrix<T>) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            dim: g.rows(),
            rep: ConeRep::Generated(unit_columns(&g, "generator")?),
        })
    }

    /// `{x : Hx ≥ 0}`, rows normalised to unit length.
    pub fn inequality(h: DenseMatrix<T>) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::NonFinite);
        }
        let dim = h.cols();
        let rows = h
            .to_rows()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if (norm2(r) - T::one()).abs() <= T::lit(4.0) * T::epsilon() {
                    return Ok(r.clone());
                }
                normalized(r).ok_or_else(|| Error::InvalidCone(format!("constraint row {i} is zero")))
            })
            .collect::<Result<Vec<_>>>()?;
        let h = if rows.is_empty() {
            DenseMatrix::zeros(0, dim)
        } else {
            DenseMatrix::from_rows(&rows)?
        };
        Ok(Self {
            dim,
            rep: ConeRep::Inequality(h),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rep(&self) -> &ConeRep<T> {
        &self.rep
    }

    pub fn kind(&self) -> &'static str {
        match self.rep {
            ConeRep::Orthant => "orthant",
            ConeRep::Simplicial(_) => "simplicial",
            ConeRep::Generated(_) => "generated",
            ConeRep::Inequality(_) => "inequality",
        }
    }

    /// True for a generated cone without generators, i.e. `{0}`.
    pub fn is_trivial(&self) -> bool {
        matches!(&self.rep, ConeRep::Generated(g) if g.cols() == 0)
    }

    /// A generating set, one column per generator. Inequality cones go
    /// through double description, with lineality directions as `±b`.
    pub fn generators(&self, policy: &TolerancePolicy<T>) -> Result<DenseMatrix<T>> {
        match &self.rep {
            ConeRep::Orthant => Ok(DenseMatrix::identity(self.dim)),
            ConeRep::Simplicial(g) | ConeRep::Generated(g) => Ok(g.clone()),
            ConeRep::Inequality(h) => Ok(double_description(&self.inequality_matrix(h), None, policy)?.generators()),
        }
    }

    fn inequality_matrix(&self, h: &DenseMatrix<T>) -> DenseMatrix<T> {
        if h.rows() == 0 {
            DenseMatrix::zeros(0, self.dim)
        } else {
            h.clone()
        }
    }

    /// The dual cone `K* = {y : ⟨y, k⟩ ≥ 0 ∀ k ∈ K}`.
    pub fn dual(&self) -> Result<Self> {
        match &self.rep {
            ConeRep::Orthant => Ok(Self::orthant(self.dim)),
            ConeRep::Generated(g) => {
                let h = g.transpose();
                Ok(Self {
                    dim: self.dim,
                    rep: ConeRep::Inequality(h),
                })
            }
            ConeRep::Simplicial(g) => {
                let f = svd(g)?;
                let inv_t = f.pinv_with_rank(self.dim).transpose();
                Self::generated(inv_t)
            }
            ConeRep::Inequality(h) => {
                // Farkas: the dual of {x : Hx ≥ 0} is generated by the rows of H.
                Ok(Self {
                    dim: self.dim,
                    rep: ConeRep::Generated(h.transpose()),
                })
            }
        }
    }

    /// Inward unit normals describing the cone as `{x : Hx ≥ 0}`.
    pub fn facets(&self, policy: &TolerancePolicy<T>) -> Result<DenseMatrix<T>> {
        match &self.rep {
            ConeRep::Orthant => Ok(DenseMatrix::identity(self.dim)),
            ConeRep::Inequality(h) => Ok(self.inequality_matrix(h)),
            ConeRep::Simplicial(g) => {
                let f = svd(g)?;
                let rows: Vec<Vec<T>> = f
                    .pinv_with_rank(self.dim)
                    .to_rows()
                    .iter()
                    .map(|r| normalized(r).expect("inverse has no zero row"))
                    .collect();
                DenseMatrix::from_rows(&rows)
            }
            ConeRep::Generated(_) => {
                let dual_gens = self.dual()?.generators(policy)?;
                let h = dual_gens.transpose();
                if h.rows() == 0 {
                    Ok(DenseMatrix::zeros(0, self.dim))
                } else {
                    Ok(h)
                }
            }
        }
    }

    pub fn contains(&self, x: &[T], policy: &TolerancePolicy<T>) -> Result<MembershipCertificate<T>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} entries, cone lives in R^{}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = norm2(x).max(T::one());
        let tol = policy.membership_tol;
        match &self.rep {
            ConeRep::Orthant => {
                let (imin, margin) = argmin(x);
                let slack = margin / scale;
                Ok(if slack >= -tol {
                    MembershipCertificate {
                        inside: true,
                        coeffs: Some(x.iter().map(|&v| v.max(T::zero())).collect()),
                        separator: None,
                        slack,
                    }
                } else {
                    let mut e = vec![T::zero(); self.dim];
                    e[imin] = T::one();
                    MembershipCertificate {
                        inside: false,
                        coeffs: None,
                        separator: Some(e),
                        slack,
                    }
                })
            }
            ConeRep::Inequality(h) => {
                let vals = h.matvec(x);
                let (imin, margin) = argmin(&vals);
                let slack = margin / scale;
                if slack >= -tol {
                    let coeffs = match self.generators(policy) {
                        Ok(g) => Some(nnls(&g, x, policy)?.coeffs),
                        Err(Error::DimensionCap { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    Ok(MembershipCertificate {
                        inside: true,
                        coeffs,
                        separator: None,
                        slack,
                    })
                } else {
                    Ok(MembershipCertificate {
                        inside: false,
                        coeffs: None,
                        separator: Some(h.row(imin).to_vec()),
                        slack,
                    })
                }
            }
            ConeRep::Simplicial(g) | ConeRep::Generated(g) => {
                let sol = nnls(g, x, policy)?;
                let slack = -sol.residual / scale;
                if slack >= -tol {
                    Ok(MembershipCertificate {
                        inside: true,
                        coeffs: Some(sol.coeffs),
                        separator: None,
                        slack,
                    })
                } else {
                    // Projection residual Gc − x lies in K* and is strictly
                    // negative on x.
                    let s = sub_vec(&g.matvec(&sol.coeffs), x);
                    Ok(MembershipCertificate {
                        inside: false,
                        coeffs: None,
                        separator: normalized(&s),
                        slack,
                    })
                }
            }
        }
    }

    /// Smallest cosine between two generators, with the pair attaining it.
    /// `None` when there are no generators.
    pub fn acuteness_margin(&self, policy: &TolerancePolicy<T>) -> Result<Option<(T, usize, usize)>> {
        let g = self.generators(policy)?;
        Ok(min_pairwise_cosine(&g))
    }

    /// Whether `⟨x, y⟩ ≥ 0` for all `x, y` in the cone. Checking generator
    /// pairs suffices by bilinearity.
    pub fn is_acute(&self, policy: &TolerancePolicy<T>) -> Result<bool> {
        Ok(match self.acuteness_margin(policy)? {
            None => true,
            Some((c, _, _)) => c >= -policy.membership_tol,
        })
    }
}

/// Index and value of the smallest entry; `(0, 0)` for an empty slice.
fn argmin<T: Real>(v: &[T]) -> (usize, T) {
    let mut best = (0, T::zero());
    for (i, &x) in v.iter().enumerate() {
        if i == 0 || x < best.1 {
            best = (i, x);
        }
    }
    best
}

/// Smallest `⟨gᵢ, gⱼ⟩ / (‖gᵢ‖‖gⱼ‖)` over `i ≤ j`, skipping zero columns.
pub fn min_pairwise_cosine<T: Real>(g: &DenseMatrix<T>) -> Option<(T, usize, usize)> {
    let cols: Vec<(usize, Vec<T>)> = g
        .columns()
        .into_iter()
        .enumerate()
        .filter_map(|(j, c)| normalized(&c).map(|u| (j, u)))
        .collect();
    let mut best: Option<(T, usize, usize)> = None;
    for (a, (i, u)) in cols.iter().enumerate() {
        for (j, v) in &cols[a..] {
            let c = dot(u, v);
            if best.is_none_or(|(b, _, _)| c < b) {
                best = Some((c, *i, *j));
            }
        }
    }
    best
}

/// `C = TK`: generated by the nonzero images `T gᵢ`, normalised. When every
/// generator lands in the kernel the result is the trivial cone.
pub fn image_cone<T: Real>(op: &MatrixOperator<T>, k: &ConvexCone<T>) -> Result<ConvexCone<T>> {
    let (m, n) = op.shape();
    if k.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "cone in R^{} but operator acts on R^{n}",
            k.dim()
        )));
    }
    let g = k.generators(&op.policy)?;
    let cut = op.policy.rank_cutoff(m, n) * op.matrix.frobenius_norm();
    let images: Vec<Vec<T>> = g
        .columns()
        .iter()
        .map(|c| op.apply(c))
        .filter(|v| norm2(v) > cut)
        .collect();
    if images.is_empty() {
        return Ok(ConvexCone::trivial(m));
    }
    ConvexCone::generated(DenseMatrix::from_columns(m, &images)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = DenseMatrix<f64>;

    fn pol() -> TolerancePolicy<f64> {
        TolerancePolicy::default()
    }

    fn cols(c: &[&[f64]]) -> M {
        M::from_columns(c[0].len(), c).unwrap()
    }

    #[test]
    fn dual_examples() {
        let o = ConvexCone::<f64>::orthant(3);
        assert_eq!(o.dual().unwrap(), o);

        let s = ConvexCone::simplicial(M::identity(2), &pol()).unwrap();
        let d = s.dual().unwrap();
        assert_eq!(d.generators(&pol()).unwrap(), M::identity(2));

        // Generators (1,0), (1,1): G⁻ᵀ has columns (1,−1), (0,1).
        let s = ConvexCone::simplicial(cols(&[&[1.0, 0.0], &[1.0, 1.0]]), &pol()).unwrap();
        let d = s.dual().unwrap().generators(&pol()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(d.sub(&cols(&[&[r, -r], &[0.0, 1.0]])).max_abs() < 1e-15);
    }

    #[test]
    fn dual_of_generated_and_inequality() {
        let g = ConvexCone::generated(cols(&[&[1.0, 0.0], &[1.0, 1.0]])).unwrap();
        let d = g.dual().unwrap();
        assert_eq!(d.kind(), "inequality");
        let dd = d.dual().unwrap();
        assert_eq!(dd, g);
    }

    #[test]
    fn orthant_membership() {
        let o = ConvexCone::<f64>::orthant(2);
        let c = o.contains(&[1.0, 0.0], &pol()).unwrap();
        assert!(c.inside);
        assert_eq!(c.slack, 0.0);
        let c = o.contains(&[-1.0, 1.0], &pol()).unwrap();
        assert!(!c.inside);
        assert_eq!(c.separator, Some(vec![1.0, 0.0]));
        assert!(o.contains(&[1.0], &pol()).is_err());
    }

    #[test]
    fn generated_membership() {
        let k = ConvexCone::generated(cols(&[&[1.0, 0.0], &[1.0, 1.0]])).unwrap();
        let c = k.contains(&[2.0, 1.0], &pol()).unwrap();
        assert!(c.inside);
        let co = c.coeffs.unwrap();
        // Unit generators: coefficients are (1, √2).
        assert!((co[0] - 1.0).abs() < 1e-14 && (co[1] - 2f64.sqrt()).abs() < 1e-14);

        let x = [-1.0, 2.0];
        let c = k.contains(&x, &pol()).unwrap();
        assert!(!c.inside);
        let s = c.separator.unwrap();
        assert!(dot(&s, &x) < 0.0);
        for g in k.generators(&pol()).unwrap().columns() {
            assert!(dot(&s, &g) >= -1e-12);
        }
    }

    #[test]
    fn inequality_membership_has_certificates() {
        let k = ConvexCone::inequality(M::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap()).unwrap();
        let c = k.contains(&[1.0, 1.0], &pol()).unwrap();
        assert!(c.inside && c.coeffs.is_some());
        let c = k.contains(&[-1.0, 3.0], &pol()).unwrap();
        assert!(!c.inside);
        assert_eq!(c.separator.unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn acuteness_examples() {
        assert!(ConvexCone::<f64>::orthant(4).is_acute(&pol()).unwrap());
        let k = ConvexCone::generated(cols(&[&[1.0, 0.0], &[-1.0, 2.0]])).unwrap();
        assert!(!k.is_acute(&pol()).unwrap());
        let (c, _, _) = k.acuteness_margin(&pol()).unwrap().unwrap();
        assert!((c + 1.0 / 5f64.sqrt()).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let k = ConvexCone::generated(cols(&[&[1.0, 0.0], &[r, r]])).unwrap();
        assert!(k.is_acute(&pol()).unwrap());
        assert!(ConvexCone::<f64>::trivial(3).is_acute(&pol()).unwrap());
    }

    #[test]
    fn image_examples() {
        let o = ConvexCone::orthant(2);
        let id = MatrixOperator::with_default_policy(M::identity(2)).unwrap();
        assert_eq!(image_cone(&id, &o).unwrap().generators(&pol()).unwrap(), M::identity(2));

        let p = MatrixOperator::with_default_policy(M::from_diag(&[1.0, 0.0])).unwrap();
        let c = image_cone(&p, &o).unwrap();
        assert_eq!(c.generators(&pol()).unwrap(), cols(&[&[1.0, 0.0]]));

        let t = MatrixOperator::with_default_policy(M::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap()).unwrap();
        let c = image_cone(&t, &o).unwrap().generators(&pol()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(c.sub(&cols(&[&[1.0, 0.0], &[r, r]])).max_abs() < 1e-15);

        let z = MatrixOperator::with_default_policy(M::zeros(3, 2)).unwrap();
        let c = image_cone(&z, &o).unwrap();
        assert!(c.is_trivial() && c.dim() == 3);
    }

    #[test]
    fn invalid_cones() {
        assert!(ConvexCone::simplicial(M::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap(), &pol()).is_err());
        assert!(ConvexCone::simplicial(M::zeros(2, 3), &pol()).is_err());
        assert!(ConvexCone::generated(cols(&[&[0.0, 0.0]])).is_err());
        assert!(ConvexCone::inequality(M::from_rows(&[[0.0, 0.0]]).unwrap()).is_err());
    }

    #[test]
    fn facets_roundtrip_simplicial() {
        let g = cols(&[&[2.0, 0.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 1.0, 3.0]]);
        let k = ConvexCone::simplicial(g.clone(), &pol()).unwrap();
        let h = k.facets(&pol()).unwrap();
        let back = double_description(&h, None, &pol()).unwrap();
        assert_eq!(back.rays.cols(), 3);
        let want = ConvexCone::generated(g).unwrap().generators(&pol()).unwrap();
        for w in want.columns() {
            assert!(back.rays.columns().iter().any(|r| norm2(&sub_vec(r, &w)) < 1e-12));
        }
    }
}
