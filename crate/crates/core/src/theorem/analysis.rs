use std::cell::OnceCell;

use super::GramInstance;
use crate::cone::{double_description, image_cone, ConvexCone, DdOutput};
use crate::error::{Error, Result};
use crate::numlin::{norm2, normalized, svd, DenseMatrix, SvdFactors, TolerancePolicy};
use crate::operator::MatrixOperator;
use crate::scalar::Real;

/// Everything the condition checkers share, computed once per instance:
/// the SVD of `T`, `T†`, `(T*T)†`, bases of `R(T)` and `R(T*)`, and the
/// generators of `K` and `K*`. The double-description enumerations are
/// computed lazily on first use.
#[derive(Debug)]
pub struct GramAnalysis<'a, T> {
    pub inst: &'a GramInstance<T>,
    pub svd: SvdFactors<T>,
    pub rank: usize,
    pub t_dagger: DenseMatrix<T>,
    /// Pseudoinverse of the symmetrised Gram matrix, from its own SVD.
    pub gram_dagger: DenseMatrix<T>,
    pub gram: DenseMatrix<T>,
    /// Orthonormal basis of `R(T)`.
    pub range_basis: DenseMatrix<T>,
    /// Orthonormal basis of `R(T*) = N(T)⊥`.
    pub row_basis: DenseMatrix<T>,
    pub k_generators: DenseMatrix<T>,
    /// Generators of `K*`, or the reason they are unavailable.
    pub dual_generators: std::result::Result<DenseMatrix<T>, String>,
    cstar_rays: OnceCell<std::result::Result<DdOutput<T>, String>>,
    monotone_rays: OnceCell<std::result::Result<DdOutput<T>, String>>,
    image: OnceCell<ConvexCone<T>>,
}

impl<'a, T: Real> GramAnalysis<'a, T> {
    pub fn new(inst: &'a GramInstance<T>) -> Result<Self> {
        let policy = &inst.policy;
        let t = &inst.operator.matrix;
        let f = svd(t)?;
        let rank = f.rank(policy);
        let t_dagger = f.pinv_with_rank(rank);
        let gram = inst.operator.gram().matrix;
        let gf = svd(&gram)?;
        let gram_dagger = gf.pinv_with_rank(gf.rank(policy));
        let range_basis = f.range_basis(rank);
        let row_basis = f.rowspace_basis(rank);
        let k_generators = inst.cone.generators(policy)?;
        let dual_generators = match &inst.dual_generators {
            Some(d) => Ok(d.clone()),
            None => match inst.cone.dual().and_then(|d| d.generators(policy)) {
                Ok(g) => Ok(g),
                Err(e @ Error::DimensionCap { .. }) => Err(e.to_string()),
                Err(e) => return Err(e),
            },
        };
        Ok(Self {
            inst,
            svd: f,
            rank,
            t_dagger,
            gram_dagger,
            gram,
            range_basis,
            row_basis,
            k_generators,
            dual_generators,
            cstar_rays: OnceCell::new(),
            monotone_rays: OnceCell::new(),
            image: OnceCell::new(),
        })
    }

    pub fn policy(&self) -> &TolerancePolicy<T> {
        &self.inst.policy
    }

    pub fn operator(&self) -> &MatrixOperator<T> {
        &self.inst.operator
    }

    pub fn tol(&self) -> T {
        self.inst.policy.membership_tol
    }

    /// Whether `v` is indistinguishable from zero next to `reference`.
    pub fn negligible(&self, v: &[T], reference: T) -> bool {
        let dim = T::from_count(v.len().max(1));
        norm2(v) <= T::lit(1e3) * T::epsilon() * dim * reference
    }

    /// `C = TK`.
    pub fn image_cone(&self) -> Result<&ConvexCone<T>> {
        if let Some(c) = self.image.get() {
            return Ok(c);
        }
        let c = image_cone(self.operator(), &self.inst.cone)?;
        Ok(self.image.get_or_init(|| c))
    }

    /// Extreme rays and lineality of `C* ∩ R(T)`.
    pub fn cstar_in_range(&self) -> Result<&std::result::Result<DdOutput<T>, String>> {
        if let Some(r) = self.cstar_rays.get() {
            return Ok(r);
        }
        let c = self.image_cone()?;
        let h = c.generators(self.policy())?.transpose();
        let h = if h.rows() == 0 {
            DenseMatrix::zeros(0, c.dim())
        } else {
            h
        };
        let out = capped(double_description(&h, Some(&self.range_basis), self.policy()))?;
        Ok(self.cstar_rays.get_or_init(|| out))
    }

    /// Extreme rays and lineality of `{x ∈ R(T*) : T*Tx ∈ K*}`, which is
    /// `{x ∈ R(T*) : ⟨x, T*T g⟩ ≥ 0 for every generator g of K}`.
    pub fn monotone_set(&self) -> Result<&std::result::Result<DdOutput<T>, String>> {
        if let Some(r) = self.monotone_rays.get() {
            return Ok(r);
        }
        let n = self.gram.rows();
        let reference = self.gram.frobenius_norm();
        let rows: Vec<Vec<T>> = self
            .k_generators
            .columns()
            .iter()
            .filter_map(|g| {
                let v = self.gram.matvec(g);
                if self.negligible(&v, reference * norm2(g)) {
                    None
                } else {
                    normalized(&v)
                }
            })
            .collect();
        let h = if rows.is_empty() {
            DenseMatrix::zeros(0, n)
        } else {
            DenseMatrix::from_rows(&rows)?
        };
        let out = capped(double_description(&h, Some(&self.row_basis), self.policy()))?;
        Ok(self.monotone_rays.get_or_init(|| out))
    }
}

/// Converts the double-description cap into a recoverable reason.
fn capped<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e @ Error::DimensionCap { .. }) => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}
