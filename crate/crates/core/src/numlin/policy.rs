use crate::error::{Error, Result};
use crate::scalar::Real;

/// The one set of tolerances threaded through every kernel.
///
/// `rank_rel_tol = None` selects the shape-dependent default
/// `max(m, n) · ε · 64`, resolved per matrix in [`TolerancePolicy::rank_cutoff`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy<T> {
    pub rank_rel_tol: Option<T>,
    pub membership_tol: T,
    pub identity_tol: T,
}

impl<T: Real> Default for TolerancePolicy<T> {
    fn default() -> Self {
        Self {
            rank_rel_tol: None,
            membership_tol: T::lit(T::DEFAULT_TOL),
            identity_tol: T::lit(T::DEFAULT_TOL),
        }
    }
}

impl<T: Real> TolerancePolicy<T> {
    pub fn new(rank_rel_tol: Option<T>, membership_tol: T, identity_tol: T) -> Result<Self> {
        let p = Self {
            rank_rel_tol,
            membership_tol,
            identity_tol,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x.is_finite() && x > T::zero();
        if let Some(r) = self.rank_rel_tol {
            if !pos(r) || r >= T::one() {
                return Err(Error::InvalidPolicy(format!(
                    "rank_rel_tol must lie in (0, 1), got {r}"
                )));
            }
        }
        if !pos(self.membership_tol) {
            return Err(Error::InvalidPolicy(format!(
                "membership_tol must be positive, got {}",
                self.membership_tol
            )));
        }
        if !pos(self.identity_tol) {
            return Err(Error::InvalidPolicy(format!(
                "identity_tol must be positive, got {}",
                self.identity_tol
            )));
        }
        Ok(())
    }

    /// Relative singular-value cutoff for an `m x n` matrix.
    pub fn rank_cutoff(&self, m: usize, n: usize) -> T {
        self.rank_rel_tol
            .unwrap_or_else(|| T::from_count(m.max(n).max(1)) * T::epsilon() * T::lit(64.0))
    }

    pub fn with_rank_rel_tol(mut self, tol: T) -> Self {
        self.rank_rel_tol = Some(tol);
        self
    }

    pub fn with_membership_tol(mut self, tol: T) -> Self {
        self.membership_tol = tol;
        self
    }

    pub fn with_identity_tol(mut self, tol: T) -> Self {
        self.identity_tol = tol;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cutoff_scales_with_shape() {
        let p = TolerancePolicy::<f64>::default();
        assert_eq!(p.rank_cutoff(3, 5), 5.0 * f64::EPSILON * 64.0);
        assert_eq!(p.with_rank_rel_tol(1e-12).rank_cutoff(3, 5), 1e-12);
    }

    #[test]
    fn rejects_nonpositive_or_unit_tolerances() {
        assert!(TolerancePolicy::<f64>::new(Some(1.0), 1e-9, 1e-9).is_err());
        assert!(TolerancePolicy::<f64>::new(None, 0.0, 1e-9).is_err());
        assert!(TolerancePolicy::<f64>::new(None, 1e-9, -1.0).is_err());
        assert!(TolerancePolicy::<f32>::new(Some(1e-6), 1e-4, 1e-4).is_ok());
    }
}
