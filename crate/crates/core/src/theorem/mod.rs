//! The six equivalent characterisations of `(T*T)†(K*) ⊆ K` for a Gram
//! operator `T*T` and a closed convex cone `K` with `T†T K ⊆ K`, each
//! evaluated independently, plus the helper lemmas and the harness that
//! checks all verdicts coincide.
//!
//! With `C = TK` and `D = (T†)* K*` the conditions are
//!
//! 1. `(T*T)†(K*) ⊆ K`
//! 2. `C* ∩ R(T) ⊆ C`
//! 3. `D` is acute
//! 4. `C* ∩ R(T)` is acute
//! 5. `T*Tx ∈ P_R(T*)(K*) ⟹ x ∈ K`
//! 6. `T*Tx ∈ K* ⟹ x ∈ K`
//!
//! Conditions 5 and 6 quantify over `x ∈ R(T*)`, the minimal-norm
//! solutions; kernel components are examined separately by the strict
//! variant of condition 5.

mod analysis;
mod conditions;
mod lemmas;

pub use analysis::GramAnalysis;
pub use conditions::{
    check_hypothesis, cond1_pinv_nonneg, cond2_dualcone_inclusion, cond3_d_acute, cond4_cstar_acute,
    cond5_projected_monotone, cond5_strict, cond6_monotone, HypothesisCheck,
};
pub use lemmas::{lemma_checks, LemmaReport};

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::numlin::{DenseMatrix, TolerancePolicy};
use crate::operator::MatrixOperator;
use crate::scalar::Real;

/// An operator, a cone in its domain, optional explicit generators of the
/// dual cone, and the tolerance policy used for every check.
#[derive(Debug, Clone, PartialEq)]
pub struct GramInstance<T> {
    pub operator: MatrixOperator<T>,
    pub cone: ConvexCone<T>,
    /// Columns generate `K*`. Derived from `cone` when absent.
    pub dual_generators: Option<DenseMatrix<T>>,
    pub policy: TolerancePolicy<T>,
}

impl<T: Real> GramInstance<T> {
    pub fn new(
        matrix: DenseMatrix<T>,
        cone: ConvexCone<T>,
        dual_generators: Option<DenseMatrix<T>>,
        policy: TolerancePolicy<T>,
    ) -> Result<Self> {
        let operator = MatrixOperator::new(matrix, policy)?;
        let n = operator.shape().1;
        if cone.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "cone lives in R^{} but the operator acts on R^{n}",
                cone.dim()
            )));
        }
        if let Some(d) = &dual_generators {
            if d.rows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "dual generators live in R^{}, expected R^{n}",
                    d.rows()
                )));
            }
            if !d.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            operator,
            cone,
            dual_generators,
            policy,
        })
    }

    /// The same instance with `T` replaced by `αT`.
    pub fn scaled(&self, alpha: T) -> Result<Self> {
        Self::new(
            self.operator.matrix.scale(alpha),
            self.cone.clone(),
            self.dual_generators.clone(),
            self.policy,
        )
    }
}

/// Three-valued verdict with the boundary band made explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    /// Worst slack in `[−10·tol, −tol)`: too close to call.
    Marginal,
    /// Could not be evaluated (double-description cap).
    NotEvaluated,
}

impl Verdict {
    /// Classifies the worst scale-free slack of a condition.
    pub fn from_slack<T: Real>(worst: T, tol: T) -> Self {
        if worst >= -tol {
            Verdict::Holds
        } else if worst < -(tol * T::lit(10.0)) {
            Verdict::Fails
        } else {
            Verdict::Marginal
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Verdict::Holds => Some(true),
            Verdict::Fails => Some(false),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Holds => "true",
            Verdict::Fails => "false",
            Verdict::Marginal => "marginal",
            Verdict::NotEvaluated => "not_evaluated",
        }
    }
}

/// Evidence for the worst item of a condition that does not hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T> {
    /// `point` should lie in the cone but does not. `source` is what
    /// produced it (a dual generator, `T*T·point`, or the point itself).
    NotInCone {
        index: usize,
        source: Vec<T>,
        point: Vec<T>,
        separator: Option<Vec<T>>,
        slack: T,
    },
    /// Two generators of a cone that should be acute, with their cosine.
    ObtusePair {
        first_index: usize,
        second_index: usize,
        first: Vec<T>,
        second: Vec<T>,
        cosine: T,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutcome<T> {
    pub verdict: Verdict,
    /// Smallest scale-free slack over everything checked; `None` when not
    /// evaluated.
    pub worst_slack: Option<T>,
    pub witness: Option<Witness<T>>,
    pub note: Option<String>,
}

impl<T: Real> ConditionOutcome<T> {
    pub fn not_evaluated(reason: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::NotEvaluated,
            worst_slack: None,
            witness: None,
            note: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportOptions {
    /// Also test `x + n` for kernel directions `n` in condition 5.
    pub strict_cond5: bool,
    /// Run the helper-lemma checks.
    pub lemmas: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub hypothesis: HypothesisCheck<T>,
    /// Conditions 1 through 6, in order.
    pub conditions: [ConditionOutcome<T>; 6],
    /// All definite verdicts coincide.
    pub agree: bool,
    /// Some condition is marginal; the instance is excluded from agreement
    /// assertions.
    pub marginal: bool,
    /// Some condition could not be evaluated.
    pub incomplete: bool,
    /// Condition 3 evaluated through `⟨dᵢ, (T*T)† dⱼ⟩` agrees with the
    /// generator Gram of `D`.
    pub cond3_routes_agree: bool,
    pub strict_cond5: Option<ConditionOutcome<T>>,
    pub lemmas: Option<LemmaReport<T>>,
}

impl<T: Real> ConditionReport<T> {
    pub fn verdicts(&self) -> [Verdict; 6] {
        std::array::from_fn(|i| self.conditions[i].verdict)
    }

    /// `Some(v)` when every condition evaluated to the definite verdict `v`.
    pub fn unanimous(&self) -> Option<bool> {
        let first = self.conditions[0].verdict.as_bool()?;
        self.conditions
            .iter()
            .all(|c| c.verdict.as_bool() == Some(first))
            .then_some(first)
    }
}

/// Runs the hypothesis check and then every condition.
///
/// Returns [`Error::HypothesisFailed`] when `T†T K ⊄ K`: the equivalence
/// does not apply.
pub fn equivalence_report<T: Real>(inst: &GramInstance<T>, options: ReportOptions) -> Result<ConditionReport<T>> {
    let an = GramAnalysis::new(inst)?;
    let hypothesis = check_hypothesis(&an)?;
    if let Some(w) = &hypothesis.violation {
        return Err(Error::HypothesisFailed {
            generator: w.0,
            image: w.1.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            slack: w.2.to_f64().unwrap_or(f64::NAN),
        });
    }

    let (c3, routes_agree) = cond3_d_acute(&an)?;
    let conditions = [
        cond1_pinv_nonneg(&an)?,
        cond2_dualcone_inclusion(&an)?,
        c3,
        cond4_cstar_acute(&an)?,
        cond5_projected_monotone(&an)?,
        cond6_monotone(&an)?,
    ];

    let definite: Vec<bool> = conditions.iter().filter_map(|c| c.verdict.as_bool()).collect();
    let agree = definite.windows(2).all(|w| w[0] == w[1]);
    let marginal = conditions.iter().any(|c| c.verdict == Verdict::Marginal);
    let incomplete = conditions.iter().any(|c| c.verdict == Verdict::NotEvaluated);

    let strict_cond5 = if options.strict_cond5 {
        Some(cond5_strict(&an)?)
    } else {
        None
    };
    let lemmas = if options.lemmas {
        Some(lemma_checks(&an, &conditions[3])?)
    } else {
        None
    };

    Ok(ConditionReport {
        hypothesis,
        conditions,
        agree,
        marginal,
        incomplete,
        cond3_routes_agree: routes_agree,
        strict_cond5,
        lemmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_bands() {
        let tol = 1e-9;
        assert_eq!(Verdict::from_slack(0.0, tol), Verdict::Holds);
        assert_eq!(Verdict::from_slack(-1e-12, tol), Verdict::Holds);
        assert_eq!(Verdict::from_slack(-5e-9, tol), Verdict::Marginal);
        assert_eq!(Verdict::from_slack(-1e-8, tol), Verdict::Marginal);
        assert_eq!(Verdict::from_slack(-1.1e-8, tol), Verdict::Fails);
    }
}
