//! JSON schemas for instances, instance specs and reports.
//!
//! Matrices are arrays of rows. For cones and explicit dual generators each
//! inner array is one generator (or one inequality normal), so a generated
//! cone in `R^n` with `k` generators is written as `k` arrays of length `n`.

use gramcone::cone::{ConeRep, ConvexCone};
use gramcone::instances::{InstanceKind, InstanceShape, InstanceSpec};
use gramcone::numlin::{DenseMatrix, TolerancePolicy};
use gramcone::operator::{build_truncation, TruncationFamily, TruncationSpec};
use gramcone::theorem::{ConditionOutcome, ConditionReport, LemmaReport, Verdict, Witness};
use gramcone::{Instance, Matrix, Policy};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub operator: OperatorDoc,
    pub cone: ConeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_generators: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub policy: PolicyDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorDoc {
    Matrix { matrix: Vec<Vec<f64>> },
    Truncation { truncation: TruncationDoc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationDoc {
    pub family: String,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDoc {
    /// `orthant`, `simplicial`, `generated` or `inequality`.
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    #[serde(default)]
    pub rank_rel_tol: Option<f64>,
    #[serde(default)]
    pub membership_tol: Option<f64>,
    #[serde(default)]
    pub identity_tol: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
    #[error(transparent)]
    Core(#[from] gramcone::Error),
}

fn field(field: &'static str, message: impl Into<String>) -> DocError {
    DocError::Field {
        field,
        message: message.into(),
    }
}

/// Rows of a JSON matrix; `dim` is the row length to use when there are no
/// rows.
fn rows_to_matrix(rows: &[Vec<f64>], dim: usize, name: &'static str) -> Result<Matrix, DocError> {
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, dim));
    }
    DenseMatrix::from_rows(rows).map_err(|e| field(name, e.to_string()))
}

impl PolicyDoc {
    pub fn from_policy(p: &Policy) -> Self {
        Self {
            rank_rel_tol: p.rank_rel_tol,
            membership_tol: Some(p.membership_tol),
            identity_tol: Some(p.identity_tol),
        }
    }

    pub fn to_policy(&self) -> Result<Policy, DocError> {
        let d = Policy::default();
        TolerancePolicy::new(
            self.rank_rel_tol,
            self.membership_tol.unwrap_or(d.membership_tol),
            self.identity_tol.unwrap_or(d.identity_tol),
        )
        .map_err(|e| field("policy", e.to_string()))
    }
}

impl ConeDoc {
    pub fn from_cone(c: &ConvexCone<f64>) -> Self {
        let matrix = match c.rep() {
            ConeRep::Orthant => None,
            ConeRep::Simplicial(g) | ConeRep::Generated(g) => Some(g.transpose().to_rows()),
            ConeRep::Inequality(h) => Some(h.to_rows()),
        };
        Self {
            kind: c.kind().to_string(),
            dim: c.dim(),
            matrix,
        }
    }

    pub fn to_cone(&self, policy: &Policy) -> Result<ConvexCone<f64>, DocError> {
        let rows = || {
            self.matrix
                .as_ref()
                .ok_or_else(|| field("cone.matrix", format!("required for a {} cone", self.kind)))
        };
        let check_dim = |m: &Matrix| {
            if m.cols() != self.dim {
                Err(field(
                    "cone.matrix",
                    format!("rows have length {}, expected dim {}", m.cols(), self.dim),
                ))
            } else {
                Ok(())
            }
        };
        let cone = match self.kind.as_str() {
            "orthant" => ConvexCone::orthant(self.dim),
            "simplicial" => {
                let g = rows_to_matrix(rows()?, self.dim, "cone.matrix")?;
                check_dim(&g)?;
                ConvexCone::simplicial(g.transpose(), policy)?
            }
            "generated" => {
                let g = rows_to_matrix(rows()?, self.dim, "cone.matrix")?;
                check_dim(&g)?;
                ConvexCone::generated(g.transpose())?
            }
            "inequality" => {
                let h = rows_to_matrix(rows()?, self.dim, "cone.matrix")?;
                check_dim(&h)?;
                ConvexCone::inequality(h)?
            }
            other => {
                return Err(field(
                    "cone.kind",
                    format!("unknown kind '{other}' (orthant, simplicial, generated, inequality)"),
                ))
            }
        };
        Ok(cone)
    }
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            operator: OperatorDoc::Matrix {
                matrix: inst.operator.matrix.to_rows(),
            },
            cone: ConeDoc::from_cone(&inst.cone),
            dual_generators: inst.dual_generators.as_ref().map(|d| d.transpose().to_rows()),
            policy: PolicyDoc::from_policy(&inst.policy),
        }
    }

    pub fn to_instance(&self, overrides: &PolicyDoc) -> Result<Instance, DocError> {
        let merged = PolicyDoc {
            rank_rel_tol: overrides.rank_rel_tol.or(self.policy.rank_rel_tol),
            membership_tol: overrides.membership_tol.or(self.policy.membership_tol),
            identity_tol: overrides.identity_tol.or(self.policy.identity_tol),
        };
        let policy = merged.to_policy()?;
        let matrix = match &self.operator {
            OperatorDoc::Matrix { matrix } => {
                if matrix.is_empty() {
                    return Err(field("operator.matrix", "must have at least one row"));
                }
                DenseMatrix::from_rows(matrix).map_err(|e| field("operator.matrix", e.to_string()))?
            }
            OperatorDoc::Truncation { truncation } => {
                let family = TruncationFamily::parse(&truncation.family)
                    .map_err(|e| field("operator.truncation.family", e.to_string()))?;
                let spec = TruncationSpec::new(family, truncation.level)
                    .map_err(|e| field("operator.truncation.level", e.to_string()))?;
                build_truncation(spec, policy)?.0.matrix
            }
        };
        let cone = self.cone.to_cone(&policy)?;
        let dual = match &self.dual_generators {
            None => None,
            Some(rows) => {
                let m = rows_to_matrix(rows, cone.dim(), "dual_generators")?;
                if m.cols() != cone.dim() {
                    return Err(field(
                        "dual_generators",
                        format!("rows have length {}, expected {}", m.cols(), cone.dim()),
                    ));
                }
                Some(m.transpose())
            }
        };
        Ok(gramcone::theorem::GramInstance::new(matrix, cone, dual, policy)?)
    }
}

/// `{"kind": ..., "seed": ..., "level": N}` or `{"kind": ..., "seed": ...,
/// "dims": {"m": .., "n": .., "rank": ..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimsDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsDoc {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
}

impl SpecDoc {
    pub fn from_spec(s: &InstanceSpec) -> Self {
        let (level, dims) = match s.shape {
            InstanceShape::Level(l) => (Some(l), None),
            InstanceShape::Dims { m, n, rank } => (None, Some(DimsDoc { m, n, rank })),
        };
        Self {
            kind: s.kind.name().to_string(),
            seed: s.seed,
            level,
            dims,
        }
    }

    pub fn to_spec(&self) -> Result<InstanceSpec, DocError> {
        let kind = InstanceKind::parse(&self.kind).map_err(|e| field("kind", e.to_string()))?;
        let shape = match (self.level, self.dims) {
            (Some(l), None) => InstanceShape::Level(l),
            (None, Some(d)) => InstanceShape::Dims {
                m: d.m,
                n: d.n,
                rank: d.rank,
            },
            (None, None) if kind == InstanceKind::Counterexample2x2 => InstanceShape::Level(2),
            _ => return Err(field("level", "exactly one of 'level' and 'dims' is required")),
        };
        InstanceSpec::new(kind, self.seed, shape).map_err(|e| field("dims", e.to_string()))
    }
}

/// A verdict as JSON: `true`, `false`, `"marginal"` or `"not_evaluated"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerdictDoc(pub Verdict);

impl Serialize for VerdictDoc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.as_bool() {
            Some(b) => s.serialize_bool(b),
            None => s.serialize_str(self.0.label()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PerCondition<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
    pub c5: T,
    pub c6: T,
}

impl<T> PerCondition<T> {
    fn from_fn(mut f: impl FnMut(usize) -> T) -> Self {
        Self {
            c1: f(0),
            c2: f(1),
            c3: f(2),
            c4: f(3),
            c5: f(4),
            c6: f(5),
        }
    }

    pub fn as_array(&self) -> [&T; 6] {
        [&self.c1, &self.c2, &self.c3, &self.c4, &self.c5, &self.c6]
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessDoc {
    NotInCone {
        index: usize,
        source: Vec<f64>,
        point: Vec<f64>,
        separator: Option<Vec<f64>>,
        slack: f64,
    },
    ObtusePair {
        first_index: usize,
        second_index: usize,
        first: Vec<f64>,
        second: Vec<f64>,
        cosine: f64,
    },
}

impl From<&Witness<f64>> for WitnessDoc {
    fn from(w: &Witness<f64>) -> Self {
        match w.clone() {
            Witness::NotInCone {
                index,
                source,
                point,
                separator,
                slack,
            } => Self::NotInCone {
                index,
                source,
                point,
                separator,
                slack,
            },
            Witness::ObtusePair {
                first_index,
                second_index,
                first,
                second,
                cosine,
            } => Self::ObtusePair {
                first_index,
                second_index,
                first,
                second,
                cosine,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisDoc {
    pub holds: bool,
    pub one_to_one: bool,
    pub worst_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeDoc {
    pub verdict: VerdictDoc,
    pub worst_slack: Option<f64>,
    pub witness: Option<WitnessDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&ConditionOutcome<f64>> for OutcomeDoc {
    fn from(c: &ConditionOutcome<f64>) -> Self {
        Self {
            verdict: VerdictDoc(c.verdict),
            worst_slack: c.worst_slack,
            witness: c.witness.as_ref().map(WitnessDoc::from),
            note: c.note.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaDoc {
    pub image_in_dual: VerdictDoc,
    pub image_in_dual_worst: Option<f64>,
    pub gram_positivity: VerdictDoc,
    pub gram_positivity_worst: Option<f64>,
    pub gram_positivity_matches_cond4: Option<bool>,
    pub sampled_pairs: usize,
}

impl From<&LemmaReport<f64>> for LemmaDoc {
    fn from(l: &LemmaReport<f64>) -> Self {
        Self {
            image_in_dual: VerdictDoc(l.image_in_dual),
            image_in_dual_worst: l.image_in_dual_worst,
            gram_positivity: VerdictDoc(l.gram_positivity),
            gram_positivity_worst: l.gram_positivity_worst,
            gram_positivity_matches_cond4: l.gram_positivity_matches_cond4,
            sampled_pairs: l.sampled_pairs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub verdicts: PerCondition<VerdictDoc>,
    pub agree: bool,
    pub marginal: bool,
    pub incomplete: bool,
    pub witnesses: PerCondition<Option<WitnessDoc>>,
    pub residual_summary: PerCondition<Option<f64>>,
    pub notes: PerCondition<Option<String>>,
    pub hypothesis: HypothesisDoc,
    pub cond3_routes_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_cond5: Option<OutcomeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<LemmaDoc>,
}

impl From<&ConditionReport<f64>> for ReportDoc {
    fn from(r: &ConditionReport<f64>) -> Self {
        let c = &r.conditions;
        Self {
            verdicts: PerCondition::from_fn(|i| VerdictDoc(c[i].verdict)),
            agree: r.agree,
            marginal: r.marginal,
            incomplete: r.incomplete,
            witnesses: PerCondition::from_fn(|i| c[i].witness.as_ref().map(WitnessDoc::from)),
            residual_summary: PerCondition::from_fn(|i| c[i].worst_slack),
            notes: PerCondition::from_fn(|i| c[i].note.clone()),
            hypothesis: HypothesisDoc {
                holds: r.hypothesis.holds,
                one_to_one: r.hypothesis.one_to_one,
                worst_slack: r.hypothesis.worst_slack,
            },
            cond3_routes_agree: r.cond3_routes_agree,
            strict_cond5: r.strict_cond5.as_ref().map(OutcomeDoc::from),
            lemmas: r.lemmas.as_ref().map(LemmaDoc::from),
        }
    }
}
