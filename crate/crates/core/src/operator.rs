//! Operators above raw matrices: adjoints, Gram operators, the
//! Moore-Penrose inverse with its defining properties checked, minimal-norm
//! least squares, and singular systems used to truncate diagonal operators
//! on sequence and function spaces.

use crate::error::{Error, Result};
use crate::numlin::{dot, norm2, orthogonal_complement, svd, DenseMatrix, SvdFactors, TolerancePolicy};
use crate::scalar::Real;

/// A finite matrix standing in for a densely defined closed-range operator.
/// At finite scale the domain is the whole space and every range is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator<T> {
    pub matrix: DenseMatrix<T>,
    pub policy: TolerancePolicy<T>,
}

impl<T: Real> MatrixOperator<T> {
    pub fn new(matrix: DenseMatrix<T>, policy: TolerancePolicy<T>) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        policy.validate()?;
        Ok(Self { matrix, policy })
    }

    pub fn with_default_policy(matrix: DenseMatrix<T>) -> Result<Self> {
        Self::new(matrix, TolerancePolicy::default())
    }

    /// `(codomain dim, domain dim)`.
    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.matrix.matvec(x)
    }

    fn wrap(&self, matrix: DenseMatrix<T>) -> Self {
        Self {
            matrix,
            policy: self.policy,
        }
    }

    /// `T*`: the transpose, characterised by `⟨Tx, y⟩ = ⟨x, T*y⟩`.
    pub fn adjoint(&self) -> Self {
        self.wrap(self.matrix.transpose())
    }

    /// The Gram operator `T*T`, symmetrised after assembly.
    pub fn gram(&self) -> Self {
        self.wrap(self.matrix.transpose().matmul(&self.matrix).symmetrized())
    }

    /// `TT*`, symmetrised after assembly.
    pub fn co_gram(&self) -> Self {
        self.wrap(self.matrix.matmul(&self.matrix.transpose()).symmetrized())
    }

    pub fn svd(&self) -> Result<SvdFactors<T>> {
        svd(&self.matrix)
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.svd()?.rank(&self.policy))
    }

    /// Moore-Penrose inverse without the property check.
    pub fn pinv_unchecked(&self) -> Result<Self> {
        let f = self.svd()?;
        let r = f.rank(&self.policy);
        Ok(self.wrap(f.pinv_with_rank(r)))
    }

    /// Moore-Penrose inverse `T†`, checked against its defining properties:
    /// `TT† = P_R(T)`, `T†T = P_N(T)⊥` and `N(T†) = R(T)⊥`.
    pub fn mp_inverse(&self) -> Result<Self> {
        let f = self.svd()?;
        let r = f.rank(&self.policy);
        let dagger = f.pinv_with_rank(r);

        let ur = f.range_basis(r);
        let vr = f.rowspace_basis(r);
        let p_range = ur.matmul(&ur.transpose());
        let p_row = vr.matmul(&vr.transpose());
        let bound = self.policy.identity_tol * self.matrix.frobenius_norm().max(T::one());

        let range_res = self.matrix.matmul(&dagger).sub(&p_range).frobenius_norm();
        check_axiom("T T† = P_R(T)", range_res, bound)?;
        let row_res = dagger.matmul(&self.matrix).sub(&p_row).frobenius_norm();
        check_axiom("T† T = P_N(T)⊥", row_res, bound)?;
        let range_perp = orthogonal_complement(&ur);
        let null_res = dagger.matmul(&range_perp).frobenius_norm();
        check_axiom("N(T†) = R(T)⊥", null_res, bound)?;

        Ok(self.wrap(dagger))
    }

    /// The least-squares solution of minimal norm, `x = T†y`.
    pub fn least_squares_min_norm(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} entries, operator maps into R^{}",
                y.len(),
                self.matrix.rows()
            )));
        }
        Ok(self.pinv_unchecked()?.apply(y))
    }

    /// Residuals of the product and representation identities for
    /// pseudoinverses of Gram operators.
    pub fn verify_identities(&self) -> Result<IdentityReport<T>> {
        let t = &self.matrix;
        let ts = t.transpose();
        let pinv = |m: &DenseMatrix<T>| -> Result<DenseMatrix<T>> {
            let f = svd(m)?;
            Ok(f.pinv_with_rank(f.rank(&self.policy)))
        };
        let t_dag = pinv(t)?;
        let ts_dag = pinv(&ts)?;
        let gram_dag = pinv(&ts.matmul(t).symmetrized())?;
        let cogram_dag = pinv(&t.matmul(&ts).symmetrized())?;
        let t_dag_dag = pinv(&t_dag)?;

        let scale = t.frobenius_norm().max(T::one());
        let bound = self.policy.identity_tol * scale;
        let entry = |name: &'static str, lhs: DenseMatrix<T>, rhs: &DenseMatrix<T>| {
            let residual = lhs.sub(rhs).frobenius_norm();
            IdentityResidual {
                name,
                residual,
                passed: residual <= bound,
            }
        };
        let entries = vec![
            entry("(T*T)† = T†(T*)†", gram_dag.clone(), &t_dag.matmul(&ts_dag)),
            entry("(TT*)† = (T*)†T†", cogram_dag.clone(), &ts_dag.matmul(&t_dag)),
            entry("(T*T)†T* = T†", gram_dag.matmul(&ts), &t_dag),
            entry("T*(TT*)† = T†", ts.matmul(&cogram_dag), &t_dag),
            entry("T†† = T", t_dag_dag, t),
            entry("(T*)† = (T†)*", ts_dag, &t_dag.transpose()),
        ];
        Ok(IdentityReport { scale, bound, entries })
    }
}

fn check_axiom<T: Real>(axiom: &'static str, residual: T, bound: T) -> Result<()> {
    if residual <= bound {
        Ok(())
    } else {
        Err(Error::AxiomViolation {
            axiom,
            residual: residual.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual<T> {
    pub name: &'static str,
    pub residual: T,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport<T> {
    /// `max(1, ‖T‖_F)`
    pub scale: T,
    /// `identity_tol · scale`
    pub bound: T,
    pub entries: Vec<IdentityResidual<T>>,
}

impl<T: Real> IdentityReport<T> {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn worst(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, e| m.max(e.residual))
    }
}

/// One spectral triple: `T v = σ u` with `v` in the domain and `u` in the
/// codomain, both given as coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple<T> {
    pub index: usize,
    pub sigma: T,
    pub left: Vec<T>,
    pub right: Vec<T>,
}

/// A truncated singular system `T = Σ σₙ uₙ vₙᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSystem<T> {
    terms: Vec<SingularTriple<T>>,
    range_dim: usize,
    domain_dim: usize,
}

impl<T: Real> SingularSystem<T> {
    /// Validates positivity of every σ and orthonormality of both vector
    /// families within `tol_orth`.
    pub fn new(terms: Vec<SingularTriple<T>>, range_dim: usize, domain_dim: usize, tol_orth: T) -> Result<Self> {
        for t in &terms {
            if !t.sigma.is_finite() || t.sigma <= T::zero() {
                return Err(Error::InvalidSpec(format!(
                    "singular value for index {} must be positive, got {}",
                    t.index, t.sigma
                )));
            }
            if t.left.len() != range_dim || t.right.len() != domain_dim {
                return Err(Error::DimensionMismatch(format!(
                    "term {} has vectors of length {}/{}, expected {range_dim}/{domain_dim}",
                    t.index,
                    t.left.len(),
                    t.right.len()
                )));
            }
        }
        for (a, ta) in terms.iter().enumerate() {
            for tb in &terms[a..] {
                let want = if ta.index == tb.index { T::one() } else { T::zero() };
                if (dot(&ta.left, &tb.left) - want).abs() > tol_orth
                    || (dot(&ta.right, &tb.right) - want).abs() > tol_orth
                {
                    return Err(Error::InvalidSpec(format!(
                        "singular vectors {} and {} are not orthonormal",
                        ta.index, tb.index
                    )));
                }
            }
        }
        Ok(Self {
            terms,
            range_dim,
            domain_dim,
        })
    }

    pub fn terms(&self) -> &[SingularTriple<T>] {
        &self.terms
    }

    pub fn range_dim(&self) -> usize {
        self.range_dim
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    /// The matrix `Σ σₙ uₙ vₙᵀ`.
    pub fn assemble(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.range_dim, self.domain_dim);
        for t in &self.terms {
            for (i, &u) in t.left.iter().enumerate() {
                if u == T::zero() {
                    continue;
                }
                for (j, &v) in t.right.iter().enumerate() {
                    m[(i, j)] = m[(i, j)] + t.sigma * u * v;
                }
            }
        }
        m
    }

    /// `T†y = Σ σₙ⁻¹ ⟨y, uₙ⟩ vₙ` for `y` in codomain coefficients.
    pub fn spectral_pinv_apply(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.range_dim {
            return Err(Error::DimensionMismatch(format!(
                "input has {} coefficients, range has {}",
                y.len(),
                self.range_dim
            )));
        }
        let mut x = vec![T::zero(); self.domain_dim];
        for t in &self.terms {
            let c = dot(y, &t.left) / t.sigma;
            for (xi, &v) in x.iter_mut().zip(&t.right) {
                *xi = *xi + c * v;
            }
        }
        Ok(x)
    }
}

/// The three diagonal operators that get truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TruncationFamily {
    /// `(x₁, x₂, …) ↦ (x₁, 2x₂, 3x₃, …)` on ℓ².
    Example41,
    /// `(x₁, x₂, …) ↦ (0, 2x₂, 3x₃, …)` on ℓ².
    Example42,
    /// `d/dt` on `L²[0, π]` with Dirichlet conditions, in sine/cosine bases.
    Example43,
}

impl TruncationFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Example41 => "example41",
            Self::Example42 => "example42",
            Self::Example43 => "example43",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-', '.'], "").as_str() {
            "example41" | "paper41" => Ok(Self::Example41),
            "example42" | "paper42" => Ok(Self::Example42),
            "example43" | "paper43" => Ok(Self::Example43),
            _ => Err(Error::InvalidSpec(format!("unknown truncation family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub family: TruncationFamily,
    pub level: usize,
}

impl TruncationSpec {
    pub fn new(family: TruncationFamily, level: usize) -> Result<Self> {
        if level < 2 {
            return Err(Error::InvalidSpec(format!(
                "truncation level must be at least 2, got {level}"
            )));
        }
        Ok(Self { family, level })
    }
}

fn unit<T: Real>(dim: usize, i: usize) -> Vec<T> {
    let mut e = vec![T::zero(); dim];
    e[i] = T::one();
    e
}

/// Truncates one of the diagonal families at level `N`.
///
/// * `Example41`: `diag(1, …, N)`.
/// * `Example42`: `diag(0, 2, …, N)`; index 1 spans the kernel.
/// * `Example43`: `d/dt` from sine coefficients `φₙ = sin(nt)`, `n = 1..N`,
///   to cosine coefficients. The codomain carries `N + 1` coordinates: index
///   0 is the constant function, which spans `R(L)⊥`, and index `n` is
///   `ψₙ ∝ cos(nt)`. Since `L φₙ = n ψₙ` the system has `σₙ = n`, and the
///   Gram operator is `diag(n²)` in the sine basis.
pub fn build_truncation<T: Real>(
    spec: TruncationSpec,
    policy: TolerancePolicy<T>,
) -> Result<(MatrixOperator<T>, SingularSystem<T>)> {
    let spec = TruncationSpec::new(spec.family, spec.level)?;
    let n = spec.level;
    let tol = policy.identity_tol;
    let system = match spec.family {
        TruncationFamily::Example41 => SingularSystem::new(
            (1..=n)
                .map(|k| SingularTriple {
                    index: k,
                    sigma: T::from_count(k),
                    left: unit(n, k - 1),
                    right: unit(n, k - 1),
                })
                .collect(),
            n,
            n,
            tol,
        )?,
        TruncationFamily::Example42 => SingularSystem::new(
            (2..=n)
                .map(|k| SingularTriple {
                    index: k,
                    sigma: T::from_count(k),
                    left: unit(n, k - 1),
                    right: unit(n, k - 1),
                })
                .collect(),
            n,
            n,
            tol,
        )?,
        TruncationFamily::Example43 => SingularSystem::new(
            (1..=n)
                .map(|k| SingularTriple {
                    index: k,
                    sigma: T::from_count(k),
                    left: unit(n + 1, k),
                    right: unit(n, k - 1),
                })
                .collect(),
            n + 1,
            n,
            tol,
        )?,
    };
    let op = MatrixOperator::new(system.assemble(), policy)?;
    Ok((op, system))
}

/// Euclidean distance between two vectors, for tests and reports.
pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    norm2(&crate::numlin::sub_vec(a, b))
}
