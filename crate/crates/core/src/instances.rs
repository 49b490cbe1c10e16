//! Deterministic instance construction: truncations of the three worked
//! examples, the 2×2 counterexample, and seeded random families.
//!
//! Random instances are generated in `f64` from a ChaCha8 stream keyed by
//! the seed, then cast, so a seed yields the same instance for every
//! scalar type up to rounding.
//!
//! Each random family satisfies `T†T K ⊆ K` by construction: either `T` has
//! full column rank, or `K` is generated inside `R(T*)` where `T†T` is the
//! identity. About half of the seeds plant a positive instance; the others
//! draw `T` with independent singular vectors, which usually breaks
//! positivity once the cone has two or more extreme rays.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cone::ConvexCone;
use crate::error::{Error, Result};
use crate::numlin::{svd, DenseMatrix, TolerancePolicy};
use crate::operator::{build_truncation, TruncationFamily, TruncationSpec};
use crate::scalar::Real;
use crate::theorem::GramInstance;

/// Largest accepted condition number for random simplicial generators.
const MAX_GENERATOR_COND: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    Paper41,
    Paper42,
    Paper43,
    RandomFullRank,
    RandomRankDeficient,
    RandomSimplicialCone,
    Counterexample2x2,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 7] = [
        Self::Paper41,
        Self::Paper42,
        Self::Paper43,
        Self::RandomFullRank,
        Self::RandomRankDeficient,
        Self::RandomSimplicialCone,
        Self::Counterexample2x2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Paper41 => "paper41",
            Self::Paper42 => "paper42",
            Self::Paper43 => "paper43",
            Self::RandomFullRank => "random_full_rank",
            Self::RandomRankDeficient => "random_rank_deficient",
            Self::RandomSimplicialCone => "random_simplicial_cone",
            Self::Counterexample2x2 => "counterexample2x2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key || k.name().replace('_', "") == key.replace('_', ""))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown instance kind '{s}'")))
    }

    pub fn is_random(self) -> bool {
        matches!(
            self,
            Self::RandomFullRank | Self::RandomRankDeficient | Self::RandomSimplicialCone
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceShape {
    /// Truncation level `N` for the worked examples.
    Level(usize),
    /// `m × n` operator of rank `rank`.
    Dims { m: usize, n: usize, rank: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub seed: u64,
    pub shape: InstanceShape,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, seed: u64, shape: InstanceShape) -> Result<Self> {
        let spec = Self { kind, seed, shape };
        spec.validate()?;
        Ok(spec)
    }

    pub fn level(kind: InstanceKind, level: usize) -> Result<Self> {
        Self::new(kind, 0, InstanceShape::Level(level))
    }

    pub fn dims(kind: InstanceKind, seed: u64, m: usize, n: usize, rank: usize) -> Result<Self> {
        Self::new(kind, seed, InstanceShape::Dims { m, n, rank })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match (self.kind, self.shape) {
            (InstanceKind::Paper41 | InstanceKind::Paper42 | InstanceKind::Paper43, InstanceShape::Level(l)) => {
                if l < 2 {
                    return bad(format!("truncation level must be at least 2, got {l}"));
                }
                Ok(())
            }
            (InstanceKind::Paper41 | InstanceKind::Paper42 | InstanceKind::Paper43, _) => {
                bad(format!("{} needs a truncation level", self.kind.name()))
            }
            (InstanceKind::Counterexample2x2, InstanceShape::Dims { m: 2, n: 2, rank: 2 }) => Ok(()),
            (InstanceKind::Counterexample2x2, InstanceShape::Level(_)) => Ok(()),
            (InstanceKind::Counterexample2x2, _) => bad("counterexample2x2 is fixed at 2x2".into()),
            (kind, InstanceShape::Level(_)) => bad(format!("{} needs dimensions", kind.name())),
            (kind, InstanceShape::Dims { m, n, rank }) => {
                if m == 0 || n == 0 || rank == 0 {
                    return bad(format!("dimensions must be positive, got {m}x{n} rank {rank}"));
                }
                if rank > m.min(n) {
                    return bad(format!("rank {rank} exceeds min({m}, {n})"));
                }
                match kind {
                    InstanceKind::RandomFullRank if rank != n => {
                        bad(format!("full column rank needs rank = n = {n} <= m = {m}"))
                    }
                    InstanceKind::RandomRankDeficient if rank >= n => {
                        bad(format!("rank-deficient needs rank < n, got rank {rank}, n {n}"))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Builds the instance described by `spec` with the default policy.
pub fn make<T: Real>(spec: &InstanceSpec) -> Result<GramInstance<T>> {
    make_with_policy(spec, TolerancePolicy::default())
}

pub fn make_with_policy<T: Real>(spec: &InstanceSpec, policy: TolerancePolicy<T>) -> Result<GramInstance<T>> {
    spec.validate()?;
    match (spec.kind, spec.shape) {
        (InstanceKind::Paper41, InstanceShape::Level(n)) => {
            let (op, _) = build_truncation(TruncationSpec::new(TruncationFamily::Example41, n)?, policy)?;
            GramInstance::new(op.matrix, ConvexCone::orthant(n), None, policy)
        }
        (InstanceKind::Paper42, InstanceShape::Level(n)) => {
            let (op, _) = build_truncation(TruncationSpec::new(TruncationFamily::Example42, n)?, policy)?;
            let gens: Vec<Vec<T>> = (1..n).map(|i| unit(n, i)).collect();
            let cone = ConvexCone::generated(DenseMatrix::from_columns(n, &gens)?)?;
            GramInstance::new(op.matrix, cone, None, policy)
        }
        (InstanceKind::Paper43, InstanceShape::Level(n)) => {
            let (op, _) = build_truncation(TruncationSpec::new(TruncationFamily::Example43, n)?, policy)?;
            GramInstance::new(op.matrix, ConvexCone::orthant(n), None, policy)
        }
        (InstanceKind::Counterexample2x2, _) => GramInstance::new(
            DenseMatrix::from_rows(&[[T::one(), T::one()], [T::zero(), T::one()]])?,
            ConvexCone::orthant(2),
            None,
            policy,
        ),
        (kind, InstanceShape::Dims { m, n, rank }) => random_instance(kind, spec.seed, m, n, rank, policy),
        _ => unreachable!("validated above"),
    }
}

/// Random spec for sweep seed `seed`: the kind cycles with `seed % 3` and
/// the dimensions (at most `max_m × max_n`) are drawn from the seed.
pub fn sweep_spec(seed: u64, max_m: usize, max_n: usize) -> Result<InstanceSpec> {
    if max_m == 0 || max_n == 0 {
        return Err(Error::InvalidSpec("dimension caps must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1b5_4a32_d192_ed03);
    let kind = match seed % 3 {
        0 => InstanceKind::RandomFullRank,
        1 => InstanceKind::RandomRankDeficient,
        _ => InstanceKind::RandomSimplicialCone,
    };
    let (kind, m, n, rank) = match kind {
        InstanceKind::RandomRankDeficient if max_n >= 2 => {
            let n = rng.gen_range(2..=max_n);
            let m = rng.gen_range(1..=max_m);
            let rank = rng.gen_range(1..=m.min(n - 1));
            (kind, m, n, rank)
        }
        InstanceKind::RandomSimplicialCone if rng.gen_bool(0.5) && max_n >= 2 => {
            let n = rng.gen_range(2..=max_n);
            let m = rng.gen_range(1..=max_m);
            let rank = rng.gen_range(1..=m.min(n));
            (kind, m, n, rank)
        }
        _ => {
            let kind = if kind == InstanceKind::RandomRankDeficient {
                InstanceKind::RandomFullRank
            } else {
                kind
            };
            let n = rng.gen_range(1..=max_n.min(max_m));
            let m = rng.gen_range(n..=max_m);
            (kind, m, n, n)
        }
    };
    InstanceSpec::dims(kind, seed, m, n, rank)
}

/// Random `m × n` matrix (`m ≤ max_m`, `n ≤ max_n`) of random rank, with
/// nonzero singular values log-uniform in `[0.2, 5]`.
pub fn random_matrix(seed: u64, max_m: usize, max_n: usize) -> Result<DenseMatrix<f64>> {
    if max_m == 0 || max_n == 0 {
        return Err(Error::InvalidSpec("dimension caps must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let m = rng.gen_range(1..=max_m);
    let n = rng.gen_range(1..=max_n);
    let r = rng.gen_range(0..=m.min(n));
    if r == 0 {
        return Ok(DenseMatrix::zeros(m, n));
    }
    let u = orthonormal(&mut rng, m, r)?;
    let v = orthonormal(&mut rng, n, r)?;
    let sigma: Vec<f64> = (0..r).map(|_| rng.gen_range(0.2f64.ln()..5f64.ln()).exp()).collect();
    Ok(u.matmul(&DenseMatrix::from_diag(&sigma)).matmul(&v.transpose()))
}

fn unit<T: Real>(dim: usize, i: usize) -> Vec<T> {
    let mut e = vec![T::zero(); dim];
    e[i] = T::one();
    e
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<f64> {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_row_major(rows, cols, data).expect("finite samples")
}

/// `rows × cols` matrix with orthonormal columns (`cols ≤ rows`).
fn orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Result<DenseMatrix<f64>> {
    let f = svd(&gaussian(rng, rows, cols))?;
    Ok(f.range_basis(cols))
}

/// Well-conditioned `r × r` generator matrix `I + 0.5 R/√r`.
fn simplicial_generators(rng: &mut ChaCha8Rng, r: usize) -> Result<DenseMatrix<f64>> {
    loop {
        let g = DenseMatrix::identity(r).add(&gaussian(rng, r, r).scale(0.5 / (r as f64).sqrt()));
        let s = svd(&g)?.singular_values;
        if s[r - 1] > 0.0 && s[0] / s[r - 1] <= MAX_GENERATOR_COND {
            return Ok(g);
        }
    }
}

/// Extra generators for a non-simplicial cone containing the orthant: each
/// has positive entries except one slightly negative coordinate.
fn orthant_extensions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let count = rng.gen_range(1..=2);
    (0..count)
        .map(|_| {
            let neg = rng.gen_range(0..n);
            (0..n)
                .map(|i| {
                    if i == neg {
                        -rng.gen_range(0.05..0.5)
                    } else {
                        rng.gen_range(0.2..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Square root of the inverse of a symmetric positive definite `w`:
/// `R = S^{-1/2} Uᵀ` so that `RᵀR = w⁻¹`.
fn inverse_root(w: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
    let f = svd(&w.symmetrized())?;
    let r = w.rows();
    let mut out = f.left_vectors.transpose();
    for i in 0..r {
        let s = f.singular_values[i].sqrt().recip();
        for j in 0..r {
            out[(i, j)] *= s;
        }
    }
    Ok(out)
}

/// `r × r` symmetric positive definite matrix with nonnegative entries.
fn nonneg_pd(rng: &mut ChaCha8Rng, r: usize) -> DenseMatrix<f64> {
    let k = rng.gen_range(1..=r);
    let data = (0..r * k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let b = DenseMatrix::from_row_major(r, k, data).expect("finite");
    let d: Vec<f64> = (0..r).map(|_| rng.gen_range(0.3..1.5)).collect();
    DenseMatrix::from_diag(&d).add(&b.matmul(&b.transpose()))
}

fn random_instance<T: Real>(
    kind: InstanceKind,
    seed: u64,
    m: usize,
    n: usize,
    r: usize,
    policy: TolerancePolicy<T>,
) -> Result<GramInstance<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = rng.gen_bool(0.5);

    // Cone in coordinates of R(T*): K = V_r · cone(G).
    let (v, g, cone) = match kind {
        InstanceKind::RandomFullRank if rng.gen_bool(0.5) => {
            // Orthant, or a non-simplicial cone containing it.
            let v = DenseMatrix::identity(n);
            if rng.gen_bool(0.5) || n == 1 {
                (v, DenseMatrix::identity(n), ConvexCone::orthant(n))
            } else {
                let mut cols: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i)).collect();
                cols.extend(orthant_extensions(&mut rng, n));
                let cone = ConvexCone::generated(DenseMatrix::from_columns(n, &cols)?)?;
                return finish(kind, &mut rng, planted, m, n, None, cone, policy);
            }
        }
        InstanceKind::RandomFullRank => (
            DenseMatrix::identity(n),
            DenseMatrix::identity(n),
            ConvexCone::orthant(n),
        ),
        _ => {
            let g = if kind == InstanceKind::RandomSimplicialCone {
                simplicial_generators(&mut rng, r)?
            } else if rng.gen_bool(0.5) {
                DenseMatrix::identity(r)
            } else {
                simplicial_generators(&mut rng, r)?
            };
            if r == n {
                let cone = ConvexCone::simplicial(g.clone(), &TolerancePolicy::default())?;
                (DenseMatrix::identity(n), g, cone)
            } else {
                let v = orthonormal(&mut rng, n, r)?;
                let cone = ConvexCone::generated(v.matmul(&g))?;
                (v, g, cone)
            }
        }
    };
    finish(kind, &mut rng, planted, m, n, Some((v, g)), cone, policy)
}

/// Draws `T = Q · R · V_rᵀ`. Planted instances choose `R` so that the
/// pseudoinverse Gram in `R(T*)` coordinates is `G N Gᵀ` with `N` entrywise
/// nonnegative, which makes condition 1 hold. Otherwise `R = diag(σ)·Wᵀ`
/// with `σ` log-uniform in `[0.3, 3]` and `W` a random rotation.
#[allow(clippy::too_many_arguments)]
fn finish<T: Real>(
    kind: InstanceKind,
    rng: &mut ChaCha8Rng,
    planted: bool,
    m: usize,
    n: usize,
    frame: Option<(DenseMatrix<f64>, DenseMatrix<f64>)>,
    cone: ConvexCone<f64>,
    policy: TolerancePolicy<T>,
) -> Result<GramInstance<T>> {
    let (v, r_mat) = match frame {
        Some((v, g)) => {
            let r = g.rows();
            let r_mat = if planted {
                let w = g.matmul(&nonneg_pd(rng, r)).matmul(&g.transpose());
                inverse_root(&w)?
            } else {
                generic_core(rng, r)?
            };
            (v, r_mat)
        }
        None => {
            // Cone containing the orthant: its dual lies in the orthant, so
            // any positive diagonal Gram keeps it inside K.
            let r_mat = if planted {
                let d: Vec<f64> = (0..n).map(|_| log_uniform(rng)).collect();
                DenseMatrix::from_diag(&d)
            } else {
                generic_core(rng, n)?
            };
            (DenseMatrix::identity(n), r_mat)
        }
    };
    let r = r_mat.rows();
    let q = orthonormal(rng, m, r)?;
    let t = q.matmul(&r_mat).matmul(&v.transpose());
    let cone = cast_cone::<T>(&cone)?;
    debug_assert!(kind.is_random());
    GramInstance::new(t.cast(), cone, None, policy)
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(0.3f64.ln()..3.0f64.ln())).exp()
}

fn generic_core(rng: &mut ChaCha8Rng, r: usize) -> Result<DenseMatrix<f64>> {
    let sigma: Vec<f64> = (0..r).map(|_| log_uniform(rng)).collect();
    let w = orthonormal(rng, r, r)?;
    Ok(DenseMatrix::from_diag(&sigma).matmul(&w.transpose()))
}

fn cast_cone<T: Real>(c: &ConvexCone<f64>) -> Result<ConvexCone<T>> {
    use crate::cone::ConeRep;
    match c.rep() {
        ConeRep::Orthant => Ok(ConvexCone::orthant(c.dim())),
        ConeRep::Simplicial(g) => ConvexCone::simplicial(g.cast(), &TolerancePolicy::default()),
        ConeRep::Generated(g) => ConvexCone::generated(g.cast()),
        ConeRep::Inequality(h) => ConvexCone::inequality(h.cast()),
    }
}
