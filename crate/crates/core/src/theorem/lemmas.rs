use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConditionOutcome, GramAnalysis, Verdict};
use crate::cone::ConvexCone;
use crate::error::Result;
use crate::numlin::{dot, norm2, normalized, DenseMatrix};
use crate::scalar::Real;

const SAMPLED_PAIRS: usize = 64;
const SAMPLE_SEED: u64 = 0x5eed_cafe;

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport<T> {
    /// `u ∈ C* ∩ R(T) ⟹ T*u ∈ K*`, over the rays of `C* ∩ R(T)`.
    pub image_in_dual: Verdict,
    pub image_in_dual_worst: Option<T>,
    /// `⟨T*Tx, y⟩ ≥ 0` whenever `T*Tx, T*Ty ∈ K*`, over ray pairs of the
    /// solution set plus random nonnegative combinations.
    pub gram_positivity: Verdict,
    pub gram_positivity_worst: Option<T>,
    /// Gram positivity and acuteness of `C* ∩ R(T)` reach the same verdict
    /// (`None` if either is not definite).
    pub gram_positivity_matches_cond4: Option<bool>,
    pub sampled_pairs: usize,
}

/// Helper-lemma checks. `cond4` is the already computed acuteness outcome
/// for `C* ∩ R(T)`.
pub fn lemma_checks<T: Real>(an: &GramAnalysis<'_, T>, cond4: &ConditionOutcome<T>) -> Result<LemmaReport<T>> {
    let tol = an.tol();
    let t = &an.operator().matrix;

    let (image_in_dual, image_in_dual_worst) = match an.cstar_in_range()? {
        Err(_) => (Verdict::NotEvaluated, None),
        Ok(dd) => {
            let kstar = match &an.inst.dual_generators {
                Some(d) => ConvexCone::generated(nonzero_columns(d)?)?,
                None => an.inst.cone.dual()?,
            };
            let mut worst = T::zero();
            for u in dd.generators().columns() {
                let v = t.tr_matvec(&u);
                if an.negligible(&v, t.frobenius_norm()) {
                    continue;
                }
                let unit = normalized(&v).expect("nonzero");
                worst = worst.min(kstar.contains(&unit, an.policy())?.slack);
            }
            (Verdict::from_slack(worst, tol), Some(worst))
        }
    };

    let (gram_positivity, gram_positivity_worst, sampled_pairs) = match an.monotone_set()? {
        Err(_) => (Verdict::NotEvaluated, None, 0),
        Ok(dd) => {
            let gens = dd.generators();
            let images: Vec<Vec<T>> = gens.columns().iter().map(|x| t.matvec(x)).collect();
            let mut worst = T::zero();
            let cosine = |a: &[T], b: &[T]| -> Option<T> {
                let (na, nb) = (norm2(a), norm2(b));
                let cut = T::lit(1e3) * T::epsilon() * t.frobenius_norm();
                (na > cut && nb > cut).then(|| dot(a, b) / (na * nb))
            };
            for i in 0..images.len() {
                for j in i..images.len() {
                    if let Some(c) = cosine(&images[i], &images[j]) {
                        worst = worst.min(c);
                    }
                }
            }
            let mut sampled = 0;
            if !images.is_empty() {
                let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
                let k = images.len();
                let combo = |rng: &mut ChaCha8Rng| -> Vec<T> {
                    let mut acc = vec![T::zero(); images[0].len()];
                    for img in &images {
                        let c = T::lit(rng.gen::<f64>());
                        for (a, &v) in acc.iter_mut().zip(img) {
                            *a = *a + c * v;
                        }
                    }
                    acc
                };
                for _ in 0..SAMPLED_PAIRS.min(k * k * 4) {
                    let a = combo(&mut rng);
                    let b = combo(&mut rng);
                    if let Some(c) = cosine(&a, &b) {
                        worst = worst.min(c);
                        sampled += 1;
                    }
                }
            }
            (Verdict::from_slack(worst, tol), Some(worst), sampled)
        }
    };

    let gram_positivity_matches_cond4 = match (gram_positivity.as_bool(), cond4.verdict.as_bool()) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };

    Ok(LemmaReport {
        image_in_dual,
        image_in_dual_worst,
        gram_positivity,
        gram_positivity_worst,
        gram_positivity_matches_cond4,
        sampled_pairs,
    })
}

fn nonzero_columns<T: Real>(d: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let cols: Vec<Vec<T>> = d.columns().into_iter().filter(|c| norm2(c) > T::zero()).collect();
    DenseMatrix::from_columns(d.rows(), &cols)
}
