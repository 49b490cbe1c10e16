use super::{ConditionOutcome, GramAnalysis, Verdict, Witness};
use crate::cone::{min_pairwise_cosine, ConvexCone};
use crate::error::Result;
use crate::numlin::{normalized, orthogonal_complement, DenseMatrix};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck<T> {
    pub holds: bool,
    /// `T` is one-to-one, so `T†T = I` and the check is skipped.
    pub one_to_one: bool,
    pub worst_slack: T,
    /// First generator index whose image `T†T g` leaves `K`, that image,
    /// and its slack.
    pub violation: Option<(usize, Vec<T>, T)>,
}

/// `T†T K ⊆ K`, checked generator by generator.
pub fn check_hypothesis<T: Real>(an: &GramAnalysis<'_, T>) -> Result<HypothesisCheck<T>> {
    let n = an.operator().shape().1;
    if an.rank == n {
        return Ok(HypothesisCheck {
            holds: true,
            one_to_one: true,
            worst_slack: T::zero(),
            violation: None,
        });
    }
    let vr = &an.row_basis;
    let mut worst = T::zero();
    let mut violation = None;
    for (j, g) in an.k_generators.columns().iter().enumerate() {
        let img = vr.matvec(&vr.tr_matvec(g));
        let (slack, _) = slack_in(an, &an.inst.cone, &img, crate::numlin::norm2(g))?;
        worst = worst.min(slack);
        if slack < -an.tol() && violation.is_none() {
            violation = Some((j, img, slack));
        }
    }
    Ok(HypothesisCheck {
        holds: violation.is_none(),
        one_to_one: false,
        worst_slack: worst,
        violation,
    })
}

/// Scale-free membership slack of `v` in `cone`. Vectors negligible next to
/// `reference` count as the origin, which lies in every cone.
fn slack_in<T: Real>(
    an: &GramAnalysis<'_, T>,
    cone: &ConvexCone<T>,
    v: &[T],
    reference: T,
) -> Result<(T, Option<Vec<T>>)> {
    if an.negligible(v, reference) {
        return Ok((T::zero(), None));
    }
    let unit = normalized(v).expect("non-negligible vector is nonzero");
    let cert = cone.contains(&unit, an.policy())?;
    Ok((cert.slack, cert.separator))
}

struct Item<T> {
    source: Vec<T>,
    point: Vec<T>,
    reference: T,
}

fn membership_outcome<T: Real>(
    an: &GramAnalysis<'_, T>,
    cone: &ConvexCone<T>,
    items: impl IntoIterator<Item = Item<T>>,
) -> Result<ConditionOutcome<T>> {
    let tol = an.tol();
    let mut worst = T::zero();
    let mut witness = None;
    for (index, it) in items.into_iter().enumerate() {
        let (slack, separator) = slack_in(an, cone, &it.point, it.reference)?;
        worst = worst.min(slack);
        if slack < -tol && witness.is_none() {
            witness = Some(Witness::NotInCone {
                index,
                source: it.source,
                point: normalized(&it.point).unwrap_or(it.point),
                separator,
                slack,
            });
        }
    }
    Ok(ConditionOutcome {
        verdict: Verdict::from_slack(worst, tol),
        worst_slack: Some(worst),
        witness,
        note: None,
    })
}

fn acuteness_outcome<T: Real>(tol: T, gens: &DenseMatrix<T>) -> ConditionOutcome<T> {
    match min_pairwise_cosine(gens) {
        None => ConditionOutcome {
            verdict: Verdict::Holds,
            worst_slack: Some(T::zero()),
            witness: None,
            note: Some("no nonzero generators".into()),
        },
        Some((c, i, j)) => {
            let worst = c.min(T::zero());
            ConditionOutcome {
                verdict: Verdict::from_slack(worst, tol),
                worst_slack: Some(worst),
                witness: (c < -tol).then(|| Witness::ObtusePair {
                    first_index: i,
                    second_index: j,
                    first: gens.column(i),
                    second: gens.column(j),
                    cosine: c,
                }),
                note: None,
            }
        }
    }
}

fn dual_gens<'b, T: Real>(an: &'b GramAnalysis<'_, T>) -> std::result::Result<&'b DenseMatrix<T>, ConditionOutcome<T>> {
    an.dual_generators
        .as_ref()
        .map_err(|why| ConditionOutcome::not_evaluated(format!("dual generators unavailable: {why}")))
}

/// (1) `(T*T)†(K*) ⊆ K`: every dual generator `d` has `(T*T)† d ∈ K`.
/// Linearity of `(T*T)†` makes the generator check sufficient.
pub fn cond1_pinv_nonneg<T: Real>(an: &GramAnalysis<'_, T>) -> Result<ConditionOutcome<T>> {
    let d = match dual_gens(an) {
        Ok(d) => d,
        Err(o) => return Ok(o),
    };
    let scale = an.gram_dagger.frobenius_norm();
    let items = d.columns().into_iter().map(|g| Item {
        point: an.gram_dagger.matvec(&g),
        reference: scale * crate::numlin::norm2(&g),
        source: g,
    });
    membership_outcome(an, &an.inst.cone, items)
}

/// (2) `C* ∩ R(T) ⊆ C`: every extreme ray (and lineality direction) of
/// `C* ∩ R(T)` lies in `C = TK`.
pub fn cond2_dualcone_inclusion<T: Real>(an: &GramAnalysis<'_, T>) -> Result<ConditionOutcome<T>> {
    let dd = match an.cstar_in_range()? {
        Ok(dd) => dd,
        Err(why) => return Ok(ConditionOutcome::not_evaluated(why.clone())),
    };
    let c = an.image_cone()?;
    let items = dd.generators().columns().into_iter().map(|u| Item {
        point: u.clone(),
        reference: T::one(),
        source: u,
    });
    membership_outcome(an, c, items)
}

/// (3) `D = (T†)* K*` is acute, from the generators `(T†)ᵀ dⱼ`. The second
/// value reports whether the route through `⟨dᵢ, (T*T)† dⱼ⟩` reaches the
/// same verdict.
pub fn cond3_d_acute<T: Real>(an: &GramAnalysis<'_, T>) -> Result<(ConditionOutcome<T>, bool)> {
    let d = match dual_gens(an) {
        Ok(d) => d,
        Err(o) => return Ok((o, true)),
    };
    let tol = an.tol();
    let tdag_t = an.t_dagger.transpose();
    let scale = an.t_dagger.frobenius_norm();
    let mut d_gens = Vec::new();
    for g in d.columns() {
        let e = tdag_t.matvec(&g);
        if !an.negligible(&e, scale * crate::numlin::norm2(&g)) {
            d_gens.push(e);
        }
    }
    let dim = tdag_t.rows();
    let gens = DenseMatrix::from_columns(dim, &d_gens)?;
    let outcome = acuteness_outcome(tol, &gens);

    // ⟨dᵢ, (T*T)† dⱼ⟩ = ⟨(T†)ᵀdᵢ, (T†)ᵀdⱼ⟩, normalised by the diagonal.
    let gscale = an.gram_dagger.frobenius_norm();
    let cols = d.columns();
    // Roundoff in ⟨d, (T*T)† d⟩ is of order ε·‖(T*T)†‖·‖d‖², so the
    // negligibility test is applied before taking the square root.
    let cut = T::lit(1e3) * T::epsilon() * T::from_count(dim.max(1));
    let mut diag = Vec::new();
    let mut mapped = Vec::new();
    for g in &cols {
        let h = an.gram_dagger.matvec(g);
        let q = crate::numlin::dot(g, &h);
        let floor = cut * gscale * crate::numlin::dot(g, g);
        diag.push((q > floor).then(|| q.sqrt()));
        mapped.push(h);
    }
    let mut worst = T::zero();
    for i in 0..cols.len() {
        let Some(di) = diag[i] else { continue };
        for j in i..cols.len() {
            let Some(dj) = diag[j] else { continue };
            let c = crate::numlin::dot(&cols[i], &mapped[j]) / (di * dj);
            worst = worst.min(c);
        }
    }
    let routes_agree = Verdict::from_slack(worst, tol) == outcome.verdict;
    Ok((outcome, routes_agree))
}

/// (4) `C* ∩ R(T)` is acute.
pub fn cond4_cstar_acute<T: Real>(an: &GramAnalysis<'_, T>) -> Result<ConditionOutcome<T>> {
    match an.cstar_in_range()? {
        Ok(dd) => Ok(acuteness_outcome(an.tol(), &dd.generators())),
        Err(why) => Ok(ConditionOutcome::not_evaluated(why.clone())),
    }
}

/// Minimal-norm solution of `T*T x = P_R(T*) w`, computed as `T†(T†)ᵀ P w`.
fn projected_solution<T: Real>(an: &GramAnalysis<'_, T>, w: &[T]) -> Vec<T> {
    let vr = &an.row_basis;
    let pw = vr.matvec(&vr.tr_matvec(w));
    an.t_dagger.matvec(&an.t_dagger.tr_matvec(&pw))
}

/// (5) `T*Tx ∈ P_R(T*)(K*) ⟹ x ∈ K`, over the minimal-norm solutions
/// `x = (T*T)† w` for each dual generator `w`.
pub fn cond5_projected_monotone<T: Real>(an: &GramAnalysis<'_, T>) -> Result<ConditionOutcome<T>> {
    let d = match dual_gens(an) {
        Ok(d) => d,
        Err(o) => return Ok(o),
    };
    let scale = an.t_dagger.frobenius_norm().powi(2);
    let items = d.columns().into_iter().map(|w| Item {
        point: projected_solution(an, &w),
        reference: scale * crate::numlin::norm2(&w),
        source: w,
    });
    membership_outcome(an, &an.inst.cone, items)
}

/// Condition (5) with every solution `x + n`, `n ∈ N(T)`, sampled along
/// `±` each kernel basis direction at the scale of `x`.
pub fn cond5_strict<T: Real>(an: &GramAnalysis<'_, T>) -> Result<ConditionOutcome<T>> {
    let d = match dual_gens(an) {
        Ok(d) => d,
        Err(o) => return Ok(o),
    };
    let kernel = orthogonal_complement(&an.row_basis);
    let scale = an.t_dagger.frobenius_norm().powi(2);
    let mut items = Vec::new();
    for w in d.columns() {
        let x = projected_solution(an, &w);
        let reference = scale * crate::numlin::norm2(&w);
        let step = crate::numlin::norm2(&x).max(T::one());
        items.push(Item {
            source: w.clone(),
            point: x.clone(),
            reference,
        });
        for b in kernel.columns() {
            for sign in [T::one(), -T::one()] {
                let p: Vec<T> = x.iter().zip(&b).map(|(&xi, &bi)| xi + sign * step * bi).collect();
                items.push(Item {
                    source: w.clone(),
                    point: p,
                    reference,
                });
            }
        }
    }
    let mut out = membership_outcome(an, &an.inst.cone, items)?;
    out.note = Some(format!("kernel dimension {}", kernel.cols()));
    Ok(out)
}

/// (6) `T*Tx ∈ K* ⟹ x ∈ K` for `x ∈ R(T*)`: every extreme ray and
/// lineality direction of `{x ∈ R(T*) : T*Tx ∈ K*}` lies in `K`.
pub fn cond6_monotone<T: Real>(an: &GramAnalysis<'_, T>) -> Result<ConditionOutcome<T>> {
    let dd = match an.monotone_set()? {
        Ok(dd) => dd,
        Err(why) => return Ok(ConditionOutcome::not_evaluated(why.clone())),
    };
    let items = dd.generators().columns().into_iter().map(|x| Item {
        source: an.gram.matvec(&x),
        point: x,
        reference: T::one(),
    });
    membership_outcome(an, &an.inst.cone, items)
}
