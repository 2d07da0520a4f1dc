//! Completions of the modeled derived category: the closed completion
//! formula, compactly/weakly compactly supported objects, enumeration of all
//! thick subcategories and functor transport between completions.

use crate::dercat::{DerIndec, DercatError, HomTable};
use crate::functor::{FlagState, FunctorError, FunctorSpec};
use crate::metric::{Metric, MetricError, Tail};
use crate::quiver::dimvec_to_string;
use crate::subcat::{
    left_perp, mask_to_subcategory, right_perp, thick_closure, thick_closure_mask, ShiftSet,
    SubcatError, Subcategory,
};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum CompleteError {
    #[error("not a metric: {0:?}")]
    NotAMetric(Vec<String>),
    #[error(
        "good metric but the two completion branches disagree; this is a bug, not a user error"
    )]
    BranchDisagreement,
    #[error("thick-subcategory frontier exceeded the cap of {0}")]
    RankGuard(usize),
    #[error("input subcategory is not thick")]
    NotThick,
    #[error("realized metric does not complete back to the input")]
    RealizationCheck,
    #[error("transport requires declared fully faithful adjoints on both sides")]
    MissingAdjoints,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Subcat(#[from] SubcatError),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Dercat(#[from] DercatError),
    #[error(transparent)]
    Rep(#[from] crate::replin::RepError),
}

/// Everything the completion computation produces, including the cross
/// checks that guard the theory.
#[derive(Debug, Clone)]
pub struct CompletionReport {
    pub intersection_ball: Subcategory,
    pub ball_shift_closure: Subcategory,
    pub completion: Subcategory,
    pub good_branch_used: bool,
    /// Minimal generating sets of indecomposables found (singletons, then
    /// pairs; the full module list otherwise).
    pub generators: Vec<Vec<usize>>,
    pub cross_checks: Vec<(String, bool)>,
}

/// The completion with respect to a metric: the general branch is always
/// `(B[-∞,∞])^⊥` inside the bounded category; for a good metric `B^⊥` is
/// computed as well and the two must agree.
pub fn completion(t: &HomTable, m: &Metric) -> Result<CompletionReport, CompleteError> {
    let verdict = m.validate();
    if !verdict.is_metric {
        return Err(CompleteError::NotAMetric(verdict.witnesses));
    }
    let ball = m.intersection_ball()?;
    let closure = ball.shift_closure();
    let completion = right_perp(t, &closure);
    let good_branch_used = verdict.is_good;
    let mut cross_checks = Vec::new();
    if good_branch_used {
        let direct = right_perp(t, &ball);
        let agree = direct == completion;
        cross_checks.push(("good_branch_agreement".into(), agree));
        if !agree {
            return Err(CompleteError::BranchDisagreement);
        }
    }
    let thick_fix = thick_closure(t, &completion) == completion;
    cross_checks.push(("completion_is_thick".into(), thick_fix));
    cross_checks.push((
        "completion_is_shift_closed".into(),
        completion.is_shift_closed(),
    ));
    let generators = minimal_generators(t, &completion);
    Ok(CompletionReport {
        intersection_ball: ball,
        ball_shift_closure: closure,
        completion,
        good_branch_used,
        generators,
        cross_checks,
    })
}

fn minimal_generators(t: &HomTable, s: &Subcategory) -> Vec<Vec<usize>> {
    let mask = s.module_mask(t.root_count());
    let target = &mask;
    let in_s: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(r, _)| r)
        .collect();
    if in_s.is_empty() {
        return vec![vec![]];
    }
    let mut singles = Vec::new();
    for &r in &in_s {
        let mut seed = vec![false; t.root_count()];
        seed[r] = true;
        if thick_closure_mask(t, &seed) == *target {
            singles.push(vec![r]);
        }
    }
    if !singles.is_empty() {
        return singles;
    }
    let mut pairs = Vec::new();
    for (i, &r1) in in_s.iter().enumerate() {
        for &r2 in &in_s[i + 1..] {
            let mut seed = vec![false; t.root_count()];
            seed[r1] = true;
            seed[r2] = true;
            if thick_closure_mask(t, &seed) == *target {
                pairs.push(vec![r1, r2]);
            }
        }
    }
    if !pairs.is_empty() {
        return pairs;
    }
    vec![in_s]
}

/// Compactly and weakly compactly supported objects of the bounded category
/// with respect to the metric, by exact interval algebra on the perps of the
/// ball family.
pub fn supports(t: &HomTable, m: &Metric) -> Result<(Subcategory, Subcategory), CompleteError> {
    let verdict = m.validate();
    if !verdict.is_metric {
        return Err(CompleteError::NotAMetric(verdict.witnesses));
    }
    let weak = weak_support(t, m)?;
    // compact = ∩_{j∈Z} Σ^j(weak union family): per module either every
    // shift survives or none does
    let mut compact_map = BTreeMap::new();
    for (r, s) in weak.modules() {
        if s.is_all() {
            compact_map.insert(r, ShiftSet::all());
        }
    }
    let compact = Subcategory::from_map(compact_map);
    Ok((compact, weak))
}

/// `∪_i perp(B_i)`: the union of the right perps of the ball chain; exact
/// tail-rule limits for the union.
fn weak_support(t: &HomTable, m: &Metric) -> Result<Subcategory, CompleteError> {
    // forbidden shifts for target N under ball B:
    //   ∪_{M: hom(M,N)>0} B(M)  ∪  ∪_{M: ext(M,N)>0} (B(M)+1)
    // the perp is the complement; the union over i is the complement of the
    // intersection of the forbidden sets, which follows the tail rule.
    let forb = |ball: &Subcategory, target: usize| -> ShiftSet {
        let mut f = ShiftSet::empty();
        for (mroot, shifts) in ball.modules() {
            if t.hom(mroot, target) > 0 {
                f = f.union(shifts);
            }
            if t.ext(mroot, target) > 0 {
                f = f.union(&shifts.translate(1));
            }
        }
        f
    };
    let mut out = BTreeMap::new();
    for target in 0..t.root_count() {
        let forbidden_limit = forbidden_intersection(t, m, target, &forb)?;
        let allowed = forbidden_limit.complement();
        if !allowed.is_empty() {
            out.insert(target, allowed);
        }
    }
    Ok(Subcategory::from_map(out))
}

/// `∩_i forbidden(B_i, target)` following the metric's tail.
fn forbidden_intersection(
    t: &HomTable,
    m: &Metric,
    target: usize,
    forb: &dyn Fn(&Subcategory, usize) -> ShiftSet,
) -> Result<ShiftSet, CompleteError> {
    let mut acc: Option<ShiftSet> = None;
    for b in m.prefix() {
        let f = forb(b, target);
        acc = Some(match acc {
            None => f,
            Some(a) => a.intersect(&f),
        });
    }
    let acc = acc.expect("prefix nonempty");
    let tail_part = match m.tail() {
        Tail::Constant => forb(m.prefix().last().unwrap(), target),
        Tail::Shift { d, overlay } => {
            // forbidden sets distribute over the union of the drifting ray
            // part and the pinned overlay
            let moving = m.prefix().last().unwrap().minus(overlay);
            let f_moving = forb(&moving, target);
            let f_overlay = forb(overlay, target);
            ShiftSet::tail_intersection(&f_moving, *d, &f_overlay)?
        }
        Tail::Slowdown { base, .. } => forbidden_intersection(t, base, target, forb)?,
    };
    Ok(acc.intersect(&tail_part))
}

/// All thick subcategories, produced by fixpoint join closure from the
/// single-generator thicks. The guard caps the frontier for safety.
pub fn enumerate_thick(t: &HomTable, cap: usize) -> Result<Vec<Subcategory>, CompleteError> {
    let n = t.root_count();
    let mut found: BTreeSet<Vec<bool>> = BTreeSet::new();
    found.insert(vec![false; n]);
    found.insert(thick_closure_mask(t, &vec![true; n]));
    for r in 0..n {
        let mut seed = vec![false; n];
        seed[r] = true;
        found.insert(thick_closure_mask(t, &seed));
    }
    let mut frontier: Vec<Vec<bool>> = found.iter().cloned().collect();
    while let Some(mask) = frontier.pop() {
        for r in 0..n {
            if mask[r] {
                continue;
            }
            let mut seed = mask.clone();
            seed[r] = true;
            let closed = thick_closure_mask(t, &seed);
            if found.insert(closed.clone()) {
                if found.len() > cap {
                    return Err(CompleteError::RankGuard(cap));
                }
                frontier.push(closed);
            }
        }
    }
    let mut masks: Vec<Vec<bool>> = found.into_iter().collect();
    masks.sort_by_key(|m| (m.iter().filter(|&&b| b).count(), m.clone()));
    Ok(masks.iter().map(|m| mask_to_subcategory(m)).collect())
}

/// Brute-force oracle: thick-close every subset of modules and deduplicate.
/// Only sensible at small rank.
pub fn enumerate_thick_bruteforce(t: &HomTable) -> Result<Vec<Subcategory>, CompleteError> {
    let n = t.root_count();
    if n > 16 {
        return Err(CompleteError::RankGuard(1 << 16));
    }
    let mut found: BTreeSet<Vec<bool>> = BTreeSet::new();
    for bits in 0u32..(1 << n) {
        let mask: Vec<bool> = (0..n).map(|r| bits & (1 << r) != 0).collect();
        found.insert(thick_closure_mask(t, &mask));
    }
    let mut masks: Vec<Vec<bool>> = found.into_iter().collect();
    masks.sort_by_key(|m| (m.iter().filter(|&&b| b).count(), m.clone()));
    Ok(masks.iter().map(|m| mask_to_subcategory(m)).collect())
}

/// Produces a metric whose completion is the given thick subcategory:
/// the constant metric on its left perpendicular.
pub fn realize_as_completion(t: &HomTable, s: &Subcategory) -> Result<Metric, CompleteError> {
    if thick_closure(t, s) != *s {
        return Err(CompleteError::NotThick);
    }
    let u = left_perp(t, s);
    let m = crate::metric::make_constant_metric(t, &u)?;
    let report = completion(t, &m)?;
    if report.completion != *s {
        return Err(CompleteError::RealizationCheck);
    }
    Ok(m)
}

/// Result of checking the induced equivalence between completions at the
/// object level.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub target_completion: Subcategory,
    pub source_completion: Subcategory,
    pub bijection: bool,
    /// module pairings (source root, target root, shift offset)
    pub pairs: Vec<(usize, usize, i64)>,
    pub adjunction_dims_ok: bool,
}

/// Object-level shadow of the induced equivalence: `g` must come with a
/// fully faithful left adjoint and a fully faithful right adjoint. The
/// completion of the target metric is compared with the image under `g` of
/// the completion of the preimage metric.
pub fn transport_check(
    g: &FunctorSpec,
    source: &HomTable,
    target: &HomTable,
    m_tgt: &Metric,
) -> Result<TransportReport, CompleteError> {
    g.check_tables(source, target)?;
    let f = g.left_adjoint.as_deref().ok_or(CompleteError::MissingAdjoints)?;
    let j = match g.right_adjoint.as_deref() {
        Some(j) => j.clone(),
        // in the presence of Serre functors the right adjoint is the Serre
        // conjugate of the left one
        None => g.serre_conjugate(source, target)?,
    };
    if f.flags.faithful == FlagState::Unknown
        || f.flags.full == FlagState::Unknown
        || j.flags.faithful == FlagState::Unknown
        || j.flags.full == FlagState::Unknown
    {
        return Err(CompleteError::MissingAdjoints);
    }
    let adjunction_dims_ok = FunctorSpec::adjunction_dims_hold(f, g, target, source)
        && FunctorSpec::adjunction_dims_hold(g, &j, source, target);
    let tgt_report = completion(target, m_tgt)?;
    let m_src = g.preimage_metric(source, m_tgt)?;
    let src_report = completion(source, &m_src)?;
    // apply g to the indecomposables of the source completion
    let src_mask = src_report.completion.module_mask(source.root_count());
    let tgt_mask = tgt_report.completion.module_mask(target.root_count());
    let mut pairs = Vec::new();
    let mut bijection = true;
    let mut hit = vec![false; target.root_count()];
    for (r, &in_src) in src_mask.iter().enumerate() {
        if !in_src {
            continue;
        }
        let image = g.apply(&crate::dercat::DerObject::single(DerIndec::new(r, 0)));
        match image.summands() {
            [x] => {
                if !tgt_mask[x.root] || hit[x.root] {
                    bijection = false;
                } else {
                    hit[x.root] = true;
                    pairs.push((r, x.root, x.shift));
                }
            }
            _ => {
                bijection = false;
            }
        }
    }
    if hit.iter().zip(&tgt_mask).any(|(&h, &m)| m && !h) {
        bijection = false;
    }
    Ok(TransportReport {
        target_completion: tgt_report.completion,
        source_completion: src_report.completion,
        bijection,
        pairs,
        adjunction_dims_ok,
    })
}

/// DOT rendering of the AR quiver: irreducible maps computed from the
/// radical filtration (`Irr = rad / rad^2`), the translate as dashed edges.
pub fn ar_quiver_dot(t: &HomTable) -> Result<String, CompleteError> {
    let n = t.root_count();
    // rad(M,N) = Hom(M,N) for M != N (bricks have no radical endomorphisms);
    // rad^2 via explicit composition of Hom bases
    let q = t.quiver();
    let mut irr = vec![vec![0usize; n]; n];
    for m in 0..n {
        for nn in 0..n {
            if m == nn || t.hom(m, nn) == 0 {
                continue;
            }
            // span of all composites through any intermediate L; bricks
            // have no radical endomorphisms, so rad = Hom off the diagonal
            let mut composites = Vec::new();
            for l in 0..n {
                if l == m || l == nn {
                    continue;
                }
                if t.hom(m, l) == 0 || t.hom(l, nn) == 0 {
                    continue;
                }
                let (_, basis_ml) = crate::replin::hom_space(q, t.witness(m), t.witness(l))?;
                let (_, basis_ln) = crate::replin::hom_space(q, t.witness(l), t.witness(nn))?;
                for f in &basis_ml {
                    for g in &basis_ln {
                        composites.push(g.compose(f));
                    }
                }
            }
            let rad2 = span_rank(&composites);
            irr[m][nn] = t.hom(m, nn) as usize - rad2;
        }
    }
    let mut out = String::from("digraph AR {\n  rankdir=LR;\n");
    for r in 0..n {
        let label = dimvec_to_string(t.registry().root(r));
        let shape = if t.is_projective(r) {
            "box"
        } else if t.is_injective(r) {
            "diamond"
        } else {
            "ellipse"
        };
        out.push_str(&format!(
            "  n{r} [label=\"{label}\", shape={shape}];\n"
        ));
    }
    for m in 0..n {
        for nn in 0..n {
            for _ in 0..irr[m][nn] {
                out.push_str(&format!("  n{m} -> n{nn};\n"));
            }
        }
    }
    for r in 0..n {
        if !t.is_projective(r) {
            let tr = t.tau(DerIndec::new(r, 0));
            out.push_str(&format!(
                "  n{r} -> n{} [style=dashed, constraint=false, label=\"tau\"];\n",
                tr.root
            ));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

fn vectorize_map(f: &crate::replin::RepMap) -> Vec<crate::replin::Rat> {
    let mut out = Vec::new();
    for c in f.components() {
        for r in 0..c.rows() {
            for cc in 0..c.cols() {
                out.push(c[(r, cc)].clone());
            }
        }
    }
    out
}

fn span_rank(maps: &[crate::replin::RepMap]) -> usize {
    if maps.is_empty() {
        return 0;
    }
    let cols: Vec<Vec<crate::replin::Rat>> = maps.iter().map(vectorize_map).collect();
    let rows = cols[0].len();
    crate::replin::RatMatrix::from_columns(rows, &cols).rank()
}

/// DOT rendering of the Hasse diagram of thick subcategories under
/// inclusion.
pub fn hasse_dot(t: &HomTable, thicks: &[Subcategory]) -> String {
    let n = t.root_count();
    let masks: Vec<Vec<bool>> = thicks.iter().map(|s| s.module_mask(n)).collect();
    let leq = |a: &Vec<bool>, b: &Vec<bool>| a.iter().zip(b).all(|(&x, &y)| !x || y);
    let mut out = String::from("digraph Thick {\n  rankdir=BT;\n");
    for (i, s) in thicks.iter().enumerate() {
        let gens = minimal_generators(t, s);
        let label = if s.is_zero() {
            "0".to_string()
        } else if s.is_everything(t) {
            "D^b".to_string()
        } else {
            gens[0]
                .iter()
                .map(|&r| format!("<{}>", dimvec_to_string(t.registry().root(r))))
                .collect::<Vec<_>>()
                .join("+")
        };
        out.push_str(&format!("  t{i} [label=\"{label}\"];\n"));
    }
    for (i, a) in masks.iter().enumerate() {
        for (j, b) in masks.iter().enumerate() {
            if i != j && leq(a, b) && a != b {
                // cover relation: nothing strictly in between
                let cover = !masks.iter().enumerate().any(|(k, c)| {
                    k != i && k != j && leq(a, c) && leq(c, b) && c != a && c != b
                });
                if cover {
                    out.push_str(&format!("  t{i} -> t{j};\n"));
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::vertex_evaluation;
    use crate::metric::{
        make_aisle_metric, make_cohomology_metric, make_cohomology_window_metric,
        make_constant_metric, make_slowdown,
    };
    use crate::quiver::Quiver;

    fn a1() -> HomTable {
        HomTable::build(
            Quiver::parse(r#"{"vertices":["1"],"arrows":[]}"#).unwrap(),
            0,
        )
        .unwrap()
    }

    fn a2() -> HomTable {
        HomTable::build(
            Quiver::parse(r#"{"vertices":["1","2"],"arrows":[["2","1"]]}"#).unwrap(),
            0,
        )
        .unwrap()
    }

    const S2: usize = 0;

    fn deg47(t: &HomTable) -> Metric {
        let mut exc = Subcategory::zero();
        exc.insert(0, ShiftSet::point(-47));
        make_cohomology_window_metric(t, &exc).unwrap()
    }

    #[test]
    fn degree47_completion_is_zero() {
        let t = a1();
        let m = deg47(&t);
        let rep = completion(&t, &m).unwrap();
        assert!(!rep.good_branch_used);
        assert!(rep.completion.is_zero());
        // and its improvement completes to everything
        let imp = m.improvement().unwrap();
        let rep = completion(&t, &imp).unwrap();
        assert!(rep.good_branch_used);
        assert!(rep.completion.is_everything(&t));
    }

    #[test]
    fn preimage_metric_completion_is_s2() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let m = make_cohomology_metric(&t1);
        let pre = g.preimage_metric(&t2, &m).unwrap();
        let rep = completion(&t2, &pre).unwrap();
        assert!(rep.good_branch_used);
        let mask = rep.completion.module_mask(t2.root_count());
        assert_eq!(mask, vec![true, false, false]); // exactly <S2>
        assert!(rep.completion.shifts(S2).is_all());
        // generated by the single module S2
        assert_eq!(rep.generators, vec![vec![S2]]);
    }

    #[test]
    fn aisle_metric_completion_is_everything() {
        let t = a2();
        let mut u = Subcategory::zero();
        for r in 0..t.root_count() {
            u.insert(r, ShiftSet::ray_ge(0));
        }
        let m = make_aisle_metric(&u).unwrap();
        let rep = completion(&t, &m).unwrap();
        assert!(rep.completion.is_everything(&t));
    }

    #[test]
    fn slowdown_has_identical_completion() {
        let t = a1();
        let coh = make_cohomology_metric(&t);
        let slow = make_slowdown(2, coh.clone()).unwrap();
        let r1 = completion(&t, &coh).unwrap();
        let r2 = completion(&t, &slow).unwrap();
        assert_eq!(r1.completion, r2.completion);
        assert!(r1.completion.is_everything(&t));
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_thick(&a1(), 10_000).unwrap().len(), 2);
        let thick2 = enumerate_thick(&a2(), 10_000).unwrap();
        assert_eq!(thick2.len(), 5);
        // the five: 0, <S1>, <S2>, <P2>, everything
        let masks: Vec<Vec<bool>> = thick2
            .iter()
            .map(|s| s.module_mask(3))
            .collect();
        assert!(masks.contains(&vec![false, false, false]));
        assert!(masks.contains(&vec![true, false, false]));
        assert!(masks.contains(&vec![false, true, false]));
        assert!(masks.contains(&vec![false, false, true]));
        assert!(masks.contains(&vec![true, true, true]));
    }

    #[test]
    fn enumerate_matches_bruteforce() {
        for t in [a1(), a2(), HomTable::build(crate::quiver::standard::a_n(3), 0).unwrap()] {
            let a = enumerate_thick(&t, 100_000).unwrap();
            let b = enumerate_thick_bruteforce(&t).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn realize_all_a2_thicks() {
        let t = a2();
        for s in enumerate_thick(&t, 10_000).unwrap() {
            let m = realize_as_completion(&t, &s).unwrap();
            let rep = completion(&t, &m).unwrap();
            assert_eq!(rep.completion, s);
        }
        // the <S2> case concretely: left perp is <S1>
        let mut s = Subcategory::zero();
        s.insert(S2, ShiftSet::all());
        let m = realize_as_completion(&t, &s).unwrap();
        assert_eq!(m.ball(1).module_mask(3), vec![false, true, false]);
    }

    #[test]
    fn supports_examples() {
        let t = a1();
        // degree-47: weak = everything except shift -47; compact empty
        let m = deg47(&t);
        let (compact, weak) = supports(&t, &m).unwrap();
        assert!(compact.is_zero());
        assert_eq!(weak.shifts(0), ShiftSet::point(-47).complement());
        // constant ball add{K@0}: weak = all shifts except 0
        let mut u = Subcategory::zero();
        u.insert(0, ShiftSet::point(0));
        let m = make_constant_metric(&t, &u).unwrap();
        let (compact, weak) = supports(&t, &m).unwrap();
        assert!(compact.is_zero());
        assert_eq!(weak.shifts(0), ShiftSet::point(0).complement());
        assert!(weak.shifts(0).contains(1) && !weak.shifts(0).contains(0));
        // good metric: compact = weak
        let coh = make_cohomology_metric(&t);
        let (compact, weak) = supports(&t, &coh).unwrap();
        assert_eq!(compact, weak);
        assert!(compact.is_everything(&t));
    }

    #[test]
    fn transport_on_the_worked_example() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let m = make_cohomology_metric(&t1);
        let rep = transport_check(&g, &t2, &t1, &m).unwrap();
        assert!(rep.adjunction_dims_ok);
        assert!(rep.bijection);
        assert_eq!(rep.pairs, vec![(S2, 0, 0)]); // S2@t <-> K@t
        assert!(rep.target_completion.is_everything(&t1));
        let mask = rep.source_completion.module_mask(3);
        assert_eq!(mask, vec![true, false, false]);
    }

    #[test]
    fn transport_under_identity() {
        let t = a2();
        let id = crate::functor::identity(&t);
        let m = make_cohomology_metric(&t);
        let rep = transport_check(&id, &t, &t, &m).unwrap();
        assert!(rep.bijection);
        assert_eq!(rep.source_completion, rep.target_completion);
    }

    #[test]
    fn dot_outputs_render() {
        let t = a2();
        let dot = ar_quiver_dot(&t).unwrap();
        assert!(dot.contains("digraph AR"));
        // A_2 AR quiver: S1 -> P2 -> S2 and tau: S2 -> S1
        assert!(dot.matches("->").count() >= 3);
        let thicks = enumerate_thick(&t, 10_000).unwrap();
        let h = hasse_dot(&t, &thicks);
        assert!(h.contains("digraph Thick"));
        assert!(h.contains("D^b"));
    }
}
