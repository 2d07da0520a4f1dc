//! Finitely described metrics on the derived category: a non-increasing
//! chain of extension-closed balls given by an explicit prefix plus a tail
//! rule, with validation, improvement, the intersection ball and the
//! refinement preorder.

use crate::dercat::HomTable;
use crate::subcat::{
    is_extension_closed_bounded, is_thick, ExtensionVerdict, ShiftSet, SubcatError, Subcategory,
};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("malformed metric document: {0}")]
    Parse(String),
    #[error("prefix must be nonempty")]
    EmptyPrefix,
    #[error("shift tail requires a nonzero step")]
    ZeroShift,
    #[error("slowdown factor must be at least 2")]
    BadSlowdown,
    #[error("overlay must be contained in the last prefix ball")]
    OverlayOutsidePrefix,
    #[error("not a metric: {0}")]
    NotAMetric(String),
    #[error("input is not an aisle: the shift test failed")]
    NotAnAisle,
    #[error("operation unavailable on a finite-horizon metric (horizon {0})")]
    FiniteHorizon(usize),
    #[error(transparent)]
    Subcat(#[from] SubcatError),
}

/// How extension-closedness of the balls is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtProvenance {
    /// Constructed by an operation that preserves the metric axioms; the
    /// string names the construction.
    Guaranteed(String),
    /// Hand-written data; route through the bounded verifier on demand.
    Unverified,
}

/// Tail rule extending the prefix to all of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    /// `B_n = B_k` for `n >= k`.
    Constant,
    /// `B_{k+j} = translate(B_k \ overlay, j*d) ∪ overlay`. A plain shifted
    /// tail has an empty overlay; the overlay holds degrees pinned in place
    /// while the ray part drifts.
    Shift { d: i64, overlay: Subcategory },
    /// `B_n = base.ball(ceil(n/s))`.
    Slowdown { s: u32, base: Box<Metric> },
}

/// A metric: explicit balls `B_1..B_k` plus a tail rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metric {
    prefix: Vec<Subcategory>,
    tail: Tail,
    provenance: ExtProvenance,
    /// Set when tail inference failed: balls beyond the horizon repeat the
    /// last materialized ball and must not be trusted.
    finite_horizon: Option<usize>,
}

/// Outcome of the metric axioms check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricVerdict {
    pub is_metric: bool,
    pub is_good: bool,
    pub witnesses: Vec<String>,
    pub extension_closed: ExtStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtStatus {
    Guaranteed(String),
    Unverified,
    VerifiedUpToBudget,
    Counterexample(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareVerdict {
    /// The first metric is finer (refines the second).
    FirstRefinesSecond,
    SecondRefinesFirst,
    Equivalent,
    Incomparable,
    Unknown,
}

impl fmt::Display for CompareVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CompareVerdict::FirstRefinesSecond => "m1 <= m2",
            CompareVerdict::SecondRefinesFirst => "m2 <= m1",
            CompareVerdict::Equivalent => "equivalent",
            CompareVerdict::Incomparable => "incomparable",
            CompareVerdict::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// Three-valued refinement decision with a falsification witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefinesVerdict {
    Yes,
    No { ball_index: usize },
    Unknown,
}

use RefinesVerdict as Refines;

impl Metric {
    pub fn new(
        prefix: Vec<Subcategory>,
        tail: Tail,
        provenance: ExtProvenance,
    ) -> Result<Self, MetricError> {
        if prefix.is_empty() {
            return Err(MetricError::EmptyPrefix);
        }
        match &tail {
            Tail::Shift { d, overlay } => {
                if *d == 0 {
                    return Err(MetricError::ZeroShift);
                }
                if !overlay.is_subset(prefix.last().unwrap()) {
                    return Err(MetricError::OverlayOutsidePrefix);
                }
            }
            Tail::Slowdown { s, .. } => {
                if *s < 2 {
                    return Err(MetricError::BadSlowdown);
                }
            }
            Tail::Constant => {}
        }
        Ok(Metric {
            prefix,
            tail,
            provenance,
            finite_horizon: None,
        })
    }

    pub fn prefix(&self) -> &[Subcategory] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn provenance(&self) -> &ExtProvenance {
        &self.provenance
    }

    pub fn finite_horizon(&self) -> Option<usize> {
        self.finite_horizon
    }

    fn ensure_total(&self) -> Result<(), MetricError> {
        match self.finite_horizon {
            Some(h) => Err(MetricError::FiniteHorizon(h)),
            None => Ok(()),
        }
    }

    /// The ray part of a shift tail: last prefix ball minus the overlay.
    fn moving(&self) -> Option<Subcategory> {
        match &self.tail {
            Tail::Shift { overlay, .. } => {
                Some(self.prefix.last().unwrap().minus(overlay))
            }
            _ => None,
        }
    }

    /// Materializes the n-th ball (1-indexed).
    pub fn ball(&self, n: usize) -> Subcategory {
        assert!(n >= 1, "balls are indexed from 1");
        let k = self.prefix.len();
        if n <= k {
            return self.prefix[n - 1].clone();
        }
        match &self.tail {
            Tail::Constant => self.prefix[k - 1].clone(),
            Tail::Shift { d, overlay } => {
                let moving = self.moving().unwrap();
                moving.translate((n - k) as i64 * d).union(overlay)
            }
            Tail::Slowdown { s, base } => base.ball(n.div_ceil(*s as usize)),
        }
    }

    /// Index from which the ball family is governed purely by the tail rule.
    fn stable_from(&self) -> usize {
        match &self.tail {
            Tail::Constant | Tail::Shift { .. } => self.prefix.len(),
            Tail::Slowdown { s, base } => {
                let b = base.stable_from();
                let via_base = (*s as usize) * b.saturating_sub(1) + 1;
                self.prefix.len().max(via_base)
            }
        }
    }

    /// Checks the metric axioms. The chain and rapid-decrease conditions are
    /// reduced to finitely many shift-set inclusions; extension-closedness is
    /// reported from provenance (see [`Metric::verify_extension_closed`] for
    /// the bounded check).
    pub fn validate(&self) -> MetricVerdict {
        let mut witnesses = Vec::new();
        let mut chain_ok = true;
        let mut good_ok = true;
        let k = self.prefix.len();
        // explicit checks across the prefix and the seam
        for n in 1..=k {
            let b_next = self.ball(n + 1);
            let b_n = self.ball(n);
            if !b_next.is_subset(&b_n) {
                chain_ok = false;
                witnesses.push(format!("chain fails: B_{} is not inside B_{}", n + 1, n));
            }
            for delta in [-1i64, 1] {
                if !b_next.translate(delta).is_subset(&b_n) {
                    good_ok = false;
                    witnesses.push(format!(
                        "rapid decrease fails: Σ^{delta} B_{} is not inside B_{}",
                        n + 1,
                        n
                    ));
                }
            }
        }
        // symbolic tail checks
        match &self.tail {
            Tail::Constant => {
                let last = self.prefix.last().unwrap();
                for delta in [-1i64, 1] {
                    if !last.translate(delta).is_subset(last) {
                        good_ok = false;
                        witnesses.push(format!(
                            "rapid decrease fails on the constant tail at shift {delta}"
                        ));
                    }
                }
            }
            Tail::Shift { d, overlay } => {
                let moving = self.moving().unwrap();
                // chain for all j: (M+d)\M inside every O - j*d
                if !subcat_subset_of_limit(&moving.translate(*d).minus(&moving), overlay, -d) {
                    chain_ok = false;
                    witnesses.push("chain fails along the shifted tail".into());
                }
                for delta in [-1i64, 1] {
                    let m_part = moving.translate(*d + delta).minus(&moving);
                    if !subcat_subset_of_limit(&m_part, overlay, -d) {
                        good_ok = false;
                        witnesses.push(format!(
                            "rapid decrease fails on the ray part of the tail at shift {delta}"
                        ));
                    }
                    let o_part = overlay.translate(delta).minus(overlay);
                    if !subcat_subset_of_limit(&o_part, &moving, *d) {
                        good_ok = false;
                        witnesses.push(format!(
                            "rapid decrease fails on the pinned part of the tail at shift {delta}"
                        ));
                    }
                }
            }
            Tail::Slowdown { s, base } => {
                let base_verdict = base.validate();
                if !base_verdict.is_metric {
                    chain_ok = false;
                    witnesses.push("slowdown base is not a metric".into());
                }
                // seam: the first tail ball must sit inside the last prefix
                let first_tail = base.ball((k + 1).div_ceil(*s as usize));
                if !first_tail.is_subset(self.prefix.last().unwrap()) {
                    chain_ok = false;
                    witnesses.push("chain fails at the slowdown seam".into());
                }
                // goodness needs every plateau to be shift-stable
                if !base_verdict.is_good {
                    good_ok = false;
                    witnesses.push("slowdown base is not good".into());
                }
                if !base.all_balls_shift_stable() {
                    good_ok = false;
                    witnesses.push(
                        "slowdown repeats balls that are not shift-stable".into(),
                    );
                }
                for delta in [-1i64, 1] {
                    if !first_tail
                        .translate(delta)
                        .is_subset(self.prefix.last().unwrap())
                    {
                        good_ok = false;
                        witnesses.push("rapid decrease fails at the slowdown seam".into());
                    }
                }
            }
        }
        let extension_closed = match &self.provenance {
            ExtProvenance::Guaranteed(s) => ExtStatus::Guaranteed(s.clone()),
            ExtProvenance::Unverified => ExtStatus::Unverified,
        };
        MetricVerdict {
            is_metric: chain_ok,
            is_good: chain_ok && good_ok,
            witnesses,
            extension_closed,
        }
    }

    /// Runs the bounded extension-closedness verifier over every distinct
    /// ball up to the stable index.
    pub fn verify_extension_closed(
        &self,
        t: &HomTable,
        budget: usize,
        prime: u32,
    ) -> Result<ExtStatus, MetricError> {
        if let ExtProvenance::Guaranteed(s) = &self.provenance {
            return Ok(ExtStatus::Guaranteed(s.clone()));
        }
        let mut saw_unknown = false;
        for n in 1..=self.stable_from() + 1 {
            match is_extension_closed_bounded(t, &self.ball(n), budget, prime)? {
                ExtensionVerdict::VerifiedUpToBudget => {}
                ExtensionVerdict::Unknown => saw_unknown = true,
                ExtensionVerdict::Counterexample {
                    end_a,
                    middle,
                    end_b,
                    shift,
                } => {
                    return Ok(ExtStatus::Counterexample(format!(
                        "ball {n}: triangle ({end_a})@{shift} -> {middle} -> ({end_b}) leaves the ball"
                    )));
                }
            }
        }
        Ok(if saw_unknown {
            ExtStatus::Unverified
        } else {
            ExtStatus::VerifiedUpToBudget
        })
    }

    /// True when every ball equals all of its shifts (needed for slowdown
    /// plateaus).
    fn all_balls_shift_stable(&self) -> bool {
        let stable = |b: &Subcategory| {
            b.translate(1).is_subset(b) && b.translate(-1).is_subset(b)
        };
        if !self.prefix.iter().all(|b| stable(b)) {
            return false;
        }
        match &self.tail {
            Tail::Constant => true,
            Tail::Shift { d, overlay } => {
                let moving = self.moving().unwrap();
                [-1i64, 1].into_iter().all(|delta| {
                    subcat_subset_of_limit(
                        &moving.translate(delta).minus(&moving),
                        overlay,
                        -d,
                    ) && subcat_subset_of_limit(
                        &overlay.translate(delta).minus(overlay),
                        &moving,
                        *d,
                    )
                })
            }
            Tail::Slowdown { base, .. } => base.all_balls_shift_stable(),
        }
    }

    /// Exact `∩_n B_n`.
    pub fn intersection_ball(&self) -> Result<Subcategory, MetricError> {
        self.ensure_total()?;
        let mut acc = self.prefix.iter().skip(1).fold(
            self.prefix[0].clone(),
            |acc, b| acc.intersect(b),
        );
        let tail_limit = match &self.tail {
            Tail::Constant => self.prefix.last().unwrap().clone(),
            Tail::Shift { d, overlay } => {
                let moving = self.moving().unwrap();
                let mut map = std::collections::BTreeMap::new();
                let roots: BTreeSet<usize> = moving
                    .modules()
                    .map(|(r, _)| r)
                    .chain(overlay.modules().map(|(r, _)| r))
                    .collect();
                for r in roots {
                    let set = ShiftSet::tail_intersection(
                        &moving.shifts(r),
                        *d,
                        &overlay.shifts(r),
                    )?;
                    if !set.is_empty() {
                        map.insert(r, set);
                    }
                }
                Subcategory::from_map(map)
            }
            Tail::Slowdown { base, .. } => base.intersection_ball()?,
        };
        acc = acc.intersect(&tail_limit);
        Ok(acc)
    }

    /// Improvement: the coarsest good refinement, materialized from the
    /// closed formula `C_n = ∩_{|i|<n} Σ^i B_{n-|i|}` with the tail inferred
    /// from the stabilized recurrence.
    pub fn improvement(&self) -> Result<Metric, MetricError> {
        self.ensure_total()?;
        let k = self.stable_from();
        let horizon = (3 * k + 24).min(256);
        let balls: Vec<Subcategory> = (1..=horizon).map(|n| self.ball(n)).collect();
        let improved: Vec<Subcategory> = (1..=horizon)
            .map(|n| improvement_ball(&balls, n))
            .collect();
        let provenance =
            ExtProvenance::Guaranteed("improvement (coarsest good refinement)".into());
        Ok(Metric::from_materialized(
            improved,
            &self.shift_candidates(),
            provenance,
        ))
    }

    /// Builds a metric from an explicitly materialized ball sequence by
    /// inferring the stabilized tail rule; falls back to a marked
    /// finite-horizon metric when no rule fits.
    pub(crate) fn from_materialized(
        balls: Vec<Subcategory>,
        shift_candidates: &[i64],
        provenance: ExtProvenance,
    ) -> Metric {
        let n = balls.len();
        let verify_extra = (n / 4).min(8);
        let horizon = n - verify_extra;
        let anchor = horizon.saturating_sub(6).max(1);
        if let Some((_, tail)) = infer_tail(&balls, anchor, horizon, shift_candidates) {
            // shrink the prefix as far as the rule reproduces every ball
            for p in 1..=anchor {
                let tail_p = match &tail {
                    Tail::Shift { d, overlay } => Tail::Shift {
                        d: *d,
                        overlay: overlay.intersect(&balls[p - 1]),
                    },
                    t => t.clone(),
                };
                let m = Metric {
                    prefix: balls[..p].to_vec(),
                    tail: tail_p,
                    provenance: provenance.clone(),
                    finite_horizon: None,
                };
                if (p..n).all(|idx| m.ball(idx + 1) == balls[idx]) {
                    return m;
                }
            }
        }
        let horizon = horizon.max(1);
        Metric {
            prefix: balls[..horizon].to_vec(),
            tail: Tail::Constant,
            provenance,
            finite_horizon: Some(horizon),
        }
    }

    pub(crate) fn shift_candidates(&self) -> Vec<i64> {
        let mut ds = BTreeSet::from([1i64, -1]);
        fn collect(m: &Metric, ds: &mut BTreeSet<i64>) {
            match &m.tail {
                Tail::Shift { d, .. } => {
                    ds.insert(*d);
                }
                Tail::Slowdown { base, .. } => collect(base, ds),
                Tail::Constant => {}
            }
        }
        collect(self, &mut ds);
        ds.into_iter().collect()
    }

    /// Ball-wise intersection of two metrics (again a metric), materialized
    /// with tail inference like the improvement.
    pub fn intersect_metric(&self, other: &Metric) -> Result<Metric, MetricError> {
        self.ensure_total()?;
        other.ensure_total()?;
        let k = self.stable_from().max(other.stable_from());
        let horizon = (3 * k + 24).min(256);
        let balls: Vec<Subcategory> = (1..=horizon)
            .map(|n| self.ball(n).intersect(&other.ball(n)))
            .collect();
        let provenance = match (&self.provenance, &other.provenance) {
            (ExtProvenance::Guaranteed(_), ExtProvenance::Guaranteed(_)) => {
                ExtProvenance::Guaranteed("ball-wise intersection of metrics".into())
            }
            _ => ExtProvenance::Unverified,
        };
        let mut cands = self.shift_candidates();
        cands.extend(other.shift_candidates());
        cands.sort_unstable();
        cands.dedup();
        Ok(Metric::from_materialized(balls, &cands, provenance))
    }

    /// Public refinement decision: does `self` refine `other`?
    pub fn refines_public(&self, other: &Metric) -> RefinesVerdict {
        self.refines(other)
    }

    /// Flattens slowdown tails into an explicit prefix over the base tail.
    /// The resulting ball list may gain earlier (larger) balls of the base
    /// chain, which does not change the refinement relation in either
    /// quantifier.
    fn unwrap_slowdown(&self) -> Metric {
        match &self.tail {
            Tail::Slowdown { base, .. } => {
                let b = base.unwrap_slowdown();
                let mut prefix = self.prefix.clone();
                prefix.extend(b.prefix.iter().cloned());
                Metric {
                    prefix,
                    tail: b.tail,
                    provenance: self.provenance.clone(),
                    finite_horizon: None,
                }
            }
            _ => self.clone(),
        }
    }

    /// Decides `∃ m: ball(m) ⊆ target`, returning a witness index. `self`
    /// must be slowdown-free.
    fn exists_ball_inside(&self, target: &Subcategory) -> Result<Option<usize>, MetricError> {
        for (i, b) in self.prefix.iter().enumerate() {
            if b.is_subset(target) {
                return Ok(Some(i + 1));
            }
        }
        let k = self.prefix.len();
        match &self.tail {
            Tail::Constant => Ok(None), // the tail repeats the last prefix ball
            Tail::Shift { d, overlay } => {
                if !overlay.is_subset(target) {
                    return Ok(None);
                }
                let moving = self.moving().unwrap();
                let mut j_needed = 0i64;
                for (r, s) in moving.modules() {
                    match s.eventual_subset(*d, &target.shifts(r))? {
                        Some(j) => j_needed = j_needed.max(j),
                        None => return Ok(None),
                    }
                }
                // per-module nestedness of a valid chain makes the max work
                let cand = moving.translate(j_needed * d).union(overlay);
                Ok(cand
                    .is_subset(target)
                    .then(|| k + usize::try_from(j_needed).unwrap_or(usize::MAX)))
            }
            Tail::Slowdown { .. } => unreachable!("slowdown unwrapped before use"),
        }
    }

    /// Decides `∀ n ∃ m: self.ball(m) ⊆ other.ball(n)`: is `self` finer?
    fn refines(&self, other: &Metric) -> Refines {
        if self.finite_horizon.is_some() || other.finite_horizon.is_some() {
            return Refines::Unknown;
        }
        let a = self.unwrap_slowdown();
        let b = other.unwrap_slowdown();
        // every explicit target ball
        for (i, target) in b.prefix.iter().enumerate() {
            match a.exists_ball_inside(target) {
                Ok(Some(_)) => {}
                Ok(None) => return Refines::No { ball_index: i + 1 },
                Err(_) => return Refines::Unknown,
            }
        }
        let kb = b.prefix.len();
        match &b.tail {
            Tail::Constant => Refines::Yes, // tail repeats the checked last ball
            Tail::Shift { d: db, overlay: ob } => {
                let span = metric_span(&a).max(metric_span(&b));
                let window = (span + 8).clamp(8, 512);
                // falsification window
                for j in 1..=window {
                    let target = b.ball(kb + j as usize);
                    match a.exists_ball_inside(&target) {
                        Ok(Some(_)) => {}
                        Ok(None) => {
                            return Refines::No {
                                ball_index: kb + j as usize,
                            }
                        }
                        Err(_) => return Refines::Unknown,
                    }
                }
                let mb = b.moving().unwrap();
                // sufficient test: some ball of `a` inside the stable part of
                // the target tail
                if let Ok(stable) = tail_stable_part(&mb, *db, ob) {
                    if let Ok(Some(_)) = a.exists_ball_inside(&stable) {
                        return Refines::Yes;
                    }
                }
                match &a.tail {
                    Tail::Shift { d: da, overlay: oa } if da == db => {
                        // uniform-lag rule: a ball c steps deeper fits for
                        // every tail index simultaneously
                        let ma = a.moving().unwrap();
                        let oa_ok = subcat_subset_of_limit(&oa.minus(ob), &mb, *db);
                        if oa_ok {
                            for c in 0..=window {
                                let shifted = ma.translate(c * db);
                                if subcat_subset_of_limit(&shifted.minus(&mb), ob, -db) {
                                    return Refines::Yes;
                                }
                            }
                        }
                        Refines::Unknown
                    }
                    Tail::Constant => {
                        // constant source: decided exactly by the stable part
                        let last = a.prefix.last().unwrap();
                        let inside = mb
                            .modules()
                            .map(|(r, _)| r)
                            .chain(ob.modules().map(|(r, _)| r))
                            .chain(last.modules().map(|(r, _)| r))
                            .collect::<BTreeSet<usize>>()
                            .into_iter()
                            .all(|r| {
                                last.shifts(r)
                                    .minus(&ob.shifts(r))
                                    .subset_of_limit(&mb.shifts(r), *db)
                            });
                        if inside {
                            Refines::Yes
                        } else {
                            // some deeper target must fail; widen the scan
                            for j in window + 1..=4 * window + 16 {
                                let target = b.ball(kb + j as usize);
                                if let Ok(None) = a.exists_ball_inside(&target) {
                                    return Refines::No {
                                        ball_index: kb + j as usize,
                                    };
                                }
                            }
                            Refines::Unknown
                        }
                    }
                    _ => Refines::Unknown,
                }
            }
            Tail::Slowdown { .. } => unreachable!("slowdown unwrapped before use"),
        }
    }

    /// Three-valued refinement preorder comparison (Definition of finer /
    /// coarser metrics).
    pub fn compare(&self, other: &Metric) -> CompareVerdict {
        let le12 = self.refines(other);
        let le21 = other.refines(self);
        match (le12, le21) {
            (Refines::Yes, Refines::Yes) => CompareVerdict::Equivalent,
            (Refines::Yes, _) => CompareVerdict::FirstRefinesSecond,
            (_, Refines::Yes) => CompareVerdict::SecondRefinesFirst,
            (Refines::No { .. }, Refines::No { .. }) => CompareVerdict::Incomparable,
            _ => CompareVerdict::Unknown,
        }
    }

    /// JSON form per the external schema.
    pub fn to_json(&self, t: &HomTable) -> serde_json::Value {
        let tail = match &self.tail {
            Tail::Constant => serde_json::json!({"kind": "constant"}),
            Tail::Shift { d, overlay } => {
                if overlay.is_zero() {
                    serde_json::json!({"kind": "shift", "d": d})
                } else {
                    serde_json::json!({"kind": "shift", "d": d, "overlay": overlay.to_json(t)})
                }
            }
            Tail::Slowdown { s, base } => {
                serde_json::json!({"kind": "slowdown", "s": s, "base": base.to_json(t)})
            }
        };
        let mut doc = serde_json::json!({
            "prefix": self.prefix.iter().map(|b| b.to_json(t)).collect::<Vec<_>>(),
            "tail": tail,
        });
        if let Some(h) = self.finite_horizon {
            doc["finite_horizon"] = serde_json::json!(h);
        }
        doc
    }

    pub fn from_json(t: &HomTable, v: &serde_json::Value) -> Result<Metric, MetricError> {
        if let Some(make) = v.get("make") {
            return parse_constructor(t, make);
        }
        let prefix = v
            .get("prefix")
            .and_then(|p| p.as_array())
            .ok_or_else(|| MetricError::Parse("missing prefix array".into()))?
            .iter()
            .map(|b| Subcategory::from_json(t, b))
            .collect::<Result<Vec<_>, _>>()?;
        let tail_doc = v
            .get("tail")
            .ok_or_else(|| MetricError::Parse("missing tail".into()))?;
        let kind = tail_doc
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| MetricError::Parse("tail needs a kind".into()))?;
        let tail = match kind {
            "constant" => Tail::Constant,
            "shift" => {
                let d = tail_doc
                    .get("d")
                    .and_then(|d| d.as_i64())
                    .ok_or_else(|| MetricError::Parse("shift tail needs integer d".into()))?;
                let overlay = match tail_doc.get("overlay") {
                    Some(o) => Subcategory::from_json(t, o)?,
                    None => Subcategory::zero(),
                };
                Tail::Shift { d, overlay }
            }
            "slowdown" => {
                let s = tail_doc
                    .get("s")
                    .and_then(|s| s.as_u64())
                    .ok_or_else(|| MetricError::Parse("slowdown tail needs s".into()))?;
                let base = tail_doc
                    .get("base")
                    .ok_or_else(|| MetricError::Parse("slowdown tail needs base".into()))?;
                Tail::Slowdown {
                    s: s.try_into()
                        .map_err(|_| MetricError::BadSlowdown)?,
                    base: Box::new(Metric::from_json(t, base)?),
                }
            }
            other => {
                return Err(MetricError::Parse(format!("unknown tail kind {other:?}")));
            }
        };
        Metric::new(prefix, tail, ExtProvenance::Unverified)
    }
}

/// `C_n = ∩_{i=-n+1}^{n-1} Σ^i B_{n-|i|}` (closed improvement formula).
fn improvement_ball(balls: &[Subcategory], n: usize) -> Subcategory {
    let ni = n as i64;
    let mut acc: Option<Subcategory> = None;
    for i in (-ni + 1)..=(ni - 1) {
        let b = &balls[n - i.unsigned_abs() as usize - 1];
        let term = b.translate(i);
        acc = Some(match acc {
            None => term,
            Some(a) => a.intersect(&term),
        });
    }
    acc.expect("n >= 1")
}

/// Detects the eventual tail rule of a materialized ball sequence on the
/// window `[start, horizon)`. Returns the prefix length and the tail.
fn infer_tail(
    balls: &[Subcategory],
    start: usize,
    horizon: usize,
    shift_candidates: &[i64],
) -> Option<(usize, Tail)> {
    let start = start.max(1);
    let t = start - 1; // zero-based index of the anchor ball
    if t + 2 >= horizon {
        return None;
    }
    // constant?
    if (t..horizon).all(|j| balls[j] == balls[t]) {
        return Some((start, Tail::Constant));
    }
    // pure shift?
    for &d in shift_candidates {
        if d == 0 {
            continue;
        }
        if (t..horizon - 1).all(|j| balls[j + 1] == balls[j].translate(d)) {
            return Some((
                start,
                Tail::Shift {
                    d,
                    overlay: Subcategory::zero(),
                },
            ));
        }
    }
    // shift with a pinned overlay?
    for &d in shift_candidates {
        if d == 0 {
            continue;
        }
        let overlay = (t + 1..horizon).fold(balls[t].clone(), |acc, j| acc.intersect(&balls[j]));
        let moving = balls[t].minus(&overlay);
        let ok = (t..horizon).all(|j| {
            balls[j] == moving.translate((j - t) as i64 * d).union(&overlay)
        });
        if ok {
            return Some((start, Tail::Shift { d, overlay }));
        }
    }
    None
}

/// Stable part of a shift tail: `overlay ∪ lim translate(moving, j*d)`.
fn tail_stable_part(
    moving: &Subcategory,
    d: i64,
    overlay: &Subcategory,
) -> Result<Subcategory, SubcatError> {
    let mut map = std::collections::BTreeMap::new();
    let roots: BTreeSet<usize> = moving
        .modules()
        .map(|(r, _)| r)
        .chain(overlay.modules().map(|(r, _)| r))
        .collect();
    for r in roots {
        let set = ShiftSet::tail_intersection(&moving.shifts(r), d, &overlay.shifts(r))?;
        if !set.is_empty() {
            map.insert(r, set);
        }
    }
    Ok(Subcategory::from_map(map))
}

/// Pointwise decision of `x ⊆ ∩_{j>=0} translate(s, j*d)` per module.
fn subcat_subset_of_limit(x: &Subcategory, s: &Subcategory, d: i64) -> bool {
    x.modules()
        .all(|(r, xs)| xs.subset_of_limit(&s.shifts(r), d))
}

fn metric_span(m: &Metric) -> i64 {
    let sub_span = |s: &Subcategory| -> i64 {
        s.modules().map(|(_, set)| set.span_bound()).max().unwrap_or(0)
    };
    let mut span = m.prefix.iter().map(sub_span).max().unwrap_or(0);
    if let Tail::Shift { overlay, .. } = &m.tail {
        span = span.max(sub_span(overlay));
    }
    span
}

// --- constructors ---

/// The aisle metric `{Σ^n U}` of an aisle `U` (requires `ΣU ⊆ U`).
pub fn make_aisle_metric(u: &Subcategory) -> Result<Metric, MetricError> {
    if !u.translate(1).is_subset(u) {
        return Err(MetricError::NotAnAisle);
    }
    Metric::new(
        vec![u.translate(1)],
        Tail::Shift {
            d: 1,
            overlay: Subcategory::zero(),
        },
        ExtProvenance::Guaranteed("aisle metric of a t-structure".into()),
    )
}

/// The constant metric `{U}`. Guaranteed when `U` is provably
/// extension-closed (thick, a uniform cohomological window over a thick
/// module class, or over a category without extensions).
pub fn make_constant_metric(t: &HomTable, u: &Subcategory) -> Result<Metric, MetricError> {
    let provenance = match provably_extension_closed(t, u) {
        Some(reason) => ExtProvenance::Guaranteed(format!("constant metric ({reason})")),
        None => ExtProvenance::Unverified,
    };
    Metric::new(vec![u.clone()], Tail::Constant, provenance)
}

/// The standard cohomology metric: all modules at shifts `>= n`.
pub fn make_cohomology_metric(t: &HomTable) -> Metric {
    let mut b1 = Subcategory::zero();
    for r in 0..t.root_count() {
        b1.insert(r, ShiftSet::ray_ge(1));
    }
    Metric::new(
        vec![b1],
        Tail::Shift {
            d: 1,
            overlay: Subcategory::zero(),
        },
        ExtProvenance::Guaranteed("cohomology metric".into()),
    )
    .expect("well-formed by construction")
}

/// Cohomology metric with exceptional degrees pinned in place:
/// `B_n = (everything at shifts >= n) ∪ exceptions`.
pub fn make_cohomology_window_metric(
    t: &HomTable,
    exceptions: &Subcategory,
) -> Result<Metric, MetricError> {
    let mut ray = Subcategory::zero();
    for r in 0..t.root_count() {
        ray.insert(r, ShiftSet::ray_ge(1));
    }
    let b1 = ray.union(exceptions);
    let semisimple = (0..t.root_count())
        .all(|i| (0..t.root_count()).all(|j| t.ext(i, j) == 0));
    // Extensions between the ray part and the pinned part vanish when the
    // pinned degrees stay at least two below the ray (no Hom or Ext can
    // connect them), so a provably closed pinned class keeps the ball closed.
    let separated = exceptions.modules().all(|(_, s)| {
        s.intervals()
            .iter()
            .all(|&(_, hi)| hi.is_some_and(|b| b <= -1))
    });
    let provenance = if exceptions.is_zero()
        || semisimple
        || (separated && provably_extension_closed(t, exceptions).is_some())
    {
        ExtProvenance::Guaranteed("cohomology metric with pinned degrees".into())
    } else {
        ExtProvenance::Unverified
    };
    Metric::new(
        vec![b1],
        Tail::Shift {
            d: 1,
            overlay: exceptions.minus(&ray),
        },
        provenance,
    )
}

/// Reindexed metric `B_n = base.ball(ceil(n/s))`.
pub fn make_slowdown(s: u32, base: Metric) -> Result<Metric, MetricError> {
    if s < 2 {
        return Err(MetricError::BadSlowdown);
    }
    let provenance = base.provenance.clone();
    Metric::new(
        vec![base.ball(1)],
        Tail::Slowdown {
            s,
            base: Box::new(base),
        },
        provenance,
    )
}

/// Provable reasons for extension-closedness of an additively closed set.
fn provably_extension_closed(t: &HomTable, u: &Subcategory) -> Option<&'static str> {
    if u.is_zero() {
        return Some("zero subcategory");
    }
    if is_thick(t, u) {
        return Some("thick subcategory");
    }
    // no extensions anywhere: every triangle splits
    let n = t.root_count();
    if (0..n).all(|i| (0..n).all(|j| t.ext(i, j) == 0)) {
        return Some("category without extensions");
    }
    // uniform cohomological window over a thick module class: the long exact
    // sequence confines both the degrees and (the class being wide) the
    // modules of the middle term
    let mask = u.module_mask(n);
    let window = u.modules().next().map(|(_, s)| s.clone())?;
    let uniform = u.modules().all(|(_, s)| *s == window);
    if uniform {
        let closure = crate::subcat::thick_closure_mask(t, &mask);
        if closure == mask {
            return Some("uniform window over a thick class");
        }
    }
    None
}

fn parse_constructor(t: &HomTable, v: &serde_json::Value) -> Result<Metric, MetricError> {
    let kind = v
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| MetricError::Parse("constructor needs a kind".into()))?;
    match kind {
        "cohomology" => Ok(make_cohomology_metric(t)),
        "aisle" => {
            let u = Subcategory::from_json(
                t,
                v.get("aisle")
                    .ok_or_else(|| MetricError::Parse("aisle constructor needs a subcategory".into()))?,
            )?;
            make_aisle_metric(&u)
        }
        "constant" => {
            let u = Subcategory::from_json(
                t,
                v.get("ball")
                    .ok_or_else(|| MetricError::Parse("constant constructor needs a ball".into()))?,
            )?;
            make_constant_metric(t, &u)
        }
        "cohomology_window" => {
            let e = Subcategory::from_json(
                t,
                v.get("exceptions").ok_or_else(|| {
                    MetricError::Parse("cohomology_window needs exceptions".into())
                })?,
            )?;
            make_cohomology_window_metric(t, &e)
        }
        "slowdown" => {
            let s = v
                .get("s")
                .and_then(|s| s.as_u64())
                .ok_or_else(|| MetricError::Parse("slowdown needs s".into()))?;
            let base = Metric::from_json(
                t,
                v.get("base")
                    .ok_or_else(|| MetricError::Parse("slowdown needs base".into()))?,
            )?;
            make_slowdown(s.try_into().map_err(|_| MetricError::BadSlowdown)?, base)
        }
        other => Err(MetricError::Parse(format!(
            "unknown metric constructor {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::Quiver;

    fn a1_table() -> HomTable {
        let q = Quiver::parse(r#"{"vertices":["1"],"arrows":[]}"#).unwrap();
        HomTable::build(q, 0).unwrap()
    }

    fn a2_table() -> HomTable {
        let q = Quiver::parse(r#"{"vertices":["1","2"],"arrows":[["2","1"]]}"#).unwrap();
        HomTable::build(q, 0).unwrap()
    }

    fn deg47(t: &HomTable) -> Metric {
        let mut exc = Subcategory::zero();
        exc.insert(0, ShiftSet::point(-47));
        make_cohomology_window_metric(t, &exc).unwrap()
    }

    #[test]
    fn cohomology_balls() {
        let t = a1_table();
        let m = make_cohomology_metric(&t);
        assert_eq!(m.ball(5).shifts(0), ShiftSet::ray_ge(5));
        let v = m.validate();
        assert!(v.is_metric && v.is_good);
    }

    #[test]
    fn constant_metric_balls() {
        let t = a2_table();
        let mut u = Subcategory::zero();
        u.insert(1, ShiftSet::all()); // <S1>
        let m = make_constant_metric(&t, &u).unwrap();
        for n in [1, 3, 12] {
            assert_eq!(m.ball(n), u);
        }
        let v = m.validate();
        assert!(v.is_metric && v.is_good);
        assert!(matches!(v.extension_closed, ExtStatus::Guaranteed(_)));
    }

    #[test]
    fn slowdown_balls_and_goodness() {
        let t = a1_table();
        let m = make_slowdown(2, make_cohomology_metric(&t)).unwrap();
        // ball(5) = base ball(3)
        assert_eq!(m.ball(5), make_cohomology_metric(&t).ball(3));
        let v = m.validate();
        assert!(v.is_metric);
        assert!(!v.is_good, "slowdown of the cohomology metric is not good");
    }

    #[test]
    fn degree47_metric() {
        let t = a1_table();
        let m = deg47(&t);
        assert_eq!(
            m.ball(5).shifts(0),
            ShiftSet::ray_ge(5).union(&ShiftSet::point(-47))
        );
        let v = m.validate();
        assert!(v.is_metric);
        assert!(!v.is_good, "the pinned degree breaks rapid decrease");
        // intersection ball survives exactly at the pinned point
        assert_eq!(m.intersection_ball().unwrap().shifts(0), ShiftSet::point(-47));
    }

    #[test]
    fn intersection_balls() {
        let t = a1_table();
        assert!(make_cohomology_metric(&t)
            .intersection_ball()
            .unwrap()
            .is_zero());
        let mut u = Subcategory::zero();
        u.insert(0, ShiftSet::all());
        let m = make_constant_metric(&t, &u).unwrap();
        assert_eq!(m.intersection_ball().unwrap(), u);
    }

    #[test]
    fn improvement_of_degree47_is_cohomology() {
        let t = a1_table();
        let m = deg47(&t);
        let imp = m.improvement().unwrap();
        assert!(imp.finite_horizon().is_none());
        let coh = make_cohomology_metric(&t);
        // C_1 = B_1, C_n = cohomology ball for n >= 2
        assert_eq!(imp.ball(1), m.ball(1));
        for n in 2..=40 {
            assert_eq!(imp.ball(n), coh.ball(n), "ball {n}");
        }
        let v = imp.validate();
        assert!(v.is_metric && v.is_good);
    }

    #[test]
    fn improvement_fixes_good_metrics() {
        let t = a2_table();
        let m = make_cohomology_metric(&t);
        let imp = m.improvement().unwrap();
        for n in 1..=30 {
            assert_eq!(imp.ball(n), m.ball(n));
        }
        // idempotence
        let imp2 = imp.improvement().unwrap();
        for n in 1..=30 {
            assert_eq!(imp2.ball(n), imp.ball(n));
        }
    }

    #[test]
    fn improvement_recursive_oracle() {
        // C_n = B_n ∩ ΣC_{n-1} ∩ Σ^{-1}C_{n-1} must agree with the closed
        // formula
        let t = a2_table();
        for m in [deg47(&t), make_slowdown(2, make_cohomology_metric(&t)).unwrap()] {
            let imp = m.improvement().unwrap();
            let mut rec: Vec<Subcategory> = vec![m.ball(1)];
            for n in 2..=12 {
                let prev = rec.last().unwrap();
                let c = m
                    .ball(n)
                    .intersect(&prev.translate(1))
                    .intersect(&prev.translate(-1));
                rec.push(c);
            }
            for (i, c) in rec.iter().enumerate() {
                assert_eq!(imp.ball(i + 1), *c, "recursive oracle at n={}", i + 1);
            }
        }
    }

    #[test]
    fn compare_examples() {
        let t = a1_table();
        let coh = make_cohomology_metric(&t);
        // slowdown is equivalent to its base
        let slow = make_slowdown(2, coh.clone()).unwrap();
        assert_eq!(slow.compare(&coh), CompareVerdict::Equivalent);
        // improvement refines the original
        let m = deg47(&t);
        let imp = m.improvement().unwrap();
        assert!(matches!(
            imp.compare(&m),
            CompareVerdict::FirstRefinesSecond | CompareVerdict::Equivalent
        ));
        // constant <S1> vs cohomology on A_2 is incomparable
        let t2 = a2_table();
        let mut u = Subcategory::zero();
        u.insert(1, ShiftSet::all());
        let c = make_constant_metric(&t2, &u).unwrap();
        let coh2 = make_cohomology_metric(&t2);
        assert_eq!(c.compare(&coh2), CompareVerdict::Incomparable);
    }

    #[test]
    fn aisle_metric_construction() {
        let t = a2_table();
        let mut u = Subcategory::zero();
        for r in 0..t.root_count() {
            u.insert(r, ShiftSet::ray_ge(0));
        }
        let m = make_aisle_metric(&u).unwrap();
        for n in 1..=8 {
            for r in 0..t.root_count() {
                assert_eq!(m.ball(n).shifts(r), ShiftSet::ray_ge(n as i64));
            }
        }
        let v = m.validate();
        assert!(v.is_metric && v.is_good);
        // zero aisle gives the constant-zero metric
        let z = make_aisle_metric(&Subcategory::zero()).unwrap();
        assert!(z.ball(3).is_zero());
        // a non-aisle is rejected
        let mut bad = Subcategory::zero();
        bad.insert(0, ShiftSet::point(0));
        assert!(make_aisle_metric(&bad).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = a2_table();
        let m = deg47(&a1_table());
        let t1 = a1_table();
        let json = m.to_json(&t1);
        let m2 = Metric::from_json(&t1, &json).unwrap();
        for n in 1..=10 {
            assert_eq!(m.ball(n), m2.ball(n));
        }
        let slow = make_slowdown(3, make_cohomology_metric(&t)).unwrap();
        let json = slow.to_json(&t);
        let s2 = Metric::from_json(&t, &json).unwrap();
        for n in 1..=10 {
            assert_eq!(slow.ball(n), s2.ball(n));
        }
        // constructor documents parse too
        let doc = serde_json::json!({"make": {"kind": "cohomology"}});
        let m3 = Metric::from_json(&t, &doc).unwrap();
        assert_eq!(m3.ball(2), make_cohomology_metric(&t).ball(2));
    }

    #[test]
    fn verifier_integration() {
        let t = a2_table();
        // hand-written constant metric over a non-extension-closed set
        let mut u = Subcategory::zero();
        u.insert(0, ShiftSet::all()); // S2
        u.insert(1, ShiftSet::all()); // S1
        let m = make_constant_metric(&t, &u).unwrap();
        assert!(matches!(m.provenance(), ExtProvenance::Unverified));
        let status = m.verify_extension_closed(&t, 2, 2).unwrap();
        assert!(matches!(status, ExtStatus::Counterexample(_)));
    }
}
