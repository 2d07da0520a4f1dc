//! Object-level descriptions of triangulated functors between two modeled
//! derived categories: metric transport (preimage and image), compression
//! checks and Serre-conjugate adjoints.

use crate::dercat::{DerIndec, DerObject, HomTable};
use crate::metric::{ExtProvenance, Metric, MetricError, Tail};
use crate::quiver::{dimvec_from_str, dimvec_to_string};
use crate::subcat::Subcategory;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum FunctorError {
    #[error("malformed functor document: {0}")]
    Parse(String),
    #[error("functor does not match the given tables")]
    TableMismatch,
    #[error("object map must cover every source root")]
    IncompleteMap,
    #[error("image metric requires a full functor (flag is unknown)")]
    NotKnownFull,
    #[error("serre conjugation needs a declared adjoint")]
    MissingAdjoint,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagState {
    CertifiedByConstructor,
    Asserted,
    Unknown,
}

impl FlagState {
    fn as_str(self) -> &'static str {
        match self {
            FlagState::CertifiedByConstructor => "certified",
            FlagState::Asserted => "asserted",
            FlagState::Unknown => "unknown",
        }
    }

    fn parse(s: &str) -> Result<Self, FunctorError> {
        match s {
            "certified" => Ok(FlagState::CertifiedByConstructor),
            "asserted" => Ok(FlagState::Asserted),
            "unknown" => Ok(FlagState::Unknown),
            other => Err(FunctorError::Parse(format!("bad flag value {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctorFlags {
    pub full: FlagState,
    pub faithful: FlagState,
    pub triangulated: FlagState,
}

impl FunctorFlags {
    pub fn unknown() -> Self {
        FunctorFlags {
            full: FlagState::Unknown,
            faithful: FlagState::Unknown,
            triangulated: FlagState::Unknown,
        }
    }
}

/// An object-level triangulated functor: the image of each source root at
/// shift zero, extended shift-equivariantly and additively. Flags are never
/// silently upgraded.
#[derive(Debug, Clone)]
pub struct FunctorSpec {
    pub name: String,
    pub source_hash: String,
    pub target_hash: String,
    object_map: Vec<DerObject>,
    pub flags: FunctorFlags,
    pub left_adjoint: Option<Box<FunctorSpec>>,
    pub right_adjoint: Option<Box<FunctorSpec>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompressionVerdict {
    Yes,
    No { ball_index: usize },
    Unknown,
}

impl FunctorSpec {
    pub fn new(
        name: impl Into<String>,
        source: &HomTable,
        target: &HomTable,
        object_map: Vec<DerObject>,
        flags: FunctorFlags,
    ) -> Result<Self, FunctorError> {
        if object_map.len() != source.root_count() {
            return Err(FunctorError::IncompleteMap);
        }
        for im in &object_map {
            for s in im.summands() {
                if s.root >= target.root_count() {
                    return Err(FunctorError::Parse("image root out of range".into()));
                }
            }
        }
        Ok(FunctorSpec {
            name: name.into(),
            source_hash: source.hash().to_string(),
            target_hash: target.hash().to_string(),
            object_map,
            flags,
            left_adjoint: None,
            right_adjoint: None,
        })
    }

    pub fn check_tables(&self, source: &HomTable, target: &HomTable) -> Result<(), FunctorError> {
        if self.source_hash != source.hash() || self.target_hash != target.hash() {
            return Err(FunctorError::TableMismatch);
        }
        Ok(())
    }

    pub fn image_of_root(&self, r: usize) -> &DerObject {
        &self.object_map[r]
    }

    /// Additive, shift-equivariant extension of the object map.
    pub fn apply(&self, x: &DerObject) -> DerObject {
        let mut summands = Vec::new();
        for s in x.summands() {
            for im in self.object_map[s.root].summands() {
                summands.push(im.shifted(s.shift));
            }
        }
        DerObject::from_summands(summands)
    }

    /// Ball-wise preimage of a subcategory: `(N, t)` allowed exactly when
    /// the image of `N@t` lands inside `ball`.
    pub fn preimage_subcat(&self, source: &HomTable, ball: &Subcategory) -> Subcategory {
        let mut map = BTreeMap::new();
        for r in 0..source.root_count() {
            let mut allowed = crate::subcat::ShiftSet::all();
            for im in self.object_map[r].summands() {
                allowed = allowed.intersect(&ball.shifts(im.root).translate(-im.shift));
            }
            if !allowed.is_empty() {
                map.insert(r, allowed);
            }
        }
        Subcategory::from_map(map)
    }

    /// Ball-wise add-closure of the image of a subcategory.
    pub fn image_subcat(&self, source: &HomTable, ball: &Subcategory) -> Subcategory {
        let mut out = Subcategory::zero();
        for (r, shifts) in ball.modules() {
            let _ = source;
            for im in self.object_map[r].summands() {
                out.insert(im.root, shifts.translate(im.shift));
            }
        }
        out
    }

    /// Transport of a metric on the target back along the functor. Always a
    /// metric; good when the input is good.
    pub fn preimage_metric(
        &self,
        source: &HomTable,
        m: &Metric,
    ) -> Result<Metric, FunctorError> {
        let provenance =
            ExtProvenance::Guaranteed("preimage metric under a triangulated functor".into());
        let prefix: Vec<Subcategory> = m
            .prefix()
            .iter()
            .map(|b| self.preimage_subcat(source, b))
            .collect();
        match m.tail() {
            Tail::Constant => Ok(Metric::new(prefix, Tail::Constant, provenance)?),
            Tail::Shift { d, overlay } if overlay.is_zero() => {
                // the preimage commutes with the global shift
                Ok(Metric::new(
                    prefix,
                    Tail::Shift {
                        d: *d,
                        overlay: Subcategory::zero(),
                    },
                    provenance,
                )?)
            }
            Tail::Shift { .. } => {
                // pinned degrees do not commute with the preimage of an
                // intersection; materialize and re-infer the tail
                self.transport_by_inference(source, m, provenance)
            }
            Tail::Slowdown { s, base } => {
                let base_pre = self.preimage_metric(source, base)?;
                Ok(Metric::new(
                    prefix,
                    Tail::Slowdown {
                        s: *s,
                        base: Box::new(base_pre),
                    },
                    provenance,
                )?)
            }
        }
    }

    fn transport_by_inference(
        &self,
        source: &HomTable,
        m: &Metric,
        provenance: ExtProvenance,
    ) -> Result<Metric, FunctorError> {
        let balls: Vec<Subcategory> = (1..=96)
            .map(|n| self.preimage_subcat(source, &m.ball(n)))
            .collect();
        Ok(Metric::from_materialized(
            balls,
            &m.shift_candidates(),
            provenance,
        ))
    }

    /// Transport of a metric on the source forward along the functor;
    /// requires fullness (certified or asserted) unless forced.
    pub fn image_metric(
        &self,
        source: &HomTable,
        m: &Metric,
        force: bool,
    ) -> Result<Metric, FunctorError> {
        if self.flags.full == FlagState::Unknown && !force {
            return Err(FunctorError::NotKnownFull);
        }
        let provenance = match self.flags.full {
            FlagState::Unknown => ExtProvenance::Unverified,
            _ => ExtProvenance::Guaranteed("image metric under a full triangulated functor".into()),
        };
        self.image_metric_raw(source, m, provenance)
    }

    fn image_metric_raw(
        &self,
        source: &HomTable,
        m: &Metric,
        provenance: ExtProvenance,
    ) -> Result<Metric, FunctorError> {
        let prefix: Vec<Subcategory> = m
            .prefix()
            .iter()
            .map(|b| self.image_subcat(source, b))
            .collect();
        match m.tail() {
            Tail::Constant => Ok(Metric::new(prefix, Tail::Constant, provenance)?),
            Tail::Shift { d, overlay } if overlay.is_zero() => Ok(Metric::new(
                prefix,
                Tail::Shift {
                    d: *d,
                    overlay: Subcategory::zero(),
                },
                provenance,
            )?),
            Tail::Shift { .. } => {
                let balls: Vec<Subcategory> = (1..=96)
                    .map(|n| self.image_subcat(source, &m.ball(n)))
                    .collect();
                Ok(Metric::from_materialized(
                    balls,
                    &m.shift_candidates(),
                    provenance,
                ))
            }
            Tail::Slowdown { s, base } => {
                let base_img = self.image_metric_raw(source, base, provenance.clone())?;
                Ok(Metric::new(
                    prefix,
                    Tail::Slowdown {
                        s: *s,
                        base: Box::new(base_img),
                    },
                    provenance,
                )?)
            }
        }
    }

    /// Decides whether the functor compresses `m_src` into `m_tgt`
    /// (for every n there is m with `F(B_m) ⊆ C_n`), via the refinement
    /// machinery applied to the image ball family.
    pub fn is_compression(
        &self,
        source: &HomTable,
        m_src: &Metric,
        m_tgt: &Metric,
    ) -> Result<CompressionVerdict, FunctorError> {
        // fullness is irrelevant here: only the image ball family matters
        let img = self.image_metric_raw(source, m_src, ExtProvenance::Unverified)?;
        Ok(match img.refines_public(m_tgt) {
            crate::metric::RefinesVerdict::Yes => CompressionVerdict::Yes,
            crate::metric::RefinesVerdict::No { ball_index } => {
                CompressionVerdict::No { ball_index }
            }
            crate::metric::RefinesVerdict::Unknown => CompressionVerdict::Unknown,
        })
    }

    /// The Serre conjugate adjoint: for `f` with a declared left adjoint `F`,
    /// the right adjoint of `f` is `S_src ∘ F ∘ S_tgt^{-1}`; symmetrically
    /// with a declared right adjoint. Fully-faithfulness flags carry over.
    pub fn serre_conjugate(
        &self,
        source: &HomTable,
        target: &HomTable,
    ) -> Result<FunctorSpec, FunctorError> {
        self.check_tables(source, target)?;
        if let Some(f) = &self.left_adjoint {
            // J = S_src ∘ F ∘ S_tgt^{-1} : target -> source
            let map = (0..target.root_count())
                .map(|r| {
                    let x = target.serre_inverse(DerIndec::new(r, 0));
                    let fx = f.apply(&DerObject::single(x));
                    DerObject::from_summands(
                        fx.summands().iter().map(|s| source.serre(*s)).collect(),
                    )
                })
                .collect();
            let mut j = FunctorSpec::new(
                format!("serre-conjugate({})", f.name),
                target,
                source,
                map,
                f.flags,
            )?;
            j.left_adjoint = Some(Box::new(self.clone()));
            Ok(j)
        } else if let Some(g) = &self.right_adjoint {
            // L = S_tgt^{-1} ∘ G ∘ S_src : target_of_g -> source_of_g
            let map = (0..target.root_count())
                .map(|r| {
                    let x = target.serre(DerIndec::new(r, 0));
                    let gx = g.apply(&DerObject::single(x));
                    DerObject::from_summands(
                        gx.summands()
                            .iter()
                            .map(|s| source.serre_inverse(*s))
                            .collect(),
                    )
                })
                .collect();
            let mut l = FunctorSpec::new(
                format!("serre-conjugate({})", g.name),
                target,
                source,
                map,
                g.flags,
            )?;
            l.right_adjoint = Some(Box::new(self.clone()));
            Ok(l)
        } else {
            Err(FunctorError::MissingAdjoint)
        }
    }

    /// Necessary object-level certificate for an adjunction: the Hom
    /// dimension identity on all indecomposable pairs within the relative
    /// shift window `[-2, 2]`.
    pub fn adjunction_dims_hold(
        left: &FunctorSpec,
        right: &FunctorSpec,
        left_source: &HomTable,
        right_source: &HomTable,
    ) -> bool {
        for x in 0..left_source.root_count() {
            for y in 0..right_source.root_count() {
                for s in -2i64..=2 {
                    let fx = left.apply(&DerObject::single(DerIndec::new(x, 0)));
                    let ys = DerObject::single(DerIndec::new(y, s));
                    let lhs = right_source.hom_dim_objects(&fx, &ys);
                    let gy = right.apply(&ys);
                    let rhs =
                        left_source.hom_dim_objects(&DerObject::single(DerIndec::new(x, 0)), &gy);
                    if lhs != rhs {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Object-level full-faithfulness certificate: the map is injective on
    /// indecomposables and preserves all Hom dimensions.
    pub fn certify_fully_faithful(&mut self, source: &HomTable, target: &HomTable) -> bool {
        let singles: Vec<Option<DerIndec>> = self
            .object_map
            .iter()
            .map(|o| match o.summands() {
                [x] => Some(*x),
                _ => None,
            })
            .collect();
        if singles.iter().any(Option::is_none) {
            return false;
        }
        let images: Vec<DerIndec> = singles.into_iter().flatten().collect();
        let mut seen = std::collections::BTreeSet::new();
        if !images.iter().all(|i| seen.insert(*i)) {
            return false;
        }
        for r1 in 0..source.root_count() {
            for r2 in 0..source.root_count() {
                for s in -2i64..=2 {
                    let lhs = source.hom_dim_derived(DerIndec::new(r1, 0), DerIndec::new(r2, s));
                    let rhs =
                        target.hom_dim_derived(images[r1], images[r2].shifted(s));
                    if u64::from(lhs) != u64::from(rhs) {
                        return false;
                    }
                }
            }
        }
        self.flags.full = FlagState::CertifiedByConstructor;
        self.flags.faithful = FlagState::CertifiedByConstructor;
        true
    }

    pub fn to_json(&self, source: &HomTable, target: &HomTable) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (r, im) in self.object_map.iter().enumerate() {
            map.insert(
                dimvec_to_string(source.registry().root(r)),
                serde_json::Value::Array(
                    im.summands()
                        .iter()
                        .map(|s| {
                            serde_json::json!([
                                dimvec_to_string(target.registry().root(s.root)),
                                s.shift
                            ])
                        })
                        .collect(),
                ),
            );
        }
        let mut doc = serde_json::json!({
            "name": self.name,
            "source": self.source_hash,
            "target": self.target_hash,
            "map": map,
            "flags": {
                "full": self.flags.full.as_str(),
                "faithful": self.flags.faithful.as_str(),
                "triangulated": self.flags.triangulated.as_str(),
            },
        });
        if let Some(f) = &self.left_adjoint {
            doc["left_adjoint"] = f.to_json(target, source);
        }
        if let Some(g) = &self.right_adjoint {
            doc["right_adjoint"] = g.to_json(target, source);
        }
        doc
    }

    pub fn from_json(
        source: &HomTable,
        target: &HomTable,
        v: &serde_json::Value,
    ) -> Result<FunctorSpec, FunctorError> {
        let name = v
            .get("name")
            .and_then(|n| n.as_str())
            .unwrap_or("functor")
            .to_string();
        if let (Some(sh), Some(th)) = (
            v.get("source").and_then(|x| x.as_str()),
            v.get("target").and_then(|x| x.as_str()),
        ) {
            if sh != source.hash() || th != target.hash() {
                return Err(FunctorError::TableMismatch);
            }
        }
        let map_doc = v
            .get("map")
            .and_then(|m| m.as_object())
            .ok_or_else(|| FunctorError::Parse("missing object map".into()))?;
        let mut object_map = vec![None; source.root_count()];
        for (key, val) in map_doc {
            let dv = dimvec_from_str(key)
                .map_err(|_| FunctorError::Parse(format!("bad root key {key:?}")))?;
            let r = source
                .registry()
                .index_of(&dv)
                .ok_or_else(|| FunctorError::Parse(format!("{key:?} is not a source root")))?;
            let summands = val
                .as_array()
                .ok_or_else(|| FunctorError::Parse("map values must be arrays".into()))?
                .iter()
                .map(|pair| {
                    let p = pair
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| FunctorError::Parse("expected [root, shift]".into()))?;
                    let dv = dimvec_from_str(
                        p[0].as_str()
                            .ok_or_else(|| FunctorError::Parse("root must be a string".into()))?,
                    )
                    .map_err(|_| FunctorError::Parse("bad target root".into()))?;
                    let root = target
                        .registry()
                        .index_of(&dv)
                        .ok_or_else(|| FunctorError::Parse("not a target root".into()))?;
                    let shift = p[1]
                        .as_i64()
                        .ok_or_else(|| FunctorError::Parse("shift must be an integer".into()))?;
                    Ok(DerIndec::new(root, shift))
                })
                .collect::<Result<Vec<_>, FunctorError>>()?;
            object_map[r] = Some(DerObject::from_summands(summands));
        }
        let object_map = object_map
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(FunctorError::IncompleteMap)?;
        let flags = match v.get("flags") {
            None => FunctorFlags::unknown(),
            Some(f) => FunctorFlags {
                full: parse_flag(f, "full")?,
                faithful: parse_flag(f, "faithful")?,
                triangulated: parse_flag(f, "triangulated")?,
            },
        };
        let mut spec = FunctorSpec::new(name, source, target, object_map, flags)?;
        if let Some(la) = v.get("left_adjoint") {
            spec.left_adjoint = Some(Box::new(FunctorSpec::from_json(target, source, la)?));
        }
        if let Some(ra) = v.get("right_adjoint") {
            spec.right_adjoint = Some(Box::new(FunctorSpec::from_json(target, source, ra)?));
        }
        Ok(spec)
    }
}

fn parse_flag(flags: &serde_json::Value, key: &str) -> Result<FlagState, FunctorError> {
    match flags.get(key).and_then(|v| v.as_str()) {
        None => Ok(FlagState::Unknown),
        Some(s) => FlagState::parse(s),
    }
}

/// The identity functor (certified everything; self-adjoint).
pub fn identity(t: &HomTable) -> FunctorSpec {
    let map = (0..t.root_count())
        .map(|r| DerObject::single(DerIndec::new(r, 0)))
        .collect();
    let flags = FunctorFlags {
        full: FlagState::CertifiedByConstructor,
        faithful: FlagState::CertifiedByConstructor,
        triangulated: FlagState::CertifiedByConstructor,
    };
    let mut f = FunctorSpec::new("identity", t, t, map, flags).expect("identity is total");
    let bare = f.clone();
    f.left_adjoint = Some(Box::new(bare.clone()));
    f.right_adjoint = Some(Box::new(bare));
    f
}

/// The shift power `Σ^k` (certified; adjoints are the inverse shifts).
pub fn shift_power(t: &HomTable, k: i64) -> FunctorSpec {
    let build = |k: i64| {
        let map = (0..t.root_count())
            .map(|r| DerObject::single(DerIndec::new(r, k)))
            .collect();
        let flags = FunctorFlags {
            full: FlagState::CertifiedByConstructor,
            faithful: FlagState::CertifiedByConstructor,
            triangulated: FlagState::CertifiedByConstructor,
        };
        FunctorSpec::new(format!("shift^{k}"), t, t, map, flags).expect("shift is total")
    };
    let mut f = build(k);
    f.left_adjoint = Some(Box::new(build(-k)));
    f.right_adjoint = Some(Box::new(build(-k)));
    f
}

/// Evaluation at a vertex: `RHom(P_v, -) : D^b(KQ) -> D^b(K)`, exact since
/// `P_v` is projective. Comes with its left adjoint `- ⊗ P_v` declared.
pub fn vertex_evaluation(
    source: &HomTable,
    target_a1: &HomTable,
    vertex: usize,
) -> Result<FunctorSpec, FunctorError> {
    if target_a1.root_count() != 1 {
        return Err(FunctorError::Parse(
            "vertex evaluation targets the category of graded vector spaces (an A_1 table)".into(),
        ));
    }
    let map = (0..source.root_count())
        .map(|r| {
            let mult = source.registry().root(r)[vertex];
            DerObject::from_summands(vec![DerIndec::new(0, 0); mult as usize])
        })
        .collect();
    let flags = FunctorFlags {
        full: FlagState::Unknown,
        faithful: FlagState::Unknown,
        triangulated: FlagState::CertifiedByConstructor,
    };
    let mut g = FunctorSpec::new(
        format!("RHom(P_{},-)", source.quiver().labels()[vertex]),
        source,
        target_a1,
        map,
        flags,
    )?;
    g.left_adjoint = Some(Box::new(tensor_projective(target_a1, source, vertex)?));
    Ok(g)
}

/// `- ⊗ P_v : D^b(K) -> D^b(KQ)`; fully faithful (certified by the Hom
/// dimension check).
pub fn tensor_projective(
    source_a1: &HomTable,
    target: &HomTable,
    vertex: usize,
) -> Result<FunctorSpec, FunctorError> {
    if source_a1.root_count() != 1 {
        return Err(FunctorError::Parse(
            "tensor with a projective starts from an A_1 table".into(),
        ));
    }
    let p = target.projective_root(vertex);
    let map = vec![DerObject::single(DerIndec::new(p, 0))];
    let flags = FunctorFlags {
        full: FlagState::Unknown,
        faithful: FlagState::Unknown,
        triangulated: FlagState::CertifiedByConstructor,
    };
    let mut f = FunctorSpec::new(
        format!("-⊗P_{}", target.quiver().labels()[vertex]),
        source_a1,
        target,
        map,
        flags,
    )?;
    f.certify_fully_faithful(source_a1, target);
    Ok(f)
}

/// Inclusion of a thick subcategory presented by an explicit root map
/// (source root index -> target indecomposable); certified fully faithful
/// when the Hom dimensions match.
pub fn inclusion(
    source: &HomTable,
    target: &HomTable,
    images: Vec<DerIndec>,
) -> Result<FunctorSpec, FunctorError> {
    let map = images.into_iter().map(DerObject::single).collect();
    let mut f = FunctorSpec::new(
        "inclusion",
        source,
        target,
        map,
        FunctorFlags {
            full: FlagState::Unknown,
            faithful: FlagState::Unknown,
            triangulated: FlagState::Asserted,
        },
    )?;
    if !f.certify_fully_faithful(source, target) {
        return Err(FunctorError::Parse(
            "inclusion images do not preserve Hom dimensions".into(),
        ));
    }
    Ok(f)
}

/// The zero functor.
pub fn zero_functor(source: &HomTable, target: &HomTable) -> FunctorSpec {
    let map = (0..source.root_count()).map(|_| DerObject::zero()).collect();
    FunctorSpec::new("zero", source, target, map, FunctorFlags::unknown())
        .expect("zero map is total")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{make_cohomology_metric, make_constant_metric, CompareVerdict};
    use crate::quiver::Quiver;
    use crate::subcat::ShiftSet;

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
    const S1: usize = 1;
    const P2: usize = 2;

    #[test]
    fn vertex_evaluation_objects() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        // S1 -> 0, P2 -> K, S2 -> K
        assert!(g.apply(&DerObject::single(DerIndec::new(S1, 0))).is_zero());
        assert_eq!(
            g.apply(&DerObject::single(DerIndec::new(P2, 0))),
            DerObject::single(DerIndec::new(0, 0))
        );
        assert_eq!(
            g.apply(&DerObject::single(DerIndec::new(S2, 3))),
            DerObject::single(DerIndec::new(0, 3))
        );
        assert!(g.apply(&DerObject::zero()).is_zero());
    }

    #[test]
    fn tensor_projective_is_fully_faithful() {
        let (t1, t2) = (a1(), a2());
        let f = tensor_projective(&t1, &t2, 1).unwrap();
        assert_eq!(f.flags.full, FlagState::CertifiedByConstructor);
        assert_eq!(f.flags.faithful, FlagState::CertifiedByConstructor);
        assert_eq!(
            f.apply(&DerObject::single(DerIndec::new(0, 5))),
            DerObject::single(DerIndec::new(P2, 5))
        );
    }

    #[test]
    fn adjunction_dimension_identity() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let f = g.left_adjoint.as_deref().unwrap();
        assert!(FunctorSpec::adjunction_dims_hold(f, &g, &t1, &t2));
    }

    #[test]
    fn preimage_of_cohomology_metric() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let m = make_cohomology_metric(&t1);
        let pre = g.preimage_metric(&t2, &m).unwrap();
        // S1 free at all shifts; P2 and S2 at shifts >= n
        for n in 1..=6 {
            let b = pre.ball(n);
            assert!(b.shifts(S1).is_all());
            assert_eq!(b.shifts(P2), ShiftSet::ray_ge(n as i64));
            assert_eq!(b.shifts(S2), ShiftSet::ray_ge(n as i64));
        }
        let v = pre.validate();
        assert!(v.is_metric && v.is_good);
    }

    #[test]
    fn preimage_under_identity_and_zero() {
        let t2 = a2();
        let m = make_cohomology_metric(&t2);
        let id = identity(&t2);
        let pre = id.preimage_metric(&t2, &m).unwrap();
        for n in 1..=5 {
            assert_eq!(pre.ball(n), m.ball(n));
        }
        let z = zero_functor(&t2, &t2);
        let pre = z.preimage_metric(&t2, &m).unwrap();
        for n in 1..=5 {
            assert!(pre.ball(n).is_everything(&t2));
        }
    }

    #[test]
    fn image_metric_examples() {
        let (t1, t2) = (a1(), a2());
        let f = tensor_projective(&t1, &t2, 1).unwrap();
        let m = make_cohomology_metric(&t1);
        let img = f.image_metric(&t1, &m, false).unwrap();
        for n in 1..=5 {
            let b = img.ball(n);
            assert_eq!(b.shifts(P2), ShiftSet::ray_ge(n as i64));
            assert!(b.shifts(S1).is_empty() && b.shifts(S2).is_empty());
        }
        // identity image is the metric itself
        let id = identity(&t2);
        let m2 = make_cohomology_metric(&t2);
        let img = id.image_metric(&t2, &m2, false).unwrap();
        for n in 1..=5 {
            assert_eq!(img.ball(n), m2.ball(n));
        }
    }

    #[test]
    fn image_of_inclusion_constant_metric() {
        let (t1, t2) = (a1(), a2());
        let inc = inclusion(&t1, &t2, vec![DerIndec::new(S2, 0)]).unwrap();
        let mut u = Subcategory::zero();
        u.insert(0, ShiftSet::all());
        let m = make_constant_metric(&t1, &u).unwrap();
        let img = inc.image_metric(&t1, &m, false).unwrap();
        for n in 1..=4 {
            assert!(img.ball(n).shifts(S2).is_all());
            assert!(img.ball(n).shifts(S1).is_empty());
        }
    }

    #[test]
    fn compression_examples() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let m = make_cohomology_metric(&t1);
        let pre = g.preimage_metric(&t2, &m).unwrap();
        // G compresses its preimage metric into the original
        assert_eq!(
            g.is_compression(&t2, &pre, &m).unwrap(),
            CompressionVerdict::Yes
        );
        // F = -⊗P_2 compresses the cohomology metric into the preimage
        let f = g.left_adjoint.as_deref().unwrap();
        assert_eq!(
            f.is_compression(&t1, &m, &pre).unwrap(),
            CompressionVerdict::Yes
        );
        // identity from a coarse metric into a strictly finer one is not a
        // compression
        let coarse = make_constant_metric(&t2, &Subcategory::everything(&t2)).unwrap();
        let finer = make_cohomology_metric(&t2);
        let id = identity(&t2);
        assert!(matches!(
            id.is_compression(&t2, &coarse, &finer).unwrap(),
            CompressionVerdict::No { .. }
        ));
    }

    #[test]
    fn serre_conjugate_of_vertex_evaluation() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let j = g.serre_conjugate(&t2, &t1).unwrap();
        // J(K@0) = S2@0, fixed by the validated translate convention
        assert_eq!(
            j.apply(&DerObject::single(DerIndec::new(0, 0))),
            DerObject::single(DerIndec::new(S2, 0))
        );
        // adjunction dimension certificate for (G, J)
        assert!(FunctorSpec::adjunction_dims_hold(&g, &j, &t2, &t1));
        // fully-faithful flags copied from F
        assert_eq!(j.flags.full, FlagState::CertifiedByConstructor);
    }

    #[test]
    fn serre_conjugate_of_identity() {
        let t2 = a2();
        let id = identity(&t2);
        let j = id.serre_conjugate(&t2, &t2).unwrap();
        for r in 0..t2.root_count() {
            assert_eq!(
                j.apply(&DerObject::single(DerIndec::new(r, 0))),
                DerObject::single(DerIndec::new(r, 0))
            );
        }
    }

    #[test]
    fn lemma_image_refines_preimage() {
        // for an adjoint pair with F fully faithful, the image metric under F
        // refines the preimage metric under G
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let f = g.left_adjoint.as_deref().unwrap();
        let m = make_cohomology_metric(&t1);
        let img = f.image_metric(&t1, &m, false).unwrap();
        let pre = g.preimage_metric(&t2, &m).unwrap();
        assert!(matches!(
            img.compare(&pre),
            CompareVerdict::FirstRefinesSecond | CompareVerdict::Equivalent
        ));
    }

    #[test]
    fn json_round_trip() {
        let (t1, t2) = (a1(), a2());
        let g = vertex_evaluation(&t2, &t1, 1).unwrap();
        let doc = g.to_json(&t2, &t1);
        let g2 = FunctorSpec::from_json(&t2, &t1, &doc).unwrap();
        for r in 0..t2.root_count() {
            assert_eq!(
                g.apply(&DerObject::single(DerIndec::new(r, 0))),
                g2.apply(&DerObject::single(DerIndec::new(r, 0)))
            );
        }
        assert!(g2.left_adjoint.is_some());
    }
}
