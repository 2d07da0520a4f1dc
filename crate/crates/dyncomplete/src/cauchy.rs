//! Finite-window Cauchy diagnostics: cones of explicit maps, Cauchy-window
//! verification against a metric, and null-sequence tests.
//!
//! Only finite windows (with an optional constant-identity tail) are
//! supported; the genuinely infinite limits are delivered by the closed
//! completion formula instead.

use crate::dercat::{DerIndec, DerObject, DercatError, HomTable};
use crate::metric::Metric;
use crate::replin::{self, RepError, RepMap, Representation};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum CauchyError {
    #[error("malformed window document: {0}")]
    Parse(String),
    #[error("window maps must connect consecutive objects")]
    NotComposable,
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Dercat(#[from] DercatError),
}

/// A map between two window objects: one intertwiner block per shift where
/// both objects have summands, plus declared degree-one components that are
/// only tracked at dimension level.
#[derive(Debug, Clone)]
pub struct WindowMap {
    pub blocks: BTreeMap<i64, RepMap>,
    pub ext_components: Vec<(usize, usize)>,
}

impl WindowMap {
    pub fn degree_zero(blocks: BTreeMap<i64, RepMap>) -> Self {
        WindowMap {
            blocks,
            ext_components: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        WindowMap {
            blocks: BTreeMap::new(),
            ext_components: Vec::new(),
        }
    }
}

/// A finite directed diagram `E_1 -> E_2 -> ...` with explicit maps.
#[derive(Debug, Clone)]
pub struct MapWindow {
    pub objects: Vec<DerObject>,
    pub maps: Vec<WindowMap>,
    /// Declared tail `E_r -> E_r -> ...` by identities.
    pub tail_identity: bool,
}

/// Block representation of the shift-`s` part of an object, built from the
/// table witnesses in summand order.
fn shift_part(t: &HomTable, x: &DerObject, s: i64) -> Representation {
    let mut rep = Representation::zero(t.quiver());
    for sm in x.summands() {
        if sm.shift == s {
            rep = rep.direct_sum(t.witness(sm.root));
        }
    }
    rep
}

fn shifts_of(x: &DerObject) -> Vec<i64> {
    let mut v: Vec<i64> = x.summands().iter().map(|s| s.shift).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Cone of a degree-zero map between module objects at one shift:
/// `coker(f)` at the same shift plus `ker(f)` one shift up, both decomposed
/// into indecomposables.
pub fn cone_of_map(
    t: &HomTable,
    f: &RepMap,
    src: &Representation,
    tgt: &Representation,
    shift: i64,
) -> Result<DerObject, CauchyError> {
    let kc = replin::kernel_cokernel(t.quiver(), f, src, tgt)?;
    let mut summands = Vec::new();
    for (r, c) in t.decompose(&kc.coker)? {
        for _ in 0..c {
            summands.push(DerIndec::new(r, shift));
        }
    }
    for (r, c) in t.decompose(&kc.ker)? {
        for _ in 0..c {
            summands.push(DerIndec::new(r, shift + 1));
        }
    }
    Ok(DerObject::from_summands(summands))
}

/// Cone of a window map: per-shift cones summed up (triangles add).
fn cone_of_window_map(
    t: &HomTable,
    src: &DerObject,
    tgt: &DerObject,
    f: &WindowMap,
) -> Result<DerObject, CauchyError> {
    let mut shifts = shifts_of(src);
    shifts.extend(shifts_of(tgt));
    shifts.sort_unstable();
    shifts.dedup();
    let mut out = DerObject::zero();
    for s in shifts {
        let sp = shift_part(t, src, s);
        let tp = shift_part(t, tgt, s);
        let block = match f.blocks.get(&s) {
            Some(b) => b.clone(),
            None => RepMap::zero(&sp, &tp),
        };
        let cone = cone_of_map(t, &block, &sp, &tp, s)?;
        out = out.sum(&cone);
    }
    Ok(out)
}

fn compose_window_maps(
    t: &HomTable,
    objects: &[DerObject],
    maps: &[WindowMap],
    a: usize,
    b: usize,
) -> WindowMap {
    // composite of maps a -> a+1 -> ... -> b (indices 0-based, a < b)
    let mut blocks: BTreeMap<i64, RepMap> = BTreeMap::new();
    for s in shifts_of(&objects[a]) {
        let mut cur = match maps[a].blocks.get(&s) {
            Some(m) => m.clone(),
            None => RepMap::zero(
                &shift_part(t, &objects[a], s),
                &shift_part(t, &objects[a + 1], s),
            ),
        };
        for (step, m) in maps.iter().enumerate().take(b).skip(a + 1) {
            let next = match m.blocks.get(&s) {
                Some(g) => g.clone(),
                None => RepMap::zero(
                    &shift_part(t, &objects[step], s),
                    &shift_part(t, &objects[step + 1], s),
                ),
            };
            cur = next.compose(&cur);
        }
        blocks.insert(s, cur);
    }
    WindowMap {
        blocks,
        ext_components: Vec::new(),
    }
}

/// Verdict of a Cauchy-window check at ball index `i`.
#[derive(Debug, Clone)]
pub struct CauchyVerdict {
    /// Least window index (1-based) from which every later pairwise cone
    /// lies in the ball, when one exists.
    pub cauchy_from: Option<usize>,
    /// Same with all shifted cones `Σ^j D`, `|j| <= shift_bound`.
    pub good_cauchy_from: Option<usize>,
    pub shift_bound: i64,
    /// Pairwise cones, for reporting.
    pub cones: Vec<((usize, usize), DerObject)>,
    /// Set when the window declares degree-one components; verdicts are then
    /// dimension-level only and reported as absent.
    pub dimension_level: bool,
}

/// Checks the Cauchy condition of the window against ball `i` of the metric.
pub fn window_is_cauchy(
    t: &HomTable,
    w: &MapWindow,
    m: &Metric,
    i: usize,
    shift_bound: i64,
) -> Result<CauchyVerdict, CauchyError> {
    if w.objects.len() != w.maps.len() + 1 {
        return Err(CauchyError::NotComposable);
    }
    if w.maps.iter().any(|f| !f.ext_components.is_empty()) {
        return Ok(CauchyVerdict {
            cauchy_from: None,
            good_cauchy_from: None,
            shift_bound,
            cones: Vec::new(),
            dimension_level: true,
        });
    }
    let r = w.objects.len();
    let ball = m.ball(i);
    let mut cones = Vec::new();
    // in_ball[a][b] for 1 <= a < b <= r (window pairs); the identity tail
    // contributes the pairs (a, r+..) with the same cone as (a, r) and zero
    // cones beyond, which never obstruct
    let mut ok = vec![vec![true; r + 1]; r + 1];
    let mut good_ok = vec![vec![true; r + 1]; r + 1];
    for a in 1..r {
        for b in (a + 1)..=r {
            let f = compose_window_maps(t, &w.objects, &w.maps, a - 1, b - 1);
            let cone = cone_of_window_map(t, &w.objects[a - 1], &w.objects[b - 1], &f)?;
            ok[a][b] = ball.contains_object(&cone);
            good_ok[a][b] = (-shift_bound..=shift_bound)
                .all(|j| ball.contains_object(&cone.shifted(j)));
            cones.push(((a, b), cone));
        }
    }
    let from = |table: &Vec<Vec<bool>>| -> Option<usize> {
        (1..=r).find(|&start| {
            (start..r).all(|a| ((a + 1)..=r).all(|b| table[a][b]))
        })
    };
    let mut cauchy_from = from(&ok);
    let mut good_cauchy_from = from(&good_ok);
    if !w.tail_identity {
        // without a declared tail the verdict is about the window only; an
        // empty suffix is not evidence, so demand at least the last pair
        if r >= 2 {
            if cauchy_from == Some(r) {
                cauchy_from = None;
            }
            if good_cauchy_from == Some(r) {
                good_cauchy_from = None;
            }
        }
    }
    Ok(CauchyVerdict {
        cauchy_from,
        good_cauchy_from,
        shift_bound,
        cones,
        dimension_level: false,
    })
}

/// Outcome of the necessary-condition test for a null sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NullVerdict {
    NullConsistent,
    /// First ball index `i` that obstructs, with the window index where
    /// membership fails.
    Obstruction { index: usize, ball: usize },
}

/// Tests the necessary condition for the module colimit to vanish:
/// eventually `E_m` lies in every ball (balls are additively closed, so
/// summand membership is plain membership).
pub fn null_test(
    t: &HomTable,
    w: &MapWindow,
    m: &Metric,
    i_max: usize,
) -> Result<NullVerdict, CauchyError> {
    let _ = t;
    let r = w.objects.len();
    if r == 0 {
        return Ok(NullVerdict::NullConsistent);
    }
    for i in 1..=i_max {
        let ball = m.ball(i);
        // eventual membership holds exactly when the last object belongs
        // (the declared tail repeats it; without a tail the window suffix is
        // judged the same way)
        if !ball.contains_object(&w.objects[r - 1]) {
            // report the start of the failing suffix
            let mut index = r;
            while index > 1 && !ball.contains_object(&w.objects[index - 2]) {
                index -= 1;
            }
            return Ok(NullVerdict::Obstruction { index, ball: i });
        }
    }
    Ok(NullVerdict::NullConsistent)
}

/// Parses a window document: objects as lists of `[dimvec, shift]`, maps as
/// per-shift per-vertex matrix blocks against the canonical witnesses.
pub fn window_from_json(t: &HomTable, v: &serde_json::Value) -> Result<MapWindow, CauchyError> {
    let objects: Vec<DerObject> = v
        .get("objects")
        .and_then(|o| o.as_array())
        .ok_or_else(|| CauchyError::Parse("missing objects".into()))?
        .iter()
        .map(|o| crate::dercat::der_object_from_json(t, o))
        .collect::<Result<_, _>>()?;
    if objects.is_empty() {
        return Err(CauchyError::Parse("window needs at least one object".into()));
    }
    let maps_doc = v
        .get("maps")
        .and_then(|m| m.as_array())
        .ok_or_else(|| CauchyError::Parse("missing maps".into()))?;
    if maps_doc.len() + 1 != objects.len() {
        return Err(CauchyError::NotComposable);
    }
    let mut maps = Vec::with_capacity(maps_doc.len());
    for (idx, doc) in maps_doc.iter().enumerate() {
        let mut blocks = BTreeMap::new();
        if let Some(obj) = doc.get("blocks").and_then(|b| b.as_object()) {
            for (key, mat) in obj {
                let s: i64 = key
                    .parse()
                    .map_err(|_| CauchyError::Parse(format!("bad shift key {key:?}")))?;
                let sp = shift_part(t, &objects[idx], s);
                let tp = shift_part(t, &objects[idx + 1], s);
                let f = replin::repmap_from_json(t.quiver(), &sp, &tp, mat)?;
                blocks.insert(s, f);
            }
        }
        let ext_components = doc
            .get("ext")
            .and_then(|e| e.as_array())
            .map(|arr| {
                arr.iter()
                    .filter_map(|p| {
                        let from = p.get("from")?.as_u64()? as usize;
                        let to = p.get("to")?.as_u64()? as usize;
                        Some((from, to))
                    })
                    .collect()
            })
            .unwrap_or_default();
        maps.push(WindowMap {
            blocks,
            ext_components,
        });
    }
    let tail_identity = matches!(
        v.get("tail").and_then(|t| t.as_str()),
        Some("constant-identity")
    );
    Ok(MapWindow {
        objects,
        maps,
        tail_identity,
    })
}
