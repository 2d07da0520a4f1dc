//! Combinatorial model of the bounded derived category of a Dynkin path
//! algebra: indecomposables as (positive root, shift), the full Hom/Ext
//! dimension table, AR translate and Serre functor.
//!
//! Cohomological indexing: `H^i(Σ^s M)` is `M` exactly when `i = -s`.

use crate::quiver::{dimvec_from_str, dimvec_to_string, DimVec, Quiver, QuiverError, RootRegistry};
use crate::replin::{self, RepError, Representation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::cell::OnceCell;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum DercatError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("object does not belong to this table (quiver hash mismatch)")]
    TableMismatch,
    #[error("cache entry malformed or stale: {0}")]
    Cache(String),
    #[error("internal consistency violation: {0}")]
    Internal(String),
}

/// An indecomposable object of the derived category: `Σ^shift M_root`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DerIndec {
    pub root: usize,
    pub shift: i64,
}

impl DerIndec {
    pub fn new(root: usize, shift: i64) -> Self {
        DerIndec { root, shift }
    }

    pub fn shifted(self, by: i64) -> Self {
        DerIndec {
            root: self.root,
            shift: self.shift + by,
        }
    }
}

/// A finite multiset of indecomposables; the empty multiset is the zero
/// object.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerObject {
    summands: Vec<DerIndec>,
}

impl DerObject {
    pub fn zero() -> Self {
        DerObject::default()
    }

    pub fn from_summands(mut summands: Vec<DerIndec>) -> Self {
        summands.sort();
        DerObject { summands }
    }

    pub fn single(x: DerIndec) -> Self {
        DerObject { summands: vec![x] }
    }

    pub fn summands(&self) -> &[DerIndec] {
        &self.summands
    }

    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn shifted(&self, by: i64) -> Self {
        DerObject {
            summands: self.summands.iter().map(|s| s.shifted(by)).collect(),
        }
    }

    pub fn sum(&self, other: &DerObject) -> Self {
        let mut s = self.summands.clone();
        s.extend_from_slice(&other.summands);
        DerObject::from_summands(s)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    v: u32,
    quiver_hash: String,
    hom: Vec<Vec<u32>>,
    ext: Vec<Vec<u32>>,
    tau: Vec<(usize, i64)>,
    proj: Vec<Option<usize>>,
    inj: Vec<Option<usize>>,
}

/// The complete morphism-dimension data of the derived category, plus the
/// AR translate. Immutable after construction and freely shareable.
pub struct HomTable {
    quiver: Quiver,
    registry: RootRegistry,
    hash: String,
    seed: u64,
    hom: Vec<Vec<u32>>,
    ext: Vec<Vec<u32>>,
    /// `proj[r] = Some(v)` when root `r` is the projective at vertex `v`.
    proj: Vec<Option<usize>>,
    inj: Vec<Option<usize>>,
    /// AR translate as (root, shift delta); shift-equivariant.
    tau: Vec<(usize, i64)>,
    tau_inv: Vec<(usize, i64)>,
    /// Roots in a topological order of the Hom relation.
    topo: Vec<usize>,
    /// Coxeter convention that reproduced the translate, for the record.
    coxeter_convention: &'static str,
    witnesses: OnceCell<Vec<Representation>>,
}

impl fmt::Debug for HomTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "HomTable({} roots, {})",
            self.registry.len(),
            self.quiver.dynkin_type()
        )
    }
}

impl HomTable {
    /// Builds the full table from scratch. The seed drives the randomized
    /// indecomposable witnesses; all dimension data is seed-independent.
    pub fn build(quiver: Quiver, seed: u64) -> Result<Self, DercatError> {
        let registry = quiver.enumerate_positive_roots();
        let wits = build_witnesses(&quiver, &registry, seed)?;
        let n = registry.len();
        let mut hom = vec![vec![0u32; n]; n];
        let mut ext = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in 0..n {
                let h = replin::hom_dim(&quiver, &wits[i], &wits[j])?;
                let e = quiver.euler_form(registry.root(i), registry.root(j))?;
                let x = h as i64 - e;
                if x < 0 {
                    return Err(DercatError::Internal(format!(
                        "negative ext dimension for roots {i},{j}"
                    )));
                }
                hom[i][j] = h as u32;
                ext[i][j] = x as u32;
            }
        }
        let mut table = HomTable {
            hash: quiver.hash(),
            quiver,
            registry,
            seed,
            hom,
            ext,
            proj: Vec::new(),
            inj: Vec::new(),
            tau: Vec::new(),
            tau_inv: Vec::new(),
            topo: Vec::new(),
            coxeter_convention: "",
            witnesses: OnceCell::new(),
        };
        table.witnesses.set(wits).ok();
        table.finish()?;
        Ok(table)
    }

    /// Restores a table from its cache document, verifying the quiver hash.
    pub fn from_cache_json(quiver: Quiver, seed: u64, json: &str) -> Result<Self, DercatError> {
        let doc: CacheDoc =
            serde_json::from_str(json).map_err(|e| DercatError::Cache(e.to_string()))?;
        if doc.v != 1 {
            return Err(DercatError::Cache(format!("unknown cache version {}", doc.v)));
        }
        if doc.quiver_hash != quiver.hash() {
            return Err(DercatError::Cache("quiver hash mismatch".into()));
        }
        let registry = quiver.enumerate_positive_roots();
        let n = registry.len();
        if doc.hom.len() != n || doc.ext.len() != n || doc.tau.len() != n {
            return Err(DercatError::Cache("table size mismatch".into()));
        }
        let mut table = HomTable {
            hash: quiver.hash(),
            quiver,
            registry,
            seed,
            hom: doc.hom,
            ext: doc.ext,
            proj: doc.proj,
            inj: doc.inj,
            tau: doc.tau,
            tau_inv: Vec::new(),
            topo: Vec::new(),
            coxeter_convention: "cached",
            witnesses: OnceCell::new(),
        };
        table.tau_inv = invert_tau(&table.tau).ok_or_else(|| {
            DercatError::Cache("cached translate is not a bijection".into())
        })?;
        table.topo = topological_order(&table.hom)
            .ok_or_else(|| DercatError::Cache("cached Hom relation has a cycle".into()))?;
        Ok(table)
    }

    pub fn cache_json(&self) -> String {
        serde_json::to_string(&CacheDoc {
            v: 1,
            quiver_hash: self.hash.clone(),
            hom: self.hom.clone(),
            ext: self.ext.clone(),
            tau: self.tau.clone(),
            proj: self.proj.clone(),
            inj: self.inj.clone(),
        })
        .expect("cache serialization cannot fail")
    }

    fn finish(&mut self) -> Result<(), DercatError> {
        let n = self.registry.len();
        let rank = self.quiver.vertex_count();
        // projectives: Ext^1(P, -) vanishes identically; injectives dually
        self.proj = vec![None; n];
        self.inj = vec![None; n];
        for r in 0..n {
            if (0..n).all(|c| self.ext[r][c] == 0) {
                // its vertex: the unique simple with Hom(P_v, S_w) = δ
                let v = (0..rank)
                    .find(|&v| self.hom[r][self.registry.simple(v, rank)] == 1)
                    .ok_or_else(|| DercatError::Internal("projective without top".into()))?;
                self.proj[r] = Some(v);
            }
            if (0..n).all(|c| self.ext[c][r] == 0) {
                let v = (0..rank)
                    .find(|&v| self.hom[self.registry.simple(v, rank)][r] == 1)
                    .ok_or_else(|| DercatError::Internal("injective without socle".into()))?;
                self.inj[r] = Some(v);
            }
        }
        let proj_of_vertex: Vec<usize> = (0..rank)
            .map(|v| {
                self.proj
                    .iter()
                    .position(|&p| p == Some(v))
                    .expect("every vertex has a projective")
            })
            .collect();
        let inj_of_vertex: Vec<usize> = (0..rank)
            .map(|v| {
                self.inj
                    .iter()
                    .position(|&p| p == Some(v))
                    .expect("every vertex has an injective")
            })
            .collect();
        // AR translate. For non-projective M the AR formula gives
        // dim_v(tau M) = dim Ext^1(M, P_v); projectives go to the matching
        // injective one shift down.
        self.tau = (0..n)
            .map(|r| {
                if let Some(v) = self.proj[r] {
                    Ok((inj_of_vertex[v], -1))
                } else {
                    let dims: DimVec = (0..rank)
                        .map(|v| self.ext[r][proj_of_vertex[v]] as i64)
                        .collect();
                    let root = self.registry.index_of(&dims).ok_or_else(|| {
                        DercatError::Internal(format!(
                            "translate dimension vector {dims:?} is not a root"
                        ))
                    })?;
                    Ok((root, 0))
                }
            })
            .collect::<Result<Vec<_>, DercatError>>()?;
        self.tau_inv = invert_tau(&self.tau)
            .ok_or_else(|| DercatError::Internal("translate is not a bijection".into()))?;
        self.coxeter_convention = self.check_coxeter()?;
        self.topo = topological_order(&self.hom)
            .ok_or_else(|| DercatError::Internal("Hom relation has a cycle".into()))?;
        self.validate_serre_duality()?;
        Ok(())
    }

    /// The Coxeter transformation must reproduce the translate on
    /// non-projectives for exactly one of the two sign conventions; which one
    /// depends on the orientation convention, so both are tried.
    fn check_coxeter(&self) -> Result<&'static str, DercatError> {
        use crate::replin::matrix::{rat, RatMatrix};
        let rank = self.quiver.vertex_count();
        let mut e = RatMatrix::identity(rank);
        for &(i, j) in self.quiver.arrows() {
            e[(i, j)] = &e[(i, j)] - &rat(1);
        }
        let einv = e
            .inverse()
            .map_err(|err| DercatError::Internal(format!("Euler matrix: {err}")))?;
        let et = e.transpose();
        let cand = [
            ("-E^-1 E^T", einv.mul(&et).scale(&rat(-1))),
            ("-E^-T E", einv.transpose().mul(&e).scale(&rat(-1))),
        ];
        'cand: for (name, phi) in &cand {
            for r in 0..self.registry.len() {
                if self.proj[r].is_some() {
                    continue;
                }
                let d = self.registry.root(r);
                let col = RatMatrix::from_fn(rank, 1, |i, _| rat(d[i]));
                let image = phi.mul(&col);
                let dims: DimVec = (0..rank)
                    .map(|i| {
                        let v = &image[(i, 0)];
                        debug_assert!(v.is_integer());
                        v.to_integer().try_into().unwrap_or(i64::MAX)
                    })
                    .collect();
                if self.registry.index_of(&dims) != Some(self.tau[r].0) {
                    continue 'cand;
                }
            }
            return Ok(name);
        }
        Err(DercatError::Internal(
            "no Coxeter convention reproduces the AR translate".into(),
        ))
    }

    /// Serre duality must hold entrywise; a failure means the table is wrong.
    fn validate_serre_duality(&self) -> Result<(), DercatError> {
        let n = self.registry.len();
        for i in 0..n {
            for j in 0..n {
                for db in -2i64..=2 {
                    let x = DerIndec::new(i, 0);
                    let y = DerIndec::new(j, db);
                    if self.hom_dim_derived(x, y) != self.hom_dim_derived(y, self.serre(x)) {
                        return Err(DercatError::Internal(format!(
                            "Serre duality fails at roots {i},{j} shift {db}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn registry(&self) -> &RootRegistry {
        &self.registry
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn root_count(&self) -> usize {
        self.registry.len()
    }

    pub fn hom(&self, m: usize, n: usize) -> u32 {
        self.hom[m][n]
    }

    pub fn ext(&self, m: usize, n: usize) -> u32 {
        self.ext[m][n]
    }

    pub fn is_projective(&self, r: usize) -> bool {
        self.proj[r].is_some()
    }

    pub fn is_injective(&self, r: usize) -> bool {
        self.inj[r].is_some()
    }

    pub fn projective_root(&self, v: usize) -> usize {
        self.proj
            .iter()
            .position(|&p| p == Some(v))
            .expect("every vertex has a projective")
    }

    pub fn injective_root(&self, v: usize) -> usize {
        self.inj
            .iter()
            .position(|&p| p == Some(v))
            .expect("every vertex has an injective")
    }

    pub fn simple_root(&self, v: usize) -> usize {
        self.registry.simple(v, self.quiver.vertex_count())
    }

    pub fn coxeter_convention(&self) -> &'static str {
        self.coxeter_convention
    }

    /// Roots in a topological order of "Hom(X, Y) != 0, X != Y".
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Derived Hom rule: Hom at relative shift 0, Ext^1 at relative shift 1,
    /// zero elsewhere.
    pub fn hom_dim_derived(&self, x: DerIndec, y: DerIndec) -> u32 {
        match y.shift - x.shift {
            0 => self.hom[x.root][y.root],
            1 => self.ext[x.root][y.root],
            _ => 0,
        }
    }

    /// Hom dimension between finite sums (additivity in both arguments).
    pub fn hom_dim_objects(&self, x: &DerObject, y: &DerObject) -> u64 {
        let mut total = 0u64;
        for a in x.summands() {
            for b in y.summands() {
                total += u64::from(self.hom_dim_derived(*a, *b));
            }
        }
        total
    }

    /// AR translate; commutes with shift.
    pub fn tau(&self, x: DerIndec) -> DerIndec {
        let (r, ds) = self.tau[x.root];
        DerIndec::new(r, x.shift + ds)
    }

    pub fn tau_inverse(&self, x: DerIndec) -> DerIndec {
        let (r, ds) = self.tau_inv[x.root];
        DerIndec::new(r, x.shift + ds)
    }

    /// Serre functor `S = Σ ∘ τ`.
    pub fn serre(&self, x: DerIndec) -> DerIndec {
        self.tau(x).shifted(1)
    }

    pub fn serre_inverse(&self, x: DerIndec) -> DerIndec {
        self.tau_inverse(x.shifted(-1))
    }

    /// Explicit representation witnesses, one per root; built lazily when a
    /// table was restored from cache.
    pub fn witnesses(&self) -> &[Representation] {
        self.witnesses.get_or_init(|| {
            build_witnesses(&self.quiver, &self.registry, self.seed)
                .expect("witness construction cannot fail on a valid registry")
        })
    }

    pub fn witness(&self, root: usize) -> &Representation {
        &self.witnesses()[root]
    }

    /// Krull-Schmidt decomposition of an explicit representation into root
    /// multiplicities.
    pub fn decompose(&self, m: &Representation) -> Result<Vec<(usize, usize)>, DercatError> {
        Ok(replin::decompose(
            &self.quiver,
            m,
            &self.topo,
            self.witnesses(),
            &self.hom,
        )?)
    }
}

fn build_witnesses(
    quiver: &Quiver,
    registry: &RootRegistry,
    seed: u64,
) -> Result<Vec<Representation>, RepError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    registry
        .roots()
        .iter()
        .map(|d| replin::construct_indecomposable(quiver, d, &mut rng))
        .collect()
}

fn invert_tau(tau: &[(usize, i64)]) -> Option<Vec<(usize, i64)>> {
    let mut inv = vec![None; tau.len()];
    for (r, &(img, ds)) in tau.iter().enumerate() {
        if inv[img].is_some() {
            return None;
        }
        inv[img] = Some((r, -ds));
    }
    inv.into_iter().collect()
}

/// Linear extension of "Hom(X, Y) != 0, X != Y"; Dynkin module categories
/// are directed, so this always exists.
fn topological_order(hom: &[Vec<u32>]) -> Option<Vec<usize>> {
    let n = hom.len();
    let mut indeg = vec![0usize; n];
    for x in 0..n {
        for y in 0..n {
            if x != y && hom[x][y] > 0 {
                indeg[y] += 1;
            }
        }
    }
    let mut queue: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| indeg[v] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(x)) = queue.pop() {
        order.push(x);
        for y in 0..n {
            if y != x && hom[x][y] > 0 {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    queue.push(std::cmp::Reverse(y));
                }
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Serializable table summary for the CLI (`dercat table`).
#[derive(Serialize)]
pub struct TableReport {
    pub v: u32,
    pub quiver_hash: String,
    pub dynkin_type: String,
    pub roots: Vec<String>,
    pub hom: Vec<Vec<u32>>,
    pub ext: Vec<Vec<u32>>,
    pub projectives: Vec<Option<String>>,
    pub injectives: Vec<Option<String>>,
    pub tau: Vec<(String, i64)>,
    pub coxeter_convention: String,
}

impl TableReport {
    pub fn new(t: &HomTable) -> Self {
        let label = |r: usize| dimvec_to_string(t.registry.root(r));
        TableReport {
            v: 1,
            quiver_hash: t.hash.clone(),
            dynkin_type: t.quiver.dynkin_type().to_string(),
            roots: (0..t.root_count()).map(label).collect(),
            hom: t.hom.clone(),
            ext: t.ext.clone(),
            projectives: t
                .proj
                .iter()
                .map(|p| p.map(|v| t.quiver.labels()[v].clone()))
                .collect(),
            injectives: t
                .inj
                .iter()
                .map(|p| p.map(|v| t.quiver.labels()[v].clone()))
                .collect(),
            tau: t.tau.iter().map(|&(r, ds)| (label(r), ds)).collect(),
            coxeter_convention: t.coxeter_convention.to_string(),
        }
    }
}

/// Parses a DerObject from its JSON form: a list of `["dimvec", shift]`.
pub fn der_object_from_json(t: &HomTable, json: &serde_json::Value) -> Result<DerObject, DercatError> {
    let arr = json
        .as_array()
        .ok_or_else(|| DercatError::Cache("expected an array of [dimvec, shift]".into()))?;
    let mut summands = Vec::with_capacity(arr.len());
    for item in arr {
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| DercatError::Cache("expected [dimvec, shift] pairs".into()))?;
        let dv = dimvec_from_str(
            pair[0]
                .as_str()
                .ok_or_else(|| DercatError::Cache("dimvec must be a string".into()))?,
        )?;
        let root = t
            .registry()
            .index_of(&dv)
            .ok_or_else(|| DercatError::Cache(format!("{} is not a root", dimvec_to_string(&dv))))?;
        let shift = pair[1]
            .as_i64()
            .ok_or_else(|| DercatError::Cache("shift must be an integer".into()))?;
        summands.push(DerIndec::new(root, shift));
    }
    Ok(DerObject::from_summands(summands))
}

pub fn der_object_to_json(t: &HomTable, x: &DerObject) -> serde_json::Value {
    serde_json::Value::Array(
        x.summands()
            .iter()
            .map(|s| {
                serde_json::json!([dimvec_to_string(t.registry().root(s.root)), s.shift])
            })
            .collect(),
    )
}
