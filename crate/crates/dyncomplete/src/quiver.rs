//! Dynkin quivers, the Euler form and positive-root enumeration.
//!
//! Everything downstream indexes indecomposables by positive roots of the
//! underlying diagram, so this module fixes the vertex order (document order)
//! and the root order (lexicographic) once and for all.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

/// Dimension vector over the vertices of a quiver, in vertex order.
pub type DimVec = Vec<i64>;

/// Renders a dimension vector as comma-joined integers, e.g. `"1,0"`.
pub fn dimvec_to_string(d: &[i64]) -> String {
    d.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses the comma-joined form produced by [`dimvec_to_string`].
pub fn dimvec_from_str(s: &str) -> Result<DimVec, QuiverError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| QuiverError::BadDimVector(s.to_string()))
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum QuiverError {
    #[error("malformed quiver document: {0}")]
    Parse(String),
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("arrow references unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("loop at vertex {0:?}: not a simple graph")]
    Loop(String),
    #[error("multiple edges between {0:?} and {1:?}: not a simple graph")]
    MultiEdge(String, String),
    #[error("underlying graph is not connected")]
    Disconnected,
    #[error("underlying graph contains a cycle")]
    Cycle,
    #[error("degree pattern is not of type A, D or E: {0}")]
    NotDynkin(String),
    #[error("dimension vector length {got} does not match vertex count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("cannot parse dimension vector {0:?}")]
    BadDimVector(String),
    #[error("{0:?} is not a positive root")]
    NotARoot(String),
}

/// Simply laced Dynkin type of the underlying graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DynkinType {
    A(usize),
    D(usize),
    E(usize),
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynkinType::A(n) => write!(f, "A{n}"),
            DynkinType::D(n) => write!(f, "D{n}"),
            DynkinType::E(n) => write!(f, "E{n}"),
        }
    }
}

impl DynkinType {
    pub fn rank(&self) -> usize {
        match *self {
            DynkinType::A(n) | DynkinType::D(n) | DynkinType::E(n) => n,
        }
    }

    /// Number of positive roots of the root system.
    pub fn root_count(&self) -> usize {
        match *self {
            DynkinType::A(n) => n * (n + 1) / 2,
            DynkinType::D(n) => n * (n - 1),
            DynkinType::E(6) => 36,
            DynkinType::E(7) => 63,
            DynkinType::E(8) => 120,
            DynkinType::E(_) => unreachable!("classification only emits E6, E7, E8"),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct QuiverDoc {
    vertices: Vec<String>,
    arrows: Vec<(String, String)>,
}

/// An oriented simply laced Dynkin diagram.
///
/// Vertices keep their document order; arrows are stored as index pairs
/// `(source, target)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    labels: Vec<String>,
    arrows: Vec<(usize, usize)>,
    dynkin: DynkinType,
}

impl Quiver {
    pub fn new(labels: Vec<String>, arrow_labels: &[(String, String)]) -> Result<Self, QuiverError> {
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(QuiverError::DuplicateLabel(l.clone()));
            }
        }
        let mut arrows = Vec::with_capacity(arrow_labels.len());
        for (s, t) in arrow_labels {
            let si = *index
                .get(s)
                .ok_or_else(|| QuiverError::UnknownVertex(s.clone()))?;
            let ti = *index
                .get(t)
                .ok_or_else(|| QuiverError::UnknownVertex(t.clone()))?;
            arrows.push((si, ti));
        }
        let dynkin = classify(&labels, &arrows)?;
        Ok(Quiver {
            labels,
            arrows,
            dynkin,
        })
    }

    pub fn parse(text: &str) -> Result<Self, QuiverError> {
        let doc: QuiverDoc =
            serde_json::from_str(text).map_err(|e| QuiverError::Parse(e.to_string()))?;
        Quiver::new(doc.vertices, &doc.arrows)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    pub fn dynkin_type(&self) -> DynkinType {
        self.dynkin
    }

    /// Canonical JSON form (sorted keys, no whitespace); input for hashing.
    pub fn canonical_json(&self) -> String {
        let arrows: Vec<(String, String)> = self
            .arrows
            .iter()
            .map(|&(s, t)| (self.labels[s].clone(), self.labels[t].clone()))
            .collect();
        // Field order fixed by hand so the hash is stable.
        let mut out = String::from("{\"arrows\":[");
        for (i, (s, t)) in arrows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "[{},{}]",
                serde_json::to_string(s).unwrap(),
                serde_json::to_string(t).unwrap()
            ));
        }
        out.push_str("],\"vertices\":[");
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&serde_json::to_string(l).unwrap());
        }
        out.push_str("]}");
        out
    }

    /// Hex SHA-256 of the canonical JSON; used as cache key and table id.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.canonical_json().as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Euler form `<d,e> = sum_i d_i e_i - sum_{a:i->j} d_i e_j`.
    pub fn euler_form(&self, d: &[i64], e: &[i64]) -> Result<i64, QuiverError> {
        let n = self.vertex_count();
        if d.len() != n {
            return Err(QuiverError::LengthMismatch { got: d.len(), want: n });
        }
        if e.len() != n {
            return Err(QuiverError::LengthMismatch { got: e.len(), want: n });
        }
        let mut v: i64 = d.iter().zip(e).map(|(a, b)| a * b).sum();
        for &(i, j) in &self.arrows {
            v -= d[i] * e[j];
        }
        Ok(v)
    }

    /// Tits form `q(d) = <d,d>`.
    pub fn tits_form(&self, d: &[i64]) -> Result<i64, QuiverError> {
        self.euler_form(d, d)
    }

    /// All positive roots (`d >= 0`, `d != 0`, `q(d) = 1`) in lexicographic
    /// order. Bounded brute force; root entries of ADE diagrams never
    /// exceed 6.
    pub fn enumerate_positive_roots(&self) -> RootRegistry {
        let n = self.vertex_count();
        let mut roots: Vec<DimVec> = Vec::new();
        let mut d = vec![0i64; n];
        loop {
            // advance odometer
            let mut k = n;
            loop {
                if k == 0 {
                    let mut index = BTreeMap::new();
                    for (i, r) in roots.iter().enumerate() {
                        index.insert(r.clone(), i);
                    }
                    debug_assert_eq!(roots.len(), self.dynkin.root_count());
                    return RootRegistry { roots, index };
                }
                k -= 1;
                if d[k] < 6 {
                    d[k] += 1;
                    break;
                }
                d[k] = 0;
            }
            if self.tits_form(&d).unwrap() == 1 {
                roots.push(d.clone());
            }
        }
    }
}

/// All positive roots of a quiver, with index lookup. The index of a root is
/// the canonical module index used everywhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootRegistry {
    roots: Vec<DimVec>,
    index: BTreeMap<DimVec, usize>,
}

impl RootRegistry {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn root(&self, i: usize) -> &DimVec {
        &self.roots[i]
    }

    pub fn roots(&self) -> &[DimVec] {
        &self.roots
    }

    pub fn index_of(&self, d: &[i64]) -> Option<usize> {
        self.index.get(d).copied()
    }

    /// Index of the simple root at a vertex.
    pub fn simple(&self, vertex: usize, rank: usize) -> usize {
        let mut d = vec![0i64; rank];
        d[vertex] = 1;
        self.index_of(&d).expect("simple roots are always roots")
    }
}

fn classify(labels: &[String], arrows: &[(usize, usize)]) -> Result<DynkinType, QuiverError> {
    let n = labels.len();
    if n == 0 {
        return Err(QuiverError::NotDynkin("empty vertex set".into()));
    }
    let mut seen_edges = BTreeMap::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(s, t) in arrows {
        if s == t {
            return Err(QuiverError::Loop(labels[s].clone()));
        }
        let key = (s.min(t), s.max(t));
        if seen_edges.insert(key, ()).is_some() {
            return Err(QuiverError::MultiEdge(
                labels[key.0].clone(),
                labels[key.1].clone(),
            ));
        }
        adj[s].push(t);
        adj[t].push(s);
    }
    // connectivity
    let mut visited = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    visited[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    if count < n {
        return Err(QuiverError::Disconnected);
    }
    // connected with n-1 edges <=> tree
    if arrows.len() != n - 1 {
        return Err(QuiverError::Cycle);
    }
    let degrees: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    if degrees.iter().any(|&d| d >= 4) {
        return Err(QuiverError::NotDynkin("vertex of degree >= 4".into()));
    }
    let branch: Vec<usize> = (0..n).filter(|&v| degrees[v] == 3).collect();
    match branch.len() {
        0 => Ok(DynkinType::A(n)),
        1 => {
            let c = branch[0];
            let mut arms: Vec<usize> = adj[c]
                .iter()
                .map(|&start| {
                    // walk away from the branch vertex to the leaf
                    let mut prev = c;
                    let mut cur = start;
                    let mut len = 1;
                    loop {
                        let next: Vec<usize> =
                            adj[cur].iter().copied().filter(|&w| w != prev).collect();
                        match next.as_slice() {
                            [] => break,
                            [w] => {
                                prev = cur;
                                cur = *w;
                                len += 1;
                            }
                            _ => unreachable!("degree checked above"),
                        }
                    }
                    len
                })
                .collect();
            arms.sort_unstable();
            match (arms[0], arms[1], arms[2]) {
                (1, 1, k) => Ok(DynkinType::D(k + 3)),
                (1, 2, 2) => Ok(DynkinType::E(6)),
                (1, 2, 3) => Ok(DynkinType::E(7)),
                (1, 2, 4) => Ok(DynkinType::E(8)),
                (a, b, c) => Err(QuiverError::NotDynkin(format!(
                    "branch arms of lengths {a},{b},{c}"
                ))),
            }
        }
        _ => Err(QuiverError::NotDynkin(
            "more than one branch vertex".into(),
        )),
    }
}

/// Convenience constructors for the standard test quivers.
pub mod standard {
    use super::Quiver;

    /// Linear A_n quiver with arrows `i+1 -> i`, vertices labeled "1".."n".
    pub fn a_n(n: usize) -> Quiver {
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let arrows: Vec<(String, String)> = (1..n)
            .map(|i| ((i + 1).to_string(), i.to_string()))
            .collect();
        Quiver::new(labels, &arrows).unwrap()
    }

    /// D_n with a branch vertex "2" carrying two leaves and a tail.
    pub fn d_n(n: usize) -> Quiver {
        assert!(n >= 4);
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let mut arrows: Vec<(String, String)> = vec![
            ("1".into(), "3".into()),
            ("2".into(), "3".into()),
        ];
        for i in 3..n {
            arrows.push((i.to_string(), (i + 1).to_string()));
        }
        Quiver::new(labels, &arrows).unwrap()
    }

    /// E_n (n = 6, 7, 8): a path 1-2-...-(n-1) with vertex "n" attached to "3".
    pub fn e_n(n: usize) -> Quiver {
        assert!((6..=8).contains(&n));
        let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let mut arrows: Vec<(String, String)> = (1..n - 1)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        arrows.push((n.to_string(), "3".into()));
        Quiver::new(labels, &arrows).unwrap()
    }
}
