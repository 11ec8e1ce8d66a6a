//! Linear r-uniform hypergraphs: tagged vertices, edges as sorted id lists,
//! a pair index enforcing linearity at insertion time, audit-grade re-checks,
//! the pair-count bound, and a deterministic JSON serialization.

use crate::ff::{Field, FieldElement};
use crate::geom::{line_through, AffinePoint, Line};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperError {
    #[error("edge {edge:?} is not a set of {r} distinct vertices")]
    NotUniform { edge: Vec<u32>, r: usize },
    #[error("vertex id {0} out of range (n = {1})")]
    VertexOutOfRange(u32, u32),
    #[error("pair ({u}, {v}) already covered by edge {existing_edge}")]
    LinearityViolation { u: u32, v: u32, existing_edge: u32 },
    #[error("edge count {edges} exceeds the pair-count bound {bound_num}/{bound_den}")]
    BoundViolated {
        edges: u64,
        bound_num: u128,
        bound_den: u64,
    },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid hypergraph document: {0}")]
    Semantic(String),
    #[error(transparent)]
    Field(#[from] crate::ff::FfError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
}

/// Which construction a hypergraph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Horizontal nonsquare layers plus one conic vertex per edge.
    Hrq,
    /// r parallel layer lines, one edge per line crossing them all.
    Parallel,
    /// The partite line model over a prime field.
    Fr,
    /// Hand-built; no geometric payload guarantees.
    Adhoc,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Hrq => "hrq",
            Model::Parallel => "parallel",
            Model::Fr => "fr",
            Model::Adhoc => "adhoc",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        match s {
            "hrq" => Some(Model::Hrq),
            "parallel" => Some(Model::Parallel),
            "fr" => Some(Model::Fr),
            "adhoc" => Some(Model::Adhoc),
            _ => None,
        }
    }
}

/// Which of the two parabola intersection points an edge keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    MinX,
    MaxX,
}

impl TieRule {
    pub fn as_str(self) -> &'static str {
        match self {
            TieRule::MinX => "min-x",
            TieRule::MaxX => "max-x",
        }
    }

    pub fn parse(s: &str) -> Option<TieRule> {
        match s {
            "min-x" => Some(TieRule::MinX),
            "max-x" => Some(TieRule::MaxX),
            _ => None,
        }
    }
}

/// Orientation of the layer lines in the parallel model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LayerDirection {
    /// Layers are y = c_i; edges are the non-horizontal lines.
    #[default]
    Horizontal,
    /// Layers are x = c_i; edges are the non-vertical lines.
    Vertical,
}

impl LayerDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerDirection::Horizontal => "horizontal",
            LayerDirection::Vertical => "vertical",
        }
    }

    pub fn parse(s: &str) -> Option<LayerDirection> {
        match s {
            "horizontal" => Some(LayerDirection::Horizontal),
            "vertical" => Some(LayerDirection::Vertical),
            _ => None,
        }
    }
}

/// Model-specific construction parameters, recorded in the artifact.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Hrq {
        alphas: Vec<FieldElement>,
        tie_rule: TieRule,
    },
    Parallel {
        layer_values: Vec<FieldElement>,
        direction: LayerDirection,
    },
    Fr,
    Adhoc,
}

/// Role of a vertex in its construction, with the geometric payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexTag {
    /// Point on the t-th layer line (1-based layer index).
    ALayer { layer: usize, point: AffinePoint },
    /// Point on the conic y = x^2.
    BConic { point: AffinePoint },
    /// Partite-model vertex (1-based fiber index, field value).
    Fiber { fiber: usize, value: FieldElement },
    /// No geometric payload (hand-built hypergraphs).
    Plain,
}

impl VertexTag {
    /// The plane point carried by this vertex, if any.
    pub fn affine_point(&self) -> Option<AffinePoint> {
        match *self {
            VertexTag::ALayer { point, .. } | VertexTag::BConic { point } => Some(point),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vertex {
    pub id: u32,
    pub tag: VertexTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub model: Model,
    pub r: usize,
    pub field: Field,
    pub params: ModelParams,
}

/// Unordered vertex pair -> covering edge index. Dense table for small
/// vertex sets, hash map beyond that.
#[derive(Debug, Clone)]
enum PairIndex {
    Dense { n: usize, slots: Vec<u32> },
    Sparse(HashMap<u64, u32>),
}

const DENSE_PAIR_LIMIT: usize = 2048;
const EMPTY: u32 = u32::MAX;

impl PairIndex {
    fn new(n: usize) -> PairIndex {
        if n <= DENSE_PAIR_LIMIT {
            PairIndex::Dense {
                n,
                slots: vec![EMPTY; n * n],
            }
        } else {
            PairIndex::Sparse(HashMap::new())
        }
    }

    fn key(u: u32, v: u32) -> u64 {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        ((lo as u64) << 32) | hi as u64
    }

    fn get(&self, u: u32, v: u32) -> Option<u32> {
        match self {
            PairIndex::Dense { n, slots } => {
                let e = slots[u as usize * n + v as usize];
                (e != EMPTY).then_some(e)
            }
            PairIndex::Sparse(map) => map.get(&Self::key(u, v)).copied(),
        }
    }

    fn insert(&mut self, u: u32, v: u32, e: u32) {
        match self {
            PairIndex::Dense { n, slots } => {
                slots[u as usize * *n + v as usize] = e;
                slots[v as usize * *n + u as usize] = e;
            }
            PairIndex::Sparse(map) => {
                map.insert(Self::key(u, v), e);
            }
        }
    }
}

/// Outcome of the audit-time linearity re-check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearityOutcome {
    Pass,
    Violation { u: u32, v: u32, e1: u32, e2: u32 },
}

/// Edge count against the pair-count bound n(n-1) / (r(r-1)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub edges: u64,
    pub bound_num: u128,
    pub bound_den: u64,
}

/// A linear r-uniform hypergraph. Every edge is a sorted list of r distinct
/// vertex ids, and no two edges share more than one vertex — enforced at
/// insertion through the pair index.
#[derive(Debug, Clone)]
pub struct LinearHypergraph {
    meta: Meta,
    vertices: Vec<Vertex>,
    edges: Vec<Vec<u32>>,
    /// Supporting line per edge, for geometric models.
    edge_lines: Vec<Option<Line>>,
    pair_index: PairIndex,
    /// Reverse lookup from plane point to vertex id, for geometric models.
    point_to_vertex: HashMap<AffinePoint, u32>,
}

impl PartialEq for LinearHypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.edge_lines == other.edge_lines
    }
}

impl LinearHypergraph {
    /// Create an edgeless hypergraph over the given vertex list. Vertex ids
    /// must be exactly 0..n in order.
    pub fn new(meta: Meta, vertices: Vec<Vertex>) -> LinearHypergraph {
        for (i, v) in vertices.iter().enumerate() {
            assert_eq!(v.id as usize, i, "vertex ids must be dense and ordered");
        }
        let n = vertices.len();
        let mut point_to_vertex = HashMap::new();
        for v in &vertices {
            if let Some(p) = v.tag.affine_point() {
                point_to_vertex.insert(p, v.id);
            }
        }
        LinearHypergraph {
            meta,
            vertices,
            edges: Vec::new(),
            edge_lines: Vec::new(),
            pair_index: PairIndex::new(n),
            point_to_vertex,
        }
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn field(&self) -> &Field {
        &self.meta.field
    }

    pub fn r(&self) -> usize {
        self.meta.r
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn edge(&self, e: u32) -> &[u32] {
        &self.edges[e as usize]
    }

    pub fn edge_line(&self, e: u32) -> Option<Line> {
        self.edge_lines[e as usize]
    }

    /// True when every edge carries a supporting line.
    pub fn has_geometry(&self) -> bool {
        !self.edges.is_empty() && self.edge_lines.iter().all(|l| l.is_some())
    }

    pub fn vertex_point(&self, id: u32) -> Option<AffinePoint> {
        self.vertices[id as usize].tag.affine_point()
    }

    pub fn vertex_at_point(&self, p: AffinePoint) -> Option<u32> {
        self.point_to_vertex.get(&p).copied()
    }

    /// The edge covering the pair {u, v}, if any.
    pub fn edge_through(&self, u: u32, v: u32) -> Option<u32> {
        self.pair_index.get(u, v)
    }

    /// Insert an edge: r distinct in-range vertices, no pair already covered.
    /// The ids are sorted; `line` records the supporting line if there is one.
    pub fn add_edge(&mut self, mut ids: Vec<u32>, line: Option<Line>) -> Result<u32, HyperError> {
        ids.sort_unstable();
        if ids.len() != self.meta.r || ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(HyperError::NotUniform {
                edge: ids,
                r: self.meta.r,
            });
        }
        if let Some(&max) = ids.last() {
            if max as usize >= self.n() {
                return Err(HyperError::VertexOutOfRange(max, self.n() as u32));
            }
        }
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                if let Some(e) = self.pair_index.get(ids[i], ids[j]) {
                    return Err(HyperError::LinearityViolation {
                        u: ids[i],
                        v: ids[j],
                        existing_edge: e,
                    });
                }
            }
        }
        let e = self.edges.len() as u32;
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                self.pair_index.insert(ids[i], ids[j], e);
            }
        }
        self.edges.push(ids);
        self.edge_lines.push(line);
        Ok(e)
    }

    /// Re-check uniformity from the stored edges.
    pub fn check_uniform(&self) -> Result<(), HyperError> {
        for edge in &self.edges {
            if edge.len() != self.meta.r
                || edge.windows(2).any(|w| w[0] >= w[1])
                || edge.iter().any(|&v| v as usize >= self.n())
            {
                return Err(HyperError::NotUniform {
                    edge: edge.clone(),
                    r: self.meta.r,
                });
            }
        }
        Ok(())
    }

    /// Audit-time linearity re-check: rescans all edges with a fresh pair
    /// set, independent of the construction-time index. A violation is a
    /// return value, not an error.
    pub fn check_linear(&self) -> LinearityOutcome {
        let mut seen: HashMap<u64, u32> = HashMap::new();
        for (e, edge) in self.edges.iter().enumerate() {
            for i in 0..edge.len() {
                for j in i + 1..edge.len() {
                    let key = PairIndex::key(edge[i], edge[j]);
                    if let Some(&prev) = seen.get(&key) {
                        return LinearityOutcome::Violation {
                            u: edge[i].min(edge[j]),
                            v: edge[i].max(edge[j]),
                            e1: prev,
                            e2: e as u32,
                        };
                    }
                    seen.insert(key, e as u32);
                }
            }
        }
        LinearityOutcome::Pass
    }

    /// Check |E| <= n(n-1) / (r(r-1)), exactly, by cross-multiplication.
    pub fn bound_check(&self) -> Result<BoundReport, HyperError> {
        let n = self.n() as u128;
        let r = self.meta.r as u64;
        let edges = self.edges.len() as u64;
        let bound_num = n * (n - 1);
        let bound_den = r * (r - 1);
        if (edges as u128) * (bound_den as u128) <= bound_num {
            Ok(BoundReport {
                edges,
                bound_num,
                bound_den,
            })
        } else {
            Err(HyperError::BoundViolated {
                edges,
                bound_num,
                bound_den,
            })
        }
    }

    /// Vertex degrees indexed by id.
    pub fn degree_profile(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n()];
        for edge in &self.edges {
            for &v in edge {
                deg[v as usize] += 1;
            }
        }
        deg
    }

    /// Rebuild without the given edge (indices above it shift down by one).
    pub fn without_edge(&self, e: u32) -> LinearHypergraph {
        let mut h = LinearHypergraph::new(self.meta.clone(), self.vertices.clone());
        for (i, edge) in self.edges.iter().enumerate() {
            if i as u32 == e {
                continue;
            }
            h.add_edge(edge.clone(), self.edge_lines[i])
                .expect("subset of a linear hypergraph stays linear");
        }
        h
    }

    pub fn to_json_string(&self) -> String {
        let doc = self.to_doc();
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable document");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<LinearHypergraph, IoError> {
        let doc: HgDoc = serde_json::from_str(s)?;
        LinearHypergraph::from_doc(doc)
    }

    fn to_doc(&self) -> HgDoc {
        let f = self.field();
        let coeffs = |a: FieldElement| f.coeffs(a);
        let params = match &self.meta.params {
            ModelParams::Hrq { alphas, tie_rule } => ParamsDoc {
                alphas: Some(alphas.iter().map(|&a| coeffs(a)).collect()),
                tie_rule: Some(tie_rule.as_str().to_string()),
                layer_values: None,
                direction: None,
            },
            ModelParams::Parallel {
                layer_values,
                direction,
            } => ParamsDoc {
                alphas: None,
                tie_rule: None,
                layer_values: Some(layer_values.iter().map(|&a| coeffs(a)).collect()),
                direction: Some(direction.as_str().to_string()),
            },
            ModelParams::Fr | ModelParams::Adhoc => ParamsDoc::default(),
        };
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let (tag, payload) = match v.tag {
                    VertexTag::ALayer { layer, point } => (
                        "a-layer",
                        PayloadDoc {
                            layer: Some(layer),
                            point: Some(vec![coeffs(point.x), coeffs(point.y)]),
                            ..PayloadDoc::default()
                        },
                    ),
                    VertexTag::BConic { point } => (
                        "b-conic",
                        PayloadDoc {
                            point: Some(vec![coeffs(point.x), coeffs(point.y)]),
                            ..PayloadDoc::default()
                        },
                    ),
                    VertexTag::Fiber { fiber, value } => (
                        "fiber",
                        PayloadDoc {
                            fiber: Some(fiber),
                            value: Some(coeffs(value)),
                            ..PayloadDoc::default()
                        },
                    ),
                    VertexTag::Plain => ("plain", PayloadDoc::default()),
                };
                VertexDoc {
                    id: v.id,
                    tag: tag.to_string(),
                    payload,
                }
            })
            .collect();
        HgDoc {
            meta: MetaDoc {
                model: self.meta.model.as_str().to_string(),
                r: self.meta.r,
                p: f.p(),
                k: f.k(),
                modulus: f.modulus().to_vec(),
                params,
            },
            vertices,
            edges: self.edges.clone(),
        }
    }

    fn from_doc(doc: HgDoc) -> Result<LinearHypergraph, IoError> {
        let model = Model::parse(&doc.meta.model)
            .ok_or_else(|| IoError::Semantic(format!("unknown model {:?}", doc.meta.model)))?;
        let field = Field::with_modulus(doc.meta.p, doc.meta.k, doc.meta.modulus.clone())?;
        let parse_el = |cs: &[u64]| field.from_coeffs(cs);
        let params = match model {
            Model::Hrq => {
                let alphas = doc
                    .meta
                    .params
                    .alphas
                    .as_ref()
                    .ok_or_else(|| IoError::Semantic("hrq params need alphas".into()))?
                    .iter()
                    .map(|cs| parse_el(cs))
                    .collect::<Result<Vec<_>, _>>()?;
                let tie_rule = doc
                    .meta
                    .params
                    .tie_rule
                    .as_deref()
                    .and_then(TieRule::parse)
                    .ok_or_else(|| IoError::Semantic("hrq params need tie_rule".into()))?;
                ModelParams::Hrq { alphas, tie_rule }
            }
            Model::Parallel => {
                let layer_values = doc
                    .meta
                    .params
                    .layer_values
                    .as_ref()
                    .ok_or_else(|| IoError::Semantic("parallel params need layer_values".into()))?
                    .iter()
                    .map(|cs| parse_el(cs))
                    .collect::<Result<Vec<_>, _>>()?;
                let direction = doc
                    .meta
                    .params
                    .direction
                    .as_deref()
                    .and_then(LayerDirection::parse)
                    .ok_or_else(|| IoError::Semantic("parallel params need direction".into()))?;
                ModelParams::Parallel {
                    layer_values,
                    direction,
                }
            }
            Model::Fr => ModelParams::Fr,
            Model::Adhoc => ModelParams::Adhoc,
        };
        let mut vertices = Vec::with_capacity(doc.vertices.len());
        for (i, v) in doc.vertices.iter().enumerate() {
            if v.id as usize != i {
                return Err(IoError::Semantic(format!(
                    "vertex ids must be dense and ordered, found {} at position {}",
                    v.id, i
                )));
            }
            let point = |cs: &Option<Vec<Vec<u64>>>| -> Result<AffinePoint, IoError> {
                let cs = cs
                    .as_ref()
                    .filter(|cs| cs.len() == 2)
                    .ok_or_else(|| IoError::Semantic(format!("vertex {} needs a point", i)))?;
                Ok(AffinePoint::new(parse_el(&cs[0])?, parse_el(&cs[1])?))
            };
            let tag = match v.tag.as_str() {
                "a-layer" => VertexTag::ALayer {
                    layer: v.payload.layer.ok_or_else(|| {
                        IoError::Semantic(format!("vertex {} needs a layer index", i))
                    })?,
                    point: point(&v.payload.point)?,
                },
                "b-conic" => VertexTag::BConic {
                    point: point(&v.payload.point)?,
                },
                "fiber" => VertexTag::Fiber {
                    fiber: v.payload.fiber.ok_or_else(|| {
                        IoError::Semantic(format!("vertex {} needs a fiber index", i))
                    })?,
                    value: parse_el(v.payload.value.as_deref().ok_or_else(|| {
                        IoError::Semantic(format!("vertex {} needs a value", i))
                    })?)?,
                },
                "plain" => VertexTag::Plain,
                other => return Err(IoError::Semantic(format!("unknown vertex tag {:?}", other))),
            };
            vertices.push(Vertex { id: v.id, tag });
        }
        let meta = Meta {
            model,
            r: doc.meta.r,
            field,
            params,
        };
        let mut h = LinearHypergraph::new(meta, vertices);
        for edge in doc.edges {
            let line = h.reconstruct_line(&edge)?;
            h.add_edge(edge, line)?;
        }
        Ok(h)
    }

    /// Supporting line of an edge, recomputed from the first two vertex
    /// payload points; all edge vertices must lie on it.
    fn reconstruct_line(&self, edge: &[u32]) -> Result<Option<Line>, IoError> {
        let field = self.field().clone();
        let pts: Option<Vec<AffinePoint>> = edge
            .iter()
            .map(|&v| {
                self.vertices
                    .get(v as usize)
                    .and_then(|v| v.tag.affine_point())
            })
            .collect();
        let Some(pts) = pts else { return Ok(None) };
        if pts.len() < 2 {
            return Ok(None);
        }
        let line = line_through(&field, pts[0], pts[1])
            .map_err(|e| IoError::Semantic(format!("degenerate edge geometry: {}", e)))?;
        for &p in &pts {
            if !line.contains_affine(&field, p) {
                return Err(IoError::Semantic(format!(
                    "edge {:?} vertices are not collinear",
                    edge
                )));
            }
        }
        Ok(Some(line))
    }
}

// ---- JSON document shapes ----

#[derive(Debug, Serialize, Deserialize)]
struct HgDoc {
    meta: MetaDoc,
    vertices: Vec<VertexDoc>,
    edges: Vec<Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaDoc {
    model: String,
    r: usize,
    p: u64,
    k: usize,
    modulus: Vec<u64>,
    params: ParamsDoc,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ParamsDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tie_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layer_values: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexDoc {
    id: u32,
    tag: String,
    payload: PayloadDoc,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct PayloadDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    layer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fiber: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Vec<u64>>,
}

/// An edgeless hand-built hypergraph with n plain vertices, for tests and
/// ad-hoc experiments.
pub fn adhoc(field: Field, r: usize, n: usize) -> LinearHypergraph {
    let vertices = (0..n as u32)
        .map(|id| Vertex {
            id,
            tag: VertexTag::Plain,
        })
        .collect();
    LinearHypergraph::new(
        Meta {
            model: Model::Adhoc,
            r,
            field,
            params: ModelParams::Adhoc,
        },
        vertices,
    )
}
