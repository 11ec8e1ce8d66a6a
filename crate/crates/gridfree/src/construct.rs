//! Builders for the three hypergraph models: the nonsquare-layer/conic
//! construction, the parallel-layer model, and the partite line model.
//!
//! All three iterate field elements and lines in canonical order, so a given
//! parameter set always produces the identical hypergraph.

use crate::ff::{Field, FieldElement};
use crate::geom::{
    enumerate_lines, horizontal_direction, parabola_meet, vertical_direction, AffinePoint,
    LineFilter,
};
use crate::hyper::{
    HyperError, LayerDirection, LinearHypergraph, Meta, Model, ModelParams, TieRule, Vertex,
    VertexTag,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("uniformity must be at least 3, got {0}")]
    RTooSmall(usize),
    #[error("need {needed} distinct nonsquares but GF({q}) has only {available}")]
    NotEnoughNonsquares {
        needed: usize,
        available: usize,
        q: u64,
    },
    #[error("cannot place {r} parallel layers in GF({q})")]
    TooManyLayers { r: usize, q: u64 },
    #[error("the partite model needs a prime field, got GF({p}^{k})")]
    NonPrimeForFr { p: u64, k: usize },
    #[error("expected {expected} layer values, got {got}")]
    WrongAlphaCount { expected: usize, got: usize },
    #[error("layer value at index {0} is a square, all layers must avoid the conic")]
    AlphaIsSquare(u64),
    #[error("layer values must be distinct")]
    DuplicateAlpha,
    #[error(transparent)]
    Hyper(#[from] HyperError),
}

/// Parameters for [`build`]. `alphas`/`tie_rule` apply to the layer/conic
/// model only, `layer_direction` to the parallel model only.
#[derive(Debug, Clone)]
pub struct ConstructionParams {
    pub model: Model,
    pub r: usize,
    /// Layer heights for the conic model; `None` picks the canonically
    /// least r-1 nonsquares.
    pub alphas: Option<Vec<FieldElement>>,
    /// Which conic point an edge keeps when its line is a secant.
    pub tie_rule: TieRule,
    pub layer_direction: LayerDirection,
}

impl ConstructionParams {
    pub fn new(model: Model, r: usize) -> ConstructionParams {
        ConstructionParams {
            model,
            r,
            alphas: None,
            tie_rule: TieRule::default(),
            layer_direction: LayerDirection::default(),
        }
    }
}

pub fn build(
    field: &Field,
    params: &ConstructionParams,
) -> Result<LinearHypergraph, ConstructError> {
    if params.r < 3 {
        return Err(ConstructError::RTooSmall(params.r));
    }
    match params.model {
        Model::Hrq => build_hrq(field, params),
        Model::Parallel => build_parallel(field, params),
        Model::Fr => build_fr(field, params),
        Model::Adhoc => Ok(crate::hyper::adhoc(field.clone(), params.r, 0)),
    }
}

/// Layer/conic model: r-1 horizontal lines at nonsquare heights plus the
/// conic y = x^2 (disjoint from the layers because every conic point has a
/// square y). Every non-horizontal line meets each layer once; when it also
/// meets the conic, it contributes the edge of its r-1 layer hits plus one
/// conic hit (secants keep the tie-rule point). Edge count: the q verticals
/// always meet the conic, and of the q lines with a fixed nonzero slope
/// exactly (q+1)/2 do, so |E| = q + (q-1)(q+1)/2 = (q^2 + 2q - 1)/2.
fn build_hrq(
    field: &Field,
    params: &ConstructionParams,
) -> Result<LinearHypergraph, ConstructError> {
    let q = field.q();
    let r = params.r;
    let alphas = match &params.alphas {
        Some(alphas) => {
            if alphas.len() != r - 1 {
                return Err(ConstructError::WrongAlphaCount {
                    expected: r - 1,
                    got: alphas.len(),
                });
            }
            for &a in alphas {
                if field.is_square(a) {
                    return Err(ConstructError::AlphaIsSquare(a.index() as u64));
                }
            }
            let mut sorted = alphas.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(ConstructError::DuplicateAlpha);
            }
            alphas.clone()
        }
        None => field
            .nonsquares(r - 1)
            .map_err(|_| ConstructError::NotEnoughNonsquares {
                needed: r - 1,
                available: (q as usize - 1) / 2,
                q,
            })?,
    };

    // Vertices: layer t (1-based) holds (x, alpha_t) at id (t-1)q + idx(x);
    // the conic block holds (x, x^2) at id (r-1)q + idx(x).
    let mut vertices = Vec::with_capacity(r * q as usize);
    for (t, &alpha) in alphas.iter().enumerate() {
        for x in field.elements() {
            vertices.push(Vertex {
                id: (t as u64 * q + x.index() as u64) as u32,
                tag: VertexTag::ALayer {
                    layer: t + 1,
                    point: AffinePoint::new(x, alpha),
                },
            });
        }
    }
    for x in field.elements() {
        vertices.push(Vertex {
            id: ((r as u64 - 1) * q + x.index() as u64) as u32,
            tag: VertexTag::BConic {
                point: AffinePoint::new(x, field.mul(x, x)),
            },
        });
    }

    let meta = Meta {
        model: Model::Hrq,
        r,
        field: field.clone(),
        params: ModelParams::Hrq {
            alphas: alphas.clone(),
            tie_rule: params.tie_rule,
        },
    };
    let mut h = LinearHypergraph::new(meta, vertices);

    for line in enumerate_lines(field, LineFilter::NonHorizontal) {
        let conic_hits = parabola_meet(field, line);
        let conic_pt = match params.tie_rule {
            TieRule::MinX => conic_hits.first().copied(),
            TieRule::MaxX => conic_hits.last().copied(),
        };
        let Some(conic_pt) = conic_pt else { continue };
        let mut ids = Vec::with_capacity(r);
        for (t, &alpha) in alphas.iter().enumerate() {
            // non-horizontal lines are normalized to x + b*y + c = 0
            let x = field.neg(field.add(field.mul(line.b, alpha), line.c));
            ids.push((t as u64 * q + x.index() as u64) as u32);
        }
        ids.push(((r as u64 - 1) * q + conic_pt.x.index() as u64) as u32);
        h.add_edge(ids, Some(line))?;
    }

    let expected = (q * q + 2 * q - 1) / 2;
    assert_eq!(
        h.edge_count() as u64,
        expected,
        "layer/conic model must have (q^2 + 2q - 1)/2 edges"
    );
    Ok(h)
}

/// Parallel model: r parallel layer lines at the canonically least r
/// coordinate values; every line not parallel to them meets each layer
/// exactly once and contributes that r-set as an edge. There are exactly
/// q^2 such lines, so |E| = q^2 and the edge density is exactly 1/r^2.
fn build_parallel(
    field: &Field,
    params: &ConstructionParams,
) -> Result<LinearHypergraph, ConstructError> {
    let q = field.q();
    let r = params.r;
    if r as u64 > q {
        return Err(ConstructError::TooManyLayers { r, q });
    }
    let layer_values: Vec<FieldElement> = field.elements().take(r).collect();
    let direction = params.layer_direction;

    // Layer t (1-based) holds its q points at ids (t-1)q + idx(coordinate),
    // where the coordinate is x for horizontal layers and y for vertical.
    let mut vertices = Vec::with_capacity(r * q as usize);
    for (t, &c) in layer_values.iter().enumerate() {
        for s in field.elements() {
            let point = match direction {
                LayerDirection::Horizontal => AffinePoint::new(s, c),
                LayerDirection::Vertical => AffinePoint::new(c, s),
            };
            vertices.push(Vertex {
                id: (t as u64 * q + s.index() as u64) as u32,
                tag: VertexTag::ALayer {
                    layer: t + 1,
                    point,
                },
            });
        }
    }

    let meta = Meta {
        model: Model::Parallel,
        r,
        field: field.clone(),
        params: ModelParams::Parallel {
            layer_values: layer_values.clone(),
            direction,
        },
    };
    let mut h = LinearHypergraph::new(meta, vertices);

    let layer_dir = match direction {
        LayerDirection::Horizontal => horizontal_direction(field),
        LayerDirection::Vertical => vertical_direction(field),
    };
    for line in enumerate_lines(field, LineFilter::NotParallelTo(layer_dir)) {
        let mut ids = Vec::with_capacity(r);
        for (t, &c) in layer_values.iter().enumerate() {
            let s = match direction {
                // crossing lines are normalized to x + b*y + c = 0
                LayerDirection::Horizontal => field.neg(field.add(field.mul(line.b, c), line.c)),
                LayerDirection::Vertical => {
                    let inv_b = field.inv(line.b).expect("non-vertical line has b != 0");
                    field.neg(field.mul(field.add(field.mul(line.a, c), line.c), inv_b))
                }
            };
            ids.push((t as u64 * q + s.index() as u64) as u32);
        }
        h.add_edge(ids, Some(line))?;
    }

    assert_eq!(
        h.edge_count() as u64,
        q * q,
        "parallel model must have q^2 edges"
    );
    Ok(h)
}

/// Partite line model over a prime field: fibers [1..r] x Z_q, one edge
/// {(i, y + (i-1)m)} per (y, m) pair, y outer and m inner. Contains many
/// grid patterns; built as the positive control for the searchers. For
/// r > q two edges can share two vertices and the linearity error from
/// the insertion is propagated.
fn build_fr(
    field: &Field,
    params: &ConstructionParams,
) -> Result<LinearHypergraph, ConstructError> {
    if field.k() != 1 {
        return Err(ConstructError::NonPrimeForFr {
            p: field.p(),
            k: field.k(),
        });
    }
    let q = field.q();
    let r = params.r;

    let mut vertices = Vec::with_capacity(r * q as usize);
    for t in 0..r {
        for v in field.elements() {
            vertices.push(Vertex {
                id: (t as u64 * q + v.index() as u64) as u32,
                tag: VertexTag::Fiber {
                    fiber: t + 1,
                    value: v,
                },
            });
        }
    }

    let meta = Meta {
        model: Model::Fr,
        r,
        field: field.clone(),
        params: ModelParams::Fr,
    };
    let mut h = LinearHypergraph::new(meta, vertices);

    for y in field.elements() {
        for m in field.elements() {
            let mut ids = Vec::with_capacity(r);
            for t in 0..r {
                let value = field.add(y, field.mul(field.scalar(t as u64), m));
                ids.push((t as u64 * q + value.index() as u64) as u32);
            }
            h.add_edge(ids, None)?;
        }
    }

    assert_eq!(
        h.edge_count() as u64,
        q * q,
        "partite model must have q^2 edges"
    );
    Ok(h)
}

/// Odd prime powers up to `max` in increasing order, for sweeps and tests.
pub fn odd_prime_powers(max: u64) -> Vec<(u64, usize)> {
    (3..=max)
        .filter(|&n| n % 2 == 1)
        .filter_map(crate::ff::factor_prime_power)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use crate::hyper::LinearityOutcome;

    fn hrq(p: u64, k: usize, r: usize) -> LinearHypergraph {
        let field = make_field(p, k).unwrap();
        build(&field, &ConstructionParams::new(Model::Hrq, r)).unwrap()
    }

    fn parallel(p: u64, k: usize, r: usize) -> LinearHypergraph {
        let field = make_field(p, k).unwrap();
        build(&field, &ConstructionParams::new(Model::Parallel, r)).unwrap()
    }

    fn fr(p: u64, r: usize) -> LinearHypergraph {
        let field = make_field(p, 1).unwrap();
        build(&field, &ConstructionParams::new(Model::Fr, r)).unwrap()
    }

    #[test]
    fn hrq_frozen_counts() {
        let h = hrq(5, 1, 3);
        assert_eq!(h.n(), 15);
        assert_eq!(h.edge_count(), 17);
        let h = hrq(3, 2, 3);
        assert_eq!(h.n(), 27);
        assert_eq!(h.edge_count(), 49);
    }

    #[test]
    fn hrq_custom_alphas() {
        let field = make_field(7, 1).unwrap();
        let mut params = ConstructionParams::new(Model::Hrq, 4);
        params.alphas = Some(vec![field.el(3), field.el(5), field.el(6)]);
        let h = build(&field, &params).unwrap();
        assert_eq!(h.n(), 28);
        assert_eq!(h.edge_count(), 31);

        params.alphas = Some(vec![field.el(3), field.el(5)]);
        assert_eq!(
            build(&field, &params).unwrap_err(),
            ConstructError::WrongAlphaCount {
                expected: 3,
                got: 2
            }
        );
        params.alphas = Some(vec![field.el(3), field.el(5), field.el(2)]);
        assert_eq!(
            build(&field, &params).unwrap_err(),
            ConstructError::AlphaIsSquare(2)
        );
        params.alphas = Some(vec![field.el(3), field.el(5), field.el(3)]);
        assert_eq!(
            build(&field, &params).unwrap_err(),
            ConstructError::DuplicateAlpha
        );
    }

    #[test]
    fn hrq_canonical_alphas_are_least_nonsquares() {
        let h = hrq(5, 1, 3);
        match &h.meta().params {
            ModelParams::Hrq { alphas, tie_rule } => {
                assert_eq!(alphas.iter().map(|a| a.index()).collect::<Vec<_>>(), [2, 3]);
                assert_eq!(*tie_rule, TieRule::MinX);
            }
            other => panic!("wrong params {:?}", other),
        }
    }

    #[test]
    fn hrq_layer_and_conic_points_are_disjoint() {
        for (p, k, r) in [(5, 1, 3), (7, 1, 3), (7, 1, 4), (3, 2, 3), (11, 1, 5)] {
            let h = hrq(p, k, r);
            let field = h.field().clone();
            let mut layer_pts = Vec::new();
            let mut conic_pts = Vec::new();
            for v in h.vertices() {
                match v.tag {
                    VertexTag::ALayer { point, .. } => layer_pts.push(point),
                    VertexTag::BConic { point } => conic_pts.push(point),
                    _ => panic!("unexpected tag in layer/conic model"),
                }
            }
            assert_eq!(layer_pts.len(), (r - 1) * field.q() as usize);
            assert_eq!(conic_pts.len(), field.q() as usize);
            for &cp in &conic_pts {
                assert_eq!(cp.y, field.mul(cp.x, cp.x));
                assert!(!layer_pts.contains(&cp));
            }
        }
    }

    #[test]
    fn hrq_edges_have_one_conic_vertex_and_one_per_layer() {
        let h = hrq(7, 1, 4);
        let field = h.field().clone();
        for e in 0..h.edge_count() as u32 {
            let line = h.edge_line(e).expect("geometric model");
            let mut layers_seen = Vec::new();
            let mut conic_seen = 0;
            for &v in h.edge(e) {
                let pt = h.vertex_point(v).unwrap();
                assert!(line.contains_affine(&field, pt), "vertex off its edge line");
                match h.vertices()[v as usize].tag {
                    VertexTag::ALayer { layer, .. } => layers_seen.push(layer),
                    VertexTag::BConic { .. } => conic_seen += 1,
                    _ => unreachable!(),
                }
            }
            layers_seen.sort_unstable();
            assert_eq!(layers_seen, [1, 2, 3]);
            assert_eq!(conic_seen, 1);
        }
    }

    #[test]
    fn hrq_tie_rule_changes_secant_choice_only() {
        let field = make_field(5, 1).unwrap();
        let mut params = ConstructionParams::new(Model::Hrq, 3);
        let h_min = build(&field, &params).unwrap();
        params.tie_rule = TieRule::MaxX;
        let h_max = build(&field, &params).unwrap();
        assert_eq!(h_min.edge_count(), h_max.edge_count());
        assert_ne!(h_min, h_max);
        assert_eq!(h_max.check_linear(), LinearityOutcome::Pass);
        // non-conic vertices agree edge by edge
        for e in 0..h_min.edge_count() as u32 {
            let a: Vec<u32> = h_min.edge(e).iter().copied().filter(|&v| v < 10).collect();
            let b: Vec<u32> = h_max.edge(e).iter().copied().filter(|&v| v < 10).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn hrq_not_enough_nonsquares() {
        let field = make_field(5, 1).unwrap();
        assert_eq!(
            build(&field, &ConstructionParams::new(Model::Hrq, 4)).unwrap_err(),
            ConstructError::NotEnoughNonsquares {
                needed: 3,
                available: 2,
                q: 5
            }
        );
        assert_eq!(
            build(&field, &ConstructionParams::new(Model::Hrq, 2)).unwrap_err(),
            ConstructError::RTooSmall(2)
        );
    }

    #[test]
    fn hrq_edge_count_formula_sweep() {
        for (p, k) in odd_prime_powers(101) {
            let field = make_field(p, k).unwrap();
            let q = field.q();
            let r = 3;
            if (q as usize - 1) / 2 < r - 1 {
                continue;
            }
            let h = build(&field, &ConstructionParams::new(Model::Hrq, r)).unwrap();
            assert_eq!(h.n() as u64, r as u64 * q);
            assert_eq!(h.edge_count() as u64, (q * q + 2 * q - 1) / 2);
            assert_eq!(h.check_linear(), LinearityOutcome::Pass);
            h.bound_check().unwrap();
        }
    }

    #[test]
    fn parallel_frozen_counts_and_density() {
        let h = parallel(5, 1, 3);
        assert_eq!(h.n(), 15);
        assert_eq!(h.edge_count(), 25);
        let h = parallel(5, 1, 5);
        assert_eq!(h.n(), 25);
        assert_eq!(h.edge_count(), 25);
        let h = parallel(7, 1, 3);
        assert_eq!(h.edge_count(), 49);
        // density is exactly 1/r^2: |E| * r^2 == n^2
        for (p, k, r) in [(5, 1, 3), (7, 1, 3), (3, 2, 4), (11, 1, 5)] {
            let h = parallel(p, k, r);
            assert_eq!(h.edge_count() * r * r, h.n() * h.n());
            assert_eq!(h.check_linear(), LinearityOutcome::Pass);
        }
    }

    #[test]
    fn parallel_vertical_direction() {
        let field = make_field(5, 1).unwrap();
        let mut params = ConstructionParams::new(Model::Parallel, 3);
        params.layer_direction = LayerDirection::Vertical;
        let h = build(&field, &params).unwrap();
        assert_eq!(h.edge_count(), 25);
        assert_eq!(h.check_linear(), LinearityOutcome::Pass);
        for e in 0..h.edge_count() as u32 {
            let line = h.edge_line(e).unwrap();
            assert!(!line.is_vertical());
            for &v in h.edge(e) {
                assert!(line.contains_affine(&field, h.vertex_point(v).unwrap()));
            }
        }
        // layers are x = 0, 1, 2
        match &h.meta().params {
            ModelParams::Parallel {
                layer_values,
                direction,
            } => {
                assert_eq!(
                    layer_values.iter().map(|a| a.index()).collect::<Vec<_>>(),
                    [0, 1, 2]
                );
                assert_eq!(*direction, LayerDirection::Vertical);
            }
            other => panic!("wrong params {:?}", other),
        }
    }

    #[test]
    fn parallel_too_many_layers() {
        let field = make_field(5, 1).unwrap();
        assert_eq!(
            build(&field, &ConstructionParams::new(Model::Parallel, 6)).unwrap_err(),
            ConstructError::TooManyLayers { r: 6, q: 5 }
        );
    }

    #[test]
    fn fr_frozen_counts_and_first_edge() {
        let h = fr(5, 3);
        assert_eq!(h.n(), 15);
        assert_eq!(h.edge_count(), 25);
        // edge (y=0, m=0) holds value 0 in every fiber: ids 0, 5, 10
        assert_eq!(h.edge(0), &[0, 5, 10]);
        // edge (y=0, m=1) holds 0, 1, 2 across the fibers: ids 0, 6, 12
        assert_eq!(h.edge(1), &[0, 6, 12]);
        assert_eq!(h.check_linear(), LinearityOutcome::Pass);
    }

    #[test]
    fn fr_rejects_extension_fields_and_overwide_r() {
        let field = make_field(3, 2).unwrap();
        assert_eq!(
            build(&field, &ConstructionParams::new(Model::Fr, 3)).unwrap_err(),
            ConstructError::NonPrimeForFr { p: 3, k: 2 }
        );
        // r > q: fibers 1 and q+1 repeat values, so two edges share two
        // vertices and the linearity check fires during insertion
        let field = make_field(3, 1).unwrap();
        assert!(matches!(
            build(&field, &ConstructionParams::new(Model::Fr, 4)).unwrap_err(),
            ConstructError::Hyper(HyperError::LinearityViolation { .. })
        ));
    }

    #[test]
    fn builds_are_deterministic() {
        for (model, p, k, r) in [
            (Model::Hrq, 7, 1, 3),
            (Model::Hrq, 3, 2, 3),
            (Model::Parallel, 7, 1, 4),
            (Model::Fr, 7, 1, 3),
        ] {
            let field = make_field(p, k).unwrap();
            let params = ConstructionParams::new(model, r);
            let a = build(&field, &params).unwrap();
            let b = build(&field, &params).unwrap();
            assert_eq!(a.to_json_string(), b.to_json_string());
        }
    }

    #[test]
    fn built_hypergraphs_roundtrip_through_json() {
        for (model, p, k, r) in [
            (Model::Hrq, 5, 1, 3),
            (Model::Hrq, 3, 2, 3),
            (Model::Parallel, 5, 1, 3),
            (Model::Fr, 5, 1, 3),
        ] {
            let field = make_field(p, k).unwrap();
            let h = build(&field, &ConstructionParams::new(model, r)).unwrap();
            let h2 = LinearHypergraph::from_json_str(&h.to_json_string()).unwrap();
            assert_eq!(h, h2);
            for e in 0..h.edge_count() as u32 {
                assert_eq!(h.edge_line(e), h2.edge_line(e));
            }
        }
    }

    #[test]
    fn odd_prime_power_list() {
        let list = odd_prime_powers(30);
        let qs: Vec<u64> = list.iter().map(|&(p, k)| p.pow(k as u32)).collect();
        assert_eq!(qs, [3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29]);
    }
}
