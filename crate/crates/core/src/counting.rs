//! Homomorphism densities `t(F,·)` for step graphons and weighted graphs,
//! the Lᵖ counting-lemma bound, the generalized-Hölder finiteness bound, and
//! the separable counterexample family showing no counting lemma below the
//! maximum degree.

use crate::graph::WeightedGraph;
use crate::graphon::{embed_graph, StepGraphon};
use crate::{cutmetric, Error, Result, ABS_TOL};
use serde::Serialize;

/// Guard on the assignment space of the density computation.
pub const ASSIGNMENT_GUARD: f64 = 1e8;
/// Guard on motif size.
pub const MOTIF_VERTEX_LIMIT: usize = 8;

/// A simple, loopless motif. Parsed from edge-list strings like
/// `"1-2,2-3,3-1"` (1-based labels).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MotifGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl MotifGraph {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidParameter("motifs are loopless".into()));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "motif edge ({u},{v}) outside 0..{vertex_count}"
                )));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        let before = canon.len();
        canon.dedup();
        if canon.len() != before {
            return Err(Error::InvalidParameter("duplicate motif edge".into()));
        }
        if vertex_count == 0 {
            return Err(Error::InvalidParameter("motif needs at least one vertex".into()));
        }
        Ok(MotifGraph { vertex_count, edges: canon })
    }

    /// Edge-list format `"1-2,2-3"`; also accepts the built-in names
    /// `K2, P3, K3, C4, K4`.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "K2" => return Self::new(2, [(0, 1)]),
            "P3" => return Self::new(3, [(0, 1), (1, 2)]),
            "K3" => return Self::new(3, [(0, 1), (1, 2), (0, 2)]),
            "C4" => return Self::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
            "K4" => return Self::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
            _ => {}
        }
        let mut edges = Vec::new();
        let mut max_label = 0usize;
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (a, b) = part
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("bad motif edge `{part}`")))?;
            let a: usize = a.trim().parse().map_err(|_| Error::Parse(format!("bad label in `{part}`")))?;
            let b: usize = b.trim().parse().map_err(|_| Error::Parse(format!("bad label in `{part}`")))?;
            if a == 0 || b == 0 {
                return Err(Error::Parse("motif labels are 1-based".into()));
            }
            max_label = max_label.max(a).max(b);
            edges.push((a - 1, b - 1));
        }
        if edges.is_empty() {
            return Err(Error::Parse("motif has no edges".into()));
        }
        Self::new(max_label, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn disjoint_union(&self, other: &MotifGraph) -> MotifGraph {
        let offset = self.vertex_count;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
        MotifGraph::new(self.vertex_count + other.vertex_count, edges).expect("valid union")
    }
}

struct Factor {
    vars: Vec<usize>,
    data: Vec<f64>,
}

fn decode(code: usize, arity: usize, m: usize, out: &mut [usize]) {
    let mut c = code;
    for slot in (0..arity).rev() {
        out[slot] = c % m;
        c /= m;
    }
}

/// `t(F,W)`: exact contraction over class assignments, eliminating one motif
/// vertex at a time (minimum remaining degree first).
pub fn hom_density_graphon(f: &MotifGraph, w: &StepGraphon) -> Result<f64> {
    let nv = f.vertex_count();
    let m = w.num_classes();
    if nv > MOTIF_VERTEX_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "motif has {nv} vertices, limit {MOTIF_VERTEX_LIMIT}"
        )));
    }
    if (m as f64).powi(nv as i32) > ASSIGNMENT_GUARD {
        return Err(Error::SizeGuard { size: m, limit: ASSIGNMENT_GUARD as usize });
    }
    let lengths = w.lengths();
    let mut factors: Vec<Factor> = f
        .edges
        .iter()
        .map(|&(u, v)| {
            let mut data = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    data[a * m + b] = w.value(a, b);
                }
            }
            Factor { vars: vec![u.min(v), u.max(v)], data }
        })
        .collect();
    let mut remaining: Vec<usize> = (0..nv).collect();
    let mut scalar = 1.0f64;
    while let Some(&v) = remaining
        .iter()
        .min_by_key(|&&v| {
            let deg = factors.iter().filter(|f| f.vars.contains(&v)).count();
            (deg, v)
        })
    {
        remaining.retain(|&u| u != v);
        let (with_v, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        if with_v.is_empty() {
            // Free vertex: ∫ dλ = 1.
            continue;
        }
        let mut uvars: Vec<usize> =
            with_v.iter().flat_map(|f| f.vars.iter().copied()).collect();
        uvars.sort_unstable();
        uvars.dedup();
        let out_vars: Vec<usize> = uvars.iter().copied().filter(|&u| u != v).collect();
        let pos_v = uvars.iter().position(|&u| u == v).unwrap();
        // Positions of each factor's vars inside uvars.
        let maps: Vec<Vec<usize>> = with_v
            .iter()
            .map(|f| f.vars.iter().map(|x| uvars.iter().position(|y| y == x).unwrap()).collect())
            .collect();
        let out_positions: Vec<usize> = out_vars
            .iter()
            .map(|x| uvars.iter().position(|y| y == x).unwrap())
            .collect();
        let arity = uvars.len();
        let total = m.pow(arity as u32);
        let mut data = vec![0.0; m.pow(out_vars.len() as u32)];
        let mut assign = vec![0usize; arity];
        for code in 0..total {
            decode(code, arity, m, &mut assign);
            let mut prod = lengths[assign[pos_v]];
            for (f, map) in with_v.iter().zip(&maps) {
                let mut idx = 0usize;
                for &p in map {
                    idx = idx * m + assign[p];
                }
                prod *= f.data[idx];
                if prod == 0.0 {
                    break;
                }
            }
            if prod == 0.0 {
                continue;
            }
            let mut out_idx = 0usize;
            for &p in &out_positions {
                out_idx = out_idx * m + assign[p];
            }
            data[out_idx] += prod;
        }
        if out_vars.is_empty() {
            scalar *= data[0];
        } else {
            factors.push(Factor { vars: out_vars, data });
        }
    }
    debug_assert!(factors.is_empty());
    Ok(scalar)
}

/// `t(F,G) = t(F, W^G)`; for simple graphs this is `hom(F,G)/|V(G)|^{|V(F)|}`.
pub fn hom_density_graph(f: &MotifGraph, g: &WeightedGraph) -> Result<f64> {
    hom_density_graphon(f, &embed_graph(g)?)
}

/// `2m(m−1+p−Δ)·(2ε/(p−Δ))^{(p−Δ)/(p−Δ+m−1)}`: the counting-lemma bound on
/// `|t(F,U) − t(F,W)|` for `‖U‖_p, ‖W‖_p ≤ 1` and `δ□(U,W) ≤ ε`.
pub fn counting_bound(f: &MotifGraph, p: f64, eps: f64) -> Result<f64> {
    let delta = f.max_degree() as f64;
    let m = f.edge_count() as f64;
    if !(p > delta) {
        return Err(Error::InvalidParameter(format!(
            "no counting lemma below the maximum degree (p = {p}, Δ = {delta})"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let gap = p - delta;
    Ok(2.0 * m * (m - 1.0 + gap) * (2.0 * eps / gap).powf(gap / (gap + m - 1.0)))
}

/// `‖W‖_Δ^{|E(F)|}`, a finite upper bound on `|t(F,W)|`.
pub fn holder_bound(f: &MotifGraph, w: &StepGraphon) -> Result<f64> {
    if f.edge_count() == 0 {
        return Ok(1.0);
    }
    let delta = f.max_degree() as f64;
    Ok(w.lp_norm(delta)?.powi(f.edge_count() as i32))
}

/// Exact diagnostics of the no-counting family `W_n = w_n ⊗ w_n`,
/// `w_n = 1 + (x ln n)^{−1/Δ} 1_{[1/n,1]}`.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub t_value: f64,
    /// `‖W_n − 1‖₁`.
    pub l1_dist: f64,
    /// `‖W_n‖_Δ`.
    pub l_delta_norm: f64,
    /// `‖u_n‖_Δ` (= 1 for every n, up to rounding).
    pub u_delta_norm: f64,
    /// Step approximation on a geometric grid (64 cells per decade).
    #[serde(skip)]
    pub graphon: StepGraphon,
}

const CELLS_PER_DECADE: f64 = 64.0;

/// Exact `∫_a^b x^s dx` for `s ≠ −1`, `ln(b/a)` for `s = −1`.
fn power_integral(a: f64, b: f64, s: f64) -> f64 {
    if (s + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(s + 1.0) - a.powf(s + 1.0)) / (s + 1.0)
    }
}

pub fn counterexample_family(f: &MotifGraph, n: u64) -> Result<CounterexampleReport> {
    let delta = f.max_degree();
    if n < 3 {
        return Err(Error::InvalidParameter("n must be at least 3".into()));
    }
    if delta < 2 {
        return Err(Error::InvalidParameter("the family needs Δ ≥ 2".into()));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let d = delta as f64;
    // ‖u‖_j^j = (ln n)^{−j/Δ} ∫_{1/n}^1 x^{−j/Δ} dx, closed form.
    let u_moment = |j: usize| -> f64 {
        if j == 0 {
            return 1.0 - 1.0 / nf;
        }
        ln_n.powf(-(j as f64) / d) * power_integral(1.0 / nf, 1.0, -(j as f64) / d)
    };
    let binom = |k: usize, j: usize| -> f64 {
        let mut acc = 1.0;
        for t in 0..j {
            acc = acc * (k - t) as f64 / (t + 1) as f64;
        }
        acc
    };
    // ‖w‖_k^k = 1 + Σ_{j≥1} C(k,j)‖u‖_j^j.
    let w_moment = |k: usize| -> f64 {
        1.0 + (1..=k).map(|j| binom(k, j) * u_moment(j)).sum::<f64>()
    };
    let t_value: f64 = (0..f.vertex_count())
        .map(|v| {
            let deg = f.degree(v);
            if deg == 0 {
                1.0
            } else {
                w_moment(deg)
            }
        })
        .product();
    let u1 = u_moment(1);
    let l1_dist = 2.0 * u1 + u1 * u1;
    let l_delta_norm = w_moment(delta).powf(2.0 / d);
    let u_delta_norm = u_moment(delta).powf(1.0 / d);

    // Geometric grid of [1/n, 1] plus the flat head cell [0, 1/n].
    let ratio = 10f64.powf(1.0 / CELLS_PER_DECADE);
    let mut points = vec![1.0 / nf];
    loop {
        let next = points.last().unwrap() * ratio;
        if next >= 1.0 - 1e-12 {
            points.push(1.0);
            break;
        }
        points.push(next);
    }
    let mut lengths = vec![1.0 / nf];
    let mut averages = vec![1.0]; // w = 1 on the head cell
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        lengths.push(b - a);
        let avg_u = ln_n.powf(-1.0 / d) * power_integral(a, b, -1.0 / d) / (b - a);
        averages.push(1.0 + avg_u);
    }
    // Absorb rounding into the last cell so lengths sum to exactly 1.
    let sum: f64 = lengths.iter().sum();
    let last = lengths.len() - 1;
    lengths[last] += 1.0 - sum;
    let values: Vec<Vec<f64>> = averages
        .iter()
        .map(|&a| averages.iter().map(|&b| a * b).collect())
        .collect();
    let graphon = StepGraphon::new(lengths, values)?;
    Ok(CounterexampleReport { t_value, l1_dist, l_delta_norm, u_delta_norm, graphon })
}

/// One counting-lemma instance: densities of both graphons, a certified
/// upper bound on their cut distance, and the Lᵖ counting bound.
#[derive(Debug, Clone, Serialize)]
pub struct CountingLemmaReport {
    pub t_u: f64,
    pub t_w: f64,
    pub difference: f64,
    pub eps_upper: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn counting_lemma_check(
    f: &MotifGraph,
    u: &StepGraphon,
    w: &StepGraphon,
    p: f64,
) -> Result<CountingLemmaReport> {
    let delta = f.max_degree() as f64;
    if !(p > delta) {
        return Err(Error::InvalidParameter(format!(
            "counting lemma needs p > Δ (p = {p}, Δ = {delta})"
        )));
    }
    if u.lp_norm(p)? > 1.0 + ABS_TOL || w.lp_norm(p)? > 1.0 + ABS_TOL {
        return Err(Error::InvalidParameter("counting lemma needs ‖U‖_p, ‖W‖_p ≤ 1".into()));
    }
    let t_u = hom_density_graphon(f, u)?;
    let t_w = hom_density_graphon(f, w)?;
    let difference = (t_u - t_w).abs();
    let eps_upper = cutmetric::d_cut(u, w)?.upper;
    if eps_upper == 0.0 {
        return Ok(CountingLemmaReport {
            t_u,
            t_w,
            difference,
            eps_upper,
            bound: 0.0,
            holds: difference <= ABS_TOL,
        });
    }
    let bound = counting_bound(f, p, eps_upper)?;
    Ok(CountingLemmaReport { t_u, t_w, difference, eps_upper, bound, holds: difference <= bound + ABS_TOL })
}
