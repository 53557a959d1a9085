//! Deciding and falsifying `(C,η)`-upper Lᵖ regularity for graphs and
//! graphons, plus K-bounded tails and the uniform-integrability variant of
//! upper regularity.

use crate::graph::WeightedGraph;
use crate::graphon::StepGraphon;
use crate::partition::Partition;
use crate::rng::{self, Stream, Tag};
use crate::{Error, Result, REP_TOL};
use serde::Serialize;

/// Bell-number enumeration guard for the exact checkers (Bell(12) ≈ 4.2M).
pub const EXACT_VERTEX_LIMIT: usize = 12;

/// Finite monotone table `ε → K(ε)`, extended between keys by the largest
/// smaller key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBoundFn {
    table: Vec<(f64, f64)>,
}

impl TailBoundFn {
    pub fn new(entries: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut table: Vec<(f64, f64)> = entries.into_iter().collect();
        if table.is_empty() {
            return Err(Error::InvalidParameter("tail-bound table must be nonempty".into()));
        }
        for &(eps, k) in &table {
            if !(eps > 0.0) || !(k > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tail-bound entries need ε > 0 and K > 0, got ({eps}, {k})"
                )));
            }
        }
        table.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        table.dedup_by(|a, b| (a.0 - b.0).abs() <= REP_TOL);
        Ok(TailBoundFn { table })
    }

    /// Stored `(ε, K(ε))` pairs in increasing ε order.
    pub fn entries(&self) -> &[(f64, f64)] {
        &self.table
    }

    /// `K(ε)` by the largest stored key ≤ ε; `None` below the smallest key.
    pub fn lookup(&self, eps: f64) -> Option<f64> {
        self.table
            .iter()
            .take_while(|&&(e, _)| e <= eps + REP_TOL)
            .last()
            .map(|&(_, k)| k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    VerifiedExact,
    Falsified,
    Unfalsified,
}

/// Why a falsified verdict holds: either a vertex too heavy for η, or an
/// explicit partition whose stepped norm violates the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Falsification {
    DominantNode { vertex: usize },
    Partition { labels: Vec<usize>, value: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityVerdict {
    pub status: VerdictStatus,
    pub certificate: Option<Falsification>,
    /// Largest stepped Lᵖ norm (or tail excess) encountered.
    pub worst_value: f64,
}

impl RegularityVerdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serialization")
    }
}

/// Normalized stepped norm of Eq-style class densities:
/// `(Σ_{i,j} (α_{V_i}α_{V_j}/α_G²) |ρ(V_i,V_j)/‖G‖₁|^p)^{1/p}`.
pub fn stepped_norm(g: &WeightedGraph, labels: &[usize], classes: usize, p: f64) -> Result<f64> {
    let l1 = g.lp_norm(1.0)?;
    if l1 == 0.0 {
        return Err(Error::NoEdges);
    }
    let (dens, class_w) = g.class_densities(labels, classes)?;
    let alpha2 = g.total_weight() * g.total_weight();
    if p.is_infinite() {
        return Ok(dens.iter().map(|d| (d / l1).abs()).fold(0.0, f64::max));
    }
    let mut sum = 0.0;
    for a in 0..classes {
        for b in 0..classes {
            sum += class_w[a] * class_w[b] / alpha2 * (dens[a * classes + b] / l1).abs().powf(p);
        }
    }
    Ok(sum.powf(1.0 / p))
}

fn dominant_node(g: &WeightedGraph, eta: f64) -> Option<usize> {
    let bound = eta * g.total_weight();
    g.vertex_weights().iter().position(|&a| a > bound + REP_TOL)
}

/// Visit every set partition of `0..n` as restricted-growth label strings.
fn for_each_set_partition(n: usize, mut visit: impl FnMut(&[usize], usize) -> bool) {
    let mut labels = vec![0usize; n];
    fn rec(
        labels: &mut Vec<usize>,
        pos: usize,
        max_used: usize,
        visit: &mut impl FnMut(&[usize], usize) -> bool,
    ) -> bool {
        let n = labels.len();
        if pos == n {
            return visit(labels, max_used + 1);
        }
        for c in 0..=max_used + 1 {
            labels[pos] = c;
            if !rec(labels, pos + 1, max_used.max(c), visit) {
                return false;
            }
        }
        true
    }
    if n == 0 {
        return;
    }
    // First cell is always labeled 0.
    rec(&mut labels, 1, 0, &mut visit);
}

/// Exact decision of `(C,η)`-upper Lᵖ regularity by enumerating all proper
/// vertex partitions (at least two parts, each of weight ≥ η·α_G).
pub fn check_upper_regular_exact(
    g: &WeightedGraph,
    c: f64,
    eta: f64,
    p: f64,
) -> Result<RegularityVerdict> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > EXACT_VERTEX_LIMIT {
        return Err(Error::TooManyVertices { vertices: n, limit: EXACT_VERTEX_LIMIT });
    }
    if let Some(vertex) = dominant_node(g, eta) {
        return Ok(RegularityVerdict {
            status: VerdictStatus::Falsified,
            certificate: Some(Falsification::DominantNode { vertex }),
            worst_value: g.vertex_weight(vertex) / g.total_weight(),
        });
    }
    let min_weight = eta * g.total_weight() - REP_TOL;
    let mut worst = 0.0f64;
    let mut violation: Option<(Vec<usize>, f64)> = None;
    let mut admissible = 0usize;
    for_each_set_partition(n, |labels, classes| {
        if classes < 2 {
            return true;
        }
        let mut weights = vec![0.0; classes];
        for (v, &cl) in labels.iter().enumerate() {
            weights[cl] += g.vertex_weight(v);
        }
        if weights.iter().any(|&w| w < min_weight) {
            return true;
        }
        admissible += 1;
        let norm = stepped_norm(g, labels, classes, p).expect("validated graph");
        if norm > worst {
            worst = norm;
        }
        if norm > c + crate::ABS_TOL {
            violation = Some((labels.to_vec(), norm));
            return false;
        }
        true
    });
    let _ = admissible;
    Ok(match violation {
        Some((labels, value)) => RegularityVerdict {
            status: VerdictStatus::Falsified,
            certificate: Some(Falsification::Partition { labels, value }),
            worst_value: value,
        },
        None => RegularityVerdict {
            status: VerdictStatus::VerifiedExact,
            certificate: None,
            worst_value: worst,
        },
    })
}

/// Exact decision of `(C,η)`-upper Lᵖ regularity for a step graphon over
/// partitions of its grid classes (including the trivial partition, per the
/// graphon-side definition). Class partitions are the checkable fragment of
/// the measurable-partition quantifier; a falsification is still a genuine
/// falsification.
pub fn check_upper_regular_graphon_exact(
    w: &StepGraphon,
    c: f64,
    eta: f64,
    p: f64,
) -> Result<RegularityVerdict> {
    let m = w.num_classes();
    if m > EXACT_VERTEX_LIMIT {
        return Err(Error::TooManyVertices { vertices: m, limit: EXACT_VERTEX_LIMIT });
    }
    let mut worst = 0.0f64;
    let mut violation: Option<(Vec<usize>, f64)> = None;
    for_each_set_partition(m, |labels, classes| {
        let mut weights = vec![0.0; classes];
        for (cell, &cl) in labels.iter().enumerate() {
            weights[cl] += w.class_length(cell);
        }
        if weights.iter().any(|&x| x < eta - REP_TOL) {
            return true;
        }
        let part = Partition::new(labels.to_vec(), w.lengths().to_vec()).expect("labels in range");
        let norm = w
            .quotient(&part)
            .and_then(|q| q.lp_norm(p))
            .expect("partition of grid");
        if norm > worst {
            worst = norm;
        }
        if norm > c + crate::ABS_TOL {
            violation = Some((labels.to_vec(), norm));
            return false;
        }
        true
    });
    Ok(match violation {
        Some((labels, value)) => RegularityVerdict {
            status: VerdictStatus::Falsified,
            certificate: Some(Falsification::Partition { labels, value }),
            worst_value: value,
        },
        None => RegularityVerdict {
            status: VerdictStatus::VerifiedExact,
            certificate: None,
            worst_value: worst,
        },
    })
}

/// Local-search state over class densities, updated incrementally as
/// vertices move between parts.
struct MoveSearch<'a> {
    g: &'a WeightedGraph,
    labels: Vec<usize>,
    classes: usize,
    class_w: Vec<f64>,
    /// Unnormalized ordered-pair mass `Σ_{x∈V_a, y∈V_b} α_xα_yβ_xy`.
    num: Vec<f64>,
    l1: f64,
}

impl<'a> MoveSearch<'a> {
    fn new(g: &'a WeightedGraph, labels: Vec<usize>, classes: usize, l1: f64) -> Self {
        let mut class_w = vec![0.0; classes];
        for (v, &c) in labels.iter().enumerate() {
            class_w[c] += g.vertex_weight(v);
        }
        let mut num = vec![0.0; classes * classes];
        for &(i, j, beta) in g.edges() {
            let (i, j) = (i as usize, j as usize);
            let mass = g.vertex_weight(i) * g.vertex_weight(j) * beta;
            let (a, b) = (labels[i], labels[j]);
            num[a * classes + b] += mass;
            if i != j {
                num[b * classes + a] += mass;
            }
        }
        MoveSearch { g, labels, classes, class_w, num, l1 }
    }

    fn norm(&self, p: f64) -> f64 {
        let alpha2 = self.g.total_weight() * self.g.total_weight();
        if p.is_infinite() {
            let mut best: f64 = 0.0;
            for a in 0..self.classes {
                for b in 0..self.classes {
                    let d = self.num[a * self.classes + b]
                        / (self.class_w[a] * self.class_w[b] * self.l1);
                    best = best.max(d.abs());
                }
            }
            return best;
        }
        let mut sum = 0.0;
        for a in 0..self.classes {
            for b in 0..self.classes {
                let d = self.num[a * self.classes + b]
                    / (self.class_w[a] * self.class_w[b] * self.l1);
                sum += self.class_w[a] * self.class_w[b] / alpha2 * d.abs().powf(p);
            }
        }
        sum.powf(1.0 / p)
    }

    fn apply_move(&mut self, v: usize, to: usize) {
        let from = self.labels[v];
        let av = self.g.vertex_weight(v);
        for &(i, j, beta) in self.g.edges() {
            let (i, j) = (i as usize, j as usize);
            if i != v && j != v {
                continue;
            }
            if i == j {
                let mass = av * av * beta;
                self.num[from * self.classes + from] -= mass;
                self.num[to * self.classes + to] += mass;
            } else {
                let u = if i == v { j } else { i };
                let mass = av * self.g.vertex_weight(u) * beta;
                // Remove both ordered copies, then re-add against the class u
                // sits in after the move.
                let cu_before = self.labels[u];
                self.num[from * self.classes + cu_before] -= mass;
                self.num[cu_before * self.classes + from] -= mass;
                let cu_after = if u == v { to } else { cu_before };
                self.num[to * self.classes + cu_after] += mass;
                self.num[cu_after * self.classes + to] += mass;
            }
        }
        self.class_w[from] -= av;
        self.class_w[to] += av;
        self.labels[v] = to;
    }
}

/// Randomized falsifier: random near-balanced partitions improved by greedy
/// vertex moves that maximize the stepped Lᵖ norm subject to the part-weight
/// floor. Restarts are merged deterministically in index order.
pub fn falsify_upper_regular(
    g: &WeightedGraph,
    c: f64,
    eta: f64,
    p: f64,
    budget: usize,
    seed: u64,
) -> Result<RegularityVerdict> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if let Some(vertex) = dominant_node(g, eta) {
        return Ok(RegularityVerdict {
            status: VerdictStatus::Falsified,
            certificate: Some(Falsification::DominantNode { vertex }),
            worst_value: g.vertex_weight(vertex) / g.total_weight(),
        });
    }
    let l1 = g.lp_norm(1.0)?;
    if l1 == 0.0 {
        return Err(Error::NoEdges);
    }
    let alpha = g.total_weight();
    let min_weight = eta * alpha - REP_TOL;
    let max_parts = ((1.0 / eta).floor() as usize).min(n);
    if max_parts < 2 {
        return Ok(RegularityVerdict {
            status: VerdictStatus::Unfalsified,
            certificate: None,
            worst_value: 0.0,
        });
    }
    let mut worst = 0.0f64;
    let mut found: Option<(Vec<usize>, f64)> = None;
    'restarts: for r in 0..budget.max(1) {
        let mut stream = Stream::new(rng::derive(seed, Tag::FalsifyRestart, r as u64));
        let m = 2 + stream.next_below(max_parts - 1);
        let mut order: Vec<usize> = (0..n).collect();
        stream.shuffle(&mut order);
        let mut labels = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            labels[v] = pos % m;
        }
        // Balanced dealing can still undershoot the weight floor on weighted
        // graphs; collapse offending parts into their successor.
        loop {
            let mut weights = vec![0.0; m];
            for (v, &cl) in labels.iter().enumerate() {
                weights[cl] += g.vertex_weight(v);
            }
            match weights.iter().position(|&w| w < min_weight) {
                None => break,
                Some(light) => {
                    let target = (light + 1) % m;
                    for l in labels.iter_mut() {
                        if *l == light {
                            *l = target;
                        }
                    }
                    let part = Partition::new(labels.clone(), g.vertex_weights().to_vec())
                        .expect("labels in range");
                    if part.num_classes() < 2 {
                        continue 'restarts;
                    }
                    labels = part.labels().to_vec();
                }
            }
        }
        let part = Partition::new(labels, g.vertex_weights().to_vec()).expect("labels in range");
        let m = part.num_classes();
        let mut search = MoveSearch::new(g, part.labels().to_vec(), m, l1);
        let mut current = search.norm(p);
        for _pass in 0..60 {
            let mut best_gain = 1e-12;
            let mut best_move: Option<(usize, usize)> = None;
            for v in 0..n {
                let from = search.labels[v];
                if search.class_w[from] - g.vertex_weight(v) < min_weight {
                    continue; // would empty the source below the floor
                }
                for to in 0..m {
                    if to == from {
                        continue;
                    }
                    search.apply_move(v, to);
                    let val = search.norm(p);
                    search.apply_move(v, from);
                    if val - current > best_gain {
                        best_gain = val - current;
                        best_move = Some((v, to));
                    }
                }
            }
            match best_move {
                Some((v, to)) => {
                    search.apply_move(v, to);
                    current = search.norm(p);
                }
                None => break,
            }
        }
        let value = search.norm(p);
        if value > worst {
            worst = value;
        }
        if value > c + crate::ABS_TOL {
            found = Some((search.labels.clone(), value));
            break;
        }
    }
    Ok(match found {
        Some((labels, value)) => RegularityVerdict {
            status: VerdictStatus::Falsified,
            certificate: Some(Falsification::Partition { labels, value }),
            worst_value: value,
        },
        None => RegularityVerdict {
            status: VerdictStatus::Unfalsified,
            certificate: None,
            worst_value: worst,
        },
    })
}

/// `‖W·1_{|W| ≥ K}‖₁`.
pub fn tail_mass(w: &StepGraphon, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("tail level must be positive, got {k}")));
    }
    let m = w.num_classes();
    let mut sum = 0.0;
    for i in 0..m {
        for j in 0..m {
            let v = w.value(i, j);
            if v.abs() >= k {
                sum += w.class_length(i) * w.class_length(j) * v.abs();
            }
        }
    }
    Ok(sum)
}

/// True iff `tail_mass(W, K(ε)) ≤ ε` for every stored ε.
pub fn check_k_bounded_tails(w: &StepGraphon, kfn: &TailBoundFn) -> bool {
    kfn.entries()
        .iter()
        .all(|&(eps, k)| tail_mass(w, k).map(|t| t <= eps + REP_TOL).unwrap_or(false))
}

/// Tail bound valid for every stepping of a graphon with `K`-bounded tails
/// and `‖W‖₁ ≤ l1_bound`: `K'(ε) = l1_bound / δ(ε)` with
/// `δ(ε) = ε/(2K(ε/2))`.
pub fn stepped_tail_bound(kfn: &TailBoundFn, l1_bound: f64) -> Result<TailBoundFn> {
    let entries: Vec<(f64, f64)> = kfn
        .entries()
        .iter()
        .filter_map(|&(eps, _)| {
            kfn.lookup(eps / 2.0).map(|k_half| (eps, 2.0 * l1_bound * k_half / eps))
        })
        .collect();
    TailBoundFn::new(entries)
}

/// Search for a partition (parts of measure ≥ η) whose stepping breaks the
/// tail table. Exact enumeration up to [`EXACT_VERTEX_LIMIT`] grid classes.
pub fn check_uniform_upper_regular(
    w: &StepGraphon,
    kfn: &TailBoundFn,
    eta: f64,
    budget: usize,
    seed: u64,
) -> RegularityVerdict {
    let m = w.num_classes();
    let excess = |labels: &[usize]| -> f64 {
        let part = Partition::new(labels.to_vec(), w.lengths().to_vec()).expect("labels in range");
        let stepped = w.quotient(&part).expect("partition of grid");
        kfn.entries()
            .iter()
            .map(|&(eps, k)| tail_mass(&stepped, k).unwrap_or(f64::INFINITY) - eps)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let admissible = |labels: &[usize], classes: usize| -> bool {
        let mut weights = vec![0.0; classes];
        for (cell, &c) in labels.iter().enumerate() {
            weights[c] += w.class_length(cell);
        }
        weights.iter().all(|&x| x >= eta - REP_TOL)
    };
    if m <= EXACT_VERTEX_LIMIT {
        let mut worst = f64::NEG_INFINITY;
        let mut violation: Option<(Vec<usize>, f64)> = None;
        for_each_set_partition(m, |labels, classes| {
            if !admissible(labels, classes) {
                return true;
            }
            let e = excess(labels);
            if e > worst {
                worst = e;
            }
            if e > REP_TOL {
                violation = Some((labels.to_vec(), e));
                return false;
            }
            true
        });
        return match violation {
            Some((labels, value)) => RegularityVerdict {
                status: VerdictStatus::Falsified,
                certificate: Some(Falsification::Partition { labels, value }),
                worst_value: value,
            },
            None => RegularityVerdict {
                status: VerdictStatus::VerifiedExact,
                certificate: None,
                worst_value: worst,
            },
        };
    }
    let max_parts = ((1.0 / eta).floor() as usize).min(m).max(1);
    let mut worst = f64::NEG_INFINITY;
    let mut found: Option<(Vec<usize>, f64)> = None;
    for r in 0..budget.max(1) {
        let mut stream = Stream::new(rng::derive(seed, Tag::FalsifyRestart, r as u64));
        let parts = 1 + stream.next_below(max_parts);
        let mut order: Vec<usize> = (0..m).collect();
        stream.shuffle(&mut order);
        let mut labels = vec![0usize; m];
        for (pos, &cell) in order.iter().enumerate() {
            labels[cell] = pos % parts.max(1);
        }
        let compact = Partition::new(labels, w.lengths().to_vec()).expect("labels in range");
        if !admissible(compact.labels(), compact.num_classes()) {
            continue;
        }
        let e = excess(compact.labels());
        if e > worst {
            worst = e;
        }
        if e > REP_TOL {
            found = Some((compact.labels().to_vec(), e));
            break;
        }
    }
    match found {
        Some((labels, value)) => RegularityVerdict {
            status: VerdictStatus::Falsified,
            certificate: Some(Falsification::Partition { labels, value }),
            worst_value: value,
        },
        None => RegularityVerdict {
            status: VerdictStatus::Unfalsified,
            certificate: None,
            worst_value: worst,
        },
    }
}
