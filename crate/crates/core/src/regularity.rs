//! Weak regularity: the L² energy-increment partitioner, equitizing, the
//! Lᵖ truncation variant for 1 < p < 2, the upper-regular variants with
//! η-rounding of cut sets (for graphons and for weighted graphs), and the
//! densify transference map.

use crate::cutmetric::{self, SolveMethod};
use crate::graph::WeightedGraph;
use crate::graphon::{normalize_graph, StepGraphon};
use crate::partition::Partition;
use crate::{max_classes, Error, Result, ABS_TOL};
use serde::Serialize;

const CUT_RESTARTS: usize = 32;
const CUT_SEED: u64 = 0x72656775;
/// Hard backstop on refinement rounds regardless of how large ⌈N⌉ gets.
const ITERATION_BACKSTOP: usize = 1_000_000;

/// Parameters of the upper-regular routines: `N = (6/ε)^{max{2, p/(p−1)}}`
/// governs the iteration budget and part count, and for `p < 2` the loop
/// works on the truncation at `K = C(6/ε)^{1/(p−1)}`.
///
/// `eta` is caller-chosen; [`RegularityParams::guaranteed_eta_graphon`] and
/// [`RegularityParams::guaranteed_eta_graph`] give the levels below which
/// the refinement loop is guaranteed to terminate within its budget
/// (astronomically small for small ε — desk-scale runs pass a larger η and
/// rely on the numeric certification instead).
#[derive(Debug, Clone, Serialize)]
pub struct RegularityParams {
    pub p: f64,
    pub eps: f64,
    pub c: f64,
    pub eta: f64,
}

impl RegularityParams {
    pub fn new(p: f64, eps: f64, c: f64, eta: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be ≥ 1, got {p}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
        }
        if !(c >= 0.0) {
            return Err(Error::InvalidParameter(format!("C must be nonnegative, got {c}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta must lie in (0,1), got {eta}")));
        }
        Ok(RegularityParams { p, eps, c, eta })
    }

    /// Conjugate-style exponent `max{2, p/(p−1)}`.
    fn exponent(&self) -> f64 {
        if self.p <= 1.0 {
            f64::INFINITY
        } else {
            (self.p / (self.p - 1.0)).max(2.0)
        }
    }

    /// `N = (6/ε)^{max{2, p/(p−1)}}`.
    pub fn iteration_exponent(&self) -> f64 {
        (6.0 / self.eps).powf(self.exponent())
    }

    /// `⌈N⌉`, clamped to a practical backstop.
    pub fn iteration_cap(&self) -> usize {
        let n = self.iteration_exponent().ceil();
        if n.is_finite() && n < ITERATION_BACKSTOP as f64 {
            n as usize
        } else {
            ITERATION_BACKSTOP
        }
    }

    /// Truncation level `K = C(6/ε)^{1/(p−1)}`; infinite for `p ≥ 2`
    /// (no truncation needed).
    pub fn truncation_level(&self) -> f64 {
        if self.p >= 2.0 {
            f64::INFINITY
        } else {
            self.c * (6.0 / self.eps).powf(1.0 / (self.p - 1.0))
        }
    }

    /// η below which the graphon routine is guaranteed to succeed:
    /// `4^{−N−1}(ε/160)^{p/(p−1)}`.
    pub fn guaranteed_eta_graphon(&self) -> f64 {
        let n = self.iteration_exponent();
        4f64.powf(-n - 1.0) * (self.eps / 160.0).powf(self.p / (self.p - 1.0))
    }

    /// Graph version: `4^{−N−1}(ε/320)^{p/(p−1)}`.
    pub fn guaranteed_eta_graph(&self) -> f64 {
        let n = self.iteration_exponent();
        4f64.powf(-n - 1.0) * (self.eps / 320.0).powf(self.p / (self.p - 1.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    /// Best cut value found against `W − W_{P_i}`.
    pub witness: f64,
    /// Value retained after η-rounding (upper-regular routines only).
    pub rounded_witness: Option<f64>,
    /// `‖W_{P_{i+1}}‖₂²` after refining.
    pub energy: f64,
}

/// Partition produced by a regularity routine plus the certified cut-norm
/// error and the iteration trace.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub partition: Partition,
    /// Bound on `‖W − W_P‖□`: exact when `certified`, else the best
    /// heuristic estimate.
    pub error_cut: f64,
    pub certified: bool,
    pub iterations: usize,
    /// `‖W_{P_0}‖₂²` before any refinement.
    pub initial_energy: f64,
    pub trace: Vec<TraceStep>,
}

impl RegularityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}

/// Evidence that an input cannot be upper regular at the stated parameters:
/// a partition with all parts ≥ η whose stepped Lᵖ norm exceeds C, when one
/// was found before the iteration budget ran out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityViolation {
    pub partition: Option<Partition>,
    pub worst_value: f64,
    pub iterations: usize,
}

fn check_partition_base(w: &StepGraphon, p: &Partition) -> Result<()> {
    if p.num_cells() != w.num_classes()
        || p.cell_weights()
            .iter()
            .zip(w.lengths())
            .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::PartitionMismatch);
    }
    Ok(())
}

fn energy(w: &StepGraphon, p: &Partition) -> f64 {
    let stepped = w.step(p).expect("partition validated");
    let e = stepped.lp_norm(2.0).expect("p=2 valid");
    e * e
}

/// Weak regularity via L² energy increment: a refinement `Q` of `p0` with
/// `|Q| ≤ 4^{⌈1/ε²⌉}|P₀|` and `‖W − W_Q‖□ ≤ ε‖W‖₂`.
pub fn weak_regularity_l2(w: &StepGraphon, eps: f64, p0: &Partition) -> Result<RegularityReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    check_partition_base(w, p0)?;
    let l2 = w.lp_norm(2.0)?;
    let threshold = eps * l2;
    let cap = ((1.0 / (eps * eps)).ceil() as usize).min(ITERATION_BACKSTOP) + 1;
    let mut partition = p0.clone();
    let mut trace = Vec::new();
    let initial_energy = energy(w, &partition);
    let mut last = None;
    for _ in 0..cap {
        let stepped = w.step(&partition)?;
        let diff = w.sub(&stepped)?;
        let cr = cutmetric::cut_norm_with(&diff, CUT_RESTARTS, CUT_SEED);
        if cr.lower <= threshold {
            last = Some(cr);
            break;
        }
        let next = partition
            .refine_by_subset(&cr.witness.s)?
            .refine_by_subset(&cr.witness.t)?;
        if next == partition {
            // Witness aligned with the partition; its value must be ~0, so
            // treat as converged rather than loop.
            last = Some(cr);
            break;
        }
        partition = next;
        trace.push(TraceStep {
            witness: cr.lower,
            rounded_witness: None,
            energy: energy(w, &partition),
        });
    }
    let cr = match last {
        Some(cr) => cr,
        None => {
            let stepped = w.step(&partition)?;
            cutmetric::cut_norm_with(&w.sub(&stepped)?, CUT_RESTARTS, CUT_SEED)
        }
    };
    let certified = cr.method == SolveMethod::Exact;
    Ok(RegularityReport {
        partition,
        error_cut: if certified { cr.upper } else { cr.lower },
        certified,
        iterations: trace.len(),
        initial_energy,
        trace,
    })
}

/// Output of [`equitize`]: the input graphon re-expressed on the refined
/// grid, the equipartition with exactly `k|P|` parts, the certified error
/// bound, and the per-class splits so callers can refine other graphons on
/// the same grid identically.
#[derive(Debug, Clone)]
pub struct Equitized {
    pub graphon: StepGraphon,
    pub partition: Partition,
    pub bound: f64,
    pub splits: Vec<Vec<f64>>,
}

/// The bound `2‖W−W_Q‖□ + 2‖W‖_p (2|Q|/(k|P|))^{1−1/p}` certified by the
/// equitizing construction.
pub fn equitize_bound(
    w_norm_p: f64,
    err_q_cut: f64,
    q_classes: usize,
    k: usize,
    p_classes: usize,
    p: f64,
) -> f64 {
    2.0 * err_q_cut
        + 2.0 * w_norm_p * (2.0 * q_classes as f64 / (k * p_classes) as f64).powf(1.0 - 1.0 / p)
}

/// Equitize: refine the equipartition `p` into exactly `k|P|` parts of equal
/// measure that agree with `q` except on a small exceptional set, splitting
/// grid classes where exact cuts are needed.
pub fn equitize(
    w: &StepGraphon,
    p: &Partition,
    q: &Partition,
    k: usize,
    p_norm: f64,
) -> Result<Equitized> {
    check_partition_base(w, p)?;
    check_partition_base(w, q)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !q.refines(p) {
        return Err(Error::InvalidParameter("Q must refine P".into()));
    }
    if !p.is_equipartition(1e-9) {
        return Err(Error::InvalidParameter("P must be an equipartition".into()));
    }
    let target = k * p.num_classes();
    let guard = max_classes();
    if target > guard {
        return Err(Error::ResolutionGuard { requested: target, limit: guard });
    }

    // Fragments of each grid class in left-to-right order: (sub-length, cell id).
    let m = w.num_classes();
    let mut class_fragments: Vec<Vec<(f64, usize)>> = vec![Vec::new(); m];
    let mut next_cell = 0usize;

    for pid in 0..p.num_classes() {
        let members = p.class_members(pid);
        let unit = p.class_weight(pid) / k as f64;
        // Group members by their Q class, in first-appearance order.
        let mut subclasses: Vec<(usize, Vec<usize>)> = Vec::new();
        for &cell in &members {
            let qc = q.label(cell);
            match subclasses.iter_mut().find(|(c, _)| *c == qc) {
                Some((_, v)) => v.push(cell),
                None => subclasses.push((qc, vec![cell])),
            }
        }
        // Leftover fragments feeding the remainder cells of this P-part.
        let mut pool: Vec<(usize, f64)> = Vec::new(); // (grid class, length)
        let mut cells_made = 0usize;
        for (_, cells) in &subclasses {
            let measure: f64 = cells.iter().map(|&c| w.class_length(c)).sum();
            let full = (measure / unit + 1e-12).floor() as usize;
            let mut to_fill = full;
            let mut capacity = unit;
            let mut queue: Vec<(usize, f64)> =
                cells.iter().map(|&c| (c, w.class_length(c))).collect();
            queue.reverse(); // pop from the back = take in order
            while let Some((c, len)) = queue.pop() {
                if to_fill == 0 {
                    pool.push((c, len));
                    continue;
                }
                if len <= capacity + 1e-13 {
                    class_fragments[c].push((len, next_cell));
                    capacity -= len;
                    if capacity <= 1e-13 {
                        to_fill -= 1;
                        next_cell += 1;
                        cells_made += 1;
                        capacity = unit;
                    }
                } else {
                    class_fragments[c].push((capacity, next_cell));
                    let rest = len - capacity;
                    to_fill -= 1;
                    next_cell += 1;
                    cells_made += 1;
                    capacity = unit;
                    queue.push((c, rest));
                }
            }
            // A partially filled cell should not occur: `full` counts whole
            // units. Guard against fp drift by folding the shortfall into
            // the pool.
            if to_fill > 0 {
                next_cell += to_fill;
                cells_made += to_fill;
            }
        }
        // Carve the pooled remainders into the remaining cells.
        let remaining = k - cells_made.min(k);
        let mut capacity = unit;
        let mut made = 0usize;
        let mut queue: Vec<(usize, f64)> = pool;
        queue.reverse();
        while let Some((c, len)) = queue.pop() {
            if made == remaining {
                // fp residue: attach to the last cell
                if len > 1e-13 && next_cell > 0 {
                    class_fragments[c].push((len, next_cell - 1));
                }
                continue;
            }
            if len <= capacity + 1e-13 {
                class_fragments[c].push((len, next_cell));
                capacity -= len;
                if capacity <= 1e-13 {
                    made += 1;
                    next_cell += 1;
                    capacity = unit;
                }
            } else {
                class_fragments[c].push((capacity, next_cell));
                queue.push((c, len - capacity));
                made += 1;
                next_cell += 1;
                capacity = unit;
            }
        }
        if made < remaining {
            // The last cell closes on the part boundary.
            if capacity < unit - 1e-13 {
                next_cell += 1;
            }
            next_cell += remaining - made - if capacity < unit - 1e-13 { 1 } else { 0 };
        }
    }

    let splits: Vec<Vec<f64>> = class_fragments
        .iter()
        .map(|frags| frags.iter().map(|&(l, _)| l).collect())
        .collect();
    let graphon = w.refine_classes(&splits)?;
    let labels: Vec<usize> = class_fragments
        .iter()
        .flat_map(|frags| frags.iter().map(|&(_, cell)| cell))
        .collect();
    let partition = Partition::new(labels, graphon.lengths().to_vec())?;

    let err_q = {
        let stepped = w.step(q)?;
        let diff = w.sub(&stepped)?;
        let cr = cutmetric::cut_norm_with(&diff, CUT_RESTARTS, CUT_SEED);
        cr.upper
    };
    let bound = equitize_bound(
        w.lp_norm(p_norm)?,
        err_q,
        q.num_classes(),
        k,
        p.num_classes(),
        p_norm,
    );
    Ok(Equitized { graphon, partition, bound, splits })
}

/// Equitable weak regularity for 1 < p < 2 via truncation at
/// `K = (3/ε)^{1/(p−1)}‖W‖_p`, the equitable L² routine on the bounded part,
/// and the three-term triangle certification.
#[derive(Debug, Clone)]
pub struct EquitableReport {
    /// The input re-expressed on the refined grid.
    pub graphon: StepGraphon,
    pub partition: Partition,
    /// Certified bound on `‖W − W_Q‖□` (target: `ε‖W‖_p`).
    pub error_bound: f64,
    pub certified: bool,
    pub truncation_level: f64,
    pub tail_mass: f64,
    pub l2_iterations: usize,
}

pub fn weak_regularity_lp(
    w: &StepGraphon,
    p: f64,
    eps: f64,
    p0: &Partition,
) -> Result<EquitableReport> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (1,2), got {p}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    check_partition_base(w, p0)?;
    let norm_p = w.lp_norm(p)?;
    if norm_p == 0.0 {
        return Ok(EquitableReport {
            graphon: w.clone(),
            partition: p0.clone(),
            error_bound: 0.0,
            certified: true,
            truncation_level: 0.0,
            tail_mass: 0.0,
            l2_iterations: 0,
        });
    }
    let k_level = (3.0 / eps).powf(1.0 / (p - 1.0)) * norm_p;
    let (bounded, tail) = w.truncate(k_level)?;
    let tail_mass = tail.lp_norm(1.0)?;
    let eps2 = (eps / 3.0).powf(p / (2.0 * (p - 1.0)));
    let l2_report = weak_regularity_l2(&bounded, eps2, p0)?;

    // k from the lemma, capped by the resolution guard.
    let log4_k = 10.0 * (3.0 / eps).powf(p / (p - 1.0));
    let guard = max_classes();
    let k_allowed = guard / p0.num_classes();
    if k_allowed == 0 {
        return Err(Error::ResolutionGuard { requested: p0.num_classes(), limit: guard });
    }
    let (k, capped) = if log4_k <= 52.0 && 4f64.powf(log4_k) <= k_allowed as f64 {
        (4f64.powf(log4_k).ceil() as usize, false)
    } else {
        (k_allowed, true)
    };

    let eq = equitize(&bounded, p0, &l2_report.partition, k, 2.0)?;
    let graphon = w.refine_classes(&eq.splits)?;
    // ‖W − W_Q‖□ ≤ ‖W·1_{>K}‖₁ + ‖W′ − W′_Q‖□ + ‖(W − W′)_Q‖₁, and the
    // stepped tail is again bounded by the tail mass.
    let mut error_bound = 2.0 * tail_mass + eq.bound;
    let mut certified = l2_report.certified;
    // Direct evaluation can only tighten the bound on small grids.
    if graphon.num_classes() <= cutmetric::EXACT_CLASS_LIMIT {
        let stepped = graphon.step(&eq.partition)?;
        let direct = cutmetric::cut_norm_exact(&graphon.sub(&stepped)?)?;
        if direct.upper < error_bound {
            error_bound = direct.upper;
            certified = true;
        }
    }
    if error_bound > eps * norm_p + ABS_TOL && capped {
        return Err(Error::EpsTooSmallForGrid);
    }
    Ok(EquitableReport {
        graphon,
        partition: eq.partition,
        error_bound,
        certified,
        truncation_level: k_level,
        tail_mass,
        l2_iterations: l2_report.iterations,
    })
}

/// Round `subset` (cell indices) against the parts of `p`: intersections of
/// measure < η are deleted and near-full parts are completed, so refining by
/// the result keeps every part of measure ≥ η.
fn round_subset(p: &Partition, subset: &[usize], eta: f64) -> Vec<usize> {
    let mut in_set = vec![false; p.num_cells()];
    for &c in subset {
        in_set[c] = true;
    }
    let mut out = Vec::new();
    for class in 0..p.num_classes() {
        let members = p.class_members(class);
        let m_in: f64 = members
            .iter()
            .filter(|&&c| in_set[c])
            .map(|&c| p.cell_weights()[c])
            .sum();
        let m_out = p.class_weight(class) - m_in;
        // The fp slack keeps intersections of measure exactly η alive.
        if m_in < eta - 1e-12 {
            // delete: contribute nothing
        } else if m_out < eta - 1e-12 {
            out.extend(members); // round up to the whole part
        } else {
            out.extend(members.into_iter().filter(|&c| in_set[c]));
        }
    }
    out
}

fn box_value(diff: &StepGraphon, s: &[usize], t: &[usize]) -> f64 {
    let w = cutmetric::CutWitness { s: s.to_vec(), t: t.to_vec(), value: 0.0, signed: false };
    w.evaluate(diff)
}

/// Weak regularity for `(C,η)`-upper Lᵖ regular graphons: a partition with
/// at most `4^N` parts, each of measure ≥ η, and `‖W − W_P‖□ ≤ Cε`. When the
/// input is not upper regular the loop surfaces a falsification certificate
/// instead.
pub fn weak_regularity_upper(w: &StepGraphon, params: &RegularityParams) -> Result<RegularityReport> {
    let threshold = params.c * params.eps;
    let cap = params.iteration_cap();
    let mut partition = Partition::trivial(w.lengths().to_vec());
    let mut trace = Vec::new();
    let initial_energy = energy(w, &partition);
    let mut worst: Option<(f64, Partition)> = None;
    let mut iterations = 0usize;
    loop {
        let stepped = w.step(&partition)?;
        let diff = w.sub(&stepped)?;
        let cr = cutmetric::cut_norm_with(&diff, CUT_RESTARTS, CUT_SEED);
        if cr.lower <= threshold {
            let certified = cr.method == SolveMethod::Exact;
            return Ok(RegularityReport {
                partition,
                error_cut: if certified { cr.upper } else { cr.lower },
                certified,
                iterations,
                initial_energy,
                trace,
            });
        }
        if iterations >= cap {
            return Err(Error::UpperRegularityViolated(Box::new(RegularityViolation {
                worst_value: worst.as_ref().map(|(v, _)| *v).unwrap_or(f64::NAN),
                partition: worst.map(|(_, p)| p),
                iterations,
            })));
        }
        let s_rounded = round_subset(&partition, &cr.witness.s, params.eta);
        let half = partition.refine_by_subset(&s_rounded)?;
        let t_rounded = round_subset(&half, &cr.witness.t, params.eta);
        let next = half.refine_by_subset(&t_rounded)?;
        let rounded_value = box_value(&diff, &s_rounded, &t_rounded);
        if next == partition {
            // Rounding consumed the witness entirely; no further refinement
            // is possible at this η.
            return Err(Error::UpperRegularityViolated(Box::new(RegularityViolation {
                worst_value: worst.as_ref().map(|(v, _)| *v).unwrap_or(f64::NAN),
                partition: worst.map(|(_, p)| p),
                iterations,
            })));
        }
        partition = next;
        iterations += 1;
        trace.push(TraceStep {
            witness: cr.lower,
            rounded_witness: Some(rounded_value.abs()),
            energy: energy(w, &partition),
        });
        // Every partition in the loop has parts ≥ η, so a stepped norm above
        // C falsifies upper regularity outright.
        if partition.num_classes() >= 2 {
            let norm = w.quotient(&partition)?.lp_norm(params.p)?;
            if norm > params.c * (1.0 + ABS_TOL) + ABS_TOL {
                return Err(Error::UpperRegularityViolated(Box::new(RegularityViolation {
                    partition: Some(partition),
                    worst_value: norm,
                    iterations,
                })));
            }
            if worst.as_ref().map(|(v, _)| norm > *v).unwrap_or(true) {
                worst = Some((norm, partition.clone()));
            }
        }
    }
}

/// Weak regularity for `(C,η)`-upper Lᵖ regular weighted graphs: identical
/// loop on `W^G/‖G‖₁` with all sets vertex subsets.
pub fn weak_regularity_graph(g: &WeightedGraph, params: &RegularityParams) -> Result<RegularityReport> {
    let alpha = g.total_weight();
    for (v, &a) in g.vertex_weights().iter().enumerate() {
        if a > params.eta * alpha {
            return Err(Error::DominantNode { vertex: v });
        }
    }
    let wn = normalize_graph(g)?;
    weak_regularity_upper(&wn, params)
}

/// Densify: the Lᵖ graphon `U = (W^G/‖G‖₁)_P` from the regularity run, with
/// `‖U‖_p ≤ C` and certified `δ□(G/‖G‖₁, U) ≤ Cε`.
pub fn densify(g: &WeightedGraph, params: &RegularityParams) -> Result<(StepGraphon, f64)> {
    let report = weak_regularity_graph(g, params)?;
    let wn = normalize_graph(g)?;
    let u = wn.quotient(&report.partition)?;
    Ok((u, report.error_cut))
}

/// Equitable post-pass: equitize the partition of a finished run into
/// `k` parts and re-certify the error numerically.
pub fn equitize_report(
    w: &StepGraphon,
    report: &RegularityReport,
    k: usize,
    p_norm: f64,
) -> Result<Equitized> {
    let trivial = Partition::trivial(w.lengths().to_vec());
    equitize(w, &trivial, &report.partition, k, p_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{counter_f64, Tag};

    fn random_graphon(classes: usize, scale: f64, seed: u64) -> StepGraphon {
        let mut lengths: Vec<f64> = (0..classes)
            .map(|i| 0.2 + counter_f64(seed, Tag::Trial, i as u64))
            .collect();
        let total: f64 = lengths.iter().sum();
        for l in &mut lengths {
            *l /= total;
        }
        let mut values = vec![vec![0.0; classes]; classes];
        let mut k = classes as u64;
        for i in 0..classes {
            for j in 0..=i {
                let v = scale * (2.0 * counter_f64(seed, Tag::Trial, k) - 1.0);
                values[i][j] = v;
                values[j][i] = v;
                k += 1;
            }
        }
        StepGraphon::new(lengths, values).unwrap()
    }

    fn checkerboard() -> StepGraphon {
        StepGraphon::new(vec![0.5, 0.5], vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn already_stepped_input_returns_p0() {
        let w = random_graphon(4, 1.0, 11);
        let p = Partition::new(vec![0, 0, 1, 1], w.lengths().to_vec()).unwrap();
        let stepped = w.step(&p).unwrap();
        let report = weak_regularity_l2(&stepped, 0.2, &p).unwrap();
        assert_eq!(report.partition, p);
        assert!(report.error_cut < 1e-12);
        assert!(report.certified);
    }

    #[test]
    fn constant_needs_trivial_partition() {
        let w = StepGraphon::new(vec![0.3, 0.7], vec![vec![2.0; 2]; 2]).unwrap();
        let p0 = Partition::trivial(w.lengths().to_vec());
        let report = weak_regularity_l2(&w, 0.2, &p0).unwrap();
        assert_eq!(report.partition.num_classes(), 1);
        assert!(report.error_cut < 1e-12);
    }

    #[test]
    fn checkerboard_one_refinement() {
        let p0 = Partition::trivial(vec![0.5, 0.5]);
        let report = weak_regularity_l2(&checkerboard(), 0.1, &p0).unwrap();
        assert!(report.iterations <= 1);
        assert!(report.error_cut < 1e-12);
    }

    #[test]
    fn l2_bounds_hold_on_random_inputs() {
        for seed in 0..10 {
            let w = random_graphon(6, 1.5, 4600 + seed);
            let p0 = Partition::trivial(w.lengths().to_vec());
            let eps = 0.3;
            let report = weak_regularity_l2(&w, eps, &p0).unwrap();
            let l2 = w.lp_norm(2.0).unwrap();
            assert!(report.certified);
            assert!(report.error_cut <= eps * l2 + 1e-12);
            let bound = 4f64.powi((1.0 / (eps * eps)).ceil() as i32);
            assert!((report.partition.num_classes() as f64) <= bound);
            // Energy increments beat the witness value squared.
            let mut prev = report.initial_energy;
            for step in &report.trace {
                assert!(step.energy - prev > step.witness * step.witness - 1e-9);
                prev = step.energy;
            }
        }
    }

    #[test]
    fn equitize_identity_case() {
        let w = random_graphon(4, 1.0, 21);
        // A 2-part equipartition of a 4-class graphon needs equal halves.
        let w = {
            let mut lengths = w.lengths().to_vec();
            lengths[0] = 0.25;
            lengths[1] = 0.25;
            lengths[2] = 0.25;
            lengths[3] = 0.25;
            StepGraphon::from_cell_averages(
                lengths,
                (0..4)
                    .map(|i| (0..4).map(|j| w.value(i, j)).collect())
                    .collect(),
            )
            .unwrap()
        };
        let p = Partition::new(vec![0, 0, 1, 1], w.lengths().to_vec()).unwrap();
        let eq = equitize(&w, &p, &p, 1, 2.0).unwrap();
        assert_eq!(eq.partition.num_classes(), 2);
        assert!(eq.partition.is_equipartition(1e-12));
    }

    #[test]
    fn equitize_bound_formula() {
        let b = equitize_bound(1.0, 0.0, 8, 64, 1, 2.0);
        assert!((b - 1.0).abs() < 1e-12, "2·(16/64)^(1/2) = 1, got {b}");
    }

    #[test]
    fn equitize_exact_part_counts() {
        for seed in 0..5 {
            let w = random_graphon(5, 1.0, 900 + seed);
            let trivial = Partition::trivial(w.lengths().to_vec());
            let q = Partition::new(vec![0, 1, 0, 2, 1], w.lengths().to_vec()).unwrap();
            let k = 7;
            let eq = equitize(&w, &trivial, &q, k, 2.0).unwrap();
            assert_eq!(eq.partition.num_classes(), k);
            assert!(eq.partition.is_equipartition(1e-9));
            // The refined graphon is the same function.
            assert!((eq.graphon.mean() - w.mean()).abs() < 1e-12);
            assert!(
                (eq.graphon.lp_norm(2.0).unwrap() - w.lp_norm(2.0).unwrap()).abs() < 1e-12
            );
            // The construction certifies its own bound.
            if eq.graphon.num_classes() <= cutmetric::EXACT_CLASS_LIMIT {
                let stepped = eq.graphon.step(&eq.partition).unwrap();
                let err = cutmetric::cut_norm_exact(&eq.graphon.sub(&stepped).unwrap())
                    .unwrap()
                    .lower;
                assert!(err <= eq.bound + 1e-9, "seed {seed}: {err} > {}", eq.bound);
            }
        }
    }

    #[test]
    fn equitize_respects_guard() {
        let w = random_graphon(3, 1.0, 33);
        let trivial = Partition::trivial(w.lengths().to_vec());
        let res = equitize(&w, &trivial, &trivial, max_classes() + 1, 2.0);
        assert!(matches!(res, Err(Error::ResolutionGuard { .. })));
    }

    #[test]
    fn lp_zero_graphon_trivial() {
        let w = StepGraphon::new(vec![0.5, 0.5], vec![vec![0.0; 2]; 2]).unwrap();
        let p0 = Partition::trivial(w.lengths().to_vec());
        let rep = weak_regularity_lp(&w, 1.5, 0.5, &p0).unwrap();
        assert_eq!(rep.error_bound, 0.0);
    }

    #[test]
    fn lp_bounded_input_behaves_like_l2() {
        // ‖W‖_∞ ≤ K so truncation is the identity.
        let w = checkerboard();
        let p0 = Partition::trivial(w.lengths().to_vec());
        let rep = weak_regularity_lp(&w, 1.5, 0.9, &p0).unwrap();
        assert_eq!(rep.tail_mass, 0.0);
        assert!(rep.truncation_level >= w.lp_norm(f64::INFINITY).unwrap());
        assert!(rep.error_bound <= 0.9 * w.lp_norm(1.5).unwrap() + 1e-9);
    }

    #[test]
    fn lp_truncation_tail_obeys_proof_bound() {
        let w = StepGraphon::new(vec![0.5, 0.5], vec![vec![4.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let (p, eps) = (1.5, 0.9);
        let norm_p = w.lp_norm(p).unwrap();
        let k = (3.0f64 / eps).powf(1.0 / (p - 1.0)) * norm_p;
        let (_, tail) = w.truncate(k).unwrap();
        assert!(tail.lp_norm(1.0).unwrap() <= (eps / 3.0) * norm_p + 1e-12);
        let p0 = Partition::trivial(w.lengths().to_vec());
        let rep = weak_regularity_lp(&w, p, eps, &p0).unwrap();
        assert!(rep.error_bound <= eps * norm_p + 1e-9);
    }

    #[test]
    fn upper_regular_constant() {
        let w = StepGraphon::constant(0.8);
        let params = RegularityParams::new(2.0, 0.5, 1.0, 0.05).unwrap();
        let rep = weak_regularity_upper(&w, &params).unwrap();
        assert_eq!(rep.partition.num_classes(), 1);
        assert!(rep.error_cut < 1e-12);
    }

    #[test]
    fn upper_regular_already_stepped() {
        let w = random_graphon(4, 0.5, 77).shift(1.0);
        let p = Partition::new(vec![0, 0, 1, 1], w.lengths().to_vec()).unwrap();
        let stepped = w.step(&p).unwrap();
        let params = RegularityParams::new(2.0, 0.3, 3.0, 0.05).unwrap();
        let rep = weak_regularity_upper(&stepped, &params).unwrap();
        assert!(rep.error_cut <= params.c * params.eps + 1e-9);
        assert!(rep.partition.min_class_weight() >= params.eta - 1e-12);
    }

    #[test]
    fn rounding_bound_matches_theorem_constants() {
        // With η at the guarantee level, λ(S△S′) ≤ 2·4^N·η keeps the perturbation
        // 40C(2·4^N η)^{1−1/p} below Cε/4. The 4^N factors cancel against
        // η = 4^{−N−1}(ε/160)^{p/(p−1)}, so evaluate the cancelled form
        // (4^N alone overflows for small ε).
        for &(p, eps) in &[(2.0, 0.5), (3.0, 0.4), (1.5, 0.6)] {
            let params = RegularityParams::new(p, eps, 1.0, 1e-12).unwrap();
            let delta = 0.5 * (eps / 160.0_f64).powf(p / (p - 1.0));
            let perturbation = 40.0 * params.c * delta.powf(1.0 - 1.0 / p);
            assert!(
                perturbation <= params.c * eps / 4.0 + 1e-15,
                "p={p}, eps={eps}: {perturbation}"
            );
            // And where 4^{−N−1} is still representable the direct form agrees.
            if params.iteration_exponent() < 400.0 {
                let eta = params.guaranteed_eta_graphon();
                let direct = 2.0 * 4f64.powf(params.iteration_exponent()) * eta;
                assert!((direct - delta).abs() <= 1e-9 * delta.max(1e-300));
            }
        }
    }

    #[test]
    fn graph_regularity_two_blocks() {
        // Complete balanced bipartite: refining by the first witness lands on
        // the bipartition, which reproduces the block structure exactly.
        let n = 8;
        let edges = (0..n / 2).flat_map(|i| (n / 2..n).map(move |j| (i, j)));
        let g = WeightedGraph::simple(n, edges).unwrap();
        let params = RegularityParams::new(2.0, 0.1, 2.0, 0.15).unwrap();
        let rep = weak_regularity_graph(&g, &params).unwrap();
        assert!(rep.certified);
        assert!(rep.error_cut < 1e-12, "bipartition is exact, got {}", rep.error_cut);
        assert_eq!(rep.partition.num_classes(), 2);
    }

    #[test]
    fn graph_regularity_flat_graph_trivial() {
        let g = WeightedGraph::new(
            vec![1.0; 6],
            (0..6).flat_map(|i| (i..6).map(move |j| (i, j, 0.7))),
        )
        .unwrap();
        let params = RegularityParams::new(2.0, 0.4, 1.5, 0.2).unwrap();
        let rep = weak_regularity_graph(&g, &params).unwrap();
        assert_eq!(rep.partition.num_classes(), 1);
        assert!(rep.error_cut < 1e-12);
    }

    #[test]
    fn dominant_node_rejected() {
        let g = WeightedGraph::new(vec![10.0, 1.0], [(0, 1, 1.0)]).unwrap();
        let params = RegularityParams::new(2.0, 0.3, 1.0, 0.5).unwrap();
        assert!(matches!(
            weak_regularity_graph(&g, &params),
            Err(Error::DominantNode { vertex: 0 })
        ));
    }

    #[test]
    fn densify_two_cliques() {
        // Two disjoint K₄'s: exact 2-block structure.
        let mut edges = Vec::new();
        for base in [0usize, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        let g = WeightedGraph::simple(8, edges).unwrap();
        let params = RegularityParams::new(2.0, 0.08, 2.5, 0.15).unwrap();
        let (u, err) = densify(&g, &params).unwrap();
        assert!(err <= params.c * params.eps + 1e-9);
        assert!(u.lp_norm(params.p).unwrap() <= params.c + 1e-9);
        // The quotient recovers the two clique blocks; the residual error is
        // only the zero diagonal of the embedded simple graph.
        assert_eq!(u.num_classes(), 2);
        assert!(err <= 0.1, "got {err}");
    }

    #[test]
    fn params_validation() {
        assert!(RegularityParams::new(2.0, 1.5, 1.0, 0.1).is_err());
        assert!(RegularityParams::new(0.5, 0.5, 1.0, 0.1).is_err());
        assert!(RegularityParams::new(2.0, 0.5, 1.0, 0.0).is_err());
        let p = RegularityParams::new(2.0, 0.5, 1.0, 0.1).unwrap();
        assert!((p.iteration_exponent() - 144.0).abs() < 1e-9);
        assert_eq!(p.iteration_cap(), 144);
        assert!(p.truncation_level().is_infinite());
        let p = RegularityParams::new(1.5, 0.5, 2.0, 0.1).unwrap();
        assert!((p.truncation_level() - 2.0 * 144.0).abs() < 1e-9);
    }
}
