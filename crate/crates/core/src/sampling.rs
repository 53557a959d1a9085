//! W-random weighted graphs `H(n,W)`, sparsification `G(H,ρ)`, sparse
//! W-random graphs `G(n,W,ρ)`, the power-law configuration model, the
//! no-limit example families, and the Chernoff tail oracle.
//!
//! All randomness is counter-based (see [`crate::rng`]): coordinates come
//! from `(seed, Coord, i)` and edge coins from `(seed, EdgeCoin, pair)`, so
//! growing `n` extends the same i.i.d. sequence without resampling.

use crate::graph::WeightedGraph;
use crate::graphon::{embed_graph, StepGraphon};
use crate::rng::{self, Tag};
use crate::{cutmetric, Error, Result, REP_TOL};
use serde::Serialize;

/// Vertex-count guard for materialized families.
pub const SIZE_GUARD: usize = 1 << 20;

/// Controls for the CLI-facing samplers.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub keep_coords: bool,
}

impl SamplerConfig {
    pub fn new(n: usize, rho: f64, seed: u64, keep_coords: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0,1], got {rho}")));
        }
        Ok(SamplerConfig { n, rho, seed, keep_coords })
    }
}

fn pair_index(n: usize, i: usize, j: usize) -> u64 {
    (i as u64) * (n as u64) + j as u64
}

/// `H(n,W)`: i.i.d. uniform coordinates (sorted ascending), unit vertex
/// weights, edge weight `W(x_i,x_j)` for `i ≠ j`, no loops.
pub fn sample_h(n: usize, w: &StepGraphon, seed: u64) -> Result<WeightedGraph> {
    Ok(sample_h_with_coords(n, w, seed)?.0)
}

pub fn sample_h_with_coords(n: usize, w: &StepGraphon, seed: u64) -> Result<(WeightedGraph, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut xs: Vec<f64> = (0..n).map(|i| rng::counter_f64(seed, Tag::Coord, i as u64)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cum = w.cumulative();
    let classes: Vec<usize> = xs.iter().map(|&x| StepGraphon::class_of(&cum, x)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let beta = w.value(classes[i], classes[j]);
            if beta != 0.0 {
                edges.push((i, j, beta));
            }
        }
    }
    Ok((WeightedGraph::new(vec![1.0; n], edges)?, xs))
}

/// `G(H,ρ)`: each edge kept independently with probability `min(ρ|β|,1)`,
/// weight `±1` by the sign of `β`. Simple when all weights are nonnegative.
pub fn sparsify(h: &WeightedGraph, rho: f64, seed: u64) -> Result<WeightedGraph> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if h.vertex_weights().iter().any(|&a| a != 1.0) {
        return Err(Error::InvalidParameter("sparsify needs unit vertex weights".into()));
    }
    if h.edges().iter().any(|&(i, j, _)| i == j) {
        return Err(Error::InvalidParameter("sparsify needs a loopless graph".into()));
    }
    let n = h.vertex_count();
    let nonnegative = h.edges().iter().all(|&(_, _, b)| b >= 0.0);
    let mut edges = Vec::new();
    for &(i, j, beta) in h.edges() {
        let p = (rho * beta.abs()).min(1.0);
        let coin = rng::counter_f64(seed, Tag::EdgeCoin, pair_index(n, i as usize, j as usize));
        if coin < p {
            edges.push((i as usize, j as usize, beta.signum()));
        }
    }
    if nonnegative {
        WeightedGraph::simple(n, edges.into_iter().map(|(i, j, _)| (i, j)))
    } else {
        WeightedGraph::new(vec![1.0; n], edges)
    }
}

/// `G(n,W,ρ) = G(H(n,W), ρ)` with an edge-coin seed derived from `seed`;
/// vertex order matches the `H` sample.
pub fn sample_g(n: usize, w: &StepGraphon, rho: f64, seed: u64) -> Result<WeightedGraph> {
    let h = sample_h(n, w, seed)?;
    sparsify(&h, rho, rng::derive(seed, Tag::Derive, 1))
}

/// Power-law configuration model: simple graph on `[n]` with independent
/// edges, `P(ij) = min(1, n^β (ij)^{−α})` for 1-based labels.
pub fn power_law_graph(n: usize, alpha: f64, beta: f64, seed: u64) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(beta >= 0.0 && beta < 2.0 * alpha) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0, 2·alpha), got {beta}"
        )));
    }
    let boost = (n as f64).powf(beta);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = (boost * (((i + 1) * (j + 1)) as f64).powf(-alpha)).min(1.0);
            if rng::counter_f64(seed, Tag::PowerLaw, pair_index(n, i, j)) < p {
                edges.push((i, j));
            }
        }
    }
    WeightedGraph::simple(n, edges)
}

/// Expected edge count `Σ_{i<j} min(1, n^β (ij)^{−α})` of the power-law model.
pub fn power_law_expected_edges(n: usize, alpha: f64, beta: f64) -> f64 {
    let boost = (n as f64).powf(beta);
    let mut sum = 0.0;
    for i in 1..=n {
        for j in i + 1..=n {
            sum += (boost * ((i * j) as f64).powf(-alpha)).min(1.0);
        }
    }
    sum
}

/// Step approximation of `W(x,y) = (xy)^{−α}` on a grid×grid equipartition
/// with exact per-cell averages (`∫ x^{−α} = (b^{1−α}−a^{1−α})/(1−α)`).
pub fn power_law_graphon(alpha: f64, grid: usize) -> Result<StepGraphon> {
    if !(alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be below 1 for an integrable graphon, got {alpha}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid must have at least one cell".into()));
    }
    let h = 1.0 / grid as f64;
    let marginal: Vec<f64> = (0..grid)
        .map(|i| {
            let a = i as f64 * h;
            let b = (i + 1) as f64 * h;
            (b.powf(1.0 - alpha) - a.powf(1.0 - alpha)) / ((1.0 - alpha) * h)
        })
        .collect();
    let values: Vec<Vec<f64>> = (0..grid)
        .map(|i| (0..grid).map(|j| marginal[i] * marginal[j]).collect())
        .collect();
    StepGraphon::new(vec![h; grid], values)
}

/// The no-Cauchy-subsequence family: a single clique on `idx` vertices inside
/// `idx·2^idx` vertices, so `‖G‖₁ = 2^{−2·idx}(idx−1)/idx` and distinct
/// members stay ≥ 1/2 apart in normalized cut distance.
pub fn clique_sequence(idx: usize) -> Result<WeightedGraph> {
    if idx < 2 {
        return Err(Error::InvalidParameter("idx must be at least 2".into()));
    }
    let total = idx
        .checked_shl(idx as u32)
        .filter(|&t| t <= SIZE_GUARD)
        .ok_or(Error::SizeGuard { size: usize::MAX, limit: SIZE_GUARD })?;
    if total > SIZE_GUARD {
        return Err(Error::SizeGuard { size: total, limit: SIZE_GUARD });
    }
    let edges = (0..idx).flat_map(|i| (i + 1..idx).map(move |j| (i, j)));
    WeightedGraph::simple(total, edges)
}

/// Tensor product `G × H`: vertices `V(G)×V(H)`, edges `(u,i)(v,j)` whenever
/// `uv ∈ E(G)` and `ij ∈ E(H)`.
pub fn tensor_product(g: &WeightedGraph, h: &WeightedGraph) -> Result<WeightedGraph> {
    let (n, m) = (g.vertex_count(), h.vertex_count());
    let total = n.checked_mul(m).ok_or(Error::SizeGuard { size: usize::MAX, limit: SIZE_GUARD })?;
    if total > SIZE_GUARD {
        return Err(Error::SizeGuard { size: total, limit: SIZE_GUARD });
    }
    let mut edges = Vec::with_capacity(2 * g.edge_count() * h.edge_count());
    for &(u, v, bg) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        for &(i, j, bh) in h.edges() {
            let (i, j) = (i as usize, j as usize);
            edges.push((u * m + i, v * m + j, bg * bh));
            if i != j && u != v {
                edges.push((u * m + j, v * m + i, bg * bh));
            }
        }
    }
    WeightedGraph::simple(total, edges.into_iter().map(|(a, b, _)| (a, b)))
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingOptions {
    /// Vertex count of the quasirandom factors (exact cut-norm certification
    /// up to [`cutmetric::EXACT_CLASS_LIMIT`], spectral certification above).
    pub quasirandom_vertices: usize,
    pub max_retries: usize,
}

impl Default for DoublingOptions {
    fn default() -> Self {
        DoublingOptions { quasirandom_vertices: 32, max_retries: 100 }
    }
}

/// Per-step certificates of the doubling construction.
#[derive(Debug, Clone, Serialize)]
pub struct DoublingStep {
    /// Target `ε_n = 4^{−n}`.
    pub eps: f64,
    /// Certified upper bound on `‖W^{H_n} − 1/2‖□` of the accepted factor.
    pub certified_cut: f64,
    /// Whether the certification was by exact enumeration.
    pub exact: bool,
    pub retries: usize,
    /// `‖G_{n+1}‖₁/‖G_n‖₁ ∈ [1/2 − ε_n, 1/2 + ε_n]`.
    pub density_ratio: f64,
    /// Certified bound on `δ□(G_{n+1}/‖G_{n+1}‖₁, G_n/‖G_n‖₁)`.
    pub distance_bound: f64,
}

#[derive(Debug, Clone)]
pub struct DoublingFamily {
    pub graphs: Vec<WeightedGraph>,
    pub steps: Vec<DoublingStep>,
}

/// The Cauchy-but-no-limit family: `G₁` is a single edge and `G_{n+1} =
/// G_n × H_n` with `H_n` an Erdős–Rényi(1/2) factor accepted only once
/// `‖W^{H_n} − 1/2‖□ ≤ 4^{−n}` is certified.
pub fn doubling_sequence(steps: usize, seed: u64) -> Result<Vec<WeightedGraph>> {
    Ok(doubling_sequence_with(steps, seed, &DoublingOptions::default())?.graphs)
}

pub fn doubling_sequence_with(
    steps: usize,
    seed: u64,
    opts: &DoublingOptions,
) -> Result<DoublingFamily> {
    if steps == 0 || steps > 6 {
        return Err(Error::InvalidParameter(format!("steps must lie in 1..=6, got {steps}")));
    }
    let mut graphs = vec![WeightedGraph::simple(2, [(0, 1)])?];
    let mut records = Vec::new();
    for n in 1..steps {
        let eps = 4f64.powi(-(n as i32));
        let hsize = opts.quasirandom_vertices;
        let mut accepted = None;
        for attempt in 0..opts.max_retries {
            let hseed = rng::derive(seed, Tag::Doubling, ((n as u64) << 32) | attempt as u64);
            let mut edges = Vec::new();
            for i in 0..hsize {
                for j in i + 1..hsize {
                    if rng::counter_f64(hseed, Tag::EdgeCoin, pair_index(hsize, i, j)) < 0.5 {
                        edges.push((i, j));
                    }
                }
            }
            let h = WeightedGraph::simple(hsize, edges)?;
            let centered = embed_graph(&h)?.shift(-0.5);
            let (bound, exact) = if hsize <= cutmetric::EXACT_CLASS_LIMIT {
                (cutmetric::cut_norm_exact(&centered)?.upper, true)
            } else {
                (spectral_cut_bound(&centered), false)
            };
            if bound <= eps {
                accepted = Some((h, bound, exact, attempt + 1));
                break;
            }
        }
        let Some((h, certified_cut, exact, retries)) = accepted else {
            return Err(Error::RetryCapExceeded);
        };
        let prev = graphs.last().unwrap();
        let next = tensor_product(prev, &h)?;
        let b = prev.lp_norm(1.0)?;
        let a = next.lp_norm(1.0)?;
        let density_ratio = a / b;
        // δ(G_{n+1}/a, G_n/b) ≤ q/a + |b/(2a) − 1| on the natural overlay.
        let distance_bound = certified_cut * b / a + (b / (2.0 * a) - 1.0).abs();
        records.push(DoublingStep {
            eps,
            certified_cut,
            exact,
            retries,
            density_ratio,
            distance_bound,
        });
        graphs.push(next);
    }
    Ok(DoublingFamily { graphs, steps: records })
}

/// Certified bound on `‖A‖□` for a symmetric step matrix on an equal grid:
/// `max_{S,T}|⟨A,1_{S×T}⟩| ≤ λ_max(A)·√(λ(S)λ(T)) ≤ θ/h` where `θ ≥ |λ|_max`
/// is certified by Cholesky positive-definiteness of `θI ± A`.
fn spectral_cut_bound(centered: &StepGraphon) -> f64 {
    const SPECTRAL_SEED: u64 = 0x73706563;
    let h = centered.num_classes();
    let a: Vec<f64> = centered.values_flat().to_vec();
    // Power iteration for a starting estimate of the spectral radius.
    let mut v: Vec<f64> = (0..h)
        .map(|i| rng::counter_f64(SPECTRAL_SEED, Tag::Derive, i as u64) - 0.5)
        .collect();
    let mut est = 1.0f64;
    for _ in 0..120 {
        let mut next = vec![0.0; h];
        for i in 0..h {
            let row = &a[i * h..(i + 1) * h];
            let mut acc = 0.0;
            for j in 0..h {
                acc += row[j] * v[j];
            }
            next[i] = acc;
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        est = norm;
        for x in &mut next {
            *x /= norm;
        }
        v = next;
    }
    let mut theta = est * (1.0 + 1e-6) + 1e-9;
    for _ in 0..200 {
        if psd(&a, h, theta, 1.0) && psd(&a, h, theta, -1.0) {
            return theta / h as f64;
        }
        theta *= 1.02;
    }
    // Gershgorin fallback (always valid for symmetric matrices).
    let gersh = (0..h)
        .map(|i| (0..h).map(|j| a[i * h + j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    gersh / h as f64
}

/// Cholesky success of `θI + sign·A`.
fn psd(a: &[f64], n: usize, theta: f64, sign: f64) -> bool {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = sign * a[i * n + j] + if i == j { theta } else { 0.0 };
        }
    }
    for k in 0..n {
        let mut d = m[k * n + k];
        for t in 0..k {
            d -= m[k * n + t] * m[k * n + t];
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        m[k * n + k] = d;
        for i in k + 1..n {
            let mut s = m[i * n + k];
            for t in 0..k {
                s -= m[i * n + t] * m[k * n + t];
            }
            m[i * n + k] = s / d;
        }
    }
    true
}

/// Parameters of the signed-Bernoulli Chernoff bound: `X = Σ ±Bernoulli(p_i)`,
/// `q = Σ p_i`, deviation `λ > 0`.
#[derive(Debug, Clone)]
pub struct ChernoffParams {
    pub probs: Vec<f64>,
    pub signs: Vec<i8>,
    pub lam: f64,
}

impl ChernoffParams {
    pub fn new(probs: Vec<f64>, signs: Vec<i8>, lam: f64) -> Result<Self> {
        if probs.len() != signs.len() {
            return Err(Error::InvalidParameter("probs and signs must align".into()));
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter("probabilities must lie in [0,1]".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be ±1".into()));
        }
        if !(lam > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lam}")));
        }
        Ok(ChernoffParams { probs, signs, lam })
    }

    pub fn q(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().zip(&self.signs).map(|(&p, &s)| p * s as f64).sum()
    }
}

/// `P(|X − 𝔼X| ≥ λq) ≤ 2exp(−λ²q/3)` for `λ ≤ 1`, `2exp(−λq/3)` for `λ > 1`.
pub fn chernoff_bound(params: &ChernoffParams) -> f64 {
    let q = params.q();
    let lam = params.lam;
    if lam <= 1.0 {
        2.0 * (-lam * lam * q / 3.0).exp()
    } else {
        2.0 * (-lam * q / 3.0).exp()
    }
}

/// Empirical tail frequency `P(|X − 𝔼X| ≥ λq)` over Monte-Carlo draws.
pub fn chernoff_empirical_tail(params: &ChernoffParams, draws: usize, seed: u64) -> f64 {
    let q = params.q();
    let mean = params.mean();
    let n = params.probs.len();
    let mut hits = 0usize;
    for t in 0..draws {
        let mut x = 0.0;
        for i in 0..n {
            let coin = rng::counter_f64(seed, Tag::Chernoff, (t * n + i) as u64);
            if coin < params.probs[i] {
                x += params.signs[i] as f64;
            }
        }
        if (x - mean).abs() >= params.lam * q - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// Monte-Carlo check of the sparsification concentration bound
/// (`ρ = 1` setting): empirical frequency of `d□(G(H),H) > ε‖H‖₁` against
/// `2^{n+1}·exp(−min{ε,ε²}‖H‖₁n²/24)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub empirical_rate: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub trials: usize,
}

pub fn sparsify_concentration_check(
    h: &WeightedGraph,
    rho: f64,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if (rho - 1.0).abs() > REP_TOL {
        return Err(Error::InvalidParameter(
            "the concentration lemma is stated for rho = 1".into(),
        ));
    }
    if h.lp_norm(f64::INFINITY)? > 1.0 + REP_TOL {
        return Err(Error::InvalidParameter("edge weights must lie in [−1,1]".into()));
    }
    let n = h.vertex_count();
    if n > cutmetric::EXACT_CLASS_LIMIT {
        return Err(Error::TooManyClasses { classes: n, limit: cutmetric::EXACT_CLASS_LIMIT });
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let l1 = h.lp_norm(1.0)?;
    let bound = 2f64.powi(n as i32 + 1)
        * (-(eps.min(eps * eps)) * l1 * (n * n) as f64 / 24.0).exp();
    let wh = embed_graph(h)?;
    let mut failures = 0usize;
    for t in 0..trials {
        let g = sparsify(h, 1.0, rng::derive(seed, Tag::Trial, t as u64))?;
        let diff = embed_graph(&g)?.sub(&wh)?;
        let d = cutmetric::cut_norm_exact(&diff)?.lower;
        if d > eps * l1 {
            failures += 1;
        }
    }
    Ok(ConcentrationReport {
        empirical_rate: failures as f64 / trials.max(1) as f64,
        bound,
        vacuous: bound >= 1.0,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_block() -> StepGraphon {
        StepGraphon::new(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.6]]).unwrap()
    }

    #[test]
    fn constant_graphon_gives_constant_weights() {
        let w = StepGraphon::constant(0.7);
        for seed in [1u64, 99] {
            let h = sample_h(5, &w, seed).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let expect = if i == j { 0.0 } else { 0.7 };
                    assert_eq!(h.beta(i, j), expect);
                }
            }
        }
    }

    #[test]
    fn single_vertex_sample_has_no_edges() {
        let h = sample_h(1, &two_block(), 3).unwrap();
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn coordinates_are_sorted_and_extend() {
        let (_, xs_small) = sample_h_with_coords(50, &two_block(), 11).unwrap();
        let (_, xs_big) = sample_h_with_coords(100, &two_block(), 11).unwrap();
        let mut sorted = xs_small.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(xs_small, sorted);
        // The first 50 raw draws reappear among the first 100.
        for x in &xs_small {
            assert!(xs_big.contains(x));
        }
    }

    #[test]
    fn block_membership_frequency() {
        // With equal-length blocks, the latent pair lands in the off-diagonal
        // block about half the time.
        let w = StepGraphon::new(vec![0.5, 0.5], vec![vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let n = 2000;
        let h = sample_h(n, &w, 4242).unwrap();
        let mut cross = 0usize;
        let mut total = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                total += 1;
                if h.beta(i, j) == 2.0 {
                    cross += 1;
                }
            }
        }
        let frac = cross as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.05, "got {frac}");
    }

    #[test]
    fn hoeffding_u_statistic_concentrates() {
        // (1/C(n,2)) Σ_{i<j} W(x_i,x_j) → 𝔼W; deviation < 0.05 at n = 2000
        // in at least 9 of 10 seeds.
        let w = two_block();
        let expect = w.mean();
        let n = 2000usize;
        let mut good = 0;
        for seed in 0..10u64 {
            let h = sample_h(n, &w, seed).unwrap();
            let sum: f64 = h.edges().iter().map(|&(_, _, b)| b).sum();
            let avg = sum / (n * (n - 1) / 2) as f64;
            if (avg - expect).abs() < 0.05 {
                good += 1;
            }
        }
        assert!(good >= 9, "only {good}/10 seeds within 0.05");
    }

    #[test]
    fn sparsify_deterministic_when_probabilities_saturate() {
        let h = WeightedGraph::new(vec![1.0; 3], [(0, 1, 2.0), (1, 2, -3.0)]).unwrap();
        let g = sparsify(&h, 1.0, 5).unwrap();
        assert_eq!(g.beta(0, 1), 1.0);
        assert_eq!(g.beta(1, 2), -1.0);
    }

    #[test]
    fn sparsify_empty_stays_empty() {
        let h = WeightedGraph::simple(4, []).unwrap();
        assert_eq!(sparsify(&h, 0.5, 9).unwrap().edge_count(), 0);
    }

    #[test]
    fn sparsify_expected_edge_count() {
        let h = sample_h(24, &two_block(), 7).unwrap();
        let rho = 0.8;
        let expected: f64 =
            h.edges().iter().map(|&(_, _, b)| (rho * b.abs()).min(1.0)).sum();
        let trials = 1000;
        let mut total = 0usize;
        let mut var = 0.0;
        for t in 0..trials {
            total += sparsify(&h, rho, rng::derive(99, Tag::Trial, t)).unwrap().edge_count();
        }
        for &(_, _, b) in h.edges() {
            let p = (rho * b.abs()).min(1.0);
            var += p * (1.0 - p);
        }
        let mean = total as f64 / trials as f64;
        let sigma = (var / trials as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * sigma.max(1e-9), "{mean} vs {expected}");
    }

    #[test]
    fn sample_g_with_unit_density_is_exchangeable() {
        let w = StepGraphon::new(vec![0.5, 0.5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let g = sample_g(40, &w, 1.0, 17).unwrap();
        assert!(g.is_simple());
        // Every present edge has weight 1 and comes from the W = 1 block.
        for &(_, _, b) in g.edges() {
            assert_eq!(b, 1.0);
        }
    }

    #[test]
    fn sparse_samples_have_growing_average_degree() {
        // With ρ_n = n^{-1/2} (so nρ_n → ∞), the average degree of
        // G(n, W, ρ_n) grows along n.
        let w = two_block();
        let mut prev = 0.0;
        for n in [200usize, 400, 800, 1600] {
            let rho = 1.0 / (n as f64).sqrt();
            let g = sample_g(n, &w, rho, 5).unwrap();
            let avg_degree = 2.0 * g.edge_count() as f64 / n as f64;
            assert!(avg_degree > prev, "n={n}: {avg_degree} ≤ {prev}");
            prev = avg_degree;
        }
    }

    #[test]
    fn power_law_near_complete_for_tiny_alpha() {
        let g = power_law_graph(30, 0.01, 0.0, 3).unwrap();
        let complete = 30 * 29 / 2;
        assert!(g.edge_count() as f64 > 0.9 * complete as f64);
    }

    #[test]
    fn power_law_expected_edges_within_3_sigma() {
        let (n, alpha, beta) = (500usize, 0.5, 0.5);
        let expected = power_law_expected_edges(n, alpha, beta);
        // Variance of a sum of independent indicators is bounded by the mean.
        let trials = 200;
        let mut total = 0usize;
        for t in 0..trials {
            total += power_law_graph(n, alpha, beta, rng::derive(1000, Tag::Trial, t))
                .unwrap()
                .edge_count();
        }
        let mean = total as f64 / trials as f64;
        let sigma = (expected / trials as f64).sqrt();
        assert!((mean - expected).abs() <= 3.0 * sigma, "{mean} vs {expected}");
    }

    #[test]
    fn power_law_graphon_closed_forms() {
        let w = power_law_graphon(0.5, 1).unwrap();
        assert!((w.value(0, 0) - 4.0).abs() < 1e-12);
        for grid in [1usize, 4, 16, 64] {
            let w = power_law_graphon(0.5, grid).unwrap();
            assert!((w.lp_norm(1.0).unwrap() - 4.0).abs() < 1e-9, "grid {grid}");
        }
        assert!(power_law_graphon(1.0, 4).is_err());
    }

    #[test]
    fn power_law_graphon_lp_divergence_regime() {
        // ‖W‖_p diverges under refinement iff αp ≥ 1: for α = 1/2, p = 3 the
        // grid norms grow without saturating.
        let mut last = 0.0;
        for grid in [4usize, 16, 64, 256] {
            let w = power_law_graphon(0.5, grid).unwrap();
            let norm = w.lp_norm(3.0).unwrap();
            assert!(norm > last, "grid {grid}: {norm} ≤ {last}");
            last = norm;
        }
        // While the L¹-regime norm stays bounded (αp < 1): p = 1.5.
        let coarse = power_law_graphon(0.5, 16).unwrap().lp_norm(1.5).unwrap();
        let fine = power_law_graphon(0.5, 256).unwrap().lp_norm(1.5).unwrap();
        assert!(fine < 1.05 * coarse + 1.0);
    }

    #[test]
    fn clique_sequence_examples() {
        let g2 = clique_sequence(2).unwrap();
        assert_eq!(g2.vertex_count(), 8);
        assert_eq!(g2.edge_count(), 1);
        for idx in [2usize, 3, 5] {
            let g = clique_sequence(idx).unwrap();
            let expect = 2f64.powi(-2 * idx as i32) * (idx as f64 - 1.0) / idx as f64;
            assert!((g.lp_norm(1.0).unwrap() - expect).abs() < 1e-15);
        }
        assert!(clique_sequence(1).is_err());
        assert!(matches!(clique_sequence(17), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn doubling_first_step_is_single_edge() {
        let fam = doubling_sequence(1, 5).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].vertex_count(), 2);
        assert_eq!(fam[0].edge_count(), 1);
    }

    #[test]
    fn doubling_two_steps_certified() {
        let opts = DoublingOptions { quasirandom_vertices: 16, max_retries: 100 };
        let fam = doubling_sequence_with(2, 77, &opts).unwrap();
        assert_eq!(fam.graphs.len(), 2);
        let step = &fam.steps[0];
        assert!(step.certified_cut <= step.eps);
        assert!(step.exact);
        assert!((step.density_ratio - 0.5).abs() <= step.eps + 1e-12);
        assert!(step.distance_bound <= 6.0 * 0.75 + 1e-9);
        assert_eq!(fam.graphs[1].vertex_count(), 32);
    }

    #[test]
    fn spectral_bound_dominates_exact_cut() {
        for seed in 0..5u64 {
            let mut edges = Vec::new();
            let n = 14;
            for i in 0..n {
                for j in i + 1..n {
                    if rng::counter_f64(seed, Tag::Trial, (i * n + j) as u64) < 0.5 {
                        edges.push((i, j));
                    }
                }
            }
            let h = WeightedGraph::simple(n, edges).unwrap();
            let centered = embed_graph(&h).unwrap().shift(-0.5);
            let exact = cutmetric::cut_norm_exact(&centered).unwrap().lower;
            let spectral = spectral_cut_bound(&centered);
            assert!(spectral >= exact - 1e-12, "{spectral} < {exact}");
        }
    }

    #[test]
    fn chernoff_bound_values() {
        let p = ChernoffParams::new(vec![0.0; 4], vec![1; 4], 1.0).unwrap();
        assert_eq!(chernoff_bound(&p), 2.0);
        let p = ChernoffParams::new(vec![0.5; 60], vec![1; 60], 1.0).unwrap();
        assert!((chernoff_bound(&p) - 2.0 * (-10.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn chernoff_empirical_below_bound() {
        let n = 200;
        let signs: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        for lam in [0.2, 0.5, 1.0, 2.0] {
            let params = ChernoffParams::new(vec![0.5; n], signs.clone(), lam).unwrap();
            let tail = chernoff_empirical_tail(&params, 20_000, 31);
            assert!(tail <= chernoff_bound(&params) + 1e-12, "λ={lam}");
        }
    }

    #[test]
    fn concentration_deterministic_weights() {
        // |β| ∈ {0,1} with ρ = 1 reproduces H exactly.
        let h = WeightedGraph::simple(8, [(0, 1), (2, 3), (4, 5)]).unwrap();
        let rep = sparsify_concentration_check(&h, 1.0, 0.5, 50, 3).unwrap();
        assert_eq!(rep.empirical_rate, 0.0);
    }

    #[test]
    fn concentration_guard() {
        let h = WeightedGraph::simple(21, [(0, 1)]).unwrap();
        assert!(matches!(
            sparsify_concentration_check(&h, 1.0, 0.5, 10, 3),
            Err(Error::TooManyClasses { .. })
        ));
    }
}
