//! Step-function graphons: symmetric step functions on a finite interval
//! partition of [0,1]. Every graphon handled by this crate is a step
//! function; analytic graphons enter through grid-averaging constructors.

use crate::graph::{check_p, WeightedGraph};
use crate::partition::Partition;
use crate::{Error, Result, REP_TOL};
use serde::{Deserialize, Serialize};

/// Breakpoints closer than this are merged when grids are combined.
const MERGE_TOL: f64 = 1e-10;

/// A symmetric step function `W: [0,1]² → ℝ` with classes `J_1,…,J_m` of
/// lengths `λ(J_i)` laid out as consecutive intervals in class order.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    lengths: Vec<f64>,
    values: Vec<f64>, // m×m row-major, exactly symmetric
}

#[derive(Serialize, Deserialize)]
struct RawGraphon {
    lengths: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl StepGraphon {
    pub fn new(lengths: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let m = lengths.len();
        if m == 0 {
            return Err(Error::InvalidParameter("graphon needs at least one class".into()));
        }
        for &l in &lengths {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "class lengths must be positive, got {l}"
                )));
            }
        }
        let total: f64 = lengths.iter().sum();
        if (total - 1.0).abs() > REP_TOL {
            return Err(Error::InvalidParameter(format!(
                "class lengths must sum to 1 (got {total})"
            )));
        }
        if values.len() != m || values.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidParameter(format!("values must be {m}×{m}")));
        }
        let mut flat = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let (a, b) = (values[i][j], values[j][i]);
                if !a.is_finite() {
                    return Err(Error::InvalidParameter("non-finite graphon value".into()));
                }
                if (a - b).abs() > crate::ABS_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "values not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                flat[i * m + j] = 0.5 * (a + b);
            }
        }
        Ok(StepGraphon { lengths, values: flat })
    }

    pub fn constant(c: f64) -> Self {
        StepGraphon { lengths: vec![1.0], values: vec![c] }
    }

    /// Grid-sampling constructor for an analytic graphon: averages `f` over
    /// an n×n equipartition with 4×4 midpoint quadrature per cell (use
    /// [`StepGraphon::from_cell_averages`] when closed-form integrals exist).
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid must have at least one cell".into()));
        }
        let h = 1.0 / n as f64;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for a in 0..4 {
                    let x = (i as f64 + (a as f64 + 0.5) / 4.0) * h;
                    for b in 0..4 {
                        let y = (j as f64 + (b as f64 + 0.5) / 4.0) * h;
                        acc += 0.5 * (f(x, y) + f(y, x));
                    }
                }
                let avg = acc / 16.0;
                values[i * n + j] = avg;
                values[j * n + i] = avg;
            }
        }
        Ok(StepGraphon { lengths: vec![h; n], values })
    }

    /// Build directly from per-cell averages (exact when the caller has
    /// closed-form cell integrals).
    pub fn from_cell_averages(lengths: Vec<f64>, averages: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(lengths, averages)
    }

    pub fn num_classes(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn class_length(&self, i: usize) -> f64 {
        self.lengths[i]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.lengths.len() + j]
    }

    pub(crate) fn values_flat(&self) -> &[f64] {
        &self.values
    }

    /// Cumulative interval endpoints `0 = c_0 < c_1 < … < c_m = 1`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.lengths.len() + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for &l in &self.lengths {
            acc += l;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        cum
    }

    /// Class containing `x ∈ [0,1)` given the cumulative endpoints.
    pub fn class_of(cum: &[f64], x: f64) -> usize {
        match cum.binary_search_by(|c| c.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(cum.len() - 2),
            Err(k) => k.saturating_sub(1).min(cum.len() - 2),
        }
    }

    /// `‖W‖_p`; essential supremum for `p = ∞`. Satisfies
    /// `‖W^G‖_p = ‖G‖_p` for embedded graphs.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let m = self.lengths.len();
        if p.is_infinite() {
            return Ok(self.values.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                sum += self.lengths[i] * self.lengths[j] * self.value(i, j).abs().powf(p);
            }
        }
        Ok(sum.powf(1.0 / p))
    }

    /// `⟨U,W⟩ = Σ λ_iλ_j u_ij w_ij`; both operands must share a grid.
    pub fn inner_product(&self, other: &StepGraphon) -> Result<f64> {
        self.check_same_grid(other)?;
        let m = self.lengths.len();
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                sum += self.lengths[i] * self.lengths[j] * self.value(i, j) * other.value(i, j);
            }
        }
        Ok(sum)
    }

    /// `𝔼W = ∫ W`.
    pub fn mean(&self) -> f64 {
        let m = self.lengths.len();
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                sum += self.lengths[i] * self.lengths[j] * self.value(i, j);
            }
        }
        sum
    }

    /// Split at level `K`: returns `(W·1_{|W|≤K}, W·1_{|W|>K})`, which sum
    /// cellwise back to `W`.
    pub fn truncate(&self, k: f64) -> Result<(StepGraphon, StepGraphon)> {
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("truncation level must be positive, got {k}")));
        }
        let mut low = self.clone();
        let mut high = self.clone();
        for (l, h) in low.values.iter_mut().zip(high.values.iter_mut()) {
            if l.abs() <= k {
                *h = 0.0;
            } else {
                *l = 0.0;
            }
        }
        Ok((low, high))
    }

    pub fn scale(&self, c: f64) -> StepGraphon {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    pub fn shift(&self, c: f64) -> StepGraphon {
        let mut out = self.clone();
        for v in &mut out.values {
            *v += c;
        }
        out
    }

    /// Cellwise difference on a shared grid.
    pub fn sub(&self, other: &StepGraphon) -> Result<StepGraphon> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v -= w;
        }
        Ok(out)
    }

    pub fn check_same_grid(&self, other: &StepGraphon) -> Result<()> {
        if self.lengths.len() != other.lengths.len()
            || self
                .lengths
                .iter()
                .zip(&other.lengths)
                .any(|(a, b)| (a - b).abs() > REP_TOL)
        {
            return Err(Error::GridMismatch {
                left: self.lengths.len(),
                right: other.lengths.len(),
            });
        }
        Ok(())
    }

    /// Stepping operator `W_P`: average over the cells of `P`, returned on
    /// the same grid. Idempotent and contractive in every norm.
    pub fn step(&self, p: &Partition) -> Result<StepGraphon> {
        let m = self.lengths.len();
        if p.num_cells() != m {
            return Err(Error::PartitionMismatch);
        }
        let k = p.num_classes();
        let mut num = vec![0.0; k * k];
        for i in 0..m {
            let (ci, li) = (p.label(i), self.lengths[i]);
            for j in 0..m {
                num[ci * k + p.label(j)] += li * self.lengths[j] * self.value(i, j);
            }
        }
        for a in 0..k {
            for b in 0..k {
                num[a * k + b] /= p.class_weight(a) * p.class_weight(b);
            }
        }
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] = num[p.label(i) * k + p.label(j)];
            }
        }
        Ok(StepGraphon { lengths: self.lengths.clone(), values })
    }

    /// Stepping collapsed onto the classes of `P` (one class per part).
    pub fn quotient(&self, p: &Partition) -> Result<StepGraphon> {
        let m = self.lengths.len();
        if p.num_cells() != m {
            return Err(Error::PartitionMismatch);
        }
        let k = p.num_classes();
        let mut num = vec![0.0; k * k];
        for i in 0..m {
            let (ci, li) = (p.label(i), self.lengths[i]);
            for j in 0..m {
                num[ci * k + p.label(j)] += li * self.lengths[j] * self.value(i, j);
            }
        }
        for a in 0..k {
            for b in 0..k {
                num[a * k + b] /= p.class_weight(a) * p.class_weight(b);
            }
        }
        Ok(StepGraphon { lengths: p.class_weights().to_vec(), values: num })
    }

    /// Average over an `n`-class equipartition whose boundaries need not
    /// align with the current grid (re-gridding by stepping).
    pub fn regrid_equipartition(&self, n: usize) -> Result<StepGraphon> {
        if n == 0 {
            return Err(Error::InvalidParameter("equipartition needs at least one class".into()));
        }
        let m = self.lengths.len();
        let cum = self.cumulative();
        // overlap[a][i] = λ([a/n,(a+1)/n] ∩ J_i)
        let mut overlap = vec![0.0; n * m];
        for a in 0..n {
            let lo = a as f64 / n as f64;
            let hi = (a + 1) as f64 / n as f64;
            for i in 0..m {
                let l = cum[i].max(lo);
                let r = cum[i + 1].min(hi);
                if r > l {
                    overlap[a * m + i] = r - l;
                }
            }
        }
        let inv = n as f64;
        let mut values = vec![0.0; n * n];
        // V' = n² · O V Oᵀ
        let mut tmp = vec![0.0; n * m]; // O V
        for a in 0..n {
            for j in 0..m {
                let mut acc = 0.0;
                for i in 0..m {
                    acc += overlap[a * m + i] * self.value(i, j);
                }
                tmp[a * m + j] = acc;
            }
        }
        for a in 0..n {
            for b in 0..n {
                let mut acc = 0.0;
                for j in 0..m {
                    acc += tmp[a * m + j] * overlap[b * m + j];
                }
                values[a * n + b] = acc * inv * inv;
            }
        }
        Ok(StepGraphon { lengths: vec![1.0 / n as f64; n], values })
    }

    /// Split class `i` into consecutive sub-intervals of the given lengths;
    /// the function is unchanged. `sub_lengths[i]` must sum to `λ(J_i)`.
    pub fn refine_classes(&self, sub_lengths: &[Vec<f64>]) -> Result<StepGraphon> {
        let m = self.lengths.len();
        if sub_lengths.len() != m {
            return Err(Error::PartitionMismatch);
        }
        let mut lengths = Vec::new();
        let mut origin = Vec::new();
        for (i, subs) in sub_lengths.iter().enumerate() {
            let total: f64 = subs.iter().sum();
            if subs.is_empty() || (total - self.lengths[i]).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "sub-lengths of class {i} sum to {total}, expected {}",
                    self.lengths[i]
                )));
            }
            for &s in subs {
                if s <= 0.0 {
                    return Err(Error::InvalidParameter("zero-length sub-class".into()));
                }
                lengths.push(s);
                origin.push(i);
            }
        }
        let mm = lengths.len();
        let mut values = vec![0.0; mm * mm];
        for a in 0..mm {
            for b in 0..mm {
                values[a * mm + b] = self.value(origin[a], origin[b]);
            }
        }
        Ok(StepGraphon { lengths, values })
    }

    /// Reorder classes by `perm` (new class `a` is old class `perm[a]`).
    pub fn permute_classes(&self, perm: &[usize]) -> Result<StepGraphon> {
        let m = self.lengths.len();
        if perm.len() != m {
            return Err(Error::PartitionMismatch);
        }
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen[p] = true;
        }
        let lengths: Vec<f64> = perm.iter().map(|&p| self.lengths[p]).collect();
        let mut values = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                values[a * m + b] = self.value(perm[a], perm[b]);
            }
        }
        Ok(StepGraphon { lengths, values })
    }

    /// Row sums `Σ_j λ_j v_ij` (the degree profile).
    pub fn row_sums(&self) -> Vec<f64> {
        let m = self.lengths.len();
        (0..m)
            .map(|i| (0..m).map(|j| self.lengths[j] * self.value(i, j)).sum())
            .collect()
    }

    // ---- JSON format: {"lengths":[...], "values":[[...]]} ----

    pub fn to_json(&self) -> String {
        let m = self.lengths.len();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|i| self.values[i * m..(i + 1) * m].to_vec())
            .collect();
        serde_json::to_string(&RawGraphon { lengths: self.lengths.clone(), values: rows })
            .expect("graphon serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGraphon =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(raw.lengths, raw.values)
    }
}

/// A measure-preserving relabeling restricted to the finite setting: a
/// bijection between the classes of two graphons on a common grid, matching
/// classes only of equal measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayPlan {
    permutation: Vec<usize>,
}

impl OverlayPlan {
    /// `permutation[a]` is the source class overlaid onto target slot `a`;
    /// matched classes must agree in measure to 1e−12.
    pub fn new(permutation: Vec<usize>, source: &[f64], target: &[f64]) -> Result<Self> {
        let m = permutation.len();
        if source.len() != m || target.len() != m {
            return Err(Error::PartitionMismatch);
        }
        let mut seen = vec![false; m];
        for (slot, &cls) in permutation.iter().enumerate() {
            if cls >= m || seen[cls] {
                return Err(Error::InvalidParameter("not a permutation of classes".into()));
            }
            seen[cls] = true;
            if (source[cls] - target[slot]).abs() > REP_TOL {
                return Err(Error::InvalidParameter(format!(
                    "overlay maps a class of measure {} onto a slot of measure {}",
                    source[cls], target[slot]
                )));
            }
        }
        Ok(OverlayPlan { permutation })
    }

    pub fn identity(m: usize) -> Self {
        OverlayPlan { permutation: (0..m).collect() }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// `W^σ` for the finite relabeling.
    pub fn apply(&self, w: &StepGraphon) -> Result<StepGraphon> {
        w.permute_classes(&self.permutation)
    }
}

/// The associated graphon `W^G`: class lengths `α_i/α_G` in vertex order,
/// values `β_ij`.
pub fn embed_graph(g: &WeightedGraph) -> Result<StepGraphon> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let alpha = g.total_weight();
    let lengths: Vec<f64> = g.vertex_weights().iter().map(|&a| a / alpha).collect();
    let mut values = vec![0.0; n * n];
    for &(i, j, beta) in g.edges() {
        let (i, j) = (i as usize, j as usize);
        values[i * n + j] = beta;
        values[j * n + i] = beta;
    }
    Ok(StepGraphon { lengths, values })
}

/// `W^G/‖G‖₁`; L¹ norm 1 when all edge weights are nonnegative.
pub fn normalize_graph(g: &WeightedGraph) -> Result<StepGraphon> {
    let l1 = g.lp_norm(1.0)?;
    if l1 == 0.0 {
        return Err(Error::NoEdges);
    }
    Ok(embed_graph(g)?.scale(1.0 / l1))
}

/// Re-express `u` and `w` on the union of their class boundaries. The outputs
/// share a grid, so cellwise arithmetic applies.
pub fn common_refine(u: &StepGraphon, w: &StepGraphon) -> Result<(StepGraphon, StepGraphon)> {
    if u.lengths.len() == w.lengths.len()
        && u.lengths
            .iter()
            .zip(&w.lengths)
            .all(|(a, b)| (a - b).abs() <= REP_TOL)
    {
        return Ok((u.clone(), w.clone()));
    }
    let cu = u.cumulative();
    let cw = w.cumulative();
    let mut points: Vec<f64> = cu.iter().chain(cw.iter()).copied().collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged = vec![0.0];
    for &p in &points {
        if p - merged.last().unwrap() > MERGE_TOL {
            merged.push(p);
        }
    }
    *merged.last_mut().unwrap() = 1.0;
    let map_classes = |cum: &[f64]| -> Vec<usize> {
        merged
            .windows(2)
            .map(|iv| StepGraphon::class_of(cum, 0.5 * (iv[0] + iv[1])))
            .collect()
    };
    let iu = map_classes(&cu);
    let iw = map_classes(&cw);
    let lengths: Vec<f64> = merged.windows(2).map(|iv| iv[1] - iv[0]).collect();
    let m = lengths.len();
    let build = |g: &StepGraphon, idx: &[usize]| {
        let mut values = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                values[a * m + b] = g.value(idx[a], idx[b]);
            }
        }
        StepGraphon { lengths: lengths.clone(), values }
    };
    Ok((build(u, &iu), build(w, &iw)))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn checkerboard() -> StepGraphon {
        StepGraphon::new(vec![0.5, 0.5], vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn constant_norms() {
        let w = StepGraphon::constant(-2.5);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((w.lp_norm(p).unwrap() - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn checkerboard_l2() {
        assert!((checkerboard().lp_norm(2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn embed_matches_graph_norms() {
        let k3 = WeightedGraph::complete(3);
        let w = embed_graph(&k3).unwrap();
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let a = k3.lp_norm(p).unwrap();
            let b = w.lp_norm(p).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "p={p}: {a} vs {b}");
        }
        assert!((w.lp_norm(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn embed_examples() {
        let e = WeightedGraph::simple(2, [(0, 1)]).unwrap();
        let w = embed_graph(&e).unwrap();
        assert_eq!(w.lengths(), &[0.5, 0.5]);
        assert_eq!(w.value(0, 1), 1.0);
        assert_eq!(w.value(0, 0), 0.0);

        let path = WeightedGraph::new(vec![1.0, 2.0, 1.0], [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let w = embed_graph(&path).unwrap();
        assert_eq!(w.lengths(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn stepping_examples() {
        let w = StepGraphon::constant(3.0);
        let p = Partition::trivial(vec![1.0]);
        assert_eq!(w.step(&p).unwrap(), w);

        let cb = checkerboard();
        let merge = Partition::trivial(vec![0.5, 0.5]);
        let stepped = cb.step(&merge).unwrap();
        assert!(stepped.values_flat().iter().all(|v| v.abs() < 1e-15));

        let spike = StepGraphon::new(vec![0.5, 0.5], vec![vec![4.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let merged = spike.step(&merge).unwrap();
        assert!(merged.values_flat().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn stepping_is_idempotent() {
        let w = StepGraphon::new(
            vec![0.2, 0.3, 0.5],
            vec![
                vec![1.0, 2.0, -1.0],
                vec![2.0, 0.5, 3.0],
                vec![-1.0, 3.0, 0.0],
            ],
        )
        .unwrap();
        let p = Partition::new(vec![0, 1, 0], w.lengths().to_vec()).unwrap();
        let once = w.step(&p).unwrap();
        let twice = once.step(&p).unwrap();
        for (a, b) in once.values_flat().iter().zip(twice.values_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_product_examples() {
        let one = StepGraphon::constant(1.0);
        assert!((one.inner_product(&one).unwrap() - 1.0).abs() < 1e-15);
        let cb = checkerboard();
        assert!((cb.inner_product(&cb).unwrap() - 1.0).abs() < 1e-15);
        let (a, b) = common_refine(&one, &cb).unwrap();
        assert!(a.inner_product(&b).unwrap().abs() < 1e-15);
        assert!(one.inner_product(&cb).is_err());
    }

    #[test]
    fn truncate_examples() {
        let w = StepGraphon::constant(1.0);
        let (low, high) = w.truncate(2.0).unwrap();
        assert_eq!(low, w);
        assert!(high.lp_norm(1.0).unwrap() < 1e-15);

        let spike = StepGraphon::new(vec![0.5, 0.5], vec![vec![4.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let (low, high) = spike.truncate(1.0).unwrap();
        assert!(low.lp_norm(1.0).unwrap().abs() < 1e-15);
        assert_eq!(high.value(0, 0), 4.0);
    }

    #[test]
    fn normalize_examples() {
        let k3 = WeightedGraph::complete(3);
        let w = normalize_graph(&k3).unwrap();
        assert!((w.value(0, 1) - 1.5).abs() < 1e-12);
        assert!((w.lp_norm(1.0).unwrap() - 1.0).abs() < 1e-12);

        let e = WeightedGraph::simple(2, [(0, 1)]).unwrap();
        assert!((normalize_graph(&e).unwrap().value(0, 1) - 2.0).abs() < 1e-12);

        let edgeless = WeightedGraph::simple(2, []).unwrap();
        assert_eq!(normalize_graph(&edgeless), Err(Error::NoEdges));
    }

    #[test]
    fn regrid_preserves_mean() {
        let w = StepGraphon::new(
            vec![0.3, 0.7],
            vec![vec![2.0, -1.0], vec![-1.0, 0.5]],
        )
        .unwrap();
        for n in [1, 2, 5, 24] {
            let r = w.regrid_equipartition(n).unwrap();
            assert!((r.mean() - w.mean()).abs() < 1e-12);
            // Stepping contracts the L² norm.
            assert!(r.lp_norm(2.0).unwrap() <= w.lp_norm(2.0).unwrap() + 1e-12);
        }
    }

    #[test]
    fn overlay_plan_requires_equal_measures() {
        let w = StepGraphon::new(
            vec![0.2, 0.3, 0.5],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0],
                vec![0.0, 0.0, 3.0],
            ],
        )
        .unwrap();
        // Swapping unequal classes is rejected.
        assert!(OverlayPlan::new(vec![1, 0, 2], w.lengths(), w.lengths()).is_err());
        // The identity always qualifies, and application matches permute_classes.
        let id = OverlayPlan::identity(3);
        assert_eq!(id.apply(&w).unwrap(), w);
        // Equal-measure classes may be exchanged.
        let u = StepGraphon::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let plan = OverlayPlan::new(vec![1, 0], u.lengths(), u.lengths()).unwrap();
        assert_eq!(plan.apply(&u).unwrap().value(0, 0), 2.0);
    }

    #[test]
    fn json_round_trip() {
        let w = checkerboard();
        let back = StepGraphon::from_json(&w.to_json()).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn from_fn_matches_constant() {
        let w = StepGraphon::from_fn(3, |_, _| 2.0).unwrap();
        assert!((w.lp_norm(1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn common_refine_shares_grid() {
        let a = StepGraphon::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = StepGraphon::new(
            vec![0.25, 0.75],
            vec![vec![2.0, 0.5], vec![0.5, 0.0]],
        )
        .unwrap();
        let (ra, rb) = common_refine(&a, &b).unwrap();
        assert_eq!(ra.num_classes(), 3);
        ra.check_same_grid(&rb).unwrap();
        assert!((ra.mean() - a.mean()).abs() < 1e-12);
        assert!((rb.mean() - b.mean()).abs() < 1e-12);
    }
}
