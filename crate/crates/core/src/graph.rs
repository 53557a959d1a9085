//! Weighted graphs: positive vertex weights α, symmetric real edge weights β
//! (loops allowed), and the normalized Lᵖ norms and edge densities built on
//! them.

use crate::{Error, Result, REP_TOL};
use std::fmt::Write as _;

/// A finite weighted graph. Edge weights are stored sparsely on canonical
/// pairs `i ≤ j`; an absent pair means `β_ij = 0`. The `simple` flag marks
/// unit vertex weights, 0/1 edge weights, and no loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_weights: Vec<f64>,
    edges: Vec<(u32, u32, f64)>,
    total_weight: f64,
    simple: bool,
}

impl WeightedGraph {
    pub fn new(
        vertex_weights: Vec<f64>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = vertex_weights.len();
        for (i, &a) in vertex_weights.iter().enumerate() {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "vertex weight α_{i} must be positive and finite, got {a}"
                )));
            }
        }
        let mut canon: Vec<(u32, u32, f64)> = Vec::new();
        for (i, j, beta) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i},{j}) references a vertex outside 0..{n}"
                )));
            }
            if !beta.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i},{j}) has non-finite weight"
                )));
            }
            if beta == 0.0 {
                continue;
            }
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            canon.push((a as u32, b as u32, beta));
        }
        canon.sort_by_key(|&(i, j, _)| (i, j));
        // Symmetric duplicates must agree; conflicting weights are rejected.
        let mut edges_out: Vec<(u32, u32, f64)> = Vec::with_capacity(canon.len());
        for (i, j, beta) in canon {
            if let Some(last) = edges_out.last() {
                if last.0 == i && last.1 == j {
                    let prev = last.2;
                    if (prev - beta).abs() > REP_TOL * prev.abs().max(beta.abs()).max(1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "edge ({i},{j}) listed twice with conflicting weights {prev} and {beta}"
                        )));
                    }
                    continue;
                }
            }
            edges_out.push((i, j, beta));
        }
        let total_weight = vertex_weights.iter().sum();
        Ok(WeightedGraph {
            vertex_weights,
            edges: edges_out,
            total_weight,
            simple: false,
        })
    }

    /// Simple graph on `n` unit-weight vertices; loops and duplicates are rejected.
    pub fn simple(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(
            vec![1.0; n],
            edges.into_iter().map(|(i, j)| (i, j, 1.0)),
        )?;
        if g.edges.iter().any(|&(i, j, _)| i == j) {
            return Err(Error::InvalidParameter("simple graph cannot have loops".into()));
        }
        g.simple = true;
        Ok(g)
    }

    /// Complete graph Kₙ.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::simple(n, edges).expect("complete graph is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn vertex_weight(&self, i: usize) -> f64 {
        self.vertex_weights[i]
    }

    /// α_G, the cached total vertex weight.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// α_U for a vertex subset.
    pub fn subset_weight(&self, vertices: &[usize]) -> f64 {
        vertices.iter().map(|&v| self.vertex_weights[v]).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    /// Canonical `(i ≤ j, β)` triples with nonzero weight.
    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn beta(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i as u32, j as u32) } else { (j as u32, i as u32) };
        match self.edges.binary_search_by_key(&key, |&(a, b, _)| (a, b)) {
            Ok(pos) => self.edges[pos].2,
            Err(_) => 0.0,
        }
    }

    /// Multiply all edge weights by `c` (vertex weights unchanged).
    pub fn scale_edges(&self, c: f64) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.2 *= c;
        }
        g.simple = self.simple && c == 1.0;
        g
    }

    /// `‖G‖_p = (Σ_{i,j} (α_iα_j/α_G²)|β_ij|^p)^{1/p}` over ordered pairs
    /// including loops; `p = ∞` gives `max |β_ij|`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if self.vertex_weights.is_empty() {
            return Err(Error::EmptyGraph);
        }
        check_p(p)?;
        if p.is_infinite() {
            return Ok(self
                .edges
                .iter()
                .map(|&(_, _, b)| b.abs())
                .fold(0.0, f64::max));
        }
        let a2 = self.total_weight * self.total_weight;
        let mut sum = 0.0;
        for &(i, j, beta) in &self.edges {
            let w = self.vertex_weights[i as usize] * self.vertex_weights[j as usize] / a2;
            let term = w * beta.abs().powf(p);
            // Off-diagonal pairs appear twice in the ordered sum.
            sum += if i == j { term } else { 2.0 * term };
        }
        Ok(sum.powf(1.0 / p))
    }

    /// Edge density `ρ_G(S,T) = Σ_{s∈S,t∈T} (α_sα_t/(α_Sα_T)) β_st`.
    pub fn edge_density(&self, s: &[usize], t: &[usize]) -> Result<f64> {
        if s.is_empty() || t.is_empty() {
            return Err(Error::EmptyBlock);
        }
        let alpha_s = self.subset_weight(s);
        let alpha_t = self.subset_weight(t);
        if !(alpha_s > 0.0) || !(alpha_t > 0.0) {
            return Err(Error::EmptyBlock);
        }
        let n = self.vertex_count();
        let mut in_s = vec![false; n];
        let mut in_t = vec![false; n];
        for &v in s {
            in_s[v] = true;
        }
        for &v in t {
            in_t[v] = true;
        }
        let mut sum = 0.0;
        for &(i, j, beta) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            let aij = self.vertex_weights[i] * self.vertex_weights[j] * beta;
            if i == j {
                if in_s[i] && in_t[i] {
                    sum += aij;
                }
            } else {
                if in_s[i] && in_t[j] {
                    sum += aij;
                }
                if in_s[j] && in_t[i] {
                    sum += aij;
                }
            }
        }
        Ok(sum / (alpha_s * alpha_t))
    }

    /// Averaged quotient graph `G_P`: same vertices, edge weight between
    /// `s ∈ V_i, t ∈ V_j` replaced by `ρ_G(V_i, V_j)`-style cell averages.
    /// Returned as the per-pair class density matrix plus class weights.
    pub fn class_densities(&self, labels: &[usize], classes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.vertex_count();
        if labels.len() != n {
            return Err(Error::PartitionMismatch);
        }
        let mut class_w = vec![0.0; classes];
        for (v, &c) in labels.iter().enumerate() {
            if c >= classes {
                return Err(Error::LabelOutOfRange { label: c, classes });
            }
            class_w[c] += self.vertex_weights[v];
        }
        let mut num = vec![0.0; classes * classes];
        for &(i, j, beta) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            let m = self.vertex_weights[i] * self.vertex_weights[j] * beta;
            let (ci, cj) = (labels[i], labels[j]);
            num[ci * classes + cj] += m;
            if i != j {
                num[cj * classes + ci] += m;
            }
        }
        for a in 0..classes {
            for b in 0..classes {
                num[a * classes + b] /= class_w[a] * class_w[b];
            }
        }
        Ok((num, class_w))
    }

    // ---- TSV format: `#weighted-graph v1`, `v <id> <alpha>`, `e <i> <j> <beta>` ----

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("#weighted-graph v1\n");
        for (i, &a) in self.vertex_weights.iter().enumerate() {
            let _ = writeln!(out, "v\t{i}\t{a}");
        }
        for &(i, j, b) in &self.edges {
            let _ = writeln!(out, "e\t{i}\t{j}\t{b}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "#weighted-graph v1" => {}
            _ => return Err(Error::Parse("missing `#weighted-graph v1` header".into())),
        }
        let mut verts: Vec<(usize, f64)> = Vec::new();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| Error::Parse(format!("line {}: missing field", lineno + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            match kind {
                "v" => {
                    let id = parse(parts.next())? as usize;
                    let alpha = parse(parts.next())?;
                    verts.push((id, alpha));
                }
                "e" => {
                    let i = parse(parts.next())? as usize;
                    let j = parse(parts.next())? as usize;
                    let beta = parse(parts.next())?;
                    edges.push((i, j, beta));
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown record `{other}`",
                        lineno + 2
                    )))
                }
            }
        }
        verts.sort_by_key(|&(id, _)| id);
        let mut weights = Vec::with_capacity(verts.len());
        let mut id_map = std::collections::HashMap::new();
        for (pos, (id, alpha)) in verts.into_iter().enumerate() {
            if id_map.insert(id, pos).is_some() {
                return Err(Error::Parse(format!("duplicate vertex id {id}")));
            }
            weights.push(alpha);
        }
        let remap = |id: usize| -> Result<usize> {
            id_map
                .get(&id)
                .copied()
                .ok_or_else(|| Error::Parse(format!("edge references unknown vertex {id}")))
        };
        let edges = edges
            .into_iter()
            .map(|(i, j, b)| Ok((remap(i)?, remap(j)?, b)))
            .collect::<Result<Vec<_>>>()?;
        let mut g = Self::new(weights, edges)?;
        g.simple = g.vertex_weights.iter().all(|&a| a == 1.0)
            && g.edges.iter().all(|&(i, j, b)| i != j && b == 1.0);
        Ok(g)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p must satisfy p ≥ 1 or p = ∞, got {p}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> WeightedGraph {
        WeightedGraph::simple(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn l1_norm_single_edge() {
        // Two ordered pairs of weight 1/4 each.
        assert!((single_edge().lp_norm(1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn l1_norm_triangle() {
        let k3 = WeightedGraph::complete(3);
        assert!((k3.lp_norm(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn linf_norm() {
        let g = WeightedGraph::new(vec![1.0, 1.0], [(0, 1, -3.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(g.lp_norm(f64::INFINITY).unwrap(), 3.0);
    }

    #[test]
    fn empty_graph_errors() {
        let g = WeightedGraph::new(vec![], []).unwrap();
        assert_eq!(g.lp_norm(1.0), Err(Error::EmptyGraph));
    }

    #[test]
    fn clique_inside_isolated_padding() {
        // Clique on n vertices among n·2ⁿ total: ‖G‖₁ = 2^{−2n}(n−1)/n.
        for n in [2usize, 3, 4] {
            let total = n << n;
            let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
            let g = WeightedGraph::simple(total, edges).unwrap();
            let expect = 2f64.powi(-2 * n as i32) * (n as f64 - 1.0) / n as f64;
            assert!((g.lp_norm(1.0).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_density_examples() {
        let k3 = WeightedGraph::complete(3);
        let all = [0, 1, 2];
        assert!((k3.edge_density(&all, &all).unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let e = single_edge();
        assert_eq!(e.edge_density(&[0], &[1]).unwrap(), 1.0);
        assert_eq!(e.edge_density(&[0], &[0]).unwrap(), 0.0);
        assert_eq!(e.edge_density(&[], &[0]), Err(Error::EmptyBlock));
    }

    #[test]
    fn density_with_loops_and_weights() {
        let g = WeightedGraph::new(vec![1.0, 2.0], [(0, 0, 3.0), (0, 1, 1.0)]).unwrap();
        // ρ({0},{0}) = (1·1/1·1)·3 = 3; ρ(V,V) = (3 + 2·2·1)/9.
        assert!((g.edge_density(&[0], &[0]).unwrap() - 3.0).abs() < 1e-15);
        let rho = g.edge_density(&[0, 1], &[0, 1]).unwrap();
        assert!((rho - (3.0 + 4.0) / 9.0).abs() < 1e-15);
    }

    #[test]
    fn tsv_round_trip() {
        let g = WeightedGraph::new(vec![1.0, 2.0, 1.0], [(0, 1, 0.5), (1, 2, -1.25), (2, 2, 3.0)])
            .unwrap();
        let parsed = WeightedGraph::from_tsv(&g.to_tsv()).unwrap();
        assert_eq!(g.vertex_weights(), parsed.vertex_weights());
        assert_eq!(g.edges(), parsed.edges());
    }

    #[test]
    fn tsv_header_required() {
        assert!(matches!(WeightedGraph::from_tsv("v 0 1\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn conflicting_symmetric_weights_rejected() {
        assert!(WeightedGraph::new(vec![1.0, 1.0], [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
    }
}
