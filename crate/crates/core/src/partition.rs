//! Partitions of a finite base (graphon grid classes or graph vertices) into
//! labeled classes carrying their total measure.

use crate::{Error, Result, REP_TOL};
use serde::{Deserialize, Serialize};

/// An assignment of base cells to classes. The base is described only by the
/// per-cell measures (class lengths for graphons, vertex weights for graphs),
/// which also serve as the parent-identity check when partitions are combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    cell_weights: Vec<f64>,
    class_weights: Vec<f64>,
}

impl Partition {
    /// Build from raw labels; classes are compacted to `0..k` in order of
    /// first appearance, so equal partitions have equal representations.
    pub fn new(labels: Vec<usize>, cell_weights: Vec<f64>) -> Result<Self> {
        if labels.len() != cell_weights.len() {
            return Err(Error::PartitionMismatch);
        }
        if labels.is_empty() {
            return Err(Error::InvalidParameter("partition of an empty base".into()));
        }
        let mut remap: Vec<Option<usize>> = vec![None; labels.len()];
        let mut compact = Vec::with_capacity(labels.len());
        let mut next = 0usize;
        for &l in &labels {
            if l >= labels.len() {
                return Err(Error::LabelOutOfRange { label: l, classes: labels.len() });
            }
            let c = *remap[l].get_or_insert_with(|| {
                let c = next;
                next += 1;
                c
            });
            compact.push(c);
        }
        let mut class_weights = vec![0.0; next];
        for (cell, &c) in compact.iter().enumerate() {
            class_weights[c] += cell_weights[cell];
        }
        Ok(Partition { labels: compact, cell_weights, class_weights })
    }

    /// One class containing every cell.
    pub fn trivial(cell_weights: Vec<f64>) -> Self {
        let n = cell_weights.len();
        Partition::new(vec![0; n], cell_weights).expect("trivial partition")
    }

    /// Every cell its own class.
    pub fn singletons(cell_weights: Vec<f64>) -> Self {
        let n = cell_weights.len();
        Partition::new((0..n).collect(), cell_weights).expect("singleton partition")
    }

    pub fn num_cells(&self) -> usize {
        self.labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_weights.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, cell: usize) -> usize {
        self.labels[cell]
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn class_weight(&self, class: usize) -> f64 {
        self.class_weights[class]
    }

    pub fn min_class_weight(&self) -> f64 {
        self.class_weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Cells of one class, in base order.
    pub fn class_members(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(cell, &c)| (c == class).then_some(cell))
            .collect()
    }

    pub fn same_parent(&self, other: &Partition) -> bool {
        self.cell_weights.len() == other.cell_weights.len()
            && self
                .cell_weights
                .iter()
                .zip(&other.cell_weights)
                .all(|(a, b)| (a - b).abs() <= REP_TOL * a.abs().max(b.abs()).max(1.0))
    }

    /// Split every class by membership in `cells`; classes that do not meet
    /// the subset are untouched.
    pub fn refine_by_subset(&self, cells: &[usize]) -> Result<Partition> {
        let n = self.num_cells();
        let mut marker = vec![false; n];
        for &c in cells {
            if c >= n {
                return Err(Error::LabelOutOfRange { label: c, classes: n });
            }
            marker[c] = true;
        }
        let k = self.num_classes();
        let raw: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(cell, &l)| if marker[cell] { l + k } else { l })
            .collect();
        // Raw labels can exceed the cell count; compact through pairs instead.
        Self::from_keys(&raw, self.cell_weights.clone())
    }

    /// Classes are the nonempty intersections; refines both inputs.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        if !self.same_parent(other) {
            return Err(Error::PartitionMismatch);
        }
        let k = other.num_classes();
        let keys: Vec<usize> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| a * k + b)
            .collect();
        Self::from_keys(&keys, self.cell_weights.clone())
    }

    /// True when every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if !self.same_parent(coarser) {
            return false;
        }
        let mut image: Vec<Option<usize>> = vec![None; self.num_classes()];
        for (cell, &c) in self.labels.iter().enumerate() {
            let target = coarser.labels[cell];
            match image[c] {
                None => image[c] = Some(target),
                Some(t) if t == target => {}
                Some(_) => return false,
            }
        }
        true
    }

    /// All parts within `tol` of each other in measure.
    pub fn is_equipartition(&self, tol: f64) -> bool {
        let avg: f64 = self.class_weights.iter().sum::<f64>() / self.num_classes() as f64;
        self.class_weights.iter().all(|&w| (w - avg).abs() <= tol)
    }

    fn from_keys(keys: &[usize], cell_weights: Vec<f64>) -> Result<Partition> {
        let mut seen: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        let mut compact = Vec::with_capacity(keys.len());
        for &key in keys {
            let next = seen.len();
            let c = *seen.entry(key).or_insert(next);
            compact.push(c);
        }
        let mut class_weights = vec![0.0; seen.len()];
        for (cell, &c) in compact.iter().enumerate() {
            class_weights[c] += cell_weights[cell];
        }
        Ok(Partition { labels: compact, cell_weights, class_weights })
    }
}
