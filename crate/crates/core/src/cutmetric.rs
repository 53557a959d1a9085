//! Cut norm `‖·‖□`, the `L∞→L1` norm, labeled cut distance `d□`, and an
//! unlabeled cut distance `δ□` upper bound via class-overlay search.
//!
//! For a step graphon the cut norm is attained on class subsets, so exact
//! enumeration over subsets (with the greedy inner step justified by
//! bilinearity) is sound up to [`EXACT_CLASS_LIMIT`] classes. Beyond that,
//! alternating maximization reports a lower bound and `‖W‖₁` certifies the
//! upper side.

use crate::graphon::{common_refine, OverlayPlan, StepGraphon};
use crate::rng::{self, Stream, Tag};
use crate::{Error, Result};
use serde::Serialize;

/// 2^m enumeration feasibility guard for the exact solvers.
pub const EXACT_CLASS_LIMIT: usize = 20;

const DEFAULT_RESTARTS: usize = 32;
const DEFAULT_SEED: u64 = 0x67726c62;
const MAX_ALTERNATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Exact,
    Alternating,
}

/// A pair of class subsets and the achieved bilinear value. For box
/// witnesses `value = ⟨W, 1_{S×T}⟩`; for signed witnesses (the `L∞→L1`
/// solvers) membership encodes `+1` and absence `−1` on both axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutWitness {
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    pub value: f64,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub signed: bool,
}

impl CutWitness {
    /// Recompute the witness value against `w`; equals `value` to 1e−12.
    pub fn evaluate(&self, w: &StepGraphon) -> f64 {
        let m = w.num_classes();
        let mut fs = vec![if self.signed { -1.0 } else { 0.0 }; m];
        let mut gs = vec![if self.signed { -1.0 } else { 0.0 }; m];
        for &i in &self.s {
            fs[i] = 1.0;
        }
        for &j in &self.t {
            gs[j] = 1.0;
        }
        let mut sum = 0.0;
        for i in 0..m {
            if fs[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                if gs[j] == 0.0 {
                    continue;
                }
                sum += fs[i] * gs[j] * w.class_length(i) * w.class_length(j) * w.value(i, j);
            }
        }
        sum
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("witness serialization")
    }
}

/// Bracket `[lower, upper]` around a cut-type norm with the witness that
/// achieves `lower`. `method == Exact` implies `lower == upper`.
#[derive(Debug, Clone, Serialize)]
pub struct CutResult {
    pub lower: f64,
    pub upper: f64,
    pub witness: CutWitness,
    pub method: SolveMethod,
}

fn scaled_weights(w: &StepGraphon) -> Vec<f64> {
    let m = w.num_classes();
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = w.class_length(i) * w.class_length(j) * w.value(i, j);
        }
    }
    a
}

fn mask_to_vec(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Exact cut norm by Gray-code enumeration of `S` with the sign-greedy
/// choice of `T`; exact by bilinearity.
pub fn cut_norm_exact(w: &StepGraphon) -> Result<CutResult> {
    let m = w.num_classes();
    if m > EXACT_CLASS_LIMIT {
        return Err(Error::TooManyClasses { classes: m, limit: EXACT_CLASS_LIMIT });
    }
    let a = scaled_weights(w);
    let mut col = vec![0.0; m];
    let mut pos = 0.0f64;
    let mut neg = 0.0f64;
    let mut best = 0.0f64;
    let mut best_mask = 0u64;
    let mut best_positive = true;
    let mut gray = 0u64;
    for k in 1u64..1u64 << m {
        let bit = k.trailing_zeros() as usize;
        let adding = gray >> bit & 1 == 0;
        gray ^= 1 << bit;
        let row = &a[bit * m..(bit + 1) * m];
        for j in 0..m {
            let old = col[j];
            let new = if adding { old + row[j] } else { old - row[j] };
            pos += new.max(0.0) - old.max(0.0);
            neg += new.min(0.0) - old.min(0.0);
            col[j] = new;
        }
        if pos > best {
            best = pos;
            best_mask = gray;
            best_positive = true;
        }
        if -neg > best {
            best = -neg;
            best_mask = gray;
            best_positive = false;
        }
    }
    // Reconstruct the witness from the best subset.
    let s = mask_to_vec(best_mask, m);
    let mut cols = vec![0.0; m];
    for &i in &s {
        for j in 0..m {
            cols[j] += a[i * m + j];
        }
    }
    // A zero column sum is value-neutral; include it for determinism.
    let t: Vec<usize> = (0..m)
        .filter(|&j| if best_positive { cols[j] >= 0.0 } else { cols[j] <= 0.0 })
        .collect();
    let value: f64 = t.iter().map(|&j| cols[j]).sum();
    let witness = CutWitness { s, t, value, signed: false };
    Ok(CutResult { lower: value.abs(), upper: value.abs(), witness, method: SolveMethod::Exact })
}

// `a` is symmetric (λ_iλ_j v_ij of a symmetric graphon), so both half-steps
// can accumulate contiguous rows.
fn alternate_once(a: &[f64], m: usize, s: &mut Vec<bool>, maximize: bool) -> (Vec<bool>, f64) {
    let mut t = vec![false; m];
    let mut value = 0.0;
    let mut cols = vec![0.0; m];
    let mut rows = vec![0.0; m];
    for _ in 0..MAX_ALTERNATIONS {
        cols.iter_mut().for_each(|c| *c = 0.0);
        for (i, &inc) in s.iter().enumerate() {
            if inc {
                let row = &a[i * m..(i + 1) * m];
                for (c, &v) in cols.iter_mut().zip(row) {
                    *c += v;
                }
            }
        }
        let new_t: Vec<bool> = cols
            .iter()
            .map(|&c| if maximize { c >= 0.0 } else { c <= 0.0 })
            .collect();
        rows.iter_mut().for_each(|r| *r = 0.0);
        for (j, &inc) in new_t.iter().enumerate() {
            if inc {
                let row = &a[j * m..(j + 1) * m];
                for (r, &v) in rows.iter_mut().zip(row) {
                    *r += v;
                }
            }
        }
        let new_s: Vec<bool> = rows
            .iter()
            .map(|&r| if maximize { r >= 0.0 } else { r <= 0.0 })
            .collect();
        let new_value: f64 = rows.iter().zip(&new_s).filter(|(_, &inc)| inc).map(|(r, _)| r).sum();
        let stable = new_s == *s && new_t == t;
        *s = new_s;
        t = new_t;
        value = new_value;
        if stable {
            break;
        }
    }
    (t, value)
}

/// Alternating maximization of `|⟨W, 1_{S×T}⟩|` from random starts. The
/// returned `lower` is the best value found; `upper = ‖W‖₁` is always valid.
pub fn cut_norm_heuristic(w: &StepGraphon, restarts: usize, seed: u64) -> CutResult {
    let m = w.num_classes();
    let a = scaled_weights(w);
    let l1 = w.lp_norm(1.0).expect("p=1 is valid");
    let mut best_value = 0.0f64;
    let mut best: Option<(Vec<bool>, Vec<bool>)> = None;
    for r in 0..restarts.max(1) {
        let mut stream = Stream::new(rng::derive(seed, Tag::CutRestart, r as u64));
        let start: Vec<bool> = (0..m).map(|_| stream.next_bool()).collect();
        for maximize in [true, false] {
            let mut s = start.clone();
            let (t, value) = alternate_once(&a, m, &mut s, maximize);
            if value.abs() > best_value.abs() {
                best_value = value;
                best = Some((s, t));
            }
        }
    }
    let (s, t) = best.unwrap_or((vec![false; m], vec![false; m]));
    let witness = CutWitness {
        s: (0..m).filter(|&i| s[i]).collect(),
        t: (0..m).filter(|&j| t[j]).collect(),
        value: best_value,
        signed: false,
    };
    CutResult {
        lower: best_value.abs(),
        upper: l1,
        witness,
        method: SolveMethod::Alternating,
    }
}

/// Exact solver when the grid is small enough, alternating otherwise.
pub fn cut_norm(w: &StepGraphon) -> CutResult {
    cut_norm_with(w, DEFAULT_RESTARTS, DEFAULT_SEED)
}

pub fn cut_norm_with(w: &StepGraphon, restarts: usize, seed: u64) -> CutResult {
    if w.num_classes() <= EXACT_CLASS_LIMIT {
        cut_norm_exact(w).expect("class count checked")
    } else {
        cut_norm_heuristic(w, restarts, seed)
    }
}

/// `‖W‖_{∞→1} = sup_{f,g ∈ {±1}^m} |Σ λ_iλ_j v_ij f_i g_j|`, exact up to the
/// class limit (Gray code over `f`, greedy signs for `g`), else alternating.
/// Satisfies `‖W‖□ ≤ ‖W‖_{∞→1} ≤ 4‖W‖□`.
pub fn infty_to_one_norm(w: &StepGraphon) -> CutResult {
    infty_to_one_norm_with(w, DEFAULT_RESTARTS, DEFAULT_SEED)
}

pub fn infty_to_one_norm_with(w: &StepGraphon, restarts: usize, seed: u64) -> CutResult {
    let m = w.num_classes();
    let a = scaled_weights(w);
    if m <= EXACT_CLASS_LIMIT {
        // f and −f give the same value, so pin f_0 = +1.
        let mut col = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                col[j] += a[i * m + j];
            }
        }
        let mut val: f64 = col.iter().map(|c| c.abs()).sum();
        let mut best = val;
        let mut best_mask = (1u64 << m) - 1; // mask of +1 entries
        let mut mask = best_mask;
        let free = m - 1;
        for k in 1u64..1u64 << free {
            let bit = (k.trailing_zeros() + 1) as usize; // skip class 0
            let flipping_to_minus = mask >> bit & 1 == 1;
            let sign = if flipping_to_minus { -2.0 } else { 2.0 };
            mask ^= 1 << bit;
            let row = &a[bit * m..(bit + 1) * m];
            for j in 0..m {
                let old = col[j];
                let new = old + sign * row[j];
                val += new.abs() - old.abs();
                col[j] = new;
            }
            if val > best {
                best = val;
                best_mask = mask;
            }
        }
        // Rebuild the optimum for an honest witness value.
        let mut cols = vec![0.0; m];
        for i in 0..m {
            let f = if best_mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            for j in 0..m {
                cols[j] += f * a[i * m + j];
            }
        }
        let t: Vec<usize> = (0..m).filter(|&j| cols[j] >= 0.0).collect();
        let value: f64 = cols.iter().map(|c| c.abs()).sum();
        let witness = CutWitness { s: mask_to_vec(best_mask, m), t, value, signed: true };
        CutResult { lower: value, upper: value, witness, method: SolveMethod::Exact }
    } else {
        let l1 = w.lp_norm(1.0).expect("p=1 is valid");
        let mut best_val = 0.0f64;
        let mut best_f: Vec<f64> = vec![1.0; m];
        let mut best_g: Vec<f64> = vec![1.0; m];
        for r in 0..restarts.max(1) {
            let mut stream = Stream::new(rng::derive(seed, Tag::CutRestart, r as u64));
            let mut f: Vec<f64> =
                (0..m).map(|_| if stream.next_bool() { 1.0 } else { -1.0 }).collect();
            let mut g = vec![1.0; m];
            for _ in 0..MAX_ALTERNATIONS {
                let mut cols = vec![0.0; m];
                for i in 0..m {
                    for j in 0..m {
                        cols[j] += f[i] * a[i * m + j];
                    }
                }
                let new_g: Vec<f64> =
                    cols.iter().map(|&c| if c >= 0.0 { 1.0 } else { -1.0 }).collect();
                let mut rows = vec![0.0; m];
                for i in 0..m {
                    for j in 0..m {
                        rows[i] += new_g[j] * a[i * m + j];
                    }
                }
                let new_f: Vec<f64> =
                    rows.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
                let stable = new_f == f && new_g == g;
                f = new_f;
                g = new_g;
                if stable {
                    break;
                }
            }
            let mut val = 0.0;
            for i in 0..m {
                for j in 0..m {
                    val += f[i] * g[j] * a[i * m + j];
                }
            }
            if val.abs() > best_val.abs() {
                best_val = val;
                best_f = f;
                best_g = g;
            }
        }
        let witness = CutWitness {
            s: (0..m).filter(|&i| best_f[i] > 0.0).collect(),
            t: (0..m).filter(|&j| best_g[j] > 0.0).collect(),
            value: best_val,
            signed: true,
        };
        CutResult { lower: best_val.abs(), upper: l1, witness, method: SolveMethod::Alternating }
    }
}

/// `d□(U,W) = ‖U − W‖□` on the common refinement of the two grids.
pub fn d_cut(u: &StepGraphon, w: &StepGraphon) -> Result<CutResult> {
    d_cut_with(u, w, DEFAULT_RESTARTS, DEFAULT_SEED)
}

pub fn d_cut_with(u: &StepGraphon, w: &StepGraphon, restarts: usize, seed: u64) -> Result<CutResult> {
    let (ru, rw) = common_refine(u, w)?;
    let diff = ru.sub(&rw)?;
    Ok(cut_norm_with(&diff, restarts, seed))
}

/// Search controls for [`delta_cut_upper`].
#[derive(Debug, Clone)]
pub struct DeltaOptions {
    /// Common equipartition both operands are re-gridded to.
    pub classes: usize,
    /// Random restarts of the swap hill-climb (ignored by the exact branch).
    pub budget: usize,
    pub seed: u64,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { classes: 24, budget: 8, seed: DEFAULT_SEED }
    }
}

/// Certified upper bound on `δ□` of the re-gridded pair, plus the re-gridding
/// error of each operand (cut-norm upper bounds of `X − X_regrid`).
#[derive(Debug, Clone, Serialize)]
pub struct DeltaBound {
    pub upper: f64,
    pub certified: bool,
    pub permutation: Vec<usize>,
    pub regrid_error: [f64; 2],
}

/// Upper bound on `δ□(U,W)` over class permutations of a common
/// equipartition: exact over all permutations when `classes ≤ 8`, otherwise a
/// degree-profile greedy seed plus pairwise-swap hill climbing with random
/// restarts.
pub fn delta_cut_upper(u: &StepGraphon, w: &StepGraphon, opts: &DeltaOptions) -> Result<DeltaBound> {
    let nc = opts.classes;
    let ur = u.regrid_equipartition(nc)?;
    let wr = w.regrid_equipartition(nc)?;
    let err_u = d_cut(u, &ur)?.upper;
    let err_w = d_cut(w, &wr)?.upper;

    if nc <= 8 {
        let mut perm: Vec<usize> = (0..nc).collect();
        let mut best_perm = perm.clone();
        let mut best = f64::INFINITY;
        let mut c = vec![0usize; nc];
        let eval = |perm: &[usize], best: &mut f64, best_perm: &mut Vec<usize>| {
            let diff = ur.permute_classes(perm).unwrap().sub(&wr).unwrap();
            let v = cut_norm_exact(&diff).expect("nc ≤ 8").lower;
            if v < *best {
                *best = v;
                *best_perm = perm.to_vec();
            }
        };
        eval(&perm, &mut best, &mut best_perm);
        // Heap's algorithm.
        let mut i = 0;
        while i < nc {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                eval(&perm, &mut best, &mut best_perm);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        let plan = OverlayPlan::new(best_perm, ur.lengths(), wr.lengths())?;
        return Ok(DeltaBound {
            upper: best,
            certified: true,
            permutation: plan.permutation().to_vec(),
            regrid_error: [err_u, err_w],
        });
    }

    let eval_seed = rng::derive(opts.seed, Tag::OverlayRestart, u64::MAX);
    let estimate = |perm: &[usize]| -> f64 {
        let diff = ur.permute_classes(perm).unwrap().sub(&wr).unwrap();
        cut_norm_with(&diff, 4, eval_seed).lower
    };
    let hill_climb = |start: Vec<usize>| -> (Vec<usize>, f64) {
        let mut perm = start;
        let mut score = estimate(&perm);
        for _pass in 0..50 {
            let mut improved = false;
            for i in 0..nc {
                for j in i + 1..nc {
                    perm.swap(i, j);
                    let s = estimate(&perm);
                    if s + 1e-15 < score {
                        score = s;
                        improved = true;
                    } else {
                        perm.swap(i, j);
                    }
                }
            }
            if !improved {
                break;
            }
        }
        (perm, score)
    };

    // Greedy seed: align classes by degree-profile rank.
    let rank = |g: &StepGraphon| -> Vec<usize> {
        let rs = g.row_sums();
        let mut idx: Vec<usize> = (0..nc).collect();
        idx.sort_by(|&a, &b| rs[a].partial_cmp(&rs[b]).unwrap().then(a.cmp(&b)));
        idx
    };
    let su = rank(&ur);
    let sw = rank(&wr);
    let mut seed_perm = vec![0usize; nc];
    for k in 0..nc {
        seed_perm[sw[k]] = su[k];
    }
    let (mut best_perm, mut best_score) = hill_climb(seed_perm);
    for r in 0..opts.budget {
        let mut stream = Stream::new(rng::derive(opts.seed, Tag::OverlayRestart, r as u64));
        let mut start: Vec<usize> = (0..nc).collect();
        stream.shuffle(&mut start);
        let (p, s) = hill_climb(start);
        if s < best_score {
            best_score = s;
            best_perm = p;
        }
    }
    let plan = OverlayPlan::new(best_perm, ur.lengths(), wr.lengths())?;
    let final_diff = plan.apply(&ur)?.sub(&wr)?;
    let final_result = cut_norm(&final_diff);
    Ok(DeltaBound {
        upper: final_result.upper,
        certified: final_result.method == SolveMethod::Exact,
        permutation: plan.permutation().to_vec(),
        regrid_error: [err_u, err_w],
    })
}

/// `|𝔼U − 𝔼W| ≤ δ□(U,W)`: the mean is invariant under overlays, and the full
/// square is an admissible cut set.
pub fn delta_cut_lower(u: &StepGraphon, w: &StepGraphon) -> f64 {
    (u.mean() - w.mean()).abs()
}

/// Support-box lower bound: for any `s ∈ (0,1]` and every overlay `σ`,
/// `‖U − W^σ‖□ ≥ ⟨U, 1_{[0,s]²}⟩ − s²‖W‖_∞`. Taken in both directions.
pub fn delta_cut_lower_box(u: &StepGraphon, w: &StepGraphon, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("box side must lie in (0,1], got {s}")));
    }
    let box_mass = |g: &StepGraphon| -> f64 {
        let cum = g.cumulative();
        let m = g.num_classes();
        let mut ov = vec![0.0; m];
        for i in 0..m {
            ov[i] = (cum[i + 1].min(s) - cum[i]).max(0.0);
        }
        let mut sum = 0.0;
        for i in 0..m {
            if ov[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                sum += ov[i] * ov[j] * g.value(i, j);
            }
        }
        sum
    };
    let a = box_mass(u) - s * s * w.lp_norm(f64::INFINITY)?;
    let b = box_mass(w) - s * s * u.lp_norm(f64::INFINITY)?;
    Ok(a.max(b).max(0.0))
}
