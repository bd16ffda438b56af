//! Document reconstruction loss terms over plain probability arrays.
//!
//! Predictions are matched to targets by minimum-cost bipartite assignment.
//! Matched pairs are scored on class, box overlap and teacher-forced token
//! likelihoods; unmatched predictions are pushed toward the no-object class.
//! Nothing here differentiates anything: these are the numeric values a
//! training loop would minimize.

use thiserror::Error;

use crate::matrix::CostMatrix;
use crate::metrics::iou;
use crate::model::{BoundingBox, Category};

/// Number of class slots: the four categories plus no-object.
pub const NUM_CLASSES: usize = 5;
/// Class slot of "no element".
pub const NO_OBJECT: usize = 4;
/// Floor applied to probabilities before taking logs.
pub const LOG_EPS: f64 = 1e-9;
/// Tokens of the element header: category plus four coordinates.
pub const HEADER_LEN: usize = 5;
/// Query count of the reference decoder; the matching itself accepts any `N >= K`.
pub const DEFAULT_QUERIES: usize = 200;
/// Confidence below which a decoded element is dropped at inference time.
pub const CONFIDENCE_THRESHOLD: f64 = 0.8;

const PROB_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("{targets} targets cannot be matched injectively into {predictions} predictions")]
    TooManyTargets { targets: usize, predictions: usize },
    #[error("cost matrix has non-finite entries")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not a probability vector: {0}")]
    NotAProbability(String),
    #[error("target {target} token {position} = {token} outside vocabulary of {vocab}")]
    TokenOutOfRange { target: usize, position: usize, token: usize, vocab: usize },
}

/// One decoder query: class distribution, box and per-step token distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementPrediction {
    /// Over `[Paragraph, Table, Formula, Figure, NoObject]`.
    pub class_probs: Vec<f64>,
    pub bbox: BoundingBox,
    /// `L` distributions over the token vocabulary.
    pub token_probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementTarget {
    pub class: Category,
    pub bbox: BoundingBox,
    /// Token ids padded to `L`.
    pub tokens: Vec<usize>,
    /// True on real tokens, false on padding.
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub discrimination: f64,
    pub transcription: f64,
    pub reconstruction: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { discrimination: 1.0, transcription: 1.0, reconstruction: 1.0 }
    }
}

/// How box overlap enters the matching cost and the discrimination loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IouTerm {
    /// `1 - IoU`: better overlap lowers the cost.
    #[default]
    Complement,
    /// `+IoU` exactly as the loss is usually printed; better overlap raises the cost.
    Raw,
}

impl IouTerm {
    fn apply(self, overlap: f64) -> f64 {
        match self {
            IouTerm::Complement => 1.0 - overlap,
            IouTerm::Raw => overlap,
        }
    }
}

fn nll(p: f64) -> f64 {
    -p.max(LOG_EPS).ln()
}

/// Target-to-prediction matching.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `target_to_pred[k]` is the prediction matched to target `k`.
    pub target_to_pred: Vec<usize>,
    pub cost: f64,
}

impl Assignment {
    /// Predictions not matched to any target, ascending.
    pub fn unmatched(&self, predictions: usize) -> Vec<usize> {
        let mut taken = vec![false; predictions];
        for &n in &self.target_to_pred {
            taken[n] = true;
        }
        (0..predictions).filter(|&n| !taken[n]).collect()
    }
}

/// Minimum-cost injective assignment of the `K` rows of `cost` to its `N >= K`
/// columns. Among optimal assignments the lexicographically smallest
/// `target_to_pred` is returned.
pub fn hungarian_assign(cost: &CostMatrix) -> Result<Assignment, LossError> {
    let (k, n) = (cost.rows(), cost.cols());
    if k > n {
        return Err(LossError::TooManyTargets { targets: k, predictions: n });
    }
    if !cost.is_finite() {
        return Err(LossError::NonFinite);
    }
    if k == 0 {
        return Ok(Assignment { target_to_pred: Vec::new(), cost: 0.0 });
    }
    let scale = 1.0 + (0..k).flat_map(|i| cost.row(i).iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;

    let mut fixed: Vec<usize> = Vec::with_capacity(k);
    let mut free_cols: Vec<usize> = (0..n).collect();
    let mut current = solve(cost, 0, &free_cols);
    for row in 0..k {
        let chosen = current.assignment[0];
        let remaining_opt = current.total;
        let mut pick = chosen;
        for (ci, &col) in free_cols.iter().enumerate() {
            if col >= chosen {
                break;
            }
            // only tight edges can belong to an optimal assignment
            let reduced = cost[(row, col)] - current.row_dual[0] - current.col_dual[ci];
            if reduced > tol {
                continue;
            }
            let rest: Vec<usize> = free_cols.iter().copied().filter(|&c| c != col).collect();
            let candidate = if row + 1 < k { solve(cost, row + 1, &rest) } else { Solution::empty() };
            if cost[(row, col)] + candidate.total <= remaining_opt + tol {
                pick = col;
                current = candidate;
                break;
            }
        }
        fixed.push(pick);
        free_cols.retain(|&c| c != pick);
        if pick == chosen {
            current = if row + 1 < k {
                Solution {
                    assignment: current.assignment[1..].to_vec(),
                    total: current.total - cost[(row, pick)],
                    row_dual: current.row_dual[1..].to_vec(),
                    col_dual: drop_col(&current.col_dual, &current.cols, pick),
                    cols: free_cols.clone(),
                }
            } else {
                Solution::empty()
            };
        }
    }
    let total = fixed.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Ok(Assignment { target_to_pred: fixed, cost: total })
}

fn drop_col(duals: &[f64], cols: &[usize], col: usize) -> Vec<f64> {
    cols.iter().zip(duals).filter(|(&c, _)| c != col).map(|(_, &d)| d).collect()
}

/// Optimal assignment of rows `first_row..` into `cols`, with dual potentials.
struct Solution {
    /// Column (original index) for each row from `first_row` on.
    assignment: Vec<usize>,
    total: f64,
    row_dual: Vec<f64>,
    /// Dual per entry of `cols`.
    col_dual: Vec<f64>,
    cols: Vec<usize>,
}

impl Solution {
    fn empty() -> Self {
        Self { assignment: Vec::new(), total: 0.0, row_dual: Vec::new(), col_dual: Vec::new(), cols: Vec::new() }
    }
}

/// Shortest augmenting path Hungarian method for `rows <= cols`, 1-based
/// internally with slot 0 as the virtual source.
fn solve(cost: &CostMatrix, first_row: usize, cols: &[usize]) -> Solution {
    let rows = cost.rows() - first_row;
    let m = cols.len();
    let c = |i: usize, j: usize| cost[(first_row + i - 1, cols[j - 1])];

    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = c(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; rows];
    for j in 1..=m {
        if p[j] > 0 {
            assignment[p[j] - 1] = cols[j - 1];
        }
    }
    let total = assignment.iter().enumerate().map(|(i, &col)| cost[(first_row + i, col)]).sum();
    Solution { assignment, total, row_dual: u[1..].to_vec(), col_dual: v[1..].to_vec(), cols: cols.to_vec() }
}

fn check_distribution(what: impl FnOnce() -> String, probs: &[f64]) -> Result<(), LossError> {
    let sum: f64 = probs.iter().sum();
    if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(LossError::NotAProbability(format!("{} (sum {sum})", what())));
    }
    Ok(())
}

fn check_inputs(targets: &[ElementTarget], preds: &[ElementPrediction]) -> Result<(), LossError> {
    for (n, pred) in preds.iter().enumerate() {
        if pred.class_probs.len() != NUM_CLASSES {
            return Err(LossError::Shape(format!("prediction {n} has {} class slots, expected {NUM_CLASSES}", pred.class_probs.len())));
        }
        check_distribution(|| format!("prediction {n} class probabilities"), &pred.class_probs)?;
        for (t, dist) in pred.token_probs.iter().enumerate() {
            check_distribution(|| format!("prediction {n} step {t}"), dist)?;
        }
    }
    for (k, target) in targets.iter().enumerate() {
        if target.tokens.len() != target.mask.len() {
            return Err(LossError::Shape(format!(
                "target {k} has {} tokens but mask length {}",
                target.tokens.len(),
                target.mask.len()
            )));
        }
    }
    Ok(())
}

/// Pairwise matching cost: class negative log-likelihood plus the box term.
pub fn matching_cost(
    targets: &[ElementTarget],
    preds: &[ElementPrediction],
    iou_term: IouTerm,
) -> Result<CostMatrix, LossError> {
    check_inputs(targets, preds)?;
    Ok(CostMatrix::from_fn(targets.len(), preds.len(), |k, n| {
        nll(preds[n].class_probs[targets[k].class.index()]) + iou_term.apply(iou(&preds[n].bbox, &targets[k].bbox))
    }))
}

/// Teacher-forced token negative log-likelihood of `target` under `pred` over
/// `positions`, masked.
fn token_nll(
    k: usize,
    target: &ElementTarget,
    pred: &ElementPrediction,
    positions: std::ops::Range<usize>,
) -> Result<f64, LossError> {
    if pred.token_probs.len() != target.tokens.len() {
        return Err(LossError::Shape(format!(
            "target {k} has length {} but its prediction has {} steps",
            target.tokens.len(),
            pred.token_probs.len()
        )));
    }
    let mut sum = 0.0;
    for t in positions.start.min(target.tokens.len())..positions.end.min(target.tokens.len()) {
        let token = target.tokens[t];
        let dist = &pred.token_probs[t];
        if token >= dist.len() {
            return Err(LossError::TokenOutOfRange { target: k, position: t, token, vocab: dist.len() });
        }
        if target.mask[t] {
            sum += nll(dist[token]);
        }
    }
    Ok(sum)
}

fn check_assignment(targets: &[ElementTarget], preds: &[ElementPrediction], a: &Assignment) -> Result<(), LossError> {
    if a.target_to_pred.len() != targets.len() {
        return Err(LossError::Shape(format!("assignment covers {} of {} targets", a.target_to_pred.len(), targets.len())));
    }
    let mut seen = vec![false; preds.len()];
    for &n in &a.target_to_pred {
        if n >= preds.len() || std::mem::replace(&mut seen[n], true) {
            return Err(LossError::Shape(format!("assignment is not injective into {} predictions", preds.len())));
        }
    }
    Ok(())
}

/// Class, box and header-token loss over the matching, with unmatched
/// predictions scored against no-object.
pub fn element_discrimination_loss(
    targets: &[ElementTarget],
    preds: &[ElementPrediction],
    assignment: &Assignment,
    iou_term: IouTerm,
) -> Result<f64, LossError> {
    check_inputs(targets, preds)?;
    check_assignment(targets, preds, assignment)?;
    let mut loss = 0.0;
    for (k, &n) in assignment.target_to_pred.iter().enumerate() {
        let (target, pred) = (&targets[k], &preds[n]);
        loss += nll(pred.class_probs[target.class.index()]) + iou_term.apply(iou(&pred.bbox, &target.bbox));
        loss += token_nll(k, target, pred, 0..HEADER_LEN)?;
    }
    for n in assignment.unmatched(preds.len()) {
        loss += nll(preds[n].class_probs[NO_OBJECT]);
    }
    Ok(loss)
}

/// Teacher-forced negative log-likelihood of the transcription tokens (every
/// position after the header) of matched targets.
pub fn element_transcription_loss(
    targets: &[ElementTarget],
    preds: &[ElementPrediction],
    assignment: &Assignment,
) -> Result<f64, LossError> {
    check_inputs(targets, preds)?;
    check_assignment(targets, preds, assignment)?;
    let mut loss = 0.0;
    for (k, &n) in assignment.target_to_pred.iter().enumerate() {
        loss += token_nll(k, &targets[k], &preds[n], HEADER_LEN..usize::MAX)?;
    }
    Ok(loss)
}

/// One minus the cosine similarity of the masked, flattened token-id arrays.
/// Two all-zero arrays give 0; exactly one all-zero array gives 1.
pub fn sequence_reconstruction_loss(
    predicted: &[Vec<usize>],
    targets: &[Vec<usize>],
    mask: &[Vec<bool>],
) -> Result<f64, LossError> {
    if predicted.len() != targets.len() || targets.len() != mask.len() {
        return Err(LossError::Shape(format!(
            "{} predicted rows, {} target rows, {} mask rows",
            predicted.len(),
            targets.len(),
            mask.len()
        )));
    }
    let (mut dot, mut pp, mut tt) = (0.0f64, 0.0f64, 0.0f64);
    let mut identical = true;
    for (k, ((p, t), m)) in predicted.iter().zip(targets).zip(mask).enumerate() {
        if p.len() != t.len() || t.len() != m.len() {
            return Err(LossError::Shape(format!("row {k} lengths {} / {} / {}", p.len(), t.len(), m.len())));
        }
        for ((&p, &t), &m) in p.iter().zip(t).zip(m) {
            let (p, t) = if m { (p as f64, t as f64) } else { (0.0, 0.0) };
            identical &= p == t;
            dot += p * t;
            pp += p * p;
            tt += t * t;
        }
    }
    if identical {
        return Ok(0.0);
    }
    if pp == 0.0 || tt == 0.0 {
        return Ok(1.0);
    }
    let cosine = (dot / (pp.sqrt() * tt.sqrt())).clamp(-1.0, 1.0);
    Ok(1.0 - cosine)
}

pub fn total_loss(discrimination: f64, transcription: f64, reconstruction: f64, w: &LossWeights) -> f64 {
    w.discrimination * discrimination + w.transcription * transcription + w.reconstruction * reconstruction
}

/// Most likely token per step; lowest id on ties.
pub fn argmax_tokens(pred: &ElementPrediction) -> Vec<usize> {
    pred.token_probs
        .iter()
        .map(|dist| {
            dist.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best }).0
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossConfig {
    pub weights: LossWeights,
    pub iou_term: IouTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub assignment: Assignment,
    pub discrimination: f64,
    pub transcription: f64,
    pub reconstruction: f64,
    pub total: f64,
}

/// Matches predictions to targets and evaluates every term.
pub fn document_reconstruction_loss(
    targets: &[ElementTarget],
    preds: &[ElementPrediction],
    cfg: &LossConfig,
) -> Result<LossBreakdown, LossError> {
    let costs = matching_cost(targets, preds, cfg.iou_term)?;
    let assignment = hungarian_assign(&costs)?;
    let discrimination = element_discrimination_loss(targets, preds, &assignment, cfg.iou_term)?;
    let transcription = element_transcription_loss(targets, preds, &assignment)?;
    let predicted: Vec<Vec<usize>> = assignment.target_to_pred.iter().map(|&n| argmax_tokens(&preds[n])).collect();
    let target_tokens: Vec<Vec<usize>> = targets.iter().map(|t| t.tokens.clone()).collect();
    let masks: Vec<Vec<bool>> = targets.iter().map(|t| t.mask.clone()).collect();
    let reconstruction = sequence_reconstruction_loss(&predicted, &target_tokens, &masks)?;
    let total = total_loss(discrimination, transcription, reconstruction, &cfg.weights);
    Ok(LossBreakdown { assignment, discrimination, transcription, reconstruction, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1)
    }

    fn one_hot(len: usize, hot: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[hot] = 1.0;
        v
    }

    fn perfect(target: &ElementTarget, vocab: usize) -> ElementPrediction {
        ElementPrediction {
            class_probs: one_hot(NUM_CLASSES, target.class.index()),
            bbox: target.bbox,
            token_probs: target.tokens.iter().map(|&t| one_hot(vocab, t)).collect(),
        }
    }

    fn no_object(len: usize, vocab: usize) -> ElementPrediction {
        ElementPrediction {
            class_probs: one_hot(NUM_CLASSES, NO_OBJECT),
            bbox: bx(0.0, 0.0, 1.0, 1.0),
            token_probs: vec![one_hot(vocab, 0); len],
        }
    }

    fn target(class: Category, tokens: Vec<usize>, real: usize) -> ElementTarget {
        let mask = (0..tokens.len()).map(|i| i < real).collect();
        ElementTarget { class, bbox: bx(10.0, 10.0, 50.0, 50.0), tokens, mask }
    }

    fn brute_force(cost: &CostMatrix) -> (f64, Vec<usize>) {
        fn go(cost: &CostMatrix, row: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
            if row == cost.rows() {
                let total: f64 = cur.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
                if total < best.0 {
                    *best = (total, cur.clone());
                }
                return;
            }
            for j in 0..cost.cols() {
                if !used[j] {
                    used[j] = true;
                    cur.push(j);
                    go(cost, row + 1, used, cur, best);
                    cur.pop();
                    used[j] = false;
                }
            }
        }
        let mut best = (f64::INFINITY, Vec::new());
        go(cost, 0, &mut vec![false; cost.cols()], &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn hungarian_small() {
        let a = hungarian_assign(&CostMatrix::from_rows(&[vec![0.0]]).unwrap()).unwrap();
        assert_eq!((a.target_to_pred, a.cost), (vec![0], 0.0));
        let a = hungarian_assign(&CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap()).unwrap();
        assert_eq!((a.target_to_pred, a.cost), (vec![0, 1], 2.0));
        let wide = CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0]]).unwrap();
        // optimum 3 via [1, 0] or [2, 1]
        assert_eq!(hungarian_assign(&wide).unwrap().target_to_pred, vec![1, 0]);
        let tall = CostMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(hungarian_assign(&tall), Err(LossError::TooManyTargets { targets: 2, predictions: 1 }));
        let nan = CostMatrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert_eq!(hungarian_assign(&nan), Err(LossError::NonFinite));
    }

    #[test]
    fn hungarian_ties_pick_lexicographically_smallest() {
        let flat = CostMatrix::from_fn(3, 4, |_, _| 1.0);
        assert_eq!(hungarian_assign(&flat).unwrap().target_to_pred, vec![0, 1, 2]);
        let m = CostMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        // optimal cost 0: [1,0], [1,2], [2,0]; smallest is [1,0]
        assert_eq!(hungarian_assign(&m).unwrap().target_to_pred, vec![1, 0]);
    }

    #[test]
    fn matching_cost_values() {
        let t = target(Category::Table, vec![1, 2], 2);
        let mut p = perfect(&t, 4);
        assert_eq!(matching_cost(std::slice::from_ref(&t), &[p.clone()], IouTerm::Complement).unwrap()[(0, 0)], 0.0);
        p.bbox = bx(100.0, 100.0, 200.0, 200.0);
        assert_eq!(matching_cost(std::slice::from_ref(&t), &[p.clone()], IouTerm::Complement).unwrap()[(0, 0)], 1.0);
        // p(class) = 0.5, IoU = 25 / 175
        let t2 = ElementTarget { bbox: bx(0.0, 0.0, 10.0, 10.0), ..t.clone() };
        p.class_probs = vec![0.25, 0.5, 0.0, 0.0, 0.25];
        p.bbox = bx(5.0, 5.0, 15.0, 15.0);
        let c = matching_cost(std::slice::from_ref(&t2), &[p.clone()], IouTerm::Complement).unwrap()[(0, 0)];
        assert!((c - (2f64.ln() + 6.0 / 7.0)).abs() < 1e-12);
        assert!((c - 1.5503).abs() < 1e-4);
        let raw = matching_cost(&[t2], &[p], IouTerm::Raw).unwrap()[(0, 0)];
        assert!((raw - (2f64.ln() + 1.0 / 7.0)).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictions_cost_nothing() {
        let targets = vec![target(Category::Paragraph, vec![0, 3, 4, 5, 6, 7, 8, 0], 7), target(Category::Figure, vec![3, 1, 1, 2, 2, 0, 0, 0], 5)];
        let mut preds: Vec<ElementPrediction> = targets.iter().map(|t| perfect(t, 9)).collect();
        preds.insert(1, no_object(8, 9));
        let b = document_reconstruction_loss(&targets, &preds, &LossConfig::default()).unwrap();
        assert_eq!(b.assignment.target_to_pred, vec![0, 2]);
        assert_eq!((b.discrimination, b.transcription, b.reconstruction, b.total), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn single_uncertain_coordinate() {
        let t = target(Category::Formula, vec![2, 1, 1, 3, 3, 4], 6);
        let mut p = perfect(&t, 5);
        p.token_probs[3] = vec![0.0, 0.0, 0.5, 0.5, 0.0];
        let a = Assignment { target_to_pred: vec![0], cost: 0.0 };
        let loss = element_discrimination_loss(std::slice::from_ref(&t), &[p.clone()], &a, IouTerm::Complement).unwrap();
        assert!((loss - 2f64.ln()).abs() < 1e-12);
        assert_eq!(element_transcription_loss(&[t], &[p], &a).unwrap(), 0.0);
    }

    #[test]
    fn transcription_loss_closed_forms() {
        let vocab = 16;
        let t = target(Category::Paragraph, vec![1, 2, 3, 4, 5, 9, 10, 11, 0, 0], 8);
        let mut p = perfect(&t, vocab);
        let a = Assignment { target_to_pred: vec![0], cost: 0.0 };
        for step in HEADER_LEN..10 {
            p.token_probs[step] = vec![1.0 / vocab as f64; vocab];
        }
        let loss = element_transcription_loss(&[t], &[p], &a).unwrap();
        assert!((loss - 3.0 * (vocab as f64).ln()).abs() < 1e-9);

        let figure = target(Category::Figure, vec![3, 1, 1, 2, 2, 0, 0], 5);
        let mut p = perfect(&figure, 4);
        p.token_probs[6] = vec![0.25; 4];
        assert_eq!(element_transcription_loss(&[figure], &[p], &a).unwrap(), 0.0);
    }

    #[test]
    fn cosine_cases() {
        assert_eq!(sequence_reconstruction_loss(&[vec![1, 2]], &[vec![1, 2]], &[vec![true, true]]).unwrap(), 0.0);
        assert_eq!(sequence_reconstruction_loss(&[vec![1, 0]], &[vec![0, 1]], &[vec![true, true]]).unwrap(), 1.0);
        let l = sequence_reconstruction_loss(&[vec![1, 2, 3]], &[vec![3, 2, 1]], &[vec![true; 3]]).unwrap();
        assert!((l - (1.0 - 10.0 / 14.0)).abs() < 1e-12);
        assert_eq!(sequence_reconstruction_loss(&[vec![0]], &[vec![0]], &[vec![true]]).unwrap(), 0.0);
        assert_eq!(sequence_reconstruction_loss(&[vec![5]], &[vec![0]], &[vec![true]]).unwrap(), 1.0);
        // padding is masked out
        assert_eq!(sequence_reconstruction_loss(&[vec![1, 7]], &[vec![1, 0]], &[vec![true, false]]).unwrap(), 0.0);
        assert!(sequence_reconstruction_loss(&[vec![1]], &[], &[]).is_err());
    }

    #[test]
    fn weighted_sum() {
        let unit = LossWeights::default();
        assert_eq!(total_loss(0.0, 0.0, 0.0, &unit), 0.0);
        assert_eq!(total_loss(1.0, 2.0, 3.0, &unit), 6.0);
        let w = LossWeights { discrimination: 2.0, transcription: 1.0, reconstruction: 4.0 };
        assert_eq!(total_loss(0.5, 1.5, 0.25, &w), 3.5);
    }

    #[test]
    fn input_checks() {
        let t = target(Category::Paragraph, vec![1, 2, 3, 4, 5], 5);
        let mut p = perfect(&t, 6);
        p.class_probs = vec![0.5, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(matching_cost(std::slice::from_ref(&t), &[p], IouTerm::Complement), Err(LossError::NotAProbability(_))));
        let p = perfect(&t, 6);
        let a = Assignment { target_to_pred: vec![0], cost: 0.0 };
        let bad_token = ElementTarget { tokens: vec![1, 2, 3, 4, 9], ..t.clone() };
        assert!(matches!(element_discrimination_loss(&[bad_token], std::slice::from_ref(&p), &a, IouTerm::Complement), Err(LossError::TokenOutOfRange { .. })));
        let dup = Assignment { target_to_pred: vec![0, 0], cost: 0.0 };
        assert!(matches!(element_transcription_loss(&[t.clone(), t], &[p], &dup), Err(LossError::Shape(_))));
    }

    fn arb_matrix() -> impl Strategy<Value = CostMatrix> {
        (1usize..=5, 0usize..=2).prop_flat_map(|(k, extra)| {
            let n = k + extra;
            prop::collection::vec(0.0f64..10.0, k * n).prop_map(move |v| CostMatrix::from_fn(k, n, |i, j| v[i * n + j]))
        })
    }

    fn arb_tied_matrix() -> impl Strategy<Value = CostMatrix> {
        (1usize..=5, 0usize..=2).prop_flat_map(|(k, extra)| {
            let n = k + extra;
            prop::collection::vec(0u8..3, k * n).prop_map(move |v| CostMatrix::from_fn(k, n, |i, j| f64::from(v[i * n + j])))
        })
    }

    proptest! {
        #[test]
        fn hungarian_matches_brute_force(m in arb_matrix()) {
            let (best, _) = brute_force(&m);
            prop_assert_eq!(hungarian_assign(&m).unwrap().cost, best);
        }

        #[test]
        fn hungarian_tie_break_is_lexicographic(m in arb_tied_matrix()) {
            let a = hungarian_assign(&m).unwrap();
            let (best, first) = brute_force(&m);
            prop_assert_eq!(a.cost, best);
            prop_assert_eq!(a.target_to_pred, first);
        }
    }
}
