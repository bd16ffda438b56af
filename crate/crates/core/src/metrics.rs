//! Element costs, the document similarity metric (DSM) and NED.
//!
//! The cost of pairing ground-truth element `i` with predicted element `j` is
//! the mean of a location cost and a transcription cost:
//!
//! ```text
//! loc(i, j)  = ([c_i != c'_j] + 1 - IoU(b_i, b'_j)) / 2
//! tran(i, j) = Dist(t_i, t'_j) / Maxlen(t_i, t'_j)
//! cost(i, j) = (loc(i, j) + tran(i, j)) / 2
//! ```
//!
//! Two documents are aligned with the monotone recurrence
//! `D(i, j) = min(D(i-1, j), D(i, j-1), D(i-1, j-1)) + cost(i, j)`, and a
//! corpus scores `1 - mean(D(K, K') / max(K, K'))`.

use serde::Serialize;
use thiserror::Error;

use crate::convert::to_markdown;
use crate::matrix::CostMatrix;
use crate::model::{BoundingBox, Document, Element};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("document has no elements")]
    EmptyDocument,
    #[error("corpus length mismatch: {gt} ground-truth vs {pred} predicted documents")]
    CorpusLengthMismatch { gt: usize, pred: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Intersection over union. Identical boxes score 1 even when degenerate;
/// otherwise a zero union scores 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Levenshtein distance over Unicode scalar values.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(ca != cb);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// `Dist / Maxlen`, with two empty strings at distance 0.
pub fn normalized_edit_distance(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 0.0;
    }
    edit_distance(a, b) as f64 / max_len as f64
}

pub fn location_cost(gt: &Element, pred: &Element) -> f64 {
    let category = if gt.category == pred.category { 0.0 } else { 1.0 };
    (category + (1.0 - iou(&gt.bbox, &pred.bbox))) / 2.0
}

/// Normalized edit distance between the coordinate-free transcription strings.
pub fn transcription_cost(gt: &Element, pred: &Element) -> f64 {
    normalized_edit_distance(&gt.transcription_text(), &pred.transcription_text())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementCostBreakdown {
    pub location_cost: f64,
    pub transcription_cost: f64,
    pub total: f64,
}

impl ElementCostBreakdown {
    pub fn from_parts(location_cost: f64, transcription_cost: f64) -> Self {
        Self { location_cost, transcription_cost, total: (location_cost + transcription_cost) / 2.0 }
    }
}

pub fn element_cost(gt: &Element, pred: &Element) -> ElementCostBreakdown {
    ElementCostBreakdown::from_parts(location_cost(gt, pred), transcription_cost(gt, pred))
}

/// `cost(i, j)` for every ground-truth row `i` and predicted column `j`.
pub fn cost_matrix(gt: &Document, pred: &Document) -> CostMatrix {
    let gt_text: Vec<String> = gt.elements.iter().map(Element::transcription_text).collect();
    let pred_text: Vec<String> = pred.elements.iter().map(Element::transcription_text).collect();
    CostMatrix::from_fn(gt.len(), pred.len(), |i, j| {
        let loc = location_cost(&gt.elements[i], &pred.elements[j]);
        let tran = normalized_edit_distance(&gt_text[i], &pred_text[j]);
        ElementCostBreakdown::from_parts(loc, tran).total
    })
}

/// Minimum accumulated cost over monotone paths from the top-left to the
/// bottom-right cell, each visited cell paying its own cost. `None` for an
/// empty matrix.
pub fn accumulated_distance(costs: &CostMatrix) -> Option<f64> {
    let (rows, cols) = (costs.rows(), costs.cols());
    if rows == 0 || cols == 0 {
        return None;
    }
    let mut prev = vec![0.0f64; cols];
    let mut curr = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => curr[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(curr[j - 1]).min(prev[j - 1]),
            };
            curr[j] = best + costs[(i, j)];
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Some(prev[cols - 1])
}

/// DP distance between two non-empty documents.
pub fn document_distance(gt: &Document, pred: &Document) -> Result<f64, MetricError> {
    accumulated_distance(&cost_matrix(gt, pred)).ok_or(MetricError::EmptyDocument)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DocumentScore {
    pub distance: f64,
    pub max_len: usize,
    pub normalized: f64,
}

/// Per-document term of the DSM. An empty side pairs every element of the
/// other with a null element of cost 1; two empty documents score 0.
pub fn score_document(gt: &Document, pred: &Document) -> DocumentScore {
    let max_len = gt.len().max(pred.len());
    let distance = if gt.is_empty() || pred.is_empty() {
        max_len as f64
    } else {
        accumulated_distance(&cost_matrix(gt, pred)).unwrap_or(0.0)
    };
    let normalized = if max_len == 0 { 0.0 } else { distance / max_len as f64 };
    DocumentScore { distance, max_len, normalized }
}

/// `1 - Dist/Maxlen`; 1 when both strings are empty.
pub fn ned_similarity(gt: &str, pred: &str) -> f64 {
    1.0 - normalized_edit_distance(gt, pred)
}

/// NED similarity of the markdown renderings of two documents.
pub fn document_ned(gt: &Document, pred: &Document) -> f64 {
    ned_similarity(&to_markdown(gt), &to_markdown(pred))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_document: Vec<DocumentScore>,
    pub dsm: f64,
    pub ned: f64,
    pub corpus_size: usize,
}

impl EvalReport {
    /// Reduces per-document scores and NED similarities (same order, same length).
    pub fn from_scores(per_document: Vec<DocumentScore>, ned: &[f64]) -> Result<Self, MetricError> {
        if per_document.is_empty() {
            return Err(MetricError::EmptyCorpus);
        }
        debug_assert_eq!(per_document.len(), ned.len());
        let n = per_document.len() as f64;
        let dsm = 1.0 - per_document.iter().map(|s| s.normalized).sum::<f64>() / n;
        let ned = ned.iter().sum::<f64>() / n;
        let corpus_size = per_document.len();
        Ok(Self { per_document, dsm, ned, corpus_size })
    }
}

fn check_corpora(gt: &[Document], pred: &[Document]) -> Result<(), MetricError> {
    if gt.len() != pred.len() {
        return Err(MetricError::CorpusLengthMismatch { gt: gt.len(), pred: pred.len() });
    }
    if gt.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

/// DSM and NED over index-aligned corpora.
pub fn evaluate(gt: &[Document], pred: &[Document]) -> Result<EvalReport, MetricError> {
    check_corpora(gt, pred)?;
    let scores = gt.iter().zip(pred).map(|(g, p)| score_document(g, p)).collect();
    let ned: Vec<f64> = gt.iter().zip(pred).map(|(g, p)| document_ned(g, p)).collect();
    EvalReport::from_scores(scores, &ned)
}

/// Corpus DSM alone.
pub fn dsm(gt: &[Document], pred: &[Document]) -> Result<f64, MetricError> {
    check_corpora(gt, pred)?;
    let total: f64 = gt.iter().zip(pred).map(|(g, p)| score_document(g, p).normalized).sum();
    Ok(1.0 - total / gt.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Category, TextLine, Transcription};
    use proptest::prelude::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1)
    }

    fn formula(b: BoundingBox, s: &str) -> Element {
        Element::formula(b, s)
    }

    #[test]
    fn iou_cases() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bx(20.0, 20.0, 30.0, 30.0)), 0.0);
        // intersection 5x5 = 25, union 100 + 100 - 25 = 175
        assert!((iou(&a, &bx(5.0, 5.0, 15.0, 15.0)) - 25.0 / 175.0).abs() < 1e-15);
        let point = bx(3.0, 3.0, 3.0, 3.0);
        assert_eq!(iou(&point, &point), 1.0);
        assert_eq!(iou(&point, &bx(4.0, 4.0, 4.0, 4.0)), 0.0);
    }

    #[test]
    fn edit_distance_cases() {
        assert_eq!(edit_distance("abc", "abc"), 0);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(edit_distance("héllo", "hello"), 1);
    }

    #[test]
    fn location_cost_cases() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(location_cost(&formula(a, ""), &formula(a, "")), 0.0);
        assert_eq!(location_cost(&formula(a, ""), &Element::figure(bx(20.0, 20.0, 30.0, 30.0))), 1.0);
        let c = location_cost(&formula(a, ""), &formula(bx(5.0, 5.0, 15.0, 15.0), ""));
        assert!((c - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn transcription_cost_cases() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        assert_eq!(transcription_cost(&formula(a, "x+y"), &formula(a, "x+y")), 0.0);
        assert_eq!(transcription_cost(&Element::figure(a), &Element::figure(a)), 0.0);
        assert_eq!(transcription_cost(&formula(a, "ab"), &formula(a, "b")), 0.5);
        // paragraph coordinates do not leak into the string comparison
        let p1 = Element::paragraph(a, vec![TextLine::new(a, "ab"), TextLine::new(a, "c")]);
        let p2 = Element::paragraph(a, vec![TextLine::new(bx(1.0, 1.0, 2.0, 2.0), "ab"), TextLine::new(a, "c")]);
        assert_eq!(transcription_cost(&p1, &p2), 0.0);
        assert_eq!(transcription_cost(&p1, &formula(a, "ab\nc")), 0.0);
    }

    #[test]
    fn element_cost_is_the_mean() {
        assert_eq!(ElementCostBreakdown::from_parts(0.0, 0.0).total, 0.0);
        assert_eq!(ElementCostBreakdown::from_parts(1.0, 1.0).total, 1.0);
        assert_eq!(ElementCostBreakdown::from_parts(0.75, 0.5).total, 0.625);
        let a = bx(0.0, 0.0, 10.0, 10.0);
        let e = element_cost(&formula(a, "ab"), &Element::figure(bx(20.0, 20.0, 30.0, 30.0)));
        assert_eq!((e.location_cost, e.transcription_cost, e.total), (1.0, 1.0, 1.0));
    }

    #[test]
    fn single_cell_distance() {
        let m = CostMatrix::from_rows(&[vec![0.625]]).unwrap();
        assert_eq!(accumulated_distance(&m), Some(0.625));
        assert_eq!(accumulated_distance(&CostMatrix::from_rows(&[]).unwrap()), None);
    }

    #[test]
    fn two_by_two_matches_path_enumeration() {
        // Paths: diagonal (a + d), right-down (a + b + d), down-right (a + c + d).
        let (a, b, c, d) = (0.25, 0.5, 0.125, 0.375);
        let m = CostMatrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap();
        let oracle = [a + d, a + b + d, a + c + d].into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(accumulated_distance(&m), Some(oracle));
        assert_eq!(oracle, 0.625);
    }

    #[test]
    fn dsm_from_distance() {
        // B = 1, K = K' = 2, D = 0.625 -> 1 - 0.625 / 2
        let score = DocumentScore { distance: 0.625, max_len: 2, normalized: 0.625 / 2.0 };
        let report = EvalReport::from_scores(vec![score], &[1.0]).unwrap();
        assert_eq!(report.dsm, 0.6875);
    }

    #[test]
    fn identical_documents_score_one() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        let doc = Document::with_elements(100.0, 100.0, vec![formula(a, "x"), Element::figure(bx(0.0, 20.0, 50.0, 90.0))]);
        assert_eq!(document_distance(&doc, &doc), Ok(0.0));
        let corpus = vec![doc.clone(), doc];
        let report = evaluate(&corpus, &corpus).unwrap();
        assert_eq!((report.dsm, report.ned, report.corpus_size), (1.0, 1.0, 2));
    }

    #[test]
    fn empty_document_policy() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        let empty = Document::new(100.0, 100.0);
        let three = Document::with_elements(100.0, 100.0, vec![formula(a, "x"); 3]);
        assert_eq!(document_distance(&empty, &three), Err(MetricError::EmptyDocument));
        assert_eq!(score_document(&empty, &three), DocumentScore { distance: 3.0, max_len: 3, normalized: 1.0 });
        assert_eq!(score_document(&three, &empty).normalized, 1.0);
        assert_eq!(score_document(&empty, &empty), DocumentScore { distance: 0.0, max_len: 0, normalized: 0.0 });
    }

    #[test]
    fn corpus_errors() {
        let d = Document::new(1.0, 1.0);
        assert_eq!(dsm(std::slice::from_ref(&d), &[]), Err(MetricError::CorpusLengthMismatch { gt: 1, pred: 0 }));
        assert_eq!(evaluate(&[], &[]), Err(MetricError::EmptyCorpus));
        assert!(MetricError::CorpusLengthMismatch { gt: 1, pred: 0 }.to_string().contains("corpus length mismatch"));
    }

    #[test]
    fn ned_cases() {
        assert_eq!(ned_similarity("same", "same"), 1.0);
        assert_eq!(ned_similarity("", ""), 1.0);
        assert_eq!(ned_similarity("ab", ""), 0.0);
        assert_eq!(ned_similarity("abcd", "abed"), 0.75);
    }

    #[test]
    fn category_changes_cost_without_touching_text() {
        let a = bx(0.0, 0.0, 10.0, 10.0);
        let gt = Element::new(Category::Formula, a, Transcription::Formula { latex: "x".into() });
        let pred = Element::paragraph(a, vec![TextLine::new(a, "x")]);
        assert_eq!(element_cost(&gt, &pred).total, 0.25);
    }

    proptest! {
        #[test]
        fn edit_distance_is_a_metric(a in "[abc]{0,6}", b in "[abc]{0,6}", c in "[abc]{0,6}") {
            prop_assert_eq!(edit_distance(&a, &b), edit_distance(&b, &a));
            prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
            prop_assert_eq!(edit_distance(&a, &b) == 0, a == b);
        }

        #[test]
        fn accumulated_distance_is_transpose_symmetric(
            rows in 1usize..6, cols in 1usize..6, seed in prop::collection::vec(0.0f64..1.0, 36)
        ) {
            let m = CostMatrix::from_fn(rows, cols, |i, j| seed[i * 6 + j]);
            prop_assert_eq!(accumulated_distance(&m), accumulated_distance(&m.transpose()));
            // never above the diagonal-then-straight path, hence at most max(rows, cols)
            prop_assert!(accumulated_distance(&m).unwrap() <= rows.max(cols) as f64);
        }
    }
}
