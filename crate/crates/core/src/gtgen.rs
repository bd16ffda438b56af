//! Ground-truth assembly from layout annotations and loose text lines.
//!
//! Elements are put in reading order, every text line is handed to the element
//! that covers most of it, duplicate lines inside an element (overlapping boxes
//! with near-identical text) are consolidated, and the result is emitted as a
//! valid [`Document`] together with an account of where every input line went.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::edit_distance;
use crate::model::{
    validate_document, BoundingBox, Category, Document, DomainError, Element, TextLine, Transcription, Violation,
};
use crate::readorder::{fallback_sort, xy_cut_order, OrderConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GtError {
    #[error("assoc config: {0}")]
    Config(String),
    #[error("element {index} has {given} content but category {category}")]
    ContentMismatch { index: usize, category: Category, given: Category },
    #[error("assembled document is invalid; first problem: {}", .0[0])]
    Invalid(Vec<Violation>),
    #[error("line {index} box {bbox:?} is malformed")]
    MalformedLine { index: usize, bbox: [f64; 4] },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// A text line not yet owned by any element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawLine {
    pub bbox: BoundingBox,
    pub text: String,
}

impl RawLine {
    pub fn new(bbox: BoundingBox, text: impl Into<String>) -> Self {
        Self { bbox, text: text.into() }
    }
}

/// A layout annotation. `content` carries externally recognised table or
/// formula content; when absent, paragraphs are filled from text lines and
/// other categories stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub category: Category,
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<Transcription>,
}

impl ElementSpec {
    pub fn new(category: Category, bbox: BoundingBox) -> Self {
        Self { category, bbox, content: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssocConfig {
    /// Minimum share of a line's area that must fall inside its element.
    pub iou_threshold: f64,
    /// Minimum [`fuzzy_match`] score for two overlapping lines to be merged.
    pub fuzzy_threshold: f64,
}

impl Default for AssocConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, fuzzy_threshold: 0.9 }
    }
}

impl AssocConfig {
    pub fn new(iou_threshold: f64, fuzzy_threshold: f64) -> Result<Self, GtError> {
        if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
            return Err(GtError::Config(format!("iou_threshold {iou_threshold} not in (0, 1]")));
        }
        if !(0.0..=1.0).contains(&fuzzy_threshold) {
            return Err(GtError::Config(format!("fuzzy_threshold {fuzzy_threshold} not in [0, 1]")));
        }
        Ok(Self { iou_threshold, fuzzy_threshold })
    }
}

/// Share of `line` covered by `element`. A zero-area line counts as fully
/// covered when it lies inside the element.
fn coverage(line: &BoundingBox, element: &BoundingBox) -> f64 {
    let area = line.area();
    if area > 0.0 {
        line.intersection_area(element) / area
    } else if element.contains(line) {
        1.0
    } else {
        0.0
    }
}

/// Element index for every line, or `None` when no element covers at least
/// `iou_threshold` of it. Ties go to the smaller element, then the lower index.
pub fn associate_lines(elements: &[BoundingBox], lines: &[RawLine], cfg: &AssocConfig) -> Vec<Option<usize>> {
    lines
        .iter()
        .map(|line| {
            let mut best: Option<(f64, f64, usize)> = None;
            for (j, element) in elements.iter().enumerate() {
                let score = coverage(&line.bbox, element);
                if score < cfg.iou_threshold {
                    continue;
                }
                let area = element.area();
                let better = match best {
                    None => true,
                    Some((s, a, _)) => score > s || (score == s && area < a),
                };
                if better {
                    best = Some((score, area, j));
                }
            }
            best.map(|(_, _, j)| j)
        })
        .collect()
}

/// Tight box around all of `boxes`.
pub fn merge_boxes(boxes: &[BoundingBox]) -> Result<BoundingBox, DomainError> {
    let (first, rest) = boxes.split_first().ok_or(DomainError::EmptyBoxList)?;
    Ok(rest.iter().fold(*first, |acc, b| acc.union(b)))
}

fn normalize(s: &str) -> String {
    s.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Similarity of two strings after lowercasing and whitespace collapsing:
/// `1 - Dist / Maxlen`, 1 when both normalize to empty.
pub fn fuzzy_match(a: &str, b: &str) -> f64 {
    let (a, b) = (normalize(a), normalize(b));
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - edit_distance(&a, &b) as f64 / max_len as f64
}

/// Assembled document and where each input line ended up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub document: Document,
    /// For each element and each of its text lines, the input lines merged into it.
    pub line_sources: Vec<Vec<Vec<usize>>>,
    /// Lines inside elements whose content did not come from lines.
    pub absorbed: Vec<Vec<usize>>,
    /// Lines no element claimed.
    pub unassigned: Vec<usize>,
}

pub fn assemble_ground_truth(
    page_width: f64,
    page_height: f64,
    elements: &[ElementSpec],
    lines: &[RawLine],
    order_cfg: &OrderConfig,
    assoc_cfg: &AssocConfig,
) -> Result<GroundTruth, GtError> {
    for (index, spec) in elements.iter().enumerate() {
        if let Some(content) = &spec.content {
            if content.category() != spec.category {
                return Err(GtError::ContentMismatch { index, category: spec.category, given: content.category() });
            }
        }
    }
    if let Some((index, line)) = lines.iter().enumerate().find(|(_, l)| !l.bbox.is_well_formed()) {
        return Err(GtError::MalformedLine { index, bbox: line.bbox.to_array() });
    }

    let boxes: Vec<BoundingBox> = elements.iter().map(|e| e.bbox).collect();
    let order = xy_cut_order(&boxes, order_cfg);
    let assignment = associate_lines(&boxes, lines, assoc_cfg);

    let mut per_element: Vec<Vec<usize>> = vec![Vec::new(); elements.len()];
    let mut unassigned = Vec::new();
    for (line, owner) in assignment.into_iter().enumerate() {
        match owner {
            Some(e) => per_element[e].push(line),
            None => unassigned.push(line),
        }
    }

    let mut document = Document::new(page_width, page_height);
    let mut line_sources = Vec::with_capacity(elements.len());
    let mut absorbed = Vec::with_capacity(elements.len());
    for &e in &order {
        let spec = &elements[e];
        let owned = std::mem::take(&mut per_element[e]);
        let (content, sources, soaked) = match (&spec.content, spec.category) {
            (None, Category::Paragraph) => {
                let (text_lines, sources) = build_lines(lines, &owned, order_cfg, assoc_cfg)?;
                (Transcription::Paragraph { lines: text_lines }, sources, Vec::new())
            }
            (Some(content), _) => (content.clone(), Vec::new(), owned),
            (None, category) => (Transcription::empty(category), Vec::new(), owned),
        };
        document.push(Element::new(spec.category, spec.bbox, content));
        line_sources.push(sources);
        absorbed.push(soaked);
    }

    let violations = validate_document(&document);
    if !violations.is_empty() {
        return Err(GtError::Invalid(violations));
    }
    Ok(GroundTruth { document, line_sources, absorbed, unassigned })
}

/// Consolidates duplicates among `owned` lines and orders the result by row band.
fn build_lines(
    lines: &[RawLine],
    owned: &[usize],
    order_cfg: &OrderConfig,
    assoc_cfg: &AssocConfig,
) -> Result<(Vec<TextLine>, Vec<Vec<usize>>), GtError> {
    // union-find over owned positions
    let mut parent: Vec<usize> = (0..owned.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..owned.len() {
        for b in a + 1..owned.len() {
            let (la, lb) = (&lines[owned[a]], &lines[owned[b]]);
            if la.bbox.intersection_area(&lb.bbox) > 0.0 && fuzzy_match(&la.text, &lb.text) >= assoc_cfg.fuzzy_threshold {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; owned.len()];
    for (i, &line) in owned.iter().enumerate() {
        let r = root(&mut parent, i);
        if group_of_root[r] == usize::MAX {
            group_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of_root[r]].push(line);
    }

    let mut merged = Vec::with_capacity(groups.len());
    for group in &groups {
        let boxes: Vec<BoundingBox> = group.iter().map(|&i| lines[i].bbox).collect();
        let bbox = merge_boxes(&boxes)?;
        // keep the longest reading; first wins on ties
        let text = group
            .iter()
            .map(|&i| lines[i].text.as_str())
            .fold("", |best, t| if t.chars().count() > best.chars().count() { t } else { best });
        merged.push(TextLine::new(bbox, text));
    }

    let boxes: Vec<BoundingBox> = merged.iter().map(|l| l.bbox).collect();
    let order = fallback_sort(&boxes, order_cfg.y_tolerance);
    let text_lines = order.iter().map(|&i| merged[i].clone()).collect();
    let sources = order.iter().map(|&i| groups[i].clone()).collect();
    Ok((text_lines, sources))
}
