//! Reading order by recursive XY-cut.
//!
//! A region is split top/bottom at every horizontal whitespace band at least
//! `min_gap` tall; failing that, left/right at vertical bands. Regions that
//! cannot be cut (typically overlapping boxes) fall back to a banded
//! top-to-bottom, left-to-right sort in which boxes whose `y_min` lies within
//! `y_tolerance` of the band's first box share a row.

use std::cmp::Ordering;

use thiserror::Error;

use crate::model::{BoundingBox, Document};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderConfigError {
    #[error("min_gap must be positive, got {0}")]
    MinGap(f64),
    #[error("y_tolerance must be non-negative, got {0}")]
    YTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderConfig {
    /// Smallest whitespace gap, in pixels, that separates two regions.
    pub min_gap: f64,
    /// Row band height, in pixels, of the fallback sort.
    pub y_tolerance: f64,
}

impl Default for OrderConfig {
    fn default() -> Self {
        Self { min_gap: 5.0, y_tolerance: 10.0 }
    }
}

impl OrderConfig {
    pub fn new(min_gap: f64, y_tolerance: f64) -> Result<Self, OrderConfigError> {
        if !(min_gap.is_finite() && min_gap > 0.0) {
            return Err(OrderConfigError::MinGap(min_gap));
        }
        if !(y_tolerance.is_finite() && y_tolerance >= 0.0) {
            return Err(OrderConfigError::YTolerance(y_tolerance));
        }
        Ok(Self { min_gap, y_tolerance })
    }
}

/// Total order on box geometry, used wherever ties need breaking.
fn geometry(a: &BoundingBox, b: &BoundingBox) -> Ordering {
    a.y_min
        .total_cmp(&b.y_min)
        .then(a.x_min.total_cmp(&b.x_min))
        .then(a.y_max.total_cmp(&b.y_max))
        .then(a.x_max.total_cmp(&b.x_max))
}

/// Indices of `boxes` in reading order.
pub fn xy_cut_order(boxes: &[BoundingBox], cfg: &OrderConfig) -> Vec<usize> {
    let mut out = Vec::with_capacity(boxes.len());
    cut(boxes, (0..boxes.len()).collect(), cfg, &mut out);
    out
}

#[derive(Clone, Copy)]
enum Direction {
    /// Project onto y; groups come out top to bottom.
    Horizontal,
    /// Project onto x; groups come out left to right.
    Vertical,
}

fn cut(boxes: &[BoundingBox], region: Vec<usize>, cfg: &OrderConfig, out: &mut Vec<usize>) {
    if region.len() <= 1 {
        out.extend(region);
        return;
    }
    for direction in [Direction::Horizontal, Direction::Vertical] {
        let groups = split(boxes, &region, direction, cfg.min_gap);
        if groups.len() > 1 {
            for group in groups {
                cut(boxes, group, cfg, out);
            }
            return;
        }
    }
    out.extend(banded_order(boxes, &region, cfg.y_tolerance));
}

fn split(boxes: &[BoundingBox], region: &[usize], direction: Direction, min_gap: f64) -> Vec<Vec<usize>> {
    let span = |i: usize| match direction {
        Direction::Horizontal => (boxes[i].y_min, boxes[i].y_max),
        Direction::Vertical => (boxes[i].x_min, boxes[i].x_max),
    };
    let mut sorted = region.to_vec();
    sorted.sort_by(|&a, &b| span(a).0.total_cmp(&span(b).0).then(geometry(&boxes[a], &boxes[b])).then(a.cmp(&b)));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut end = f64::NEG_INFINITY;
    for i in sorted {
        let (lo, hi) = span(i);
        match groups.last_mut() {
            Some(group) if lo - end < min_gap => group.push(i),
            _ => groups.push(vec![i]),
        }
        end = end.max(hi);
    }
    groups
}

/// Indices of `boxes` sorted by row band, then left to right.
pub fn fallback_sort(boxes: &[BoundingBox], y_tolerance: f64) -> Vec<usize> {
    let all: Vec<usize> = (0..boxes.len()).collect();
    banded_order(boxes, &all, y_tolerance)
}

fn banded_order(boxes: &[BoundingBox], region: &[usize], y_tolerance: f64) -> Vec<usize> {
    let mut by_top = region.to_vec();
    by_top.sort_by(|&a, &b| geometry(&boxes[a], &boxes[b]).then(a.cmp(&b)));

    let mut banded: Vec<(usize, usize)> = Vec::with_capacity(by_top.len());
    let mut band = 0usize;
    let mut anchor: Option<f64> = None;
    for i in by_top {
        let y = boxes[i].y_min;
        match anchor {
            Some(a) if y - a <= y_tolerance => {}
            Some(_) => {
                band += 1;
                anchor = Some(y);
            }
            None => anchor = Some(y),
        }
        banded.push((band, i));
    }
    banded.sort_by(|&(band_a, a), &(band_b, b)| {
        band_a
            .cmp(&band_b)
            .then(boxes[a].x_min.total_cmp(&boxes[b].x_min))
            .then(geometry(&boxes[a], &boxes[b]))
            .then(a.cmp(&b))
    });
    banded.into_iter().map(|(_, i)| i).collect()
}

/// Copy of `doc` with its elements in XY-cut reading order.
pub fn order_document(doc: &Document, cfg: &OrderConfig) -> Document {
    let boxes: Vec<BoundingBox> = doc.elements.iter().map(|e| e.bbox).collect();
    let elements = xy_cut_order(&boxes, cfg).into_iter().map(|i| doc.elements[i].clone()).collect();
    Document { elements, ..doc.clone() }
}
