//! Strategies for valid documents.
#![allow(dead_code)]

use docrec::model::{BoundingBox, Category, Document, Element, TableCell, TextLine, Transcription};
use proptest::prelude::*;

pub const PAGE_W: f64 = 1240.0;
pub const PAGE_H: f64 = 1754.0;

pub fn arb_box(w: f64, h: f64) -> impl Strategy<Value = BoundingBox> {
    (0.0..=w, 0.0..=w, 0.0..=h, 0.0..=h).prop_map(|(a, b, c, d)| BoundingBox::new(a.min(b), c.min(d), a.max(b), c.max(d)))
}

/// Line or cell text: printable, may contain `<` and `\`, never a reserved token.
pub fn arb_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            8 => prop::char::range('a', 'z'),
            2 => Just(' '),
            1 => prop::sample::select(vec!['<', '>', '\\', 'é', '∑', '\t', '/', '"']),
        ],
        0..12,
    )
    .prop_map(|cs| cs.into_iter().collect::<String>())
    .prop_filter("reserved token", |s| !s.contains("<Sep>") && !s.contains("<\\n>"))
}

pub fn arb_latex() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['x', '^', '2', '{', '}', '\\', '<', '\n', ' ', 'α']), 0..12)
        .prop_map(|cs| cs.into_iter().collect())
}

pub fn arb_cell(w: f64, h: f64) -> impl Strategy<Value = TableCell> {
    (arb_box(w, h), arb_text(), 1u32..4, 1u32..4).prop_map(|(b, t, r, c)| TableCell::new(b, t).with_span(r, c))
}

pub fn arb_content(category: Category, w: f64, h: f64) -> BoxedStrategy<Transcription> {
    match category {
        Category::Paragraph => prop::collection::vec((arb_box(w, h), arb_text()), 0..4)
            .prop_map(|ls| Transcription::Paragraph { lines: ls.into_iter().map(|(b, t)| TextLine::new(b, t)).collect() })
            .boxed(),
        Category::Table => prop::collection::vec(prop::collection::vec(arb_cell(w, h), 0..4), 0..4)
            .prop_map(|rows| Transcription::Table { rows })
            .boxed(),
        Category::Formula => arb_latex().prop_map(|latex| Transcription::Formula { latex }).boxed(),
        Category::Figure => Just(Transcription::Figure {}).boxed(),
    }
}

pub fn arb_element(w: f64, h: f64) -> impl Strategy<Value = Element> {
    prop::sample::select(Category::ALL.to_vec()).prop_flat_map(move |c| {
        (arb_box(w, h), arb_content(c, w, h)).prop_map(move |(b, content)| Element::new(c, b, content))
    })
}

pub fn arb_document() -> impl Strategy<Value = Document> {
    prop::collection::vec(arb_element(PAGE_W, PAGE_H), 0..8)
        .prop_map(|elements| Document::with_elements(PAGE_W, PAGE_H, elements))
}

/// Every box of a document in a fixed traversal order.
pub fn all_boxes(doc: &Document) -> Vec<BoundingBox> {
    let mut out = Vec::new();
    for e in &doc.elements {
        out.push(e.bbox);
        match &e.content {
            Transcription::Paragraph { lines } => out.extend(lines.iter().map(|l| l.bbox)),
            Transcription::Table { rows } => out.extend(rows.iter().flatten().map(|c| c.bbox)),
            _ => {}
        }
    }
    out
}

/// Replaces every box with a zero box so documents can be compared on structure alone.
pub fn strip_boxes(doc: &Document) -> Document {
    let z = BoundingBox::new(0.0, 0.0, 0.0, 0.0);
    let mut d = doc.clone();
    for e in &mut d.elements {
        e.bbox = z;
        match &mut e.content {
            Transcription::Paragraph { lines } => lines.iter_mut().for_each(|l| l.bbox = z),
            Transcription::Table { rows } => rows.iter_mut().flatten().for_each(|c| c.bbox = z),
            _ => {}
        }
    }
    d
}
