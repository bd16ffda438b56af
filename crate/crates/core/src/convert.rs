//! Task-specific views of a reconstructed document.

use serde::{Deserialize, Serialize};

use crate::model::{table_html, BoundingBox, Category, Document, Transcription};

/// Category and box of one element, the input format of detection evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutRecord {
    pub category: Category,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// Markdown-style text: category, boxes and line coordinates dropped, element
/// transcriptions joined by a blank line. Tables stay in `<tr>`/`<td>` form.
pub fn to_markdown(doc: &Document) -> String {
    doc.elements.iter().map(|e| e.content.canonical_text()).collect::<Vec<_>>().join("\n\n")
}

/// One record per element, in order, with score 1.
pub fn to_layout_records(doc: &Document) -> Vec<LayoutRecord> {
    doc.elements.iter().map(|e| LayoutRecord { category: e.category, bbox: e.bbox, score: 1.0 }).collect()
}

/// Text of paragraphs and tables in element order. Lines and table rows end up
/// on separate lines; cells within a row are separated by one space.
pub fn to_plain_text(doc: &Document) -> String {
    let mut blocks = Vec::new();
    for element in &doc.elements {
        match &element.content {
            Transcription::Paragraph { lines } => {
                blocks.push(lines.iter().map(|l| l.text.as_str()).collect::<Vec<_>>().join("\n"));
            }
            Transcription::Table { rows } => {
                let rows: Vec<String> = rows
                    .iter()
                    .map(|row| row.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(" "))
                    .collect();
                blocks.push(rows.join("\n"));
            }
            Transcription::Formula { .. } | Transcription::Figure {} => {}
        }
    }
    blocks.join("\n")
}

/// Markup of every table, cell boxes omitted.
pub fn extract_tables(doc: &Document) -> Vec<String> {
    doc.elements
        .iter()
        .filter_map(|e| match &e.content {
            Transcription::Table { rows } => Some(table_html(rows)),
            _ => None,
        })
        .collect()
}

pub fn extract_formulas(doc: &Document) -> Vec<String> {
    doc.elements
        .iter()
        .filter_map(|e| match &e.content {
            Transcription::Formula { latex } => Some(latex.clone()),
            _ => None,
        })
        .collect()
}
