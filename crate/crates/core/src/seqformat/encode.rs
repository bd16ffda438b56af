use thiserror::Error;

use super::{Axis, HtmlTag, Token, TokenSequence};
use crate::model::{validate_document, BoundingBox, CoordGrid, Document, DomainError, Transcription, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SerializeError {
    #[error("document has {} invariant violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Grid(#[from] DomainError),
}

/// Token sequence of `doc` on a grid of `bins` cells per axis.
pub fn serialize(doc: &Document, bins: u32) -> Result<TokenSequence, SerializeError> {
    let violations = validate_document(doc);
    if !violations.is_empty() {
        return Err(SerializeError::Invalid(violations));
    }
    let grid = CoordGrid::new(doc.page_width, doc.page_height, bins)?;
    let mut out = Encoder { grid, tokens: Vec::new() };

    for element in &doc.elements {
        out.tokens.push(Token::Category(element.category));
        out.quartet(&element.bbox)?;
        match &element.content {
            Transcription::Paragraph { lines } => {
                for (i, line) in lines.iter().enumerate() {
                    if i > 0 {
                        out.tokens.push(Token::LineSep);
                    }
                    out.quartet(&line.bbox)?;
                    out.text(&line.text);
                }
            }
            Transcription::Table { rows } => {
                for row in rows {
                    out.tokens.push(Token::Html(HtmlTag::RowOpen));
                    for cell in row {
                        out.tokens.push(Token::Html(HtmlTag::CellOpen {
                            rowspan: (cell.rowspan > 1).then_some(cell.rowspan),
                            colspan: (cell.colspan > 1).then_some(cell.colspan),
                        }));
                        out.quartet(&cell.bbox)?;
                        out.text(&cell.text);
                        out.tokens.push(Token::Html(HtmlTag::CellClose));
                    }
                    out.tokens.push(Token::Html(HtmlTag::RowClose));
                }
            }
            Transcription::Formula { latex } => out.text(latex),
            Transcription::Figure {} => {}
        }
        out.tokens.push(Token::Sep);
    }
    Ok(TokenSequence { tokens: out.tokens, bins })
}

struct Encoder {
    grid: CoordGrid,
    tokens: Vec<Token>,
}

impl Encoder {
    fn quartet(&mut self, b: &BoundingBox) -> Result<(), DomainError> {
        let bins = self.grid.quantize(b)?;
        self.tokens.extend(Axis::ORDER.into_iter().zip(bins).map(|(axis, bin)| Token::Coord { axis, bin }));
        Ok(())
    }

    fn text(&mut self, s: &str) {
        self.tokens.extend(s.chars().map(Token::Text));
    }
}
