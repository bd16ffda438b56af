use std::fmt;

use thiserror::Error;

use super::{Axis, HtmlTag, Token, TokenSequence};
use crate::model::{
    validate_element, BoundingBox, Category, CoordGrid, Document, Element, TableCell, TextLine, Transcription,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// An element does not start with a category token.
    MissingCategory,
    /// Fewer than four coordinates where a box was required.
    TruncatedCoordQuartet,
    /// The input ended before the element's `<Sep>`.
    UnterminatedElement,
    /// Unbalanced or misplaced `<tr>`/`<td>` markup, or a zero span.
    MalformedTableTags,
    /// A coordinate bin outside `[0, bins)`.
    CoordOutOfRange,
    /// A token that cannot appear at this position.
    UnexpectedToken,
    /// A box with `min > max`, or content that breaks an element invariant.
    InvalidElement(String),
    /// Page size or bin count unusable.
    InvalidGrid(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MissingCategory => f.write_str("missing category token"),
            ParseErrorKind::TruncatedCoordQuartet => f.write_str("truncated coordinate quartet"),
            ParseErrorKind::UnterminatedElement => f.write_str("unterminated element (no <Sep>)"),
            ParseErrorKind::MalformedTableTags => f.write_str("malformed table tags"),
            ParseErrorKind::CoordOutOfRange => f.write_str("coordinate bin out of range"),
            ParseErrorKind::UnexpectedToken => f.write_str("unexpected token"),
            ParseErrorKind::InvalidElement(why) => write!(f, "invalid element: {why}"),
            ParseErrorKind::InvalidGrid(why) => write!(f, "invalid grid: {why}"),
        }
    }
}

/// First grammar violation in a token sequence, with its token offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at token {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Rebuilds the document from `seq`. Coordinates come back as bin centres on a
/// `page_width` x `page_height` page.
pub fn parse(seq: &TokenSequence, page_width: f64, page_height: f64) -> Result<Document, ParseError> {
    let grid = CoordGrid::new(page_width, page_height, seq.bins)
        .map_err(|e| ParseError { offset: 0, kind: ParseErrorKind::InvalidGrid(e.to_string()) })?;
    let mut parser = Parser { tokens: &seq.tokens, pos: 0, grid };
    let mut doc = Document::new(page_width, page_height);
    while parser.pos < parser.tokens.len() {
        doc.elements.push(parser.element()?);
    }
    Ok(doc)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    grid: CoordGrid,
}

impl Parser<'_> {
    fn err<T>(&self, offset: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { offset, kind })
    }

    fn peek(&self) -> Result<Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) => Ok(*t),
            None => self.err(self.pos, ParseErrorKind::UnterminatedElement),
        }
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        let start = self.pos;
        let category = match self.peek()? {
            Token::Category(c) => c,
            _ => return self.err(start, ParseErrorKind::MissingCategory),
        };
        self.pos += 1;
        let bbox = self.quartet()?;
        let content = match category {
            Category::Paragraph => self.paragraph()?,
            Category::Table => self.table()?,
            Category::Formula => Transcription::Formula { latex: self.text_until_sep()? },
            Category::Figure => {
                self.expect_sep()?;
                Transcription::Figure {}
            }
        };
        let element = Element::new(category, bbox, content);
        let problems = validate_element(&element, self.grid.page_width, self.grid.page_height, true);
        if let Some((_, why)) = problems.into_iter().next() {
            return self.err(start, ParseErrorKind::InvalidElement(why));
        }
        Ok(element)
    }

    fn quartet(&mut self) -> Result<BoundingBox, ParseError> {
        let start = self.pos;
        let mut bins = [0u32; 4];
        for (slot, axis) in bins.iter_mut().zip(Axis::ORDER) {
            match self.tokens.get(self.pos) {
                Some(Token::Coord { axis: got, bin }) => {
                    if *got != axis {
                        return self.err(self.pos, ParseErrorKind::UnexpectedToken);
                    }
                    if *bin >= self.grid.bins {
                        return self.err(self.pos, ParseErrorKind::CoordOutOfRange);
                    }
                    *slot = *bin;
                }
                None => return self.err(self.pos, ParseErrorKind::UnterminatedElement),
                Some(_) => return self.err(self.pos, ParseErrorKind::TruncatedCoordQuartet),
            }
            self.pos += 1;
        }
        if bins[0] > bins[2] || bins[1] > bins[3] {
            return self.err(start, ParseErrorKind::InvalidElement(format!("box bins {bins:?} are not ordered")));
        }
        self.grid
            .dequantize(bins)
            .map_err(|e| ParseError { offset: start, kind: ParseErrorKind::InvalidGrid(e.to_string()) })
    }

    fn expect_sep(&mut self) -> Result<(), ParseError> {
        match self.peek()? {
            Token::Sep => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(self.pos, ParseErrorKind::UnexpectedToken),
        }
    }

    fn text_until_sep(&mut self) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            match self.peek()? {
                Token::Text(c) => s.push(c),
                Token::Sep => break,
                _ => return self.err(self.pos, ParseErrorKind::UnexpectedToken),
            }
            self.pos += 1;
        }
        self.pos += 1;
        Ok(s)
    }

    fn paragraph(&mut self) -> Result<Transcription, ParseError> {
        let mut lines = Vec::new();
        if self.peek()? == Token::Sep {
            self.pos += 1;
            return Ok(Transcription::Paragraph { lines });
        }
        loop {
            let bbox = self.quartet()?;
            let mut text = String::new();
            loop {
                let tok = self.peek()?;
                self.pos += 1;
                match tok {
                    Token::Text(c) => text.push(c),
                    Token::LineSep | Token::Sep => {
                        lines.push(TextLine { bbox, text });
                        if tok == Token::Sep {
                            return Ok(Transcription::Paragraph { lines });
                        }
                        break;
                    }
                    _ => return self.err(self.pos - 1, ParseErrorKind::UnexpectedToken),
                }
            }
        }
    }

    fn table(&mut self) -> Result<Transcription, ParseError> {
        let mut rows = Vec::new();
        loop {
            let tok = self.peek()?;
            let at = self.pos;
            self.pos += 1;
            match tok {
                Token::Sep => return Ok(Transcription::Table { rows }),
                Token::Html(HtmlTag::RowOpen) => rows.push(self.row()?),
                Token::Html(_) => return self.err(at, ParseErrorKind::MalformedTableTags),
                _ => return self.err(at, ParseErrorKind::UnexpectedToken),
            }
        }
    }

    /// Cells up to and including `</tr>`; the `<tr>` is already consumed.
    fn row(&mut self) -> Result<Vec<TableCell>, ParseError> {
        let mut cells = Vec::new();
        loop {
            let tok = self.peek()?;
            let at = self.pos;
            self.pos += 1;
            match tok {
                Token::Html(HtmlTag::RowClose) => return Ok(cells),
                Token::Html(HtmlTag::CellOpen { rowspan, colspan }) => {
                    if rowspan == Some(0) || colspan == Some(0) {
                        return self.err(at, ParseErrorKind::MalformedTableTags);
                    }
                    let bbox = self.quartet()?;
                    let text = self.cell_text()?;
                    cells.push(TableCell { bbox, rowspan: rowspan.unwrap_or(1), colspan: colspan.unwrap_or(1), text });
                }
                Token::Html(_) | Token::Sep => return self.err(at, ParseErrorKind::MalformedTableTags),
                _ => return self.err(at, ParseErrorKind::UnexpectedToken),
            }
        }
    }

    fn cell_text(&mut self) -> Result<String, ParseError> {
        let mut text = String::new();
        loop {
            let tok = self.peek()?;
            let at = self.pos;
            self.pos += 1;
            match tok {
                Token::Text(c) => text.push(c),
                Token::Html(HtmlTag::CellClose) => return Ok(text),
                Token::Html(_) | Token::Sep => return self.err(at, ParseErrorKind::MalformedTableTags),
                _ => return self.err(at, ParseErrorKind::UnexpectedToken),
            }
        }
    }
}
