//! Flat token sequences for document reconstruction output.
//!
//! Each element is written as
//!
//! ```text
//! <Category> <xmin> <ymin> <xmax> <ymax> content... <Sep>
//! ```
//!
//! with coordinates on a [`CoordGrid`](crate::model::CoordGrid). Content depends
//! on the category:
//!
//! * paragraphs: per line, the line's four coordinates followed by its
//!   characters, lines separated by `<\n>`;
//! * tables: `<tr>`/`<td>` markup, each cell's four coordinates right after
//!   its opening `<td>`, then the cell text;
//! * formulas: the LaTeX characters;
//! * figures: nothing.
//!
//! Text is tokenized per Unicode scalar value.

mod decode;
mod encode;
mod text;

use crate::model::Category;

pub use decode::{parse, ParseError, ParseErrorKind};
pub use encode::{serialize, SerializeError};
pub use text::{render_tokens, scan_tokens, ScanError, ScanErrorKind};

/// Which corner coordinate a [`Token::Coord`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    XMin,
    YMin,
    XMax,
    YMax,
}

impl Axis {
    pub const ORDER: [Axis; 4] = [Axis::XMin, Axis::YMin, Axis::XMax, Axis::YMax];

    pub fn name(self) -> &'static str {
        match self {
            Axis::XMin => "xmin",
            Axis::YMin => "ymin",
            Axis::XMax => "xmax",
            Axis::YMax => "ymax",
        }
    }
}

/// Table markup tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HtmlTag {
    RowOpen,
    RowClose,
    CellOpen { rowspan: Option<u32>, colspan: Option<u32> },
    CellClose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Category(Category),
    Coord { axis: Axis, bin: u32 },
    Text(char),
    LineSep,
    Sep,
    Html(HtmlTag),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub tokens: Vec<Token>,
    /// Bins per axis of the grid the coordinates were quantized on.
    pub bins: u32,
}

impl TokenSequence {
    pub fn new(bins: u32) -> Self {
        Self { tokens: Vec::new(), bins }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Number of `<Sep>` tokens, i.e. serialized elements.
    pub fn element_count(&self) -> usize {
        self.tokens.iter().filter(|t| matches!(t, Token::Sep)).count()
    }

    /// Token slices of each element, `<Sep>` included. A trailing unterminated
    /// run is returned as the last slice.
    pub fn elements(&self) -> impl Iterator<Item = &[Token]> {
        self.tokens.split_inclusive(|t| matches!(t, Token::Sep))
    }
}
