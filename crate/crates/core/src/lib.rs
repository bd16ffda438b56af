//! Evaluation and data tooling for document reconstruction.
//!
//! A reconstructed page is a [`Document`]: layout elements (paragraphs,
//! tables, formulas, figures) with boxes and transcriptions, listed in reading
//! order. This crate provides
//!
//! * the flat token format for such documents ([`seqformat`]),
//! * the document similarity metric and NED ([`metrics`]),
//! * XY-cut reading order ([`readorder`]) and ground-truth assembly ([`gtgen`]),
//! * the matching-based training loss terms as plain numeric functions ([`losses`]),
//! * conversions into the formats of layout, OCR, table and formula evaluators ([`convert`]).
//!
//! ```
//! use docrec::model::{BoundingBox, Document, Element, TextLine};
//! use docrec::metrics::evaluate;
//!
//! let b = BoundingBox::new(50.0, 40.0, 950.0, 120.0);
//! let gt = Document::with_elements(1000.0, 1400.0, vec![
//!     Element::paragraph(b, vec![TextLine::new(b, "Document reconstruction")]),
//! ]);
//! let mut pred = gt.clone();
//! pred.elements[0] = Element::paragraph(b, vec![TextLine::new(b, "Document reconstructin")]);
//!
//! let report = evaluate(&[gt], &[pred]).unwrap();
//! assert!(report.dsm > 0.97 && report.dsm < 1.0);
//! ```
//!
//! The guide in `book/` walks through each piece; its code samples run as
//! doctests of this crate.

pub mod convert;
pub mod gtgen;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod readorder;
pub mod seqformat;

pub use matrix::CostMatrix;
pub use model::{BoundingBox, Category, Document, Element, TableCell, TextLine, Transcription};

// mdbook cannot resolve crate dependencies in its own test runner, so the
// chapters are pulled in here and checked by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sequence-format.md")]
    mod sequence_format {}
    #[doc = include_str!("../../../book/src/similarity-metric.md")]
    mod similarity_metric {}
    #[doc = include_str!("../../../book/src/reading-order.md")]
    mod reading_order {}
    #[doc = include_str!("../../../book/src/ground-truth.md")]
    mod ground_truth {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/post-processing.md")]
    mod post_processing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
