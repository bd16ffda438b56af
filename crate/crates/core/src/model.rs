//! Documents, layout elements, boxes and transcription content.
//!
//! A [`Document`] is an ordered list of [`Element`]s on a page of known size.
//! The position of an element in the list is its reading order. Boxes are kept
//! in real page coordinates (pixels, origin top-left); the token format stores
//! them on a quantization grid, see [`CoordGrid`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of coordinate bins per axis.
pub const DEFAULT_BINS: u32 = 1000;

/// Serialized separator tokens that may never appear inside line or cell text.
const RESERVED_TEXT: [&str; 2] = ["<Sep>", "<\\n>"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("coordinate {value} outside [0, {extent}]")]
    CoordOutOfRange { value: f64, extent: f64 },
    #[error("page extent must be positive and finite, got {0}")]
    NonPositiveExtent(f64),
    #[error("a coordinate grid needs at least 2 bins, got {0}")]
    TooFewBins(u32),
    #[error("bin {bin} outside [0, {bins})")]
    BinOutOfRange { bin: u32, bins: u32 },
    #[error("cannot merge an empty list of boxes")]
    EmptyBoxList,
}

/// Axis-aligned box in page pixels. Serialized as `[x_min, y_min, x_max, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from([x_min, y_min, x_max, y_max]: [f64; 4]) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

impl BoundingBox {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn width(&self) -> f64 {
        (self.x_max - self.x_min).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y_max - self.y_min).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Area of the overlap with `other`, 0 when the boxes are disjoint.
    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Closed containment: edges may touch.
    pub fn contains(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    /// Finite coordinates with `min <= max` on both axes.
    pub fn is_well_formed(&self) -> bool {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        coords.iter().all(|c| c.is_finite()) && self.x_min <= self.x_max && self.y_min <= self.y_max
    }

    pub fn within_page(&self, page_width: f64, page_height: f64) -> bool {
        self.x_min >= 0.0 && self.y_min >= 0.0 && self.x_max <= page_width && self.y_max <= page_height
    }

    pub fn to_array(self) -> [f64; 4] {
        self.into()
    }
}

/// Layout element type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Paragraph,
    Table,
    Formula,
    Figure,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Paragraph, Category::Table, Category::Formula, Category::Figure];

    pub fn name(self) -> &'static str {
        match self {
            Category::Paragraph => "Paragraph",
            Category::Table => "Table",
            Category::Formula => "Formula",
            Category::Figure => "Figure",
        }
    }

    /// Position in [`Category::ALL`]; also the class index used by the losses.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownCategory(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextLine {
    pub bbox: BoundingBox,
    pub text: String,
}

impl TextLine {
    pub fn new(bbox: BoundingBox, text: impl Into<String>) -> Self {
        Self { bbox, text: text.into() }
    }
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableCell {
    pub bbox: BoundingBox,
    #[serde(default = "one")]
    pub rowspan: u32,
    #[serde(default = "one")]
    pub colspan: u32,
    pub text: String,
}

impl TableCell {
    pub fn new(bbox: BoundingBox, text: impl Into<String>) -> Self {
        Self { bbox, rowspan: 1, colspan: 1, text: text.into() }
    }

    pub fn with_span(mut self, rowspan: u32, colspan: u32) -> Self {
        self.rowspan = rowspan;
        self.colspan = colspan;
        self
    }
}

/// Category-specific content of an element.
///
/// On disk the variant is recognised by its fields: `{lines}`, `{rows}`,
/// `{latex}` or `{}`. Whether it agrees with the element category is checked
/// by [`validate_document`], not by deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Transcription {
    Paragraph { lines: Vec<TextLine> },
    Table { rows: Vec<Vec<TableCell>> },
    Formula { latex: String },
    Figure {},
}

impl Transcription {
    /// The category this content belongs to.
    pub fn category(&self) -> Category {
        match self {
            Transcription::Paragraph { .. } => Category::Paragraph,
            Transcription::Table { .. } => Category::Table,
            Transcription::Formula { .. } => Category::Formula,
            Transcription::Figure {} => Category::Figure,
        }
    }

    /// Empty content of the given category.
    pub fn empty(category: Category) -> Self {
        match category {
            Category::Paragraph => Transcription::Paragraph { lines: Vec::new() },
            Category::Table => Transcription::Table { rows: Vec::new() },
            Category::Formula => Transcription::Formula { latex: String::new() },
            Category::Figure => Transcription::Figure {},
        }
    }

    /// Plain string form with every coordinate dropped: paragraph lines joined
    /// by `\n`, tables as `<tr>`/`<td>` markup, formulas as LaTeX, figures empty.
    pub fn canonical_text(&self) -> String {
        match self {
            Transcription::Paragraph { lines } => {
                lines.iter().map(|l| l.text.as_str()).collect::<Vec<_>>().join("\n")
            }
            Transcription::Table { rows } => table_html(rows),
            Transcription::Formula { latex } => latex.clone(),
            Transcription::Figure {} => String::new(),
        }
    }
}

/// Table markup without cell coordinates. Span attributes are written only
/// when greater than one, rowspan first.
pub fn table_html(rows: &[Vec<TableCell>]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str("<tr>");
        for cell in row {
            out.push_str("<td");
            if cell.rowspan > 1 {
                out.push_str(&format!(" rowspan=\"{}\"", cell.rowspan));
            }
            if cell.colspan > 1 {
                out.push_str(&format!(" colspan=\"{}\"", cell.colspan));
            }
            out.push('>');
            out.push_str(&cell.text);
            out.push_str("</td>");
        }
        out.push_str("</tr>");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub category: Category,
    pub bbox: BoundingBox,
    pub content: Transcription,
}

impl Element {
    /// Builds an element without checking that `content` matches `category`.
    pub fn new(category: Category, bbox: BoundingBox, content: Transcription) -> Self {
        Self { category, bbox, content }
    }

    pub fn paragraph(bbox: BoundingBox, lines: Vec<TextLine>) -> Self {
        Self::new(Category::Paragraph, bbox, Transcription::Paragraph { lines })
    }

    pub fn table(bbox: BoundingBox, rows: Vec<Vec<TableCell>>) -> Self {
        Self::new(Category::Table, bbox, Transcription::Table { rows })
    }

    pub fn formula(bbox: BoundingBox, latex: impl Into<String>) -> Self {
        Self::new(Category::Formula, bbox, Transcription::Formula { latex: latex.into() })
    }

    pub fn figure(bbox: BoundingBox) -> Self {
        Self::new(Category::Figure, bbox, Transcription::Figure {})
    }

    pub fn transcription_text(&self) -> String {
        self.content.canonical_text()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub page_width: f64,
    pub page_height: f64,
    pub elements: Vec<Element>,
}

impl Document {
    pub fn new(page_width: f64, page_height: f64) -> Self {
        Self { page_width, page_height, elements: Vec::new() }
    }

    pub fn with_elements(page_width: f64, page_height: f64, elements: Vec<Element>) -> Self {
        Self { page_width, page_height, elements }
    }

    pub fn push(&mut self, element: Element) {
        self.elements.push(element);
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    InvalidPage,
    MalformedBox,
    OutOfPage,
    CategoryMismatch,
    InvalidSpan,
    InvalidText,
}

/// One broken invariant. `element` is `None` for page-level problems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub element: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.element {
            Some(i) => write!(f, "element {i}: {}", self.message),
            None => write!(f, "page: {}", self.message),
        }
    }
}

/// Every invariant violation in `doc`; empty exactly when the document is valid.
pub fn validate_document(doc: &Document) -> Vec<Violation> {
    let mut out = Vec::new();
    let page_ok = [doc.page_width, doc.page_height].iter().all(|v| v.is_finite() && *v > 0.0);
    if !page_ok {
        out.push(Violation {
            element: None,
            kind: ViolationKind::InvalidPage,
            message: format!("page size {} x {} must be positive and finite", doc.page_width, doc.page_height),
        });
    }
    for (i, element) in doc.elements.iter().enumerate() {
        out.extend(validate_element(element, doc.page_width, doc.page_height, page_ok).into_iter().map(
            |(kind, message)| Violation { element: Some(i), kind, message },
        ));
    }
    out
}

pub(crate) fn validate_element(
    element: &Element,
    page_width: f64,
    page_height: f64,
    check_bounds: bool,
) -> Vec<(ViolationKind, String)> {
    let mut out = Vec::new();
    let check_box = |what: &str, b: &BoundingBox, out: &mut Vec<(ViolationKind, String)>| {
        if !b.is_well_formed() {
            out.push((ViolationKind::MalformedBox, format!("{what} box {:?} is not ordered and finite", b.to_array())));
        } else if check_bounds && !b.within_page(page_width, page_height) {
            out.push((
                ViolationKind::OutOfPage,
                format!("{what} box {:?} leaves the {page_width} x {page_height} page", b.to_array()),
            ));
        }
    };
    check_box("element", &element.bbox, &mut out);

    if element.content.category() != element.category {
        out.push((
            ViolationKind::CategoryMismatch,
            format!("{} element carries {} content", element.category, element.content.category()),
        ));
    }

    match &element.content {
        Transcription::Paragraph { lines } => {
            for (j, line) in lines.iter().enumerate() {
                check_box(&format!("line {j}"), &line.bbox, &mut out);
                if let Some(problem) = text_problem(&line.text, false) {
                    out.push((ViolationKind::InvalidText, format!("line {j} text {problem}")));
                }
            }
        }
        Transcription::Table { rows } => {
            for (r, row) in rows.iter().enumerate() {
                for (c, cell) in row.iter().enumerate() {
                    check_box(&format!("cell ({r},{c})"), &cell.bbox, &mut out);
                    if cell.rowspan == 0 || cell.colspan == 0 {
                        out.push((
                            ViolationKind::InvalidSpan,
                            format!("cell ({r},{c}) has rowspan {} colspan {}", cell.rowspan, cell.colspan),
                        ));
                    }
                    if let Some(problem) = text_problem(&cell.text, false) {
                        out.push((ViolationKind::InvalidText, format!("cell ({r},{c}) text {problem}")));
                    }
                }
            }
        }
        Transcription::Formula { latex } => {
            if let Some(problem) = text_problem(latex, true) {
                out.push((ViolationKind::InvalidText, format!("formula {problem}")));
            }
        }
        Transcription::Figure {} => {}
    }
    out
}

fn text_problem(text: &str, allow_newline: bool) -> Option<String> {
    if let Some(c) = text.chars().find(|&c| c.is_control() && !(c == '\t' || (allow_newline && c == '\n'))) {
        return Some(format!("contains control character {c:?}"));
    }
    if !allow_newline {
        if let Some(tok) = RESERVED_TEXT.iter().find(|t| text.contains(*t)) {
            return Some(format!("contains reserved token {tok}"));
        }
    }
    None
}

/// Bin index of `value` on an axis of length `extent` split into `bins` cells.
pub fn quantize_coord(value: f64, extent: f64, bins: u32) -> Result<u32, DomainError> {
    check_grid(extent, bins)?;
    if !(0.0..=extent).contains(&value) {
        return Err(DomainError::CoordOutOfRange { value, extent });
    }
    let bin = (value / extent * f64::from(bins)).floor();
    Ok((bin as u32).min(bins - 1))
}

/// Centre of bin `bin`.
pub fn dequantize_coord(bin: u32, extent: f64, bins: u32) -> Result<f64, DomainError> {
    check_grid(extent, bins)?;
    if bin >= bins {
        return Err(DomainError::BinOutOfRange { bin, bins });
    }
    Ok((f64::from(bin) + 0.5) / f64::from(bins) * extent)
}

fn check_grid(extent: f64, bins: u32) -> Result<(), DomainError> {
    if !(extent.is_finite() && extent > 0.0) {
        return Err(DomainError::NonPositiveExtent(extent));
    }
    if bins < 2 {
        return Err(DomainError::TooFewBins(bins));
    }
    Ok(())
}

/// Quantization grid for one page: `bins` cells per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordGrid {
    pub page_width: f64,
    pub page_height: f64,
    pub bins: u32,
}

impl CoordGrid {
    pub fn new(page_width: f64, page_height: f64, bins: u32) -> Result<Self, DomainError> {
        check_grid(page_width, bins)?;
        check_grid(page_height, bins)?;
        Ok(Self { page_width, page_height, bins })
    }

    pub fn quantize(&self, b: &BoundingBox) -> Result<[u32; 4], DomainError> {
        Ok([
            quantize_coord(b.x_min, self.page_width, self.bins)?,
            quantize_coord(b.y_min, self.page_height, self.bins)?,
            quantize_coord(b.x_max, self.page_width, self.bins)?,
            quantize_coord(b.y_max, self.page_height, self.bins)?,
        ])
    }

    pub fn dequantize(&self, [x0, y0, x1, y1]: [u32; 4]) -> Result<BoundingBox, DomainError> {
        Ok(BoundingBox::new(
            dequantize_coord(x0, self.page_width, self.bins)?,
            dequantize_coord(y0, self.page_height, self.bins)?,
            dequantize_coord(x1, self.page_width, self.bins)?,
            dequantize_coord(y1, self.page_height, self.bins)?,
        ))
    }

    /// Width of one bin along x and y.
    pub fn bin_size(&self) -> (f64, f64) {
        (self.page_width / f64::from(self.bins), self.page_height / f64::from(self.bins))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1)
    }

    fn three_element_doc() -> Document {
        Document::with_elements(
            1000.0,
            1000.0,
            vec![
                Element::paragraph(bx(10.0, 10.0, 500.0, 60.0), vec![TextLine::new(bx(10.0, 10.0, 500.0, 30.0), "Hello")]),
                Element::formula(bx(10.0, 80.0, 300.0, 120.0), "E=mc^2"),
                Element::figure(bx(10.0, 150.0, 900.0, 900.0)),
            ],
        )
    }

    #[test]
    fn quantize_boundaries() {
        assert_eq!(quantize_coord(0.0, 1000.0, 1000).unwrap(), 0);
        assert_eq!(quantize_coord(1000.0, 1000.0, 1000).unwrap(), 999);
    }

    #[test]
    fn quantize_matches_integer_oracle() {
        // 512.3 / 1024 * 1000 == 5123 * 1000 / 10240 in exact arithmetic.
        let exact = 5123u64 * 1000 / 10240;
        assert_eq!(exact, 500);
        assert_eq!(quantize_coord(512.3, 1024.0, 1000).unwrap() as u64, exact);
    }

    #[test]
    fn quantize_rejects_bad_input() {
        assert!(matches!(quantize_coord(-0.1, 10.0, 10), Err(DomainError::CoordOutOfRange { .. })));
        assert!(matches!(quantize_coord(10.5, 10.0, 10), Err(DomainError::CoordOutOfRange { .. })));
        assert!(matches!(quantize_coord(f64::NAN, 10.0, 10), Err(DomainError::CoordOutOfRange { .. })));
        assert!(matches!(quantize_coord(1.0, 0.0, 10), Err(DomainError::NonPositiveExtent(_))));
        assert!(matches!(quantize_coord(1.0, 10.0, 1), Err(DomainError::TooFewBins(1))));
    }

    #[test]
    fn dequantize_bin_centres() {
        assert_eq!(dequantize_coord(0, 1000.0, 1000).unwrap(), 0.5);
        assert_eq!(dequantize_coord(999, 1000.0, 1000).unwrap(), 999.5);
        let v = dequantize_coord(500, 1024.0, 1000).unwrap();
        assert!((v - 500.5 / 1000.0 * 1024.0).abs() < 1e-12);
        assert!((v - 512.512).abs() < 1e-9);
        assert!(matches!(dequantize_coord(1000, 1000.0, 1000), Err(DomainError::BinOutOfRange { .. })));
    }

    #[test]
    fn valid_document_has_no_violations() {
        assert!(validate_document(&three_element_doc()).is_empty());
    }

    #[test]
    fn inverted_box_is_reported_once() {
        let mut doc = three_element_doc();
        doc.elements[1].bbox = bx(300.0, 80.0, 10.0, 120.0);
        let v = validate_document(&doc);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].element, Some(1));
        assert_eq!(v[0].kind, ViolationKind::MalformedBox);
    }

    #[test]
    fn figure_with_paragraph_content_is_a_mismatch() {
        let mut doc = three_element_doc();
        doc.elements[2].content = Transcription::Paragraph { lines: vec![] };
        let v = validate_document(&doc);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::CategoryMismatch);
        assert_eq!(v[0].element, Some(2));
    }

    #[test]
    fn other_violations() {
        let mut doc = three_element_doc();
        doc.elements[2].bbox = bx(10.0, 150.0, 1200.0, 900.0);
        doc.push(Element::table(bx(0.0, 0.0, 10.0, 10.0), vec![vec![TableCell::new(bx(0.0, 0.0, 5.0, 5.0), "x").with_span(0, 1)]]));
        doc.push(Element::paragraph(bx(0.0, 0.0, 10.0, 10.0), vec![TextLine::new(bx(0.0, 0.0, 5.0, 5.0), "a<Sep>b")]));
        let kinds: Vec<_> = validate_document(&doc).into_iter().map(|v| (v.element, v.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (Some(2), ViolationKind::OutOfPage),
                (Some(3), ViolationKind::InvalidSpan),
                (Some(4), ViolationKind::InvalidText)
            ]
        );
        let bad_page = Document::new(0.0, 10.0);
        assert_eq!(validate_document(&bad_page)[0].kind, ViolationKind::InvalidPage);
    }

    #[test]
    fn json_shape() {
        let doc = Document::with_elements(
            100.0,
            50.0,
            vec![
                Element::table(bx(0.0, 0.0, 10.0, 10.0), vec![vec![TableCell::new(bx(0.0, 0.0, 5.0, 5.0), "x").with_span(1, 2)]]),
                Element::figure(bx(1.0, 2.0, 3.0, 4.0)),
            ],
        );
        let json = serde_json::to_string(&doc).unwrap();
        assert_eq!(
            json,
            r#"{"page_width":100.0,"page_height":50.0,"elements":[{"category":"Table","bbox":[0.0,0.0,10.0,10.0],"content":{"rows":[[{"bbox":[0.0,0.0,5.0,5.0],"rowspan":1,"colspan":2,"text":"x"}]]}},{"category":"Figure","bbox":[1.0,2.0,3.0,4.0],"content":{}}]}"#
        );
        let back: Document = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn content_with_unknown_fields_is_rejected() {
        let bad = r#"{"category":"Figure","bbox":[0,0,1,1],"content":{"colour":"red"}}"#;
        assert!(serde_json::from_str::<Element>(bad).is_err());
        let spans = r#"{"bbox":[0,0,1,1],"text":"a"}"#;
        let cell: TableCell = serde_json::from_str(spans).unwrap();
        assert_eq!((cell.rowspan, cell.colspan), (1, 1));
    }

    #[test]
    fn category_names_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), c);
        }
        assert!("Chart".parse::<Category>().is_err());
    }

    proptest! {
        #[test]
        fn round_trip_error_within_one_bin(v in 0.0f64..=1.0, extent in 1.0f64..5000.0, bins in 2u32..4000) {
            let v = v * extent;
            let bin = quantize_coord(v, extent, bins).unwrap();
            let back = dequantize_coord(bin, extent, bins).unwrap();
            prop_assert!((back - v).abs() <= extent / f64::from(bins) + 1e-9);
        }

        #[test]
        fn quantize_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, extent in 1.0f64..5000.0, bins in 2u32..4000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(quantize_coord(lo * extent, extent, bins).unwrap() <= quantize_coord(hi * extent, extent, bins).unwrap());
        }
    }
}
