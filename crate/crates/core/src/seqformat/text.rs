//! Angle-bracket text form of token sequences.
//!
//! Tags are `<Paragraph>`, `<Table>`, `<Formula>`, `<Figure>`, `<Sep>`, `<\n>`
//! (line separator), `<tr>`, `</tr>`, `<td>`, `<td rowspan="2" colspan="3">`,
//! `</td>` and coordinates `<17>`. A coordinate's axis is implied by its
//! position in a run of consecutive coordinates (xmin, ymin, xmax, ymax,
//! repeating); one that does not sit at its implied position is written
//! `<ymax:17>`. Text characters are literal except `\` `<` newline and
//! carriage return, written `\\` `\<` `\n` `\r`. A raw newline follows every
//! `<Sep>` and is otherwise ignored by the scanner.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Axis, HtmlTag, Token, TokenSequence};
use crate::model::Category;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanErrorKind {
    UnknownTag(String),
    UnterminatedTag,
    BadEscape,
    BadAttribute(String),
    CoordOutOfRange(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at byte {offset}", describe(.kind))]
pub struct ScanError {
    /// Byte offset of the offending tag or escape.
    pub offset: usize,
    pub kind: ScanErrorKind,
}

fn describe(kind: &ScanErrorKind) -> String {
    match kind {
        ScanErrorKind::UnknownTag(t) => format!("unknown tag <{t}>"),
        ScanErrorKind::UnterminatedTag => "unterminated tag".into(),
        ScanErrorKind::BadEscape => "bad escape".into(),
        ScanErrorKind::BadAttribute(a) => format!("bad table attribute {a:?}"),
        ScanErrorKind::CoordOutOfRange(bin) => format!("coordinate {bin} outside the grid"),
    }
}

pub fn render_tokens(seq: &TokenSequence) -> String {
    let mut out = String::new();
    let mut run = 0usize;
    for tok in &seq.tokens {
        if let Token::Coord { axis, bin } = tok {
            if *axis == Axis::ORDER[run % 4] {
                let _ = write!(out, "<{bin}>");
            } else {
                let _ = write!(out, "<{}:{bin}>", axis.name());
            }
            run += 1;
            continue;
        }
        run = 0;
        match tok {
            Token::Category(c) => {
                let _ = write!(out, "<{}>", c.name());
            }
            Token::Text(c) => match c {
                '\\' => out.push_str("\\\\"),
                '<' => out.push_str("\\<"),
                '\n' => out.push_str("\\n"),
                '\r' => out.push_str("\\r"),
                c => out.push(*c),
            },
            Token::LineSep => out.push_str("<\\n>"),
            Token::Sep => out.push_str("<Sep>\n"),
            Token::Html(HtmlTag::RowOpen) => out.push_str("<tr>"),
            Token::Html(HtmlTag::RowClose) => out.push_str("</tr>"),
            Token::Html(HtmlTag::CellClose) => out.push_str("</td>"),
            Token::Html(HtmlTag::CellOpen { rowspan, colspan }) => {
                out.push_str("<td");
                if let Some(r) = rowspan {
                    let _ = write!(out, " rowspan=\"{r}\"");
                }
                if let Some(c) = colspan {
                    let _ = write!(out, " colspan=\"{c}\"");
                }
                out.push('>');
            }
            Token::Coord { .. } => unreachable!(),
        }
    }
    out
}

/// Inverse of [`render_tokens`] for a grid of `bins` cells per axis.
pub fn scan_tokens(text: &str, bins: u32) -> Result<TokenSequence, ScanError> {
    let mut tokens = Vec::new();
    let mut run = 0usize;
    let mut chars = text.char_indices().peekable();

    while let Some((offset, c)) = chars.next() {
        let err = |kind| ScanError { offset, kind };
        match c {
            '\n' | '\r' => continue,
            '\\' => {
                let unescaped = match chars.next() {
                    Some((_, '\\')) => '\\',
                    Some((_, '<')) => '<',
                    Some((_, 'n')) => '\n',
                    Some((_, 'r')) => '\r',
                    _ => return Err(err(ScanErrorKind::BadEscape)),
                };
                tokens.push(Token::Text(unescaped));
                run = 0;
            }
            '<' => {
                let body_start = offset + 1;
                let Some(len) = text[body_start..].find('>') else {
                    return Err(err(ScanErrorKind::UnterminatedTag));
                };
                let body = &text[body_start..body_start + len];
                while chars.next_if(|&(i, _)| i <= body_start + len).is_some() {}

                let tok = scan_tag(body, run, bins).map_err(err)?;
                run = if matches!(tok, Token::Coord { .. }) { run + 1 } else { 0 };
                tokens.push(tok);
            }
            c => {
                tokens.push(Token::Text(c));
                run = 0;
            }
        }
    }
    Ok(TokenSequence { tokens, bins })
}

fn scan_tag(body: &str, run: usize, bins: u32) -> Result<Token, ScanErrorKind> {
    let coord = |axis: Axis, digits: &str| -> Result<Token, ScanErrorKind> {
        let bin: u32 = digits.parse().map_err(|_| ScanErrorKind::UnknownTag(body.to_owned()))?;
        if bin >= bins {
            return Err(ScanErrorKind::CoordOutOfRange(bin));
        }
        Ok(Token::Coord { axis, bin })
    };

    if !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit()) {
        return coord(Axis::ORDER[run % 4], body);
    }
    if let Some((name, digits)) = body.split_once(':') {
        if let Some(axis) = Axis::ORDER.into_iter().find(|a| a.name() == name) {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return coord(axis, digits);
            }
        }
        return Err(ScanErrorKind::UnknownTag(body.to_owned()));
    }
    if let Ok(c) = body.parse::<Category>() {
        return Ok(Token::Category(c));
    }
    match body {
        "Sep" => return Ok(Token::Sep),
        "\\n" => return Ok(Token::LineSep),
        "tr" => return Ok(Token::Html(HtmlTag::RowOpen)),
        "/tr" => return Ok(Token::Html(HtmlTag::RowClose)),
        "td" => return Ok(Token::Html(HtmlTag::CellOpen { rowspan: None, colspan: None })),
        "/td" => return Ok(Token::Html(HtmlTag::CellClose)),
        _ => {}
    }
    if let Some(attrs) = body.strip_prefix("td ") {
        return scan_cell_attrs(attrs);
    }
    Err(ScanErrorKind::UnknownTag(body.to_owned()))
}

fn scan_cell_attrs(attrs: &str) -> Result<Token, ScanErrorKind> {
    let (mut rowspan, mut colspan) = (None, None);
    for attr in attrs.split(' ') {
        let bad = || ScanErrorKind::BadAttribute(attr.to_owned());
        let (name, value) = attr.split_once('=').ok_or_else(bad)?;
        let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).ok_or_else(bad)?;
        if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let value: u32 = value.parse().map_err(|_| bad())?;
        let slot = match name {
            "rowspan" => &mut rowspan,
            "colspan" => &mut colspan,
            _ => return Err(bad()),
        };
        if slot.replace(value).is_some() {
            return Err(bad());
        }
    }
    Ok(Token::Html(HtmlTag::CellOpen { rowspan, colspan }))
}
