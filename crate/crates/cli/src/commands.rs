use std::collections::HashMap;
use std::path::Path;

use docrec::convert::{extract_formulas, extract_tables, to_layout_records, to_markdown, to_plain_text};
use docrec::gtgen::{assemble_ground_truth, AssocConfig, ElementSpec, RawLine};
use docrec::metrics::{document_ned, score_document, DocumentScore, EvalReport, MetricError};
use docrec::model::{validate_document, Document};
use docrec::readorder::{order_document, OrderConfig};
use docrec::seqformat::{parse, render_tokens, scan_tokens, serialize};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{
    Cli, Command, ConvertArgs, EvalArgs, GtgenArgs, InputFormat, Metric, OrderArgs, OrderFlags, Target, ValidateArgs,
};
use crate::diag::{Diagnostic, Failure};
use crate::io::{display, read_jsonl, read_text, Output, Record};
use crate::json::fixed;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Diagnostic::new("usage", format!("cannot start worker pool: {e}")))?;
    match &cli.command {
        Command::Validate(args) => validate(args),
        Command::Eval(args) => eval(args, &pool),
        Command::Convert(args) => convert(args, &pool),
        Command::Order(args) => order(args, &pool),
        Command::Gtgen(args) => gtgen(args, &pool),
    }
}

/// Runs `f` over `items` on the pool; results keep input order.
fn par_map<T: Sync, R: Send>(pool: &ThreadPool, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    pool.install(|| items.par_iter().map(f).collect())
}

fn invalid(path: &Path, docs: &[Record<Document>]) -> Vec<Diagnostic> {
    let file = display(path);
    docs.iter()
        .flat_map(|r| {
            validate_document(&r.value).into_iter().map(|v| {
                Diagnostic::new("validation", v.message).file(file.clone()).line(r.line).element(v.element)
            })
        })
        .collect()
}

fn load_valid(path: &Path, key: Option<&str>) -> Result<Vec<Record<Document>>, Failure> {
    let docs = read_jsonl::<Document>(path, key)?;
    let problems = invalid(path, &docs);
    if problems.is_empty() {
        Ok(docs)
    } else {
        Err(Failure(problems))
    }
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let count = match args.format {
        InputFormat::Json => load_valid(&args.input.input, None)?.len(),
        InputFormat::Tokens => {
            let file = display(&args.input.input);
            let text = read_text(&args.input.input)?;
            let seq = scan_tokens(&text, args.bins)
                .map_err(|e| Diagnostic::new("scan", e.to_string()).file(file.clone()).offset(e.offset))?;
            // clap guarantees both sizes for token input
            let (w, h) = (args.page_width.unwrap_or(0.0), args.page_height.unwrap_or(0.0));
            parse(&seq, w, h).map_err(|e| Diagnostic::new("parse", e.kind.to_string()).file(file).offset(e.offset))?;
            1
        }
    };
    let mut out = Output::open(None)?;
    out.line(&json!({ "documents": count, "valid": true }).to_string())?;
    out.finish()
}

/// Pairs each ground-truth document with its prediction, by position or by key.
fn align(
    gt: Vec<Record<Document>>,
    pred: Vec<Record<Document>>,
    keyed: bool,
    pred_file: &str,
) -> Result<Vec<(Record<Document>, Document)>, Failure> {
    if gt.len() != pred.len() {
        let e = MetricError::CorpusLengthMismatch { gt: gt.len(), pred: pred.len() };
        return Err(Diagnostic::new("eval", e.to_string()).into());
    }
    if !keyed {
        return Ok(gt.into_iter().zip(pred).map(|(g, p)| (g, p.value)).collect());
    }
    let mut by_key: HashMap<String, Record<Document>> = HashMap::new();
    let mut errors = Vec::new();
    for r in pred {
        let k = r.key.clone().unwrap_or_default();
        let line = r.line;
        if by_key.insert(k.clone(), r).is_some() {
            errors.push(Diagnostic::new("eval", format!("duplicate id {k:?}")).file(pred_file).line(line));
        }
    }
    let mut pairs = Vec::with_capacity(gt.len());
    for g in gt {
        let k = g.key.clone().unwrap_or_default();
        match by_key.remove(&k) {
            Some(p) => pairs.push((g, p.value)),
            None => errors.push(Diagnostic::new("eval", format!("no prediction with id {k:?}")).file(pred_file)),
        }
    }
    if errors.is_empty() {
        Ok(pairs)
    } else {
        Err(Failure(errors))
    }
}

fn eval(args: &EvalArgs, pool: &ThreadPool) -> Result<(), Failure> {
    let key = args.key.as_deref();
    let gt = read_jsonl::<Document>(&args.gt, key);
    let pred = read_jsonl::<Document>(&args.pred, key);
    let (gt, pred) = match (gt, pred) {
        (Ok(g), Ok(p)) => (g, p),
        (g, p) => {
            let mut all = Vec::new();
            for f in [g.err(), p.err()].into_iter().flatten() {
                all.extend(f.0);
            }
            return Err(Failure(all));
        }
    };
    let mut problems = invalid(&args.gt, &gt);
    problems.extend(invalid(&args.pred, &pred));
    if !problems.is_empty() {
        return Err(Failure(problems));
    }
    let pairs = align(gt, pred, key.is_some(), &display(&args.pred))?;
    if pairs.is_empty() {
        return Err(Diagnostic::new("eval", MetricError::EmptyCorpus.to_string()).into());
    }

    let want_dsm = args.metric != Metric::Ned;
    let want_ned = args.metric != Metric::Dsm;
    let scored: Vec<(DocumentScore, f64)> = par_map(pool, &pairs, |(g, p)| {
        let ned = if want_ned { document_ned(&g.value, p) } else { 0.0 };
        (score_document(&g.value, p), ned)
    });
    let (scores, neds): (Vec<_>, Vec<_>) = scored.into_iter().unzip();
    let report = EvalReport::from_scores(scores, &neds).map_err(|e| Diagnostic::new("eval", e.to_string()))?;

    let per_document: Vec<Value> = pairs
        .iter()
        .zip(&report.per_document)
        .zip(&neds)
        .map(|(((g, _), s), &ned)| {
            let mut entry = json!({ "line": g.line });
            if let Some(k) = &g.key {
                entry["id"] = json!(k);
            }
            if want_dsm {
                entry["distance"] = json!(s.distance);
                entry["max_len"] = json!(s.max_len);
                entry["dsm"] = json!(1.0 - s.normalized);
            }
            if want_ned {
                entry["ned"] = json!(ned);
            }
            entry
        })
        .collect();
    let body = json!({
        "corpus_size": report.corpus_size,
        "dsm": if want_dsm { json!(report.dsm) } else { Value::Null },
        "ned": if want_ned { json!(report.ned) } else { Value::Null },
        "per_document": per_document,
    });
    let mut out = Output::open(args.output.output.as_ref())?;
    out.line(&fixed(&body))?;
    out.finish()
}

fn convert(args: &ConvertArgs, pool: &ThreadPool) -> Result<(), Failure> {
    let docs = load_valid(&args.input.input, None)?;
    let file = display(&args.input.input);
    let to = args.to;
    let bins = args.bins;
    let rendered: Vec<Result<String, Diagnostic>> = par_map(pool, &docs, |r| {
        let doc = &r.value;
        let value = match to {
            Target::Markdown => json!(to_markdown(doc)),
            Target::Layout => json!(to_layout_records(doc)),
            Target::Text => json!(to_plain_text(doc)),
            Target::Tables => json!(extract_tables(doc)),
            Target::Formulas => json!(extract_formulas(doc)),
            Target::Tokens => match serialize(doc, bins) {
                Ok(seq) => json!(render_tokens(&seq)),
                Err(e) => return Err(Diagnostic::new("convert", e.to_string()).file(file.clone()).line(r.line)),
            },
        };
        Ok(value.to_string())
    });
    write_all(args.output.output.as_ref(), rendered)
}

fn write_all(path: Option<&std::path::PathBuf>, lines: Vec<Result<String, Diagnostic>>) -> Result<(), Failure> {
    let errors: Vec<Diagnostic> = lines.iter().filter_map(|l| l.as_ref().err().cloned()).collect();
    if !errors.is_empty() {
        return Err(Failure(errors));
    }
    let mut out = Output::open(path)?;
    for line in lines.into_iter().flatten() {
        out.line(&line)?;
    }
    out.finish()
}

fn order_config(flags: &OrderFlags) -> Result<OrderConfig, Failure> {
    OrderConfig::new(flags.min_gap, flags.y_tolerance).map_err(|e| Diagnostic::new("usage", e.to_string()).into())
}

fn order(args: &OrderArgs, pool: &ThreadPool) -> Result<(), Failure> {
    let cfg = order_config(&args.order)?;
    let docs = load_valid(&args.input.input, None)?;
    let lines = par_map(pool, &docs, |r| Ok(serde_json::to_string(&order_document(&r.value, &cfg)).unwrap_or_default()));
    write_all(args.output.output.as_ref(), lines)
}

/// One page of gtgen input.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageInput {
    page_width: f64,
    page_height: f64,
    #[serde(default)]
    elements: Vec<ElementSpec>,
    #[serde(default)]
    lines: Vec<RawLine>,
}

fn gtgen(args: &GtgenArgs, pool: &ThreadPool) -> Result<(), Failure> {
    let order_cfg = order_config(&args.order)?;
    let assoc_cfg = AssocConfig::new(args.iou_threshold, args.fuzzy_threshold)
        .map_err(|e| Diagnostic::new("usage", e.to_string()))?;
    let pages = read_jsonl::<PageInput>(&args.input.input, None)?;
    let file = display(&args.input.input);
    let lines = par_map(pool, &pages, |r| {
        let p = &r.value;
        assemble_ground_truth(p.page_width, p.page_height, &p.elements, &p.lines, &order_cfg, &assoc_cfg)
            .map(|gt| serde_json::to_string(&gt).unwrap_or_default())
            .map_err(|e| Diagnostic::new("gtgen", e.to_string()).file(file.clone()).line(r.line))
    });
    write_all(args.output.output.as_ref(), lines)
}
