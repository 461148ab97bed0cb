//! Browser bindings: every entry point takes BD1 text and returns JSON or
//! SVG text, so the page needs no knowledge of the Rust types.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use bratteli::{
    complete, hereditary_saturated_closure, parse_bd1, to_dot, verify_all, write_bd1, BratteliDiagram, VerifyOptions,
    VertexId,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

const LEVEL_GAP: f64 = 90.0;
const VERTEX_GAP: f64 = 80.0;
const RADIUS: f64 = 16.0;
const MARGIN: f64 = 40.0;

fn load(text: &str) -> Result<BratteliDiagram, String> {
    parse_bd1(text).map_err(|e| e.to_string())
}

fn valid(text: &str) -> Result<BratteliDiagram, String> {
    let d = load(text)?;
    let report = d.validate(true);
    match report.first_error() {
        Some(err) => Err(format!("invalid diagram: {err}")),
        None => Ok(d),
    }
}

/// Completes an unmarked diagram. The result carries the completion as BD1
/// and SVG, its DOT export, and the deficiency of every original vertex.
pub fn completion_json(text: &str) -> Result<String, String> {
    let d = load(text)?;
    let c = complete(&d).map_err(|e| e.to_string())?;
    let sigma: Vec<_> = c
        .sigma()
        .iter()
        .map(|(v, s)| json!({ "vertex": v.to_string(), "sigma": s }))
        .collect();
    let added: Vec<String> = c.s_set().iter().map(|&w| c.vertex_name(w)).collect();
    let out = json!({
        "bd1": write_bd1(c.ke()),
        "dot": to_dot(c.ke()),
        "svg": svg(c.ke()),
        "sigma": sigma,
        "added": added,
    });
    Ok(out.to_string())
}

/// Runs the verification pipeline and returns its JSON report.
pub fn verify_json(text: &str, level_cap: Option<usize>, pair_budget: usize, seed: u64) -> Result<String, String> {
    let d = load(text)?;
    let options = VerifyOptions {
        level_cap,
        pair_budget,
        seed,
    };
    Ok(verify_all(&d, "input", &options).to_json())
}

/// Closes a comma-separated `level:index` seed set.
pub fn closure_json(text: &str, seed_set: &str) -> Result<String, String> {
    let d = valid(text)?;
    let seed = seed_set
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<BTreeSet<VertexId>, _>>()?;
    let result = hereditary_saturated_closure(&d, &seed).map_err(|e| e.to_string())?;
    let missing: Vec<String> = d
        .vertices()
        .filter(|v| !result.closure.contains(v))
        .map(|v| v.to_string())
        .collect();
    let out = json!({
        "closure": result.closure.iter().map(VertexId::to_string).collect::<Vec<_>>(),
        "trace": result.trace,
        "missing": missing,
        "svg": svg_highlighted(&d, &result.closure),
    });
    Ok(out.to_string())
}

pub fn svg_text(text: &str) -> Result<String, String> {
    valid(text).map(|d| svg(&d))
}

pub fn svg(d: &BratteliDiagram) -> String {
    svg_highlighted(d, &BTreeSet::new())
}

fn position(d: &BratteliDiagram, v: VertexId, width: f64) -> (f64, f64) {
    let k = d.level_size(v.level) as f64;
    let x = width / 2.0 + (v.index as f64 - (k - 1.0) / 2.0) * VERTEX_GAP;
    let y = MARGIN + (v.level - 1) as f64 * LEVEL_GAP;
    (x, y)
}

/// Layered drawing: one row per level, marked vertices as squares, parallel
/// edges fanned out as curves. Vertices in `highlight` are filled.
pub fn svg_highlighted(d: &BratteliDiagram, highlight: &BTreeSet<VertexId>) -> String {
    let widest = (1..=d.num_levels()).map(|l| d.level_size(l)).max().unwrap_or(1);
    let width = 2.0 * MARGIN + (widest.max(1) - 1) as f64 * VERTEX_GAP;
    let height = 2.0 * MARGIN + d.num_levels().saturating_sub(1) as f64 * LEVEL_GAP;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    s.push_str("<g class=\"edges\" fill=\"none\" stroke=\"#555\">\n");
    for level in 1..d.num_levels() {
        for (src, row) in d.matrix(level).iter().enumerate() {
            for (dst, &m) in row.iter().enumerate() {
                let (x1, y1) = position(d, VertexId::new(level, src), width);
                let (x2, y2) = position(d, VertexId::new(level + 1, dst), width);
                for copy in 0..m {
                    let bend = (copy as f64 - (m as f64 - 1.0) / 2.0) * 14.0;
                    let (cx, cy) = ((x1 + x2) / 2.0 + bend, (y1 + y2) / 2.0);
                    let _ = writeln!(s, r#"<path d="M{x1} {y1} Q{cx} {cy} {x2} {y2}"/>"#);
                }
            }
        }
    }
    s.push_str("</g>\n<g class=\"vertices\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">\n");
    for v in d.vertices() {
        let (x, y) = position(d, v, width);
        let fill = if highlight.contains(&v) { "#f5c542" } else { "#fff" };
        let _ = write!(s, r#"<g class="vertex" data-vertex="{v}">"#);
        if d.is_marked(v) {
            let _ = write!(
                s,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="#000"/>"##,
                x - RADIUS,
                y - RADIUS,
                2.0 * RADIUS,
                2.0 * RADIUS
            );
        } else {
            let _ = write!(
                s,
                r##"<circle cx="{x}" cy="{y}" r="{RADIUS}" fill="{fill}" stroke="#000"/>"##
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}">{}</text><title>{v}</title></g>"#,
            y + 4.0,
            d.label(v)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[wasm_bindgen]
pub fn complete_bd1(text: &str) -> Result<String, JsError> {
    completion_json(text).map_err(|e| JsError::new(&e))
}

/// `level_cap` of 0 means no cap.
#[wasm_bindgen]
pub fn verify_bd1(text: &str, level_cap: u32, pair_budget: u32, seed: u32) -> Result<String, JsError> {
    let cap = (level_cap > 0).then_some(level_cap as usize);
    verify_json(text, cap, pair_budget as usize, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn closure_bd1(text: &str, seed_set: &str) -> Result<String, JsError> {
    closure_json(text, seed_set).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn render_bd1(text: &str) -> Result<String, JsError> {
    svg_text(text).map_err(|e| JsError::new(&e))
}
