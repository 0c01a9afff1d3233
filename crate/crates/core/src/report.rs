//! Text and JSON renderings of synchronization reports. Both are
//! deterministic: views and web services come out ordered by id.

use serde_json::{json, Value};

use crate::esql::print_view;
use crate::sync::{SyncReport, ViewOutcome, WsStatus};

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}\n")).collect()
}

pub fn render_text(report: &SyncReport) -> String {
    let mut out = format!("event: {}\n", report.event);
    if report.per_view.is_empty() {
        out.push_str("no view references the deleted component\n");
    }
    for (id, outcome) in &report.per_view {
        match outcome {
            ViewOutcome::Unchanged => out.push_str(&format!("view {id}: unchanged\n")),
            ViewOutcome::Rewritten { view, extent, dropped } => {
                out.push_str(&format!("view {id}: rewritten, extent {extent}\n"));
                out.push_str(&indent(&print_view(view)));
                for d in dropped {
                    out.push_str(&format!("  dropped {d}\n"));
                }
            }
            ViewOutcome::Failed { message } => out.push_str(&format!("view {id}: {message}\n")),
        }
    }
    for (ws, status) in &report.per_ws {
        match status {
            WsStatus::Extent(e) => out.push_str(&format!("web service {ws}: synchronized, extent {e}\n")),
            WsStatus::FailedWithFallback(Some(f)) => {
                out.push_str(&format!("web service {ws}: not synchronized, replace with {f}\n"))
            }
            WsStatus::FailedWithFallback(None) => out.push_str(&format!(
                "web service {ws}: not synchronized, no replacement available\n"
            )),
        }
    }
    out
}

pub fn outcome_json(outcome: &ViewOutcome) -> Value {
    match outcome {
        ViewOutcome::Unchanged => json!({ "outcome": "unchanged" }),
        ViewOutcome::Rewritten { view, extent, dropped } => json!({
            "outcome": "rewritten",
            "extent": extent.symbol(),
            "definition": print_view(view),
            "dropped": dropped.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        }),
        ViewOutcome::Failed { message } => json!({ "outcome": "failed", "message": message }),
    }
}

pub fn render_json(report: &SyncReport) -> Value {
    let views: Vec<Value> = report
        .per_view
        .iter()
        .map(|(id, o)| {
            let mut v = outcome_json(o);
            v["id"] = json!(id);
            v
        })
        .collect();
    let services: Vec<Value> = report
        .per_ws
        .iter()
        .map(|(id, s)| match s {
            WsStatus::Extent(e) => json!({ "id": id, "status": "synchronized", "extent": e.symbol() }),
            WsStatus::FailedWithFallback(f) => json!({ "id": id, "status": "failed", "fallback": f }),
        })
        .collect();
    json!({
        "event": report.event.to_string(),
        "views": views,
        "web_services": services,
    })
}
