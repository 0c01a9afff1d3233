//! Engine-versus-oracle trials over generated instances.

use std::fmt;

use crate::kbfile::load_document;
use crate::oracle::{enumerate_outcomes, generate_instance, InstanceSpec, Ranked};
use crate::sync::{synchronize, ve_compatible, ViewOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    Disagree(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    pub seed: u64,
    pub views_checked: usize,
    pub rewritten: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzSummary {
    pub trials: usize,
    pub agreed: usize,
    pub rewritten: usize,
    /// Lowest disagreeing seed with its reason.
    pub first_failure: Option<(u64, String)>,
}

impl fmt::Display for FuzzSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} agree", self.agreed, self.trials)?;
        if let Some((seed, why)) = &self.first_failure {
            write!(f, "\nfirst disagreement at seed {seed}: {why}")?;
        }
        Ok(())
    }
}

/// Checks one engine outcome against the oracle's set for the same view.
fn judge(view_id: &str, engine: &ViewOutcome, oracle: &std::collections::BTreeSet<Ranked>) -> Result<(), String> {
    let best = oracle
        .iter()
        .filter(|r| matches!(r.outcome, ViewOutcome::Rewritten { .. }))
        .min_by(|a, b| a.key.cmp(&b.key).then_with(|| a.outcome.cmp(&b.outcome)));
    if !oracle.iter().any(|r| r.outcome == *engine) {
        return Err(format!(
            "{view_id}: engine outcome {engine:?} not among {} oracle outcomes",
            oracle.len()
        ));
    }
    match (engine, best) {
        (ViewOutcome::Failed { .. }, Some(b)) => {
            Err(format!("{view_id}: engine failed, oracle rewrites to {:?}", b.outcome))
        }
        (ViewOutcome::Rewritten { .. }, Some(b)) => {
            let engine_key = oracle
                .iter()
                .filter(|r| r.outcome == *engine)
                .map(|r| &r.key)
                .min()
                .expect("member");
            if *engine_key != b.key {
                return Err(format!("{view_id}: engine picked {engine_key:?}, best is {:?}", b.key));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Generates the instance for `seed`, runs the engine twice and the oracle
/// once, and compares.
pub fn run_trial(seed: u64, spec: &InstanceSpec) -> TrialResult {
    let (doc, event) = generate_instance(seed, spec);
    let mut result = TrialResult {
        seed,
        views_checked: 0,
        rewritten: 0,
        verdict: Verdict::Agree,
    };
    let fail = |mut r: TrialResult, why: String| {
        r.verdict = Verdict::Disagree(why);
        r
    };
    let loaded = match load_document(&doc) {
        Ok(kb) => kb,
        Err(e) => return fail(result, format!("instance does not load: {e}")),
    };
    let run = || {
        let mut kb = loaded.clone();
        synchronize(&mut kb.wsmkb, &mut kb.wsvkb, &event)
    };
    let (first, second) = match (run(), run()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(result, format!("engine error: {e}")),
    };
    if first != second {
        return fail(result, "engine is not deterministic".into());
    }
    let affected = loaded.wsvkb.views_referencing(&event.target());
    if affected.iter().ne(first.per_view.keys()) {
        return fail(result, "report does not cover exactly the referencing views".into());
    }
    for (view_id, outcome) in &first.per_view {
        let def = &loaded.wsvkb.view(view_id).expect("loaded").definition;
        let oracle = match enumerate_outcomes(&loaded.wsmkb, def, &event, spec) {
            Ok(set) => set,
            Err(e) => return fail(result, format!("oracle: {e}")),
        };
        if let Err(why) = judge(view_id, outcome, &oracle) {
            return fail(result, why);
        }
        if let ViewOutcome::Rewritten { view, extent, .. } = outcome {
            if !ve_compatible(def.ve, *extent) || view.ve != def.ve {
                return fail(result, format!("{view_id}: extent {extent} violates VE {}", def.ve));
            }
            result.rewritten += 1;
        }
        result.views_checked += 1;
    }
    result
}

fn summarize(results: Vec<TrialResult>) -> FuzzSummary {
    let mut summary = FuzzSummary {
        trials: results.len(),
        agreed: 0,
        rewritten: 0,
        first_failure: None,
    };
    for r in results {
        summary.rewritten += r.rewritten;
        match r.verdict {
            Verdict::Agree => summary.agreed += 1,
            Verdict::Disagree(why) => {
                if summary.first_failure.as_ref().is_none_or(|(s, _)| r.seed < *s) {
                    summary.first_failure = Some((r.seed, why));
                }
            }
        }
    }
    summary
}

fn seeds(trials: usize, seed: u64) -> impl Iterator<Item = u64> + Clone {
    (0..trials as u64).map(move |i| seed.wrapping_add(i))
}

pub fn run_sequential(trials: usize, seed: u64, spec: &InstanceSpec) -> FuzzSummary {
    summarize(seeds(trials, seed).map(|s| run_trial(s, spec)).collect())
}

#[cfg(feature = "parallel")]
pub fn run_parallel(trials: usize, seed: u64, spec: &InstanceSpec) -> FuzzSummary {
    use rayon::prelude::*;
    let all: Vec<u64> = seeds(trials, seed).collect();
    summarize(all.par_iter().map(|s| run_trial(*s, spec)).collect())
}

/// Trials `seed, seed + 1, …`; spread over threads when built with the
/// `parallel` feature. The summary does not depend on the schedule.
pub fn run(trials: usize, seed: u64, spec: &InstanceSpec) -> FuzzSummary {
    #[cfg(feature = "parallel")]
    {
        run_parallel(trials, seed, spec)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_sequential(trials, seed, spec)
    }
}
