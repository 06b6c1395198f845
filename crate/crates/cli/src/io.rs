//! Model serialization.
//!
//! A model is stored as one self-describing JSON document with three
//! sections: a `header` (sizes and partition boundaries), an `actions` list
//! holding one sparse transition matrix per action as `[source, target,
//! probability]` triplets, and a dense `rewards` table of shape
//! `n_states x n_actions`. Floats are written with 17 significant digits so
//! that parsing restores the exact binary64 values.

use serde::Deserialize;

use sisdmdp_core::{validate_structure, Chain, Error, Model, PartitionLayout, Result};

/// Renders `model` as a JSON document; [`parse_model`] restores it exactly.
pub fn serialize_model(model: &Model) -> String {
    let layout = model.layout();
    let n = model.n_states();
    let mut out = String::new();
    out.push_str("{\n  \"header\": {\n");
    out.push_str(&format!("    \"n_states\": {n},\n"));
    out.push_str(&format!("    \"n_actions\": {},\n", model.n_actions()));
    out.push_str(&format!("    \"k\": {},\n", layout.k()));
    let bounds: Vec<String> = layout.boundaries().iter().map(usize::to_string).collect();
    out.push_str(&format!(
        "    \"partition_boundaries\": [{}]\n",
        bounds.join(", ")
    ));
    out.push_str("  },\n  \"actions\": [\n");
    let action_blocks: Vec<String> = model
        .actions()
        .iter()
        .enumerate()
        .map(|(a, chain)| {
            let arcs: Vec<String> = (0..n)
                .flat_map(|s| {
                    chain
                        .row(s)
                        .iter()
                        .map(move |(t, p)| format!("        [{s}, {t}, {p:.16e}]"))
                })
                .collect();
            format!(
                "    {{\n      \"action\": {a},\n      \"arcs\": [\n{}\n      ]\n    }}",
                arcs.join(",\n")
            )
        })
        .collect();
    out.push_str(&action_blocks.join(",\n"));
    out.push_str("\n  ],\n  \"rewards\": [\n");
    let reward_rows: Vec<String> = (0..n)
        .map(|s| {
            let row: Vec<String> = model
                .actions()
                .iter()
                .map(|chain| format!("{:.16e}", chain.reward(s)))
                .collect();
            format!("    [{}]", row.join(", "))
        })
        .collect();
    out.push_str(&reward_rows.join(",\n"));
    out.push_str("\n  ]\n}\n");
    out
}

#[derive(Deserialize)]
struct ModelDoc {
    header: HeaderDoc,
    actions: Vec<ActionDoc>,
    rewards: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct HeaderDoc {
    n_states: usize,
    n_actions: usize,
    k: usize,
    partition_boundaries: Vec<usize>,
}

#[derive(Deserialize)]
struct ActionDoc {
    action: usize,
    arcs: Vec<(usize, usize, f64)>,
}

/// Reads the document shape and rebuilds the chains through the validating
/// constructors, without checking the decomposable structure. Lets callers
/// inspect structurally broken models; [`parse_model`] is the strict entry
/// point.
pub fn load_document(text: &str) -> Result<(Vec<Chain>, PartitionLayout)> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidModel(format!("malformed model document: {e}")))?;
    let object = value
        .as_object()
        .ok_or_else(|| Error::InvalidModel("model document is not a JSON object".into()))?;
    for section in ["header", "actions", "rewards"] {
        if !object.contains_key(section) {
            return Err(Error::InvalidModel(format!(
                "model document missing section `{section}`"
            )));
        }
    }
    let doc: ModelDoc = serde_json::from_value(value)
        .map_err(|e| Error::InvalidModel(format!("malformed model document: {e}")))?;

    let n = doc.header.n_states;
    let layout = PartitionLayout::new(doc.header.partition_boundaries)?;
    if layout.n_states() != n {
        return Err(Error::InvalidModel(format!(
            "partition boundaries cover {} states, header declares {n}",
            layout.n_states()
        )));
    }
    if layout.k() != doc.header.k {
        return Err(Error::InvalidModel(format!(
            "boundaries define {} partitions, header declares {}",
            layout.k(),
            doc.header.k
        )));
    }
    if doc.actions.len() != doc.header.n_actions {
        return Err(Error::InvalidModel(format!(
            "actions section lists {} matrices, header declares {}",
            doc.actions.len(),
            doc.header.n_actions
        )));
    }
    if doc.rewards.len() != n {
        return Err(Error::InvalidModel(format!(
            "rewards table has {} rows, header declares {n} states",
            doc.rewards.len()
        )));
    }
    for (s, row) in doc.rewards.iter().enumerate() {
        if row.len() != doc.header.n_actions {
            return Err(Error::InvalidModel(format!(
                "rewards row {s} has {} entries, header declares {} actions",
                row.len(),
                doc.header.n_actions
            )));
        }
    }

    let mut chains = Vec::with_capacity(doc.actions.len());
    for (a, action) in doc.actions.iter().enumerate() {
        if action.action != a {
            return Err(Error::InvalidModel(format!(
                "action block {a} is labeled {}",
                action.action
            )));
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(s, t, p) in &action.arcs {
            if s >= n {
                return Err(Error::InvalidModel(format!(
                    "action {a} has an arc from state {s}, but there are only {n} states"
                )));
            }
            rows[s].push((t, p));
        }
        let rewards: Vec<f64> = doc.rewards.iter().map(|row| row[a]).collect();
        chains.push(Chain::new(n, rows, rewards)?);
    }
    Ok((chains, layout))
}

/// Parses a model document and re-checks the decomposable structure of every
/// action matrix.
pub fn parse_model(text: &str) -> Result<Model> {
    let (chains, layout) = load_document(text)?;
    let model = Model::new(chains, layout)?;
    for (a, chain) in model.actions().iter().enumerate() {
        let report = validate_structure(chain, model.layout())?;
        if !report.is_decomposable() {
            return Err(Error::Structure(format!(
                "action {a}: {}",
                describe_violations(&report)
            )));
        }
    }
    Ok(model)
}

/// One-line summary of what a structure report rejects.
pub fn describe_violations(report: &sisdmdp_core::StructureReport) -> String {
    let mut parts = Vec::new();
    if !report.single_input_ok() {
        let (s, t) = report.single_input_violations[0];
        parts.push(format!(
            "{} arc(s) enter a partition away from its root (first: {s} -> {t})",
            report.single_input_violations.len()
        ));
    }
    if !report.single_cycle_ok() {
        let (r, cycle) = &report.single_cycle_violations[0];
        parts.push(format!(
            "partition {r} has an internal cycle avoiding the root (witness: {cycle:?})"
        ));
    }
    if !report.stochastic_ok() {
        parts.push(format!(
            "worst row-sum deviation {:.3e}",
            report.max_row_deficit
        ));
    }
    if parts.is_empty() {
        parts.push("structure checks passed".into());
    }
    parts.join("; ")
}
