//! Command-line surface tying the pipeline together. Exit codes: 0 on
//! success, 1 on validation/parse errors, 2 on usage errors (via clap).
//! All output is deterministic; nothing touches the network.

use crate::io::{
    load_model, load_model_lenient, render_full_report, render_register, save_model,
    ReportFormat,
};
use crate::model::validate;
use crate::risk::assess;
use crate::tree::{enumerate_paths, path_feasibility};
use crate::update::{apply_event, diff, ingest_cve, DisclosureEvent};
use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "actism", version, about = "Dynamic security modelling for automotive systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file against every structural invariant
    Validate { model: PathBuf },
    /// Compute the risk register for a model
    Assess {
        model: PathBuf,
        /// Output format
        #[arg(long, value_enum, default_value = "markdown-table")]
        format: ReportFormat,
        /// Write output to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the full analyst report with impact level definitions
    Report { model: PathBuf },
    /// Enumerate the attack paths of one persona's tree
    TreePaths {
        model: PathBuf,
        /// Persona id whose tree to analyse
        #[arg(long)]
        persona: String,
    },
    /// Apply a disclosure event, writing the successor model version
    ApplyEvent {
        model: PathBuf,
        event: PathBuf,
        /// Path for the updated model
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two model versions field by field
    Diff { model_a: PathBuf, model_b: PathBuf },
    /// Propose candidate disclosure events from a CVE feed file
    ImportCve { model: PathBuf, feed: PathBuf },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { model } => cmd_validate(&model),
        Command::Assess { model, format, out } => cmd_assess(&model, format, out.as_deref()),
        Command::Report { model } => cmd_report(&model),
        Command::TreePaths { model, persona } => cmd_tree_paths(&model, &persona),
        Command::ApplyEvent { model, event, out } => cmd_apply_event(&model, &event, &out),
        Command::Diff { model_a, model_b } => cmd_diff(&model_a, &model_b),
        Command::ImportCve { model, feed } => cmd_import_cve(&model, &feed),
    }
}

fn cmd_validate(path: &Path) -> Result<ExitCode> {
    let model = load_model_lenient(path)?;
    let report = validate(&model);
    for issue in &report.issues {
        println!(
            "{}: {}: {}",
            match issue.severity {
                crate::model::IssueSeverity::Error => "error",
                crate::model::IssueSeverity::Warning => "warning",
            },
            issue.path,
            issue.message
        );
    }
    if report.is_clean() {
        println!(
            "ok: {} errors, {} warnings",
            report.errors().count(),
            report.warnings().count()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_assess(path: &Path, format: ReportFormat, out: Option<&Path>) -> Result<ExitCode> {
    let model = load_model(path)?;
    let register = assess(&model, &model.matrix())?;
    let rendered = render_register(&register, format);
    match out {
        Some(out_path) => std::fs::write(out_path, rendered)
            .with_context(|| format!("writing {}", out_path.display()))?,
        None => print!("{rendered}"),
    }
    for warning in &register.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(path: &Path) -> Result<ExitCode> {
    let model = load_model(path)?;
    let register = assess(&model, &model.matrix())?;
    print!("{}", render_full_report(&model, &register));
    Ok(ExitCode::SUCCESS)
}

fn cmd_tree_paths(path: &Path, persona_id: &str) -> Result<ExitCode> {
    let model = load_model(path)?;
    let persona = model
        .persona_by_id(persona_id)
        .ok_or_else(|| anyhow!("persona {persona_id:?} not found"))?;
    let tree = model
        .tree_by_id(&persona.tree)
        .ok_or_else(|| anyhow!("tree {:?} not found", persona.tree))?;
    println!("persona {} ({}): {}", persona.id, persona.name, persona.goal);
    for path in enumerate_paths(tree)? {
        let leaves: Vec<String> = path
            .leaves
            .iter()
            .map(|leaf| match &tree.nodes[leaf] {
                crate::tree::Node::Leaf { label, threat: Some(t) } => format!("{leaf} ({label}, threat {t})"),
                crate::tree::Node::Leaf { label, threat: None } => format!("{leaf} ({label})"),
                crate::tree::Node::Gate { .. } => leaf.clone(),
            })
            .collect();
        match path_feasibility(tree, &path, &model) {
            Ok(score) => println!("- feasibility {score}: {}", leaves.join(" + ")),
            Err(_) => println!("- feasibility n/a: {}", leaves.join(" + ")),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_apply_event(model_path: &Path, event_path: &Path, out: &Path) -> Result<ExitCode> {
    let model = load_model(model_path)?;
    let text = std::fs::read_to_string(event_path)
        .with_context(|| format!("reading {}", event_path.display()))?;
    let event: DisclosureEvent = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", event_path.display()))?;
    let (next, report) = apply_event(&model, &model.matrix(), &event)?;
    save_model(&next, out)?;
    println!(
        "model version {} -> {} written to {}",
        report.model_versions.0,
        report.model_versions.1,
        out.display()
    );
    print_change_rows(&report.rows);
    Ok(ExitCode::SUCCESS)
}

fn cmd_diff(path_a: &Path, path_b: &Path) -> Result<ExitCode> {
    let a = load_model(path_a)?;
    let b = load_model(path_b)?;
    let matrix = b.matrix();
    let report = diff(&a, &b, &matrix)?;
    println!("model versions: {} -> {}", report.model_versions.0, report.model_versions.1);
    if report.is_empty() {
        println!("no differences");
    } else {
        print_change_rows(&report.rows);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_change_rows(rows: &[crate::update::ChangeRow]) {
    for row in rows {
        println!("{} {}: {} -> {}", row.threat_id, row.field, row.before, row.after);
    }
}

fn cmd_import_cve(model_path: &Path, feed_path: &Path) -> Result<ExitCode> {
    let model = load_model(model_path)?;
    let feed = std::fs::read_to_string(feed_path)
        .with_context(|| format!("reading {}", feed_path.display()))?;
    let outcome = ingest_cve(&feed, &model)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    let mut json = serde_json::to_string_pretty(&outcome.candidates)?;
    json.push('\n');
    print!("{json}");
    Ok(ExitCode::SUCCESS)
}
