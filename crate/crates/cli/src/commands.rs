use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use semmap_core::export::GraphDocument;
use semmap_core::ingest::{parse_sequence, write_sequence, SequenceFile};
use semmap_core::lhs::{self, LhsPlan, SearchProtocol};
use semmap_core::metrics::EvalReport;
use semmap_core::olarfdssom::ClusterId;
use semmap_core::pipeline::{self, LevelReports, PipelineConfig, RunOutcome};
use semmap_core::semmap::NodeId;
use semmap_core::synth::{self, SynthSpec};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(a) => {
            let manifest = run_manifest(&a)?;
            cmd_run(&manifest).map(|_| ())
        }
        Command::Overtime(a) => cmd_overtime(&a),
        Command::Lhs(LhsCommand::Plan(a)) => cmd_lhs_plan(&a),
        Command::Lhs(LhsCommand::Search(a)) => cmd_lhs_search(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Export(a) => cmd_export(&a),
    }
}

fn run_manifest(a: &RunArgs) -> CliResult<RunManifest> {
    let mut m = match &a.manifest {
        Some(path) => RunManifest::load(path)?,
        None => RunManifest {
            inputs: Vec::new(),
            output_dir: PathBuf::from("out"),
            config: PipelineConfig::default(),
            shuffle: false,
            seed: 0,
            float_format: Default::default(),
            overtime: false,
        },
    };
    if !a.inputs.is_empty() {
        m.inputs = a.inputs.clone();
    }
    if let Some(out) = &a.out {
        m.output_dir = out.clone();
    }
    m.shuffle |= a.shuffle;
    m.overtime |= a.overtime;
    if let Some(seed) = a.seed {
        m.seed = seed;
    }
    if let Some(f) = &a.float_format {
        m.float_format = f.parse()?;
    }
    m.config = a.config.apply(m.config);
    Ok(m)
}

pub fn read_sequences(paths: &[PathBuf]) -> CliResult<Vec<SequenceFile>> {
    if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
        return Err(CliError::Validation(format!("input {} does not exist", missing.display())));
    }
    let mut seqs = Vec::with_capacity(paths.len());
    for p in paths {
        let text = fs::read_to_string(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
        let mut seq = parse_sequence(&text).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
        if seq.id.is_none() {
            seq.id = p.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        seqs.push(seq);
    }
    if let Some(first) = seqs.first() {
        if let Some((p, s)) = paths.iter().zip(&seqs).find(|(_, s)| s.object_names != first.object_names) {
            return Err(CliError::Validation(format!(
                "{}: object header differs from {} ({} objects)",
                p.display(),
                paths[0].display(),
                s.n_objects()
            )));
        }
    }
    Ok(seqs)
}

/// Sizes the object dimension from the inputs.
fn fit_config(mut cfg: PipelineConfig, seqs: &[SequenceFile]) -> CliResult<PipelineConfig> {
    if let Some(first) = seqs.first() {
        cfg.semmap.n_objects = first.n_objects();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn training_order(n: usize, shuffle: bool, seed: u64) -> Vec<usize> {
    if shuffle {
        pipeline::shuffled_order(n, seed)
    } else {
        (0..n).collect()
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Files written by [`cmd_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub reports: Option<LevelReports>,
}

pub fn cmd_run(m: &RunManifest) -> CliResult<RunArtifacts> {
    m.check_inputs()?;
    let seqs = read_sequences(&m.inputs)?;
    let cfg = fit_config(m.config.clone(), &seqs)?;
    let order = training_order(seqs.len(), m.shuffle, m.seed);
    let outcome = pipeline::run_sequences(&seqs, &cfg, &order)?;
    fs::create_dir_all(&m.output_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", m.output_dir.display())))?;

    let mut files = Vec::new();
    let mut put = |name: String, contents: String| -> CliResult<()> {
        let path = m.output_dir.join(name);
        write_file(&path, &contents)?;
        files.push(path);
        Ok(())
    };

    let assignments = final_assignments(&outcome);
    for (k, run) in outcome.state.sequences.iter().enumerate() {
        let doc = GraphDocument::from_map(&run.topo, assignments.as_ref().map(|a| &a[k]));
        put(format!("topomap-{k:02}.txt"), doc.to_text())?;
        put(format!("topomap-{k:02}.dot"), doc.to_dot())?;
    }
    put("som_state.txt".into(), outcome.state.som.to_state_string(m.float_format))?;
    put("assignments.tsv".into(), assignment_table(&outcome, assignments.as_deref()))?;

    let reports = outcome.final_report()?;
    if let Some(r) = &reports {
        put("report.tsv".into(), report_table(r))?;
    }
    if m.overtime && seqs.len() >= 2 {
        put("overtime.tsv".into(), overtime_table(&outcome, Level::Node)?)?;
    }
    Ok(RunArtifacts { files, reports })
}

fn final_assignments(outcome: &RunOutcome) -> Option<Vec<BTreeMap<NodeId, ClusterId>>> {
    outcome.checkpoints.last().and_then(|c| c.assignments.clone())
}

fn assignment_table(outcome: &RunOutcome, assignments: Option<&[BTreeMap<NodeId, ClusterId>]>) -> String {
    let mut out = String::from("sequence\trecord\tnode\tcluster\tlabel\n");
    for (k, run) in outcome.state.sequences.iter().enumerate() {
        for (i, (entry, label)) in run.log.iter().zip(&run.labels).enumerate() {
            let cluster = assignments
                .and_then(|a| a[k].get(&entry.node))
                .map_or_else(|| "-".to_string(), |c| c.to_string());
            let _ = writeln!(
                out,
                "{}\t{i}\t{}\t{cluster}\t{}",
                run.id,
                entry.node,
                label.as_deref().unwrap_or("-")
            );
        }
    }
    out
}

fn report_row(out: &mut String, level: &str, r: &EvalReport) {
    let _ = writeln!(
        out,
        "{level}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
        r.accuracy, r.clustering_error, r.matched_accuracy, r.n_clusters, r.n_categories, r.n_items
    );
}

pub fn report_table(r: &LevelReports) -> String {
    let mut out = String::from("level\taccuracy\tclustering_error\tmatched_accuracy\tclusters\tcategories\titems\n");
    report_row(&mut out, "node", &r.node);
    report_row(&mut out, "frame", &r.frame);
    out
}

fn pick(r: &Option<LevelReports>, level: Level) -> Option<&EvalReport> {
    r.as_ref().map(|r| match level {
        Level::Node => &r.node,
        Level::Frame => &r.frame,
    })
}

/// One row per sequence in training order, then the share of sequences whose
/// final score is at least as good as the score right after their training.
pub fn overtime_table(outcome: &RunOutcome, level: Level) -> CliResult<String> {
    let mut out = String::from("position\tsequence\tce_mid\tce_final\taccuracy_mid\taccuracy_final\n");
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
    let (mut scored, mut ce_ok, mut acc_ok) = (0usize, 0usize, 0usize);
    for (k, run) in outcome.state.sequences.iter().enumerate() {
        let (mid, fin) = outcome.overtime(k)?;
        let (m, f) = (pick(&mid, level), pick(&fin, level));
        let _ = writeln!(
            out,
            "{k}\t{}\t{}\t{}\t{}\t{}",
            run.id,
            fmt(m.map(|r| r.clustering_error)),
            fmt(f.map(|r| r.clustering_error)),
            fmt(m.map(|r| r.accuracy)),
            fmt(f.map(|r| r.accuracy)),
        );
        if let (Some(m), Some(f)) = (m, f) {
            scored += 1;
            ce_ok += usize::from(f.clustering_error <= m.clustering_error);
            acc_ok += usize::from(f.accuracy >= m.accuracy);
        }
    }
    let frac = |n: usize| if scored == 0 { "NA".to_string() } else { format!("{:.6}", n as f64 / scored as f64) };
    let _ = writeln!(out, "# ce_final_not_worse\t{}", frac(ce_ok));
    let _ = writeln!(out, "# accuracy_final_not_worse\t{}", frac(acc_ok));
    Ok(out)
}

pub fn cmd_overtime(a: &OvertimeArgs) -> CliResult<()> {
    if a.inputs.len() < 2 {
        return Err(CliError::Validation("the over-time table needs at least two sequences".into()));
    }
    let seqs = read_sequences(&a.inputs)?;
    let cfg = fit_config(a.config.apply(PipelineConfig::default()), &seqs)?;
    let order = training_order(seqs.len(), a.order.shuffle, a.order.seed);
    let outcome = pipeline::run_sequences(&seqs, &cfg, &order)?;
    emit(a.out.as_deref(), &overtime_table(&outcome, a.level)?)
}

pub fn cmd_lhs_plan(a: &LhsPlanArgs) -> CliResult<()> {
    let plan = lhs::sample(&lhs::search_ranges(), a.samples, a.seed)?;
    emit(a.out.as_deref(), &plan.to_tsv())
}

pub fn cmd_lhs_search(a: &LhsSearchArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.plan)
        .map_err(|e| CliError::Validation(format!("cannot read plan {}: {e}", a.plan.display())))?;
    let plan = LhsPlan::from_tsv(&text, &lhs::search_ranges())?;
    let seqs = read_sequences(&a.inputs)?;
    let base = fit_config(a.config.apply(PipelineConfig::default()), &seqs)?;
    let protocol = SearchProtocol {
        base,
        order: training_order(seqs.len(), a.order.shuffle, a.order.seed),
        frame_level: a.level == Level::Frame,
    };
    let results = lhs::search(&plan, &seqs, &protocol)?;
    emit(a.out.as_deref(), &lhs::results_tsv(&plan.ranges, &results))?;
    if let Some(path) = &a.sensitivity {
        write_file(path, &lhs::sensitivity_tsv(&lhs::sensitivity(&plan.ranges, &results, a.bins)))?;
    }
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let mut spec: SynthSpec = match (&a.demo, &a.spec) {
        (Some(name), _) => synth::demo(name, a.seed.unwrap_or(0)).ok_or_else(|| {
            CliError::Validation(format!("unknown demo {name:?}; known: {}", synth::DEMO_NAMES.join(", ")))
        })?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(CliError::Validation("give --demo or --spec".into())),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let seq = synth::generate_synthetic(&spec)?;
    emit(a.out.as_deref(), &write_sequence(&seq)?)
}

pub fn cmd_export(a: &ExportArgs) -> CliResult<()> {
    let seqs = read_sequences(std::slice::from_ref(&a.input))?;
    let cfg = fit_config(a.config.apply(PipelineConfig::default()), &seqs)?;
    let outcome = pipeline::run_sequences(&seqs, &cfg, &[0])?;
    let assignments = final_assignments(&outcome);
    let doc = GraphDocument::from_map(&outcome.state.sequences[0].topo, assignments.as_ref().map(|a| &a[0]));
    let text = match a.format {
        ExportFormat::Text => doc.to_text(),
        ExportFormat::Dot => doc.to_dot(),
    };
    emit(a.out.as_deref(), &text)
}
