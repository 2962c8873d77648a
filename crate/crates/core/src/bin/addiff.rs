use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use addiff::benchgen::{gen_forking, gen_linear, mutate, LinearVariant, MutationError, MutationSpec};
use addiff::diff::{self, Algorithm, CompareResult, DiffError, DiffOptions};
use addiff::model::{check_guard_exclusivity, validate, ActivityDiagram};
use addiff::report::{BenchError, BenchRow, BenchTable, DiffReport, EvolutionReport};
use addiff::text::{export_dot, parse, serialize};
use addiff::{fixtures, smv};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "addiff", version, about = "Semantic differencing for activity diagrams")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and check diagrams for well-formedness
    Validate { files: Vec<PathBuf> },
    /// List the shortest traces of A that B cannot reproduce
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// Stop at the first witness
        #[arg(long)]
        decide_only: bool,
        /// Compute addiff(B, A) instead
        #[arg(long)]
        switch_direction: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decide refinement or equivalence of A and B
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare each version with the next one
    Evolve {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate a synthetic benchmark diagram
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Write here instead of stdout
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Run both algorithms and print a table of results
    Bench {
        #[arg(long, value_enum, default_value_t = BenchSet::All)]
        set: BenchSet,
        /// Widest forking diagram
        #[arg(long, default_value_t = 3)]
        max_width: usize,
        /// Branch length of forking diagrams, fragment length of linear ones
        #[arg(long, default_value_t = 6)]
        len: usize,
        /// Decision domains of the linear family
        #[arg(long, value_delimiter = ',', default_values_t = [16, 32])]
        domains: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write a diagram as Graphviz DOT or SMV
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
        format: ExportFormat,
        /// Highlight the first witness of addiff(FILE, OTHER)
        #[arg(long, value_name = "OTHER")]
        against: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Algo::Symbolic)]
    algo: Algo,
    #[arg(long, value_name = "N")]
    max_traces: Option<usize>,
    #[arg(long, value_name = "N")]
    state_budget: Option<usize>,
    #[arg(long, value_name = "N")]
    node_budget: Option<usize>,
}

impl RunArgs {
    fn options(&self) -> DiffOptions {
        let mut o = DiffOptions::with_algorithm(match self.algo {
            Algo::Concrete => Algorithm::Concrete,
            Algo::Symbolic => Algorithm::Symbolic,
        });
        o.max_traces = self.max_traces;
        if let Some(n) = self.state_budget {
            o.state_budget = n;
        }
        if let Some(n) = self.node_budget {
            o.node_budget = n;
        }
        o
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Concrete,
    Symbolic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Smv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchSet {
    Fixtures,
    Forking,
    Linear,
    All,
}

#[derive(Subcommand)]
enum Family {
    /// A fork into WIDTH branches of LEN actions each
    Forking {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        len: usize,
        #[command(flatten)]
        mutation: MutationArgs,
    },
    /// Two linear fragments around one decision over 0..DOMAIN
    Linear {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        domain: usize,
        #[arg(long, value_enum, default_value_t = Variant::Input)]
        variant: Variant,
        #[command(flatten)]
        mutation: MutationArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Input,
    Local,
}

#[derive(Args)]
struct MutationArgs {
    /// Apply the family's standard mutation
    #[arg(long, conflicts_with_all = ["rename", "delete", "move_after"])]
    mutate: bool,
    /// Rename an action, given as NODE=NAME
    #[arg(long, value_name = "NODE=NAME")]
    rename: Option<String>,
    /// Delete an action node
    #[arg(long, value_name = "NODE")]
    delete: Option<String>,
    /// Move an action after another node, given as NODE=ANCHOR
    #[arg(long = "move", value_name = "NODE=ANCHOR")]
    move_after: Option<String>,
}

impl MutationArgs {
    fn spec(&self, standard: MutationSpec) -> Result<Option<MutationSpec>, CliError> {
        let pair = |s: &str| -> Result<(String, String), CliError> {
            s.split_once('=')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or_else(|| CliError::Usage(format!("expected NODE=VALUE, got `{s}`")))
        };
        let mut specs = Vec::new();
        if self.mutate {
            specs.push(standard);
        }
        if let Some(r) = &self.rename {
            let (t, n) = pair(r)?;
            specs.push(MutationSpec::rename(&t, &n));
        }
        if let Some(t) = &self.delete {
            specs.push(MutationSpec::delete(t));
        }
        if let Some(m) = &self.move_after {
            let (t, a) = pair(m)?;
            specs.push(MutationSpec::move_after(&t, &a));
        }
        match specs.len() {
            0 | 1 => Ok(specs.pop()),
            _ => Err(CliError::Usage("give at most one mutation".into())),
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse(_) => 2,
            CliError::Diff(e) | CliError::Bench(BenchError::Diff(e)) if e.is_budget() => 4,
            CliError::Diff(DiffError::IncomparableInputs { .. }) => 2,
            _ => 3,
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_file(path: &Path) -> Result<ActivityDiagram, CliError> {
    parse(&read_text(path)?).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", path.display())).collect();
        CliError::Parse(lines.join("\n"))
    })
}

/// All diagnostics of `ad`, guard checks included.
fn diagnostics(ad: &ActivityDiagram) -> Vec<String> {
    let mut out: Vec<String> = validate(ad).iter().map(ToString::to_string).collect();
    if out.is_empty() {
        out.extend(check_guard_exclusivity(ad).iter().map(ToString::to_string));
    }
    out
}

fn load(path: &Path) -> Result<ActivityDiagram, CliError> {
    let ad = parse_file(path)?;
    let diags = diagnostics(&ad);
    if !diags.is_empty() {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", path.display())).collect();
        return Err(CliError::Invalid(lines.join("\n")));
    }
    Ok(ad)
}

fn write_out(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            emit(text);
            Ok(())
        }
    }
}

/// Prints `text` with a trailing newline. A closed stdout ends output
/// silently.
fn emit(text: &str) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{}", text.trim_end_matches('\n'));
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Validate { files } => {
            if files.is_empty() {
                return Err(CliError::Usage("no files given".into()));
            }
            let mut code = 0;
            for f in &files {
                let ad = parse_file(f)?;
                let diags = diagnostics(&ad);
                if diags.is_empty() {
                    emit(&format!("{}: ok ({} nodes, {} transitions)", f.display(), ad.nodes.len(), ad.transitions.len()));
                } else {
                    for d in diags {
                        emit(&format!("{}: {d}", f.display()));
                    }
                    code = 3;
                }
            }
            Ok(code)
        }
        Cmd::Diff {
            a,
            b,
            decide_only,
            switch_direction,
            format,
            run,
        } => {
            let (mut ad1, mut ad2) = (load(&a)?, load(&b)?);
            if switch_direction {
                std::mem::swap(&mut ad1, &mut ad2);
            }
            let opts = run.options();
            let outcome = if decide_only {
                diff::decide(&ad1, &ad2, &opts)?
            } else {
                diff::addiff(&ad1, &ad2, &opts)?
            };
            let report = DiffReport::new(&ad1.name, &ad2.name, &outcome, decide_only);
            match format {
                Format::Text => emit(&report.to_string()),
                Format::Json => emit(&report.to_json()),
                Format::Dot => {
                    let dot = export_dot(&ad1, outcome.traces.first()).map_err(|e| CliError::Invalid(e.to_string()))?;
                    emit(&dot);
                }
            }
            Ok(u8::from(report.has_difference()))
        }
        Cmd::Compare { a, b, format, run } => {
            let (ad1, ad2) = (load(&a)?, load(&b)?);
            let r = diff::compare(&ad1, &ad2, &run.options())?;
            match format {
                Format::Json => emit(&serde_json::json!({ "left": ad1.name, "right": ad2.name, "result": r }).to_string()),
                _ => emit(&format!("{} {r} {}", ad1.name, ad2.name)),
            }
            Ok(u8::from(r != CompareResult::Equivalent))
        }
        Cmd::Evolve { files, format, run } => {
            let ads = files.iter().map(|f| load(f)).collect::<Result<Vec<_>, _>>()?;
            let report = EvolutionReport {
                steps: diff::analyze_history(&ads, &run.options())?,
            };
            match format {
                Format::Json => emit(&report.to_json()),
                _ => emit(&report.to_string()),
            }
            Ok(0)
        }
        Cmd::Gen { family, output } => {
            let ad = match family {
                Family::Forking { width, len, mutation } => {
                    if width == 0 || len == 0 {
                        return Err(CliError::Usage("width and len must be at least 1".into()));
                    }
                    with_mutation(gen_forking(width, len), &mutation, MutationSpec::forking_default())?
                }
                Family::Linear {
                    len,
                    domain,
                    variant,
                    mutation,
                } => {
                    if len == 0 || domain < 2 || domain % 2 != 0 {
                        return Err(CliError::Usage("len must be at least 1 and domain even and at least 2".into()));
                    }
                    let v = match variant {
                        Variant::Input => LinearVariant::Input,
                        Variant::Local => LinearVariant::Local,
                    };
                    with_mutation(gen_linear(len, domain, v), &mutation, MutationSpec::linear_default())?
                }
            };
            write_out(output.as_deref(), &serialize(&ad))?;
            Ok(0)
        }
        Cmd::Bench {
            set,
            max_width,
            len,
            domains,
            format,
            run,
        } => {
            let opts = run.options();
            let mut table = BenchTable::default();
            let mut push = |name: String, a: &ActivityDiagram, b: &ActivityDiagram| -> Result<(), CliError> {
                let row = BenchRow::measure(&name, a, b, &opts)?;
                if format == Format::Text {
                    eprintln!("done: {name}");
                }
                table.rows.push(row);
                Ok(())
            };
            if matches!(set, BenchSet::Fixtures | BenchSet::All) {
                for h in [fixtures::hire_history(), fixtures::proj_history()] {
                    for w in h.windows(2) {
                        push(format!("{}/{}", w[0].name, w[1].name), &w[0], &w[1])?;
                    }
                }
            }
            if matches!(set, BenchSet::Forking | BenchSet::All) {
                for w in 1..=max_width {
                    let a = gen_forking(w, len);
                    let b = mutate(&a, &MutationSpec::forking_default())?;
                    push(format!("forking(W{w}/L{len})/mutated"), &a, &b)?;
                }
            }
            if matches!(set, BenchSet::Linear | BenchSet::All) {
                for &d in &domains {
                    if d < 2 || d % 2 != 0 {
                        return Err(CliError::Usage(format!("domain {d} must be even and at least 2")));
                    }
                    let a = gen_linear(len, d, LinearVariant::Local);
                    let b = mutate(&a, &MutationSpec::linear_default())?;
                    push(format!("lbl(L{len}/D{d})/mutated"), &a, &b)?;
                }
            }
            match format {
                Format::Json => emit(&serde_json::to_string_pretty(&table).expect("tables serialize")),
                _ => emit(&table.to_string()),
            }
            Ok(0)
        }
        Cmd::Export {
            file,
            format,
            against,
            output,
            run,
        } => {
            let ad = load(&file)?;
            let text = match format {
                ExportFormat::Smv => smv::emit_smv(&ad).map_err(DiffError::from)?,
                ExportFormat::Dot => {
                    let trace = match &against {
                        Some(o) => diff::addiff(&ad, &load(o)?, &run.options())?.traces.into_iter().next(),
                        None => None,
                    };
                    export_dot(&ad, trace.as_ref()).map_err(|e| CliError::Invalid(e.to_string()))?
                }
            };
            write_out(output.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn with_mutation(ad: ActivityDiagram, m: &MutationArgs, standard: MutationSpec) -> Result<ActivityDiagram, CliError> {
    match m.spec(standard)? {
        Some(spec) => Ok(mutate(&ad, &spec)?),
        None => Ok(ad),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
