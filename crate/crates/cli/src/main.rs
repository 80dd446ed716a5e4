use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use emo_core::engine::{Segmentation, Segmenter, SegmentationConfig};
use emo_core::eval::{load_ground_truth, match_opportunities, Opportunity};
use emo_core::frontend::{translate, FrontendOptions, SourceMap};
use emo_core::ir::{parse_ir, parse_ir_unchecked, validate, IrProgram};
use emo_core::metrics::{analyze_block, locs, to_f64};
use emo_core::sdg::build_sdg;
use emo_core::suggestions::{self, Suggestion};
use emo_core::{EngineError, EvalError, FrontendError, IrError};

#[derive(Parser)]
#[command(name = "emo", version, about = "Find extract-method opportunities by successive edge contraction")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lower a toy-language source to IR plus a source map.
    Translate {
        source: PathBuf,
        #[command(flatten)]
        lowering: Lowering,
        /// Directory for `<stem>.ir` and `<stem>.map` (default: next to the source).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an IR file for structural problems.
    Validate { ir: PathBuf },
    /// Build the dependence graph of an IR file.
    Sdg {
        input: PathBuf,
        /// Emit Graphviz DOT instead of the adjacency dump.
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        lowering: Lowering,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the block census and scores of every primary block.
    Metrics {
        input: PathBuf,
        /// Only this block.
        #[arg(long)]
        block: Option<usize>,
        #[arg(long)]
        no_relay_extract: bool,
        #[command(flatten)]
        lowering: Lowering,
    },
    /// Segment programs and write suggestions.
    Segment(SegmentArgs),
    /// Score suggestions against marked opportunities.
    Eval {
        suggestions: PathBuf,
        ground_truth: PathBuf,
        #[arg(long, default_value_t = 1)]
        tolerance: usize,
    },
}

#[derive(Args, Clone, Copy)]
struct Lowering {
    /// Leave out the step statement of `for` loops.
    #[arg(long)]
    reduced_loop: bool,
    /// Keep multi-variable I/O calls as one statement.
    #[arg(long)]
    merged_io: bool,
}

impl Lowering {
    fn options(self) -> FrontendOptions {
        FrontendOptions { reduced_loop: self.reduced_loop, split_io: !self.merged_io }
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// IR files, or toy sources ending in `.c`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.41)]
    locs: f64,
    #[arg(long, default_value_t = 0.34)]
    pa: f64,
    #[arg(long)]
    no_relay_extract: bool,
    /// Write per-phase DOT snapshots and a log under `<out>/<stem>-trace/`.
    #[arg(long)]
    trace: bool,
    /// Directory for `<stem>.emo` files; suggestions go to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Source map for an IR input, as written by `translate`.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Method name recorded in the suggestions.
    #[arg(long)]
    method: Option<String>,
    #[command(flatten)]
    lowering: Lowering,
}

/// Problems with what the user handed in, as opposed to our own failures.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn is_input_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<InputError>() || c.is::<IrError>() || c.is::<FrontendError>() || c.is::<EvalError>() || c.is::<EngineError>()
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())).into())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned())
}

fn is_source(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "c")
}

struct Loaded {
    program: IrProgram,
    map: Option<SourceMap>,
    method: Option<String>,
}

fn load(path: &Path, lowering: Lowering) -> Result<Loaded> {
    let text = read(path)?;
    let ctx = || format!("in {}", path.display());
    if is_source(path) {
        let t = translate(&text, &lowering.options()).with_context(ctx)?;
        Ok(Loaded { program: t.program, map: Some(t.source_map), method: t.method })
    } else {
        let program = parse_ir(&text).with_context(ctx)?;
        Ok(Loaded { program, map: None, method: None })
    }
}

fn cmd_translate(source: &Path, lowering: Lowering, out: Option<&Path>) -> Result<()> {
    let text = read(source)?;
    let t = translate(&text, &lowering.options()).with_context(|| format!("in {}", source.display()))?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => source.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = stem(source);
    let ir = dir.join(format!("{name}.ir"));
    let map = dir.join(format!("{name}.map"));
    write(&ir, &t.program.to_text())?;
    write(&map, &t.source_map.to_text())?;
    println!("{}", ir.display());
    println!("{}", map.display());
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<()> {
    let program = parse_ir_unchecked(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let diags = validate(&program);
    if diags.is_empty() {
        println!("ok: {} statements", program.len());
        return Ok(());
    }
    for d in &diags {
        eprintln!("{}: {d}", path.display());
    }
    Err(InputError(format!("{} problem(s) in {}", diags.len(), path.display())).into())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_sdg(input: &Path, dot: bool, lowering: Lowering, out: Option<&Path>) -> Result<()> {
    let g = build_sdg(&load(input, lowering)?.program)?;
    emit(out, &if dot { g.to_dot() } else { g.debug_dump() })
}

fn cmd_metrics(input: &Path, block: Option<usize>, no_relay_extract: bool, lowering: Lowering) -> Result<()> {
    let g = build_sdg(&load(input, lowering)?.program)?;
    let blocks = match block {
        Some(b) => vec![b],
        None => g.primary_control_vertices(),
    };
    let mut text = String::new();
    for b in blocks {
        let a = analyze_block(&g, b).map_err(|e| InputError(e.to_string()))?;
        text.push_str(&a.report());
        match locs(&a, no_relay_extract) {
            Some(s) => writeln!(text, "locs {s} {:.4}", to_f64(s))?,
            None => writeln!(text, "locs -")?,
        }
        text.push('\n');
    }
    emit(None, &text)
}

fn write_trace(dir: &Path, g0: &emo_core::Sdg, seg: &Segmentation) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write(&dir.join("step-000-initial.dot"), &g0.to_dot())?;
    for (i, ph) in seg.phases.iter().enumerate() {
        let g = ph.snapshot.as_ref().context("phase snapshot missing")?;
        let name = format!("step-{:03}-{}-{}.dot", i + 1, ph.kind.name(), ph.root);
        write(&dir.join(name), &g.to_dot())?;
    }
    write(&dir.join("trace.log"), &seg.log())
}

fn cmd_segment(args: &SegmentArgs) -> Result<()> {
    let cfg = SegmentationConfig {
        locs_threshold: args.locs,
        pa_threshold: args.pa,
        no_relay_extract: args.no_relay_extract,
    };
    cfg.validate()?;
    if args.map.is_some() && args.inputs.len() > 1 {
        bail!(InputError("--map needs a single input".into()));
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    }
    let mut stdout = String::new();
    for input in &args.inputs {
        let loaded = load(input, args.lowering)?;
        let map = match &args.map {
            Some(p) => Some(SourceMap::parse(&read(p)?).with_context(|| format!("in {}", p.display()))?),
            None => loaded.map,
        };
        let method = args.method.clone().or(loaded.method).unwrap_or_else(|| stem(input));
        let g0 = build_sdg(&loaded.program)?;
        let seg = Segmenter::new(cfg).snapshots(args.trace).run(&g0);
        let recs: Vec<Suggestion> = seg
            .emos
            .iter()
            .enumerate()
            .map(|(i, e)| Suggestion::from_emo(&method, i + 1, e, map.as_ref()))
            .collect();
        let text = suggestions::render(&recs);
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        if args.trace {
            write_trace(&dir.join(format!("{}-trace", stem(input))), &g0, &seg)?;
        }
        match &args.out {
            Some(out) => write(&out.join(format!("{}.emo", stem(input))), &text)?,
            None => stdout.push_str(&text),
        }
    }
    emit(None, &stdout)
}

fn cmd_eval(sugg: &Path, truth: &Path, tolerance: usize) -> Result<()> {
    let recs = suggestions::parse(&read(sugg)?).with_context(|| format!("in {}", sugg.display()))?;
    let gt = load_ground_truth(&read(truth)?).with_context(|| format!("in {}", truth.display()))?;
    let found: Vec<Opportunity> = recs.iter().map(Suggestion::opportunity).collect();
    print!("{}", match_opportunities(&found, &gt.marks, tolerance));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Translate { source, lowering, out } => cmd_translate(&source, lowering, out.as_deref()),
        Cmd::Validate { ir } => cmd_validate(&ir),
        Cmd::Sdg { input, dot, lowering, out } => cmd_sdg(&input, dot, lowering, out.as_deref()),
        Cmd::Metrics { input, block, no_relay_extract, lowering } => {
            cmd_metrics(&input, block, no_relay_extract, lowering)
        }
        Cmd::Segment(args) => cmd_segment(&args),
        Cmd::Eval { suggestions, ground_truth, tolerance } => cmd_eval(&suggestions, &ground_truth, tolerance),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_input_error(&e) { 2 } else { 1 })
        }
    }
}
