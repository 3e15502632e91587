//! Command-line driver: typecheck, compile, run, normalize, check-laws,
//! check-diagram, and the verification suite.
//!
//! Exit status: 0 on success or an all-pass report, 1 when a check fails,
//! 2 on usage or file-format errors.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

// Reports are routinely piped into `head` and friends; when the reader
// closes the pipe, end quietly instead of panicking mid-write.
macro_rules! out {
    ($($arg:tt)*) => {
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    };
}

use ccc::diagram::parse_diagram;
use ccc::dom::DomExpr;
use ccc::lambda::{compile, parse_term_file, LambdaTerm};
use ccc::laws::{normalize, soundness_battery, RewriteTrace, Verdict};
use ccc::machine::{
    apply_fn_value, apply_mor, apply_mor_traced, elaborate, parse_semantics, FiniteSemantics,
    Value,
};
use ccc::mor::infer_type;
use ccc::suite::{default_semantics, run_suite};
use ccc::syntax::{parse_mor, parse_raw_value};

const USAGE: &str = "\
usage: ccc <command> [args] [flags]

commands:
  typecheck <morphism|file>                 print the domain and codomain
  compile <term-file> [--normalize]        compile a term to combinators
  run <term-file> --env <literal>          evaluate a compiled term
  normalize <morphism|file>                 rewrite to normal form
  check-laws                                run the law-soundness battery
  check-diagram <diagram-file>              check every claim of a diagram
  suite                                     run the verification suite

flags:
  --semantics <file|default>   finite semantics to evaluate under (default: default)
  --env <literal>              environment instance, e.g. \"[[e1, u], q]\"
  --cap <n>                    enumeration cap per domain
  --format <human|records>     report format (default: human)
  --trace                      print evaluation or rewrite traces
";

enum CliError {
    Usage(String),
    Format(String),
    Check(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Format(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Format {
    Human,
    Records,
}

struct Opts {
    positional: Vec<String>,
    semantics: String,
    env: Option<String>,
    cap: Option<u64>,
    format: Format,
    trace: bool,
    normalize: bool,
}

fn parse_opts(args: &[String]) -> Result<Opts, CliError> {
    let mut opts = Opts {
        positional: Vec::new(),
        semantics: "default".to_string(),
        env: None,
        cap: None,
        format: Format::Human,
        trace: false,
        normalize: false,
    };
    let mut i = 0;
    let usage = |msg: String| CliError::Usage(msg);
    while i < args.len() {
        let arg = &args[i];
        let value = |i: &mut usize| -> Result<String, CliError> {
            *i += 1;
            args.get(*i)
                .cloned()
                .ok_or_else(|| usage(format!("flag `{arg}` needs a value")))
        };
        match arg.as_str() {
            "--semantics" => opts.semantics = value(&mut i)?,
            "--env" => opts.env = Some(value(&mut i)?),
            "--cap" => {
                let v = value(&mut i)?;
                opts.cap = Some(
                    v.parse()
                        .map_err(|_| usage(format!("`{v}` is not a number")))?,
                );
            }
            "--format" => {
                opts.format = match value(&mut i)?.as_str() {
                    "human" => Format::Human,
                    "records" => Format::Records,
                    other => return Err(usage(format!("unknown format `{other}`"))),
                };
            }
            "--trace" => opts.trace = true,
            "--normalize" => opts.normalize = true,
            flag if flag.starts_with("--") => {
                return Err(usage(format!("unknown flag `{flag}`")));
            }
            _ => opts.positional.push(arg.clone()),
        }
        i += 1;
    }
    Ok(opts)
}

/// Positional arguments name files when they exist, inline text otherwise.
fn read_source(arg: &str) -> Result<String, CliError> {
    if std::path::Path::new(arg).exists() {
        std::fs::read_to_string(arg).map_err(|e| CliError::Format(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn load_semantics(opts: &Opts) -> Result<FiniteSemantics, CliError> {
    let mut s = if opts.semantics == "default" {
        default_semantics()
    } else {
        let text = std::fs::read_to_string(&opts.semantics)
            .map_err(|e| CliError::Format(format!("{}: {e}", opts.semantics)))?;
        parse_semantics(&text)
            .map_err(|e| CliError::Format(format!("{}: {e}", opts.semantics)))?
    };
    if let Some(cap) = opts.cap {
        s.set_cap(cap);
    }
    Ok(s)
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn record(fields: &[(&str, String)]) -> String {
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("\"{}\":\"{}\"", k, json_escape(v)))
        .collect();
    format!("{{{}}}", body.join(","))
}

fn print_trace(trace: &RewriteTrace) {
    for (i, step) in trace.steps.iter().enumerate() {
        out!("  {}. {}: {}  =>  {}", i + 1, step.rule, step.before, step.after);
    }
}

fn cmd_typecheck(opts: &Opts) -> Result<ExitCode, CliError> {
    let arg = opts
        .positional
        .first()
        .ok_or_else(|| CliError::Usage("typecheck needs a morphism".into()))?;
    let src = read_source(arg)?;
    let m = parse_mor(&src).map_err(|e| CliError::Format(e.to_string()))?;
    match infer_type(&m) {
        Ok(t) => {
            match opts.format {
                Format::Human => out!("{t}"),
                Format::Records => out!(
                    "{}",
                    record(&[
                        ("dom", t.dom.to_string()),
                        ("cod", t.cod.to_string()),
                    ])
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Err(CliError::Check(e.to_string())),
    }
}

fn cmd_compile(opts: &Opts) -> Result<ExitCode, CliError> {
    let arg = opts
        .positional
        .first()
        .ok_or_else(|| CliError::Usage("compile needs a term file".into()))?;
    let src = read_source(arg)?;
    let (ctx, term) = parse_term_file(&src).map_err(|e| CliError::Format(e.to_string()))?;
    let s = load_semantics(opts)?;
    let m = compile(&term, &ctx, &s).map_err(|e| CliError::Check(e.to_string()))?;
    let t = infer_type(&m).map_err(|e| CliError::Check(e.to_string()))?;
    let (m, trace) = if opts.normalize {
        let (n, trace) = normalize(&m).map_err(|e| CliError::Check(e.to_string()))?;
        (n, Some(trace))
    } else {
        (m, None)
    };
    match opts.format {
        Format::Human => {
            out!("{m}");
            if opts.trace {
                if let Some(trace) = &trace {
                    print_trace(trace);
                }
            }
        }
        Format::Records => out!(
            "{}",
            record(&[
                ("morphism", m.to_string()),
                ("dom", t.dom.to_string()),
                ("cod", t.cod.to_string()),
            ])
        ),
    }
    Ok(ExitCode::SUCCESS)
}

/// Peel top-level abstractions while the environment literal carries more
/// slots than the context shape, so running `\x. x` against `[[e1, u], q]`
/// applies the closure to `q`.
fn run_shapes(
    ctx: &ccc::lambda::Context,
    term: &LambdaTerm,
) -> Vec<(DomExpr, usize)> {
    let mut shapes = vec![(ctx.shape(), 0)];
    let mut shape = ctx.shape();
    let mut t = term;
    let mut peeled = 0;
    while let LambdaTerm::Lam(binder, body) = t {
        match ctx.annotation(binder) {
            Some(dom) => {
                shape = DomExpr::prod(shape, dom.clone());
                peeled += 1;
                shapes.push((shape.clone(), peeled));
                t = body;
            }
            None => break,
        }
    }
    shapes
}

fn cmd_run(opts: &Opts) -> Result<ExitCode, CliError> {
    let arg = opts
        .positional
        .first()
        .ok_or_else(|| CliError::Usage("run needs a term file".into()))?;
    let literal = opts
        .env
        .as_ref()
        .ok_or_else(|| CliError::Usage("run needs --env <literal>".into()))?;
    let src = read_source(arg)?;
    let (ctx, term) = parse_term_file(&src).map_err(|e| CliError::Format(e.to_string()))?;
    let s = load_semantics(opts)?;
    let m = compile(&term, &ctx, &s).map_err(|e| CliError::Check(e.to_string()))?;
    let raw = parse_raw_value(literal).map_err(|e| CliError::Format(e.to_string()))?;

    let mut chosen: Option<(Value, usize)> = None;
    let mut last_err = None;
    for (shape, peeled) in run_shapes(&ctx, &term) {
        match elaborate(&raw, &shape, &s) {
            Ok(v) => chosen = Some((v, peeled)),
            Err(e) => last_err = Some(e),
        }
    }
    let (value, peeled) = chosen.ok_or_else(|| {
        CliError::Check(match last_err {
            Some(e) => e.to_string(),
            None => format!("`{literal}` does not fit the context shape"),
        })
    })?;

    // Split the literal into the base instance and the peeled arguments.
    let mut args = Vec::with_capacity(peeled);
    let mut base = value;
    for _ in 0..peeled {
        match base {
            Value::Pair(rest, arg) => {
                args.push(*arg);
                base = *rest;
            }
            _ => unreachable!("elaboration matched the extended shape"),
        }
    }
    args.reverse();

    let (mut out, trace) = if opts.trace {
        let (v, t) = apply_mor_traced(&m, &base, &s).map_err(|e| CliError::Check(e.to_string()))?;
        (v, Some(t))
    } else {
        (
            apply_mor(&m, &base, &s).map_err(|e| CliError::Check(e.to_string()))?,
            None,
        )
    };
    for arg in args {
        out = apply_fn_value(&out, &arg, &s).map_err(|e| CliError::Check(e.to_string()))?;
    }

    match opts.format {
        Format::Human => {
            out!("{out}");
            if let Some(steps) = &trace {
                for (i, step) in steps.iter().enumerate() {
                    out!(
                        "  {}. {} : {} |-> {}",
                        i + 1,
                        step.morphism,
                        step.input,
                        step.output
                    );
                }
            }
        }
        Format::Records => {
            if let Some(steps) = &trace {
                for step in steps {
                    out!(
                        "{}",
                        record(&[
                            ("morphism", step.morphism.to_string()),
                            ("input", step.input.to_string()),
                            ("output", step.output.to_string()),
                        ])
                    );
                }
            }
            out!("{}", record(&[("value", out.to_string())]));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_normalize(opts: &Opts) -> Result<ExitCode, CliError> {
    let arg = opts
        .positional
        .first()
        .ok_or_else(|| CliError::Usage("normalize needs a morphism".into()))?;
    let src = read_source(arg)?;
    let m = parse_mor(&src).map_err(|e| CliError::Format(e.to_string()))?;
    let (n, trace) = normalize(&m).map_err(|e| CliError::Check(e.to_string()))?;
    match opts.format {
        Format::Human => {
            out!("{n}");
            let label = if trace.len() == 1 { "step" } else { "steps" };
            out!("trace ({} {label}):", trace.len());
            print_trace(&trace);
        }
        Format::Records => {
            for step in &trace.steps {
                out!(
                    "{}",
                    record(&[
                        ("rule", step.rule.to_string()),
                        ("before", step.before.to_string()),
                        ("after", step.after.to_string()),
                    ])
                );
            }
            out!(
                "{}",
                record(&[
                    ("normal", n.to_string()),
                    ("steps", trace.len().to_string()),
                ])
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_laws(opts: &Opts) -> Result<ExitCode, CliError> {
    let s = load_semantics(opts)?;
    let report = soundness_battery(&s, 200, 0xC0FFEE);
    let mut failed = !report.failures.is_empty();
    match opts.format {
        Format::Human => {
            for rule in &report.rules {
                let status = if rule.failures.is_empty() { "ok" } else { "FAIL" };
                out!(
                    "{status:4} {:<12} {:>4} instances  {:>6} inputs",
                    rule.rule, rule.instances, rule.inputs_checked
                );
                for f in &rule.failures {
                    out!("     {f}");
                }
            }
            out!(
                "generated: {} morphisms, {} validated steps",
                report.generated_morphisms, report.generated_steps
            );
            for f in &report.failures {
                out!("FAIL {f}");
            }
        }
        Format::Records => {
            for rule in &report.rules {
                out!(
                    "{}",
                    record(&[
                        ("rule", rule.rule.to_string()),
                        ("instances", rule.instances.to_string()),
                        ("inputs", rule.inputs_checked.to_string()),
                        ("ok", rule.failures.is_empty().to_string()),
                    ])
                );
            }
        }
    }
    for rule in &report.rules {
        failed |= !rule.failures.is_empty();
    }
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_check_diagram(opts: &Opts) -> Result<ExitCode, CliError> {
    let arg = opts
        .positional
        .first()
        .ok_or_else(|| CliError::Usage("check-diagram needs a diagram file".into()))?;
    let text = std::fs::read_to_string(arg).map_err(|e| CliError::Format(format!("{arg}: {e}")))?;
    let d = parse_diagram(&text).map_err(|e| CliError::Format(e.to_string()))?;
    let s = load_semantics(opts)?;
    let report = ccc::diagram::check_diagram(&d, Some(&s))
        .map_err(|e| CliError::Check(e.to_string()))?;
    let mut failed = false;
    for c in &report.claims {
        let counterexample = match &c.verdict {
            Verdict::NotEqual(v) => {
                failed = true;
                Some(v.to_string())
            }
            _ => None,
        };
        let trace_len = c.trace_left.len() + c.trace_right.len();
        match opts.format {
            Format::Human => {
                out!("claim [{}]: {} ({} rewrite steps)", c.claim, c.verdict, trace_len);
                if opts.trace {
                    print_trace(&c.trace_left);
                    print_trace(&c.trace_right);
                }
                if let Some(w) = &counterexample {
                    out!("  counterexample: {w}");
                }
            }
            Format::Records => {
                let mut fields = vec![
                    ("claim", c.claim.to_string()),
                    ("verdict", c.verdict.to_string()),
                    ("trace_length", trace_len.to_string()),
                ];
                if let Some(w) = &counterexample {
                    fields.push(("counterexample", w.clone()));
                }
                out!("{}", record(&fields));
            }
        }
    }
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_suite(opts: &Opts) -> Result<ExitCode, CliError> {
    let s = load_semantics(opts)?;
    let report = run_suite(&s);
    for case in &report.cases {
        match opts.format {
            Format::Human => {
                let status = if case.pass { "PASS" } else { "FAIL" };
                out!(
                    "{status} {:<10} {} (expected {}, got {})",
                    case.id, case.location, case.expected, case.actual
                );
                if opts.trace || !case.pass {
                    out!("     {}", case.detail);
                }
                if let Some(w) = &case.counterexample {
                    out!("     counterexample: {w}");
                }
            }
            Format::Records => {
                let mut fields = vec![
                    ("id", case.id.clone()),
                    ("paper_location", case.location.clone()),
                    ("verdict", case.actual.to_string()),
                    ("expected", case.expected.to_string()),
                    ("pass", case.pass.to_string()),
                ];
                if let Some(w) = &case.counterexample {
                    fields.push(("counterexample", w.clone()));
                }
                out!("{}", record(&fields));
            }
        }
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn dispatch(args: Vec<String>) -> Result<ExitCode, CliError> {
    let command = args
        .first()
        .ok_or_else(|| CliError::Usage("missing command".into()))?
        .clone();
    let opts = parse_opts(&args[1..])?;
    match command.as_str() {
        "typecheck" => cmd_typecheck(&opts),
        "compile" => cmd_compile(&opts),
        "run" => cmd_run(&opts),
        "normalize" => cmd_normalize(&opts),
        "check-laws" => cmd_check_laws(&opts),
        "check-diagram" => cmd_check_diagram(&opts),
        "suite" => cmd_suite(&opts),
        "--help" | "help" | "-h" => {
            let _ = write!(std::io::stdout(), "{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

fn main() -> ExitCode {
    match dispatch(std::env::args().skip(1).collect()) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    eprintln!("error: {msg}");
                    eprint!("{USAGE}");
                }
                CliError::Format(msg) | CliError::Check(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
