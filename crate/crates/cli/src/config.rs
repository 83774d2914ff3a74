//! Flag and config-file plumbing. Every invocation lowers to one RunConfig,
//! and every expression in it parses before any computation starts.

use clap::{Args, Parser, Subcommand};
use psifrac::expr::{parse, Expr};
use psifrac::leibniz::CorpusFn;
use psifrac::psi::Psi;
use psifrac::{QuadratureSpec, RuleForm, TruncationPolicy};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "psifrac",
    version,
    about = "Fractional integrals and derivatives taken against a monotone scale function"
)]
pub struct Cli {
    /// Defaults file in key=value form; flags win on conflict
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Evaluate one operator on f at the grid points
    Eval(EvalArgs),
    /// Check a product rule on f and g, one report line per grid point
    Verify(VerifyArgs),
    /// Residual matrix for a product rule over the built-in corpus
    Suite(SuiteArgs),
    /// Print the named operator collapses and the corpus functions
    ListCases(ListArgs),
}

#[derive(Args)]
pub struct EvalArgs {
    /// integral | rl | caputo | hilfer
    #[arg(long)]
    pub op: Option<String>,
    /// Expression for f, e.g. "exp(x)"
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// leibniz1 (split form) | leibniz2 (direct form)
    #[arg(long)]
    pub rule: Option<String>,
    /// Expression for f
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Expression for g
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SuiteArgs {
    /// all, or comma-separated f:g corpus pairs like "t:exp_t,one:sin_t"
    #[arg(long)]
    pub cases: Option<String>,
    /// leibniz1 | leibniz2
    #[arg(long)]
    pub rule: Option<String>,
    /// Comma-separated order grid (default 0.3,0.5,0.7)
    #[arg(long)]
    pub alphas: Option<String>,
    /// Comma-separated type grid (default 0,0.25,0.5,0.75,1)
    #[arg(long)]
    pub betas: Option<String>,
    /// Evaluate only this many corpus pairs, drawn with the seed
    #[arg(long)]
    pub sample: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct ListArgs {
    /// Destination (default stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Order: in (0, 1) for derivatives, any positive value for integrals
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Type in [0, 1]: 0 classic, 1 regularized
    #[arg(long)]
    pub beta: Option<f64>,
    /// Scale: x | lnx | pow:<rho> | expr:<text>
    #[arg(long)]
    pub psi: Option<String>,
    /// Base point
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Evaluation point (alternative to --grid)
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Evaluation grid start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Base node count of the quadrature (default 32)
    #[arg(long = "quad-n")]
    pub quad_n: Option<usize>,
    /// Relative quadrature tolerance (default 1e-11)
    #[arg(long = "quad-tol")]
    pub quad_tol: Option<f64>,
    /// Node-doubling refinements to try (default 4)
    #[arg(long = "quad-max-refine")]
    pub quad_max_refine: Option<u32>,
    /// Largest series index kept (default 40)
    #[arg(long = "max-terms")]
    pub max_terms: Option<usize>,
    /// Relative tail tolerance of the truncation policy (default 1e-12)
    #[arg(long = "tail-tol")]
    pub tail_tol: Option<f64>,
    /// Consecutive small terms that end a series (default 3)
    #[arg(long)]
    pub streak: Option<usize>,
    /// Pass threshold on rel_residual (default 1e-6)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Report destination (default stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json | csv
    #[arg(long)]
    pub format: Option<String>,
    /// Seed for randomized subsampling (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Eval,
    Verify,
    Suite,
    ListCases,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Integral,
    Rl,
    Caputo,
    Hilfer,
}

impl OpKind {
    pub fn label(self) -> &'static str {
        match self {
            OpKind::Integral => "integral",
            OpKind::Rl => "rl",
            OpKind::Caputo => "caputo",
            OpKind::Hilfer => "hilfer",
        }
    }

    fn parse(text: &str) -> Result<OpKind, String> {
        match text {
            "integral" => Ok(OpKind::Integral),
            "rl" => Ok(OpKind::Rl),
            "caputo" => Ok(OpKind::Caputo),
            "hilfer" => Ok(OpKind::Hilfer),
            other => Err(format!(
                "operator must be integral, rl, caputo, or hilfer, got {other}"
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Leibniz1,
    Leibniz2,
}

impl RuleKind {
    pub fn form(self) -> RuleForm {
        match self {
            RuleKind::Leibniz1 => RuleForm::ClassicSplit,
            RuleKind::Leibniz2 => RuleForm::Direct,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RuleKind::Leibniz1 => "leibniz1",
            RuleKind::Leibniz2 => "leibniz2",
        }
    }

    fn parse(text: &str) -> Result<RuleKind, String> {
        match text {
            "leibniz1" => Ok(RuleKind::Leibniz1),
            "leibniz2" => Ok(RuleKind::Leibniz2),
            other => Err(format!("rule must be leibniz1 or leibniz2, got {other}")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Json,
    Csv,
}

pub enum CaseFilter {
    All,
    Pairs(Vec<(CorpusFn, CorpusFn)>),
}

#[derive(Clone, Copy)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

pub struct RunConfig {
    pub command: CommandKind,
    pub op: Option<OpKind>,
    pub rule: RuleKind,
    pub alpha: f64,
    pub beta: f64,
    pub psi: Psi,
    pub psi_label: String,
    pub a: f64,
    pub grid: Grid,
    pub f_text: Option<String>,
    pub g_text: Option<String>,
    pub f_expr: Option<Expr>,
    pub g_expr: Option<Expr>,
    pub policy: TruncationPolicy,
    pub quad: QuadratureSpec,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: OutFormat,
    pub seed: u64,
    pub sample: Option<usize>,
    pub cases: CaseFilter,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

fn defaults(command: CommandKind) -> RunConfig {
    RunConfig {
        command,
        op: None,
        rule: RuleKind::Leibniz2,
        alpha: 0.5,
        beta: 0.0,
        psi: Psi::identity(),
        psi_label: "x".to_string(),
        a: 0.0,
        grid: Grid { start: 1.0, stop: 1.0, count: 1 },
        f_text: None,
        g_text: None,
        f_expr: None,
        g_expr: None,
        policy: TruncationPolicy::default(),
        quad: QuadratureSpec::default(),
        tol: 1e-6,
        out: None,
        format: OutFormat::Json,
        seed: 0,
        sample: None,
        cases: CaseFilter::All,
        alphas: vec![0.3, 0.5, 0.7],
        betas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
    }
}

/// Flag value if given, else the config-file value, else None.
fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| format!("config {key}: {e}")),
        None => Ok(None),
    }
}

fn read_kv(path: &Path) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("config {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            format!("config {} line {}: expected key=value", path.display(), i + 1)
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn parse_psi(text: &str) -> Result<Psi, String> {
    if text == "x" {
        return Ok(Psi::identity());
    }
    if text == "lnx" {
        return Ok(Psi::log());
    }
    if let Some(rho) = text.strip_prefix("pow:") {
        let rho: f64 = rho.parse().map_err(|e| format!("pow exponent: {e}"))?;
        return Psi::power(rho).map_err(|e| e.to_string());
    }
    if let Some(src) = text.strip_prefix("expr:") {
        let e = parse(src).map_err(|e| e.to_string())?;
        return Psi::custom(e).map_err(|e| e.to_string());
    }
    Err(format!(
        "scale must be x, lnx, pow:<rho>, or expr:<text>, got {text}"
    ))
}

fn parse_grid(text: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid must be start:stop:count, got {text}"));
    }
    let start: f64 = parts[0].parse().map_err(|e| format!("grid start: {e}"))?;
    let stop: f64 = parts[1].parse().map_err(|e| format!("grid stop: {e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("grid count: {e}"))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err("grid endpoints must be finite".to_string());
    }
    if count == 0 {
        return Err("grid count must be at least 1".to_string());
    }
    if count > 1 && stop <= start {
        return Err(format!("grid needs stop > start, got {start}:{stop}"));
    }
    Ok(Grid { start, stop, count })
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let v: f64 = item
            .trim()
            .parse()
            .map_err(|e| format!("{what} entry {item}: {e}"))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(format!("{what} must name at least one value"));
    }
    Ok(out)
}

fn parse_cases(text: &str) -> Result<CaseFilter, String> {
    if text == "all" {
        return Ok(CaseFilter::All);
    }
    let mut pairs = Vec::new();
    for item in text.split(',') {
        let (f, g) = item
            .split_once(':')
            .ok_or_else(|| format!("case must be f:g, got {item}"))?;
        let f = CorpusFn::from_name(f.trim())
            .ok_or_else(|| format!("unknown corpus function {f}"))?;
        let g = CorpusFn::from_name(g.trim())
            .ok_or_else(|| format!("unknown corpus function {g}"))?;
        pairs.push((f, g));
    }
    if pairs.is_empty() {
        return Err("cases must name at least one f:g pair".to_string());
    }
    Ok(CaseFilter::Pairs(pairs))
}

pub fn lower(cli: Cli) -> Result<RunConfig, String> {
    let file = match &cli.config {
        Some(path) => read_kv(path)?,
        None => HashMap::new(),
    };

    if let Cmd::ListCases(args) = cli.cmd {
        let mut cfg = defaults(CommandKind::ListCases);
        cfg.out = pick(args.out, &file, "out")?;
        return Ok(cfg);
    }

    let (command, op_text, rule_text, cases_text, alphas_text, betas_text, sample, f_text, g_text, common) =
        match cli.cmd {
            Cmd::Eval(a) => (
                CommandKind::Eval,
                a.op,
                None,
                None,
                None,
                None,
                None,
                a.f,
                None,
                a.common,
            ),
            Cmd::Verify(a) => (
                CommandKind::Verify,
                None,
                a.rule,
                None,
                None,
                None,
                None,
                a.f,
                a.g,
                a.common,
            ),
            Cmd::Suite(a) => (
                CommandKind::Suite,
                None,
                a.rule,
                a.cases,
                a.alphas,
                a.betas,
                a.sample,
                None,
                None,
                a.common,
            ),
            Cmd::ListCases(_) => unreachable!("handled above"),
        };

    let mut cfg = defaults(command);

    if let Some(v) = pick(common.alpha, &file, "alpha")? {
        cfg.alpha = v;
    }
    if let Some(v) = pick(common.beta, &file, "beta")? {
        cfg.beta = v;
    }
    let psi_text = pick(common.psi, &file, "psi")?.unwrap_or_else(|| "x".to_string());
    cfg.psi = parse_psi(&psi_text)?;
    cfg.psi_label = psi_text;
    if let Some(v) = pick(common.a, &file, "a")? {
        cfg.a = v;
    }
    if !cfg.a.is_finite() {
        return Err("base point a must be finite".to_string());
    }

    match (common.x, common.grid) {
        (Some(_), Some(_)) => return Err("give either --x or --grid, not both".to_string()),
        (Some(x), None) => cfg.grid = Grid { start: x, stop: x, count: 1 },
        (None, Some(g)) => cfg.grid = parse_grid(&g)?,
        (None, None) => match (file.get("x"), file.get("grid")) {
            (Some(_), Some(_)) => {
                return Err("config gives both x and grid; keep one".to_string())
            }
            (Some(raw), None) => {
                let x: f64 = raw.parse().map_err(|e| format!("config x: {e}"))?;
                cfg.grid = Grid { start: x, stop: x, count: 1 };
            }
            (None, Some(raw)) => cfg.grid = parse_grid(raw)?,
            (None, None) => {}
        },
    }
    if !(cfg.grid.start > cfg.a) {
        return Err(format!(
            "every grid point must lie right of the base point, got start {} with a {}",
            cfg.grid.start, cfg.a
        ));
    }

    if let Some(v) = pick(common.quad_n, &file, "quad-n")? {
        cfg.quad.base_nodes = v;
    }
    if let Some(v) = pick(common.quad_tol, &file, "quad-tol")? {
        cfg.quad.tolerance = v;
    }
    if let Some(v) = pick(common.quad_max_refine, &file, "quad-max-refine")? {
        cfg.quad.max_refinements = v;
    }
    if cfg.quad.base_nodes < 2 {
        return Err("quad-n must be at least 2".to_string());
    }
    if !(cfg.quad.tolerance > 0.0) || !cfg.quad.tolerance.is_finite() {
        return Err("quad-tol must be positive and finite".to_string());
    }
    if let Some(v) = pick(common.max_terms, &file, "max-terms")? {
        cfg.policy.max_terms = v;
    }
    if let Some(v) = pick(common.tail_tol, &file, "tail-tol")? {
        cfg.policy.tail_tol = v;
    }
    if let Some(v) = pick(common.streak, &file, "streak")? {
        cfg.policy.streak = v;
    }
    cfg.policy.validate().map_err(|e| e.to_string())?;

    if let Some(v) = pick(common.tol, &file, "tol")? {
        cfg.tol = v;
    }
    if !(cfg.tol > 0.0) || !cfg.tol.is_finite() {
        return Err("tol must be positive and finite".to_string());
    }
    cfg.out = pick(common.out, &file, "out")?;
    let fmt = pick(common.format, &file, "format")?;
    cfg.format = match fmt.as_deref() {
        Some("json") => OutFormat::Json,
        Some("csv") => OutFormat::Csv,
        Some(other) => return Err(format!("format must be json or csv, got {other}")),
        None => {
            if command == CommandKind::Suite {
                OutFormat::Csv
            } else {
                OutFormat::Json
            }
        }
    };
    if let Some(v) = pick(common.seed, &file, "seed")? {
        cfg.seed = v;
    }

    cfg.f_text = pick(f_text, &file, "f")?;
    cfg.g_text = pick(g_text, &file, "g")?;
    if let Some(t) = &cfg.f_text {
        cfg.f_expr = Some(parse(t).map_err(|e| format!("f: {e}"))?);
    }
    if let Some(t) = &cfg.g_text {
        cfg.g_expr = Some(parse(t).map_err(|e| format!("g: {e}"))?);
    }

    let rule_text = pick(rule_text, &file, "rule")?;
    if let Some(t) = rule_text {
        cfg.rule = RuleKind::parse(&t)?;
    }

    match command {
        CommandKind::Eval => {
            let op = pick(op_text, &file, "op")?
                .ok_or("eval needs --op (integral | rl | caputo | hilfer)")?;
            cfg.op = Some(OpKind::parse(&op)?);
            if cfg.f_expr.is_none() {
                return Err("eval needs --f".to_string());
            }
        }
        CommandKind::Verify => {
            if cfg.f_expr.is_none() || cfg.g_expr.is_none() {
                return Err("verify needs both --f and --g".to_string());
            }
        }
        CommandKind::Suite => {
            if cfg.grid.count != 1 {
                return Err("suite evaluates at a single --x".to_string());
            }
            if let Some(t) = pick(cases_text, &file, "cases")? {
                cfg.cases = parse_cases(&t)?;
            }
            if let Some(t) = pick(alphas_text, &file, "alphas")? {
                cfg.alphas = parse_list(&t, "alphas")?;
            }
            if let Some(t) = pick(betas_text, &file, "betas")? {
                cfg.betas = parse_list(&t, "betas")?;
            }
            cfg.sample = pick(sample, &file, "sample")?;
            if cfg.sample == Some(0) {
                return Err("sample must be at least 1".to_string());
            }
        }
        CommandKind::ListCases => unreachable!("handled above"),
    }

    Ok(cfg)
}
