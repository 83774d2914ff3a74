//! Drivers behind the four commands. Usage problems surface as Err (exit 2);
//! tolerance and convergence failures fold into the exit code after the
//! report is written.

use crate::config::{CaseFilter, CommandKind, OpKind, OutFormat, RunConfig};
use crate::report::{self, ParamsOut, Record};
use psifrac::leibniz::{sweep, CorpusFn, RuleTuple, CASES};
use psifrac::operators::{caputo_derivative, frac_integral, hilfer_derivative, rl_derivative};
use psifrac::{Operand, OperatorParams};
use rand::SeedableRng;

pub fn run(cfg: RunConfig) -> Result<i32, String> {
    match cfg.command {
        CommandKind::Eval => eval(&cfg),
        CommandKind::Verify => verify(&cfg),
        CommandKind::Suite => suite(&cfg),
        CommandKind::ListCases => list_cases(&cfg),
    }
}

fn eval(cfg: &RunConfig) -> Result<i32, String> {
    let op = cfg.op.expect("lowering requires an operator for eval");
    let f_text = cfg.f_text.as_deref().unwrap_or("f");
    let f = Operand::smooth(&cfg.psi, cfg.f_expr.clone().expect("lowering requires f"));
    let params = if op == OpKind::Integral {
        if !(cfg.alpha > 0.0) || !cfg.alpha.is_finite() {
            return Err(format!(
                "integral order must be positive and finite, got {}",
                cfg.alpha
            ));
        }
        None
    } else {
        Some(
            OperatorParams::new(cfg.alpha, cfg.beta, cfg.psi.clone(), cfg.a)
                .map_err(|e| e.to_string())?,
        )
    };
    let mut body = String::new();
    let mut nonconverged = Vec::new();
    for x in cfg.grid.points() {
        let r = match op {
            OpKind::Integral => frac_integral(&cfg.psi, cfg.a, x, cfg.alpha, &f, &cfg.quad),
            OpKind::Rl => rl_derivative(params.as_ref().unwrap(), &f, x, &cfg.quad),
            OpKind::Caputo => caputo_derivative(params.as_ref().unwrap(), &f, x, &cfg.quad),
            OpKind::Hilfer => hilfer_derivative(params.as_ref().unwrap(), &f, x, &cfg.quad),
        }
        .map_err(|e| format!("{} of {} at x={x}: {e}", op.label(), f_text))?;
        if !r.converged {
            nonconverged.push(x);
        }
        body.push_str(&format!("{}\n", r.value));
    }
    report::write_text(cfg.out.as_deref(), &body)?;
    for x in &nonconverged {
        eprintln!("non-convergence: {} of {} at x={x}", op.label(), f_text);
    }
    Ok(if nonconverged.is_empty() { 0 } else { 3 })
}

fn verify(cfg: &RunConfig) -> Result<i32, String> {
    let params = OperatorParams::new(cfg.alpha, cfg.beta, cfg.psi.clone(), cfg.a)
        .map_err(|e| e.to_string())?;
    let f = Operand::smooth(&cfg.psi, cfg.f_expr.clone().expect("lowering requires f"));
    let g = Operand::smooth(&cfg.psi, cfg.g_expr.clone().expect("lowering requires g"));
    let case = format!(
        "{} * {}",
        cfg.f_text.as_deref().unwrap(),
        cfg.g_text.as_deref().unwrap()
    );
    let tuples: Vec<RuleTuple> = cfg
        .grid
        .points()
        .into_iter()
        .map(|x| RuleTuple { params: params.clone(), f: f.clone(), g: g.clone(), x })
        .collect();
    let results = sweep(&tuples, cfg.rule.form(), &cfg.quad, &cfg.policy);
    let mut records = Vec::with_capacity(tuples.len());
    for (t, r) in tuples.iter().zip(results) {
        let r = r.map_err(|e| format!("{case} at x={}: {e}", t.x))?;
        records.push(Record {
            case: case.clone(),
            params: ParamsOut {
                rule: cfg.rule.label(),
                alpha: cfg.alpha,
                beta: cfg.beta,
                psi: cfg.psi_label.clone(),
                a: cfg.a,
                x: t.x,
            },
            report: r,
        });
    }
    let body = report::render(&records, cfg.format)?;
    report::write_text(cfg.out.as_deref(), &body)?;
    Ok(finish(&records, cfg.tol))
}

fn suite(cfg: &RunConfig) -> Result<i32, String> {
    let all_pairs = match &cfg.cases {
        CaseFilter::All => CorpusFn::pairs(&cfg.psi),
        CaseFilter::Pairs(list) => {
            for (f, _) in list {
                if !f.entire_in(&cfg.psi) {
                    return Err(format!(
                        "{} is not entire in the scale {} and cannot lead a series",
                        f.name(),
                        cfg.psi_label
                    ));
                }
            }
            list.clone()
        }
    };
    let pairs = subsample(all_pairs, cfg.sample, cfg.seed);
    if pairs.is_empty() {
        return Err("no corpus pairs selected".to_string());
    }
    let x = cfg.grid.points()[0];
    let mut combos = Vec::new();
    for &alpha in &cfg.alphas {
        for &beta in &cfg.betas {
            let p = OperatorParams::new(alpha, beta, cfg.psi.clone(), cfg.a)
                .map_err(|e| format!("alpha={alpha} beta={beta}: {e}"))?;
            combos.push((alpha, beta, p));
        }
    }
    let mut tuples = Vec::with_capacity(pairs.len() * combos.len());
    for &(f, g) in &pairs {
        let f_op = f
            .operand(&cfg.psi, cfg.a)
            .map_err(|e| format!("{}: {e}", f.name()))?;
        let g_op = g
            .operand(&cfg.psi, cfg.a)
            .map_err(|e| format!("{}: {e}", g.name()))?;
        for (_, _, p) in &combos {
            tuples.push(RuleTuple {
                params: p.clone(),
                f: f_op.clone(),
                g: g_op.clone(),
                x,
            });
        }
    }
    let results = sweep(&tuples, cfg.rule.form(), &cfg.quad, &cfg.policy);
    let mut records = Vec::with_capacity(tuples.len());
    for (i, (t, r)) in tuples.iter().zip(results).enumerate() {
        let (f, g) = pairs[i / combos.len()];
        let case = format!("{}*{}", f.name(), g.name());
        let r = r.map_err(|e| {
            format!(
                "{case} alpha={} beta={} x={}: {e}",
                t.params.alpha, t.params.beta, t.x
            )
        })?;
        records.push(Record {
            case,
            params: ParamsOut {
                rule: cfg.rule.label(),
                alpha: t.params.alpha,
                beta: t.params.beta,
                psi: cfg.psi_label.clone(),
                a: cfg.a,
                x: t.x,
            },
            report: r,
        });
    }
    let body = match cfg.format {
        OutFormat::Csv => matrix_csv(&pairs, &combos, &records),
        OutFormat::Json => report::json_lines(&records)?,
    };
    report::write_text(cfg.out.as_deref(), &body)?;
    Ok(finish(&records, cfg.tol))
}

fn matrix_csv(
    pairs: &[(CorpusFn, CorpusFn)],
    combos: &[(f64, f64, OperatorParams)],
    records: &[Record],
) -> String {
    let mut out = String::from("case");
    for (alpha, beta, _) in combos {
        out.push_str(&format!(",a{alpha}_b{beta}"));
    }
    out.push('\n');
    for (i, (f, g)) in pairs.iter().enumerate() {
        out.push_str(&format!("{}*{}", f.name(), g.name()));
        for j in 0..combos.len() {
            out.push_str(&format!(",{}", records[i * combos.len() + j].report.rel_residual));
        }
        out.push('\n');
    }
    out
}

fn subsample(
    pairs: Vec<(CorpusFn, CorpusFn)>,
    sample: Option<usize>,
    seed: u64,
) -> Vec<(CorpusFn, CorpusFn)> {
    let Some(n) = sample else { return pairs };
    if n >= pairs.len() {
        return pairs;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, pairs.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pairs[i]).collect()
}

/// Exit code from the finished records: non-convergence dominates, then the
/// residual threshold. Every failing tuple is named on stderr.
fn finish(records: &[Record], tol: f64) -> i32 {
    let mut worst: f64 = 0.0;
    let mut nonconverged = false;
    for r in records {
        if !r.report.converged || r.report.rel_residual > tol {
            eprintln!(
                "fail: {} rule={} alpha={} beta={} psi={} a={} x={} rel_residual={} converged={}",
                r.case,
                r.params.rule,
                r.params.alpha,
                r.params.beta,
                r.params.psi,
                r.params.a,
                r.params.x,
                r.report.rel_residual,
                r.report.converged
            );
        }
        nonconverged |= !r.report.converged;
        worst = worst.max(r.report.rel_residual);
    }
    if nonconverged {
        3
    } else if worst > tol {
        1
    } else {
        0
    }
}

fn list_cases(cfg: &RunConfig) -> Result<i32, String> {
    let mut body = String::from("id  name                   scale  type\n");
    for c in CASES {
        body.push_str(&format!(
            "{:>2}  {:<21}  {:<5}  {}\n",
            c.id,
            c.name,
            c.scale_label(),
            c.beta_label()
        ));
    }
    body.push_str("\ncorpus: ");
    let names: Vec<&str> = CorpusFn::ALL.iter().map(|c| c.name()).collect();
    body.push_str(&names.join(" "));
    body.push('\n');
    report::write_text(cfg.out.as_deref(), &body)?;
    Ok(0)
}
