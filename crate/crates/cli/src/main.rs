//! Command-line front end: verification campaigns over the library's
//! recovery, one-shot, typicality, de Finetti, and squashed-entanglement
//! machinery, emitted as versioned CSV or JSON.
//!
//! Exit codes: 0 success, 1 a checked property was violated, 2 usage or
//! configuration error.

#![forbid(unsafe_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use markov_recovery::entropies::{cmi, relative_entropy, trace_distance, von_neumann_entropy};
use markov_recovery::linalg::{czero, creal, CMat};
use markov_recovery::oneshot::{aep_trace, hypothesis_divergence};
use markov_recovery::recovery::{optimize_recovery, RecoveryBudget};
use markov_recovery::squashed::{build_extension_ladder, symmetrized_extension};
use markov_recovery::states::{
    qcq_markov_reconstruction, random_density, random_qcq_spec, random_state, read_state,
    split_seed,
};
use markov_recovery::typicality::{
    distinct_spectrum, eigenvalue_product_count, typical_complement_log2, typical_mass,
};
use markov_recovery::{definetti, Error};

const SLACK_TOL: f64 = 1e-6;
const GAP_TOL: f64 = 1e-6;
const WITNESS_TOL: f64 = 1e-8;
const LADDER_TOL: f64 = 1e-6;
/// Product of the three subsystem dimensions accepted by `verify-fr`; the
/// rotation search scales with the square of this, so the cap keeps a
/// default-budget campaign interactive.
const VERIFY_DIM_CAP: usize = 64;

#[derive(Parser)]
#[command(name = "markov-recovery", version, about = "Verification campaigns for approximate quantum Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the entropy report of a stored state (≥3 subsystems; the ends
    /// are the parties, everything between conditions)
    Cmi {
        /// State file in the JSON schema
        state: PathBuf,
    },
    /// Fidelity-of-recovery campaign: slack of F(recovered) against
    /// 2^{-I(A:C|B)/2} over random tripartite states
    VerifyFr {
        #[arg(long)]
        trials: usize,
        /// Subsystem dimensions dA,dB,dC
        #[arg(long)]
        dims: String,
        #[arg(long)]
        seed: u64,
        /// Rotation-search budget restarts,iterations
        #[arg(long, default_value = "20,500")]
        budget: String,
        /// Sample exact Markov chains instead of generic states
        #[arg(long)]
        markov: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Hypothesis-testing divergence duality gaps on random instances
    Oneshot {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Largest operator dimension sampled (2..=8)
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Normalized hypothesis-testing divergence along tensor powers of a
    /// classical pair, with the relative-entropy limit
    Aep {
        /// First distribution, comma-separated
        #[arg(long)]
        p: String,
        /// Second distribution, comma-separated
        #[arg(long)]
        q: String,
        #[arg(long)]
        epsilon: f64,
        /// Powers to evaluate, comma-separated
        #[arg(long, default_value = "100,1000,10000")]
        ns: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Typical-window mass and type-class counts of a spectrum power
    Typical {
        /// Either diag:p1,p2,... or a path to a state file
        #[arg(long)]
        rho: String,
        /// Powers to evaluate, comma-separated
        #[arg(long)]
        n: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Operator-inequality witnesses for the symmetric-subspace bound
    Definetti {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Iterated-recovery ladders on random 2x2x2 extensions and the
    /// k-extendible distance bound
    Squashed {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Rotation-search budget restarts,iterations
        #[arg(long, default_value = "6,200")]
        budget: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

enum Cell {
    U(u64),
    F(f64),
    B(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::U(v) => v.to_string(),
            Cell::F(x) => fmt_sig(*x),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::U(v) => v.to_string(),
            Cell::F(x) if x.is_finite() => fmt_sig(*x),
            Cell::F(x) => format!("\"{}\"", fmt_sig(*x)),
            Cell::B(b) => b.to_string(),
        }
    }
}

/// 12 significant digits, exponent form, locale-independent.
fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::from("# markov-recovery v1\n");
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let mut s = String::from("{\"version\":\"markov-recovery v1\",\"rows\":[");
                for (i, row) in self.rows.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    s.push('{');
                    for (j, (col, cell)) in self.columns.iter().zip(row).enumerate() {
                        if j > 0 {
                            s.push(',');
                        }
                        let _ = write!(s, "\"{col}\":{}", cell.json());
                    }
                    s.push('}');
                }
                s.push_str("]}\n");
                s
            }
        }
    }
}

fn emit(table: &Table, format: Format, out: Option<&Path>, violated: bool) -> Result<i32, String> {
    let text = table.render(format);
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(if violated { 1 } else { 0 })
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what}: cannot parse '{tok}' as a number"))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| format!("{what}: cannot parse '{tok}' as an integer"))
        })
        .collect()
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let v = parse_usize_list(s, "--dims")?;
    if v.len() != 3 || v.iter().any(|&d| d == 0) {
        return Err("--dims takes three positive integers dA,dB,dC".into());
    }
    Ok((v[0], v[1], v[2]))
}

fn parse_budget(s: &str) -> Result<RecoveryBudget, String> {
    let v = parse_usize_list(s, "--budget")?;
    if v.len() != 2 || v[0] == 0 || v[1] == 0 {
        return Err("--budget takes restarts,iterations, both at least 1".into());
    }
    Ok(RecoveryBudget {
        restarts: v[0],
        iterations: v[1],
    })
}

fn diagonal_operator(p: &[f64]) -> CMat {
    CMat::from_fn(p.len(), p.len(), |r, c| {
        if r == c {
            creal(p[r])
        } else {
            czero()
        }
    })
}

fn probability_vector(s: &str, what: &str) -> Result<Vec<f64>, String> {
    let p = parse_f64_list(s, what)?;
    if p.is_empty() || p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(format!("{what}: entries must be non-negative numbers"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("{what}: entries sum to {total}, expected 1"));
    }
    Ok(p)
}

fn lib(e: Error) -> String {
    e.to_string()
}

fn cmd_cmi(path: &Path) -> Result<i32, String> {
    let state = read_state(path).map_err(lib)?;
    let labels = state.dims().labels();
    if labels.len() < 3 {
        return Err(format!(
            "state has {} subsystems, need at least 3",
            labels.len()
        ));
    }
    if labels.len() == 3 {
        let report = cmi(&state).map_err(lib)?;
        println!("{report}");
        return Ok(0);
    }
    // ends are the parties, the interior conditions
    let middle: Vec<&str> = labels[1..labels.len() - 1].to_vec();
    let mut ab = vec![labels[0]];
    ab.extend_from_slice(&middle);
    let mut bc = middle.clone();
    bc.push(labels[labels.len() - 1]);
    let h = |keep: &[&str]| -> Result<f64, String> {
        von_neumann_entropy(state.marginal(keep).map_err(lib)?.matrix()).map_err(lib)
    };
    let h_ab = h(&ab)?;
    let h_bc = h(&bc)?;
    let h_b = h(&middle)?;
    let h_abc = von_neumann_entropy(state.matrix()).map_err(lib)?;
    println!("A = {}", labels[0]);
    println!("B = {}", middle.join(" "));
    println!("C = {}", labels[labels.len() - 1]);
    println!("H(AB)   = {h_ab:.12}");
    println!("H(BC)   = {h_bc:.12}");
    println!("H(B)    = {h_b:.12}");
    println!("H(ABC)  = {h_abc:.12}");
    println!("I(A:C|B) = {:.12}", h_ab + h_bc - h_b - h_abc);
    Ok(0)
}

fn cmd_verify_fr(
    trials: usize,
    dims: (usize, usize, usize),
    seed: u64,
    budget: RecoveryBudget,
    markov: bool,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let (da, db, dc) = dims;
    if da * db * dc > VERIFY_DIM_CAP {
        return Err(format!(
            "dims product {} exceeds the campaign cap {VERIFY_DIM_CAP}",
            da * db * dc
        ));
    }
    let rows: Vec<Result<Vec<Cell>, Error>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let state = if markov {
                let spec = random_qcq_spec(db, da, dc, split_seed(seed, t))?;
                qcq_markov_reconstruction(&spec)?
            } else {
                random_state(&[da, db, dc], &["A", "B", "C"], split_seed(seed, t))?
            };
            let optimum = optimize_recovery(&state, budget, split_seed(seed, (1 << 32) + t))?;
            let cert = &optimum.certificate;
            Ok(vec![
                Cell::F(cert.cmi_bits),
                Cell::F(cert.target_fidelity),
                Cell::F(optimum.petz_fidelity),
                Cell::F(cert.achieved_fidelity),
                Cell::F(cert.slack),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>().map_err(lib)?;
    let violated = rows.iter().any(|r| match r[4] {
        Cell::F(slack) => slack < -SLACK_TOL,
        _ => false,
    });
    let table = Table {
        columns: &["cmi", "target", "petz_fidelity", "optimized_fidelity", "slack"],
        rows,
    };
    emit(&table, format, out, violated)
}

fn cmd_oneshot(
    trials: usize,
    seed: u64,
    max_dim: usize,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    if !(2..=8).contains(&max_dim) {
        return Err("--max-dim must lie in 2..=8".into());
    }
    let rows: Vec<Result<Vec<Cell>, Error>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let dim = 2 + (t as usize % (max_dim - 1));
            let epsilon = 0.05 + 0.9 * (t as f64 + 0.5) / trials.max(1) as f64;
            let rho = random_density(dim, dim, split_seed(seed, 2 * t))?;
            let sigma = random_density(dim, dim, split_seed(seed, 2 * t + 1))?;
            let result = hypothesis_divergence(rho.matrix(), sigma.matrix(), epsilon)?;
            Ok(vec![
                Cell::U(t),
                Cell::U(dim as u64),
                Cell::F(epsilon),
                Cell::F(result.value_bits),
                Cell::F(result.duality_gap),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>().map_err(lib)?;
    let violated = rows.iter().any(|r| match r[4] {
        Cell::F(gap) => gap > GAP_TOL,
        _ => false,
    });
    let table = Table {
        columns: &["trial", "dim", "epsilon", "value_bits", "duality_gap"],
        rows,
    };
    emit(&table, format, out, violated)
}

fn cmd_aep(
    p: &str,
    q: &str,
    epsilon: f64,
    ns: &str,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    let p = probability_vector(p, "--p")?;
    let q = parse_f64_list(q, "--q")?;
    if q.len() != p.len() {
        return Err("--p and --q must have the same length".into());
    }
    if q.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
        return Err("--q: entries must be positive".into());
    }
    let ns = parse_usize_list(ns, "--ns")?;
    if ns.is_empty() {
        return Err("--ns: at least one power required".into());
    }
    let rho = diagonal_operator(&p);
    let sigma = diagonal_operator(&q);
    let limit = relative_entropy(&rho, &sigma).map_err(lib)?;
    let trace = aep_trace(&rho, &sigma, epsilon, &ns).map_err(lib)?;
    let rows = trace
        .iter()
        .map(|point| {
            vec![
                Cell::U(point.n as u64),
                Cell::F(point.value_bits),
                Cell::F(limit),
            ]
        })
        .collect();
    let table = Table {
        columns: &["n", "value_bits", "limit_bits"],
        rows,
    };
    emit(&table, format, out, false)
}

fn cmd_typical(
    rho: &str,
    n: &str,
    delta: f64,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err("--delta must be positive".into());
    }
    let operator = if let Some(spec) = rho.strip_prefix("diag:") {
        diagonal_operator(&probability_vector(spec, "--rho")?)
    } else {
        read_state(Path::new(rho)).map_err(lib)?.matrix().clone()
    };
    let ns = parse_usize_list(n, "--n")?;
    if ns.is_empty() || ns.contains(&0) {
        return Err("--n: positive powers required".into());
    }
    let rank: usize = distinct_spectrum(&operator)
        .map_err(lib)?
        .iter()
        .map(|c| c.multiplicity)
        .sum();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let mass = typical_mass(&operator, n, delta).map_err(lib)?;
        let complement = typical_complement_log2(&operator, n, delta).map_err(lib)?;
        let count = eigenvalue_product_count(&operator, n).map_err(lib)?;
        let bound_log2 = rank as f64 * ((n + 1) as f64).log2();
        rows.push(vec![
            Cell::U(n as u64),
            Cell::F(delta),
            Cell::F(mass),
            Cell::F(complement),
            Cell::U(count as u64),
            Cell::F(bound_log2),
        ]);
    }
    let table = Table {
        columns: &["n", "delta", "mass", "complement_log2", "product_count", "count_bound_log2"],
        rows,
    };
    emit(&table, format, out, false)
}

fn cmd_definetti(
    d: usize,
    n: usize,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    if d == 0 {
        return Err("--d must be positive".into());
    }
    let sigma = random_density(d, d, split_seed(seed, u64::MAX)).map_err(lib)?;
    let report = definetti::definetti_witness(sigma.matrix(), n, seed, trials).map_err(lib)?;
    let rows = report
        .rows
        .iter()
        .map(|row| {
            vec![
                Cell::U(row.trial),
                Cell::F(row.min_eigenvalue),
                Cell::F(report.bound_constant),
                Cell::U(report.n as u64),
                Cell::U(report.constant_dim as u64),
            ]
        })
        .collect();
    let table = Table {
        columns: &["trial", "min_eigenvalue", "bound_constant", "n", "d"],
        rows,
    };
    emit(&table, format, out, !report.all_hold(WITNESS_TOL))
}

fn cmd_squashed(
    k: usize,
    trials: usize,
    seed: u64,
    budget: RecoveryBudget,
    out: Option<&Path>,
    format: Format,
) -> Result<i32, String> {
    if k == 0 {
        return Err("--k must be at least 1".into());
    }
    let rows: Vec<Result<Vec<Cell>, Error>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial_seed = split_seed(seed, t);
            let rho = random_state(&[2, 2, 2], &["A", "C", "E"], trial_seed)?;
            // condition on E: optimize over (A, E, C), then iterate E → E⊗C
            let rotated = rho.permuted(&[0, 2, 1])?;
            let optimum = optimize_recovery(&rotated, budget, split_seed(seed, (1 << 32) + t))?;
            let ladder = build_extension_ladder(&rho, k, &optimum.channel)?;
            let (omega, _) = symmetrized_extension(&ladder)?;
            let rho_ac = rho.marginal(&["A", "C"])?;
            let final_distance = trace_distance(rho_ac.matrix(), omega.matrix())?;
            let bound = (k as f64 - 1.0) / 2.0 * ladder.delta();
            Ok(vec![
                Cell::U(trial_seed),
                Cell::U(k as u64),
                Cell::F(ladder.cmi_bits()),
                Cell::F(ladder.delta()),
                Cell::F(ladder.max_step_distance()),
                Cell::F(final_distance),
                Cell::F(bound),
                Cell::B(final_distance <= bound + LADDER_TOL),
            ])
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>().map_err(lib)?;
    let violated = rows.iter().any(|r| matches!(r[7], Cell::B(false)));
    let table = Table {
        columns: &[
            "seed", "k", "cmi_bits", "delta", "ladder_max_step", "final_distance", "bound",
            "holds",
        ],
        rows,
    };
    emit(&table, format, out, violated)
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Cmi { state } => cmd_cmi(&state),
        Command::VerifyFr {
            trials,
            dims,
            seed,
            budget,
            markov,
            out,
            format,
        } => cmd_verify_fr(
            trials,
            parse_dims(&dims)?,
            seed,
            parse_budget(&budget)?,
            markov,
            out.as_deref(),
            format,
        ),
        Command::Oneshot {
            trials,
            seed,
            max_dim,
            out,
            format,
        } => cmd_oneshot(trials, seed, max_dim, out.as_deref(), format),
        Command::Aep {
            p,
            q,
            epsilon,
            ns,
            out,
            format,
        } => cmd_aep(&p, &q, epsilon, &ns, out.as_deref(), format),
        Command::Typical {
            rho,
            n,
            delta,
            out,
            format,
        } => cmd_typical(&rho, &n, delta, out.as_deref(), format),
        Command::Definetti {
            d,
            n,
            trials,
            seed,
            out,
            format,
        } => cmd_definetti(d, n, trials, seed, out.as_deref(), format),
        Command::Squashed {
            k,
            trials,
            seed,
            budget,
            out,
            format,
        } => cmd_squashed(k, trials, seed, parse_budget(&budget)?, out.as_deref(), format),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}
