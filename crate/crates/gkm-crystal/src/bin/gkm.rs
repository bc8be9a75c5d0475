//! Command-line front end: load a Borcherds-Cartan datum, compute crystal
//! graphs, tensor products, global bases, and dimension tables, or run the
//! verification suite. Output is deterministic: identical inputs (and seed,
//! where sampling is involved) produce byte-identical bytes.
//!
//! Exit codes: `0` success, `1` invalid input or computation error, `2` a
//! verification check failed.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use gkm_crystal::cartan::{BorcherdsCartanDatum, RootVec, BUILTIN_NAMES};
use gkm_crystal::crystal::{
    graph_isomorphic, tensor_crystal_algebraic, tensor_crystal_combinatorial, CrystalGraph,
    TensorModule,
};
use gkm_crystal::freealg::UmAlgebra;
use gkm_crystal::global::{global_basis_binf, global_basis_v, GlobalBasis};
use gkm_crystal::harness::{resolve_datum, run_suite, SuiteConfig};
use gkm_crystal::modrep::{build_crystal, HwModule};
use gkm_crystal::qarith::{rat_frac, rat_rank, Rat};
use gkm_crystal::vrep::VModule;
use gkm_crystal::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "gkm",
    version,
    about = "Crystal and global bases for quantum generalized Kac-Moody algebras"
)]
struct RunConfig {
    /// Built-in datum name (sl2, heis, imag2, gkm2, monster3) or a path to
    /// a JSON/TOML datum file.
    #[arg(long, global = true, default_value = "sl2")]
    datum: String,
    /// Write output to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for parallel checks (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Crystal graph of the irreducible module V(λ).
    Crystal {
        /// Highest-weight pairings λ(h_i), comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        lambda: Vec<i64>,
        /// Maximum root height to materialize.
        #[arg(long)]
        depth: i64,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// Crystal graph of B(∞) for the negative half.
    Binf {
        #[arg(long)]
        depth: i64,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// Tensor-product crystal of V(λ) ⊗ V(μ).
    Tensor {
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        lambda: Vec<i64>,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        mu: Vec<i64>,
        #[arg(long)]
        depth: i64,
        /// comb: combinatorial product of the factor graphs; alg: crystal of
        /// the tensor module; both: compute both and compare.
        #[arg(long, value_enum, default_value_t = TensorMode::Comb)]
        mode: TensorMode,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// Global basis of V(λ), or of the negative half with --binf.
    Global {
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "binf")]
        lambda: Option<Vec<i64>>,
        /// Compute the global basis of the negative half instead.
        #[arg(long)]
        binf: bool,
        #[arg(long)]
        depth: i64,
        /// Largest Laurent degree attempted when solving for an element.
        #[arg(long, default_value_t = 10)]
        degree_budget: i64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Run the verification suite from a config file (default matrix if
    /// none is given).
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// CSV table of weight-space dimensions and crystal sizes of V(λ).
    Dims {
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        lambda: Vec<i64>,
        #[arg(long)]
        depth: i64,
        /// Cross-check each dimension against the Gram rank specialized at
        /// three random rational q values in (0,1).
        #[arg(long)]
        spot_check: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TensorMode {
    Comb,
    Alg,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(config: RunConfig) -> Result<u8> {
    if let Some(t) = config.threads {
        // A later duplicate initialization (e.g. under a test harness) is
        // harmless; the first pool wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let datum = resolve_datum(&config.datum)?;
    let (text, code) = match &config.command {
        Command::Crystal { lambda, depth, format } => {
            let lam = checked_weight(&datum, lambda, "--lambda")?;
            check_depth(*depth)?;
            let graph = VModule::new(datum, lam, *depth)?.crystal()?.graph;
            (render_graph(&graph, *format), 0)
        }
        Command::Binf { depth, format } => {
            check_depth(*depth)?;
            let graph = build_crystal(&UmAlgebra::new(datum, *depth)?)?.graph;
            (render_graph(&graph, *format), 0)
        }
        Command::Tensor { lambda, mu, depth, mode, format } => {
            let lam = checked_weight(&datum, lambda, "--lambda")?;
            let mu = checked_weight(&datum, mu, "--mu")?;
            check_depth(*depth)?;
            tensor_output(&datum, &lam, &mu, *depth, *mode, *format)?
        }
        Command::Global { lambda, binf, depth, degree_budget, format } => {
            check_depth(*depth)?;
            let basis = match (lambda, binf) {
                (Some(l), false) => {
                    let lam = checked_weight(&datum, l, "--lambda")?;
                    let vm = VModule::new(datum, lam, *depth)?;
                    let data = vm.crystal()?;
                    global_basis_v(&vm, &data, *degree_budget)?
                }
                (None, true) => {
                    let um = UmAlgebra::new(datum, *depth)?;
                    let data = build_crystal(&um)?;
                    global_basis_binf(&um, &data, *degree_budget)?
                }
                _ => {
                    return Err(Error::Config(
                        "pass exactly one of --lambda or --binf".into(),
                    ))
                }
            };
            let bad = basis.elements.iter().filter(|e| !e.certificates.all_pass()).count();
            let text = match format {
                ReportFormat::Json => basis.to_json(),
                ReportFormat::Text => render_global(&basis),
            };
            (text, if bad == 0 { 0 } else { 2 })
        }
        Command::Verify { config: path, format } => {
            let suite = match path {
                Some(p) => SuiteConfig::from_path(p)?,
                None => SuiteConfig::default_config(),
            };
            let report = run_suite(&suite)?;
            let text = match format {
                ReportFormat::Json => report.to_json(),
                ReportFormat::Text => report.render_text(),
            };
            (text, if report.passed { 0 } else { 2 })
        }
        Command::Dims { lambda, depth, spot_check } => {
            let lam = checked_weight(&datum, lambda, "--lambda")?;
            check_depth(*depth)?;
            dims_output(datum, lam, *depth, *spot_check, config.seed)?
        }
    };
    match &config.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn check_depth(depth: i64) -> Result<()> {
    if depth < 0 {
        return Err(Error::Config(format!("--depth must be nonnegative, got {depth}")));
    }
    Ok(())
}

fn checked_weight(
    datum: &BorcherdsCartanDatum,
    values: &[i64],
    flag: &str,
) -> Result<Vec<i64>> {
    if values.len() != datum.n() {
        return Err(Error::Config(format!(
            "{flag} has {} entries but the datum has rank {} \
             (built-in data: {})",
            values.len(),
            datum.n(),
            BUILTIN_NAMES.join(", ")
        )));
    }
    Ok(values.to_vec())
}

fn render_graph(graph: &CrystalGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Dot => graph.to_dot(),
        GraphFormat::Json => graph.to_json(),
    }
}

fn tensor_output(
    datum: &BorcherdsCartanDatum,
    lam: &[i64],
    mu: &[i64],
    depth: i64,
    mode: TensorMode,
    format: GraphFormat,
) -> Result<(String, u8)> {
    match mode {
        TensorMode::Alg => {
            let graph = tensor_crystal_algebraic(datum, lam, mu, depth)?;
            Ok((render_graph(&graph, format), 0))
        }
        TensorMode::Comb => {
            let tensor = TensorModule::new(datum, lam, mu, depth)?;
            let (g1, g2) = tensor.factor_data();
            let graph = tensor_crystal_combinatorial(datum, &g1.graph, &g2.graph, depth)?;
            Ok((render_graph(&graph, format), 0))
        }
        TensorMode::Both => {
            let tensor = TensorModule::new(datum, lam, mu, depth)?;
            let (g1, g2) = tensor.factor_data();
            let comb = tensor_crystal_combinatorial(datum, &g1.graph, &g2.graph, depth)?;
            let alg = tensor.crystal()?.graph;
            let outcome = graph_isomorphic(&comb, &alg);
            let mut out = String::new();
            let _ = writeln!(out, "isomorphic: {}", outcome.isomorphic());
            let _ = writeln!(out, "nodes: {}", comb.nodes.len());
            let _ = writeln!(out, "edges: {}", comb.edges.len());
            match (&outcome.witness, &outcome.discrepancy) {
                (Some(map), _) => {
                    let pairs: Vec<String> =
                        map.iter().map(|(a, b)| format!("{a}->{b}")).collect();
                    let _ = writeln!(out, "witness: {}", pairs.join(" "));
                }
                (None, Some(reason)) => {
                    let _ = writeln!(out, "discrepancy: {reason}");
                }
                (None, None) => {}
            }
            Ok((out, if outcome.isomorphic() { 0 } else { 2 }))
        }
    }
}

fn render_global(basis: &GlobalBasis) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "global basis of {} to depth {} (degree budget {})",
        basis.label.describe(),
        basis.depth,
        basis.budget
    );
    for e in &basis.elements {
        let certs = if e.certificates.all_pass() {
            "certificates ok".to_string()
        } else {
            format!(
                "CERTIFICATE FAILURE laurent={} bar={} residue={}",
                e.certificates.laurent_coefficients,
                e.certificates.bar_fixed,
                e.certificates.residue_matches
            )
        };
        let _ = writeln!(
            out,
            "G({}) at {}#{} degree {} [{}]: {}",
            e.node_id, e.alpha, e.index, e.degree, certs, e
        );
    }
    out
}

/// Random rational in (0,1) with a modest denominator.
fn sample_q(rng: &mut ChaCha8Rng) -> Rat {
    let den = rng.gen_range(3..=64);
    let num = rng.gen_range(1..den);
    rat_frac(num, den)
}

fn dims_output(
    datum: BorcherdsCartanDatum,
    lam: Vec<i64>,
    depth: i64,
    spot_check: bool,
    seed: u64,
) -> Result<(String, u8)> {
    let vm = VModule::new(datum.clone(), lam, depth)?;
    let data = vm.crystal()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let headers: Vec<String> = (0..datum.n()).map(|i| format!("alpha_{i}")).collect();
    let _ = write!(out, "{},dim,crystal", headers.join(","));
    let _ = writeln!(out, "{}", if spot_check { ",specialized_rank" } else { "" });
    let mut mismatches = 0usize;
    for alpha in datum.alphas_to_depth(depth) {
        let dim = HwModule::dim(&vm, &alpha)?;
        let count = data.nodes.get(&alpha).map_or(0, Vec::len);
        let cols: Vec<String> = alpha.0.iter().map(i64::to_string).collect();
        let _ = write!(out, "{},{dim},{count}", cols.join(","));
        if spot_check {
            let rank = specialized_rank(&vm, &alpha, &mut rng)?;
            let _ = write!(out, ",{rank}");
            if rank != dim {
                mismatches += 1;
                eprintln!(
                    "specialized Gram rank {rank} at level {alpha} disagrees with the \
                     exact dimension {dim}"
                );
            }
        }
        let _ = writeln!(out);
    }
    Ok((out, if mismatches == 0 { 0 } else { 2 }))
}

/// Rank of the full Gram matrix of a level specialized at three random
/// rational points; the samples must agree with each other. Specialization
/// can only lower the rank, so agreement with the exact dimension (checked
/// by the caller) certifies both.
fn specialized_rank(vm: &VModule, alpha: &RootVec, rng: &mut ChaCha8Rng) -> Result<usize> {
    let gram = &vm.v_basis(alpha)?.gram_full;
    let mut ranks = Vec::new();
    let mut attempts = 0;
    while ranks.len() < 3 {
        attempts += 1;
        if attempts > 40 {
            return Err(Error::Internal(format!(
                "no pole-free specialization points found at level {alpha}"
            )));
        }
        let q = sample_q(rng);
        let rows: Option<Vec<Vec<Rat>>> = (0..gram.rows())
            .map(|r| (0..gram.cols()).map(|c| gram.get(r, c).eval_rat(&q).ok()).collect())
            .collect();
        // A pole at this sample point: draw another.
        let Some(rows) = rows else { continue };
        ranks.push(rat_rank(rows));
    }
    if ranks.iter().any(|&r| r != ranks[0]) {
        return Err(Error::Internal(format!(
            "specialized ranks disagree across sample points at level {alpha}: {ranks:?}"
        )));
    }
    Ok(ranks[0])
}
