use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nodal_abel::blowup::{
    a_order, chart_recursion_oracle, first_unseparated, strict_transform_incidence,
};
use nodal_abel::chain::{pushforward_quasistable, semistabilize, ChainError};
use nodal_abel::curve::{
    is_quasistable, quasistable_twist_search, twist_action, Polarization, Stability,
};
use nodal_abel::extension::{verify_extension, BlowupSchedule, CheckMode, ExtensionError, VerifyParams};
use nodal_abel::io::{parse_chain, parse_collection, parse_curve, parse_schedule};
use nodal_abel::special::enumerate_special_points;
use nodal_abel::{BigRational, ExactScalar};

/// Exact checks for quasistability, chain semistabilization, blowup orders
/// and Abel map extension conditions.
#[derive(Parser, Debug)]
#[command(name = "nodal-abel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quasistability of the multidegree in a curve file.
    CheckStability {
        curve: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Semistabilize a configuration on C(d).
    Semistabilize {
        chain: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Operations on subset collections.
    Collection {
        #[command(subcommand)]
        command: CollectionCommand,
    },
    /// List the special point data for degree d and q nodes.
    Enumerate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: usize,
        /// Print only the number of points.
        #[arg(long)]
        count_only: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Check both extension conditions at every special point.
    Verify(VerifyArgs),
    /// Brute-force oracles.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CollectionCommand {
    /// A-ordering, node assignment and strict transform incidence.
    Order {
        collection: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Canonical twist making the multidegree quasistable.
    TwistSearch {
        curve: PathBuf,
        /// Largest twist coefficient searched.
        #[arg(long)]
        bound: Option<i64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
struct Output {
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    q: usize,
    /// Degrees of L on C_1 and C_2.
    #[arg(long = "L", value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    l: Vec<i64>,
    /// Polarization weights, as num/den.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    pol: Vec<String>,
    /// `paper` for the standard schedule, or a schedule file.
    #[arg(long, default_value = "paper")]
    order: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Separable)]
    mode: ModeArg,
    /// Worker threads; the report does not depend on it.
    #[arg(long, default_value_t = 1)]
    shards: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Brute,
    Separable,
}

/// Negative verdict on well-formed input.
struct Failed;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn verdict(pass: bool) -> std::result::Result<(), Failed> {
    if pass {
        Ok(())
    } else {
        Err(Failed)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = BufWriter::new(io::stdout().lock());
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(command: Command) -> Result<std::result::Result<(), Failed>> {
    match command {
        Command::CheckStability { curve, out } => check_stability(&curve, &out),
        Command::Semistabilize { chain, out } => run_semistabilize(&chain, &out),
        Command::Collection {
            command: CollectionCommand::Order { collection, out },
        } => collection_order(&collection, &out),
        Command::Enumerate {
            d,
            q,
            count_only,
            out,
        } => enumerate(d, q, count_only, &out),
        Command::Verify(args) => verify(&args),
        Command::Oracle {
            command: OracleCommand::TwistSearch { curve, bound, out },
        } => twist_search(&curve, bound, &out),
    }
}

fn seq<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn check_stability(path: &Path, out: &Output) -> Result<std::result::Result<(), Failed>> {
    let input = parse_curve::<BigRational>(&read(path)?)?;
    let pol = input.require_polarization()?;
    let md = input.require_multidegree()?;
    let stability = is_quasistable(&input.graph, pol, md)?;
    let witness = stability.witness().map(|y| {
        let m = y.members();
        let excess = BigRational::from_int(md.on(m)) - pol.on(m);
        (m, excess, input.graph.boundary_size(m), m.contains(input.graph.marked()))
    });
    if out.json {
        print_json(&json!({
            "quasistable": stability.is_quasistable(),
            "witness": witness.as_ref().map(|(m, excess, k, marked)| json!({
                "subcurve": m,
                "excess": excess.to_string(),
                "k": k,
                "contains_marked": marked,
            })),
        }))?;
    } else if let Some((m, excess, k, marked)) = &witness {
        println!("not quasistable");
        println!(
            "witness Y={m}: deg_Y - e_Y = {excess}, k_Y = {k}, marked {}",
            if *marked { "inside" } else { "outside" }
        );
    } else {
        println!("quasistable");
    }
    Ok(verdict(stability.is_quasistable()))
}

fn run_semistabilize(path: &Path, out: &Output) -> Result<std::result::Result<(), Failed>> {
    let input = parse_chain::<BigRational>(&read(path)?)?;
    let c = &input.curve;
    let semi = match semistabilize(c) {
        Ok(s) => Some(s),
        Err(e @ ChainError::NotAdmissible { .. }) => {
            if out.json {
                print_json(&json!({ "admissible": false, "reason": e.to_string() }))?;
            } else {
                println!("not admissible: {e}");
            }
            None
        }
        Err(e) => return Err(e.into()),
    };
    let Some(semi) = semi else {
        return Ok(Err(Failed));
    };
    let push = match &input.polarization {
        Some(pol) => Some(pushforward_quasistable(c, pol)?),
        None => None,
    };
    let pass = push.as_ref().map_or(true, |p| p.holds());

    if out.json {
        let chains: BTreeMap<String, &Vec<i64>> = semi
            .result
            .chain_degs()
            .iter()
            .enumerate()
            .map(|(i, v)| (i.to_string(), v))
            .collect();
        print_json(&json!({
            "admissible": true,
            "iterations": semi.iterations(),
            "steps": semi.steps,
            "twister": semi.twister,
            "base_degs": semi.result.base_degs(),
            "chain_degs": chains,
            "pushforward": push.as_ref().map(|p| json!({
                "hypotheses_hold": p.hypotheses_hold(),
                "violation": p.violation.map(|y| y.members()),
                "semistabilized_quasistable": p.conclusion.as_ref().map(Stability::is_quasistable),
            })),
        }))?;
    } else {
        println!("admissible: yes");
        for (i, step) in semi.steps.iter().enumerate() {
            let parts: Vec<String> = step
                .iter()
                .enumerate()
                .filter_map(|(node, w)| w.map(|w| format!("node {node} {w}")))
                .collect();
            println!("step {}: {}", i + 1, parts.join("; "));
        }
        for (node, m) in semi.twister.multiplicities().iter().enumerate() {
            println!("twister node {node}: [{}]", seq(m));
        }
        println!("base degrees: [{}]", seq(semi.result.base_degs()));
        for (node, c) in semi.result.chain_degs().iter().enumerate() {
            println!("chain node {node}: [{}]", seq(c));
        }
        if let Some(p) = &push {
            match (&p.violation, &p.conclusion) {
                (Some(y), _) => println!("pushforward: hypotheses fail on Y={y}"),
                (None, Some(s)) => println!(
                    "pushforward: hypotheses hold; semistabilized configuration {}",
                    if s.is_quasistable() { "quasistable" } else { "NOT quasistable" }
                ),
                (None, None) => println!("pushforward: not admissible"),
            }
        }
    }
    Ok(verdict(pass))
}

fn collection_order(path: &Path, out: &Output) -> Result<std::result::Result<(), Failed>> {
    let col = parse_collection(&read(path)?)?;
    if let Some((i, j)) = first_unseparated(&col) {
        if out.json {
            print_json(&json!({ "smooth": false, "unseparated": [i, j] }))?;
        } else {
            println!("not smooth: {i} and {j} are never separated");
        }
        return Ok(Err(Failed));
    }
    let eta = a_order(&col)?;
    let chart = chart_recursion_oracle(&col)?;
    let incidence = (1..=col.ground_size())
        .map(|i| strict_transform_incidence(&col, i))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let agrees = chart.nodes == eta;
    if out.json {
        print_json(&json!({
            "smooth": true,
            "order": eta,
            "nodes": incidence.iter().enumerate().map(|(i, (x, y))| json!({
                "node": i + 1,
                "sigma": eta[i],
                "x_side": x,
                "y_side": y,
            })).collect::<Vec<_>>(),
            "chart_recursion": { "order": chart.nodes, "curves": chart.curves },
            "oracle_agrees": agrees,
        }))?;
    } else {
        println!("smooth: yes");
        println!("order: {}", seq(&eta));
        for (i, (x, y)) in incidence.iter().enumerate() {
            println!("N{} -> Sigma_{}  x-side {x}  y-side {y}", i + 1, eta[i]);
        }
        println!(
            "chart recursion: {} ({} curves), {}",
            seq(&chart.nodes),
            chart.curves,
            if agrees { "agrees" } else { "DISAGREES" }
        );
    }
    Ok(verdict(agrees))
}

fn enumerate(d: usize, q: usize, count_only: bool, out: &Output) -> Result<std::result::Result<(), Failed>> {
    if d == 0 || q == 0 {
        bail!("d and q must be at least 1");
    }
    let points = enumerate_special_points(d, q)?;
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    if count_only {
        if out.json {
            writeln!(w, "{}", json!({ "d": d, "q": q, "count": points.len() }))?;
        } else {
            writeln!(w, "{}", points.len())?;
        }
    } else if out.json {
        writeln!(w, "[")?;
        for (i, p) in points.iter().enumerate() {
            let sep = if i + 1 < points.len() { "," } else { "" };
            writeln!(w, "  {}{sep}", serde_json::to_string(p)?)?;
        }
        writeln!(w, "]")?;
    } else {
        for p in &points {
            writeln!(w, "{p}")?;
        }
    }
    w.flush()?;
    Ok(Ok(()))
}

fn verify(args: &VerifyArgs) -> Result<std::result::Result<(), Failed>> {
    let l: [i64; 2] = args
        .l
        .as_slice()
        .try_into()
        .map_err(|_| anyhow!("--L takes exactly two degrees, got {}", args.l.len()))?;
    if args.pol.len() != 2 {
        bail!("--pol takes exactly two weights, got {}", args.pol.len());
    }
    let weights = args
        .pol
        .iter()
        .map(|s| BigRational::parse_exact(s).ok_or_else(|| anyhow!("not an exact rational: {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    let pol = Polarization::new(weights)?;
    let schedule = if args.order == "paper" {
        BlowupSchedule::Standard
    } else {
        parse_schedule(&read(Path::new(&args.order))?)?
    };
    let mut params = VerifyParams::new(args.d, args.q, l, pol);
    params.schedule = schedule;
    params.mode = match args.mode {
        ModeArg::Brute => CheckMode::Brute,
        ModeArg::Separable => CheckMode::Separable,
    };
    params.shards = args.shards;
    let report = match verify_extension(&params) {
        Ok(r) => r,
        Err(e @ ExtensionError::InvalidOrder { .. }) => bail!("invalid order: {e}"),
        Err(e) => return Err(e.into()),
    };
    if args.out.json {
        print_json(&serde_json::to_value(&report)?)?;
    } else {
        let p = &report.params;
        println!(
            "d={} q={} L=({}) pol=({}) order={} mode={}",
            p.d,
            p.q,
            seq(&p.l),
            p.polarization.join(","),
            p.order,
            p.mode
        );
        println!("points: {}", report.points);
        for f in &report.failures {
            println!("FAIL condition {} at {}: {}", f.condition, f.point, f.witness);
        }
        if report.passed() {
            println!("verdict: pass");
        } else {
            println!(
                "verdict: fail ({} failures; sufficient conditions not met)",
                report.failures.len()
            );
        }
    }
    Ok(verdict(report.passed()))
}

fn twist_search(path: &Path, bound: Option<i64>, out: &Output) -> Result<std::result::Result<(), Failed>> {
    let input = parse_curve::<BigRational>(&read(path)?)?;
    let pol = input.require_polarization()?;
    let md = input.require_multidegree()?;
    let z = quasistable_twist_search(&input.graph, pol, md, bound)?;
    let twisted = twist_action(&input.graph, md, &z);
    if out.json {
        print_json(&json!({ "twist": z.coeffs(), "twisted": twisted.degs() }))?;
    } else {
        println!("twist: ({})", seq(z.coeffs()));
        println!("twisted multidegree: ({})", seq(twisted.degs()));
    }
    Ok(Ok(()))
}
