use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pds_core::abelian::{enumerate_bijective_epimorphisms, parse_matrix, quotient_group, smith_normal_form, FiniteAbelianGroup};
use pds_core::caseproof::{
    case_ids, paper_case, replay_certificate, rigidity_search_with_inner, run_paper_case, transcript, Certificate,
    RigidityOutcome,
};
use pds_core::lattice::{closed_neighborhood_shape, Point, Shape};
use pds_core::tiling::{search_torus, to_obj, to_off, SearchConfig, Torus};

/// Exit code when the mathematical claim of a command did not verify.
const CLAIM_FAILED: u8 = 1;
/// Exit code for unreadable or inconsistent input.
const BAD_INPUT: u8 = 2;
/// Exit code when a node budget or solution cap cut a run short.
const INCOMPLETE: u8 = 3;

#[derive(Parser)]
#[command(name = "pds", version, about = "Perfect dominating sets of Z^3 with 4-cycle components")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for reports and exported files.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Write results here: a file for `search-torus`, a directory of
    /// certificates for `prove`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Off,
    Obj,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Smith normal form of a square integer matrix; the file holds n, then
    /// n² entries in row-major order.
    Snf { matrix: PathBuf },
    /// Epimorphisms onto a finite abelian group that are bijective on the
    /// closed neighborhood of a base shape.
    EnumEpis {
        /// Group, e.g. Z20 or Z2xZ2xZ5.
        group: String,
        #[arg(long, value_enum, default_value_t = Base::Q2)]
        base: Base,
    },
    /// Exact cover enumeration of solutions on a torus.
    SearchTorus {
        #[arg(long, num_args = 3, value_names = ["A", "B", "C"], default_values_t = [20, 20, 20])]
        torus: Vec<i64>,
        /// Stop after this many solutions.
        #[arg(long)]
        cap: Option<usize>,
        /// Search nodes allowed per run.
        #[arg(long)]
        budget: Option<u64>,
        /// Skip the symmetry reduction and enumerate every solution.
        #[arg(long)]
        all: bool,
    },
    /// Prove a catalog case, every case (`all`), or local rigidity
    /// (`rigidity --radius R`), then replay the certificates.
    Prove {
        target: String,
        #[arg(long)]
        radius: Option<i64>,
        /// Comparison radius for rigidity; defaults to R - 2.
        #[arg(long)]
        inner: Option<i64>,
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Base {
    /// The unit square {O, e1, e2, e1+e2}.
    Q2,
    /// A single vertex.
    Point,
}

struct Failure(u8, anyhow::Error);

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure(BAD_INPUT, e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Snf { matrix } => cmd_snf(&cli, matrix),
        Command::EnumEpis { group, base } => cmd_enum_epis(&cli, group, *base),
        Command::SearchTorus { torus, cap, budget, all } => cmd_search_torus(&cli, torus, *cap, *budget, *all),
        Command::Prove { target, radius, inner, budget } => cmd_prove(&cli, target, *radius, *inner, *budget),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn emit(cli: &Cli, value: &Value, text: &str) {
    if cli.format == Format::Json {
        println!("{}", serde_json::to_string_pretty(value).expect("json value"));
    } else {
        print!("{text}");
    }
}

fn cmd_snf(cli: &Cli, path: &Path) -> Result<u8, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))?;
    let snf = smith_normal_form(&m);
    let factors = snf.diagonal();
    let quotient = quotient_group(&m).ok();
    let mut out = format!("U =\n{}\nD =\n{}\nV =\n{}\ninvariant factors: {factors:?}\n", snf.u, snf.d, snf.v);
    match &quotient {
        Some(g) => out.push_str(&format!("quotient: {g} (order {})\n", g.order())),
        None => out.push_str("InfiniteQuotient: the matrix is singular, so the quotient group is infinite\n"),
    }
    let value = json!({
        "schema_version": 1,
        "u": snf.u,
        "d": snf.d,
        "v": snf.v,
        "invariant_factors": factors,
        "quotient": quotient.as_ref().map(|g| g.to_string()),
    });
    emit(cli, &value, &out);
    Ok(0)
}

fn cmd_enum_epis(cli: &Cli, group: &str, base: Base) -> Result<u8, Failure> {
    let g: FiniteAbelianGroup = group.parse().context("parsing the group")?;
    let shape = match base {
        Base::Q2 => Shape::square(3, 0, 1),
        Base::Point => [Point::origin(3)].into_iter().collect(),
    };
    let vstar = closed_neighborhood_shape(&shape).expect("nonempty base");
    if vstar.len() as u64 != g.order() {
        return Err(bad_input(format!(
            "size mismatch: |{g}| = {} but the closed neighborhood has {} vertices",
            g.order(),
            vstar.len()
        )));
    }
    let epis = enumerate_bijective_epimorphisms(&g, &vstar).context("enumerating")?;
    let mut out = format!("{} epimorphisms onto {g}\n", epis.len());
    let mut list = Vec::new();
    for phi in &epis {
        out.push_str(&format!("{:?}  orders {:?}\n", phi.images, phi.image_orders()));
        list.push(json!({ "images": phi.images, "orders": phi.image_orders() }));
    }
    let value = json!({ "schema_version": 1, "group": g.to_string(), "count": epis.len(), "epimorphisms": list });
    emit(cli, &value, &out);
    Ok(0)
}

fn cmd_search_torus(cli: &Cli, moduli: &[i64], cap: Option<usize>, budget: Option<u64>, all: bool) -> Result<u8, Failure> {
    if let Some(m) = moduli.iter().find(|&&m| m < 3) {
        return Err(bad_input(format!("torus moduli must be at least 3, found {m}")));
    }
    let torus = Torus::new(moduli.to_vec()).context("building the torus")?;
    let config = SearchConfig { cap, symmetry_reduction: !all, max_nodes: budget };
    let res = search_torus(&torus, &config).context("searching")?;
    let representative = res.classes.first().map(|c| &res.solutions[c[0]]);
    let status = if res.exhaustive() { "exhaustive" } else if res.capped { "capped" } else { "budget exhausted" };
    let out = format!(
        "torus {torus}: {} solutions, {} equivalence classes, {} nodes ({status})\n",
        res.solutions.len(),
        res.classes.len(),
        res.nodes
    );
    let value = json!({
        "schema_version": 1,
        "torus": moduli,
        "solutions": res.solutions.len(),
        "classes": res.classes.iter().map(|c| c.len()).collect::<Vec<_>>(),
        "nodes": res.nodes,
        "status": status,
        "representative": representative.map(|s| serde_json::from_str::<Value>(&s.to_json()).expect("json")),
    });
    emit(cli, &value, &out);
    if let Some(path) = &cli.out {
        let body = match (cli.format, representative) {
            (Format::Text, _) => out.clone(),
            (Format::Json, _) => serde_json::to_string_pretty(&value).expect("json value"),
            (Format::Off, Some(s)) => to_off(s),
            (Format::Obj, Some(s)) => to_obj(s),
            (_, None) => return Err(Failure(CLAIM_FAILED, anyhow::anyhow!("no solution to export"))),
        };
        fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if res.budget_exhausted { INCOMPLETE } else { 0 })
}

fn write_certificate(cli: &Cli, cert: &Certificate) -> Result<(), Failure> {
    let Some(dir) = &cli.out else { return Ok(()) };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (ext, body) = match cli.format {
        Format::Text => ("txt", transcript(cert)),
        _ => ("json", cert.to_json()),
    };
    let path = dir.join(format!("{}.{ext}", cert.case_id));
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_prove(cli: &Cli, target: &str, radius: Option<i64>, inner: Option<i64>, budget: u64) -> Result<u8, Failure> {
    if target == "rigidity" {
        return prove_rigidity(cli, radius, inner, budget);
    }
    if radius.is_some() || inner.is_some() {
        return Err(bad_input("--radius and --inner apply only to `prove rigidity`"));
    }
    let ids: Vec<&str> = if target == "all" { case_ids().to_vec() } else { vec![target] };
    let mut passed = 0;
    let mut rows = Vec::new();
    let mut out = String::new();
    for id in &ids {
        let spec = paper_case(id).map_err(|e| Failure(BAD_INPUT, e.into()))?;
        let cert = run_paper_case(id).map_err(|e| Failure(BAD_INPUT, e.into()))?;
        write_certificate(cli, &cert)?;
        let verdict = match replay_certificate(&cert) {
            Err(e) => Err(format!("replay rejected: {e}")),
            Ok(_) if !cert.is_refutation() => Err(format!("{} completion(s), no contradiction", cert.completions().len())),
            Ok(_) => spec.check(&cert),
        };
        let witnesses: Vec<String> = cert.contradictions().iter().map(|(k, s)| format!("{k:?} at {s:?}")).collect();
        match &verdict {
            Ok(()) => {
                passed += 1;
                out.push_str(&format!("PASS {id}: {} nodes, {}\n", cert.node_count(), witnesses.join(", ")));
            }
            Err(e) => out.push_str(&format!("FAIL {id}: {e}\n")),
        }
        rows.push(json!({
            "case": id,
            "pass": verdict.is_ok(),
            "nodes": cert.node_count(),
            "deductions": cert.deduction_count(),
            "message": verdict.err(),
        }));
    }
    out.push_str(&format!("{passed}/{} cases verified\n", ids.len()));
    emit(cli, &json!({ "schema_version": 1, "cases": rows }), &out);
    Ok(if passed == ids.len() { 0 } else { CLAIM_FAILED })
}

fn prove_rigidity(cli: &Cli, radius: Option<i64>, inner: Option<i64>, budget: u64) -> Result<u8, Failure> {
    let radius = radius.ok_or_else(|| bad_input("`prove rigidity` needs --radius"))?;
    let inner = inner.unwrap_or(radius - 2);
    if radius < 2 || !(0..=radius).contains(&inner) {
        return Err(bad_input(format!("need radius >= 2 and 0 <= inner <= radius, got {radius} and {inner}")));
    }
    let outcome = rigidity_search_with_inner(radius, inner, budget);
    let cert = outcome.certificate();
    write_certificate(cli, cert)?;
    let replay = replay_certificate(cert);
    let (verdict, extra) = match &outcome {
        RigidityOutcome::Rigid(_) => ("Rigid", 0),
        RigidityOutcome::Completions { noncanonical, .. } => ("Completions", noncanonical.len()),
        RigidityOutcome::BudgetExceeded(_) => ("BudgetExceeded", 0),
    };
    let mut out = format!(
        "rigidity radius {radius}, inner {inner}: {verdict}; {} completions, {extra} non-canonical, {} nodes\n",
        cert.completions().len(),
        cert.node_count()
    );
    match &replay {
        Ok(_) => out.push_str("PASS replay\n"),
        Err(e) => out.push_str(&format!("FAIL replay: {e}\n")),
    }
    let value = json!({
        "schema_version": 1,
        "radius": radius,
        "inner": inner,
        "outcome": verdict,
        "completions": cert.completions().len(),
        "noncanonical": extra,
        "replay": replay.is_ok(),
    });
    emit(cli, &value, &out);
    Ok(match (&replay, &outcome) {
        (Err(_), _) => CLAIM_FAILED,
        (Ok(_), RigidityOutcome::BudgetExceeded(_)) => INCOMPLETE,
        _ => 0,
    })
}

fn bad_input(msg: impl Into<String>) -> Failure {
    Failure(BAD_INPUT, anyhow::anyhow!(msg.into()))
}
