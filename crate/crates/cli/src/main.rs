use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pix_core::arith::{format_rational, parse_rational, Place, Prime, Rational};
use pix_core::calculus::{check_trace, derive_period_index, is_admissible, Triple};
use pix_core::cert::{
    forge_bundle, pipeline_bundle, read_bundle, search_ceiling_from_env, verify_bundle, write_bundle, CertError,
    CertificateBundle, ForgeInputs,
};
use pix_core::curve::{reduce_mod_p, HyperellipticModel};
use pix_core::forge::ForgeCase;
use pix_core::local::{count_affine_points, qp_points_exist, DEFAULT_PLACE_BOUND};
use pix_core::poly::Poly;

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pix", version, about = "Period and index certificates for curves over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Case1,
    Case2,
    Case3,
}

impl From<CaseArg> for ForgeCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Case1 => ForgeCase::Case1,
            CaseArg::Case2 => ForgeCase::Case2,
            CaseArg::Case3 => ForgeCase::Case3,
        }
    }
}

#[derive(clap::Args)]
struct CurveArgs {
    #[arg(long, allow_negative_numbers = true)]
    b: i64,
    #[arg(long, allow_negative_numbers = true)]
    c: i64,
    /// Case-1 parameter, an integer or `n/d`.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Good places up to this bound get explicit certificates.
    #[arg(long, default_value_t = DEFAULT_PLACE_BOUND)]
    bound: u64,
    /// Output path for the bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Test the global admissibility conditions for (g, P, I).
    Admissible { g: u64, p: u64, i: u64 },
    /// Derive (P(Y), I(Y), g(Y)) for the higher-genus construction.
    Derive {
        g: u64,
        p: u64,
        i: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Build a genus-2 curve and write its certificate bundle.
    Forge {
        case: CaseArg,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Re-check a bundle and rebuild it from its inputs.
    Verify { bundle: PathBuf },
    /// Classify (g, P, I), forge the genus-2 ingredient and derive the invariants.
    Pipeline {
        g: u64,
        p: u64,
        i: u64,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Local solvability of y^2 = f(z) at p; coefficients in ascending order.
    Localtest {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        f: Vec<String>,
        #[arg(long)]
        p: u64,
    },
}

enum Failure {
    Negative(String),
    Usage(String),
}

impl From<CertError> for Failure {
    fn from(e: CertError) -> Self {
        match e {
            CertError::Io { .. } | CertError::Parse(_) | CertError::Env(_) => Failure::Usage(e.to_string()),
            _ => Failure::Negative(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn parse_a(a: &Option<String>) -> Result<Option<Rational>, Failure> {
    a.as_deref()
        .map(|s| parse_rational(s).map_err(|e| Failure::Usage(e.to_string())))
        .transpose()
}

fn emit(bundle: &CertificateBundle, out: Option<PathBuf>, default_name: String) -> Outcome {
    let path = out.unwrap_or_else(|| PathBuf::from(default_name));
    write_bundle(&path, bundle)?;
    if let Some(curve) = &bundle.artifacts.curve {
        println!("model: {}", curve.model);
        if let Some(r) = &curve.certificates.deficiency_report {
            let places: Vec<String> = r.deficient_places.iter().map(Place::to_string).collect();
            println!(
                "places certified: {}; deficient: {}",
                r.certificates.len(),
                places.join(", ")
            );
        }
    }
    if let Some(c) = bundle.conclusions {
        println!("conclusions: genus {}, period {}, index {}", c.genus, c.period, c.index);
    }
    println!("wrote {}", path.display());
    Ok(OK)
}

fn forge_inputs(case: ForgeCase, curve: &CurveArgs) -> Result<ForgeInputs, Failure> {
    let mut inputs = ForgeInputs::new(case, curve.b, curve.c);
    inputs.a = parse_a(&curve.a)?;
    inputs.bound = curve.bound;
    inputs.search_ceiling = search_ceiling_from_env()?.map(|n| n.to_string());
    Ok(inputs)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Admissible { g, p, i } => {
            let t = Triple::new(g, p, i);
            let (ok, failed) = is_admissible(t);
            if ok {
                println!("{t}: admissible");
                Ok(OK)
            } else {
                println!("{t}: not admissible");
                for c in failed {
                    println!("  violated: {c}");
                }
                Ok(NEGATIVE)
            }
        }
        Command::Derive { g, p, i, trace } => {
            let t = Triple::new(g, p, i);
            let tr = derive_period_index(t).map_err(|e| Failure::Negative(e.to_string()))?;
            let report = check_trace(&tr).map_err(|e| Failure::Negative(format!("trace check: {e}")))?;
            println!("case {}: {} steps, re-checked", tr.case, report.steps_checked);
            for h in tr.hypotheses() {
                println!("  assumes: {h}");
            }
            let c = tr.conclusion;
            println!("P(Y) = {}, I(Y) = {}, g(Y) = {}", c.period, c.index, c.genus);
            if let Some(path) = trace {
                let json = serde_json::to_string_pretty(&tr).expect("trace serializes");
                std::fs::write(&path, json + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                println!("wrote {}", path.display());
            }
            Ok(OK)
        }
        Command::Forge { case, curve } => {
            let case: ForgeCase = case.into();
            let inputs = forge_inputs(case, &curve)?;
            let bundle = forge_bundle(&inputs)?;
            let name = format!("forge-{}-b{}-c{}.json", serde_json::to_value(case).unwrap().as_str().unwrap(), curve.b, curve.c);
            emit(&bundle, curve.out, name)
        }
        Command::Verify { bundle } => {
            let b = read_bundle(&bundle)?;
            let report = verify_bundle(&b);
            for line in report.failures() {
                println!("{line}");
            }
            if report.ok() {
                println!("verified: {} checks", report.checks.len());
                Ok(OK)
            } else {
                println!("verification failed");
                Ok(NEGATIVE)
            }
        }
        Command::Pipeline { g, p, i, curve } => {
            let t = Triple::new(g, p, i);
            let a = parse_a(&curve.a)?;
            let bundle = pipeline_bundle(t, curve.b, curve.c, a, curve.bound, search_ceiling_from_env()?)?;
            if let Some(tr) = &bundle.artifacts.derivation_trace {
                println!("case {}", tr.case);
            }
            emit(&bundle, curve.out, format!("pipeline-g{g}-p{p}-i{i}.json"))
        }
        Command::Localtest { f, p } => {
            let coeffs = f
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let prime = Prime::new(p).map_err(|e| Failure::Usage(e.to_string()))?;
            let poly = Poly::new(coeffs);
            let model = HyperellipticModel::new(poly.clone()).map_err(|e| Failure::Usage(e.to_string()))?;
            let scaling = model.minimal_scaling(p);
            let red = reduce_mod_p(&model, prime, scaling).map_err(|e| Failure::Negative(e.to_string()))?;
            let count = count_affine_points(&red.coeffs, p);
            println!(
                "reduction of {p}^{} f mod {p}: {} affine points ({} smooth)",
                2 * scaling,
                count.total,
                count.smooth
            );
            let d = qp_points_exist(&poly, prime).map_err(|e| Failure::Negative(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&d).expect("decision serializes"));
            let lc = poly.leading();
            println!("y^2 = f(z) with leading coefficient {}: Q_{p}-points {}", format_rational(&lc), if d.exists { "exist" } else { "do not exist" });
            Ok(if d.exists { OK } else { NEGATIVE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Negative(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(NEGATIVE)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
