use std::collections::BTreeMap;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pincover::acceptance::{self, AcceptanceConfig};
use pincover::characteristic::obstructions;
use pincover::homology::{b1_mod2, homology, induced_maps, Coefficients};
use pincover::pin2::PinKind;
use pincover::pinors::{couple_split, LiftedAction, Orientation, PinorField};
use pincover::structures::{descend, enumerate, lift_involution, moebius_descent, PinStructureDescriptor};
use pincover::surface::{klein_deck, orientation_double_cover, tau4, Involution, SurfaceModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

mod render;

#[derive(Parser)]
#[command(name = "pincover", version, about = "Pin± structures on surfaces and their orientation double covers")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in surfaces.
    Surfaces {
        /// Largest genus listed for the Σ_g and N_{g,k} families.
        #[arg(long, default_value_t = 2)]
        max_genus: u32,
    },
    /// Integral homology and the Z₂ Betti number.
    Homology { surface: String },
    /// π_* and π^* for the orientation double cover.
    Covermaps { surface: String },
    /// Stiefel–Whitney data and pin± existence and counts.
    Obstructions { surface: String },
    /// Pin structures of a surface with a global frame.
    Structures {
        surface: String,
        #[arg(long)]
        kind: PinKind,
    },
    /// Descent of invariant structures from the orientation double cover.
    Descend {
        surface: String,
        #[arg(long)]
        kind: PinKind,
    },
    /// The Möbius strip report: cover diagram, lift squares, boundary table, doubles.
    Moebius,
    /// Invariant pinor fields on the torus cover.
    Pinors {
        #[command(subcommand)]
        action: PinorCommand,
    },
    /// Run the acceptance suite; exits 1 on any failed criterion.
    Verify {
        #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = acceptance::PINOR_GRID)]
        grid: usize,
        #[arg(long, default_value_t = acceptance::TOLERANCE)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum PinorCommand {
    /// Project a seeded random field to τ-invariant pinors and split it into a couple.
    Check {
        /// k2 (Klein deck on T²) or moebius (τ4 on T²).
        surface: String,
        /// Torus structure index ξ_i, i in 0..4.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..4))]
        structure: u8,
        #[arg(long)]
        kind: PinKind,
        /// Sign relating s(τx) to the lifted action: + or -.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
        sign: i8,
        #[arg(long, default_value_t = pincover::pinors::DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = acceptance::TOLERANCE)]
        tolerance: f64,
    },
}

fn parse_sign(s: &str) -> Result<i8, String> {
    match s {
        "+" | "+1" | "1" => Ok(1),
        "-" | "-1" | "−" => Ok(-1),
        _ => Err(format!("expected + or -, got {s:?}")),
    }
}

/// Output envelope of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Report {
    command: String,
    inputs: BTreeMap<String, String>,
    results: Value,
    /// Names of the reference tables the results reproduce.
    anchors: Vec<String>,
}

enum Failure {
    /// Bad input: unknown surface, unsupported combination.
    Usage(String),
    /// The command ran and some check failed.
    Verification(Box<Report>),
}

fn report(command: &str, inputs: &[(&str, String)], results: Value, anchors: &[&str]) -> Report {
    Report {
        command: command.to_string(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        results,
        anchors: anchors.iter().map(|s| s.to_string()).collect(),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize to JSON")
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_surface(name: &str) -> Result<SurfaceModel, Failure> {
    SurfaceModel::parse(name).map_err(usage)
}

fn surfaces(max_genus: u32) -> Report {
    let mut names: Vec<String> = ["s2", "rp2", "t2", "k2", "cyl", "moebius"].map(String::from).to_vec();
    for g in 1..=max_genus {
        names.push(format!("sigma({g})"));
    }
    for g in 0..=max_genus {
        names.push(format!("n({g},1)"));
        names.push(format!("n({g},2)"));
    }
    let rows: Vec<Value> = names
        .iter()
        .filter_map(|n| SurfaceModel::parse(n).ok())
        .map(|x| {
            json!({
                "name": x.family.cli_name(),
                "label": x.name(),
                "word": x.word.to_string(),
                "euler_characteristic": x.euler_characteristic(),
                "orientable": x.orientable,
                "boundary_components": x.boundary_components,
                "geometric": x.is_geometric(),
            })
        })
        .collect();
    report("surfaces", &[("max_genus", max_genus.to_string())], Value::Array(rows), &["surface families"])
}

fn homology_report(name: &str) -> Result<Report, Failure> {
    let x = parse_surface(name)?;
    let z = homology(&x, Coefficients::Z);
    let results = json!({
        "surface": x.name(),
        "h0": z.h0,
        "h1": z.h1,
        "h2": z.h2,
        "b1_2": b1_mod2(&x),
    });
    Ok(report("homology", &[("surface", name.to_string())], results, &["homology of surfaces"]))
}

fn covermaps(name: &str) -> Result<Report, Failure> {
    let x = parse_surface(name)?;
    let cover = orientation_double_cover(&x).map_err(usage)?;
    let maps = induced_maps(&cover).map_err(usage)?;
    let mut results = to_value(&maps);
    results["splitting_holds"] = json!(maps.splitting_holds());
    results["pull_is_transpose"] = json!(maps.pull_is_transpose());
    results["image_index"] = json!(maps.image_index());
    Ok(report("covermaps", &[("surface", name.to_string())], results, &["induced maps of the orientation cover"]))
}

fn obstructions_report(name: &str) -> Result<Report, Failure> {
    let x = parse_surface(name)?;
    let r = obstructions(&x).map_err(usage)?;
    Ok(report("obstructions", &[("surface", name.to_string())], to_value(&r), &["Stiefel-Whitney obstructions"]))
}

fn structures(name: &str, kind: PinKind) -> Result<Report, Failure> {
    let x = parse_surface(name)?;
    let list = enumerate(&x, kind).map_err(usage)?;
    let rows: Vec<Value> = list
        .iter()
        .map(|xi| json!({ "label": xi.label(), "chart": xi.chart, "twist": xi.twist_form().to_string() }))
        .collect();
    let inputs = [("surface", name.to_string()), ("kind", kind.to_string())];
    Ok(report("structures", &inputs, Value::Array(rows), &["pin structures by twist"]))
}

fn descend_report(name: &str, kind: PinKind) -> Result<Report, Failure> {
    let x = parse_surface(name)?;
    let r = descend(&x, kind).map_err(usage)?;
    let mut results = to_value(&r);
    results["count"] = json!(r.predicted_count);
    let inputs = [("surface", name.to_string()), ("kind", kind.to_string())];
    Ok(report("descend", &inputs, results, &["descent of invariant structures"]))
}

fn moebius() -> Result<Report, Failure> {
    let r = moebius_descent();
    let anchors = ["Moebius cover diagram", "Moebius table", "cylinder boundary table", "cylinder classes"];
    let out = report("moebius", &[], to_value(&r), &anchors);
    let consistent = r.relations.iter().all(|c| c.holds()) && r.descent.iter().all(|d| d.consistent != Some(false));
    if consistent {
        Ok(out)
    } else {
        Err(Failure::Verification(Box::new(out)))
    }
}

fn pinor_involution(name: &str) -> Result<Involution, Failure> {
    match parse_surface(name)?.family.cli_name().as_str() {
        "k2" => Ok(klein_deck()),
        "moebius" => Ok(tau4()),
        other => Err(Failure::Usage(format!("pinor checks run on k2 or moebius, not {other}"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn pinors_check(
    name: &str,
    index: u8,
    kind: PinKind,
    sign: i8,
    grid: usize,
    seed: u64,
    tolerance: f64,
) -> Result<Report, Failure> {
    let tau = pinor_involution(name)?;
    let xi = PinStructureDescriptor::torus(kind, index);
    let inputs = [
        ("surface", name.to_string()),
        ("structure", xi.label()),
        ("kind", kind.to_string()),
        ("sign", if sign > 0 { "+".to_string() } else { "-".to_string() }),
        ("grid", grid.to_string()),
        ("seed", seed.to_string()),
        ("tolerance", tolerance.to_string()),
    ];
    let lift = lift_involution(&xi, &tau).map_err(usage)?;
    let anchors = ["invariant pinors and couples"];
    if lift.square != 1 {
        let results = json!({
            "involution": tau.name,
            "lift": lift.lift.to_string(),
            "square": lift.square,
            "invariant_fields": false,
        });
        return Ok(report("pinors check", &inputs, results, &anchors));
    }
    let action = LiftedAction::new(&xi, &tau, grid).map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = PinorField::random(grid, &mut rng);
    let compute = || -> Result<Value, pincover::pinors::PinorError> {
        let projected = action.project(&input, sign)?;
        let input_residual = action.residual(&input, sign)?;
        let residual = action.residual(&projected, sign)?;
        let idempotency = action.project(&projected, sign)?.sub(&projected)?.max_norm();
        let standard = couple_split(&projected, &xi, &tau, sign, Orientation::Standard)?;
        let opposite = couple_split(&projected, &xi, &tau, sign, Orientation::Opposite)?;
        let orientation_gap = standard.recombine().sub(&opposite.recombine())?.max_norm();
        Ok(json!({
            "involution": tau.name,
            "lift": lift.lift.to_string(),
            "square": lift.square,
            "invariant_fields": true,
            "input_residual": input_residual,
            "projected_residual": residual,
            "idempotency_residual": idempotency,
            "certificate_residual": standard.certificate_residual,
            "chirality_residual": standard.chirality_residual,
            "opposite_certificate_residual": opposite.certificate_residual,
            "orientation_gap": orientation_gap,
            "passed": residual < tolerance
                && idempotency < tolerance
                && standard.certificate_residual < tolerance
                && standard.chirality_residual < tolerance
                && opposite.certificate_residual < tolerance
                && orientation_gap < tolerance,
        }))
    };
    let results = compute().map_err(usage)?;
    let passed = results["passed"].as_bool().unwrap_or(false);
    let out = report("pinors check", &inputs, results, &anchors);
    if passed {
        Ok(out)
    } else {
        Err(Failure::Verification(Box::new(out)))
    }
}

fn verify(config: AcceptanceConfig) -> Result<Report, Failure> {
    let results = acceptance::run(&config);
    let passed = acceptance::all_passed(&results);
    let anchors: Vec<&str> = results.iter().map(|c| c.anchor.as_str()).collect();
    let inputs = [
        ("seed", config.seed.to_string()),
        ("grid", config.grid.to_string()),
        ("tolerance", config.tolerance.to_string()),
    ];
    let out = report("verify", &inputs, to_value(&results), &anchors);
    if passed {
        Ok(out)
    } else {
        Err(Failure::Verification(Box::new(out)))
    }
}

fn dispatch(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Surfaces { max_genus } => Ok(surfaces(max_genus)),
        Command::Homology { surface } => homology_report(&surface),
        Command::Covermaps { surface } => covermaps(&surface),
        Command::Obstructions { surface } => obstructions_report(&surface),
        Command::Structures { surface, kind } => structures(&surface, kind),
        Command::Descend { surface, kind } => descend_report(&surface, kind),
        Command::Moebius => moebius(),
        Command::Pinors { action: PinorCommand::Check { surface, structure, kind, sign, grid, seed, tolerance } } => {
            pinors_check(&surface, structure, kind, sign, grid, seed, tolerance)
        }
        Command::Verify { seed, grid, tolerance } => verify(AcceptanceConfig { seed, tolerance, grid }),
    }
}

fn emit(report: &Report, format: Format) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)
        }
        Format::Csv => render::csv(report, &mut out),
        Format::Table => render::table(report, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, code) = match dispatch(cli.command) {
        Ok(r) => (r, ExitCode::SUCCESS),
        Err(Failure::Verification(r)) => (*r, ExitCode::from(1)),
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    match emit(&report, cli.format) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        _ => {}
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        let r = homology_report("k2").ok().unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn signs() {
        assert_eq!(parse_sign("+"), Ok(1));
        assert_eq!(parse_sign("-"), Ok(-1));
        assert!(parse_sign("0").is_err());
    }
}
