use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qmask::density::{trace_distance, DensityMatrix};
use qmask::maskers::{
    unmask_four, unmask_four_heavy, unmask_four_literal_qutrit, unmask_three, MaskScheme,
    SchemeId,
};
use qmask::random::random_pure_state;
use qmask::state::{fidelity_pure, input_norm, partial_trace, PureState};
use qmask::teleport::{teleport, teleport_forced};
use qmask::verify::{masking_report, no_masking_demo};
use qmask::RegisterShape;

/// Maximum norm deviation accepted for user-supplied amplitudes.
const NORM_DEVIATION_LIMIT: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "qmask", version, about = "Qudit information masking, unmasking and teleportation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Semicolon-separated complex amplitudes, each "re,im"
    #[arg(long, conflicts_with = "random")]
    state: Option<String>,
    /// Draw a Haar-random input state instead of --state
    #[arg(long)]
    random: bool,
    /// Seed for --random (and any sampled measurement)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Mask a state and report every single-site marginal
    Mask {
        #[arg(long)]
        scheme: String,
        #[arg(short)]
        d: usize,
        #[command(flatten)]
        input: InputArgs,
        /// Emit the masked state as JSON on stdout
        #[arg(long)]
        json: bool,
        /// Write the masked state (with provenance) to a file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the original state from a masked-state file
    Unmask {
        #[arg(long)]
        scheme: String,
        #[arg(short)]
        d: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// Seed for the apparatus measurement of the heavy scheme
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Teleport a state through the reference channel
    Teleport {
        #[arg(short)]
        d: usize,
        #[command(flatten)]
        input: InputArgs,
        /// Condition on a Bell outcome "K,L" instead of sampling
        #[arg(long)]
        force_outcome: Option<String>,
    },
    /// Run the masking verification harness for one scheme
    Verify {
        /// Optional target: "demo-no-masking" runs the qubit failure demo
        demo: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(short)]
        d: Option<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Serialize, Deserialize)]
struct Provenance {
    scheme: String,
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct MaskedStateFile {
    shape: Vec<usize>,
    amplitudes: Vec<[f64; 2]>,
    provenance: Provenance,
}

enum CliError {
    Usage(String),
    VerificationFailed,
}

impl From<qmask::QmaskError> for CliError {
    fn from(e: qmask::QmaskError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn parse_amplitudes(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(';')
        .map(|pair| {
            let mut it = pair.split(',');
            let re = it.next().and_then(|v| v.trim().parse::<f64>().ok());
            let im = it.next().and_then(|v| v.trim().parse::<f64>().ok());
            match (re, im, it.next()) {
                (Some(re), Some(im), None) => Ok(Complex64::new(re, im)),
                _ => Err(CliError::Usage(format!("malformed amplitude '{pair}' (expected \"re,im\")"))),
            }
        })
        .collect()
}

fn resolve_input(d: usize, args: &InputArgs) -> Result<PureState, CliError> {
    if let Some(text) = &args.state {
        let amps = parse_amplitudes(text)?;
        if amps.len() != d {
            return Err(CliError::Usage(format!(
                "expected {d} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm = input_norm(&amps);
        if (norm - 1.0).abs() > NORM_DEVIATION_LIMIT {
            return Err(CliError::Usage(format!(
                "input norm {norm:.6} deviates from 1 by more than {NORM_DEVIATION_LIMIT:.0e}"
            )));
        }
        Ok(PureState::new(RegisterShape::new(vec![d])?, amps)?)
    } else if args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        Ok(random_pure_state(d, &mut rng)?)
    } else {
        Err(CliError::Usage("provide --state or --random".to_string()))
    }
}

fn parse_scheme(name: &str, d: usize) -> Result<MaskScheme, CliError> {
    let id = SchemeId::parse(name)
        .ok_or_else(|| CliError::Usage(format!("unknown scheme '{name}'")))?;
    Ok(MaskScheme::new(id, d)?)
}

fn to_pairs(amps: &[Complex64]) -> Vec<[f64; 2]> {
    amps.iter().map(|a| [a.re, a.im]).collect()
}

fn from_pairs(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

fn print_state(label: &str, state: &PureState) {
    println!("{label} (shape {:?}):", state.shape().dims());
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm() > 1e-14 {
            println!("  [{idx:>4}] {:+.12} {:+.12}i", amp.re, amp.im);
        }
    }
}

fn marginal_distances(state: &PureState) -> Result<Vec<(usize, f64)>, CliError> {
    let dims = state.shape().dims().to_vec();
    let mut out = Vec::with_capacity(dims.len());
    for (site, &dim) in dims.iter().enumerate() {
        let rho = partial_trace(state, &[site])?;
        let dist = trace_distance(&rho, &DensityMatrix::maximally_mixed(dim))?;
        out.push((site, dist));
    }
    Ok(out)
}

fn run_mask(
    scheme: &str,
    d: usize,
    input_args: &InputArgs,
    json: bool,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let scheme = parse_scheme(scheme, d)?;
    let input = resolve_input(d, input_args)?;
    let masked = scheme.mask(&input)?;
    let file = MaskedStateFile {
        shape: masked.shape().dims().to_vec(),
        amplitudes: to_pairs(masked.amplitudes()),
        provenance: Provenance {
            scheme: scheme.id.name().to_string(),
            d,
            input: Some(to_pairs(input.amplitudes())),
        },
    };
    if json {
        println!("{}", serde_json::to_string(&file).expect("serialize"));
    } else {
        print_state("masked state", &masked);
        println!("single-site marginals (trace distance to maximally mixed):");
        for (site, dist) in marginal_distances(&masked)? {
            println!("  site {site}: {dist:.3e}");
        }
    }
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&file).expect("serialize");
        fs::write(path, body).map_err(|e| CliError::Usage(format!("cannot write {path:?}: {e}")))?;
    }
    Ok(())
}

fn run_unmask(scheme: &str, d: usize, path: &PathBuf, seed: u64) -> Result<(), CliError> {
    let scheme = parse_scheme(scheme, d)?;
    let body = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {path:?}: {e}")))?;
    let file: MaskedStateFile =
        serde_json::from_str(&body).map_err(|e| CliError::Usage(format!("bad file: {e}")))?;
    let masked = PureState::new(
        RegisterShape::new(file.shape.clone())?,
        from_pairs(&file.amplitudes),
    )?;
    let recovered = match scheme.id {
        SchemeId::Four => unmask_four(&masked)?,
        SchemeId::Three => unmask_three(&masked)?,
        SchemeId::FourLiteralQutrit => unmask_four_literal_qutrit(&masked)?,
        SchemeId::FourHeavy => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (recovered, record) = unmask_four_heavy(&masked, &mut rng)?;
            println!(
                "apparatus outcome {} (probability {:.6})",
                record.outcome, record.probability
            );
            recovered
        }
    };
    print_state("recovered state", &recovered);
    if let Some(original) = &file.provenance.input {
        let original = PureState::new(RegisterShape::new(vec![d])?, from_pairs(original))?;
        let f = fidelity_pure(&recovered, &original)?;
        println!("fidelity with original input: {f:.15}");
    }
    Ok(())
}

fn run_teleport(d: usize, input_args: &InputArgs, force: Option<&String>) -> Result<(), CliError> {
    let input = resolve_input(d, input_args)?;
    let outcome = match force {
        Some(text) => {
            let parts: Vec<_> = text.split(',').collect();
            let parse = |s: &str| s.trim().parse::<usize>().ok();
            match (parts.as_slice(), ) {
                ([k, l], ) => match (parse(k), parse(l)) {
                    (Some(k), Some(l)) if k < d && l < d => teleport_forced(d, &input, k, l)?,
                    _ => return Err(CliError::Usage(format!("bad outcome '{text}'"))),
                },
                _ => return Err(CliError::Usage(format!("bad outcome '{text}'"))),
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(input_args.seed);
            teleport(d, &input, &mut rng)?
        }
    };
    println!(
        "outcome (k={}, l={}), probability {:.12}",
        outcome.label.k, outcome.label.l, outcome.probability
    );
    print_state("received state", &outcome.received);
    let f = fidelity_pure(&outcome.received, &input)?;
    println!("fidelity with input: {f:.15}");
    Ok(())
}

fn run_verify(
    demo: Option<&String>,
    scheme: Option<&String>,
    d: Option<usize>,
    trials: usize,
    seed: u64,
    tol: f64,
    json: bool,
) -> Result<(), CliError> {
    let report = match demo.map(String::as_str) {
        Some("demo-no-masking") => no_masking_demo()?,
        Some(other) => return Err(CliError::Usage(format!("unknown verify target '{other}'"))),
        None => {
            let scheme = scheme.ok_or_else(|| CliError::Usage("--scheme required".to_string()))?;
            let d = d.ok_or_else(|| CliError::Usage("-d required".to_string()))?;
            masking_report(parse_scheme(scheme, d)?, trials, seed, tol)?
        }
    };
    if json {
        println!("{}", serde_json::to_string(&report).expect("serialize"));
    } else {
        println!(
            "scheme {} d={} trials={} seed={} tolerance={:.1e}",
            report.scheme, report.d, report.trials, report.seed, report.tolerance
        );
        for site in &report.per_site {
            println!(
                "  site {}: max trace distance {:.3e}",
                site.site, site.max_trace_distance
            );
        }
        println!("  recovery min fidelity: {:.15}", report.recovery_min_fidelity);
        println!("  pass: {}", report.pass);
        if !report.notes.is_empty() {
            println!("  notes: {}", report.notes);
        }
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

fn main() -> ExitCode {
    init_dimension_cap();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mask {
            scheme,
            d,
            input,
            json,
            out,
        } => run_mask(scheme, *d, input, *json, out.as_ref()),
        Command::Unmask {
            scheme,
            d,
            input,
            seed,
        } => run_unmask(scheme, *d, input, *seed),
        Command::Teleport {
            d,
            input,
            force_outcome,
        } => run_teleport(*d, input, force_outcome.as_ref()),
        Command::Verify {
            demo,
            scheme,
            d,
            trials,
            seed,
            tol,
            json,
        } => run_verify(demo.as_ref(), scheme.as_ref(), *d, *trials, *seed, *tol, *json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerificationFailed) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn init_dimension_cap() {
    if let Ok(value) = std::env::var("QMASK_MAX_DIM") {
        if let Ok(cap) = value.parse::<usize>() {
            qmask::set_max_amplitudes(cap);
        }
    }
}
