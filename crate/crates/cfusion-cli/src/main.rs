//! Command-line surface: computes frame bounds, verifies and solves
//! Q-dualities, builds canonical duals, checks perturbation criteria and
//! glues local frames. Every command prints a human table to stdout and
//! optionally a versioned JSON report, byte-deterministic for fixed inputs
//! and seed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use cfusion::error::Error;
use cfusion::localglue::{equivalence_probe, glue, local_dual_pairs};
use cfusion::numerics::Tolerances;
use cfusion::perturb::{perturbation_check, pseudoinverse_matrix, PerturbationParams};
use cfusion::qdual::{
    canonical_qdual, dimension_check, q_norm_floor, solve_q, uniqueness_hypothesis,
    verify_duality,
};
use cfusion::scenario::{build_disk_example, write_scenario, Scenario, SCENARIO_VERSION};
use cfusion::spectral_norm;
use cfusion::CMat;

const EXIT_OK: u8 = 0;
const EXIT_PARSE: u8 = 1;
const EXIT_NOT_A_FRAME: u8 = 2;
const EXIT_SHAPE: u8 = 3;
const EXIT_VERDICT_FALSE: u8 = 4;

const DEFAULT_SEED: u64 = 7;
const DEFAULT_TRIALS: usize = 1000;

/// JSON report schema version, maintained alongside the scenario schema.
const REPORT_VERSION: u64 = SCENARIO_VERSION;

#[derive(Parser)]
#[command(
    name = "cfusion",
    about = "Continuous fusion frames: bounds, Q-duality, perturbation, gluing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal frame bounds and classification of the scenario's frame.
    Bounds(CommonArgs),
    /// Verify the scenario's (F, G, Q) triple as a Q-duality.
    VerifyDual(SeededArgs),
    /// Solve the duality identity for Q between F and its dual section.
    SolveQ(CommonArgs),
    /// Construct and verify the canonical Q-dual of the frame.
    CanonicalDual(CanonicalArgs),
    /// Check the perturbation criterion for (F, G, Q).
    Perturb(PerturbArgs),
    /// Glue the local families into a global continuous frame.
    Glue(CommonArgs),
    /// Run the golden disk example end to end.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (.cfuse.json).
    scenario: PathBuf,
    /// Write a machine-readable JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Override the residual tolerance used for verdicts.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SeededArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Seed for the randomized probe condition.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct CanonicalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write the constructed dual back as a scenario file.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Seed for the randomized probe condition.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Perturbation constant multiplying |T_F c|.
    #[arg(long, default_value_t = 0.0)]
    lam: f64,
    /// Perturbation constant multiplying |c|.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Number of random probe fields.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Seed for the probe fields.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SelftestArgs {
    /// Write a machine-readable JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Override the residual tolerance used for verdicts.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Serialize)]
struct InputInfo {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Report<R: Serialize> {
    schema_version: u64,
    command: String,
    input: Option<InputInfo>,
    tolerances: Tolerances,
    seed: Option<u64>,
    results: R,
    pass: bool,
    exit_code: u8,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NotAFrame { .. } => EXIT_NOT_A_FRAME,
        Error::ShapeMismatch(_) | Error::DimensionMismatch { .. } => EXIT_SHAPE,
        Error::NotADual { .. } => EXIT_VERDICT_FALSE,
        _ => EXIT_PARSE,
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn tolerances(overridden: Option<f64>) -> Tolerances {
    match overridden {
        Some(t) => Tolerances::default().with_residual_tol(t),
        None => Tolerances::default(),
    }
}

struct LoadedScenario {
    scenario: Scenario,
    input: InputInfo,
}

fn load(path: &PathBuf, tol: &Tolerances) -> Result<LoadedScenario, Error> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| Error::Parse(format!("scenario is not UTF-8: {e}")))?;
    let scenario = cfusion::scenario::parse_scenario(&text, tol)?;
    Ok(LoadedScenario {
        scenario,
        input: InputInfo {
            path: path.display().to_string(),
            sha256: hex_digest(&bytes),
            bytes: bytes.len(),
        },
    })
}

fn emit_report<R: Serialize>(
    json_path: &Option<PathBuf>,
    report: &Report<R>,
) -> Result<(), Error> {
    if let Some(path) = json_path {
        let text = serde_json::to_string_pretty(report)
            .map_err(|e| Error::Schema(format!("report serialization failed: {e}")))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

fn require_dual_and_q(
    scenario: &Scenario,
) -> Result<(&cfusion::CFusionFrame, &cfusion::QOperator), Error> {
    let dual = scenario
        .dual
        .as_ref()
        .ok_or_else(|| Error::Schema("scenario has no dual frame section".into()))?;
    let q = scenario
        .q
        .as_ref()
        .ok_or_else(|| Error::Schema("scenario has no q section".into()))?;
    Ok((dual, q))
}

// ---------------------------------------------------------------------------
// bounds

#[derive(Serialize)]
struct BoundsResults {
    lower: f64,
    upper: f64,
    class: cfusion::FrameClass,
    tight: bool,
    parseval: bool,
}

fn cmd_bounds(args: &CommonArgs) -> Result<u8, Error> {
    let tol = tolerances(args.tol);
    let loaded = load(&args.scenario, &tol)?;
    let bounds = loaded.scenario.frame.frame_bounds(&tol);
    let results = BoundsResults {
        lower: bounds.lower,
        upper: bounds.upper,
        class: bounds.class,
        tight: bounds.is_tight(),
        parseval: bounds.is_parseval(),
    };
    let exit = if bounds.is_frame() { EXIT_OK } else { EXIT_NOT_A_FRAME };

    println!("scenario  : {}", loaded.input.path);
    println!("sha256    : {}", loaded.input.sha256);
    println!(
        "ambient   : {}   atoms: {}",
        loaded.scenario.frame.ambient_dim(),
        loaded.scenario.frame.space().len()
    );
    println!("A (lower) : {:.15e}", bounds.lower);
    println!("B (upper) : {:.15e}", bounds.upper);
    println!(
        "class     : {:?}{}{}",
        bounds.class,
        if results.tight { " tight" } else { "" },
        if results.parseval { " Parseval" } else { "" },
    );
    println!("tolerance : residual {:.3e}", tol.residual_tol);

    let report = Report {
        schema_version: REPORT_VERSION,
        command: "bounds".into(),
        input: Some(loaded.input),
        tolerances: tol,
        seed: None,
        results,
        pass: bounds.is_frame(),
        exit_code: exit,
    };
    emit_report(&args.json, &report)?;
    Ok(exit)
}

// ---------------------------------------------------------------------------
// verify-dual

#[derive(Serialize)]
struct VerifyResults {
    residual: f64,
    is_dual: bool,
    q_norm: f64,
    norm_floor: f64,
    norm_floor_holds: bool,
    conditions: cfusion::qdual::ConditionReport,
    dimension_f: cfusion::qdual::DimensionCheck,
    dimension_g: cfusion::qdual::DimensionCheck,
}

fn cmd_verify_dual(args: &SeededArgs) -> Result<u8, Error> {
    let tol = tolerances(args.common.tol);
    let loaded = load(&args.common.scenario, &tol)?;
    let (dual, q) = require_dual_and_q(&loaded.scenario)?;
    let frame = &loaded.scenario.frame;

    let report = verify_duality(frame, dual, q, &tol, args.seed)?;
    let floor_holds = report.q_norm >= report.norm_floor - cfusion::qdual::NORM_FLOOR_TOL;
    let dim_f = dimension_check(frame, &tol);
    let dim_g = dimension_check(dual, &tol);
    let exit = if report.is_dual { EXIT_OK } else { EXIT_VERDICT_FALSE };

    println!("scenario  : {}", loaded.input.path);
    println!("residual  : {:.15e}", report.residual);
    println!("is_dual   : {}", report.is_dual);
    println!(
        "(1) T_G Q T_F* = I        : {}",
        pass_str(report.conditions.direct)
    );
    println!(
        "(2) T_F Q* T_G* = I       : {}",
        pass_str(report.conditions.adjoint)
    );
    println!(
        "(3) inj/surj/idempotent   : {}",
        pass_str(report.conditions.factor)
    );
    println!(
        "(4) adjoint mirror        : {}",
        pass_str(report.conditions.factor_adjoint)
    );
    println!(
        "(5) probe ({} pairs, seed {}) : {}",
        report.conditions.probe_pairs,
        report.conditions.seed,
        pass_str(report.conditions.probe)
    );
    println!(
        "|Q| = {:.6e} >= floor {:.6e} : {}",
        report.q_norm,
        report.norm_floor,
        pass_str(floor_holds)
    );
    println!(
        "dimension bounds (F)      : {}",
        pass_str(dim_f.holds_first && dim_f.holds_second)
    );
    println!(
        "dimension bounds (G)      : {}",
        pass_str(dim_g.holds_first && dim_g.holds_second)
    );

    let results = VerifyResults {
        residual: report.residual,
        is_dual: report.is_dual,
        q_norm: report.q_norm,
        norm_floor: report.norm_floor,
        norm_floor_holds: floor_holds,
        conditions: report.conditions,
        dimension_f: dim_f,
        dimension_g: dim_g,
    };
    let json = Report {
        schema_version: REPORT_VERSION,
        command: "verify-dual".into(),
        input: Some(loaded.input),
        tolerances: tol,
        seed: Some(args.seed),
        results,
        pass: report.is_dual,
        exit_code: exit,
    };
    emit_report(&args.common.json, &json)?;
    Ok(exit)
}

// ---------------------------------------------------------------------------
// solve-q

#[derive(Serialize)]
struct SolveQResults {
    consistent: bool,
    nullspace_dim: usize,
    unique: bool,
    residual: f64,
    uniqueness_hypothesis: bool,
    q_norm: Option<f64>,
    verify_residual: Option<f64>,
}

fn cmd_solve_q(args: &CommonArgs) -> Result<u8, Error> {
    let tol = tolerances(args.tol);
    let loaded = load(&args.scenario, &tol)?;
    let frame = &loaded.scenario.frame;
    let dual = loaded
        .scenario
        .dual
        .as_ref()
        .ok_or_else(|| Error::Schema("scenario has no dual frame section".into()))?;

    let solution = solve_q(frame, dual, &tol)?;
    let hypothesis = uniqueness_hypothesis(frame, dual, &tol)?;
    let (q_norm, verify_residual) = match &solution.particular {
        Some(q) => {
            let report = verify_duality(frame, dual, q, &tol, DEFAULT_SEED)?;
            (Some(q.norm()), Some(report.residual))
        }
        None => (None, None),
    };
    let consistent = solution.particular.is_some();
    let exit = if consistent { EXIT_OK } else { EXIT_VERDICT_FALSE };

    println!("scenario      : {}", loaded.input.path);
    println!("consistent    : {consistent}");
    println!("nullspace_dim : {}", solution.nullspace_dim);
    println!("unique        : {}", solution.unique);
    println!("residual      : {:.15e}", solution.residual);
    println!("uniq. hypoth. : {hypothesis}");
    if let Some(norm) = q_norm {
        println!("|Q_min|       : {norm:.15e}");
    }

    let results = SolveQResults {
        consistent,
        nullspace_dim: solution.nullspace_dim,
        unique: solution.unique,
        residual: solution.residual,
        uniqueness_hypothesis: hypothesis,
        q_norm,
        verify_residual,
    };
    let report = Report {
        schema_version: REPORT_VERSION,
        command: "solve-q".into(),
        input: Some(loaded.input),
        tolerances: tol,
        seed: None,
        results,
        pass: consistent,
        exit_code: exit,
    };
    emit_report(&args.json, &report)?;
    Ok(exit)
}

// ---------------------------------------------------------------------------
// canonical-dual

#[derive(Serialize)]
struct CanonicalResults {
    residual: f64,
    q_norm: f64,
    dual_lower: f64,
    dual_upper: f64,
    dual_is_frame: bool,
    emitted: Option<String>,
}

fn cmd_canonical(args: &CanonicalArgs) -> Result<u8, Error> {
    let tol = tolerances(args.common.tol);
    let loaded = load(&args.common.scenario, &tol)?;
    let frame = &loaded.scenario.frame;

    let (dual, q) = canonical_qdual(frame, &tol)?;
    let report = verify_duality(frame, &dual, &q, &tol, args.seed)?;
    let dual_bounds = dual.frame_bounds(&tol);

    let emitted = match &args.emit {
        Some(path) => {
            let scenario = Scenario::new(frame.clone())
                .with_dual(dual.clone())
                .with_q(q.clone());
            write_scenario(path, &scenario)?;
            Some(path.display().to_string())
        }
        None => None,
    };

    println!("scenario    : {}", loaded.input.path);
    println!("residual    : {:.15e}", report.residual);
    println!("|Q|         : {:.15e}", report.q_norm);
    println!("dual A      : {:.15e}", dual_bounds.lower);
    println!("dual B      : {:.15e}", dual_bounds.upper);
    println!("dual frame  : {}", dual_bounds.is_frame());
    if let Some(path) = &emitted {
        println!("emitted     : {path}");
    }

    let exit = if report.is_dual && dual_bounds.is_frame() {
        EXIT_OK
    } else {
        EXIT_VERDICT_FALSE
    };
    let results = CanonicalResults {
        residual: report.residual,
        q_norm: report.q_norm,
        dual_lower: dual_bounds.lower,
        dual_upper: dual_bounds.upper,
        dual_is_frame: dual_bounds.is_frame(),
        emitted,
    };
    let json = Report {
        schema_version: REPORT_VERSION,
        command: "canonical-dual".into(),
        input: Some(loaded.input),
        tolerances: tol,
        seed: Some(args.seed),
        results,
        pass: exit == EXIT_OK,
        exit_code: exit,
    };
    emit_report(&args.common.json, &json)?;
    Ok(exit)
}

// ---------------------------------------------------------------------------
// perturb

#[derive(Serialize)]
struct PerturbResults {
    report: cfusion::perturb::PerturbationReport,
    dual_is_frame: bool,
    lam: f64,
    eps: f64,
}

fn cmd_perturb(args: &PerturbArgs) -> Result<u8, Error> {
    let tol = tolerances(args.common.tol);
    let loaded = load(&args.common.scenario, &tol)?;
    let (dual, q) = require_dual_and_q(&loaded.scenario)?;
    let frame = &loaded.scenario.frame;

    let params = PerturbationParams::new(args.lam, args.eps)
        .map_err(|e| Error::Schema(e.to_string()))?;
    let report = perturbation_check(frame, dual, q, &params, args.trials, args.seed, &tol)?;
    let dual_is_frame = dual.frame_bounds(&tol).is_frame();
    let exit = if report.concluded { EXIT_OK } else { EXIT_VERDICT_FALSE };

    println!("scenario         : {}", loaded.input.path);
    println!("lam, eps         : {:.6e}, {:.6e}", args.lam, args.eps);
    println!("margin           : {:.15e}", report.hypothesis_margin);
    println!(
        "probes           : {} ({} violations, seed {})",
        report.probes, report.probe_violations, report.seed
    );
    println!("defect |I-TGQTF+|: {:.15e}", report.defect_norm);
    println!("guaranteed lower : {:.15e}", report.guaranteed_lower);
    println!("actual lower     : {:.15e}", report.actual_lower);
    println!("concluded        : {}", report.concluded);
    if let Some(reason) = &report.reason {
        println!("reason           : {reason:?}");
    }

    let results = PerturbResults {
        report,
        dual_is_frame,
        lam: args.lam,
        eps: args.eps,
    };
    let pass = exit == EXIT_OK;
    let json = Report {
        schema_version: REPORT_VERSION,
        command: "perturb".into(),
        input: Some(loaded.input),
        tolerances: tol,
        seed: Some(args.seed),
        results,
        pass,
        exit_code: exit,
    };
    emit_report(&args.common.json, &json)?;
    Ok(exit)
}

// ---------------------------------------------------------------------------
// glue

#[derive(Serialize)]
struct GlueResults {
    local_lower_envelope: f64,
    local_upper_envelope: f64,
    cfusion_lower: f64,
    cfusion_upper: f64,
    glued_lower: f64,
    glued_upper: f64,
    sandwich_holds: bool,
    probe: cfusion::localglue::EquivalenceProbe,
    local_pairs: Option<cfusion::localglue::LocalDualPairReport>,
}

fn cmd_glue(args: &CommonArgs) -> Result<u8, Error> {
    let tol = tolerances(args.tol);
    let loaded = load(&args.scenario, &tol)?;
    let locals = loaded
        .scenario
        .locals
        .as_ref()
        .ok_or_else(|| Error::Schema("scenario has no local_families section".into()))?;
    let frame = &loaded.scenario.frame;
    let weights = frame.weights();

    let glued = glue(&locals.f, weights)?;
    let glued_bounds = glued.bounds(&tol);
    let cf_bounds = frame.frame_bounds(&tol);
    let (a_env, b_env) = locals.f.bound_envelope();
    let sandwich_holds = a_env * cf_bounds.lower - 1e-8 <= glued_bounds.lower
        && glued_bounds.upper <= b_env * cf_bounds.upper + 1e-8;
    let probe = equivalence_probe(&locals.f, weights, &tol)?;

    let local_pairs = match (&locals.g, &loaded.scenario.dual) {
        (Some(g_family), Some(dual)) => Some(local_dual_pairs(
            &locals.f,
            g_family,
            weights,
            dual.weights(),
            &tol,
        )?),
        _ => None,
    };

    println!("scenario        : {}", loaded.input.path);
    println!("local envelope  : [{a_env:.6e}, {b_env:.6e}]");
    println!(
        "c-fusion bounds : [{:.6e}, {:.6e}]",
        cf_bounds.lower, cf_bounds.upper
    );
    println!(
        "glued bounds    : [{:.6e}, {:.6e}]",
        glued_bounds.lower, glued_bounds.upper
    );
    println!("sandwich        : {}", pass_str(sandwich_holds));
    println!("both frames     : {}", pass_str(probe.agree));
    if let Some(pairs) = &local_pairs {
        println!("local dual pairs: {}", pairs.all_pairs_dual);
    }

    let exit = if sandwich_holds && probe.agree { EXIT_OK } else { EXIT_VERDICT_FALSE };
    let results = GlueResults {
        local_lower_envelope: a_env,
        local_upper_envelope: b_env,
        cfusion_lower: cf_bounds.lower,
        cfusion_upper: cf_bounds.upper,
        glued_lower: glued_bounds.lower,
        glued_upper: glued_bounds.upper,
        sandwich_holds,
        probe,
        local_pairs,
    };
    let pass = exit == EXIT_OK;
    let json = Report {
        schema_version: REPORT_VERSION,
        command: "glue".into(),
        input: Some(loaded.input),
        tolerances: tol,
        seed: None,
        results,
        pass,
        exit_code: exit,
    };
    emit_report(&args.json, &json)?;
    Ok(exit)
}

// ---------------------------------------------------------------------------
// selftest

#[derive(Serialize)]
struct Step {
    name: String,
    pass: bool,
    value: f64,
}

#[derive(Serialize)]
struct SelftestResults {
    steps: Vec<Step>,
}

fn cmd_selftest(args: &SelftestArgs) -> Result<u8, Error> {
    let tol = tolerances(args.tol);
    let mass2 = std::f64::consts::PI - 1.5;
    let (frame, dual, q) = build_disk_example(1.5, mass2)?;
    let mut steps = Vec::new();
    let mut push = |name: &str, pass: bool, value: f64| {
        println!("{name:<34}: {} ({value:.6e})", pass_str(pass));
        steps.push(Step {
            name: name.into(),
            pass,
            value,
        });
    };

    let bf = frame.frame_bounds(&tol);
    push("F Parseval", bf.is_parseval(), (bf.lower - 1.0).abs());
    let bg = dual.frame_bounds(&tol);
    push("G Parseval", bg.is_parseval(), (bg.lower - 1.0).abs());

    let report = verify_duality(&frame, &dual, &q, &tol, DEFAULT_SEED)?;
    push("swap Q duality", report.residual <= 1e-12, report.residual);
    push(
        "five conditions",
        report.conditions.all_hold(),
        report.conditions.probe_max_error,
    );
    let floor = q_norm_floor(&frame, &dual, &q, &tol)?;
    push("norm floor", floor.holds, floor.q_norm - floor.floor);

    let dim = dimension_check(&frame, &tol);
    push(
        "dimension bounds",
        dim.holds_first && dim.holds_second,
        dim.weighted_dim_integral,
    );

    let (canon_g, canon_q) = canonical_qdual(&frame, &tol)?;
    let canon_report = verify_duality(&frame, &canon_g, &canon_q, &tol, DEFAULT_SEED)?;
    push(
        "canonical dual duality",
        canon_report.residual <= 1e-9,
        canon_report.residual,
    );
    push(
        "canonical Q is identity",
        spectral_norm(&(canon_q.matrix() - CMat::identity(2, 2))) <= 1e-12,
        spectral_norm(&(canon_q.matrix() - CMat::identity(2, 2))),
    );

    let pseudo = pseudoinverse_matrix(&frame, &tol)?;
    let pseudo_residual =
        spectral_norm(&(frame.synthesis_matrix() * &pseudo - CMat::identity(2, 2)));
    push("pseudoinverse T T+ = I", pseudo_residual <= 1e-9, pseudo_residual);

    let solution = solve_q(&frame, &dual, &tol)?;
    push(
        "solve-q consistent and unique",
        solution.particular.is_some() && solution.unique,
        solution.residual,
    );

    let zero = PerturbationParams::new(0.0, 0.0).map_err(|e| Error::Schema(e.to_string()))?;
    let blocks: Vec<CMat> = frame
        .fiber_dims()
        .iter()
        .map(|&k| CMat::identity(k, k))
        .collect();
    let identity_q = cfusion::qdual::QOperator::from_blocks(&blocks)?;
    let perturb = perturbation_check(&frame, &frame, &identity_q, &zero, 200, DEFAULT_SEED, &tol)?;
    push(
        "zero perturbation concludes",
        perturb.concluded && perturb.actual_lower >= perturb.guaranteed_lower - 1e-8,
        perturb.defect_norm,
    );

    let all = steps.iter().all(|s| s.pass);
    println!("selftest                          : {}", pass_str(all));
    let exit = if all { EXIT_OK } else { EXIT_VERDICT_FALSE };
    let json = Report {
        schema_version: REPORT_VERSION,
        command: "selftest".into(),
        input: None,
        tolerances: tol,
        seed: Some(DEFAULT_SEED),
        results: SelftestResults { steps },
        pass: all,
        exit_code: exit,
    };
    emit_report(&args.json, &json)?;
    Ok(exit)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match &cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::VerifyDual(args) => cmd_verify_dual(args),
        Command::SolveQ(args) => cmd_solve_q(args),
        Command::CanonicalDual(args) => cmd_canonical(args),
        Command::Perturb(args) => cmd_perturb(args),
        Command::Glue(args) => cmd_glue(args),
        Command::Selftest(args) => cmd_selftest(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
