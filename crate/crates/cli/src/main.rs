mod args;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use gapcert::certify::{recursion_bound, DeltaModel, RecursionOptions, Schedule};
use gapcert::delta::{
    delta_exact, delta_k_table, random_projector, restricted_delta_curve, verify_gap_to_delta,
    verify_projector_inequality, verify_quasi_factorization, FF_TOL, FORM_AGREEMENT_TOL,
};
use gapcert::dl::{
    gamma_contraction, verify_converse_dl, verify_dl, verify_sandwich, verify_split, DlContext,
    INEQ_TOL, SPLIT_PRODUCT_TOL, TIGHTNESS_REL,
};
use gapcert::lattice::Region;
use gapcert::model::{builtin_model, LocalHamiltonian, PROJECTOR_TOL};
use gapcert::pvbs::{pvbs_bound, pvbs_certify, pvbs_delta};
use gapcert::space::budget_from_env;
use gapcert::spectral::{check_frustration_free, diagonalize, AssembledOperator};
use gapcert::threshold::{classical_thresholds, log_threshold, threshold_check, LatticeKind};

use args::*;

/// Exit codes.
const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(gapcert::Error),
}

impl From<gapcert::Error> for CliError {
    fn from(e: gapcert::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "{s}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use gapcert::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Lib(E::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Lib(
                E::NotFrustrationFree(_) | E::Eigensolver(_) | E::NoConvergence { .. } | E::AmbiguousKernel { .. },
            ) => EXIT_VERIFICATION,
            CliError::Lib(_) => EXIT_CONFIG,
        }
    }
}

type Res<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        // reader went away (`| head`)
        Err(CliError::Lib(gapcert::Error::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("gapcert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn config<T>(msg: impl Into<String>) -> Res<T> {
    Err(CliError::Config(msg.into()))
}

fn load_model(m: &ModelArgs) -> Res<(LocalHamiltonian, usize)> {
    let budget = m.budget.unwrap_or_else(budget_from_env);
    let path = Path::new(&m.model);
    let h = if path.is_file() {
        LocalHamiltonian::load(path)?
    } else if m.model.ends_with(".json") {
        return config(format!("model file `{}` not found", m.model));
    } else {
        builtin_model(&m.model, &json!({ "dim": m.lattice_dim }))?
    };
    Ok((h, budget))
}

fn cube(n: i64, dim: usize) -> Res<Region> {
    if n < 1 {
        return config(format!("size {n} must be at least 1"));
    }
    Ok(Region::cuboid(&vec![0; dim], &vec![n - 1; dim])?)
}

/// `lo..hi` per axis (inclusive), comma separated; a bare integer is a single site.
fn parse_region(text: &str, dim: usize) -> Res<Region> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let (a, b) = match part.split_once("..") {
            Some((a, b)) => (a, b.trim_start_matches('=')),
            None => (part, part),
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Config(format!("bad region bound `{s}` in `{text}`")))
        };
        lo.push(parse(a)?);
        hi.push(parse(b)?);
    }
    if lo.len() != dim {
        return config(format!("region `{text}` has {} axes, the model has {dim}", lo.len()));
    }
    Ok(Region::cuboid(&lo, &hi)?)
}

fn region_of(r: &RegionArgs, dim: usize) -> Res<Region> {
    match (r.sites, &r.region) {
        (Some(n), None) => cube(n, dim),
        (None, Some(text)) => parse_region(text, dim),
        _ => config("give either --sites or --region"),
    }
}

fn parse_sizes(text: &str) -> Res<Vec<i64>> {
    let bad = || CliError::Config(format!("bad size list `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn parse_floats(text: &str) -> Res<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad number `{s}` in `{text}`")))
        })
        .collect()
}

fn parse_gaps(text: &str) -> Res<Vec<(u64, f64)>> {
    text.split(',')
        .map(|p| {
            let (n, g) = p
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("expected n:gap, got `{p}`")))?;
            let n = n.trim().parse().map_err(|_| CliError::Config(format!("bad size `{n}`")))?;
            let g = g.trim().parse().map_err(|_| CliError::Config(format!("bad gap `{g}`")))?;
            Ok((n, g))
        })
        .collect()
}

fn pair_of(p: &PairArgs, dim: usize) -> Res<(Region, Region)> {
    Ok((parse_region(&p.a, dim)?, parse_region(&p.b, dim)?))
}

fn ineq_tolerances() -> Value {
    json!({ "inequality": INEQ_TOL, "tightness_relative": TIGHTNESS_REL })
}

fn delta_tolerances() -> Value {
    json!({ "form_agreement": FORM_AGREEMENT_TOL, "frustration_free": FF_TOL })
}

const NO_ROWS: Option<&[()]> = None;

fn run(command: Command) -> Res<bool> {
    match command {
        Command::Model { action } => model_cmd(action),
        Command::Gap(a) => gap_cmd(a),
        Command::Delta(a) => delta_cmd(a),
        Command::Verify { check } => verify_cmd(check),
        Command::Certify(a) => certify_cmd(a),
        Command::Pvbs { action } => pvbs_cmd(action),
        Command::Threshold(a) => threshold_cmd(a),
    }
}

fn model_cmd(action: ModelAction) -> Res<bool> {
    let ModelAction::Validate { model, region, tol, output } = action;
    let (h, budget) = load_model(&model)?;
    let region = region_of(&region, h.dim())?;
    let report = check_frustration_free(&h, &region, tol, budget)?;
    let result = json!({
        "model": {
            "source": model.model,
            "dim": h.dim(),
            "local_dim": h.local_dim(),
            "range": h.range(),
            "builtin": h.builtin_kind(),
        },
        "region": region,
        "frustration": report,
    });
    let tols = json!({ "projector": PROJECTOR_TOL, "kernel": tol });
    output::emit(&output, "model validate", None, tols, report.frustration_free, &result, NO_ROWS)?;
    Ok(report.frustration_free)
}

#[derive(Serialize)]
struct GapRow {
    n: i64,
    sites: usize,
    hilbert_dim: usize,
    gap: f64,
    ground_degeneracy: usize,
    lowest_eigenvalue: f64,
    tol: f64,
    method: &'static str,
}

fn gap_cmd(a: GapArgs) -> Res<bool> {
    let (h, budget) = load_model(&a.model)?;
    let mut rows = Vec::new();
    for n in parse_sizes(&a.sizes)? {
        let region = cube(n, h.dim())?;
        let op = AssembledOperator::assemble(&h, &region, budget)?;
        let spec = diagonalize(&op, a.tol)?;
        let r = &spec.report;
        rows.push(GapRow {
            n,
            sites: region.len(),
            hilbert_dim: r.dim,
            gap: r.gap,
            ground_degeneracy: r.ground_degeneracy,
            lowest_eigenvalue: r.lowest_eigenvalue,
            tol: r.tol,
            method: r.method,
        });
    }
    let tols = json!({ "kernel": a.tol });
    output::emit(&a.output, "gap", None, tols, true, &rows, Some(&rows))?;
    Ok(true)
}

#[derive(Serialize)]
struct DeltaTableRow {
    k: usize,
    l_k: f64,
    s_k: usize,
    s_admissible: bool,
    region_sites: usize,
    pairs: usize,
    delta_k: f64,
    method: &'static str,
}

#[derive(Serialize)]
struct CurveRow {
    d: usize,
    delta: f64,
    argmax_n: usize,
    argmax_m: usize,
    pairs: usize,
    method: &'static str,
}

fn delta_cmd(a: DeltaArgs) -> Res<bool> {
    let (h, budget) = load_model(&a.model)?;
    if let Some(k_max) = a.k_max {
        let schedule = Schedule::parse(&a.schedule)?;
        let table = delta_k_table(&h, k_max, &schedule, budget, a.frames)?;
        let rows: Vec<DeltaTableRow> = table
            .rows
            .iter()
            .map(|r| DeltaTableRow {
                k: r.k,
                l_k: r.l_k,
                s_k: r.s_k,
                s_admissible: r.s_admissible,
                region_sites: r.region.len(),
                pairs: r.pairs.len(),
                delta_k: r.delta_k,
                method: "exact_norm",
            })
            .collect();
        output::emit(&a.output, "delta table", None, delta_tolerances(), true, &table, Some(&rows))?;
        return Ok(true);
    }
    if let Some(d_max) = a.curve {
        let points = restricted_delta_curve(&h, d_max, a.max_sites, budget)?;
        let rows: Vec<CurveRow> = points
            .iter()
            .map(|p| CurveRow {
                d: p.d,
                delta: p.delta,
                argmax_n: p.argmax_n,
                argmax_m: p.argmax_m,
                pairs: p.pairs,
                method: "exact_norm",
            })
            .collect();
        output::emit(&a.output, "delta curve", None, delta_tolerances(), true, &points, Some(&rows))?;
        return Ok(true);
    }
    let (Some(ra), Some(rb)) = (&a.a, &a.b) else {
        return config("delta needs --A and --B, --k-max or --curve");
    };
    let (ra, rb) = (parse_region(ra, h.dim())?, parse_region(rb, h.dim())?);
    let est = delta_exact(&h, &ra, &rb, budget)?;
    let passed = est.forms_agree.unwrap_or(true);
    output::emit(&a.output, "delta", None, delta_tolerances(), passed, &est, NO_ROWS)?;
    Ok(passed)
}

fn sampled(
    a: SampledArgs,
    name: &str,
    f: fn(&DlContext, usize, u64) -> gapcert::Result<gapcert::dl::VerificationReport>,
) -> Res<bool> {
    let (h, budget) = load_model(&a.model)?;
    let region = region_of(&a.region, h.dim())?;
    let ctx = DlContext::new(&h, &region, budget, None)?;
    let report = f(&ctx, a.samples, a.seed)?;
    output::emit(&a.output, name, Some(a.seed), ineq_tolerances(), report.passed, &report, Some(&report.checks))?;
    Ok(report.passed)
}

#[derive(Serialize)]
struct ProjRow {
    index: usize,
    rank_p: usize,
    rank_q: usize,
    lower_min_eigenvalue: f64,
    upper_min_eigenvalue: f64,
    tolerance: f64,
    passed: bool,
}

fn verify_cmd(check: VerifyCommand) -> Res<bool> {
    match check {
        VerifyCommand::Dl(a) => sampled(a, "verify dl", verify_dl),
        VerifyCommand::Converse(a) => sampled(a, "verify converse", verify_converse_dl),
        VerifyCommand::Sandwich(a) => sampled(a, "verify sandwich", verify_sandwich),
        VerifyCommand::Gamma { model, region, output } => {
            let (h, budget) = load_model(&model)?;
            let region = region_of(&region, h.dim())?;
            let ctx = DlContext::new(&h, &region, budget, None)?;
            let r = gamma_contraction(&ctx)?;
            // γ >= 1 means no certificate, which counts as a failed check
            let passed = r.bound.is_some() && r.consistent;
            output::emit(&output, "verify gamma", None, ineq_tolerances(), passed, &r, NO_ROWS)?;
            Ok(passed)
        }
        VerifyCommand::Qf { model, pair, samples, seed, output } => {
            let (h, budget) = load_model(&model)?;
            let (a, b) = pair_of(&pair, h.dim())?;
            let r = verify_quasi_factorization(&h, &a, &b, budget, samples, seed)?;
            let tols = json!({ "operator": INEQ_TOL, "form_agreement": FORM_AGREEMENT_TOL });
            output::emit(&output, "verify qf", Some(seed), tols, r.passed, &r, NO_ROWS)?;
            Ok(r.passed)
        }
        VerifyCommand::Projineq { dim, pairs, seed, output } => {
            if dim == 0 {
                return config("--dim must be positive");
            }
            let mut rng = gapcert::linalg::seeded_rng(seed);
            let mut rows = Vec::with_capacity(pairs);
            for index in 0..pairs {
                let kp = rng.random_range(0..=dim);
                let kq = rng.random_range(0..=dim);
                let p = random_projector(dim, kp, &mut rng);
                let q = random_projector(dim, kq, &mut rng);
                let r = verify_projector_inequality(&p, &q)?;
                rows.push(ProjRow {
                    index,
                    rank_p: kp,
                    rank_q: kq,
                    lower_min_eigenvalue: r.lower.min_eigenvalue,
                    upper_min_eigenvalue: r.upper.min_eigenvalue,
                    tolerance: r.lower.tolerance,
                    passed: r.passed,
                });
            }
            let passed = rows.iter().all(|r| r.passed);
            let tols = json!({ "operator": INEQ_TOL });
            output::emit(&output, "verify projineq", Some(seed), tols, passed, &rows, Some(&rows))?;
            Ok(passed)
        }
        VerifyCommand::Gapdelta { model, pair, output } => {
            let (h, budget) = load_model(&model)?;
            let (a, b) = pair_of(&pair, h.dim())?;
            let r = verify_gap_to_delta(&h, &a, &b, budget)?;
            let tols = json!({ "inequality": INEQ_TOL, "form_agreement": FORM_AGREEMENT_TOL });
            output::emit(&output, "verify gapdelta", None, tols, r.passed, &r, NO_ROWS)?;
            Ok(r.passed)
        }
        VerifyCommand::Split { model, pair, q, output } => {
            let (h, budget) = load_model(&model)?;
            let (a, b) = pair_of(&pair, h.dim())?;
            let lam = a.union(&b)?;
            let ctx = DlContext::new(&h, &lam, budget, None)?;
            let r = verify_split(&h, &ctx, &a, &b, q, budget)?;
            let tols = json!({ "inequality": INEQ_TOL, "product_identity": SPLIT_PRODUCT_TOL });
            output::emit(&output, "verify split", None, tols, r.passed, &r, Some(&r.checks))?;
            Ok(r.passed)
        }
    }
}

fn certify_cmd(a: CertifyArgs) -> Res<bool> {
    let schedule = Schedule::parse(&a.schedule)?;
    let delta = DeltaModel::parse(&a.delta)?;
    let opts = RecursionOptions {
        dim: a.dim,
        k0: a.k0,
        explicit_levels: a.levels,
    };
    let r = recursion_bound(a.lambda0, &schedule, &delta, &opts)?;
    let tols = json!({ "rounding": "each factor rounded down by one ulp" });
    output::emit(&a.output, "certify", None, tols, r.valid, &r, Some(&r.factors))?;
    Ok(r.valid)
}

fn pvbs_cmd(action: PvbsAction) -> Res<bool> {
    match action {
        PvbsAction::Delta { lambda, pair, output } => {
            let lambdas = parse_floats(&lambda)?;
            let (a, b) = pair_of(&pair, lambdas.len())?;
            let est = pvbs_delta(&a, &b, &lambdas)?;
            output::emit(&output, "pvbs delta", None, json!({}), true, &est, NO_ROWS)?;
            Ok(true)
        }
        PvbsAction::Bound { lambda, l, la, lb, output } => {
            let lambdas = parse_floats(&lambda)?;
            let bound = pvbs_bound(l, la, lb, &lambdas)?;
            let result = json!({ "l": l, "l_a": la, "l_b": lb, "lambdas": lambdas, "bound": bound });
            output::emit(&output, "pvbs bound", None, json!({}), true, &result, NO_ROWS)?;
            Ok(true)
        }
        PvbsAction::Certify { lambda, schedule, lambda0, k0, output } => {
            let lambdas = parse_floats(&lambda)?;
            let schedule = Schedule::parse(&schedule)?;
            let r = pvbs_certify(&lambdas, &schedule, lambda0, k0)?;
            let tols = json!({ "rounding": "each factor rounded down by one ulp" });
            output::emit(&output, "pvbs certify", None, tols, r.valid, &r, Some(&r.factors))?;
            Ok(r.valid)
        }
    }
}

#[derive(Serialize)]
struct ThresholdRowCsv {
    n: u64,
    gap: f64,
    knabe_chain: f64,
    gosset_chain: f64,
    knabe_hexagonal: f64,
    gosset_square: f64,
    log_threshold: f64,
    cleared: String,
    below: String,
}

fn threshold_cmd(a: ThresholdArgs) -> Res<bool> {
    if let Some(n) = a.n {
        let t = classical_thresholds(n)?;
        let result = json!({
            "n": n,
            "classical": t,
            "fractions": [t.knabe_chain.to_string(), t.gosset_chain.to_string(), t.knabe_hexagonal.to_string(), t.gosset_square.to_string()],
            "log_threshold": log_threshold(n, a.c, a.epsilon),
            "c": a.c,
            "epsilon": a.epsilon,
        });
        output::emit(&a.output, "threshold", None, json!({}), true, &result, NO_ROWS)?;
        return Ok(true);
    }
    let lattice = LatticeKind::parse(&a.lattice)?;
    let gaps = match (&a.gaps, &a.model) {
        (Some(text), None) => parse_gaps(text)?,
        (None, Some(model)) => {
            let m = ModelArgs {
                model: model.clone(),
                lattice_dim: a.lattice_dim,
                budget: a.budget,
            };
            let (h, budget) = load_model(&m)?;
            let mut gaps = Vec::new();
            for n in parse_sizes(a.sizes.as_deref().unwrap_or_default())? {
                let op = AssembledOperator::assemble(&h, &cube(n, h.dim())?, budget)?;
                gaps.push((n as u64, diagonalize(&op, None)?.gap()));
            }
            gaps
        }
        _ => return config("threshold needs --n, --gaps or --model with --sizes"),
    };
    let report = threshold_check(&gaps, lattice, a.c, a.epsilon)?;
    let rows: Vec<ThresholdRowCsv> = report
        .rows
        .iter()
        .map(|r| ThresholdRowCsv {
            n: r.n,
            gap: r.gap,
            knabe_chain: r.classical.knabe_chain.value(),
            gosset_chain: r.classical.gosset_chain.value(),
            knabe_hexagonal: r.classical.knabe_hexagonal.value(),
            gosset_square: r.classical.gosset_square.value(),
            log_threshold: r.log_threshold,
            cleared: r.cleared.join(";"),
            below: r.below.join(";"),
        })
        .collect();
    output::emit(&a.output, "threshold", None, json!({}), true, &report, Some(&rows))?;
    Ok(true)
}
