//! Sweeps, optimisation runs and Monte Carlo validation driven by a [`RunConfig`].
//!
//! Every run returns its output as a string; numbers carry 9 significant
//! digits so identical configs give byte-identical files.

pub mod config;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use config::{ConfigError, Mode, RunConfig, U_ALPHA_TOLERANCE};

use crate::bounds::Method;
use crate::error::Error;
use crate::estimator::{evaluate_point, optimize_parameters, PointEvaluation, SearchBox};
use crate::mc_oracle::{
    coverage_rates, martingale_verify, IntervalRule, MarkovClickModel, MartingaleMode,
};

pub const SWEEP_HEADER: &str = "t_db,method,n_total,p_ap,q_mu_obs,e_mu_obs,xi_qmu,xi_qnu,xi_y0,xi_q0,chernoff_case,y1_lower,e1_upper,rate";
pub const DEVIATION_HEADER: &str =
    "t_db,method,n_total,p_ap,q_mu_obs,xi_qmu,xi_qnu,xi_y0,xi_q0,chernoff_case,qmu_rank,qmu_order";
pub const OPTIMIZE_HEADER: &str =
    "t_db,method,n_total,p_ap,mu,nu,p_z,frac_signal,frac_decoy,frac_vacuum,rate,baseline_rate,evaluations";

/// Prefixes checked per martingale run in validate mode.
const MARTINGALE_PREFIXES: usize = 100;
const MARTINGALE_TOLERANCE: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// A model or estimator error at one sweep point.
    Run(Error),
    Io(std::io::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration or run setup problems.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Run(e) => write!(f, "run error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Text produced by a run. `failed` is set when a validation check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub text: String,
    pub failed: bool,
}

/// Formats `x` with 9 significant digits.
pub fn fmt_num(x: f64) -> String {
    // avoid "-0.00000000e0"
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub method: Method,
    pub n_total: f64,
    pub p_ap: f64,
    pub loss_db: f64,
}

/// Grid points in output order: method, then N, then p_ap, then loss.
pub fn sweep_points(cfg: &RunConfig) -> Vec<SweepPoint> {
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let losses = cfg.loss_grid();
    let mut out = Vec::new();
    for &method in &methods {
        for &n_total in &cfg.n_total {
            for &p_ap in &cfg.p_ap {
                for &loss_db in &losses {
                    out.push(SweepPoint {
                        method,
                        n_total,
                        p_ap,
                        loss_db,
                    });
                }
            }
        }
    }
    out
}

pub fn evaluate_sweep_point(cfg: &RunConfig, p: &SweepPoint) -> Result<PointEvaluation, Error> {
    let channel = cfg.channel.with_loss(p.loss_db).with_afterpulse(p.p_ap);
    let source = cfg.source.with_n_total(p.n_total);
    evaluate_point(&channel, &source, &cfg.budget, p.method, &cfg.estimator)
}

fn evaluate_all(cfg: &RunConfig) -> Result<Vec<(SweepPoint, PointEvaluation)>, CliError> {
    let points = sweep_points(cfg);
    let evals = points
        .par_iter()
        .map(|p| evaluate_sweep_point(cfg, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(points.into_iter().zip(evals).collect())
}

fn case_id(e: &PointEvaluation) -> u8 {
    e.bounds.chernoff_case().map_or(0, |c| c.id())
}

/// Key-rate sweep over loss for every (method, N, p_ap).
pub fn run_sweep(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let mut text = String::new();
    writeln!(text, "{SWEEP_HEADER}").unwrap();
    for (p, e) in evaluate_all(cfg)? {
        let xi = e.bounds.xi;
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(p.loss_db),
            p.method,
            fmt_num(p.n_total),
            fmt_num(p.p_ap),
            fmt_num(e.tallies.q_mu.x_bar()),
            fmt_num(e.model.e_mu_prime),
            fmt_num(xi.q_mu),
            fmt_num(xi.q_nu),
            fmt_num(xi.y0),
            fmt_num(xi.q0),
            case_id(&e),
            fmt_num(e.point.y1_lower),
            fmt_num(e.point.e1_upper),
            fmt_num(e.point.rate),
        )
        .unwrap();
    }
    Ok(RunOutput {
        text,
        failed: false,
    })
}

/// Methods ordered by decreasing `Q_mu` radius, e.g. `LLN>AI>HI>CB>SEA`;
/// equal radii are joined with `=`.
pub fn radius_order(radii: &[(Method, f64)]) -> String {
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut s = String::new();
    for (i, (m, r)) in sorted.iter().enumerate() {
        if i > 0 {
            s.push(if *r == sorted[i - 1].1 { '=' } else { '>' });
        }
        s.push_str(m.tag());
    }
    s
}

/// Per-point radii of every method, ranked by the `Q_mu` radius.
pub fn run_deviation_sweep(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let rows = evaluate_all(cfg)?;
    let key = |p: &SweepPoint| (p.n_total.to_bits(), p.p_ap.to_bits(), p.loss_db.to_bits());
    let mut text = String::new();
    writeln!(text, "{DEVIATION_HEADER}").unwrap();
    for (p, e) in &rows {
        let peers: Vec<(Method, f64)> = rows
            .iter()
            .filter(|(q, _)| key(q) == key(p))
            .map(|(q, f)| (q.method, f.bounds.xi.q_mu))
            .collect();
        let order = radius_order(&peers);
        let rank = 1 + peers.iter().filter(|(_, r)| *r > e.bounds.xi.q_mu).count();
        let xi = e.bounds.xi;
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(p.loss_db),
            p.method,
            fmt_num(p.n_total),
            fmt_num(p.p_ap),
            fmt_num(e.tallies.q_mu.x_bar()),
            fmt_num(xi.q_mu),
            fmt_num(xi.q_nu),
            fmt_num(xi.y0),
            fmt_num(xi.q0),
            case_id(e),
            rank,
            order,
        )
        .unwrap();
    }
    Ok(RunOutput {
        text,
        failed: false,
    })
}

/// Source-parameter optimisation at every sweep point over the default box.
pub fn run_optimize(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let points = sweep_points(cfg);
    let results = points
        .par_iter()
        .map(|p| {
            let channel = cfg.channel.with_loss(p.loss_db).with_afterpulse(p.p_ap);
            let source = cfg.source.with_n_total(p.n_total);
            let baseline = evaluate_point(&channel, &source, &cfg.budget, p.method, &cfg.estimator)?;
            let opt = optimize_parameters(
                &channel,
                &source,
                &cfg.budget,
                p.method,
                &cfg.estimator,
                &SearchBox::default(),
            )?;
            Ok((baseline.point.rate, opt))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut text = String::new();
    writeln!(text, "{OPTIMIZE_HEADER}").unwrap();
    for (p, (baseline, opt)) in points.iter().zip(results) {
        let s = opt.source;
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(p.loss_db),
            p.method,
            fmt_num(p.n_total),
            fmt_num(p.p_ap),
            fmt_num(s.mu),
            fmt_num(s.nu),
            fmt_num(s.p_z),
            fmt_num(s.frac_signal),
            fmt_num(s.frac_decoy),
            fmt_num(s.frac_vacuum),
            fmt_num(opt.point.rate),
            fmt_num(baseline),
            opt.evaluations,
        )
        .unwrap();
    }
    Ok(RunOutput {
        text,
        failed: false,
    })
}

/// Whether `method` must cover the mean on a chain with after-pulse
/// probability `p_ap`. Only Azuma is valid on correlated samples; SEA is an
/// asymptotic approximation and is reported but never required.
pub fn coverage_required(method: Method, p_ap: f64) -> bool {
    match method {
        Method::Azuma => true,
        Method::Sea => false,
        _ => p_ap == 0.0,
    }
}

/// Coverage table (method x p_ap x epsilon) and martingale residual summary.
/// Lines end in PASS, FAIL or INFO; `failed` is set if any line is FAIL.
pub fn run_validation(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut text = String::new();
    let (mut passed, mut failed) = (0usize, 0usize);
    let mut verdict = |ok: bool, required: bool| match (required, ok) {
        (false, _) => "INFO",
        (true, true) => {
            passed += 1;
            "PASS"
        }
        (true, false) => {
            failed += 1;
            "FAIL"
        }
    };
    writeln!(
        text,
        "# click_prob={} chain_length={} trials={} seed={}",
        fmt_num(cfg.click_prob),
        cfg.chain_length,
        cfg.trials,
        cfg.seed
    )
    .unwrap();

    for &p_ap in &cfg.p_ap {
        let model = MarkovClickModel::new(cfg.click_prob, p_ap, cfg.seed)
            .map_err(|e| ConfigError { line: None, message: e.to_string() })?;
        let rules: Vec<IntervalRule> = cfg
            .coverage_epsilons
            .iter()
            .flat_map(|&epsilon| methods.iter().map(move |&method| IntervalRule::Method { method, epsilon }))
            .collect();
        let reports = coverage_rates(&model, &rules, cfg.chain_length, cfg.trials)?;
        for r in reports {
            let IntervalRule::Method { method, epsilon } = r.rule else {
                unreachable!("validation only builds method rules")
            };
            let limit = epsilon + 3.0 * (epsilon / r.trials as f64).sqrt();
            writeln!(
                text,
                "coverage p_ap={} epsilon={} method={} failures={} rate={} limit={} {}",
                fmt_num(p_ap),
                fmt_num(epsilon),
                method,
                r.failures,
                fmt_num(r.failure_rate()),
                fmt_num(limit),
                verdict(r.within(epsilon), coverage_required(method, p_ap)),
            )
            .unwrap();
        }

        let n = cfg.chain_length as usize;
        let exact = martingale_verify(&model, n, MARTINGALE_PREFIXES, MartingaleMode::ExactAlgebra)?;
        writeln!(
            text,
            "martingale p_ap={} mode=exact prefixes={} max_residual={} tolerance={} {}",
            fmt_num(p_ap),
            exact.residuals.len(),
            fmt_num(exact.max_residual()),
            fmt_num(MARTINGALE_TOLERANCE),
            verdict(exact.max_residual() < MARTINGALE_TOLERANCE, true),
        )
        .unwrap();
        let fixed = martingale_verify(&model, n, MARTINGALE_PREFIXES, MartingaleMode::FixedTransition)?;
        // each residual is |p - S_k/k| / (k + 1) <= 1 / (k + 1)
        let scaled = fixed
            .prefixes
            .iter()
            .zip(&fixed.residuals)
            .map(|(&k, r)| r * (k as f64 + 1.0))
            .fold(0.0, f64::max);
        writeln!(
            text,
            "martingale p_ap={} mode=fixed prefixes={} max_residual={} max_scaled_residual={} {}",
            fmt_num(p_ap),
            fixed.residuals.len(),
            fmt_num(fixed.max_residual()),
            fmt_num(scaled),
            verdict(scaled <= 1.0, true),
        )
        .unwrap();
    }
    writeln!(text, "summary passed={passed} failed={failed}").unwrap();
    Ok(RunOutput {
        text,
        failed: failed > 0,
    })
}

/// Dispatches on `cfg.mode`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.mode {
        Mode::Sweep => run_sweep(cfg),
        Mode::Deviations => run_deviation_sweep(cfg),
        Mode::Optimize => run_optimize(cfg),
        Mode::Validate => run_validation(cfg),
    }
}

/// Gnuplot script plotting `data_path` for the configured series. `None`
/// for validate mode, which has no tabular output.
pub fn gnuplot_script(cfg: &RunConfig, data_path: &str) -> Option<String> {
    let (ylabel, column) = match cfg.mode {
        Mode::Sweep => ("key rate per pulse", 14),
        Mode::Deviations => ("Q_mu deviation", 6),
        Mode::Optimize => ("optimised key rate per pulse", 11),
        Mode::Validate => return None,
    };
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set key autotitle columnhead").unwrap();
    writeln!(s, "set logscale y").unwrap();
    writeln!(s, "set format y '10^{{%L}}'").unwrap();
    writeln!(s, "set xlabel 'loss (dB)'").unwrap();
    writeln!(s, "set ylabel '{ylabel}'").unwrap();
    writeln!(s, "data = '{}'", data_path.replace('\'', "''")).unwrap();
    let mut series = Vec::new();
    for m in &methods {
        for &n in &cfg.n_total {
            for &p in &cfg.p_ap {
                series.push(format!(
                    "data using (strcol(2) eq '{m}' && $3 == {n:e} && $4 == {p:e} ? $1 : 1/0):(${column} > 0 ? ${column} : 1/0) with lines title '{m} N={n:e} p_ap={p}'"
                ));
            }
        }
    }
    if series.is_empty() {
        writeln!(s, "# no series configured").unwrap();
    } else {
        writeln!(s, "plot {}", series.join(", \\\n     ")).unwrap();
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(extra: &str) -> RunConfig {
        RunConfig::parse(&format!(
            "loss_db_min = 0\nloss_db_max = 20\nloss_db_step = 10\nn_total = 1e12\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0.00000000e0");
        assert_eq!(fmt_num(-0.0), "0.00000000e0");
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt_num(1e12), "1.00000000e12");
    }

    #[test]
    fn sweep_rows_and_order() {
        let out = run_sweep(&small("methods = AI, SEA\np_ap = 0, 0.04")).unwrap();
        let lines: Vec<&str> = out.text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2 * 3);
        assert!(lines[1].starts_with("0.00000000e0,SEA,1.00000000e12,0.00000000e0,"));
        assert!(lines[7].starts_with("0.00000000e0,AI,"));
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), 14);
        }
    }

    #[test]
    fn empty_methods_is_header_only() {
        let out = run_sweep(&small("methods =")).unwrap();
        assert_eq!(out.text, format!("{SWEEP_HEADER}\n"));
    }

    #[test]
    fn single_loss_point() {
        let cfg = RunConfig::parse("loss_db_min = 10\nloss_db_max = 10\n").unwrap();
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.text.lines().count(), 1 + 5);
    }

    #[test]
    fn deviation_order_at_high_loss() {
        let cfg = RunConfig::parse(
            "loss_db_min = 30\nloss_db_max = 30\nn_total = 1e12\nepsilon = 1e-10\nu_alpha = 6.4\n",
        )
        .unwrap();
        let out = run_deviation_sweep(&cfg).unwrap();
        for l in out.text.lines().skip(1) {
            assert!(l.ends_with("LLN>AI>HI>CB>SEA"), "{l}");
        }
    }

    #[test]
    fn radius_order_ties() {
        let s = radius_order(&[(Method::Hoeffding, 1.0), (Method::Chernoff, 1.0), (Method::Lln, 2.0)]);
        assert_eq!(s, "LLN>HI=CB");
    }

    #[test]
    fn validation_passes_and_flags() {
        let cfg = small("mode = validate\np_ap = 0, 0.04\ntrials = 200\nchain_length = 5000\nclick_prob = 0.05\ncoverage_epsilons = 0.1");
        let out = run_validation(&cfg).unwrap();
        assert!(!out.failed, "{}", out.text);
        assert!(out.text.contains("method=AI"));
        assert!(out.text.lines().last().unwrap().starts_with("summary"));
    }

    #[test]
    fn gnuplot_mentions_every_series() {
        let cfg = small("methods = HI, CB\np_ap = 0, 0.04");
        let s = gnuplot_script(&cfg, "out.csv").unwrap();
        assert_eq!(s.matches("with lines").count(), 4);
        assert!(s.contains("data = 'out.csv'"));
        let v = RunConfig { mode: Mode::Validate, ..cfg };
        assert!(gnuplot_script(&v, "x").is_none());
    }
}
