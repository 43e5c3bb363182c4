//! Multi-trial experiments: seeding, aggregation across trials, envelope
//! scoring, empirical drift checks, exponent fits and file output.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{linear_girth, Girth};
use crate::par::map_trials;
use crate::process::{run_trial, EngineOptions, Sampling, Schedule, StopRule, Trace};
use crate::rng::trial_seed;
use crate::trajectory::{evaluate, ModelParams, Sign, TrajectoryPoint};

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub trials: usize,
    pub master_seed: u64,
    pub stop: StopRule,
    pub schedule: Schedule,
    pub sampling: Sampling,
    pub options: EngineOptions,
    /// Score every observation against the envelope instead of the mean.
    pub strict_envelope: bool,
    /// Run the brute-force girth check on each terminal hypergraph.
    pub check_girth: bool,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, trials: usize, master_seed: u64) -> Self {
        let sampling = Sampling::standard(params.ell);
        ExperimentConfig {
            params,
            trials,
            master_seed,
            stop: StopRule::Termination,
            schedule: Schedule::default(),
            sampling,
            options: EngineOptions::default(),
            strict_envelope: false,
            check_girth: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u64,
    pub seed: u64,
    pub m_final: u64,
    pub terminated: bool,
    /// `Some(true)` when the terminal hypergraph has no forbidden cycle.
    pub girth_ok: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Variable {
    Q,
    Y { m: usize },
    W { len: usize, k: usize },
}

impl Variable {
    pub fn label(&self) -> String {
        match *self {
            Variable::Q => "Q".into(),
            Variable::Y { m } => format!("Y{m}"),
            Variable::W { len, k } => format!("W{len}_{k}"),
        }
    }

    fn prediction(&self, pt: &TrajectoryPoint) -> Option<(f64, f64)> {
        match *self {
            Variable::Q => Some((pt.q(), pt.eps_q())),
            Variable::Y { m } => Some((pt.y(m), pt.eps_y(m))),
            Variable::W { len, k } => pt.w(len, k).map(|w| (w.value(), w.eps())),
        }
    }

    fn observations(&self, cp: &crate::process::Checkpoint) -> Vec<f64> {
        match *self {
            Variable::Q => vec![cp.q as f64],
            Variable::Y { m } => cp.y.iter().filter(|s| s.m == m).map(|s| s.value as f64).collect(),
            Variable::W { len, k } => {
                cp.w.iter().filter(|s| s.len == len && s.k == k).map(|s| s.value as f64).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub i: u64,
    pub t: f64,
    pub count: usize,
    pub mean: f64,
    pub std_err: f64,
    pub min: f64,
    pub max: f64,
    pub predicted: f64,
    pub eps: f64,
    /// `X^+` of the scored quantity; the largest over observations in strict mode.
    pub x_plus: f64,
    pub x_minus: f64,
    pub contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableReport {
    pub variable: Variable,
    pub label: String,
    pub points: Vec<EnvelopePoint>,
    pub containment_fraction: f64,
    pub max_x_plus: f64,
    pub max_x_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub strict: bool,
    /// Checkpoints with `i` beyond this are not scored.
    pub horizon: u64,
    pub variables: Vec<VariableReport>,
    pub containment_fraction: f64,
}

impl EnvelopeReport {
    pub fn variable(&self, v: Variable) -> Option<&VariableReport> {
        self.variables.iter().find(|r| r.variable == v)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub params: ModelParams,
    pub traces: Vec<Trace>,
    pub trials: Vec<TrialSummary>,
    pub envelope: EnvelopeReport,
}

impl ExperimentResult {
    pub fn mean_m(&self) -> f64 {
        self.trials.iter().map(|t| t.m_final as f64).sum::<f64>() / self.trials.len() as f64
    }
}

/// Runs `config.trials` independent trials, seeded by `trial_seed(master, k)`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let outcomes = map_trials(config.trials, |k| {
        let seed = trial_seed(config.master_seed, k as u64);
        let out = run_trial(
            &config.params,
            k as u64,
            seed,
            &config.schedule,
            config.stop,
            &config.sampling,
            &config.options,
        )?;
        let girth_ok = config.check_girth.then(|| linear_girth(&out.hypergraph, config.params.ell) == Girth::Infinite);
        let summary = TrialSummary {
            trial: k as u64,
            seed,
            m_final: out.trace.m_final,
            terminated: out.trace.terminated,
            girth_ok,
        };
        Ok((out.trace, summary))
    })?;
    let (traces, trials): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let envelope = envelope_report(&config.params, &traces, &config.sampling, config.strict_envelope)?;
    Ok(ExperimentResult { params: config.params.clone(), traces, trials, envelope })
}

fn variables(params: &ModelParams, sampling: &Sampling) -> Vec<Variable> {
    let mut v = vec![Variable::Q];
    if sampling.y_per_checkpoint > 0 {
        v.extend((2..params.r).map(|m| Variable::Y { m }));
    }
    if sampling.w_per_checkpoint > 0 {
        v.extend(sampling.w_pairs.iter().map(|&(len, k)| Variable::W { len, k }));
    }
    v
}

fn mean_and_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Scores checkpoint means (or every observation, if `strict`) against
/// `prediction ± eps` for `0 <= i <= floor(n^2 t_M)`.
pub fn envelope_report(
    params: &ModelParams,
    traces: &[Trace],
    sampling: &Sampling,
    strict: bool,
) -> Result<EnvelopeReport> {
    let horizon = params.step_horizon();
    let n2 = (params.n * params.n) as f64;
    let mut by_i: BTreeMap<u64, Vec<&crate::process::Checkpoint>> = BTreeMap::new();
    for tr in traces {
        for cp in tr.checkpoints.iter().filter(|cp| cp.i <= horizon) {
            by_i.entry(cp.i).or_default().push(cp);
        }
    }
    let mut reports = Vec::new();
    let (mut hit, mut total) = (0usize, 0usize);
    for var in variables(params, sampling) {
        let mut points = Vec::new();
        for (&i, cps) in &by_i {
            let obs: Vec<f64> = cps.iter().flat_map(|cp| var.observations(cp)).collect();
            if obs.is_empty() {
                continue;
            }
            let t = i as f64 / n2;
            let pt = evaluate(params, t)?;
            let Some((predicted, eps)) = var.prediction(&pt) else { continue };
            let (mean, std_err) = mean_and_err(&obs);
            let min = obs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = obs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (x_plus, x_minus) = if strict {
                ((max - predicted) - eps, -(min - predicted) - eps)
            } else {
                ((mean - predicted) - eps, -(mean - predicted) - eps)
            };
            let contained = x_plus <= 0.0 && x_minus <= 0.0;
            points.push(EnvelopePoint {
                i,
                t,
                count: obs.len(),
                mean,
                std_err,
                min,
                max,
                predicted,
                eps,
                x_plus,
                x_minus,
                contained,
            });
        }
        let inside = points.iter().filter(|p| p.contained).count();
        hit += inside;
        total += points.len();
        reports.push(VariableReport {
            variable: var,
            label: var.label(),
            containment_fraction: fraction(inside, points.len()),
            max_x_plus: points.iter().map(|p| p.x_plus).fold(f64::NEG_INFINITY, f64::max),
            max_x_minus: points.iter().map(|p| p.x_minus).fold(f64::NEG_INFINITY, f64::max),
            points,
        });
    }
    Ok(EnvelopeReport { strict, horizon, variables: reports, containment_fraction: fraction(hit, total) })
}

fn fraction(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// One realized step of a tracked quantity together with its trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepObservation {
    pub i: u64,
    pub raw: f64,
    pub raw_next: f64,
    pub predicted: f64,
    pub predicted_next: f64,
    pub eps: f64,
    pub eps_next: f64,
}

impl StepObservation {
    /// `X^±(i+1) - X^±(i)`.
    pub fn delta(&self, sign: Sign) -> f64 {
        let s = match sign {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        };
        s * ((self.raw_next - self.raw) - (self.predicted_next - self.predicted)) - (self.eps_next - self.eps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub i: u64,
    pub count: usize,
    pub drift: f64,
    pub std_err: f64,
    /// 95% normal-approximation interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub variable: Variable,
    pub sign: Sign,
    pub points: Vec<DriftPoint>,
    /// Share of checkpoints whose point estimate is `<= 0`.
    pub non_positive_fraction: f64,
    /// Share of checkpoints whose interval reaches down to `<= 0`.
    pub consistent_fraction: f64,
}

/// Averages realized one-step changes of `X^±` per checkpoint.
pub fn drift_report(variable: Variable, sign: Sign, steps: &[StepObservation]) -> DriftReport {
    let mut by_i: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for s in steps {
        by_i.entry(s.i).or_default().push(s.delta(sign));
    }
    let points: Vec<DriftPoint> = by_i
        .into_iter()
        .map(|(i, d)| {
            let (drift, std_err) = mean_and_err(&d);
            DriftPoint {
                i,
                count: d.len(),
                drift,
                std_err,
                ci_low: drift - 1.96 * std_err,
                ci_high: drift + 1.96 * std_err,
            }
        })
        .collect();
    let nonpos = points.iter().filter(|p| p.drift <= 0.0).count();
    let consistent = points.iter().filter(|p| p.ci_low <= 0.0).count();
    DriftReport {
        variable,
        sign,
        non_positive_fraction: fraction(nonpos, points.len()),
        consistent_fraction: fraction(consistent, points.len()),
        points,
    }
}

pub const MIN_DRIFT_TRIALS: usize = 30;

/// Empirical drift of `X^±` for `Q` or `Y_m` across at least 30 traces.
pub fn supermartingale_check(traces: &[Trace], variable: Variable, sign: Sign) -> Result<DriftReport> {
    if traces.len() < MIN_DRIFT_TRIALS {
        return Err(Error::InsufficientData(format!(
            "drift check needs {MIN_DRIFT_TRIALS} trials, got {}",
            traces.len()
        )));
    }
    let params = &traces[0].params;
    if matches!(variable, Variable::W { .. }) {
        return Err(Error::InvalidParams("one-step W changes are not recorded".into()));
    }
    let n2 = (params.n * params.n) as f64;
    let horizon = params.step_horizon();
    let mut steps = Vec::new();
    for tr in traces {
        for cp in tr.checkpoints.iter().filter(|cp| cp.i < horizon) {
            let Some(q_next) = cp.q_next else { continue };
            let now = evaluate(params, cp.i as f64 / n2)?;
            let next = evaluate(params, (cp.i + 1) as f64 / n2)?;
            let pairs: Vec<(f64, f64)> = match variable {
                Variable::Q => vec![(cp.q as f64, q_next as f64)],
                Variable::Y { m } => {
                    cp.y.iter()
                        .filter(|s| s.m == m)
                        .filter_map(|s| s.next.map(|nx| (s.value as f64, nx as f64)))
                        .collect()
                }
                Variable::W { .. } => unreachable!(),
            };
            let (p0, e0) = variable.prediction(&now).expect("Q and Y predictions always exist");
            let (p1, e1) = variable.prediction(&next).expect("Q and Y predictions always exist");
            steps.extend(pairs.into_iter().map(|(raw, raw_next)| StepObservation {
                i: cp.i,
                raw,
                raw_next,
                predicted: p0,
                predicted_next: p1,
                eps: e0,
                eps_next: e1,
            }));
        }
    }
    Ok(drift_report(variable, sign, &steps))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub n_grid: Vec<f64>,
    pub m_means: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

impl ExponentFit {
    pub fn compare(&self, ell: usize) -> ExponentComparison {
        let floor = 1.0 + 1.0 / ell as f64;
        let target = 1.0 + 1.0 / (ell as f64 - 1.0);
        ExponentComparison { slope: self.slope, floor, target, gap_to_target: target - self.slope }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentComparison {
    pub slope: f64,
    /// `1 + 1/ell`.
    pub floor: f64,
    /// `1 + 1/(ell-1)`.
    pub target: f64,
    pub gap_to_target: f64,
}

/// Least-squares fit of `ln M = slope ln n + intercept`.
pub fn fit_exponent(n_grid: &[f64], m_means: &[f64]) -> Result<ExponentFit> {
    if n_grid.len() != m_means.len() {
        return Err(Error::LengthMismatch(n_grid.len(), m_means.len()));
    }
    if n_grid.len() < 3 {
        return Err(Error::InsufficientData(format!("exponent fit needs 3 grid points, got {}", n_grid.len())));
    }
    if n_grid.iter().chain(m_means).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParams("grid values and means must be positive".into()));
    }
    let xs: Vec<f64> = n_grid.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = m_means.iter().map(|x| x.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("grid values must be distinct".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    Ok(ExponentFit { n_grid: n_grid.to_vec(), m_means: m_means.to_vec(), slope, intercept, residuals })
}

/// Fits the exponent from one experiment per grid point; each needs 5 terminated trials.
pub fn fit_exponent_from_runs(runs: &[ExperimentResult]) -> Result<ExponentFit> {
    for r in runs {
        let done = r.trials.iter().filter(|t| t.terminated).count();
        if done < 5 {
            return Err(Error::InsufficientData(format!("n = {} has {done} terminated trials, need 5", r.params.n)));
        }
    }
    let n: Vec<f64> = runs.iter().map(|r| r.params.n as f64).collect();
    let m: Vec<f64> = runs
        .iter()
        .map(|r| {
            let done: Vec<f64> = r.trials.iter().filter(|t| t.terminated).map(|t| t.m_final as f64).collect();
            done.iter().sum::<f64>() / done.len() as f64
        })
        .collect();
    fit_exponent(&n, &m)
}

/// One row of the checkpoint CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub i: u64,
    pub t: f64,
    pub q_emp: u64,
    pub q_pred: f64,
    pub eps_q: f64,
    pub y2_emp_mean: Option<f64>,
    pub y2_emp_count: usize,
    pub w_samples_json: String,
    pub m_final: u64,
}

pub const CSV_HEADER: [&str; 14] = [
    "trial",
    "seed",
    "n",
    "r",
    "ell",
    "i",
    "t",
    "Q_emp",
    "q_pred",
    "eps_q",
    "y2_emp_mean",
    "y2_emp_count",
    "w_samples_json",
    "M_final",
];

pub fn csv_rows(traces: &[Trace]) -> Result<Vec<CsvRow>> {
    let mut rows = Vec::new();
    for tr in traces {
        let p = &tr.params;
        let n2 = (p.n * p.n) as f64;
        for cp in &tr.checkpoints {
            let t = cp.i as f64 / n2;
            let pt = evaluate(p, t)?;
            let y2 = cp.y_mean(2);
            rows.push(CsvRow {
                trial: tr.trial,
                seed: tr.seed,
                n: p.n,
                r: p.r,
                ell: p.ell,
                i: cp.i,
                t,
                q_emp: cp.q,
                q_pred: pt.q(),
                eps_q: pt.eps_q(),
                y2_emp_mean: y2.map(|(m, _)| m),
                y2_emp_count: y2.map_or(0, |(_, c)| c),
                w_samples_json: serde_json::to_string(&cp.w)?,
                m_final: tr.m_final,
            });
        }
    }
    Ok(rows)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.r.to_string(),
            r.ell.to_string(),
            r.i.to_string(),
            fmt_f(r.t),
            r.q_emp.to_string(),
            fmt_f(r.q_pred),
            fmt_f(r.eps_q),
            r.y2_emp_mean.map(fmt_f).unwrap_or_default(),
            r.y2_emp_count.to_string(),
            r.w_samples_json.clone(),
            r.m_final.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize) -> Result<T> {
    let s = rec.get(idx).ok_or_else(|| Error::Parse(format!("missing column {}", CSV_HEADER[idx])))?;
    s.parse().map_err(|_| Error::Parse(format!("bad {} value {s:?}", CSV_HEADER[idx])))
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let y2 = rec.get(10).unwrap_or("");
        rows.push(CsvRow {
            trial: field(&rec, 0)?,
            seed: field(&rec, 1)?,
            n: field(&rec, 2)?,
            r: field(&rec, 3)?,
            ell: field(&rec, 4)?,
            i: field(&rec, 5)?,
            t: field(&rec, 6)?,
            q_emp: field(&rec, 7)?,
            q_pred: field(&rec, 8)?,
            eps_q: field(&rec, 9)?,
            y2_emp_mean: if y2.is_empty() { None } else { Some(field(&rec, 10)?) },
            y2_emp_count: field(&rec, 11)?,
            w_samples_json: rec.get(12).unwrap_or("").to_string(),
            m_final: field(&rec, 13)?,
        });
    }
    Ok(rows)
}

/// Header of the trajectory table for `params`.
pub fn trajectory_header(params: &ModelParams) -> Vec<String> {
    let mut h: Vec<String> = ["t", "p", "xi", "xi_tilde", "sigma", "q", "eps_q"].map(String::from).to_vec();
    for m in 2..params.r {
        h.push(format!("y_{m}"));
        h.push(format!("eps_y_{m}"));
    }
    for (len, k) in params.w_indices() {
        h.push(format!("w_{len}_{k}"));
        h.push(format!("eps_w_{len}_{k}"));
    }
    h
}

/// Closed-form trajectories at `points` evenly spaced `t` in `[0, t_M]`.
pub fn write_trajectory_csv<W: std::io::Write>(out: W, params: &ModelParams, points: usize) -> Result<()> {
    if points == 0 {
        return Err(Error::InvalidParams("t grid needs at least one point".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(params))?;
    for j in 0..points {
        let t = if points == 1 { 0.0 } else { params.t_m * j as f64 / (points - 1) as f64 };
        let pt = evaluate(params, t)?;
        let mut rec = vec![t, pt.p, pt.xi, pt.xi_tilde, pt.sigma, pt.q(), pt.eps_q()];
        for m in 2..params.r {
            rec.push(pt.y(m));
            rec.push(pt.eps_y(m));
        }
        for wp in &pt.w {
            rec.push(wp.value());
            rec.push(wp.eps());
        }
        w.write_record(rec.into_iter().map(fmt_f))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub params: ModelParams,
    pub trials: Vec<TrialSummary>,
    pub mean_m: f64,
    pub envelope: EnvelopeReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exponent: Option<ExponentFit>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub drift: Vec<DriftReport>,
}

impl Summary {
    pub fn new(result: &ExperimentResult) -> Self {
        Summary {
            params: result.params.clone(),
            trials: result.trials.clone(),
            mean_m: result.mean_m(),
            envelope: result.envelope.clone(),
            exponent: None,
            drift: vec![],
        }
    }
}

/// Writes `trace.csv`, `params.json` and `summary.json` into `dir`.
pub fn emit(dir: &Path, result: &ExperimentResult, summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir)?;
    let rows = csv_rows(&result.traces)?;
    write_csv(fs::File::create(dir.join("trace.csv"))?, &rows)?;
    fs::write(dir.join("params.json"), serde_json::to_string_pretty(&result.params)?)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)?)?;
    Ok(())
}
