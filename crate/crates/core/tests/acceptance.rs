//! Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;

use glgp_core::availability::{count_y, enumerate_k_m, ForbiddenFamily};
use glgp_core::harness::{fit_exponent_from_runs, run_experiment, ExperimentConfig, Variable};
use glgp_core::hypergraph::{linear_girth, Girth};
use glgp_core::oracle::{
    aut_count_brute, count_q_destroyers, deletion_construct, ex_l_exact, forb_count_exact, DestroyerMethod, SearchOrder,
};
use glgp_core::process::{EngineMode, ProcessState, Sampling, StopRule};
use glgp_core::rng::{process_rng, trial_seed};
use glgp_core::rset::binomial;
use glgp_core::trajectory::{
    aut_count, check_derivative_identity_w, check_derivative_identity_y, check_xi_identity, derive_params,
    freedman_bound,
};
use glgp_core::{Error, RSet, Result};

const MASTER: u64 = 0x5eed_0001;

type Criterion = (usize, &'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn girth_safety() -> Result<Outcome> {
    let mut cfg = ExperimentConfig::new(derive_params(60, 3, 5, None, None)?, 100, MASTER);
    cfg.sampling = Sampling::none();
    cfg.check_girth = true;
    let res = run_experiment(&cfg)?;
    let ok = res.trials.iter().filter(|t| t.terminated && t.girth_ok == Some(true)).count();
    outcome(ok == 100, format!("{ok}/100 terminal hypergraphs have linear girth > 5, mean M = {:.1}", res.mean_m()))
}

struct DifferentialStats {
    steps: usize,
    mismatches: usize,
    identity_checks: usize,
    identity_failures: usize,
}

/// Criteria 2 and 3 share their runs: every step is checked against the naive
/// engine, and both counting identities are evaluated at every state.
fn differential_runs() -> Result<DifferentialStats> {
    let n = 20usize;
    let mut st = DifferentialStats { steps: 0, mismatches: 0, identity_checks: 0, identity_failures: 0 };
    let c_n2 = binomial(n as u64, 2).unwrap() as usize;
    for r in [3usize, 4] {
        let c_r2 = r * (r - 1) / 2;
        let fam = ForbiddenFamily::new(4)?;
        for trial in 0..10u64 {
            let seed = trial_seed(MASTER ^ r as u64, trial);
            let mut s = ProcessState::new(n, r, fam, seed)?.with_mode(EngineMode::Verify);
            loop {
                st.identity_checks += 1;
                let mut y_sum = 0usize;
                for (x, y) in s.g().pairs() {
                    y_sum += count_y(s.h(), s.g(), fam, &RSet::new([x, y], n)?)?.0;
                }
                let pairs_ok = s.g().edge_count() == c_n2 - c_r2 * s.i();
                if y_sum != c_r2 * s.q().len() || !pairs_ok {
                    st.identity_failures += 1;
                }
                if s.is_terminal() {
                    break;
                }
                match s.step() {
                    Ok(_) => st.steps += 1,
                    Err(Error::ConsistencyFailure { .. }) => {
                        st.mismatches += 1;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(st)
}

fn destroyer_exactness() -> Result<Outcome> {
    let mut rng = process_rng(MASTER);
    let (mut states, mut compared, mut disagree) = (0, 0, 0);
    while states < 50 {
        let r = 3 + states % 2;
        let fam = ForbiddenFamily::new(4)?;
        let mut s = ProcessState::new(15, r, fam, rng.random())?;
        let steps = rng.random_range(0..12);
        for _ in 0..steps {
            if s.is_terminal() {
                break;
            }
            s.step()?;
        }
        let cliques = enumerate_k_m(s.g(), r);
        if cliques.is_empty() {
            continue;
        }
        states += 1;
        let f = &cliques[rng.random_range(0..cliques.len())];
        let fm = &f.vertices()[..2];
        for fm in [None, Some(fm)] {
            let d = count_q_destroyers(s.h(), s.g(), fam, f, fm, DestroyerMethod::Direct)?;
            let ie = count_q_destroyers(s.h(), s.g(), fam, f, fm, DestroyerMethod::InclusionExclusion)?;
            compared += 1;
            if d != ie {
                disagree += 1;
            }
        }
    }
    outcome(disagree == 0, format!("{compared} comparisons on {states} states, {disagree} disagreements"))
}

fn derivative_identities() -> Result<Outcome> {
    let params = derive_params(100, 3, 4, None, None)?;
    let h = params.t_m * 1e-4;
    let mut rng = process_rng(MASTER + 5);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for _ in 0..10 {
        let t = params.t_m * rng.random_range(2e-4..1.0);
        for m in 2..params.r {
            worst = worst.max(check_derivative_identity_y(&params, t, m, h)?);
            checks += 1;
        }
        for (len, k) in params.w_indices() {
            worst = worst.max(check_derivative_identity_w(&params, t, len, k, h)?);
            checks += 1;
        }
        worst = worst.max(check_xi_identity(&params, t, h)?);
        checks += 1;
    }
    outcome(worst <= 1e-6, format!("{checks} checks, worst relative error {worst:.3e} (tolerance 1e-6)"))
}

fn concentration() -> Result<Outcome> {
    let params = derive_params(300, 3, 4, None, None)?;
    let horizon = params.step_horizon();
    let mut cfg = ExperimentConfig::new(params, 20, MASTER);
    cfg.stop = StopRule::StepCap(horizon);
    cfg.sampling = Sampling::none();
    let res = run_experiment(&cfg)?;
    let q = res.envelope.variable(Variable::Q).expect("Q is always scored");
    let inside = q.points.iter().filter(|p| p.contained).count();
    outcome(
        q.containment_fraction >= 0.9,
        format!(
            "mean |Q| inside q ± eps_q at {inside}/{} checkpoints up to i = {horizon} ({:.1}%, need 90%)",
            q.points.len(),
            100.0 * q.containment_fraction
        ),
    )
}

fn growth_exponent() -> Result<Outcome> {
    let mut runs = Vec::new();
    for n in [100usize, 200, 400] {
        let mut cfg = ExperimentConfig::new(derive_params(n, 3, 4, None, None)?, 5, MASTER + n as u64);
        cfg.sampling = Sampling::none();
        runs.push(run_experiment(&cfg)?);
    }
    let fit = fit_exponent_from_runs(&runs)?;
    let cmp = fit.compare(4);
    let means: Vec<String> = fit.n_grid.iter().zip(&fit.m_means).map(|(n, m)| format!("n={n}: {m:.1}")).collect();
    outcome(
        fit.slope >= cmp.floor,
        format!(
            "slope {:.4} (need >= {}), gap to 4/3 = {:+.4}; mean M {}",
            fit.slope,
            cmp.floor,
            cmp.gap_to_target,
            means.join(", ")
        ),
    )
}

fn freedman() -> Result<Outcome> {
    let at_one = freedman_bound(1.0, 1.0, 1.0)?;
    let err = (at_one - (-0.25f64).exp()).abs();
    let grid: Vec<f64> = (1..=100).map(|k| freedman_bound(k as f64 * 0.1, 1.0, 1.0)).collect::<Result<_>>()?;
    let monotone = grid.windows(2).all(|w| w[1] < w[0]);
    outcome(
        err <= 1e-12 && monotone,
        format!("|bound(1,1,1) - exp(-1/4)| = {err:.1e}, strictly decreasing on z = 0.1..10: {monotone}"),
    )
}

fn automorphisms() -> Result<Outcome> {
    let cases = [(3usize, 3usize, 6u64), (3, 4, 8), (4, 3, 48)];
    let mut parts = Vec::new();
    let mut pass = true;
    for (r, len, want) in cases {
        let brute = aut_count_brute(r, len);
        let closed = aut_count(r, len)? as u64;
        pass &= brute == want && closed == want;
        parts.push(format!("aut({r},{len}) brute {brute} closed {closed}"));
    }
    outcome(pass, parts.join(", "))
}

fn turan_forb() -> Result<Outcome> {
    let budget = 200_000_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for ell in [3usize, 4] {
        for n in 3..=7usize {
            let ex_a = ex_l_exact(n, 3, ell, SearchOrder::Colex, budget)?;
            let ex_b = ex_l_exact(n, 3, ell, SearchOrder::ReverseColex, budget)?;
            let fb_a = forb_count_exact(n, 3, ell, SearchOrder::Colex, budget)?;
            let fb_b = forb_count_exact(n, 3, ell, SearchOrder::ReverseColex, budget)?;
            let bound = 1u128 << ex_a.max_edges <= fb_a.count;
            let girth_ok = linear_girth(&ex_a.witness, ell) == Girth::Infinite && ex_a.witness.len() == ex_a.max_edges;
            pass &= ex_a.max_edges == ex_b.max_edges && fb_a.count == fb_b.count && bound && girth_ok;
            parts.push(format!("(n={n},L={ell}) ex={} forb={}", ex_a.max_edges, fb_a.count));
        }
    }
    outcome(pass, parts.join("; "))
}

fn deletion_baseline() -> Result<Outcome> {
    let (n, r, ell) = (500usize, 3usize, 4usize);
    let mut ok = 0;
    let mut edges = 0usize;
    for seed in 0..100u64 {
        let rep = deletion_construct(n, r, ell, seed)?;
        if linear_girth(&rep.hypergraph, ell) == Girth::Infinite {
            ok += 1;
        }
        edges += rep.hypergraph.len();
    }
    let mut cfg = ExperimentConfig::new(derive_params(n, r, ell, None, None)?, 2, MASTER);
    cfg.sampling = Sampling::none();
    let greedy = run_experiment(&cfg)?.mean_m();
    outcome(
        ok == 100,
        format!(
            "{ok}/100 outputs have linear girth > 4; mean deletion edges {:.1} vs greedy mean M {greedy:.1}",
            edges as f64 / 100.0
        ),
    )
}

fn report(id: usize, name: &str, res: Result<Outcome>, started: Instant, failures: &mut usize) {
    let secs = started.elapsed().as_secs_f64();
    match res {
        Ok(o) => {
            if !o.pass {
                *failures += 1;
            }
            println!("{} [{id:>2}] {name}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        }
        Err(e) => {
            *failures += 1;
            println!("FAIL [{id:>2}] {name}: error: {e} ({secs:.1}s)");
        }
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    let t = Instant::now();
    report(1, "girth safety", girth_safety(), t, &mut failures);

    let t = Instant::now();
    let diff = differential_runs();
    let (c2, c3) = match diff {
        Ok(st) => (
            outcome(
                st.mismatches == 0,
                format!("{} verified steps over 20 trials, {} mismatches", st.steps, st.mismatches),
            ),
            outcome(
                st.identity_failures == 0,
                format!("{} states checked, {} identity failures", st.identity_checks, st.identity_failures),
            ),
        ),
        Err(e) => (Err(Error::Parse(e.to_string())), Err(e)),
    };
    report(2, "oracle equivalence", c2, t, &mut failures);
    report(3, "counting identities", c3, t, &mut failures);

    let criteria: [Criterion; 8] = [
        (4, "inclusion-exclusion exactness", destroyer_exactness),
        (5, "derivative identities", derivative_identities),
        (6, "trajectory concentration", concentration),
        (7, "growth exponent", growth_exponent),
        (8, "Freedman bound", freedman),
        (9, "automorphism counts", automorphisms),
        (10, "Turán/Forb sanity", turan_forb),
        (11, "deletion baseline", deletion_baseline),
    ];
    for (id, name, f) in criteria {
        let t = Instant::now();
        report(id, name, f(), t, &mut failures);
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
