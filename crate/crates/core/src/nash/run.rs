//! The iteration driver and its report.

use serde::Serialize;

use super::check::{check_inductive, CheckReport, RESIDUAL_TOL};
use super::diagonal::{diagonal_cancellation_report, DiagonalReport};
use super::increment::{increment_report, IncrementReport, PointwiseFactors};
use super::params::IterationParams;
use super::reynolds::{euler_reynolds_residual, ResidualReport};
use super::select::{select_lambda, Candidate};
use super::state::{base_step, IterationState};
use super::structured::{lambda_trend, strictly_decreasing, structured_norm, TrendReport};
use super::weak::{weak_form_residual, WeakFormRow};
use crate::error::{Error, Result};
use crate::norms::{besov_norm, lp_norm, paraproduct_table, shell_range, sobolev_norm, NormEntry, NormTable, ParaproductTable};

pub const IDENTITY_TOL: f64 = 1e-9;
/// Test modes `|m_i| <= WEAK_MODES` for the weak form.
pub const WEAK_MODES: i64 = 2;

#[derive(Clone, Debug, Serialize)]
pub struct ItemThree {
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub q: u32,
    pub lambda: u64,
    pub eps: String,
    pub shell: u32,
    pub candidates: Vec<Candidate>,
    pub increment: IncrementReport,
    pub residual: ResidualReport,
    pub diagonal: DiagonalReport,
    pub check: CheckReport,
    pub item3: ItemThree,
    /// `||R_{q+1}||_{H^-2}` along the sweep, when the bound is not met.
    pub trend: Option<TrendReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSumRow {
    pub q: u32,
    pub p: f64,
    pub w_norm: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakFormTable {
    pub q: u32,
    pub tol: f64,
    pub rows: Vec<WeakFormRow>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub diag_eps: String,
    /// `sum_{q' <= q} ||w_q'||_{L^{2 - eps'}}`.
    pub partial_sums: Vec<PartialSumRow>,
    /// `||u_q||` in `B^{-1/2 - eps'}_{inf,inf}`.
    pub besov: Vec<NormEntry>,
    /// `u_q` against itself at `s = -2`.
    pub paraproduct: Vec<ParaproductTable>,
    pub weak_form: Vec<WeakFormTable>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub format: String,
    pub params: IterationParams,
    pub c: f64,
    pub base: CheckReport,
    pub steps: Vec<StepReport>,
    /// The stress vanished identically and the iteration stopped.
    pub converged_exactly: bool,
    /// Reason the iteration stopped early, if it did.
    pub stopped: Option<String>,
    pub diagnostics: Diagnostics,
    pub norms: NormTable,
    pub pass: bool,
}

fn step_report(prev: &IterationState, sel: super::select::Selection) -> Result<(IterationState, StepReport)> {
    let inc = &sel.increment;
    let factors = PointwiseFactors::new(&inc.plan, &prev.r, inc.grid)?;
    let increment = increment_report(inc, &factors)?;
    let diagonal = diagonal_cancellation_report(&inc.plan, &factors, IDENTITY_TOL)?;
    drop(factors);
    let residual = sel.check.residual.clone();
    let r3 = sel.check.checks.iter().find(|c| c.item == 3).expect("item 3 present");
    let item3 = ItemThree { measured: r3.measured, bound: r3.bound, pass: r3.pass };
    let params = &prev.params;
    let trend = if item3.pass {
        None
    } else {
        let rows = lambda_trend(&prev.u, &prev.r, &params.trend_sweep, params.beta, params.eps_gamma.0, params.grid_max)?;
        let (s, _) = structured_norm(&inc.plan, &prev.u, &prev.r)?;
        let dense = item3.measured;
        Some(TrendReport {
            strictly_decreasing: strictly_decreasing(&rows),
            rows,
            dense_value: Some(dense),
            structured_value: Some(s),
            cross_check_rel: Some((s - dense).abs() / dense),
        })
    };
    let trend_ok = trend.as_ref().map(|t| t.strictly_decreasing).unwrap_or(true);
    let pass = sel.check.pass
        && increment.div_pass
        && increment.reassembly_pass
        && increment.linf_pass
        && residual.pass
        && diagonal.identity.pass
        && (item3.pass || trend_ok);
    let q = sel.state.q;
    let eps = increment.eps.clone();
    let report = StepReport {
        q,
        lambda: sel.lambda,
        eps,
        shell: *sel.state.shells.last().expect("shell recorded"),
        candidates: sel.candidates,
        increment,
        residual,
        diagonal,
        check: sel.check,
        item3,
        trend,
        pass,
    };
    Ok((sel.state, report))
}

fn diagnostics(states: &[IterationState], params: &IterationParams, norms: &mut NormTable) -> Result<Diagnostics> {
    let de = params.diag_eps.to_f64();
    let p = 2.0 - de;
    let last = states.last().expect("at least the base state");
    let mut partial_sums = Vec::new();
    let mut acc = 0.0;
    for (q, w) in last.increments.iter().enumerate() {
        let e = lp_norm(w, p)?;
        acc += e.value;
        partial_sums.push(PartialSumRow { q: q as u32, p, w_norm: e.value, partial_sum: acc });
        let mut e = e;
        e.label = format!("w_{q}");
        norms.push(e);
    }
    let mut besov = Vec::new();
    let mut paraproduct = Vec::new();
    let mut weak_form = Vec::new();
    for s in states {
        let mut b = besov_norm(&s.u, -0.5 - de)?;
        b.label = format!("u_{}", s.q);
        norms.push(b.clone());
        besov.push(b);
        let j_max = shell_range(s.u.band()) + 2;
        paraproduct.push(paraproduct_table(&s.u, &s.u, -2.0, j_max)?);
        let rows = weak_form_residual(&s.u, &s.r, WEAK_MODES, RESIDUAL_TOL)?;
        let pass = rows.iter().all(|r| r.pass);
        weak_form.push(WeakFormTable { q: s.q, tol: RESIDUAL_TOL, rows, pass });
    }
    Ok(Diagnostics { diag_eps: params.diag_eps.to_string(), partial_sums, besov, paraproduct, weak_form })
}

fn state_norms(s: &IterationState, norms: &mut NormTable) -> Result<()> {
    let mut r = sobolev_norm(&s.r, -2.0);
    r.label = format!("R_{}", s.q);
    norms.push(r);
    let mut u = lp_norm(&s.u, super::params::p_of(s.q))?;
    u.label = format!("u_{}", s.q);
    norms.push(u);
    Ok(())
}

/// Base step, then `qmax` rounds of selection, increment, update and checks.
pub fn run(params: &IterationParams) -> Result<(Vec<IterationState>, RunReport)> {
    let base = base_step(params)?;
    let base_check = check_inductive(&base)?;
    let mut norms = NormTable::new();
    state_norms(&base, &mut norms)?;
    let mut states = vec![base];
    let mut steps = Vec::new();
    let mut converged_exactly = false;
    let mut stopped = None;
    for _ in 0..params.qmax {
        let prev = states.last().expect("state");
        let sel = match select_lambda(prev) {
            Ok(s) => s,
            Err(Error::ZeroStress) => {
                converged_exactly = true;
                stopped = Some("Reynolds stress vanished".into());
                break;
            }
            Err(Error::CapExceeded(why)) => {
                stopped = Some(format!("lambda cap exceeded: {why}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let (next, report) = step_report(prev, sel)?;
        state_norms(&next, &mut norms)?;
        steps.push(report);
        states.push(next);
    }
    let diagnostics = diagnostics(&states, params, &mut norms)?;
    let pass = base_check.pass && stopped.as_deref().map_or(true, |_| converged_exactly) && steps.iter().all(|s| s.pass);
    let report = RunReport {
        format: "nsforge-run".into(),
        params: params.clone(),
        c: states[0].c,
        base: base_check,
        steps,
        converged_exactly,
        stopped,
        diagnostics,
        norms,
        pass,
    };
    Ok((states, report))
}

/// Re-verify a state: items (1)-(5) plus the residual and weak form.
#[derive(Clone, Debug, Serialize)]
pub struct StateCheck {
    pub check: CheckReport,
    pub residual: ResidualReport,
    pub weak_form: WeakFormTable,
    pub pass: bool,
}

pub fn verify_state(s: &IterationState) -> Result<StateCheck> {
    let check = check_inductive(s)?;
    let residual = euler_reynolds_residual(&s.u, &s.r, RESIDUAL_TOL)?;
    let rows = weak_form_residual(&s.u, &s.r, WEAK_MODES, RESIDUAL_TOL)?;
    let wpass = rows.iter().all(|r| r.pass);
    let pass = check.pass && residual.pass && wpass;
    Ok(StateCheck { check, residual, weak_form: WeakFormTable { q: s.q, tol: RESIDUAL_TOL, rows, pass: wpass }, pass })
}
