//! Frequency selection: doubling search over powers of two.

use num_rational::Ratio;
use serde::Serialize;

use super::check::{check_inductive, CheckReport};
use super::increment::{build_increment, Increment};
use super::reynolds::reynolds_update;
use super::state::IterationState;
use crate::error::{Error, Result};
use crate::fourier::{add, Grid2};
use crate::mikado::exact_power;

/// Shell index `j = beta log2 lambda` when
/// `2^j <= (5/4) lambda^beta - (lambda^2 + lambda)` and
/// `(5/4) lambda^beta + (lambda^2 + lambda) < (3/2) 2^j`.
pub fn containment(lambda: u64, beta: u32) -> std::result::Result<u32, String> {
    if !lambda.is_power_of_two() || lambda < 2 {
        return Err(format!("lambda = {lambda} is not a power of two"));
    }
    let j = beta * lambda.trailing_zeros();
    if j >= 62 {
        return Err(format!("2^{j} overflows"));
    }
    let l = lambda as f64;
    let centre = 1.25 * l.powi(beta as i32);
    let radius = l * l + l;
    let two_j = (1u64 << j) as f64;
    if two_j > centre - radius {
        return Err(format!("containment: 2^{j} = {two_j} > {}", centre - radius));
    }
    if centre + radius >= 1.5 * two_j {
        return Err(format!("containment: {} >= (3/2) 2^{j} = {}", centre + radius, 1.5 * two_j));
    }
    Ok(j)
}

/// Sup-norm band bound of the increment before it is built.
pub fn band_bound(lambda: u64, beta: u32) -> usize {
    let l = lambda as f64;
    (1.25 * l.powi(beta as i32) + 2.0 * l * l + l).ceil() as usize
}

#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub lambda: u64,
    pub accepted: bool,
    /// Why the candidate was rejected, or which optional bounds it missed.
    pub note: String,
    pub r_norm: Option<f64>,
}

pub struct Selection {
    pub lambda: u64,
    pub state: IterationState,
    pub increment: Increment,
    pub check: CheckReport,
    pub candidates: Vec<Candidate>,
    /// Whether the `R` bound of item 3 holds at the chosen frequency.
    pub item3: bool,
}

/// One step at `lambda`: `u_{q+1} = u_q + w`, `R_{q+1}` from the update.
pub fn advance(state: &IterationState, lambda: u64, eps: Ratio<i64>) -> Result<(IterationState, Increment)> {
    let beta = state.params.beta;
    let inc = build_increment(&state.r, lambda, beta, eps, state.params.grid_max)?;
    let r = reynolds_update(&state.u, &state.r, &inc.w)?;
    let u = add(&state.u, &inc.w)?;
    let mut next = state.clone();
    next.q += 1;
    next.u = u;
    next.r = r;
    next.lambdas.push(lambda);
    next.eps_used.push((*eps.numer(), *eps.denom()));
    next.increments.push(inc.w.clone());
    next.shells.push(beta * lambda.trailing_zeros());
    Ok((next, inc))
}

/// Smallest admissible `lambda >= max(lambda0, gap lambda_q)` passing items
/// 1, 2, 4, 5 after a trial build; prefers the first one that also meets
/// item 3.
pub fn select_lambda(state: &IterationState) -> Result<Selection> {
    let p = &state.params;
    let eps = p.eps_gamma.0;
    let prev = state.lambdas.last().copied().unwrap_or(0);
    let mut lambda = p.lambda0.max(prev.saturating_mul(p.gap)).next_power_of_two();
    let mut candidates = Vec::new();
    let mut fallback: Option<Selection> = None;
    let mut last_reason = String::from("no candidate below the cap");
    let mut reject = |candidates: &mut Vec<Candidate>, lambda: u64, note: String| {
        last_reason = format!("lambda = {lambda}: {note}");
        candidates.push(Candidate { lambda, accepted: false, note, r_norm: None });
    };
    while lambda <= p.lambda_cap {
        if exact_power(lambda, eps).is_none() {
            reject(&mut candidates, lambda, format!("lambda^{eps} is not an integer"));
            lambda *= 2;
            continue;
        }
        if let Err(e) = containment(lambda, p.beta) {
            reject(&mut candidates, lambda, e);
            lambda *= 2;
            continue;
        }
        let band = band_bound(lambda, p.beta);
        let need = Grid2::dealias(band, band).n();
        if need > p.grid_max {
            reject(&mut candidates, lambda, format!("w (x) w needs grid {need} > {}", p.grid_max));
            break;
        }
        let (next, inc) = match advance(state, lambda, eps) {
            Ok(x) => x,
            Err(Error::ZeroStress) => return Err(Error::ZeroStress),
            Err(e) => {
                reject(&mut candidates, lambda, e.to_string());
                lambda *= 2;
                continue;
            }
        };
        let check = check_inductive(&next)?;
        if !check.items_pass(&[1, 2, 4, 5]) {
            let failed: Vec<&str> = check.checks.iter().filter(|c| c.gating && !c.pass).map(|c| c.name.as_str()).collect();
            reject(&mut candidates, lambda, format!("failed: {}", failed.join(", ")));
            lambda *= 2;
            continue;
        }
        let r3 = check.checks.iter().find(|c| c.item == 3).expect("item 3 present");
        let (r_norm, item3) = (r3.measured, r3.pass);
        if item3 {
            candidates.push(Candidate { lambda, accepted: true, note: "all items".into(), r_norm: Some(r_norm) });
            if let Some(f) = fallback.as_mut() {
                mark_rejected(&mut candidates, f.lambda);
            }
            return Ok(Selection { lambda, state: next, increment: inc, check, candidates, item3 });
        }
        candidates.push(Candidate { lambda, accepted: fallback.is_none(), note: format!("items 1, 2, 4, 5; R bound {} not met", r3.bound), r_norm: Some(r_norm) });
        if fallback.is_none() {
            fallback = Some(Selection { lambda, state: next, increment: inc, check, candidates: Vec::new(), item3 });
        }
        lambda *= 2;
    }
    match fallback {
        Some(mut f) => {
            f.candidates = candidates;
            Ok(f)
        }
        None => Err(Error::CapExceeded(last_reason)),
    }
}

fn mark_rejected(c: &mut [Candidate], lambda: u64) {
    for x in c.iter_mut().filter(|x| x.lambda == lambda) {
        x.accepted = false;
    }
}
