//! Browser bindings. Every export takes plain strings or numbers and returns
//! a JSON document; errors surface as thrown JavaScript `Error`s.

use nucleo::experiments::{emit_report, run_sequence, Family, RatioPair, SequenceSpec};
use nucleo::parse::parse_game;
use nucleo::theory::{gap_report, l1_distance, lemma_bound, normalized_weights};
use nucleo::nucleolus::nucleolus_with;
use nucleo::{Engine, Error, Rational, SolverOptions};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest sweep the page will run in one call.
pub const MAX_SWEEP_LEN: usize = 40;

fn approx(xs: &[Rational]) -> Vec<f64> {
    xs.iter().map(Rational::to_f64).collect()
}

/// Nucleolus, normalized weights and gap statistics of one game.
pub fn solve_json(game: &str) -> Result<String, String> {
    let run = || -> nucleo::Result<String> {
        let rep = parse_game(game)?;
        let res = nucleolus_with(&rep, Engine::Auto, &SolverOptions::default())?;
        let w_bar = normalized_weights(&rep)?;
        let bound = match lemma_bound(&rep) {
            Ok(b) => Some(b),
            Err(Error::DegenerateQuota) => None,
            Err(e) => return Err(e),
        };
        let delta = gap_report(&rep, &res.x_star).ok().map(|g| g.delta);
        Ok(json!({
            "game": rep,
            "engine": res.engine,
            "x_star": res.x_star,
            "x_star_approx": approx(&res.x_star),
            "w_bar": w_bar,
            "w_bar_approx": approx(&w_bar),
            "l1_gap": l1_distance(&res.x_star, &w_bar),
            "bound": bound,
            "delta": delta,
            "levels": res.levels.len(),
        })
        .to_string())
    };
    run().map_err(|e| e.to_string())
}

fn sweep(family: Family, start: usize, end: usize, pairs: &[RatioPair]) -> Result<String, String> {
    if end.saturating_sub(start) >= MAX_SWEEP_LEN {
        return Err(format!("sweeps are limited to {MAX_SWEEP_LEN} games"));
    }
    let run = || -> nucleo::Result<String> {
        let spec = SequenceSpec::new(family, start, end)?;
        let rows = run_sequence(&spec, pairs, Engine::Auto, &Default::default())?;
        emit_report(&rows, "json")
    };
    run().map_err(|e| e.to_string())
}

/// Convergence report for the alternating family, with the ratio of players 1 and 2.
pub fn eq3_sweep_json(start: usize, end: usize) -> Result<String, String> {
    sweep(Family::Eq3, start, end, &[RatioPair::Players(1, 2)])
}

/// Convergence report for replicas `start..=end` of `base`.
pub fn replica_sweep_json(base: &str, start: usize, end: usize) -> Result<String, String> {
    let rep = parse_game(base).map_err(|e| e.to_string())?;
    sweep(Family::Replica(rep), start, end, &[])
}

#[wasm_bindgen]
pub fn solve(game: &str) -> Result<String, JsError> {
    solve_json(game).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = eq3Sweep)]
pub fn eq3_sweep(start: usize, end: usize) -> Result<String, JsError> {
    eq3_sweep_json(start, end).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = replicaSweep)]
pub fn replica_sweep(base: &str, start: usize, end: usize) -> Result<String, JsError> {
    replica_sweep_json(base, start, end).map_err(|e| JsError::new(&e))
}
