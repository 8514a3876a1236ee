//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use nucleo::coalition::{compare_excess_vectors, ordered_excess_vector};
use nucleo::experiments::eq3_game;
use nucleo::parse::parse_game;
use nucleo::rational::q;
use nucleo::theory::{
    coincidence_condition, gap_report, is_constant_sum, normalized_weights, permits_homogeneous_rep, replica_threshold,
};
use nucleo::{nucleolus, Engine, Error, Rational, Representation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 0x5EED_2024;
const PROPERTY_GAMES: usize = 200;
const PROPERTY_MAX_N: usize = 16;
const IMPUTATIONS_PER_GAME: usize = 100;
const CONSTANT_SUM_GAMES: usize = 300;
const CONSTANT_SUM_MAX_N: usize = 10;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn game(text: &str) -> Representation {
    parse_game(text).expect("valid game")
}

fn solve(rep: &Representation, engine: Engine) -> Result<Vec<Rational>, String> {
    nucleolus(rep, engine).map(|r| r.x_star).map_err(err)
}

fn golden() -> Check {
    let per_game = Duration::from_secs(1);
    let timed = |text: &str, expected: &[Rational], gap: Option<Rational>| -> Result<(), String> {
        let rep = game(text);
        let t = Instant::now();
        let x = solve(&rep, Engine::Auto)?;
        let elapsed = t.elapsed();
        ensure(elapsed < per_game, || format!("{text} took {elapsed:?}"))?;
        ensure(x == expected, || format!("{text}: x* = {x:?}"))?;
        if let Some(gap) = gap {
            let got = gap_report(&rep, &x).map_err(err)?.l1_gap;
            ensure(got == gap, || format!("{text}: gap {got}"))?;
        }
        Ok(())
    };
    let fifths = [q(2, 5), q(1, 5), q(1, 5), q(1, 5)];
    timed("8; 6 4 3 2", &fifths, Some(q(2, 15)))?;
    timed("3; 2 1 1 1", &fifths, Some(Rational::zero()))?;
    for eps in [q(1, 10), q(1, 4), q(2, 5)] {
        let half = (Rational::one() - &eps) / Rational::from_integer(2);
        timed(&format!("1/2; {half} {half} {eps}"), &[q(1, 3), q(1, 3), q(1, 3)], None)?;
    }
    Ok("5 games exact".into())
}

fn eq3_family() -> Check {
    let t = Instant::now();
    for n in 2..=10usize {
        let rep = eq3_game(n).map_err(err)?;
        let x = solve(&rep, Engine::Auto)?;
        let expected: Vec<Rational> = if n % 2 == 0 {
            std::iter::once(Rational::zero()).chain(vec![q(1, n as i64 - 1); n - 1]).collect()
        } else {
            vec![q(1, n as i64); n]
        };
        ensure(x == expected, || format!("n = {n}: x* = {x:?}"))?;
        let ratio = if x[1].is_zero() { None } else { Some(&x[0] / &x[1]) };
        let want = if n % 2 == 0 { Rational::zero() } else { Rational::one() };
        ensure(ratio == Some(want), || format!("n = {n}: ratio {ratio:?}"))?;
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("n = 2..10 in {elapsed:.2?}"))
}

fn sensitivity_triple() -> Check {
    let t = Instant::now();
    for ones in [6usize, 7, 8] {
        let text = format!("58%; 5*4 {ones}*1");
        let rep = game(&text);
        let x = solve(&rep, Engine::Auto)?;
        let expected = if ones == 7 {
            let mut e = vec![q(1, 5); 5];
            e.extend(vec![Rational::zero(); ones]);
            e
        } else {
            normalized_weights(&rep).map_err(err)?
        };
        ensure(x == expected, || format!("{text}: x* = {x:?}"))?;
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("3 games in {elapsed:.2?}"))
}

fn replica_coincidence() -> Check {
    let t = Instant::now();
    let base = game("5; 4 3 2");
    for rho in 2..=6 {
        let rep = base.replicate(rho).map_err(err)?;
        let x = solve(&rep, Engine::Auto)?;
        ensure(x == normalized_weights(&rep).map_err(err)?, || format!("rho = {rho}: x* != w̄"))?;
    }
    let threshold = replica_threshold(&base).map_err(err)?;
    ensure(threshold == 217, || format!("threshold {threshold}"))?;
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("rho = 2..6 coincide, threshold 217, {elapsed:.2?}"))
}

fn flagship() -> Check {
    let t = Instant::now();
    let rep = game("1500; 300*4 300*3 300*2");
    let res = nucleolus(&rep, Engine::Typed).map_err(err)?;
    ensure(res.x_star == normalized_weights(&rep).map_err(err)?, || "x* != w̄".into())?;
    let c = coincidence_condition(&rep).map_err(err)?;
    ensure(c.holds && c.lhs == q(400, 3) && c.rhs == Rational::from_integer(96), || {
        format!("condition {} vs {}", c.lhs, c.rhs)
    })?;
    let h = permits_homogeneous_rep(&rep).map_err(err)?;
    ensure(!h.permits, || "reported homogeneous".into())?;
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("n = 900 in {elapsed:.2?}"))
}

/// Integer weights in `1..=9`, `0 < q̄ < 1`, at most one player winning alone.
fn random_game(rng: &mut ChaCha8Rng, max_n: usize) -> Representation {
    loop {
        let n = rng.gen_range(2..=max_n);
        let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        let quota = rng.gen_range(1..total);
        if weights.iter().filter(|&&w| w >= quota).count() <= 1 {
            return Representation::from_ints(quota, &weights).unwrap();
        }
    }
}

/// Random imputations and small perturbations of `x`, in input order.
fn imputations(rep: &Representation, x: &[Rational], rng: &mut ChaCha8Rng) -> Vec<Vec<Rational>> {
    let n = rep.n();
    let floor: Vec<Rational> = rep
        .input_weights()
        .iter()
        .map(|w| if w >= rep.quota() { Rational::one() } else { Rational::zero() })
        .collect();
    let slack = Rational::one() - floor.iter().sum::<Rational>();
    let donors: Vec<usize> = (0..n).filter(|&i| x[i] > floor[i]).collect();
    let mut out = Vec::with_capacity(IMPUTATIONS_PER_GAME);
    while out.len() < IMPUTATIONS_PER_GAME {
        if out.len() % 2 == 1 && !donors.is_empty() {
            let i = donors[rng.gen_range(0..donors.len())];
            let j = (i + rng.gen_range(1..n)) % n;
            let step = q(1, rng.gen_range(2..=200));
            let room = &x[i] - &floor[i];
            let d = if step < room { step } else { room };
            let mut y = x.to_vec();
            y[i] = &y[i] - &d;
            y[j] = &y[j] + &d;
            out.push(y);
        } else {
            let r: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=20)).collect();
            let sum: i64 = r.iter().sum();
            if sum > 0 {
                out.push(floor.iter().zip(&r).map(|(f, &ri)| f + &(&slack * &q(ri, sum))).collect());
            }
        }
    }
    out
}

fn property_game(rep: &Representation, seed: u64) -> Result<(), String> {
    let label = nucleo::parse::format_game(rep);
    let brute = solve(rep, Engine::Brute)?;
    let typed = solve(rep, Engine::Typed)?;
    ensure(brute == typed, || format!("{label}: engines disagree"))?;
    let x = brute;
    ensure(x.iter().sum::<Rational>() == Rational::one(), || format!("{label}: sum != 1"))?;

    let g = gap_report(rep, &x).map_err(err)?;
    ensure(g.bound_holds, || format!("{label}: gap {} > bound {}", g.l1_gap, g.bound))?;
    let interior = g.w_bar_s_minus.is_positive() && g.w_bar_s_minus < Rational::one();
    ensure(!interior || g.decomposition_holds, || format!("{label}: decomposition fails"))?;

    let weights = rep.input_weights();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            ensure(weights[i] != weights[j] || x[i] == x[j], || format!("{label}: unequal treatment {i}, {j}"))?;
        }
    }
    let scaled = rep.scale(&q(7, 3)).map_err(err)?;
    ensure(solve(&scaled, Engine::Auto)? == x, || format!("{label}: not scale invariant"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let canonical = |y: &[Rational]| rep.from_input_order(y);
    let theta = ordered_excess_vector(rep, &canonical(&x)).map_err(err)?;
    for y in imputations(rep, &x, &mut rng) {
        let other = ordered_excess_vector(rep, &canonical(&y)).map_err(err)?;
        ensure(compare_excess_vectors(&theta, &other) != Ordering::Greater, || {
            format!("{label}: dominated by {y:?}")
        })?;
    }
    Ok(())
}

fn property_suite() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let games: Vec<(Representation, u64)> =
        (0..PROPERTY_GAMES).map(|_| (random_game(&mut rng, PROPERTY_MAX_N), rng.gen())).collect();
    let failures: Vec<String> =
        games.par_iter().filter_map(|(rep, seed)| property_game(rep, *seed).err()).collect();
    let elapsed = t.elapsed();
    if let Some(first) = failures.first() {
        return Err(format!("{} of {PROPERTY_GAMES} games fail; first: {first}", failures.len()));
    }
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("{PROPERTY_GAMES} games, {IMPUTATIONS_PER_GAME} imputations each, {elapsed:.2?}"))
}

fn constant_sum_consistency() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0xC0);
    let mut games = Vec::new();
    while games.len() < CONSTANT_SUM_GAMES {
        let n = rng.gen_range(3..=CONSTANT_SUM_MAX_N);
        let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        if total % 2 == 0 {
            continue;
        }
        let quota = (total + 1) / 2;
        if weights.iter().any(|&w| w >= quota) {
            continue;
        }
        games.push(Representation::from_ints(quota, &weights).unwrap());
    }
    let results: Vec<Result<bool, String>> = games
        .par_iter()
        .map(|rep| {
            let label = nucleo::parse::format_game(rep);
            ensure(is_constant_sum(rep).map_err(err)?, || format!("{label}: not constant-sum"))?;
            let h = permits_homogeneous_rep(rep).map_err(err)?;
            let Some(witness) = h.witness else { return Ok(false) };
            let x = solve(rep, Engine::Auto)?;
            let expected = normalized_weights(&witness).map_err(err)?;
            ensure(x == expected, || format!("{label}: x* {x:?} != witness {expected:?}"))?;
            Ok(true)
        })
        .collect();
    let mut checked = 0;
    for r in results {
        checked += usize::from(r?);
    }
    ensure(checked > 0, || "no homogeneous constant-sum games generated".into())?;
    Ok(format!("{checked} of {CONSTANT_SUM_GAMES} constant-sum games homogeneous, all match, {:.2?}", t.elapsed()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("golden values", golden),
        ("alternating family", eq3_family),
        ("sensitivity triple", sensitivity_triple),
        ("replica coincidence", replica_coincidence),
        ("900-player flagship", flagship),
        ("property suite", property_suite),
        ("homogeneous constant-sum consistency", constant_sum_consistency),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
