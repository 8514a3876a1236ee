//! Seeded random cross-checks of the two engines and the distance bound.

use nucleo::nucleolus::nucleolus_with;
use nucleo::theory::gap_report;
use nucleo::{Engine, Error, Rational, Representation, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Failure;

/// Integer weights in `1..=9` with at most four distinct values, `0 < q̄ < 1`,
/// and at most one player able to win alone.
pub fn random_game(rng: &mut impl Rng, max_n: usize) -> Representation {
    loop {
        let n = rng.gen_range(2..=max_n.max(2));
        let t = rng.gen_range(1..=4.min(n));
        let palette: Vec<i64> = (0..t).map(|_| rng.gen_range(1..=9)).collect();
        let weights: Vec<i64> = (0..n).map(|_| palette[rng.gen_range(0..t)]).collect();
        let total: i64 = weights.iter().sum();
        if total < 2 {
            continue;
        }
        let quota = rng.gen_range(1..total);
        if weights.iter().filter(|&&w| w >= quota).count() > 1 {
            continue;
        }
        return Representation::from_ints(quota, &weights).expect("generated games are valid");
    }
}

pub fn run(seed: u64, games: usize, max_n: usize, options: &SolverOptions) -> Result<u8, Failure> {
    if max_n > options.max_brute_n {
        return Err(Error::EnumerationLimit { n: max_n, limit: options.max_brute_n }.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for k in 0..games {
        let rep = random_game(&mut rng, max_n);
        let brute = nucleolus_with(&rep, Engine::Brute, options)?.x_star;
        let typed = nucleolus_with(&rep, Engine::Typed, options)?.x_star;
        let input = rep.input_weights();
        let equal_treatment = (0..rep.n())
            .all(|i| (0..rep.n()).all(|j| input[i] != input[j] || brute[i] == brute[j]));
        let gap = gap_report(&rep, &brute)?;
        let sum: Rational = brute.iter().sum();
        let mut problems = Vec::new();
        if brute != typed {
            problems.push("engines disagree");
        }
        if !equal_treatment {
            problems.push("equal treatment violated");
        }
        if !gap.bound_holds {
            problems.push("distance bound violated");
        }
        if !gap.decomposition_holds {
            problems.push("gap decomposition violated");
        }
        if !sum.is_one() {
            problems.push("payoffs do not sum to 1");
        }
        if !problems.is_empty() {
            failures.push(format!("game {k} {rep}: {}", problems.join(", ")));
        }
    }
    if failures.is_empty() {
        println!("verified {games} games (seed {seed}): all checks passed");
        Ok(0)
    } else {
        for f in &failures {
            println!("FAIL {f}");
        }
        println!("{} of {games} games failed (seed {seed})", failures.len());
        Ok(1)
    }
}
