//! Distance bounds, the weight–nucleolus coincidence condition and structural
//! classifiers of weighted majority games.
//!
//! Player indices are 0-based input positions; serialized reports use 1-based
//! player numbers.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::coalition::{
    maximal_losing_profiles, minimal_winning_profiles, winning_table, DEFAULT_ENUMERATION_LIMIT, MAX_TABLE_WEIGHT,
};
use crate::error::{Error, Result};
use crate::game::Representation;
use crate::lp::{ExactLinearProgram, LpStatus, Relation, Sense};
use crate::rational::Rational;
use crate::span::Span;

/// Player cap for the explicit swap test.
pub const INTERCHANGE_LIMIT: usize = 16;
/// Player cap for re-verifying a homogeneous witness on every coalition.
pub const WITNESS_CHECK_LIMIT: usize = 16;

fn players<S: Serializer>(v: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|i| i + 1))
}

/// `w̄` in input order.
pub fn normalized_weights(rep: &Representation) -> Result<Vec<Rational>> {
    Ok(rep.to_input_order(&rep.normalize()?.weights))
}

/// `‖x − y‖₁`.
pub fn l1_distance(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

/// `2w̄₁ / min{q̄, 1 − q̄}`; requires `0 < q̄ < 1`.
pub fn lemma_bound(rep: &Representation) -> Result<Rational> {
    let norm = rep.normalize()?;
    if !norm.has_interior_quota() {
        return Err(Error::DegenerateQuota);
    }
    Ok(Rational::from_integer(2) * &norm.weights[0] / norm.quota_margin())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub l1_gap: Rational,
    pub bound: Rational,
    pub bound_holds: bool,
    #[serde(serialize_with = "players")]
    pub s_plus: Vec<usize>,
    #[serde(serialize_with = "players")]
    pub s_minus: Vec<usize>,
    /// `w̄(S⁻)`
    pub w_bar_s_minus: Rational,
    /// `x*(S⁻) = (1 − δ)·w̄(S⁻)`
    pub delta: Rational,
    /// `‖x* − w̄‖₁ = 2δ·w̄(S⁻)`
    pub decomposition_holds: bool,
}

/// Compares a nucleolus `x_star` (input order) with the normalized weights.
pub fn gap_report(rep: &Representation, x_star: &[Rational]) -> Result<GapReport> {
    if x_star.len() != rep.n() {
        return Err(Error::DimensionMismatch { expected: rep.n(), found: x_star.len() });
    }
    let bound = lemma_bound(rep)?;
    let w = normalized_weights(rep)?;
    let l1_gap = l1_distance(x_star, &w);
    let (s_plus, s_minus): (Vec<usize>, Vec<usize>) = (0..rep.n()).partition(|&i| x_star[i] > w[i]);
    let w_minus: Rational = s_minus.iter().map(|&i| &w[i]).sum();
    let x_minus: Rational = s_minus.iter().map(|&i| &x_star[i]).sum();
    if !w_minus.is_positive() {
        return Err(Error::Internal("w̄(S⁻) = 0 for a payoff vector summing to 1".into()));
    }
    let delta = Rational::one() - &x_minus / &w_minus;
    let decomposition_holds = l1_gap == Rational::from_integer(2) * &delta * &w_minus;
    Ok(GapReport {
        bound_holds: l1_gap <= bound,
        l1_gap,
        bound,
        s_plus,
        s_minus,
        w_bar_s_minus: w_minus,
        delta,
        decomposition_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoincidenceReport {
    /// `min{q̄, 1 − q̄}·m°`
    pub lhs: Rational,
    /// `2t·w₁²`
    pub rhs: Rational,
    pub holds: bool,
    /// Smallest `ρ` with `lhs·ρ > rhs`.
    pub replica_threshold: u64,
    pub t: usize,
    pub m_circ: usize,
    pub w1: Rational,
}

/// `min{q̄, 1 − q̄}·m° > 2t·w₁²` for an integer representation.
pub fn coincidence_condition(rep: &Representation) -> Result<CoincidenceReport> {
    if !rep.has_integer_weights() {
        return Err(Error::NonIntegerWeights);
    }
    let norm = rep.normalize()?;
    if !norm.has_interior_quota() {
        return Err(Error::DegenerateQuota);
    }
    let table = rep.weight_types();
    let (t, m_circ) = (table.t(), table.m_circ());
    let w1 = rep.max_weight().clone();
    let lhs = norm.quota_margin() * Rational::from_integer(m_circ as i64);
    let rhs = Rational::from_integer(2 * t as i64) * &w1 * &w1;
    let threshold: BigInt = (&rhs / &lhs).floor() + BigInt::one();
    let replica_threshold = threshold.to_u64().ok_or(Error::WeightTooLarge(threshold.to_string()))?;
    Ok(CoincidenceReport { holds: lhs > rhs, lhs, rhs, replica_threshold, t, m_circ, w1 })
}

/// The guaranteed coincidence threshold `ρ̃`; replication scales `m°` only.
pub fn replica_threshold(rep: &Representation) -> Result<u64> {
    Ok(coincidence_condition(rep)?.replica_threshold)
}

/// `v(S) + v(N∖S) = 1` for every `S`.
pub fn is_constant_sum(rep: &Representation) -> Result<bool> {
    let n = rep.n();
    if n <= DEFAULT_ENUMERATION_LIMIT {
        let win = winning_table(rep);
        let full = win.len() - 1;
        return Ok((0..win.len()).all(|s| win[s] != win[full ^ s]));
    }
    // subset sums with bounded multiplicities
    let int = rep.to_integer();
    let table = int.weight_types();
    let total = int.total_weight();
    let big = || Error::WeightTooLarge(total.to_string());
    let w_total = total.numer().to_u64().filter(|&w| w <= MAX_TABLE_WEIGHT).ok_or_else(big)? as usize;
    let mut reach = vec![false; w_total + 1];
    reach[0] = true;
    for e in &table.entries {
        let w = e.weight.numer().to_usize().ok_or_else(big)?;
        if w == 0 {
            continue;
        }
        // used[s]: copies of this weight needed to reach s, if reachable
        let mut used = vec![usize::MAX; w_total + 1];
        for s in 0..=w_total {
            if reach[s] {
                used[s] = 0;
            } else if s >= w && used[s - w] < e.count {
                used[s] = used[s - w] + 1;
                reach[s] = true;
            }
        }
    }
    let q = int.quota();
    Ok((0..=w_total).filter(|&s| reach[s]).all(|s| {
        let own = &Rational::from_integer(s as i64) >= q;
        let other = &Rational::from_integer((w_total - s) as i64) >= q;
        own != other
    }))
}

/// Whether every minimal winning coalition weighs exactly `q`.
pub fn is_homogeneous_rep(rep: &Representation) -> bool {
    minimal_winning_profiles(rep).iter().all(|p| &p.weight == rep.quota())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomogeneityReport {
    pub permits: bool,
    /// Integer homogeneous representation of the same game, in input order.
    pub witness: Option<Representation>,
}

/// Decides whether the game has a homogeneous representation.
///
/// Variables `(w'_1, …, w'_t, q')` per weight type: `w'(S) = q'` on minimal
/// winning profiles, `w'(L) <= q' − 1` on maximal losing profiles, `w' >= 0`,
/// `q' >= 1`, minimizing `q'`. Null types get weight 0.
pub fn permits_homogeneous_rep(rep: &Representation) -> Result<HomogeneityReport> {
    let table = rep.weight_types();
    let t = table.t();
    let mwc = minimal_winning_profiles(rep);
    let losing = maximal_losing_profiles(rep);
    let as_row = |counts: &[usize]| -> Vec<Rational> {
        counts.iter().map(|&c| Rational::from_integer(c as i64)).chain([-Rational::one()]).collect()
    };
    let mut basis = Span::new(t + 1);
    let mut equalities = Vec::new();
    for p in &mwc {
        let row = as_row(&p.counts);
        if basis.insert(&row) {
            equalities.push(row);
        }
    }
    let null: Vec<bool> = (0..t).map(|k| mwc.iter().all(|p| p.counts[k] == 0)).collect();
    let mut active: Vec<usize> = Vec::new();
    let solution = loop {
        let mut lp = ExactLinearProgram::new(t + 1);
        let mut obj = vec![Rational::zero(); t + 1];
        obj[t] = Rational::one();
        lp.set_objective(Sense::Minimize, obj);
        for row in &equalities {
            lp.add_constraint(row.clone(), Relation::Eq, Rational::zero());
        }
        for &l in &active {
            lp.add_constraint(as_row(&losing[l].counts), Relation::Le, -Rational::one());
        }
        for (k, &is_null) in null.iter().enumerate() {
            let upper = if is_null { Some(Rational::zero()) } else { None };
            lp.set_bounds(k, Some(Rational::zero()), upper);
        }
        lp.set_bounds(t, Some(Rational::one()), None);
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => break None,
            LpStatus::Unbounded => return Err(Error::Internal("homogeneity LP is unbounded".into())),
        }
        let (w, q) = (&sol.values[..t], &sol.values[t]);
        let limit = q - &Rational::one();
        let mut violated: Vec<(Rational, usize)> = losing
            .iter()
            .enumerate()
            .filter(|(l, _)| !active.contains(l))
            .map(|(l, p)| {
                let weight: Rational = p.counts.iter().zip(w).map(|(&c, wk)| wk * &Rational::from_integer(c as i64)).sum();
                (weight - &limit, l)
            })
            .filter(|(over, _)| over.is_positive())
            .collect();
        if violated.is_empty() {
            break Some(sol.values);
        }
        violated.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        active.extend(violated.iter().take((t + 1).max(4)).map(|(_, l)| *l));
    };
    let Some(values) = solution else {
        return Ok(HomogeneityReport { permits: false, witness: None });
    };
    let per_player: Vec<Rational> = table.player_types().iter().map(|&k| values[k].clone()).collect();
    let witness = Representation::new(values[t].clone(), rep.to_input_order(&per_player))?.to_integer();
    if rep.n() <= WITNESS_CHECK_LIMIT {
        let same = winning_table(rep) == winning_table(&Representation::new(values[t].clone(), per_player)?);
        if !same {
            return Err(Error::Internal("homogeneous witness induces a different game".into()));
        }
    }
    Ok(HomogeneityReport { permits: true, witness: Some(witness) })
}

/// Players in no minimal winning coalition.
pub fn null_players(rep: &Representation) -> Vec<usize> {
    let table = rep.weight_types();
    let mwc = minimal_winning_profiles(rep);
    let types = table.player_types();
    let mut out: Vec<usize> = (0..rep.n())
        .filter(|&i| mwc.iter().all(|p| p.counts[types[i]] == 0))
        .map(|i| rep.original_index(i))
        .collect();
    out.sort_unstable();
    out
}

/// Pairs `(i, j)`, `i < j`, whose swap preserves `v`.
pub fn interchangeable_pairs(rep: &Representation) -> Result<Vec<(usize, usize)>> {
    let n = rep.n();
    if n > INTERCHANGE_LIMIT {
        return Err(Error::EnumerationLimit { n, limit: INTERCHANGE_LIMIT });
    }
    let win = winning_table(rep);
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (ba, bb) = (1usize << a, 1usize << b);
            let swap_ok = rep.weights()[a] == rep.weights()[b]
                || (0..win.len()).filter(|s| s & ba != 0 && s & bb == 0).all(|s| win[s] == win[s ^ ba ^ bb]);
            if swap_ok {
                let (i, j) = (rep.original_index(a), rep.original_index(b));
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub weight: Rational,
    /// `m_ω·ω / w(N)` per game.
    pub values: Vec<Rational>,
    pub running_min: Vec<Rational>,
    /// Finite-prefix evidence only: the running minimum at the end is at
    /// least three quarters of its value at the midpoint.
    pub appears_bounded: bool,
}

pub fn regularity_statistic(seq: &[Representation], weight: &Rational) -> Result<RegularityReport> {
    if seq.is_empty() {
        return Err(Error::InvalidSequence("empty sequence".into()));
    }
    let mut values = Vec::with_capacity(seq.len());
    for rep in seq {
        let m = rep.weight_types().multiplicity(weight);
        if m == 0 {
            return Err(Error::WeightAbsent(weight.to_string()));
        }
        values.push(Rational::from_integer(m as i64) * weight / rep.total_weight());
    }
    let mut running_min: Vec<Rational> = Vec::with_capacity(values.len());
    for v in &values {
        let next = match running_min.last() {
            Some(m) if m < v => m.clone(),
            _ => v.clone(),
        };
        running_min.push(next);
    }
    let mid = &running_min[(running_min.len() - 1) / 2];
    let last = running_min.last().unwrap();
    let appears_bounded = last.is_positive() && last * &Rational::from_integer(4) >= mid * &Rational::from_integer(3);
    Ok(RegularityReport { weight: weight.clone(), values, running_min, appears_bounded })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_game;
    use crate::rational::q;

    fn game(s: &str) -> Representation {
        parse_game(s).unwrap()
    }

    fn x4() -> Vec<Rational> {
        vec![q(2, 5), q(1, 5), q(1, 5), q(1, 5)]
    }

    #[test]
    fn gap_of_the_four_player_games() {
        let g = gap_report(&game("8; 6 4 3 2"), &x4()).unwrap();
        assert_eq!(g.l1_gap, q(2, 15));
        assert_eq!(g.bound, q(12, 7));
        assert!(g.bound_holds && g.decomposition_holds);
        let g = gap_report(&game("3; 2 1 1 1"), &x4()).unwrap();
        assert_eq!(g.l1_gap, q(0, 1));
        assert!(g.decomposition_holds);
    }

    #[test]
    fn gap_of_luxembourg() {
        let g = gap_report(&game("1/2; 9/20 9/20 1/10"), &[q(1, 3), q(1, 3), q(1, 3)]).unwrap();
        assert_eq!(g.l1_gap, q(7, 15));
        assert_eq!(g.bound, q(9, 5));
        assert_eq!(g.s_plus, vec![2]);
        assert_eq!(g.delta, q(7, 27));
        assert!(g.decomposition_holds);
    }

    #[test]
    fn gap_errors() {
        assert_eq!(gap_report(&game("2; 1 1"), &[q(1, 2), q(1, 2)]), Err(Error::DegenerateQuota));
        assert!(matches!(gap_report(&game("1; 1 1"), &[q(1, 1)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn coincidence_reports() {
        let c = coincidence_condition(&game("1500; 300*4 300*3 300*2")).unwrap();
        assert_eq!((c.lhs.clone(), c.rhs.clone(), c.holds), (q(400, 3), q(96, 1), true));
        assert_eq!(c.replica_threshold, 1);
        let c = coincidence_condition(&game("3; 2 1 1 1")).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (q(2, 5), q(16, 1), false));
        assert_eq!(replica_threshold(&game("5; 4 3 2")).unwrap(), 217);
        assert_eq!(coincidence_condition(&game("1/2; 9/20 9/20 1/10")), Err(Error::NonIntegerWeights));
    }

    #[test]
    fn simple_majority_with_three_types_needs_m_above_192() {
        // equal counts m of weights 4, 3, 2 with q̄ = 1/2
        for m in [1usize, 192, 193, 400] {
            let rep = parse_game(&format!("{}/2; {m}*4 {m}*3 {m}*2", 9 * m)).unwrap();
            let c = coincidence_condition(&rep).unwrap();
            assert_eq!(c.rhs, q(96, 1));
            assert_eq!(c.holds, m > 192, "m = {m}");
        }
    }

    #[test]
    fn constant_sum_classification() {
        assert!(is_constant_sum(&game("3; 2 1 1 1")).unwrap());
        assert!(is_constant_sum(&game("8; 6 4 3 2")).unwrap());
        assert!(!is_constant_sum(&game("2; 1 1")).unwrap());
        // odd total weight with a strict-majority quota, beyond the explicit cap
        assert!(is_constant_sum(&game("26; 10*3 10*2 1*1")).unwrap());
        assert!(!is_constant_sum(&game("27; 10*3 10*2 1*1")).unwrap());
    }

    /// Replicas beyond the explicit cap take the subset-sum path; compare with
    /// a direct scan over all profiles.
    #[test]
    fn constant_sum_paths_agree() {
        for (quota, weights) in [(3, [2, 1, 1, 1]), (5, [3, 3, 2, 1]), (4, [2, 2, 2, 1]), (7, [5, 4, 3, 1])] {
            let big = Representation::from_ints(quota, &weights).unwrap().replicate(7).unwrap();
            assert!(big.n() > DEFAULT_ENUMERATION_LIMIT);
            let table = big.weight_types();
            let mut expected = true;
            let mut counts = vec![0usize; table.t()];
            'walk: loop {
                let w: Rational =
                    counts.iter().zip(&table.entries).map(|(&c, e)| &e.weight * &Rational::from_integer(c as i64)).sum();
                let rest = big.total_weight() - &w;
                expected &= (&w >= big.quota()) != (&rest >= big.quota());
                for (c, e) in counts.iter_mut().zip(&table.entries) {
                    if *c < e.count {
                        *c += 1;
                        continue 'walk;
                    }
                    *c = 0;
                }
                break;
            }
            assert_eq!(is_constant_sum(&big).unwrap(), expected, "{big}");
        }
    }

    #[test]
    fn homogeneity() {
        assert!(is_homogeneous_rep(&game("3; 2 1 1 1")));
        assert!(!is_homogeneous_rep(&game("8; 6 4 3 2")));
        assert!(!is_homogeneous_rep(&game("1500; 300*4 300*3 300*2")));
        let h = permits_homogeneous_rep(&game("8; 6 4 3 2")).unwrap();
        assert!(h.permits);
        assert_eq!(h.witness.unwrap(), game("3; 2 1 1 1"));
        let h = permits_homogeneous_rep(&game("1; 1")).unwrap();
        assert!(h.permits);
        let h = permits_homogeneous_rep(&game("1500; 300*4 300*3 300*2")).unwrap();
        assert_eq!(h, HomogeneityReport { permits: false, witness: None });
    }

    #[test]
    fn homogeneous_witness_zeroes_null_players() {
        let h = permits_homogeneous_rep(&game("7/2; 1 2 2 2")).unwrap();
        let w = h.witness.unwrap();
        assert_eq!(w.input_weights()[0], q(0, 1));
        assert!(is_homogeneous_rep(&w));
    }

    #[test]
    fn null_player_sets() {
        assert_eq!(null_players(&game("7/2; 1 2 2 2")), vec![0]);
        assert!(null_players(&game("8; 6 4 3 2")).is_empty());
        assert_eq!(null_players(&game("1; 1 0")), vec![1]);
        assert_eq!(null_players(&game("1; 0 1")), vec![0]);
    }

    #[test]
    fn null_players_match_swing_check() {
        for g in ["7/2; 1 2 2 2", "9; 5 4 3 1 1", "58%; 5*4 7*1", "10; 7 2 2 1"] {
            let rep = game(g);
            let win = winning_table(&rep);
            let swing: Vec<usize> = (0..rep.n())
                .filter(|&i| (0..win.len()).all(|s| s & (1 << i) == 0 || win[s] == win[s ^ (1 << i)]))
                .map(|i| rep.original_index(i))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            assert_eq!(null_players(&rep), swing, "{g}");
        }
    }

    #[test]
    fn interchangeable() {
        assert_eq!(interchangeable_pairs(&game("3; 2 1 1 1")).unwrap(), vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(interchangeable_pairs(&game("5/2; 1 2 2")).unwrap(), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(interchangeable_pairs(&game("1; 1 0")).unwrap().is_empty());
        assert!(matches!(interchangeable_pairs(&game("9; 17*1")), Err(Error::EnumerationLimit { .. })));
    }

    fn eq3(n: usize) -> Representation {
        parse_game(&format!("{}/2; 1 {}*2", 2 * n - 1, n - 1)).unwrap()
    }

    #[test]
    fn regularity_of_eq3_family() {
        let seq: Vec<Representation> = (3..=12).map(eq3).collect();
        let r = regularity_statistic(&seq, &q(2, 1)).unwrap();
        for (n, v) in (3..=12).zip(&r.values) {
            assert_eq!(v, &q(2 * (n - 1), 2 * n - 1));
        }
        assert_eq!(r.running_min.last().unwrap(), &q(4, 5));
        assert!(r.appears_bounded);
        let r = regularity_statistic(&seq, &q(1, 1)).unwrap();
        for (n, v) in (3..=12).zip(&r.values) {
            assert_eq!(v, &q(1, 2 * n - 1));
        }
        assert!(!r.appears_bounded);
        assert_eq!(regularity_statistic(&seq, &q(3, 1)), Err(Error::WeightAbsent("3".into())));
    }

    #[test]
    fn regularity_of_replicas() {
        let base = game("5; 4 3 2");
        let seq: Vec<Representation> = (1..=6).map(|r| base.replicate(r).unwrap()).collect();
        let r = regularity_statistic(&seq, &q(4, 1)).unwrap();
        assert!(r.values.iter().all(|v| v == &q(4, 9)));
        assert!(r.appears_bounded);
    }
}
