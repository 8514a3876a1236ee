//! Coalitions, excesses and the maximum-excess separation oracle.
//!
//! Coalitions are handled either explicitly (bitsets, small games) or as
//! *profiles*: per-group member counts, where a group is a set of players
//! sharing a weight and a payoff. Profile search runs over integer weights.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{Coalition, Representation, WeightTypeTable};
use crate::rational::{common_denominator, Rational};

/// Default cap on the number of players for explicit `2^n` enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Largest integer total weight the weight-indexed tables accept.
pub const MAX_TABLE_WEIGHT: u64 = 20_000_000;

/// A coalition given by how many members of each weight type it contains.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ProfileCoalition {
    pub counts: Vec<usize>,
    pub weight: Rational,
    /// Number of explicit coalitions with this profile, `Π C(n_k, counts_k)`.
    pub multiplicity: BigUint,
}

impl ProfileCoalition {
    pub fn new(table: &WeightTypeTable, counts: Vec<usize>) -> Self {
        assert_eq!(counts.len(), table.t());
        let mut weight = Rational::zero();
        let mut multiplicity = BigUint::one();
        for (e, &c) in table.entries.iter().zip(&counts) {
            assert!(c <= e.count, "profile count {c} exceeds type size {}", e.count);
            weight += &e.weight * &Rational::from_integer(c as i64);
            multiplicity *= num_integer::binomial(BigUint::from(e.count), BigUint::from(c));
        }
        ProfileCoalition { counts, weight, multiplicity }
    }

    /// All explicit coalitions (canonical indices) with this profile.
    pub fn expand(&self, table: &WeightTypeTable) -> Vec<Coalition> {
        let mut out = vec![Coalition::EMPTY];
        for ((e, &c), start) in table.entries.iter().zip(&self.counts).zip(table.offsets()) {
            let mut choices = Vec::new();
            for bits in 0u64..1 << e.count {
                if bits.count_ones() as usize == c {
                    choices.push(bits << start);
                }
            }
            out = out.iter().flat_map(|s| choices.iter().map(move |b| Coalition(s.0 | b))).collect();
        }
        out
    }
}

/// Either kind of coalition.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum CoalitionRef {
    Explicit(Coalition),
    Profile(Vec<usize>),
}

impl Serialize for CoalitionRef {
    /// Explicit coalitions as 1-based player lists, profiles as count lists.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(1))?;
        match self {
            CoalitionRef::Explicit(c) => {
                let members: Vec<usize> = c.members().map(|i| i + 1).collect();
                map.serialize_entry("players", &members)?;
            }
            CoalitionRef::Profile(counts) => map.serialize_entry("profile", counts)?,
        }
        map.end()
    }
}

impl fmt::Display for CoalitionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoalitionRef::Explicit(c) => write!(f, "{c:?}"),
            CoalitionRef::Profile(counts) => {
                let parts: Vec<String> = counts.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ExcessRecord {
    pub coalition: CoalitionRef,
    pub excess: Rational,
}

fn check_len(rep: &Representation, x: &[Rational]) -> Result<()> {
    if x.len() != rep.n() {
        return Err(Error::DimensionMismatch { expected: rep.n(), found: x.len() });
    }
    Ok(())
}

/// `e(S, x) = v(S) − x(S)`.
pub fn excess(rep: &Representation, s: Coalition, x: &[Rational]) -> Result<Rational> {
    check_len(rep, x)?;
    let paid: Rational = s.members().take_while(|&i| i < rep.n()).map(|i| &x[i]).sum();
    Ok(rep.value(s) - paid)
}

/// Excesses of all `2^n` coalitions, weakly decreasing; ties by bitmask.
pub fn ordered_excess_vector(rep: &Representation, x: &[Rational]) -> Result<Vec<ExcessRecord>> {
    ordered_excess_vector_with_limit(rep, x, DEFAULT_ENUMERATION_LIMIT)
}

pub fn ordered_excess_vector_with_limit(
    rep: &Representation,
    x: &[Rational],
    limit: usize,
) -> Result<Vec<ExcessRecord>> {
    check_len(rep, x)?;
    let n = rep.n();
    if n > limit || n > 30 {
        return Err(Error::TooManyPlayers { n, limit });
    }
    let mut sums: Vec<Rational> = Vec::with_capacity(1 << n);
    let mut weights: Vec<Rational> = Vec::with_capacity(1 << n);
    sums.push(Rational::zero());
    weights.push(Rational::zero());
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        sums.push(&sums[rest] + &x[low]);
        weights.push(&weights[rest] + &rep.weights()[low]);
    }
    let quota = rep.quota();
    let mut out: Vec<ExcessRecord> = (0..1usize << n)
        .map(|mask| {
            let v = if &weights[mask] >= quota { Rational::one() } else { Rational::zero() };
            ExcessRecord { coalition: CoalitionRef::Explicit(Coalition(mask as u64)), excess: v - &sums[mask] }
        })
        .collect();
    // stable sort keeps ascending masks within ties
    out.sort_by(|a, b| b.excess.cmp(&a.excess));
    Ok(out)
}

/// Lexicographic comparison of two weakly decreasing excess sequences.
pub fn compare_excess_vectors(a: &[ExcessRecord], b: &[ExcessRecord]) -> Ordering {
    a.iter().map(|r| &r.excess).cmp(b.iter().map(|r| &r.excess))
}

/// Inclusion-minimal winning coalitions, ascending by bitmask.
pub fn minimal_winning_coalitions(rep: &Representation) -> Result<Vec<Coalition>> {
    explicit_scan(rep, |rep, s| {
        rep.is_winning(s) && s.members().all(|i| !rep.is_winning(s.without(i)))
    })
}

/// Inclusion-maximal losing coalitions, ascending by bitmask.
pub fn maximal_losing_coalitions(rep: &Representation) -> Result<Vec<Coalition>> {
    let n = rep.n();
    explicit_scan(rep, |rep, s| {
        !rep.is_winning(s) && s.complement(n).members().all(|i| rep.is_winning(s.with(i)))
    })
}

fn explicit_scan(rep: &Representation, keep: impl Fn(&Representation, Coalition) -> bool) -> Result<Vec<Coalition>> {
    let n = rep.n();
    if n > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::TooManyPlayers { n, limit: DEFAULT_ENUMERATION_LIMIT });
    }
    Ok((0..1u64 << n).map(Coalition).filter(|&s| keep(rep, s)).collect())
}

/// `v(S)` for every bitmask `S < 2^n`.
pub(crate) fn winning_table(rep: &Representation) -> Vec<bool> {
    let n = rep.n();
    let size = 1usize << n;
    let mut win = vec![false; size];
    let int = rep.to_integer();
    let small = int.integer_weights().filter(|w| w.iter().map(|&a| a as u128).sum::<u128>() < 1 << 63);
    match (small, int.integer_quota().to_u64()) {
        (Some(w), Some(q)) => {
            let mut sums = vec![0u64; size];
            for s in 1..size {
                sums[s] = sums[s & (s - 1)] + w[s.trailing_zeros() as usize];
                win[s] = sums[s] >= q;
            }
        }
        _ => {
            for (s, slot) in win.iter_mut().enumerate() {
                *slot = rep.is_winning(Coalition(s as u64));
            }
        }
    }
    win
}

/// Minimal winning coalitions as weight-type profiles.
pub fn minimal_winning_profiles(rep: &Representation) -> Vec<ProfileCoalition> {
    ProfileWalk::new(rep, true).run()
}

/// Maximal losing coalitions as weight-type profiles.
pub fn maximal_losing_profiles(rep: &Representation) -> Vec<ProfileCoalition> {
    ProfileWalk::new(rep, false).run()
}

/// Depth-first enumeration of minimal winning or maximal losing profiles.
///
/// Both kinds have total weight in `[q − w_1, q + w_1)`, which bounds the
/// count range tried at each level.
struct ProfileWalk {
    table: WeightTypeTable,
    quota: Rational,
    /// `suffix[k]`: total weight of all players of types `k..`.
    suffix: Vec<Rational>,
    /// `binom[k][c] = C(n_k, c)`
    binom: Vec<Vec<BigUint>>,
    minimal_winning: bool,
    counts: Vec<usize>,
    out: Vec<ProfileCoalition>,
}

impl ProfileWalk {
    fn new(rep: &Representation, minimal_winning: bool) -> Self {
        let table = rep.weight_types();
        let t = table.t();
        let mut suffix = vec![Rational::zero(); t + 1];
        for k in (0..t).rev() {
            let e = &table.entries[k];
            suffix[k] = &suffix[k + 1] + &(&e.weight * &Rational::from_integer(e.count as i64));
        }
        let binom = table
            .entries
            .iter()
            .map(|e| {
                let mut row = vec![BigUint::one()];
                for c in 0..e.count {
                    let next = row[c].clone() * BigUint::from(e.count - c) / BigUint::from(c + 1);
                    row.push(next);
                }
                row
            })
            .collect();
        ProfileWalk {
            quota: rep.quota().clone(),
            suffix,
            binom,
            minimal_winning,
            counts: vec![0; t],
            out: Vec::new(),
            table,
        }
    }

    fn run(mut self) -> Vec<ProfileCoalition> {
        let floor = &self.quota - &self.table.entries[0].weight;
        self.walk(0, Rational::zero(), &floor);
        self.out
    }

    fn emit(&mut self, weight: Rational) {
        let mut multiplicity = BigUint::one();
        for (k, &c) in self.counts.iter().enumerate() {
            multiplicity *= &self.binom[k][c];
        }
        self.out.push(ProfileCoalition { counts: self.counts.clone(), weight, multiplicity });
    }

    fn walk(&mut self, k: usize, weight: Rational, floor: &Rational) {
        let t = self.table.t();
        if k == t {
            let entries = &self.table.entries;
            let counts = &self.counts;
            let keep = if self.minimal_winning {
                // removing one of the lightest present members must lose
                (0..t).rev().find(|&j| counts[j] > 0).is_some_and(|j| {
                    weight >= self.quota && &weight - &entries[j].weight < self.quota
                })
            } else {
                // adding one of the lightest absent players must win
                (0..t).rev().find(|&j| counts[j] < entries[j].count).is_some_and(|j| {
                    weight < self.quota && &weight + &entries[j].weight >= self.quota
                })
            };
            if keep {
                self.emit(weight);
            }
            return;
        }
        if self.minimal_winning && weight >= self.quota {
            // lighter members added later would be removable
            self.walk(t, weight, floor);
            return;
        }
        let w = self.table.entries[k].weight.clone();
        let target = if self.minimal_winning { self.quota.clone() } else { floor.clone() };
        let shortfall = &target - &weight - &self.suffix[k + 1];
        let first = if shortfall.is_positive() && w.is_positive() {
            (&shortfall / &w).ceil().to_usize().unwrap_or(usize::MAX)
        } else {
            0
        };
        let n_k = self.table.entries[k].count;
        if first > n_k {
            return;
        }
        let mut acc = &weight + &(&w * &Rational::from_integer(first as i64));
        for c in first..=n_k {
            if c > 0 && self.minimal_winning && &acc - &w >= self.quota {
                break;
            }
            if !self.minimal_winning && acc >= self.quota {
                break;
            }
            self.counts[k] = c;
            self.walk(k + 1, acc.clone(), floor);
            acc += &w;
        }
        self.counts[k] = 0;
    }
}

/// Integer costs for the profile search.
pub(crate) trait CostInt: Clone + Ord + Zero + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn times(&self, k: usize) -> Self;
}

impl CostInt for i128 {
    fn times(&self, k: usize) -> Self {
        self * k as i128
    }
}

impl CostInt for BigInt {
    fn times(&self, k: usize) -> Self {
        self * BigInt::from(k)
    }
}

/// Players partitioned into groups of equal integer weight and equal payoff.
#[derive(Clone, Debug)]
pub(crate) struct Groups {
    pub weights: Vec<u64>,
    pub counts: Vec<usize>,
    /// Smallest winning integer total weight.
    pub quota: u64,
}

impl Groups {
    pub fn from_types(rep: &Representation) -> Result<Self> {
        let table = rep.weight_types();
        let weights: Vec<u64> = table
            .entries
            .iter()
            .map(|e| if e.weight.is_integer() { e.weight.numer().to_u64() } else { None })
            .collect::<Option<_>>()
            .ok_or(Error::NonIntegerWeights)?;
        Self::build(weights, table.counts(), rep)
    }

    pub fn from_players(rep: &Representation) -> Result<Self> {
        let weights = rep.integer_weights().ok_or(Error::NonIntegerWeights)?;
        let n = weights.len();
        Self::build(weights, vec![1; n], rep)
    }

    fn build(weights: Vec<u64>, counts: Vec<usize>, rep: &Representation) -> Result<Self> {
        let total: u128 = weights.iter().zip(&counts).map(|(&w, &c)| w as u128 * c as u128).sum();
        if total > MAX_TABLE_WEIGHT as u128 {
            return Err(Error::WeightTooLarge(total.to_string()));
        }
        let quota = rep.integer_quota().to_u64().ok_or(Error::WeightTooLarge(rep.quota().to_string()))?;
        Ok(Groups { weights, counts, quota })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn profile_weight(&self, counts: &[usize]) -> u64 {
        counts.iter().zip(&self.weights).map(|(&c, &w)| c as u64 * w).sum()
    }

    pub fn is_winning(&self, counts: &[usize]) -> bool {
        self.profile_weight(counts) >= self.quota
    }
}

#[derive(PartialEq, Eq)]
struct Node<T> {
    key: T,
    prefix: Vec<usize>,
    cost: T,
    weight: u64,
}

impl<T: Ord> Ord for Node<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key).then_with(|| self.prefix.cmp(&other.prefix))
    }
}

impl<T: Ord> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Profiles of one side (winning or losing) in nondecreasing cost order,
/// ties by lexicographically smaller profile.
struct ProfileStream<'a, T> {
    groups: &'a Groups,
    costs: &'a [T],
    winning: bool,
    /// Winning side: `to_go[k][r]` = cheapest completion over groups `k..` adding weight `>= r`.
    to_go: Vec<Vec<Option<T>>>,
    heap: BinaryHeap<Reverse<Node<T>>>,
}

impl<'a, T: CostInt> ProfileStream<'a, T> {
    fn new(groups: &'a Groups, costs: &'a [T], winning: bool) -> Self {
        let g = groups.len();
        let q = groups.quota as usize;
        let mut to_go = Vec::new();
        if winning {
            to_go = vec![vec![None; q + 1]; g + 1];
            to_go[g][0] = Some(T::zero());
            for k in (0..g).rev() {
                let w = groups.weights[k] as usize;
                for r in 0..=q {
                    let mut best: Option<T> = None;
                    for c in 0..=groups.counts[k] {
                        let rest = r.saturating_sub(c * w);
                        if let Some(tail) = &to_go[k + 1][rest] {
                            let total = costs[k].times(c) + tail.clone();
                            if best.as_ref().is_none_or(|b| total < *b) {
                                best = Some(total);
                            }
                        }
                        if rest == 0 {
                            break;
                        }
                    }
                    to_go[k][r] = best;
                }
            }
        }
        let mut stream = ProfileStream { groups, costs, winning, to_go, heap: BinaryHeap::new() };
        let root_key = if winning { stream.to_go[0][q].clone() } else { Some(T::zero()) };
        if let Some(key) = root_key {
            stream.heap.push(Reverse(Node { key, prefix: Vec::new(), cost: T::zero(), weight: 0 }));
        }
        stream
    }

    fn next_profile(&mut self) -> Option<(Vec<usize>, T)> {
        let g = self.groups.len();
        let q = self.groups.quota;
        while let Some(Reverse(node)) = self.heap.pop() {
            let k = node.prefix.len();
            if k == g {
                return Some((node.prefix, node.cost));
            }
            let w = self.groups.weights[k];
            for c in 0..=self.groups.counts[k] {
                let weight = node.weight + c as u64 * w;
                let cost = node.cost.clone() + self.costs[k].times(c);
                let key = if self.winning {
                    let rest = q.saturating_sub(weight) as usize;
                    match &self.to_go[k + 1][rest] {
                        Some(tail) => cost.clone() + tail.clone(),
                        None => continue,
                    }
                } else {
                    if weight >= q {
                        break;
                    }
                    cost.clone()
                };
                let mut prefix = node.prefix.clone();
                prefix.push(c);
                self.heap.push(Reverse(Node { key, prefix, cost, weight }));
            }
        }
        None
    }
}

/// Profiles in order of decreasing excess `v(c)·D − cost(c)` (in units of the
/// common payoff denominator `D`), merging the winning and losing sides.
pub(crate) struct ExcessStream<'a, T: CostInt> {
    denominator: T,
    winning: ProfileStream<'a, T>,
    losing: ProfileStream<'a, T>,
    peek_w: Option<Option<(Vec<usize>, T)>>,
    peek_l: Option<Option<(Vec<usize>, T)>>,
}

impl<'a, T: CostInt> ExcessStream<'a, T> {
    pub fn new(groups: &'a Groups, costs: &'a [T], denominator: T) -> Self {
        ExcessStream {
            denominator,
            winning: ProfileStream::new(groups, costs, true),
            losing: ProfileStream::new(groups, costs, false),
            peek_w: None,
            peek_l: None,
        }
    }
}

impl<T: CostInt> Iterator for ExcessStream<'_, T> {
    /// (profile, scaled excess)
    type Item = (Vec<usize>, T);

    fn next(&mut self) -> Option<Self::Item> {
        if self.peek_w.is_none() {
            self.peek_w = Some(self.winning.next_profile());
        }
        if self.peek_l.is_none() {
            self.peek_l = Some(self.losing.next_profile());
        }
        let w = self.peek_w.as_ref().unwrap().as_ref().map(|(p, c)| (p, self.denominator.clone() - c.clone()));
        let l = self.peek_l.as_ref().unwrap().as_ref().map(|(p, c)| (p, T::zero() - c.clone()));
        let take_winning = match (w, l) {
            (None, None) => return None,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some((pw, ew)), Some((pl, el))) => ew > el || (ew == el && pw < pl),
        };
        if take_winning {
            let (p, c) = self.peek_w.take().unwrap().unwrap();
            Some((p, self.denominator.clone() - c))
        } else {
            let (p, c) = self.peek_l.take().unwrap().unwrap();
            Some((p, T::zero() - c))
        }
    }
}

/// Searches profiles by decreasing excess and returns up to `limit` accepted
/// ones with excess strictly above `threshold`. `payoffs` are per group.
pub(crate) fn top_profiles(
    groups: &Groups,
    payoffs: &[Rational],
    threshold: Option<&Rational>,
    limit: usize,
    mut accept: impl FnMut(&[usize]) -> bool,
) -> Vec<(Vec<usize>, Rational)> {
    let (scaled, den) = common_denominator(payoffs);
    let total: BigInt = scaled.iter().zip(&groups.counts).map(|(a, &c)| a * BigInt::from(c)).sum();
    let bound = BigInt::from(1u128 << 100);
    if den < bound && total < bound && scaled.iter().all(|a| a >= &BigInt::zero()) {
        let costs: Vec<i128> = scaled.iter().map(|a| a.to_i128().unwrap()).collect();
        collect_top(groups, &costs, den.to_i128().unwrap(), &den, threshold, limit, &mut accept, |v| {
            BigInt::from(v)
        })
    } else {
        collect_top(groups, &scaled, den.clone(), &den, threshold, limit, &mut accept, |v| v)
    }
}

#[allow(clippy::too_many_arguments)]
fn collect_top<T: CostInt>(
    groups: &Groups,
    costs: &[T],
    den_t: T,
    den: &BigInt,
    threshold: Option<&Rational>,
    limit: usize,
    accept: &mut impl FnMut(&[usize]) -> bool,
    to_big: impl Fn(T) -> BigInt,
) -> Vec<(Vec<usize>, Rational)> {
    let mut out = Vec::new();
    for (profile, scaled) in ExcessStream::new(groups, costs, den_t) {
        let e = Rational::from_bigints(to_big(scaled), den.clone());
        if threshold.is_some_and(|t| &e <= t) {
            break;
        }
        if accept(&profile) {
            out.push((profile, e));
            if out.len() >= limit {
                break;
            }
        }
    }
    out
}

/// A coalition of maximum excess at `x` outside `forbidden`, found by
/// best-first search over integer total weight (a min-cost covering knapsack
/// on the winning side). Requires integer weights and `x >= 0`.
pub fn max_excess_coalition(
    rep: &Representation,
    x: &[Rational],
    forbidden: &HashSet<Coalition>,
) -> Result<Option<ExcessRecord>> {
    check_len(rep, x)?;
    if rep.n() > 64 {
        return Err(Error::TooManyPlayers { n: rep.n(), limit: 64 });
    }
    let groups = Groups::from_players(rep)?;
    let to_coalition = |p: &[usize]| Coalition::from_players(p.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i));
    let best = top_profiles(&groups, x, None, 1, |p| !forbidden.contains(&to_coalition(p)));
    Ok(best.into_iter().next().map(|(p, excess)| ExcessRecord {
        coalition: CoalitionRef::Explicit(to_coalition(&p)),
        excess,
    }))
}

/// A profile of maximum excess at the weight-symmetric payoff `type_payoffs`
/// (one entry per weight type).
pub fn max_excess_profile(
    rep: &Representation,
    type_payoffs: &[Rational],
    forbidden: &HashSet<Vec<usize>>,
) -> Result<Option<ExcessRecord>> {
    let groups = Groups::from_types(rep)?;
    if type_payoffs.len() != groups.len() {
        return Err(Error::DimensionMismatch { expected: groups.len(), found: type_payoffs.len() });
    }
    let best = top_profiles(&groups, type_payoffs, None, 1, |p| !forbidden.contains(p));
    Ok(best.into_iter().next().map(|(p, excess)| ExcessRecord { coalition: CoalitionRef::Profile(p), excess }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn rep(quota: i64, w: &[i64]) -> Representation {
        Representation::from_ints(quota, w).unwrap()
    }

    fn set(players: &[usize]) -> Coalition {
        Coalition::from_players(players.iter().map(|p| p - 1))
    }

    #[test]
    fn excess_values() {
        let r = rep(8, &[6, 4, 3, 2]);
        let x = vec![q(2, 5), q(1, 5), q(1, 5), q(1, 5)];
        assert_eq!(excess(&r, set(&[1, 2]), &x).unwrap(), q(2, 5));
        assert_eq!(excess(&r, Coalition::EMPTY, &x).unwrap(), q(0, 1));
        assert_eq!(excess(&r, Coalition::grand(4), &x).unwrap(), q(0, 1));
        assert!(matches!(excess(&r, Coalition::EMPTY, &x[..2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ordered_excesses_of_the_four_player_game() {
        let r = rep(8, &[6, 4, 3, 2]);
        let x = vec![q(2, 5), q(1, 5), q(1, 5), q(1, 5)];
        let e = ordered_excess_vector(&r, &x).unwrap();
        assert_eq!(e.len(), 16);
        assert!(e.windows(2).all(|w| w[0].excess >= w[1].excess));
        assert_eq!(e[0].excess, q(2, 5));
        let top: Vec<CoalitionRef> = e.iter().take_while(|r| r.excess == q(2, 5)).map(|r| r.coalition.clone()).collect();
        for s in [set(&[1, 2]), set(&[1, 3]), set(&[1, 4]), set(&[2, 3, 4])] {
            assert!(top.contains(&CoalitionRef::Explicit(s)));
        }
        let e = ordered_excess_vector(&rep(1, &[1]), &[q(1, 1)]).unwrap();
        assert_eq!(e.iter().map(|r| r.excess.clone()).collect::<Vec<_>>(), vec![q(0, 1), q(0, 1)]);
        let e = ordered_excess_vector(&rep(3, &[2, 1, 1, 1]), &x).unwrap();
        assert_eq!(e[0].excess, q(2, 5));
        let big = Representation::from_ints(1, &[1; 21]).unwrap();
        assert!(matches!(ordered_excess_vector(&big, &vec![q(1, 21); 21]), Err(Error::TooManyPlayers { .. })));
    }

    #[test]
    fn minimal_winning_lists() {
        let mwc = minimal_winning_coalitions(&rep(3, &[2, 1, 1, 1])).unwrap();
        assert_eq!(mwc, vec![set(&[1, 2]), set(&[1, 3]), set(&[1, 4]), set(&[2, 3, 4])]);
        assert_eq!(minimal_winning_coalitions(&rep(1, &[1])).unwrap(), vec![set(&[1])]);
    }

    #[test]
    fn flagship_minimal_winning_profiles() {
        let mut w = vec![4; 300];
        w.extend(vec![3; 300]);
        w.extend(vec![2; 300]);
        let profiles = minimal_winning_profiles(&rep(1500, &w));
        for counts in [vec![300, 100, 0], vec![300, 0, 150], vec![300, 1, 149]] {
            assert!(profiles.iter().any(|p| p.counts == counts), "missing {counts:?}");
        }
        assert!(profiles.iter().all(|p| p.weight >= q(1500, 1) && p.weight < q(1503, 1)));
    }

    #[test]
    fn profiles_agree_with_explicit_lists() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=10);
            let palette: Vec<i64> = (0..3).map(|_| rng.gen_range(1..=6)).collect();
            let w: Vec<i64> = (0..n).map(|_| palette[rng.gen_range(0..3)]).collect();
            let total: i64 = w.iter().sum();
            let r = rep(rng.gen_range(1..=total), &w);
            let table = r.weight_types();
            let expand = |ps: Vec<ProfileCoalition>| {
                let mut all: Vec<Coalition> = ps.iter().flat_map(|p| p.expand(&table)).collect();
                all.sort();
                all
            };
            assert_eq!(expand(minimal_winning_profiles(&r)), minimal_winning_coalitions(&r).unwrap());
            assert_eq!(expand(maximal_losing_profiles(&r)), maximal_losing_coalitions(&r).unwrap());
        }
    }

    #[test]
    fn profile_multiplicities_cover_all_coalitions() {
        let r = rep(5, &[3, 3, 2, 1, 1, 1]);
        let table = r.weight_types();
        let mut total = BigUint::zero();
        for a in 0..=2 {
            for b in 0..=1 {
                for c in 0..=3 {
                    let p = ProfileCoalition::new(&table, vec![a, b, c]);
                    assert_eq!(BigUint::from(p.expand(&table).len()), p.multiplicity);
                    total += p.multiplicity;
                }
            }
        }
        assert_eq!(total, BigUint::from(64u32));
    }

    #[test]
    fn oracle_examples() {
        let r = rep(8, &[6, 4, 3, 2]);
        let x = vec![q(1, 4); 4];
        let best = max_excess_coalition(&r, &x, &HashSet::new()).unwrap().unwrap();
        assert_eq!(best.excess, q(1, 2));
        assert_eq!(best.coalition, CoalitionRef::Explicit(set(&[1, 4])));
        let best = max_excess_coalition(&rep(1, &[1]), &[q(1, 1)], &HashSet::new()).unwrap().unwrap();
        assert_eq!(best.excess, q(0, 1));
        let lux = Representation::new(q(1, 2), vec![q(9, 20), q(9, 20), q(1, 10)]).unwrap();
        assert_eq!(max_excess_coalition(&lux, &vec![q(1, 3); 3], &HashSet::new()), Err(Error::NonIntegerWeights));
    }

    #[test]
    fn oracle_matches_brute_force_with_forbidden_sets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..80 {
            let n = rng.gen_range(1..=12);
            let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=9)).collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                continue;
            }
            let r = rep(rng.gen_range(1..=total), &w);
            let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
            let s: i64 = raw.iter().sum::<i64>().max(1);
            let x: Vec<Rational> = raw.iter().map(|&a| q(a, s)).collect();
            let all = ordered_excess_vector(&r, &x).unwrap();
            let forbidden: HashSet<Coalition> = all
                .iter()
                .take(rng.gen_range(0..4))
                .map(|rec| match rec.coalition {
                    CoalitionRef::Explicit(c) => c,
                    _ => unreachable!(),
                })
                .collect();
            let expected = all
                .iter()
                .find(|rec| match &rec.coalition {
                    CoalitionRef::Explicit(c) => !forbidden.contains(c),
                    _ => false,
                })
                .map(|rec| rec.excess.clone());
            let got = max_excess_coalition(&r, &x, &forbidden).unwrap();
            assert_eq!(got.as_ref().map(|g| g.excess.clone()), expected);
            if let Some(CoalitionRef::Explicit(c)) = got.map(|g| g.coalition) {
                assert!(!forbidden.contains(&c));
                assert_eq!(excess(&r, c, &x).unwrap(), expected.unwrap());
            }
        }
    }

    #[test]
    fn scaled_instance_profile_oracle_matches_scan() {
        // [50; 10x4, 10x3, 10x2] at x = w̄
        let mut w = vec![4; 10];
        w.extend(vec![3; 10]);
        w.extend(vec![2; 10]);
        let r = rep(50, &w);
        let payoffs = vec![q(4, 90), q(3, 90), q(2, 90)];
        let best = max_excess_profile(&r, &payoffs, &HashSet::new()).unwrap().unwrap();
        let mut scan = None::<Rational>;
        for a in 0..=10i64 {
            for b in 0..=10i64 {
                for c in 0..=10i64 {
                    let weight = 4 * a + 3 * b + 2 * c;
                    let v = if weight >= 50 { 1 } else { 0 };
                    let e = q(v, 1) - q(weight, 90);
                    if scan.as_ref().is_none_or(|s| e > *s) {
                        scan = Some(e);
                    }
                }
            }
        }
        assert_eq!(best.excess, scan.unwrap());
        assert_eq!(best.excess, q(4, 9));
    }

    #[test]
    fn shrinking_to_a_minimal_winning_subset_never_lowers_excess() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let n = rng.gen_range(1..=10);
            let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
            let total: i64 = w.iter().sum();
            let r = rep(rng.gen_range(1..=total), &w);
            let x: Vec<Rational> = (0..n).map(|_| q(rng.gen_range(0..=4), 7)).collect();
            let mwc = minimal_winning_coalitions(&r).unwrap();
            for s in (0..1u64 << n).map(Coalition).filter(|&s| r.is_winning(s)) {
                let es = excess(&r, s, &x).unwrap();
                assert!(mwc.iter().filter(|t| t.0 & !s.0 == 0).any(|&t| excess(&r, t, &x).unwrap() >= es));
            }
        }
    }
}
