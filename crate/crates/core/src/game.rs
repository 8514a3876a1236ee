//! Weighted majority games given by a quota and a weight vector.
//!
//! A [`Representation`] keeps its players sorted by weight, heaviest
//! first. Player indices used throughout the crate (coalition bits, payoff
//! vector positions) refer to this canonical order; [`Representation::to_input_order`]
//! maps results back to the order the weights were supplied in.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A coalition as a bitset over canonical player indices (at most 64 players).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(pub u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    /// The grand coalition of `n` players.
    pub fn grand(n: usize) -> Self {
        assert!(n <= 64, "coalition bitsets hold at most 64 players");
        if n == 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn from_players<I: IntoIterator<Item = usize>>(players: I) -> Self {
        let mut bits = 0u64;
        for p in players {
            assert!(p < 64, "player index {p} out of range");
            bits |= 1 << p;
        }
        Coalition(bits)
    }

    pub fn contains(self, player: usize) -> bool {
        player < 64 && self.0 >> player & 1 == 1
    }

    pub fn with(self, player: usize) -> Self {
        Coalition(self.0 | 1 << player)
    }

    pub fn without(self, player: usize) -> Self {
        Coalition(self.0 & !(1 << player))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        Coalition(Coalition::grand(n).0 & !self.0)
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", p + 1)?;
        }
        write!(f, "}}")
    }
}

/// Quota and weights `[q; w_1, ..., w_n]`, sorted descending.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Representation {
    quota: Rational,
    weights: Vec<Rational>,
    /// `order[k]` is the input position of the player at canonical index `k`.
    order: Vec<usize>,
}

impl Representation {
    /// Validates and canonicalizes `[quota; weights]`.
    pub fn new(quota: Rational, weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyPlayerSet);
        }
        if let Some(player) = weights.iter().position(Rational::is_negative) {
            return Err(Error::NegativeWeight { player: player + 1 });
        }
        if !quota.is_positive() {
            return Err(Error::NonPositiveQuota);
        }
        let total: Rational = weights.iter().sum();
        if quota > total {
            return Err(Error::QuotaExceedsTotalWeight {
                quota: quota.to_string(),
                total: total.to_string(),
            });
        }
        let mut order: Vec<usize> = (0..weights.len()).collect();
        // stable: equal weights keep their input order
        order.sort_by(|&a, &b| weights[b].cmp(&weights[a]));
        let sorted = order.iter().map(|&i| weights[i].clone()).collect();
        Ok(Representation { quota, weights: sorted, order })
    }

    /// Convenience constructor from integers.
    pub fn from_ints(quota: i64, weights: &[i64]) -> Result<Self> {
        Self::new(quota.into(), weights.iter().map(|&w| w.into()).collect())
    }

    pub fn quota(&self) -> &Rational {
        &self.quota
    }

    /// Weights in canonical (descending) order.
    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> Rational {
        self.weights.iter().sum()
    }

    /// The largest weight `w_1`.
    pub fn max_weight(&self) -> &Rational {
        &self.weights[0]
    }

    /// Input position of canonical player `k`.
    pub fn original_index(&self, k: usize) -> usize {
        self.order[k]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.order
    }

    /// Reorders a per-player vector from canonical to input order.
    pub fn to_input_order<T: Clone>(&self, canonical: &[T]) -> Vec<T> {
        assert_eq!(canonical.len(), self.n());
        let mut out: Vec<Option<T>> = vec![None; self.n()];
        for (k, v) in canonical.iter().enumerate() {
            out[self.order[k]] = Some(v.clone());
        }
        out.into_iter().map(|v| v.expect("permutation is a bijection")).collect()
    }

    /// Reorders a per-player vector from input to canonical order.
    pub fn from_input_order<T: Clone>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.n());
        self.order.iter().map(|&i| input[i].clone()).collect()
    }

    /// Weights in the order they were supplied.
    pub fn input_weights(&self) -> Vec<Rational> {
        self.to_input_order(&self.weights)
    }

    pub fn weight_of(&self, s: Coalition) -> Rational {
        s.members().take_while(|&i| i < self.n()).map(|i| &self.weights[i]).sum()
    }

    /// `v(S) = 1` iff `w(S) >= q`.
    pub fn is_winning(&self, s: Coalition) -> bool {
        self.weight_of(s) >= self.quota
    }

    pub fn value(&self, s: Coalition) -> Rational {
        if self.is_winning(s) {
            Rational::one()
        } else {
            Rational::zero()
        }
    }

    pub fn normalize(&self) -> Result<NormalizedRepresentation> {
        let total = self.total_weight();
        if total.is_zero() {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(NormalizedRepresentation {
            quota: &self.quota / &total,
            weights: self.weights.iter().map(|w| w / &total).collect(),
        })
    }

    pub fn has_integer_weights(&self) -> bool {
        self.weights.iter().all(Rational::is_integer)
    }

    /// Integer weights, if every weight is an integer that fits a `u64`.
    pub fn integer_weights(&self) -> Option<Vec<u64>> {
        self.weights
            .iter()
            .map(|w| if w.is_integer() { w.numer().to_u64() } else { None })
            .collect()
    }

    /// Smallest integer total weight that wins (for integer weights).
    pub fn integer_quota(&self) -> BigInt {
        self.quota.ceil()
    }

    /// Scales weights to coprime integers; the quota is scaled by the same factor.
    pub fn to_integer(&self) -> Representation {
        let mut lcm = BigInt::one();
        for w in &self.weights {
            lcm = lcm.lcm(&w.denom());
        }
        let scaled: Vec<BigInt> = self.weights.iter().map(|w| w.numer() * (&lcm / w.denom())).collect();
        let mut g = BigInt::zero();
        for w in &scaled {
            g = g.gcd(w);
        }
        if g.is_zero() {
            g = BigInt::one();
        }
        let factor = Rational::from_bigints(lcm, g.clone());
        Representation {
            quota: &self.quota * &factor,
            weights: scaled.into_iter().map(|w| Rational::from_bigint(w / &g)).collect(),
            order: self.order.clone(),
        }
    }

    /// `[lambda q; lambda w]` for `lambda > 0`.
    pub fn scale(&self, lambda: &Rational) -> Result<Representation> {
        if !lambda.is_positive() {
            return Err(Error::NonPositiveQuota);
        }
        Ok(Representation {
            quota: &self.quota * lambda,
            weights: self.weights.iter().map(|w| w * lambda).collect(),
            order: self.order.clone(),
        })
    }

    pub fn weight_types(&self) -> WeightTypeTable {
        let mut entries: Vec<WeightType> = Vec::new();
        for w in &self.weights {
            match entries.last_mut() {
                Some(last) if &last.weight == w => last.count += 1,
                _ => entries.push(WeightType { weight: w.clone(), count: 1 }),
            }
        }
        WeightTypeTable { entries }
    }

    /// The `rho`-replica: quota `rho q` and `rho` copies of every player.
    ///
    /// Copies of an input player are placed next to each other in input order.
    pub fn replicate(&self, rho: usize) -> Result<Representation> {
        if rho == 0 {
            return Err(Error::EmptyPlayerSet);
        }
        let input = self.input_weights();
        let weights = input.iter().flat_map(|w| std::iter::repeat_n(w.clone(), rho)).collect();
        Representation::new(&self.quota * &Rational::from_integer(rho as i64), weights)
    }

    /// The representation restricted to players with positive weight, with the
    /// canonical indices of the kept players.
    pub(crate) fn strip_zero_weights(&self) -> (Representation, Vec<usize>) {
        let kept: Vec<usize> = (0..self.n()).filter(|&i| self.weights[i].is_positive()).collect();
        let rep = Representation {
            quota: self.quota.clone(),
            weights: kept.iter().map(|&i| self.weights[i].clone()).collect(),
            order: (0..kept.len()).collect(),
        };
        (rep, kept)
    }
}

impl fmt::Display for Representation {
    /// Input order, e.g. `[8; 6, 4, 3, 2]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{};", self.quota)?;
        for (k, w) in self.input_weights().iter().enumerate() {
            write!(f, "{}{}", if k == 0 { " " } else { ", " }, w)?;
        }
        write!(f, "]")
    }
}

/// Serializes as `{"quota": …, "weights": […]}` in input order.
impl Serialize for Representation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Representation", 2)?;
        st.serialize_field("quota", &self.quota)?;
        st.serialize_field("weights", &self.input_weights())?;
        st.end()
    }
}

/// `[q/w(N); w/w(N)]`, in the canonical order of the source representation.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct NormalizedRepresentation {
    pub quota: Rational,
    pub weights: Vec<Rational>,
}

impl NormalizedRepresentation {
    /// `min{q̄, 1 - q̄}`.
    pub fn quota_margin(&self) -> Rational {
        let other = Rational::one() - &self.quota;
        self.quota.clone().min(other)
    }

    pub fn has_interior_quota(&self) -> bool {
        self.quota.is_positive() && self.quota < Rational::one()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct WeightType {
    pub weight: Rational,
    pub count: usize,
}

/// Distinct weight values with their multiplicities, heaviest first.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct WeightTypeTable {
    pub entries: Vec<WeightType>,
}

impl WeightTypeTable {
    /// Number of distinct weights `t`.
    pub fn t(&self) -> usize {
        self.entries.len()
    }

    /// Occurrences of the rarest weight, `m°`.
    pub fn m_circ(&self) -> usize {
        self.entries.iter().map(|e| e.count).min().unwrap_or(0)
    }

    /// `m_ω`, zero when `ω` does not occur.
    pub fn multiplicity(&self, weight: &Rational) -> usize {
        self.entries.iter().find(|e| &e.weight == weight).map_or(0, |e| e.count)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.count).collect()
    }

    /// Canonical index of the first player of each type.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.entries
            .iter()
            .map(|e| {
                let start = acc;
                acc += e.count;
                start
            })
            .collect()
    }

    /// Type index of every canonical player.
    pub fn player_types(&self) -> Vec<usize> {
        self.entries.iter().enumerate().flat_map(|(k, e)| std::iter::repeat_n(k, e.count)).collect()
    }
}
