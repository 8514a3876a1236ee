//! The nucleolus by a sequence of linear programs with row generation.
//!
//! Stage `r` minimizes the largest excess `ε` over coalitions that are not yet
//! fixed. Coalitions whose constraint carries a positive dual multiplier are
//! tight at every optimum; they are frozen at `ε_r` and the next stage starts.
//! The scheme ends when the frozen equalities determine a unique point.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::coalition::{top_profiles, winning_table, CoalitionRef, CostInt, Groups};
use crate::error::{Error, Result};
use crate::game::{Coalition, Representation};
use crate::lp::{ExactLinearProgram, LpStatus, Relation, Sense};
use crate::rational::{common_denominator, Rational};
use crate::span::Span;

pub const MAX_BRUTE_N_VAR: &str = "NUCLEO_MAX_BRUTE_N";
pub const DEFAULT_MAX_BRUTE_N: usize = 20;
/// The explicit engine keeps one entry per coalition in memory.
pub const HARD_MAX_BRUTE_N: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Auto,
    Brute,
    Typed,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Engine::Auto),
            "brute" => Ok(Engine::Brute),
            "typed" => Ok(Engine::Typed),
            _ => Err(Error::UnknownEngine(s.to_string())),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::Brute => "brute",
            Engine::Typed => "typed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    /// Largest player count accepted by the explicit engine.
    pub max_brute_n: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_brute_n: DEFAULT_MAX_BRUTE_N }
    }
}

impl SolverOptions {
    pub fn with_max_brute_n(max_brute_n: usize) -> Result<Self> {
        if max_brute_n > HARD_MAX_BRUTE_N {
            return Err(Error::TooManyPlayers { n: max_brute_n, limit: HARD_MAX_BRUTE_N });
        }
        Ok(SolverOptions { max_brute_n })
    }

    /// Defaults, with the brute-force cap taken from `NUCLEO_MAX_BRUTE_N` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_BRUTE_N_VAR) {
            Ok(value) => {
                let n = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidEnv { var: MAX_BRUTE_N_VAR.into(), value: value.clone() })?;
                Self::with_max_brute_n(n)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    /// The engine `auto` resolves to for `rep`.
    pub fn resolve(&self, rep: &Representation, engine: Engine) -> Engine {
        match engine {
            Engine::Auto if rep.n() > self.max_brute_n || rep.weight_types().t() <= 6 => Engine::Typed,
            Engine::Auto => Engine::Brute,
            e => e,
        }
    }
}

/// Coalitions frozen at one excess value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub epsilon: Rational,
    pub coalitions: Vec<CoalitionRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NucleolusResult {
    /// Payoffs in input player order.
    pub x_star: Vec<Rational>,
    /// Strictly decreasing excess levels.
    pub levels: Vec<Level>,
    pub engine: Engine,
    pub stages: usize,
}

/// Coordinate ranges over the imputations minimizing the largest excess.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NucleusBox {
    pub epsilon: Rational,
    pub min: Vec<Rational>,
    pub max: Vec<Rational>,
}

impl NucleusBox {
    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.min.len() && x.iter().zip(self.min.iter().zip(&self.max)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn is_point(&self) -> bool {
        self.min == self.max
    }
}

pub fn nucleolus(rep: &Representation, engine: Engine) -> Result<NucleolusResult> {
    nucleolus_with(rep, engine, &SolverOptions::default())
}

pub fn nucleolus_with(rep: &Representation, engine: Engine, options: &SolverOptions) -> Result<NucleolusResult> {
    let (stripped, kept) = rep.strip_zero_weights();
    let n = rep.n();
    let mut canonical = vec![Rational::zero(); n];
    match options.resolve(rep, engine) {
        Engine::Typed => {
            let space = TypedSpace::new(&stripped)?;
            let counts = space.groups.counts.clone();
            let t_full = rep.weight_types().t();
            let outcome = Sequential::new(&space).run()?;
            let mut i = 0;
            for (k, &c) in counts.iter().enumerate() {
                for _ in 0..c {
                    canonical[kept[i]] = outcome.x[k].clone();
                    i += 1;
                }
            }
            let stages = outcome.stages;
            let levels = outcome.levels(|p| {
                let mut p = p.clone();
                p.resize(t_full, 0);
                CoalitionRef::Profile(p)
            });
            Ok(NucleolusResult { x_star: rep.to_input_order(&canonical), levels, engine: Engine::Typed, stages })
        }
        _ => {
            if n > options.max_brute_n {
                return Err(Error::EnumerationLimit { n, limit: options.max_brute_n });
            }
            let space = BruteSpace::new(&stripped);
            let outcome = Sequential::new(&space).run()?;
            for (i, v) in outcome.x.iter().enumerate() {
                canonical[kept[i]] = v.clone();
            }
            let stages = outcome.stages;
            let levels = outcome.levels(|s| {
                CoalitionRef::Explicit(Coalition::from_players(s.members().map(|i| rep.original_index(kept[i]))))
            });
            Ok(NucleolusResult { x_star: rep.to_input_order(&canonical), levels, engine: Engine::Brute, stages })
        }
    }
}

/// Exact coordinate bounds of the nucleus (explicit engine only).
pub fn nucleus_box(rep: &Representation) -> Result<NucleusBox> {
    nucleus_box_with(rep, &SolverOptions::default())
}

pub fn nucleus_box_with(rep: &Representation, options: &SolverOptions) -> Result<NucleusBox> {
    let n = rep.n();
    if n > options.max_brute_n {
        return Err(Error::EnumerationLimit { n, limit: options.max_brute_n });
    }
    let space = BruteSpace::new(rep);
    let mut seq = Sequential::new(&space);
    let (epsilon, _, _) = seq.minimize_max_excess()?;
    let mut rows = seq.active.clone();
    let mut min = Vec::with_capacity(n);
    let mut max = Vec::with_capacity(n);
    for j in 0..n {
        for sense in [Sense::Minimize, Sense::Maximize] {
            loop {
                let mut lp = ExactLinearProgram::new(n);
                let mut obj = vec![Rational::zero(); n];
                obj[j] = Rational::one();
                lp.set_objective(sense, obj);
                lp.add_constraint(space.grand(), Relation::Eq, Rational::one());
                for s in &rows {
                    lp.add_constraint(space.row(s), Relation::Ge, &space.value(s) - &epsilon);
                }
                for (i, lo) in space.lower().into_iter().enumerate() {
                    lp.set_bounds(i, Some(lo), None);
                }
                let sol = lp.solve()?;
                if !sol.is_optimal() {
                    return Err(Error::Internal(format!("nucleus bound LP is {:?}", sol.status)));
                }
                let known: HashSet<Coalition> = rows.iter().copied().collect();
                let extra = space.violators(&sol.values, Some(&epsilon), space.batch(), &|s| !known.contains(s));
                if extra.is_empty() {
                    match sense {
                        Sense::Minimize => min.push(sol.objective),
                        Sense::Maximize => max.push(sol.objective),
                    }
                    break;
                }
                rows.extend(extra.into_iter().map(|(s, _)| s));
            }
        }
    }
    Ok(NucleusBox { epsilon, min: rep.to_input_order(&min), max: rep.to_input_order(&max) })
}

/// A set of coalitions with their characteristic vectors over the payoff variables.
trait Space {
    type Key: Clone + Eq + Hash + Ord;

    fn dim(&self) -> usize;
    /// Coefficients of `x(S)`.
    fn row(&self, key: &Self::Key) -> Vec<Rational>;
    fn value(&self, key: &Self::Key) -> Rational;
    fn grand(&self) -> Vec<Rational>;
    /// `v({i})` per variable.
    fn lower(&self) -> Vec<Rational>;
    fn seeds(&self) -> Vec<Self::Key>;
    /// Up to `limit` accepted keys of largest excess at `x`, strictly above
    /// `threshold` when given, in decreasing excess order.
    fn violators(
        &self,
        x: &[Rational],
        threshold: Option<&Rational>,
        limit: usize,
        accept: &dyn Fn(&Self::Key) -> bool,
    ) -> Vec<(Self::Key, Rational)>;

    fn batch(&self) -> usize {
        self.dim().max(4)
    }
}

struct BruteSpace {
    n: usize,
    win: Vec<bool>,
    lower: Vec<Rational>,
}

impl BruteSpace {
    fn new(rep: &Representation) -> Self {
        let n = rep.n();
        let win = winning_table(rep);
        let lower = (0..n).map(|i| if win[1 << i] { Rational::one() } else { Rational::zero() }).collect();
        BruteSpace { n, win, lower }
    }

    fn scan<T: CostInt>(
        &self,
        costs: &[T],
        den: &T,
        cut: Option<&T>,
        limit: usize,
        accept: &dyn Fn(&Coalition) -> bool,
    ) -> Vec<(Coalition, T)> {
        let size = 1usize << self.n;
        let mut sums: Vec<T> = Vec::with_capacity(size);
        sums.push(T::zero());
        let mut found = Vec::new();
        for s in 1..size {
            let x = sums[s & (s - 1)].clone() + costs[s.trailing_zeros() as usize].clone();
            let e = if self.win[s] { den.clone() - x.clone() } else { T::zero() - x.clone() };
            sums.push(x);
            if cut.is_none_or(|c| &e > c) {
                found.push((s, e));
            }
        }
        if cut.is_none_or(|c| &T::zero() > c) {
            found.push((0, T::zero()));
        }
        found.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        found
            .into_iter()
            .map(|(s, e)| (Coalition(s as u64), e))
            .filter(|(s, _)| accept(s))
            .take(limit)
            .collect()
    }
}

impl Space for BruteSpace {
    type Key = Coalition;

    fn dim(&self) -> usize {
        self.n
    }

    fn row(&self, s: &Coalition) -> Vec<Rational> {
        (0..self.n).map(|i| if s.contains(i) { Rational::one() } else { Rational::zero() }).collect()
    }

    fn value(&self, s: &Coalition) -> Rational {
        if self.win[s.0 as usize] {
            Rational::one()
        } else {
            Rational::zero()
        }
    }

    fn grand(&self) -> Vec<Rational> {
        vec![Rational::one(); self.n]
    }

    fn lower(&self) -> Vec<Rational> {
        self.lower.clone()
    }

    fn seeds(&self) -> Vec<Coalition> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let s = Coalition::EMPTY.with(i);
            out.push(s);
            out.push(s.complement(self.n));
        }
        out
    }

    fn violators(
        &self,
        x: &[Rational],
        threshold: Option<&Rational>,
        limit: usize,
        accept: &dyn Fn(&Coalition) -> bool,
    ) -> Vec<(Coalition, Rational)> {
        let (scaled, den) = common_denominator(x);
        // integer excesses e exceed t exactly when e >= floor(t·D) + 1
        let cut: Option<BigInt> = threshold.map(|t| (t * &Rational::from_bigint(den.clone())).floor());
        let bound = BigInt::from(1u128 << 100);
        let small = den < bound
            && cut.as_ref().is_none_or(|c| c.magnitude() < bound.magnitude())
            && scaled.iter().all(|a| a.magnitude() < bound.magnitude());
        let to_rational = |e: BigInt| Rational::from_bigints(e, den.clone());
        if small {
            let costs: Vec<i128> = scaled.iter().map(|a| a.to_i128().unwrap()).collect();
            let cut = cut.map(|c| c.to_i128().unwrap());
            self.scan(&costs, &den.to_i128().unwrap(), cut.as_ref(), limit, accept)
                .into_iter()
                .map(|(s, e)| (s, to_rational(BigInt::from(e))))
                .collect()
        } else {
            self.scan(&scaled, &den, cut.as_ref(), limit, accept)
                .into_iter()
                .map(|(s, e)| (s, to_rational(e)))
                .collect()
        }
    }
}

/// Weight-symmetric payoffs: one variable per weight type.
struct TypedSpace {
    groups: Groups,
    lower: Vec<Rational>,
}

impl TypedSpace {
    fn new(rep: &Representation) -> Result<Self> {
        let groups = Groups::from_types(&rep.to_integer())?;
        let lower = groups
            .weights
            .iter()
            .map(|&w| if w >= groups.quota { Rational::one() } else { Rational::zero() })
            .collect();
        Ok(TypedSpace { groups, lower })
    }

    fn unit(&self, k: usize, c: usize) -> Vec<usize> {
        let mut p = vec![0; self.groups.len()];
        p[k] = c;
        p
    }

    fn complement(&self, p: &[usize]) -> Vec<usize> {
        p.iter().zip(&self.groups.counts).map(|(&c, &n)| n - c).collect()
    }
}

impl Space for TypedSpace {
    type Key = Vec<usize>;

    fn dim(&self) -> usize {
        self.groups.len()
    }

    fn row(&self, p: &Vec<usize>) -> Vec<Rational> {
        p.iter().map(|&c| Rational::from_integer(c as i64)).collect()
    }

    fn value(&self, p: &Vec<usize>) -> Rational {
        if self.groups.is_winning(p) {
            Rational::one()
        } else {
            Rational::zero()
        }
    }

    fn grand(&self) -> Vec<Rational> {
        self.row(&self.groups.counts)
    }

    fn lower(&self) -> Vec<Rational> {
        self.lower.clone()
    }

    fn seeds(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for (k, &n) in self.groups.counts.iter().enumerate() {
            for c in [1, n] {
                let p = self.unit(k, c);
                out.push(self.complement(&p));
                out.push(p);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn violators(
        &self,
        x: &[Rational],
        threshold: Option<&Rational>,
        limit: usize,
        accept: &dyn Fn(&Vec<usize>) -> bool,
    ) -> Vec<(Vec<usize>, Rational)> {
        top_profiles(&self.groups, x, threshold, limit, |p| accept(&p.to_vec()))
    }
}

struct Outcome<K> {
    x: Vec<Rational>,
    levels: Vec<(Rational, Vec<K>)>,
    stages: usize,
}

impl<K> Outcome<K> {
    fn levels(self, describe: impl Fn(&K) -> CoalitionRef) -> Vec<Level> {
        self.levels
            .into_iter()
            .map(|(epsilon, keys)| Level { epsilon, coalitions: keys.iter().map(&describe).collect() })
            .collect()
    }
}

struct Sequential<'a, S: Space> {
    space: &'a S,
    span: Span,
    lower: Vec<Rational>,
    /// Frozen coalitions that raised the rank, with their excess level.
    equalities: Vec<(S::Key, Rational)>,
    fixed: HashSet<S::Key>,
    pinned: Vec<usize>,
    active: Vec<S::Key>,
}

impl<'a, S: Space> Sequential<'a, S> {
    fn new(space: &'a S) -> Self {
        let mut span = Span::new(space.dim());
        span.insert(&space.grand());
        let mut seq = Sequential {
            space,
            span,
            lower: space.lower(),
            equalities: Vec::new(),
            fixed: HashSet::new(),
            pinned: Vec::new(),
            active: Vec::new(),
        };
        let mut seeds = space.seeds();
        seeds.sort();
        seeds.dedup();
        seq.active = seeds.into_iter().filter(|k| seq.is_open(k)).collect();
        seq
    }

    /// Not frozen and not constant on the current face.
    fn is_open(&self, key: &S::Key) -> bool {
        !self.fixed.contains(key) && !self.span.contains(&self.space.row(key))
    }

    fn unit(&self, j: usize) -> Vec<Rational> {
        let mut e = vec![Rational::zero(); self.space.dim()];
        e[j] = Rational::one();
        e
    }

    /// Equality system of the current face, with variable bounds.
    fn face_lp(&self, extra_vars: usize) -> ExactLinearProgram {
        let d = self.space.dim();
        let pad = |mut row: Vec<Rational>| {
            row.resize(d + extra_vars, Rational::zero());
            row
        };
        let mut lp = ExactLinearProgram::new(d + extra_vars);
        lp.add_constraint(pad(self.space.grand()), Relation::Eq, Rational::one());
        for (key, eps) in &self.equalities {
            lp.add_constraint(pad(self.space.row(key)), Relation::Eq, &self.space.value(key) - eps);
        }
        for &j in &self.pinned {
            lp.add_constraint(pad(self.unit(j)), Relation::Eq, self.lower[j].clone());
        }
        for (j, lo) in self.lower.iter().enumerate() {
            lp.set_bounds(j, Some(lo.clone()), None);
        }
        lp
    }

    /// Solves one stage to optimality over all coalitions; returns
    /// `(ε, x, row duals of the active constraints, bound duals)`.
    #[allow(clippy::type_complexity)]
    fn minimize_max_excess(&mut self) -> Result<(Rational, Vec<Rational>, (Vec<Rational>, Vec<Rational>))> {
        let d = self.space.dim();
        let batch = self.space.batch();
        loop {
            let mut lp = self.face_lp(1);
            let mut obj = vec![Rational::zero(); d + 1];
            obj[d] = Rational::one();
            lp.set_objective(Sense::Minimize, obj);
            let base = lp.constraints.len();
            for key in &self.active {
                let mut row = self.space.row(key);
                row.push(Rational::one());
                lp.add_constraint(row, Relation::Ge, self.space.value(key));
            }
            let sol = lp.solve()?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Err(Error::EmptyImputationSet),
                LpStatus::Unbounded => return Err(Error::Internal("stage LP is unbounded".into())),
            }
            let x = sol.values[..d].to_vec();
            let epsilon = sol.objective.clone();
            let new = self.space.violators(&x, Some(&epsilon), batch, &|k| self.is_open(k));
            if new.is_empty() {
                let cert = sol.certificate.ok_or(Error::Internal("missing dual certificate".into()))?;
                let rows = cert.row_duals[base..].to_vec();
                let bounds = cert.lower_duals[..d].to_vec();
                return Ok((epsilon, x, (rows, bounds)));
            }
            self.active.extend(new.into_iter().map(|(k, _)| k));
        }
    }

    fn run(mut self) -> Result<Outcome<S::Key>> {
        let mut levels: Vec<(Rational, Vec<S::Key>)> = Vec::new();
        let mut stages = 0;
        let mut last_x: Option<Vec<Rational>> = None;
        while !self.span.is_full() {
            stages += 1;
            if self.active.is_empty() {
                let x = last_x.as_ref().ok_or(Error::Internal("no constraints to start a stage".into()))?;
                self.active = self
                    .space
                    .violators(x, None, self.space.batch(), &|k| self.is_open(k))
                    .into_iter()
                    .map(|(k, _)| k)
                    .collect();
                if self.active.is_empty() {
                    return Err(Error::Internal("rank deficient with every coalition constant".into()));
                }
            }
            let (epsilon, x, (row_duals, bound_duals)) = self.minimize_max_excess()?;
            let mut frozen = Vec::new();
            let mut grew = false;
            for (key, y) in self.active.iter().zip(&row_duals) {
                if y.is_positive() {
                    if self.span.insert(&self.space.row(key)) {
                        self.equalities.push((key.clone(), epsilon.clone()));
                        grew = true;
                    }
                    self.fixed.insert(key.clone());
                    frozen.push(key.clone());
                }
            }
            for (j, lambda) in bound_duals.iter().enumerate() {
                if lambda.is_positive() && self.span.insert(&self.unit(j)) {
                    self.pinned.push(j);
                    grew = true;
                }
            }
            if !grew {
                return Err(Error::Internal(format!("stage {stages} did not reduce the optimal face")));
            }
            frozen.sort();
            match levels.last_mut() {
                Some((eps, keys)) if *eps == epsilon => {
                    keys.extend(frozen);
                    keys.sort();
                }
                _ if frozen.is_empty() => {}
                _ => levels.push((epsilon, frozen)),
            }
            let active = std::mem::take(&mut self.active);
            self.active = active.into_iter().filter(|k| self.is_open(k)).collect();
            last_x = Some(x);
        }
        let x = self.face_lp(0).feasible()?.ok_or(Error::EmptyImputationSet)?;
        Ok(Outcome { x, levels, stages })
    }
}
