//! Game sequences, nucleolus convergence tables and their CSV/JSON reports.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::Representation;
use crate::nucleolus::{nucleolus_with, Engine, SolverOptions};
use crate::rational::Rational;
use crate::theory::{l1_distance, lemma_bound, normalized_weights};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `[(2n−1)/2; 1, 2, …, 2]` with `n` players.
    Eq3,
    /// `ρ`-replicas of a base game.
    Replica(Representation),
    /// An explicit list, indexed from 1.
    Custom(Vec<Representation>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Eq3 => "eq3",
            Family::Replica(_) => "replica",
            Family::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSpec {
    pub family: Family,
    /// Inclusive parameter range: `n` for eq3, `ρ` for replicas, list position for custom.
    pub start: usize,
    pub end: usize,
}

impl SequenceSpec {
    pub fn new(family: Family, start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidSequence(format!("range {start}..{end} is descending")));
        }
        let first = match &family {
            Family::Eq3 => 2,
            _ => 1,
        };
        if start < first {
            return Err(Error::InvalidSequence(format!("{} range must start at {first} or above", family.name())));
        }
        if let Family::Custom(list) = &family {
            if end > list.len() {
                return Err(Error::InvalidSequence(format!("custom list has only {} games", list.len())));
            }
        }
        Ok(SequenceSpec { family, start, end })
    }

    /// `(parameter, game)` for every parameter in the range.
    pub fn games(&self) -> Result<Vec<(usize, Representation)>> {
        (self.start..=self.end)
            .map(|p| {
                let rep = match &self.family {
                    Family::Eq3 => eq3_game(p)?,
                    Family::Replica(base) => base.replicate(p)?,
                    Family::Custom(list) => list[p - 1].clone(),
                };
                Ok((p, rep))
            })
            .collect()
    }

    /// `<family>_<start>-<end>.<ext>`
    pub fn file_name(&self, format: ReportFormat) -> String {
        format!("{}_{}-{}.{}", self.family.name(), self.start, self.end, format.extension())
    }
}

/// `[(2n−1)/2; 1, 2, …, 2]`.
pub fn eq3_game(n: usize) -> Result<Representation> {
    if n < 2 {
        return Err(Error::InvalidSequence("the eq3 family needs n >= 2".into()));
    }
    let mut weights = vec![Rational::one()];
    weights.extend(std::iter::repeat_n(Rational::from_integer(2), n - 1));
    Representation::new(Rational::new(2 * n as i64 - 1, 2), weights)
}

/// A pair of players compared by `x*_i / x*_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatioPair {
    /// 1-based input positions.
    Players(usize, usize),
    /// Weight values; the first player of each weight represents its type.
    Types(Rational, Rational),
}

impl RatioPair {
    pub fn label(&self) -> String {
        match self {
            RatioPair::Players(i, j) => format!("{i}_{j}"),
            RatioPair::Types(a, b) => format!("w{}_w{}", a.to_string().replace('/', "over"), b.to_string().replace('/', "over")),
        }
    }

    fn resolve(&self, rep: &Representation) -> Result<(usize, usize)> {
        let weights = rep.input_weights();
        match self {
            RatioPair::Players(i, j) => {
                for &p in [i, j] {
                    if p == 0 || p > rep.n() {
                        return Err(Error::DimensionMismatch { expected: rep.n(), found: p });
                    }
                }
                Ok((i - 1, j - 1))
            }
            RatioPair::Types(a, b) => {
                let find = |w: &Rational| weights.iter().position(|x| x == w).ok_or(Error::WeightAbsent(w.to_string()));
                Ok((find(a)?, find(b)?))
            }
        }
    }
}

impl FromStr for RatioPair {
    type Err = Error;

    /// `i,j` for players or `w4,w2` for weight types.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSequence(format!("bad pair `{s}`; expected `i,j` or `wA,wB`"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let (a, b) = (a.trim(), b.trim());
        match (a.strip_prefix('w'), b.strip_prefix('w')) {
            (Some(a), Some(b)) => Ok(RatioPair::Types(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)),
            (None, None) => Ok(RatioPair::Players(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioCell {
    pub pair: String,
    /// `x*_i / x*_j`, `None` when `x*_j = 0`.
    pub ratio: Option<Rational>,
    /// `w_i / w_j`
    pub target: Option<Rational>,
    /// `m_ω·w̄_ω` for the weight classes of `i` and `j`.
    pub reg_i: Rational,
    pub reg_j: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceRow {
    pub param: usize,
    /// Number of players.
    pub n: usize,
    pub x_star: Vec<Rational>,
    pub l1_gap: Rational,
    /// `None` when `q̄ = 1`.
    pub bound: Option<Rational>,
    pub ratios: Vec<RatioCell>,
}

pub fn run_sequence(spec: &SequenceSpec, pairs: &[RatioPair], engine: Engine, options: &SolverOptions) -> Result<Vec<ConvergenceRow>> {
    spec.games()?.into_iter().map(|(param, rep)| row(param, &rep, pairs, engine, options)).collect()
}

fn row(param: usize, rep: &Representation, pairs: &[RatioPair], engine: Engine, options: &SolverOptions) -> Result<ConvergenceRow> {
    let x = nucleolus_with(rep, engine, options)?.x_star;
    let w = normalized_weights(rep)?;
    let input = rep.input_weights();
    let table = rep.weight_types();
    let reg = |i: usize| Rational::from_integer(table.multiplicity(&input[i]) as i64) * &w[i];
    let ratios = pairs
        .iter()
        .map(|pair| {
            let (i, j) = pair.resolve(rep)?;
            let quotient = |a: &Rational, b: &Rational| if b.is_zero() { None } else { Some(a / b) };
            Ok(RatioCell {
                pair: pair.label(),
                ratio: quotient(&x[i], &x[j]),
                target: quotient(&input[i], &input[j]),
                reg_i: reg(i),
                reg_j: reg(j),
            })
        })
        .collect::<Result<_>>()?;
    let bound = match lemma_bound(rep) {
        Ok(b) => Some(b),
        Err(Error::DegenerateQuota) => None,
        Err(e) => return Err(e),
    };
    Ok(ConvergenceRow { param, n: rep.n(), l1_gap: l1_distance(&x, &w), bound, x_star: x, ratios })
}

/// The first parameter from which every later row has zero gap.
pub fn coincidence_onset(rows: &[ConvergenceRow]) -> Option<usize> {
    let tail = rows.iter().rev().take_while(|r| r.l1_gap.is_zero()).count();
    (tail > 0).then(|| rows[rows.len() - tail].param)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

fn opt_fraction(r: &Option<Rational>) -> String {
    r.as_ref().map_or("undefined".to_string(), Rational::to_fraction_string)
}

fn opt_approx(r: &Option<Rational>) -> String {
    r.as_ref().map_or("undefined".to_string(), Rational::approx)
}

#[derive(Serialize)]
struct JsonRatio<'a> {
    pair: &'a str,
    ratio: String,
    ratio_approx: String,
    target: String,
    reg_i: &'a Rational,
    reg_j: &'a Rational,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    n: usize,
    param: usize,
    gap: &'a Rational,
    bound: Option<&'a Rational>,
    ratios: Vec<JsonRatio<'a>>,
}

/// Report text; identical rows give identical bytes.
pub fn emit_report(rows: &[ConvergenceRow], format: &str) -> Result<String> {
    let format: ReportFormat = format.parse()?;
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("n,gap_num,gap_den,bound_num,bound_den");
            for cell in &rows[0].ratios {
                let p = &cell.pair;
                let _ = write!(out, ",ratio_{p},ratio_{p}_approx,target_{p},reg_i_{p},reg_j_{p}");
            }
            out.push('\n');
            for r in rows {
                let (bn, bd) = r.bound.as_ref().map_or((String::new(), String::new()), |b| {
                    (b.numer().to_string(), b.denom().to_string())
                });
                let _ = write!(out, "{},{},{},{bn},{bd}", r.n, r.l1_gap.numer(), r.l1_gap.denom());
                for c in &r.ratios {
                    let _ = write!(
                        out,
                        ",{},{},{},{},{}",
                        opt_fraction(&c.ratio),
                        opt_approx(&c.ratio),
                        opt_fraction(&c.target),
                        c.reg_i.to_fraction_string(),
                        c.reg_j.to_fraction_string()
                    );
                }
                out.push('\n');
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let json: Vec<JsonRow> = rows
                .iter()
                .map(|r| JsonRow {
                    n: r.n,
                    param: r.param,
                    gap: &r.l1_gap,
                    bound: r.bound.as_ref(),
                    ratios: r
                        .ratios
                        .iter()
                        .map(|c| JsonRatio {
                            pair: &c.pair,
                            ratio: opt_fraction(&c.ratio),
                            ratio_approx: opt_approx(&c.ratio),
                            target: opt_fraction(&c.target),
                            reg_i: &c.reg_i,
                            reg_j: &c.reg_j,
                        })
                        .collect(),
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&serde_json::json!({ "rows": json }))
                .map_err(|e| Error::Internal(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_game;
    use crate::rational::q;

    fn run(spec: &SequenceSpec, pairs: &[RatioPair]) -> Vec<ConvergenceRow> {
        run_sequence(spec, pairs, Engine::Auto, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn eq3_ratio_alternates() {
        let spec = SequenceSpec::new(Family::Eq3, 2, 9).unwrap();
        let rows = run(&spec, &[RatioPair::Players(1, 2)]);
        for r in &rows {
            let expected = if r.n % 2 == 0 { q(0, 1) } else { q(1, 1) };
            assert_eq!(r.ratios[0].ratio, Some(expected));
            assert_eq!(r.ratios[0].target, Some(q(1, 2)));
            assert!(&r.l1_gap <= r.bound.as_ref().unwrap());
        }
    }

    #[test]
    fn replica_gap_vanishes_from_two() {
        let base = parse_game("5; 4 3 2").unwrap();
        let spec = SequenceSpec::new(Family::Replica(base.clone()), 1, 6).unwrap();
        let rows = run(&spec, &[RatioPair::Types(q(4, 1), q(2, 1))]);
        assert!(rows[0].l1_gap.is_positive());
        assert!(rows[1..].iter().all(|r| r.l1_gap.is_zero()));
        assert!(rows[1..].iter().all(|r| r.ratios[0].ratio == Some(q(2, 1))));
        assert_eq!(coincidence_onset(&rows), Some(2));
        assert!(2 <= crate::theory::replica_threshold(&base).unwrap());
        // the bound shrinks with the largest normalized weight
        assert!(rows.windows(2).all(|w| w[1].bound < w[0].bound));
    }

    #[test]
    fn single_replica_of_four_player_game() {
        let spec = SequenceSpec::new(Family::Replica(parse_game("8; 6 4 3 2").unwrap()), 1, 1).unwrap();
        assert_eq!(run(&spec, &[])[0].l1_gap, q(2, 15));
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(SequenceSpec::new(Family::Eq3, 4, 1), Err(Error::InvalidSequence(_))));
        assert!(SequenceSpec::new(Family::Eq3, 1, 3).is_err());
        assert!(SequenceSpec::new(Family::Custom(vec![parse_game("1; 1").unwrap()]), 1, 2).is_err());
        let spec = SequenceSpec::new(Family::Eq3, 2, 9).unwrap();
        assert_eq!(spec.file_name(ReportFormat::Csv), "eq3_2-9.csv");
        assert_eq!("2,3".parse::<RatioPair>().unwrap(), RatioPair::Players(2, 3));
        assert_eq!("w4, w2".parse::<RatioPair>().unwrap(), RatioPair::Types(q(4, 1), q(2, 1)));
        assert!("w4,2".parse::<RatioPair>().is_err());
    }

    #[test]
    fn csv_report() {
        let spec = SequenceSpec::new(Family::Eq3, 2, 5).unwrap();
        let rows = run(&spec, &[RatioPair::Players(1, 2)]);
        let csv = emit_report(&rows, "csv").unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[0],
            "n,gap_num,gap_den,bound_num,bound_den,ratio_1_2,ratio_1_2_approx,target_1_2,reg_i_1_2,reg_j_1_2"
        );
        let ratio_col: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(5).unwrap()).collect();
        assert_eq!(ratio_col, ["0/1", "1/1", "0/1", "1/1"]);
        assert_eq!(csv, emit_report(&rows, "csv").unwrap());
        let one = emit_report(&rows[..1], "csv").unwrap();
        assert_eq!(one.lines().count(), 2);
    }

    #[test]
    fn undefined_ratio() {
        let spec = SequenceSpec::new(Family::Eq3, 4, 4).unwrap();
        let rows = run(&spec, &[RatioPair::Players(2, 1)]);
        assert_eq!(rows[0].ratios[0].ratio, None);
        let csv = emit_report(&rows, "csv").unwrap();
        assert!(csv.lines().nth(1).unwrap().contains(",undefined,undefined,"));
    }

    #[test]
    fn json_report_and_errors() {
        let spec = SequenceSpec::new(Family::Eq3, 2, 3).unwrap();
        let rows = run(&spec, &[RatioPair::Players(1, 2)]);
        let json = emit_report(&rows, "json").unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"][1]["ratios"][0]["ratio"], "1/1");
        assert_eq!(v["rows"][0]["gap"], rows[0].l1_gap.to_fraction_string());
        assert_eq!(emit_report(&rows, "xml"), Err(Error::UnknownFormat("xml".into())));
        assert_eq!(emit_report(&[], "csv"), Err(Error::EmptyReport));
    }
}
