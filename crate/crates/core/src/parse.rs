//! Text format for games.
//!
//! ```text
//! # comment
//! 58% ; 5*4 7*1
//! ```
//!
//! The first non-comment line holds `quota ; weights`. Tokens are integers,
//! fractions `p/q` or decimals. The quota may be a percentage of the total
//! weight, and a weight token `k*w` stands for `k` copies of `w`.

use crate::error::{Error, Result};
use crate::game::Representation;
use crate::rational::Rational;

fn number(token: &str, line: usize) -> Result<Rational> {
    token.parse().map_err(|_| Error::Parse { line, message: format!("`{token}` is not a number") })
}

/// Parses a game from file contents or an inline string.
pub fn parse_game(text: &str) -> Result<Representation> {
    let (line_no, line) = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .ok_or(Error::Parse { line: 0, message: "no game line found".into() })?;
    let (quota_tok, weights_tok) = line
        .split_once(';')
        .ok_or(Error::Parse { line: line_no, message: "expected `quota ; weights`".into() })?;

    let mut weights = Vec::new();
    for tok in weights_tok.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        match tok.split_once('*') {
            Some((k, w)) => {
                let k: usize = k.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad repeat count in `{tok}`"),
                })?;
                let w = number(w, line_no)?;
                weights.extend(std::iter::repeat_n(w, k));
            }
            None => weights.push(number(tok, line_no)?),
        }
    }
    if weights.is_empty() {
        return Err(Error::EmptyPlayerSet);
    }

    let quota_tok = quota_tok.trim();
    let quota = match quota_tok.strip_suffix('%') {
        Some(pct) => {
            let total: Rational = weights.iter().sum();
            &number(pct.trim(), line_no)? * &total / Rational::from_integer(100)
        }
        None => number(quota_tok, line_no)?,
    };
    Representation::new(quota, weights)
}

/// Inverse of [`parse_game`] for a representation (input order, exact quota).
pub fn format_game(rep: &Representation) -> String {
    let weights: Vec<String> = rep.input_weights().iter().map(ToString::to_string).collect();
    format!("{} ; {}", rep.quota(), weights.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn plain_and_commented() {
        let r = parse_game("# a game\n\n8; 6 4 3 2\n").unwrap();
        assert_eq!(r, Representation::from_ints(8, &[6, 4, 3, 2]).unwrap());
    }

    #[test]
    fn run_length_weights() {
        let r = parse_game("1500; 300*4 300*3 300*2").unwrap();
        assert_eq!(r.n(), 900);
        assert_eq!(r.weight_types().counts(), vec![300, 300, 300]);
    }

    #[test]
    fn percentage_quota_is_exact() {
        let r = parse_game("58%; 5*4 7*1").unwrap();
        assert_eq!(r.quota(), &q(27 * 58, 100));
        assert_eq!(r.normalize().unwrap().quota, q(29, 50));
    }

    #[test]
    fn fractions_and_decimals() {
        let r = parse_game("0.5; 9/20 9/20 1/10").unwrap();
        assert_eq!(r.quota(), &q(1, 2));
        assert_eq!(r.weights()[2], q(1, 10));
        let r = parse_game("7/2 ; 1, 2, 2, 2").unwrap();
        assert_eq!(r.quota(), &q(7, 2));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_game("5; 1 1"), Err(Error::QuotaExceedsTotalWeight { .. })));
        assert!(matches!(parse_game("5 1 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_game("# only\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_game("3; 1 x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_game("3; a*2"), Err(Error::Parse { .. })));
        assert_eq!(parse_game("3;"), Err(Error::EmptyPlayerSet));
    }

    #[test]
    fn format_round_trips() {
        for s in ["8 ; 6 4 3 2", "7/2 ; 1 2 2 2", "1 ; 1 0"] {
            let r = parse_game(s).unwrap();
            assert_eq!(format_game(&r), s);
            assert_eq!(parse_game(&format_game(&r)).unwrap(), r);
        }
    }
}
