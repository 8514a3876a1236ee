use nucleo::parse::parse_game;
use nucleo::rational::q;
use nucleo::{nucleolus, Engine, Rational, Representation};

fn solve(game: &str, engine: Engine) -> Vec<Rational> {
    nucleolus(&parse_game(game).unwrap(), engine).unwrap().x_star
}

fn w_bar(rep: &Representation) -> Vec<Rational> {
    rep.to_input_order(&rep.normalize().unwrap().weights)
}

fn eq3(n: usize) -> Representation {
    let mut w = vec![Rational::one()];
    w.extend(std::iter::repeat_n(Rational::from_integer(2), n - 1));
    Representation::new(q(2 * n as i64 - 1, 2), w).unwrap()
}

#[test]
fn eq3_family_alternates() {
    for n in 2..=10 {
        let rep = eq3(n);
        let expected: Vec<Rational> = if n % 2 == 0 {
            std::iter::once(Rational::zero()).chain(std::iter::repeat_n(q(1, n as i64 - 1), n - 1)).collect()
        } else {
            vec![q(1, n as i64); n]
        };
        for engine in [Engine::Brute, Engine::Typed] {
            assert_eq!(nucleolus(&rep, engine).unwrap().x_star, expected, "n = {n}, {engine}");
        }
    }
}

#[test]
fn sensitivity_triple_at_58_percent() {
    for (ones, coincides) in [(6, true), (7, false), (8, true)] {
        let game = format!("58%; 5*4 {ones}*1");
        let rep = parse_game(&game).unwrap();
        let x = solve(&game, Engine::Brute);
        assert_eq!(x, solve(&game, Engine::Typed));
        if coincides {
            assert_eq!(x, w_bar(&rep), "{game}");
        } else {
            let mut e = vec![q(1, 5); 5];
            e.extend(vec![Rational::zero(); ones]);
            assert_eq!(x, e, "{game}");
        }
    }
}

#[test]
fn replicas_of_five_four_three_two() {
    let base = Representation::from_ints(5, &[4, 3, 2]).unwrap();
    for rho in 2..=6 {
        let rep = base.replicate(rho).unwrap();
        assert_eq!(nucleolus(&rep, Engine::Typed).unwrap().x_star, w_bar(&rep), "rho = {rho}");
    }
    assert_ne!(nucleolus(&base, Engine::Typed).unwrap().x_star, w_bar(&base));
}

#[test]
fn flagship_typed_game() {
    let rep = parse_game("1500; 300*4 300*3 300*2").unwrap();
    let t = std::time::Instant::now();
    let res = nucleolus(&rep, Engine::Auto).unwrap();
    eprintln!("flagship: {:?}, {} stages", t.elapsed(), res.stages);
    assert_eq!(res.engine, Engine::Typed);
    assert_eq!(res.x_star, w_bar(&rep));
}
