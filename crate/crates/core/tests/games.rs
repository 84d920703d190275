use ppcg::pcp::{random_instance, GeneratorParams, SearchBudget};
use ppcg::protocol::{run_game, Agent, FailureSite, GameConfig, GameTranscript, Verdict};
use ppcg::strategies::{ClassicalCheat, ClassicalHonest, QuantumCheat};
use ppcg::{PcpInstance, Rational};

fn inst(pairs: &[(&str, &str)]) -> PcpInstance {
    PcpInstance::from_pairs(pairs).unwrap()
}

fn honest() -> ClassicalHonest {
    ClassicalHonest::new(SearchBudget::new(100_000, 32))
}

fn rat(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Pool sizes relative to the submitted count must be 1/2, 1/8 and 1/24.
fn assert_fractions(tx: &GameTranscript) {
    for rec in &tx.per_domino {
        let n = rat(&rec.pool_sizes.submitted);
        for (size, frac) in [
            (&rec.pool_sizes.after_step1, rat("1/2")),
            (&rec.pool_sizes.after_step2, rat("1/8")),
            (&rec.pool_sizes.after_step4, rat("1/24")),
        ] {
            if size.is_empty() {
                continue;
            }
            let got: f64 = size.parse().unwrap();
            let want = ppcg::Probability::approx_f64(&(n.clone() * frac));
            assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
        }
    }
}

fn assert_discipline(tx: &GameTranscript) {
    for m in &tx.messages {
        let pair = (m.from, m.to);
        if pair == (Agent::V2, Agent::V1) {
            panic!("V2 must never message V1");
        }
        if pair == (Agent::V1, Agent::V2) {
            assert!(m.content.starts_with("devices and"), "unexpected V1→V2 message: {}", m.content);
        }
    }
}

#[test]
fn quantum_cheat_wins_exact() {
    let i = inst(&[("121", "34"), ("2", "41")]);
    let tx = run_game(&i, &QuantumCheat::default(), &GameConfig::exact(1)).unwrap();
    assert_eq!(tx.verdict, Verdict::Win, "{}", tx.to_json());
    assert_eq!(tx.decoded[0].numerator(), "121");
    assert_eq!(tx.decoded[0].denominator(), "121");
    assert_eq!(tx.decoded[1].numerator(), "2");
    assert_eq!(tx.decoded[1].denominator(), "41");
    assert_fractions(&tx);
    assert_discipline(&tx);
}

#[test]
fn quantum_cheat_right_instruction() {
    let i = inst(&[("34", "121")]);
    let tx = run_game(&i, &QuantumCheat::default(), &GameConfig::exact(1)).unwrap();
    assert!(tx.is_win());
    assert_eq!(tx.decoded[0].numerator(), "121");
    assert_eq!(tx.decoded[0].denominator(), "121");
}

#[test]
fn quantum_cheat_with_phases_wins() {
    let i = inst(&[("13", "2")]);
    let tx = run_game(&i, &QuantumCheat::with_phases([0.3, 1.7, 4.0, 2.2]), &GameConfig::exact(4)).unwrap();
    assert!(tx.is_win(), "{}", tx.to_json());
}

#[test]
fn classical_cheat_caught_exact() {
    let i = inst(&[("121", "34"), ("2", "41")]);
    let tx = run_game(&i, &ClassicalCheat, &GameConfig::exact(1)).unwrap();
    assert_eq!(tx.verdict, Verdict::Lose);
    assert_eq!(tx.failure_site, Some(FailureSite::Step3));
}

#[test]
fn classical_cheat_on_degenerate_domino_wins() {
    let i = inst(&[("23", "23"), ("1", "4")]);
    assert!(run_game(&i, &ClassicalCheat, &GameConfig::exact(1)).unwrap().is_win());
}

#[test]
fn honest_examples() {
    let cfg = GameConfig::exact(3);
    assert!(run_game(&inst(&[("12", "12")]), &honest(), &cfg).unwrap().is_win());
    let tx = run_game(&inst(&[("1", "111"), ("11", "1")]), &honest(), &cfg).unwrap();
    assert!(tx.is_win());
    assert_fractions(&tx);
    let tx = run_game(&inst(&[("1", "11")]), &honest(), &cfg).unwrap();
    assert!(tx.is_win());
    assert_eq!(tx.claim, ppcg::Arrangement::NoMatch);
}

#[test]
fn honest_with_small_budget_loses_to_referee() {
    // shortest match has length 4
    let i = inst(&[("1", "211"), ("12", "11"), ("221", "22")]);
    let weak = ClassicalHonest::new(SearchBudget::new(100_000, 3));
    let tx = run_game(&i, &weak, &GameConfig::exact(0)).unwrap();
    assert_eq!(tx.claim, ppcg::Arrangement::NoMatch);
    assert_eq!(tx.failure_site, Some(FailureSite::RefereeFoundMatch));
    assert!(run_game(&i, &honest(), &GameConfig::exact(0)).unwrap().is_win());
}

#[test]
fn replay_is_byte_identical() {
    let i = inst(&[("12", "34"), ("3", "21")]);
    for cfg in [GameConfig::exact(9), GameConfig::sampled(9)] {
        let a = run_game(&i, &QuantumCheat::default(), &cfg).unwrap().to_json();
        let b = run_game(&i, &QuantumCheat::default(), &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }
}

#[test]
fn wins_have_no_failed_checks() {
    for seed in 0..20 {
        let params = GeneratorParams { num_dominoes: 3, max_string_len: 3, ensure_nontrivial: true };
        let i = random_instance(params, seed).unwrap();
        for tx in [
            run_game(&i, &QuantumCheat::default(), &GameConfig::exact(seed)).unwrap(),
            run_game(&i, &ClassicalCheat, &GameConfig::exact(seed)).unwrap(),
            run_game(&i, &honest(), &GameConfig::exact(seed)).unwrap(),
        ] {
            if tx.is_win() {
                assert_eq!(tx.failed_checks(), 0);
                assert!(tx.failure.is_none());
            } else {
                assert!(tx.failure_site.is_some());
            }
            assert_fractions(&tx);
            assert_discipline(&tx);
        }
    }
}

#[test]
fn sampled_game_runs_and_conserves_boxes() {
    let i = inst(&[("12", "34"), ("3", "21"), ("41", "2")]);
    let tx = run_game(&i, &QuantumCheat::default(), &GameConfig::sampled(5)).unwrap();
    assert!(tx.is_win(), "{}", tx.to_json());
    assert_fractions(&tx);
    let tx = run_game(&i, &ClassicalCheat, &GameConfig::sampled(5)).unwrap();
    assert_eq!(tx.failure_site, Some(FailureSite::Step3));
}
