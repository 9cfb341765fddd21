//! The incremental stream window must agree with the brute-force window
//! simulator on random frame sequences, including deduplication while an
//! alert is open and reopening after a quiet window.

use coopwatch_service::alerts::{AlertRule, StreamWindow};
use coopwatch_testkit::window::simulate_alerts;
use coopwatch_testkit::InstanceGen;
use rand::Rng;

fn drive(flags: &[bool], min_hits: usize, window_size: usize) -> Vec<usize> {
    let rule = AlertRule { min_hits, window_size, ..Default::default() };
    let mut window = StreamWindow::new(1);
    let mut opened = Vec::new();
    for (i, &q) in flags.iter().enumerate() {
        let outcome = window.observe(format!("f{i}"), vec![q], &rule);
        if !outcome.opened.is_empty() {
            opened.push(i);
        }
    }
    opened
}

#[test]
fn window_engine_matches_simulator_on_random_sequences() {
    let mut gen = InstanceGen::new(4242);
    for case in 0..600 {
        let len = gen.rng().random_range(0..=100);
        let density = gen.rng().random_range(0.1..0.9);
        let flags: Vec<bool> = (0..len).map(|_| gen.rng().random_bool(density)).collect();
        let window_size = gen.rng().random_range(1..=8);
        let min_hits = gen.rng().random_range(1..=window_size);

        let engine = drive(&flags, min_hits, window_size);
        let simulated = simulate_alerts(&flags, min_hits, window_size);
        assert_eq!(
            engine, simulated,
            "case {case}: N={min_hits} M={window_size} flags={flags:?}"
        );
    }
}

#[test]
fn classes_are_tracked_independently() {
    let rule = AlertRule { min_hits: 2, window_size: 3, ..Default::default() };
    let mut window = StreamWindow::new(2);
    // class 0 qualifies on frames 0 and 1; class 1 on frames 1 and 2
    let frames = vec![vec![true, false], vec![true, true], vec![false, true]];
    let mut opened: Vec<(usize, usize)> = Vec::new();
    for (i, q) in frames.into_iter().enumerate() {
        for (class_idx, _) in window.observe(format!("f{i}"), q, &rule).opened {
            opened.push((i, class_idx));
        }
    }
    assert_eq!(opened, vec![(1, 0), (2, 1)]);
}

#[test]
fn event_count_equals_maximal_qualifying_episodes() {
    // two separated episodes across a long random-ish trace
    let mut flags = vec![true, true, true, true];
    flags.extend([false; 4]);
    flags.extend([true, false, true, true]);
    flags.extend([false; 4]);
    let opened = drive(&flags, 3, 4);
    let simulated = simulate_alerts(&flags, 3, 4);
    assert_eq!(opened, simulated);
    assert_eq!(opened.len(), 2);
}
