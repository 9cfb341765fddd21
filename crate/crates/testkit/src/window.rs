//! Brute-force simulator for the N-of-M alert window rule. Window counts
//! are recomputed from the full frame history on every step instead of
//! being maintained incrementally.

/// Frame indices at which an alert opens for one class, given per-frame
/// qualifying flags. An alert opens when at least `min_hits` of the last
/// `window_size` frames qualify and no alert is already open; it closes
/// after `window_size` consecutive non-qualifying frames.
pub fn simulate_alerts(qualifying: &[bool], min_hits: usize, window_size: usize) -> Vec<usize> {
    assert!(min_hits >= 1 && min_hits <= window_size);
    let mut events = Vec::new();
    let mut open = false;
    for i in 0..qualifying.len() {
        let start = (i + 1).saturating_sub(window_size);
        let hits = qualifying[start..=i].iter().filter(|&&q| q).count();

        if open {
            let run_start = (i + 1).saturating_sub(window_size);
            let closed = i + 1 >= window_size
                && qualifying[run_start..=i].iter().all(|&q| !q);
            if closed {
                open = false;
            }
        }
        if !open && hits >= min_hits {
            events.push(i);
            open = true;
        }
    }
    events
}
