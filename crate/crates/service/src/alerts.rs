//! Rolling-window disease alerting. An alert for a class opens when at
//! least `min_hits` of the last `window_size` frames contain that class at
//! or above the confidence floor, deduplicates while open, closes after
//! `window_size` consecutive non-qualifying frames, and may then reopen.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::types::ResponseDetection;
use coopwatch_core::dataset::ClassMap;

/// Alerting rule. The default confidence floor is the detector's best-F1
/// operating point; the window parameters debounce single-frame false
/// positives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlertRule {
    pub confidence_floor: f64,
    pub window_size: usize,
    pub min_hits: usize,
    /// When set, only these disease classes raise alerts.
    pub enabled_classes: Option<Vec<String>>,
}

impl Default for AlertRule {
    fn default() -> Self {
        Self { confidence_floor: 0.497, window_size: 5, min_hits: 3, enabled_classes: None }
    }
}

impl AlertRule {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.confidence_floor) {
            return Err(format!("confidence_floor {} outside [0, 1]", self.confidence_floor));
        }
        if self.min_hits < 1 || self.min_hits > self.window_size {
            return Err(format!(
                "min_hits {} must satisfy 1 <= N <= window_size {}",
                self.min_hits, self.window_size
            ));
        }
        Ok(())
    }

    pub fn class_enabled(&self, name: &str) -> bool {
        match &self.enabled_classes {
            None => true,
            Some(list) => list.iter().any(|c| c == name),
        }
    }
}

/// An opened alert. Append-only; totally ordered per stream by emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertEvent {
    pub stream_id: String,
    pub class_name: String,
    /// Ids of the qualifying frames inside the window at trigger time.
    pub window_frame_ids: Vec<String>,
    /// UTC, RFC 3339.
    pub triggered_at: String,
    pub rule: AlertRule,
}

#[derive(Debug, Clone)]
struct FrameObservation {
    frame_id: String,
    qualifying: Vec<bool>,
}

/// Per-stream window state over the monitored disease classes.
#[derive(Debug)]
pub struct StreamWindow {
    window: VecDeque<FrameObservation>,
    open: Vec<bool>,
}

/// Outcome of observing one frame: class indices that opened an alert,
/// with the qualifying frame ids from the window.
pub struct WindowOutcome {
    pub opened: Vec<(usize, Vec<String>)>,
}

impl StreamWindow {
    pub fn new(num_monitored: usize) -> Self {
        Self { window: VecDeque::new(), open: vec![false; num_monitored] }
    }

    pub fn open_classes(&self) -> &[bool] {
        &self.open
    }

    pub fn force_open(&mut self, class_idx: usize) {
        self.open[class_idx] = true;
    }

    /// Push one frame's qualifying flags and apply the open/close rules.
    pub fn observe(
        &mut self,
        frame_id: String,
        qualifying: Vec<bool>,
        rule: &AlertRule,
    ) -> WindowOutcome {
        assert_eq!(qualifying.len(), self.open.len());
        self.window.push_back(FrameObservation { frame_id, qualifying });
        while self.window.len() > rule.window_size {
            self.window.pop_front();
        }
        let mut opened = Vec::new();
        for class_idx in 0..self.open.len() {
            let hits: usize =
                self.window.iter().filter(|f| f.qualifying[class_idx]).count();
            if self.open[class_idx]
                && self.window.len() == rule.window_size
                && hits == 0
            {
                self.open[class_idx] = false;
            }
            if !self.open[class_idx] && hits >= rule.min_hits {
                self.open[class_idx] = true;
                let frame_ids = self
                    .window
                    .iter()
                    .filter(|f| f.qualifying[class_idx])
                    .map(|f| f.frame_id.clone())
                    .collect();
                opened.push((class_idx, frame_ids));
            }
        }
        WindowOutcome { opened }
    }
}

/// The disease classes a class map exposes to alerting: every class except
/// the one literally named "Healthy", filtered by the rule's toggles.
pub fn monitored_classes(class_map: &ClassMap, rule: &AlertRule) -> Vec<String> {
    class_map
        .names()
        .iter()
        .filter(|n| n.as_str() != "Healthy" && rule.class_enabled(n))
        .cloned()
        .collect()
}

/// Which monitored classes qualify in a frame's detections.
pub fn qualifying_classes(
    detections: &[ResponseDetection],
    monitored: &[String],
    rule: &AlertRule,
) -> Vec<bool> {
    monitored
        .iter()
        .map(|name| {
            detections
                .iter()
                .any(|d| d.class_name == *name && d.confidence >= rule.confidence_floor)
        })
        .collect()
}

/// Replayable record written to the alert log: opened events plus closure
/// markers, so open state can be rebuilt after a restart.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlertLogRecord {
    Opened { event: AlertEvent },
    Closed { stream_id: String, class_name: String, closed_at: String },
}

/// Rebuild (all opened events, currently-open per stream/class) from a
/// replayed alert log.
pub fn replay_alert_log(
    records: &[AlertLogRecord],
) -> (Vec<AlertEvent>, BTreeMap<(String, String), bool>) {
    let mut events = Vec::new();
    let mut open = BTreeMap::new();
    for r in records {
        match r {
            AlertLogRecord::Opened { event } => {
                open.insert((event.stream_id.clone(), event.class_name.clone()), true);
                events.push(event.clone());
            }
            AlertLogRecord::Closed { stream_id, class_name, .. } => {
                open.insert((stream_id.clone(), class_name.clone()), false);
            }
        }
    }
    (events, open)
}
