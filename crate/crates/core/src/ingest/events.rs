use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};

use super::{EventKind, TrafficEvent};
use crate::weights::RoadWorkSeverity;

/// Preliminary accident reports stop counting after this long.
pub const ACCIDENT_PRELIMINARY_WINDOW: Duration = Duration::minutes(30);

/// Events replaced by another event present in the same list are dropped.
fn live_events(events: &[TrafficEvent]) -> impl Iterator<Item = &TrafficEvent> {
    let ids: BTreeSet<&str> = events.iter().map(|e| e.event_id.as_str()).collect();
    events.iter().filter(move |e| match &e.superseded_by {
        Some(next) => !ids.contains(next.as_str()),
        None => true,
    })
}

/// Key linking the alerts of one accident: the situation id, or the
/// affected location when no id is given.
fn situation_key(e: &TrafficEvent) -> String {
    match &e.situation_id {
        Some(id) => format!("id:{id}"),
        None => {
            let loc = serde_json::to_string(&e.affected).unwrap_or_default();
            format!("loc:{loc}")
        }
    }
}

/// Segments with an active accident at `now`.
///
/// A segment has an accident when a preliminary report on it was published
/// within the last 30 minutes, or when an accident report or general
/// accident announcement on it has no later "ended" event for the same
/// situation. Events published after `now` are ignored. Event locations
/// must already be resolved to segment ids.
pub fn accident_active(events: &[TrafficEvent], now: DateTime<Utc>) -> BTreeMap<String, bool> {
    let visible: Vec<&TrafficEvent> = live_events(events).filter(|e| e.published_at <= now).collect();

    let mut last_ended: BTreeMap<String, DateTime<Utc>> = BTreeMap::new();
    for e in visible.iter().filter(|e| e.kind == EventKind::Ended) {
        let slot = last_ended.entry(situation_key(e)).or_insert(e.published_at);
        *slot = (*slot).max(e.published_at);
    }

    let mut out: BTreeMap<String, bool> = BTreeMap::new();
    for e in visible.iter().filter(|e| e.is_accident()) {
        let active = match e.kind {
            EventKind::AccidentPreliminary => now - e.published_at <= ACCIDENT_PRELIMINARY_WINDOW,
            _ => match last_ended.get(&situation_key(e)) {
                Some(ended) => *ended < e.published_at,
                None => true,
            },
        };
        for seg in &e.affected.segments {
            *out.entry(seg.clone()).or_insert(false) |= active;
        }
    }
    out
}

/// Most severe road work covering the segment. Working hours are not
/// considered; every listed work site counts as active.
pub fn roadwork_severity_for_segment(events: &[TrafficEvent], segment_id: &str) -> RoadWorkSeverity {
    live_events(events)
        .filter(|e| e.kind == EventKind::RoadWork && e.affected.segments.iter().any(|s| s == segment_id))
        .filter_map(|e| e.severity)
        .max()
        .unwrap_or_default()
}

/// [`roadwork_severity_for_segment`] for every segment named by an event.
pub fn roadwork_severity_by_segment(events: &[TrafficEvent]) -> BTreeMap<String, RoadWorkSeverity> {
    let mut out: BTreeMap<String, RoadWorkSeverity> = BTreeMap::new();
    for e in live_events(events).filter(|e| e.kind == EventKind::RoadWork) {
        let sev = e.severity.unwrap_or_default();
        for seg in &e.affected.segments {
            let slot = out.entry(seg.clone()).or_default();
            *slot = (*slot).max(sev);
        }
    }
    out
}
