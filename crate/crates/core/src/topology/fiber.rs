use serde::Serialize;

use crate::brw::{Retention, TraceRecord};
use crate::error::{Error, Result};
use crate::graph::VertexAddr;

/// Occupancy of the fiber `{v} x Z` (all vertices whose coordinate `factor`
/// equals `v`) over the generations of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberHitStats {
    pub fiber: String,
    pub hits: Vec<u32>,
    pub last_hit: Option<u32>,
    pub generations: u32,
}

pub fn fiber_hit_stats(trace: &TraceRecord, factor: usize, v: &VertexAddr) -> Result<FiberHitStats> {
    if trace.retention != Retention::All {
        return Err(Error::Unavailable(
            "fiber hits need every generation state; run with full retention".into(),
        ));
    }
    let on_fiber = |u: &VertexAddr| u.coordinate(factor) == Some(v);
    if !on_fiber(&trace.origin) && trace.origin.coordinate(factor).is_none() {
        return Err(Error::address(format!("{} has no coordinate {factor}", trace.origin)));
    }
    let hits: Vec<u32> = trace
        .states
        .iter()
        .chain(std::iter::once(&trace.last))
        .filter(|s| s.counts.keys().any(on_fiber))
        .map(|s| s.generation)
        .collect();
    Ok(FiberHitStats {
        fiber: v.to_string(),
        last_hit: hits.last().copied(),
        hits,
        generations: trace.generations(),
    })
}
