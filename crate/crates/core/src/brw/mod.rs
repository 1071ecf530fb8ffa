//! Branching random walks: offspring laws, aggregated simulation and the
//! many-to-one identity.

mod many_to_one;
mod offspring;
mod simulate;

pub use many_to_one::{many_to_one_batch, many_to_one_check, ManyToOneReport};
pub use offspring::{critical_offspring, OffspringDist};
pub(crate) use offspring::binomial;
pub(crate) use simulate::advance;
pub use simulate::{simulate_brw, GenerationState, Retention, RunConfig, TraceRecord};
