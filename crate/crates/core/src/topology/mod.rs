//! Experiments on traces: far components, colour intersections, fiber visits
//! and embedded Galton-Watson processes.

mod ends;
mod fiber;
mod gw;
mod lag;
mod purple;

pub use ends::{ends_profile, EndsProfile};
pub use fiber::{fiber_hit_stats, FiberHitStats};
pub use gw::{embedded_gw_stats, EmbeddedGWStats, EmbeddedLine, GwConfig, GwRoute};
pub use lag::{biased_product_kernel, lazy_tree_kernel, min_supercritical_lag, LagReport, EXACT_LAG_LIMIT};
pub use purple::{purple_experiment, ColoredTrace};
