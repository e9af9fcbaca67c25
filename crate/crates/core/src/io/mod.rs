//! File formats: goal lists, shape grids, reference trajectories, parameter
//! files, traces, metric summaries and SVG snapshots.

mod goals;
mod grid;
mod params;
mod svg;
mod trace;
mod trajectory;

pub use goals::{load_goals, parse_goals, write_goals};
pub use grid::{load_grid, parse_grid};
pub use params::{apply_params, load_params, parse_params, ParamEntry};
pub use svg::{render_svg, Backdrop};
pub use trace::{read_trace, write_metrics, TraceWriter, TRACE_HEADER};
pub use trajectory::{load_trajectory, parse_trajectory, write_trajectory};
