//! Decay fits, bound checks and the overview table.

mod bounds;
mod fit;
mod table1;

pub use bounds::{
    check_bound, fit_tail_constant, lower_bound_chain, tail_bound_check, tail_to_pointwise, todd_check, BoundForm,
    BoundReport, BoundSpec, ChainRow, Direction, IndexMargin, PointwiseBound, TailBoundReport, TailRow, ToddReport,
    ToddRow, ROUNDING_SLACK,
};
pub use fit::{default_window, fit_decay, fit_points, linear_fit, DecayFit, DecayModel};
pub use table1::{table1_summary, Table1, Table1Cell, Table1Input, OPEN_LABEL, TABLE1_SCHEMA_VERSION};
