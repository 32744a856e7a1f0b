//! Link lifetime computation for UAV networks flying smooth trajectories.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod kinematics;
pub mod llt;
pub mod mobility;
pub mod network;
pub mod oracle;
pub mod routing;
pub mod scenario;
pub mod validate;
