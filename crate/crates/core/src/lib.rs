//! Rare-event simulation for multivariate compound Hawkes processes with
//! random marks.

pub mod cli;
pub mod estimate;
pub mod model;
pub mod numerics;
pub mod optimize;
pub mod simulate;
pub mod transforms;
pub mod twist;
