//! placeholder
pub struct Report;
