#![allow(clippy::needless_range_loop)]

pub mod cnum;
pub mod expr;
pub mod geometry;
pub mod invariants;
pub mod tensorcoords;
pub mod verify;
pub mod decision;
pub mod pseudo;
