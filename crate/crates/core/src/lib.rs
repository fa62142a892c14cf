#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod frame;
pub mod grid;
pub mod criteria;
pub mod constructions;
pub mod liouville4d;
pub mod dynamics;
pub mod expr;
pub mod pairfile;
pub mod registry;
pub mod selftest;
pub mod config;
pub mod report;
pub mod cli;
