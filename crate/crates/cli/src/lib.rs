//! Configuration, output and mode dispatch for the `smfdrop` binary.

// `!(x > y)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
