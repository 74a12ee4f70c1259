//! Static analysis of personal-data handling in apps expressed in a small IR.

pub mod cli;
pub mod dataset;
pub mod findings;
pub mod graph;
pub mod ir;
pub mod report;
pub mod sites;
pub mod sources;
pub mod taint;
