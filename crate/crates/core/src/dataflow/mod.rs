//! Intra-procedural analyses shared by tagging, taint and rules.

pub mod consts;
