//! Computational toolkit for relatively hyperbolic groups: combinatorial
//! horoballs, cusped spaces, homological bicombings, preferred paths and
//! Dehn filling experiments.

pub mod chain;
pub mod cusped;
pub mod experiments;
pub mod filling;
pub mod graph;
pub mod horoball;
pub mod metric;
pub mod mineyev;
pub mod oracle;
pub mod parabolic;
pub mod preferred;
pub mod presentation;
pub mod rewrite;
pub mod word;
