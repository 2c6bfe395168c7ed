pub mod special;
pub mod quadrature;
pub mod error;
pub mod rootsys;
pub mod polycalc;
pub mod kernel;
pub mod grid;
pub mod transform;
pub mod functions;
pub mod translate;
pub mod polar;
pub mod riesz;
pub mod czd;
pub mod harness;
pub mod config;
pub mod selftest;
