pub mod conzono;
pub mod error;
pub mod estimator;
pub mod factorgraph;
pub mod harness;
pub mod interval;
pub mod lp;
pub mod polytope;
pub mod relax;
