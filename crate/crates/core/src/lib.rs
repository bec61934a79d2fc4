pub mod gf2;
pub mod reductions;
pub mod solvers;
pub mod tdm;
pub mod verify;
