pub mod behaviors;
pub mod blcs;
pub mod games;
pub mod gf2;
pub mod lifting;
pub mod lp;
pub mod polytopes;
pub mod qnum;
pub mod quantum;
pub mod scalar;
