pub mod clarke;
pub mod error;
pub mod gfunc;
pub mod orlicz;
pub mod quad;
pub mod sampling;
pub mod solver;
pub mod vecops;

pub use clarke::{
    run_probes, HypothesisReport, PascaOptions, Potential, PotentialSpec, ProbeOptions, SmoothSpec, SpatialSpec,
    TermSpec, TimeExpr,
};
pub use error::{Error, Result};
pub use gfunc::{make_family, FamilySpec, GFunction};
pub use orlicz::{read_trajectory_csv, write_trajectory_csv, Trajectory};
pub use solver::{
    action, el_residual, minimize, verify_solution, DiscreteProblem, ElResidual, Init, Method, SolveResult,
    SolverOptions, VerifyReport, VerifyTolerances,
};
