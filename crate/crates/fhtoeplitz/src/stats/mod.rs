//! Exact finite-n statistics of the log-gas via determinant ratios, plus a
//! Metropolis sampler for empirical checks.

mod convergence;
mod empirical;
mod mcmc;
mod mgf;

pub use convergence::{determinant_study, fit_slope, moment_study, tabulate, ConvergenceRow, ConvergenceStudy, Target, DIFF_FLOOR};
pub use empirical::{
    count_up_to, empirical_statistics, nearest_index, sup_counting_deviation, EmpiricalReport, Estimate, GridPoint, OrderedStats, RigidityRow,
    RIGIDITY_EPSILONS,
};
pub use mcmc::{accept_probability, log_density, mcmc_sample, SampleBatch};
pub use mgf::{exact_cumulants, exact_log_mgf, exact_mgf, fornberg_weights, statistic_query, MgfQuery, StencilConfig};
