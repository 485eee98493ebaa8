//! Maximum-likelihood estimation and fit statistics.

mod fit;
mod report;
mod stats;

pub(crate) use fit::start_values;
pub use fit::{fit_intercept_only, fit_ml, FitOptions, FitResult};
pub use report::{significance_stars, summary_table, CoefficientRow, FitReport};
pub use stats::{chi_square_upper_tail, hit_rate, lr_test, mcfadden_r2, predict_prob, two_sided_p};
