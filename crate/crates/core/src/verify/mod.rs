//! Number-theoretic verification: congruence counts, exponential sums,
//! moment identities, reduction checks and the rate constants.

pub mod counting;
pub mod expsum;
pub mod checks;
pub mod rates;
pub mod spectral_data;
pub mod suite;

pub use counting::{
    count_lambda_system, count_q, counters, enumerate_solutions, orbit_vectors, CongruenceCount, CongruenceCounter,
    MeetInTheMiddle, NaiveCounter, Solution,
};
pub use expsum::{
    exp_sum, moment_identity, saving_exponent, saving_sweep, sequence_period, write_moments_csv, ExpSumRecord,
    MomentReport, SavingSweep,
};
pub use checks::{kr_inequality_check, reduction_check, KrReport, ReductionReport};
pub use rates::RateConstants;
pub use spectral_data::{spectral_data, SpectralData};
pub use suite::{run_suite, CheckResult, SuiteConfig};
