//! Statistical phase estimation: filters, schedules and signal collection.

pub mod collect;
pub mod filter;
pub mod schedule;
pub mod signal;

pub use collect::{collect_signal, exact_signal_value, Backend, CollectRequest, Collection};
pub use filter::{fourier_coefficients, FilterSpec, FourierSampler};
pub use schedule::{
    gaussian_parameters, lt22_constant, lt22_sample_count, lt22_sample_count_with, Cutoff, GaussianParameters,
    GaussianSchedule, Lt22Inputs, DEFAULT_DELTA_FAIL, GAUSSIAN_MODES, LT22_REFERENCE, MIN_GRID_POINTS,
};
pub use signal::{evaluate_signal, linear_grid, read_records_csv, record_times, write_records_csv, ModeEntry, ModeTally, ShotRecord, Signal, SignalMeta};
