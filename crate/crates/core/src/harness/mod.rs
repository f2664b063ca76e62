//! Configuration, CSV persistence and the experiment commands.

pub mod commands;
pub mod config;
pub mod csv_table;

pub use commands::{
    compare, count, coverage, coverage_summary, coverage_table, run_train, train_table, CellMedian,
    CellResult, CompareReport, CountReport,
};
pub use config::{parse_config, CompareGrid, ConfigError, ExperimentConfig, ScheduleSpec};
pub use csv_table::{fmt_f64, CsvError, CsvTable};
