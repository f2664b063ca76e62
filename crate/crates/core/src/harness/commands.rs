//! The four experiment commands as library functions returning tables.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ScheduleSpec};
use super::csv_table::{fmt_f64, CsvTable};
use crate::combinatorics::{configs_one_epoch, configs_with, configs_without, BigCount, CountParams};
use crate::coverage::{median, simulate_coverage, ReplicaReport};
use crate::sampling::SamplerKind;
use crate::training::{train, TrainReport};
use crate::Error;

pub const COVERAGE_COLUMNS: [&str; 7] = [
    "replica",
    "iterations",
    "min_count",
    "max_count",
    "mean_count",
    "untouched_fraction",
    "chi_square",
];

pub const TRAIN_COLUMNS: [&str; 5] = [
    "effective_epoch",
    "learning_rate",
    "train_loss",
    "test_error",
    "wall_iterations",
];

pub const COMPARE_COLUMNS: [&str; 6] = [
    "sampler",
    "milestones",
    "decay",
    "seed",
    "final_test_error",
    "best_test_error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub params: CountParams,
    pub one_epoch: BigCount,
    pub without: BigCount,
    pub with: BigCount,
}

impl CountReport {
    /// `quantity,value,digits`, exact decimal values.
    pub fn table(&self) -> CsvTable {
        let p = &self.params;
        let mut t = CsvTable::new(["quantity", "value", "digits"]);
        let small = |v: u64| BigCount::from(v);
        let rows = [
            ("N", small(p.dataset_size())),
            ("B", small(p.batch_size())),
            ("n_E", small(p.epochs())),
            ("n_B", small(p.batches_per_epoch())),
            ("configs_one_epoch", self.one_epoch.clone()),
            ("configs_without", self.without.clone()),
            ("configs_with", self.with.clone()),
        ];
        for (name, v) in rows {
            t.push(vec![name.into(), v.to_string(), v.decimal_digits().to_string()])
                .expect("three cells");
        }
        t
    }
}

pub fn count(dataset_size: u64, batch_size: u64, epochs: u64) -> Result<CountReport, Error> {
    let params = CountParams::new(dataset_size, batch_size, epochs)?;
    Ok(CountReport {
        one_epoch: configs_one_epoch(&params),
        without: configs_without(&params),
        with: configs_with(&params),
        params,
    })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One row per replica, then a `median` row. The chi-square cell is empty
/// when nothing was drawn.
pub fn coverage_table(report: &ReplicaReport) -> CsvTable {
    let mut t = CsvTable::new(COVERAGE_COLUMNS);
    for (r, s) in report.replicas.iter().enumerate() {
        t.push(vec![
            r.to_string(),
            s.iterations.to_string(),
            s.min_count.to_string(),
            s.max_count.to_string(),
            fmt_f64(s.mean_count),
            fmt_f64(s.untouched_fraction),
            opt_cell(s.chi_square),
        ])
        .expect("row matches header");
    }
    t.push(vec![
        "median".into(),
        report.iterations.to_string(),
        fmt_f64(report.median_min_count),
        fmt_f64(report.median_max_count),
        fmt_f64(report.median_mean_count),
        fmt_f64(report.median_untouched_fraction),
        opt_cell(report.median_chi_square),
    ])
    .expect("row matches header");
    t
}

pub fn coverage_summary(report: &ReplicaReport) -> String {
    format!(
        "{} N={} B={} T={} seed={} replicas={}: median untouched_fraction={} median min_count={} median chi_square={}",
        report.kind,
        report.dataset_size,
        report.batch_size,
        report.iterations,
        report.seed,
        report.replicas.len(),
        fmt_f64(report.median_untouched_fraction),
        fmt_f64(report.median_min_count),
        opt_cell(report.median_chi_square),
    )
}

pub fn coverage(
    kind: SamplerKind,
    dataset_size: usize,
    batch_size: usize,
    iterations: u64,
    seed: u64,
    replicas: usize,
) -> Result<(ReplicaReport, CsvTable), Error> {
    let report = simulate_coverage(kind, dataset_size, batch_size, iterations, seed, replicas)?;
    let table = coverage_table(&report);
    Ok((report, table))
}

pub fn train_table(report: &TrainReport) -> CsvTable {
    let mut t = CsvTable::new(TRAIN_COLUMNS);
    for row in &report.rows {
        t.push(vec![
            fmt_f64(row.effective_epoch),
            fmt_f64(row.learning_rate),
            fmt_f64(row.train_loss),
            fmt_f64(row.test_error),
            row.wall_iterations.to_string(),
        ])
        .expect("row matches header");
    }
    t
}

pub fn run_train(config: &ExperimentConfig) -> Result<(TrainReport, CsvTable), Error> {
    let report = train(&config.train)?;
    let table = train_table(&report);
    Ok((report, table))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub sampler: SamplerKind,
    pub schedule: ScheduleSpec,
    pub seed: u64,
    pub final_test_error: f64,
    pub best_test_error: f64,
    pub wall_iterations: u64,
    pub iterations_per_epoch: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMedian {
    pub sampler: SamplerKind,
    pub schedule: ScheduleSpec,
    pub final_test_error: f64,
    pub best_test_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    /// Grid order: cells outer, seeds inner.
    pub runs: Vec<CellResult>,
    pub medians: Vec<CellMedian>,
}

impl CompareReport {
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(COMPARE_COLUMNS);
        for r in &self.runs {
            t.push(vec![
                r.sampler.to_string(),
                r.schedule.milestones_string(),
                fmt_f64(r.schedule.decay),
                r.seed.to_string(),
                fmt_f64(r.final_test_error),
                fmt_f64(r.best_test_error),
            ])
            .expect("row matches header");
        }
        for m in &self.medians {
            t.push(vec![
                m.sampler.to_string(),
                m.schedule.milestones_string(),
                fmt_f64(m.schedule.decay),
                "median".into(),
                fmt_f64(m.final_test_error),
                fmt_f64(m.best_test_error),
            ])
            .expect("row matches header");
        }
        t
    }
}

/// Trains every (cell, seed) pair of the grid. Runs execute in parallel but
/// results are collected in grid order.
pub fn compare(config: &ExperimentConfig) -> Result<CompareReport, Error> {
    let cells = config.cells();
    let seeds = config.seeds();
    let jobs: Vec<(SamplerKind, ScheduleSpec, u64)> = cells
        .iter()
        .flat_map(|(k, s)| seeds.iter().map(move |&seed| (*k, s.clone(), seed)))
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(sampler, schedule, seed)| {
            let report = train(&config.cell_config(sampler, &schedule, seed))?;
            Ok(CellResult {
                sampler,
                schedule,
                seed,
                final_test_error: report.final_test_error(),
                best_test_error: report.best_test_error(),
                wall_iterations: report.rows.last().map_or(0, |r| r.wall_iterations),
                iterations_per_epoch: report.iterations_per_epoch,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let medians = runs
        .chunks(seeds.len())
        .map(|chunk| {
            let finals: Vec<f64> = chunk.iter().map(|r| r.final_test_error).collect();
            let bests: Vec<f64> = chunk.iter().map(|r| r.best_test_error).collect();
            CellMedian {
                sampler: chunk[0].sampler,
                schedule: chunk[0].schedule.clone(),
                final_test_error: median(&finals),
                best_test_error: median(&bests),
            }
        })
        .collect();
    Ok(CompareReport { runs, medians })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_table_examples() {
        let r = count(5, 2, 1).unwrap();
        assert_eq!(r.one_epoch, BigCount::from(13));
        assert_eq!(r.without, BigCount::from(13));
        assert_eq!(r.with, BigCount::from(20));
        let text = r.table().to_csv_string().unwrap();
        assert!(text.contains("configs_one_epoch,13,2\n"));
        assert!(text.contains("n_B,2,1\n"));

        let r = count(4, 2, 3).unwrap();
        assert_eq!((r.without.to_string(), r.with.to_string()), ("21".into(), "36".into()));

        let r = count(8, 8, 5).unwrap();
        assert_eq!(r.with, BigCount::from(5));
        assert_eq!(r.without, r.with);
        assert!(count(3, 4, 1).is_err());
    }

    #[test]
    fn coverage_table_shape() {
        let (_, t) = coverage(SamplerKind::Replacement, 30, 3, 0, 1, 4).unwrap();
        assert_eq!(t.header(), COVERAGE_COLUMNS);
        assert_eq!(t.rows().len(), 5);
        assert!(t.column("untouched_fraction").unwrap().iter().all(|&v| v == "1.0"));
        assert_eq!(t.rows()[4][0], "median");
    }

    #[test]
    fn epoch_coverage_with_exact_division() {
        let (_, t) = coverage(SamplerKind::EpochShuffle, 40, 8, 5, 2, 3).unwrap();
        assert!(t.column("untouched_fraction").unwrap().iter().all(|&v| v == "0.0"));
    }

    #[test]
    fn small_compare_grid() {
        let cfg = ExperimentConfig::parse_str(
            "classes = 3\nipc_train = 8\nipc_test = 4\ndim = 3\nhidden = 6\nbatch_size = 4\n\
             total_effective_epochs = 3\ncompare_samplers = epoch,srs\n\
             compare_schedules = 1/2:0.1, 2:0.5\ncompare_seeds = 1,2,3",
        )
        .unwrap();
        let report = compare(&cfg).unwrap();
        assert_eq!(report.runs.len(), 12);
        assert_eq!(report.medians.len(), 4);
        let t = report.table();
        assert_eq!(t.rows().len(), 16);
        assert_eq!(t.rows()[0][..4], ["epoch", "1/2", "0.1", "1"]);
        for (m, chunk) in report.medians.iter().zip(report.runs.chunks(3)) {
            let lo = chunk.iter().map(|r| r.final_test_error).fold(f64::INFINITY, f64::min);
            let hi = chunk.iter().map(|r| r.final_test_error).fold(f64::NEG_INFINITY, f64::max);
            assert!(lo <= m.final_test_error && m.final_test_error <= hi);
        }
        assert_eq!(compare(&cfg).unwrap(), report);
    }
}
