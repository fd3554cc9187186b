//! Writes campaign artifacts to an output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::campaign::{write_trials_csv, RoutePlan, TrialRecord};
use super::config::CampaignConfig;
use super::stats::SummaryStats;
use super::svg;
use crate::error::Result;
use crate::rf_model::SensingKind;

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub fn heatmap_path(dir: &Path, sensing: SensingKind) -> PathBuf {
    dir.join(format!("heatmap_{}.csv", sensing.label()))
}

/// One CSV row per y bin (ascending), one column per x bin; no header.
pub fn write_heatmap_csv<W: Write>(writer: W, grid: &[Vec<usize>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in grid {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json<W: Write>(mut writer: W, stats: &SummaryStats) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, stats)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Trial records, summary and heatmaps.
pub fn write_data(dir: &Path, records: &[TrialRecord], stats: &SummaryStats) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trials_csv(BufWriter::new(File::create(dir.join(TRIALS_FILE))?), records)?;
    write_summary_json(BufWriter::new(File::create(dir.join(SUMMARY_FILE))?), stats)?;
    for pooled in &stats.pooled {
        write_heatmap_csv(BufWriter::new(File::create(heatmap_path(dir, pooled.sensing))?), &pooled.failure_heatmap)?;
    }
    Ok(())
}

/// SVG charts into `dir/plots`. Returns the files written.
pub fn write_plots(
    dir: &Path,
    records: &[TrialRecord],
    stats: &SummaryStats,
    plans: &[RoutePlan],
    config: &CampaignConfig,
) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    let mut written = Vec::new();
    let mut emit = |name: String, body: String| -> Result<()> {
        let path = plots.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    for plan in plans {
        let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.scenario == plan.scenario).collect();
        emit(format!("{}.svg", svg::scenario_file_stem(plan.scenario)), svg::routes_plot(plan, &rs, config))?;
    }
    emit("error_boxplot.svg".into(), svg::error_boxplot(stats))?;
    emit(
        "success_vs_power.svg".into(),
        svg::success_curve(records, config.power_dbm, |r| r.power_dbm, "power (dBm)", 10),
    )?;
    let ghz = [config.frequency_hz[0] / 1e9, config.frequency_hz[1] / 1e9];
    emit(
        "success_vs_frequency.svg".into(),
        svg::success_curve(records, ghz, |r| r.freq_hz / 1e9, "frequency (GHz)", 10),
    )?;
    for pooled in &stats.pooled {
        emit(
            format!("heatmap_{}.svg", pooled.sensing.label()),
            svg::heatmap_plot(&pooled.failure_heatmap, config, pooled.sensing),
        )?;
    }
    Ok(written)
}

/// All artifacts: data files always, plots unless `plots` is false.
pub fn emit_outputs(
    dir: &Path,
    records: &[TrialRecord],
    stats: &SummaryStats,
    plans: &[RoutePlan],
    config: &CampaignConfig,
    plots: bool,
) -> Result<()> {
    write_data(dir, records, stats)?;
    if plots {
        write_plots(dir, records, stats, plans, config)?;
    }
    Ok(())
}
