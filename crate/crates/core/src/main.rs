use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use cel_swarm::harness::campaign::{draw_source, simulate_source, trial_noise};
use cel_swarm::harness::output::{write_data, write_plots, TRIALS_FILE};
use cel_swarm::harness::{
    load_or_plan, read_trials_csv, run_campaign, summarize, CampaignConfig, RoutePlan, ScenarioConfig, ScenarioId,
    SummaryStats, TrialRecord,
};
use cel_swarm::localization::write_lines_csv;
use cel_swarm::sim::write_traces_csv;
use cel_swarm::Result;

/// Multi-robot concealed emitter localization: route planning, Monte Carlo
/// campaigns and analysis.
#[derive(Parser)]
#[command(name = "cel-swarm", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; omitted keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for routes, records, summaries and plots.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Scenario id such as `triangle-omni`, or `all`.
    #[arg(long, global = true, default_value = "all")]
    scenario: String,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Skip SVG output.
    #[arg(long, global = true)]
    no_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize patrol routes for each scenario (cached in the output directory).
    Plan,
    /// Run the Monte Carlo campaign and write trial records.
    Run {
        /// Also dump RSS traces and triangulation lines of the first N trials per scenario.
        #[arg(long, default_value_t = 0)]
        dump_trials: usize,
    },
    /// Compute statistics from stored trial records.
    Analyze,
    /// Render SVG plots from stored records and routes.
    Plot,
    /// Plan, run, analyze and plot.
    All,
}

struct Context {
    config: CampaignConfig,
    scenarios: Vec<ScenarioId>,
    out_dir: PathBuf,
    workers: usize,
}

impl Context {
    fn new(c: &Common) -> Result<Self> {
        let mut config = match &c.config {
            Some(p) => CampaignConfig::load(p)?,
            None => CampaignConfig::default(),
        };
        if let Some(seed) = c.seed {
            config.seed = seed;
        }
        let scenarios = if c.scenario == "all" { ScenarioId::all() } else { vec![c.scenario.parse()?] };
        Ok(Self { config, scenarios, out_dir: c.out_dir.clone(), workers: c.workers })
    }

    fn routes_dir(&self) -> PathBuf {
        self.out_dir.join("routes")
    }

    fn scenario(&self, id: ScenarioId) -> ScenarioConfig {
        self.config.scenario(id)
    }

    fn plan(&self) -> Result<Vec<(ScenarioConfig, RoutePlan)>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| cel_swarm::CelError::Config(format!("worker pool: {e}")))?;
        self.scenarios
            .iter()
            .map(|&id| {
                let sc = self.scenario(id);
                let t = Instant::now();
                let plan = pool.install(|| load_or_plan(&sc, &self.routes_dir()))?;
                eprintln!(
                    "plan {id}: fitness {:.3}, S_R {:.2} m, edges {} ({:.1}s)",
                    plan.fitness,
                    plan.sensing_range,
                    plan.routes.iter().map(|r| format!("{:.2}", r.shape().edge_length)).collect::<Vec<_>>().join("/"),
                    t.elapsed().as_secs_f64()
                );
                Ok((sc, plan))
            })
            .collect()
    }

    fn load_records(&self) -> Result<Vec<TrialRecord>> {
        read_trials_csv(File::open(self.out_dir.join(TRIALS_FILE))?)
    }

    fn run(&self, dump_trials: usize) -> Result<(Vec<RoutePlan>, Vec<TrialRecord>)> {
        let planned = self.plan()?;
        let t = Instant::now();
        let records = run_campaign(&planned, self.workers)?;
        eprintln!("ran {} trials in {:.2}s", records.len(), t.elapsed().as_secs_f64());
        std::fs::create_dir_all(&self.out_dir)?;
        cel_swarm::harness::write_trials_csv(BufWriter::new(File::create(self.out_dir.join(TRIALS_FILE))?), &records)?;
        if dump_trials > 0 {
            dump(&self.out_dir.join("traces"), &planned, dump_trials)?;
        }
        Ok((planned.into_iter().map(|(_, p)| p).collect(), records))
    }

    fn analyze(&self, records: &[TrialRecord]) -> Result<SummaryStats> {
        let stats = summarize(records, &self.config);
        write_data(&self.out_dir, records, &stats)?;
        print_summary(&stats);
        Ok(stats)
    }

    fn plot(&self, records: &[TrialRecord], stats: &SummaryStats, plans: &[RoutePlan]) -> Result<()> {
        let written = write_plots(&self.out_dir, records, stats, plans, &self.config)?;
        eprintln!("wrote {} plots to {}", written.len(), self.out_dir.join("plots").display());
        Ok(())
    }

    fn cached_plans(&self) -> Result<Vec<RoutePlan>> {
        self.scenarios
            .iter()
            .filter_map(|&id| {
                let path = cel_swarm::harness::campaign::plan_path(&self.routes_dir(), id);
                path.exists().then(|| -> Result<RoutePlan> {
                    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
                })
            })
            .collect()
    }
}

fn dump(dir: &Path, planned: &[(ScenarioConfig, RoutePlan)], n: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (sc, plan) in planned {
        let mut traces_out = BufWriter::new(File::create(dir.join(format!("traces_{}.csv", sc.id)))?);
        let mut lines_out = BufWriter::new(File::create(dir.join(format!("lines_{}.csv", sc.id)))?);
        let mut traces = Vec::new();
        let mut lines = Vec::new();
        for trial in 0..n.min(sc.campaign.trials) {
            let source = draw_source(sc, trial);
            let (t, r) = simulate_source(sc, &plan.routes, &source, &trial_noise(sc, trial)?)?;
            traces.push((trial, t));
            lines.push((trial, r.lines));
        }
        let mut buf = Vec::new();
        for (i, (trial, t)) in traces.iter().enumerate() {
            buf.clear();
            write_traces_csv(&mut buf, *trial, t)?;
            std::io::Write::write_all(&mut traces_out, skip_header(&buf, i))?;
        }
        for (i, (trial, l)) in lines.iter().enumerate() {
            buf.clear();
            write_lines_csv(&mut buf, *trial, l)?;
            std::io::Write::write_all(&mut lines_out, skip_header(&buf, i))?;
        }
    }
    Ok(())
}

fn skip_header(buf: &[u8], index: usize) -> &[u8] {
    if index == 0 {
        return buf;
    }
    buf.iter().position(|&b| b == b'\n').map_or(buf, |p| &buf[p + 1..])
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn print_summary(stats: &SummaryStats) {
    println!("{:<22} {:>8} {:>7} {:>9} {:>9} {:>9}", "scenario", "success%", "lines", "err_mean", "err_med", "err_iqr");
    for s in &stats.scenarios {
        println!(
            "{:<22} {:>8.1} {:>7.2} {:>9} {:>9} {:>9}",
            s.scenario.to_string(),
            s.success_rate,
            s.mean_lines,
            fmt_opt(s.error.mean),
            fmt_opt(s.error.median),
            fmt_opt(s.error.iqr)
        );
    }
    for p in &stats.pooled {
        let l = &p.logistic;
        println!(
            "pooled {:<11} success {:>5.1}% ({}/{}), mean error {} m, logit b_power {:+.4} (p={:.2e}) b_freq {:+.4} (p={:.2e}){}",
            p.sensing.label(),
            p.success_rate,
            p.successes,
            p.trials,
            fmt_opt(p.error.mean),
            l.coefficients.get(1).copied().unwrap_or(f64::NAN),
            l.p_values.get(1).copied().unwrap_or(f64::NAN),
            l.coefficients.get(2).copied().unwrap_or(f64::NAN),
            l.p_values.get(2).copied().unwrap_or(f64::NAN),
            if l.separated { " [separated]" } else { "" }
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    let ctx = Context::new(&cli.common)?;
    match cli.command {
        Command::Plan => {
            ctx.plan()?;
        }
        Command::Run { dump_trials } => {
            ctx.run(dump_trials)?;
        }
        Command::Analyze => {
            ctx.analyze(&ctx.load_records()?)?;
        }
        Command::Plot => {
            let records = ctx.load_records()?;
            let stats = summarize(&records, &ctx.config);
            ctx.plot(&records, &stats, &ctx.cached_plans()?)?;
        }
        Command::All => {
            let (plans, records) = ctx.run(0)?;
            let stats = ctx.analyze(&records)?;
            if !cli.common.no_plots {
                ctx.plot(&records, &stats, &plans)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
