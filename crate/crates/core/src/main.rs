use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use noisemap::acoustics::Scene;
use noisemap::config::RunConfig;
use noisemap::datagen::{self, io as dataio, Split};
use noisemap::lorawan::{channel_sweep, write_sweep_csv};
use noisemap::neural::{classifier_metrics, regressor_metrics, Checkpoint, Model};
use noisemap::pipeline::{
    read_summary_csv, replay, write_summary_csv, write_tick_csv, CorrectionGrid, EvaluationRun, FieldScenario,
    MapContext, Models,
};
use noisemap::workflow::{cell_rate, cell_rates, train_classifier, train_regressor};
use noisemap::{rng, Error, Result};

#[derive(Parser)]
#[command(name = "noisemap", version, about = "Dynamic noise mapping over LoRaWAN")]
struct Cli {
    /// TOML run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Classifier,
    Regressor,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    Events,
    Regression,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Packet success rates over gateway ranges and uplink intervals.
    ChannelSweep {
        /// Scene whose node layout is tiled over the cell.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "500,1000,1500,2000")]
        dgw: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "300,600,900")]
        dt: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic training datasets.
    GenData {
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        kind: DataKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for events.csv and regression.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Trains one model on a generated dataset and writes a checkpoint.
    Train {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replays the synthetic field test and scores map errors.
    Replay {
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Directory holding classifier.json and regressor.json.
        #[arg(long)]
        models: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        dgw: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        dt: Vec<f64>,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Leave-one-out fold whose first trial is written as PGM frames.
        #[arg(long, default_value_t = 0)]
        frames_fold: usize,
    },
    /// Collects replay outputs into the correction grid and a bar chart.
    Summary {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Writes the built-in scene as JSON.
    Scene {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_scene(path: Option<&Path>) -> Result<Scene> {
    path.map_or_else(|| Ok(Scene::default_urban()), Scene::load)
}

fn cell_tag(d_gw: f64, dt: f64) -> String {
    format!("d{d_gw:.0}_t{dt:.0}")
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    match cli.cmd {
        Command::ChannelSweep { scene, dgw, dt, trials, seed, out } => {
            let t = Instant::now();
            let scene = load_scene(scene.as_deref())?;
            let rows = channel_sweep(&scene.node_offsets(), &dgw, &dt, trials, seed, &cfg.channel)?;
            match out {
                Some(p) => write_sweep_csv(&rows, BufWriter::new(File::create(p)?))?,
                None => write_sweep_csv(&rows, io::stdout().lock())?,
            }
            eprintln!("{} cells, {trials} trials each, {:.1?}", rows.len(), t.elapsed());
        }
        Command::GenData { scene, kind, seed, out } => {
            let scene = load_scene(scene.as_deref())?;
            fs::create_dir_all(&out)?;
            if matches!(kind, DataKind::Events | DataKind::Both) {
                let d = &cfg.datagen;
                let psr = cell_rate(&scene, &cfg, d.test_view_dgw, d.test_view_dt, rng::derive(seed, 0xCE11))?;
                let (_, ds) = datagen::gen_event_dataset(&scene, &cfg.propagation, &cfg.meter, d, psr, seed)?;
                let path = out.join("events.csv");
                dataio::write_events(&path, &ds.rows, &ds.meta)?;
                eprintln!("{}: {} rows, positive rate {:.3}", path.display(), ds.rows.len(), ds.meta.positive_rate.unwrap_or(0.0));
            }
            if matches!(kind, DataKind::Regression | DataKind::Both) {
                let ds = datagen::gen_regression_set(&scene, &cfg.propagation, &cfg.datagen, seed)?;
                let path = out.join("regression.csv");
                dataio::write_regression(&path, &ds.rows, &ds.meta)?;
                eprintln!("{}: {} rows", path.display(), ds.rows.len());
            }
        }
        Command::Train { model, data, seed, out } => {
            let t = Instant::now();
            let meta = dataio::read_meta(&data)?;
            let lineage = format!("{} seed {} scene {}", data.display(), meta.seed, meta.scene_hash);
            let (checkpoint, summary) = match model {
                ModelKind::Classifier => {
                    let rows = dataio::read_events(&data)?;
                    let (m, rep) = train_classifier(&rows, &cfg, seed)?;
                    let test = datagen::event_samples(&rows, Split::Test)?;
                    let s = serde_json::to_string(&classifier_metrics(&m, &test, cfg.replay.threshold)?)?;
                    (Checkpoint::new(Model::Classifier(m), seed, lineage, Some(rep)), s)
                }
                ModelKind::Regressor => {
                    let rows = dataio::read_regression(&data)?;
                    let (m, rep) = train_regressor(&rows, &cfg, seed)?;
                    let test = datagen::regression_samples(&rows, Split::Test)?;
                    let s = serde_json::to_string(&regressor_metrics(&m, &test)?)?;
                    (Checkpoint::new(Model::Regressor(m), seed, lineage, Some(rep)), s)
                }
            };
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            checkpoint.save(&out)?;
            println!("{summary}");
            eprintln!("trained in {:.1?}", t.elapsed());
        }
        Command::Replay { scene, models, dgw, dt, trials, seed, out, frames_fold } => {
            if dgw.is_empty() || dt.is_empty() {
                return Err(Error::InvalidArgument("--dgw and --dt need at least one value each".into()));
            }
            let scene = load_scene(scene.as_deref())?;
            let classifier = Checkpoint::load(&models.join("classifier.json"))?.classifier()?.clone();
            let regressor = Checkpoint::load(&models.join("regressor.json"))?.regressor()?.clone();
            let models = Models::new(classifier, regressor)?;
            fs::create_dir_all(&out)?;
            let t = Instant::now();
            let scenario =
                FieldScenario::simulate(&scene, &cfg.propagation, &cfg.meter, cfg.datagen.traffic_jitter_db, &cfg.replay, seed)?;
            let ctx = MapContext::new(&scene, cfg.propagation);
            for c in cell_rates(&scene, &cfg, &dgw, &dt, rng::derive(seed, 0xCE11))? {
                let tag = cell_tag(c.d_gw, c.dt_s);
                let frames = out.join(format!("frames_{tag}"));
                fs::create_dir_all(&frames)?;
                let run = EvaluationRun { d_gw: c.d_gw, dt_s: c.dt_s, psr: c.r_s_cell, trials, seed };
                let mut hook = |trial: usize, fold: usize, o: &noisemap::pipeline::TickOutput| -> Result<()> {
                    if trial == 0 && fold == frames_fold {
                        ctx.render(o)?.write_pgm(&frames.join(format!("t{:05.0}.pgm", o.t)))?;
                    }
                    Ok(())
                };
                let report = replay(&scenario, &ctx, &models, cfg.kf, &run, Some(&mut hook))?;
                write_tick_csv(&report, BufWriter::new(File::create(out.join(format!("ticks_{tag}.csv")))?))?;
                write_summary_csv(std::slice::from_ref(&report), BufWriter::new(File::create(out.join(format!("correction_{tag}.csv")))?))?;
                eprintln!(
                    "{tag}: psr {:.3}, post {:.2} dB vs baseline {:.2} dB, correction {:.1}%",
                    report.psr,
                    report.mean_post,
                    report.mean_baseline,
                    100.0 * report.correction
                );
            }
            eprintln!("replayed in {:.1?}", t.elapsed());
        }
        Command::Summary { input } => {
            let mut cells = Vec::new();
            let mut entries: Vec<PathBuf> = fs::read_dir(&input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("correction_") && n.ends_with(".csv")))
                .collect();
            entries.sort();
            for p in &entries {
                cells.extend(read_summary_csv(File::open(p)?, p)?);
            }
            let grid = CorrectionGrid::from_cells(&cells)?;
            grid.write_csv(BufWriter::new(File::create(input.join("grid.csv"))?))?;
            fs::write(input.join("correction.svg"), grid.to_svg())?;
            grid.write_csv(io::stdout().lock())?;
            if let Some((d, t, v)) = grid.best() {
                eprintln!("best cell {d:.0} m / {t:.0} s: {:.1}%; monotone: {}", 100.0 * v, grid.is_monotone());
            }
        }
        Command::Scene { out } => {
            let scene = Scene::default_urban();
            match out {
                Some(p) => fs::write(p, scene.to_json() + "\n")?,
                None => writeln!(io::stdout().lock(), "{}", scene.to_json())?,
            }
        }
    }
    Ok(())
}
