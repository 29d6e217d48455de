use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use radiomap::eval::{self, ErrorStats, PERCENTILE_METHOD};
use radiomap::io::{self as rio, LocalizedScan};
use radiomap::localizer::{self, Algorithm, LocalizerConfig};
use radiomap::mapbuilder::{self, MergeConfig};
use radiomap::pdr::{self, PdrConfig};
use radiomap::pf::{self, PfConfig};
use radiomap::sim::{self, Scenario};
use radiomap::{Error, Pose, Result, Track};

/// Dynamic Wi-Fi radio map construction and fingerprinting evaluation.
#[derive(Parser, Debug)]
#[command(name = "radiomap", version)]
struct Cli {
    /// Seed for every random draw (simulation noise, particle filter).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON file with optional `pdr`, `pf`, `merge` and `localizer` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate IMU, scan and ground-truth logs from a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write static_map.json at this grid spacing (m).
        #[arg(long)]
        static_map_spacing: Option<f64>,
    },
    /// Plain dead reckoning over an IMU log.
    Pdr {
        #[arg(long)]
        imu: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Particle-filter dead reckoning with wall map matching.
    PfPdr {
        #[arg(long)]
        imu: PathBuf,
        #[arg(long)]
        floorplan: PathBuf,
        #[command(flatten)]
        start: StartArgs,
        #[arg(long)]
        particles: Option<usize>,
        #[arg(long)]
        step_sigma: Option<f64>,
        #[arg(long)]
        heading_sigma: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a dynamic radio map from a recovered track and a scan log.
    BuildMap {
        #[arg(long)]
        track: PathBuf,
        #[arg(long)]
        scans: PathBuf,
        /// Emit the raw one-point-per-scan map without merging.
        #[arg(long)]
        no_merge: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a position for every scan in a query log.
    Localize {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value = "wknn")]
        algo: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error statistics of a track or localization output against ground truth.
    Evaluate {
        /// Track CSV or `localize` output.
        #[arg(long)]
        estimated: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Directory for summary.json, errors.csv and cdf.csv; summary goes
        /// to stdout when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Median localization error for KNN/WKNN over a range of K.
    KSweep {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        /// Ground-truth track; query positions are interpolated at scan times.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        #[arg(long, default_value = "knn,wknn")]
        algos: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RSS difference statistics between a dynamic map and static references.
    CompareMaps {
        #[arg(long)]
        dynamic: PathBuf,
        #[arg(long = "static")]
        static_map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct StartArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    start_x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    start_y: f64,
    /// Initial heading, radians clockwise from +y.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    start_heading: f64,
}

impl StartArgs {
    fn pose(&self) -> Pose {
        Pose::new(self.start_x, self.start_y, self.start_heading)
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    pdr: PdrConfig,
    pf: PfConfig,
    merge: MergeConfig,
    localizer: LocalizerConfig,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => rio::from_json_reader(fs::File::open(p).map_err(|e| Error::Format {
            what: p.display().to_string(),
            msg: e.to_string(),
        })?),
    }
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = io::BufWriter::new(fs::File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    percentile_method: &'a str,
    stats: ErrorStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    clamped: Option<usize>,
}

fn summary_json(stats: ErrorStats, clamped: Option<usize>) -> Result<String> {
    rio::to_json_string(&Summary {
        percentile_method: PERCENTILE_METHOD,
        stats,
        clamped,
    })
}

fn read_estimates(path: &Path) -> Result<Track> {
    let text = fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or_default().trim();
    if header == rio::LOCALIZE_HEADER.join(",") {
        let rows = rio::read_localized_csv(text.as_bytes())?;
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, r)| radiomap::model::TrackEntry {
                t: r.t,
                pose: Pose::new(r.x, r.y, 0.0),
                step: i as u32,
            })
            .collect();
        Track::new(entries)
    } else {
        rio::read_track_csv(text.as_bytes())
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let seed = cli.seed;

    match cli.command {
        Command::Simulate {
            scenario,
            out_dir,
            static_map_spacing,
        } => {
            let mut sc: Scenario = rio::from_json_reader(fs::File::open(&scenario)?)?;
            if let Some(s) = seed {
                sc.sim.seed = s;
            }
            if static_map_spacing.is_some() {
                sc.static_map_spacing = static_map_spacing;
            }
            let base = scenario.parent().unwrap_or(Path::new("."));
            let plan = sc.floorplan(base)?;
            let out = sim::simulate(&sc, &plan)?;
            fs::create_dir_all(&out_dir)?;
            rio::write_imu(&out_dir.join("imu.csv"), &out.imu)?;
            rio::write_scans(&out_dir.join("scans.csv"), &out.scans)?;
            rio::write_track(&out_dir.join("truth_track.csv"), &out.truth)?;
            rio::write_floorplan(&out_dir.join("floorplan.json"), &plan)?;
            if let Some(map) = &out.static_map {
                rio::write_radio_map(&out_dir.join("static_map.json"), map)?;
            }
        }
        Command::Pdr { imu, start, out } => {
            let samples = rio::read_imu(&imu)?;
            let track = pdr::run_pdr(&samples, start.pose(), &cfg.pdr);
            emit(out.as_deref(), |w| rio::write_track_csv(w, &track))?;
        }
        Command::PfPdr {
            imu,
            floorplan,
            start,
            particles,
            step_sigma,
            heading_sigma,
            out,
        } => {
            let samples = rio::read_imu(&imu)?;
            let plan = rio::read_floorplan(&floorplan)?;
            let pf_cfg = PfConfig {
                n_particles: particles.unwrap_or(cfg.pf.n_particles),
                step_sigma: step_sigma.unwrap_or(cfg.pf.step_sigma),
                heading_sigma: heading_sigma.unwrap_or(cfg.pf.heading_sigma),
                ..cfg.pf
            };
            pf_cfg.validate()?;
            let track = pf::run_pf_pdr(&samples, start.pose(), &plan, &cfg.pdr, &pf_cfg, seed.unwrap_or(0))?;
            emit(out.as_deref(), |w| rio::write_track_csv(w, &track))?;
        }
        Command::BuildMap {
            track,
            scans,
            no_merge,
            out,
        } => {
            let track = rio::read_track(&track)?;
            let scans = rio::read_scans(&scans)?;
            let map = if no_merge {
                mapbuilder::assign_reference_points(&track, &scans)?
            } else {
                let run = mapbuilder::build_dynamic_map_with_log(&track, &scans, &cfg.merge)?;
                let stderr = io::stderr();
                let mut err = stderr.lock();
                for d in &run.decisions {
                    writeln!(err, "{d}")?;
                }
                run.map
            };
            emit(out.as_deref(), |w| {
                w.write_all(rio::to_json_string(&map)?.as_bytes())?;
                Ok(())
            })?;
        }
        Command::Localize {
            map,
            algo,
            k,
            query,
            out,
        } => {
            let map = rio::read_radio_map(&map)?;
            let algorithm: Algorithm = algo.parse()?;
            let lcfg = LocalizerConfig {
                algorithm,
                k: k.unwrap_or(cfg.localizer.k),
                ..cfg.localizer
            };
            if lcfg.k == 0 {
                return Err(Error::Format {
                    what: "--k".into(),
                    msg: "must be at least 1".into(),
                });
            }
            let scans = rio::read_scans(&query)?;
            let rows = scans
                .iter()
                .map(|s| {
                    localizer::estimate(&s.readings, &map, &lcfg).map(|e| LocalizedScan {
                        t: s.t,
                        x: e.position.x,
                        y: e.position.y,
                        floor: e.floor,
                        algo: algorithm.as_str().to_string(),
                        k: lcfg.k,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), |w| rio::write_localized_csv(w, &rows))?;
        }
        Command::Evaluate {
            estimated,
            truth,
            out_dir,
        } => {
            let est = read_estimates(&estimated)?;
            let truth = rio::read_track(&truth)?;
            let errs = eval::track_errors(&est, &truth)?;
            for i in &errs.clamped {
                eprintln!("clamped: estimate {i} at t = {} lies outside the truth span", est.entries()[*i].t);
            }
            let stats = eval::error_stats(&errs.errors)?;
            let summary = summary_json(stats, Some(errs.clamped.len()))?;
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("summary.json"), summary)?;
                    let times: Vec<f64> = est.entries().iter().map(|e| e.t).collect();
                    rio::write_errors_csv(fs::File::create(dir.join("errors.csv"))?, &times, &errs.errors)?;
                    rio::write_cdf_csv(fs::File::create(dir.join("cdf.csv"))?, &eval::error_cdf(&errs.errors)?)?;
                }
                None => print!("{summary}"),
            }
        }
        Command::KSweep {
            map,
            queries,
            truth,
            k_max,
            algos,
            out,
        } => {
            let map = rio::read_radio_map(&map)?;
            let scans = rio::read_scans(&queries)?;
            let truth = rio::read_track(&truth)?;
            let algorithms = algos
                .split(',')
                .map(|a| a.trim().parse::<Algorithm>())
                .collect::<Result<Vec<_>>>()?;
            let pairs: Vec<_> = scans
                .iter()
                .map(|s| (s.readings.clone(), truth.position_at(s.t).expect("truth track is non-empty").0))
                .collect();
            if pairs.is_empty() {
                return Err(Error::EmptySample);
            }
            let rows = eval::k_sweep(&map, &pairs, &algorithms, 1..=k_max, &cfg.localizer)?;
            emit(out.as_deref(), |w| rio::write_k_sweep_csv(w, &rows))?;
        }
        Command::CompareMaps {
            dynamic,
            static_map,
            out,
        } => {
            let dynamic = rio::read_radio_map(&dynamic)?;
            let stat = rio::read_radio_map(&static_map)?;
            let refs: Vec<_> = stat.points.iter().map(|rp| (rp.position, rp.fingerprint.clone())).collect();
            let stats = eval::compare_fingerprints(&dynamic, &refs)?;
            let summary = summary_json(stats, None)?;
            emit(out.as_deref(), |w| {
                w.write_all(summary.as_bytes())?;
                Ok(())
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
