use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcover::{run_simulation, SchedulerKind, SimulationConfig};
use kcover_cli::csvio::{self, write_file};
use kcover_cli::experiment::{run_experiment, trace_file_name, ExperimentReport, ExperimentSpec};
use kcover_cli::plot;
use kcover_cli::settings::{load_config, to_toml, Overrides};
use kcover_cli::{exit, verify, CliError};

#[derive(Parser)]
#[command(name = "kcover", version, about = "k-coverage sleep scheduling simulator")]
struct Cli {
    /// Directory for generated files when no explicit path is given.
    #[arg(long, global = true, env = "KCOVER_OUT_DIR", default_value = "kcover-out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trace CSV.
    Run {
        #[command(flatten)]
        source: ConfigSource,
        /// Trace file (default: <out-dir>/<scheduler>_seed<seed>.csv).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the message log here.
        #[arg(long)]
        messages: Option<PathBuf>,
    },
    /// Run every scheduler and seed of an experiment file.
    Compare { spec: PathBuf },
    /// Render trace or summary CSVs as an SVG line chart, one panel per column.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long = "column", short, default_values_t = ["theta1".to_string(), "theta2".to_string(), "theta3".to_string()])]
        columns: Vec<String>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run the oracle checks on small seeded instances.
    Verify {
        #[arg(long, default_value_t = 100)]
        instances: u64,
    },
    /// Run a built-in experiment.
    Preset {
        name: Preset,
        /// First seed; runs use `seed .. seed + seeds`.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        loss: Option<f64>,
        #[arg(long)]
        max_periods: Option<u32>,
    },
    /// Print the resolved configuration as TOML.
    ShowConfig {
        #[command(flatten)]
        source: ConfigSource,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Figure5,
}

#[derive(Args)]
struct ConfigSource {
    /// TOML config; omitted keys take the 10 x 10 grid defaults.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    loss: Option<f64>,
    /// cgs, centralized, always_on, random or random:<p>.
    #[arg(long)]
    scheduler: Option<SchedulerKind>,
    /// Use the random scheduler with this sleep probability.
    #[arg(long)]
    p_sleep: Option<f64>,
    #[arg(long)]
    max_periods: Option<u32>,
}

impl ConfigSource {
    fn resolve(&self) -> Result<SimulationConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => load_config(path)?,
            None => SimulationConfig::default(),
        };
        Overrides {
            seed: self.seed,
            k: self.k,
            loss: self.loss,
            scheduler: self.scheduler,
            p_sleep: self.p_sleep,
            max_periods: self.max_periods,
        }
        .apply(&mut config);
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { source, output, messages } => {
            let config = source.resolve()?;
            let out = run_simulation(&config)?;
            let path = output.unwrap_or_else(|| cli.out_dir.join(trace_file_name(&config.scheduler, config.seed)));
            write_file(&path, csvio::trace_to_string(&out.trace))?;
            if let Some(mpath) = messages {
                let mut buf = Vec::new();
                csvio::write_messages(&mut buf, &out.messages).map_err(|e| CliError::io(&mpath, e))?;
                write_file(&mpath, buf)?;
            }
            println!(
                "{}: {} periods, network lifetime {}, {} messages -> {}",
                config.scheduler.label(),
                out.trace.rows.len(),
                out.trace.network_lifetime(),
                out.messages.len(),
                path.display()
            );
            Ok(exit::OK)
        }
        Command::Compare { spec } => {
            let spec = ExperimentSpec::load(&spec, &cli.out_dir)?;
            report(&run_experiment(&spec)?);
            Ok(exit::OK)
        }
        Command::Plot { csv, columns, output } => {
            write_file(&output, plot::plot_columns(&csv, &columns)?)?;
            println!("wrote {}", output.display());
            Ok(exit::OK)
        }
        Command::Verify { instances } => {
            let results = verify::run_checks(instances);
            let mut ok = true;
            for r in &results {
                println!("{} {} ({} cases)", if r.passed() { "ok  " } else { "FAIL" }, r.name, r.cases);
                for f in r.failures.iter().take(5) {
                    println!("     {f}");
                }
                ok &= r.passed();
            }
            Ok(if ok { exit::OK } else { exit::VERIFY_FAILED })
        }
        Command::Preset { name: Preset::Figure5, seed, seeds, loss, max_periods } => {
            let dir = cli.out_dir.join("figure5");
            let mut spec = ExperimentSpec::figure5((seed..seed + seeds.max(1)).collect(), dir.clone());
            if let Some(l) = loss {
                spec.base.loss_probability = l;
            }
            if let Some(m) = max_periods {
                spec.base.max_periods = m;
            }
            let result = run_experiment(&spec)?;
            report(&result);
            figure5_plots(&result.summary_path, &dir)?;
            Ok(exit::OK)
        }
        Command::ShowConfig { source } => {
            print!("{}", to_toml(&source.resolve()?));
            Ok(exit::OK)
        }
    }
}

fn figure5_plots(summary: &Path, dir: &Path) -> Result<(), CliError> {
    let sources = [summary.to_path_buf()];
    let cols = |c: &[&str]| c.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    for (file, columns) in [
        ("coverage.svg", cols(&["theta1", "theta2", "theta3"])),
        ("region_coverage.svg", cols(&["theta_p1", "theta_p2", "theta_p3"])),
        ("awake.svg", cols(&["awake"])),
    ] {
        let path = dir.join(file);
        write_file(&path, plot::plot_columns(&sources, &columns)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn report(r: &ExperimentReport) {
    println!(
        "{} runs; traces under {}",
        r.runs.len(),
        r.summary_path.parent().unwrap_or(Path::new(".")).join("traces").display()
    );
    println!("wrote {}", r.summary_path.display());
    println!("wrote {}", r.lifetimes_path.display());
    for l in r.lifetimes.iter().filter(|l| l.k == 3) {
        println!(
            "  {:<12} L_3({:.2}) mean {:>6.2} [{}..{}]  network lifetime {:.2}",
            l.scheduler, l.lambda, l.mean, l.min, l.max, l.mean_network_lifetime
        );
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;
    use kcover_cli::csvio::TRACE_HEADER;

    use super::*;

    fn run(args: &[&str], out_dir: &Path) -> Result<i32, CliError> {
        let out = out_dir.to_str().unwrap();
        dispatch(Cli::try_parse_from([&["kcover", "--out-dir", out], args].concat()).unwrap())
    }

    fn code(r: Result<i32, CliError>) -> i32 {
        r.unwrap_or_else(|e| e.exit_code())
    }

    fn write(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    #[test]
    fn one_scheduler_one_seed_five_periods() {
        let tmp = tempfile::tempdir().unwrap();
        let spec = write(
            tmp.path(),
            "exp.toml",
            &format!(
                "schedulers = [\"cgs\"]\nseeds = [3]\noutput_dir = {:?}\n[base]\nmax_periods = 5\n",
                tmp.path().join("o")
            ),
        );
        assert_eq!(run(&["compare", &spec], tmp.path()).unwrap(), exit::OK);
        assert_eq!(std::fs::read_dir(tmp.path().join("o/traces")).unwrap().count(), 1);
        let text = std::fs::read_to_string(tmp.path().join("o/traces/cgs_seed3.csv")).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert_eq!(text.lines().next().unwrap(), TRACE_HEADER.join(","));
        assert!(tmp.path().join("o/summary.csv").exists());
        assert!(tmp.path().join("o/lifetimes.csv").exists());
    }

    #[test]
    fn out_dir_reads_env() {
        let cmd = Cli::command();
        let arg = cmd.get_arguments().find(|a| a.get_id() == "out_dir").unwrap();
        assert_eq!(arg.get_env().and_then(|e| e.to_str()), Some("KCOVER_OUT_DIR"));
    }

    #[test]
    fn run_writes_to_out_dir_and_repeats_exactly() {
        let tmp = tempfile::tempdir().unwrap();
        let args = ["run", "--seed", "4", "--loss", "0.1", "--max-periods", "12", "--messages"];
        let m1 = tmp.path().join("m1.csv");
        run(&[&args[..], &[m1.to_str().unwrap()]].concat(), tmp.path()).unwrap();
        let first = std::fs::read(tmp.path().join("cgs_seed4.csv")).unwrap();
        let m2 = tmp.path().join("m2.csv");
        run(&[&args[..], &[m2.to_str().unwrap()]].concat(), tmp.path()).unwrap();
        assert_eq!(first, std::fs::read(tmp.path().join("cgs_seed4.csv")).unwrap());
        let log = std::fs::read_to_string(&m1).unwrap();
        assert_eq!(log, std::fs::read_to_string(&m2).unwrap());
        assert!(log.starts_with("period,time,kind,sender,receivers\n1,0.000000,hello,0,"));
    }

    #[test]
    fn config_file_and_flag_overrides() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = write(tmp.path(), "c.toml", "k = 2\nseed = 8\n[scheduler]\nkind = \"centralized\"\n");
        let cli =
            Cli::try_parse_from(["kcover", "show-config", "--config", &cfg, "--p-sleep", "0.3", "--k", "1"]).unwrap();
        let Command::ShowConfig { source } = cli.command else { panic!("wrong subcommand") };
        let text = to_toml(&source.resolve().unwrap());
        assert!(text.contains("k = 1\n") && text.contains("seed = 8\n"), "{text}");
        assert!(text.contains("p_sleep = 0.3"), "{text}");
    }

    #[test]
    fn exit_codes_separate_config_and_io_errors() {
        let tmp = tempfile::tempdir().unwrap();
        let bad = write(tmp.path(), "bad.toml", "k = 0\n");
        assert_eq!(code(run(&["run", "--config", &bad], tmp.path())), exit::CONFIG);
        let typo = write(tmp.path(), "typo.toml", "sensing_radius = 3\n");
        let err = run(&["run", "--config", &typo], tmp.path()).unwrap_err();
        assert_eq!(err.exit_code(), exit::CONFIG);
        assert!(err.to_string().contains("typo.toml"), "{err}");

        let blocker = write(tmp.path(), "file", "");
        let out = run(&["run", "--max-periods", "2", "--output", &format!("{blocker}/t.csv")], tmp.path());
        assert_eq!(code(out), exit::IO);
        let missing = tmp.path().join("missing.csv");
        assert_eq!(code(run(&["plot", missing.to_str().unwrap(), "-o", "x.svg"], tmp.path())), exit::IO);
    }

    #[test]
    fn plot_reports_malformed_line() {
        let tmp = tempfile::tempdir().unwrap();
        let csv = write(
            tmp.path(),
            "t.csv",
            &format!("{}\n1,5,5,1,1,1,1,1,1,0\n2,5,5,oops,1,1,1,1,1,0\n", TRACE_HEADER.join(",")),
        );
        let err = run(&["plot", &csv, "-o", tmp.path().join("p.svg").to_str().unwrap()], tmp.path()).unwrap_err();
        assert_eq!(err.exit_code(), exit::DATA);
        let msg = err.to_string();
        assert!(msg.contains("t.csv:3") && msg.contains("theta1"), "{msg}");
    }

    #[test]
    fn plot_of_header_only_csv_has_no_polylines() {
        let tmp = tempfile::tempdir().unwrap();
        let csv = write(tmp.path(), "empty.csv", &format!("{}\n", TRACE_HEADER.join(",")));
        let svg = tmp.path().join("p.svg");
        run(&["plot", &csv, "-c", "awake", "-o", svg.to_str().unwrap()], tmp.path()).unwrap();
        let text = std::fs::read_to_string(svg).unwrap();
        assert!(text.starts_with("<svg") && text.contains(">empty</text>"));
        assert!(!text.contains("<polyline"));
    }

    #[test]
    fn verify_subcommand_passes() {
        let tmp = tempfile::tempdir().unwrap();
        assert_eq!(run(&["verify", "--instances", "10"], tmp.path()).unwrap(), exit::OK);
    }
}
