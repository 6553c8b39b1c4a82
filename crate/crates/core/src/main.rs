use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use imsim::harness::{
    load_experiment, parse_grid, parse_nr_grid, preset_experiments, preset_names, records_to_csv,
    run_nr_sweep, run_sweep, BerRecord,
};
use imsim::loadmod::{design_lm_alphabet, export_alphabet, import_alphabet, paspr};
use imsim::{emit_results, Error};

#[derive(Parser)]
#[command(name = "imsim", about = "Index-modulation link-level simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the rate (bpcu) of an experiment config
    Rate { config: PathBuf },
    /// Run a BER sweep over the config's (or --snr's) SNR grid
    Simulate {
        config: PathBuf,
        /// SNR grid a[:b[:step]] in dB, overriding the config
        #[arg(long)]
        snr: Option<String>,
        /// Master seed, overriding the config
        #[arg(long)]
        seed: Option<u64>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a JSON mirror of the records
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a BER sweep over receive-antenna counts at a fixed SNR
    SweepNr {
        config: PathBuf,
        /// SNR in dB
        #[arg(long)]
        snr: f64,
        /// Antenna grid a[:b[:step]]
        #[arg(long)]
        nr: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Design a load-modulation alphabet on the hypersphere
    LmAlphabet {
        #[arg(long)]
        nt: usize,
        #[arg(long)]
        nm: usize,
        /// Sphere radius squared (total transmit power)
        #[arg(long, default_value_t = 1.0)]
        power: f64,
        #[arg(long, default_value_t = 1234)]
        seed: u64,
        /// Write the alphabet here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the peak-to-average sum power ratio of an alphabet file
    Paspr { alphabet: PathBuf },
    /// List or run the named presets
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Run {
        name: String,
        /// Write CSV here instead of <name>.csv
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write_records(
    records: &[BerRecord],
    out: Option<&PathBuf>,
    json: Option<&PathBuf>,
) -> Result<(), Error> {
    match out {
        Some(path) => emit_results(records, path, json.map(|p| p.as_path()))?,
        None => {
            print!("{}", records_to_csv(records));
            if let Some(jp) = json {
                emit_results(records, &jp.with_extension("csv"), Some(jp.as_path()))?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Rate { config } => {
            let exp = load_experiment(&config)?;
            println!("{}", exp.scheme.rate());
        }
        Command::Simulate {
            config,
            snr,
            seed,
            out,
            json,
        } => {
            let mut exp = load_experiment(&config)?;
            if let Some(spec) = snr {
                exp.snr_grid_db = parse_grid(&spec)?;
            }
            if let Some(s) = seed {
                exp.master_seed = s;
            }
            let records = run_sweep(&exp)?;
            write_records(&records, out.as_ref(), json.as_ref())?;
        }
        Command::SweepNr {
            config,
            snr,
            nr,
            seed,
            out,
            json,
        } => {
            let mut exp = load_experiment(&config)?;
            exp.nr_grid = parse_nr_grid(&nr)?;
            if let Some(s) = seed {
                exp.master_seed = s;
            }
            let records = run_nr_sweep(&exp, snr)?;
            write_records(&records, out.as_ref(), json.as_ref())?;
        }
        Command::LmAlphabet {
            nt,
            nm,
            power,
            seed,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alphabet = design_lm_alphabet(nt, nm, power, &mut rng)?;
            let mut buf = Vec::new();
            export_alphabet(&alphabet, seed, &mut buf).expect("in-memory write");
            match out {
                Some(path) => fs::write(&path, buf).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
        }
        Command::Paspr { alphabet } => {
            let text = fs::read_to_string(&alphabet).map_err(|e| Error::Io {
                path: alphabet.display().to_string(),
                source: e,
            })?;
            let (a, _) = import_alphabet(text.as_bytes())?;
            println!("{}", paspr(&a));
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for name in preset_names() {
                    println!("{name}");
                }
            }
            PresetAction::Run { name, out, json } => {
                let mut records = Vec::new();
                for exp in preset_experiments(&name)? {
                    eprintln!("running {} ({})", exp.name, exp.detector.label());
                    let recs = if exp.nr_grid.is_empty() {
                        run_sweep(&exp)?
                    } else {
                        let snr = exp.snr_grid_db[0];
                        run_nr_sweep(&exp, snr)?
                    };
                    records.extend(recs);
                }
                let out = out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
                emit_results(&records, &out, json.as_deref())?;
                eprintln!("wrote {}", out.display());
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
