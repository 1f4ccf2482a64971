use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use gfdm_mimo::sim::{
    format_sig, run_sweep, table1_cm, verify_suite, write_report, Overrides, Scheme, SimConfig, DESK_SCALE_MAX_BLOCK,
};

/// Tolerance on the relative residual reported by `verify`.
const VERIFY_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "gfdm-sim", version, about = "MIMO-GFDM decoupled detection: sweeps, complexity counts and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded SER/complexity sweep and write a CSV report.
    Simulate {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Schemes to run, comma separated (replaces `scheme`).
        #[arg(long, value_delimiter = ',')]
        scheme: Option<Vec<String>>,
        /// SNR points in dB, comma separated; `inf` disables noise.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        snr: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Channel realizations per SNR point.
        #[arg(long)]
        channels: Option<usize>,
        /// Data blocks per channel realization.
        #[arg(long)]
        blocks: Option<usize>,
        /// Allow block lengths above the desk-scale limit.
        #[arg(long)]
        large: bool,
        /// Charge the cyclic prefix energy to the SNR.
        #[arg(long)]
        cp_loss: bool,
    },
    /// Print the closed-form CM counts of the QR and SIC stages.
    Complexity {
        #[arg(long)]
        scheme: String,
        #[arg(short = 'K')]
        k: usize,
        #[arg(short = 'M')]
        m: usize,
        #[arg(short = 'T')]
        t: usize,
        #[arg(short = 'R')]
        r: usize,
    },
    /// Check the decoupled factorization on random channels and print the max residual.
    Verify {
        /// Channel realizations per grid point.
        #[arg(long, default_value_t = 100)]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> gfdm_mimo::Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            scheme,
            snr,
            seed,
            out,
            channels,
            blocks,
            large,
            cp_loss,
        } => {
            let overrides = Overrides {
                schemes: scheme,
                snr_db: snr,
                seed,
                out,
                n_channels: channels,
                n_blocks: blocks,
                cp_loss,
            };
            let cfg = overrides.apply(SimConfig::from_file(&config)?)?;
            cfg.check_scale(large)?;
            if cfg.block_len() > DESK_SCALE_MAX_BLOCK {
                warn!(
                    "paper-scale run (D = {}): the full-matrix baseline factors a {}x{} matrix per realization",
                    cfg.block_len(),
                    cfg.rx * cfg.block_len(),
                    cfg.tx * cfg.block_len()
                );
            }
            let records = run_sweep(&cfg)?;
            write_report(&records, &cfg.out)?;
            println!("{:>8}  {:<20} {:>12} {:>14} {:>12}", "snr_db", "scheme", "ser", "total_cm_avg", "time_s");
            for r in &records {
                println!(
                    "{:>8}  {:<20} {:>12} {:>14} {:>12.3}",
                    format_sig(r.snr_db),
                    r.scheme.to_string(),
                    format_sig(r.ser()),
                    format_sig(r.total_cm_avg()),
                    r.wall_time.as_secs_f64()
                );
            }
            info!("wrote {}", cfg.out.display());
            println!("report: {}", cfg.out.display());
            Ok(true)
        }
        Command::Complexity { scheme, k, m, t, r } => {
            let scheme: Scheme = scheme.parse()?;
            let c = table1_cm(&scheme, k, m, t, r)?;
            println!("scheme   {scheme}");
            println!("K,M,T,R  {k},{m},{t},{r}");
            println!("cm_sqrd  {}", c.cm_sqrd);
            println!("cm_sic   {}", c.cm_sic);
            println!("total    {}", c.total());
            Ok(true)
        }
        Command::Verify { channels, seed } => {
            let report = verify_suite(seed, channels)?;
            for c in &report.cases {
                println!(
                    "K={:<3} M={:<3} T={:<2} R={:<2} channels={:<5} max_residual={:.3e}",
                    c.subcarriers, c.subsymbols, c.tx, c.rx, c.channels, c.max_residual
                );
            }
            let max = report.max_residual();
            let ok = max <= VERIFY_TOL;
            println!("max residual {max:.3e} ({})", if ok { "ok" } else { "FAILED" });
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
