use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flashsim::config::SimConfig;
use flashsim::controller::MitigationConfig;
use flashsim::report::{render, Table};
use flashsim::scenarios::{
    calibrate, lifetime_report, run_interference_characterization, run_interference_exploit,
    run_read_disturb_characterization, run_read_disturb_exploit, CalibrationStep, ReadDisturbOptions,
};
use flashsim::Error;

#[derive(Parser)]
#[command(name = "flashsim", version, about = "MLC NAND two-step programming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized LSB RBER of a partially-programmed wordline under conditions A-D.
    CharacterizeInterference(Common),
    /// LSB RBER per wordline class after repeated reads, both pass-through policies.
    CharacterizeReadDisturb(WithReads),
    /// Program-interference exploit against a victim LSB page.
    AttackInterference(Common),
    /// Read-disturb exploit against pages written after the attack.
    AttackReadDisturb(WithReads),
    /// Lifetime in P/E cycles under single and multiple pass-through voltages.
    Lifetime(WithReads),
    /// Fit the model knobs to the target ratios and emit the calibrated config.
    Calibrate(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's seed.
    #[arg(long, env = "FLASHSIM_SEED")]
    seed: Option<u64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated mitigations: buffer, adaptive, multi-vpass, scramble, all, none.
    #[arg(long)]
    mitigations: Option<String>,
    /// Run consecutive seeds and concatenate their rows in seed order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
}

#[derive(Args, Clone)]
struct WithReads {
    #[command(flatten)]
    common: Common,
    /// Read count; defaults to the scenario's configured count.
    #[arg(long)]
    reads: Option<u64>,
}

fn load(common: &Common) -> Result<(SimConfig, MitigationConfig), Error> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config { line: 0, message: format!("{}: {e}", p.display()) })?;
            SimConfig::parse(&text)?
        }
        None => SimConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let m = match &common.mitigations {
        Some(list) => MitigationConfig::parse_list(list)?,
        None => cfg.mitigations,
    };
    cfg.mitigations = m;
    Ok((cfg, m))
}

/// Runs `f` once per seed and prefixes every row with its seed.
fn per_seed(cfg: &SimConfig, repeats: u64, mut f: impl FnMut(u64) -> flashsim::Result<Table>) -> flashsim::Result<Table> {
    let mut out: Option<Table> = None;
    for r in 0..repeats {
        let seed = cfg.seed.wrapping_add(r);
        let t = f(seed)?;
        let acc = out.get_or_insert_with(|| {
            let mut cols = vec!["seed"];
            cols.extend(t.columns.iter().copied());
            Table::new(&cols)
        });
        for row in t.rows {
            let mut full = vec![seed.to_string()];
            full.extend(row);
            acc.push(full);
        }
    }
    Ok(out.expect("repeats is at least 1"))
}

fn run(cli: Cli) -> flashsim::Result<(String, Option<PathBuf>)> {
    let (name, common, reads) = match &cli.command {
        Command::CharacterizeInterference(c) => ("characterize-interference", c.clone(), None),
        Command::CharacterizeReadDisturb(w) => ("characterize-read-disturb", w.common.clone(), w.reads),
        Command::AttackInterference(c) => ("attack-interference", c.clone(), None),
        Command::AttackReadDisturb(w) => ("attack-read-disturb", w.common.clone(), w.reads),
        Command::Lifetime(w) => ("lifetime", w.common.clone(), w.reads),
        Command::Calibrate(c) => ("calibrate", c.clone(), None),
    };
    let (cfg, m) = load(&common)?;
    let mut extra = vec![("repeats".to_string(), common.repeats.to_string())];
    let table = match &cli.command {
        Command::CharacterizeInterference(_) => {
            per_seed(&cfg, common.repeats, |s| Ok(run_interference_characterization(&cfg, s)?.table()))?
        }
        Command::CharacterizeReadDisturb(_) => {
            let n = reads.unwrap_or(cfg.char_reads);
            extra.push(("reads".into(), n.to_string()));
            per_seed(&cfg, common.repeats, |s| {
                Ok(run_read_disturb_characterization(&cfg, n, s, ReadDisturbOptions::default())?.table())
            })?
        }
        Command::AttackInterference(_) => {
            per_seed(&cfg, common.repeats, |s| Ok(run_interference_exploit(&cfg, m, s)?.table()))?
        }
        Command::AttackReadDisturb(_) => {
            let n = reads.unwrap_or(cfg.attack_reads);
            extra.push(("reads".into(), n.to_string()));
            per_seed(&cfg, common.repeats, |s| Ok(run_read_disturb_exploit(&cfg, m, n, s)?.table()))?
        }
        Command::Lifetime(_) => {
            let n = reads.unwrap_or(cfg.lifetime_reads);
            extra.push(("reads".into(), n.to_string()));
            per_seed(&cfg, common.repeats, |s| Ok(lifetime_report(&cfg, m, n, s)?.table(&cfg)))?
        }
        Command::Calibrate(_) => {
            let (fitted, steps) = calibrate(&cfg, cfg.seed)?;
            let mut text = String::new();
            let t = CalibrationStep::table(&steps);
            for row in &t.rows {
                text.push_str(&format!("# {}\n", row.join(" ")));
            }
            text.push_str(&fitted.emit());
            return Ok((text, common.out));
        }
    };
    Ok((render(name, &cfg, &extra, &table)?, common.out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((text, out)) => match out {
            Some(p) => match std::fs::write(&p, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {}: {e}", p.display());
                    ExitCode::from(1)
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
