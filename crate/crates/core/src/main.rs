//! Command-line front end: assembler, disassembler, simulator runs with
//! tracing, IDEA jobs against the oracle and/or the simulated processor,
//! key-schedule dumps and the performance model.
//!
//! Exit codes: 0 success, 1 user error, 2 machine fault, 3 verification
//! mismatch.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use idea_asip::asm;
use idea_asip::idea::{self, Block, InitialKey};
use idea_asip::machine::{MachineState, TRACE_CSV_HEADER};
use idea_asip::perf;
use idea_asip::programs::{self, Direction, HarnessError, IdeaJob};

#[derive(Parser)]
#[command(name = "idea-asip", version, about = "Toolchain and simulator for a single-cycle IDEA crypto processor", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a source file into a hex instruction image
    Assemble {
        /// Assembly source file
        input: PathBuf,
        /// Output instruction image (8 hex digits per line)
        #[arg(short, long)]
        output: PathBuf,
        /// Output data image (4 hex digits per line)
        #[arg(long)]
        data_out: Option<PathBuf>,
    },
    /// Disassemble a hex instruction image to canonical assembly
    Disassemble {
        /// Instruction image file
        input: PathBuf,
    },
    /// Run an instruction image and print the consumed cycle count
    Run {
        /// Instruction image file
        input: PathBuf,
        #[command(flatten)]
        exec: ExecArgs,
        /// Write an execution trace CSV to this file
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run an instruction image, streaming the trace CSV to stdout
    Trace {
        /// Instruction image file
        input: PathBuf,
        #[command(flatten)]
        exec: ExecArgs,
    },
    /// Encrypt or decrypt blocks with IDEA
    Idea {
        /// 128-bit key as 32 hex digits
        #[arg(long)]
        key: String,
        /// Input blocks, 16 hex digits each, concatenated
        #[arg(long = "in")]
        input: String,
        /// enc or dec
        #[arg(long)]
        direction: String,
        /// Compute with the software reference (default)
        #[arg(long, group = "mode")]
        oracle: bool,
        /// Compute on the simulated processor
        #[arg(long, group = "mode")]
        on_simulator: bool,
        /// Compute both ways and fail on any difference
        #[arg(long, group = "mode")]
        both: bool,
    },
    /// Print the 52 subkeys for a key
    Keyschedule {
        /// 128-bit key as 32 hex digits
        #[arg(long)]
        key: String,
        /// Print the decryption schedule instead
        #[arg(long)]
        invert: bool,
    },
    /// Reproduce the published throughput figures
    Bench,
    /// Emit the runtime-versus-data CSV for both processor profiles
    Fig10 {
        /// Number of block counts to tabulate
        #[arg(long, default_value_t = 32)]
        blocks: u64,
        /// Output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExecArgs {
    /// Data image file loaded into data memory
    #[arg(long)]
    data: Option<PathBuf>,
    /// Stop after this many cycles
    #[arg(long, default_value_t = 1_000_000)]
    max_cycles: u64,
}

enum CliError {
    User(String),
    Fault(String),
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Fault(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Fault(m) | CliError::Mismatch(m) => m,
        }
    }
}

fn user<E: std::fmt::Display>(e: E) -> CliError {
    CliError::User(e.to_string())
}

fn main() -> ExitCode {
    // Die quietly when a pipe reader goes away (e.g. `keyschedule | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| user(format!("{}: {e}", path.display())))
}

fn load_machine(input: &PathBuf, exec: &ExecArgs) -> Result<MachineState, CliError> {
    let words = asm::parse_words_hex(&read_file(input)?).map_err(user)?;
    let data = match &exec.data {
        Some(path) => asm::parse_data_hex(&read_file(path)?).map_err(user)?,
        None => Vec::new(),
    };
    MachineState::load(&asm::MemoryImage { words, data }).map_err(user)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Assemble { input, output, data_out } => {
            let image = asm::assemble(&read_file(&input)?).map_err(user)?;
            write_file(&output, &asm::write_words_hex(&image.words))?;
            match data_out {
                Some(path) => write_file(&path, &asm::write_data_hex(&image.data))?,
                None if !image.data.is_empty() => {
                    eprintln!(
                        "note: {} data words dropped; pass --data-out to keep them",
                        image.data.len()
                    );
                }
                None => {}
            }
            Ok(())
        }
        Command::Disassemble { input } => {
            let words = asm::parse_words_hex(&read_file(&input)?).map_err(user)?;
            let dis = asm::disassemble(&asm::MemoryImage { words, data: vec![] });
            for w in &dis.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", dis.text);
            Ok(())
        }
        Command::Run { input, exec, trace } => {
            let mut m = load_machine(&input, &exec)?;
            let mut rows = trace.as_ref().map(|_| String::from(TRACE_CSV_HEADER) + "\n");
            let mut fault = None;
            while !m.halted && m.cycles < exec.max_cycles {
                match m.step() {
                    Ok(rec) => {
                        if let Some(rows) = rows.as_mut() {
                            rows.push_str(&rec.csv_row());
                            rows.push('\n');
                        }
                    }
                    Err(f) => {
                        fault = Some(f);
                        break;
                    }
                }
            }
            if let (Some(path), Some(rows)) = (&trace, &rows) {
                write_file(path, rows)?;
            }
            println!("cycles: {}", m.cycles);
            if let Some(f) = fault {
                return Err(CliError::Fault(f.to_string()));
            }
            if !m.halted {
                eprintln!("note: stopped after {} cycles without halting", m.cycles);
            }
            Ok(())
        }
        Command::Trace { input, exec } => {
            let mut m = load_machine(&input, &exec)?;
            println!("{TRACE_CSV_HEADER}");
            while !m.halted && m.cycles < exec.max_cycles {
                match m.step() {
                    Ok(rec) => println!("{}", rec.csv_row()),
                    Err(f) => return Err(CliError::Fault(f.to_string())),
                }
            }
            Ok(())
        }
        Command::Idea { key, input, direction, oracle, on_simulator, both } => {
            let key: InitialKey = key.parse().map_err(user)?;
            let blocks = parse_blocks(&input)?;
            let direction = match direction.as_str() {
                "enc" => Direction::Encrypt,
                "dec" => Direction::Decrypt,
                other => return Err(user(format!("direction must be enc or dec, got '{other}'"))),
            };
            let job = IdeaJob { key, blocks, direction };
            let budget = 2_000 + 300 * job.blocks.len() as u64;

            let outputs = if oracle || (!on_simulator && !both) {
                programs::oracle_outputs(&job)
            } else {
                // Simulator runs verify against the oracle; for --both a
                // disagreement maps to the mismatch exit code.
                let report = programs::run_idea(&job, budget).map_err(|e| match e {
                    HarnessError::OracleMismatch { .. } => CliError::Mismatch(e.to_string()),
                    HarnessError::Fault { ref fault, .. } => CliError::Fault(fault.to_string()),
                    other => user(other),
                })?;
                report.outputs
            };
            let line: String = outputs.iter().map(Block::to_string).collect();
            println!("{line}");
            Ok(())
        }
        Command::Keyschedule { key, invert } => {
            let key: InitialKey = key.parse().map_err(user)?;
            let mut schedule = idea::expand_key(&key);
            if invert {
                schedule = idea::invert_schedule(&schedule);
            }
            for k in schedule.words() {
                println!("{k:04X}");
            }
            Ok(())
        }
        Command::Bench => {
            for p in [&perf::PROPOSED, &perf::PREVIOUS] {
                let mbps = perf::throughput_mbps(64, p.clock_mhz(), p.cycles_steady_block);
                // Truncate to three decimals, matching the published figures.
                println!(
                    "{}: 64 bits x {:.3} MHz / {} cycles = {:.3} Mbps",
                    p.name,
                    p.clock_mhz(),
                    p.cycles_steady_block,
                    (mbps * 1000.0).floor() / 1000.0
                );
            }
            Ok(())
        }
        Command::Fig10 { blocks, output } => {
            if blocks == 0 {
                return Err(user("--blocks must be at least 1"));
            }
            let csv = perf::runtime_csv(blocks);
            match output {
                Some(path) => write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn parse_blocks(s: &str) -> Result<Vec<Block>, CliError> {
    let s = s.trim();
    if s.is_empty() || !s.len().is_multiple_of(16) {
        return Err(user(format!(
            "input must be one or more 16-hex-digit blocks, got {} digits",
            s.len()
        )));
    }
    (0..s.len() / 16)
        .map(|i| s[16 * i..16 * (i + 1)].parse::<Block>().map_err(user))
        .collect()
}
