//! IDEA assembly programs for the simulated processor, plus the harness
//! that runs them and checks the results against the software reference.
//!
//! A generated program is self-contained: its data segment carries the
//! initial key, the block count and the input blocks. The text segment
//! first materializes subkeys 8..=51 with the shift-left-9 / shift-right-7
//! / OR recurrence (the first eight subkeys are the key words themselves,
//! preloaded), for decryption derives the inverse schedule on-processor
//! with `adi`/`mui`, and then runs the 8.5-round cipher over all blocks in
//! a loop, writing results to the output region and halting.

use std::fmt;
use std::fmt::Write as _;

use crate::asm::{self, AsmError};
use crate::idea::{self, Block, InitialKey, SUBKEY_COUNT};
use crate::machine::{MachineFault, MachineState, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

/// One batch of blocks to push through the simulated processor.
#[derive(Debug, Clone)]
pub struct IdeaJob {
    pub key: InitialKey,
    pub blocks: Vec<Block>,
    pub direction: Direction,
}

/// Where the generated program keeps its data, as data-memory word
/// addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataLayout {
    /// 52 encryption subkeys; the first 8 are the initial key words.
    pub subkeys: u16,
    /// 52 decryption subkeys (computed on-processor for decrypt jobs).
    pub dec_keys: u16,
    /// Number of blocks to process.
    pub block_count: u16,
    /// Input blocks, 4 words each.
    pub input: u16,
    /// Output blocks, 4 words each.
    pub output: u16,
}

/// Cycle figures and outputs measured from one simulator run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdeaRunReport {
    pub outputs: Vec<Block>,
    /// Cycles attributable to the first block: program setup, subkey
    /// generation (and inversion for decrypt jobs), the block itself and
    /// the final halt.
    pub cycles_first_block: u64,
    /// Steady-state cycles per additional block (0 for single-block jobs,
    /// where there is no loop period to measure).
    pub cycles_per_steady_block: u64,
    pub total_cycles: u64,
}

#[derive(Debug)]
pub enum HarnessError {
    /// The job has no blocks.
    EmptyJob,
    /// Input and output regions do not fit in data memory.
    CapacityExceeded { blocks: usize, max: usize },
    /// The generated program failed to assemble (a generator bug).
    Assemble(AsmError),
    /// The simulated machine faulted; the trace up to the fault is attached.
    Fault {
        fault: MachineFault,
        trace: Vec<TraceRecord>,
    },
    /// The run did not halt within the cycle budget.
    CycleBudgetExceeded { max_cycles: u64 },
    /// A simulator output disagrees with the software reference.
    OracleMismatch {
        block: usize,
        simulator: Block,
        reference: Block,
    },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::EmptyJob => write!(f, "job contains no blocks"),
            HarnessError::CapacityExceeded { blocks, max } => {
                write!(f, "{blocks} blocks exceed data-memory capacity ({max})")
            }
            HarnessError::Assemble(e) => write!(f, "generated program failed to assemble: {e}"),
            HarnessError::Fault { fault, .. } => write!(f, "machine fault: {fault}"),
            HarnessError::CycleBudgetExceeded { max_cycles } => {
                write!(f, "program did not halt within {max_cycles} cycles")
            }
            HarnessError::OracleMismatch {
                block,
                simulator,
                reference,
            } => write!(
                f,
                "block {block}: simulator produced {simulator}, reference says {reference}"
            ),
        }
    }
}

impl std::error::Error for HarnessError {}

const SUBKEYS: u16 = 0;
const DEC_KEYS: u16 = SUBKEYS + SUBKEY_COUNT as u16;
const BLOCK_COUNT: u16 = DEC_KEYS + SUBKEY_COUNT as u16;
const INPUT: u16 = BLOCK_COUNT + 1;

/// Largest block count whose input and output regions still fit.
pub fn max_blocks() -> usize {
    (asm::MEMORY_WORDS - usize::from(INPUT)) / 8
}

/// Emits the assembly program and data layout for a job.
pub fn build_idea_program(job: &IdeaJob) -> Result<(String, DataLayout), HarnessError> {
    if job.blocks.is_empty() {
        return Err(HarnessError::EmptyJob);
    }
    if job.blocks.len() > max_blocks() {
        return Err(HarnessError::CapacityExceeded {
            blocks: job.blocks.len(),
            max: max_blocks(),
        });
    }
    let n = job.blocks.len();
    let layout = DataLayout {
        subkeys: SUBKEYS,
        dec_keys: DEC_KEYS,
        block_count: BLOCK_COUNT,
        input: INPUT,
        output: INPUT + 4 * n as u16,
    };
    let key_base = match job.direction {
        Direction::Encrypt => layout.subkeys,
        Direction::Decrypt => layout.dec_keys,
    };

    let mut s = String::new();
    let verb = match job.direction {
        Direction::Encrypt => "encrypts",
        Direction::Decrypt => "decrypts",
    };
    let _ = writeln!(s, "# IDEA: {verb} {n} block(s) on the crypto processor.");
    let _ = writeln!(s, "#");
    let _ = writeln!(s, "# data layout (word addresses):");
    let _ = writeln!(
        s,
        "#   {:>5}..{:<5} subkeys (words 0..7 preloaded with the initial key)",
        layout.subkeys,
        layout.subkeys + 51
    );
    let _ = writeln!(
        s,
        "#   {:>5}..{:<5} decryption subkeys",
        layout.dec_keys,
        layout.dec_keys + 51
    );
    let _ = writeln!(s, "#   {:>5}        block count", layout.block_count);
    let _ = writeln!(
        s,
        "#   {:>5}..{:<5} input blocks",
        layout.input,
        layout.output - 1
    );
    let _ = writeln!(
        s,
        "#   {:>5}..{:<5} output blocks",
        layout.output,
        layout.output + 4 * n as u16 - 1
    );
    s.push_str(".data\n");
    let _ = writeln!(
        s,
        "subkeys: .word 0x{:04x}, 0x{:04x}, 0x{:04x}, 0x{:04x}, 0x{:04x}, 0x{:04x}, 0x{:04x}, 0x{:04x}",
        job.key.0[0], job.key.0[1], job.key.0[2], job.key.0[3],
        job.key.0[4], job.key.0[5], job.key.0[6], job.key.0[7],
    );
    emit_zero_words(&mut s, 44);
    s.push_str("deckeys:\n");
    emit_zero_words(&mut s, 52);
    let _ = writeln!(s, "nblocks: .word {n}");
    s.push_str("input:\n");
    for b in &job.blocks {
        let _ = writeln!(
            s,
            ".word 0x{:04x}, 0x{:04x}, 0x{:04x}, 0x{:04x}",
            b.0[0], b.0[1], b.0[2], b.0[3]
        );
    }
    s.push_str("output:\n");
    emit_zero_words(&mut s, 4 * n);

    s.push_str(".text\n");
    s.push_str("lwi $0,0                 # $0 = constant zero / address base\n");

    s.push_str("# subkeys 8..51: shift-left-9 one source word, shift-right-7 the\n");
    s.push_str("# next, OR them together\n");
    for i in 8..SUBKEY_COUNT {
        let base = (i / 8) * 8 - 8;
        let hi = layout.subkeys + (base + (i + 1) % 8) as u16;
        let lo = layout.subkeys + (base + (i + 2) % 8) as u16;
        let _ = writeln!(s, "lw $5,{hi}($0)");
        s.push_str("shl $5,$5,9\n");
        let _ = writeln!(s, "lw $6,{lo}($0)");
        s.push_str("shr $6,$6,7\n");
        s.push_str("or $5,$5,$6\n");
        let _ = writeln!(s, "sw $5,{}($0)", layout.subkeys + i as u16);
    }

    if job.direction == Direction::Decrypt {
        s.push_str("# decryption subkeys: mirrored rounds, positions 1/4 through the\n");
        s.push_str("# inverse LUT (mui), positions 2/3 additively inverted (adi)\n");
        for round in 1..=9u16 {
            let dst = layout.dec_keys + 6 * (round - 1);
            let src = layout.subkeys + 6 * (9 - round); // round 10-i, zero-based
            let edges = round == 1 || round == 9;
            let invert = [
                (dst, src, "mui"),
                (dst + 1, if edges { src + 1 } else { src + 2 }, "adi"),
                (dst + 2, if edges { src + 2 } else { src + 1 }, "adi"),
                (dst + 3, src + 3, "mui"),
            ];
            for (to, from, op) in invert {
                let _ = writeln!(s, "lw $5,{from}($0)");
                let _ = writeln!(s, "{op} $5,$5");
                let _ = writeln!(s, "sw $5,{to}($0)");
            }
            if round <= 8 {
                let carry = layout.subkeys + 6 * (8 - round); // round 9-i
                for pos in [4u16, 5] {
                    let _ = writeln!(s, "lw $5,{}($0)", carry + pos);
                    let _ = writeln!(s, "sw $5,{}($0)", dst + pos);
                }
            }
        }
    }

    let _ = writeln!(s, "lw $24,{}($0)            # remaining block count", layout.block_count);
    let _ = writeln!(s, "lwi $22,{}              # input pointer", layout.input);
    let _ = writeln!(s, "lwi $23,{}              # output pointer", layout.output);
    s.push_str("block_loop:\n");
    s.push_str("lw $1,0($22)\n");
    s.push_str("lw $2,1($22)\n");
    s.push_str("lw $3,2($22)\n");
    s.push_str("lw $4,3($22)\n");
    let _ = writeln!(s, "lwi $20,{key_base}              # subkey pointer");
    s.push_str("lwi $21,8                # round counter\n");
    s.push_str("round_loop:\n");
    s.push_str("lw $5,0($20)\n");
    s.push_str("mulm $7,$1,$5            # A = x0 * K1\n");
    s.push_str("lw $5,1($20)\n");
    s.push_str("addm $8,$2,$5            # B = x1 + K2\n");
    s.push_str("lw $5,2($20)\n");
    s.push_str("addm $9,$3,$5            # C = x2 + K3\n");
    s.push_str("lw $5,3($20)\n");
    s.push_str("mulm $10,$4,$5           # D = x3 * K4\n");
    s.push_str("xor $11,$7,$9            # E = A ^ C\n");
    s.push_str("xor $12,$8,$10           # F = B ^ D\n");
    s.push_str("lw $5,4($20)\n");
    s.push_str("mulm $11,$11,$5          # G = E * K5\n");
    s.push_str("addm $12,$12,$11         # F + G\n");
    s.push_str("lw $5,5($20)\n");
    s.push_str("mulm $12,$12,$5          # H = (F + G) * K6\n");
    s.push_str("addm $13,$11,$12         # I2 = G + H\n");
    s.push_str("xor $1,$7,$12            # x0 = A ^ H\n");
    s.push_str("xor $2,$9,$12            # x1 = C ^ H\n");
    s.push_str("xor $3,$8,$13            # x2 = B ^ I2\n");
    s.push_str("xor $4,$10,$13           # x3 = D ^ I2\n");
    s.push_str("addi $20,$20,6           # next round's subkeys\n");
    s.push_str("dec $21,$21\n");
    s.push_str("bne $21,$0,round_loop\n");
    s.push_str("# output transform; the last swap is undone by reading x1/x2 crossed\n");
    s.push_str("lw $5,0($20)\n");
    s.push_str("mulm $1,$1,$5            # y0 = x0 * K1\n");
    s.push_str("lw $5,1($20)\n");
    s.push_str("addm $6,$3,$5            # y1 = x2 + K2\n");
    s.push_str("lw $5,2($20)\n");
    s.push_str("addm $7,$2,$5            # y2 = x1 + K3\n");
    s.push_str("lw $5,3($20)\n");
    s.push_str("mulm $4,$4,$5            # y3 = x3 * K4\n");
    s.push_str("sw $1,0($23)\n");
    s.push_str("sw $6,1($23)\n");
    s.push_str("sw $7,2($23)\n");
    s.push_str("sw $4,3($23)\n");
    s.push_str("addi $22,$22,4\n");
    s.push_str("addi $23,$23,4\n");
    s.push_str("dec $24,$24\n");
    s.push_str("bne $24,$0,block_loop\n");
    s.push_str("halt\n");

    Ok((s, layout))
}

fn emit_zero_words(s: &mut String, count: usize) {
    let mut left = count;
    while left > 0 {
        let chunk = left.min(8);
        s.push_str(".word ");
        for i in 0..chunk {
            if i > 0 {
                s.push_str(", ");
            }
            s.push('0');
        }
        s.push('\n');
        left -= chunk;
    }
}

/// Reference results for a job, straight from the software implementation.
pub fn oracle_outputs(job: &IdeaJob) -> Vec<Block> {
    let enc = idea::expand_key(&job.key);
    match job.direction {
        Direction::Encrypt => job
            .blocks
            .iter()
            .map(|&b| idea::encrypt_block(b, &enc))
            .collect(),
        Direction::Decrypt => {
            let dec = idea::invert_schedule(&enc);
            job.blocks
                .iter()
                .map(|&b| idea::decrypt_block(b, &dec))
                .collect()
        }
    }
}

/// Assembles, runs and measures a job, returning the final machine state
/// alongside the report. Outputs are verified against the reference.
pub fn run_idea_machine(
    job: &IdeaJob,
    max_cycles: u64,
) -> Result<(IdeaRunReport, MachineState), HarnessError> {
    let (source, layout) = build_idea_program(job)?;
    let assembly = asm::assemble_full(&source).map_err(HarnessError::Assemble)?;
    let loop_head = assembly.symbols["block_loop"].addr;
    let mut m = MachineState::load(&assembly.image).expect("generated images fit");

    let mut head_cycles: Vec<u64> = Vec::new();
    let mut trace: Vec<TraceRecord> = Vec::new();
    while !m.halted {
        if m.cycles >= max_cycles {
            return Err(HarnessError::CycleBudgetExceeded { max_cycles });
        }
        match m.step() {
            Ok(rec) => {
                if rec.pc == loop_head {
                    head_cycles.push(rec.cycle);
                }
                trace.push(rec);
            }
            Err(fault) => return Err(HarnessError::Fault { fault, trace }),
        }
    }

    let n = job.blocks.len();
    assert_eq!(head_cycles.len(), n, "loop head fetched once per block");
    let total_cycles = m.cycles;
    let steady = if n >= 2 {
        let period = head_cycles[1] - head_cycles[0];
        for pair in head_cycles.windows(2) {
            assert_eq!(pair[1] - pair[0], period, "irregular block loop");
        }
        period
    } else {
        0
    };
    let first = total_cycles - steady * (n as u64 - 1);

    let outputs: Vec<Block> = (0..n)
        .map(|k| {
            let base = usize::from(layout.output) + 4 * k;
            Block([
                m.dmem[base],
                m.dmem[base + 1],
                m.dmem[base + 2],
                m.dmem[base + 3],
            ])
        })
        .collect();

    let expected = oracle_outputs(job);
    for (i, (got, want)) in outputs.iter().zip(&expected).enumerate() {
        if got != want {
            return Err(HarnessError::OracleMismatch {
                block: i,
                simulator: *got,
                reference: *want,
            });
        }
    }

    let report = IdeaRunReport {
        outputs,
        cycles_first_block: first,
        cycles_per_steady_block: steady,
        total_cycles,
    };
    Ok((report, m))
}

/// Assembles, runs, measures and verifies a job on the simulator.
pub fn run_idea(job: &IdeaJob, max_cycles: u64) -> Result<IdeaRunReport, HarnessError> {
    run_idea_machine(job, max_cycles).map(|(report, _)| report)
}
