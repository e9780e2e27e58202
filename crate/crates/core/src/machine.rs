//! Cycle-accurate simulator of the single-cycle datapath.
//!
//! Each `step` models one clock cycle: fetch, decode and execute complete
//! atomically. All register and memory reads observe the state from before
//! the cycle; all writes commit together at its end (asynchronous read,
//! synchronous write). Exactly one instruction finishes per cycle, so the
//! cycle counter always equals the number of executed instructions.
//!
//! Instruction and data memories are separate, 65536 words each, addressed
//! by 16-bit values. Faults (undecodable word, division by zero, PC falling
//! off the address space) freeze the machine like HLT does, but carry a
//! distinguishable status; the faulting cycle does not commit.

use std::fmt;

use crate::alsu::{self, AlsuError, AlsuOutput};
use crate::asm::{self, MemoryImage, MEMORY_WORDS};
use crate::isa::{self, Mnemonic, OperandA, OperandB, PcAction, WriteTarget};

/// Full architectural state of the processor.
#[derive(Clone)]
pub struct MachineState {
    pub pc: u16,
    pub regs: [u16; 32],
    pub imem: Box<[u32]>,
    pub dmem: Box<[u16]>,
    pub cycles: u64,
    pub halted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    Decode(isa::DecodeError),
    Arithmetic(AlsuError),
    PcOutOfRange(i64),
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultKind::Decode(e) => write!(f, "decode fault: {e}"),
            FaultKind::Arithmetic(e) => write!(f, "arithmetic fault: {e}"),
            FaultKind::PcOutOfRange(t) => write!(f, "pc target {t} out of range"),
        }
    }
}

/// A fault, pinned to the cycle and PC where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineFault {
    pub kind: FaultKind,
    pub cycle: u64,
    pub pc: u16,
}

impl fmt::Display for MachineFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at cycle {} pc 0x{:04x}", self.kind, self.cycle, self.pc)
    }
}

impl std::error::Error for MachineFault {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Halted,
    MaxCyclesExceeded,
    Fault(MachineFault),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunResult {
    pub status: RunStatus,
    pub cycles: u64,
}

/// One executed cycle, as recorded in the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    pub pc: u16,
    pub raw: u32,
    pub disassembly: String,
    /// Register write as (index, old, new); at most one per cycle.
    pub reg_write: Option<(u8, u16, u16)>,
    /// Data-memory write as (address, old, new); at most one per cycle.
    pub mem_write: Option<(u16, u16, u16)>,
    /// ALSU flags, when the instruction used the unit.
    pub alsu: Option<AlsuOutput>,
    pub pc_next: u16,
}

/// Column header for the trace CSV format.
pub const TRACE_CSV_HEADER: &str = "cycle,pc,raw,disassembly,reg_write,mem_write,flags,pc_next";

impl TraceRecord {
    /// Renders the record as one CSV row (the disassembly field is quoted).
    pub fn csv_row(&self) -> String {
        let reg = match self.reg_write {
            Some((r, old, new)) => format!("${r}:{old:04x}->{new:04x}"),
            None => String::new(),
        };
        let mem = match self.mem_write {
            Some((a, old, new)) => format!("[{a:04x}]:{old:04x}->{new:04x}"),
            None => String::new(),
        };
        let flags = match &self.alsu {
            Some(out) => {
                let bit = |set, ch| if set { ch } else { '-' };
                format!(
                    "{}{}{}{}",
                    bit(out.zero, 'z'),
                    bit(out.sign, 's'),
                    bit(out.carry, 'c'),
                    bit(out.overflow, 'v')
                )
            }
            None => String::new(),
        };
        format!(
            "{},{:04x},{:08x},\"{}\",{},{},{},{:04x}",
            self.cycle, self.pc, self.raw, self.disassembly, reg, mem, flags, self.pc_next
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadError {
    pub segment: asm::Segment,
    pub words: usize,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.segment {
            asm::Segment::Text => "instruction",
            asm::Segment::Data => "data",
        };
        write!(
            f,
            "{name} image of {} words exceeds {MEMORY_WORDS}",
            self.words
        )
    }
}

impl std::error::Error for LoadError {}

impl MachineState {
    /// Builds a reset machine with the given images loaded at address 0.
    pub fn load(image: &MemoryImage) -> Result<Self, LoadError> {
        if image.words.len() > MEMORY_WORDS {
            return Err(LoadError {
                segment: asm::Segment::Text,
                words: image.words.len(),
            });
        }
        if image.data.len() > MEMORY_WORDS {
            return Err(LoadError {
                segment: asm::Segment::Data,
                words: image.data.len(),
            });
        }
        let mut imem = vec![0u32; MEMORY_WORDS].into_boxed_slice();
        imem[..image.words.len()].copy_from_slice(&image.words);
        let mut dmem = vec![0u16; MEMORY_WORDS].into_boxed_slice();
        dmem[..image.data.len()].copy_from_slice(&image.data);
        Ok(Self {
            pc: 0,
            regs: [0; 32],
            imem,
            dmem,
            cycles: 0,
            halted: false,
        })
    }

    /// Executes one clock cycle.
    ///
    /// On a fault the machine freezes without committing the cycle and the
    /// fault is returned; the cycle counter only advances on success.
    pub fn step(&mut self) -> Result<TraceRecord, MachineFault> {
        assert!(!self.halted, "step on a halted machine");
        let fault = |kind| MachineFault {
            kind,
            cycle: self.cycles,
            pc: self.pc,
        };

        let raw = self.imem[usize::from(self.pc)];
        let d = match isa::decode(raw) {
            Ok(d) => d,
            Err(e) => {
                self.halted = true;
                return Err(fault(FaultKind::Decode(e)));
            }
        };
        let sig = isa::control_signals(&d);

        // Operand selection; shift amounts are masked to 4 bits here.
        let a = match sig.operand_a {
            OperandA::Rs => self.regs[usize::from(d.rs)],
            OperandA::Imm => d.imm,
            OperandA::Shamt => u16::from(d.shamt & 0x0F),
        };
        let b = match sig.operand_b {
            OperandB::Rt => self.regs[usize::from(d.rt)],
            OperandB::Imm => d.imm,
        };
        let rt_value = self.regs[usize::from(d.rt)];

        let alsu_out = match sig.alsu_opcode {
            Some(op) => match alsu::execute(op, a, b) {
                Ok(out) => Some(out),
                Err(e) => {
                    self.halted = true;
                    return Err(fault(FaultKind::Arithmetic(e)));
                }
            },
            None => None,
        };
        let alsu_result = alsu_out.map(|o| o.result).unwrap_or(0);

        let mem_write = match d.mnemonic {
            Mnemonic::Sw => Some((alsu_result, rt_value)),
            Mnemonic::Swi => Some((alsu_result, d.imm)),
            _ => None,
        };

        let incremented = || -> Result<u16, MachineFault> {
            u16::checked_add(self.pc, 1)
                .ok_or_else(|| fault(FaultKind::PcOutOfRange(i64::from(self.pc) + 1)))
        };
        let branch_target = || -> Result<u16, MachineFault> {
            let target = i64::from(self.pc) + 1 + i64::from(d.imm as i16);
            u16::try_from(target).map_err(|_| fault(FaultKind::PcOutOfRange(target)))
        };

        let zero = alsu_out.map(|o| o.zero).unwrap_or(false);
        let pc_next = match sig.pc_action {
            PcAction::Increment => incremented(),
            PcAction::BranchEq => {
                if zero {
                    branch_target()
                } else {
                    incremented()
                }
            }
            PcAction::BranchNe => {
                if !zero {
                    branch_target()
                } else {
                    incremented()
                }
            }
            PcAction::JumpAddr => Ok(d.imm),
            PcAction::JumpReg => Ok(self.regs[usize::from(d.rs)]),
            PcAction::JumpLink => Ok(d.imm),
            PcAction::Halt => Ok(self.pc),
        };
        let pc_next = match pc_next {
            Ok(pc) => pc,
            Err(f) => {
                self.halted = true;
                return Err(f);
            }
        };

        let reg_write = if sig.reg_write {
            let value = if sig.pc_action == PcAction::JumpLink {
                match incremented() {
                    Ok(link) => link,
                    Err(f) => {
                        self.halted = true;
                        return Err(f);
                    }
                }
            } else if sig.to_register {
                alsu_result
            } else {
                // The only remaining register writer is LW.
                self.dmem[usize::from(alsu_result)]
            };
            let index = match sig.write_target {
                WriteTarget::Rd => d.rd,
                WriteTarget::Rt => d.rt,
            };
            Some((index, value))
        } else {
            None
        };

        // Commit phase: everything above observed pre-cycle state only.
        let record = TraceRecord {
            cycle: self.cycles,
            pc: self.pc,
            raw,
            disassembly: asm::format_word(raw),
            reg_write: reg_write.map(|(r, v)| (r, self.regs[usize::from(r)], v)),
            mem_write: mem_write.map(|(a, v)| (a, self.dmem[usize::from(a)], v)),
            alsu: alsu_out,
            pc_next,
        };
        if let Some((r, v)) = reg_write {
            self.regs[usize::from(r)] = v;
        }
        if let Some((a, v)) = mem_write {
            self.dmem[usize::from(a)] = v;
        }
        self.pc = pc_next;
        self.cycles += 1;
        if sig.pc_action == PcAction::Halt {
            self.halted = true;
        }
        Ok(record)
    }

    /// Runs until HLT, a fault, or the cycle counter reaches `max_cycles`.
    pub fn run(&mut self, max_cycles: u64) -> RunResult {
        assert!(max_cycles > 0, "max_cycles must be positive");
        while !self.halted && self.cycles < max_cycles {
            if let Err(f) = self.step() {
                return RunResult {
                    status: RunStatus::Fault(f),
                    cycles: self.cycles,
                };
            }
        }
        let status = if self.halted {
            RunStatus::Halted
        } else {
            RunStatus::MaxCyclesExceeded
        };
        RunResult {
            status,
            cycles: self.cycles,
        }
    }
}
