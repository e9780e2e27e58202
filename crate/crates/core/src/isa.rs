//! Instruction set: binary encoding/decoding and hardwired control signals.
//!
//! Instructions are 32 bits wide in the classic MIPS layout. R-type
//! instructions carry opcode 0 and select their operation through the
//! 6-bit function field; everything else is I-type with a 16-bit
//! data/offset/address field.
//!
//! ```text
//! R: opcode[31:26]=0 | rs[25:21] | rt[20:16] | rd[15:11] | shamt[10:6] | function[5:0]
//! I: opcode[31:26]   | rs[25:21] | rt[20:16] | imm[15:0]
//! ```

use std::fmt;

use crate::alsu::AlsuOpcode;

/// Instruction format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    R,
    I,
}

/// Operand shape of a mnemonic, as written in assembly source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operands {
    /// `op $rd,$rs,$rt`
    RdRsRt,
    /// `op $rd,$rs`
    RdRs,
    /// `op $rd,$rt`
    RdRt,
    /// `op $rd,$rt,shift`
    RdRtShift,
    /// `op $rt,$rs,imm`
    RtRsImm,
    /// `op $rt,imm`
    RtImm,
    /// `op $rt,$rs,offset` (conditional branch)
    RtRsOffset,
    /// `op addr`
    Addr,
    /// `op $rs`
    Rs,
    /// `op $rt,addr`
    RtAddr,
    /// `op $rt,offset($rs)`
    RtMem,
    /// `op $rs,imm`
    RsImm,
    /// bare mnemonic
    None,
}

macro_rules! mnemonics {
    ($( $variant:ident, $text:literal, $format:ident, $opcode:literal, $function:expr, $operands:ident; )*) => {
        /// Every instruction of the processor.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Mnemonic {
            $( $variant, )*
        }

        impl Mnemonic {
            pub const ALL: &'static [Mnemonic] = &[ $( Mnemonic::$variant, )* ];

            /// Lower-case assembly spelling.
            pub fn text(self) -> &'static str {
                match self { $( Mnemonic::$variant => $text, )* }
            }

            pub fn format(self) -> Format {
                match self { $( Mnemonic::$variant => Format::$format, )* }
            }

            /// Major opcode (0 for every R-type instruction).
            pub fn opcode(self) -> u8 {
                match self { $( Mnemonic::$variant => $opcode, )* }
            }

            /// Function code; present exactly for R-type instructions.
            pub fn function(self) -> Option<u8> {
                match self { $( Mnemonic::$variant => $function, )* }
            }

            pub fn operands(self) -> Operands {
                match self { $( Mnemonic::$variant => Operands::$operands, )* }
            }
        }
    };
}

mnemonics! {
    And,   "and",   R, 0,  Some(0),  RdRsRt;
    Andi,  "andi",  I, 1,  None,     RtRsImm;
    Nand,  "nand",  R, 0,  Some(1),  RdRsRt;
    Nandi, "nandi", I, 2,  None,     RtRsImm;
    Or,    "or",    R, 0,  Some(2),  RdRsRt;
    Ori,   "ori",   I, 3,  None,     RtRsImm;
    Nor,   "nor",   R, 0,  Some(3),  RdRsRt;
    Nori,  "nori",  I, 4,  None,     RtRsImm;
    Xor,   "xor",   R, 0,  Some(4),  RdRsRt;
    Xori,  "xori",  I, 5,  None,     RtRsImm;
    Xnor,  "xnor",  R, 0,  Some(5),  RdRsRt;
    Xnori, "xnori", I, 6,  None,     RtRsImm;
    Inv,   "inv",   R, 0,  Some(6),  RdRs;
    Invi,  "invi",  I, 7,  None,     RtImm;
    Shl,   "shl",   R, 0,  Some(7),  RdRtShift;
    Shr,   "shr",   R, 0,  Some(8),  RdRtShift;
    Ashl,  "ashl",  R, 0,  Some(9),  RdRtShift;
    Ashr,  "ashr",  R, 0,  Some(10), RdRtShift;
    Rol,   "rol",   R, 0,  Some(11), RdRtShift;
    Ror,   "ror",   R, 0,  Some(12), RdRtShift;
    Beq,   "beq",   I, 8,  None,     RtRsOffset;
    Bne,   "bne",   I, 9,  None,     RtRsOffset;
    J,     "j",     I, 10, None,     Addr;
    Jr,    "jr",    I, 11, None,     Rs;
    Jal,   "jal",   I, 12, None,     RtAddr;
    Lw,    "lw",    I, 13, None,     RtMem;
    Lwi,   "lwi",   I, 14, None,     RtImm;
    Sw,    "sw",    I, 15, None,     RtMem;
    Swi,   "swi",   I, 16, None,     RsImm;
    Add,   "add",   R, 0,  Some(13), RdRsRt;
    Addi,  "addi",  I, 17, None,     RtRsImm;
    Sub,   "sub",   R, 0,  Some(14), RdRsRt;
    Subi,  "subi",  I, 18, None,     RtRsImm;
    Mul,   "mul",   R, 0,  Some(15), RdRsRt;
    Muli,  "muli",  I, 19, None,     RtRsImm;
    Div,   "div",   R, 0,  Some(16), RdRsRt;
    Divi,  "divi",  I, 20, None,     RtRsImm;
    Mod,   "mod",   R, 0,  Some(17), RdRsRt;
    Modi,  "modi",  I, 21, None,     RtRsImm;
    Inc,   "inc",   R, 0,  Some(18), RdRs;
    Dec,   "dec",   R, 0,  Some(19), RdRs;
    Slt,   "slt",   R, 0,  Some(20), RdRsRt;
    Slti,  "slti",  I, 22, None,     RtRsImm;
    Addm,  "addm",  R, 0,  Some(21), RdRsRt;
    Mulm,  "mulm",  R, 0,  Some(22), RdRsRt;
    Adi,   "adi",   R, 0,  Some(23), RdRt;
    Mui,   "mui",   R, 0,  Some(24), RdRs;
    Hlt,   "halt",  R, 0,  Some(25), None;
}

impl Mnemonic {
    /// Looks a mnemonic up by its assembly spelling.
    pub fn from_text(text: &str) -> Option<Mnemonic> {
        Mnemonic::ALL.iter().copied().find(|m| m.text() == text)
    }

    fn from_codes(opcode: u8, function: u8) -> Option<Mnemonic> {
        Mnemonic::ALL.iter().copied().find(|m| {
            m.opcode() == opcode
                && match m.format() {
                    Format::R => m.function() == Some(function),
                    Format::I => true,
                }
        })
    }
}

/// A fully decoded instruction.
///
/// Fields a format does not carry (`imm` for R-type; `rd` and `shamt` for
/// I-type) are zero in a well-formed instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodedInstruction {
    pub mnemonic: Mnemonic,
    pub rs: u8,
    pub rt: u8,
    pub rd: u8,
    pub shamt: u8,
    pub imm: u16,
}

impl DecodedInstruction {
    pub fn format(&self) -> Format {
        self.mnemonic.format()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    UndefinedOpcode(u8),
    UndefinedFunction(u8),
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::UndefinedOpcode(op) => write!(f, "undefined opcode {op}"),
            DecodeError::UndefinedFunction(fun) => write!(f, "undefined function {fun}"),
        }
    }
}

impl std::error::Error for DecodeError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeError {
    pub field: &'static str,
    pub value: u32,
    pub max: u32,
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "field {} = {} exceeds maximum {}",
            self.field, self.value, self.max
        )
    }
}

impl std::error::Error for EncodeError {}

/// Decodes a raw instruction word.
///
/// Register and shift fields are taken as-is even when the instruction does
/// not use them; only an unknown opcode or function is a fault.
pub fn decode(word: u32) -> Result<DecodedInstruction, DecodeError> {
    let opcode = (word >> 26) as u8;
    let rs = ((word >> 21) & 0x1F) as u8;
    let rt = ((word >> 16) & 0x1F) as u8;
    if opcode == 0 {
        let function = (word & 0x3F) as u8;
        let mnemonic = Mnemonic::from_codes(0, function)
            .ok_or(DecodeError::UndefinedFunction(function))?;
        Ok(DecodedInstruction {
            mnemonic,
            rs,
            rt,
            rd: ((word >> 11) & 0x1F) as u8,
            shamt: ((word >> 6) & 0x1F) as u8,
            imm: 0,
        })
    } else {
        let mnemonic =
            Mnemonic::from_codes(opcode, 0).ok_or(DecodeError::UndefinedOpcode(opcode))?;
        Ok(DecodedInstruction {
            mnemonic,
            rs,
            rt,
            rd: 0,
            shamt: 0,
            imm: word as u16,
        })
    }
}

/// Encodes an instruction back into its 32-bit word; inverse of [`decode`].
pub fn encode(d: &DecodedInstruction) -> Result<u32, EncodeError> {
    let field = |name, value: u8, max: u8| {
        if value > max {
            Err(EncodeError {
                field: name,
                value: value.into(),
                max: max.into(),
            })
        } else {
            Ok(u32::from(value))
        }
    };
    let rs = field("rs", d.rs, 31)?;
    let rt = field("rt", d.rt, 31)?;
    match d.mnemonic.format() {
        Format::R => {
            let rd = field("rd", d.rd, 31)?;
            let shamt = field("shamt", d.shamt, 31)?;
            if d.imm != 0 {
                return Err(EncodeError {
                    field: "imm",
                    value: d.imm.into(),
                    max: 0,
                });
            }
            let function = u32::from(d.mnemonic.function().expect("R-type has a function"));
            Ok(rs << 21 | rt << 16 | rd << 11 | shamt << 6 | function)
        }
        Format::I => {
            field("rd", d.rd, 0)?;
            field("shamt", d.shamt, 0)?;
            let opcode = u32::from(d.mnemonic.opcode());
            Ok(opcode << 26 | rs << 21 | rt << 16 | u32::from(d.imm))
        }
    }
}

/// Where the ALSU's A input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandA {
    Rs,
    Imm,
    /// Shift amount, masked to 0..=15 by the datapath.
    Shamt,
}

/// Where the ALSU's B input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandB {
    Rt,
    Imm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteTarget {
    Rd,
    Rt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcAction {
    Increment,
    BranchEq,
    BranchNe,
    JumpAddr,
    JumpReg,
    JumpLink,
    Halt,
}

/// Control signals the hardwired control unit derives from an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlSignals {
    /// ALSU operation, `None` when the instruction bypasses the unit.
    pub alsu_opcode: Option<AlsuOpcode>,
    pub operand_a: OperandA,
    pub operand_b: OperandB,
    /// True when the register-write data is the ALSU result (as opposed to
    /// memory data); mirrors the combinational ToRegister signal.
    pub to_register: bool,
    pub reg_write: bool,
    pub mem_write: bool,
    pub write_target: WriteTarget,
    pub pc_action: PcAction,
}

/// Derives the control signals for a decoded instruction.
pub fn control_signals(d: &DecodedInstruction) -> ControlSignals {
    use AlsuOpcode as A;
    use Mnemonic::*;

    let m = d.mnemonic;
    let alsu_opcode = match m {
        And | Andi => Some(A::And),
        Nand | Nandi => Some(A::Nand),
        Or | Ori => Some(A::Or),
        Nor | Nori => Some(A::Nor),
        Xor | Xori => Some(A::Xor),
        Xnor | Xnori => Some(A::Xnor),
        Inv | Invi => Some(A::Not),
        Shl => Some(A::Shl),
        Shr => Some(A::Shr),
        Ashl => Some(A::Ashl),
        Ashr => Some(A::Ashr),
        Rol => Some(A::Rol),
        Ror => Some(A::Ror),
        Beq | Bne => Some(A::SubNoOverflow),
        J | Jr | Jal => None,
        Lw | Sw => Some(A::Add), // effective address RS + offset
        Lwi => Some(A::Transfer),
        Swi => Some(A::Transfer), // effective address is RS itself
        Add | Addi => Some(A::Add),
        Sub | Subi => Some(A::Sub),
        Mul | Muli => Some(A::Mul),
        Div | Divi => Some(A::Div),
        Mod | Modi => Some(A::Rem),
        Inc => Some(A::Inc),
        Dec => Some(A::Dec),
        Slt | Slti => Some(A::Slt),
        Addm => Some(A::AddMod),
        Mulm => Some(A::MulMod),
        Adi => Some(A::AddInv),
        Mui => Some(A::MulInv),
        Hlt => None,
    };

    let operand_a = match m {
        Shl | Shr | Ashl | Ashr | Rol | Ror => OperandA::Shamt,
        Invi | Lwi => OperandA::Imm,
        _ => OperandA::Rs,
    };
    // Branches compare two registers; their immediate is the PC offset.
    let operand_b = match (m, m.format()) {
        (Beq | Bne, _) | (_, Format::R) => OperandB::Rt,
        (_, Format::I) => OperandB::Imm,
    };

    // ToRegister is set whenever ALSUResult feeds the register bank:
    // R-type functions 0..=24, opcodes 1..=7, opcode 14, opcodes 17..=22.
    let opcode = m.opcode();
    let to_register = match m.format() {
        Format::R => m.function().is_some_and(|f| f <= 24),
        Format::I => matches!(opcode, 1..=7 | 14 | 17..=22),
    };

    let reg_write = to_register || matches!(m, Lw | Jal);
    let mem_write = matches!(m, Sw | Swi);
    let write_target = match m.format() {
        Format::R => WriteTarget::Rd,
        Format::I => WriteTarget::Rt,
    };
    let pc_action = match m {
        Beq => PcAction::BranchEq,
        Bne => PcAction::BranchNe,
        J => PcAction::JumpAddr,
        Jr => PcAction::JumpReg,
        Jal => PcAction::JumpLink,
        Hlt => PcAction::Halt,
        _ => PcAction::Increment,
    };

    ControlSignals {
        alsu_opcode,
        operand_a,
        operand_b,
        to_register,
        reg_write,
        mem_write,
        write_target,
        pc_action,
    }
}

/// One row of the numeric opcode table shared by the assembler and docs.
pub struct OpcodeRow {
    pub mnemonic: &'static str,
    pub format: Format,
    pub opcode: u8,
    pub function: Option<u8>,
    pub syntax: &'static str,
}

/// The complete opcode table, one row per mnemonic.
pub fn opcode_table() -> Vec<OpcodeRow> {
    Mnemonic::ALL
        .iter()
        .map(|&m| OpcodeRow {
            mnemonic: m.text(),
            format: m.format(),
            opcode: m.opcode(),
            function: m.function(),
            syntax: syntax_of(m),
        })
        .collect()
}

/// The opcode table as CSV, the machine-readable form shipped with the
/// docs: `mnemonic,format,opcode,function,operands`.
pub fn opcode_table_csv() -> String {
    let mut out = String::from("mnemonic,format,opcode,function,operands\n");
    for row in opcode_table() {
        let format = match row.format {
            Format::R => "R",
            Format::I => "I",
        };
        let function = row.function.map(|f| f.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},\"{}\"\n",
            row.mnemonic, format, row.opcode, function, row.syntax
        ));
    }
    out
}

/// Canonical operand syntax for a mnemonic, as written in assembly.
pub fn syntax_of(m: Mnemonic) -> &'static str {
    match m.operands() {
        Operands::RdRsRt => "$rd,$rs,$rt",
        Operands::RdRs => "$rd,$rs",
        Operands::RdRt => "$rd,$rt",
        Operands::RdRtShift => "$rd,$rt,shift",
        Operands::RtRsImm => "$rt,$rs,imm",
        Operands::RtImm => "$rt,imm",
        Operands::RtRsOffset => "$rt,$rs,offset",
        Operands::Addr => "addr",
        Operands::Rs => "$rs",
        Operands::RtAddr => "$rt,addr",
        Operands::RtMem => "$rt,offset($rs)",
        Operands::RsImm => "$rs,imm",
        Operands::None => "",
    }
}
