//! Two-pass assembler and disassembler.
//!
//! The source language is one statement per line:
//!
//! ```text
//! loop: addm $3,$3,$4      # labels bind to the current address
//!       bne $2,$1,loop     # branch operands may be labels or raw offsets
//!       .data              # switch to the 16-bit data segment
//! tbl:  .word 0x1234, -1   # data words (16-bit in .data, 32-bit in .text)
//! ```
//!
//! `#` starts a comment. Numbers are decimal (possibly negative) or
//! `0x` hexadecimal. Labels used as immediates resolve to their word
//! address; labels in branch position resolve to a PC-relative offset.
//!
//! Pass one tokenizes, assigns addresses and collects labels; pass two
//! resolves symbols and encodes. The output is a pair of memory images:
//! 32-bit instruction words and 16-bit data words, both based at 0.

use std::collections::BTreeMap;
use std::fmt;

use crate::isa::{self, DecodedInstruction, Mnemonic, Operands};

pub const MEMORY_WORDS: usize = 65536;

/// Assembled instruction and data images, both starting at address 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryImage {
    /// 32-bit instruction words.
    pub words: Vec<u32>,
    /// 16-bit data words.
    pub data: Vec<u16>,
}

/// Which memory a symbol lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Text,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symbol {
    pub segment: Segment,
    pub addr: u16,
}

/// Assembly output together with the resolved symbol table.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub image: MemoryImage,
    pub symbols: BTreeMap<String, Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AsmErrorKind {
    UnknownMnemonic(String),
    UnknownDirective(String),
    InstructionInData(String),
    WrongOperands { mnemonic: &'static str, syntax: &'static str },
    BadOperand(String),
    DuplicateLabel(String),
    UndefinedLabel(String),
    OffsetOutOfRange(i64),
    ImmediateOutOfRange(i64),
    ShiftOutOfRange(i64),
    WordOutOfRange(i64),
    SegmentFull(Segment),
}

/// An assembly error, carrying the 1-based source line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsmError {
    pub line: usize,
    pub kind: AsmErrorKind,
}

impl fmt::Display for AsmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            AsmErrorKind::UnknownMnemonic(m) => write!(f, "unknown mnemonic '{m}'"),
            AsmErrorKind::UnknownDirective(d) => write!(f, "unknown directive '{d}'"),
            AsmErrorKind::InstructionInData(m) => {
                write!(f, "instruction '{m}' outside the .text segment")
            }
            AsmErrorKind::WrongOperands { mnemonic, syntax } => {
                write!(f, "'{mnemonic}' expects operands {syntax}")
            }
            AsmErrorKind::BadOperand(s) => write!(f, "cannot parse operand '{s}'"),
            AsmErrorKind::DuplicateLabel(l) => write!(f, "duplicate label '{l}'"),
            AsmErrorKind::UndefinedLabel(l) => write!(f, "undefined label '{l}'"),
            AsmErrorKind::OffsetOutOfRange(v) => write!(f, "branch offset {v} out of range"),
            AsmErrorKind::ImmediateOutOfRange(v) => write!(f, "immediate {v} out of range"),
            AsmErrorKind::ShiftOutOfRange(v) => write!(f, "shift amount {v} out of range (0..=15)"),
            AsmErrorKind::WordOutOfRange(v) => write!(f, "word value {v} out of range"),
            AsmErrorKind::SegmentFull(Segment::Text) => write!(f, "instruction memory full"),
            AsmErrorKind::SegmentFull(Segment::Data) => write!(f, "data memory full"),
        }
    }
}

impl std::error::Error for AsmError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Num(i64),
    Sym(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Operand {
    Reg(u8),
    Val(Value),
    Mem { offset: Value, base: u8 },
}

enum TextItem {
    Instr {
        line: usize,
        addr: u16,
        mnemonic: Mnemonic,
        operands: Vec<Operand>,
    },
    Raw(u32),
}

/// Assembles a source unit into its memory images.
pub fn assemble(src: &str) -> Result<MemoryImage, AsmError> {
    Ok(assemble_full(src)?.image)
}

/// Like [`assemble`], but also returns the symbol table.
pub fn assemble_full(src: &str) -> Result<Assembly, AsmError> {
    let mut symbols: BTreeMap<String, Symbol> = BTreeMap::new();
    let mut items: Vec<TextItem> = Vec::new();
    let mut data: Vec<u16> = Vec::new();
    let mut segment = Segment::Text;
    let mut text_addr = 0usize;

    // Pass one: tokenize, assign addresses, collect labels.
    for (idx, raw_line) in src.lines().enumerate() {
        let line_no = idx + 1;
        let err = |kind| AsmError { line: line_no, kind };
        let mut line = raw_line.split('#').next().unwrap_or("").trim();

        if let Some((label, rest)) = split_label(line) {
            let addr = match segment {
                Segment::Text => text_addr,
                Segment::Data => data.len(),
            };
            if addr >= MEMORY_WORDS {
                return Err(err(AsmErrorKind::SegmentFull(segment)));
            }
            let sym = Symbol { segment, addr: addr as u16 };
            if symbols.insert(label.to_string(), sym).is_some() {
                return Err(err(AsmErrorKind::DuplicateLabel(label.to_string())));
            }
            line = rest;
        }
        if line.is_empty() {
            continue;
        }

        if let Some(directive) = line.strip_prefix('.') {
            let (name, rest) = directive
                .split_once(char::is_whitespace)
                .unwrap_or((directive, ""));
            match name {
                "text" => segment = Segment::Text,
                "data" => segment = Segment::Data,
                "word" => {
                    for field in rest.split(',') {
                        let text = field.trim();
                        let v = parse_number(text)
                            .ok_or_else(|| err(AsmErrorKind::BadOperand(text.to_string())))?;
                        match segment {
                            Segment::Text => {
                                if !(-(1i64 << 31)..(1i64 << 32)).contains(&v) {
                                    return Err(err(AsmErrorKind::WordOutOfRange(v)));
                                }
                                if text_addr >= MEMORY_WORDS {
                                    return Err(err(AsmErrorKind::SegmentFull(Segment::Text)));
                                }
                                items.push(TextItem::Raw(v as u32));
                                text_addr += 1;
                            }
                            Segment::Data => {
                                if !(-32768..=65535).contains(&v) {
                                    return Err(err(AsmErrorKind::WordOutOfRange(v)));
                                }
                                if data.len() >= MEMORY_WORDS {
                                    return Err(err(AsmErrorKind::SegmentFull(Segment::Data)));
                                }
                                data.push(v as u16);
                            }
                        }
                    }
                }
                _ => return Err(err(AsmErrorKind::UnknownDirective(name.to_string()))),
            }
            continue;
        }

        let (mnemonic_text, rest) = line
            .split_once(char::is_whitespace)
            .unwrap_or((line, ""));
        let mnemonic = Mnemonic::from_text(&mnemonic_text.to_ascii_lowercase())
            .ok_or_else(|| err(AsmErrorKind::UnknownMnemonic(mnemonic_text.to_string())))?;
        if segment == Segment::Data {
            return Err(err(AsmErrorKind::InstructionInData(mnemonic_text.to_string())));
        }
        let operands = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|tok| parse_operand(tok.trim()).ok_or_else(|| {
                    err(AsmErrorKind::BadOperand(tok.trim().to_string()))
                }))
                .collect::<Result<_, _>>()?
        };
        if text_addr >= MEMORY_WORDS {
            return Err(err(AsmErrorKind::SegmentFull(Segment::Text)));
        }
        items.push(TextItem::Instr {
            line: line_no,
            addr: text_addr as u16,
            mnemonic,
            operands,
        });
        text_addr += 1;
    }

    // Pass two: resolve symbols and encode.
    let mut words = Vec::with_capacity(items.len());
    for item in items {
        match item {
            TextItem::Raw(w) => words.push(w),
            TextItem::Instr { line, addr, mnemonic, operands } => {
                let d = build_instruction(line, addr, mnemonic, &operands, &symbols)?;
                let word = isa::encode(&d).expect("assembler produced in-range fields");
                words.push(word);
            }
        }
    }

    Ok(Assembly {
        image: MemoryImage { words, data },
        symbols,
    })
}

fn split_label(line: &str) -> Option<(&str, &str)> {
    let colon = line.find(':')?;
    let label = &line[..colon];
    if !label.is_empty() && is_identifier(label) {
        Some((label, line[colon + 1..].trim()))
    } else {
        None
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_number(s: &str) -> Option<i64> {
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok().map(|v| v as i64)
    } else {
        s.parse().ok()
    }
}

fn parse_operand(tok: &str) -> Option<Operand> {
    if let Some(reg) = tok.strip_prefix('$') {
        return reg.parse::<u8>().ok().filter(|r| *r < 32).map(Operand::Reg);
    }
    if let Some((offset, rest)) = tok.split_once('(') {
        let base = rest.strip_suffix(')')?.trim().strip_prefix('$')?;
        let base = base.parse::<u8>().ok().filter(|r| *r < 32)?;
        return Some(Operand::Mem {
            offset: parse_value(offset.trim())?,
            base,
        });
    }
    parse_value(tok).map(Operand::Val)
}

fn parse_value(tok: &str) -> Option<Value> {
    if let Some(n) = parse_number(tok) {
        Some(Value::Num(n))
    } else if is_identifier(tok) {
        Some(Value::Sym(tok.to_string()))
    } else {
        None
    }
}

fn build_instruction(
    line: usize,
    addr: u16,
    mnemonic: Mnemonic,
    operands: &[Operand],
    symbols: &BTreeMap<String, Symbol>,
) -> Result<DecodedInstruction, AsmError> {
    let err = |kind| AsmError { line, kind };
    let wrong = || {
        err(AsmErrorKind::WrongOperands {
            mnemonic: mnemonic.text(),
            syntax: isa::syntax_of(mnemonic),
        })
    };
    let reg = |op: &Operand| match op {
        Operand::Reg(r) => Ok(*r),
        _ => Err(wrong()),
    };
    let lookup = |value: &Value| -> Result<i64, AsmError> {
        match value {
            Value::Num(n) => Ok(*n),
            Value::Sym(name) => symbols
                .get(name)
                .map(|s| i64::from(s.addr))
                .ok_or_else(|| err(AsmErrorKind::UndefinedLabel(name.clone()))),
        }
    };
    // Immediates cover both signed and unsigned 16-bit interpretations.
    let imm = |value: &Value| -> Result<u16, AsmError> {
        let v = lookup(value)?;
        if !(-32768..=65535).contains(&v) {
            return Err(err(AsmErrorKind::ImmediateOutOfRange(v)));
        }
        Ok(v as u16)
    };
    // Branch labels become PC-relative; raw numbers are taken verbatim.
    let branch = |value: &Value| -> Result<u16, AsmError> {
        match value {
            Value::Num(_) => imm(value),
            Value::Sym(_) => {
                let offset = lookup(value)? - (i64::from(addr) + 1);
                if !(-32768..=32767).contains(&offset) {
                    return Err(err(AsmErrorKind::OffsetOutOfRange(offset)));
                }
                Ok(offset as u16)
            }
        }
    };

    let mut d = DecodedInstruction {
        mnemonic,
        rs: 0,
        rt: 0,
        rd: 0,
        shamt: 0,
        imm: 0,
    };
    match (mnemonic.operands(), operands) {
        (Operands::RdRsRt, [a, b, c]) => {
            d.rd = reg(a)?;
            d.rs = reg(b)?;
            d.rt = reg(c)?;
        }
        (Operands::RdRs, [a, b]) => {
            d.rd = reg(a)?;
            d.rs = reg(b)?;
        }
        (Operands::RdRt, [a, b]) => {
            d.rd = reg(a)?;
            d.rt = reg(b)?;
        }
        (Operands::RdRtShift, [a, b, Operand::Val(Value::Num(n))]) => {
            d.rd = reg(a)?;
            d.rt = reg(b)?;
            if !(0..=15).contains(n) {
                return Err(err(AsmErrorKind::ShiftOutOfRange(*n)));
            }
            d.shamt = *n as u8;
        }
        (Operands::RtRsImm, [a, b, Operand::Val(v)]) => {
            d.rt = reg(a)?;
            d.rs = reg(b)?;
            d.imm = imm(v)?;
        }
        (Operands::RtImm, [a, Operand::Val(v)]) => {
            d.rt = reg(a)?;
            d.imm = imm(v)?;
        }
        (Operands::RtRsOffset, [a, b, Operand::Val(v)]) => {
            d.rt = reg(a)?;
            d.rs = reg(b)?;
            d.imm = branch(v)?;
        }
        (Operands::Addr, [Operand::Val(v)]) => {
            d.imm = imm(v)?;
        }
        (Operands::Rs, [a]) => {
            d.rs = reg(a)?;
        }
        (Operands::RtAddr, [a, Operand::Val(v)]) => {
            d.rt = reg(a)?;
            d.imm = imm(v)?;
        }
        (Operands::RtMem, [a, Operand::Mem { offset, base }]) => {
            d.rt = reg(a)?;
            d.rs = *base;
            d.imm = imm(offset)?;
        }
        (Operands::RsImm, [a, Operand::Val(v)]) => {
            d.rs = reg(a)?;
            d.imm = imm(v)?;
        }
        (Operands::None, []) => {}
        _ => return Err(wrong()),
    }
    Ok(d)
}

/// Canonical assembly text for one decoded instruction.
pub fn format_instruction(d: &DecodedInstruction) -> String {
    let m = d.mnemonic.text();
    match d.mnemonic.operands() {
        Operands::RdRsRt => format!("{m} ${},${},${}", d.rd, d.rs, d.rt),
        Operands::RdRs => format!("{m} ${},${}", d.rd, d.rs),
        Operands::RdRt => format!("{m} ${},${}", d.rd, d.rt),
        Operands::RdRtShift => format!("{m} ${},${},{}", d.rd, d.rt, d.shamt),
        Operands::RtRsImm => format!("{m} ${},${},0x{:04x}", d.rt, d.rs, d.imm),
        Operands::RtImm => format!("{m} ${},0x{:04x}", d.rt, d.imm),
        Operands::RtRsOffset => format!("{m} ${},${},0x{:04x}", d.rt, d.rs, d.imm),
        Operands::Addr => format!("{m} 0x{:04x}", d.imm),
        Operands::Rs => format!("{m} ${}", d.rs),
        Operands::RtAddr => format!("{m} ${},0x{:04x}", d.rt, d.imm),
        Operands::RtMem => format!("{m} ${},0x{:04x}(${})", d.rt, d.imm, d.rs),
        Operands::RsImm => format!("{m} ${},0x{:04x}", d.rs, d.imm),
        Operands::None => m.to_string(),
    }
}

/// Best-effort text for a raw word: canonical disassembly when the word
/// decodes, `.word` otherwise. Used for trace output.
pub fn format_word(word: u32) -> String {
    match isa::decode(word) {
        Ok(d) => format_instruction(&d),
        Err(_) => format!(".word 0x{word:08x}"),
    }
}

/// Disassembly result: canonical source text plus per-word warnings.
#[derive(Debug, Clone)]
pub struct Disassembly {
    pub text: String,
    pub warnings: Vec<String>,
}

/// Disassembles an instruction image into canonical text.
///
/// Words that do not decode, or that carry encodings the assembler could
/// not reproduce (non-zero unused fields, shift amounts above 15), are
/// emitted as `.word` directives with a warning, so reassembling the text
/// always gives back the input image.
pub fn disassemble(image: &MemoryImage) -> Disassembly {
    let mut text = String::new();
    let mut warnings = Vec::new();
    for (addr, &word) in image.words.iter().enumerate() {
        match isa::decode(word) {
            Ok(d) if canonical_word(&d) == Some(word) => {
                text.push_str(&format_instruction(&d));
            }
            Ok(_) => {
                warnings.push(format!(
                    "word {addr}: 0x{word:08x} has a non-canonical encoding"
                ));
                text.push_str(&format!(".word 0x{word:08x}"));
            }
            Err(e) => {
                warnings.push(format!("word {addr}: 0x{word:08x} does not decode: {e}"));
                text.push_str(&format!(".word 0x{word:08x}"));
            }
        }
        text.push('\n');
    }
    Disassembly { text, warnings }
}

// Re-encodes only the fields the assembly syntax can express; a word is
// canonical iff this reproduces it exactly.
fn canonical_word(d: &DecodedInstruction) -> Option<u32> {
    let mut c = DecodedInstruction {
        mnemonic: d.mnemonic,
        rs: 0,
        rt: 0,
        rd: 0,
        shamt: 0,
        imm: 0,
    };
    match d.mnemonic.operands() {
        Operands::RdRsRt => (c.rd, c.rs, c.rt) = (d.rd, d.rs, d.rt),
        Operands::RdRs => (c.rd, c.rs) = (d.rd, d.rs),
        Operands::RdRt => (c.rd, c.rt) = (d.rd, d.rt),
        Operands::RdRtShift => {
            if d.shamt > 15 {
                return None;
            }
            (c.rd, c.rt, c.shamt) = (d.rd, d.rt, d.shamt);
        }
        Operands::RtRsImm | Operands::RtRsOffset => (c.rt, c.rs, c.imm) = (d.rt, d.rs, d.imm),
        Operands::RtImm | Operands::RtAddr => (c.rt, c.imm) = (d.rt, d.imm),
        Operands::Addr => c.imm = d.imm,
        Operands::Rs => c.rs = d.rs,
        Operands::RtMem => (c.rt, c.rs, c.imm) = (d.rt, d.rs, d.imm),
        Operands::RsImm => (c.rs, c.imm) = (d.rs, d.imm),
        Operands::None => {}
    }
    isa::encode(&c).ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HexParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for HexParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for HexParseError {}

/// Writes an instruction image in the interchange hex format: one 8-digit
/// word per line, address 0 first.
pub fn write_words_hex(words: &[u32]) -> String {
    words.iter().map(|w| format!("{w:08x}\n")).collect()
}

/// Writes a data image: one 4-digit word per line.
pub fn write_data_hex(data: &[u16]) -> String {
    data.iter().map(|w| format!("{w:04x}\n")).collect()
}

fn parse_hex_lines(src: &str, digits: usize) -> Result<Vec<u32>, HexParseError> {
    let mut out = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.len() != digits || !line.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(HexParseError {
                line: idx + 1,
                message: format!("expected a {digits}-digit hex word, got '{line}'"),
            });
        }
        if out.len() >= MEMORY_WORDS {
            return Err(HexParseError {
                line: idx + 1,
                message: format!("image exceeds {MEMORY_WORDS} words"),
            });
        }
        out.push(u32::from_str_radix(line, 16).unwrap());
    }
    Ok(out)
}

/// Parses an instruction image (8 hex digits per line, `#` comments).
pub fn parse_words_hex(src: &str) -> Result<Vec<u32>, HexParseError> {
    parse_hex_lines(src, 8)
}

/// Parses a data image (4 hex digits per line, `#` comments).
pub fn parse_data_hex(src: &str) -> Result<Vec<u16>, HexParseError> {
    Ok(parse_hex_lines(src, 4)?.into_iter().map(|w| w as u16).collect())
}
