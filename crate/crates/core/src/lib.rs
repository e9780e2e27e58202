//! Toolchain and cycle-accurate model of a single-cycle, MIPS-core ASIP
//! for IDEA cryptography.
//!
//! The crate has three layers:
//!
//! * a pure-software IDEA reference ([`idea`]) used as the oracle,
//! * a bit-exact model of the processor: the 16-bit ALSU ([`alsu`]), the
//!   instruction set ([`isa`]), a two-pass assembler ([`asm`]) and the
//!   single-cycle machine itself ([`machine`]),
//! * generated IDEA assembly programs plus a harness that runs them on the
//!   simulator and checks them against the oracle ([`programs`]), and an
//!   analytical throughput/runtime model ([`perf`]).

pub mod alsu;
pub mod asm;
pub mod idea;
pub mod isa;
pub mod machine;
pub mod perf;
pub mod programs;
