//! Bit-exact model of the processor's 16-bit Arithmetic Logic Shift Unit.
//!
//! Twenty-seven operations are selected by a 5-bit opcode; codes 27..=31 are
//! reserved and rejected at decode time. Arithmetic is signed 16-bit unless
//! the operation is one of the modular ones added for IDEA, which are
//! delegated to [`crate::idea`] so the datapath and the reference share one
//! definition.

use std::fmt;

use crate::idea;

/// ALSU operation selector, numbered as in the datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum AlsuOpcode {
    Add = 0,
    Dec = 1,
    Sub = 2,
    Inc = 3,
    AddMod = 4,
    AddInv = 5,
    Mul = 6,
    MulMod = 7,
    Div = 8,
    Rem = 9,
    Shl = 10,
    Shr = 11,
    Rol = 12,
    Ror = 13,
    Ashl = 14,
    Ashr = 15,
    Transfer = 16,
    Not = 17,
    And = 18,
    Nand = 19,
    Or = 20,
    Nor = 21,
    Xor = 22,
    Xnor = 23,
    Slt = 24,
    SubNoOverflow = 25,
    MulInv = 26,
}

impl AlsuOpcode {
    pub const ALL: [AlsuOpcode; 27] = {
        use AlsuOpcode::*;
        [
            Add, Dec, Sub, Inc, AddMod, AddInv, Mul, MulMod, Div, Rem, Shl, Shr, Rol, Ror, Ashl,
            Ashr, Transfer, Not, And, Nand, Or, Nor, Xor, Xnor, Slt, SubNoOverflow, MulInv,
        ]
    };

    /// Decodes a raw selector value; codes 27..=31 are reserved.
    pub fn from_code(code: u8) -> Result<Self, AlsuError> {
        Self::ALL
            .get(usize::from(code))
            .copied()
            .ok_or(AlsuError::ReservedOpcode(code))
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Shift/rotate flavour handled by the barrel shifter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    Shl,
    Shr,
    Ashl,
    Ashr,
    Rol,
    Ror,
}

/// Result word plus the status flags visible on the datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlsuOutput {
    pub result: u16,
    pub zero: bool,
    pub sign: bool,
    pub carry: bool,
    pub overflow: bool,
}

impl AlsuOutput {
    fn new(result: u16) -> Self {
        Self {
            result,
            zero: result == 0,
            sign: result & 0x8000 != 0,
            carry: false,
            overflow: false,
        }
    }

    fn with_overflow(result: u16, overflow: bool) -> Self {
        Self {
            overflow,
            ..Self::new(result)
        }
    }

    fn with_carry(result: u16, carry: bool) -> Self {
        Self {
            carry,
            ..Self::new(result)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlsuError {
    ReservedOpcode(u8),
    DivideByZero,
}

impl fmt::Display for AlsuError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlsuError::ReservedOpcode(code) => write!(f, "reserved ALSU opcode {code}"),
            AlsuError::DivideByZero => write!(f, "division by zero"),
        }
    }
}

impl std::error::Error for AlsuError {}

/// Executes one ALSU operation on operands `a` and `b`.
///
/// For the shift/rotate opcodes `b` is the value being shifted and `a`
/// carries the shift amount (0..=15, masked by the datapath before it
/// reaches the unit).
pub fn execute(op: AlsuOpcode, a: u16, b: u16) -> Result<AlsuOutput, AlsuError> {
    use AlsuOpcode::*;
    let out = match op {
        Add => signed_arith(a, b, i16::checked_add, i16::wrapping_add),
        Dec => signed_arith(a, 1, i16::checked_sub, i16::wrapping_sub),
        Sub => signed_arith(a, b, i16::checked_sub, i16::wrapping_sub),
        Inc => signed_arith(a, 1, i16::checked_add, i16::wrapping_add),
        AddMod => AlsuOutput::new(idea::add_mod(a, b)),
        AddInv => AlsuOutput::new(idea::add_inv(b)),
        Mul => {
            let wide = i32::from(a as i16) * i32::from(b as i16);
            AlsuOutput::with_overflow(wide as u16, !(-32768..=32767).contains(&wide))
        }
        MulMod => AlsuOutput::new(idea::mul_mod(a, b)),
        Div | Rem => {
            if b == 0 {
                return Err(AlsuError::DivideByZero);
            }
            // Truncation toward zero; the remainder takes the dividend's sign.
            let (sa, sb) = (a as i16, b as i16);
            let r = if op == Div {
                sa.wrapping_div(sb)
            } else {
                sa.wrapping_rem(sb)
            };
            AlsuOutput::new(r as u16)
        }
        Shl => shift_out(b, shift_amount(a), ShiftMode::Shl),
        Shr => shift_out(b, shift_amount(a), ShiftMode::Shr),
        Rol => shift_out(b, shift_amount(a), ShiftMode::Rol),
        Ror => shift_out(b, shift_amount(a), ShiftMode::Ror),
        Ashl => shift_out(b, shift_amount(a), ShiftMode::Ashl),
        Ashr => shift_out(b, shift_amount(a), ShiftMode::Ashr),
        Transfer => AlsuOutput::new(a),
        Not => AlsuOutput::new(!a),
        And => AlsuOutput::new(a & b),
        Nand => AlsuOutput::new(!(a & b)),
        Or => AlsuOutput::new(a | b),
        Nor => AlsuOutput::new(!(a | b)),
        Xor => AlsuOutput::new(a ^ b),
        Xnor => AlsuOutput::new(!(a ^ b)),
        Slt => {
            // B is subtracted from A; overflow and sign disagreeing means A < B.
            let diff = a.wrapping_sub(b);
            let overflow = (a as i16).checked_sub(b as i16).is_none();
            let sign = diff & 0x8000 != 0;
            AlsuOutput::new(if overflow != sign { 0xFFFF } else { 0x0000 })
        }
        SubNoOverflow => AlsuOutput::new(a.wrapping_sub(b)),
        MulInv => AlsuOutput::new(idea::mul_inv(a)),
    };
    Ok(out)
}

fn signed_arith(
    a: u16,
    b: u16,
    checked: fn(i16, i16) -> Option<i16>,
    wrapping: fn(i16, i16) -> i16,
) -> AlsuOutput {
    let overflow = checked(a as i16, b as i16).is_none();
    AlsuOutput::with_overflow(wrapping(a as i16, b as i16) as u16, overflow)
}

fn shift_amount(a: u16) -> u8 {
    debug_assert!(a <= 15, "shift amount {a} not masked by the datapath");
    (a & 0x000F) as u8
}

fn shift_out(v: u16, amount: u8, mode: ShiftMode) -> AlsuOutput {
    let (result, carry) = barrel_shift(v, amount, mode);
    if mode == ShiftMode::Ashl && amount > 0 {
        // Overflow when any discarded bit differs from the resulting sign bit.
        let result_sign = result >> 15;
        let overflow = (0..amount).any(|i| (v >> (15 - i)) & 1 != result_sign);
        AlsuOutput {
            carry,
            overflow,
            ..AlsuOutput::new(result)
        }
    } else {
        AlsuOutput::with_carry(result, carry)
    }
}

/// Single-step barrel shifter/rotator.
///
/// Returns the shifted word and the carry, which is the last bit shifted
/// out; rotations never produce a carry and amount 0 is the identity.
pub fn barrel_shift(v: u16, amount: u8, mode: ShiftMode) -> (u16, bool) {
    assert!(amount <= 15, "shift amount {amount} out of range");
    let n = u32::from(amount);
    if amount == 0 && !matches!(mode, ShiftMode::Rol | ShiftMode::Ror) {
        return (v, false);
    }
    match mode {
        ShiftMode::Shl | ShiftMode::Ashl => (v << n, (v >> (16 - n)) & 1 != 0),
        ShiftMode::Shr => (v >> n, (v >> (n - 1)) & 1 != 0),
        ShiftMode::Ashr => (((v as i16) >> n) as u16, (v >> (n - 1)) & 1 != 0),
        ShiftMode::Rol => (v.rotate_left(n), false),
        ShiftMode::Ror => (v.rotate_right(n), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(op: AlsuOpcode, a: u16, b: u16) -> AlsuOutput {
        execute(op, a, b).unwrap()
    }

    #[test]
    fn reserved_opcodes_fault() {
        for code in 27..=31 {
            assert_eq!(
                AlsuOpcode::from_code(code),
                Err(AlsuError::ReservedOpcode(code))
            );
        }
        for code in 0..=26u8 {
            assert_eq!(AlsuOpcode::from_code(code).unwrap().code(), code);
        }
    }

    #[test]
    fn modular_add_wraps_without_overflow() {
        let out = run(AlsuOpcode::AddMod, 0xFFFF, 0x0001);
        assert_eq!(out.result, 0x0000);
        assert!(out.zero && !out.overflow && !out.carry);
    }

    #[test]
    fn slt_examples() {
        assert_eq!(run(AlsuOpcode::Slt, 0xFFFF, 0x0001).result, 0xFFFF);
        assert_eq!(run(AlsuOpcode::Slt, 0x7FFF, 0x8000).result, 0x0000);
    }

    #[test]
    fn mul_mod_zero_times_zero() {
        assert_eq!(run(AlsuOpcode::MulMod, 0x0000, 0x0000).result, 0x0001);
    }

    #[test]
    fn mul_low_word_with_overflow() {
        let out = run(AlsuOpcode::Mul, 0x0100, 0x0100);
        assert_eq!(out.result, 0x0000);
        assert!(out.overflow);
    }

    #[test]
    fn barrel_shift_examples() {
        assert_eq!(barrel_shift(0x0001, 4, ShiftMode::Shl), (0x0010, false));
        assert_eq!(barrel_shift(0x8000, 2, ShiftMode::Ashr), (0xE000, false));
        assert_eq!(barrel_shift(0xABCD, 4, ShiftMode::Rol), (0xBCDA, false));
        assert_eq!(barrel_shift(0x8000, 15, ShiftMode::Shr), (0x0001, false));
        assert_eq!(barrel_shift(0xFFFF, 1, ShiftMode::Shl), (0xFFFE, true));
        assert_eq!(barrel_shift(0x0003, 1, ShiftMode::Shr), (0x0001, true));
        assert_eq!(barrel_shift(0x1234, 0, ShiftMode::Ashr), (0x1234, false));
    }

    #[test]
    #[should_panic]
    fn barrel_shift_amount_over_15_rejected() {
        barrel_shift(0x0001, 16, ShiftMode::Shl);
    }

    #[test]
    fn ashl_overflow_rule() {
        // 0x4000 << 1 = 0x8000: discarded bit 0 != resulting sign 1.
        assert!(run(AlsuOpcode::Ashl, 1, 0x4000).overflow);
        // 0xC000 << 1 = 0x8000: discarded bit 1 == resulting sign 1.
        assert!(!run(AlsuOpcode::Ashl, 1, 0xC000).overflow);
        // Plain SHL of the same operand never flags.
        assert!(!run(AlsuOpcode::Shl, 1, 0x4000).overflow);
    }

    #[test]
    fn division_truncates_toward_zero() {
        let div = |a: u16, b: u16| run(AlsuOpcode::Div, a, b).result as i16;
        let rem = |a: u16, b: u16| run(AlsuOpcode::Rem, a, b).result as i16;
        assert_eq!(div(7, 2), 3);
        assert_eq!(div((-7i16) as u16, 2), -3);
        assert_eq!(rem((-7i16) as u16, 2), -1);
        assert_eq!(div(7, (-2i16) as u16), -3);
        assert_eq!(rem(7, (-2i16) as u16), 1);
    }

    #[test]
    fn division_by_zero_faults() {
        assert_eq!(
            execute(AlsuOpcode::Div, 1, 0),
            Err(AlsuError::DivideByZero)
        );
        assert_eq!(
            execute(AlsuOpcode::Rem, 1, 0),
            Err(AlsuError::DivideByZero)
        );
    }

    #[test]
    fn division_identity_against_wide_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        for _ in 0..100_000 {
            let a: u16 = rng.random();
            let b: u16 = rng.random();
            if b == 0 {
                continue;
            }
            let q = run(AlsuOpcode::Div, a, b).result;
            let r = run(AlsuOpcode::Rem, a, b).result;
            // q*b + r = a in 16-bit arithmetic, remainder smaller than divisor.
            assert_eq!(
                (q as i16).wrapping_mul(b as i16).wrapping_add(r as i16),
                a as i16
            );
            assert!((r as i16).unsigned_abs() < (b as i16).unsigned_abs());
            if r != 0 {
                assert_eq!((r as i16).signum(), (a as i16).signum());
            }
        }
    }

    #[test]
    fn signed_arith_overflow_matches_wide_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases = [
            (AlsuOpcode::Add, 1i32, false),
            (AlsuOpcode::Sub, -1, false),
            (AlsuOpcode::Inc, 1, true),
            (AlsuOpcode::Dec, -1, true),
        ];
        for _ in 0..1_000_000 {
            let a: u16 = rng.random();
            let b: u16 = rng.random();
            for (op, sign, unary) in cases {
                let rhs = if unary { 1 } else { i32::from(b as i16) };
                let wide = i32::from(a as i16) + sign * rhs;
                let out = run(op, a, b);
                assert_eq!(out.result, wide as u16, "{op:?} {a:#06x} {b:#06x}");
                assert_eq!(out.overflow, !(-32768..=32767).contains(&wide));
            }
        }
    }

    #[test]
    fn slt_matches_signed_comparison() {
        let boundary = [0x0000u16, 0x0001, 0x7FFF, 0x8000, 0xFFFF];
        for &a in &boundary {
            for &b in &boundary {
                let expect = if (a as i16) < (b as i16) { 0xFFFF } else { 0 };
                assert_eq!(run(AlsuOpcode::Slt, a, b).result, expect);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..1_000_000 {
            let (a, b): (u16, u16) = (rng.random(), rng.random());
            let expect = if (a as i16) < (b as i16) { 0xFFFF } else { 0 };
            assert_eq!(run(AlsuOpcode::Slt, a, b).result, expect);
        }
    }

    #[test]
    fn modular_ops_delegate_to_reference() {
        for x in 0..=0xFFFFu16 {
            assert_eq!(run(AlsuOpcode::AddInv, 0, x).result, crate::idea::add_inv(x));
            assert_eq!(run(AlsuOpcode::MulInv, x, 0).result, crate::idea::mul_inv(x));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..1_000_000 {
            let (a, b): (u16, u16) = (rng.random(), rng.random());
            assert_eq!(run(AlsuOpcode::AddMod, a, b).result, crate::idea::add_mod(a, b));
            assert_eq!(run(AlsuOpcode::MulMod, a, b).result, crate::idea::mul_mod(a, b));
        }
    }

    #[test]
    fn flags_reflect_result() {
        let out = run(AlsuOpcode::Sub, 5, 5);
        assert!(out.zero && !out.sign);
        let out = run(AlsuOpcode::Sub, 0, 1);
        assert!(!out.zero && out.sign);
    }

    #[test]
    fn overflow_limited_to_documented_opcodes() {
        use AlsuOpcode::*;
        let can_overflow = [Add, Dec, Sub, Inc, Mul, Ashl];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50_000 {
            let a: u16 = rng.random::<u16>() & 0x000F; // keep shifts in range
            let b: u16 = rng.random();
            for op in AlsuOpcode::ALL {
                if can_overflow.contains(&op) {
                    continue;
                }
                if matches!(op, Div | Rem) && b == 0 {
                    continue;
                }
                assert!(!run(op, a, b).overflow, "{op:?} must not overflow");
            }
        }
    }

    proptest! {
        #[test]
        fn rol_equals_ror_complement(v: u16, n in 0u8..=15) {
            let (l, _) = barrel_shift(v, n, ShiftMode::Rol);
            let (r, _) = barrel_shift(v, (16 - n) % 16, ShiftMode::Ror);
            prop_assert_eq!(l, r);
        }

        #[test]
        fn ashr_preserves_sign(v: u16, n in 0u8..=15) {
            let (out, _) = barrel_shift(v, n, ShiftMode::Ashr);
            prop_assert_eq!(out & 0x8000, v & 0x8000);
        }

        #[test]
        fn rotation_never_carries(v: u16, n in 0u8..=15) {
            prop_assert!(!barrel_shift(v, n, ShiftMode::Rol).1);
            prop_assert!(!barrel_shift(v, n, ShiftMode::Ror).1);
        }
    }
}
