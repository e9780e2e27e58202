//! Pure-software IDEA reference implementation.
//!
//! All values are 16-bit words. The three round operations are bitwise XOR,
//! addition mod 2^16 and multiplication mod 2^16+1, the latter with the usual
//! convention that the all-zero word stands for 2^16. This module is the
//! golden reference the simulated processor is checked against.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

/// Number of 16-bit subkeys consumed by the full 8.5-round cipher.
pub const SUBKEY_COUNT: usize = 52;

/// A 64-bit block as four 16-bit words, most significant quarter first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block(pub [u16; 4]);

/// The 128-bit initial key as eight 16-bit words, most significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitialKey(pub [u16; 8]);

/// The 52 round subkeys, either an encryption or a decryption schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubkeySchedule {
    keys: [u16; SUBKEY_COUNT],
}

impl SubkeySchedule {
    pub fn from_words(keys: [u16; SUBKEY_COUNT]) -> Self {
        Self { keys }
    }

    pub fn words(&self) -> &[u16; SUBKEY_COUNT] {
        &self.keys
    }

    /// Subkey for `round` (1..=9) at `position` (1..=6; 1..=4 in round 9).
    pub fn subkey(&self, round: usize, position: usize) -> u16 {
        assert!((1..=9).contains(&round), "round {round} out of range");
        let max_pos = if round == 9 { 4 } else { 6 };
        assert!(
            (1..=max_pos).contains(&position),
            "position {position} out of range for round {round}"
        );
        self.keys[6 * (round - 1) + (position - 1)]
    }
}

/// Addition mod 2^16: plain 16-bit addition, output carry discarded.
#[inline]
pub fn add_mod(a: u16, b: u16) -> u16 {
    a.wrapping_add(b)
}

/// Additive inverse mod 2^16: (2^16 - k) mod 2^16.
#[inline]
pub fn add_inv(k: u16) -> u16 {
    k.wrapping_neg()
}

/// Multiplication mod 2^16+1 with the all-zero word standing for 2^16.
///
/// 65537 is prime and both factors are nonzero mod 65537, so the residue 0
/// never occurs; the residue 65536 encodes back to the all-zero word.
#[inline]
pub fn mul_mod(a: u16, b: u16) -> u16 {
    let a = if a == 0 { 0x1_0000 } else { u32::from(a) };
    let b = if b == 0 { 0x1_0000 } else { u32::from(b) };
    let r = (u64::from(a) * u64::from(b) % 65537) as u32;
    if r == 0x1_0000 {
        0
    } else {
        r as u16
    }
}

// Multiplicative-inverse table, one entry per 16-bit word, mirroring the
// processor's LUT. Filled once by extended Euclid over mod 65537.
static MUL_INV_TABLE: LazyLock<Box<[u16; 65536]>> = LazyLock::new(|| {
    let mut table = vec![0u16; 65536].into_boxed_slice();
    for (x, slot) in table.iter_mut().enumerate() {
        let raw = if x == 0 { 65536 } else { x as i64 };
        let inv = euclid_inverse(raw, 65537);
        *slot = if inv == 65536 { 0 } else { inv as u16 };
    }
    table.try_into().unwrap()
});

// Extended Euclidean algorithm; `a` must be invertible mod `m`.
fn euclid_inverse(a: i64, m: i64) -> i64 {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "{a} not invertible mod {m}");
    old_s.rem_euclid(m)
}

/// Multiplicative inverse mod 2^16+1 under the 0 <-> 2^16 encoding.
#[inline]
pub fn mul_inv(k: u16) -> u16 {
    MUL_INV_TABLE[usize::from(k)]
}

/// Expands the 128-bit key into the 52 encryption subkeys.
///
/// The first eight subkeys are the key words themselves; every further group
/// of eight comes from rotating the whole 128-bit key left by 25 bits, which
/// per 16-bit word is a shift-left-9 of one neighbour OR a shift-right-7 of
/// the next.
pub fn expand_key(key: &InitialKey) -> SubkeySchedule {
    let mut keys = [0u16; SUBKEY_COUNT];
    keys[..8].copy_from_slice(&key.0);
    for i in 8..SUBKEY_COUNT {
        let group_base = (i / 8) * 8 - 8;
        let hi = keys[group_base + (i + 1) % 8];
        let lo = keys[group_base + (i + 2) % 8];
        keys[i] = (hi << 9) | (lo >> 7);
    }
    SubkeySchedule::from_words(keys)
}

/// Derives the decryption schedule from an encryption schedule.
///
/// Positions 1 and 4 take multiplicative inverses of the mirrored round,
/// positions 2 and 3 take additive inverses (swapped against each other in
/// rounds 2..=8), and positions 5/6 are copied from the round before the
/// mirrored one.
pub fn invert_schedule(enc: &SubkeySchedule) -> SubkeySchedule {
    let mut keys = [0u16; SUBKEY_COUNT];
    for round in 1..=9usize {
        let src = 10 - round; // mirrored source round
        let base = 6 * (round - 1);
        keys[base] = mul_inv(enc.subkey(src, 1));
        keys[base + 3] = mul_inv(enc.subkey(src, 4));
        if round == 1 || round == 9 {
            keys[base + 1] = add_inv(enc.subkey(src, 2));
            keys[base + 2] = add_inv(enc.subkey(src, 3));
        } else {
            keys[base + 1] = add_inv(enc.subkey(src, 3));
            keys[base + 2] = add_inv(enc.subkey(src, 2));
        }
        if round <= 8 {
            keys[base + 4] = enc.subkey(9 - round, 5);
            keys[base + 5] = enc.subkey(9 - round, 6);
        }
    }
    SubkeySchedule::from_words(keys)
}

// One full round: confusion layer, MA box, then the cross-wired XOR outputs
// (the swap of the two middle words is folded in).
fn round(x: [u16; 4], k: &[u16]) -> [u16; 4] {
    let a = mul_mod(x[0], k[0]);
    let b = add_mod(x[1], k[1]);
    let c = add_mod(x[2], k[2]);
    let d = mul_mod(x[3], k[3]);
    let g = mul_mod(a ^ c, k[4]);
    let h = mul_mod(add_mod(b ^ d, g), k[5]);
    let i2 = add_mod(g, h);
    [a ^ h, c ^ h, b ^ i2, d ^ i2]
}

/// Encrypts one block: eight rounds followed by the output transformation.
pub fn encrypt_block(p: Block, s: &SubkeySchedule) -> Block {
    let mut x = p.0;
    for r in 0..8 {
        x = round(x, &s.words()[6 * r..6 * r + 6]);
    }
    // The ninth-round transform applies after undoing the last round's swap.
    let k = &s.words()[48..52];
    Block([
        mul_mod(x[0], k[0]),
        add_mod(x[2], k[1]),
        add_mod(x[1], k[2]),
        mul_mod(x[3], k[3]),
    ])
}

/// Decrypts one block: the same algorithm driven by a decryption schedule.
pub fn decrypt_block(c: Block, d: &SubkeySchedule) -> Block {
    encrypt_block(c, d)
}

fn parse_words<const N: usize>(s: &str) -> Result<[u16; N], HexError> {
    let s = s.trim();
    if s.len() != N * 4 {
        return Err(HexError {
            expected: N * 4,
            got: s.len(),
        });
    }
    let mut words = [0u16; N];
    for (i, w) in words.iter_mut().enumerate() {
        *w = u16::from_str_radix(&s[4 * i..4 * i + 4], 16).map_err(|_| HexError {
            expected: N * 4,
            got: s.len(),
        })?;
    }
    Ok(words)
}

/// Error parsing a fixed-width hex string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HexError {
    pub expected: usize,
    pub got: usize,
}

impl fmt::Display for HexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "expected {} hex digits, got a {}-character string",
            self.expected, self.got
        )
    }
}

impl std::error::Error for HexError {}

impl FromStr for Block {
    type Err = HexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_words::<4>(s).map(Block)
    }
}

impl FromStr for InitialKey {
    type Err = HexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_words::<8>(s).map(InitialKey)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:04X}{:04X}{:04X}{:04X}",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}
