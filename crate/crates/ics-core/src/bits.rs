//! Fixed-length bit vectors backed by `u64` words, used for wire messages
//! and codewords. Distances are popcounts, so lengths in the thousands of
//! bits stay cheap.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits {
    words: Vec<u64>,
    len: u32,
}

impl Bits {
    pub fn zeros(len: u32) -> Self {
        Bits {
            words: vec![0; Self::word_count(len)],
            len,
        }
    }

    fn word_count(len: u32) -> usize {
        ((len as usize) + 63) / 64
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: u32) -> bool {
        debug_assert!(i < self.len);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: u32, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[(i / 64) as usize];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: u32) {
        debug_assert!(i < self.len);
        self.words[(i / 64) as usize] ^= 1 << (i % 64);
    }

    pub fn xor_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    /// Hamming distance in bits.
    pub fn distance(&self, other: &Bits) -> u32 {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Positions where the two differ.
    pub fn diff_positions(&self, other: &Bits) -> Vec<u32> {
        (0..self.len).filter(|&i| self.get(i) != other.get(i)).collect()
    }

    /// Fill from a seeded generator of words; trailing bits beyond `len`
    /// are masked off so equality stays canonical.
    pub fn from_words(mut words: Vec<u64>, len: u32) -> Self {
        assert_eq!(words.len(), Self::word_count(len));
        let tail = len % 64;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Bits { words, len }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            s.push_str(&format!("{w:016x}"));
        }
        format!("{}:{}", self.len, s)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let (len_s, hex) = s.split_once(':')?;
        let len: u32 = len_s.parse().ok()?;
        if hex.len() != Self::word_count(len) * 16 {
            return None;
        }
        let words = hex
            .as_bytes()
            .chunks(16)
            .map(|c| u64::from_str_radix(std::str::from_utf8(c).ok()?, 16).ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Bits::from_words(words, len))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}]", self.len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_flip() {
        let mut b = Bits::zeros(70);
        b.set(0, true);
        b.set(69, true);
        assert!(b.get(0) && b.get(69) && !b.get(35));
        b.flip(69);
        assert!(!b.get(69));
        assert_eq!(b.count_ones(), 1);
    }

    #[test]
    fn distance_counts_differing_bits() {
        let mut a = Bits::zeros(130);
        let mut b = Bits::zeros(130);
        a.set(3, true);
        b.set(3, true);
        a.set(64, true);
        b.set(129, true);
        assert_eq!(a.distance(&b), 2);
        assert_eq!(a.diff_positions(&b), vec![64, 129]);
    }

    #[test]
    fn hex_round_trip() {
        let mut a = Bits::zeros(90);
        a.set(1, true);
        a.set(89, true);
        let s = a.to_hex();
        assert_eq!(Bits::from_hex(&s).unwrap(), a);
    }
}
