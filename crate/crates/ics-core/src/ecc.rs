//! The short binary code wrapping each wire message.
//!
//! A codeword encodes a pair of layered-code symbols `z ∈ Σ²` plus an
//! instruction `δ ∈ {0, 1, ←, ?}` into `M` bits. Construction is an XOR
//! mask: `ECC(z, δ) = E(z) ⊕ R(δ)` where `R(δ)` tiles one of the four
//! even-weight 3-bit patterns `000, 011, 101, 110` across the word and `E`
//! is a seeded random map, rejection-sampled until exhaustive verification
//! passes. The mask makes every same-`z` pair differ on exactly two thirds
//! of the positions; the random part must keep every cross-`z` pair at
//! relative distance `≥ 1/2 − ε` even after XOR with any mask difference,
//! which is checked, not assumed.
//!
//! All thresholds are integer bit counts: `M` is required divisible by 6 so
//! the protocol's update probabilities `1−3d`, `1/2−3d`, `1−6d` have exact
//! integer numerators over denominator `M`.

use crate::bits::Bits;
use crate::code::CodeSymbol;
use crate::frac::Frac;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Instruction slot of a wire message.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Instruction {
    Zero,
    One,
    Back,
    Question,
}

impl Instruction {
    pub const ALL: [Instruction; 4] = [
        Instruction::Zero,
        Instruction::One,
        Instruction::Back,
        Instruction::Question,
    ];

    pub fn index(self) -> usize {
        match self {
            Instruction::Zero => 0,
            Instruction::One => 1,
            Instruction::Back => 2,
            Instruction::Question => 3,
        }
    }

    /// The tiled 3-bit mask pattern for this instruction.
    fn pattern(self) -> [bool; 3] {
        match self {
            Instruction::Zero => [false, false, false],
            Instruction::One => [false, true, true],
            Instruction::Back => [true, false, true],
            Instruction::Question => [true, true, false],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EccParams {
    pub alphabet_size: u16,
    pub epsilon: Frac,
    pub m_bits: u32,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EccError {
    #[error("no verified code within the retry budget (alphabet {alphabet}, M {m_bits}); raise M")]
    ConstructionFailed { alphabet: u16, m_bits: u32 },
    #[error("received word has {got} bits, codewords have {want}")]
    LengthMismatch { got: u32, want: u32 },
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

/// The verified code. The full table `E` is materialized (Σ² entries).
#[derive(Clone, Debug)]
pub struct EccCode {
    params: EccParams,
    seed: u64,
    table: Vec<Bits>,
    masks: [Bits; 4],
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn fill_random_bits(seed: u64, index: u64, len: u32) -> Bits {
    let words = ((len as usize) + 63) / 64;
    let mut state = splitmix64(seed ^ splitmix64(index));
    let mut out = Vec::with_capacity(words);
    for _ in 0..words {
        state = splitmix64(state);
        out.push(state);
    }
    Bits::from_words(out, len)
}

impl EccCode {
    pub fn params(&self) -> &EccParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn m_bits(&self) -> u32 {
        self.params.m_bits
    }

    fn pair_count(&self) -> usize {
        (self.params.alphabet_size as usize).pow(2)
    }

    pub fn pair_index(&self, z: (CodeSymbol, CodeSymbol)) -> usize {
        z.0 .0 as usize * self.params.alphabet_size as usize + z.1 .0 as usize
    }

    pub fn pair_from_index(&self, i: usize) -> (CodeSymbol, CodeSymbol) {
        let s = self.params.alphabet_size as usize;
        (CodeSymbol((i / s) as u16), CodeSymbol((i % s) as u16))
    }

    pub fn encode(&self, z: (CodeSymbol, CodeSymbol), delta: Instruction) -> Bits {
        let mut word = self.table[self.pair_index(z)].clone();
        word.xor_with(&self.masks[delta.index()]);
        word
    }

    /// Distance from `received` to the codeword for `(z, δ)`, in bits.
    pub fn distance_to(&self, received: &Bits, z: (CodeSymbol, CodeSymbol), delta: Instruction) -> u32 {
        let e = &self.table[self.pair_index(z)];
        let mask = &self.masks[delta.index()];
        received
            .words()
            .iter()
            .zip(e.words().iter().zip(mask.words()))
            .map(|(r, (t, m))| (r ^ t ^ m).count_ones())
            .sum()
    }

    /// Fingerprint of the table; recorded in descriptors so a regenerated
    /// table can be integrity-checked.
    pub fn table_hash(&self) -> u64 {
        let mut acc = 0xcbf29ce484222325u64;
        for cw in &self.table {
            for w in cw.words() {
                acc = (acc ^ w).wrapping_mul(0x100000001b3);
            }
        }
        acc
    }

    pub fn descriptor(&self) -> EccDescriptor {
        EccDescriptor {
            seed: self.seed,
            m_bits: self.params.m_bits,
            alphabet_size: self.params.alphabet_size,
            epsilon: self.params.epsilon,
            table_hash: self.table_hash(),
        }
    }
}

/// Serializable description; the table itself is regenerated from the seed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EccDescriptor {
    pub seed: u64,
    pub m_bits: u32,
    pub alphabet_size: u16,
    pub epsilon: Frac,
    pub table_hash: u64,
}

impl EccDescriptor {
    pub fn build(&self) -> Result<EccCode, EccError> {
        let code = build_unverified(self.alphabet_size, self.epsilon, self.seed, self.m_bits)?;
        if code.table_hash() != self.table_hash {
            return Err(EccError::BadParams("table hash mismatch".into()));
        }
        Ok(code)
    }
}

fn build_unverified(
    alphabet_size: u16,
    epsilon: Frac,
    seed: u64,
    m_bits: u32,
) -> Result<EccCode, EccError> {
    if alphabet_size < 2 {
        return Err(EccError::BadParams("alphabet size must be >= 2".into()));
    }
    if m_bits < 6 || m_bits % 6 != 0 {
        return Err(EccError::BadParams(format!(
            "M must be a positive multiple of 6, got {m_bits}"
        )));
    }
    if !(epsilon > Frac::ZERO && epsilon < Frac::new(1, 6)) {
        return Err(EccError::BadParams(format!(
            "epsilon must lie in (0, 1/6), got {epsilon}"
        )));
    }
    let params = EccParams {
        alphabet_size,
        epsilon,
        m_bits,
    };
    let pairs = (alphabet_size as usize).pow(2);
    let table = (0..pairs)
        .map(|i| fill_random_bits(seed, i as u64, m_bits))
        .collect();
    let masks = Instruction::ALL.map(|d| {
        let mut b = Bits::zeros(m_bits);
        let pat = d.pattern();
        for i in 0..m_bits {
            if pat[(i % 3) as usize] {
                b.set(i, true);
            }
        }
        b
    });
    Ok(EccCode {
        params,
        seed,
        table,
        masks,
    })
}

/// Exact minimum distances over every codeword pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    pub m_bits: u32,
    /// min over z, δ0 ≠ δ1 of Δ(ECC(z,δ0), ECC(z,δ1))
    pub min_same_z: u32,
    /// min over z0 ≠ z1 and all δ0, δ1
    pub min_cross_z: u32,
    /// ⌈(2/3)·M⌉
    pub same_z_required: u32,
    /// ⌈(1/2 − ε)·M⌉
    pub cross_z_required: u32,
    pub same_z_pass: bool,
    pub cross_z_pass: bool,
    pub pairs_checked: u64,
}

impl DistanceReport {
    pub fn pass(&self) -> bool {
        self.same_z_pass && self.cross_z_pass
    }
}

/// Exhaustive pairwise verification of the two distance requirements.
pub fn verify_distances(code: &EccCode) -> DistanceReport {
    let m = code.params.m_bits;
    let eps = code.params.epsilon;
    // ⌈(1/2 − ε)M⌉ = ⌈M(den − 2 num) / (2 den)⌉
    let cross_required = {
        let num = (m as u64) * (eps.den - 2 * eps.num);
        let den = 2 * eps.den;
        ((num + den - 1) / den) as u32
    };
    let same_required = (2 * m + 2) / 3; // ⌈2M/3⌉

    let mut min_same = u32::MAX;
    let mut pairs_checked = 0u64;
    // same-z: every unordered instruction pair, on the actual codewords
    for zi in 0..code.pair_count() {
        let z = code.pair_from_index(zi);
        for a in 0..4usize {
            for b in (a + 1)..4 {
                let d = code
                    .encode(z, Instruction::ALL[a])
                    .distance(&code.encode(z, Instruction::ALL[b]));
                min_same = min_same.min(d);
                pairs_checked += 1;
            }
        }
    }

    // cross-z: the distance between ECC(z0,δ0) and ECC(z1,δ1) depends on δ
    // only through R(δ0)⊕R(δ1), and the tiled even-weight patterns are
    // closed under XOR, so the four masks cover every instruction combination
    let mask_diffs: Vec<Bits> = code.masks.to_vec();
    let n = code.pair_count();
    let per_row: Vec<(u32, u64)> = crate::par::map_indexed(n, |i| {
        let mut local_min = u32::MAX;
        let mut local_pairs = 0u64;
        for j in (i + 1)..n {
            let d = code.table[i].xor(&code.table[j]);
            for md in &mask_diffs {
                local_min = local_min.min(d.distance(md));
                local_pairs += 1;
            }
        }
        (local_min, local_pairs)
    });
    let mut min_cross = u32::MAX;
    for (m_, p) in per_row {
        min_cross = min_cross.min(m_);
        pairs_checked += p;
    }

    DistanceReport {
        m_bits: m,
        min_same_z: min_same,
        min_cross_z: min_cross,
        same_z_required: same_required,
        cross_z_required: cross_required,
        same_z_pass: min_same >= same_required,
        cross_z_pass: min_cross >= cross_required,
        pairs_checked,
    }
}

/// The smallest multiple of 6 giving the random construction a good chance
/// of passing verification: a Hoeffding bound on one pair failing, union
/// bounded over all cross pairs and mask differences, aimed at ≈ 0.2
/// expected failures.
pub fn suggested_m_bits(alphabet_size: u16, epsilon: Frac) -> u32 {
    let pairs = (alphabet_size as f64).powi(2);
    let events = pairs * (pairs - 1.0) / 2.0 * 4.0;
    let eps = epsilon.as_f64();
    let m = ((events / 0.2).ln() / (2.0 * eps * eps)).ceil() as u32;
    (m.max(48) + 5) / 6 * 6
}

/// Build and exhaustively verify; retries a few seeds at the given `M`
/// before giving up so the caller can raise `M`.
pub fn build_ecc(
    alphabet_size: u16,
    epsilon: Frac,
    seed: u64,
    m_bits: Option<u32>,
) -> Result<(EccCode, DistanceReport), EccError> {
    let m = m_bits.unwrap_or_else(|| suggested_m_bits(alphabet_size, epsilon));
    const SEED_TRIES: u64 = 8;
    for attempt in 0..SEED_TRIES {
        let code = build_unverified(alphabet_size, epsilon, seed.wrapping_add(attempt), m)?;
        let report = verify_distances(&code);
        if report.pass() {
            return Ok((code, report));
        }
    }
    Err(EccError::ConstructionFailed {
        alphabet: alphabet_size,
        m_bits: m,
    })
}

/// Normalized distances from a received word to every codeword.
#[derive(Clone, Debug)]
pub struct DistanceProfile {
    pub m_bits: u32,
    /// bit distances indexed by [pair index][instruction index]
    pub dist: Vec<[u32; 4]>,
}

impl DistanceProfile {
    pub fn get(&self, pair_index: usize, delta: Instruction) -> u32 {
        self.dist[pair_index][delta.index()]
    }

    pub fn as_frac(&self, pair_index: usize, delta: Instruction) -> Frac {
        Frac::new(self.get(pair_index, delta) as u64, self.m_bits as u64)
    }
}

pub fn distance_profile(code: &EccCode, received: &Bits) -> Result<DistanceProfile, EccError> {
    if received.len() != code.params.m_bits {
        return Err(EccError::LengthMismatch {
            got: received.len(),
            want: code.params.m_bits,
        });
    }
    let dist = (0..code.pair_count())
        .map(|i| {
            let z = code.pair_from_index(i);
            Instruction::ALL.map(|d| code.distance_to(received, z, d))
        })
        .collect();
    Ok(DistanceProfile {
        m_bits: code.params.m_bits,
        dist,
    })
}

/// `d < 1/3` as integers: `3·d_bits < M`.
pub fn below_one_third(d_bits: u32, m_bits: u32) -> bool {
    3 * (d_bits as u64) < m_bits as u64
}

/// `d ≤ 1/6 − ε` as integers: `6·d·den ≤ M·(den − 6·num)`.
pub fn at_most_sixth_minus_eps(d_bits: u32, m_bits: u32, epsilon: Frac) -> bool {
    let lhs = 6u128 * d_bits as u128 * epsilon.den as u128;
    let rhs = (m_bits as u128) * (epsilon.den as u128).saturating_sub(6 * epsilon.num as u128);
    lhs <= rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(a: u16, b: u16) -> (CodeSymbol, CodeSymbol) {
        (CodeSymbol(a), CodeSymbol(b))
    }

    #[test]
    fn build_small_code_verifies() {
        let (code, report) = build_ecc(8, Frac::new(1, 20), 7, None).unwrap();
        assert!(report.pass());
        assert_eq!(report.min_same_z, report.same_z_required);
        assert!(report.min_cross_z >= report.cross_z_required);
        assert_eq!(code.m_bits() % 6, 0);
    }

    #[test]
    fn mask_rows_differ_exactly_on_mask_positions() {
        let (code, _) = build_ecc(4, Frac::new(1, 20), 3, None).unwrap();
        let m = code.m_bits();
        for zi in 0..code.pair_count() {
            let z = code.pair_from_index(zi);
            for a in Instruction::ALL {
                for b in Instruction::ALL {
                    if a == b {
                        assert_eq!(code.encode(z, a).distance(&code.encode(z, b)), 0);
                    } else {
                        // two tiled even-weight patterns differ on exactly 2 of 3 positions
                        assert_eq!(code.encode(z, a).distance(&code.encode(z, b)), 2 * m / 3);
                    }
                }
            }
        }
    }

    #[test]
    fn distance_profile_at_codeword() {
        let (code, _) = build_ecc(4, Frac::new(1, 20), 5, None).unwrap();
        let z = sym(1, 2);
        let cw = code.encode(z, Instruction::Back);
        let prof = distance_profile(&code, &cw).unwrap();
        let zi = code.pair_index(z);
        assert_eq!(prof.get(zi, Instruction::Back), 0);
        for d in Instruction::ALL {
            if d != Instruction::Back {
                assert_eq!(prof.get(zi, d), 2 * code.m_bits() / 3);
            }
        }
    }

    #[test]
    fn distance_profile_rejects_wrong_length() {
        let (code, _) = build_ecc(4, Frac::new(1, 20), 5, None).unwrap();
        let bad = Bits::zeros(code.m_bits() + 1);
        assert!(matches!(
            distance_profile(&code, &bad),
            Err(EccError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn flipping_under_sixth_keeps_argmin() {
        let (code, _) = build_ecc(8, Frac::new(1, 20), 11, None).unwrap();
        let m = code.m_bits();
        let z = sym(3, 5);
        let mut word = code.encode(z, Instruction::One);
        for i in 0..(m / 6 - 1) {
            word.flip(i * 3); // spread flips
        }
        let prof = distance_profile(&code, &word).unwrap();
        let mut best = (u32::MAX, usize::MAX, Instruction::Zero);
        for zi in 0..code.pair_count() {
            for d in Instruction::ALL {
                let dist = prof.get(zi, d);
                if dist < best.0 {
                    best = (dist, zi, d);
                }
            }
        }
        assert_eq!(best.1, code.pair_index(z));
        assert_eq!(best.2, Instruction::One);
    }

    #[test]
    fn complement_is_at_full_distance() {
        let (code, _) = build_ecc(4, Frac::new(1, 20), 9, None).unwrap();
        let z = sym(0, 3);
        let cw = code.encode(z, Instruction::Question);
        let mut compl = cw.clone();
        for i in 0..code.m_bits() {
            compl.flip(i);
        }
        let prof = distance_profile(&code, &compl).unwrap();
        assert_eq!(prof.get(code.pair_index(z), Instruction::Question), code.m_bits());
    }

    #[test]
    fn mutual_exclusivity_on_sampled_words() {
        // M = 24 keeps the codeword space small; sample received words and
        // confirm the two near-codeword conditions never both fire with
        // distinct implied codewords.
        let mut built = None;
        for seed in 0..40_000u64 {
            let code = build_unverified(2, Frac::new(1, 12), seed, 24).unwrap();
            if verify_distances(&code).pass() {
                built = Some(code);
                break;
            }
        }
        let code = built.expect("a verified M=24 toy code exists among the seeds");
        let eps = code.params().epsilon;
        let m = code.m_bits();
        let mut state = 0x5eedu64;
        for _ in 0..20_000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let word = fill_random_bits(state, 0, m);
            let prof = distance_profile(&code, &word).unwrap();
            for fixed_zi in 0..code.pair_count() {
                let near_answer: Vec<(usize, Instruction)> = Instruction::ALL
                    .iter()
                    .filter(|d| below_one_third(prof.get(fixed_zi, **d), m))
                    .map(|d| (fixed_zi, *d))
                    .collect();
                if near_answer.is_empty() {
                    continue;
                }
                for zi in 0..code.pair_count() {
                    for d in Instruction::ALL {
                        if at_most_sixth_minus_eps(prof.get(zi, d), m, eps) {
                            assert!(
                                near_answer.contains(&(zi, d)),
                                "distinct codewords matched both thresholds"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn encoding_is_injective() {
        let (code, _) = build_ecc(4, Frac::new(1, 20), 13, None).unwrap();
        let mut seen = std::collections::HashSet::new();
        for zi in 0..code.pair_count() {
            let z = code.pair_from_index(zi);
            for d in Instruction::ALL {
                assert!(seen.insert(code.encode(z, d)), "duplicate codeword");
            }
        }
    }

    #[test]
    fn descriptor_round_trip_checks_hash() {
        let (code, _) = build_ecc(4, Frac::new(1, 20), 21, None).unwrap();
        let d = code.descriptor();
        let rebuilt = d.build().unwrap();
        assert_eq!(rebuilt.table_hash(), code.table_hash());
        let mut tampered = d.clone();
        tampered.table_hash ^= 1;
        assert!(tampered.build().is_err());
    }

    #[test]
    fn suggested_m_grows_with_alphabet() {
        let eps = Frac::new(1, 20);
        let m4 = suggested_m_bits(4, eps);
        let m16 = suggested_m_bits(16, eps);
        assert!(m4 <= m16);
        assert_eq!(m4 % 6, 0);
    }
}
