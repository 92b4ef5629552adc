//! Noiseless protocol instances and the transcript update algebra.
//!
//! A noiseless protocol is a pair of `next_bit` oracles over partial
//! transcripts: Alice speaks at odd positions, Bob at even, and Alice's
//! first bit is normalized to 1. The update algebra (`op`, `op_target`,
//! `⊗`) turns received instructions into transcript edits; it depends on a
//! party's update history only through the evaluated transcript, so it is
//! defined directly on transcripts.

use crate::graph::{EdgeLabel, Transcript};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }

    /// Alice owns odd transcript positions (1-indexed).
    pub fn owns_position(self, pos: u32) -> bool {
        debug_assert!(pos >= 1);
        (pos % 2 == 1) == (self == Role::Alice)
    }
}

/// One party's next-message function.
pub trait NextBit: Send + Sync {
    fn next_bit(&self, prefix: &Transcript) -> bool;
}

impl<F: Fn(&Transcript) -> bool + Send + Sync> NextBit for F {
    fn next_bit(&self, prefix: &Transcript) -> bool {
        self(prefix)
    }
}

/// An alternating two-party protocol of even length `n0` with Alice's first
/// bit fixed to 1.
#[derive(Clone)]
pub struct NoiselessProtocol {
    n0: u32,
    alice: Arc<dyn NextBit>,
    bob: Arc<dyn NextBit>,
}

impl NoiselessProtocol {
    pub fn new(n0: u32, alice: Arc<dyn NextBit>, bob: Arc<dyn NextBit>) -> Self {
        assert!(n0 >= 2 && n0 % 2 == 0, "protocol length must be even and >= 2");
        let p = NoiselessProtocol { n0, alice, bob };
        assert!(
            p.alice.next_bit(&Transcript::EMPTY),
            "Alice's first bit must be 1"
        );
        p
    }

    /// Seeded table protocol: every partial transcript maps to a pseudo-
    /// random next bit. The table is implicit in the seed.
    pub fn random_table(seed: u64, n0: u32) -> Self {
        fn mix(seed: u64, heap: u64, who: u64) -> bool {
            let mut x = seed ^ heap.wrapping_mul(0xa0761d6478bd642f) ^ (who << 63);
            x = x.wrapping_add(0x9e3779b97f4a7c15);
            x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
            (x ^ (x >> 31)) & 1 == 1
        }
        let a = move |t: &Transcript| t.is_empty() || mix(seed, t.heap_index(), 0);
        let b = move |t: &Transcript| mix(seed, t.heap_index(), 1);
        NoiselessProtocol::new(n0, Arc::new(a), Arc::new(b))
    }

    /// Bitwise identity exchange: Alice sends `x` interleaved with Bob's
    /// `y`, ignoring history. `x` must start with 1.
    pub fn identity_exchange(x: Transcript, y: Transcript) -> Self {
        assert_eq!(x.len(), y.len(), "inputs must have equal length");
        assert!(x.len() >= 1 && x.bit(1), "Alice's first bit must be 1");
        let n0 = 2 * x.len();
        let a = move |t: &Transcript| x.bit(t.len() / 2 + 1);
        let b = move |t: &Transcript| y.bit((t.len() + 1) / 2);
        NoiselessProtocol::new(n0, Arc::new(a), Arc::new(b))
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn oracle(&self, role: Role) -> &dyn NextBit {
        match role {
            Role::Alice => self.alice.as_ref(),
            Role::Bob => self.bob.as_ref(),
        }
    }

    /// The bit spoken after `prefix` by whichever party owns the position.
    pub fn next_bit(&self, prefix: &Transcript) -> bool {
        let role = if prefix.len() % 2 == 0 { Role::Alice } else { Role::Bob };
        self.oracle(role).next_bit(prefix)
    }

    /// The unique full transcript consistent with both oracles.
    pub fn transcript(&self) -> Transcript {
        let mut t = Transcript::EMPTY;
        for _ in 0..self.n0 {
            let b = self.next_bit(&t);
            t = t.push(b);
        }
        t
    }

    /// Whether `t`'s bits at positions owned by `role` all match the
    /// party's oracle.
    pub fn consistent_with(&self, t: &Transcript, role: Role) -> bool {
        for pos in 1..=t.len() {
            if role.owns_position(pos) && self.oracle(role).next_bit(&t.prefix(pos - 1)) != t.bit(pos)
            {
                return false;
            }
        }
        true
    }

    /// Is `len` a transcript length on which `role`'s next-bit function is
    /// defined (the set `S`)? Even lengths below `n0` for Alice, odd for
    /// Bob. Negative lengths carry their parity, which extends the update
    /// algebra to Bob's empty transcript.
    fn in_s(&self, len: i64, role: Role) -> bool {
        if len >= self.n0 as i64 {
            return false;
        }
        (len.rem_euclid(2) == 0) == (role == Role::Alice)
    }
}

impl std::fmt::Debug for NoiselessProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NoiselessProtocol(n0={})", self.n0)
    }
}

/// The instruction a party with input `r` gives to extend `t`: rewind if
/// `t` contradicts them, their next bit where defined, otherwise the
/// default `1`.
pub fn op_role(proto: &NoiselessProtocol, role: Role, t: &Transcript) -> EdgeLabel {
    if !proto.consistent_with(t, role) {
        return EdgeLabel::Back;
    }
    if proto.in_s(t.len() as i64, role) {
        if proto.oracle(role).next_bit(t) {
            EdgeLabel::One
        } else {
            EdgeLabel::Zero
        }
    } else {
        EdgeLabel::One
    }
}

/// The instruction that brings `t` one step closer to the complete target.
pub fn op_target(target: &Transcript, t: &Transcript) -> EdgeLabel {
    if t == target {
        EdgeLabel::One
    } else if t.is_prefix_of(target) {
        if target.bit(t.len() + 1) {
            EdgeLabel::One
        } else {
            EdgeLabel::Zero
        }
    } else {
        EdgeLabel::Back
    }
}

/// One pair of update edges as appended per `⊗` application.
pub type UpdatePair = (EdgeLabel, EdgeLabel);

/// Apply a pair of edges to a transcript, with the length-`n0` cap.
pub fn apply_pair(t: &Transcript, pair: UpdatePair, n0: u32) -> Transcript {
    let one = |t: &Transcript, e: EdgeLabel| match e {
        EdgeLabel::Zero | EdgeLabel::One => {
            assert!(t.len() < n0, "update pair extends a complete transcript");
            t.push(e == EdgeLabel::One)
        }
        EdgeLabel::Back => t.pop(),
        EdgeLabel::Stay => *t,
    };
    one(&one(t, pair.0), pair.1)
}

/// The update operator `⊗`: from the current `(transcript, weight)` and a
/// received instruction, the pair of edges to append and the new weight.
///
/// Cases, with `T` the current transcript:
/// * `•` — append `••`, weight unchanged.
/// * `←` with `w > 0` — append `••`, decrement the weight.
/// * `←` with `w = 0` — remove the other party's last bit and, when the
///   transcript ends on this party's own bit, that one too (`←←` vs `←•`).
/// * `0`/`1` with `T` complete — append `••`, increment the weight.
/// * `0`/`1` otherwise — if `T` ends on this party's own bit, append the
///   received bit and this party's response to it (just the bit when that
///   completes the transcript); if `T` ends on the other party's bit, the
///   received bit is discarded and only the response to `T` is appended.
///   Weight resets to 0.
pub fn otimes(
    proto: &NoiselessProtocol,
    role: Role,
    t: &Transcript,
    w: u64,
    delta_hat: EdgeLabel,
) -> (UpdatePair, u64) {
    let n0 = proto.n0;
    match delta_hat {
        EdgeLabel::Stay => ((EdgeLabel::Stay, EdgeLabel::Stay), w),
        EdgeLabel::Back => {
            if w > 0 {
                ((EdgeLabel::Stay, EdgeLabel::Stay), w - 1)
            } else if proto.in_s(t.len() as i64 - 1, role) {
                ((EdgeLabel::Back, EdgeLabel::Back), w)
            } else {
                ((EdgeLabel::Back, EdgeLabel::Stay), w)
            }
        }
        bit @ (EdgeLabel::Zero | EdgeLabel::One) => {
            if t.len() == n0 {
                return ((EdgeLabel::Stay, EdgeLabel::Stay), w + 1);
            }
            if proto.in_s(t.len() as i64 - 1, role) {
                if t.len() < n0 - 1 {
                    let extended = t.push(bit == EdgeLabel::One);
                    ((bit, op_role(proto, role, &extended)), 0)
                } else {
                    ((bit, EdgeLabel::Stay), 0)
                }
            } else {
                debug_assert!(proto.in_s(t.len() as i64, role));
                ((EdgeLabel::Stay, op_role(proto, role, t)), 0)
            }
        }
    }
}
