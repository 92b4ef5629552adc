//! The virtual transcript graph.
//!
//! Layer `ℓ` holds one vertex per binary transcript of length `≤ min(ℓ, n0)`.
//! The four out-edges of a vertex apply an update instruction to its
//! transcript: append `0`, append `1`, rewind one bit (`←`, a no-op on the
//! empty transcript), or do nothing (`•`). Nothing is materialized; vertices
//! are computed on demand from `(transcript, layer)`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Update instruction on a transcript; the edge alphabet of the graph.
///
/// The ordering `Zero < One < Back < Stay` is fixed and used for canonical
/// tie-breaking wherever edges are enumerated.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum EdgeLabel {
    Zero,
    One,
    Back,
    Stay,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 4] = [EdgeLabel::Zero, EdgeLabel::One, EdgeLabel::Back, EdgeLabel::Stay];

    pub fn index(self) -> u8 {
        match self {
            EdgeLabel::Zero => 0,
            EdgeLabel::One => 1,
            EdgeLabel::Back => 2,
            EdgeLabel::Stay => 3,
        }
    }

    pub fn from_index(i: u8) -> EdgeLabel {
        EdgeLabel::ALL[i as usize]
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            EdgeLabel::Zero => '0',
            EdgeLabel::One => '1',
            EdgeLabel::Back => '<',
            EdgeLabel::Stay => '.',
        };
        write!(f, "{c}")
    }
}

/// A binary transcript of length ≤ 63, packed into a word. The first bit is
/// the most significant of the packed value, so appending is a shift.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transcript {
    bits: u64,
    len: u8,
}

impl Transcript {
    pub const EMPTY: Transcript = Transcript { bits: 0, len: 0 };

    pub fn len(&self) -> u32 {
        self.len as u32
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&self, b: bool) -> Transcript {
        debug_assert!(self.len < 63);
        Transcript {
            bits: (self.bits << 1) | b as u64,
            len: self.len + 1,
        }
    }

    pub fn pop(&self) -> Transcript {
        if self.len == 0 {
            *self
        } else {
            Transcript {
                bits: self.bits >> 1,
                len: self.len - 1,
            }
        }
    }

    /// 1-indexed bit access.
    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i >= 1 && i <= self.len as u32);
        (self.bits >> (self.len as u32 - i)) & 1 == 1
    }

    pub fn prefix(&self, len: u32) -> Transcript {
        debug_assert!(len <= self.len as u32);
        Transcript {
            bits: self.bits >> (self.len as u32 - len),
            len: len as u8,
        }
    }

    pub fn is_prefix_of(&self, other: &Transcript) -> bool {
        self.len <= other.len && other.prefix(self.len()) == *self
    }

    /// Heap-style index: the empty transcript is 1, appending a bit maps
    /// `h` to `2h+b`. Dense over all transcripts of length ≤ L, with
    /// values in `[1, 2^(L+1))`.
    pub fn heap_index(&self) -> u64 {
        (1u64 << self.len) | self.bits
    }

    pub fn from_heap_index(h: u64) -> Transcript {
        debug_assert!(h >= 1);
        let len = 63 - h.leading_zeros() as u8;
        Transcript {
            bits: h & !(1u64 << len),
            len,
        }
    }

    pub fn from_bits(s: &str) -> Transcript {
        let mut t = Transcript::EMPTY;
        for c in s.chars() {
            match c {
                '0' => t = t.push(false),
                '1' => t = t.push(true),
                _ => panic!("transcript strings are over 0/1"),
            }
        }
        t
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len as u32).map(|i| self.bit(i))
    }
}

impl fmt::Debug for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "ε");
        }
        for b in self.iter_bits() {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

/// A graph vertex: a transcript placed at a layer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub transcript: Transcript,
    pub layer: u32,
}

impl Vertex {
    pub const ROOT: Vertex = Vertex {
        transcript: Transcript::EMPTY,
        layer: 0,
    };
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.transcript, self.layer)
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.layer, self.transcript.heap_index()).cmp(&(other.layer, other.transcript.heap_index()))
    }
}

/// Shape of a transcript graph: transcripts are capped at `n0` bits and the
/// graph has `depth` layers of edges.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GraphParams {
    pub n0: u32,
    pub depth: u32,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("n0 must be even and >= 2, got {0}")]
    BadN0(u32),
    #[error("depth must be >= 1, got {0}")]
    BadDepth(u32),
    #[error("edge from layer {layer} exceeds graph depth {depth}")]
    DepthExceeded { layer: u32, depth: u32 },
    #[error("cannot append a bit to a complete transcript of length {n0}")]
    AppendBeyondComplete { n0: u32 },
}

impl GraphParams {
    pub fn new(n0: u32, depth: u32) -> Result<Self, GraphError> {
        if n0 < 2 || n0 % 2 != 0 {
            return Err(GraphError::BadN0(n0));
        }
        if depth == 0 {
            return Err(GraphError::BadDepth(depth));
        }
        assert!(n0 <= 32, "transcripts are packed into a word; n0 <= 32");
        Ok(GraphParams { n0, depth })
    }

    /// Longest transcript representable at `layer`.
    pub fn max_len(&self, layer: u32) -> u32 {
        layer.min(self.n0)
    }

    /// Vertex count in `layer`: one per transcript of length ≤ min(layer, n0).
    pub fn layer_size(&self, layer: u32) -> u64 {
        (1u64 << (self.max_len(layer) + 1)) - 1
    }
}

/// Follow one edge. The transcript cap at `n0` is enforced: the protocol
/// switches to weight bookkeeping instead of extending a complete
/// transcript, so a `0`/`1` edge there signals a caller bug.
pub fn apply_edge(v: Vertex, e: EdgeLabel, params: &GraphParams) -> Result<Vertex, GraphError> {
    if v.layer >= params.depth {
        return Err(GraphError::DepthExceeded {
            layer: v.layer,
            depth: params.depth,
        });
    }
    let transcript = match e {
        EdgeLabel::Zero | EdgeLabel::One => {
            if v.transcript.len() == params.n0 {
                return Err(GraphError::AppendBeyondComplete { n0: params.n0 });
            }
            v.transcript.push(e == EdgeLabel::One)
        }
        EdgeLabel::Back => v.transcript.pop(),
        EdgeLabel::Stay => v.transcript,
    };
    Ok(Vertex {
        transcript,
        layer: v.layer + 1,
    })
}

/// Left fold of [`apply_edge`] over a path.
pub fn follow_path(
    start: Vertex,
    path: &[EdgeLabel],
    params: &GraphParams,
) -> Result<Vertex, GraphError> {
    let mut v = start;
    for &e in path {
        v = apply_edge(v, e, params)?;
    }
    Ok(v)
}

/// All vertices of a layer, heap-index order.
pub fn layer_vertices(layer: u32, params: &GraphParams) -> Vec<Vertex> {
    let max_len = params.max_len(layer);
    let mut out = Vec::with_capacity(params.layer_size(layer) as usize);
    for h in 1..(1u64 << (max_len + 1)) {
        out.push(Vertex {
            transcript: Transcript::from_heap_index(h),
            layer,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n0: u32, depth: u32) -> GraphParams {
        GraphParams::new(n0, depth).unwrap()
    }

    fn v(bits: &str, layer: u32) -> Vertex {
        Vertex {
            transcript: Transcript::from_bits(bits),
            layer,
        }
    }

    #[test]
    fn apply_edge_four_cases() {
        let p = params(8, 10);
        // back on the empty transcript stays empty
        assert_eq!(apply_edge(v("", 0), EdgeLabel::Back, &p).unwrap(), v("", 1));
        // append
        assert_eq!(apply_edge(v("01", 5), EdgeLabel::One, &p).unwrap(), v("011", 6));
        // stay
        assert_eq!(apply_edge(v("01", 5), EdgeLabel::Stay, &p).unwrap(), v("01", 6));
        // rewind
        assert_eq!(apply_edge(v("01", 5), EdgeLabel::Back, &p).unwrap(), v("0", 6));
    }

    #[test]
    fn apply_edge_errors() {
        let p = params(2, 4);
        assert_eq!(
            apply_edge(v("01", 2), EdgeLabel::Zero, &p),
            Err(GraphError::AppendBeyondComplete { n0: 2 })
        );
        assert_eq!(
            apply_edge(v("0", 4), EdgeLabel::Stay, &p),
            Err(GraphError::DepthExceeded { layer: 4, depth: 4 })
        );
    }

    #[test]
    fn follow_path_folds() {
        let p = params(8, 10);
        use EdgeLabel::*;
        assert_eq!(follow_path(Vertex::ROOT, &[One], &p).unwrap(), v("1", 1));
        assert_eq!(
            follow_path(Vertex::ROOT, &[Stay, One, Stay, Stay], &p).unwrap(),
            v("1", 4)
        );
        assert_eq!(
            follow_path(Vertex::ROOT, &[One, Back, Back], &p).unwrap(),
            v("", 3)
        );
    }

    #[test]
    fn layer_vertices_enumerates_short_transcripts() {
        let p = params(8, 10);
        assert_eq!(layer_vertices(0, &p), vec![Vertex::ROOT]);
        assert_eq!(layer_vertices(1, &p), vec![v("", 1), v("0", 1), v("1", 1)]);

        let p1 = params(2, 10);
        // n0 = 2 caps the transcripts even at higher layers... but n0 >= 2,
        // so use the layer-2 check from a length-1 cap via max_len.
        assert_eq!(layer_vertices(2, &p1).len(), 7);
    }

    #[test]
    fn layer_sizes_match_formula() {
        for n0 in [2u32, 4, 6, 8] {
            let p = params(n0, 12);
            for layer in 0..=12u32 {
                let expect = (1u64 << (layer.min(n0) + 1)) - 1;
                assert_eq!(layer_vertices(layer, &p).len() as u64, expect);
                assert_eq!(p.layer_size(layer), expect);
            }
        }
    }

    #[test]
    fn layer_increments_and_stay_preserves_transcript() {
        let p = params(4, 6);
        for layer in 0..6 {
            for vert in layer_vertices(layer, &p) {
                for e in EdgeLabel::ALL {
                    match apply_edge(vert, e, &p) {
                        Ok(w) => {
                            assert_eq!(w.layer, vert.layer + 1);
                            if e == EdgeLabel::Stay {
                                assert_eq!(w.transcript, vert.transcript);
                            }
                        }
                        Err(GraphError::AppendBeyondComplete { .. }) => {
                            assert!(matches!(e, EdgeLabel::Zero | EdgeLabel::One));
                        }
                        Err(e) => panic!("unexpected error {e:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn path_independence_same_transcript_same_vertex() {
        // exhaustive over all length-4 edge sequences
        let p = params(4, 6);
        let mut seen: std::collections::HashMap<Transcript, Vertex> = Default::default();
        let mut count = 0u32;
        for code in 0..(4u32.pow(4)) {
            let path: Vec<EdgeLabel> = (0..4)
                .map(|i| EdgeLabel::from_index(((code >> (2 * i)) & 3) as u8))
                .collect();
            let end = follow_path(Vertex::ROOT, &path, &p).unwrap();
            if let Some(prev) = seen.insert(end.transcript, end) {
                assert_eq!(prev, end);
                count += 1;
            }
        }
        assert!(count > 0, "coincidences must actually occur");
    }

    #[test]
    fn heap_index_round_trip() {
        for h in 1..1024u64 {
            assert_eq!(Transcript::from_heap_index(h).heap_index(), h);
        }
    }
}
