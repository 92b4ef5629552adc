//! Layered codes on the transcript graph.
//!
//! A code is a deterministic, seeded assignment of alphabet symbols to the
//! edges of the graph; two holders of the same seed always agree on every
//! label, which replaces the infeasible "agree on the lexicographically
//! first good code" convention. Encoding reads labels along a rooted path.
//!
//! Decoding works with the suffix distance: a received word `w` of length
//! `i` lists every vertex reachable by a path whose encoding is within
//! suffix distance `1 − ε` of `w`. Membership of a path depends only on a
//! single running *deficit*, which is monotone under extension, so the list
//! is computed exactly by a per-vertex dynamic program over layers instead
//! of enumerating `4^i` paths. All comparisons are integer-exact.

use crate::frac::Frac;
use crate::graph::{
    apply_edge, follow_path, EdgeLabel, GraphError, GraphParams, Transcript, Vertex,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// A symbol of the code alphabet `Σ`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct CodeSymbol(pub u16);

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("sequences must have equal nonzero length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("exhaustive check budget exceeded: {words} words > budget {budget}")]
    BudgetExceeded { words: u128, budget: u128 },
    #[error("alphabet size must be >= 2")]
    BadAlphabet,
}

/// Seeded layered code. Immutable; share freely across workers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayeredCode {
    seed: u64,
    alphabet_size: u16,
    params: GraphParams,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

impl LayeredCode {
    pub fn new(seed: u64, alphabet_size: u16, params: GraphParams) -> Result<Self, CodeError> {
        if alphabet_size < 2 {
            return Err(CodeError::BadAlphabet);
        }
        Ok(LayeredCode {
            seed,
            alphabet_size,
            params,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn alphabet_size(&self) -> u16 {
        self.alphabet_size
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    /// The label on the out-edge `e` of `v`. Pure in `(seed, transcript,
    /// layer, edge)`.
    pub fn label(&self, v: &Vertex, e: EdgeLabel) -> CodeSymbol {
        let h = self.label_hash(v.transcript.heap_index(), v.layer, e);
        // multiply-shift keeps the map unbiased enough for any alphabet size
        CodeSymbol((((h as u128) * (self.alphabet_size as u128)) >> 64) as u16)
    }

    fn label_hash(&self, heap: u64, layer: u32, e: EdgeLabel) -> u64 {
        let a = splitmix64(self.seed ^ heap.wrapping_mul(0xd6e8feb86659fd93));
        splitmix64(a ^ ((layer as u64) << 8 | e.index() as u64))
    }
}

/// Serializable description of a code plus its decoding radius; sessions
/// are reproducible from this.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CodeDescriptor {
    pub seed: u64,
    pub alphabet_size: u16,
    pub n0: u32,
    pub depth: u32,
    pub epsilon: Frac,
}

impl CodeDescriptor {
    pub fn build(&self) -> Result<LayeredCode, CodeError> {
        let params = GraphParams::new(self.n0, self.depth)?;
        LayeredCode::new(self.seed, self.alphabet_size, params)
    }
}

/// Encode a path starting at `start`: the i-th output symbol is the label
/// on the i-th edge walked.
pub fn encode(
    code: &LayeredCode,
    start: Vertex,
    path: &[EdgeLabel],
) -> Result<Vec<CodeSymbol>, CodeError> {
    let mut out = Vec::with_capacity(path.len());
    let mut v = start;
    for &e in path {
        out.push(code.label(&v, e));
        v = apply_edge(v, e, code.params())?;
    }
    Ok(out)
}

/// Suffix distance: the maximum over suffixes of the relative Hamming
/// distance of corresponding suffixes. Returned as an exact fraction.
pub fn suffix_distance(x: &[CodeSymbol], y: &[CodeSymbol]) -> Result<Frac, CodeError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(CodeError::LengthMismatch(x.len(), y.len()));
    }
    let mut mismatches = 0u64;
    let mut best = Frac::ZERO;
    // walk suffixes from the shortest to the longest
    for (len, (a, b)) in x.iter().rev().zip(y.iter().rev()).enumerate() {
        if a != b {
            mismatches += 1;
        }
        let cand = Frac::new(mismatches, (len + 1) as u64);
        if cand > best {
            best = cand;
        }
    }
    Ok(best)
}

/// Outcome of unique decoding.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum DecodeResult {
    Unique(Vertex),
    Ambiguous,
    Empty,
}

impl DecodeResult {
    pub fn unique(&self) -> Option<Vertex> {
        match self {
            DecodeResult::Unique(v) => Some(*v),
            _ => None,
        }
    }
}

const UNREACHED: i64 = i64::MAX;
/// Stands in for the empty maximum at the root; `max(NEG_INF, 0)` must be 0.
const NEG_INF: i64 = i64::MIN / 4;

/// Incremental list decoder. Feed received symbols one at a time; after
/// `i` symbols it knows, for every vertex `v` in layer `i`, the minimum
/// deficit over all length-`i` paths ending at `v`.
///
/// The deficit of a path `p` of length `i` against `w` is
/// `max_j [ den·Δ(C(p)[j+1:i], w[j+1:i]) − (den−num)·(i−j) ]`, scaled by the
/// denominator of `ε = num/den` so everything stays integral. A vertex is in
/// the list `L_i` exactly when its minimum deficit is negative, which is the
/// statement `Δ_sfx < 1 − ε`. The per-edge update is
/// `max(deficit, 0) + (den·mismatch − (den − num))`, monotone in the
/// incoming deficit, so per-vertex minima propagate exactly.
#[derive(Clone)]
pub struct IncrementalDecoder {
    code: LayeredCode,
    epsilon: Frac,
    layer: u32,
    /// deficit per transcript heap index at the current layer
    cur: Vec<i64>,
    scratch: Vec<i64>,
}

impl IncrementalDecoder {
    pub fn new(code: &LayeredCode, epsilon: Frac) -> Self {
        let cap = 1usize << (code.params().n0 + 1);
        let mut cur = vec![UNREACHED; cap];
        cur[1] = NEG_INF; // the root, heap index 1
        IncrementalDecoder {
            code: code.clone(),
            epsilon,
            layer: 0,
            cur,
            scratch: vec![UNREACHED; cap],
        }
    }

    pub fn layer(&self) -> u32 {
        self.layer
    }

    /// Advance one layer with the next received symbol.
    pub fn push(&mut self, symbol: CodeSymbol) {
        let params = *self.code.params();
        assert!(self.layer < params.depth, "decoder advanced past graph depth");
        let num = self.epsilon.num as i64;
        let den = self.epsilon.den as i64;
        let miss_cost = den; // per mismatched symbol
        let step_cost = den - num; // subtracted per symbol either way

        let src_len_cap = params.max_len(self.layer);
        let dst_len_cap = params.max_len(self.layer + 1);
        let dst_hi = 1usize << (dst_len_cap + 1);
        let scratch = &mut self.scratch;
        scratch[..dst_hi].fill(UNREACHED);

        for h in 1..(1usize << (src_len_cap + 1)) {
            let d = self.cur[h];
            if d == UNREACHED {
                continue;
            }
            let base = if d > 0 { d } else { 0 };
            let len = (usize::BITS - 1 - h.leading_zeros()) as u32;
            let layer = self.layer;
            let code = &self.code;
            let mut relax = |dst: usize, e: EdgeLabel| {
                let sym = code.label(
                    &Vertex {
                        transcript: Transcript::from_heap_index(h as u64),
                        layer,
                    },
                    e,
                );
                let cost = if sym == symbol { 0 } else { miss_cost };
                let cand = base + cost - step_cost;
                if cand < scratch[dst] {
                    scratch[dst] = cand;
                }
            };
            if len < params.n0 {
                relax(h << 1, EdgeLabel::Zero);
                relax((h << 1) | 1, EdgeLabel::One);
            }
            relax(if h == 1 { 1 } else { h >> 1 }, EdgeLabel::Back);
            relax(h, EdgeLabel::Stay);
        }
        std::mem::swap(&mut self.cur, &mut self.scratch);
        self.layer += 1;
    }

    /// Vertices of the current layer within the decoding radius.
    pub fn list(&self) -> BTreeSet<Vertex> {
        let mut out = BTreeSet::new();
        let cap = self.code.params().max_len(self.layer);
        for h in 1..(1usize << (cap + 1)) {
            if self.cur[h] != UNREACHED && self.cur[h] < 0 {
                out.insert(Vertex {
                    transcript: Transcript::from_heap_index(h as u64),
                    layer: self.layer,
                });
            }
        }
        out
    }

    /// Unique / ambiguous / empty without materializing the whole list.
    pub fn decode_current(&self) -> DecodeResult {
        let mut found: Option<Vertex> = None;
        let cap = self.code.params().max_len(self.layer);
        for h in 1..(1usize << (cap + 1)) {
            if self.cur[h] != UNREACHED && self.cur[h] < 0 {
                let v = Vertex {
                    transcript: Transcript::from_heap_index(h as u64),
                    layer: self.layer,
                };
                if found.is_some() {
                    return DecodeResult::Ambiguous;
                }
                found = Some(v);
            }
        }
        match found {
            Some(v) => DecodeResult::Unique(v),
            None => DecodeResult::Empty,
        }
    }
}

/// The list `L_i`: vertices in layer `i` reachable within suffix distance
/// `1 − ε` of `w[1:i]`.
pub fn list_layer(
    code: &LayeredCode,
    w: &[CodeSymbol],
    epsilon: Frac,
    i: usize,
) -> BTreeSet<Vertex> {
    assert!(i >= 1 && i <= w.len());
    let mut dec = IncrementalDecoder::new(code, epsilon);
    for &s in &w[..i] {
        dec.push(s);
    }
    dec.list()
}

/// Unique decoding of the full word: `Unique(v)` when exactly one vertex is
/// listed at layer `|w|`, otherwise `Ambiguous` / `Empty`.
pub fn decode(code: &LayeredCode, w: &[CodeSymbol], epsilon: Frac) -> DecodeResult {
    assert!(!w.is_empty());
    let mut dec = IncrementalDecoder::new(code, epsilon);
    for &s in w {
        dec.push(s);
    }
    dec.decode_current()
}

/// Decode every prefix of `w` in one incremental pass.
pub fn decode_all_prefixes(
    code: &LayeredCode,
    w: &[CodeSymbol],
    epsilon: Frac,
) -> Vec<DecodeResult> {
    let mut dec = IncrementalDecoder::new(code, epsilon);
    w.iter()
        .map(|&s| {
            dec.push(s);
            dec.decode_current()
        })
        .collect()
}

/// For a true path `x` and received word `w`: the number of agreement
/// indices `J = { i : C(x)[i] = w[i] }` and how many of those fail to decode
/// back to the true vertex.
pub fn decode_quality(
    code: &LayeredCode,
    x: &[EdgeLabel],
    w: &[CodeSymbol],
    epsilon: Frac,
) -> Result<(usize, usize), CodeError> {
    if x.len() != w.len() || x.is_empty() {
        return Err(CodeError::LengthMismatch(x.len(), w.len()));
    }
    let cx = encode(code, Vertex::ROOT, x)?;
    let decoded = decode_all_prefixes(code, w, epsilon);
    let mut truth = Vertex::ROOT;
    let mut agreements = 0usize;
    let mut bad = 0usize;
    for i in 0..x.len() {
        truth = apply_edge(truth, x[i], code.params())?;
        if cx[i] == w[i] {
            agreements += 1;
            if decoded[i] != DecodeResult::Unique(truth) {
                bad += 1;
            }
        }
    }
    Ok((agreements, bad))
}

/// One sensitivity violation: a word together with a prefix-tree witness
/// whose label agreement with the word is too large.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub word: Vec<CodeSymbol>,
    /// edges as (source vertex, label); their union is the witness tree
    pub tree: Vec<(Vertex, EdgeLabel)>,
    pub agr: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub epsilon: Frac,
    pub depth: u32,
    pub checked_words: u64,
    pub violations: Vec<Violation>,
}

impl SensitivityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All paths of length `i` from the root, with their endpoint and encoding.
fn enumerate_paths(
    code: &LayeredCode,
    len: usize,
) -> Vec<(Vec<EdgeLabel>, Vertex, Vec<CodeSymbol>)> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<EdgeLabel>, Vertex, Vec<CodeSymbol>)> =
        vec![(Vec::new(), Vertex::ROOT, Vec::new())];
    while let Some((path, v, enc)) = stack.pop() {
        if path.len() == len {
            out.push((path, v, enc));
            continue;
        }
        for e in EdgeLabel::ALL {
            if let Ok(next) = apply_edge(v, e, code.params()) {
                let mut p = path.clone();
                let mut c = enc.clone();
                p.push(e);
                c.push(code.label(&v, e));
                stack.push((p, next, c));
            }
        }
    }
    out
}

/// Edges of a path as (source vertex, label) pairs.
fn path_edges(path: &[EdgeLabel], params: &GraphParams) -> Vec<(Vertex, EdgeLabel)> {
    let mut v = Vertex::ROOT;
    let mut out = Vec::with_capacity(path.len());
    for &e in path {
        out.push((v, e));
        v = apply_edge(v, e, params).expect("path within depth");
    }
    out
}

/// Union the chosen paths; `None` when the union is not a tree (some vertex
/// gains two distinct incoming edges).
fn union_as_tree(
    paths: &[&[EdgeLabel]],
    params: &GraphParams,
) -> Option<Vec<(Vertex, EdgeLabel)>> {
    let mut incoming: BTreeMap<Vertex, (Vertex, EdgeLabel)> = BTreeMap::new();
    for p in paths {
        let mut v = Vertex::ROOT;
        for &e in *p {
            let next = apply_edge(v, e, params).expect("path within depth");
            match incoming.get(&next) {
                None => {
                    incoming.insert(next, (v, e));
                }
                Some(&(pv, pe)) => {
                    if (pv, pe) != (v, e) {
                        return None;
                    }
                }
            }
            v = next;
        }
    }
    Some(incoming.into_iter().map(|(_, edge)| edge).collect())
}

fn tree_agreement(tree: &[(Vertex, EdgeLabel)], code: &LayeredCode, w: &[CodeSymbol]) -> u32 {
    tree.iter()
        .filter(|(v, e)| code.label(v, *e) == w[v.layer as usize])
        .count() as u32
}

/// Scaled deficit of a path prefix against `w[1:k]`; negative iff within
/// the suffix-distance radius.
fn path_deficit(enc: &[CodeSymbol], w: &[CodeSymbol], epsilon: Frac) -> i64 {
    let num = epsilon.num as i64;
    let den = epsilon.den as i64;
    let mut d = NEG_INF;
    for (c, r) in enc.iter().zip(w) {
        let cost = if c == r { 0 } else { den };
        d = d.max(0) + cost - (den - num);
    }
    d
}

/// The constructive rewrite: pick one qualifying path per vertex, then
/// repeatedly merge prefixes at the deepest vertex reached by two different
/// prefixes, keeping the minimum-deficit prefix, until the union is a tree.
fn greedy_prefix_tree(
    selection: &mut Vec<Vec<EdgeLabel>>,
    code: &LayeredCode,
    w: &[CodeSymbol],
    epsilon: Frac,
) -> Vec<(Vertex, EdgeLabel)> {
    let params = *code.params();
    loop {
        // deepest layer with two chosen paths meeting at a vertex via
        // different prefixes
        let mut conflict: Option<(u32, Vertex)> = None;
        for k in (1..=w.len() as u32).rev() {
            let mut at: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
            for (idx, p) in selection.iter().enumerate() {
                if p.len() as u32 >= k {
                    let v = follow_path(Vertex::ROOT, &p[..k as usize], &params).unwrap();
                    at.entry(v).or_default().push(idx);
                }
            }
            for (v, idxs) in at {
                if idxs
                    .iter()
                    .map(|&i| &selection[i][..k as usize])
                    .collect::<BTreeSet<_>>()
                    .len()
                    > 1
                {
                    conflict = Some((k, v));
                    break;
                }
            }
            if conflict.is_some() {
                break;
            }
        }
        let Some((k, y)) = conflict else {
            let refs: Vec<&[EdgeLabel]> = selection.iter().map(|p| p.as_slice()).collect();
            return union_as_tree(&refs, &params).expect("conflict-free union is a tree");
        };
        let k = k as usize;
        let through: Vec<usize> = (0..selection.len())
            .filter(|&i| {
                selection[i].len() >= k
                    && follow_path(Vertex::ROOT, &selection[i][..k], &params).unwrap() == y
            })
            .collect();
        let best = through
            .iter()
            .copied()
            .min_by_key(|&i| {
                let enc = encode(code, Vertex::ROOT, &selection[i][..k]).unwrap();
                path_deficit(&enc, &w[..k], epsilon)
            })
            .unwrap();
        let q = selection[best][..k].to_vec();
        for &i in &through {
            let mut p = q.clone();
            p.extend_from_slice(&selection[i][k..]);
            selection[i] = p;
        }
    }
}

/// Exhaustively check sensitivity at a tiny depth: for every word, every
/// subset of the decodable vertices, and every tree-forming choice of
/// witness paths (greedy-constructed when the choice space is too large),
/// the label agreement must stay ≤ (1+ε)·depth.
pub fn check_sensitivity_exhaustive(
    code: &LayeredCode,
    depth: u32,
    epsilon: Frac,
    word_budget: u128,
) -> Result<SensitivityReport, CodeError> {
    let words = (code.alphabet_size() as u128).pow(depth);
    if words > word_budget {
        return Err(CodeError::BudgetExceeded {
            words,
            budget: word_budget,
        });
    }
    // agr > (1+ε)·depth  ⇔  agr·den > (den+num)·depth
    let num = epsilon.num as u64;
    let den = epsilon.den as u64;
    let violates = |agr: u32| (agr as u64) * den > (den + num) * depth as u64;

    let mut all_paths: Vec<Vec<(Vec<EdgeLabel>, Vertex, Vec<CodeSymbol>)>> = Vec::new();
    for i in 1..=depth as usize {
        all_paths.push(enumerate_paths(code, i));
    }

    let mut report = SensitivityReport {
        epsilon,
        depth,
        checked_words: 0,
        violations: Vec::new(),
    };

    let sigma = code.alphabet_size() as u64;
    let mut word = vec![CodeSymbol(0); depth as usize];
    for wi in 0..words as u64 {
        let mut rest = wi;
        for slot in word.iter_mut() {
            *slot = CodeSymbol((rest % sigma) as u16);
            rest /= sigma;
        }
        report.checked_words += 1;
        if let Some(v) = check_one_word(code, &word, epsilon, &all_paths, &violates) {
            report.violations.push(v);
        }
    }
    Ok(report)
}

/// Budget for enumerating path selections per vertex subset before falling
/// back to the greedy construction.
const SELECTION_BUDGET: u64 = 1 << 16;

fn check_one_word(
    code: &LayeredCode,
    w: &[CodeSymbol],
    epsilon: Frac,
    all_paths: &[Vec<(Vec<EdgeLabel>, Vertex, Vec<CodeSymbol>)>],
    violates: &dyn Fn(u32) -> bool,
) -> Option<Violation> {
    let params = *code.params();
    // qualifying paths per vertex of L = ∪ L_i
    let mut candidates: BTreeMap<Vertex, Vec<Vec<EdgeLabel>>> = BTreeMap::new();
    for i in 1..=w.len() {
        for (path, v, enc) in &all_paths[i - 1] {
            if path_deficit(enc, &w[..i], epsilon) < 0 {
                candidates.entry(*v).or_default().push(path.clone());
            }
        }
    }
    let verts: Vec<Vertex> = candidates.keys().copied().collect();
    if verts.is_empty() {
        return None;
    }
    // subsets of L, non-empty
    assert!(verts.len() < 20, "vertex list unexpectedly large for a tiny depth");
    for mask in 1u32..(1 << verts.len()) {
        let subset: Vec<Vertex> = (0..verts.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| verts[i])
            .collect();
        let choice_count: u64 = subset
            .iter()
            .map(|v| candidates[v].len() as u64)
            .product();
        if choice_count <= SELECTION_BUDGET {
            // enumerate every selection of one path per vertex
            for choice in 0..choice_count {
                let mut rest = choice;
                let refs: Vec<&[EdgeLabel]> = subset
                    .iter()
                    .map(|v| {
                        let opts = &candidates[v];
                        let i = (rest % opts.len() as u64) as usize;
                        rest /= opts.len() as u64;
                        opts[i].as_slice()
                    })
                    .collect();
                if let Some(tree) = union_as_tree(&refs, &params) {
                    let agr = tree_agreement(&tree, code, w);
                    if violates(agr) {
                        return Some(Violation {
                            word: w.to_vec(),
                            tree,
                            agr,
                        });
                    }
                }
            }
        } else {
            let mut selection: Vec<Vec<EdgeLabel>> = subset
                .iter()
                .map(|v| {
                    candidates[v]
                        .iter()
                        .min_by_key(|p| {
                            let enc = encode(code, Vertex::ROOT, p).unwrap();
                            path_deficit(&enc, &w[..p.len()], epsilon)
                        })
                        .unwrap()
                        .clone()
                })
                .collect();
            let tree = greedy_prefix_tree(&mut selection, code, w, epsilon);
            let agr = tree_agreement(&tree, code, w);
            if violates(agr) {
                return Some(Violation {
                    word: w.to_vec(),
                    tree,
                    agr,
                });
            }
        }
    }
    None
}
