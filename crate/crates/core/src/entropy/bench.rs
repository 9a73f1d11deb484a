//! Throughput benchmark comparing the multi-symbol coder paths against a
//! binary-tree baseline that codes the same values one binary decision at a
//! time through the same range coder.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::cdf::DyadicAdaptCdf;
use crate::entropy::coder::{RangeDecoder, RangeEncoder};
use crate::entropy::freq::FreqCtx;

/// Benchmark source: a skewed 10-ary distribution (counts out of 2^15)
/// whose optimal binary decision tree averages about 2.72 binary symbols
/// per value.
pub const BENCH_WEIGHTS: [u32; 10] =
    [10714, 7284, 4953, 3368, 2290, 1557, 1059, 720, 490, 333];

/// Canonical prefix code realizing the optimal binary tree for
/// [`BENCH_WEIGHTS`] (code value, code length). Complete: the codeword
/// lengths satisfy Kraft with equality, so every tree path ends in a leaf.
const TREE_CODES: [(u32, u32); 10] = [
    (0b00, 2),
    (0b01, 2),
    (0b100, 3),
    (0b101, 3),
    (0b1100, 4),
    (0b1101, 4),
    (0b1110, 4),
    (0b11110, 5),
    (0b111110, 6),
    (0b111111, 6),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchModel {
    /// Binary decisions down a fixed prefix-code tree, one adaptive binary
    /// context per internal node.
    Tree,
    /// One adaptive 15-bit multi-symbol CDF.
    Cdf15,
    /// One adaptive frequency-count context on the multiply-free path.
    Freq,
}

impl BenchModel {
    pub fn name(self) -> &'static str {
        match self {
            BenchModel::Tree => "tree",
            BenchModel::Cdf15 => "cdf15",
            BenchModel::Freq => "freq",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub model: BenchModel,
    pub n_symbols: u64,
    pub payload_bytes: u64,
    pub encode_seconds: f64,
    pub decode_seconds: f64,
    /// Megabits of coded output per second.
    pub encode_mbps: f64,
    pub decode_mbps: f64,
    /// Range-coder invocations (symbols or binary decisions actually coded).
    pub encoder_calls: u64,
    pub decoder_calls: u64,
    pub bits_per_value: f64,
}

struct TreeNode {
    /// Child node index per branch bit; a leaf stores the decoded symbol.
    children: [TreeChild; 2],
}

#[derive(Clone, Copy)]
enum TreeChild {
    Node(usize),
    Leaf(usize),
    Empty,
}

fn build_tree() -> Vec<TreeNode> {
    let mut nodes = vec![TreeNode { children: [TreeChild::Empty; 2] }];
    for (sym, &(code, len)) in TREE_CODES.iter().enumerate() {
        let mut at = 0usize;
        for depth in (0..len).rev() {
            let bit = ((code >> depth) & 1) as usize;
            if depth == 0 {
                nodes[at].children[bit] = TreeChild::Leaf(sym);
            } else {
                at = match nodes[at].children[bit] {
                    TreeChild::Node(n) => n,
                    TreeChild::Empty => {
                        nodes.push(TreeNode { children: [TreeChild::Empty; 2] });
                        let n = nodes.len() - 1;
                        nodes[at].children[bit] = TreeChild::Node(n);
                        n
                    }
                    TreeChild::Leaf(_) => unreachable!("prefix property violated"),
                };
            }
        }
    }
    nodes
}

/// Generates the fixed pseudorandom benchmark stream.
pub fn bench_stream(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cum = [0u32; 10];
    let mut acc = 0;
    for (c, &w) in cum.iter_mut().zip(&BENCH_WEIGHTS) {
        acc += w;
        *c = acc;
    }
    (0..n)
        .map(|_| {
            let t = rng.gen_range(0..acc);
            cum.iter().position(|&c| t < c).unwrap()
        })
        .collect()
}

/// Encodes `syms` under the chosen model; returns (bytes, coder calls).
pub fn bench_encode(model: BenchModel, syms: &[usize]) -> (Vec<u8>, u64) {
    let mut enc = RangeEncoder::new();
    let mut calls = 0u64;
    match model {
        BenchModel::Tree => {
            let mut ctxs: Vec<DyadicAdaptCdf> =
                (0..TREE_CODES.len()).map(|_| DyadicAdaptCdf::new_uniform(2)).collect();
            for &s in syms {
                let (code, len) = TREE_CODES[s];
                let mut node = 0usize;
                for depth in (0..len).rev() {
                    let bit = ((code >> depth) & 1) as usize;
                    enc.encode_symbol_q15(bit, &ctxs[node].base.f);
                    ctxs[node].update(bit);
                    calls += 1;
                    node = node * 2 + 1 + bit;
                    if node >= ctxs.len() {
                        // Only nodes on real code paths are ever visited;
                        // the flat indexing above over-allocates lazily.
                        ctxs.resize_with(node + 1, || DyadicAdaptCdf::new_uniform(2));
                    }
                }
            }
        }
        BenchModel::Cdf15 => {
            let mut ctx = DyadicAdaptCdf::new_uniform(10);
            for &s in syms {
                enc.encode_symbol_q15(s, &ctx.base.f);
                ctx.update(s);
                calls += 1;
            }
        }
        BenchModel::Freq => {
            let mut ctx = FreqCtx::new(10);
            for &s in syms {
                ctx.encode(&mut enc, s);
                calls += 1;
            }
        }
    }
    (enc.finish(), calls)
}

/// Decodes `n` values; returns (symbols, coder calls).
pub fn bench_decode(model: BenchModel, bytes: &[u8], n: usize) -> (Vec<usize>, u64) {
    let mut dec = RangeDecoder::new(bytes);
    let mut out = Vec::with_capacity(n);
    let mut calls = 0u64;
    match model {
        BenchModel::Tree => {
            let tree = build_tree();
            let mut ctxs: Vec<DyadicAdaptCdf> = Vec::new();
            for _ in 0..n {
                let mut at = 0usize;
                let mut flat = 0usize;
                loop {
                    if flat >= ctxs.len() {
                        ctxs.resize_with(flat + 1, || DyadicAdaptCdf::new_uniform(2));
                    }
                    let bit = dec.decode_symbol_q15(&ctxs[flat].base.f);
                    ctxs[flat].update(bit);
                    calls += 1;
                    flat = flat * 2 + 1 + bit;
                    match tree[at].children[bit] {
                        TreeChild::Leaf(sym) => {
                            out.push(sym);
                            break;
                        }
                        TreeChild::Node(next) => at = next,
                        TreeChild::Empty => unreachable!("incomplete tree"),
                    }
                }
            }
        }
        BenchModel::Cdf15 => {
            let mut ctx = DyadicAdaptCdf::new_uniform(10);
            for _ in 0..n {
                let s = dec.decode_symbol_q15(&ctx.base.f);
                ctx.update(s);
                out.push(s);
                calls += 1;
            }
        }
        BenchModel::Freq => {
            let mut ctx = FreqCtx::new(10);
            for _ in 0..n {
                out.push(ctx.decode(&mut dec));
                calls += 1;
            }
        }
    }
    (out, calls)
}

/// Runs the benchmark: encodes and decodes a fixed pseudorandom stream and
/// reports throughput in megabits of coded payload per second, plus the
/// number of range-coder invocations on each side.
pub fn bench_throughput(model: BenchModel, n_symbols: usize, seed: u64) -> BenchReport {
    if n_symbols == 0 {
        return BenchReport {
            model,
            n_symbols: 0,
            payload_bytes: 0,
            encode_seconds: 0.0,
            decode_seconds: 0.0,
            encode_mbps: 0.0,
            decode_mbps: 0.0,
            encoder_calls: 0,
            decoder_calls: 0,
            bits_per_value: 0.0,
        };
    }
    let syms = bench_stream(n_symbols, seed);
    let t0 = Instant::now();
    let (bytes, encoder_calls) = bench_encode(model, &syms);
    let encode_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (decoded, decoder_calls) = bench_decode(model, &bytes, n_symbols);
    let decode_seconds = t1.elapsed().as_secs_f64();
    assert_eq!(decoded, syms, "benchmark round-trip mismatch");
    let bits = bytes.len() as f64 * 8.0;
    BenchReport {
        model,
        n_symbols: n_symbols as u64,
        payload_bytes: bytes.len() as u64,
        encode_seconds,
        decode_seconds,
        encode_mbps: bits / 1e6 / encode_seconds.max(1e-12),
        decode_mbps: bits / 1e6 / decode_seconds.max(1e-12),
        encoder_calls,
        decoder_calls,
        bits_per_value: bits / n_symbols as f64,
    }
}
