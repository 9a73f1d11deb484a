//! Acceptance gate: one test per top-level acceptance criterion, each
//! ending in a single `[PASS]` line (a panic is the fail line). Every
//! numeric tolerance is stated next to the check it guards.

use std::cell::Cell;
use std::ops::{Add, Shr, Sub};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dtk::codec::{
    decode, encode, psnr, rdo_partition, tree_cost, EncoderConfig, RateMode, Tools,
};
use dtk::dering::inloop::PipelineOrder;
use dtk::dering::{clpf_block, dering_block, find_direction, DIR_BLOCK, NUM_DIRECTIONS};
use dtk::entropy::{cdf_adapt_dyadic, Cdf15, RangeDecoder, RangeEncoder};
use dtk::fdip::{
    block_dct_operator, coding_gain_db, context_dct_operator, derive_f_dct, train_mode,
    train_predictors, ModeStats, Sample, SparsifyStrategy, TrainOptions, TrainingCorpus,
    BLK_DIM, CTX_DIM,
};
use dtk::io::Frame;
use dtk::plane::PixelPlane;
use dtk::pvq::{pvq_count, pvq_quantize_shape};
use dtk::rc::{
    chunk_merge, gop_types, run_first_pass, simulate_one_pass, simulate_two_pass,
    BesselFilter2, RcConfig, SyntheticEncoder, TwoPassLog,
};
use dtk::transform::dct::dct_matrix;
use dtk::transform::{
    apply_lapping, wht2x2_forward, wht2x2_inverse, wht2x2_real_forward, LapDirection,
    LappingFilter4, PartitionTree,
};

fn pass(n: u32, what: &str) {
    println!("[PASS] criterion {n}: {what}");
}

// --------------------------------------------------------- criterion 1 --

thread_local! {
    static ADDSUBS: Cell<u64> = const { Cell::new(0) };
    static SHIFTS: Cell<u64> = const { Cell::new(0) };
}

/// Integer wrapper that counts every arithmetic operation the transform
/// performs on it.
#[derive(Clone, Copy)]
struct Counted(i64);

impl Add for Counted {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ADDSUBS.with(|c| c.set(c.get() + 1));
        Counted(self.0 + o.0)
    }
}
impl Sub for Counted {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ADDSUBS.with(|c| c.set(c.get() + 1));
        Counted(self.0 - o.0)
    }
}
impl Shr<u32> for Counted {
    type Output = Self;
    fn shr(self, s: u32) -> Self {
        SHIFTS.with(|c| c.set(c.get() + 1));
        Counted(self.0 >> s)
    }
}
impl dtk::transform::wht::WhtNum for Counted {}

#[test]
fn criterion_01_wht_exactness() {
    // Exhaustive {-4..4}^4: perfect reconstruction and forward within +-1
    // of the real-valued transform.
    for a in -4i32..=4 {
        for b in -4i32..=4 {
            for c in -4i32..=4 {
                for d in -4i32..=4 {
                    let (aa, bb, cc, dd) = wht2x2_forward(a, b, c, d);
                    assert_eq!(wht2x2_inverse(aa, bb, cc, dd), (a, b, c, d));
                    let (ra, rb, rc, rd) =
                        wht2x2_real_forward(a as f64, b as f64, c as f64, d as f64);
                    for (int, real) in [(aa, ra), (bb, rb), (cc, rc), (dd, rd)] {
                        assert!(
                            (int as f64 - real).abs() <= 1.0,
                            "({a},{b},{c},{d}): integer {int} vs real {real}"
                        );
                    }
                }
            }
        }
    }
    // 10^6 random 16-bit inputs: bit-exact reconstruction.
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1_000_000 {
        let v: [i32; 4] = std::array::from_fn(|_| rng.gen_range(-32768..=32767));
        let (aa, bb, cc, dd) = wht2x2_forward(v[0], v[1], v[2], v[3]);
        assert_eq!(wht2x2_inverse(aa, bb, cc, dd), (v[0], v[1], v[2], v[3]));
    }
    // Operation-count audit: 7 additions/subtractions and 1 shift.
    ADDSUBS.with(|c| c.set(0));
    SHIFTS.with(|c| c.set(0));
    wht2x2_forward(Counted(5), Counted(-3), Counted(2), Counted(9));
    assert_eq!(ADDSUBS.with(|c| c.get()), 7, "add/sub count");
    assert_eq!(SHIFTS.with(|c| c.get()), 1, "shift count");
    pass(1, "WHT exact over {-4..4}^4 and 10^6 random 16-bit inputs; 7 add/sub + 1 shift");
}

// --------------------------------------------------------- criterion 2 --

#[test]
fn criterion_02_lapping_reversibility() {
    let filter = LappingFilter4::default();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for case in 0..500 {
        let sbs_x = rng.gen_range(1..=3usize);
        let sbs_y = rng.gen_range(1..=3usize);
        let (w, h) = (sbs_x * 32, sbs_y * 32);
        let trees: Vec<PartitionTree> =
            (0..sbs_x * sbs_y).map(|_| PartitionTree::random(32, 0.5, &mut rng)).collect();
        let original: Vec<i32> = (0..w * h).map(|_| rng.gen_range(-1024..=1024)).collect();
        let mut buf = original.clone();
        apply_lapping(&mut buf, w, h, &trees, &filter, LapDirection::Pre).unwrap();
        apply_lapping(&mut buf, w, h, &trees, &filter, LapDirection::Post).unwrap();
        assert_eq!(buf, original, "case {case}: pre->post not bit-exact");
    }
    // DC preservation: a constant plane passes through the pre-filter
    // unchanged.
    for value in [-500, 0, 128, 1023] {
        let trees: Vec<PartitionTree> =
            (0..4).map(|_| PartitionTree::random(32, 0.5, &mut rng)).collect();
        let mut buf = vec![value; 64 * 64];
        apply_lapping(&mut buf, 64, 64, &trees, &filter, LapDirection::Pre).unwrap();
        assert!(buf.iter().all(|&v| v == value), "constant {value} not preserved");
    }
    pass(2, "lapping pre->post bit-exact on 500 random plane/tree pairs; DC preserved");
}

// --------------------------------------------------------- criterion 3 --

#[test]
fn criterion_03_rdo_oracle_equivalence() {
    assert_eq!(PartitionTree::count_trees(16), 17);
    assert_eq!(PartitionTree::count_trees(32), 83_522);
    let all16 = PartitionTree::enumerate_all(16);
    assert_eq!(all16.len(), 17);

    let filter = LappingFilter4::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..50 {
        // Mixed content so different trees win: gradients, an edge, noise.
        let (gx, gy) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let edge = rng.gen_range(2..14usize);
        let noise = rng.gen_range(0.0..20.0);
        let region: Vec<i32> = (0..256)
            .map(|i| {
                let (x, y) = ((i % 16) as f64, (i / 16) as f64);
                let step = if (i % 16) >= edge { 90.0 } else { 0.0 };
                (128.0 + gx * x + gy * y + step + rng.gen_range(-noise..=noise))
                    .round()
                    .clamp(0.0, 255.0) as i32
            })
            .collect();
        let qp = [24, 36, 48][case % 3];
        let lap = if case % 2 == 0 { Some(&filter) } else { None };
        let (tree, greedy_cost) = rdo_partition(&region, 16, qp, lap);
        let oracle_cost = all16
            .iter()
            .map(|t| tree_cost(&region, 16, t, qp, lap))
            .fold(f64::INFINITY, f64::min);
        assert!(
            (greedy_cost - oracle_cost).abs() <= 1e-6 * oracle_cost.max(1.0),
            "case {case}: greedy {greedy_cost} vs exhaustive {oracle_cost} (tree {tree:?})"
        );
    }
    pass(3, "greedy RDO cost equals exhaustive 17-tree search on 50 regions; f(16)=17, f(32)=83522");
}

// --------------------------------------------------------- criterion 4 --

#[test]
fn criterion_04_entropy_overhead() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let n = 1_000_000usize;

    // A skewed static 8-symbol distribution, total 2^15.
    let weights = [9000u32, 6500, 4200, 2500, 1200, 500, 80, 20];
    let cdf = Cdf15::from_weights(&weights);
    let total = cdf.total() as f64;
    let syms: Vec<usize> = (0..n)
        .map(|_| {
            let u = rng.gen_range(0..cdf.total());
            cdf.f.iter().position(|&f| u < f).unwrap()
        })
        .collect();
    // Ideal size of this exact stream under the coded distribution.
    let ideal_bits: f64 =
        syms.iter().map(|&s| -(cdf.prob(s) as f64 / total).log2()).sum();

    // q15 path: <= 0.01% + 64 bits over the ideal.
    let mut enc = RangeEncoder::new();
    for &s in &syms {
        enc.encode_symbol_q15(s, &cdf.f);
    }
    let bytes = enc.finish();
    let actual_bits = bytes.len() as f64 * 8.0;
    assert!(
        actual_bits <= ideal_bits * 1.0001 + 64.0,
        "q15 overhead: {actual_bits} bits vs ideal {ideal_bits}"
    );
    let mut dec = RangeDecoder::new(&bytes);
    for &s in &syms {
        assert_eq!(dec.decode_symbol_q15(&cdf.f), s);
    }

    // Multiply-free freq path on a skewed static 4-ary source
    // (0.7, 0.2, 0.08, 0.02): overhead in [0%, 2%].
    let counts = [7000u32, 2000, 800, 200];
    let freq_total: u32 = counts.iter().sum();
    let freq_syms: Vec<usize> = (0..n)
        .map(|_| {
            let u = rng.gen_range(0..freq_total);
            let mut acc = 0;
            counts
                .iter()
                .position(|&c| {
                    acc += c;
                    u < acc
                })
                .unwrap()
        })
        .collect();
    let freq_ideal: f64 = freq_syms
        .iter()
        .map(|&s| -((counts[s] as f64) / freq_total as f64).log2())
        .sum();
    let mut enc = RangeEncoder::new();
    for &s in &freq_syms {
        enc.encode_symbol_freq(s, &counts);
    }
    let freq_bytes = enc.finish();
    let freq_bits = freq_bytes.len() as f64 * 8.0;
    let overhead = freq_bits / freq_ideal - 1.0;
    assert!(
        (0.0..=0.02).contains(&overhead),
        "freq-path overhead {:.4}% outside [0%, 2%]",
        overhead * 100.0
    );
    let mut dec = RangeDecoder::new(&freq_bytes);
    for &s in &freq_syms {
        assert_eq!(dec.decode_symbol_freq(&counts), s);
    }

    // Update-rule invariants over 10^5 random (cdf, j, r) triples.
    for _ in 0..100_000 {
        let m = rng.gen_range(2..=16usize);
        let exp = rng.gen_range((usize::BITS - (m - 1).leading_zeros()).max(1)..=15);
        let t = 1u32 << exp;
        let mut picks = rand::seq::index::sample(&mut rng, (t - 1) as usize, m - 1)
            .into_iter()
            .map(|v| v as u32 + 1)
            .collect::<Vec<_>>();
        picks.sort_unstable();
        picks.push(t);
        let mut cdf = Cdf15 { f: picks };
        assert!(cdf.is_valid());
        let j = rng.gen_range(0..m);
        let r = rng.gen_range(1..=7u32);
        cdf_adapt_dyadic(&mut cdf, j, r);
        assert_eq!(cdf.total(), t, "total changed");
        assert!(cdf.f[0] >= 1, "first gap vanished");
        assert!(cdf.f.windows(2).all(|w| w[1] > w[0]), "gap below 1: {:?}", cdf.f);
    }

    // The two worked adaptation examples at rate 2^2.
    let mut cdf = Cdf15 { f: vec![4, 8, 12, 16] };
    cdf_adapt_dyadic(&mut cdf, 0, 2);
    assert_eq!(cdf.f, vec![7, 10, 13, 16]);
    let mut cdf = Cdf15 { f: vec![4, 8, 12, 16] };
    cdf_adapt_dyadic(&mut cdf, 3, 2);
    assert_eq!(cdf.f, vec![3, 6, 9, 16]);

    pass(4, "q15 within 0.01%+64 bits, freq path within [0%,2%], 10^5-triple fuzz, worked examples");
}

// --------------------------------------------------------- criterion 5 --

/// All integer vectors of dimension `n` with L1 norm exactly `k`.
fn enumerate_shell(n: usize, k: usize) -> Vec<Vec<i32>> {
    fn rec(n: usize, k: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if n == 1 {
            for v in [k, -k] {
                cur.push(v);
                out.push(cur.clone());
                cur.pop();
                if k == 0 {
                    break;
                }
            }
            return;
        }
        for mag in 0..=k {
            for v in [mag, -mag] {
                cur.push(v);
                rec(n - 1, k - mag, cur, out);
                cur.pop();
                if mag == 0 {
                    break;
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(n, k as i32, &mut Vec::new(), &mut out);
    out
}

fn cosine(x: &[f64], y: &[i32]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, &b)| a * b as f64).sum();
    let ny: f64 = y.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    if ny == 0.0 {
        f64::NEG_INFINITY
    } else {
        dot / ny
    }
}

#[test]
fn criterion_05_pvq_shape_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for n in 1..=4usize {
        for k in 1..=5usize {
            let shell = enumerate_shell(n, k);
            for case in 0..200 {
                let x: Vec<f64> = loop {
                    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
                    if v.iter().map(|a| a * a).sum::<f64>() > 1e-6 {
                        break v;
                    }
                };
                let y = pvq_quantize_shape(&x, k);
                assert_eq!(y.iter().map(|v| v.unsigned_abs() as usize).sum::<usize>(), k);
                let got = cosine(&x, &y);
                let best =
                    shell.iter().map(|c| cosine(&x, c)).fold(f64::NEG_INFINITY, f64::max);
                assert!(
                    got >= best - 1e-12,
                    "n={n} k={k} case {case}: cos {got} below exhaustive best {best} (y={y:?})"
                );
            }
        }
    }
    for n in 1..=5usize {
        for k in 0..=6usize {
            assert_eq!(
                pvq_count(n, k),
                BigUint::from(enumerate_shell(n, k).len()),
                "V({n},{k})"
            );
        }
    }
    pass(5, "shape quantizer matches exhaustive codebook argmin; V(n,k) matches enumeration");
}

// --------------------------------------------------------- criterion 6 --

#[test]
fn criterion_06_checkerboard_prediction_savings() {
    // 512x512 checkerboard of 64-pixel squares at a mid quantizer (qp 24,
    // Q ~ 4): DC hierarchy + AC copy must cut bits to at most 70% of the
    // both-disabled encode.
    let w = 512;
    let samples: Vec<i32> = (0..w * w)
        .map(|i| if ((i % w) / 64 + (i / w) / 64) % 2 == 0 { 40 } else { 216 })
        .collect();
    let frame = Frame::mono(PixelPlane::new(w, w, 8, samples).unwrap());
    let bits = |haar: bool, ac: bool| {
        let tools = Tools { haar_dc: haar, ac_copy: ac, ..Tools::default() };
        let cfg = EncoderConfig { tools, rate: RateMode::ConstantQp(24) };
        encode(std::slice::from_ref(&frame), &cfg).unwrap().frame_bits[0]
    };
    let on = bits(true, true);
    let off = bits(false, false);
    assert!(
        (on as f64) <= 0.70 * off as f64,
        "prediction on: {on} bits, off: {off} bits, ratio {:.3}",
        on as f64 / off as f64
    );
    pass(6, "checkerboard bits with DC+AC prediction <= 70% of prediction-off bits");
}

// --------------------------------------------------------- criterion 7 --

fn synthetic_corpus_images(count: usize, seed: u64) -> Vec<(Vec<f64>, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (64usize, 64usize);
    (0..count)
        .map(|_| {
            let waves: Vec<(f64, f64, f64, f64)> = (0..4)
                .map(|_| {
                    (
                        rng.gen_range(5.0..40.0),
                        rng.gen_range(0.02..0.35),
                        rng.gen_range(0.02..0.35),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            let (gx, gy) = (rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
            let mut img = vec![0.0; w * h];
            for y in 0..h {
                for x in 0..w {
                    let mut v = 128.0 + gx * x as f64 + gy * y as f64;
                    for &(a, fx, fy, ph) in &waves {
                        v += a * (fx * x as f64 + fy * y as f64 + ph).cos();
                    }
                    img[y * w + x] = v + rng.gen_range(-1.0..1.0);
                }
            }
            (img, w, h)
        })
        .collect()
}

#[test]
fn criterion_07_fdip_trainer() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    // Defining identity of the frequency-domain predictor:
    // F . T_c(x) == T_b(E . x) within 1e-9, for random spatial E.
    let t_b = block_dct_operator();
    let t_c = context_dct_operator();
    for _ in 0..20 {
        let e = DMatrix::from_fn(BLK_DIM, CTX_DIM, |_, _| rng.gen_range(-1.0..1.0));
        let f = derive_f_dct(&e);
        let x = DVector::from_fn(CTX_DIM, |_, _| rng.gen_range(-100.0..100.0));
        let err = (&f * (&t_c * &x) - &t_b * (&e * &x)).amax();
        assert!(err <= 1e-9, "identity residual {err}");
    }

    // Planted-model recovery within the noise scale.
    let mut planted = DMatrix::zeros(BLK_DIM, CTX_DIM);
    for i in 0..BLK_DIM {
        for _ in 0..6 {
            let j = rng.gen_range(0..CTX_DIM);
            planted[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    let noise = 0.01;
    let mut stats = ModeStats::new();
    for _ in 0..4000 {
        let ctx = DVector::from_fn(CTX_DIM, |_, _| rng.gen_range(-10.0..10.0));
        let blk =
            &planted * &ctx + DVector::from_fn(BLK_DIM, |_, _| rng.gen_range(-noise..noise));
        stats.add(&Sample { ctx, blk });
    }
    let recovered = train_mode(&stats).unwrap();
    let err = (&recovered - &planted).amax();
    assert!(err < 5.0 * noise, "planted recovery error {err} exceeds noise scale");

    // On a fixed 20-image corpus, gain-impact sparsification must finish
    // within 0.05 dB of (or above) the magnitude strategy.
    let corpus = TrainingCorpus::from_images(&synthetic_corpus_images(20, 777)).unwrap();
    let train = |strategy| {
        train_predictors(&corpus, TrainOptions { iters: 8, budget: 4, strategy })
            .unwrap()
            .report
            .prediction_gain_db
    };
    let pg_gain_impact = train(SparsifyStrategy::GainImpact);
    let pg_magnitude = train(SparsifyStrategy::Magnitude);
    assert!(
        pg_gain_impact >= pg_magnitude - 0.05,
        "gain-impact {pg_gain_impact:.3} dB vs magnitude {pg_magnitude:.3} dB"
    );

    // AR(1) rho=0.95, 8-point DCT: coding gain 8.83 +- 0.1 dB against the
    // closed-form covariance.
    let n = 8;
    let rho: f64 = 0.95;
    let d = dct_matrix(n);
    let mut var = vec![0.0; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                var[k] += d[k * n + i] * rho.powi((i as i32 - j as i32).abs()) * d[k * n + j];
            }
        }
    }
    let (cg, _) = coding_gain_db(&var);
    assert!((cg - 8.83).abs() < 0.1, "AR(1) coding gain {cg:.3} dB");

    pass(7, "derive identity <= 1e-9, planted recovery, gain-impact >= magnitude - 0.05 dB, C_g 8.83");
}

// --------------------------------------------------------- criterion 8 --

#[test]
fn criterion_08_rate_control() {
    let scales = [40_000.0, 8_000.0, 4_000.0, 2_000.0];
    let alpha = [1.5, 1.0, 1.0, 1.0];
    let mut cfg = RcConfig::new(3000.0, 30);
    cfg.alpha = alpha;
    let types = gop_types("KPPBPPBPPGPPBPPB", 1000).unwrap();

    // One-pass long-run rate within +-2% of target over 1000 frames.
    let mut enc = SyntheticEncoder::new(scales, alpha, 808);
    let one = simulate_one_pass(cfg.clone(), &types, &mut enc).unwrap();
    assert!(one.rate_error().abs() < 0.02, "one-pass error {:.3}%", one.rate_error() * 100.0);

    // Two-pass within +-0.5% and no worse than one-pass, on a 500-frame
    // sequence measured first.
    let types2 = gop_types("KPPBPPBP", 500).unwrap();
    let mut enc1 = SyntheticEncoder::new(scales, alpha, 7);
    let one2 = simulate_one_pass(cfg.clone(), &types2, &mut enc1).unwrap();
    let mut enc_fp = SyntheticEncoder::new(scales, alpha, 7);
    let log = run_first_pass(cfg.clone(), &types2, &mut enc_fp, 0).unwrap();
    let mut enc2 = SyntheticEncoder::new(scales, alpha, 7);
    let two = simulate_two_pass(cfg.clone(), log.clone(), &mut enc2).unwrap();
    assert!(two.rate_error().abs() < 0.005, "two-pass error {:.3}%", two.rate_error() * 100.0);
    assert!(
        two.rate_error().abs() <= one2.rate_error().abs() + 1e-9,
        "two-pass {:.4} worse than one-pass {:.4}",
        two.rate_error(),
        one2.rate_error()
    );

    // Chunked first pass merges into a log whose second pass picks the
    // identical quantizer sequence.
    let chunks: Vec<TwoPassLog> = (0..5)
        .map(|c| {
            let mut e = SyntheticEncoder::new(scales, alpha, 7);
            let mut l =
                run_first_pass(cfg.clone(), &types2[c * 100..(c + 1) * 100], &mut e, 0).unwrap();
            l.start_frame = (c * 100) as u64;
            l
        })
        .collect();
    let merged = chunk_merge(&chunks).unwrap();
    let mut ea = SyntheticEncoder::new(scales, alpha, 11);
    let mut eb = SyntheticEncoder::new(scales, alpha, 11);
    let ra = simulate_two_pass(cfg.clone(), merged, &mut ea).unwrap();
    let rb = simulate_two_pass(cfg, log, &mut eb).unwrap();
    assert_eq!(ra.qps, rb.qps, "chunked and monolithic two-pass quantizers differ");

    // Bessel step response with the model's settling target (half the
    // 30-frame buffer interval): unity DC gain, overshoot <= 5%, 99%
    // settled within 15 updates.
    let mut f = BesselFilter2::new(15.0);
    f.update(0.0);
    let mut peak = f64::MIN;
    let mut settled_at = None;
    let mut last = 0.0;
    for n in 1..500u32 {
        last = f.update(1.0);
        peak = peak.max(last);
        if settled_at.is_none() && (last - 1.0).abs() <= 0.01 {
            settled_at = Some(n);
        }
    }
    assert!((last - 1.0).abs() < 1e-6, "DC gain {last}");
    assert!(peak <= 1.05, "overshoot {:.2}%", (peak - 1.0) * 100.0);
    assert!(settled_at.unwrap() <= 15, "settled at {:?} > 15 updates", settled_at);

    pass(8, "one-pass +-2%, two-pass +-0.5% and <= one-pass, chunked == monolithic, Bessel step ok");
}

// --------------------------------------------------------- criterion 9 --

/// Brute-force direction oracle: least residual energy around per-line
/// means, ties to the lowest direction index.
fn direction_oracle(block: &[i32]) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for dir in 0..NUM_DIRECTIONS {
        let mut sum = [0.0f64; 16];
        let mut cnt = [0u32; 16];
        for i in 0..DIR_BLOCK {
            for j in 0..DIR_BLOCK {
                let l = dtk::dering::direction::line_of(dir, i, j);
                sum[l] += block[i * DIR_BLOCK + j] as f64;
                cnt[l] += 1;
            }
        }
        let mut cost = 0.0;
        for i in 0..DIR_BLOCK {
            for j in 0..DIR_BLOCK {
                let l = dtk::dering::direction::line_of(dir, i, j);
                let d = block[i * DIR_BLOCK + j] as f64 - sum[l] / cnt[l] as f64;
                cost += d * d;
            }
        }
        if cost + 1e-9 < best_cost {
            best = dir;
            best_cost = cost;
        }
    }
    best
}

#[test]
fn criterion_09_dering() {
    // Exact no-ops on constant blocks, every direction and strength.
    for value in [0, 77, 255] {
        let block = vec![value; 64];
        for s in [1u8, 2, 4] {
            for dir in 0..NUM_DIRECTIONS {
                assert_eq!(dering_block(&block, dir, s), block);
            }
            assert_eq!(clpf_block(&block, 8, 8, s), block);
        }
    }

    // Direction search matches the brute-force oracle on 500 random blocks.
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for case in 0..500 {
        // Oriented pattern plus noise so a direction genuinely dominates.
        let dir_true = rng.gen_range(0..NUM_DIRECTIONS);
        let amp = rng.gen_range(10..80);
        let block: Vec<i32> = (0..64)
            .map(|p| {
                let (i, j) = (p / 8, p % 8);
                let line = dtk::dering::direction::line_of(dir_true, i, j) as i32;
                128 + amp * (line % 3 - 1) + rng.gen_range(-6..=6)
            })
            .collect();
        assert_eq!(find_direction(&block), direction_oracle(&block), "case {case}");
    }

    // Synthetic ringing next to a step edge: directional filtering reduces
    // MSE against the clean source for at least one strength.
    let clean: Vec<i32> = (0..64).map(|p| if p % 8 < 4 { 60 } else { 180 }).collect();
    let ring: [i32; 8] = [2, -5, 9, -14, 13, -8, 4, -2];
    let noisy: Vec<i32> = (0..64)
        .map(|p| clean[p] + ring[p % 8] * if (p / 8) % 2 == 0 { 1 } else { -1 })
        .collect();
    let mse = |a: &[i32], b: &[i32]| {
        a.iter().zip(b).map(|(x, y)| ((x - y) * (x - y)) as f64).sum::<f64>() / 64.0
    };
    let before = mse(&noisy, &clean);
    let dir = find_direction(&noisy);
    let improved =
        (1..=3u8).any(|s| mse(&dering_block(&noisy, dir, s), &clean) < before);
    assert!(improved, "no strength reduced ringing MSE (before {before})");

    pass(9, "no-op on constants, direction matches oracle on 500 blocks, ringing MSE reduced");
}

// -------------------------------------------------------- criterion 10 --

fn tool_matrix() -> Vec<Tools> {
    let mut combos = Vec::new();
    for bits in 0..16u8 {
        combos.push(Tools {
            lapping: bits & 1 != 0,
            haar_dc: bits & 2 != 0,
            ac_copy: bits & 4 != 0,
            cfl: bits & 8 != 0,
            dering: None,
        });
    }
    for order in [
        PipelineOrder::Dd,
        PipelineOrder::Clpf,
        PipelineOrder::ClpfThenDd,
        PipelineOrder::DdThenClpf,
    ] {
        combos.push(Tools { dering: Some(order), ..Tools::default() });
    }
    combos
}

fn test_frame(idx: usize, rng: &mut ChaCha8Rng) -> Frame {
    let plane = |w: usize, h: usize, rng: &mut ChaCha8Rng| {
        let waves: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| {
                (
                    rng.gen_range(0.01..0.25),
                    rng.gen_range(0.01..0.25),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    rng.gen_range(8.0..45.0),
                )
            })
            .collect();
        let edge = rng.gen_range(0..w);
        let samples = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let mut v = 128.0 + if (i % w) > edge { 40.0 } else { 0.0 };
                for &(fx, fy, ph, a) in &waves {
                    v += a * (fx * x + fy * y + ph).cos();
                }
                (v + rng.gen_range(-3.0..3.0)).round().clamp(0.0, 255.0) as i32
            })
            .collect();
        PixelPlane::new(w, h, 8, samples).unwrap()
    };
    // Two 4:2:0 frames and eight mono frames of assorted sizes, including
    // non-multiples of the superblock.
    match idx {
        0 | 1 => {
            let y = plane(64, 64, rng);
            let u = plane(32, 32, rng);
            let v = plane(32, 32, rng);
            Frame { y, chroma: Some((u, v)) }
        }
        2 => Frame::mono(plane(70, 42, rng)),
        3 => Frame::mono(plane(96, 64, rng)),
        _ => Frame::mono(plane(64, 64, rng)),
    }
}

#[test]
fn criterion_10_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let images: Vec<Frame> = (0..10).map(|i| test_frame(i, &mut rng)).collect();
    let qps = [24u8, 36, 48, 60];
    let combos = tool_matrix();

    for (i, frame) in images.iter().enumerate() {
        let mut last_psnr = f64::INFINITY;
        for (q, &qp) in qps.iter().enumerate() {
            // Every tool combination is exercised twice across the
            // 10-image x 4-qp grid.
            let tools = combos[(i * qps.len() + q) % combos.len()].clone();
            for t in [tools, Tools::default()] {
                let cfg = EncoderConfig { tools: t.clone(), rate: RateMode::ConstantQp(qp) };
                let out = encode(std::slice::from_ref(frame), &cfg).unwrap();
                let decoded = decode(&out.bitstream).unwrap();
                assert_eq!(decoded.len(), 1);
                assert_eq!(decoded[0].y, out.recons[0].y, "image {i} qp {qp} tools {t:?}");
                assert_eq!(decoded[0].chroma, out.recons[0].chroma, "image {i} qp {qp}");
                if t == Tools::default() {
                    // PSNR monotone non-increasing as qp rises.
                    let p = psnr(&frame.y, &out.recons[0].y);
                    assert!(
                        p <= last_psnr + 1e-9,
                        "image {i}: PSNR {p} above {last_psnr} at higher qp {qp}"
                    );
                    last_psnr = p;
                }
            }
        }
    }
    pass(10, "decode == encoder recon bit-exactly over the tool matrix; PSNR monotone in qp");
}
