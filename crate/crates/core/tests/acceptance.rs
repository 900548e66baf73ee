//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ksflow::ckks::{
    decrypt, encrypt, hmul, keygen, keyswitch, keyswitch_error, CkksParams, Encoder, KeySource, NoiseBounds,
    ParamShape,
};
use ksflow::dataflow::{
    expected_launches, footprint, verify_equivalence, verify_equivalence_on, DataflowKind, ExecutionTrace,
    FaultInjection, KernelCosts, ScheduleSpec,
};
use ksflow::harness::{run_sweep, run_verify, to_csv, to_markdown, Config, VerifyConfig};
use ksflow::model::{predict_time, select_best, GpuSpec, ModelInputs};
use ksflow::rns::arith::is_prime;
use ksflow::rns::oracle::{crt_reconstruct, dft_oracle, schoolbook_negacyclic};
use ksflow::rns::{generate_prime_chain, BaseConverter, Domain, PrimeModulus, PrimeRole, RnsBasis, RnsPolynomial};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("{what} took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn basis_of(qs: &[u64], n: usize) -> RnsBasis {
    let primes = qs.iter().map(|&q| Arc::new(PrimeModulus::new(q, n).unwrap())).collect();
    RnsBasis::uniform(primes, PrimeRole::Ciphertext).unwrap()
}

fn c1_ntt_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut checked = 0;
    for log_n in 2..=8 {
        let n = 1usize << log_n;
        let m = generate_prime_chain(40, 1, n).map_err(|e| e.to_string())?.remove(0);
        for _ in 0..1000 {
            let a: Vec<u64> = (0..n).map(|_| rng.random_range(0..m.value())).collect();
            let mut fwd = a.clone();
            m.forward(&mut fwd);
            ensure(fwd == dft_oracle(&a, &m).unwrap(), || format!("ntt differs from the direct transform at N={n}"))?;
            m.inverse(&mut fwd);
            ensure(fwd == a, || format!("intt(ntt(a)) != a at N={n}"))?;
            checked += 1;
        }
    }
    within(start.elapsed(), 10.0, "NTT oracle")?;
    Ok(format!("{checked} inputs over N=4..256 in {:.2} s", start.elapsed().as_secs_f64()))
}

fn c2_ring() -> Outcome {
    let toy = RnsBasis::uniform(vec![Arc::new(PrimeModulus::with_root(17, 4, 2).unwrap())], PrimeRole::Ciphertext)
        .unwrap();
    let a = RnsPolynomial::from_rows(&toy, vec![vec![1, 1, 0, 0]], Domain::Coefficient).unwrap().ntt().unwrap();
    let sq = a.mul(&a).unwrap().intt().unwrap();
    ensure(sq.row(0) == [1, 2, 1, 0], || format!("(1+x)^2 gave {:?}", sq.row(0)))?;
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut cases = 0;
    for log_n in 0..=6 {
        let n = 1usize << log_n;
        let m = generate_prime_chain(30, 1, n).unwrap().remove(0);
        let q = m.value();
        let b = RnsBasis::uniform(vec![Arc::new(m)], PrimeRole::Ciphertext).unwrap();
        for _ in 0..50 {
            let x: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
            let y: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
            let px = RnsPolynomial::from_rows(&b, vec![x.clone()], Domain::Coefficient).unwrap().ntt().unwrap();
            let py = RnsPolynomial::from_rows(&b, vec![y.clone()], Domain::Coefficient).unwrap().ntt().unwrap();
            let prod = px.mul(&py).unwrap().intt().unwrap();
            ensure(prod.row(0) == schoolbook_negacyclic(&x, &y, q), || format!("convolution mismatch at N={n}"))?;
            cases += 1;
        }
    }
    Ok(format!("(1+x)^2 = 1+2x+x^2 mod (x^4+1, 17); {cases} random products for N=1..64"))
}

/// `Σ_i [x_i·(Q/q_i)^{-1}]_{q_i}·(Q/q_i)` over the integers, which is what
/// the approximate conversion reduces modulo each target prime.
fn approximate_lift(x: u128, src: &[u64]) -> u128 {
    let q: u128 = src.iter().map(|&p| p as u128).product();
    src.iter()
        .map(|&qi| {
            let hat = q / qi as u128;
            let hat_inv = (1..qi).find(|&h| (hat % qi as u128) * h as u128 % qi as u128 == 1).unwrap();
            (x % qi as u128) * hat_inv as u128 % qi as u128 * hat
        })
        .sum()
}

fn check_bconv(src: &[u64], tgt: &[u64], xs: &[u64]) -> Result<(), String> {
    let conv = BaseConverter::new(&basis_of(src, 1), &basis_of(tgt, 1)).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<u64>> = src.iter().map(|&q| xs.iter().map(|&x| x % q).collect()).collect();
    let scaled = conv.scale_inputs(&rows);
    let q: u128 = src.iter().map(|&p| p as u128).product();
    for (j, &p) in tgt.iter().enumerate() {
        let out = conv.convert_row(&scaled, j);
        for (k, &x) in xs.iter().enumerate() {
            let residues: Vec<u64> = src.iter().map(|&qi| x % qi).collect();
            let exact = crt_reconstruct(&residues, src);
            let lifted = approximate_lift(exact, src);
            let e = (lifted - exact) / q;
            ensure(lifted == exact + e * q && e < src.len() as u128, || format!("{src:?}: e = {e} for x = {x}"))?;
            ensure(out[k] as u128 == lifted % p as u128, || format!("{src:?} -> {p}: x = {x} gave {}", out[k]))?;
        }
    }
    Ok(())
}

fn c3_bconv_bound() -> Outcome {
    let pair = basis_of(&[17, 13], 1);
    let v = RnsPolynomial::from_rows(&pair, vec![vec![15], vec![9]], Domain::Coefficient).unwrap();
    let out = ksflow::rns::bconv(&v, &basis_of(&[11], 1)).unwrap();
    ensure(out.row(0) == [2], || format!("{{17,13}} -> {{11}} gave {:?}", out.row(0)))?;

    let primes: Vec<u64> = (3..1024).filter(|&p| is_prime(p)).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    // Every single prime exhaustively, targets chosen outside the source.
    for &p in &primes {
        let tgt: Vec<u64> = primes.iter().rev().copied().filter(|&t| t != p).take(2).collect();
        let xs: Vec<u64> = (0..p).collect();
        check_bconv(&[p], &tgt, &xs)?;
    }
    let mut bases = 0;
    for k in 2..=3 {
        for _ in 0..400 {
            let mut src = Vec::new();
            while src.len() < k {
                let p = primes[rng.random_range(0..primes.len())];
                if !src.contains(&p) {
                    src.push(p);
                }
            }
            let q: u64 = src.iter().product();
            let tgt: Vec<u64> = primes.iter().copied().filter(|t| !src.contains(t)).take(3).collect();
            let mut xs: Vec<u64> = (0..128).map(|_| rng.random_range(0..q)).collect();
            xs.extend([0, 1, q - 1]);
            check_bconv(&src, &tgt, &xs)?;
            bases += 1;
        }
    }
    Ok(format!("{{17,13}} -> {{11}} = 2; {} single primes exhaustive; {bases} random 2/3-prime bases", primes.len()))
}

fn c4_keyswitch_identity() -> Outcome {
    let params = CkksParams::builder(1 << 10, 6, 3).build().map_err(|e| e.to_string())?;
    let (sk, evk) = keygen(&params, 4).unwrap();
    let basis = params.level_basis(6).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let bound = NoiseBounds::default().keyswitch;
    let mut worst = 0;
    for _ in 0..100 {
        let rows = basis.moduli().iter().map(|&q| (0..params.n()).map(|_| rng.random_range(0..q)).collect()).collect();
        let d = RnsPolynomial::from_rows(&basis, rows, Domain::Ntt).unwrap();
        let (out, _) = keyswitch(&params, &d, &evk, ScheduleSpec::dsob()).unwrap();
        worst = worst.max(keyswitch_error(&sk, KeySource::Square, &d, &out).unwrap());
    }
    ensure(worst < bound, || format!("keyswitch error {worst} >= {bound}"))?;

    let params = CkksParams::builder(1 << 12, 3, 2).scale_bits(40).build().map_err(|e| e.to_string())?;
    let (sk, evk) = keygen(&params, 6).unwrap();
    let enc = Encoder::new(params.n());
    let slots = params.slots();
    let u: Vec<Complex64> = (0..slots).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let v: Vec<Complex64> = (0..slots).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let cu = encrypt(&params, &enc.encode(&params, &u, 3, params.scale()).unwrap(), &sk, &mut rng).unwrap();
    let cv = encrypt(&params, &enc.encode(&params, &v, 3, params.scale()).unwrap(), &sk, &mut rng).unwrap();
    let prod = hmul(&params, &cu, &cv, &evk, ScheduleSpec::dpoc(2).unwrap()).unwrap();
    let got = enc.decode(&decrypt(&prod, &sk).unwrap()).unwrap();
    let expect: Vec<Complex64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
    let err = got.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let norm = expect.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rel = err / norm;
    ensure(rel < 2f64.powi(-10), || format!("hmul relative error {rel:e}"))?;
    Ok(format!("max KS error {worst} < {bound} over 100 inputs; hmul at N=2^12 relative error {rel:.2e}"))
}

fn c5_equivalence() -> Outcome {
    let start = Instant::now();
    let params = CkksParams::builder(1 << 10, 6, 3).build().map_err(|e| e.to_string())?;
    let report = verify_equivalence(&params, 100, 7).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.all_equal(), || format!("mismatch: {:?}", report.first_mismatch))?;
    ensure(report.schedules.len() == 8, || "expected DSOB, DPOB and OC at c = 2, 3, 10".into())?;
    within(elapsed, 60.0, "equivalence")?;

    // A single corrupted residue must be reported at exactly that spot.
    let (_, evk) = keygen(&params, 7).unwrap();
    let basis = params.level_basis(6).unwrap();
    let d = RnsPolynomial::zero(&basis, Domain::Ntt);
    let fault = FaultInjection { schedule: ScheduleSpec::dsoc(3).unwrap(), trial: 0, component: 1, row: 4, coeff: 77 };
    let bad = verify_equivalence_on(&params, &evk, &[d], Some(fault)).unwrap();
    let m = bad.first_mismatch.ok_or("fault was not detected")?;
    ensure((m.schedule, m.component, m.row, m.coeff) == (fault.schedule, 1, 4, 77), || format!("mislocated: {m:?}"))?;
    Ok(format!("8 schedules bit-identical over 100 trials in {:.1} s; injected fault localized", elapsed.as_secs_f64()))
}

fn c6_footprint() -> Outcome {
    let small = ParamShape::new(1 << 15, 10, 2).unwrap();
    let large = ParamShape::new(1 << 16, 50, 4).unwrap();
    let a = footprint(&small, ScheduleSpec::dpob(), 10);
    let b = footprint(&large, ScheduleSpec::dpob(), 50);
    ensure(a == 5_242_880, || format!("DPOB (2, 2^15, 10) = {a}"))?;
    ensure(b == 104_857_600, || format!("DPOB (4, 2^16, 50) = {b}"))?;
    for shape in [small, large] {
        let l = shape.max_level;
        for c in 2..=10 {
            for (oc, ob) in [(ScheduleSpec::dsoc(c).unwrap(), ScheduleSpec::dsob()), (ScheduleSpec::dpoc(c).unwrap(), ScheduleSpec::dpob())] {
                let (fc, fb) = (footprint(&shape, oc, l), footprint(&shape, ob, l));
                ensure(fc == fb.div_ceil(c as u64).div_ceil(8) * 8, || format!("{oc}: {fc} is not {fb} / {c}"))?;
            }
        }
    }
    Ok(format!("DPOB footprints {a} and {b} bytes; OC footprints divide by chunks"))
}

fn c7_trace() -> Outcome {
    let costs = KernelCosts::default();
    let mut shapes = 0;
    for (n, l) in [(1 << 14, 10), (1 << 16, 30), (1 << 17, 50)] {
        for dnum in [1, 2, 3, 4, 6, 8] {
            let shape = ParamShape::new(n, l, dnum).unwrap();
            let mut insts = None;
            for spec in ScheduleSpec::all() {
                let trace = ExecutionTrace::symbolic(&shape, l, spec, &costs);
                let (d, c) = (dnum, spec.chunks());
                let closed = match spec.kind() {
                    DataflowKind::Dsob => 4 * d + 3,
                    DataflowKind::Dpob => 7,
                    DataflowKind::Dsoc => d * (1 + 3 * c) + 1 + 2 * c,
                    DataflowKind::Dpoc => 2 + 5 * c,
                };
                ensure(trace.launches.len() == closed && expected_launches(spec, dnum) == closed, || {
                    format!("{spec} at dnum={dnum}: {} launches, expected {closed}", trace.launches.len())
                })?;
                let total = trace.stats().total_warp_insts;
                ensure(*insts.get_or_insert(total) == total, || format!("{spec}: warp instructions {total} differ"))?;
            }
            shapes += 1;
        }
    }
    Ok(format!("closed-form launch counts and equal warp instructions on {shapes} shapes x 20 schedules"))
}

fn c8_model_identities() -> Outcome {
    let mut checked = 0;
    for gpu in GpuSpec::presets() {
        let inputs = ModelInputs::new(gpu);
        for (n, l, d) in [(1 << 14, 10, 2), (1 << 16, 30, 4), (1 << 17, 50, 8)] {
            let shape = ParamShape::new(n, l, d).unwrap();
            let mut base = None;
            for spec in ScheduleSpec::all() {
                let p = predict_time(&shape, spec, &inputs).map_err(|e| e.to_string())?;
                let b = *base.get_or_insert(p.total.c_base);
                ensure(p.total.c_base == b, || format!("{spec}: c_base {} != {b}", p.total.c_base))?;
                ensure(p.total.c_kernel == p.total.component_sum(), || format!("{spec}: total is not the component sum"))?;
                for (kind, k) in &p.per_kind {
                    ensure(k.c_kernel == k.component_sum(), || format!("{spec} {kind}: row is not its component sum"))?;
                    ensure(k.components().iter().all(|&c| c >= 0.0), || format!("{spec} {kind}: negative component"))?;
                }
                checked += 1;
            }
        }
    }
    let ratio = GpuSpec::a100().l_dram() / GpuSpec::rtx_4090().l_dram();
    ensure((ratio - 0.363).abs() <= 0.01, || format!("A100/RTX4090 f/BW ratio {ratio}"))?;
    Ok(format!("{checked} predictions consistent; A100/RTX4090 f/BW ratio {ratio:.4}"))
}

fn c9_trends() -> Outcome {
    let inputs = ModelInputs::new(GpuSpec::rtx_4090());
    let small = select_best(&ParamShape::new(1 << 15, 10, 2).unwrap(), &inputs).map_err(|e| e.to_string())?;
    ensure(small.best.schedule == ScheduleSpec::dpob(), || format!("(2, 2^15, 10) picked {}", small.best.schedule))?;
    let large = select_best(&ParamShape::new(1 << 16, 50, 4).unwrap(), &inputs).map_err(|e| e.to_string())?;
    ensure(large.best.schedule.kind().is_chunked(), || format!("(4, 2^16, 50) picked {}", large.best.schedule))?;

    let shape = ParamShape::new(1 << 16, 50, 4).unwrap();
    let mut l2 = 512.0 * 1024.0 * 1024.0;
    let mut prev = u64::MAX;
    let mut steps = 0;
    while l2 >= 8.0 * 1024.0 * 1024.0 {
        let mut gpu = GpuSpec::rtx_4090();
        gpu.l2_bytes = l2;
        let sel = select_best(&shape, &ModelInputs::new(gpu)).map_err(|e| e.to_string())?;
        let f = sel.best.footprint_bytes;
        ensure(f <= prev, || format!("winner footprint grew to {f} at L2 = {l2:.0} bytes"))?;
        prev = f;
        l2 /= 1.25;
        steps += 1;
    }

    let start = Instant::now();
    let rows = run_sweep(&Config::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(rows.len() == 44 * 4, || format!("{} rows", rows.len()))?;
    within(elapsed, 10.0, "sweep")?;
    Ok(format!(
        "DPOB at (2, 2^15, 10); {} at (4, 2^16, 50); footprint monotone over {steps} L2 sizes; 176-row sweep in {:.2} s",
        large.best.schedule,
        elapsed.as_secs_f64()
    ))
}

fn c10_determinism() -> Outcome {
    let cfg = Config::default();
    let (a, b) = (run_sweep(&cfg).map_err(|e| e.to_string())?, run_sweep(&cfg).map_err(|e| e.to_string())?);
    ensure(to_csv(&a).unwrap() == to_csv(&b).unwrap(), || "CSV differs between runs".into())?;
    ensure(to_markdown(&a, &cfg) == to_markdown(&b, &cfg), || "markdown differs between runs".into())?;
    let shape = ParamShape::new(1 << 16, 30, 4).unwrap();
    for spec in ScheduleSpec::all() {
        let t1 = ExecutionTrace::symbolic(&shape, 30, spec, &cfg.costs);
        let t2 = ExecutionTrace::symbolic(&shape, 30, spec, &cfg.costs);
        ensure(t1.to_text() == t2.to_text() && t1.to_json() == t2.to_json(), || format!("{spec} trace differs"))?;
    }
    let v = VerifyConfig { n: 256, trials: 3, ntt_samples: 20, ..VerifyConfig::default() };
    let (r1, r2) = (run_verify(&v, 11, false).unwrap(), run_verify(&v, 11, false).unwrap());
    ensure(r1.to_text() == r2.to_text() && r1.to_json() == r2.to_json(), || "verify report differs".into())?;
    Ok("sweep CSV and markdown, 20 traces and the verify report are byte-identical across runs".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("NTT oracle equivalence", c1_ntt_oracle),
        ("ring correctness", c2_ring),
        ("BConv overflow bound", c3_bconv_bound),
        ("KeySwitch identity and HMUL", c4_keyswitch_identity),
        ("four-way schedule equivalence", c5_equivalence),
        ("footprint exactness", c6_footprint),
        ("trace exactness", c7_trace),
        ("model identities", c8_model_identities),
        ("model trends and sweep runtime", c9_trends),
        ("determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}: {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {label} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {label} ({why})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
