//! Acceptance checks, one PASS/FAIL/SKIP line per criterion. Reference values
//! are computed here independently of the library wherever possible.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use qpca_eeg::baseline::compare;
use qpca_eeg::classifier::{cross_validate_with, stratified_folds, svm_fit, ConfusionCounts, CvConfig};
use qpca_eeg::cli::{run, Cli};
use qpca_eeg::connectivity::{distance_report, FitSource, Mode};
use qpca_eeg::dataset::{load_dataset, session_split, synthesize_dataset, SynthSpec};
use qpca_eeg::pipeline::{embed_all, evaluate, labels, FeatureSet, PcChoice, PipelineParams};
use qpca_eeg::qlinalg::{hermitian_transpose, matmul, qsvd};
use qpca_eeg::qpca::{self, project, ChannelQuadruple, PcSelection, Projection};
use qpca_eeg::search::{count, enumerate, run_search};
use qpca_eeg::spectral::{default_bands, segment_bounds, Band, Periodogram};
use qpca_eeg::{Quaternion, QuaternionMatrix};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_quaternion(r: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(r.sample(StandardNormal), r.sample(StandardNormal), r.sample(StandardNormal), r.sample(StandardNormal))
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(rows, cols, |_, _| random_quaternion(r))
}

/// Left-multiplication matrix of `a`, so that `L(a) b` is the product `ab`.
fn left_matrix(a: Quaternion) -> [[f64; 4]; 4] {
    let [w, x, y, z] = a.to_array();
    [[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]]
}

fn oracle_product(a: Quaternion, b: Quaternion) -> Quaternion {
    let l = left_matrix(a);
    let v = b.to_array();
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(l) {
        *o = row.iter().zip(v).map(|(m, x)| m * x).sum();
    }
    Quaternion::from_array(out)
}

fn rel(a: Quaternion, b: Quaternion) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    // i^2 = j^2 = k^2 = ijk = -1, written out as (sign, unit) pairs
    let table: [[(f64, usize); 4]; 4] = [
        [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
        [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
        [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
        [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
    ];
    for (a, row) in table.iter().enumerate() {
        for (b, &(sign, unit)) in row.iter().enumerate() {
            let expected = basis[unit] * sign;
            ensure(basis[a] * basis[b] == expected, || format!("basis product {a}*{b} is {}", basis[a] * basis[b]))?;
        }
    }
    let mut r = rng(1);
    let (mut assoc, mut conj, mut norm, mut oracle) = (0f64, 0f64, 0f64, 0f64);
    for _ in 0..10_000 {
        let (a, b, c) = (random_quaternion(&mut r), random_quaternion(&mut r), random_quaternion(&mut r));
        assoc = assoc.max(rel((a * b) * c, a * (b * c)));
        conj = conj.max(rel((a * b).conj(), b.conj() * a.conj()));
        let (n, m) = ((a * b).norm(), a.norm() * b.norm());
        norm = norm.max((n - m).abs() / m);
        oracle = oracle.max(rel(a * b, oracle_product(a, b)));
    }
    let elapsed = start.elapsed();
    ensure(assoc <= 1e-12 && conj <= 1e-12 && norm <= 1e-12 && oracle <= 1e-12, || {
        format!("worst relative errors: assoc {assoc:.2e}, conj {conj:.2e}, norm {norm:.2e}, product {oracle:.2e}")
    })?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("16 basis products exact; worst rel err {:.1e} over 10000 triples; {elapsed:.0?}", assoc.max(conj).max(norm)))
}

/// Complex adjoint `[[A1, A2], [-conj(A2), conj(A1)]]` with `q = A1 + A2 j`.
fn oracle_adjoint(a: &QuaternionMatrix) -> DMatrix<Complex<f64>> {
    let (m, n) = a.shape();
    DMatrix::from_fn(2 * m, 2 * n, |r, c| {
        let q = a[(r % m, c % n)];
        let a1 = Complex::new(q.w, q.x);
        let a2 = Complex::new(q.y, q.z);
        match (r < m, c < n) {
            (true, true) => a1,
            (true, false) => a2,
            (false, true) => -a2.conj(),
            (false, false) => a1.conj(),
        }
    })
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut r = rng(2);
    let (mut recon, mut unit, mut sv) = (0f64, 0f64, 0f64);
    for _ in 0..200 {
        let (rows, cols) = (r.random_range(2..=32), r.random_range(2..=32));
        let a = random_matrix(&mut r, rows, cols);
        let svd = qsvd(&a).map_err(|e| e.to_string())?;
        recon = recon.max(svd.reconstruct().sub(&a).unwrap().frobenius_norm() / a.frobenius_norm());
        for u in [&svd.u, &svd.v] {
            let k = u.rows();
            let g = matmul(&hermitian_transpose(u), u).unwrap();
            unit = unit.max(g.sub(&QuaternionMatrix::identity(k)).unwrap().frobenius_norm());
        }
        // singular values of the adjoint from eigenvalues of its Gram matrix
        let chi = oracle_adjoint(&a);
        let gram = if rows <= cols { &chi * chi.adjoint() } else { chi.adjoint() * &chi };
        let mut eig: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        let paired: Vec<f64> = eig.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        let smax = paired[0];
        for (got, want) in svd.singular_values.iter().zip(&paired) {
            sv = sv.max((got - want).abs() / smax);
        }
        ensure(svd.singular_values.len() == rows.min(cols), || "wrong singular value count".into())?;
    }
    let elapsed = start.elapsed();
    ensure(recon <= 1e-9 && unit <= 1e-9 && sv <= 1e-9, || {
        format!("reconstruction {recon:.2e}, unitarity {unit:.2e}, singular values {sv:.2e}")
    })?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("200 matrices: recon {recon:.1e}, unitarity {unit:.1e}, sigma vs adjoint {sv:.1e}; {elapsed:.1?}"))
}

fn criterion_3() -> Check {
    let mut p = Periodogram::new();
    let bands = default_bands();
    let mut r = rng(3);
    let mut partition = 0f64;
    for _ in 0..1000 {
        let n = r.random_range(64..=1000);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0) + 0.3 * (0.07 * n as f64).sin()).collect();
        let rp = p.relative_powers(&x, 250.0, &bands).map_err(|e| e.to_string())?;
        partition = partition.max((rp.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(partition <= 1e-9, || format!("partition of unity off by {partition:.2e}"))?;

    let tone: Vec<f64> = (0..250).map(|t| (2.0 * std::f64::consts::PI * 10.0 * t as f64 / 250.0).sin()).collect();
    let alpha = p.relative_powers(&tone, 250.0, &bands).map_err(|e| e.to_string())?[Band::Alpha.index()];
    ensure(alpha >= 0.95, || format!("R_alpha of a 10 Hz tone is {alpha}"))?;

    // 1 Hz bins: 3, 4, 5 and 17 of the 29 bins in [1, 30) Hz
    let expected = [3.0 / 29.0, 4.0 / 29.0, 5.0 / 29.0, 17.0 / 29.0];
    let mut mean = [0.0; 4];
    for _ in 0..1000 {
        let x: Vec<f64> = (0..250).map(|_| r.sample(StandardNormal)).collect();
        let rp = p.relative_powers(&x, 250.0, &bands).map_err(|e| e.to_string())?;
        for (m, v) in mean.iter_mut().zip(rp) {
            *m += v / 1000.0;
        }
    }
    let worst = mean.iter().zip(expected).map(|(m, e)| (m - e).abs()).fold(0.0, f64::max);
    ensure(worst <= 0.03, || format!("white-noise ratios {mean:?} vs {expected:?}"))?;
    Ok(format!("partition err {partition:.1e}; tone R_alpha {alpha:.4}; white-noise max deviation {worst:.4}"))
}

fn criterion_4() -> Check {
    let spec = SynthSpec::default();
    let recordings = synthesize_dataset(&spec, 42).map_err(|e| e.to_string())?;
    let n = recordings[0].n_samples();
    ensure(n == 10_000 && spec.n_samples() == 10_000, || format!("{n} samples for 40 s at 250 Hz"))?;
    let grid = [0.1, 0.2, 0.4, 0.5, 0.8, 1.0, 1.25, 2.0, 2.5, 4.0, 5.0, 10.0];
    let table1 = [400, 200, 100, 80, 50, 40, 32, 20, 16, 10, 8, 4];
    for (ts, want) in grid.iter().zip(table1) {
        let got = segment_bounds(n, 250.0, *ts).map_err(|e| e.to_string())?.len();
        ensure(got == want, || format!("T_s = {ts}: {got} segments, expected {want}"))?;
    }
    let split = session_split(&recordings).map_err(|e| e.to_string())?;
    ensure(recordings.len() == 66 && split.training.len() == 55 && split.testing.len() == 11, || {
        format!("{} recordings split {}/{}", recordings.len(), split.training.len(), split.testing.len())
    })?;
    Ok("10000 samples; 12 segment lengths match; 66 recordings split 55/11".into())
}

fn projector(u: &QuaternionMatrix) -> QuaternionMatrix {
    matmul(u, &hermitian_transpose(u)).unwrap()
}

fn criterion_5() -> Check {
    let mut r = rng(5);
    let (m, n) = (30, 8);
    let rows: Vec<Vec<Quaternion>> = (0..m)
        .map(|i| (0..n).map(|j| random_quaternion(&mut r) * (1.0 + j as f64) + Quaternion::real(0.1 * i as f64)).collect())
        .collect();
    let (_, centered) = qpca::center(&rows).map_err(|e| e.to_string())?;
    let c = qpca::covariance(&centered);
    let herm = c.sub(&hermitian_transpose(&c)).unwrap().frobenius_norm() / c.frobenius_norm();
    ensure(herm <= 1e-12, || format!("Hermitian residual {herm:.2e}"))?;

    let fit = qpca::fit(&rows, PcSelection::Fixed(3)).map_err(|e| e.to_string())?;
    let trace: f64 = (0..n).map(|i| c[(i, i)].w).sum();
    let eig_sum: f64 = fit.eigenvalues.iter().sum();
    let trace_err = (trace - eig_sum).abs() / trace;
    ensure(trace_err <= 1e-9, || format!("trace {trace} vs eigenvalue sum {eig_sum}"))?;

    let p = 3;
    let e = &fit.eigenvalues;
    ensure(e[p - 1] - e[p] > 1e-3 * e[0], || "no spectral gap at p = 3".into())?;
    let base = projector(&qsvd(&c).unwrap().u.leading_columns(p).unwrap());
    let mut proj_err = 0f64;
    for s in [1.0 / m as f64, 0.37, 5.0, 1e3] {
        let scaled = projector(&qsvd(&c.scale(s)).unwrap().u.leading_columns(p).unwrap());
        proj_err = proj_err.max(scaled.sub(&base).unwrap().frobenius_norm());
    }
    ensure(proj_err <= 1e-9, || format!("projector changes by {proj_err:.2e} under rescaling"))?;

    // classical PCA scores of real data
    let real: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|j| r.sample::<f64, _>(StandardNormal) * (n - j) as f64).collect()).collect();
    let mean: Vec<f64> = (0..n).map(|j| real.iter().map(|row| row[j]).sum::<f64>() / m as f64).collect();
    let x = DMatrix::from_fn(m, n, |i, j| real[i][j] - mean[j]);
    let cov = x.transpose() * &x / m as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let q_rows: Vec<Vec<Quaternion>> = real.iter().map(|row| row.iter().map(|&v| Quaternion::real(v)).collect()).collect();
    let q_fit = qpca::fit(&q_rows, PcSelection::Fixed(n)).map_err(|e| e.to_string())?;
    let y = q_fit.transform_all(&q_rows).unwrap();
    let mut mag = 0f64;
    for (j, &k) in order.iter().enumerate() {
        let scores = &x * eig.eigenvectors.column(k);
        for i in 0..m {
            mag = mag.max((y[(i, j)].norm() - scores[i].abs()).abs());
        }
    }
    ensure(mag <= 1e-9, || format!("real-data magnitudes differ from PCA scores by {mag:.2e}"))?;
    Ok(format!(
        "Hermitian {herm:.1e}; trace {trace_err:.1e}; projector {proj_err:.1e}; real-PCA magnitudes {mag:.1e}"
    ))
}

fn criterion_6() -> Check {
    let m = ConfusionCounts { tp: 5, fn_: 0, tn: 5, fp: 1 }.metrics();
    let got = [m.acc.unwrap(), m.sen.unwrap(), m.spe.unwrap()];
    let expected = [90.91, 100.00, 83.33];
    for (g, t) in got.iter().zip(expected) {
        ensure((g - t).abs() <= 0.01, || format!("metrics {got:?} vs expected {expected:?}"))?;
    }
    let mut r = rng(6);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let c = ConfusionCounts {
            tp: r.random_range(0..50),
            fn_: r.random_range(0..50),
            tn: r.random_range(0..50),
            fp: r.random_range(0..50),
        };
        let (p, n) = (c.tp + c.fn_, c.tn + c.fp);
        if p == 0 || n == 0 {
            continue;
        }
        let m = c.metrics();
        let identity = (m.sen.unwrap() * p as f64 + m.spe.unwrap() * n as f64) / (p + n) as f64;
        worst = worst.max((identity - m.acc.unwrap()).abs());
    }
    ensure(worst <= 1e-12, || format!("ACC identity off by {worst:.2e}"))?;
    Ok(format!("(TP,FN,TN,FP) = (5,0,5,1) -> {:.2}/{:.2}/{:.2}; identity within {worst:.1e}", got[0], got[1], got[2]))
}

fn criterion_7() -> Check {
    let names = |n: usize| (0..n).map(|i| format!("c{i}")).collect::<Vec<_>>();
    let m19 = names(19);
    let combos = enumerate(&m19, 4, false).map_err(|e| e.to_string())?.count();
    let trials = enumerate(&m19, 4, true).map_err(|e| e.to_string())?.count();
    ensure(combos == 3876 && trials == 93_024 && count(19, 4, false) == 3876 && count(19, 4, true) == 93_024, || {
        format!("19 channels: {combos} combinations, {trials} trials")
    })?;
    let m8 = names(8);
    let c8 = enumerate(&m8, 4, false).unwrap().count();
    let t8 = enumerate(&m8, 4, true).unwrap().count();
    ensure(c8 == 70 && t8 == 1680, || format!("8 channels: {c8} combinations, {t8} trials"))?;
    Ok("(19,4) -> 3876 / 93024; (8,4) -> 70 / 1680".into())
}

const SEARCH_MONTAGE: [&str; 8] = ["Fp1", "F7", "F8", "T7", "T8", "P4", "Cz", "O1"];

fn criterion_8() -> Check {
    let recordings = synthesize_dataset(&SynthSpec::default(), 42).map_err(|e| e.to_string())?;
    let fs_ = FeatureSet::from_recordings(&recordings, 1.0).map_err(|e| e.to_string())?;
    let params = PipelineParams { segment_seconds: 1.0, projection: Projection::Mean, pcs: PcChoice::SweepUpTo(20), svm_c: 1.0 };
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse().unwrap();
    let best = evaluate(&fs_, &quad, Band::Alpha, &params).map_err(|e| e.to_string())?;
    let acc = best.metrics.acc.unwrap_or(0.0);
    ensure(acc >= 90.0, || format!("{quad} reaches only {acc:.2}%"))?;

    let report = distance_report(&fs_, quad.channels(), Mode::Quadruple, FitSource::Training).map_err(|e| e.to_string())?;
    let alpha = report.dist(Band::Alpha).unwrap();
    let others = [Band::Delta, Band::Theta, Band::Beta].map(|b| report.dist(b).unwrap());
    ensure(others.iter().all(|&d| alpha > d), || format!("alpha Dist {alpha:.4} vs others {others:?}"))?;

    let mut gaps = Vec::new();
    for seed in [42u64, 1, 2, 3, 4] {
        let fs_seed = if seed == 42 {
            fs_.clone()
        } else {
            let recs = synthesize_dataset(&SynthSpec::default(), seed).map_err(|e| e.to_string())?;
            FeatureSet::from_recordings(&recs, 1.0).map_err(|e| e.to_string())?
        };
        let c = compare(&fs_seed, &quad, Band::Alpha, &params).map_err(|e| e.to_string())?;
        gaps.push((c.qpca.metrics.acc.unwrap_or(0.0), c.real_pca.metrics.acc.unwrap_or(0.0)));
    }
    let q_mean = gaps.iter().map(|g| g.0).sum::<f64>() / gaps.len() as f64;
    let r_mean = gaps.iter().map(|g| g.1).sum::<f64>() / gaps.len() as f64;
    ensure(q_mean >= r_mean - 5.0, || format!("QPCA {q_mean:.2}% vs real PCA {r_mean:.2}% over 5 seeds"))?;

    let montage: Vec<String> = SEARCH_MONTAGE.iter().map(|s| s.to_string()).collect();
    let threads = std::thread::available_parallelism().map_or(1, usize::from);
    let start = Instant::now();
    let search = run_search(&fs_, &montage, Band::Alpha, &params, threads).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(search.trials.len() == 1680, || format!("{} trials", search.trials.len()))?;
    ensure(elapsed < Duration::from_secs(300), || format!("8-channel search took {elapsed:?}"))?;
    let order_matters = search
        .trials
        .chunks(24)
        .filter(|g| g.iter().any(|t| t.acc != g[0].acc))
        .count();
    Ok(format!(
        "{quad} alpha acc {acc:.2}% (p = {}); Dist alpha {alpha:.4} > {others:.4?}; QPCA {q_mean:.2}% vs real PCA {r_mean:.2}% (5 seeds); \
         1680-trial search in {elapsed:.1?} on {threads} thread(s), {} invalid, {order_matters}/70 combinations order-sensitive",
        best.p_used,
        search.invalid_count()
    ))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let argv = std::iter::once("qpca").chain(args.iter().copied());
    run(Cli::try_parse_from(argv).map_err(|e| e.to_string())?).map(|_| ()).map_err(|e| e.to_string())
}

fn criterion_9() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |sub: &str| tmp.path().join(sub).to_str().unwrap().to_string();
    cli(&[
        "synth", "--ad-subjects", "3", "--non-ad-subjects", "3", "--duration-seconds", "10", "--channels", "F8,T7,T8,P4,O1,Cz",
        "--seed", "9", "--out", &p("data"),
    ])?;
    for threads in ["1", "8"] {
        cli(&["search", "--data", &p("data"), "--pc-sweep", "5", "--parallelism", threads, "--out", &p(&format!("s{threads}"))])?;
    }
    let mut files = 0;
    for f in ["search_results.csv", "search_summary.csv", "search_ranked.json", "run_manifest.json"] {
        let a = fs::read(tmp.path().join("s1").join(f)).map_err(|e| e.to_string())?;
        let b = fs::read(tmp.path().join("s8").join(f)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{f} differs between parallelism 1 and 8"))?;
        files += 1;
    }

    let recordings = load_dataset(Path::new(&p("data"))).map_err(|e| e.to_string())?;
    let fs_ = FeatureSet::from_recordings(&recordings, 1.0).map_err(|e| e.to_string())?;
    let all = fs_.all();
    let y = labels(&all);
    let quad: ChannelQuadruple = "F8,T7,T8,P4".parse().unwrap();
    let vectors = embed_all(&all, &quad, Band::Alpha).map_err(|e| e.to_string())?;
    let cfg = CvConfig { k: 10, repeats: 20, seed: 77 };
    let cv = || {
        cross_validate_with(&y, cfg, |train, test| {
            let tr: Vec<_> = train.iter().map(|&i| vectors[i].clone()).collect();
            let te: Vec<_> = test.iter().map(|&i| vectors[i].clone()).collect();
            let fit = qpca::fit(&tr, PcSelection::Fixed(3))?;
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = svm_fit(&project(&fit.transform_all(&tr)?, Projection::Mean), &ytr, 1.0)?;
            model.predict(&project(&fit.transform_all(&te)?, Projection::Mean))
        })
    };
    let (a, b) = (cv().map_err(|e| e.to_string())?, cv().map_err(|e| e.to_string())?);
    ensure(a == b, || format!("CV reports differ: {a:?} vs {b:?}"))?;
    for rep in 0..cfg.repeats {
        let f1 = stratified_folds(&y, 10, 77, rep).map_err(|e| e.to_string())?;
        let f2 = stratified_folds(&y, 10, 77, rep).map_err(|e| e.to_string())?;
        ensure(f1 == f2, || format!("fold assignment of repeat {rep} differs"))?;
    }
    Ok(format!(
        "{files} search outputs byte-identical at parallelism 1 and 8; CV score {:.4} reproduced with identical folds",
        a.mean_score
    ))
}

/// Runs only when `QPCA_CLINICAL_DATA` names a dataset directory.
fn criterion_10() -> Option<Check> {
    let dir = std::env::var_os("QPCA_CLINICAL_DATA")?;
    Some((|| {
        let recordings = load_dataset(Path::new(&dir)).map_err(|e| e.to_string())?;
        let fs_ = FeatureSet::from_recordings(&recordings, 1.0).map_err(|e| e.to_string())?;
        let params = PipelineParams { pcs: PcChoice::SweepUpTo(20), ..Default::default() };
        let quad: ChannelQuadruple = "F8,T7,T8,P4".parse().unwrap();
        let montage: Vec<String> = quad.channels().to_vec();
        let threads = std::thread::available_parallelism().map_or(1, usize::from);
        let s = run_search(&fs_, &montage, Band::Alpha, &params, threads).map_err(|e| e.to_string())?;
        let mean_acc = s.summaries[0].mean_acc.unwrap_or(0.0);
        let perfect = s.trials.iter().any(|t| t.acc == Some(100.0));
        ensure((mean_acc - 95.0).abs() <= 3.0 && perfect, || format!("combination mean {mean_acc:.2}%, some 100%: {perfect}"))?;

        let all = fs_.all();
        let y = labels(&all);
        let vectors = embed_all(&all, &quad, Band::Alpha).map_err(|e| e.to_string())?;
        let cv = cross_validate_with(&y, CvConfig::default(), |train, test| {
            let tr: Vec<_> = train.iter().map(|&i| vectors[i].clone()).collect();
            let te: Vec<_> = test.iter().map(|&i| vectors[i].clone()).collect();
            let fit = qpca::fit(&tr, PcSelection::Threshold(0.9))?;
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = svm_fit(&project(&fit.transform_all(&tr)?, Projection::Mean), &ytr, 1.0)?;
            model.predict(&project(&fit.transform_all(&te)?, Projection::Mean))
        })
        .map_err(|e| e.to_string())?;
        ensure((cv.mean_score - 0.0942).abs() <= 0.03, || format!("10-fold mean score {:.4}", cv.mean_score))?;

        let c = compare(&fs_, &quad, Band::Alpha, &params).map_err(|e| e.to_string())?;
        let real = c.real_pca.metrics.acc.unwrap_or(0.0);
        ensure((real - 82.0).abs() <= 3.0, || format!("real PCA accuracy {real:.2}%"))?;
        Ok(format!("combination mean {mean_acc:.2}%; CV score {:.4}; real PCA {real:.2}%", cv.mean_score))
    })())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("quaternion algebra", criterion_1),
        ("QSVD", criterion_2),
        ("band power", criterion_3),
        ("dimensions", criterion_4),
        ("QPCA consistency", criterion_5),
        ("metrics arithmetic", criterion_6),
        ("enumeration", criterion_7),
        ("end-to-end synthetic", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    match criterion_10() {
        None => println!("SKIP criterion 10 (clinical dataset): set QPCA_CLINICAL_DATA to a dataset directory"),
        Some(Ok(detail)) => println!("PASS criterion 10 (clinical dataset): {detail}"),
        Some(Err(detail)) => {
            failed += 1;
            println!("FAIL criterion 10 (clinical dataset): {detail}");
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
