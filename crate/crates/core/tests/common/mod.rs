//! Generators shared by the integration suites. Everything here draws from
//! `rand`/`rand_distr`, independent of the crate's own PRNG.
#![allow(dead_code)]

use inkbridge::corpus_io::FeatureMatrix;
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn normal_matrix(r: &mut StdRng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

/// `B Bᵀ / cols` for a `d × cols` Gaussian `B`; rank `min(d, cols)`.
pub fn random_psd(r: &mut StdRng, d: usize, cols: usize) -> DMatrix<f64> {
    let b = normal_matrix(r, d, cols);
    let a = &b * b.transpose() / cols as f64;
    (&a + a.transpose()) * 0.5
}

/// Orthonormal `d × q` basis from the QR factor of a Gaussian matrix.
pub fn orthonormal(r: &mut StdRng, d: usize, q: usize) -> DMatrix<f64> {
    normal_matrix(r, d, q).qr().q()
}

pub fn features(data: DMatrix<f64>) -> FeatureMatrix {
    FeatureMatrix::from_matrix(data, None).unwrap()
}

/// `n` rows of `mean + L z` with standard normal `z`.
pub fn gaussian_rows(r: &mut StdRng, n: usize, mean: &DVector<f64>, chol: &DMatrix<f64>) -> DMatrix<f64> {
    let z = normal_matrix(r, n, chol.ncols());
    let mut x = z * chol.transpose();
    for mut row in x.row_iter_mut() {
        row += mean.transpose();
    }
    x
}

pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn random_text(r: &mut StdRng, alphabet: &[char], max_len: usize) -> String {
    let len = r.random_range(1..=max_len);
    (0..len).map(|_| alphabet[r.random_range(0..alphabet.len())]).collect()
}

/// Pearson chi-square p-value of observed counts against expected
/// probabilities.
pub fn chi_square_p(counts: &[usize], probs: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let n: usize = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Literal transcription of the 2004 well-conditioned estimator, with plain
/// loops and the `n` outer products formed explicitly. Returns
/// `(shrunk covariance, delta)`.
pub fn ledoit_wolf_brute(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = rows.len();
    let d = rows[0].len();
    let nf = n as f64;
    let df = d as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j] / nf;
        }
    }
    let x: Vec<Vec<f64>> = rows.iter().map(|r| (0..d).map(|j| r[j] - mean[j]).collect()).collect();
    let mut s = vec![vec![0.0; d]; d];
    for xk in &x {
        for i in 0..d {
            for j in 0..d {
                s[i][j] += xk[i] * xk[j] / nf;
            }
        }
    }
    // <A, B> = tr(A B^T) / d
    let inner = |a: &dyn Fn(usize, usize) -> f64| {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v = a(i, j);
                acc += v * v;
            }
        }
        acc / df
    };
    let m = (0..d).map(|i| s[i][i]).sum::<f64>() / df;
    let d2 = inner(&|i, j| s[i][j] - if i == j { m } else { 0.0 });
    let mut b2_bar = 0.0;
    for xk in &x {
        b2_bar += inner(&|i, j| xk[i] * xk[j] - s[i][j]);
    }
    b2_bar /= nf * nf;
    let b2 = b2_bar.min(d2);
    let a2 = d2 - b2;
    let delta = if d2 > 0.0 { b2 / d2 } else { 0.0 };
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { m } else { 0.0 };
            out[i][j] = if d2 > 0.0 { b2 / d2 * target + a2 / d2 * s[i][j] } else { s[i][j] };
        }
    }
    (out, delta)
}

/// Two-pass Pearson with plain loops.
pub fn pearson_brute(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

/// Multiset intersection size by striking matched characters off a copy of
/// the reference.
pub fn multiset_overlap_brute(cand: &[char], reference: &[char]) -> usize {
    let mut pool: Vec<Option<char>> = reference.iter().copied().map(Some).collect();
    let mut hits = 0;
    for &c in cand {
        if let Some(slot) = pool.iter_mut().find(|s| **s == Some(c)) {
            *slot = None;
            hits += 1;
        }
    }
    hits
}

/// Every maximum-size exact-match alignment, enumerated exhaustively;
/// returns `(matches, fewest chunks)`.
pub fn meteor_brute(cand: &[char], reference: &[char]) -> (usize, usize) {
    fn chunks(links: &[(usize, usize)]) -> usize {
        let mut c = 0;
        for (k, &(i, j)) in links.iter().enumerate() {
            if k == 0 || !(i == links[k - 1].0 + 1 && j == links[k - 1].1 + 1) {
                c += 1;
            }
        }
        c
    }
    fn go(
        i: usize,
        cand: &[char],
        reference: &[char],
        used: &mut Vec<bool>,
        links: &mut Vec<(usize, usize)>,
        best: &mut (usize, usize),
    ) {
        if i == cand.len() {
            let m = links.len();
            let c = chunks(links);
            if m > best.0 || (m == best.0 && c < best.1) {
                *best = (m, c);
            }
            return;
        }
        go(i + 1, cand, reference, used, links, best);
        for j in 0..reference.len() {
            if !used[j] && reference[j] == cand[i] {
                used[j] = true;
                links.push((i, j));
                go(i + 1, cand, reference, used, links, best);
                links.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (0, usize::MAX);
    go(0, cand, reference, &mut vec![false; reference.len()], &mut Vec::new(), &mut best);
    if best.0 == 0 {
        best.1 = 0;
    }
    best
}

/// Small on-disk corpus touching every subcommand's input format.
pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_owned()
    }
}

fn feature_csv(ids: &[String], x: &DMatrix<f64>) -> String {
    let mut out = String::from("id");
    for j in 0..x.ncols() {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for v in x.row(i).iter() {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_fixture(seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(seed);
    let put = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).unwrap();

    let mut items = Vec::new();
    for i in 0..12 {
        items.push(format!(r#"{{"id":"pa{i:02}","modality":"painting","pair_id":"po{i:02}","genre":"landscape"}}"#));
        items.push(format!(r#"{{"id":"po{i:02}","modality":"poem","pair_id":"pa{i:02}"}}"#));
    }
    for i in 0..60 {
        let m = if i % 2 == 0 { "painting" } else { "poem" };
        items.push(format!(r#"{{"id":"u{i:02}","modality":"{m}"}}"#));
    }
    put("manifest.json", &format!("{{\"items\":[{}]}}\n", items.join(",")));

    let alphabet: Vec<char> = "白日依山尽黄河入海流欲穷千里目更上一层楼".chars().collect();
    let mut tp = String::new();
    for g in 0..10 {
        for k in 0..3 {
            let len = r.random_range(5..=28);
            let chars: Vec<String> =
                (0..len).map(|_| format!("\"{}\"", alphabet[r.random_range(0..alphabet.len())])).collect();
            let logp: Vec<String> = (0..len).map(|_| format!("{}", -r.random_range(0.01..6.0))).collect();
            tp.push_str(&format!(
                "{{\"id\":\"gen{g}_{k}\",\"group_id\":\"pa{g:02}\",\"chars\":[{}],\"logp\":[{}]}}\n",
                chars.join(","),
                logp.join(",")
            ));
        }
    }
    put("token_probs.jsonl", &tp);

    let mut pairs = String::new();
    for i in 0..40 {
        let c = random_text(&mut r, &alphabet, 20);
        let f1 = random_text(&mut r, &alphabet, 20);
        let f2 = random_text(&mut r, &alphabet, 20);
        pairs.push_str(&format!(
            "{{\"id\":\"t{i:02}\",\"candidate\":\"{c}，\",\"references\":[\"{f1}。\",\"{f2}\"]}}\n"
        ));
    }
    put("pairs.jsonl", &pairs);

    let ids = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i:03}")).collect::<Vec<_>>();
    let d = 16;
    let basis = orthonormal(&mut r, d, 6);
    let real = normal_matrix(&mut r, 120, d);
    let gen = normal_matrix(&mut r, 120, d) * 1.2 + DMatrix::from_element(120, d, 0.3);
    let painting = normal_matrix(&mut r, 90, 6) * basis.transpose();
    let poem = (normal_matrix(&mut r, 80, 6) * 0.8 + DMatrix::from_element(80, 6, 0.5)) * basis.transpose();
    put("real.csv", &feature_csv(&ids("r", 120), &real));
    put("gen.csv", &feature_csv(&ids("g", 120), &gen));
    put("paintings.csv", &feature_csv(&ids("p", 90), &painting));
    put("poems.csv", &feature_csv(&ids("q", 80), &poem));

    let genres = ["figure", "flower_bird", "landscape", "boundary"];
    let mut truth = String::from("id,genre\n");
    let mut pred = String::from("id,genre\n");
    for i in 0..50 {
        let t = genres[r.random_range(0..4)];
        let p = if r.random::<f64>() < 0.7 { t } else { genres[r.random_range(0..4)] };
        truth.push_str(&format!("img{i:02},{t}\n"));
        pred.push_str(&format!("img{i:02},{p}\n"));
    }
    put("truth.csv", &truth);
    put("pred.csv", &pred);

    let recon_ids = ids("x", 10);
    let orig = normal_matrix(&mut r, 10, 8);
    let recon = &orig + normal_matrix(&mut r, 10, 8) * 0.1;
    put("orig.csv", &feature_csv(&recon_ids, &orig));
    put("recon.csv", &feature_csv(&recon_ids, &recon));
    let grid_ids = ids("grid", 6);
    let grids = DMatrix::from_fn(6, 12, |_, _| r.random_range(0.0..1.0));
    let fake_grids = DMatrix::from_fn(6, 12, |_, _| r.random_range(0.0..1.0));
    put("patch_real.csv", &feature_csv(&grid_ids, &grids));
    put("patch_fake.csv", &feature_csv(&grid_ids, &fake_grids));
    let shapes: String = grid_ids.iter().map(|id| format!("{{\"id\":\"{id}\",\"w\":4,\"h\":3}}\n")).collect();
    put("shapes.jsonl", &shapes);
    let seq_ids = ids("s", 16);
    put("seq_real.csv", &feature_csv(&seq_ids, &DMatrix::from_fn(16, 1, |_, _| r.random_range(0.0..1.0))));
    put("seq_fake.csv", &feature_csv(&seq_ids, &DMatrix::from_fn(16, 1, |_, _| r.random_range(0.0..1.0))));

    put("logits.csv", &feature_csv(&ids("step", 8), &(normal_matrix(&mut r, 8, 30) * 2.0)));

    let mut ratings = String::from("id,quality,fluency,coherence,diversity\n");
    let mut metrics = String::from("id,m_a,m_b\n");
    for i in 0..40 {
        let z: f64 = r.sample(StandardNormal);
        let row: Vec<String> =
            (0..4).map(|_| format!("{:.3}", (3.0 + z + r.random_range(-1.0..1.0)).clamp(1.0, 5.0))).collect();
        ratings.push_str(&format!("t{i:02},{}\n", row.join(",")));
        metrics.push_str(&format!("t{i:02},{},{}\n", z * 0.5, r.random::<f64>()));
    }
    put("ratings.csv", &ratings);
    put("metrics.csv", &metrics);
    Fixture { dir }
}

pub fn bin() -> std::process::Command {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_inkbridge"));
    cmd.env_remove("INKBRIDGE_SEED");
    cmd
}

pub fn run_cli(args: &[&str]) -> std::process::Output {
    bin().args(args).output().unwrap()
}

/// Every metric subcommand over the fixture, reports written under
/// `out_dir`, then `summary` over all of them. Returns (file, bytes) for
/// each report and the summary, in a fixed order.
pub fn fixture_run(fx: &Fixture, workers: &str, out_dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    std::fs::create_dir_all(out_dir).unwrap();
    let p = |n: &str| fx.path(n);
    let jobs: Vec<(&str, Vec<String>)> = vec![
        ("prf.json", vec!["prf".into(), "--pairs".into(), p("pairs.jsonl")]),
        ("bleu.json", vec!["bleu".into(), "--pairs".into(), p("pairs.jsonl")]),
        ("meteor.json", vec!["meteor".into(), "--pairs".into(), p("pairs.jsonl")]),
        ("ppl.json", vec!["ppl".into(), "--token-probs".into(), p("token_probs.jsonl")]),
        ("mce.json", vec!["mce".into(), "--token-probs".into(), p("token_probs.jsonl")]),
        (
            "mte.json",
            vec!["mte".into(), "--token-probs".into(), p("token_probs.jsonl"), "--strategy".into(), "nucleus".into()],
        ),
        (
            "fid.csv",
            vec![
                "fid".into(),
                "--real".into(),
                p("real.csv"),
                "--generated".into(),
                p("gen.csv"),
                "--format".into(),
                "csv".into(),
            ],
        ),
        ("acc.json", vec!["genre-acc".into(), "--pred".into(), p("pred.csv"), "--truth".into(), p("truth.csv")]),
        (
            "dce.json",
            vec![
                "dce".into(),
                "--paintings".into(),
                p("paintings.csv"),
                "--poems".into(),
                p("poems.csv"),
                "--pca-dim".into(),
                "6".into(),
            ],
        ),
    ];
    let mut outputs = Vec::new();
    let mut report_paths = Vec::new();
    for (name, args) in jobs {
        let out = out_dir.join(name);
        let mut full = args.clone();
        full.extend(["--workers".into(), workers.into(), "--out".into(), out.to_str().unwrap().into()]);
        let o = bin().args(&full).output().unwrap();
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        outputs.push((name.to_owned(), std::fs::read(&out).unwrap()));
        report_paths.push(out.to_str().unwrap().to_owned());
    }
    for format in ["json", "csv"] {
        let mut args = vec!["summary".to_owned(), "--workers".into(), workers.into(), "--format".into(), format.into()];
        args.extend(report_paths.iter().cloned());
        let o = bin().args(&args).output().unwrap();
        assert!(o.status.success(), "summary: {}", String::from_utf8_lossy(&o.stderr));
        outputs.push((format!("summary.{format}"), o.stdout));
    }
    outputs
}
