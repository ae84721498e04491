//! End-to-end acceptance checks. Each criterion is its own test and prints a
//! single `criterion N: PASS|FAIL` line with the measured values.
//!
//! Criteria 6 and 7 use the genuine MovieLens-1M files when `ML1M_DIR` points
//! at them (or `data/ml-1m` exists) and the shipped fixture otherwise.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use novelty_rec::dataset::{decode_latin1, TagId};
use novelty_rec::experiments::{
    ndcg_all, random_baseline_empirical, random_baseline_expectation, random_baseline_std,
};
use novelty_rec::novelty::{ani_matrix, ani_row, uni, NoveltyConfig};
use novelty_rec::numcore::RngState;
use novelty_rec::{ExactAniMatrix, Rational};

fn report(n: u32, pass: bool, detail: impl AsRef<str>) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} ({})", detail.as_ref());
    assert!(pass, "criterion {n} failed: {}", detail.as_ref());
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("repository root")
}

fn fixture_dir() -> PathBuf {
    repo_root().join("data/fixture")
}

fn ml1m_dir() -> Option<PathBuf> {
    let candidate = std::env::var_os("ML1M_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| repo_root().join("data/ml-1m"));
    candidate.join("ratings.dat").is_file().then_some(candidate)
}

fn novrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_novrec"))
        .args(args)
        .output()
        .expect("novrec runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Rounds to two decimals, as the published tables do.
fn two_decimals(r: Rational) -> f64 {
    (*r.numer() as f64 / *r.denom() as f64 * 100.0).round() / 100.0
}

#[test]
fn criterion_1_worked_example_matrix() {
    // Tags: Action 0, Romance 1, Drama 2, Fantasy 3.
    let seq: Vec<Vec<TagId>> = vec![vec![0, 1], vec![0, 2], vec![0], vec![2, 3], vec![1, 2]];
    let published_k2 = [
        [1.0, 1.0, 1.0, 1.0],
        [0.5, 0.5, 1.0, 1.0],
        [0.33, 0.5, 0.5, 1.0],
        [0.33, 1.0, 0.5, 1.0],
        [0.5, 1.0, 0.5, 0.5],
        [1.0, 0.5, 0.33, 0.5],
    ];
    let published_k5 = [
        [1.0, 1.0, 1.0, 1.0],
        [0.5, 0.5, 1.0, 1.0],
        [0.33, 0.5, 0.5, 1.0],
        [0.25, 0.5, 0.5, 1.0],
        [0.25, 0.5, 0.33, 0.5],
        [0.25, 0.33, 0.25, 0.5],
    ];
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for (k, table) in [(2, published_k2), (5, published_k5)] {
        let cfg = NoveltyConfig::new(k, 4).unwrap();
        let m: ExactAniMatrix = ani_matrix(1, &seq, cfg).unwrap();
        let mut rows: Vec<Vec<Rational>> = m.rows().map(<[Rational]>::to_vec).collect();
        rows.push(ani_row(&seq, 6, cfg).unwrap());
        for (t, (got, want)) in rows.iter().zip(table).enumerate() {
            let rounded: Vec<f64> = got.iter().map(|&r| two_decimals(r)).collect();
            if rounded != want {
                mismatches.push(format!("k={k} t={}: {rounded:?} vs {want:?}", t + 1));
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        mismatches.is_empty() && elapsed < Duration::from_millis(100),
        format!("12 rows compared in {elapsed:?}; mismatches: {mismatches:?}"),
    );
}

/// ANI counting every earlier action, with no window at all.
fn full_history_row(seq: &[Vec<TagId>], t: usize, tags: usize) -> Vec<Rational> {
    (0..tags)
        .map(|tag| {
            let count = seq[..t - 1].iter().filter(|a| a.contains(&tag)).count();
            Rational::new(1, count as i64 + 1)
        })
        .collect()
}

#[test]
fn criterion_2_full_memory_equivalence() {
    let mut rng = RngState::new(2);
    let mut failures = 0;
    for _ in 0..100 {
        let tags = 1 + rng.index(10);
        let len = 1 + rng.index(50);
        let seq: Vec<Vec<TagId>> = (0..len)
            .map(|_| {
                let mut a: Vec<TagId> = (0..1 + rng.index(3)).map(|_| rng.index(tags)).collect();
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect();
        let m: ExactAniMatrix =
            ani_matrix(1, &seq, NoveltyConfig::new(len, tags).unwrap()).unwrap();
        if (1..=len).any(|t| m.row(t) != full_history_row(&seq, t, tags).as_slice()) {
            failures += 1;
        }
    }
    report(
        2,
        failures == 0,
        format!("{failures} of 100 random sequences differ"),
    );
}

#[test]
fn criterion_3_uni_bounds() {
    let mut rng = RngState::new(3);
    let mut out_of_range = 0;
    for _ in 0..1000 {
        let tags = 1 + rng.index(20);
        let k = 1 + rng.index(30);
        // Valid ANI entries are 1/(c+1) with 0 <= c <= k.
        let row: Vec<f64> = (0..tags)
            .map(|_| 1.0 / (rng.index(k + 1) + 1) as f64)
            .collect();
        let u = uni(&row).unwrap();
        let lower = 1.0 / (1.0 + (tags as f64).log2());
        if !(lower - 1e-12..=1.0 + 1e-12).contains(&u) {
            out_of_range += 1;
        }
    }
    let worst_uniform = (1..=64usize)
        .map(|n| {
            let lower = 1.0 / (1.0 + (n as f64).log2());
            (uni(&vec![0.25; n]).unwrap() - lower).abs()
        })
        .fold(0.0, f64::max);
    report(
        3,
        out_of_range == 0 && worst_uniform < 1e-12,
        format!("{out_of_range} of 1000 rows out of range; uniform-row gap {worst_uniform:e}"),
    );
}

#[test]
fn criterion_4_gradient_check() {
    let start = Instant::now();
    let out = novrec(&[
        "grad-check",
        "--configs",
        "20",
        "--seed",
        "0",
        "--tol",
        "1e-4",
    ]);
    let elapsed = start.elapsed();
    let text = stdout(&out);
    let summary = text.lines().last().unwrap_or_default().to_string();
    report(
        4,
        out.status.success() && summary.ends_with("PASS") && elapsed < Duration::from_secs(30),
        format!("{summary}; {elapsed:?}"),
    );
}

#[test]
fn criterion_5_metric_unit_values() {
    let ranked: Vec<u32> = (1..=7).collect();
    let exact = ndcg_all(&ranked, 1).unwrap() == 1.0
        && ndcg_all(&ranked, 3).unwrap() == 0.5
        && ndcg_all(&ranked, 7).unwrap() == 1.0 / 3.0;
    let trials = 100_000;
    let mut rng = RngState::new(5);
    let empirical = random_baseline_empirical(3, trials, &mut rng).unwrap();
    let closed = random_baseline_expectation(3).unwrap();
    let se = random_baseline_std(3).unwrap() / (trials as f64).sqrt();
    report(
        5,
        exact && (closed - 0.71031).abs() < 5e-6 && (empirical - closed).abs() < 3.0 * se,
        format!("exact ranks ok: {exact}; empirical {empirical:.5} vs closed form {closed:.5} (se {se:.1e})"),
    );
}

#[test]
fn criterion_6_end_to_end_ratio() {
    let data = ml1m_dir().unwrap_or_else(fixture_dir);
    let work = tempfile::tempdir().unwrap();
    let model = work.path().join("model.bin");
    let csv = work.path().join("eval.csv");
    let start = Instant::now();
    let train = novrec(&[
        "train",
        "--data-dir",
        path(&data),
        "--users",
        "20",
        "--out",
        path(&model),
    ]);
    assert!(
        train.status.success(),
        "{}",
        String::from_utf8_lossy(&train.stderr)
    );
    let eval = novrec(&[
        "eval",
        "--model",
        path(&model),
        "--data-dir",
        path(&data),
        "--users",
        "20",
        "--out",
        path(&csv),
    ]);
    assert!(
        eval.status.success(),
        "{}",
        String::from_utf8_lossy(&eval.stderr)
    );
    let elapsed = start.elapsed();

    let body = fs::read_to_string(&csv).unwrap();
    let ndcg: Vec<f64> = body
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let mean = ndcg.iter().sum::<f64>() / ndcg.len() as f64;
    let candidates = decode_latin1(&fs::read(data.join("movies.dat")).unwrap())
        .lines()
        .count();
    let random = random_baseline_expectation(candidates).unwrap();
    let ratio = mean / random;
    report(
        6,
        ratio >= 1.5 && elapsed < Duration::from_secs(600),
        format!(
            "{}: mean nDCG@all {mean:.4} over {} users, random {random:.4} for {candidates} candidates, ratio {ratio:.2} (need 1.5); {elapsed:?}",
            data.display(),
            ndcg.len()
        ),
    );
}

/// Counts taken straight from the raw files, sharing no code with the crate.
struct LineCounts {
    users: usize,
    movies: usize,
    ratings: usize,
    mean_len: f64,
    median_len: f64,
    mean_tags: f64,
    male_female: f64,
}

fn count_lines(dir: &Path) -> LineCounts {
    let read = |name: &str| decode_latin1(&fs::read(dir.join(name)).unwrap());
    let users = read("users.dat");
    let movies = read("movies.dat");
    let ratings = read("ratings.dat");
    let user_lines: Vec<&str> = users.lines().filter(|l| !l.is_empty()).collect();
    let movie_lines: Vec<&str> = movies.lines().filter(|l| !l.is_empty()).collect();
    let mut per_user: HashMap<&str, usize> = HashMap::new();
    let mut rating_count = 0;
    for line in ratings.lines().filter(|l| !l.is_empty()) {
        *per_user
            .entry(line.split("::").next().unwrap())
            .or_default() += 1;
        rating_count += 1;
    }
    let mut lens: Vec<usize> = per_user.values().copied().collect();
    lens.sort_unstable();
    let mid = lens.len() / 2;
    let median_len = if lens.len().is_multiple_of(2) {
        (lens[mid - 1] + lens[mid]) as f64 / 2.0
    } else {
        lens[mid] as f64
    };
    let tags: usize = movie_lines
        .iter()
        .map(|l| l.rsplit("::").next().unwrap().split('|').count())
        .sum();
    let males = user_lines
        .iter()
        .filter(|l| l.split("::").nth(1) == Some("M"))
        .count();
    LineCounts {
        users: user_lines.len(),
        movies: movie_lines.len(),
        ratings: rating_count,
        mean_len: rating_count as f64 / per_user.len() as f64,
        median_len,
        mean_tags: tags as f64 / movie_lines.len() as f64,
        male_female: males as f64 / (user_lines.len() - males) as f64,
    }
}

#[test]
fn criterion_7_dataset_statistics() {
    let (dir, genuine) = match ml1m_dir() {
        Some(d) => (d, true),
        None => (fixture_dir(), false),
    };
    let out = novrec(&["stats", "--data-dir", path(&dir)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stats: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let int = |k: &str| stats[k].as_u64().unwrap() as usize;
    let real = |k: &str| stats[k].as_f64().unwrap();

    let expected = if genuine {
        LineCounts {
            users: 6040,
            movies: 3883,
            ratings: 1_000_209,
            mean_len: 165.57,
            median_len: 96.0,
            mean_tags: 1.65,
            male_female: 2.53,
        }
    } else {
        count_lines(&dir)
    };
    let tol = if genuine { 0.01 } else { 1e-9 };
    let pass = int("user_count") == expected.users
        && int("movie_count") == expected.movies
        && int("rating_count") == expected.ratings
        && (real("mean_seq_len") - expected.mean_len).abs() <= tol
        && (real("median_seq_len") - expected.median_len).abs() <= tol
        && (real("mean_tags_per_movie") - expected.mean_tags).abs() <= tol
        && (real("male_female_ratio") - expected.male_female).abs() <= tol;
    report(
        7,
        pass,
        format!(
            "{} ({}): {} users, {} movies, {} ratings, mean length {:.2}, median {}, tags/movie {:.2}, M:F {:.2}",
            dir.display(),
            if genuine { "MovieLens-1M" } else { "fixture vs independent count" },
            int("user_count"),
            int("movie_count"),
            int("rating_count"),
            real("mean_seq_len"),
            real("median_seq_len"),
            real("mean_tags_per_movie"),
            real("male_female_ratio"),
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let data = fixture_dir();
    let work = tempfile::tempdir().unwrap();
    let mut files: BTreeMap<&str, Vec<Vec<u8>>> = BTreeMap::new();
    for run in ["a", "b"] {
        let model = work.path().join(format!("{run}.bin"));
        let sweep = work.path().join(format!("{run}.csv"));
        let train = novrec(&[
            "train",
            "--data-dir",
            path(&data),
            "--users",
            "5",
            "--epochs",
            "5",
            "--seed",
            "9",
            "--out",
            path(&model),
        ]);
        assert!(
            train.status.success(),
            "{}",
            String::from_utf8_lossy(&train.stderr)
        );
        let sw = novrec(&[
            "sweep-k",
            "--data-dir",
            path(&data),
            "--users",
            "3",
            "--k-min",
            "2",
            "--k-max",
            "12",
            "--step",
            "5",
            "--epochs",
            "3",
            "--out",
            path(&sweep),
        ]);
        assert!(
            sw.status.success(),
            "{}",
            String::from_utf8_lossy(&sw.stderr)
        );
        let trace = work.path().join(format!("{run}.bin.loss.csv"));
        for (name, p) in [("model", &model), ("trace", &trace), ("sweep", &sweep)] {
            files.entry(name).or_default().push(fs::read(p).unwrap());
        }
    }
    let differing: Vec<&str> = files
        .iter()
        .filter(|(_, v)| v[0] != v[1] || v[0].is_empty())
        .map(|(&name, _)| name)
        .collect();
    report(
        8,
        differing.is_empty(),
        format!("model, loss trace and sweep CSV compared byte for byte; differing: {differing:?}"),
    );
}

#[test]
fn criterion_9_forgetting() {
    // Tags 0..3 form set A, 3..6 set B.
    let a: Vec<TagId> = vec![0, 1, 2];
    let b: Vec<TagId> = vec![3, 4, 5];
    let seq: Vec<Vec<TagId>> = (0..100)
        .map(|i| {
            let set = if i < 50 { &a } else { &b };
            vec![set[i % 3]]
        })
        .collect();
    let short: Vec<Rational> = ani_row(&seq, 101, NoveltyConfig::new(10, 6).unwrap()).unwrap();
    let long: Vec<Rational> = ani_row(&seq, 101, NoveltyConfig::new(100, 6).unwrap()).unwrap();
    let one = Rational::from_integer(1);
    let forgotten = a.iter().all(|&t| short[t] == one);
    let remembered = a.iter().any(|&t| long[t] <= Rational::new(1, 2));
    report(
        9,
        forgotten && remembered,
        format!(
            "k=10 A-tags {:?}; k=100 A-tags {:?}",
            a.iter().map(|&t| short[t].to_string()).collect::<Vec<_>>(),
            a.iter().map(|&t| long[t].to_string()).collect::<Vec<_>>()
        ),
    );
}
