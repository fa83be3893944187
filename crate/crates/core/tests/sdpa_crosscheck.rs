//! Solves the exported SDPA files with cvxpy and compares optima with the
//! built-in solver. Skipped when python3 or cvxpy is unavailable.

use flagcert::densities::DensityCache;
use flagcert::sdp::sdpa::export_sdpa_file;
use flagcert::sdp::{build_problem, solve, ObjectiveSpec};
use std::path::Path;
use std::process::Command;

const SCRIPT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/sdpa_cvxpy.py");

fn external_optimum(path: &Path) -> Option<f64> {
    let out = Command::new("python3")
        .arg(SCRIPT)
        .arg(path)
        .output()
        .ok()?;
    if out.status.code() == Some(77) {
        return None;
    }
    assert!(
        out.status.success(),
        "cvxpy run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Some(
        String::from_utf8_lossy(&out.stdout)
            .trim()
            .parse()
            .expect("numeric optimum"),
    )
}

fn crosscheck(spec: ObjectiveSpec, tol: f64) {
    let p = build_problem(&spec, &DensityCache::disabled()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("problem.dat-s");
    export_sdpa_file(&p, &path).unwrap();
    let Some(external) = external_optimum(&path) else {
        eprintln!("skipping: python3 with cvxpy not available");
        return;
    };
    let internal = solve(&p, 1e-9).unwrap().lambda;
    assert!(
        (external - internal).abs() < tol,
        "cvxpy {external} vs built-in {internal}"
    );
}

#[test]
fn triangle_problem_agrees_with_cvxpy() {
    crosscheck(ObjectiveSpec::goodman(), 1e-6);
}

#[test]
fn k4_problem_agrees_with_cvxpy() {
    crosscheck(ObjectiveSpec::m4(), 1e-5);
}

/// Multiplies constraint `g` (its matrix and its right-hand side) by `1 + g % 3`.
fn scale_rows(text: &str) -> String {
    let mut out = Vec::new();
    let mut data = 0;
    for line in text.lines() {
        if line.starts_with('"') || line.starts_with('*') {
            out.push(line.to_string());
            continue;
        }
        data += 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let factor = |g: usize| (1 + g % 3) as f64;
        let scaled = match data {
            4 => toks
                .iter()
                .enumerate()
                .map(|(i, t)| (t.parse::<f64>().unwrap() * factor(i + 1)).to_string())
                .collect::<Vec<_>>()
                .join(" "),
            d if d > 4 => {
                let g: usize = toks[0].parse().unwrap();
                let v: f64 = toks[4].parse().unwrap();
                let v = if g == 0 { v } else { v * factor(g) };
                format!("{} {} {} {} {}", toks[0], toks[1], toks[2], toks[3], v)
            }
            _ => line.to_string(),
        };
        out.push(scaled);
    }
    out.join("\n") + "\n"
}

#[test]
fn row_scaling_leaves_the_optimum_unchanged() {
    let p = build_problem(&ObjectiveSpec::goodman(), &DensityCache::disabled()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("problem.dat-s");
    export_sdpa_file(&p, &path).unwrap();
    let scaled = dir.path().join("scaled.dat-s");
    std::fs::write(
        &scaled,
        scale_rows(&std::fs::read_to_string(&path).unwrap()),
    )
    .unwrap();
    let (Some(a), Some(b)) = (external_optimum(&path), external_optimum(&scaled)) else {
        eprintln!("skipping: python3 with cvxpy not available");
        return;
    };
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    assert!((b - 0.25).abs() < 1e-6);
}
