// Acceptance criteria, one pass/fail line each. Runs without the libtest
// harness so the lines always reach stdout.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use parabound::sharp::c_dir;
use parabound::solver::Grid;
use parabound::verify::suite::{group_rng, random_spec, run_suite, SuiteConfig, DEFAULT_SEED};
use parabound::{Exponent, KernelWorkspace};
use rand::Rng;

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Verdict,
}

/// Runs every suite check matching one of `globs`; passes when all pass, none
/// error and there are exactly `expected` of them.
fn suite(globs: &[&str], expected: usize) -> Verdict {
    let mut total = 0;
    let mut bad = Vec::new();
    for glob in globs {
        let cfg = SuiteConfig {
            filter: Some(glob.to_string()),
            ..SuiteConfig::default()
        };
        let out = run_suite(&cfg).map_err(|e| format!("{glob}: {e}"))?;
        total += out.reports.len() + out.errors.len();
        bad.extend(out.reports.iter().filter(|r| !r.passed).map(|r| format!("{} rel_err {:.3e}", r.check, r.rel_err)));
        bad.extend(out.errors.iter().map(|(n, e)| format!("{n}: {e}")));
    }
    if !bad.is_empty() {
        return Err(format!("{} of {total} checks failed: {}", bad.len(), bad.join("; ")));
    }
    if total != expected {
        return Err(format!("expected {expected} checks, found {total}"));
    }
    Ok(format!("{total} checks"))
}

fn mass_identity() -> Verdict {
    suite(&["mass_identity/*"], 20)
}

fn pde_residual() -> Verdict {
    suite(&["pde_residual/*"], 10)
}

fn kernel_duality() -> Verdict {
    suite(&["kernel_duality/*"], 40)
}

/// `int_0^t e^{c s} s^{-1/2} ds` by its power series.
fn reaction_series(c: f64, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut coef = t.sqrt();
    for k in 0..200 {
        let term = coef / (k as f64 + 0.5);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        coef *= c * t / (k as f64 + 1.0);
    }
    sum
}

fn spacetime_duality() -> Verdict {
    let oracle = suite(&["spacetime_duality/n1/p4/*", "spacetime_duality/n1/p6/*", "spacetime_duality/n1/pinf/*"], 12)?;
    let mut rng = group_rng(DEFAULT_SEED, 100);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let spec = random_spec(&mut rng, 1);
        let a = spec.diffusion().get(0, 0);
        let c = spec.reaction();
        let t = rng.gen_range(0.1..3.0);
        let l = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let w = KernelWorkspace::new(spec).map_err(|e| e.to_string())?;
        let got = c_dir(&w, Exponent::INFINITY, &[l], t).map_err(|e| e.to_string())?.value;
        let want = reaction_series(c, t) / (a * std::f64::consts::PI).sqrt();
        worst = worst.max(((got - want) / want).abs());
    }
    if worst > 1e-10 {
        return Err(format!("{oracle}; C_inf closed form off by {worst:.3e}"));
    }
    Ok(format!("{oracle}; C_inf vs series worst rel {worst:.1e}"))
}

fn attainment() -> Verdict {
    suite(&["attainment/*"], 4)
}

fn special_cases() -> Verdict {
    suite(&["special_cases/*"], 24)
}

fn b_invariance() -> Verdict {
    suite(&["b_invariance/*"], count("b_invariance/*"))
}

fn constant_source() -> Verdict {
    suite(&["constant_source/*"], 5)
}

fn bound_domination() -> Verdict {
    suite(&["bound_domination/hom/*"], 50)?;
    let rest = count("bound_domination/max_principle/*") + count("bound_domination/nonhom/*") + count("max_principle/*");
    suite(&["bound_domination/max_principle/*", "bound_domination/nonhom/*", "max_principle/*"], rest)
        .map(|s| format!("50 homogeneous + {s}"))
}

fn count(glob: &str) -> usize {
    let checks = parabound::verify::suite::default_checks(DEFAULT_SEED);
    parabound::verify::suite::select(checks, Some(glob)).map(|c| c.len()).unwrap_or(0)
}

// ---------------------------------------------------------------------------
// command line

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parabound"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Runs `args` with `--out`, replays the file and compares bytes.
fn round_trip(dir: &Path, tag: &str, args: &[&str]) -> Result<(), String> {
    let first = dir.join(format!("{tag}.out"));
    let second = dir.join(format!("{tag}.replay"));
    let mut a: Vec<&str> = args.to_vec();
    let first_s = first.to_str().unwrap().to_string();
    a.extend(["--out", &first_s]);
    let o = run(&a);
    if code(&o) != 0 {
        return Err(format!("{tag}: exit {} {}", code(&o), String::from_utf8_lossy(&o.stderr)));
    }
    let o = run(&["replay", &first_s, "--out", second.to_str().unwrap()]);
    if code(&o) != 0 {
        return Err(format!("{tag} replay: exit {}", code(&o)));
    }
    let stdout_replay = run(&["replay", &first_s]).stdout;
    let original = std::fs::read(&first).unwrap();
    if std::fs::read(&second).unwrap() != original || stdout_replay != original {
        return Err(format!("{tag}: replay differs"));
    }
    Ok(())
}

fn cli_round_trip() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let s1 = write(d, "s1.json", r#"{"n":1,"A":[[1.3]],"b":[0.4],"c":-0.2,"T":10}"#);
    let s2 = write(d, "s2.json", r#"{"n":2,"A":[[1.0,0.3],[0.3,0.7]],"b":[0.1,-0.5],"c":0.3,"T":5}"#);
    let s1 = s1.to_str().unwrap();
    let s2 = s2.to_str().unwrap();

    round_trip(d, "constant", &["constant", "--spec", s2, "--p", "4", "--t", "0.7", "--dir", "0.6,-0.8"])?;
    round_trip(d, "constant_max", &["constant", "--spec", s1, "--kind", "nonhom", "--p", "inf", "--t", "1", "--max"])?;
    let gauss = r#"{"type":"gaussian","center":[0.2,-0.1],"width":0.5}"#;
    round_trip(d, "solve", &["solve", "--spec", s2, "--data", gauss, "--x", "0.1,0.2", "--x", "-0.3,0", "--t", "0.5,1"])?;
    round_trip(d, "solve_nonhom", &["solve", "--spec", s1, "--kind", "nonhom", "--data", r#"{"type":"box","lo":[-1],"hi":[1]}"#, "--x", "0.3", "--t", "0.5"])?;
    round_trip(d, "sweep", &["sweep", "--spec", s1, "--p", "2,4,inf", "--t", "0.25,1,4", "--dir", "1"])?;
    round_trip(d, "verify", &["verify", "--check", "mass_identity/n1/*"])?;

    let mut codes = Vec::new();
    let mut expect = |what: &str, want: i32, o: Output| {
        codes.push(format!("{what}={}", code(&o)));
        if code(&o) == want {
            Ok(())
        } else {
            Err(format!("{what}: expected exit {want}, got {} ({})", code(&o), String::from_utf8_lossy(&o.stderr).trim()))
        }
    };
    expect("ok", 0, run(&["constant", "--spec", s1, "--p", "2", "--t", "1", "--dir", "1"]))?;
    expect("verify_fail", 1, run(&["verify", "--check", "kernel_duality/n1/p2/*", "--perturb", "1e-3"]))?;
    expect("missing_spec", 2, run(&["constant", "--spec", d.join("nope.json").to_str().unwrap(), "--p", "2", "--t", "1", "--max"]))?;
    let bad = write(d, "bad.json", r#"{"n":1,"A":[[-1]],"b":[0],"c":0,"T":1}"#);
    expect("not_spd", 2, run(&["constant", "--spec", bad.to_str().unwrap(), "--p", "2", "--t", "1", "--max"]))?;
    let grid = write(d, "bad.pbgr", "not a grid");
    let data = format!(r#"{{"type":"grid","path":{:?}}}"#, grid.to_str().unwrap());
    expect("bad_grid", 2, run(&["solve", "--spec", s1, "--data", &data, "--x", "0", "--t", "1"]))?;
    expect("exponent", 3, run(&["constant", "--spec", s1, "--kind", "nonhom", "--p", "3", "--t", "1", "--max"]))?;

    // A 3D grid solve replayed with a target below what the grid rule can
    // certify.
    let g = Grid::sample(vec![5, 5, 5], vec![-1.0; 3], vec![0.5; 3], |y| y.iter().map(|v| 1.0 - v.abs()).product())
        .map_err(|e| e.to_string())?;
    let gpath = d.join("hat.pbgr");
    g.save(&gpath).map_err(|e| e.to_string())?;
    let s3 = write(d, "s3.json", r#"{"n":3,"A":[[1,0,0],[0,1,0],[0,0,1]],"b":[0,0,0],"c":0,"T":10}"#);
    let data = format!(r#"{{"type":"grid","path":{:?}}}"#, gpath.to_str().unwrap());
    let o = run(&["solve", "--spec", s3.to_str().unwrap(), "--data", &data, "--x", "0.1,0.2,0.3", "--t", "1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let tight = text.replacen("\"target_rel_err\":1e-8", "\"target_rel_err\":1e-13", 1);
    if tight == text {
        return Err("manifest does not carry the default target".into());
    }
    let edited = write(d, "tight.csv", &tight);
    expect("quadrature", 4, run(&["replay", edited.to_str().unwrap()]))?;

    Ok(format!("6 replays identical; exit codes {}", codes.join(" ")))
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "mass identity", limit: Some(Duration::from_secs(5)), run: mass_identity },
        Criterion { id: 2, title: "kernel solves the PDE", limit: Some(Duration::from_secs(10)), run: pde_residual },
        Criterion { id: 3, title: "Hoelder duality vs oracle", limit: Some(Duration::from_secs(30)), run: kernel_duality },
        Criterion { id: 4, title: "space-time duality", limit: Some(Duration::from_secs(60)), run: spacetime_duality },
        Criterion { id: 5, title: "sharpness attainment", limit: Some(Duration::from_secs(60)), run: attainment },
        Criterion { id: 6, title: "special-case values", limit: None, run: special_cases },
        Criterion { id: 7, title: "b-invariance", limit: None, run: b_invariance },
        Criterion { id: 8, title: "constant source", limit: None, run: constant_source },
        Criterion { id: 9, title: "bound domination", limit: None, run: bound_domination },
        Criterion { id: 10, title: "CLI round-trip and exit codes", limit: None, run: cli_round_trip },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut verdict = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(msg), Some(limit)) = (&verdict, c.limit) {
            if elapsed > limit {
                verdict = Err(format!("{msg}, but took {elapsed:.1?} (limit {limit:?})"));
            }
        }
        match verdict {
            Ok(msg) => println!("criterion {:>2} PASS  {:<32} {msg} ({elapsed:.2?})", c.id, c.title),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {:<32} {msg} ({elapsed:.2?})", c.id, c.title);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
