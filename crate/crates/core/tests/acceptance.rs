//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 5 (the 27-qubit 3D compass model) takes several minutes and
//! only runs when `GAUGEGAP_EXTENDED=1`; otherwise its line reads SKIP.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gaugegap::blocks::{build_block, oracle_comparison, SectorLabel};
use gaugegap::cheeger::{double_well, nu_bound, sign_cut_bound, NuStrategy};
use gaugegap::code::{self, CssCode, Model};
use gaugegap::eigen::{dense_spectrum, EigenConfig, SymMatrix};
use gaugegap::gapsearch::{perron_diagnostics, spectral_gap, CandidateKind, GapOptions, GapReport};
use gaugegap::ideals::{partition_ideals, sector_spectrum_via_ideals};
use gaugegap::{decompose, verify};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name} = {got:.6}, expected {want} ± {tol}"))
}

fn within(name: &str, elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed <= budget, || format!("{name} took {elapsed:.1?}, budget {budget:?}"))
}

fn ex2() -> CssCode {
    CssCode::from_strs("ex2", &["110", "011"], &["111"]).unwrap()
}

fn ex3() -> CssCode {
    CssCode::from_strs("ex3", &["1100", "0011"], &["1010", "0101"]).unwrap()
}

fn small_codes() -> Vec<CssCode> {
    let mut codes: Vec<CssCode> = (3..=10).map(|n| code::ising_1d(n).unwrap()).collect();
    codes.extend([4, 6, 8].map(|n| code::xy_1d(n).unwrap()));
    codes.push(code::compass_2d(3).unwrap());
    codes.push(code::xy_plaquette_2d(2).unwrap());
    codes.push(ex2());
    codes.push(ex3());
    codes
}

fn gap_report(model: Model, size: usize) -> Result<GapReport<f64>, String> {
    let c = model.build(size).map_err(|e| e.to_string())?;
    let mut o = GapOptions::new();
    o.duality = model.duality(size);
    let report = spectral_gap::<f64>(&c, &o).map_err(|e| e.to_string())?;
    ensure(report.failed().next().is_none(), || format!("{}: a sector solve failed", c.name))?;
    Ok(report)
}

fn gap_of(r: &GapReport<f64>) -> Result<f64, String> {
    r.gap.ok_or_else(|| format!("{}: no gap", r.code))
}

fn argmin_w(r: &GapReport<f64>) -> usize {
    r.argmin_candidate().map_or(usize::MAX, |c| c.w_frustrated)
}

fn second_of_ground(r: &GapReport<f64>) -> Option<f64> {
    r.candidates.iter().find(|c| c.kind == CandidateKind::SecondOfGroundSector).and_then(|c| c.value)
}

fn check_table(
    r: &GapReport<f64>,
    lambda1: f64,
    gap: f64,
    w: usize,
    tol: f64,
) -> Result<(), String> {
    close("λ1", r.lambda1, lambda1, tol)?;
    close("gap", gap_of(r)?, gap, tol)?;
    ensure(argmin_w(r) == w, || format!("argmin w = {}, expected {w}", argmin_w(r)))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for c in small_codes() {
        let dec = decompose(&c).map_err(|e| e.to_string())?;
        let cmp = oracle_comparison(&c, &dec).map_err(|e| e.to_string())?;
        ensure(cmp.agrees(1e-9), || format!("{}: max |Δ| = {:.2e}", c.name, cmp.max_abs_diff))?;
        worst = worst.max(cmp.max_abs_diff);
    }
    within("oracle suite", start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{} codes, max |Δ| = {worst:.1e}, {:.1?}", small_codes().len(), start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let r = gap_report(Model::Compass2d, 4)?;
    check_table(&r, 19.012903, 0.643603, 8, 1e-4)?;
    close("λ2(H00)", second_of_ground(&r).unwrap_or(f64::NAN), 16.335705, 1e-4)?;
    let best = r.argmin_candidate().and_then(|c| c.value).unwrap_or(f64::NAN);
    close("best frustrated", best, 18.369300, 1e-4)?;
    let t16 = start.elapsed();
    within("n=16", t16, Duration::from_secs(60))?;

    let start = Instant::now();
    let r = gap_report(Model::Compass2d, 5)?;
    check_table(&r, 29.076200, 0.452196, 10, 1e-4)?;
    let t25 = start.elapsed();
    within("n=25", t25, Duration::from_secs(600))?;
    Ok(format!("n=16 in {t16:.1?}, n=25 in {t25:.1?}"))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for (size, l1, l2, gap, w) in [(4, 22.627417, Some(11.313708), 3.31371, 8), (6, 44.8444102, None, 1.93021, 12)] {
        let start = Instant::now();
        let r = gap_report(Model::XyPlaquette, size)?;
        check_table(&r, l1, gap, w, 1e-4)?;
        if let Some(l2) = l2 {
            close("λ2(H00)", second_of_ground(&r).unwrap_or(f64::NAN), l2, 1e-4)?;
        }
        ensure(r.meta.ideals == 4, || format!("{} ideals, expected 4", r.meta.ideals))?;
        within("xy-plaquette", start.elapsed(), Duration::from_secs(300))?;
        notes.push(format!("n={} in {:.1?}", size * size, start.elapsed()));
    }
    Ok(notes.join(", "))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let r = gap_report(Model::Gcc, 15)?;
    check_table(&r, 25.455844, 3.241089, 8, 1e-4)?;
    let best = r.argmin_candidate().and_then(|c| c.value).unwrap_or(f64::NAN);
    close("candidate", best, 22.214755, 1e-4)?;
    ensure(r.meta.ideals == 6, || format!("{} ideals, expected 6", r.meta.ideals))?;
    within("gcc15", start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("six ideals, {:.1?}", start.elapsed()))
}

fn criterion_5() -> Option<Outcome> {
    if std::env::var("GAUGEGAP_EXTENDED").map_or(true, |v| v != "1") {
        return None;
    }
    Some((|| {
        let start = Instant::now();
        let r = gap_report(Model::Compass3d, 3)?;
        check_table(&r, 60.295471, 0.53779, 18, 1e-3)?;
        within("compass3d", start.elapsed(), Duration::from_secs(3600))?;
        Ok(format!("{:.1?}", start.elapsed()))
    })())
}

fn criterion_6() -> Outcome {
    let mut executed = 0;
    for c in small_codes() {
        let rep = perron_diagnostics(&c, 14).map_err(|e| e.to_string())?;
        if let Some(bad) = rep.checks.iter().find(|k| k.passed == Some(false)) {
            return Err(format!("{}: {} ({})", c.name, bad.name, bad.detail));
        }
        executed += rep.checks.iter().filter(|k| k.passed.is_some()).count();
    }
    Ok(format!("{executed} checks executed, none failed"))
}

fn criterion_7() -> Outcome {
    let cfg = EigenConfig::default();
    let mut counts = Vec::new();
    for (c, expected) in [
        (code::xy_1d(8).unwrap(), Some(2)),
        (code::xy_plaquette_2d(2).unwrap(), None),
        (code::xy_plaquette_2d(4).unwrap(), Some(4)),
        (ex3(), None),
        (code::gauge_color_code_15(), Some(6)),
    ] {
        let part = partition_ideals::<f64>(&c).map_err(|e| e.to_string())?;
        if let Some(e) = expected {
            ensure(part.len() == e, || format!("{}: {} ideals, expected {e}", c.name, part.len()))?;
        }
        counts.push(format!("{}:{}", c.name, part.len()));
        let dec = decompose(&c).map_err(|e| e.to_string())?;
        if dec.m_x() + dec.m_z() > 10 || dec.r() > 10 {
            continue;
        }
        for s in SectorLabel::all(dec.m_x(), dec.m_z()) {
            let block = build_block::<f64>(&c, &dec, &s).map_err(|e| e.to_string())?;
            let mut direct = dense_spectrum(&block.dense().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            direct.reverse();
            let via = sector_spectrum_via_ideals::<f64>(&part, &dec, &s, direct.len(), &cfg)
                .map_err(|e| e.to_string())?;
            let diff = via.values.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(via.values.len() == direct.len() && diff <= 1e-8, || {
                format!("{}: sector mismatch {diff:.2e}", c.name)
            })?;
        }
    }
    Ok(format!("ideal counts {}", counts.join(" ")))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for model in [Model::Ising1d, Model::Xy1d] {
        let gaps = [6, 8, 10, 12]
            .into_iter()
            .map(|n| gap_report(model, n).and_then(|r| gap_of(&r)))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(strictly_decreasing(&gaps), || format!("{}: gaps {gaps:?} not decreasing", model.name()))?;
        notes.push(format!("{} {:.4}→{:.4}", model.name(), gaps[0], gaps[3]));
    }
    let mut dw = Vec::new();
    for d in [8, 16, 32, 64] {
        let m = double_well::<f64>(d).map_err(|e| e.to_string())?;
        let eigs = dense_spectrum(&m).map_err(|e| e.to_string())?;
        dw.push((eigs[d - 1], eigs[d - 1] - eigs[d - 2]));
    }
    let gaps: Vec<f64> = dw.iter().map(|p| p.1).collect();
    ensure(strictly_decreasing(&gaps), || format!("double well gaps {gaps:?} not decreasing"))?;
    ensure(gaps[3] < 0.01, || format!("double well gap(64) = {:.3e}", gaps[3]))?;
    ensure((2.45..=2.51).contains(&dw[2].0), || format!("λ1(dw32) = {}", dw[2].0))?;
    notes.push(format!("double well gap(64) = {:.2e}, λ1(32) = {:.6}", gaps[3], dw[2].0));
    Ok(notes.join("; "))
}

fn random_stoquastic(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix<f64> {
    let mut m = SymMatrix::zeros(d);
    for i in 0..d {
        m.set(i, i, rng.gen_range(-2.0..2.0));
        for j in i + 1..d {
            if rng.gen_bool(0.5) {
                m.set_sym(i, j, rng.gen_range(0.0..1.0));
            }
        }
    }
    m
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..20 {
        let m = random_stoquastic(&mut rng, 10);
        let eigs = dense_spectrum(&m).map_err(|e| e.to_string())?;
        let (l1, l2) = (eigs[9], eigs[8]);
        let nu = nu_bound(&m, NuStrategy::Exhaustive).map_err(|e| e.to_string())?;
        let nu = nu.nu_value.unwrap_or(f64::NAN);
        ensure(l2 - 1e-8 <= nu && nu <= l1 + 1e-8, || {
            format!("trial {trial}: ν = {nu}, λ2 = {l2}, λ1 = {l1}")
        })?;
        let (_, bound) = sign_cut_bound(&m).map_err(|e| e.to_string())?;
        if let Some(q) = bound.rayleigh_value {
            ensure(q <= l2 + 1e-8, || format!("trial {trial}: rayleigh {q} > λ2 {l2}"))?;
        }
    }
    Ok("20 matrices of dimension 10".into())
}

fn criterion_10() -> Outcome {
    let mut cases: Vec<(CssCode, Option<usize>)> = Vec::new();
    cases.extend((3..=16).map(|n| (code::ising_1d(n).unwrap(), Some(1))));
    cases.extend((4..=16).step_by(2).map(|n| (code::xy_1d(n).unwrap(), Some(2))));
    cases.extend((2..=7).map(|l| (code::compass_2d(l).unwrap(), Some(2 * (l - 1)))));
    cases.extend([2, 4, 6].map(|l| (code::xy_plaquette_2d(l).unwrap(), Some(2 * (2 * l - 3)))));
    cases.extend((2..=3).map(|l| (code::compass_3d(l).unwrap(), None)));
    cases.push((code::gauge_color_code_15(), None));
    cases.push((ex2(), None));
    cases.push((ex3(), None));
    for (c, m) in &cases {
        let dec = decompose(c).map_err(|e| format!("{}: {e}", c.name))?;
        let rep = verify(&dec, c);
        ensure(rep.passed(), || format!("{}: {rep}", c.name))?;
        let d = dec.dims();
        ensure(d.n == d.k + d.m_x + d.m_z + d.r, || format!("{}: {d:?}", c.name))?;
        if let Some(m) = m {
            ensure(d.m_x + d.m_z == *m, || format!("{}: m = {}, expected {m}", c.name, d.m_x + d.m_z))?;
        }
    }
    Ok(format!("{} codes", cases.len()))
}

type Criterion = (&'static str, Box<dyn Fn() -> Option<Outcome>>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(|| Some(criterion_1()))),
        ("2D compass table", Box::new(|| Some(criterion_2()))),
        ("2D XY-plaquette table", Box::new(|| Some(criterion_3()))),
        ("gauge color code n=15 table", Box::new(|| Some(criterion_4()))),
        ("3D compass n=27 table", Box::new(criterion_5)),
        ("Perron-Frobenius suite", Box::new(|| Some(criterion_6()))),
        ("ideal recombination", Box::new(|| Some(criterion_7()))),
        ("gapless trends", Box::new(|| Some(criterion_8()))),
        ("cut-bound sandwich", Box::new(|| Some(criterion_9()))),
        ("decomposition invariants", Box::new(|| Some(criterion_10()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = match run() {
            None => Verdict::Skip("extended; set GAUGEGAP_EXTENDED=1".into()),
            Some(Ok(s)) => Verdict::Pass(s),
            Some(Err(s)) => Verdict::Fail(s),
        };
        let (tag, detail) = match verdict {
            Verdict::Pass(s) => ("PASS", s),
            Verdict::Fail(s) => {
                failed += 1;
                ("FAIL", s)
            }
            Verdict::Skip(s) => ("SKIP", s),
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
