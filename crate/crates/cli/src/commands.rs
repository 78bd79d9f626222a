use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde_json::{json, Value};

use gaugegap::blocks::{build_block, oracle_comparison, SectorLabel};
use gaugegap::cheeger::{nu_bound, sign_cut_bound, stabilizer_crossings, NuStrategy, EXHAUSTIVE_NU_CAP};
use gaugegap::code::{load_code, CssCode, Model, Permutation};
use gaugegap::decompose::{decompose, verify, LstrDecomposition};
use gaugegap::eigen::{dense_spectrum, topk_symmetric, EigenConfig, EigenError, SymmetricOperator};
use gaugegap::gapsearch::{
    perron_diagnostics, protofact_check, spectral_gap, GapOptions, SectorSolver, StabilizerBasis, SweepMode,
};
use gaugegap::ideals::partition_ideals_with;

use crate::cache::{Cache, SolverParams};
use crate::config::Settings;
use crate::error::CliError;
use crate::{BasisArg, CodeArgs, Command, GapArgs};

/// Largest sector block (in index bits) that `cheeger` densifies.
const CHEEGER_BITS_CAP: usize = 12;
/// Largest Γ component the Perron diagnostics assemble.
const PERRON_BITS_CAP: usize = 14;
const ORACLE_TOL: f64 = 1e-9;

pub enum Output {
    Json(Value),
    Text(String),
}

/// A result to print, plus an error to report after printing it.
pub struct Outcome {
    pub output: Output,
    pub deferred: Option<CliError>,
}

impl From<Output> for Outcome {
    fn from(output: Output) -> Self {
        Self { output, deferred: None }
    }
}

pub struct Context {
    pub settings: Settings,
    pub csv: bool,
    pub quiet: bool,
    pub cache: Cache,
}

impl Context {
    pub fn new(settings: Settings, csv: bool, quiet: bool) -> Self {
        let dir = if settings.use_cache { settings.cache_dir.clone() } else { None };
        Self { settings, csv, quiet, cache: Cache::new(dir) }
    }

    fn progress(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("gaugegap: {}", msg.as_ref());
        }
    }

    fn solver_params(&self) -> SolverParams {
        SolverParams { tol: self.settings.tol, seed: self.settings.seed, max_matvecs: self.settings.max_matvecs }
    }
}

struct LoadedCode {
    code: CssCode,
    text: String,
    duality: Option<Permutation>,
}

fn load(args: &CodeArgs) -> Result<LoadedCode, CliError> {
    let model = args.model.as_deref().map(Model::from_str).transpose()?;
    if let Some(path) = &args.file {
        let code = load_code(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let text = std::fs::read_to_string(path)?;
        // a self-dual file is witnessed by the identity
        let duality = code.is_self_dual().then(|| Permutation::identity(code.n));
        return Ok(LoadedCode { code, text, duality });
    }
    let model = model.ok_or_else(|| CliError::Input("give --model (with --size) or --file".into()))?;
    let size = match (args.size, model) {
        (Some(s), _) => s,
        (None, Model::Gcc) => 15,
        (None, _) => return Err(CliError::Input(format!("--size is required for {}", model.name()))),
    };
    let code = model.build(size)?;
    let text = code.to_text();
    let duality = model.duality(size);
    Ok(LoadedCode { code, text, duality })
}

fn parse_sector(s: Option<&str>, dec: &LstrDecomposition) -> Result<SectorLabel, CliError> {
    let label = match s {
        None => SectorLabel::zero_for(dec),
        Some(s) => SectorLabel::from_str(s)?,
    };
    label.check(dec)?;
    Ok(label)
}

fn read_permutations(path: &Path, n: usize) -> Result<Vec<Permutation>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Permutation::parse_list(&text, n)?)
}

fn rows(m: &gaugegap::BitMatrix) -> Vec<String> {
    m.iter_rows().map(|r| r.to_string()).collect()
}

pub fn dispatch(ctx: &Context, command: &Command) -> Result<Outcome, CliError> {
    Ok(match command {
        Command::Models => models(ctx)?.into(),
        Command::Decompose { code, text } => cmd_decompose(code, *text)?.into(),
        Command::Spectrum { code, sector, k, no_ideals } => {
            spectrum(ctx, code, sector.as_deref(), *k, *no_ideals)?.into()
        }
        Command::Gap { code, gap, check_protofact } => cmd_gap(ctx, code, gap, *check_protofact)?,
        Command::Gapscan { model, sizes, gap } => gapscan(ctx, model, sizes, gap)?,
        Command::Ideals { code } => ideals(ctx, code)?.into(),
        Command::Verify { code, oracle, perron } => cmd_verify(ctx, code, *oracle, *perron)?,
        Command::Cheeger { double_well, code, sector, crossings } => {
            cheeger(*double_well, code, sector.as_deref(), *crossings)?.into()
        }
        Command::Bench { code, sector, applies } => bench(ctx, code, sector.as_deref(), *applies)?.into(),
    })
}

fn csv_text(header: &[&str], records: Vec<Vec<String>>) -> Result<Output, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Internal(e.to_string()))?;
    for r in records {
        w.write_record(&r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Output::Text(String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))?))
}

fn models(ctx: &Context) -> Result<Output, CliError> {
    let list: Vec<Value> = Model::ALL
        .iter()
        .map(|m| json!({ "name": m.name(), "size": m.size_meaning(), "has_duality": m.duality(4).is_some() }))
        .collect();
    if ctx.csv {
        let recs = Model::ALL.iter().map(|m| vec![m.name().to_string(), m.size_meaning().to_string()]).collect();
        return csv_text(&["name", "size"], recs);
    }
    Ok(Output::Json(json!({ "models": list })))
}

fn cmd_decompose(args: &CodeArgs, text: bool) -> Result<Output, CliError> {
    let loaded = load(args)?;
    let dec = decompose(&loaded.code)?;
    let mats = [
        ("L_X", &dec.l_x),
        ("L_Z", &dec.l_z),
        ("S_X", &dec.s_x),
        ("S_Z", &dec.s_z),
        ("T_X", &dec.t_x),
        ("T_Z", &dec.t_z),
        ("R_X", &dec.r_x),
        ("R_Z", &dec.r_z),
    ];
    let d = dec.dims();
    let summary = json!({ "k": d.k, "m_x": d.m_x, "m_z": d.m_z, "r": d.r });
    if text {
        let mut out = String::new();
        for (name, m) in mats {
            for r in rows(m) {
                out.push_str(&format!("{name} {r}\n"));
            }
        }
        out.push_str(&summary.to_string());
        out.push('\n');
        return Ok(Output::Text(out));
    }
    let matrices: serde_json::Map<String, Value> = mats.iter().map(|(n, m)| (n.to_string(), json!(rows(m)))).collect();
    Ok(Output::Json(json!({
        "code": loaded.code.name,
        "n": loaded.code.n,
        "summary": summary,
        "matrices": matrices,
        "verified": verify(&dec, &loaded.code).passed(),
    })))
}

fn spectrum(ctx: &Context, args: &CodeArgs, sector: Option<&str>, k: usize, no_ideals: bool) -> Result<Output, CliError> {
    let loaded = load(args)?;
    let dec = decompose(&loaded.code)?;
    let label = parse_sector(sector, &dec)?;
    let params = BTreeMap::from([
        ("sector".to_string(), json!(label.to_string())),
        ("k".to_string(), json!(k)),
        ("use_ideals".to_string(), json!(!no_ideals)),
    ]);
    let (record, hit) = ctx.cache.run(&loaded.text, "spectrum", params, ctx.solver_params(), || {
        let solver = SectorSolver::new(&loaded.code, ctx.settings.eigen(), !no_ideals)?;
        ctx.progress(format!("{}: sector {label}, block 2^{}", loaded.code.name, dec.r()));
        let v = solver.solve::<f64>(&label, k)?;
        Ok(json!({
            "code": loaded.code.name,
            "n": loaded.code.n,
            "sector": label.to_string(),
            "bits": dec.r(),
            "dimension": 1u64 << dec.r(),
            "k": k,
            "values": v.values,
            "max_residual": v.residual,
            "iterations": v.iterations,
            "ideals": solver.ideals(),
        }))
    })?;
    if hit {
        ctx.progress("cache hit");
    }
    Ok(Output::Json(serde_json::to_value(record)?))
}

fn gap_options(args: &GapArgs, loaded: &LoadedCode, eigen: EigenConfig) -> Result<GapOptions, CliError> {
    let mut o = GapOptions::new();
    o.mode = if args.full_sweep { SweepMode::FullSweep } else { SweepMode::SingleFrustration };
    o.basis = match args.basis {
        BasisArg::Natural => StabilizerBasis::Natural,
        BasisArg::MinWeight => StabilizerBasis::MinWeight,
        BasisArg::Echelon => StabilizerBasis::Echelon,
    };
    if let Some(p) = &args.sym {
        o.symmetries = read_permutations(p, loaded.code.n)?;
    }
    o.duality = match &args.duality {
        Some(p) => {
            let mut perms = read_permutations(p, loaded.code.n)?;
            if perms.len() != 1 {
                return Err(CliError::Input(format!("{}: expected exactly one permutation", p.display())));
            }
            perms.pop()
        }
        None => loaded.duality.clone(),
    };
    o.use_ideals = !args.no_ideals;
    o.eigen = eigen;
    Ok(o)
}

fn gap_params(args: &GapArgs, options: &GapOptions, protofact: bool) -> BTreeMap<String, Value> {
    let perms = |ps: &[Permutation]| ps.iter().map(|p| json!(p.image())).collect::<Vec<_>>();
    BTreeMap::from([
        ("full_sweep".to_string(), json!(args.full_sweep)),
        ("basis".to_string(), json!(options.basis)),
        ("symmetries".to_string(), json!(perms(&options.symmetries))),
        ("duality".to_string(), json!(options.duality.as_ref().map(|p| p.image().to_vec()))),
        ("use_ideals".to_string(), json!(options.use_ideals)),
        ("check_protofact".to_string(), json!(protofact)),
    ])
}

/// Runs (or fetches) one gap record. The returned error, if any, reports
/// sectors that failed to converge; the record is still valid.
fn gap_record(
    ctx: &Context,
    loaded: &LoadedCode,
    args: &GapArgs,
    protofact: bool,
) -> Result<(Value, Option<CliError>), CliError> {
    let options = gap_options(args, loaded, ctx.settings.eigen())?;
    let params = gap_params(args, &options, protofact);
    let (record, hit) = ctx.cache.run(&loaded.text, "gap", params, ctx.solver_params(), || {
        let dec = decompose(&loaded.code)?;
        ctx.progress(format!(
            "{}: n={} k={} m_x={} m_z={} r={}, searching sectors",
            loaded.code.name,
            loaded.code.n,
            dec.k(),
            dec.m_x(),
            dec.m_z(),
            dec.r()
        ));
        let report = spectral_gap::<f64>(&loaded.code, &options)?;
        let mut v = serde_json::to_value(&report)?;
        if protofact {
            let p = protofact_check(&loaded.code, ctx.settings.tol)?;
            v["protofact"] = serde_json::to_value(p)?;
        }
        Ok(v)
    })?;
    if hit {
        ctx.progress(format!("{}: cache hit", loaded.code.name));
    }
    let failed: Vec<String> = record.payload["candidates"]
        .as_array()
        .map(|cs| {
            cs.iter()
                .filter(|c| !c["error"].is_null())
                .map(|c| format!("{}: {}", c["sector"].as_str().unwrap_or("?"), c["error"]["message"]))
                .collect()
        })
        .unwrap_or_default();
    let deferred = (!failed.is_empty()).then(|| CliError::Convergence(format!("sectors failed: {}", failed.join("; "))));
    Ok((serde_json::to_value(record)?, deferred))
}

fn fmt6(v: &Value) -> String {
    v.as_f64().map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One row per λ2 candidate; the gap column is filled on the argmin row.
fn gap_csv_rows(record: &Value) -> Vec<Vec<String>> {
    let p = &record["payload"];
    let n = p["dims"]["n"].to_string();
    let argmin = p["argmin"].as_u64();
    let cands = p["candidates"].as_array().cloned().unwrap_or_default();
    cands
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let is_argmin = argmin == Some(i as u64);
            let w = if c["kind"] == "second-of-ground-sector" { String::new() } else { c["w_frustrated"].to_string() };
            vec![
                n.clone(),
                c["sector"].as_str().unwrap_or_default().to_string(),
                w,
                fmt6(&c["value"]),
                is_argmin.to_string(),
                if is_argmin { fmt6(&p["gap"]) } else { String::new() },
            ]
        })
        .collect()
}

const GAP_CSV_HEADER: [&str; 6] = ["n", "sector", "w_sZ", "lambda", "is_argmin", "gap"];

fn cmd_gap(ctx: &Context, args: &CodeArgs, gap: &GapArgs, protofact: bool) -> Result<Outcome, CliError> {
    let loaded = load(args)?;
    let (record, deferred) = gap_record(ctx, &loaded, gap, protofact)?;
    let output = if ctx.csv { csv_text(&GAP_CSV_HEADER, gap_csv_rows(&record))? } else { Output::Json(record) };
    Ok(Outcome { output, deferred })
}

fn gapscan(ctx: &Context, model: &str, sizes: &[usize], gap: &GapArgs) -> Result<Outcome, CliError> {
    let mut rows_out = Vec::new();
    let mut failures = Vec::new();
    for &size in sizes {
        let args = CodeArgs { model: Some(model.to_string()), size: Some(size), file: None };
        let loaded = load(&args)?;
        let (record, deferred) = gap_record(ctx, &loaded, gap, false)?;
        if let Some(e) = deferred {
            failures.push(format!("size {size}: {e}"));
        }
        let p = &record["payload"];
        rows_out.push(json!({
            "model": model,
            "size": size,
            "n": p["dims"]["n"],
            "gap": p["gap"],
            "lambda1": p["lambda1"],
        }));
    }
    let deferred = (!failures.is_empty()).then(|| CliError::Convergence(failures.join("; ")));
    let output = if ctx.csv {
        let recs = rows_out
            .iter()
            .map(|r| vec![r["model"].as_str().unwrap_or_default().to_string(), r["n"].to_string(), fmt6(&r["gap"])])
            .collect();
        csv_text(&["model", "n", "gap"], recs)?
    } else {
        Output::Json(json!({ "model": model, "rows": rows_out }))
    };
    Ok(Outcome { output, deferred })
}

fn ideals(ctx: &Context, args: &CodeArgs) -> Result<Output, CliError> {
    let loaded = load(args)?;
    let dec = decompose(&loaded.code)?;
    let p = partition_ideals_with::<f64>(&loaded.code, &dec).map_err(|e| CliError::Internal(e.to_string()))?;
    let nx = loaded.code.g_x.rows();
    let parts: Vec<Value> = p
        .parts
        .iter()
        .zip(&p.decs)
        .map(|(gens, d)| {
            let dims = d.dims();
            json!({
                "generators": gens.len(),
                "x_generators": gens.iter().filter(|&&g| g < nx).count(),
                "z_generators": gens.iter().filter(|&&g| g >= nx).count(),
                "k": dims.k, "m_x": dims.m_x, "m_z": dims.m_z, "r": dims.r,
            })
        })
        .collect();
    if ctx.csv {
        let recs = parts
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut r = vec![i.to_string()];
                r.extend(["generators", "k", "m_x", "m_z", "r"].iter().map(|k| v[*k].to_string()));
                r
            })
            .collect();
        return csv_text(&["part", "generators", "k", "m_x", "m_z", "r"], recs);
    }
    Ok(Output::Json(json!({
        "code": loaded.code.name,
        "dims": dec.dims(),
        "count": p.len(),
        "parts": parts,
    })))
}

fn cmd_verify(ctx: &Context, args: &CodeArgs, oracle: bool, perron: bool) -> Result<Outcome, CliError> {
    let loaded = load(args)?;
    let dec = decompose(&loaded.code)?;
    let report = verify(&dec, &loaded.code);
    let mut ok = report.passed();
    let mut out = json!({
        "code": loaded.code.name,
        "dims": dec.dims(),
        "decomposition": report,
    });
    if oracle {
        ctx.progress(format!("{}: dense oracle on 2^{} states", loaded.code.name, loaded.code.n));
        let o = oracle_comparison(&loaded.code, &dec)?;
        let agrees = o.agrees(ORACLE_TOL);
        ok &= agrees;
        out["oracle"] = json!({
            "dimension": o.dimension,
            "sectors": o.sectors,
            "max_abs_diff": o.max_abs_diff,
            "tolerance": ORACLE_TOL,
            "passed": agrees,
        });
    }
    if perron {
        let p = perron_diagnostics(&loaded.code, PERRON_BITS_CAP)?;
        ok &= p.passed();
        out["perron"] = serde_json::to_value(p)?;
    }
    out["passed"] = json!(ok);
    let deferred = (!ok).then(|| CliError::CheckFailed(format!("{}: verification failed", loaded.code.name)));
    Ok(Outcome { output: Output::Json(out), deferred })
}

fn cheeger(double_well: Option<usize>, args: &CodeArgs, sector: Option<&str>, crossings: bool) -> Result<Output, CliError> {
    let (source, m, extra) = match double_well {
        Some(d) => (json!({ "double_well": d }), gaugegap::cheeger::double_well::<f64>(d)?, Value::Null),
        None => {
            let loaded = load(args)?;
            let dec = decompose(&loaded.code)?;
            let label = parse_sector(sector, &dec)?;
            if dec.r() > CHEEGER_BITS_CAP {
                return Err(CliError::Input(format!(
                    "block has 2^{} states; cheeger densifies at most 2^{CHEEGER_BITS_CAP}",
                    dec.r()
                )));
            }
            let extra = if crossings {
                serde_json::to_value(stabilizer_crossings(&loaded.code, &dec, &label.t_x)?)?
            } else {
                Value::Null
            };
            let block = build_block::<f64>(&loaded.code, &dec, &label)?;
            (json!({ "code": loaded.code.name, "sector": label.to_string() }), block.dense()?, extra)
        }
    };
    let dim = m.dim();
    if dim < 2 {
        return Err(CliError::Input("cut bounds need at least two basis states".into()));
    }
    let eigs = dense_spectrum(&m).map_err(|e| CliError::Internal(e.to_string()))?;
    let (cut, variational) = sign_cut_bound(&m)?;
    let strategy = if dim <= EXHAUSTIVE_NU_CAP { NuStrategy::Exhaustive } else { NuStrategy::SignCutLocalSearch };
    let nu = nu_bound(&m, strategy)?;
    let mut out = json!({
        "source": source,
        "dimension": dim,
        "lambda1": eigs[dim - 1],
        "lambda2": eigs[dim - 2],
        "sign_cut": { "sides": cut.side_sizes(), "zeros": cut.zeros },
        "variational": variational,
        "nu": nu,
    });
    if !extra.is_null() {
        out["crossings"] = extra;
    }
    Ok(Output::Json(out))
}

fn bench(ctx: &Context, args: &CodeArgs, sector: Option<&str>, applies: usize) -> Result<Output, CliError> {
    let loaded = load(args)?;
    let t = Instant::now();
    let dec = decompose(&loaded.code)?;
    let t_decompose = t.elapsed().as_secs_f64();
    let label = parse_sector(sector, &dec)?;
    let t = Instant::now();
    let block = build_block::<f64>(&loaded.code, &dec, &label)?;
    let t_build = t.elapsed().as_secs_f64();
    let dim = block.dimension();
    let x = vec![1.0f64; dim];
    let mut y = vec![0.0f64; dim];
    let t = Instant::now();
    for _ in 0..applies {
        block.apply_into(&x, &mut y);
    }
    let per_apply = t.elapsed().as_secs_f64() / applies.max(1) as f64;
    ctx.progress(format!("{}: top solve on 2^{} states", loaded.code.name, dec.r()));
    let t = Instant::now();
    let cfg = EigenConfig { k: 1, ..ctx.settings.eigen() };
    let solve = topk_symmetric(&block, &cfg).map_err(|e: EigenError<f64>| match e {
        EigenError::NoConvergence { .. } => CliError::Convergence(e.to_string()),
        _ => CliError::Input(e.to_string()),
    })?;
    let t_solve = t.elapsed().as_secs_f64();
    Ok(Output::Json(json!({
        "code": loaded.code.name,
        "sector": label.to_string(),
        "dimension": dim,
        "threads": rayon::current_num_threads(),
        "decompose_s": t_decompose,
        "build_s": t_build,
        "apply_s": per_apply,
        "applies_per_s": if per_apply > 0.0 { 1.0 / per_apply } else { f64::INFINITY },
        "solve_s": t_solve,
        "solve_matvecs": solve.iterations,
        "lambda1": solve.values[0],
    })))
}
