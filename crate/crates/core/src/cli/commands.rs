use std::path::{Path, PathBuf};

use super::manifest::{manifest_path_for_dir, manifest_path_for_file, FileHash, RunManifest};
use super::{
    Command, CompareArgs, EvalArgs, GenDataArgs, PatternArgs, ReplayArgs, ReproArgs, SplitArgs,
    TrainArgs,
};
use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::evaluation::{self, EvalReport};
use crate::fsutil;
use crate::physics::{self, AngleGrid, RisConfig};
use crate::probing::{self, DEFAULT_SECTORS, DEFAULT_SPAN};
use crate::regressors::{self, Hyperparams, RegressorKind, RegressorSpec, TrainedModel};
use crate::seed;

/// Grid and angle used by `repro` for the pattern comparison.
const REPRO_THETA_DEG: f64 = 52.0;
const REPRO_GRID: &str = "0:90:0.5";

pub(super) fn run(cmd: &Command) -> Result<()> {
    execute(cmd).map(|_| ())
}

fn execute(cmd: &Command) -> Result<RunManifest> {
    match cmd {
        Command::Pattern(a) => pattern(a),
        Command::GenData(a) => gen_data(a),
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Repro(a) => repro(a),
        Command::Replay(a) => replay(a),
    }
}

fn load_config(path: Option<&Path>) -> Result<RisConfig> {
    match path {
        Some(p) => RisConfig::load(p),
        None => Ok(RisConfig::default()),
    }
}

/// Loads a dataset CSV, taking the sector count from its header.
fn load_dataset(path: &Path) -> Result<(Dataset, usize)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().next().unwrap_or("");
    let n_sectors = header.split(',').count().saturating_sub(1);
    if n_sectors == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unrecognized header `{header}`"),
        });
    }
    Ok((dataset::load_csv(path, n_sectors)?, n_sectors))
}

/// Model files in `dir`, sorted by file name. Manifests are skipped.
fn load_models(dir: &Path) -> Result<Vec<TrainedModel>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if path.is_file()
            && name.ends_with(".json")
            && !name.ends_with(".manifest.json")
            && name != "manifest.json"
        {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(Error::invalid(format!(
            "no model files in {}",
            dir.display()
        )));
    }
    paths.sort();
    paths.iter().map(|p| TrainedModel::load(p)).collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fsutil::write_atomic(path, text.as_bytes())
}

fn pattern(a: &PatternArgs) -> Result<RunManifest> {
    let cfg = load_config(a.config.as_deref())?;
    let grid: AngleGrid = a.grid.parse()?;
    let profile = physics::steering_phase_profile(&cfg, a.steer, cfg.phi_r_deg)?;
    let trace = physics::radiation_pattern(&cfg, &profile, &grid)?;
    write_text(&a.out, &trace.to_csv_string())?;
    let peak = physics::peak_angle(&trace)?;
    println!(
        "wrote {} ({} points, peak {peak} deg)",
        a.out.display(),
        trace.len()
    );
    let mut m =
        RunManifest::new(Command::Pattern(a.clone())).with_config(a.config.as_deref(), &cfg);
    if let Some(c) = &a.config {
        m.inputs.push(FileHash::of(c)?);
    }
    m.outputs.push(FileHash::of(&a.out)?);
    m.write(&manifest_path_for_file(&a.out))?;
    Ok(m)
}

fn gen_data(a: &GenDataArgs) -> Result<RunManifest> {
    let cfg = load_config(a.config.as_deref())?;
    let cb = probing::build_sector_codebook(&cfg, a.sectors, DEFAULT_SPAN)?;
    let data_seed = seed::stage_seed(a.seed, "gen-data");
    let ds = dataset::generate_dataset(&cfg, &cb, a.step, a.repeats, a.sigma, data_seed)?;
    dataset::save_csv(&ds, &a.out, a.sectors)?;
    println!("wrote {} ({} samples)", a.out.display(), ds.len());
    let mut m =
        RunManifest::new(Command::GenData(a.clone())).with_config(a.config.as_deref(), &cfg);
    m.seeds.insert("gen-data".into(), data_seed);
    if let Some(c) = &a.config {
        m.inputs.push(FileHash::of(c)?);
    }
    m.outputs.push(FileHash::of(&a.out)?);
    m.outputs.push(FileHash::of(&dataset::meta_path(&a.out))?);
    m.write(&manifest_path_for_file(&a.out))?;
    Ok(m)
}

fn split(a: &SplitArgs) -> Result<RunManifest> {
    let (ds, n_sectors) = load_dataset(&a.data)?;
    let split_seed = seed::stage_seed(a.seed, "split");
    let (train, test) = dataset::split(&ds, a.test_fraction, split_seed)?;
    dataset::save_csv(&train, &a.train_out, n_sectors)?;
    dataset::save_csv(&test, &a.test_out, n_sectors)?;
    println!("train {} / test {} samples", train.len(), test.len());
    let mut m = RunManifest::new(Command::Split(a.clone()));
    m.seeds.insert("split".into(), split_seed);
    m.inputs.push(FileHash::of(&a.data)?);
    for out in [&a.train_out, &a.test_out] {
        m.outputs.push(FileHash::of(out)?);
        let meta = dataset::meta_path(out);
        if meta.exists() {
            m.outputs.push(FileHash::of(&meta)?);
        }
    }
    m.write(&manifest_path_for_file(&a.test_out))?;
    Ok(m)
}

fn train_seed(seed: u64, kind: RegressorKind) -> u64 {
    seed::stage_seed(seed, &format!("train:{kind}"))
}

fn train(a: &TrainArgs) -> Result<RunManifest> {
    let kind: RegressorKind = a.model.parse()?;
    let hyper = match &a.params {
        Some(json) => Hyperparams::from_json(kind, json)?,
        None => Hyperparams::default_for(kind),
    };
    let (ds, _) = load_dataset(&a.data)?;
    let model_seed = train_seed(a.seed, kind);
    let model = regressors::fit(&ds, &RegressorSpec::new(hyper, model_seed))?;
    model.save(&a.out)?;
    println!("wrote {} ({kind}, {} samples)", a.out.display(), ds.len());
    let mut m = RunManifest::new(Command::Train(a.clone()));
    m.seeds.insert(format!("train:{kind}"), model_seed);
    m.inputs.push(FileHash::of(&a.data)?);
    m.outputs.push(FileHash::of(&a.out)?);
    m.write(&manifest_path_for_file(&a.out))?;
    Ok(m)
}

fn evaluate(models: &[TrainedModel], test: &Dataset) -> Result<EvalReport> {
    let mut report = evaluation::evaluate_all(models, test)?;
    report.timestamp = std::env::var("SOURCE_DATE_EPOCH").ok();
    Ok(report)
}

fn write_report(report: &EvalReport, out: &Path) -> Result<PathBuf> {
    fsutil::write_json(out, report)?;
    let txt = out.with_extension("txt");
    write_text(&txt, &report.to_text_table())?;
    Ok(txt)
}

fn eval(a: &EvalArgs) -> Result<RunManifest> {
    let (test, _) = load_dataset(&a.data)?;
    let models = load_models(&a.models)?;
    let report = evaluate(&models, &test)?;
    let txt = write_report(&report, &a.out)?;
    print!("{}", report.to_text_table());
    let mut m = RunManifest::new(Command::Eval(a.clone()));
    m.inputs.push(FileHash::of(&a.data)?);
    m.outputs.push(FileHash::of(&a.out)?);
    m.outputs.push(FileHash::of(&txt)?);
    m.write(&manifest_path_for_file(&a.out))?;
    Ok(m)
}

fn compare(a: &CompareArgs) -> Result<RunManifest> {
    let cfg = load_config(a.config.as_deref())?;
    let grid: AngleGrid = a.grid.parse()?;
    let models = load_models(&a.models)?;
    let width = models[0].summary.n_features;
    if let Some(bad) = models.iter().find(|m| m.summary.n_features != width) {
        return Err(Error::Model(format!(
            "{} model expects {} features, others expect {width}",
            bad.kind(),
            bad.summary.n_features
        )));
    }
    let cb = probing::build_sector_codebook(&cfg, width, DEFAULT_SPAN)?;
    let cmp = evaluation::pattern_comparison(&cfg, a.theta, &models, &cb, &grid)?;
    let written = cmp.write_dir(&a.out)?;
    println!("ground truth peak {} deg", cmp.ground_truth_peak_deg);
    for p in &cmp.predictions {
        println!(
            "{:<4} predicted {:7.3} deg, peak {:6.2} deg, delta {:+.2} deg",
            p.model, p.predicted_theta_deg, p.peak_deg, p.peak_delta_deg
        );
    }
    let mut m =
        RunManifest::new(Command::Compare(a.clone())).with_config(a.config.as_deref(), &cfg);
    for w in &written {
        m.outputs.push(FileHash::of(w)?);
    }
    m.write(&manifest_path_for_dir(&a.out))?;
    Ok(m)
}

/// Output paths of `repro`, relative to the work directory.
pub(crate) mod layout {
    pub const DATA: &str = "data.csv";
    pub const TRAIN: &str = "train.csv";
    pub const TEST: &str = "test.csv";
    pub const MODELS: &str = "models";
    pub const REPORT: &str = "report.json";
    pub const COMPARE: &str = "compare";
}

fn repro(a: &ReproArgs) -> Result<RunManifest> {
    let wd = &a.workdir;
    let cfg = load_config(a.config.as_deref())?;
    let cb = probing::build_sector_codebook(&cfg, DEFAULT_SECTORS, DEFAULT_SPAN)?;
    let mut m = RunManifest::new(Command::Repro(a.clone())).with_config(a.config.as_deref(), &cfg);
    let mut outputs: Vec<PathBuf> = Vec::new();

    let data_seed = seed::stage_seed(a.seed, "gen-data");
    m.seeds.insert("gen-data".into(), data_seed);
    let ds = dataset::generate_dataset(
        &cfg,
        &cb,
        dataset::DEFAULT_STEP_DEG,
        dataset::DEFAULT_REPEATS,
        dataset::DEFAULT_SIGMA_DB,
        data_seed,
    )?;
    let split_seed = seed::stage_seed(a.seed, "split");
    m.seeds.insert("split".into(), split_seed);
    let (train, test) = dataset::split(&ds, dataset::DEFAULT_TEST_FRACTION, split_seed)?;
    for (name, d) in [
        (layout::DATA, &ds),
        (layout::TRAIN, &train),
        (layout::TEST, &test),
    ] {
        let rel = PathBuf::from(name);
        dataset::save_csv(d, &wd.join(&rel), DEFAULT_SECTORS)?;
        outputs.push(dataset::meta_path(&rel));
        outputs.push(rel);
    }
    println!(
        "dataset: {} samples (train {}, test {})",
        ds.len(),
        train.len(),
        test.len()
    );

    let mut models = Vec::new();
    for kind in RegressorKind::ALL {
        let s = train_seed(a.seed, kind);
        m.seeds.insert(format!("train:{kind}"), s);
        let model = regressors::fit(&train, &RegressorSpec::default_for(kind, s))?;
        let rel = Path::new(layout::MODELS).join(format!("{kind}.json"));
        model.save(&wd.join(&rel))?;
        outputs.push(rel);
        models.push(model);
    }

    let report = evaluate(&models, &test)?;
    write_report(&report, &wd.join(layout::REPORT))?;
    outputs.push(layout::REPORT.into());
    outputs.push(Path::new(layout::REPORT).with_extension("txt"));
    print!("{}", report.to_text_table());

    let grid: AngleGrid = REPRO_GRID.parse()?;
    let cmp = evaluation::pattern_comparison(&cfg, REPRO_THETA_DEG, &models, &cb, &grid)?;
    for w in cmp.write_dir(&wd.join(layout::COMPARE))? {
        let rel = w.strip_prefix(wd).map(Path::to_path_buf).unwrap_or(w);
        outputs.push(rel);
    }
    for p in &cmp.predictions {
        println!(
            "{:<4} peak {:6.2} deg (delta {:+.2}) for true {REPRO_THETA_DEG} deg",
            p.model, p.peak_deg, p.peak_delta_deg
        );
    }

    outputs.sort();
    for rel in &outputs {
        m.outputs.push(FileHash::relative(wd, rel)?);
    }
    if let Some(c) = &a.config {
        m.inputs.push(FileHash::of(c)?);
    }
    m.write(&manifest_path_for_dir(wd))?;
    Ok(m)
}

fn replay(a: &ReplayArgs) -> Result<RunManifest> {
    let recorded = RunManifest::load(&a.manifest)?;
    let mut cmd = recorded.command.clone();
    match &mut cmd {
        Command::Repro(r) => {
            r.workdir = a
                .manifest
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default();
        }
        Command::Replay(_) => return Err(Error::invalid("a replay manifest cannot be replayed")),
        _ => {}
    }
    let fresh = execute(&cmd)?;
    if fresh.outputs != recorded.outputs {
        let changed: Vec<String> = recorded
            .outputs
            .iter()
            .filter(|r| !fresh.outputs.contains(r))
            .map(|r| r.path.display().to_string())
            .collect();
        return Err(Error::domain(format!(
            "replay produced different outputs: {}",
            changed.join(", ")
        )));
    }
    println!("replay reproduced {} outputs", fresh.outputs.len());
    Ok(fresh)
}
