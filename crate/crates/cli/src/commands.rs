use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use channelformer::channel::{standard_pdp, STANDARD_PROFILES};
use channelformer::error::Error;
use channelformer::experiments::config::RunConfig;
use channelformer::experiments::{run_dynamic_adaptation, run_sweep, ExperimentResult, Provenance};
use channelformer::model::{load_weights, save_weights, ModelConfig, ModelWeights};
use channelformer::pruning::{fine_tune, prune_by_magnitude};
use channelformer::training::{
    generate_offline_dataset, load_dataset, save_dataset, train as train_model, Dataset, EpochStats, Hyperparams,
};
use log::info;

use crate::GlobalArgs;

const PAPER_DATASET_SIZE: usize = 125_000;

pub struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            "config" | "usage" => 2,
            _ => 1,
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: "usage",
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // keep the error on one line
        f.write_str(&self.message.replace('\n', " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Shape { .. } => "shape",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnknownProfile(_) => "unknown_profile",
            Error::UnknownEstimator(_) => "unknown_estimator",
            Error::Format { .. } => "format",
            Error::Version { .. } => "version",
            Error::Diverged { .. } => "diverged",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parsed config plus everything needed to resolve paths and seeds.
struct Run {
    cfg: RunConfig,
    text: String,
    base: PathBuf,
    seed: u64,
}

impl Run {
    fn load(g: &GlobalArgs) -> CliResult<Self> {
        let path = g
            .config
            .as_ref()
            .ok_or_else(|| CliError::usage("--config <file> is required"))?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let cfg = RunConfig::parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let seed = g.seed.or(cfg.seed).unwrap_or(0);
        Ok(Run { cfg, text, base, seed })
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(&self.text, self.seed)
    }

    fn path(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    /// From a file when given, else simulated from `[dataset]`.
    fn dataset(&self, file: Option<&PathBuf>, paper_scale: bool) -> CliResult<Dataset> {
        match file {
            Some(p) => Ok(load_dataset(&self.path(p))?),
            None => {
                let mut spec = self.cfg.dataset_spec(self.seed)?;
                if paper_scale {
                    spec.n_samples = PAPER_DATASET_SIZE;
                }
                info!("simulating {} {} samples", spec.n_samples, spec.mode.as_str());
                Ok(generate_offline_dataset(&spec)?)
            }
        }
    }
}

/// Output files are only created once every result is in memory, so a
/// failing run leaves nothing behind.
fn out_dir(g: &GlobalArgs) -> CliResult<&Path> {
    std::fs::create_dir_all(&g.out).map_err(|e| Error::Io {
        path: g.out.clone(),
        source: e,
    })?;
    Ok(&g.out)
}

fn write(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    info!("wrote {}", path.display());
    Ok(())
}

fn log_epoch(s: &EpochStats) {
    info!(
        "epoch {:>3}  lr {:.2e}  train {:.6e}  val {:.6e}",
        s.epoch, s.lr, s.train_loss, s.val_loss
    );
}

fn curve_csv(curve: &[EpochStats]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss,lr\n");
    for c in curve {
        let _ = writeln!(s, "{},{:.9e},{:.9e},{:.9e}", c.epoch, c.train_loss, c.val_loss, c.lr);
    }
    s
}

pub fn gen_dataset(g: &GlobalArgs, paper_scale: bool) -> CliResult {
    let run = Run::load(g)?;
    let data = run.dataset(None, paper_scale)?;
    let out = out_dir(g)?;
    let path = out.join("dataset.cfds");
    save_dataset(&path, &data)?;
    info!(
        "wrote {} ({} train, {} val)",
        path.display(),
        data.train.len(),
        data.val.len()
    );
    Ok(())
}

pub fn train(g: &GlobalArgs, paper_scale: bool) -> CliResult {
    let run = Run::load(g)?;
    let section = run
        .cfg
        .train
        .as_ref()
        .ok_or_else(|| Error::Config("missing [train] section".into()))?;
    let hp = if paper_scale {
        Hyperparams::for_mode(section.mode)
    } else {
        run.cfg.train_hyperparams()?
    };
    let data = run.dataset(section.dataset.as_ref(), paper_scale)?;
    let mut w = ModelWeights::<f64>::build(&ModelConfig::for_mode(section.mode), run.seed)?;
    info!(
        "training {} model: {} parameters, {} epochs",
        section.mode.as_str(),
        w.count_parameters(),
        hp.max_epochs
    );
    let report = train_model(&mut w, &data, &hp, run.seed, log_epoch)?;
    info!("best epoch {} loss {:.6e}", report.best_epoch, report.best_loss);
    let out = out_dir(g)?;
    save_weights(&out.join("model.cfw"), &w)?;
    write(&out.join("loss_curve.csv"), &curve_csv(&report.curve))
}

pub fn prune(g: &GlobalArgs) -> CliResult {
    let run = Run::load(g)?;
    let p = run
        .cfg
        .prune
        .as_ref()
        .ok_or_else(|| Error::Config("missing [prune] section".into()))?;
    let mut w: ModelWeights<f64> = load_weights(&run.path(&p.weights))?;
    let report = prune_by_magnitude(&mut w, p.ratio)?;
    let mut csv = String::from("region,size,target_ratio,pruned,achieved_ratio\n");
    for r in &report.regions {
        info!("{}: pruned {} of {}", r.prefix, r.pruned, r.size);
        let _ = writeln!(
            csv,
            "{},{},{},{},{:.9e}",
            r.prefix.trim_end_matches('.'),
            r.size,
            r.target_ratio,
            r.pruned,
            r.achieved_ratio()
        );
    }
    let out = out_dir(g)?;
    save_weights(&out.join("pruned.cfw"), &w)?;
    write(&out.join("prune_report.csv"), &csv)
}

pub fn finetune(g: &GlobalArgs) -> CliResult {
    let run = Run::load(g)?;
    let f = run
        .cfg
        .finetune
        .as_ref()
        .ok_or_else(|| Error::Config("missing [finetune] section".into()))?;
    let hp = run.cfg.finetune_hyperparams()?;
    let mut w: ModelWeights<f64> = load_weights(&run.path(&f.weights))?;
    let data = run.dataset(f.dataset.as_ref(), false)?;
    let report = fine_tune(&mut w, &data, &hp, f.reactivation_factor, run.seed, log_epoch)?;
    info!(
        "reactivated {} of {} pruned entries",
        report.reactivated.len(),
        report.pruned_before
    );
    let mut react = String::from("param,index,mean_abs_grad\n");
    for r in &report.reactivated {
        let _ = writeln!(react, "{},{},{:.9e}", r.param, r.index, r.mean_abs_grad);
    }
    let out = out_dir(g)?;
    save_weights(&out.join("finetuned.cfw"), &w)?;
    write(&out.join("finetune_curve.csv"), &curve_csv(&report.curve))?;
    write(&out.join("reactivations.csv"), &react)
}

fn write_result(g: &GlobalArgs, r: &ExperimentResult) -> CliResult {
    let out = out_dir(g)?;
    write(&out.join(format!("{}.csv", r.kind)), &r.to_csv())
}

pub fn eval_sweep(g: &GlobalArgs, realizations: Option<usize>) -> CliResult {
    let run = Run::load(g)?;
    let mut spec = run.cfg.sweep_spec(&run.base, run.seed)?;
    if let Some(n) = realizations {
        spec.realizations = n;
    }
    info!(
        "{} over {} points, {} realizations each",
        spec.kind.as_str(),
        spec.axis.len(),
        spec.realizations
    );
    let r = run_sweep(&spec, run.provenance())?;
    write_result(g, &r)
}

pub fn online_sim(g: &GlobalArgs) -> CliResult {
    let run = Run::load(g)?;
    let (spec, files) = run.cfg.online_spec(run.seed)?;
    let models = files
        .iter()
        .map(|(n, p)| load_weights(&run.path(p)).map(|w| (n.clone(), w)))
        .collect::<Result<Vec<_>, _>>()?;
    let report = run_dynamic_adaptation(&models, &spec)?;
    let mut seg = String::from("segment,profile,model,settled_online,settled_online_se,frozen,frozen_se,ls\n");
    for (i, s) in report.segments.iter().enumerate() {
        for (m, name) in report.model_names.iter().enumerate() {
            let (a, f) = (&s.settled_adapt[m], &s.frozen[m]);
            info!(
                "{} {}: settled online {:.4e}, frozen {:.4e}",
                s.profile,
                name,
                a.mean(),
                f.mean()
            );
            let _ = writeln!(
                seg,
                "{i},{},{name},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                s.profile,
                a.mean(),
                a.std_err(),
                f.mean(),
                f.std_err(),
                s.ls.mean()
            );
        }
    }
    let r = report.to_result(run.provenance());
    write_result(g, &r)?;
    write(&out_dir(g)?.join("dynamic_segments.csv"), &seg)
}

pub fn probe_attention(g: &GlobalArgs) -> CliResult {
    let run = Run::load(g)?;
    let spec = run.cfg.probe_spec(&run.base, run.seed)?;
    let r = run_sweep(&spec, run.provenance())?;
    write_result(g, &r)
}

pub fn pdp_list(g: &GlobalArgs) -> CliResult {
    let mut profiles = STANDARD_PROFILES
        .iter()
        .map(|n| standard_pdp(n))
        .collect::<Result<Vec<_>, _>>()?;
    if g.config.is_some() {
        let run = Run::load(g)?;
        for p in &run.cfg.profile {
            profiles.push(p.build()?);
        }
    }
    for p in profiles {
        println!("{}\t{} taps\tmax delay {} ns", p.name(), p.n_paths(), p.max_delay_ns());
    }
    Ok(())
}
