//! Hyperparameter studies: TPE sampling over the model search space, the
//! batch-rolling tuning objective, and newline-delimited trial persistence.

mod space;
mod tpe;

use std::collections::BTreeMap;
use std::io::BufRead;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use space::{Bound, ParamSpec, Scale, SearchSpace};
pub use tpe::{sample, sample_uniform, TpeConfig};

use crate::engine::{LifParams, ModelVariant};
use crate::error::{Error, Result};
use crate::metrics::EvalCounts;
use crate::pipeline::{train_model, EncodedStream, ModelSpec, UnsupervisedSpec};
use crate::plasticity::StdpParams;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveMetric {
    Sa,
    Psa,
}

/// One completed (or failed) trial.
#[derive(Debug, Clone)]
pub struct Trial {
    pub trial_id: usize,
    pub params: BTreeMap<String, f64>,
    pub metric: ObjectiveMetric,
    pub score: f64,
    pub srd: Option<f64>,
    pub batch_index: usize,
    pub duration_ms: u64,
    pub failed: bool,
    /// Score forced to zero because the model never fired on the eval batch.
    pub zero_prediction: bool,
}

/// Wire format: one JSON object per line.
#[derive(Debug, Serialize, Deserialize)]
struct TrialRecord {
    trial_id: usize,
    params: BTreeMap<String, f64>,
    metric: ObjectiveMetric,
    score: Option<f64>,
    srd: Option<f64>,
    batch_index: usize,
    duration_ms: u64,
}

impl Trial {
    pub fn to_ndjson_line(&self) -> Result<String> {
        let rec = TrialRecord {
            trial_id: self.trial_id,
            params: self.params.clone(),
            metric: self.metric,
            score: if self.failed { None } else { Some(self.score) },
            srd: self.srd,
            batch_index: self.batch_index,
            duration_ms: self.duration_ms,
        };
        Ok(serde_json::to_string(&rec)?)
    }

    pub fn from_ndjson_line(line: &str) -> Result<Self> {
        let rec: TrialRecord = serde_json::from_str(line)?;
        Ok(Self {
            trial_id: rec.trial_id,
            params: rec.params,
            metric: rec.metric,
            score: rec.score.unwrap_or(f64::NAN),
            srd: rec.srd,
            batch_index: rec.batch_index,
            duration_ms: rec.duration_ms,
            failed: rec.score.is_none(),
            zero_prediction: false,
        })
    }
}

/// Full study output.
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub trials: Vec<Trial>,
    /// Index of the best non-failed trial.
    pub best: Option<usize>,
}

impl StudyResult {
    pub fn best_trial(&self) -> Option<&Trial> {
        self.best.map(|i| &self.trials[i])
    }

    fn recompute_best(trials: &[Trial]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, t) in trials.iter().enumerate() {
            if t.failed || !t.score.is_finite() {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if t.score > trials[b].score => best = Some(i),
                _ => {}
            }
        }
        best
    }

    pub fn write_ndjson(&self, mut w: impl std::io::Write) -> Result<()> {
        for t in &self.trials {
            writeln!(w, "{}", t.to_ndjson_line()?)?;
        }
        Ok(())
    }

    pub fn read_ndjson(r: impl std::io::Read) -> Result<Self> {
        let reader = std::io::BufReader::new(r);
        let mut trials = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            trials.push(Trial::from_ndjson_line(&line)?);
        }
        let best = Self::recompute_best(&trials);
        Ok(Self { trials, best })
    }
}

/// Everything the tuning objective needs besides the trial parameters.
pub struct ObjectiveContext<'a> {
    pub stream: &'a EncodedStream,
    pub variant: ModelVariant,
    pub metric: ObjectiveMetric,
    pub batch_size: usize,
    pub alpha: f64,
}

impl ObjectiveContext<'_> {
    pub fn n_batches(&self) -> usize {
        self.stream.n_rows() / self.batch_size
    }
}

/// Build an unsupervised model spec from a drawn parameter map.
pub fn spec_from_params(
    variant: ModelVariant,
    params: &BTreeMap<String, f64>,
) -> Result<UnsupervisedSpec> {
    let get = |name: &str| -> Result<f64> {
        params
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidParam(format!("missing parameter {name}")))
    };
    let a_plus = get("a_plus")?;
    let a_minus = get("a_minus")?.min(a_plus);
    let tau_plus = get("tau_plus")?;
    let tau_minus = get("tau_minus")?;
    let (b_plus, b_minus, theta_plus, theta_minus, lags) = match variant {
        ModelVariant::Model2 => {
            let b_plus = get("b_plus")?;
            (
                b_plus,
                get("b_minus")?.min(b_plus),
                get("theta_plus")?,
                get("theta_minus")?,
                get("n_input")? as usize,
            )
        }
        ModelVariant::Model1 => (a_plus, a_minus, tau_plus, tau_minus, 1),
        ModelVariant::Model3 => {
            return Err(Error::InvalidConfig(
                "the dense model is not tuned by this study".into(),
            ))
        }
    };
    Ok(UnsupervisedSpec {
        variant,
        lags,
        n_hidden: get("n_hidden")? as usize,
        lif: LifParams::new(get("beta")?, get("v_thresh")?)?,
        stdp: StdpParams::new(
            a_plus,
            a_minus,
            tau_plus,
            tau_minus,
            b_plus,
            b_minus,
            theta_plus,
            theta_minus,
            1.0,
        )?,
        d_thresh: get("d_thresh")? as u32,
    })
}

/// Train on batch `cursor`, evaluate on batch `cursor + 1` (wrapping), and
/// return the eval batch's full metric report plus the train batch index.
pub fn objective_report(
    ctx: &ObjectiveContext,
    params: &BTreeMap<String, f64>,
    batch_cursor: usize,
    trial_seed: u64,
) -> Result<(crate::metrics::MetricsReport, usize)> {
    let n_batches = ctx.n_batches();
    if n_batches < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2 * ctx.batch_size,
            got: ctx.stream.n_rows(),
        });
    }
    let train_batch = batch_cursor % n_batches;
    let eval_batch = (batch_cursor + 1) % n_batches;
    let spec = spec_from_params(ctx.variant, params)?;
    let channels = ctx.stream.channels_for_lags(spec.lags)?;
    let rows = |b: usize| b * ctx.batch_size..(b + 1) * ctx.batch_size;
    let train_tensor = ctx.stream.tensor.select(rows(train_batch), &channels)?;
    let eval_tensor = ctx.stream.tensor.select(rows(eval_batch), &channels)?;

    let mut model = train_model(
        &ModelSpec::Unsupervised(spec),
        &train_tensor,
        &[],
        seed::derive(trial_seed, "init"),
        seed::derive(trial_seed, "train"),
    )?;

    let eval_rows = rows(eval_batch);
    let mut predictions = vec![false; eval_tensor.n_timestamps()];
    for (r, pred) in predictions.iter_mut().enumerate() {
        let out = model.net.simulate_timestamp(&eval_tensor, r)?;
        *pred = model
            .net
            .predict_from_counts(&out.output_counts, model.d_thresh);
    }
    let labels = &ctx.stream.labels[eval_rows];
    let mut counts = EvalCounts::default();
    counts.accumulate_labels(&predictions, labels)?;
    Ok((counts.report(ctx.alpha), train_batch))
}

/// Score a parameter draw with the selected metric. A model that never
/// fires on the eval batch scores zero with the zero-prediction flag set.
pub fn evaluate_objective(
    ctx: &ObjectiveContext,
    params: &BTreeMap<String, f64>,
    batch_cursor: usize,
    trial_seed: u64,
) -> Result<(f64, Option<f64>, bool, usize)> {
    let (report, train_batch) = objective_report(ctx, params, batch_cursor, trial_seed)?;
    let (score, zero) = match (ctx.metric, report.spike_accuracy) {
        (_, None) => (0.0, true),
        (ObjectiveMetric::Sa, Some(sa)) => (sa, false),
        (ObjectiveMetric::Psa, Some(_)) => match report.psa {
            Some(p) => (p, false),
            None => (0.0, true),
        },
    };
    Ok((score, report.srd, zero, train_batch))
}

/// Run a study against an arbitrary objective closure (trial id, params) ->
/// (score, srd, zero-prediction flag, batch index). `prior` trials seed
/// the sampler's history without appearing in the result (resumed
/// studies).
pub fn run_study_with<F>(
    space: &SearchSpace,
    metric: ObjectiveMetric,
    n_trials: usize,
    study_seed: u64,
    tpe_cfg: &TpeConfig,
    prior: &[Trial],
    mut objective: F,
    mut on_trial: impl FnMut(&Trial) -> Result<()>,
) -> Result<StudyResult>
where
    F: FnMut(usize, &BTreeMap<String, f64>) -> Result<(f64, Option<f64>, bool, usize)>,
{
    space.validate()?;
    let mut rng = seed::rng(study_seed, "tpe");
    let mut history: Vec<Trial> = prior.to_vec();
    let mut trials: Vec<Trial> = Vec::with_capacity(n_trials);
    for trial_id in 0..n_trials {
        let started = Instant::now();
        let trial = match sample(space, &history, tpe_cfg, &mut rng) {
            Err(_) => Trial {
                trial_id,
                params: BTreeMap::new(),
                metric,
                score: f64::NAN,
                srd: None,
                batch_index: trial_id,
                duration_ms: started.elapsed().as_millis() as u64,
                failed: true,
                zero_prediction: false,
            },
            Ok(params) => match objective(trial_id, &params) {
                Ok((score, srd, zero, batch_index)) => Trial {
                    trial_id,
                    params,
                    metric,
                    score,
                    srd,
                    batch_index,
                    duration_ms: started.elapsed().as_millis() as u64,
                    failed: false,
                    zero_prediction: zero,
                },
                Err(Error::UnsatisfiableRange(_)) => Trial {
                    trial_id,
                    params,
                    metric,
                    score: f64::NAN,
                    srd: None,
                    batch_index: trial_id,
                    duration_ms: started.elapsed().as_millis() as u64,
                    failed: true,
                    zero_prediction: false,
                },
                Err(e) => return Err(e),
            },
        };
        on_trial(&trial)?;
        history.push(trial.clone());
        trials.push(trial);
    }
    let best = StudyResult::recompute_best(&trials);
    if best.is_none() {
        return Err(Error::AllTrialsFailed);
    }
    Ok(StudyResult { trials, best })
}

/// Run the tuning experiment over an encoded stream.
pub fn run_study(
    ctx: &ObjectiveContext,
    space: &SearchSpace,
    n_trials: usize,
    study_seed: u64,
    tpe_cfg: &TpeConfig,
    on_trial: impl FnMut(&Trial) -> Result<()>,
) -> Result<StudyResult> {
    run_study_with(
        space,
        ctx.metric,
        n_trials,
        study_seed,
        tpe_cfg,
        &[],
        |trial_id, params| {
            evaluate_objective(
                ctx,
                params,
                trial_id,
                seed::derive_indexed(study_seed, "trial", trial_id as u64),
            )
        },
        on_trial,
    )
}

/// Bounded-parallelism variant: waves of up to `parallelism` trials are
/// sampled against the history snapshot at launch, then evaluated
/// concurrently. This is a weaker conditioning contract than the
/// sequential study (trials inside one wave cannot see each other), but
/// results are deterministic and independent of thread count.
/// `parallelism = 1` is exactly the sequential study.
pub fn run_study_parallel(
    ctx: &ObjectiveContext,
    space: &SearchSpace,
    n_trials: usize,
    study_seed: u64,
    tpe_cfg: &TpeConfig,
    parallelism: usize,
    mut on_trial: impl FnMut(&Trial) -> Result<()>,
) -> Result<StudyResult> {
    use rayon::prelude::*;

    space.validate()?;
    let wave_size = parallelism.max(1);
    let mut rng = seed::rng(study_seed, "tpe");
    let mut trials: Vec<Trial> = Vec::with_capacity(n_trials);
    let mut next_id = 0usize;
    while next_id < n_trials {
        let wave: Vec<(usize, Option<BTreeMap<String, f64>>)> = (0..wave_size)
            .map_while(|_| {
                if next_id >= n_trials {
                    return None;
                }
                let id = next_id;
                next_id += 1;
                Some((id, sample(space, &trials, tpe_cfg, &mut rng).ok()))
            })
            .collect();
        let evaluated: Vec<Trial> = wave
            .into_par_iter()
            .map(|(trial_id, params)| {
                let started = Instant::now();
                let failed_trial = |params: BTreeMap<String, f64>| Trial {
                    trial_id,
                    params,
                    metric: ctx.metric,
                    score: f64::NAN,
                    srd: None,
                    batch_index: trial_id,
                    duration_ms: started.elapsed().as_millis() as u64,
                    failed: true,
                    zero_prediction: false,
                };
                let Some(params) = params else {
                    return Ok(failed_trial(BTreeMap::new()));
                };
                match evaluate_objective(
                    ctx,
                    &params,
                    trial_id,
                    seed::derive_indexed(study_seed, "trial", trial_id as u64),
                ) {
                    Ok((score, srd, zero, batch_index)) => Ok(Trial {
                        trial_id,
                        params,
                        metric: ctx.metric,
                        score,
                        srd,
                        batch_index,
                        duration_ms: started.elapsed().as_millis() as u64,
                        failed: false,
                        zero_prediction: zero,
                    }),
                    Err(Error::UnsatisfiableRange(_)) => Ok(failed_trial(params)),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        for t in evaluated {
            on_trial(&t)?;
            trials.push(t);
        }
    }
    let best = StudyResult::recompute_best(&trials);
    if best.is_none() {
        return Err(Error::AllTrialsFailed);
    }
    Ok(StudyResult { trials, best })
}
