use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GlobalRepresentation, PipelineConfig, RegressionInput, Subject, VocabularyScope};
use crate::aha::{territory_of, Artery, SEGMENT_COUNT};
use crate::bof::{build_vocabulary, Vocabulary};
use crate::error::{Error, Result};
use crate::learn::{loo_classify, loo_regress, mvr_fit, ConfusionMatrix, ConfusionSummary, Label};
use crate::num::Real;

/// Shape-index histogram resolution of the shape-index representation.
pub const SHAPE_INDEX_BINS: usize = 20;

fn round4(x: f64) -> f64 {
    format!("{x:.4}").parse().expect("formatted float")
}

/// Word histograms of one subject under one fold's vocabulary.
#[derive(Debug, Clone)]
struct Encoded<T: Real> {
    segments: Vec<Vec<T>>,
    surface: Vec<T>,
}

enum FoldVocabulary<T: Real> {
    Global(Vocabulary<T>),
    PerSegment(Vec<Vocabulary<T>>),
}

fn capped_pool<T: Real>(pool: Vec<Vec<T>>, cap: usize, seed: u64) -> Vec<Vec<T>> {
    if pool.len() <= cap {
        return pool;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, pool.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i].clone()).collect()
}

fn train_vocabulary<T: Real>(
    subjects: &[Subject<T>],
    train: &[usize],
    config: &PipelineConfig,
) -> Result<FoldVocabulary<T>> {
    let params = config.kmeans_params();
    let cap = config.max_vocabulary_features;
    match config.vocabulary_scope {
        VocabularyScope::Global => {
            let pool: Vec<Vec<T>> = train
                .iter()
                .flat_map(|&i| subjects[i].features().map(|f| f.values()))
                .collect();
            Ok(FoldVocabulary::Global(build_vocabulary(&capped_pool(pool, cap, config.seed), &params)?))
        }
        VocabularyScope::PerSegment => (1..=SEGMENT_COUNT as u8)
            .map(|s| {
                let pool: Vec<Vec<T>> = train
                    .iter()
                    .flat_map(|&i| subjects[i].segment(s).iter().map(|f| f.values()))
                    .collect();
                build_vocabulary(&capped_pool(pool, cap, config.seed), &params)
            })
            .collect::<Result<_>>()
            .map(FoldVocabulary::PerSegment),
    }
}

fn encode<T: Real>(subject: &Subject<T>, vocab: &FoldVocabulary<T>, k: usize) -> Result<Encoded<T>> {
    let mut surface = vec![0usize; k];
    let mut total = 0usize;
    let mut segments = Vec::with_capacity(SEGMENT_COUNT);
    for s in 1..=SEGMENT_COUNT as u8 {
        let v = match vocab {
            FoldVocabulary::Global(v) => v,
            FoldVocabulary::PerSegment(vs) => &vs[s as usize - 1],
        };
        let feats = subject.segment(s);
        let mut counts = vec![0usize; k];
        for f in feats {
            counts[v.nearest(&f.values())?] += 1;
        }
        for (a, c) in surface.iter_mut().zip(&counts) {
            *a += c;
        }
        total += feats.len();
        let n = T::from_count(feats.len());
        segments.push(counts.into_iter().map(|c| T::from_count(c) / n).collect());
    }
    let n = T::from_count(total);
    Ok(Encoded {
        segments,
        surface: surface.into_iter().map(|c| T::from_count(c) / n).collect(),
    })
}

/// `out[fold][subject]`: every subject encoded with the vocabulary trained
/// without the held-out subject `fold`.
fn encode_folds<T: Real>(subjects: &[Subject<T>], config: &PipelineConfig) -> Result<Vec<Vec<Encoded<T>>>> {
    let m = subjects.len();
    (0..m)
        .into_par_iter()
        .map(|held_out| {
            let train: Vec<usize> = (0..m).filter(|&i| i != held_out).collect();
            let vocab = train_vocabulary(subjects, &train, config)?;
            subjects.iter().map(|s| encode(s, &vocab, config.vocabulary_k)).collect()
        })
        .collect()
}

fn shape_index_vector<T: Real>(subject: &Subject<T>) -> Vec<T> {
    let bins = SHAPE_INDEX_BINS;
    let mut out = Vec::with_capacity(SEGMENT_COUNT * bins);
    for s in 1..=SEGMENT_COUNT as u8 {
        let feats = subject.segment(s);
        let mut counts = vec![0usize; bins];
        for f in feats {
            let idx = (f.shape_index * T::from_count(bins)).floor().as_f64() as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        let n = T::from_count(feats.len());
        out.extend(counts.into_iter().map(|c| T::from_count(c) / n));
    }
    out
}

fn check_subjects<T: Real>(subjects: &[Subject<T>], config: &PipelineConfig) -> Result<()> {
    config.validate()?;
    if subjects.len() < 3 {
        return Err(Error::arg("leave-one-out studies need at least three subjects"));
    }
    let d = subjects[0].feature_dim();
    if let Some(s) = subjects.iter().find(|s| s.feature_dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: s.feature_dim() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub actual: Label,
    pub predicted: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalReport {
    pub task: String,
    pub config: PipelineConfig,
    pub confusion: ConfusionSummary,
    pub skipped_folds: usize,
    pub predictions: Vec<PredictionRow>,
}

impl GlobalReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "id,actual,predicted")?;
        for p in &self.predictions {
            let pred = p.predicted.map_or("skipped".to_string(), |l| l.to_string());
            writeln!(w, "{},{},{}", p.id, p.actual, pred)?;
        }
        Ok(())
    }
}

/// Whole-surface normal/diseased classification under leave-one-out; a
/// subject is diseased when any artery reaches the DS threshold.
pub fn classify_global<T: Real>(subjects: &[Subject<T>], config: &PipelineConfig) -> Result<GlobalReport> {
    check_subjects(subjects, config)?;
    let labels: Vec<Label> = subjects
        .iter()
        .map(|s| s.ds.subject_label(config.ds_threshold))
        .collect::<Result<_>>()?;
    let rep = config.global_representation;
    if rep == GlobalRepresentation::SurfaceBof && config.vocabulary_scope == VocabularyScope::PerSegment {
        return Err(Error::arg("a whole-surface histogram needs a global vocabulary"));
    }
    let vectors: Vec<Vec<Vec<T>>> = match rep {
        GlobalRepresentation::ShapeIndex => {
            let v: Vec<Vec<T>> = subjects.iter().map(shape_index_vector).collect();
            vec![v; 1]
        }
        _ => encode_folds(subjects, config)?
            .into_iter()
            .map(|fold| {
                fold.into_iter()
                    .map(|e| match rep {
                        GlobalRepresentation::SurfaceBof => e.surface,
                        _ => e.segments.concat(),
                    })
                    .collect()
            })
            .collect(),
    };
    let classifier = config.classifier();
    let outcome = loo_classify(&labels, |train, test| {
        let x = if vectors.len() == 1 { &vectors[0] } else { &vectors[test] };
        let tx: Vec<Vec<T>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
        Ok(classifier.fit_predict(&tx, &ty, std::slice::from_ref(&x[test]))?[0])
    })?;
    Ok(GlobalReport {
        task: "classify-global".into(),
        config: config.clone(),
        confusion: outcome.confusion.summary(),
        skipped_folds: outcome.skipped,
        predictions: subjects
            .iter()
            .zip(&labels)
            .zip(&outcome.predictions)
            .map(|((s, &actual), &predicted)| PredictionRow {
                id: s.id.clone(),
                actual,
                predicted,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentResult {
    pub segment: u8,
    pub artery: Artery,
    pub confusion: ConfusionSummary,
    pub skipped_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalReport {
    pub task: String,
    pub config: PipelineConfig,
    /// Counts pooled over all segments.
    pub overall: ConfusionSummary,
    pub segments: Vec<SegmentResult>,
}

fn rate(r: &Option<crate::learn::RateReport>) -> String {
    r.as_ref().map_or(String::new(), |r| format!("{:.4}", r.value))
}

impl LocalReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "segment_id,artery,accuracy,false_alarm_rate,miss_rate,tp,fn,fp,tn,skipped_folds")?;
        for s in &self.segments {
            let c = &s.confusion;
            let [[tp, fn_], [fp, tn]] = c.matrix;
            writeln!(
                w,
                "{},{},{},{},{},{tp},{fn_},{fp},{tn},{}",
                s.segment,
                s.artery,
                rate(&c.accuracy),
                rate(&c.false_alarm_rate),
                rate(&c.miss_rate),
                s.skipped_folds
            )?;
        }
        Ok(())
    }
}

/// Per-segment classification of word histograms; each segment is labeled
/// by the stenosis of its supplying artery.
pub fn classify_local<T: Real>(subjects: &[Subject<T>], config: &PipelineConfig) -> Result<LocalReport> {
    check_subjects(subjects, config)?;
    let folds = encode_folds(subjects, config)?;
    let classifier = config.classifier();
    let mut pooled = ConfusionMatrix::default();
    let mut segments = Vec::with_capacity(SEGMENT_COUNT);
    for s in 1..=SEGMENT_COUNT as u8 {
        let labels: Vec<Label> = subjects
            .iter()
            .map(|x| x.segment_label(s, config.ds_threshold))
            .collect::<Result<_>>()?;
        let i = s as usize - 1;
        let outcome = loo_classify(&labels, |train, test| {
            let enc = &folds[test];
            let tx: Vec<Vec<T>> = train.iter().map(|&j| enc[j].segments[i].clone()).collect();
            let ty: Vec<Label> = train.iter().map(|&j| labels[j]).collect();
            Ok(classifier.fit_predict(&tx, &ty, std::slice::from_ref(&enc[test].segments[i]))?[0])
        })?;
        let c = outcome.confusion;
        pooled = ConfusionMatrix::from_counts(pooled.tp + c.tp, pooled.fn_ + c.fn_, pooled.fp + c.fp, pooled.tn + c.tn);
        segments.push(SegmentResult {
            segment: s,
            artery: territory_of(s)?,
            confusion: c.summary(),
            skipped_folds: outcome.skipped,
        });
    }
    Ok(LocalReport {
        task: "classify-local".into(),
        config: config.clone(),
        overall: pooled.summary(),
        segments,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRow {
    pub segments: Vec<u8>,
    pub artery: Artery,
    /// Correlation of held-out estimates with the measured DS; `None` when
    /// either side is constant.
    pub pearson: Option<f64>,
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub task: String,
    pub config: PipelineConfig,
    pub rows: Vec<RegressionRow>,
}

impl RegressionReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "segments,artery,pearson,n")?;
        for r in &self.rows {
            let segs: Vec<String> = r.segments.iter().map(u8::to_string).collect();
            let p = r.pearson.map_or(String::new(), |p| format!("{p:.4}"));
            writeln!(w, "{},{},{p},{}", segs.join(";"), r.artery, r.estimates.len())?;
        }
        Ok(())
    }
}

/// Leave-one-out multivariate regression of percent DS on word histograms,
/// per segment or per artery territory.
pub fn regress_local<T: Real>(subjects: &[Subject<T>], config: &PipelineConfig) -> Result<RegressionReport> {
    check_subjects(subjects, config)?;
    let folds = encode_folds(subjects, config)?;
    let groups: Vec<(Vec<u8>, Artery)> = match config.regression_input {
        RegressionInput::Segment => (1..=SEGMENT_COUNT as u8)
            .map(|s| Ok((vec![s], territory_of(s)?)))
            .collect::<Result<_>>()?,
        RegressionInput::Territory => Artery::ALL
            .iter()
            .map(|&a| {
                let segs = (1..=SEGMENT_COUNT as u8)
                    .filter(|&s| territory_of(s).map(|t| t == a).unwrap_or(false))
                    .collect();
                (segs, a)
            })
            .collect(),
    };
    let ridge = T::lit(config.ridge);
    let mut rows = Vec::with_capacity(groups.len());
    for (segs, artery) in groups {
        let y: Vec<T> = subjects.iter().map(|s| T::lit(s.ds.get(artery))).collect();
        let input = |enc: &Encoded<T>| -> Vec<T> { segs.iter().flat_map(|&s| enc.segments[s as usize - 1].clone()).collect() };
        let outcome = loo_regress(&y, |train, test| {
            let enc = &folds[test];
            let tx: Vec<Vec<T>> = train.iter().map(|&j| input(&enc[j])).collect();
            let ty: Vec<T> = train.iter().map(|&j| y[j]).collect();
            mvr_fit(&tx, &ty, ridge)?.predict(&input(&enc[test]))
        })?;
        rows.push(RegressionRow {
            segments: segs.clone(),
            artery,
            pearson: outcome.pearson.map(|p| round4(p.as_f64())),
            estimates: outcome.estimates.iter().map(|e| e.as_f64()).collect(),
        });
    }
    Ok(RegressionReport {
        task: "regress-local".into(),
        config: config.clone(),
        rows,
    })
}
