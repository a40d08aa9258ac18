use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rubric::{conversation_score, skill_score_with, Arm, DeltaRecord, Dimension, RaterRole, ScoreRecord, ScoringOptions, RubricRating};
use crate::stats::{
    ci95, cohens_d, icc, mann_whitney, mean, power_sample_size, sd, EffectMode, IccReport, IccVariant, Interval,
    LogisticOptions, MannWhitney, Sided, StatsError, TestMode, ttest,
};

use super::demographics::{randomization_check, Demographics, RandomizationCheck};
use super::{AnalysisError, DatasetSummary, Order, RatingsDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    pub d: f64,
    pub alpha: f64,
    pub power: f64,
    pub sided: Sided,
}

/// Which report sections to compute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sections {
    pub table3: bool,
    pub icc: bool,
    /// Upper and lower pre-Empower thresholds.
    pub sensitivity: Option<(f64, f64)>,
    pub power: Option<PowerParams>,
}

impl Default for Sections {
    fn default() -> Self {
        Self { table3: true, icc: true, sensitivity: None, power: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub scoring: ScoringOptions,
    /// Unequal-variance between-arm tests instead of pooled.
    pub welch: bool,
    /// ICC variant quoted as the headline value.
    pub icc_variant: IccVariant,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            scoring: ScoringOptions { lenient: true, normalization: Default::default() },
            welch: false,
            icc_variant: IccVariant::Icc2k,
        }
    }
}

impl AnalysisOptions {
    fn between_mode(&self) -> TestMode {
        if self.welch {
            TestMode::Welch
        } else {
            TestMode::Unpaired
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantScores {
    pub participant_id: String,
    pub arm: Arm,
    pub pre: Option<ScoreRecord>,
    pub post: Option<ScoreRecord>,
}

impl ParticipantScores {
    pub fn delta(&self) -> Option<DeltaRecord> {
        Some(DeltaRecord::new(&self.participant_id, self.arm, self.pre.as_ref()?, self.post.as_ref()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

impl MeanSd {
    fn of(xs: &[f64]) -> Self {
        Self {
            n: xs.len(),
            mean: (!xs.is_empty()).then(|| mean(xs)),
            sd: (xs.len() >= 2).then(|| sd(xs)),
        }
    }
}

/// Pre/post change for one arm and dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinRow {
    pub dimension: Dimension,
    pub pre: MeanSd,
    pub post: MeanSd,
    pub delta: Option<f64>,
    pub ci95: Option<Interval>,
    /// Paired t-test of post against pre, two-sided.
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    /// `(mean post - mean pre) / pooled sd of the pre and post scores`.
    pub d: Option<f64>,
    /// `mean(delta) / sd(delta)`.
    pub d_paired: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmTable {
    pub arm: Arm,
    pub n_participants: usize,
    pub rows: Vec<WithinRow>,
}

/// SOPHIE against Control on the per-participant change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetweenRow {
    pub dimension: Dimension,
    pub n_control: usize,
    pub n_sophie: usize,
    pub delta_control: Option<f64>,
    pub delta_sophie: Option<f64>,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub d: Option<f64>,
    pub mann_whitney: Option<MannWhitney>,
    pub flags: Vec<String>,
}

/// Control against SOPHIE on pre-intervention scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub dimension: Dimension,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3 {
    pub arms: Vec<ArmTable>,
    pub between: Vec<BetweenRow>,
    pub baseline: Vec<BaselineRow>,
}

/// Rank test of the standardized-patient scores across arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpCheckRow {
    pub order: Order,
    pub dimension: Dimension,
    pub n_control: usize,
    pub n_sophie: usize,
    pub result: Option<MannWhitney>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccSection {
    /// Conversations with a full set of third-party raters.
    pub n_rows: usize,
    /// Conversations left out for missing raters.
    pub n_dropped: usize,
    pub raters: usize,
    pub variant: IccVariant,
    pub value: Option<f64>,
    pub ci95: Option<Interval>,
    pub report: Option<IccReport>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub upper: f64,
    pub lower: f64,
    pub n_control: usize,
    pub n_sophie: usize,
    /// Pre-Empower comparison within the subset.
    pub baseline_p: Option<f64>,
    pub delta_control: f64,
    pub delta_sophie: f64,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub d: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub d: f64,
    pub alpha: f64,
    pub power: f64,
    pub sided: Sided,
    pub n_per_arm: u32,
    pub requested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub dataset: DatasetSummary,
    pub options: AnalysisOptions,
    /// Participants lacking a pre or post conversation.
    pub incomplete_participants: Vec<String>,
    pub table3: Option<Table3>,
    pub sp_check: Vec<SpCheckRow>,
    pub icc: Option<IccSection>,
    pub sensitivity: Option<SensitivityReport>,
    pub power: Vec<PowerRow>,
    pub randomization: Option<RandomizationCheck>,
}

impl StatsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn keep<T>(r: Result<T, StatsError>, what: &str, flags: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            flags.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Averaged conversation scores per participant, ordered by id.
pub fn participant_scores(data: &RatingsDataset, scoring: ScoringOptions) -> Result<Vec<ParticipantScores>, AnalysisError> {
    let mut out: BTreeMap<String, ParticipantScores> = data
        .arms()
        .into_iter()
        .map(|(id, arm)| (id.clone(), ParticipantScores { participant_id: id, arm, pre: None, post: None }))
        .collect();
    for ((pid, order), rows) in data.conversations() {
        let ratings: Vec<RubricRating> = rows.iter().map(|r| r.rating.clone()).collect();
        let s = conversation_score(&ratings, scoring)?;
        let p = out.get_mut(&pid).expect("participant known");
        match order {
            Order::Pre => p.pre = Some(s),
            Order::Post => p.post = Some(s),
        }
    }
    Ok(out.into_values().collect())
}

fn complete(scores: &[ParticipantScores], arm: Arm) -> Vec<&ParticipantScores> {
    scores.iter().filter(|p| p.arm == arm && p.pre.is_some() && p.post.is_some()).collect()
}

fn column(ps: &[&ParticipantScores], dim: Dimension, order: Order) -> Vec<f64> {
    ps.iter()
        .map(|p| match order {
            Order::Pre => p.pre.as_ref().unwrap().get(dim),
            Order::Post => p.post.as_ref().unwrap().get(dim),
        })
        .collect()
}

fn deltas(ps: &[&ParticipantScores], dim: Dimension) -> Vec<f64> {
    ps.iter().map(|p| p.delta().unwrap().get(dim)).collect()
}

fn within_row(ps: &[&ParticipantScores], dim: Dimension) -> WithinRow {
    let pre = column(ps, dim, Order::Pre);
    let post = column(ps, dim, Order::Post);
    let delta = deltas(ps, dim);
    let mut flags = Vec::new();
    let t = keep(ttest(&post, &pre, TestMode::Paired, Sided::Two), "paired t", &mut flags);
    if t.is_some_and(|t| t.degenerate) {
        flags.push("paired t: zero standard error".into());
    }
    WithinRow {
        dimension: dim,
        pre: MeanSd::of(&pre),
        post: MeanSd::of(&post),
        delta: (!delta.is_empty()).then(|| mean(&delta)),
        ci95: keep(ci95(&delta), "ci95", &mut flags),
        t: t.map(|t| t.t),
        df: t.map(|t| t.df),
        p: t.map(|t| t.p),
        d: keep(cohens_d(&post, &pre, EffectMode::IndependentPooled), "d", &mut flags),
        d_paired: keep(cohens_d(&post, &pre, EffectMode::PairedDiffs), "d_paired", &mut flags),
        flags,
    }
}

/// Between-arm comparison of the change on one dimension.
pub fn between_arm(scores: &[ParticipantScores], dim: Dimension, mode: TestMode) -> BetweenRow {
    let c = complete(scores, Arm::Control);
    let s = complete(scores, Arm::Sophie);
    let (dc, ds) = (deltas(&c, dim), deltas(&s, dim));
    let mut flags = Vec::new();
    let t = keep(ttest(&ds, &dc, mode, Sided::Two), "t", &mut flags);
    if t.is_some_and(|t| t.degenerate) {
        flags.push("t: zero standard error".into());
    }
    BetweenRow {
        dimension: dim,
        n_control: dc.len(),
        n_sophie: ds.len(),
        delta_control: (!dc.is_empty()).then(|| mean(&dc)),
        delta_sophie: (!ds.is_empty()).then(|| mean(&ds)),
        t: t.map(|t| t.t),
        df: t.map(|t| t.df),
        p: t.map(|t| t.p),
        d: keep(cohens_d(&ds, &dc, EffectMode::IndependentPooled), "d", &mut flags),
        mann_whitney: keep(mann_whitney(&ds, &dc), "mann-whitney", &mut flags),
        flags,
    }
}

pub fn table3(scores: &[ParticipantScores], opts: &AnalysisOptions) -> Table3 {
    let arms = Arm::ALL
        .iter()
        .map(|&arm| {
            let ps = complete(scores, arm);
            ArmTable { arm, n_participants: ps.len(), rows: Dimension::ALL.iter().map(|&d| within_row(&ps, d)).collect() }
        })
        .collect();
    let between = Dimension::ALL.iter().map(|&d| between_arm(scores, d, opts.between_mode())).collect();
    let c = complete(scores, Arm::Control);
    let s = complete(scores, Arm::Sophie);
    let baseline = Dimension::ALL
        .iter()
        .map(|&dim| {
            let mut flags = Vec::new();
            let t = keep(
                ttest(&column(&c, dim, Order::Pre), &column(&s, dim, Order::Pre), opts.between_mode(), Sided::Two),
                "t",
                &mut flags,
            );
            BaselineRow { dimension: dim, t: t.map(|t| t.t), p: t.map(|t| t.p), flags }
        })
        .collect();
    Table3 { arms, between, baseline }
}

/// Standardized-patient scores compared across arms at each time point.
pub fn sp_check(data: &RatingsDataset, opts: &AnalysisOptions) -> Vec<SpCheckRow> {
    let mut out = Vec::new();
    for order in [Order::Pre, Order::Post] {
        for dim in Dimension::ALL {
            let sp = |arm: Arm| -> Vec<f64> {
                data.rows()
                    .iter()
                    .filter(|r| r.order == order && r.arm == arm && r.rating.role == RaterRole::SP)
                    .map(|r| skill_score_with(&r.rating, dim, opts.scoring.normalization))
                    .collect()
            };
            let (c, s) = (sp(Arm::Control), sp(Arm::Sophie));
            let mut flags = Vec::new();
            let result = keep(mann_whitney(&s, &c), "mann-whitney", &mut flags);
            out.push(SpCheckRow { order, dimension: dim, n_control: c.len(), n_sophie: s.len(), result, flags });
        }
    }
    out
}

/// Agreement of the third-party raters on summed item scores. Columns are
/// raters in sorted id order within each conversation.
pub fn icc_section(data: &RatingsDataset, variant: IccVariant) -> IccSection {
    let raters = crate::rubric::TP_RATERS;
    let mut rows = Vec::new();
    let mut dropped = 0;
    for (_, conv) in data.conversations() {
        let mut tp: Vec<(&str, f64)> = conv
            .iter()
            .filter(|r| r.rating.role == RaterRole::TP)
            .map(|r| (r.rating.rater_id.as_str(), r.rating.qsum() as f64))
            .collect();
        if tp.len() != raters {
            dropped += 1;
            continue;
        }
        tp.sort_by(|a, b| a.0.cmp(b.0));
        rows.push(tp.into_iter().map(|(_, q)| q).collect::<Vec<f64>>());
    }
    let mut flags = Vec::new();
    let report = keep(icc(&rows), "icc", &mut flags);
    let est = report.as_ref().map(|r| *r.get(variant));
    IccSection {
        n_rows: rows.len(),
        n_dropped: dropped,
        raters,
        variant,
        value: est.map(|e| e.value),
        ci95: est.map(|e| e.ci95),
        report,
        flags,
    }
}

/// Restricts to overlapping baseline Empower ranges and compares the change.
pub fn sensitivity_analysis(
    scores: &[ParticipantScores],
    upper: f64,
    lower: f64,
    mode: TestMode,
) -> Result<SensitivityReport, AnalysisError> {
    for (name, v) in [("upper", upper), ("lower", lower)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(AnalysisError::InvalidOption(format!("sensitivity {name} threshold {v} outside [0, 1]")));
        }
    }
    let pre = |p: &ParticipantScores| p.pre.as_ref().unwrap().empower;
    let c: Vec<&ParticipantScores> = complete(scores, Arm::Control).into_iter().filter(|p| pre(p) <= upper).collect();
    let s: Vec<&ParticipantScores> = complete(scores, Arm::Sophie).into_iter().filter(|p| pre(p) >= lower).collect();
    if c.is_empty() {
        return Err(AnalysisError::EmptySubset(Arm::Control));
    }
    if s.is_empty() {
        return Err(AnalysisError::EmptySubset(Arm::Sophie));
    }
    let dim = Dimension::Empower;
    let (dc, ds) = (deltas(&c, dim), deltas(&s, dim));
    let mut flags = Vec::new();
    let base = keep(ttest(&column(&c, dim, Order::Pre), &column(&s, dim, Order::Pre), mode, Sided::Two), "baseline t", &mut flags);
    let t = keep(ttest(&ds, &dc, mode, Sided::Two), "t", &mut flags);
    Ok(SensitivityReport {
        upper,
        lower,
        n_control: c.len(),
        n_sophie: s.len(),
        baseline_p: base.map(|t| t.p),
        delta_control: mean(&dc),
        delta_sophie: mean(&ds),
        t: t.map(|t| t.t),
        df: t.map(|t| t.df),
        p: t.map(|t| t.p),
        d: keep(cohens_d(&ds, &dc, EffectMode::IndependentPooled), "d", &mut flags),
        flags,
    })
}

/// Sample sizes for the requested sidedness and the other one.
pub fn power_table(p: PowerParams) -> Result<Vec<PowerRow>, StatsError> {
    let other = match p.sided {
        Sided::One => Sided::Two,
        Sided::Two => Sided::One,
    };
    [(p.sided, true), (other, false)]
        .into_iter()
        .map(|(sided, requested)| {
            Ok(PowerRow {
                d: p.d,
                alpha: p.alpha,
                power: p.power,
                sided,
                n_per_arm: power_sample_size(p.d, p.alpha, p.power, sided)?,
                requested,
            })
        })
        .collect()
}

/// Runs the requested sections over a loaded dataset.
pub fn analyze(
    data: &RatingsDataset,
    opts: &AnalysisOptions,
    sections: &Sections,
    demographics: Option<&Demographics>,
) -> Result<StatsReport, AnalysisError> {
    let scores = participant_scores(data, opts.scoring)?;
    let incomplete = scores
        .iter()
        .filter(|p| p.pre.is_none() || p.post.is_none())
        .map(|p| p.participant_id.clone())
        .collect();
    let power = match sections.power {
        Some(p) => power_table(p)?,
        None => Vec::new(),
    };
    let sensitivity = match sections.sensitivity {
        Some((u, l)) => Some(sensitivity_analysis(&scores, u, l, opts.between_mode())?),
        None => None,
    };
    let randomization = match demographics {
        Some(d) => Some(randomization_check(d, LogisticOptions::default())?),
        None => None,
    };
    Ok(StatsReport {
        dataset: data.summary(),
        options: *opts,
        incomplete_participants: incomplete,
        table3: sections.table3.then(|| table3(&scores, opts)),
        sp_check: if sections.table3 { sp_check(data, opts) } else { Vec::new() },
        icc: sections.icc.then(|| icc_section(data, opts.icc_variant)),
        sensitivity,
        power,
        randomization,
    })
}
