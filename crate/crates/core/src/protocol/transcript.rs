//! The game record: per-domino step results, pool sizes, the message log and the verdict.

use std::collections::BTreeMap;

use serde::Serialize;

use super::steps::Adjudication;
use super::{BoxBudget, FailureSite, GameConfig, Verdict};
use crate::pcp::{Arrangement, Domino, PcpInstance};
use crate::physics::{PhysicsKind, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Agent {
    Alice,
    V1,
    V2,
    Referee,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Message {
    pub from: Agent,
    pub to: Agent,
    pub domino: Option<usize>,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub site: FailureSite,
    pub domino: Option<usize>,
    pub detail: String,
}

impl Failure {
    pub fn new(site: FailureSite, domino: Option<usize>, detail: String) -> Self {
        Self { site, domino, detail }
    }
}

/// One measurement pass of V1's device check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub round: u32,
    pub side: Side,
    pub h: String,
    pub t: String,
    /// Every outcome repeated on remeasurement.
    pub stable: bool,
    /// Sampled mode only.
    pub p_value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Step1Record {
    pub passed: bool,
    pub verification_boxes: String,
    pub rounds: Vec<MeasurementRecord>,
    pub mixed_boxes: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Step2Record {
    pub passed: bool,
    pub expected: String,
    pub returned: String,
    /// Mixed boxes Alice kept back; logged, not verified.
    pub discarded: String,
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Step3Record {
    pub passed: bool,
    /// Effective counts for hh, ht, th, tt.
    pub counts: [String; 4],
    pub product_diagonal: String,
    pub product_off_diagonal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step4Record {
    pub passed: bool,
    pub left_measured: String,
    pub left_h_frequency: Option<String>,
    pub right_measured: String,
    pub right_h_frequency: Option<String>,
    pub instruction: Side,
    pub forwarded: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step5Record {
    pub first_side: Side,
    pub received: String,
    pub first_h_frequency: String,
    pub first_string: String,
    pub survivors: String,
    pub second_h_frequency: String,
    pub second_string: String,
    pub decoded: Option<Domino>,
}

impl Default for Step5Record {
    fn default() -> Self {
        Self {
            first_side: Side::Left,
            received: String::new(),
            first_h_frequency: String::new(),
            first_string: String::new(),
            survivors: String::new(),
            second_h_frequency: String::new(),
            second_string: String::new(),
            decoded: None,
        }
    }
}

/// Box totals at each hand-off.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PoolSizes {
    pub submitted: String,
    pub after_step1: String,
    pub after_step2: String,
    pub after_step4: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominoRecord {
    pub index: usize,
    pub domino: Domino,
    pub physics: PhysicsKind,
    pub devices: String,
    pub pool_sizes: PoolSizes,
    pub step1: Option<Step1Record>,
    pub step2: Option<Step2Record>,
    pub step3: Option<Step3Record>,
    pub step4: Option<Step4Record>,
    pub step5: Option<Step5Record>,
}

impl DominoRecord {
    pub fn new(index: usize, domino: &Domino, physics: PhysicsKind) -> Self {
        Self {
            index,
            domino: domino.clone(),
            physics,
            devices: String::new(),
            pool_sizes: PoolSizes::default(),
            step1: None,
            step2: None,
            step3: None,
            step4: None,
            step5: None,
        }
    }

    /// Pass flags of every step that ran.
    pub fn checks(&self) -> Vec<bool> {
        let mut out = Vec::new();
        out.extend(self.step1.as_ref().map(|s| s.passed));
        out.extend(self.step2.as_ref().map(|s| s.passed));
        out.extend(self.step3.as_ref().map(|s| s.passed));
        out.extend(self.step4.as_ref().map(|s| s.passed));
        out.extend(self.step5.as_ref().map(|s| s.decoded.is_some()));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTranscript {
    pub seed: u64,
    pub strategy: String,
    pub config: GameConfig,
    pub box_budget: BoxBudget,
    pub instance: PcpInstance,
    pub claim: Arrangement,
    pub per_domino: Vec<DominoRecord>,
    pub decoded: Vec<Domino>,
    pub adjudication: Option<Adjudication>,
    pub verdict: Verdict,
    pub failure_site: Option<FailureSite>,
    pub failure: Option<Failure>,
    pub messages: Vec<Message>,
}

impl GameTranscript {
    pub(crate) fn new(instance: PcpInstance, strategy: &str, config: GameConfig, box_budget: BoxBudget) -> Self {
        Self {
            seed: config.seed,
            strategy: strategy.to_string(),
            config,
            box_budget,
            instance,
            claim: Arrangement::NoMatch,
            per_domino: Vec::new(),
            decoded: Vec::new(),
            adjudication: None,
            verdict: Verdict::Lose,
            failure_site: None,
            failure: None,
            messages: Vec::new(),
        }
    }

    pub(crate) fn log(&mut self, from: Agent, to: Agent, domino: Option<usize>, content: String) {
        self.messages.push(Message { from, to, domino, content });
    }

    pub(crate) fn push_record(&mut self, record: DominoRecord) {
        self.per_domino.push(record);
    }

    pub(crate) fn fail(&mut self, failure: Failure) {
        self.verdict = Verdict::Lose;
        self.failure_site = Some(failure.site);
        self.failure = Some(failure);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn is_win(&self) -> bool {
        self.verdict == Verdict::Win
    }

    /// Number of recorded checks that failed.
    pub fn failed_checks(&self) -> usize {
        let steps = self.per_domino.iter().flat_map(|r| r.checks()).filter(|ok| !ok).count();
        let adj = self.adjudication.as_ref().is_some_and(|a| a.verdict == Verdict::Lose) as usize;
        steps + adj
    }
}
