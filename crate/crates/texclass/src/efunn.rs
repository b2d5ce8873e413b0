//! Evolving fuzzy rule-node classifier: rule nodes pair a fuzzy input
//! center (w1) with a fuzzy output center (w2) and are created, updated,
//! pruned, and merged over a single pass through the data. Temporal links
//! (w3) between consecutive winners are learned when `lr3 > 0`.

use std::fmt;
use std::str::FromStr;

use crate::fuzzy::{
    argmax_class, class_scores, count_out_of_range, fuzzify_vector, fuzzy_distance_flat, one_hot,
    FuzzyError, FuzzyVector, MembershipPartition,
};
use crate::harness::Normalizer;

#[derive(Debug)]
pub enum EfunnError {
    EmptyModel,
    Capacity { max: usize },
    DimensionMismatch { expected: usize, got: usize },
    UnknownClass { class: usize, classes: usize },
    UnknownMf { mf: usize, mfs: usize },
    BadConfig { reason: String },
    Fuzzy(FuzzyError),
    Parse { line: usize, reason: String },
}

impl fmt::Display for EfunnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EfunnError::EmptyModel => write!(f, "model has no rule nodes"),
            EfunnError::Capacity { max } => {
                write!(f, "cannot create rule node: capacity max_nodes={max} reached")
            }
            EfunnError::DimensionMismatch { expected, got } => {
                write!(f, "input has {got} dimensions, model expects {expected}")
            }
            EfunnError::UnknownClass { class, classes } => {
                write!(f, "class index {class} out of range (model has {classes})")
            }
            EfunnError::UnknownMf { mf, mfs } => {
                write!(f, "membership function index {mf} out of range (model has {mfs})")
            }
            EfunnError::BadConfig { reason } => write!(f, "invalid configuration: {reason}"),
            EfunnError::Fuzzy(e) => e.fmt(f),
            EfunnError::Parse { line, reason } => {
                write!(f, "model file parse error at line {line}: {reason}")
            }
        }
    }
}

impl std::error::Error for EfunnError {}

impl From<FuzzyError> for EfunnError {
    fn from(e: FuzzyError) -> Self {
        EfunnError::Fuzzy(e)
    }
}

/// Rule-node activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// `clamp(1 - ss*D + tc*w3, 0, 1)`
    Satlin,
    /// `exp(-(ss*D - tc*w3)^2)`
    Radbas,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Satlin => write!(f, "satlin"),
            Activation::Radbas => write!(f, "radbas"),
        }
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "satlin" => Ok(Activation::Satlin),
            "radbas" => Ok(Activation::Radbas),
            other => Err(format!("unknown activation {other:?}, expected satlin or radbas")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfunnConfig {
    /// Sensitivity threshold: minimum activation for an example to be
    /// absorbed by an existing node.
    pub sthr: f64,
    /// Error threshold: maximum fuzzy output error for absorption.
    pub errthr: f64,
    pub lr1: f64,
    pub lr2: f64,
    pub lr3: f64,
    /// How many activated nodes propagate to the output layer.
    pub m_best: usize,
    /// Spatial similarity weight in the activation.
    pub ss: f64,
    /// Temporal correlation weight in the activation.
    pub tc: f64,
    /// Rule-node capacity; `None` leaves the structure unbounded.
    pub max_nodes: Option<usize>,
    /// Membership functions per variable.
    pub mfs: usize,
    pub activation: Activation,
    /// Pruning: minimum age before a node may be pruned.
    pub age_thr: u64,
    /// Pruning: average-activation floor below which a node is a candidate.
    pub act_thr: f64,
    /// Aggregation threshold on input-center distance.
    pub thr1: f64,
    /// Aggregation threshold on output-center distance.
    pub thr2: f64,
}

impl Default for EfunnConfig {
    fn default() -> Self {
        Self {
            sthr: 0.99,
            errthr: 0.001,
            lr1: 0.1,
            lr2: 0.1,
            lr3: 0.0,
            m_best: 3,
            ss: 1.0,
            tc: 0.0,
            max_nodes: None,
            mfs: 4,
            activation: Activation::Satlin,
            age_thr: 50,
            act_thr: 0.05,
            thr1: 0.1,
            thr2: 0.1,
        }
    }
}

impl EfunnConfig {
    pub fn validate(&self) -> Result<(), EfunnError> {
        let fail = |reason: String| Err(EfunnError::BadConfig { reason });
        if !(self.sthr > 0.0 && self.sthr < 1.0) {
            return fail(format!("sthr must be in (0,1), got {}", self.sthr));
        }
        if !(self.errthr > 0.0 && self.errthr < 1.0) {
            return fail(format!("errthr must be in (0,1), got {}", self.errthr));
        }
        for (name, v) in [("lr1", self.lr1), ("lr2", self.lr2), ("lr3", self.lr3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        if self.m_best < 1 {
            return fail("m_best must be at least 1".into());
        }
        if !(self.ss >= 0.0 && self.ss.is_finite()) || !(self.tc >= 0.0 && self.tc.is_finite()) {
            return fail("ss and tc must be finite non-negative numbers".into());
        }
        if self.max_nodes == Some(0) {
            return fail("max_nodes must be at least 1".into());
        }
        if self.mfs < 2 {
            return fail(format!("mfs must be at least 2, got {}", self.mfs));
        }
        if !(self.act_thr >= 0.0 && self.act_thr.is_finite()) {
            return fail("act_thr must be a finite non-negative number".into());
        }
        for (name, v) in [("thr1", self.thr1), ("thr2", self.thr2)] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} must be in [0,1], got {v}"));
            }
        }
        Ok(())
    }
}

/// One evolved prototype: input and output hyper-sphere centers plus the
/// statistics pruning needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleNode {
    w1: FuzzyVector,
    w2: FuzzyVector,
    age: u64,
    activation_sum: f64,
    wins: u64,
}

impl RuleNode {
    pub fn w1(&self) -> &FuzzyVector {
        &self.w1
    }

    pub fn w2(&self) -> &FuzzyVector {
        &self.w2
    }

    /// Examples seen since creation, counting the one that created it.
    pub fn age(&self) -> u64 {
        self.age
    }

    pub fn activation_sum(&self) -> f64 {
        self.activation_sum
    }

    pub fn wins(&self) -> u64 {
        self.wins
    }
}

/// What one learning step did to the structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnEvent {
    NodeCreated { node: usize },
    NodeUpdated { winner: usize, updated: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    pub event: LearnEvent,
    /// Inputs outside [0,1] clamped during fuzzification of this example.
    pub clamped_inputs: usize,
}

/// A readable if-then rule extracted from one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub node: usize,
    /// Per input dimension: the dominant MF index and its degree.
    pub antecedent: Vec<(usize, f64)>,
    pub class: usize,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct EfunnModel {
    config: EfunnConfig,
    partition: MembershipPartition,
    nodes: Vec<RuleNode>,
    /// Temporal links, row-major over node indices.
    w3: Vec<f64>,
    input_dims: usize,
    class_names: Vec<String>,
    normalizer: Normalizer,
    /// Winner of the previous training step and its activation; session
    /// state, never serialized.
    last_winner: Option<(usize, f64)>,
}

impl EfunnModel {
    pub fn new(
        config: EfunnConfig,
        input_dims: usize,
        class_names: Vec<String>,
        normalizer: Normalizer,
    ) -> Result<Self, EfunnError> {
        config.validate()?;
        if input_dims == 0 {
            return Err(EfunnError::BadConfig { reason: "input_dims must be positive".into() });
        }
        if class_names.len() < 2 {
            return Err(EfunnError::BadConfig { reason: "need at least 2 classes".into() });
        }
        for (i, a) in class_names.iter().enumerate() {
            if a.is_empty() || a.chars().any(|c| c.is_whitespace() || c == ',') {
                return Err(EfunnError::BadConfig {
                    reason: format!("class name {a:?} must be non-empty without spaces/commas"),
                });
            }
            if class_names[..i].contains(a) {
                return Err(EfunnError::BadConfig {
                    reason: format!("duplicate class name {a:?}"),
                });
            }
        }
        if normalizer.dims() != input_dims {
            return Err(EfunnError::DimensionMismatch {
                expected: input_dims,
                got: normalizer.dims(),
            });
        }
        let partition =
            MembershipPartition::new(config.mfs).map_err(EfunnError::Fuzzy)?;
        Ok(Self {
            config,
            partition,
            nodes: Vec::new(),
            w3: Vec::new(),
            input_dims,
            class_names,
            normalizer,
            last_winner: None,
        })
    }

    pub fn config(&self) -> &EfunnConfig {
        &self.config
    }

    pub fn set_age_thr(&mut self, age_thr: u64) {
        self.config.age_thr = age_thr;
    }

    pub fn set_act_thr(&mut self, act_thr: f64) -> Result<(), EfunnError> {
        if !(act_thr >= 0.0 && act_thr.is_finite()) {
            return Err(EfunnError::BadConfig {
                reason: format!("act_thr must be a finite non-negative number, got {act_thr}"),
            });
        }
        self.config.act_thr = act_thr;
        Ok(())
    }

    pub fn set_aggregation_thresholds(&mut self, thr1: f64, thr2: f64) -> Result<(), EfunnError> {
        for (name, v) in [("thr1", thr1), ("thr2", thr2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EfunnError::BadConfig {
                    reason: format!("{name} must be in [0,1], got {v}"),
                });
            }
        }
        self.config.thr1 = thr1;
        self.config.thr2 = thr2;
        Ok(())
    }

    pub fn nodes(&self) -> &[RuleNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn w3(&self) -> &[f64] {
        &self.w3
    }

    #[cfg(test)]
    pub(crate) fn w3_mut(&mut self) -> &mut [f64] {
        &mut self.w3
    }

    pub fn input_dims(&self) -> usize {
        self.input_dims
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn partition(&self) -> &MembershipPartition {
        &self.partition
    }

    fn fuzzify_target(&self, class: usize) -> FuzzyVector {
        fuzzify_vector(&one_hot(class, self.classes()), &self.partition)
    }

    /// Activation of every node for a fuzzified input, with an optional
    /// previous winner feeding the temporal term.
    pub fn activate_nodes(
        &self,
        xf: &FuzzyVector,
        prev_winner: Option<usize>,
    ) -> Result<Vec<f64>, EfunnError> {
        if self.nodes.is_empty() {
            return Err(EfunnError::EmptyModel);
        }
        let n = self.nodes.len();
        let mut out = Vec::with_capacity(n);
        for (j, node) in self.nodes.iter().enumerate() {
            let d = fuzzy_distance_flat(xf.degrees(), node.w1.degrees())?;
            let temporal = match prev_winner {
                Some(p) if self.config.tc != 0.0 && p < n => {
                    self.config.tc * self.w3[p * n + j]
                }
                _ => 0.0,
            };
            let a = match self.config.activation {
                Activation::Satlin => (1.0 - self.config.ss * d + temporal).clamp(0.0, 1.0),
                Activation::Radbas => {
                    let u = self.config.ss * d - temporal;
                    (-(u * u)).exp()
                }
            };
            out.push(a);
        }
        Ok(out)
    }

    /// Top `limit` node indices by activation, ties to the lower index.
    fn rank_nodes(activations: &[f64], indices: Vec<usize>, limit: usize) -> Vec<usize> {
        let mut ranked = indices;
        ranked.sort_by(|&i, &j| {
            activations[j]
                .partial_cmp(&activations[i])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        ranked.truncate(limit);
        ranked
    }

    /// Output-layer propagation of the chosen nodes: per output component a
    /// saturated weighted sum of the node centers.
    fn propagate(&self, chosen: &[usize], activations: &[f64]) -> Vec<f64> {
        let len = self.classes() * self.config.mfs;
        let mut out = vec![0.0; len];
        for &j in chosen {
            let a = activations[j];
            for (o, w) in out.iter_mut().zip(self.nodes[j].w2.degrees()) {
                *o += a * w;
            }
        }
        for o in &mut out {
            *o = o.clamp(0.0, 1.0);
        }
        out
    }

    fn create_node(&mut self, w1: FuzzyVector, w2: FuzzyVector) -> Result<usize, EfunnError> {
        self.grow_node(RuleNode { w1, w2, age: 1, activation_sum: 1.0, wins: 1 })
    }

    fn grow_node(&mut self, node: RuleNode) -> Result<usize, EfunnError> {
        if let Some(max) = self.config.max_nodes {
            if self.nodes.len() >= max {
                return Err(EfunnError::Capacity { max });
            }
        }
        let n = self.nodes.len();
        let mut w3 = vec![0.0; (n + 1) * (n + 1)];
        for r in 0..n {
            w3[r * (n + 1)..r * (n + 1) + n].copy_from_slice(&self.w3[r * n..(r + 1) * n]);
        }
        self.w3 = w3;
        self.nodes.push(node);
        Ok(n)
    }

    /// Record the step winner and, when a previous winner exists, reinforce
    /// the temporal link between the two.
    fn set_winner(&mut self, index: usize, activation: f64) {
        if self.config.lr3 > 0.0 {
            if let Some((prev, prev_act)) = self.last_winner {
                let n = self.nodes.len();
                self.w3[prev * n + index] += self.config.lr3 * prev_act * activation;
            }
        }
        self.last_winner = Some((index, activation));
    }

    /// Move a matched node toward the example: input center toward EX, output
    /// center toward TE scaled by the node's own propagated error.
    fn update_node(&mut self, j: usize, ex: &FuzzyVector, te: &FuzzyVector, a1: f64) {
        let lr1 = self.config.lr1;
        let lr2 = self.config.lr2;
        let node = &mut self.nodes[j];
        for (w, &e) in node.w1.degrees_mut().iter_mut().zip(ex.degrees()) {
            *w = (*w + lr1 * (e - *w)).clamp(0.0, 1.0);
        }
        for (w, &t) in node.w2.degrees_mut().iter_mut().zip(te.degrees()) {
            let a2 = (*w * a1).clamp(0.0, 1.0);
            *w = (*w + lr2 * (t - a2) * a1).clamp(0.0, 1.0);
        }
    }

    /// One step of the evolving loop for a normalized crisp example.
    pub fn learn_example(&mut self, x: &[f64], class: usize) -> Result<LearnOutcome, EfunnError> {
        if x.len() != self.input_dims {
            return Err(EfunnError::DimensionMismatch { expected: self.input_dims, got: x.len() });
        }
        if class >= self.classes() {
            return Err(EfunnError::UnknownClass { class, classes: self.classes() });
        }
        let clamped_inputs = count_out_of_range(x);
        let ex = fuzzify_vector(x, &self.partition);
        let te = self.fuzzify_target(class);

        if self.nodes.is_empty() {
            let node = self.create_node(ex, te)?;
            self.set_winner(node, 1.0);
            return Ok(LearnOutcome { event: LearnEvent::NodeCreated { node }, clamped_inputs });
        }

        let prev = self.last_winner.map(|(i, _)| i);
        let a1 = self.activate_nodes(&ex, prev)?;
        for (node, &a) in self.nodes.iter_mut().zip(&a1) {
            node.age += 1;
            node.activation_sum += a;
        }

        let candidates: Vec<usize> =
            (0..self.nodes.len()).filter(|&j| a1[j] >= self.config.sthr).collect();
        let matched = Self::rank_nodes(&a1, candidates, self.config.m_best);

        if matched.is_empty() {
            // no node activates above the sensitivity threshold
            let node = self.create_node(ex, te)?;
            self.set_winner(node, 1.0);
            return Ok(LearnOutcome { event: LearnEvent::NodeCreated { node }, clamped_inputs });
        }

        let a2 = self.propagate(&matched, &a1);
        let output_error = fuzzy_distance_flat(&a2, te.degrees())?;
        if output_error > self.config.errthr {
            // output too far off: a fresh node takes over the example, and
            // the matched nodes keep their centers (pulling them toward an
            // example they failed on would corrupt their consequents and
            // break exact recall of their own examples)
            let node = self.create_node(ex, te)?;
            self.set_winner(node, 1.0);
            return Ok(LearnOutcome { event: LearnEvent::NodeCreated { node }, clamped_inputs });
        }

        for &j in &matched {
            self.update_node(j, &ex, &te, a1[j]);
        }
        let winner = matched[0];
        self.nodes[winner].wins += 1;
        self.set_winner(winner, a1[winner]);
        Ok(LearnOutcome {
            event: LearnEvent::NodeUpdated { winner, updated: matched.len() },
            clamped_inputs,
        })
    }

    /// Single sequential pass over a normalized dataset.
    pub fn train_one_pass(
        &mut self,
        items: &[(Vec<f64>, usize)],
    ) -> Result<Vec<LearnOutcome>, EfunnError> {
        if items.is_empty() {
            return Err(EfunnError::BadConfig { reason: "training set is empty".into() });
        }
        let mut log = Vec::with_capacity(items.len());
        for (x, class) in items {
            log.push(self.learn_example(x, *class)?);
        }
        Ok(log)
    }

    /// Classify a normalized crisp vector: returns the winning class and the
    /// per-class scores.
    pub fn infer(&self, x: &[f64]) -> Result<(usize, Vec<f64>), EfunnError> {
        let prev = if self.config.tc > 0.0 { self.last_winner.map(|(i, _)| i) } else { None };
        self.infer_with_prev(x, prev)
    }

    /// Classification with caller-owned temporal state.
    pub fn infer_with_prev(
        &self,
        x: &[f64],
        prev_winner: Option<usize>,
    ) -> Result<(usize, Vec<f64>), EfunnError> {
        if self.nodes.is_empty() {
            return Err(EfunnError::EmptyModel);
        }
        if x.len() != self.input_dims {
            return Err(EfunnError::DimensionMismatch { expected: self.input_dims, got: x.len() });
        }
        let xf = fuzzify_vector(x, &self.partition);
        let a1 = self.activate_nodes(&xf, prev_winner)?;
        // propagate the matched set, exactly as during learning; for novel
        // inputs nothing clears the sensitivity threshold and the best
        // m nodes answer instead
        let matched: Vec<usize> =
            (0..self.nodes.len()).filter(|&j| a1[j] >= self.config.sthr).collect();
        let pool = if matched.is_empty() { (0..self.nodes.len()).collect() } else { matched };
        let chosen = Self::rank_nodes(&a1, pool, self.config.m_best);
        let a2 = self.propagate(&chosen, &a1);
        let scores = class_scores(&a2, self.classes(), &self.partition)?;
        let class = match argmax_class(&scores) {
            Ok(class) => class,
            // every chosen activation saturated to zero: no propagated signal,
            // so the top-ranked node answers with its own consequent
            Err(FuzzyError::NoWinner) => {
                let node_scores = class_scores(
                    self.nodes[chosen[0]].w2.degrees(),
                    self.classes(),
                    &self.partition,
                )?;
                argmax_class(&node_scores)?
            }
            Err(e) => return Err(e.into()),
        };
        Ok((class, scores))
    }

    /// Remove old, rarely activated nodes. `level` scales how aggressive the
    /// cut is: 0 removes nothing, 1 removes every candidate.
    pub fn prune(&mut self, level: f64) -> usize {
        let level = if level.is_nan() { 0.0 } else { level.clamp(0.0, 1.0) };
        let age_thr = self.config.age_thr;
        let act_thr = self.config.act_thr;
        let keep: Vec<bool> = self
            .nodes
            .iter()
            .map(|node| {
                if node.age <= age_thr {
                    return true;
                }
                let avg = node.activation_sum / node.age as f64;
                if avg >= act_thr {
                    return true;
                }
                let age_factor =
                    ((node.age - age_thr) as f64 / age_thr.max(1) as f64).min(1.0);
                let deficit = (act_thr - avg) / act_thr;
                let score = age_factor * deficit;
                score <= 1.0 - level
            })
            .collect();
        let removed = keep.iter().filter(|&&k| !k).count();
        if removed > 0 {
            self.retain_nodes(&keep);
        }
        removed
    }

    fn retain_nodes(&mut self, keep: &[bool]) {
        let survivors: Vec<usize> = (0..self.nodes.len()).filter(|&i| keep[i]).collect();
        let n_old = self.nodes.len();
        let n_new = survivors.len();
        let mut w3 = vec![0.0; n_new * n_new];
        for (r_new, &r_old) in survivors.iter().enumerate() {
            for (c_new, &c_old) in survivors.iter().enumerate() {
                w3[r_new * n_new + c_new] = self.w3[r_old * n_old + c_old];
            }
        }
        let mut idx = 0;
        self.nodes.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
        self.w3 = w3;
        self.last_winner = None;
    }

    /// Merge pairs of nodes whose input and output centers are within the
    /// configured thresholds, averaging the centers and summing statistics.
    pub fn aggregate(&mut self) -> Result<usize, EfunnError> {
        let mut merges = 0;
        loop {
            let mut found = None;
            'scan: for i in 0..self.nodes.len() {
                for j in (i + 1)..self.nodes.len() {
                    let d1 = fuzzy_distance_flat(
                        self.nodes[i].w1.degrees(),
                        self.nodes[j].w1.degrees(),
                    )?;
                    if d1 > self.config.thr1 {
                        continue;
                    }
                    let d2 = fuzzy_distance_flat(
                        self.nodes[i].w2.degrees(),
                        self.nodes[j].w2.degrees(),
                    )?;
                    if d2 <= self.config.thr2 {
                        found = Some((i, j));
                        break 'scan;
                    }
                }
            }
            let Some((i, j)) = found else { break };
            self.merge_pair(i, j);
            merges += 1;
        }
        Ok(merges)
    }

    fn merge_pair(&mut self, i: usize, j: usize) {
        let n = self.nodes.len();
        {
            let (w1j, w2j, age_j, act_j, wins_j) = {
                let nj = &self.nodes[j];
                (
                    nj.w1.degrees().to_vec(),
                    nj.w2.degrees().to_vec(),
                    nj.age,
                    nj.activation_sum,
                    nj.wins,
                )
            };
            let ni = &mut self.nodes[i];
            for (w, o) in ni.w1.degrees_mut().iter_mut().zip(&w1j) {
                *w = 0.5 * (*w + o);
            }
            for (w, o) in ni.w2.degrees_mut().iter_mut().zip(&w2j) {
                *w = 0.5 * (*w + o);
            }
            ni.age += age_j;
            ni.activation_sum += act_j;
            ni.wins += wins_j;
        }
        // fold the absorbed node's temporal links into the survivor
        for c in 0..n {
            self.w3[i * n + c] += self.w3[j * n + c];
        }
        for r in 0..n {
            self.w3[r * n + i] += self.w3[r * n + j];
        }
        let keep: Vec<bool> = (0..n).map(|k| k != j).collect();
        self.retain_nodes(&keep);
    }

    /// One if-then rule per node, ordered by node index.
    pub fn extract_rules(&self) -> Vec<Rule> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(index, node)| {
                let antecedent = (0..self.input_dims)
                    .map(|d| {
                        let seg = node.w1.segment(d);
                        let mut best = 0;
                        for (k, &v) in seg.iter().enumerate().skip(1) {
                            if v > seg[best] {
                                best = k;
                            }
                        }
                        (best, seg[best])
                    })
                    .collect();
                let scores = class_scores(node.w2.degrees(), self.classes(), &self.partition)
                    .expect("node output center has the model's shape");
                let mut class = 0;
                for (c, &s) in scores.iter().enumerate().skip(1) {
                    if s > scores[class] {
                        class = c;
                    }
                }
                Rule { node: index, antecedent, class, score: scores[class] }
            })
            .collect()
    }

    /// Render one rule with MF labels and the class name.
    pub fn render_rule(&self, rule: &Rule) -> String {
        let terms: Vec<String> = rule
            .antecedent
            .iter()
            .enumerate()
            .map(|(d, (mf, degree))| format!("x{d} is MF{mf} ({degree:.2})"))
            .collect();
        format!(
            "if {} then class {} (score {:.2})",
            terms.join(" and "),
            self.class_names[rule.class],
            rule.score
        )
    }

    /// Append a node with explicit fuzzy input/output centers.
    pub fn insert_node(&mut self, w1: FuzzyVector, w2: FuzzyVector) -> Result<usize, EfunnError> {
        let w1_len = self.input_dims * self.config.mfs;
        if w1.len() != w1_len {
            return Err(EfunnError::DimensionMismatch { expected: w1_len, got: w1.len() });
        }
        let w2_len = self.classes() * self.config.mfs;
        if w2.len() != w2_len {
            return Err(EfunnError::DimensionMismatch { expected: w2_len, got: w2.len() });
        }
        self.grow_node(RuleNode { w1, w2, age: 0, activation_sum: 0.0, wins: 0 })
    }

    /// Append a node encoding an if-then rule: one-hot antecedent MFs, the
    /// fuzzified one-hot class as consequent.
    pub fn insert_rule(&mut self, antecedent_mfs: &[usize], class: usize) -> Result<usize, EfunnError> {
        if antecedent_mfs.len() != self.input_dims {
            return Err(EfunnError::DimensionMismatch {
                expected: self.input_dims,
                got: antecedent_mfs.len(),
            });
        }
        let m = self.config.mfs;
        for &mf in antecedent_mfs {
            if mf >= m {
                return Err(EfunnError::UnknownMf { mf, mfs: m });
            }
        }
        if class >= self.classes() {
            return Err(EfunnError::UnknownClass { class, classes: self.classes() });
        }
        let mut degrees = vec![0.0; self.input_dims * m];
        for (d, &mf) in antecedent_mfs.iter().enumerate() {
            degrees[d * m + mf] = 1.0;
        }
        let w1 = FuzzyVector::from_degrees(degrees, self.input_dims, m)?;
        let w2 = self.fuzzify_target(class);
        self.insert_node(w1, w2)
    }

    /// Deterministic line-oriented text form; `from_text` restores it
    /// bit-exactly.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str("texclass-efunn 1\n");
        out.push_str(&format!("input_dims {}\n", self.input_dims));
        out.push_str(&format!("classes {}\n", self.class_names.len()));
        for name in &self.class_names {
            out.push_str(&format!("class {name}\n"));
        }
        out.push_str(&format!("sthr {}\n", c.sthr));
        out.push_str(&format!("errthr {}\n", c.errthr));
        out.push_str(&format!("lr1 {}\n", c.lr1));
        out.push_str(&format!("lr2 {}\n", c.lr2));
        out.push_str(&format!("lr3 {}\n", c.lr3));
        out.push_str(&format!("mbest {}\n", c.m_best));
        out.push_str(&format!("ss {}\n", c.ss));
        out.push_str(&format!("tc {}\n", c.tc));
        match c.max_nodes {
            Some(n) => out.push_str(&format!("max_nodes {n}\n")),
            None => out.push_str("max_nodes none\n"),
        }
        out.push_str(&format!("mfs {}\n", c.mfs));
        out.push_str(&format!("activation {}\n", c.activation));
        out.push_str(&format!("age_thr {}\n", c.age_thr));
        out.push_str(&format!("act_thr {}\n", c.act_thr));
        out.push_str(&format!("thr1 {}\n", c.thr1));
        out.push_str(&format!("thr2 {}\n", c.thr2));
        out.push_str(&format!("norm {}\n", self.normalizer.dims()));
        for &(lo, hi) in self.normalizer.pairs() {
            out.push_str(&format!("range {lo} {hi}\n"));
        }
        out.push_str(&format!("nodes {}\n", self.nodes.len()));
        for node in &self.nodes {
            out.push_str(&format!("node {} {} {}\n", node.age, node.activation_sum, node.wins));
            out.push_str("w1");
            for v in node.w1.degrees() {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
            out.push_str("w2");
            for v in node.w2.degrees() {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        let n = self.nodes.len();
        for r in 0..n {
            out.push_str("w3");
            for v in &self.w3[r * n..(r + 1) * n] {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self, EfunnError> {
        let mut reader = LineReader::new(text);
        reader.expect_exact("texclass-efunn 1")?;
        let input_dims: usize = reader.kv("input_dims")?;
        if input_dims == 0 {
            return Err(reader.error("input_dims must be positive"));
        }
        let class_count: usize = reader.kv("classes")?;
        if class_count < 2 {
            return Err(reader.error("need at least 2 classes"));
        }
        let mut class_names = Vec::new();
        for _ in 0..class_count {
            class_names.push(reader.kv_str("class")?.to_string());
        }
        let config = EfunnConfig {
            sthr: reader.kv("sthr")?,
            errthr: reader.kv("errthr")?,
            lr1: reader.kv("lr1")?,
            lr2: reader.kv("lr2")?,
            lr3: reader.kv("lr3")?,
            m_best: reader.kv("mbest")?,
            ss: reader.kv("ss")?,
            tc: reader.kv("tc")?,
            max_nodes: {
                let raw = reader.kv_str("max_nodes")?;
                if raw == "none" {
                    None
                } else {
                    Some(raw.parse().map_err(|_| reader.error("bad max_nodes"))?)
                }
            },
            mfs: reader.kv("mfs")?,
            activation: reader
                .kv_str("activation")?
                .parse()
                .map_err(|e: String| reader.error(&e))?,
            age_thr: reader.kv("age_thr")?,
            act_thr: reader.kv("act_thr")?,
            thr1: reader.kv("thr1")?,
            thr2: reader.kv("thr2")?,
        };
        let norm_dims: usize = reader.kv("norm")?;
        if norm_dims != input_dims {
            return Err(reader.error("normalization table size differs from input_dims"));
        }
        let mut pairs = Vec::new();
        for _ in 0..norm_dims {
            let parts = reader.fields("range")?;
            if parts.len() != 2 {
                return Err(reader.error("range line needs min and max"));
            }
            let lo = parse_finite(&parts[0]).ok_or_else(|| reader.error("bad range min"))?;
            let hi = parse_finite(&parts[1]).ok_or_else(|| reader.error("bad range max"))?;
            pairs.push((lo, hi));
        }
        let normalizer = Normalizer::from_pairs(pairs)
            .map_err(|e| reader.error(&e.to_string()))?;

        let node_count: usize = reader.kv("nodes")?;
        let w1_len = input_dims * config.mfs;
        let w2_len = class_count * config.mfs;
        let mut nodes = Vec::new();
        for _ in 0..node_count {
            let stats = reader.fields("node")?;
            if stats.len() != 3 {
                return Err(reader.error("node line needs age, activation sum, wins"));
            }
            let age: u64 = stats[0].parse().map_err(|_| reader.error("bad node age"))?;
            let activation_sum =
                parse_finite(&stats[1]).ok_or_else(|| reader.error("bad activation sum"))?;
            let wins: u64 = stats[2].parse().map_err(|_| reader.error("bad node wins"))?;
            let w1 = reader.degrees("w1", w1_len)?;
            let w2 = reader.degrees("w2", w2_len)?;
            nodes.push(RuleNode {
                w1: FuzzyVector::from_degrees(w1, input_dims, config.mfs)
                    .map_err(|e| reader.error(&e.to_string()))?,
                w2: FuzzyVector::from_degrees(w2, class_count, config.mfs)
                    .map_err(|e| reader.error(&e.to_string()))?,
                age,
                activation_sum,
                wins,
            });
        }
        let mut w3 = Vec::new();
        for _ in 0..node_count {
            w3.extend(reader.degrees("w3", node_count)?);
        }
        reader.expect_exact("end")?;
        reader.expect_eof()?;

        let mut model = EfunnModel::new(config, input_dims, class_names, normalizer)
            .map_err(|e| match e {
                EfunnError::BadConfig { reason } => EfunnError::Parse { line: 0, reason },
                other => other,
            })?;
        model.nodes = nodes;
        model.w3 = w3;
        Ok(model)
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        Self { lines: text.lines(), line_no: 0 }
    }

    fn error(&self, reason: &str) -> EfunnError {
        EfunnError::Parse { line: self.line_no, reason: reason.to_string() }
    }

    fn next_line(&mut self) -> Result<&'a str, EfunnError> {
        self.line_no += 1;
        self.lines.next().ok_or(EfunnError::Parse {
            line: self.line_no,
            reason: "unexpected end of file".to_string(),
        })
    }

    fn expect_exact(&mut self, expected: &str) -> Result<(), EfunnError> {
        let line = self.next_line()?;
        if line != expected {
            return Err(self.error(&format!("expected {expected:?}, got {line:?}")));
        }
        Ok(())
    }

    fn expect_eof(&mut self) -> Result<(), EfunnError> {
        self.line_no += 1;
        match self.lines.next() {
            None => Ok(()),
            Some(_) => Err(self.error("trailing data after end marker")),
        }
    }

    fn kv_str(&mut self, key: &str) -> Result<&'a str, EfunnError> {
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.error(&format!("expected `{key} <value>`, got {line:?}")))
    }

    fn kv<T: FromStr>(&mut self, key: &str) -> Result<T, EfunnError> {
        let raw = self.kv_str(key)?;
        raw.parse().map_err(|_| self.error(&format!("bad value {raw:?} for {key}")))
    }

    fn fields(&mut self, key: &str) -> Result<Vec<String>, EfunnError> {
        let raw = self.kv_str(key)?;
        Ok(raw.split(' ').map(str::to_string).collect())
    }

    fn degrees(&mut self, key: &str, expected: usize) -> Result<Vec<f64>, EfunnError> {
        let raw = self.kv_str(key)?;
        let mut values = Vec::new();
        for tok in raw.split(' ') {
            values.push(parse_finite(tok).ok_or_else(|| {
                self.error(&format!("bad {key} value {tok:?}"))
            })?);
        }
        if values.len() != expected {
            return Err(self.error(&format!(
                "{key} line has {} values, expected {expected}",
                values.len()
            )));
        }
        Ok(values)
    }
}
