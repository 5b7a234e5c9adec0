//! Replay of a finite staged free-group construction and the per-pair
//! audits of its invariants.
//!
//! A plan starts from a free group of rank `r0` (basis `g1..g{r0}`) and
//! applies steps in order:
//!
//! * `nonE` adjoins one fresh free generator (a free product with Z),
//! * `E` applies the splitting embedding of [`crate::construction`] with a
//!   user-declared partition of the current basis into x / y-family /
//!   t-family roles (fresh `z{stage}_{i}` generators appear),
//! * `limit` re-bases on the union of the prior stages, which at finite
//!   scale equals the previous stage.
//!
//! Alongside the groups, the replay maintains a certificate ledger: for
//! every stage whose outgoing step is not an E step, a complement set of
//! words extending the stage's image to a free basis of each later stage.
//! E-origin stages never receive a certificate; for them the audit records
//! conjugation evidence instead. That asymmetry is the finite shadow of the
//! free-factor dichotomy: at truncation even an E-image extends to a basis
//! (by the last z-generator), so non-free-factor-ness is not finitely
//! certifiable and the ledger is what distinguishes the two stage kinds.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::construction::{Homomorphism, PhiMap};
use crate::error::{Error, Result};
use crate::matrix::smith_normal_form;
use crate::report::VerificationReport;
use crate::subgroup::{is_free_basis_of, CoreGraph};
use crate::words::{Alphabet, ReducedWord};

/// Partition of the current basis consumed by an E step: the `y`-family
/// (first name distinguished) and the `t`-family; every remaining basis
/// name plays an x role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRoles {
    pub y: Vec<String>,
    pub t: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StageKind {
    #[serde(rename = "nonE")]
    NonESuccessor,
    #[serde(rename = "E")]
    ESuccessor { split: SplitRoles },
    #[serde(rename = "limit")]
    Limit,
}

impl StageKind {
    pub fn label(&self) -> &'static str {
        match self {
            StageKind::NonESuccessor => "nonE",
            StageKind::ESuccessor { .. } => "E",
            StageKind::Limit => "limit",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StagePlan {
    pub r0: usize,
    pub stages: Vec<StageKind>,
}

/// One group of the replayed tower.
#[derive(Debug, Clone)]
pub struct StageGroup {
    pub index: usize,
    pub label: String,
    pub basis: Alphabet,
    /// Embedding of the previous stage's basis (absent for stage 0).
    pub embedding: Option<Homomorphism>,
    /// Index of the last stage at which the group actually changed
    /// (limit stages repeat their predecessor's group).
    pub material: usize,
    /// The splitting embedding that produced this stage, for E stages.
    pub phi: Option<PhiMap>,
}

/// The replayed tower plus the certificate ledger.
#[derive(Debug, Clone)]
pub struct StageTrace {
    pub plan: StagePlan,
    pub stages: Vec<StageGroup>,
    /// certificates[beta][alpha]: complement words (in stage-beta
    /// coordinates) extending the image of stage alpha's basis to a free
    /// basis of stage beta. Present exactly for non-E-origin alpha.
    pub certificates: Vec<BTreeMap<usize, Vec<ReducedWord>>>,
}

/// Replays a plan deterministically.
pub fn run(plan: &StagePlan) -> Result<StageTrace> {
    if plan.r0 == 0 {
        return Err(Error::Plan("initial rank r0 must be at least 1".into()));
    }
    let basis0 = Alphabet::new((1..=plan.r0).map(|i| format!("g{i}")))
        .map_err(|e| Error::Plan(e.to_string()))?;
    let mut stages = vec![StageGroup {
        index: 0,
        label: "initial".into(),
        basis: basis0,
        embedding: None,
        material: 0,
        phi: None,
    }];
    let mut certificates: Vec<BTreeMap<usize, Vec<ReducedWord>>> = vec![BTreeMap::new()];
    let mut fresh_counter = plan.r0 + 1;

    for (step, kind) in plan.stages.iter().enumerate() {
        let new_index = step + 1;
        let prev = &stages[step];
        let prev_basis = prev.basis.clone();
        let prev_material = prev.material;
        let prev_certs = certificates[step].clone();

        let (group, new_certs) = match kind {
            StageKind::NonESuccessor => {
                let fresh = format!("g{fresh_counter}");
                fresh_counter += 1;
                let basis =
                    Alphabet::new(prev_basis.names().iter().cloned().chain([fresh.clone()]))
                        .map_err(|e| Error::Plan(e.to_string()))?;
                let images = prev_basis
                    .names()
                    .iter()
                    .map(|n| basis.generator(basis.index_of(n).expect("kept name")))
                    .collect::<Result<Vec<_>>>()?;
                let embedding = Homomorphism::new(prev_basis.clone(), basis.clone(), images)?;
                let fresh_word = basis.generator(basis.index_of(&fresh).expect("fresh"))?;
                let mut certs = BTreeMap::new();
                for (&alpha, words) in &prev_certs {
                    let mut mapped = words
                        .iter()
                        .map(|w| embedding.apply(w))
                        .collect::<Result<Vec<_>>>()?;
                    mapped.push(fresh_word.clone());
                    certs.insert(alpha, mapped);
                }
                certs.insert(step, vec![fresh_word]);
                (
                    StageGroup {
                        index: new_index,
                        label: "nonE".into(),
                        basis,
                        embedding: Some(embedding),
                        material: new_index,
                        phi: None,
                    },
                    certs,
                )
            }
            StageKind::Limit => {
                let embedding = Homomorphism::identity(&prev_basis);
                let mut certs = prev_certs.clone();
                certs.insert(step, Vec::new());
                (
                    StageGroup {
                        index: new_index,
                        label: "limit".into(),
                        basis: prev_basis.clone(),
                        embedding: Some(embedding),
                        material: prev_material,
                        phi: None,
                    },
                    certs,
                )
            }
            StageKind::ESuccessor { split } => {
                validate_split(&prev_basis, split)?;
                let x: Vec<String> = prev_basis
                    .names()
                    .iter()
                    .filter(|n| !split.y.contains(n) && !split.t.contains(n))
                    .cloned()
                    .collect();
                let z: Vec<String> = (0..=split.t.len())
                    .map(|i| format!("z{new_index}_{i}"))
                    .collect();
                let phi = PhiMap::construct(x, split.y.clone(), split.t.clone(), z.clone())
                    .map_err(|e| Error::Plan(e.to_string()))?;
                let basis = phi.codomain().clone();
                let images = prev_basis
                    .names()
                    .iter()
                    .map(|n| phi.image_of(n).cloned())
                    .collect::<Result<Vec<_>>>()?;
                let embedding = Homomorphism::new(prev_basis.clone(), basis.clone(), images)?;
                let z_last = basis.generator(basis.index_of(z.last().unwrap()).expect("z_N"))?;
                let mut certs = BTreeMap::new();
                for (&alpha, words) in &prev_certs {
                    let mut mapped = words
                        .iter()
                        .map(|w| embedding.apply(w))
                        .collect::<Result<Vec<_>>>()?;
                    mapped.push(z_last.clone());
                    certs.insert(alpha, mapped);
                }
                // no certificate entry for the E-origin stage itself
                (
                    StageGroup {
                        index: new_index,
                        label: "E".into(),
                        basis,
                        embedding: Some(embedding),
                        material: new_index,
                        phi: Some(phi),
                    },
                    certs,
                )
            }
        };
        stages.push(group);
        certificates.push(new_certs);
    }

    Ok(StageTrace {
        plan: plan.clone(),
        stages,
        certificates,
    })
}

fn validate_split(basis: &Alphabet, split: &SplitRoles) -> Result<()> {
    if split.y.is_empty() {
        return Err(Error::Plan("E split needs a nonempty y-family".into()));
    }
    if split.t.is_empty() {
        return Err(Error::Plan("E split needs a nonempty t-family".into()));
    }
    for name in split.y.iter().chain(&split.t) {
        if basis.index_of(name).is_none() {
            return Err(Error::Plan(format!(
                "split role {name:?} is not a basis generator of the current stage"
            )));
        }
    }
    for name in &split.y {
        if split.t.contains(name) {
            return Err(Error::Plan(format!(
                "split role {name:?} appears in both the y- and t-family"
            )));
        }
    }
    let mut seen: Vec<&String> = Vec::new();
    for name in split.y.iter().chain(&split.t) {
        if seen.contains(&name) {
            return Err(Error::Plan(format!("split role {name:?} repeated")));
        }
        seen.push(name);
    }
    Ok(())
}

impl StageTrace {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// True when the step out of stage `alpha` applies the splitting
    /// embedding.
    pub fn is_e_origin(&self, alpha: usize) -> bool {
        matches!(
            self.plan.stages.get(alpha),
            Some(StageKind::ESuccessor { .. })
        )
    }

    /// Composed embedding of stage `alpha` into stage `beta`.
    pub fn composed_embedding(&self, alpha: usize, beta: usize) -> Result<Homomorphism> {
        if alpha > beta || beta >= self.stages.len() {
            return Err(Error::Invalid(format!(
                "stage pair ({alpha}, {beta}) out of range"
            )));
        }
        let mut hom = Homomorphism::identity(&self.stages[alpha].basis);
        for stage in &self.stages[alpha + 1..=beta] {
            hom = hom.then(stage.embedding.as_ref().expect("successor stage"))?;
        }
        Ok(hom)
    }

    /// JSON rendering of the tower (bases, kinds, embeddings).
    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|s| {
                let embedding: Value = match &s.embedding {
                    None => Value::Null,
                    Some(h) => Value::Object(
                        h.domain()
                            .names()
                            .iter()
                            .zip(h.images())
                            .map(|(n, w)| (n.clone(), Value::String(w.to_string())))
                            .collect(),
                    ),
                };
                json!({
                    "index": s.index,
                    "kind": s.label,
                    "basis": s.basis.names(),
                    "material": s.material,
                    "embedding": embedding,
                })
            })
            .collect();
        json!({ "r0": self.plan.r0, "stages": stages })
    }
}

/// Audits the four stage invariants over every pair `alpha < beta`:
/// (i) the composed image freely generates at full rank, (ii) properness
/// exactly when a material stage intervenes, (iii) the free-factor
/// dichotomy (ledger certificate for non-E-origin stages, conjugation
/// evidence for E-origin stages), (iv) sampled commutator-intersection
/// equality in both coordinate systems.
pub fn check_invariants(
    trace: &StageTrace,
    samples: usize,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let count = trace.stage_count();

    // Conjugation evidence per E stage, computed once on the immediate step.
    let mut evidence: BTreeMap<usize, VerificationReport> = BTreeMap::new();
    for (alpha, stage) in trace.stages.iter().enumerate().skip(1) {
        if let Some(phi) = &stage.phi {
            evidence.insert(alpha - 1, phi.verify_normal_closure_evidence()?);
        }
    }

    for beta in 1..count {
        for alpha in 0..beta {
            let pair = format!("[{alpha}<{beta}]");
            let params = json!({ "alpha": alpha, "beta": beta });
            let hom = trace.composed_embedding(alpha, beta)?;
            let images = hom.images().to_vec();
            let beta_basis = &trace.stages[beta].basis;
            let graph = CoreGraph::fold(beta_basis, &images)?;

            // (i) the image freely generates at the source rank
            let expected_rank = trace.stages[alpha].basis.len();
            let rank_ok = graph.rank() == expected_rank;
            reports.push(VerificationReport::from_outcome(
                format!("stage_rank{pair}"),
                rank_ok,
                params.clone(),
                if rank_ok {
                    json!({ "rank": expected_rank })
                } else {
                    json!({ "expected": expected_rank, "actual": graph.rank() })
                },
            ));

            // (ii) properness exactly when the group actually grew
            let expected_proper = trace.stages[beta].material > trace.stages[alpha].material;
            let mut outside: Option<String> = None;
            for i in 0..beta_basis.len() {
                let gen = beta_basis.generator(i)?;
                if !graph.contains(&gen)? {
                    outside = Some(gen.to_string());
                    break;
                }
            }
            let proper_ok = outside.is_some() == expected_proper;
            reports.push(VerificationReport::from_outcome(
                format!("stage_properness{pair}"),
                proper_ok,
                params.clone(),
                json!({
                    "expected_proper": expected_proper,
                    "observed_proper": outside.is_some(),
                    "outside_generator": outside,
                }),
            ));

            // (iii) free-factor dichotomy
            if trace.is_e_origin(alpha) {
                let ev = &evidence[&alpha];
                debug_assert!(!trace.certificates[beta].contains_key(&alpha));
                reports.push(VerificationReport::from_outcome(
                    format!("stage_free_factor{pair}"),
                    ev.pass,
                    params.clone(),
                    json!({
                        "certified_free_factor": false,
                        "evidence_stage": alpha + 1,
                        "closure_evidence": ev.witnesses,
                    }),
                ));
            } else {
                let cert = trace.certificates[beta].get(&alpha);
                let (ok, detail) = match cert {
                    None => (false, json!({ "reason": "missing ledger certificate" })),
                    Some(words) => {
                        let mut all = images.clone();
                        all.extend(words.iter().cloned());
                        let ok = is_free_basis_of(&all, beta_basis)?;
                        (
                            ok,
                            json!({
                                "certified_free_factor": ok,
                                "complement": words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                            }),
                        )
                    }
                };
                reports.push(VerificationReport::from_outcome(
                    format!("stage_free_factor{pair}"),
                    ok,
                    params.clone(),
                    detail,
                ));
            }

            // (iv) sampled commutator-intersection equality
            let basis = graph.basis();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((alpha as u64) << 32) ^ (beta as u64));
            let mut failures = Vec::new();
            if !images.is_empty() {
                for _ in 0..samples {
                    let factors = rng.gen_range(1..=8usize);
                    let mut w = beta_basis.identity();
                    for _ in 0..factors {
                        let pick = &images[rng.gen_range(0..images.len())];
                        let factor = if rng.gen::<bool>() {
                            pick.clone()
                        } else {
                            pick.invert()
                        };
                        w = w.multiply(&factor)?;
                    }
                    let ambient_zero = w.exponent_vector().is_zero();
                    let coords = basis.express(&w)?;
                    let image_zero = coords.exponent_vector().is_zero();
                    if ambient_zero != image_zero {
                        failures.push(json!({
                            "word": w.to_string(),
                            "ambient_exponents_zero": ambient_zero,
                            "image_coordinates_zero": image_zero,
                        }));
                    }
                }
            }
            let mut iv_params = params.clone();
            iv_params["samples"] = json!(samples);
            iv_params["seed"] = json!(seed);
            reports.push(VerificationReport::from_outcome(
                format!("stage_commutator{pair}"),
                failures.is_empty(),
                iv_params,
                if failures.is_empty() {
                    Value::Object(Default::default())
                } else {
                    json!({ "failures": failures })
                },
            ));
        }
    }
    Ok(reports)
}

/// Per-step Smith normal forms of the abelianized embeddings plus the
/// rank-growth summary.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerStep {
    pub stage: usize,
    pub kind: String,
    pub diag: Vec<i64>,
    pub cokernel_rank: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbelianizationLedger {
    pub steps: Vec<LedgerStep>,
    pub rank_growth: usize,
    pub final_rank: usize,
    pub expected_final_rank: usize,
    pub pass: bool,
}

impl AbelianizationLedger {
    pub fn to_report(&self) -> VerificationReport {
        VerificationReport::from_outcome(
            "abelianization_ledger",
            self.pass,
            json!({ "steps": self.steps.len() }),
            serde_json::to_value(self).expect("serializable"),
        )
    }
}

/// Every successor step must abelianize to a split embedding with free
/// cokernel of rank exactly 1 (all invariant factors 1); limit steps repeat
/// the group, so their cokernel must vanish. The final abelianization rank
/// equals `r0` plus the number of rank-growing steps.
pub fn abelianization_ledger(trace: &StageTrace) -> Result<AbelianizationLedger> {
    let mut steps = Vec::new();
    let mut growth = 0usize;
    for stage in trace.stages.iter().skip(1) {
        let hom = stage.embedding.as_ref().expect("successor stage");
        let m = hom.abelianized();
        let snf = smith_normal_form(&m);
        let cokernel_rank = m.rows() - snf.rank;
        let expected_cokernel = if stage.label == "limit" { 0 } else { 1 };
        if expected_cokernel == 1 {
            growth += 1;
        }
        let pass = snf.all_invariant_factors_one() && cokernel_rank == expected_cokernel;
        steps.push(LedgerStep {
            stage: stage.index,
            kind: stage.label.clone(),
            diag: snf.diag,
            cokernel_rank,
            pass,
        });
    }
    let final_rank = trace.stages.last().expect("stage 0 exists").basis.len();
    let expected_final_rank = trace.plan.r0 + growth;
    let pass = steps.iter().all(|s| s.pass) && final_rank == expected_final_rank;
    Ok(AbelianizationLedger {
        steps,
        rank_growth: growth,
        final_rank,
        expected_final_rank,
        pass,
    })
}
