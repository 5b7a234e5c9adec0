//! Bounded exhaustive oracle for the conjugation length inequality in a
//! two-factor free product.
//!
//! The scenario places a distinguished generator `y` in factor 0 and
//! `t0`, `t1` in factor 1. For a candidate `z1` the step check computes
//! `z0 = z1 (y^-1 t0) z1^-1` and evaluates:
//!
//! * (c1) the cyclic reduction of `z1` is a cyclic shift of `y^-1 t1`,
//! * (c2) `z1` lies outside the embedded subgroup generated by `y`, `t0`,
//!   `t1` (in the flattened free group on both factor alphabets),
//! * the inequality `Len(z0) >= Len(z1) + 1`.
//!
//! The search enumerates every normal form with at most `S` syllables whose
//! syllable elements have reduced length at most `W`, in a fixed order
//! (syllable count ascending, factor-0 starts first, then lexicographic),
//! and returns the first candidate passing the enabled side conditions
//! whose inequality fails. The expected outcome is absence. Disabling (c1)
//! demonstrates that the side conditions are load-bearing: witnesses then
//! exist.
//!
//! The enumeration space is partitioned by first syllable; partitions are
//! searched concurrently and merged by candidate order, so the outcome does
//! not depend on scheduling. The candidate total is computed in closed form
//! up front and checked against the budget before any work starts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::free_product::{is_cyclic_shift, FactorSpec, NormalForm, Syllable};
use crate::subgroup::CoreGraph;
use crate::words::{enumerate_reduced, Alphabet, ReducedWord};

/// Factor alphabets plus the distinguished generators.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: FactorSpec,
    y: usize,
    t0: usize,
    t1: usize,
}

/// Serializable scenario description (the JSON file format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub factor0: Vec<String>,
    pub factor1: Vec<String>,
    pub y: String,
    pub t0: String,
    pub t1: String,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<Scenario> {
        let spec = FactorSpec::new(
            Alphabet::new(self.factor0.iter().cloned())?,
            Alphabet::new(self.factor1.iter().cloned())?,
        )?;
        Scenario::new(spec, &self.y, &self.t0, &self.t1)
    }
}

impl Scenario {
    pub fn new(spec: FactorSpec, y: &str, t0: &str, t1: &str) -> Result<Scenario> {
        let y = spec
            .factor(0)
            .index_of(y)
            .ok_or_else(|| Error::UnknownGenerator(y.into()))?;
        let t0i = spec
            .factor(1)
            .index_of(t0)
            .ok_or_else(|| Error::UnknownGenerator(t0.into()))?;
        let t1i = spec
            .factor(1)
            .index_of(t1)
            .ok_or_else(|| Error::UnknownGenerator(t1.into()))?;
        if t0i == t1i {
            return Err(Error::Invalid("t0 and t1 must be distinct".into()));
        }
        Ok(Scenario {
            spec,
            y,
            t0: t0i,
            t1: t1i,
        })
    }

    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    fn factor0_word(&self, gen: usize, positive: bool) -> ReducedWord {
        let w = self.spec.factor(0).generator(gen).expect("in range");
        if positive {
            w
        } else {
            w.invert()
        }
    }

    fn factor1_word(&self, gen: usize, positive: bool) -> ReducedWord {
        let w = self.spec.factor(1).generator(gen).expect("in range");
        if positive {
            w
        } else {
            w.invert()
        }
    }

    /// `y^-1 · t0`, the element being conjugated.
    pub fn conjugand(&self) -> NormalForm {
        self.spec
            .normalize(&[
                Syllable {
                    factor: 0,
                    element: self.factor0_word(self.y, false),
                },
                Syllable {
                    factor: 1,
                    element: self.factor1_word(self.t0, true),
                },
            ])
            .expect("well-formed")
    }

    /// `y^-1 · t1`, the required cyclic-reduction shape of candidates.
    pub fn target(&self) -> NormalForm {
        self.spec
            .normalize(&[
                Syllable {
                    factor: 0,
                    element: self.factor0_word(self.y, false),
                },
                Syllable {
                    factor: 1,
                    element: self.factor1_word(self.t1, true),
                },
            ])
            .expect("well-formed")
    }

    /// The folded subgroup generated by the embedded letters `y`, `t0`,
    /// `t1` inside the flattened free group on both factors.
    pub fn embedded_subgroup(&self) -> CoreGraph {
        let combined = self.spec.combined();
        let offset = self.spec.factor(0).len();
        let gens = vec![
            combined.generator(self.y).expect("y"),
            combined.generator(offset + self.t0).expect("t0"),
            combined.generator(offset + self.t1).expect("t1"),
        ];
        CoreGraph::fold(combined, &gens).expect("single letters")
    }
}

/// Outcome of the per-candidate step check.
#[derive(Debug, Clone)]
pub struct StepVerdict {
    pub z0: NormalForm,
    pub len_z1: usize,
    pub len_z0: usize,
    /// (c1) cyclic reduction of z1 is a cyclic shift of y^-1 t1.
    pub c1_shift_shape: bool,
    /// (c2) z1 lies outside the embedded subgroup <y, t0, t1>.
    pub c2_outside_embedding: bool,
    /// Len(z0) >= Len(z1) + 1.
    pub inequality_holds: bool,
}

impl StepVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "z0": self.z0.to_string(),
            "len_z1": self.len_z1,
            "len_z0": self.len_z0,
            "c1_shift_shape": self.c1_shift_shape,
            "c2_outside_embedding": self.c2_outside_embedding,
            "inequality_holds": self.inequality_holds,
        })
    }
}

/// Computes `z0 = z1 (y^-1 t0) z1^-1` and evaluates the side conditions and
/// the length inequality for one candidate.
pub fn check_length_step(z1: &NormalForm, scenario: &Scenario) -> Result<StepVerdict> {
    if z1.is_identity() {
        return Err(Error::TrivialInput("z1"));
    }
    if z1.spec() != scenario.spec() {
        return Err(Error::AlphabetMismatch(
            "candidate is not over the scenario factors".into(),
        ));
    }
    let z0 = z1.multiply(&scenario.conjugand())?.multiply(&z1.invert())?;
    let (core, _) = z1.cyclic_reduce();
    let c1 = core.len() == 2 && is_cyclic_shift(&core, &scenario.target())?;
    let c2 = !scenario.embedded_subgroup().contains(&z1.flatten())?;
    let inequality_holds = z0.len() > z1.len();
    Ok(StepVerdict {
        len_z1: z1.len(),
        len_z0: z0.len(),
        z0,
        c1_shift_shape: c1,
        c2_outside_embedding: c2,
        inequality_holds,
    })
}

/// Which factor a nontrivial candidate's last syllable lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailFactor {
    Factor0,
    Factor1,
}

pub fn classify_tail(z1: &NormalForm) -> Result<TailFactor> {
    match z1.syllables().last() {
        None => Err(Error::TrivialInput("z1")),
        Some(s) if s.factor == 0 => Ok(TailFactor::Factor0),
        Some(_) => Ok(TailFactor::Factor1),
    }
}

/// Decomposition of a candidate into maximal leading and trailing
/// two-syllable pairs around a middle word; concatenating
/// `leading^m ++ middle ++ trailing^k` restores the candidate exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeAudit {
    /// m: maximal count of leading pairs.
    pub leading_pairs: usize,
    /// k: maximal count of trailing pairs.
    pub trailing_pairs: usize,
    pub middle: NormalForm,
}

fn pair_matches(
    syllables: &[Syllable],
    at: usize,
    first: (usize, &ReducedWord),
    second: (usize, &ReducedWord),
) -> bool {
    syllables[at].factor == first.0
        && &syllables[at].element == first.1
        && syllables[at + 1].factor == second.0
        && &syllables[at + 1].element == second.1
}

fn audit_shape(
    z1: &NormalForm,
    scenario: &Scenario,
    leading: ((usize, ReducedWord), (usize, ReducedWord)),
    trailing: ((usize, ReducedWord), (usize, ReducedWord)),
) -> Result<ShapeAudit> {
    let syllables = z1.syllables();
    let n = syllables.len();
    let mut k = 0;
    while 2 * (k + 1) <= n
        && pair_matches(
            syllables,
            n - 2 * (k + 1),
            (trailing.0 .0, &trailing.0 .1),
            (trailing.1 .0, &trailing.1 .1),
        )
    {
        k += 1;
    }
    let prefix = &syllables[..n - 2 * k];
    let mut m = 0;
    while 2 * (m + 1) <= prefix.len()
        && pair_matches(
            prefix,
            2 * m,
            (leading.0 .0, &leading.0 .1),
            (leading.1 .0, &leading.1 .1),
        )
    {
        m += 1;
    }
    let middle = scenario.spec().normalize(&prefix[2 * m..])?;
    debug_assert_eq!(middle.syllables(), &prefix[2 * m..]);
    Ok(ShapeAudit {
        leading_pairs: m,
        trailing_pairs: k,
        middle,
    })
}

/// Shape audit for candidates ending in factor 0:
/// `z1 = (y^-1 t0)^m u (t0^-1 y)^k` with m, k maximal.
pub fn audit_factor0_tail(z1: &NormalForm, scenario: &Scenario) -> Result<ShapeAudit> {
    if classify_tail(z1)? != TailFactor::Factor0 {
        return Err(Error::Invalid(
            "shape audit for factor-0 tails requires the last syllable in factor 0".into(),
        ));
    }
    let y_pos = scenario.factor0_word(scenario.y, true);
    let y_neg = scenario.factor0_word(scenario.y, false);
    let t0_pos = scenario.factor1_word(scenario.t0, true);
    let t0_neg = scenario.factor1_word(scenario.t0, false);
    audit_shape(
        z1,
        scenario,
        ((0, y_neg), (1, t0_pos)),
        ((1, t0_neg), (0, y_pos)),
    )
}

/// Shape audit for candidates ending in factor 1:
/// `z1 = (t0^-1 y)^m u (y^-1 t0)^k` with m, k maximal.
pub fn audit_factor1_tail(z1: &NormalForm, scenario: &Scenario) -> Result<ShapeAudit> {
    if classify_tail(z1)? != TailFactor::Factor1 {
        return Err(Error::Invalid(
            "shape audit for factor-1 tails requires the last syllable in factor 1".into(),
        ));
    }
    let y_pos = scenario.factor0_word(scenario.y, true);
    let y_neg = scenario.factor0_word(scenario.y, false);
    let t0_pos = scenario.factor1_word(scenario.t0, true);
    let t0_neg = scenario.factor1_word(scenario.t0, false);
    audit_shape(
        z1,
        scenario,
        ((1, t0_neg), (0, y_pos)),
        ((0, y_neg), (1, t0_pos)),
    )
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchBounds {
    /// S: maximal syllable count of a candidate.
    pub max_syllables: usize,
    /// W: maximal reduced length of a syllable element.
    pub max_syllable_len: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub bounds: SearchBounds,
    /// Hard cap on the enumeration size; exceeding it is an error, never a
    /// silent truncation.
    pub max_candidates: u64,
    /// Fault injection: skip condition (c1).
    pub disable_c1: bool,
}

/// A candidate whose enabled side conditions hold while the inequality
/// fails.
#[derive(Debug, Clone)]
pub struct CandidateWitness {
    pub z1: NormalForm,
    pub verdict: StepVerdict,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub candidates: u64,
    pub c1_passes: u64,
    /// Candidates passing every enabled side condition.
    pub survivors: u64,
    pub inequality_failures: u64,
    /// First failing candidate in enumeration order, if any.
    pub witness: Option<CandidateWitness>,
}

/// Number of alternating sequences with exactly `s` syllables over factor
/// element pools of the given sizes, summed over both starting factors.
pub fn candidate_count(n0: u128, n1: u128, s: usize) -> u128 {
    let mut start0 = 1u128;
    let mut start1 = 1u128;
    for pos in 0..s {
        if pos % 2 == 0 {
            start0 *= n0;
            start1 *= n1;
        } else {
            start0 *= n1;
            start1 *= n0;
        }
    }
    start0 + start1
}

pub fn total_candidates(n0: u128, n1: u128, max_syllables: usize) -> u128 {
    (1..=max_syllables)
        .map(|s| candidate_count(n0, n1, s))
        .sum()
}

struct Tables {
    n0: usize,
    n1: usize,
    elems0: Vec<ReducedWord>,
    elems1: Vec<ReducedWord>,
    inv0: Vec<u32>,
    inv1: Vec<u32>,
    /// index of the single letter y^-1 in elems0 / t1 in elems1
    y_inv0: u32,
    t1_idx: u32,
    /// merge_is_yinv0[last * n0 + first]: elems0[last] * elems0[first] == y^-1
    merge_is_yinv0: Vec<bool>,
    merge_is_t1: Vec<bool>,
    /// span flags: the element only uses embedded generators (y / t0, t1)
    span0: Vec<bool>,
    span1: Vec<bool>,
}

impl Tables {
    fn build(scenario: &Scenario, max_syllable_len: usize) -> Tables {
        let elems0: Vec<ReducedWord> = enumerate_reduced(scenario.spec.factor(0), max_syllable_len)
            .into_iter()
            .filter(|w| !w.is_identity())
            .collect();
        let elems1: Vec<ReducedWord> = enumerate_reduced(scenario.spec.factor(1), max_syllable_len)
            .into_iter()
            .filter(|w| !w.is_identity())
            .collect();
        let index_of = |pool: &[ReducedWord], w: &ReducedWord| -> u32 {
            pool.iter()
                .position(|e| e.letters() == w.letters())
                .expect("inverse stays within the length bound") as u32
        };
        let inv0: Vec<u32> = elems0
            .iter()
            .map(|w| index_of(&elems0, &w.invert()))
            .collect();
        let inv1: Vec<u32> = elems1
            .iter()
            .map(|w| index_of(&elems1, &w.invert()))
            .collect();
        let y_inv0 = index_of(&elems0, &scenario.factor0_word(scenario.y, false));
        let t1_idx = index_of(&elems1, &scenario.factor1_word(scenario.t1, true));

        let (n0, n1) = (elems0.len(), elems1.len());
        let mut merge_is_yinv0 = vec![false; n0 * n0];
        for (l, wl) in elems0.iter().enumerate() {
            for (f, wf) in elems0.iter().enumerate() {
                let p = wl.multiply(wf).expect("same factor");
                merge_is_yinv0[l * n0 + f] = p.letters() == elems0[y_inv0 as usize].letters();
            }
        }
        let mut merge_is_t1 = vec![false; n1 * n1];
        for (l, wl) in elems1.iter().enumerate() {
            for (f, wf) in elems1.iter().enumerate() {
                let p = wl.multiply(wf).expect("same factor");
                merge_is_t1[l * n1 + f] = p.letters() == elems1[t1_idx as usize].letters();
            }
        }
        let span0: Vec<bool> = elems0
            .iter()
            .map(|w| w.letters().iter().all(|l| l.gen == scenario.y))
            .collect();
        let span1: Vec<bool> = elems1
            .iter()
            .map(|w| {
                w.letters()
                    .iter()
                    .all(|l| l.gen == scenario.t0 || l.gen == scenario.t1)
            })
            .collect();
        Tables {
            n0,
            n1,
            elems0,
            elems1,
            inv0,
            inv1,
            y_inv0,
            t1_idx,
            merge_is_yinv0,
            merge_is_t1,
            span0,
            span1,
        }
    }

    #[inline]
    fn factor_of(start: usize, pos: usize) -> usize {
        start ^ (pos & 1)
    }

    /// Fast (c1): strip matching outer syllables, resolve a length-3 corner
    /// by one merge, and compare the core against y^-1 t1 up to rotation.
    #[inline]
    fn c1(&self, start: usize, idx: &[u32]) -> bool {
        let s = idx.len();
        let (mut i, mut j) = (0usize, s - 1);
        while j > i && ((j - i) & 1) == 0 {
            let inv = if Self::factor_of(start, i) == 0 {
                self.inv0[idx[i] as usize]
            } else {
                self.inv1[idx[i] as usize]
            };
            if idx[j] == inv {
                i += 1;
                j -= 1;
            } else {
                break;
            }
        }
        match j - i + 1 {
            2 => {
                if Self::factor_of(start, i) == 0 {
                    idx[i] == self.y_inv0 && idx[j] == self.t1_idx
                } else {
                    idx[i] == self.t1_idx && idx[j] == self.y_inv0
                }
            }
            3 => {
                // rotate the first syllable to the end: core = [mid, last*first]
                if Self::factor_of(start, i) == 0 {
                    idx[i + 1] == self.t1_idx
                        && self.merge_is_yinv0[idx[j] as usize * self.n0 + idx[i] as usize]
                } else {
                    idx[i + 1] == self.y_inv0
                        && self.merge_is_t1[idx[j] as usize * self.n1 + idx[i] as usize]
                }
            }
            _ => false,
        }
    }

    /// Fast (c2): the candidate escapes the embedded subgroup iff some
    /// syllable uses a letter outside {y, t0, t1} (those generators span a
    /// free factor of the flattened group).
    #[inline]
    fn c2(&self, start: usize, idx: &[u32]) -> bool {
        !idx.iter().enumerate().all(|(pos, &e)| {
            if Self::factor_of(start, pos) == 0 {
                self.span0[e as usize]
            } else {
                self.span1[e as usize]
            }
        })
    }

    fn candidate(&self, scenario: &Scenario, start: usize, idx: &[u32]) -> NormalForm {
        let syllables: Vec<Syllable> = idx
            .iter()
            .enumerate()
            .map(|(pos, &e)| {
                let factor = Self::factor_of(start, pos);
                Syllable {
                    factor,
                    element: if factor == 0 {
                        self.elems0[e as usize].clone()
                    } else {
                        self.elems1[e as usize].clone()
                    },
                }
            })
            .collect();
        scenario
            .spec()
            .normalize(&syllables)
            .expect("alternating nontrivial syllables")
    }
}

#[derive(Default)]
struct PartitionOutcome {
    candidates: u64,
    c1_passes: u64,
    survivors: u64,
    inequality_failures: u64,
    /// (syllable count, candidate counter within partition, indices)
    witness: Option<(usize, u64, usize, Vec<u32>)>,
}

/// Exhaustively searches the bounded candidate space for a violation of the
/// length inequality among candidates passing the enabled side conditions.
pub fn search_counterexample(
    scenario: &Scenario,
    options: &SearchOptions,
) -> Result<SearchOutcome> {
    let bounds = options.bounds;
    if bounds.max_syllables < 2 || bounds.max_syllable_len < 1 {
        return Err(Error::Invalid(
            "search bounds must allow at least 2 syllables of length 1".into(),
        ));
    }
    let tables = Tables::build(scenario, bounds.max_syllable_len);
    let total = total_candidates(tables.n0 as u128, tables.n1 as u128, bounds.max_syllables);
    if total > u128::from(options.max_candidates) {
        return Err(Error::BudgetExceeded {
            candidates: total,
            budget: options.max_candidates,
        });
    }

    // Partitions keyed by the first syllable, factor-0 starts first.
    let partitions: Vec<(usize, u32)> = (0..tables.n0 as u32)
        .map(|e| (0usize, e))
        .chain((0..tables.n1 as u32).map(|e| (1usize, e)))
        .collect();

    let results: Vec<PartitionOutcome> = partitions
        .par_iter()
        .map(|&(start, first)| scan_partition(scenario, &tables, options, start, first))
        .collect();

    let mut outcome = SearchOutcome {
        candidates: 0,
        c1_passes: 0,
        survivors: 0,
        inequality_failures: 0,
        witness: None,
    };
    let mut best: Option<(usize, usize, u64, usize, Vec<u32>)> = None;
    for (rank, r) in results.iter().enumerate() {
        outcome.candidates += r.candidates;
        outcome.c1_passes += r.c1_passes;
        outcome.survivors += r.survivors;
        outcome.inequality_failures += r.inequality_failures;
        if let Some((s, counter, start, idx)) = &r.witness {
            let key = (*s, rank, *counter);
            if best
                .as_ref()
                .is_none_or(|(bs, br, bc, _, _)| key < (*bs, *br, *bc))
            {
                best = Some((*s, rank, *counter, *start, idx.clone()));
            }
        }
    }
    debug_assert_eq!(u128::from(outcome.candidates), total);
    if let Some((_, _, _, start, idx)) = best {
        let z1 = tables.candidate(scenario, start, &idx);
        let verdict = check_length_step(&z1, scenario)?;
        debug_assert!(!verdict.inequality_holds);
        outcome.witness = Some(CandidateWitness { z1, verdict });
    }
    Ok(outcome)
}

fn scan_partition(
    scenario: &Scenario,
    tables: &Tables,
    options: &SearchOptions,
    start: usize,
    first: u32,
) -> PartitionOutcome {
    let mut out = PartitionOutcome::default();
    let conjugand = scenario.conjugand();
    for s in 1..=options.bounds.max_syllables {
        let mut idx = vec![0u32; s];
        idx[0] = first;
        let mut counter: u64 = 0;
        'odometer: loop {
            out.candidates += 1;
            let c1 = options.disable_c1 || tables.c1(start, &idx);
            if !options.disable_c1 && c1 {
                out.c1_passes += 1;
            }
            if c1 && tables.c2(start, &idx) {
                out.survivors += 1;
                let z1 = tables.candidate(scenario, start, &idx);
                let z0 = z1
                    .multiply(&conjugand)
                    .expect("same spec")
                    .multiply(&z1.invert())
                    .expect("same spec");
                if z0.len() < z1.len() + 1 {
                    out.inequality_failures += 1;
                    if out.witness.is_none() {
                        out.witness = Some((s, counter, start, idx.clone()));
                    }
                }
            }
            counter += 1;
            // advance the odometer (position 0 is pinned to the partition)
            let mut pos = s - 1;
            loop {
                if pos == 0 {
                    break 'odometer;
                }
                let size = if Tables::factor_of(start, pos) == 0 {
                    tables.n0
                } else {
                    tables.n1
                };
                idx[pos] += 1;
                if (idx[pos] as usize) < size {
                    break;
                }
                idx[pos] = 0;
                pos -= 1;
            }
        }
    }
    out
}
