//! Normal forms, lengths, cyclic reduction, and cyclic shifts for a
//! two-factor free product whose factors are free groups.
//!
//! An element is an alternating sequence of nontrivial factor elements
//! (syllables); the empty sequence is the identity. `len` counts syllables.
//! Text format: syllables separated by `|`, each `0:<word>` or `1:<word>`
//! in the free-group word format, e.g. `0:y^-1 | 1:t0`; `1` alone is the
//! identity.

use std::fmt;

use crate::error::{Error, Result};
use crate::words::{conjugate_in_free_group, Alphabet, Letter, ReducedWord};

/// The two factor alphabets of a free product. They must be disjoint as
/// identifier sets so elements flatten unambiguously into the combined free
/// group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSpec {
    factors: [Alphabet; 2],
    combined: Alphabet,
}

impl FactorSpec {
    pub fn new(factor0: Alphabet, factor1: Alphabet) -> Result<FactorSpec> {
        for name in factor0.names() {
            if factor1.index_of(name).is_some() {
                return Err(Error::FactorOverlap(name.clone()));
            }
        }
        let combined = factor0.concat(&factor1)?;
        Ok(FactorSpec {
            factors: [factor0, factor1],
            combined,
        })
    }

    pub fn factor(&self, index: usize) -> &Alphabet {
        &self.factors[index]
    }

    /// The two factors flattened into one free-group alphabet
    /// (factor-0 names first).
    pub fn combined(&self) -> &Alphabet {
        &self.combined
    }

    pub fn identity(&self) -> NormalForm {
        NormalForm {
            spec: self.clone(),
            syllables: Vec::new(),
        }
    }

    pub fn syllable(&self, factor: usize, element: ReducedWord) -> Result<Syllable> {
        if factor > 1 {
            return Err(Error::Invalid(format!(
                "factor index {factor} (must be 0 or 1)"
            )));
        }
        if element.alphabet() != self.factor(factor) {
            return Err(Error::AlphabetMismatch(format!(
                "syllable element is not over factor {factor}"
            )));
        }
        Ok(Syllable { factor, element })
    }

    /// Produces the unique normal form of a product of raw syllables by
    /// repeatedly merging same-factor neighbours and deleting trivial
    /// results. Trivial raw syllables are dropped; each merge shortens the
    /// sequence, so the pass terminates.
    pub fn normalize(&self, raw: &[Syllable]) -> Result<NormalForm> {
        let mut stack: Vec<Syllable> = Vec::with_capacity(raw.len());
        for syl in raw {
            if syl.factor > 1 {
                return Err(Error::Invalid(format!(
                    "factor index {} (must be 0 or 1)",
                    syl.factor
                )));
            }
            if syl.element.alphabet() != self.factor(syl.factor) {
                return Err(Error::AlphabetMismatch(format!(
                    "syllable element is not over factor {}",
                    syl.factor
                )));
            }
            if syl.element.is_identity() {
                continue;
            }
            match stack.last_mut() {
                Some(top) if top.factor == syl.factor => {
                    let merged = top.element.multiply(&syl.element)?;
                    if merged.is_identity() {
                        stack.pop();
                    } else {
                        top.element = merged;
                    }
                }
                _ => stack.push(syl.clone()),
            }
        }
        Ok(NormalForm {
            spec: self.clone(),
            syllables: stack,
        })
    }

    /// Parses the `|`-separated syllable format.
    pub fn parse(&self, text: &str) -> Result<NormalForm> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(self.identity());
        }
        let mut raw = Vec::new();
        for (i, part) in trimmed.split('|').enumerate() {
            let pos = i + 1;
            let part = part.trim();
            let (factor, word_text) = match part.split_once(':') {
                Some(("0", w)) => (0usize, w),
                Some(("1", w)) => (1usize, w),
                _ => {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("syllable `{part}` must look like `0:<word>` or `1:<word>`"),
                    });
                }
            };
            let element = self.factor(factor).parse_word(word_text)?;
            raw.push(Syllable { factor, element });
        }
        self.normalize(&raw)
    }
}

/// One letter of the free product: a nontrivial element of one factor.
/// (Normalization accepts trivial elements and drops them.)
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syllable {
    pub factor: usize,
    pub element: ReducedWord,
}

impl Syllable {
    fn invert(&self) -> Syllable {
        Syllable {
            factor: self.factor,
            element: self.element.invert(),
        }
    }
}

/// The unique alternating-syllable writing of an element of the free
/// product. Adjacent syllables lie in different factors and every syllable
/// is nontrivial; the empty sequence is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    spec: FactorSpec,
    syllables: Vec<Syllable>,
}

impl NormalForm {
    pub fn spec(&self) -> &FactorSpec {
        &self.spec
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    /// Syllable count: 0 for the identity, 1 exactly for single letters.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn multiply(&self, other: &NormalForm) -> Result<NormalForm> {
        if self.spec != other.spec {
            return Err(Error::AlphabetMismatch(
                "cannot multiply normal forms over different factor specs".into(),
            ));
        }
        let mut raw = self.syllables.clone();
        raw.extend(other.syllables.iter().cloned());
        self.spec.normalize(&raw)
    }

    pub fn invert(&self) -> NormalForm {
        NormalForm {
            spec: self.spec.clone(),
            syllables: self.syllables.iter().rev().map(Syllable::invert).collect(),
        }
    }

    /// `by^-1 · self · by`.
    pub fn conjugate(&self, by: &NormalForm) -> Result<NormalForm> {
        by.invert().multiply(self)?.multiply(by)
    }

    /// Returns `(core, conjugator)` with `self = conjugator · core ·
    /// conjugator^-1` and the core cyclically reduced: length 0 or 1, or
    /// first and last syllables in different factors. The core length is the
    /// cyclic length of `self` (minimal over the conjugacy class).
    ///
    /// Matching outer syllables are stripped first; a remaining same-factor
    /// first/last corner is resolved by rotating the first syllable to the
    /// end and merging.
    pub fn cyclic_reduce(&self) -> (NormalForm, NormalForm) {
        let mut syllables = self.syllables.clone();
        let mut conj: Vec<Syllable> = Vec::new();
        while syllables.len() >= 2 {
            let last = syllables.len() - 1;
            if syllables[0].factor == syllables[last].factor
                && syllables[last].element == syllables[0].element.invert()
            {
                conj.push(syllables.remove(0));
                syllables.pop();
            } else {
                break;
            }
        }
        if syllables.len() >= 3 {
            let last = syllables.len() - 1;
            if syllables[0].factor == syllables[last].factor {
                let first = syllables.remove(0);
                let last = syllables.len() - 1;
                // Nontrivial: the strip loop above already consumed exact
                // inverse pairs.
                let merged = syllables[last]
                    .element
                    .multiply(&first.element)
                    .expect("same factor");
                debug_assert!(!merged.is_identity());
                syllables[last].element = merged;
                conj.push(first);
            }
        }
        (
            NormalForm {
                spec: self.spec.clone(),
                syllables,
            },
            NormalForm {
                spec: self.spec.clone(),
                syllables: conj,
            },
        )
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.syllables.len() < 2
            || self.syllables[0].factor != self.syllables[self.syllables.len() - 1].factor
    }

    /// The element of the combined free group obtained by concatenating the
    /// syllable words. Adjacent syllables use disjoint generators, so the
    /// result is reduced and the map is an isomorphism onto the free group
    /// on both alphabets.
    pub fn flatten(&self) -> ReducedWord {
        let offset = self.spec.factor(0).len();
        let mut letters: Vec<Letter> = Vec::new();
        for syl in &self.syllables {
            for l in syl.element.letters() {
                letters.push(Letter {
                    gen: if syl.factor == 0 {
                        l.gen
                    } else {
                        l.gen + offset
                    },
                    sign: l.sign,
                });
            }
        }
        ReducedWord::reduce(&letters, self.spec.combined()).expect("letters in range")
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, syl) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{}:{}", syl.factor, syl.element)?;
        }
        Ok(())
    }
}

/// True iff some rotation of `w`'s syllable sequence equals `u`'s,
/// syllable for syllable. Both inputs must be cyclically reduced.
pub fn is_cyclic_shift(u: &NormalForm, w: &NormalForm) -> Result<bool> {
    if !u.is_cyclically_reduced() || !w.is_cyclically_reduced() {
        return Err(Error::Invalid(
            "cyclic shift comparison requires cyclically reduced inputs".into(),
        ));
    }
    if u.spec != w.spec {
        return Err(Error::AlphabetMismatch(
            "cyclic shift comparison requires a common factor spec".into(),
        ));
    }
    if u.len() != w.len() {
        return Ok(false);
    }
    if u.is_empty() {
        return Ok(true);
    }
    let n = w.syllables.len();
    Ok((0..n).any(|k| {
        w.syllables
            .iter()
            .cycle()
            .skip(k)
            .take(n)
            .eq(u.syllables.iter())
    }))
}

/// Conjugacy test for cyclically reduced elements: syllable rotation for
/// length >= 2, within-factor conjugacy for single letters, equality for the
/// identity. (Single letters conjugate inside their own factor even when no
/// cyclic shift matches; cyclic length is a conjugacy invariant, so unequal
/// lengths are never conjugate.)
pub fn conjugate_cyclically_reduced(u: &NormalForm, w: &NormalForm) -> Result<bool> {
    if !u.is_cyclically_reduced() || !w.is_cyclically_reduced() {
        return Err(Error::Invalid(
            "conjugacy test requires cyclically reduced inputs".into(),
        ));
    }
    if u.spec != w.spec {
        return Err(Error::AlphabetMismatch(
            "conjugacy test requires a common factor spec".into(),
        ));
    }
    if u.len() != w.len() {
        return Ok(false);
    }
    match u.len() {
        0 => Ok(true),
        1 => {
            let (a, b) = (&u.syllables[0], &w.syllables[0]);
            if a.factor != b.factor {
                return Ok(false);
            }
            conjugate_in_free_group(&a.element, &b.element)
        }
        _ => is_cyclic_shift(u, w),
    }
}
