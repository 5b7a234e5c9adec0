//! Free-group word calculus: alphabets, letters, free reduction, inversion,
//! cyclic reduction, and exponent vectors.
//!
//! Words are kept freely reduced at all times; [`ReducedWord`] cannot hold an
//! adjacent generator–inverse pair. Reduction uses a single left-to-right
//! stack pass, which is linear and (by confluence of free reduction) produces
//! the unique normal form regardless of the order cancellations are applied.
//!
//! Text format: whitespace-separated tokens, each `name` or `name^-1`, with
//! `1` denoting the identity word. `1` is therefore not a legal generator
//! name.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Orientation of a letter: the generator itself or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// One occurrence of a generator or its inverse inside a word.
///
/// The `Ord` derive (generator index first, `Plus` before `Minus`) fixes the
/// lexicographic order used by deterministic enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn plus(gen: usize) -> Letter {
        Letter {
            gen,
            sign: Sign::Plus,
        }
    }

    pub fn minus(gen: usize) -> Letter {
        Letter {
            gen,
            sign: Sign::Minus,
        }
    }

    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            sign: self.sign.flip(),
        }
    }

    /// True when `self · other` cancels, i.e. the pair is `g g^-1` or `g^-1 g`.
    pub fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.sign != other.sign
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name != "1" && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// An ordered list of named free generators.
///
/// The order is fixed at creation and never mutates: it indexes letters and
/// exponent vectors. Cloning is cheap (shared storage). Two alphabets are
/// equal when their name sequences are equal.
#[derive(Debug, Clone)]
pub struct Alphabet {
    names: Arc<Vec<String>>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || self.names == other.names
    }
}

impl Eq for Alphabet {}

impl Hash for Alphabet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.names.hash(state);
    }
}

impl Alphabet {
    /// Builds an alphabet from distinct generator names.
    pub fn new<I, S>(names: I) -> Result<Alphabet>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for name in &names {
            if !valid_name(name) {
                return Err(Error::InvalidName(name.clone()));
            }
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Alphabet {
            names: Arc::new(names),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, gen: usize) -> &str {
        &self.names[gen]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Concatenation with another alphabet (e.g. the two factors of a free
    /// product flattened into one free group).
    pub fn concat(&self, other: &Alphabet) -> Result<Alphabet> {
        Alphabet::new(self.names.iter().chain(other.names.iter()).cloned())
    }

    /// The identity word over this alphabet.
    pub fn identity(&self) -> ReducedWord {
        ReducedWord {
            alphabet: self.clone(),
            letters: Vec::new(),
        }
    }

    /// The length-one word for a single generator.
    pub fn generator(&self, gen: usize) -> Result<ReducedWord> {
        if gen >= self.len() {
            return Err(Error::GeneratorOutOfRange {
                index: gen,
                size: self.len(),
            });
        }
        Ok(ReducedWord {
            alphabet: self.clone(),
            letters: vec![Letter::plus(gen)],
        })
    }

    /// Parses the text format: whitespace-separated `name` / `name^-1`
    /// tokens, or `1` alone for the identity. The result is freely reduced.
    pub fn parse_word(&self, text: &str) -> Result<ReducedWord> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens == ["1"] {
            return Ok(self.identity());
        }
        let mut raw = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let pos = i + 1;
            if *tok == "1" {
                return Err(Error::Parse {
                    pos,
                    msg: "identity token `1` must stand alone".into(),
                });
            }
            let (name, sign) = match tok.split_once('^') {
                None => (*tok, Sign::Plus),
                Some((name, "-1")) => (name, Sign::Minus),
                Some((_, exp)) => {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("unsupported exponent `^{exp}` (only `^-1`)"),
                    });
                }
            };
            let gen = self.index_of(name).ok_or_else(|| Error::Parse {
                pos,
                msg: format!("unknown generator `{name}`"),
            })?;
            raw.push(Letter { gen, sign });
        }
        ReducedWord::reduce(&raw, self)
    }
}

/// A freely reduced word: no adjacent `g g^-1` or `g^-1 g` pair anywhere.
/// The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

impl ReducedWord {
    /// Freely reduces a raw letter sequence with one left-to-right stack
    /// pass. Idempotent; the result is the unique reduced word equal to the
    /// input in the free group on `alphabet`.
    pub fn reduce(raw: &[Letter], alphabet: &Alphabet) -> Result<ReducedWord> {
        let mut letters: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            if l.gen >= alphabet.len() {
                return Err(Error::GeneratorOutOfRange {
                    index: l.gen,
                    size: alphabet.len(),
                });
            }
            if letters.last().is_some_and(|&p| p.cancels(l)) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(ReducedWord {
            alphabet: alphabet.clone(),
            letters,
        })
    }

    /// Wraps letters that are already known to be freely reduced.
    pub(crate) fn from_reduced_letters(alphabet: &Alphabet, letters: Vec<Letter>) -> ReducedWord {
        debug_assert!(letters.windows(2).all(|w| !w[0].cancels(w[1])));
        ReducedWord {
            alphabet: alphabet.clone(),
            letters,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Group multiplication: concatenate and reduce at the seam.
    pub fn multiply(&self, other: &ReducedWord) -> Result<ReducedWord> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(
                "cannot multiply words over different alphabets".into(),
            ));
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last().is_some_and(|&p| p.cancels(l)) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(ReducedWord {
            alphabet: self.alphabet.clone(),
            letters,
        })
    }

    /// Reversed letter order with flipped signs; an involution.
    pub fn invert(&self) -> ReducedWord {
        ReducedWord {
            alphabet: self.alphabet.clone(),
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// `by^-1 · self · by`.
    pub fn conjugate(&self, by: &ReducedWord) -> Result<ReducedWord> {
        by.invert().multiply(self)?.multiply(by)
    }

    /// Splits off matching outer letters: returns `(core, conjugator)` with
    /// `self = conjugator · core · conjugator^-1`, where the core's first and
    /// last letters are not mutually inverse. The core has minimal length in
    /// the conjugacy class of `self`.
    pub fn cyclically_reduce(&self) -> (ReducedWord, ReducedWord) {
        let mut letters = self.letters.clone();
        let mut conj = Vec::new();
        while letters.len() >= 2 && letters[letters.len() - 1] == letters[0].inverse() {
            conj.push(letters.remove(0));
            letters.pop();
        }
        (
            ReducedWord {
                alphabet: self.alphabet.clone(),
                letters,
            },
            ReducedWord {
                alphabet: self.alphabet.clone(),
                letters: conj,
            },
        )
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.letters.len() < 2 || self.letters[self.letters.len() - 1] != self.letters[0].inverse()
    }

    /// Signed letter count per generator.
    pub fn exponent_vector(&self) -> ExponentVector {
        let mut counts = vec![0i64; self.alphabet.len()];
        for l in &self.letters {
            counts[l.gen] += l.sign.as_i64();
        }
        ExponentVector {
            alphabet: self.alphabet.clone(),
            counts,
        }
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match l.sign {
                Sign::Plus => write!(f, "{}", self.alphabet.name(l.gen))?,
                Sign::Minus => write!(f, "{}^-1", self.alphabet.name(l.gen))?,
            }
        }
        Ok(())
    }
}

/// Signed exponent sums of a word, one entry per generator of its alphabet.
/// Addition is checked; overflow is reported rather than wrapped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentVector {
    alphabet: Alphabet,
    counts: Vec<i64>,
}

impl ExponentVector {
    pub fn zero(alphabet: &Alphabet) -> ExponentVector {
        ExponentVector {
            alphabet: alphabet.clone(),
            counts: vec![0; alphabet.len()],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    pub fn count_of(&self, gen: usize) -> i64 {
        self.counts[gen]
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &ExponentVector) -> Result<ExponentVector> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(
                "cannot add exponent vectors over different alphabets".into(),
            ));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(&a, &b)| a.checked_add(b).ok_or(Error::ExponentOverflow))
            .collect::<Result<Vec<i64>>>()?;
        Ok(ExponentVector {
            alphabet: self.alphabet.clone(),
            counts,
        })
    }
}

/// All reduced words of length at most `max_len`, identity first, then by
/// length and lexicographic letter order. The order is deterministic; bounded
/// searches report the first hit in this order.
pub fn enumerate_reduced(alphabet: &Alphabet, max_len: usize) -> Vec<ReducedWord> {
    let mut out = vec![alphabet.identity()];
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for word in &frontier {
            for gen in 0..alphabet.len() {
                for sign in [Sign::Plus, Sign::Minus] {
                    let l = Letter { gen, sign };
                    if word.last().is_some_and(|&p| p.cancels(l)) {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(l);
                    next.push(w);
                }
            }
        }
        for w in &next {
            out.push(ReducedWord::from_reduced_letters(alphabet, w.clone()));
        }
        frontier = next;
    }
    out
}

/// A uniformly random reduced word of exactly `len` letters (no immediate
/// cancellation while sampling).
pub fn random_reduced<R: Rng>(rng: &mut R, alphabet: &Alphabet, len: usize) -> ReducedWord {
    assert!(
        !alphabet.is_empty() || len == 0,
        "empty alphabet has only the identity"
    );
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter {
            gen: rng.gen_range(0..alphabet.len()),
            sign: if rng.gen::<bool>() {
                Sign::Plus
            } else {
                Sign::Minus
            },
        };
        if letters.last().is_some_and(|&p| p.cancels(l)) {
            continue;
        }
        letters.push(l);
    }
    ReducedWord::from_reduced_letters(alphabet, letters)
}

/// Conjugacy test in the ambient free group: both cyclic cores must be
/// rotations of each other.
pub fn conjugate_in_free_group(u: &ReducedWord, v: &ReducedWord) -> Result<bool> {
    if u.alphabet() != v.alphabet() {
        return Err(Error::AlphabetMismatch(
            "conjugacy test needs a common alphabet".into(),
        ));
    }
    let (cu, _) = u.cyclically_reduce();
    let (cv, _) = v.cyclically_reduce();
    if cu.len() != cv.len() {
        return Ok(false);
    }
    if cu.is_empty() {
        return Ok(true);
    }
    let a = cu.letters();
    let b = cv.letters();
    Ok((0..a.len()).any(|k| a.iter().cycle().skip(k).take(a.len()).eq(b.iter())))
}
