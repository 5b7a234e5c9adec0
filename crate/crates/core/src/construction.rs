//! The truncated splitting embedding and its verification suite.
//!
//! Given a free group on `x`-generators, a nonempty `y`-family (first
//! element distinguished), and `t_0 .. t_{N-1}`, the embedding `phi` into
//! the free group on `x`, `y`, `z_0 .. z_N` fixes every `x`- and
//! `y`-generator and sends `t_n` to `y z_{n+1}^-1 z_n z_{n+1}`. The
//! checks audit, at truncation `N`:
//!
//! * injectivity (Nielsen conditions on the image set plus a rank count),
//! * exclusion of each `z_n` (`n < N`) from the image subgroup,
//! * the explicit basis-extension certificates making each partial image
//!   a free factor,
//! * conjugation evidence that the image normally generates the codomain,
//! * commutator-subgroup and abelianization bookkeeping (Smith normal
//!   form of the abelianized embedding plus sampled membership checks).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{smith_normal_form, IntMatrix};
use crate::report::VerificationReport;
use crate::subgroup::{is_free_basis_of, nielsen_violation, CoreGraph, NielsenViolation};
use crate::words::{Alphabet, Letter, ReducedWord, Sign};

/// A homomorphism between free groups, given by one image word per domain
/// generator. Application substitutes and reduces.
#[derive(Debug, Clone, PartialEq)]
pub struct Homomorphism {
    domain: Alphabet,
    codomain: Alphabet,
    images: Vec<ReducedWord>,
}

impl Homomorphism {
    pub fn new(
        domain: Alphabet,
        codomain: Alphabet,
        images: Vec<ReducedWord>,
    ) -> Result<Homomorphism> {
        if images.len() != domain.len() {
            return Err(Error::Invalid(format!(
                "expected {} images, got {}",
                domain.len(),
                images.len()
            )));
        }
        if images.iter().any(|w| w.alphabet() != &codomain) {
            return Err(Error::AlphabetMismatch(
                "homomorphism images must lie in the codomain".into(),
            ));
        }
        Ok(Homomorphism {
            domain,
            codomain,
            images,
        })
    }

    pub fn identity(alphabet: &Alphabet) -> Homomorphism {
        let images = (0..alphabet.len())
            .map(|i| alphabet.generator(i).expect("in range"))
            .collect();
        Homomorphism {
            domain: alphabet.clone(),
            codomain: alphabet.clone(),
            images,
        }
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn codomain(&self) -> &Alphabet {
        &self.codomain
    }

    pub fn images(&self) -> &[ReducedWord] {
        &self.images
    }

    pub fn image_of_gen(&self, gen: usize) -> &ReducedWord {
        &self.images[gen]
    }

    pub fn apply(&self, w: &ReducedWord) -> Result<ReducedWord> {
        if w.alphabet() != &self.domain {
            return Err(Error::AlphabetMismatch(
                "word is not over the homomorphism domain".into(),
            ));
        }
        let mut letters: Vec<Letter> = Vec::new();
        for &l in w.letters() {
            let image = &self.images[l.gen];
            match l.sign {
                Sign::Plus => letters.extend_from_slice(image.letters()),
                Sign::Minus => letters.extend(image.letters().iter().rev().map(|x| x.inverse())),
            }
        }
        ReducedWord::reduce(&letters, &self.codomain)
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &Homomorphism) -> Result<Homomorphism> {
        if self.codomain != then.domain {
            return Err(Error::AlphabetMismatch(
                "composition needs matching codomain/domain".into(),
            ));
        }
        let images = self
            .images
            .iter()
            .map(|w| then.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Homomorphism::new(self.domain.clone(), then.codomain.clone(), images)
    }

    /// Integer matrix of the induced map on abelianizations: one column per
    /// domain generator, one row per codomain generator.
    pub fn abelianized(&self) -> IntMatrix {
        let mut m = IntMatrix::zero(self.codomain.len(), self.domain.len());
        for (j, w) in self.images.iter().enumerate() {
            for (i, &count) in w.exponent_vector().counts().iter().enumerate() {
                m.set(i, j, count);
            }
        }
        m
    }
}

/// Declarative description of a truncated split: `x`-names (possibly
/// empty), the `y`-family (first name distinguished), and the truncation
/// `N >= 1`. Generator names `t0..t{N-1}` and `z0..zN` are generated.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    #[serde(default)]
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
    pub truncation: usize,
}

impl SplitSpec {
    pub fn new(x_names: Vec<String>, y_names: Vec<String>, truncation: usize) -> SplitSpec {
        SplitSpec {
            x_names,
            y_names,
            truncation,
        }
    }

    /// Builds the canonical embedding for this split.
    pub fn phi(&self) -> Result<PhiMap> {
        let t: Vec<String> = (0..self.truncation).map(|n| format!("t{n}")).collect();
        let z: Vec<String> = (0..=self.truncation).map(|n| format!("z{n}")).collect();
        PhiMap::construct(self.x_names.clone(), self.y_names.clone(), t, z)
    }
}

/// The truncated embedding: `x`- and `y`-generators map to themselves and
/// `t_n` maps to `y z_{n+1}^-1 z_n z_{n+1}`. Images can be overwritten to
/// inject faults for testing the verifiers.
#[derive(Debug, Clone)]
pub struct PhiMap {
    hom: Homomorphism,
    x: Vec<String>,
    y: Vec<String>,
    t: Vec<String>,
    z: Vec<String>,
}

impl PhiMap {
    /// General constructor with explicit name families. The domain alphabet
    /// is `x ++ y ++ t`, the codomain `x ++ y ++ z`; `|z| = |t| + 1`.
    pub fn construct(
        x: Vec<String>,
        y: Vec<String>,
        t: Vec<String>,
        z: Vec<String>,
    ) -> Result<PhiMap> {
        if y.is_empty() {
            return Err(Error::Invalid("the y-family must be nonempty".into()));
        }
        if t.is_empty() {
            return Err(Error::Invalid("truncation must be at least 1".into()));
        }
        if z.len() != t.len() + 1 {
            return Err(Error::Invalid(format!(
                "need {} z-generators for {} t-generators",
                t.len() + 1,
                t.len()
            )));
        }
        let mut seen: Vec<&String> = Vec::new();
        for name in x.iter().chain(&y).chain(&t).chain(&z) {
            if seen.contains(&name) {
                return Err(Error::NameCollision(name.clone()));
            }
            seen.push(name);
        }
        let domain = Alphabet::new(x.iter().chain(&y).chain(&t).cloned())?;
        let codomain = Alphabet::new(x.iter().chain(&y).chain(&z).cloned())?;

        let mut images = Vec::with_capacity(domain.len());
        for name in x.iter().chain(&y) {
            let gen = codomain.index_of(name).expect("fixed generator");
            images.push(codomain.generator(gen)?);
        }
        let y0 = codomain.index_of(&y[0]).expect("distinguished y");
        for n in 0..t.len() {
            let zn = codomain.index_of(&z[n]).expect("z_n");
            let zn1 = codomain.index_of(&z[n + 1]).expect("z_{n+1}");
            let letters = [
                Letter::plus(y0),
                Letter::minus(zn1),
                Letter::plus(zn),
                Letter::plus(zn1),
            ];
            images.push(ReducedWord::reduce(&letters, &codomain)?);
        }
        Ok(PhiMap {
            hom: Homomorphism::new(domain, codomain, images)?,
            x,
            y,
            t,
            z,
        })
    }

    pub fn hom(&self) -> &Homomorphism {
        &self.hom
    }

    pub fn domain(&self) -> &Alphabet {
        self.hom.domain()
    }

    pub fn codomain(&self) -> &Alphabet {
        self.hom.codomain()
    }

    pub fn x_names(&self) -> &[String] {
        &self.x
    }

    pub fn y_names(&self) -> &[String] {
        &self.y
    }

    pub fn t_names(&self) -> &[String] {
        &self.t
    }

    pub fn z_names(&self) -> &[String] {
        &self.z
    }

    /// Number of t-generators (the truncation N).
    pub fn truncation(&self) -> usize {
        self.t.len()
    }

    pub fn apply(&self, w: &ReducedWord) -> Result<ReducedWord> {
        self.hom.apply(w)
    }

    pub fn image_of(&self, name: &str) -> Result<&ReducedWord> {
        let gen = self
            .domain()
            .index_of(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        Ok(self.hom.image_of_gen(gen))
    }

    /// Overwrites the image of one domain generator (fault injection).
    pub fn set_image(&mut self, name: &str, image: ReducedWord) -> Result<()> {
        let gen = self
            .domain()
            .index_of(name)
            .ok_or_else(|| Error::UnknownGenerator(name.into()))?;
        if image.alphabet() != self.codomain() {
            return Err(Error::AlphabetMismatch(
                "replacement image must lie in the codomain".into(),
            ));
        }
        self.hom.images[gen] = image;
        Ok(())
    }

    /// The images of the domain generators (the generating set of the image
    /// subgroup).
    pub fn image_generators(&self) -> Vec<ReducedWord> {
        self.hom.images().to_vec()
    }

    /// The y-stripped image set used for the Nielsen conditions: images of
    /// `x`- and `y`-generators plus `y^-1 · phi(t_n)` (which is
    /// `z_{n+1}^-1 z_n z_{n+1}` for the canonical map).
    pub fn nielsen_image_set(&self) -> Result<Vec<ReducedWord>> {
        let y_image = self.image_of(&self.y[0].clone())?.clone();
        let mut set = Vec::new();
        for name in self.x.iter().chain(&self.y) {
            set.push(self.image_of(name)?.clone());
        }
        for name in &self.t {
            set.push(y_image.invert().multiply(self.image_of(name)?)?);
        }
        Ok(set)
    }

    fn folded_image(&self) -> Result<CoreGraph> {
        CoreGraph::fold(self.codomain(), &self.image_generators())
    }

    fn base_params(&self) -> Value {
        json!({
            "N": self.truncation(),
            "x": self.x,
            "y": self.y,
        })
    }

    /// Injectivity at truncation: the y-stripped image set satisfies the
    /// Nielsen conditions and the folded image has full domain rank.
    pub fn verify_mono(&self) -> Result<VerificationReport> {
        let params = self.base_params();
        let nielsen_set = self.nielsen_image_set()?;
        let violation = nielsen_violation(&nielsen_set)?;
        let graph = self.folded_image()?;
        let expected_rank = self.domain().len();
        let actual_rank = graph.rank();

        let mut witnesses = serde_json::Map::new();
        if let Some(v) = &violation {
            witnesses.insert(
                "nielsen_violation".into(),
                match v {
                    NielsenViolation::Trivial { index } => json!({
                        "kind": "trivial", "index": index,
                    }),
                    NielsenViolation::Degenerate { i, j } => json!({
                        "kind": "degenerate", "i": i, "j": j,
                    }),
                    NielsenViolation::Pair { u, v } => json!({
                        "kind": "pair", "u": u.to_string(), "v": v.to_string(),
                    }),
                    NielsenViolation::Triple { u, v, w } => json!({
                        "kind": "triple",
                        "u": u.to_string(), "v": v.to_string(), "w": w.to_string(),
                    }),
                },
            );
        }
        if actual_rank != expected_rank {
            witnesses.insert(
                "rank".into(),
                json!({ "expected": expected_rank, "actual": actual_rank }),
            );
        }
        let pass = violation.is_none() && actual_rank == expected_rank;
        Ok(VerificationReport::from_outcome(
            "mono",
            pass,
            params,
            Value::Object(witnesses),
        ))
    }

    /// `z_n` stays outside the image subgroup. Only `n < N` is meaningful
    /// at truncation; the boundary generator `z_N` exists solely to close
    /// the last `t`-image.
    pub fn verify_z_exclusion(&self, n: usize) -> Result<VerificationReport> {
        if n >= self.truncation() {
            return Err(Error::OutOfRange {
                what: "z-exclusion index n",
                value: n,
                max: self.truncation().saturating_sub(1),
            });
        }
        let mut params = self.base_params();
        params["n"] = json!(n);
        let graph = self.folded_image()?;
        let zn = self.codomain().index_of(&self.z[n]).expect("z name");
        let word = self.codomain().generator(zn)?;
        let contained = graph.contains(&word)?;
        let witnesses = if contained {
            json!({ "member": word.to_string() })
        } else {
            Value::Object(Default::default())
        };
        Ok(VerificationReport::from_outcome(
            format!("z_exclusion[n={n}]"),
            !contained,
            params,
            witnesses,
        ))
    }

    /// The explicit certificate words making the n-th partial image a free
    /// factor: x, y-family, the first n t-images, then `z_n .. z_N`.
    pub fn partial_free_factor_certificate(&self, n: usize) -> Result<Vec<ReducedWord>> {
        if n > self.truncation() {
            return Err(Error::OutOfRange {
                what: "partial free factor index n",
                value: n,
                max: self.truncation(),
            });
        }
        let mut cert = Vec::new();
        for name in self.x.iter().chain(&self.y) {
            cert.push(self.image_of(name)?.clone());
        }
        for name in &self.t[..n] {
            cert.push(self.image_of(name)?.clone());
        }
        for name in &self.z[n..] {
            let gen = self.codomain().index_of(name).expect("z name");
            cert.push(self.codomain().generator(gen)?);
        }
        Ok(cert)
    }

    /// The basis-extension certificate for the n-th partial image passes.
    pub fn verify_partial_free_factor(&self, n: usize) -> Result<VerificationReport> {
        let cert = self.partial_free_factor_certificate(n)?;
        let mut params = self.base_params();
        params["n"] = json!(n);
        let cert_text: Vec<String> = cert.iter().map(|w| w.to_string()).collect();
        let ok = is_free_basis_of(&cert, self.codomain())?;
        let witnesses = if ok {
            json!({ "certificate": cert_text })
        } else {
            json!({ "certificate": cert_text, "reason": "certificate is not a free basis of the codomain" })
        };
        Ok(VerificationReport::from_outcome(
            format!("partial_free_factor[n={n}]"),
            ok,
            params,
            witnesses,
        ))
    }

    /// Conjugation evidence that the image normally generates the codomain,
    /// plus properness (`z_0` outside the image). Reported as evidence at
    /// truncation, not as a proof that the image fails to be a free factor:
    /// the truncated image extends to a basis of the truncated codomain by
    /// `z_N`, so no finite certificate of non-free-factor-ness exists here.
    /// The boundary generator `z_N` is excluded from the table (its
    /// conjugator would live beyond the truncation).
    pub fn verify_normal_closure_evidence(&self) -> Result<VerificationReport> {
        let params = self.base_params();
        let graph = self.folded_image()?;
        let mut table: Vec<(String, Option<String>)> = Vec::new();
        let mut missing: Vec<String> = Vec::new();
        let names: Vec<&String> = self
            .x
            .iter()
            .chain(&self.y)
            .chain(&self.z[..self.truncation()])
            .collect();
        for name in names {
            let gen = self.codomain().index_of(name).expect("codomain name");
            let word = self.codomain().generator(gen)?;
            match graph.conjugate_into(&word, 2)? {
                Some(c) => table.push((name.clone(), Some(c.to_string()))),
                None => {
                    table.push((name.clone(), None));
                    missing.push(name.clone());
                }
            }
        }
        let z0 = self.codomain().index_of(&self.z[0]).expect("z0");
        let proper = !graph.contains(&self.codomain().generator(z0)?)?;
        let pass = missing.is_empty() && proper;
        let witnesses = json!({
            "evidence_only": "conjugation witnesses at truncation; z_N boundary generator excluded",
            "conjugators": table
                .iter()
                .map(|(g, c)| json!({ "generator": g, "conjugator": c }))
                .collect::<Vec<_>>(),
            "missing": missing,
            "proper": proper,
        });
        Ok(VerificationReport::from_outcome(
            "normal_closure_evidence",
            pass,
            params,
            witnesses,
        ))
    }

    /// Commutator and abelianization bookkeeping:
    /// (a) sampled words of the image subgroup lie in the codomain
    ///     commutator subgroup iff their basis-coordinate exponent vector
    ///     vanishes,
    /// (b) the Smith normal form of the abelianized map has all invariant
    ///     factors 1 and cokernel rank exactly 1 (the z_N coordinate),
    /// (c) each abelianized t-image is y + z_n.
    pub fn verify_commutator_equality(
        &self,
        samples: usize,
        seed: u64,
    ) -> Result<VerificationReport> {
        let mut params = self.base_params();
        params["samples"] = json!(samples);
        params["seed"] = json!(seed);

        let graph = self.folded_image()?;
        let basis = graph.basis();
        let image_gens = self.image_generators();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample_failures = Vec::new();
        for _ in 0..samples {
            let factors = rng.gen_range(1..=8);
            let mut w = self.codomain().identity();
            for _ in 0..factors {
                let pick = &image_gens[rng.gen_range(0..image_gens.len())];
                let factor = if rng.gen::<bool>() {
                    pick.clone()
                } else {
                    pick.invert()
                };
                w = w.multiply(&factor)?;
            }
            let in_codomain_commutator = w.exponent_vector().is_zero();
            let expressed = basis.express(&w)?;
            let in_image_commutator = expressed.exponent_vector().is_zero();
            if in_codomain_commutator != in_image_commutator {
                sample_failures.push(json!({
                    "word": w.to_string(),
                    "codomain_exponents_zero": in_codomain_commutator,
                    "image_coordinates_zero": in_image_commutator,
                }));
            }
        }

        let matrix = self.hom.abelianized();
        let snf = smith_normal_form(&matrix);
        let cokernel_rank = matrix.rows() - snf.rank;
        let snf_ok = snf.all_invariant_factors_one() && cokernel_rank == 1;

        let mut bookkeeping_failures = Vec::new();
        for (n, tname) in self.t.iter().enumerate() {
            let image = self.image_of(tname)?;
            let ev = image.exponent_vector();
            let y0 = self.codomain().index_of(&self.y[0]).expect("y");
            let zn = self.codomain().index_of(&self.z[n]).expect("z_n");
            let expected: Vec<i64> = (0..self.codomain().len())
                .map(|i| i64::from(i == y0) + i64::from(i == zn))
                .collect();
            if ev.counts() != expected {
                bookkeeping_failures.push(json!({
                    "t": tname,
                    "expected": expected,
                    "actual": ev.counts(),
                }));
            }
        }

        let pass = sample_failures.is_empty() && snf_ok && bookkeeping_failures.is_empty();
        let witnesses = json!({
            "smith_diagonal": snf.diag,
            "cokernel_rank": cokernel_rank,
            "sample_failures": sample_failures,
            "abelianized_bookkeeping_failures": bookkeeping_failures,
        });
        Ok(VerificationReport::from_outcome(
            "commutator_equality",
            pass,
            params,
            witnesses,
        ))
    }

    /// Runs the whole suite in canonical order.
    pub fn verify_all(&self, samples: usize, seed: u64) -> Result<Vec<VerificationReport>> {
        let mut reports = vec![self.verify_mono()?];
        for n in 0..self.truncation() {
            reports.push(self.verify_z_exclusion(n)?);
        }
        for n in 0..=self.truncation() {
            reports.push(self.verify_partial_free_factor(n)?);
        }
        reports.push(self.verify_normal_closure_evidence()?);
        reports.push(self.verify_commutator_equality(samples, seed)?);
        Ok(reports)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> PhiMap {
        SplitSpec::new(vec![], vec!["y".into()], 1).phi().unwrap()
    }

    #[test]
    fn build_phi_images() {
        let phi = minimal();
        assert_eq!(phi.image_of("y").unwrap().to_string(), "y");
        assert_eq!(phi.image_of("t0").unwrap().to_string(), "y z1^-1 z0 z1");

        let phi2 = SplitSpec::new(vec![], vec!["y".into()], 2).phi().unwrap();
        assert_eq!(phi2.image_of("t1").unwrap().to_string(), "y z2^-1 z1 z2");

        assert!(SplitSpec::new(vec![], vec![], 1).phi().is_err());
        assert!(matches!(
            PhiMap::construct(
                vec!["t0".into()],
                vec!["y".into()],
                vec!["t0a".into()],
                vec!["z0".into(), "t0".into()],
            ),
            Err(Error::NameCollision(_))
        ));
    }

    #[test]
    fn apply_is_substitution() {
        let phi = minimal();
        let w = phi.domain().parse_word("y^-1 t0").unwrap();
        assert_eq!(phi.apply(&w).unwrap().to_string(), "z1^-1 z0 z1");
        assert!(phi.apply(&phi.domain().identity()).unwrap().is_identity());

        let phi2 = SplitSpec::new(vec![], vec!["y".into()], 2).phi().unwrap();
        let w = phi2.domain().parse_word("t0 t1").unwrap();
        assert_eq!(
            phi2.apply(&w).unwrap().to_string(),
            "y z1^-1 z0 z1 y z2^-1 z1 z2"
        );
    }

    #[test]
    fn apply_is_homomorphism() {
        use rand::SeedableRng;
        let phi = SplitSpec::new(vec!["x0".into()], vec!["y".into(), "y1".into()], 3)
            .phi()
            .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = rand::Rng::gen_range(&mut rng, 0..=6);
            let b = rand::Rng::gen_range(&mut rng, 0..=6);
            let u = crate::words::random_reduced(&mut rng, phi.domain(), a);
            let v = crate::words::random_reduced(&mut rng, phi.domain(), b);
            let lhs = phi.apply(&u.multiply(&v).unwrap()).unwrap();
            let rhs = phi
                .apply(&u)
                .unwrap()
                .multiply(&phi.apply(&v).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn mono_passes_and_sabotage_fails() {
        let phi = minimal();
        let report = phi.verify_mono().unwrap();
        assert!(report.pass, "{report:?}");

        let big = SplitSpec::new(
            vec!["x0".into(), "x1".into()],
            vec!["y".into(), "y1".into()],
            6,
        )
        .phi()
        .unwrap();
        assert!(big.verify_mono().unwrap().pass);

        let mut bad = minimal();
        let y = bad.codomain().parse_word("y").unwrap();
        bad.set_image("t0", y).unwrap();
        let report = bad.verify_mono().unwrap();
        assert!(!report.pass);
        assert!(report.witnesses.get("rank").is_some());
    }

    #[test]
    fn z_exclusion() {
        let phi = minimal();
        assert!(phi.verify_z_exclusion(0).unwrap().pass);
        assert!(matches!(
            phi.verify_z_exclusion(1),
            Err(Error::OutOfRange { .. })
        ));

        let big = SplitSpec::new(vec![], vec!["y".into()], 6).phi().unwrap();
        assert!(big.verify_z_exclusion(3).unwrap().pass);
    }

    #[test]
    fn partial_free_factor_certificates() {
        let phi = minimal();
        assert!(phi.verify_partial_free_factor(0).unwrap().pass);
        assert!(phi.verify_partial_free_factor(1).unwrap().pass);

        // dropping z_1 from the n = 1 certificate loses a generator
        let mut cert = phi.partial_free_factor_certificate(1).unwrap();
        cert.pop();
        assert!(!is_free_basis_of(&cert, phi.codomain()).unwrap());
    }

    #[test]
    fn normal_closure_evidence_witness_table() {
        let phi = SplitSpec::new(vec!["x0".into()], vec!["y".into()], 3)
            .phi()
            .unwrap();
        let report = phi.verify_normal_closure_evidence().unwrap();
        assert!(report.pass, "{report:?}");
        let table = report.witnesses["conjugators"].as_array().unwrap();
        let lookup = |g: &str| {
            table
                .iter()
                .find(|e| e["generator"] == g)
                .and_then(|e| e["conjugator"].as_str().map(String::from))
        };
        assert_eq!(lookup("x0").unwrap(), "1");
        assert_eq!(lookup("y").unwrap(), "1");
        assert_eq!(lookup("z0").unwrap(), "z1");
        assert_eq!(lookup("z1").unwrap(), "z2");
        assert_eq!(lookup("z2").unwrap(), "z3");
        assert!(
            lookup("z3").is_none(),
            "boundary z_N stays out of the table"
        );

        // sabotage: t0 no longer reaches z0
        let mut bad = phi.clone();
        let w = bad.codomain().parse_word("z0 z1").unwrap();
        bad.set_image("t0", w).unwrap();
        let report = bad.verify_normal_closure_evidence().unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn commutator_equality_minimal_matrix() {
        let phi = minimal();
        let report = phi.verify_commutator_equality(100, 0).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.witnesses["smith_diagonal"], json!([1, 1]));
        assert_eq!(report.witnesses["cokernel_rank"], json!(1));

        let mut bad = phi.clone();
        let w = bad.codomain().parse_word("z1 z0 z1^-1").unwrap();
        bad.set_image("t0", w).unwrap();
        let report = bad.verify_commutator_equality(50, 0).unwrap();
        // abelianized t0 is z0, not y + z0
        assert!(!report.pass);
    }

    #[test]
    fn commutator_membership_is_consistent_on_named_words() {
        let phi = minimal();
        let graph = CoreGraph::fold(phi.codomain(), &phi.image_generators()).unwrap();
        let basis = graph.basis();

        // a commutator of image elements lies in both commutator subgroups
        let a = phi.image_of("t0").unwrap().clone();
        let b = phi.image_of("y").unwrap().clone();
        let comm = a
            .multiply(&b)
            .unwrap()
            .multiply(&a.invert())
            .unwrap()
            .multiply(&b.invert())
            .unwrap();
        assert!(comm.exponent_vector().is_zero());
        assert!(basis.express(&comm).unwrap().exponent_vector().is_zero());

        // a plain image generator lies in neither
        let w = phi.image_of("t0").unwrap();
        assert!(!w.exponent_vector().is_zero());
        assert!(!basis.express(w).unwrap().exponent_vector().is_zero());
    }

    #[test]
    fn commutator_samples_detect_broken_maps() {
        // identity-collapsing sabotage: rank drops, so coordinates conflate
        let phi = minimal();
        let mut bad = phi.clone();
        let w = bad.codomain().parse_word("y").unwrap();
        bad.set_image("t0", w).unwrap();
        // Smith form of [[1,1],[0,0],[0,0]] has rank 1, cokernel 2
        let report = bad.verify_commutator_equality(20, 0).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn verify_all_order_and_determinism() {
        let phi = SplitSpec::new(vec![], vec!["y".into()], 2).phi().unwrap();
        let a = phi.verify_all(50, 0).unwrap();
        let b = phi.verify_all(50, 0).unwrap();
        assert_eq!(a, b);
        let names: Vec<&str> = a.iter().map(|r| r.check.as_str()).collect();
        assert_eq!(
            names,
            [
                "mono",
                "z_exclusion[n=0]",
                "z_exclusion[n=1]",
                "partial_free_factor[n=0]",
                "partial_free_factor[n=1]",
                "partial_free_factor[n=2]",
                "normal_closure_evidence",
                "commutator_equality",
            ]
        );
        assert!(a.iter().all(|r| r.pass));
    }
}
