//! Folded core graphs for finitely generated subgroups of free groups.
//!
//! A subgroup generated by a finite set of reduced words is realized as a
//! folded labeled digraph with a base vertex: words spelled by base-to-base
//! paths (inverse letters read edges backwards) are exactly the members.
//! On top of the graph sit rank and basis extraction, rewriting of members
//! in basis coordinates, a bounded conjugation search, and the
//! Nielsen-reduced conditions for generating sets.
//!
//! Graphs are canonicalized by a breadth-first relabeling from the base
//! vertex with generator-ordered edge exploration, so equal graphs mean
//! isomorphic subgroup realizations.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::words::{enumerate_reduced, Alphabet, Letter, ReducedWord, Sign};

/// Folded, connected core graph of a finitely generated subgroup.
/// Vertex 0 is the base; per vertex and generator there is at most one
/// outgoing and one incoming edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreGraph {
    alphabet: Alphabet,
    /// out[v][g]: target of the g-labeled edge leaving v.
    out: Vec<Vec<Option<u32>>>,
    /// inc[v][g]: source of the g-labeled edge entering v.
    inc: Vec<Vec<Option<u32>>>,
    edge_count: usize,
}

/// Union-find folding state: per-class sparse out/in edge maps plus a queue
/// of pending vertex identifications.
struct Folder {
    parent: Vec<usize>,
    out: Vec<Vec<(usize, usize)>>,
    inc: Vec<Vec<(usize, usize)>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new() -> Folder {
        Folder {
            parent: Vec::new(),
            out: Vec::new(),
            inc: Vec::new(),
            pending: Vec::new(),
        }
    }

    fn add_vertex(&mut self) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        v
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn add_edge(&mut self, s: usize, g: usize, t: usize) {
        let s = self.find(s);
        let t = self.find(t);
        match self.out[s].iter().find(|&&(eg, _)| eg == g) {
            Some(&(_, t2)) => {
                let t2 = self.find(t2);
                if t2 != t {
                    self.pending.push((t2, t));
                }
            }
            None => self.out[s].push((g, t)),
        }
        match self.inc[t].iter().find(|&&(eg, _)| eg == g) {
            Some(&(_, s2)) => {
                let s2 = self.find(s2);
                if s2 != s {
                    self.pending.push((s2, s));
                }
            }
            None => self.inc[t].push((g, s)),
        }
    }

    fn merge_all(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let weight = |f: &Folder, v: usize| f.out[v].len() + f.inc[v].len();
            let (big, small) = if weight(self, a) >= weight(self, b) {
                (a, b)
            } else {
                (b, a)
            };
            self.parent[small] = big;
            let moved_out = std::mem::take(&mut self.out[small]);
            for (g, t) in moved_out {
                match self.out[big].iter().find(|&&(eg, _)| eg == g) {
                    Some(&(_, t2)) => {
                        let t = self.find(t);
                        let t2 = self.find(t2);
                        if t != t2 {
                            self.pending.push((t, t2));
                        }
                    }
                    None => self.out[big].push((g, t)),
                }
            }
            let moved_inc = std::mem::take(&mut self.inc[small]);
            for (g, s) in moved_inc {
                match self.inc[big].iter().find(|&&(eg, _)| eg == g) {
                    Some(&(_, s2)) => {
                        let s = self.find(s);
                        let s2 = self.find(s2);
                        if s != s2 {
                            self.pending.push((s, s2));
                        }
                    }
                    None => self.inc[big].push((g, s)),
                }
            }
        }
    }
}

impl CoreGraph {
    /// Folds the generating words into the unique core graph of the
    /// subgroup they generate. Independent of generator order; the empty
    /// set yields the single-vertex graph of the trivial subgroup.
    pub fn fold(alphabet: &Alphabet, generators: &[ReducedWord]) -> Result<CoreGraph> {
        for w in generators {
            if w.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch(
                    "fold requires all generators over one alphabet".into(),
                ));
            }
        }
        let mut folder = Folder::new();
        let base = folder.add_vertex();
        for w in generators {
            if w.is_identity() {
                continue;
            }
            let mut prev = base;
            let n = w.letters().len();
            for (i, l) in w.letters().iter().enumerate() {
                let next = if i + 1 == n {
                    base
                } else {
                    folder.add_vertex()
                };
                match l.sign {
                    Sign::Plus => folder.add_edge(prev, l.gen, next),
                    Sign::Minus => folder.add_edge(next, l.gen, prev),
                }
                folder.merge_all();
                prev = next;
            }
        }

        // Collect the quotient.
        let nverts = folder.parent.len();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for v in 0..nverts {
            if folder.find(v) != v {
                continue;
            }
            let targets = folder.out[v].clone();
            for (g, t) in targets {
                let t = folder.find(t);
                edges.push((v, g, t));
            }
        }
        let base = folder.find(base);

        // Trim non-core hairs (degree <= 1 away from the base). Freely
        // reduced generators do not produce any, but the graph contract
        // requires it.
        let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, &(s, _, t)) in edges.iter().enumerate() {
            incident.entry(s).or_default().push(i);
            if t != s {
                incident.entry(t).or_default().push(i);
            }
        }
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for &(s, _, t) in &edges {
            *degree.entry(s).or_insert(0) += 1;
            *degree.entry(t).or_insert(0) += 1;
        }
        let mut alive_edge = vec![true; edges.len()];
        let mut stack: Vec<usize> = degree
            .iter()
            .filter(|&(&v, &d)| v != base && d <= 1)
            .map(|(&v, _)| v)
            .collect();
        while let Some(v) = stack.pop() {
            if v == base || degree.get(&v).copied().unwrap_or(0) > 1 {
                continue;
            }
            for &ei in incident.get(&v).into_iter().flatten() {
                if !alive_edge[ei] {
                    continue;
                }
                alive_edge[ei] = false;
                let (s, _, t) = edges[ei];
                for end in [s, t] {
                    let d = degree.entry(end).or_insert(0);
                    *d = d.saturating_sub(1);
                    if end != v && end != base && *d <= 1 {
                        stack.push(end);
                    }
                }
            }
        }

        // Canonical breadth-first relabeling from the base, exploring each
        // vertex's edges in generator order, outgoing before incoming.
        let k = alphabet.len();
        let mut out_at: HashMap<(usize, usize), usize> = HashMap::new();
        let mut in_at: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, &(s, g, t)) in edges.iter().enumerate() {
            if alive_edge[i] {
                out_at.insert((s, g), t);
                in_at.insert((t, g), s);
            }
        }
        let mut canon: HashMap<usize, u32> = HashMap::new();
        canon.insert(base, 0);
        let mut order = vec![base];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for g in 0..k {
                if let Some(&t) = out_at.get(&(v, g)) {
                    canon.entry(t).or_insert_with(|| {
                        order.push(t);
                        (order.len() - 1) as u32
                    });
                }
                if let Some(&s) = in_at.get(&(v, g)) {
                    canon.entry(s).or_insert_with(|| {
                        order.push(s);
                        (order.len() - 1) as u32
                    });
                }
            }
        }

        let n = order.len();
        let mut out = vec![vec![None; k]; n];
        let mut inc = vec![vec![None; k]; n];
        let mut edge_count = 0;
        for (i, &(s, g, t)) in edges.iter().enumerate() {
            if !alive_edge[i] {
                continue;
            }
            let (cs, ct) = (canon[&s], canon[&t]);
            out[cs as usize][g] = Some(ct);
            inc[ct as usize][g] = Some(cs);
            edge_count += 1;
        }
        Ok(CoreGraph {
            alphabet: alphabet.clone(),
            out,
            inc,
            edge_count,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// rank = |E| - |V| + 1 (the graph is connected).
    pub fn rank(&self) -> usize {
        self.edge_count + 1 - self.vertex_count()
    }

    fn step(&self, v: usize, l: Letter) -> Option<usize> {
        match l.sign {
            Sign::Plus => self.out[v][l.gen].map(|t| t as usize),
            Sign::Minus => self.inc[v][l.gen].map(|s| s as usize),
        }
    }

    /// True iff `w` spells a base-to-base path.
    pub fn contains(&self, w: &ReducedWord) -> Result<bool> {
        if w.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch(
                "membership query over a different alphabet".into(),
            ));
        }
        let mut v = 0usize;
        for &l in w.letters() {
            match self.step(v, l) {
                Some(next) => v = next,
                None => return Ok(false),
            }
        }
        Ok(v == 0)
    }

    /// Spanning tree, basis words, and rewriting data for this subgroup.
    pub fn basis(&self) -> SubgroupBasis {
        let k = self.alphabet.len();
        let n = self.vertex_count();
        // BFS in canonical order rediscovers vertices 0..n in id order.
        let mut path: Vec<Option<Vec<Letter>>> = vec![None; n];
        path[0] = Some(Vec::new());
        let mut tree: Vec<(usize, usize, usize)> = Vec::new();
        let mut is_tree: HashMap<(usize, usize), ()> = HashMap::new();
        let mut queue = vec![0usize];
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for g in 0..k {
                if let Some(t) = self.out[v][g] {
                    let t = t as usize;
                    if path[t].is_none() {
                        let mut p = path[v].clone().unwrap();
                        p.push(Letter::plus(g));
                        path[t] = Some(p);
                        tree.push((v, g, t));
                        is_tree.insert((v, g), ());
                        queue.push(t);
                    }
                }
                if let Some(s) = self.inc[v][g] {
                    let s = s as usize;
                    if path[s].is_none() {
                        let mut p = path[v].clone().unwrap();
                        p.push(Letter::minus(g));
                        path[s] = Some(p);
                        tree.push((s, g, v));
                        is_tree.insert((s, g), ());
                        queue.push(s);
                    }
                }
            }
        }
        let path: Vec<Vec<Letter>> = path.into_iter().map(Option::unwrap).collect();

        // Non-tree edges in canonical order carry the basis.
        let mut basis_words = Vec::new();
        let mut edge_basis: HashMap<(usize, usize), Option<usize>> = HashMap::new();
        for v in 0..n {
            for g in 0..k {
                let Some(t) = self.out[v][g] else { continue };
                let t = t as usize;
                if is_tree.contains_key(&(v, g)) {
                    edge_basis.insert((v, g), None);
                    continue;
                }
                let mut letters = path[v].clone();
                letters.push(Letter::plus(g));
                letters.extend(path[t].iter().rev().map(|l| l.inverse()));
                let word = ReducedWord::reduce(&letters, &self.alphabet).expect("letters in range");
                edge_basis.insert((v, g), Some(basis_words.len()));
                basis_words.push(word);
            }
        }
        let basis_alphabet =
            Alphabet::new((0..basis_words.len()).map(|i| format!("B{i}"))).expect("fresh names");
        SubgroupBasis {
            graph: self.clone(),
            spanning_tree: tree,
            basis_words,
            basis_alphabet,
            edge_basis,
        }
    }

    /// Bounded search for a conjugator `c` (|c| <= bound, deterministic
    /// enumeration order) with `c^-1 w c` in the subgroup. Absence is only
    /// certified up to the bound.
    pub fn conjugate_into(&self, w: &ReducedWord, bound: usize) -> Result<Option<ReducedWord>> {
        if w.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch(
                "conjugation query over a different alphabet".into(),
            ));
        }
        for c in enumerate_reduced(&self.alphabet, bound) {
            if self.contains(&w.conjugate(&c)?)? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// GraphViz rendering: circles for vertices, a doubled circle for the
    /// base, edges labeled by generator name.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph core {\n  rankdir=LR;\n");
        for v in 0..self.vertex_count() {
            let shape = if v == 0 { "doublecircle" } else { "circle" };
            s.push_str(&format!("  v{v} [shape={shape}];\n"));
        }
        for v in 0..self.vertex_count() {
            for g in 0..self.alphabet.len() {
                if let Some(t) = self.out[v][g] {
                    s.push_str(&format!(
                        "  v{v} -> v{t} [label=\"{}\"];\n",
                        self.alphabet.name(g)
                    ));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// A free basis of the subgroup carried by a core graph: one word per
/// non-tree edge; |basis| = |E| - |V| + 1.
#[derive(Debug, Clone)]
pub struct SubgroupBasis {
    graph: CoreGraph,
    spanning_tree: Vec<(usize, usize, usize)>,
    basis_words: Vec<ReducedWord>,
    basis_alphabet: Alphabet,
    edge_basis: HashMap<(usize, usize), Option<usize>>,
}

impl SubgroupBasis {
    pub fn graph(&self) -> &CoreGraph {
        &self.graph
    }

    pub fn spanning_tree(&self) -> &[(usize, usize, usize)] {
        &self.spanning_tree
    }

    pub fn basis_words(&self) -> &[ReducedWord] {
        &self.basis_words
    }

    pub fn rank(&self) -> usize {
        self.basis_words.len()
    }

    /// Alphabet `B0, B1, ...` naming the basis words.
    pub fn basis_alphabet(&self) -> &Alphabet {
        &self.basis_alphabet
    }

    /// Rewrites a member in basis coordinates. Evaluating the result
    /// reproduces the input exactly; non-members are reported as errors.
    pub fn express(&self, w: &ReducedWord) -> Result<ReducedWord> {
        if w.alphabet() != self.graph.alphabet() {
            return Err(Error::AlphabetMismatch(
                "express over a different alphabet".into(),
            ));
        }
        let mut v = 0usize;
        let mut letters: Vec<Letter> = Vec::new();
        for &l in w.letters() {
            let next = self
                .graph
                .step(v, l)
                .ok_or_else(|| Error::NotAMember(w.to_string()))?;
            let edge_key = match l.sign {
                Sign::Plus => (v, l.gen),
                Sign::Minus => (next, l.gen),
            };
            if let Some(i) = self.edge_basis[&edge_key] {
                letters.push(Letter {
                    gen: i,
                    sign: l.sign,
                });
            }
            v = next;
        }
        if v != 0 {
            return Err(Error::NotAMember(w.to_string()));
        }
        ReducedWord::reduce(&letters, &self.basis_alphabet)
    }

    /// Substitutes basis words for basis letters and reduces.
    pub fn evaluate(&self, basis_word: &ReducedWord) -> Result<ReducedWord> {
        if basis_word.alphabet() != &self.basis_alphabet {
            return Err(Error::AlphabetMismatch(
                "evaluate expects a word over the basis alphabet".into(),
            ));
        }
        let mut letters: Vec<Letter> = Vec::new();
        for &l in basis_word.letters() {
            let image = &self.basis_words[l.gen];
            match l.sign {
                Sign::Plus => letters.extend_from_slice(image.letters()),
                Sign::Minus => letters.extend(image.letters().iter().rev().map(|x| x.inverse())),
            }
        }
        ReducedWord::reduce(&letters, self.graph.alphabet())
    }
}

/// True iff the words freely generate the whole ambient free group:
/// the folded subgroup has rank equal to the (deduplicated) set size and
/// contains every ambient generator.
pub fn is_free_basis_of(words: &[ReducedWord], ambient: &Alphabet) -> Result<bool> {
    let mut seen: Vec<&ReducedWord> = Vec::new();
    for w in words {
        if !seen.iter().any(|s| s.letters() == w.letters()) {
            seen.push(w);
        }
    }
    let set: Vec<ReducedWord> = seen.into_iter().cloned().collect();
    let g = CoreGraph::fold(ambient, &set)?;
    if g.rank() != set.len() {
        return Ok(false);
    }
    for i in 0..ambient.len() {
        if !g.contains(&ambient.generator(i)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A witness that a set fails the Nielsen-reduced conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NielsenViolation {
    /// A trivial word in the set.
    Trivial { index: usize },
    /// Two input elements equal or mutually inverse; such a set can never
    /// be a basis of its full count.
    Degenerate { i: usize, j: usize },
    /// |uv| < max(|u|, |v|) with uv != 1 (u, v in the symmetrized set).
    Pair { u: ReducedWord, v: ReducedWord },
    /// |uvw| <= |u| - |v| + |w| with uv != 1 != vw.
    Triple {
        u: ReducedWord,
        v: ReducedWord,
        w: ReducedWord,
    },
}

/// Finds the first violation of the Nielsen-reduced conditions over the
/// symmetrized set, or `None` when the set is Nielsen-reduced (in which
/// case it freely generates its subgroup).
pub fn nielsen_violation(words: &[ReducedWord]) -> Result<Option<NielsenViolation>> {
    if let Some(first) = words.first() {
        let alphabet = first.alphabet();
        if words.iter().any(|w| w.alphabet() != alphabet) {
            return Err(Error::AlphabetMismatch(
                "Nielsen check requires one common alphabet".into(),
            ));
        }
    }
    if let Some(index) = words.iter().position(ReducedWord::is_identity) {
        return Ok(Some(NielsenViolation::Trivial { index }));
    }
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            if words[i].letters() == words[j].letters()
                || words[i].letters() == words[j].invert().letters()
            {
                return Ok(Some(NielsenViolation::Degenerate { i, j }));
            }
        }
    }
    let mut sym: Vec<ReducedWord> = Vec::new();
    for w in words.iter().flat_map(|w| [w.clone(), w.invert()]) {
        if !sym.iter().any(|s| s.letters() == w.letters()) {
            sym.push(w);
        }
    }
    let n = sym.len();
    let mut products: Vec<Vec<Option<ReducedWord>>> = vec![vec![None; n]; n];
    for (i, u) in sym.iter().enumerate() {
        for (j, v) in sym.iter().enumerate() {
            let p = u.multiply(v)?;
            if p.is_identity() {
                continue;
            }
            if p.len() < u.len() || p.len() < v.len() {
                return Ok(Some(NielsenViolation::Pair {
                    u: u.clone(),
                    v: v.clone(),
                }));
            }
            products[i][j] = Some(p);
        }
    }
    for i in 0..n {
        for j in 0..n {
            let Some(uv) = &products[i][j] else { continue };
            for l in 0..n {
                if products[j][l].is_none() {
                    continue;
                }
                let uvw = uv.multiply(&sym[l])?;
                let bound = sym[i].len() as i64 - sym[j].len() as i64 + sym[l].len() as i64;
                if (uvw.len() as i64) <= bound {
                    return Ok(Some(NielsenViolation::Triple {
                        u: sym[i].clone(),
                        v: sym[j].clone(),
                        w: sym[l].clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// True iff the set satisfies the Nielsen-reduced conditions.
pub fn nielsen_property_check(words: &[ReducedWord]) -> Result<bool> {
    Ok(nielsen_violation(words)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn abc() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    fn yzz() -> Alphabet {
        Alphabet::new(["y", "z0", "z1"]).unwrap()
    }

    fn words(a: &Alphabet, texts: &[&str]) -> Vec<ReducedWord> {
        texts.iter().map(|t| a.parse_word(t).unwrap()).collect()
    }

    /// Naive membership oracle: all freely reduced products of at most
    /// `factors` symmetrized generators.
    fn enumerate_products(
        gens: &[ReducedWord],
        alphabet: &Alphabet,
        factors: usize,
    ) -> Vec<ReducedWord> {
        let mut sym: Vec<ReducedWord> = Vec::new();
        for w in gens.iter().flat_map(|w| [w.clone(), w.invert()]) {
            sym.push(w);
        }
        let mut layer = vec![alphabet.identity()];
        let mut all = layer.clone();
        for _ in 0..factors {
            let mut next = Vec::new();
            for p in &layer {
                for g in &sym {
                    next.push(p.multiply(g).unwrap());
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all.sort_by(|x, y| x.letters().cmp(y.letters()));
        all.dedup_by(|x, y| x.letters() == y.letters());
        all
    }

    #[test]
    fn single_loop() {
        let a = abc();
        let g = CoreGraph::fold(&a, &words(&a, &["a"])).unwrap();
        assert_eq!(g.rank(), 1);
        assert_eq!(g.vertex_count(), 1);
        assert!(g.contains(&a.parse_word("a a a").unwrap()).unwrap());
        assert!(!g.contains(&a.parse_word("b").unwrap()).unwrap());
    }

    #[test]
    fn conjugated_generators() {
        let a = abc();
        let gens = words(&a, &["a b a^-1", "a c a^-1"]);
        let g = CoreGraph::fold(&a, &gens).unwrap();
        assert_eq!(g.rank(), 2);
        let w = a.parse_word("a b c a^-1").unwrap();
        assert!(g.contains(&w).unwrap());
        // cross-check with the naive enumeration oracle
        let oracle = enumerate_products(&gens, &a, 4);
        assert!(oracle.iter().any(|p| p.letters() == w.letters()));
        for p in &oracle {
            assert!(
                g.contains(p).unwrap(),
                "oracle product {p} must be a member"
            );
        }
    }

    #[test]
    fn z0_is_excluded() {
        let c = yzz();
        let gens = words(&c, &["y", "y z1^-1 z0 z1"]);
        let g = CoreGraph::fold(&c, &gens).unwrap();
        assert_eq!(g.rank(), 2);
        assert!(!g.contains(&c.parse_word("z0").unwrap()).unwrap());
        assert!(g.contains(&c.parse_word("z1^-1 z0 z1").unwrap()).unwrap());
        // the enumeration oracle never produces z0 either
        let oracle = enumerate_products(&gens, &c, 5);
        let z0 = c.parse_word("z0").unwrap();
        assert!(!oracle.iter().any(|p| p.letters() == z0.letters()));
    }

    #[test]
    fn empty_generating_set() {
        let a = abc();
        let g = CoreGraph::fold(&a, &[]).unwrap();
        assert_eq!(g.rank(), 0);
        assert_eq!(g.vertex_count(), 1);
        assert!(g.contains(&a.identity()).unwrap());
        assert!(!g.contains(&a.parse_word("a").unwrap()).unwrap());
        assert!(g.basis().basis_words().is_empty());
    }

    #[test]
    fn rank_examples() {
        let a = abc();
        let rose = CoreGraph::fold(&a, &words(&a, &["a", "b"])).unwrap();
        assert_eq!(rose.rank(), 2);
        let b = rose.basis();
        let names: Vec<String> = b.basis_words().iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["a", "b"]);

        let g = CoreGraph::fold(&a, &words(&a, &["a b", "a c"])).unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn fold_is_generator_order_insensitive() {
        let a = abc();
        let gens = words(&a, &["a b a^-1", "b c", "a c a^-1 b^-1"]);
        let g1 = CoreGraph::fold(&a, &gens).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [2, 0, 1], [1, 2, 0], [0, 2, 1]] {
            let permuted: Vec<ReducedWord> = perm.iter().map(|&i| gens[i].clone()).collect();
            let g2 = CoreGraph::fold(&a, &permuted).unwrap();
            assert_eq!(g1, g2);
        }
    }

    #[test]
    fn basis_round_trip_membership() {
        let a = abc();
        let gens = words(&a, &["a b", "a c a^-1", "b b"]);
        let g = CoreGraph::fold(&a, &gens).unwrap();
        let basis = g.basis();
        assert_eq!(basis.rank(), g.rank());
        let refolded = CoreGraph::fold(&a, basis.basis_words()).unwrap();
        assert_eq!(refolded, g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let len = rand::Rng::gen_range(&mut rng, 0..=8);
            let w = crate::words::random_reduced(&mut rng, &a, len);
            assert_eq!(
                g.contains(&w).unwrap(),
                refolded.contains(&w).unwrap(),
                "membership disagrees on {w}"
            );
        }
    }

    #[test]
    fn express_examples() {
        let c = yzz();
        let gens = words(&c, &["y", "y z1^-1 z0 z1"]);
        let g = CoreGraph::fold(&c, &gens).unwrap();
        let basis = g.basis();

        let w = c.parse_word("z1^-1 z0 z1").unwrap();
        let expr = basis.express(&w).unwrap();
        assert_eq!(basis.evaluate(&expr).unwrap(), w);

        assert!(basis.express(&c.identity()).unwrap().is_identity());

        let a = abc();
        let h = CoreGraph::fold(&a, &words(&a, &["a"])).unwrap();
        let err = h.basis().express(&a.parse_word("b").unwrap());
        assert!(matches!(err, Err(Error::NotAMember(_))));

        // every generator expresses and evaluates back
        for gen in &gens {
            let e = basis.express(gen).unwrap();
            assert_eq!(basis.evaluate(&e).unwrap(), *gen);
        }
    }

    #[test]
    fn free_basis_detection() {
        let c = yzz();
        assert!(is_free_basis_of(&words(&c, &["y", "y z1^-1 z0 z1", "z1"]), &c).unwrap());
        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert!(is_free_basis_of(&words(&ab, &["a", "b"]), &ab).unwrap());
        assert!(!is_free_basis_of(&words(&ab, &["a b", "b a"]), &ab).unwrap());
        // dropping one certificate element loses a generator
        assert!(!is_free_basis_of(&words(&c, &["y", "y z1^-1 z0 z1"]), &c).unwrap());
    }

    #[test]
    fn conjugation_search() {
        let c = yzz();
        let g = CoreGraph::fold(&c, &words(&c, &["y", "y z1^-1 z0 z1"])).unwrap();
        let z0 = c.parse_word("z0").unwrap();
        let conj = g.conjugate_into(&z0, 2).unwrap();
        assert_eq!(conj.unwrap().to_string(), "z1");

        // a member conjugates by the identity
        let member = c.parse_word("z1^-1 z0 z1").unwrap();
        assert!(g.conjugate_into(&member, 1).unwrap().unwrap().is_identity());

        let ab = Alphabet::new(["a", "b"]).unwrap();
        let h = CoreGraph::fold(&ab, &[ab.parse_word("a").unwrap()]).unwrap();
        assert!(h
            .conjugate_into(&ab.parse_word("b").unwrap(), 3)
            .unwrap()
            .is_none());
    }

    #[test]
    fn nielsen_conditions() {
        let c = Alphabet::new(["y", "z0", "z1", "z2"]).unwrap();
        let set = words(&c, &["y", "z1^-1 z0 z1", "z2^-1 z1 z2"]);
        assert!(nielsen_property_check(&set).unwrap());

        let ab = Alphabet::new(["a", "b"]).unwrap();
        // {a b, b^-1}: (a b)(b^-1) = a is shorter than a b
        let v = nielsen_violation(&words(&ab, &["a b", "b^-1"])).unwrap();
        assert!(matches!(v, Some(NielsenViolation::Pair { .. })));

        // {a, a b} fails too: (b^-1 a^-1) · a = b^-1 is shorter than b^-1 a^-1
        let v = nielsen_violation(&words(&ab, &["a", "a b"])).unwrap();
        assert!(matches!(v, Some(NielsenViolation::Pair { .. })));

        // {a, b} is Nielsen-reduced
        assert!(nielsen_property_check(&words(&ab, &["a", "b"])).unwrap());

        // trivial words are flagged
        let v = nielsen_violation(&[ab.identity()]).unwrap();
        assert!(matches!(v, Some(NielsenViolation::Trivial { index: 0 })));
    }

    #[test]
    fn nielsen_sets_freely_generate() {
        let a = abc();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut passing = 0;
        for _ in 0..300 {
            let count = rand::Rng::gen_range(&mut rng, 1..=3);
            let set: Vec<ReducedWord> = (0..count)
                .map(|_| {
                    let len = rand::Rng::gen_range(&mut rng, 1..=4);
                    crate::words::random_reduced(&mut rng, &a, len)
                })
                .collect();
            let mut distinct: Vec<ReducedWord> = Vec::new();
            for w in set {
                if !distinct.iter().any(|s| s.letters() == w.letters()) {
                    distinct.push(w);
                }
            }
            if nielsen_property_check(&distinct).unwrap() {
                passing += 1;
                let g = CoreGraph::fold(&a, &distinct).unwrap();
                assert_eq!(
                    g.rank(),
                    distinct.len(),
                    "Nielsen set {distinct:?} must freely generate"
                );
            }
        }
        assert!(
            passing > 20,
            "sampler produced too few Nielsen sets ({passing})"
        );
    }

    /// Reference folder: global rescans merging any label conflict, no
    /// union-find, no worklist. Quadratic but obviously faithful to the
    /// folding rule.
    fn naive_fold(generators: &[ReducedWord]) -> (Vec<(usize, usize, usize)>, usize) {
        let mut next_vertex = 1usize;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for w in generators {
            if w.is_identity() {
                continue;
            }
            let mut prev = 0usize;
            let n = w.letters().len();
            for (i, l) in w.letters().iter().enumerate() {
                let next = if i + 1 == n {
                    0
                } else {
                    next_vertex += 1;
                    next_vertex - 1
                };
                match l.sign {
                    Sign::Plus => edges.push((prev, l.gen, next)),
                    Sign::Minus => edges.push((next, l.gen, prev)),
                }
                prev = next;
            }
        }
        edges.sort_unstable();
        edges.dedup();
        loop {
            let mut merge: Option<(usize, usize)> = None;
            'scan: for (i, &(s1, g1, t1)) in edges.iter().enumerate() {
                for &(s2, g2, t2) in &edges[i + 1..] {
                    if g1 != g2 {
                        continue;
                    }
                    // keep the smaller id so the base vertex 0 survives
                    if s1 == s2 && t1 != t2 {
                        merge = Some((t1.min(t2), t1.max(t2)));
                        break 'scan;
                    }
                    if t1 == t2 && s1 != s2 {
                        merge = Some((s1.min(s2), s1.max(s2)));
                        break 'scan;
                    }
                }
            }
            let Some((keep, drop)) = merge else { break };
            for e in &mut edges {
                if e.0 == drop {
                    e.0 = keep;
                }
                if e.2 == drop {
                    e.2 = keep;
                }
            }
            edges.sort_unstable();
            edges.dedup();
        }
        let mut verts: Vec<usize> = edges.iter().flat_map(|&(s, _, t)| [s, t]).collect();
        verts.push(0);
        verts.sort_unstable();
        verts.dedup();
        (edges, verts.len())
    }

    fn naive_contains(edges: &[(usize, usize, usize)], w: &ReducedWord) -> bool {
        let mut v = 0usize;
        for l in w.letters() {
            let step = match l.sign {
                Sign::Plus => edges
                    .iter()
                    .find(|&&(s, g, _)| s == v && g == l.gen)
                    .map(|&(_, _, t)| t),
                Sign::Minus => edges
                    .iter()
                    .find(|&&(_, g, t)| t == v && g == l.gen)
                    .map(|&(s, _, _)| s),
            };
            match step {
                Some(next) => v = next,
                None => return false,
            }
        }
        v == 0
    }

    #[test]
    fn fold_matches_naive_reference_folder() {
        let a = abc();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let probes = enumerate_reduced(&a, 4);
        for _ in 0..120 {
            let count = rand::Rng::gen_range(&mut rng, 0..=3);
            let gens: Vec<ReducedWord> = (0..count)
                .map(|_| {
                    let len = rand::Rng::gen_range(&mut rng, 1..=5);
                    crate::words::random_reduced(&mut rng, &a, len)
                })
                .collect();
            let graph = CoreGraph::fold(&a, &gens).unwrap();
            let (edges, verts) = naive_fold(&gens);
            assert_eq!(
                graph.edge_count(),
                edges.len(),
                "edges diverge for {gens:?}"
            );
            assert_eq!(graph.vertex_count(), verts, "vertices diverge for {gens:?}");
            for p in &probes {
                assert_eq!(
                    graph.contains(p).unwrap(),
                    naive_contains(&edges, p),
                    "membership of {p} diverges for generators {gens:?}"
                );
            }
        }
    }

    #[test]
    fn oracle_equivalence_small() {
        let a = abc();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let count = rand::Rng::gen_range(&mut rng, 0..=3);
            let gens: Vec<ReducedWord> = (0..count)
                .map(|_| {
                    let len = rand::Rng::gen_range(&mut rng, 1..=4);
                    crate::words::random_reduced(&mut rng, &a, len)
                })
                .collect();
            let g = CoreGraph::fold(&a, &gens).unwrap();
            let basis = g.basis();
            for p in enumerate_products(&gens, &a, 4) {
                assert!(g.contains(&p).unwrap(), "{p} generated but not contained");
                let e = basis.express(&p).unwrap();
                assert_eq!(basis.evaluate(&e).unwrap(), p);
            }
            for _ in 0..20 {
                let len = rand::Rng::gen_range(&mut rng, 0..=6);
                let w = crate::words::random_reduced(&mut rng, &a, len);
                if g.contains(&w).unwrap() {
                    let e = basis.express(&w).unwrap();
                    assert_eq!(basis.evaluate(&e).unwrap(), w, "express certificate failed");
                }
            }
        }
    }

    #[test]
    fn dot_output_shape() {
        let a = abc();
        let g = CoreGraph::fold(&a, &words(&a, &["a b"])).unwrap();
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph core {"));
        assert!(dot.contains("v0 [shape=doublecircle];"));
        assert!(dot.contains("[label=\"a\"]"));
        assert!(dot.ends_with("}\n"));
    }
}
