//! ROUGE-N / ROUGE-L F1, the incremental unigram+bigram overlap scorer and Pearson correlation.
//!
//! Texts are lowercased before matching; there is no stemming. Multi-sentence texts are passed
//! as a list of sentences and bigrams never span a sentence boundary, on either side.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    /// Scores from a match count and the candidate/reference totals; zero when either total is zero.
    pub fn from_counts(matched: u64, candidate_total: u64, reference_total: u64) -> Self {
        if candidate_total == 0 || reference_total == 0 {
            return RougeScore::default();
        }
        let precision = matched as f64 / candidate_total as f64;
        let recall = matched as f64 / reference_total as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }
}

pub fn normalize<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| t.as_ref().to_lowercase()).collect()
}

fn ngram_counts<S: AsRef<str>, T: AsRef<[S]>>(text: &[T], n: usize) -> (HashMap<Vec<String>, u64>, u64) {
    let mut counts: HashMap<Vec<String>, u64> = HashMap::new();
    let mut total = 0;
    for sentence in text {
        let norm = normalize(sentence.as_ref());
        for gram in norm.windows(n) {
            *counts.entry(gram.to_vec()).or_default() += 1;
            total += 1;
        }
    }
    (counts, total)
}

/// ROUGE-N over sentence-segmented texts.
///
/// # Panics
/// If `n == 0`.
pub fn rouge_n_segmented<S, T, U, V>(candidate: &[T], reference: &[V], n: usize) -> RougeScore
where
    S: AsRef<str>,
    T: AsRef<[S]>,
    U: AsRef<str>,
    V: AsRef<[U]>,
{
    assert!(n >= 1, "ROUGE-N needs n >= 1");
    let (cand, cand_total) = ngram_counts(candidate, n);
    let (refs, ref_total) = ngram_counts(reference, n);
    let matched = cand
        .iter()
        .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_counts(matched, cand_total, ref_total)
}

pub fn rouge_n<S: AsRef<str>, U: AsRef<str>>(candidate: &[S], reference: &[U], n: usize) -> RougeScore {
    rouge_n_segmented(&[candidate], &[reference], n)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L from the longest common subsequence of the two (flattened) texts.
pub fn rouge_l<S: AsRef<str>, U: AsRef<str>>(candidate: &[S], reference: &[U]) -> RougeScore {
    let c = normalize(candidate);
    let r = normalize(reference);
    let l = lcs_len(&c, &r) as u64;
    RougeScore::from_counts(l, c.len() as u64, r.len() as u64)
}

/// Summary-level ROUGE-L: both texts are concatenated before the LCS.
pub fn rouge_l_segmented<S, T, U, V>(candidate: &[T], reference: &[V]) -> RougeScore
where
    S: AsRef<str>,
    T: AsRef<[S]>,
    U: AsRef<str>,
    V: AsRef<[U]>,
{
    let flat_c: Vec<&str> = candidate
        .iter()
        .flat_map(|s| s.as_ref().iter().map(AsRef::as_ref))
        .collect();
    let flat_r: Vec<&str> = reference
        .iter()
        .flat_map(|s| s.as_ref().iter().map(AsRef::as_ref))
        .collect();
    rouge_l(&flat_c, &flat_r)
}

/// R1, R2 and RL F1 of one candidate against one reference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeTriple {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

impl RougeTriple {
    pub fn score<S, T, U, V>(candidate: &[T], reference: &[V]) -> Self
    where
        S: AsRef<str>,
        T: AsRef<[S]>,
        U: AsRef<str>,
        V: AsRef<[U]>,
    {
        RougeTriple {
            r1: rouge_n_segmented(candidate, reference, 1).f1,
            r2: rouge_n_segmented(candidate, reference, 2).f1,
            rl: rouge_l_segmented(candidate, reference).f1,
        }
    }

    pub fn mean(&self) -> f64 {
        (self.r1 + self.r2 + self.rl) / 3.0
    }

    pub fn avg_r1_r2(&self) -> f64 {
        (self.r1 + self.r2) / 2.0
    }
}

/// A token sequence pre-mapped to the ids of an [`OverlapState`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segment {
    unigrams: Vec<u32>,
    bigrams: Vec<u32>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.unigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unigrams.is_empty()
    }
}

/// Clipped unigram and bigram matches of a growing candidate against a fixed reference.
///
/// Every n-gram ever seen gets an id; reference counts of non-reference ids are zero, so the
/// clipping test `candidate <= reference` alone decides whether an occurrence is a match.
#[derive(Debug, Clone)]
pub struct OverlapState {
    unigram_ids: HashMap<String, u32>,
    bigram_ids: HashMap<(u32, u32), u32>,
    ref_uni: Vec<u32>,
    ref_bi: Vec<u32>,
    cand_uni: Vec<u32>,
    cand_bi: Vec<u32>,
    matched_uni: u64,
    matched_bi: u64,
    cand_uni_total: u64,
    cand_bi_total: u64,
    ref_uni_total: u64,
    ref_bi_total: u64,
}

impl OverlapState {
    pub fn new<S: AsRef<str>, T: AsRef<[S]>>(reference: &[T]) -> Self {
        let mut state = OverlapState {
            unigram_ids: HashMap::new(),
            bigram_ids: HashMap::new(),
            ref_uni: Vec::new(),
            ref_bi: Vec::new(),
            cand_uni: Vec::new(),
            cand_bi: Vec::new(),
            matched_uni: 0,
            matched_bi: 0,
            cand_uni_total: 0,
            cand_bi_total: 0,
            ref_uni_total: 0,
            ref_bi_total: 0,
        };
        for sentence in reference {
            let seg = state.encode(sentence.as_ref());
            for &u in &seg.unigrams {
                state.ref_uni[u as usize] += 1;
            }
            for &b in &seg.bigrams {
                state.ref_bi[b as usize] += 1;
            }
            state.ref_uni_total += seg.unigrams.len() as u64;
            state.ref_bi_total += seg.bigrams.len() as u64;
        }
        state
    }

    /// Maps one sentence to n-gram ids, registering unseen n-grams.
    pub fn encode<S: AsRef<str>>(&mut self, tokens: &[S]) -> Segment {
        let unigrams: Vec<u32> = tokens
            .iter()
            .map(|t| {
                let key = t.as_ref().to_lowercase();
                let next = self.unigram_ids.len() as u32;
                *self.unigram_ids.entry(key).or_insert_with(|| {
                    self.ref_uni.push(0);
                    self.cand_uni.push(0);
                    next
                })
            })
            .collect();
        let bigrams = unigrams
            .windows(2)
            .map(|w| {
                let next = self.bigram_ids.len() as u32;
                *self.bigram_ids.entry((w[0], w[1])).or_insert_with(|| {
                    self.ref_bi.push(0);
                    self.cand_bi.push(0);
                    next
                })
            })
            .collect();
        Segment { unigrams, bigrams }
    }

    pub fn add_segment(&mut self, seg: &Segment) {
        for &u in &seg.unigrams {
            let c = &mut self.cand_uni[u as usize];
            *c += 1;
            if *c <= self.ref_uni[u as usize] {
                self.matched_uni += 1;
            }
        }
        for &b in &seg.bigrams {
            let c = &mut self.cand_bi[b as usize];
            *c += 1;
            if *c <= self.ref_bi[b as usize] {
                self.matched_bi += 1;
            }
        }
        self.cand_uni_total += seg.unigrams.len() as u64;
        self.cand_bi_total += seg.bigrams.len() as u64;
    }

    /// Exact inverse of [`add_segment`](Self::add_segment). On error the state is unchanged.
    pub fn remove_segment(&mut self, seg: &Segment) -> Result<()> {
        let mut need_uni: HashMap<u32, u32> = HashMap::new();
        for &u in &seg.unigrams {
            *need_uni.entry(u).or_default() += 1;
        }
        let mut need_bi: HashMap<u32, u32> = HashMap::new();
        for &b in &seg.bigrams {
            *need_bi.entry(b).or_default() += 1;
        }
        let short_uni = need_uni
            .iter()
            .any(|(&u, &n)| self.cand_uni.get(u as usize).copied().unwrap_or(0) < n);
        let short_bi = need_bi
            .iter()
            .any(|(&b, &n)| self.cand_bi.get(b as usize).copied().unwrap_or(0) < n);
        if short_uni || short_bi {
            return Err(Error::OverlapUnderflow(
                "removing n-grams that were never added".into(),
            ));
        }
        for &u in &seg.unigrams {
            let c = &mut self.cand_uni[u as usize];
            if *c <= self.ref_uni[u as usize] {
                self.matched_uni -= 1;
            }
            *c -= 1;
        }
        for &b in &seg.bigrams {
            let c = &mut self.cand_bi[b as usize];
            if *c <= self.ref_bi[b as usize] {
                self.matched_bi -= 1;
            }
            *c -= 1;
        }
        self.cand_uni_total -= seg.unigrams.len() as u64;
        self.cand_bi_total -= seg.bigrams.len() as u64;
        Ok(())
    }

    /// Adds one sentence and returns the new avg(R1, R2) F1.
    pub fn add<S: AsRef<str>>(&mut self, tokens: &[S]) -> f64 {
        let seg = self.encode(tokens);
        self.add_segment(&seg);
        self.score()
    }

    pub fn remove<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<()> {
        let seg = self.encode(tokens);
        self.remove_segment(&seg)
    }

    pub fn rouge1(&self) -> RougeScore {
        RougeScore::from_counts(self.matched_uni, self.cand_uni_total, self.ref_uni_total)
    }

    pub fn rouge2(&self) -> RougeScore {
        RougeScore::from_counts(self.matched_bi, self.cand_bi_total, self.ref_bi_total)
    }

    /// Arithmetic mean of the R1 and R2 F1 values.
    pub fn score(&self) -> f64 {
        (self.rouge1().f1 + self.rouge2().f1) / 2.0
    }

    /// Number of candidate unigrams currently held.
    pub fn candidate_len(&self) -> u64 {
        self.cand_uni_total
    }
}

fn padded_eq(a: &[u32], b: &[u32]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n] && a[n..].iter().all(|&x| x == 0) && b[n..].iter().all(|&x| x == 0)
}

/// Two states are equal when they hold the same reference and candidate counts. N-grams that
/// were registered by `encode` but hold zero counts do not matter.
impl PartialEq for OverlapState {
    fn eq(&self, other: &Self) -> bool {
        self.matched_uni == other.matched_uni
            && self.matched_bi == other.matched_bi
            && self.cand_uni_total == other.cand_uni_total
            && self.cand_bi_total == other.cand_bi_total
            && self.ref_uni_total == other.ref_uni_total
            && self.ref_bi_total == other.ref_bi_total
            && padded_eq(&self.ref_uni, &other.ref_uni)
            && padded_eq(&self.cand_uni, &other.cand_uni)
            && padded_eq(&self.ref_bi, &other.ref_bi)
            && padded_eq(&self.cand_bi, &other.cand_bi)
    }
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 points, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn normalize_lowercases_only() {
        assert_eq!(normalize(&["The", "Cat"]), ["the", "cat"]);
        assert!(normalize::<&str>(&[]).is_empty());
        assert_eq!(normalize(&["AQAP's"]), ["aqap's"]);
    }

    #[test]
    fn rouge_n_examples() {
        let s = toks("the cat sat");
        assert_eq!(rouge_n(&s, &s, 1).f1, 1.0);
        assert_eq!(rouge_n(&s, &s, 2).f1, 1.0);

        let r = rouge_n(&s, &toks("the cat"), 1);
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.recall, 1.0);
        assert!((r.f1 - 0.8).abs() < 1e-15);

        assert_eq!(rouge_n(&s, &toks("dogs ran away"), 1).f1, 0.0);
        // one side without bigrams
        assert_eq!(rouge_n(&toks("the"), &s, 2), RougeScore::default());
    }

    #[test]
    fn rouge_l_examples() {
        let a = toks("a b c d");
        assert_eq!(rouge_l(&a, &a).f1, 1.0);
        let r = rouge_l(&a, &toks("a c b d"));
        assert_eq!(r.precision, 0.75);
        assert_eq!(r.recall, 0.75);
        assert_eq!(r.f1, 0.75);
        assert_eq!(rouge_l::<&str, &str>(&[], &a).f1, 0.0);
    }

    #[test]
    fn bigrams_stay_inside_sentences() {
        // "b c" only exists across the boundary of the candidate's two sentences
        let cand = [toks("a b"), toks("c d")];
        let reference = [toks("b c")];
        assert_eq!(rouge_n_segmented(&cand, &reference, 2).f1, 0.0);
        assert_eq!(rouge_n(&toks("a b c d"), &toks("b c"), 2).precision, 1.0 / 3.0);
    }

    #[test]
    fn overlap_examples() {
        let reference = [toks("the cat sat"), toks("on the mat")];
        let mut st = OverlapState::new(&reference);
        let fresh = st.clone();
        let mut score = 0.0;
        for s in &reference {
            score = st.add(s);
        }
        assert_eq!(score, 1.0);

        let seg = st.encode(&toks("the dog"));
        let before = st.clone();
        st.add_segment(&seg);
        st.remove_segment(&seg).unwrap();
        assert_eq!(st, before);
        for s in &reference {
            st.remove(s).unwrap();
        }
        assert_eq!(st, fresh);
        assert_eq!(st.score(), 0.0);
    }

    #[test]
    fn removing_unseen_tokens_is_an_error() {
        let mut st = OverlapState::new(&[toks("a b")]);
        st.add(&toks("a"));
        let before = st.clone();
        assert!(st.remove(&toks("a a")).is_err());
        assert!(st.remove(&toks("b")).is_err());
        assert_eq!(st, before);
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 7.5];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        // hand computation: sxy = 3, sxx = 2, syy = 42/9
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - 3.0 / (2.0f64 * 42.0 / 9.0).sqrt()).abs() < 1e-15);
        assert!((r - 0.982).abs() < 5e-4);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    fn seq() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(vec!["a", "B", "b", "c", "d"]), 0..12)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn symmetry_and_bounds(a in seq(), b in seq()) {
            for n in 1..=2 {
                let ab = rouge_n(&a, &b, n);
                let ba = rouge_n(&b, &a, n);
                prop_assert_eq!(ab.precision, ba.recall);
                for v in [ab.precision, ab.recall, ab.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                if a.len() >= n {
                    prop_assert_eq!(rouge_n(&a, &a, n).f1, 1.0);
                }
            }
            let l = rouge_l(&a, &b);
            prop_assert!(l.f1 <= rouge_n(&a, &b, 1).f1 + 1e-15);
        }

        #[test]
        fn pearson_affine_invariance(
            xs in prop::collection::vec(-50.0f64..50.0, 3..10),
            ys_seed in prop::collection::vec(-50.0f64..50.0, 10),
            a in 0.1f64..10.0, b in -10.0f64..10.0,
        ) {
            let ys = &ys_seed[..xs.len()];
            if let Ok(r) = pearson(&xs, ys) {
                let xt: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
                let r2 = pearson(&xt, ys).unwrap();
                prop_assert!((r - r2).abs() < 1e-9);
            }
        }
    }
}
