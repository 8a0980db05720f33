use super::{Objective, OracleLabels};
use crate::corpus::Document;
use crate::rouge::RougeTriple;

fn triple_of(doc: &Document, selection: &[usize]) -> RougeTriple {
    let cand: Vec<&[String]> = selection.iter().map(|&i| doc.sentences[i].tokens()).collect();
    RougeTriple::score(&cand, &doc.reference_tokens())
}

/// Best whole-sentence selection of at most `m` sentences drawn from the `p` sentences that
/// individually score highest (mean R1/R2/RL F1).
///
/// Ties go to fewer sentences, then to the lexicographically smallest index set.
///
/// # Panics
/// If `p` or `m` is zero.
pub fn extractive_oracle(doc: &Document, p: usize, m: usize) -> OracleLabels {
    extractive_oracle_with(doc, p, m, Objective::MeanR1R2RL)
}

/// [`extractive_oracle`] maximizing a different objective. The candidate pool is always ranked
/// by the mean of R1/R2/RL.
pub fn extractive_oracle_with(doc: &Document, p: usize, m: usize, objective: Objective) -> OracleLabels {
    assert!(p >= 1 && m >= 1, "extractive oracle needs p >= 1 and m >= 1");
    let m_sents = doc.num_sentences();

    let mut ranked: Vec<(usize, f64)> = (0..m_sents).map(|i| (i, triple_of(doc, &[i]).mean())).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut pool: Vec<usize> = ranked.into_iter().take(p).map(|(i, _)| i).collect();
    pool.sort_unstable();

    // Sizes ascending, each size in lexicographic order: the first strict maximum wins ties.
    let mut best: Option<(f64, Vec<usize>)> = None;
    for size in 1..=m.min(pool.len()) {
        for_each_combination(pool.len(), size, |idx| {
            let selection: Vec<usize> = idx.iter().map(|&k| pool[k]).collect();
            let score = objective.of(&triple_of(doc, &selection));
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, selection));
            }
        });
    }
    let (score, selection) = best.expect("a document has at least one sentence");
    OracleLabels::from_selection(doc, &selection, score, objective)
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_in_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]);
        let mut count = 0;
        for_each_combination(2, 3, |_| count += 1);
        assert_eq!(count, 0);
    }

    #[test]
    fn verbatim_reference_sentence_is_selected_alone() {
        let doc = Document::from_lines(
            "d",
            &[
                "storms hit the coast",
                "markets were calm",
                "the mayor praised rescue crews",
                "rain fell",
            ],
            &["the mayor praised rescue crews"],
        )
        .unwrap();
        let l = extractive_oracle(&doc, 10, 3);
        assert_eq!(l.selected(), [2]);
        assert_eq!(l.score, 1.0);
        assert_eq!(l.y[2], [true; 5]);
    }

    #[test]
    fn pool_limits_the_search() {
        let doc = Document::from_lines("d", &["a b", "c d", "x y"], &["a b c d"]).unwrap();
        assert_eq!(extractive_oracle(&doc, 3, 2).selected(), [0, 1]);
        assert_eq!(extractive_oracle(&doc, 1, 2).selected(), [0]);
    }
}
