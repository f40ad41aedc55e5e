use super::ProbMatrix;
use crate::{Error, Result};

/// Mann-Whitney AUC: `P(score_pos > score_neg) + 0.5 P(tie)`.
pub fn auc_binary(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Size(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels(
            "AUC needs both positive and negative labels".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // sum of (1-based, tie-averaged) ranks of the positives
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = order[i..=j].iter().filter(|&&r| labels[r]).count();
        rank_sum += avg_rank * pos_in_group as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * n))
}

/// One-vs-one AUC: mean over observed class pairs `(a, b)` of the two
/// directional AUCs, each scoring rows by `p_a / (p_a + p_b)`.
pub fn auc_ovo(probs: &ProbMatrix, labels: &[usize]) -> Result<f64> {
    if probs.n_rows != labels.len() {
        return Err(Error::Size(format!(
            "{} probability rows for {} labels",
            probs.n_rows,
            labels.len()
        )));
    }
    let k = probs.n_classes;
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::Size(format!("label {bad} has no probability column")));
    }
    let mut present = vec![false; k];
    for &l in labels {
        present[l] = true;
    }
    let classes: Vec<usize> = (0..k).filter(|&c| present[c]).collect();
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels(
            "one-vs-one AUC needs at least two observed classes".into(),
        ));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (ai, &a) in classes.iter().enumerate() {
        for &b in &classes[ai + 1..] {
            let rows: Vec<usize> = (0..labels.len())
                .filter(|&i| labels[i] == a || labels[i] == b)
                .collect();
            let share = |num: usize, i: usize| {
                let (pa, pb) = (probs.row(i)[a], probs.row(i)[b]);
                let denom = pa + pb;
                if denom > 0.0 {
                    probs.row(i)[num] / denom
                } else {
                    0.5
                }
            };
            let s_a: Vec<f64> = rows.iter().map(|&i| share(a, i)).collect();
            let s_b: Vec<f64> = rows.iter().map(|&i| share(b, i)).collect();
            let is_a: Vec<bool> = rows.iter().map(|&i| labels[i] == a).collect();
            let is_b: Vec<bool> = is_a.iter().map(|x| !x).collect();
            total += (auc_binary(&s_a, &is_a)? + auc_binary(&s_b, &is_b)?) / 2.0;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}
