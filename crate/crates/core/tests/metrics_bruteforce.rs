//! Rank metrics against definitional computations on every permutation.

use mutval_core::metrics::{kendall_tau, ndcg, spearman};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let v = rest.remove(k);
            prefix.push(v);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(k, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

fn closed_form_spearman(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let d2: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

fn pair_count_kendall(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] as i64 - x[j] as i64).signum();
            let b = (y[i] as i64 - y[j] as i64).signum();
            s += a * b;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

fn dcg_of(order: &[usize], rel: &[f64]) -> f64 {
    let mut total = 0.0;
    for (pos, &item) in order.iter().enumerate() {
        total += rel[item] / ((pos + 2) as f64).log2();
    }
    total
}

fn brute_ndcg(pred: &[f64], rel: &[f64]) -> f64 {
    let n = pred.len();
    // predicted order: repeatedly take the max remaining score, lowest index first
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let mut best = 0;
        for k in 1..remaining.len() {
            if pred[remaining[k]] > pred[remaining[best]] {
                best = k;
            }
        }
        order.push(remaining.remove(best));
    }
    let ideal = permutations(n)
        .iter()
        .map(|p| dcg_of(p, rel))
        .fold(0.0, f64::max);
    if ideal == 0.0 {
        1.0
    } else {
        dcg_of(&order, rel) / ideal
    }
}

#[test]
fn every_permutation_up_to_six() {
    for n in 2..=6 {
        let identity: Vec<usize> = (0..n).collect();
        let xf: Vec<f64> = identity.iter().map(|&v| v as f64).collect();
        for p in permutations(n) {
            let yf: Vec<f64> = p.iter().map(|&v| v as f64).collect();
            let s = spearman(&xf, &yf).unwrap();
            assert!(
                (s - closed_form_spearman(&identity, &p)).abs() < 1e-12,
                "{p:?}"
            );
            let t = kendall_tau(&xf, &yf).unwrap();
            assert!(
                (t - pair_count_kendall(&identity, &p)).abs() < 1e-12,
                "{p:?}"
            );
            let rel: Vec<f64> = (0..n).map(|k| ((k * 7 + 3) % 4) as f64).collect();
            let got = ndcg(&yf, &rel).unwrap();
            assert!((got - brute_ndcg(&yf, &rel)).abs() < 1e-12, "{p:?}");
        }
    }
}

#[test]
fn worked_ndcg_value() {
    let rel = [3.0, 2.0, 0.0];
    let pred = [0.5, 0.9, 0.1];
    let expected = (2.0 + 3.0 / 3f64.log2()) / (3.0 + 2.0 / 3f64.log2());
    assert!((brute_ndcg(&pred, &rel) - expected).abs() < 1e-12);
    assert!((ndcg(&pred, &rel).unwrap() - expected).abs() < 1e-12);
    assert!((expected - 0.9134).abs() < 1e-4);
}

#[test]
fn ties_use_average_ranks() {
    // ranks of x: [1, 2.5, 2.5, 4]; y is the identity
    let x = [1.0, 5.0, 5.0, 9.0];
    let y = [1.0, 2.0, 3.0, 4.0];
    let rx = [1.0, 2.5, 2.5, 4.0];
    let mean = 2.5;
    let num: f64 = rx
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    let den = (rx.iter().map(|a| (a - mean).powi(2)).sum::<f64>()
        * y.iter().map(|b| (b - mean).powi(2)).sum::<f64>())
    .sqrt();
    assert!((spearman(&x, &y).unwrap() - num / den).abs() < 1e-12);
    // tau-b: 5 concordant, 0 discordant, one tie in x
    let expected = 5.0 / ((6.0f64 - 1.0) * 6.0).sqrt();
    assert!((kendall_tau(&x, &y).unwrap() - expected).abs() < 1e-12);
}
