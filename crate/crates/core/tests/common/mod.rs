#![allow(dead_code)]

use mutval_core::LinkMatrix;

/// Straight transcription of the update rule over a dense 2-D table,
/// written without touching the library's scoring code.
pub fn naive_sweep(
    links: &[Vec<bool>],
    damping: f64,
    iterations: u32,
    tests_first: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = links.len();
    let m = links[0].len();
    let mut code = vec![1.0f64; n];
    let mut test = vec![1.0f64; m];
    for _ in 0..iterations {
        let mut next_test = vec![0.0f64; m];
        for j in 0..m {
            let mut acc = 0.0;
            for i in 0..n {
                if links[i][j] {
                    acc += code[i];
                }
            }
            next_test[j] = (1.0 - damping) * test[j] + damping * acc;
        }
        let source = if tests_first {
            next_test.clone()
        } else {
            test.clone()
        };
        let mut next_code = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..m {
                if links[i][j] {
                    acc += source[j];
                }
            }
            next_code[i] = (1.0 - damping) * code[i] + damping * acc;
        }
        code = next_code;
        test = next_test;
    }
    (code, test)
}

pub fn to_rows(m: &LinkMatrix) -> Vec<Vec<bool>> {
    m.rows().map(|r| r.to_vec()).collect()
}
