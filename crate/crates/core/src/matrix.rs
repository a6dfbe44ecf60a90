//! Boolean pass/fail relation between candidate codes and candidate tests.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which codes pass which tests for a single problem.
///
/// Stored row-major: row `i` holds the outcomes of code `i` against every
/// test. Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<bool>>", into = "Vec<Vec<bool>>")]
pub struct LinkMatrix {
    n_codes: usize,
    n_tests: usize,
    links: Vec<bool>,
}

impl LinkMatrix {
    /// Builds a matrix from row-major link data.
    pub fn new(n_codes: usize, n_tests: usize, links: Vec<bool>) -> Result<Self> {
        if n_codes == 0 || n_tests == 0 {
            return Err(Error::EmptyMatrix { n_codes, n_tests });
        }
        if links.len() != n_codes * n_tests {
            return Err(Error::LinkCount {
                expected: n_codes * n_tests,
                found: links.len(),
            });
        }
        Ok(Self {
            n_codes,
            n_tests,
            links,
        })
    }

    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self> {
        let n_codes = rows.len();
        let n_tests = rows.first().map_or(0, |r| r.as_ref().len());
        let mut links = Vec::with_capacity(n_codes * n_tests);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_tests {
                return Err(Error::RaggedRow {
                    row,
                    expected: n_tests,
                    found: r.len(),
                });
            }
            links.extend_from_slice(r);
        }
        Self::new(n_codes, n_tests, links)
    }

    /// Builds a matrix by evaluating `f(code, test)` on every cell.
    pub fn from_fn(
        n_codes: usize,
        n_tests: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut links = Vec::with_capacity(n_codes * n_tests);
        for i in 0..n_codes {
            for j in 0..n_tests {
                links.push(f(i, j));
            }
        }
        Self::new(n_codes, n_tests, links)
    }

    #[inline]
    pub fn n_codes(&self) -> usize {
        self.n_codes
    }

    #[inline]
    pub fn n_tests(&self) -> usize {
        self.n_tests
    }

    /// True iff code `code` passes test `test`. Panics on out-of-range indices.
    #[inline]
    pub fn passes(&self, code: usize, test: usize) -> bool {
        assert!(code < self.n_codes && test < self.n_tests);
        self.links[code * self.n_tests + test]
    }

    /// Outcomes of one code against every test.
    #[inline]
    pub fn row(&self, code: usize) -> &[bool] {
        &self.links[code * self.n_tests..(code + 1) * self.n_tests]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> + '_ {
        self.links.chunks_exact(self.n_tests)
    }

    /// Indices of the tests passed by `code`, ascending.
    pub fn pass_set(&self, code: usize) -> Vec<usize> {
        self.row(code)
            .iter()
            .enumerate()
            .filter_map(|(j, &p)| p.then_some(j))
            .collect()
    }

    /// Returns a copy with one extra test column appended.
    pub fn with_test(&self, column: &[bool]) -> Result<Self> {
        if column.len() != self.n_codes {
            return Err(Error::DimensionMismatch {
                what: "test column",
                expected: self.n_codes,
                found: column.len(),
            });
        }
        Self::from_fn(self.n_codes, self.n_tests + 1, |i, j| {
            if j == self.n_tests {
                column[i]
            } else {
                self.passes(i, j)
            }
        })
    }

    /// Reorders codes so that new row `k` is old row `perm[k]`.
    pub fn permute_codes(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_codes, "code permutation")?;
        Self::from_fn(self.n_codes, self.n_tests, |i, j| self.passes(perm[i], j))
    }

    /// Reorders tests so that new column `k` is old column `perm[k]`.
    pub fn permute_tests(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_tests, "test permutation")?;
        Self::from_fn(self.n_codes, self.n_tests, |i, j| self.passes(i, perm[j]))
    }
}

fn check_permutation(perm: &[usize], n: usize, what: &'static str) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: perm.len(),
        });
    }
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || core::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidParameter("not a permutation"));
        }
    }
    Ok(())
}

impl TryFrom<Vec<Vec<bool>>> for LinkMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<bool>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<LinkMatrix> for Vec<Vec<bool>> {
    fn from(m: LinkMatrix) -> Self {
        m.rows().map(<[bool]>::to_vec).collect()
    }
}
