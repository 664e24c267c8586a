use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::rational::{int, Rational};

use super::RankingError;

/// Complete rankings of `objects`, each best first, with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankingDataset {
    pub objects: Vec<String>,
    /// `(order, count)`: `order[j]` is the index of the object at rank `j`.
    pub rankings: Vec<(Vec<usize>, u64)>,
}

impl RankingDataset {
    /// Checks that every ranking is a permutation of the objects.
    pub fn new(
        objects: Vec<String>,
        rankings: Vec<(Vec<usize>, u64)>,
    ) -> Result<Self, RankingError> {
        let n = objects.len();
        for (k, (order, _)) in rankings.iter().enumerate() {
            let seen: BTreeSet<usize> = order.iter().copied().collect();
            if order.len() != n || seen.len() != n || order.iter().any(|&i| i >= n) {
                return Err(RankingError::NotPermutation { ranking: k + 1 });
            }
        }
        Ok(RankingDataset { objects, rankings })
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    /// Total number of rankings, counting multiplicities.
    pub fn size(&self) -> u64 {
        self.rankings.iter().map(|(_, c)| c).sum()
    }

    /// Every ranking repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Vec<usize>> {
        self.rankings
            .iter()
            .flat_map(|(o, c)| std::iter::repeat_n(o.clone(), *c as usize))
            .collect()
    }

    /// How many rankings put object `a` ahead of object `b`.
    pub fn wins(&self, a: usize, b: usize) -> u64 {
        self.rankings
            .iter()
            .filter(|(o, _)| o.iter().position(|&x| x == a) < o.iter().position(|&x| x == b))
            .map(|(_, c)| c)
            .sum()
    }

    /// Parses one ranking per line, objects comma separated best first,
    /// with an optional `xK` multiplicity. Blank lines and lines starting
    /// with `#` are skipped. Objects are indexed in sorted name order.
    pub fn parse(text: &str) -> Result<Self, RankingError> {
        let mut lines = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (names, count) = match line.rsplit_once(char::is_whitespace) {
                Some((head, tail)) if tail.starts_with('x') => {
                    let count = tail[1..].parse::<u64>().map_err(|_| RankingError::Parse {
                        line: k + 1,
                        message: format!("bad multiplicity `{tail}`"),
                    })?;
                    (head.trim(), count)
                }
                _ => (line, 1),
            };
            let names: Vec<String> = names.split(',').map(|s| s.trim().to_string()).collect();
            if names.iter().any(String::is_empty) {
                return Err(RankingError::Parse {
                    line: k + 1,
                    message: "empty object name".into(),
                });
            }
            lines.push((k + 1, names, count));
        }
        let objects: Vec<String> = match lines.first() {
            Some((_, names, _)) => names
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            None => Vec::new(),
        };
        let mut rankings = Vec::new();
        for (line, names, count) in lines {
            let order: Option<Vec<usize>> = names
                .iter()
                .map(|s| objects.iter().position(|o| o == s))
                .collect();
            let order = order.ok_or(RankingError::NotPermutation { ranking: line })?;
            let distinct: BTreeSet<usize> = order.iter().copied().collect();
            if order.len() != objects.len() || distinct.len() != objects.len() {
                return Err(RankingError::NotPermutation { ranking: line });
            }
            rankings.push((order, count));
        }
        Ok(RankingDataset { objects, rankings })
    }
}

impl fmt::Display for RankingDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (order, count) in &self.rankings {
            let names: Vec<&str> = order.iter().map(|&i| self.objects[i].as_str()).collect();
            writeln!(f, "{} x{count}", names.join(","))?;
        }
        Ok(())
    }
}

/// Rank marginal counts: `counts[j][i]` rankings put object `i` at rank `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountMatrix {
    pub objects: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
}

impl CountMatrix {
    pub fn n(&self) -> usize {
        self.objects.len()
    }

    /// Every row and every column sums to the total.
    pub fn is_consistent(&self) -> bool {
        let n = self.n();
        self.counts.len() == n
            && self
                .counts
                .iter()
                .all(|r| r.len() == n && r.iter().sum::<u64>() == self.total)
            && (0..n).all(|i| self.counts.iter().map(|r| r[i]).sum::<u64>() == self.total)
    }

    /// Header of object names, one row per rank, then `N=<total>`.
    pub fn to_csv(&self) -> String {
        let mut out = self.objects.join(",");
        out.push('\n');
        for row in &self.counts {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out.push_str(&format!("N={}\n", self.total));
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, RankingError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, message: String| RankingError::Parse {
            line: line + 1,
            message,
        };
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(0, "missing header".into()))?;
        let objects: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let n = objects.len();
        let mut counts = Vec::with_capacity(n);
        let mut total = None;
        for (k, line) in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("N=") {
                total = Some(
                    rest.trim()
                        .parse::<u64>()
                        .map_err(|_| err(k, format!("bad total `{rest}`")))?,
                );
                continue;
            }
            if total.is_some() {
                return Err(err(k, "rows after the total line".into()));
            }
            let row: Result<Vec<u64>, _> =
                line.split(',').map(|s| s.trim().parse::<u64>()).collect();
            let row = row.map_err(|_| err(k, format!("bad count row `{line}`")))?;
            if row.len() != n {
                return Err(err(k, format!("expected {n} counts, found {}", row.len())));
            }
            counts.push(row);
        }
        let total = total.ok_or_else(|| err(0, "missing `N=` line".into()))?;
        if counts.len() != n {
            return Err(err(
                0,
                format!("expected {n} rank rows, found {}", counts.len()),
            ));
        }
        let m = CountMatrix {
            objects,
            counts,
            total,
        };
        if !m.is_consistent() {
            return Err(RankingError::InconsistentCounts);
        }
        Ok(m)
    }
}

/// Tallies how often each object takes each rank.
pub fn counts_from_rankings(d: &RankingDataset) -> CountMatrix {
    let n = d.n();
    let mut counts = vec![vec![0u64; n]; n];
    for (order, c) in &d.rankings {
        for (j, &i) in order.iter().enumerate() {
            counts[j][i] += c;
        }
    }
    CountMatrix {
        objects: d.objects.clone(),
        counts,
        total: d.size(),
    }
}

/// Rank marginals: `alpha[i][j]` is the probability that object `i` takes
/// rank `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalMatrix {
    pub objects: Vec<String>,
    pub alpha: Vec<Vec<Rational>>,
}

impl MarginalMatrix {
    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        let n = self.n();
        self.alpha.len() == n
            && self.alpha.iter().all(|r| {
                r.len() == n
                    && r.iter().sum::<Rational>().is_one()
                    && r.iter().all(|x| !x.is_negative())
            })
            && (0..n).all(|j| self.alpha.iter().map(|r| &r[j]).sum::<Rational>().is_one())
    }
}

/// Laplace smoothing with a prior of equivalent size `s` spread evenly over
/// the ranks: `alpha[i][j] = (counts[j][i] + s/n) / (N + s)`.
pub fn smooth_marginals(c: &CountMatrix, s: &Rational) -> Result<MarginalMatrix, RankingError> {
    let n = c.n();
    let denom = int(c.total as i64) + s;
    if n == 0 || !denom.is_positive() || s.is_negative() {
        return Err(RankingError::BadSmoothing(s.clone()));
    }
    let prior = s / int(n as i64);
    let alpha = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (int(c.counts[j][i] as i64) + &prior) / &denom)
                .collect()
        })
        .collect();
    Ok(MarginalMatrix {
        objects: c.objects.clone(),
        alpha,
    })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        let Some(k) = (0..n.saturating_sub(1))
            .rev()
            .find(|&k| current[k] < current[k + 1])
        else {
            return out;
        };
        let l = (k + 1..n)
            .rev()
            .find(|&l| current[k] < current[l])
            .expect("successor exists");
        current.swap(k, l);
        current[k + 1..].reverse();
    }
}

/// Seeded synthetic dataset over objects `o1..on`: each ranking starts from
/// the identity order and, with probability `noise`, is replaced by a
/// uniformly random order.
pub fn synthetic_dataset(n: usize, size: usize, noise: f64, seed: u64) -> RankingDataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let objects = (1..=n).map(|i| format!("o{i}")).collect();
    let mut rankings = Vec::with_capacity(size);
    for _ in 0..size {
        let mut order: Vec<usize> = (0..n).collect();
        if rng.gen_bool(noise.clamp(0.0, 1.0)) {
            order.shuffle(&mut rng);
        }
        rankings.push((order, 1));
    }
    RankingDataset { objects, rankings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    pub(crate) const SAMPLE: &str = "a,b,c x3\na,c,b x5\nb,a,c x2\nb,c,a x4\nc,a,b x3\nc,b,a x1\n";

    #[test]
    fn sample_counts() {
        let d = RankingDataset::parse(SAMPLE).unwrap();
        assert_eq!(d.objects, ["a", "b", "c"]);
        let c = counts_from_rankings(&d);
        assert_eq!(c.counts, vec![vec![8, 6, 4], vec![5, 4, 9], vec![5, 8, 5]]);
        assert_eq!(c.total, 18);
        assert!(c.is_consistent());
        assert_eq!(CountMatrix::parse_csv(&c.to_csv()).unwrap(), c);
    }

    #[test]
    fn sample_smoothing() {
        let c = counts_from_rankings(&RankingDataset::parse(SAMPLE).unwrap());
        let m = smooth_marginals(&c, &int(2)).unwrap();
        assert_eq!(m.alpha[0][0], ratio(13, 30));
        assert!(m.is_doubly_stochastic());
    }

    #[test]
    fn empty_and_single() {
        let c = counts_from_rankings(&RankingDataset::default());
        assert_eq!(c.total, 0);
        assert!(c.counts.is_empty());
        let c = counts_from_rankings(&RankingDataset::parse("a,b").unwrap());
        assert_eq!(c.counts, vec![vec![1, 0], vec![0, 1]]);
        let zero = CountMatrix {
            objects: vec!["a".into(), "b".into()],
            counts: vec![vec![0; 2]; 2],
            total: 0,
        };
        let m = smooth_marginals(&zero, &int(2)).unwrap();
        assert!(m.alpha.iter().flatten().all(|x| *x == ratio(1, 2)));
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(
            RankingDataset::parse("a,b,c\na,b"),
            Err(RankingError::NotPermutation { ranking: 2 })
        ));
        assert!(matches!(
            RankingDataset::parse("a,b,c\na,a,b"),
            Err(RankingError::NotPermutation { .. })
        ));
        assert!(matches!(
            RankingDataset::parse("a,b xq"),
            Err(RankingError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            CountMatrix::parse_csv("a,b\n1,0\n1,1\nN=1"),
            Err(RankingError::InconsistentCounts)
        ));
        assert!(matches!(
            CountMatrix::parse_csv("a,b\n1,0\n0,1\n"),
            Err(RankingError::Parse { .. })
        ));
    }

    #[test]
    fn permutation_listing() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn synthetic_is_seeded() {
        assert_eq!(
            synthetic_dataset(4, 50, 0.3, 7),
            synthetic_dataset(4, 50, 0.3, 7)
        );
        assert_eq!(synthetic_dataset(4, 50, 0.0, 7).wins(0, 3), 50);
    }
}
