use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use thiserror::Error;

use super::prompt::FewShotExample;
use super::verdict::{parse_verdict, VerdictKind};
use crate::seed::rng_for;

#[derive(Debug, Error)]
pub enum FewShotError {
    #[error("few-shot pool has {available} examples, {requested} requested")]
    PoolTooSmall { requested: usize, available: usize },
    #[error("line {line}: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: expected verdict {expected:?} is neither AGREE nor DISAGREE")]
    BadExpected { line: usize, expected: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `k` distinct examples drawn without replacement, in draw order.
pub fn select_few_shot(pool: &[FewShotExample], k: usize, seed: u64) -> Result<Vec<FewShotExample>, FewShotError> {
    if k > pool.len() {
        return Err(FewShotError::PoolTooSmall { requested: k, available: pool.len() });
    }
    let mut rng = rng_for(seed, "few-shot");
    Ok(rand::seq::index::sample(&mut rng, pool.len(), k).into_iter().map(|i| pool[i].clone()).collect())
}

/// Reads one [`FewShotExample`] per non-blank line.
pub fn load_few_shot_pool<R: BufRead>(reader: R) -> Result<Vec<FewShotExample>, FewShotError> {
    let mut pool = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let example: FewShotExample =
            serde_json::from_str(&line).map_err(|e| FewShotError::Malformed { line: i + 1, detail: e.to_string() })?;
        if parse_verdict(&example.expected).kind == VerdictKind::Unparseable {
            return Err(FewShotError::BadExpected { line: i + 1, expected: example.expected });
        }
        pool.push(example);
    }
    Ok(pool)
}

pub fn load_few_shot_path(path: &Path) -> Result<Vec<FewShotExample>, FewShotError> {
    load_few_shot_pool(io::BufReader::new(fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn pool(n: usize) -> Vec<FewShotExample> {
        (0..n)
            .map(|i| FewShotExample {
                question: format!("q{i}"),
                mention: format!("m{i}"),
                candidate: format!("c{i}"),
                expected: if i % 2 == 0 { "AGREE".into() } else { "DISAGREE mesh:D000001".into() },
            })
            .collect()
    }

    #[test]
    fn five_distinct_from_twenty() {
        let picked = select_few_shot(&pool(20), 5, 7).unwrap();
        assert_eq!(picked.len(), 5);
        assert_eq!(picked.iter().map(|e| &e.question).collect::<HashSet<_>>().len(), 5);
    }

    #[test]
    fn zero_and_determinism() {
        assert!(select_few_shot(&pool(20), 0, 1).unwrap().is_empty());
        assert_eq!(select_few_shot(&pool(20), 3, 9).unwrap(), select_few_shot(&pool(20), 3, 9).unwrap());
    }

    #[test]
    fn pool_too_small_reports_counts() {
        let err = select_few_shot(&pool(2), 3, 0).unwrap_err();
        assert!(matches!(err, FewShotError::PoolTooSmall { requested: 3, available: 2 }));
    }

    #[test]
    fn loader_validates_expected() {
        let good: String = pool(3).iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
        assert_eq!(load_few_shot_pool(good.as_bytes()).unwrap(), pool(3));
        let bad = r#"{"question":"q","mention":"m","candidate":"c","expected":"maybe"}"#;
        assert!(matches!(load_few_shot_pool(bad.as_bytes()).unwrap_err(), FewShotError::BadExpected { line: 1, .. }));
    }
}
