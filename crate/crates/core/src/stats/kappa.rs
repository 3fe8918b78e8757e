use super::StatsError;

/// Cohen's κ from a square confusion matrix of label counts.
pub fn cohens_kappa<R: AsRef<[u64]>>(confusion: &[R]) -> Result<f64, StatsError> {
    let k = confusion.len();
    if confusion.iter().any(|r| r.as_ref().len() != k) {
        return Err(StatsError::NotSquare);
    }
    let total: u64 = confusion.iter().flat_map(|r| r.as_ref().iter()).sum();
    if total == 0 {
        return Err(StatsError::EmptyMatrix);
    }
    let n = total as f64;
    let observed = (0..k).map(|i| confusion[i].as_ref()[i]).sum::<u64>() as f64 / n;
    let chance: f64 = (0..k)
        .map(|i| {
            let row: u64 = confusion[i].as_ref().iter().sum();
            let col: u64 = confusion.iter().map(|r| r.as_ref()[i]).sum();
            (row as f64 / n) * (col as f64 / n)
        })
        .sum();
    if (1.0 - chance).abs() < 1e-15 {
        return Err(StatsError::DegenerateChance);
    }
    Ok((observed - chance) / (1.0 - chance))
}
