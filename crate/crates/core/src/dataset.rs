//! Survival data model, CSV ingestion and censoring-stratified sampling.
//!
//! Covariates are stored column-wise as `f64`. Nominal covariates hold the
//! index of their level in the declared level list.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovariateKind {
    Continuous,
    Binary,
    Nominal { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Covariate {
    pub name: String,
    #[serde(flatten)]
    pub kind: CovariateKind,
}

impl Covariate {
    pub fn continuous(name: impl Into<String>) -> Self {
        Covariate { name: name.into(), kind: CovariateKind::Continuous }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Covariate { name: name.into(), kind: CovariateKind::Binary }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        Covariate {
            name: name.into(),
            kind: CovariateKind::Nominal { levels: levels.into_iter().map(Into::into).collect() },
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, CovariateKind::Nominal { .. })
    }

    pub fn levels(&self) -> Option<&[String]> {
        match &self.kind {
            CovariateKind::Nominal { levels } => Some(levels),
            _ => None,
        }
    }

    /// Parse one raw cell into the stored numeric value.
    fn parse(&self, raw: &str) -> std::result::Result<f64, String> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(format!("missing value for `{}`", self.name));
        }
        match &self.kind {
            CovariateKind::Continuous => match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("cannot parse `{raw}` as a number for `{}`", self.name)),
            },
            CovariateKind::Binary => match raw {
                "0" => Ok(0.0),
                "1" => Ok(1.0),
                _ => Err(format!("binary covariate `{}` must be 0 or 1, got `{raw}`", self.name)),
            },
            CovariateKind::Nominal { levels } => levels
                .iter()
                .position(|l| l == raw)
                .map(|p| p as f64)
                .ok_or_else(|| format!("unknown level `{raw}` for `{}`", self.name)),
        }
    }

    fn check_value(&self, v: f64) -> bool {
        match &self.kind {
            CovariateKind::Continuous => v.is_finite(),
            CovariateKind::Binary => v == 0.0 || v == 1.0,
            CovariateKind::Nominal { levels } => v >= 0.0 && v.fract() == 0.0 && (v as usize) < levels.len(),
        }
    }
}

/// Validated, ordered list of covariates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Covariate>", into = "Vec<Covariate>")]
pub struct Schema {
    covariates: Vec<Covariate>,
}

impl Schema {
    pub fn new(covariates: Vec<Covariate>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &covariates {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate covariate name `{}`", c.name)));
            }
            if let CovariateKind::Nominal { levels } = &c.kind {
                if levels.is_empty() {
                    return Err(Error::Schema(format!("nominal covariate `{}` has no levels", c.name)));
                }
                let distinct: HashSet<_> = levels.iter().collect();
                if distinct.len() != levels.len() {
                    return Err(Error::Schema(format!("nominal covariate `{}` repeats a level", c.name)));
                }
            }
        }
        Ok(Schema { covariates })
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }

    pub fn get(&self, j: usize) -> &Covariate {
        &self.covariates[j]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Covariate> {
        self.covariates.iter()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.covariates.iter().position(|c| c.name == name)
    }
}

impl TryFrom<Vec<Covariate>> for Schema {
    type Error = Error;
    fn try_from(v: Vec<Covariate>) -> Result<Self> {
        Schema::new(v)
    }
}

impl From<Schema> for Vec<Covariate> {
    fn from(s: Schema) -> Self {
        s.covariates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRecord {
    pub time: f64,
    pub event: bool,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    schema: Schema,
    time: Vec<f64>,
    event: Vec<bool>,
    columns: Vec<Vec<f64>>,
}

impl SurvivalDataset {
    pub fn new(schema: Schema) -> Self {
        let columns = vec![Vec::new(); schema.len()];
        SurvivalDataset { schema, time: Vec::new(), event: Vec::new(), columns }
    }

    pub fn from_records(schema: Schema, records: impl IntoIterator<Item = SurvivalRecord>) -> Result<Self> {
        let mut d = SurvivalDataset::new(schema);
        for r in records {
            d.push(r)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, record: SurvivalRecord) -> Result<()> {
        let row = self.len() + 1;
        if !(record.time > 0.0 && record.time.is_finite()) {
            return Err(Error::Data { row, message: format!("time must be positive, got {}", record.time) });
        }
        if record.covariates.len() != self.schema.len() {
            return Err(Error::Data {
                row,
                message: format!("expected {} covariates, got {}", self.schema.len(), record.covariates.len()),
            });
        }
        for (j, &v) in record.covariates.iter().enumerate() {
            if !self.schema.get(j).check_value(v) {
                return Err(Error::Data {
                    row,
                    message: format!("invalid value {v} for `{}`", self.schema.get(j).name),
                });
            }
        }
        self.time.push(record.time);
        self.event.push(record.event);
        for (col, v) in self.columns.iter_mut().zip(record.covariates) {
            col.push(v);
        }
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.event.iter().filter(|&&e| e).count()
    }

    pub fn times(&self) -> &[f64] {
        &self.time
    }

    pub fn events(&self) -> &[bool] {
        &self.event
    }

    pub fn time(&self, i: usize) -> f64 {
        self.time[i]
    }

    pub fn event(&self, i: usize) -> bool {
        self.event[i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    pub fn covariates(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn record(&self, i: usize) -> SurvivalRecord {
        SurvivalRecord { time: self.time[i], event: self.event[i], covariates: self.covariates(i) }
    }

    /// Materialize a (multi)set of rows as a new dataset, in index order.
    pub fn subset(&self, rows: &[usize]) -> SurvivalDataset {
        SurvivalDataset {
            schema: self.schema.clone(),
            time: rows.iter().map(|&i| self.time[i]).collect(),
            event: rows.iter().map(|&i| self.event[i]).collect(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
        }
    }

    pub fn all_rows(&self) -> SampleIndex {
        SampleIndex((0..self.len()).collect())
    }

    /// Times and event flags of a row multiset.
    pub fn outcome(&self, rows: &[usize]) -> (Vec<f64>, Vec<bool>) {
        (rows.iter().map(|&i| self.time[i]).collect(), rows.iter().map(|&i| self.event[i]).collect())
    }
}

/// Read a survival dataset from a comma-separated file with a header row.
///
/// Data rows are numbered from 1 in error messages.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, time_col: &str, status_col: &str) -> Result<SurvivalDataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let time_idx = find(time_col)?;
    let status_idx = find(status_col)?;
    let cov_idx = schema.iter().map(|c| find(&c.name)).collect::<Result<Vec<_>>>()?;

    let mut data = SurvivalDataset::new(schema.clone());
    for (r, rec) in reader.records().enumerate() {
        let row = r + 1;
        let rec = rec?;
        let cell = |k: usize| rec.get(k).unwrap_or("").trim();
        let time = cell(time_idx)
            .parse::<f64>()
            .map_err(|_| Error::Data { row, message: format!("cannot parse time `{}`", cell(time_idx)) })?;
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::Data { row, message: format!("time must be positive, got {time}") });
        }
        let event = match cell(status_idx) {
            "1" => true,
            "0" => false,
            other => return Err(Error::Data { row, message: format!("status must be 0 or 1, got `{other}`") }),
        };
        let covariates = schema
            .iter()
            .zip(&cov_idx)
            .map(|(c, &k)| c.parse(cell(k)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|message| Error::Data { row, message })?;
        data.push(SurvivalRecord { time, event, covariates }).map_err(|e| match e {
            Error::Data { message, .. } => Error::Data { row, message },
            other => other,
        })?;
    }
    Ok(data)
}

/// Covariate rows of a comma-separated file; outcome columns, if present,
/// are ignored. Values are stored as in [`SurvivalDataset`].
pub fn load_covariates_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let cov_idx = schema
        .iter()
        .map(|c| headers.iter().position(|h| h.trim() == c.name).ok_or_else(|| Error::MissingColumn(c.name.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let z = schema
            .iter()
            .zip(&cov_idx)
            .map(|(c, &k)| c.parse(rec.get(k).unwrap_or("")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|message| Error::Data { row: r + 1, message })?;
        rows.push(z);
    }
    Ok(rows)
}

/// A multiset of row indices into a parent dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SampleIndex(pub Vec<usize>);

impl SampleIndex {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    /// Multiset union (concatenation).
    pub fn union(&self, other: &SampleIndex) -> SampleIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        SampleIndex(v)
    }
}

impl From<Vec<usize>> for SampleIndex {
    fn from(v: Vec<usize>) -> Self {
        SampleIndex(v)
    }
}

fn split_strata(data: &SurvivalDataset, pool: &[usize]) -> (Vec<usize>, Vec<usize>) {
    pool.iter().partition(|&&i| data.event(i))
}

/// Deal the rows of each censoring stratum round-robin into `k` parts.
///
/// Never fails: a stratum smaller than `k` simply leaves some parts without
/// rows of that stratum. The censored stratum starts dealing where the event
/// stratum stopped so that part sizes differ by at most one overall.
pub fn stratified_partition_in<R: Rng + ?Sized>(
    data: &SurvivalDataset,
    pool: &[usize],
    k: usize,
    rng: &mut R,
) -> Vec<SampleIndex> {
    let (mut ev, mut cens) = split_strata(data, pool);
    ev.shuffle(rng);
    cens.shuffle(rng);
    let mut parts = vec![Vec::new(); k];
    for (j, &i) in ev.iter().enumerate() {
        parts[j % k].push(i);
    }
    let offset = ev.len() % k;
    for (j, &i) in cens.iter().enumerate() {
        parts[(offset + j) % k].push(i);
    }
    parts.into_iter().map(SampleIndex).collect()
}

/// Disjoint, censoring-stratified partition of the whole dataset into `k` parts.
pub fn stratified_partition(data: &SurvivalDataset, k: usize, seed: Seed) -> Result<Vec<SampleIndex>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 parts, got {k}")));
    }
    let pool: Vec<usize> = (0..data.len()).collect();
    let n_ev = data.n_events();
    for available in [n_ev, data.len() - n_ev] {
        if available < k {
            return Err(Error::StratumTooSmall { available, parts: k });
        }
    }
    Ok(stratified_partition_in(data, &pool, k, &mut seed.rng()))
}

/// Split `m` between two strata of sizes `a` and `b` by largest remainder.
/// Ties go to the first stratum.
pub(crate) fn largest_remainder(m: usize, a: usize, b: usize) -> (usize, usize) {
    let n = a + b;
    if n == 0 {
        return (0, 0);
    }
    let (qa, ra) = ((m * a) / n, (m * a) % n);
    let (qb, rb) = ((m * b) / n, (m * b) % n);
    match m - qa - qb {
        0 => (qa, qb),
        _ if ra >= rb => (qa + 1, qb),
        _ => (qa, qb + 1),
    }
}

/// Bootstrap of size `m` from `pool`, drawn with replacement separately
/// inside each censoring stratum with quotas matching the pool proportions.
pub fn stratified_bootstrap_in<R: Rng + ?Sized>(
    data: &SurvivalDataset,
    pool: &[usize],
    m: usize,
    rng: &mut R,
) -> Result<SampleIndex> {
    let (ev, cens) = split_strata(data, pool);
    let (q_ev, q_cens) = largest_remainder(m, ev.len(), cens.len());
    let mut out = Vec::with_capacity(m);
    for (stratum, quota) in [(&ev, q_ev), (&cens, q_cens)] {
        if quota > 0 && stratum.is_empty() {
            return Err(Error::InvalidArgument("empty stratum with positive quota".into()));
        }
        for _ in 0..quota {
            out.push(stratum[rng.random_range(0..stratum.len())]);
        }
    }
    Ok(SampleIndex(out))
}

pub fn stratified_bootstrap(pool: &SampleIndex, data: &SurvivalDataset, m: usize, seed: Seed) -> Result<SampleIndex> {
    if m == 0 {
        return Err(Error::InvalidArgument("bootstrap size must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::InvalidArgument("empty bootstrap pool".into()));
    }
    stratified_bootstrap_in(data, pool.as_slice(), m, &mut seed.rng())
}

/// Distinct rows of `pool` that never appear in `drawn`, in pool order.
pub fn out_of_bag(pool: &SampleIndex, drawn: &SampleIndex) -> SampleIndex {
    let drawn: HashSet<usize> = drawn.iter().copied().collect();
    let mut seen = HashSet::new();
    SampleIndex(pool.iter().copied().filter(|i| !drawn.contains(i) && seen.insert(*i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn schema() -> Schema {
        Schema::new(vec![
            Covariate::continuous("age"),
            Covariate::binary("sex"),
            Covariate::nominal("site", ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J"]),
        ])
        .unwrap()
    }

    fn write_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn toy(n_ev: usize, n_cens: usize) -> SurvivalDataset {
        let s = Schema::new(vec![Covariate::continuous("x")]).unwrap();
        let recs = (0..n_ev + n_cens).map(|i| SurvivalRecord {
            time: 1.0 + i as f64,
            event: i < n_ev,
            covariates: vec![i as f64],
        });
        SurvivalDataset::from_records(s, recs).unwrap()
    }

    #[test]
    fn loads_valid_file() {
        let f = write_csv("time,status,age,sex,site\n1.5,1,40,0,A\n2,0,51.5,1,J\n3,1,60,1,C\n");
        let d = load_csv(f.path(), &schema(), "time", "status").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.n_events(), 2);
        assert_eq!(d.value(1, 0), 51.5);
        assert_eq!(d.value(2, 2), 2.0);
    }

    #[test]
    fn rejects_nonpositive_time_with_row() {
        let f = write_csv("time,status,age,sex,site\n1,1,40,0,A\n0,0,51,1,B\n");
        let err = load_csv(f.path(), &schema(), "time", "status").unwrap_err();
        assert!(matches!(err, Error::Data { row: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_level() {
        let f = write_csv("time,status,age,sex,site\n1,1,40,0,Z\n");
        let err = load_csv(f.path(), &schema(), "time", "status").unwrap_err();
        assert!(err.to_string().contains("`Z`"), "{err}");
    }

    #[test]
    fn rejects_missing_column_and_value() {
        let f = write_csv("time,age,sex,site\n1,40,0,A\n");
        let err = load_csv(f.path(), &schema(), "time", "status").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "status"));
        let f = write_csv("time,status,age,sex,site\n1,1,,0,A\n");
        assert!(load_csv(f.path(), &schema(), "time", "status").is_err());
    }

    #[test]
    fn schema_validation() {
        assert!(Schema::new(vec![Covariate::binary("a"), Covariate::continuous("a")]).is_err());
        assert!(Schema::new(vec![Covariate::nominal("a", Vec::<String>::new())]).is_err());
        assert!(Schema::new(vec![Covariate::nominal("a", ["x", "x"])]).is_err());
    }

    #[test]
    fn partition_balances_strata() {
        let d = toy(6, 6);
        let parts = stratified_partition(&d, 3, Seed(1)).unwrap();
        for p in &parts {
            let ev = p.iter().filter(|&&i| d.event(i)).count();
            assert_eq!(ev, 2);
            assert_eq!(p.len() - ev, 2);
        }
        assert_eq!(parts, stratified_partition(&d, 3, Seed(1)).unwrap());
        assert!(matches!(stratified_partition(&toy(2, 10), 3, Seed(1)), Err(Error::StratumTooSmall { .. })));
    }

    #[test]
    fn bootstrap_quotas() {
        let d = toy(5, 5);
        let pool = d.all_rows();
        for s in 0..20 {
            let b = stratified_bootstrap(&pool, &d, 10, Seed(s)).unwrap();
            assert_eq!(b.iter().filter(|&&i| d.event(i)).count(), 5);
        }
        assert!(stratified_bootstrap(&pool, &d, 0, Seed(0)).is_err());
        let single = SampleIndex(vec![0]);
        assert_eq!(stratified_bootstrap(&single, &d, 3, Seed(0)).unwrap().0, vec![0, 0, 0]);
    }

    #[test]
    fn oob_set_difference() {
        let p = SampleIndex(vec![1, 2, 3]);
        assert_eq!(out_of_bag(&p, &SampleIndex(vec![2, 2, 3])).0, vec![1]);
        assert!(out_of_bag(&p, &SampleIndex(vec![3, 1, 2, 9])).is_empty());
        assert_eq!(out_of_bag(&p, &SampleIndex(vec![7])).0, vec![1, 2, 3]);
    }

    proptest! {
        #[test]
        fn partition_is_disjoint_cover(n_ev in 3usize..40, n_cens in 3usize..40, k in 2usize..4, seed in any::<u64>()) {
            let d = toy(n_ev, n_cens);
            let parts = stratified_partition(&d, k, Seed(seed)).unwrap();
            let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..d.len()).collect::<Vec<_>>());
            let sizes: Vec<usize> = parts.iter().map(|p| p.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }

        #[test]
        fn bootstrap_size_and_proportion(n_ev in 1usize..30, n_cens in 1usize..30, m in 1usize..100, seed in any::<u64>()) {
            let d = toy(n_ev, n_cens);
            let b = stratified_bootstrap(&d.all_rows(), &d, m, Seed(seed)).unwrap();
            prop_assert_eq!(b.len(), m);
            let ev = b.iter().filter(|&&i| d.event(i)).count() as f64;
            let p = n_ev as f64 / (n_ev + n_cens) as f64;
            prop_assert!((ev / m as f64 - p).abs() < 1.0 / m as f64);
        }
    }
}
