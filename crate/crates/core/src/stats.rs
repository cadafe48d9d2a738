//! Group summaries and one-way ANOVA over tables of fitted parameters.

use crate::error::{Error, Result};
use crate::specialfn::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Body,
    Anterior,
    Posterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Circumferential,
    Radial,
    Vertical,
}

pub const REGIONS: [Region; 3] = [Region::Body, Region::Anterior, Region::Posterior];
pub const DIRECTIONS: [Direction; 3] = [
    Direction::Circumferential,
    Direction::Radial,
    Direction::Vertical,
];

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Body => "body",
            Region::Anterior => "anterior",
            Region::Posterior => "posterior",
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "body" => Ok(Region::Body),
            "anterior" => Ok(Region::Anterior),
            "posterior" => Ok(Region::Posterior),
            _ => Err(Error::UnknownName {
                kind: "region",
                name: s.to_string(),
                choices: "body, anterior, posterior",
            }),
        }
    }
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Circumferential => "circumferential",
            Direction::Radial => "radial",
            Direction::Vertical => "vertical",
        }
    }
}

/// One fitted sample. Region and direction are encoded in the sample id:
/// after stripping any trailing replicate digits, the last two characters
/// are a region letter (B, A, P) and a direction letter (C, R, V).
#[derive(Debug, Clone)]
pub struct ParameterRow {
    pub sample_id: String,
    pub region: Region,
    pub direction: Direction,
    pub m: f64,
    pub beta: f64,
    pub lambda_beta: f64,
    pub rms: f64,
}

impl ParameterRow {
    pub fn parse(sample_id: &str, m: f64, beta: f64, lambda_beta: f64, rms: f64) -> Result<Self> {
        let trimmed = sample_id.trim_end_matches(|c: char| c.is_ascii_digit());
        let mut tail = trimmed.chars().rev();
        let (dir_ch, reg_ch) = match (tail.next(), tail.next()) {
            (Some(d), Some(r)) => (d, r),
            _ => {
                return Err(Error::BadData(format!(
                    "sample id '{sample_id}' too short to carry a region/direction suffix"
                )))
            }
        };
        let region = match reg_ch.to_ascii_uppercase() {
            'B' => Region::Body,
            'A' => Region::Anterior,
            'P' => Region::Posterior,
            other => {
                return Err(Error::BadData(format!(
                    "sample id '{sample_id}': unknown region code '{other}' (expect B, A or P)"
                )))
            }
        };
        let direction = match dir_ch.to_ascii_uppercase() {
            'C' => Direction::Circumferential,
            'R' => Direction::Radial,
            'V' => Direction::Vertical,
            other => {
                return Err(Error::BadData(format!(
                    "sample id '{sample_id}': unknown direction code '{other}' (expect C, R or V)"
                )))
            }
        };
        Ok(ParameterRow {
            sample_id: sample_id.to_string(),
            region,
            direction,
            m,
            beta,
            lambda_beta,
            rms,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamField {
    M,
    Beta,
    LambdaBeta,
    Rms,
}

impl ParamField {
    pub fn value(self, row: &ParameterRow) -> f64 {
        match self {
            ParamField::M => row.m,
            ParamField::Beta => row.beta,
            ParamField::LambdaBeta => row.lambda_beta,
            ParamField::Rms => row.rms,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParamField::M => "M",
            ParamField::Beta => "beta",
            ParamField::LambdaBeta => "lambda_beta",
            ParamField::Rms => "rms",
        }
    }
}

impl std::str::FromStr for ParamField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(ParamField::M),
            "beta" => Ok(ParamField::Beta),
            "lambda_beta" => Ok(ParamField::LambdaBeta),
            "rms" => Ok(ParamField::Rms),
            _ => Err(Error::UnknownName {
                kind: "field",
                name: s.to_string(),
                choices: "M, beta, lambda_beta, rms",
            }),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParameterTable {
    rows: Vec<ParameterRow>,
}

impl ParameterTable {
    pub fn new() -> Self {
        ParameterTable { rows: Vec::new() }
    }

    pub fn from_rows(rows: Vec<ParameterRow>) -> Self {
        ParameterTable { rows }
    }

    pub fn push(&mut self, row: ParameterRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[ParameterRow] {
        &self.rows
    }

    pub fn rows_in(&self, region: Region, direction: Direction) -> Vec<&ParameterRow> {
        self.rows
            .iter()
            .filter(|r| r.region == region && r.direction == direction)
            .collect()
    }

    /// Non-empty direction groups within one region, in fixed direction order.
    pub fn direction_groups(
        &self,
        region: Region,
        field: ParamField,
    ) -> Vec<(Direction, Vec<f64>)> {
        DIRECTIONS
            .iter()
            .filter_map(|&d| {
                let vals: Vec<f64> = self
                    .rows_in(region, d)
                    .iter()
                    .map(|r| field.value(r))
                    .collect();
                if vals.is_empty() {
                    None
                } else {
                    Some((d, vals))
                }
            })
            .collect()
    }
}

/// Sample mean and sample standard deviation (n-1 denominator; 0 for n = 1).
pub fn mean_sd(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::BadData("empty group".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Region,
    Direction,
    RegionDirection,
}

#[derive(Debug, Clone)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// true for single-element groups, whose SD is 0 by convention
    pub single: bool,
}

/// Mean and SD of one field per group, groups in fixed enum order,
/// empty groups omitted.
pub fn group_summary(
    table: &ParameterTable,
    field: ParamField,
    by: GroupBy,
) -> Result<Vec<GroupSummary>> {
    if table.rows().is_empty() {
        return Err(Error::BadData("parameter table has no rows".into()));
    }
    let mut keys: Vec<(Option<Region>, Option<Direction>, String)> = Vec::new();
    match by {
        GroupBy::Region => {
            for &r in &REGIONS {
                keys.push((Some(r), None, r.as_str().to_string()));
            }
        }
        GroupBy::Direction => {
            for &d in &DIRECTIONS {
                keys.push((None, Some(d), d.as_str().to_string()));
            }
        }
        GroupBy::RegionDirection => {
            for &r in &REGIONS {
                for &d in &DIRECTIONS {
                    keys.push((Some(r), Some(d), format!("{} {}", r.as_str(), d.as_str())));
                }
            }
        }
    }
    let mut out = Vec::new();
    for (reg, dir, label) in keys {
        let vals: Vec<f64> = table
            .rows()
            .iter()
            .filter(|row| reg.is_none_or(|r| row.region == r))
            .filter(|row| dir.is_none_or(|d| row.direction == d))
            .map(|row| field.value(row))
            .collect();
        if vals.is_empty() {
            continue;
        }
        let (mean, sd) = mean_sd(&vals)?;
        out.push(GroupSummary {
            label,
            n: vals.len(),
            mean,
            sd,
            single: vals.len() == 1,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub d1: usize,
    pub d2: usize,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// Classical one-way ANOVA across two or more groups of observations.
pub fn anova_one_way(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "groups",
            value: k as f64,
            reason: "need at least two groups",
        });
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::BadData("empty group".into()));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    if n <= k {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "total observations must exceed the group count",
        });
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand) * (mean - grand);
        ss_within += g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    }
    let d1 = k - 1;
    let d2 = n - k;
    if ss_within == 0.0 {
        if ss_between == 0.0 {
            return Err(Error::Undefined {
                what: "ANOVA F statistic (zero variance within and between groups)",
                value: f64::NAN,
            });
        }
        // perfect separation with no within-group spread
        return Ok(AnovaResult {
            f: f64::INFINITY,
            p: 0.0,
            d1,
            d2,
            ss_between,
            ss_within,
        });
    }
    let f = (ss_between / d1 as f64) / (ss_within / d2 as f64);
    let p = f_distribution_sf(f, d1 as f64, d2 as f64)?;
    Ok(AnovaResult {
        f,
        p,
        d1,
        d2,
        ss_between,
        ss_within,
    })
}

/// Upper-tail probability P(X > f) for an F(d1, d2) variate, through the
/// regularized incomplete beta function.
pub fn f_distribution_sf(f: f64, d1: f64, d2: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "f",
            value: f,
            reason: "F statistic must be non-negative",
        });
    }
    if !(d1 >= 1.0) || !d1.is_finite() {
        return Err(Error::InvalidParameter {
            name: "d1",
            value: d1,
            reason: "degrees of freedom must be at least 1",
        });
    }
    if !(d2 >= 1.0) || !d2.is_finite() {
        return Err(Error::InvalidParameter {
            name: "d2",
            value: d2,
            reason: "degrees of freedom must be at least 1",
        });
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    // P(X > f) = I_x(d2/2, d1/2) with x = d2 / (d2 + d1 f): the upper tail
    // directly, no 1 - CDF cancellation.
    let x = d2 / (d2 + d1 * f);
    inc_beta_reg(0.5 * d2, 0.5 * d1, x)
}

/// Regularized incomplete beta I_x(a, b) by continued fraction, with the
/// symmetry I_x(a,b) = 1 - I_{1-x}(b,a) keeping the fraction in its fast
/// region.
fn inc_beta_reg(a: f64, b: f64, x: f64) -> Result<f64> {
    debug_assert!((0.0..=1.0).contains(&x));
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let (lga, _) = ln_gamma(a)?;
    let (lgb, _) = ln_gamma(b)?;
    let (lgab, _) = ln_gamma(a + b)?;
    let ln_front = a * x.ln() + b * (-x).ln_1p() + lgab - lga - lgb;
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cont_frac(a, b, x)? / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cont_frac(b, a, 1.0 - x)? / b)
    }
}

/// Continued fraction for the incomplete beta (modified Lentz iteration).
fn beta_cont_frac(a: f64, b: f64, x: f64) -> Result<f64> {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 3e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300usize {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let num = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + num * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + num / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let num = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + num * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + num / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "regularized incomplete beta",
        detail: format!("continued fraction stalled at a={a}, b={b}, x={x}"),
    })
}

#[derive(Debug, Clone)]
pub struct OutlierSplit {
    pub kept: Vec<f64>,
    /// indices into the input slice, ascending
    pub excluded: Vec<usize>,
}

/// Boxplot-whisker outlier rule: drop points beyond 1.5 IQR outside the
/// quartiles, quartiles by midpoint interpolation. Fewer than four points
/// are always kept (quartiles are not meaningful there).
pub fn exclude_outliers_iqr(xs: &[f64]) -> OutlierSplit {
    if xs.len() < 4 {
        return OutlierSplit {
            kept: xs.to_vec(),
            excluded: Vec::new(),
        };
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let q1 = quantile_midpoint(&sorted, 0.25);
    let q3 = quantile_midpoint(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo = q1 - 1.5 * iqr;
    let hi = q3 + 1.5 * iqr;
    let mut kept = Vec::with_capacity(xs.len());
    let mut excluded = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        if x < lo || x > hi {
            excluded.push(i);
        } else {
            kept.push(x);
        }
    }
    OutlierSplit { kept, excluded }
}

/// Quantile of pre-sorted data with sample points at (k - 0.5)/n.
fn quantile_midpoint(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = q * n as f64 + 0.5;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let k = h.floor() as usize; // 1-based lower sample point
    let frac = h - k as f64;
    sorted[k - 1] + frac * (sorted[k] - sorted[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    // (sample, M x 1e5 Pa, beta, lambda_beta x 1e-12, rms x 1e-5)
    const FIXTURE: &[(&str, f64, f64, f64, f64)] = &[
        ("TK11BC", 1.27, 0.73, 2.95, 1.42),
        ("TK11BR", 0.71, 0.59, 1.48, 1.61),
        ("TK11BV", 0.83, 0.53, 1.56, 1.74),
        ("TK16BC1", 0.76, 0.70, 2.13, 1.39),
        ("TK16BR2", 0.82, 0.59, 0.89, 1.30),
        ("TK16BV", 0.62, 0.59, 0.85, 1.48),
        ("TK16AC", 0.60, 0.63, 0.97, 1.97),
        ("TK16AR1", 0.85, 0.58, 1.01, 2.02),
        ("TK16AV", 0.57, 0.50, 0.37, 1.63),
        ("TK16BC2", 0.90, 0.76, 4.28, 1.53),
        ("TK16BR1", 0.55, 0.64, 0.91, 1.83),
        ("TK16BV2", 0.61, 0.63, 0.93, 1.56),
        ("TK16PV", 1.41, 0.75, 1.99, 1.40),
        ("TK17BC", 0.10, 0.73, 1.03, 2.58),
        ("TK17BR", 0.41, 0.72, 1.36, 1.55),
        ("TK17BV", 0.86, 0.54, 0.90, 1.31),
        ("TK17AC", 1.87, 0.79, 4.96, 1.49),
        ("TK17AR", 1.94, 0.76, 3.05, 1.44),
        ("TK18BC", 1.34, 0.74, 141.03, 3.81),
        ("TK18BR", 0.66, 0.72, 1.90, 1.78),
        ("TK18BV", 0.68, 0.61, 1.07, 1.63),
        ("TK22BR", 2.54, 0.49, 85.2, 9.90),
        ("TK22AC", 0.65, 0.62, 1.40, 2.68),
        ("TK22AR", 1.60, 0.41, 2.24, 4.69),
        ("TK22AV", 0.76, 0.51, 0.35, 1.42),
        ("TK36BC", 0.74, 0.73, 4.40, 2.11),
        ("TK37BC", 0.90, 0.74, 6.63, 3.53),
        ("TK37BR", 0.67, 0.59, 0.96, 1.93),
        ("TK37BV", 0.49, 0.53, 0.55, 1.33),
    ];

    fn fixture_table() -> ParameterTable {
        let rows = FIXTURE
            .iter()
            .map(|&(id, m, beta, lambda, rms)| {
                ParameterRow::parse(id, m * 1e5, beta, lambda * 1e-12, rms * 1e-5).unwrap()
            })
            .collect();
        ParameterTable::from_rows(rows)
    }

    #[test]
    fn sample_id_suffix_parses_region_and_direction() {
        let row = ParameterRow::parse("TK11BC", 1.0, 0.5, 1.0, 0.1).unwrap();
        assert_eq!(row.region, Region::Body);
        assert_eq!(row.direction, Direction::Circumferential);
        // trailing replicate digits are stripped before reading the suffix
        let row = ParameterRow::parse("TK16BC1", 1.0, 0.5, 1.0, 0.1).unwrap();
        assert_eq!(row.region, Region::Body);
        assert_eq!(row.direction, Direction::Circumferential);
        let row = ParameterRow::parse("TK16AR1", 1.0, 0.5, 1.0, 0.1).unwrap();
        assert_eq!(row.region, Region::Anterior);
        assert_eq!(row.direction, Direction::Radial);
        let row = ParameterRow::parse("TK16PV", 1.0, 0.5, 1.0, 0.1).unwrap();
        assert_eq!(row.region, Region::Posterior);
        assert_eq!(row.direction, Direction::Vertical);

        assert!(ParameterRow::parse("X", 1.0, 0.5, 1.0, 0.1).is_err());
        assert!(ParameterRow::parse("1234", 1.0, 0.5, 1.0, 0.1).is_err());
        assert!(ParameterRow::parse("TKXQ", 1.0, 0.5, 1.0, 0.1).is_err());
        assert!(ParameterRow::parse("TK11BX", 1.0, 0.5, 1.0, 0.1).is_err());
    }

    #[test]
    fn fixture_parses_and_groups() {
        let table = fixture_table();
        assert_eq!(table.rows().len(), 29);
        assert_eq!(table.rows_in(Region::Body, Direction::Vertical).len(), 6);
        assert_eq!(table.rows_in(Region::Posterior, Direction::Vertical).len(), 1);
        let groups = table.direction_groups(Region::Body, ParamField::Beta);
        assert_eq!(groups.len(), 3);
        assert_eq!(groups[0].0, Direction::Circumferential);
        assert_eq!(groups[0].1.len(), 7);
        // posterior has only a vertical sample: other directions are omitted
        let groups = table.direction_groups(Region::Posterior, ParamField::Beta);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].0, Direction::Vertical);
    }

    #[test]
    fn mean_sd_exact_on_known_moments() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let (mean, sd) = mean_sd(&xs).unwrap();
        assert!((mean - 5.0).abs() < 1e-15);
        assert!((sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!(mean_sd(&[]).is_err());
        let (mean, sd) = mean_sd(&[3.25]).unwrap();
        assert_eq!(mean, 3.25);
        assert_eq!(sd, 0.0);
    }

    #[test]
    fn group_summary_flags_singles_and_errors_on_empty_table() {
        let table = fixture_table();
        let sums = group_summary(&table, ParamField::Beta, GroupBy::RegionDirection).unwrap();
        // 7 non-empty (region, direction) pairs: 3 body, 3 anterior, 1 posterior
        assert_eq!(sums.len(), 7);
        let pv = sums.iter().find(|s| s.label == "posterior vertical").unwrap();
        assert!(pv.single);
        assert_eq!(pv.n, 1);
        assert_eq!(pv.sd, 0.0);
        assert!((pv.mean - 0.75).abs() < 1e-15);
        assert!(group_summary(&ParameterTable::new(), ParamField::M, GroupBy::Region).is_err());
    }

    #[test]
    fn body_vertical_beta_summary() {
        let table = fixture_table();
        let betas: Vec<f64> = table
            .rows_in(Region::Body, Direction::Vertical)
            .iter()
            .map(|r| r.beta)
            .collect();
        // full group of six
        let (mean, sd) = mean_sd(&betas).unwrap();
        assert!((mean - 0.5716666666666667).abs() < 1e-12);
        assert!((sd - 0.044).abs() < 5e-4);
        // the reference summary row (0.58, 0.04) corresponds to dropping one
        // of the two 0.53 samples; our IQR rule keeps all six, so the
        // five-sample variant is pinned directly
        let mut subset = betas.clone();
        let drop_at = subset.iter().position(|&b| b == 0.53).unwrap();
        subset.remove(drop_at);
        let (mean, sd) = mean_sd(&subset).unwrap();
        assert!((mean - 0.58).abs() < 5e-3);
        assert!((sd - 0.04).abs() < 5e-3);
    }

    #[test]
    fn anova_textbook_fixture() {
        let groups = vec![
            vec![6.0, 8.0, 4.0, 5.0, 3.0, 4.0],
            vec![8.0, 12.0, 9.0, 11.0, 6.0, 8.0],
            vec![13.0, 9.0, 11.0, 8.0, 7.0, 12.0],
        ];
        let res = anova_one_way(&groups).unwrap();
        assert_eq!(res.d1, 2);
        assert_eq!(res.d2, 15);
        assert!((res.ss_between - 84.0).abs() < 1e-10);
        assert!((res.ss_within - 68.0).abs() < 1e-10);
        // F = (84/2)/(68/15) = 630/68
        assert!((res.f - 630.0 / 68.0).abs() < 1e-12);
        assert!((res.p - 0.0024).abs() < 1e-3);
        // frozen high-precision value for this fixture
        assert!((res.p - 0.00239877732939).abs() < 1e-9);
    }

    #[test]
    fn anova_identical_groups_and_degenerate_input() {
        let g = vec![1.0, 2.0, 3.0];
        let res = anova_one_way(&[g.clone(), g.clone(), g.clone()]).unwrap();
        assert_eq!(res.f, 0.0);
        assert_eq!(res.p, 1.0);

        // all values identical: F is 0/0, reported as an error
        let c = vec![5.0, 5.0, 5.0];
        assert!(anova_one_way(&[c.clone(), c.clone()]).is_err());
        // no within spread but separated means: infinite F, p = 0
        let res = anova_one_way(&[vec![1.0, 1.0], vec![2.0, 2.0, 2.0]]).unwrap();
        assert!(res.f.is_infinite());
        assert_eq!(res.p, 0.0);

        assert!(anova_one_way(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_one_way(&[vec![1.0], vec![]]).is_err());
        assert!(anova_one_way(&[vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn anova_shift_and_scale_invariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(40);
        for _ in 0..30 {
            let k = rng.gen_range(2..=5);
            let groups: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let n = rng.gen_range(3..=8);
                    (0..n).map(|_| rng.gen_range(-4.0..10.0)).collect()
                })
                .collect();
            let base = anova_one_way(&groups).unwrap();
            for shift in [-7.3, 1.0e4] {
                let shifted: Vec<Vec<f64>> = groups
                    .iter()
                    .map(|g| g.iter().map(|x| x + shift).collect())
                    .collect();
                let res = anova_one_way(&shifted).unwrap();
                assert!((res.f - base.f).abs() <= 1e-6 * (1.0 + base.f));
                assert!((res.p - base.p).abs() <= 1e-6);
            }
            for scale in [0.013, 275.0] {
                let scaled: Vec<Vec<f64>> = groups
                    .iter()
                    .map(|g| g.iter().map(|x| x * scale).collect())
                    .collect();
                let res = anova_one_way(&scaled).unwrap();
                assert!((res.f - base.f).abs() <= 1e-9 * (1.0 + base.f));
                assert!((res.p - base.p).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn two_group_anova_equals_t_squared() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        for _ in 0..25 {
            let n1 = rng.gen_range(3..=9);
            let n2 = rng.gen_range(3..=9);
            let g1: Vec<f64> = (0..n1).map(|_| rng.gen_range(0.0..5.0)).collect();
            let g2: Vec<f64> = (0..n2).map(|_| rng.gen_range(1.0..6.0)).collect();
            let res = anova_one_way(&[g1.clone(), g2.clone()]).unwrap();
            let (m1, s1) = mean_sd(&g1).unwrap();
            let (m2, s2) = mean_sd(&g2).unwrap();
            let pooled = (((n1 - 1) as f64) * s1 * s1 + ((n2 - 1) as f64) * s2 * s2)
                / ((n1 + n2 - 2) as f64);
            let t = (m1 - m2) / (pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
            assert!((res.f - t * t).abs() <= 1e-10 * t.powi(2).max(1.0));
        }
    }

    #[test]
    fn permutation_of_labels_destroys_separation() {
        use rand::seq::SliceRandom;
        let pooled: Vec<f64> = [
            6.0, 8.0, 4.0, 5.0, 3.0, 4.0, 8.0, 12.0, 9.0, 11.0, 6.0, 8.0, 13.0, 9.0, 11.0, 8.0,
            7.0, 12.0,
        ]
        .to_vec();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let reps = 400;
        let mut above = 0usize;
        for _ in 0..reps {
            let mut data = pooled.clone();
            data.shuffle(&mut rng);
            let groups = vec![
                data[0..6].to_vec(),
                data[6..12].to_vec(),
                data[12..18].to_vec(),
            ];
            if anova_one_way(&groups).unwrap().p > 0.05 {
                above += 1;
            }
        }
        assert!(
            above as f64 >= 0.95 * reps as f64,
            "only {above}/{reps} shuffles lost significance"
        );
    }

    #[test]
    fn f_sf_matches_series_oracle() {
        // independent check: power series for the incomplete beta,
        // sum_n c_n x^(a+n)/(a+n) with c_n = c_(n-1) (n-b)/n
        fn inc_beta_series(a: f64, b: f64, x: f64) -> f64 {
            if x > 0.75 {
                return 1.0 - inc_beta_series(b, a, 1.0 - x);
            }
            let (lga, _) = ln_gamma(a).unwrap();
            let (lgb, _) = ln_gamma(b).unwrap();
            let (lgab, _) = ln_gamma(a + b).unwrap();
            let ln_b = lga + lgb - lgab;
            let mut c = 1.0;
            let mut sum = 1.0 / a;
            for n in 1..100000 {
                let nf = n as f64;
                c *= (nf - b) / nf * x;
                let term = c / (a + nf);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            (a * x.ln() - ln_b).exp() * sum
        }
        let cases = [
            (1.0, 1.0, 0.5),
            (1.0, 1.0, 3.0),
            (2.0, 15.0, 9.264705882352942),
            (2.0, 15.0, 0.1),
            (3.0, 7.0, 2.2),
            (5.0, 20.0, 1.0),
            (10.0, 2.0, 4.0),
            (7.0, 3.0, 30.0),
            (1.0, 30.0, 100.0),
            (4.0, 9.0, 0.37),
        ];
        for &(d1, d2, f) in &cases {
            let ours = f_distribution_sf(f, d1, d2).unwrap();
            let x = d2 / (d2 + d1 * f);
            let oracle = inc_beta_series(0.5 * d2, 0.5 * d1, x);
            assert!(
                (ours - oracle).abs() <= 1e-8,
                "sf({f}, {d1}, {d2}) = {ours} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn f_sf_limits_and_domain() {
        assert_eq!(f_distribution_sf(0.0, 2.0, 15.0).unwrap(), 1.0);
        assert_eq!(f_distribution_sf(f64::INFINITY, 2.0, 15.0).unwrap(), 0.0);
        let p = f_distribution_sf(1e9, 2.0, 15.0).unwrap();
        assert!(p > 0.0 && p < 1e-12);
        assert!(f_distribution_sf(-1.0, 2.0, 15.0).is_err());
        assert!(f_distribution_sf(1.0, 0.5, 15.0).is_err());
        assert!(f_distribution_sf(1.0, 2.0, 0.0).is_err());
        assert!(f_distribution_sf(f64::NAN, 2.0, 15.0).is_err());
    }

    #[test]
    fn iqr_rule_flags_extreme_permeability() {
        // body radial permeability column of the fixture
        let lam = [1.48, 0.89, 0.91, 1.36, 1.90, 85.2, 0.96];
        let split = exclude_outliers_iqr(&lam);
        assert_eq!(split.excluded, vec![5]);
        assert_eq!(split.kept.len(), 6);
        // body circumferential permeability: the 141.03 entry goes
        let lam = [2.95, 2.13, 4.28, 1.03, 141.03, 4.40, 6.63];
        let split = exclude_outliers_iqr(&lam);
        assert_eq!(split.excluded, vec![4]);
        // tight cluster: nothing flagged
        let split = exclude_outliers_iqr(&[0.53, 0.59, 0.63, 0.54, 0.61, 0.53]);
        assert!(split.excluded.is_empty());
        // fewer than four points: always kept
        let split = exclude_outliers_iqr(&[1.0, 100.0, 1.0]);
        assert!(split.excluded.is_empty());
    }

    #[test]
    fn body_direction_anova_reported() {
        // The reference analysis of this table reports p = 0.329 for M,
        // 0.001 for beta and 0.0038 for lambda_beta across body directions,
        // after an outlier exclusion whose exact subset is not recoverable.
        // With the explicit IQR rule the same qualitative split must hold:
        // M indistinguishable, beta and lambda_beta clearly separated.
        let table = fixture_table();
        let mut ps = Vec::new();
        for field in [ParamField::M, ParamField::Beta, ParamField::LambdaBeta] {
            let groups: Vec<Vec<f64>> = table
                .direction_groups(Region::Body, field)
                .into_iter()
                .map(|(_, vals)| exclude_outliers_iqr(&vals).kept)
                .collect();
            let res = anova_one_way(&groups).unwrap();
            println!(
                "body {} : F = {:.4}, p = {:.6}",
                field.as_str(),
                res.f,
                res.p
            );
            ps.push(res.p);
        }
        assert!(ps[0] > 0.05, "M should not separate, p = {}", ps[0]);
        assert!(ps[1] < 0.05, "beta should separate, p = {}", ps[1]);
        assert!(ps[2] < 0.05, "lambda_beta should separate, p = {}", ps[2]);
    }
}
