//! One function per subcommand. Each computes everything first and writes
//! files only once nothing can be refused, so a failed run leaves no partial
//! tables behind.

use std::fs;
use std::path::PathBuf;

use pathsum_core::{
    compare_analytic, enumerate_paths, eval_m, find_stationary_path, h_scan, m_rate, path_count,
    position_pdf, sample_position, simulate_two_point, transfer_matrix_kernel_with_budget,
    Comparison, ComparisonRow, Complex64, Error, HScanRow, Kernel, MeasurementRecord,
};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};
use crate::error::CliError;
use crate::output::{real, write_table, write_text, Record};

pub type Written = Vec<PathBuf>;

/// Creates the output directory and records the effective configuration in
/// it.
fn prepare(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.output_path.clone();
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let text = toml::to_string(&cfg.to_table()).expect("flat table serializes");
    write_text(&dir.join("config.toml"), &text)?;
    Ok(dir)
}

fn kernel_of(cfg: &ExperimentConfig) -> Result<Kernel, CliError> {
    Ok(transfer_matrix_kernel_with_budget(
        &cfg.lattice,
        &cfg.functional,
        cfg.mode,
        cfg.norm,
        u128::from(cfg.budget),
    )?)
}

fn check_cap(cfg: &ExperimentConfig, count: u128) -> Result<(), CliError> {
    let cap = u128::from(cfg.cap);
    if count > cap {
        return Err(Error::CapExceeded { count, cap }.into());
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow {
    a: i64,
    b: i64,
    abs_k_sq: f64,
    p_hat: f64,
}

impl Record for SummaryRow {
    const HEADER: &'static [&'static str] = &["a", "b", "abs_k_sq", "p_hat"];

    fn fields(&self) -> Vec<String> {
        vec![self.a.to_string(), self.b.to_string(), real(self.abs_k_sq), real(self.p_hat)]
    }
}

#[derive(Serialize)]
struct TwoPointRow {
    a: i64,
    b: i64,
    brute_re: f64,
    brute_im: f64,
    transfer_re: f64,
    transfer_im: f64,
    rel_diff: f64,
    probability: f64,
    p_hat: f64,
    naive_sum: f64,
}

impl Record for TwoPointRow {
    const HEADER: &'static [&'static str] = &[
        "a",
        "b",
        "brute_re",
        "brute_im",
        "transfer_re",
        "transfer_im",
        "rel_diff",
        "probability",
        "p_hat",
        "naive_sum",
    ];

    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.a.to_string(), self.b.to_string()];
        out.extend(
            [
                self.brute_re,
                self.brute_im,
                self.transfer_re,
                self.transfer_im,
                self.rel_diff,
                self.probability,
                self.p_hat,
                self.naive_sum,
            ]
            .map(real),
        );
        out
    }
}

fn rel_diff(x: Complex64, y: Complex64) -> f64 {
    let scale = x.norm().max(y.norm());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).norm() / scale
    }
}

/// Full transfer-matrix kernel, `|K|²` and `p̂` for every endpoint pair,
/// and optionally a brute-force check of one pair.
pub fn kernel(cfg: &ExperimentConfig) -> Result<Written, CliError> {
    let k = kernel_of(cfg)?;
    let verify = cfg.verify.unwrap_or(cfg.a_site.is_some() && cfg.b_site.is_some());
    let check = if verify {
        let (a, b) = (cfg.a()?, cfg.b()?);
        check_cap(cfg, path_count(&cfg.lattice, a, b)?)?;
        let tp = simulate_two_point(&cfg.lattice, &cfg.functional, cfg.mode, cfg.norm, a, b)?;
        let t = k.amplitude(a.site, b.site);
        Some(TwoPointRow {
            a: a.site,
            b: b.site,
            brute_re: tp.amplitude.re,
            brute_im: tp.amplitude.im,
            transfer_re: t.re,
            transfer_im: t.im,
            rel_diff: rel_diff(tp.amplitude, t),
            probability: tp.probability,
            p_hat: tp.normalized,
            naive_sum: tp.naive_sum,
        })
    } else {
        None
    };

    let spec = k.spec();
    let mut summary = Vec::with_capacity(k.dim() * k.dim());
    for a in spec.sites() {
        let p = k.normalized_probabilities(a);
        for (j, b) in spec.sites().enumerate() {
            summary.push(SummaryRow {
                a,
                b,
                abs_k_sq: k.transition_probability(a, b),
                p_hat: p.as_ref().map_or(f64::NAN, |p| p[j]),
            });
        }
    }

    let dir = prepare(cfg)?;
    let kernel_path = dir.join("kernel.json");
    write_text(&kernel_path, &(k.to_json() + "\n"))?;
    let mut written = vec![kernel_path, write_table(&dir, "summary", cfg.format, &summary)?];
    if let Some(row) = check {
        written.push(write_table(&dir, "two_point", cfg.format, &[row])?);
    }
    Ok(written)
}

#[derive(Serialize)]
struct SiteRow {
    slice: usize,
    site: i64,
}

impl Record for SiteRow {
    const HEADER: &'static [&'static str] = &["slice", "site"];

    fn fields(&self) -> Vec<String> {
        vec![self.slice.to_string(), self.site.to_string()]
    }
}

#[derive(Serialize)]
struct RateRow {
    slice: usize,
    m_rate: f64,
}

impl Record for RateRow {
    const HEADER: &'static [&'static str] = &["slice", "m_rate"];

    fn fields(&self) -> Vec<String> {
        vec![self.slice.to_string(), real(self.m_rate)]
    }
}

impl Record for HScanRow {
    const HEADER: &'static [&'static str] = &["h", "m_min", "mass_ratio_w1", "argmax_site"];

    fn fields(&self) -> Vec<String> {
        vec![real(self.h), real(self.m_min), real(self.mass_ratio_w1), self.argmax_site.to_string()]
    }
}

/// Least-`m` path for the configured `h`, its rate of change per slice, and
/// the scan over `h_values`.
pub fn classical(cfg: &ExperimentConfig) -> Result<Written, CliError> {
    let (a, b) = (cfg.a()?, cfg.b()?);
    let h_values = cfg.h_values.as_deref().ok_or(ConfigError::Missing("h_values"))?;
    let f = &cfg.functional;
    let (path, _) = find_stationary_path(&cfg.lattice, f, a, b)?;
    let rates = m_rate(f, &cfg.lattice, &path)?;
    let scan = h_scan(&cfg.lattice, f, cfg.mode, cfg.norm, a, b, h_values)?;

    let sites: Vec<SiteRow> =
        path.sites().iter().enumerate().map(|(slice, &site)| SiteRow { slice, site }).collect();
    let rates: Vec<RateRow> =
        rates.into_iter().enumerate().map(|(slice, m_rate)| RateRow { slice, m_rate }).collect();

    let dir = prepare(cfg)?;
    Ok(vec![
        write_table(&dir, "stationary_path", cfg.format, &sites)?,
        write_table(&dir, "m_rate", cfg.format, &rates)?,
        write_table(&dir, "h_scan", cfg.format, &scan)?,
    ])
}

impl Record for ComparisonRow {
    const HEADER: &'static [&'static str] = &[
        "b_site",
        "x_b",
        "lattice_re",
        "lattice_im",
        "analytic_re",
        "analytic_im",
        "rel_error",
        "phase_error",
    ];

    fn fields(&self) -> Vec<String> {
        let mut out = vec![self.b_site.to_string()];
        out.extend(
            [
                self.x_b,
                self.lattice.re,
                self.lattice.im,
                self.analytic.re,
                self.analytic.im,
                self.rel_error,
                self.phase_error,
            ]
            .map(real),
        );
        out
    }
}

#[derive(Serialize)]
struct ComparisonSummary {
    a_site: i64,
    duration: f64,
    max_rel_error: f64,
}

impl Record for ComparisonSummary {
    const HEADER: &'static [&'static str] = &["a_site", "duration", "max_rel_error"];

    fn fields(&self) -> Vec<String> {
        vec![self.a_site.to_string(), real(self.duration), real(self.max_rel_error)]
    }
}

/// Lattice kernel against the continuum propagator at each requested end
/// site.
pub fn compare(cfg: &ExperimentConfig) -> Result<(Written, Comparison), CliError> {
    let a = cfg.a()?;
    let sites = match (&cfg.compare_sites, cfg.b_site) {
        (Some(sites), _) => sites.clone(),
        (None, Some(b)) => vec![b],
        (None, None) => return Err(ConfigError::Missing("compare_sites").into()),
    };
    let report =
        compare_analytic(&cfg.lattice, &cfg.functional, cfg.mode, cfg.norm, a.site, &sites)?;
    let summary = ComparisonSummary {
        a_site: report.a_site,
        duration: report.duration,
        max_rel_error: report.max_rel_error,
    };
    let dir = prepare(cfg)?;
    let written = vec![
        write_table(&dir, "compare", cfg.format, &report.rows)?,
        write_table(&dir, "compare_summary", cfg.format, &[summary])?,
    ];
    Ok((written, report))
}

impl Record for MeasurementRecord {
    const HEADER: &'static [&'static str] = &["slice", "site", "r", "seed", "draw_index"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.slice.to_string(),
            self.site.to_string(),
            real(self.r),
            self.seed.to_string(),
            self.draw_index.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct PdfRow {
    site: i64,
    r: f64,
    p: f64,
}

impl Record for PdfRow {
    const HEADER: &'static [&'static str] = &["site", "r", "p"];

    fn fields(&self) -> Vec<String> {
        vec![self.site.to_string(), real(self.r), real(self.p)]
    }
}

/// `n_samples` seeded draws of the end-slice position for a point found at
/// `a_site`, with the pdf they were drawn from.
pub fn sample(cfg: &ExperimentConfig) -> Result<Written, CliError> {
    let seed = cfg.seed.ok_or(ConfigError::Missing("seed"))?;
    let a = cfg.a()?;
    let k = kernel_of(cfg)?;
    let pdf = position_pdf(&k, a, cfg.lattice.n_slices)?;
    let records = (0..cfg.n_samples)
        .map(|i| sample_position(&pdf, seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    let pdf_rows: Vec<PdfRow> = pdf
        .sites()
        .zip(pdf.weights())
        .map(|(site, &p)| PdfRow { site, r: cfg.lattice.position(site), p })
        .collect();

    let dir = prepare(cfg)?;
    Ok(vec![
        write_table(&dir, "pdf", cfg.format, &pdf_rows)?,
        write_table(&dir, "samples", cfg.format, &records)?,
    ])
}

#[derive(Serialize)]
struct PathRow {
    index: u64,
    m: f64,
    sites: Vec<i64>,
}

impl Record for PathRow {
    const HEADER: &'static [&'static str] = &["index", "m", "sites"];

    fn fields(&self) -> Vec<String> {
        let sites = self.sites.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        vec![self.index.to_string(), real(self.m), sites]
    }
}

/// Every admissible path from `a_site` to `b_site` in enumeration order,
/// with its `m`.
pub fn enumerate(cfg: &ExperimentConfig) -> Result<Written, CliError> {
    let (a, b) = (cfg.a()?, cfg.b()?);
    check_cap(cfg, path_count(&cfg.lattice, a, b)?)?;
    let rows = enumerate_paths(&cfg.lattice, a, b)?
        .zip(0..)
        .map(|(path, index)| {
            let m = eval_m(&cfg.functional, &cfg.lattice, &path)?;
            Ok(PathRow { index, m, sites: path.into_sites() })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let dir = prepare(cfg)?;
    Ok(vec![write_table(&dir, "paths", cfg.format, &rows)?])
}
