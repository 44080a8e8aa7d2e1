use std::sync::Arc;
use std::time::Instant;

use num_rational::Rational64;
use rayon::prelude::*;
use torus_dirac::galerkin::{matrix_at, spectrum_at, TrackedPair};
use torus_dirac::perturbation::fit_expansion;
use torus_dirac::{Branch, CoframeFamilyF64, FitResult, Grid, PerturbationReport, PerturbationReportF64};

use crate::config::{OutputFormat, RunConfig};
use crate::format::{csv, full, markdown, sig};
use crate::{CliError, Output};

/// Significant digits in Markdown output.
pub const MD_DIGITS: usize = 6;
/// Route agreement limits for first- and second-order coefficients.
pub const ROUTE_TOL: (f64, f64) = (1e-12, 1e-10);
/// Agreement limits between the fit route and the closed forms.
pub const FIT_TOL: (f64, f64) = (1e-6, 1e-4);
/// Absolute floor for the asymmetry flag.
pub const ASYMMETRY_FLOOR: f64 = 1e-8;

fn setup(cfg: &RunConfig) -> Result<(CoframeFamilyF64, Arc<Grid<f64>>), CliError> {
    let family = cfg.family.family()?.to_real::<f64>();
    let grid = Arc::new(Grid::for_truncation(cfg.m));
    Ok((family, grid))
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinRow {
    pub eps: f64,
    pub cells: Vec<Result<TrackedPair<f64>, String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinTable {
    pub m: usize,
    pub modes: Vec<i64>,
    pub rows: Vec<GalerkinRow>,
}

impl GalerkinTable {
    /// Tracked mean for row `row` and mode `n`.
    pub fn mean(&self, row: usize, n: i64) -> Option<f64> {
        let col = self.modes.iter().position(|&x| x == n)?;
        self.rows.get(row)?.cells[col].as_ref().ok().map(|p| p.mean)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (n, c) in self.modes.iter().zip(&r.cells) {
                if let Err(e) = c {
                    out.push(format!("eps = {}, n = {n}: {e}", r.eps));
                }
            }
        }
        out
    }

    pub fn render(&self, fmt: OutputFormat) -> String {
        let md = fmt == OutputFormat::Md;
        let mut header = vec![if md { "ε".to_string() } else { "eps".to_string() }];
        for n in &self.modes {
            header.push(if md { format!("λ ≈ {n}") } else { format!("lambda_{n}") });
            header.push(if md { "gap".to_string() } else { format!("gap_{n}") });
        }
        let num = |x: f64| if md { sig(x, MD_DIGITS) } else { full(x) };
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![if md { sig(r.eps, MD_DIGITS) } else { full(r.eps) }];
                for c in &r.cells {
                    match c {
                        Ok(p) => row.extend([num(p.mean), num(p.gap)]),
                        Err(_) => row.extend(["NA".to_string(), "NA".to_string()]),
                    }
                }
                row
            })
            .collect();
        if md {
            markdown(&header, &rows)
        } else {
            csv(&header, &rows)
        }
    }

    pub fn output(&self, fmt: OutputFormat) -> Output {
        let failures = self.failures();
        Output { text: self.render(fmt), violation: (!failures.is_empty()).then(|| failures.join("; ")) }
    }
}

/// Tracked pair means at every configured `ε` and mode.
pub fn cmd_galerkin(cfg: &RunConfig) -> Result<GalerkinTable, CliError> {
    if cfg.eps.is_empty() {
        return Err(CliError::Config("no eps values".into()));
    }
    let (family, grid) = setup(cfg)?;
    family.check_admissible(&cfg.eps, &grid)?;
    let start = Instant::now();
    let rows = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let report = spectrum_at(&family, eps, cfg.m, &grid)?;
            let cells = cfg.modes.iter().map(|&n| report.track_pair(n).map_err(|e| e.to_string())).collect();
            Ok(GalerkinRow { eps, cells })
        })
        .collect::<Result<Vec<_>, torus_dirac::Error>>()?;
    log::info!("galerkin: {} eps values, m = {}, {:.2?}", rows.len(), cfg.m, start.elapsed());
    Ok(GalerkinTable { m: cfg.m, modes: cfg.modes.clone(), rows })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptReport {
    pub exact: PerturbationReport<Rational64>,
    pub closed: PerturbationReportF64,
    pub operator: PerturbationReportF64,
    pub fit: Result<PerturbationReportF64, String>,
    /// Linear coefficient `½ĥ₁₁(0)` of the relative arc-length change.
    pub arc_slope: Rational64,
    pub violations: Vec<String>,
}

/// Largest first- and second-order deviation between two reports.
fn deviation(a: &PerturbationReportF64, b: &PerturbationReportF64) -> (f64, f64) {
    let d1 = (a.lambda1_plus - b.lambda1_plus).abs().max((a.lambda1_minus - b.lambda1_minus).abs());
    let d2 = (a.lambda2_plus - b.lambda2_plus).abs().max((a.lambda2_minus - b.lambda2_minus).abs());
    (d1, d2)
}

impl AsymptReport {
    /// Pairwise deviations `(label, first order, second order)`.
    pub fn deviations(&self) -> Vec<(&'static str, f64, f64)> {
        let mut out = vec![{
            let (a, b) = deviation(&self.operator, &self.closed);
            ("operator vs closed_form", a, b)
        }];
        if let Ok(fit) = &self.fit {
            let (a, b) = deviation(fit, &self.closed);
            out.push(("galerkin_fit vs closed_form", a, b));
            let (a, b) = deviation(fit, &self.operator);
            out.push(("galerkin_fit vs operator", a, b));
        }
        out
    }

    pub fn render(&self, fmt: OutputFormat) -> String {
        let md = fmt == OutputFormat::Md;
        let header: Vec<String> = if md {
            ["route", "λ₊⁽¹⁾", "λ₋⁽¹⁾", "λ₊⁽²⁾", "λ₋⁽²⁾", "λ₊⁽²⁾+λ₋⁽²⁾"].map(String::from).to_vec()
        } else {
            ["route", "lambda1_plus", "lambda1_minus", "lambda2_plus", "lambda2_minus", "asymmetry2"].map(String::from).to_vec()
        };
        let num = |x: f64| if md { sig(x, MD_DIGITS) } else { full(x) };
        let row = |r: &PerturbationReportF64| {
            let mut v = vec![r.route.name().to_string()];
            v.extend(r.values().iter().map(|&x| num(x)));
            v.push(num(r.asymmetry2));
            v
        };
        let e = &self.exact;
        let mut rows = vec![vec![
            "exact".to_string(),
            e.lambda1_plus.to_string(),
            e.lambda1_minus.to_string(),
            e.lambda2_plus.to_string(),
            e.lambda2_minus.to_string(),
            e.asymmetry2.to_string(),
        ]];
        rows.push(row(&self.closed));
        rows.push(row(&self.operator));
        match &self.fit {
            Ok(f) => rows.push(row(f)),
            Err(_) => rows.push(vec!["galerkin_fit".to_string(), "NA".into(), "NA".into(), "NA".into(), "NA".into(), "NA".into()]),
        }
        let mut s = if md { markdown(&header, &rows) } else { csv(&header, &rows) };
        let c = if md { "" } else { "# " };
        s.push('\n');
        for (label, d1, d2) in self.deviations() {
            s.push_str(&format!("{c}max deviation {label}: first order {d1:.3e}, second order {d2:.3e}\n"));
        }
        if let Err(e) = &self.fit {
            s.push_str(&format!("{c}galerkin_fit failed: {e}\n"));
        }
        s.push_str(&format!("{c}arc length: l(eps) = 2 pi (1 + a eps) + O(eps^2) with a = {}\n", self.arc_slope));
        s
    }

    pub fn output(&self, fmt: OutputFormat) -> Output {
        Output {
            text: self.render(fmt),
            violation: (!self.violations.is_empty()).then(|| self.violations.join("; ")),
        }
    }
}

/// Coefficients by the closed forms (exact and in `f64`), the operator route
/// and Galerkin fits, with cross-route checks.
pub fn cmd_asympt(cfg: &RunConfig) -> Result<AsymptReport, CliError> {
    let start = Instant::now();
    let (h, k) = cfg.family.hk()?;
    let exact = PerturbationReport::closed_form(&h, &k);
    let (hf, kf) = (h.to_real::<f64>(), k.to_real::<f64>());
    let closed = PerturbationReport::closed_form(&hf, &kf);
    let grid = Arc::new(Grid::for_truncation(cfg.m));
    let operator = PerturbationReport::operator(&hf, &kf, &grid)?;

    let family = cfg.family.family()?.to_real::<f64>();
    let order = cfg.fit_order.max(2);
    let fits: Vec<Result<FitResult<f64>, CliError>> = Branch::both()
        .par_iter()
        .map(|b| fit_expansion(&family, b.n(), &cfg.fit_eps, order, cfg.m, &grid).map_err(CliError::from))
        .collect();
    let fit = match (&fits[0], &fits[1]) {
        (Ok(p), Ok(m)) => Ok(PerturbationReport::from_fits(p, m)),
        (Err(CliError::Config(e)), _) | (_, Err(CliError::Config(e))) => return Err(CliError::Config(e.clone())),
        (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
    };
    let arc_slope = h.get(0, 0).coeff(0).re / Rational64::from_integer(2);

    let mut report = AsymptReport { exact, closed, operator, fit, arc_slope, violations: Vec::new() };
    for (label, d1, d2) in report.deviations() {
        let (t1, t2) = if label.starts_with("operator") { ROUTE_TOL } else { FIT_TOL };
        if d1 > t1 || d2 > t2 {
            report.violations.push(format!("{label}: deviations {d1:.3e}, {d2:.3e} exceed {t1:e}, {t2:e}"));
        }
    }
    if let Err(e) = &report.fit {
        report.violations.push(format!("galerkin_fit: {e}"));
    }
    log::info!("asympt: {:.2?}", start.elapsed());
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct AsymmetryFlag {
    pub n: i64,
    /// `c₂(n) + c₂(−n)`.
    pub sum2: f64,
    pub sigma2: f64,
    pub flagged: bool,
    /// `c₄(n) + c₄(−n)`, for fourth-order fits.
    pub sum4: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub order: usize,
    pub eps: Vec<f64>,
    pub fits: Vec<(i64, Result<FitResult<f64>, String>)>,
    pub flags: Vec<AsymmetryFlag>,
}

impl FitReport {
    pub fn fit(&self, n: i64) -> Option<&FitResult<f64>> {
        self.fits.iter().find(|(m, _)| *m == n).and_then(|(_, f)| f.as_ref().ok())
    }

    pub fn render(&self, fmt: OutputFormat) -> String {
        let md = fmt == OutputFormat::Md;
        let num = |x: f64| if md { sig(x, MD_DIGITS) } else { full(x) };
        let mut header = vec!["n".to_string()];
        for p in 1..=self.order {
            header.push(format!("c{p}"));
            header.push(format!("se{p}"));
        }
        header.extend(["residual".to_string(), "limit".to_string()]);
        let rows: Vec<Vec<String>> = self
            .fits
            .iter()
            .map(|(n, f)| {
                let mut row = vec![n.to_string()];
                match f {
                    Ok(f) => {
                        for p in 1..=self.order {
                            row.push(num(f.coefficient(p).unwrap()));
                            row.push(num(f.std_error(p).unwrap()));
                        }
                        row.extend([num(f.residual), num(f.limit)]);
                    }
                    Err(_) => row.extend(std::iter::repeat_n("NA".to_string(), 2 * self.order + 2)),
                }
                row
            })
            .collect();
        let mut s = if md { markdown(&header, &rows) } else { csv(&header, &rows) };
        let c = if md { "" } else { "# " };
        s.push('\n');
        for (n, f) in &self.fits {
            if let Err(e) = f {
                s.push_str(&format!("{c}n = {n}: {e}\n"));
            }
        }
        for fl in &self.flags {
            let state = if fl.flagged { "ON" } else { "OFF" };
            s.push_str(&format!(
                "{c}asymmetry n = ±{}: c2 sum {} (sigma {}), flag {state}",
                fl.n,
                num(fl.sum2),
                num(fl.sigma2)
            ));
            if let Some(s4) = fl.sum4 {
                s.push_str(&format!(", c4 sum {}", num(s4)));
            }
            s.push('\n');
        }
        s
    }

    pub fn output(&self, fmt: OutputFormat) -> Output {
        let errs: Vec<String> =
            self.fits.iter().filter_map(|(n, f)| f.as_ref().err().map(|e| format!("n = {n}: {e}"))).collect();
        Output { text: self.render(fmt), violation: (!errs.is_empty()).then(|| errs.join("; ")) }
    }
}

/// Fits `n + c₁ε + … + c_order ε^order` for each configured mode.
pub fn cmd_fit(cfg: &RunConfig) -> Result<FitReport, CliError> {
    let start = Instant::now();
    let (family, grid) = setup(cfg)?;
    let fits: Vec<(i64, Result<FitResult<f64>, CliError>)> = cfg
        .modes
        .par_iter()
        .map(|&n| (n, fit_expansion(&family, n, &cfg.fit_eps, cfg.fit_order, cfg.m, &grid).map_err(CliError::from)))
        .collect();
    if let Some((_, Err(e @ CliError::Config(_)))) = fits.iter().find(|(_, f)| matches!(f, Err(CliError::Config(_)))) {
        return Err(e.clone());
    }
    let fits: Vec<(i64, Result<FitResult<f64>, String>)> =
        fits.into_iter().map(|(n, f)| (n, f.map_err(|e| e.to_string()))).collect();

    let mut report = FitReport { order: cfg.fit_order, eps: cfg.fit_eps.clone(), fits, flags: Vec::new() };
    for &n in cfg.modes.iter().filter(|&&n| n > 0) {
        let (Some(p), Some(m)) = (report.fit(n), report.fit(-n)) else { continue };
        let (Some(a), Some(b)) = (p.coefficient(2), m.coefficient(2)) else { continue };
        let sigma2 = p.std_error(2).unwrap().hypot(m.std_error(2).unwrap());
        let sum2 = a + b;
        let sum4 = p.coefficient(4).zip(m.coefficient(4)).map(|(x, y)| x + y);
        let flagged = sum2.abs() > 3.0 * sigma2 && sum2.abs() > ASYMMETRY_FLOOR;
        report.flags.push(AsymmetryFlag { n, sum2, sigma2, flagged, sum4 });
    }
    log::info!("fit: {} modes, {:.2?}", cfg.modes.len(), start.elapsed());
    Ok(report)
}

// ---------------------------------------------------------------------------

/// Galerkin matrices for each configured `ε`, one header line per matrix.
pub fn cmd_dump_matrix(cfg: &RunConfig) -> Result<String, CliError> {
    let (family, grid) = setup(cfg)?;
    family.check_admissible(&cfg.eps, &grid)?;
    let mut s = String::new();
    for &eps in &cfg.eps {
        let h = matrix_at(&family, eps, cfg.m, &grid)?;
        s.push_str(&format!("# eps = {eps} m = {} order = {}\n", cfg.m, h.order()));
        s.push_str(&h.dump());
    }
    Ok(s)
}
