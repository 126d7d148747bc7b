//! Spectral plots of the two discretizations of Ha·J and D·Ha: one CSV per
//! curve, one SVG per panel and a manifest with checksums.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{fit_points, BoundSpec, DecayModel};
use crate::discretize::{left_gram, right_gram, Scheme};
use crate::error::{Error, Result};
use crate::numerics::{float_to_hex, working_epsilon, GUARD_BITS};
use crate::operators::CompositionSpec;
use crate::spectra::{eigen_sym, sig16, Spectrum};

pub const FIGURE_OPERATORS: [&str; 2] = ["HaJ", "DHa"];
pub const FIGURE_SCHEMES: [Scheme; 2] = [Scheme::LeftSection, Scheme::RightMidpoint];
pub const DEFAULT_SIZES: [usize; 4] = [5, 10, 15, 20];
const PRECISION_MARGIN: u32 = 32;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const BOUND_COLOR: &str = "#444444";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Fig1,
    Fig2,
}

impl std::str::FromStr for Which {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Which::Fig1),
            "fig2" => Ok(Which::Fig2),
            other => Err(Error::Invalid(format!("unknown figure {other:?}, expected fig1 or fig2"))),
        }
    }
}

impl Which {
    pub fn dir_name(self) -> &'static str {
        match self {
            Which::Fig1 => "fig1",
            Which::Fig2 => "fig2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub which: Which,
    pub sizes: Vec<usize>,
    pub precision: u32,
}

impl FigureSpec {
    /// Four sizes for the first figure; N = 20 alone for the second.
    pub fn new(which: Which, precision: u32) -> Self {
        let sizes = match which {
            Which::Fig1 => DEFAULT_SIZES.to_vec(),
            Which::Fig2 => vec![20],
        };
        Self { which, sizes, precision }
    }
}

/// Bits needed so that σ_N of a size-N section stays above the trust floor,
/// from ‖H_N⁻¹‖ ≤ e^{4N} and the N² factor of the scaling.
pub fn minimum_precision(n: usize) -> u32 {
    let nf = n as f64;
    GUARD_BITS + (4.0 * nf / std::f64::consts::LN_2 + 2.0 * nf.log2()).ceil() as u32 + PRECISION_MARGIN
}

/// The spectrum of one operator under one scheme at size `n`.
pub fn figure_spectrum(op: &str, scheme: Scheme, n: usize, prec: u32) -> Result<Spectrum> {
    let spec: CompositionSpec = op.parse()?;
    let g = match scheme {
        Scheme::LeftSection => left_gram(&spec, n)?,
        Scheme::RightMidpoint => right_gram(&spec, n, &working_epsilon(prec))?,
        Scheme::Galerkin => return Err(Error::Invalid("figures compare the left and right schemes only".into())),
    };
    eigen_sym(&g, prec)
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub operator: String,
    pub scheme: Scheme,
    pub n: usize,
    pub spectrum: Spectrum,
}

impl Curve {
    pub fn file_name(&self) -> String {
        format!("{}_{}_N{}.csv", self.operator, self.scheme.short_name(), self.n)
    }

    /// `index,log10_sigma,trusted`, log values with 16 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,log10_sigma,trusted\n");
        for (i, l) in self.spectrum.log10().iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, sig16(*l), u8::from(self.spectrum.is_trusted(i + 1)));
        }
        out
    }
}

/// Computes every curve of the figure, panels in parallel.
pub fn compute_curves(spec: &FigureSpec) -> Result<Vec<Curve>> {
    let need = spec.sizes.iter().map(|&n| minimum_precision(n)).max().unwrap_or(0);
    if spec.precision < need {
        return Err(Error::InsufficientPrecision { given: spec.precision, minimum: need });
    }
    let jobs: Vec<(&str, Scheme, usize)> = FIGURE_OPERATORS
        .iter()
        .flat_map(|op| FIGURE_SCHEMES.iter().flat_map(move |s| spec.sizes.iter().map(move |n| (*op, *s, *n))))
        .collect();
    jobs.par_iter()
        .map(|&(op, scheme, n)| {
            Ok(Curve { operator: op.into(), scheme, n, spectrum: figure_spectrum(op, scheme, n, spec.precision)? })
        })
        .collect()
}

/// The dashed reference curves of the second figure.
pub fn bound_curves(op: &str) -> Vec<(&'static str, BoundSpec)> {
    let lower = if op == "HaJ" { BoundSpec::exp_lower() } else { BoundSpec::exp_over_index_lower() };
    let name = if op == "HaJ" { "exp_1.6i" } else { "exp_2i_over_i" };
    vec![("i_3_2", BoundSpec::three_halves_upper()), (name, lower)]
}

fn bound_csv(b: &BoundSpec, n: usize) -> String {
    let mut out = String::from("index,log10_value\n");
    for i in 1..=n {
        let _ = writeln!(out, "{i},{}", sig16(b.ln_value(i) / std::f64::consts::LN_10));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesStyle {
    pub label: String,
    pub color: String,
    pub dashed: bool,
}

struct Series {
    style: SeriesStyle,
    points: Vec<(f64, f64, bool)>,
}

fn parse_csv(text: &str) -> Result<Vec<(f64, f64, bool)>> {
    let mut pts = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Invalid(format!("malformed CSV line {}: {line:?}", k + 1));
        let i: f64 = f.first().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let y: f64 = f.get(1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let trusted = f.get(2).map_or(true, |t| *t == "1");
        pts.push((i, y, trusted));
    }
    Ok(pts)
}

/// Semilog panel drawn from CSV texts: polylines, filled markers for trusted
/// points and hollow ones otherwise, dashed lines for reference curves.
pub fn render_svg(title: &str, series: &[(SeriesStyle, &str)]) -> Result<String> {
    let parsed: Vec<Series> = series
        .iter()
        .map(|(style, csv)| Ok(Series { style: style.clone(), points: parse_csv(csv)? }))
        .collect::<Result<_>>()?;
    let finite = parsed.iter().flat_map(|s| s.points.iter()).filter(|p| p.1.is_finite());
    let (mut xmax, mut ymin, mut ymax) = (1.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, _) in finite {
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if !ymin.is_finite() {
        (ymin, ymax) = (-1.0, 0.0);
    }
    let (ylo, yhi) = (ymin.floor(), ymax.ceil().max(ymin.floor() + 1.0));
    let (w, h) = (640.0, 480.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let sx = |x: f64| left + if xmax > 1.0 { (x - 1.0) / (xmax - 1.0) * pw } else { pw / 2.0 };
    let sy = |y: f64| top + (yhi - y) / (yhi - ylo) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, xml(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let ystep = ((yhi - ylo) / 8.0).ceil().max(1.0);
    let mut y = yhi;
    while y >= ylo - 1e-9 {
        let py = sy(y);
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{y}</text>"#, left - 8.0, py + 4.0);
        y -= ystep;
    }
    let xstep = ((xmax - 1.0) / 10.0).ceil().max(1.0);
    let mut x = 1.0;
    while x <= xmax + 1e-9 {
        let px = sx(x);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, top + ph, top + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{x}</text>"#, top + ph + 18.0);
        x += xstep;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">index i</text>"#, left + pw / 2.0, h - 10.0);
    let _ = writeln!(s, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">log10 sigma_i</text>"#, top + ph / 2.0, top + ph / 2.0);

    for (k, ser) in parsed.iter().enumerate() {
        let c = &ser.style.color;
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(x, y, _)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if ser.style.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>"#, pts.join(" "));
        if !ser.style.dashed {
            for &(x, y, trusted) in ser.points.iter().filter(|p| p.1.is_finite()) {
                let fill = if trusted { c.as_str() } else { "none" };
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="{c}"/>"#, sx(x), sy(y));
            }
        }
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="1.5"{dash}/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, xml(&ser.style.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub which: Which,
    pub precision: u32,
    pub series_tol_hex: String,
    pub sizes: Vec<usize>,
    pub operators: Vec<String>,
    pub schemes: Vec<String>,
    pub palette: Vec<String>,
    pub markers: String,
    pub files: Vec<FileEntry>,
    pub generated_unix: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(root: &Path, rel: &str, text: &str, files: &mut Vec<FileEntry>) -> Result<()> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, text)?;
    files.push(FileEntry { path: rel.to_string(), sha256: sha256_hex(text.as_bytes()) });
    Ok(())
}

/// Writes the CSVs, SVG panels and `manifest.json` of a figure under `out`.
/// Returns the manifest and the curves that were plotted.
pub fn render_figure(spec: &FigureSpec, out: &Path) -> Result<(Manifest, Vec<Curve>)> {
    let curves = compute_curves(spec)?;
    let dir = spec.which.dir_name();
    let mut files = Vec::new();
    let mut csv_of = Vec::new();
    for c in &curves {
        let text = c.to_csv();
        write(out, &format!("{dir}/{}", c.file_name()), &text, &mut files)?;
        csv_of.push(text);
    }
    match spec.which {
        Which::Fig1 => {
            for op in FIGURE_OPERATORS {
                for scheme in FIGURE_SCHEMES {
                    let series: Vec<(SeriesStyle, &str)> = curves
                        .iter()
                        .zip(&csv_of)
                        .filter(|(c, _)| c.operator == op && c.scheme == scheme)
                        .enumerate()
                        .map(|(k, (c, t))| {
                            let style = SeriesStyle { label: format!("N = {}", c.n), color: PALETTE[k % PALETTE.len()].into(), dashed: false };
                            (style, t.as_str())
                        })
                        .collect();
                    let svg = render_svg(&format!("{op}, {} scheme", scheme.short_name()), &series)?;
                    write(out, &format!("{dir}/panel_{op}_{}.svg", scheme.short_name()), &svg, &mut files)?;
                }
            }
        }
        Which::Fig2 => {
            let n = spec.sizes.iter().copied().max().unwrap_or(20);
            for op in FIGURE_OPERATORS {
                let bounds: Vec<(String, String)> = bound_curves(op)
                    .into_iter()
                    .map(|(name, b)| (format!("{op}_bound_{name}.csv"), bound_csv(&b, n)))
                    .collect();
                for (name, text) in &bounds {
                    write(out, &format!("{dir}/{name}"), text, &mut files)?;
                }
                let mut series: Vec<(SeriesStyle, &str)> = curves
                    .iter()
                    .zip(&csv_of)
                    .filter(|(c, _)| c.operator == op && c.n == n)
                    .enumerate()
                    .map(|(k, (c, t))| {
                        let style = SeriesStyle { label: c.scheme.short_name().into(), color: PALETTE[k % PALETTE.len()].into(), dashed: false };
                        (style, t.as_str())
                    })
                    .collect();
                for ((_, b), (_, text)) in bound_curves(op).iter().zip(&bounds) {
                    let label = b.label().trim_start_matches("upper ").trim_start_matches("lower ").to_string();
                    series.push((SeriesStyle { label, color: BOUND_COLOR.into(), dashed: true }, text.as_str()));
                }
                let svg = render_svg(&format!("{op}, N = {n}"), &series)?;
                write(out, &format!("{dir}/panel_{op}.svg"), &svg, &mut files)?;
            }
        }
    }
    let manifest = Manifest {
        schema_version: 1,
        which: spec.which,
        precision: spec.precision,
        series_tol_hex: float_to_hex(&working_epsilon(spec.precision)),
        sizes: spec.sizes.clone(),
        operators: FIGURE_OPERATORS.iter().map(|s| s.to_string()).collect(),
        schemes: FIGURE_SCHEMES.iter().map(|s| s.short_name().to_string()).collect(),
        palette: PALETTE.iter().map(|s| s.to_string()).collect(),
        markers: "filled circle: trusted; hollow circle: below the trust floor; dashed: reference bound".into(),
        files,
        generated_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::create_dir_all(out)?;
    fs::write(out.join(format!("{dir}_manifest.json")), text)?;
    Ok((manifest, curves))
}

/// Path of the manifest written by `render_figure`.
pub fn manifest_path(out: &Path, which: Which) -> PathBuf {
    out.join(format!("{}_manifest.json", which.dir_name()))
}

/// Max log₁₀ residual of an exponential fit through the last three trusted
/// points, or None when fewer than three are trusted.
pub fn tail_linearity(s: &Spectrum) -> Option<f64> {
    let hi = s.trust_cutoff;
    if hi < 3 {
        return None;
    }
    let pts: Vec<(usize, f64)> = (hi - 2..=hi).map(|i| (i, crate::numerics::ln_f64(s.sigma(i)))).collect();
    fit_points(DecayModel::Exponential, &pts).ok().map(|f| f.residual_log10)
}

pub fn is_monotone(s: &Spectrum) -> bool {
    s.values.windows(2).all(|w| w[0] >= w[1])
}
