//! Spec files (TOML), float formatting for CSV, and a minimal SVG log-log plot.

use crate::asymptotics::Statistic;
use crate::error::{Error, Result};
use crate::stats::MgfQuery;
use crate::symbol::{Singularity, SymbolSpec};
use crate::trig::TrigPolynomial;
use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    n: Option<usize>,
    n_grid: Option<Vec<usize>>,
    #[serde(rename = "V", default)]
    v: Vec<[f64; 3]>,
    #[serde(rename = "W", default)]
    w: Vec<[f64; 3]>,
    #[serde(default)]
    singularity: Vec<RawSingularity>,
    moment: Option<RawMoment>,
    statistic: Option<RawStatistic>,
    sample: Option<SampleConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSingularity {
    theta: f64,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    alpha_im: f64,
    #[serde(default)]
    beta: f64,
    #[serde(default)]
    beta_im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMoment {
    /// m+1 entries [re, im], the first at θ = 0
    alphas: Vec<[f64; 2]>,
    #[serde(default)]
    us: Vec<[f64; 2]>,
    #[serde(default)]
    thetas: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatistic {
    kind: String,
    theta: Option<f64>,
    #[serde(default)]
    terms: Vec<[f64; 3]>,
    max_order: Option<usize>,
}

/// Sampler settings; `theta` is where counting and ordered statistics are read.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub chains: usize,
    pub steps: usize,
    pub theta: f64,
}

/// A parsed spec file. The symbol is rebuilt for each n on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub v: TrigPolynomial,
    pub w: TrigPolynomial,
    pub singularities: Vec<Singularity>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub moment: Option<MgfQuery>,
    pub statistic: Option<(Statistic, usize)>,
    pub sample: Option<SampleConfig>,
}

fn terms(raw: &[[f64; 3]], what: &str) -> Result<TrigPolynomial> {
    let mut pairs = Vec::with_capacity(raw.len());
    for t in raw {
        if t[0].fract() != 0.0 || t[0].abs() > 1e6 {
            return Err(Error::parse(format!("{what}: Fourier index {} is not an integer", t[0])));
        }
        pairs.push((t[0] as i64, Complex64::new(t[1], t[2])));
    }
    Ok(TrigPolynomial::from_pairs(&pairs))
}

fn complex_list(raw: &[[f64; 2]]) -> Vec<Complex64> {
    raw.iter().map(|c| Complex64::new(c[0], c[1])).collect()
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<SpecFile> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::parse(e.message().to_string()))?;
        let v = terms(&raw.v, "V")?;
        let w = terms(&raw.w, "W")?;
        let singularities = raw
            .singularity
            .iter()
            .map(|s| Singularity::new(s.theta, Complex64::new(s.alpha, s.alpha_im), Complex64::new(s.beta, s.beta_im)))
            .collect();
        let moment = raw.moment.map(|m| MgfQuery {
            v: v.clone(),
            w: w.clone(),
            alphas: complex_list(&m.alphas),
            us: complex_list(&m.us),
            thetas: m.thetas,
            n: raw.n.unwrap_or(1),
        });
        let statistic = match raw.statistic {
            None => None,
            Some(s) => {
                let theta = || s.theta.ok_or_else(|| Error::parse(format!("statistic {:?} needs theta", s.kind)));
                let stat = match s.kind.as_str() {
                    "counting" => Statistic::Counting(theta()?),
                    "log_abs" => Statistic::LogAbs(theta()?),
                    "smooth" => Statistic::Smooth(terms(&s.terms, "statistic terms")?),
                    k => return Err(Error::parse(format!("unknown statistic kind {k:?} (counting, log_abs, smooth)"))),
                };
                Some((stat, s.max_order.unwrap_or(4)))
            }
        };
        Ok(SpecFile { v, w, singularities, n: raw.n, n_grid: raw.n_grid, moment, statistic, sample: raw.sample })
    }

    pub fn load(path: &Path) -> Result<SpecFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::parse(format!("cannot read {}: {e}", path.display())))?;
        SpecFile::parse(&text)
    }

    /// The symbol at size n (validated).
    pub fn symbol(&self, n: usize) -> Result<SymbolSpec> {
        SymbolSpec::new(self.v.clone(), self.w.clone(), self.singularities.clone(), n)
    }
}

/// Parses "a:b:step" (inclusive, additive), "a:b:*k" (geometric) or "n1,n2,…".
pub fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::parse(format!("bad n-grid {s:?}"));
    let grid: Vec<usize> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: usize = parts[0].trim().parse().map_err(|_| bad())?;
        let b: usize = parts[1].trim().parse().map_err(|_| bad())?;
        let step = parts[2].trim();
        let mut out = Vec::new();
        let mut x = a;
        if let Some(f) = step.strip_prefix('*') {
            let f: usize = f.parse().map_err(|_| bad())?;
            if f < 2 || a == 0 {
                return Err(bad());
            }
            while x <= b {
                out.push(x);
                x *= f;
            }
        } else {
            let d: usize = step.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            while x <= b {
                out.push(x);
                x += d;
            }
        }
        out
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain(format!("n-grid {s:?} must be positive and strictly increasing")));
    }
    Ok(grid)
}

/// 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A log-log polyline of (x, y) with axis labels. Nonpositive points are dropped.
pub fn svg_loglog(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect();
    let (w, h, m) = (640.0, 440.0, 70.0);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        w / 2.0,
        escape(title)
    );
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    out += &format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        b = h - m,
        r = w - m
    );
    for (v, pos) in [(x0, sx(x0)), (x1, sx(x1))] {
        out += &format!("<text x=\"{pos:.1}\" y=\"{:.1}\" text-anchor=\"middle\">1e{v:.2}</text>\n", h - m + 16.0);
    }
    for (v, pos) in [(y0, sy(y0)), (y1, sy(y1))] {
        out += &format!("<text x=\"{:.1}\" y=\"{pos:.1}\" text-anchor=\"end\">1e{v:.2}</text>\n", m - 6.0);
    }
    out += &format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n", w / 2.0, h - 20.0, escape(x_label));
    out += &format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    if !pts.is_empty() {
        let line: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        out += &format!("<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>\n", line.join(" "));
        for (x, y) in &pts {
            out += &format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n", sx(*x), sy(*y));
        }
    }
    out += "</svg>\n";
    out
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
n = 64
V = [[1, 0.3, 0.0], [-1, 0.3, 0.0]]
W = [[1, 0.1, 0.0], [-1, 0.1, 0.0]]

[[singularity]]
theta = 2.0943951023931953
alpha = 0.6
beta = 0.2

[statistic]
kind = "counting"
theta = 3.141592653589793
"#;

    #[test]
    fn parses_full_spec() {
        let s = SpecFile::parse(SPEC).unwrap();
        assert_eq!(s.n, Some(64));
        assert_eq!(s.v, TrigPolynomial::cosine(0.3));
        assert_eq!(s.w, TrigPolynomial::cosine(0.1));
        assert_eq!(s.singularities.len(), 1);
        assert_eq!(s.singularities[0].alpha, Complex64::new(0.6, 0.0));
        assert!(matches!(s.statistic, Some((Statistic::Counting(_), 4))));
        let sym = s.symbol(64).unwrap();
        assert_eq!(sym.n, 64);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(SpecFile::parse("n = 4\nV = [[0.5, 1, 0]]"), Err(Error::Parse(_))));
        assert!(matches!(SpecFile::parse("n = 4\nbogus = 1"), Err(Error::Parse(_))));
        assert!(matches!(SpecFile::parse("[statistic]\nkind = \"nope\""), Err(Error::Parse(_))));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("32:512:*2").unwrap(), vec![32, 64, 128, 256, 512]);
        assert_eq!(parse_grid("4:10:3").unwrap(), vec![4, 7, 10]);
        assert_eq!(parse_grid("8, 16,64").unwrap(), vec![8, 16, 64]);
        assert!(parse_grid("8,4").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn float_roundtrip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn svg_has_polyline() {
        let s = svg_loglog("t", "n", "|diff|", &[(32.0, 1e-3), (64.0, 5e-4), (128.0, 0.0)]);
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("<circle").count(), 2);
    }
}
