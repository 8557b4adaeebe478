//! Cloud CSV files, JSON run configurations and SVG rendering.
//!
//! Cloud files look like
//!
//! ```text
//! # srg-cloud/1
//! # spec=l1
//! # side=left
//! # sampler=mixed
//! # n=5000
//! # seed=42
//! # columns=re,im,gain,phase_rad,is_infinity
//! 1,0,1,0,0
//! inf,inf,inf,0,1
//! ```
//!
//! Doubles are written with 17 significant digits, so `gain` and `phase_rad`
//! read back bit-for-bit. `re` and `im` are derived and only checked for syntax.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgError};
use crate::geometry::Side;
use crate::pairings::PairingSpec;
use crate::srg::{SampleMeta, SrgCloud, SrgPoint};

pub const CLOUD_FORMAT_VERSION: &str = "srg-cloud/1";
const COLUMNS: &str = "re,im,gain,phase_rad,is_infinity";

/// `printf("%.17g", x)`, with `inf`, `-inf` and `nan` spelled out.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mant) = mant.strip_prefix('-').map_or(("", mant), |m| ("-", m));
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if (-5..17).contains(&exp) {
        let point = exp + 1;
        let body = if point <= 0 {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        } else if point as usize >= digits.len() {
            format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
        } else {
            let (int, frac) = digits.split_at(point as usize);
            format!("{int}.{frac}")
        };
        format!("{sign}{body}")
    } else {
        let (lead, rest) = digits.split_at(1);
        let frac = if rest.is_empty() { String::new() } else { format!(".{rest}") };
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{lead}{frac}e{esign}{:02}", exp.abs())
    }
}

fn point_row(p: &SrgPoint) -> String {
    if p.is_infinity {
        return "inf,inf,inf,0,1".into();
    }
    format!(
        "{},{},{},{},0",
        format_g17(p.re()),
        format_g17(p.im()),
        format_g17(p.gain),
        format_g17(p.phase)
    )
}

pub fn cloud_to_csv(cloud: &SrgCloud) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {CLOUD_FORMAT_VERSION}");
    let _ = writeln!(out, "# spec={}", cloud.spec);
    let _ = writeln!(out, "# side={}", cloud.side);
    let _ = writeln!(out, "# sampler={}", cloud.meta.sampler);
    let _ = writeln!(out, "# n={}", cloud.meta.n);
    let _ = writeln!(out, "# seed={}", cloud.meta.seed);
    let _ = writeln!(out, "# columns={COLUMNS}");
    for p in &cloud.points {
        out.push_str(&point_row(p));
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, reason: impl Into<String>) -> SrgError {
    SrgError::Parse { line, reason: reason.into() }
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("bad {what} value `{field}`")))
}

fn parse_row(row: &str, line: usize) -> Result<SrgPoint> {
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 5 {
        return Err(parse_err(line, format!("expected 5 columns, found {}", fields.len())));
    }
    let re = parse_f64(fields[0], line, "re")?;
    let im = parse_f64(fields[1], line, "im")?;
    let gain = parse_f64(fields[2], line, "gain")?;
    let phase = parse_f64(fields[3], line, "phase_rad")?;
    match fields[4].trim() {
        "1" => {
            if !(re.is_infinite() && im.is_infinite() && gain.is_infinite()) {
                return Err(parse_err(line, "infinity row must read inf,inf,inf"));
            }
            Ok(SrgPoint::infinity())
        }
        "0" => {
            if !(re.is_finite() && im.is_finite() && gain.is_finite() && phase.is_finite()) {
                return Err(parse_err(line, "finite row holds a non-finite value"));
            }
            if gain < 0.0 || !(0.0..=std::f64::consts::PI).contains(&phase) {
                return Err(parse_err(line, "gain must be >= 0 and phase within [0, pi]"));
            }
            Ok(SrgPoint::finite(gain, phase))
        }
        other => Err(parse_err(line, format!("is_infinity must be 0 or 1, found `{other}`"))),
    }
}

pub fn cloud_from_csv(text: &str) -> Result<SrgCloud> {
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut version_seen = false;
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(h) = l.strip_prefix('#') {
            let h = h.trim();
            if !version_seen {
                if h != CLOUD_FORMAT_VERSION {
                    return Err(SrgError::Version { expected: CLOUD_FORMAT_VERSION.into(), found: h.into() });
                }
                version_seen = true;
            } else if let Some((k, v)) = h.split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !version_seen {
            return Err(parse_err(line, "missing format version header"));
        }
        points.push(parse_row(l, line)?);
    }
    if !version_seen {
        return Err(parse_err(1, "empty cloud file"));
    }
    let get = |k: &str| header.get(k).ok_or_else(|| parse_err(0, format!("missing header `{k}`")));
    let spec: PairingSpec = get("spec")?.parse()?;
    let side: Side = get("side")?.parse()?;
    let n = get("n")?.parse().map_err(|_| parse_err(0, "bad header `n`"))?;
    let seed = get("seed")?.parse().map_err(|_| parse_err(0, "bad header `seed`"))?;
    let sampler = get("sampler")?.clone();
    Ok(SrgCloud::new(points, spec, side, SampleMeta::new(sampler, n, seed)))
}

pub fn write_cloud(path: &Path, cloud: &SrgCloud) -> Result<()> {
    fs::write(path, cloud_to_csv(cloud)).map_err(|e| SrgError::io(path, e))
}

pub fn read_cloud(path: &Path) -> Result<SrgCloud> {
    let text = fs::read_to_string(path).map_err(|e| SrgError::io(path, e))?;
    cloud_from_csv(&text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| SrgError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| SrgError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Everything needed to rerun a CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub spec: PairingSpec,
    pub side: Side,
    pub sampler: String,
    pub n: usize,
    pub seed: u64,
    /// Where the seed came from: `default`, `flag`, `env` or `config`.
    pub seed_source: String,
    pub operator: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub property: Option<String>,
    #[serde(default)]
    pub outputs: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(SrgError::InvalidParameter("n must be at least 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in self.outputs.values() {
            if !seen.insert(p) {
                return Err(SrgError::InvalidParameter(format!("output path {p} used twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Overlay {
    /// `|z| = 1`.
    UnitCircle,
    /// Circle of the given centre on the real axis and radius.
    Disk { center_re: f64, radius: f64, dashed: bool },
    /// `Re z = re`.
    VerticalLine { re: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotStyle {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub width_px: u32,
    pub height_px: u32,
    pub point_radius: f64,
    /// Colour per cloud, cycled.
    pub colors: Vec<String>,
    pub overlay_color: String,
    pub title: Option<String>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        PlotStyle {
            x_range: (-2.0, 2.0),
            y_range: (-2.0, 2.0),
            width_px: 480,
            height_px: 480,
            point_radius: 1.5,
            colors: vec!["#1f77b4".into(), "#d62728".into(), "#2ca02c".into(), "#9467bd".into()],
            overlay_color: "#555555".into(),
            title: None,
        }
    }
}

impl PlotStyle {
    /// Square axes around the origin wide enough for every finite point and overlay.
    pub fn fit(clouds: &[&SrgCloud], overlays: &[Overlay]) -> Self {
        let mut r: f64 = 1.0;
        for c in clouds {
            for p in c.finite_points() {
                r = r.max(p.gain);
            }
        }
        for o in overlays {
            r = r.max(match *o {
                Overlay::UnitCircle => 1.0,
                Overlay::Disk { center_re, radius, .. } => center_re.abs() + radius,
                Overlay::VerticalLine { re } => re.abs(),
            });
        }
        let r = if r.is_finite() { r * 1.1 } else { 1.1 };
        PlotStyle {
            x_range: (-r, r),
            y_range: (-r, r),
            ..PlotStyle::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.x_range) || !ok(self.y_range) || self.width_px == 0 || self.height_px == 0 {
            return Err(SrgError::InvalidParameter("plot ranges must be finite and nonempty".into()));
        }
        if self.colors.is_empty() {
            return Err(SrgError::InvalidParameter("at least one colour is required".into()));
        }
        Ok(())
    }

    fn sx(&self, x: f64) -> f64 {
        (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * self.width_px as f64
    }

    fn sy(&self, y: f64) -> f64 {
        (self.y_range.1 - y) / (self.y_range.1 - self.y_range.0) * self.height_px as f64
    }

    fn scale_x(&self) -> f64 {
        self.width_px as f64 / (self.x_range.1 - self.x_range.0)
    }

    fn scale_y(&self) -> f64 {
        self.height_px as f64 / (self.y_range.1 - self.y_range.0)
    }
}

/// Deterministic SVG of one or more clouds. Each stored point is drawn
/// together with its complex conjugate; points at infinity are only counted.
pub fn svg_string(clouds: &[&SrgCloud], overlays: &[Overlay], style: &PlotStyle) -> Result<String> {
    style.validate()?;
    if clouds.is_empty() {
        return Err(SrgError::InvalidParameter("nothing to plot".into()));
    }
    let (w, h) = (style.width_px, style.height_px);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    if let Some(t) = &style.title {
        let _ = writeln!(s, "<title>{}</title>", escape(t));
    }
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);

    // Axes
    let (x0, y0) = (style.sx(0.0), style.sy(0.0));
    let _ = writeln!(
        s,
        r##"<g stroke="#000000" stroke-width="0.75"><line x1="0" y1="{y0:.3}" x2="{w}" y2="{y0:.3}"/><line x1="{x0:.3}" y1="0" x2="{x0:.3}" y2="{h}"/></g>"##
    );

    let oc = &style.overlay_color;
    for o in overlays {
        match *o {
            Overlay::UnitCircle => circle_overlay(&mut s, style, 0.0, 1.0, "2,2", oc),
            Overlay::Disk { center_re, radius, dashed } => {
                circle_overlay(&mut s, style, center_re, radius, if dashed { "6,4" } else { "none" }, oc)
            }
            Overlay::VerticalLine { re } => {
                let x = style.sx(re);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.3}" y1="0" x2="{x:.3}" y2="{h}" stroke="{oc}" stroke-width="1" stroke-dasharray="4,3"/>"#
                );
            }
        }
    }

    for (i, c) in clouds.iter().enumerate() {
        let color = &style.colors[i % style.colors.len()];
        let _ = writeln!(
            s,
            r#"<g fill="{color}" fill-opacity="0.6" data-spec="{}" data-side="{}" data-infinite="{}">"#,
            c.spec,
            c.side,
            c.infinity_count()
        );
        for p in c.finite_points() {
            let (re, im) = (p.re(), p.im());
            for y in [im, -im] {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="{}"/>"#,
                    style.sx(re),
                    style.sy(y),
                    style.point_radius
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

fn circle_overlay(s: &mut String, style: &PlotStyle, center_re: f64, radius: f64, dash: &str, color: &str) {
    let _ = writeln!(
        s,
        r#"<ellipse cx="{:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}" fill="none" stroke="{color}" stroke-width="1" stroke-dasharray="{dash}"/>"#,
        style.sx(center_re),
        style.sy(0.0),
        radius * style.scale_x(),
        radius * style.scale_y()
    );
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(path: &Path, clouds: &[&SrgCloud], overlays: &[Overlay], style: &PlotStyle) -> Result<()> {
    let svg = svg_string(clouds, overlays, style)?;
    fs::write(path, svg).map_err(|e| SrgError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: Vec<SrgPoint>) -> SrgCloud {
        SrgCloud::new(points, PairingSpec::L1Sign, Side::Left, SampleMeta::new("mixed", 3, 42))
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(0.0), "0");
        assert_eq!(format_g17(-2.5), "-2.5");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(std::f64::consts::PI), "3.1415926535897931");
        assert_eq!(format_g17(0.000123), "0.00012300000000000001");
        assert_eq!(format_g17(0.25), "0.25");
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 6.02e23, -7.5e-6] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn rows_follow_conventions() {
        assert_eq!(point_row(&SrgPoint::finite(1.0, 0.0)), "1,0,1,0,0");
        assert_eq!(point_row(&SrgPoint::infinity()), "inf,inf,inf,0,1");
    }

    #[test]
    fn csv_round_trip() {
        let c = cloud(vec![SrgPoint::finite(0.3, 2.0), SrgPoint::infinity(), SrgPoint::zero()]);
        let back = cloud_from_csv(&cloud_to_csv(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn version_and_row_errors() {
        let text = cloud_to_csv(&cloud(vec![SrgPoint::zero()]));
        let wrong = text.replace(CLOUD_FORMAT_VERSION, "srg-cloud/9");
        assert!(matches!(cloud_from_csv(&wrong), Err(SrgError::Version { .. })));
        let bad = format!("{text}1,2,x,0,0\n");
        match cloud_from_csv(&bad) {
            Err(SrgError::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn svg_is_deterministic_and_mirrored() {
        let c = cloud(vec![SrgPoint::finite(1.0, 1.0)]);
        let ov = [Overlay::UnitCircle, Overlay::VerticalLine { re: 0.0 }];
        let style = PlotStyle::fit(&[&c], &ov);
        let a = svg_string(&[&c], &ov, &style).unwrap();
        assert_eq!(a, svg_string(&[&c], &ov, &style).unwrap());
        assert_eq!(a.matches("<circle").count(), 2);
        let bare = svg_string(&[&c], &[], &style).unwrap();
        assert!(!bare.contains("<ellipse"));
        assert!(svg_string(&[], &[], &style).is_err());
    }

    #[test]
    fn duplicate_outputs_rejected() {
        let mut cfg = RunConfig {
            command: "srg".into(),
            spec: PairingSpec::L2Dot,
            side: Side::Left,
            sampler: "mixed".into(),
            n: 1,
            seed: 0,
            seed_source: "default".into(),
            operator: "A1".into(),
            parameters: BTreeMap::new(),
            property: None,
            outputs: BTreeMap::new(),
        };
        cfg.outputs.insert("cloud".into(), "a".into());
        cfg.outputs.insert("svg".into(), "a".into());
        assert!(cfg.validate().is_err());
    }
}
