//! Shape documents, CSV exports and netpbm images.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ShapedPolynomial;
use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::geometry::{CurveSpec, ShapeSet};
use crate::metrics::{Classification, Mask};
use crate::sampler::RootSample;

/// `{"name": ..., "curves": [{"type": "circle", ...}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDocument {
    #[serde(default)]
    pub name: String,
    pub curves: Vec<CurveSpec>,
}

impl ShapeDocument {
    /// Parses JSON, reporting the line and column of any syntax or schema error.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let line = e.line();
            let mut message = format!("line {line}, column {}: {e}", e.column());
            if let Some(src) = text.lines().nth(line.saturating_sub(1)) {
                let _ = write!(message, "\n  | {}", src.trim_end());
            }
            Error::Parse {
                path: path.to_path_buf(),
                message,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Builds the shape without validating it.
    pub fn to_shape(&self) -> Result<ShapeSet> {
        ShapeSet::new(self.curves.clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("shape documents always serialize");
        s.push('\n');
        s
    }
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

/// `curve_index,t,re,im,sigma` at every quadrature node.
pub fn density_csv(sol: &EquilibriumSolution) -> String {
    let mut out = String::from("curve_index,t,re,im,sigma\n");
    for (j, nodes) in sol.discretization().curves().iter().enumerate() {
        let sigma = sol.sigma(j);
        for ((t, z), s) in nodes.params().iter().zip(nodes.points()).zip(sigma.iter()) {
            let _ = writeln!(out, "{j},{t},{},{},{s}", z.re, z.im);
        }
    }
    out
}

/// `index,curve_index,t,re,im`, points shifted back by `offset` into the user's coordinates.
pub fn roots_csv(sample: &RootSample, offset: Complex64) -> String {
    let mut out = String::from("index,curve_index,t,re,im\n");
    for (i, r) in sample.roots.iter().enumerate() {
        let z = r.z - offset;
        let _ = writeln!(out, "{i},{},{},{},{}", r.curve, r.t, z.re, z.im);
    }
    out
}

/// Header block then the roots of `P` in normalized coordinates.
pub fn poly_csv(poly: &ShapedPolynomial) -> String {
    let offset = poly.translation_offset();
    let mut out = String::new();
    let _ = writeln!(out, "n,{}", poly.n());
    let _ = writeln!(out, "delta,{}", poly.delta());
    let _ = writeln!(out, "gamma,{}", poly.gamma());
    let _ = writeln!(out, "log_scale,{}", poly.log_scale());
    let _ = writeln!(out, "offset_re,{}", offset.re);
    let _ = writeln!(out, "offset_im,{}", offset.im);
    out.push_str("index,re,im\n");
    for (i, z) in poly.roots().iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", z.re, z.im);
    }
    out
}

/// Inverse of [`poly_csv`].
pub fn parse_poly_csv(text: &str, path: &Path) -> Result<ShapedPolynomial> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {}: {message}", line + 1),
    };
    let mut lines = text.lines().enumerate();
    let mut header = [0.0; 6];
    let keys = ["n", "delta", "gamma", "log_scale", "offset_re", "offset_im"];
    for (slot, key) in header.iter_mut().zip(keys) {
        let (i, line) = lines.next().ok_or_else(|| err(0, format!("missing `{key}` header")))?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(','))
            .ok_or_else(|| err(i, format!("expected `{key},<value>`")))?;
        *slot = value.trim().parse().map_err(|e| err(i, format!("{key}: {e}")))?;
    }
    match lines.next() {
        Some((_, "index,re,im")) => {}
        Some((i, _)) => return Err(err(i, "expected `index,re,im`".into())),
        None => return Err(err(6, "missing root table".into())),
    }
    let mut roots = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(err(i, format!("expected 3 fields, found {}", fields.len())));
        }
        let re: f64 = fields[1].trim().parse().map_err(|e| err(i, format!("re: {e}")))?;
        let im: f64 = fields[2].trim().parse().map_err(|e| err(i, format!("im: {e}")))?;
        roots.push(Complex64::new(re, im));
    }
    if roots.len() as f64 != header[0] {
        return Err(err(0, format!("header says n = {} but {} roots follow", header[0], roots.len())));
    }
    ShapedPolynomial::new(roots, header[1], header[2], Complex64::new(header[4], header[5]))
}

/// Binary PGM: set pixels 0 (black), others 255.
pub fn pgm(mask: &Mask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 0u8 } else { 255u8 }));
    out
}

/// Binary PPM: Inside black, Outside shaded by escape iteration.
pub fn ppm(c: &Classification) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", c.width(), c.height()).into_bytes();
    for (&inside, &k) in c.inside.bits().iter().zip(&c.iterations) {
        if inside {
            out.extend([0, 0, 0]);
        } else {
            let t = (k.min(24) as f64 / 24.0).sqrt();
            out.extend([
                (255.0 * (1.0 - t)).round() as u8,
                (255.0 * (1.0 - 0.6 * t)).round() as u8,
                255,
            ]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, Discretization};
    use crate::sampler::sample_roots;
    use std::path::PathBuf;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn shape_document_round_trip() {
        let text = r#"{"name": "pair", "curves": [
            {"type": "circle", "center": [0, 0], "radius": 1},
            {"type": "ellipse", "center": [3, 0], "semi_axes": [1, 0.5]}
        ]}"#;
        let doc = ShapeDocument::parse(text, Path::new("pair.json")).unwrap();
        assert_eq!(doc.curves.len(), 2);
        let again = ShapeDocument::parse(&doc.to_json(), Path::new("echo.json")).unwrap();
        assert_eq!(doc, again);
        assert!(doc.to_shape().unwrap().validate().is_empty());
    }

    #[test]
    fn parse_errors_carry_line_context() {
        let text = "{\"curves\": [\n  {\"type\": \"circle\", \"center\": [0, 0], \"radius\": 1,}\n]}";
        match ShapeDocument::parse(text, Path::new("bad.json")) {
            Err(Error::Parse { path, message }) => {
                assert_eq!(path, PathBuf::from("bad.json"));
                assert!(message.starts_with("line 2"), "{message}");
                assert!(message.contains("\"radius\": 1,}"));
            }
            other => panic!("{other:?}"),
        }
        let unknown = r#"{"curves": [{"type": "circle", "center": [0, 0], "radius": 1, "colour": 3}]}"#;
        assert!(matches!(ShapeDocument::parse(unknown, Path::new("u.json")), Err(Error::Parse { .. })));
        let extra = r#"{"curves": [], "scale": 2}"#;
        assert!(ShapeDocument::parse(extra, Path::new("e.json")).is_err());
    }

    #[test]
    fn pgm_bytes_are_exact() {
        let mut m = Mask::new(3, 2);
        m.set(1, 0, true);
        let bytes = pgm(&m);
        let mut expected = b"P5\n3 2\n255\n".to_vec();
        expected.extend([255, 0, 255, 255, 255, 255]);
        assert_eq!(bytes, expected);
    }

    #[test]
    fn poly_csv_round_trip() {
        let shape = ShapeSet::new(vec![CurveSpec::circle(c(5.0, 0.0), 1.0)]).unwrap().normalize_origin();
        let sol = solve_equilibrium(Discretization::new(&shape, 32).unwrap()).unwrap();
        let sample = sample_roots(&sol, 8).unwrap();
        let poly = ShapedPolynomial::new(sample.points(), 0.1, sol.robin_gamma(), shape.translation_applied()).unwrap();
        let text = poly_csv(&poly);
        assert!(text.starts_with("n,8\ndelta,0.1\n"));
        let back = parse_poly_csv(&text, Path::new("poly.csv")).unwrap();
        assert_eq!(back.roots(), poly.roots());
        assert_eq!(back.translation_offset(), poly.translation_offset());
        assert_eq!(back.gamma().to_bits(), poly.gamma().to_bits());

        let roots = roots_csv(&sample, shape.translation_applied());
        let first: Vec<f64> = roots.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
        assert!((c(first[3], first[4]) - c(6.0, 0.0)).norm() < 1e-12);

        let density = density_csv(&sol);
        assert_eq!(density.lines().count(), 33);
        assert!(density.starts_with("curve_index,t,re,im,sigma\n"));
    }

    #[test]
    fn malformed_poly_csv_is_rejected() {
        let p = Path::new("p.csv");
        assert!(parse_poly_csv("n,2\n", p).is_err());
        let short = "n,2\ndelta,0.1\ngamma,0\nlog_scale,-0.2\noffset_re,0\noffset_im,0\nindex,re,im\n0,1,0\n";
        assert!(parse_poly_csv(short, p).is_err());
    }
}
