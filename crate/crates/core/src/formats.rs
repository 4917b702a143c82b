//! Text file formats: polyline lists, page properties and synthesis specs.
//!
//! Polyline files hold one polyline per line as `x1,y1;x2,y2;...` (origin
//! top-left). Config files are `key=value` lines; blank lines and lines
//! starting with `#` are ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::docmodel::DocumentProperties;
use crate::error::{Error, Result};
use crate::geometry::{Point, Polyline};
use crate::synth::SynthSpec;

fn parse_point(tok: &str, line: usize) -> Result<Point> {
    let (x, y) = tok
        .split_once(',')
        .ok_or_else(|| Error::parse(line, format!("expected `x,y`, got `{tok}`")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(line, format!("bad coordinate `{}`", s.trim())))
    };
    Ok(Point::new(num(x)?, num(y)?))
}

/// Parses a polyline file. Blank lines are skipped; consecutive duplicate
/// points are merged.
pub fn parse_polylines(text: &str) -> Result<Vec<Polyline>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        let points = body
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| parse_point(t, line))
            .collect::<Result<Vec<_>>>()?;
        let poly = Polyline::from_points_dedup(points)
            .map_err(|e| Error::parse(line, format!("not a polyline: {e}")))?;
        out.push(poly);
    }
    Ok(out)
}

/// Serializes polylines with coordinates rounded to integers. Lines that
/// collapse to a single point after rounding are omitted.
pub fn format_polylines(lines: &[Polyline]) -> String {
    let mut out = String::new();
    for line in lines {
        let mut pts: Vec<(i64, i64)> = line
            .points()
            .iter()
            .map(|p| (p.x.round() as i64, p.y.round() as i64))
            .collect();
        pts.dedup();
        if pts.len() < 2 {
            continue;
        }
        let body: Vec<String> = pts.iter().map(|(x, y)| format!("{x},{y}")).collect();
        out.push_str(&body.join(";"));
        out.push('\n');
    }
    out
}

/// `key=value` pairs with their line numbers.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, format!("expected `key=value`, got `{body}`")))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(line, format!("bad value `{v}` for `{key}`")))
}

/// Parses `spac`, `dblp`, `lnds` and `notxt`; all four are required.
pub fn parse_properties(text: &str) -> Result<DocumentProperties> {
    let mut vals: [Option<f64>; 4] = [None; 4];
    let keys = ["spac", "dblp", "lnds", "notxt"];
    for (line, k, v) in parse_key_values(text)? {
        let slot = keys
            .iter()
            .position(|&name| name == k)
            .ok_or_else(|| Error::parse(line, format!("unknown property `{k}`")))?;
        vals[slot] = Some(parse_value(line, &k, &v)?);
    }
    let get = |i: usize| {
        vals[i].ok_or_else(|| Error::InvalidParameter(format!("property `{}` is missing", keys[i])))
    };
    DocumentProperties::new(get(0)?, get(1)?, get(2)?, get(3)?)
}

pub fn format_properties(props: &DocumentProperties) -> String {
    props
        .entries()
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}

/// Parses a synthesis spec. Missing keys take their defaults:
///
/// ```text
/// page_w=1600  page_h=2000  n_lines=24  leading=60  skew=1
/// columns=1    margin_text=false        seed=1
/// ```
pub fn parse_synth_spec(text: &str) -> Result<SynthSpec> {
    let mut spec = SynthSpec::default();
    for (line, k, v) in parse_key_values(text)? {
        match k.as_str() {
            "page_w" => spec.page_w = parse_value(line, &k, &v)?,
            "page_h" => spec.page_h = parse_value(line, &k, &v)?,
            "n_lines" => spec.n_lines = parse_value(line, &k, &v)?,
            "leading" => spec.leading = parse_value(line, &k, &v)?,
            "skew" => spec.skew = parse_value(line, &k, &v)?,
            "columns" => spec.columns = parse_value(line, &k, &v)?,
            "margin_text" => spec.margin_text = parse_value(line, &k, &v)?,
            "seed" => spec.seed = parse_value(line, &k, &v)?,
            _ => return Err(Error::parse(line, format!("unknown key `{k}`"))),
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn format_synth_spec(spec: &SynthSpec) -> String {
    format!(
        "page_w={}\npage_h={}\nn_lines={}\nleading={}\nskew={}\ncolumns={}\nmargin_text={}\nseed={}\n",
        spec.page_w, spec.page_h, spec.n_lines, spec.leading, spec.skew, spec.columns, spec.margin_text, spec.seed
    )
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let file_err = |source| Error::File {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(data)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(file_err)
}
