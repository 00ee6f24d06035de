//! Serialization helpers: 17-significant-digit floats in CSV and JSON,
//! binary PGM masks and run-length encoded masks.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

/// Formats a float with 17 significant digits (round-trip exact).
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON formatter writing every float with 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Digits17<'_> {
    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Pretty-printed JSON with 17-significant-digit floats. Non-finite floats
/// become `null`.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    v.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

/// Simple CSV table; floats are written with [`fmt17`].
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::F(v) => fmt17(v),
                    Cell::I(v) => v.to_string(),
                    Cell::S(s) => s,
                })
                .collect(),
        );
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Binary PGM (P5) of a row-major image whose first row is the top.
pub fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    pgm_bytes_with_comment(width, height, None, pixels)
}

/// As [`pgm_bytes`], with a single-line `#` comment in the header.
pub fn pgm_bytes_with_comment(width: usize, height: usize, comment: Option<&str>, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = String::from("P5\n");
    if let Some(c) = comment {
        assert!(!c.contains('\n'), "comment must be one line");
        out.push_str(&format!("# {c}\n"));
    }
    let mut out = format!("{out}{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Parses an 8-bit P5 image; header comments are skipped.
pub fn parse_pgm(bytes: &[u8]) -> Option<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if bytes.get(i) == Some(&b'#') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..i]).ok()?.to_string());
    }
    if fields[0] != "P5" {
        return None;
    }
    let w: usize = fields[1].parse().ok()?;
    let h: usize = fields[2].parse().ok()?;
    let data = bytes.get(i + 1..i + 1 + w * h)?.to_vec();
    Some((w, h, data))
}

/// Run-length encoding of a row-major boolean mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthMask {
    pub width: usize,
    pub height: usize,
    /// Value of the first run.
    pub first: bool,
    /// Alternating run lengths.
    pub runs: Vec<usize>,
}

impl RunLengthMask {
    pub fn encode(width: usize, height: usize, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), width * height);
        let first = mask.first().copied().unwrap_or(false);
        let mut runs = Vec::new();
        let mut cur = first;
        let mut len = 0;
        for &m in mask {
            if m == cur {
                len += 1;
            } else {
                runs.push(len);
                cur = m;
                len = 1;
            }
        }
        if len > 0 {
            runs.push(len);
        }
        Self {
            width,
            height,
            first,
            runs,
        }
    }

    pub fn decode(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.width * self.height);
        let mut v = self.first;
        for &r in &self.runs {
            out.extend(std::iter::repeat(v).take(r));
            v = !v;
        }
        out
    }
}

/// Writes through a temporary file in the same directory and renames it, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 8.189805654106, 1e22] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }

    #[test]
    fn json_floats_use_seventeen_digits() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: Vec<f64>,
            n: usize,
        }
        let s = to_json(&R { a: 0.1, b: vec![2.0], n: 3 }).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("2.0000000000000000e0"), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.1));
        assert_eq!(v["n"].as_u64(), Some(3));
    }

    #[test]
    fn pgm_and_run_length_round_trip() {
        let mask = vec![false, false, true, true, true, false, true, false, false, false, false, true];
        let rle = RunLengthMask::encode(4, 3, &mask);
        assert_eq!(rle.decode(), mask);
        assert_eq!(rle.runs.iter().sum::<usize>(), 12);
        let px: Vec<u8> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
        let (w, h, data) = parse_pgm(&pgm_bytes(4, 3, &px)).unwrap();
        assert_eq!((w, h), (4, 3));
        assert_eq!(data, px);
        // A comment line, and pixel bytes that look like whitespace or '#'.
        let px = vec![b'#', b' ', b'\n', 255, 0, 35];
        let bytes = pgm_bytes_with_comment(3, 2, Some("config_hash abc"), &px);
        assert!(bytes.starts_with(b"P5\n# config_hash abc\n3 2\n255\n"));
        assert_eq!(parse_pgm(&bytes).unwrap(), (3, 2, px));
    }

    #[test]
    fn csv_renders_header_and_rows() {
        let mut t = CsvTable::new(&["l", "g"]);
        t.push(vec![2usize.into(), 0.5.into()]);
        assert_eq!(t.render(), "l,g\n2,5.0000000000000000e-1\n");
    }
}
