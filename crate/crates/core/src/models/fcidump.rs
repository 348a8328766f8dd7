//! FCIDUMP integrals and the companion dipole-integral file.
//!
//! FCIDUMP records are `value i j k l` with 1-based orbital indices in
//! chemists' notation `(ij|kl)`; `i j 0 0` is a one-body integral and
//! `0 0 0 0` the core energy. The dipole file holds `COMPONENT X|Y|Z` tag
//! lines, each followed by `value i j 0 0` records; `0 0 0 0` is the
//! constant (nuclear) part of that component.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Magnitude below which integrals are not written out.
const WRITE_CUTOFF: f64 = 1e-14;

/// One- and two-electron integrals in a spatial-orbital basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularIntegrals {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    /// `2·M_s`.
    pub ms2: i32,
    /// Point-group irrep label per orbital (1-based as in the file); empty
    /// when absent.
    pub orbsym: Vec<u32>,
    pub isym: u32,
    pub core_energy: f64,
    pub h: DMatrix<f64>,
    /// `(pq|rs)` stored densely at `((p·n + q)·n + r)·n + s`.
    eri: Vec<f64>,
    /// `μ_x, μ_y, μ_z` one-body matrices.
    pub dipole: [DMatrix<f64>; 3],
    /// Constant part of each dipole component.
    pub dipole_core: [f64; 3],
}

impl MolecularIntegrals {
    pub fn zeros(n_orbitals: usize, n_electrons: usize, ms2: i32) -> Self {
        let n = n_orbitals;
        Self {
            n_orbitals,
            n_electrons,
            ms2,
            orbsym: Vec::new(),
            isym: 1,
            core_energy: 0.0,
            h: DMatrix::zeros(n, n),
            eri: vec![0.0; n * n * n * n],
            dipole: [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)],
            dipole_core: [0.0; 3],
        }
    }

    fn eri_index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_orbitals;
        ((p * n + q) * n + r) * n + s
    }

    /// `(pq|rs)`, 0-based.
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[self.eri_index(p, q, r, s)]
    }

    /// Sets `(pq|rs)` and its seven permutational partners.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let k = self.eri_index(a, b, c, d);
            self.eri[k] = value;
        }
    }

    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        self.h[(p, q)] = value;
        self.h[(q, p)] = value;
    }

    pub fn set_dipole(&mut self, component: usize, p: usize, q: usize, value: f64) {
        self.dipole[component][(p, q)] = value;
        self.dipole[component][(q, p)] = value;
    }

    /// Reads an FCIDUMP file and, optionally, its dipole companion.
    pub fn from_files(fcidump: &Path, dipoles: Option<&Path>) -> Result<Self> {
        let mut ints = parse_fcidump(fcidump)?;
        if let Some(path) = dipoles {
            let (matrices, core) = parse_dipole_file(path, ints.n_orbitals)?;
            ints.dipole = matrices;
            ints.dipole_core = core;
        }
        Ok(ints)
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_float(token: &str) -> Option<f64> {
    token.replace(['D', 'd'], "E").parse().ok()
}

fn parse_index(token: &str, n: usize) -> std::result::Result<usize, String> {
    let k: usize = token
        .parse()
        .map_err(|_| format!("orbital index {token:?} is not a non-negative integer"))?;
    if k > n {
        return Err(format!("orbital index {k} exceeds NORB = {n}"));
    }
    Ok(k)
}

struct Header {
    values: BTreeMap<String, Vec<String>>,
    body_start: usize,
}

fn parse_header(path: &Path, text: &str) -> Result<Header> {
    let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut started = false;
    let mut current: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let mut line = raw.trim().to_string();
        if !started {
            if line.is_empty() {
                continue;
            }
            let upper = line.to_ascii_uppercase();
            if !upper.starts_with("&FCI") {
                return Err(parse_error(path, k + 1, "expected &FCI namelist header"));
            }
            started = true;
            line = line[4..].to_string();
        }
        let upper = line.to_ascii_uppercase();
        let (body, done) = match upper.find("&END").or_else(|| upper.find('/')) {
            Some(pos) => (line[..pos].to_string(), true),
            None => (line, false),
        };
        for token in body.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
            match token.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim().to_ascii_uppercase();
                    let entry = values.entry(key.clone()).or_default();
                    entry.clear();
                    if !value.is_empty() {
                        entry.push(value.to_string());
                    }
                    current = Some(key);
                }
                None => match &current {
                    Some(key) => values.get_mut(key).expect("key inserted").push(token.to_string()),
                    None => return Err(parse_error(path, k + 1, format!("value {token:?} without a key"))),
                },
            }
        }
        if done {
            return Ok(Header {
                values,
                body_start: k + 1,
            });
        }
    }
    Err(parse_error(
        path,
        text.lines().count(),
        "namelist header not terminated by &END",
    ))
}

fn header_int(path: &Path, h: &Header, key: &str, default: Option<i64>) -> Result<i64> {
    match h.values.get(key).and_then(|v| v.first()) {
        Some(v) => v
            .parse()
            .map_err(|_| parse_error(path, 1, format!("{key} = {v:?} is not an integer"))),
        None => default.ok_or_else(|| parse_error(path, 1, format!("missing {key} in header"))),
    }
}

/// Parses FCIDUMP text; `path` is used for error messages only.
pub fn parse_fcidump_str(text: &str, path: &Path) -> Result<MolecularIntegrals> {
    let header = parse_header(path, text)?;
    let norb = header_int(path, &header, "NORB", None)?;
    let nelec = header_int(path, &header, "NELEC", None)?;
    let ms2 = header_int(path, &header, "MS2", Some(0))?;
    let isym = header_int(path, &header, "ISYM", Some(1))?;
    if norb <= 0 || norb > 32 {
        return Err(parse_error(path, 1, format!("NORB = {norb} out of range")));
    }
    if nelec < 0 || nelec > 2 * norb {
        return Err(parse_error(path, 1, format!("NELEC = {nelec} out of range")));
    }
    let n = norb as usize;
    let mut ints = MolecularIntegrals::zeros(n, nelec as usize, ms2 as i32);
    ints.isym = isym as u32;
    if let Some(sym) = header.values.get("ORBSYM") {
        ints.orbsym = sym
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| parse_error(path, 1, format!("ORBSYM entry {s:?} is not an integer")))
            })
            .collect::<Result<_>>()?;
        if ints.orbsym.len() != n {
            return Err(parse_error(
                path,
                1,
                format!("ORBSYM has {} entries for NORB = {n}", ints.orbsym.len()),
            ));
        }
    }
    for (k, line) in text.lines().enumerate().skip(header.body_start) {
        let lineno = k + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(parse_error(
                path,
                lineno,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let value = parse_float(fields[0])
            .ok_or_else(|| parse_error(path, lineno, format!("non-numeric value {:?}", fields[0])))?;
        let idx = fields[1..]
            .iter()
            .map(|t| parse_index(t, n))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| parse_error(path, lineno, m))?;
        match (idx[0], idx[1], idx[2], idx[3]) {
            (0, 0, 0, 0) => ints.core_energy = value,
            (i, j, 0, 0) if i > 0 && j > 0 => ints.set_h(i - 1, j - 1, value),
            (i, 0, 0, 0) if i > 0 => {}
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => ints.set_eri(i - 1, j - 1, k - 1, l - 1, value),
            _ => {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("index pattern {:?} is not a recognized record", idx),
                ))
            }
        }
    }
    Ok(ints)
}

pub fn parse_fcidump(path: &Path) -> Result<MolecularIntegrals> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump_str(&text, path)
}

/// Parses dipole text into `([μ_x, μ_y, μ_z], constants)`.
pub fn parse_dipole_str(text: &str, path: &Path, n_orbitals: usize) -> Result<([DMatrix<f64>; 3], [f64; 3])> {
    let n = n_orbitals;
    let mut matrices = [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    let mut core = [0.0; 3];
    let mut component: Option<usize> = None;
    for (k, raw) in text.lines().enumerate() {
        let lineno = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('!') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0].eq_ignore_ascii_case("COMPONENT") {
            let axis = fields.get(1).map(|s| s.to_ascii_uppercase());
            component = match axis.as_deref() {
                Some("X") => Some(0),
                Some("Y") => Some(1),
                Some("Z") => Some(2),
                _ => return Err(parse_error(path, lineno, "COMPONENT must be followed by X, Y or Z")),
            };
            if fields.len() != 2 {
                return Err(parse_error(path, lineno, "unexpected text after component tag"));
            }
            continue;
        }
        let c = component.ok_or_else(|| parse_error(path, lineno, "record before any COMPONENT tag"))?;
        if fields.len() != 5 {
            return Err(parse_error(
                path,
                lineno,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let value = parse_float(fields[0])
            .ok_or_else(|| parse_error(path, lineno, format!("non-numeric value {:?}", fields[0])))?;
        let idx = fields[1..]
            .iter()
            .map(|t| parse_index(t, n))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| parse_error(path, lineno, m))?;
        match (idx[0], idx[1], idx[2], idx[3]) {
            (0, 0, 0, 0) => core[c] = value,
            (i, j, 0, 0) if i > 0 && j > 0 => {
                matrices[c][(i - 1, j - 1)] = value;
                matrices[c][(j - 1, i - 1)] = value;
            }
            _ => {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("dipole records take the form `value i j 0 0`, got {:?}", idx),
                ))
            }
        }
    }
    Ok((matrices, core))
}

pub fn parse_dipole_file(path: &Path, n_orbitals: usize) -> Result<([DMatrix<f64>; 3], [f64; 3])> {
    let text = std::fs::read_to_string(path)?;
    parse_dipole_str(&text, path, n_orbitals)
}

fn record(out: &mut String, value: f64, i: usize, j: usize, k: usize, l: usize) {
    writeln!(out, "{value:>24.16e} {i:>3} {j:>3} {k:>3} {l:>3}").expect("write to string");
}

/// FCIDUMP text with each symmetry-unique integral written once.
pub fn fcidump_to_string(ints: &MolecularIntegrals) -> String {
    let n = ints.n_orbitals;
    let mut out = String::new();
    writeln!(out, " &FCI NORB={},NELEC={},MS2={},", n, ints.n_electrons, ints.ms2).expect("write");
    if !ints.orbsym.is_empty() {
        let labels: Vec<String> = ints.orbsym.iter().map(u32::to_string).collect();
        writeln!(out, "  ORBSYM={},", labels.join(",")).expect("write");
    }
    writeln!(out, "  ISYM={},", ints.isym).expect("write");
    writeln!(out, " &END").expect("write");
    let pair = |a: usize, b: usize| a * (a + 1) / 2 + b;
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if pair(i, j) < pair(k, l) {
                        continue;
                    }
                    let v = ints.eri(i, j, k, l);
                    if v.abs() > WRITE_CUTOFF {
                        record(&mut out, v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ints.h[(i, j)];
            if v.abs() > WRITE_CUTOFF {
                record(&mut out, v, i + 1, j + 1, 0, 0);
            }
        }
    }
    record(&mut out, ints.core_energy, 0, 0, 0, 0);
    out
}

pub fn write_fcidump(ints: &MolecularIntegrals, path: &Path) -> Result<()> {
    std::fs::write(path, fcidump_to_string(ints))?;
    Ok(())
}

pub fn dipole_to_string(ints: &MolecularIntegrals) -> String {
    let mut out = String::new();
    for (c, axis) in ["X", "Y", "Z"].iter().enumerate() {
        writeln!(out, "COMPONENT {axis}").expect("write");
        let m = &ints.dipole[c];
        for i in 0..ints.n_orbitals {
            for j in 0..=i {
                if m[(i, j)].abs() > WRITE_CUTOFF {
                    record(&mut out, m[(i, j)], i + 1, j + 1, 0, 0);
                }
            }
        }
        if ints.dipole_core[c] != 0.0 {
            record(&mut out, ints.dipole_core[c], 0, 0, 0, 0);
        }
    }
    out
}

pub fn write_dipole_file(ints: &MolecularIntegrals, path: &Path) -> Result<()> {
    std::fs::write(path, dipole_to_string(ints))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.fcidump")
    }

    #[test]
    fn one_orbital_echo() {
        let text = " &FCI NORB=1,NELEC=2,MS2=0,\n  ORBSYM=1,\n  ISYM=1,\n &END\n -1.0 1 1 0 0\n 0.5 0 0 0 0\n";
        let ints = parse_fcidump_str(text, p()).unwrap();
        assert_eq!(ints.n_orbitals, 1);
        assert_eq!(ints.n_electrons, 2);
        assert_eq!(ints.h[(0, 0)], -1.0);
        assert_eq!(ints.core_energy, 0.5);
        assert_eq!(ints.orbsym, vec![1]);
    }

    #[test]
    fn canonical_records_expand_eightfold() {
        let text = "&FCI NORB=3, NELEC=2, &END\n0.25 2 1 3 1\n";
        let ints = parse_fcidump_str(text, p()).unwrap();
        let (a, b, c, d) = (1, 0, 2, 0);
        for (i, j, k, l) in [
            (a, b, c, d),
            (b, a, c, d),
            (a, b, d, c),
            (b, a, d, c),
            (c, d, a, b),
            (d, c, a, b),
            (c, d, b, a),
            (d, c, b, a),
        ] {
            assert_eq!(ints.eri(i, j, k, l), 0.25);
        }
        assert_eq!(ints.eri(0, 0, 1, 2), 0.0);
    }

    #[test]
    fn fortran_exponents_and_multiline_header() {
        let text = " &FCI NORB=2,\n NELEC=2,MS2=0,\n ORBSYM=1,\n 2,\n ISYM=1\n /\n 1.5D-01 1 1 1 1\n";
        let ints = parse_fcidump_str(text, p()).unwrap();
        assert_eq!(ints.orbsym, vec![1, 2]);
        assert!((ints.eri(0, 0, 0, 0) - 0.15).abs() < 1e-16);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_value = "&FCI NORB=2,NELEC=2 &END\n0.1 1 1 0 0\nabc 1 1 0 0\n";
        match parse_fcidump_str(bad_value, p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_index = "&FCI NORB=2,NELEC=2 &END\n0.1 3 1 0 0\n";
        match parse_fcidump_str(bad_index, p()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("exceeds"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_fcidump_str("NORB=2\n", p()).is_err());
        assert!(parse_fcidump_str("&FCI NELEC=2 &END\n", p()).is_err());
        assert!(parse_fcidump_str("&FCI NORB=2,NELEC=2 &END\n0.1 1 0 1 0\n", p()).is_err());
    }

    #[test]
    fn dipole_file_components() {
        let text = "# test\nCOMPONENT X\n 0.3 2 1 0 0\nCOMPONENT Z\n -0.1 1 1 0 0\n 2.0 0 0 0 0\n";
        let (m, core) = parse_dipole_str(text, p(), 2).unwrap();
        assert_eq!(m[0][(0, 1)], 0.3);
        assert_eq!(m[0][(1, 0)], 0.3);
        assert_eq!(m[1].norm(), 0.0);
        assert_eq!(m[2][(0, 0)], -0.1);
        assert_eq!(core, [0.0, 0.0, 2.0]);
        assert!(matches!(
            parse_dipole_str("0.3 1 1 0 0\n", p(), 2),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_dipole_str("COMPONENT W\n", p(), 2).is_err());
        assert!(parse_dipole_str("COMPONENT X\n0.1 1 1 1 0\n", p(), 2).is_err());
    }

    #[test]
    fn write_parse_round_trip() {
        let mut ints = MolecularIntegrals::zeros(3, 4, 0);
        ints.orbsym = vec![1, 3, 2];
        ints.core_energy = 1.2345678901234567;
        ints.set_h(0, 0, -1.1);
        ints.set_h(1, 0, 0.123456789012345);
        ints.set_h(2, 2, -0.3);
        ints.set_eri(0, 0, 0, 0, 0.7);
        ints.set_eri(1, 0, 2, 1, -0.0123);
        ints.set_eri(2, 2, 1, 1, 0.4);
        ints.set_dipole(0, 1, 0, 0.55);
        ints.set_dipole(1, 2, 0, -0.45);
        ints.dipole_core = [0.0, 0.0, 3.5];
        let back = parse_fcidump_str(&fcidump_to_string(&ints), p()).unwrap();
        let (dip, core) = parse_dipole_str(&dipole_to_string(&ints), p(), 3).unwrap();
        assert_eq!(back.orbsym, ints.orbsym);
        assert!((back.core_energy - ints.core_energy).abs() < 1e-12);
        assert!((back.h.clone() - ints.h.clone()).norm() < 1e-12);
        for (a, b) in back.eri.iter().zip(&ints.eri) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in dip.iter().zip(&ints.dipole) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(core, ints.dipole_core);
    }
}
