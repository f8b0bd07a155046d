//! Benchmark systems and the JSON matrix container.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use num_traits::Zero;
use serde_json::Value;

use crate::jordan::{JordanChain, JordanError};
use crate::linalg::{ComplexMatrix, Real, C64};

/// Parameters of the graded gain/loss array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusyParams {
    pub n: usize,
    pub omega0: f64,
    pub gamma: f64,
    pub j: f64,
}

impl SusyParams {
    /// The array at its exceptional point, `gamma = J`.
    pub fn at_ep(n: usize, omega0: f64, j: f64) -> Self {
        Self { n, omega0, gamma: j, j }
    }
}

/// Diagonal `omega0 + i gamma (N + 1 - 2m)`, couplings `J sqrt(m (N - m))`.
pub fn susy_hamiltonian<T: Real>(p: &SusyParams) -> ComplexMatrix<T> {
    assert!(p.n >= 2, "array needs at least two sites");
    let n = p.n;
    let (omega0, gamma, j) = (T::from_f64(p.omega0), T::from_f64(p.gamma), T::from_f64(p.j));
    let coupling = |m: usize| j * T::from_f64((m * (n - m)) as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |r, c| {
        if r == c {
            let grade = (n + 1) as f64 - 2.0 * (r + 1) as f64;
            Complex::new(omega0, gamma * T::from_f64(grade))
        } else if c == r + 1 {
            Complex::new(coupling(r + 1), T::zero())
        } else if r == c + 1 {
            Complex::new(coupling(c + 1), T::zero())
        } else {
            Complex::zero()
        }
    })
}

/// The five labelled perturbation matrices of the four-site array, in the
/// site basis `(c1, c2, c3, c4)` with `c_a^dagger c_b` at entry `(a, b)`.
pub fn susy_perturbations<T: Real>(j: f64) -> Vec<(String, ComplexMatrix<T>)> {
    let jt = T::from_f64(j);
    let s3 = T::from_f64(3.0).sqrt();
    let half = T::from_f64(0.5);
    let re = |x: T| Complex::new(x, T::zero());
    let im = |x: T| Complex::new(T::zero(), x);
    let build = |entries: Vec<((usize, usize), Complex<T>)>| {
        let mut m = ComplexMatrix::zeros(4, 4);
        for ((a, b), z) in entries {
            m[(a - 1, b - 1)] = z;
        }
        m
    };

    let p1 = build(vec![((1, 4), re(jt / T::from_f64(6.0)))]);
    let c2 = jt / (T::from_f64(4.0) * s3);
    let p2 = build(vec![((1, 3), re(c2)), ((2, 4), re(c2))]);
    let p3 = build(vec![
        ((1, 4), re(T::from_f64(1.5) * jt)),
        ((2, 3), re(half * jt)),
        ((1, 3), im(half * s3 * jt)),
        ((2, 4), im(-(half * s3 * jt))),
    ]);
    let p4 = build(vec![
        ((2, 2), re(jt)),
        ((3, 3), re(jt)),
        ((1, 3), re(s3 * jt)),
        ((2, 4), re(s3 * jt)),
        ((1, 2), im(s3 * jt)),
        ((3, 4), im(-(s3 * jt))),
    ]);
    let j2 = jt * jt;
    let p5 = build(vec![
        ((3, 4), im(j2)),
        ((4, 3), im(-j2)),
        ((1, 2), im(-j2)),
        ((2, 1), im(j2)),
        ((1, 3), re(-j2)),
        ((3, 1), re(j2)),
        ((2, 4), re(-j2)),
        ((4, 2), re(j2)),
    ]);
    [p1, p2, p3, p4, p5].into_iter().enumerate().map(|(k, m)| (format!("p{}", k + 1), m)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed JSON at line {line}, column {column}: {msg}")]
    Syntax { path: PathBuf, line: usize, column: usize, msg: String },
    #[error("{path}: field `{field}`: {msg}")]
    Field { path: PathBuf, field: String, msg: String },
    #[error("{path}: dimension mismatch: {msg}")]
    Dimension { path: PathBuf, msg: String },
    #[error("{path}: non-finite value at `{field}`")]
    NonFinite { path: PathBuf, field: String },
    #[error("{path}: {source}")]
    Chain { path: PathBuf, source: JordanError },
}

impl ModelError {
    /// True for failures reading or writing the file itself.
    pub fn is_io(&self) -> bool {
        matches!(self, ModelError::Io { .. })
    }
}

/// A matrix plus the optional metadata of the JSON container.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub matrix: ComplexMatrix,
    pub label: Option<String>,
    pub e0: Option<C64>,
    pub order: Option<usize>,
}

impl MatrixFile {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Self { matrix, label: None, e0: None, order: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let root = read_json(path)?;
        let ctx = Ctx { path };
        let obj = root.as_object().ok_or_else(|| ctx.field("<root>", "expected an object"))?;
        let n = ctx.usize_field(obj.get("n"), "n")?;
        let matrix = ctx.matrix(obj.get("data"), "data", n)?;
        let label = match obj.get("label") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(ctx.field("label", "expected a string")),
        };
        let e0 = match obj.get("e0") {
            None | Some(Value::Null) => None,
            Some(v) => Some(ctx.complex(v, "e0")?),
        };
        let order = match obj.get("order") {
            None | Some(Value::Null) => None,
            v => Some(ctx.usize_field(v, "order")?),
        };
        Ok(Self { matrix, label, e0, order })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = String::from("{\n");
        let _ = writeln!(s, "  \"n\": {},", self.matrix.rows());
        if let Some(label) = &self.label {
            let _ = writeln!(s, "  \"label\": {},", Value::String(label.clone()));
        }
        if let Some(e0) = self.e0 {
            let _ = writeln!(s, "  \"e0\": {},", complex_json(e0));
        }
        if let Some(order) = self.order {
            let _ = writeln!(s, "  \"order\": {order},");
        }
        let _ = writeln!(s, "  \"data\": {}", matrix_json(&self.matrix, "  "));
        s.push_str("}\n");
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        write_text(path.as_ref(), &self.to_json_string())
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<MatrixFile, ModelError> {
    MatrixFile::load(path)
}

pub fn save_matrix(m: &ComplexMatrix, path: impl AsRef<Path>) -> Result<(), ModelError> {
    MatrixFile::new(m.clone()).save(path)
}

/// Chain container `{ "n", "e0", "U", "V" }`.
pub fn chain_to_json_string(chain: &JordanChain) -> String {
    format!(
        "{{\n  \"n\": {},\n  \"e0\": {},\n  \"U\": {},\n  \"V\": {}\n}}\n",
        chain.order(),
        complex_json(chain.e0()),
        matrix_json(chain.u(), "  "),
        matrix_json(chain.v(), "  "),
    )
}

pub fn save_chain(chain: &JordanChain, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_text(path.as_ref(), &chain_to_json_string(chain))
}

pub fn load_chain(path: impl AsRef<Path>) -> Result<JordanChain, ModelError> {
    let path = path.as_ref();
    let root = read_json(path)?;
    let ctx = Ctx { path };
    let obj = root.as_object().ok_or_else(|| ctx.field("<root>", "expected an object"))?;
    let n = ctx.usize_field(obj.get("n"), "n")?;
    let e0 = ctx.complex(obj.get("e0").unwrap_or(&Value::Null), "e0")?;
    let u = ctx.matrix(obj.get("U"), "U", n)?;
    let v = ctx.matrix(obj.get("V"), "V", n)?;
    JordanChain::from_parts(e0, u, v).map_err(|source| ModelError::Chain { path: path.to_path_buf(), source })
}

/// A double with 17 significant digits, which round-trips exactly.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex_json(z: C64) -> String {
    format!("[{}, {}]", format_f64(z.re), format_f64(z.im))
}

fn matrix_json(m: &ComplexMatrix, indent: &str) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|r| {
            let cells: Vec<String> = m.row(r).iter().map(|z| complex_json(*z)).collect();
            format!("{indent}  [{}]", cells.join(", "))
        })
        .collect();
    format!("[\n{}\n{indent}]", rows.join(",\n"))
}

fn write_text(path: &Path, text: &str) -> Result<(), ModelError> {
    fs::write(path, text).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
}

fn read_json(path: &Path) -> Result<Value, ModelError> {
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| ModelError::Syntax {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

struct Ctx<'a> {
    path: &'a Path,
}

impl Ctx<'_> {
    fn field(&self, field: &str, msg: &str) -> ModelError {
        ModelError::Field { path: self.path.to_path_buf(), field: field.to_string(), msg: msg.to_string() }
    }

    fn usize_field(&self, v: Option<&Value>, name: &str) -> Result<usize, ModelError> {
        let v = v.ok_or_else(|| self.field(name, "missing"))?;
        match v.as_u64() {
            Some(k) if k > 0 => Ok(k as usize),
            _ => Err(self.field(name, "expected a positive integer")),
        }
    }

    fn number(&self, v: &Value, name: &str) -> Result<f64, ModelError> {
        match v {
            Value::Number(x) => {
                let f = x.as_f64().ok_or_else(|| self.field(name, "not representable as a double"))?;
                if f.is_finite() {
                    Ok(f)
                } else {
                    Err(ModelError::NonFinite { path: self.path.to_path_buf(), field: name.to_string() })
                }
            }
            Value::String(s) if s.trim().parse::<f64>().is_ok_and(|f| !f.is_finite()) => {
                Err(ModelError::NonFinite { path: self.path.to_path_buf(), field: name.to_string() })
            }
            _ => Err(self.field(name, "expected a number")),
        }
    }

    fn complex(&self, v: &Value, name: &str) -> Result<C64, ModelError> {
        match v.as_array().map(Vec::as_slice) {
            Some([re, im]) => {
                Ok(C64::new(self.number(re, &format!("{name}[0]"))?, self.number(im, &format!("{name}[1]"))?))
            }
            _ => Err(self.field(name, "expected a [re, im] pair")),
        }
    }

    fn matrix(&self, v: Option<&Value>, name: &str, n: usize) -> Result<ComplexMatrix, ModelError> {
        let rows = v
            .ok_or_else(|| self.field(name, "missing"))?
            .as_array()
            .ok_or_else(|| self.field(name, "expected an array of rows"))?;
        let dim = |msg: String| ModelError::Dimension { path: self.path.to_path_buf(), msg };
        if rows.len() != n {
            return Err(dim(format!("n = {n} but `{name}` has {} rows", rows.len())));
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| self.field(&format!("{name}[{r}]"), "expected an array"))?;
            if row.len() != n {
                return Err(dim(format!("n = {n} but `{name}[{r}]` has {} entries", row.len())));
            }
            for (c, z) in row.iter().enumerate() {
                data.push(self.complex(z, &format!("{name}[{r}][{c}]"))?);
            }
        }
        Ok(ComplexMatrix::new(n, n, data).expect("shape and finiteness already checked"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, eigenvalues, Quad};

    #[test]
    fn four_site_matrix_at_ep() {
        let h: ComplexMatrix = susy_hamiltonian(&SusyParams { n: 4, omega0: 0.0, gamma: 1.0, j: 1.0 });
        let s3 = 3f64.sqrt();
        let diag = [3.0, 1.0, -1.0, -3.0];
        for r in 0..4 {
            assert_eq!(h[(r, r)], c64(0.0, diag[r]));
        }
        assert_eq!(h[(0, 1)], c64(s3, 0.0));
        assert_eq!(h[(1, 2)], c64(2.0, 0.0));
        assert_eq!(h[(3, 2)], c64(s3, 0.0));
        assert_eq!(h[(0, 2)], C64::zero());
    }

    #[test]
    fn hermitian_limit() {
        let h: ComplexMatrix = susy_hamiltonian(&SusyParams { n: 2, omega0: 5.0, gamma: 0.0, j: 1.0 });
        assert_eq!(h, ComplexMatrix::from_real_rows(&[&[5.0, 1.0], &[1.0, 5.0]]));
    }

    #[test]
    fn three_site_spectrum() {
        let h: ComplexMatrix = susy_hamiltonian(&SusyParams { n: 3, omega0: 0.0, gamma: 0.5, j: 1.0 });
        let mut e: Vec<f64> = eigenvalues(&h).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        let w = 0.75f64.sqrt();
        for (a, b) in e.iter().zip([-2.0 * w, 0.0, 2.0 * w]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn quad_model_narrows_to_f64_model() {
        let p = SusyParams::at_ep(5, 0.3, 1.7);
        let wide: ComplexMatrix<Quad> = susy_hamiltonian(&p);
        assert_eq!(wide.to_f64(), susy_hamiltonian::<f64>(&p));
    }

    #[test]
    fn perturbations_scale_with_j() {
        let ps = susy_perturbations::<f64>(2.0);
        assert_eq!(ps.len(), 5);
        assert_eq!(ps[0].0, "p1");
        assert!((ps[0].1[(0, 3)].re - 1.0 / 3.0).abs() < 1e-16);
        let p5 = &ps[4].1;
        assert_eq!(p5[(2, 3)], c64(0.0, 4.0));
        assert_eq!(p5[(3, 1)], c64(4.0, 0.0));
        let skew = p5.try_add(&p5.transpose()).unwrap();
        assert_eq!(skew.max_abs(), 0.0);
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.json");
        let mut h: ComplexMatrix = susy_hamiltonian(&SusyParams::at_ep(4, 0.1, 1.0));
        h[(0, 3)] = c64(-0.0, 1e-300);
        h[(2, 0)] = c64(std::f64::consts::PI, -1.0 / 3.0);
        let file = MatrixFile { matrix: h.clone(), label: Some("H4".into()), e0: Some(c64(0.1, 0.0)), order: Some(4) };
        file.save(&path).unwrap();
        let back = MatrixFile::load(&path).unwrap();
        assert_eq!(back, file);
        for (a, b) in back.matrix.as_slice().iter().zip(h.as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.path().join(name);
            fs::write(&p, text).unwrap();
            p
        };
        let short = write("short.json", r#"{"n": 3, "data": [[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]]]}"#);
        assert!(matches!(MatrixFile::load(short), Err(ModelError::Dimension { .. })));
        let nan = write("nan.json", r#"{"n": 1, "data": [[["NaN", 0]]]}"#);
        let err = MatrixFile::load(nan).unwrap_err();
        assert!(matches!(err, ModelError::NonFinite { .. }), "{err}");
        assert!(err.to_string().contains("data[0][0][0]"));
        let bad = write("bad.json", "{\"n\": 1,\n \"data\": [[[1, 0]]\n");
        assert!(matches!(MatrixFile::load(bad), Err(ModelError::Syntax { line: 3, .. })));
        let missing = dir.path().join("absent.json");
        assert!(MatrixFile::load(missing).unwrap_err().is_io());
    }

    #[test]
    fn chain_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.json");
        let chain = crate::jordan::reference_chain_susy4(1.0, 0.25).unwrap();
        save_chain(&chain, &path).unwrap();
        assert_eq!(load_chain(&path).unwrap(), chain);
    }
}
