//! Metrics in adapted coordinates `(x, y, phi, t)` with components depending on `x, y` only.

use std::collections::BTreeMap;

use crate::algebra::{parse_expr, AlgebraError, BiPoly, Rat, RatFunc, Scope, Var};
use crate::momentum::MomPoly;

pub type Mat4 = [[RatFunc; 4]; 4];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("unknown metric '{0}' (expected one of ts2, darmois, cmetric, kerr_extreme, flat_cyl)")]
    UnknownMetric(String),
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("metric is degenerate (determinant vanishes identically)")]
    Singular,
    #[error("point ({x}, {y}) is not admissible: {reason}")]
    Inadmissible { x: String, y: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpec {
    pub name: String,
    /// Coordinate labels; the first two are the non-ignorable ones.
    pub coords: [String; 4],
    pub g: Mat4,
    pub static_flag: bool,
    pub excluded: Vec<BiPoly>,
    pub suggested_points: Vec<(Rat, Rat)>,
    pub params: BTreeMap<String, Rat>,
}

pub const BUILTIN_NAMES: [&str; 5] = ["ts2", "darmois", "cmetric", "kerr_extreme", "flat_cyl"];

const TS2: &str = "\
name ts2
coords x y phi t
static false
param p = 3/5
param q = 4/5
param kappa = 2
let mu = p^2*(x^2 - 1)^2 + q^2*(1 - y^2)^2
let nu = 4*x*(p*x^2 + 2*x + p)
let sigma = 2*p*q*(x^2 - y^2)
let tau = -4*q/p*(1 - y^2)*(p*x + 1)
let A = mu^2 - (x^2 - 1)*(1 - y^2)*sigma^2
let f = A/(mu^2 + mu*nu - (1 - y^2)*((x^2 - 1)*sigma^2 - sigma*tau))
let e2g = A/(p^4*(x^2 - y^2)^4)
let omega = -kappa*(1 - y^2)*((x^2 - 1)*sigma*nu + mu*tau)/A
exclude x^2 - 1
exclude 1 - y^2
exclude x^2 - y^2
point 1/2, 2
g[x][x] = kappa^2/f*e2g*(x^2 - y^2)/(x^2 - 1)
g[y][y] = kappa^2/f*e2g*(x^2 - y^2)/(1 - y^2)
g[phi][phi] = kappa^2/f*(x^2 - 1)*(1 - y^2) - f*omega^2
g[phi][t] = f*omega
g[t][t] = -f
";

const DARMOIS: &str = "\
name darmois
coords x y phi t
static true
let s = ((x + 1)/(x - 1))^2
let c = (x^2 - y^2)*((x^2 - 1)/(x^2 - y^2))^4
exclude x - 1
exclude x + 1
exclude 1 - y^2
exclude x^2 - y^2
point 1/2, 2
g[x][x] = s*c/(x^2 - 1)
g[y][y] = s*c/(1 - y^2)
g[phi][phi] = s*(x^2 - 1)*(1 - y^2)
g[t][t] = -((x - 1)/(x + 1))^2
";

const CMETRIC: &str = "\
name cmetric
coords x y phi tau
static true
param alpha = 1/2
param m = 1/2
let X = (1 - x^2)*(1 + 2*m*alpha*x)
let Y = (y^2 - 1)*(1 - 2*m*alpha*y)
let w = 1/(alpha^2*(x + y)^2)
exclude x + y
exclude 1 - x^2
exclude 1 + 2*m*alpha*x
exclude y^2 - 1
exclude 1 - 2*m*alpha*y
point 0, 3/2
g[x][x] = w/X
g[y][y] = w/Y
g[phi][phi] = w*X
g[tau][tau] = -w*Y
";

const KERR_EXTREME: &str = "\
name kerr_extreme
coords r chi phi t
static false
let S = r^2 + chi^2
let P = chi^2*r^2 + r^4 - 2*chi^2*r + chi^2 + r^2 + 2*r
exclude r - 1
exclude 1 - chi^2
exclude r^2 + chi^2
point 2, 1/2
g[r][r] = S/(r^2 - 2*r + 1)
g[chi][chi] = S/(1 - chi^2)
g[phi][phi] = P*(1 - chi^2)/S
g[phi][t] = -2*r*(1 - chi^2)/S
g[t][t] = -(r^2 - 2*r + chi^2)/S
";

const FLAT_CYL: &str = "\
name flat_cyl
coords x y phi t
static true
exclude x
point 2, 1
g[x][x] = 1
g[y][y] = 1
g[phi][phi] = x^2
g[t][t] = -1
";

/// Text of a builtin metric in the metric file format.
pub fn builtin_source(name: &str) -> Result<&'static str, MetricError> {
    Ok(match name {
        "ts2" => TS2,
        "darmois" => DARMOIS,
        "cmetric" => CMETRIC,
        "kerr_extreme" => KERR_EXTREME,
        "flat_cyl" => FLAT_CYL,
        other => return Err(MetricError::UnknownMetric(other.to_string())),
    })
}

pub fn builtin(name: &str) -> Result<MetricSpec, MetricError> {
    parse_metric_file(builtin_source(name)?)
}

fn zero4() -> Mat4 {
    std::array::from_fn(|_| std::array::from_fn(|_| RatFunc::zero()))
}

fn parse_rat_pair(s: &str) -> Option<(Rat, Rat)> {
    let parts: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != 2 {
        return None;
    }
    Some((parts[0].parse().ok()?, parts[1].parse().ok()?))
}

/// Parse the line-oriented metric file format.
///
/// ```text
/// name <ident>                 (optional)
/// coords <x> <y> <phi> <t>
/// static true|false
/// param <name> = <rational expr>
/// let <name> = <expr>
/// exclude <polynomial>
/// point <r1>, <r2>
/// g[i][j] = <expr>             (i <= j, index or coordinate name)
/// ```
/// Lines starting with `#` are comments.
pub fn parse_metric_file(text: &str) -> Result<MetricSpec, MetricError> {
    let mut name = String::from("custom");
    let mut coords: Option<[String; 4]> = None;
    let mut static_flag: Option<bool> = None;
    let mut scope = Scope::xy();
    let mut params = BTreeMap::new();
    let mut excluded = Vec::new();
    let mut points = Vec::new();
    let mut g = zero4();
    let mut seen = [[false; 4]; 4];

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let perr = |col: usize, msg: String| MetricError::Parse { line, col, msg };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest_col = indent + kw.len() + 1 + (rest.len() - rest.trim_start().len()) + 1;
        let rest = rest.trim();
        let expr = |src: &str, offset: usize, scope: &Scope| -> Result<RatFunc, MetricError> {
            parse_expr(src, scope).map_err(|e| match e {
                AlgebraError::Parse { pos, msg } => MetricError::Parse { line, col: offset + pos - 1, msg },
                other => MetricError::Parse { line, col: offset, msg: other.to_string() },
            })
        };
        let need_coords = |c: &Option<[String; 4]>| -> Result<(), MetricError> {
            if c.is_none() {
                return Err(perr(1, "'coords' must come before expressions".into()));
            }
            Ok(())
        };
        match kw {
            "name" => name = rest.to_string(),
            "coords" => {
                let cs: Vec<&str> = rest.split_whitespace().collect();
                if cs.len() != 4 {
                    return Err(perr(rest_col, "expected four coordinate names".into()));
                }
                let arr: [String; 4] = std::array::from_fn(|i| cs[i].to_string());
                scope.vars = [arr[0].clone(), arr[1].clone()];
                scope.forbidden = vec![arr[2].clone(), arr[3].clone()];
                coords = Some(arr);
            }
            "static" => {
                static_flag = Some(match rest {
                    "true" => true,
                    "false" => false,
                    _ => return Err(perr(rest_col, "expected 'true' or 'false'".into())),
                })
            }
            "param" | "let" => {
                need_coords(&coords)?;
                let Some((lhs, rhs)) = rest.split_once('=') else {
                    return Err(perr(rest_col, "expected '<name> = <expr>'".into()));
                };
                let id = lhs.trim();
                if id.is_empty() || !id.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(perr(rest_col, format!("invalid name '{id}'")));
                }
                if scope.vars.iter().any(|v| v == id) || scope.forbidden.iter().any(|v| v == id) {
                    return Err(perr(rest_col, format!("'{id}' shadows a coordinate")));
                }
                let off = rest_col + lhs.len() + 1 + (rhs.len() - rhs.trim_start().len());
                let v = expr(rhs.trim(), off, &scope)?;
                if kw == "param" {
                    let Some(q) = v.as_constant() else {
                        return Err(perr(off, format!("parameter '{id}' must be a rational constant")));
                    };
                    params.insert(id.to_string(), q);
                }
                scope.defs.insert(id.to_string(), v);
            }
            "exclude" => {
                need_coords(&coords)?;
                let v = expr(rest, rest_col, &scope)?;
                if !v.is_polynomial() || v.is_zero() {
                    return Err(perr(rest_col, "excluded locus must be a nonzero polynomial".into()));
                }
                excluded.push(v.numerator());
            }
            "point" => {
                let Some(p) = parse_rat_pair(rest) else {
                    return Err(perr(rest_col, "expected 'point <r1>, <r2>'".into()));
                };
                points.push(p);
            }
            _ if kw.starts_with("g[") => {
                need_coords(&coords)?;
                let cs = coords.as_ref().unwrap();
                let Some((lhs, rhs)) = trimmed.split_once('=') else {
                    return Err(perr(indent + 1, "expected 'g[i][j] = <expr>'".into()));
                };
                let (a, b) = parse_indices(lhs.trim(), cs).ok_or_else(|| perr(indent + 1, format!("bad index '{}'", lhs.trim())))?;
                if a > b {
                    return Err(perr(indent + 1, "only upper-triangle entries g[i][j] with i <= j are allowed".into()));
                }
                if seen[a][b] {
                    return Err(perr(indent + 1, format!("duplicate entry g[{a}][{b}]")));
                }
                seen[a][b] = true;
                let off = indent + lhs.len() + 2 + (rhs.len() - rhs.trim_start().len());
                let v = expr(rhs.trim(), off, &scope)?;
                g[a][b] = v.clone();
                g[b][a] = v;
            }
            other => return Err(perr(indent + 1, format!("unknown keyword '{other}'"))),
        }
    }
    let coords = coords.ok_or(MetricError::Parse { line: 0, col: 0, msg: "missing 'coords' line".into() })?;
    let static_flag = static_flag.ok_or(MetricError::Parse { line: 0, col: 0, msg: "missing 'static' line".into() })?;
    let spec = MetricSpec { name, coords, g, static_flag, excluded, suggested_points: points, params };
    spec.validate()?;
    Ok(spec)
}

fn parse_indices(lhs: &str, coords: &[String; 4]) -> Option<(usize, usize)> {
    let inner = lhs.strip_prefix("g[")?.strip_suffix(']')?;
    let (a, b) = inner.split_once("][")?;
    let idx = |s: &str| -> Option<usize> {
        let s = s.trim();
        if let Ok(n) = s.parse::<usize>() {
            return (n < 4).then_some(n);
        }
        coords.iter().position(|c| c == s)
    };
    Some((idx(a)?, idx(b)?))
}

impl MetricSpec {
    pub fn coord_names(&self) -> [&str; 2] {
        [&self.coords[0], &self.coords[1]]
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        for a in 0..4 {
            for b in 0..4 {
                if self.g[a][b] != self.g[b][a] {
                    return Err(MetricError::Invariant(format!("g[{a}][{b}] != g[{b}][{a}]")));
                }
            }
        }
        for a in 0..2 {
            for b in 2..4 {
                if !self.g[a][b].is_zero() {
                    return Err(MetricError::Invariant(format!(
                        "g[{}][{}] couples a non-ignorable with an ignorable coordinate",
                        self.coords[a], self.coords[b]
                    )));
                }
            }
        }
        if self.static_flag && !self.g[2][3].is_zero() {
            return Err(MetricError::Invariant("static metric has a nonzero g[2][3] cross term".into()));
        }
        if self.determinant().is_zero() {
            return Err(MetricError::Singular);
        }
        for (x, y) in &self.suggested_points {
            self.check_point(x, y)?;
        }
        Ok(())
    }

    pub fn determinant(&self) -> RatFunc {
        det(&self.g)
    }

    /// A point is admissible if it avoids excluded loci and every pole of `g` and its inverse.
    pub fn check_point(&self, x: &Rat, y: &Rat) -> Result<(), MetricError> {
        let bad = |reason: String| MetricError::Inadmissible { x: x.to_string(), y: y.to_string(), reason };
        for p in &self.excluded {
            if p.eval(x, y) == 0 {
                return Err(bad(format!("on excluded locus {} = 0", p.display_with(self.coord_names()))));
            }
        }
        for a in 0..4 {
            for b in a..4 {
                if self.g[a][b].den_at(x, y) == 0 {
                    return Err(bad(format!("g[{a}][{b}] has a pole")));
                }
            }
        }
        let d = self.determinant();
        if d.den_at(x, y) == 0 || d.eval(x, y).map(|v| v == 0).unwrap_or(true) {
            return Err(bad("metric degenerates".into()));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Mat4, MetricError> {
        invert(&self.g).ok_or(MetricError::Singular)
    }

    /// `H = g^{ij} p_i p_j`.
    pub fn hamiltonian(&self) -> Result<MomPoly, MetricError> {
        let gi = self.inverse()?;
        let mut h = MomPoly::zero();
        for a in 0..4 {
            for b in a..4 {
                let mut m = [0u32; 4];
                m[a] += 1;
                m[b] += 1;
                let c = if a == b { gi[a][b].clone() } else { gi[a][b].mul(&RatFunc::from_int(2)) };
                h.add_term(m, &c);
            }
        }
        Ok(h)
    }

    /// `Gamma^a_{bc}`.
    pub fn christoffel(&self) -> Result<[[[RatFunc; 4]; 4]; 4], MetricError> {
        let gi = self.inverse()?;
        let dg: [Mat4; 2] = [Var::X, Var::Y].map(|v| std::array::from_fn(|a| std::array::from_fn(|b| self.g[a][b].diff(v))));
        let d = |c: usize, a: usize, b: usize| -> RatFunc {
            if c < 2 {
                dg[c][a][b].clone()
            } else {
                RatFunc::zero()
            }
        };
        let half = RatFunc::constant(&Rat::from((1, 2)));
        // lower[d][b][c] = (d_b g_dc + d_c g_db - d_d g_bc) / 2
        let lower: [[[RatFunc; 4]; 4]; 4] = std::array::from_fn(|dd| {
            std::array::from_fn(|b| std::array::from_fn(|c| d(b, dd, c).add(&d(c, dd, b)).sub(&d(dd, b, c)).mul(&half)))
        });
        Ok(std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| {
                    let mut acc = RatFunc::zero();
                    for dd in 0..4 {
                        if gi[a][dd].is_zero() || lower[dd][b][c].is_zero() {
                            continue;
                        }
                        acc = acc.add(&gi[a][dd].mul(&lower[dd][b][c]));
                    }
                    acc
                })
            })
        }))
    }

    /// `R_{bc} = d_a G^a_bc - d_c G^a_ab + G^a_ad G^d_bc - G^a_cd G^d_ab`.
    pub fn ricci(&self) -> Result<Mat4, MetricError> {
        let gam = self.christoffel()?;
        let vars = [Var::X, Var::Y];
        let trace: [RatFunc; 4] = std::array::from_fn(|b| {
            let mut acc = RatFunc::zero();
            for a in 0..4 {
                acc = acc.add(&gam[a][a][b]);
            }
            acc
        });
        let mut r = zero4();
        for b in 0..4 {
            for c in b..4 {
                let mut acc = RatFunc::zero();
                for (a, v) in vars.iter().enumerate() {
                    acc = acc.add(&gam[a][b][c].diff(*v));
                }
                if c < 2 {
                    acc = acc.sub(&trace[b].diff(vars[c]));
                }
                for dd in 0..4 {
                    if !gam[dd][b][c].is_zero() && !trace[dd].is_zero() {
                        acc = acc.add(&trace[dd].mul(&gam[dd][b][c]));
                    }
                    for a in 0..4 {
                        if !gam[a][c][dd].is_zero() && !gam[dd][a][b].is_zero() {
                            acc = acc.sub(&gam[a][c][dd].mul(&gam[dd][a][b]));
                        }
                    }
                }
                r[b][c] = acc.clone();
                r[c][b] = acc;
            }
        }
        Ok(r)
    }

    /// Serialize in the metric file format with all components expanded.
    pub fn to_metric_file(&self) -> String {
        let names = self.coord_names();
        let mut out = String::new();
        out.push_str(&format!("name {}\n", self.name));
        out.push_str(&format!("coords {}\n", self.coords.join(" ")));
        out.push_str(&format!("static {}\n", self.static_flag));
        for (k, v) in &self.params {
            out.push_str(&format!("param {k} = {v}\n"));
        }
        for p in &self.excluded {
            out.push_str(&format!("exclude {}\n", p.display_with(names)));
        }
        for (x, y) in &self.suggested_points {
            out.push_str(&format!("point {x}, {y}\n"));
        }
        for a in 0..4 {
            for b in a..4 {
                if !self.g[a][b].is_zero() {
                    out.push_str(&format!("g[{a}][{b}] = {}\n", self.g[a][b].display_with(names)));
                }
            }
        }
        out
    }
}

pub fn det(m: &Mat4) -> RatFunc {
    fn minor(m: &[Vec<RatFunc>]) -> RatFunc {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = RatFunc::zero();
        for c in 0..n {
            if m[0][c].is_zero() {
                continue;
            }
            let sub: Vec<Vec<RatFunc>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| v.clone()).collect()).collect();
            let t = m[0][c].mul(&minor(&sub));
            acc = if c % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        }
        acc
    }
    let rows: Vec<Vec<RatFunc>> = m.iter().map(|r| r.to_vec()).collect();
    minor(&rows)
}

/// Gauss-Jordan inverse; `None` if singular.
pub fn invert(m: &Mat4) -> Option<Mat4> {
    let mut a: Vec<Vec<RatFunc>> = m.iter().map(|r| r.to_vec()).collect();
    let mut inv: Vec<Vec<RatFunc>> =
        (0..4).map(|i| (0..4).map(|j| if i == j { RatFunc::one() } else { RatFunc::zero() }).collect()).collect();
    for col in 0..4 {
        let piv = (col..4).filter(|&r| !a[r][col].is_zero()).min_by_key(|&r| a[r][col].size())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].inv().ok()?;
        for j in 0..4 {
            a[col][j] = a[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..4 {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..4 {
                if !a[col][j].is_zero() {
                    a[r][j] = a[r][j].sub(&f.mul(&a[col][j]));
                }
                if !inv[col][j].is_zero() {
                    inv[r][j] = inv[r][j].sub(&f.mul(&inv[col][j]));
                }
            }
        }
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|j| inv[i][j].clone())))
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = RatFunc::zero();
            for k in 0..4 {
                if !a[i][k].is_zero() && !b[k][j].is_zero() {
                    acc = acc.add(&a[i][k].mul(&b[k][j]));
                }
            }
            acc
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::{poisson, ParityClass, PhiParity};

    fn rf(s: &str) -> RatFunc {
        parse_expr(s, &Scope::xy()).unwrap()
    }

    #[test]
    fn flat_cyl_basics() {
        let m = builtin("flat_cyl").unwrap();
        let gi = m.inverse().unwrap();
        assert_eq!(gi[2][2], rf("1/x^2"));
        let h = m.hamiltonian().unwrap();
        assert_eq!(h.coeff(&[0, 0, 2, 0]), rf("1/x^2"));
        assert_eq!(h.coeff(&[0, 0, 0, 2]), rf("-1"));
        assert!(m.ricci().unwrap().iter().flatten().all(|v| v.is_zero()));
    }

    #[test]
    fn darmois_components() {
        let m = builtin("darmois").unwrap();
        assert_eq!(m.g[2][2], rf("((x+1)/(x-1))^2*(x^2-1)*(1-y^2)"));
        assert_eq!(m.inverse().unwrap()[3][3], m.g[3][3].inv().unwrap());
        let h = m.hamiltonian().unwrap();
        assert!(h.coeff(&[0, 0, 1, 1]).is_zero());
        assert_eq!(h.parity_project(ParityClass::new(0, PhiParity::Even)), h);
    }

    #[test]
    fn cmetric_and_kerr_components() {
        let c = builtin("cmetric").unwrap();
        assert_eq!(c.g[0][0], rf("1/((1/4)*(x+y)^2*(1-x^2)*(1+x/2))"));
        let k = builtin("kerr_extreme").unwrap();
        assert_eq!(k.g[1][1], rf("(x^2+y^2)/(1-y^2)"));
        let h = k.hamiltonian().unwrap();
        assert!(!h.coeff(&[0, 0, 1, 1]).is_zero());
        assert!(poisson(&h, &h).is_zero());
    }

    #[test]
    fn file_rejects_bad_input() {
        let bad = "coords x y phi t\nstatic true\ng[0][1] = phi\ng[0][0] = 1\n";
        match parse_metric_file(bad) {
            Err(MetricError::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("ignorable"));
            }
            other => panic!("{other:?}"),
        }
        let mixed = "coords x y phi t\nstatic true\ng[0][0] = 1\ng[1][1] = 1\ng[0][2] = x\ng[2][2] = 1\ng[3][3] = -1\n";
        assert!(matches!(parse_metric_file(mixed), Err(MetricError::Invariant(_))));
        let singular = "coords x y phi t\nstatic true\ng[0][0] = 1\ng[1][1] = 1\ng[2][2] = 1\n";
        assert!(matches!(parse_metric_file(singular), Err(MetricError::Singular)));
        assert!(matches!(builtin("godel"), Err(MetricError::UnknownMetric(_))));
    }

    #[test]
    fn roundtrip_through_text() {
        for name in ["flat_cyl", "darmois", "cmetric", "kerr_extreme"] {
            let m = builtin(name).unwrap();
            let back = parse_metric_file(&m.to_metric_file()).unwrap();
            assert_eq!(back, m, "{name}");
        }
    }

    #[test]
    fn inadmissible_points() {
        let m = builtin("darmois").unwrap();
        assert!(m.check_point(&Rat::from(1), &Rat::from(0)).is_err());
        assert!(m.check_point(&Rat::from((1, 2)), &Rat::from(2)).is_ok());
    }
}
