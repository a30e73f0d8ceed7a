//! Case files: `key = value` lines for the problem settings followed by one
//! `[species]` block per ionic species. `#` starts a comment.
//!
//! ```text
//! box = -20 20 -20 20 -32 32      # x1 x2 y1 y2 z1 z2, Å
//! membrane_z = -12 12
//! sigma = 0                       # µC/cm²
//!
//! [species]
//! name = Cl-
//! z = -1
//! c_b = 0.1                       # mol/L
//! radius = 1.81                   # or: volume = 24.84 (Å³)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::{LinearMethod, LinearSolveOptions};
use crate::physics::{BoxBounds, IonSpecies, ProblemConfig, SolventSpec};

/// Default slab width for the z-profiles, Å.
pub const DEFAULT_HBAR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub problem: ProblemConfig,
    pub solvent: SolventSpec,
    /// Slab width for the block-averaged z-profiles, Å.
    pub hbar: f64,
    pub linear: LinearSolveOptions,
}

#[derive(Default)]
struct SpeciesBlock {
    line: usize,
    name: Option<String>,
    z: Option<i32>,
    c_b: Option<f64>,
    radius: Option<f64>,
    volume: Option<f64>,
}

fn parse_err(source: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: source.into(),
        line,
        msg: msg.into(),
    }
}

fn numbers(value: &str, count: usize, key: &str, source: &str, line: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(source, line, format!("`{key}` expects {count} numbers, got `{value}`")))?;
    if v.len() != count || v.iter().any(|x| !x.is_finite()) {
        return Err(parse_err(
            source,
            line,
            format!("`{key}` expects {count} finite numbers, got `{value}`"),
        ));
    }
    Ok(v)
}

fn number<T: std::str::FromStr>(value: &str, key: &str, source: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| parse_err(source, line, format!("malformed value `{value}` for `{key}`")))
}

impl SpeciesBlock {
    fn finish(self, source: &str) -> Result<IonSpecies> {
        let line = self.line;
        let missing = |k: &str| parse_err(source, line, format!("species block lacks `{k}`"));
        let name = self.name.ok_or_else(|| missing("name"))?;
        let z = self.z.ok_or_else(|| missing("z"))?;
        let c_b = self.c_b.ok_or_else(|| missing("c_b"))?;
        let species = match (self.radius, self.volume) {
            (Some(r), None) => IonSpecies::from_radius(&name, z, c_b, r),
            (None, Some(v)) => IonSpecies::new(&name, z, c_b, v),
            _ => {
                return Err(parse_err(
                    source,
                    line,
                    format!("species `{name}` needs exactly one of `radius` and `volume`"),
                ))
            }
        };
        species.map_err(|e| parse_err(source, line, e.to_string()))
    }
}

pub fn parse_config_str(text: &str, source: &str) -> Result<CaseConfig> {
    let mut bounds: Option<Vec<f64>> = None;
    let mut membrane: Option<Vec<f64>> = None;
    let mut settings: Vec<(usize, String, String)> = Vec::new();
    let mut blocks: Vec<SpeciesBlock> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if content != "[species]" {
                return Err(parse_err(source, line, format!("unknown section `{content}`")));
            }
            blocks.push(SpeciesBlock {
                line,
                ..Default::default()
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| parse_err(source, line, format!("expected `key = value`, got `{content}`")))?;
        if let Some(b) = blocks.last_mut() {
            match key {
                "name" => b.name = Some(value.to_string()),
                "z" => b.z = Some(number(value, key, source, line)?),
                "c_b" => b.c_b = Some(number(value, key, source, line)?),
                "radius" => b.radius = Some(number(value, key, source, line)?),
                "volume" => b.volume = Some(number(value, key, source, line)?),
                _ => return Err(parse_err(source, line, format!("unknown species key `{key}`"))),
            }
            continue;
        }
        match key {
            "box" => bounds = Some(numbers(value, 6, key, source, line)?),
            "membrane_z" => membrane = Some(numbers(value, 2, key, source, line)?),
            _ => settings.push((line, key.to_string(), value.to_string())),
        }
    }

    let b = bounds.ok_or_else(|| Error::invalid(format!("{source}: missing `box`")))?;
    let m = membrane.ok_or_else(|| Error::invalid(format!("{source}: missing `membrane_z`")))?;
    let bounds = BoxBounds::new([b[0], b[2], b[4]], [b[1], b[3], b[5]])?;
    let mut problem = ProblemConfig::new(bounds, (m[0], m[1]));
    let mut hbar = DEFAULT_HBAR;
    let mut linear = LinearSolveOptions::default();
    let mut v0: Option<f64> = None;
    for (line, key, value) in &settings {
        let (line, key, value) = (*line, key.as_str(), value.as_str());
        match key {
            "temperature" => problem.temperature = number(value, key, source, line)?,
            "eps_p" => problem.eps_p = number(value, key, source, line)?,
            "eps_m" => problem.eps_m = number(value, key, source, line)?,
            "eps_s" => problem.eps_s = number(value, key, source, line)?,
            "sigma" => problem.sigma = number(value, key, source, line)?,
            "u_b" => problem.u_b = number(value, key, source, line)?,
            "u_t" => problem.u_t = number(value, key, source, line)?,
            "omega" => problem.omega = number(value, key, source, line)?,
            "tol" => problem.tol = number(value, key, source, line)?,
            "newton_tol" => problem.newton_tol = number(value, key, source, line)?,
            "max_newton" => problem.max_newton = number(value, key, source, line)?,
            "overflow_bound" => problem.overflow_bound = number(value, key, source, line)?,
            "max_outer" => problem.max_outer = number(value, key, source, line)?,
            "v0" => v0 = Some(number(value, key, source, line)?),
            "hbar" => hbar = number(value, key, source, line)?,
            "linear_solver" => {
                linear.method = value
                    .parse::<LinearMethod>()
                    .map_err(|e| parse_err(source, line, e.to_string()))?
            }
            "linear_abs_tol" => linear.abs_tol = number(value, key, source, line)?,
            "linear_rel_tol" => linear.rel_tol = number(value, key, source, line)?,
            "gmres_restart" => linear.restart = number(value, key, source, line)?,
            "linear_max_iter" => linear.max_iter = number(value, key, source, line)?,
            _ => return Err(parse_err(source, line, format!("unknown key `{key}`"))),
        }
    }
    if blocks.is_empty() {
        return Err(Error::invalid(format!("{source}: no [species] blocks")));
    }
    let species = blocks
        .into_iter()
        .map(|b| b.finish(source))
        .collect::<Result<Vec<_>>>()?;
    let solvent = match v0 {
        Some(v0) => SolventSpec::with_v0(species, v0)?,
        None => SolventSpec::new(species)?,
    };
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::invalid(format!("{source}: hbar must be positive")));
    }
    problem.validate()?;
    linear.validate()?;
    Ok(CaseConfig {
        problem,
        solvent,
        hbar,
        linear,
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<CaseConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, &path.display().to_string())
}

/// Writes every setting explicitly; species are given by volume.
pub fn format_config(case: &CaseConfig) -> String {
    let p = &case.problem;
    let mut s = String::new();
    let (lo, hi) = (p.bounds.min, p.bounds.max);
    let method = match case.linear.method {
        LinearMethod::GmresIlu => "gmres-ilu",
        LinearMethod::Direct => "direct",
    };
    let w = &mut s;
    writeln!(w, "box = {} {} {} {} {} {}", lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]).unwrap();
    writeln!(w, "membrane_z = {} {}", p.membrane_z.0, p.membrane_z.1).unwrap();
    for (k, v) in [
        ("temperature", p.temperature),
        ("eps_p", p.eps_p),
        ("eps_m", p.eps_m),
        ("eps_s", p.eps_s),
        ("sigma", p.sigma),
        ("u_b", p.u_b),
        ("u_t", p.u_t),
        ("omega", p.omega),
        ("tol", p.tol),
        ("newton_tol", p.newton_tol),
        ("overflow_bound", p.overflow_bound),
        ("v0", case.solvent.v0),
        ("hbar", case.hbar),
        ("linear_abs_tol", case.linear.abs_tol),
        ("linear_rel_tol", case.linear.rel_tol),
    ] {
        writeln!(w, "{k} = {v:?}").unwrap();
    }
    writeln!(w, "max_newton = {}", p.max_newton).unwrap();
    writeln!(w, "max_outer = {}", p.max_outer).unwrap();
    writeln!(w, "linear_solver = {method}").unwrap();
    writeln!(w, "gmres_restart = {}", case.linear.restart).unwrap();
    writeln!(w, "linear_max_iter = {}", case.linear.max_iter).unwrap();
    for sp in &case.solvent.species {
        writeln!(w, "\n[species]").unwrap();
        writeln!(w, "name = {}", sp.name).unwrap();
        writeln!(w, "z = {}", sp.charge_number).unwrap();
        writeln!(w, "c_b = {:?}", sp.bulk_concentration).unwrap();
        writeln!(w, "volume = {:?}", sp.ion_volume).unwrap();
    }
    s
}

pub fn write_config(path: impl AsRef<Path>, case: &CaseConfig) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_config(case)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE: &str = "\
# synthetic channel
box = -20 20 -20 20 -32 32
membrane_z = -12 12
sigma = 10   # µC/cm²
omega = 0.3

[species]
name = Cl-
z = -1
c_b = 0.1
radius = 1.81

[species]
name = Na+
z = 1
c_b = 0.1
volume = 3.5914
";

    #[test]
    fn parses_case() {
        let c = parse_config_str(CASE, "case.cfg").unwrap();
        assert_eq!(c.problem.sigma, 10.0);
        assert_eq!(c.problem.omega, 0.3);
        assert_eq!(c.problem.membrane_z, (-12.0, 12.0));
        assert_eq!(c.problem.bounds.max, [20.0, 20.0, 32.0]);
        assert_eq!(c.problem.eps_s, 80.0);
        assert_eq!(c.hbar, DEFAULT_HBAR);
        assert_eq!(c.solvent.len(), 2);
        let v = 4.0 / 3.0 * std::f64::consts::PI * 1.81f64.powi(3);
        assert!((c.solvent.species[0].ion_volume - v).abs() < 1e-12);
        assert_eq!(c.solvent.v0, 3.5914);
    }

    #[test]
    fn round_trip() {
        let mut c = parse_config_str(CASE, "case.cfg").unwrap();
        c.linear.method = LinearMethod::Direct;
        let again = parse_config_str(&format_config(&c), "again").unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn errors_name_the_line() {
        let bad = CASE.replace("omega = 0.3", "omega = fast");
        match parse_config_str(&bad, "case.cfg") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let unknown = CASE.replace("omega", "omgea");
        assert!(matches!(
            parse_config_str(&unknown, "c"),
            Err(Error::Parse { line: 5, .. })
        ));
        let both = CASE.replace("volume = 3.5914", "volume = 3.5914\nradius = 0.95");
        assert!(parse_config_str(&both, "c").is_err());
        assert!(parse_config_str(&CASE.replace("box", "# box"), "c").is_err());
        assert!(parse_config_str(&CASE.replace("omega = 0.3", "omega = 1.5"), "c").is_err());
    }
}
