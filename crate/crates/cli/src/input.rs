use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pbdnf::formula::random_formula;
use pbdnf::submodular::{self, zoo, GraphSpec, SetSystemSpec};
use pbdnf::{cube, seed, Formula, SetFunction};
use serde::Serialize;
use serde_json::Value;

/// A function read from `--input` or built from `--gen`.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Target {
    Formula(Formula),
    SetFunction(SetFunction),
}

impl Target {
    pub fn dimension(&self) -> usize {
        match self {
            Target::Formula(f) => f.dimension(),
            Target::SetFunction(f) => f.dimension(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Target::Formula(_) => "formula",
            Target::SetFunction(_) => "set_function",
        }
    }

    pub fn to_set_function(&self) -> Result<SetFunction> {
        match self {
            Target::Formula(f) => Ok(SetFunction::from_table(f.to_table()?)),
            Target::SetFunction(f) => Ok(f.clone()),
        }
    }

    pub fn value(&self, x: cube::PointMask) -> Result<u32> {
        Ok(match self {
            Target::Formula(f) => f.eval(x)?,
            Target::SetFunction(f) => f.eval(x)?,
        })
    }

    /// Largest value the target can take.
    pub fn range_max(&self) -> u32 {
        match self {
            Target::Formula(f) => f.max_constant(),
            Target::SetFunction(f) => f.range_max(),
        }
    }
}

/// Reads a JSON input, recognising formulas `{n, terms}`, set functions
/// `{n, values}`, graphs `{n, edges}` and set systems `{universe, sets}`.
pub fn read_target(path: &Path) -> Result<Target> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_target(&text)
}

pub fn parse_target(text: &str) -> Result<Target> {
    let value: Value = serde_json::from_str(text).context("input is not valid JSON")?;
    let obj = value
        .as_object()
        .ok_or_else(|| anyhow!("input must be a JSON object"))?;
    let has = |k: &str| obj.contains_key(k);
    Ok(if has("terms") {
        Target::Formula(serde_json::from_value(value)?)
    } else if has("values") {
        Target::SetFunction(serde_json::from_value(value)?)
    } else if has("edges") {
        Target::SetFunction(serde_json::from_value::<GraphSpec>(value)?.cut_function()?)
    } else if has("sets") {
        Target::SetFunction(serde_json::from_value::<SetSystemSpec>(value)?.coverage_function()?)
    } else {
        bail!("unrecognised input: expected keys terms, values, edges or sets")
    })
}

fn params(spec: &str) -> Result<(String, Vec<(String, String)>)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut out = Vec::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("generator parameter {part:?} is not key=value"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok((name.trim().to_string(), out))
}

fn get<T: std::str::FromStr>(ps: &[(String, String)], key: &str, default: Option<T>) -> Result<T> {
    match ps.iter().find(|(k, _)| k == key) {
        Some((_, v)) => v
            .parse()
            .map_err(|_| anyhow!("generator parameter {key}={v} is malformed")),
        None => default.ok_or_else(|| anyhow!("generator parameter {key} is required")),
    }
}

fn list(s: &str) -> Result<Vec<u32>> {
    s.split(';')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| anyhow!("list entry {v:?} is not an integer"))
        })
        .collect()
}

/// Builds a target from a generator spec such as `formula:n=10,k=2,r=3,s=4`.
///
/// Generators: `formula` (n, k, r, s), `zoo` and `zoo-monotone` (n),
/// `cut` (n, edges as `0-1;1-2`), `complete-cut` (n), `threshold` (n, t),
/// `uniform` (n, rank), `concave` (g as `0;2;3`), `zero` (n).
pub fn generate(spec: &str, seed_value: u64) -> Result<Target> {
    let (name, ps) = params(spec)?;
    let known: &[&str] = match name.as_str() {
        "formula" => &["n", "k", "r", "s"],
        "cut" => &["n", "edges"],
        "threshold" => &["n", "t"],
        "uniform" => &["n", "rank"],
        "concave" => &["g"],
        "zoo" | "zoo-monotone" | "complete-cut" | "zero" => &["n"],
        _ => bail!("unknown generator {name:?}"),
    };
    if let Some((k, _)) = ps.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        bail!("generator {name} has no parameter {k}");
    }
    Ok(match name.as_str() {
        "formula" => Target::Formula(random_formula(
            get(&ps, "n", None)?,
            get(&ps, "k", Some(2))?,
            get(&ps, "r", Some(1))?,
            get(&ps, "s", Some(4))?,
            seed_value,
        )?),
        "zoo" | "zoo-monotone" => {
            let n: usize = get(&ps, "n", None)?;
            if n > 20 {
                bail!("zoo generators support n <= 20");
            }
            let mut rng = seed::rng(seed_value);
            Target::SetFunction(if name == "zoo" {
                zoo::random_submodular(n, &mut rng)
            } else {
                zoo::random_monotone_submodular(n, &mut rng)
            })
        }
        "cut" => {
            let n = get(&ps, "n", None)?;
            let raw: String = get(&ps, "edges", Some(String::new()))?;
            let mut edges = Vec::new();
            for e in raw.split(';').filter(|e| !e.is_empty()) {
                let (a, b) = e.split_once('-').ok_or_else(|| anyhow!("edge {e:?} is not a-b"))?;
                edges.push((a.trim().parse()?, b.trim().parse()?));
            }
            Target::SetFunction(submodular::cut_function(n, &edges)?)
        }
        "complete-cut" => {
            let n: usize = get(&ps, "n", None)?;
            let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            Target::SetFunction(submodular::cut_function(n, &edges)?)
        }
        "threshold" => {
            let n: usize = get(&ps, "n", None)?;
            let t: usize = get(&ps, "t", None)?;
            Target::SetFunction(SetFunction::from_fn(n, |s| (cube::cardinality(s) >= t) as u32)?)
        }
        "uniform" => Target::SetFunction(submodular::uniform_matroid_rank(
            get(&ps, "n", None)?,
            get(&ps, "rank", None)?,
        )?),
        "concave" => Target::SetFunction(submodular::concave_cardinality(&list(&get::<String>(
            &ps, "g", None,
        )?)?)?),
        "zero" => Target::SetFunction(SetFunction::from_fn(get(&ps, "n", None)?, |_| 0)?),
        _ => unreachable!(),
    })
}

/// Parses a point given as a bit string (`x_0` first, e.g. `0110`) or as
/// a mask (`0b110`, `6`).
pub fn parse_point(s: &str, n: usize) -> Result<cube::PointMask> {
    let s = s.trim();
    let mask = if let Some(bits) = s.strip_prefix("0b") {
        cube::PointMask::from_str_radix(bits, 2)?
    } else if s.len() == n && n > 0 && s.chars().all(|c| c == '0' || c == '1') && s.len() > 1 {
        s.chars()
            .enumerate()
            .filter(|&(_, c)| c == '1')
            .fold(0, |m, (i, _)| m | 1 << i)
    } else {
        s.parse()?
    };
    if !cube::fits(mask, n) {
        bail!(pbdnf::Error::PointOutOfRange { point: mask, n });
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_input_kinds() {
        assert_eq!(
            parse_target(r#"{"n":2,"terms":[{"pos":[0],"neg":[],"c":1}]}"#)
                .unwrap()
                .kind(),
            "formula"
        );
        let k3 = parse_target(r#"{"n":3,"edges":[[0,1],[1,2],[0,2]]}"#).unwrap();
        assert_eq!(k3.to_set_function().unwrap().values(), &[0, 2, 2, 2, 2, 2, 2, 0]);
        let cov = parse_target(r#"{"universe":2,"sets":[[0],[0,1]]}"#).unwrap();
        assert_eq!(cov.to_set_function().unwrap().values(), &[0, 1, 2, 2]);
        assert!(parse_target(r#"{"n":3}"#).is_err());
        assert!(parse_target("[1]").is_err());
    }

    #[test]
    fn generators() {
        assert_eq!(
            generate("complete-cut:n=3", 0)
                .unwrap()
                .to_set_function()
                .unwrap()
                .values()[1],
            2
        );
        assert_eq!(
            generate("threshold:n=2,t=2", 0)
                .unwrap()
                .to_set_function()
                .unwrap()
                .values(),
            &[0, 0, 0, 1]
        );
        assert_eq!(generate("formula:n=8,k=2,r=3,s=4", 5).unwrap().dimension(), 8);
        assert!(generate("formula:n=8,q=1", 0).is_err());
        assert!(generate("nothing:n=1", 0).is_err());
        assert!(generate("cut:n=3,edges=0-1;1-5", 0).is_err());
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("0110", 4).unwrap(), 0b0110);
        assert_eq!(parse_point("1000", 4).unwrap(), 0b0001);
        assert_eq!(parse_point("0b101", 4).unwrap(), 5);
        assert_eq!(parse_point("6", 4).unwrap(), 6);
        assert!(parse_point("16", 4).is_err());
    }
}
