//! Instance and menu files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tariff_core::model::{Contract, DirectMenu, Instance, UsagePrice};
use tariff_core::single_param::SingleParamInstance;
use tariff_core::{rational, Rational};

use crate::error::{CliError, CliResult};

/// A rational written as a JSON integer or as a string such as `"3/4"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    fn parse(&self, field: &str) -> CliResult<Rational> {
        match self {
            Num::Int(n) => Ok(rational::int(*n)),
            Num::Text(s) => rational::parse(s).map_err(|_| {
                CliError::Invalid(format!("{field}: cannot parse {s:?} as a rational"))
            }),
        }
    }
}

impl From<&Rational> for Num {
    fn from(r: &Rational) -> Self {
        Num::Text(r.to_string())
    }
}

fn parse_vec(xs: &[Num], field: &str) -> CliResult<Vec<Rational>> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| x.parse(&format!("{field}[{i}]")))
        .collect()
}

fn parse_rows(rows: &[Vec<Num>], field: &str) -> CliResult<Vec<Vec<Rational>>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| parse_vec(r, &format!("{field}[{i}]")))
        .collect()
}

fn nums(xs: &[Rational]) -> Vec<Num> {
    xs.iter().map(Num::from).collect()
}

fn num_rows(rows: &[Vec<Rational>]) -> Vec<Vec<Num>> {
    rows.iter().map(|r| nums(r)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(rename = "T")]
    pub types: usize,
    #[serde(rename = "A")]
    pub actions: usize,
    #[serde(rename = "Q")]
    pub outcomes: usize,
    pub mu: Vec<Num>,
    pub costs: Vec<Num>,
    pub p: Vec<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<Num>>,
}

/// A parsed instance; `single` is set when the file gave `alpha` and `baseline`.
pub struct Loaded {
    pub inst: Instance,
    pub single: Option<SingleParamInstance>,
}

fn check_len(field: &str, got: usize, expected: usize, key: &str) -> CliResult<()> {
    if got == expected {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{field} has {got} entries but {key} = {expected}"
        )))
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            types: inst.num_types(),
            actions: inst.num_actions(),
            outcomes: inst.num_outcomes(),
            mu: nums(inst.mu()),
            costs: nums(inst.costs()),
            p: num_rows(inst.transitions()),
            v: Some(num_rows(inst.valuations())),
            alpha: None,
            baseline: None,
        }
    }

    pub fn from_single_param(sp: &SingleParamInstance) -> Self {
        Self {
            v: None,
            alpha: Some(nums(sp.alpha())),
            baseline: Some(nums(sp.baseline())),
            ..Self::from_instance(sp.base())
        }
    }

    pub fn load(&self) -> CliResult<Loaded> {
        check_len("mu", self.mu.len(), self.types, "T")?;
        check_len("costs", self.costs.len(), self.actions, "A")?;
        check_len("p", self.p.len(), self.actions, "A")?;
        for (a, row) in self.p.iter().enumerate() {
            check_len(&format!("p row {a}"), row.len(), self.outcomes, "Q")?;
        }
        let mu = parse_vec(&self.mu, "mu")?;
        let costs = parse_vec(&self.costs, "costs")?;
        let p = parse_rows(&self.p, "p")?;
        let v = match &self.v {
            Some(v) => {
                check_len("v", v.len(), self.types, "T")?;
                for (t, row) in v.iter().enumerate() {
                    check_len(&format!("v row {t}"), row.len(), self.outcomes, "Q")?;
                }
                Some(parse_rows(v, "v")?)
            }
            None => None,
        };
        match (&self.alpha, &self.baseline) {
            (None, None) => {
                let v = v.ok_or_else(|| {
                    CliError::Invalid("v is required unless alpha and baseline are given".into())
                })?;
                Ok(Loaded {
                    inst: Instance::new(mu, costs, p, v)?,
                    single: None,
                })
            }
            (Some(alpha), Some(baseline)) => {
                check_len("alpha", alpha.len(), self.types, "T")?;
                check_len("baseline", baseline.len(), self.outcomes, "Q")?;
                let alpha = parse_vec(alpha, "alpha")?;
                let baseline = parse_vec(baseline, "baseline")?;
                let derived: Vec<Vec<Rational>> = alpha
                    .iter()
                    .map(|a| baseline.iter().map(|b| a * b).collect())
                    .collect();
                if let Some(v) = &v {
                    if let Some(t) = (0..self.types).find(|&t| v[t] != derived[t]) {
                        return Err(CliError::Invalid(format!(
                            "v row {t} is not alpha[{t}] times baseline"
                        )));
                    }
                }
                let single = SingleParamInstance::new(
                    mu.clone(),
                    costs.clone(),
                    p.clone(),
                    alpha,
                    baseline,
                )?;
                Ok(Loaded {
                    inst: Instance::new(mu, costs, p, derived)?,
                    single: Some(single),
                })
            }
            _ => Err(CliError::Invalid(
                "alpha and baseline must be given together".into(),
            )),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance(path: &Path) -> CliResult<Loaded> {
    read_json::<InstanceFile>(path)?.load()
}

pub fn write_instance(file: &InstanceFile, path: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(file).expect("instance serializes") + "\n";
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractFile {
    pub action: usize,
    pub w: Num,
    pub x: Vec<Num>,
}

/// One entry per type; `null` is the opt-out.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuFile {
    pub contracts: Vec<Option<ContractFile>>,
}

impl MenuFile {
    pub fn to_menu(&self) -> CliResult<DirectMenu> {
        let contracts = self
            .contracts
            .iter()
            .enumerate()
            .map(|(t, c)| {
                let Some(c) = c else { return Ok(None) };
                let w = c.w.parse(&format!("contract {t} w"))?;
                let usage =
                    c.x.iter()
                        .enumerate()
                        .map(|(q, x)| match x {
                            Num::Text(s) if s == "EXCLUDE" => Ok(UsagePrice::Exclude),
                            _ => x
                                .parse(&format!("contract {t} x[{q}]"))
                                .map(UsagePrice::Finite),
                        })
                        .collect::<CliResult<_>>()?;
                Ok(Some(Contract::new(c.action, w, usage)?))
            })
            .collect::<CliResult<_>>()?;
        Ok(DirectMenu::new(contracts))
    }
}

pub fn read_menu(path: &Path) -> CliResult<DirectMenu> {
    read_json::<MenuFile>(path)?.to_menu()
}
