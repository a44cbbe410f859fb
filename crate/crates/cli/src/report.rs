//! Reports: serialized as JSON with `--json`, otherwise rendered as text.

use std::fmt::Write;

use serde::Serialize;
use tariff_core::exact::{SolveResult, Witness};
use tariff_core::model::{Choice, Contract, MenuDiagnostics};
use tariff_core::rational::to_decimal;
use tariff_core::Rational;

#[derive(Clone, Debug, Serialize)]
pub struct Amount {
    pub exact: String,
    pub decimal: String,
}

impl Amount {
    pub fn new(r: &Rational) -> Self {
        Self {
            exact: r.to_string(),
            decimal: to_decimal(r, 6),
        }
    }
}

impl std::fmt::Display for Amount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.exact, self.decimal)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractOut {
    pub action: usize,
    pub w: String,
    pub x: Vec<String>,
}

impl ContractOut {
    pub fn new(c: &Contract) -> Self {
        Self {
            action: c.action,
            w: c.upfront.to_string(),
            x: c.usage.iter().map(ToString::to_string).collect(),
        }
    }
}

impl std::fmt::Display for ContractOut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "action {}, w {}, x [{}]",
            self.action,
            self.w,
            self.x.join(", ")
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MenuOut {
    /// "direct" has one entry per type (`null` opts out); "indirect" lists offered contracts.
    pub kind: &'static str,
    pub contracts: Vec<Option<ContractOut>>,
}

impl MenuOut {
    pub fn new(w: &Witness) -> Self {
        match w {
            Witness::Direct(m) => Self {
                kind: "direct",
                contracts: m
                    .contracts
                    .iter()
                    .map(|c| c.as_ref().map(ContractOut::new))
                    .collect(),
            },
            Witness::Indirect(m) => Self {
                kind: "indirect",
                contracts: m
                    .contracts
                    .iter()
                    .map(|c| Some(ContractOut::new(c)))
                    .collect(),
            },
        }
    }

    fn render(&self, out: &mut String) {
        let label = if self.kind == "direct" {
            "type"
        } else {
            "contract"
        };
        let _ = writeln!(out, "menu ({}):", self.kind);
        if self.contracts.is_empty() {
            let _ = writeln!(out, "  (empty)");
        }
        for (i, c) in self.contracts.iter().enumerate() {
            match c {
                Some(c) => {
                    let _ = writeln!(out, "  {label} {i}: {c}");
                }
                None => {
                    let _ = writeln!(out, "  {label} {i}: opt out");
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeOut {
    /// Index of the chosen contract, `null` for opting out.
    pub choice: Option<usize>,
    pub utility: Amount,
    pub revenue: Amount,
    pub profit: Amount,
    pub accepted: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsOut {
    pub ic_ir: bool,
    pub types: Vec<TypeOut>,
    pub ic_violations: Vec<(usize, usize)>,
    pub ir_violations: Vec<usize>,
}

impl DiagnosticsOut {
    pub fn new(d: &MenuDiagnostics) -> Self {
        Self {
            ic_ir: d.is_ic_ir(),
            types: d
                .types
                .iter()
                .map(|r| TypeOut {
                    choice: match r.choice {
                        Choice::OptOut => None,
                        Choice::Contract(i) => Some(i),
                    },
                    utility: Amount::new(&r.utility),
                    revenue: Amount::new(&r.revenue),
                    profit: Amount::new(&r.profit),
                    accepted: r.accepted.clone(),
                })
                .collect(),
            ic_violations: d.ic_violations.clone(),
            ir_violations: d.ir_violations.clone(),
        }
    }

    fn render(&self, out: &mut String) {
        let _ = writeln!(out, "types:");
        for (t, r) in self.types.iter().enumerate() {
            let choice = r
                .choice
                .map_or("opt out".to_string(), |i| format!("contract {i}"));
            let _ = writeln!(
                out,
                "  type {t}: {choice}, utility {}, revenue {}, profit {}, accepts {:?}",
                r.utility.exact, r.revenue.exact, r.profit.exact, r.accepted
            );
        }
        if self.ic_ir {
            let _ = writeln!(out, "IC and IR: yes");
        } else {
            let _ = writeln!(out, "IC and IR: no");
            for (t, k) in &self.ic_violations {
                let _ = writeln!(out, "  type {t} strictly prefers contract {k}");
            }
            for t in &self.ir_violations {
                let _ = writeln!(out, "  type {t} gets negative utility");
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub regime: String,
    pub profit: Amount,
    pub h_mu: Amount,
    pub menu: MenuOut,
    pub diagnostics: DiagnosticsOut,
    pub programs: u64,
    pub patterns: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<Amount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Amount>,
    pub seconds: f64,
}

impl SolveReport {
    pub fn new(regime: &str, r: &SolveResult, h_mu: &Rational, seconds: f64) -> Self {
        Self {
            regime: regime.to_string(),
            profit: Amount::new(&r.profit),
            h_mu: Amount::new(h_mu),
            menu: MenuOut::new(&r.witness),
            diagnostics: DiagnosticsOut::new(&r.diagnostics),
            programs: r.counters.programs,
            patterns: r.counters.patterns,
            cross_check: r.cross_check.as_ref().map(Amount::new),
            epsilon: None,
            seconds,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "regime: {}", self.regime);
        if let Some(e) = &self.epsilon {
            let _ = writeln!(out, "epsilon: {e}");
        }
        let _ = writeln!(out, "profit: {}", self.profit);
        if let Some(c) = &self.cross_check {
            let _ = writeln!(out, "cross-check: {c}");
        }
        let _ = writeln!(out, "H_mu: {}", self.h_mu);
        self.menu.render(&mut out);
        self.diagnostics.render(&mut out);
        let _ = writeln!(
            out,
            "programs: {}, patterns: {}",
            self.programs, self.patterns
        );
        let _ = writeln!(out, "time: {:.3}s", self.seconds);
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeOut {
    pub regime: &'static str,
    /// `null` when the solver refused the instance.
    pub profit: Option<Amount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub menu: Option<MenuOut>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapOut {
    pub name: String,
    /// `null` when the denominator is zero.
    pub ratio: Option<Amount>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub regimes: Vec<RegimeOut>,
    pub h_mu: Amount,
    pub gaps: Vec<GapOut>,
    /// `R_upfront = R_mandatory <= R <= H_mu R_mandatory`; `null` if a needed regime was refused.
    pub sandwich: Option<bool>,
}

impl CompareReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.regimes {
            match (&r.profit, &r.refused) {
                (Some(p), _) => {
                    let _ = writeln!(out, "{:<10} {p} [{:.3}s]", r.regime, r.seconds);
                }
                (None, reason) => {
                    let _ = writeln!(
                        out,
                        "{:<10} refused: {}",
                        r.regime,
                        reason.as_deref().unwrap_or("")
                    );
                }
            }
        }
        let _ = writeln!(out, "H_mu: {}", self.h_mu);
        for g in &self.gaps {
            match &g.ratio {
                Some(r) => {
                    let _ = writeln!(out, "{}: {r}", g.name);
                }
                None => {
                    let _ = writeln!(out, "{}: undefined", g.name);
                }
            }
        }
        let verdict = match self.sandwich {
            Some(true) => "holds",
            Some(false) => "VIOLATED",
            None => "not checked",
        };
        let _ = writeln!(out, "sandwich: {verdict}");
        for r in &self.regimes {
            if let Some(m) = &r.menu {
                let _ = writeln!(out, "[{}]", r.regime);
                m.render(&mut out);
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleParamReport {
    pub m: Amount,
    pub action: usize,
    pub lp_value: Amount,
    pub threshold_alpha: Amount,
    pub contract: MenuOut,
    pub revenue: Amount,
    /// Revenue net of the action cost.
    pub profit: Amount,
    /// Exact optimum of the same instance; `null` when refused.
    pub exact: Option<Amount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
    pub zero_costs: bool,
    pub seconds: f64,
}

impl SingleParamReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "M: {} (action {})", self.m, self.action);
        let _ = writeln!(out, "LP relaxation optimum: {}", self.lp_value);
        let _ = writeln!(out, "threshold alpha: {}", self.threshold_alpha);
        let _ = writeln!(out, "single contract revenue: {}", self.revenue);
        let _ = writeln!(out, "single contract profit: {}", self.profit);
        match (&self.exact, &self.refused) {
            (Some(e), _) => {
                let _ = writeln!(out, "exact optimum: {e}");
            }
            (None, reason) => {
                let _ = writeln!(
                    out,
                    "exact optimum refused: {}",
                    reason.as_deref().unwrap_or("")
                );
            }
        }
        if !self.zero_costs {
            let _ = writeln!(
                out,
                "note: costs are nonzero, so the single contract need not be optimal"
            );
        }
        self.contract.render(&mut out);
        let _ = writeln!(out, "time: {:.3}s", self.seconds);
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub items: Vec<u64>,
    pub exists: bool,
    pub profit: Amount,
    pub threshold: Amount,
}

impl PartitionReport {
    pub fn render(&self) -> String {
        if self.exists {
            format!("PARTITION EXISTS (profit {} = 9M/4)\n", self.profit.exact)
        } else {
            format!(
                "NO PARTITION (profit {} < 9M/4 = {})\n",
                self.profit.exact, self.threshold.exact
            )
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MenuCheckReport {
    pub regime: &'static str,
    pub profit: Amount,
    pub diagnostics: DiagnosticsOut,
}

impl MenuCheckReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "regime: {}", self.regime);
        let _ = writeln!(out, "profit: {}", self.profit);
        self.diagnostics.render(&mut out);
        out
    }
}
