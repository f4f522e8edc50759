//! Self-describing JSON and LaTeX documents for tables, bilinear forms and operators.

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::Q;
use crate::error::Result;
use crate::flat::{symmetrized_display, BilinearCoeffTable};
use crate::tensor::{Head, OperatorExpr, TensorJetExpr};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact rational as `"p/q"` (denominator always present).
pub fn q_string(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Sign and normalization choices every document is computed under.
pub fn conventions() -> Value {
    json!({
        "laplacian": "Delta = delta d = -g^{ab} nabla_a nabla_b on functions",
        "codifferential": "(delta w)_I = -w_{aI;a}",
        "riemann": "R_{abcd} = g(R(e_a,e_b)e_d, e_c); R_{abab} = +1 on the unit sphere",
        "ricci": "Rc_{bd} = R_{abad}",
        "schouten": "rho = (Rc - J g)/(n-2), J = Sc/(2(n-1))",
        "ricci_identity": "T_{;ab} - T_{;ba} = sum over slots of R_{b a c e} T[c -> e]",
        "sphere_measure": "normalized: integral of 1 over S^{n-1} is 1",
        "jets": "f_{;ij...} are iterated covariant derivatives; flat tables use coordinate partials",
        "leading_coefficient": "c in P = c Delta^{n/2} + lower order",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TermRecord {
    /// Exponent vector (tables) or derivative labels (expressions); `None` for operators.
    pub f_jet: Option<Vec<u32>>,
    pub h_jet: Vec<u32>,
    pub curvature: Vec<Value>,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputDocument {
    pub dimension: usize,
    pub kind: String,
    pub terms: Vec<TermRecord>,
    pub conventions: Value,
    pub engine_version: String,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub metadata: serde_json::Map<String, Value>,
}

impl OutputDocument {
    fn new(dimension: usize, kind: &str, terms: Vec<TermRecord>) -> Self {
        OutputDocument {
            dimension,
            kind: kind.into(),
            terms,
            conventions: conventions(),
            engine_version: ENGINE_VERSION.into(),
            metadata: Default::default(),
        }
    }

    pub fn with(mut self, key: &str, v: Value) -> Self {
        self.metadata.insert(key.into(), v);
        self
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

/// Coordinate-partial coefficient table `Σ c ∂^α f ∂^β h`.
pub fn table_document(t: &BilinearCoeffTable) -> OutputDocument {
    let terms = t
        .entries
        .iter()
        .map(|((a, b), c)| TermRecord {
            f_jet: Some(a.0.iter().map(|&e| e as u32).collect()),
            h_jet: b.0.iter().map(|&e| e as u32).collect(),
            curvature: vec![],
            coeff: q_string(c),
        })
        .collect();
    OutputDocument::new(t.n, "coeff-table", terms)
}

fn expr_terms(e: &TensorJetExpr, with_f: bool) -> Vec<TermRecord> {
    let labels = |v: &[u8]| v.iter().map(|&l| l as u32).collect::<Vec<_>>();
    e.terms
        .iter()
        .map(|t| {
            let f_jet = if with_f { t.jet_factor('f').map(|(_, f)| labels(f.derivs())) } else { None };
            let h_jet = t.jet_factor('h').map(|(_, f)| labels(f.derivs())).unwrap_or_default();
            let curvature = t
                .factors
                .iter()
                .filter(|f| !matches!(f.head, Head::Jet(_)))
                .map(|f| json!({ "tensor": f.head.plain(), "slots": labels(f.slots()), "derivatives": labels(f.derivs()) }))
                .collect();
            TermRecord { f_jet, h_jet, curvature, coeff: q_string(&t.coeff) }
        })
        .collect()
}

/// Covariant bilinear form in `f`, `h`; index labels are shared integers (index-graph form).
pub fn bilinear_document(e: &TensorJetExpr) -> OutputDocument {
    OutputDocument::new(e.n, "bilinear", expr_terms(e, true)).with("text", Value::String(e.to_string()))
}

pub fn operator_document(p: &OperatorExpr) -> OutputDocument {
    OutputDocument::new(p.expr.n, "operator", expr_terms(&p.expr, false))
        .with("leading_coefficient", Value::String(q_string(&p.leading)))
        .with("text", Value::String(p.expr.to_string()))
}

/// Symmetrized LaTeX display of a flat table (semicolon jet notation).
pub fn table_latex(t: &BilinearCoeffTable, order: u32) -> Result<String> {
    symmetrized_display(t, order)
}
