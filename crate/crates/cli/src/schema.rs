//! Scenario catalog and the parameter schema every config is validated against.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Phase,
    Holonomy,
    Scheme,
    Grape,
    Sweep,
    Dd,
    Dfs,
}

impl Kind {
    pub const ALL: [Kind; 7] = [Kind::Phase, Kind::Holonomy, Kind::Scheme, Kind::Grape, Kind::Sweep, Kind::Dd, Kind::Dfs];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Phase => "phase",
            Kind::Holonomy => "holonomy",
            Kind::Scheme => "scheme",
            Kind::Grape => "grape",
            Kind::Sweep => "sweep",
            Kind::Dd => "dd",
            Kind::Dfs => "dfs",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ParamType {
    Number,
    Integer,
    Bool,
    Text { choices: Vec<&'static str> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Any,
    Positive,
    NonNegative,
    NonZero,
    Range(f64, f64),
}

impl Bound {
    pub fn admits(self, x: f64) -> bool {
        match self {
            Bound::Any => x.is_finite(),
            Bound::Positive => x.is_finite() && x > 0.0,
            Bound::NonNegative => x.is_finite() && x >= 0.0,
            Bound::NonZero => x.is_finite() && x != 0.0,
            Bound::Range(lo, hi) => x >= lo && x <= hi,
        }
    }

    pub fn describe(self) -> String {
        match self {
            Bound::Any => "finite".into(),
            Bound::Positive => "> 0".into(),
            Bound::NonNegative => "≥ 0".into(),
            Bound::NonZero => "≠ 0".into(),
            Bound::Range(lo, hi) => format!("in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(flatten)]
    pub ty: ParamType,
    pub bound: Bound,
    /// None: required. Some(Null): optional without default.
    pub default: Option<Value>,
    pub doc: &'static str,
}

impl ParamSpec {
    fn new(name: &'static str, ty: ParamType, doc: &'static str) -> Self {
        Self { name, ty, bound: Bound::Any, default: None, doc }
    }

    fn bound(mut self, b: Bound) -> Self {
        self.bound = b;
        self
    }

    fn or(mut self, v: Value) -> Self {
        self.default = Some(v);
        self
    }

    fn optional(mut self) -> Self {
        self.default = Some(Value::Null);
        self
    }

    pub fn required(&self) -> bool {
        self.default.is_none()
    }
}

fn num(name: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec::new(name, ParamType::Number, doc)
}

fn int(name: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec::new(name, ParamType::Integer, doc)
}

fn text(name: &'static str, choices: &[&'static str], doc: &'static str) -> ParamSpec {
    ParamSpec::new(name, ParamType::Text { choices: choices.to_vec() }, doc)
}

fn flag(name: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec::new(name, ParamType::Bool, doc)
}

pub const SHAPES: &[&str] = &["square", "sin2"];
pub const NAMED_GATES: &[&str] = &["identity", "hadamard", "pauli_x", "pauli_y", "pauli_z", "cz"];

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
}

impl ScenarioSpec {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

fn spec(name: &'static str, kind: Kind, summary: &'static str, params: Vec<ParamSpec>) -> ScenarioSpec {
    ScenarioSpec { name, kind, summary, params }
}

fn substeps(default: u64) -> ParamSpec {
    int("substeps", "propagation substeps per segment").bound(Bound::Range(1.0, 1e6)).or(json!(default))
}

fn shape() -> ParamSpec {
    text("shape", SHAPES, "pulse envelope").or(json!("square"))
}

fn expect() -> ParamSpec {
    text("expect", NAMED_GATES, "named gate the result must equal up to global phase").optional()
}

fn tolerance(default: f64, doc: &'static str) -> ParamSpec {
    num("tolerance", doc).bound(Bound::Positive).or(json!(default))
}

fn polar() -> ParamSpec {
    num("theta", "polar angle").bound(Bound::Range(0.0, PI))
}

fn azimuth() -> ParamSpec {
    num("phi", "azimuth").or(json!(0.0))
}

/// Every runnable builder with its parameter schema.
pub fn catalog() -> Vec<ScenarioSpec> {
    use Kind::*;
    vec![
        spec("berry_loop", Phase, "Berry phase of a spin in a field precessing on a cone, by Wilson loop", vec![
            num("mu_b0", "field strength μB0").bound(Bound::Positive).or(json!(1.0)),
            polar(),
            int("samples", "loop samples").bound(Bound::Range(2.0, 1e7)).or(json!(10000)),
            int("band", "0 = lower, 1 = upper level").bound(Bound::Range(0.0, 1.0)).or(json!(1)),
            tolerance(1e-4, "allowed deviation from ∓π(1 − cos θ)"),
        ]),
        spec("aharonov_anandan", Phase, "cyclic-state geometric phases of a spin in a rotating field", vec![
            num("mu_b0", "field strength μB0").bound(Bound::Positive).or(json!(1.0)),
            polar(),
            num("omega", "rotation frequency").bound(Bound::NonZero),
            int("steps", "propagation steps per period").bound(Bound::Range(1.0, 1e7)).or(json!(400)),
            tolerance(1e-8, "allowed deviation from the closed form"),
        ]),
        spec("nmr_cycle", Phase, "dynamical-phase-free cyclic evolution of a driven NMR spin", vec![
            num("omega0", "Larmor frequency"),
            num("omega1", "drive amplitude"),
            num("omega", "drive frequency offset").bound(Bound::NonZero),
            int("steps", "propagation steps").bound(Bound::Range(1.0, 1e7)).or(json!(400)),
            tolerance(1e-8, "allowed deviation of both phases from the prediction"),
        ]),
        spec("unconventional_oscillator", Phase, "phases of a driven oscillator against a Fock-space simulation", vec![
            num("beta", "drive strength β").bound(Bound::Positive).or(json!(0.5)),
            num("omega", "drive frequency").bound(Bound::Positive).or(json!(1.0)),
            int("n_cut", "Fock cutoff").bound(Bound::Range(8.0, 400.0)).or(json!(40)),
            int("steps", "time steps over one period").bound(Bound::Range(1.0, 1e7)).or(json!(4000)),
            tolerance(1e-4, "allowed deviation of each phase"),
        ]),
        spec("tripod", Holonomy, "tripod holonomies U_z, U_y and the conditional two-ion phase on the octant loop", vec![
            text("path", &["octant"], "control-sphere loop").or(json!("octant")),
            int("samples", "loop samples").bound(Bound::Range(1000.0, 1e6)).or(json!(4000)),
            tolerance(1e-6, "allowed deviation from the loop-integral prediction"),
        ]),
        spec("lambda_resonant", Scheme, "resonant Λ-system holonomic gate n·σ", vec![
            polar(),
            azimuth(),
            shape(),
            substeps(64),
            expect(),
        ]),
        spec("lambda_phase", Scheme, "two-loop Λ phase gate diag(1, e^{2i(φ′−φ)})", vec![
            azimuth(),
            num("phi_prime", "azimuth of the second loop").or(json!(0.0)),
            substeps(64),
            expect(),
        ]),
        spec("two_segment_chain", Scheme, "two-pulse Λ chain with an intermediate frame change", vec![
            polar(),
            azimuth(),
            num("eta", "frame angle").or(json!(0.0)),
            substeps(64),
            expect(),
        ]),
        spec("single_shot", Scheme, "single-loop detuned Λ gate with rotation angle π(1 + sin γ)", vec![
            num("alpha", "polar angle of the rotation axis (half)").or(json!(0.6)),
            num("beta", "azimuth of the rotation axis").or(json!(0.0)),
            num("gamma", "detuning angle").bound(Bound::Range(-PI / 2.0, PI / 2.0)),
            substeps(256),
            expect(),
        ]),
        spec("sorensen_molmer", Scheme, "two-ion Sørensen–Mølmer holonomic gate", vec![
            polar(),
            azimuth(),
            substeps(64),
            expect(),
        ]),
        spec("four_level", Scheme, "double-Λ four-level gate at a commensurate pulse area", vec![
            text("mode", &["block_diagonal", "swap"], "gate structure"),
            num("d0", "first singular value of the coupling block").bound(Bound::Positive),
            num("d1", "second singular value").bound(Bound::Positive),
            num("left_angle", "U_l = e^{iασy}").or(json!(0.0)),
            num("right_angle", "U_r = e^{iασz}").or(json!(0.0)),
            substeps(64),
        ]),
        spec("xy_aux", Scheme, "single-qubit gate mediated by an XY-coupled auxiliary qubit", vec![
            polar(),
            num("beta", "phase of the gate").or(json!(PI)),
            num("commensurability_tol", "accepted |tan²(θ/2) − p/q|").bound(Bound::Positive).or(json!(1e-10)),
            shape(),
            substeps(64),
            expect(),
        ]),
        spec("xy_two_qubit", Scheme, "two-qubit gate through an auxiliary with XY couplings", vec![polar(), shape(), substeps(64)]),
        spec("orange_slice", Scheme, "three-pulse orange-slice gate e^{iγ n·σ}", vec![
            num("gamma", "geometric phase γ"),
            polar(),
            azimuth(),
            shape(),
            num("segment_time", "duration of each pulse").bound(Bound::Positive).or(json!(1.0)),
            substeps(64),
            expect(),
        ]),
        spec("ion_unconventional", Scheme, "trapped-ion unconventional geometric phase gate", vec![
            num("omega_d", "drive strength").bound(Bound::Positive).or(json!(0.5)),
            num("delta", "detuning").bound(Bound::Positive).or(json!(1.0)),
            azimuth(),
        ]),
        spec("adiabatic_phase", Scheme, "adiabatic Berry-phase gate of a spin in a precessing field", vec![
            num("mu_b0", "field strength μB0").bound(Bound::Positive).or(json!(1.0)),
            polar(),
            num("omega", "precession frequency").bound(Bound::Positive),
            num("adiabaticity_bound", "largest accepted ω/μB0").bound(Bound::Positive).or(json!(0.01)),
        ]),
        spec("spin_echo", Scheme, "spin-echo cancellation of the dynamical phase", vec![
            num("mu_b0", "field strength μB0").bound(Bound::Positive).or(json!(1.0)),
            polar(),
            num("omega", "precession frequency").bound(Bound::Positive).or(json!(0.01)),
            num("injected", "extra dynamical phase kicked in after each loop").or(json!(0.0)),
            int("loop_samples", "Wilson-loop samples").bound(Bound::Range(2.0, 1e7)).or(json!(2000)),
            substeps(4),
            num("max_deviation", "allowed distance from the prediction; the residual is non-adiabatic, O(ω)")
                .bound(Bound::Positive)
                .or(json!(1e-4)),
        ]),
        spec("conditional_adiabatic", Scheme, "adiabatic conditional phase gate of two coupled spins", vec![
            num("omega0", "Larmor frequency of the target"),
            num("omega", "drive frequency"),
            num("omega1", "drive amplitude"),
            num("coupling_j", "spin-spin coupling J"),
        ]),
        spec("s_sequence", Scheme, "NMR conditional gate built from the S sequence", vec![
            num("omega0", "Larmor frequency"),
            num("omega1", "drive amplitude").bound(Bound::NonNegative),
            num("omega", "drive frequency"),
            azimuth(),
            num("coupling_j", "spin-spin coupling J"),
        ]),
        spec("two_loop", Scheme, "two-loop NMR gate with cancelling dynamical phases", vec![
            num("omega0", "Larmor frequency of the first loop"),
            num("omega1", "drive amplitude of the first loop"),
            num("omega", "rotation frequency").bound(Bound::NonZero),
            num("gamma_target", "total geometric phase in units of π"),
            int("steps", "propagation steps per loop").bound(Bound::Range(1.0, 1e7)).or(json!(400)),
            tolerance(1e-8, "allowed deviation of the phases"),
        ]),
        spec("reverse_orange_slice", Scheme, "orange-slice gate → comoving frame → reverse-engineered Hamiltonian → propagation", vec![
            num("gamma", "geometric phase γ"),
            polar(),
            azimuth(),
            int("grid", "frame samples per pulse").bound(Bound::Range(2.0, 1e5)).or(json!(200)),
        ]),
        spec("sta_spin_loop", Scheme, "counterdiabatic driving of a spin around a cone in one loop", vec![
            polar(),
            num("omega", "loop rate").bound(Bound::Positive),
            substeps(4000),
        ]),
        spec("nv_hadamard", Grape, "noise-robust GRAPE for the NV-centre Λ Hadamard", vec![
            int("segments", "piecewise-constant segments").bound(Bound::Range(1.0, 1e5)).or(json!(100)),
            num("duration_ns", "gate duration").bound(Bound::Positive).or(json!(400.0)),
            num("time_unit_ns", "nanoseconds per dimensionless time unit").bound(Bound::Positive).or(json!(1.0)),
            num("eta", "holonomy penalty weight η").bound(Bound::NonNegative).or(json!(1e-6)),
            num("thermal_sigma_khz", "σ of the thermal detuning").bound(Bound::NonNegative).or(json!(130.0)),
            num("amplitude_halfwidth", "δ1 uniform on ± this").bound(Bound::NonNegative).or(json!(0.02)),
            flag("robust", "optimize the noise-averaged objective").or(json!(true)),
            int("quadrature_nodes", "nodes per noise parameter").bound(Bound::Range(1.0, 64.0)).or(json!(5)),
            text("init", &["lambda", "random"], "initial controls").or(json!("lambda")),
            num("init_bound", "amplitude box of random initial controls").bound(Bound::Positive).or(json!(0.05)),
            num("amplitude_bound", "clip controls to ± this").bound(Bound::Positive).optional(),
            num("step", "initial step ε").bound(Bound::Positive).or(json!(1e-2)),
            num("step_growth", "growth of ε after accepted steps").bound(Bound::Range(1.0, 10.0)).or(json!(1.5)),
            num("target", "stopping objective O_p").bound(Bound::Range(0.0, 1.0)).or(json!(0.997)),
            int("max_iterations", "iteration cap").bound(Bound::Range(0.0, 1e7)).or(json!(3000)),
            num("min_fidelity", "required noise-averaged fidelity").bound(Bound::Range(0.0, 1.0)).or(json!(0.995)),
        ]),
        spec("nv_lambda_sweep", Sweep, "fidelity landscape of the NV Λ Hadamard over (δ1, δ2)", vec![
            num("delta1_min", "smallest amplitude error").or(json!(-0.02)),
            num("delta1_max", "largest amplitude error").or(json!(0.02)),
            int("delta1_points", "grid points along δ1").bound(Bound::Range(1.0, 1e4)).or(json!(21)),
            num("delta2_min_khz", "smallest thermal detuning").or(json!(-260.0)),
            num("delta2_max_khz", "largest thermal detuning").or(json!(260.0)),
            int("delta2_points", "grid points along δ2").bound(Bound::Range(1.0, 1e4)).or(json!(21)),
            num("duration_ns", "gate duration").bound(Bound::Positive).or(json!(400.0)),
            num("time_unit_ns", "nanoseconds per time unit").bound(Bound::Positive).or(json!(1.0)),
            int("segments", "piecewise-constant segments").bound(Bound::Range(1.0, 1e5)).or(json!(100)),
            text("measure", &["process", "average"], "fidelity measure").or(json!("process")),
            num("min_mean_fidelity", "required grid-mean fidelity").bound(Bound::Range(0.0, 1.0)).optional(),
        ]),
        spec("dd_sequence", Dd, "dynamical decoupling of one qubit coupled to one environment qubit", vec![
            text("mode", &["x", "xy"], "pulse sequence"),
            num("tau", "free evolution between pulses").bound(Bound::Positive),
            int("cycles", "number of cycles").bound(Bound::Range(1.0, 1e6)).or(json!(1)),
            num("pulse_width", "finite π-pulse length; instantaneous when absent").bound(Bound::Positive).optional(),
            num("env_x", "environment field along x").or(json!(0.8)),
            num("env_z", "environment field along z").or(json!(0.3)),
            num("couple_x", "σx ⊗ σz coupling").or(json!(0.0)),
            num("couple_y", "σy ⊗ σx coupling").or(json!(0.4)),
            num("couple_z", "σz ⊗ σy coupling").or(json!(0.5)),
            num("max_residual", "required bound on the per-cycle residual").bound(Bound::Positive).optional(),
        ]),
        spec("dfs3_lambda", Dfs, "DFS₃-encoded Λ gate under collective dephasing by an environment qubit", vec![
            polar(),
            azimuth(),
            shape(),
            num("lambda", "strength of S_z ⊗ σx").or(json!(0.8)),
            num("env_field", "environment σz field").or(json!(0.4)),
            substeps(2000),
            tolerance(1e-8, "allowed logical infidelity"),
        ]),
        spec("ns_dimensions", Dfs, "noiseless-subsystem decomposition of N qubits", vec![int("qubits", "number of qubits").bound(Bound::Range(1.0, 30.0))]),
    ]
}

pub fn find(name: &str) -> Option<ScenarioSpec> {
    catalog().into_iter().find(|s| s.name == name)
}

pub fn builders_of(kind: Kind) -> Vec<&'static str> {
    catalog().into_iter().filter(|s| s.kind == kind).map(|s| s.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_every_kind_has_a_builder() {
        let cat = catalog();
        let mut names: Vec<_> = cat.iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
        for k in Kind::ALL {
            assert!(!builders_of(k).is_empty(), "{k:?}");
        }
        assert!(find("lambda_resonant").is_some());
    }

    #[test]
    fn defaults_satisfy_their_own_bounds() {
        for s in catalog() {
            for p in &s.params {
                if let Some(Value::Number(n)) = &p.default {
                    assert!(p.bound.admits(n.as_f64().unwrap()), "{}.{}", s.name, p.name);
                }
            }
        }
    }
}
