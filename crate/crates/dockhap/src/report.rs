//! Capability reports for a scenario's device set.

use std::fmt::Write as _;

use dockhap_core::capability::{compose, CapabilityError, Device, DockEdge, Extent, HybridCapability};
use dockhap_core::docking::Dof;
use dockhap_core::scenario::ScenarioConfig;
use serde_json::{json, Value};

/// Every arm docks the scenario's glove with the configured joint.
pub fn scenario_capability(cfg: &ScenarioConfig) -> Result<HybridCapability, CapabilityError> {
    let mut devices: Vec<Device> = cfg.arms.iter().map(|a| Device::Arm(a.spec)).collect();
    let glove = devices.len();
    devices.push(Device::Glove { spec: cfg.glove, hand: 0 });
    let edges: Vec<DockEdge> =
        (0..cfg.arms.len()).map(|i| DockEdge { parent: i, child: glove, joint: cfg.docking.joint }).collect();
    compose(&devices, &edges, cfg.docking.mode)
}

fn extent_deg(e: Extent) -> String {
    match e {
        Extent::Finite(v) => format!("{v}°"),
        Extent::Unbounded => "∞".into(),
    }
}

fn extent_json(e: Extent) -> Value {
    match e {
        Extent::Finite(v) => json!(v),
        Extent::Unbounded => json!("unbounded"),
    }
}

/// Groups equal values as `n×v`, in first-seen order.
fn grouped(values: &[f64], unit: &str) -> String {
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for v in values {
        match groups.iter_mut().find(|(g, _)| g == v) {
            Some((_, n)) => *n += 1,
            None => groups.push((*v, 1)),
        }
    }
    groups.iter().map(|(v, n)| format!("{n}×{v} {unit}")).collect::<Vec<_>>().join(" + ")
}

fn mm(v: f64) -> f64 {
    (v * 1e6).round() / 1e3
}

pub fn render_text(name: &str, cap: &HybridCapability) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {name}");
    let _ = writeln!(s, "mode: {}", cap.mode.name());
    match cap.translation.enhanced_bounds() {
        Some(b) => {
            let d = b.size();
            let _ = writeln!(s, "translation (grounded): {}×{}×{} mm", mm(d.x), mm(d.y), mm(d.z));
        }
        None => {
            let _ = writeln!(s, "translation (grounded): none");
        }
    }
    let outside = match cap.translation.outside {
        Some(Extent::Unbounded) => "unbounded".to_string(),
        Some(Extent::Finite(v)) => format!("{v} m"),
        None => "none".into(),
    };
    let _ = writeln!(s, "translation (outside): {outside}");
    let rot: Vec<String> = cap.rotation.iter().map(|e| extent_deg(*e)).collect();
    let _ = writeln!(s, "rotation: {}", rot.join("×"));
    let f = cap.force_envelope.to_array();
    let nonzero: Vec<f64> = f.iter().copied().filter(|v| *v > 0.0).collect();
    let _ = writeln!(s, "force: {}", if nonzero.is_empty() { "none".into() } else { grouped(&nonzero, "N") });
    let mut torques: Vec<String> = Vec::new();
    let arm_t: Vec<f64> = cap.torque_envelope.iter().map(|(_, t)| *t).collect();
    if !arm_t.is_empty() {
        torques.push(grouped(&arm_t, "Nm"));
    }
    if !cap.glove_torques.is_empty() {
        torques.push(grouped(&cap.glove_torques, "Nm"));
    }
    let _ = writeln!(s, "torque: {}", if torques.is_empty() { "none".into() } else { torques.join(" + ") });
    let degraded: Vec<&str> = cap.degraded_dofs.iter().map(Dof::name).collect();
    let rot_degraded = cap.degraded_dofs.iter().filter(|d| d.is_rotation()).count();
    let trans_degraded = degraded.len() - rot_degraded;
    let _ = writeln!(
        s,
        "degraded DOFs: {rot_degraded} rotational, {trans_degraded} translational ({})",
        if degraded.is_empty() { "none".into() } else { degraded.join(", ") }
    );
    s
}

pub fn render_json(name: &str, cap: &HybridCapability) -> Value {
    let bounds = cap.translation.enhanced_bounds().map(|b| {
        let d = b.size();
        json!([mm(d.x), mm(d.y), mm(d.z)])
    });
    json!({
        "scenario": name,
        "mode": cap.mode.name(),
        "translation_mm": bounds,
        "translation_outside": cap.translation.outside.map(extent_json),
        "rotation_deg": cap.rotation.iter().map(|e| extent_json(*e)).collect::<Vec<_>>(),
        "force_n": cap.force_envelope.to_array(),
        "arm_torque_nm": cap.torque_envelope.iter().map(|(d, t)| json!({"dof": d.name(), "max": t})).collect::<Vec<_>>(),
        "glove_torque_nm": cap.glove_torques,
        "glove_rotation_deg": cap.glove_rotation.iter().map(|e| extent_json(*e)).collect::<Vec<_>>(),
        "degraded_dofs": cap.degraded_dofs.iter().map(Dof::name).collect::<Vec<_>>(),
    })
}
