//! Rigid transforms and the tracker-driven effector correction used for docking.
//!
//! A [`RigidTransform`] maps points from its child frame into its parent frame:
//! `p_parent = rotation * p_child + translation`. Composition follows the usual
//! matrix-product convention, so `a.compose(&b)` (or `a * b`) applies `b` first.

use core::fmt;
use core::ops::Mul;

use thiserror::Error;

use crate::math::{Quat, Vec3};

/// Tolerance for purely algebraic identities on transforms.
pub const ALGEBRAIC_TOL: f64 = 1e-9;
/// Tolerance for quantities that went through the physics stepper.
pub const INTEGRATED_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    rotation: Quat,
    translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        RigidTransform::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Quat::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Builds a transform, renormalizing the rotation.
    pub fn new(rotation: Quat, translation: Vec3) -> Self {
        RigidTransform {
            rotation: rotation.normalized(),
            translation,
        }
    }

    pub fn from_translation(t: Vec3) -> Self {
        RigidTransform::new(Quat::IDENTITY, t)
    }

    pub fn from_rotation(q: Quat) -> Self {
        RigidTransform::new(q, Vec3::ZERO)
    }

    #[inline]
    pub fn rotation(&self) -> Quat {
        self.rotation
    }

    #[inline]
    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn with_translation(&self, t: Vec3) -> Self {
        RigidTransform::new(self.rotation, t)
    }

    pub fn with_rotation(&self, q: Quat) -> Self {
        RigidTransform::new(q, self.translation)
    }

    /// `self * other`: the single rigid motion equal to applying `other`, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation.mul(other.rotation).normalized(),
            translation: self.translation + self.rotation.rotate(other.translation),
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let inv = self.rotation.conjugate().normalized();
        RigidTransform {
            rotation: inv,
            translation: -inv.rotate(self.translation),
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    #[inline]
    pub fn inverse_transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.conjugate().rotate(v)
    }

    /// Rotation angle (rad) and translation distance (m) between two poses.
    pub fn distance_to(&self, other: &RigidTransform) -> (f64, f64) {
        (
            self.rotation.angle_to(other.rotation),
            self.translation.distance(other.translation),
        )
    }

    pub fn approx_eq(&self, other: &RigidTransform, tol: f64) -> bool {
        let (a, d) = self.distance_to(other);
        a <= tol && d <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.is_finite() && self.translation.is_finite()
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;
    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a RigidTransform> for &'a RigidTransform {
    type Output = RigidTransform;
    fn mul(self, rhs: &'a RigidTransform) -> RigidTransform {
        self.compose(rhs)
    }
}

/// The named coordinate frames that take part in docking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameTag {
    World,
    ArmBase,
    Effector,
    Tool,
    Target,
}

impl fmt::Display for FrameTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrameTag::World => "world",
            FrameTag::ArmBase => "arm_base",
            FrameTag::Effector => "effector",
            FrameTag::Tool => "tool",
            FrameTag::Target => "target",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame mismatch: expected {expected}, found {found}")]
    Mismatch { expected: FrameTag, found: FrameTag },
}

/// A transform that knows which frame it maps from (`child`) and into (`parent`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedTransform {
    pub parent: FrameTag,
    pub child: FrameTag,
    pub transform: RigidTransform,
}

impl TaggedTransform {
    pub fn new(parent: FrameTag, child: FrameTag, transform: RigidTransform) -> Self {
        TaggedTransform { parent, child, transform }
    }

    /// `parent<-child` composed with `child<-x` gives `parent<-x`.
    pub fn then(&self, other: &TaggedTransform) -> Result<TaggedTransform, FrameError> {
        if self.child != other.parent {
            return Err(FrameError::Mismatch {
                expected: self.child,
                found: other.parent,
            });
        }
        Ok(TaggedTransform::new(
            self.parent,
            other.child,
            self.transform.compose(&other.transform),
        ))
    }

    pub fn inverse(&self) -> TaggedTransform {
        TaggedTransform::new(self.child, self.parent, self.transform.inverse())
    }

    pub fn expect(&self, parent: FrameTag, child: FrameTag) -> Result<&RigidTransform, FrameError> {
        if self.parent != parent {
            return Err(FrameError::Mismatch { expected: parent, found: self.parent });
        }
        if self.child != child {
            return Err(FrameError::Mismatch { expected: child, found: self.child });
        }
        Ok(&self.transform)
    }
}

/// Every intermediate of the effector correction, in evaluation order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectorCorrection {
    pub effect_local: RigidTransform,
    pub target_local: RigidTransform,
    pub effector_to_tool: RigidTransform,
    pub tool_to_effector: RigidTransform,
    pub effect_local_target: RigidTransform,
    pub correction: RigidTransform,
    pub effect_forward_target: RigidTransform,
}

/// Computes the effector command that brings the tracked tool onto `target_w`.
///
/// `base_w`, `effect_w`, `tool_w` and `target_w` are externally tracked world
/// poses; `effect_fwd` is the effector pose as reported by the arm's own
/// kinematics. The correction is computed in the arm base frame and applied on
/// the right of `effect_fwd`, so a miscalibrated base estimate in the arm's
/// kinematics cancels out.
pub fn solve_effector_correction(
    base_w: &RigidTransform,
    effect_w: &RigidTransform,
    tool_w: &RigidTransform,
    target_w: &RigidTransform,
    effect_fwd: &RigidTransform,
) -> EffectorCorrection {
    let base_inv = base_w.inverse();
    let effect_local = base_inv.compose(effect_w);
    let target_local = base_inv.compose(target_w);
    let effector_to_tool = effect_local.inverse().compose(&base_inv.compose(tool_w));
    let tool_to_effector = effector_to_tool.inverse();
    let effect_local_target = target_local.compose(&tool_to_effector);
    let correction = effect_local.inverse().compose(&effect_local_target);
    let effect_forward_target = effect_fwd.compose(&correction);
    EffectorCorrection {
        effect_local,
        target_local,
        effector_to_tool,
        tool_to_effector,
        effect_local_target,
        correction,
        effect_forward_target,
    }
}

/// Returns only the corrected forward effector target.
pub fn effector_correction(
    base_w: &RigidTransform,
    effect_w: &RigidTransform,
    tool_w: &RigidTransform,
    target_w: &RigidTransform,
    effect_fwd: &RigidTransform,
) -> RigidTransform {
    solve_effector_correction(base_w, effect_w, tool_w, target_w, effect_fwd).effect_forward_target
}

/// Frame-checked variant of [`effector_correction`].
///
/// Inputs must be tagged `world<-arm_base`, `world<-effector`, `world<-tool`,
/// `world<-target` and `arm_base<-effector`; the result is `arm_base<-effector`.
pub fn effector_correction_tagged(
    base_w: &TaggedTransform,
    effect_w: &TaggedTransform,
    tool_w: &TaggedTransform,
    target_w: &TaggedTransform,
    effect_fwd: &TaggedTransform,
) -> Result<TaggedTransform, FrameError> {
    use FrameTag::*;
    let b = base_w.expect(World, ArmBase)?;
    let e = effect_w.expect(World, Effector)?;
    let t = tool_w.expect(World, Tool)?;
    let g = target_w.expect(World, Target)?;
    let f = effect_fwd.expect(ArmBase, Effector)?;
    Ok(TaggedTransform::new(
        ArmBase,
        Effector,
        effector_correction(b, e, t, g, f),
    ))
}
