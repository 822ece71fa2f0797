#include "airgrasp/engine.hpp"

#include <algorithm>
#include <cmath>

namespace airgrasp {

namespace {

// Augmented integration vector: 26 mechanical entries plus 6 running energy
// integrals (supply and dissipation per subsystem).
constexpr int kAugDim = 32;
constexpr int kIdxPb = 0, kIdxVb = 3, kIdxR = 6, kIdxOmega = 15, kIdxPe = 18, kIdxVe = 21,
              kIdxS = 24, kIdxSdot = 25, kIdxSup = 26, kIdxDiss = 29;

using AugVec = Eigen::Matrix<double, kAugDim, 1>;

void pack_state(const SystemState& st, AugVec& x) {
  x.segment<3>(kIdxPb) = st.p_b;
  x.segment<3>(kIdxVb) = st.v_b;
  x.segment<9>(kIdxR) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(st.r_b.data());
  x.segment<3>(kIdxOmega) = st.omega;
  x.segment<3>(kIdxPe) = st.p_e;
  x.segment<3>(kIdxVe) = st.v_e;
  x(kIdxS) = st.s;
  x(kIdxSdot) = st.s_dot;
}

void unpack_state(const AugVec& x, SystemState& st) {
  st.p_b = x.segment<3>(kIdxPb);
  st.v_b = x.segment<3>(kIdxVb);
  st.r_b = Eigen::Map<const Mat3>(x.segment<9>(kIdxR).data());
  st.omega = x.segment<3>(kIdxOmega);
  st.p_e = x.segment<3>(kIdxPe);
  st.v_e = x.segment<3>(kIdxVe);
  st.s = x(kIdxS);
  st.s_dot = x(kIdxSdot);
}

double gripper_target_for(MissionPhase phase, const Setpoints& sp, const GripperParams& gp) {
  if (phase == MissionPhase::FreeFlight) return gp.open_hold;
  if (phase == MissionPhase::AerialGrasp) return gp.closed_hold;
  return sp.aperture_star;
}

struct FrozenControls {
  double thrust = 0.0;
  Vec3 torque{Vec3::Zero()};
  RotorThrusts rotors{RotorThrusts::Zero()};
  Vec3 u_uav{Vec3::Zero()};
  Vec3 u_man{Vec3::Zero()};
  double u_h = 0.0;
  Vec3 ff_uav{Vec3::Zero()};
  Vec3 ff_man{Vec3::Zero()};
  double ff_grip = 0.0;
  Vec3 p_b_ref{Vec3::Zero()};
  Vec3 p_e_ref{Vec3::Zero()};
  double s_ref = 0.0;
  Vec3 v_b_zoh{Vec3::Zero()};
  Vec3 v_e_zoh{Vec3::Zero()};
  double s_dot_zoh = 0.0;
  Vec3 f_phal{Vec3::Zero()};
  Vec3 object_accel{Vec3::Zero()};
  MissionPhase mission = MissionPhase::FreeFlight;
  double m_eff = 0.0;
  Mat3 r_star{Mat3::Identity()};
  bool degenerate = false;
};

struct MissionContext {
  double entry_time = 0.0;
  WallAttachment attachment;
  Pose grasp_offset;  // F_o in F_e, frozen at detach
  Eigen::Matrix<double, 1, 6> ag_row = Eigen::Matrix<double, 1, 6>::Zero();
  FeedForward ff;
  TransitionEvents events;
  double secure_timer = 0.0;
};

Pose object_pose_for(const SystemState& st, const ModelParams& mp, const MissionContext& ctx) {
  if (st.mission == MissionPhase::AerialGrasp) {
    return end_effector_in_inertial(st, mp.manip).compose(ctx.grasp_offset);
  }
  return ctx.attachment.attach_pose;
}

ChainForces eval_chain(const SystemState& st, const ModelParams& mp, const FrozenControls& fc,
                       const MissionContext& ctx) {
  ChainForces ch;

  if (st.mission == MissionPhase::Dock) {
    ch.contacts = resolve_contacts(st, mp.manip, mp.gripper, mp.geometry, mp.object, mp.contact);
    std::array<Pose, kNumContacts> frames;
    for (int k = 0; k < kNumContacts; ++k) {
      frames[static_cast<std::size_t>(k)] = ch.contacts.points[static_cast<std::size_t>(k)].frame_in_object;
    }
    ch.grasp = build_grasp_matrix(frames);
    ch.w_obj = environment_wrench(st, ch.grasp, ch.contacts.stacked_forces(), mp.object);
    const Pose object_in_ee =
        end_effector_in_inertial(st, mp.manip).inverse().compose(st.object_pose);
    ch.aperture_coupling = ch.contacts.aperture_force(mp.geometry, object_in_ee);
  } else if (st.mission == MissionPhase::AerialGrasp) {
    ch.w_obj = environment_wrench(st, ch.grasp, VecX::Zero(kContactForceDim), mp.object,
                                  fc.object_accel);
    Eigen::Matrix<double, 6, 1> w;
    w << ch.w_obj.force, ch.w_obj.moment;
    ch.aperture_coupling = (ctx.ag_row * w)(0);
  } else {
    ch.w_obj = environment_wrench(st, ch.grasp, VecX::Zero(kContactForceDim), mp.object);
  }

  // The gripper balance consumes the wrench the gripper applies to the
  // object: the Newton pair of the object-side wrench.
  const Wrench on_object = -ch.w_obj;
  ch.f_h = gripper_reaction(st, mp.manip, mp.gripper, fc.f_phal, on_object);

  // Manipulator point mass in F_m: m a = u_man + F_ext with F_ext = -f_h.
  ch.accel_e = (fc.u_man - ch.f_h.force) / fc.m_eff;
  ch.s_ddot = (fc.u_h + ch.aperture_coupling) / mp.gripper.phalange_mass;

  ch.f_man_cmd = manipulator_reaction(st, mp.manip, ch.accel_e, ch.f_h, fc.m_eff);
  ch.w_man = -ch.f_man_cmd;  // Newton pair consumed by the vehicle equation
  ch.w_man.frame = Frame::ManipBase;
  return ch;
}

struct Derivatives {
  AugVec dx = AugVec::Zero();
  Vec3 d_uav{Vec3::Zero()};
  Vec3 d_man{Vec3::Zero()};
  double d_grip = 0.0;
};

Derivatives eval_derivatives(const AugVec& x, const SystemState& proto, const ModelParams& mp,
                             const FrozenControls& fc, const MissionContext& ctx) {
  SystemState st = proto;
  unpack_state(x, st);
  st.mission = fc.mission;
  st.object_pose = object_pose_for(st, mp, ctx);

  ChainForces ch = eval_chain(st, mp, fc, ctx);
  const Vec3 m_gy = gyroscopic_moment(fc.rotors, st.omega, mp.uav);
  const Accel acc =
      uav_accel(st, ThrustTorque{fc.thrust, fc.torque}, ch.w_man, m_gy, mp.uav, mp.manip);

  Derivatives out;
  out.dx.segment<3>(kIdxPb) = st.v_b;
  out.dx.segment<3>(kIdxVb) = acc.linear;
  const Mat3 r_dot = st.r_b * skew(st.omega);
  out.dx.segment<9>(kIdxR) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(r_dot.data());
  out.dx.segment<3>(kIdxOmega) = acc.angular;
  out.dx.segment<3>(kIdxPe) = st.v_e;
  out.dx.segment<3>(kIdxVe) = ch.accel_e;
  out.dx(kIdxS) = st.s_dot;
  out.dx(kIdxSdot) = ch.s_ddot;

  // Passivity inputs: everything the generalized closed loop sees beyond its
  // own PD terms. The thrust mismatch covers attitude error, clamping and the
  // degenerate direction case.
  const Vec3 ideal_force = fc.u_uav - mp.uav.mass * kGravity * gravity_dir_inertial();
  const Vec3 actual_force = fc.thrust * (st.r_b * Vec3(0, 0, -1));
  const Vec3 f_ext_uav = st.r_b * (mp.manip.mount_pose.orientation * ch.w_man.force);
  out.d_uav = (actual_force - ideal_force) + f_ext_uav - fc.ff_uav;
  out.d_man = -ch.f_h.force - fc.ff_man;
  out.d_grip = ch.aperture_coupling - fc.ff_grip;

  out.dx(kIdxSup + 0) = out.d_uav.dot(st.v_b);
  out.dx(kIdxSup + 1) = out.d_man.dot(st.v_e);
  out.dx(kIdxSup + 2) = out.d_grip * st.s_dot;
  out.dx(kIdxDiss + 0) = st.v_b.dot(mp.uav_gains.damping.cwiseProduct(fc.v_b_zoh));
  out.dx(kIdxDiss + 1) = st.v_e.dot(mp.manip_gains.damping.cwiseProduct(fc.v_e_zoh));
  out.dx(kIdxDiss + 2) = st.s_dot * mp.gripper_gains.damping * fc.s_dot_zoh;
  return out;
}

AugVec integrate_step(const AugVec& x, double dt, IntegratorKind kind, const SystemState& proto,
                      const ModelParams& mp, const FrozenControls& fc, const MissionContext& ctx) {
  if (kind == IntegratorKind::RK4) {
    const AugVec k1 = eval_derivatives(x, proto, mp, fc, ctx).dx;
    const AugVec k2 = eval_derivatives(x + 0.5 * dt * k1, proto, mp, fc, ctx).dx;
    const AugVec k3 = eval_derivatives(x + 0.5 * dt * k2, proto, mp, fc, ctx).dx;
    const AugVec k4 = eval_derivatives(x + dt * k3, proto, mp, fc, ctx).dx;
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  // Semi-implicit Euler: velocities first, positions with the new velocities.
  const AugVec k = eval_derivatives(x, proto, mp, fc, ctx).dx;
  AugVec out = x;
  out.segment<3>(kIdxVb) += dt * k.segment<3>(kIdxVb);
  out.segment<3>(kIdxOmega) += dt * k.segment<3>(kIdxOmega);
  out.segment<3>(kIdxVe) += dt * k.segment<3>(kIdxVe);
  out(kIdxSdot) += dt * k(kIdxSdot);
  out.segment<3>(kIdxPb) += dt * out.segment<3>(kIdxVb);
  Mat3 r = Eigen::Map<const Mat3>(x.segment<9>(kIdxR).data());
  r += dt * r * skew(out.segment<3>(kIdxOmega));
  out.segment<9>(kIdxR) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(r.data());
  out.segment<3>(kIdxPe) += dt * out.segment<3>(kIdxVe);
  out(kIdxS) += dt * out(kIdxSdot);
  out.segment<6>(kIdxSup) += dt * k.segment<6>(kIdxSup);
  return out;
}

SubsystemEnergy subsystem_energy(double mass, const Vec3& v, const Vec3& e, const Vec3& k_diag,
                                 double supply, double dissipation) {
  SubsystemEnergy en;
  en.kinetic = 0.5 * mass * v.squaredNorm();
  en.potential = 0.5 * e.dot(k_diag.cwiseProduct(e));
  en.supply = supply;
  en.dissipation = dissipation;
  return en;
}

}  // namespace

VecX rk4_step(const std::function<VecX(double, const VecX&)>& f, double t, const VecX& x,
              double dt) {
  const VecX k1 = f(t, x);
  const VecX k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
  const VecX k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
  const VecX k4 = f(t + dt, x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Engine::Engine(ModelParams params, SimConfig config)
    : params_(std::move(params)), config_(config) {}

namespace {

FrozenControls make_controls(const SystemState& st, const Setpoints& sp, const ModelParams& mp,
                             const SimConfig& cfg, const MissionContext& ctx, double m_eff,
                             const Vec3& f_phal, const Vec3& object_accel) {
  FrozenControls fc;
  fc.mission = st.mission;
  fc.m_eff = m_eff;
  fc.f_phal = f_phal;
  fc.object_accel = object_accel;
  fc.ff_uav = ctx.ff.uav(st.mission);
  fc.ff_man = ctx.ff.manip(st.mission);
  fc.ff_grip = ctx.ff.gripper(st.mission);
  fc.p_b_ref = sp.p_b_star;
  fc.p_e_ref = sp.p_e_star;
  fc.s_ref = gripper_target_for(st.mission, sp, mp.gripper);
  fc.v_b_zoh = st.v_b;
  fc.v_e_zoh = st.v_e;
  fc.s_dot_zoh = st.s_dot;

  fc.u_uav = uav_control(st, sp, mp.uav_gains, ctx.ff);
  const ThrustAttitude ta = thrust_attitude_from_u(fc.u_uav, mp.uav.mass, st.r_b, cfg.yaw_ref);
  fc.r_star = ta.r_star;
  fc.degenerate = ta.degenerate;

  fc.u_man = manipulator_control(st, sp, mp.manip_gains, ctx.ff);
  fc.u_h = gripper_control(st, sp, mp.gripper_gains, ctx.ff, mp.geometry, mp.gripper);

  // The attitude compensation needs the mount reaction for the current state
  // and the translational commands just computed.
  FrozenControls probe = fc;
  probe.thrust = ta.thrust;
  const ChainForces ch = eval_chain(st, mp, probe, ctx);
  const Vec3 m_p = attitude_authority(st, ta.r_star, ch.w_man, mp.attitude_gains, mp.uav, mp.manip);

  RotorThrusts rotors = mixer_inverse(ThrustTorque{ta.thrust, m_p}, mp.uav);
  if (cfg.clamp_thrust) {
    rotors = rotors.cwiseMax(cfg.thrust_min).cwiseMin(cfg.thrust_max);
  }
  const ThrustTorque realized = mixer_forward(rotors, mp.uav);
  fc.rotors = rotors;
  fc.thrust = realized.thrust;
  fc.torque = realized.torque;
  return fc;
}

// Component-wise box clamp that also zeroes the outward velocity. Returns
// true when anything was clamped.
bool clamp_mechanical(SystemState& st, const ModelParams& mp) {
  bool clamped = false;
  for (int i = 0; i < 3; ++i) {
    if (st.p_e(i) < mp.manip.workspace.min(i)) {
      st.p_e(i) = mp.manip.workspace.min(i);
      st.v_e(i) = std::max(st.v_e(i), 0.0);
      clamped = true;
    } else if (st.p_e(i) > mp.manip.workspace.max(i)) {
      st.p_e(i) = mp.manip.workspace.max(i);
      st.v_e(i) = std::min(st.v_e(i), 0.0);
      clamped = true;
    }
  }
  if (st.s < mp.gripper.aperture_min) {
    st.s = mp.gripper.aperture_min;
    st.s_dot = std::max(st.s_dot, 0.0);
    clamped = true;
  } else if (st.s > mp.gripper.aperture_max) {
    st.s = mp.gripper.aperture_max;
    st.s_dot = std::min(st.s_dot, 0.0);
    clamped = true;
  }
  return clamped;
}

bool state_diverged(const SystemState& st, double limit) {
  if (!st.all_finite()) return true;
  return st.p_b.cwiseAbs().maxCoeff() > limit || st.v_b.cwiseAbs().maxCoeff() > limit ||
         st.omega.cwiseAbs().maxCoeff() > limit || st.p_e.cwiseAbs().maxCoeff() > limit ||
         st.v_e.cwiseAbs().maxCoeff() > limit || std::abs(st.s) > limit ||
         std::abs(st.s_dot) > limit;
}

}  // namespace

namespace {

MissionContext adhoc_context(const SystemState& state, const ModelParams& params) {
  MissionContext ctx;
  ctx.attachment.attach_pose = state.object_pose;
  ctx.attachment.breakaway_force = params.breakaway_force;
  ctx.ff = params.feed_forward();
  if (state.mission == MissionPhase::AerialGrasp) {
    ctx.grasp_offset =
        end_effector_in_inertial(state, params.manip).inverse().compose(state.object_pose);
  }
  return ctx;
}

double effective_arm_mass(const SystemState& state, const ModelParams& params) {
  return state.mission == MissionPhase::AerialGrasp ? params.manip.mass + params.object.mass
                                                    : params.manip.mass;
}

}  // namespace

ChainForces Engine::chain(const SystemState& state, const Setpoints& sp) const {
  const MissionContext ctx = adhoc_context(state, params_);
  const FrozenControls fc = make_controls(state, sp, params_, config_, ctx,
                                          effective_arm_mass(state, params_), Vec3::Zero(),
                                          Vec3::Zero());
  return eval_chain(state, params_, fc, ctx);
}

Engine::Accelerations Engine::accelerations(const SystemState& state, const Setpoints& sp) const {
  const MissionContext ctx = adhoc_context(state, params_);
  const FrozenControls fc = make_controls(state, sp, params_, config_, ctx,
                                          effective_arm_mass(state, params_), Vec3::Zero(),
                                          Vec3::Zero());
  AugVec x = AugVec::Zero();
  pack_state(state, x);
  const Derivatives d = eval_derivatives(x, state, params_, fc, ctx);
  Accelerations out;
  out.uav_linear = d.dx.segment<3>(kIdxVb);
  out.uav_angular = d.dx.segment<3>(kIdxOmega);
  out.arm = d.dx.segment<3>(kIdxVe);
  out.aperture = d.dx(kIdxSdot);
  return out;
}

SystemState Engine::step(const SystemState& state, const Setpoints& sp) const {
  const MissionContext ctx = adhoc_context(state, params_);
  const double m_eff = effective_arm_mass(state, params_);
  const FrozenControls fc =
      make_controls(state, sp, params_, config_, ctx, m_eff, Vec3::Zero(), Vec3::Zero());

  AugVec x = AugVec::Zero();
  pack_state(state, x);
  x = integrate_step(x, config_.dt, config_.integrator, state, params_, fc, ctx);

  SystemState out = state;
  unpack_state(x, out);
  out.r_b = orthonormalize(out.r_b);
  clamp_mechanical(out, params_);
  out.object_pose = object_pose_for(out, params_, ctx);
  return out;
}

SimTrace Engine::run(const SetpointProvider& provider, const SystemState& initial) const {
  SimTrace trace;
  trace.dt = config_.dt;
  trace.integrator = config_.integrator;
  const int n_steps = static_cast<int>(std::llround(config_.t_end / config_.dt));
  trace.steps.reserve(static_cast<std::size_t>(n_steps) + 1);

  MissionContext ctx;
  ctx.attachment.attach_pose = params_.object.attach_pose;
  ctx.attachment.breakaway_force = params_.breakaway_force;
  ctx.ff = params_.feed_forward();

  SystemState st = initial;
  st.object_pose = object_pose_for(st, params_, ctx);

  AugVec x = AugVec::Zero();
  pack_state(st, x);

  double m_eff = params_.manip.mass;
  if (st.mission == MissionPhase::AerialGrasp) m_eff += params_.object.mass;
  Vec3 f_phal = Vec3::Zero();
  Vec3 object_accel = Vec3::Zero();
  Setpoints sp_prev;
  double grip_target_prev = 0.0;
  bool have_prev_sp = false;
  VecX f_c_prev = VecX::Zero(kContactForceDim);
  bool contacts_active_prev = false;

  for (int k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * config_.dt;
    const Setpoints sp = provider(t, st, ctx.entry_time);
    const double grip_target = gripper_target_for(st.mission, sp, params_.gripper);

    // Moving-reference bookkeeping: the potential is referenced to the
    // setpoint, so a reference update between steps transfers energy that
    // must appear in the supply.
    if (have_prev_sp) {
      const auto ref_delta = [](const Vec3& p, const Vec3& ref_new, const Vec3& ref_old,
                                const Vec3& k_diag) {
        const Vec3 en = p - ref_new;
        const Vec3 eo = p - ref_old;
        return 0.5 * (en.dot(k_diag.cwiseProduct(en)) - eo.dot(k_diag.cwiseProduct(eo)));
      };
      x(kIdxSup + 0) += ref_delta(st.p_b, sp.p_b_star, sp_prev.p_b_star,
                                  params_.uav_gains.stiffness);
      x(kIdxSup + 1) += ref_delta(st.p_e, sp.p_e_star, sp_prev.p_e_star,
                                  params_.manip_gains.stiffness);
      x(kIdxSup + 2) += 0.5 * params_.gripper_gains.stiffness *
                        ((st.s - grip_target) * (st.s - grip_target) -
                         (st.s - grip_target_prev) * (st.s - grip_target_prev));
    }
    sp_prev = sp;
    grip_target_prev = grip_target;
    have_prev_sp = true;

    const FrozenControls fc =
        make_controls(st, sp, params_, config_, ctx, m_eff, f_phal, object_accel);
    const ChainForces ch = eval_chain(st, params_, fc, ctx);
    const Derivatives d0 = eval_derivatives(x, st, params_, fc, ctx);

    TraceStep row;
    row.t = t;
    row.state = st;
    row.setpoints = sp;
    row.gripper_target = fc.s_ref;
    row.w_man = ch.w_man;
    row.f_h = ch.f_h;
    row.w_obj = ch.w_obj;
    row.f_c = ch.contacts.stacked_forces();
    row.thrust = fc.thrust;
    row.torque = fc.torque;
    row.rotors = fc.rotors;
    row.attitude_error = rotation_angle(st.r_b, fc.r_star);
    row.d_uav = d0.d_uav;
    row.d_man = d0.d_man;
    row.d_grip = d0.d_grip;
    row.thrust_degenerate = fc.degenerate;
    if (sp.object_tracking_enabled) {
      const TrackingSetpoint tracked = object_tracking_setpoint(
          Pose{st.p_b, st.r_b}, st.object_pose, true, sp.p_e_star, params_.manip,
          params_.object, params_.geometry.palm_offset, params_.press_depth);
      row.tracking_clamped = tracked.clamped;
    }
    row.palm_pen = palm_penetration(st, params_.manip, params_.geometry, params_.object);
    row.max_penetration = ch.contacts.max_penetration();
    row.min_finger_normal =
        st.mission == MissionPhase::Dock ? ch.contacts.min_finger_normal() : 0.0;
    row.wall_tension = ctx.attachment.attached
                           ? (-ch.w_obj.force).dot(-Vec3::UnitX())
                           : 0.0;
    row.energy.uav = subsystem_energy(params_.uav.mass, st.v_b, st.p_b - sp.p_b_star,
                                      params_.uav_gains.stiffness, x(kIdxSup + 0), x(kIdxDiss + 0));
    row.energy.manip = subsystem_energy(m_eff, st.v_e, st.p_e - sp.p_e_star,
                                        params_.manip_gains.stiffness, x(kIdxSup + 1),
                                        x(kIdxDiss + 1));
    row.energy.gripper =
        subsystem_energy(params_.gripper.phalange_mass, Vec3(st.s_dot, 0, 0),
                         Vec3(st.s - fc.s_ref, 0, 0),
                         Vec3(params_.gripper_gains.stiffness, 0, 0), x(kIdxSup + 2),
                         x(kIdxDiss + 2));

    // Impact flag: the contact configuration changed during the previous or
    // current step.
    bool active_now = ch.contacts.any_active();
    row.impact_flag = active_now != contacts_active_prev;
    for (int c = 0; c < kContactForceDim; c += 3) {
      if ((row.f_c.segment<3>(c) - f_c_prev.segment<3>(c)).norm() > 0.5) row.impact_flag = true;
    }
    f_c_prev = row.f_c;
    contacts_active_prev = active_now;

    if (k == n_steps) {
      trace.steps.push_back(std::move(row));
      break;
    }

    x = integrate_step(x, config_.dt, config_.integrator, st, params_, fc, ctx);
    SystemState next = st;
    unpack_state(x, next);
    next.r_b = orthonormalize(next.r_b);
    x.segment<9>(kIdxR) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(next.r_b.data());
    if (clamp_mechanical(next, params_)) {
      row.impact_flag = true;
      pack_state(next, x);
    }
    next.mission = st.mission;
    next.object_pose = object_pose_for(next, params_, ctx);

    trace.steps.push_back(std::move(row));

    if (state_diverged(next, config_.divergence_limit)) {
      trace.diverged = true;
      trace.diverged_at = t + config_.dt;
      trace.abort_reason = "state magnitude exceeded divergence limit at t = " +
                           std::to_string(t + config_.dt) + " s";
      st = next;
      break;
    }

    // Lagged feed-throughs for the next step.
    const Derivatives d_end = eval_derivatives(x, next, params_, fc, ctx);
    const Vec3 accel_e_end = d_end.dx.segment<3>(kIdxVe);
    const Vec3 accel_uav_end = d_end.dx.segment<3>(kIdxVb);
    const Mat3 r_m_i = next.r_b * params_.manip.mount_pose.orientation;
    const Vec3 a_ee_abs = r_m_i * accel_e_end + accel_uav_end;
    f_phal = params_.gripper.phalange_mass * (r_m_i.transpose() * a_ee_abs);
    if (next.mission == MissionPhase::AerialGrasp) {
      object_accel = a_ee_abs;
    }

    // Event detection and mission transitions at the new state.
    const double pen = palm_penetration(next, params_.manip, params_.geometry, params_.object);
    if (pen > 0.0 && !ctx.events.contact_made) {
      ctx.events.contact_made = true;
      trace.contact_time = t + config_.dt;
    }
    if (next.mission == MissionPhase::Dock) {
      const ContactSet cs = resolve_contacts(next, params_.manip, params_.gripper,
                                             params_.geometry, params_.object, params_.contact);
      if (cs.min_finger_normal() > params_.grasp_secure_threshold) {
        ctx.secure_timer += config_.dt;
      } else {
        ctx.secure_timer = 0.0;
      }
      if (ctx.secure_timer >= params_.grasp_secure_dwell && !ctx.events.grasp_secured) {
        ctx.events.grasp_secured = true;
        trace.secured_time = t + config_.dt;
      }
      std::array<Pose, kNumContacts> frames;
      for (int c = 0; c < kNumContacts; ++c) {
        frames[static_cast<std::size_t>(c)] = cs.points[static_cast<std::size_t>(c)].frame_in_object;
      }
      const Wrench w_obj_next = object_wrench_docked(build_grasp_matrix(frames),
                                                     cs.stacked_forces());
      check_detach(-w_obj_next, ctx.attachment);
      if (!ctx.attachment.attached && !ctx.events.detach) {
        ctx.events.detach = true;
        trace.detach_time = t + config_.dt;
      }
    }

    const MissionPhase next_phase = step_mission(next.mission, ctx.events);
    if (next_phase != next.mission) {
      ctx.entry_time = t + config_.dt;
      if (next_phase == MissionPhase::AerialGrasp) {
        // Freeze the grasp: object rides with the end-effector, its load maps
        // to the aperture DOF through the grasp distribution at detach.
        const Pose ee_i = end_effector_in_inertial(next, params_.manip);
        ctx.grasp_offset = ee_i.inverse().compose(next.object_pose);
        const ContactSet cs = resolve_contacts(next, params_.manip, params_.gripper,
                                               params_.geometry, params_.object, params_.contact);
        std::array<Pose, kNumContacts> frames;
        VecX syn_contact = VecX::Zero(kContactForceDim);
        const Pose object_in_ee = ee_i.inverse().compose(next.object_pose);
        for (int c = 0; c < kNumContacts; ++c) {
          const auto& f = cs.points[static_cast<std::size_t>(c)].frame_in_object;
          frames[static_cast<std::size_t>(c)] = f;
          const Vec3 syn_o = object_in_ee.orientation.transpose() *
                             params_.geometry.synergy_dir(c);
          syn_contact.segment<3>(3 * c) = f.orientation.transpose() * syn_o;
        }
        const GraspMatrix g_hold = build_grasp_matrix(frames);
        const MatX g_pinv = pinv(MatX(g_hold.g));
        ctx.ag_row = (syn_contact.transpose() * g_pinv).eval();
        // Finalize the object-weight compensation of the gripper from the
        // frozen distribution.
        const Vec3 w_static = next.object_pose.orientation.transpose() *
                              (params_.object.mass * kGravity * gravity_dir_inertial());
        Eigen::Matrix<double, 6, 1> w_vec;
        w_vec << w_static, params_.object.cg_offset.cross(w_static);
        ctx.ff.gripper_grasp = (ctx.ag_row * w_vec)(0);
        m_eff = params_.manip.mass + params_.object.mass;
        object_accel = Vec3::Zero();
      }
      next.mission = next_phase;
      next.object_pose = object_pose_for(next, params_, ctx);
    }

    st = next;
  }
  return trace;
}

PassivityReport passivity_monitor(const SimTrace& trace, const ModelParams& params) {
  PassivityReport report;
  if (trace.steps.size() < 2) {
    report.passed = !trace.steps.empty();
    return report;
  }
  const double dt = trace.dt;

  struct Channel {
    double k_max;
    double d_max;
    double mass;
    PassivityCheck* check;
  };
  Channel channels[3] = {
      {params.uav_gains.stiffness.maxCoeff(), params.uav_gains.damping.maxCoeff(),
       params.uav.mass, &report.uav},
      {params.manip_gains.stiffness.maxCoeff(), params.manip_gains.damping.maxCoeff(),
       params.manip.mass, &report.manip},
      {params.gripper_gains.stiffness, params.gripper_gains.damping, params.gripper.phalange_mass,
       &report.gripper},
  };
  const bool first_order = trace.integrator == IntegratorKind::SemiImplicitEuler;

  for (std::size_t k = 0; k + 1 < trace.steps.size(); ++k) {
    const TraceStep& a = trace.steps[k];
    const TraceStep& b = trace.steps[k + 1];
    const bool flagged = a.impact_flag || b.impact_flag;
    if (flagged) ++report.flagged_steps;

    const SubsystemEnergy* ea[3] = {&a.energy.uav, &a.energy.manip, &a.energy.gripper};
    const SubsystemEnergy* eb[3] = {&b.energy.uav, &b.energy.manip, &b.energy.gripper};
    const double va[3] = {a.state.v_b.norm(), a.state.v_e.norm(), std::abs(a.state.s_dot)};
    const double vb[3] = {b.state.v_b.norm(), b.state.v_e.norm(), std::abs(b.state.s_dot)};
    const double err[3] = {(a.state.p_b - a.setpoints.p_b_star).norm(),
                           (a.state.p_e - a.setpoints.p_e_star).norm(),
                           std::abs(a.state.s - a.gripper_target)};
    const double din[3] = {a.d_uav.norm(), a.d_man.norm(), std::abs(a.d_grip)};

    for (int c = 0; c < 3; ++c) {
      const double dv = eb[c]->storage() - ea[c]->storage();
      const double supplied = eb[c]->supply - ea[c]->supply;
      const double dissipated = eb[c]->dissipation - ea[c]->dissipation;
      // Output-strict form: dV <= supply - dissipation + tol; the plain
      // passivity inequality follows since dissipation >= 0 up to the bound.
      const double residual = dv - supplied + dissipated;
      const double v_bar = std::max(va[c], vb[c]);
      const double a_bar = std::abs(vb[c] - va[c]) / dt;
      double tol = 10.0 * dt * dt *
                       (channels[c].k_max * v_bar * v_bar + channels[c].d_max * v_bar * a_bar) +
                   1e-12;
      if (first_order) {
        // First-order stepping books energy errors of order F^2/m dt^2 per
        // step (force times the velocity increment it causes).
        const double f_est =
            channels[c].k_max * err[c] + channels[c].d_max * v_bar + din[c];
        tol += 5.0 * dt * dt * f_est * f_est / channels[c].mass;
      }
      if (flagged) {
        // Impact relaxation scales with the stored contact compression.
        const double delta_max = std::max(a.max_penetration, b.max_penetration);
        tol += params.contact.stiffness * (delta_max * delta_max + 1e-6);
      }
      if (residual > tol) {
        if (flagged) {
          ++channels[c].check->flagged_violations;
        } else {
          ++channels[c].check->violations;
        }
      }
      if (residual > channels[c].check->worst_residual) {
        channels[c].check->worst_residual = residual;
        channels[c].check->worst_step = static_cast<int>(k);
      }
    }
  }
  report.passed = report.total_violations() == 0;
  return report;
}

}  // namespace airgrasp
