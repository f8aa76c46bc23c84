#pragma once

#include "pstab/system_model.hpp"

namespace testsys {

using pstab::ControlAffineSystem;
using pstab::Mat;
using pstab::Vec;

/// Nonholonomic integrator: f1 = (1, 0, -x2), f2 = (0, 1, x1), n1 = 3, n2 = 0.
/// [f1, f2] = (0, 0, 2).
inline ControlAffineSystem brockett() {
  ControlAffineSystem::Definition d;
  d.name = "brockett";
  d.split = pstab::StateSplit::make(3, 0);
  d.m = 2;
  d.drift = [](double, const Vec& x) { return Vec(Vec::Zero(x.size())); };
  d.fields.push_back([](const Vec& x) {
    Vec f(3);
    f << 1.0, 0.0, -x[1];
    return f;
  });
  d.fields.push_back([](const Vec& x) {
    Vec f(3);
    f << 0.0, 1.0, x[0];
    return f;
  });
  return ControlAffineSystem(std::move(d));
}

/// y = (x1, x2) driven directly by u1, u2; z = x3 carries a constant drift c.
inline ControlAffineSystem planar(double drift_z = 0.0, Vec drift_y = Vec::Zero(2)) {
  ControlAffineSystem::Definition d;
  d.name = "planar";
  d.split = pstab::StateSplit::make(2, 1);
  d.m = 2;
  d.drift = [drift_z, drift_y](double, const Vec&) {
    Vec f(3);
    f << drift_y[0], drift_y[1], drift_z;
    return f;
  };
  d.fields.push_back([](const Vec&) { return Vec(Vec::Unit(3, 0)); });
  d.fields.push_back([](const Vec&) { return Vec(Vec::Unit(3, 1)); });
  return ControlAffineSystem(std::move(d));
}

/// Like planar, but the second field is (0, x3, 0): F is singular at x3 = 0.
inline ControlAffineSystem degenerate() {
  ControlAffineSystem::Definition d;
  d.name = "degenerate";
  d.split = pstab::StateSplit::make(2, 1);
  d.m = 2;
  d.drift = [](double, const Vec&) { return Vec(Vec::Zero(3)); };
  d.fields.push_back([](const Vec&) { return Vec(Vec::Unit(3, 0)); });
  d.fields.push_back([](const Vec& x) {
    Vec f = Vec::Zero(3);
    f[1] = x[2];
    return f;
  });
  return ControlAffineSystem(std::move(d));
}

}  // namespace testsys
