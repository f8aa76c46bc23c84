// Independent reference computations used only by the tests. None of these
// call into the library's numerical routines.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "pstab/linalg.hpp"
#include "pstab/system_model.hpp"

namespace oracle {

using pstab::Mat;
using pstab::Vec;

/// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Vec vec(int n, double lo, double hi) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Vec unit(int n) {
    Vec v(n);
    std::normal_distribution<double> g;
    do {
      for (int i = 0; i < n; ++i) v[i] = g(rng_);
    } while (v.norm() < 1e-12);
    return v / v.norm();
  }
  /// AUV state with y around `center` and |x5| <= max_pitch.
  Vec auv_state(double max_pitch = 1.4) {
    Vec x(6);
    x << uniform(-2, 2), uniform(-2, 2), uniform(-2, 2), uniform(-M_PI, M_PI),
        uniform(-max_pitch, max_pitch), uniform(-M_PI, M_PI);
    return x;
  }

 private:
  std::mt19937_64 rng_;
};

/// Central-difference Jacobian of a plain function, step h.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    J.col(i) = (f(xp) - f(xm)) / (2 * h);
  }
  return J;
}

/// [f, g](x) = Dg f - Df g by finite differences.
inline Vec fd_bracket(const std::function<Vec(const Vec&)>& f,
                      const std::function<Vec(const Vec&)>& g, const Vec& x) {
  return fd_jacobian(g, x) * f(x) - fd_jacobian(f, x) * g(x);
}

/// Root of a continuous function with a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& fn, double lo, double hi) {
  double flo = fn(lo);
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = fn(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Gaussian elimination with partial pivoting.
inline Vec gauss_solve(Mat A, Vec b) {
  const Eigen::Index n = A.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    }
    A.row(c).swap(A.row(piv));
    std::swap(b[c], b[piv]);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = A(r, c) / A(c, c);
      for (Eigen::Index k = c; k < n; ++k) A(r, k) -= f * A(c, k);
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (Eigen::Index k = r + 1; k < n; ++k) s -= A(r, k) * x[k];
    x[r] = s / A(r, r);
  }
  return x;
}

/// Determinant by cofactor expansion (small matrices).
inline double det(const Mat& A) {
  const Eigen::Index n = A.rows();
  if (n == 1) return A(0, 0);
  double s = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Mat minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k != c) minor(r - 1, cc++) = A(r, k);
      }
    }
    s += ((c % 2 == 0) ? 1.0 : -1.0) * A(0, c) * det(minor);
  }
  return s;
}

/// Singular values via cyclic Jacobi on A^T A (ascending).
inline std::vector<double> singular_values(const Mat& A) {
  Mat S = A.transpose() * A;
  const Eigen::Index n = S.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += S(p, q) * S(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (S(p, q) == 0.0) continue;
        const double theta = (S(q, q) - S(p, p)) / (2 * S(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
    }
  }
  std::vector<double> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(std::sqrt(std::max(0.0, S(i, i))));
  std::sort(out.begin(), out.end());
  return out;
}

/// Adaptive Simpson quadrature of a scalar function.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 40) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fm, double fb, double whole, double tol, int d) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        const double left = (m - a) / 6 * (fa + 4 * flm + fm);
        const double right = (b - m) / 6 * (fm + 4 * frm + fb);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) {
          return left + right + (left + right - whole) / 15;
        }
        return rec(a, m, fa, flm, fm, left, tol / 2, d - 1) +
               rec(m, b, fm, frm, fb, right, tol / 2, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth);
}

/// Minimal JSON-schema validator covering type, required, properties,
/// additionalProperties, items, enum, minimum, and anyOf.
inline void validate_schema(const nlohmann::json& schema, const nlohmann::json& value,
                            const std::string& path, std::vector<std::string>& errors) {
  auto type_ok = [&](const std::string& t) {
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "string") return value.is_string();
    if (t == "boolean") return value.is_boolean();
    if (t == "integer") return value.is_number_integer();
    if (t == "number") return value.is_number();
    if (t == "null") return value.is_null();
    return false;
  };
  if (auto it = schema.find("anyOf"); it != schema.end()) {
    for (const auto& alt : *it) {
      std::vector<std::string> e;
      validate_schema(alt, value, path, e);
      if (e.empty()) return;
    }
    errors.push_back(path + ": matches no alternative");
    return;
  }
  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_array()) {
      for (const auto& t : *it) ok = ok || type_ok(t.get<std::string>());
    } else {
      ok = type_ok(it->get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": wrong type");
      return;
    }
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    if (std::find(it->begin(), it->end(), value) == it->end()) errors.push_back(path + ": not in enum");
  }
  if (auto it = schema.find("minimum"); it != schema.end() && value.is_number()) {
    if (value.get<double>() < it->get<double>()) errors.push_back(path + ": below minimum");
  }
  if (value.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& k : *it) {
        if (!value.contains(k.get<std::string>())) errors.push_back(path + ": missing " + k.get<std::string>());
      }
    }
    const auto props = schema.value("properties", nlohmann::json::object());
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (props.contains(it.key())) {
        validate_schema(props[it.key()], it.value(), path + "." + it.key(), errors);
      } else if (auto ap = schema.find("additionalProperties"); ap != schema.end()) {
        if (ap->is_boolean()) {
          if (!ap->get<bool>()) errors.push_back(path + ": unexpected key " + it.key());
        } else {
          validate_schema(*ap, it.value(), path + "." + it.key(), errors);
        }
      }
    }
  }
  if (value.is_array()) {
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        validate_schema(*it, value[i], path + "[" + std::to_string(i) + "]", errors);
      }
    }
  }
}

}  // namespace oracle
