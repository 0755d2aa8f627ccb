#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dynoprior/errors.hpp"

namespace dyno {

/// Named real parameters of a dynamical system. Lookup of a missing key is an
/// error, never a silent default.
class Params {
 public:
  Params() = default;
  Params(std::initializer_list<std::pair<const std::string, double>> init)
      : values_(init) {}

  double get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) {
      throw CatalogError("missing system parameter '" + name + "'");
    }
    return it->second;
  }

  void set(const std::string& name, double value) { values_[name] = value; }
  bool has(const std::string& name) const { return values_.count(name) != 0; }
  void erase(const std::string& name) { values_.erase(name); }
  const std::map<std::string, double>& map() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// A named ODE: dimension, parameters, and the right-hand side x' = f(x, p).
struct SystemSpec {
  std::string name;
  int dim = 0;
  Params params;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Params&)> rhs;

  Eigen::VectorXd eval_rhs(const Eigen::VectorXd& x) const {
    return rhs(x, params);
  }
};

/// Integrated states on a strictly increasing time grid (states is D x Q).
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;

  Eigen::Index points() const { return times.size(); }
};

/// How sample times are selected from a trajectory.
struct Spacing {
  enum class Kind { Uniform, Random, Decimated };
  Kind kind = Kind::Uniform;
  double dt = 0.0;   // Uniform: target interval
  int count = 0;     // Random: number of samples
  int factor = 0;    // Decimated: keep every factor-th column

  static Spacing uniform(double dt_) {
    Spacing s; s.kind = Kind::Uniform; s.dt = dt_; return s;
  }
  static Spacing random(int count_) {
    Spacing s; s.kind = Kind::Random; s.count = count_; return s;
  }
  static Spacing decimated(int factor_) {
    Spacing s; s.kind = Kind::Decimated; s.factor = factor_; return s;
  }
  std::string describe() const;
};

/// Measurements y(t_n): selected components of selected trajectory columns
/// plus i.i.d. uniform noise. values is d x Q aligned with times.
struct SampleSet {
  Eigen::VectorXd times;
  Eigen::MatrixXd values;
  std::vector<int> observed_indices;
  double noise_amplitude = 0.0;
  Spacing spacing;
};

struct CatalogOptions {
  /// Use the textbook Lorenz dz/dt = xy - beta*z. The alternative form
  /// (dz/dt = -xy - beta*z) is kept selectable but diverges from generic
  /// initial conditions, so the textbook form is the default.
  bool canonical_lorenz = true;
  /// Prandtl-like sigma of the 14-mode system (lorenz14).
  double lorenz14_sigma = 10.0;
};

/// Look up a system by name. Valid names: lorenz3, vanderpol, chen, rossler,
/// lorenz14, duffing, limit_cycle.
SystemSpec catalog(const std::string& name, const CatalogOptions& opts = {});

std::vector<std::string> catalog_names();

/// Fixed-step RK4 from t0 to t1 (columns at t0, t0+dt, ...). t1 == t0 yields
/// the single column x0. Throws DivergenceError on non-finite states.
Trajectory integrate(const SystemSpec& spec, const Eigen::VectorXd& x0,
                     double t0, double t1, double dt);

/// Same RK4 core for an arbitrary rhs (used by recovered SINDy models).
Trajectory integrate_rhs(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& rhs,
    const Eigen::VectorXd& x0, double t0, double t1, double dt);

/// Select rows (observed components) and columns (per spacing mode), then add
/// i.i.d. noise ~ U(-n, n). Deterministic under seed.
SampleSet sample(const Trajectory& traj, const std::vector<int>& observed,
                 const Spacing& spacing, double noise_amplitude,
                 std::uint64_t seed);

/// Drop the first `burn` time units and shift times to start at zero, so the
/// remaining window lies on the attractor.
Trajectory discard_transient(const Trajectory& traj, double burn);

}  // namespace dyno
