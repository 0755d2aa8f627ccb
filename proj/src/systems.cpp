#include "dynoprior/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dynoprior/rng.hpp"

namespace dyno {

namespace {

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

SystemSpec make_lorenz3(bool canonical) {
  SystemSpec s;
  s.name = "lorenz3";
  s.dim = 3;
  s.params = Params{{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0}};
  if (canonical) {
    s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
      const double sg = p.get("sigma"), rho = p.get("rho"), be = p.get("beta");
      return vec3(sg * (x[1] - x[0]), x[0] * (rho - x[2]) - x[1],
                  x[0] * x[1] - be * x[2]);
    };
  } else {
    // Sign-for-sign alternative with dz/dt = -xy - beta*z. Diverges from
    // generic initial conditions; kept selectable for comparison runs.
    s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
      const double sg = p.get("sigma"), rho = p.get("rho"), be = p.get("beta");
      return vec3(sg * (-x[0] + x[1]), -x[0] * x[2] + rho * x[0] - x[1],
                  -x[0] * x[1] - be * x[2]);
    };
  }
  return s;
}

SystemSpec make_vanderpol() {
  SystemSpec s;
  s.name = "vanderpol";
  s.dim = 2;
  s.params = Params{{"mu", 1.0}};
  s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
    const double mu = p.get("mu");
    Eigen::VectorXd d(2);
    d << mu * (x[0] - x[0] * x[0] * x[0] / 3.0 - x[1]), x[0] / mu;
    return d;
  };
  return s;
}

SystemSpec make_chen() {
  SystemSpec s;
  s.name = "chen";
  s.dim = 3;
  s.params = Params{{"alpha", 5.0}, {"beta", -10.0}, {"delta", -0.38}};
  s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
    const double al = p.get("alpha"), be = p.get("beta"), de = p.get("delta");
    return vec3(al * x[0] - x[1] * x[2], be * x[1] + x[0] * x[2],
                de * x[2] + x[0] * x[1] / 3.0);
  };
  return s;
}

SystemSpec make_rossler() {
  SystemSpec s;
  s.name = "rossler";
  s.dim = 3;
  s.params = Params{{"a", 0.2}, {"b", 0.2}, {"c", 5.7}};
  s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
    const double a = p.get("a"), b = p.get("b"), c = p.get("c");
    return vec3(-(x[1] + x[2]), x[0] + a * x[1], b + x[2] * (x[0] - c));
  };
  return s;
}

// 14-mode Rayleigh-Benard truncation (Curry-type generalized Lorenz).
// State order: psi11 psi13 psi22 psi31 psi33 psi24 theta11 theta13 theta22
// theta31 theta33 theta24 theta02 theta04.
//
// The advection coefficients below are the exact Galerkin projections of the
// 2D Boussinesq equations onto this mode set (a^2 = 1/2, damping m^2 a^2 +
// n^2, couplings sigma*a*m/lambda and R*a*m). Several published transcripts
// of the theta-block carry corrupted coefficients that break the quadratic
// invariants and blow up; the values here were re-derived from the PDE and
// conserve energy, giving bounded chaotic motion at R = 6.75 * 45.92.
SystemSpec make_lorenz14(double sigma) {
  SystemSpec s;
  s.name = "lorenz14";
  s.dim = 14;
  const double r = 45.92;
  s.params = Params{{"a", 1.0 / std::sqrt(2.0)},
                    {"r", r},
                    {"R", 6.75 * r},
                    {"sigma", sigma}};
  s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
    const double a = p.get("a"), R = p.get("R"), sg = p.get("sigma");
    const double p11 = x[0], p13 = x[1], p22 = x[2], p31 = x[3], p33 = x[4],
                 p24 = x[5], t11 = x[6], t13 = x[7], t22 = x[8], t31 = x[9],
                 t33 = x[10], t24 = x[11], t02 = x[12], t04 = x[13];
    Eigen::VectorXd d(14);
    d[0] = -a * (7.0 / 3 * p13 * p22 + 17.0 / 6 * p13 * p24 +
                 1.0 / 3 * p31 * p22 + 9.0 / 2 * p33 * p24) -
           sg * 1.5 * p11 + sg * a * (2.0 / 3) * t11;
    d[1] = a * (-9.0 / 19 * p11 * p22 + 33.0 / 38 * p11 * p24 +
                2.0 / 19 * p31 * p22 - 125.0 / 38 * p31 * p24) -
           sg * 9.5 * p13 + sg * a * (2.0 / 19) * t13;
    d[2] = a * (4.0 / 3 * p11 * p13 - 2.0 / 3 * p11 * p31 -
                4.0 / 3 * p13 * p31) -
           6.0 * sg * p22 + sg * a * (1.0 / 3) * t22;
    d[3] = a * (9.0 / 11 * p11 * p22 + 14.0 / 11 * p13 * p22 +
                85.0 / 22 * p13 * p24) -
           5.5 * sg * p31 + sg * a * (6.0 / 11) * t31;
    d[4] = a * (11.0 / 6 * p11 * p24) - 13.5 * sg * p33 +
           sg * a * (2.0 / 9) * t33;
    d[5] = a * (-2.0 / 9 * p11 * p13 - p11 * p33 + 5.0 / 9 * p13 * p31) -
           18.0 * sg * p24 + sg * a * (1.0 / 9) * t24;
    d[6] = a * (p11 * t02 - p13 * t02 + 2 * p13 * t04 + p13 * t22 -
                0.5 * p13 * t24 + p22 * t13 + p22 * t31 - 0.5 * p24 * t13 +
                1.5 * p24 * t33 + p31 * t22 + 1.5 * p33 * t24) +
           R * a * p11 - 1.5 * t11;
    d[7] = a * (-p11 * t02 + 2 * p11 * t04 - p11 * t22 + 0.5 * p11 * t24 -
                p22 * t11 - 2 * p22 * t31 + 0.5 * p24 * t11 +
                2.5 * p24 * t31 - 2 * p31 * t22 + 2.5 * p31 * t24) +
           R * a * p13 - 9.5 * t13;
    d[8] = a * (p11 * t13 - p11 * t31 - p13 * t11 + 2 * p13 * t31 +
                4 * p22 * t04 - 2 * p24 * t02 - p31 * t11 + 2 * p31 * t13) +
           2 * R * a * p22 - 6.0 * t22;
    d[9] = a * (p11 * t22 - 2 * p13 * t22 + 2.5 * p13 * t24 - p22 * t11 +
                2 * p22 * t13 - 2.5 * p24 * t13 + 3 * p31 * t02 -
                3 * p33 * t02 + 6 * p33 * t04) +
           3 * R * a * p31 - 5.5 * t31;
    d[10] = a * (1.5 * p11 * t24 - 1.5 * p24 * t11 - 3 * p31 * t02 +
                 6 * p31 * t04) +
            3 * R * a * p33 - 13.5 * t33;
    d[11] = a * (-0.5 * p11 * t13 - 1.5 * p11 * t33 + 0.5 * p13 * t11 -
                 2.5 * p13 * t31 - 2 * p22 * t02 - 2.5 * p31 * t13 -
                 1.5 * p33 * t11) +
            2 * R * a * p24 - 18.0 * t24;
    d[12] = a * (-0.5 * p11 * t11 + 0.5 * p11 * t13 + 0.5 * p13 * t11 +
                 p22 * t24 + p24 * t22 - 1.5 * p31 * t31 + 1.5 * p31 * t33 +
                 1.5 * p33 * t31) -
            4.0 * t02;
    d[13] = a * (-p11 * t13 - p13 * t11 - 2 * p22 * t22 - 3 * p31 * t33 -
                 3 * p33 * t31) -
            16.0 * t04;
    return d;
  };
  return s;
}

// Standard unforced Duffing oscillator (double well). Substitute: the source
// experiments name the system without defining it.
SystemSpec make_duffing() {
  SystemSpec s;
  s.name = "duffing";
  s.dim = 2;
  s.params = Params{{"delta", 0.1}, {"alpha", -1.0}, {"beta", 1.0}};
  s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
    const double de = p.get("delta"), al = p.get("alpha"), be = p.get("beta");
    Eigen::VectorXd d(2);
    d << x[1], -de * x[1] - al * x[0] - be * x[0] * x[0] * x[0];
    return d;
  };
  return s;
}

// Planar system with the unit circle as attracting limit cycle. Substitute,
// as for duffing.
SystemSpec make_limit_cycle() {
  SystemSpec s;
  s.name = "limit_cycle";
  s.dim = 2;
  s.params = Params{{"rate", 1.0}};
  s.rhs = [](const Eigen::VectorXd& x, const Params& p) {
    const double k = p.get("rate");
    const double g = k * (1.0 - x[0] * x[0] - x[1] * x[1]);
    Eigen::VectorXd d(2);
    d << -x[1] + x[0] * g, x[0] + x[1] * g;
    return d;
  };
  return s;
}

}  // namespace

std::string Spacing::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Uniform: os << "uniform(" << dt << ")"; break;
    case Kind::Random: os << "random(" << count << ")"; break;
    case Kind::Decimated: os << "decimated(" << factor << ")"; break;
  }
  return os.str();
}

std::vector<std::string> catalog_names() {
  return {"lorenz3", "vanderpol", "chen",    "rossler",
          "lorenz14", "duffing",  "limit_cycle"};
}

SystemSpec catalog(const std::string& name, const CatalogOptions& opts) {
  if (name == "lorenz3") return make_lorenz3(opts.canonical_lorenz);
  if (name == "vanderpol") return make_vanderpol();
  if (name == "chen") return make_chen();
  if (name == "rossler") return make_rossler();
  if (name == "lorenz14") return make_lorenz14(opts.lorenz14_sigma);
  if (name == "duffing") return make_duffing();
  if (name == "limit_cycle") return make_limit_cycle();
  std::string valid;
  for (const auto& n : catalog_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw CatalogError("unknown system '" + name + "' (valid: " + valid + ")");
}

Trajectory integrate_rhs(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& rhs,
    const Eigen::VectorXd& x0, double t0, double t1, double dt) {
  if (dt <= 0) throw Error("integrate: dt must be positive");
  if (t1 < t0) throw Error("integrate: t1 must not precede t0");
  const auto steps =
      static_cast<Eigen::Index>(std::floor((t1 - t0) / dt + 1e-9));
  Trajectory traj;
  traj.times.resize(steps + 1);
  traj.states.resize(x0.size(), steps + 1);
  Eigen::VectorXd x = x0;
  traj.times[0] = t0;
  traj.states.col(0) = x;
  for (Eigen::Index i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = rhs(x);
    const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = rhs(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw DivergenceError(
          "integration diverged at step " + std::to_string(i + 1) + " (t=" +
              std::to_string(t0 + double(i + 1) * dt) + ")",
          static_cast<long>(i + 1));
    }
    traj.times[i + 1] = t0 + double(i + 1) * dt;
    traj.states.col(i + 1) = x;
  }
  return traj;
}

Trajectory integrate(const SystemSpec& spec, const Eigen::VectorXd& x0,
                     double t0, double t1, double dt) {
  if (x0.size() != spec.dim) {
    throw Error("integrate: x0 has dimension " + std::to_string(x0.size()) +
                ", system '" + spec.name + "' expects " +
                std::to_string(spec.dim));
  }
  return integrate_rhs(
      [&spec](const Eigen::VectorXd& x) { return spec.eval_rhs(x); }, x0, t0,
      t1, dt);
}

namespace {

std::vector<Eigen::Index> select_columns(const Trajectory& traj,
                                         const Spacing& spacing,
                                         std::uint64_t seed) {
  const Eigen::Index q = traj.points();
  std::vector<Eigen::Index> cols;
  switch (spacing.kind) {
    case Spacing::Kind::Uniform: {
      if (spacing.dt <= 0) throw SamplingError("uniform spacing needs dt > 0");
      if (q < 2) throw SamplingError("uniform sampling needs >= 2 points");
      const double grid_dt = traj.times[1] - traj.times[0];
      const double ratio = spacing.dt / grid_dt;
      const auto stride = static_cast<Eigen::Index>(std::llround(ratio));
      if (stride < 1 || std::abs(ratio - double(stride)) > 1e-6) {
        throw SamplingError("uniform spacing dt=" + std::to_string(spacing.dt) +
                            " is not a multiple of the trajectory step");
      }
      // Half-open window: the trajectory's final column is excluded, so a
      // [0,100] trajectory sampled at 0.1 yields exactly 1000 columns.
      for (Eigen::Index i = 0; i < q - 1; i += stride) cols.push_back(i);
      break;
    }
    case Spacing::Kind::Random: {
      if (spacing.count < 1) throw SamplingError("random spacing needs count >= 1");
      if (spacing.count > q) {
        throw SamplingError("random spacing count exceeds trajectory length");
      }
      // Partial Fisher-Yates over column indices, then sort.
      std::vector<Eigen::Index> idx(q);
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
      SplitMix64 rng(seed);
      for (int i = 0; i < spacing.count; ++i) {
        const auto j = i + static_cast<Eigen::Index>(
                               rng.next_below(std::uint64_t(q - i)));
        std::swap(idx[size_t(i)], idx[size_t(j)]);
      }
      cols.assign(idx.begin(), idx.begin() + spacing.count);
      std::sort(cols.begin(), cols.end());
      break;
    }
    case Spacing::Kind::Decimated: {
      if (spacing.factor < 1) throw SamplingError("decimation factor must be >= 1");
      if (spacing.factor > q) {
        throw SamplingError("decimation factor " +
                            std::to_string(spacing.factor) +
                            " exceeds trajectory length " + std::to_string(q));
      }
      for (Eigen::Index i = 0; i < q; i += spacing.factor) cols.push_back(i);
      break;
    }
  }
  if (cols.empty()) throw SamplingError("sampling selected no columns");
  return cols;
}

}  // namespace

SampleSet sample(const Trajectory& traj, const std::vector<int>& observed,
                 const Spacing& spacing, double noise_amplitude,
                 std::uint64_t seed) {
  if (noise_amplitude < 0) throw SamplingError("noise amplitude must be >= 0");
  for (int idx : observed) {
    if (idx < 0 || idx >= traj.states.rows()) {
      throw SamplingError("observed index " + std::to_string(idx) +
                          " out of range");
    }
  }
  if (observed.empty()) throw SamplingError("no observed components");

  const auto cols = select_columns(traj, spacing, seed ^ 0xC0FFEEull);

  SampleSet set;
  set.observed_indices = observed;
  set.noise_amplitude = noise_amplitude;
  set.spacing = spacing;
  set.times.resize(Eigen::Index(cols.size()));
  set.values.resize(Eigen::Index(observed.size()), Eigen::Index(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    set.times[Eigen::Index(j)] = traj.times[cols[j]];
    for (size_t i = 0; i < observed.size(); ++i) {
      set.values(Eigen::Index(i), Eigen::Index(j)) =
          traj.states(observed[i], cols[j]);
    }
  }
  if (noise_amplitude > 0) {
    SplitMix64 rng(seed);
    // Column-major draw order; part of the reproducibility contract.
    for (Eigen::Index j = 0; j < set.values.cols(); ++j) {
      for (Eigen::Index i = 0; i < set.values.rows(); ++i) {
        set.values(i, j) += rng.uniform(-noise_amplitude, noise_amplitude);
      }
    }
  }
  return set;
}

Trajectory discard_transient(const Trajectory& traj, double burn) {
  if (burn <= 0) return traj;
  const double cutoff = traj.times[0] + burn;
  Eigen::Index first = 0;
  while (first < traj.points() && traj.times[first] < cutoff - 1e-12) ++first;
  if (first >= traj.points()) {
    throw Error("discard_transient: burn-in consumes the whole trajectory");
  }
  Trajectory out;
  const Eigen::Index n = traj.points() - first;
  out.times = traj.times.segment(first, n).array() - traj.times[first];
  out.states = traj.states.middleCols(first, n);
  return out;
}

}  // namespace dyno
