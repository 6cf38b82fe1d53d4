#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "moran/distribution.hpp"
#include "moran/graph.hpp"
#include "moran/rational.hpp"
#include "moran/types.hpp"

namespace moran {

inline constexpr std::uint64_t default_state_cap = 2'000'000;

/// Mixed-radix encoding of assignments: vertex v is digit v (base k), vertex 0
/// least significant.
class StateSpace {
 public:
  StateSpace(std::size_t n, std::size_t k, std::uint64_t cap = default_state_cap) : n_(n), k_(k) {
    if (k == 0) fail(ErrorCode::InvalidSize, "no types");
    std::uint64_t size = 1;
    for (std::size_t v = 0; v < n; ++v) {
      place_.push_back(size);
      if (size > cap / k)
        fail(ErrorCode::StateSpaceTooLarge, std::to_string(k) + "^" + std::to_string(n) + " states exceed the cap of " +
                                                std::to_string(cap));
      size *= k;
    }
    size_ = size;
  }

  std::size_t vertices() const noexcept { return n_; }
  std::size_t types() const noexcept { return k_; }
  std::uint64_t size() const noexcept { return size_; }
  std::uint64_t place(Vertex v) const { return place_[v]; }

  std::uint64_t encode(std::span<const TypeIndex> assignment) const {
    std::uint64_t index = 0;
    for (std::size_t v = 0; v < n_; ++v) index += assignment[v] * place_[v];
    return index;
  }

  std::vector<TypeIndex> decode(std::uint64_t index) const {
    std::vector<TypeIndex> out(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      out[v] = static_cast<TypeIndex>(index % k_);
      index /= k_;
    }
    return out;
  }

  /// The monochromatic state of type j.
  std::uint64_t uniform(TypeIndex j) const {
    std::uint64_t index = 0;
    for (std::size_t v = 0; v < n_; ++v) index += j * place_[v];
    return index;
  }

 private:
  std::size_t n_, k_;
  std::uint64_t size_ = 1;
  std::vector<std::uint64_t> place_;
};

struct KernelEntry {
  std::uint64_t target;
  Rational probability;
};

/// One row of the discrete transition kernel, self-loop included, with
/// targets sorted and merged. Each row sums to exactly 1.
inline std::vector<KernelEntry> kernel_row(const Graph& graph, const TypeSystem& types, const StateSpace& space,
                                           std::uint64_t index) {
  const auto s = space.decode(index);
  Integer total = 0;
  for (TypeIndex t : s) total += from_u64(types.weight(t));
  std::vector<KernelEntry> row;
  Rational stay = 1;
  for (Vertex v = 0; v < s.size(); ++v) {
    const auto nbrs = graph.neighbours(v);
    if (nbrs.empty()) continue;
    Rational p(from_u64(types.weight(s[v])), total * static_cast<unsigned long>(nbrs.size()));
    p.canonicalize();
    for (Vertex w : nbrs) {
      if (s[v] == s[w]) continue;
      const std::uint64_t target = index + s[v] * space.place(w) - s[w] * space.place(w);
      row.push_back({target, p});
      stay -= p;
    }
  }
  row.push_back({index, stay});
  std::sort(row.begin(), row.end(), [](const KernelEntry& a, const KernelEntry& b) { return a.target < b.target; });
  std::vector<KernelEntry> merged;
  for (auto& e : row) {
    if (!merged.empty() && merged.back().target == e.target) merged.back().probability += e.probability;
    else merged.push_back(std::move(e));
  }
  std::erase_if(merged, [](const KernelEntry& e) { return e.probability == 0; });
  return merged;
}

enum class Backend { Rational, Float };

struct ExactOptions {
  std::uint64_t cap = default_state_cap;
  Backend backend = Backend::Rational;
  // Also solve for pi with self-loops eliminated and require agreement.
  bool cross_check = false;
};

struct InstanceFingerprint {
  std::uint64_t graph = 0;
  std::vector<std::string> fitness;
};

/// Per-state fixation probabilities pi_j(S) and expected full-fixation times E[A | S].
class ExactSolution {
 public:
  Backend backend() const noexcept { return backend_; }
  bool exact() const noexcept { return backend_ == Backend::Rational; }
  const StateSpace& space() const noexcept { return space_; }
  const InstanceFingerprint& fingerprint() const noexcept { return fingerprint_; }
  double max_residual() const noexcept { return residual_; }

  double fixation(std::uint64_t state, TypeIndex j) const { return pi_[state * k() + j]; }
  double absorption_time(std::uint64_t state) const { return time_[state]; }

  const Rational& fixation_exact(std::uint64_t state, TypeIndex j) const {
    require_exact();
    return pi_exact_[state * k() + j];
  }
  const Rational& absorption_time_exact(std::uint64_t state) const {
    require_exact();
    return time_exact_[state];
  }

  std::uint64_t encode(std::span<const TypeIndex> s) const { return space_.encode(s); }

 private:
  friend ExactSolution solve_exact(const Graph&, const TypeSystem&, ExactOptions);

  explicit ExactSolution(StateSpace space) : space_(std::move(space)) {}
  std::size_t k() const noexcept { return space_.types(); }
  void require_exact() const {
    if (!exact()) fail(ErrorCode::InvalidArgument, "solution was computed with the float backend");
  }

  StateSpace space_;
  Backend backend_ = Backend::Rational;
  InstanceFingerprint fingerprint_;
  std::vector<double> pi_, time_;
  std::vector<Rational> pi_exact_, time_exact_;
  double residual_ = 0.0;
};

namespace detail {

struct AbsorbingSystem {
  std::vector<std::uint64_t> transient;       // transient position -> state index
  std::vector<std::int64_t> position;         // state index -> transient position or -1
  std::vector<std::vector<KernelEntry>> rows; // kernel rows of transient states
};

inline AbsorbingSystem build_system(const Graph& graph, const TypeSystem& types, const StateSpace& space) {
  AbsorbingSystem sys;
  sys.position.assign(space.size(), -1);
  for (std::uint64_t s = 0; s < space.size(); ++s) {
    bool mixed = false;
    const std::uint64_t first = s % space.types();
    std::uint64_t rest = s;
    for (std::size_t v = 0; v < space.vertices(); ++v, rest /= space.types())
      if (rest % space.types() != first) {
        mixed = true;
        break;
      }
    if (!mixed) continue;
    sys.position[s] = static_cast<std::int64_t>(sys.transient.size());
    sys.transient.push_back(s);
    sys.rows.push_back(kernel_row(graph, types, space, s));
  }
  return sys;
}

// Solves (I - Q) X = B exactly. Columns 0..k-1 of B give pi_j, column k gives
// E[A]. With drop_self_loops each row is first divided by 1 - P(s -> s), which
// leaves pi unchanged and turns the time right-hand side into the expected
// holding time 1 / (1 - P(s -> s)).
inline std::vector<std::vector<Rational>> solve_rational(const AbsorbingSystem& sys, const StateSpace& space,
                                                         bool drop_self_loops) {
  const std::size_t m = sys.transient.size(), k = space.types(), width = m + k + 1;
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(width));
  for (std::size_t r = 0; r < m; ++r) {
    const std::uint64_t s = sys.transient[r];
    Rational leave = 0;
    for (const auto& e : sys.rows[r]) {
      if (e.target == s) continue;
      leave += e.probability;
      if (const auto pos = sys.position[e.target]; pos >= 0) a[r][static_cast<std::size_t>(pos)] -= e.probability;
      else a[r][m + e.target % k] += e.probability;
    }
    a[r][r] = leave;
    a[r][m + k] = 1;
    if (drop_self_loops)
      for (auto& x : a[r])
        if (x != 0) x /= leave;
  }
  // I - Q is a non-singular M-matrix, so elimination needs no pivoting.
  for (std::size_t c = 0; c < m; ++c) {
    const Rational pivot = a[c][c];
    if (pivot == 0) fail(ErrorCode::InvalidArgument, "singular absorbing system");
    for (std::size_t j = c; j < width; ++j)
      if (a[c][j] != 0) a[c][j] /= pivot;
    std::vector<std::size_t> nz;
    for (std::size_t j = c + 1; j < width; ++j)
      if (a[c][j] != 0) nz.push_back(j);
    for (std::size_t r = c + 1; r < m; ++r) {
      if (a[r][c] == 0) continue;
      const Rational factor = a[r][c];
      for (std::size_t j : nz) a[r][j] -= factor * a[c][j];
      a[r][c] = 0;
    }
  }
  std::vector<std::vector<Rational>> x(m, std::vector<Rational>(k + 1));
  for (std::size_t r = m; r-- > 0;) {
    for (std::size_t col = 0; col <= k; ++col) {
      Rational v = a[r][m + col];
      for (std::size_t j = r + 1; j < m; ++j)
        if (a[r][j] != 0) v -= a[r][j] * x[j][col];
      x[r][col] = v;
    }
  }
  return x;
}

inline Eigen::MatrixXd solve_float(const AbsorbingSystem& sys, const StateSpace& space, bool drop_self_loops,
                                   double& residual) {
  const std::size_t m = sys.transient.size(), k = space.types();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k + 1));
  for (std::size_t r = 0; r < m; ++r) {
    const std::uint64_t s = sys.transient[r];
    double leave = 0.0;
    for (const auto& e : sys.rows[r])
      if (e.target != s) leave += to_double(e.probability);
    const double scale = drop_self_loops ? 1.0 / leave : 1.0;
    const auto row = static_cast<Eigen::Index>(r);
    for (const auto& e : sys.rows[r]) {
      if (e.target == s) continue;
      const double p = to_double(e.probability) * scale;
      if (const auto pos = sys.position[e.target]; pos >= 0) triplets.emplace_back(row, pos, -p);
      else rhs(row, static_cast<Eigen::Index>(e.target % k)) += p;
    }
    triplets.emplace_back(row, row, leave * scale);
    rhs(row, static_cast<Eigen::Index>(k)) = scale;
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "sparse LU factorization failed");
  Eigen::MatrixXd x = lu.solve(rhs);
  // relative residual of each column
  const Eigen::MatrixXd r = a * x - rhs;
  residual = 0.0;
  for (Eigen::Index c = 0; c < r.cols(); ++c)
    residual = std::max(residual, r.col(c).cwiseAbs().maxCoeff() / std::max(1.0, x.col(c).cwiseAbs().maxCoeff()));
  return x;
}

}  // namespace detail

/// Solves the k^n-state absorbing chain for every pi_j and for E[A].
/// Throws StateSpaceTooLarge when k^n exceeds options.cap.
inline ExactSolution solve_exact(const Graph& graph, const TypeSystem& types, ExactOptions options = {}) {
  StateSpace space(graph.size(), types.size(), options.cap);
  ExactSolution sol(space);
  sol.backend_ = options.backend;
  sol.fingerprint_.graph = fingerprint(graph);
  for (const auto& f : types.fitnesses()) sol.fingerprint_.fitness.push_back(to_string(f));

  const std::size_t k = types.size();
  const auto sys = detail::build_system(graph, types, space);
  sol.pi_.assign(space.size() * k, 0.0);
  sol.time_.assign(space.size(), 0.0);
  for (TypeIndex j = 0; j < k; ++j) sol.pi_[space.uniform(j) * k + j] = 1.0;

  if (options.backend == Backend::Rational) {
    sol.pi_exact_.assign(space.size() * k, Rational(0));
    sol.time_exact_.assign(space.size(), Rational(0));
    for (TypeIndex j = 0; j < k; ++j) sol.pi_exact_[space.uniform(j) * k + j] = 1;
    const auto x = detail::solve_rational(sys, space, false);
    if (options.cross_check) {
      const auto y = detail::solve_rational(sys, space, true);
      for (std::size_t r = 0; r < x.size(); ++r)
        for (std::size_t j = 0; j < k; ++j)
          if (x[r][j] != y[r][j]) fail(ErrorCode::InvalidArgument, "self-loop elimination changed a fixation probability");
    }
    for (std::size_t r = 0; r < x.size(); ++r) {
      const std::uint64_t s = sys.transient[r];
      for (std::size_t j = 0; j < k; ++j) {
        sol.pi_exact_[s * k + j] = x[r][j];
        sol.pi_[s * k + j] = to_double(x[r][j]);
      }
      sol.time_exact_[s] = x[r][k];
      sol.time_[s] = to_double(x[r][k]);
    }
  } else {
    double residual = 0.0;
    const Eigen::MatrixXd x = detail::solve_float(sys, space, false, residual);
    sol.residual_ = residual;
    if (options.cross_check) {
      double other = 0.0;
      const Eigen::MatrixXd y = detail::solve_float(sys, space, true, other);
      if ((x.leftCols(static_cast<Eigen::Index>(k)) - y.leftCols(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() > 1e-9)
        fail(ErrorCode::InvalidArgument, "self-loop elimination changed a fixation probability");
    }
    for (std::size_t r = 0; r < sys.transient.size(); ++r) {
      const std::uint64_t s = sys.transient[r];
      const auto row = static_cast<Eigen::Index>(r);
      for (std::size_t j = 0; j < k; ++j) sol.pi_[s * k + j] = x(row, static_cast<Eigen::Index>(j));
      sol.time_[s] = x(row, static_cast<Eigen::Index>(k));
    }
  }
  return sol;
}

/// pi_j under an initial distribution: sum over the support of Pr(M0) pi_j(M0).
struct DistributionValue {
  std::vector<double> fixation;
  std::vector<Rational> fixation_exact;  // empty for float solutions
};

inline DistributionValue exact_under_distribution(const ExactSolution& sol, const InitialDistribution& dist,
                                                  const Graph& graph, const TypeSystem& types) {
  const auto support = dist.enumerate(graph, types);
  const std::size_t k = types.size();
  DistributionValue out;
  out.fixation.assign(k, 0.0);
  if (sol.exact()) out.fixation_exact.assign(k, Rational(0));
  for (const auto& e : support) {
    const std::uint64_t s = sol.encode(e.assignment);
    for (TypeIndex j = 0; j < k; ++j) {
      if (sol.exact()) out.fixation_exact[j] += e.probability * sol.fixation_exact(s, j);
      else out.fixation[j] += to_double(e.probability) * sol.fixation(s, j);
    }
  }
  if (sol.exact())
    for (TypeIndex j = 0; j < k; ++j) out.fixation[j] = to_double(out.fixation_exact[j]);
  return out;
}

/// Export: instance fingerprint plus per-state pi vectors keyed by encoded index.
inline nlohmann::json to_json(const ExactSolution& sol, const TypeSystem& types) {
  const auto& space = sol.space();
  const std::size_t k = types.size();
  nlohmann::json states = nlohmann::json::object();
  for (std::uint64_t s = 0; s < space.size(); ++s) {
    nlohmann::json entry;
    entry["assignment"] = space.decode(s);
    nlohmann::json pi = nlohmann::json::array(), pi_float = nlohmann::json::array();
    for (TypeIndex j = 0; j < k; ++j) {
      pi_float.push_back(sol.fixation(s, j));
      if (sol.exact()) pi.push_back(to_string(sol.fixation_exact(s, j)));
    }
    entry["piFloat"] = pi_float;
    entry["expectedAbsorptionFloat"] = sol.absorption_time(s);
    if (sol.exact()) {
      entry["pi"] = pi;
      entry["expectedAbsorption"] = to_string(sol.absorption_time_exact(s));
    }
    states[std::to_string(s)] = entry;
  }
  return {{"fingerprint",
           {{"graph", hex64(sol.fingerprint().graph)},
            {"n", space.vertices()},
            {"types", types.names()},
            {"fitness", sol.fingerprint().fitness}}},
          {"backend", sol.exact() ? "rational" : "float"},
          {"maxResidual", sol.max_residual()},
          {"states", states}};
}

}  // namespace moran
