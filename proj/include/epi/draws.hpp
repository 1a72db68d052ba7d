#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epi {

/// Retained posterior draws in constrained space, stored row-major with one row
/// per draw and chains laid out consecutively.
struct PosteriorDraws {
  std::vector<std::string> names;
  std::size_t n_chains = 0;
  std::size_t draws_per_chain = 0;
  std::vector<double> values;
  std::vector<int> chain;
  std::vector<double> log_density;  // unconstrained-space log posterior incl. Jacobian
  std::vector<char> divergent;
  std::vector<int> tree_depth;
  std::vector<double> step_size;
  std::vector<int> n_leapfrog;
  std::vector<double> accept_stat;

  std::size_t size() const { return chain.size(); }
  std::size_t n_params() const { return names.size(); }

  std::span<const double> row(std::size_t draw) const {
    return {values.data() + draw * n_params(), n_params()};
  }
  double at(std::size_t draw, std::size_t param) const { return values[draw * n_params() + param]; }

  std::vector<double> column(std::size_t param) const {
    std::vector<double> out(size());
    for (std::size_t d = 0; d < size(); ++d) out[d] = at(d, param);
    return out;
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == name) return j;
    }
    throw std::out_of_range("posterior draws: no parameter named " + name);
  }

  void append(std::span<const double> theta, int chain_id, double lp, bool div, int depth,
              double eps, int leapfrogs, double accept) {
    values.insert(values.end(), theta.begin(), theta.end());
    chain.push_back(chain_id);
    log_density.push_back(lp);
    divergent.push_back(div ? 1 : 0);
    tree_depth.push_back(depth);
    step_size.push_back(eps);
    n_leapfrog.push_back(leapfrogs);
    accept_stat.push_back(accept);
  }
};

}  // namespace epi
