#pragma once

#include <string>
#include <vector>

#include "epi/draws.hpp"

namespace epi::mcmc {

/// Chains of one scalar quantity, one inner vector per chain.
using ChainSet = std::vector<std::vector<double>>;

/// Rank-normalized split potential scale reduction factor; the larger of the
/// bulk and folded (tail) variants. NaN when the draws have no variance.
double split_rhat(const ChainSet& chains);

/// Effective sample size of the rank-normalized split chains, with the
/// autocorrelation sum truncated at the first negative sum of adjacent pairs.
/// NaN when the draws have no variance.
double effective_sample_size(const ChainSet& chains);

/// Same estimator on the raw (not rank-normalized) draws.
double effective_sample_size_raw(const ChainSet& chains);

struct ParameterDiagnostics {
  std::string name;
  double rhat = 0.0;
  double ess = 0.0;
  bool degenerate = false;  // zero variance: rhat and ess undefined
};

struct Diagnostics {
  std::vector<ParameterDiagnostics> parameters;
  std::size_t divergences = 0;
  double max_rhat() const;  // over non-degenerate parameters
  double min_ess() const;
};

/// Requires at least two chains and 100 retained draws per chain.
Diagnostics diagnostics(const PosteriorDraws& draws);

ChainSet chains_of(const PosteriorDraws& draws, std::size_t param);

}  // namespace epi::mcmc
