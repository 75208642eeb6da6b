#pragma once

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogsimp/core.hpp"

namespace cogsimp {

/// Operation frequencies and co-occurrence correlations for one tagged
/// subset. Zero-variance operations are flagged as degenerate: their
/// correlation row/column is zeroed and the diagonal kept at 1 so matrix
/// distances stay total.
inline OperationProfile build_profile(const std::vector<TaggedInstance>& tagged,
                                      std::string name) {
  if (tagged.empty()) throw std::runtime_error("profile '" + name + "': no instances");
  OperationProfile profile;
  profile.subset_name = std::move(name);
  profile.n_instances = tagged.size();
  const double n = static_cast<double>(tagged.size());

  std::array<double, kOperationCount> sums{};
  std::array<std::array<double, kOperationCount>, kOperationCount> cross{};
  for (const TaggedInstance& t : tagged) {
    for (std::size_t i = 0; i < kOperationCount; ++i) {
      const bool xi = t.ops.contains(kAllOperations[i]);
      if (!xi) continue;
      sums[i] += 1.0;
      for (std::size_t j = 0; j < kOperationCount; ++j)
        if (t.ops.contains(kAllOperations[j])) cross[i][j] += 1.0;
    }
  }

  std::array<double, kOperationCount> var{};
  for (std::size_t i = 0; i < kOperationCount; ++i) {
    profile.freqs[i] = sums[i] / n;
    var[i] = sums[i] - sums[i] * sums[i] / n;  // n * variance of the 0/1 vector
    if (var[i] <= 0.0) profile.degenerate_ops.insert(kAllOperations[i]);
  }

  for (std::size_t i = 0; i < kOperationCount; ++i) {
    for (std::size_t j = 0; j < kOperationCount; ++j) {
      if (i == j) {
        profile.corr[i][j] = 1.0;
        continue;
      }
      if (var[i] <= 0.0 || var[j] <= 0.0) {
        profile.corr[i][j] = 0.0;
        continue;
      }
      const double cov = cross[i][j] - sums[i] * sums[j] / n;
      double r = cov / std::sqrt(var[i] * var[j]);
      r = std::min(1.0, std::max(-1.0, r));
      profile.corr[i][j] = r;
    }
  }
  return profile;
}

/// Jensen-Shannon distance (natural log) between Bernoulli(p) and
/// Bernoulli(q).
inline double jsd_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw std::runtime_error("jsd_bernoulli: inputs must lie in [0, 1]");
  auto kl_term = [](double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; };
  const double m1 = 0.5 * (p + q);
  const double m0 = 0.5 * ((1.0 - p) + (1.0 - q));
  const double kl_p = kl_term(p, m1) + kl_term(1.0 - p, m0);
  const double kl_q = kl_term(q, m1) + kl_term(1.0 - q, m0);
  const double divergence = 0.5 * (kl_p + kl_q);
  return std::sqrt(std::max(0.0, divergence));
}

/// Mean Jensen-Shannon distance between matching per-operation frequencies.
inline double mean_jsd(const OperationProfile& a, const OperationProfile& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kOperationCount; ++i) sum += jsd_bernoulli(a.freqs[i], b.freqs[i]);
  return sum / static_cast<double>(kOperationCount);
}

/// Frobenius norm of the difference of the two correlation matrices.
inline double l2_matrix_distance(const OperationProfile& a, const OperationProfile& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kOperationCount; ++i)
    for (std::size_t j = 0; j < kOperationCount; ++j) {
      const double d = a.corr[i][j] - b.corr[i][j];
      sum += d * d;
    }
  return std::sqrt(sum);
}

/// Histogram of operations-per-instance counts, bins 0..9.
inline std::map<std::size_t, std::size_t> ops_histogram(const std::vector<TaggedInstance>& tagged) {
  std::map<std::size_t, std::size_t> out;
  for (const TaggedInstance& t : tagged) ++out[t.ops.size()];
  return out;
}

enum class ProfileMetric : std::uint8_t { MeanJsd, L2 };

// Symmetric matrix of pairwise distances between named subsets.
struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
};

inline DistanceMatrix pairwise_distances(const std::vector<OperationProfile>& profiles,
                                         ProfileMetric metric) {
  if (profiles.size() < 2)
    throw std::runtime_error("pairwise_distances: need at least two profiles");
  DistanceMatrix m;
  std::set<std::string> seen;
  for (const OperationProfile& p : profiles) {
    if (!seen.insert(p.subset_name).second)
      throw std::runtime_error("pairwise_distances: duplicate subset name '" + p.subset_name + "'");
    m.labels.push_back(p.subset_name);
  }
  const std::size_t n = profiles.size();
  m.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = metric == ProfileMetric::MeanJsd
                           ? mean_jsd(profiles[i], profiles[j])
                           : l2_matrix_distance(profiles[i], profiles[j]);
      m.values[i][j] = d;
      m.values[j][i] = d;
    }
  return m;
}

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

/// CSV rendering with a label header row and column.
inline std::string to_csv(const DistanceMatrix& m) {
  std::ostringstream os;
  os << "subset";
  for (const std::string& label : m.labels) os << ',' << label;
  os << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    os << m.labels[i];
    for (std::size_t j = 0; j < m.labels.size(); ++j)
      os << ',' << detail::format_double(m.values[i][j]);
    os << '\n';
  }
  return os.str();
}

}  // namespace cogsimp
