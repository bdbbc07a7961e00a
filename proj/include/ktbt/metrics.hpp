#pragma once

// Group knowledge metrics. Robots are binned into species g0..g4 by how many
// target colors they can handle.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace ktbt {

inline constexpr std::size_t kSpecies = 5;

struct SpeciesCensus {
  std::array<std::size_t, kSpecies> counts{};

  std::size_t total() const;
  /// counts[i] / total. Throws std::domain_error on an empty census.
  double proportion(std::size_t i) const;

  /// Census of robots with the given knows-levels (each in 0..4).
  static SpeciesCensus from_levels(std::span<const int> levels);
};

class DistanceMatrix {
 public:
  /// d(i, j) = |i - j|.
  static DistanceMatrix knowledge_distance();
  double operator()(std::size_t i, std::size_t j) const { return d_[i][j]; }

 private:
  std::array<std::array<double, kSpecies>, kSpecies> d_{};
};

/// Shannon entropy of the species distribution, natural log.
double complexity(const SpeciesCensus& census);
/// Rao's quadratic entropy: sum_ij p_i p_j d(i,j)^2.
double disparity(const SpeciesCensus& census, const DistanceMatrix& dm);
double heterogeneity(const SpeciesCensus& census, const DistanceMatrix& dm);

/// Per-color knowledge score (four equally weighted colors summing to 1).
inline constexpr double kColorScore = 0.25;

/// Mean over robots of 0.25 * (colors handled). Throws std::domain_error when
/// `colors_known` is empty.
double mean_knowledge_score(std::span<const int> colors_known);

}  // namespace ktbt
