#include "ktbt/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

namespace ktbt {

std::size_t SpeciesCensus::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

double SpeciesCensus::proportion(std::size_t i) const {
  const std::size_t p = total();
  if (p == 0) throw std::domain_error("empty census");
  return static_cast<double>(counts.at(i)) / static_cast<double>(p);
}

SpeciesCensus SpeciesCensus::from_levels(std::span<const int> levels) {
  SpeciesCensus c;
  for (int level : levels) {
    if (level < 0 || level >= static_cast<int>(kSpecies)) throw std::out_of_range("knows-level out of range");
    ++c.counts[static_cast<std::size_t>(level)];
  }
  return c;
}

DistanceMatrix DistanceMatrix::knowledge_distance() {
  DistanceMatrix m;
  for (std::size_t i = 0; i < kSpecies; ++i) {
    for (std::size_t j = 0; j < kSpecies; ++j) {
      m.d_[i][j] = std::abs(static_cast<double>(i) - static_cast<double>(j));
    }
  }
  return m;
}

double complexity(const SpeciesCensus& census) {
  double e = 0.0;
  for (std::size_t i = 0; i < kSpecies; ++i) {
    const double p = census.proportion(i);
    if (p > 0.0) e -= p * std::log(p);
  }
  return e;
}

double disparity(const SpeciesCensus& census, const DistanceMatrix& dm) {
  std::array<double, kSpecies> p{};
  for (std::size_t i = 0; i < kSpecies; ++i) p[i] = census.proportion(i);
  double q = 0.0;
  for (std::size_t i = 0; i < kSpecies; ++i) {
    for (std::size_t j = 0; j < kSpecies; ++j) q += p[i] * p[j] * dm(i, j) * dm(i, j);
  }
  return q;
}

double heterogeneity(const SpeciesCensus& census, const DistanceMatrix& dm) {
  return complexity(census) * disparity(census, dm);
}

double mean_knowledge_score(std::span<const int> colors_known) {
  if (colors_known.empty()) throw std::domain_error("empty population");
  double sum = 0.0;
  for (int k : colors_known) sum += kColorScore * k;
  return sum / static_cast<double>(colors_known.size());
}

}  // namespace ktbt
