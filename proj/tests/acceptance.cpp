// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ktbt/bt.hpp"
#include "ktbt/experiment.hpp"
#include "ktbt/metrics.hpp"
#include "ktbt/sar.hpp"
#include "ktbt/stringbt.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace ktbt;

namespace {

// Tolerances and budgets.
constexpr double kRoundTripSeconds = 10.0;
constexpr double kOracleSeconds = 30.0;
constexpr double kPairSeconds = 5.0;
constexpr double kCompareSeconds = 300.0;
constexpr double kMetricTolerance = 1e-12;
constexpr double kFinalHeterogeneityFraction = 0.05;
constexpr double kMinFinalKnowledge = 0.95;
constexpr int kSpreadSeedsRequired = 18;
constexpr int kOrderingSeedsRequired = 8;
constexpr int kCrossingSeedsRequired = 7;
constexpr int kLossSeedsRequired = 9;

// Desk scale: a 600 x 600 arena stands in for the 1000 x 1000 one, so
// communication ranges shrink by the same factor.
constexpr double kDeskSide = 600.0;
constexpr double kDeskScale = kDeskSide / 1000.0;
constexpr Tick kDeskTicks = 20000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig desk_config(std::array<int, 6> composition, std::array<int, 4> targets, int trials) {
  SimConfig c;
  c.composition = composition;
  c.targets = targets;
  c.iterations = kDeskTicks;
  c.trials = trials;
  c.seed = 1;
  c.arena_width = kDeskSide;
  c.arena_height = kDeskSide;
  c.d_coms = 200.0 * kDeskScale;
  c.validate();
  return c;
}

std::vector<VariantResult> run_study(const SimConfig& config, Study study, std::vector<std::string> values) {
  ExperimentSpec spec;
  spec.config = config;
  spec.study = study;
  spec.study_values = std::move(values);
  return run_variants(expand_variants(spec), worker_count());
}

// A sampled field at `tick`, holding the last sample of a trial that
// stopped early.
double value_at(const TrialResult& t, Tick tick, const std::function<double(const SampleRow&)>& field) {
  double v = field(t.series.front());
  for (const SampleRow& row : t.series) {
    if (row.tick > tick) break;
    v = field(row);
  }
  return v;
}

void criterion_1() {
  const auto t0 = Clock::now();
  bool ok = true;
  const Node control = parse(testing::kControlListing);
  ok &= parse(serialize(control)) == control && serialize(control) == testing::kControlCanonical;

  testing::TreeGen gen(101);
  int round_trips = 0;
  for (int i = 0; i < 1000; ++i) {
    const Node tree = gen.tree(5);
    const std::string doc = serialize(tree);
    const Node back = parse(doc);
    if (testing::depth_of(tree) <= 5 && back == tree && serialize(back) == doc) ++round_trips;
  }
  ok &= round_trips == 1000;

  std::mt19937_64 rng(11);
  const std::vector<std::string> tokens = {"<Root>", "<sq>", "<sl>", "<pl>", "<e>", "<c>(", "<a>(", "<w>(",
                                           "<inv>", "<tt1>(", "<tt2>(", ")", "!", "x", "9", " ", "<", "("};
  int fuzzed = 0;
  int located = 0;
  for (int i = 0; i < 64; ++i) {
    std::string doc;
    while (doc.size() < 65536) {
      if (rng() % 4 == 0) {
        doc += static_cast<char>(rng() & 0xff);
      } else {
        doc += tokens[rng() % tokens.size()];
      }
    }
    doc.resize(65536);
    try {
      (void)parse(doc);
    } catch (const ParseError& e) {
      if (e.offset() <= doc.size()) ++located;
      ++fuzzed;
      continue;
    }
    ++fuzzed;
    ++located;
  }
  ok &= located == fuzzed;
  const double secs = seconds_since(t0);
  ok &= secs < kRoundTripSeconds;
  report(1, ok, fmt("round-trips %d/1000, fuzz inputs %d of 64 KiB handled, %.2f s", round_trips, fuzzed, secs));
}

void criterion_2() {
  const auto t0 = Clock::now();
  ActionRegistry reg;
  reg.add("S", [](StateManager&, AgentId) { return NodeStatus::Success; });
  reg.add("F", [](StateManager&, AgentId) { return NodeStatus::Failure; });
  reg.add("R", [](StateManager&, AgentId) { return NodeStatus::Running; });
  testing::TreeGen gen(202);
  gen.with_timers = false;
  gen.with_fixed_actions = true;
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    Node tree = gen.tree(4);
    if (testing::depth_of(tree) > 4) ++mismatches;
    for (unsigned mask = 0; mask < 32; ++mask) {
      std::map<std::string, bool> flags;
      StateManager sm;
      for (unsigned i = 0; i < 5; ++i) {
        flags[testing::kOracleFlags[i]] = (mask >> i) & 1u;
        sm.set_flag(testing::kOracleFlags[i], (mask >> i) & 1u);
      }
      if (tick(tree, sm, reg) != testing::to_status(testing::reference_eval(tree, flags))) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  report(2, mismatches == 0 && secs < kOracleSeconds,
         fmt("16000 evaluations, %d mismatches, %.2f s", mismatches, secs));
}

void criterion_3() {
  std::vector<Tick> fired;
  ActionRegistry reg;
  reg.add("Child", [&](StateManager& sm, AgentId) {
    fired.push_back(sm.tick_now);
    return NodeStatus::Success;
  });
  StateManager sm;
  Node pulse = Node::tt1(3, Node::action("Child"));
  for (Tick t = 0; t < 40; ++t) {
    sm.tick_now = t;
    (void)tick(pulse, sm, reg);
  }
  std::vector<Tick> expected_pulse;
  for (Tick t = 3; t < 40; t += 4) expected_pulse.push_back(t);
  const bool pulse_ok = fired == expected_pulse;
  const std::size_t pulses = fired.size();

  fired.clear();
  Node run = Node::tt2(2, Node::action("Child"));
  std::vector<NodeStatus> statuses;
  for (Tick t = 0; t < 4; ++t) {
    sm.tick_now = t;
    statuses.push_back(tick(run, sm, reg));
  }
  const bool run_ok = fired == std::vector<Tick>{0, 1, 2} &&
                      statuses == std::vector<NodeStatus>{NodeStatus::Success, NodeStatus::Success,
                                                          NodeStatus::Success, NodeStatus::Failure};
  report(3, pulse_ok && run_ok,
         fmt("TT1(3) fired %zu times over 40 ticks, TT2(2) trace %s", pulses, run_ok ? "exact" : "differs"));
  if (!pulse_ok) std::printf("              TT1 trace differs from 3, 7, ..., 39\n");
}

void criterion_4() {
  const auto t0 = Clock::now();
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto out = testing::run_teacher_learner(seed);
    if (out.learned && out.collected) ++good;
  }
  const double secs = seconds_since(t0);
  report(4, good == 100 && secs < kPairSeconds, fmt("learned and collected in %d/100 seeds, %.2f s", good, secs));
}

void criterion_5() {
  int enough = 0;
  int short_by_one = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto four = testing::run_teaching_chain(seed, 4);
    if (std::all_of(four.begin(), four.end(), [](bool b) { return b; })) ++enough;
    const auto three = testing::run_teaching_chain(seed, 3);
    if (std::any_of(three.begin(), three.end(), [](bool b) { return !b; })) ++short_by_one;
  }
  report(5, enough == 20 && short_by_one == 20,
         fmt("4 targets: all learn in %d/20 seeds; 3 targets: someone never learns in %d/20", enough, short_by_one));
}

// Shared by criteria 6 and 10: one knowing robot among eleven ignorant ones,
// with plenty of targets of every color.
std::vector<TrialResult> spread_trials() {
  const auto results = run_study(desk_config({11, 1, 0, 0, 0, 0}, {40, 40, 40, 40}, 20), Study::None, {});
  return results.front().trials;
}

void criterion_6(const std::vector<TrialResult>& trials) {
  int full = 0;
  bool monotone = true;
  for (const TrialResult& t : trials) {
    if (t.series.back().knows[4] == 12) ++full;
    for (std::size_t i = 1; i < t.series.size(); ++i) {
      if (t.series[i].knowledge_score < t.series[i - 1].knowledge_score) monotone = false;
    }
  }
  report(6, full >= kSpreadSeedsRequired && monotone,
         fmt("all 12 know 4 colors in %d/20 seeds (need %d); knowledge score %s", full, kSpreadSeedsRequired,
             monotone ? "non-decreasing everywhere" : "decreased somewhere"));
}

void criterion_7() {
  const auto t0 = Clock::now();
  const SimConfig config = desk_config({0, 0, 3, 3, 3, 3}, {10, 10, 10, 10}, 10);
  const auto results = run_study(config, Study::Compare, {"bl1", "bl2", "ktbt"});
  const auto& bl1 = results[0].trials;
  const auto& bl2 = results[1].trials;
  const auto& kt = results[2].trials;
  int ordered = 0;
  int crossed = 0;
  for (std::size_t i = 0; i < kt.size(); ++i) {
    const double a = censored_ticks_to_99(bl1[i], config);
    const double k = censored_ticks_to_99(kt[i], config);
    const double b = censored_ticks_to_99(bl2[i], config);
    if (a <= k && k < b) ++ordered;

    // The first sample where the curves differ must have KT-BT behind, and
    // a later sample must have it ahead.
    std::optional<Tick> behind;
    bool ahead_later = false;
    for (Tick tick = 0; tick <= config.iterations; tick += config.sample_interval) {
      const auto pct = [](const SampleRow& r) { return r.collected_pct; };
      const double vk = value_at(kt[i], tick, pct);
      const double vb = value_at(bl2[i], tick, pct);
      if (!behind) {
        if (vk > vb) break;
        if (vk < vb) behind = tick;
      } else if (vk > vb) {
        ahead_later = true;
        break;
      }
    }
    if (behind && ahead_later) ++crossed;
  }
  const double secs = seconds_since(t0);
  report(7, ordered >= kOrderingSeedsRequired && crossed >= kCrossingSeedsRequired && secs < kCompareSeconds,
         fmt("BL1 <= KT-BT < BL2 in %d/10 seeds (need %d), curves cross in %d/10 (need %d), %.1f s", ordered,
             kOrderingSeedsRequired, crossed, kCrossingSeedsRequired, secs));
}

void criterion_8() {
  const std::vector<std::string> counts = {"4", "8", "16", "32"};
  const auto results = run_study(desk_config({11, 1, 0, 0, 0, 0}, {10, 10, 10, 10}, 10), Study::Opportunities, counts);
  std::vector<double> means;
  for (const VariantResult& v : results) {
    double sum = 0.0;
    for (const TrialResult& t : v.trials) sum += t.series.back().knows[4];
    means.push_back(sum / static_cast<double>(v.trials.size()));
  }
  const bool ok = std::is_sorted(means.begin(), means.end());
  report(8, ok, fmt("mean final knows-4 for 4/8/16/32 targets: %.2f %.2f %.2f %.2f", means[0], means[1], means[2],
                    means[3]));
}

void criterion_9() {
  std::vector<std::string> ranges;
  for (double r : {100.0, 200.0, 500.0, 800.0, 1000.0}) ranges.push_back(fmt("%g", r * kDeskScale));
  const SimConfig config = desk_config({0, 0, 3, 3, 3, 3}, {10, 10, 10, 10}, 10);
  const auto results = run_study(config, Study::CommRange, ranges);
  const Tick fixed_tick = config.iterations / 4;

  int monotone_seeds = 0;
  for (int i = 0; i < config.trials; ++i) {
    bool ok = true;
    for (std::size_t v = 1; v < results.size(); ++v) {
      if (results[v].trials[i].comms.queries_lost > results[v - 1].trials[i].comms.queries_lost) ok = false;
    }
    if (ok) ++monotone_seeds;
  }
  std::vector<double> collected;
  for (const VariantResult& v : results) {
    double sum = 0.0;
    for (const TrialResult& t : v.trials) sum += value_at(t, fixed_tick, [](const SampleRow& r) { return r.collected_pct; });
    collected.push_back(sum / static_cast<double>(v.trials.size()));
  }
  const bool collected_ok = std::is_sorted(collected.begin(), collected.end());
  std::string pct;
  for (double c : collected) pct += fmt(" %.2f", c);
  report(9, monotone_seeds >= kLossSeedsRequired && collected_ok,
         fmt("queries_lost non-increasing in %d/10 seeds (need %d); mean collected %% at tick %lld:%s", monotone_seeds,
             kLossSeedsRequired, static_cast<long long>(fixed_tick), pct.c_str()));
}

void criterion_10(const std::vector<TrialResult>& trials, Tick interval, Tick iterations) {
  // Mean trajectory on the sampling grid; early finishers hold their last row.
  std::vector<double> het;
  std::vector<double> score;
  for (Tick tick = 0; tick <= iterations; tick += interval) {
    double h = 0.0;
    double s = 0.0;
    for (const TrialResult& t : trials) {
      h += value_at(t, tick, [](const SampleRow& r) { return r.heterogeneity; });
      s += value_at(t, tick, [](const SampleRow& r) { return r.knowledge_score; });
    }
    het.push_back(h / static_cast<double>(trials.size()));
    score.push_back(s / static_cast<double>(trials.size()));
  }
  // 11 robots at g0 and one at g4, written out by hand.
  const double p0 = 11.0 / 12.0;
  const double p4 = 1.0 / 12.0;
  const double start = (-p0 * std::log(p0) - p4 * std::log(p4)) * (2.0 * p0 * p4 * 16.0);
  const double peak = *std::max_element(het.begin(), het.end());
  const bool shape = std::abs(het.front() - start) <= kMetricTolerance && peak > het.front() &&
                     het.back() < kFinalHeterogeneityFraction * peak && score.back() >= kMinFinalKnowledge;

  const auto dm = DistanceMatrix::knowledge_distance();
  const double ln4 = complexity(SpeciesCensus{{0, 1, 1, 1, 1}});
  const double disp = disparity(SpeciesCensus{{39, 0, 0, 0, 1}}, dm);
  std::vector<int> levels(39, 0);
  levels.push_back(4);
  const double start_score = mean_knowledge_score(levels);
  const bool units = std::abs(ln4 - std::log(4.0)) <= kMetricTolerance && std::abs(disp - 0.78) <= kMetricTolerance &&
                     start_score == 0.025;
  report(10, shape && units,
         fmt("heterogeneity start %.6f (expected %.6f), peak %.4f, final %.4f; knowledge score %.3f; unit values %s",
             het.front(), start, peak, het.back(), score.back(), units ? "exact" : "off"));
}

void criterion_11() {
  SimConfig config = desk_config({1, 1, 1, 1, 1, 1}, {5, 5, 5, 5}, 4);
  config.obstacles = true;
  config.iterations = 4000;
  bool same = true;
  for (std::size_t trial : {0u, 3u}) {
    same &= trial_csv(run_trial(config, trial)) == trial_csv(run_trial(config, trial));
  }
  const std::vector<Variant> variants = {{"a", config}};
  const auto serial = run_variants(variants, 1);
  const auto pooled = run_variants(variants, 3);
  for (int i = 0; i < config.trials; ++i) {
    same &= trial_csv(serial[0].trials[i]) == trial_csv(pooled[0].trials[i]);
  }
  report(11, same, same ? "re-runs and worker counts give byte-identical CSVs" : "CSV output differs between runs");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  const auto spread = spread_trials();
  criterion_6(spread);
  criterion_7();
  criterion_8();
  criterion_9();
  const SimConfig spread_config = desk_config({11, 1, 0, 0, 0, 0}, {40, 40, 40, 40}, 20);
  criterion_10(spread, spread_config.sample_interval, spread_config.iterations);
  criterion_11();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
